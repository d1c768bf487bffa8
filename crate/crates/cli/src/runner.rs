//! Validation, orchestration and artifact output for one run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cylspec::assembly::{finite_gap_certificate, GapCertificate, ModeBudget, SpectrumReport};
use cylspec::cross_section::{CrossSectionSpec, CrossSectionSpectrum};
use cylspec::liouville::{build_potential, Flavor, LiouvilleData, ModePotential};
use cylspec::pipeline::{analyze, budget_for, oracle_comparison, Analysis, ModeOutcome, ModeResult, Numerics, OracleRow};
use cylspec::profile::{check_product_below_limit, Classification, CoefficientProfile, EssentialBounds, ProductCheck};
use cylspec::schrodinger::{band_structure, find_witness, BandStructure, BoundStateResult, VariationalBound};
use serde::Serialize;
use thiserror::Error;

use crate::config::{OracleConfig, OutputConfig, RunConfig, Task, SCHEMA_VERSION};
use crate::output::{num, to_json, write_atomic};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) | RunError::Io { .. } => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

impl From<cylspec::Error> for RunError {
    fn from(e: cylspec::Error) -> Self {
        if e.is_validation() {
            RunError::Validation(e.to_string())
        } else {
            RunError::Numerical(e.to_string())
        }
    }
}

fn io_error(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Io { context, source }
}

/// Command-line overrides.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub jobs: usize,
    /// Also run the oracle comparison for analysis tasks.
    pub oracle: bool,
    pub dump_potentials: bool,
}

/// Files written by a successful run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub report_path: PathBuf,
    pub files: Vec<PathBuf>,
}

/// A configuration that passed every check.
struct Validated {
    task: Task,
    cross: CrossSectionSpec,
    profile: CoefficientProfile,
    e_max: f64,
    numerics: Numerics,
    oracle: Option<(OracleConfig, f64)>,
    outputs: OutputConfig,
    csv_dir: PathBuf,
    budget: ModeBudget,
}

pub fn run(config_path: &Path, options: RunOptions) -> Result<RunSummary, RunError> {
    let text = fs::read_to_string(config_path).map_err(io_error(format!("cannot read {}", config_path.display())))?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| RunError::Validation(e.to_string()))?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let v = validate(&config, base, options)?;
    let analysis = analyze(&v.cross, &v.profile, v.e_max, v.numerics, options.jobs)?;
    let witness = match v.task {
        Task::StabilizingAnalysis => Some(witness_section(&analysis, &v)?),
        _ => None,
    };
    let certificate = match v.task {
        Task::PeriodicAnalysis => Some(certificate_section(&analysis, &v)?),
        _ => None,
    };
    let oracle = match &v.oracle {
        Some((settings, tolerance)) => Some(oracle_section(&analysis.data, &v, settings, *tolerance)?),
        None => None,
    };

    let document = ReportDocument {
        schema_version: SCHEMA_VERSION,
        task: v.task,
        classification: v.profile.classification,
        essential_bounds: v.profile.essential_bounds(),
        spectrum: &analysis.report,
        variational_witness: witness,
        finite_gap_certificate: certificate,
        oracle: oracle.as_ref(),
    };
    let mut files = Vec::new();
    let json = to_json(&document).map_err(|e| RunError::Numerical(format!("report serialization: {e}")))?;
    write_atomic(&v.outputs.report_path, &json)
        .map_err(io_error(format!("cannot write {}", v.outputs.report_path.display())))?;
    files.push(v.outputs.report_path.clone());
    files.extend(write_csvs(&analysis, &v, oracle.as_ref(), options.dump_potentials)?);

    if let Some(o) = &oracle {
        if !o.passed {
            return Err(RunError::Numerical(format!(
                "oracle deviation {:.3e} exceeds tolerance {:.3e}",
                o.max_relative_deviation, o.tolerance
            )));
        }
    }
    Ok(RunSummary {
        report_path: v.outputs.report_path,
        files,
    })
}

fn validate(config: &RunConfig, base: &Path, options: RunOptions) -> Result<Validated, RunError> {
    let bad = |m: String| Err(RunError::Validation(m));
    if config.schema_version != SCHEMA_VERSION {
        return bad(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            config.schema_version
        ));
    }
    if options.jobs == 0 {
        return bad("job count must be at least 1".into());
    }
    let profile = config.profile.build()?;
    match (config.task, profile.is_periodic()) {
        (Task::StabilizingAnalysis, true) => {
            return bad("task/profile mismatch: stabilizing_analysis needs a stabilizing profile".into())
        }
        (Task::PeriodicAnalysis, false) => {
            return bad("task/profile mismatch: periodic_analysis needs a periodic profile".into())
        }
        _ => {}
    }
    let cross = config.cross_section.build(base)?;
    // Rejects domains violating the Dirichlet/Neumann interlacing.
    CrossSectionSpectrum::compute(&cross, 1, 2)?;

    let n = &config.numerics;
    if !(n.e_max.is_finite() && n.e_max > 0.0) {
        return bad(format!("e_max must be positive, got {}", n.e_max));
    }
    if let Some(l) = n.window_halfwidth {
        if !(l.is_finite() && l > 0.0) {
            return bad(format!("window_halfwidth must be positive, got {l}"));
        }
    }
    if let Some(g) = n.grid {
        if g < 4 {
            return bad(format!("grid needs at least 4 intervals, got {g}"));
        }
    }
    let tolerance = n.tolerances.oracle_relative;
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return bad(format!("oracle_relative must be positive, got {tolerance}"));
    }

    let o = &config.oracle;
    let oracle_wanted = config.task == Task::OracleCheck || options.oracle;
    if oracle_wanted {
        if o.eigenvalue_count == 0 {
            return bad("oracle eigenvalue_count must be at least 1".into());
        }
        if !(o.window_halfwidth.is_finite() && o.window_halfwidth > 0.0) {
            return bad(format!("oracle window_halfwidth must be positive, got {}", o.window_halfwidth));
        }
        if o.grid < 4 || o.eigenvalue_count >= o.grid {
            return bad(format!("oracle grid {} too small", o.grid));
        }
        if let Some(cs) = &o.mode_constants {
            if cs.is_empty() || cs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                return bad("oracle mode_constants must be a nonempty list of nonnegative numbers".into());
            }
        }
    }

    let mut outputs = config.outputs.resolved(base);
    outputs.dump_potentials |= options.dump_potentials;
    let report_dir = outputs
        .report_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    if outputs.report_path.is_dir() {
        return bad(format!("report_path {} is a directory", outputs.report_path.display()));
    }
    let csv_dir = outputs.csv_dir.clone().unwrap_or_else(|| report_dir.clone());
    for dir in [&report_dir, &csv_dir] {
        fs::create_dir_all(dir).map_err(io_error(format!("cannot create {}", dir.display())))?;
        if fs::metadata(dir).map(|m| m.permissions().readonly()).unwrap_or(true) {
            return bad(format!("output directory {} is not writable", dir.display()));
        }
    }

    let budget = budget_for(&cross, &profile, n.e_max)?;
    Ok(Validated {
        task: config.task,
        cross,
        profile,
        e_max: n.e_max,
        numerics: Numerics {
            window_halfwidth: n.window_halfwidth,
            grid: n.grid,
        },
        oracle: oracle_wanted.then(|| (o.clone(), tolerance)),
        outputs,
        csv_dir,
        budget,
    })
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    schema_version: u32,
    task: Task,
    classification: Classification,
    essential_bounds: EssentialBounds,
    spectrum: &'a SpectrumReport,
    variational_witness: Option<WitnessSection>,
    finite_gap_certificate: Option<GapCertificate>,
    oracle: Option<&'a OracleSection>,
}

#[derive(Serialize)]
struct WitnessSection {
    product_check: ProductCheck,
    /// Trapezoid test function centred where εμ peaks; absent when εμ never exceeds its limit.
    bound: Option<VariationalBound>,
    /// Electric modes in the budget whose constant exceeds the sufficient constant.
    binding_modes: Vec<String>,
}

#[derive(Serialize)]
struct OracleSection {
    tolerance: f64,
    window_halfwidth: f64,
    grid: usize,
    max_relative_deviation: f64,
    passed: bool,
    rows: Vec<OracleRow>,
}

fn lowest_dirichlet(cross: &CrossSectionSpec, count: usize) -> Result<Vec<f64>, RunError> {
    Ok(CrossSectionSpectrum::compute(cross, count, 1)?.dirichlet)
}

fn witness_section(analysis: &Analysis, v: &Validated) -> Result<WitnessSection, RunError> {
    let product_check = check_product_below_limit(&v.profile)?;
    let ProductCheck::ExceedsAt { z0 } = product_check else {
        return Ok(WitnessSection {
            product_check,
            bound: None,
            binding_modes: Vec::new(),
        });
    };
    let lambda1 = lowest_dirichlet(&v.cross, 1)?[0];
    let potential = build_potential(&analysis.data, Flavor::Electric(1), lambda1, v.cross.boundary_components())?;
    let bound = find_witness(&potential, analysis.data.y_of_z(z0))?;
    let binding_modes = v
        .budget
        .modes()
        .into_iter()
        .filter(|(f, c)| matches!(f, Flavor::Electric(_)) && *c > bound.sufficient_constant)
        .map(|(f, _)| f.to_string())
        .collect();
    Ok(WitnessSection {
        product_check,
        bound: Some(bound),
        binding_modes,
    })
}

fn electric_bands(analysis: &Analysis, v: &Validated, k: usize, lambda: f64) -> Result<(BandStructure, f64), RunError> {
    let existing = analysis.outcomes.iter().find_map(|o| match &o.result {
        ModeResult::Bands(b) if o.spectrum.provenance.flavor == Flavor::Electric(k) => Some((b.clone(), o.potential.mean())),
        _ => None,
    });
    if let Some((bands, Some(mean))) = existing {
        return Ok((bands, mean));
    }
    let potential = build_potential(&analysis.data, Flavor::Electric(k), lambda, v.cross.boundary_components())?;
    let mean = potential
        .mean()
        .ok_or_else(|| RunError::Validation("finite-gap certificate needs a periodic potential".into()))?;
    Ok((band_structure(&potential, v.e_max)?, mean))
}

fn certificate_section(analysis: &Analysis, v: &Validated) -> Result<GapCertificate, RunError> {
    let lambdas = lowest_dirichlet(&v.cross, 2)?;
    let (first, w1) = electric_bands(analysis, v, 1, lambdas[0])?;
    let (second, w2) = electric_bands(analysis, v, 2, lambdas[1])?;
    Ok(finite_gap_certificate(&first, &second, w1, w2))
}

fn oracle_section(
    data: &Arc<LiouvilleData>,
    v: &Validated,
    settings: &OracleConfig,
    tolerance: f64,
) -> Result<OracleSection, RunError> {
    let constants = match &settings.mode_constants {
        Some(cs) => cs.clone(),
        None => lowest_dirichlet(&v.cross, 2)?,
    };
    let mut rows = Vec::new();
    for (i, c) in constants.iter().enumerate() {
        rows.extend(oracle_comparison(
            data,
            Flavor::Electric(i + 1),
            *c,
            v.cross.boundary_components(),
            settings.window_halfwidth,
            settings.grid,
            settings.eigenvalue_count,
        )?);
    }
    let max_relative_deviation = rows.iter().map(|r| r.relative_deviation).fold(0.0, f64::max);
    Ok(OracleSection {
        tolerance,
        window_halfwidth: settings.window_halfwidth,
        grid: settings.grid,
        max_relative_deviation,
        passed: max_relative_deviation <= tolerance,
        rows,
    })
}

fn write_csvs(
    analysis: &Analysis,
    v: &Validated,
    oracle: Option<&OracleSection>,
    dump_potentials: bool,
) -> Result<Vec<PathBuf>, RunError> {
    let mut files = Vec::new();
    let mut put = |name: String, body: String| -> Result<(), RunError> {
        let path = v.csv_dir.join(name);
        write_atomic(&path, body.as_bytes()).map_err(io_error(format!("cannot write {}", path.display())))?;
        files.push(path);
        Ok(())
    };
    for outcome in &analysis.outcomes {
        let label = outcome.spectrum.provenance.label();
        match &outcome.result {
            ModeResult::Bound(states) => put(format!("bound_states_{label}.csv"), bound_states_csv(outcome, states))?,
            ModeResult::Bands(bands) => put(format!("bands_{label}.csv"), bands_csv(bands))?,
        }
        if v.outputs.dump_potentials || dump_potentials {
            put(format!("potential_{label}.csv"), potential_csv(&outcome.potential, &outcome.result))?;
        }
    }
    if let Some(o) = oracle {
        put("oracle.csv".into(), oracle_csv(o))?;
    }
    Ok(files)
}

fn bound_states_csv(outcome: &ModeOutcome, states: &BoundStateResult) -> String {
    let mut s = String::from("index,eigenvalue,error,threshold,mode_constant\n");
    for (i, (e, err)) in states.eigenvalues.iter().zip(&states.refinement_estimate).enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            i + 1,
            num(*e),
            num(*err),
            num(states.threshold),
            num(outcome.spectrum.provenance.mode_constant)
        );
    }
    s
}

fn bands_csv(bands: &BandStructure) -> String {
    let mut s = String::from("index,lower_edge,upper_edge,truncated\n");
    for b in &bands.raw_bands {
        let _ = writeln!(s, "{},{},{},{}", b.index, num(b.alpha), num(b.beta), b.truncated);
    }
    s
}

fn potential_csv(potential: &ModePotential, result: &ModeResult) -> String {
    const SAMPLES: usize = 2000;
    let (lo, hi) = match result {
        ModeResult::Bound(states) => states.window,
        ModeResult::Bands(bands) => (0.0, bands.period_b),
    };
    let mut s = String::from("y,V\n");
    for i in 0..=SAMPLES {
        let y = lo + (hi - lo) * i as f64 / SAMPLES as f64;
        let _ = writeln!(s, "{},{}", num(y), num(potential.value(y)));
    }
    s
}

fn oracle_csv(o: &OracleSection) -> String {
    let mut s = String::from("flavor,mode_constant,index,weighted,transformed,relative_deviation\n");
    for r in &o.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.flavor,
            num(r.mode_constant),
            r.index,
            num(r.weighted),
            num(r.transformed),
            num(r.relative_deviation)
        );
    }
    s
}
