//! Spectral analysis of the Maxwell operator in a cylinder `U × ℝ` whose
//! permittivity ε and permeability μ are scalar functions of the axial
//! coordinate only.
//!
//! The square of the operator splits into countably many one-dimensional
//! operators indexed by the Dirichlet and Neumann Laplace eigenvalues of the
//! cross-section. After a Liouville change of variables each of them becomes a
//! Schrödinger operator `−d²/dy² + V(y)` on the real line, and the spectrum of
//! the Maxwell operator is recovered as `±√` of the union of their spectra.
//!
//! Module map:
//!
//! * [`cross_section`]: Laplace eigenvalues λ_k, κ_l of the cross-section.
//! * [`profile`]: coefficient families with closed-form derivatives.
//! * [`liouville`]: the monotone map `y(z)`, gauge function η and mode potentials.
//! * [`schrodinger`]: bound states, Sturm counts, monodromy and band structure.
//! * [`weighted`]: direct discretization of the weighted operators in `z`.
//! * [`assembly`]: union of per-mode spectra and the Maxwell spectrum report.
//! * [`pipeline`]: the whole computation for one configuration.

pub mod assembly;
pub mod bessel;
pub mod cross_section;
mod error;
pub mod floquet;
pub mod liouville;
pub mod ode;
pub mod pipeline;
pub mod profile;
pub mod quadrature;
pub mod schrodinger;
pub mod tridiag;
pub mod weighted;

pub use error::{Error, Result};
