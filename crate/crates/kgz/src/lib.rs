//! Solitons, spectral evolution and stability diagnostics for the 1-D
//! Klein-Gordon-Zakharov system
//!
//! The system couples a complex Klein-Gordon field `u` (with conjugate
//! momentum `rho = -u_t`) to an acoustic field `(v, n)`:
//!
//! ```text
//! u_t   = -rho
//! rho_t = -u_xx + u + alpha u v + beta |u|^2 u
//! v_t   = n_x
//! n_t   = v_x + (|u|^2)_x
//! ```
//!
//! posed on a periodic interval with Fourier pseudospectral discretization.
//! The crate provides the closed-form soliton family and its admissible
//! parameter range ([`soliton`]), exact-linear-part integrators running
//! forward or backward in time ([`evolve`]), conserved functionals with
//! grid-exact Hamiltonian structure ([`observables`]), the linearized
//! operators around a soliton together with their spectra and energy
//! quadratic forms ([`linops`]), modulation-parameter fitting
//! ([`modulation`]), and the backward-from-final-data construction of
//! multi-soliton solutions ([`construction`]).

pub mod construction;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod linops;
pub mod modulation;
pub mod observables;
pub mod soliton;
pub mod state;

pub use error::{Error, Result};
pub use grid::{ComplexField, Grid, RealField};
pub use state::FieldState;
