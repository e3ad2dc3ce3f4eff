//! Dividend barriers for a surplus driven by a Lévy process with upward
//! jumps, with a terminal value paid or charged at ruin.
//!
//! * [`levy`]: models, Laplace exponent `Psi`, right inverse `Phi`.
//! * [`scale`]: q-scale functions `W`, `Z`, `W-bar`, `Z-bar`.
//! * [`fluctuation`]: two-sided exit identities and the reflected ruin transform.
//! * [`dividend`]: barrier values `V_b`, the optimal barrier `b*` and the value function.
//! * [`simulate`]: an independent Monte Carlo oracle for all of the above.
//! * [`verify`]: the analytic-versus-simulated identity suite.

pub mod dividend;
pub mod error;
pub mod exec;
pub mod fluctuation;
pub mod levy;
pub mod numerics;
pub mod problem;
pub mod scale;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use levy::{JumpSpec, LevyModel};
pub use dividend::{BarrierValue, DividendProblem};
pub use fluctuation::ExitCorridor;
pub use scale::{Backend, BackendChoice, InversionMethod, ScaleSet};
pub use simulate::{McEstimate, SimulationConfig};

