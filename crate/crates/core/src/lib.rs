//! Normal forms for symplectic Lie group actions near a point whose momentum
//! map may fail to exist or to be equivariant: the slice model, the
//! reconstruction equations on it, and the tubewise Hamiltonian test.

pub mod dynamics;
pub mod error;
pub mod export;
pub mod lie;
pub mod linalg;
pub mod scenario;
pub mod slice;
pub mod symplectic;
pub mod tolerances;
pub mod tubewise;
pub mod verify;

pub use error::{Result, SliceError};
pub use lie::{AlgebraVector, DualVector, GroupElement, LieAlgebraContext};
pub use scenario::{load_config, Scenario, ScenarioConfig};
pub use slice::{SliceModel, SliceState, TangentVector};
pub use symplectic::SymplecticForm;
pub use tolerances::Tolerances;
pub use tubewise::Verdict;
