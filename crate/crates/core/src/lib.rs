//! Simulation and exact moments for senile persistent and senile reinforced
//! random walks on `Z^d`, through their time-changed representation.

pub mod error;
pub mod io;
pub mod martingale;
pub mod oracle;
pub mod reinforcement;
pub mod rng;
pub mod stats;
pub mod timechange;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use martingale::{to_martingale, MartingalePath, WalkConstants};
pub use reinforcement::{Moment, Reinforcement, ReinforcementSpec, TimeLaw};
pub use rng::{PathRng, StreamFactory};
pub use timechange::{coupled_pair, senile_direct, senile_from_timechange, SenilePath, TimeIndex};
pub use walk::{generate_walk, generate_walk_until, Direction, Step, WalkKind, WalkPath};
pub use verify::{run_criterion, run_suite, Suite, VerifyOptions, VerifyReport};
