//! Solvers and brute-force verifiers for multi-player competitive games
//! with affine redistribution of payoffs.
//!
//! * [`matrices`]: dense matrices, principal-minor classes (P, Z, K, P₀′),
//!   subgame reduction and seeded generators.
//! * [`lcp`]: linear complementarity solvers and certificates.
//! * [`single_period`]: one-shot affine games, their Nash payoff and values.
//! * [`redistribution`]: games whose matrix is built from redistribution quotients.
//! * [`tree`], [`multi_period`], [`bsde`]: stopping games on finite scenario
//!   trees, solved by backward induction and by the reflected backward recursion.

pub mod bsde;
pub mod error;
pub mod lcp;
pub mod matrices;
pub mod multi_period;
pub mod projection;
pub mod redistribution;
pub mod single_period;
pub mod tree;

pub use error::{Error, Result};
pub use matrices::{MatrixClass, SquareMatrix, DEFAULT_TOL};
pub use single_period::{GameSpec, StrategyProfile};
pub use tree::ScenarioTree;
