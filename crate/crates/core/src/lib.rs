//! Structure theory of SL(n, ℝ) put to work: Cartan and Jordan projections,
//! flag dynamics, ε-contraction and ping-pong certificates, word-ball search,
//! symmetric-space shadows and growth estimators.

pub mod cartan;
pub mod contraction;
pub mod flag;
pub mod group;
pub mod growth;
pub mod io;
pub mod linalg;
pub mod orbit;
pub mod rational;
pub mod sampling;
pub mod symshadow;

pub use cartan::{CartanVector, KakDecomposition, LieError, RootValue};
pub use flag::{Flag, FlagError, OppositeFlag};
pub use group::{GroupElement, GroupError};
pub use rational::{RationalError, RationalMatrix};
