pub mod circuit;
pub mod cli;
pub mod error;
pub mod families;
pub mod format;
pub mod lowerbound;
pub mod oracle;
pub mod properties;
pub mod rational;
pub mod transforms;

pub use circuit::{Assignment, Circuit, CircuitBuilder, Flavor, Literal, Node, NodeId, VarId};
pub use error::{Error, Result};
pub use rational::Rational;
