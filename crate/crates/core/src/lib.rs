//! Persistence of slice filtrations of bifiltrations, transport of diagram
//! points along paths of admissible lines, and the coherent matching distance.

pub mod bifiltration;
pub mod coherent_distance;
pub mod diagram_metric;
pub mod error;
pub mod examples;
pub mod parameter_space;
pub mod pareto_grid;
pub mod persistence;
pub mod transport;

pub use error::{Error, Result};
