//! Cascaded intracavity OPO: semiclassical analysis, dense master-equation
//! propagation, stochastic trajectories and single-mode observables.

mod density;
mod lindblad;
mod meanfield;
mod model;
mod observables;
mod params;
mod run;
mod semiclassical;
mod trajectory;

pub use density::*;
pub use lindblad::*;
pub use meanfield::*;
pub use model::*;
pub use observables::*;
pub use params::*;
pub use run::*;
pub use semiclassical::*;
pub use trajectory::*;
