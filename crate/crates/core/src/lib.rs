//! Conditional α-diversity of exchangeable Gibbs partitions driven by the
//! stable subordinator.

pub mod diversity;
pub mod error;
pub mod grid;
pub mod mc;
pub mod mutation;
pub mod quad;
pub mod rng;
pub mod special;
pub mod stable;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{DensityGrid, GridOptions, Measure};
pub use rng::RandomStream;
pub use stable::{Alpha, StableConvention};
pub use weights::{Composition, GibbsModel, Mixing, WeightTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
