//! Grid-based recursive partition K-means (RPKM).
//!
//! The dataset is summarized by nested grids of increasing resolution. Each
//! grid cell is replaced by its center of mass, weighted by its point count,
//! and weighted Lloyd runs on those representatives, one grid level after
//! another, seeding each level with the previous level's centroids. Every
//! squared-distance evaluation is counted so that the work can be compared
//! with K-means++ plus Lloyd and with minibatch K-means.
//!
//! ```
//! use rpkm::{rpkm, Dataset, RpkmParams};
//!
//! let data = Dataset::from_rows(&[[0.0, 0.0], [0.1, 0.2], [9.0, 9.0], [9.2, 8.9]])?;
//! let result = rpkm(&data, &RpkmParams::new(2, 3, 7))?;
//! assert_eq!(result.centroids.k(), 2);
//! # Ok::<(), rpkm::Error>(())
//! ```

pub mod baselines;
pub mod bench;
pub mod data;
mod error;
pub mod grid;
pub mod model;
pub mod recursive;
pub mod theory;
pub mod weighted_lloyd;

pub use crate::baselines::{kmeanspp_init, lloyd, minibatch_kmeans, MBParams, MiniBatch};
pub use crate::bench::{run_experiment, summarize, Algorithm, ExperimentConfig, GroupKey};
pub use crate::data::{generate_mixture, load_csv, MixtureSpec, RunRecord, SubsampleSpec};
pub use crate::error::{Error, Result};
pub use crate::grid::{build_sequence, PartitionLevel, PartitionSequence};
pub use crate::model::{
    centroid_error, clustering_error, full_error, induce_assignment, induce_centroids,
    squared_distance, std_error, Assignment, CentroidSet, Dataset, DistanceCounter,
    Representative, Representatives, StdError, WeightedPoints,
};
pub use crate::recursive::{rpkm, rpkm_on_sequence, RpkmParams, RpkmResult, StepRecord};
pub use crate::weighted_lloyd::{weighted_lloyd, WLParams, WLResult};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/partitions.md")]
    mod partitions {}
    #[doc = include_str!("../../../book/src/weighted-lloyd.md")]
    mod weighted_lloyd {}
    #[doc = include_str!("../../../book/src/rpkm.md")]
    mod rpkm {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/benchmark.md")]
    mod benchmark {}
}
