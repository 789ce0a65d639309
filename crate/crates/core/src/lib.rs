//! Growing networks with tunable small-world, scale-free and community structure,
//! and the metrics to check them.
//!
//! ```
//! use commgrow::{analyze, generate, AnalyzeOptions, GenParams, Partition};
//!
//! let params = GenParams::new(1000, 2, 10, 1.0, 0.01, 42);
//! let (graph, _trace) = generate(&params).unwrap();
//! let truth = Partition::from_labels(&graph).unwrap();
//! let report = analyze(&graph, Some(&truth), &AnalyzeOptions::default()).unwrap();
//! assert_eq!(report.node_count, 1000);
//! assert!(report.avg_clustering > 0.5);
//! ```
//!
//! The guide in `book/` walks through the model and every metric; its code
//! listings are compiled and run as doc-tests of this crate.

pub mod analysis;
pub mod detect;
pub mod experiment;
pub mod generator;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod sampling;

pub use analysis::{analyze, AnalyzeOptions};
pub use detect::{compare_partitions, detect_communities, subcluster, Agreement, MergeDendrogram};
pub use generator::{generate, generate_graph, generate_holme_kim, GenError, GenParams, GenTrace, Generator};
pub use graph::{CommunityId, Graph, GraphError, NodeId, Partition, PartitionKind};
pub use metrics::{AplMode, MetricsReport};
pub use sampling::{DegreeIndex, RngStream};

// Book chapters, compiled so their listings run under `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/communities.md")]
    mod communities {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
