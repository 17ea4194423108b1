//! Model and feature-subset selection under joint test and
//! misclassification costs.
//!
//! A trained classifier is reframed to a cheaper deployment by masking
//! attributes to null. Every (model, configuration) pair becomes a point in
//! the (test cost, misclassification cost) plane; the lower-left convex hull
//! of those points holds exactly the choices that are optimal for some
//! weighting `alpha` of the two costs.
//!
//! ```
//! use jroc::cost::CostContext;
//! use jroc::jroc::select_best;
//! use jroc::lattice::EvalPoint;
//! use jroc::features::FeatureConfiguration;
//!
//! let ctx = CostContext::uniform(4, 3).unwrap();
//! assert_eq!(ctx.test_costs(), &[0.25; 4]);
//!
//! let cfg = FeatureConfiguration::full(2);
//! let points = [
//!     EvalPoint::new("tree", FeatureConfiguration::empty(2), 0.0, 1.0),
//!     EvalPoint::new("tree", cfg, 0.2, 0.5),
//! ];
//! assert_eq!(select_best(&points, 0.5).unwrap().cfg, cfg);
//! ```

pub mod classifiers;
pub mod cost;
pub mod data;
pub mod error;
pub mod exec;
pub mod features;
pub mod harness;
pub mod jroc;
pub mod lattice;
pub mod plot;
pub mod search;
pub mod stats;

pub use classifiers::{train, ClassifierSpec, TrainedModel};
pub use cost::{CostContext, PerExampleContext};
pub use data::{load_csv, split_dataset, Dataset, LoadOptions};
pub use error::{Error, Result};
pub use exec::Execution;
pub use features::FeatureConfiguration;
pub use harness::{emit_report, run_experiment, ExperimentConfig, ExperimentReport};
pub use jroc::{dominance_regions, lower_hull, select_best, Hull, OperatingRegion};
pub use lattice::EvalPoint;
pub use search::{backward_search, random_search, Criterion, Method, SearchTrace};
pub use stats::ResultMatrix;
