//! Evaluation tasks built on summaries: synthetic graphs, anomaly and event
//! detection, link prediction, scaling benchmarks and metric reports.

pub mod anomaly;
pub mod bench;
pub mod events;
pub mod generate;
pub mod linkpred;
pub mod logreg;
pub mod metrics;
pub mod report;

pub use anomaly::{anomaly_precision, AnomalyDetector};
pub use bench::{bench, parse_sizes, BenchRow};
pub use events::{detect_events, load_snapshot_dir, EventSeries};
pub use generate::{generate_er, generate_sbm, inject_er_subgraph};
pub use linkpred::{link_prediction_eval, split_edges, LinkPredReport, LinkSplit, SplitSpec};
pub use logreg::{train_logreg, LogRegModel, LogRegOptions};
pub use metrics::{auc, evaluate, BinaryMetrics};
pub use report::Report;
