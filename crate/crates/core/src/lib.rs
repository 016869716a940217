//! Random monotone cuts on pyramids and funnels, and the cut-measure
//! embeddings built from them.

pub mod bits;
pub mod cut;
pub mod distortion;
pub mod embed;
pub mod error;
pub mod graph;
pub mod lp;
pub mod oracle;
pub mod pyramid;
pub mod radius;
pub mod reduce;
pub mod surface;

pub use bits::VertexSet;
pub use cut::{cut_measure_distance, one_sum_glue, CutMeasure, GluePart};
pub use distortion::{distortion, EmbeddingReport};
pub use error::{Error, Result};
pub use graph::{apsp, Edge, FiniteMetric, Graph};
pub use radius::{EdgeRate, Radius};
pub use embed::{embed_pyramid, EmbedOptions, ProcessConfig};
pub use pyramid::{Funnel, Pyramid};
pub use reduce::{embed_funnel, FunnelEmbedOptions};
pub use surface::{HPoint, PointSet};
