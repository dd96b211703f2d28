pub mod graph;
pub mod operator;
pub mod qmc;
pub mod un;
pub mod weight;

pub use graph::{canonical_graphs, enumerate_graphs, KGraph, Target};
pub use operator::{graph_apply, graph_operator};
pub use un::{formality_residual, formality_residual_operator, u_n_apply, u_n_operator};
pub use weight::WeightEngine;
