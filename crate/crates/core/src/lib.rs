#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod hkpv;
pub mod kernels;
pub mod linalg;
pub mod matrix;
pub mod pipelines;
pub mod point_count;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;
