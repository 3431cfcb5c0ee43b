// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cfis;
pub mod collision;
pub mod error;
pub mod field;
pub mod human;
pub mod ingest;
pub mod mapping;
pub mod model;
pub mod ncap;
pub mod nav;
pub mod stats;

pub use error::{Error, IngestError, Result};
