// Range checks are written as `!(lo <= x && x <= hi)` so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod cli;
pub mod constants;
pub mod entropy;
pub mod error;
pub mod mc;
pub mod optics;
pub mod params;
pub mod povm;
pub mod presets;
pub mod rates;
pub mod sweep;
