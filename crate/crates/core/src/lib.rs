pub mod arith;
pub mod cone;
pub mod divisor;
pub mod error;
pub mod fan;
pub mod fibration;
pub mod lp;
pub mod singularity;
pub mod mfs;
pub mod bounds;
pub mod cli;
pub mod json;
