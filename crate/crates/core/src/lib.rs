#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod densities;
pub mod hfox;
pub mod mellin;
pub mod quad;
pub mod samplers;
pub mod specfun;
pub mod verify;
