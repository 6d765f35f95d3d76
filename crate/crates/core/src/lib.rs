#![allow(clippy::neg_cmp_op_on_partial_ord)] // the negated forms reject NaN

pub mod discrete;
pub mod eigenproduct;
pub mod error;
pub mod euler_maclaurin;
pub mod interchange;
pub mod numerics;
pub mod phg;
pub mod pipeline;
pub mod regint;
pub mod smooth;

pub use error::{Error, Result};
