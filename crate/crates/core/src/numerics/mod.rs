//! Numerical building blocks shared by the spectral modules.

pub mod grid;
pub mod lstsq;
pub mod modular;
pub mod quadrature;
pub mod summation;

pub use grid::GeometricGrid;
pub use quadrature::{QuadResult, Quadrature};
pub use summation::{compensated_sum, Accumulator, DoubleDouble, NeumaierSum, Precision};
