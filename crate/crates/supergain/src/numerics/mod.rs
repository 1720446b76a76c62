//! Shared numerical machinery: compensated summation, Legendre recurrences,
//! Gauss–Legendre quadrature.

pub mod legendre;
pub mod quadrature;
pub mod sum;
