//! Shared numeric kernels: adaptive quadrature, normal distribution
//! functions, and bracketed root finding.

pub mod normal;
pub mod quad;
pub mod root;
