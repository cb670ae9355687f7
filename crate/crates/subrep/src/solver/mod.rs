//! Numerical workhorses: a dense simplex for the tiny LPs, sphere-style
//! estimators for nonconvex min/max problems, and the first-order method for
//! the prefix-sum functionals.

pub mod lp;
pub mod sphere;
pub mod subgrad;
