//! Ambient spaces: dimension, scalar field and norm exponent.
//!
//! Complex spaces are handled in realified coordinates: a complex vector of
//! dimension `n` is stored as `2n` reals in block layout `[re..., im...]`,
//! and multiplication by `i` becomes the linear map [`AmbientSpace::apply_j`].
//! All Euclidean (p = 2) quantities computed on realified coordinates agree
//! with their Hermitian counterparts, which is why the complex field is only
//! admitted together with p = 2.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar field of the ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Norm exponent; only 1, 2 and ∞ are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormP {
    One,
    Two,
    Inf,
}

impl NormP {
    /// Dual exponent: q = ∞, 2, 1 for p = 1, 2, ∞.
    pub fn dual(self) -> NormP {
        match self {
            NormP::One => NormP::Inf,
            NormP::Two => NormP::Two,
            NormP::Inf => NormP::One,
        }
    }
}

impl serde::Serialize for NormP {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormP::One => s.serialize_u64(1),
            NormP::Two => s.serialize_u64(2),
            NormP::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> serde::Deserialize<'de> for NormP {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::Number(n) if n.as_u64() == Some(1) => Ok(NormP::One),
            serde_json::Value::Number(n) if n.as_u64() == Some(2) => Ok(NormP::Two),
            serde_json::Value::String(s) if s == "inf" => Ok(NormP::Inf),
            _ => Err(D::Error::custom("norm exponent must be 1, 2 or \"inf\"")),
        }
    }
}

/// Numerical tolerances shared across the library.
///
/// `rank` guards orthonormality and rank decisions, `solver` is the target
/// accuracy of the convex subproblem solvers. Both can be overridden from
/// the CLI.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tol {
    pub rank: f64,
    pub solver: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            rank: 1e-10,
            solver: 1e-9,
        }
    }
}

/// The ambient normed space X = (𝕂^dim, ‖·‖_p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbientSpace {
    pub dim: usize,
    pub field: Field,
    pub p: NormP,
}

impl AmbientSpace {
    pub fn new(dim: usize, field: Field, p: NormP) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("ambient dimension must be ≥ 1".into()));
        }
        if field == Field::Complex && p != NormP::Two {
            return Err(Error::InvalidInput(
                "complex field is supported only with p = 2".into(),
            ));
        }
        Ok(AmbientSpace { dim, field, p })
    }

    pub fn real(dim: usize, p: NormP) -> Self {
        AmbientSpace::new(dim, Field::Real, p).expect("real space")
    }

    pub fn euclidean(dim: usize) -> Self {
        AmbientSpace::real(dim, NormP::Two)
    }

    /// Length of coordinate vectors: `dim` for real spaces, `2·dim` for
    /// realified complex spaces.
    pub fn coord_dim(&self) -> usize {
        match self.field {
            Field::Real => self.dim,
            Field::Complex => 2 * self.dim,
        }
    }

    /// The dual space: same coordinates, dual norm exponent.
    pub fn dual(&self) -> AmbientSpace {
        AmbientSpace {
            dim: self.dim,
            field: self.field,
            p: self.p.dual(),
        }
    }

    /// Multiplication by `i` on realified coordinates `[re..., im...]`.
    /// Identity on real spaces is not meaningful, so this panics there.
    pub fn apply_j(&self, v: &DVector<f64>) -> DVector<f64> {
        assert_eq!(self.field, Field::Complex, "apply_j needs a complex space");
        let n = self.dim;
        let mut out = DVector::zeros(2 * n);
        for k in 0..n {
            out[k] = -v[n + k];
            out[n + k] = v[k];
        }
        out
    }

    pub fn check_vector(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.coord_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.coord_dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// ‖v‖_p on coordinates. For complex spaces (p = 2) the realified
    /// Euclidean norm equals the Hermitian norm.
    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        norm_p(v, self.p)
    }

    /// Dual norm ‖φ‖_q of a coordinate functional.
    pub fn dual_norm(&self, phi: &DVector<f64>) -> f64 {
        norm_p(phi, self.p.dual())
    }
}

/// ‖v‖_p for p ∈ {1, 2, ∞}.
pub fn norm_p(v: &DVector<f64>, p: NormP) -> f64 {
    match p {
        NormP::One => v.iter().map(|x| x.abs()).sum(),
        NormP::Two => v.norm(),
        NormP::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

/// A subgradient of ‖·‖_p at `v` (any member of the subdifferential; at 0 the
/// zero vector is returned).
pub fn norm_p_subgradient(v: &DVector<f64>, p: NormP) -> DVector<f64> {
    match p {
        NormP::Two => {
            let n = v.norm();
            if n < 1e-300 {
                DVector::zeros(v.len())
            } else {
                v / n
            }
        }
        NormP::One => DVector::from_iterator(
            v.len(),
            v.iter().map(|x| if *x == 0.0 { 0.0 } else { x.signum() }),
        ),
        NormP::Inf => {
            let mut best = 0usize;
            let mut mag = -1.0;
            for (i, x) in v.iter().enumerate() {
                if x.abs() > mag {
                    mag = x.abs();
                    best = i;
                }
            }
            let mut g = DVector::zeros(v.len());
            if mag > 0.0 {
                g[best] = v[best].signum();
            }
            g
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn complex_requires_p2() {
        assert!(AmbientSpace::new(2, Field::Complex, NormP::Two).is_ok());
        assert!(AmbientSpace::new(2, Field::Complex, NormP::One).is_err());
        assert!(AmbientSpace::new(0, Field::Real, NormP::Two).is_err());
    }

    #[test]
    fn norms() {
        let v = dvector![3.0, -4.0];
        assert_eq!(norm_p(&v, NormP::One), 7.0);
        assert_eq!(norm_p(&v, NormP::Two), 5.0);
        assert_eq!(norm_p(&v, NormP::Inf), 4.0);
    }

    #[test]
    fn dual_exponents() {
        assert_eq!(NormP::One.dual(), NormP::Inf);
        assert_eq!(NormP::Two.dual(), NormP::Two);
        assert_eq!(NormP::Inf.dual(), NormP::One);
    }

    #[test]
    fn j_squares_to_minus_one() {
        let space = AmbientSpace::new(2, Field::Complex, NormP::Two).unwrap();
        let v = dvector![1.0, 2.0, 3.0, 4.0];
        let jj = space.apply_j(&space.apply_j(&v));
        assert_eq!(jj, -v);
    }

    #[test]
    fn norm_p_serde_forms() {
        assert_eq!(serde_json::to_string(&NormP::Inf).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&NormP::One).unwrap(), "1");
        let p: NormP = serde_json::from_str("2").unwrap();
        assert_eq!(p, NormP::Two);
        assert!(serde_json::from_str::<NormP>("3").is_err());
    }
}
