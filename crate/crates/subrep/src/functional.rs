//! Continuous linear functionals in coordinates, with dual-exponent norms
//! and restrictions to subspaces.

use nalgebra::DVector;

use crate::error::Result;
use crate::solver::lp;
use crate::space::{AmbientSpace, Field, NormP};
use crate::subspace::Subspace;

/// φ ∈ X*, identified with a coordinate vector; ‖φ‖ is evaluated with the
/// dual exponent q of the ambient p.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    ambient: AmbientSpace,
    coords: DVector<f64>,
}

impl Functional {
    pub fn new(coords: DVector<f64>, ambient: AmbientSpace) -> Result<Functional> {
        ambient.check_vector(&coords)?;
        Ok(Functional { ambient, coords })
    }

    pub fn ambient(&self) -> AmbientSpace {
        self.ambient
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    /// Real coordinate pairing φ(x).
    pub fn apply(&self, x: &DVector<f64>) -> Result<f64> {
        self.ambient.check_vector(x)?;
        Ok(self.coords.dot(x))
    }

    /// |φ(x)|; for complex (realified) spaces this is the complex modulus
    /// |⟨x, φ⟩_ℂ| = √(⟨x,φ⟩² + ⟨x,Jφ⟩²).
    pub fn pairing_abs(&self, x: &DVector<f64>) -> Result<f64> {
        self.ambient.check_vector(x)?;
        let re = self.coords.dot(x);
        match self.ambient.field {
            Field::Real => Ok(re.abs()),
            Field::Complex => {
                let im = self.ambient.apply_j(&self.coords).dot(x);
                Ok(re.hypot(im))
            }
        }
    }

    /// Dual norm ‖φ‖_q.
    pub fn norm(&self) -> f64 {
        self.ambient.dual_norm(&self.coords)
    }

    /// ‖φ restricted to Y‖ = sup { |φ(y)| : y ∈ Y, ‖y‖_p = 1 }.
    ///
    /// p = 2: equals ‖P_Y φ‖₂. p ∈ {1, ∞}: a linear objective over the
    /// p-unit ball of Y, solved as an LP. Y = {0} gives 0.
    pub fn restriction_norm(&self, y: &Subspace) -> Result<f64> {
        if y.ambient() != self.ambient {
            return Err(crate::error::Error::AmbientMismatch);
        }
        if y.is_trivial() {
            return Ok(0.0);
        }
        match self.ambient.p {
            NormP::Two => Ok((y.basis().transpose() * &self.coords).norm()),
            p => {
                let g = y.basis().transpose() * &self.coords;
                lp::p_ball_sup(&g, y.basis(), p)
            }
        }
    }
}

/// Restriction norm of a raw coordinate functional (used in hot estimator
/// loops where building a `Functional` per sample would be noise).
pub fn restriction_norm_coords(phi: &DVector<f64>, y: &Subspace, p: NormP) -> f64 {
    if y.is_trivial() {
        return 0.0;
    }
    match p {
        NormP::Two => (y.basis().transpose() * phi).norm(),
        _ => {
            let g = y.basis().transpose() * phi;
            lp::p_ball_sup(&g, y.basis(), p).unwrap_or(f64::NAN)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Tol;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;

    #[test]
    fn restriction_to_axis_p2() {
        let amb = AmbientSpace::euclidean(2);
        let phi = Functional::new(dvector![3.0, 4.0], amb).unwrap();
        let y = Subspace::line(&dvector![1.0, 0.0], amb, &Tol::default()).unwrap();
        assert_abs_diff_eq!(phi.restriction_norm(&y).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn restriction_to_whole_space_is_dual_norm() {
        for p in [NormP::One, NormP::Two, NormP::Inf] {
            let amb = AmbientSpace::real(2, p);
            let phi = Functional::new(dvector![3.0, -4.0], amb).unwrap();
            let whole = Subspace::whole(amb);
            assert_abs_diff_eq!(
                phi.restriction_norm(&whole).unwrap(),
                phi.norm(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn restriction_to_trivial_is_zero() {
        let amb = AmbientSpace::euclidean(2);
        let phi = Functional::new(dvector![3.0, 4.0], amb).unwrap();
        let t = Subspace::trivial(amb);
        assert_eq!(phi.restriction_norm(&t).unwrap(), 0.0);
    }

    #[test]
    fn cauchy_schwarz_like_bound() {
        let amb = AmbientSpace::real(3, NormP::One);
        let phi = Functional::new(dvector![1.0, -2.0, 0.5], amb).unwrap();
        let x = dvector![0.2, 0.3, -0.4];
        assert!(phi.apply(&x).unwrap().abs() <= phi.norm() * amb.norm(&x) + 1e-12);
    }

    #[test]
    fn restriction_monotone_under_inclusion() {
        let amb = AmbientSpace::real(3, NormP::Inf);
        let phi = Functional::new(dvector![1.0, 2.0, -1.0], amb).unwrap();
        let small = Subspace::line(&dvector![1.0, 1.0, 0.0], amb, &Tol::default()).unwrap();
        let big = Subspace::orthonormalize(
            &[dvector![1.0, 1.0, 0.0], dvector![0.0, 0.0, 1.0]],
            amb,
            &Tol::default(),
        )
        .unwrap();
        let rs = phi.restriction_norm(&small).unwrap();
        let rb = phi.restriction_norm(&big).unwrap();
        assert!(rs <= rb + 1e-9);
    }
}
