//! Closed linear subspaces represented by Euclidean-orthonormal bases.
//!
//! The basis is always orthonormal with respect to the Euclidean inner
//! product regardless of the ambient norm exponent; p only changes how norms
//! and distances are evaluated. In complex (realified) spaces the span is
//! closed under multiplication by i, so the stored real basis always
//! describes a complex-linear subspace.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::solver::lp;
use crate::solver::sphere::{self, Goal, SearchConfig};
use crate::space::{norm_p, AmbientSpace, Field, NormP, Tol};

#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: AmbientSpace,
    /// coord_dim × subdim, orthonormal columns.
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Orthonormalize the raw spanning vectors; rank-deficient inputs are
    /// reduced. Complex ambients close the span under multiplication by i.
    pub fn orthonormalize(
        raw: &[DVector<f64>],
        ambient: AmbientSpace,
        tol: &Tol,
    ) -> Result<Subspace> {
        for v in raw {
            ambient.check_vector(v)?;
        }
        let d = ambient.coord_dim();
        let mut cols: Vec<DVector<f64>> = raw.to_vec();
        if ambient.field == Field::Complex {
            let js: Vec<DVector<f64>> = cols.iter().map(|v| ambient.apply_j(v)).collect();
            cols.extend(js);
        }
        if cols.is_empty() {
            return Ok(Subspace {
                ambient,
                basis: DMatrix::zeros(d, 0),
            });
        }
        let m = DMatrix::from_columns(&cols);
        Ok(Subspace {
            ambient,
            basis: orthonormal_range(&m, tol.rank),
        })
    }

    /// Wrap an already-orthonormal basis, verifying Gram ≈ I.
    pub fn from_orthonormal(basis: DMatrix<f64>, ambient: AmbientSpace, tol: &Tol) -> Result<Subspace> {
        if basis.nrows() != ambient.coord_dim() {
            return Err(Error::DimensionMismatch {
                expected: ambient.coord_dim(),
                got: basis.nrows(),
            });
        }
        let gram = basis.transpose() * &basis;
        let id = DMatrix::identity(basis.ncols(), basis.ncols());
        if (gram - id).abs().max() > tol.rank.max(1e-10) {
            return Err(Error::InvalidInput("basis is not orthonormal".into()));
        }
        Ok(Subspace { ambient, basis })
    }

    pub fn trivial(ambient: AmbientSpace) -> Subspace {
        Subspace {
            ambient,
            basis: DMatrix::zeros(ambient.coord_dim(), 0),
        }
    }

    /// Span of a single vector (plus its i-multiple in complex ambients).
    pub fn line(v: &DVector<f64>, ambient: AmbientSpace, tol: &Tol) -> Result<Subspace> {
        Subspace::orthonormalize(std::slice::from_ref(v), ambient, tol)
    }

    pub fn whole(ambient: AmbientSpace) -> Subspace {
        Subspace {
            ambient,
            basis: DMatrix::identity(ambient.coord_dim(), ambient.coord_dim()),
        }
    }

    pub fn ambient(&self) -> AmbientSpace {
        self.ambient
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn subdim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.subdim() == 0
    }

    /// Euclidean orthoprojection P x = Σ ⟨x, bᵢ⟩ bᵢ. For p = 2 this is the
    /// metric projection; for other exponents it is still the Euclidean one.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.ambient.check_vector(x)?;
        if self.is_trivial() {
            return Ok(DVector::zeros(x.len()));
        }
        Ok(&self.basis * (self.basis.transpose() * x))
    }

    /// p-distance d(x, Y) = inf_{y ∈ Y} ‖x − y‖_p together with a nearest
    /// point. Exact for p = 2; an LP solve for p ∈ {1, ∞}.
    pub fn best_approximation(&self, x: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        self.ambient.check_vector(x)?;
        if self.is_trivial() {
            return Ok((DVector::zeros(x.len()), self.ambient.norm(x)));
        }
        match self.ambient.p {
            NormP::Two => {
                let y = &self.basis * (self.basis.transpose() * x);
                let d = (x - &y).norm();
                Ok((y, d))
            }
            p => {
                let (d, coeffs) = lp::p_distance(x, &self.basis, p)?;
                Ok((&self.basis * coeffs, d))
            }
        }
    }

    pub fn distance(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.best_approximation(x)?.1)
    }

    /// Euclidean distance, ignoring the ambient exponent. Used by the p = 2
    /// fast paths.
    pub fn distance2(&self, x: &DVector<f64>) -> f64 {
        if self.is_trivial() {
            return x.norm();
        }
        (x - &self.basis * (self.basis.transpose() * x)).norm()
    }

    pub fn contains(&self, x: &DVector<f64>, eps: f64) -> bool {
        self.distance2(x) <= eps
    }

    /// Orthogonal complement (Euclidean; in complex ambients the complement
    /// of a J-invariant subspace is again J-invariant).
    pub fn complement(&self) -> Subspace {
        let d = self.ambient.coord_dim();
        if self.is_trivial() {
            return Subspace::whole(self.ambient);
        }
        // Null space of Bᵀ via full SVD of the basis.
        let svd = self.basis.clone().svd(true, false);
        let u = svd.u.as_ref().expect("svd with u");
        // Columns of u beyond the rank span the range; complete to a full
        // orthonormal frame by projecting out the range from the identity.
        let rank = self.subdim();
        let mut cols: Vec<DVector<f64>> = Vec::new();
        if u.ncols() > rank {
            for j in rank..u.ncols() {
                cols.push(u.column(j).into_owned());
            }
        }
        // nalgebra's thin SVD may not deliver the full U; complete manually.
        if cols.len() < d - rank {
            let mut acc = self.basis.clone();
            for c in &cols {
                acc = DMatrix::from_columns(
                    &acc.column_iter()
                        .map(|v| v.into_owned())
                        .chain(std::iter::once(c.clone()))
                        .collect::<Vec<_>>(),
                );
            }
            for j in 0..d {
                if acc.ncols() == d {
                    break;
                }
                let mut e = DVector::zeros(d);
                e[j] = 1.0;
                let r = &e - &acc * (acc.transpose() * &e);
                let n = r.norm();
                if n > 1e-8 {
                    let r = r / n;
                    acc = DMatrix::from_columns(
                        &acc.column_iter()
                            .map(|v| v.into_owned())
                            .chain(std::iter::once(r.clone()))
                            .collect::<Vec<_>>(),
                    );
                    cols.push(r);
                }
            }
        }
        if cols.is_empty() {
            return Subspace::trivial(self.ambient);
        }
        let m = DMatrix::from_columns(&cols);
        Subspace {
            ambient: self.ambient,
            basis: orthonormal_range(&m, 1e-10),
        }
    }

    /// Sum of two subspaces (orthonormalized stack of bases).
    pub fn sum(&self, other: &Subspace, tol: &Tol) -> Result<Subspace> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch);
        }
        let cols: Vec<DVector<f64>> = self
            .basis
            .column_iter()
            .chain(other.basis.column_iter())
            .map(|c| c.into_owned())
            .collect();
        if cols.is_empty() {
            return Ok(Subspace::trivial(self.ambient));
        }
        let m = DMatrix::from_columns(&cols);
        Ok(Subspace {
            ambient: self.ambient,
            basis: orthonormal_range(&m, tol.rank),
        })
    }

    /// Whether `other` is contained in `self` up to the rank tolerance.
    pub fn contains_subspace(&self, other: &Subspace, eps: f64) -> bool {
        other
            .basis
            .column_iter()
            .all(|c| self.distance2(&c.into_owned()) <= eps)
    }
}

/// Orthonormal basis of the range of `m`, dropping singular directions with
/// σ ≤ tol·max(σ_max, 1).
pub fn orthonormal_range(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.ncols() == 1 {
        // Plain normalization keeps exact axis vectors exact.
        let n = m.column(0).norm();
        if n <= tol {
            return DMatrix::zeros(m.nrows(), 0);
        }
        return m / n;
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd with u");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = tol * smax.max(1.0);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > cutoff)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let cols: Vec<DVector<f64>> = keep.iter().map(|&i| u.column(i).into_owned()).collect();
    DMatrix::from_columns(&cols)
}

/// Rank of a stacked collection of basis matrices.
pub fn stacked_rank(parts: &[&DMatrix<f64>], tol: f64) -> usize {
    let cols: Vec<DVector<f64>> = parts
        .iter()
        .flat_map(|m| m.column_iter().map(|c| c.into_owned()))
        .collect();
    if cols.is_empty() {
        return 0;
    }
    let m = DMatrix::from_columns(&cols);
    orthonormal_range(&m, tol).ncols()
}

/// One-sided gap ρ₀(Y, Z) = sup { d(y, Z) : y ∈ Y, ‖y‖ = 1 }.
///
/// p = 2: the largest singular value of (I − P_Z) restricted to Y's basis.
/// p ∈ {1, ∞}: estimator over Y's unit sphere (dense oracle for subdim ≤ 3).
pub fn gap_rho0(y: &Subspace, z: &Subspace, tol: &Tol) -> Result<f64> {
    if y.ambient() != z.ambient() {
        return Err(Error::AmbientMismatch);
    }
    if y.is_trivial() {
        return Err(Error::TrivialSubspace);
    }
    match y.ambient().p {
        NormP::Two => {
            let b = y.basis();
            let m = if z.is_trivial() {
                b.clone()
            } else {
                b - z.basis() * (z.basis().transpose() * b)
            };
            let sv = m.svd(false, false).singular_values;
            Ok(sv.iter().cloned().fold(0.0_f64, f64::max).min(1.0))
        }
        p => {
            let by = y.basis().clone();
            let normalize = move |raw: &DVector<f64>| {
                let v = &by * raw;
                let n = norm_p(&v, p);
                (n >= 1e-12).then(|| raw / n)
            };
            let by2 = y.basis().clone();
            let zc = z.clone();
            let eval = move |c: &DVector<f64>| {
                let v = &by2 * c;
                zc.distance(&v).unwrap_or(f64::NAN)
            };
            let cfg = SearchConfig {
                seed: 0x9a5f_0001,
                ..SearchConfig::default()
            };
            let out = sphere::optimize_normalized(Goal::Maximize, y.subdim(), &normalize, &eval, &cfg);
            let _ = tol;
            Ok(out.value)
        }
    }
}

/// Best constant c ∈ (0, 1] with ‖y + z‖ ≥ c(‖y‖ + ‖z‖) for y ∈ Y, z ∈ Z,
/// i.e. inf{‖y+z‖ : ‖y‖+‖z‖ = 1}. Errors out when Y ∩ Z ≠ {0}.
pub fn direct_sum_constant(y: &Subspace, z: &Subspace, tol: &Tol, seed: u64) -> Result<f64> {
    if y.ambient() != z.ambient() {
        return Err(Error::AmbientMismatch);
    }
    if y.is_trivial() || z.is_trivial() {
        return Err(Error::TrivialSubspace);
    }
    let joint = stacked_rank(&[y.basis(), z.basis()], tol.rank);
    if joint < y.subdim() + z.subdim() {
        return Err(Error::NontrivialIntersection);
    }
    let p = y.ambient().p;
    let sy = y.subdim();
    let sz = z.subdim();
    let by = y.basis().clone();
    let bz = z.basis().clone();
    // Parameters: [u (sy), v (sz), a (1)] with u, v directions in the two
    // subspaces and a ∈ [0,1] the weight split ‖y‖ = a, ‖z‖ = 1 − a.
    let by_n = by.clone();
    let bz_n = bz.clone();
    let normalize = move |raw: &DVector<f64>| {
        let u = raw.rows(0, sy).into_owned();
        let v = raw.rows(sy, sz).into_owned();
        let nu = norm_p(&(&by_n * &u), p);
        let nv = norm_p(&(&bz_n * &v), p);
        if nu < 1e-12 || nv < 1e-12 {
            return None;
        }
        let mut out = DVector::zeros(sy + sz + 1);
        out.rows_mut(0, sy).copy_from(&(u / nu));
        out.rows_mut(sy, sz).copy_from(&(v / nv));
        out[sy + sz] = raw[sy + sz].clamp(0.0, 1.0);
        Some(out)
    };
    let eval = move |w: &DVector<f64>| {
        let a = w[sy + sz];
        let yv = &by * w.rows(0, sy).into_owned() * a;
        let zv = &bz * w.rows(sy, sz).into_owned() * (1.0 - a);
        norm_p(&(yv + zv), p)
    };
    // This search space is a product of spheres and an interval rather than a
    // single sphere, so always run the multistart path; the a-coordinate is
    // seeded at 1/2.
    let starts: Vec<DVector<f64>> = {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let mut s = Vec::new();
        // Structured starts: all pairs of basis directions.
        for i in 0..sy {
            for j in 0..sz {
                for sgn in [1.0, -1.0] {
                    let mut raw = DVector::zeros(sy + sz + 1);
                    raw[i] = 1.0;
                    raw[sy + j] = sgn;
                    raw[sy + sz] = 0.5;
                    if let Some(pt) = normalize(&raw) {
                        s.push(pt);
                    }
                }
            }
        }
        while s.len() < 96 {
            let raw = DVector::from_iterator(
                sy + sz + 1,
                (0..sy + sz + 1).map(|_| {
                    use rand::Rng;
                    rng.random::<f64>() * 2.0 - 1.0
                }),
            );
            let mut raw = raw;
            raw[sy + sz] = 0.5;
            if let Some(pt) = normalize(&raw) {
                s.push(pt);
            }
        }
        s
    };
    use rayon::prelude::*;
    let best = starts
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let (v, _) = sphere::pattern_refine(Goal::Minimize, s, &normalize, &eval, 1e-7);
            (i, v)
        })
        .reduce_with(|a, b| match a.1.total_cmp(&b.1) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Equal => {
                if a.0 < b.0 {
                    a
                } else {
                    b
                }
            }
        })
        .expect("starts nonempty");
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{dmatrix, dvector};

    fn e(dim: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        v
    }

    fn axis(dim: usize, i: usize, p: NormP) -> Subspace {
        Subspace::line(&e(dim, i), AmbientSpace::real(dim, p), &Tol::default()).unwrap()
    }

    #[test]
    fn collinear_vectors_reduce() {
        let amb = AmbientSpace::euclidean(2);
        let s = Subspace::orthonormalize(
            &[dvector![1.0, 0.0], dvector![2.0, 0.0]],
            amb,
            &Tol::default(),
        )
        .unwrap();
        assert_eq!(s.subdim(), 1);
    }

    #[test]
    fn identity_pair_spans_plane() {
        let amb = AmbientSpace::euclidean(2);
        let s = Subspace::orthonormalize(
            &[dvector![1.0, 0.0], dvector![0.0, 1.0]],
            amb,
            &Tol::default(),
        )
        .unwrap();
        assert_eq!(s.subdim(), 2);
    }

    #[test]
    fn oblique_pair_orthonormalizes() {
        let amb = AmbientSpace::euclidean(2);
        let s = Subspace::orthonormalize(
            &[dvector![1.0, 1.0], dvector![1.0, -1.0]],
            amb,
            &Tol::default(),
        )
        .unwrap();
        assert_eq!(s.subdim(), 2);
        let gram = s.basis().transpose() * s.basis();
        assert!((gram - DMatrix::identity(2, 2)).abs().max() < 1e-10);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let amb = AmbientSpace::euclidean(2);
        let r = Subspace::orthonormalize(&[dvector![1.0, 0.0, 0.0]], amb, &Tol::default());
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn projection_examples() {
        let y = axis(2, 0, NormP::Two);
        assert_eq!(y.project(&dvector![3.0, 4.0]).unwrap(), dvector![3.0, 0.0]);
        // x ∈ Y is fixed
        let x = dvector![2.5, 0.0];
        assert_eq!(y.project(&x).unwrap(), x);
        // diagonal line
        let d = Subspace::line(
            &dvector![1.0, 1.0],
            AmbientSpace::euclidean(2),
            &Tol::default(),
        )
        .unwrap();
        let px = d.project(&dvector![0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(px[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(px[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn projection_idempotent() {
        let d = Subspace::line(
            &dvector![1.0, 2.0, -0.5],
            AmbientSpace::euclidean(3),
            &Tol::default(),
        )
        .unwrap();
        let x = dvector![0.3, -1.0, 2.0];
        let p1 = d.project(&x).unwrap();
        let p2 = d.project(&p1).unwrap();
        assert!((p1 - p2).norm() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let y = axis(2, 0, NormP::Two);
        assert_abs_diff_eq!(y.distance(&dvector![0.0, 1.0]).unwrap(), 1.0, epsilon = 1e-12);
        let z = axis(2, 1, NormP::Two);
        assert_abs_diff_eq!(
            z.distance(&dvector![0.6, 0.8]).unwrap(),
            0.6,
            epsilon = 1e-12
        );
        let yinf = axis(2, 0, NormP::Inf);
        assert_abs_diff_eq!(
            yinf.distance(&dvector![1.0, 1.0]).unwrap(),
            1.0,
            epsilon = 1e-9
        );
        // distance to the trivial subspace is the norm
        let t = Subspace::trivial(AmbientSpace::real(2, NormP::One));
        assert_abs_diff_eq!(t.distance(&dvector![1.0, -2.0]).unwrap(), 3.0, epsilon = 0.0);
    }

    #[test]
    fn pythagoras_p2() {
        let d = Subspace::orthonormalize(
            &[dvector![1.0, 1.0, 0.0], dvector![0.0, 0.0, 1.0]],
            AmbientSpace::euclidean(3),
            &Tol::default(),
        )
        .unwrap();
        let x = dvector![0.2, -0.7, 1.3];
        let px = d.project(&x).unwrap();
        let dist = d.distance(&x).unwrap();
        assert_abs_diff_eq!(
            x.norm_squared(),
            px.norm_squared() + dist * dist,
            epsilon = 1e-10
        );
    }

    #[test]
    fn gap_examples() {
        let t = Tol::default();
        let y = axis(2, 0, NormP::Two);
        let z = axis(2, 1, NormP::Two);
        assert_abs_diff_eq!(gap_rho0(&y, &y, &t).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gap_rho0(&y, &z, &t).unwrap(), 1.0, epsilon = 1e-12);
        let diag = Subspace::line(
            &dvector![1.0, 1.0],
            AmbientSpace::euclidean(2),
            &t,
        )
        .unwrap();
        assert_abs_diff_eq!(
            gap_rho0(&y, &diag, &t).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-6
        );
        assert!(matches!(
            gap_rho0(&Subspace::trivial(AmbientSpace::euclidean(2)), &y, &t),
            Err(Error::TrivialSubspace)
        ));
    }

    #[test]
    fn gap_zero_iff_contained() {
        let t = Tol::default();
        let plane = Subspace::orthonormalize(
            &[dvector![1.0, 0.0, 0.0], dvector![0.0, 1.0, 0.0]],
            AmbientSpace::euclidean(3),
            &t,
        )
        .unwrap();
        let inner = Subspace::line(
            &dvector![1.0, 1.0, 0.0],
            AmbientSpace::euclidean(3),
            &t,
        )
        .unwrap();
        assert!(gap_rho0(&inner, &plane, &t).unwrap() < 1e-12);
        assert!(plane.contains_subspace(&inner, 1e-10));
        let outer = Subspace::line(
            &dvector![0.0, 1.0, 1.0],
            AmbientSpace::euclidean(3),
            &t,
        )
        .unwrap();
        assert!(gap_rho0(&outer, &plane, &t).unwrap() > 1e-3);
        assert!(!plane.contains_subspace(&outer, 1e-10));
    }

    #[test]
    fn complement_roundtrip() {
        let t = Tol::default();
        let y = Subspace::line(
            &dvector![1.0, 2.0, 2.0],
            AmbientSpace::euclidean(3),
            &t,
        )
        .unwrap();
        let c = y.complement();
        assert_eq!(c.subdim(), 2);
        // complement ⟂ y
        let cross = c.basis().transpose() * y.basis();
        assert!(cross.abs().max() < 1e-10);
        // complement of the complement is y again
        let cc = c.complement();
        assert_eq!(cc.subdim(), 1);
        assert!(cc.contains_subspace(&y, 1e-9));
    }

    #[test]
    fn direct_sum_constant_orthogonal_axes() {
        let t = Tol::default();
        let y = axis(2, 0, NormP::Two);
        let z = axis(2, 1, NormP::Two);
        let c = direct_sum_constant(&y, &z, &t, 7).unwrap();
        assert_abs_diff_eq!(c, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-4);
    }

    #[test]
    fn direct_sum_constant_orthogonal_r3() {
        let t = Tol::default();
        let y = Subspace::orthonormalize(
            &[dvector![1.0, 0.0, 0.0], dvector![0.0, 1.0, 0.0]],
            AmbientSpace::euclidean(3),
            &t,
        )
        .unwrap();
        let z = axis(3, 2, NormP::Two);
        let c = direct_sum_constant(&y, &z, &t, 7).unwrap();
        assert_abs_diff_eq!(c, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-4);
    }

    #[test]
    fn direct_sum_constant_oblique_matches_closed_form() {
        // p = 2 closed form: c = sqrt((1 − σ_max)/2) with σ_max the largest
        // singular value of B_Yᵀ B_Z — an independent algebraic route.
        let t = Tol::default();
        let deg80 = 80.0_f64.to_radians();
        let y = axis(2, 0, NormP::Two);
        let z = Subspace::line(
            &dvector![deg80.cos(), deg80.sin()],
            AmbientSpace::euclidean(2),
            &t,
        )
        .unwrap();
        let c = direct_sum_constant(&y, &z, &t, 7).unwrap();
        let sigma = (y.basis().transpose() * z.basis()).abs().max();
        let expected = ((1.0 - sigma) / 2.0).sqrt();
        assert!(c > 0.0 && c < 1.0);
        assert_abs_diff_eq!(c, expected, epsilon = 1e-4);
    }

    #[test]
    fn direct_sum_constant_rejects_overlap() {
        let t = Tol::default();
        let y = axis(2, 0, NormP::Two);
        let r = direct_sum_constant(&y, &y, &t, 7);
        assert!(matches!(r, Err(Error::NontrivialIntersection)));
    }

    #[test]
    fn complex_span_closed_under_j() {
        let amb = AmbientSpace::new(2, Field::Complex, NormP::Two).unwrap();
        // the complex line spanned by (1, 0): realified span must contain J·v
        let v = dvector![1.0, 0.0, 0.0, 0.0];
        let s = Subspace::line(&v, amb, &Tol::default()).unwrap();
        assert_eq!(s.subdim(), 2);
        let jv = amb.apply_j(&v);
        assert!(s.contains(&jv, 1e-10));
    }

    #[test]
    fn orthonormal_range_rank() {
        let m = dmatrix![1.0, 2.0; 0.0, 0.0];
        assert_eq!(orthonormal_range(&m, 1e-10).ncols(), 1);
    }
}
