//! Dense two-phase simplex for the tiny linear programs behind p ∈ {1, ∞}
//! distances and dual norms. Problems here have at most a few dozen
//! variables, so a dense tableau with Bland's rule is both simple and exact
//! to machine precision.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::space::NormP;

const PIVOT_TOL: f64 = 1e-11;
const ITER_CAP: usize = 20_000;

/// Solution of `min c·x  s.t.  A x ≤ b,  x ≥ 0`.
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
}

/// Minimize `c·x` over `{x ≥ 0 : A x ≤ b}` with a dense two-phase simplex.
pub fn solve_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), m);

    // Equality form: A x + s = b with rows flipped so that rhs ≥ 0.
    // Rows that had negative rhs get an artificial variable for phase 1.
    let mut need_artificial = Vec::new();
    for (i, bi) in b.iter().enumerate() {
        if *bi < 0.0 {
            need_artificial.push(i);
        }
    }
    let n_art = need_artificial.len();
    let cols = n + m + n_art; // structural + slack + artificial
    let width = cols + 1; // + rhs

    let mut tab = vec![0.0; m * width];
    let mut basis = vec![0usize; m];
    {
        let mut art = 0usize;
        for i in 0..m {
            let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                tab[i * width + j] = flip * a[i][j];
            }
            tab[i * width + n + i] = flip; // slack
            tab[i * width + cols] = flip * b[i];
            if flip < 0.0 {
                let col = n + m + art;
                tab[i * width + col] = 1.0;
                basis[i] = col;
                art += 1;
            } else {
                basis[i] = n + i;
            }
        }
    }

    if n_art > 0 {
        // Phase 1: minimize the sum of artificials.
        let mut obj = vec![0.0; width];
        for slot in obj.iter_mut().take(cols).skip(n + m) {
            *slot = 1.0;
        }
        for i in 0..m {
            if basis[i] >= n + m {
                for j in 0..width {
                    obj[j] -= tab[i * width + j];
                }
            }
        }
        run_simplex(&mut tab, &mut obj, &mut basis, m, cols, width)?;
        let phase1 = -obj[cols];
        if phase1 > 1e-8 {
            return Err(Error::SolverFailure(format!(
                "LP infeasible (phase-1 residual {phase1:.3e})"
            )));
        }
        // Drive any artificial still in the basis out (degenerate case).
        for i in 0..m {
            if basis[i] >= n + m {
                let mut pivoted = false;
                for j in 0..n + m {
                    if tab[i * width + j].abs() > PIVOT_TOL {
                        pivot(&mut tab, &mut basis, m, width, i, j);
                        pivoted = true;
                        break;
                    }
                }
                if !pivoted {
                    // Row is entirely zero: redundant constraint, keep as-is.
                    tab[i * width + cols] = 0.0;
                }
            }
        }
    }

    // Phase 2 objective on structural + slack columns only.
    let mut obj = vec![0.0; width];
    for (j, cj) in c.iter().enumerate() {
        obj[j] = *cj;
    }
    // Express objective in terms of the current (feasible) basis.
    for i in 0..m {
        let bj = basis[i];
        let coef = obj[bj];
        if coef != 0.0 {
            for j in 0..width {
                obj[j] -= coef * tab[i * width + j];
            }
        }
    }
    // Forbid artificial columns from re-entering.
    for j in n + m..cols {
        obj[j] = f64::INFINITY;
    }
    run_simplex(&mut tab, &mut obj, &mut basis, m, cols, width)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = tab[i * width + cols];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { value, x })
}

fn run_simplex(
    tab: &mut [f64],
    obj: &mut [f64],
    basis: &mut [usize],
    m: usize,
    cols: usize,
    width: usize,
) -> Result<()> {
    for _ in 0..ITER_CAP {
        // Bland's rule: smallest column with negative reduced cost.
        let mut enter = None;
        for j in 0..cols {
            if obj[j] < -PIVOT_TOL {
                enter = Some(j);
                break;
            }
        }
        let Some(enter) = enter else {
            return Ok(());
        };
        // Min-ratio test, ties broken by smallest basis index.
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let aij = tab[i * width + enter];
            if aij > PIVOT_TOL {
                let ratio = tab[i * width + cols] / aij;
                if ratio < best_ratio - PIVOT_TOL
                    || (ratio < best_ratio + PIVOT_TOL
                        && leave.is_some_and(|l| basis[i] < basis[l]))
                {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(Error::SolverFailure("LP unbounded".into()));
        };
        pivot_with_obj(tab, obj, basis, m, width, leave, enter);
    }
    Err(Error::SolverCap { cap: ITER_CAP })
}

fn pivot(tab: &mut [f64], basis: &mut [usize], m: usize, width: usize, row: usize, col: usize) {
    let piv = tab[row * width + col];
    for j in 0..width {
        tab[row * width + j] /= piv;
    }
    for i in 0..m {
        if i != row {
            let f = tab[i * width + col];
            if f != 0.0 {
                for j in 0..width {
                    tab[i * width + j] -= f * tab[row * width + j];
                }
            }
        }
    }
    basis[row] = col;
}

fn pivot_with_obj(
    tab: &mut [f64],
    obj: &mut [f64],
    basis: &mut [usize],
    m: usize,
    width: usize,
    row: usize,
    col: usize,
) {
    pivot(tab, basis, m, width, row, col);
    let f = obj[col];
    if f != 0.0 && f.is_finite() {
        for j in 0..width {
            if obj[j].is_finite() {
                obj[j] -= f * tab[row * width + j];
            }
        }
    } else if f.is_finite() {
        // f == 0: nothing to eliminate.
    }
}

/// Distance `min_c ‖x − B c‖_p` for p ∈ {1, ∞}, together with the optimal
/// coefficients. `basis` has the subspace basis as columns.
pub fn p_distance(x: &DVector<f64>, basis: &DMatrix<f64>, p: NormP) -> Result<(f64, DVector<f64>)> {
    let d = x.len();
    let s = basis.ncols();
    if s == 0 {
        return Ok((crate::space::norm_p(x, p), DVector::zeros(0)));
    }
    match p {
        NormP::Inf => {
            // vars: c⁺(s), c⁻(s), t(1); min t
            // rows:  (Bc)_i − t ≤ x_i  and  −(Bc)_i − t ≤ −x_i
            let n = 2 * s + 1;
            let mut c = vec![0.0; n];
            c[2 * s] = 1.0;
            let mut a = Vec::with_capacity(2 * d);
            let mut b = Vec::with_capacity(2 * d);
            for i in 0..d {
                let mut row = vec![0.0; n];
                for j in 0..s {
                    row[j] = basis[(i, j)];
                    row[s + j] = -basis[(i, j)];
                }
                row[2 * s] = -1.0;
                a.push(row.clone());
                b.push(x[i]);
                for v in row.iter_mut().take(2 * s) {
                    *v = -*v;
                }
                a.push(row);
                b.push(-x[i]);
            }
            let sol = solve_min(&c, &a, &b)?;
            let coeffs =
                DVector::from_iterator(s, (0..s).map(|j| sol.x[j] - sol.x[s + j]));
            Ok((sol.value, coeffs))
        }
        NormP::One => {
            // vars: c⁺(s), c⁻(s), u(d); min Σu
            // rows:  (Bc)_i − u_i ≤ x_i  and  −(Bc)_i − u_i ≤ −x_i
            let n = 2 * s + d;
            let mut c = vec![0.0; n];
            for j in 0..d {
                c[2 * s + j] = 1.0;
            }
            let mut a = Vec::with_capacity(2 * d);
            let mut b = Vec::with_capacity(2 * d);
            for i in 0..d {
                let mut row = vec![0.0; n];
                for j in 0..s {
                    row[j] = basis[(i, j)];
                    row[s + j] = -basis[(i, j)];
                }
                row[2 * s + i] = -1.0;
                a.push(row.clone());
                b.push(x[i]);
                for (j, v) in row.iter_mut().enumerate().take(2 * s) {
                    let _ = j;
                    *v = -*v;
                }
                a.push(row);
                b.push(-x[i]);
            }
            let sol = solve_min(&c, &a, &b)?;
            let coeffs =
                DVector::from_iterator(s, (0..s).map(|j| sol.x[j] - sol.x[s + j]));
            Ok((sol.value, coeffs))
        }
        NormP::Two => unreachable!("p = 2 distance has a closed form"),
    }
}

/// `sup { g·c : ‖B c‖_p ≤ 1 }` for p ∈ {1, ∞} — the restriction of a
/// functional with basis-coordinates `g = Bᵀφ` to the span of `basis`.
pub fn p_ball_sup(g: &DVector<f64>, basis: &DMatrix<f64>, p: NormP) -> Result<f64> {
    let d = basis.nrows();
    let s = basis.ncols();
    if s == 0 {
        return Ok(0.0);
    }
    match p {
        NormP::Inf => {
            // vars c⁺, c⁻; max g·c s.t. −1 ≤ (Bc)_i ≤ 1
            let n = 2 * s;
            let mut c = vec![0.0; n];
            for j in 0..s {
                c[j] = -g[j];
                c[s + j] = g[j];
            }
            let mut a = Vec::with_capacity(2 * d);
            let mut b = Vec::with_capacity(2 * d);
            for i in 0..d {
                let mut row = vec![0.0; n];
                for j in 0..s {
                    row[j] = basis[(i, j)];
                    row[s + j] = -basis[(i, j)];
                }
                a.push(row.clone());
                b.push(1.0);
                for v in row.iter_mut() {
                    *v = -*v;
                }
                a.push(row);
                b.push(1.0);
            }
            let sol = solve_min(&c, &a, &b)?;
            Ok(-sol.value)
        }
        NormP::One => {
            // vars c⁺, c⁻, u(d); max g·c s.t. ±(Bc)_i ≤ u_i, Σu ≤ 1
            let n = 2 * s + d;
            let mut c = vec![0.0; n];
            for j in 0..s {
                c[j] = -g[j];
                c[s + j] = g[j];
            }
            let mut a = Vec::with_capacity(2 * d + 1);
            let mut b = Vec::with_capacity(2 * d + 1);
            for i in 0..d {
                let mut row = vec![0.0; n];
                for j in 0..s {
                    row[j] = basis[(i, j)];
                    row[s + j] = -basis[(i, j)];
                }
                row[2 * s + i] = -1.0;
                a.push(row.clone());
                b.push(0.0);
                for (j, v) in row.iter_mut().enumerate() {
                    if j < 2 * s {
                        *v = -*v;
                    }
                }
                a.push(row);
                b.push(0.0);
            }
            let mut cap = vec![0.0; n];
            for j in 0..d {
                cap[2 * s + j] = 1.0;
            }
            a.push(cap);
            b.push(1.0);
            let sol = solve_min(&c, &a, &b)?;
            Ok(-sol.value)
        }
        NormP::Two => unreachable!("p = 2 dual restriction has a closed form"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn simple_lp() {
        // min -x1 - x2 s.t. x1 + x2 ≤ 1, x ≥ 0  →  value -1
        let sol = solve_min(
            &[-1.0, -1.0],
            &[vec![1.0, 1.0]],
            &[1.0],
        )
        .unwrap();
        assert_abs_diff_eq!(sol.value, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn lp_with_negative_rhs() {
        // min x1 s.t. -x1 ≤ -2  →  x1 ≥ 2, value 2
        let sol = solve_min(&[1.0], &[vec![-1.0]], &[-2.0]).unwrap();
        assert_abs_diff_eq!(sol.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn lp_infeasible_detected() {
        // x1 ≤ -1 with x1 ≥ 0 is infeasible.
        let res = solve_min(&[1.0], &[vec![1.0]], &[-1.0]);
        assert!(res.is_err());
    }

    #[test]
    fn inf_distance_to_axis() {
        // d_∞((1,1), span(e1)) = min_t max(|1−t|, 1) = 1
        let basis = dmatrix![1.0; 0.0];
        let (d, _) = p_distance(&dvector![1.0, 1.0], &basis, NormP::Inf).unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn one_distance_is_weighted_median_case() {
        // d_1((1,2), span(e1)) = |2| at t = 1
        let basis = dmatrix![1.0; 0.0];
        let (d, c) = p_distance(&dvector![1.0, 2.0], &basis, NormP::One).unwrap();
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn ball_sup_whole_space_is_dual_norm() {
        // Y = ℝ², p = ∞: sup φ(y) over ‖y‖_∞ ≤ 1 is ‖φ‖₁.
        let basis = dmatrix![1.0, 0.0; 0.0, 1.0];
        let g = dvector![3.0, -4.0];
        let v = p_ball_sup(&g, &basis, NormP::Inf).unwrap();
        assert_abs_diff_eq!(v, 7.0, epsilon = 1e-9);
        // p = 1: dual is ‖φ‖_∞.
        let v = p_ball_sup(&g, &basis, NormP::One).unwrap();
        assert_abs_diff_eq!(v, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn ball_sup_line() {
        // Y = span((1,1)), p = ∞: points (t,t) with |t| ≤ 1; φ = (1,2) → sup 3.
        let basis = dmatrix![1.0; 1.0];
        let g = dvector![3.0]; // Bᵀφ = 1·1 + 1·2
        let v = p_ball_sup(&g, &basis, NormP::Inf).unwrap();
        assert_abs_diff_eq!(v, 3.0, epsilon = 1e-9);
    }
}
