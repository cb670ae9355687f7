//! Prefix-sum functionals over a subspace system and the perturbation
//! budgets they induce.
//!
//! For a tuple P = (x₁,…,x_n) with x_k ∈ X_k, Θ_S(P) is the largest norm of
//! a prefix sum. Θ_S(x, ε) minimizes Θ_S(P) over tuples whose total lands
//! within ε of x (∞ when no tuple does), Θ*_S(x) is its limit as ε ↓ 0, and
//! Θ̄_S its supremum over the unit ball. Finiteness of Θ̄_S characterizes
//! series representability, and (2Θ̄_S)⁻¹ bounds how much the subspaces may
//! move (in the one-sided gap, summed) before that property can break.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::criteria::{apss_margin, psr_margin, EstimatorOpts};
use crate::error::{Error, Result};
use crate::solver::sphere::{self, Goal, Method};
use crate::solver::subgrad::{solve_prefix_min, PrefixProblem, SubgradConfig};
use crate::space::norm_p;
use crate::subspace::gap_rho0;
use crate::system::SubspaceSystem;

/// Unrolling horizon for cyclic systems: tuples may draw from this many
/// periods.
const CYCLIC_HORIZON_PERIODS: usize = 3;

/// Evaluation of Θ_S at a concrete tuple, together with its total Σ(P).
#[derive(Debug, Clone)]
pub struct TupleEval {
    pub theta: f64,
    pub sum: DVector<f64>,
}

/// Θ_S(P) = max over prefixes of ‖x₁ + … + x_k‖, requiring x_k ∈ X_k
/// (within 1e-9). Index k resolves cyclically for cyclic systems.
pub fn theta_tuple(system: &SubspaceSystem, components: &[DVector<f64>]) -> Result<TupleEval> {
    if components.is_empty() {
        return Err(Error::InvalidInput("empty tuple".into()));
    }
    if !system.is_cyclic() && components.len() > system.len() {
        return Err(Error::IndexOutOfBounds {
            index: components.len(),
            len: system.len(),
        });
    }
    let ambient = system.ambient();
    let mut acc = DVector::zeros(ambient.coord_dim());
    let mut theta: f64 = 0.0;
    for (k, x) in components.iter().enumerate() {
        ambient.check_vector(x)?;
        let sub = system.subspace_at(k + 1)?;
        let dist = sub.distance(x)?;
        if dist > 1e-9 * (1.0 + ambient.norm(x)) {
            return Err(Error::InvalidInput(format!(
                "tuple slot {} is {dist:.3e} away from its subspace",
                k + 1
            )));
        }
        acc += x;
        theta = theta.max(ambient.norm(&acc));
    }
    Ok(TupleEval { theta, sum: acc })
}

fn tuple_blocks(system: &SubspaceSystem, n: usize) -> Result<Vec<DMatrix<f64>>> {
    (1..=n)
        .map(|k| Ok(system.subspace_at(k)?.basis().clone()))
        .collect()
}

/// Θ_S(x, ε) at a fixed tuple length n: the constrained min-max solve on the
/// first n subspaces (cyclically unrolled where applicable). Infeasible
/// instances return the +∞ sentinel. The problem is solved on x/‖x‖ and
/// rescaled, so the value is exactly 1-homogeneous in x.
pub fn theta_x_eps(
    system: &SubspaceSystem,
    x: &DVector<f64>,
    eps: f64,
    n: usize,
    opts: &EstimatorOpts,
) -> Result<f64> {
    theta_x_eps_cfg(system, x, eps, n, &full_config(opts))
}

fn full_config(opts: &EstimatorOpts) -> SubgradConfig {
    SubgradConfig {
        max_iter: 100_000,
        tol: opts.tol.solver.max(1e-12),
        ..SubgradConfig::default()
    }
}

/// Cheaper configuration used inside the Θ̄ search loop; final values are
/// re-solved at full precision.
fn fast_config() -> SubgradConfig {
    SubgradConfig {
        max_iter: 400,
        tol: 1e-5,
        polish_floor: 1e-6,
        polish_iters: 40,
    }
}

fn theta_x_eps_cfg(
    system: &SubspaceSystem,
    x: &DVector<f64>,
    eps: f64,
    n: usize,
    cfg: &SubgradConfig,
) -> Result<f64> {
    system.ambient().check_vector(x)?;
    if eps < 0.0 {
        return Err(Error::InvalidInput("ε must be nonnegative".into()));
    }
    if n == 0 || (!system.is_cyclic() && n > system.len()) {
        return Err(Error::IndexOutOfBounds {
            index: n,
            len: system.len(),
        });
    }
    let p = system.ambient().p;
    let xn = norm_p(x, p);
    if xn == 0.0 {
        return Ok(0.0);
    }
    let xhat = x / xn;
    let blocks = tuple_blocks(system, n)?;
    let problem = PrefixProblem {
        blocks: &blocks,
        target: &xhat,
        eps: eps / xn,
        p,
    };
    match solve_prefix_min(&problem, cfg)? {
        None => Ok(f64::INFINITY),
        Some(sol) => Ok(sol.value * xn),
    }
}

/// Tuple lengths swept by Θ*: every length up to one period, then whole
/// extra periods for cyclic systems.
fn sweep_lengths(system: &SubspaceSystem) -> Vec<usize> {
    let l = system.len();
    let mut out: Vec<usize> = (1..=l).collect();
    if system.is_cyclic() {
        for m in 2..=CYCLIC_HORIZON_PERIODS {
            out.push(m * l);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaStarReport {
    pub value: f64,
    /// (ε, best value over the length sweep) pairs, ε decreasing.
    pub ladder: Vec<(f64, f64)>,
    pub tuple_length: usize,
}

/// Θ*_S(x), approached through ε ∈ {10⁻¹,…,10⁻⁴}·‖x‖ with the tuple length
/// swept. The ladder must be non-decreasing as ε shrinks (up to solver
/// tolerance 1e-5); a violation beyond that is reported as an error.
pub fn theta_star(
    system: &SubspaceSystem,
    x: &DVector<f64>,
    opts: &EstimatorOpts,
) -> Result<ThetaStarReport> {
    system.ambient().check_vector(x)?;
    let xn = norm_p(x, system.ambient().p);
    let lengths = sweep_lengths(system);
    let max_len = *lengths.last().expect("nonempty sweep");
    if xn == 0.0 {
        return Ok(ThetaStarReport {
            value: 0.0,
            ladder: Vec::new(),
            tuple_length: max_len,
        });
    }
    let cfg = full_config(opts);
    let mut ladder = Vec::with_capacity(4);
    for factor in [1e-1, 1e-2, 1e-3, 1e-4] {
        let eps = factor * xn;
        let mut best = f64::INFINITY;
        for &n in &lengths {
            let v = theta_x_eps_cfg(system, x, eps, n, &cfg)?;
            best = best.min(v);
        }
        ladder.push((eps, best));
    }
    let slack = 1e-5 * xn.max(1.0);
    for w in ladder.windows(2) {
        // ε decreases along the ladder, so values may only go up.
        if w[1].1 < w[0].1 - slack {
            return Err(Error::SolverFailure(format!(
                "Θ(x, ε) not monotone in ε: {:.6e} at ε={:.3e} vs {:.6e} at ε={:.3e}",
                w[0].1, w[0].0, w[1].1, w[1].0
            )));
        }
    }
    Ok(ThetaStarReport {
        value: ladder.last().expect("four rungs").1,
        ladder,
        tuple_length: max_len,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaBarReport {
    pub value: f64,
    pub witness: Vec<f64>,
    pub method: Method,
}

/// Θ̄_S = sup over the unit sphere of Θ*_S, estimated from below by
/// multistart maximization (a cheap inner solve steers the search; the
/// reported value re-solves the winning direction at full precision with
/// ε = 10⁻⁴).
pub fn theta_bar(system: &SubspaceSystem, opts: &EstimatorOpts) -> Result<ThetaBarReport> {
    let p = system.ambient().p;
    let dim = system.ambient().coord_dim();
    let n_full = *sweep_lengths(system).last().expect("nonempty");
    let normalize = move |raw: &DVector<f64>| {
        let n = norm_p(raw, p);
        (n >= 1e-12).then(|| raw / n)
    };
    let sys = system.clone();
    let fast = fast_config();
    let eval = move |x: &DVector<f64>| {
        theta_x_eps_cfg(&sys, x, 1e-4, n_full, &fast).unwrap_or(f64::NAN)
    };
    let search = sphere::SearchConfig {
        dense_max_dim: 0, // the inner solve is too heavy for the dense grid
        refine_floor: 3e-4,
        n_starts: opts.search.n_starts.min(16),
        ..opts.search
    };
    let outcome = sphere::optimize_normalized(Goal::Maximize, dim, &normalize, &eval, &search);
    let value = theta_x_eps_cfg(system, &outcome.point, 1e-4, n_full, &full_config(opts))?;
    Ok(ThetaBarReport {
        value: value.max(outcome.value),
        witness: outcome.point.iter().cloned().collect(),
        method: outcome.method,
    })
}

/// Dense-grid lower oracle for Θ̄ on two-dimensional parameter spaces; slow,
/// meant for cross-checking the multistart estimate in tests.
pub fn theta_bar_dense(system: &SubspaceSystem, step: f64, _opts: &EstimatorOpts) -> Result<f64> {
    let p = system.ambient().p;
    let dim = system.ambient().coord_dim();
    if dim > 2 {
        return Err(Error::InvalidInput(
            "the dense Θ̄ oracle is limited to two coordinates".into(),
        ));
    }
    let n_full = *sweep_lengths(system).last().expect("nonempty");
    let normalize = move |raw: &DVector<f64>| {
        let n = norm_p(raw, p);
        (n >= 1e-12).then(|| raw / n)
    };
    let sys = system.clone();
    let fast = fast_config();
    let eval = move |x: &DVector<f64>| {
        theta_x_eps_cfg(&sys, x, 1e-4, n_full, &fast).unwrap_or(f64::NAN)
    };
    Ok(sphere::dense_oracle(Goal::Maximize, dim, &normalize, &eval, step))
}

/// The four-way equivalence probed on samples: spanning, the (α, B)
/// certificate at α = 1/2, finiteness of Θ* on samples, and the Θ̄ estimate,
/// plus the consistency bound Θ*(x) ≤ B/(1−α)·‖x‖.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub spanning: bool,
    pub alpha: f64,
    pub observed_b: f64,
    pub theta_star_all_finite: bool,
    pub theta_bar: f64,
    /// max over samples of Θ*(x) − B/(1−α)·‖x‖ (≤ tolerance when coherent).
    pub lemma_slack: f64,
    pub consistent: bool,
}

pub fn psr_equivalence_report(
    system: &SubspaceSystem,
    opts: &EstimatorOpts,
) -> Result<EquivalenceReport> {
    use rand::{Rng, SeedableRng};
    let spanning = system.spanning(&opts.tol);
    let dim = system.ambient().coord_dim();
    let p = system.ambient().p;
    let alpha = 0.5;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(opts.search.seed ^ 0x7e9a_11b3);
    let n_full = *sweep_lengths(system).last().expect("nonempty");
    let cfg = full_config(opts);
    let mut observed_b: f64 = 0.0;
    let mut all_finite = true;
    let mut lemma_slack = f64::NEG_INFINITY;
    let samples = 100;
    let mut star_cache: Vec<(DVector<f64>, f64)> = Vec::new();
    for i in 0..samples {
        let x = DVector::from_iterator(dim, (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0));
        let xn = norm_p(&x, p);
        if xn < 1e-9 {
            continue;
        }
        let v = theta_x_eps_cfg(system, &x, alpha * xn, n_full, &cfg)?;
        if v.is_finite() {
            observed_b = observed_b.max(v / xn);
        } else {
            all_finite = false;
        }
        // Θ* is costly; sample it on a subset.
        if i % 5 == 0 {
            let star = theta_star(system, &x, opts)?;
            if !star.value.is_finite() {
                all_finite = false;
            }
            star_cache.push((x, star.value));
        }
    }
    let bound = observed_b / (1.0 - alpha);
    for (x, star) in &star_cache {
        let xn = norm_p(x, p);
        lemma_slack = lemma_slack.max(star - bound * xn);
    }
    let bar = theta_bar(system, opts)?;
    let consistent = spanning == all_finite && (!spanning || lemma_slack <= 1e-4);
    Ok(EquivalenceReport {
        spanning,
        alpha,
        observed_b,
        theta_star_all_finite: all_finite,
        theta_bar: bar.value,
        lemma_slack,
        consistent,
    })
}

/// Outcome of a perturbation check. `within_budget = false` means the
/// hypothesis of the theorem does not hold at this perturbation size, so the
/// conclusion is not asserted ("outside budget" is informational, not a
/// failure).
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub margin_before: f64,
    pub perturbation: f64,
    pub budget: f64,
    pub within_budget: bool,
    pub margin_after: f64,
    pub predicted_lower_bound: Option<f64>,
    pub conclusion_holds: Option<bool>,
    /// Certificate (α, B) fixed as in the stability argument, when within
    /// budget.
    pub certificate: Option<(f64, f64)>,
}

impl StabilityReport {
    /// One CSV row: id, margin, perturbation, budget/bound, measured.
    pub fn csv_row(&self, id: &str) -> String {
        format!(
            "{id},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.margin_before,
            self.perturbation,
            self.predicted_lower_bound.unwrap_or(self.budget),
            self.margin_after
        )
    }
}

fn check_same_shape(a: &SubspaceSystem, b: &SubspaceSystem) -> Result<()> {
    if a.ambient() != b.ambient() {
        return Err(Error::AmbientMismatch);
    }
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "systems have different lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Perturbation check for series representability: if Σ_k ρ₀(X_k, X̃_k)
/// stays under (2Θ̄_S)⁻¹, the perturbed system must still span and keep a
/// positive partition margin.
pub fn psr_stability_check(
    system: &SubspaceSystem,
    perturbed: &SubspaceSystem,
    opts: &EstimatorOpts,
) -> Result<StabilityReport> {
    check_same_shape(system, perturbed)?;
    let mut sum = 0.0;
    for (a, b) in system.subspaces().iter().zip(perturbed.subspaces()) {
        sum += gap_rho0(a, b, &opts.tol)?;
    }
    let bar = theta_bar(system, opts)?.value;
    let budget = 0.5 / bar;
    let margin_before = psr_margin(system, opts)?.value;
    let margin_after = psr_margin(perturbed, opts)?.value;
    let within = sum < budget;
    let (conclusion, certificate) = if within {
        let alpha = 0.5 * (2.0 * bar * sum + 1.0);
        let b = 1.01 * (bar + 2.0 * bar * sum);
        let ok = perturbed.spanning(&opts.tol) && margin_after > 1e-6;
        (Some(ok), Some((alpha, b)))
    } else {
        (None, None)
    };
    Ok(StabilityReport {
        margin_before,
        perturbation: sum,
        budget,
        within_budget: within,
        margin_after,
        predicted_lower_bound: None,
        conclusion_holds: conclusion,
        certificate,
    })
}

/// Perturbation check for the absolute-representation margin: with ε the
/// margin of S and d = max_k ρ₀(X_k, X̃_k) < ε, the perturbed margin must
/// stay above (ε − d)/(1 + d) up to estimator tolerance.
pub fn apss_stability_check(
    system: &SubspaceSystem,
    perturbed: &SubspaceSystem,
    opts: &EstimatorOpts,
) -> Result<StabilityReport> {
    check_same_shape(system, perturbed)?;
    let mut d: f64 = 0.0;
    for (a, b) in system.subspaces().iter().zip(perturbed.subspaces()) {
        d = d.max(gap_rho0(a, b, &opts.tol)?);
    }
    let eps = apss_margin(system, opts)?.value;
    let measured = apss_margin(perturbed, opts)?.value;
    let within = d < eps;
    let (bound, conclusion) = if within {
        let bound = (eps - d) / (1.0 + d);
        (Some(bound), Some(measured >= bound - 1e-3))
    } else {
        (None, None)
    };
    Ok(StabilityReport {
        margin_before: eps,
        perturbation: d,
        budget: eps,
        within_budget: within,
        margin_after: measured,
        predicted_lower_bound: bound,
        conclusion_holds: conclusion,
        certificate: None,
    })
}

/// Aggregated view for reporting: whichever Θ quantities a task computed.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ThetaReport {
    pub theta_tuple_value: Option<f64>,
    pub theta_x_eps_value: Option<f64>,
    pub theta_star_value: Option<f64>,
    pub theta_bar_value: Option<f64>,
    pub tuple_length: Option<usize>,
    pub infeasible: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{AmbientSpace, Tol};
    use crate::subspace::Subspace;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;

    fn axes2() -> SubspaceSystem {
        let amb = AmbientSpace::euclidean(2);
        let t = Tol::default();
        SubspaceSystem::new(
            vec![
                Subspace::line(&dvector![1.0, 0.0], amb, &t).unwrap(),
                Subspace::line(&dvector![0.0, 1.0], amb, &t).unwrap(),
            ],
            false,
        )
        .unwrap()
    }

    #[test]
    fn tuple_examples() {
        let s = axes2();
        let eval = theta_tuple(&s, &[dvector![1.0, 0.0], dvector![0.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(eval.theta, 2.0_f64.sqrt(), epsilon = 1e-12);
        assert_eq!(eval.sum, dvector![1.0, 1.0]);
        let single = theta_tuple(&s, &[dvector![0.3, 0.0]]).unwrap();
        assert_abs_diff_eq!(single.theta, 0.3, epsilon = 1e-12);
        let zero_second = theta_tuple(&s, &[dvector![1.0, 0.0], dvector![0.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(zero_second.theta, 1.0, epsilon = 1e-12);
        // membership violation
        assert!(theta_tuple(&s, &[dvector![1.0, 0.5]]).is_err());
    }

    #[test]
    fn theta_x_eps_axes() {
        let s = axes2();
        let opts = EstimatorOpts::default();
        let v = theta_x_eps(&s, &dvector![1.0, 1.0], 0.0, 2, &opts).unwrap();
        assert_abs_diff_eq!(v, 2.0_f64.sqrt(), epsilon = 1e-5);
        let v = theta_x_eps(&s, &dvector![1.0, 1.0], 0.1, 2, &opts).unwrap();
        assert_abs_diff_eq!(v, 2.0_f64.sqrt() - 0.1, epsilon = 1e-4);
    }

    #[test]
    fn theta_x_eps_infeasible_sentinel() {
        let amb = AmbientSpace::euclidean(2);
        let t = Tol::default();
        let s = SubspaceSystem::new(
            vec![Subspace::line(&dvector![1.0, 0.0], amb, &t).unwrap()],
            false,
        )
        .unwrap();
        let v = theta_x_eps(&s, &dvector![0.0, 1.0], 0.5, 1, &EstimatorOpts::default()).unwrap();
        assert!(v.is_infinite());
    }

    #[test]
    fn theta_lower_bound() {
        let s = axes2();
        let opts = EstimatorOpts::default();
        for eps in [0.0, 0.05, 0.3] {
            let x = dvector![0.6, -0.8];
            let v = theta_x_eps(&s, &x, eps, 2, &opts).unwrap();
            assert!(v >= x.norm() - eps - 1e-6);
        }
    }

    #[test]
    fn theta_star_whole_space_is_norm() {
        let amb = AmbientSpace::euclidean(2);
        let s = SubspaceSystem::new(vec![Subspace::whole(amb)], false).unwrap();
        let x = dvector![0.3, 0.4];
        let star = theta_star(&s, &x, &EstimatorOpts::default()).unwrap();
        assert_abs_diff_eq!(star.value, 0.5, epsilon = 1e-3);
        let zero = theta_star(&s, &dvector![0.0, 0.0], &EstimatorOpts::default()).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn theta_star_axes() {
        let s = axes2();
        let star = theta_star(&s, &dvector![1.0, 1.0], &EstimatorOpts::default()).unwrap();
        assert_abs_diff_eq!(star.value, 2.0_f64.sqrt(), epsilon = 1e-3);
    }

    #[test]
    fn theta_star_scaling() {
        let s = axes2();
        let opts = EstimatorOpts::default();
        let x = dvector![0.7, -0.2];
        let a = theta_star(&s, &x, &opts).unwrap().value;
        let b = theta_star(&s, &(&x * 3.0), &opts).unwrap().value;
        assert_abs_diff_eq!(b, 3.0 * a, epsilon = 1e-5);
    }

    #[test]
    fn theta_bar_axes_close_to_one() {
        let s = axes2();
        let bar = theta_bar(&s, &EstimatorOpts::default()).unwrap();
        assert_abs_diff_eq!(bar.value, 1.0, epsilon = 2e-3);
    }

    #[test]
    fn theta_bar_narrow_lines_exceeds_one() {
        let amb = AmbientSpace::euclidean(2);
        let t = Tol::default();
        let deg10 = 10.0_f64.to_radians();
        let s = SubspaceSystem::new(
            vec![
                Subspace::line(&dvector![1.0, 0.0], amb, &t).unwrap(),
                Subspace::line(&dvector![deg10.cos(), deg10.sin()], amb, &t).unwrap(),
            ],
            false,
        )
        .unwrap();
        let bar = theta_bar(&s, &EstimatorOpts::default()).unwrap();
        assert!(bar.value > 1.0);
        let oracle = theta_bar_dense(&s, 0.02, &EstimatorOpts::default()).unwrap();
        assert!((bar.value - oracle).abs() < 1e-2);
    }

    #[test]
    fn equivalence_on_spanning_and_degenerate() {
        let s = axes2();
        let rep = psr_equivalence_report(&s, &EstimatorOpts::default()).unwrap();
        assert!(rep.spanning);
        assert!(rep.theta_star_all_finite);
        assert!(rep.consistent);
        assert!(rep.lemma_slack <= 1e-4);

        let amb = AmbientSpace::euclidean(2);
        let t = Tol::default();
        let line = Subspace::line(&dvector![1.0, 0.0], amb, &t).unwrap();
        let degenerate = SubspaceSystem::new(vec![line.clone(), line], false).unwrap();
        let rep = psr_equivalence_report(&degenerate, &EstimatorOpts::default()).unwrap();
        assert!(!rep.spanning);
        assert!(!rep.theta_star_all_finite);
        assert!(rep.consistent);
    }

    #[test]
    fn psr_stability_rotated_axes() {
        let t = Tol::default();
        let amb = AmbientSpace::euclidean(2);
        let rot = |deg: f64| {
            let r = deg.to_radians();
            SubspaceSystem::new(
                vec![
                    Subspace::line(&dvector![r.cos(), r.sin()], amb, &t).unwrap(),
                    Subspace::line(&dvector![-r.sin(), r.cos()], amb, &t).unwrap(),
                ],
                false,
            )
            .unwrap()
        };
        let s = rot(0.0);
        let opts = EstimatorOpts::default();
        let report = psr_stability_check(&s, &rot(5.0), &opts).unwrap();
        assert_abs_diff_eq!(
            report.perturbation,
            2.0 * 5.0_f64.to_radians().sin(),
            epsilon = 1e-6
        );
        assert!(report.within_budget);
        assert_eq!(report.conclusion_holds, Some(true));
        let (alpha, b) = report.certificate.unwrap();
        assert!(alpha > 0.0 && alpha < 1.0);
        assert!(b > 0.0);

        // identical copy: trivially stable
        let same = psr_stability_check(&s, &rot(0.0), &opts).unwrap();
        assert_eq!(same.perturbation, 0.0);
        assert_eq!(same.conclusion_holds, Some(true));

        // far outside the budget: informational only
        let outside = psr_stability_check(&s, &rot(40.0), &opts).unwrap();
        assert!(!outside.within_budget);
        assert!(outside.conclusion_holds.is_none());
    }

    #[test]
    fn apss_stability_rotated_axes() {
        let t = Tol::default();
        let amb = AmbientSpace::euclidean(2);
        let rot = |deg: f64| {
            let r = deg.to_radians();
            SubspaceSystem::new(
                vec![
                    Subspace::line(&dvector![r.cos(), r.sin()], amb, &t).unwrap(),
                    Subspace::line(&dvector![-r.sin(), r.cos()], amb, &t).unwrap(),
                ],
                false,
            )
            .unwrap()
        };
        let s = rot(0.0);
        let opts = EstimatorOpts::default();
        let report = apss_stability_check(&s, &rot(10.0), &opts).unwrap();
        assert!(report.within_budget);
        let bound = report.predicted_lower_bound.unwrap();
        let expected = (std::f64::consts::FRAC_1_SQRT_2 - 10.0_f64.to_radians().sin())
            / (1.0 + 10.0_f64.to_radians().sin());
        assert_abs_diff_eq!(bound, expected, epsilon = 1e-4);
        assert_eq!(report.conclusion_holds, Some(true));

        let same = apss_stability_check(&s, &rot(0.0), &opts).unwrap();
        assert_abs_diff_eq!(same.margin_after, same.margin_before, epsilon = 1e-6);

        // d ≥ ε: outside budget
        let outside = apss_stability_check(&s, &rot(60.0), &opts).unwrap();
        assert!(!outside.within_budget);
        assert!(outside.conclusion_holds.is_none());
    }

    #[test]
    fn csv_row_shape() {
        let report = StabilityReport {
            margin_before: 0.7,
            perturbation: 0.1,
            budget: 0.5,
            within_budget: true,
            margin_after: 0.6,
            predicted_lower_bound: Some(0.54),
            conclusion_holds: Some(true),
            certificate: None,
        };
        let row = report.csv_row("axes");
        assert!(row.starts_with("axes,"));
        assert_eq!(row.split(',').count(), 5);
    }
}
