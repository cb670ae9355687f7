//! Dual-side quantitative criteria: the block functional F₁ over sequential
//! partitions, representation margins on both the primal and dual side, the
//! worst-case approximation ratio λ_S, the Hilbert-space net radius, block
//! margins for the annihilator system, and Δ(S) membership.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::{restriction_norm_coords, Functional};
use crate::solver::sphere::{self, Goal, Method, SearchConfig};
use crate::space::{norm_p, NormP, Tol};
use crate::subspace::Subspace;
use crate::system::SubspaceSystem;

/// Shared estimator options: numerical tolerances plus the sphere-search
/// strategy (seed, number of starts, dense-oracle cutoff).
#[derive(Debug, Clone, Copy)]
pub struct EstimatorOpts {
    pub tol: Tol,
    pub search: SearchConfig,
}

impl Default for EstimatorOpts {
    fn default() -> Self {
        EstimatorOpts {
            tol: Tol::default(),
            search: SearchConfig::default(),
        }
    }
}

impl EstimatorOpts {
    pub fn with_seed(seed: u64) -> Self {
        EstimatorOpts {
            search: SearchConfig {
                seed,
                ..SearchConfig::default()
            },
            ..EstimatorOpts::default()
        }
    }
}

/// A sequential partition: consecutive blocks covering {1..n}. The last
/// block stands in for the infinite tail when the partition truncates an
/// infinite one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    /// Inclusive 1-based (start, end) ranges, consecutive and increasing.
    pub blocks: Vec<(usize, usize)>,
    pub tail_flag: bool,
}

impl Partition {
    pub fn new(blocks: Vec<(usize, usize)>, tail_flag: bool) -> Result<Partition> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("partition needs at least one block".into()));
        }
        let mut expect = 1;
        for &(a, b) in &blocks {
            if a != expect || b < a {
                return Err(Error::InvalidInput(
                    "blocks must be consecutive, increasing and disjoint".into(),
                ));
            }
            expect = b + 1;
        }
        Ok(Partition { blocks, tail_flag })
    }

    pub fn n(&self) -> usize {
        self.blocks.last().map(|&(_, b)| b).unwrap_or(0)
    }

    pub fn block_indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.blocks.iter().map(|&(a, b)| (a..=b).collect())
    }
}

/// All 2^{n−1} compositions of {1..n} into consecutive blocks. Rejects
/// n > 20 to keep the enumeration bounded.
pub fn sequential_partitions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be ≥ 1".into()));
    }
    if n > 20 {
        return Err(Error::CombinatorialCap(format!(
            "sequential partitions of n = {n} exceed the n ≤ 20 cap"
        )));
    }
    let mut out = Vec::with_capacity(1 << (n - 1));
    for mask in 0u32..(1 << (n - 1)) {
        let mut blocks = Vec::new();
        let mut start = 1usize;
        for pos in 1..n {
            if mask & (1 << (pos - 1)) != 0 {
                blocks.push((start, pos));
                start = pos + 1;
            }
        }
        blocks.push((start, n));
        out.push(Partition {
            blocks,
            tail_flag: true,
        });
    }
    Ok(out)
}

/// F₁(S, π, φ) = Σ_blocks ‖φ restricted to the span closure of the block‖.
pub fn f1(
    system: &SubspaceSystem,
    partition: &Partition,
    phi: &Functional,
    tol: &Tol,
) -> Result<f64> {
    if phi.ambient() != system.ambient() {
        return Err(Error::AmbientMismatch);
    }
    let mut total = 0.0;
    for block in partition.block_indices() {
        let span = system.span_closure(&block, tol)?;
        total += phi.restriction_norm(&span)?;
    }
    Ok(total)
}

/// Which side of the duality a margin witness lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessSide {
    Primal,
    Dual,
}

/// Result of a margin estimation: the value, the extremal unit vector that
/// attains it, and how the estimate was produced.
#[derive(Debug, Clone, Serialize)]
pub struct MarginReport {
    pub value: f64,
    pub witness: Vec<f64>,
    pub witness_side: WitnessSide,
    pub method: Method,
    pub certified_dim: Option<usize>,
}

impl MarginReport {
    fn from_outcome(outcome: sphere::SearchOutcome, side: WitnessSide) -> MarginReport {
        MarginReport {
            value: outcome.value,
            witness: outcome.point.iter().cloned().collect(),
            witness_side: side,
            method: outcome.method,
            certified_dim: outcome.certified_dim,
        }
    }

    pub fn witness_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.witness.clone())
    }
}

/// Span closures of every consecutive index range, shared by the partition
/// margin estimator.
struct BlockSpans {
    spans: Vec<Vec<Subspace>>, // spans[i][j-i] = span of {i+1..j+1} 0-based
}

impl BlockSpans {
    fn build(system: &SubspaceSystem, tol: &Tol) -> Result<BlockSpans> {
        let l = system.len();
        let mut spans = Vec::with_capacity(l);
        for i in 1..=l {
            let mut row = Vec::with_capacity(l - i + 1);
            let mut acc = system.subspace_at(i)?.clone();
            row.push(acc.clone());
            for j in i + 1..=l {
                acc = acc.sum(system.subspace_at(j)?, tol)?;
                row.push(acc.clone());
            }
            spans.push(row);
        }
        Ok(BlockSpans { spans })
    }

    fn get(&self, a: usize, b: usize) -> &Subspace {
        &self.spans[a - 1][b - a]
    }
}

fn dual_normalizer(p: NormP, dim: usize) -> impl Fn(&DVector<f64>) -> Option<DVector<f64>> + Sync {
    let q = p.dual();
    move |raw: &DVector<f64>| {
        debug_assert_eq!(raw.len(), dim);
        let n = norm_p(raw, q);
        (n >= 1e-12).then(|| raw / n)
    }
}

/// Margin of the sequential-partition criterion:
/// ε̂ = inf over unit functionals of the minimum of F₁ over all sequential
/// partitions of the system's index range. Positive exactly when the
/// subspaces jointly span the ambient space.
pub fn psr_margin(system: &SubspaceSystem, opts: &EstimatorOpts) -> Result<MarginReport> {
    let l = system.len();
    let partitions = sequential_partitions(l)?;
    let spans = BlockSpans::build(system, &opts.tol)?;
    let p = system.ambient().p;
    let dim = system.ambient().coord_dim();
    let normalize = dual_normalizer(p, dim);
    let eval = move |phi: &DVector<f64>| {
        let mut best = f64::INFINITY;
        for partition in &partitions {
            let mut total = 0.0;
            for &(a, b) in &partition.blocks {
                total += restriction_norm_coords(phi, spans.get(a, b), p);
                if total >= best {
                    break;
                }
            }
            best = best.min(total);
        }
        best
    };
    let outcome = sphere::optimize_normalized(Goal::Minimize, dim, &normalize, &eval, &opts.search);
    Ok(MarginReport::from_outcome(outcome, WitnessSide::Dual))
}

/// Margin of the absolute-representation criterion:
/// ε̂ = min over unit functionals of max_k ‖φ restricted to X_k‖.
pub fn apss_margin(system: &SubspaceSystem, opts: &EstimatorOpts) -> Result<MarginReport> {
    let p = system.ambient().p;
    let dim = system.ambient().coord_dim();
    let subs = system.subspaces().to_vec();
    let normalize = dual_normalizer(p, dim);
    let eval = move |phi: &DVector<f64>| {
        subs.iter()
            .map(|s| restriction_norm_coords(phi, s, p))
            .fold(0.0, f64::max)
    };
    let outcome = sphere::optimize_normalized(Goal::Minimize, dim, &normalize, &eval, &opts.search);
    Ok(MarginReport::from_outcome(outcome, WitnessSide::Dual))
}

/// Worst-case best-approximation distance from the unit sphere:
/// λ̂ = max over unit x of min_k d(x, X_k). λ̂ < 1 is the contraction
/// condition that drives geometric greedy decay.
pub fn lambda_s(system: &SubspaceSystem, opts: &EstimatorOpts) -> Result<MarginReport> {
    let p = system.ambient().p;
    let dim = system.ambient().coord_dim();
    let subs = system.subspaces().to_vec();
    let normalize = move |raw: &DVector<f64>| {
        let n = norm_p(raw, p);
        (n >= 1e-12).then(|| raw / n)
    };
    let eval = move |x: &DVector<f64>| {
        subs.iter()
            .map(|s| match p {
                NormP::Two => s.distance2(x),
                _ => s.distance(x).unwrap_or(f64::NAN),
            })
            .fold(f64::INFINITY, f64::min)
    };
    let outcome = sphere::optimize_normalized(Goal::Maximize, dim, &normalize, &eval, &opts.search);
    Ok(MarginReport::from_outcome(outcome, WitnessSide::Primal))
}

/// √(1 + τ² − 2τε): the radius for which the scaled union of unit spheres
/// τ·D(S) is a net for the unit sphere, given pairing margin ε.
pub fn net_radius(tau: f64, eps: f64) -> Result<f64> {
    if tau <= 0.0 {
        return Err(Error::InvalidInput("τ must be positive".into()));
    }
    if eps <= 0.0 || eps > 1.0 {
        return Err(Error::InvalidInput("ε must lie in (0, 1]".into()));
    }
    Ok((1.0 + tau * tau - 2.0 * tau * eps).max(0.0).sqrt())
}

/// Companion check on a Euclidean system: the measured covering radius of
/// τ·D(S) over the unit sphere against the radius predicted from the margin.
#[derive(Debug, Clone, Serialize)]
pub struct NetCheckReport {
    pub tau: f64,
    pub margin: f64,
    pub predicted_radius: f64,
    pub measured_radius: f64,
    pub equivalence_gap: f64,
}

pub fn net_check(system: &SubspaceSystem, tau: f64, opts: &EstimatorOpts) -> Result<NetCheckReport> {
    if system.ambient().p != NormP::Two {
        return Err(Error::InvalidInput(
            "the net check runs in the Euclidean model (p = 2)".into(),
        ));
    }
    if tau <= 0.0 {
        return Err(Error::InvalidInput("τ must be positive".into()));
    }
    let margin = apss_margin(system, opts)?.value;
    let predicted = (1.0 + tau * tau - 2.0 * tau * margin).max(0.0).sqrt();
    // Directly measure sup over unit x of the distance to τ·D(S); per
    // subspace the best scaled unit approximant gives
    // min_{unit y ∈ X_k} ‖x − τy‖² = 1 + τ² − 2τ‖P_k x‖.
    let dim = system.ambient().coord_dim();
    let subs = system.subspaces().to_vec();
    let normalize = |raw: &DVector<f64>| {
        let n = raw.norm();
        (n >= 1e-12).then(|| raw / n)
    };
    let eval = move |x: &DVector<f64>| {
        subs.iter()
            .map(|s| {
                let proj = if s.is_trivial() {
                    0.0
                } else {
                    (s.basis().transpose() * x).norm()
                };
                (1.0 + tau * tau - 2.0 * tau * proj).max(0.0).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let outcome =
        sphere::optimize_normalized(Goal::Maximize, dim, &normalize, &eval, &opts.search);
    Ok(NetCheckReport {
        tau,
        margin,
        predicted_radius: predicted,
        measured_radius: outcome.value,
        equivalence_gap: (outcome.value - predicted).abs(),
    })
}

/// Two-block margin of the annihilator system X'_k: the infimum over block
/// cuts n of the distance (in the dual norm) from unit functionals in
/// Σ_{k≤n} X'_k to the span of the later blocks. `None` when every
/// annihilator is trivial, which leaves the margin undefined.
pub fn schauder_block_margin(
    system: &SubspaceSystem,
    opts: &EstimatorOpts,
) -> Result<Option<MarginReport>> {
    let l = system.len();
    let annihilators: Vec<Subspace> = (1..=l)
        .map(|k| system.annihilator(k, &opts.tol))
        .collect::<Result<_>>()?;
    if annihilators.iter().all(|a| a.is_trivial()) {
        return Ok(None);
    }
    let dual = system.ambient().dual();
    let mut best: Option<MarginReport> = None;
    for n in 1..l.max(2) {
        // V = Σ_{k ≤ n} X'_k, W = Σ_{k > n} X'_k (largest m).
        let mut v = Subspace::trivial(dual);
        for a in annihilators.iter().take(n) {
            v = v.sum(a, &opts.tol)?;
        }
        if v.is_trivial() {
            continue;
        }
        let mut w = Subspace::trivial(dual);
        for a in annihilators.iter().skip(n) {
            w = w.sum(a, &opts.tol)?;
        }
        let vb = v.basis().clone();
        let q = dual.p;
        let normalize = move |raw: &DVector<f64>| {
            let phi = &vb * raw;
            let nn = norm_p(&phi, q);
            (nn >= 1e-12).then(|| raw / nn)
        };
        let vb2 = v.basis().clone();
        let wc = w.clone();
        let eval = move |u: &DVector<f64>| {
            let phi = &vb2 * u;
            wc.distance(&phi).unwrap_or(f64::NAN)
        };
        let outcome = sphere::optimize_normalized(
            Goal::Minimize,
            v.subdim(),
            &normalize,
            &eval,
            &opts.search,
        );
        // Report the witness as dual coordinates rather than V-parameters.
        let phi = v.basis() * &outcome.point;
        let candidate = MarginReport {
            value: outcome.value,
            witness: phi.iter().cloned().collect(),
            witness_side: WitnessSide::Dual,
            method: outcome.method,
            certified_dim: outcome.certified_dim,
        };
        if best.as_ref().is_none_or(|b| candidate.value < b.value) {
            best = Some(candidate);
        }
    }
    Ok(best)
}

/// Margin restricted to the annihilator of a finite-dimensional subspace Y:
/// min over unit φ ∈ Y^⊥ of max_k ‖φ restricted to X_k‖.
pub fn finite_codim_margin(
    system: &SubspaceSystem,
    y: &Subspace,
    opts: &EstimatorOpts,
) -> Result<MarginReport> {
    if y.ambient() != system.ambient() {
        return Err(Error::AmbientMismatch);
    }
    let yperp = y.complement();
    if yperp.is_trivial() {
        return Err(Error::InvalidInput(
            "Y is the whole space; its annihilator is trivial".into(),
        ));
    }
    let p = system.ambient().p;
    let q = p.dual();
    let basis = yperp.basis().clone();
    let normalize = move |raw: &DVector<f64>| {
        let phi = &basis * raw;
        let n = norm_p(&phi, q);
        (n >= 1e-12).then(|| raw / n)
    };
    let basis2 = yperp.basis().clone();
    let subs = system.subspaces().to_vec();
    let eval = move |u: &DVector<f64>| {
        let phi = &basis2 * u;
        subs.iter()
            .map(|s| restriction_norm_coords(&phi, s, p))
            .fold(0.0, f64::max)
    };
    let outcome = sphere::optimize_normalized(
        Goal::Minimize,
        yperp.subdim(),
        &normalize,
        &eval,
        &opts.search,
    );
    let phi = yperp.basis() * &outcome.point;
    Ok(MarginReport {
        value: outcome.value,
        witness: phi.iter().cloned().collect(),
        witness_side: WitnessSide::Dual,
        method: outcome.method,
        certified_dim: outcome.certified_dim,
    })
}

/// Membership in Δ(S) = {x : liminf_k d(x, X_k) = 0}: along a cyclic system
/// the liminf is the minimum over one period. Returns the verdict at `tol`
/// plus the per-subspace distance profile.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    pub member: bool,
    pub min_distance: f64,
    pub profile: Vec<f64>,
}

pub fn delta_membership(system: &SubspaceSystem, x: &DVector<f64>, tol: f64) -> Result<DeltaReport> {
    if !system.is_cyclic() {
        return Err(Error::InvalidInput(
            "Δ-membership is about the tail of a cyclic system".into(),
        ));
    }
    system.ambient().check_vector(x)?;
    let profile: Vec<f64> = system
        .subspaces()
        .iter()
        .map(|s| s.distance(x))
        .collect::<Result<_>>()?;
    let min = profile.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DeltaReport {
        member: min <= tol,
        min_distance: min,
        profile,
    })
}
