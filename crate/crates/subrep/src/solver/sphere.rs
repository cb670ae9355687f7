//! Optimization of (generally nonsmooth, nonconvex) functions over a
//! normalized parameter set — unit spheres of subspaces in various norms.
//!
//! Strategy, fixed across the library: a dense direction grid (step 0.01 rad)
//! serves as the oracle for parameter dimension ≤ 3; everywhere else 64
//! deterministic multi-starts with derivative-free local refinement. All
//! parallel reductions are argmin/argmax over `(value, index)` pairs, so the
//! result is independent of the worker-thread count.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DenseSampling,
    Multistart,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub value: f64,
    pub point: DVector<f64>,
    pub method: Method,
    /// Parameter dimension at which the dense oracle ran, if it did.
    pub certified_dim: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub seed: u64,
    pub n_starts: usize,
    pub dense_max_dim: usize,
    pub grid_step: f64,
    pub refine: bool,
    /// Smallest poll step of the local refinement.
    pub refine_floor: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            n_starts: 64,
            dense_max_dim: 3,
            grid_step: 0.01,
            refine: true,
            refine_floor: 1e-7,
        }
    }
}

/// Normalization of a raw parameter vector onto the feasible set; `None`
/// rejects the candidate (e.g. the raw vector was numerically zero).
pub type Normalize<'a> = &'a (dyn Fn(&DVector<f64>) -> Option<DVector<f64>> + Sync);
pub type Eval<'a> = &'a (dyn Fn(&DVector<f64>) -> f64 + Sync);

fn better(goal: Goal, a: f64, b: f64) -> bool {
    match goal {
        Goal::Minimize => a < b,
        Goal::Maximize => a > b,
    }
}

fn worst(goal: Goal) -> f64 {
    match goal {
        Goal::Minimize => f64::INFINITY,
        Goal::Maximize => f64::NEG_INFINITY,
    }
}

/// Dense unit directions for parameter dimension ≤ 3. The grid index is the
/// tie-breaker in parallel reductions.
fn grid_directions(dim: usize, step: f64) -> Vec<DVector<f64>> {
    match dim {
        1 => vec![DVector::from_vec(vec![1.0]), DVector::from_vec(vec![-1.0])],
        2 => {
            let n = (std::f64::consts::TAU / step).ceil() as usize;
            (0..n)
                .map(|k| {
                    let t = k as f64 * step;
                    DVector::from_vec(vec![t.cos(), t.sin()])
                })
                .collect()
        }
        3 => {
            let n_pol = (std::f64::consts::PI / step).ceil() as usize;
            let n_az = (std::f64::consts::TAU / step).ceil() as usize;
            let mut dirs = Vec::with_capacity(n_pol * n_az + 2);
            dirs.push(DVector::from_vec(vec![0.0, 0.0, 1.0]));
            dirs.push(DVector::from_vec(vec![0.0, 0.0, -1.0]));
            for i in 0..n_pol {
                let theta = (i as f64 + 0.5) * step;
                if theta >= std::f64::consts::PI {
                    break;
                }
                let (st, ct) = (theta.sin(), theta.cos());
                for j in 0..n_az {
                    let phi = j as f64 * step;
                    dirs.push(DVector::from_vec(vec![
                        st * phi.cos(),
                        st * phi.sin(),
                        ct,
                    ]));
                }
            }
            dirs
        }
        _ => panic!("dense grid only covers parameter dimension ≤ 3"),
    }
}

fn reduce_best(
    goal: Goal,
    candidates: impl IndexedParallelIterator<Item = Option<(f64, DVector<f64>)>>,
) -> Option<(f64, DVector<f64>)> {
    candidates
        .enumerate()
        .filter_map(|(i, c)| c.map(|(v, p)| (i, v, p)))
        .reduce_with(|a, b| {
            let a_wins = match a.1.total_cmp(&b.1) {
                std::cmp::Ordering::Less => goal == Goal::Minimize,
                std::cmp::Ordering::Greater => goal == Goal::Maximize,
                std::cmp::Ordering::Equal => a.0 < b.0,
            };
            if a_wins {
                a
            } else {
                b
            }
        })
        .map(|(_, v, p)| (v, p))
}

/// Derivative-free local refinement: coordinate polls in raw parameter space
/// with re-normalization, shrinking the step until 1e-7.
pub fn pattern_refine(
    goal: Goal,
    start: &DVector<f64>,
    normalize: Normalize,
    eval: Eval,
    floor: f64,
) -> (f64, DVector<f64>) {
    let dim = start.len();
    let mut point = start.clone();
    let mut value = eval(&point);
    let mut h = 0.25;
    while h > floor {
        let mut improved = false;
        let mut best_cand: Option<(f64, DVector<f64>)> = None;
        for i in 0..dim {
            for sgn in [1.0, -1.0] {
                let mut raw = point.clone();
                raw[i] += sgn * h;
                if let Some(cand) = normalize(&raw) {
                    let v = eval(&cand);
                    let cur_best = best_cand.as_ref().map_or(value, |b| b.0);
                    if better(goal, v, cur_best) {
                        best_cand = Some((v, cand));
                    }
                }
            }
        }
        if let Some((v, p)) = best_cand {
            if better(goal, v, value) {
                value = v;
                point = p;
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (value, point)
}

fn random_starts(
    dim: usize,
    n: usize,
    seed: u64,
    normalize: Normalize,
) -> Vec<DVector<f64>> {
    let mut starts = Vec::with_capacity(n + 2 * dim);
    // Structured axis starts first, then seeded Gaussian directions.
    for i in 0..dim {
        for sgn in [1.0, -1.0] {
            let mut v = DVector::zeros(dim);
            v[i] = sgn;
            if let Some(p) = normalize(&v) {
                starts.push(p);
            }
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    while starts.len() < n + 2 * dim {
        let raw = DVector::from_iterator(dim, (0..dim).map(|_| gaussian(&mut rng)));
        if let Some(p) = normalize(&raw) {
            starts.push(p);
        }
    }
    starts
}

/// Standard normal via Box–Muller on the ChaCha stream.
fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Full estimator: dense oracle + refinement for small parameter dimensions,
/// multistart refinement otherwise.
pub fn optimize_normalized(
    goal: Goal,
    param_dim: usize,
    normalize: Normalize,
    eval: Eval,
    cfg: &SearchConfig,
) -> SearchOutcome {
    assert!(param_dim >= 1, "empty parameter space");
    if param_dim <= cfg.dense_max_dim {
        let dirs = grid_directions(param_dim, cfg.grid_step);
        let best = reduce_best(
            goal,
            dirs.par_iter()
                .map(|d| normalize(d).map(|p| (eval(&p), p))),
        )
        .unwrap_or_else(|| (worst(goal), DVector::zeros(param_dim)));
        let (value, point) = if cfg.refine {
            pattern_refine(goal, &best.1, normalize, eval, cfg.refine_floor)
        } else {
            best
        };
        SearchOutcome {
            value,
            point,
            method: Method::DenseSampling,
            certified_dim: Some(param_dim),
        }
    } else {
        let starts = random_starts(param_dim, cfg.n_starts, cfg.seed, normalize);
        let best = reduce_best(
            goal,
            starts
                .par_iter()
                .map(|s| Some(pattern_refine(goal, s, normalize, eval, cfg.refine_floor))),
        )
        .expect("at least one multistart");
        SearchOutcome {
            value: best.0,
            point: best.1,
            method: Method::Multistart,
            certified_dim: None,
        }
    }
}

/// Pure dense-grid value without refinement: the independent oracle used by
/// tests against the full estimator.
pub fn dense_oracle(
    goal: Goal,
    param_dim: usize,
    normalize: Normalize,
    eval: Eval,
    step: f64,
) -> f64 {
    let dirs = grid_directions(param_dim, step);
    let best = reduce_best(
        goal,
        dirs.par_iter()
            .map(|d| normalize(d).map(|p| (eval(&p), p))),
    );
    best.map_or(worst(goal), |(v, _)| v)
}
