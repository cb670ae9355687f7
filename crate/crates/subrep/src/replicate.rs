//! Replication decomposition: stage k approximates the residual by a short
//! sum of generator elements, splits each into r(k) equal pieces small enough
//! to pass the stage's norm budget, and realizes every piece inside a later
//! subspace of the cyclic list with strictly increasing indices. Prefix
//! deviations stay under 6·2^{−k} throughout stage k.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::decompose::Decomposition;
use crate::error::{Error, Result};
use crate::space::Tol;
use crate::subspace::{gap_rho0, stacked_rank, Subspace};
use crate::system::SubspaceSystem;

/// Stage plan: which generators drive the approximation, how many stages to
/// run, caps on the per-stage group size N(k) and replication count r(k),
/// and the relative closeness demanded when a piece is realized inside an
/// actual subspace of the system.
#[derive(Debug, Clone)]
pub struct ReplicationSchedule {
    pub generators: Vec<Subspace>,
    pub stages: usize,
    pub max_group: usize,
    pub max_replication: usize,
    pub closeness: f64,
}

impl ReplicationSchedule {
    pub fn new(generators: Vec<Subspace>, stages: usize) -> ReplicationSchedule {
        ReplicationSchedule {
            generators,
            stages,
            max_group: 64,
            max_replication: 1 << 24,
            closeness: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicationOutcome {
    #[serde(skip)]
    pub decomposition: Decomposition,
    /// 1-based stage that produced each term.
    pub stage_of_term: Vec<usize>,
    /// The run operates on x/scale so that the norm stays below 1.
    pub scale: f64,
    /// δ_s = ‖x̂ − (first s terms)‖ re-evaluated from scratch, normalized run.
    pub deviations: Vec<f64>,
    /// 6·2^{−k(s)} per term.
    pub deviation_bounds: Vec<f64>,
    pub bounds_ok: bool,
}

pub fn replication_decompose(
    system: &SubspaceSystem,
    x: &DVector<f64>,
    schedule: &ReplicationSchedule,
    tol: &Tol,
) -> Result<ReplicationOutcome> {
    system.ambient().check_vector(x)?;
    if !system.is_cyclic() {
        return Err(Error::InvalidInput(
            "replication decomposition needs a cyclic system".into(),
        ));
    }
    if schedule.generators.is_empty() {
        return Err(Error::InvalidInput("schedule has no generators".into()));
    }
    let ambient = system.ambient();
    for g in &schedule.generators {
        if g.ambient() != ambient {
            return Err(Error::AmbientMismatch);
        }
        if g.is_trivial() {
            return Err(Error::InvalidInput("trivial generator".into()));
        }
    }
    // Generators must span the ambient space…
    let parts: Vec<&DMatrix<f64>> = schedule.generators.iter().map(|g| g.basis()).collect();
    if stacked_rank(&parts, tol.rank) < ambient.coord_dim() {
        return Err(Error::InvalidInput(
            "generators do not span the ambient space".into(),
        ));
    }
    // …and each must recur along one period of the cycle within the declared
    // closeness.
    for (j, g) in schedule.generators.iter().enumerate() {
        let best = system
            .subspaces()
            .iter()
            .map(|s| gap_rho0(g, s, tol).unwrap_or(f64::INFINITY))
            .fold(f64::INFINITY, f64::min);
        if best > schedule.closeness {
            return Err(Error::ScheduleInfeasible(format!(
                "generator {} is not recurrently approximable: best per-period gap {best:.3e} exceeds the declared closeness {:.3e}",
                j + 1,
                schedule.closeness
            )));
        }
    }

    let x_norm = ambient.norm(x);
    if x_norm == 0.0 {
        return Ok(ReplicationOutcome {
            decomposition: Decomposition::empty(x.clone()),
            stage_of_term: Vec::new(),
            scale: 1.0,
            deviations: Vec::new(),
            deviation_bounds: Vec::new(),
            bounds_ok: true,
        });
    }
    let scale = if x_norm < 1.0 { 1.0 } else { 2.0 * x_norm };
    let xhat = x / scale;

    let gen_cols: Vec<DVector<f64>> = schedule
        .generators
        .iter()
        .flat_map(|g| g.basis().column_iter().map(|c| c.into_owned()))
        .collect();
    let gen_matrix = DMatrix::from_columns(&gen_cols);
    let gen_svd = gen_matrix.clone().svd(true, true);

    let mut dec = Decomposition::empty(xhat.clone());
    let mut stage_of_term = Vec::new();
    let mut residual = xhat.clone();
    let mut pointer = 0usize; // last used unrolled index
    let period = system.len();
    let search_horizon = period * 8;

    for k in 1..=schedule.stages {
        let budget = 2f64.powi(-(k as i32));
        if ambient.norm(&residual) == 0.0 {
            continue;
        }
        // Stage approximation of the residual over generator coordinates;
        // spanning generators make this exact up to rounding.
        let coeffs = gen_svd
            .solve(&residual, 1e-13)
            .map_err(|e| Error::SolverFailure(e.to_string()))?;
        let mut pieces: Vec<(usize, DVector<f64>)> = Vec::new();
        {
            let mut offset = 0;
            for (j, g) in schedule.generators.iter().enumerate() {
                let s = g.subdim();
                let cj = coeffs.rows(offset, s).into_owned();
                offset += s;
                let piece = g.basis() * cj;
                if ambient.norm(&piece) > 1e-14 {
                    pieces.push((j, piece));
                }
            }
        }
        let approx_err = {
            let mut acc = residual.clone();
            for (_, piece) in &pieces {
                acc -= piece;
            }
            ambient.norm(&acc)
        };
        if approx_err >= budget {
            return Err(Error::ScheduleInfeasible(format!(
                "stage {k}: generator approximation error {approx_err:.3e} ≥ budget {budget:.3e}"
            )));
        }
        if pieces.is_empty() {
            continue;
        }
        let group = pieces.len();
        if group > schedule.max_group {
            return Err(Error::ScheduleInfeasible(format!(
                "stage {k}: group size {group} exceeds the cap {}",
                schedule.max_group
            )));
        }
        let per_piece = budget / group as f64;
        let max_piece = pieces
            .iter()
            .map(|(_, p)| ambient.norm(p))
            .fold(0.0, f64::max);
        let replication = (max_piece / per_piece).floor() as usize + 1;
        if replication > schedule.max_replication {
            return Err(Error::ScheduleInfeasible(format!(
                "stage {k}: replication count {replication} exceeds the cap {}",
                schedule.max_replication
            )));
        }

        for _round in 0..replication {
            for (j, piece) in &pieces {
                let t = piece / replication as f64;
                let t_norm = ambient.norm(&t);
                if t_norm == 0.0 {
                    continue;
                }
                let slack4 = per_piece - t_norm;
                let allow = (schedule.closeness * t_norm)
                    .min(0.45 * budget / (replication * group) as f64)
                    .min(0.9 * slack4.max(0.0));
                let mut placed = false;
                for idx in pointer + 1..=pointer + search_horizon {
                    let sub = system.subspace_at(idx)?;
                    let (approx, dist) = sub.best_approximation(&t)?;
                    if dist <= allow {
                        dec.terms.push((idx, approx));
                        stage_of_term.push(k);
                        residual -= &dec.terms.last().expect("just pushed").1;
                        dec.residual_trace.push(ambient.norm(&residual));
                        pointer = idx;
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return Err(Error::ScheduleInfeasible(format!(
                        "stage {k}: no subspace within {search_horizon} indices approximates generator {} to {allow:.3e}",
                        j + 1
                    )));
                }
            }
        }
        let stage_residual = ambient.norm(&residual);
        if stage_residual >= budget {
            return Err(Error::ScheduleInfeasible(format!(
                "stage {k}: residual {stage_residual:.3e} missed the budget {budget:.3e}"
            )));
        }
    }

    // Independent re-evaluation of every prefix deviation.
    let mut deviations = Vec::with_capacity(dec.terms.len());
    let mut bounds = Vec::with_capacity(dec.terms.len());
    let mut acc = DVector::zeros(xhat.len());
    for (s, (_, comp)) in dec.terms.iter().enumerate() {
        acc += comp;
        deviations.push(ambient.norm(&(&xhat - &acc)));
        bounds.push(6.0 * 2f64.powi(-(stage_of_term[s] as i32)));
    }
    let bounds_ok = deviations
        .iter()
        .zip(&bounds)
        .all(|(d, b)| d < b);

    // Scale the decomposition back to the original target.
    let mut out = Decomposition::empty(x.clone());
    out.terms = dec
        .terms
        .iter()
        .map(|(i, c)| (*i, c * scale))
        .collect();
    out.residual_trace = dec.residual_trace.iter().map(|r| r * scale).collect();

    Ok(ReplicationOutcome {
        decomposition: out,
        stage_of_term,
        scale,
        deviations,
        deviation_bounds: bounds,
        bounds_ok,
    })
}
