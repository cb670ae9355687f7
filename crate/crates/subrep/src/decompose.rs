//! Constructive decompositions x = Σ x_k along a system of subspaces:
//! greedy best-approximation pursuit, alternating (cyclic) projections, the
//! complement construction over a family with trivial intersection, and a
//! verifier for the resulting series.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{NormP, Tol};
use crate::subspace::Subspace;
use crate::system::SubspaceSystem;

/// An ordered decomposition of `target`: terms (1-based subspace index,
/// component vector) plus the norm of the remainder after each term.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub terms: Vec<(usize, DVector<f64>)>,
    pub residual_trace: Vec<f64>,
    pub target: DVector<f64>,
}

/// Wire format: `{"terms":[{"index":i,"component":[...]}],"residuals":[...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionWire {
    pub terms: Vec<WireTerm>,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireTerm {
    pub index: usize,
    pub component: Vec<f64>,
}

impl Decomposition {
    pub fn empty(target: DVector<f64>) -> Decomposition {
        Decomposition {
            terms: Vec::new(),
            residual_trace: Vec::new(),
            target,
        }
    }

    pub fn to_wire(&self) -> DecompositionWire {
        DecompositionWire {
            terms: self
                .terms
                .iter()
                .map(|(i, c)| WireTerm {
                    index: *i,
                    component: c.iter().cloned().collect(),
                })
                .collect(),
            residuals: self.residual_trace.clone(),
        }
    }

    pub fn from_wire(wire: DecompositionWire, target: DVector<f64>) -> Decomposition {
        Decomposition {
            terms: wire
                .terms
                .into_iter()
                .map(|t| (t.index, DVector::from_vec(t.component)))
                .collect(),
            residual_trace: wire.residuals,
            target,
        }
    }

    pub fn partial_sum(&self, upto: usize) -> DVector<f64> {
        let mut acc = DVector::zeros(self.target.len());
        for (_, c) in self.terms.iter().take(upto) {
            acc += c;
        }
        acc
    }

    /// Largest step-to-step residual ratio; `None` for fewer than one step.
    pub fn max_residual_ratio(&self, initial_norm: f64) -> Option<f64> {
        if self.residual_trace.is_empty() {
            return None;
        }
        let mut prev = initial_norm;
        let mut worst: f64 = 0.0;
        for &r in &self.residual_trace {
            if prev > 1e-300 {
                worst = worst.max(r / prev);
            }
            prev = r;
        }
        Some(worst)
    }
}

/// Greedy pursuit: each step picks the subspace nearest to the residual
/// (smallest index on ties), subtracts the best approximant, and stops when
/// the residual falls under `stop_tol·‖x‖` or `max_terms` is reached.
///
/// Residuals are non-increasing. If the ratio ‖y_{k+1}‖/‖y_k‖ stays ≥
/// 1 − 1e-12 for three consecutive steps the system cannot contract at this
/// vector and the run aborts with the trace attached.
pub fn greedy_decompose(
    system: &SubspaceSystem,
    x: &DVector<f64>,
    max_terms: usize,
    stop_tol: f64,
) -> Result<Decomposition> {
    system.ambient().check_vector(x)?;
    let x_norm = system.ambient().norm(x);
    if x_norm == 0.0 {
        return Ok(Decomposition::empty(x.clone()));
    }
    let mut dec = Decomposition::empty(x.clone());
    let mut residual = x.clone();
    let mut residual_norm = x_norm;
    let mut stalled = 0u32;
    for _ in 0..max_terms {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for (i, sub) in system.subspaces().iter().enumerate() {
            let (approx, dist) = sub.best_approximation(&residual)?;
            if best.as_ref().is_none_or(|(_, _, d)| dist < *d) {
                best = Some((i + 1, approx, dist));
            }
        }
        let (index, component, dist) = best.expect("system is nonempty");
        let ratio = dist / residual_norm;
        if ratio >= 1.0 - 1e-12 {
            stalled += 1;
            if stalled >= 3 {
                let mut trace = dec.residual_trace.clone();
                trace.push(dist);
                return Err(Error::Stagnation { trace });
            }
        } else {
            stalled = 0;
        }
        residual -= &component;
        residual_norm = system.ambient().norm(&residual);
        dec.terms.push((index, component));
        dec.residual_trace.push(residual_norm);
        if residual_norm <= stop_tol * x_norm {
            break;
        }
    }
    Ok(dec)
}

/// Alternating projections: x_n = P_{X_n} E_{n−1} x with
/// E_n = (I − P_{X_n})…(I − P_{X_1}), unrolling cyclic systems to `n_steps`.
/// Requires p = 2 (orthoprojectors). The identity
/// x = Σ_{k≤n} x_k + E_n x holds to machine precision at every step.
pub fn alternating_decompose(
    system: &SubspaceSystem,
    x: &DVector<f64>,
    n_steps: usize,
) -> Result<Decomposition> {
    system.ambient().check_vector(x)?;
    if system.ambient().p != NormP::Two {
        return Err(Error::InvalidInput(
            "alternating projections need the Euclidean model (p = 2)".into(),
        ));
    }
    let mut dec = Decomposition::empty(x.clone());
    let mut residual = x.clone();
    for n in 1..=n_steps {
        let sub = if system.is_cyclic() {
            system.subspace_at(n)?
        } else {
            if n > system.len() {
                break;
            }
            system.subspace_at(n)?
        };
        let component = sub.project(&residual)?;
        residual -= &component;
        dec.terms.push((n, component));
        dec.residual_trace.push(residual.norm());
    }
    Ok(dec)
}

/// Builds the system X_k = H_{i(k)}^⊥ from a family H and an index map.
/// The map must avoid immediate repetitions (including across the cyclic
/// wrap) and must visit every member of the family; the returned system is
/// cyclic so that every complement recurs infinitely often.
pub fn halperin_system(family: &[Subspace], index_map: &[usize]) -> Result<SubspaceSystem> {
    if family.is_empty() || index_map.is_empty() {
        return Err(Error::InvalidInput("empty family or index map".into()));
    }
    let n = family.len();
    for &i in index_map {
        if i == 0 || i > n {
            return Err(Error::IndexOutOfBounds { index: i, len: n });
        }
    }
    for w in index_map.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidInput(format!(
                "adjacent repetition of index {} in the map",
                w[0]
            )));
        }
    }
    if index_map.len() > 1 && index_map[index_map.len() - 1] == index_map[0] {
        return Err(Error::InvalidInput(
            "cyclic wrap repeats the first index".into(),
        ));
    }
    for m in 1..=n {
        if !index_map.contains(&m) {
            return Err(Error::InvalidInput(format!(
                "index {m} of the family never occurs in the map"
            )));
        }
    }
    let subs: Vec<Subspace> = index_map
        .iter()
        .map(|&i| family[i - 1].complement())
        .collect();
    SubspaceSystem::new(subs, true)
}

/// Verification report for a decomposition: the quantities behind both
/// convergence notions (sup of partial-sum norms, absolute sum) plus
/// per-term subspace-membership distances. Failures are flags, not errors.
#[derive(Debug, Clone, Serialize)]
pub struct RepresentationReport {
    pub final_residual: f64,
    pub sup_partial_norm: f64,
    pub absolute_sum: f64,
    pub membership_distances: Vec<f64>,
    pub membership_ok: bool,
    pub trace_consistent: bool,
}

pub fn verify_representation(
    system: &SubspaceSystem,
    dec: &Decomposition,
    tol: &Tol,
) -> Result<RepresentationReport> {
    system.ambient().check_vector(&dec.target)?;
    let ambient = system.ambient();
    let mut acc = DVector::zeros(dec.target.len());
    let mut sup_partial: f64 = 0.0;
    let mut absolute = 0.0;
    let mut membership = Vec::with_capacity(dec.terms.len());
    let mut trace_ok = dec.residual_trace.len() == dec.terms.len();
    for (t, (index, comp)) in dec.terms.iter().enumerate() {
        let sub = system.subspace_at(*index)?;
        membership.push(sub.distance2(comp));
        acc += comp;
        sup_partial = sup_partial.max(ambient.norm(&acc));
        absolute += ambient.norm(comp);
        if let Some(&rec) = dec.residual_trace.get(t) {
            let actual = ambient.norm(&(&dec.target - &acc));
            if (actual - rec).abs() > 1e-9 * (1.0 + actual) {
                trace_ok = false;
            }
        }
    }
    let final_residual = ambient.norm(&(&dec.target - &acc));
    let membership_ok = membership.iter().all(|d| *d <= tol.solver.max(1e-9));
    Ok(RepresentationReport {
        final_residual,
        sup_partial_norm: sup_partial,
        absolute_sum: absolute,
        membership_distances: membership,
        membership_ok,
        trace_consistent: trace_ok,
    })
}
