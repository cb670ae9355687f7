//! Scenario files: a JSON description of an ambient space, a subspace
//! system, one task to run, a seed and optional tolerance overrides. A
//! scenario plus its seed determines the report byte-for-byte, regardless of
//! worker-thread count.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cconvexity;
use crate::criteria::{self, EstimatorOpts, Partition};
use crate::decompose::{self, Decomposition, DecompositionWire};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::replicate::{self, ReplicationSchedule};
use crate::solver::sphere::SearchConfig;
use crate::space::{AmbientSpace, Field, NormP, Tol};
use crate::subspace::Subspace;
use crate::system::SubspaceSystem;
use crate::theta;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dim: usize,
    pub field: Field,
    pub p: NormP,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub name: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolOverride {
    #[serde(default)]
    pub rank: Option<f64>,
    #[serde(default)]
    pub solver: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub space: SpaceSpec,
    pub subspaces: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub cyclic: bool,
    pub task: TaskSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Option<TolOverride>,
}

/// How a run ended; maps onto the CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    ValidationError,
    NumericError,
    OutsideBudget,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Ok => 0,
            RunStatus::ValidationError => 2,
            RunStatus::NumericError => 3,
            RunStatus::OutsideBudget => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub scenario_hash: String,
    pub seed: u64,
    pub task: String,
    pub status: RunStatus,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

impl Report {
    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut acc, b| {
        use std::fmt::Write;
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

impl Scenario {
    /// Parse and validate a scenario from raw JSON bytes.
    pub fn from_slice(bytes: &[u8]) -> Result<Scenario> {
        let scenario: Scenario = serde_json::from_slice(bytes)
            .map_err(|e| Error::InvalidInput(format!("scenario does not parse: {e}")))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        let ambient = self.ambient()?;
        if self.subspaces.is_empty() {
            return Err(Error::InvalidInput(
                "a scenario needs at least one subspace".into(),
            ));
        }
        for (i, sub) in self.subspaces.iter().enumerate() {
            for v in sub {
                if v.len() != ambient.coord_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: ambient.coord_dim(),
                        got: v.len(),
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "subspace {} has a non-finite coordinate",
                        i + 1
                    )));
                }
            }
        }
        if self.task.name.is_empty() {
            return Err(Error::InvalidInput("task name is empty".into()));
        }
        Ok(())
    }

    pub fn ambient(&self) -> Result<AmbientSpace> {
        AmbientSpace::new(self.space.dim, self.space.field, self.space.p)
    }

    pub fn tol(&self) -> Tol {
        let mut tol = Tol::default();
        if let Some(o) = &self.tolerances {
            if let Some(r) = o.rank {
                tol.rank = r;
            }
            if let Some(s) = o.solver {
                tol.solver = s;
            }
        }
        tol
    }

    pub fn estimator_opts(&self) -> EstimatorOpts {
        EstimatorOpts {
            tol: self.tol(),
            search: SearchConfig {
                seed: self.seed,
                ..SearchConfig::default()
            },
        }
    }

    pub fn build_system(&self) -> Result<SubspaceSystem> {
        let ambient = self.ambient()?;
        let tol = self.tol();
        let subs: Vec<Subspace> = self
            .subspaces
            .iter()
            .map(|raw| {
                let vecs: Vec<DVector<f64>> =
                    raw.iter().map(|v| DVector::from_vec(v.clone())).collect();
                Subspace::orthonormalize(&vecs, ambient, &tol)
            })
            .collect::<Result<_>>()?;
        SubspaceSystem::new(subs, self.cyclic)
    }
}

/// Run a scenario presented as raw bytes; the report embeds the hash of
/// exactly these bytes.
pub fn run_scenario_bytes(bytes: &[u8]) -> (RunStatus, Report) {
    let hash = hash_bytes(bytes);
    match Scenario::from_slice(bytes) {
        Err(err) => {
            let status = status_for(&err);
            let report = Report {
                schema_version: SCHEMA_VERSION,
                scenario_hash: hash,
                seed: 0,
                task: String::new(),
                status,
                result: json!({ "error": err.to_string() }),
                csv: None,
            };
            (status, report)
        }
        Ok(scenario) => {
            let (status, result, csv) = match dispatch(&scenario) {
                Ok((value, csv, status)) => (status, value, csv),
                Err(err) => (status_for(&err), json!({ "error": err.to_string() }), None),
            };
            let report = Report {
                schema_version: SCHEMA_VERSION,
                scenario_hash: hash,
                seed: scenario.seed,
                task: scenario.task.name.clone(),
                status,
                result,
                csv,
            };
            (status, report)
        }
    }
}

fn status_for(err: &Error) -> RunStatus {
    match err {
        Error::Stagnation { .. }
        | Error::SolverCap { .. }
        | Error::SolverFailure(_)
        | Error::ScheduleInfeasible(_) => RunStatus::NumericError,
        _ => RunStatus::ValidationError,
    }
}

fn parse_params<T: serde::de::DeserializeOwned>(params: &Value) -> Result<T> {
    serde_json::from_value(params.clone())
        .map_err(|e| Error::InvalidInput(format!("bad task params: {e}")))
}

fn vector(ambient: AmbientSpace, raw: &[f64]) -> Result<DVector<f64>> {
    let v = DVector::from_vec(raw.to_vec());
    ambient.check_vector(&v)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    Ok(v)
}

fn vec_json(v: &DVector<f64>) -> Value {
    json!(v.iter().cloned().collect::<Vec<f64>>())
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn margin_json(report: &criteria::MarginReport) -> Value {
    serde_json::to_value(report).expect("margin serializes")
}

fn wire_json(dec: &Decomposition) -> Value {
    serde_json::to_value(dec.to_wire()).expect("decomposition serializes")
}

type TaskOutput = (Value, Option<String>, RunStatus);

fn dispatch(scenario: &Scenario) -> Result<TaskOutput> {
    let ambient = scenario.ambient()?;
    let tol = scenario.tol();
    let opts = scenario.estimator_opts();
    let ok = RunStatus::Ok;

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct XParam {
        x: Vec<f64>,
    }

    match scenario.task.name.as_str() {
        "orthonormalize" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                vectors: Vec<Vec<f64>>,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let vecs: Vec<DVector<f64>> = p
                .vectors
                .iter()
                .map(|v| vector(ambient, v))
                .collect::<Result<_>>()?;
            let sub = Subspace::orthonormalize(&vecs, ambient, &tol)?;
            Ok((
                json!({
                    "subdim": sub.subdim(),
                    "basis": sub.basis().column_iter().map(|c| c.iter().cloned().collect::<Vec<f64>>()).collect::<Vec<_>>(),
                }),
                None,
                ok,
            ))
        }
        "project" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                x: Vec<f64>,
                subspace: usize,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let x = vector(ambient, &p.x)?;
            let y = system.subspace_at(p.subspace)?.project(&x)?;
            Ok((json!({ "projection": vec_json(&y) }), None, ok))
        }
        "distance" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                x: Vec<f64>,
                subspace: usize,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let x = vector(ambient, &p.x)?;
            let d = system.subspace_at(p.subspace)?.distance(&x)?;
            Ok((json!({ "distance": d }), None, ok))
        }
        "gap_rho0" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                y: usize,
                z: usize,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let g = crate::subspace::gap_rho0(
                system.subspace_at(p.y)?,
                system.subspace_at(p.z)?,
                &tol,
            )?;
            Ok((json!({ "gap": g }), None, ok))
        }
        "span_closure" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                indices: Vec<usize>,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let span = system.span_closure(&p.indices, &tol)?;
            Ok((json!({ "subdim": span.subdim() }), None, ok))
        }
        "restriction_norm" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                phi: Vec<f64>,
                subspace: usize,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let phi = Functional::new(vector(ambient, &p.phi)?, ambient)?;
            let r = phi.restriction_norm(system.subspace_at(p.subspace)?)?;
            Ok((json!({ "restriction_norm": r }), None, ok))
        }
        "annihilator" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                k: usize,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let a = system.annihilator(p.k, &tol)?;
            Ok((
                json!({
                    "subdim": a.subdim(),
                    "basis": a.basis().column_iter().map(|c| c.iter().cloned().collect::<Vec<f64>>()).collect::<Vec<_>>(),
                }),
                None,
                ok,
            ))
        }
        "direct_sum_constant" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                y: usize,
                z: usize,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let c = crate::subspace::direct_sum_constant(
                system.subspace_at(p.y)?,
                system.subspace_at(p.z)?,
                &tol,
                scenario.seed,
            )?;
            Ok((json!({ "constant": c }), None, ok))
        }
        "greedy_decompose" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                x: Vec<f64>,
                max_terms: usize,
                stop_tol: f64,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let x = vector(ambient, &p.x)?;
            let dec = decompose::greedy_decompose(&system, &x, p.max_terms, p.stop_tol)?;
            let ratio = dec.max_residual_ratio(ambient.norm(&x));
            Ok((
                json!({
                    "decomposition": wire_json(&dec),
                    "max_residual_ratio": ratio,
                }),
                None,
                ok,
            ))
        }
        "alternating_decompose" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                x: Vec<f64>,
                n_steps: usize,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let x = vector(ambient, &p.x)?;
            let dec = decompose::alternating_decompose(&system, &x, p.n_steps)?;
            Ok((json!({ "decomposition": wire_json(&dec) }), None, ok))
        }
        "halperin_system" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                index_map: Vec<usize>,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let hs = decompose::halperin_system(system.subspaces(), &p.index_map)?;
            Ok((
                json!({
                    "length": hs.len(),
                    "cyclic": hs.is_cyclic(),
                    "subdims": hs.subspaces().iter().map(|s| s.subdim()).collect::<Vec<_>>(),
                    "spanning": hs.spanning(&tol),
                }),
                None,
                ok,
            ))
        }
        "replication_decompose" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                x: Vec<f64>,
                stages: usize,
                #[serde(default)]
                generators: Option<Vec<Vec<Vec<f64>>>>,
                #[serde(default)]
                closeness: Option<f64>,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let x = vector(ambient, &p.x)?;
            let generators = match &p.generators {
                None => system.subspaces().to_vec(),
                Some(raw) => raw
                    .iter()
                    .map(|vs| {
                        let vecs: Vec<DVector<f64>> =
                            vs.iter().map(|v| vector(ambient, v)).collect::<Result<_>>()?;
                        Subspace::orthonormalize(&vecs, ambient, &tol)
                    })
                    .collect::<Result<_>>()?,
            };
            let mut schedule = ReplicationSchedule::new(generators, p.stages);
            if let Some(c) = p.closeness {
                schedule.closeness = c;
            }
            let out = replicate::replication_decompose(&system, &x, &schedule, &tol)?;
            Ok((
                json!({
                    "decomposition": wire_json(&out.decomposition),
                    "stage_of_term": out.stage_of_term,
                    "scale": out.scale,
                    "deviations": out.deviations,
                    "deviation_bounds": out.deviation_bounds,
                    "bounds_ok": out.bounds_ok,
                }),
                None,
                ok,
            ))
        }
        "verify_representation" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                x: Vec<f64>,
                decomposition: DecompositionWire,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let x = vector(ambient, &p.x)?;
            for term in &p.decomposition.terms {
                if term.component.len() != ambient.coord_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: ambient.coord_dim(),
                        got: term.component.len(),
                    });
                }
            }
            let dec = Decomposition::from_wire(p.decomposition, x);
            let report = decompose::verify_representation(&system, &dec, &tol)?;
            Ok((serde_json::to_value(&report).expect("serializes"), None, ok))
        }
        "sequential_partitions" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                n: usize,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let parts = criteria::sequential_partitions(p.n)?;
            Ok((
                json!({
                    "count": parts.len(),
                    "partitions": parts.iter().map(|q| q.blocks.clone()).collect::<Vec<_>>(),
                }),
                None,
                ok,
            ))
        }
        "f1" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                phi: Vec<f64>,
                partition: Vec<(usize, usize)>,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let phi = Functional::new(vector(ambient, &p.phi)?, ambient)?;
            let partition = Partition::new(p.partition, true)?;
            let v = criteria::f1(&system, &partition, &phi, &tol)?;
            Ok((json!({ "f1": v }), None, ok))
        }
        "psr_margin" => {
            let system = scenario.build_system()?;
            let report = criteria::psr_margin(&system, &opts)?;
            Ok((margin_json(&report), None, ok))
        }
        "apss_margin" => {
            let system = scenario.build_system()?;
            let report = criteria::apss_margin(&system, &opts)?;
            Ok((margin_json(&report), None, ok))
        }
        "lambda_s" => {
            let system = scenario.build_system()?;
            let report = criteria::lambda_s(&system, &opts)?;
            Ok((margin_json(&report), None, ok))
        }
        "net_radius" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                tau: f64,
                eps: f64,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let r = criteria::net_radius(p.tau, p.eps)?;
            Ok((json!({ "radius": r }), None, ok))
        }
        "net_check" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                tau: f64,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let report = criteria::net_check(&system, p.tau, &opts)?;
            Ok((serde_json::to_value(&report).expect("serializes"), None, ok))
        }
        "schauder_block_margin" => {
            let system = scenario.build_system()?;
            match criteria::schauder_block_margin(&system, &opts)? {
                Some(report) => Ok((
                    json!({ "defined": true, "margin": margin_json(&report) }),
                    None,
                    ok,
                )),
                None => Ok((json!({ "defined": false }), None, ok)),
            }
        }
        "finite_codim_margin" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                y: Vec<Vec<f64>>,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let vecs: Vec<DVector<f64>> =
                p.y.iter().map(|v| vector(ambient, v)).collect::<Result<_>>()?;
            let y = Subspace::orthonormalize(&vecs, ambient, &tol)?;
            let report = criteria::finite_codim_margin(&system, &y, &opts)?;
            Ok((margin_json(&report), None, ok))
        }
        "delta_membership" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                x: Vec<f64>,
                tol: f64,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let x = vector(ambient, &p.x)?;
            let report = criteria::delta_membership(&system, &x, p.tol)?;
            Ok((serde_json::to_value(&report).expect("serializes"), None, ok))
        }
        "theta_tuple" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                components: Vec<Vec<f64>>,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let comps: Vec<DVector<f64>> = p
                .components
                .iter()
                .map(|v| vector(ambient, v))
                .collect::<Result<_>>()?;
            let eval = theta::theta_tuple(&system, &comps)?;
            Ok((
                json!({
                    "theta": eval.theta,
                    "sum": vec_json(&eval.sum),
                    "tuple_length": comps.len(),
                }),
                None,
                ok,
            ))
        }
        "theta_x_eps" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                x: Vec<f64>,
                eps: f64,
                n: usize,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let x = vector(ambient, &p.x)?;
            let v = theta::theta_x_eps(&system, &x, p.eps, p.n, &opts)?;
            Ok((
                json!({ "value": finite_or_null(v), "infeasible": !v.is_finite() }),
                None,
                ok,
            ))
        }
        "theta_star" => {
            let p: XParam = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let x = vector(ambient, &p.x)?;
            let report = theta::theta_star(&system, &x, &opts)?;
            Ok((
                json!({
                    "value": finite_or_null(report.value),
                    "infeasible": !report.value.is_finite(),
                    "ladder": report.ladder.iter().map(|(e, v)| json!([e, finite_or_null(*v)])).collect::<Vec<_>>(),
                    "tuple_length": report.tuple_length,
                }),
                None,
                ok,
            ))
        }
        "theta_bar" => {
            let system = scenario.build_system()?;
            let report = theta::theta_bar(&system, &opts)?;
            Ok((serde_json::to_value(&report).expect("serializes"), None, ok))
        }
        "psr_equivalence" => {
            let system = scenario.build_system()?;
            let report = theta::psr_equivalence_report(&system, &opts)?;
            Ok((serde_json::to_value(&report).expect("serializes"), None, ok))
        }
        "psr_stability_check" | "apss_stability_check" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                perturbed: Vec<Vec<Vec<f64>>>,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let perturbed_subs: Vec<Subspace> = p
                .perturbed
                .iter()
                .map(|vs| {
                    let vecs: Vec<DVector<f64>> =
                        vs.iter().map(|v| vector(ambient, v)).collect::<Result<_>>()?;
                    Subspace::orthonormalize(&vecs, ambient, &tol)
                })
                .collect::<Result<_>>()?;
            let perturbed = SubspaceSystem::new(perturbed_subs, scenario.cyclic)?;
            let report = if scenario.task.name == "psr_stability_check" {
                theta::psr_stability_check(&system, &perturbed, &opts)?
            } else {
                theta::apss_stability_check(&system, &perturbed, &opts)?
            };
            let status = if report.within_budget {
                RunStatus::Ok
            } else {
                RunStatus::OutsideBudget
            };
            let csv = report.csv_row(&scenario.task.name);
            Ok((
                serde_json::to_value(&report).expect("serializes"),
                Some(csv),
                status,
            ))
        }
        "c_constant" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                n: usize,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let report = cconvexity::c_constant(ambient, p.n, &opts)?;
            Ok((serde_json::to_value(&report).expect("serializes"), None, ok))
        }
        "c_constant_complex" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                n: usize,
                phase_steps: usize,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let report = cconvexity::c_constant_complex(ambient, p.n, p.phase_steps, &opts)?;
            Ok((serde_json::to_value(&report).expect("serializes"), None, ok))
        }
        "removal_experiment" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct P {
                families: Vec<Vec<usize>>,
                multiplicity: usize,
                #[serde(default)]
                horizon: Option<usize>,
            }
            let p: P = parse_params(&scenario.task.params)?;
            let system = scenario.build_system()?;
            let report = cconvexity::removal_experiment(
                &system,
                &p.families,
                p.multiplicity,
                p.horizon,
                &opts,
            )?;
            let status = if report.lemma_holds {
                RunStatus::Ok
            } else {
                RunStatus::OutsideBudget
            };
            Ok((
                serde_json::to_value(&report).expect("serializes"),
                None,
                status,
            ))
        }
        other => Err(Error::InvalidInput(format!("unknown task \"{other}\""))),
    }
}

/// The published scenario schema, printed by `subrep schema`.
pub fn scenario_schema() -> Value {
    json!({
        "$schema": "http://json-schema.org/draft-07/schema#",
        "title": "subrep scenario",
        "type": "object",
        "required": ["space", "subspaces", "task"],
        "additionalProperties": false,
        "properties": {
            "space": {
                "type": "object",
                "required": ["dim", "field", "p"],
                "additionalProperties": false,
                "properties": {
                    "dim": { "type": "integer", "minimum": 1 },
                    "field": { "enum": ["real", "complex"] },
                    "p": { "enum": [1, 2, "inf"],
                           "description": "complex requires p = 2" }
                }
            },
            "subspaces": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "array",
                    "items": { "type": "array", "items": { "type": "number" } }
                },
                "description": "raw spanning vectors per subspace; complex spaces use realified coordinates [re..., im...] of length 2·dim"
            },
            "cyclic": { "type": "boolean", "default": false },
            "task": {
                "type": "object",
                "required": ["name"],
                "additionalProperties": false,
                "properties": {
                    "name": { "type": "string" },
                    "params": { "type": "object" }
                }
            },
            "seed": { "type": "integer", "minimum": 0, "default": 0 },
            "tolerances": {
                "type": "object",
                "additionalProperties": false,
                "properties": {
                    "rank": { "type": "number" },
                    "solver": { "type": "number" }
                }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes_scenario(task: Value) -> Vec<u8> {
        serde_json::to_vec(&json!({
            "space": { "dim": 2, "field": "real", "p": 2 },
            "subspaces": [[[1.0, 0.0]], [[0.0, 1.0]]],
            "cyclic": false,
            "task": task,
            "seed": 42
        }))
        .unwrap()
    }

    #[test]
    fn greedy_scenario_runs() {
        let bytes = axes_scenario(json!({
            "name": "greedy_decompose",
            "params": { "x": [0.6, 0.8], "max_terms": 10, "stop_tol": 1e-12 }
        }));
        let (status, report) = run_scenario_bytes(&bytes);
        assert_eq!(status, RunStatus::Ok);
        let residuals = report.result["decomposition"]["residuals"]
            .as_array()
            .unwrap()
            .clone();
        assert_eq!(residuals.len(), 2);
        assert!((residuals[0].as_f64().unwrap() - 0.6).abs() < 1e-12);
        assert!(residuals[1].as_f64().unwrap() < 1e-12);
        assert_eq!(report.schema_version, "1");
        assert_eq!(report.scenario_hash.len(), 64);
    }

    #[test]
    fn malformed_json_is_validation_error() {
        let (status, report) = run_scenario_bytes(b"{ not json");
        assert_eq!(status, RunStatus::ValidationError);
        assert_eq!(status.exit_code(), 2);
        assert!(report.result["error"].as_str().unwrap().contains("parse"));
    }

    #[test]
    fn unknown_task_rejected() {
        let bytes = axes_scenario(json!({ "name": "no_such_task" }));
        let (status, _) = run_scenario_bytes(&bytes);
        assert_eq!(status, RunStatus::ValidationError);
    }

    #[test]
    fn stagnation_is_numeric_error() {
        let bytes = serde_json::to_vec(&json!({
            "space": { "dim": 2, "field": "real", "p": 2 },
            "subspaces": [[[1.0, 0.0]]],
            "task": {
                "name": "greedy_decompose",
                "params": { "x": [0.0, 1.0], "max_terms": 10, "stop_tol": 1e-12 }
            }
        }))
        .unwrap();
        let (status, _) = run_scenario_bytes(&bytes);
        assert_eq!(status, RunStatus::NumericError);
        assert_eq!(status.exit_code(), 3);
    }

    #[test]
    fn outside_budget_is_exit_4() {
        let big = 60.0_f64.to_radians();
        let bytes = serde_json::to_vec(&json!({
            "space": { "dim": 2, "field": "real", "p": 2 },
            "subspaces": [[[1.0, 0.0]], [[0.0, 1.0]]],
            "task": {
                "name": "apss_stability_check",
                "params": { "perturbed": [
                    [[big.cos(), big.sin()]],
                    [[-big.sin(), big.cos()]]
                ]}
            },
            "seed": 1
        }))
        .unwrap();
        let (status, report) = run_scenario_bytes(&bytes);
        assert_eq!(status, RunStatus::OutsideBudget);
        assert_eq!(status.exit_code(), 4);
        assert!(report.csv.is_some());
    }

    #[test]
    fn identical_bytes_identical_reports() {
        let bytes = axes_scenario(json!({ "name": "apss_margin" }));
        let (_, a) = run_scenario_bytes(&bytes);
        let (_, b) = run_scenario_bytes(&bytes);
        assert_eq!(a.to_json_pretty(), b.to_json_pretty());
    }

    #[test]
    fn schema_is_valid_json_object() {
        let schema = scenario_schema();
        assert!(schema.is_object());
        assert_eq!(schema["properties"]["space"]["properties"]["dim"]["minimum"], 1);
    }

    #[test]
    fn complex_scenario_builds() {
        let bytes = serde_json::to_vec(&json!({
            "space": { "dim": 2, "field": "complex", "p": 2 },
            // complex line spanned by (1, 0), realified [re1, re2, im1, im2]
            "subspaces": [[[1.0, 0.0, 0.0, 0.0]], [[0.0, 1.0, 0.0, 0.0]]],
            "task": { "name": "apss_margin" },
            "seed": 3
        }))
        .unwrap();
        let (status, report) = run_scenario_bytes(&bytes);
        assert_eq!(status, RunStatus::Ok, "{:?}", report.result);
        let v = report.result["value"].as_f64().unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
    }

    #[test]
    fn complex_with_p1_rejected() {
        let bytes = serde_json::to_vec(&json!({
            "space": { "dim": 2, "field": "complex", "p": 1 },
            "subspaces": [[[1.0, 0.0, 0.0, 0.0]]],
            "task": { "name": "apss_margin" }
        }))
        .unwrap();
        let (status, _) = run_scenario_bytes(&bytes);
        assert_eq!(status, RunStatus::ValidationError);
    }
}
