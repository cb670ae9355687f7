//! Cross-module invariants at desk scale, each checked against an
//! independent route (dense sampling, closed forms, or recomputation).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use subrep::criteria::{apss_margin, lambda_s, psr_margin, EstimatorOpts};
use subrep::decompose::{alternating_decompose, greedy_decompose, halperin_system};
use subrep::functional::Functional;
use subrep::solver::sphere::{dense_oracle, Goal, SearchConfig};
use subrep::space::{norm_p, AmbientSpace, NormP, Tol};
use subrep::subspace::{direct_sum_constant, gap_rho0, orthonormal_range, Subspace};
use subrep::system::SubspaceSystem;
use subrep::theta::theta_x_eps;

fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_vector(rng: &mut ChaCha12Rng, dim: usize) -> DVector<f64> {
    DVector::from_iterator(dim, (0..dim).map(|_| gaussian(rng)))
}

fn random_subspace(rng: &mut ChaCha12Rng, ambient: AmbientSpace, subdim: usize) -> Subspace {
    let tol = Tol::default();
    loop {
        let vecs: Vec<DVector<f64>> = (0..subdim)
            .map(|_| random_vector(rng, ambient.coord_dim()))
            .collect();
        let s = Subspace::orthonormalize(&vecs, ambient, &tol).unwrap();
        if s.subdim() == subdim {
            return s;
        }
    }
}

#[test]
fn direct_sum_constant_validates_on_random_pairs() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let tol = Tol::default();
    for p in [NormP::One, NormP::Two, NormP::Inf] {
        let ambient = AmbientSpace::real(3, p);
        for _ in 0..4 {
            let y = random_subspace(&mut rng, ambient, 1);
            let z = random_subspace(&mut rng, ambient, 1 + rng.random_range(0..2));
            let c = match direct_sum_constant(&y, &z, &tol, 5) {
                Ok(c) => c,
                Err(_) => continue, // overlapping draw
            };
            assert!(c > 0.0 && c <= 1.0 + 1e-12);
            for _ in 0..850 {
                let yv = y.basis() * random_vector(&mut rng, y.subdim());
                let zv = z.basis() * random_vector(&mut rng, z.subdim());
                let lhs = norm_p(&(&yv + &zv), p);
                let rhs = (c - 1e-6) * (norm_p(&yv, p) + norm_p(&zv, p));
                assert!(
                    lhs >= rhs - 1e-9,
                    "p = {p:?}: ‖y+z‖ = {lhs} < (c−1e-6)(‖y‖+‖z‖) = {rhs} with c = {c}"
                );
            }
        }
    }
}

#[test]
fn margin_positivity_iff_spanning() {
    let mut rng = ChaCha12Rng::seed_from_u64(23);
    let tol = Tol::default();
    for i in 0..10 {
        let dim = 2 + (i % 3);
        let ambient = AmbientSpace::euclidean(dim);
        let spanning_wanted = i % 2 == 0;
        let system = loop {
            let subs: Vec<Subspace> = if spanning_wanted {
                (0..dim)
                    .map(|_| random_subspace(&mut rng, ambient, 1 + rng.random_range(0..dim - 1)))
                    .collect()
            } else {
                // every subspace inside a fixed proper subspace
                let carrier = random_subspace(&mut rng, ambient, dim - 1);
                (0..2 + (i % 2))
                    .map(|_| {
                        let coeff = random_vector(&mut rng, carrier.subdim());
                        let v = carrier.basis() * coeff;
                        Subspace::line(&v, ambient, &tol).unwrap()
                    })
                    .collect()
            };
            let s = SubspaceSystem::new(subs, false).unwrap();
            if s.spanning(&tol) == spanning_wanted {
                break s;
            }
        };
        let opts = EstimatorOpts::with_seed(1000 + i as u64);
        let psr = psr_margin(&system, &opts).unwrap().value;
        let apss = apss_margin(&system, &opts).unwrap().value;
        if spanning_wanted {
            assert!(psr > 1e-6, "system {i}: psr margin {psr}");
            assert!(apss > 1e-6, "system {i}: apss margin {apss}");
        } else {
            assert!(psr < 1e-6, "system {i}: psr margin {psr}");
            assert!(apss < 1e-6, "system {i}: apss margin {apss}");
        }
    }
}

#[test]
fn estimator_matches_dense_oracle_low_dim() {
    let mut rng = ChaCha12Rng::seed_from_u64(37);
    for dim in [2usize, 3] {
        let ambient = AmbientSpace::euclidean(dim);
        let subs: Vec<Subspace> = (0..dim)
            .map(|_| random_subspace(&mut rng, ambient, 1))
            .collect();
        let system = SubspaceSystem::new(subs, false).unwrap();
        // Full estimator with the dense grid disabled (pure multistart)…
        let multistart_opts = EstimatorOpts {
            search: SearchConfig {
                seed: 7,
                dense_max_dim: 0,
                ..SearchConfig::default()
            },
            ..EstimatorOpts::default()
        };
        let ms = apss_margin(&system, &multistart_opts).unwrap().value;
        // …against the pure dense oracle at the pinned 0.01 step.
        let subs = system.subspaces().to_vec();
        let normalize = |raw: &DVector<f64>| {
            let n = raw.norm();
            (n >= 1e-12).then(|| raw / n)
        };
        let eval = move |phi: &DVector<f64>| {
            subs.iter()
                .map(|s| (s.basis().transpose() * phi).norm())
                .fold(0.0_f64, f64::max)
        };
        let oracle = dense_oracle(Goal::Minimize, dim, &normalize, &eval, 0.01);
        assert!(
            (ms - oracle).abs() < 1e-3,
            "dim {dim}: multistart {ms} vs dense oracle {oracle}"
        );
    }
}

#[test]
fn restriction_norm_monotone_under_inclusion() {
    let mut rng = ChaCha12Rng::seed_from_u64(41);
    for p in [NormP::One, NormP::Two, NormP::Inf] {
        let ambient = AmbientSpace::real(3, p);
        let tol = Tol::default();
        for _ in 0..20 {
            let small = random_subspace(&mut rng, ambient, 1);
            let extra = random_vector(&mut rng, 3);
            let big = Subspace::orthonormalize(
                &[small.basis().column(0).into_owned(), extra],
                ambient,
                &tol,
            )
            .unwrap();
            let phi = Functional::new(random_vector(&mut rng, 3), ambient).unwrap();
            let rs = phi.restriction_norm(&small).unwrap();
            let rb = phi.restriction_norm(&big).unwrap();
            assert!(rs <= rb + 1e-9, "p = {p:?}: {rs} > {rb}");
        }
    }
}

#[test]
fn greedy_fast_bound_and_grouping() {
    let mut rng = ChaCha12Rng::seed_from_u64(53);
    let tol = Tol::default();
    let mut done = 0;
    while done < 8 {
        let dim = 2 + (done % 2);
        let ambient = AmbientSpace::euclidean(dim);
        let subs: Vec<Subspace> = (0..dim + 1)
            .map(|_| random_subspace(&mut rng, ambient, 1 + rng.random_range(0..dim - 1)))
            .collect();
        let system = SubspaceSystem::new(subs, false).unwrap();
        if !system.spanning(&tol) {
            continue;
        }
        let opts = EstimatorOpts::with_seed(done as u64);
        let lambda = lambda_s(&system, &opts).unwrap().value;
        if lambda >= 0.9 {
            continue;
        }
        done += 1;
        let x = {
            let v = random_vector(&mut rng, dim);
            &v / v.norm()
        };
        let stop_tol = 1e-8;
        let dec = greedy_decompose(&system, &x, 300, stop_tol).unwrap();
        let lam = lambda + 1e-6;
        // fast decay of the individual terms
        for (k, (_, comp)) in dec.terms.iter().enumerate() {
            let bound = lam.powi(k as i32) * (1.0 + lam) * x.norm();
            assert!(
                comp.norm() <= bound + 1e-12,
                "term {k}: ‖x_k‖ = {} > {bound}",
                comp.norm()
            );
        }
        // grouping by subspace index reproduces x within stop_tol and stays
        // inside the subspaces
        let mut grouped: Vec<DVector<f64>> = vec![DVector::zeros(dim); system.len()];
        for (idx, comp) in &dec.terms {
            grouped[idx - 1] += comp;
        }
        let mut total = DVector::zeros(dim);
        for (k, z) in grouped.iter().enumerate() {
            assert!(system.subspaces()[k].distance2(z) < 1e-9);
            total += z;
        }
        assert!((x - total).norm() <= stop_tol * x.norm() + 1e-12);
    }
}

#[test]
fn halperin_two_line_rate() {
    let ambient = AmbientSpace::euclidean(2);
    let tol = Tol::default();
    for deg in [20.0_f64, 50.0, 70.0] {
        let r = deg.to_radians();
        let family = vec![
            Subspace::line(&DVector::from_vec(vec![1.0, 0.0]), ambient, &tol).unwrap(),
            Subspace::line(&DVector::from_vec(vec![r.cos(), r.sin()]), ambient, &tol).unwrap(),
        ];
        let system = halperin_system(&family, &[1, 2]).unwrap();
        // E_n here is the product of projections onto the H lines, which
        // contracts by cos θ per step.
        let x = DVector::from_vec(vec![0.7, 0.4]);
        let dec = alternating_decompose(&system, &x, 12).unwrap();
        for n in 5..dec.residual_trace.len() {
            let prev = dec.residual_trace[n - 1];
            if prev < 1e-12 {
                break;
            }
            let ratio = dec.residual_trace[n] / prev;
            assert!(
                (ratio - r.cos()).abs() < 1e-6,
                "θ = {deg}°: ratio {ratio} vs cos θ {}",
                r.cos()
            );
        }
    }
}

#[test]
fn theta_monotone_in_eps_and_length() {
    let mut rng = ChaCha12Rng::seed_from_u64(67);
    let tol = Tol::default();
    let ambient = AmbientSpace::euclidean(2);
    for trial in 0..3 {
        let subs: Vec<Subspace> = (0..3)
            .map(|_| random_subspace(&mut rng, ambient, 1))
            .collect();
        let system = SubspaceSystem::new(subs, false).unwrap();
        if !system.spanning(&tol) {
            continue;
        }
        let x = random_vector(&mut rng, 2);
        let opts = EstimatorOpts::with_seed(trial as u64);
        // non-increasing in ε
        let mut prev = f64::INFINITY;
        for eps in [0.0, 0.05, 0.1, 0.2, 0.4] {
            let v = theta_x_eps(&system, &x, eps * x.norm(), 3, &opts).unwrap();
            assert!(
                v <= prev + 1e-5 * x.norm().max(1.0),
                "trial {trial}: Θ increased from {prev} to {v} as ε grew"
            );
            prev = v;
        }
        // non-increasing in the tuple length
        let mut prev = f64::INFINITY;
        for n in 1..=3 {
            let v = theta_x_eps(&system, &x, 0.1 * x.norm(), n, &opts).unwrap();
            assert!(
                v <= prev + 1e-5 * x.norm().max(1.0),
                "trial {trial}: Θ increased from {prev} to {v} at length {n}"
            );
            prev = v;
        }
    }
}

#[test]
fn gap_asymmetry_and_rotation_values() {
    // gap of a line rotated by α is sin α, in both directions for lines.
    let ambient = AmbientSpace::euclidean(2);
    let tol = Tol::default();
    for deg in [5.0_f64, 10.0, 40.0] {
        let r = deg.to_radians();
        let a = Subspace::line(&DVector::from_vec(vec![1.0, 0.0]), ambient, &tol).unwrap();
        let b = Subspace::line(&DVector::from_vec(vec![r.cos(), r.sin()]), ambient, &tol).unwrap();
        let g = gap_rho0(&a, &b, &tol).unwrap();
        assert!((g - r.sin()).abs() < 1e-10);
    }
    // a line inside a plane has gap 0 one way and 1 the other
    let amb3 = AmbientSpace::euclidean(3);
    let plane = Subspace::orthonormalize(
        &[
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 0.0]),
        ],
        amb3,
        &tol,
    )
    .unwrap();
    let line = Subspace::line(&DVector::from_vec(vec![1.0, 0.0, 0.0]), amb3, &tol).unwrap();
    assert!(gap_rho0(&line, &plane, &tol).unwrap() < 1e-12);
    assert!((gap_rho0(&plane, &line, &tol).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn complex_projection_agrees_with_hermitian_route() {
    // Independent route: assemble the complex projector from a complex Gram
    // computation done by hand on 2×2 complex matrices.
    let ambient = AmbientSpace::new(2, Field::Complex, NormP::Two).unwrap();
    use subrep::space::Field;
    let tol = Tol::default();
    // complex line spanned by (1, i): realified [1, 0, 0, 1]
    let v = DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]);
    let s = Subspace::line(&v, ambient, &tol).unwrap();
    assert_eq!(s.subdim(), 2);
    // Hermitian projection of (1, 0): P x = ⟨x, u⟩ u with u = v/√2.
    // ⟨(1,0), (1,i)/√2⟩ = 1/√2 → P x = (1/2)(1, i) → realified (0.5, 0, 0, 0.5)
    let x = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let px = s.project(&x).unwrap();
    let expected = DVector::from_vec(vec![0.5, 0.0, 0.0, 0.5]);
    assert!((px - expected).norm() < 1e-12);
}

#[test]
fn orthonormal_range_is_projection_invariant() {
    let mut rng = ChaCha12Rng::seed_from_u64(71);
    for _ in 0..20 {
        let m = DMatrix::from_fn(4, 3, |_, _| gaussian(&mut rng));
        let q = orthonormal_range(&m, 1e-10);
        let gram = q.transpose() * &q;
        assert!((gram - DMatrix::identity(q.ncols(), q.ncols())).abs().max() < 1e-10);
        // every original column reachable
        for c in m.column_iter() {
            let c = c.into_owned();
            let resid = &c - &q * (q.transpose() * &c);
            assert!(resid.norm() < 1e-8 * c.norm().max(1.0));
        }
    }
}
