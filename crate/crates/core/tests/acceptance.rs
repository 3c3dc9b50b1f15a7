//! Acceptance criteria at full sample sizes. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use g2calib::deformations::{
    cross_lambda, cross_lambda_from_form, f_locus_scan, phi_lambda, LambdaParam, SplitFrame,
};
use g2calib::dirac::{
    dirac_dense_spectrum, dirac_eigensystem, dirac_matrix, fourier_spectrum, kernel_dims,
    Connection1Form, LatticeSpinorField,
};
use g2calib::forms::{metric_from_phi, phi0};
use g2calib::grassmann::{cayley_test, chi_flow_step, FlowMode, Frame, Immersion3Lattice};
use g2calib::lattice::site_count;
use g2calib::lie::{clifford_kernel_dim, clifford_map_matrix, compute_g2_basis, g2_block_form};
use g2calib::octonion::{Quaternion, Vector7};
use g2calib::spectral::symmetry_defect;
use g2calib::sw::{
    residual_vector, sigma_map, sw_finite_difference, sw_index_formula, sw_linearization,
    sw_residual, SWState,
};
use g2calib::verify::{
    associator_equality_error, chi_consistency_error, complex_structure_errors, gaussian7,
    octonion_associator_error, triple_cross_pairing_error,
};
use g2calib::Error;

const SEED: u64 = 20;
const CHUNK: usize = 100_000;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

/// Max of `f` over `total` random triples, generated in fixed-size chunks.
fn over_triples(seed: u64, total: usize, mut f: impl FnMut(&[[Vector7; 3]]) -> f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut left = total;
    while left > 0 {
        let m = left.min(CHUNK);
        let chunk: Vec<[Vector7; 3]> = (0..m)
            .map(|_| {
                [
                    gaussian7(&mut rng),
                    gaussian7(&mut rng),
                    gaussian7(&mut rng),
                ]
            })
            .collect();
        worst = worst.max(f(&chunk));
        left -= m;
    }
    worst
}

fn chi_triple_consistency() -> Outcome {
    let t = Instant::now();
    let mut exact = 0.0f64;
    let sampled = over_triples(SEED, 1_000_000, |c| {
        let (e, s) = chi_consistency_error(c);
        exact = exact.max(e);
        s
    });
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        pass: exact == 0.0 && sampled < 1e-12 && secs < 10.0,
        detail: format!("table mismatch {exact:e}, 10⁶ triples max {sampled:.2e}, {secs:.1}s"),
    }
}

fn associator_equality() -> Outcome {
    let phi = phi0();
    let chi = over_triples(SEED + 1, 1_000_000, |c| associator_equality_error(&phi, c));
    let assoc = over_triples(SEED + 1, 1_000_000, octonion_associator_error);
    Outcome {
        pass: chi < 1e-10 && assoc < 1e-10,
        detail: format!("φ²+|[u,v,w]|²/4 max {assoc:.2e}; φ²+|χ|² max {chi:.2e}"),
    }
}

fn normal_complex_structure() -> Outcome {
    let (sq, orth, rot) = complex_structure_errors(SEED + 2, 10_000);
    Outcome {
        pass: sq < 1e-12 && orth < 1e-12 && rot < 1e-10,
        detail: format!("10⁴ planes: |j²+I| {sq:.2e}, |jᵀj−I| {orth:.2e}, rotation {rot:.2e}"),
    }
}

fn g2_and_clifford() -> Outcome {
    let g2 = match compute_g2_basis() {
        Ok(g) => g,
        Err(e) => {
            return Outcome {
                pass: false,
                detail: format!("{e}"),
            }
        }
    };
    let beta = g2
        .elements
        .iter()
        .map(|e| {
            g2_block_form(e)
                .map(|b| b.constraint_residual())
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max);
    let svd = clifford_map_matrix().svd(false, false);
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-10).count();
    let ker = clifford_kernel_dim();
    Outcome {
        pass: g2.len() == 14 && g2.singular_gap >= 1e6 && beta < 1e-12 && ker == 8 && rank == 4,
        detail: format!(
            "dim {}, gap {:.1e}, max |iβ₁+jβ₂+kβ₃| {beta:.1e}, dim ker c {ker}, rank c {rank}",
            g2.len(),
            g2.singular_gap
        ),
    }
}

/// 10 values of `a` times 100 seeded unit directions for `α`.
fn lambda_grid(seed: u64) -> Vec<(LambdaParam, Vector7, Vector7)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Vector7> = (0..100).map(|_| gaussian7(&mut rng).normalize()).collect();
    let mut grid = Vec::with_capacity(1000);
    for i in 0..10 {
        let t = std::f64::consts::PI * (i as f64 + 0.5) / 10.0;
        for d in &dirs {
            let l = LambdaParam::new(t.cos(), d * t.sin()).expect("unit vector");
            grid.push((l, gaussian7(&mut rng), gaussian7(&mut rng)));
        }
    }
    grid
}

fn deformation_family() -> Outcome {
    let grid = lambda_grid(SEED + 3);
    let (metric, cross) = grid
        .par_iter()
        .map(|(l, u, v)| {
            let m = match metric_from_phi(&phi_lambda(l)) {
                Ok(g) => (g.matrix() - DMatrix::identity(7, 7)).amax(),
                Err(_) => f64::INFINITY,
            };
            let c = (cross_lambda(l, u, v) - cross_lambda_from_form(l, u, v)).amax()
                / (u.norm() * v.norm());
            (m, c)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut locus_err = 0.0f64;
    let mut spurious_zero = false;
    for a in [-0.9, -0.3, 0.25, 0.7, 1.0] {
        let m = Frame::orthonormalize(&DMatrix::from_fn(7, 2, |_, _| rng.random_range(-1.0..1.0)));
        let split = SplitFrame::new(m.vector7(0), m.vector7(1)).expect("orthonormal");
        for p in f_locus_scan(&split, a, 1.0, 5) {
            locus_err = locus_err.max((p.f_norm.powi(2) - p.predicted.powi(2)).abs());
            let on_axis = p.coords.iter().all(|c| *c == 0.0);
            spurious_zero |= (p.f_norm < 1e-12) != on_axis;
        }
    }
    Outcome {
        pass: metric < 1e-10 && cross < 1e-10 && locus_err < 1e-10 && !spurious_zero,
        detail: format!(
            "10³ λ: metric {metric:.2e}, cross {cross:.2e}; V-grid |F|² {locus_err:.2e}, F = 0 ⇔ α = 0: {}",
            !spurious_zero
        ),
    }
}

fn dirac_lattice() -> Outcome {
    let t = Instant::now();
    let untwisted = Connection1Form::zero(8).expect("n ≥ 2");
    let theta = [0.37, -0.52, 0.81];
    let twisted = Connection1Form::constant_twist(8, theta).expect("n ≥ 2");
    let asym = dirac_matrix(&untwisted)
        .asymmetry()
        .max(dirac_matrix(&twisted).asymmetry());
    let (es0, es1) = match (
        dirac_eigensystem(&untwisted, 40, SEED),
        dirac_eigensystem(&twisted, 40, SEED),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return Outcome {
                pass: false,
                detail: format!("{e}"),
            }
        }
    };
    let sym = es0.symmetry_defect().max(es1.symmetry_defect());
    let (full, physical) = kernel_dims(&es0, 8);
    let twisted_kernel = kernel_dims(&es1, 8).0;
    let small = Connection1Form::constant_twist(4, theta).expect("n ≥ 2");
    let oracle = dirac_dense_spectrum(&small)
        .iter()
        .zip(&fourier_spectrum(4, theta))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        .max(symmetry_defect(&dirac_dense_spectrum(
            &Connection1Form::zero(4).expect("n ≥ 2"),
        )));
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        pass: asym < 1e-12 && sym < 1e-10 && physical == 4 && twisted_kernel == 0 && oracle < 1e-10 && secs < 60.0,
        detail: format!(
            "N=8 asymmetry {asym:.1e}, spectral symmetry {sym:.1e}, untwisted kernel {physical} \
             (+{} doubler modes), twisted kernel {twisted_kernel}; N=4 dense oracle {oracle:.1e}; {secs:.1}s",
            full - physical
        ),
    }
}

fn random_sw_state(n: usize, rng: &mut ChaCha8Rng) -> SWState {
    let sites = site_count(n);
    let v = (0..sites)
        .map(|_| Quaternion::from_array(std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
        .collect();
    let mut f3 = || -> Vec<[f64; 3]> {
        (0..sites)
            .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
            .collect()
    };
    let (theta, delta) = (f3(), f3());
    SWState::new(LatticeSpinorField::new(n, v).expect("grid"), theta, delta).expect("grid")
}

fn seiberg_witten() -> Outcome {
    let (s0, s1) = sigma_map(Complex64::new(1.0, 0.0), Complex64::ZERO);
    let sigma_ok = s0 == 0.5 && s1.norm() == 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let (s, d) = (random_sw_state(3, &mut rng), random_sw_state(3, &mut rng));
    let lin =
        residual_vector(&sw_linearization(&s, d.spinor(), d.theta(), d.delta()).expect("grid"));
    let fd = sw_finite_difference(&s, d.spinor(), d.theta(), d.delta(), 1e-5).expect("grid");
    let num: f64 = lin
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let rel = num / fd.iter().map(|b| b * b).sum::<f64>().sqrt();
    let s = random_sw_state(4, &mut rng);
    let f: Vec<f64> = (0..site_count(4))
        .map(|_| rng.random_range(-3.0..3.0))
        .collect();
    let g: Vec<Quaternion> = f
        .iter()
        .map(|&t| Quaternion::new(t.cos(), t.sin(), 0.0, 0.0))
        .collect();
    let r = sw_residual(&s).expect("valid");
    let rg = sw_residual(&s.gauge_transform(&f).expect("grid")).expect("valid");
    let gauge = rg
        .dirac
        .sub(&r.dirac.right_mul(&g))
        .expect("grid")
        .max_abs()
        .max(
            rg.curvature
                .iter()
                .flatten()
                .zip(r.curvature.iter().flatten())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
        );
    let table = sw_index_formula(0, 2, 0) == Ok(-1)
        && sw_index_formula(4, 0, 0) == Ok(1)
        && sw_index_formula(0, 0, 0) == Ok(0)
        && matches!(sw_index_formula(1, 0, 0), Err(Error::NotRealizable(_)));
    Outcome {
        pass: sigma_ok && rel < 1e-6 && gauge < 1e-10 && table,
        detail: format!(
            "σ(1,0) = ({s0}, {}), linearization rel. error {rel:.1e}, gauge {gauge:.1e}, index table {}",
            s1.norm(),
            if table { "ok" } else { "wrong" }
        ),
    }
}

fn spin7() -> Outcome {
    let pairing = triple_cross_pairing_error();
    let e1238 = cayley_test(&Frame::coordinate(8, &[0, 1, 2, 7])).expect("4-frame");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let frames: Vec<Frame> = (0..100_000)
        .map(|_| {
            Frame::orthonormalize(&DMatrix::from_fn(8, 4, |_, _| {
                StandardNormal.sample(&mut rng)
            }))
        })
        .collect();
    let worst = frames
        .par_iter()
        .map(|f| cayley_test(f).expect("4-frame").abs())
        .reduce(|| 0.0, f64::max);
    Outcome {
        pass: pairing == 0.0 && e1238 == 1.0 && worst <= 1.0 + 1e-12,
        detail: format!("Ψ pairing mismatch {pairing:e}, Ψ(e₁,e₂,e₃,e₈) = {e1238}, 10⁵ frames max |Ψ| {worst:.15}"),
    }
}

fn chi_flow() -> Outcome {
    let flat = Immersion3Lattice::flat(8);
    let moved = chi_flow_step(&flat, 1e-3)
        .map(|y| {
            y.displacement()
                .iter()
                .map(|d| d.amax())
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::INFINITY);
    let mut y = Immersion3Lattice::normal_mode(8, 1e-2, FlowMode::Decaying);
    let mut trace = vec![y.max_defect().unwrap_or(f64::NAN)];
    for _ in 0..60 {
        match chi_flow_step(&y, 1e-3) {
            Ok(next) => y = next,
            Err(e) => {
                return Outcome {
                    pass: false,
                    detail: format!("{e}"),
                }
            }
        }
        trace.push(y.max_defect().unwrap_or(f64::NAN));
    }
    let monotone = trace.windows(2).all(|w| w[1] < w[0]);
    Outcome {
        pass: moved < 1e-14 && monotone,
        detail: format!(
            "flat displacement {moved:.1e}; ε = 1e-2, dt = 1e-3, 60 steps: max defect {:.3e} → {:.3e}, monotone {monotone}",
            trace[0],
            trace[trace.len() - 1]
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("χ triple consistency", chi_triple_consistency),
        ("associator equality", associator_equality),
        ("normal complex structure", normal_complex_structure),
        ("g₂ and Clifford map", g2_and_clifford),
        ("λ-deformation family", deformation_family),
        ("flat-torus Dirac", dirac_lattice),
        ("Seiberg–Witten layer", seiberg_witten),
        ("Spin(7) layer", spin7),
        ("χ-flow", chi_flow),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!(
            "criterion {}: {} — {}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
