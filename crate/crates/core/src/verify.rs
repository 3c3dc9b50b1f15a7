//! Seeded identity suites across all modules, collected into a versioned
//! report. Random inputs are drawn sequentially from one ChaCha8 stream and
//! evaluated in parallel; errors are combined with `max`, so reports are
//! bit-stable for a fixed seed.

use std::time::Instant;

use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deformations::{
    cross_lambda, cross_lambda_from_form, f_locus_defect, phi_lambda, phi_lambda_contracted,
    LambdaParam, SplitFrame,
};
use crate::dirac::{
    dirac_apply, dirac_dense_spectrum, dirac_matrix, fourier_spectrum, Connection1Form,
    LatticeSpinorField,
};
use crate::forms::{
    chi_form, chi_via_cross, hodge_star, metric_from_phi, phi0, psi8, subsets, AlternatingForm,
    Metric, VectorValued3Form,
};
use crate::grassmann::{
    associative_test, cayley_test, chi_flow_step, normal_complex_structure, sample_grassmann,
    Frame, Immersion3Lattice,
};
use crate::lie::{
    beta_space_dim, clifford_kernel_dim, clifford_mult, compute_g2_basis, g2_block_form,
    so4_generator,
};
use crate::octonion::{associator, cross7, triple_cross8, Octonion, Quaternion, Vector7, Vector8};
use crate::spectral::symmetry_defect;
use crate::sw::sigma_vec;

pub const REPORT_SCHEMA: u32 = 1;

/// One named check: passes iff `max_error ≤ threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub reference: String,
    pub max_error: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, reference: &str, max_error: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            reference: reference.into(),
            max_error,
            threshold,
            // NaN errors fail.
            pass: max_error <= threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub suite: String,
    pub version: String,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Omitted unless requested, to keep reports byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_s: Option<f64>,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Every identity suite, with `φ` as the 3-form under test (normally φ₀).
pub fn run_all(
    phi: &AlternatingForm,
    seed: u64,
    samples: usize,
    timing: bool,
) -> VerificationReport {
    let start = Instant::now();
    let samples = samples.max(1);
    let mut checks = Vec::new();
    checks.extend(octonion_suite(seed, samples));
    checks.extend(forms_suite(phi, seed.wrapping_add(1), samples));
    checks.extend(grassmann_suite(seed.wrapping_add(2), samples));
    checks.extend(lie_suite(seed.wrapping_add(3), samples));
    checks.extend(deformation_suite(seed.wrapping_add(4), samples));
    checks.extend(dirac_suite(seed.wrapping_add(5), samples));
    checks.extend(spin7_suite(seed.wrapping_add(6), samples));
    let pass = checks.iter().all(|c| c.pass);
    VerificationReport {
        schema: REPORT_SCHEMA,
        suite: "all".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        samples,
        checks,
        pass,
        wall_time_s: timing.then(|| start.elapsed().as_secs_f64()),
    }
}

pub fn gaussian7(rng: &mut ChaCha8Rng) -> Vector7 {
    Vector7::from_fn(|_, _| StandardNormal.sample(rng))
}

pub fn gaussian8(rng: &mut ChaCha8Rng) -> Vector8 {
    Vector8::from_fn(|_, _| StandardNormal.sample(rng))
}

fn triples(rng: &mut ChaCha8Rng, count: usize) -> Vec<[Vector7; 3]> {
    (0..count)
        .map(|_| [gaussian7(rng), gaussian7(rng), gaussian7(rng)])
        .collect()
}

/// Largest error over `items`; NaN is sticky so broken inputs fail.
fn par_max<T: Sync>(items: &[T], f: impl Fn(&T) -> f64 + Sync + Send) -> f64 {
    items.par_iter().map(f).reduce(
        || 0.0,
        |a, b| {
            if a.is_nan() || b.is_nan() {
                f64::NAN
            } else {
                a.max(b)
            }
        },
    )
}

/// `|u ∧ v ∧ w|²` as the Gram determinant.
pub fn wedge_norm_sq(u: &Vector7, v: &Vector7, w: &Vector7) -> f64 {
    let t = [u, v, w];
    nalgebra::Matrix3::from_fn(|r, c| t[r].dot(t[c])).determinant()
}

pub fn octonion_suite(seed: u64, samples: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<[Vector7; 2]> = (0..samples)
        .map(|_| [gaussian7(&mut rng), gaussian7(&mut rng)])
        .collect();
    let norm_err = par_max(&pairs, |[u, v]| {
        let lhs = cross7(u, v).norm_squared();
        let rhs = u.norm_squared() * v.norm_squared() - u.dot(v).powi(2);
        (lhs - rhs).abs() / (u.norm_squared() * v.norm_squared())
    });
    let orth_err = par_max(&pairs, |[u, v]| {
        let c = cross7(u, v);
        (c.dot(u).abs() + c.dot(v).abs()) / (u.norm_squared() * v.norm())
    });
    let octs: Vec<[Octonion; 2]> = (0..samples)
        .map(|_| {
            [
                Octonion::from_r8(&gaussian8(&mut rng)),
                Octonion::from_r8(&gaussian8(&mut rng)),
            ]
        })
        .collect();
    let comp_err = par_max(&octs, |[x, y]| {
        ((*x * *y).norm() - x.norm() * y.norm()).abs() / (x.norm() * y.norm())
    });
    vec![
        Check::new("cross_norm", "|u×v|² = |u|²|v|² − ⟨u,v⟩²", norm_err, 1e-12),
        Check::new("cross_orthogonal", "u×v ⊥ u, v", orth_err, 1e-12),
        Check::new("octonion_composition", "|xy| = |x||y|", comp_err, 1e-12),
    ]
}

/// Largest `|φ(u,v,w)² + |χ(u,v,w)|² − |u∧v∧w|²|`, relative, with χ
/// extracted from `phi` through its Hodge dual.
pub fn associator_equality_error(phi: &AlternatingForm, samples: &[[Vector7; 3]]) -> f64 {
    let Ok(chi) = chi_form(phi, &Metric::identity(7)) else {
        return f64::INFINITY;
    };
    par_max(samples, |[u, v, w]| {
        let p = phi.evaluate(&[u.as_slice(), v.as_slice(), w.as_slice()]);
        let c = chi.evaluate(u, v, w).norm_squared();
        let scale = u.norm_squared() * v.norm_squared() * w.norm_squared();
        (p * p + c - wedge_norm_sq(u, v, w)).abs() / scale
    })
}

/// The octonionic form: `φ² + |[u,v,w]|²/4 = |u∧v∧w|²` with the associator
/// `[u,v,w] = (uv)w − u(vw)` of imaginary octonions.
pub fn octonion_associator_error(samples: &[[Vector7; 3]]) -> f64 {
    par_max(samples, |[u, v, w]| {
        let (a, b, c) = (
            Octonion::from_imag(u),
            Octonion::from_imag(v),
            Octonion::from_imag(w),
        );
        let p = cross7(u, v).dot(w);
        let scale = u.norm_squared() * v.norm_squared() * w.norm_squared();
        (p * p + associator(a, b, c).norm_sqr() / 4.0 - wedge_norm_sq(u, v, w)).abs() / scale
    })
}

pub fn chi_consistency_error(samples: &[[Vector7; 3]]) -> (f64, f64) {
    let from_star = chi_form(&phi0(), &Metric::identity(7)).expect("φ₀ is positive");
    let table = VectorValued3Form::from_expansion_table();
    let exact = from_star
        .coeffs()
        .iter()
        .zip(table.coeffs())
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let sampled = par_max(samples, |[u, v, w]| {
        let a = from_star.evaluate(u, v, w);
        let b = chi_via_cross(u, v, w);
        let c = table.evaluate(u, v, w);
        let scale = u.norm() * v.norm() * w.norm();
        (a - b).amax().max((a - c).amax()) / scale
    });
    (exact, sampled)
}

pub fn forms_suite(phi: &AlternatingForm, seed: u64, samples: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = triples(&mut rng, samples);
    let (exact, sampled) = chi_consistency_error(&t);
    let metric_err = match metric_from_phi(phi) {
        Ok(g) => (g.matrix() - DMatrix::identity(7, 7)).amax(),
        Err(_) => f64::INFINITY,
    };
    // Hodge involution on random forms for a random metric.
    let forms: Vec<(AlternatingForm, DMatrix<f64>)> = (0..samples.min(200))
        .map(|_| {
            let k = rng.random_range(0..=7);
            let mut f = AlternatingForm::zero(k, 7);
            for c in f.coeffs_mut() {
                *c = StandardNormal.sample(&mut rng);
            }
            let a = DMatrix::from_fn(
                7,
                7,
                |r, c| if r == c { 2.0 } else { 0.0 } + rng.random_range(-0.3..0.3),
            );
            (f, a)
        })
        .collect();
    let hodge_err = par_max(&forms, |(f, a)| {
        let g = Metric::new(a.transpose() * a).expect("diagonally dominant");
        let twice = hodge_star(&hodge_star(f, &g).expect("valid"), &g).expect("valid");
        twice.max_abs_diff(f) / f.coeffs().iter().fold(1e-300f64, |m, c| m.max(c.abs()))
    });
    vec![
        Check::new(
            "chi_table_exact",
            "χ via *φ equals the expansion table coefficientwise",
            exact,
            0.0,
        ),
        Check::new(
            "chi_triple_consistency",
            "χ via *φ, via cross products, via table",
            sampled,
            1e-12,
        ),
        Check::new(
            "associator_equality",
            "φ² + |χ|² = |u∧v∧w|² for the form under test",
            associator_equality_error(phi, &t),
            1e-10,
        ),
        Check::new(
            "associator_octonion",
            "φ² + |[u,v,w]|²/4 = |u∧v∧w|²",
            octonion_associator_error(&t),
            1e-10,
        ),
        Check::new("metric_from_phi", "g_φ = identity", metric_err, 1e-12),
        Check::new(
            "hodge_involution",
            "** = (−1)^{k(7−k)} = 1",
            hodge_err,
            1e-10,
        ),
    ]
}

/// A random associative plane `⟨u, v, u×v⟩` with its orthonormal pair.
pub fn random_associative(rng: &mut ChaCha8Rng) -> (Frame, Vector7, Vector7) {
    let m = DMatrix::from_fn(7, 2, |_, _| StandardNormal.sample(rng));
    let f = Frame::orthonormalize(&m);
    let (u, v) = (f.vector7(0), f.vector7(1));
    let w = cross7(&u, &v);
    let plane = Frame::new(DMatrix::from_fn(7, 3, |r, c| [u, v, w][c][r]))
        .expect("orthonormal by construction");
    (plane, u, v)
}

/// `(max |j² + I|, max |jᵀj − I|, max rotation change)` over random planes.
pub fn complex_structure_errors(seed: u64, count: usize) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(Frame, Vector7, Vector7, f64)> = (0..count)
        .map(|_| {
            let (p, u, v) = random_associative(&mut rng);
            (p, u, v, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let errs: Vec<(f64, f64, f64)> = cases
        .par_iter()
        .map(|(plane, u, v, t)| {
            let j = normal_complex_structure(plane, u, v).expect("associative by construction");
            let (sq, orth) = j.defects();
            let (c, s) = (t.cos(), t.sin());
            let (u2, v2) = (u * c + v * s, v * c - u * s);
            let j2 = normal_complex_structure(plane, &u2, &v2).expect("same plane");
            (sq, orth, (j.matrix - j2.matrix).amax())
        })
        .collect();
    errs.iter().fold((0.0, 0.0, 0.0), |m, e| {
        (m.0.max(e.0), m.1.max(e.1), m.2.max(e.2))
    })
}

pub fn grassmann_suite(seed: u64, samples: usize) -> Vec<Check> {
    let frames = sample_grassmann(seed, samples);
    let bound = par_max(&frames, |f| {
        let r = associative_test(f, 1e-10).expect("3-frame in R^7");
        (r.phi_value.abs() - 1.0).max(0.0)
            + (r.phi_value.powi(2) + r.defect_norm.powi(2) - 1.0).abs()
    });
    let (sq, orth, rot) = complex_structure_errors(seed.wrapping_add(100), samples.min(10_000));
    let flat = Immersion3Lattice::flat(4);
    let moved = chi_flow_step(&flat, 0.01).map(|y| {
        y.displacement()
            .iter()
            .map(|d| d.amax())
            .fold(0.0, f64::max)
    });
    vec![
        Check::new(
            "calibration_bound",
            "φ(L)² + |χ(L)|² = 1 on unit 3-frames",
            bound,
            1e-12,
        ),
        Check::new("normal_j_squared", "j² = −I on L⊥", sq, 1e-12),
        Check::new("normal_j_orthogonal", "jᵀj = I on L⊥", orth, 1e-12),
        Check::new(
            "normal_j_rotation",
            "j unchanged by rotating (u,v) in its plane",
            rot,
            1e-10,
        ),
        Check::new(
            "flat_torus_fixed",
            "flat associative torus is a χ-flow fixed point",
            moved.unwrap_or(f64::INFINITY),
            1e-14,
        ),
    ]
}

pub fn lie_suite(seed: u64, samples: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    match compute_g2_basis() {
        Ok(g2) => {
            let beta = g2
                .elements
                .iter()
                .map(|e| {
                    g2_block_form(e)
                        .map(|b| b.constraint_residual())
                        .unwrap_or(f64::INFINITY)
                })
                .fold(0.0, f64::max);
            let xi = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let eta = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            checks.push(Check::new(
                "g2_dimension",
                "dim g₂ = 14",
                (g2.len() as f64 - 14.0).abs(),
                0.0,
            ));
            checks.push(Check::new(
                "g2_singular_gap",
                "σ gap ≥ 10⁶ (error is the shortfall max(0, 10⁶/gap − 1))",
                (1e6 / g2.singular_gap - 1.0).max(0.0),
                0.0,
            ));
            checks.push(Check::new(
                "g2_annihilates_phi0",
                "L_A φ₀ = 0",
                g2.annihilation_residual(),
                1e-12,
            ));
            checks.push(Check::new(
                "g2_bracket_closure",
                "[g₂, g₂] ⊂ g₂",
                g2.closure_residual(),
                1e-10,
            ));
            checks.push(Check::new(
                "g2_beta_constraint",
                "iβ₁ + jβ₂ + kβ₃ = 0",
                beta,
                1e-12,
            ));
            checks.push(Check::new(
                "so4_in_g2",
                "SO(4) block generators lie in g₂",
                g2.project_out(&so4_generator(&xi, &eta)).amax(),
                1e-12,
            ));
        }
        Err(_) => checks.push(Check::new(
            "g2_dimension",
            "dim g₂ = 14",
            f64::INFINITY,
            0.0,
        )),
    }
    checks.push(Check::new(
        "beta_space_dim",
        "admissible β space has dimension 8",
        (beta_space_dim() as f64 - 8.0).abs(),
        0.0,
    ));
    checks.push(Check::new(
        "clifford_kernel_dim",
        "dim ker c = 8, rank 4",
        (clifford_kernel_dim() as f64 - 8.0).abs(),
        0.0,
    ));
    let pairs: Vec<(Vector3<f64>, Quaternion)> = (0..samples)
        .map(|_| {
            let w = Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng));
            let v =
                Quaternion::from_array(std::array::from_fn(|_| StandardNormal.sample(&mut rng)));
            (w, v)
        })
        .collect();
    let cliff = par_max(&pairs, |(w, v)| {
        let ww = clifford_mult(w, clifford_mult(w, *v));
        (ww + v.scale(w.norm_squared())).norm() / (w.norm_squared() * v.norm())
    });
    checks.push(Check::new(
        "clifford_relation",
        "w·(w·v) = −|w|²v",
        cliff,
        1e-12,
    ));
    checks
}

pub fn deformation_suite(seed: u64, samples: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<(LambdaParam, Vector7, Vector7)> = (0..samples.min(2000))
        .map(|_| {
            (
                LambdaParam::random(&mut rng),
                gaussian7(&mut rng),
                gaussian7(&mut rng),
            )
        })
        .collect();
    let metric = par_max(&params, |(l, _, _)| match metric_from_phi(&phi_lambda(l)) {
        Ok(g) => (g.matrix() - DMatrix::identity(7, 7)).amax(),
        Err(_) => f64::INFINITY,
    });
    let contracted = par_max(&params, |(l, _, _)| {
        phi_lambda(l).max_abs_diff(&phi_lambda_contracted(l))
    });
    let cross = par_max(&params, |(l, u, v)| {
        (cross_lambda(l, u, v) - cross_lambda_from_form(l, u, v)).amax() / (u.norm() * v.norm())
    });
    let split = SplitFrame::new(unit7(0), unit7(1)).expect("orthonormal");
    let locus = par_max(&params, |(l, _, _)| {
        // Project α onto V and compare |F|² with a²|α|² + |α|⁴.
        let c: [f64; 4] = std::array::from_fn(|i| split.normal.vector7(i).dot(l.alpha()));
        let alpha = split.normal_vector(&c);
        let Ok(lv) = LambdaParam::new(l.a(), alpha) else {
            return 0.0;
        };
        let n2 = lv.alpha().norm_squared();
        (f_locus_defect(&lv, &split).norm_squared() - (lv.a().powi(2) * n2 + n2 * n2)).abs()
    });
    vec![
        Check::new("phi_lambda_metric", "g(φ_λ) = identity", metric, 1e-10),
        Check::new(
            "phi_lambda_contracted",
            "two expressions for φ_λ agree",
            contracted,
            1e-12,
        ),
        Check::new(
            "cross_lambda_dual_path",
            "closed-form (u×v)_λ equals φ_λ(u,v,·)",
            cross,
            1e-10,
        ),
        Check::new(
            "f_locus_norm",
            "|F|² = a²|α|² + |α|⁴ for α ∈ V",
            locus,
            1e-10,
        ),
    ]
}

pub fn dirac_suite(seed: u64, samples: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 4;
    let theta = [
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    ];
    let untwisted = Connection1Form::zero(n).expect("n ≥ 2");
    let twisted = Connection1Form::constant_twist(n, theta).expect("n ≥ 2");
    let asym = dirac_matrix(&untwisted)
        .asymmetry()
        .max(dirac_matrix(&twisted).asymmetry());
    let dense = dirac_dense_spectrum(&twisted);
    let symbol = fourier_spectrum(n, theta);
    let oracle = dense
        .iter()
        .zip(&symbol)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let constants =
        LatticeSpinorField::constant(n, Quaternion::new(1.0, -0.5, 2.0, 0.25)).expect("n ≥ 2");
    let annihilated = dirac_apply(&constants, &untwisted)
        .expect("same grid")
        .max_abs();
    let spins: Vec<Quaternion> = (0..samples)
        .map(|_| Quaternion::from_array(std::array::from_fn(|_| StandardNormal.sample(&mut rng))))
        .collect();
    let sigma = par_max(&spins, |q| {
        let s = sigma_vec(*q);
        ((s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt() - 0.5 * q.norm_sqr()).abs() / q.norm_sqr()
    });
    vec![
        Check::new("dirac_symmetric", "‖D − Dᵀ‖ = 0", asym, 1e-12),
        Check::new(
            "dirac_fourier_oracle",
            "dense spectrum equals Fourier symbol (N = 4)",
            oracle,
            1e-10,
        ),
        Check::new(
            "dirac_spectrum_symmetric",
            "spectrum symmetric about 0",
            symmetry_defect(&dense),
            1e-10,
        ),
        Check::new(
            "dirac_constants",
            "D annihilates constants",
            annihilated,
            0.0,
        ),
        Check::new("sigma_norm", "|σ(x,x)| = |x|²/2", sigma, 1e-12),
    ]
}

/// Max `|⟨(e_a × e_b × e_c), e_d⟩ − Ψ(e_a,e_b,e_c,e_d)|` over the 70 basis quadruples.
pub fn triple_cross_pairing_error() -> f64 {
    let psi = psi8();
    let basis =
        |i: usize| Octonion::from_r8(&Vector8::from_fn(|r, _| if r == i { 1.0 } else { 0.0 }));
    subsets(8, 4)
        .iter()
        .map(|q| {
            let t = triple_cross8(basis(q[0]), basis(q[1]), basis(q[2]));
            (t.dot(basis(q[3])) - psi.coefficient(q)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn spin7_suite(seed: u64, samples: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames: Vec<Frame> = (0..samples.min(100_000))
        .map(|_| {
            Frame::orthonormalize(&DMatrix::from_fn(8, 4, |_, _| {
                StandardNormal.sample(&mut rng)
            }))
        })
        .collect();
    let bound = par_max(&frames, |f| {
        (cayley_test(f).expect("4-frame in R^8").abs() - 1.0).max(0.0)
    });
    let e = (cayley_test(&Frame::coordinate(8, &[0, 1, 2, 7])).expect("4-frame") - 1.0).abs();
    vec![
        Check::new(
            "triple_cross_psi",
            "⟨x×y×z, w⟩ = Ψ(x,y,z,w) on basis quadruples",
            triple_cross_pairing_error(),
            0.0,
        ),
        Check::new("cayley_e1238", "Ψ(e₁,e₂,e₃,e₈) = 1", e, 0.0),
        Check::new("cayley_bound", "|Ψ(ξ)| ≤ 1 on unit 4-frames", bound, 1e-12),
    ]
}

fn unit7(i: usize) -> Vector7 {
    Vector7::from_fn(|r, _| if r == i { 1.0 } else { 0.0 })
}
