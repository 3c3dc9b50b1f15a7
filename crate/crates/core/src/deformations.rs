//! The metric-preserving family `φ_λ`, `λ = [a, α] ∈ ℝP⁷`, its cross
//! product, and the defect `F` whose zero set is the locus where `u × v`
//! is unchanged.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{
    chi_via_cross, cross_from_phi, hodge_star, metric_from_phi, phi0, star_phi0, AlternatingForm,
    Metric,
};
use crate::grassmann::Frame;
use crate::octonion::{cross7, Vector7};

/// `[a, α]` normalized to `a² + |α|² = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaParam {
    a: f64,
    alpha: Vector7,
}

impl LambdaParam {
    pub fn new(a: f64, alpha: Vector7) -> Result<Self> {
        let norm = (a * a + alpha.norm_squared()).sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::InvalidParameter(
                "λ = [a, α] must be a nonzero finite vector".into(),
            ));
        }
        Ok(LambdaParam {
            a: a / norm,
            alpha: alpha / norm,
        })
    }

    pub fn identity() -> Self {
        LambdaParam {
            a: 1.0,
            alpha: Vector7::zeros(),
        }
    }

    /// A uniformly distributed point of S⁷.
    pub fn random(rng: &mut impl rand::Rng) -> Self {
        loop {
            let a: f64 = StandardNormal.sample(rng);
            let alpha = Vector7::from_fn(|_, _| StandardNormal.sample(rng));
            if let Ok(l) = LambdaParam::new(a, alpha) {
                return l;
            }
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn alpha(&self) -> &Vector7 {
        &self.alpha
    }
}

/// `φ_λ = (a² − |α|²)φ + 2a *(α∧φ) + 2α ∧ *(α ∧ *φ)` for the flat `φ₀`.
pub fn phi_lambda(l: &LambdaParam) -> AlternatingForm {
    let id = Metric::identity(7);
    let phi = phi0();
    let alpha = AlternatingForm::one_form(l.alpha.as_slice());
    let s2 = l.alpha.norm_squared();
    let t1 = hodge_star(&alpha.wedge(&phi), &id).expect("identity metric");
    let t2 = alpha.wedge(&hodge_star(&alpha.wedge(&star_phi0()), &id).expect("identity metric"));
    phi.scale(l.a * l.a - s2)
        .add(&t1.scale(2.0 * l.a))
        .add(&t2.scale(2.0))
}

/// `φ − 2 α^# ⌟ [a *φ + α ∧ φ]`.
pub fn phi_lambda_contracted(l: &LambdaParam) -> AlternatingForm {
    let phi = phi0();
    let alpha = AlternatingForm::one_form(l.alpha.as_slice());
    let inner = star_phi0().scale(l.a).add(&alpha.wedge(&phi));
    phi.sub(&inner.interior(l.alpha.as_slice()).scale(2.0))
}

/// `*φ + 2α ∧ [aφ − α^# ⌟ *φ]`.
pub fn star_phi_lambda_closed_form(l: &LambdaParam) -> AlternatingForm {
    let alpha = AlternatingForm::one_form(l.alpha.as_slice());
    let bracket = phi0()
        .scale(l.a)
        .sub(&star_phi0().interior(l.alpha.as_slice()));
    star_phi0().add(&alpha.wedge(&bracket).scale(2.0))
}

/// Closed-form `(u × v)_λ`.
pub fn cross_lambda(l: &LambdaParam, u: &Vector7, v: &Vector7) -> Vector7 {
    let al = &l.alpha;
    let uv = cross7(u, v);
    uv * (1.0 - 2.0 * al.norm_squared())
        + (chi_via_cross(u, v, al) * -l.a + cross7(u, al) * al.dot(v) - cross7(v, al) * al.dot(u)
            + al * uv.dot(al))
            * 2.0
}

/// `(u × v)_λ` computed from `φ_λ` directly.
pub fn cross_lambda_from_form(l: &LambdaParam, u: &Vector7, v: &Vector7) -> Vector7 {
    cross_from_phi(&phi_lambda(l), &Metric::identity(7), u, v)
}

/// `E = ⟨u, v, u×v⟩` and `V = E⊥` for an orthonormal pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitFrame {
    pub u: Vector7,
    pub v: Vector7,
    pub uxv: Vector7,
    /// Orthonormal basis of V (7×4).
    pub normal: Frame,
}

impl SplitFrame {
    pub fn new(u: Vector7, v: Vector7) -> Result<Self> {
        let defect = (u.norm_squared() - 1.0)
            .abs()
            .max((v.norm_squared() - 1.0).abs())
            .max(u.dot(&v).abs());
        if defect > 1e-10 {
            return Err(Error::NonOrthonormalFrame { defect });
        }
        let uxv = cross7(&u, &v);
        let e = Frame::orthonormalize(&DMatrix::from_fn(7, 3, |r, c| [u, v, uxv][c][r]));
        Ok(SplitFrame {
            u,
            v,
            uxv,
            normal: e.complement(),
        })
    }

    /// `Σ cᵢ nᵢ` over the basis of V.
    pub fn normal_vector(&self, c: &[f64; 4]) -> Vector7 {
        (0..4).map(|i| self.normal.vector7(i) * c[i]).sum()
    }

    /// `J(X) = χ(u, v, X)`.
    pub fn j(&self, x: &Vector7) -> Vector7 {
        chi_via_cross(&self.u, &self.v, x)
    }
}

/// `F = aχ(u,v,α) − α(v)(u×α) + α(u)(v×α) − φ(u,v,α)α + |α|²(u×v)`.
pub fn f_locus_defect(l: &LambdaParam, s: &SplitFrame) -> Vector7 {
    let (u, v, al) = (&s.u, &s.v, &l.alpha);
    chi_via_cross(u, v, al) * l.a - cross7(u, al) * al.dot(v) + cross7(v, al) * al.dot(u)
        - al * s.uxv.dot(al)
        + s.uxv * al.norm_squared()
}

/// `(angle defect, scale)` comparing `(u×v)_λ` with `u×v`: the first is
/// `|n̂_λ − n̂|` for the normalized vectors, the second `|(u×v)_λ| / |u×v|`.
pub fn direction_match(l: &LambdaParam, u: &Vector7, v: &Vector7) -> (f64, f64) {
    let a = cross_lambda(l, u, v);
    let b = cross7(u, v);
    ((a / a.norm() - b / b.norm()).norm(), a.norm() / b.norm())
}

/// One point of an F-locus scan over `α ∈ V`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocusPoint {
    pub coords: [f64; 4],
    pub f_norm: f64,
    /// `√(a²|α|² + |α|⁴)`.
    pub predicted: f64,
}

/// Scans `α = Σ cᵢnᵢ` for `c ∈ [−r, r]⁴` on a `steps⁴` grid with fixed
/// `a`; `λ = [a, α]` is used unnormalized so the grid stays linear.
pub fn f_locus_scan(s: &SplitFrame, a: f64, radius: f64, steps: usize) -> Vec<LocusPoint> {
    let axis: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                0.0
            } else {
                -radius + 2.0 * radius * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let mut grid = Vec::with_capacity(steps.pow(4));
    for &c0 in &axis {
        for &c1 in &axis {
            for &c2 in &axis {
                for &c3 in &axis {
                    grid.push([c0, c1, c2, c3]);
                }
            }
        }
    }
    grid.into_par_iter()
        .map(|coords| {
            let alpha = s.normal_vector(&coords);
            let l = LambdaParam { a, alpha };
            let n2 = alpha.norm_squared();
            LocusPoint {
                coords,
                f_norm: f_locus_defect(&l, s).norm(),
                predicted: (a * a * n2 + n2 * n2).sqrt(),
            }
        })
        .collect()
}

/// Row of the `deform` experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformRow {
    pub a: f64,
    pub alpha: [f64; 7],
    pub metric_error: f64,
    pub cross_error: f64,
    pub f_norm: f64,
}

/// Samples `count` random `λ` and reports the metric error of `φ_λ`, the
/// closed-form cross product error, and `|F|` on the split `(e₁, e₂)`.
pub fn deform_scan(seed: u64, count: usize) -> Result<Vec<DeformRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let split = SplitFrame::new(unit(0), unit(1))?;
    let samples: Vec<(LambdaParam, Vector7, Vector7)> = (0..count)
        .map(|_| {
            let l = LambdaParam::random(&mut rng);
            let u = Vector7::from_fn(|_, _| StandardNormal.sample(&mut rng));
            let v = Vector7::from_fn(|_, _| StandardNormal.sample(&mut rng));
            (l, u, v)
        })
        .collect();
    samples
        .into_par_iter()
        .map(|(l, u, v)| {
            let phi = phi_lambda(&l);
            let g = metric_from_phi(&phi)?;
            let metric_error = (g.matrix() - DMatrix::identity(7, 7)).amax();
            let direct = cross_from_phi(&phi, &Metric::identity(7), &u, &v);
            let cross_error = (cross_lambda(&l, &u, &v) - direct).amax();
            Ok(DeformRow {
                a: l.a,
                alpha: l.alpha.into(),
                metric_error,
                cross_error,
                f_norm: f_locus_defect(&l, &split).norm(),
            })
        })
        .collect()
}

fn unit(i: usize) -> Vector7 {
    Vector7::from_fn(|r, _| if r == i { 1.0 } else { 0.0 })
}
