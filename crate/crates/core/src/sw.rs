//! Seiberg–Witten type residuals on the lattice T³.
//!
//! A spinor `q = z + j w ∈ ℍ` is read as `(z, w) ∈ ℂ²` with complex
//! structure given by right multiplication by i. The determinant-line
//! connection is `a = iθ`, acting through the links of [`crate::dirac`].
//! The curvature 1-form is `*dθ` with the forward plaquette curl
//! `F_jk(x) = [θ_k(x+e_j) − θ_k(x) − θ_j(x+e_k) + θ_j(x)]/h` and
//! `(*F)₁ = F₂₃`, `(*F)₂ = F₃₁`, `(*F)₃ = F₁₂`. The quadratic map
//! `σ(z, w) = ((|z|² − |w|²)/2, z̄w)` is read as a real 3-vector.
//!
//! Gauge: `v ↦ v e^{if}`, `θ ↦ θ − df` with `df` the forward difference;
//! with this pairing the lattice residual is exactly equivariant.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirac::{clifford_unit, dirac_apply, same_grid, Connection1Form, LatticeSpinorField};
use crate::error::{Error, Result};
use crate::lattice::{neighbor, site_count};
use crate::lie::clifford_mult;
use crate::octonion::Quaternion;

/// Current JSON schema version of [`SWState`].
pub const SW_SCHEMA: u32 = 1;

pub fn quaternion_to_c2(q: Quaternion) -> (Complex64, Complex64) {
    (Complex64::new(q.w, q.x), Complex64::new(q.y, -q.z))
}

pub fn c2_to_quaternion(z: Complex64, w: Complex64) -> Quaternion {
    Quaternion::new(z.re, z.im, w.re, -w.im)
}

/// `σ(x, x) = ((|z|² − |w|²)/2, z̄w)`.
pub fn sigma_map(z: Complex64, w: Complex64) -> (f64, Complex64) {
    (0.5 * (z.norm_sqr() - w.norm_sqr()), z.conj() * w)
}

/// `σ` of a quaternion spinor as a real 3-vector.
pub fn sigma_vec(q: Quaternion) -> [f64; 3] {
    let (z, w) = quaternion_to_c2(q);
    let (r, c) = sigma_map(z, w);
    [r, c.re, c.im]
}

/// Polarization `σ(x, y)`.
pub fn sigma_polar(x: Quaternion, y: Quaternion) -> [f64; 3] {
    let (a, b, c) = (sigma_vec(x + y), sigma_vec(x), sigma_vec(y));
    std::array::from_fn(|i| 0.5 * (a[i] - b[i] - c[i]))
}

/// `(v, a = iθ, δ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SWStateJson", into = "SWStateJson")]
pub struct SWState {
    n: usize,
    v: LatticeSpinorField,
    theta: Vec<[f64; 3]>,
    delta: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SWStateJson {
    schema: u32,
    n: usize,
    v: Vec<[f64; 4]>,
    theta: Vec<[f64; 3]>,
    delta: Vec<[f64; 3]>,
}

impl TryFrom<SWStateJson> for SWState {
    type Error = Error;

    fn try_from(j: SWStateJson) -> Result<Self> {
        if j.schema != SW_SCHEMA {
            return Err(Error::InvalidParameter(format!(
                "unsupported schema {} (expected {SW_SCHEMA})",
                j.schema
            )));
        }
        let v =
            LatticeSpinorField::new(j.n, j.v.into_iter().map(Quaternion::from_array).collect())?;
        SWState::new(v, j.theta, j.delta)
    }
}

impl From<SWState> for SWStateJson {
    fn from(s: SWState) -> Self {
        SWStateJson {
            schema: SW_SCHEMA,
            n: s.n,
            v: s.v.values().iter().map(|q| q.to_array()).collect(),
            theta: s.theta,
            delta: s.delta,
        }
    }
}

impl SWState {
    pub fn new(v: LatticeSpinorField, theta: Vec<[f64; 3]>, delta: Vec<[f64; 3]>) -> Result<Self> {
        let n = v.n();
        same_grid(site_count(n), theta.len())?;
        same_grid(site_count(n), delta.len())?;
        if theta.iter().chain(&delta).flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite connection or perturbation".into(),
            ));
        }
        Ok(SWState { n, v, theta, delta })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(
            LatticeSpinorField::zeros(n)?,
            vec![[0.0; 3]; site_count(n)],
            vec![[0.0; 3]; site_count(n)],
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spinor(&self) -> &LatticeSpinorField {
        &self.v
    }

    pub fn theta(&self) -> &[[f64; 3]] {
        &self.theta
    }

    pub fn delta(&self) -> &[[f64; 3]] {
        &self.delta
    }

    pub fn connection(&self) -> Connection1Form {
        Connection1Form::abelian(self.n, &self.theta).expect("validated at construction")
    }

    /// `(v e^{if}, θ − df, δ)`.
    pub fn gauge_transform(&self, f: &[f64]) -> Result<SWState> {
        same_grid(site_count(self.n), f.len())?;
        let g: Vec<Quaternion> = f
            .iter()
            .map(|&t| Quaternion::new(t.cos(), t.sin(), 0.0, 0.0))
            .collect();
        let df = forward_gradient(self.n, f);
        let theta = self
            .theta
            .iter()
            .zip(&df)
            .map(|(t, d)| std::array::from_fn(|j| t[j] - d[j]))
            .collect();
        SWState::new(self.v.right_mul(&g), theta, self.delta.clone())
    }
}

/// Spinor and 1-form parts of a residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwResidual {
    pub dirac: LatticeSpinorField,
    pub curvature: Vec<[f64; 3]>,
}

impl SwResidual {
    pub fn dirac_norm(&self) -> f64 {
        self.dirac.norm()
    }

    pub fn curvature_norm(&self) -> f64 {
        self.curvature
            .iter()
            .flatten()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.curvature
            .iter()
            .flatten()
            .fold(self.dirac.max_abs(), |m, x| m.max(x.abs()))
    }

    fn to_vec(&self) -> Vec<f64> {
        let mut out = self.dirac.to_real();
        out.extend(self.curvature.iter().flatten());
        out
    }
}

/// `(∂_j f)(x) = [f(x+e_j) − f(x)]/h`.
pub fn forward_gradient(n: usize, f: &[f64]) -> Vec<[f64; 3]> {
    let inv_h = n as f64;
    (0..site_count(n))
        .map(|s| std::array::from_fn(|j| (f[neighbor(n, s, j, 1)] - f[s]) * inv_h))
        .collect()
}

/// `*dθ` by the forward plaquette curl.
pub fn star_d(n: usize, theta: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let inv_h = n as f64;
    let plaquette = |s: usize, j: usize, k: usize| {
        (theta[neighbor(n, s, j, 1)][k] - theta[s][k] - theta[neighbor(n, s, k, 1)][j]
            + theta[s][j])
            * inv_h
    };
    (0..site_count(n))
        .map(|s| [plaquette(s, 1, 2), plaquette(s, 2, 0), plaquette(s, 0, 1)])
        .collect()
}

/// `d*θ = −Σ_j [θ_j(x) − θ_j(x−e_j)]/h`, the transpose of the forward gradient.
pub fn codifferential(n: usize, theta: &[[f64; 3]]) -> Vec<f64> {
    let inv_h = n as f64;
    (0..site_count(n))
        .map(|s| {
            -(0..3)
                .map(|j| theta[s][j] - theta[neighbor(n, s, j, -1)][j])
                .sum::<f64>()
                * inv_h
        })
        .collect()
}

/// `(D_A v, *dθ + δ − σ(v, v))`.
pub fn sw_residual(s: &SWState) -> Result<SwResidual> {
    let dirac = dirac_apply(&s.v, &s.connection())?;
    let curl = star_d(s.n, &s.theta);
    let curvature = (0..site_count(s.n))
        .map(|x| {
            let sig = sigma_vec(s.v.values()[x]);
            std::array::from_fn(|j| curl[x][j] + s.delta[x][j] - sig[j])
        })
        .collect();
    Ok(SwResidual { dirac, curvature })
}

/// Derivative of the residual at `s` in the direction `(dv, dθ, dδ)`:
/// `(D_A dv + (∂_θ D_A)v·dθ, *d dθ + dδ − 2σ(v, dv))`.
pub fn sw_linearization(
    s: &SWState,
    dv: &LatticeSpinorField,
    dtheta: &[[f64; 3]],
    ddelta: &[[f64; 3]],
) -> Result<SwResidual> {
    let n = s.n;
    same_grid(n, dv.n())?;
    same_grid(site_count(n), dtheta.len())?;
    same_grid(site_count(n), ddelta.len())?;
    let a = s.connection();
    let base = dirac_apply(dv, &a)?;
    let v = s.v.values();
    let half = 0.5;
    let values = (0..site_count(n))
        .map(|x| {
            let mut acc = base.values()[x];
            for j in 0..3 {
                let fwd = neighbor(n, x, j, 1);
                let bwd = neighbor(n, x, j, -1);
                // d/dθ of v(x+e)e^{ihθ(x)} and of −v(x−e)e^{−ihθ(x−e)}, divided by 2h.
                let i_fwd = Quaternion::new(0.0, dtheta[x][j], 0.0, 0.0);
                let i_bwd = Quaternion::new(0.0, dtheta[bwd][j], 0.0, 0.0);
                let d = v[fwd] * a.link(x, j) * i_fwd + v[bwd] * a.link(bwd, j).conj() * i_bwd;
                acc = acc + clifford_mult(&clifford_unit(j), d).scale(half);
            }
            acc
        })
        .collect();
    let dirac = LatticeSpinorField::new(n, values)?;
    let curl = star_d(n, dtheta);
    let curvature = (0..site_count(n))
        .map(|x| {
            let sig = sigma_polar(v[x], dv.values()[x]);
            std::array::from_fn(|j| curl[x][j] + ddelta[x][j] - 2.0 * sig[j])
        })
        .collect();
    Ok(SwResidual { dirac, curvature })
}

/// Central finite difference of the residual; used as an oracle.
pub fn sw_finite_difference(
    s: &SWState,
    dv: &LatticeSpinorField,
    dtheta: &[[f64; 3]],
    ddelta: &[[f64; 3]],
    step: f64,
) -> Result<Vec<f64>> {
    let shifted = |t: f64| -> Result<SWState> {
        let v = LatticeSpinorField::new(
            s.n,
            s.v.values()
                .iter()
                .zip(dv.values())
                .map(|(a, b)| *a + b.scale(t))
                .collect(),
        )?;
        let add = |x: &[[f64; 3]], y: &[[f64; 3]]| -> Vec<[f64; 3]> {
            x.iter()
                .zip(y)
                .map(|(a, b)| std::array::from_fn(|j| a[j] + t * b[j]))
                .collect()
        };
        SWState::new(v, add(&s.theta, dtheta), add(&s.delta, ddelta))
    };
    let plus = sw_residual(&shifted(step)?)?.to_vec();
    let minus = sw_residual(&shifted(-step)?)?.to_vec();
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| (p - m) / (2.0 * step))
        .collect())
}

/// Flattens a linearization result in the same order as the finite difference.
pub fn residual_vector(r: &SwResidual) -> Vec<f64> {
    r.to_vec()
}

/// Dimensions of the lattice complex `(f, θ) ↦ (d*θ, df + *dθ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexReport {
    pub rows: usize,
    pub cols: usize,
    pub kernel: usize,
    pub cokernel: usize,
}

impl IndexReport {
    pub fn index(&self) -> i64 {
        self.kernel as i64 - self.cokernel as i64
    }
}

/// Dense matrix of the complex on the N³ lattice.
pub fn index_complex_matrix(n: usize) -> DMatrix<f64> {
    let sites = site_count(n);
    let dim = 4 * sites;
    let mut cols = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut f = vec![0.0; sites];
        let mut theta = vec![[0.0; 3]; sites];
        if c < sites {
            f[c] = 1.0;
        } else {
            theta[(c - sites) / 3][(c - sites) % 3] = 1.0;
        }
        let div = codifferential(n, &theta);
        let grad = forward_gradient(n, &f);
        let curl = star_d(n, &theta);
        let mut col = div;
        col.extend(
            (0..sites)
                .flat_map(|s| (0..3).map(move |j| (s, j)))
                .map(|(s, j)| grad[s][j] + curl[s][j]),
        );
        cols.push(DVector::from_vec(col));
    }
    DMatrix::from_columns(&cols)
}

pub fn index_complex(n: usize) -> IndexReport {
    let m = index_complex_matrix(n);
    let rank = crate::grassmann::numerical_rank(&m);
    IndexReport {
        rows: m.nrows(),
        cols: m.ncols(),
        kernel: m.ncols() - rank,
        cokernel: m.nrows() - rank,
    }
}

/// `d = [c₁² − (2e + 3σ)]/4`.
pub fn sw_index_formula(c1_sq: i64, euler: i64, signature: i64) -> Result<i64> {
    let num = c1_sq - (2 * euler + 3 * signature);
    if num.rem_euclid(4) != 0 {
        return Err(Error::NotRealizable(format!(
            "c₁² − (2e + 3σ) = {num} is not divisible by 4"
        )));
    }
    Ok(num / 4)
}
