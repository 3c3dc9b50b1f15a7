//! Twisted Dirac operator on the flat associative torus T³ ⊂ T⁷.
//!
//! Spinors are ℍ-valued fields on the periodic N³ lattice (spacing h = 1/N).
//! Clifford multiplication by e_j is left multiplication by i, j, k; the
//! connection acts by right multiplication through link variables
//! `U_j(x) = exp(h a_j(x))`, `a_j(x) ∈ Im ℍ`, so it commutes with the
//! Clifford action:
//!
//! `D v(x) = Σ_j e_j · [v(x+e_j) U_j(x) − v(x−e_j) U_j(x−e_j)⁻¹] / 2h`.
//!
//! Gauge transformations act by `v ↦ v g`, `U_j(x) ↦ g(x+e_j)⁻¹ U_j(x) g(x)`.

use nalgebra::{DMatrix, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{neighbor, site_coords, site_count};
use crate::lie::clifford_mult;
use crate::octonion::Quaternion;
use crate::spectral::{smallest_magnitude, sorted_eigen, CsrMatrix, Eigensystem, SolverOptions};

/// An ℍ-valued field on the periodic N³ lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpinorField {
    n: usize,
    values: Vec<Quaternion>,
}

impl LatticeSpinorField {
    pub fn zeros(n: usize) -> Result<Self> {
        check_grid(n)?;
        Ok(LatticeSpinorField {
            n,
            values: vec![Quaternion::ZERO; site_count(n)],
        })
    }

    pub fn new(n: usize, values: Vec<Quaternion>) -> Result<Self> {
        check_grid(n)?;
        if values.len() != site_count(n) {
            return Err(Error::GridMismatch {
                left: site_count(n),
                right: values.len(),
            });
        }
        if values
            .iter()
            .any(|q| !q.to_array().iter().all(|c| c.is_finite()))
        {
            return Err(Error::InvalidParameter(
                "spinor field has non-finite entries".into(),
            ));
        }
        Ok(LatticeSpinorField { n, values })
    }

    pub fn constant(n: usize, q: Quaternion) -> Result<Self> {
        Self::new(n, vec![q; site_count(n)])
    }

    /// Values at grid coordinates `x ∈ [0,1)³`.
    pub fn from_fn(n: usize, f: impl Fn([f64; 3]) -> Quaternion) -> Result<Self> {
        let h = 1.0 / n as f64;
        let values = (0..site_count(n))
            .map(|s| {
                let c = site_coords(n, s);
                f([c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h])
            })
            .collect();
        Self::new(n, values)
    }

    /// Packs `4N³` reals, site-major.
    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != 4 * site_count(n) {
            return Err(Error::GridMismatch {
                left: 4 * site_count(n),
                right: data.len(),
            });
        }
        let values = data
            .chunks_exact(4)
            .map(|c| Quaternion::new(c[0], c[1], c[2], c[3]))
            .collect();
        Self::new(n, values)
    }

    pub fn to_real(&self) -> Vec<f64> {
        self.values.iter().flat_map(|q| q.to_array()).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Quaternion] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|q| q.to_array())
            .fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_grid(self.n, other.n)?;
        Ok(LatticeSpinorField {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| *a - *b)
                .collect(),
        })
    }

    /// Right multiplication by `g(x)` site by site.
    pub fn right_mul(&self, g: &[Quaternion]) -> Self {
        LatticeSpinorField {
            n: self.n,
            values: self.values.iter().zip(g).map(|(v, g)| *v * *g).collect(),
        }
    }
}

/// A connection 1-form: three Im ℍ components per site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connection1Form {
    n: usize,
    components: Vec<[Vector3<f64>; 3]>,
}

impl Connection1Form {
    pub fn zero(n: usize) -> Result<Self> {
        Self::constant(n, [Vector3::zeros(); 3])
    }

    pub fn new(n: usize, components: Vec<[Vector3<f64>; 3]>) -> Result<Self> {
        check_grid(n)?;
        if components.len() != site_count(n) {
            return Err(Error::GridMismatch {
                left: site_count(n),
                right: components.len(),
            });
        }
        Ok(Connection1Form { n, components })
    }

    /// The same `a_j ∈ Im ℍ` at every site.
    pub fn constant(n: usize, a: [Vector3<f64>; 3]) -> Result<Self> {
        Self::new(n, vec![a; site_count(n)])
    }

    /// Determinant-line case `a_j = i θ_j`.
    pub fn abelian(n: usize, theta: &[[f64; 3]]) -> Result<Self> {
        let components = theta
            .iter()
            .map(|t| std::array::from_fn(|j| Vector3::new(t[j], 0.0, 0.0)))
            .collect();
        Self::new(n, components)
    }

    /// Constant twist `a_j = θ_j i`.
    pub fn constant_twist(n: usize, theta: [f64; 3]) -> Result<Self> {
        Self::abelian(n, &vec![theta; site_count(n)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[[Vector3<f64>; 3]] {
        &self.components
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// `U_j(x) = exp(h a_j(x))`.
    pub fn link(&self, site: usize, dir: usize) -> Quaternion {
        Quaternion::exp_imag(&(self.components[site][dir] * self.spacing()))
    }
}

fn check_grid(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid size must be at least 2, got {n}"
        )));
    }
    Ok(())
}

pub(crate) fn same_grid(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::GridMismatch { left, right });
    }
    Ok(())
}

/// Clifford generators `e₁, e₂, e₃ ↦ i, j, k`.
pub fn clifford_unit(dir: usize) -> Vector3<f64> {
    Vector3::from_fn(|r, _| if r == dir { 1.0 } else { 0.0 })
}

pub fn dirac_apply(v: &LatticeSpinorField, a: &Connection1Form) -> Result<LatticeSpinorField> {
    same_grid(v.n, a.n)?;
    let n = v.n;
    let inv2h = 0.5 * n as f64;
    let values = (0..site_count(n))
        .into_par_iter()
        .map(|s| {
            let mut acc = Quaternion::ZERO;
            for j in 0..3 {
                let fwd = neighbor(n, s, j, 1);
                let bwd = neighbor(n, s, j, -1);
                let d = v.values[fwd] * a.link(s, j) - v.values[bwd] * a.link(bwd, j).conj();
                acc = acc + clifford_mult(&clifford_unit(j), d);
            }
            acc.scale(inv2h)
        })
        .collect();
    Ok(LatticeSpinorField { n, values })
}

/// The `4N³ × 4N³` sparse matrix of `D`.
pub fn dirac_matrix(a: &Connection1Form) -> CsrMatrix {
    let n = a.n;
    let inv2h = 0.5 * n as f64;
    let rows: Vec<Vec<(usize, f64)>> = (0..site_count(n))
        .into_par_iter()
        .flat_map_iter(|s| {
            // Row block of site s: Σ_j L_j R_{U} at fwd, −L_j R_{U⁻¹} at bwd.
            let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); 4];
            for j in 0..3 {
                let left = Quaternion::from_imag(&clifford_unit(j)).left_matrix();
                let fwd = neighbor(n, s, j, 1);
                let bwd = neighbor(n, s, j, -1);
                for (col_site, right, sign) in [
                    (fwd, a.link(s, j).right_matrix(), 1.0),
                    (bwd, a.link(bwd, j).conj().right_matrix(), -1.0),
                ] {
                    let block = mat4_mul(&left, &right);
                    for (r, row) in block.iter().enumerate() {
                        for (c, &val) in row.iter().enumerate() {
                            if val != 0.0 {
                                entries[r].push((4 * col_site + c, sign * inv2h * val));
                            }
                        }
                    }
                }
            }
            entries.into_iter()
        })
        .collect();
    CsrMatrix::from_rows(4 * site_count(n), rows)
}

fn mat4_mul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    std::array::from_fn(|r| std::array::from_fn(|c| (0..4).map(|k| a[r][k] * b[k][c]).sum()))
}

/// Threshold below which an eigenvalue of D counts as zero.
pub const KERNEL_TOL: f64 = 1e-6;

/// Eigenpairs of `D_a` of smallest |λ| (at least `count`, completed to the
/// end of a degenerate cluster), ascending.
pub fn dirac_eigensystem(a: &Connection1Form, count: usize, seed: u64) -> Result<Eigensystem> {
    smallest_magnitude(&dirac_matrix(a), count, seed, SolverOptions::default())
}

pub fn dirac_spectrum(a: &Connection1Form, count: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(dirac_eigensystem(a, count, seed)?.values)
}

/// Full spectrum by dense diagonalization (small grids only).
pub fn dirac_dense_spectrum(a: &Connection1Form) -> Vec<f64> {
    sorted_eigen(&dirac_matrix(a).to_dense()).0
}

/// Kernel dimensions `(full, physical)` from an eigensystem.
pub fn kernel_dims(es: &Eigensystem, n: usize) -> (usize, usize) {
    let k = es.kernel(KERNEL_TOL);
    (k.ncols(), physical_kernel_dim(&k, n))
}

/// Spectrum of the constant twist `a_j = θ_j i` by Fourier analysis: for
/// each momentum k, `±|s̃(k)|` each twice, with
/// `s̃_j = sin(2πk_j/N + hθ_j)/h`. Sorted ascending.
pub fn fourier_spectrum(n: usize, theta: [f64; 3]) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let mut out = Vec::with_capacity(4 * site_count(n));
    for s in 0..site_count(n) {
        let k = site_coords(n, s);
        let norm = (0..3)
            .map(|j| {
                let sj = (std::f64::consts::TAU * k[j] as f64 / n as f64 + h * theta[j]).sin() / h;
                sj * sj
            })
            .sum::<f64>()
            .sqrt();
        out.extend([norm, norm, -norm, -norm]);
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Momenta with vanishing symbol, times 4: the full kernel dimension of the
/// constant twist, doublers included.
pub fn fourier_kernel_dim(n: usize, theta: [f64; 3], tol: f64) -> usize {
    fourier_spectrum(n, theta)
        .iter()
        .filter(|l| l.abs() < tol)
        .count()
}

/// Taste filter `S = Π_j (T_j⁺ + 2 + T_j⁻)/4`: 1 at zero momentum and 0
/// whenever some `k_j = N/2`, so it separates the continuum zero modes from
/// the lattice doublers.
pub fn taste_filter(v: &[f64], n: usize) -> Vec<f64> {
    let mut cur = v.to_vec();
    for j in 0..3 {
        let next: Vec<f64> = (0..site_count(n))
            .flat_map(|s| {
                let (f, b) = (neighbor(n, s, j, 1), neighbor(n, s, j, -1));
                let cur = &cur;
                (0..4).map(move |c| 0.25 * (cur[4 * f + c] + 2.0 * cur[4 * s + c] + cur[4 * b + c]))
            })
            .collect();
        cur = next;
    }
    cur
}

/// Number of kernel directions that survive the taste filter (singular
/// values of `S·K` above ½ for an orthonormal kernel basis `K`).
pub fn physical_kernel_dim(kernel: &DMatrix<f64>, n: usize) -> usize {
    if kernel.ncols() == 0 {
        return 0;
    }
    let cols: Vec<nalgebra::DVector<f64>> = (0..kernel.ncols())
        .map(|c| nalgebra::DVector::from_vec(taste_filter(kernel.column(c).as_slice(), n)))
        .collect();
    let filtered = DMatrix::from_columns(&cols);
    filtered
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > 0.5)
        .count()
}
