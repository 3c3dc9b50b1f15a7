//! g₂ as the stabilizer of φ₀ inside so(7), its block structure relative to
//! the associative plane ⟨e₁,e₂,e₃⟩, the SO(4) block action and Clifford
//! multiplication on the normal model.
//!
//! Model identification: the plane L = ⟨e₁,e₂,e₃⟩ maps to Im ℍ by
//! `e_m ↦ −(i, j, k)_m` and the normal space L⊥ = ⟨e₄,…,e₇⟩ maps to ℍ by
//! `y ↦ y₄ − y₅i − y₆j + y₇k`. Under these maps `e_m × y` becomes left
//! multiplication by the image of `e_m`.

use nalgebra::{DMatrix, Matrix3, SMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{phi0, subsets, AlternatingForm};
use crate::grassmann::RANK_RTOL;
use crate::octonion::{Quaternion, Vector7};

pub type Matrix7 = SMatrix<f64, 7, 7>;

/// Residual below which `L_A φ₀` counts as zero.
pub const G2_TOL: f64 = 1e-10;

/// An antisymmetric 7×7 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct So7Element(Matrix7);

impl So7Element {
    pub fn new(m: Matrix7) -> Result<Self> {
        let asym = (m + m.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "matrix is not antisymmetric (|A + Aᵀ| = {asym:.3e})"
            )));
        }
        Ok(So7Element(m))
    }

    /// `e_i e_jᵀ − e_j e_iᵀ` (0-based).
    pub fn elementary(i: usize, j: usize) -> Self {
        let mut m = Matrix7::zeros();
        m[(i, j)] = 1.0;
        m[(j, i)] = -1.0;
        So7Element(m)
    }

    pub fn matrix(&self) -> &Matrix7 {
        &self.0
    }

    pub fn bracket(&self, other: &So7Element) -> So7Element {
        So7Element(self.0 * other.0 - other.0 * self.0)
    }

    /// `½ tr(AᵀB)`, for which the elementary generators are orthonormal.
    pub fn inner(&self, other: &So7Element) -> f64 {
        0.5 * self.0.component_mul(&other.0).sum()
    }

    fn from_coordinates(c: &[f64]) -> Self {
        let mut m = Matrix7::zeros();
        for (n, (i, j)) in pairs().enumerate() {
            m[(i, j)] = c[n];
            m[(j, i)] = -c[n];
        }
        So7Element(m)
    }
}

fn pairs() -> impl Iterator<Item = (usize, usize)> {
    (0..7).flat_map(|i| (i + 1..7).map(move |j| (i, j)))
}

/// `(L_A f)(v₁,…,v_k) = −Σ_s f(v₁,…,Av_s,…,v_k)`.
pub fn lie_action_on_3forms(a: &So7Element, f: &AlternatingForm) -> AlternatingForm {
    lie_action(a.matrix().as_slice(), 7, f)
}

fn lie_action(a_colmajor: &[f64], n: usize, f: &AlternatingForm) -> AlternatingForm {
    assert_eq!(f.dim(), n);
    let a = |r: usize, c: usize| a_colmajor[r + n * c];
    let k = f.degree();
    let mut out = AlternatingForm::zero(k, n);
    let sets = subsets(n, k);
    for (slot, set) in out.coeffs_mut().iter_mut().zip(&sets) {
        let mut total = 0.0;
        let mut idx = set.clone();
        for s in 0..k {
            let orig = idx[s];
            for r in 0..n {
                let coef = a(r, orig);
                if coef != 0.0 {
                    idx[s] = r;
                    total -= coef * f.coefficient(&idx);
                }
            }
            idx[s] = orig;
        }
        *slot = total;
    }
    out
}

/// The 35×21 matrix of `A ↦ L_A φ₀` in elementary coordinates.
pub fn stabilizer_map(phi: &AlternatingForm) -> DMatrix<f64> {
    let cols: Vec<_> = pairs()
        .map(|(i, j)| {
            let img = lie_action_on_3forms(&So7Element::elementary(i, j), phi);
            nalgebra::DVector::from_column_slice(img.coeffs())
        })
        .collect();
    DMatrix::from_columns(&cols)
}

/// An orthonormal basis of g₂ (w.r.t. `½ tr(AᵀB)`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Basis {
    pub elements: Vec<So7Element>,
    /// `σ₇ / σ₈` of the stabilizer map (largest discarded over smallest kept).
    pub singular_gap: f64,
}

impl G2Basis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `A − Σ ⟨A,E_k⟩E_k`.
    pub fn project_out(&self, a: &So7Element) -> Matrix7 {
        let mut r = *a.matrix();
        for e in &self.elements {
            r -= e.matrix() * a.inner(e);
        }
        r
    }

    /// Largest off-span residual over all brackets `[E_a, E_b]`.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, x) in self.elements.iter().enumerate() {
            for y in &self.elements[a + 1..] {
                worst = worst.max(self.project_out(&x.bracket(y)).amax());
            }
        }
        worst
    }

    /// Largest `|L_E φ₀|` over the basis.
    pub fn annihilation_residual(&self) -> f64 {
        let phi = phi0();
        self.elements
            .iter()
            .map(|e| {
                lie_action_on_3forms(e, &phi)
                    .coeffs()
                    .iter()
                    .fold(0.0f64, |m, c| m.max(c.abs()))
            })
            .fold(0.0, f64::max)
    }

    /// Each element as a row-major list of rows.
    pub fn to_json(&self) -> serde_json::Value {
        let mats: Vec<Vec<Vec<f64>>> = self
            .elements
            .iter()
            .map(|e| {
                (0..7)
                    .map(|r| (0..7).map(|c| e.matrix()[(r, c)]).collect())
                    .collect()
            })
            .collect();
        serde_json::json!({ "dimension": self.len(), "matrices": mats })
    }
}

/// Stabilizer of `phi` in so(7), computed as the nullspace of the
/// stabilizer map.
pub fn stabilizer_basis(phi: &AlternatingForm) -> (Vec<So7Element>, f64, usize) {
    let m = stabilizer_map(phi);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let sv = &svd.singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let mut kept_min = f64::INFINITY;
    let mut dropped_max: f64 = 0.0;
    let mut null = Vec::new();
    // The SVD of a 35×21 matrix returns all 21 singular values.
    for (r, &s) in sv.iter().enumerate() {
        if s > RANK_RTOL * max {
            kept_min = kept_min.min(s);
        } else {
            dropped_max = dropped_max.max(s);
            let row: Vec<f64> = v_t.row(r).iter().copied().collect();
            null.push(So7Element::from_coordinates(&row));
        }
    }
    let gap = if dropped_max == 0.0 {
        f64::INFINITY
    } else {
        kept_min / dropped_max
    };
    let rank = sv.len() - null.len();
    (null, gap, rank)
}

pub fn compute_g2_basis() -> Result<G2Basis> {
    let (elements, singular_gap, _) = stabilizer_basis(&phi0());
    if elements.len() != 14 {
        return Err(Error::RankMismatch {
            expected: 14,
            found: elements.len(),
        });
    }
    Ok(G2Basis {
        elements,
        singular_gap,
    })
}

/// Image of a vector in L under the model map to Im ℍ.
pub fn plane_to_imag(x: &Vector3<f64>) -> Quaternion {
    Quaternion::from_imag(&-x)
}

pub fn imag_to_plane(q: Quaternion) -> Vector3<f64> {
    -q.imag()
}

/// Image of the L⊥ part (coordinates 4…7) of `y` in ℍ.
pub fn normal_to_quaternion(y: &Vector7) -> Quaternion {
    Quaternion::new(y[3], -y[4], -y[5], y[6])
}

pub fn quaternion_to_normal(q: Quaternion) -> Vector7 {
    Vector7::from([0.0, 0.0, 0.0, q.w, -q.x, -q.y, q.z])
}

/// Block pieces of `A ∈ g₂` relative to L ⊕ L⊥.
#[derive(Clone, Debug, PartialEq)]
pub struct G2Block {
    /// L → L block.
    pub a: Matrix3<f64>,
    /// L⊥ → L⊥ block (the induced action ρ(a) on the normal space).
    pub rho_a: SMatrix<f64, 4, 4>,
    /// `β_m`: the L⊥ component of `A e_m` as a quaternion.
    pub beta: [Quaternion; 3],
}

impl G2Block {
    /// `i β₁ + j β₂ + k β₃`.
    pub fn constraint(&self) -> Quaternion {
        Quaternion::I * self.beta[0] + Quaternion::J * self.beta[1] + Quaternion::K * self.beta[2]
    }

    /// `β̄₁ i + β̄₂ j + β̄₃ k`, the conjugate form of the same constraint.
    pub fn constraint_conjugate(&self) -> Quaternion {
        self.beta[0].conj() * Quaternion::I
            + self.beta[1].conj() * Quaternion::J
            + self.beta[2].conj() * Quaternion::K
    }

    pub fn constraint_residual(&self) -> f64 {
        self.constraint().norm()
    }
}

pub fn g2_block_form(a: &So7Element) -> Result<G2Block> {
    let residual = lie_action_on_3forms(a, &phi0())
        .coeffs()
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()));
    if residual > G2_TOL {
        return Err(Error::NotInG2 { residual });
    }
    let m = a.matrix();
    Ok(G2Block {
        a: m.fixed_view::<3, 3>(0, 0).into_owned(),
        rho_a: m.fixed_view::<4, 4>(3, 3).into_owned(),
        beta: std::array::from_fn(|c| {
            let col = m.column(c);
            normal_to_quaternion(&Vector7::from_fn(|r, _| col[r]))
        }),
    })
}

/// The 4×12 real matrix of `(β₁,β₂,β₃) ↦ iβ₁ + jβ₂ + kβ₃`.
pub fn beta_constraint_matrix() -> DMatrix<f64> {
    let units = [Quaternion::I, Quaternion::J, Quaternion::K];
    DMatrix::from_fn(4, 12, |r, c| {
        let basis =
            Quaternion::from_array(std::array::from_fn(|s| if s == c % 4 { 1.0 } else { 0.0 }));
        (units[c / 4] * basis).to_array()[r]
    })
}

/// Dimension of the space of admissible off-diagonal blocks β.
pub fn beta_space_dim() -> usize {
    12 - crate::grassmann::numerical_rank(&beta_constraint_matrix())
}

/// A pair of unit quaternions `(q, λ)`, defined up to a joint sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct So4BlockElement {
    pub q: Quaternion,
    pub lambda: Quaternion,
}

impl So4BlockElement {
    /// Normalizes both quaternions; rejects zeros.
    pub fn new(q: Quaternion, lambda: Quaternion) -> Result<Self> {
        let (nq, nl) = (q.norm(), lambda.norm());
        if nq < 1e-300 || nl < 1e-300 {
            return Err(Error::InvalidParameter(
                "zero quaternion in SO(4) element".into(),
            ));
        }
        Ok(So4BlockElement {
            q: q.scale(1.0 / nq),
            lambda: lambda.scale(1.0 / nl),
        })
    }

    pub fn identity() -> Self {
        So4BlockElement {
            q: Quaternion::ONE,
            lambda: Quaternion::ONE,
        }
    }

    /// True when `(q, λ) = ±(q', λ')` within `tol`.
    pub fn same_as(&self, other: &So4BlockElement, tol: f64) -> bool {
        let plus = (self.q - other.q)
            .norm()
            .max((self.lambda - other.lambda).norm());
        let minus = (self.q + other.q)
            .norm()
            .max((self.lambda + other.lambda).norm());
        plus.min(minus) < tol
    }

    /// The 7×7 orthogonal matrix acting on L ⊕ L⊥ through the model maps.
    pub fn to_matrix7(&self) -> Matrix7 {
        let mut m = Matrix7::zeros();
        for c in 0..3 {
            let mut x = Vector3::zeros();
            x[c] = 1.0;
            let (img, _) = so4_action(self, &x, Quaternion::ZERO);
            m.fixed_view_mut::<3, 1>(0, c).copy_from(&img);
        }
        for c in 3..7 {
            let mut y = Vector7::zeros();
            y[c] = 1.0;
            let (_, img) = so4_action(self, &Vector3::zeros(), normal_to_quaternion(&y));
            let v = quaternion_to_normal(img);
            m.fixed_view_mut::<4, 1>(3, c)
                .copy_from(&v.fixed_rows::<4>(3));
        }
        m
    }
}

/// Generator of `t ↦ (exp(tξ), exp(tη))`: `(x, y) ↦ (ξx − xξ, ξy − yη)`.
pub fn so4_generator(xi: &Vector3<f64>, eta: &Vector3<f64>) -> So7Element {
    let (xq, eq) = (Quaternion::from_imag(xi), Quaternion::from_imag(eta));
    let mut m = Matrix7::zeros();
    for c in 0..3 {
        let mut x = Vector3::zeros();
        x[c] = 1.0;
        let xq2 = Quaternion::from_imag(&x);
        m.fixed_view_mut::<3, 1>(0, c)
            .copy_from(&(xq * xq2 - xq2 * xq).imag());
    }
    for c in 3..7 {
        let y = normal_to_quaternion(&Vector7::from_fn(|r, _| if r == c { 1.0 } else { 0.0 }));
        let v = quaternion_to_normal(xq * y - y * eq);
        m.fixed_view_mut::<4, 1>(3, c)
            .copy_from(&v.fixed_rows::<4>(3));
    }
    So7Element(m)
}

/// `(x, y) ↦ (q x q⁻¹, q y λ⁻¹)` with `x ∈ Im ℍ` given by its coordinates.
pub fn so4_action(
    e: &So4BlockElement,
    x: &Vector3<f64>,
    y: Quaternion,
) -> (Vector3<f64>, Quaternion) {
    let qi = e.q.conj();
    let x2 = (e.q * Quaternion::from_imag(x) * qi).imag();
    (x2, e.q * y * e.lambda.conj())
}

/// Clifford multiplication `Im ℍ × ℍ → ℍ`: left quaternion multiplication.
pub fn clifford_mult(w: &Vector3<f64>, v: Quaternion) -> Quaternion {
    Quaternion::from_imag(w) * v
}

/// The 4×12 matrix of `Σ e^m ⊗ v_m ↦ Σ (i,j,k)_m v_m`.
pub fn clifford_map_matrix() -> DMatrix<f64> {
    beta_constraint_matrix()
}

/// `12 − rank` of the Clifford map.
pub fn clifford_kernel_dim() -> usize {
    12 - crate::grassmann::numerical_rank(&clifford_map_matrix())
}

/// Ratio of largest to smallest nonzero singular value of the Clifford map.
pub fn clifford_condition_number() -> f64 {
    let sv = clifford_map_matrix().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv
        .iter()
        .cloned()
        .filter(|&s| s > RANK_RTOL * max)
        .fold(f64::INFINITY, f64::min);
    max / min
}
