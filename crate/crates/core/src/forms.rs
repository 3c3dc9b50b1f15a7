//! Dense alternating forms on ℝⁿ and the G₂/Spin(7) forms built on them.
//!
//! Coefficients are stored in lexicographic order of index subsets, so a
//! 3-form on ℝ⁷ has 35 entries with `e¹²³` first. Orientation is
//! `μ = e¹²³⁴⁵⁶⁷`; every Hodge sign in this module follows from that choice.

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::octonion::{cross7, Vector7};

/// Terms of φ₀ as (1-based index triple, coefficient).
pub const PHI0_TERMS: [([usize; 3], i8); 7] = [
    ([1, 2, 3], 1),
    ([1, 4, 5], 1),
    ([1, 6, 7], 1),
    ([2, 4, 6], 1),
    ([2, 5, 7], -1),
    ([3, 4, 7], -1),
    ([3, 5, 6], -1),
];

/// Terms of *φ₀.
pub const STAR_PHI0_TERMS: [([usize; 4], i8); 7] = [
    ([4, 5, 6, 7], 1),
    ([2, 3, 6, 7], 1),
    ([2, 3, 4, 5], 1),
    ([1, 3, 5, 7], 1),
    ([1, 3, 4, 6], -1),
    ([1, 2, 5, 6], -1),
    ([1, 2, 4, 7], -1),
];

/// The printed expansion `χ = Σ_α (Σ_J c_J e^J) e_α`, one row per direction
/// `e_α` (α = 1..7), each with four signed 1-based triples.
pub const CHI_EXPANSION_TABLE: [[([usize; 3], i8); 4]; 7] = [
    [
        ([2, 5, 6], 1),
        ([2, 4, 7], 1),
        ([3, 4, 6], 1),
        ([3, 5, 7], -1),
    ],
    [
        ([1, 5, 6], -1),
        ([1, 4, 7], -1),
        ([3, 4, 5], -1),
        ([3, 6, 7], -1),
    ],
    [
        ([2, 4, 5], 1),
        ([2, 6, 7], 1),
        ([1, 4, 6], -1),
        ([1, 5, 7], 1),
    ],
    [
        ([5, 6, 7], -1),
        ([1, 2, 7], 1),
        ([1, 3, 6], 1),
        ([2, 3, 5], -1),
    ],
    [
        ([1, 2, 6], 1),
        ([4, 6, 7], 1),
        ([1, 3, 7], -1),
        ([2, 3, 4], 1),
    ],
    [
        ([4, 5, 7], -1),
        ([1, 2, 5], -1),
        ([1, 3, 4], -1),
        ([2, 3, 7], -1),
    ],
    [
        ([1, 3, 5], 1),
        ([1, 2, 4], -1),
        ([4, 5, 6], 1),
        ([2, 3, 6], 1),
    ],
];

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All k-subsets of {0..n} in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Lexicographic rank of a strictly increasing subset.
fn subset_rank(n: usize, set: &[usize]) -> usize {
    let k = set.len();
    let mut rank = 0;
    let mut prev = 0;
    for (pos, &s) in set.iter().enumerate() {
        for skipped in prev..s {
            rank += binomial(n - skipped - 1, k - pos - 1);
        }
        prev = s + 1;
    }
    rank
}

/// Sorts `idx` in place and returns the permutation sign, or 0 on a repeat.
fn sort_with_sign(idx: &mut [usize]) -> i8 {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        0
    } else {
        sign
    }
}

fn det(m: &mut [f64], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => {
            let mut d = 1.0;
            for c in 0..k {
                let piv = (c..k)
                    .max_by(|&a, &b| m[a * k + c].abs().total_cmp(&m[b * k + c].abs()))
                    .unwrap();
                if m[piv * k + c] == 0.0 {
                    return 0.0;
                }
                if piv != c {
                    for j in 0..k {
                        m.swap(piv * k + j, c * k + j);
                    }
                    d = -d;
                }
                let p = m[c * k + c];
                d *= p;
                for r in c + 1..k {
                    let f = m[r * k + c] / p;
                    for j in c..k {
                        m[r * k + j] -= f * m[c * k + j];
                    }
                }
            }
            d
        }
    }
}

/// A Riemannian metric on ℝⁿ with its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
}

impl Metric {
    pub fn identity(n: usize) -> Self {
        Metric {
            g: DMatrix::identity(n, n),
            g_inv: DMatrix::identity(n, n),
        }
    }

    /// Symmetric positive definite `g`; anything else is degenerate.
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::DegenerateMetric);
        }
        let sym = (&g - g.transpose()).amax();
        if sym > 1e-12 * g.amax().max(1.0) {
            return Err(Error::DegenerateMetric);
        }
        let chol = g.clone().cholesky().ok_or(Error::DegenerateMetric)?;
        let g_inv = chol.inverse();
        Ok(Metric { g, g_inv })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.g_inv
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| u[i] * self.g[(i, j)] * v[j]).sum::<f64>())
            .sum()
    }

    /// Upper-triangular `P` with `g = PᵀP`; its rows are an orthonormal coframe.
    fn coframe(&self) -> DMatrix<f64> {
        let l = self
            .g
            .clone()
            .cholesky()
            .expect("validated at construction")
            .unpack();
        l.transpose()
    }
}

/// A dense alternating k-form on ℝⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct AlternatingForm {
    degree: usize,
    dim: usize,
    coeffs: Vec<f64>,
}

impl AlternatingForm {
    pub fn zero(degree: usize, dim: usize) -> Self {
        AlternatingForm {
            degree,
            dim,
            coeffs: vec![0.0; binomial(dim, degree)],
        }
    }

    /// Builds a form from 1-based monomials `e^{i₁…i_k}` (any order, sign applied).
    pub fn from_monomials<const K: usize>(dim: usize, terms: &[([usize; K], f64)]) -> Self {
        let mut f = AlternatingForm::zero(K, dim);
        for (idx, c) in terms {
            let zero_based: Vec<usize> = idx.iter().map(|&i| i - 1).collect();
            f.add_to(&zero_based, *c);
        }
        f
    }

    /// The 1-form `Σ αᵢ eⁱ`.
    pub fn one_form(alpha: &[f64]) -> Self {
        AlternatingForm {
            degree: 1,
            dim: alpha.len(),
            coeffs: alpha.to_vec(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient of `e^I` for 0-based indices in any order.
    pub fn coefficient(&self, idx: &[usize]) -> f64 {
        let mut sorted = idx.to_vec();
        let sign = sort_with_sign(&mut sorted);
        if sign == 0 {
            return 0.0;
        }
        f64::from(sign) * self.coeffs[subset_rank(self.dim, &sorted)]
    }

    fn add_to(&mut self, idx: &[usize], value: f64) {
        let mut sorted = idx.to_vec();
        let sign = sort_with_sign(&mut sorted);
        if sign != 0 {
            self.coeffs[subset_rank(self.dim, &sorted)] += f64::from(sign) * value;
        }
    }

    /// `f(v₁,…,v_k)`.
    pub fn evaluate(&self, vectors: &[&[f64]]) -> f64 {
        let k = self.degree;
        assert_eq!(vectors.len(), k, "form of degree {k} needs {k} vectors");
        let mut buf = vec![0.0; k * k];
        let mut total = 0.0;
        for (set, &c) in subsets(self.dim, k).iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            for (r, &i) in set.iter().enumerate() {
                for (col, v) in vectors.iter().enumerate() {
                    buf[r * k + col] = v[i];
                }
            }
            total += c * det(&mut buf, k);
        }
        total
    }

    /// Evaluation on standard basis vectors (0-based).
    pub fn evaluate_basis(&self, idx: &[usize]) -> f64 {
        self.coefficient(idx)
    }

    pub fn scale(&self, s: f64) -> Self {
        AlternatingForm {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_shape(other);
        AlternatingForm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.assert_same_shape(other);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn assert_same_shape(&self, other: &Self) {
        assert!(
            self.degree == other.degree && self.dim == other.dim,
            "form shapes differ: ({}, {}) vs ({}, {})",
            self.degree,
            self.dim,
            other.degree,
            other.dim
        );
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = AlternatingForm::zero(self.degree + other.degree, self.dim);
        if out.degree > self.dim {
            return out;
        }
        let left = subsets(self.dim, self.degree);
        let right = subsets(self.dim, other.degree);
        let mut joined = Vec::with_capacity(out.degree);
        for (i, &a) in left.iter().zip(&self.coeffs) {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in right.iter().zip(&other.coeffs) {
                if b == 0.0 {
                    continue;
                }
                joined.clear();
                joined.extend_from_slice(i);
                joined.extend_from_slice(j);
                out.add_to(&joined, a * b);
            }
        }
        out
    }

    /// Interior product `v ⌟ f`, i.e. `f(v, ·, …)`.
    pub fn interior(&self, v: &[f64]) -> Self {
        assert!(self.degree > 0, "interior product of a 0-form");
        let mut out = AlternatingForm::zero(self.degree - 1, self.dim);
        for (set, &c) in subsets(self.dim, self.degree).iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            for (pos, &i) in set.iter().enumerate() {
                if v[i] == 0.0 {
                    continue;
                }
                let rest: Vec<usize> = set.iter().copied().filter(|&x| x != i).collect();
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                out.coeffs[subset_rank(self.dim, &rest)] += sign * v[i] * c;
            }
        }
        out
    }

    /// Pullback `(A*f)(v₁,…) = f(Av₁,…)`.
    pub fn pullback(&self, a: &DMatrix<f64>) -> Self {
        assert_eq!(a.nrows(), self.dim);
        assert_eq!(a.ncols(), self.dim);
        let k = self.degree;
        let sets = subsets(self.dim, k);
        let mut out = AlternatingForm::zero(k, self.dim);
        let mut buf = vec![0.0; k * k];
        for (o, target) in sets.iter().enumerate() {
            let mut total = 0.0;
            for (src, &c) in sets.iter().zip(&self.coeffs) {
                if c == 0.0 {
                    continue;
                }
                for (r, &i) in src.iter().enumerate() {
                    for (col, &j) in target.iter().enumerate() {
                        buf[r * k + col] = a[(i, j)];
                    }
                }
                total += c * det(&mut buf, k);
            }
            out.coeffs[o] = total;
        }
        out
    }

    /// Euclidean Hodge star with orientation `e^{1…n}`.
    fn euclidean_star(&self) -> Self {
        let n = self.dim;
        let mut out = AlternatingForm::zero(n - self.degree, n);
        for (set, &c) in subsets(n, self.degree).iter().zip(&self.coeffs) {
            let comp: Vec<usize> = (0..n).filter(|i| !set.contains(i)).collect();
            let mut full: Vec<usize> = set.iter().chain(&comp).copied().collect();
            let sign = sort_with_sign(&mut full);
            out.coeffs[subset_rank(n, &comp)] += f64::from(sign) * c;
        }
        out
    }

    /// Embeds a form on ℝⁿ into ℝᵐ (m ≥ n) along the first n coordinates.
    pub fn extend_dim(&self, m: usize) -> Self {
        assert!(m >= self.dim);
        let mut out = AlternatingForm::zero(self.degree, m);
        for (set, &c) in subsets(self.dim, self.degree).iter().zip(&self.coeffs) {
            out.coeffs[subset_rank(m, set)] = c;
        }
        out
    }

    pub fn to_json(&self) -> FormJson {
        FormJson {
            degree: self.degree,
            dim: self.dim,
            coeffs: subsets(self.dim, self.degree)
                .into_iter()
                .zip(&self.coeffs)
                .filter(|(_, &c)| c != 0.0)
                .map(|(set, &value)| FormTerm {
                    indices: set.iter().map(|i| i + 1).collect(),
                    value,
                })
                .collect(),
        }
    }

    pub fn from_json(json: &FormJson) -> Result<Self> {
        let mut f = AlternatingForm::zero(json.degree, json.dim);
        for term in &json.coeffs {
            if term.indices.len() != json.degree
                || term.indices.iter().any(|&i| i == 0 || i > json.dim)
            {
                return Err(Error::InvalidParameter(format!(
                    "bad index set {:?} for a {}-form on R^{}",
                    term.indices, json.degree, json.dim
                )));
            }
            let idx: Vec<usize> = term.indices.iter().map(|i| i - 1).collect();
            f.add_to(&idx, term.value);
        }
        Ok(f)
    }
}

/// JSON shape `{degree, dim, coeffs: [{indices, value}]}` with 1-based indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    pub degree: usize,
    pub dim: usize,
    pub coeffs: Vec<FormTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormTerm {
    pub indices: Vec<usize>,
    pub value: f64,
}

pub fn phi0() -> AlternatingForm {
    let terms: Vec<([usize; 3], f64)> = PHI0_TERMS
        .iter()
        .map(|(i, c)| (*i, f64::from(*c)))
        .collect();
    AlternatingForm::from_monomials(7, &terms)
}

pub fn star_phi0() -> AlternatingForm {
    let terms: Vec<([usize; 4], f64)> = STAR_PHI0_TERMS
        .iter()
        .map(|(i, c)| (*i, f64::from(*c)))
        .collect();
    AlternatingForm::from_monomials(7, &terms)
}

/// Hodge star for `metric`, orientation `e^{1…n}`.
pub fn hodge_star(f: &AlternatingForm, metric: &Metric) -> Result<AlternatingForm> {
    if metric.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: metric.dim(),
        });
    }
    let p = metric.coframe();
    let t = p.clone().try_inverse().ok_or(Error::DegenerateMetric)?;
    // Components in the orthonormal coframe, Euclidean star, then back.
    Ok(f.pullback(&t).euclidean_star().pullback(&p))
}

/// `Ψ = φ₀∧dt − *φ₀` on ℝ⁸ with `dt = e⁸`.
pub fn psi8() -> AlternatingForm {
    let dt = AlternatingForm::one_form(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    phi0()
        .extend_dim(8)
        .wedge(&dt)
        .sub(&star_phi0().extend_dim(8))
}

/// A tangent-valued 3-form on ℝ⁷: `χ = Σ a^α_J e^J ⊗ e_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorValued3Form {
    /// `coeffs[J][α]`, J in lexicographic order.
    coeffs: Vec<[f64; 7]>,
}

impl VectorValued3Form {
    pub fn coeffs(&self) -> &[[f64; 7]] {
        &self.coeffs
    }

    /// Coefficient `a^α_J` (0-based, J in any order with sign).
    pub fn coefficient(&self, triple: [usize; 3], alpha: usize) -> f64 {
        let mut sorted = triple;
        let sign = sort_with_sign(&mut sorted);
        if sign == 0 {
            return 0.0;
        }
        f64::from(sign) * self.coeffs[subset_rank(7, &sorted)][alpha]
    }

    pub fn evaluate(&self, u: &Vector7, v: &Vector7, w: &Vector7) -> Vector7 {
        let mut out = Vector7::zeros();
        for (set, a) in TRIPLES_7.iter().zip(&self.coeffs) {
            let m = Matrix3::new(
                u[set[0]], v[set[0]], w[set[0]], u[set[1]], v[set[1]], w[set[1]], u[set[2]],
                v[set[2]], w[set[2]],
            );
            let d = m.determinant();
            if d != 0.0 {
                for alpha in 0..7 {
                    out[alpha] += a[alpha] * d;
                }
            }
        }
        out
    }

    /// The printed expansion table as a vector-valued form.
    pub fn from_expansion_table() -> Self {
        let mut coeffs = vec![[0.0; 7]; 35];
        for (alpha, row) in CHI_EXPANSION_TABLE.iter().enumerate() {
            for (triple, c) in row {
                let mut idx = [triple[0] - 1, triple[1] - 1, triple[2] - 1];
                let sign = sort_with_sign(&mut idx);
                coeffs[subset_rank(7, &idx)][alpha] += f64::from(sign * c);
            }
        }
        VectorValued3Form { coeffs }
    }
}

const TRIPLES_7: [[usize; 3]; 35] = {
    let mut out = [[0; 3]; 35];
    let mut n = 0;
    let mut a = 0;
    while a < 7 {
        let mut b = a + 1;
        while b < 7 {
            let mut c = b + 1;
            while c < 7 {
                out[n] = [a, b, c];
                n += 1;
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }
    out
};

/// χ from `⟨χ(u,v,w), z⟩ = *φ(u,v,w,z)`, i.e. `a^α_{ijk} = *φ_{ijks} g^{sα}`.
pub fn chi_form(phi: &AlternatingForm, metric: &Metric) -> Result<VectorValued3Form> {
    if phi.degree() != 3 || phi.dim() != 7 {
        return Err(Error::InvalidParameter(
            "chi_form needs a 3-form on R^7".into(),
        ));
    }
    let star = hodge_star(phi, metric)?;
    let g_inv = metric.inverse();
    let coeffs = TRIPLES_7
        .iter()
        .map(|set| {
            let lowered: [f64; 7] =
                std::array::from_fn(|s| star.coefficient(&[set[0], set[1], set[2], s]));
            std::array::from_fn(|alpha| (0..7).map(|s| lowered[s] * g_inv[(s, alpha)]).sum())
        })
        .collect();
    Ok(VectorValued3Form { coeffs })
}

/// `χ(u,v,w) = −u×(v×w) − ⟨u,v⟩w + ⟨u,w⟩v`.
pub fn chi_via_cross(u: &Vector7, v: &Vector7, w: &Vector7) -> Vector7 {
    -cross7(u, &cross7(v, w)) - w * u.dot(v) + v * u.dot(w)
}

/// Metric of a positive 3-form: `B_ij = [i_{e_i}φ ∧ i_{e_j}φ ∧ φ]/6`
/// (coefficient of `e^{1…7}`), normalized as `g = det(B)^{-1/9} B`.
pub fn metric_from_phi(phi: &AlternatingForm) -> Result<Metric> {
    if phi.degree() != 3 || phi.dim() != 7 {
        return Err(Error::InvalidParameter(
            "metric_from_phi needs a 3-form on R^7".into(),
        ));
    }
    let contractions: Vec<AlternatingForm> = (0..7)
        .map(|i| {
            let mut e = [0.0; 7];
            e[i] = 1.0;
            phi.interior(&e)
        })
        .collect();
    let mut b = DMatrix::zeros(7, 7);
    for i in 0..7 {
        for j in i..7 {
            let top = contractions[i].wedge(&contractions[j]).wedge(phi);
            let v = top.coeffs()[0] / 6.0;
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    if b.clone().cholesky().is_none() {
        return Err(Error::FormNotPositive);
    }
    let det = b.determinant();
    Metric::new(b * det.powf(-1.0 / 9.0))
}

/// `u×v` for `φ`: the g-dual of the 1-form `φ(u, v, ·)`.
pub fn cross_from_phi(phi: &AlternatingForm, metric: &Metric, u: &Vector7, v: &Vector7) -> Vector7 {
    let one = phi.interior(u.as_slice()).interior(v.as_slice());
    let lowered = DVector::from_column_slice(one.coeffs());
    let raised = metric.inverse() * lowered;
    Vector7::from_fn(|r, _| raised[r])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn subset_ranks_are_lexicographic() {
        for (n, k) in [(7, 3), (7, 4), (8, 4), (5, 0), (6, 6)] {
            for (r, s) in subsets(n, k).iter().enumerate() {
                assert_eq!(subset_rank(n, s), r);
            }
            assert_eq!(subsets(n, k).len(), binomial(n, k));
        }
    }

    #[test]
    fn phi0_values() {
        let p = phi0();
        let ev = |a, b, c| p.evaluate(&[&e(7, a), &e(7, b), &e(7, c)]);
        assert_eq!(ev(0, 1, 2), 1.0);
        assert_eq!(ev(1, 4, 6), -1.0);
        assert_eq!(ev(0, 1, 3), 0.0);
        assert_eq!(ev(1, 0, 2), -1.0);
    }

    #[test]
    fn star_phi0_values() {
        let s = star_phi0();
        let ev = |i: [usize; 4]| s.evaluate(&[&e(7, i[0]), &e(7, i[1]), &e(7, i[2]), &e(7, i[3])]);
        assert_eq!(ev([3, 4, 5, 6]), 1.0);
        assert_eq!(ev([0, 1, 3, 6]), -1.0);
        assert_eq!(ev([0, 1, 2, 3]), 0.0);
    }

    #[test]
    fn hodge_of_phi0_is_star_phi0() {
        let id = Metric::identity(7);
        let s = hodge_star(&phi0(), &id).unwrap();
        assert_eq!(s.max_abs_diff(&star_phi0()), 0.0);
        let back = hodge_star(&s, &id).unwrap();
        assert_eq!(back.max_abs_diff(&phi0()), 0.0);
    }

    #[test]
    fn hodge_of_e1() {
        let s = hodge_star(&AlternatingForm::one_form(&e(7, 0)), &Metric::identity(7)).unwrap();
        let expected = AlternatingForm::from_monomials(7, &[([2, 3, 4, 5, 6, 7], 1.0)]);
        assert_eq!(s, expected);
    }

    #[test]
    fn hodge_rejects_dimension_mismatch() {
        assert!(matches!(
            hodge_star(&phi0(), &Metric::identity(8)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn degenerate_metric_rejected() {
        let mut g = DMatrix::identity(7, 7);
        g[(3, 3)] = 0.0;
        assert_eq!(Metric::new(g), Err(Error::DegenerateMetric));
        let mut g = DMatrix::<f64>::identity(7, 7);
        g[(0, 1)] = 0.5;
        assert_eq!(Metric::new(g), Err(Error::DegenerateMetric));
    }

    #[test]
    fn hodge_is_involution_for_curved_metric() {
        let a = DMatrix::from_fn(7, 7, |i, j| {
            if i == j {
                2.0
            } else {
                0.1 * ((i * 7 + j) % 5) as f64
            }
        });
        let g = Metric::new(a.transpose() * &a).unwrap();
        let s = hodge_star(&phi0(), &g).unwrap();
        let back = hodge_star(&s, &g).unwrap();
        assert!(back.max_abs_diff(&phi0()) < 1e-12);
    }

    #[test]
    fn chi_table_examples() {
        let chi = chi_form(&phi0(), &Metric::identity(7)).unwrap();
        let b = |i| Vector7::from_fn(|r, _| if r == i { 1.0 } else { 0.0 });
        assert_eq!(chi.evaluate(&b(1), &b(4), &b(5)), b(0));
        assert_eq!(chi.evaluate(&b(0), &b(1), &b(2)), Vector7::zeros());
        assert_eq!(chi.evaluate(&b(0), &b(1), &b(3)), -b(6));
        assert_eq!(chi_via_cross(&b(1), &b(4), &b(5)), b(0));
        assert_eq!(chi_via_cross(&b(0), &b(1), &b(2)), Vector7::zeros());
    }

    #[test]
    fn expansion_table_matches_chi_form_exactly() {
        let chi = chi_form(&phi0(), &Metric::identity(7)).unwrap();
        assert_eq!(chi, VectorValued3Form::from_expansion_table());
    }

    #[test]
    fn metric_of_phi0_is_identity() {
        let g = metric_from_phi(&phi0()).unwrap();
        assert!((g.matrix() - DMatrix::<f64>::identity(7, 7)).amax() < 1e-14);
    }

    #[test]
    fn negative_phi_is_not_positive() {
        assert_eq!(
            metric_from_phi(&phi0().scale(-1.0)),
            Err(Error::FormNotPositive)
        );
        assert!(metric_from_phi(&AlternatingForm::zero(3, 7)).is_err());
    }

    #[test]
    fn pullback_metric_covariance() {
        let a = DMatrix::from_fn(7, 7, |i, j| {
            if i == j {
                1.5
            } else {
                0.05 * (i as f64 - j as f64)
            }
        });
        assert!(a.determinant() > 0.0);
        let g = metric_from_phi(&phi0().pullback(&a)).unwrap();
        assert!((g.matrix() - a.transpose() * &a).amax() < 1e-12);
    }

    #[test]
    fn cross_from_phi_basis() {
        let b = |i| Vector7::from_fn(|r, _| if r == i { 1.0 } else { 0.0 });
        let id = Metric::identity(7);
        assert_eq!(cross_from_phi(&phi0(), &id, &b(0), &b(1)), b(2));
        let u = Vector7::from([0.3, -0.1, 0.7, 1.0, -2.0, 0.4, 0.9]);
        assert!(cross_from_phi(&phi0(), &id, &u, &u).amax() < 1e-15);
    }

    #[test]
    fn psi8_values() {
        let psi = psi8();
        assert_eq!(psi.coefficient(&[0, 1, 2, 7]), 1.0);
        assert_eq!(psi.coefficient(&[3, 4, 5, 6]), -1.0);
        assert_eq!(psi.coefficient(&[0, 1, 2, 3]), 0.0);
    }

    #[test]
    fn wedge_sign_and_interior() {
        let a = AlternatingForm::one_form(&e(4, 1));
        let b = AlternatingForm::one_form(&e(4, 0));
        assert_eq!(a.wedge(&b).coefficient(&[0, 1]), -1.0);
        let f = AlternatingForm::from_monomials(4, &[([1, 2, 3], 2.0)]);
        let i = f.interior(&e(4, 1));
        // e2 ⌟ e^{123} = −e^{13}
        assert_eq!(i.coefficient(&[0, 2]), -2.0);
    }

    #[test]
    fn json_roundtrip() {
        let json = psi8().to_json();
        assert_eq!(json.coeffs.len(), 14);
        let back = AlternatingForm::from_json(&json).unwrap();
        assert_eq!(back, psi8());
        let s = serde_json::to_string(&phi0().to_json()).unwrap();
        assert!(s.starts_with(r#"{"degree":3,"dim":7,"coeffs":[{"indices":[1,2,3],"value":1.0}"#));
    }

    #[test]
    fn json_rejects_bad_indices() {
        let bad = FormJson {
            degree: 2,
            dim: 3,
            coeffs: vec![FormTerm {
                indices: vec![1, 4],
                value: 1.0,
            }],
        };
        assert!(AlternatingForm::from_json(&bad).is_err());
    }

    #[test]
    fn general_determinant_path() {
        let e1234 = AlternatingForm::from_monomials(5, &[([1, 2, 3, 4], 1.0)]);
        let v: Vec<Vec<f64>> = vec![
            vec![2.0, 0.0, 0.0, 0.0, 1.0],
            vec![1.0, 3.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 4.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 5.0, 0.0],
        ];
        let refs: Vec<&[f64]> = v.iter().map(|x| x.as_slice()).collect();
        assert!((e1234.evaluate(&refs) - 120.0).abs() < 1e-12);
    }
}
