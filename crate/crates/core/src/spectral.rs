//! Sparse symmetric matrices and a Chebyshev-filtered subspace eigensolver
//! for the eigenvalues of smallest magnitude.
//!
//! The filter works on `A²` (positive semidefinite, so "smallest magnitude"
//! becomes "lowest"), and a final Rayleigh–Ritz step on `A` itself recovers
//! signed eigenvalues. The subspace is always cut at a spectral gap of `A²`,
//! which makes it `A`-invariant; a degenerate cluster straddling the
//! requested count is therefore returned whole.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a square matrix from per-row `(column, value)` lists;
    /// duplicates are summed.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n, "column {c} out of range");
                if last == Some(c) {
                    *values.last_mut().expect("entry exists") += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .into_par_iter()
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `A X` for a dense block.
    pub fn matmul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.n);
        let m = x.ncols();
        // Row-major copy so each sparse entry scales one contiguous row.
        let xt = x.transpose();
        let src = xt.as_slice();
        let mut out = vec![0.0; self.n * m];
        out.par_chunks_mut(m.max(1))
            .enumerate()
            .for_each(|(r, dst)| {
                for (c, v) in self.row(r) {
                    for (d, s) in dst.iter_mut().zip(&src[c * m..(c + 1) * m]) {
                        *d += v * s;
                    }
                }
            });
        DMatrix::from_row_slice(self.n, m, &out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut rows = vec![Vec::new(); self.n];
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                rows[c].push((r, v));
            }
        }
        CsrMatrix::from_rows(self.n, rows)
    }

    /// `max |A − Aᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            let mut a: Vec<(usize, f64)> = self.row(r).collect();
            let b: Vec<(usize, f64)> = t.row(r).collect();
            for (c, v) in b {
                a.push((c, -v));
            }
            a.sort_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < a.len() {
                let mut s = 0.0;
                let c = a[i].0;
                while i < a.len() && a[i].0 == c {
                    s += a[i].1;
                    i += 1;
                }
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    /// Gershgorin bound on the spectral radius.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Eigenpairs of smallest magnitude.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: DMatrix<f64>,
    /// `max ‖A y − λ y‖`.
    pub residual: f64,
    pub iterations: usize,
}

impl Eigensystem {
    /// Eigenvectors with `|λ| < tol`.
    pub fn kernel(&self, tol: f64) -> DMatrix<f64> {
        let idx: Vec<usize> = (0..self.values.len())
            .filter(|&i| self.values[i].abs() < tol)
            .collect();
        DMatrix::from_fn(self.vectors.nrows(), idx.len(), |r, c| {
            self.vectors[(r, idx[c])]
        })
    }

    /// `max |λ_i + λ_{m−1−i}|` over the ascending list.
    pub fn symmetry_defect(&self) -> f64 {
        symmetry_defect(&self.values)
    }
}

pub fn symmetry_defect(sorted: &[f64]) -> f64 {
    sorted
        .iter()
        .zip(sorted.iter().rev())
        .fold(0.0, |m, (a, b)| m.max((a + b).abs()))
}

/// Solver controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Chebyshev polynomial degree per sweep.
    pub degree: usize,
    pub max_iterations: usize,
    /// Residual tolerance for `A²` relative to its spectral bound.
    pub tol: f64,
    /// Relative gap in `A²` that separates clusters.
    pub cluster_rtol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            degree: 20,
            max_iterations: 400,
            tol: 1e-13,
            cluster_rtol: 1e-7,
        }
    }
}

/// At least `count` eigenpairs of symmetric `a` of smallest |λ|, extended
/// to the end of the last degenerate cluster. The random start block comes
/// from ChaCha8 seeded with `seed`.
pub fn smallest_magnitude(
    a: &CsrMatrix,
    count: usize,
    seed: u64,
    opts: SolverOptions,
) -> Result<Eigensystem> {
    let n = a.dim();
    if count == 0 {
        return Ok(Eigensystem {
            values: Vec::new(),
            vectors: DMatrix::zeros(n, 0),
            residual: 0.0,
            iterations: 0,
        });
    }
    if count >= n / 2 {
        return dense_smallest(a, count, opts);
    }
    let bound = a.gershgorin_bound().powi(2).max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let guard = 16.max(count);
    let mut m = (count + guard).min(n);
    let mut x = random_block(&mut rng, n, m);
    let mut iterations = 0;
    let mut last_residual = f64::INFINITY;
    loop {
        if iterations >= opts.max_iterations {
            return Err(Error::EigenNoConvergence {
                iterations,
                residual: last_residual,
            });
        }
        // Rayleigh–Ritz on A².
        x = orthonormalize(&x);
        let ax = a.matmul(&x);
        let h = ax.transpose() * &ax;
        let (mu, v) = sorted_eigen(&h);
        x = &x * &v;
        let ax = &ax * &v;
        let a2x = a.matmul(&ax);

        let gap = opts.cluster_rtol * bound;
        let cut = (count..m.saturating_sub(guard / 2)).find(|&p| mu[p] - mu[p - 1] > gap);
        let Some(p) = cut else {
            if m >= n / 2 {
                return dense_smallest(a, count, opts);
            }
            let extra = random_block(&mut rng, n, m);
            x = DMatrix::from_fn(
                n,
                2 * m,
                |r, c| if c < m { x[(r, c)] } else { extra[(r, c - m)] },
            );
            m = (2 * m).min(n);
            x = x.columns(0, m).into_owned();
            continue;
        };
        let residual = (0..p)
            .map(|i| (a2x.column(i) - x.column(i) * mu[i]).norm())
            .fold(0.0, f64::max);
        if residual <= opts.tol * bound {
            return finish(a, &x.columns(0, p).into_owned(), iterations);
        }
        last_residual = residual;
        x = chebyshev_filter(a, &x, opts.degree, mu[m - 1], bound);
        iterations += 1;
    }
}

fn finish(a: &CsrMatrix, basis: &DMatrix<f64>, iterations: usize) -> Result<Eigensystem> {
    let ab = a.matmul(basis);
    let mut k = basis.transpose() * &ab;
    k = (&k + k.transpose()) * 0.5;
    let (values, w) = sorted_eigen(&k);
    let vectors = basis * &w;
    let av = ab * &w;
    let residual = (0..values.len())
        .map(|i| (av.column(i) - vectors.column(i) * values[i]).norm())
        .fold(0.0, f64::max);
    Ok(Eigensystem {
        values,
        vectors,
        residual,
        iterations,
    })
}

/// Dense fallback used when the request covers a large fraction of the
/// spectrum.
fn dense_smallest(a: &CsrMatrix, count: usize, opts: SolverOptions) -> Result<Eigensystem> {
    let dense = a.to_dense();
    let (values, vectors) = sorted_eigen(&dense);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].abs().total_cmp(&values[j].abs()));
    let sq: Vec<f64> = order.iter().map(|&i| values[i] * values[i]).collect();
    let bound = sq.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let mut p = count.min(order.len());
    while p < order.len() && sq[p] - sq[p - 1] <= opts.cluster_rtol * bound {
        p += 1;
    }
    let mut keep: Vec<usize> = order[..p].to_vec();
    keep.sort_unstable();
    let basis = DMatrix::from_fn(dense.nrows(), p, |r, c| vectors[(r, keep[c])]);
    finish(a, &basis, 0)
}

fn chebyshev_filter(
    a: &CsrMatrix,
    x: &DMatrix<f64>,
    degree: usize,
    low: f64,
    high: f64,
) -> DMatrix<f64> {
    // Damps [low, high] of A², amplifies below low.
    let e = 0.5 * (high - low).max(f64::MIN_POSITIVE);
    let c = 0.5 * (high + low);
    let op = |y: &DMatrix<f64>| {
        let ay = a.matmul(y);
        (a.matmul(&ay) - y * c) / e
    };
    let mut prev = x.clone();
    let mut cur = op(x);
    for _ in 1..degree {
        let next = op(&cur) * 2.0 - &prev;
        prev = cur;
        cur = next;
        let scale = cur.amax();
        if scale > 1e100 {
            cur /= scale;
            prev /= scale;
        }
    }
    cur
}

fn random_block(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| StandardNormal.sample(rng))
}

fn orthonormalize(x: &DMatrix<f64>) -> DMatrix<f64> {
    // Householder QR: Q is orthonormal to machine precision even when the
    // filtered block is nearly rank deficient.
    x.clone().qr().q()
}

/// Symmetric eigendecomposition with ascending eigenvalues.
pub fn sorted_eigen(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(h.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `L − 2I` for the periodic second difference `L`: eigenvalues
    /// `−2cos(2πk/n)`, symmetric about zero when 4 divides n.
    fn shifted_ring(n: usize) -> CsrMatrix {
        let rows = (0..n)
            .map(|r| vec![((r + 1) % n, -1.0), ((r + n - 1) % n, -1.0)])
            .collect();
        CsrMatrix::from_rows(n, rows)
    }

    fn ring_spectrum(n: usize) -> Vec<f64> {
        let mut exact: Vec<f64> = (0..n)
            .map(|k| -2.0 * (std::f64::consts::TAU * k as f64 / n as f64).cos())
            .collect();
        exact.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        exact
    }

    #[test]
    fn csr_basics() {
        let m = CsrMatrix::from_rows(2, vec![vec![(0, 1.0), (1, 2.0), (1, 1.0)], vec![(0, 3.0)]]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![4.0, 3.0]);
        assert_eq!(m.asymmetry(), 0.0);
        let m = CsrMatrix::from_rows(2, vec![vec![(1, 2.0)], vec![(0, 3.0)]]);
        assert_eq!(m.asymmetry(), 1.0);
        assert_eq!(m.transpose().to_dense(), m.to_dense().transpose());
    }

    #[test]
    fn solver_matches_closed_form() {
        let n = 120;
        let es = smallest_magnitude(&shifted_ring(n), 6, 1, SolverOptions::default()).unwrap();
        // Clusters by |λ|: {0,0}, {±λ₁ twice}, … ; 6 is complete.
        assert_eq!(es.values.len(), 6);
        let mut exact = ring_spectrum(n)[..6].to_vec();
        exact.sort_by(f64::total_cmp);
        for (a, b) in es.values.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert!(es.residual < 1e-8);
        assert!(es.symmetry_defect() < 1e-10);
        assert_eq!(es.kernel(1e-8).ncols(), 2);
    }

    #[test]
    fn solver_completes_clusters() {
        let es = smallest_magnitude(&shifted_ring(120), 3, 1, SolverOptions::default()).unwrap();
        assert_eq!(es.values.len(), 6);
    }

    #[test]
    fn dense_fallback_agrees() {
        let a = shifted_ring(16);
        let es = smallest_magnitude(&a, 10, 1, SolverOptions::default()).unwrap();
        let mut exact = ring_spectrum(16)[..es.values.len()].to_vec();
        exact.sort_by(f64::total_cmp);
        for (x, y) in es.values.iter().zip(&exact) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let a = shifted_ring(64);
        let x = smallest_magnitude(&a, 4, 9, SolverOptions::default()).unwrap();
        let y = smallest_magnitude(&a, 4, 9, SolverOptions::default()).unwrap();
        assert_eq!(x.values, y.values);
    }

    #[test]
    fn symmetry_defect_of_lists() {
        assert_eq!(symmetry_defect(&[-2.0, -1.0, 1.0, 2.0]), 0.0);
        assert_eq!(symmetry_defect(&[-2.0, 1.0, 2.0]), 2.0);
    }
}
