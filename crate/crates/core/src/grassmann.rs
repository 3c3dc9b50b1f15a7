//! Oriented planes, calibration tests, the complex structure on normal
//! 4-planes, projection onto the associative Grassmannian, and the χ-flow
//! on periodic 3-lattices in T⁷.

use nalgebra::{DMatrix, DVector, SMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{chi_via_cross, phi0, psi8, AlternatingForm};
use crate::lattice::{neighbor, site_coords};
use crate::octonion::{cross7, Vector7};

/// Gram tolerance for frames.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// Rank threshold relative to the largest singular value.
pub const RANK_RTOL: f64 = 1e-8;

/// An ordered orthonormal k-frame in ℝⁿ, stored as the columns of an n×k matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    columns: DMatrix<f64>,
}

impl Frame {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let k = columns.ncols();
        let defect = (columns.transpose() * &columns - DMatrix::identity(k, k)).amax();
        if defect > ORTHONORMAL_TOL {
            return Err(Error::NonOrthonormalFrame { defect });
        }
        Ok(Frame { columns })
    }

    pub fn from_vectors(vectors: &[DVector<f64>]) -> Result<Self> {
        Frame::new(DMatrix::from_columns(vectors))
    }

    /// Span of standard basis vectors (0-based indices) in ℝⁿ.
    pub fn coordinate(n: usize, idx: &[usize]) -> Self {
        let mut m = DMatrix::zeros(n, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            m[(i, c)] = 1.0;
        }
        Frame { columns: m }
    }

    /// Modified Gram–Schmidt. A column that collapses is replaced by the
    /// first standard basis vector, in index order, that survives.
    pub fn orthonormalize(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut q: Vec<DVector<f64>> = Vec::with_capacity(m.ncols());
        let scale = m.amax().max(1.0);
        for c in 0..m.ncols() {
            let mut v = reduce(m.column(c).into_owned(), &q);
            if v.norm() <= 1e-10 * scale {
                v = (0..n)
                    .map(|i| {
                        reduce(
                            DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 }),
                            &q,
                        )
                    })
                    .find(|w| w.norm() > 1e-6)
                    .expect("k ≤ n leaves a surviving basis vector");
            }
            let norm = v.norm();
            q.push(v / norm);
        }
        Frame {
            columns: DMatrix::from_columns(&q),
        }
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.columns.column(i).into_owned()
    }

    pub fn vector7(&self, i: usize) -> Vector7 {
        assert_eq!(self.dim(), 7);
        Vector7::from_fn(|r, _| self.columns[(r, i)])
    }

    /// Orthogonal projector onto the span.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.columns * self.columns.transpose()
    }

    /// Orthonormal basis of the orthogonal complement, built from the
    /// standard basis in index order.
    pub fn complement(&self) -> Frame {
        let n = self.dim();
        let mut q: Vec<DVector<f64>> = (0..self.rank()).map(|i| self.vector(i)).collect();
        let mut out = Vec::new();
        for i in 0..n {
            if out.len() == n - self.rank() {
                break;
            }
            let v = reduce(
                DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 }),
                &q,
            );
            if v.norm() > 1e-6 {
                let v = reduce(v.clone(), &q);
                let v = &v / v.norm();
                q.push(v.clone());
                out.push(v);
            }
        }
        Frame {
            columns: DMatrix::from_columns(&out),
        }
    }

    /// Applies `A` to every vector (the result is re-validated).
    pub fn transform(&self, a: &DMatrix<f64>) -> Result<Frame> {
        Frame::new(a * &self.columns)
    }
}

fn reduce(mut v: DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&v);
            v -= b * c;
        }
    }
    v
}

/// Calibration value and χ-defect of a 3-plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub phi_value: f64,
    pub chi_defect: Vector7,
    pub defect_norm: f64,
    pub is_associative: bool,
}

/// Default defect threshold for `is_associative`.
pub const ASSOCIATIVE_TOL: f64 = 1e-10;

fn require_shape(frame: &Frame, dim: usize, rank: usize) -> Result<()> {
    if frame.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: frame.dim(),
        });
    }
    if frame.rank() != rank {
        return Err(Error::DimensionMismatch {
            expected: rank,
            found: frame.rank(),
        });
    }
    Ok(())
}

fn phi0_value(u: &Vector7, v: &Vector7, w: &Vector7) -> f64 {
    cross7(u, v).dot(w)
}

/// `φ₀(L)` and `χ(L)` of an oriented orthonormal 3-frame in ℝ⁷. On unit
/// frames `φ₀(L)² + |χ(L)|² = 1`.
pub fn associative_test(frame: &Frame, tol: f64) -> Result<CalibrationReport> {
    require_shape(frame, 7, 3)?;
    let (u, v, w) = (frame.vector7(0), frame.vector7(1), frame.vector7(2));
    let chi = chi_via_cross(&u, &v, &w);
    let defect_norm = chi.norm();
    Ok(CalibrationReport {
        phi_value: phi0_value(&u, &v, &w),
        chi_defect: chi,
        defect_norm,
        is_associative: defect_norm < tol,
    })
}

/// `max |φ₀(a,b,c)|` over triples of frame vectors; zero iff coassociative.
pub fn coassociative_test(frame: &Frame) -> Result<f64> {
    coassociative_test_with(frame, &phi0())
}

pub fn coassociative_test_with(frame: &Frame, phi: &AlternatingForm) -> Result<f64> {
    require_shape(frame, 7, 4)?;
    let cols: Vec<DVector<f64>> = (0..4).map(|i| frame.vector(i)).collect();
    let mut worst: f64 = 0.0;
    for (a, b, c) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
        let val = phi.evaluate(&[cols[a].as_slice(), cols[b].as_slice(), cols[c].as_slice()]);
        worst = worst.max(val.abs());
    }
    Ok(worst)
}

/// `Ψ(X)` for an oriented orthonormal 4-frame in ℝ⁸; 1 iff Cayley.
pub fn cayley_test(frame: &Frame) -> Result<f64> {
    require_shape(frame, 8, 4)?;
    let cols: Vec<DVector<f64>> = (0..4).map(|i| frame.vector(i)).collect();
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    Ok(psi8().evaluate(&refs))
}

/// The complex structure `j(X) = χ(u,v,X)` on the normal 4-plane of an
/// associative plane.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalComplexStructure {
    /// Orthonormal basis of L⊥ (7×4).
    pub basis: Frame,
    /// Matrix of j in `basis`.
    pub matrix: SMatrix<f64, 4, 4>,
    u: Vector7,
    v: Vector7,
}

impl NormalComplexStructure {
    pub fn apply(&self, x: &Vector7) -> Vector7 {
        chi_via_cross(&self.u, &self.v, x)
    }

    /// `max |j² + I|` and `max |jᵀj − I|`.
    pub fn defects(&self) -> (f64, f64) {
        let id = SMatrix::<f64, 4, 4>::identity();
        let sq = (self.matrix * self.matrix + id).amax();
        let orth = (self.matrix.transpose() * self.matrix - id).amax();
        (sq, orth)
    }
}

pub fn normal_complex_structure(
    plane: &Frame,
    u: &Vector7,
    v: &Vector7,
) -> Result<NormalComplexStructure> {
    let report = associative_test(plane, ASSOCIATIVE_TOL)?;
    if !report.is_associative {
        return Err(Error::PlaneNotAssociative {
            defect: report.defect_norm,
        });
    }
    let gram = (u.norm_squared() - 1.0)
        .abs()
        .max((v.norm_squared() - 1.0).abs())
        .max(u.dot(v).abs());
    let p = plane.projector();
    let off_plane = |x: &Vector7| {
        let xd = DVector::from_column_slice(x.as_slice());
        (&xd - &p * &xd).amax()
    };
    let outside = off_plane(u).max(off_plane(v));
    if gram > 1e-10 || outside > 1e-10 {
        return Err(Error::NonOrthonormalFrame {
            defect: gram.max(outside),
        });
    }
    let basis = plane.complement();
    let cols: Vec<Vector7> = (0..4).map(|i| basis.vector7(i)).collect();
    let images: Vec<Vector7> = cols.iter().map(|x| chi_via_cross(u, v, x)).collect();
    let matrix = SMatrix::<f64, 4, 4>::from_fn(|r, c| cols[r].dot(&images[c]));
    Ok(NormalComplexStructure {
        basis,
        matrix,
        u: *u,
        v: *v,
    })
}

/// `count` Haar-uniform oriented 3-frames in ℝ⁷ from Gaussian matrices.
/// The generator is ChaCha8 seeded with `seed`.
pub fn sample_grassmann(seed: u64, count: usize) -> Vec<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = DMatrix::from_fn(7, 3, |_, _| StandardNormal.sample(&mut rng));
            Frame::orthonormalize(&m)
        })
        .collect()
}

/// Euclidean gradient of `|χ(y₁,y₂,y₃)|²` by multilinearity.
pub fn defect_gradient(y: [&Vector7; 3]) -> [Vector7; 3] {
    let c = chi_via_cross(y[0], y[1], y[2]);
    [
        chi_via_cross(y[1], y[2], &c) * -2.0,
        chi_via_cross(y[0], y[2], &c) * 2.0,
        chi_via_cross(y[0], y[1], &c) * -2.0,
    ]
}

/// Riemannian gradient descent on `|χ(L)|²` over G(3,7) with a
/// Gram–Schmidt retraction.
pub fn project_to_associative(
    start: &Frame,
    step: f64,
    max_iter: usize,
    tol: f64,
) -> Result<Frame> {
    require_shape(start, 7, 3)?;
    let mut frame = start.clone();
    let mut defect = associative_test(&frame, tol)?.defect_norm;
    for _ in 0..max_iter {
        if defect < tol {
            return Ok(frame);
        }
        let y: Vec<Vector7> = (0..3).map(|i| frame.vector7(i)).collect();
        let g = defect_gradient([&y[0], &y[1], &y[2]]);
        let ymat = frame.matrix();
        let gmat = DMatrix::from_fn(7, 3, |r, c| g[c][r]);
        let horizontal = &gmat - ymat * (ymat.transpose() * &gmat);
        frame = Frame::orthonormalize(&(ymat - horizontal * step));
        defect = associative_test(&frame, tol)?.defect_norm;
    }
    if defect < tol {
        return Ok(frame);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        defect,
    })
}

/// The 4×12 derivative of `L ↦ χ(L)` (projected to L⊥) over horizontal
/// directions `Hom(L, L⊥)`.
pub fn linearized_defect(plane: &Frame) -> Result<DMatrix<f64>> {
    require_shape(plane, 7, 3)?;
    let normal = plane.complement();
    let y: Vec<Vector7> = (0..3).map(|i| plane.vector7(i)).collect();
    let n: Vec<Vector7> = (0..4).map(|i| normal.vector7(i)).collect();
    let mut m = DMatrix::zeros(4, 12);
    for a in 0..3 {
        for b in 0..4 {
            let mut args = y.clone();
            args[a] = n[b];
            let d = chi_via_cross(&args[0], &args[1], &args[2]);
            for r in 0..4 {
                m[(r, a * 4 + b)] = n[r].dot(&d);
            }
        }
    }
    Ok(m)
}

/// Numerical rank with threshold `RANK_RTOL · σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > RANK_RTOL * max).count()
}

/// A periodic N³ lattice of points in T⁷ = ℝ⁷/ℤ⁷: the flat embedding
/// `x ↦ (x₁, x₂, x₃, 0, 0, 0, 0)` plus a periodic displacement.
#[derive(Clone, Debug, PartialEq)]
pub struct Immersion3Lattice {
    n: usize,
    displacement: Vec<Vector7>,
}

/// Which eigenspace of the linearized flow a perturbation lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowMode {
    Decaying,
    Growing,
}

impl Immersion3Lattice {
    pub fn flat(n: usize) -> Self {
        Immersion3Lattice {
            n,
            displacement: vec![Vector7::zeros(); n * n * n],
        }
    }

    /// Displacement `f(x)` at grid coordinates `x ∈ [0,1)³`.
    pub fn from_displacement(n: usize, f: impl Fn([f64; 3]) -> Vector7) -> Self {
        let h = 1.0 / n as f64;
        let displacement = (0..n * n * n)
            .map(|s| {
                let [i, j, k] = site_coords(n, s);
                f([i as f64 * h, j as f64 * h, k as f64 * h])
            })
            .collect();
        Immersion3Lattice { n, displacement }
    }

    /// Normal perturbation `ε(sin(2πx₁)e₄ ∓ cos(2πx₁) e₁×e₄)`. The decaying
    /// sign lies in the negative eigenspace of the linearized flow.
    pub fn normal_mode(n: usize, eps: f64, mode: FlowMode) -> Self {
        let e1 = Vector7::from_fn(|r, _| if r == 0 { 1.0 } else { 0.0 });
        let e4 = Vector7::from_fn(|r, _| if r == 3 { 1.0 } else { 0.0 });
        let rot = cross7(&e1, &e4);
        let sign = match mode {
            FlowMode::Decaying => -1.0,
            FlowMode::Growing => 1.0,
        };
        let tau = std::f64::consts::TAU;
        Self::from_displacement(n, |x| {
            (e4 * (tau * x[0]).sin() + rot * (sign * (tau * x[0]).cos())) * eps
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn displacement(&self) -> &[Vector7] {
        &self.displacement
    }

    pub fn position(&self, site: usize) -> Vector7 {
        let h = self.spacing();
        let [i, j, k] = site_coords(self.n, site);
        let mut p = self.displacement[site];
        p[0] += i as f64 * h;
        p[1] += j as f64 * h;
        p[2] += k as f64 * h;
        p
    }

    /// Central-difference tangent vectors with periodic wrap.
    pub fn tangents(&self, site: usize) -> [Vector7; 3] {
        let h = self.spacing();
        std::array::from_fn(|dir| {
            let fwd = self.displacement[neighbor(self.n, site, dir, 1)];
            let bwd = self.displacement[neighbor(self.n, site, dir, -1)];
            let mut t = (fwd - bwd) / (2.0 * h);
            t[dir] += 1.0;
            t
        })
    }

    /// χ of the orthonormalized tangent frame at `site`.
    pub fn defect(&self, site: usize) -> Result<Vector7> {
        let t = self.tangents(site);
        let vol2 = gram_det(&t);
        if !(vol2 > 1e-20) {
            return Err(Error::FrameDegenerate { site });
        }
        let m = DMatrix::from_fn(7, 3, |r, c| t[c][r]);
        let f = Frame::orthonormalize(&m);
        Ok(chi_via_cross(&f.vector7(0), &f.vector7(1), &f.vector7(2)))
    }

    pub fn defects(&self) -> Result<Vec<Vector7>> {
        (0..self.displacement.len())
            .into_par_iter()
            .map(|s| self.defect(s))
            .collect()
    }

    pub fn max_defect(&self) -> Result<f64> {
        Ok(self.defects()?.iter().map(|d| d.norm()).fold(0.0, f64::max))
    }

    /// Rows `(site, position, defect norm)` for snapshots.
    pub fn snapshot(&self) -> Result<Vec<(usize, Vector7, f64)>> {
        let defects = self.defects()?;
        Ok(defects
            .iter()
            .enumerate()
            .map(|(s, d)| (s, self.position(s), d.norm()))
            .collect())
    }
}

fn gram_det(t: &[Vector7; 3]) -> f64 {
    let g = nalgebra::Matrix3::from_fn(|r, c| t[r].dot(&t[c]));
    g.determinant()
}

/// One explicit step: every site moves by `dt · χ(tangent frame)`.
pub fn chi_flow_step(lattice: &Immersion3Lattice, dt: f64) -> Result<Immersion3Lattice> {
    let defects = lattice.defects()?;
    let displacement = lattice
        .displacement
        .iter()
        .zip(&defects)
        .map(|(u, d)| u + d * dt)
        .collect();
    Ok(Immersion3Lattice {
        n: lattice.n,
        displacement,
    })
}
