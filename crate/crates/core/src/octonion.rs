//! Quaternions, octonions and the cross products built from them.
//!
//! Octonions are Cayley–Dickson pairs of quaternions with the product
//! `(a,b)(c,d) = (ac − d̄b, da + bc̄)`. Imaginary octonions are identified
//! with ℝ⁷ so that the binary cross product `u×v = im(v̄u)` reproduces the
//! calibration form
//!
//! ```text
//! φ₀ = e¹²³ + e¹⁴⁵ + e¹⁶⁷ + e²⁴⁶ − e²⁵⁷ − e³⁴⁷ − e³⁵⁶
//! ```
//!
//! through `φ₀(u,v,w) = ⟨u×v, w⟩`. That requirement fixes the basis
//!
//! ```text
//! e₁ = i, e₂ = j, e₃ = k, e₄ = l, e₅ = il, e₆ = jl, e₇ = lk
//! ```
//!
//! where `l = (0,1)` and, in pair form, `il = (0,i)`, `jl = (0,j)`,
//! `lk = (0,−k)`. Note `il = −li` and `jl = −lj`; the literal ordering
//! `(i,j,k,l,li,lj,lk)` does not reproduce φ₀ under any sign choice of `u×v`.
//! On ℝ⁸ the real unit is the eighth coordinate, `e₈ = 1`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{SVector, Vector3};
use serde::{Deserialize, Serialize};

pub type Vector7 = SVector<f64, 7>;
pub type Vector8 = SVector<f64, 8>;

/// A real quaternion `w + xi + yj + zk`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Pure quaternion `xi + yj + zk`.
    pub fn from_imag(v: &Vector3<f64>) -> Self {
        Quaternion::new(0.0, v[0], v[1], v[2])
    }

    pub fn imag(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(self, other: Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(self) -> Option<Self> {
        let n2 = self.norm_sqr();
        (n2 > 0.0).then(|| self.conj().scale(1.0 / n2))
    }

    /// `exp(v)` for a pure quaternion `v`, a unit quaternion.
    pub fn exp_imag(v: &Vector3<f64>) -> Self {
        let theta = v.norm();
        if theta == 0.0 {
            return Quaternion::ONE;
        }
        let s = theta.sin() / theta;
        Quaternion::new(theta.cos(), v[0] * s, v[1] * s, v[2] * s)
    }

    /// Matrix of `y ↦ self·y` on ℝ⁴ = (w,x,y,z) coordinates.
    pub fn left_matrix(self) -> [[f64; 4]; 4] {
        let Quaternion { w, x, y, z } = self;
        [[w, -x, -y, -z], [x, w, -z, y], [y, z, w, -x], [z, -y, x, w]]
    }

    /// Matrix of `y ↦ y·self` on ℝ⁴.
    pub fn right_matrix(self) -> [[f64; 4]; 4] {
        let Quaternion { w, x, y, z } = self;
        [[w, -x, -y, -z], [x, w, z, -y], [y, -z, w, x], [z, y, -x, w]]
    }
}

/// Hamilton product.
pub fn quat_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion::new(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        quat_mul(self, rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w + r.w, self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w - r.w, self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

/// An octonion as a Cayley–Dickson pair `(a, b)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Octonion {
    pub a: Quaternion,
    pub b: Quaternion,
}

impl Octonion {
    pub const ZERO: Octonion = Octonion {
        a: Quaternion::ZERO,
        b: Quaternion::ZERO,
    };
    pub const ONE: Octonion = Octonion {
        a: Quaternion::ONE,
        b: Quaternion::ZERO,
    };

    pub const fn new(a: Quaternion, b: Quaternion) -> Self {
        Octonion { a, b }
    }

    /// Pair components `[a.w, a.x, a.y, a.z, b.w, b.x, b.y, b.z]`.
    pub fn to_pair_array(self) -> [f64; 8] {
        let [a0, a1, a2, a3] = self.a.to_array();
        let [b0, b1, b2, b3] = self.b.to_array();
        [a0, a1, a2, a3, b0, b1, b2, b3]
    }

    pub fn from_pair_array(c: [f64; 8]) -> Self {
        Octonion::new(
            Quaternion::new(c[0], c[1], c[2], c[3]),
            Quaternion::new(c[4], c[5], c[6], c[7]),
        )
    }

    /// Imaginary octonion for `v ∈ ℝ⁷`.
    pub fn from_imag(v: &Vector7) -> Self {
        Octonion::new(
            Quaternion::new(0.0, v[0], v[1], v[2]),
            Quaternion::new(v[3], v[4], v[5], -v[6]),
        )
    }

    pub fn real(self) -> f64 {
        self.a.w
    }

    pub fn imag(self) -> Vector7 {
        Vector7::from([
            self.a.x, self.a.y, self.a.z, self.b.w, self.b.x, self.b.y, -self.b.z,
        ])
    }

    /// Octonion for `x ∈ ℝ⁸ = ℝ⁷ ⊕ ℝe₈`, with `e₈` the real unit.
    pub fn from_r8(x: &Vector8) -> Self {
        let mut o = Octonion::from_imag(&x.fixed_rows::<7>(0).into_owned());
        o.a.w = x[7];
        o
    }

    pub fn to_r8(self) -> Vector8 {
        let im = self.imag();
        Vector8::from_fn(|r, _| if r < 7 { im[r] } else { self.real() })
    }

    pub fn conj(self) -> Self {
        Octonion::new(self.a.conj(), -self.b)
    }

    pub fn dot(self, o: Octonion) -> f64 {
        self.a.dot(o.a) + self.b.dot(o.b)
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Octonion::new(self.a.scale(s), self.b.scale(s))
    }
}

/// Cayley–Dickson product `(a,b)(c,d) = (ac − d̄b, da + bc̄)`.
pub fn oct_mul(o1: Octonion, o2: Octonion) -> Octonion {
    let Octonion { a, b } = o1;
    let Octonion { a: c, b: d } = o2;
    Octonion::new(a * c - d.conj() * b, d * a + b * c.conj())
}

impl Mul for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: Octonion) -> Octonion {
        oct_mul(self, rhs)
    }
}

impl Add for Octonion {
    type Output = Octonion;
    fn add(self, r: Octonion) -> Octonion {
        Octonion::new(self.a + r.a, self.b + r.b)
    }
}

impl Sub for Octonion {
    type Output = Octonion;
    fn sub(self, r: Octonion) -> Octonion {
        Octonion::new(self.a - r.a, self.b - r.b)
    }
}

impl Neg for Octonion {
    type Output = Octonion;
    fn neg(self) -> Octonion {
        self.scale(-1.0)
    }
}

/// Cross product on ℝ⁷ = Im 𝕆, `u×v = im(v̄u)`.
pub fn cross7(u: &Vector7, v: &Vector7) -> Vector7 {
    let (ou, ov) = (Octonion::from_imag(u), Octonion::from_imag(v));
    (ov.conj() * ou).imag()
}

/// Triple cross product on ℝ⁸ = 𝕆, `½((uv̄)w − (wv̄)u)`.
///
/// Satisfies `⟨u×v×w, z⟩ = Ψ(u,v,w,z)` for `Ψ = φ₀∧dt − *φ₀` with `dt = e⁸`.
pub fn triple_cross8(u: Octonion, v: Octonion, w: Octonion) -> Octonion {
    let vb = v.conj();
    ((u * vb) * w - (w * vb) * u).scale(0.5)
}

/// Octonion associator `(uv)w − u(vw)`.
pub fn associator(u: Octonion, v: Octonion, w: Octonion) -> Octonion {
    (u * v) * w - u * (v * w)
}

/// Integer Cayley–Dickson arithmetic for exact basis tables.
pub mod exact {
    pub type IntQuat = [i64; 4];
    pub type IntOct = [i64; 8];

    fn qmul(p: IntQuat, q: IntQuat) -> IntQuat {
        [
            p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
            p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
            p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
            p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
        ]
    }

    fn qconj(q: IntQuat) -> IntQuat {
        [q[0], -q[1], -q[2], -q[3]]
    }

    fn split(o: IntOct) -> (IntQuat, IntQuat) {
        ([o[0], o[1], o[2], o[3]], [o[4], o[5], o[6], o[7]])
    }

    /// Pair-component product, same convention as [`super::oct_mul`].
    pub fn oct_mul(o1: IntOct, o2: IntOct) -> IntOct {
        let (a, b) = split(o1);
        let (c, d) = split(o2);
        let (p, q) = (qmul(a, c), qmul(qconj(d), b));
        let (r, s) = (qmul(d, a), qmul(b, qconj(c)));
        [
            p[0] - q[0],
            p[1] - q[1],
            p[2] - q[2],
            p[3] - q[3],
            r[0] + s[0],
            r[1] + s[1],
            r[2] + s[2],
            r[3] + s[3],
        ]
    }

    pub fn oct_conj(o: IntOct) -> IntOct {
        [o[0], -o[1], -o[2], -o[3], -o[4], -o[5], -o[6], -o[7]]
    }

    /// Imaginary basis vector `e_{n+1}` (n in 0..7) in pair components.
    pub fn imag_basis(n: usize) -> IntOct {
        assert!(n < 7, "imaginary basis index out of range");
        let mut o = [0; 8];
        if n == 6 {
            o[7] = -1;
        } else {
            o[n + 1] = 1;
        }
        o
    }

    /// ℝ⁷ coordinates of the imaginary part.
    pub fn imag_coords(o: IntOct) -> [i64; 7] {
        [o[1], o[2], o[3], o[4], o[5], o[6], -o[7]]
    }

    /// `e_a × e_b` in integer coordinates (indices 0-based).
    pub fn cross7_basis(a: usize, b: usize) -> [i64; 7] {
        let (u, v) = (imag_basis(a), imag_basis(b));
        imag_coords(oct_mul(oct_conj(v), u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e7(n: usize) -> Vector7 {
        Vector7::from_fn(|r, _| if r == n { 1.0 } else { 0.0 })
    }

    #[test]
    fn quaternion_table() {
        assert_eq!(Quaternion::I * Quaternion::J, Quaternion::K);
        assert_eq!(Quaternion::J * Quaternion::K, Quaternion::I);
        assert_eq!(Quaternion::K * Quaternion::I, Quaternion::J);
        assert_eq!(Quaternion::J * Quaternion::I, -Quaternion::K);
        let q = Quaternion::new(0.3, -1.2, 2.0, 0.7);
        assert_eq!(q * Quaternion::ONE, q);
        assert_eq!(Quaternion::ONE * q, q);
    }

    #[test]
    fn quaternion_matrices_match_products() {
        let p = Quaternion::new(0.3, -1.2, 2.0, 0.7);
        let y = Quaternion::new(-0.5, 0.25, 1.5, -2.0);
        let apply = |m: [[f64; 4]; 4], v: Quaternion| {
            let v = v.to_array();
            Quaternion::from_array(std::array::from_fn(|r| {
                (0..4).map(|c| m[r][c] * v[c]).sum()
            }))
        };
        assert!((apply(p.left_matrix(), y) - p * y).norm() < 1e-15);
        assert!((apply(p.right_matrix(), y) - y * p).norm() < 1e-15);
    }

    #[test]
    fn octonion_basis_products() {
        let l = Octonion::from_imag(&e7(3));
        let i = Octonion::from_imag(&e7(0));
        let k = Octonion::from_imag(&e7(2));
        // l·i = −il = −e5
        assert_eq!((l * i).imag(), -e7(4));
        // i·l = il = e5
        assert_eq!((i * l).imag(), e7(4));
        // l·k = lk = e7
        assert_eq!((l * k).imag(), e7(6));
        // (li)(lj) = −k, sign independent of the li/il choice
        let li = l * i;
        let lj = l * Octonion::from_imag(&e7(1));
        assert_eq!(li * lj, -k);
    }

    #[test]
    fn cross_product_matches_calibration_terms() {
        assert_eq!(cross7(&e7(0), &e7(1)), e7(2));
        assert_eq!(cross7(&e7(1), &e7(3)), e7(5));
        assert_eq!(cross7(&e7(1), &e7(4)), -e7(6));
        let u = Vector7::from([0.2, -1.0, 0.5, 3.0, 0.1, -0.4, 2.0]);
        assert!(cross7(&u, &u).amax() < 1e-15);
    }

    #[test]
    fn imag_and_r8_roundtrip() {
        let v = Vector7::from([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(Octonion::from_imag(&v).imag(), v);
        assert_eq!(Octonion::from_imag(&v).real(), 0.0);
        let x = Vector8::from([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(Octonion::from_r8(&x).to_r8(), x);
        assert_eq!(Octonion::from_r8(&x).real(), 8.0);
    }

    #[test]
    fn exact_table_agrees_with_float() {
        for a in 0..7 {
            for b in 0..7 {
                let exact = exact::cross7_basis(a, b);
                let float = cross7(&e7(a), &e7(b));
                for c in 0..7 {
                    assert_eq!(exact[c] as f64, float[c]);
                }
            }
        }
    }

    #[test]
    fn triple_cross_repeated_argument_vanishes() {
        let u = Octonion::from_pair_array([0.1, 0.4, -0.3, 0.9, 1.1, -0.2, 0.5, 0.8]);
        let w = Octonion::from_pair_array([-0.6, 0.2, 0.7, -0.1, 0.3, 0.9, -1.4, 0.05]);
        assert!(triple_cross8(u, u, w).norm() < 1e-15);
        assert!(triple_cross8(u, w, w).norm() < 1e-15);
        assert!(triple_cross8(w, u, w).norm() < 1e-15);
    }

    #[test]
    fn exp_imag_is_unit() {
        let q = Quaternion::exp_imag(&Vector3::new(0.3, -2.0, 1.1));
        assert!((q.norm() - 1.0).abs() < 1e-15);
        assert_eq!(Quaternion::exp_imag(&Vector3::zeros()), Quaternion::ONE);
    }
}
