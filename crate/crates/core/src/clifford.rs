//! Fiberwise spinor algebra on an oriented Riemannian 3-manifold in a fixed
//! trivialization: Clifford multiplication by the coframe e¹, e², e³, the
//! quadratic map τ and the quaternion structure J.
//!
//! The hermitian product is linear in the first slot, and
//! `⟨ψ, φ⟩_Re = Re(z·ū + w·v̄)` for ψ = (z, w), φ = (u, v).

use core::ops::{Add, Mul, Neg, Sub};
use num_complex::Complex64 as C64;

pub type Mat2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// A fiber value ψ = (z, w) of the rank-2 spinor bundle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spinor2 {
    pub z: C64,
    pub w: C64,
}

/// Real coefficients of a real covector c1·e¹ + c2·e² + c3·e³.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Covector3(pub [f64; 3]);

/// Real coefficients of an imaginary covector i(a1·e¹ + a2·e² + a3·e³).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImCoeff3(pub [f64; 3]);

impl Spinor2 {
    pub const ZERO: Spinor2 = Spinor2 { z: ZERO, w: ZERO };

    pub fn new(z: C64, w: C64) -> Self {
        Spinor2 { z, w }
    }

    pub fn from_parts(re_z: f64, im_z: f64, re_w: f64, im_w: f64) -> Self {
        Spinor2 {
            z: C64::new(re_z, im_z),
            w: C64::new(re_w, im_w),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z.norm_sqr() + self.w.norm_sqr()
    }

    /// Hermitian product ⟨self, other⟩, linear in `self`.
    pub fn herm(&self, other: &Spinor2) -> C64 {
        self.z * other.z.conj() + self.w * other.w.conj()
    }

    /// Real part of the hermitian product.
    pub fn dot_re(&self, other: &Spinor2) -> f64 {
        self.herm(other).re
    }

    pub fn scale(&self, c: C64) -> Spinor2 {
        Spinor2 {
            z: self.z * c,
            w: self.w * c,
        }
    }

    pub fn scale_re(&self, c: f64) -> Spinor2 {
        Spinor2 {
            z: self.z * c,
            w: self.w * c,
        }
    }

    pub fn times_i(&self) -> Spinor2 {
        self.scale(I)
    }

    pub fn apply(m: &Mat2, psi: &Spinor2) -> Spinor2 {
        Spinor2 {
            z: m[0][0] * psi.z + m[0][1] * psi.w,
            w: m[1][0] * psi.z + m[1][1] * psi.w,
        }
    }
}

impl Add for Spinor2 {
    type Output = Spinor2;
    fn add(self, o: Spinor2) -> Spinor2 {
        Spinor2 {
            z: self.z + o.z,
            w: self.w + o.w,
        }
    }
}

impl Sub for Spinor2 {
    type Output = Spinor2;
    fn sub(self, o: Spinor2) -> Spinor2 {
        Spinor2 {
            z: self.z - o.z,
            w: self.w - o.w,
        }
    }
}

impl Neg for Spinor2 {
    type Output = Spinor2;
    fn neg(self) -> Spinor2 {
        Spinor2 {
            z: -self.z,
            w: -self.w,
        }
    }
}

impl Mul<f64> for Spinor2 {
    type Output = Spinor2;
    fn mul(self, c: f64) -> Spinor2 {
        self.scale_re(c)
    }
}

impl Covector3 {
    pub fn norm(&self) -> f64 {
        num_traits::Float::sqrt(self.0.iter().map(|c| c * c).sum::<f64>())
    }

    pub fn dot(&self, other: &Covector3) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }
}

impl ImCoeff3 {
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }
}

/// The matrix c(eʲ) for j ∈ {0, 1, 2} (coframe index, zero based).
pub fn clifford_matrix(j: usize) -> Mat2 {
    match j {
        0 => [[I, ZERO], [ZERO, -I]],
        1 => [[ZERO, -ONE], [ONE, ZERO]],
        2 => [[ZERO, I], [I, ZERO]],
        _ => panic!("coframe index {j} out of range"),
    }
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Clifford multiplication by a real covector.
pub fn clifford_mul(e: Covector3, psi: Spinor2) -> Spinor2 {
    let [c1, c2, c3] = e.0;
    // c1·diag(i,−i) + c2·[[0,−1],[1,0]] + c3·[[0,i],[i,0]]
    Spinor2 {
        z: I * c1 * psi.z + C64::new(-c2, c3) * psi.w,
        w: C64::new(c2, c3) * psi.z - I * c1 * psi.w,
    }
}

/// Clifford multiplication by the imaginary covector i·a.
pub fn clifford_mul_imag(a: ImCoeff3, psi: Spinor2) -> Spinor2 {
    clifford_mul(Covector3(a.0), psi).times_i()
}

/// Coefficients r of the real covector iτ(ψ, φ), so τ(ψ, φ) = −i·r.
///
/// With ψ = (z, w) and φ = (u, v):
/// r = ½(Re(zū − wv̄), Im(zv̄ + w̄u), Re(zv̄ + w̄u)).
pub fn tau(psi: Spinor2, phi: Spinor2) -> ImCoeff3 {
    let (z, w, u, v) = (psi.z, psi.w, phi.z, phi.w);
    let a = z * u.conj() - w * v.conj();
    let b = z * v.conj() + w.conj() * u;
    ImCoeff3([0.5 * a.re, 0.5 * b.im, 0.5 * b.re])
}

/// The quaternion structure J(z, w) = (−w̄, z̄).
pub fn quaternion_j(psi: Spinor2) -> Spinor2 {
    Spinor2 {
        z: -psi.w.conj(),
        w: psi.z.conj(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(a: f64, b: f64, c: f64, d: f64) -> Spinor2 {
        Spinor2::from_parts(a, b, c, d)
    }

    #[test]
    fn clifford_examples() {
        let r = clifford_mul(Covector3([1.0, 0.0, 0.0]), s(1.0, 0.0, 0.0, 0.0));
        assert_eq!(r, s(0.0, 1.0, 0.0, 0.0));
        let r = clifford_mul(Covector3([0.0, 1.0, 0.0]), s(0.0, 0.0, 1.0, 0.0));
        assert_eq!(r, s(-1.0, 0.0, 0.0, 0.0));
        let r = clifford_mul(Covector3::default(), s(0.3, -1.0, 2.0, 0.5));
        assert_eq!(r.norm_sqr(), 0.0);
    }

    #[test]
    fn mul_agrees_with_matrices() {
        let psi = s(0.3, -1.2, 0.7, 2.1);
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let direct = Spinor2::apply(&clifford_matrix(j), &psi);
            assert_eq!(clifford_mul(Covector3(e), psi), direct);
        }
    }

    #[test]
    fn tau_examples() {
        let one = s(1.0, 0.0, 0.0, 0.0);
        assert_eq!(tau(one, one), ImCoeff3([0.5, 0.0, 0.0]));
        assert_eq!(tau(Spinor2::ZERO, s(1.0, 2.0, 3.0, 4.0)), ImCoeff3([0.0; 3]));
    }

    #[test]
    fn j_examples() {
        assert_eq!(
            quaternion_j(s(1.0, 0.0, 0.0, 0.0)),
            s(0.0, 0.0, 1.0, 0.0).scale_re(1.0)
        );
        let psi = s(0.2, 0.4, -0.6, 1.5);
        assert_eq!(quaternion_j(quaternion_j(psi)), -psi);
    }
}
