//! Lagrangian subspaces of (R^{2n}, ω) with ω(x, y) = ⟨x, Ωy⟩ for an
//! orthogonal complex structure Ω, and the Maslov index of a path of pairs.
//!
//! With J = −Ω and a unitary frame U of a Lagrangian l in the complex
//! coordinates of J, the symmetric unitary M = V Vᵀ, V = U₂*U₁, has
//! eigenvalue 1 with multiplicity dim(l₁ ∩ l₂). The index counts passages
//! of its eigenvalues through 1, counterclockwise as +1. For a line
//! rotating counterclockwise in (R², dx∧dy) past a fixed line this is +1.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::linalg::{max_abs, orthonormal_columns};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Lagrangian {
    /// Orthonormal columns spanning the subspace.
    basis: DMatrix<f64>,
    /// Ω with ω(x, y) = xᵀΩy.
    omega: DMatrix<f64>,
}

impl Lagrangian {
    pub fn new(basis: DMatrix<f64>, omega: DMatrix<f64>) -> Result<Self> {
        let d = omega.nrows();
        if omega.ncols() != d || d % 2 != 0 || d == 0 {
            return Err(Error::invalid("ω must be a square matrix of even size"));
        }
        if basis.nrows() != d {
            return Err(Error::invalid("basis vectors do not live in the symplectic space"));
        }
        if max_abs(&(&omega + omega.transpose())) > 1e-12 {
            return Err(Error::invalid("ω is not skew"));
        }
        if max_abs(&(omega.transpose() * &omega - DMatrix::identity(d, d))) > 1e-10 {
            return Err(Error::invalid("Ω is not an orthogonal complex structure"));
        }
        let q = orthonormal_columns(&basis, 1e-10);
        if q.ncols() != d / 2 {
            return Err(Error::invalid(format!(
                "span has dimension {}, a Lagrangian needs {}",
                q.ncols(),
                d / 2
            )));
        }
        let iso = max_abs(&(q.transpose() * &omega * &q));
        if iso > 1e-10 {
            return Err(Error::invalid(format!("span is not isotropic (|ω| up to {iso:e})")));
        }
        Ok(Lagrangian { basis: q, omega })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// max |ω(u, v)| over pairs of basis vectors.
    pub fn isotropy_defect(&self) -> f64 {
        max_abs(&(self.basis.transpose() * &self.omega * &self.basis))
    }
}

/// A unitary basis e₁..eₙ of (R^{2n}, J): {e_k, Je_k} orthonormal.
fn unitary_basis(j: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let d = j.nrows();
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut out = Vec::with_capacity(d / 2);
    for i in 0..d {
        let mut v = DVector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 });
        for _ in 0..2 {
            for f in &frame {
                let p = f.dot(&v);
                v -= f * p;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            v /= n;
            let jv = j * &v;
            frame.push(v.clone());
            frame.push(jv);
            out.push(v);
            if out.len() == d / 2 {
                break;
            }
        }
    }
    out
}

fn complex_frame(l: &Lagrangian, e: &[DVector<f64>], j: &DMatrix<f64>) -> DMatrix<C64> {
    let n = e.len();
    let je: Vec<DVector<f64>> = e.iter().map(|v| j * v).collect();
    DMatrix::from_fn(n, n, |k, a| {
        let x = l.basis.column(a);
        C64::new(e[k].dot(&x), je[k].dot(&x))
    })
}

/// Eigenvalue angles of M(l₁, l₂) in (−π, π].
fn pair_angles(l1: &Lagrangian, l2: &Lagrangian, e: &[DVector<f64>], j: &DMatrix<f64>) -> Result<Vec<f64>> {
    let u1 = complex_frame(l1, e, j);
    let u2 = complex_frame(l2, e, j);
    let v = u2.adjoint() * u1;
    let m = &v * v.transpose();
    let eig = Schur::new(m)
        .eigenvalues()
        .ok_or_else(|| Error::numerical("Schur form of the pair matrix is not triangular"))?;
    Ok(eig.iter().map(|z| z.im.atan2(z.re)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaslovCrossing {
    pub s: f64,
    pub direction: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaslovReport {
    pub index: i64,
    pub crossings: Vec<MaslovCrossing>,
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let tau = 2.0 * core::f64::consts::PI;
    let d = (a - b).abs() % tau;
    d.min(tau - d)
}

/// Maslov index of the sampled path s ↦ (l₁(s), l₂(s)).
pub fn maslov_index(pairs: &[(f64, Lagrangian, Lagrangian)]) -> Result<MaslovReport> {
    if pairs.len() < 2 {
        return Err(Error::invalid("a Lagrangian path needs at least two samples"));
    }
    let omega = pairs[0].1.omega.clone();
    for (k, (s, l1, l2)) in pairs.iter().enumerate() {
        if max_abs(&(l1.omega() - &omega)) > 1e-12 || max_abs(&(l2.omega() - &omega)) > 1e-12 {
            return Err(Error::invalid(format!("sample {k} uses a different symplectic form")));
        }
        if k > 0 && !(*s > pairs[k - 1].0) {
            return Err(Error::invalid("path parameters must increase strictly"));
        }
    }
    let j = -&omega;
    let e = unitary_basis(&j);
    let angles: Vec<Vec<f64>> = pairs
        .iter()
        .map(|(_, l1, l2)| pair_angles(l1, l2, &e, &j))
        .collect::<Result<_>>()?;
    let tol = 1e-10;
    let last = angles.len() - 1;
    for (k, name) in [(0, "start"), (last, "end")] {
        if angles[k].iter().any(|a| a.abs() <= tol) {
            return Err(Error::precondition(format!("the pair is not transversal at the {name}")));
        }
    }
    let n = angles[0].len();
    // branch angles, continued sample to sample by nearest matching
    let mut cur = angles[0].clone();
    // last nonzero angle per branch and the sample where it was seen
    let mut last_seen: Vec<(f64, usize)> = cur.iter().map(|&a| (a, 0)).collect();
    let mut crossings = Vec::new();
    for k in 1..angles.len() {
        let next = &angles[k];
        let mut used = vec![false; n];
        let mut pairs_d: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
        for (b, &a) in cur.iter().enumerate() {
            for (i, &x) in next.iter().enumerate() {
                pairs_d.push((circle_dist(a, x), b, i));
            }
        }
        pairs_d.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut to = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut worst = 0.0f64;
        for (dist, b, i) in pairs_d {
            if done[b] || used[i] {
                continue;
            }
            done[b] = true;
            used[i] = true;
            to[b] = i;
            worst = worst.max(dist);
        }
        if worst > core::f64::consts::FRAC_PI_4 {
            return Err(Error::RefinementNeeded {
                t0: pairs[k - 1].0,
                t1: pairs[k].0,
                reason: format!("an eigenvalue of the pair matrix moved by {worst:.3} rad"),
            });
        }
        for b in 0..n {
            let x = next[to[b]];
            cur[b] = x;
            if x.abs() <= tol {
                continue;
            }
            let (a0, at) = last_seen[b];
            // a sign change near angle 0 (not across π) is a passage through 1
            if x.signum() != a0.signum() && x.abs() < core::f64::consts::FRAC_PI_2 {
                let (s0, s1) = (pairs[at].0, pairs[k].0);
                crossings.push(MaslovCrossing {
                    s: s0 + (s1 - s0) * a0 / (a0 - x),
                    direction: if x > 0.0 { 1 } else { -1 },
                });
            }
            last_seen[b] = (x, k);
        }
    }
    crossings.sort_by(|a, b| a.s.total_cmp(&b.s));
    let index = crossings.iter().map(|c| c.direction as i64).sum();
    Ok(MaslovReport { index, crossings })
}
