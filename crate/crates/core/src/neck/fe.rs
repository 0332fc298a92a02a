//! Piecewise-linear finite elements for first-order operators
//! σ d/dτ + W(τ) on an interval with Lagrangian end conditions.
//!
//! The form ∫|D′ψ|² is assembled directly (least squares), so the discrete
//! operator has no spurious near-zero modes from the alternating grid
//! function. Signs of small eigenvalues come from compressing the Galerkin
//! form of D′ onto the low eigenspace of the least-squares pencil.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::linalg::{dot, sym_eigen, symmetrize, BandedCholesky, SymBanded};
use crate::{Error, Result};

pub(crate) type Coefficient<'a> = Box<dyn Fn(f64) -> DMatrix<f64> + 'a>;

/// A subinterval [a, b] on which W is smooth.
pub(crate) struct Piece<'a> {
    pub a: f64,
    pub b: f64,
    pub w: Coefficient<'a>,
}

pub(crate) struct Problem<'a> {
    pub sigma: DMatrix<f64>,
    pub pieces: Vec<Piece<'a>>,
    /// Columns spanning the allowed values at the left and right ends.
    pub left: Option<DMatrix<f64>>,
    pub right: Option<DMatrix<f64>>,
}

const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

struct Element {
    a: usize,
    len: f64,
    wq: [DMatrix<f64>; 3],
}

/// Row-major general band matrix.
pub(crate) struct GenBanded {
    n: usize,
    hb: usize,
    data: Vec<f64>,
}

impl GenBanded {
    fn zeros(n: usize, hb: usize) -> Self {
        GenBanded { n, hb, data: vec![0.0; n * (2 * hb + 1)] }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let w = 2 * self.hb + 1;
        self.data[i * w + j + self.hb - i] += v;
    }

    fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let w = 2 * self.hb + 1;
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let j0 = i.saturating_sub(self.hb);
            let j1 = (i + self.hb + 1).min(self.n);
            let mut s = 0.0;
            for j in j0..j1 {
                s += self.data[i * w + j + self.hb - i] * x[j];
            }
            *yi = s;
        }
        y
    }
}

pub(crate) struct Discrete {
    pub nodes: Vec<f64>,
    /// Allowed subspace at each node and the offset of its coefficients.
    frames: Vec<Option<DMatrix<f64>>>,
    offsets: Vec<usize>,
    pub dofs: usize,
    pub stiffness: SymBanded,
    pub mass: SymBanded,
    galerkin: GenBanded,
    elements: Vec<Element>,
    sigma: DMatrix<f64>,
}

impl Problem<'_> {
    /// Assembles with ⌈len/h⌉·2^refine elements on every piece.
    pub fn discretize(&self, h: f64, refine: u32) -> Result<Discrete> {
        let d = self.sigma.nrows();
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("mesh spacing must be positive"));
        }
        let mut nodes = Vec::new();
        let mut elements = Vec::new();
        for p in &self.pieces {
            let len = p.b - p.a;
            if len <= 0.0 {
                continue;
            }
            let n = ((len / h - 1e-9).ceil().max(1.0) as usize) << refine;
            if nodes.is_empty() {
                nodes.push(p.a);
            }
            let base = nodes.len() - 1;
            let el = len / n as f64;
            for k in 0..n {
                let x0 = p.a + el * k as f64;
                nodes.push(if k + 1 == n { p.b } else { p.a + el * (k + 1) as f64 });
                let wq = GAUSS3.map(|(xi, _)| symmetrize(&(p.w)(x0 + xi * el)));
                elements.push(Element { a: base + k, len: el, wq });
            }
        }
        if elements.is_empty() {
            return Err(Error::invalid("the interval has zero length"));
        }
        let nn = nodes.len();
        let mut frames: Vec<Option<DMatrix<f64>>> = vec![None; nn];
        frames[0] = self.left.clone();
        frames[nn - 1] = self.right.clone();
        let width = |f: &Option<DMatrix<f64>>| f.as_ref().map_or(d, |m| m.ncols());
        let mut offsets = Vec::with_capacity(nn + 1);
        let mut acc = 0;
        for f in &frames {
            offsets.push(acc);
            acc += width(f);
        }
        offsets.push(acc);
        let dofs = acc;
        let hb = 2 * d - 1;
        let mut stiffness = SymBanded::zeros(dofs, hb);
        let mut mass = SymBanded::zeros(dofs, hb);
        let mut galerkin = GenBanded::zeros(dofs, hb);
        let eye = DMatrix::<f64>::identity(d, d);
        for e in &elements {
            let ends = [e.a, e.a + 1];
            let mut ls = [[DMatrix::zeros(d, d), DMatrix::zeros(d, d)], [DMatrix::zeros(d, d), DMatrix::zeros(d, d)]];
            let mut ms = [[0.0; 2]; 2];
            let mut gs = ls.clone();
            for (q, &(xi, wt)) in GAUSS3.iter().enumerate() {
                let phi = [1.0 - xi, xi];
                let dphi = [-1.0 / e.len, 1.0 / e.len];
                let ops = [&self.sigma * dphi[0] + &e.wq[q] * phi[0], &self.sigma * dphi[1] + &e.wq[q] * phi[1]];
                for i in 0..2 {
                    for j in 0..2 {
                        ls[i][j] += ops[i].transpose() * &ops[j] * (wt * e.len);
                        ms[i][j] += phi[i] * phi[j] * wt * e.len;
                        gs[i][j] += &ops[j] * (phi[i] * wt * e.len);
                    }
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    let (ni, nj) = (ends[i], ends[j]);
                    let reduce = |m: &DMatrix<f64>| -> DMatrix<f64> {
                        let left = match &frames[ni] {
                            Some(f) => f.transpose() * m,
                            None => m.clone(),
                        };
                        match &frames[nj] {
                            Some(f) => left * f,
                            None => left,
                        }
                    };
                    let l = reduce(&ls[i][j]);
                    let m = reduce(&(&eye * ms[i][j]));
                    let g = reduce(&gs[i][j]);
                    for r in 0..l.nrows() {
                        for c in 0..l.ncols() {
                            let (gr, gc) = (offsets[ni] + r, offsets[nj] + c);
                            galerkin.add(gr, gc, g[(r, c)]);
                            if gr >= gc {
                                stiffness.add(gr, gc, l[(r, c)]);
                                mass.add(gr, gc, m[(r, c)]);
                            }
                        }
                    }
                }
            }
        }
        Ok(Discrete {
            nodes,
            frames,
            offsets,
            dofs,
            stiffness,
            mass,
            galerkin,
            elements,
            sigma: self.sigma.clone(),
        })
    }
}

impl Discrete {
    /// Nodal values ψ(τ_i) of a coefficient vector.
    pub fn nodal(&self, x: &[f64]) -> Vec<DVector<f64>> {
        (0..self.nodes.len())
            .map(|i| {
                let c = DVector::from_column_slice(&x[self.offsets[i]..self.offsets[i + 1]]);
                match &self.frames[i] {
                    Some(f) => f * c,
                    None => c,
                }
            })
            .collect()
    }

    /// (∫|D′ψ|², ∫|ψ|²) by quadrature, summing squares so that small values
    /// keep their relative accuracy.
    pub fn energy(&self, x: &[f64]) -> (f64, f64) {
        let psi = self.nodal(x);
        let (mut num, mut den) = (0.0, 0.0);
        for e in &self.elements {
            let (pa, pb) = (&psi[e.a], &psi[e.a + 1]);
            let dpsi = (pb - pa) / e.len;
            let sd = &self.sigma * &dpsi;
            for (q, &(xi, wt)) in GAUSS3.iter().enumerate() {
                let v = pa * (1.0 - xi) + pb * xi;
                let r = &sd + &e.wq[q] * &v;
                num += wt * e.len * r.norm_squared();
                den += wt * e.len * v.norm_squared();
            }
        }
        (num, den)
    }

    /// Smallest eigenvalue of ∫|D′ψ|² / ∫|ψ|² and its eigenvector.
    ///
    /// A few inverse iterations give an upper bound, bisection on the
    /// success of the Cholesky factorization of S − σM brings the shift
    /// just below the eigenvalue, and inverse iteration at that shift
    /// converges even when the bottom of the spectrum is crowded. The
    /// quotient is evaluated as a sum of squares.
    pub fn smallest(&self) -> Result<(f64, Vec<f64>)> {
        let n = self.dofs;
        let scale = (0..n).map(|i| self.stiffness.get(i, i) / self.mass.get(i, i)).fold(0.0, f64::max).max(1.0);
        let mut lo = -1e-9 * scale;
        let chol = BandedCholesky::factor(&self.stiffness.axpy(lo, &self.mass))?;
        let x0: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (((i * 2654435761) % 1000) as f64 / 1000.0)).collect();
        let (mut hi, x) = self.inverse_iteration(&chol, x0, 8)?;
        while hi - lo > (1e-9 * hi).max(1e-13 * scale) {
            let mid = 0.5 * (lo + hi);
            if BandedCholesky::factor(&self.stiffness.axpy(mid, &self.mass)).is_ok() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let chol = BandedCholesky::factor(&self.stiffness.axpy(lo, &self.mass))?;
        let (q, x) = self.inverse_iteration(&chol, x, 60)?;
        Ok((q, x))
    }

    fn inverse_iteration(&self, chol: &BandedCholesky, mut x: Vec<f64>, iters: usize) -> Result<(f64, Vec<f64>)> {
        let mut q = f64::INFINITY;
        for _ in 0..iters {
            let mut y = chol.solve(&self.mass.mul_vec(&x));
            let norm = dot(&y, &self.mass.mul_vec(&y)).sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::numerical("inverse iteration broke down"));
            }
            y.iter_mut().for_each(|v| *v /= norm);
            x = y;
            let (num, den) = self.energy(&x);
            let next = num / den;
            let done = (next - q).abs() <= 1e-14 * next.abs();
            q = next;
            if done {
                break;
            }
        }
        if !q.is_finite() {
            return Err(Error::numerical("inverse iteration for λ_L did not converge"));
        }
        Ok((q, x))
    }

    /// Eigenpairs of the least-squares pencil with eigenvalue ≤ `bound`
    /// (eigenvalues of D′² below `bound`), by shift-invert subspace iteration.
    pub fn low_spectrum(&self, bound: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.dofs;
        let shift = 1e-6 * bound.max(1e-12);
        let chol = BandedCholesky::factor(&self.stiffness.axpy(-shift, &self.mass))?;
        let (vals, vecs) = self.subspace(&chol, bound)?;
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= bound).collect();
        let mut out = DMatrix::zeros(n, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            out.set_column(c, &vecs.column(i));
        }
        Ok((keep.iter().map(|&i| vals[i]).collect(), out))
    }

    /// Shift-invert subspace iteration for every pair below `bound`. The
    /// block grows, keeping its current columns, until its top Ritz value
    /// is at least twice the bound, so each sweep gains a factor two.
    fn subspace(&self, chol: &BandedCholesky, bound: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.dofs;
        let seed = |i: usize, j: usize| {
            let h = (i as u64).wrapping_mul(2654435761).wrapping_add((j as u64).wrapping_mul(40503)) % 10007;
            h as f64 / 10007.0 - 0.5
        };
        let mut q = 16usize.min(n);
        let mut x = DMatrix::from_fn(n, q, seed);
        let mut prev: Vec<f64> = Vec::new();
        for _ in 0..3000 {
            let mut y = DMatrix::zeros(n, q);
            for j in 0..q {
                let mx = self.mass.mul_vec(x.column(j).as_slice());
                y.set_column(j, &DVector::from_vec(chol.solve(&mx)));
            }
            let (vals, z) = self.ritz(&y)?;
            x = z;
            if vals[q - 1] < 2.0 * bound && q < n {
                let grown = (2 * q).min(n);
                let mut wider = DMatrix::from_fn(n, grown, seed);
                wider.columns_mut(0, q).copy_from(&x);
                x = wider;
                q = grown;
                prev.clear();
                continue;
            }
            let below = vals.iter().filter(|&&v| v <= bound).count();
            let converged = prev.len() == vals.len()
                && (0..below.min(q)).all(|i| (vals[i] - prev[i]).abs() <= 1e-12 * bound.max(vals[i].abs()));
            prev = vals;
            if converged {
                return Ok((prev, x));
            }
        }
        Err(Error::numerical("subspace iteration for the low spectrum did not converge"))
    }

    /// Rayleigh-Ritz on span(y): ascending values and M-orthonormal Ritz
    /// vectors.
    fn ritz(&self, y: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
        // shift-invert scales columns very unevenly; a Euclidean QR first
        // keeps the projected mass matrix well conditioned
        let y = &y.clone().qr().q();
        let q = y.ncols();
        let mut sy = DMatrix::zeros(y.nrows(), q);
        let mut my = DMatrix::zeros(y.nrows(), q);
        for j in 0..q {
            sy.set_column(j, &DVector::from_vec(self.stiffness.mul_vec(y.column(j).as_slice())));
            my.set_column(j, &DVector::from_vec(self.mass.mul_vec(y.column(j).as_slice())));
        }
        let a = symmetrize(&(y.transpose() * sy));
        let b = symmetrize(&(y.transpose() * my));
        let chol = b
            .cholesky()
            .ok_or_else(|| Error::numerical("subspace basis lost rank"))?;
        let linv = chol
            .l()
            .try_inverse()
            .ok_or_else(|| Error::numerical("subspace basis lost rank"))?;
        let c = symmetrize(&(&linv * a * linv.transpose()));
        let e = sym_eigen(&c);
        Ok((e.values.iter().copied().collect(), y * (linv.transpose() * e.vectors)))
    }

    /// Eigenvalues of D′ with |λ| below `window`, ascending.
    pub fn signed_spectrum(&self, window: f64) -> Result<Vec<f64>> {
        let bound = (1.6 * window) * (1.6 * window);
        let (_, v) = self.low_spectrum(bound)?;
        if v.ncols() == 0 {
            return Ok(Vec::new());
        }
        let mut gv = DMatrix::zeros(self.dofs, v.ncols());
        for j in 0..v.ncols() {
            gv.set_column(j, &DVector::from_vec(self.galerkin.mul_vec(v.column(j).as_slice())));
        }
        let c = symmetrize(&(v.transpose() * gv));
        let mut vals: Vec<f64> = sym_eigen(&c).values.iter().copied().filter(|x| x.abs() < window).collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        Ok(vals)
    }
}

/// Values on three meshes h, h/2, h/4 and the observed convergence order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Richardson {
    pub h: f64,
    pub values: [f64; 3],
    /// Extrapolation assuming second order.
    pub extrapolated: f64,
    pub order: f64,
}

impl Richardson {
    pub fn from_values(h: f64, values: [f64; 3]) -> Self {
        let d1 = values[0] - values[1];
        let d2 = values[1] - values[2];
        let scale = values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let order = if d2.abs() <= 1e-15 * scale.max(1e-300) {
            f64::INFINITY
        } else {
            (d1 / d2).abs().log2()
        };
        Richardson { h, values, extrapolated: values[2] - d2 / 3.0, order }
    }
}

pub(crate) fn richardson<F: FnMut(u32) -> Result<f64>>(h: f64, mut f: F) -> Result<Richardson> {
    let values = [f(0)?, f(1)?, f(2)?];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical(format!("non-finite eigenvalue on a refined mesh: {values:?}")));
    }
    Ok(Richardson::from_values(h, values))
}
