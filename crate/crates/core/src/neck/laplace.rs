//! The scalar model −f″ + V f on a glued interval with Neumann ends.
//!
//! Layout: left body [0, b], neck [b, b + 2L + 1], right body of length b.
//! V ≥ 0 lives on the left body. Piecewise-linear elements with lumped mass
//! give the second-difference operator; the breakpoints are mesh nodes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use super::fe::{richardson, Richardson};
use super::loglog_slope;
use crate::linalg::tridiag_smallest;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceModel {
    pub body_length: f64,
    /// Values at equally spaced points of [0, body_length], interpolated
    /// linearly.
    pub potential: Vec<f64>,
    pub h: f64,
}

impl LaplaceModel {
    fn validate(&self) -> Result<()> {
        if !(self.body_length > 0.0 && self.body_length.is_finite()) {
            return Err(Error::invalid("body length must be positive"));
        }
        if self.potential.len() < 2 {
            return Err(Error::invalid("the potential needs at least two samples"));
        }
        if self.potential.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("the potential must be finite and nonnegative"));
        }
        if !(self.h > 0.0 && self.h <= self.body_length) {
            return Err(Error::invalid("mesh spacing must lie in (0, body length]"));
        }
        Ok(())
    }

    fn v(&self, x: f64) -> f64 {
        if !(0.0..=self.body_length).contains(&x) {
            return 0.0;
        }
        let n = self.potential.len() - 1;
        let s = (x / self.body_length * n as f64).min(n as f64);
        let k = (s.floor() as usize).min(n - 1);
        let f = s - k as f64;
        self.potential[k] * (1.0 - f) + self.potential[k + 1] * f
    }
}

struct Grid {
    x: Vec<f64>,
    /// stiffness diagonal, off-diagonal and lumped mass
    diag: Vec<f64>,
    off: Vec<f64>,
    mass: Vec<f64>,
    pot: Vec<f64>,
}

fn grid(model: &LaplaceModel, l: f64, refine: u32) -> Grid {
    let b = model.body_length;
    let pieces = [(0.0, b), (b, b + 2.0 * l + 1.0), (b + 2.0 * l + 1.0, 2.0 * b + 2.0 * l + 1.0)];
    let mut x = vec![0.0];
    for (a, e) in pieces {
        let n = (((e - a) / model.h - 1e-9).ceil().max(1.0) as usize) << refine;
        for k in 1..=n {
            x.push(if k == n { e } else { a + (e - a) * k as f64 / n as f64 });
        }
    }
    let nn = x.len();
    let mut diag = vec![0.0; nn];
    let mut off = vec![0.0; nn - 1];
    let mut mass = vec![0.0; nn];
    let mut pot = vec![0.0; nn];
    for i in 0..nn - 1 {
        let h = x[i + 1] - x[i];
        diag[i] += 1.0 / h;
        diag[i + 1] += 1.0 / h;
        off[i] = -1.0 / h;
        mass[i] += 0.5 * h;
        mass[i + 1] += 0.5 * h;
        // ∫ V φ by Simpson, exact for piecewise-linear V on a body element
        if x[i + 1] <= model.body_length {
            let (va, vm, vb) = (model.v(x[i]), model.v(0.5 * (x[i] + x[i + 1])), model.v(x[i + 1]));
            pot[i] += h / 6.0 * (va + 2.0 * vm);
            pot[i + 1] += h / 6.0 * (vb + 2.0 * vm);
        }
    }
    Grid { x, diag, off, mass, pot }
}

/// Lowest eigenvalue on one mesh: Sturm bisection, then inverse iteration
/// and a Rayleigh quotient written as a sum of squares.
fn lowest(g: &Grid) -> f64 {
    let n = g.x.len();
    let s: Vec<f64> = g.mass.iter().map(|m| m.sqrt()).collect();
    let d: Vec<f64> = (0..n).map(|i| (g.diag[i] + g.pot[i]) / g.mass[i]).collect();
    let e: Vec<f64> = (0..n - 1).map(|i| g.off[i] / (s[i] * s[i + 1])).collect();
    let approx = tridiag_smallest(&d, &e).max(0.0);
    let shift = approx - 1e-9 * (1.0 + approx);
    let mut u = vec![1.0; n];
    for _ in 0..3 {
        // solve (T − shift) w = u by the Thomas algorithm (SPD)
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        let mut piv = d[0] - shift;
        c[0] = if n > 1 { e[0] / piv } else { 0.0 };
        r[0] = u[0] / piv;
        for i in 1..n {
            piv = d[i] - shift - e[i - 1] * c[i - 1];
            if i + 1 < n {
                c[i] = e[i] / piv;
            }
            r[i] = (u[i] - e[i - 1] * r[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            r[i] -= c[i] * r[i + 1];
        }
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        u = r.iter().map(|v| v / norm).collect();
    }
    let f: Vec<f64> = (0..n).map(|i| u[i] / s[i]).collect();
    let mut num = 0.0;
    for i in 0..n - 1 {
        let df = f[i + 1] - f[i];
        num += df * df / (g.x[i + 1] - g.x[i]);
    }
    for i in 0..n {
        num += g.pot[i] * f[i] * f[i];
    }
    let den: f64 = (0..n).map(|i| g.mass[i] * f[i] * f[i]).sum();
    num / den
}

/// λ(Δ_L) with its Richardson record on meshes h, h/2, h/4.
pub fn delta_l_eigenvalue(model: &LaplaceModel, l: f64) -> Result<Richardson> {
    model.validate()?;
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::invalid("L must be finite and nonnegative"));
    }
    richardson(model.h, |k| Ok(lowest(&grid(model, l, k))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRow {
    pub l: f64,
    pub richardson: Richardson,
    /// Extrapolated lowest eigenvalue of Δ_L.
    pub lambda: f64,
    /// The same for Δ_L², the Rayleigh quotient ∫|Δf|²/∫|f|².
    pub lambda_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaReport {
    pub rows: Vec<DeltaRow>,
    /// Log-log slopes of λ(Δ_L) and λ(Δ_L²) against L.
    pub slope: f64,
    pub slope_squared: f64,
    /// Whether λ(Δ_L²)·L⁴ strictly increases along the list.
    pub squared_l4_increasing: bool,
    /// Whether λ(Δ_L)·L⁴ strictly increases along the list.
    pub l4_increasing: bool,
}

pub fn delta_l_experiment(model: &LaplaceModel, l_list: &[f64]) -> Result<DeltaReport> {
    model.validate()?;
    if model.potential.iter().all(|v| *v == 0.0) {
        return Err(Error::precondition(
            "degenerate experiment: with V ≡ 0 the constants are in the kernel and λ_L = 0",
        ));
    }
    if l_list.len() < 2 || l_list.windows(2).any(|w| !(w[1] > w[0])) || l_list[0] <= 0.0 {
        return Err(Error::invalid("the L list must be positive and strictly increasing"));
    }
    let mut rows = Vec::with_capacity(l_list.len());
    for &l in l_list {
        let r = delta_l_eigenvalue(model, l)?;
        let lambda = r.extrapolated;
        if !(lambda > 0.0) {
            return Err(Error::numerical(format!("nonpositive eigenvalue {lambda} at L = {l}")));
        }
        rows.push(DeltaRow { l, richardson: r, lambda, lambda_squared: lambda * lambda });
    }
    let lam: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let sq: Vec<f64> = rows.iter().map(|r| r.lambda_squared).collect();
    let (slope, _) = loglog_slope(l_list, &lam)?;
    let (slope_squared, _) = loglog_slope(l_list, &sq)?;
    let inc = |v: &[f64]| {
        let s: Vec<f64> = v.iter().zip(l_list).map(|(a, l)| a * l.powi(4)).collect();
        s.windows(2).all(|w| w[1] > w[0])
    };
    Ok(DeltaReport {
        squared_l4_increasing: inc(&sq),
        l4_increasing: inc(&lam),
        rows,
        slope,
        slope_squared,
    })
}
