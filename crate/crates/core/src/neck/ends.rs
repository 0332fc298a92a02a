use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use super::EndData;
use crate::linalg::{expm, fit_line, null_space, orthonormal_columns};
use crate::sflow::Lagrangian;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LimitingValue {
    /// r(ψ) as a vector of the fiber; it lies in ker A.
    pub value: DVector<f64>,
    /// Fitted rate in ‖ψ(t) − r‖ ≤ C e^{−δ₁t}; ∞ when the tail is constant.
    pub delta1: f64,
}

/// Extrapolates the ker-A part of a sampled bounded solution on the
/// cylinder of `end`. Samples (t, ψ(t)) must have increasing t ≥ 0 and be
/// equally spaced in the last half.
pub fn limiting_value(end: &EndData, psi: &[(f64, DVector<f64>)]) -> Result<LimitingValue> {
    let d = end.op.dim();
    let n = psi.len();
    if n < 5 {
        return Err(Error::invalid("need at least five samples of the tail"));
    }
    for (k, (t, v)) in psi.iter().enumerate() {
        if v.len() != d || v.iter().any(|x| !x.is_finite()) || !(t.is_finite() && *t >= 0.0) {
            return Err(Error::invalid(format!("sample {k} is malformed")));
        }
        if k > 0 && !(*t > psi[k - 1].0) {
            return Err(Error::invalid("sample times must increase"));
        }
    }
    let k = end.op.kernel();
    let proj = |v: &DVector<f64>| k * (k.transpose() * v);
    let m = ((n - 1) / 4).max(1);
    let (ia, ib, ic) = (n - 1 - 2 * m, n - 1 - m, n - 1);
    let step = psi[ic].0 - psi[ib].0;
    if ((psi[ib].0 - psi[ia].0) - step).abs() > 1e-9 * step {
        return Err(Error::invalid("the tail samples must be equally spaced"));
    }
    let (fa, fb, fc) = (proj(&psi[ia].1), proj(&psi[ib].1), proj(&psi[ic].1));
    let d1 = &fb - &fa;
    let d2 = &fc - &fb;
    let scale = 1.0 + fc.norm();
    let value = if d2.norm() <= 1e-14 * scale {
        fc
    } else {
        let q = d2.norm() / d1.norm();
        if !(q < 1.0) {
            return Err(Error::Fit(format!(
                "the ker A part of the tail is not settling (ratio {q:.4} over Δt = {step})"
            )));
        }
        &fc + &d2 * (q / (1.0 - q))
    };
    // decay of the full difference over the last half
    let tail: Vec<(f64, f64)> = psi[n / 2..]
        .iter()
        .map(|(t, v)| (*t, (v - &value).norm()))
        .filter(|(_, g)| *g > 1e-14 * scale)
        .collect();
    let delta1 = if tail.len() < 2 {
        f64::INFINITY
    } else {
        let ts: Vec<f64> = tail.iter().map(|p| p.0).collect();
        let lg: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
        -fit_line(&ts, &lg).1
    };
    if !(delta1 > 0.0) {
        return Err(Error::Fit(format!("the tail is not settling (fitted δ₁ = {delta1:.4})")));
    }
    Ok(LimitingValue { value, delta1 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndLagrangian {
    /// The space of limiting values in kernel coordinates (columns of
    /// `op.kernel()`), with the form Ω = KᵀIK. `None` when ker A = 0.
    pub lagrangian: Option<Lagrangian>,
    /// The same space as columns in the fiber.
    pub ambient: DMatrix<f64>,
    pub dim_bounded: usize,
    pub dim_l2: usize,
}

fn rk4_step(b: &dyn Fn(f64) -> DMatrix<f64>, t: f64, dt: f64, x: &DMatrix<f64>) -> DMatrix<f64> {
    let k1 = b(t) * x;
    let k2 = b(t + 0.5 * dt) * (x + &k1 * (0.5 * dt));
    let k3 = b(t + 0.5 * dt) * (x + &k2 * (0.5 * dt));
    let k4 = b(t + dt) * (x + &k3 * dt);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// The Lagrangian of limiting values of bounded solutions on the end,
/// closed by its wall.
///
/// Bounded solutions at a far time T, where P is negligible, are spanned by
/// ker A and the decaying eigenspace. That frame is carried back to t = 0
/// with re-orthonormalization, together with the limiting value of each
/// column, then through the stub, and intersected with the wall.
pub fn end_lagrangian(end: &EndData) -> Result<EndLagrangian> {
    let wall = end
        .wall
        .as_ref()
        .ok_or_else(|| Error::precondition("end_lagrangian needs a wall closing the stub"))?;
    let op = &end.op;
    let d = op.dim();
    let kern = op.kernel();
    let kdim = kern.ncols();
    let plus = op.spectral_space(true);
    let m = kdim + plus.ncols();
    let mut x = DMatrix::<f64>::zeros(d, m);
    x.columns_mut(0, kdim).copy_from(kern);
    x.columns_mut(kdim, plus.ncols()).copy_from(&plus);
    let mut r = DMatrix::<f64>::zeros(kdim, m);
    r.columns_mut(0, kdim).fill_with_identity();
    if !end.perturbation.is_zero() {
        let p = &end.perturbation;
        let t_far = p.t0 + (p.bound.max(1e-300) / 1e-15).ln().max(0.0) / p.delta;
        let b = |t: f64| -op.a() + op.i() * p.at(t);
        let rate = b(0.0).norm().max(b(p.t0).norm()).max(1.0);
        let steps = ((t_far / (0.2 / rate).min(0.01)).ceil() as usize).max(1);
        let dt = t_far / steps as f64;
        for s in (0..steps).rev() {
            let t = (s + 1) as f64 * dt;
            let next = rk4_step(&b, t, -dt, &x);
            let qr = next.qr();
            let u = qr.r();
            let uinv = u
                .try_inverse()
                .ok_or_else(|| Error::numerical("bounded-solution frame collapsed"))?;
            x = qr.q();
            r = &r * uinv;
        }
    }
    // through the stub, ψ' = IVψ, back to its far end
    let x_wall = expm(&(op.i() * &end.stub * (-end.stub_length))) * &x;
    let mut joint = DMatrix::zeros(d, m + wall.ncols());
    joint.columns_mut(0, m).copy_from(&x_wall);
    joint.columns_mut(m, wall.ncols()).copy_from(&(-wall));
    let nul = null_space(&joint, 1e-6);
    let dim_bounded = nul.ncols();
    let coeffs = nul.rows(0, m).into_owned();
    let limits = &r * coeffs;
    let basis = if crate::linalg::max_abs(&limits) < 1e-10 {
        DMatrix::zeros(kdim, 0)
    } else {
        orthonormal_columns(&limits, 1e-8)
    };
    let rank = basis.ncols();
    if 2 * rank != kdim {
        return Err(Error::numerical(format!(
            "limiting values span {rank} dimensions, expected {} (resolution too coarse?)",
            kdim / 2
        )));
    }
    let lagrangian = if kdim == 0 {
        None
    } else {
        Some(Lagrangian::new(basis.clone(), op.kernel_form().clone()).map_err(|e| {
            Error::numerical(format!("limiting values are not Lagrangian: {e}"))
        })?)
    };
    Ok(EndLagrangian { lagrangian, ambient: kern * basis, dim_bounded, dim_l2: dim_bounded - rank })
}
