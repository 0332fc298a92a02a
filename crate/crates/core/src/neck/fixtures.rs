//! The three reference necks over the fiber R⁴ with I = J ⊕ J.
//!
//! Each end is unperturbed or exponentially perturbed on the kernel block,
//! with a unit stub and a wall fixing its limiting line.

use alloc::vec;
use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use super::{validate_compatible, CompatibleOperator, EndData, GluedOperator, Perturbation};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeckFixture {
    /// Kernel span(e₁, e₂) with limiting lines span(e₁) and span(e₂).
    Transversal,
    /// A = diag(μ, −μ, μ, −μ), no kernel.
    KernelFree { mu: f64 },
    /// The left line is rotated by a perturbation amp·e^{−δt} on the kernel
    /// block to angle amp/δ, which the right wall matches.
    NonTransversal { amp: f64, delta: f64 },
}

fn i4() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for b in [0, 2] {
        m[(b, b + 1)] = -1.0;
        m[(b + 1, b)] = 1.0;
    }
    m
}

fn diag(d: [f64; 4]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&d))
}

fn unit(idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(4, idx.len(), |r, c| if r == idx[c] { 1.0 } else { 0.0 })
}

fn plain_end(op: &CompatibleOperator, wall: DMatrix<f64>) -> Result<EndData> {
    EndData::new(op.clone(), Perturbation::zero(), DMatrix::zeros(4, 4), 1.0, Some(wall))
}

impl NeckFixture {
    pub fn name(&self) -> &'static str {
        match self {
            NeckFixture::Transversal => "transversal",
            NeckFixture::KernelFree { .. } => "kernel-free",
            NeckFixture::NonTransversal { .. } => "non-transversal",
        }
    }

    pub fn glued(&self, half_length: f64, h: f64) -> Result<GluedOperator> {
        let (left, right) = match *self {
            NeckFixture::Transversal => {
                let op = validate_compatible(&i4(), &diag([0.0, 0.0, 1.0, -1.0]))?;
                (plain_end(&op, unit(&[0, 3]))?, plain_end(&op.reversed(), unit(&[1, 2]))?)
            }
            NeckFixture::KernelFree { mu } => {
                if !(mu > 0.0 && mu.is_finite()) {
                    return Err(Error::invalid("μ must be positive"));
                }
                let op = validate_compatible(&i4(), &diag([mu, -mu, mu, -mu]))?;
                (plain_end(&op, unit(&[1, 3]))?, plain_end(&op.reversed(), unit(&[0, 2]))?)
            }
            NeckFixture::NonTransversal { amp, delta } => {
                if !(delta > 0.0 && delta.is_finite() && amp.is_finite() && amp != 0.0) {
                    return Err(Error::invalid("the perturbation needs δ > 0 and a nonzero amplitude"));
                }
                let op = validate_compatible(&i4(), &diag([0.0, 0.0, 1.0, -1.0]))?;
                let q = diag([amp, amp, 0.0, 0.0]);
                let p = Perturbation::exponential(0.0, delta, amp.abs(), vec![(q, delta)])?;
                let left = EndData::new(op.clone(), p, DMatrix::zeros(4, 4), 1.0, Some(unit(&[0, 3])))?;
                let th = amp / delta;
                let mut w = unit(&[0, 2]);
                w[(0, 0)] = th.cos();
                w[(1, 0)] = th.sin();
                (left, plain_end(&op.reversed(), w)?)
            }
        };
        GluedOperator::new(left, right, half_length, h)
    }
}
