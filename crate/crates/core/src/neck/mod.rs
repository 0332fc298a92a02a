//! One-dimensional models of operators I(∂/∂t + A) + P(t) on cylindrical
//! ends and on glued necks, with finite-dimensional fibers.
//!
//! An end is a stub [−s, 0] carrying a constant symmetric potential,
//! followed by the half-cylinder [0, ∞). In a coordinate t the operator is
//! I d/dt + W(t) with W = V on the stub and W = IA + P(t) on the cylinder.
//! An optional wall subspace closes the stub at t = −s.

mod aps;
mod ends;
mod fe;
mod fixtures;
mod laplace;

pub use aps::{
    aps_boundary_eigs, split_identity, toy_fixture, toy_suite, ApsProblem, SplitFixture, SplitReport, SplitSample, ToyParams,
};
pub use ends::{end_lagrangian, limiting_value, EndLagrangian, LimitingValue};
pub use fe::Richardson;
pub use fixtures::NeckFixture;
pub use laplace::{delta_l_eigenvalue, delta_l_experiment, DeltaReport, DeltaRow, LaplaceModel};

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::linalg::{max_abs, max_asymmetry, orthonormal_columns, sym_eigen};
use crate::{Error, Result};
use fe::{Piece, Problem};

/// A validated pair (I, A) with I² = −1, Iᵀ = −I, Aᵀ = A, IA + AI = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibleOperator {
    i: DMatrix<f64>,
    a: DMatrix<f64>,
    kernel: DMatrix<f64>,
    kernel_form: DMatrix<f64>,
}

impl CompatibleOperator {
    pub fn dim(&self) -> usize {
        self.i.nrows()
    }

    pub fn i(&self) -> &DMatrix<f64> {
        &self.i
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Orthonormal columns spanning ker A.
    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    /// Ω = KᵀIK, so that ω(x, y) = ⟨x, Iy⟩ reads xᵀΩy in kernel coordinates.
    pub fn kernel_form(&self) -> &DMatrix<f64> {
        &self.kernel_form
    }

    /// Orthonormal columns spanning the eigenspaces of A with eigenvalue of
    /// the given sign.
    pub fn spectral_space(&self, positive: bool) -> DMatrix<f64> {
        let e = sym_eigen(&self.a);
        let tol = kernel_tol(&self.a);
        let cols: Vec<usize> = (0..e.values.len())
            .filter(|&k| if positive { e.values[k] > tol } else { e.values[k] < -tol })
            .collect();
        DMatrix::from_fn(self.dim(), cols.len(), |r, c| e.vectors[(r, cols[c])])
    }

    /// The same end read in the reversed coordinate: (−I, −A).
    pub fn reversed(&self) -> CompatibleOperator {
        CompatibleOperator {
            i: -&self.i,
            a: -&self.a,
            kernel: self.kernel.clone(),
            kernel_form: -&self.kernel_form,
        }
    }
}

fn kernel_tol(a: &DMatrix<f64>) -> f64 {
    1e-10 * (1.0 + max_abs(a))
}

/// Checks the compatibility relations to 1e-10 and returns the validated
/// operator with the symplectic form on ker A.
pub fn validate_compatible(i: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<CompatibleOperator> {
    let d = i.nrows();
    if i.ncols() != d || a.nrows() != d || a.ncols() != d {
        return Err(Error::invalid("I and A must be square matrices of the same size"));
    }
    if d == 0 || d % 2 != 0 {
        return Err(Error::invalid(format!("fiber dimension {d} must be even and positive")));
    }
    if i.iter().chain(a.iter()).any(|x| !x.is_finite()) {
        return Err(Error::invalid("I and A must be finite"));
    }
    let eye = DMatrix::<f64>::identity(d, d);
    let checks = [
        ("I² = −1", max_abs(&(i * i + &eye))),
        ("Iᵀ = −I", max_abs(&(i.transpose() + i))),
        ("Aᵀ = A", max_asymmetry(a)),
        ("IA + AI = 0", max_abs(&(i * a + a * i))),
    ];
    let failed: Vec<String> = checks
        .iter()
        .filter(|(_, v)| *v > 1e-10)
        .map(|(name, v)| format!("{name} violated by {v:e}"))
        .collect();
    if !failed.is_empty() {
        return Err(Error::invalid(failed.join("; ")));
    }
    let e = sym_eigen(a);
    let tol = kernel_tol(a);
    for k in 0..d {
        let v = e.vectors.column(k).into_owned();
        let iv = i * &v;
        let defect = (a * &iv + &iv * e.values[k]).norm();
        if defect > 1e-9 * (1.0 + max_abs(a)) {
            return Err(Error::invalid(format!(
                "I does not map the {}-eigenspace of A to the opposite one",
                e.values[k]
            )));
        }
    }
    let cols: Vec<usize> = (0..d).filter(|&k| e.values[k].abs() <= tol).collect();
    let kernel = DMatrix::from_fn(d, cols.len(), |r, c| e.vectors[(r, cols[c])]);
    let kernel_form = kernel.transpose() * i * &kernel;
    Ok(CompatibleOperator { i: i.clone(), a: a.clone(), kernel, kernel_form })
}

/// P(t) = Σ Mₖ e^{−rₖ t} on the half-cylinder t ≥ 0, with a verified bound
/// ‖P(t)‖ ≤ C e^{−δ(t−T₀)} for t ≥ T₀.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub t0: f64,
    pub delta: f64,
    pub bound: f64,
    terms: Vec<(DMatrix<f64>, f64)>,
}

impl Perturbation {
    pub fn zero() -> Self {
        Perturbation { t0: 0.0, delta: f64::INFINITY, bound: 0.0, terms: Vec::new() }
    }

    pub fn exponential(t0: f64, delta: f64, bound: f64, terms: Vec<(DMatrix<f64>, f64)>) -> Result<Self> {
        if !(t0 >= 0.0 && t0.is_finite() && delta > 0.0 && bound >= 0.0 && bound.is_finite()) {
            return Err(Error::invalid("need T₀ ≥ 0, δ > 0 and a finite bound C ≥ 0"));
        }
        for (m, r) in &terms {
            if m.nrows() != m.ncols() || max_asymmetry(m) > 1e-12 || !(r.is_finite() && *r >= 0.0) {
                return Err(Error::invalid("perturbation terms must be symmetric with nonnegative rates"));
            }
        }
        let p = Perturbation { t0, delta, bound, terms };
        // the decay bound on a sample grid out to where it reaches 1e-16
        let span = (bound.max(1e-300).ln() + 16.0 * 10f64.ln()).max(0.0) / delta;
        for k in 0..=400 {
            let t = t0 + span * k as f64 / 400.0;
            let n = spectral_norm(&p.at(t));
            let allowed = bound * (-delta * (t - t0)).exp();
            if n > allowed * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::invalid(format!(
                    "‖P({t})‖ = {n:e} exceeds the decay bound {allowed:e}"
                )));
            }
        }
        Ok(p)
    }

    pub fn at(&self, t: f64) -> DMatrix<f64> {
        let d = self.terms.first().map_or(0, |(m, _)| m.nrows());
        let mut out = DMatrix::zeros(d, d);
        for (m, r) in &self.terms {
            out += m * (-r * t).exp();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(m, _)| max_abs(m) == 0.0)
    }

    pub fn terms(&self) -> &[(DMatrix<f64>, f64)] {
        &self.terms
    }

    pub fn max_rate(&self) -> f64 {
        self.terms.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    fn dim(&self) -> Option<usize> {
        self.terms.first().map(|(m, _)| m.nrows())
    }
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    sym_eigen(m).values.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Orthonormalizes `wall` and checks that it is Lagrangian for ⟨x, Iy⟩.
fn lagrangian_basis(wall: &DMatrix<f64>, i: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let d = i.nrows();
    if wall.nrows() != d {
        return Err(Error::invalid(format!("{what} vectors must have length {d}")));
    }
    let q = orthonormal_columns(wall, 1e-10);
    if q.ncols() != d / 2 {
        return Err(Error::invalid(format!("{what} has dimension {}, need {}", q.ncols(), d / 2)));
    }
    let iso = max_abs(&(q.transpose() * i * &q));
    if iso > 1e-10 {
        return Err(Error::invalid(format!("{what} is not Lagrangian for ⟨x, Iy⟩ (defect {iso:e})")));
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndData {
    pub op: CompatibleOperator,
    pub perturbation: Perturbation,
    /// Symmetric potential on the stub [−stub_length, 0].
    pub stub: DMatrix<f64>,
    pub stub_length: f64,
    /// Allowed values at t = −stub_length; `None` leaves the end open.
    pub wall: Option<DMatrix<f64>>,
}

impl EndData {
    pub fn new(
        op: CompatibleOperator,
        perturbation: Perturbation,
        stub: DMatrix<f64>,
        stub_length: f64,
        wall: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let d = op.dim();
        if stub.nrows() != d || stub.ncols() != d || max_asymmetry(&stub) > 1e-12 {
            return Err(Error::invalid("the stub potential must be a symmetric d×d matrix"));
        }
        if perturbation.dim().is_some_and(|k| k != d) {
            return Err(Error::invalid("perturbation size differs from the fiber dimension"));
        }
        if !(stub_length >= 0.0 && stub_length.is_finite()) {
            return Err(Error::invalid("stub length must be finite and nonnegative"));
        }
        let wall = match wall {
            Some(w) => Some(lagrangian_basis(&w, op.i(), "the wall")?),
            None => None,
        };
        Ok(EndData { op, perturbation, stub, stub_length, wall })
    }

    /// W(t) on the cylinder.
    pub fn cylinder_potential(&self, t: f64) -> DMatrix<f64> {
        let mut w = self.op.i() * self.op.a();
        if !self.perturbation.is_zero() {
            w += self.perturbation.at(t);
        }
        w
    }

    /// The same end described in the reversed coordinate, suitable as the
    /// partner of `self` in a glued neck.
    pub fn mirrored(&self) -> EndData {
        EndData {
            op: self.op.reversed(),
            perturbation: self.perturbation.clone(),
            stub: self.stub.clone(),
            stub_length: self.stub_length,
            wall: self.wall.clone(),
        }
    }
}

/// Smoothstep cutoff: 1 for s ≤ 0, 0 for s ≥ 1, |β′| ≤ 3/2.
pub fn cutoff(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        1.0 - s * s * (3.0 - 2.0 * s)
    }
}

/// Two ends glued along a neck of half-length L. The left end uses the
/// global coordinate τ directly; the right end's coordinate is
/// t = 2L + 1 − τ, so it must carry (−I, −A).
#[derive(Debug, Clone, PartialEq)]
pub struct GluedOperator {
    pub left: EndData,
    pub right: EndData,
    pub half_length: f64,
    pub h: f64,
}

impl GluedOperator {
    pub fn new(left: EndData, right: EndData, half_length: f64, h: f64) -> Result<Self> {
        if left.op.dim() != right.op.dim() {
            return Err(Error::invalid("the ends have different fiber dimensions"));
        }
        let di = max_abs(&(right.op.i() + left.op.i()));
        let da = max_abs(&(right.op.a() + left.op.a()));
        if di > 1e-12 || da > 1e-12 {
            return Err(Error::invalid(format!(
                "the right end must carry (−I, −A) of the left end in its own coordinate \
                 (mismatch {di:e} in I, {da:e} in A)"
            )));
        }
        if !(half_length >= 0.0 && half_length.is_finite()) {
            return Err(Error::invalid("L must be finite and nonnegative"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("mesh spacing must be positive"));
        }
        let fastest = spectral_norm(left.op.a())
            .max(left.perturbation.max_rate())
            .max(right.perturbation.max_rate())
            .max(spectral_norm(&left.stub))
            .max(spectral_norm(&right.stub));
        if h * fastest > 0.5 {
            return Err(Error::invalid(format!(
                "mesh too coarse: h = {h} against rate {fastest}, need h·rate ≤ 0.5"
            )));
        }
        Ok(GluedOperator { left, right, half_length, h })
    }

    /// Total length of the glued interval.
    pub fn length(&self) -> f64 {
        self.left.stub_length + 2.0 * self.half_length + 1.0 + self.right.stub_length
    }

    /// W(τ) on the neck [0, 2L + 1]: IA + β P₁(τ) + (1 − β) P₂(2L + 1 − τ).
    pub fn neck_potential(&self, tau: f64) -> DMatrix<f64> {
        let l = self.half_length;
        let beta = cutoff(tau - l);
        let mut w = self.left.op.i() * self.left.op.a();
        if beta > 0.0 && !self.left.perturbation.is_zero() {
            w += self.left.perturbation.at(tau) * beta;
        }
        if beta < 1.0 && !self.right.perturbation.is_zero() {
            w += self.right.perturbation.at(2.0 * l + 1.0 - tau) * (1.0 - beta);
        }
        w
    }

    fn problem(&self) -> Problem<'_> {
        let l = self.half_length;
        let end = 2.0 * l + 1.0;
        let v1 = self.left.stub.clone();
        let v2 = self.right.stub.clone();
        let mut pieces = vec![Piece { a: -self.left.stub_length, b: 0.0, w: Box::new(move |_| v1.clone()) }];
        for (a, b) in [(0.0, l), (l, l + 1.0), (l + 1.0, end)] {
            pieces.push(Piece { a, b, w: Box::new(move |t| self.neck_potential(t)) });
        }
        pieces.push(Piece { a: end, b: end + self.right.stub_length, w: Box::new(move |_| v2.clone()) });
        Problem {
            sigma: self.left.op.i().clone(),
            pieces,
            left: self.left.wall.clone(),
            right: self.right.wall.clone(),
        }
    }
}

/// The assembled quadratic form ∫|D′_Lψ|² and the mass form ∫|ψ|² in
/// nodal coordinates (wall-constrained at the ends). Both are stored as
/// one triangle of a symmetric band, so they are exactly symmetric.
pub struct GluedSystem {
    pub nodes: Vec<f64>,
    pub stiffness: crate::linalg::SymBanded,
    pub mass: crate::linalg::SymBanded,
    pub dofs: usize,
}

pub fn assemble_glued(g: &GluedOperator) -> Result<GluedSystem> {
    let d = g.problem().discretize(g.h, 0)?;
    Ok(GluedSystem { nodes: d.nodes, stiffness: d.stiffness, mass: d.mass, dofs: d.dofs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaReport {
    pub half_length: f64,
    pub richardson: Richardson,
    /// Nodal values of the eigenfunction on the finest mesh.
    pub eigenfunction: Vec<(f64, DVector<f64>)>,
}

impl LambdaReport {
    pub fn lambda(&self) -> f64 {
        self.richardson.extrapolated.max(0.0)
    }
}

/// λ_L, the bottom of ∫|D′_Lψ|² / ∫|ψ|², on meshes h, h/2, h/4.
pub fn lambda_l(g: &GluedOperator) -> Result<LambdaReport> {
    let p = g.problem();
    let mut finest = Vec::new();
    let r = fe::richardson(g.h, |k| {
        let d = p.discretize(g.h, k)?;
        let (v, x) = d.smallest()?;
        if k == 2 {
            finest = d.nodes.iter().copied().zip(d.nodal(&x)).collect();
        }
        Ok(v)
    })?;
    Ok(LambdaReport { half_length: g.half_length, richardson: r, eigenfunction: finest })
}

/// Eigenvalues of D′_L in (−window, window) on the mesh h.
pub fn glued_spectrum(g: &GluedOperator, window: f64) -> Result<Vec<f64>> {
    g.problem().discretize(g.h, 0)?.signed_spectrum(window)
}

/// Fitted exponent of y ≈ C x^p and the rms residual of log y.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("log-log fit needs at least two positive pairs"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (_, b, rms) = crate::linalg::fit_line(&lx, &ly);
    Ok((b, rms))
}
