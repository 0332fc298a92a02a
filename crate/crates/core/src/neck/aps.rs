//! Boundary problems of APS type on intervals and the splitting of the
//! spectral flow of a stretched family into body flows and a Maslov index.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use super::fe::{Piece, Problem};
use super::{end_lagrangian, validate_compatible, CompatibleOperator, EndData, Perturbation};
use crate::linalg::{max_abs, orthonormal_columns};
use crate::sflow::{maslov_index, Lagrangian};
use crate::{Error, Result};

/// σ(d/dt + D₀) on [0, length] with P₋ ⊕ l₂ imposed at t = 0 and P₊ ⊕ l₁
/// at t = length. l₁, l₂ are given as columns in the fiber spanning
/// Lagrangians of ker D₀.
#[derive(Debug, Clone, PartialEq)]
pub struct ApsProblem {
    pub sigma: DMatrix<f64>,
    pub d0: DMatrix<f64>,
    pub length: f64,
    pub l1: DMatrix<f64>,
    pub l2: DMatrix<f64>,
    pub h: f64,
}

/// Columns of P_± ⊕ l after checking that l is a Lagrangian of ker D₀.
fn aps_condition(op: &CompatibleOperator, l: &DMatrix<f64>, positive: bool, what: &str) -> Result<DMatrix<f64>> {
    let d = op.dim();
    let k = op.kernel().ncols();
    if l.nrows() != d {
        return Err(Error::invalid(format!("{what} vectors must have length {d}")));
    }
    let lq = if l.ncols() == 0 { DMatrix::zeros(d, 0) } else { orthonormal_columns(l, 1e-10) };
    if lq.ncols() != k / 2 {
        return Err(Error::invalid(format!(
            "boundary projector rank defect: {what} has dimension {}, ker D₀ needs {}",
            lq.ncols(),
            k / 2
        )));
    }
    if lq.ncols() > 0 {
        let off = max_abs(&(op.a() * &lq));
        if off > 1e-9 * (1.0 + max_abs(op.a())) {
            return Err(Error::invalid(format!("{what} is not contained in ker D₀ (defect {off:e})")));
        }
    }
    let p = op.spectral_space(positive);
    let mut cols = DMatrix::zeros(d, p.ncols() + lq.ncols());
    cols.columns_mut(0, p.ncols()).copy_from(&p);
    cols.columns_mut(p.ncols(), lq.ncols()).copy_from(&lq);
    let q = orthonormal_columns(&cols, 1e-10);
    if q.ncols() != d / 2 {
        return Err(Error::invalid(format!(
            "boundary projector rank defect: P ⊕ {what} has dimension {}, need {}",
            q.ncols(),
            d / 2
        )));
    }
    let iso = max_abs(&(q.transpose() * op.i() * &q));
    if iso > 1e-9 {
        return Err(Error::invalid(format!("{what} is not Lagrangian for ⟨x, σy⟩ (defect {iso:e})")));
    }
    Ok(q)
}

/// Eigenvalues in (−window, window) of the discretized APS problem.
pub fn aps_boundary_eigs(p: &ApsProblem, window: f64) -> Result<Vec<f64>> {
    let op = validate_compatible(&p.sigma, &p.d0)?;
    if !(p.length > 0.0 && p.length.is_finite()) {
        return Err(Error::invalid("interval length must be positive"));
    }
    if !(p.h > 0.0 && p.h * (1.0 + max_abs(&p.d0)) <= 0.5) {
        return Err(Error::invalid("mesh too coarse for D₀"));
    }
    let left = aps_condition(&op, &p.l2, false, "l₂")?;
    let right = aps_condition(&op, &p.l1, true, "l₁")?;
    let w = op.i() * op.a();
    let prob = Problem {
        sigma: p.sigma.clone(),
        pieces: vec![Piece { a: 0.0, b: p.length, w: Box::new(move |_| w.clone()) }],
        left: Some(left),
        right: Some(right),
    };
    prob.discretize(p.h, 0)?.signed_spectrum(window)
}

/// A one-parameter family on M(L) = [−1, 0] ∪ [0, 2L] ∪ [2L, 2L + 1]:
/// σ d/dτ + V₁(s) on the left body, σ(d/dτ + D₀(s)) on the neck and
/// σ d/dτ + V₂(s) on the right body, closed by walls.
///
/// ker D₀(s) must equal the span of `kernel` for every s. The Lagrangian
/// paths are the associated Lagrangians of the two ends twisted by
/// `twist1`, `twist2`: maps s ↦ k×k matrices in kernel coordinates that
/// commute with Ω = KᵀσK, are orthogonal, and equal 1 at both endpoints.
pub struct SplitFixture {
    pub name: alloc::string::String,
    pub sigma: DMatrix<f64>,
    pub kernel: DMatrix<f64>,
    pub d0: Box<dyn Fn(f64) -> DMatrix<f64>>,
    pub v1: Box<dyn Fn(f64) -> DMatrix<f64>>,
    pub v2: Box<dyn Fn(f64) -> DMatrix<f64>>,
    pub wall1: DMatrix<f64>,
    pub wall2: DMatrix<f64>,
    pub twist1: Box<dyn Fn(f64) -> DMatrix<f64>>,
    pub twist2: Box<dyn Fn(f64) -> DMatrix<f64>>,
    pub a: f64,
    pub b: f64,
    pub samples: usize,
    pub half_length: f64,
    pub h: f64,
    /// Window for the spectra entering the counts.
    pub window: f64,
    /// ε for the body flows.
    pub body_eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSample {
    pub s: f64,
    pub glued: Vec<f64>,
    pub body1: Vec<f64>,
    pub body2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitReport {
    pub name: alloc::string::String,
    /// SF with the line at L⁻² of the glued family.
    pub glued_flow: i64,
    /// SF_ε of D_j(s)(l_j(s)).
    pub body_flows: [i64; 2],
    /// Mas(l₂, l₁) in the rotating-line normalization.
    pub maslov: i64,
    pub samples: Vec<SplitSample>,
}

impl SplitReport {
    pub fn holds(&self) -> bool {
        self.glued_flow == self.body_flows[0] + self.body_flows[1] + self.maslov
    }
}

/// Count change across the line `eps` between two nearby spectra.
///
/// Eigenvalues in (c, eps] are counted, with the cut c placed in the widest
/// common gap of both spectra below the line. Returns `None` when that gap
/// does not exceed the eigenvalue motion of the step, since then something
/// may have crossed c.
fn step_flow(prev: &[f64], next: &[f64], eps: f64, window: f64) -> Option<i64> {
    let mut motion = 0.0f64;
    for (from, to) in [(prev, next), (next, prev)] {
        for x in from.iter().filter(|x| x.abs() < 0.8 * window) {
            let near = to.iter().map(|y| (y - x).abs()).fold(f64::INFINITY, f64::min);
            motion = motion.max(near);
        }
    }
    let mut best = (0.0, f64::NEG_INFINITY);
    for c in 0..=400 {
        let cut = eps - window * (0.2 + 0.5 * c as f64 / 400.0);
        let margin = prev.iter().chain(next.iter()).map(|x| (x - cut).abs()).fold(f64::INFINITY, f64::min);
        if margin > best.1 {
            best = (cut, margin);
        }
    }
    let (cut, margin) = best;
    if !(margin > motion) {
        return None;
    }
    let count = |v: &[f64]| v.iter().filter(|&&x| x > cut && x <= eps).count() as i64;
    Some(count(prev) - count(next))
}

const MAX_BISECTIONS: u32 = 10;

/// Spectral flow across `eps` on [s0, s1], bisecting steps that move too
/// fast for `step_flow`.
fn adaptive_flow(
    spectrum_at: &dyn Fn(f64) -> Result<Vec<f64>>,
    (s0, v0): (f64, &[f64]),
    (s1, v1): (f64, &[f64]),
    eps: f64,
    window: f64,
    depth: u32,
) -> Result<i64> {
    if let Some(n) = step_flow(v0, v1, eps, window) {
        return Ok(n);
    }
    if depth == MAX_BISECTIONS {
        return Err(Error::RefinementNeeded {
            t0: s0,
            t1: s1,
            reason: "eigenvalues move faster than the spectral gap allows".into(),
        });
    }
    let sm = 0.5 * (s0 + s1);
    let vm = spectrum_at(sm)?;
    Ok(adaptive_flow(spectrum_at, (s0, v0), (sm, &vm), eps, window, depth + 1)?
        + adaptive_flow(spectrum_at, (sm, &vm), (s1, v1), eps, window, depth + 1)?)
}

fn windowed_flow(
    spectrum_at: &dyn Fn(f64) -> Result<Vec<f64>>,
    samples: &[(f64, &Vec<f64>)],
    eps: f64,
    window: f64,
    what: &str,
) -> Result<i64> {
    for k in [0, samples.len() - 1] {
        if samples[k].1.iter().any(|x| (x - eps).abs() <= 1e-9 * (1.0 + eps.abs())) {
            return Err(Error::precondition(format!("{what}: an endpoint eigenvalue sits on the ε line")));
        }
    }
    let mut flow = 0;
    for w in samples.windows(2) {
        flow += adaptive_flow(spectrum_at, (w[0].0, w[0].1), (w[1].0, w[1].1), eps, window, 0).map_err(|e| match e {
            Error::RefinementNeeded { t0, t1, reason } => {
                Error::RefinementNeeded { t0, t1, reason: format!("{what}: {reason}") }
            }
            e => e,
        })?;
    }
    Ok(flow)
}

/// Largest principal-angle sine between two subspaces given by bases.
fn subspace_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let (qa, qb) = (orthonormal_columns(a, 1e-10), orthonormal_columns(b, 1e-10));
    (&qa * qa.transpose() - &qb * qb.transpose()).norm()
}

impl SplitFixture {
    fn operator(&self, s: f64) -> Result<CompatibleOperator> {
        let d0 = (self.d0)(s);
        let op = validate_compatible(&self.sigma, &d0)?;
        let k = op.kernel();
        let k_given = &self.kernel;
        if k.ncols() != k_given.ncols()
            || max_abs(&(k * k.transpose() - k_given * k_given.transpose())) > 1e-9
        {
            return Err(Error::invalid(format!("ker D₀({s}) moves away from the fixed kernel")));
        }
        Ok(op)
    }

    fn omega(&self) -> DMatrix<f64> {
        self.kernel.transpose() * &self.sigma * &self.kernel
    }

    /// Associated Lagrangians of the two ends at s, as k×(k/2) bases in
    /// kernel coordinates.
    fn associated(&self, s: f64, op: &CompatibleOperator) -> Result<[DMatrix<f64>; 2]> {
        let left = EndData::new(op.clone(), Perturbation::zero(), (self.v1)(s), 1.0, Some(self.wall1.clone()))?;
        let right =
            EndData::new(op.reversed(), Perturbation::zero(), (self.v2)(s), 1.0, Some(self.wall2.clone()))?;
        let l1 = end_lagrangian(&left)?.ambient;
        let l2 = end_lagrangian(&right)?.ambient;
        Ok([self.kernel.transpose() * l1, self.kernel.transpose() * l2])
    }

    fn glued_problem(&self, s: f64, op: &CompatibleOperator) -> Problem<'static> {
        let end = 2.0 * self.half_length;
        let (v1, v2, w) = ((self.v1)(s), (self.v2)(s), op.i() * op.a());
        Problem {
            sigma: self.sigma.clone(),
            pieces: vec![
                Piece { a: -1.0, b: 0.0, w: Box::new(move |_| v1.clone()) },
                Piece { a: 0.0, b: end, w: Box::new(move |_| w.clone()) },
                Piece { a: end, b: end + 1.0, w: Box::new(move |_| v2.clone()) },
            ],
            left: Some(self.wall1.clone()),
            right: Some(self.wall2.clone()),
        }
    }

    fn body_problems(
        &self,
        s: f64,
        op: &CompatibleOperator,
        l: &[DMatrix<f64>; 2],
    ) -> Result<[Problem<'static>; 2]> {
        let right1 = aps_condition(op, &(&self.kernel * &l[0]), true, "l₁")?;
        let left2 = aps_condition(op, &(&self.kernel * &l[1]), false, "l₂")?;
        let (v1, v2) = ((self.v1)(s), (self.v2)(s));
        Ok([
            Problem {
                sigma: self.sigma.clone(),
                pieces: vec![Piece { a: -1.0, b: 0.0, w: Box::new(move |_| v1.clone()) }],
                left: Some(self.wall1.clone()),
                right: Some(right1),
            },
            Problem {
                sigma: self.sigma.clone(),
                pieces: vec![Piece { a: 0.0, b: 1.0, w: Box::new(move |_| v2.clone()) }],
                left: Some(left2),
                right: Some(self.wall2.clone()),
            },
        ])
    }
}

/// Largest subspace motion between consecutive Lagrangian samples.
const MASLOV_STEP: f64 = 0.05;

/// Evaluates both sides of SF(D(s)(L)) = Σⱼ SF_ε(Dⱼ(s)(lⱼ(s))) + Mas(l₁, l₂).
pub fn split_identity(f: &SplitFixture) -> Result<SplitReport> {
    if f.samples < 3 || !(f.b > f.a) {
        return Err(Error::invalid("need a < b and at least three samples"));
    }
    if !(f.half_length > 0.0 && f.h > 0.0 && f.window > 0.0 && f.body_eps > 0.0) {
        return Err(Error::invalid("L, h, window and ε must be positive"));
    }
    let omega = f.omega();
    let eye = DMatrix::<f64>::identity(omega.nrows(), omega.nrows());
    for (j, tw) in [&f.twist1, &f.twist2].into_iter().enumerate() {
        for s in [f.a, f.b] {
            if max_abs(&(tw(s) - &eye)) > 1e-12 {
                return Err(Error::invalid(format!("twist {} is not the identity at s = {s}", j + 1)));
            }
        }
    }
    let eps_glued = 1.0 / (f.half_length * f.half_length);
    let lagrangians = |s: f64| -> Result<(CompatibleOperator, [DMatrix<f64>; 2])> {
        let op = f.operator(s)?;
        let [a1, a2] = f.associated(s, &op)?;
        let l = [(f.twist1)(s) * a1, (f.twist2)(s) * a2];
        for (j, lj) in l.iter().enumerate() {
            let dev = max_abs(&(lj.transpose() * &omega * lj));
            if dev > 1e-9 {
                return Err(Error::invalid(format!("twist {} does not preserve ω at s = {s}", j + 1)));
            }
        }
        Ok((op, l))
    };
    let spectra = |s: f64, which: usize| -> Result<Vec<f64>> {
        let (op, l) = lagrangians(s)?;
        if which == 0 {
            return f.glued_problem(s, &op).discretize(f.h, 0)?.signed_spectrum(f.window);
        }
        let p = f.body_problems(s, &op, &l)?;
        p[which - 1].discretize(f.h, 0)?.signed_spectrum(f.window)
    };
    let grid: Vec<f64> = (0..f.samples).map(|k| f.a + (f.b - f.a) * k as f64 / (f.samples - 1) as f64).collect();
    let mut samples = Vec::with_capacity(f.samples);
    for &s in &grid {
        samples.push(SplitSample { s, glued: spectra(s, 0)?, body1: spectra(s, 1)?, body2: spectra(s, 2)? });
    }
    let series = |pick: fn(&SplitSample) -> &Vec<f64>| -> Vec<(f64, &Vec<f64>)> {
        samples.iter().map(|x| (x.s, pick(x))).collect()
    };
    // Lagrangian pairs on a grid refined until consecutive subspaces are close
    let mut pairs = Vec::new();
    let mut stack: Vec<(f64, [DMatrix<f64>; 2], f64, [DMatrix<f64>; 2], u32)> = Vec::new();
    let mut prev = (grid[0], lagrangians(grid[0])?.1);
    pairs.push(prev.clone());
    for &s in &grid[1..] {
        stack.push((prev.0, prev.1.clone(), s, lagrangians(s)?.1, 0));
        while let Some((s0, l0, s1, l1, depth)) = stack.pop() {
            let gap = subspace_gap(&l0[0], &l1[0]).max(subspace_gap(&l0[1], &l1[1]));
            if gap > MASLOV_STEP && depth < 2 * MAX_BISECTIONS {
                let sm = 0.5 * (s0 + s1);
                let lm = lagrangians(sm)?.1;
                stack.push((sm, lm.clone(), s1, l1, depth + 1));
                stack.push((s0, l0, sm, lm, depth + 1));
            } else {
                pairs.push((s1, l1.clone()));
                prev = (s1, l1);
            }
        }
    }
    let glued_flow = windowed_flow(&|s| spectra(s, 0), &series(|x| &x.glued), eps_glued, f.window, "glued")?;
    // the body spectra follow the Lagrangians, so they use the refined grid
    let mut body_flows = [0i64; 2];
    for (j, flow) in body_flows.iter_mut().enumerate() {
        let spectrum_at = |s: f64| spectra(s, j + 1);
        let values = pairs.iter().map(|(s, _)| Ok((*s, spectrum_at(*s)?))).collect::<Result<Vec<_>>>()?;
        let refs: Vec<(f64, &Vec<f64>)> = values.iter().map(|(s, v)| (*s, v)).collect();
        *flow = windowed_flow(&spectrum_at, &refs, f.body_eps, f.window, if j == 0 { "body 1" } else { "body 2" })?;
    }
    let pairs = pairs
        .into_iter()
        .map(|(s, l)| Ok((s, Lagrangian::new(l[1].clone(), omega.clone())?, Lagrangian::new(l[0].clone(), omega.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    // the crossing form is normalized on the rotating line; with that sign
    // the identity pairs the right end first
    let maslov = maslov_index(&pairs)?.index;
    Ok(SplitReport { name: f.name.clone(), glued_flow, body_flows, maslov, samples })
}

/// Parameters of the toy family used for the splitting checks.
///
/// Fiber R⁴ with σ = J ⊕ J, ker D₀ = span(e₁, e₂), D₀(s) = 0 ⊕ m(s)·R(θ(s))
/// with R(θ) the traceless reflection at angle θ = `d0_turn`·s and
/// m = `d0_scale[0]` + `d0_scale[1]`·s. Body j carries
/// Vⱼ(s) = `shift[j]`·s + `coupling[j]`·Cⱼ(s) with fixed trigonometric
/// symmetric Cⱼ, and its Lagrangian is twisted by `windings[j]` full turns.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyParams {
    pub name: alloc::string::String,
    pub d0_turn: f64,
    pub d0_scale: [f64; 2],
    pub shift: [f64; 2],
    pub coupling: [f64; 2],
    pub windings: [i32; 2],
    pub half_length: f64,
    pub samples: usize,
    pub h: f64,
    pub window: f64,
    pub body_eps: f64,
}

fn j_sum() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for b in [0, 2] {
        m[(b, b + 1)] = -1.0;
        m[(b + 1, b)] = 1.0;
    }
    m
}

fn coupling_matrix(j: usize, s: f64) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(4, 4);
    for r in 0..4 {
        for k in r..4 {
            let v = (1.0 + 3.0 * r as f64 + 5.0 * k as f64 + 7.0 * j as f64).sin() * (1.0 + 0.5 * (2.0 * s + j as f64).cos());
            c[(r, k)] = v;
            c[(k, r)] = v;
        }
    }
    c
}

fn planar_rotation(angle: f64) -> DMatrix<f64> {
    let (sn, cs) = angle.sin_cos();
    let mut m = DMatrix::from_row_slice(2, 2, &[cs, -sn, sn, cs]);
    // exact at whole turns so the endpoint check sees the identity
    if (angle / core::f64::consts::TAU).fract().abs() < 1e-14 {
        m.fill_with_identity();
    }
    m
}

pub fn toy_fixture(p: &ToyParams) -> Result<SplitFixture> {
    if p.d0_scale[0] <= 0.0 || p.d0_scale[0] + p.d0_scale[1] <= 0.0 {
        return Err(Error::invalid("D₀ must keep a positive scale on [0, 1]"));
    }
    let basis = |idx: [usize; 2]| DMatrix::from_fn(4, 2, |r, c| if r == idx[c] { 1.0 } else { 0.0 });
    let (turn, scale, shift, coupling, windings) = (p.d0_turn, p.d0_scale, p.shift, p.coupling, p.windings);
    let body = move |j: usize| -> Box<dyn Fn(f64) -> DMatrix<f64>> {
        Box::new(move |s| DMatrix::identity(4, 4) * (shift[j] * s) + coupling_matrix(j, s) * coupling[j])
    };
    let twist = move |j: usize| -> Box<dyn Fn(f64) -> DMatrix<f64>> {
        Box::new(move |s| planar_rotation(core::f64::consts::TAU * windings[j] as f64 * s))
    };
    Ok(SplitFixture {
        name: p.name.clone(),
        sigma: j_sum(),
        kernel: basis([0, 1]),
        d0: Box::new(move |s| {
            let (sn, cs) = (turn * s).sin_cos();
            let m = scale[0] + scale[1] * s;
            let mut d = DMatrix::zeros(4, 4);
            d[(2, 2)] = m * cs;
            d[(3, 3)] = -m * cs;
            d[(2, 3)] = m * sn;
            d[(3, 2)] = m * sn;
            d
        }),
        v1: body(0),
        v2: body(1),
        wall1: basis([0, 2]),
        wall2: basis([1, 3]),
        twist1: twist(0),
        twist2: twist(1),
        a: 0.0,
        b: 1.0,
        samples: p.samples,
        half_length: p.half_length,
        h: p.h,
        window: p.window,
        body_eps: p.body_eps,
    })
}

/// Ten members of the toy family covering moving D₀, body flows of both
/// signs and twisted Lagrangian paths.
pub fn toy_suite() -> Vec<ToyParams> {
    let base = ToyParams {
        name: alloc::string::String::new(),
        d0_turn: 0.0,
        d0_scale: [1.0, 0.0],
        shift: [0.0, 0.0],
        coupling: [0.0, 0.0],
        windings: [0, 0],
        half_length: 12.0,
        samples: 41,
        h: 0.2,
        window: 0.6,
        body_eps: 0.0137,
    };
    let rows: [(&str, f64, [f64; 2], [f64; 2], [f64; 2], [i32; 2]); 10] = [
        ("static", 0.0, [1.0, 0.0], [0.0, 0.0], [0.2, 0.2], [0, 0]),
        ("left-shift", 0.0, [1.0, 0.0], [2.0, 0.0], [0.0, 0.0], [0, 0]),
        ("right-shift", 0.0, [1.0, 0.0], [0.0, -2.5], [0.0, 0.3], [0, 0]),
        ("turning-d0", 3.0, [1.0, 0.5], [1.0, 0.0], [0.1, 0.0], [0, 0]),
        ("left-twist", 1.0, [1.0, 0.3], [2.0, 1.0], [0.0, 0.0], [1, 0]),
        ("right-twist", 0.0, [1.0, 0.0], [3.5, 0.0], [0.0, 0.0], [0, -1]),
        ("double-twist", 2.0, [0.8, 0.4], [-1.5, 1.5], [0.2, -0.2], [1, 1]),
        ("opposed-twists", 0.0, [1.2, -0.4], [1.0, 1.0], [0.15, 0.1], [-1, 1]),
        ("coupled", 4.0, [1.0, 0.0], [-2.0, -1.0], [0.3, 0.3], [0, 0]),
        ("wound", 1.5, [1.0, 0.2], [2.5, -2.0], [0.1, 0.2], [2, -1]),
    ];
    rows.iter()
        .map(|&(name, turn, scale, shift, coupling, windings)| ToyParams {
            name: name.into(),
            d0_turn: turn,
            d0_scale: scale,
            shift,
            coupling,
            windings,
            ..base.clone()
        })
        .collect()
}
