//! Eigenvalue tracking along paths of symmetric matrices, (ε₁, ε₂)-spectral
//! flow, crossing derivatives, second-order small-eigenvalue asymptotics,
//! the signed count χ, Maslov indices and planar intersection numbers.

mod chi;
mod intersect;
mod maslov;
mod perturb;

pub use chi::{chi_count, chi_relative, endpoint_flow, ChiReference};
pub use intersect::{intersection_number, Polyline};
pub use maslov::{maslov_index, Lagrangian, MaslovCrossing, MaslovReport};
pub use perturb::{fit_small_eigenvalue, kuranishi_triple, small_eig_quadratic, KuranishiFit, KuranishiModel};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::linalg::{max_abs, max_asymmetry, sym_eigen, SymEigen};
use crate::{Error, Result};

/// Minimal eigenvector overlap accepted between consecutive samples.
pub const OVERLAP_FLOOR: f64 = 0.7;

/// Samples (t, D(t)) of a path of symmetric matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPath {
    ts: Vec<f64>,
    ops: Vec<DMatrix<f64>>,
}

impl OperatorPath {
    pub fn new(samples: Vec<(f64, DMatrix<f64>)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("an operator path needs at least two samples"));
        }
        let d = samples[0].1.nrows();
        for (k, (t, m)) in samples.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::invalid(format!("sample {k} is not {d}×{d}")));
            }
            if !t.is_finite() || m.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("sample {k} is not finite")));
            }
            let asym = max_asymmetry(m);
            if asym > 1e-10 * (1.0 + max_abs(m)) {
                return Err(Error::invalid(format!("sample {k} is not symmetric (asymmetry {asym:e})")));
            }
            if k > 0 && !(*t > samples[k - 1].0) {
                return Err(Error::invalid("sample parameters must increase strictly"));
            }
        }
        let (ts, ops) = samples.into_iter().unzip();
        Ok(OperatorPath { ts, ops })
    }

    /// n + 1 equally spaced samples of `f` on [a, b].
    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> DMatrix<f64>) -> Result<Self> {
        if n == 0 || !(b > a) {
            return Err(Error::invalid("need b > a and at least one interval"));
        }
        Self::new(
            (0..=n)
                .map(|k| {
                    let t = a + (b - a) * k as f64 / n as f64;
                    (t, f(t))
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn ops(&self) -> &[DMatrix<f64>] {
        &self.ops
    }

    pub fn start(&self) -> f64 {
        self.ts[0]
    }

    pub fn end(&self) -> f64 {
        self.ts[self.ts.len() - 1]
    }

    /// Piecewise-linear value at t ∈ [a, b].
    pub fn at(&self, t: f64) -> Result<DMatrix<f64>> {
        if t < self.start() || t > self.end() {
            return Err(Error::invalid(format!("t = {t} outside the path")));
        }
        let k = self.ts.partition_point(|&s| s <= t).clamp(1, self.ts.len() - 1);
        let (t0, t1) = (self.ts[k - 1], self.ts[k]);
        let w = (t - t0) / (t1 - t0);
        Ok(&self.ops[k - 1] * (1.0 - w) + &self.ops[k] * w)
    }

    /// This path followed by `other`; the junction samples must agree.
    pub fn concat(&self, other: &OperatorPath) -> Result<OperatorPath> {
        if (other.start() - self.end()).abs() > 1e-12
            || max_abs(&(&other.ops[0] - &self.ops[self.ops.len() - 1])) > 1e-12
        {
            return Err(Error::invalid("paths do not meet at the junction"));
        }
        let mut samples: Vec<_> = self.ts.iter().copied().zip(self.ops.iter().cloned()).collect();
        samples.extend(other.ts.iter().copied().zip(other.ops.iter().cloned()).skip(1));
        OperatorPath::new(samples)
    }

    /// The path traversed backwards, reparametrized on [−b, −a].
    pub fn reversed(&self) -> OperatorPath {
        let samples = self.ts.iter().rev().map(|t| -t).zip(self.ops.iter().rev().cloned()).collect();
        OperatorPath::new(samples).expect("reversal of a valid path")
    }
}

/// Continuous eigenvalue branches of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrack {
    pub ts: Vec<f64>,
    /// curves[b][k] = λ_b(t_k).
    pub curves: Vec<Vec<f64>>,
    /// Smallest accepted overlap between consecutive samples.
    pub min_overlap: f64,
    pub window: f64,
}

impl SpectrumTrack {
    /// Branches that enter the window |λ| < δ somewhere.
    pub fn in_window(&self) -> Vec<usize> {
        (0..self.curves.len())
            .filter(|&b| self.curves[b].iter().any(|l| l.abs() < self.window))
            .collect()
    }

    pub fn values_at(&self, k: usize) -> Vec<f64> {
        self.curves.iter().map(|c| c[k]).collect()
    }
}

/// Tolerance below which eigenvalues are treated as one cluster.
fn cluster_tol(values: &[f64]) -> f64 {
    1e-9 * (1.0 + values.iter().fold(0.0f64, |a, b| a.max(b.abs())))
}

fn clusters(values: &[f64]) -> Vec<(usize, usize)> {
    let tol = cluster_tol(values);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            out.push((start, i));
            start = i;
        }
    }
    out
}

/// Rotates the basis of every degenerate cluster of `cur` towards the
/// eigenvectors of `next`, so that overlaps of individual vectors are
/// meaningful.
fn align_degenerate(cur: &mut SymEigen, next: &SymEigen) {
    let d = cur.values.len();
    for (lo, hi) in clusters(&cur.values) {
        let m = hi - lo;
        if m < 2 {
            continue;
        }
        let basis = cur.vectors.columns(lo, m).into_owned();
        let coeff = basis.transpose() * &next.vectors;
        let mut order: Vec<usize> = (0..d).collect();
        let norms: Vec<f64> = (0..d).map(|j| coeff.column(j).norm()).collect();
        order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
        let mut chosen: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(m);
        for &j in &order {
            if chosen.len() == m {
                break;
            }
            let mut v = &basis * coeff.column(j);
            for c in &chosen {
                let p = c.dot(&v);
                v -= c * p;
            }
            let n = v.norm();
            if n > 1e-6 {
                chosen.push(v / n);
            }
        }
        if chosen.len() == m {
            for (i, v) in chosen.into_iter().enumerate() {
                cur.vectors.set_column(lo + i, &v);
            }
        }
    }
}

/// Matches eigenvalue branches between consecutive samples by eigenvector
/// overlap (greedy on the overlap matrix).
pub fn track(path: &OperatorPath, window: f64) -> Result<SpectrumTrack> {
    let n = path.len();
    let d = path.dim();
    let mut eigs: Vec<SymEigen> = path.ops.iter().map(sym_eigen).collect();
    let mut curves = vec![Vec::with_capacity(n); d];
    // assign[b] = column index of branch b at the current sample
    let mut assign: Vec<usize> = (0..d).collect();
    for b in 0..d {
        curves[b].push(eigs[0].values[b]);
    }
    let mut min_overlap = 1.0f64;
    for k in 0..n - 1 {
        let (head, tail) = eigs.split_at_mut(k + 1);
        let cur = &mut head[k];
        let next = &tail[0];
        align_degenerate(cur, next);
        let o = cur.vectors.transpose() * &next.vectors;
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                pairs.push((o[(i, j)].abs(), i, j));
            }
        }
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut from_used = vec![false; d];
        let mut to_of = vec![usize::MAX; d];
        let mut used_to = vec![false; d];
        let mut step_min = 1.0f64;
        for (val, i, j) in pairs {
            if from_used[i] || used_to[j] {
                continue;
            }
            from_used[i] = true;
            used_to[j] = true;
            to_of[i] = j;
            step_min = step_min.min(val);
        }
        if step_min < OVERLAP_FLOOR {
            return Err(Error::RefinementNeeded {
                t0: path.ts[k],
                t1: path.ts[k + 1],
                reason: format!("eigenvector overlap {step_min:.3} below {OVERLAP_FLOOR}"),
            });
        }
        min_overlap = min_overlap.min(step_min);
        for b in 0..d {
            assign[b] = to_of[assign[b]];
            curves[b].push(next.values[assign[b]]);
        }
    }
    Ok(SpectrumTrack {
        ts: path.ts.clone(),
        curves,
        min_overlap,
        window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Interpolated parameter of the crossing.
    pub t: f64,
    /// Slope of the branch relative to the line on the crossing interval.
    pub slope: f64,
    /// +1 upward, −1 downward.
    pub direction: i32,
    pub branch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport {
    pub a: f64,
    pub b: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub flow: i64,
    pub crossings: Vec<Crossing>,
}

/// Signed count of branches crossing the line from (a, ε₁) to (b, ε₂):
/// upward crossings minus downward ones.
pub fn spectral_flow(track: &SpectrumTrack, eps1: f64, eps2: f64) -> Result<FlowReport> {
    let ts = &track.ts;
    let n = ts.len();
    let (a, b) = (ts[0], ts[n - 1]);
    let line = |t: f64| eps1 + (eps2 - eps1) * (t - a) / (b - a);
    let scale = track
        .curves
        .iter()
        .flatten()
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-12 * scale;
    let mut crossings = Vec::new();
    for (br, c) in track.curves.iter().enumerate() {
        let g: Vec<f64> = (0..n).map(|k| c[k] - line(ts[k])).collect();
        if g[0].abs() <= tol || g[n - 1].abs() <= tol {
            return Err(Error::precondition(format!(
                "branch {br} meets the line at an endpoint; choose another ε"
            )));
        }
        let mut last = 0usize;
        for k in 1..n {
            if g[k].abs() <= tol {
                continue;
            }
            if g[k].signum() != g[last].signum() {
                let w = g[last] / (g[last] - g[k]);
                let t = ts[last] + w * (ts[k] - ts[last]);
                crossings.push(Crossing {
                    t,
                    slope: (g[k] - g[last]) / (ts[k] - ts[last]),
                    direction: if g[k] > 0.0 { 1 } else { -1 },
                    branch: br,
                });
            }
            last = k;
        }
    }
    crossings.sort_by(|x, y| x.t.partial_cmp(&y.t).unwrap());
    let flow = crossings.iter().map(|c| c.direction as i64).sum();
    Ok(FlowReport {
        a,
        b,
        eps1,
        eps2,
        flow,
        crossings,
    })
}

/// Half the smallest |λ| over the two endpoints.
pub fn default_epsilon(track: &SpectrumTrack) -> Result<f64> {
    let n = track.ts.len();
    let gap = track
        .curves
        .iter()
        .flat_map(|c| [c[0].abs(), c[n - 1].abs()])
        .fold(f64::INFINITY, f64::min);
    if !(gap > 0.0) {
        return Err(Error::precondition("an endpoint operator is singular"));
    }
    Ok(0.5 * gap)
}

/// The plain spectral flow: the (ε, ε) flow for the default ε.
pub fn spectral_flow_default(track: &SpectrumTrack) -> Result<FlowReport> {
    let e = default_epsilon(track)?;
    spectral_flow(track, e, e)
}

/// ⟨Ḋ(t_i)v, v⟩ with Ḋ from central differences of the neighbouring
/// samples. The crossing must sit at t_i: ‖D(t_i)v‖ small.
pub fn crossing_derivative(path: &OperatorPath, t_i: f64, v: &nalgebra::DVector<f64>) -> Result<f64> {
    if v.len() != path.dim() {
        return Err(Error::invalid("eigenvector dimension differs from the path"));
    }
    let nv = v.norm();
    if (nv - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!("eigenvector has norm {nv}, expected 1")));
    }
    let d = path.at(t_i)?;
    let scale = 1.0 + max_abs(&d);
    let resid = (&d * v).norm();
    let ts = path.ts();
    let k = ts.partition_point(|&s| s < t_i).clamp(1, ts.len() - 1);
    let dt_local = ts[k] - ts[k - 1];
    let dd = {
        let lo = if k >= 2 { k - 2 } else { k - 1 };
        let hi = (k + 1).min(ts.len() - 1);
        (&path.ops()[hi] - &path.ops()[lo]) / (ts[hi] - ts[lo])
    };
    // a crossing within the sampling interval leaves a residual of order
    // ‖Ḋ‖·Δt
    let allowed = 1e-8 * scale + max_abs(&dd) * dt_local;
    if resid > allowed {
        return Err(Error::precondition(format!(
            "no zero eigenvalue with this eigenvector at t = {t_i} (‖D v‖ = {resid:e})"
        )));
    }
    Ok(v.dot(&(&dd * v)))
}
