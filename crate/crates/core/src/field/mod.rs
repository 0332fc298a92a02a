//! Pseudo-spectral fields (A, ψ) on flat 3-dimensional tori, the
//! Chern-Simons-Dirac functional with its perturbations, the gradient
//! (the Seiberg-Witten map), gauge action, holonomy perturbations, the
//! extended Hessian K and a descent driver.
//!
//! Conventions. A connection is A = i·a with real coefficient fields a_j
//! in the coframe dx¹, dx², dx³. The spinor of a twisted direction with
//! flag k_j carries the phase e^{i k_j π x_j / ℓ_j}; only the periodic part
//! χ is stored, so ψ = e^{iθ}χ and ∂_j acts on a mode m of χ as
//! i(2π/ℓ_j)(m + k_j/2). Fields are band-limited: the Nyquist row of every
//! untwisted direction is dropped, twisted directions keep all N modes.
//! Products are formed on a 3N/2 collocation grid, which makes the
//! quadratic and cubic integrals exact for band-limited data.

mod functional;
mod gauge;
mod hessian;
mod spectral;
mod flow;

pub use flow::{gradient_flow, FlowObjective, FlowSettings, Trajectory, TrajectoryStep};
pub use functional::{csd, holonomy_pq, linearized_gradient, loop_holonomies, sw_gradient, CsdTerms, csd_terms};
pub use gauge::{gauge_apply, sigma_involution, GaugeElement};
pub use hessian::{basis_labels, hessian_assemble, BasisLabel, Hessian, RealKind};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::clifford::Spinor2;
use crate::{Error, Result};

pub(crate) use spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// (R/2πZ)³.
    Torus3,
    /// T² × [0, L_t] with the t direction closed up periodically.
    Cylinder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid3 {
    pub geometry: Geometry,
    pub n: [usize; 3],
    pub lengths: [f64; 3],
    /// Twist flags k_j ∈ {0, 1}; a flag 1 gives the spinor half-integer
    /// modes along that direction.
    pub spin: [u8; 3],
}

impl Grid3 {
    pub fn torus3(n: [usize; 3], spin: [u8; 3]) -> Result<Self> {
        let tau = 2.0 * core::f64::consts::PI;
        let g = Grid3 {
            geometry: Geometry::Torus3,
            n,
            lengths: [tau; 3],
            spin,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn cylinder(n: [usize; 3], l_t: f64, spin: [u8; 3]) -> Result<Self> {
        let tau = 2.0 * core::f64::consts::PI;
        let g = Grid3 {
            geometry: Geometry::Cylinder,
            n,
            lengths: [tau, tau, l_t],
            spin,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for j in 0..3 {
            if self.n[j] < 4 || self.n[j] % 2 != 0 {
                return Err(Error::invalid(format!(
                    "grid size {} along axis {j} must be even and at least 4",
                    self.n[j]
                )));
            }
            if !(self.lengths[j] > 0.0 && self.lengths[j].is_finite()) {
                return Err(Error::invalid(format!("axis {j} length must be positive")));
            }
            if self.spin[j] > 1 {
                return Err(Error::invalid(format!("twist flag on axis {j} must be 0 or 1")));
            }
        }
        if self.geometry == Geometry::Torus3 {
            let tau = 2.0 * core::f64::consts::PI;
            if self.lengths.iter().any(|l| (l - tau).abs() > 1e-12) {
                return Err(Error::invalid("torus3 has all lengths 2π"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.n[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n[1] + i[1]) * self.n[2] + i[2]
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.n[2];
        let j = (idx / self.n[2]) % self.n[1];
        let i = idx / (self.n[1] * self.n[2]);
        [i, j, k]
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        [0, 1, 2].map(|a| m[a] as f64 * self.spacing(a))
    }

    /// Whether a loop along `axis` closes up.
    pub fn is_closed_direction(&self, axis: usize) -> bool {
        axis < 2 || self.geometry == Geometry::Torus3
    }

    pub fn padded(&self) -> [usize; 3] {
        self.n.map(|n| 3 * n / 2)
    }
}

/// A discretized configuration, or a tangent vector at one: three real
/// coefficient fields of the imaginary 1-form and the periodic part of the
/// spinor, all as values on the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Grid3,
    pub a: [Vec<f64>; 3],
    pub z: Vec<C64>,
    pub w: Vec<C64>,
}

impl FieldState {
    pub fn zero(grid: &Grid3) -> Self {
        let n = grid.len();
        FieldState {
            grid: grid.clone(),
            a: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            z: vec![C64::new(0.0, 0.0); n],
            w: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let n = self.grid.len();
        if self.a.iter().any(|c| c.len() != n) || self.z.len() != n || self.w.len() != n {
            return Err(Error::GridMismatch("field arrays do not match the grid size".into()));
        }
        let finite = self.a.iter().flatten().all(|x| x.is_finite())
            && self.z.iter().chain(self.w.iter()).all(|c| c.re.is_finite() && c.im.is_finite());
        if !finite {
            return Err(Error::numerical("non-finite field value"));
        }
        Ok(())
    }

    pub fn spinor(&self, idx: usize) -> Spinor2 {
        Spinor2::new(self.z[idx], self.w[idx])
    }

    /// Real L² product ∫ a·b + Re⟨χ, φ⟩ by grid quadrature (exact for
    /// band-limited fields).
    pub fn dot(&self, other: &FieldState) -> f64 {
        let mut s = 0.0;
        for j in 0..3 {
            s += self.a[j].iter().zip(&other.a[j]).map(|(x, y)| x * y).sum::<f64>();
        }
        for i in 0..self.z.len() {
            s += (self.z[i] * other.z[i].conj()).re + (self.w[i] * other.w[i].conj()).re;
        }
        s * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// self + s·other.
    pub fn add_scaled(&self, s: f64, other: &FieldState) -> FieldState {
        let mut out = self.clone();
        for j in 0..3 {
            for (x, y) in out.a[j].iter_mut().zip(&other.a[j]) {
                *x += s * y;
            }
        }
        for (x, y) in out.z.iter_mut().zip(&other.z) {
            *x += y * s;
        }
        for (x, y) in out.w.iter_mut().zip(&other.w) {
            *x += y * s;
        }
        out
    }

    pub fn scaled(&self, s: f64) -> FieldState {
        FieldState::zero(&self.grid).add_scaled(s, self)
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for c in &self.a {
            for x in c {
                m = m.max(x.abs());
            }
        }
        for c in self.z.iter().chain(self.w.iter()) {
            m = m.max(c.norm());
        }
        m
    }

    /// The band-limited representative of this state.
    pub fn band_limited(&self) -> Result<FieldState> {
        let sp = Spectral::new(&self.grid);
        sp.project_state(self)
    }

    pub(crate) fn check_grid(&self, other: &Grid3) -> Result<()> {
        if &self.grid != other {
            return Err(Error::GridMismatch(format!(
                "state grid {:?} differs from {:?}",
                self.grid.n, other.n
            )));
        }
        Ok(())
    }
}

/// A thickened loop along a coordinate axis: the family of parallel circles
/// through the transverse grid points, weighted by the bump η.
#[derive(Debug, Clone, PartialEq)]
pub struct ThickenedLoop {
    pub axis: usize,
    pub center: [f64; 2],
    /// Weights on the transverse grid, indexed as (i₁·n₂ + i₂) over the two
    /// remaining axes in increasing order; Σ η·(cell area) = 1.
    pub eta: Vec<f64>,
    pub v: f64,
    pub w: f64,
}

/// The two axes transverse to `axis`, in increasing order.
pub fn transverse_axes(axis: usize) -> [usize; 2] {
    match axis {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

impl ThickenedLoop {
    /// Smooth polynomial bump (1 − (d/radius)²)² around `center`,
    /// normalized to unit integral on the transverse torus.
    pub fn bump(grid: &Grid3, axis: usize, center: [f64; 2], radius: f64, v: f64, w: f64) -> Result<Self> {
        if axis > 2 || !grid.is_closed_direction(axis) {
            return Err(Error::invalid(format!("axis {axis} is not a closed direction")));
        }
        if !(radius > 0.0) {
            return Err(Error::invalid("bump radius must be positive"));
        }
        let [t1, t2] = transverse_axes(axis);
        let (n1, n2) = (grid.n[t1], grid.n[t2]);
        let (l1, l2) = (grid.lengths[t1], grid.lengths[t2]);
        let area = grid.spacing(t1) * grid.spacing(t2);
        let periodic = |x: f64, l: f64| {
            let r = x - l * (x / l).floor();
            r.min(l - r)
        };
        let mut eta = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                let dx = periodic(i as f64 * grid.spacing(t1) - center[0], l1);
                let dy = periodic(j as f64 * grid.spacing(t2) - center[1], l2);
                let d2 = (dx * dx + dy * dy) / (radius * radius);
                if d2 < 1.0 {
                    eta[i * n2 + j] = (1.0 - d2) * (1.0 - d2);
                }
            }
        }
        let total: f64 = eta.iter().sum::<f64>() * area;
        if total <= 0.0 {
            return Err(Error::invalid("bump radius too small to cover any grid point"));
        }
        for e in eta.iter_mut() {
            *e /= total;
        }
        Ok(ThickenedLoop { axis, center, eta, v, w })
    }

    pub fn validate(&self, grid: &Grid3) -> Result<()> {
        if self.axis > 2 || !grid.is_closed_direction(self.axis) {
            return Err(Error::invalid(format!("loop axis {} is not closed", self.axis)));
        }
        let [t1, t2] = transverse_axes(self.axis);
        if self.eta.len() != grid.n[t1] * grid.n[t2] {
            return Err(Error::GridMismatch("η does not match the transverse grid".into()));
        }
        if self.eta.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::invalid("η must be nonnegative"));
        }
        let area = grid.spacing(t1) * grid.spacing(t2);
        let total: f64 = self.eta.iter().sum::<f64>() * area;
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("η integrates to {total}, not 1")));
        }
        Ok(())
    }
}

/// The perturbation data (f, μ, loops) of CSD_f, CSD′_μ and the holonomy
/// functional Σ (v p + w q). μ = i·m is stored by its real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationData {
    pub f: Vec<f64>,
    pub mu: [Vec<f64>; 3],
    pub loops: Vec<ThickenedLoop>,
}

impl PerturbationData {
    pub fn zero(grid: &Grid3) -> Self {
        let n = grid.len();
        PerturbationData {
            f: vec![0.0; n],
            mu: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            loops: Vec::new(),
        }
    }

    pub fn validate(&self, grid: &Grid3) -> Result<()> {
        let n = grid.len();
        if self.f.len() != n || self.mu.iter().any(|m| m.len() != n) {
            return Err(Error::GridMismatch("perturbation arrays do not match the grid".into()));
        }
        for l in &self.loops {
            l.validate(grid)?;
        }
        let sp = Spectral::new(grid);
        let div = sp.divergence(&self.mu);
        let scale = 1.0 + self.mu.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
        let worst = div.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if worst > 1e-10 * scale {
            return Err(Error::invalid(format!("μ is not co-closed (max |div μ| = {worst:e})")));
        }
        Ok(())
    }
}
