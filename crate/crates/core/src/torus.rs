//! Twisted Dirac operators D^(k,l)_a on the flat torus R²/(2πZ)², the
//! lattice of bad harmonic twists, the model operator B_a and the gap
//! constants c(r), δ(r), δ₀(r).
//!
//! On the Fourier mode e^{i(mx+ny)} the operator is the 2×2 block
//! c(dx)·i·p₁ + c(dy)·i·p₂ with p = (m + k/2 + α, n + l/2 + β), where
//! c(dx) and c(dy) are the matrices c(e²), c(e³) of the 3-dimensional
//! Clifford module restricted to the torus.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::clifford::{clifford_matrix, Mat2};
use crate::linalg::{realify, sym_eigenvalues};
use crate::quasi::halton2;
use crate::{Error, Result};

/// One of the four spin structures ξ_(k,l) on T².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinStructure {
    pub k: u8,
    pub l: u8,
}

impl SpinStructure {
    pub fn new(k: u8, l: u8) -> Result<Self> {
        if k > 1 || l > 1 {
            return Err(Error::invalid(alloc::format!(
                "spin structure ({k},{l}) must have entries in {{0,1}}"
            )));
        }
        Ok(SpinStructure { k, l })
    }

    pub fn all() -> [SpinStructure; 4] {
        [(0, 0), (1, 0), (0, 1), (1, 1)].map(|(k, l)| SpinStructure { k, l })
    }

    pub fn offsets(&self) -> [f64; 2] {
        [0.5 * self.k as f64, 0.5 * self.l as f64]
    }
}

/// Coordinates of the harmonic twist a = iα·dx + iβ·dy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HarmonicPoint {
    pub alpha: f64,
    pub beta: f64,
}

impl HarmonicPoint {
    pub fn new(alpha: f64, beta: f64) -> Self {
        HarmonicPoint { alpha, beta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    ClosedForm,
    FourierDense,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Sorted eigenvalues of the real operator, with multiplicity.
    pub eigenvalues: Vec<f64>,
    /// Complex kernel dimension for Dirac spectra, real kernel dimension
    /// for B_a spectra.
    pub kernel_dim: usize,
    pub truncation: usize,
    pub method: SpectrumMethod,
}

impl SpectrumReport {
    pub fn smallest_abs(&self) -> f64 {
        self.eigenvalues.iter().fold(f64::INFINITY, |a, b| a.min(b.abs()))
    }
}

/// Kernel tolerance relative to the largest retained eigenvalue.
pub const KERNEL_RTOL: f64 = 1e-9;

pub fn kernel_count(eigs: &[f64]) -> usize {
    let lmax = eigs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let tol = KERNEL_RTOL * lmax.max(1.0);
    eigs.iter().filter(|l| l.abs() < tol).count()
}

/// Momentum (p₁, p₂) of the mode (m, n) after spin and twist offsets.
pub fn mode_momentum(s: SpinStructure, a: HarmonicPoint, mode: (i64, i64)) -> [f64; 2] {
    let [ok, ol] = s.offsets();
    [mode.0 as f64 + ok + a.alpha, mode.1 as f64 + ol + a.beta]
}

pub fn dirac_mode_matrix(s: SpinStructure, a: HarmonicPoint, mode: (i64, i64)) -> Mat2 {
    let [p1, p2] = mode_momentum(s, a, mode);
    let cx = clifford_matrix(1);
    let cy = clifford_matrix(2);
    let i = C64::new(0.0, 1.0);
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] = cx[r][c] * i * p1 + cy[r][c] * i * p2;
        }
    }
    m
}

fn modes(cutoff: usize) -> impl Iterator<Item = (i64, i64)> {
    let c = cutoff as i64;
    (-c..=c).flat_map(move |m| (-c..=c).map(move |n| (m, n)))
}

/// Spectrum of D^(k,l)_a over |m|, |n| ≤ cutoff from dense solves of the
/// realified mode blocks. Every complex eigenvalue appears twice.
pub fn dirac_spectrum(s: SpinStructure, a: HarmonicPoint, cutoff: usize) -> Result<SpectrumReport> {
    if cutoff < 1 {
        return Err(Error::invalid("mode cutoff must be at least 1"));
    }
    let mut eigs = Vec::with_capacity(4 * (2 * cutoff + 1).pow(2));
    for mode in modes(cutoff) {
        let block = dirac_mode_matrix(s, a, mode);
        let cm = DMatrix::from_fn(2, 2, |r, c| block[r][c]);
        eigs.extend(sym_eigenvalues(&realify(&cm)));
    }
    eigs.sort_by(f64::total_cmp);
    let kernel_dim = kernel_count(&eigs) / 2;
    Ok(SpectrumReport {
        eigenvalues: eigs,
        kernel_dim,
        truncation: cutoff,
        method: SpectrumMethod::FourierDense,
    })
}

/// Closed-form counterpart of [`dirac_spectrum`]: ±|p| per mode, each with
/// real multiplicity two.
pub fn dirac_spectrum_closed_form(
    s: SpinStructure,
    a: HarmonicPoint,
    cutoff: usize,
) -> Result<SpectrumReport> {
    if cutoff < 1 {
        return Err(Error::invalid("mode cutoff must be at least 1"));
    }
    let mut eigs = Vec::new();
    for mode in modes(cutoff) {
        let [p1, p2] = mode_momentum(s, a, mode);
        let r = (p1 * p1 + p2 * p2).sqrt();
        eigs.extend_from_slice(&[-r, -r, r, r]);
    }
    eigs.sort_by(f64::total_cmp);
    let kernel_dim = kernel_count(&eigs) / 2;
    Ok(SpectrumReport {
        eigenvalues: eigs,
        kernel_dim,
        truncation: cutoff,
        method: SpectrumMethod::ClosedForm,
    })
}

fn frac_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Distance from (α, β) to the bad lattice (k/2 + Z) × (l/2 + Z), which is
/// also the spectral gap of D^(k,l)_a.
pub fn bad_distance(s: SpinStructure, a: HarmonicPoint) -> f64 {
    let [ok, ol] = s.offsets();
    let dx = frac_dist(a.alpha + ok);
    let dy = frac_dist(a.beta + ol);
    (dx * dx + dy * dy).sqrt()
}

/// The bad point of ξ_(k,l) in the fundamental cell [0,1)².
pub fn bad_point(s: SpinStructure) -> HarmonicPoint {
    let [ok, ol] = s.offsets();
    HarmonicPoint::new(ok, ol)
}

/// All bad points with α, β in the closed box [lo, hi]².
pub fn bad_points_in(s: SpinStructure, lo: f64, hi: f64) -> Vec<HarmonicPoint> {
    let [ok, ol] = s.offsets();
    let mut out = Vec::new();
    let first = (lo - 1.0).floor() as i64;
    let last = (hi + 1.0).ceil() as i64;
    for i in first..=last {
        for j in first..=last {
            let p = HarmonicPoint::new(i as f64 + ok, j as f64 + ol);
            if p.alpha >= lo && p.alpha <= hi && p.beta >= lo && p.beta <= hi {
                out.push(p);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapConstants {
    pub c: f64,
    pub delta: f64,
    pub delta0: f64,
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::Domain {
            name: "r",
            value: r,
            domain: "0 < r < 0.5",
        });
    }
    Ok(())
}

/// Closed forms c(r) = r², δ(r) = min(r, 1), δ₀(r) = ¼·r²/(1 + r²) on
/// H(r) = {a : distance to the bad lattice ≥ r}.
pub fn gap_constants(_s: SpinStructure, r: f64) -> Result<GapConstants> {
    check_radius(r)?;
    Ok(GapConstants {
        c: r * r,
        delta: r.min(1.0),
        delta0: 0.25 * r * r / (1.0 + r * r),
    })
}

/// Sample points of H(r) inside one lattice cell around the bad point:
/// half of them on the circle of radius r, the rest quasi-random points of
/// the cell at distance ≥ r.
pub fn gap_sample_points(s: SpinStructure, r: f64, count: usize) -> Result<Vec<HarmonicPoint>> {
    check_radius(r)?;
    let centre = bad_point(s);
    let mut pts = Vec::with_capacity(count);
    let on_circle = count / 2;
    for j in 0..on_circle {
        let th = 2.0 * core::f64::consts::PI * j as f64 / on_circle as f64;
        pts.push(HarmonicPoint::new(
            centre.alpha + r * th.cos(),
            centre.beta + r * th.sin(),
        ));
    }
    let mut idx = 1u64;
    while pts.len() < count {
        let [u, v] = halton2(idx);
        idx += 1;
        let p = HarmonicPoint::new(centre.alpha - 0.5 + u, centre.beta - 0.5 + v);
        if bad_distance(s, p) >= r {
            pts.push(p);
        }
    }
    Ok(pts)
}

/// Dense-eigensolve estimate of the gap constants over sampled points of
/// H(r), with modes |m|, |n| ≤ cutoff.
pub fn sampled_gap_constants(
    s: SpinStructure,
    r: f64,
    count: usize,
    cutoff: usize,
) -> Result<GapConstants> {
    let pts = gap_sample_points(s, r, count)?;
    let mut c = f64::INFINITY;
    let mut d0 = f64::INFINITY;
    for p in &pts {
        let spec = dirac_spectrum(s, *p, cutoff)?;
        let lam = spec.smallest_abs();
        c = c.min(lam * lam);
        for l in &spec.eigenvalues {
            let q = l * l;
            d0 = d0.min(q / (1.0 + q));
        }
    }
    let form_gap = form_block_gap(cutoff);
    Ok(GapConstants {
        c,
        delta: c.sqrt().min(form_gap),
        delta0: 0.25 * d0,
    })
}

/// Smallest nonzero |eigenvalue| over the form blocks of B_a.
pub fn form_block_gap(cutoff: usize) -> f64 {
    let mut gap = f64::INFINITY;
    for mode in modes(cutoff) {
        for l in form_block_eigenvalues(mode) {
            if l.abs() > 1e-9 {
                gap = gap.min(l.abs());
            }
        }
    }
    gap
}

/// Hermitian block of B_a's form part on the mode (m, n), acting on the
/// coefficients (a_x, a_y, f, g) of a ∈ Ω¹ and f, g ∈ Ω⁰ (all imaginary
/// valued): a ↦ −df + ∗dg, f ↦ −d*a, g ↦ −∗da.
pub fn form_mode_matrix(mode: (i64, i64)) -> DMatrix<C64> {
    let (m, n) = (mode.0 as f64, mode.1 as f64);
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            z, z, -i * m, -i * n, //
            z, z, -i * n, i * m, //
            i * m, i * n, z, z, //
            i * n, -i * m, z, z,
        ],
    )
}

fn form_block_eigenvalues(mode: (i64, i64)) -> Vec<f64> {
    // counted once per complex mode: real fields have one real dimension
    // per Fourier mode
    let re = realify(&form_mode_matrix(mode));
    let eig = sym_eigenvalues(&re);
    eig.into_iter().step_by(2).collect()
}

/// Spectrum of B_a assembled mode by mode from the Dirac block (real
/// multiplicity two per complex eigenvalue) and the form blocks (one per
/// complex eigenvalue). The kernel dimension is reported over R.
pub fn b_operator_spectrum(s: SpinStructure, a: HarmonicPoint, cutoff: usize) -> Result<SpectrumReport> {
    let dirac = dirac_spectrum(s, a, cutoff)?;
    let mut eigs = dirac.eigenvalues;
    for mode in modes(cutoff) {
        eigs.extend(form_block_eigenvalues(mode));
    }
    eigs.sort_by(f64::total_cmp);
    Ok(SpectrumReport {
        kernel_dim: kernel_count(&eigs),
        eigenvalues: eigs,
        truncation: cutoff,
        method: SpectrumMethod::FourierDense,
    })
}

/// One cell of a bad-point scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSample {
    pub alpha: f64,
    pub beta: f64,
    pub gap: f64,
    pub kernel_dim: usize,
}

/// Scan of an n×n grid over the cell centred on the bad point of `s`:
/// α = k/2 + (i − c)/(n − 1), with c = (n − 1)/2, and likewise β.
pub fn badpoint_grid(s: SpinStructure, n: usize, cutoff: usize) -> Result<Vec<GridSample>> {
    if n < 2 {
        return Err(Error::invalid("grid needs at least two points per side"));
    }
    let centre = bad_point(s);
    let half = (n - 1) as f64 / 2.0;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let a = HarmonicPoint::new(
                centre.alpha + (i as f64 - half) / (n - 1) as f64,
                centre.beta + (j as f64 - half) / (n - 1) as f64,
            );
            let spec = dirac_spectrum(s, a, cutoff)?;
            out.push(GridSample {
                alpha: a.alpha,
                beta: a.beta,
                gap: spec.smallest_abs(),
                kernel_dim: spec.kernel_dim,
            });
        }
    }
    Ok(out)
}
