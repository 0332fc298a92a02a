use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::{Error, Result};

/// An oriented polyline in R², or on the cylinder R²/(pZ × 0) when a
/// period p in x is given. Vertices on the cylinder are given as a lift.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub period: Option<f64>,
}

impl Polyline {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        Self::build(points, None)
    }

    pub fn on_cylinder(points: Vec<[f64; 2]>, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::invalid("the cylinder period must be positive"));
        }
        Self::build(points, Some(period))
    }

    fn build(points: Vec<[f64; 2]>, period: Option<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("a polyline needs at least two vertices"));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("polyline vertices must be finite"));
        }
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("polyline has a repeated vertex"));
        }
        Ok(Polyline { points, period })
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> Polyline {
        let mut p = self.points.clone();
        p.reverse();
        Polyline { points: p, period: self.period }
    }

    /// Every segment split into `k` equal pieces.
    pub fn refined(&self, k: usize) -> Polyline {
        let k = k.max(1);
        let mut pts = Vec::with_capacity((self.points.len() - 1) * k + 1);
        for w in self.points.windows(2) {
            for i in 0..k {
                let s = i as f64 / k as f64;
                pts.push([w[0][0] + s * (w[1][0] - w[0][0]), w[0][1] + s * (w[1][1] - w[0][1])]);
            }
        }
        pts.push(self.points[self.points.len() - 1]);
        Polyline { points: pts, period: self.period }
    }
}

#[derive(Clone, Copy)]
struct Seg {
    p: [f64; 2],
    q: [f64; 2],
    xmin: f64,
    xmax: f64,
}

fn segments(c: &Polyline) -> Vec<Seg> {
    c.points
        .windows(2)
        .map(|w| Seg {
            p: w[0],
            q: w[1],
            xmin: w[0][0].min(w[1][0]),
            xmax: w[0][0].max(w[1][0]),
        })
        .collect()
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Sign of the crossing of s with t shifted by `dx`, if they cross.
fn crossing(s: &Seg, t: &Seg, dx: f64) -> Result<Option<i64>> {
    let (tp, tq) = ([t.p[0] + dx, t.p[1]], [t.q[0] + dx, t.q[1]]);
    let ymin = |a: [f64; 2], b: [f64; 2]| a[1].min(b[1]);
    let ymax = |a: [f64; 2], b: [f64; 2]| a[1].max(b[1]);
    if ymax(s.p, s.q) < ymin(tp, tq) || ymax(tp, tq) < ymin(s.p, s.q) {
        return Ok(None);
    }
    let o1 = orient(s.p, s.q, tp);
    let o2 = orient(s.p, s.q, tq);
    let o3 = orient(tp, tq, s.p);
    let o4 = orient(tp, tq, s.q);
    let ls = ((s.q[0] - s.p[0]).powi(2) + (s.q[1] - s.p[1]).powi(2)).sqrt();
    let lt = ((tq[0] - tp[0]).powi(2) + (tq[1] - tp[1]).powi(2)).sqrt();
    let tol = 1e-12 * ls * lt;
    let strict = |a: f64, b: f64| (a > tol && b < -tol) || (a < -tol && b > tol);
    if strict(o1, o2) && strict(o3, o4) {
        let ds = [s.q[0] - s.p[0], s.q[1] - s.p[1]];
        let dt = [tq[0] - tp[0], tq[1] - tp[1]];
        let w = ds[0] * dt[1] - ds[1] * dt[0];
        return Ok(Some(if w > 0.0 { 1 } else { -1 }));
    }
    let separated = |a: f64, b: f64| (a > tol && b > tol) || (a < -tol && b < -tol);
    if separated(o1, o2) || separated(o3, o4) {
        return Ok(None);
    }
    // a touching or collinear configuration
    let near = [(o1, tp), (o2, tq), (o3, s.p), (o4, s.q)]
        .into_iter()
        .find(|(o, _)| o.abs() <= tol)
        .map(|(_, p)| p)
        .unwrap_or(s.p);
    Err(Error::GeneralPosition {
        x: near[0],
        y: near[1],
        reason: "segments touch or overlap instead of crossing transversally".into(),
    })
}

/// Σ over crossing points of sign(tangent₁ ∧ tangent₂) against dx∧dy.
pub fn intersection_number(c1: &Polyline, c2: &Polyline) -> Result<i64> {
    if c1.period != c2.period {
        return Err(Error::invalid("curves live on different cylinders"));
    }
    let s1 = segments(c1);
    let mut s2 = segments(c2);
    s2.sort_by(|a, b| a.xmin.total_cmp(&b.xmin));
    let max_width = s2.iter().map(|s| s.xmax - s.xmin).fold(0.0, f64::max);
    let mut total = 0;
    for s in &s1 {
        let shifts: Vec<f64> = match c1.period {
            None => alloc::vec![0.0],
            Some(p) => {
                let (lo2, hi2) = s2.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| {
                    (a.min(t.xmin), b.max(t.xmax))
                });
                let kmin = ((s.xmin - hi2) / p).floor() as i64;
                let kmax = ((s.xmax - lo2) / p).ceil() as i64;
                (kmin..=kmax).map(|k| k as f64 * p).collect()
            }
        };
        for dx in shifts {
            // candidates have xmin + dx ≤ s.xmax and xmax + dx ≥ s.xmin
            let hi = s2.partition_point(|t| t.xmin + dx <= s.xmax);
            let lo = s2[..hi].partition_point(|t| t.xmin + dx + max_width < s.xmin);
            for t in &s2[lo..hi] {
                if t.xmax + dx < s.xmin {
                    continue;
                }
                if let Some(sg) = crossing(s, t, dx)? {
                    total += sg;
                }
            }
        }
    }
    Ok(total)
}
