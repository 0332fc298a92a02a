//! Maslov index by crossing forms: the transversality determinant
//! det[X₁ X₂] is scanned for sign changes, each root is bisected, and the
//! crossing form ω(v, Ẋ₁α) − ω(v, Ẋ₂β) is evaluated on the intersection.

use nalgebra::DMatrix;

fn joint(x1: &DMatrix<f64>, x2: &DMatrix<f64>) -> DMatrix<f64> {
    let d = x1.nrows();
    let n = x1.ncols();
    let mut m = DMatrix::zeros(d, 2 * n);
    m.view_mut((0, 0), (d, n)).copy_from(x1);
    m.view_mut((0, n), (d, n)).copy_from(&(-x2));
    m
}

/// `frames(s)` returns frames (X₁(s), X₂(s)) of the two Lagrangians;
/// crossings are assumed one-dimensional and regular.
pub fn crossing_form_maslov(
    frames: impl Fn(f64) -> (DMatrix<f64>, DMatrix<f64>),
    omega: &DMatrix<f64>,
    a: f64,
    b: f64,
    samples: usize,
) -> i64 {
    let det = |s: f64| {
        let (x1, x2) = frames(s);
        joint(&x1, &x2).determinant()
    };
    let mut total = 0;
    let mut s0 = a;
    let mut d0 = det(a);
    for k in 1..=samples {
        let s1 = a + (b - a) * k as f64 / samples as f64;
        let d1 = det(s1);
        if d0.signum() != d1.signum() {
            let (mut lo, mut hi, mut dlo) = (s0, s1, d0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let dm = det(mid);
                if dm.signum() == dlo.signum() {
                    lo = mid;
                    dlo = dm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 {
                    break;
                }
            }
            let sc = 0.5 * (lo + hi);
            let (x1, x2) = frames(sc);
            let n = x1.ncols();
            let svd = joint(&x1, &x2).svd(false, true);
            let vt = svd.v_t.unwrap();
            let (imin, _) = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|p, q| p.1.total_cmp(q.1))
                .unwrap();
            let coef = vt.row(imin).transpose();
            let alpha = coef.rows(0, n).into_owned();
            let beta = coef.rows(n, n).into_owned();
            let h = 1e-6;
            let (p1, p2) = frames(sc + h);
            let (m1, m2) = frames(sc - h);
            let dx1 = (p1 - m1) / (2.0 * h);
            let dx2 = (p2 - m2) / (2.0 * h);
            let v = &x1 * &alpha;
            let q = v.dot(&(omega * (&dx1 * &alpha))) - v.dot(&(omega * (&dx2 * &beta)));
            total += if q > 0.0 { 1 } else { -1 };
        }
        s0 = s1;
        d0 = d1;
    }
    total
}
