//! Brute-force crossing count of two polylines: every segment pair (and
//! every period shift on the cylinder) is tested by solving the 2×2 system
//! p + u·d = r + v·e with Cramer's rule.

pub fn brute_force_intersection(c1: &[[f64; 2]], c2: &[[f64; 2]], period: Option<f64>) -> i64 {
    let shifts: Vec<f64> = match period {
        None => vec![0.0],
        Some(p) => {
            let ext = |c: &[[f64; 2]]| {
                c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| (a.min(q[0]), b.max(q[0])))
            };
            let (a1, b1) = ext(c1);
            let (a2, b2) = ext(c2);
            let m = (((b1 - a2).abs() + (b2 - a1).abs()) / p).ceil() as i64 + 1;
            (-m..=m).map(|k| k as f64 * p).collect()
        }
    };
    let mut total = 0;
    for w1 in c1.windows(2) {
        for w2 in c2.windows(2) {
            for &dx in &shifts {
                let p = w1[0];
                let d = [w1[1][0] - p[0], w1[1][1] - p[1]];
                let r = [w2[0][0] + dx, w2[0][1]];
                let e = [w2[1][0] - w2[0][0], w2[1][1] - w2[0][1]];
                let den = d[0] * (-e[1]) - d[1] * (-e[0]);
                if den == 0.0 {
                    continue;
                }
                let rhs = [r[0] - p[0], r[1] - p[1]];
                let u = (rhs[0] * (-e[1]) - rhs[1] * (-e[0])) / den;
                let v = (d[0] * rhs[1] - d[1] * rhs[0]) / den;
                if u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0 {
                    total += if d[0] * e[1] - d[1] * e[0] > 0.0 { 1 } else { -1 };
                }
            }
        }
    }
    total
}
