//! Closed forms and Prüfer-angle shooting for one-dimensional first-order
//! problems with 2×2 blocks, used to check the neck laboratory.

type M2 = [[f64; 2]; 2];

/// Prüfer angle of ψ at the far end, started at the angle of `left`.
/// ψ' = J(W − λ)ψ turns θ at rate m₂₁cos²θ + (m₂₂ − m₁₁)sinθcosθ − m₁₂sin²θ,
/// and θ(end) decreases strictly in λ.
fn end_angle(pieces: &[(f64, M2)], left: [f64; 2], lambda: f64) -> f64 {
    let mut th = left[1].atan2(left[0]);
    for (len, w) in pieces {
        let m = [[-(w[1][0]), -(w[1][1] - lambda)], [w[0][0] - lambda, w[0][1]]];
        let rate = |t: f64| {
            let (s, c) = t.sin_cos();
            m[1][0] * c * c + (m[1][1] - m[0][0]) * s * c - m[0][1] * s * s
        };
        let n = (len / 0.002).ceil().max(1.0) as usize;
        let h = len / n as f64;
        for _ in 0..n {
            let k1 = rate(th);
            let k2 = rate(th + 0.5 * h * k1);
            let k3 = rate(th + 0.5 * h * k2);
            let k4 = rate(th + h * k3);
            th += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
    }
    th
}

/// Eigenvalues in (−window, window) of J d/dτ + W(τ) on consecutive
/// pieces with constant symmetric W, ψ(start) ∈ span(left) and
/// ψ(end) ∈ span(right). The end angle meets the right line at
/// φ + nπ; each crossing is bisected on the monotone angle.
pub fn transfer_eigenvalues(pieces: &[(f64, M2)], left: [f64; 2], right: [f64; 2], window: f64) -> Vec<f64> {
    let phi = right[1].atan2(right[0]);
    let f = |l: f64| (end_angle(pieces, left, l) - phi) / core::f64::consts::PI;
    let (hi_n, lo_n) = (f(-window), f(window));
    let mut out = Vec::new();
    let mut n = lo_n.ceil();
    while n < hi_n {
        let (mut lo, mut hi) = (-window, window);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > n {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
        n += 1.0;
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Eigenvalues of J(d/dt + diag(μ, −μ)) on [0, len] with ψ(0) ∈ span(e₂)
/// and ψ(len) ∈ span(e₁): λ = ±√(μ² + k²) with tan(k·len) = −k/μ.
pub fn aps_closed_form(mu: f64, len: f64, count: usize) -> Vec<f64> {
    let g = |k: f64| mu * (k * len).sin() + k * (k * len).cos();
    let mut ks = Vec::new();
    let step = 1e-3 / len;
    let mut a = step;
    while ks.len() < count {
        let b = a + step;
        if g(a) * g(b) < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(lo) * g(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            ks.push(0.5 * (lo + hi));
        }
        a = b;
    }
    let mut out: Vec<f64> = ks.iter().flat_map(|k| {
        let l = (mu * mu + k * k).sqrt();
        [l, -l]
    }).collect();
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Lowest eigenvalue of −f″ + c·1_[0,b] f on [0, total] with Neumann ends,
/// the root of κ tanh(κb) = k tan(k(total − b)), k = √λ, κ = √(c − λ).
pub fn schrodinger_step_lowest(c: f64, b: f64, total: f64) -> f64 {
    let rest = total - b;
    let top = c.min((core::f64::consts::PI / (2.0 * rest)).powi(2));
    let g = |l: f64| {
        let k = l.sqrt();
        let kap = (c - l).max(0.0).sqrt();
        k * (k * rest).tan() - kap * (kap * b).tanh()
    };
    let (mut lo, mut hi) = (0.0, top * (1.0 - 1e-14));
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn smoothstep_cut(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        1.0 - 3.0 * s * s + 2.0 * s * s * s
    }
}

/// The kernel block of the non-transversal neck: J ψ' + w ψ = λ ψ with
/// w(τ) = β(τ − L)·amp·e^{−δτ} on [0, 2L + 1], w = 0 on two unit stubs, and
/// end lines e₁ and (cos θ, sin θ), θ = amp/δ. ψ rotates by ∫(w − λ), so
/// the smallest |λ| is ε/ℓ with ε the rotation the cutoff removes.
pub fn rotating_neck_lambda(amp: f64, delta: f64, half_length: f64) -> f64 {
    let l = half_length;
    let n = 4000;
    let h = 1.0 / n as f64;
    // Simpson on the cutoff interval [L, L + 1]
    let mut ramp = 0.0;
    for i in 0..=n {
        let u = i as f64 * h;
        let wgt = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        ramp += wgt * (1.0 - smoothstep_cut(u)) * (-delta * (l + u)).exp();
    }
    ramp *= h / 3.0;
    let flat = ((-delta * (l + 1.0)).exp() - (-delta * (2.0 * l + 1.0)).exp()) / delta;
    let beyond = (-delta * (2.0 * l + 1.0)).exp() / delta;
    let eps = amp * (ramp + flat + beyond);
    let total = 2.0 * l + 3.0;
    (eps / total).powi(2)
}

/// Limiting value of the bounded solution of ψ' = −Aψ + IPψ with
/// I = J ⊕ J, A = 0 ⊕ diag(μ, −μ), P = a e^{−δt}(e₁e₃ᵀ + e₃e₁ᵀ), and its
/// samples. With c = (c₁, c₂, c₃) the free data,
/// ψ = (c₁, c₂ + a c₃(1 − e^{−(μ+δ)t})/(μ+δ), c₃e^{−μt}, −a c₁e^{−δt}/(μ+δ)).
pub fn coupled_end_solution(mu: f64, delta: f64, a: f64, c: [f64; 3], t: f64) -> [f64; 4] {
    let r = mu + delta;
    [
        c[0],
        c[1] + a * c[2] * (1.0 - (-r * t).exp()) / r,
        c[2] * (-mu * t).exp(),
        -a * c[0] * (-delta * t).exp() / r,
    ]
}

pub fn coupled_end_limit(mu: f64, delta: f64, a: f64, c: [f64; 3]) -> [f64; 4] {
    [c[0], c[1] + a * c[2] / (mu + delta), 0.0, 0.0]
}
