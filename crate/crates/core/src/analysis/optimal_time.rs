/// `t* = ln 2 / sqrt(ab)` with `a = ρ(D)` and `b = σ(K_SS)`.
pub fn optimal_time(a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "optimal_time needs a, b > 0");
    std::f64::consts::LN_2 / (a * b).sqrt()
}

fn alpha(x: f64, t: f64, a: f64) -> f64 {
    a / x + (-t * x).exp()
}

fn beta(x: f64, t: f64, b: f64) -> f64 {
    x / b + 1.0 - (-t * x).exp()
}

/// `|λ|` at which `a/|λ| + e^{tλ}` and `|λ|/b + 1 − e^{tλ}` cross.
///
/// In terms of `x = |λ|` the first is decreasing and the second increasing,
/// so the crossing is unique and found by bisection on `ln x`.
pub fn crossing_lambda(t: f64, a: f64, b: f64) -> f64 {
    let g = |x: f64| alpha(x, t, a) - beta(x, t, b);
    let mut lo = (a * b).sqrt();
    let mut hi = lo;
    while g(lo) <= 0.0 {
        lo *= 0.5;
    }
    while g(hi) >= 0.0 {
        hi *= 2.0;
    }
    let (mut l, mut h) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let mid = 0.5 * (l + h);
        if mid == l || mid == h {
            break;
        }
        if g(mid.exp()) > 0.0 {
            l = mid;
        } else {
            h = mid;
        }
    }
    (0.5 * (l + h)).exp()
}

/// `f(t) = max_{λ<0} min(α_t(λ), β_t(λ))`, the worst-case Type B error factor
/// at time `t`.
pub fn f_objective(t: f64, a: f64, b: f64) -> f64 {
    let x = crossing_lambda(t, a, b);
    alpha(x, t, a).min(beta(x, t, b))
}
