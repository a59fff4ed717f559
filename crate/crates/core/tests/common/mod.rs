#![allow(dead_code)]

use mvtlab::harness::SplitMix64;
use mvtlab::Expr;

/// Random smooth expression of bounded depth, finite on [-2, 2].
pub fn random_expr(rng: &mut SplitMix64, depth: u32) -> Expr {
    if depth == 0 || rng.below(4) == 0 {
        return match rng.below(3) {
            0 => Expr::Const(rng.uniform(-2.0, 2.0)),
            _ => Expr::Const(rng.uniform(0.3, 1.5)) * Expr::x() + Expr::Const(rng.uniform(-1.0, 1.0)),
        };
    }
    match rng.below(9) {
        0 => random_expr(rng, depth - 1) + random_expr(rng, depth - 1),
        1 => random_expr(rng, depth - 1) - random_expr(rng, depth - 1),
        2 => random_expr(rng, depth - 1) * random_expr(rng, depth - 1),
        3 => random_expr(rng, depth - 1).sin(),
        4 => random_expr(rng, depth - 1).cos(),
        5 => (Expr::Const(0.5) * random_expr(rng, depth - 1).sin()).exp(),
        6 => random_expr(rng, depth - 1).tanh(),
        7 => (Expr::Const(1.0) + random_expr(rng, depth - 1).powf(2.0)).sqrt(),
        _ => random_expr(rng, depth - 1).powf(3.0),
    }
}

/// Relative difference with a unit floor on the scale.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Ridders' extrapolation of central differences of `order`, starting at
/// step `h` and shrinking by 1.4 until the error estimate stops improving.
/// Returns the value and its error estimate.
pub fn ridders<F>(f: F, x: f64, order: u8, h: f64) -> (f64, f64)
where
    F: Fn(f64) -> Result<f64, mvtlab::expr::EvalError> + Copy,
{
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const NTAB: usize = 12;
    let d = |h: f64| mvtlab::calculus::central_diff(f, x, order, h).unwrap();
    let mut a = [[0.0f64; NTAB]; NTAB];
    let mut hh = h;
    a[0][0] = d(hh);
    let (mut best, mut err) = (a[0][0], f64::INFINITY);
    for i in 1..NTAB {
        hh /= CON;
        a[0][i] = d(hh);
        let mut fac = CON2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    (best, err)
}
