//! Quadrature, finite-difference stencils, and zero-set localization.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::EvalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalcError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("adaptive quadrature exhausted its depth on [{lo}, {hi}]")]
    DepthExhausted { lo: f64, hi: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("finite-difference order must be 1, 2 or 3 (got {0})")]
    InvalidOrder(u8),
    #[error("divisor {value:e} at x = {x} is below the vanishing threshold {threshold:e}")]
    NearZero { x: f64, value: f64, threshold: f64 },
}

/// A bounded real interval. `lo < hi` and both ends are finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub open_lo: bool,
    #[serde(default)]
    pub open_hi: bool,
}

impl Interval {
    pub fn try_new(lo: f64, hi: f64, open_lo: bool, open_hi: bool) -> Result<Self, CalcError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(CalcError::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi, open_lo, open_hi })
    }

    /// Closed interval `[lo, hi]`. Panics unless `lo < hi` and both are finite.
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi, false, false).expect("closed interval needs finite lo < hi")
    }

    /// Open interval `(lo, hi)`. Panics unless `lo < hi` and both are finite.
    pub fn open(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi, true, true).expect("open interval needs finite lo < hi")
    }

    /// The default working domain `[-5, 5]`.
    pub fn working_domain() -> Self {
        Self::closed(-5.0, 5.0)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.open_lo { x > self.lo } else { x >= self.lo };
        let below = if self.open_hi { x < self.hi } else { x <= self.hi };
        above && below
    }

    /// `n` Chebyshev points of the first kind, ascending, strictly inside.
    pub fn chebyshev_points(&self, n: usize) -> Vec<f64> {
        let (mid, half) = (self.midpoint(), 0.5 * self.width());
        (0..n)
            .rev()
            .map(|k| {
                let theta = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * n) as f64;
                mid + half * theta.cos()
            })
            .collect()
    }

    /// `n >= 2` equally spaced points including both ends.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        let step = self.width() / (n.max(2) - 1) as f64;
        (0..n.max(2))
            .map(|i| if i + 1 == n.max(2) { self.hi } else { self.lo + i as f64 * step })
            .collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.open_lo { '(' } else { '[' };
        let r = if self.open_hi { ')' } else { ']' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { abs_tol: 1e-10, max_depth: 30 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), CalcError> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(CalcError::InvalidSpec(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if self.max_depth == 0 {
            return Err(CalcError::InvalidSpec("max_depth must be positive".into()));
        }
        Ok(())
    }
}

const INITIAL_PANELS: usize = 8;

/// Adaptive Simpson estimate of the integral of `f` from `a` to `b`.
///
/// The target error is `abs_tol * max(1, |coarse estimate|)`, split evenly
/// over eight initial panels and halved on each refinement. A panel is
/// accepted by the Richardson test `|S2 - S1| <= 15 eps`.
pub fn integrate<F, E>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64, CalcError>
where
    F: Fn(f64) -> Result<f64, E>,
    CalcError: From<E>,
{
    spec.validate()?;
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, spec).map(|v| -v);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(CalcError::InvalidInterval { lo: a, hi: b });
    }

    let width = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut coarse = 0.0;
    for i in 0..INITIAL_PANELS {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + width };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo)?, f(mid)?, f(hi)?);
        let whole = (hi - lo) * (flo + 4.0 * fmid + fhi) / 6.0;
        coarse += whole;
        panels.push(Panel { lo, hi, flo, fmid, fhi, whole });
    }

    let eps = spec.abs_tol * coarse.abs().max(1.0) / INITIAL_PANELS as f64;
    let mut total = 0.0;
    for panel in panels {
        total += refine(&f, panel, eps, spec.max_depth)?;
    }
    Ok(total)
}

struct Panel {
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
}

fn refine<F, E>(f: &F, p: Panel, eps: f64, depth: u32) -> Result<f64, CalcError>
where
    F: Fn(f64) -> Result<f64, E>,
    CalcError: From<E>,
{
    let mid = 0.5 * (p.lo + p.hi);
    let (lm, rm) = (0.5 * (p.lo + mid), 0.5 * (mid + p.hi));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (mid - p.lo) * (p.flo + 4.0 * flm + p.fmid) / 6.0;
    let right = (p.hi - mid) * (p.fmid + 4.0 * frm + p.fhi) / 6.0;
    let delta = left + right - p.whole;
    if delta.abs() <= 15.0 * eps || lm <= p.lo || rm >= p.hi {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(CalcError::DepthExhausted { lo: p.lo, hi: p.hi });
    }
    let l = Panel { lo: p.lo, hi: mid, flo: p.flo, fmid: flm, fhi: p.fmid, whole: left };
    let r = Panel { lo: mid, hi: p.hi, flo: p.fmid, fmid: frm, fhi: p.fhi, whole: right };
    Ok(refine(f, l, 0.5 * eps, depth - 1)? + refine(f, r, 0.5 * eps, depth - 1)?)
}

/// Second-order central difference approximation of the derivative of
/// order 1, 2 or 3 at `x`.
pub fn central_diff<F>(f: F, x: f64, order: u8, h: f64) -> Result<f64, CalcError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    match order {
        1 => Ok((f(x + h)? - f(x - h)?) / (2.0 * h)),
        2 => Ok((f(x + h)? - 2.0 * f(x)? + f(x - h)?) / (h * h)),
        3 => {
            let (p2, p1, m1, m2) = (f(x + 2.0 * h)?, f(x + h)?, f(x - h)?, f(x - 2.0 * h)?);
            Ok((p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h))
        }
        other => Err(CalcError::InvalidOrder(other)),
    }
}

/// Maximal sub-intervals of a domain on which `|g|` exceeds a relative threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetDecomposition {
    pub domain: Interval,
    pub nonvanishing: Vec<Interval>,
    pub zero_threshold: f64,
    pub grid_points: usize,
}

impl ZeroSetDecomposition {
    /// No nonvanishing interval: `g` is identically zero on the domain.
    pub fn is_empty(&self) -> bool {
        self.nonvanishing.is_empty()
    }

    /// Closed gaps between consecutive nonvanishing intervals.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.nonvanishing.windows(2).map(|w| (w[0].hi, w[1].lo)).collect()
    }
}

/// Relative vanishing threshold: `ZERO_REL * max |g|` over the grid.
pub const ZERO_REL: f64 = 1e-9;
/// Nonvanishing components narrower than this are dropped.
pub const MIN_COMPONENT_WIDTH: f64 = 1e-3;
const BISECTION_STEPS: usize = 50;

/// Localize the zero set of `g` on `domain` using a uniform grid of
/// `grid_points` samples followed by bisection at every boundary.
///
/// Samples where `g` fails to evaluate count as vanishing.
pub fn zero_set<F>(g: F, domain: Interval, grid_points: usize) -> ZeroSetDecomposition
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let n = grid_points.max(16);
    let xs = domain.linspace(n);
    let vals: Vec<Option<f64>> = xs.iter().map(|&x| g(x).ok()).collect();
    let max_abs = vals.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let thr = ZERO_REL * max_abs;
    let mut out = ZeroSetDecomposition { domain, nonvanishing: Vec::new(), zero_threshold: thr, grid_points: n };
    if max_abs == 0.0 {
        return out;
    }

    let above = |x: f64| g(x).map(|v| v.abs() > thr).unwrap_or(false);
    let sign_at = |x: f64| g(x).map(|v| v > 0.0).unwrap_or(false);
    let tol = 1e-9 * domain.width();
    let nz: Vec<bool> = vals.iter().map(|v| v.is_some_and(|v| v.abs() > thr)).collect();
    let positive: Vec<bool> = vals.iter().map(|v| v.is_some_and(|v| v > 0.0)).collect();
    let magnitude = |i: usize| vals[i].map_or(0.0, f64::abs);

    // Cuts between neighbouring nonvanishing samples k and k + 1: a sign
    // change, or a tangential zero found by minimizing |g| around a local
    // minimum of the sampled magnitudes.
    let mut cut_after: Vec<Option<f64>> = vec![None; n];
    for k in 0..n - 1 {
        if nz[k] && nz[k + 1] && positive[k] != positive[k + 1] {
            cut_after[k] = Some(bisect(|x| sign_at(x) == positive[k], xs[k], xs[k + 1], tol));
        }
    }
    for i in 1..n - 1 {
        let (m, l, r) = (magnitude(i), magnitude(i - 1), magnitude(i + 1));
        let same_sign = positive[i - 1] == positive[i] && positive[i] == positive[i + 1];
        if nz[i - 1] && nz[i] && nz[i + 1] && same_sign && m < l && m <= r {
            let abs_g = |x: f64| g(x).map_or(0.0, f64::abs);
            let xm = golden_min(abs_g, xs[i - 1], xs[i + 1], tol);
            if abs_g(xm) <= thr {
                let k = if xm < xs[i] { i - 1 } else { i };
                cut_after[k].get_or_insert(xm);
            }
        }
    }

    // Boundary between sample `inside` (nonvanishing) and the point `outside`
    // which is either a vanishing sample or a located zero.
    let boundary = |inside: f64, outside: f64| -> f64 {
        if above(outside) {
            outside
        } else {
            bisect(&above, inside, outside, tol)
        }
    };

    let mut i = 0;
    while i < n {
        if !nz[i] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && nz[j + 1] && cut_after[j].is_none() {
            j += 1;
        }
        let (lo, open_lo) = match i {
            0 => (domain.lo, domain.open_lo),
            _ => (boundary(xs[i], cut_after[i - 1].unwrap_or(xs[i - 1])), true),
        };
        let (hi, open_hi) = if j + 1 == n {
            (domain.hi, domain.open_hi)
        } else {
            (boundary(xs[j], cut_after[j].unwrap_or(xs[j + 1])), true)
        };
        if hi - lo >= MIN_COMPONENT_WIDTH {
            if let Ok(iv) = Interval::try_new(lo, hi, open_lo, open_hi) {
                out.nonvanishing.push(iv);
            }
        }
        i = j + 1;
    }
    out
}

/// Golden-section search for a minimizer of `f` on `[a, b]`.
fn golden_min<P: Fn(f64) -> f64>(f: P, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..2 * BISECTION_STEPS {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd { c } else { d }
}

/// Bisection on a predicate that holds at `yes` and fails at `no`.
/// Returns the midpoint of the final bracket.
fn bisect<P: Fn(f64) -> bool>(pred: P, yes: f64, no: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (yes, no);
    for _ in 0..BISECTION_STEPS {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if pred(m) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
