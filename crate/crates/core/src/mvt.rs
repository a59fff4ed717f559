//! Residuals of the fixed-mean-value functional equations.
//!
//! The mean point of `a < b` is always `alpha * a + beta * b` with
//! `beta = 1 - alpha`. A residual counts as zero when
//! `|residual| <= tau * scale`, where `scale` is built from the magnitudes
//! of the terms that cancel (never below 1).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{integrate, CalcError, Interval, QuadratureSpec};
use crate::expr::{EvalError, Expr, SmoothFn};

/// Default vanishing tolerance for scale-relative residuals.
pub const TAU: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MvtError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error("alpha must lie strictly between 0 and 1 (got {0})")]
    InvalidAlpha(f64),
    #[error("{0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MeanSpec {
    alpha: f64,
}

impl MeanSpec {
    pub fn new(alpha: f64) -> Result<Self, MvtError> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(MeanSpec { alpha })
        } else {
            Err(MvtError::InvalidAlpha(alpha))
        }
    }

    pub fn symmetric() -> Self {
        MeanSpec { alpha: 0.5 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        1.0 - self.alpha
    }

    pub fn is_symmetric(&self) -> bool {
        self.alpha == 0.5
    }

    pub fn mean(&self, a: f64, b: f64) -> f64 {
        self.alpha * a + self.beta() * b
    }
}

impl TryFrom<f64> for MeanSpec {
    type Error = MvtError;

    fn try_from(alpha: f64) -> Result<Self, Self::Error> {
        MeanSpec::new(alpha)
    }
}

impl From<MeanSpec> for f64 {
    fn from(m: MeanSpec) -> f64 {
        m.alpha
    }
}

/// A raw residual and the magnitude it should be compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    /// `scale = max(1, |t| for t in terms)`.
    pub fn new(value: f64, terms: &[f64]) -> Self {
        let scale = terms.iter().fold(1.0f64, |m, t| m.max(t.abs()));
        Residual { value, scale }
    }

    pub fn relative(&self) -> f64 {
        self.value.abs() / self.scale
    }

    pub fn is_zero(&self, tau: f64) -> bool {
        self.value.abs() <= tau * self.scale
    }
}

/// `F(b) - F(a) - f(c) (b - a)` with `c` the mean point.
pub fn lagrange_residual(big_f: &SmoothFn, m: MeanSpec, a: f64, b: f64) -> Result<Residual, MvtError> {
    let c = m.mean(a, b);
    let diff = big_f.value(b)? - big_f.value(a)?;
    let slope_term = big_f.deriv(c)? * (b - a);
    Ok(Residual::new(diff - slope_term, &[diff, slope_term]))
}

/// `alpha f(x + alpha h) + beta f(x - beta h) - f(x)`.
///
/// This is the `h`-derivative of the Lagrange equation written with
/// `a = x - beta h`, `b = x + alpha h`, so that `x` is the mean point.
pub fn lagrange_derivative_identity(big_f: &SmoothFn, m: MeanSpec, x: f64, h: f64) -> Result<Residual, MvtError> {
    let (alpha, beta) = (m.alpha(), m.beta());
    let right = alpha * big_f.deriv(x + alpha * h)?;
    let left = beta * big_f.deriv(x - beta * h)?;
    let centre = big_f.deriv(x)?;
    Ok(Residual::new(right + left - centre, &[right, left, centre]))
}

/// `[F(b) - F(a)] g(c) - [G(b) - G(a)] f(c)` with `c` the mean point.
pub fn cauchy_residual(
    big_f: &SmoothFn,
    big_g: &SmoothFn,
    m: MeanSpec,
    a: f64,
    b: f64,
) -> Result<Residual, MvtError> {
    let c = m.mean(a, b);
    let lhs = (big_f.value(b)? - big_f.value(a)?) * big_g.deriv(c)?;
    let rhs = (big_g.value(b)? - big_g.value(a)?) * big_f.deriv(c)?;
    Ok(Residual::new(lhs - rhs, &[lhs, rhs]))
}

/// Symmetric Cauchy residual `[F(x+h) - F(x-h)] g(x) - [G(x+h) - G(x-h)] f(x)`
/// where only the derivatives `f`, `g` are known and the differences of the
/// antiderivatives are computed by quadrature.
pub fn cauchy_residual_by_quadrature<Ff, Gf>(
    f: Ff,
    g: Gf,
    x: f64,
    h: f64,
    spec: &QuadratureSpec,
) -> Result<Residual, MvtError>
where
    Ff: Fn(f64) -> Result<f64, MvtError>,
    Gf: Fn(f64) -> Result<f64, MvtError>,
{
    let df = integrate(|t| f(t).map_err(to_calc), x - h, x + h, spec)?;
    let dg = integrate(|t| g(t).map_err(to_calc), x - h, x + h, spec)?;
    let lhs = df * g(x)?;
    let rhs = dg * f(x)?;
    Ok(Residual::new(lhs - rhs, &[lhs, rhs]))
}

fn to_calc(e: MvtError) -> CalcError {
    match e {
        MvtError::Eval(e) => CalcError::Eval(e),
        MvtError::Calc(e) => e,
        other => CalcError::InvalidSpec(other.to_string()),
    }
}

/// `f'(x) g(x) - f(x) g'(x)` for `f = F'`, `g = G'`.
pub fn wronskian(big_f: &SmoothFn, big_g: &SmoothFn, x: f64) -> Result<f64, MvtError> {
    Ok(big_f.d2().eval(x)? * big_g.d1().eval(x)? - big_f.d1().eval(x)? * big_g.d2().eval(x)?)
}

/// `G(p + h) - G(p - h)`; vanishes for all `h` when the graph of `G` is
/// mirror-symmetric about the vertical line through `p`.
pub fn symmetry_residual(big_g: &SmoothFn, p: f64, h: f64) -> Result<Residual, MvtError> {
    let (r, l) = (big_g.value(p + h)?, big_g.value(p - h)?);
    Ok(Residual::new(r - l, &[r, l]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub x0: f64,
}

const PRIMITIVE_NODES: usize = 32;
const DIVISOR_SAMPLES: usize = 257;

/// `x -> integral from x0 to x of dt / g(t)^2` on an interval where `g`
/// does not vanish.
///
/// Values are cached at Chebyshev nodes of the interval; an evaluation
/// integrates only from the nearest cached node.
#[derive(Debug, Clone)]
pub struct ReciprocalSquareIntegral {
    g: Expr,
    interval: Interval,
    threshold: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    spec: QuadratureSpec,
}

impl ReciprocalSquareIntegral {
    pub fn new(g: &Expr, x0: f64, interval: Interval, spec: QuadratureSpec) -> Result<Self, MvtError> {
        if !interval.contains(x0) {
            return Err(MvtError::InvalidArgument(format!("x0 = {x0} lies outside {interval}")));
        }
        let mut probes = interval.chebyshev_points(DIVISOR_SAMPLES);
        probes.push(x0);
        let mut max_abs = 0.0f64;
        for &t in &probes {
            max_abs = max_abs.max(g.eval(t)?.abs());
        }
        let threshold = crate::calculus::ZERO_REL * max_abs;
        probes.sort_by(f64::total_cmp);
        let mut previous: Option<f64> = None;
        for &t in &probes {
            let v = g.eval(t)?;
            let crossed = previous.is_some_and(|p| (p > 0.0) != (v > 0.0));
            if v.abs() <= threshold || crossed {
                return Err(CalcError::NearZero { x: t, value: v, threshold }.into());
            }
            previous = Some(v);
        }

        let mut prim = ReciprocalSquareIntegral {
            g: g.clone(),
            interval,
            threshold,
            nodes: Vec::new(),
            values: Vec::new(),
            spec,
        };
        let mut nodes = interval.chebyshev_points(PRIMITIVE_NODES);
        nodes.push(x0);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let start = nodes.iter().position(|&t| t == x0).unwrap_or(0);
        let mut values = vec![0.0; nodes.len()];
        for i in start + 1..nodes.len() {
            values[i] = values[i - 1] + prim.piece(nodes[i - 1], nodes[i])?;
        }
        for i in (0..start).rev() {
            values[i] = values[i + 1] - prim.piece(nodes[i], nodes[i + 1])?;
        }
        prim.nodes = nodes;
        prim.values = values;
        Ok(prim)
    }

    fn integrand(&self, t: f64) -> Result<f64, CalcError> {
        let v = self.g.eval(t)?;
        if v.abs() <= self.threshold {
            return Err(CalcError::NearZero { x: t, value: v, threshold: self.threshold });
        }
        Ok(1.0 / (v * v))
    }

    fn piece(&self, from: f64, to: f64) -> Result<f64, CalcError> {
        integrate(|t| self.integrand(t), from, to, &self.spec)
    }

    pub fn eval(&self, x: f64) -> Result<f64, MvtError> {
        if !self.interval.contains(x) {
            return Err(MvtError::InvalidArgument(format!("x = {x} lies outside {}", self.interval)));
        }
        let i = match self.nodes.binary_search_by(|t| t.total_cmp(&x)) {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i,
        };
        let nearest = if i == 0 {
            0
        } else if i == self.nodes.len() || x - self.nodes[i - 1] < self.nodes[i] - x {
            i - 1
        } else {
            i
        };
        Ok(self.values[nearest] + self.piece(self.nodes[nearest], x)?)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }
}

/// `f(x) = (A + K * integral from x0 to x of dt / g(t)^2) * g(x)`, the
/// general first-order companion of `g` in the symmetric equation on an
/// interval where `g` does not vanish.
#[derive(Debug, Clone)]
pub struct ConstructedF {
    pub params: ConstructionParams,
    g: Expr,
    interval: Interval,
    primitive: Option<ReciprocalSquareIntegral>,
}

impl ConstructedF {
    pub fn eval(&self, x: f64) -> Result<f64, MvtError> {
        if !self.interval.contains(x) {
            return Err(MvtError::InvalidArgument(format!("x = {x} lies outside {}", self.interval)));
        }
        let gx = self.g.eval(x)?;
        match &self.primitive {
            None => Ok(self.params.a * gx),
            Some(p) => Ok((self.params.a + self.params.k * p.eval(x)?) * gx),
        }
    }

    pub fn primitive(&self) -> Option<&ReciprocalSquareIntegral> {
        self.primitive.as_ref()
    }
}

/// Build `f` from `g` and `(A, K, x0)`.
///
/// With `K = 0` the result is `A g` and `g` may vanish; otherwise `g` must
/// stay clear of zero on `interval`.
pub fn construct_f(
    g: &SmoothFn,
    params: ConstructionParams,
    interval: Interval,
    spec: QuadratureSpec,
) -> Result<ConstructedF, MvtError> {
    if !interval.contains(params.x0) {
        return Err(MvtError::InvalidArgument(format!("x0 = {} lies outside {interval}", params.x0)));
    }
    let primitive = if params.k == 0.0 {
        None
    } else {
        Some(ReciprocalSquareIntegral::new(g.d0(), params.x0, interval, spec)?)
    };
    Ok(ConstructedF { params, g: g.d0().clone(), interval, primitive })
}

/// The integral identity equivalent to the symmetric equation when `K != 0`:
///
/// ```text
/// int_{x-h}^{x+h} g(t) J(t) dt  -  (int_{x-h}^{x+h} g(t) dt) J(x),   J(t) = int_{x0}^t du / g(u)^2
/// ```
#[derive(Debug, Clone)]
pub struct IntegralCondition {
    g: Expr,
    primitive: ReciprocalSquareIntegral,
    spec: QuadratureSpec,
}

impl IntegralCondition {
    pub fn new(g: &SmoothFn, x0: f64, interval: Interval, spec: QuadratureSpec) -> Result<Self, MvtError> {
        let primitive = ReciprocalSquareIntegral::new(g.d0(), x0, interval, spec)?;
        Ok(IntegralCondition { g: g.d0().clone(), primitive, spec })
    }

    pub fn from_primitive(g: &SmoothFn, primitive: ReciprocalSquareIntegral, spec: QuadratureSpec) -> Self {
        IntegralCondition { g: g.d0().clone(), primitive, spec }
    }

    pub fn residual(&self, x: f64, h: f64) -> Result<Residual, MvtError> {
        if h == 0.0 {
            return Ok(Residual::new(0.0, &[]));
        }
        let iv = self.primitive.interval();
        for t in [x, x - h, x + h] {
            if !iv.contains(t) {
                return Err(MvtError::InvalidArgument(format!("{t} lies outside {iv}")));
            }
        }
        let p = &self.primitive;
        let lhs = integrate(
            |t| -> Result<f64, CalcError> {
                let j = p.eval(t).map_err(to_calc)?;
                Ok(self.g.eval(t)? * j)
            },
            x - h,
            x + h,
            &self.spec,
        )?;
        let mass = integrate(|t| self.g.eval(t), x - h, x + h, &self.spec)?;
        let rhs = mass * p.eval(x)?;
        Ok(Residual::new(lhs - rhs, &[lhs, rhs]))
    }
}

/// One-shot form of [`IntegralCondition::residual`].
pub fn integral_condition_residual(
    g: &SmoothFn,
    x0: f64,
    x: f64,
    h: f64,
    interval: Interval,
    spec: QuadratureSpec,
) -> Result<Residual, MvtError> {
    if h == 0.0 {
        return Ok(Residual::new(0.0, &[]));
    }
    IntegralCondition::new(g, x0, interval, spec)?.residual(x, h)
}

/// Which functional equation a sweep evaluates.
#[derive(Debug, Clone, Copy)]
pub enum Equation<'a> {
    /// `F(b) - F(a) = f(c) (b - a)`
    Lagrange(&'a SmoothFn),
    /// `[F(b) - F(a)] g(c) = [G(b) - G(a)] f(c)`
    Cauchy(&'a SmoothFn, &'a SmoothFn),
}

impl Equation<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Equation::Lagrange(_) => "lagrange",
            Equation::Cauchy(..) => "cauchy",
        }
    }

    pub fn residual(&self, m: MeanSpec, a: f64, b: f64) -> Result<Residual, MvtError> {
        match self {
            Equation::Lagrange(f) => lagrange_residual(f, m, a, b),
            Equation::Cauchy(f, g) => cauchy_residual(f, g, m, a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub a: f64,
    pub b: f64,
    pub residual: f64,
    pub scale: f64,
}

/// Grid evaluation of a residual over pairs `a < b`.
///
/// `scale` is the largest per-sample scale, so `max_abs <= tau * scale` is
/// the coarse test; `max_rel` (largest `|residual| / sample scale`) is the
/// sharper one used by [`ResidualReport::passes`]. Samples whose evaluation
/// failed are counted in `domain_errors` and excluded from the maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub samples: Vec<ResidualSample>,
    pub max_abs: f64,
    pub argmax: (f64, f64),
    pub scale: f64,
    pub max_rel: f64,
    pub argmax_rel: (f64, f64),
    pub evaluated: usize,
    pub domain_errors: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_error: Option<String>,
}

impl ResidualReport {
    /// Fold samples in order; ties keep the earliest sample.
    pub fn from_results(results: Vec<((f64, f64), Result<Residual, MvtError>)>) -> Self {
        let mut rep = ResidualReport {
            samples: Vec::with_capacity(results.len()),
            max_abs: 0.0,
            argmax: (f64::NAN, f64::NAN),
            scale: 1.0,
            max_rel: 0.0,
            argmax_rel: (f64::NAN, f64::NAN),
            evaluated: 0,
            domain_errors: 0,
            first_error: None,
        };
        for ((a, b), r) in results {
            match r {
                Ok(r) => {
                    if rep.evaluated == 0 || r.value.abs() > rep.max_abs {
                        rep.max_abs = r.value.abs();
                        rep.argmax = (a, b);
                    }
                    if rep.evaluated == 0 || r.relative() > rep.max_rel {
                        rep.max_rel = r.relative();
                        rep.argmax_rel = (a, b);
                    }
                    rep.scale = rep.scale.max(r.scale);
                    rep.evaluated += 1;
                    rep.samples.push(ResidualSample { a, b, residual: r.value, scale: r.scale });
                }
                Err(e) => {
                    rep.domain_errors += 1;
                    rep.first_error.get_or_insert_with(|| format!("at ({a}, {b}): {e}"));
                }
            }
        }
        rep
    }

    /// Every sample evaluated and every residual within `tau` of its own scale.
    pub fn passes(&self, tau: f64) -> bool {
        self.evaluated > 0 && self.domain_errors == 0 && self.max_rel <= tau
    }

    /// `max_abs / scale`.
    pub fn normalized_max(&self) -> f64 {
        self.max_abs / self.scale
    }
}

/// Evaluate `equation` on every grid pair `a_i < a_j` of an `n`-point
/// uniform grid over `region`. Rows are evaluated in parallel and folded
/// sequentially, so the report does not depend on thread count.
pub fn sweep(equation: Equation<'_>, m: MeanSpec, region: Interval, n: usize) -> Result<ResidualReport, MvtError> {
    if n < 2 {
        return Err(MvtError::InvalidArgument(format!("sweep needs n >= 2 (got {n})")));
    }
    let grid = region.linspace(n);
    let rows: Vec<Vec<_>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = grid[i];
            grid[i + 1..].iter().map(|&b| ((a, b), equation.residual(m, a, b))).collect()
        })
        .collect();
    Ok(ResidualReport::from_results(rows.into_iter().flatten().collect()))
}
