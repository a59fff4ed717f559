//! Sorting solution pairs of the fixed-mean Cauchy equation into families.
//!
//! For the symmetric mean every smooth solution pair `(F, G)` is either
//! linearly dependent together with the constant function (case `a`), or
//! both functions lie in one of the spans
//!
//! * `b`: `{1, x, x^2}`
//! * `c`: `{1, e^(mu x), e^(-mu x)}`
//! * `d`: `{1, sin(mu x), cos(mu x)}`
//!
//! For any other mean only case `a` survives. The classifier tests these
//! possibilities numerically on a bounded domain: it checks that the pair
//! solves the equation, splits the domain where `g = G'` vanishes, tags each
//! piece, and assembles a global verdict.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{zero_set, Interval};
use crate::expr::{EvalError, Expr, SmoothFn};
use crate::mvt::{sweep, Equation, MeanSpec, MvtError, TAU};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("g vanishes at every probe point on {0}")]
    NoUsableProbe(Interval),
    #[error("need at least {need} samples (got {got})")]
    TooFewSamples { need: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Quadratic,
    Exponential,
    Trigonometric,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Quadratic, Family::Exponential, Family::Trigonometric];

    /// Basis values at `x`: `{1, x, x^2}`, `{1, e^(mu x), e^(-mu x)}` or `{1, sin(mu x), cos(mu x)}`.
    pub fn basis(self, mu: f64, x: f64) -> [f64; 3] {
        match self {
            Family::Quadratic => [1.0, x, x * x],
            Family::Exponential => [1.0, (mu * x).exp(), (-mu * x).exp()],
            Family::Trigonometric => [1.0, (mu * x).sin(), (mu * x).cos()],
        }
    }

    /// `c0 + c1 b1(x) + c2 b2(x)` as an expression.
    pub fn expr(self, mu: f64, c: [f64; 3]) -> Expr {
        let x = Expr::x();
        let (b1, b2) = match self {
            Family::Quadratic => (x.clone(), x.powf(2.0)),
            Family::Exponential => {
                ((Expr::Const(mu) * x.clone()).exp(), (Expr::Const(-mu) * x).exp())
            }
            Family::Trigonometric => {
                ((Expr::Const(mu) * x.clone()).sin(), (Expr::Const(mu) * x).cos())
            }
        };
        Expr::Const(c[0]) + Expr::Const(c[1]) * b1 + Expr::Const(c[2]) * b2
    }

    pub fn verdict(self) -> Verdict {
        match self {
            Family::Quadratic => Verdict::B,
            Family::Exponential => Verdict::C,
            Family::Trigonometric => Verdict::D,
        }
    }

    pub fn tag(self) -> Tag {
        match self {
            Family::Quadratic => Tag::Q,
            Family::Exponential => Tag::E,
            Family::Trigonometric => Tag::T,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    A,
    B,
    C,
    D,
    Unclassified,
}

impl Verdict {
    pub const ALL: [Verdict; 5] = [Verdict::A, Verdict::B, Verdict::C, Verdict::D, Verdict::Unclassified];

    pub fn family(self) -> Option<Family> {
        match self {
            Verdict::B => Some(Family::Quadratic),
            Verdict::C => Some(Family::Exponential),
            Verdict::D => Some(Family::Trigonometric),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::A => "a",
            Verdict::B => "b",
            Verdict::C => "c",
            Verdict::D => "d",
            Verdict::Unclassified => "unclassified",
        })
    }
}

/// Per-interval tag: linear relation, or quadratic / trigonometric / exponential type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Lr,
    Q,
    T,
    E,
    Unclassified,
}

impl Tag {
    pub fn family(self) -> Option<Family> {
        match self {
            Tag::Q => Some(Family::Quadratic),
            Tag::E => Some(Family::Exponential),
            Tag::T => Some(Family::Trigonometric),
            _ => None,
        }
    }
}

/// Outcome of testing `{1, F, G}` for linear dependence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceVerdict {
    pub dependent: bool,
    /// `(c0, c1, c2)` with `c0 + c1 F + c2 G ~ 0`, unit length.
    pub coefficients: [f64; 3],
    /// Smallest over largest singular value of the column-normalized sample matrix.
    pub condition_ratio: f64,
    pub residual_rms: f64,
    pub sample_rms: f64,
}

/// Dependence is declared below this singular-value ratio.
pub const DEPENDENCE_RATIO: f64 = 1e-8;

/// Test `{1, F, G}` for linear dependence on `interval` from `samples`
/// Chebyshev points. Columns are normalized before the SVD so the verdict
/// does not depend on the scale of `F` or `G`.
pub fn dependence_test(
    big_f: &SmoothFn,
    big_g: &SmoothFn,
    interval: Interval,
    samples: usize,
) -> Result<DependenceVerdict, ClassifyError> {
    if samples < 8 {
        return Err(ClassifyError::TooFewSamples { need: 8, got: samples });
    }
    let xs = interval.chebyshev_points(samples);
    let mut m = DMatrix::<f64>::zeros(samples, 3);
    for (i, &x) in xs.iter().enumerate() {
        m[(i, 0)] = 1.0;
        m[(i, 1)] = big_f.value(x)?;
        m[(i, 2)] = big_g.value(x)?;
    }
    let sample_rms = ((m.column(1).norm_squared() + m.column(2).norm_squared()) / (2 * samples) as f64).sqrt();
    let norms: Vec<f64> = (0..3).map(|j| m.column(j).norm()).collect();

    let raw = if let Some(j) = norms.iter().position(|&n| n == 0.0) {
        // a zero column is dependent on its own
        let mut c = [0.0; 3];
        c[j] = 1.0;
        (c, 0.0)
    } else {
        let mut scaled = m.clone();
        for (j, &n) in norms.iter().enumerate() {
            scaled.column_mut(j).scale_mut(1.0 / n);
        }
        let svd = scaled.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let sv = &svd.singular_values;
        let (imin, imax) = (sv.imin(), sv.imax());
        let ratio = if sv[imax] > 0.0 { sv[imin] / sv[imax] } else { 0.0 };
        let row = v_t.row(imin);
        ([row[0] / norms[0], row[1] / norms[1], row[2] / norms[2]], ratio)
    };
    let coefficients = normalize_triple(raw.0);
    let residual_rms = {
        let c = DVector::from_row_slice(&coefficients);
        ((&m * c).norm_squared() / samples as f64).sqrt()
    };
    Ok(DependenceVerdict {
        dependent: raw.1 < DEPENDENCE_RATIO,
        coefficients,
        condition_ratio: raw.1,
        residual_rms,
        sample_rms,
    })
}

/// Unit length, largest-magnitude component positive.
pub(crate) fn normalize_triple(c: [f64; 3]) -> [f64; 3] {
    let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    if norm == 0.0 {
        return c;
    }
    let lead = c.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    let s = lead.signum() / norm;
    [c[0] * s, c[1] * s, c[2] * s]
}

/// Robust estimate of `4 g''/g`, which is constant exactly on the families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    /// Median over usable probes.
    pub value: f64,
    /// Largest deviation of a probe from the median.
    pub spread: f64,
    /// Largest probe magnitude.
    pub max_probe: f64,
    pub probes_used: usize,
}

impl LambdaEstimate {
    /// `mu = sqrt(|lambda|) / 2`; the factor 2 comes from `lambda` being
    /// defined through `g(2x - x0)`.
    pub fn mu(&self) -> f64 {
        self.value.abs().sqrt() / 2.0
    }

    pub fn family(&self) -> Family {
        if self.value.abs() <= LAMBDA_ZERO_BAND * (1.0 + self.max_probe) {
            Family::Quadratic
        } else if self.value > 0.0 {
            Family::Exponential
        } else {
            Family::Trigonometric
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.spread <= LAMBDA_ZERO_BAND * (1.0 + self.value.abs())
    }
}

pub const LAMBDA_ZERO_BAND: f64 = 1e-6;
/// Probes where `|g|` falls below this fraction of the largest probe are skipped.
const PROBE_FLOOR: f64 = 1e-4;

/// `4 g''(x) / g(x)` over `probes` Chebyshev points, where `g` is the d0
/// layer of the argument.
pub fn lambda_estimate(g: &SmoothFn, interval: Interval, probes: usize) -> Result<LambdaEstimate, ClassifyError> {
    lambda_from_layers(g.d0(), g.d2(), interval, probes)
}

/// As [`lambda_estimate`] with `g` and `g''` given directly.
pub fn lambda_from_layers(g: &Expr, g2: &Expr, interval: Interval, probes: usize) -> Result<LambdaEstimate, ClassifyError> {
    let xs = interval.chebyshev_points(probes.max(1));
    let mut pairs = Vec::with_capacity(xs.len());
    for &x in &xs {
        pairs.push((g.eval(x)?, g2.eval(x)?));
    }
    let gmax = pairs.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    let mut vals: Vec<f64> = pairs
        .iter()
        .filter(|p| p.0.abs() > PROBE_FLOOR * gmax && p.0 != 0.0)
        .map(|p| 4.0 * p.1 / p.0)
        .collect();
    if vals.is_empty() {
        return Err(ClassifyError::NoUsableProbe(interval));
    }
    vals.sort_by(f64::total_cmp);
    let n = vals.len();
    let value = if n % 2 == 1 { vals[n / 2] } else { 0.5 * (vals[n / 2 - 1] + vals[n / 2]) };
    let spread = vals.iter().fold(0.0f64, |m, v| m.max((v - value).abs()));
    let max_probe = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(LambdaEstimate { value, spread, max_probe, probes_used: n })
}

/// Least-squares fit of both `F` and `G` on one family's basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFit {
    pub family: Family,
    pub mu: f64,
    #[serde(rename = "coeffs_F")]
    pub coeffs_f: [f64; 3],
    #[serde(rename = "coeffs_G")]
    pub coeffs_g: [f64; 3],
    /// Joint RMS residual of the two fits.
    pub rms_residual: f64,
    /// Joint RMS of the sampled `F` and `G` values.
    pub scale: f64,
}

impl FamilyFit {
    pub fn relative_rms(&self) -> f64 {
        if self.scale > 0.0 {
            self.rms_residual / self.scale
        } else {
            self.rms_residual
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.relative_rms() <= tol
    }
}

pub const FIT_SAMPLES: usize = 64;

/// Fit `F` and `G` on the family selected by the sign of `lambda`, with
/// `mu = sqrt(|lambda|)/2`, over `FIT_SAMPLES` Chebyshev points.
pub fn family_fit(
    big_f: &SmoothFn,
    big_g: &SmoothFn,
    interval: Interval,
    lambda: &LambdaEstimate,
) -> Result<FamilyFit, ClassifyError> {
    let family = lambda.family();
    let mu = if family == Family::Quadratic { 0.0 } else { lambda.mu() };
    fit_on_basis(big_f, big_g, interval, family, mu)
}

/// Fit on an explicitly chosen family and frequency.
pub fn fit_on_basis(
    big_f: &SmoothFn,
    big_g: &SmoothFn,
    interval: Interval,
    family: Family,
    mu: f64,
) -> Result<FamilyFit, ClassifyError> {
    let xs = interval.chebyshev_points(FIT_SAMPLES);
    let n = xs.len();
    let mut design = DMatrix::<f64>::zeros(n, 3);
    let mut yf = DVector::<f64>::zeros(n);
    let mut yg = DVector::<f64>::zeros(n);
    for (i, &x) in xs.iter().enumerate() {
        let b = family.basis(mu, x);
        for j in 0..3 {
            design[(i, j)] = b[j];
        }
        yf[i] = big_f.value(x)?;
        yg[i] = big_g.value(x)?;
    }
    let cf = least_squares(&design, &yf);
    let cg = least_squares(&design, &yg);
    let rf = &design * &cf - &yf;
    let rg = &design * &cg - &yg;
    let rms_residual = ((rf.norm_squared() + rg.norm_squared()) / (2 * n) as f64).sqrt();
    let scale = ((yf.norm_squared() + yg.norm_squared()) / (2 * n) as f64).sqrt();
    Ok(FamilyFit {
        family,
        mu,
        coeffs_f: [cf[0], cf[1], cf[2]],
        coeffs_g: [cg[0], cg[1], cg[2]],
        rms_residual,
        scale,
    })
}

/// Minimum-norm least squares through an SVD of the column-normalized design.
fn least_squares(design: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let norms: Vec<f64> = (0..design.ncols()).map(|j| design.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    let mut scaled = design.clone();
    for (j, &n) in norms.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / n);
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let mut c = svd
        .solve(rhs, smax * 1e-14)
        .unwrap_or_else(|_| DVector::zeros(design.ncols()));
    for (j, &n) in norms.iter().enumerate() {
        c[j] /= n;
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalTag {
    pub interval: Interval,
    pub tag: Tag,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit_relative_rms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n: usize,
    pub max_abs: f64,
    pub scale: f64,
    pub max_rel: f64,
    pub argmax_rel: (f64, f64),
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub alpha: f64,
    pub domain: Interval,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dependence: Option<DependenceVerdict>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit: Option<FamilyFit>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_spread: Option<f64>,
    pub per_interval_tags: Vec<IntervalTag>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep: Option<SweepSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<String>,
}

impl Classification {
    pub fn mu(&self) -> Option<f64> {
        self.fit.as_ref().filter(|_| self.verdict.family().is_some()).map(|f| f.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyOptions {
    pub tau: f64,
    pub sweep_n: usize,
    pub zero_grid: usize,
    pub dependence_samples: usize,
    pub probes: usize,
    pub fit_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tau: TAU,
            sweep_n: 40,
            zero_grid: 1024,
            dependence_samples: 64,
            probes: 33,
            fit_tol: 1e-6,
        }
    }
}

/// Classify `(F, G)` under the mean `m` on `domain`.
///
/// Non-solutions and pairs matching no case come back as
/// [`Verdict::Unclassified`] with diagnostics, never as an error.
pub fn classify_pair(big_f: &SmoothFn, big_g: &SmoothFn, m: MeanSpec, domain: Interval) -> Classification {
    classify_pair_with(big_f, big_g, m, domain, &ClassifyOptions::default())
}

pub fn classify_pair_with(
    big_f: &SmoothFn,
    big_g: &SmoothFn,
    m: MeanSpec,
    domain: Interval,
    opts: &ClassifyOptions,
) -> Classification {
    let mut out = Classification {
        verdict: Verdict::Unclassified,
        alpha: m.alpha(),
        domain,
        dependence: None,
        fit: None,
        lambda_estimate: None,
        lambda_spread: None,
        per_interval_tags: Vec::new(),
        sweep: None,
        diagnostics: Vec::new(),
    };

    match sweep(Equation::Cauchy(big_f, big_g), m, domain, opts.sweep_n) {
        Ok(rep) => {
            let passed = rep.passes(opts.tau);
            out.sweep = Some(SweepSummary {
                n: opts.sweep_n,
                max_abs: rep.max_abs,
                scale: rep.scale,
                max_rel: rep.max_rel,
                argmax_rel: rep.argmax_rel,
                passed,
            });
            if !passed {
                out.diagnostics.push(match rep.first_error {
                    Some(e) => format!("residual sweep hit {} domain errors, first {e}", rep.domain_errors),
                    None => format!(
                        "not a solution: max relative residual {:.3e} at {:?} exceeds tau = {:e}",
                        rep.max_rel, rep.argmax_rel, opts.tau
                    ),
                });
                best_effort_fit(big_f, big_g, domain, opts, &mut out);
                return out;
            }
        }
        Err(e) => {
            out.diagnostics.push(format!("residual sweep failed: {e}"));
            return out;
        }
    }

    let zeros = zero_set(|x| big_g.deriv(x), domain, opts.zero_grid);
    if zeros.is_empty() {
        // G is constant: {1, F, G} related through (-G(x), 0, 1).
        let x = domain.midpoint();
        match big_g.value(x) {
            Ok(gx) => {
                let coefficients = normalize_triple([-gx, 0.0, 1.0]);
                out.verdict = Verdict::A;
                out.dependence = Some(DependenceVerdict {
                    dependent: true,
                    coefficients,
                    condition_ratio: 0.0,
                    residual_rms: 0.0,
                    sample_rms: gx.abs() / std::f64::consts::SQRT_2,
                });
                out.diagnostics.push("g vanishes on the whole domain".into());
            }
            Err(e) => out.diagnostics.push(format!("cannot evaluate G: {e}")),
        }
        return out;
    }

    out.per_interval_tags = zeros
        .nonvanishing
        .par_iter()
        .map(|&iv| tag_interval(big_f, big_g, iv, m, opts))
        .collect();

    let global = match dependence_test(big_f, big_g, domain, opts.dependence_samples) {
        Ok(d) => d,
        Err(e) => {
            out.diagnostics.push(format!("dependence test failed: {e}"));
            return out;
        }
    };
    let dependent = global.dependent;
    out.dependence = Some(global);
    if dependent {
        out.verdict = Verdict::A;
        let mixed = out.per_interval_tags.iter().filter(|t| t.tag != Tag::Lr).count();
        if mixed > 0 {
            out.diagnostics.push(format!("{mixed} interval(s) carry a family tag inside a dependent pair"));
        }
        return out;
    }
    if !m.is_symmetric() {
        out.diagnostics.push("asymmetric mean admits only linearly dependent solutions".into());
        best_effort_fit(big_f, big_g, domain, opts, &mut out);
        return out;
    }

    let families: Vec<Family> = out.per_interval_tags.iter().filter_map(|t| t.tag.family()).collect();
    let unresolved = out.per_interval_tags.iter().filter(|t| t.tag == Tag::Unclassified).count();
    let Some(&family) = families.first() else {
        out.diagnostics.push("no interval carries a family tag".into());
        best_effort_fit(big_f, big_g, domain, opts, &mut out);
        return out;
    };
    if unresolved > 0 || families.iter().any(|&f| f != family) {
        out.diagnostics.push("intervals disagree on the family type".into());
        best_effort_fit(big_f, big_g, domain, opts, &mut out);
        return out;
    }

    let lambda = match lambda_from_layers(big_g.d1(), big_g.d3(), domain, opts.probes) {
        Ok(l) => l,
        Err(e) => {
            out.diagnostics.push(format!("lambda estimate failed: {e}"));
            return out;
        }
    };
    out.lambda_estimate = Some(lambda.value);
    out.lambda_spread = Some(lambda.spread);
    if lambda.family() != family {
        out.diagnostics.push(format!(
            "global lambda {:.6e} selects {:?} but intervals are {:?}",
            lambda.value,
            lambda.family(),
            family
        ));
        best_effort_fit(big_f, big_g, domain, opts, &mut out);
        return out;
    }
    let fit = match family_fit(big_f, big_g, domain, &lambda) {
        Ok(f) => f,
        Err(e) => {
            out.diagnostics.push(format!("global fit failed: {e}"));
            return out;
        }
    };
    let holds = fit.holds(opts.fit_tol) && (family == Family::Quadratic || lambda.is_consistent());
    if holds {
        out.verdict = family.verdict();
        for t in out.per_interval_tags.iter_mut().filter(|t| t.tag == Tag::Lr) {
            out.diagnostics.push(format!(
                "interval {} looked dependent but the global {family:?} fit covers it",
                t.interval
            ));
            t.tag = family.tag();
        }
    } else {
        out.diagnostics.push(format!(
            "global {family:?} fit has relative rms {:.3e} (lambda spread {:.3e})",
            fit.relative_rms(),
            lambda.spread
        ));
    }
    out.fit = Some(fit);
    out
}

fn tag_interval(big_f: &SmoothFn, big_g: &SmoothFn, iv: Interval, m: MeanSpec, opts: &ClassifyOptions) -> IntervalTag {
    let mut tag = IntervalTag { interval: iv, tag: Tag::Unclassified, lambda: None, mu: None, fit_relative_rms: None };
    match dependence_test(big_f, big_g, iv, opts.dependence_samples) {
        Ok(d) if d.dependent => {
            tag.tag = Tag::Lr;
            return tag;
        }
        Ok(_) => {}
        Err(_) => return tag,
    }
    if !m.is_symmetric() {
        return tag;
    }
    let Ok(lambda) = lambda_from_layers(big_g.d1(), big_g.d3(), iv, opts.probes) else {
        return tag;
    };
    tag.lambda = Some(lambda.value);
    if let Ok(fit) = family_fit(big_f, big_g, iv, &lambda) {
        tag.fit_relative_rms = Some(fit.relative_rms());
        if fit.family != Family::Quadratic {
            tag.mu = Some(fit.mu);
        }
        if fit.holds(opts.fit_tol) {
            tag.tag = fit.family.tag();
        }
    }
    tag
}

/// Record the best-fitting family for a pair that did not classify.
fn best_effort_fit(big_f: &SmoothFn, big_g: &SmoothFn, domain: Interval, opts: &ClassifyOptions, out: &mut Classification) {
    let Ok(lambda) = lambda_from_layers(big_g.d1(), big_g.d3(), domain, opts.probes) else {
        return;
    };
    out.lambda_estimate = Some(lambda.value);
    out.lambda_spread = Some(lambda.spread);
    if let Ok(fit) = family_fit(big_f, big_g, domain, &lambda) {
        out.diagnostics.push(format!(
            "closest family {:?} (mu = {:.6}) with relative rms {:.3e}",
            fit.family,
            fit.mu,
            fit.relative_rms()
        ));
        out.fit = Some(fit);
    }
}

impl From<ClassifyError> for MvtError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::Eval(e) => MvtError::Eval(e),
            other => MvtError::InvalidArgument(other.to_string()),
        }
    }
}
