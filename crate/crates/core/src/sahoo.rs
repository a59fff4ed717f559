//! The four-function equation
//!
//! `[F(x) - F(y)] phi((x+y)/2) = [G(x) - G(y)] psi((x+y)/2)`
//!
//! With `phi = g` and `psi = f` it reduces to the symmetric Cauchy equation.
//! Under the hypothesis that `phi` or `psi` never vanishes, every smooth
//! solution falls into one of four cases, each pairing a form for `F`, `G`
//! with a pointwise side condition on `phi`, `psi`. This module evaluates
//! the residuals and checks a case against given `phi`, `psi`.
//!
//! `phi` and `psi` are carried as [`SmoothFn`] but only their values are used.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::Interval;
use crate::classify::Family;
use crate::expr::{Expr, SmoothFn};
use crate::mvt::{MvtError, Residual, ResidualReport, TAU};

/// `[F(x) - F(y)] phi(s) - [G(x) - G(y)] psi(s)` with `s = (x + y) / 2`.
pub fn sr_residual(
    big_f: &SmoothFn,
    big_g: &SmoothFn,
    phi: &SmoothFn,
    psi: &SmoothFn,
    x: f64,
    y: f64,
) -> Result<Residual, MvtError> {
    let s = 0.5 * (x + y);
    let lhs = (big_f.value(x)? - big_f.value(y)?) * phi.value(s)?;
    let rhs = (big_g.value(x)? - big_g.value(y)?) * psi.value(s)?;
    Ok(Residual::new(lhs - rhs, &[lhs, rhs]))
}

/// `f(s) phi(s) - g(s) psi(s)`, the condition obtained by differentiating in
/// the half-difference and setting it to zero.
pub fn sr_compatibility_residual(
    big_f: &SmoothFn,
    big_g: &SmoothFn,
    phi: &SmoothFn,
    psi: &SmoothFn,
    s: f64,
) -> Result<Residual, MvtError> {
    let lhs = big_f.deriv(s)? * phi.value(s)?;
    let rhs = big_g.deriv(s)? * psi.value(s)?;
    Ok(Residual::new(lhs - rhs, &[lhs, rhs]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseTag {
    A,
    B,
    C,
    D,
}

impl CaseTag {
    pub const ALL: [CaseTag; 4] = [CaseTag::A, CaseTag::B, CaseTag::C, CaseTag::D];

    pub fn family(self) -> Option<Family> {
        match self {
            CaseTag::A => None,
            CaseTag::B => Some(Family::Quadratic),
            CaseTag::C => Some(Family::Exponential),
            CaseTag::D => Some(Family::Trigonometric),
        }
    }
}

/// One case of the four-function theorem with its constants.
///
/// `coeffs` is `(A0, A1, A2, B0, B1, B2)`. In cases b–d, `F` and `G` are
/// `A0 + A1 u1 + A2 u2` and `B0 + B1 u1 + B2 u2` over the family basis
/// (`{1, s, s^2}` in case b). In case a only `(A0, A1, A2)` is used: the
/// relation `A0 + A1 F + A2 G = 0` fixes one function from `base`, which
/// defaults to `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrupleCase {
    pub case_tag: CaseTag,
    #[serde(default)]
    pub mu: f64,
    pub coeffs: [f64; 6],
    #[serde(skip)]
    pub base: Option<SmoothFn>,
}

impl QuadrupleCase {
    pub fn new(case_tag: CaseTag, mu: f64, coeffs: [f64; 6]) -> Result<Self, MvtError> {
        let q = QuadrupleCase { case_tag, mu, coeffs, base: None };
        q.validate()?;
        Ok(q)
    }

    pub fn with_base(mut self, base: SmoothFn) -> Self {
        self.base = Some(base);
        self
    }

    pub fn validate(&self) -> Result<(), MvtError> {
        if self.coeffs.iter().any(|c| !c.is_finite()) || !self.mu.is_finite() {
            return Err(MvtError::InvalidArgument("non-finite case constants".into()));
        }
        match self.case_tag {
            CaseTag::A => {
                let [_, a1, a2, ..] = self.coeffs;
                if a1 == 0.0 && a2 == 0.0 {
                    return Err(MvtError::InvalidArgument(
                        "case a needs A1 or A2 nonzero to relate F and G".into(),
                    ));
                }
            }
            CaseTag::B => {}
            CaseTag::C | CaseTag::D => {
                if self.mu == 0.0 {
                    return Err(MvtError::InvalidArgument("mu must be nonzero in cases c and d".into()));
                }
            }
        }
        Ok(())
    }

    /// `F` and `G` determined by the case constants.
    pub fn functions(&self) -> (SmoothFn, SmoothFn) {
        let [a0, a1, a2, b0, b1, b2] = self.coeffs;
        match self.case_tag.family() {
            Some(fam) => (
                SmoothFn::new(fam.expr(self.mu, [a0, a1, a2]), "F"),
                SmoothFn::new(fam.expr(self.mu, [b0, b1, b2]), "G"),
            ),
            None => {
                let base = self.base.clone().map(|b| b.d0().clone()).unwrap_or_else(Expr::x);
                if a1 != 0.0 {
                    let f = (Expr::Const(-a0) - Expr::Const(a2) * base.clone()) / Expr::Const(a1);
                    (SmoothFn::new(f, "F"), SmoothFn::new(base, "G"))
                } else {
                    (SmoothFn::new(base, "F"), SmoothFn::new(Expr::Const(-a0 / a2), "G"))
                }
            }
        }
    }

    /// The two sides of the case's side condition at `s`.
    pub fn side_terms(&self, phi: &SmoothFn, psi: &SmoothFn, s: f64) -> Result<(f64, f64), MvtError> {
        let [_, a1, a2, _, b1, b2] = self.coeffs;
        let (p, q) = (phi.value(s)?, psi.value(s)?);
        let mu = self.mu;
        Ok(match self.case_tag {
            CaseTag::A => {
                let (_, big_g) = self.functions();
                (big_g.deriv(s)? * (a1 * q + a2 * p), 0.0)
            }
            CaseTag::B => ((a1 + 2.0 * a2 * s) * p, (b1 + 2.0 * b2 * s) * q),
            CaseTag::C => {
                let (ep, em) = ((mu * s).exp(), (-mu * s).exp());
                ((a1 * ep - a2 * em) * p, (b1 * ep - b2 * em) * q)
            }
            CaseTag::D => {
                let (sn, cs) = (mu * s).sin_cos();
                ((a1 * cs - a2 * sn) * p, (b1 * cs - b2 * sn) * q)
            }
        })
    }

    /// Weights `(phi, psi)` satisfying the side condition for any nonvanishing `w`.
    ///
    /// Cases b–d use `phi = u_G w`, `psi = u_F w` where `u_F`, `u_G` are the
    /// bracketed factors of the condition. Case a uses `phi = w` and
    /// `psi = -A2 w / A1`.
    pub fn compatible_weights(&self, w: &SmoothFn) -> (SmoothFn, SmoothFn) {
        let [_, a1, a2, _, b1, b2] = self.coeffs;
        let w = w.d0().clone();
        let s = Expr::x();
        let mu = Expr::Const(self.mu);
        let factor = |c1: f64, c2: f64| -> Expr {
            let (c1, c2) = (Expr::Const(c1), Expr::Const(c2));
            match self.case_tag {
                CaseTag::B => c1 + Expr::Const(2.0) * c2 * s.clone(),
                CaseTag::C => {
                    c1 * (mu.clone() * s.clone()).exp() - c2 * (-(mu.clone() * s.clone())).exp()
                }
                CaseTag::D => c1 * (mu.clone() * s.clone()).cos() - c2 * (mu.clone() * s.clone()).sin(),
                CaseTag::A => unreachable!(),
            }
        };
        match self.case_tag {
            CaseTag::A if a1 != 0.0 => (
                SmoothFn::new(w.clone(), "phi"),
                SmoothFn::new(Expr::Const(-a2 / a1) * w, "psi"),
            ),
            CaseTag::A => (SmoothFn::new(w.clone(), "phi"), SmoothFn::new(w, "psi")),
            _ => (
                SmoothFn::new(factor(b1, b2) * w.clone(), "phi"),
                SmoothFn::new(factor(a1, a2) * w, "psi"),
            ),
        }
    }
}

/// Outcome of [`sr_case_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseCheckReport {
    pub case_tag: CaseTag,
    /// Side condition on a 1-D grid; samples carry `a = b = s`.
    pub side_condition: ResidualReport,
    pub side_condition_holds: bool,
    /// Equation residual on the 2-D grid, computed only when the side condition holds.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub equation: Option<ResidualReport>,
    /// Set when neither `phi` nor `psi` is free of zeros on the sampled domain.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hypothesis_warning: Option<String>,
}

impl CaseCheckReport {
    pub fn passes(&self, tau: f64) -> bool {
        self.side_condition_holds && self.equation.as_ref().is_some_and(|r| r.passes(tau))
    }
}

pub const SIDE_SAMPLES: usize = 201;
pub const GRID_N: usize = 40;

pub fn sr_case_check(case: &QuadrupleCase, phi: &SmoothFn, psi: &SmoothFn, domain: Interval) -> CaseCheckReport {
    sr_case_check_with(case, phi, psi, domain, GRID_N, TAU)
}

/// Evaluate the side condition on `SIDE_SAMPLES` points of `domain`; if it
/// holds within `tau`, also evaluate the equation on the full `n x n` grid.
pub fn sr_case_check_with(
    case: &QuadrupleCase,
    phi: &SmoothFn,
    psi: &SmoothFn,
    domain: Interval,
    n: usize,
    tau: f64,
) -> CaseCheckReport {
    let pts = domain.linspace(SIDE_SAMPLES);
    let side = ResidualReport::from_results(
        pts.iter()
            .map(|&s| {
                let r = case.side_terms(phi, psi, s).map(|(l, r)| Residual::new(l - r, &[l, r]));
                ((s, s), r)
            })
            .collect(),
    );
    let holds = side.passes(tau);
    let equation = holds.then(|| {
        let (big_f, big_g) = case.functions();
        sr_grid(&big_f, &big_g, phi, psi, domain, n)
    });
    CaseCheckReport {
        case_tag: case.case_tag,
        side_condition: side,
        side_condition_holds: holds,
        equation,
        hypothesis_warning: hypothesis_warning(phi, psi, &pts),
    }
}

/// Equation residual on every ordered pair of an `n`-point grid.
pub fn sr_grid(
    big_f: &SmoothFn,
    big_g: &SmoothFn,
    phi: &SmoothFn,
    psi: &SmoothFn,
    domain: Interval,
    n: usize,
) -> ResidualReport {
    let grid = domain.linspace(n.max(2));
    let rows: Vec<Vec<_>> = grid
        .par_iter()
        .map(|&x| grid.iter().map(|&y| ((x, y), sr_residual(big_f, big_g, phi, psi, x, y))).collect())
        .collect();
    ResidualReport::from_results(rows.into_iter().flatten().collect())
}

fn vanishes_somewhere(h: &SmoothFn, pts: &[f64]) -> bool {
    let vals: Vec<f64> = pts.iter().map(|&s| h.value(s).unwrap_or(0.0)).collect();
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    vals.iter().any(|v| v.abs() <= 1e-12 * top.max(1.0))
        || vals.windows(2).any(|w| w[0].signum() != w[1].signum())
}

fn hypothesis_warning(phi: &SmoothFn, psi: &SmoothFn, pts: &[f64]) -> Option<String> {
    (vanishes_somewhere(phi, pts) && vanishes_somewhere(psi, pts)).then(|| {
        "both phi and psi vanish somewhere on the domain; the case list is not guaranteed to be exhaustive".into()
    })
}
