//! Seeded generators for solution pairs of each family, perturbations that
//! break them, and a batch driver that classifies many draws.
//!
//! The pseudo-random generator is SplitMix64. Its constants are part of the
//! suite configuration so that a suite reproduces from its JSON alone.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::Interval;
use crate::classify::{
    classify_pair_with, normalize_triple, Classification, ClassifyOptions, DependenceVerdict, Family, FamilyFit, Verdict,
};
use crate::expr::{Expr, SmoothFn};
use crate::mvt::{sweep, Equation, MeanSpec, MvtError, TAU};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid range ({0}, {1})")]
    InvalidRange(f64, f64),
    #[error("degeneracy floor must be positive (got {0})")]
    InvalidFloor(f64),
    #[error("no acceptable draw after {0} attempts")]
    Exhausted(usize),
    #[error(transparent)]
    Mvt(#[from] MvtError),
    #[error("{0}")]
    Config(String),
}

/// SplitMix64 constants: state increment and the two finalizer multipliers.
/// The finalizer shifts are fixed at 30, 27 and 31.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RngConstants {
    pub algorithm: RngAlgorithm,
    pub gamma: u64,
    pub mix1: u64,
    pub mix2: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RngAlgorithm {
    Splitmix64,
}

impl Default for RngConstants {
    fn default() -> Self {
        RngConstants {
            algorithm: RngAlgorithm::Splitmix64,
            gamma: 0x9E37_79B9_7F4A_7C15,
            mix1: 0xBF58_476D_1CE4_E5B9,
            mix2: 0x94D0_49BB_1331_11EB,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    k: RngConstants,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self::with_constants(seed, RngConstants::default())
    }

    pub fn with_constants(seed: u64, k: RngConstants) -> Self {
        SplitMix64 { state: seed, k }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(self.k.gamma);
        self.mix(self.state)
    }

    fn mix(&self, mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(self.k.mix1);
        z = (z ^ (z >> 27)).wrapping_mul(self.k.mix2);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Seed for draw `index` of stream `stream`, independent of evaluation order.
    pub fn subseed(seed: u64, stream: u64, index: u64, k: RngConstants) -> u64 {
        let mut r = SplitMix64::with_constants(seed ^ stream.wrapping_mul(k.mix2), k);
        let base = r.next_u64();
        SplitMix64::with_constants(base.wrapping_add(index.wrapping_mul(k.gamma)), k).next_u64()
    }
}

/// Ground-truth family of a generated pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenFamily {
    A,
    B,
    C,
    D,
}

impl GenFamily {
    pub const ALL: [GenFamily; 4] = [GenFamily::A, GenFamily::B, GenFamily::C, GenFamily::D];

    pub fn verdict(self) -> Verdict {
        match self {
            GenFamily::A => Verdict::A,
            GenFamily::B => Verdict::B,
            GenFamily::C => Verdict::C,
            GenFamily::D => Verdict::D,
        }
    }

    pub fn family(self) -> Option<Family> {
        self.verdict().family()
    }

    fn index(self) -> u64 {
        self as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: GenFamily,
    pub seed: u64,
    pub coeff_range: (f64, f64),
    pub mu_range: (f64, f64),
    pub degeneracy_floor: f64,
}

impl GeneratorSpec {
    pub fn new(family: GenFamily, seed: u64) -> Self {
        GeneratorSpec { family, seed, coeff_range: (-2.0, 2.0), mu_range: (0.3, 3.0), degeneracy_floor: 0.1 }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        for (lo, hi) in [self.coeff_range, self.mu_range] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(HarnessError::InvalidRange(lo, hi));
            }
        }
        if !(self.degeneracy_floor > 0.0) {
            return Err(HarnessError::InvalidFloor(self.degeneracy_floor));
        }
        let max_abs = self.coeff_range.0.abs().max(self.coeff_range.1.abs());
        if max_abs < self.degeneracy_floor {
            return Err(HarnessError::Config("coeff_range cannot reach the degeneracy floor".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedPair {
    pub f: SmoothFn,
    pub g: SmoothFn,
    pub truth: Classification,
}

const MAX_ATTEMPTS: usize = 10_000;

/// Draw a family member pair `(F, G)` with `{1, F, G}` independent, or for
/// family a a dependent pair `F = c1 G + c0` with `G` from a random family.
pub fn generate_pair(spec: &GeneratorSpec, domain: Interval) -> Result<GeneratedPair, HarnessError> {
    generate_pair_with(spec, domain, RngConstants::default())
}

pub fn generate_pair_with(spec: &GeneratorSpec, domain: Interval, k: RngConstants) -> Result<GeneratedPair, HarnessError> {
    spec.validate()?;
    let mut rng = SplitMix64::with_constants(spec.seed, k);
    let floor = spec.degeneracy_floor;
    let (clo, chi) = spec.coeff_range;
    let mut truth = Classification {
        verdict: spec.family.verdict(),
        alpha: 0.5,
        domain,
        dependence: None,
        fit: None,
        lambda_estimate: None,
        lambda_spread: Some(0.0),
        per_interval_tags: Vec::new(),
        sweep: None,
        diagnostics: Vec::new(),
    };
    match spec.family.family() {
        Some(fam) => {
            let mu = if fam == Family::Quadratic { 0.0 } else { rng.uniform(spec.mu_range.0, spec.mu_range.1) };
            let (a, b) = draw_independent(&mut rng, fam, spec)?;
            truth.lambda_estimate = Some(match fam {
                Family::Quadratic => 0.0,
                Family::Exponential => 4.0 * mu * mu,
                Family::Trigonometric => -4.0 * mu * mu,
            });
            truth.fit = Some(FamilyFit { family: fam, mu, coeffs_f: a, coeffs_g: b, rms_residual: 0.0, scale: 1.0 });
            Ok(GeneratedPair {
                f: SmoothFn::new(fam.expr(mu, a), "F"),
                g: SmoothFn::new(fam.expr(mu, b), "G"),
                truth,
            })
        }
        None => {
            let fam = Family::ALL[rng.below(3) as usize];
            let mu = if fam == Family::Quadratic { 0.0 } else { rng.uniform(spec.mu_range.0, spec.mu_range.1) };
            let b = draw_leading(&mut rng, fam, spec)?;
            let c1 = draw_floored(&mut rng, clo, chi, floor)?;
            let c0 = rng.uniform(clo, chi);
            let g = fam.expr(mu, b);
            let f = Expr::Const(c1) * g.clone() + Expr::Const(c0);
            truth.dependence = Some(DependenceVerdict {
                dependent: true,
                coefficients: normalize_triple([-c0, 1.0, -c1]),
                condition_ratio: 0.0,
                residual_rms: 0.0,
                sample_rms: 0.0,
            });
            Ok(GeneratedPair { f: SmoothFn::new(f, "F"), g: SmoothFn::new(g, "G"), truth })
        }
    }
}

/// Size of the non-constant part used for the degeneracy test: the `x^2`
/// coefficient for the quadratic family, else the larger of the two.
fn leading(fam: Family, c: &[f64; 3]) -> f64 {
    match fam {
        Family::Quadratic => c[2].abs(),
        _ => c[1].abs().max(c[2].abs()),
    }
}

fn draw_triple(rng: &mut SplitMix64, (lo, hi): (f64, f64)) -> [f64; 3] {
    [rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)]
}

fn draw_leading(rng: &mut SplitMix64, fam: Family, spec: &GeneratorSpec) -> Result<[f64; 3], HarnessError> {
    for _ in 0..MAX_ATTEMPTS {
        let c = draw_triple(rng, spec.coeff_range);
        if leading(fam, &c) >= spec.degeneracy_floor {
            return Ok(c);
        }
    }
    Err(HarnessError::Exhausted(MAX_ATTEMPTS))
}

/// Both leading coefficients above the floor and the 2x2 minor of the
/// non-constant parts above `floor^2`, which keeps `{1, F, G}` away from
/// dependence.
fn draw_independent(
    rng: &mut SplitMix64,
    fam: Family,
    spec: &GeneratorSpec,
) -> Result<([f64; 3], [f64; 3]), HarnessError> {
    let floor = spec.degeneracy_floor;
    for _ in 0..MAX_ATTEMPTS {
        let a = draw_triple(rng, spec.coeff_range);
        let b = draw_triple(rng, spec.coeff_range);
        let minor = a[1] * b[2] - a[2] * b[1];
        if leading(fam, &a) >= floor && leading(fam, &b) >= floor && minor.abs() >= floor * floor {
            return Ok((a, b));
        }
    }
    Err(HarnessError::Exhausted(MAX_ATTEMPTS))
}

fn draw_floored(rng: &mut SplitMix64, lo: f64, hi: f64, floor: f64) -> Result<f64, HarnessError> {
    for _ in 0..MAX_ATTEMPTS {
        let v = rng.uniform(lo, hi);
        if v.abs() >= floor {
            return Ok(v);
        }
    }
    Err(HarnessError::Exhausted(MAX_ATTEMPTS))
}

/// Random polynomial `c0 + c1 x + ... + cd x^d` with `|cd| >= floor`.
pub fn random_polynomial(
    rng: &mut SplitMix64,
    degree: usize,
    range: (f64, f64),
    floor: f64,
) -> Result<SmoothFn, HarnessError> {
    let mut coeffs: Vec<f64> = (0..degree).map(|_| rng.uniform(range.0, range.1)).collect();
    coeffs.push(draw_floored(rng, range.0, range.1, floor)?);
    let x = Expr::x();
    let e = coeffs.iter().enumerate().rev().fold(Expr::Const(0.0), |acc, (i, &c)| {
        let term = match i {
            0 => Expr::Const(c),
            1 => Expr::Const(c) * x.clone(),
            _ => Expr::Const(c) * x.clone().powf(i as f64),
        };
        acc + term
    });
    Ok(SmoothFn::new(e, "F"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    AddCubic,
    AddSine,
}

/// `F + eps x^3` or `F + eps sin(5x)`.
pub fn perturb(big_f: &SmoothFn, epsilon: f64, mode: PerturbMode) -> SmoothFn {
    let x = Expr::x();
    let bump = match mode {
        PerturbMode::AddCubic => x.powf(3.0),
        PerturbMode::AddSine => (Expr::Const(5.0) * x).sin(),
    };
    let e = big_f.d0().clone() + Expr::Const(epsilon) * bump;
    SmoothFn::new(e, format!("{}+perturbed", big_f.label))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub epsilon: f64,
    pub mode: PerturbMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub families: Vec<GenFamily>,
    pub count: usize,
    pub seed: u64,
    pub domain: (f64, f64),
    pub alpha: f64,
    pub coeff_range: (f64, f64),
    pub mu_range: (f64, f64),
    pub degeneracy_floor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    pub classify: ClassifyOptions,
    pub rng: RngConstants,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            families: GenFamily::ALL.to_vec(),
            count: 200,
            seed: 20_240_601,
            domain: (-3.0, 3.0),
            alpha: 0.5,
            coeff_range: (-2.0, 2.0),
            mu_range: (0.3, 3.0),
            degeneracy_floor: 0.1,
            perturbation: None,
            classify: ClassifyOptions::default(),
            rng: RngConstants::default(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(MeanSpec, Interval), HarnessError> {
        let m = MeanSpec::new(self.alpha)?;
        let dom = Interval::try_new(self.domain.0, self.domain.1, false, false)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.families.is_empty() {
            return Err(HarnessError::Config("no families requested".into()));
        }
        if self.classify.tau <= 0.0 || self.classify.sweep_n < 2 {
            return Err(HarnessError::Config("tau must be positive and sweep_n at least 2".into()));
        }
        self.generator(GenFamily::A, 0).validate()?;
        Ok((m, dom))
    }

    pub fn generator(&self, family: GenFamily, index: usize) -> GeneratorSpec {
        GeneratorSpec {
            family,
            seed: SplitMix64::subseed(self.seed, family.index(), index as u64, self.rng),
            coeff_range: self.coeff_range,
            mu_range: self.mu_range,
            degeneracy_floor: self.degeneracy_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawRecord {
    pub family: GenFamily,
    pub index: usize,
    pub seed: u64,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(rename = "G")]
    pub g: String,
    pub verdict: Verdict,
    pub sweep_max_rel: f64,
    pub sweep_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_true: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_found: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeff_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl DrawRecord {
    pub fn mu_relative_error(&self) -> Option<f64> {
        match (self.mu_true, self.mu_found) {
            (Some(t), Some(f)) if t != 0.0 => Some((f - t).abs() / t.abs()),
            _ => None,
        }
    }
}

/// Rows are ground-truth families a–d, columns verdicts a, b, c, d, unclassified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub rows: Vec<GenFamily>,
    pub columns: Vec<Verdict>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    fn new() -> Self {
        ConfusionMatrix {
            rows: GenFamily::ALL.to_vec(),
            columns: Verdict::ALL.to_vec(),
            counts: vec![vec![0; Verdict::ALL.len()]; GenFamily::ALL.len()],
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn diagonal(&self) -> usize {
        self.rows.iter().enumerate().map(|(i, f)| self.counts[i][f.verdict().index()]).sum()
    }

    pub fn diagonal_fraction(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.diagonal() as f64 / t as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: String,
    pub config: SuiteConfig,
    pub draws: Vec<DrawRecord>,
    pub confusion: ConfusionMatrix,
    pub diagonal_fraction: f64,
    pub sweep_pass_fraction: f64,
    pub max_mu_relative_error: f64,
    pub max_coeff_error: f64,
    pub errors: usize,
}

pub const SCHEMA: &str = "mvtlab/1";

/// Generate, sweep and classify every draw. Draws run in parallel; records
/// are kept in (family, index) order so the report does not depend on the
/// thread count.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport, HarnessError> {
    let (m, dom) = config.validate()?;
    let jobs: Vec<(GenFamily, usize)> = config
        .families
        .iter()
        .flat_map(|&f| (0..config.count).map(move |i| (f, i)))
        .collect();
    let draws: Vec<DrawRecord> = jobs.par_iter().map(|&(fam, i)| run_draw(config, m, dom, fam, i)).collect();

    let mut confusion = ConfusionMatrix::new();
    let mut passed = 0;
    let mut max_mu: f64 = 0.0;
    let mut max_coeff: f64 = 0.0;
    let mut errors = 0;
    for d in &draws {
        confusion.counts[d.family.index() as usize][d.verdict.index()] += 1;
        passed += usize::from(d.sweep_passed);
        if let Some(e) = d.mu_relative_error() {
            max_mu = max_mu.max(e);
        }
        if let Some(e) = d.coeff_error {
            max_coeff = max_coeff.max(e);
        }
        errors += usize::from(d.error.is_some());
    }
    Ok(SuiteReport {
        schema: SCHEMA.into(),
        config: config.clone(),
        diagonal_fraction: confusion.diagonal_fraction(),
        sweep_pass_fraction: if draws.is_empty() { 0.0 } else { passed as f64 / draws.len() as f64 },
        confusion,
        draws,
        max_mu_relative_error: max_mu,
        max_coeff_error: max_coeff,
        errors,
    })
}

fn run_draw(config: &SuiteConfig, m: MeanSpec, dom: Interval, fam: GenFamily, index: usize) -> DrawRecord {
    let spec = config.generator(fam, index);
    let mut rec = DrawRecord {
        family: fam,
        index,
        seed: spec.seed,
        f: String::new(),
        g: String::new(),
        verdict: Verdict::Unclassified,
        sweep_max_rel: f64::NAN,
        sweep_passed: false,
        mu_true: None,
        mu_found: None,
        coeff_error: None,
        error: None,
    };
    let pair = match generate_pair_with(&spec, dom, config.rng) {
        Ok(p) => p,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    let big_f = match config.perturbation {
        Some(p) => perturb(&pair.f, p.epsilon, p.mode),
        None => pair.f.clone(),
    };
    rec.f = big_f.d0().to_string();
    rec.g = pair.g.d0().to_string();
    match sweep(Equation::Cauchy(&big_f, &pair.g), m, dom, config.classify.sweep_n) {
        Ok(r) => {
            rec.sweep_max_rel = r.max_rel;
            rec.sweep_passed = r.passes(config.classify.tau);
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    let c = classify_pair_with(&big_f, &pair.g, m, dom, &config.classify);
    rec.verdict = c.verdict;
    if let Some(truth) = pair.truth.fit.as_ref().filter(|t| t.family != Family::Quadratic) {
        rec.mu_true = Some(truth.mu);
    }
    if let (Some(truth), Some(found)) = (pair.truth.fit.as_ref(), c.fit.as_ref()) {
        if c.verdict.family() == Some(truth.family) {
            if truth.family != Family::Quadratic {
                rec.mu_found = Some(found.mu);
            }
            rec.coeff_error = Some(coefficient_error(truth, found));
        }
    }
    rec
}

/// Largest relative deviation of the fitted coefficient vectors, each
/// measured against the norm of its true vector.
pub fn coefficient_error(truth: &FamilyFit, found: &FamilyFit) -> f64 {
    let rel = |t: &[f64; 3], f: &[f64; 3]| {
        let n = t.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        t.iter().zip(f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / n
    };
    rel(&truth.coeffs_f, &found.coeffs_f).max(rel(&truth.coeffs_g, &found.coeffs_g))
}

/// Default tolerance used by suites that do not override it.
pub const DEFAULT_TAU: f64 = TAU;
