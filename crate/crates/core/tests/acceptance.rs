//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p mvtlab --test acceptance`.

mod common;

use std::time::Instant;

use mvtlab::calculus::{integrate, zero_set, Interval, QuadratureSpec};
use mvtlab::cli::verify_example;
use mvtlab::harness::{
    generate_pair, perturb, random_polynomial, run_suite, GenFamily, GeneratorSpec, PerturbMode, SplitMix64,
    SuiteConfig,
};
use mvtlab::mvt::{
    cauchy_residual, cauchy_residual_by_quadrature, construct_f, sweep, ConstructionParams, Equation,
    IntegralCondition, MeanSpec, MvtError, TAU,
};
use mvtlab::sahoo::{sr_case_check_with, sr_residual, CaseTag, QuadrupleCase};
use mvtlab::{Expr, SmoothFn};

use common::{random_expr, rel_diff, ridders};

// Tolerances and budgets, fixed here so a failing run cannot be tuned away.
const EXAMPLE_BUDGET_S: f64 = 5.0;
const LAGRANGE_PASS: f64 = 1e-10;
const LAGRANGE_CUBIC_FAIL: f64 = 1e-2;
const LAGRANGE_BUDGET_S: f64 = 10.0;
const ROUND_TRIP_DIAGONAL: f64 = 0.99;
const ROUND_TRIP_MU: f64 = 1e-6;
const ROUND_TRIP_BUDGET_S: f64 = 60.0;
const ASYM_FAIL: f64 = 1e-3;
const ASYM_BUDGET_S: f64 = 30.0;
const IFF_THRESHOLD: f64 = 1e-7;
const IFF_H_FLOOR: f64 = 0.2;
const IFF_BUDGET_S: f64 = 20.0;
const SR_PASS: f64 = 1e-8;
const SR_REDUCTION: f64 = 1e-12;
const SR_BUDGET_S: f64 = 20.0;
const DERIV_REL: f64 = 1e-6;
const QUAD_ADDITIVITY: f64 = 10.0 * 1e-10;
const ZERO_POS: f64 = 1e-6;
const SUBSTRATE_BUDGET_S: f64 = 10.0;
const SEPARATION_FACTOR: f64 = 10.0;
const SEPARATION_EPS: f64 = 1e-3;
const SEPARATION_BUDGET_S: f64 = 10.0;

const DOMAIN: (f64, f64) = (-3.0, 3.0);
const SWEEP_N: usize = 40;

struct Outcome {
    pass: bool,
    detail: String,
}

fn domain() -> Interval {
    Interval::closed(DOMAIN.0, DOMAIN.1)
}

fn example_end_to_end() -> Outcome {
    match verify_example() {
        Ok(stages) => Outcome {
            pass: stages.iter().all(|s| s.pass),
            detail: stages
                .iter()
                .map(|s| format!("{}={:.1e}", s.name, s.value))
                .collect::<Vec<_>>()
                .join(" "),
        },
        Err(e) => Outcome { pass: false, detail: e },
    }
}

fn midpoint_lagrange() -> Outcome {
    let mut rng = SplitMix64::new(0x1A6);
    let range = (-2.0, 2.0);
    let half = MeanSpec::symmetric();
    let mut quad_worst: f64 = 0.0;
    let mut cubic_weakest = f64::INFINITY;
    for _ in 0..100 {
        let q = random_polynomial(&mut rng, 2, range, 0.1).unwrap();
        let r = sweep(Equation::Lagrange(&q), half, domain(), SWEEP_N).unwrap();
        quad_worst = quad_worst.max(if r.domain_errors > 0 { f64::INFINITY } else { r.normalized_max() });
        let c = random_polynomial(&mut rng, 3, range, 0.1).unwrap();
        let r = sweep(Equation::Lagrange(&c), half, domain(), SWEEP_N).unwrap();
        cubic_weakest = cubic_weakest.min(r.normalized_max());
    }
    let mut linear_worst: f64 = 0.0;
    let mut quad_fail_weakest = f64::INFINITY;
    let mut quad_fail_all = true;
    for alpha in [0.2, 0.35, 0.7] {
        let m = MeanSpec::new(alpha).unwrap();
        for _ in 0..100 {
            let l = random_polynomial(&mut rng, 1, range, 0.1).unwrap();
            let r = sweep(Equation::Lagrange(&l), m, domain(), SWEEP_N).unwrap();
            linear_worst = linear_worst.max(r.max_rel);
            let q = random_polynomial(&mut rng, 2, range, 0.1).unwrap();
            let r = sweep(Equation::Lagrange(&q), m, domain(), SWEEP_N).unwrap();
            quad_fail_all &= !r.passes(TAU);
            quad_fail_weakest = quad_fail_weakest.min(r.normalized_max());
        }
    }
    Outcome {
        pass: quad_worst <= LAGRANGE_PASS
            && cubic_weakest > LAGRANGE_CUBIC_FAIL
            && linear_worst <= TAU
            && quad_fail_all,
        detail: format!(
            "quadratic max {quad_worst:.1e}, cubic min {cubic_weakest:.2e}, linear(asym) max {linear_worst:.1e}, quadratic(asym) min {quad_fail_weakest:.2e}"
        ),
    }
}

fn classification_round_trip() -> Outcome {
    let cfg = SuiteConfig { count: 200, ..SuiteConfig::default() };
    match run_suite(&cfg) {
        Ok(r) => Outcome {
            pass: r.diagonal_fraction >= ROUND_TRIP_DIAGONAL
                && r.max_mu_relative_error <= ROUND_TRIP_MU
                && r.max_coeff_error <= ROUND_TRIP_MU
                && r.errors == 0,
            detail: format!(
                "diagonal {:.4} of {}, confusion {:?}, mu rel err {:.1e}, coeff err {:.1e}",
                r.diagonal_fraction,
                r.confusion.total(),
                r.confusion.counts,
                r.max_mu_relative_error,
                r.max_coeff_error
            ),
        },
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

fn asymmetric_cases() -> Outcome {
    let alphas = [0.25, 0.4, 0.6];
    let mut dep_worst: f64 = 0.0;
    let mut fam_weakest = f64::INFINITY;
    for i in 0..100u64 {
        let dep = generate_pair(&GeneratorSpec::new(GenFamily::A, 0xA5_0000 + i), domain()).unwrap();
        let fam = [GenFamily::B, GenFamily::C, GenFamily::D][(i % 3) as usize];
        let ind = generate_pair(&GeneratorSpec::new(fam, 0xA6_0000 + i), domain()).unwrap();
        for alpha in alphas {
            let m = MeanSpec::new(alpha).unwrap();
            let r = sweep(Equation::Cauchy(&dep.f, &dep.g), m, domain(), SWEEP_N).unwrap();
            dep_worst = dep_worst.max(if r.passes(TAU) { r.max_rel } else { f64::INFINITY });
            let r = sweep(Equation::Cauchy(&ind.f, &ind.g), m, domain(), SWEEP_N).unwrap();
            fam_weakest = fam_weakest.min(r.normalized_max());
        }
    }
    Outcome {
        pass: dep_worst <= TAU && fam_weakest > ASYM_FAIL,
        detail: format!("dependent max rel {dep_worst:.1e}, family min max_abs/scale {fam_weakest:.2e}"),
    }
}

/// `g` sources with their nonvanishing intervals. The first ten belong to
/// the families; for the rest `g''/g` is strictly monotone on the interval.
const IFF_CASES: [(&str, f64, f64); 20] = [
    ("exp(0.7*x)", -1.0, 2.0),
    ("cosh(x)", -2.0, 2.0),
    ("cos(x)", -1.2, 1.2),
    ("x + 2", -1.0, 1.0),
    ("3", -1.0, 1.0),
    ("sinh(x)", 0.2, 3.0),
    ("exp(-1.3*x)", -1.0, 1.0),
    ("cos(2*x)", -0.6, 0.6),
    ("2*cosh(0.5*x)", -3.0, 3.0),
    ("sin(x)", 0.3, 2.8),
    ("1 + x^2", 0.2, 1.5),
    ("x^3 + 3", -1.0, 1.0),
    ("exp(x^2)", 0.3, 1.5),
    ("2 + sin(x)", -1.2, 1.2),
    ("exp(x^3)", -0.4, 1.0),
    ("sqrt(x + 1)", 0.0, 2.0),
    ("1/(x + 2)", -1.0, 1.0),
    ("x^2 + x + 1", 0.0, 1.5),
    ("log(x + 2)", 0.0, 2.0),
    ("exp(sin(x))", -0.4, 1.0),
];

fn integral_criterion_equivalence() -> Outcome {
    let spec = QuadratureSpec::default();
    let mut rng = SplitMix64::new(0x51);
    let mut discordant = 0;
    let mut both_zero = 0;
    let mut both_nonzero = 0;
    let mut closest = f64::INFINITY;
    let mut errors = Vec::new();
    for (src, lo, hi) in IFF_CASES {
        let g = SmoothFn::parse(src, "g").unwrap();
        let iv = Interval::closed(lo, hi);
        let x0 = iv.midpoint();
        let k = [-1.0, 1.0][rng.below(2) as usize] * rng.uniform(0.5, 2.0);
        let params = ConstructionParams { a: rng.uniform(-1.0, 1.0), k, x0 };
        let f = match construct_f(&g, params, iv, spec) {
            Ok(f) => f,
            Err(e) => {
                errors.push(format!("{src}: {e}"));
                continue;
            }
        };
        let cond = IntegralCondition::from_primitive(&g, f.primitive().unwrap().clone(), spec);
        for _ in 0..10 {
            let h_max = 0.5 * iv.width();
            let h = rng.uniform(IFF_H_FLOOR, h_max);
            let x = rng.uniform(lo + h, hi - h);
            let icr = cond.residual(x, h);
            let cr = cauchy_residual_by_quadrature(
                |t| f.eval(t),
                |t| g.value(t).map_err(MvtError::from),
                x,
                h,
                &spec,
            );
            match (icr, cr) {
                (Ok(a), Ok(b)) => {
                    let (za, zb) = (a.relative() <= IFF_THRESHOLD, b.relative() <= IFF_THRESHOLD);
                    match (za, zb) {
                        (true, true) => both_zero += 1,
                        (false, false) => both_nonzero += 1,
                        _ => discordant += 1,
                    }
                    for v in [a.relative(), b.relative()] {
                        closest = closest.min((v.max(1e-300) / IFF_THRESHOLD).log10().abs());
                    }
                }
                (Err(e), _) | (_, Err(e)) => errors.push(format!("{src} at ({x}, {h}): {e}")),
            }
        }
    }
    Outcome {
        pass: discordant == 0 && errors.is_empty() && both_zero + both_nonzero == 200,
        detail: format!(
            "{both_zero} both zero, {both_nonzero} both nonzero, {discordant} discordant, nearest {closest:.1} decades from threshold{}",
            errors.first().map(|e| format!(", error: {e}")).unwrap_or_default()
        ),
    }
}

fn weight(rng: &mut SplitMix64) -> SmoothFn {
    let k = rng.uniform(0.2, 2.0);
    let c = rng.uniform(1.5, 3.0);
    SmoothFn::new(Expr::Const(c) + (Expr::Const(k) * Expr::x()).cos(), "w")
}

fn sahoo_riedel() -> Outcome {
    let mut rng = SplitMix64::new(0x5A);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for case in CaseTag::ALL {
        for _ in 0..50 {
            let mut c = [0.0; 6];
            for v in c.iter_mut() {
                *v = rng.uniform(-2.0, 2.0);
            }
            let mu = rng.uniform(0.3, 3.0);
            let q = if case == CaseTag::A {
                let base = generate_pair(&GeneratorSpec::new(GenFamily::B, rng.next_u64()), domain()).unwrap().g;
                QuadrupleCase::new(case, 0.0, c).unwrap().with_base(base)
            } else {
                QuadrupleCase::new(case, mu, c).unwrap()
            };
            let (phi, psi) = q.compatible_weights(&weight(&mut rng));
            let rep = sr_case_check_with(&q, &phi, &psi, domain(), 40, SR_PASS);
            match rep.equation {
                Some(e) if rep.side_condition_holds && e.domain_errors == 0 => {
                    worst = worst.max(e.normalized_max());
                    if e.max_abs > SR_PASS * e.scale {
                        failures += 1;
                    }
                }
                _ => failures += 1,
            }
        }
    }
    let mut reduction: f64 = 0.0;
    for i in 0..1000u64 {
        let fam = GenFamily::ALL[(i % 4) as usize];
        let p = generate_pair(&GeneratorSpec::new(fam, 0x5B_0000 + i), domain()).unwrap();
        let (big_f, big_g) = if i % 2 == 0 {
            (p.f, p.g)
        } else {
            (SmoothFn::new(random_expr(&mut rng, 3), "F"), SmoothFn::new(random_expr(&mut rng, 3), "G"))
        };
        let phi = SmoothFn::new(big_g.d1().clone(), "g");
        let psi = SmoothFn::new(big_f.d1().clone(), "f");
        let (x, y) = (rng.uniform(DOMAIN.0, DOMAIN.1), rng.uniform(DOMAIN.0, DOMAIN.1));
        let a = sr_residual(&big_f, &big_g, &phi, &psi, x, y).unwrap();
        let b = cauchy_residual(&big_f, &big_g, MeanSpec::symmetric(), y, x).unwrap();
        reduction = reduction.max((a.value - b.value).abs() / a.scale.max(b.scale));
    }
    Outcome {
        pass: failures == 0 && reduction <= SR_REDUCTION,
        detail: format!("200 quadruples, {failures} failing, worst {worst:.1e}; reduction gap {reduction:.1e}"),
    }
}

fn numerical_substrate() -> Outcome {
    let mut rng = SplitMix64::new(0x7);
    let mut deriv_worst: f64 = 0.0;
    let mut exprs = 0;
    while exprs < 50 {
        let src = random_expr(&mut rng, 3).to_string();
        let f = SmoothFn::parse(&src, "f").unwrap();
        let x = rng.uniform(-1.0, 1.0);
        if (0..4).any(|k| f.eval_layer(k, x).is_err()) {
            continue;
        }
        exprs += 1;
        for order in 1..=3u8 {
            let (fd, _) = [0.1, 0.05, 0.02, 0.01]
                .map(|h| ridders(|t| f.d0().eval(t), x, order, h))
                .into_iter()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let sym = f.eval_layer(order as usize, x).unwrap();
            deriv_worst = deriv_worst.max(rel_diff(sym, fd));
        }
    }
    let spec = QuadratureSpec::default();
    let mut quad_worst: f64 = 0.0;
    for _ in 0..100 {
        let f = random_expr(&mut rng, 3);
        let mut p = [rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)];
        p.sort_by(f64::total_cmp);
        let i = |a, b| integrate(|t| f.eval(t), a, b, &spec).unwrap();
        quad_worst = quad_worst.max((i(p[0], p[2]) - (i(p[0], p[1]) + i(p[1], p[2]))).abs());
    }
    let sin_pi = SmoothFn::parse("sin(pi*x)", "s").unwrap();
    let z = zero_set(|x| sin_pi.value(x), Interval::closed(-2.5, 2.5), 1000);
    let gaps = z.gaps();
    let zero_worst = if gaps.len() == 5 {
        gaps.iter()
            .zip(-2..=2)
            .map(|(&(lo, hi), k)| (lo - k as f64).abs().max((hi - k as f64).abs()))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Outcome {
        pass: deriv_worst <= DERIV_REL && quad_worst <= QUAD_ADDITIVITY && zero_worst <= ZERO_POS,
        detail: format!(
            "derivative rel {deriv_worst:.1e}, additivity {quad_worst:.1e}, zeros {} within {zero_worst:.1e}",
            gaps.len()
        ),
    }
}

fn threshold_separation() -> Outcome {
    let half = MeanSpec::symmetric();
    let mut clean_worst: f64 = 0.0;
    let mut dirty_weakest = f64::INFINITY;
    for i in 0..60u64 {
        let fam = [GenFamily::B, GenFamily::C, GenFamily::D][(i % 3) as usize];
        let p = generate_pair(&GeneratorSpec::new(fam, 0x8E_0000 + i), domain()).unwrap();
        let r = sweep(Equation::Cauchy(&p.f, &p.g), half, domain(), SWEEP_N).unwrap();
        clean_worst = clean_worst.max(if r.passes(TAU) { r.normalized_max() } else { f64::INFINITY });
        for mode in [PerturbMode::AddCubic, PerturbMode::AddSine] {
            let f = perturb(&p.f, SEPARATION_EPS, mode);
            let r = sweep(Equation::Cauchy(&f, &p.g), half, domain(), SWEEP_N).unwrap();
            dirty_weakest = dirty_weakest.min(r.normalized_max());
        }
    }
    let floor = SEPARATION_FACTOR * TAU;
    Outcome {
        pass: clean_worst <= TAU && dirty_weakest > floor,
        detail: format!(
            "unperturbed max {clean_worst:.1e}, perturbed min {dirty_weakest:.2e} (floor {floor:.0e})"
        ),
    }
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 8] = [
        ("1 worked example end to end", EXAMPLE_BUDGET_S, example_end_to_end),
        ("2 midpoint and asymmetric Lagrange", LAGRANGE_BUDGET_S, midpoint_lagrange),
        ("3 classification round trip", ROUND_TRIP_BUDGET_S, classification_round_trip),
        ("4 asymmetric Cauchy", ASYM_BUDGET_S, asymmetric_cases),
        ("5 integral criterion equivalence", IFF_BUDGET_S, integral_criterion_equivalence),
        ("6 four-function equation", SR_BUDGET_S, sahoo_riedel),
        ("7 numerical substrate", SUBSTRATE_BUDGET_S, numerical_substrate),
        ("8 threshold separation", SEPARATION_BUDGET_S, threshold_separation),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let out = check();
        let secs = start.elapsed().as_secs_f64();
        let ok = out.pass && secs < budget;
        failed += usize::from(!ok);
        println!(
            "{} criterion {name}: {} [{secs:.2}s / {budget}s]",
            if ok { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
