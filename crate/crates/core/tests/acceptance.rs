//! Acceptance suite. Runs every criterion at its pinned tolerance and prints
//! one PASS/FAIL line per criterion; exits nonzero if any fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jessen_core::expconv::{build_gram, check_order_psd, exp_convexity_probe, lambda_map, midpoint_equivalence_check};
use jessen_core::functions::{log_series, second_derivative_check};
use jessen_core::jessen::{verify_adjoint_pairing, verify_jessen, DualVector, JessenOptions};
use jessen_core::scenes::{run_rotation_example, run_shift_example, RotationScene, ShiftScene};
use jessen_core::semigroup::{evolve, inf_norm, Generator};
use jessen_core::{
    sample, Error, ExponentSet, FamilyKind, LatticeElement, LogSeriesConfig, OperatorFamily, OrderVerdict,
    ParamInterval, ProbeMode,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn jessen_families() -> Vec<OperatorFamily> {
    vec![
        OperatorFamily::PowerF { t: -1.0 },
        OperatorFamily::PowerF { t: 0.5 },
        OperatorFamily::PowerF { t: 2.0 },
        OperatorFamily::PowerF { t: 3.0 },
        OperatorFamily::NegLog,
        OperatorFamily::Entropy,
        OperatorFamily::ExpH { t: 1.0 },
        OperatorFamily::ExpH { t: -1.0 },
        OperatorFamily::HalfSquare,
    ]
}

fn domain_element(rng: &mut ChaCha8Rng, fam: &OperatorFamily, n: usize) -> LatticeElement {
    if fam.requires_positive() {
        sample::element(rng, n, 0.1, 5.0)
    } else {
        sample::element(rng, n, -2.0, 2.0)
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let fams = jessen_families();
    let times = [0.1, 1.0, 10.0];
    let opts = JessenOptions::default();
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for case in 0..1000 {
        let gen = sample::conservative_generator(&mut rng, 8, 5.0);
        let fam = &fams[case % fams.len()];
        let t = times[(case / fams.len()) % times.len()];
        let f = domain_element(&mut rng, fam, gen.dim());
        let rep = verify_jessen(&gen, fam, &f, t, &opts).expect("jessen case");
        let bound = -1e-9 * (1.0 + rep.residual.norm());
        worst = worst.min(rep.min_slack - bound);
        if rep.min_slack < bound {
            failures += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 30.0,
        format!("1000 cases, {failures} below -1e-9(1+|res|), worst margin {worst:.3e}, {secs:.2}s (< 30s)"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let sq = OperatorFamily::PowerF { t: 2.0 };
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..100 {
        let gen = sample::non_conservative_generator(&mut rng, 8, 5.0);
        let f = sample::element(&mut rng, gen.dim(), 0.1, 5.0);
        let rep = verify_jessen(&gen, &sq, &f, 1.0, &JessenOptions::unchecked()).expect("override run");
        worst = worst.min(rep.min_slack);
        if rep.min_slack < -1e-6 {
            violations += 1;
        }
    }
    let guarded = {
        let gen = sample::non_conservative_generator(&mut rng, 4, 5.0);
        let f = LatticeElement::unit(gen.dim());
        matches!(
            verify_jessen(&gen, &sq, &f, 1.0, &JessenOptions::default()),
            Err(Error::NotNormalized { .. })
        )
    };
    outcome(
        violations >= 1 && guarded,
        format!("{violations}/100 non-conservative generators violate (min slack {worst:.3e} < -1e-6); guard raises NotNormalized: {guarded}"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let fams = jessen_families();
    let opts = JessenOptions::default();
    let (mut max_transpose, mut min_gap, mut max_consistency) = (0.0f64, f64::INFINITY, 0.0f64);
    for case in 0..1000 {
        let gen = sample::conservative_generator(&mut rng, 8, 5.0);
        let fam = &fams[case % fams.len()];
        let t = [0.1, 1.0, 10.0][case % 3];
        let f = domain_element(&mut rng, fam, gen.dim());
        let fstar = DualVector::new(sample::element(&mut rng, gen.dim(), 0.0, 1.0));
        let rep = verify_adjoint_pairing(&gen, fam, &fstar, &f, t, &opts).expect("adjoint case");
        max_transpose = max_transpose.max(rep.transpose_defect);
        min_gap = min_gap.min(rep.weak_gap);
        max_consistency = max_consistency.max((rep.weak_gap - rep.residual_pairing).abs());
    }
    outcome(
        max_transpose <= 1e-12 && min_gap >= -1e-9 && max_consistency <= 1e-10,
        format!(
            "1000 triples: transpose defect {max_transpose:.2e} (<= 1e-12), min weak gap {min_gap:.3e} (>= -1e-9), |gap - <f*,res>| {max_consistency:.2e} (<= 1e-10)"
        ),
    )
}

/// Exponents for the exponential family: multiples of 1/8 in [-2, 2], so
/// midpoints are exact and either 0 or at least 1/16 away from it.
fn h_exponents(rng: &mut ChaCha8Rng, n: usize, with_zero: bool) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n)
        .map(|_| loop {
            let k = rng.random_range(-16i32..=16);
            if k != 0 {
                break f64::from(k) / 8.0;
            }
        })
        .collect();
    if with_zero && n >= 2 {
        p[1] = -p[0];
    }
    p
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let tol = 1e-8;
    let mut worst_spectral = f64::INFINITY;
    let mut worst_sampled = f64::INFINITY;
    let mut failures = [0usize; 2];
    let mut zero_branch_hits = 0;
    for (kind_idx, kind) in [FamilyKind::F, FamilyKind::H].into_iter().enumerate() {
        for case in 0..500 {
            let gen = sample::conservative_generator(&mut rng, 6, 5.0);
            let t = if case % 2 == 0 { 0.5 } else { 2.0 };
            let size = rng.random_range(1..=6);
            let (f, p) = match kind {
                FamilyKind::F => (
                    sample::element(&mut rng, gen.dim(), 0.5, 3.0),
                    (0..size).map(|_| rng.random_range(1.5..=5.0)).collect::<Vec<f64>>(),
                ),
                FamilyKind::H => {
                    let mut p = h_exponents(&mut rng, size, case % 2 == 0);
                    if case % 5 == 0 {
                        p[0] = 0.0;
                    }
                    (sample::element(&mut rng, gen.dim(), -1.0, 1.5), p)
                }
            };
            let set = ExponentSet::new(p, kind).expect("exponent set");
            if kind == FamilyKind::H && (0..set.len()).any(|i| (0..set.len()).any(|j| set.midpoint(i, j) == 0.0)) {
                zero_branch_hits += 1;
            }
            let gram = build_gram(&gen, &f, t, &set).expect("gram");
            let rep = check_order_psd(&gram, 1000, case as u64, tol).expect("psd");
            worst_spectral = worst_spectral.min(rep.min_eigenvalue / rep.spectral_tol);
            worst_sampled = worst_sampled.min(rep.worst_sampled);
            if !rep.passed() {
                failures[kind_idx] += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == [0, 0] && secs < 60.0 && zero_branch_hits > 0,
        format!(
            "F-family failures {}/500, H-family failures {}/500 (H_0 branch in {zero_branch_hits} Grams); min eig / tol {worst_spectral:.3e} (>= -1), worst sampled form {worst_sampled:.3e} (>= -1e-8), {secs:.2}s (< 60s)",
            failures[0], failures[1]
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    let mut worst = 0.0f64;
    let mut remark_ok = true;
    let tol = jessen_core::OrderTolerance::default();
    for _ in 0..100 {
        let gen = sample::conservative_generator(&mut rng, 6, 5.0);
        let f = sample::element(&mut rng, gen.dim(), 0.5, 3.0);
        let t = rng.random_range(0.1..3.0);
        let h = lambda_map(&gen, &f, FamilyKind::F, t).expect("lambda map");
        let n = rng.random_range(1..=5);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(1.5..=2.5)).collect();
        let xi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let rep = midpoint_equivalence_check(&h, &xs, &xi, &ParamInterval::REAL, 1e-12).expect("equivalence");
        for c in &rep.checks {
            worst = worst.max(c.defect);
        }

        // n = 1, sum arrangement: xi^2 H(2x)
        let one =
            exp_convexity_probe(&h, &xs[..1], &xi[..1], ProbeMode::Sum, &ParamInterval::REAL, &tol).expect("n=1 probe");
        let direct = h(xs[0] + xs[0]).unwrap().scale(xi[0] * xi[0]).unwrap();
        remark_ok &= one.form == direct && one.nonnegative();

        // n = 2, xi = (-1, 1), midpoint arrangement: H(x1) - 2 H(m) + H(x2)
        let (x1, x2) = (rng.random_range(1.5..=2.5), rng.random_range(1.5..=2.5));
        let two = exp_convexity_probe(
            &h,
            &[x1, x2],
            &[-1.0, 1.0],
            ProbeMode::Midpoint,
            &ParamInterval::REAL,
            &tol,
        )
        .expect("n=2 probe");
        let (h1, hm, h2) = (h(x1).unwrap(), h(0.5 * (x1 + x2)).unwrap(), h(x2).unwrap());
        let rearranged = h1.sub(&hm).unwrap().sub(&hm).unwrap().add(&h2).unwrap();
        let midpoint_convex = hm
            .partial_leq(&h1.add(&h2).unwrap().scale(0.5).unwrap(), &tol)
            .unwrap()
            .is_leq();
        remark_ok &= two.form == rearranged && two.nonnegative() && midpoint_convex;
    }
    outcome(
        worst <= 1e-12 && remark_ok,
        format!(
            "100 instances: substitution defect {worst:.2e} (<= 1e-12); n=1 and n=2 specializations exact: {remark_ok}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    let cfg = LogSeriesConfig::default();
    let mut worst = 0.0f64;
    let mut radius_errors = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=8);
        let f = sample::element(&mut rng, n, 0.1, 1.9);
        let l = log_series(&f, &cfg).expect("inside radius");
        for (a, x) in l.values().iter().zip(f.values()) {
            worst = worst.max((a - x.ln()).abs());
        }

        let mut outside = f.clone().into_values();
        let i = rng.random_range(0..n);
        let r = rng.random_range(0.9 + 1e-9..0.999);
        outside[i] = if rng.random_bool(0.5) { 1.0 - r } else { 1.0 + r };
        let outside = LatticeElement::new(outside).unwrap();
        if matches!(log_series(&outside, &cfg), Err(Error::RadiusViolation { .. })) {
            radius_errors += 1;
        }
    }
    outcome(
        worst <= 1e-10 && radius_errors == 1000,
        format!("max |log_series - ln| = {worst:.2e} (<= 1e-10); RadiusViolation on {radius_errors}/1000 inputs with |e-f| > 0.9"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let mut fams = jessen_families();
    fams.push(OperatorFamily::PowerF { t: 2.5 });
    fams.push(OperatorFamily::ExpH { t: 2.0 });
    let (step, half) = (1e-2, 5e-3);
    let mut lines = Vec::new();
    let mut pass = true;
    for fam in &fams {
        // F'''' vanishes for polynomials of degree <= 3: the second difference
        // is exact and only roundoff remains
        let polynomial = matches!(
            fam,
            OperatorFamily::PowerF { t } if *t == 2.0 || *t == 3.0
        ) || matches!(fam, OperatorFamily::HalfSquare);
        let (mut lo, mut hi, mut worst_exact) = (f64::INFINITY, 0.0f64, 0.0f64);
        for _ in 0..20 {
            let n = rng.random_range(1..=4);
            let f = sample::element(&mut rng, n, 0.5, 3.0);
            let dir = sample::element(&mut rng, n, 0.5, 1.0);
            let d1 = second_derivative_check(fam, &f, &dir, step).unwrap();
            let d2 = second_derivative_check(fam, &f, &dir, half).unwrap();
            if polynomial {
                let scale = 1.0 + fam.apply(&f).unwrap().norm();
                worst_exact = worst_exact.max(d1.max(d2) / scale);
            } else {
                let ratio = d1 / d2;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
        if polynomial {
            pass &= worst_exact <= 1e-8;
            lines.push(format!("{}: exact (defect/(1+|F|) {worst_exact:.1e})", fam.name()));
        } else {
            pass &= lo >= 3.0 && hi <= 5.0;
            lines.push(format!("{}: ratio [{lo:.3}, {hi:.3}]", fam.name()));
        }
    }
    outcome(pass, lines.join("; "))
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        let out = run_shift_example(&ShiftScene::with_t(t)).expect("shift scene");
        let closed_rhs = (-4.0 * t * t).exp();
        let ok = out.verdict == OrderVerdict::Incomparable
            && (out.argmax_lhs - t).abs() < 1e-9
            && (out.argmax_rhs + t).abs() < 1e-9
            && (out.lhs_at_t - 1.0).abs() <= 1e-12
            && (out.rhs_at_t - closed_rhs).abs() <= 1e-12;
        pass &= ok;
        lines.push(format!(
            "t={t}: {} argmax lhs {:+.3} rhs {:+.3}, lhs(t)={:.3} rhs(t)={:.6e}",
            out.verdict, out.argmax_lhs, out.argmax_rhs, out.lhs_at_t, out.rhs_at_t
        ));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_9() -> Outcome {
    let n = 360;
    let mut pass = true;
    let mut worst_formula = 0.0f64;
    let mut lines = Vec::new();
    for k in [0, 360, 720] {
        let out = run_rotation_example(&RotationScene { n, k }).expect("rotation scene");
        pass &= out.verdict == OrderVerdict::Equal && out.max_gap == 0.0;
        worst_formula = worst_formula.max(out.formula_defect);
        lines.push(format!("k={k}: {} (max gap {:.1e})", out.verdict, out.max_gap));
    }
    let quarter = run_rotation_example(&RotationScene { n, k: 90 }).expect("rotation scene");
    pass &= quarter.verdict == OrderVerdict::Incomparable;
    worst_formula = worst_formula.max(quarter.formula_defect);
    lines.push(format!("k=90: {}", quarter.verdict));

    // full sweep: the sides coincide exactly where sin(2 pi k / n) = 0
    let mut other_equal = Vec::new();
    for k in 1..n {
        let out = run_rotation_example(&RotationScene { n, k }).expect("rotation scene");
        worst_formula = worst_formula.max(out.formula_defect);
        if out.verdict == OrderVerdict::Equal {
            other_equal.push(k);
        } else {
            pass &= out.verdict == OrderVerdict::Incomparable;
        }
    }
    pass &= worst_formula <= 1e-12;
    lines.push(format!("cos-formula defect {worst_formula:.1e} (<= 1e-12)"));
    lines.push(format!("0<k<360 with EQUAL verdict: {other_equal:?} (t = pi)"));
    outcome(pass, lines.join("; "))
}

fn criterion_10() -> Outcome {
    let gen = Generator::from_rows(&[&[-1.0, 1.0], &[1.0, -1.0]]).unwrap();
    let mut oracle_defect = 0.0f64;
    for t in [0.0, 0.05, 0.5, 1.0, 3.0, 10.0, 50.0] {
        let z = evolve(&gen, t).unwrap();
        let (a, b) = ((1.0 + (-2.0 * t).exp()) / 2.0, (1.0 - (-2.0 * t).exp()) / 2.0);
        let m = z.matrix();
        oracle_defect = oracle_defect
            .max((m[(0, 0)] - a).abs())
            .max((m[(0, 1)] - b).abs())
            .max((m[(1, 0)] - b).abs())
            .max((m[(1, 1)] - a).abs());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xCA);
    let mut law_defect = 0.0f64;
    let mut nonnegative = true;
    for _ in 0..1000 {
        let gen = sample::conservative_generator(&mut rng, 8, 10.0);
        let s = rng.random_range(0.0..=5.0);
        let t = rng.random_range(0.0..=5.0);
        let (zs, zt, zst) = (
            evolve(&gen, s).unwrap(),
            evolve(&gen, t).unwrap(),
            evolve(&gen, s + t).unwrap(),
        );
        law_defect = law_defect.max(inf_norm(&(zs.matrix() * zt.matrix() - zst.matrix())));
        nonnegative &= zs.is_entrywise_nonnegative() && zt.is_entrywise_nonnegative() && zst.is_entrywise_nonnegative();
    }
    outcome(
        oracle_defect <= 1e-12 && law_defect <= 1e-10 && nonnegative,
        format!("eigen-oracle defect {oracle_defect:.2e} (<= 1e-12); semigroup law {law_defect:.2e} (<= 1e-10) over 1000; entrywise nonnegative: {nonnegative}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("C1  Jessen suite", criterion_1),
        ("C2  normalization negative control", criterion_2),
        ("C3  adjoint pairing suite", criterion_3),
        ("C4  exponential convexity Gram PSD", criterion_4),
        ("C5  sum/midpoint equivalence", criterion_5),
        ("C6  log series", criterion_6),
        ("C7  second-derivative certification", criterion_7),
        ("C8  shift scene (figure 1a)", criterion_8),
        ("C9  rotation scene (figure 1b)", criterion_9),
        ("C10 semigroup infrastructure", criterion_10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!("[{}] {name}: {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
