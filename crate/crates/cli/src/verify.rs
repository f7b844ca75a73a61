//! `jessen verify`: lattice, semigroup, Jessen, adjoint and Gram suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use jessen_core::expconv::{build_gram_coupled, PsdReport};
use jessen_core::jessen::AdjointReport;
use jessen_core::semigroup::{check_positivity_and_normalization, check_semigroup_axioms};
use jessen_core::{
    build_gram, check_order_psd, sample, verify_adjoint_pairing, verify_jessen, Check, DualVector, ExponentSet,
    FamilyKind, JessenOptions, JessenReport, LatticeElement, OperatorFamily, OrderVerdict,
};

use crate::config::{NamedGenerator, Suite, Tolerances};
use crate::failure::Failure;

/// Semigroup-law and identity tolerance.
const SEMIGROUP_TOL: f64 = 1e-10;
/// Diagonal-versus-residual agreement, relative to the Gram magnitude.
const DIAGONAL_TOL: f64 = 1e-12;

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub passed: bool,
    pub generators: Vec<GeneratorSummary>,
    pub asserted: Asserted,
    pub observed: Observed,
}

#[derive(Debug, Serialize)]
pub struct GeneratorSummary {
    pub name: String,
    pub dim: usize,
    pub conservative: bool,
    pub override_normalization: bool,
    /// Conservative generators feed the asserted suites; the rest run as
    /// negative controls.
    pub asserted: bool,
}

/// Conclusions of the verified statements; any failure here fails the run.
#[derive(Debug, Default, Serialize)]
pub struct Asserted {
    pub lattice: Vec<Check>,
    pub semigroup: Vec<Check>,
    pub jessen: JessenSuite,
    pub adjoint: AdjointSuite,
    pub gram: Vec<GramCase>,
}

/// Diagnostics that never affect the exit status.
#[derive(Debug, Default, Serialize)]
pub struct Observed {
    pub negative_controls: Vec<NegativeControl>,
    pub coupled_gram: Vec<CoupledGram>,
}

#[derive(Debug, Default, Serialize)]
pub struct JessenSuite {
    pub passed: bool,
    pub min_slack: Option<f64>,
    pub cases: Vec<JessenCase>,
}

#[derive(Debug, Serialize)]
pub struct JessenCase {
    pub f: LatticeElement,
    pub pass: bool,
    pub report: JessenReport,
}

#[derive(Debug, Default, Serialize)]
pub struct AdjointSuite {
    pub passed: bool,
    pub min_weak_gap: Option<f64>,
    pub cases: Vec<AdjointCase>,
}

#[derive(Debug, Serialize)]
pub struct AdjointCase {
    pub generator: String,
    pub family: String,
    pub t: f64,
    pub f: LatticeElement,
    pub fstar: LatticeElement,
    pub pass: bool,
    pub report: AdjointReport,
}

#[derive(Debug, Serialize)]
pub struct GramCase {
    pub generator: String,
    pub kind: FamilyKind,
    pub p: Vec<f64>,
    pub t: f64,
    pub f: LatticeElement,
    pub pass: bool,
    pub min_eigenvalues: Vec<f64>,
    /// Largest gap between a diagonal entry and the Jessen residual of the
    /// matching family member.
    pub diagonal_defect: f64,
    pub psd: PsdReport,
}

#[derive(Debug, Serialize)]
pub struct NegativeControl {
    pub generator: String,
    pub family: String,
    pub t: f64,
    pub f: LatticeElement,
    pub min_slack: f64,
    pub verdict: OrderVerdict,
    pub violated: bool,
}

#[derive(Debug, Serialize)]
pub struct CoupledGram {
    pub generator: String,
    pub kind: FamilyKind,
    pub p: Vec<f64>,
    pub f: LatticeElement,
    pub min_eigenvalue: Option<f64>,
    pub psd_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Fixed test vectors followed by `samples` random ones in the domain.
fn test_vectors(
    g: &NamedGenerator,
    rng: &mut ChaCha8Rng,
    samples: usize,
    positive: bool,
    range: (f64, f64),
) -> Vec<LatticeElement> {
    let mut out: Vec<LatticeElement> = g
        .test_vectors
        .iter()
        .filter(|v| !positive || v.is_strictly_positive())
        .cloned()
        .collect();
    let (lo, hi) = if positive { (range.0.max(0.1), range.1) } else { range };
    out.extend((0..samples).map(|_| sample::element(rng, g.gen.dim(), lo, hi)));
    out
}

fn family_vectors(
    g: &NamedGenerator,
    rng: &mut ChaCha8Rng,
    samples: usize,
    fam: &OperatorFamily,
) -> Vec<LatticeElement> {
    if fam.requires_positive() {
        test_vectors(g, rng, samples, true, (0.1, 5.0))
    } else {
        test_vectors(g, rng, samples, false, (-2.0, 2.0))
    }
}

fn core_err(context: impl AsRef<str>) -> impl FnOnce(jessen_core::Error) -> Failure {
    move |e| Failure::from_core(e, context.as_ref())
}

fn lattice_suite(g: &NamedGenerator, rng: &mut ChaCha8Rng, samples: usize) -> Result<Vec<Check>, Failure> {
    let n = g.gen.dim();
    let ctx = format!("lattice suite for '{}'", g.name);
    let (mut bracket, mut decomposition, mut norm, mut cone) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let f = sample::element(rng, n, -2.0, 2.0);
        let h = sample::element(rng, n, -2.0, 2.0);
        let (meet, join) = (f.meet(&h).map_err(core_err(&ctx))?, f.join(&h).map_err(core_err(&ctx))?);
        for k in 0..n {
            bracket = bracket
                .max(meet.get(k) - f.get(k).min(h.get(k)))
                .max(f.get(k).max(h.get(k)) - join.get(k))
                .max(meet.get(k) - join.get(k));
        }
        let (pos, neg) = (f.pos_part(), f.neg_part());
        let recomposed = pos.sub(&neg).map_err(core_err(&ctx))?;
        let modulus = pos.add(&neg).map_err(core_err(&ctx))?;
        decomposition = decomposition
            .max(recomposed.sub(&f).map_err(core_err(&ctx))?.norm())
            .max(modulus.sub(&f.abs_val()).map_err(core_err(&ctx))?.norm());
        let product = f.multiply(&h).map_err(core_err(&ctx))?;
        norm = norm
            .max(product.norm() - f.norm() * h.norm())
            .max((f.abs_val().norm() - f.norm()).abs())
            .max((LatticeElement::unit(n).norm() - 1.0).abs());
        cone = cone.max(-pos.multiply(&h.pos_part()).map_err(core_err(&ctx))?.min_entry());
    }
    let label = |what: &str| format!("lattice[{}].{what}", g.name);
    Ok(vec![
        Check::within(label("meet_join_bracket"), bracket.max(0.0), 0.0),
        Check::within(label("positive_negative_decomposition"), decomposition, 0.0),
        Check::within(label("norm_compatibility"), norm.max(0.0), 1e-15),
        Check::within(label("positive_cone_product"), cone.max(0.0), 0.0),
    ])
}

fn semigroup_suite(suite: &Suite, g: &NamedGenerator, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, Failure> {
    let tol = suite.order_tolerance();
    let mut checks = Vec::new();
    for &t in &suite.t_grid {
        let ctx = format!("semigroup suite for '{}' at t = {t}", g.name);
        let f = sample::element(rng, g.gen.dim(), -2.0, 2.0);
        let axioms = check_semigroup_axioms(&g.gen, 0.5 * t, t, &f, SEMIGROUP_TOL).map_err(core_err(&ctx))?;
        let positivity = check_positivity_and_normalization(&g.gen, t, &f, &tol).map_err(core_err(&ctx))?;
        for mut c in axioms.checks.into_iter().chain(positivity.checks) {
            c.name = format!("semigroup[{},t={t}].{}", g.name, c.name);
            checks.push(c);
        }
    }
    Ok(checks)
}

fn jessen_suite(suite: &Suite, g: &NamedGenerator, rng: &mut ChaCha8Rng, out: &mut JessenSuite) -> Result<(), Failure> {
    let opts = JessenOptions {
        tol: suite.order_tolerance(),
        require_normalized: true,
    };
    for fam in &suite.families {
        for &t in &suite.t_grid {
            for f in family_vectors(g, rng, suite.samples, fam) {
                let ctx = format!("Jessen case for '{}', {}, t = {t}", g.name, fam.name());
                let report = verify_jessen(&g.gen, fam, &f, t, &opts).map_err(core_err(&ctx))?;
                out.min_slack = Some(out.min_slack.map_or(report.min_slack, |m| m.min(report.min_slack)));
                out.cases.push(JessenCase {
                    f,
                    pass: report.holds(),
                    report,
                });
            }
        }
    }
    Ok(())
}

fn adjoint_suite(
    suite: &Suite,
    g: &NamedGenerator,
    rng: &mut ChaCha8Rng,
    out: &mut AdjointSuite,
) -> Result<(), Failure> {
    let opts = JessenOptions {
        tol: suite.order_tolerance(),
        require_normalized: true,
    };
    for fam in &suite.families {
        for &t in &suite.t_grid {
            for f in family_vectors(g, rng, suite.samples, fam) {
                let fstar = sample::element(rng, g.gen.dim(), 0.0, 1.0);
                let ctx = format!("adjoint case for '{}', {}, t = {t}", g.name, fam.name());
                let report = verify_adjoint_pairing(&g.gen, fam, &DualVector::new(fstar.clone()), &f, t, &opts)
                    .map_err(core_err(&ctx))?;
                out.min_weak_gap = Some(out.min_weak_gap.map_or(report.weak_gap, |m| m.min(report.weak_gap)));
                out.cases.push(AdjointCase {
                    generator: g.name.clone(),
                    family: fam.name(),
                    t,
                    f,
                    fstar,
                    pass: report.report.passed(),
                    report,
                });
            }
        }
    }
    Ok(())
}

fn gram_vectors(g: &NamedGenerator, rng: &mut ChaCha8Rng, samples: usize, kind: FamilyKind) -> Vec<LatticeElement> {
    match kind {
        FamilyKind::F => test_vectors(g, rng, samples, true, (0.5, 3.0)),
        FamilyKind::H => test_vectors(g, rng, samples, false, (-1.0, 1.5)),
    }
}

/// Builds and checks one fixed-time Gram matrix, including the diagonal
/// consistency with the Jessen residual of each family member.
pub fn gram_case(
    g: &NamedGenerator,
    set: &ExponentSet,
    t: f64,
    f: &LatticeElement,
    n_xi: usize,
    seed: u64,
    psd_tol: f64,
) -> Result<(GramCase, jessen_core::LambdaGram), Failure> {
    let ctx = format!("Gram case for '{}', p = {:?}, t = {t}", g.name, set.exponents());
    let gram = build_gram(&g.gen, f, t, set).map_err(core_err(&ctx))?;
    let psd = check_order_psd(&gram, n_xi, seed, psd_tol).map_err(core_err(&ctx))?;

    let mut diagonal_defect = 0.0f64;
    let mut diagonal_min = f64::INFINITY;
    for (i, &p) in set.exponents().iter().enumerate() {
        let member = OperatorFamily::member(set.kind(), p).map_err(core_err(&ctx))?;
        let jessen = verify_jessen(&g.gen, &member, f, t, &JessenOptions::default()).map_err(core_err(&ctx))?;
        let diag = &gram.entries[i][i];
        diagonal_defect = diagonal_defect.max(diag.sub(&jessen.residual).map_err(core_err(&ctx))?.norm());
        diagonal_min = diagonal_min.min(diag.min_entry());
    }
    let scale = 1.0 + gram.max_abs_entry();
    let pass = psd.passed() && diagonal_defect <= DIAGONAL_TOL * scale && diagonal_min >= -psd_tol * scale;
    let case = GramCase {
        generator: g.name.clone(),
        kind: set.kind(),
        p: set.exponents().to_vec(),
        t,
        f: f.clone(),
        pass,
        min_eigenvalues: gram.min_eigenvalues.clone(),
        diagonal_defect,
        psd,
    };
    Ok((case, gram))
}

fn gram_suite(
    suite: &Suite,
    g: &NamedGenerator,
    rng: &mut ChaCha8Rng,
    asserted: &mut Vec<GramCase>,
    observed: &mut Vec<CoupledGram>,
) -> Result<(), Failure> {
    for set in &suite.exponent_sets {
        let vectors = gram_vectors(g, rng, suite.samples, set.kind());
        for &t in &suite.t_grid {
            for f in &vectors {
                let seed = rng.random();
                let (case, _) = gram_case(g, set, t, f, suite.n_xi, seed, suite.tolerances.psd)?;
                asserted.push(case);
            }
        }
        let f = &vectors[0];
        let negative_time = (0..set.len()).any(|i| (0..set.len()).any(|j| set.midpoint(i, j) < 0.0));
        if negative_time {
            observed.push(CoupledGram {
                generator: g.name.clone(),
                kind: set.kind(),
                p: set.exponents().to_vec(),
                f: f.clone(),
                min_eigenvalue: None,
                psd_pass: false,
                note: Some("skipped: a midpoint is negative and cannot serve as a time".into()),
            });
            continue;
        }
        let ctx = format!("coupled Gram for '{}', p = {:?}", g.name, set.exponents());
        let gram = build_gram_coupled(&g.gen, f, set).map_err(core_err(&ctx))?;
        let psd = check_order_psd(&gram, suite.n_xi, rng.random(), suite.tolerances.psd).map_err(core_err(&ctx))?;
        observed.push(CoupledGram {
            generator: g.name.clone(),
            kind: set.kind(),
            p: set.exponents().to_vec(),
            f: f.clone(),
            min_eigenvalue: Some(psd.min_eigenvalue),
            psd_pass: psd.passed(),
            note: None,
        });
    }
    Ok(())
}

fn negative_controls(
    suite: &Suite,
    g: &NamedGenerator,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<NegativeControl>,
) -> Result<(), Failure> {
    let opts = JessenOptions {
        tol: suite.order_tolerance(),
        require_normalized: false,
    };
    for fam in &suite.families {
        for &t in &suite.t_grid {
            for f in family_vectors(g, rng, suite.samples, fam) {
                let ctx = format!("negative control for '{}', {}, t = {t}", g.name, fam.name());
                let report = verify_jessen(&g.gen, fam, &f, t, &opts).map_err(core_err(&ctx))?;
                out.push(NegativeControl {
                    generator: g.name.clone(),
                    family: fam.name(),
                    t,
                    f,
                    min_slack: report.min_slack,
                    verdict: report.verdict,
                    violated: !report.holds(),
                });
            }
        }
    }
    Ok(())
}

pub fn run(suite: &Suite) -> Result<VerifyReport, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);
    let mut asserted = Asserted::default();
    let mut observed = Observed::default();
    for g in &suite.generators {
        asserted.lattice.extend(lattice_suite(g, &mut rng, suite.samples)?);
        if !g.asserted() {
            negative_controls(suite, g, &mut rng, &mut observed.negative_controls)?;
            continue;
        }
        asserted.semigroup.extend(semigroup_suite(suite, g, &mut rng)?);
        jessen_suite(suite, g, &mut rng, &mut asserted.jessen)?;
        adjoint_suite(suite, g, &mut rng, &mut asserted.adjoint)?;
        gram_suite(suite, g, &mut rng, &mut asserted.gram, &mut observed.coupled_gram)?;
    }
    asserted.jessen.passed = asserted.jessen.cases.iter().all(|c| c.pass);
    asserted.adjoint.passed = asserted.adjoint.cases.iter().all(|c| c.pass);
    let passed = asserted.lattice.iter().all(|c| c.pass)
        && asserted.semigroup.iter().all(|c| c.pass)
        && asserted.jessen.passed
        && asserted.adjoint.passed
        && asserted.gram.iter().all(|c| c.pass);
    Ok(VerifyReport {
        seed: suite.seed,
        samples: suite.samples,
        tolerances: suite.tolerances,
        passed,
        generators: suite
            .generators
            .iter()
            .map(|g| GeneratorSummary {
                name: g.name.clone(),
                dim: g.gen.dim(),
                conservative: g.gen.is_conservative(),
                override_normalization: g.override_normalization,
                asserted: g.asserted(),
            })
            .collect(),
        asserted,
        observed,
    })
}

impl VerifyReport {
    /// Names of failed asserted checks and cases.
    pub fn failures(&self) -> Vec<String> {
        let a = &self.asserted;
        let mut out: Vec<String> = a
            .lattice
            .iter()
            .chain(&a.semigroup)
            .filter(|c| !c.pass)
            .map(|c| c.name.clone())
            .collect();
        out.extend(a.jessen.cases.iter().filter(|c| !c.pass).map(|c| {
            format!(
                "jessen[{}, {}, t={}] min slack {:e}",
                c.report.generator.as_deref().unwrap_or("?"),
                c.report.family,
                c.report.t,
                c.report.min_slack
            )
        }));
        out.extend(a.adjoint.cases.iter().filter(|c| !c.pass).map(|c| {
            format!(
                "adjoint[{}, {}, t={}] weak gap {:e}",
                c.generator, c.family, c.t, c.report.weak_gap
            )
        }));
        out.extend(a.gram.iter().filter(|c| !c.pass).map(|c| {
            format!(
                "gram[{}, p={:?}, t={}] min eigenvalue {:e}",
                c.generator, c.p, c.t, c.psd.min_eigenvalue
            )
        }));
        out
    }

    pub fn asserted_count(&self) -> usize {
        let a = &self.asserted;
        a.lattice.len() + a.semigroup.len() + a.jessen.cases.len() + a.adjoint.cases.len() + a.gram.len()
    }
}
