//! `jessen expconv`: Gram matrices over exponent midpoints and their
//! order-PSD verdicts.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use jessen_core::expconv::{gram_csv, GramExport};
use jessen_core::{sample, FamilyKind, LatticeElement};

use crate::config::Suite;
use crate::failure::Failure;
use crate::output;
use crate::verify::{gram_case, GramCase};

#[derive(Debug, Serialize)]
pub struct ExpconvReport {
    pub seed: u64,
    pub psd_tol: f64,
    pub passed: bool,
    pub cases: Vec<ExpconvCase>,
}

#[derive(Debug, Serialize)]
pub struct ExpconvCase {
    pub index: usize,
    #[serde(flatten)]
    pub summary: GramCase,
    pub gram: GramExport,
}

fn vectors(
    fixed: &[LatticeElement],
    rng: &mut ChaCha8Rng,
    n: usize,
    samples: usize,
    kind: FamilyKind,
) -> Vec<LatticeElement> {
    let positive = kind == FamilyKind::F;
    let mut out: Vec<LatticeElement> = fixed
        .iter()
        .filter(|v| !positive || v.is_strictly_positive())
        .cloned()
        .collect();
    let (lo, hi) = if positive { (0.5, 3.0) } else { (-1.0, 1.5) };
    out.extend((0..samples).map(|_| sample::element(rng, n, lo, hi)));
    out
}

pub fn run(suite: &Suite) -> Result<(ExpconvReport, String, String), Failure> {
    if suite.exponent_sets.is_empty() {
        return Err(Failure::Usage(
            "expconv needs at least one entry in p_sets or h_p_sets".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);
    let mut cases = Vec::new();
    let mut csv = String::from("case,p_i,p_j,coordinate,value\n");
    let mut table = csv::Writer::from_writer(Vec::new());
    table
        .write_record([
            "case",
            "generator",
            "kind",
            "t",
            "coordinate",
            "min_eigenvalue",
            "tolerance",
            "pass",
        ])
        .map_err(csv_err)?;
    for g in suite.generators.iter().filter(|g| g.asserted()) {
        for set in &suite.exponent_sets {
            let fs = vectors(&g.test_vectors, &mut rng, g.gen.dim(), suite.samples, set.kind());
            for &t in &suite.t_grid {
                for f in &fs {
                    let (summary, gram) = gram_case(g, set, t, f, suite.n_xi, rng.random(), suite.tolerances.psd)?;
                    let index = cases.len();
                    for line in gram_csv(&gram).lines().skip(1) {
                        let _ = writeln!(csv, "{index},{line}");
                    }
                    let tol = summary.psd.spectral_tol;
                    for (k, eig) in summary.min_eigenvalues.iter().enumerate() {
                        table
                            .write_record([
                                index.to_string(),
                                g.name.clone(),
                                format!("{:?}", set.kind()),
                                t.to_string(),
                                k.to_string(),
                                format!("{eig:e}"),
                                format!("{tol:e}"),
                                (*eig >= -tol).to_string(),
                            ])
                            .map_err(csv_err)?;
                    }
                    cases.push(ExpconvCase {
                        index,
                        gram: GramExport::from(&gram),
                        summary,
                    });
                }
            }
        }
    }
    let report = ExpconvReport {
        seed: suite.seed,
        psd_tol: suite.tolerances.psd,
        passed: cases.iter().all(|c| c.summary.pass),
        cases,
    };
    let table = table
        .into_inner()
        .map_err(|e| Failure::Io(format!("cannot assemble eigenvalue table: {e}")))?;
    Ok((report, csv, String::from_utf8(table).expect("csv output is UTF-8")))
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Io(format!("cannot assemble eigenvalue table: {e}"))
}

pub fn write(dir: &Path, report: &ExpconvReport, csv: &str, table: &str) -> Result<(), Failure> {
    output::write_json(dir, "gram.json", report)?;
    output::write_text(dir, "gram.csv", csv)?;
    output::write_text(dir, "min_eigenvalues.csv", table)?;
    Ok(())
}
