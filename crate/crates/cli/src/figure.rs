//! `jessen figure`: the shift (1a) and rotation (1b) scenes.

use std::path::Path;

use serde::Serialize;

use jessen_core::scenes::{curves_csv, curves_svg, run_rotation_example, run_shift_example, RotationScene, ShiftScene};
use jessen_core::OrderVerdict;

use crate::failure::Failure;
use crate::output;

#[derive(Debug, Serialize)]
struct ShiftSummary {
    scene: &'static str,
    t: f64,
    half_width: f64,
    step: f64,
    verdict: OrderVerdict,
    window: f64,
    argmax_lhs: f64,
    argmax_rhs: f64,
    lhs_at_t: f64,
    rhs_at_t: f64,
}

#[derive(Debug, Serialize)]
struct RotationSummary {
    scene: &'static str,
    n: usize,
    k: usize,
    t: f64,
    verdict: OrderVerdict,
    max_gap: f64,
    formula_defect: f64,
}

fn invalid(e: jessen_core::Error) -> Failure {
    Failure::Usage(format!("invalid scene parameters: {e}"))
}

/// Writes `figure1a.{csv,svg,json}` and returns the verdict line.
pub fn shift(scene: &ShiftScene, dir: &Path) -> Result<String, Failure> {
    let out = run_shift_example(scene).map_err(invalid)?;
    let title = format!("shift scene, t = {}: phi(Z(t)f) vs Z(t)(phi f)", scene.t);
    output::write_text(dir, "figure1a.csv", &curves_csv(&out.curves))?;
    output::write_text(dir, "figure1a.svg", &curves_svg(&out.curves, &title))?;
    output::write_json(
        dir,
        "figure1a.json",
        &ShiftSummary {
            scene: "shift",
            t: out.t,
            half_width: scene.half_width,
            step: scene.step,
            verdict: out.verdict,
            window: out.window,
            argmax_lhs: out.argmax_lhs,
            argmax_rhs: out.argmax_rhs,
            lhs_at_t: out.lhs_at_t,
            rhs_at_t: out.rhs_at_t,
        },
    )?;
    Ok(format!("figure 1a t={}: {}", scene.t, out.verdict))
}

/// Writes `figure1b.{csv,svg,json}` and returns the verdict line.
pub fn rotation(scene: &RotationScene, dir: &Path) -> Result<String, Failure> {
    let out = run_rotation_example(scene).map_err(invalid)?;
    let title = format!(
        "rotation scene, k = {} of n = {}: phi(Z(t)f) vs Z(t)(phi f)",
        scene.k, scene.n
    );
    output::write_text(dir, "figure1b.csv", &curves_csv(&out.curves))?;
    output::write_text(dir, "figure1b.svg", &curves_svg(&out.curves, &title))?;
    output::write_json(
        dir,
        "figure1b.json",
        &RotationSummary {
            scene: "rotation",
            n: out.n,
            k: out.k,
            t: out.t,
            verdict: out.verdict,
            max_gap: out.max_gap,
            formula_defect: out.formula_defect,
        },
    )?;
    Ok(format!("figure 1b k={} n={}: {}", scene.k, scene.n, out.verdict))
}
