//! Discretized counterexamples where the normalization hypothesis fails and
//! the two sides of the Jessen-type inequality become incomparable.
//!
//! * Shift scene: the left shift `Z(t)f(x) = f(x + t)` on a symmetric grid,
//!   with `phi` the mirror `x -> -x` and `f(x) = exp(-x^2)`. The identity
//!   function is not in `C_0(R)`, so there is no unit to normalize.
//! * Rotation scene: `Z(t)f(z) = f(e^{it} z)` on `N` equally spaced points of
//!   the unit circle, `phi` complex conjugation and `f(z) = Re z + 1`. The
//!   rotation fixes `E(z) = z` only when `t` is a multiple of `2 pi`.
//!
//! Both `Z(t)` and `phi` are permutation (or truncated permutation) matrices,
//! so every comparison is between exactly computed samples of `f`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeElement, OrderTolerance, OrderVerdict};
use crate::semigroup::SemigroupOperator;

const ALIGN_TOL: f64 = 1e-9;

/// Sampled curves `(coordinate, phi(Z(t)f), Z(t)(phi f))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curves {
    pub coord: Vec<f64>,
    pub phi_zt_f: Vec<f64>,
    pub zt_phi_f: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftScene {
    pub half_width: f64,
    pub step: f64,
    pub t: f64,
}

impl Default for ShiftScene {
    fn default() -> Self {
        Self {
            half_width: 6.0,
            step: 0.05,
            t: 1.0,
        }
    }
}

fn integer_ratio(a: f64, b: f64, what: &str) -> Result<usize> {
    let r = a / b;
    let k = r.round();
    if !(r.is_finite() && k >= 0.0 && (r - k).abs() <= ALIGN_TOL) {
        return Err(Error::InvalidParameter(format!(
            "{what} = {a} is not an integer multiple of {b}"
        )));
    }
    Ok(k as usize)
}

impl ShiftScene {
    pub fn with_t(t: f64) -> Self {
        Self { t, ..Self::default() }
    }

    /// `(M, s)`: grid half-size in steps and shift in steps.
    fn steps(&self) -> Result<(usize, usize)> {
        if !(self.step > 0.0) || !(self.half_width > 0.0) {
            return Err(Error::InvalidParameter(
                "grid step and half-width must be positive".into(),
            ));
        }
        let m = integer_ratio(self.half_width, self.step, "half-width")?;
        let s = integer_ratio(self.t, self.step, "t")?;
        if s >= m {
            return Err(Error::InvalidParameter(format!(
                "shift t = {} must be smaller than the half-width {}",
                self.t, self.half_width
            )));
        }
        Ok((m, s))
    }

    /// Grid `x_k = (k - M) h`, symmetric so that `x_{2M-k} = -x_k` exactly.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let (m, _) = self.steps()?;
        Ok((0..=2 * m).map(|k| (k as f64 - m as f64) * self.step).collect())
    }

    /// Truncated left shift by `s` grid steps; zero beyond the right edge.
    pub fn operator(&self) -> Result<SemigroupOperator> {
        let (m, s) = self.steps()?;
        let n = 2 * m + 1;
        let mat = DMatrix::from_fn(n, n, |i, j| if j == i + s { 1.0 } else { 0.0 });
        Ok(SemigroupOperator::from_matrix(mat, self.t))
    }
}

/// The reflection `(phi f)_k = f_{N-1-k}`.
pub fn mirror_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftOutcome {
    pub t: f64,
    /// `phi(Z(t)f)` against `Z(t)(phi f)` on the interior window.
    pub verdict: OrderVerdict,
    pub argmax_lhs: f64,
    pub argmax_rhs: f64,
    /// `phi(Z(t)f)` at `x = t`.
    pub lhs_at_t: f64,
    /// `Z(t)(phi f)` at `x = t`.
    pub rhs_at_t: f64,
    /// Interior window `|x| <= L - t` on which assertions are made.
    pub window: f64,
    pub curves: Curves,
}

fn argmax(xs: &[f64], ys: &[f64]) -> f64 {
    let mut best = 0;
    for (i, y) in ys.iter().enumerate() {
        if *y > ys[best] {
            best = i;
        }
    }
    xs[best]
}

pub fn run_shift_example(scene: &ShiftScene) -> Result<ShiftOutcome> {
    let grid = scene.grid()?;
    let (m, s) = scene.steps()?;
    let z = scene.operator()?;
    let mirror = SemigroupOperator::from_matrix(mirror_matrix(grid.len()), 0.0);
    let f = LatticeElement::new(grid.iter().map(|x| (-x * x).exp()).collect())?;

    let lhs = mirror.apply(&z.apply(&f)?)?;
    let rhs = z.apply(&mirror.apply(&f)?)?;

    let window = scene.half_width - scene.t;
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&k| grid[k].abs() <= window + ALIGN_TOL)
        .collect();
    let pick = |v: &LatticeElement| LatticeElement::new(inside.iter().map(|&k| v.get(k)).collect());
    let verdict = pick(&lhs)?.partial_leq(&pick(&rhs)?, &OrderTolerance::default())?;

    let at_t = m + s;
    Ok(ShiftOutcome {
        t: scene.t,
        verdict,
        argmax_lhs: argmax(&grid, lhs.values()),
        argmax_rhs: argmax(&grid, rhs.values()),
        lhs_at_t: lhs.get(at_t),
        rhs_at_t: rhs.get(at_t),
        window,
        curves: Curves {
            coord: grid,
            phi_zt_f: lhs.into_values(),
            zt_phi_f: rhs.into_values(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationScene {
    pub n: usize,
    /// Rotation by `t = 2 pi k / n`.
    pub k: usize,
}

impl Default for RotationScene {
    fn default() -> Self {
        Self { n: 360, k: 90 }
    }
}

impl RotationScene {
    pub fn t(&self) -> f64 {
        2.0 * PI * self.k as f64 / self.n as f64
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParameter(format!(
                "rotation scene needs n >= 3, got {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Principal angles in `(-pi, pi]`; point `n - j` is the conjugate of
    /// point `j` with exactly negated angle.
    pub fn angles(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|j| {
                if 2 * j <= n {
                    2.0 * PI * j as f64 / n as f64
                } else {
                    -(2.0 * PI * (n - j) as f64 / n as f64)
                }
            })
            .collect()
    }

    /// Cyclic index shift `(Z f)_j = f_{(j + k) mod n}`.
    pub fn operator(&self) -> Result<SemigroupOperator> {
        self.validate()?;
        let n = self.n;
        let k = self.k % n;
        let mat = DMatrix::from_fn(n, n, |i, j| if j == (i + k) % n { 1.0 } else { 0.0 });
        Ok(SemigroupOperator::from_matrix(mat, self.t()))
    }
}

/// Complex conjugation on the circle grid, `(phi f)_j = f_{(n - j) mod n}`.
pub fn conjugation_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if j == (n - i) % n { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationOutcome {
    pub n: usize,
    pub k: usize,
    pub t: f64,
    pub verdict: OrderVerdict,
    /// `max_j |lhs_j - rhs_j|`.
    pub max_gap: f64,
    /// Largest deviation of either curve from `cos(t -+ z) + 1`.
    pub formula_defect: f64,
    pub curves: Curves,
}

pub fn run_rotation_example(scene: &RotationScene) -> Result<RotationOutcome> {
    scene.validate()?;
    let z_angles = scene.angles();
    let f = LatticeElement::new(z_angles.iter().map(|z| z.cos() + 1.0).collect())?;
    let z = scene.operator()?;
    let phi = SemigroupOperator::from_matrix(conjugation_matrix(scene.n), 0.0);

    let lhs = phi.apply(&z.apply(&f)?)?;
    let rhs = z.apply(&phi.apply(&f)?)?;
    let t = scene.t();

    let mut formula_defect = 0.0f64;
    for (j, &zj) in z_angles.iter().enumerate() {
        formula_defect = formula_defect
            .max((lhs.get(j) - ((t - zj).cos() + 1.0)).abs())
            .max((rhs.get(j) - ((t + zj).cos() + 1.0)).abs());
    }
    Ok(RotationOutcome {
        n: scene.n,
        k: scene.k,
        t,
        verdict: lhs.partial_leq(&rhs, &OrderTolerance::default())?,
        max_gap: lhs.sub(&rhs)?.norm(),
        formula_defect,
        curves: Curves {
            coord: z_angles,
            phi_zt_f: lhs.into_values(),
            zt_phi_f: rhs.into_values(),
        },
    })
}

/// CSV with header `coord,phi_Zt_f,Zt_phi_f`.
pub fn curves_csv(c: &Curves) -> String {
    let mut out = String::from("coord,phi_Zt_f,Zt_phi_f\n");
    for ((x, a), b) in c.coord.iter().zip(&c.phi_zt_f).zip(&c.zt_phi_f) {
        let _ = writeln!(out, "{x},{a:e},{b:e}");
    }
    out
}

/// Two-series line plot as a standalone SVG document.
pub fn curves_svg(c: &Curves, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    let (x0, x1) = c.coord.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    let (y0, y1) = c
        .phi_zt_f
        .iter()
        .chain(&c.zt_phi_f)
        .fold((0.0f64, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0).max(f64::MIN_POSITIVE) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0).max(f64::MIN_POSITIVE) * (H - 2.0 * PAD);
    let path = |ys: &[f64]| {
        c.coord
            .iter()
            .zip(ys)
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{PAD}" y="24" font-family="sans-serif" font-size="14">{title}</text>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#,
        b = H - PAD
    );
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        path(&c.phi_zt_f)
    );
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="firebrick" stroke-width="2" stroke-dasharray="6 3" points="{}"/>"#,
        path(&c.zt_phi_f)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{x}" y="{PAD}" font-family="sans-serif" font-size="12" fill="steelblue">phi(Z(t)f)</text>"#,
        x = W - 160.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="12" fill="firebrick">Z(t)(phi f)</text>"#,
        x = W - 160.0,
        y = PAD + 16.0
    );
    svg.push_str("</svg>\n");
    svg
}
