//! Verifiers for the Jessen-type inequality `phi(Z(t)f) <= Z(t)(phi f)` and
//! its adjoint form, checked through the dual pairing.
//!
//! For a nonlinear `phi` the pseudo-adjoint `phi#(y*)(x) = y*(phi(x))` is a
//! nonlinear functional rather than a vector, so the adjoint inequality is
//! evaluated in weak form at a test vector `f`:
//!
//! ```text
//! <Z*(t) f*, phi(f)> = <f*, Z(t)(phi f)>  >=  <f*, phi(Z(t) f)>
//! ```
//!
//! The `>=` step needs `f*` in the positive cone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{OperatorFamily, POSITIVITY_FLOOR};
use crate::lattice::{LatticeElement, OrderTolerance, OrderVerdict};
use crate::report::{Check, Report};
use crate::semigroup::{evolve, Generator, SemigroupOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JessenOptions {
    pub tol: OrderTolerance,
    /// When false, a non-conservative generator is accepted; used for
    /// negative-control experiments only.
    pub require_normalized: bool,
}

impl Default for JessenOptions {
    fn default() -> Self {
        Self {
            tol: OrderTolerance::default(),
            require_normalized: true,
        }
    }
}

impl JessenOptions {
    pub fn unchecked() -> Self {
        Self {
            require_normalized: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JessenReport {
    /// `Z(t)(phi f) - phi(Z(t) f)`.
    pub residual: LatticeElement,
    /// `phi(Z(t) f)` compared with `Z(t)(phi f)`; LEQ or EQUAL when the
    /// inequality holds.
    pub verdict: OrderVerdict,
    pub min_slack: f64,
    pub t: f64,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
}

impl JessenReport {
    pub fn holds(&self) -> bool {
        self.verdict.is_leq()
    }
}

pub(crate) fn require_normalized(gen: &Generator) -> Result<()> {
    if !gen.is_conservative() {
        return Err(Error::NotNormalized {
            max_row_sum: gen.max_abs_row_sum(),
        });
    }
    Ok(())
}

/// Both sides of the inequality and the verdict for an already evolved operator.
pub fn jessen_residual(
    z: &SemigroupOperator,
    fam: &OperatorFamily,
    f: &LatticeElement,
    tol: &OrderTolerance,
) -> Result<(LatticeElement, OrderVerdict)> {
    let zf = z.apply(f)?;
    let lhs = fam.apply(&zf)?;
    let rhs = z.apply(&fam.apply(f)?)?;
    let verdict = lhs.partial_leq(&rhs, tol)?;
    Ok((rhs.sub(&lhs)?, verdict))
}

pub fn verify_jessen(
    gen: &Generator,
    fam: &OperatorFamily,
    f: &LatticeElement,
    t: f64,
    opts: &JessenOptions,
) -> Result<JessenReport> {
    if opts.require_normalized {
        require_normalized(gen)?;
    }
    let z = evolve(gen, t)?;
    let (residual, verdict) = jessen_residual(&z, fam, f, &opts.tol)?;
    Ok(JessenReport {
        min_slack: residual.min_entry(),
        residual,
        verdict,
        t,
        family: fam.name(),
        generator: gen.name().map(str::to_owned),
    })
}

/// Compares `phi(f)` with the tangent `phi(f0) + phi'(f0)(f - f0)`; GEQ or
/// EQUAL is expected for convex `phi`.
pub fn support_line_check(
    fam: &OperatorFamily,
    f: &LatticeElement,
    f0: &LatticeElement,
    tol: &OrderTolerance,
) -> Result<OrderVerdict> {
    let slope = fam.apply_derivative(f0)?;
    let support = fam.apply(f0)?.add(&slope.multiply(&f.sub(f0)?)?)?;
    fam.apply(f)?.partial_leq(&support, tol)
}

/// An element of the dual `V* = R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualVector {
    values: LatticeElement,
    positive: bool,
}

impl DualVector {
    pub fn new(values: LatticeElement) -> Self {
        let positive = values.is_positive();
        Self { values, positive }
    }

    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        Ok(Self::new(LatticeElement::new(values)?))
    }

    /// Coordinate functional `delta_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self::new(LatticeElement::new(v).expect("finite"))
    }

    pub fn values(&self) -> &LatticeElement {
        &self.values
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn pair(&self, f: &LatticeElement) -> Result<f64> {
        self.values.dot(f)
    }
}

/// The pseudo-adjoint `phi#(y*)`: the nonlinear functional `x -> y*(phi(x))`.
pub struct PseudoAdjoint<'a> {
    pub map: &'a OperatorFamily,
    pub functional: &'a DualVector,
}

impl PseudoAdjoint<'_> {
    pub fn eval(&self, x: &LatticeElement) -> Result<f64> {
        self.functional.pair(&self.map.apply(x)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointReport {
    /// `|<Z^T f*, f> - <f*, Z f>|`.
    pub transpose_defect: f64,
    /// `<Z* f*, phi(f)> - <f*, phi(Z f)>`.
    pub weak_gap: f64,
    /// `<f*, Z(phi f) - phi(Z f)>`, the pairing with the Jessen residual.
    pub residual_pairing: f64,
    pub report: Report,
}

pub fn verify_adjoint_pairing(
    gen: &Generator,
    fam: &OperatorFamily,
    fstar: &DualVector,
    f: &LatticeElement,
    t: f64,
    opts: &JessenOptions,
) -> Result<AdjointReport> {
    if opts.require_normalized {
        require_normalized(gen)?;
        if let Some((index, &value)) = fstar.values().values().iter().enumerate().find(|(_, &v)| v < 0.0) {
            return Err(Error::NonPositiveDual { index, value });
        }
    }
    let z = evolve(gen, t)?;
    let zf = z.apply(f)?;
    let zstar_fstar = DualVector::new(z.apply_adjoint(fstar.values())?);

    let transpose_defect = (zstar_fstar.pair(f)? - fstar.pair(&zf)?).abs();

    let upper = PseudoAdjoint {
        map: fam,
        functional: &zstar_fstar,
    }
    .eval(f)?;
    let lower = PseudoAdjoint {
        map: fam,
        functional: fstar,
    }
    .eval(&zf)?;
    let weak_gap = upper - lower;

    let (residual, _) = jessen_residual(&z, fam, f, &opts.tol)?;
    let residual_pairing = fstar.pair(&residual)?;

    let scale = 1.0 + upper.abs().max(lower.abs());
    let gap_tol = opts.tol.atol + opts.tol.rtol * scale;
    let mut report = Report::default();
    report.push(Check::within("transpose_identity", transpose_defect, 1e-12 * scale));
    report.push(Check::new(
        "weak_inequality",
        weak_gap >= -gap_tol,
        (-weak_gap).max(0.0),
        gap_tol,
    ));
    report.push(Check::within(
        "residual_consistency",
        (weak_gap - residual_pairing).abs(),
        1e-10 * scale,
    ));
    Ok(AdjointReport {
        transpose_defect,
        weak_gap,
        residual_pairing,
        report,
    })
}

/// `|phi#(l a + (1-l) b)(x) - l phi#(a)(x) - (1-l) phi#(b)(x)|`: the
/// pseudo-adjoint is affine in its dual argument.
pub fn pseudo_adjoint_linearity_defect(
    fam: &OperatorFamily,
    a: &DualVector,
    b: &DualVector,
    lambda: f64,
    x: &LatticeElement,
) -> Result<f64> {
    let mix = DualVector::new(a.values().convex_combination(b.values(), lambda)?);
    let lhs = PseudoAdjoint {
        map: fam,
        functional: &mix,
    }
    .eval(x)?;
    let ra = PseudoAdjoint {
        map: fam,
        functional: a,
    }
    .eval(x)?;
    let rb = PseudoAdjoint {
        map: fam,
        functional: b,
    }
    .eval(x)?;
    Ok((lhs - (lambda * ra + (1.0 - lambda) * rb)).abs())
}

/// Convexity slack of the scalar function `x -> <x*, phi(x)>` along `f, g`:
/// `l <x*, phi f> + (1-l) <x*, phi g> - <x*, phi(l f + (1-l) g)>`.
/// Nonnegative for positive `x*` and convex `phi`.
pub fn dual_functional_convexity_slack(
    fam: &OperatorFamily,
    xstar: &DualVector,
    f: &LatticeElement,
    g: &LatticeElement,
    lambda: f64,
) -> Result<f64> {
    let functional = PseudoAdjoint {
        map: fam,
        functional: xstar,
    };
    let mid = functional.eval(&f.convex_combination(g, lambda)?)?;
    Ok(lambda * functional.eval(f)? + (1.0 - lambda) * functional.eval(g)? - mid)
}

/// Axis-aligned box `[lo, hi]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: f64,
    pub hi: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    /// Largest sampled difference quotient; never exceeds the true constant.
    pub lower_bound: f64,
    pub samples: usize,
}

/// Sampled lower bound on `sup |F(x) - F(y)| / |x - y|` over the box.
///
/// Each sample is one pair. Half the pairs are independent uniform points,
/// the rest perturb one coordinate by a log-uniform step, which probes the
/// local slope. Samples are drawn in a fixed order from `seed`, so the
/// estimate is nondecreasing in `n_samples`.
pub fn lipschitz_norm_estimate(
    fam: &OperatorFamily,
    domain: &DomainBox,
    n_samples: usize,
    seed: u64,
) -> Result<LipschitzEstimate> {
    let DomainBox { lo, hi, dim } = *domain;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || dim == 0 {
        return Err(Error::InvalidParameter(format!("degenerate box [{lo}, {hi}]^{dim}")));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    if fam.requires_positive() && lo <= POSITIVITY_FLOOR {
        return Err(Error::NonPositiveInput { index: 0, value: lo });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..n_samples {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..=hi)).collect();
        let y: Vec<f64> = if rng.random_bool(0.5) {
            (0..dim).map(|_| rng.random_range(lo..=hi)).collect()
        } else {
            let mut y = x.clone();
            let i = rng.random_range(0..dim);
            let step = (hi - lo) * 10f64.powf(-rng.random_range(0.0..6.0));
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            y[i] = (x[i] + sign * step).clamp(lo, hi);
            y
        };
        let x = LatticeElement::new(x)?;
        let y = LatticeElement::new(y)?;
        let dx = x.sub(&y)?.norm();
        if dx == 0.0 {
            continue;
        }
        let df = fam.apply(&x)?.sub(&fam.apply(&y)?)?.norm();
        best = best.max(df / dx);
    }
    Ok(LipschitzEstimate {
        lower_bound: best,
        samples: n_samples,
    })
}
