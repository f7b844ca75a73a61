//! Convex operator families on the commutative algebra, evaluated pointwise.
//!
//! The power/log family
//!
//! ```text
//! F_t(f) = f^t / (t(t-1))   t not in {0, 1}
//!        = -log f           t = 0
//!        = f log f          t = 1
//! ```
//!
//! has second derivative `f^(t-2)` on the strictly positive cone, and the
//! exponential family
//!
//! ```text
//! H_t(f) = exp(t f) / t^2   t != 0
//!        = f^2 / 2          t = 0
//! ```
//!
//! has second derivative `exp(t f)` everywhere. Both are therefore convex
//! operators in the lattice order. Users can add their own pointwise maps
//! through [`CustomMap`], which must carry its derivatives so the
//! second-derivative criterion can be checked rather than assumed.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeElement, OrderTolerance, OrderVerdict};

/// Entries must exceed this to count as strictly positive.
pub const POSITIVITY_FLOOR: f64 = 1e-12;
/// Largest exponent `t * f_i` accepted by the exponential family.
pub const EXP_LIMIT: f64 = 700.0;
/// Smallest finite-difference step accepted by [`second_derivative_check`].
pub const MIN_FD_STEP: f64 = 1e-6;
/// Exponents closer than this to 0 or 1 (but not equal) are rejected for the
/// power family, where `1/(t(t-1))` blows up.
pub const SINGULAR_GUARD: f64 = 1e-6;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied pointwise map with its first and second derivatives.
#[derive(Clone)]
pub struct CustomMap {
    name: String,
    value: ScalarFn,
    derivative: ScalarFn,
    second: ScalarFn,
    positive_domain: bool,
}

impl CustomMap {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            second: Arc::new(second),
            positive_domain: false,
        }
    }

    /// Restricts the map to strictly positive inputs.
    pub fn on_positive_cone(mut self) -> Self {
        self.positive_domain = true;
        self
    }

    pub fn identity() -> Self {
        Self::new("identity", |x| x, |_| 1.0, |_| 0.0)
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0, |_| 0.0, |_| 0.0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMap")
            .field("name", &self.name)
            .field("positive_domain", &self.positive_domain)
            .finish()
    }
}

impl PartialEq for CustomMap {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.value, &other.value)
    }
}

/// Which parametric family an exponent indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    F,
    H,
}

/// Family selector. Serialized as a tagged union, e.g.
/// `{"family":"PowerF","t":2.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum OperatorFamily {
    /// `f^t / (t(t-1))`, `t` not in `{0, 1}`.
    PowerF { t: f64 },
    /// `-log f`, the `t = 0` member of the power family.
    NegLog,
    /// `f log f`, the `t = 1` member of the power family.
    Entropy,
    /// `exp(t f) / t^2`, `t != 0`.
    ExpH { t: f64 },
    /// `f^2 / 2`, the `t = 0` member of the exponential family.
    HalfSquare,
    #[serde(skip)]
    Custom(CustomMap),
}

impl OperatorFamily {
    /// Member `F_p` of the power/log family, dispatching the two special
    /// exponents and rejecting exponents within [`SINGULAR_GUARD`] of them.
    pub fn f_family(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::InvalidParameter(format!("exponent {p} is not finite")));
        }
        if p == 0.0 {
            Ok(Self::NegLog)
        } else if p == 1.0 {
            Ok(Self::Entropy)
        } else if p.abs() < SINGULAR_GUARD || (p - 1.0).abs() < SINGULAR_GUARD {
            Err(Error::IllConditionedMidpoint { p })
        } else {
            Ok(Self::PowerF { t: p })
        }
    }

    /// Member `H_p` of the exponential family.
    pub fn h_family(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::InvalidParameter(format!("exponent {p} is not finite")));
        }
        Ok(if p == 0.0 {
            Self::HalfSquare
        } else {
            Self::ExpH { t: p }
        })
    }

    pub fn member(kind: FamilyKind, p: f64) -> Result<Self> {
        match kind {
            FamilyKind::F => Self::f_family(p),
            FamilyKind::H => Self::h_family(p),
        }
    }

    pub fn kind(&self) -> Option<FamilyKind> {
        match self {
            Self::PowerF { .. } | Self::NegLog | Self::Entropy => Some(FamilyKind::F),
            Self::ExpH { .. } | Self::HalfSquare => Some(FamilyKind::H),
            Self::Custom(_) => None,
        }
    }

    /// Rejects parameter values outside the family's definition.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::PowerF { t } if !t.is_finite() || t == 0.0 || t == 1.0 => Err(Error::InvalidParameter(format!(
                "PowerF requires finite t outside {{0, 1}}, got {t}"
            ))),
            Self::ExpH { t } if !t.is_finite() || t == 0.0 => Err(Error::InvalidParameter(format!(
                "ExpH requires finite nonzero t, got {t}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::PowerF { t } => format!("PowerF({t})"),
            Self::NegLog => "NegLog".into(),
            Self::Entropy => "Entropy".into(),
            Self::ExpH { t } => format!("ExpH({t})"),
            Self::HalfSquare => "HalfSquare".into(),
            Self::Custom(c) => format!("Custom({})", c.name),
        }
    }

    pub fn requires_positive(&self) -> bool {
        match self {
            Self::PowerF { .. } | Self::NegLog | Self::Entropy => true,
            Self::Custom(c) => c.positive_domain,
            _ => false,
        }
    }

    /// Checks that every entry of `f` lies in the family's domain.
    pub fn check_domain(&self, f: &LatticeElement) -> Result<()> {
        self.validate()?;
        if self.requires_positive() {
            if let Some((index, &value)) = f.values().iter().enumerate().find(|(_, &v)| v <= POSITIVITY_FLOOR) {
                return Err(Error::NonPositiveInput { index, value });
            }
        }
        if let Self::ExpH { t } = *self {
            if let Some((index, &v)) = f.values().iter().enumerate().find(|(_, &v)| t * v > EXP_LIMIT) {
                return Err(Error::ExpOverflow { index, exponent: t * v });
            }
        }
        Ok(())
    }

    /// Scalar value of the map; the caller is responsible for the domain.
    pub fn scalar(&self, x: f64) -> f64 {
        match self {
            Self::PowerF { t } => x.powf(*t) / (t * (t - 1.0)),
            Self::NegLog => -x.ln(),
            Self::Entropy => x * x.ln(),
            Self::ExpH { t } => (t * x).exp() / (t * t),
            Self::HalfSquare => 0.5 * x * x,
            Self::Custom(c) => (c.value)(x),
        }
    }

    pub fn scalar_derivative(&self, x: f64) -> f64 {
        match self {
            Self::PowerF { t } => x.powf(t - 1.0) / (t - 1.0),
            Self::NegLog => -1.0 / x,
            Self::Entropy => x.ln() + 1.0,
            Self::ExpH { t } => (t * x).exp() / t,
            Self::HalfSquare => x,
            Self::Custom(c) => (c.derivative)(x),
        }
    }

    /// `f^(t-2)` for the power family, `exp(t f)` for the exponential one.
    pub fn scalar_second_derivative(&self, x: f64) -> f64 {
        match self {
            Self::PowerF { t } => x.powf(t - 2.0),
            Self::NegLog => 1.0 / (x * x),
            Self::Entropy => 1.0 / x,
            Self::ExpH { t } => (t * x).exp(),
            Self::HalfSquare => 1.0,
            Self::Custom(c) => (c.second)(x),
        }
    }

    pub fn apply(&self, f: &LatticeElement) -> Result<LatticeElement> {
        self.check_domain(f)?;
        f.map(|x| self.scalar(x))
    }

    /// The Fréchet derivative at `f`, as the multiplier `phi'(f)`.
    pub fn apply_derivative(&self, f: &LatticeElement) -> Result<LatticeElement> {
        self.check_domain(f)?;
        f.map(|x| self.scalar_derivative(x))
    }

    pub fn apply_second_derivative(&self, f: &LatticeElement) -> Result<LatticeElement> {
        self.check_domain(f)?;
        f.map(|x| self.scalar_second_derivative(x))
    }
}

/// Evaluates a member of the power/log family.
pub fn eval_f(fam: &OperatorFamily, f: &LatticeElement) -> Result<LatticeElement> {
    if fam.kind() != Some(FamilyKind::F) {
        return Err(Error::InvalidParameter(format!(
            "{} is not a power/log family member",
            fam.name()
        )));
    }
    fam.apply(f)
}

/// Evaluates a member of the exponential family.
pub fn eval_h(fam: &OperatorFamily, f: &LatticeElement) -> Result<LatticeElement> {
    if fam.kind() != Some(FamilyKind::H) {
        return Err(Error::InvalidParameter(format!(
            "{} is not an exponential family member",
            fam.name()
        )));
    }
    fam.apply(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSeriesConfig {
    /// Stop once the next term and the remaining tail are both below this.
    pub tol: f64,
    pub max_terms: usize,
    /// Inputs must satisfy `|e - f| <= 1 - radius_margin`.
    pub radius_margin: f64,
}

impl Default for LogSeriesConfig {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            max_terms: 1_000_000,
            radius_margin: 0.1,
        }
    }
}

/// `log f = -sum_{n>=1} (e - f)^n / n`, summed in the algebra.
///
/// Requires `|e - f| <= 1 - delta`, where the terms decay geometrically and
/// the tail after `n` terms is bounded by `r^(n+1) / ((n+1)(1-r))`.
pub fn log_series(f: &LatticeElement, cfg: &LogSeriesConfig) -> Result<LatticeElement> {
    if !(cfg.tol > 0.0) || !(cfg.radius_margin > 0.0 && cfg.radius_margin < 1.0) {
        return Err(Error::InvalidParameter(format!("invalid log-series config {cfg:?}")));
    }
    let u = LatticeElement::unit(f.dim()).sub(f)?;
    let r = u.norm();
    let limit = 1.0 - cfg.radius_margin;
    if r > limit {
        return Err(Error::RadiusViolation { radius: r, limit });
    }
    let u = u.into_values();
    let mut power = u.clone();
    let mut sum = vec![0.0; u.len()];
    let mut r_pow = r;
    for n in 1..=cfg.max_terms {
        let nf = n as f64;
        let mut term_norm = 0.0f64;
        for (s, p) in sum.iter_mut().zip(&power) {
            let term = p / nf;
            *s -= term;
            term_norm = term_norm.max(term.abs());
        }
        r_pow *= r;
        let tail = r_pow / ((nf + 1.0) * (1.0 - r));
        if term_norm < cfg.tol && tail < cfg.tol {
            return LatticeElement::new(sum);
        }
        for (p, x) in power.iter_mut().zip(&u) {
            *p *= x;
        }
    }
    Err(Error::MaxTermsExceeded {
        max_terms: cfg.max_terms,
    })
}

/// Sup-norm distance between the central second difference of `fam` along
/// `dir` and the analytic action `phi''(f) dir^2`.
pub fn second_derivative_check(
    fam: &OperatorFamily,
    f: &LatticeElement,
    dir: &LatticeElement,
    step: f64,
) -> Result<f64> {
    if !(step >= MIN_FD_STEP) {
        return Err(Error::StepTooSmall { step });
    }
    if dir.norm() == 0.0 {
        return Err(Error::InvalidParameter("direction must be nonzero".into()));
    }
    let shift = dir.scale(step)?;
    let plus = fam.apply(&f.add(&shift)?)?;
    let mid = fam.apply(f)?;
    let minus = fam.apply(&f.sub(&shift)?)?;
    let inv = 1.0 / (step * step);
    let fd = plus
        .zip_with(&minus, |a, b| a + b)?
        .zip_with(&mid, |s, m| (s - 2.0 * m) * inv)?;
    let analytic = fam.apply_second_derivative(f)?.multiply(&dir.multiply(dir)?)?;
    Ok(fd.sub(&analytic)?.norm())
}

/// Tests `phi(lf + (1-l)g) <= l phi(f) + (1-l) phi(g)` in the lattice order.
pub fn convexity_probe(
    fam: &OperatorFamily,
    f: &LatticeElement,
    g: &LatticeElement,
    lambda: f64,
    tol: &OrderTolerance,
) -> Result<OrderVerdict> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    let lhs = fam.apply(&f.convex_combination(g, lambda)?)?;
    let rhs = fam.apply(f)?.convex_combination(&fam.apply(g)?, lambda)?;
    lhs.partial_leq(&rhs, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn el(v: &[f64]) -> LatticeElement {
        LatticeElement::new(v.to_vec()).unwrap()
    }

    fn close(a: &LatticeElement, b: &[f64], tol: f64) -> bool {
        a.values().iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn log_series_values() {
        let cfg = LogSeriesConfig::default();
        assert_eq!(
            log_series(&LatticeElement::unit(3), &cfg).unwrap(),
            LatticeElement::zeros(3)
        );
        let l = log_series(&el(&[0.5, 1.5]), &cfg).unwrap();
        assert!(close(&l, &[0.5f64.ln(), 1.5f64.ln()], 1e-10));
        assert!(close(&l, &[-0.693147, 0.405465], 1e-6));
        assert!(matches!(
            log_series(&el(&[0.05, 1.0]), &cfg),
            Err(Error::RadiusViolation { .. })
        ));
        let short = LogSeriesConfig { max_terms: 3, ..cfg };
        assert_eq!(
            log_series(&el(&[0.5]), &short).unwrap_err(),
            Error::MaxTermsExceeded { max_terms: 3 }
        );
    }

    #[test]
    fn log_series_matches_ln_on_random_inputs() {
        let cfg = LogSeriesConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.random_range(1..=8);
            let f = sample::element(&mut rng, n, 0.1, 1.9);
            let l = log_series(&f, &cfg).unwrap();
            for (a, x) in l.values().iter().zip(f.values()) {
                assert!((a - x.ln()).abs() <= 10.0 * cfg.tol, "x={x}");
            }
            let back = l.map(f64::exp).unwrap();
            assert!(back.sub(&f).unwrap().norm() <= 1e-9);
        }
    }

    #[test]
    fn f_family_values() {
        let f = el(&[4.0, 1.0]);
        let v = eval_f(&OperatorFamily::PowerF { t: 2.0 }, &f).unwrap();
        assert!(close(&v, &[8.0, 0.5], 1e-12));
        assert_eq!(
            eval_f(&OperatorFamily::NegLog, &LatticeElement::unit(2)).unwrap(),
            LatticeElement::zeros(2)
        );
        let v = eval_f(&OperatorFamily::Entropy, &f).unwrap();
        assert!(close(&v, &[4.0 * 4f64.ln(), 0.0], 1e-12));
        assert!(close(&v, &[5.545177, 0.0], 1e-6));
        assert_eq!(
            eval_f(&OperatorFamily::PowerF { t: 0.5 }, &el(&[1.0, 0.0])).unwrap_err(),
            Error::NonPositiveInput { index: 1, value: 0.0 }
        );
        assert!(eval_f(&OperatorFamily::HalfSquare, &f).is_err());
        assert!(OperatorFamily::PowerF { t: 1.0 }.validate().is_err());
    }

    #[test]
    fn h_family_values() {
        let v = eval_h(&OperatorFamily::HalfSquare, &el(&[-2.0, 3.0])).unwrap();
        assert_eq!(v, el(&[2.0, 4.5]));
        let v = eval_h(&OperatorFamily::ExpH { t: 1.0 }, &LatticeElement::zeros(3)).unwrap();
        assert_eq!(v, LatticeElement::unit(3));
        let v = eval_h(&OperatorFamily::ExpH { t: 2.0 }, &el(&[0.5, 1.0])).unwrap();
        let e = std::f64::consts::E;
        assert!(close(&v, &[e / 4.0, e * e / 4.0], 1e-14));
        assert!(close(&v, &[0.679570, 1.847264], 1e-6));
        assert!(matches!(
            eval_h(&OperatorFamily::ExpH { t: 2.0 }, &el(&[400.0])),
            Err(Error::ExpOverflow { index: 0, .. })
        ));
    }

    #[test]
    fn family_dispatch() {
        assert_eq!(OperatorFamily::f_family(0.0).unwrap(), OperatorFamily::NegLog);
        assert_eq!(OperatorFamily::f_family(1.0).unwrap(), OperatorFamily::Entropy);
        assert_eq!(
            OperatorFamily::f_family(2.5).unwrap(),
            OperatorFamily::PowerF { t: 2.5 }
        );
        assert!(matches!(
            OperatorFamily::f_family(0.9999999),
            Err(Error::IllConditionedMidpoint { .. })
        ));
        assert_eq!(OperatorFamily::h_family(0.0).unwrap(), OperatorFamily::HalfSquare);
    }

    #[test]
    fn selector_json() {
        let fam: OperatorFamily = serde_json::from_str(r#"{"family":"PowerF","t":2.5}"#).unwrap();
        assert_eq!(fam, OperatorFamily::PowerF { t: 2.5 });
        assert_eq!(
            serde_json::to_string(&OperatorFamily::NegLog).unwrap(),
            r#"{"family":"NegLog"}"#
        );
        assert!(serde_json::to_string(&OperatorFamily::Custom(CustomMap::identity())).is_err());
    }

    #[test]
    fn second_derivative_examples() {
        let e2 = LatticeElement::unit(2);
        // quadratic: the second difference is exact up to roundoff ~ eps |F| / step^2
        let f = el(&[0.7, 3.0]);
        let sq = OperatorFamily::PowerF { t: 2.0 };
        let d = second_derivative_check(&sq, &f, &e2, 1e-3).unwrap();
        assert!(d <= 1e-9 * (1.0 + sq.apply(&f).unwrap().norm()), "{d}");
        let d = second_derivative_check(&OperatorFamily::PowerF { t: 3.0 }, &el(&[4.0, 1.0]), &e2, 1e-3).unwrap();
        assert!(d <= 1e-6, "{d}");
        let d =
            second_derivative_check(&OperatorFamily::ExpH { t: 1.0 }, &LatticeElement::zeros(2), &e2, 1e-3).unwrap();
        assert!(d <= 1e-6, "{d}");
        assert!(matches!(
            second_derivative_check(&OperatorFamily::HalfSquare, &e2, &e2, 1e-7),
            Err(Error::StepTooSmall { .. })
        ));
    }

    #[test]
    fn analytic_second_derivatives() {
        // f^(t-2) for every branch of the power family
        let x = 2.0f64;
        assert_eq!(OperatorFamily::PowerF { t: 3.0 }.scalar_second_derivative(x), x);
        assert_eq!(OperatorFamily::NegLog.scalar_second_derivative(x), x.powi(-2));
        assert_eq!(OperatorFamily::Entropy.scalar_second_derivative(x), x.powi(-1));
        assert_eq!(OperatorFamily::HalfSquare.scalar_second_derivative(x), 1.0);
    }

    #[test]
    fn convexity_examples() {
        let tol = OrderTolerance::default();
        let f = el(&[4.0, 1.0]);
        let g = el(&[1.0, 4.0]);
        let sq = OperatorFamily::PowerF { t: 2.0 };
        assert_eq!(convexity_probe(&sq, &f, &g, 0.5, &tol).unwrap(), OrderVerdict::Leq);
        let mid = sq.apply(&f.convex_combination(&g, 0.5).unwrap()).unwrap();
        assert!(close(&mid, &[3.125, 3.125], 1e-12));
        for lambda in [0.0, 1.0] {
            assert_eq!(convexity_probe(&sq, &f, &g, lambda, &tol).unwrap(), OrderVerdict::Equal);
        }
        assert_eq!(convexity_probe(&sq, &f, &f, 0.3, &tol).unwrap(), OrderVerdict::Equal);
        assert!(convexity_probe(&sq, &f, &g, 1.5, &tol).is_err());
    }

    #[test]
    fn convexity_holds_for_every_family() {
        let tol = OrderTolerance::default();
        let fams = [
            OperatorFamily::PowerF { t: -1.0 },
            OperatorFamily::PowerF { t: 0.5 },
            OperatorFamily::PowerF { t: 2.0 },
            OperatorFamily::PowerF { t: 3.0 },
            OperatorFamily::NegLog,
            OperatorFamily::Entropy,
            OperatorFamily::ExpH { t: 1.0 },
            OperatorFamily::ExpH { t: -1.0 },
            OperatorFamily::HalfSquare,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for fam in &fams {
            for _ in 0..200 {
                let n = rng.random_range(1..=6);
                let f = sample::element(&mut rng, n, 0.05, 5.0);
                let g = sample::element(&mut rng, n, 0.05, 5.0);
                let lambda = rng.random_range(0.0..=1.0);
                assert!(
                    convexity_probe(fam, &f, &g, lambda, &tol).unwrap().is_leq(),
                    "{}",
                    fam.name()
                );
            }
        }
    }
}
