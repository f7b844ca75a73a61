//! The concrete unital Banach lattice algebra: real vectors over a finite
//! index set, ordered componentwise, multiplied pointwise, with unit
//! `e = (1, ..., 1)` and the supremum norm.
//!
//! With the sup norm this is `C(K)` for a finite discrete `K`, so `|e| = 1`
//! and the norm is submultiplicative. The order is exact in theory; in
//! floating point every comparison goes through [`OrderTolerance`] and returns
//! a four-valued [`OrderVerdict`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension and optional coordinate labels of a lattice algebra.
///
/// This is the sidecar metadata that accompanies serialized elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeAlgebra {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<f64>>,
}

impl LatticeAlgebra {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { dim, labels: None })
    }

    pub fn with_labels(labels: Vec<f64>) -> Result<Self> {
        let mut alg = Self::new(labels.len())?;
        alg.labels = Some(labels);
        Ok(alg)
    }

    pub fn unit(&self) -> LatticeElement {
        LatticeElement::unit(self.dim)
    }

    pub fn zero(&self) -> LatticeElement {
        LatticeElement::zeros(self.dim)
    }

    pub fn element(&self, values: Vec<f64>) -> Result<LatticeElement> {
        check_dim(self.dim, values.len())?;
        LatticeElement::new(values)
    }
}

/// An element `f` of the lattice algebra. Entries are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LatticeElement {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for LatticeElement {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<LatticeElement> for Vec<f64> {
    fn from(f: LatticeElement) -> Self {
        f.values
    }
}

/// Tolerance used to relax the lattice order in floating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderTolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for OrderTolerance {
    fn default() -> Self {
        Self {
            atol: 1e-9,
            rtol: 1e-12,
        }
    }
}

impl OrderTolerance {
    pub fn new(atol: f64, rtol: f64) -> Result<Self> {
        if !(atol >= 0.0 && rtol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be nonnegative (atol={atol}, rtol={rtol})"
            )));
        }
        Ok(Self { atol, rtol })
    }

    /// The slack `atol + rtol * max(|f|, |g|)` used when comparing `f` and `g`.
    pub fn epsilon(&self, f: &LatticeElement, g: &LatticeElement) -> f64 {
        self.atol + self.rtol * f.norm().max(g.norm())
    }
}

/// Outcome of comparing two elements in the partial order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OrderVerdict {
    Leq,
    Geq,
    Equal,
    Incomparable,
}

impl OrderVerdict {
    /// `f <= g` holds (strictly below or equal).
    pub fn is_leq(self) -> bool {
        matches!(self, OrderVerdict::Leq | OrderVerdict::Equal)
    }

    pub fn is_geq(self) -> bool {
        matches!(self, OrderVerdict::Geq | OrderVerdict::Equal)
    }
}

impl std::fmt::Display for OrderVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OrderVerdict::Leq => "LEQ",
            OrderVerdict::Geq => "GEQ",
            OrderVerdict::Equal => "EQUAL",
            OrderVerdict::Incomparable => "INCOMPARABLE",
        };
        f.write_str(s)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

impl LatticeElement {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { values })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            values: vec![1.0; dim.max(1)],
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim.max(1)],
        }
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Applies `op` pointwise and validates that the result is finite.
    pub fn map(&self, op: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&x| op(x)).collect())
    }

    pub fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Self::new(self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect())
    }

    /// Supremum `sup(f, g)`.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, f64::max)
    }

    /// Infimum `inf(f, g)`.
    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, f64::min)
    }

    pub fn abs_val(&self) -> Self {
        Self {
            values: self.values.iter().map(|x| x.abs()).collect(),
        }
    }

    pub fn pos_part(&self) -> Self {
        Self {
            values: self.values.iter().map(|&x| x.max(0.0)).collect(),
        }
    }

    pub fn neg_part(&self) -> Self {
        Self {
            values: self.values.iter().map(|&x| (-x).max(0.0)).collect(),
        }
    }

    /// Supremum norm `max_i |f_i|`.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Pointwise product; the algebra multiplication.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|x| c * x)
    }

    pub fn neg(&self) -> Self {
        Self {
            values: self.values.iter().map(|x| -x).collect(),
        }
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn convex_combination(&self, other: &Self, lambda: f64) -> Result<Self> {
        self.zip_with(other, |a, b| lambda * a + (1.0 - lambda) * b)
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact componentwise `self >= 0`.
    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&x| x >= 0.0)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|&x| x > 0.0)
    }

    /// Dual pairing `<x*, f> = sum_i x*_i f_i`.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    /// Compares `self` with `other` in the tolerance-relaxed lattice order.
    pub fn partial_leq(&self, other: &Self, tol: &OrderTolerance) -> Result<OrderVerdict> {
        check_dim(self.dim(), other.dim())?;
        let eps = tol.epsilon(self, other);
        let mut leq = true;
        let mut geq = true;
        for (&a, &b) in self.values.iter().zip(&other.values) {
            if a > b + eps {
                leq = false;
            }
            if b > a + eps {
                geq = false;
            }
        }
        Ok(match (leq, geq) {
            (true, true) => OrderVerdict::Equal,
            (true, false) => OrderVerdict::Leq,
            (false, true) => OrderVerdict::Geq,
            (false, false) => OrderVerdict::Incomparable,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(v: &[f64]) -> LatticeElement {
        LatticeElement::new(v.to_vec()).unwrap()
    }

    #[test]
    fn join_and_meet() {
        assert_eq!(el(&[1.0, -2.0]).join(&el(&[0.0, 3.0])).unwrap(), el(&[1.0, 3.0]));
        assert_eq!(el(&[1.0, -2.0]).meet(&el(&[0.0, 3.0])).unwrap(), el(&[0.0, -2.0]));
        let f = el(&[-1.0, 0.0, 2.0]);
        assert_eq!(f.join(&LatticeElement::zeros(3)).unwrap(), el(&[0.0, 0.0, 2.0]));
        assert_eq!(f.join(&f).unwrap(), f);
        assert_eq!(f.meet(&f).unwrap(), f);
    }

    #[test]
    fn parts_and_abs() {
        let f = el(&[-2.0, 3.0]);
        assert_eq!(f.abs_val(), el(&[2.0, 3.0]));
        assert_eq!(f.pos_part(), el(&[0.0, 3.0]));
        assert_eq!(f.neg_part(), el(&[2.0, 0.0]));
        assert_eq!(f.pos_part().sub(&f.neg_part()).unwrap(), f);
    }

    #[test]
    fn norm_and_multiply() {
        assert_eq!(el(&[-2.0, 3.0]).norm(), 3.0);
        assert_eq!(LatticeElement::unit(4).norm(), 1.0);
        let f = el(&[1.0, 2.0]);
        let g = el(&[3.0, -1.0]);
        assert!(f.multiply(&g).unwrap().norm() <= f.norm() * g.norm());
        assert_eq!(f.multiply(&el(&[3.0, 4.0])).unwrap(), el(&[3.0, 8.0]));
        assert_eq!(LatticeElement::unit(2).multiply(&g).unwrap(), g);
        // zero divisors
        assert_eq!(el(&[1.0, 0.0]).multiply(&el(&[0.0, 1.0])).unwrap(), el(&[0.0, 0.0]));
    }

    #[test]
    fn verdicts() {
        let tol = OrderTolerance::default();
        assert_eq!(
            el(&[0.0, 1.0]).partial_leq(&el(&[1.0, 2.0]), &tol).unwrap(),
            OrderVerdict::Leq
        );
        assert_eq!(
            el(&[1.0, 2.0]).partial_leq(&el(&[0.0, 1.0]), &tol).unwrap(),
            OrderVerdict::Geq
        );
        assert_eq!(
            el(&[0.0, 2.0]).partial_leq(&el(&[1.0, 1.0]), &tol).unwrap(),
            OrderVerdict::Incomparable
        );
        let f = el(&[0.3, -1.7]);
        let g = f.add(&LatticeElement::unit(2).scale(1e-13).unwrap()).unwrap();
        assert_eq!(f.partial_leq(&g, &tol).unwrap(), OrderVerdict::Equal);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            LatticeElement::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(matches!(
            LatticeElement::new(vec![f64::INFINITY]),
            Err(Error::NonFinite { .. })
        ));
        assert_eq!(LatticeElement::new(vec![]), Err(Error::ZeroDimension));
        assert_eq!(LatticeAlgebra::new(0), Err(Error::ZeroDimension));
        let err = el(&[1.0]).join(&el(&[1.0, 2.0])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 1, found: 2 });
        assert!(OrderTolerance::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn json_shapes() {
        let f = el(&[0.5, -1.0]);
        assert_eq!(serde_json::to_string(&f).unwrap(), "[0.5,-1.0]");
        let back: LatticeElement = serde_json::from_str("[0.5,-1.0]").unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<LatticeElement>("[]").is_err());
        let alg = LatticeAlgebra::with_labels(vec![0.0, 1.0]).unwrap();
        assert_eq!(serde_json::to_string(&alg).unwrap(), r#"{"dim":2,"labels":[0.0,1.0]}"#);
        assert_eq!(alg.unit().multiply(&f).unwrap(), f);
    }

    fn pair(n: usize) -> impl Strategy<Value = (LatticeElement, LatticeElement)> {
        (
            prop::collection::vec(-100.0..100.0f64, n),
            prop::collection::vec(-100.0..100.0f64, n),
        )
            .prop_map(|(a, b)| (el(&a), el(&b)))
    }

    proptest! {
        #[test]
        fn meet_below_join((f, g) in (1usize..8).prop_flat_map(pair)) {
            let lo = f.meet(&g).unwrap();
            let hi = f.join(&g).unwrap();
            for i in 0..f.dim() {
                prop_assert!(lo.get(i) <= f.get(i) && f.get(i) <= hi.get(i));
                prop_assert!(lo.get(i) <= g.get(i) && g.get(i) <= hi.get(i));
                prop_assert_eq!(lo.get(i) + hi.get(i), f.get(i) + g.get(i));
            }
        }

        #[test]
        fn decomposition_is_exact((f, _g) in (1usize..8).prop_flat_map(pair)) {
            prop_assert_eq!(f.pos_part().sub(&f.neg_part()).unwrap(), f.clone());
            prop_assert_eq!(f.pos_part().add(&f.neg_part()).unwrap(), f.abs_val());
        }

        #[test]
        fn norm_is_lattice_norm((f, g) in (1usize..8).prop_flat_map(pair)) {
            let (a, b) = (f.abs_val(), g.abs_val());
            if a.values().iter().zip(b.values()).all(|(x, y)| x <= y) {
                prop_assert!(f.norm() <= g.norm());
            }
            // |min(|f|,|g|)| <= |g| always
            let m = a.meet(&b).unwrap();
            prop_assert!(m.norm() <= g.norm());
        }

        #[test]
        fn positive_cone_closed((f, g) in (1usize..8).prop_flat_map(pair)) {
            prop_assert!(f.abs_val().multiply(&g.abs_val()).unwrap().is_positive());
        }

        #[test]
        fn translation_invariance(
            (f, g, h) in (1usize..8).prop_flat_map(|n| (pair(n), prop::collection::vec(-1.0..1.0f64, n)))
                .prop_map(|((f, g), h)| (f, g, el(&h)))
        ) {
            let tol = OrderTolerance::default();
            prop_assert_eq!(
                f.partial_leq(&g, &tol).unwrap(),
                f.add(&h).unwrap().partial_leq(&g.add(&h).unwrap(), &tol).unwrap()
            );
        }
    }
}
