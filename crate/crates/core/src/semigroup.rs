//! Positive semigroups `Z(t) = exp(tQ)` generated by Metzler matrices.
//!
//! In finite dimension the positive minimum principle for a generator is
//! exactly the condition that every off-diagonal entry is nonnegative, and
//! the semigroup is normalized (`Z(t)e = e`) exactly when every row of `Q`
//! sums to zero.
//!
//! The exponential is computed by uniformization: with `lambda >= max |Q_ii|`
//! the matrix `P = I + Q/lambda` is entrywise nonnegative and
//!
//! ```text
//! exp(tQ) = sum_k  exp(-lambda t) (lambda t)^k / k!  P^k
//! ```
//!
//! is a sum of nonnegative matrices, so positivity of the result holds by
//! construction rather than up to roundoff. Large `lambda t` is split into
//! `2^k` equal pieces whose results are squared back together; products of
//! nonnegative matrices stay nonnegative.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeElement, OrderTolerance};
use crate::report::{Check, Report};

/// Absolute tolerance on row sums for a generator to count as conservative.
pub const CONSERVATIVE_TOL: f64 = 1e-12;
/// Default cap on `t * |Q|_inf` accepted by [`evolve`].
pub const DEFAULT_TIME_CAP: f64 = 1e4;
/// Largest `lambda * tau` handled by a single uniformization series.
const MAX_PIECE: f64 = 8.0;
/// Relative Poisson-tail budget for the whole evolution.
const TAIL_BUDGET: f64 = 1e-17;
/// Negative entries within this band are treated as roundoff and clamped.
const CLAMP_BAND: f64 = 1e-12;

/// A validated generator: square, finite, off-diagonal entries nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    q: DMatrix<f64>,
    conservative: bool,
    name: Option<String>,
}

/// JSON form of a generator: `{"q": [[...]], "name": "..."}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub q: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<Generator> {
        let n = self.q.len();
        if n == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        if let Some(row) = self.q.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: row.len(),
            });
        }
        let q = DMatrix::from_fn(n, n, |i, j| self.q[i][j]);
        let mut gen = validate_generator(&q)?;
        gen.name = self.name.clone();
        Ok(gen)
    }
}

/// Checks the positive minimum principle and records whether rows sum to zero.
pub fn validate_generator(q: &DMatrix<f64>) -> Result<Generator> {
    let (rows, cols) = q.shape();
    if rows != cols || rows == 0 {
        return Err(Error::NotSquare { rows, cols });
    }
    for i in 0..rows {
        for j in 0..cols {
            let v = q[(i, j)];
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    index: i * cols + j,
                    value: v,
                });
            }
            if i != j && v < 0.0 {
                return Err(Error::NegativeOffDiagonal {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    let conservative = q.row_iter().all(|r| r.sum().abs() <= CONSERVATIVE_TOL);
    Ok(Generator {
        q: q.clone(),
        conservative,
        name: None,
    })
}

impl Generator {
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        GeneratorSpec {
            q: rows.iter().map(|r| r.to_vec()).collect(),
            name: None,
        }
        .validate()
    }

    /// The zero generator on `n` states; its semigroup is the identity.
    pub fn zero(n: usize) -> Self {
        Self {
            q: DMatrix::zeros(n, n),
            conservative: true,
            name: None,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn is_conservative(&self) -> bool {
        self.conservative
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.q.row_iter().map(|r| r.sum()).collect()
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        self.row_sums().into_iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Every row sum `<= 0`, the condition under which `Z(t)` is a contraction.
    pub fn is_sub_conservative(&self) -> bool {
        self.row_sums().into_iter().all(|s| s <= CONSERVATIVE_TOL)
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn norm(&self) -> f64 {
        inf_norm(&self.q)
    }

    pub fn apply(&self, f: &LatticeElement) -> Result<LatticeElement> {
        mat_vec(&self.q, f)
    }

    pub fn to_spec(&self) -> GeneratorSpec {
        GeneratorSpec {
            q: self.q.row_iter().map(|r| r.iter().copied().collect()).collect(),
            name: self.name.clone(),
        }
    }
}

/// `Z(t)` together with the time and a bound on the series truncation error.
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupOperator {
    matrix: DMatrix<f64>,
    t: f64,
    trunc_error: f64,
}

impl SemigroupOperator {
    /// Wraps an explicit operator matrix (used by the example scenes).
    pub fn from_matrix(matrix: DMatrix<f64>, t: f64) -> Self {
        Self {
            matrix,
            t,
            trunc_error: 0.0,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn trunc_error(&self) -> f64 {
        self.trunc_error
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, f: &LatticeElement) -> Result<LatticeElement> {
        mat_vec(&self.matrix, f)
    }

    /// The adjoint action on the dual, `Z*(t) x* = Z(t)^T x*`.
    pub fn apply_adjoint(&self, fstar: &LatticeElement) -> Result<LatticeElement> {
        mat_vec(&self.matrix.transpose(), fstar)
    }

    pub fn is_entrywise_nonnegative(&self) -> bool {
        self.matrix.iter().all(|&x| x >= 0.0)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.row_iter().map(|r| r.sum()).collect()
    }
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, f: &LatticeElement) -> Result<LatticeElement> {
    if m.ncols() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.ncols(),
            found: f.dim(),
        });
    }
    let v = DVector::from_column_slice(f.values());
    LatticeElement::new((m * v).iter().copied().collect())
}

pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    /// Maximum accepted `t * |Q|_inf`.
    pub time_cap: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            time_cap: DEFAULT_TIME_CAP,
        }
    }
}

/// `Z(t) = exp(tQ)` by uniformization with the default time cap.
pub fn evolve(gen: &Generator, t: f64) -> Result<SemigroupOperator> {
    evolve_with(gen, t, &EvolveConfig::default())
}

pub fn evolve_with(gen: &Generator, t: f64, cfg: &EvolveConfig) -> Result<SemigroupOperator> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    let n = gen.dim();
    let q = gen.matrix();
    let qnorm = gen.norm();
    let scaled = t * qnorm;
    if scaled > cfg.time_cap {
        return Err(Error::Overflow {
            scaled,
            cap: cfg.time_cap,
        });
    }
    if qnorm == 0.0 || t == 0.0 {
        return Ok(SemigroupOperator::from_matrix(DMatrix::identity(n, n), t));
    }

    let mut lambda = (0..n).map(|i| q[(i, i)].abs()).fold(0.0, f64::max);
    if lambda == 0.0 {
        lambda = qnorm;
    }
    let mut p = DMatrix::identity(n, n) + q / lambda;
    p.iter_mut().for_each(|x| *x = x.max(0.0));
    let rho = inf_norm(&p).max(1.0);

    let mu = lambda * t;
    let mut squarings = 0u32;
    while mu / f64::from(1u32 << squarings) > MAX_PIECE {
        squarings += 1;
    }
    let pieces = f64::from(1u32 << squarings);
    let (mut z, tail) = uniformized_series(&p, mu / pieces, rho, TAIL_BUDGET / pieces);
    let piece_norm = inf_norm(&z);
    for _ in 0..squarings {
        z = &z * &z;
    }
    // first-order perturbation bound for the product of `pieces` factors
    let trunc_error = pieces * tail * piece_norm.powf(pieces - 1.0);

    for x in z.iter_mut() {
        if *x < 0.0 && *x >= -CLAMP_BAND {
            *x = 0.0;
        }
    }
    Ok(SemigroupOperator {
        matrix: z,
        t,
        trunc_error,
    })
}

/// Sums `exp(-mu) sum_k mu^k/k! P^k` until the remaining tail, bounded using
/// `|P^k| <= rho^k`, drops below `rel_tol` times the partial sum's norm.
/// Returns the sum and the absolute tail bound.
fn uniformized_series(p: &DMatrix<f64>, mu: f64, rho: f64, rel_tol: f64) -> (DMatrix<f64>, f64) {
    let n = p.nrows();
    let mut weight = (-mu).exp();
    let mut power = DMatrix::identity(n, n);
    let mut sum = &power * weight;
    let mut k = 0usize;
    loop {
        let next_weight = weight * mu / (k + 1) as f64;
        let next_term_bound = next_weight * rho.powi(k as i32 + 1);
        let ratio = mu * rho / (k + 2) as f64;
        if ratio < 1.0 {
            let tail = next_term_bound / (1.0 - ratio);
            if tail <= rel_tol * inf_norm(&sum) {
                return (sum, tail);
            }
        }
        k += 1;
        weight = next_weight;
        power = &power * p;
        sum += &power * weight;
    }
}

/// Scaling-and-squaring Padé exponential; a cross-check for [`evolve`] only.
pub fn evolve_reference(gen: &Generator, t: f64) -> DMatrix<f64> {
    (gen.matrix() * t).exp()
}

/// Semigroup law, identity at zero and a strong-continuity sweep for `f`.
pub fn check_semigroup_axioms(gen: &Generator, s: f64, t: f64, f: &LatticeElement, tol: f64) -> Result<Report> {
    let n = gen.dim();
    let zs = evolve(gen, s)?;
    let zt = evolve(gen, t)?;
    let zst = evolve(gen, s + t)?;
    let mut report = Report::default();

    let comp = inf_norm(&(zs.matrix() * zt.matrix() - zst.matrix()));
    report.push(Check::within("composition", comp, tol));

    let z0 = evolve(gen, 0.0)?;
    let id = inf_norm(&(z0.matrix() - DMatrix::<f64>::identity(n, n)));
    report.push(Check::within("identity_at_zero", id, tol));

    let sweep = continuity_sweep(gen, f)?;
    let monotone = sweep.windows(2).all(|w| w[1].1 <= w[0].1 + tol);
    let last = sweep.last().map(|x| x.1).unwrap_or(0.0);
    report.push(
        Check::new("strong_continuity_trend", monotone, last, tol)
            .with_note("finite sweep h = 1e-1 .. 1e-6 of |Z(h)f - f|; a trend, not a limit"),
    );
    Ok(report)
}

/// `|Z(h)f - f|` for `h = 1e-1, ..., 1e-6`.
pub fn continuity_sweep(gen: &Generator, f: &LatticeElement) -> Result<Vec<(f64, f64)>> {
    (1..=6)
        .map(|k| {
            let h = 10f64.powi(-k);
            let zf = evolve(gen, h)?.apply(f)?;
            Ok((h, zf.sub(f)?.norm()))
        })
        .collect()
}

/// Normalization `Z(t)e = e`, the positivity inequality `|Z f| <= Z|f|`
/// and the contraction criterion `|(Z f)^+| <= |f^+|`.
pub fn check_positivity_and_normalization(
    gen: &Generator,
    t: f64,
    f: &LatticeElement,
    tol: &OrderTolerance,
) -> Result<Report> {
    let z = evolve(gen, t)?;
    let e = LatticeElement::unit(gen.dim());
    let mut report = Report::default();

    let norm_defect = z.apply(&e)?.sub(&e)?.norm();
    report.push(Check::within("normalization", norm_defect, tol.atol));

    let lhs = z.apply(f)?.abs_val();
    let rhs = z.apply(&f.abs_val())?;
    let verdict = lhs.partial_leq(&rhs, tol)?;
    let slack = rhs.sub(&lhs)?.min_entry();
    report.push(
        Check::new(
            "positivity",
            verdict.is_leq(),
            (-slack).max(0.0),
            tol.epsilon(&lhs, &rhs),
        )
        .with_note(format!("|Z(t)f| vs Z(t)|f|: {verdict}")),
    );

    let pos_after = z.apply(f)?.pos_part().norm();
    let pos_before = f.pos_part().norm();
    let excess = (pos_after - pos_before).max(0.0);
    report.push(Check::within("contraction", excess, tol.atol));
    Ok(report)
}

/// `|(Z(h) - I)f / h - Qf|`, the defect of the difference quotient `A_h f`.
pub fn estimate_generator(gen: &Generator, h: f64, f: &LatticeElement) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::NonPositiveStep(h));
    }
    let zf = evolve(gen, h)?.apply(f)?;
    let quotient = zf.sub(f)?.scale(1.0 / h)?;
    Ok(quotient.sub(&gen.apply(f)?)?.norm())
}
