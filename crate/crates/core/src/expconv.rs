//! Exponential convexity of the Jessen gap as a function of the family
//! exponent.
//!
//! For a fixed semigroup time `t`, the gap
//! `Lambda_p = Z(t)(F_p(f)) - F_p(Z(t)f)` (or the same with `H_p`) is the
//! Jessen residual of the convex operator `F_p`. Since
//! `sum_ij u_i u_j F''_{(p_i+p_j)/2}(f) = (sum_i u_i f^(p_i/2 - 1))^2 >= 0`,
//! the matrix `[Lambda_{(p_i+p_j)/2}]` is positive semidefinite in the
//! lattice order. For the componentwise order that means every coordinate
//! slice is a PSD real symmetric matrix, which is what [`check_order_psd`]
//! certifies, both spectrally and by sampling quadratic forms.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{FamilyKind, OperatorFamily};
use crate::jessen::{jessen_residual, require_normalized};
use crate::lattice::{LatticeElement, OrderTolerance, OrderVerdict};
use crate::report::{Check, Report};
use crate::semigroup::{evolve, Generator, SemigroupOperator};

/// Exponents `p_1..p_n` indexing one of the two families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    p: Vec<f64>,
    kind: FamilyKind,
}

impl ExponentSet {
    /// Validates every midpoint `(p_i + p_j)/2` against the family; the
    /// error names the first offending midpoint.
    pub fn new(p: Vec<f64>, kind: FamilyKind) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidParameter("exponent set is empty".into()));
        }
        let set = Self { p, kind };
        for i in 0..set.len() {
            for j in i..set.len() {
                OperatorFamily::member(kind, set.midpoint(i, j))?;
            }
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.p
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// `(p_i + p_j)/2`; symmetric in `i, j` bit for bit.
    pub fn midpoint(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.p[i] + self.p[j])
    }
}

fn lambda_for(z: &SemigroupOperator, f: &LatticeElement, kind: FamilyKind, p: f64) -> Result<LatticeElement> {
    let fam = OperatorFamily::member(kind, p)?;
    let (residual, _) = jessen_residual(z, &fam, f, &OrderTolerance::default())?;
    Ok(residual)
}

/// `Z(t)(F_p(f)) - F_p(Z(t)f)` (or with `H_p` for [`FamilyKind::H`]).
pub fn lambda_residual(
    gen: &Generator,
    f: &LatticeElement,
    kind: FamilyKind,
    p: f64,
    t: f64,
) -> Result<LatticeElement> {
    require_normalized(gen)?;
    lambda_for(&evolve(gen, t)?, f, kind, p)
}

/// The map `p -> Lambda_p` at a fixed time, evolving the semigroup once.
pub fn lambda_map(
    gen: &Generator,
    f: &LatticeElement,
    kind: FamilyKind,
    t: f64,
) -> Result<impl Fn(f64) -> Result<LatticeElement>> {
    require_normalized(gen)?;
    let z = evolve(gen, t)?;
    let f = f.clone();
    Ok(move |p: f64| lambda_for(&z, &f, kind, p))
}

/// Which semigroup time each Gram entry uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeCoupling {
    /// One `Z(t)` for the whole matrix.
    Fixed(f64),
    /// Entry `(i, j)` uses `Z((p_i + p_j)/2)`, tying time to the exponent.
    /// Reported only; no PSD guarantee is claimed for this reading.
    Coupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGram {
    pub p: Vec<f64>,
    pub kind: FamilyKind,
    pub coupling: TimeCoupling,
    pub entries: Vec<Vec<LatticeElement>>,
    /// One symmetric `n_p x n_p` matrix per lattice coordinate.
    #[serde(skip)]
    pub coordinate_matrices: Vec<DMatrix<f64>>,
    pub min_eigenvalues: Vec<f64>,
}

impl LambdaGram {
    pub fn size(&self) -> usize {
        self.p.len()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(LatticeElement::norm)
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn from_entries(set: &ExponentSet, coupling: TimeCoupling, entries: Vec<Vec<LatticeElement>>) -> Self {
        let n = set.len();
        let dim = entries[0][0].dim();
        let coordinate_matrices: Vec<DMatrix<f64>> = (0..dim)
            .map(|k| DMatrix::from_fn(n, n, |i, j| entries[i][j].get(k)))
            .collect();
        let min_eigenvalues = coordinate_matrices.iter().map(min_symmetric_eigenvalue).collect();
        Self {
            p: set.exponents().to_vec(),
            kind: set.kind(),
            coupling,
            entries,
            coordinate_matrices,
            min_eigenvalues,
        }
    }
}

/// Smallest eigenvalue of a symmetric matrix: closed form up to 2x2,
/// tridiagonal QR beyond.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => f64::INFINITY,
        1 => m[(0, 0)],
        2 => {
            let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
            let half_diff = 0.5 * (a - c);
            0.5 * (a + c) - half_diff.hypot(b)
        }
        _ => m.clone().symmetric_eigen().eigenvalues.min(),
    }
}

fn fill_gram(
    set: &ExponentSet,
    mut entry: impl FnMut(f64) -> Result<LatticeElement>,
) -> Result<Vec<Vec<LatticeElement>>> {
    let n = set.len();
    let mut upper: Vec<Vec<LatticeElement>> = Vec::with_capacity(n);
    for i in 0..n {
        upper.push((i..n).map(|j| entry(set.midpoint(i, j))).collect::<Result<_>>()?);
    }
    // entry (i, j) with j >= i sits at upper[i][j - i]
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j >= i {
                        upper[i][j - i].clone()
                    } else {
                        upper[j][i - j].clone()
                    }
                })
                .collect()
        })
        .collect())
}

/// `[Lambda_{(p_i+p_j)/2}]` at a fixed semigroup time `t`.
pub fn build_gram(gen: &Generator, f: &LatticeElement, t: f64, set: &ExponentSet) -> Result<LambdaGram> {
    require_normalized(gen)?;
    let z = evolve(gen, t)?;
    let entries = fill_gram(set, |p| lambda_for(&z, f, set.kind(), p))?;
    Ok(LambdaGram::from_entries(set, TimeCoupling::Fixed(t), entries))
}

/// Gram matrix under the coupled reading: entry `(i, j)` evolves for time
/// equal to its own midpoint exponent, which must be nonnegative.
pub fn build_gram_coupled(gen: &Generator, f: &LatticeElement, set: &ExponentSet) -> Result<LambdaGram> {
    require_normalized(gen)?;
    let entries = fill_gram(set, |p| lambda_for(&evolve(gen, p)?, f, set.kind(), p))?;
    Ok(LambdaGram::from_entries(set, TimeCoupling::Coupled, entries))
}

/// `sum_ij xi_i xi_j M_ij`, accumulated row by row.
pub fn quadratic_form(entries: &[Vec<LatticeElement>], xi: &[f64]) -> Result<LatticeElement> {
    if entries.len() != xi.len() {
        return Err(Error::DimensionMismatch {
            expected: entries.len(),
            found: xi.len(),
        });
    }
    let dim = entries.first().map(|r| r[0].dim()).unwrap_or(1);
    let mut acc = vec![0.0; dim];
    for (row, &xi_i) in entries.iter().zip(xi) {
        for (m, &xi_j) in row.iter().zip(xi) {
            let w = xi_i * xi_j;
            for (a, v) in acc.iter_mut().zip(m.values()) {
                *a += w * v;
            }
        }
    }
    LatticeElement::new(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub spectral_tol: f64,
    pub spectral_pass: bool,
    /// Smallest entry over all sampled quadratic forms.
    pub worst_sampled: f64,
    pub sampled_tol: f64,
    pub sampled_pass: bool,
    pub n_xi: usize,
}

impl PsdReport {
    pub fn passed(&self) -> bool {
        self.spectral_pass && self.sampled_pass
    }
}

/// Spectral certificate `min eig >= -tol (1 + max |entry|)` per coordinate,
/// and `n_xi` sampled forms `sum xi_i xi_j M_ij >= -tol e`.
pub fn check_order_psd(gram: &LambdaGram, n_xi: usize, seed: u64, tol: f64) -> Result<PsdReport> {
    let max_entry = gram.max_abs_entry();
    let min_eigenvalue = gram.min_eigenvalue();
    let spectral_tol = tol * (1.0 + max_entry);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let n = gram.size();
    for _ in 0..n_xi {
        let xi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        worst = worst.min(quadratic_form(&gram.entries, &xi)?.min_entry());
    }
    if n_xi == 0 {
        worst = 0.0;
    }
    Ok(PsdReport {
        min_eigenvalue,
        spectral_tol,
        spectral_pass: min_eigenvalue >= -spectral_tol,
        worst_sampled: worst,
        sampled_tol: tol,
        sampled_pass: worst >= -tol,
        n_xi,
    })
}

/// Closed parameter interval `I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ParamInterval {
    pub const REAL: Self = Self {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn check(&self, p: f64) -> Result<()> {
        if p >= self.lo && p <= self.hi {
            Ok(())
        } else {
            Err(Error::ParamOutOfDomain {
                p,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeMode {
    /// `sum xi_i xi_j H(x_i + x_j)`.
    Sum,
    /// `sum xi_i xi_j H((x_i + x_j)/2)`.
    Midpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub form: LatticeElement,
    /// The form compared with zero; GEQ or EQUAL means nonnegative.
    pub verdict: OrderVerdict,
}

impl ProbeOutcome {
    pub fn nonnegative(&self) -> bool {
        self.verdict.is_geq()
    }
}

fn probe_entries<H>(h: &H, xs: &[f64], mode: ProbeMode, domain: &ParamInterval) -> Result<Vec<Vec<LatticeElement>>>
where
    H: Fn(f64) -> Result<LatticeElement> + ?Sized,
{
    if mode == ProbeMode::Midpoint {
        for &x in xs {
            domain.check(x)?;
        }
    }
    let n = xs.len();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let arg = match mode {
                ProbeMode::Sum => xs[i] + xs[j],
                ProbeMode::Midpoint => 0.5 * (xs[i] + xs[j]),
            };
            domain.check(arg)?;
            row.push(h(arg)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Evaluates the exponential-convexity quadratic form of `h` in either the
/// sum or midpoint arrangement and compares it with zero.
pub fn exp_convexity_probe<H>(
    h: &H,
    xs: &[f64],
    xi: &[f64],
    mode: ProbeMode,
    domain: &ParamInterval,
    tol: &OrderTolerance,
) -> Result<ProbeOutcome>
where
    H: Fn(f64) -> Result<LatticeElement> + ?Sized,
{
    if xs.is_empty() || xs.len() != xi.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: xi.len(),
        });
    }
    let entries = probe_entries(h, xs, mode, domain)?;
    let form = quadratic_form(&entries, xi)?;
    let verdict = form.partial_leq(&LatticeElement::zeros(form.dim()), tol)?;
    Ok(ProbeOutcome { form, verdict })
}

/// Substitution identities behind the sum/midpoint equivalence:
/// the sum form on `{x}` equals the midpoint form on `{2x}`, and the
/// midpoint form on `{x}` equals the sum form on `{x/2}`.
pub fn midpoint_equivalence_check<H>(h: &H, xs: &[f64], xi: &[f64], domain: &ParamInterval, tol: f64) -> Result<Report>
where
    H: Fn(f64) -> Result<LatticeElement> + ?Sized,
{
    let loose = OrderTolerance::default();
    let doubled: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
    let halved: Vec<f64> = xs.iter().map(|x| 0.5 * x).collect();

    let sum = exp_convexity_probe(h, xs, xi, ProbeMode::Sum, &ParamInterval::REAL, &loose)?;
    let mid_doubled = exp_convexity_probe(h, &doubled, xi, ProbeMode::Midpoint, &ParamInterval::REAL, &loose)?;
    let mid = exp_convexity_probe(h, xs, xi, ProbeMode::Midpoint, domain, &loose)?;
    let sum_halved = exp_convexity_probe(h, &halved, xi, ProbeMode::Sum, domain, &loose)?;

    // the sum arrangement needs x_i + x_j in I
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            domain.check(xs[i] + xs[j])?;
        }
    }

    let mut report = Report::default();
    report.push(Check::within(
        "sum_equals_midpoint_of_doubled",
        sum.form.sub(&mid_doubled.form)?.norm(),
        tol,
    ));
    report.push(Check::within(
        "midpoint_equals_sum_of_halved",
        mid.form.sub(&sum_halved.form)?.norm(),
        tol,
    ));
    Ok(report)
}

/// `max_p |H(p + dp) - H(p)|` over `grid`, for each step in `steps`. A finite
/// modulus of continuity; it does not establish the limit.
pub fn continuity_modulus<H>(h: &H, grid: &[f64], steps: &[f64]) -> Result<Vec<(f64, f64)>>
where
    H: Fn(f64) -> Result<LatticeElement> + ?Sized,
{
    steps
        .iter()
        .map(|&dp| {
            let mut worst = 0.0f64;
            for &p in grid {
                worst = worst.max(h(p + dp)?.sub(&h(p)?)?.norm());
            }
            Ok((dp, worst))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateSlice {
    pub index: usize,
    pub matrix: Vec<Vec<f64>>,
    pub min_eig: f64,
}

/// JSON export of a Gram matrix: `{p, t, coordinates: [{index, matrix, min_eig}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramExport {
    pub p: Vec<f64>,
    pub t: Option<f64>,
    pub coordinates: Vec<CoordinateSlice>,
}

impl From<&LambdaGram> for GramExport {
    fn from(g: &LambdaGram) -> Self {
        let coordinates = g
            .coordinate_matrices
            .iter()
            .zip(&g.min_eigenvalues)
            .enumerate()
            .map(|(index, (m, &min_eig))| CoordinateSlice {
                index,
                matrix: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
                min_eig,
            })
            .collect();
        Self {
            p: g.p.clone(),
            t: match g.coupling {
                TimeCoupling::Fixed(t) => Some(t),
                TimeCoupling::Coupled => None,
            },
            coordinates,
        }
    }
}

/// CSV rows `p_i,p_j,coordinate,value` for plotting.
pub fn gram_csv(g: &LambdaGram) -> String {
    let mut out = String::from("p_i,p_j,coordinate,value\n");
    for (i, row) in g.entries.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            for (k, v) in e.values().iter().enumerate() {
                out.push_str(&format!("{},{},{},{:e}\n", g.p[i], g.p[j], k, v));
            }
        }
    }
    out
}
