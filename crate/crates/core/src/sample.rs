//! Seeded random instances used by the property suites and the CLI.

use nalgebra::DMatrix;
use rand::Rng;

use crate::lattice::LatticeElement;
use crate::semigroup::{validate_generator, Generator};

/// Off-diagonal rates, each present with probability 0.7, scaled so that the
/// largest exit rate is at most `max_norm / 2` (the conservative completion
/// then has `|Q|_inf <= max_norm`).
fn rates<R: Rng + ?Sized>(rng: &mut R, n: usize, max_norm: f64) -> DMatrix<f64> {
    let mut q = DMatrix::from_fn(n, n, |i, j| {
        if i != j && rng.random_bool(0.7) {
            rng.random_range(0.0..1.0)
        } else {
            0.0
        }
    });
    let max_exit = q.row_iter().map(|r| r.sum()).fold(0.0, f64::max);
    if max_exit > 0.0 {
        let target = max_norm / 2.0 * rng.random_range(0.1..=1.0);
        q *= target / max_exit;
    }
    q
}

/// Random Markov generator on `2..=max_n` states with `|Q|_inf <= max_norm`.
pub fn conservative_generator<R: Rng + ?Sized>(rng: &mut R, max_n: usize, max_norm: f64) -> Generator {
    let n = rng.random_range(2..=max_n.max(2));
    let mut q = rates(rng, n, max_norm);
    for i in 0..n {
        let exit: f64 = (0..n).filter(|&j| j != i).map(|j| q[(i, j)]).sum();
        q[(i, i)] = -exit;
    }
    validate_generator(&q).expect("sampled generator is Metzler")
}

/// Metzler generator whose row sums are all `<= 0`, some strictly.
pub fn sub_conservative_generator<R: Rng + ?Sized>(rng: &mut R, max_n: usize, max_norm: f64) -> Generator {
    let n = rng.random_range(2..=max_n.max(2));
    let mut q = rates(rng, n, max_norm);
    for i in 0..n {
        let exit: f64 = (0..n).filter(|&j| j != i).map(|j| q[(i, j)]).sum();
        let killing = if rng.random_bool(0.5) {
            rng.random_range(0.0..1.0)
        } else {
            0.0
        };
        q[(i, i)] = -exit - killing;
    }
    validate_generator(&q).expect("sampled generator is Metzler")
}

/// Metzler generator with at least one strictly positive row sum, so that
/// `Z(t)e != e`.
pub fn non_conservative_generator<R: Rng + ?Sized>(rng: &mut R, max_n: usize, max_norm: f64) -> Generator {
    let n = rng.random_range(2..=max_n.max(2));
    let mut q = rates(rng, n, max_norm);
    let boosted = rng.random_range(0..n);
    for i in 0..n {
        let exit: f64 = (0..n).filter(|&j| j != i).map(|j| q[(i, j)]).sum();
        let surplus = if i == boosted {
            rng.random_range(0.2..1.0)
        } else {
            rng.random_range(0.0..0.5)
        };
        q[(i, i)] = -exit + surplus;
    }
    validate_generator(&q).expect("sampled generator is Metzler")
}

/// Uniform element of the box `[lo, hi]^n`.
pub fn element<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> LatticeElement {
    LatticeElement::new((0..n).map(|_| rng.random_range(lo..=hi)).collect()).expect("finite box")
}
