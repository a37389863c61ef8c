//! Helpers shared by the integration suites.
#![allow(dead_code)]

use num::{BigInt, BigRational, One};
use shuffle_amp::clone_dists::CountDist;
use shuffle_amp::oracle::{exp_rational, rational_from_f64, to_f64, ExactDist};

/// `(eps0, e^eps0)` with the exponential held exactly: `ln 2` maps to 2,
/// other values to a 60-digit rational.
pub fn exact_exp(eps0: f64) -> BigRational {
    if eps0 == std::f64::consts::LN_2 {
        BigRational::from_integer(BigInt::from(2))
    } else {
        exp_rational(&rational_from_f64(eps0), 60)
    }
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn one() -> BigRational {
    BigRational::one()
}

/// Largest absolute difference between engine atoms and exact masses, over
/// the union of both supports. Only the first `arity` coordinates of the
/// exact outcomes are compared.
pub fn max_atom_gap(engine: &CountDist, exact: &ExactDist) -> f64 {
    let arity = engine.arity() as usize;
    let mut gap: f64 = 0.0;
    for (counts, lp) in engine.atoms() {
        let key: Vec<u32> = counts[..arity].iter().map(|&c| c as u32).collect();
        gap = gap.max((lp.prob() - to_f64(&exact.get(&key))).abs());
    }
    // exact atoms the engine never produced
    for (key, m) in exact.iter() {
        let counts = [key[0] as u64, key.get(1).copied().unwrap_or(0) as u64, key.get(2).copied().unwrap_or(0) as u64];
        if engine.mass(&counts).is_zero() {
            gap = gap.max(to_f64(m));
        }
    }
    gap
}

/// Projection onto the first `m` coordinates.
pub fn truncate_to(m: usize) -> impl FnMut(&[u32]) -> Vec<u32> {
    move |c: &[u32]| c[..m].to_vec()
}

/// Laws of the clone construction over symbols (0, 1, 2, rest):
/// `(user 1 under X0, user 1 under X1, everyone else)`.
pub fn clone_laws(
    e: &BigRational,
    p: &BigRational,
    q: &BigRational,
) -> (Vec<BigRational>, Vec<BigRational>, Vec<BigRational>) {
    let zero = BigRational::from_integer(BigInt::from(0));
    let mid = one() - e * p - p;
    let hi = vec![e * p, p.clone(), mid.clone(), zero.clone()];
    let lo = vec![p.clone(), e * p, mid, zero];
    let other = vec![p.clone(), p.clone(), q.clone(), one() - p - p - q];
    (hi, lo, other)
}
