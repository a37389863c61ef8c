//! Brute-force exact laws of shuffled outputs at toy scale.
//!
//! Every user is an independent categorical variable over a few symbols with
//! exact rational probabilities; the shuffled output is summarized by its
//! count vector, whose law is obtained by repeated convolution. Nothing here
//! shares code with the floating-point engines, so it can serve as their
//! reference.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Limits on the enumeration size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_n: usize,
    pub max_k: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_n: 8, max_k: 4 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{what} = {value} exceeds the cap {cap}")]
    SizeCap { what: &'static str, value: usize, cap: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("outcome {0:?} has mass under P but not under Q")]
    MissingSupport(Vec<u32>),
}

/// Exact law over count vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDist {
    mass: BTreeMap<Vec<u32>, BigRational>,
}

impl ExactDist {
    /// Point mass at the all-zero vector of length `symbols`.
    fn unit(symbols: usize) -> Self {
        let mut mass = BTreeMap::new();
        mass.insert(vec![0; symbols], BigRational::one());
        ExactDist { mass }
    }

    pub fn get(&self, outcome: &[u32]) -> BigRational {
        self.mass.get(outcome).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.mass.iter()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn total(&self) -> BigRational {
        self.mass.values().fold(BigRational::zero(), |acc, m| acc + m)
    }

    /// Pushes the law forward through `g`.
    pub fn project<F>(&self, mut g: F) -> ExactDist
    where
        F: FnMut(&[u32]) -> Vec<u32>,
    {
        let mut mass: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (k, m) in &self.mass {
            *mass.entry(g(k)).or_insert_with(BigRational::zero) += m;
        }
        ExactDist { mass }
    }

    /// Adds one independent user with output law `law` (indexed by symbol).
    fn convolve(&self, law: &[BigRational]) -> ExactDist {
        let mut mass: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (k, m) in &self.mass {
            for (sym, w) in law.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                let mut key = k.clone();
                key[sym] += 1;
                *mass.entry(key).or_insert_with(BigRational::zero) += m * w;
            }
        }
        ExactDist { mass }
    }
}

fn check_law(law: &[BigRational], symbols: usize) -> Result<(), OracleError> {
    if law.len() != symbols {
        return Err(OracleError::InvalidInput(format!("law has {} symbols, expected {symbols}", law.len())));
    }
    if law.iter().any(|w| w.is_negative()) {
        return Err(OracleError::InvalidInput("negative probability".into()));
    }
    let total = law.iter().fold(BigRational::zero(), |acc, w| acc + w);
    if !total.is_one() {
        return Err(OracleError::InvalidInput(format!("law sums to {total}, not 1")));
    }
    Ok(())
}

/// Law of the count vector of independent users with the given output laws.
pub fn exact_shuffled(laws: &[Vec<BigRational>], caps: Caps) -> Result<ExactDist, OracleError> {
    let Some(first) = laws.first() else {
        return Err(OracleError::InvalidInput("no users".into()));
    };
    if laws.len() > caps.max_n {
        return Err(OracleError::SizeCap { what: "n", value: laws.len(), cap: caps.max_n });
    }
    let symbols = first.len();
    let mut dist = ExactDist::unit(symbols);
    for law in laws {
        check_law(law, symbols)?;
        dist = dist.convolve(law);
    }
    Ok(dist)
}

/// Output law of k-ary randomized response on input `x` (0-based), given
/// `e = e^eps0`.
pub fn krr_law(e: &BigRational, k: usize, x: usize) -> Vec<BigRational> {
    let denom = e + BigRational::from_integer(BigInt::from(k - 1));
    (0..k)
        .map(|s| if s == x { e / &denom } else { BigRational::one() / &denom })
        .collect()
}

/// Exact law of the counts of shuffled k-ary randomized response reports on
/// dataset `data` (0-based values).
pub fn exact_shuffled_krr(e: &BigRational, k: usize, data: &[usize], caps: Caps) -> Result<ExactDist, OracleError> {
    if k < 2 {
        return Err(OracleError::InvalidInput(format!("k must be >= 2, got {k}")));
    }
    if k > caps.max_k {
        return Err(OracleError::SizeCap { what: "k", value: k, cap: caps.max_k });
    }
    if let Some(&bad) = data.iter().find(|&&x| x >= k) {
        return Err(OracleError::InvalidInput(format!("value {bad} outside [0, {k})")));
    }
    if e < &BigRational::one() {
        return Err(OracleError::InvalidInput("e^eps0 must be >= 1".into()));
    }
    let laws: Vec<_> = data.iter().map(|&x| krr_law(e, k, x)).collect();
    exact_shuffled(&laws, caps)
}

/// Projection onto the counts of symbols 0 and 1.
pub fn first_two_counts(counts: &[u32]) -> Vec<u32> {
    vec![counts[0], counts[1]]
}

/// Datasets `(X0, X1)` whose projected laws give the lower-bound pair: the
/// first user holds 0 or 1 and everyone else holds `k - 1`. For `k = 2` the
/// second dataset is therefore constant.
pub fn lower_bound_datasets(k: usize, n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut x0 = vec![k - 1; n];
    let mut x1 = vec![k - 1; n];
    x0[0] = 0;
    x1[0] = 1;
    (x0, x1)
}

/// `sum max(0, P - e^eps Q)` with `e^eps` given exactly.
pub fn hockey_stick_exact(p: &ExactDist, q: &ExactDist, exp_eps: &BigRational) -> BigRational {
    let mut total = BigRational::zero();
    for (k, pm) in p.iter() {
        let diff = pm - exp_eps * q.get(k);
        if diff.is_positive() {
            total += diff;
        }
    }
    total
}

/// Rényi divergence of integer order `alpha >= 2`. Each term of the moment
/// `sum P^alpha / Q^(alpha - 1)` is exact; the sum is accumulated in fixed
/// point with 120 decimal places, far below the precision of the inputs.
pub fn renyi_exact(p: &ExactDist, q: &ExactDist, alpha: u32) -> Result<f64, OracleError> {
    if alpha < 2 {
        return Err(OracleError::InvalidInput(format!("integer alpha must be >= 2, got {alpha}")));
    }
    let scale = BigRational::from_integer(num::pow(BigInt::from(10), FIXED_DIGITS));
    let mut moment = BigInt::zero();
    for (k, pm) in p.iter() {
        if pm.is_zero() {
            continue;
        }
        let qm = q.get(k);
        if qm.is_zero() {
            return Err(OracleError::MissingSupport(k.clone()));
        }
        // P (P/Q)^(alpha-1) keeps the powered rational small
        let term = pm * num::pow(pm / qm, alpha as usize - 1);
        moment += (term * &scale).round().to_integer();
    }
    let ln = ln_rational(&BigRational::new(moment, scale.to_integer()));
    Ok(ln / (alpha - 1) as f64)
}

const FIXED_DIGITS: usize = 120;

/// KL divergence, with each log ratio rounded once.
pub fn kl_exact(p: &ExactDist, q: &ExactDist) -> Result<f64, OracleError> {
    let mut total = 0.0;
    for (k, pm) in p.iter() {
        if pm.is_zero() {
            continue;
        }
        let qm = q.get(k);
        if qm.is_zero() {
            return Err(OracleError::MissingSupport(k.clone()));
        }
        total += to_f64(pm) * ln_rational(&(pm / qm));
    }
    Ok(total)
}

/// Natural logarithm of a positive rational, safe for magnitudes outside the
/// `f64` range.
pub fn ln_rational(x: &BigRational) -> f64 {
    assert!(x.is_positive(), "logarithm of a non-positive rational");
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().expect("fits in f64").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Nearest `f64` of a rational.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Rational approximation of `e^x` with absolute error below `10^-digits`
/// for `0 <= x <= 50`.
pub fn exp_rational(x: &BigRational, digits: u32) -> BigRational {
    let eps = BigRational::new(BigInt::one(), num::pow(BigInt::from(10), digits as usize));
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut k = 1u32;
    loop {
        term = term * x / BigRational::from_integer(BigInt::from(k));
        sum += &term;
        // remaining terms are bounded by a geometric series once k > 2x
        if BigRational::from_integer(BigInt::from(k)) > x * BigRational::from_integer(BigInt::from(2)) && term < eps {
            break;
        }
        k += 1;
    }
    // round to a denominator of 10^(digits + 5) to keep later products small
    let scale = num::pow(BigInt::from(10), digits as usize + 5);
    let scaled = (sum * BigRational::from_integer(scale.clone())).round();
    BigRational::new(scaled.to_integer(), scale)
}

/// Exact rational form of a finite `f64`.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}
