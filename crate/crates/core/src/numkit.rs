//! Log-domain scalar numerics.
//!
//! Every probability mass in this crate is carried as a natural logarithm.
//! The clone distributions span millions of atoms whose masses routinely fall
//! below the smallest normal `f64`, so linear-domain arithmetic is only used
//! after a value has been checked to be representable.

use std::fmt;

use thiserror::Error;

/// Absolute slack (in the log domain) tolerated by [`log_sub`] before it
/// reports a [`NumError::Domain`] error.
pub const LOG_SUB_SLACK: f64 = 1e-12;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("target {target} is outside the bracket [f(hi)={f_hi}, f(lo)={f_lo}]")]
    Bracket { target: f64, f_lo: f64, f_hi: f64 },
}

/// Natural logarithm of a probability. `-inf` encodes probability zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(f64);

impl LogProb {
    /// Log of probability zero.
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    /// Log of probability one.
    pub const ONE: LogProb = LogProb(0.0);

    pub fn new(value: f64) -> Result<Self, NumError> {
        if value.is_nan() {
            return Err(NumError::Domain("log-probability is NaN".into()));
        }
        Ok(LogProb(value))
    }

    pub fn from_prob(p: f64) -> Result<Self, NumError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(NumError::Domain(format!("probability {p} outside [0, 1]")));
        }
        Ok(LogProb(p.ln()))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `log(e^a + e^b)`.
pub fn log_add(a: LogProb, b: LogProb) -> LogProb {
    LogProb(ln_add_exp(a.0, b.0))
}

/// `log(e^a - e^b)` with the default slack.
pub fn log_sub(a: LogProb, b: LogProb) -> Result<LogProb, NumError> {
    log_sub_with_slack(a, b, LOG_SUB_SLACK)
}

/// `log(e^a - e^b)`. Inputs with `a < b` are accepted (and give `-inf`) when
/// the violation is within `slack` in the log domain.
pub fn log_sub_with_slack(a: LogProb, b: LogProb, slack: f64) -> Result<LogProb, NumError> {
    if b.0 == f64::NEG_INFINITY {
        return Ok(a);
    }
    if a.0 < b.0 {
        if b.0 - a.0 <= slack {
            return Ok(LogProb::ZERO);
        }
        return Err(NumError::Domain(format!(
            "log_sub requires a >= b, got a={} b={}",
            a.0, b.0
        )));
    }
    if a.0 == b.0 {
        return Ok(LogProb::ZERO);
    }
    Ok(LogProb(a.0 + ln_1m_exp(b.0 - a.0)))
}

/// Raw-`f64` form of [`log_add`] used in hot loops.
#[inline]
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - e^x)` for `x <= 0`.
#[inline]
pub fn ln_1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Streaming log-sum-exp accumulator.
///
/// Keeps a running maximum so adding terms many orders of magnitude apart
/// neither overflows nor flushes to zero.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

impl FromIterator<f64> for LogSumExp {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = LogSumExp::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    HALF_LN_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

// Stirling-series error ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2 pi)] for
// n = 0..=15, evaluated to 25 digits.
const STIRLERR_TABLE: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_219_670_26,
    0.041_340_695_955_409_294_093_822_08,
    0.027_677_925_684_998_339_148_789_29,
    0.020_790_672_103_765_093_111_522_77,
    0.016_644_691_189_821_192_163_194_87,
    0.013_876_128_823_070_747_998_745_73,
    0.011_896_709_945_891_770_095_055_72,
    0.010_411_265_261_972_096_497_478_57,
    0.009_255_462_182_712_732_917_728_637,
    0.008_330_563_433_362_871_256_469_319,
    0.007_573_675_487_951_840_794_972_024,
    0.006_942_840_107_209_529_865_664_153,
    0.006_408_994_188_004_207_068_439_631,
    0.005_951_370_112_758_847_735_624_416,
    0.005_554_733_551_962_801_371_038_69,
];

fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        return STIRLERR_TABLE[n as usize];
    }
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x ln(x/np) + np - x`, evaluated without cancellation near
/// `x = np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `ln Bin(n, p)(k)` via the saddle-point expansion, which keeps full
/// relative accuracy for `n` in the millions where log-factorial differences
/// would lose eight or more digits. Returns `-inf` outside the support.
pub(crate) fn ln_binom_pmf_raw(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    if k == 0 {
        if n == 0 {
            return 0.0;
        }
        return if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
    }
    if k == n {
        return if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
    }
    let kf = k as f64;
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * p) - bd0(nf - kf, nf * q);
    let lf = LN_2PI + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}

/// `ln C(n,k) + k ln p + (n-k) ln(1-p)`.
pub fn ln_binom_pmf(k: u64, n: u64, p: f64) -> Result<LogProb, NumError> {
    if k > n {
        return Err(NumError::Domain(format!("k={k} exceeds n={n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(NumError::Domain(format!("p={p} outside [0, 1]")));
    }
    Ok(LogProb(ln_binom_pmf_raw(k, n, p)))
}

/// Final bracket of [`bisect_monotone`]. `f(lo) >= target >= f(hi)` holds
/// throughout, so `hi` is the conservative end when `f` is a decreasing
/// privacy curve and `lo` the conservative end for lower bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Bisection on a nonincreasing `f` over `[lo, hi]`.
///
/// When `f(lo) <= target` already, the degenerate bracket `[lo, lo]` is
/// returned.
pub fn bisect_monotone<F>(mut f: F, target: f64, lo: f64, hi: f64, tol: f64) -> Result<Bracket, NumError>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) || !(lo <= hi) {
        return Err(NumError::Domain(format!(
            "invalid bisection setup lo={lo} hi={hi} tol={tol}"
        )));
    }
    let f_lo = f(lo);
    if f_lo <= target {
        return Ok(Bracket { lo, hi: lo });
    }
    let f_hi = f(hi);
    if f_hi > target {
        return Err(NumError::Bracket { target, f_lo, f_hi });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) <= target {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Bracket { lo: a, hi: b })
}
