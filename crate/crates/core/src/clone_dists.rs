//! Reduced "clone" distribution pairs over counts of special symbols.
//!
//! Every builder here describes the same two-stage experiment. The `n - 1`
//! other users each become a clone with some probability; a clone report is
//! equally likely to be symbol 0 or symbol 1. In the four-symbol variant a
//! non-clone user may instead emit a third, uninformative symbol. User 1 then
//! contributes one report through three branches (`hi`, `lo`, `mid`), and the
//! second distribution of the pair swaps the `hi` and `lo` weights.
//!
//! Writing `s = n0 + n1`, `H(s, n0) = Bin(s, 1/2)(n0)` and `B = Bin(n-1, c)`,
//! the first distribution factors as
//!
//! ```text
//! P(n0, n1) = H(s, n0) * [ (2 B(s-1) / s) (w_hi n0 + w_lo n1) + w_mid B(s) ]
//! ```
//!
//! which lets each atom be evaluated exactly in O(1) regardless of how the
//! support was truncated. The second distribution is the coordinate mirror
//! of the first, so it is produced by reversing cells rather than by a
//! second evaluation; this makes mirror symmetry bit-exact.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkit::{ln_add_exp, ln_binom_pmf_raw, LogProb, LogSumExp};

/// Default per-distribution truncation budget.
pub const DEFAULT_TRUNC: f64 = 1e-15;

/// Count tuple `(n0, n1, n2)`; `n2` is always zero for arity-2 distributions.
pub type Counts = [u64; 3];

#[derive(Debug, Error)]
pub enum CloneError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid atoms: {0}")]
    InvalidAtoms(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Parameters of a clone pair.
///
/// `p` is the per-user probability of each clone symbol and `q` the
/// probability of the uninformative third symbol (zero for three-symbol
/// pairs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloneParams {
    pub eps0: f64,
    pub n: u64,
    pub p: f64,
    pub q: f64,
}

const PARAM_SLACK: f64 = 1e-12;

impl CloneParams {
    pub fn new(eps0: f64, n: u64, p: f64, q: f64) -> Result<Self, CloneError> {
        let params = CloneParams { eps0, n, p, q };
        params.validate()?;
        Ok(params)
    }

    /// `p = 1/(e^eps0 + 1)`, `q = 0`: the pair for randomizers in the
    /// extremal class.
    pub fn extremal(eps0: f64, n: u64) -> Result<Self, CloneError> {
        Self::new(eps0, n, 1.0 / (eps0.exp() + 1.0), 0.0)
    }

    /// Parameters induced by k-ary randomized response.
    pub fn krr(eps0: f64, k: u64, n: u64) -> Result<Self, CloneError> {
        if k < 2 {
            return Err(CloneError::InvalidParams(format!("k must be >= 2, got {k}")));
        }
        let denom = eps0.exp() + (k - 1) as f64;
        Self::new(eps0, n, 1.0 / denom, (k - 2) as f64 / denom)
    }

    pub fn validate(&self) -> Result<(), CloneError> {
        let bad = |msg: String| Err(CloneError::InvalidParams(msg));
        if !(self.eps0 >= 0.0) || !self.eps0.is_finite() {
            return bad(format!("eps0 must be finite and >= 0, got {}", self.eps0));
        }
        if self.n < 1 {
            return bad("n must be >= 1".into());
        }
        let p_max = 1.0 / (self.eps0.exp() + 1.0);
        if !(self.p >= 0.0) || self.p > p_max * (1.0 + PARAM_SLACK) {
            return bad(format!("p={} outside [0, {p_max}]", self.p));
        }
        if !(self.q >= 0.0) || self.q > 1.0 - 2.0 * self.p + PARAM_SLACK {
            return bad(format!("q={} outside [0, 1 - 2p]", self.q));
        }
        Ok(())
    }

    fn branch_weights(&self) -> (f64, f64, f64) {
        let e = self.eps0.exp();
        let w_hi = e * self.p;
        let w_lo = self.p;
        (w_hi, w_lo, clamp_mid(1.0 - w_hi - w_lo))
    }
}

// Rounding can leave a tiny negative (or tiny positive) middle weight when
// p = 1/(e^eps0 + 1) exactly; both mean "no middle branch".
fn clamp_mid(w: f64) -> f64 {
    if w.abs() <= 8.0 * f64::EPSILON {
        0.0
    } else {
        w.max(0.0)
    }
}

/// JSON sidecar written next to a CountDist CSV.
///
/// `dropped_tail` is a plain probability; `max_ratio_bound` is `null` when
/// unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub arity: u8,
    pub dropped_tail: f64,
    pub max_ratio_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Cell {
    pub(crate) n2: u64,
    pub(crate) s: u64,
    pub(crate) n0_start: u64,
    pub(crate) log_mass: Vec<f64>,
}

impl Cell {
    #[inline]
    pub(crate) fn key(&self) -> (u64, u64) {
        (self.n2, self.s)
    }

    /// One past the last stored `n0`.
    #[inline]
    pub(crate) fn n0_end(&self) -> u64 {
        self.n0_start + self.log_mass.len() as u64
    }

    #[inline]
    pub(crate) fn get(&self, n0: u64) -> f64 {
        if n0 < self.n0_start || n0 >= self.n0_end() {
            f64::NEG_INFINITY
        } else {
            self.log_mass[(n0 - self.n0_start) as usize]
        }
    }
}

/// Sparse law over count tuples with a certified bound on omitted mass.
///
/// Atoms are grouped into cells sharing `(n2, n0 + n1)`; each cell stores a
/// contiguous run of `n0` values. Atoms inside a run may have mass zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDist {
    arity: u8,
    cells: Vec<Cell>,
    dropped_tail: LogProb,
    max_ratio_bound: f64,
}

impl CountDist {
    pub fn arity(&self) -> u8 {
        self.arity
    }

    /// Upper bound on the probability mass outside the stored atoms.
    pub fn dropped_tail(&self) -> LogProb {
        self.dropped_tail
    }

    /// Certified supremum of the pointwise ratio between the two members of
    /// the pair this distribution came from, over the untruncated support.
    pub fn max_ratio_bound(&self) -> f64 {
        self.max_ratio_bound
    }

    pub fn num_atoms(&self) -> usize {
        self.cells.iter().map(|c| c.log_mass.len()).sum()
    }

    pub(crate) fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Stored atoms in `(n2, n0 + n1, n0)` order.
    pub fn atoms(&self) -> impl Iterator<Item = (Counts, LogProb)> + '_ {
        self.cells.iter().flat_map(|cell| {
            cell.log_mass.iter().enumerate().map(move |(i, &lm)| {
                let n0 = cell.n0_start + i as u64;
                ([n0, cell.s - n0, cell.n2], LogProb::new(lm).expect("stored masses are never NaN"))
            })
        })
    }

    /// Log-mass of one atom; zero mass for atoms that are not stored.
    pub fn mass(&self, counts: &Counts) -> LogProb {
        let key = (counts[2], counts[0] + counts[1]);
        match self.cells.binary_search_by_key(&key, Cell::key) {
            Ok(i) => LogProb::new(self.cells[i].get(counts[0])).expect("stored masses are never NaN"),
            Err(_) => LogProb::ZERO,
        }
    }

    /// Total stored mass.
    pub fn retained_mass(&self) -> LogProb {
        let acc: LogSumExp = self.cells.iter().flat_map(|c| c.log_mass.iter().copied()).collect();
        LogProb::new(acc.value()).expect("sum of masses is never NaN")
    }

    /// Builds a distribution from explicit atoms. Count tuples must have
    /// length equal to `arity`.
    pub fn from_atoms<I>(arity: u8, atoms: I, dropped_tail: LogProb, max_ratio_bound: f64) -> Result<Self, CloneError>
    where
        I: IntoIterator<Item = (Vec<u64>, f64)>,
    {
        if arity != 2 && arity != 3 {
            return Err(CloneError::InvalidAtoms(format!("arity must be 2 or 3, got {arity}")));
        }
        if !(max_ratio_bound >= 1.0) {
            return Err(CloneError::InvalidAtoms(format!("max_ratio_bound {max_ratio_bound} < 1")));
        }
        let mut grouped: BTreeMap<(u64, u64), BTreeMap<u64, f64>> = BTreeMap::new();
        for (counts, lm) in atoms {
            if counts.len() != arity as usize {
                return Err(CloneError::InvalidAtoms(format!(
                    "count tuple {counts:?} does not have arity {arity}"
                )));
            }
            if lm.is_nan() || lm > 1e-12 {
                return Err(CloneError::InvalidAtoms(format!("log-mass {lm} is not a log-probability")));
            }
            let n2 = if arity == 3 { counts[2] } else { 0 };
            let key = (n2, counts[0] + counts[1]);
            if grouped.entry(key).or_default().insert(counts[0], lm).is_some() {
                return Err(CloneError::InvalidAtoms(format!("duplicate atom {counts:?}")));
            }
        }
        let cells = grouped
            .into_iter()
            .map(|((n2, s), row)| {
                let start = *row.keys().next().expect("rows are non-empty");
                let end = *row.keys().next_back().expect("rows are non-empty");
                let mut log_mass = vec![f64::NEG_INFINITY; (end - start + 1) as usize];
                for (n0, lm) in row {
                    log_mass[(n0 - start) as usize] = lm;
                }
                Cell { n2, s, n0_start: start, log_mass }
            })
            .collect();
        Ok(CountDist {
            arity,
            cells,
            dropped_tail,
            max_ratio_bound,
        })
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            arity: self.arity,
            dropped_tail: self.dropped_tail.prob(),
            max_ratio_bound: self.max_ratio_bound.is_finite().then_some(self.max_ratio_bound),
        }
    }

    /// Writes `n0,n1[,n2],log_prob` rows. Zero-mass atoms are omitted.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), CloneError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["n0", "n1"];
        if self.arity == 3 {
            header.push("n2");
        }
        header.push("log_prob");
        w.write_record(&header)?;
        for (counts, lm) in self.atoms() {
            if lm.is_zero() {
                continue;
            }
            let mut row: Vec<String> = counts[..self.arity as usize].iter().map(u64::to_string).collect();
            row.push(format!("{:.17e}", lm.value()));
            w.write_record(&row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_sidecar<W: Write>(&self, writer: W) -> Result<(), CloneError> {
        serde_json::to_writer_pretty(writer, &self.sidecar())?;
        Ok(())
    }

    /// Inverse of [`CountDist::write_csv`] together with its sidecar.
    pub fn read_csv<R: Read>(reader: R, sidecar: &Sidecar) -> Result<Self, CloneError> {
        let mut r = csv::Reader::from_reader(reader);
        let arity = sidecar.arity as usize;
        let mut atoms = Vec::new();
        for record in r.records() {
            let record = record?;
            if record.len() != arity + 1 {
                return Err(CloneError::InvalidAtoms(format!("expected {} columns, got {}", arity + 1, record.len())));
            }
            let parse_err = |e: &dyn std::fmt::Display| CloneError::InvalidAtoms(e.to_string());
            let counts = (0..arity)
                .map(|i| record[i].trim().parse::<u64>().map_err(|e| parse_err(&e)))
                .collect::<Result<Vec<_>, _>>()?;
            let lm = record[arity].trim().parse::<f64>().map_err(|e| parse_err(&e))?;
            atoms.push((counts, lm));
        }
        let tail = LogProb::from_prob(sidecar.dropped_tail).map_err(|e| CloneError::InvalidAtoms(e.to_string()))?;
        Self::from_atoms(sidecar.arity, atoms, tail, sidecar.max_ratio_bound.unwrap_or(f64::INFINITY))
    }

    fn mirrored(&self) -> CountDist {
        let cells = self
            .cells
            .iter()
            .map(|cell| {
                debug_assert_eq!(cell.n0_start + cell.n0_end() - 1, cell.s);
                let mut log_mass = cell.log_mass.clone();
                log_mass.reverse();
                Cell { log_mass, ..cell.clone() }
            })
            .collect();
        CountDist { cells, ..self.clone() }
    }
}

/// The generic two-stage experiment behind every mirror-symmetric pair.
struct Mixture {
    arity: u8,
    n: u64,
    /// Probability that another user is a clone.
    c_prob: f64,
    /// Probability that a non-clone user emits the third symbol.
    g_prob: f64,
    w_hi: f64,
    w_lo: f64,
    w_mid: f64,
    max_ratio_bound: f64,
}

/// Inclusive index window and the mass it leaves out.
struct Window {
    lo: u64,
    hi: u64,
    tail: f64,
}

// Kullback-Leibler divergence between Bernoulli(x) and Bernoulli(q).
fn bern_kl(x: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| if a <= 0.0 { 0.0 } else { a * (a / b).ln() };
    term(x, q) + term(1.0 - x, 1.0 - q)
}

// Chernoff bound on Pr[Bin(n, q) >= k] for k >= nq (and symmetrically on
// the lower tail), exp(-n KL(k/n || q)).
fn chernoff(k: u64, n: u64, q: f64) -> f64 {
    (-(n as f64) * bern_kl(k as f64 / n as f64, q)).exp()
}

/// Smallest `h` in `[ceil(c/2), c]` with `Pr[|A - c/2| > h - c/2] <= budget`
/// for `A ~ Bin(c, 1/2)`, using the two-sided Chernoff bound.
fn half_window(c: u64, budget: f64) -> Window {
    let tail_at = |h: u64| if h >= c { 0.0 } else { 2.0 * chernoff(h + 1, c, 0.5) };
    let (mut a, mut b) = (c.div_ceil(2), c);
    if tail_at(a) <= budget {
        b = a;
    }
    while a < b {
        let mid = a + (b - a) / 2;
        if tail_at(mid) <= budget {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    Window {
        lo: c - b,
        hi: b,
        tail: tail_at(b),
    }
}

/// Central window of `Bin(n, q)` whose Chernoff-bounded complement is at
/// most `budget`.
fn binom_window(n: u64, q: f64, budget: f64) -> Window {
    if q <= 0.0 {
        return Window { lo: 0, hi: 0, tail: 0.0 };
    }
    if q >= 1.0 {
        return Window { lo: n, hi: n, tail: 0.0 };
    }
    let mean = n as f64 * q;
    let half = budget / 2.0;
    let upper_tail = |k: u64| if k >= n { 0.0 } else { chernoff(k + 1, n, q) };
    let lower_tail = |k: u64| if k == 0 { 0.0 } else { chernoff(k - 1, n, q) };
    let (mut a, mut b) = ((mean.floor() as u64).min(n), n);
    while a < b {
        let mid = a + (b - a) / 2;
        if upper_tail(mid) <= half {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    let hi = a;
    let (mut a, mut b) = (0u64, (mean.ceil() as u64).min(n));
    while a < b {
        let mid = a + (b - a).div_ceil(2);
        if lower_tail(mid) <= half {
            a = mid;
        } else {
            b = mid - 1;
        }
    }
    let lo = a;
    Window {
        lo,
        hi,
        tail: upper_tail(hi) + lower_tail(lo),
    }
}

fn binom_support(n: u64, q: f64) -> Window {
    match q {
        q if q <= 0.0 => Window { lo: 0, hi: 0, tail: 0.0 },
        q if q >= 1.0 => Window { lo: n, hi: n, tail: 0.0 },
        _ => Window { lo: 0, hi: n, tail: 0.0 },
    }
}

/// Smallest window around the mode of a pmf (given as linear masses) whose
/// complement is at most `budget`, grown greedily toward the heavier side.
fn mode_window(mass: &[f64], budget: f64) -> Window {
    let len = mass.len();
    let mut left = vec![0.0; len + 1];
    for i in 0..len {
        left[i + 1] = left[i] + mass[i];
    }
    let mut right = vec![0.0; len + 1];
    for i in (0..len).rev() {
        right[i] = right[i + 1] + mass[i];
    }
    // left[i] = mass strictly below i, right[i + 1] = mass strictly above i
    let mode = mass
        .iter()
        .enumerate()
        .fold(0, |best, (i, &m)| if m > mass[best] { i } else { best });
    let (mut lo, mut hi) = (mode, mode);
    while left[lo] + right[hi + 1] > budget {
        let grow_left = lo > 0 && (hi + 1 >= len || mass[lo - 1] >= mass[hi + 1]);
        if grow_left {
            lo -= 1;
        } else if hi + 1 < len {
            hi += 1;
        } else {
            break;
        }
    }
    Window {
        lo: lo as u64,
        hi: hi as u64,
        tail: left[lo] + right[hi + 1],
    }
}

/// Support window of a pmf given in the log domain (no truncation).
fn support_window(ln_mass: &[f64]) -> Window {
    let lo = ln_mass.iter().position(|&x| x > f64::NEG_INFINITY).unwrap_or(0);
    let hi = ln_mass.iter().rposition(|&x| x > f64::NEG_INFINITY).unwrap_or(0);
    Window {
        lo: lo as u64,
        hi: hi as u64,
        tail: 0.0,
    }
}

fn build_mixture(m: &Mixture, trunc: f64) -> Result<(CountDist, CountDist), CloneError> {
    if !(0.0..1.0).contains(&trunc) {
        return Err(CloneError::InvalidParams(format!("trunc={trunc} outside [0, 1)")));
    }
    let n = m.n;
    let ln_b: Vec<f64> = (0..n).map(|c| ln_binom_pmf_raw(c, n - 1, m.c_prob)).collect();
    let pieces = if m.arity == 3 { 3.0 } else { 2.0 };
    let budget = trunc / pieces;

    let c_window = if trunc == 0.0 {
        support_window(&ln_b)
    } else {
        let b: Vec<f64> = ln_b.iter().map(|x| x.exp()).collect();
        mode_window(&b, budget)
    };
    let mut dropped = c_window.tail;

    let has_split = m.w_hi + m.w_lo > 0.0;
    let has_mid = m.w_mid > 0.0;
    let mut hulls: BTreeMap<(u64, u64), (u64, u64)> = BTreeMap::new();
    let mut widen = |key: (u64, u64), lo: u64, hi: u64| {
        let entry = hulls.entry(key).or_insert((lo, hi));
        entry.0 = entry.0.min(lo);
        entry.1 = entry.1.max(hi);
    };
    for c in c_window.lo..=c_window.hi {
        let bc = ln_b[c as usize].exp();
        let a = if trunc == 0.0 {
            Window { lo: 0, hi: c, tail: 0.0 }
        } else {
            half_window(c, budget)
        };
        let g = if m.arity == 2 {
            Window { lo: 0, hi: 0, tail: 0.0 }
        } else if trunc == 0.0 {
            binom_support(n - 1 - c, m.g_prob)
        } else {
            binom_window(n - 1 - c, m.g_prob, budget)
        };
        dropped += bc * (a.tail + g.tail);
        for g_count in g.lo..=g.hi {
            if has_split {
                widen((g_count, c + 1), a.lo, a.hi + 1);
            }
            if has_mid {
                let n2 = if m.arity == 3 { g_count + 1 } else { 0 };
                widen((n2, c), a.lo, a.hi);
            }
        }
    }

    let ln_g = |count: u64, c: u64| -> f64 {
        if m.arity == 2 {
            0.0
        } else {
            ln_binom_pmf_raw(count, n - 1 - c, m.g_prob)
        }
    };
    let ln_w_mid = m.w_mid.ln();
    let cells = hulls
        .into_iter()
        .map(|((n2, s), (lo, hi))| {
            let (lo, hi) = (lo.min(s - hi), hi.max(s - lo));
            // hi/lo branch: user 1 adds to n0 or n1 on top of s - 1 clones
            let base_split = if has_split && s >= 1 && (m.arity == 2 || n2 <= n - s) {
                ln_b[(s - 1) as usize] + ln_g(n2, s - 1) + std::f64::consts::LN_2 - (s as f64).ln()
            } else {
                f64::NEG_INFINITY
            };
            // mid branch: user 1 adds to n2 (arity 3) or to nothing (arity 2)
            let base_mid = if has_mid && s < n {
                if m.arity == 2 {
                    ln_w_mid + ln_b[s as usize]
                } else if n2 >= 1 && n2 - 1 <= n - 1 - s {
                    ln_w_mid + ln_b[s as usize] + ln_g(n2 - 1, s)
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                f64::NEG_INFINITY
            };
            let log_mass = (lo..=hi)
                .map(|n0| {
                    let n1 = s - n0;
                    let lin = m.w_hi * n0 as f64 + m.w_lo * n1 as f64;
                    let split = if lin > 0.0 { base_split + lin.ln() } else { f64::NEG_INFINITY };
                    ln_binom_pmf_raw(n0, s, 0.5) + ln_add_exp(split, base_mid)
                })
                .collect();
            Cell {
                n2,
                s,
                n0_start: lo,
                log_mass,
            }
        })
        .collect();

    let p_dist = CountDist {
        arity: m.arity,
        cells,
        dropped_tail: LogProb::new(dropped.ln()).expect("dropped mass is a probability"),
        max_ratio_bound: m.max_ratio_bound,
    };
    let q_dist = p_dist.mirrored();
    Ok((p_dist, q_dist))
}

/// Three-symbol pair: clones with probability `2p`, user 1's branches weighted
/// `(e^eps0 p, p, 1 - (e^eps0 + 1) p)`.
pub fn build_pair_3sym(params: CloneParams, trunc: f64) -> Result<(CountDist, CountDist), CloneError> {
    params.validate()?;
    if params.q != 0.0 {
        return Err(CloneError::InvalidParams(format!(
            "three-symbol pair requires q = 0, got {}",
            params.q
        )));
    }
    let (w_hi, w_lo, w_mid) = params.branch_weights();
    build_mixture(
        &Mixture {
            arity: 2,
            n: params.n,
            c_prob: 2.0 * params.p,
            g_prob: 0.0,
            w_hi,
            w_lo,
            w_mid,
            max_ratio_bound: params.eps0.exp(),
        },
        trunc,
    )
}

/// Four-symbol pair: like the three-symbol pair, but non-clone users emit a
/// third symbol with probability `q` and user 1's middle branch is counted
/// in `n2`. `q = 0` is accepted and still counts the middle branch.
pub fn build_pair_4sym(params: CloneParams, trunc: f64) -> Result<(CountDist, CountDist), CloneError> {
    params.validate()?;
    let (w_hi, w_lo, w_mid) = params.branch_weights();
    let rest = 1.0 - 2.0 * params.p;
    let g_prob = if rest <= 0.0 { 0.0 } else { (params.q / rest).min(1.0) };
    build_mixture(
        &Mixture {
            arity: 3,
            n: params.n,
            c_prob: 2.0 * params.p,
            g_prob,
            w_hi,
            w_lo,
            w_mid,
            max_ratio_bound: params.eps0.exp(),
        },
        trunc,
    )
}

/// The earlier reduction: clones with probability `e^-eps0`, user 1 reports
/// symbol 0 with probability `e^eps0/(e^eps0 + 1)` and symbol 1 otherwise.
pub fn build_pair_fmt20(eps0: f64, n: u64, trunc: f64) -> Result<(CountDist, CountDist), CloneError> {
    if !(eps0 > 0.0) || !eps0.is_finite() {
        return Err(CloneError::InvalidParams(format!("eps0 must be finite and > 0, got {eps0}")));
    }
    if n < 1 {
        return Err(CloneError::InvalidParams("n must be >= 1".into()));
    }
    let e = eps0.exp();
    build_mixture(
        &Mixture {
            arity: 2,
            n,
            c_prob: (-eps0).exp(),
            g_prob: 0.0,
            w_hi: e / (e + 1.0),
            w_lo: 1.0 / (e + 1.0),
            w_mid: 0.0,
            max_ratio_bound: e,
        },
        trunc,
    )
}

/// Pair whose privacy-loss tail is controlled by the mixture tail bound:
/// clones with probability `2p` and user 1 split `e^eps0/(e^eps0 + 1)` versus
/// `1/(e^eps0 + 1)`.
///
/// `eps0 = f64::INFINITY` gives the unmixed pair `(A + 1, C - A)` versus
/// `(A, C - A + 1)`, whose pointwise ratio is unbounded.
pub fn build_pair_tail_mix(eps0: f64, n: u64, p: f64, trunc: f64) -> Result<(CountDist, CountDist), CloneError> {
    if !(eps0 >= 0.0) {
        return Err(CloneError::InvalidParams(format!("eps0 must be >= 0, got {eps0}")));
    }
    if n < 1 {
        return Err(CloneError::InvalidParams("n must be >= 1".into()));
    }
    if !(p > 0.0 && p <= 0.5) {
        return Err(CloneError::InvalidParams(format!("p={p} outside (0, 1/2]")));
    }
    let (w_hi, w_lo, ratio) = if eps0.is_infinite() {
        (1.0, 0.0, f64::INFINITY)
    } else {
        let e = eps0.exp();
        (e / (e + 1.0), 1.0 / (e + 1.0), e)
    };
    build_mixture(
        &Mixture {
            arity: 2,
            n,
            c_prob: 2.0 * p,
            g_prob: 0.0,
            w_hi,
            w_lo,
            w_mid: 0.0,
            max_ratio_bound: ratio,
        },
        trunc,
    )
}

/// Binary randomized response on the datasets `(1, 2, ..., 2)` versus
/// `(2, ..., 2)`, observed through the number `j` of reports equal to 1.
///
/// Atoms are `(j, n - j)`. With `p = 1/(e^eps0 + 1)`, the first law is
/// `Bern(e^eps0 p) + Bin(n - 1, p)` and the second `Bern(p) + Bin(n - 1, p)`.
/// The pair is not mirror symmetric.
pub fn build_pair_binary_rr(eps0: f64, n: u64, trunc: f64) -> Result<(CountDist, CountDist), CloneError> {
    if !(eps0 >= 0.0) || !eps0.is_finite() {
        return Err(CloneError::InvalidParams(format!("eps0 must be finite and >= 0, got {eps0}")));
    }
    if n < 1 {
        return Err(CloneError::InvalidParams("n must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&trunc) {
        return Err(CloneError::InvalidParams(format!("trunc={trunc} outside [0, 1)")));
    }
    let e = eps0.exp();
    let p = 1.0 / (e + 1.0);
    let ln_b: Vec<f64> = (0..n).map(|j| ln_binom_pmf_raw(j, n - 1, p)).collect();
    let window = if trunc == 0.0 {
        support_window(&ln_b)
    } else {
        let b: Vec<f64> = ln_b.iter().map(|x| x.exp()).collect();
        mode_window(&b, trunc)
    };
    let at = |j: u64| if j < n { ln_b[j as usize] } else { f64::NEG_INFINITY };
    let shifted = |j: u64| if j == 0 { f64::NEG_INFINITY } else { at(j - 1) };
    let law = |w1: f64| -> Vec<f64> {
        (window.lo..=window.hi + 1)
            .map(|j| ln_add_exp(w1.ln() + shifted(j), (1.0 - w1).ln() + at(j)))
            .collect()
    };
    let make = |log_mass: Vec<f64>| CountDist {
        arity: 2,
        cells: vec![Cell {
            n2: 0,
            s: n,
            n0_start: window.lo,
            log_mass,
        }],
        dropped_tail: LogProb::new(window.tail.ln()).expect("tail is a probability"),
        max_ratio_bound: e,
    };
    Ok((make(law(e / (e + 1.0))), make(law(p))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prob(d: &CountDist, c: Counts) -> f64 {
        d.mass(&c).prob()
    }

    #[test]
    fn params_validation() {
        assert!(CloneParams::new(1.0, 10, 0.5, 0.0).is_err());
        assert!(CloneParams::new(1.0, 0, 0.1, 0.0).is_err());
        assert!(CloneParams::new(1.0, 10, 0.1, 0.9).is_err());
        assert!(CloneParams::new(-1.0, 10, 0.1, 0.0).is_err());
        let p = CloneParams::krr(3f64.ln(), 4, 2).unwrap();
        assert!((p.p - 1.0 / 6.0).abs() < 1e-15 && (p.q - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_user_three_symbol() {
        let e0 = 0.7f64;
        let (p, q) = build_pair_3sym(CloneParams::extremal(e0, 1).unwrap(), DEFAULT_TRUNC).unwrap();
        let e = e0.exp();
        assert!((prob(&p, [1, 0, 0]) - e / (e + 1.0)).abs() < 1e-15);
        assert!((prob(&p, [0, 1, 0]) - 1.0 / (e + 1.0)).abs() < 1e-15);
        assert_eq!(p.atoms().filter(|(_, m)| !m.is_zero()).count(), 2);
        assert_eq!(prob(&q, [1, 0, 0]), prob(&p, [0, 1, 0]));
    }

    #[test]
    fn three_symbol_table_n3() {
        // eps0 = ln 2, p = 1/3: C ~ Bin(2, 2/3), weights (2/3, 1/3, 0)
        let (p, _) = build_pair_3sym(CloneParams::new(2f64.ln(), 3, 1.0 / 3.0, 0.0).unwrap(), 0.0).unwrap();
        let table: [(Counts, f64); 9] = [
            ([1, 0, 0], 2.0 / 27.0),
            ([0, 1, 0], 1.0 / 27.0),
            ([2, 0, 0], 4.0 / 27.0),
            ([1, 1, 0], 6.0 / 27.0),
            ([0, 2, 0], 2.0 / 27.0),
            ([3, 0, 0], 2.0 / 27.0),
            ([2, 1, 0], 5.0 / 27.0),
            ([1, 2, 0], 4.0 / 27.0),
            ([0, 3, 0], 1.0 / 27.0),
        ];
        for (c, v) in table {
            assert!((prob(&p, c) - v).abs() < 1e-15, "{c:?}");
        }
        assert!((p.retained_mass().prob() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_at_eps0_zero() {
        let (p, q) = build_pair_3sym(CloneParams::new(0.0, 12, 0.5, 0.0).unwrap(), DEFAULT_TRUNC).unwrap();
        for ((c, a), (_, b)) in p.atoms().zip(q.atoms()) {
            assert!((a.value() - b.value()).abs() < 1e-12 || (a.is_zero() && b.is_zero()), "{c:?}");
        }
    }

    #[test]
    fn four_symbol_single_user() {
        let params = CloneParams::krr(1.0, 5, 1).unwrap();
        let (p, _) = build_pair_4sym(params, DEFAULT_TRUNC).unwrap();
        let e = 1f64.exp();
        assert!((prob(&p, [1, 0, 0]) - e * params.p).abs() < 1e-15);
        assert!((prob(&p, [0, 1, 0]) - params.p).abs() < 1e-15);
        assert!((prob(&p, [0, 0, 1]) - (1.0 - (e + 1.0) * params.p)).abs() < 1e-15);
    }

    #[test]
    fn four_symbol_krr_n2_support() {
        let params = CloneParams::krr(3f64.ln(), 4, 2).unwrap();
        let (p, _) = build_pair_4sym(params, 0.0).unwrap();
        let support = p.atoms().filter(|(_, m)| !m.is_zero()).count();
        assert_eq!(support, 9);
        // user 2 emits (1,0,0),(0,1,0) w.p. 1/6 each, (0,0,1) w.p. 1/3, nothing w.p. 1/3;
        // user 1 emits (1,0,0) w.p. 1/2, (0,1,0) w.p. 1/6, (0,0,1) w.p. 1/3
        assert!((prob(&p, [2, 0, 0]) - 1.0 / 12.0).abs() < 1e-15);
        assert!((prob(&p, [1, 1, 0]) - (1.0 / 12.0 + 1.0 / 36.0)).abs() < 1e-15);
        assert!((prob(&p, [0, 0, 2]) - 1.0 / 9.0).abs() < 1e-15);
        assert!((prob(&p, [1, 0, 1]) - (1.0 / 6.0 + 1.0 / 18.0)).abs() < 1e-15);
        assert!((prob(&p, [0, 0, 1]) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn four_symbol_marginal_matches_three_symbol_as_q_vanishes() {
        let e0 = 1.0f64;
        let params3 = CloneParams::extremal(e0, 50).unwrap();
        let params4 = CloneParams { q: 1e-14, ..params3 };
        let (p3, _) = build_pair_3sym(params3, 0.0).unwrap();
        let (p4, _) = build_pair_4sym(params4, 0.0).unwrap();
        let mut marginal: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for (c, m) in p4.atoms() {
            *marginal.entry((c[0], c[1])).or_default() += m.prob();
        }
        for (c, m) in p3.atoms() {
            let got = marginal.get(&(c[0], c[1])).copied().unwrap_or(0.0);
            assert!((got - m.prob()).abs() < 1e-10, "{c:?}");
        }
    }

    #[test]
    fn fmt20_single_user_and_large_eps() {
        let (p, _) = build_pair_fmt20(2.0, 1, DEFAULT_TRUNC).unwrap();
        let e = 2f64.exp();
        assert!((prob(&p, [1, 0, 0]) - e / (e + 1.0)).abs() < 1e-15);
        let (p, _) = build_pair_fmt20(40.0, 5, DEFAULT_TRUNC).unwrap();
        let e = 40f64.exp();
        assert!((prob(&p, [1, 0, 0]) - e / (e + 1.0)).abs() < 1e-12);
        assert!(build_pair_fmt20(0.0, 5, DEFAULT_TRUNC).is_err());
    }

    #[test]
    fn fmt20_table_n3() {
        // eps0 = ln 2: C ~ Bin(2, 1/2), user 1 splits (2/3, 1/3)
        let (p, _) = build_pair_fmt20(2f64.ln(), 3, 0.0).unwrap();
        let table: [(Counts, f64); 9] = [
            ([1, 0, 0], 1.0 / 6.0),
            ([0, 1, 0], 1.0 / 12.0),
            ([2, 0, 0], 1.0 / 6.0),
            ([1, 1, 0], 1.0 / 4.0),
            ([0, 2, 0], 1.0 / 12.0),
            ([3, 0, 0], 1.0 / 24.0),
            ([2, 1, 0], 5.0 / 48.0),
            ([1, 2, 0], 1.0 / 12.0),
            ([0, 3, 0], 1.0 / 48.0),
        ];
        for (c, v) in table {
            assert!((prob(&p, c) - v).abs() < 1e-15, "{c:?}");
        }
    }

    #[test]
    fn truncation_respects_budget() {
        for &trunc in &[1e-6, 1e-10, 1e-15] {
            let (p, _) = build_pair_3sym(CloneParams::extremal(2.0, 20_000).unwrap(), trunc).unwrap();
            let tail = p.dropped_tail().prob();
            assert!(tail <= trunc, "tail {tail} > {trunc}");
            let retained = p.retained_mass().prob();
            // the true omitted mass is below the recorded bound
            assert!(retained <= 1.0 + 1e-12 && 1.0 - retained <= tail + 1e-12);
            if trunc <= 1e-10 {
                assert!((retained + tail - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn four_symbol_truncation_respects_budget() {
        let params = CloneParams::krr(2.0, 8, 5_000).unwrap();
        let (p, _) = build_pair_4sym(params, 1e-12).unwrap();
        assert!(p.dropped_tail().prob() <= 1e-12);
        assert!((p.retained_mass().prob() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn binary_pair_small() {
        // eps0 = ln 2, n = 2, p = 1/3
        let (p, q) = build_pair_binary_rr(2f64.ln(), 2, 0.0).unwrap();
        assert!((prob(&p, [2, 0, 0]) - 2.0 / 9.0).abs() < 1e-15);
        assert!((prob(&p, [0, 2, 0]) - 2.0 / 9.0).abs() < 1e-15);
        assert!((prob(&q, [2, 0, 0]) - 1.0 / 9.0).abs() < 1e-15);
        assert!((prob(&q, [0, 2, 0]) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let params = CloneParams::krr(1.0, 4, 6).unwrap();
        let (p, _) = build_pair_4sym(params, 1e-9).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let mut side = Vec::new();
        p.write_sidecar(&mut side).unwrap();
        let sidecar: Sidecar = serde_json::from_slice(&side).unwrap();
        let back = CountDist::read_csv(buf.as_slice(), &sidecar).unwrap();
        for (c, m) in p.atoms() {
            assert_eq!(back.mass(&c).value(), m.value(), "{c:?}");
        }
        assert_eq!(back.arity(), 3);
    }

    #[test]
    fn from_atoms_rejects_bad_input() {
        let dup = vec![(vec![1, 0], -1.0), (vec![1, 0], -2.0)];
        assert!(CountDist::from_atoms(2, dup, LogProb::ZERO, 2.0).is_err());
        let wrong = vec![(vec![1, 0, 0], -1.0)];
        assert!(CountDist::from_atoms(2, wrong, LogProb::ZERO, 2.0).is_err());
    }
}
