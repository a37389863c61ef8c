//! Mixture decompositions of finite local randomizers.
//!
//! A randomizer is refined into an extremal one (every refined output has
//! probability `p_z` or `e^eps0 p_z` under every input), and the refined
//! outputs are grouped by how they treat the two distinguished inputs. Only
//! per-output aggregates are ever needed, so the `2^k` refined outputs are
//! never enumerated.

use std::io::Read;

use serde::Serialize;
use thiserror::Error;

/// Tolerance for rows summing to one and for small excursions outside the
/// hypercube.
pub const PROB_TOL: f64 = 1e-10;

/// Above this dimension [`HypercubeWeights::materialize`] refuses to expand.
pub const MATERIALIZE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error("invalid randomizer: {0}")]
    InvalidMatrix(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("randomizer is {found}-DP, which exceeds the requested eps0 = {eps0}")]
    NotPureDp { found: f64, eps0: f64 },
    #[error("csv error: {0}")]
    Csv(String),
}

/// Finite local randomizer: `probs[x][s] = Pr[R(x) = s]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomizerMatrix {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub probs: Vec<Vec<f64>>,
}

impl RandomizerMatrix {
    pub fn new(inputs: Vec<String>, outputs: Vec<String>, probs: Vec<Vec<f64>>) -> Result<Self, DecomposeError> {
        let bad = |m: String| Err(DecomposeError::InvalidMatrix(m));
        if inputs.is_empty() || outputs.is_empty() {
            return bad("needs at least one input and one output".into());
        }
        if probs.len() != inputs.len() {
            return bad(format!("{} rows for {} inputs", probs.len(), inputs.len()));
        }
        for (label, row) in inputs.iter().zip(&probs) {
            if row.len() != outputs.len() {
                return bad(format!("row {label} has {} entries, expected {}", row.len(), outputs.len()));
            }
            if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return bad(format!("row {label} has a negative or non-finite entry"));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return bad(format!("row {label} sums to {total}"));
            }
        }
        Ok(RandomizerMatrix { inputs, outputs, probs })
    }

    /// k-ary randomized response: the true value with probability
    /// `e^eps0/(e^eps0 + k - 1)`, each other value with `1/(e^eps0 + k - 1)`.
    pub fn krr(k: usize, eps0: f64) -> Result<Self, DecomposeError> {
        if k < 2 {
            return Err(DecomposeError::InvalidMatrix(format!("k must be >= 2, got {k}")));
        }
        let e = eps0.exp();
        let denom = e + (k - 1) as f64;
        let labels: Vec<String> = (1..=k).map(|i| i.to_string()).collect();
        let probs = (0..k)
            .map(|x| (0..k).map(|s| if s == x { e / denom } else { 1.0 / denom }).collect())
            .collect();
        Self::new(labels.clone(), labels, probs)
    }

    /// Unary-encoding RAPPOR over `k` values: bit `j` of the report is 1 with
    /// probability `alpha` when `j` is the true value and `beta` otherwise.
    pub fn rappor(k: usize, alpha: f64, beta: f64) -> Result<Self, DecomposeError> {
        if !(1..=20).contains(&k) {
            return Err(DecomposeError::InvalidMatrix(format!("k={k} outside [1, 20]")));
        }
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return Err(DecomposeError::InvalidMatrix("alpha and beta must lie in [0, 1]".into()));
        }
        let outputs: Vec<String> = (0..1u32 << k)
            .map(|y| (0..k).map(|j| if y >> j & 1 == 1 { '1' } else { '0' }).collect())
            .collect();
        let probs = (0..k)
            .map(|x| {
                (0..1u32 << k)
                    .map(|y| {
                        (0..k)
                            .map(|j| {
                                let bias = if j == x { alpha } else { beta };
                                if y >> j & 1 == 1 {
                                    bias
                                } else {
                                    1.0 - bias
                                }
                            })
                            .product()
                    })
                    .collect()
            })
            .collect();
        Self::new((1..=k).map(|i| i.to_string()).collect(), outputs, probs)
    }

    /// Randomizer that ignores its input.
    pub fn uniform(num_inputs: usize, num_outputs: usize) -> Result<Self, DecomposeError> {
        let row = vec![1.0 / num_outputs as f64; num_outputs];
        Self::new(
            (1..=num_inputs).map(|i| i.to_string()).collect(),
            (1..=num_outputs).map(|i| i.to_string()).collect(),
            vec![row; num_inputs],
        )
    }

    /// Reads a matrix with one row per input and a header of output labels.
    ///
    /// When the first header cell is empty or `input`, the first column holds
    /// input labels; otherwise inputs are labelled by 0-based row index.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, DecomposeError> {
        let csv_err = |e: csv::Error| DecomposeError::Csv(e.to_string());
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let labelled = header.first().is_some_and(|h| h.is_empty() || h.eq_ignore_ascii_case("input"));
        let outputs = if labelled { header[1..].to_vec() } else { header };
        let mut inputs = Vec::new();
        let mut probs = Vec::new();
        for (i, record) in r.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let mut fields = record.iter();
            inputs.push(if labelled {
                fields.next().unwrap_or_default().to_string()
            } else {
                i.to_string()
            });
            let row = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| DecomposeError::Csv(format!("row {i}: {f:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            probs.push(row);
        }
        Self::new(inputs, outputs, probs)
    }

    pub fn input_index(&self, label: &str) -> Option<usize> {
        self.inputs.iter().position(|l| l == label)
    }

    fn column(&self, s: usize) -> impl Iterator<Item = f64> + '_ {
        self.probs.iter().map(move |row| row[s])
    }
}

/// Smallest `eps0` for which the randomizer is `eps0`-DP; `+inf` when some
/// output is possible under one input and impossible under another.
pub fn verify_ldp(r: &RandomizerMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for s in 0..r.outputs.len() {
        let (lo, hi) = r
            .column(s)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi == 0.0 {
            continue;
        }
        if lo == 0.0 {
            return f64::INFINITY;
        }
        worst = worst.max((hi / lo).ln());
    }
    worst
}

/// Product-form convex weights over the vertices `{1, e^eps}^k`.
///
/// Coordinate `x` sits at `e^eps` with probability `factors[x].1` and at 1
/// with probability `factors[x].0`, independently.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeWeights {
    pub eps: f64,
    pub factors: Vec<(f64, f64)>,
}

impl HypercubeWeights {
    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    /// Weight of one vertex; `high[x]` selects `e^eps` in coordinate `x`.
    pub fn weight(&self, high: &[bool]) -> f64 {
        self.factors
            .iter()
            .zip(high)
            .map(|(&(lo, hi), &h)| if h { hi } else { lo })
            .product()
    }

    /// Mean vertex, coordinatewise.
    pub fn expectation(&self) -> Vec<f64> {
        let e = self.eps.exp();
        self.factors.iter().map(|&(lo, hi)| lo + hi * e).collect()
    }

    /// All `2^k` vertex weights, indexed by bitmask (bit `x` set means
    /// coordinate `x` at `e^eps`). `None` above [`MATERIALIZE_LIMIT`].
    pub fn materialize(&self) -> Option<Vec<f64>> {
        if self.dim() > MATERIALIZE_LIMIT {
            return None;
        }
        let mut weights = vec![1.0];
        for &(lo, hi) in &self.factors {
            weights = weights.iter().map(|w| w * lo).chain(weights.iter().map(|w| w * hi)).collect();
        }
        Some(weights)
    }
}

/// Writes `v` in `[1, e^eps]^k` as a convex combination of hypercube vertices.
pub fn hypercube_decompose(v: &[f64], eps: f64) -> Result<HypercubeWeights, DecomposeError> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(DecomposeError::Domain(format!("eps must be finite and >= 0, got {eps}")));
    }
    let e = eps.exp();
    let factors = v
        .iter()
        .map(|&vx| {
            if !(vx >= 1.0 - 1e-12 && vx <= e + 1e-12 * e) {
                return Err(DecomposeError::Domain(format!("coordinate {vx} outside [1, {e}]")));
            }
            if e == 1.0 {
                return Ok((1.0, 0.0));
            }
            let vx = vx.clamp(1.0, e);
            Ok(((e - vx) / (e - 1.0), (vx - 1.0) / (e - 1.0)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HypercubeWeights { eps, factors })
}

/// Mixture decomposition around the distinguished inputs `x0`, `x1`:
///
/// ```text
/// R(x0) = e^eps0 p Q1^0 + p Q1^1 + (1 - p - e^eps0 p) Q1
/// R(x1) = p Q1^0 + e^eps0 p Q1^1 + (1 - p - e^eps0 p) Q1
/// R(x)  = p Q1^0 + p Q1^1 + q Q1 + (1 - 2p - q) Q_x      for every input x
/// ```
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub eps0: f64,
    pub x0: usize,
    pub x1: usize,
    pub p: f64,
    pub q: f64,
    pub q1_0: Vec<f64>,
    pub q1_1: Vec<f64>,
    pub q1: Vec<f64>,
    /// `Q_x` for every input `x`, in input order.
    pub others: Vec<Vec<f64>>,
    /// Largest absolute reconstruction error over all rows and outputs.
    pub residual: f64,
}

impl DecompositionResult {
    /// Row `x` rebuilt from the components.
    pub fn reconstruct(&self, x: usize) -> Vec<f64> {
        let e = self.eps0.exp();
        let p = self.p;
        let mid = (1.0 - p - e * p).max(0.0);
        (0..self.q1.len())
            .map(|s| {
                if x == self.x0 {
                    e * p * self.q1_0[s] + p * self.q1_1[s] + mid * self.q1[s]
                } else if x == self.x1 {
                    p * self.q1_0[s] + e * p * self.q1_1[s] + mid * self.q1[s]
                } else {
                    self.other_row(x, s)
                }
            })
            .collect()
    }

    fn other_row(&self, x: usize, s: usize) -> f64 {
        let (p, q) = (self.p, self.q);
        p * self.q1_0[s] + p * self.q1_1[s] + q * self.q1[s] + (1.0 - 2.0 * p - q) * self.others[x][s]
    }

    /// Largest error of the third equation, applied to every input
    /// (including `x0` and `x1`, which other users may also hold).
    pub fn other_residual(&self, r: &RandomizerMatrix) -> f64 {
        (0..r.inputs.len())
            .flat_map(|x| (0..r.outputs.len()).map(move |s| (x, s)))
            .map(|(x, s)| (self.other_row(x, s) - r.probs[x][s]).abs())
            .fold(0.0, f64::max)
    }

    fn finish(mut self, r: &RandomizerMatrix) -> Self {
        let mut residual: f64 = 0.0;
        for x in 0..r.inputs.len() {
            let row = self.reconstruct(x);
            for (a, b) in row.iter().zip(&r.probs[x]) {
                residual = residual.max((a - b).abs());
            }
        }
        self.residual = residual.max(self.other_residual(r));
        self
    }
}

fn check_pair(r: &RandomizerMatrix, x0: usize, x1: usize, eps0: f64) -> Result<(), DecomposeError> {
    let k = r.inputs.len();
    if x0 >= k || x1 >= k {
        return Err(DecomposeError::InvalidMatrix(format!("input index out of range ({x0}, {x1})")));
    }
    if x0 == x1 {
        return Err(DecomposeError::InvalidMatrix("x0 and x1 must differ".into()));
    }
    if !(eps0 >= 0.0) || !eps0.is_finite() {
        return Err(DecomposeError::Domain(format!("eps0 must be finite and >= 0, got {eps0}")));
    }
    let found = verify_ldp(r);
    if found > eps0 + 1e-9 {
        return Err(DecomposeError::NotPureDp { found, eps0 });
    }
    Ok(())
}

/// Decomposition obtained from the extremal refinement of `r`.
///
/// `p` is the mass of refined outputs that favour `x0` by the full factor
/// `e^eps0` over `x1`; `q` is the largest weight on `Q1` that keeps every
/// `Q_x` a valid distribution.
pub fn extremal_params(r: &RandomizerMatrix, x0: usize, x1: usize, eps0: f64) -> Result<DecompositionResult, DecomposeError> {
    check_pair(r, x0, x1, eps0)?;
    let e = eps0.exp();
    let m = r.outputs.len();
    let mut lower = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut middle = vec![0.0; m];
    for s in 0..m {
        let p_s = r.column(s).fold(f64::INFINITY, f64::min);
        if p_s <= 0.0 {
            continue;
        }
        // only the two distinguished coordinates matter for the L/U/M masses
        let scaled: Vec<f64> = [x0, x1].iter().map(|&x| (r.probs[x][s] / p_s).min(e)).collect();
        let w = hypercube_decompose(&scaled, eps0)?;
        let (a_lo, a_hi) = w.factors[0];
        let (b_lo, b_hi) = w.factors[1];
        lower[s] = p_s * a_hi * b_lo;
        upper[s] = p_s * a_lo * b_hi;
        middle[s] = p_s * (a_lo * b_lo + e * a_hi * b_hi);
    }
    let p: f64 = lower.iter().sum();
    let mid_weight: f64 = middle.iter().sum();
    let normalize = |v: &[f64], t: f64, fallback: &[f64]| -> Vec<f64> {
        if t > 0.0 {
            v.iter().map(|x| x / t).collect()
        } else {
            fallback.to_vec()
        }
    };
    let q1_0 = normalize(&lower, p, &r.probs[x0]);
    let q1_1 = normalize(&upper, upper.iter().sum(), &r.probs[x1]);
    let q1 = normalize(&middle, mid_weight, &r.probs[x0]);

    let residual_rows: Vec<Vec<f64>> = r
        .probs
        .iter()
        .map(|row| (0..m).map(|s| (row[s] - p * q1_0[s] - p * q1_1[s]).max(0.0)).collect())
        .collect();
    let q = if mid_weight > 0.0 {
        let mut q = 1.0 - 2.0 * p;
        for row in &residual_rows {
            for s in 0..m {
                // entries at rounding level would turn the ratio into noise;
                // the reconstruction residual still accounts for them
                if q1[s] > PROB_TOL {
                    q = q.min(row[s] / q1[s]);
                }
            }
        }
        q.max(0.0)
    } else {
        0.0
    };
    Ok(finish_with_others(r, x0, x1, eps0, p, q, q1_0, q1_1, q1))
}

#[allow(clippy::too_many_arguments)]
fn finish_with_others(
    r: &RandomizerMatrix,
    x0: usize,
    x1: usize,
    eps0: f64,
    p: f64,
    q: f64,
    q1_0: Vec<f64>,
    q1_1: Vec<f64>,
    q1: Vec<f64>,
) -> DecompositionResult {
    let rest = 1.0 - 2.0 * p - q;
    let others = r
        .probs
        .iter()
        .map(|row| {
            if rest <= 0.0 {
                return row.clone();
            }
            row.iter()
                .enumerate()
                .map(|(s, &v)| ((v - p * q1_0[s] - p * q1_1[s] - q * q1[s]) / rest).max(0.0))
                .collect()
        })
        .collect();
    DecompositionResult {
        eps0,
        x0,
        x1,
        p,
        q,
        q1_0,
        q1_1,
        q1,
        others,
        residual: 0.0,
    }
    .finish(r)
}

/// Outcome of the membership test for the class of randomizers that
/// decompose with `p = 1/(e^eps0 + 1)` and no middle component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    /// Largest violation of `(e^eps0 + 1) R(x, s) >= R(x0, s) + R(x1, s)`.
    pub violation: f64,
    /// Input and output where the violation is largest.
    pub worst: Option<(usize, usize)>,
    /// The decomposition; when `member` is false the `Q_x` rows were clamped
    /// and `residual` shows by how much the equations fail.
    pub witness: DecompositionResult,
}

/// Tests whether `r` admits the decomposition with `p = 1/(e^eps0 + 1)`,
/// `q = 0` for the pair `(x0, x1)`.
///
/// With `p` fixed, the first two equations force
/// `Q1^0 = (e R(x0) - R(x1))/(e - 1)` and `Q1^1 = (e R(x1) - R(x0))/(e - 1)`,
/// so membership reduces to `Q_x` being nonnegative for every input.
pub fn in_extremal_class(r: &RandomizerMatrix, x0: usize, x1: usize, eps0: f64) -> Result<Membership, DecomposeError> {
    check_pair(r, x0, x1, eps0)?;
    let e = eps0.exp();
    let m = r.outputs.len();
    let p = 1.0 / (e + 1.0);
    let (r0, r1) = (&r.probs[x0], &r.probs[x1]);
    let (q1_0, q1_1): (Vec<f64>, Vec<f64>) = if e > 1.0 {
        (0..m)
            .map(|s| {
                (
                    ((e * r0[s] - r1[s]) / (e - 1.0)).max(0.0),
                    ((e * r1[s] - r0[s]) / (e - 1.0)).max(0.0),
                )
            })
            .unzip()
    } else {
        (r0.clone(), r1.clone())
    };
    let mut violation: f64 = 0.0;
    let mut worst = None;
    for (x, row) in r.probs.iter().enumerate() {
        for s in 0..m {
            let gap = r0[s] + r1[s] - (e + 1.0) * row[s];
            if gap > violation {
                violation = gap;
                worst = Some((x, s));
            }
        }
    }
    let witness = finish_with_others(r, x0, x1, eps0, p, 0.0, q1_0, q1_1, r0.clone());
    Ok(Membership {
        member: violation <= PROB_TOL && witness.residual <= PROB_TOL,
        violation,
        worst,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_ldp_cases() {
        let r = RandomizerMatrix::krr(3, 1.0).unwrap();
        assert!((verify_ldp(&r) - 1.0).abs() < 1e-12);
        assert_eq!(verify_ldp(&RandomizerMatrix::uniform(3, 4).unwrap()), 0.0);
        let det = RandomizerMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["0".into(), "1".into()],
            vec![vec![1.0, 0.0], vec![0.5, 0.5]],
        )
        .unwrap();
        assert_eq!(verify_ldp(&det), f64::INFINITY);
    }

    #[test]
    fn rappor_tight_eps() {
        let (alpha, beta) = (0.75, 0.25);
        let r = RandomizerMatrix::rappor(3, alpha, beta).unwrap();
        let want = (alpha * (1.0 - beta) / (beta * (1.0 - alpha))).ln();
        assert!((verify_ldp(&r) - want).abs() < 1e-12);
    }

    #[test]
    fn matrix_validation() {
        let bad = RandomizerMatrix::new(vec!["a".into()], vec!["0".into(), "1".into()], vec![vec![0.3, 0.3]]);
        assert!(bad.is_err());
        let neg = RandomizerMatrix::new(vec!["a".into()], vec!["0".into(), "1".into()], vec![vec![1.5, -0.5]]);
        assert!(neg.is_err());
    }

    #[test]
    fn hypercube_vertices_and_example() {
        let eps = 2f64.ln();
        let ones = hypercube_decompose(&[1.0, 1.0, 1.0], eps).unwrap();
        assert_eq!(ones.weight(&[false, false, false]), 1.0);
        let top = hypercube_decompose(&[2.0, 2.0], eps).unwrap();
        assert_eq!(top.weight(&[true, true]), 1.0);
        let w = hypercube_decompose(&[1.5, 1.25], eps).unwrap();
        assert!((w.factors[0].0 - 0.5).abs() < 1e-15 && (w.factors[0].1 - 0.5).abs() < 1e-15);
        assert!((w.factors[1].0 - 0.75).abs() < 1e-15 && (w.factors[1].1 - 0.25).abs() < 1e-15);
        let mean = w.expectation();
        assert!((mean[0] - 1.5).abs() < 1e-12 && (mean[1] - 1.25).abs() < 1e-12);
        let all = w.materialize().unwrap();
        assert!((all.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(hypercube_decompose(&[2.5], eps).is_err());
    }

    #[test]
    fn hypercube_is_lazy_in_high_dimension() {
        let v = vec![1.3; 64];
        let w = hypercube_decompose(&v, 1.0).unwrap();
        assert!(w.materialize().is_none());
        let mut high = vec![false; 64];
        high[3] = true;
        assert!(w.weight(&high) > 0.0);
    }

    #[test]
    fn krr_parameters() {
        for (k, eps0) in (2..=6usize).flat_map(|k| [0.5, 1.0, 1.7, 3.0, 4.0].map(|e| (k, e))) {
            let r = RandomizerMatrix::krr(k, eps0).unwrap();
            let d = extremal_params(&r, 0, 1, eps0).unwrap();
            let denom = eps0.exp() + (k - 1) as f64;
            assert!((d.p - 1.0 / denom).abs() < 1e-12, "k={k} eps0={eps0}");
            assert!((d.q - (k - 2) as f64 / denom).abs() < 1e-12, "k={k} eps0={eps0}");
            assert!(d.residual <= 1e-10);
        }
    }

    #[test]
    fn not_pure_dp_is_reported() {
        let r = RandomizerMatrix::krr(3, 2.0).unwrap();
        assert!(matches!(extremal_params(&r, 0, 1, 1.0), Err(DecomposeError::NotPureDp { .. })));
    }

    #[test]
    fn krr_is_member_and_uniform_is_degenerate_member() {
        for k in 2..=5 {
            let m = in_extremal_class(&RandomizerMatrix::krr(k, 1.0).unwrap(), 0, 1, 1.0).unwrap();
            assert!(m.member, "k={k}");
            assert!(m.witness.residual <= 1e-12);
        }
        let u = in_extremal_class(&RandomizerMatrix::uniform(3, 3).unwrap(), 0, 1, 0.0).unwrap();
        assert!(u.member);
        assert_eq!(u.witness.p, 0.5);
    }

    #[test]
    fn sub_extremal_randomizer_is_not_member() {
        // third input sits below the average of the distinguished rows on output 2
        let r = RandomizerMatrix::new(
            vec!["x0".into(), "x1".into(), "x2".into()],
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.4, 0.2, 0.4], vec![0.2, 0.4, 0.4], vec![0.4, 0.4, 0.2]],
        )
        .unwrap();
        let eps0 = 2f64.ln();
        let m = in_extremal_class(&r, 0, 1, eps0).unwrap();
        assert!(!m.member);
        assert_eq!(m.worst, Some((2, 2)));
        let d = extremal_params(&r, 0, 1, eps0).unwrap();
        assert!(d.p < 1.0 / (eps0.exp() + 1.0));
        assert!(d.residual <= 1e-10);
    }

    #[test]
    fn csv_loader_label_conventions() {
        let labelled = "input,a,b\nx,0.25,0.75\ny,0.5,0.5\n";
        let r = RandomizerMatrix::from_csv(labelled.as_bytes()).unwrap();
        assert_eq!(r.inputs, vec!["x", "y"]);
        assert_eq!(r.outputs, vec!["a", "b"]);
        let bare = "a,b\n0.25,0.75\n0.5,0.5\n";
        let r = RandomizerMatrix::from_csv(bare.as_bytes()).unwrap();
        assert_eq!(r.inputs, vec!["0", "1"]);
        assert!(RandomizerMatrix::from_csv("a,b\n0.2,0.2\n".as_bytes()).is_err());
    }
}
