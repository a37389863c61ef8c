//! Certified divergences between count distributions.
//!
//! Every result is an interval. The lower end uses only stored atoms; the
//! upper end additionally charges the worst case the omitted tail could
//! contribute, using `dropped_tail` and `max_ratio_bound`.

use serde::Serialize;
use thiserror::Error;

use crate::clone_dists::{Cell, CountDist};
use crate::numkit::{ln_add_exp, LogSumExp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DivergenceError {
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(u8, u8),
    #[error("Renyi order must exceed 1, got {0}")]
    AlphaDomain(f64),
    #[error("eps must be >= 0, got {0}")]
    EpsDomain(f64),
    #[error("atom {0:?} has mass under P but none under Q")]
    MissingSupport([u64; 3]),
}

/// Certified `[lower, upper]` range for a divergence value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceEnclosure {
    pub lower: f64,
    pub upper: f64,
    /// What made the interval wider than rounding alone.
    pub slack_source: String,
}

impl DivergenceEnclosure {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lower - tol <= x && x <= self.upper + tol
    }

    fn new(lower: f64, upper: f64, slack_source: String) -> Self {
        let upper = upper.max(lower);
        DivergenceEnclosure {
            lower,
            upper,
            slack_source,
        }
    }
}

fn check_arity(p: &CountDist, q: &CountDist) -> Result<(), DivergenceError> {
    if p.arity() != q.arity() {
        return Err(DivergenceError::ArityMismatch(p.arity(), q.arity()));
    }
    Ok(())
}

fn ratio_bound(p: &CountDist, q: &CountDist) -> f64 {
    p.max_ratio_bound().max(q.max_ratio_bound())
}

/// Visits every atom stored in either distribution with its two log-masses.
fn for_each_aligned<F>(p: &CountDist, q: &CountDist, mut f: F)
where
    F: FnMut([u64; 3], f64, f64),
{
    fn visit<F: FnMut([u64; 3], f64, f64)>(a: Option<&Cell>, b: Option<&Cell>, f: &mut F) {
        let (key, start, end) = match (a, b) {
            (Some(x), Some(y)) => (x.key(), x.n0_start.min(y.n0_start), x.n0_end().max(y.n0_end())),
            (Some(x), None) | (None, Some(x)) => (x.key(), x.n0_start, x.n0_end()),
            (None, None) => return,
        };
        let (n2, s) = key;
        for n0 in start..end {
            let lp = a.map_or(f64::NEG_INFINITY, |c| c.get(n0));
            let lq = b.map_or(f64::NEG_INFINITY, |c| c.get(n0));
            f([n0, s - n0, n2], lp, lq);
        }
    }
    let (pc, qc) = (p.cells(), q.cells());
    let (mut i, mut j) = (0, 0);
    while i < pc.len() || j < qc.len() {
        match (pc.get(i), qc.get(j)) {
            (Some(a), Some(b)) if a.key() == b.key() => {
                visit(Some(a), Some(b), &mut f);
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a.key() < b.key() => {
                visit(Some(a), None, &mut f);
                i += 1;
            }
            (Some(_), Some(b)) | (None, Some(b)) => {
                visit(None, Some(b), &mut f);
                j += 1;
            }
            (Some(a), None) => {
                visit(Some(a), None, &mut f);
                i += 1;
            }
            (None, None) => unreachable!(),
        }
    }
}

/// Sums `f(ln P, ln Q)` over aligned atoms. Inside each cell, atoms are
/// added in mirrored pairs `(n0, s - n0)`, so swapping the roles of a
/// mirror-symmetric pair reproduces the sum bit for bit.
fn sum_aligned<F>(p: &CountDist, q: &CountDist, f: F) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let mut total = 0.0;
    let mut cell_sum = |a: Option<&Cell>, b: Option<&Cell>| {
        let (s, start, end) = match (a, b) {
            (Some(x), Some(y)) => (x.s, x.n0_start.min(y.n0_start), x.n0_end().max(y.n0_end())),
            (Some(x), None) | (None, Some(x)) => (x.s, x.n0_start, x.n0_end()),
            (None, None) => return,
        };
        let term = |n0: u64| {
            let lp = a.map_or(f64::NEG_INFINITY, |c| c.get(n0));
            let lq = b.map_or(f64::NEG_INFINITY, |c| c.get(n0));
            f(lp, lq)
        };
        let mut acc = 0.0;
        if start + end - 1 == s {
            let (mut i, mut j) = (start, end - 1);
            while i < j {
                acc += term(i) + term(j);
                i += 1;
                j -= 1;
            }
            if i == j {
                acc += term(i);
            }
        } else {
            for n0 in start..end {
                acc += term(n0);
            }
        }
        total += acc;
    };
    let (pc, qc) = (p.cells(), q.cells());
    let (mut i, mut j) = (0, 0);
    while i < pc.len() || j < qc.len() {
        match (pc.get(i), qc.get(j)) {
            (Some(a), Some(b)) if a.key() == b.key() => {
                cell_sum(Some(a), Some(b));
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a.key() < b.key() => {
                cell_sum(Some(a), None);
                i += 1;
            }
            (Some(_), Some(b)) | (None, Some(b)) => {
                cell_sum(None, Some(b));
                j += 1;
            }
            (Some(a), None) => {
                cell_sum(Some(a), None);
                i += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    total
}

// max(0, e^lp - e^(lq + eps)) without cancellation.
#[inline]
fn hockey_term(lp: f64, lq: f64, eps: f64) -> f64 {
    let lq = lq + eps;
    if lp <= lq {
        0.0
    } else {
        -lp.exp() * (lq - lp).exp_m1()
    }
}

/// `D_{e^eps}(P || Q) = sum max(0, P - e^eps Q)`.
pub fn hockey_stick(p: &CountDist, q: &CountDist, eps: f64) -> Result<DivergenceEnclosure, DivergenceError> {
    check_arity(p, q)?;
    if !(eps >= 0.0) {
        return Err(DivergenceError::EpsDomain(eps));
    }
    let tail = p.dropped_tail().prob();
    let core = if eps >= ratio_bound(p, q).ln() {
        0.0
    } else {
        sum_aligned(p, q, |lp, lq| hockey_term(lp, lq, eps))
    };
    Ok(DivergenceEnclosure::new(core, (core + tail).min(1.0), format!("P dropped tail {tail:e}")))
}

/// Hockey-stick divergence maximized over both directions.
pub fn hockey_stick_sym(p: &CountDist, q: &CountDist, eps: f64) -> Result<DivergenceEnclosure, DivergenceError> {
    let a = hockey_stick(p, q, eps)?;
    let b = hockey_stick(q, p, eps)?;
    Ok(DivergenceEnclosure::new(
        a.lower.max(b.lower),
        a.upper.max(b.upper),
        a.slack_source,
    ))
}

/// `D^alpha(P || Q) = ln(E_Q[(P/Q)^alpha]) / (alpha - 1)`.
pub fn renyi(p: &CountDist, q: &CountDist, alpha: f64) -> Result<DivergenceEnclosure, DivergenceError> {
    check_arity(p, q)?;
    if !(alpha > 1.0) || alpha.is_infinite() {
        return Err(DivergenceError::AlphaDomain(alpha));
    }
    let mut moment = LogSumExp::new();
    let mut missing = None;
    for_each_aligned(p, q, |c, lp, lq| {
        if lp == f64::NEG_INFINITY {
            return;
        }
        if lq == f64::NEG_INFINITY {
            missing.get_or_insert(c);
            return;
        }
        moment.add(alpha * lp + (1.0 - alpha) * lq);
    });
    if let Some(c) = missing {
        return Err(DivergenceError::MissingSupport(c));
    }
    let ln_moment = moment.value();
    let bound = ratio_bound(p, q);
    let q_tail = q.dropped_tail().value();
    let lower = (ln_moment / (alpha - 1.0)).max(0.0);
    let upper = (ln_add_exp(ln_moment, q_tail + alpha * bound.ln()) / (alpha - 1.0)).min(bound.ln());
    Ok(DivergenceEnclosure::new(
        lower,
        upper.max(0.0),
        format!("Q dropped tail {:e} at ratio bound {bound:e}", q_tail.exp()),
    ))
}

/// `KL(P || Q)`.
pub fn kl(p: &CountDist, q: &CountDist) -> Result<DivergenceEnclosure, DivergenceError> {
    check_arity(p, q)?;
    let mut core = 0.0;
    let mut missing = None;
    for_each_aligned(p, q, |c, lp, lq| {
        if lp == f64::NEG_INFINITY {
            return;
        }
        if lq == f64::NEG_INFINITY {
            missing.get_or_insert(c);
            return;
        }
        core += lp.exp() * (lp - lq);
    });
    if let Some(c) = missing {
        return Err(DivergenceError::MissingSupport(c));
    }
    let log_bound = ratio_bound(p, q).ln();
    let tail = p.dropped_tail().prob();
    let slack = if tail == 0.0 { 0.0 } else { log_bound * tail };
    Ok(DivergenceEnclosure::new(
        (core - slack).max(0.0),
        (core + slack).min(log_bound).max(0.0),
        format!("P dropped tail {tail:e} at log ratio bound {log_bound:e}"),
    ))
}

/// `Pr_{x ~ Q}[|ln(P(x)/Q(x))| > eps]`.
///
/// The event uses a strict inequality so that its complement is the
/// "loss within `[-eps, eps]`" event of the tail bounds.
pub fn plr_tail(p: &CountDist, q: &CountDist, eps: f64) -> Result<DivergenceEnclosure, DivergenceError> {
    check_arity(p, q)?;
    if !(eps >= 0.0) {
        return Err(DivergenceError::EpsDomain(eps));
    }
    let tail = q.dropped_tail().prob();
    let core = if eps >= ratio_bound(p, q).ln() {
        0.0
    } else {
        sum_aligned(p, q, |lp, lq| {
            if lq > f64::NEG_INFINITY && (lp - lq).abs() > eps {
                lq.exp()
            } else {
                0.0
            }
        })
    };
    Ok(DivergenceEnclosure::new(core, (core + tail).min(1.0), format!("Q dropped tail {tail:e}")))
}

/// Privacy-loss atoms of one direction sorted by decreasing loss, for fast
/// repeated hockey-stick queries at different `eps`.
#[derive(Debug, Clone)]
pub struct LossProfile {
    // (ln P - ln Q, ln P), decreasing in the first component
    losses: Vec<(f64, f64)>,
    tail: f64,
    log_ratio_bound: f64,
}

impl LossProfile {
    pub fn new(p: &CountDist, q: &CountDist) -> Result<Self, DivergenceError> {
        check_arity(p, q)?;
        let mut losses = Vec::with_capacity(p.num_atoms());
        for_each_aligned(p, q, |_, lp, lq| {
            if lp > f64::NEG_INFINITY {
                losses.push((lp - lq, lp));
            }
        });
        losses.sort_by(|a, b| b.0.total_cmp(&a.0));
        Ok(LossProfile {
            losses,
            tail: p.dropped_tail().prob(),
            log_ratio_bound: ratio_bound(p, q).ln(),
        })
    }

    /// Same value as [`hockey_stick`], in time proportional to the number of
    /// atoms whose loss exceeds `eps`.
    pub fn delta(&self, eps: f64) -> DivergenceEnclosure {
        let mut core = 0.0;
        if eps < self.log_ratio_bound {
            for &(loss, lp) in &self.losses {
                if loss <= eps {
                    break;
                }
                core -= lp.exp() * (eps - loss).exp_m1();
            }
        }
        DivergenceEnclosure::new(core, (core + self.tail).min(1.0), format!("P dropped tail {:e}", self.tail))
    }
}

/// `delta(eps)` maximized over both directions of a pair.
#[derive(Debug, Clone)]
pub struct DeltaCurve {
    forward: LossProfile,
    backward: LossProfile,
}

impl DeltaCurve {
    pub fn new(p: &CountDist, q: &CountDist) -> Result<Self, DivergenceError> {
        Ok(DeltaCurve {
            forward: LossProfile::new(p, q)?,
            backward: LossProfile::new(q, p)?,
        })
    }

    pub fn delta(&self, eps: f64) -> DivergenceEnclosure {
        let a = self.forward.delta(eps);
        let b = self.backward.delta(eps);
        DivergenceEnclosure::new(a.lower.max(b.lower), a.upper.max(b.upper), a.slack_source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clone_dists::{build_pair_3sym, build_pair_binary_rr, CloneParams, DEFAULT_TRUNC};
    use crate::numkit::LogProb;

    fn single_user(eps0: f64) -> (CountDist, CountDist) {
        build_pair_3sym(CloneParams::extremal(eps0, 1).unwrap(), DEFAULT_TRUNC).unwrap()
    }

    #[test]
    fn identical_distributions() {
        let (p, _) = build_pair_3sym(CloneParams::extremal(1.0, 30).unwrap(), 1e-12).unwrap();
        let hs = hockey_stick(&p, &p, 0.0).unwrap();
        assert_eq!(hs.lower, 0.0);
        assert!(hs.upper <= 1e-12);
        let r = renyi(&p, &p, 3.0).unwrap();
        assert!(r.lower.abs() < 1e-12 && r.upper >= 0.0);
        let k = kl(&p, &p).unwrap();
        assert!(k.lower.abs() < 1e-12);
        let t = plr_tail(&p, &p, 0.0).unwrap();
        assert_eq!(t.lower, 0.0);
    }

    #[test]
    fn single_user_closed_forms() {
        let eps0 = 1.3f64;
        let e = eps0.exp();
        let (p, q) = single_user(eps0);
        for &eps in &[0.0f64, 0.4, 1.0] {
            let want = (e - eps.exp()) / (e + 1.0);
            let got = hockey_stick(&p, &q, eps).unwrap();
            assert!(got.contains(want, 1e-15), "{got:?} vs {want}");
        }
        for &alpha in &[1.5, 2.0, 8.0] {
            let want = (((alpha * eps0).exp() + ((1.0 - alpha) * eps0).exp()) / (e + 1.0)).ln() / (alpha - 1.0);
            let got = renyi(&p, &q, alpha).unwrap();
            assert!((got.lower - want).abs() < 1e-12, "{alpha}: {got:?} vs {want}");
        }
        let want = eps0 * (e - 1.0) / (e + 1.0);
        let got = kl(&p, &q).unwrap();
        assert!((got.lower - want).abs() < 1e-12);
        assert!(got.upper <= renyi(&p, &q, 2.0).unwrap().upper + 1e-12);
    }

    #[test]
    fn ratio_bound_kills_hockey_and_tail() {
        let (p, q) = build_pair_3sym(CloneParams::extremal(2.0, 100).unwrap(), 1e-12).unwrap();
        let hs = hockey_stick(&p, &q, 2.0).unwrap();
        assert_eq!(hs.lower, 0.0);
        assert!(hs.upper <= p.dropped_tail().prob());
        let t = plr_tail(&p, &q, 2.5).unwrap();
        assert_eq!(t.lower, 0.0);
    }

    #[test]
    fn symmetric_pair_at_eps0_zero_has_no_tail() {
        let (p, q) = build_pair_3sym(CloneParams::new(0.0, 10, 0.5, 0.0).unwrap(), 0.0).unwrap();
        let t = plr_tail(&p, &q, 0.0).unwrap();
        assert!(t.upper < 1e-12, "{t:?}");
    }

    #[test]
    fn direction_symmetry_is_exact() {
        let (p, q) = build_pair_3sym(CloneParams::extremal(3.0, 500).unwrap(), 1e-14).unwrap();
        for &eps in &[0.0, 0.3, 1.1] {
            let a = hockey_stick(&p, &q, eps).unwrap();
            let b = hockey_stick(&q, &p, eps).unwrap();
            assert_eq!(a.lower, b.lower);
        }
    }

    #[test]
    fn loss_profile_matches_direct_sum() {
        let (p, q) = build_pair_binary_rr(2.0, 300, 1e-13).unwrap();
        let curve = DeltaCurve::new(&p, &q).unwrap();
        for &eps in &[0.0, 0.05, 0.2, 0.7, 1.9] {
            let direct = hockey_stick_sym(&p, &q, eps).unwrap();
            let fast = curve.delta(eps);
            assert!((direct.lower - fast.lower).abs() <= 1e-14 * direct.lower.max(1e-300) + 1e-300);
            assert_eq!(direct.upper >= direct.lower, fast.upper >= fast.lower);
        }
    }

    #[test]
    fn renyi_monotone_in_alpha() {
        let (p, q) = build_pair_3sym(CloneParams::extremal(2.0, 200).unwrap(), 1e-14).unwrap();
        let mut prev = 0.0;
        for &alpha in &[1.1, 1.5, 2.0, 4.0, 16.0, 64.0] {
            let r = renyi(&p, &q, alpha).unwrap();
            assert!(r.lower + 1e-12 >= prev, "alpha {alpha}");
            assert!(r.upper <= 2.0 + 1e-15);
            prev = r.lower;
        }
    }

    #[test]
    fn renyi_rejects_bad_order_and_support() {
        let (p, q) = single_user(1.0);
        assert!(matches!(renyi(&p, &q, 1.0), Err(DivergenceError::AlphaDomain(_))));
        let a = CountDist::from_atoms(2, vec![(vec![1, 0], 0.0)], LogProb::ZERO, 2.0).unwrap();
        let b = CountDist::from_atoms(2, vec![(vec![0, 1], 0.0)], LogProb::ZERO, 2.0).unwrap();
        assert!(matches!(renyi(&a, &b, 2.0), Err(DivergenceError::MissingSupport(_))));
        // disjoint supports: all of P's mass counts for the hockey-stick
        assert_eq!(hockey_stick(&a, &b, 0.5).unwrap().lower, 1.0);
    }

    #[test]
    fn arity_mismatch() {
        let (p, _) = single_user(1.0);
        let r = CountDist::from_atoms(3, vec![(vec![1, 0, 0], 0.0)], LogProb::ZERO, 2.0).unwrap();
        assert!(matches!(hockey_stick(&p, &r, 0.1), Err(DivergenceError::ArityMismatch(2, 3))));
    }
}
