//! Amplification bounds for shuffled local randomizers.
//!
//! Numeric bounds build a clone pair and invert its hockey-stick curve by
//! bisection, always reading the conservative side of the divergence
//! enclosure: upper bounds use `upper`, lower bounds use `lower`.

use serde::Serialize;
use thiserror::Error;

use crate::clone_dists::{
    build_pair_3sym, build_pair_4sym, build_pair_binary_rr, build_pair_fmt20, CloneError, CloneParams, CountDist,
};
use crate::decompose::Membership;
use crate::divergence::{renyi, DeltaCurve, DivergenceEnclosure, DivergenceError};
use crate::numkit::{bisect_monotone, ln_add_exp, Bracket, NumError};

/// Default bisection tolerance on `eps`, in nats.
pub const DEFAULT_TOL: f64 = 1e-4;

/// Default constant for the closed-form Rényi bound: with
/// `sigma = 16 sqrt(e^eps0 / n)` the sub-Gaussian conversion gives
/// `D^alpha <= 6 alpha sigma^2 = 1536 alpha e^eps0 / n` for `alpha >= 2`.
pub const DEFAULT_RDP_CONSTANT: f64 = 1536.0;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("alpha = {alpha} outside the admissible range (1, {max})")]
    AlphaOutOfRange { alpha: f64, max: f64 },
    #[error(transparent)]
    Clone(#[from] CloneError),
    #[error(transparent)]
    Divergence(#[from] DivergenceError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// An `(eps, delta)` guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdpPoint {
    pub eps: f64,
    pub delta: f64,
}

/// Numeric `eps(delta)` bound together with how it was certified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsBound {
    /// The reported guarantee: the conservative end of the bracket.
    pub point: AdpPoint,
    /// Final bisection bracket around the exact crossing.
    pub bracket: (f64, f64),
    /// `delta(eps)` enclosure at `point.eps`.
    pub delta_at_eps: DivergenceEnclosure,
    /// True when even `eps = eps0` could not be certified for this `delta`;
    /// `point.eps` then falls back to `eps0`.
    pub infeasible: bool,
}

impl EpsBound {
    fn trivial(delta: f64) -> Self {
        EpsBound {
            point: AdpPoint { eps: 0.0, delta },
            bracket: (0.0, 0.0),
            delta_at_eps: DivergenceEnclosure {
                lower: 0.0,
                upper: 0.0,
                slack_source: "identical distributions".into(),
            },
            infeasible: false,
        }
    }

    /// Width of the bisection bracket.
    pub fn width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }
}

/// Acknowledgment that every local randomizer lies in the extremal class,
/// the class for which the general three-symbol reduction is proven.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtremalAck(());

impl ExtremalAck {
    /// The caller asserts class membership without a witness.
    pub fn assume_extremal_class() -> Self {
        ExtremalAck(())
    }

    /// Acknowledgment backed by a successful membership test.
    pub fn from_witness(membership: &Membership) -> Option<Self> {
        membership.member.then_some(ExtremalAck(()))
    }
}

/// Which reduction to use for a numeric upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// Three-symbol pair at `p = 1/(e^eps0 + 1)`; valid for randomizers in the
    /// extremal class only.
    GeneralExtremal(ExtremalAck),
    /// The earlier reduction with clone probability `e^-eps0`; valid for every
    /// `eps0`-DP randomizer.
    Fmt20,
    /// Four-symbol pair for a randomizer decomposing with parameters `(p, q)`.
    Custom { p: f64, q: f64 },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::GeneralExtremal(_) => "general-extremal",
            Variant::Fmt20 => "fmt20",
            Variant::Custom { .. } => "custom",
        }
    }
}

/// Builds the pair for `variant`. `eps0` must be positive.
pub fn pair_for(variant: Variant, eps0: f64, n: u64, trunc: f64) -> Result<(CountDist, CountDist), BoundsError> {
    match variant {
        Variant::GeneralExtremal(_) => Ok(build_pair_3sym(CloneParams::extremal(eps0, n)?, trunc)?),
        Variant::Fmt20 => Ok(build_pair_fmt20(eps0, n, trunc)?),
        Variant::Custom { p, q } => {
            let params = CloneParams::new(eps0, n, p, q)?;
            let extremal_p = 1.0 / (eps0.exp() + 1.0);
            if q == 0.0 && (p - extremal_p).abs() <= 1e-12 * extremal_p {
                Ok(build_pair_3sym(CloneParams { p: extremal_p, ..params }, trunc)?)
            } else {
                Ok(build_pair_4sym(params, trunc)?)
            }
        }
    }
}

fn check_common(eps0: f64, n: u64) -> Result<(), BoundsError> {
    if !(eps0 >= 0.0) || !eps0.is_finite() {
        return Err(BoundsError::InvalidParams(format!("eps0 must be finite and >= 0, got {eps0}")));
    }
    if n < 1 {
        return Err(BoundsError::InvalidParams("n must be >= 1".into()));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<(), BoundsError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundsError::InvalidParams(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<(), BoundsError> {
    if !(tol > 0.0) {
        return Err(BoundsError::InvalidParams(format!("tol must be > 0, got {tol}")));
    }
    Ok(())
}

/// Smallest `eps` in `[0, eps0]` whose `delta` upper bound (both directions)
/// is at most `delta`, up to `tol`.
pub fn eps_upper_from_pair(p: &CountDist, q: &CountDist, eps0: f64, delta: f64, tol: f64) -> Result<EpsBound, BoundsError> {
    eps_upper_from_curve(&DeltaCurve::new(p, q)?, eps0, delta, tol)
}

/// [`eps_upper_from_pair`] on a prebuilt curve, for repeated queries.
pub fn eps_upper_from_curve(curve: &DeltaCurve, eps0: f64, delta: f64, tol: f64) -> Result<EpsBound, BoundsError> {
    let at_eps0 = curve.delta(eps0);
    if at_eps0.upper > delta {
        return Ok(EpsBound {
            point: AdpPoint { eps: eps0, delta },
            bracket: (eps0, eps0),
            delta_at_eps: at_eps0,
            infeasible: true,
        });
    }
    let Bracket { lo, hi } = bisect_monotone(|e| curve.delta(e).upper, delta, 0.0, eps0, tol)?;
    Ok(EpsBound {
        point: AdpPoint { eps: hi, delta },
        bracket: (lo, hi),
        delta_at_eps: curve.delta(hi),
        infeasible: false,
    })
}

/// Largest `eps` in `[0, eps0]` whose `delta` lower bound (either direction)
/// still reaches `delta`, up to `tol`.
pub fn eps_lower_from_pair(p: &CountDist, q: &CountDist, eps0: f64, delta: f64, tol: f64) -> Result<EpsBound, BoundsError> {
    eps_lower_from_curve(&DeltaCurve::new(p, q)?, eps0, delta, tol)
}

/// [`eps_lower_from_pair`] on a prebuilt curve.
pub fn eps_lower_from_curve(curve: &DeltaCurve, eps0: f64, delta: f64, tol: f64) -> Result<EpsBound, BoundsError> {
    let Bracket { lo, hi } = bisect_monotone(|e| curve.delta(e).lower, delta, 0.0, eps0, tol)?;
    Ok(EpsBound {
        point: AdpPoint { eps: lo, delta },
        bracket: (lo, hi),
        delta_at_eps: curve.delta(lo),
        infeasible: false,
    })
}

/// Certified upper bound on the shuffled `eps` at `delta`.
pub fn eps_upper_numeric(
    eps0: f64,
    n: u64,
    delta: f64,
    variant: Variant,
    trunc: f64,
    tol: f64,
) -> Result<EpsBound, BoundsError> {
    check_common(eps0, n)?;
    check_delta(delta)?;
    check_tol(tol)?;
    if eps0 == 0.0 {
        return Ok(EpsBound::trivial(delta));
    }
    let (p, q) = pair_for(variant, eps0, n, trunc)?;
    eps_upper_from_pair(&p, &q, eps0, delta, tol)
}

/// Largest `eps0` for which the closed-form bound applies:
/// `ln(n / (8 ln(2/delta)) - 1)`, or `None` when no `eps0` qualifies.
pub fn analytic_eps0_max(n: u64, delta: f64) -> Option<f64> {
    let arg = n as f64 / (8.0 * (2.0 / delta).ln()) - 1.0;
    (arg > 0.0).then(|| arg.ln())
}

/// Closed-form upper bound
/// `ln(1 + (e^eps0 - 1)(4 sqrt(2 ln(4/delta)) / sqrt((e^eps0 + 1) n) + 4/n))`.
pub fn eps_upper_analytic(eps0: f64, n: u64, delta: f64) -> Result<AdpPoint, BoundsError> {
    check_common(eps0, n)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(BoundsError::InvalidParams(format!("delta must lie in (0, 1], got {delta}")));
    }
    match analytic_eps0_max(n, delta) {
        Some(max) if eps0 <= max => {}
        max => {
            return Err(BoundsError::PreconditionFailed(format!(
                "closed form needs eps0 <= ln(n / (8 ln(2/delta)) - 1) = {}, got eps0 = {eps0}",
                max.map_or("undefined".to_string(), |m| m.to_string())
            )))
        }
    }
    let e = eps0.exp();
    let nf = n as f64;
    let inner = 4.0 * (2.0 * (4.0 / delta).ln()).sqrt() / ((e + 1.0) * nf).sqrt() + 4.0 / nf;
    Ok(AdpPoint {
        eps: (eps0.exp_m1() * inner).ln_1p(),
        delta,
    })
}

/// Privacy-loss tail bound of the mixed clone pair:
/// `ln(1 + tanh(eps0/2) (sqrt(32 ln(4/delta)) / sqrt(p n) + 4/(p n)))`.
///
/// `eps0 = f64::INFINITY` selects the unmixed pair, where the `tanh` factor
/// becomes 1.
pub fn tail_eps(eps0: f64, n: u64, p: f64, delta: f64) -> Result<f64, BoundsError> {
    if !(eps0 >= 0.0) {
        return Err(BoundsError::InvalidParams(format!("eps0 must be >= 0, got {eps0}")));
    }
    check_delta(delta)?;
    let p_max = if eps0.is_infinite() { 0.5 } else { 1.0 / (eps0.exp() + 1.0) };
    if !(p > 0.0 && p <= p_max * (1.0 + 1e-12)) {
        return Err(BoundsError::InvalidParams(format!("p={p} outside (0, {p_max}]")));
    }
    let pn = p * n as f64;
    let needed = 8.0 * (2.0 / delta).ln() / p;
    if (n as f64) < needed {
        return Err(BoundsError::PreconditionFailed(format!("needs n >= 8 ln(2/delta)/p = {needed}, got n = {n}")));
    }
    let factor = if eps0.is_infinite() { 1.0 } else { (eps0 / 2.0).tanh() };
    Ok((factor * ((32.0 * (4.0 / delta).ln()).sqrt() / pn.sqrt() + 4.0 / pn)).ln_1p())
}

/// Rényi divergence of order `alpha` between the pair for `variant`.
pub fn rdp_upper_numeric(
    eps0: f64,
    n: u64,
    alpha: f64,
    variant: Variant,
    trunc: f64,
) -> Result<DivergenceEnclosure, BoundsError> {
    check_common(eps0, n)?;
    if !(alpha > 1.0) {
        return Err(DivergenceError::AlphaDomain(alpha).into());
    }
    if eps0 == 0.0 {
        return Ok(DivergenceEnclosure {
            lower: 0.0,
            upper: 0.0,
            slack_source: "identical distributions".into(),
        });
    }
    let (p, q) = pair_for(variant, eps0, n, trunc)?;
    Ok(renyi(&p, &q, alpha)?)
}

/// Largest admissible order for the closed-form Rényi bound,
/// `n / (32 eps0 e^eps0)`.
pub fn rdp_closedform_alpha_max(eps0: f64, n: u64) -> f64 {
    n as f64 / (32.0 * eps0 * eps0.exp())
}

/// Closed-form Rényi bound `alpha c (1 - e^-eps0)^2 e^eps0 / n`.
pub fn rdp_upper_closedform(eps0: f64, n: u64, alpha: f64, c: f64) -> Result<f64, BoundsError> {
    check_common(eps0, n)?;
    if !(c > 0.0) {
        return Err(BoundsError::InvalidParams(format!("c must be > 0, got {c}")));
    }
    let max = rdp_closedform_alpha_max(eps0, n);
    if !(alpha > 1.0 && alpha < max) {
        return Err(BoundsError::AlphaOutOfRange { alpha, max });
    }
    let shrink = -(-eps0).exp_m1();
    Ok(alpha * c * shrink * shrink * eps0.exp() / n as f64)
}

/// Sub-Gaussian privacy-loss tail:
/// `Pr[|L| >= sigma sqrt(ln(1/d))] <= 2d` for all `d >= delta_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubGaussianTail {
    pub sigma: f64,
    pub delta_min: f64,
    pub eps0: f64,
}

impl SubGaussianTail {
    pub fn new(sigma: f64, delta_min: f64, eps0: f64) -> Result<Self, BoundsError> {
        if !(sigma > 0.0) || !(0.0..=1.0).contains(&delta_min) || !(eps0 >= 0.0) {
            return Err(BoundsError::InvalidParams(format!(
                "need sigma > 0, delta_min in [0, 1], eps0 >= 0; got ({sigma}, {delta_min}, {eps0})"
            )));
        }
        Ok(SubGaussianTail { sigma, delta_min, eps0 })
    }

    /// Largest loss covered by the tail condition, `sigma sqrt(ln(1/delta_min))`.
    pub fn eps_max(&self) -> f64 {
        self.sigma * (1.0 / self.delta_min).ln().sqrt()
    }

    /// Whether `delta_min <= e^(-alpha eps0) alpha^2 sigma^2 / 4`.
    pub fn condition_holds(&self, alpha: f64) -> bool {
        self.delta_min <= (-alpha * self.eps0).exp() * alpha * alpha * self.sigma * self.sigma / 4.0
    }

    /// `3 alpha^2 sigma^2 / (alpha - 1)`.
    pub fn simplified_bound(&self, alpha: f64) -> f64 {
        3.0 * alpha * alpha * self.sigma * self.sigma / (alpha - 1.0)
    }
}

/// Rényi bound implied by a sub-Gaussian loss tail:
/// `ln(e^(2 alpha^2 sigma^2) + 4 delta_min e^(alpha eps0)) / (alpha - 1)`.
pub fn adp_to_rdp(tail: &SubGaussianTail, alpha: f64) -> Result<f64, BoundsError> {
    if !(alpha > 1.0) {
        return Err(BoundsError::AlphaOutOfRange { alpha, max: f64::INFINITY });
    }
    let s2 = tail.sigma * tail.sigma;
    let mix = if tail.delta_min > 0.0 {
        4f64.ln() + tail.delta_min.ln() + alpha * tail.eps0
    } else {
        f64::NEG_INFINITY
    };
    let value = ln_add_exp(2.0 * alpha * alpha * s2, mix) / (alpha - 1.0);
    debug_assert!(!tail.condition_holds(alpha) || value <= tail.simplified_bound(alpha) * (1.0 + 1e-12));
    Ok(value)
}

/// Query for the randomized-response bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KrrMode {
    Adp { delta: f64 },
    Rdp { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum KrrValue {
    Adp(EpsBound),
    Rdp(DivergenceEnclosure),
}

/// Pair giving the specialized upper bound for k-ary randomized response.
pub fn krr_upper_pair(eps0: f64, k: u64, n: u64, trunc: f64) -> Result<(CountDist, CountDist), BoundsError> {
    if k < 2 {
        return Err(BoundsError::InvalidParams(format!("k must be >= 2, got {k}")));
    }
    if k == 2 {
        Ok(build_pair_3sym(CloneParams::extremal(eps0, n)?, trunc)?)
    } else {
        Ok(build_pair_4sym(CloneParams::krr(eps0, k, n)?, trunc)?)
    }
}

/// Upper bound for shuffled k-ary randomized response.
pub fn krr_upper(eps0: f64, k: u64, n: u64, mode: KrrMode, trunc: f64, tol: f64) -> Result<KrrValue, BoundsError> {
    check_common(eps0, n)?;
    if k < 2 {
        return Err(BoundsError::InvalidParams(format!("k must be >= 2, got {k}")));
    }
    match mode {
        KrrMode::Adp { delta } => {
            check_delta(delta)?;
            check_tol(tol)?;
            if eps0 == 0.0 {
                return Ok(KrrValue::Adp(EpsBound::trivial(delta)));
            }
            let (p, q) = krr_upper_pair(eps0, k, n, trunc)?;
            Ok(KrrValue::Adp(eps_upper_from_pair(&p, &q, eps0, delta, tol)?))
        }
        KrrMode::Rdp { alpha } => {
            if !(alpha > 1.0) {
                return Err(DivergenceError::AlphaDomain(alpha).into());
            }
            if eps0 == 0.0 {
                return Ok(KrrValue::Rdp(DivergenceEnclosure {
                    lower: 0.0,
                    upper: 0.0,
                    slack_source: "identical distributions".into(),
                }));
            }
            let (p, q) = krr_upper_pair(eps0, k, n, trunc)?;
            Ok(KrrValue::Rdp(renyi(&p, &q, alpha)?))
        }
    }
}

/// Pair whose divergence is a lower bound for shuffled k-ary randomized
/// response: the three-symbol pair at `p = 1/(e^eps0 + k - 1)` for `k >= 3`,
/// and the binary response counts for `k = 2`.
pub fn krr_lower_pair(eps0: f64, k: u64, n: u64, trunc: f64) -> Result<(CountDist, CountDist), BoundsError> {
    match k {
        0 | 1 => Err(BoundsError::InvalidParams(format!("k must be >= 2, got {k}"))),
        2 => Ok(build_pair_binary_rr(eps0, n, trunc)?),
        _ => {
            let p = 1.0 / (eps0.exp() + (k - 1) as f64);
            Ok(build_pair_3sym(CloneParams::new(eps0, n, p, 0.0)?, trunc)?)
        }
    }
}

/// Certified lower bound on the shuffled `eps` of k-ary randomized response.
pub fn krr_lower(eps0: f64, k: u64, n: u64, delta: f64, trunc: f64, tol: f64) -> Result<EpsBound, BoundsError> {
    check_common(eps0, n)?;
    check_delta(delta)?;
    check_tol(tol)?;
    if eps0 == 0.0 {
        return Ok(EpsBound::trivial(delta));
    }
    let (p, q) = krr_lower_pair(eps0, k, n, trunc)?;
    eps_lower_from_pair(&p, &q, eps0, delta, tol)
}

/// Lower bound on the Rényi divergence of shuffled k-ary randomized
/// response, maximized over both directions.
pub fn krr_lower_rdp(eps0: f64, k: u64, n: u64, alpha: f64, trunc: f64) -> Result<f64, BoundsError> {
    check_common(eps0, n)?;
    if eps0 == 0.0 {
        return Ok(0.0);
    }
    let (p, q) = krr_lower_pair(eps0, k, n, trunc)?;
    Ok(renyi(&p, &q, alpha)?.lower.max(renyi(&q, &p, alpha)?.lower))
}
