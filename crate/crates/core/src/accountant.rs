//! Multi-round composition: Rényi curves, conversion to `(eps, delta)`, and
//! the advanced-composition baseline.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{eps_upper_from_curve, pair_for, AdpPoint, BoundsError, Variant};
use crate::divergence::{renyi, DeltaCurve};

#[derive(Debug, Error)]
pub enum AccountantError {
    #[error("alpha grids differ between curves")]
    GridMismatch,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

/// Geometric orders `1.25 * 2^(j/4)` below 1024, the endpoint 1024 itself,
/// and the integers 2 to 64, sorted and deduplicated.
pub fn default_alpha_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..)
        .map(|j| 1.25 * 2f64.powf(j as f64 / 4.0))
        .take_while(|&a| a < 1024.0)
        .collect();
    grid.push(1024.0);
    grid.extend((2..=64).map(|a| a as f64));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * *b);
    grid
}

/// Rényi-DP curve `alpha -> eps(alpha)` on a fixed grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdpCurve {
    alphas: Vec<f64>,
    eps: Vec<f64>,
    pub provenance: String,
}

impl RdpCurve {
    pub fn new(alphas: Vec<f64>, eps: Vec<f64>, provenance: impl Into<String>) -> Result<Self, AccountantError> {
        if alphas.len() != eps.len() {
            return Err(AccountantError::InvalidParams("alphas and eps differ in length".into()));
        }
        if alphas.iter().any(|&a| !(a > 1.0)) || alphas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(AccountantError::InvalidParams("alphas must be > 1 and strictly increasing".into()));
        }
        if eps.iter().any(|&e| !(e >= 0.0)) {
            return Err(AccountantError::InvalidParams("eps values must be >= 0".into()));
        }
        Ok(RdpCurve { alphas, eps, provenance: provenance.into() })
    }

    pub fn zero(alphas: Vec<f64>) -> Result<Self, AccountantError> {
        let eps = vec![0.0; alphas.len()];
        RdpCurve::new(alphas, eps, "zero")
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.alphas.iter().copied().zip(self.eps.iter().copied())
    }

    /// The curve of `t`-fold self composition.
    pub fn scaled(&self, t: u64) -> RdpCurve {
        RdpCurve {
            alphas: self.alphas.clone(),
            eps: self.eps.iter().map(|e| e * t as f64).collect(),
            provenance: format!("{} x{t}", self.provenance),
        }
    }

    /// Writes `alpha,eps` rows with a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), AccountantError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["alpha", "eps"])?;
        for (a, e) in self.points() {
            w.write_record([format!("{a:.14e}"), format!("{e:.14e}")])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Pointwise sum of curves sharing one grid; the empty list gives the zero
/// curve on [`default_alpha_grid`].
pub fn compose_rdp(curves: &[RdpCurve]) -> Result<RdpCurve, AccountantError> {
    let Some(first) = curves.first() else {
        return RdpCurve::zero(default_alpha_grid());
    };
    let mut eps = vec![0.0; first.alphas.len()];
    for c in curves {
        if c.alphas != first.alphas {
            return Err(AccountantError::GridMismatch);
        }
        for (acc, e) in eps.iter_mut().zip(&c.eps) {
            *acc += e;
        }
    }
    let provenance = if curves.iter().all(|c| c.provenance == first.provenance) {
        format!("{} x{}", first.provenance, curves.len())
    } else {
        "composition".to_string()
    };
    Ok(RdpCurve { alphas: first.alphas.clone(), eps, provenance })
}

/// Result of converting a Rényi curve to `(eps, delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conversion {
    pub point: AdpPoint,
    /// Order attaining the minimum.
    pub alpha: f64,
}

/// `min_alpha [eps(alpha) + ln(1/(alpha delta))/(alpha - 1) + ln(1 - 1/alpha)]`,
/// clamped at 0.
pub fn rdp_to_adp(curve: &RdpCurve, delta: f64) -> Result<Conversion, AccountantError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(AccountantError::InvalidParams(format!("delta must lie in (0, 1), got {delta}")));
    }
    if curve.alphas.is_empty() {
        return Err(AccountantError::InvalidParams("empty alpha grid".into()));
    }
    let (alpha, eps) = curve
        .points()
        .map(|(a, e)| (a, e + (1.0 / (a * delta)).ln() / (a - 1.0) + (-1.0 / a).ln_1p()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty grid");
    Ok(Conversion { point: AdpPoint { eps: eps.max(0.0), delta }, alpha })
}

/// `(eps sqrt(2 T ln(1/delta')) + T eps (e^eps - 1), T delta + delta')`.
pub fn advanced_composition(eps: f64, delta: f64, t: u64, delta_prime: f64) -> Result<AdpPoint, AccountantError> {
    if t < 1 || !(eps >= 0.0) || !(0.0..=1.0).contains(&delta) || !(delta_prime > 0.0 && delta_prime < 1.0) {
        return Err(AccountantError::InvalidParams(format!(
            "need T >= 1, eps >= 0, delta in [0, 1], delta' in (0, 1); got ({eps}, {delta}, {t}, {delta_prime})"
        )));
    }
    let tf = t as f64;
    Ok(AdpPoint {
        eps: eps * (2.0 * tf * (1.0 / delta_prime).ln()).sqrt() + tf * eps * eps.exp_m1(),
        delta: tf * delta + delta_prime,
    })
}

/// Rényi curve of one shuffled round, from the upper side of each enclosure.
pub fn shuffled_rdp_curve(
    eps0: f64,
    n: u64,
    variant: Variant,
    trunc: f64,
    alphas: Vec<f64>,
) -> Result<RdpCurve, AccountantError> {
    let provenance = format!("{}(eps0={eps0}, n={n})", variant.name());
    if eps0 == 0.0 {
        return RdpCurve::new(alphas.clone(), vec![0.0; alphas.len()], provenance);
    }
    let (p, q) = pair_for(variant, eps0, n, trunc)?;
    let eps = alphas
        .iter()
        .map(|&a| renyi(&p, &q, a).map(|d| d.upper.min(eps0)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(BoundsError::from)?;
    RdpCurve::new(alphas, eps, provenance)
}

/// One row of the composition comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositionRow {
    pub t: u64,
    /// Composed Rényi curve converted at the full `delta`.
    pub rdp: Conversion,
    /// Per-round numeric bound at `delta / (2T)`, composed with
    /// `delta' = delta / 2`.
    pub advanced: AdpPoint,
    pub per_round_eps: f64,
}

/// Both composition routes over `ts`, each ending at total failure
/// probability `delta`.
pub fn composition_comparison(
    eps0: f64,
    n: u64,
    delta: f64,
    ts: &[u64],
    variant: Variant,
    trunc: f64,
    tol: f64,
) -> Result<Vec<CompositionRow>, AccountantError> {
    if !(delta > 0.0 && delta < 1.0) || !(eps0 > 0.0) {
        return Err(AccountantError::InvalidParams(format!("need eps0 > 0 and delta in (0, 1); got {eps0}, {delta}")));
    }
    let (p, q) = pair_for(variant, eps0, n, trunc)?;
    let curve = DeltaCurve::new(&p, &q).map_err(BoundsError::from)?;
    let alphas = default_alpha_grid();
    let eps = alphas
        .iter()
        .map(|&a| renyi(&p, &q, a).map(|d| d.upper.min(eps0)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(BoundsError::from)?;
    let single = RdpCurve::new(alphas, eps, format!("{}(eps0={eps0}, n={n})", variant.name()))?;
    ts.iter()
        .map(|&t| {
            if t < 1 {
                return Err(AccountantError::InvalidParams("T must be >= 1".into()));
            }
            let rdp = rdp_to_adp(&single.scaled(t), delta)?;
            let per_round = eps_upper_from_curve(&curve, eps0, delta / (2.0 * t as f64), tol)?;
            let advanced = advanced_composition(per_round.point.eps, per_round.point.delta, t, delta / 2.0)?;
            Ok(CompositionRow { t, rdp, advanced, per_round_eps: per_round.point.eps })
        })
        .collect()
}

/// Smallest `T` in the rows after which the Rényi route stays strictly
/// better; `None` if it is not better at the last row.
pub fn crossover(rows: &[CompositionRow]) -> Option<u64> {
    let mut answer = None;
    for row in rows.iter().rev() {
        if row.rdp.point.eps < row.advanced.eps {
            answer = Some(row.t);
        } else {
            break;
        }
    }
    answer
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::ExtremalAck;
    use crate::clone_dists::DEFAULT_TRUNC;

    #[test]
    fn grid_shape() {
        let g = default_alpha_grid();
        assert_eq!(g[0], 1.25);
        assert!((g.last().unwrap() - 1024.0).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        for a in 2..=64 {
            assert!(g.contains(&(a as f64)));
        }
    }

    #[test]
    fn compose_is_linear() {
        let c = RdpCurve::new(vec![2.0, 4.0], vec![0.1, 0.3], "x").unwrap();
        let ten = compose_rdp(&vec![c.clone(); 10]).unwrap();
        assert!((ten.eps()[0] - 1.0).abs() < 1e-15 && (ten.eps()[1] - 3.0).abs() < 1e-14);
        for (x, y) in ten.eps().iter().zip(c.scaled(10).eps()) {
            assert!((x - y).abs() < 1e-14);
        }
        let empty = compose_rdp(&[]).unwrap();
        assert!(empty.eps().iter().all(|&e| e == 0.0));
        let other = RdpCurve::new(vec![2.0, 5.0], vec![0.1, 0.3], "y").unwrap();
        assert!(matches!(compose_rdp(&[c, other]), Err(AccountantError::GridMismatch)));
    }

    #[test]
    fn conversion_floor_and_monotonicity() {
        // the conversion overhead alone goes negative for large alpha at a
        // generous delta, so the clamp engages
        let zero = RdpCurve::zero(default_alpha_grid()).unwrap();
        let raw = |delta: f64| {
            default_alpha_grid()
                .into_iter()
                .map(|a| (1.0 / (a * delta)).ln() / (a - 1.0) + (1.0 - 1.0 / a).ln())
                .fold(f64::INFINITY, f64::min)
        };
        assert!(raw(0.1) < 0.0);
        assert_eq!(rdp_to_adp(&zero, 0.1).unwrap().point.eps, 0.0);
        let floor = rdp_to_adp(&zero, 1e-6).unwrap();
        assert!(floor.point.eps > 0.0);
        assert!((floor.point.eps - raw(1e-6)).abs() < 1e-15);
        let c = RdpCurve::new(vec![2.0, 8.0, 32.0], vec![0.01, 0.05, 0.3], "x").unwrap();
        let a = rdp_to_adp(&c, 1e-6).unwrap().point.eps;
        let b = rdp_to_adp(&c, 1e-3).unwrap().point.eps;
        assert!(b <= a);
    }

    #[test]
    fn advanced_composition_reference() {
        // 30-digit evaluation of the formula
        let got = advanced_composition(0.1, 1e-8, 1000, 1e-6).unwrap();
        let want = 27.139_673_170_255_861_731_561_726_724_f64;
        assert!(((got.eps - want) / want).abs() < 1e-13, "{}", got.eps);
        assert!((got.delta - 1.1e-5).abs() < 1e-20);
        let one = advanced_composition(0.5, 1e-6, 1, 1e-6).unwrap();
        assert!(one.eps >= 0.5 && one.delta >= 1e-6);
        assert_eq!(advanced_composition(0.0, 1e-6, 50, 1e-6).unwrap().eps, 0.0);
        assert!(advanced_composition(0.1, 1e-6, 0, 1e-6).is_err());
    }

    #[test]
    fn crossover_exists_at_small_scale() {
        let v = Variant::GeneralExtremal(ExtremalAck::assume_extremal_class());
        let ts = [1, 10, 100, 1000, 10_000];
        let rows = composition_comparison(2.0, 10_000, 1e-6, &ts, v, DEFAULT_TRUNC, 1e-4).unwrap();
        assert!(crossover(&rows).is_some());
        // single round: conversion is lossy
        let direct = crate::bounds::eps_upper_numeric(2.0, 10_000, 1e-6, v, DEFAULT_TRUNC, 1e-4).unwrap();
        assert!(rows[0].rdp.point.eps >= direct.point.eps - 1e-4);
    }
}
