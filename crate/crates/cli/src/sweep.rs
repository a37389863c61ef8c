//! Grid evaluation shared by `eps`, `rdp`, `compose`, `krr` and `sweep`.
//!
//! Work is split into groups that share one pair of count distributions,
//! keyed by `(eps0, n)` plus the variant, `k` or `delta`. Each group yields
//! its rows for the inner grid. Groups run on the rayon pool and are
//! reassembled in grid order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use shuffle_amp::accountant::{composition_comparison, crossover, default_alpha_grid, AccountantError};
use shuffle_amp::bounds::{
    eps_lower_from_curve, eps_lower_from_pair, eps_upper_analytic, eps_upper_from_curve, krr_lower_pair, krr_upper_pair, pair_for,
    rdp_upper_closedform, tail_eps, BoundsError, EpsBound, ExtremalAck, Variant, DEFAULT_RDP_CONSTANT,
};
use shuffle_amp::clone_dists::CountDist;
use shuffle_amp::divergence::{renyi, DeltaCurve, DivergenceEnclosure};

use crate::Failure;

/// Truncation used when the caller gives none and Rényi orders are involved;
/// high orders amplify whatever mass the truncation drops.
pub const RDP_TRUNC: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Quantity {
    /// Shuffled (eps, delta) bounds.
    AdpEps,
    /// Rényi divergence bounds.
    RdpEps,
    /// Multi-round composition, Rényi route against advanced composition.
    Compose,
    /// k-ary randomized response.
    Krr,
}

impl Quantity {
    pub fn variants(self) -> &'static [&'static str] {
        match self {
            Quantity::AdpEps => &["general-extremal", "fmt20", "custom", "analytic", "tail", "lower"],
            Quantity::RdpEps => &["general-extremal", "fmt20", "custom", "closedform", "lower"],
            Quantity::Compose => &["rdp", "advanced"],
            Quantity::Krr => &["upper", "lower"],
        }
    }

    fn default_variants(self) -> Vec<String> {
        let names: &[&str] = match self {
            Quantity::AdpEps | Quantity::RdpEps => &["general-extremal"],
            Quantity::Compose => &["rdp", "advanced"],
            Quantity::Krr => &["upper", "lower"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Input columns, in output order.
    pub fn inputs(self) -> &'static [&'static str] {
        match self {
            Quantity::AdpEps => &["eps0", "n", "delta"],
            Quantity::RdpEps => &["eps0", "n", "alpha"],
            Quantity::Compose => &["eps0", "n", "delta", "T"],
            Quantity::Krr => &["eps0", "n", "k", "delta", "alpha"],
        }
    }

    pub fn has_general_ref(self) -> bool {
        self == Quantity::Krr
    }
}

/// Raw grid flags, before validation.
#[derive(Debug, Clone, Default)]
pub struct GridFlags {
    pub eps0: Option<String>,
    pub n: Option<String>,
    pub delta: Option<String>,
    pub alpha: Option<String>,
    pub k: Option<String>,
    pub t: Option<String>,
    pub variants: Vec<String>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub trunc: Option<f64>,
    pub tol: f64,
}

/// A validated sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub quantity: Quantity,
    pub eps0: Vec<f64>,
    pub n: Vec<u64>,
    pub delta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub k: Vec<u64>,
    pub t: Vec<u64>,
    pub variants: Vec<String>,
    pub p: Option<f64>,
    pub q: f64,
    pub trunc: f64,
    pub tol: f64,
}

fn needed(flag: &str, value: &Option<String>, quantity: Quantity) -> Result<String, Failure> {
    value
        .clone()
        .ok_or_else(|| Failure::usage(format!("--{flag} is required for {quantity:?}")))
}

impl SweepSpec {
    pub fn from_flags(quantity: Quantity, f: &GridFlags) -> Result<Self, Failure> {
        use crate::grid::{integers, reals, require};
        let eps0 = reals("eps0", &needed("eps0", &f.eps0, quantity)?)?;
        require("eps0", &eps0, "must be >= 0", |v| v >= 0.0)?;
        let n = integers("n", &needed("n", &f.n, quantity)?)?;
        require("n", &n, "must be >= 1", |v| v >= 1)?;

        let deltas = |spec: &str| -> Result<Vec<f64>, Failure> {
            let d = reals("delta", spec)?;
            require("delta", &d, "must lie in (0, 1)", |v| v > 0.0 && v < 1.0)?;
            Ok(d)
        };
        let alphas = |spec: &str| -> Result<Vec<f64>, Failure> {
            let a = reals("alpha", spec)?;
            require("alpha", &a, "must be > 1", |v| v > 1.0)?;
            Ok(a)
        };
        let (mut delta, mut alpha, mut k, mut t) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        match quantity {
            Quantity::AdpEps => delta = deltas(&needed("delta", &f.delta, quantity)?)?,
            Quantity::RdpEps => {
                alpha = match &f.alpha {
                    Some(s) => alphas(s)?,
                    None => default_alpha_grid(),
                }
            }
            Quantity::Compose => {
                delta = deltas(&needed("delta", &f.delta, quantity)?)?;
                t = integers("T", &needed("T", &f.t, quantity)?)?;
                require("T", &t, "must be >= 1", |v| v >= 1)?;
            }
            Quantity::Krr => {
                k = integers("k", &needed("k", &f.k, quantity)?)?;
                require("k", &k, "must be >= 2", |v| v >= 2)?;
                match (&f.delta, &f.alpha) {
                    (Some(d), None) => delta = deltas(d)?,
                    (None, Some(a)) => alpha = alphas(a)?,
                    _ => return Err(Failure::usage("krr needs exactly one of --delta (approximate DP) or --alpha (Rényi)")),
                }
            }
        }

        let variants = if f.variants.is_empty() { quantity.default_variants() } else { f.variants.clone() };
        let allowed = quantity.variants();
        if let Some(bad) = variants.iter().find(|v| !allowed.contains(&v.as_str())) {
            return Err(Failure::usage(format!("unknown variant {bad:?}; choose from {}", allowed.join(", "))));
        }
        if variants.iter().any(|v| v == "custom") && f.p.is_none() {
            return Err(Failure::usage("variant custom needs --p (and optionally --q)"));
        }
        if !(f.tol > 0.0) {
            return Err(Failure::usage("--tol must be > 0"));
        }
        let rdp_like = quantity != Quantity::AdpEps && !(quantity == Quantity::Krr && alpha.is_empty());
        let trunc = f.trunc.unwrap_or(if rdp_like { RDP_TRUNC } else { shuffle_amp::clone_dists::DEFAULT_TRUNC });
        if !(0.0..1.0).contains(&trunc) {
            return Err(Failure::usage("--trunc must lie in [0, 1)"));
        }
        Ok(SweepSpec {
            quantity,
            eps0,
            n,
            delta,
            alpha,
            k,
            t,
            variants,
            p: f.p,
            q: f.q.unwrap_or(0.0),
            trunc,
            tol: f.tol,
        })
    }

    pub fn uses_general_extremal(&self) -> bool {
        match self.quantity {
            Quantity::AdpEps | Quantity::RdpEps => self.variants.iter().any(|v| v == "general-extremal"),
            Quantity::Compose | Quantity::Krr => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Precondition,
    Invalid,
}

#[derive(Debug, Clone)]
pub struct RowError {
    pub kind: ErrorKind,
    pub message: String,
}

impl From<BoundsError> for RowError {
    fn from(e: BoundsError) -> Self {
        let kind = match e {
            BoundsError::PreconditionFailed(_) | BoundsError::AlphaOutOfRange { .. } => ErrorKind::Precondition,
            _ => ErrorKind::Invalid,
        };
        RowError { kind, message: e.to_string() }
    }
}

impl From<AccountantError> for RowError {
    fn from(e: AccountantError) -> Self {
        match e {
            AccountantError::Bounds(b) => b.into(),
            other => RowError { kind: ErrorKind::Invalid, message: other.to_string() },
        }
    }
}

impl From<shuffle_amp::divergence::DivergenceError> for RowError {
    fn from(e: shuffle_amp::divergence::DivergenceError) -> Self {
        BoundsError::from(e).into()
    }
}

/// Input values of one row; absent inputs print as empty cells.
#[derive(Debug, Clone, Copy, Default)]
pub struct Inputs {
    pub eps0: f64,
    pub n: u64,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub k: Option<u64>,
    pub t: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub inputs: Inputs,
    pub variant: String,
    pub value: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub general_ref: Option<f64>,
    pub seconds: f64,
    pub note: String,
    pub error: Option<RowError>,
}

impl Row {
    fn new(inputs: Inputs, variant: &str) -> Self {
        Row {
            inputs,
            variant: variant.to_string(),
            value: None,
            lower: None,
            upper: None,
            general_ref: None,
            seconds: 0.0,
            note: String::new(),
            error: None,
        }
    }

    fn set(mut self, value: f64, lower: f64, upper: f64) -> Self {
        self.value = Some(value);
        self.lower = Some(lower);
        self.upper = Some(upper);
        self
    }

    fn exact(self, value: f64) -> Self {
        self.set(value, value, value)
    }

    fn from_result(inputs: Inputs, variant: &str, r: Result<Row, RowError>) -> Row {
        r.unwrap_or_else(|e| Row { error: Some(e), ..Row::new(inputs, variant) })
    }

    fn with_upper(self, b: &EpsBound) -> Self {
        let mut row = self.set(b.point.eps, b.bracket.0, b.bracket.1);
        if b.infeasible {
            row.note = format!("delta not reachable below eps0; delta(eps0) <= {:.3e}", b.delta_at_eps.upper);
        }
        row
    }

    fn with_lower(self, b: &EpsBound) -> Self {
        self.set(b.point.eps, b.bracket.0, b.bracket.1)
    }
}

type PairBuilder = fn(f64, u64, u64, f64) -> Result<(CountDist, CountDist), BoundsError>;

const ACK: fn() -> ExtremalAck = ExtremalAck::assume_extremal_class;

fn pair_variant(name: &str, spec: &SweepSpec) -> Variant {
    match name {
        "fmt20" => Variant::Fmt20,
        "custom" => Variant::Custom { p: spec.p.unwrap_or(0.0), q: spec.q },
        _ => Variant::GeneralExtremal(ACK()),
    }
}

fn renyi_upper(p: &CountDist, q: &CountDist, alpha: f64, eps0: f64) -> Result<(f64, f64, String), RowError> {
    let d: DivergenceEnclosure = renyi(p, q, alpha)?;
    let upper = d.upper.min(eps0);
    let note = if d.upper > eps0 { "upper clamped to eps0".to_string() } else { String::new() };
    Ok((d.lower.min(upper), upper, note))
}

fn renyi_lower_both(pairs: &[(CountDist, CountDist)], alpha: f64) -> Result<f64, RowError> {
    let mut best: f64 = 0.0;
    for (p, q) in pairs {
        best = best.max(renyi(p, q, alpha)?.lower).max(renyi(q, p, alpha)?.lower);
    }
    Ok(best)
}

/// General lower-bound pairs: binary and ternary randomized response.
fn lower_pairs(eps0: f64, n: u64, trunc: f64) -> Result<Vec<(CountDist, CountDist)>, RowError> {
    Ok(vec![krr_lower_pair(eps0, 2, n, trunc)?, krr_lower_pair(eps0, 3, n, trunc)?])
}

fn best_lower(pairs: &[(CountDist, CountDist)], eps0: f64, delta: f64, tol: f64) -> Result<EpsBound, RowError> {
    let mut best: Option<EpsBound> = None;
    for (p, q) in pairs {
        let b = eps_lower_from_pair(p, q, eps0, delta, tol)?;
        if best.as_ref().is_none_or(|x| b.point.eps > x.point.eps) {
            best = Some(b);
        }
    }
    Ok(best.expect("at least one pair"))
}

#[derive(Debug, Clone)]
enum Group {
    Adp { eps0: f64, n: u64, variant: String },
    Rdp { eps0: f64, n: u64, variant: String },
    Compose { eps0: f64, n: u64, delta: f64 },
    Krr { eps0: f64, n: u64, k: u64 },
}

fn groups(spec: &SweepSpec) -> Vec<Group> {
    let mut out = Vec::new();
    for &eps0 in &spec.eps0 {
        for &n in &spec.n {
            match spec.quantity {
                Quantity::AdpEps => out.extend(spec.variants.iter().map(|v| Group::Adp { eps0, n, variant: v.clone() })),
                Quantity::RdpEps => out.extend(spec.variants.iter().map(|v| Group::Rdp { eps0, n, variant: v.clone() })),
                Quantity::Compose => out.extend(spec.delta.iter().map(|&delta| Group::Compose { eps0, n, delta })),
                Quantity::Krr => out.extend(spec.k.iter().map(|&k| Group::Krr { eps0, n, k })),
            }
        }
    }
    out
}

fn eval_adp(spec: &SweepSpec, eps0: f64, n: u64, variant: &str) -> Vec<Row> {
    let inputs = |delta| Inputs { eps0, n, delta: Some(delta), ..Inputs::default() };
    let each = |f: &dyn Fn(f64) -> Result<Row, RowError>| -> Vec<Row> {
        spec.delta.iter().map(|&d| Row::from_result(inputs(d), variant, f(d))).collect()
    };
    if eps0 == 0.0 && variant != "analytic" {
        return each(&|d| Ok(Row::new(inputs(d), variant).exact(0.0)));
    }
    match variant {
        "analytic" => each(&|d| Ok(Row::new(inputs(d), variant).exact(eps_upper_analytic(eps0, n, d)?.eps))),
        "tail" => {
            let p = spec.p.unwrap_or(1.0 / (eps0.exp() + 1.0));
            each(&|d| Ok(Row::new(inputs(d), variant).exact(tail_eps(eps0, n, p, d)?.min(eps0))))
        }
        "lower" => match lower_pairs(eps0, n, spec.trunc) {
            Ok(pairs) => each(&|d| Ok(Row::new(inputs(d), variant).with_lower(&best_lower(&pairs, eps0, d, spec.tol)?))),
            Err(e) => each(&|_| Err(e.clone())),
        },
        _ => {
            let curve = pair_for(pair_variant(variant, spec), eps0, n, spec.trunc)
                .map_err(RowError::from)
                .and_then(|(p, q)| Ok(DeltaCurve::new(&p, &q)?));
            match curve {
                Ok(c) => each(&|d| Ok(Row::new(inputs(d), variant).with_upper(&eps_upper_from_curve(&c, eps0, d, spec.tol)?))),
                Err(e) => each(&|_| Err(e.clone())),
            }
        }
    }
}

fn eval_rdp(spec: &SweepSpec, eps0: f64, n: u64, variant: &str) -> Vec<Row> {
    let inputs = |alpha| Inputs { eps0, n, alpha: Some(alpha), ..Inputs::default() };
    let each = |f: &dyn Fn(f64) -> Result<Row, RowError>| -> Vec<Row> {
        spec.alpha.iter().map(|&a| Row::from_result(inputs(a), variant, f(a))).collect()
    };
    if eps0 == 0.0 {
        return each(&|a| Ok(Row::new(inputs(a), variant).exact(0.0)));
    }
    match variant {
        "closedform" => each(&|a| Ok(Row::new(inputs(a), variant).exact(rdp_upper_closedform(eps0, n, a, DEFAULT_RDP_CONSTANT)?))),
        "lower" => match lower_pairs(eps0, n, spec.trunc) {
            Ok(pairs) => each(&|a| Ok(Row::new(inputs(a), variant).exact(renyi_lower_both(&pairs, a)?))),
            Err(e) => each(&|_| Err(e.clone())),
        },
        _ => match pair_for(pair_variant(variant, spec), eps0, n, spec.trunc).map_err(RowError::from) {
            Ok((p, q)) => each(&|a| {
                let (lo, hi, note) = renyi_upper(&p, &q, a, eps0)?;
                Ok(Row { note, ..Row::new(inputs(a), variant).set(hi, lo, hi) })
            }),
            Err(e) => each(&|_| Err(e.clone())),
        },
    }
}

fn eval_compose(spec: &SweepSpec, eps0: f64, n: u64, delta: f64) -> Vec<Row> {
    let inputs = |t| Inputs { eps0, n, delta: Some(delta), t: Some(t), ..Inputs::default() };
    let result = if eps0 == 0.0 {
        Ok(None)
    } else {
        composition_comparison(eps0, n, delta, &spec.t, Variant::GeneralExtremal(ACK()), spec.trunc, spec.tol).map(Some)
    };
    match result {
        Ok(rows) => {
            if let Some(rows) = &rows {
                match crossover(rows) {
                    Some(t) => eprintln!("eps0={eps0} n={n} delta={delta}: Rényi route stays below advanced composition from T = {t}"),
                    None => eprintln!("eps0={eps0} n={n} delta={delta}: no crossover within the T grid"),
                }
            }
            let mut out = Vec::new();
            for (i, &t) in spec.t.iter().enumerate() {
                for v in &spec.variants {
                    let row = Row::new(inputs(t), v);
                    out.push(match rows.as_ref().map(|r| r[i]) {
                        None => row.exact(0.0),
                        Some(r) if v == "rdp" => Row { note: format!("alpha={}", r.rdp.alpha), ..row.exact(r.rdp.point.eps) },
                        Some(r) => Row { note: format!("per-round eps={:.6e}", r.per_round_eps), ..row.exact(r.advanced.eps) },
                    });
                }
            }
            out
        }
        Err(e) => {
            let e = RowError::from(e);
            spec.t
                .iter()
                .flat_map(|&t| spec.variants.iter().map(move |v| (t, v)))
                .map(|(t, v)| Row::from_result(inputs(t), v, Err(e.clone())))
                .collect()
        }
    }
}

/// Rows for one `(eps0, n, k)`: for each delta (or alpha), every variant.
fn eval_krr(spec: &SweepSpec, eps0: f64, n: u64, k: u64) -> Vec<Row> {
    let rdp = !spec.alpha.is_empty();
    let points: &[f64] = if rdp { &spec.alpha } else { &spec.delta };
    let inputs = |x: f64| {
        let base = Inputs { eps0, n, k: Some(k), ..Inputs::default() };
        if rdp {
            Inputs { alpha: Some(x), ..base }
        } else {
            Inputs { delta: Some(x), ..base }
        }
    };
    if eps0 == 0.0 {
        return points
            .iter()
            .flat_map(|&x| spec.variants.iter().map(move |v| Row { general_ref: Some(0.0), ..Row::new(inputs(x), v).exact(0.0) }))
            .collect();
    }
    let build = |f: PairBuilder| f(eps0, k, n, spec.trunc).map_err(RowError::from);
    let upper = build(krr_upper_pair);
    let lower = build(krr_lower_pair);
    let general = pair_for(Variant::GeneralExtremal(ACK()), eps0, n, spec.trunc).map_err(RowError::from);
    let curve = |r: &Result<(CountDist, CountDist), RowError>| -> Result<DeltaCurve, RowError> {
        let (p, q) = r.as_ref().map_err(Clone::clone)?;
        Ok(DeltaCurve::new(p, q)?)
    };
    let (upper_curve, lower_curve, general_curve) = if rdp {
        (None, None, None)
    } else {
        (Some(curve(&upper)), Some(curve(&lower)), Some(curve(&general)))
    };

    let general_at = |x: f64| -> Option<f64> {
        if rdp {
            let (p, q) = general.as_ref().ok()?;
            renyi_upper(p, q, x, eps0).ok().map(|r| r.1)
        } else {
            let c = general_curve.as_ref()?.as_ref().ok()?;
            eps_upper_from_curve(c, eps0, x, spec.tol).ok().map(|b| b.point.eps)
        }
    };

    let mut out = Vec::new();
    for &x in points {
        let reference = general_at(x);
        for v in &spec.variants {
            let row = Row::new(inputs(x), v);
            let r: Result<Row, RowError> = match (v.as_str(), rdp) {
                ("upper", true) => upper.as_ref().map_err(Clone::clone).and_then(|(p, q)| {
                    let (lo, hi, note) = renyi_upper(p, q, x, eps0)?;
                    Ok(Row { note, ..row.set(hi, lo, hi) })
                }),
                ("upper", false) => upper_curve
                    .as_ref()
                    .expect("adp mode")
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|c| Ok(row.with_upper(&eps_upper_from_curve(c, eps0, x, spec.tol)?))),
                (_, true) => lower
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|pq| Ok(row.exact(renyi_lower_both(std::slice::from_ref(pq), x)?))),
                (_, false) => lower_curve.as_ref().expect("adp mode").as_ref().map_err(Clone::clone).and_then(|c| {
                    Ok(row.with_lower(&eps_lower_from_curve(c, eps0, x, spec.tol)?))
                }),
            };
            out.push(Row { general_ref: reference, ..Row::from_result(inputs(x), v, r) });
        }
    }
    out
}

fn eval_group(spec: &SweepSpec, g: &Group) -> Vec<Row> {
    let start = Instant::now();
    let mut rows = match g {
        Group::Adp { eps0, n, variant } => eval_adp(spec, *eps0, *n, variant),
        Group::Rdp { eps0, n, variant } => eval_rdp(spec, *eps0, *n, variant),
        Group::Compose { eps0, n, delta } => eval_compose(spec, *eps0, *n, *delta),
        Group::Krr { eps0, n, k } => eval_krr(spec, *eps0, *n, *k),
    };
    let seconds = start.elapsed().as_secs_f64();
    for r in &mut rows {
        r.seconds = seconds;
    }
    rows
}

/// Rows in grid order. Groups may finish in any order.
pub fn run(spec: &SweepSpec, progress: bool) -> Vec<Row> {
    let gs = groups(spec);
    let done = AtomicUsize::new(0);
    let total = gs.len();
    let per_group: Vec<Vec<Row>> = gs
        .par_iter()
        .map(|g| {
            let rows = eval_group(spec, g);
            if progress {
                let i = done.fetch_add(1, Ordering::Relaxed) + 1;
                eprintln!("[{i}/{total}] {g:?}");
            }
            rows
        })
        .collect();
    let mut rows: Vec<Row> = per_group.into_iter().flatten().collect();
    if matches!(spec.quantity, Quantity::AdpEps | Quantity::RdpEps) {
        // groups are per variant; restore (eps0, n, inner, variant) order
        let rank = |v: &str| spec.variants.iter().position(|x| x == v).unwrap_or(usize::MAX);
        let inner = |r: &Row| {
            let x = r.inputs.delta.or(r.inputs.alpha).unwrap_or(0.0);
            let grid = if spec.quantity == Quantity::AdpEps { &spec.delta } else { &spec.alpha };
            grid.iter().position(|&g| g == x).unwrap_or(usize::MAX)
        };
        let outer = |r: &Row| {
            (
                spec.eps0.iter().position(|&e| e == r.inputs.eps0).unwrap_or(usize::MAX),
                spec.n.iter().position(|&n| n == r.inputs.n).unwrap_or(usize::MAX),
            )
        };
        rows.sort_by_key(|r| (outer(r), inner(r), rank(&r.variant)));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> GridFlags {
        GridFlags {
            eps0: Some("1".into()),
            n: Some("50".into()),
            delta: Some("1e-6".into()),
            tol: 1e-4,
            ..GridFlags::default()
        }
    }

    #[test]
    fn truncation_default_depends_on_quantity() {
        let adp = SweepSpec::from_flags(Quantity::AdpEps, &flags()).unwrap();
        assert_eq!(adp.trunc, shuffle_amp::clone_dists::DEFAULT_TRUNC);
        let rdp = SweepSpec::from_flags(Quantity::RdpEps, &flags()).unwrap();
        assert_eq!(rdp.trunc, RDP_TRUNC);
        assert_eq!(rdp.alpha, default_alpha_grid());
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        for (field, value) in [("eps0", "-1"), ("n", "0"), ("delta", "1")] {
            let mut f = flags();
            match field {
                "eps0" => f.eps0 = Some(value.into()),
                "n" => f.n = Some(value.into()),
                _ => f.delta = Some(value.into()),
            }
            assert!(SweepSpec::from_flags(Quantity::AdpEps, &f).is_err(), "{field}={value}");
        }
        let f = GridFlags { variants: vec!["closedform".into()], ..flags() };
        assert!(SweepSpec::from_flags(Quantity::AdpEps, &f).is_err());
    }

    #[test]
    fn rows_follow_grid_order() {
        let f = GridFlags {
            eps0: Some("2,0.5".into()),
            delta: Some("1e-3,1e-6".into()),
            variants: vec!["fmt20".into(), "general-extremal".into()],
            ..flags()
        };
        let spec = SweepSpec::from_flags(Quantity::AdpEps, &f).unwrap();
        let rows = run(&spec, false);
        let order: Vec<(f64, f64, &str)> = rows.iter().map(|r| (r.inputs.eps0, r.inputs.delta.unwrap(), r.variant.as_str())).collect();
        assert_eq!(order[0], (2.0, 1e-3, "fmt20"));
        assert_eq!(order[1], (2.0, 1e-3, "general-extremal"));
        assert_eq!(order[2], (2.0, 1e-6, "fmt20"));
        assert_eq!(order[4], (0.5, 1e-3, "fmt20"));
        assert!(rows.iter().all(|r| r.error.is_none()));
    }
}
