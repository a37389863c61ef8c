//! Self-check: floating-point engines against exact enumeration, plus
//! structural invariants. Output is deterministic; timings go to stderr.

use std::time::Instant;

use num::{BigInt, BigRational, One, Zero};
use shuffle_amp::bounds::{eps_upper_numeric, krr_lower, krr_upper, ExtremalAck, KrrMode, KrrValue, Variant, DEFAULT_TOL};
use shuffle_amp::clone_dists::{build_pair_3sym, build_pair_4sym, CloneParams, CountDist, DEFAULT_TRUNC};
use shuffle_amp::decompose::{extremal_params, RandomizerMatrix};
use shuffle_amp::divergence::{hockey_stick, renyi};
use shuffle_amp::oracle::{exact_shuffled, hockey_stick_exact, rational_from_f64, renyi_exact, to_f64, Caps, ExactDist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

struct Scale {
    oracle_n: u64,
    grid_n: &'static [u64],
}

impl Level {
    fn scale(self) -> Scale {
        match self {
            Level::Quick => Scale { oracle_n: 5, grid_n: &[100, 1000] },
            Level::Full => Scale { oracle_n: 7, grid_n: &[100, 1000, 10_000] },
        }
    }
}

type Check = Result<String, String>;
type CheckFn = fn(&Scale) -> Check;

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact shuffled pair for the clone construction with `e^eps0 = e`.
fn exact_clone_pair(e: &BigRational, p: &BigRational, q: &BigRational, n: u64, symbols: usize) -> (ExactDist, ExactDist) {
    let mid = BigRational::one() - e * p - p;
    let hi = vec![e * p, p.clone(), mid.clone(), BigRational::zero()];
    let lo = vec![p.clone(), e * p, mid, BigRational::zero()];
    let other = vec![p.clone(), p.clone(), q.clone(), BigRational::one() - p - p - q];
    let build = |first: &Vec<BigRational>| {
        let mut laws = vec![first.clone()];
        laws.extend(std::iter::repeat_n(other.clone(), n as usize - 1));
        exact_shuffled(&laws, Caps::default())
            .expect("within caps")
            .project(|c| c[..symbols].to_vec())
    };
    (build(&hi), build(&lo))
}

fn atom_gap(engine: &CountDist, exact: &ExactDist) -> f64 {
    let arity = engine.arity() as usize;
    let mut gap: f64 = 0.0;
    for (counts, lp) in engine.atoms() {
        let key: Vec<u32> = counts[..arity].iter().map(|&c| c as u32).collect();
        gap = gap.max((lp.prob() - to_f64(&exact.get(&key))).abs());
    }
    for (key, m) in exact.iter() {
        let counts = [key[0] as u64, key.get(1).copied().unwrap_or(0) as u64, key.get(2).copied().unwrap_or(0) as u64];
        if engine.mass(&counts).is_zero() {
            gap = gap.max(to_f64(m));
        }
    }
    gap
}

/// Rational `e` values with their logarithms, so no exponential is rounded.
const EXPS: [i64; 2] = [2, 3];

fn builders_vs_exact(s: &Scale) -> Check {
    let mut worst: f64 = 0.0;
    for e_int in EXPS {
        let e = int(e_int);
        let eps0 = (e_int as f64).ln();
        for n in 1..=s.oracle_n {
            let p = BigRational::one() / (&e + int(1));
            let (xp, xq) = exact_clone_pair(&e, &p, &BigRational::zero(), n, 2);
            let (a, b) = build_pair_3sym(CloneParams::extremal(eps0, n).map_err(|e| e.to_string())?, 0.0).map_err(|e| e.to_string())?;
            worst = worst.max(atom_gap(&a, &xp)).max(atom_gap(&b, &xq));

            for k in [3u64, 4] {
                let params = CloneParams::krr(eps0, k, n).map_err(|e| e.to_string())?;
                let p = BigRational::one() / (&e + int(k as i64 - 1));
                let q = int(k as i64 - 2) / (&e + int(k as i64 - 1));
                let (xp, xq) = exact_clone_pair(&e, &p, &q, n, 3);
                let (a, b) = build_pair_4sym(params, 0.0).map_err(|e| e.to_string())?;
                worst = worst.max(atom_gap(&a, &xp)).max(atom_gap(&b, &xq));
            }
        }
    }
    if worst < 1e-12 {
        Ok(format!("largest atom gap {worst:.1e}"))
    } else {
        Err(format!("atom gap {worst:.3e} exceeds 1e-12"))
    }
}

fn divergences_vs_exact(s: &Scale) -> Check {
    let mut worst: f64 = 0.0;
    for e_int in EXPS {
        let e = int(e_int);
        let eps0 = (e_int as f64).ln();
        let n = s.oracle_n;
        let p = BigRational::one() / (&e + int(1));
        let (xp, xq) = exact_clone_pair(&e, &p, &BigRational::zero(), n, 2);
        let (a, b) = build_pair_3sym(CloneParams::extremal(eps0, n).map_err(|e| e.to_string())?, 0.0).map_err(|e| e.to_string())?;
        // e^eps held exactly: eps = ln(3/2), ln 2
        for (num, den) in [(3i64, 2i64), (2, 1)] {
            let t = int(num) / int(den);
            let eps = (num as f64 / den as f64).ln();
            let exact = to_f64(&hockey_stick_exact(&xp, &xq, &t));
            let got = hockey_stick(&a, &b, eps).map_err(|e| e.to_string())?;
            worst = worst.max((got.upper - exact).abs()).max((got.lower - exact).abs());
        }
        for alpha in [2u32, 3, 6] {
            let exact = renyi_exact(&xp, &xq, alpha).map_err(|e| e.to_string())?;
            let got = renyi(&a, &b, alpha as f64).map_err(|e| e.to_string())?;
            if !got.contains(exact, 1e-12) {
                return Err(format!("Rényi order {alpha}: [{}, {}] misses {exact}", got.lower, got.upper));
            }
        }
    }
    // sanity check on the rational helper used by the oracle
    if to_f64(&rational_from_f64(0.125)) != 0.125 {
        return Err("rational conversion is lossy".into());
    }
    if worst < 1e-12 {
        Ok(format!("largest hockey-stick gap {worst:.1e}"))
    } else {
        Err(format!("hockey-stick gap {worst:.3e} exceeds 1e-12"))
    }
}

fn mirror_and_mass(s: &Scale) -> Check {
    let mut checked = 0;
    for &n in s.grid_n {
        for eps0 in [0.5, 2.0, 5.0] {
            let (p, q) = build_pair_3sym(CloneParams::extremal(eps0, n).map_err(|e| e.to_string())?, DEFAULT_TRUNC)
                .map_err(|e| e.to_string())?;
            for (c, lp) in p.atoms() {
                if q.mass(&[c[1], c[0], c[2]]) != lp {
                    return Err(format!("mirror mismatch at n={n} eps0={eps0} counts={c:?}"));
                }
            }
            let missing = 1.0 - p.retained_mass().prob();
            if missing > p.dropped_tail().prob() + 1e-12 {
                return Err(format!("n={n} eps0={eps0}: missing mass {missing:.3e} exceeds recorded tail"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs"))
}

fn general_below_fmt20(s: &Scale) -> Check {
    let mut checked = 0;
    for &n in s.grid_n {
        for eps0 in [0.5, 1.0, 2.0, 4.0] {
            let run = |v| eps_upper_numeric(eps0, n, 1e-6, v, DEFAULT_TRUNC, DEFAULT_TOL).map_err(|e| e.to_string());
            let g = run(Variant::GeneralExtremal(ExtremalAck::assume_extremal_class()))?.point.eps;
            let f = run(Variant::Fmt20)?.point.eps;
            if g > f + DEFAULT_TOL || g > eps0 {
                return Err(format!("n={n} eps0={eps0}: general {g} vs fmt20 {f}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} grid points"))
}

fn lower_below_upper(s: &Scale) -> Check {
    let mut checked = 0;
    // the four-symbol pair grows like n^1.5 atoms; 1000 keeps it in memory
    let n = (*s.grid_n.last().expect("non-empty grid")).min(1000);
    for k in [2u64, 3, 8] {
        for eps0 in [1.0, 3.0] {
            let lo = krr_lower(eps0, k, n, 1e-6, DEFAULT_TRUNC, DEFAULT_TOL).map_err(|e| e.to_string())?;
            let up = match krr_upper(eps0, k, n, KrrMode::Adp { delta: 1e-6 }, DEFAULT_TRUNC, DEFAULT_TOL).map_err(|e| e.to_string())? {
                KrrValue::Adp(b) => b,
                KrrValue::Rdp(_) => unreachable!("approximate DP query"),
            };
            if lo.point.eps > up.point.eps {
                return Err(format!("k={k} eps0={eps0}: lower {} above upper {}", lo.point.eps, up.point.eps));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} cases at n={n}"))
}

fn renyi_monotone(s: &Scale) -> Check {
    let n = *s.grid_n.last().expect("non-empty grid");
    let eps0 = 2.0;
    let (p, q) = build_pair_3sym(CloneParams::extremal(eps0, n).map_err(|e| e.to_string())?, 1e-30).map_err(|e| e.to_string())?;
    let mut prev = 0.0;
    for alpha in [1.5, 2.0, 4.0, 8.0, 16.0, 32.0] {
        let d = renyi(&p, &q, alpha).map_err(|e| e.to_string())?;
        if d.upper + 1e-12 < prev || d.lower > eps0 {
            return Err(format!("order {alpha}: [{}, {}] after {prev}", d.lower, d.upper));
        }
        prev = d.lower;
    }
    Ok(format!("6 orders at n={n}"))
}

fn krr_decomposition(_: &Scale) -> Check {
    let (k, eps0) = (4usize, 1.0f64);
    let m = RandomizerMatrix::krr(k, eps0).map_err(|e| e.to_string())?;
    let d = extremal_params(&m, 0, 1, eps0).map_err(|e| e.to_string())?;
    let denom = eps0.exp() + 3.0;
    let gap = (d.p - 1.0 / denom).abs().max((d.q - 2.0 / denom).abs());
    if gap < 1e-12 && d.residual < 1e-10 {
        Ok(format!("p, q within {gap:.1e}; residual {:.1e}", d.residual))
    } else {
        Err(format!("p={} q={} residual={}", d.p, d.q, d.residual))
    }
}

/// Runs every check and returns `(report lines, all passed)`.
pub fn run(level: Level) -> (Vec<String>, bool) {
    let s = level.scale();
    let checks: [(&str, CheckFn); 7] = [
        ("builders-match-exact-enumeration", builders_vs_exact),
        ("divergences-match-exact", divergences_vs_exact),
        ("mirror-symmetry-and-mass", mirror_and_mass),
        ("general-bound-below-fmt20", general_below_fmt20),
        ("krr-lower-below-upper", lower_below_upper),
        ("renyi-monotone-in-order", renyi_monotone),
        ("krr-decomposition-parameters", krr_decomposition),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, check) in checks {
        let start = Instant::now();
        let result = check(&s);
        eprintln!("{name}: {:.2} s", start.elapsed().as_secs_f64());
        match result {
            Ok(detail) => lines.push(format!("PASS {name}: {detail}")),
            Err(detail) => {
                ok = false;
                lines.push(format!("FAIL {name}: {detail}"));
            }
        }
    }
    (lines, ok)
}
