//! The `decompose` subcommand.

use std::io::Write;

use serde::Serialize;
use shuffle_amp::bounds::{eps_upper_numeric, ExtremalAck, Variant, DEFAULT_TOL};
use shuffle_amp::clone_dists::DEFAULT_TRUNC;
use shuffle_amp::decompose::{extremal_params, in_extremal_class, verify_ldp, DecomposeError, DecompositionResult, RandomizerMatrix};

use crate::output::{sci, Format};
use crate::Failure;

/// Loads a matrix from a CSV path or a builtin:
/// `krr:K:EPS0`, `rappor:K:ALPHA:BETA`, `uniform:INPUTS:OUTPUTS`.
pub fn load(source: &str) -> Result<RandomizerMatrix, Failure> {
    let parts: Vec<&str> = source.split(':').collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| Failure::usage(format!("{source}: bad number {s:?}")));
    let int = |s: &str| s.parse::<usize>().map_err(|_| Failure::usage(format!("{source}: bad integer {s:?}")));
    let built = match parts[..] {
        ["krr", k, e] => RandomizerMatrix::krr(int(k)?, num(e)?),
        ["rappor", k, a, b] => RandomizerMatrix::rappor(int(k)?, num(a)?, num(b)?),
        ["uniform", i, o] => RandomizerMatrix::uniform(int(i)?, int(o)?),
        _ => {
            let file = std::fs::File::open(source).map_err(|e| Failure::usage(format!("cannot open {source}: {e}")))?;
            RandomizerMatrix::from_csv(file)
        }
    };
    built.map_err(|e| Failure::usage(e.to_string()))
}

fn resolve(m: &RandomizerMatrix, label: &str) -> Result<usize, Failure> {
    m.input_index(label)
        .or_else(|| label.parse::<usize>().ok().filter(|&i| i < m.inputs.len()))
        .ok_or_else(|| Failure::usage(format!("unknown input {label:?}; inputs are {:?}", m.inputs)))
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub eps0_hat: f64,
    pub eps0: f64,
    pub x0: String,
    pub x1: String,
    pub p: f64,
    pub q: f64,
    pub member: bool,
    pub violation: f64,
    pub worst_input: Option<String>,
    pub worst_output: Option<String>,
    pub residual: f64,
    pub other_residual: f64,
    pub eps_custom: Option<f64>,
    pub eps_general: Option<f64>,
    pub eps_fmt20: Option<f64>,
    pub decomposition: DecompositionResult,
}

pub struct Request<'a> {
    pub source: &'a str,
    pub x0: Option<&'a str>,
    pub x1: Option<&'a str>,
    pub eps0: Option<f64>,
    pub n: Option<u64>,
    pub delta: f64,
}

pub fn run(req: &Request) -> Result<Report, Failure> {
    let m = load(req.source)?;
    if m.inputs.len() < 2 {
        return Err(Failure::usage("the randomizer needs at least two inputs"));
    }
    let x0 = req.x0.map(|l| resolve(&m, l)).transpose()?.unwrap_or(0);
    let x1 = req.x1.map(|l| resolve(&m, l)).transpose()?.unwrap_or(if x0 == 0 { 1 } else { 0 });
    let eps0_hat = verify_ldp(&m);
    let eps0 = req.eps0.unwrap_or(eps0_hat);
    let map = |e: DecomposeError| match e {
        DecomposeError::NotPureDp { .. } => Failure::precondition(e.to_string()),
        other => Failure::usage(other.to_string()),
    };
    let d = extremal_params(&m, x0, x1, eps0).map_err(map)?;
    let membership = in_extremal_class(&m, x0, x1, eps0).map_err(map)?;
    let other_residual = d.other_residual(&m);

    let (mut eps_custom, mut eps_general, mut eps_fmt20) = (None, None, None);
    if let Some(n) = req.n {
        if !(req.delta > 0.0 && req.delta < 1.0) {
            return Err(Failure::usage("--delta must lie in (0, 1)"));
        }
        let bound = |v: Variant| {
            eps_upper_numeric(eps0, n, req.delta, v, DEFAULT_TRUNC, DEFAULT_TOL)
                .map(|b| b.point.eps)
                .map_err(|e| Failure::usage(e.to_string()))
        };
        eps_custom = Some(bound(Variant::Custom { p: d.p, q: d.q })?);
        eps_fmt20 = Some(bound(Variant::Fmt20)?);
        if let Some(ack) = ExtremalAck::from_witness(&membership) {
            eps_general = Some(bound(Variant::GeneralExtremal(ack))?);
        }
    }
    Ok(Report {
        eps0_hat,
        eps0,
        x0: m.inputs[x0].clone(),
        x1: m.inputs[x1].clone(),
        p: d.p,
        q: d.q,
        member: membership.member,
        violation: membership.violation,
        worst_input: membership.worst.map(|(x, _)| m.inputs[x].clone()),
        worst_output: membership.worst.map(|(_, s)| m.outputs[s].clone()),
        residual: d.residual,
        other_residual,
        eps_custom,
        eps_general,
        eps_fmt20,
        decomposition: d,
    })
}

pub fn write(w: &mut dyn Write, r: &Report, format: Format) -> Result<(), Failure> {
    let fail = |e: String| Failure::usage(format!("write failed: {e}"));
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, r).map_err(|e| fail(e.to_string()))?;
            writeln!(w).map_err(|e| fail(e.to_string()))?;
        }
        Format::Csv => {
            let opt = |x: Option<f64>| x.map(sci).unwrap_or_default();
            let mut csv = csv::Writer::from_writer(&mut *w);
            let header = [
                "eps0_hat", "eps0", "x0", "x1", "p", "q", "member", "violation", "worst_input", "worst_output", "residual",
                "other_residual", "eps_custom", "eps_general", "eps_fmt20",
            ];
            let record = [
                sci(r.eps0_hat),
                sci(r.eps0),
                r.x0.clone(),
                r.x1.clone(),
                sci(r.p),
                sci(r.q),
                r.member.to_string(),
                sci(r.violation),
                r.worst_input.clone().unwrap_or_default(),
                r.worst_output.clone().unwrap_or_default(),
                sci(r.residual),
                sci(r.other_residual),
                opt(r.eps_custom),
                opt(r.eps_general),
                opt(r.eps_fmt20),
            ];
            csv.write_record(header).map_err(|e| fail(e.to_string()))?;
            csv.write_record(&record).map_err(|e| fail(e.to_string()))?;
            csv.flush().map_err(|e| fail(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| fail(e.to_string()))
}
