use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dfan_core::basis::{minimal_reduce, reduced_basis, z_saturate, Budget, MarkedBasis};
use dfan_core::division::divide;
use dfan_core::fan::{basis_at, FanCell, Slope, VGroebnerFan};
use dfan_core::malgrange::{annihilator_generators, build_presentation, PolynomialMap};
use dfan_core::oracle::{DegreeWindow, Membership, Oracle, RingKind, VbarMembership, VfiltMembership};
use dfan_core::order::VForm;
use dfan_core::syntax::{format_rat, parse_d_operator, parse_input, parse_operator, parse_order, parse_vform, InputBody};
use dfan_core::vfilt::{
    kappa_global, kappa_global_v2, kappa_sigma, minimal_representative, render, skeleton_certificates, theorem1_witness,
    theorem2bis_normalize, IdealPresentation, ReductionTrace, WeightVector,
};
use dfan_core::weyl::{homogenize, DiffOp, Signature};
use dfan_core::{Error, Rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

mod output;

use output::{opt_rat, ops, render_basis, Report};

#[derive(Parser)]
#[command(name = "dfan", version, about = "V-Gröbner fans and V-filtrations for ideals of differential operators")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Config {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Term steps allowed per division.
    #[arg(long, global = true, default_value_t = Budget::default().division_steps, value_parser = clap::value_parser!(usize))]
    steps: usize,
    /// Pairs allowed per completion.
    #[arg(long, global = true, default_value_t = Budget::default().pairs)]
    pairs: usize,
    /// Total-degree bound of the oracle window.
    #[arg(long, global = true, default_value_t = DegreeWindow::DEFAULT.bound)]
    degree: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal reduced standard basis of h(I) for an order.
    Gb {
        file: PathBuf,
        /// `V:a,b`, `zero`, `form:V:a,b`, `s3:V:a,b` or `lim:V:a,b:V:c,d`.
        #[arg(long, default_value = "zero")]
        order: String,
    },
    /// The V-Gröbner fan: cells, bases and skeleton.
    Fan {
        file: PathBuf,
        /// Recompute bases at random interior slopes of every 2-cell.
        #[arg(long)]
        check: bool,
    },
    /// The constants κ¹ and κ² with per-cell values.
    Kappa { file: PathBuf },
    /// Divide an operator of D<z> by a standard basis of h(I).
    Divide {
        file: PathBuf,
        operator: String,
        #[arg(long, default_value = "zero")]
        order: String,
    },
    /// One representative with all cell orders bounded by w.
    Reduce {
        file: PathBuf,
        operator: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        w: Vec<i64>,
        /// Lines `V:a,b = <operator>`; least-order representatives otherwise.
        #[arg(long)]
        certs: Option<PathBuf>,
        /// Slope (`a/b` or `inf`) selecting the cell; the first maximal cell otherwise.
        #[arg(long)]
        slope: Option<String>,
    },
    /// A representative in V_{w+(κ¹,0)} from certificates over the skeleton.
    Normalize {
        file: PathBuf,
        operator: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        w: Vec<i64>,
        #[arg(long)]
        certs: Option<PathBuf>,
    },
    /// Brute-force membership questions inside a degree window.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// P ∈ I.
    Member { file: PathBuf, operator: String },
    /// P·δ ∈ V^L_k.
    Vfilt {
        file: PathBuf,
        operator: String,
        #[arg(long)]
        form: String,
        #[arg(long, allow_hyphen_values = true)]
        k: String,
    },
    /// P·δ ∈ V̄_w, over the skeleton of the fan.
    Vbar {
        file: PathBuf,
        operator: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        w: Vec<i64>,
    },
}

struct Input {
    sig: Signature,
    generators: Vec<DiffOp>,
    map: Option<PolynomialMap>,
}

impl Config {
    fn budget(&self) -> Budget {
        Budget { division_steps: self.steps, pairs: self.pairs }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Parse { line: 0, col: 0, msg: msg.into() }
}

fn load(path: &Path) -> Result<Input, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let parsed = parse_input(&text)?;
    Ok(match parsed.body {
        InputBody::Malgrange(fs) => {
            let map = PolynomialMap::new(parsed.sig, &fs)?;
            Input { sig: parsed.sig, generators: annihilator_generators(&map), map: Some(map) }
        }
        InputBody::Raw(gens) => Input { sig: parsed.sig, generators: gens, map: None },
    })
}

fn presentation(input: &Input, budget: Budget) -> Result<IdealPresentation, Error> {
    if input.sig.p > 2 {
        return Err(Error::Unsupported(format!("fans need p ≤ 2, the input has p = {}", input.sig.p)));
    }
    match &input.map {
        Some(map) => build_presentation(map, budget),
        None => IdealPresentation::new(input.generators.clone(), None, budget),
    }
}

fn weight(sig: Signature, w: &[i64]) -> Result<WeightVector, Error> {
    if w.len() != sig.p {
        return Err(usage(format!("--w needs {} entries", sig.p)));
    }
    Ok(WeightVector(w.to_vec()))
}

fn parse_slope(text: &str) -> Result<Slope, Error> {
    if text.trim() == "inf" {
        return Ok(Slope::Infinity);
    }
    let v = parse_vform(&format!("V:1,{text}"))?;
    Ok(Slope::of(&v))
}

fn read_certs(path: &Path, sig: Signature) -> Result<Vec<(VForm, DiffOp)>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (l, op) = line
            .split_once('=')
            .ok_or(Error::Parse { line: i + 1, col: 1, msg: "expected 'V:a,b = <operator>'".into() })?;
        let at = |e: Error| match e {
            Error::Parse { col, msg, .. } => Error::Parse { line: i + 1, col, msg },
            other => other,
        };
        out.push((parse_vform(l).map_err(at)?, parse_d_operator(sig, op).map_err(at)?));
    }
    Ok(out)
}

fn interval(c: &FanCell) -> String {
    c.interval.to_string()
}

fn fan_json(fan: &VGroebnerFan) -> Value {
    json!({
        "cells": fan.cells.iter().map(|c| json!({
            "interval": interval(c),
            "dim": c.dim,
            "witness": c.witness.coeffs().iter().map(format_rat).collect::<Vec<_>>(),
            "basis": render_basis(&c.basis),
        })).collect::<Vec<_>>(),
        "maximal_cells": fan.maximal_cells().count(),
        "skeleton": fan.skeleton.iter().map(|l| l.coeffs().iter().map(format_rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "saturated": ops(fan.saturated.ops()),
    })
}

fn trace_json(t: &ReductionTrace) -> Value {
    let claims = |s: &dfan_core::vfilt::ReductionStep| {
        s.claims.as_ref().map(|c| {
            json!({
                "kappa": format_rat(&c.kappa),
                "w1": c.w1,
                "ord_v1_w": opt_rat(&c.ord_v1_w),
                "ord_v1_sigma_w": opt_rat(&c.ord_v1_sigma_w),
                "j1": c.j1,
                "j2": c.j2,
                "c_lhs": opt_rat(&c.c_lhs),
                "c_rhs": opt_rat(&c.c_rhs),
            })
        })
    };
    json!({
        "forms": t.forms.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        "initial": t.initial.to_string(),
        "steps": t.steps.iter().map(|s| json!({
            "forms": s.forms.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "target": s.target.to_string(),
            "subtracted": s.subtracted.to_string(),
            "before": s.before.iter().map(opt_rat).collect::<Vec<_>>(),
            "after": s.after.iter().map(opt_rat).collect::<Vec<_>>(),
            "claims": claims(s),
        })).collect::<Vec<_>>(),
        "result": t.result.to_string(),
    })
}

fn check_fan(fan: &VGroebnerFan, seed: u64, budget: Budget) -> Result<Value, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens: Vec<DiffOp> = fan.saturated.ops().cloned().collect();
    let sig = fan.signature();
    let mut checked = Vec::new();
    for cell in fan.maximal_cells().filter(|c| c.dim == 2 && sig.p == 2) {
        for _ in 0..3 {
            let s = random_interior(cell, &mut rng);
            let b = basis_at(&gens, sig, &s.form(), budget)?;
            if !b.same_marked_elements(&cell.basis) {
                return Err(Error::Invariant(format!("basis at slope {s} differs from its cell {}", cell.interval)));
            }
            checked.push(s.to_string());
        }
    }
    Ok(json!(checked))
}

fn random_interior(cell: &FanCell, rng: &mut ChaCha8Rng) -> Slope {
    let t = Rat::new(rng.gen_range(1..100).into(), 100.into());
    match (&cell.interval.lo, &cell.interval.hi) {
        (Slope::Finite(a), Slope::Finite(b)) => Slope::Finite(a + (b - a) * t),
        (Slope::Finite(a), Slope::Infinity) => Slope::Finite(a + Rat::from_integer(1.into()) / t),
        _ => unreachable!("intervals start at a finite slope"),
    }
}

fn run(cli: &Cli) -> Result<Report, Error> {
    let cfg = &cli.config;
    if cfg.steps == 0 || cfg.pairs == 0 || cfg.degree == 0 {
        return Err(usage("--steps, --pairs and --degree must be positive"));
    }
    let budget = cfg.budget();
    match &cli.command {
        Command::Gb { file, order } => {
            let input = load(file)?;
            let ord = parse_order(input.sig, order)?.compile(input.sig)?;
            let hom: Vec<DiffOp> = input.generators.iter().map(homogenize).collect::<Result<_, _>>()?;
            let start = reduced_basis(&hom, &ord, budget)?;
            let basis: MarkedBasis = minimal_reduce(&z_saturate(&start, budget)?)?;
            let mut r = Report::new("gb");
            r.text(format!("order {order}: {} elements", basis.len()));
            for line in output::basis_lines(&basis) {
                r.text(line);
            }
            r.field("order", json!(order));
            r.field("basis", render_basis(&basis));
            Ok(r)
        }
        Command::Fan { file, check } => {
            let input = load(file)?;
            let pres = presentation(&input, budget)?;
            let fan = pres.fan();
            let mut r = Report::new("fan");
            r.text(format!("{} cells, {} maximal", fan.cells.len(), fan.maximal_cells().count()));
            for c in &fan.cells {
                r.text(format!("cell {} dim {} witness {}", c.interval, c.dim, c.witness));
                for line in output::basis_lines(&c.basis) {
                    r.text(format!("  {line}"));
                }
            }
            r.text(format!("skeleton {}", fan.skeleton.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")));
            r.merge(fan_json(fan));
            if *check {
                let checked = check_fan(fan, cfg.seed, budget)?;
                r.text(format!("stability checked at {} slopes", checked.as_array().map_or(0, |a| a.len())));
                r.field("checked_slopes", checked);
            }
            Ok(r)
        }
        Command::Kappa { file } => {
            let input = load(file)?;
            let pres = presentation(&input, budget)?;
            let fan = pres.fan();
            let k1 = kappa_global(fan)?;
            let k2 = kappa_global_v2(fan)?;
            let mut per_cell = Vec::new();
            let mut r = Report::new("kappa");
            r.text(format!("kappa1 = {}", format_rat(&k1)));
            r.text(format!("kappa2 = {}", format_rat(&k2)));
            if fan.signature().p == 2 {
                for c in fan.maximal_cells() {
                    let k = kappa_sigma(c)?;
                    r.text(format!("cell {}: {}", c.interval, format_rat(&k)));
                    per_cell.push(json!({ "interval": interval(c), "kappa": format_rat(&k) }));
                }
            }
            r.field("kappa1", json!(format_rat(&k1)));
            r.field("kappa2", json!(format_rat(&k2)));
            r.field("per_cell", json!(per_cell));
            Ok(r)
        }
        Command::Divide { file, operator, order } => {
            let input = load(file)?;
            let sig = input.sig;
            let ord = parse_order(sig, order)?.compile(sig)?;
            let p = parse_operator(sig, operator)?;
            let hom: Vec<DiffOp> = input.generators.iter().map(homogenize).collect::<Result<_, _>>()?;
            let basis = minimal_reduce(&z_saturate(&reduced_basis(&hom, &ord, budget)?, budget)?)?;
            let divisors: Vec<DiffOp> = basis.ops().cloned().collect();
            let res = divide(&p, &divisors, &ord, budget.division_steps)?;
            res.verify(&p, &divisors)?;
            if res.truncated {
                return Err(Error::Budget(format!("division stopped after {} steps; tail {}", res.steps, res.tail)));
            }
            let mut r = Report::new("divide");
            for (q, d) in res.quotients.iter().zip(&divisors) {
                if !q.is_zero() {
                    r.text(format!("({q}) * ({d})"));
                }
            }
            r.text(format!("remainder {}", res.remainder));
            r.field("order", json!(order));
            r.field("divisors", ops(divisors.iter()));
            r.field("quotients", ops(res.quotients.iter()));
            r.field("remainder", json!(res.remainder.to_string()));
            r.field("steps", json!(res.steps));
            Ok(r)
        }
        Command::Reduce { file, operator, w, certs, slope } => {
            let input = load(file)?;
            let sig = input.sig;
            let pres = presentation(&input, budget)?;
            let w = weight(sig, w)?;
            let p = parse_d_operator(sig, operator)?;
            let fan = pres.fan();
            let cell = match slope {
                Some(s) => fan.cell_of(&parse_slope(s)?).ok_or_else(|| usage(format!("no cell at slope {s}")))?,
                None => fan.maximal_cells().next().unwrap_or(&fan.cells[0]),
            };
            let certs = match certs {
                Some(path) => read_certs(path, sig)?,
                None => cell
                    .generators()
                    .into_iter()
                    .map(|l| Ok((minimal_representative(&p, &l, &pres)?, l)))
                    .collect::<Result<Vec<_>, Error>>()?
                    .into_iter()
                    .map(|(c, l)| (l, c))
                    .collect(),
            };
            let certs: Vec<(DiffOp, VForm)> = certs.into_iter().map(|(l, c)| (c, l)).collect();
            if !pres.in_ideal(&(&p - &certs[0].0))? {
                return Err(Error::Precondition(format!("the certificates do not represent {p}")));
            }
            let (res, trace) = theorem1_witness(&certs, cell, &w, &pres, budget)?;
            let mut r = Report::new("reduce");
            r.text(format!("cell {} w {}", cell.interval, w));
            r.text(render(&trace).trim_end().to_string());
            r.field("cell", json!(interval(cell)));
            r.field("w", json!(w.0));
            r.field("result", json!(res.to_string()));
            r.field("trace", trace_json(&trace));
            Ok(r)
        }
        Command::Normalize { file, operator, w, certs } => {
            let input = load(file)?;
            let sig = input.sig;
            let pres = presentation(&input, budget)?;
            let w = weight(sig, w)?;
            let p = parse_d_operator(sig, operator)?;
            let certs = match certs {
                Some(path) => read_certs(path, sig)?,
                None => skeleton_certificates(&p, &pres)?,
            };
            if let Some((_, c)) = certs.first() {
                if !pres.in_ideal(&(&p - c))? {
                    return Err(Error::Precondition(format!("the certificates do not represent {p}")));
                }
            }
            let k1 = kappa_global(pres.fan())?;
            let (res, trace) = theorem2bis_normalize(&certs, &w, &pres, budget)?;
            let mut r = Report::new("normalize");
            r.text(format!("kappa1 = {}, w = {}", format_rat(&k1), w));
            r.text(render(&trace).trim_end().to_string());
            r.field("kappa1", json!(format_rat(&k1)));
            r.field("w", json!(w.0));
            r.field("result", json!(res.to_string()));
            r.field("trace", trace_json(&trace));
            Ok(r)
        }
        Command::Oracle(cmd) => oracle(cmd, cfg, budget),
    }
}

fn oracle(cmd: &OracleCommand, cfg: &Config, budget: Budget) -> Result<Report, Error> {
    let window = DegreeWindow { bound: cfg.degree };
    let build = |input: &Input| {
        let grading = input.map.as_ref().and_then(|m| m.grading());
        Oracle::new(input.generators.clone(), RingKind::Weyl, window, grading)
    };
    let cert_json = |c: &dfan_core::oracle::Certificate| ops(c.multipliers.iter());
    match cmd {
        OracleCommand::Member { file, operator } => {
            let input = load(file)?;
            let p = parse_d_operator(input.sig, operator)?;
            let mut r = Report::new("oracle-member");
            r.field("degree", json!(cfg.degree));
            match build(&input)?.ideal_membership(&p)? {
                Membership::Member(c) => {
                    r.text("member".into());
                    r.field("member", json!(true));
                    r.field("multipliers", cert_json(&c));
                }
                Membership::UnknownAtBound(d) => {
                    r.text(format!("unknown at degree {d}"));
                    r.field("member", Value::Null);
                }
            }
            Ok(r)
        }
        OracleCommand::Vfilt { file, operator, form, k } => {
            let input = load(file)?;
            let p = parse_d_operator(input.sig, operator)?;
            let l = parse_vform(form)?;
            let k: Rat = k.trim().parse().map_err(|_| usage(format!("bad rational {k:?}")))?;
            let mut r = Report::new("oracle-vfilt");
            r.field("degree", json!(cfg.degree));
            r.field("form", json!(l.to_string()));
            r.field("k", json!(format_rat(&k)));
            match build(&input)?.vfilt_membership(&p, &l, &k)? {
                VfiltMembership::Member { witness, certificate } => {
                    r.text(format!("member, witness {witness}"));
                    r.field("member", json!(true));
                    r.field("witness", json!(witness.to_string()));
                    r.field("multipliers", cert_json(&certificate));
                }
                VfiltMembership::UnknownAtBound(d) => {
                    r.text(format!("unknown at degree {d}"));
                    r.field("member", Value::Null);
                }
            }
            Ok(r)
        }
        OracleCommand::Vbar { file, operator, w } => {
            let input = load(file)?;
            let p = parse_d_operator(input.sig, operator)?;
            let w = weight(input.sig, w)?;
            let pres = presentation(&input, budget)?;
            let sk = pres.fan().skeleton.clone();
            let mut r = Report::new("oracle-vbar");
            r.field("degree", json!(cfg.degree));
            r.field("w", json!(w.0));
            match build(&input)?.vbar_membership(&p, &sk, &w.0)? {
                VbarMembership::Member(certs) => {
                    r.text("member".into());
                    for (l, c) in &certs {
                        r.text(format!("{l} = {c}"));
                    }
                    r.field("member", json!(true));
                    r.field("certificates", json!(certs.iter().map(|(l, c)| json!([l.to_string(), c.to_string()])).collect::<Vec<_>>()));
                }
                VbarMembership::UnknownAtBound(d) => {
                    r.text(format!("unknown at degree {d}"));
                    r.field("member", Value::Null);
                }
            }
            Ok(r)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::InvalidForm(_) | Error::SignatureMismatch(..) | Error::ContainsZ | Error::Unsupported(_) => 2,
        Error::Budget(_) => 3,
        Error::Invariant(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.finish(cli.config.json, cli.config.seed));
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.config.json {
                let v = json!({ "schema": 1, "seed": cli.config.seed, "error": e.to_string(), "status": exit_code(&e) });
                println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            }
            eprintln!("dfan: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
