//! The `twh` command line: one subcommand per computation, JSON in, JSON or CSV out.
//!
//! Exit codes: 0 ok, 2 invalid input, 3 unsupported system, 4 I/O failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde_json::{json, Value};

use crate::bounds::{self, bound_constants_from, BoundParams, DEFAULT_BITS};
use crate::error::{Error, Result};
use crate::exact_reals::FactoredReal;
use crate::filtration::{exceptional_subspace, filtration, special_case_t, weight};
use crate::infima::{
    default_box, gap_experiment, minkowski_check, scan_system, slope_profile, successive_infima,
    SystemInstance, MAX_CANDIDATES,
};
use crate::linalg::Subspace;
use crate::twisted::{
    pair_invariants, parse_matrix, parse_rational_str, q_of, qvec_json, sandwich_holds, validate,
    TwistedPair,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::Parse(_) | Error::Domain(_) => EXIT_VALIDATION,
        Error::Unsupported(_) | Error::LatticeOverflow { .. } => EXIT_UNSUPPORTED,
        Error::Io(_) => EXIT_IO,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "twh",
    about = "Exact twisted heights, filtrations and explicit bounds"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Decimal digits requested from the bounds calculator.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Twist parameter, a rational >= 1.
    #[arg(long, default_value = "10")]
    pub q: String,
    /// Coordinate bound of the search box; defaults to ceil(Q^c_max), capped.
    #[arg(long = "box")]
    pub box_bound: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the core and normalization conditions of a pair.
    Validate {
        input: PathBuf,
    },
    /// Delta_L and H_L.
    Invariants {
        input: PathBuf,
    },
    /// Weight of the subspace spanned by the rows of --basis.
    Weight {
        input: PathBuf,
        /// JSON matrix of spanning vectors, e.g. "[[1,0,0]]".
        #[arg(long)]
        basis: String,
    },
    Filtration {
        input: PathBuf,
    },
    Exceptional {
        input: PathBuf,
    },
    /// Exceptional subspace of a pair with forms among X_i and their sum, as index blocks.
    SpecialT {
        input: PathBuf,
    },
    Infima {
        input: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Successive infima over a geometric grid of Q; CSV when --out ends in .csv.
    Slopes {
        input: PathBuf,
        /// a:b:steps, geometric from a to b.
        #[arg(long, default_value = "10:10000:4")]
        qgrid: String,
        #[arg(long = "box")]
        box_bound: Option<u64>,
        #[arg(long)]
        csv: bool,
    },
    Minkowski {
        input: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Solutions of the gap inequality with Q in [A, A^(1+delta)].
    Gap {
        input: PathBuf,
        #[arg(long, default_value = "1")]
        delta: String,
        /// Defaults to n^2.
        #[arg(long)]
        a: Option<String>,
        #[arg(long = "box", default_value_t = 10)]
        box_bound: u64,
    },
    /// Enumerate solutions of a system of inequalities.
    Scan {
        input: PathBuf,
        #[arg(long = "box", default_value_t = 10)]
        box_bound: u64,
        /// Height cutoff; defaults to the box bound.
        #[arg(long)]
        hmax: Option<String>,
    },
    Bounds(BoundsArgs),
    /// Turn a system of inequalities into a normalized twisted pair.
    Reduce {
        input: PathBuf,
    },
    /// Cover [Q1, inf) or count intervals of ratio omega.
    Cover {
        #[arg(long)]
        omega: String,
        #[arg(long, default_value = "1")]
        delta: String,
        #[arg(long)]
        q1: Option<String>,
        /// With --n, also report the small-Q covers.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long = "R")]
        r: Option<u64>,
        #[arg(long, default_value = "1")]
        hl: String,
    },
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub thm: String,
    #[arg(long)]
    pub n: u64,
    #[arg(long = "R")]
    pub r: Option<u64>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long = "D", default_value_t = 1)]
    pub big_d: u64,
    #[arg(long = "d", default_value_t = 1)]
    pub small_d: u64,
    #[arg(long)]
    pub s: Option<u64>,
    #[arg(long, default_value = "1")]
    pub hl: String,
    #[arg(long, default_value = "1")]
    pub hstar: String,
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn read_pair(path: &Path) -> Result<TwistedPair> {
    TwistedPair::from_json(&read_json(path)?)
}

fn parse_q(s: &str) -> Result<FactoredReal> {
    let q = parse_rational_str(s)?;
    if q < BigRational::one() {
        return Err(Error::Domain(format!("Q = {q} is below 1")));
    }
    q_of(&q)
}

/// `a:b:steps` into `a^(1-t) b^t`, `t = k/(steps-1)`; exact.
pub fn parse_qgrid(s: &str) -> Result<Vec<FactoredReal>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("qgrid {s:?} is not a:b:steps")));
    }
    let a = parse_q(parts[0])?;
    let b = parse_q(parts[1])?;
    let steps: i64 = parts[2]
        .parse()
        .map_err(|_| Error::Parse(format!("bad step count {:?}", parts[2])))?;
    if steps < 1 {
        return Err(Error::Parse("qgrid needs at least one step".into()));
    }
    if steps == 1 {
        return Ok(vec![a]);
    }
    Ok((0..steps)
        .map(|k| {
            let t = BigRational::new(BigInt::from(k), BigInt::from(steps - 1));
            a.pow(&(BigRational::one() - &t)).mul(&b.pow(&t))
        })
        .collect())
}

fn search_box(pair: &TwistedPair, q: &FactoredReal, b: Option<u64>) -> u64 {
    b.unwrap_or_else(|| default_box(pair, q, MAX_CANDIDATES))
}

fn start_bits(precision: Option<u32>) -> u32 {
    match precision {
        Some(d) => DEFAULT_BITS.max((d as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16),
        None => DEFAULT_BITS,
    }
}

/// The report text and whether it is JSON (otherwise CSV).
fn execute(cfg: &RunConfig) -> Result<(String, bool)> {
    let json_out = |v: Value| {
        Ok((
            serde_json::to_string_pretty(&v).expect("serializable") + "\n",
            true,
        ))
    };
    match &cfg.command {
        Command::Validate { input } => {
            let rep = validate(&read_pair(input)?);
            let v = json!({
                "core_ok": rep.core_ok,
                "normalized_ok": rep.normalized_ok,
                "r": rep.r,
                "messages": rep.messages,
            });
            if !rep.core_ok {
                eprintln!("{}", rep.messages.join("\n"));
                emit(cfg, &(serde_json::to_string_pretty(&v).unwrap() + "\n"))?;
                return Err(Error::Validation("pair fails the core conditions".into()));
            }
            json_out(v)
        }
        Command::Invariants { input } => {
            let p = read_pair(input)?;
            let inv = pair_invariants(&p)?;
            json_out(json!({
                "delta": inv.delta.to_json(),
                "h_l": inv.h_l.to_json(),
                "delta_log10": inv.delta.log10(12).render(),
                "h_l_log10": inv.h_l.log10(12).render(),
                "sandwich_ok": sandwich_holds(&p, &inv),
            }))
        }
        Command::Weight { input, basis } => {
            let p = read_pair(input)?;
            let rows = parse_matrix(
                &serde_json::from_str(basis).map_err(|e| Error::Parse(format!("--basis: {e}")))?,
            )?;
            if rows.iter().any(|r| r.len() != p.n()) {
                return Err(Error::Validation(format!(
                    "basis vectors must have length {}",
                    p.n()
                )));
            }
            let u = Subspace::span(p.n(), &rows);
            json_out(json!({
                "dim": u.dim(),
                "basis": u.basis().iter().map(|b| qvec_json(b)).collect::<Vec<_>>(),
                "weight": weight(&p, &u).to_string(),
            }))
        }
        Command::Filtration { input } => {
            let p = read_pair(input)?;
            let chain = filtration(&p)?;
            let mut v = chain.to_json();
            let slopes: Vec<String> = (1..=p.n())
                .map(|i| chain.slope_for_index(i).to_string())
                .collect();
            v["slopes"] = json!(slopes);
            json_out(v)
        }
        Command::Exceptional { input } => {
            let t = exceptional_subspace(&read_pair(input)?)?;
            json_out(
                json!({ "dim": t.dim(), "basis": t.basis().iter().map(|b| qvec_json(b)).collect::<Vec<_>>() }),
            )
        }
        Command::SpecialT { input } => {
            let p = read_pair(input)?;
            let blocks = special_case_t(&p)?;
            let one_based: Vec<Vec<usize>> = blocks
                .iter()
                .map(|b| b.iter().map(|i| i + 1).collect())
                .collect();
            let t = exceptional_subspace(&p)?;
            json_out(json!({ "blocks": one_based, "dim": t.dim() }))
        }
        Command::Infima { input, search } => {
            let p = read_pair(input)?;
            let q = parse_q(&search.q)?;
            let est = successive_infima(&p, &q, search_box(&p, &q, search.box_bound))?;
            json_out(est.to_json())
        }
        Command::Slopes {
            input,
            qgrid,
            box_bound,
            csv,
        } => {
            let p = read_pair(input)?;
            let qs = parse_qgrid(qgrid)?;
            let b = *box_bound;
            let prof = slope_profile(&p, &qs, &|q| search_box(&p, q, b))?;
            let as_csv = *csv
                || cfg
                    .out
                    .as_ref()
                    .is_some_and(|o| o.extension().is_some_and(|e| e == "csv"));
            if as_csv {
                Ok((prof.to_csv(), false))
            } else {
                json_out(prof.to_json())
            }
        }
        Command::Minkowski { input, search } => {
            let p = read_pair(input)?;
            let q = parse_q(&search.q)?;
            json_out(minkowski_check(&p, &q, search_box(&p, &q, search.box_bound))?.to_json())
        }
        Command::Gap {
            input,
            delta,
            a,
            box_bound,
        } => {
            let p = read_pair(input)?;
            let delta = parse_rational_str(delta)?;
            let a = match a {
                Some(s) => parse_rational_str(s)?,
                None => BigRational::from_integer(BigInt::from(p.n() * p.n())),
            };
            json_out(gap_experiment(&p, &delta, &a, *box_bound)?.to_json())
        }
        Command::Scan {
            input,
            box_bound,
            hmax,
        } => {
            let sys = SystemInstance::from_json(&read_json(input)?)?;
            let h = match hmax {
                Some(s) => parse_rational_str(s)?,
                None => BigRational::from_integer(BigInt::from(*box_bound)),
            };
            json_out(scan_system(&sys, &h, *box_bound)?.to_json())
        }
        Command::Bounds(a) => {
            let mut p = BoundParams::new(a.n)
                .h_l(parse_rational_str(&a.hl)?)
                .h_star(parse_rational_str(&a.hstar)?);
            if let Some(d) = &a.delta {
                p = p.delta(parse_rational_str(d)?);
            }
            if let Some(e) = &a.eps {
                p = p.eps(parse_rational_str(e)?);
            }
            if let Some(r) = a.r {
                p = p.r(r);
            }
            if let Some(s) = a.s {
                p = p.s(s);
            }
            p.big_d = a.big_d;
            p.small_d = a.small_d;
            json_out(bound_constants_from(&a.thm, &p, start_bits(cfg.precision))?.to_json())
        }
        Command::Reduce { input } => {
            let sys = SystemInstance::from_json(&read_json(input)?)?;
            json_out(bounds::reduce_system(&sys)?.to_json())
        }
        Command::Cover {
            omega,
            delta,
            q1,
            n,
            r,
            hl,
        } => {
            let omega = parse_rational_str(omega)?;
            let delta = parse_rational_str(delta)?;
            if !delta.is_positive() {
                return Err(Error::Domain("delta must be positive".into()));
            }
            let mut v = json!({ "count": bounds::interval_cover(&omega, &delta)? });
            if let Some(q1) = q1 {
                v["log10_endpoints"] = json!(bounds::cover_list(
                    &parse_rational_str(q1)?,
                    &omega,
                    &delta
                )?);
            }
            if let Some(n) = n {
                let s2 = bounds::s2(*n, &delta)?;
                v["s2"] = json!({ "s": s2.s, "bound": s2.bound, "within_bound": s2.within_bound });
                if let Some(r) = r {
                    let s1 = bounds::s1(*n, &delta, *r, &parse_rational_str(hl)?)?;
                    v["s1"] =
                        json!({ "s": s1.s, "bound": s1.bound, "within_bound": s1.within_bound });
                }
            }
            json_out(v)
        }
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Run one command; returns the process exit code.
pub fn run_config(cfg: &RunConfig) -> i32 {
    let res = execute(cfg).and_then(|(text, _)| emit(cfg, &text));
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("twh: {e}");
            exit_code(&e)
        }
    }
}

/// Parse `argv` (including the program name) and run.
pub fn cmd_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(argv) {
        Ok(cfg) => run_config(&cfg),
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let _ = e.print();
            code
        }
    }
}
