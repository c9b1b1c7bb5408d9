//! Command-line front end. Every command prints one JSON object.
//!
//! Exit codes: 0 when the question was answered (either way), 1 for input
//! errors, 2 when an internal consistency check failed.

pub mod dsl;

use std::collections::BTreeMap;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::atoms::Atom;
use crate::error::{Error, Result};
use crate::finsolve::{finsolve, LevelTrace};
use crate::linvec::FinVector;
use crate::orbits::{Entry, OrbitSet, Pattern, TightFamilies, TightOrbit};
use crate::oracle::{default_pool, sandwich, Mode};
use crate::ring::{parse_rational, Ring, RingElem};
use crate::solve::{solve, verify, witness_vector};

pub use dsl::{parse, print, System};

#[derive(Parser, Debug)]
#[command(name = "orbitfin", version, about = "Linear equations over orbit-finite sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// System file.
    file: String,
    /// Coefficient ring: Q, Z or Zmod<m> (overrides the file).
    #[arg(long)]
    ring: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Finitely supported solvability.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Include the witness.
        #[arg(long)]
        witness: bool,
        /// Include the reduction chain.
        #[arg(long)]
        trace: bool,
    },
    /// Finitary solvability.
    Finsolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        witness: bool,
        #[arg(long)]
        trace: bool,
    },
    /// Checks a witness (a JSON array, or an object with a "witness" field).
    Verify {
        #[command(flatten)]
        common: Common,
        witness_file: String,
    },
    /// Lists the tight-orbit families of a declared set.
    Basis {
        #[command(flatten)]
        common: Common,
        set: String,
    },
    /// Runs the solver against the oracle sandwich.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "solve")]
        mode: CheckMode,
        /// Pool size for the sufficient side.
        #[arg(long)]
        oracle_pool: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckMode {
    Solve,
    Finsolve,
}

/// Parses `Q`, `Z`, `Zmod7`, `Zmod:7` or `Z/7`.
pub fn parse_ring(s: &str) -> Result<Ring> {
    let bad = || Error::Ring(format!("unknown ring `{s}`"));
    match s {
        "Q" => Ok(Ring::Rational),
        "Z" => Ok(Ring::Integer),
        _ => {
            let m = s
                .strip_prefix("Zmod")
                .map(|r| r.trim_start_matches([':', ' ']))
                .or_else(|| s.strip_prefix("Z/"))
                .ok_or_else(bad)?;
            Ring::modular(m.parse::<u64>().map_err(|_| bad())?)
        }
    }
}

fn load(common: &Common) -> Result<System> {
    let ring = common.ring.as_deref().map(parse_ring).transpose()?;
    let text = std::fs::read_to_string(&common.file).map_err(|e| Error::Precondition(format!("cannot read {}: {e}", common.file)))?;
    parse(&text, ring)
}

fn pattern_json(set: &OrbitSet, p: &Pattern) -> Value {
    let entries: Vec<Value> = p
        .entries
        .iter()
        .map(|e| match e {
            Entry::Atom(a) => json!(a.id()),
            Entry::Var(v) => json!(format!("x{v}")),
        })
        .collect();
    json!({"set": set.orbit(p.orbit).id, "entries": entries})
}

fn witness_json(set: &OrbitSet, terms: &[(TightOrbit, RingElem)]) -> Value {
    Value::Array(
        terms
            .iter()
            .map(|(t, q)| json!({"tight_orbit": pattern_json(set, &t.pattern), "coef": q.to_string()}))
            .collect(),
    )
}

fn fin_terms(x: &FinVector) -> Vec<(TightOrbit, RingElem)> {
    x.entries().iter().map(|(e, q)| (TightOrbit::new(Pattern::from_element(e)), q.clone())).collect()
}

fn trace_json(trace: &[LevelTrace]) -> Value {
    Value::Array(
        trace
            .iter()
            .map(|l| {
                json!({
                    "atom_dimension": l.atom_dimension,
                    "components": l.components.iter().map(|(k, w)| json!({"arity": k, "width": w})).collect::<Vec<_>>(),
                    "representatives": l.representatives,
                    "target_entries": l.target_entries,
                    "locally_solvable": l.locally_solvable,
                    "chosen": l.chosen.iter().map(|a| a.id()).collect::<Vec<_>>(),
                    "orders": l.orders,
                })
            })
            .collect(),
    )
}

/// Reads witness terms from JSON. Entries are atom numbers or variable
/// names; coefficients are exact literals (strings) or integers.
pub fn read_witness(set: &OrbitSet, ring: &Ring, v: &Value) -> Result<Vec<(TightOrbit, RingElem)>> {
    let bad = |m: &str| Error::Precondition(format!("malformed witness: {m}"));
    let items = match v {
        Value::Array(a) => a,
        Value::Object(o) => o.get("witness").and_then(Value::as_array).ok_or_else(|| bad("no witness array"))?,
        _ => return Err(bad("expected an array")),
    };
    let mut out = Vec::new();
    for it in items {
        let t = it.get("tight_orbit").ok_or_else(|| bad("missing tight_orbit"))?;
        let id = t.get("set").and_then(Value::as_str).ok_or_else(|| bad("missing set"))?;
        let orbit = set.index_of(id).ok_or_else(|| bad(&format!("unknown set {id}")))?;
        let mut names: BTreeMap<String, u32> = BTreeMap::new();
        let mut entries = Vec::new();
        for e in t.get("entries").and_then(Value::as_array).ok_or_else(|| bad("missing entries"))? {
            entries.push(match e {
                Value::Number(n) => {
                    let n = n.as_u64().filter(|&n| n > 0 && n <= u32::MAX as u64).ok_or_else(|| bad("atoms are positive integers"))?;
                    Entry::Atom(Atom::new(n as u32))
                }
                Value::String(s) => {
                    let next = names.len() as u32;
                    Entry::Var(*names.entry(s.clone()).or_insert(next))
                }
                _ => return Err(bad("entries are numbers or names")),
            });
        }
        let pattern = set.pattern(orbit, entries)?;
        let coef = match it.get("coef") {
            Some(Value::String(s)) => parse_rational(s).ok_or_else(|| bad("bad coefficient"))?,
            Some(Value::Number(n)) => n.as_i64().map(|n| num_rational::BigRational::from_integer(n.into())).ok_or_else(|| bad("bad coefficient"))?,
            _ => return Err(bad("missing coef")),
        };
        out.push((TightOrbit::new(pattern), ring.from_rational(&coef)?));
    }
    Ok(out)
}

fn execute(cmd: Command) -> Result<Value> {
    match cmd {
        Command::Solve { common, witness, trace } => {
            let sys = load(&common)?;
            let out = solve(&sys.matrix, &sys.target)?;
            let mut v = json!({"mode": "solve", "ring": sys.ring.to_string(), "solvable": out.solvable});
            if witness {
                if let Some(terms) = &out.terms {
                    v["witness"] = witness_json(sys.matrix.cols(), terms);
                }
            }
            if trace {
                v["trace"] = trace_json(&out.trace);
            }
            if let Some(n) = out.note {
                v["note"] = json!(n);
            }
            Ok(v)
        }
        Command::Finsolve { common, witness, trace } => {
            let sys = load(&common)?;
            let out = finsolve(&sys.matrix, &sys.target)?;
            let mut v = json!({"mode": "finsolve", "ring": sys.ring.to_string(), "solvable": out.solvable});
            if witness {
                if let Some(x) = &out.witness {
                    v["witness"] = witness_json(sys.matrix.cols(), &fin_terms(x));
                }
            }
            if trace {
                v["trace"] = trace_json(&out.trace);
            }
            if let Some(n) = out.note {
                v["note"] = json!(n);
            }
            Ok(v)
        }
        Command::Verify { common, witness_file } => {
            let sys = load(&common)?;
            let text = std::fs::read_to_string(&witness_file).map_err(|e| Error::Precondition(format!("cannot read {witness_file}: {e}")))?;
            let json: Value = serde_json::from_str(&text).map_err(|e| Error::Precondition(format!("witness is not JSON: {e}")))?;
            let terms = read_witness(sys.matrix.cols(), &sys.ring, &json)?;
            let x = witness_vector(&sys.matrix, &terms)?;
            Ok(json!({"mode": "verify", "verified": verify(&sys.matrix, &x, &sys.target)?}))
        }
        Command::Basis { common, set } => {
            let sys = load(&common)?;
            let decl = sys.set(&set).ok_or_else(|| Error::Precondition(format!("unknown set {set}")))?.clone();
            let fams = TightFamilies::new(std::sync::Arc::new(OrbitSet::single(decl)))?;
            let list: Vec<Value> = fams
                .families()
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let d = fams.set.orbit(i);
                    json!({
                        "family": d.id,
                        "arity": d.arity,
                        "profile": f.profile.iter().map(|p| p + 1).collect::<Vec<_>>(),
                        "group": d.group.generator_cycles(),
                        "group_order": d.group.order(),
                    })
                })
                .collect();
            Ok(json!({"mode": "basis", "set": set, "families": list}))
        }
        Command::Check { common, mode, oracle_pool } => {
            let sys = load(&common)?;
            let (a, t) = (&sys.matrix, &sys.target);
            let m = oracle_pool.unwrap_or_else(|| default_pool(a, t));
            let (name, answer, oracle_mode) = match mode {
                CheckMode::Solve => ("solve", solve(a, t)?.solvable, Mode::Solv),
                CheckMode::Finsolve => ("finsolve", finsolve(a, t)?.solvable, Mode::FinSolv),
            };
            let s = sandwich(a, t, oracle_mode, m)?;
            if !s.admits(answer) {
                return Err(Error::Verification(format!("answer {answer} lies outside the oracle sandwich")));
            }
            Ok(json!({
                "mode": "check",
                "checked": name,
                "solvable": answer,
                "pool": m,
                "sandwich": {"sufficient_yes": s.sufficient_yes, "necessary_yes": s.necessary_yes, "forced": s.forced},
                "consistent": true,
            }))
        }
    }
}

/// Runs one command, writing JSON to `out` and diagnostics to `err`.
pub fn run_with<W: Write, E: Write>(argv: &[String], out: &mut W, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(if code == 0 { out as &mut dyn Write } else { err as &mut dyn Write }, "{e}");
            return code;
        }
    };
    match execute(cli.command) {
        Ok(v) => {
            let _ = writeln!(out, "{v}");
            0
        }
        Err(e) => {
            let code = if matches!(e, Error::Verification(_)) { 2 } else { 1 };
            let _ = writeln!(out, "{}", json!({"error": e.to_string()}));
            let _ = writeln!(err, "error: {e}");
            code
        }
    }
}

pub fn run(argv: &[String]) -> i32 {
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}
