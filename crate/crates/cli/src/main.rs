//! `tricoord`: command-line access to edge-vector coordinates, flip paths,
//! reducibility certificates and crushing.

use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tricoord::crushing::{canonical_system_desk, crush, crush_path, maximal_multicurve};
use tricoord::curves::{decompose, is_multicurve};
use tricoord::mapping::GeneratorTable;
use tricoord::reducibility::{brute_force_invariant, decide, verify_certificate, DecideOptions};
use tricoord::surfaces::{load_generators, load_surface};
use tricoord::{EdgeVector, Error, Exec, MappingClassPath, Triangulation, Word};

#[derive(Parser)]
#[command(name = "tricoord", version, about = "Edge vectors, flip paths and reducibility of mapping classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output style.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Worker threads for branch search; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Whether a vector is a multicurve, with its components.
    Check {
        #[arg(long)]
        surface: String,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
    },
    /// Image of a vector under a word.
    Apply {
        #[command(flatten)]
        job: Job,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
    },
    /// Decide reducibility and print a certificate.
    Reduce {
        #[command(flatten)]
        job: Job,
        /// Search exhaustively for an invariant vector with entries up to this value.
        #[arg(long, value_name = "MAX")]
        brute: Option<u64>,
        /// Walk every branch without emptiness pruning.
        #[arg(long)]
        no_prune: bool,
    },
    /// Check a claimed invariant multicurve.
    Verify {
        #[command(flatten)]
        job: Job,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
    },
    /// Crush the surface along a multicurve, and the word's path if given.
    Crush {
        #[arg(long)]
        surface: String,
        #[arg(long)]
        generators: Option<String>,
        #[arg(long)]
        word: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
    },
    /// An invariant multicurve whose crushed class is irreducible.
    Maximal {
        #[command(flatten)]
        job: Job,
        #[arg(long)]
        no_prune: bool,
    },
    /// Desk approximation of the canonical curve system.
    Canonical {
        #[command(flatten)]
        job: Job,
        #[arg(long)]
        max_entry: u64,
        #[arg(long)]
        no_prune: bool,
    },
    /// Whether the word acts trivially on curves.
    Identity {
        #[command(flatten)]
        job: Job,
    },
}

#[derive(Args)]
struct Job {
    /// Built-in surface name or triangulation file.
    #[arg(long)]
    surface: String,
    /// Built-in name or generator file; defaults to the surface's own table.
    #[arg(long)]
    generators: Option<String>,
    /// Word in the generators, such as `a.~b`; empty for the identity.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    word: String,
}

/// Failures that map to exit code 2.
#[derive(Debug)]
struct Malformed(anyhow::Error);

impl std::fmt::Display for Malformed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Malformed {}

fn malformed<E: Into<anyhow::Error>>(e: E) -> anyhow::Error {
    anyhow::Error::new(Malformed(e.into()))
}

struct Ctx {
    format: Format,
    exec: Exec,
}

impl Ctx {
    fn emit(&self, text: String, value: Value) {
        match self.format {
            Format::Text => println!("{text}"),
            Format::Structured => println!("{}", serde_json::to_string_pretty(&value).expect("plain JSON")),
        }
    }

    fn options(&self, prune: bool) -> DecideOptions {
        DecideOptions { prune, exec: self.exec, ..DecideOptions::default() }
    }
}

fn surface(source: &str) -> anyhow::Result<Triangulation> {
    load_surface(source).map_err(malformed)
}

fn table(source: &str, base: &Triangulation) -> anyhow::Result<GeneratorTable> {
    load_generators(source, base).map_err(malformed)
}

fn resolve(job: &Job) -> anyhow::Result<(Triangulation, MappingClassPath)> {
    let t = surface(&job.surface)?;
    let gens = job.generators.as_deref().unwrap_or(&job.surface);
    let table = table(gens, &t)?;
    let word: Word = job.word.parse().map_err(malformed)?;
    let path = table.compile(&word).map_err(malformed)?;
    Ok((t, path))
}

fn vector(text: &str, zeta: usize) -> anyhow::Result<EdgeVector> {
    let v: EdgeVector = text.parse().map_err(malformed)?;
    if v.len() != zeta {
        return Err(malformed(Error::Length { expected: zeta, got: v.len() }));
    }
    Ok(v)
}

fn strings(v: &EdgeVector) -> Vec<String> {
    v.entries().iter().map(ToString::to_string).collect()
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let exec = match cli.jobs {
        Some(1) => Exec::Sequential,
        _ => Exec::Parallel,
    };
    if let Some(n) = cli.jobs.filter(|&n| n > 1) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    let ctx = Ctx { format: cli.format, exec };
    match cli.command {
        Command::Check { surface: s, vector: v } => check(&ctx, &surface(&s)?, &v),
        Command::Apply { job, vector: v } => {
            let (t, path) = resolve(&job)?;
            let v = vector(&v, t.zeta())?;
            let out = match path.apply(&v) {
                Ok(out) => out,
                Err(e) => {
                    eprintln!("invalid vector: {e}");
                    return Ok(false);
                }
            };
            ctx.emit(out.to_string(), json!({ "vector": strings(&out) }));
            Ok(true)
        }
        Command::Reduce { job, brute, no_prune } => {
            let (_, path) = resolve(&job)?;
            if let Some(max) = brute {
                let found = brute_force_invariant(&path, max, ctx.exec);
                let verdict = if found.is_some() { "reducible" } else { "no invariant multicurve found" };
                let text = match &found {
                    Some(v) => format!("{verdict}\ncertificate: {v}"),
                    None => format!("{verdict} with entries <= {max}"),
                };
                ctx.emit(
                    text,
                    json!({ "brute": max, "reducible": found.is_some(), "certificate": found.as_ref().map(strings) }),
                );
                return Ok(found.is_some());
            }
            let report = decide(&path, ctx.options(!no_prune))?;
            let mut text = format!("{}\n", report.verdict);
            if let Some(c) = &report.certificate {
                text += &format!("certificate: {c}\n");
            }
            text += &format!(
                "bound: {} bits\nbranches explored: {}\nbranches pruned: {}",
                report.bound, report.branch_stats.explored, report.branch_stats.pruned
            );
            ctx.emit(text, serde_json::to_value(&report)?);
            Ok(report.certificate.is_some())
        }
        Command::Verify { job, vector: v } => {
            let (_, path) = resolve(&job)?;
            // Untrusted input: anything unreadable is simply not a certificate.
            let ok = v.parse::<EdgeVector>().map(|v| verify_certificate(&path, &v)).unwrap_or(false);
            ctx.emit(if ok { "valid" } else { "invalid" }.to_string(), json!({ "valid": ok }));
            Ok(ok)
        }
        Command::Crush { surface: s, generators, word, vector: v } => {
            let t = surface(&s)?;
            let v = vector(&v, t.zeta())?;
            if !is_multicurve(&t, &v).map_err(malformed)? {
                eprintln!("not a multicurve");
                return Ok(false);
            }
            let map = crush(&t, &v)?;
            let summary = map.summary();
            let inv = &summary.invariants;
            let mut text = format!(
                "crushed: {}\ngenus {} marked points {} components {} zeta {}\nremoved components: {}\nxi: {}",
                map.target(),
                inv.genus,
                inv.marked_points,
                inv.components,
                inv.zeta,
                summary.removed_components,
                summary.xi
            );
            let mut value = serde_json::to_value(&summary)?;
            if let Some(w) = word {
                let gens = generators.as_deref().unwrap_or(&s);
                let word: Word = w.parse().map_err(malformed)?;
                let path = table(gens, &t)?.compile(&word).map_err(malformed)?;
                let cp = crush_path(path.path(), &v)?;
                text += &format!(
                    "\ncrushed path: {} moves from {} ({} flips from {})",
                    cp.path.len(),
                    path.len(),
                    cp.path.flip_count(),
                    path.path().flip_count()
                );
                value["path"] = json!({
                    "moves": serde_json::to_value(cp.path.moves())?,
                    "steps": serde_json::to_value(&cp.steps)?,
                    "closes": cp.path.end().equals(cp.path.start()),
                });
            }
            ctx.emit(text, value);
            Ok(true)
        }
        Command::Maximal { job, no_prune } => {
            let (t, path) = resolve(&job)?;
            match maximal_multicurve(&path, ctx.options(!no_prune))? {
                Some(r) => {
                    let parts = decompose(&t, &r.curve)?;
                    let mut text = format!(
                        "maximal multicurve: {}\niterations: {}\nbound: {} bits",
                        r.curve, r.iterations, r.bound
                    );
                    for (c, k) in &parts {
                        text += &format!("\ncomponent: {c} x{k}");
                    }
                    let comps: Vec<Value> =
                        parts.iter().map(|(c, k)| json!({ "curve": strings(c), "multiplicity": k })).collect();
                    let mut value = serde_json::to_value(&r)?;
                    value["components"] = Value::Array(comps);
                    ctx.emit(text, value);
                    Ok(true)
                }
                None => {
                    ctx.emit("irreducible: no invariant multicurve".into(), json!({ "curve": null }));
                    Ok(false)
                }
            }
        }
        Command::Canonical { job, max_entry, no_prune } => {
            let (_, path) = resolve(&job)?;
            let sys = canonical_system_desk(&path, max_entry, ctx.options(!no_prune))?;
            let mut text = match &sys.system {
                Some(v) => format!("canonical system: {v}"),
                None => "canonical system: empty".to_string(),
            };
            text += &format!(
                "\ninvariant multicurves scanned: {}\nmaximal among them: {}\napproximate: {}",
                sys.invariant_found, sys.maximal_found, sys.approximate
            );
            ctx.emit(text, serde_json::to_value(&sys)?);
            Ok(true)
        }
        Command::Identity { job } => {
            let (t, path) = resolve(&job)?;
            let trivial = path.acts_trivially(ctx.exec);
            let mut text = if trivial { "acts trivially" } else { "acts non-trivially" }.to_string();
            let inv = t.invariants();
            let caveat = matches!((inv.genus, inv.marked_points), (1, 1) | (0, 4));
            if caveat {
                text += "\nnote: on the once-marked torus or four times marked sphere the hyperelliptic \
                         involution fixes every curve, so trivial action does not imply the identity class";
            }
            ctx.emit(text, json!({ "trivial": trivial, "hyperelliptic_caveat": caveat }));
            Ok(trivial)
        }
    }
}

fn check(ctx: &Ctx, t: &Triangulation, text: &str) -> anyhow::Result<bool> {
    let v = vector(text, t.zeta())?;
    let reason = if v.is_zero() {
        Some("zero")
    } else if v.entries().iter().any(|x| x.sign() == num_bigint::Sign::Minus) {
        Some("negative entry")
    } else if !is_multicurve(t, &v)? {
        Some("corner conditions fail")
    } else {
        None
    };
    if let Some(r) = reason {
        ctx.emit(format!("not a multicurve ({r})"), json!({ "multicurve": false, "reason": r }));
        return Ok(false);
    }
    let parts = decompose(t, &v)?;
    let xi = tricoord::crushing::xi(t, &v)?;
    let mut out = "multicurve".to_string();
    for (c, k) in &parts {
        out += &format!("\ncomponent: {c} x{k}");
    }
    out += &format!("\nxi: {xi}");
    let comps: Vec<Value> = parts.iter().map(|(c, k)| json!({ "curve": strings(c), "multiplicity": k })).collect();
    ctx.emit(out, json!({ "multicurve": true, "components": comps, "xi": xi }));
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let parse = e.downcast_ref::<Malformed>().is_some()
                || matches!(e.downcast_ref::<Error>(), Some(Error::Parse(_) | Error::Length { .. }));
            ExitCode::from(if parse { 2 } else { 1 })
        }
    }
}
