//! Command-line front end. `dispatch` is pure apart from file I/O so the
//! binary and the tests share it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;

use crate::io::{emit_instance, fingerprint, generate_canonical, generate_random, parse_instance, CanonicalKind, CanonicalParams, IoError};
use crate::network::{classify_with_ell, default_d, NetworkInstance, NodeClass};
use crate::protocol::{compile, SchemeError, SchemeKind, SchemeParams, SchemeResult};
use crate::security::{audit_scheme, monte_carlo_advisory, AuditOptions, SecurityError, DEFAULT_BUDGET};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

pub const BUDGET_ENV: &str = "KEYCAST_BUDGET";

const MC_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    /// 0 success, 1 verdict failure, 2 usage or parse error, 3 budget or feasibility error.
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub csv: Option<PathBuf>,
}

impl CommandOutcome {
    fn ok(stdout: String) -> Self {
        CommandOutcome { code: EXIT_OK, stdout, stderr: String::new(), csv: None }
    }

    fn fail(code: i32, stdout: String, stderr: impl Into<String>) -> Self {
        CommandOutcome { code, stdout, stderr: stderr.into(), csv: None }
    }
}

#[derive(Parser, Debug)]
#[command(name = "keycast", version, about = "Secure key-cast over DAG networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse and validate an instance file.
    Validate { file: PathBuf },
    /// Connectivity profile, d, d_hat, z and overloaded nodes.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        ell: Option<usize>,
    },
    /// Run a scheme once and report keys, edge uses and rate.
    Run {
        file: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exhaustive security audit of a scheme.
    Audit {
        file: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        budget: Option<u128>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write a canonical or random instance.
    Gen(GenArgs),
    /// Rate table over a fixture family.
    Bench {
        #[arg(long, default_value = "fig2")]
        family: String,
        #[arg(long = "d-range", default_value = "2..4")]
        d_range: String,
        #[arg(long = "ell-range", default_value = "1..3")]
        ell_range: String,
        #[arg(long, default_value_t = 13)]
        q: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SchemeArgs {
    #[arg(long, default_value = "full")]
    scheme: String,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    x: Option<usize>,
    #[arg(long)]
    z: Option<usize>,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// fig1, fig2, fig2_multi, type_b_chain, partial_mix, overloaded or random.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 13)]
    q: u32,
    #[arg(long, default_value_t = 1)]
    ell: usize,
    #[arg(long, default_value_t = 0)]
    x: usize,
    #[arg(long, default_value_t = 2)]
    sources: usize,
    #[arg(long, default_value_t = 2)]
    len: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    nodes: usize,
    #[arg(long, default_value_t = 0.3)]
    frac: f64,
}

pub fn dispatch<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK { CommandOutcome::ok(text) } else { CommandOutcome::fail(code, String::new(), text) };
        }
    };
    match cli.cmd {
        Cmd::Validate { file } => validate(&file),
        Cmd::Analyze { file, d, ell } => analyze(&file, d, ell),
        Cmd::Run { file, scheme, seed, csv } => run(&file, &scheme, seed, csv),
        Cmd::Audit { file, scheme, budget, csv } => audit(&file, &scheme, budget, csv),
        Cmd::Gen(args) => gen(&args),
        Cmd::Bench { family, d_range, ell_range, q, seed, csv } => bench(&family, &d_range, &ell_range, q, seed, csv),
    }
}

fn load(path: &Path) -> Result<NetworkInstance, CommandOutcome> {
    let text = fs::read_to_string(path)
        .map_err(|e| CommandOutcome::fail(EXIT_USAGE, String::new(), format!("{}: {e}\n", path.display())))?;
    parse_instance(&text).map_err(|e| CommandOutcome::fail(EXIT_USAGE, String::new(), format!("{}:\n{e}\n", path.display())))
}

fn scheme_code(e: &SchemeError) -> i32 {
    match e {
        SchemeError::BadParams(_) => EXIT_USAGE,
        SchemeError::ShareMismatch { .. } | SchemeError::KeyDisagreement { .. } => EXIT_VERDICT,
        _ => EXIT_INFEASIBLE,
    }
}

fn scheme_failure(stdout: String, e: &SchemeError) -> CommandOutcome {
    CommandOutcome::fail(scheme_code(e), stdout, format!("error: {e}\n"))
}

fn write_csv(path: &Path, body: &str) -> Result<(), CommandOutcome> {
    fs::write(path, body)
        .map_err(|e| CommandOutcome::fail(EXIT_USAGE, String::new(), format!("{}: {e}\n", path.display())))
}

fn decimal(r: Ratio<u64>) -> String {
    format!("{:.4}", *r.numer() as f64 / *r.denom() as f64)
}

fn validate(path: &Path) -> CommandOutcome {
    let inst = match load(path) {
        Ok(i) => i,
        Err(o) => return o,
    };
    CommandOutcome::ok(format!(
        "ok: {} nodes, {} edges, {} sources, {} terminal sets, F_{}\nfingerprint: {}\n",
        inst.node_count(),
        inst.edges().len(),
        inst.sources().len(),
        inst.terminal_set_count(),
        inst.q(),
        fingerprint(&inst)
    ))
}

fn analyze(path: &Path, d: Option<usize>, ell: Option<usize>) -> CommandOutcome {
    let inst = match load(path) {
        Ok(i) => i,
        Err(o) => return o,
    };
    let dmax = default_d(&inst);
    let d = d.unwrap_or(dmax);
    if d == 0 || d > dmax {
        return CommandOutcome::fail(EXIT_USAGE, String::new(), format!("error: d = {d} must lie in 1..={dmax}\n"));
    }
    let ell = ell.unwrap_or(inst.ell());
    let prof = match classify_with_ell(&inst, d, ell) {
        Ok(p) => p,
        Err(e) => return CommandOutcome::fail(EXIT_INFEASIBLE, String::new(), format!("error: {e}\n")),
    };
    let mut out = String::new();
    let _ = writeln!(out, "d = {d} (minimum terminal connectivity {dmax}), ell = {ell}");
    for p in &prof.per_source {
        let _ = writeln!(out, "source {}:", inst.name(p.source));
        for v in 0..inst.node_count() {
            if v == p.source || (inst.is_source(v) && p.class[v] == NodeClass::Source) {
                continue;
            }
            let mut line = format!("  {:<8} connectivity {:<3} {}", inst.name(v), p.connectivity[v], p.class[v].label());
            if p.class[v] == NodeClass::Full && p.partial_in[v] > 0 {
                let _ = write!(line, ", {} partial parents", p.partial_in[v]);
            }
            if p.class[v] == NodeClass::TypeB && !p.d_set[v].is_empty() {
                let names: Vec<&str> = p.d_set[v].iter().map(|&u| inst.name(u)).collect();
                let _ = write!(line, ", D = {{{}}}", names.join(","));
            }
            let _ = writeln!(out, "{line}");
        }
    }
    let _ = writeln!(out, "z_observed = {}, z = {}, d_hat = {}", prof.z_observed, prof.z, prof.d_hat);
    if prof.overloaded.is_empty() {
        let _ = writeln!(out, "J: none");
    } else {
        let parts: Vec<String> = prof.overloaded.iter().map(|&(v, p)| format!("{} (p = {p})", inst.name(v))).collect();
        let _ = writeln!(out, "J: {}", parts.join(", "));
    }
    CommandOutcome::ok(out)
}

fn params_of(a: &SchemeArgs) -> Result<(SchemeKind, SchemeParams), CommandOutcome> {
    let kind = SchemeKind::from_name(&a.scheme).filter(|k| *k != SchemeKind::ShamirUnicast).ok_or_else(|| {
        CommandOutcome::fail(
            EXIT_USAGE,
            String::new(),
            format!(
                "error: unknown scheme `{}` (full, multisource, partial, partial-multisource, unstructured)\n",
                a.scheme
            ),
        )
    })?;
    Ok((kind, SchemeParams { d: a.d, ell: a.ell, x: a.x, z: a.z }))
}

fn header(inst: &NetworkInstance, kind: SchemeKind, requested: SchemeKind) -> String {
    let mut out = format!("instance {} over F_{}\n", &fingerprint(inst)[..16], inst.q());
    if kind == requested {
        let _ = writeln!(out, "scheme: {kind}");
    } else {
        let _ = writeln!(out, "scheme: {kind} (requested {requested}; no fully-connected node has a partially-connected parent)");
    }
    out
}

fn run_csv(inst: &NetworkInstance, res: &SchemeResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["edge", "tail", "head", "uses", "symbols"]).expect("in-memory write");
    for (e, syms) in res.transcript.edges.iter().enumerate() {
        let (a, b) = inst.edges()[e];
        let vals: Vec<String> = syms.iter().map(|s| s.value.to_string()).collect();
        w.write_record([e.to_string(), inst.name(a).to_string(), inst.name(b).to_string(), syms.len().to_string(), vals.join(" ")])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn run(path: &Path, args: &SchemeArgs, seed: u64, csv_path: Option<PathBuf>) -> CommandOutcome {
    let inst = match load(path) {
        Ok(i) => i,
        Err(o) => return o,
    };
    let (kind, params) = match params_of(args) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let scheme = match compile(&inst, kind, params) {
        Ok(s) => s,
        Err(e) => return scheme_failure(String::new(), &e),
    };
    let mut out = header(&inst, scheme.kind, scheme.requested);
    let p = &scheme.params;
    let _ = writeln!(out, "params: d = {}, ell = {}, x = {}, z = {}, d_hat = {}, seed = {seed}", p.d, p.ell, p.x, p.z, p.d_hat);
    let res = match scheme.run(seed) {
        Ok(r) => r,
        Err(e) => return scheme_failure(out, &e),
    };
    for (i, key) in res.keys.iter().enumerate() {
        let vals: Vec<String> = key.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "key T{}: [{}]", i + 1, vals.join(", "));
    }
    let _ = writeln!(out, "edge uses:");
    for (e, uses) in res.transcript.edge_uses().iter().enumerate() {
        let (a, b) = inst.edges()[e];
        let _ = writeln!(out, "  e{e} {}->{}: {uses}", inst.name(a), inst.name(b));
    }
    if res.batches > 0 {
        let _ = writeln!(out, "masked batches: {}", res.batches);
    }
    for r in &res.eta_records {
        let _ = writeln!(out, "eta: {} via {} relays share of {}", inst.name(r.node), inst.name(r.via), inst.name(r.eta));
    }
    let _ = writeln!(
        out,
        "rate: achieved {}/{}, formula {} ({} vs {})",
        res.key_len,
        res.blocklength,
        res.formula,
        decimal(res.achieved),
        decimal(res.formula)
    );
    if let Some(plug) = scheme.plugin_formula {
        let _ = writeln!(out, "partial formula at z = 0: {plug} ({})", decimal(plug));
    }
    let mut outcome = CommandOutcome::ok(out);
    if let Some(path) = csv_path {
        if let Err(o) = write_csv(&path, &run_csv(&inst, &res)) {
            return o;
        }
        outcome.csv = Some(path);
    }
    if !res.formula_met {
        outcome.code = EXIT_VERDICT;
        outcome.stderr = format!("error: achieved rate {} is below the formula rate {}\n", res.achieved, res.formula);
    }
    outcome
}

fn budget_from(flag: Option<u128>) -> Result<u128, CommandOutcome> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CommandOutcome::fail(EXIT_USAGE, String::new(), format!("error: {BUDGET_ENV} = `{v}` is not a number\n"))
        }),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn audit(path: &Path, args: &SchemeArgs, budget: Option<u128>, csv_path: Option<PathBuf>) -> CommandOutcome {
    let inst = match load(path) {
        Ok(i) => i,
        Err(o) => return o,
    };
    let (kind, params) = match params_of(args) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let budget = match budget_from(budget) {
        Ok(b) => b,
        Err(o) => return o,
    };
    let scheme = match compile(&inst, kind, params) {
        Ok(s) => s,
        Err(e) => return scheme_failure(String::new(), &e),
    };
    let out = header(&inst, scheme.kind, scheme.requested);
    let opts = AuditOptions { budget, ..AuditOptions::default() };
    let report = match audit_scheme(&scheme, &opts) {
        Ok(r) => r,
        Err(SecurityError::Scheme(e)) => return scheme_failure(out, &e),
        Err(e @ SecurityError::BudgetExceeded { .. }) => {
            let note = monte_carlo_advisory(&scheme, MC_SAMPLES, 0, &opts);
            return CommandOutcome::fail(EXIT_INFEASIBLE, out + &note, format!("error: {e}\n"));
        }
        Err(e) => return CommandOutcome::fail(EXIT_INFEASIBLE, out, format!("error: {e}\n")),
    };
    let mut outcome = CommandOutcome::ok(out + &report.to_text());
    if let Some(path) = csv_path {
        if let Err(o) = write_csv(&path, &report.to_csv()) {
            return o;
        }
        outcome.csv = Some(path);
    }
    if !report.passed() {
        outcome.code = EXIT_VERDICT;
        outcome.stderr = "error: leak detected\n".into();
    }
    outcome
}

fn gen(a: &GenArgs) -> CommandOutcome {
    let built: Result<NetworkInstance, IoError> = if a.kind == "random" {
        generate_random(a.seed, a.nodes, a.d, a.frac)
    } else {
        match CanonicalKind::from_name(&a.kind) {
            Some(kind) => generate_canonical(
                kind,
                CanonicalParams { d: a.d, q: a.q, ell: a.ell, x: a.x, sources: a.sources, len: a.len, k: a.k },
            ),
            None => return CommandOutcome::fail(EXIT_USAGE, String::new(), format!("error: unknown kind `{}`\n", a.kind)),
        }
    };
    let inst = match built {
        Ok(i) => i,
        Err(e @ IoError::GenerationFailed { .. }) => return CommandOutcome::fail(EXIT_INFEASIBLE, String::new(), format!("error: {e}\n")),
        Err(e) => return CommandOutcome::fail(EXIT_USAGE, String::new(), format!("error: {e}\n")),
    };
    let text = emit_instance(&inst);
    match &a.out {
        Some(path) => match fs::write(path, &text) {
            Ok(()) => CommandOutcome::ok(format!("wrote {} ({})\n", path.display(), &fingerprint(&inst)[..16])),
            Err(e) => CommandOutcome::fail(EXIT_USAGE, String::new(), format!("{}: {e}\n", path.display())),
        },
        None => CommandOutcome::ok(text),
    }
}

/// `a..b` inclusive.
fn parse_range(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once("..")?;
    let (a, b) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (a <= b).then_some((a, b))
}

fn bench(family: &str, d_range: &str, ell_range: &str, q: u32, seed: u64, csv_path: Option<PathBuf>) -> CommandOutcome {
    if family != "fig2" {
        return CommandOutcome::fail(EXIT_USAGE, String::new(), format!("error: unknown family `{family}` (fig2)\n"));
    }
    let (Some((d0, d1)), Some((l0, l1))) = (parse_range(d_range), parse_range(ell_range)) else {
        return CommandOutcome::fail(EXIT_USAGE, String::new(), "error: ranges must look like a..b\n");
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["family", "d", "ell", "q", "key_len", "blocklength", "achieved", "formula", "formula_met"])
        .expect("in-memory write");
    let mut all_met = true;
    for d in d0.max(1)..=d1 {
        let inst = match generate_canonical(CanonicalKind::Fig2, CanonicalParams::d(d).q(q)) {
            Ok(i) => i,
            Err(e) => return CommandOutcome::fail(EXIT_USAGE, String::new(), format!("error: {e}\n")),
        };
        for ell in l0..=l1.min(d - 1) {
            let res = match compile(&inst, SchemeKind::Full, SchemeParams::default().with_ell(ell)).and_then(|s| s.run(seed)) {
                Ok(r) => r,
                Err(e) => return scheme_failure(String::new(), &e),
            };
            all_met &= res.formula_met;
            w.write_record([
                family.to_string(),
                d.to_string(),
                ell.to_string(),
                q.to_string(),
                res.key_len.to_string(),
                res.blocklength.to_string(),
                res.achieved.to_string(),
                res.formula.to_string(),
                res.formula_met.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
    let mut outcome = CommandOutcome::ok(body.clone());
    if let Some(path) = csv_path {
        if let Err(o) = write_csv(&path, &body) {
            return o;
        }
        outcome.csv = Some(path);
    }
    if !all_met {
        outcome.code = EXIT_VERDICT;
        outcome.stderr = "error: a row falls below its formula rate\n".into();
    }
    outcome
}
