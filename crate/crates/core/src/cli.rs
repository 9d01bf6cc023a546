//! Command-line front end.
//!
//! Every verb builds a [`Report`] whose json rendering is canonical: keys in
//! sorted order, floats at 12 significant digits, and no wall-clock data, so
//! identical invocations give byte-identical output at any thread count.
//! Timing is shown only in the table format and on stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::frobenius2d::{
    dg_check_duality, dg_loop_invariant, reduce_theory, surface_value, verlinde_ring, DgDualityFile,
    REDUCTION_MAX_GENUS,
};
use crate::modular::{verify_modular_axioms_with, NamedCheck};
use crate::numeric::{complex_json, real_json, Settings};
use crate::tqft3::{
    big_json, character_class_function, gluing_check, hilbert_dim, mapping_torus_partition, partition_function,
    wilson_expectation, ModularWord, SurfaceSpec, TheoryInstance, ThreeManifoldSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SCOPE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

const MAX_TOL: f64 = 1e-3;
/// Genera swept by `check`.
const CHECK_MAX_GENUS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    Modular,
    Hilbert,
    Partition,
    Fusion,
    Verlinde,
    Reduce2d,
    Wilson,
    Mt,
    Dgcheck,
    Check,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Parser, Debug)]
#[command(name = "dwtqft", version, about = "Finite-group Chern-Simons theory: modular data, partition functions, TQFT checks")]
struct RawArgs {
    verb: Verb,
    /// C<n>, D<n>, S<n> (n ≤ 5), Q8, products AxB, or a .json table file
    #[arg(long)]
    group: Option<String>,
    /// trivial, cyclic:<p>, or a .json cocycle file
    #[arg(long, default_value = "trivial")]
    cocycle: String,
    /// SigmaxS1:<g>, T3, L(<p>,<q>), MT:<word>, S3, pi1:<file>; join with + for disjoint unions
    #[arg(long, allow_hyphen_values = true)]
    manifold: Option<String>,
    #[arg(long)]
    genus: Option<usize>,
    /// Word in S, T, s, t (inverses), or `id`
    #[arg(long)]
    word: Option<String>,
    /// Comma-separated class-function values, one per conjugacy class; `a:b` is a+bi
    #[arg(long = "class-fn", allow_hyphen_values = true)]
    class_fn: Option<String>,
    /// Index of an irreducible character to use as the class function
    #[arg(long)]
    character: Option<usize>,
    /// Input file (dgcheck)
    #[arg(long)]
    file: Option<PathBuf>,
    /// Value substituted for the parameter `n` in dgcheck files
    #[arg(long = "n", allow_hyphen_values = true)]
    n: Option<i64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Absolute tolerance for matrix identities, in (0, 1e-3]
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClassFunction {
    Character(usize),
    Values(Vec<Complex64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Modular,
    Hilbert { genus: usize },
    Partition { manifold: ThreeManifoldSpec, spelled: String },
    Fusion,
    Verlinde { genus: Option<usize> },
    Reduce2d,
    Wilson { genus: usize, class_function: ClassFunction },
    Mt { word: ModularWord },
    Dgcheck { file: PathBuf, n: Option<i64> },
    Check,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Command {
    pub verb: Verb,
    pub task: Task,
    pub group: Option<String>,
    pub cocycle: String,
    pub format: Format,
    pub settings: Settings,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Command {
    /// The inputs that determine the result, for echoing in reports.
    pub fn echo(&self) -> Value {
        let mut m = Map::new();
        m.insert("verb".into(), json!(verb_name(self.verb)));
        if let Some(g) = &self.group {
            m.insert("group".into(), json!(g));
            m.insert("cocycle".into(), json!(self.cocycle));
        }
        match &self.task {
            Task::Hilbert { genus } => {
                m.insert("genus".into(), json!(genus));
            }
            Task::Verlinde { genus: Some(genus) } => {
                m.insert("genus".into(), json!(genus));
            }
            Task::Partition { spelled, .. } => {
                m.insert("manifold".into(), json!(spelled));
            }
            Task::Wilson { genus, class_function } => {
                m.insert("genus".into(), json!(genus));
                match class_function {
                    ClassFunction::Character(i) => m.insert("character".into(), json!(i)),
                    ClassFunction::Values(v) => {
                        m.insert("class_fn".into(), Value::Array(v.iter().map(|&z| complex_json(z)).collect()))
                    }
                };
            }
            Task::Mt { word } => {
                m.insert("word".into(), json!(word.to_string()));
            }
            Task::Dgcheck { file, n } => {
                m.insert("file".into(), json!(file.display().to_string()));
                if let Some(n) = n {
                    m.insert("n".into(), json!(n));
                }
            }
            _ => {}
        }
        m.insert("seed".into(), json!(self.settings.seed));
        m.insert("tol".into(), real_json(self.settings.matrix_tol));
        Value::Object(m)
    }
}

fn verb_name(v: Verb) -> &'static str {
    match v {
        Verb::Modular => "modular",
        Verb::Hilbert => "hilbert",
        Verb::Partition => "partition",
        Verb::Fusion => "fusion",
        Verb::Verlinde => "verlinde",
        Verb::Reduce2d => "reduce2d",
        Verb::Wilson => "wilson",
        Verb::Mt => "mt",
        Verb::Dgcheck => "dgcheck",
        Verb::Check => "check",
    }
}

/// Usage errors carry the offending flag.
#[derive(Debug)]
pub enum ArgError {
    Clap(clap::Error),
    Usage { flag: String, message: String },
}

impl std::fmt::Display for ArgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArgError::Clap(e) => write!(f, "{e}"),
            ArgError::Usage { flag, message } => write!(f, "error: {flag}: {message}"),
        }
    }
}

fn usage(flag: &str, message: impl Into<String>) -> ArgError {
    ArgError::Usage { flag: flag.into(), message: message.into() }
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<Command, ArgError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let raw = RawArgs::try_parse_from(argv).map_err(ArgError::Clap)?;
    let mut settings = Settings { seed: raw.seed, ..Settings::default() };
    if let Some(tol) = raw.tol {
        if !(tol > 0.0 && tol <= MAX_TOL) {
            return Err(usage("--tol", format!("tolerance must lie in (0, {MAX_TOL:e}], got {tol}")));
        }
        settings.matrix_tol = tol;
    }
    if raw.threads == Some(0) {
        return Err(usage("--threads", "worker count must be positive"));
    }
    let needs_group = raw.verb != Verb::Dgcheck;
    let group = match (&raw.group, needs_group) {
        (Some(g), true) => {
            // fail early on malformed names; files are read at execution
            if !g.trim().ends_with(".json") {
                crate::groups::build_named_group(g).map_err(|e| usage("--group", e.to_string()))?;
            }
            Some(g.clone())
        }
        (None, true) => return Err(usage("--group", format!("required by `{}`", verb_name(raw.verb)))),
        (_, false) => None,
    };
    let genus = |required: bool| -> std::result::Result<Option<usize>, ArgError> {
        match raw.genus {
            Some(g) => SurfaceSpec::new(g).map(|_| Some(g)).map_err(|e| usage("--genus", e.to_string())),
            None if required => Err(usage("--genus", format!("required by `{}`", verb_name(raw.verb)))),
            None => Ok(None),
        }
    };
    let task = match raw.verb {
        Verb::Modular => Task::Modular,
        Verb::Fusion => Task::Fusion,
        Verb::Reduce2d => Task::Reduce2d,
        Verb::Check => Task::Check,
        Verb::Hilbert => Task::Hilbert { genus: genus(true)?.unwrap_or(0) },
        Verb::Verlinde => Task::Verlinde { genus: genus(false)? },
        Verb::Partition => {
            let spelled = raw.manifold.clone().ok_or_else(|| usage("--manifold", "required by `partition`"))?;
            let manifold = ThreeManifoldSpec::parse(&spelled).map_err(|e| usage("--manifold", e.to_string()))?;
            Task::Partition { manifold, spelled }
        }
        Verb::Mt => {
            let w = raw.word.as_deref().ok_or_else(|| usage("--word", "required by `mt`"))?;
            Task::Mt { word: ModularWord::parse(w).map_err(|e| usage("--word", e.to_string()))? }
        }
        Verb::Wilson => {
            let genus = genus(true)?.unwrap_or(0);
            let class_function = match (&raw.character, &raw.class_fn) {
                (Some(i), None) => ClassFunction::Character(*i),
                (None, Some(v)) => ClassFunction::Values(parse_class_fn(v).map_err(|e| usage("--class-fn", e))?),
                (None, None) => ClassFunction::Character(0),
                (Some(_), Some(_)) => return Err(usage("--class-fn", "give either --character or --class-fn")),
            };
            Task::Wilson { genus, class_function }
        }
        Verb::Dgcheck => {
            let file = raw.file.clone().ok_or_else(|| usage("--file", "required by `dgcheck`"))?;
            if !file.is_file() {
                return Err(usage("--file", format!("no such file {}", file.display())));
            }
            Task::Dgcheck { file, n: raw.n }
        }
    };
    Ok(Command {
        verb: raw.verb,
        task,
        group,
        cocycle: raw.cocycle,
        format: raw.format,
        settings,
        threads: raw.threads,
        out: raw.out,
    })
}

fn parse_class_fn(s: &str) -> std::result::Result<Vec<Complex64>, String> {
    s.split(',')
        .map(|v| {
            let v = v.trim();
            let (re, im) = v.split_once(':').unwrap_or((v, "0"));
            match (re.trim().parse::<f64>(), im.trim().parse::<f64>()) {
                (Ok(re), Ok(im)) => Ok(Complex64::new(re, im)),
                _ => Err(format!("`{v}` is not a number (use re or re:im)")),
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: Value,
    pub result: Value,
    pub residuals: Vec<NamedCheck>,
    pub elapsed_ms: f64,
    pub exit_code: i32,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|c| c.passed)
    }

    fn status(&self) -> &'static str {
        match self.exit_code {
            EXIT_OK => "ok",
            EXIT_USAGE => "usage-error",
            EXIT_SCOPE => "scope-error",
            EXIT_NUMERICAL => "numerical-failure",
            EXIT_BUDGET => "budget-exceeded",
            _ => "error",
        }
    }

    /// The payload as canonical json (timing omitted).
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "result": self.result,
            "residuals": self.residuals.iter().map(NamedCheck::to_json).collect::<Vec<_>>(),
            "status": self.status(),
            "exit_code": self.exit_code,
        })
    }

    /// Flattened `(path, value)` entries of the result and residuals, one
    /// per scalar; `[re, im]` pairs count as one entry.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        flatten("result", &self.result, &mut out);
        for c in &self.residuals {
            out.push((format!("residual.{}", c.name), scalar_text(&real_json(c.residual))));
        }
        out
    }
}

fn is_complex_pair(v: &Value) -> bool {
    matches!(v, Value::Array(a) if a.len() == 2 && a.iter().all(|x| x.is_number() || x.is_null()))
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) if is_complex_pair(v) => {
            let re = a[0].as_f64().unwrap_or(f64::NAN);
            let im = a[1].as_f64().unwrap_or(f64::NAN);
            if im == 0.0 {
                a[0].to_string()
            } else {
                format!("{re}{}{}i", if im < 0.0 { "-" } else { "+" }, im.abs())
            }
        }
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&format!("{prefix}.{k}"), x, out)),
        Value::Array(a) if !is_complex_pair(v) => {
            a.iter().enumerate().for_each(|(i, x)| flatten(&format!("{prefix}[{i}]"), x, out))
        }
        _ => out.push((prefix.to_string(), scalar_text(v))),
    }
}

pub fn render_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&r.to_json()).unwrap_or_default();
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("key,value\n");
            for (k, v) in r.entries() {
                s.push_str(&csv_field(&k));
                s.push(',');
                s.push_str(&csv_field(&v));
                s.push('\n');
            }
            s
        }
        Format::Table => {
            let mut rows: Vec<(String, String)> = vec![("status".into(), r.status().into())];
            rows.extend(r.entries());
            for c in &r.residuals {
                rows.push((format!("check.{}", c.name), if c.passed { "pass".into() } else { "FAIL".into() }));
            }
            rows.push(("elapsed_ms".into(), format!("{:.1}", r.elapsed_ms)));
            let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
            rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::InvalidInput(_) | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
        Error::Scope(_) => EXIT_SCOPE,
        Error::Degenerate(_) | Error::Invariant(_) => EXIT_NUMERICAL,
        Error::Budget(_) | Error::UnsupportedSize(_) => EXIT_BUDGET,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) => "parse",
        Error::UnsupportedSize(_) => "unsupported-size",
        Error::InvalidInput(_) => "invalid-input",
        Error::Scope(_) => "scope",
        Error::Budget(_) => "budget",
        Error::Degenerate(_) => "degenerate",
        Error::Invariant(_) => "invariant",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

/// Runs the command on a pool of `--threads` workers (default: rayon's).
pub fn execute(c: &Command) -> Report {
    let start = Instant::now();
    let run = || compute(c);
    let outcome = match c.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(Error::InvalidInput(format!("cannot start {n} workers: {e}"))),
        },
        None => run(),
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok((result, residuals)) => {
            let exit_code = if residuals.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_NUMERICAL };
            Report { command: c.echo(), result, residuals, elapsed_ms, exit_code }
        }
        Err(e) => Report {
            command: c.echo(),
            result: json!({ "error": { "kind": error_kind(&e), "message": e.to_string() } }),
            residuals: Vec::new(),
            elapsed_ms,
            exit_code: exit_code_for(&e),
        },
    }
}

fn theory(c: &Command) -> Result<TheoryInstance> {
    let group = c.group.as_deref().ok_or_else(|| Error::InvalidInput("no group given".into()))?;
    TheoryInstance::from_specs(group, &c.cocycle, c.settings)
}

fn compute(c: &Command) -> Result<(Value, Vec<NamedCheck>)> {
    match &c.task {
        Task::Dgcheck { file, n } => {
            let text = std::fs::read_to_string(file)?;
            let (a, d) = DgDualityFile::parse(&text, *n)?;
            let report = dg_check_duality(&a, &d)?;
            let mut result = report.to_json();
            if report.passed() {
                result["loop_invariant"] = json!(dg_loop_invariant(&a, &d)?);
            }
            let residuals = report
                .checks
                .iter()
                .map(|k| NamedCheck::new(k.name, if k.passed() { 0.0 } else { 1.0 }, 0.0))
                .collect();
            Ok((result, residuals))
        }
        task => {
            let t = theory(c)?;
            compute_for_theory(&t, task)
        }
    }
}

fn compute_for_theory(t: &TheoryInstance, task: &Task) -> Result<(Value, Vec<NamedCheck>)> {
    let data = t.modular();
    let settings = t.settings();
    Ok(match task {
        Task::Modular => {
            let report = verify_modular_axioms_with(data, settings);
            (data.to_json(), report.checks)
        }
        Task::Fusion => {
            let n = data.rank();
            let table: Vec<Value> = (0..n)
                .map(|i| {
                    let row: Vec<Value> = (0..n)
                        .map(|j| {
                            let prod: Map<String, Value> =
                                data.fusion.product(i, j).into_iter().map(|(k, m)| (k.to_string(), json!(m))).collect();
                            Value::Object(prod)
                        })
                        .collect();
                    Value::Array(row)
                })
                .collect();
            let labels: Vec<String> = data.simples.iter().map(|a| a.label()).collect();
            (json!({ "labels": labels, "products": table, "duals": data.fusion.duals() }), Vec::new())
        }
        Task::Hilbert { genus } => {
            let report = gluing_check(t, *genus);
            let dim = hilbert_dim(t, SurfaceSpec::new(*genus)?)?;
            let rj = report.to_json();
            (json!({ "dimension": big_json(dim), "routes": rj["routes"], "skipped": rj["skipped"] }), report.checks)
        }
        Task::Partition { manifold, .. } => {
            let z = partition_function(t, manifold)?;
            (z.to_json(), Vec::new())
        }
        Task::Verlinde { genus } => {
            let ring = verlinde_ring(data)?;
            let genera: Vec<usize> = match genus {
                Some(g) => vec![*g],
                None => (0..=REDUCTION_MAX_GENUS).collect(),
            };
            let values: Map<String, Value> =
                genera.iter().map(|&g| (g.to_string(), complex_json(surface_value(&ring, g)))).collect();
            let checks = ring.checks(settings.matrix_tol);
            (json!({ "ring": ring.to_json(), "surface_values": values }), checks)
        }
        Task::Reduce2d => {
            let r = reduce_theory(t)?;
            let check = NamedCheck::new("integrality", r.max_deviation, settings.rounding_tol);
            (r.to_json(), vec![check])
        }
        Task::Wilson { genus, class_function } => {
            let values = match class_function {
                ClassFunction::Character(i) => character_class_function(t, *i)?,
                ClassFunction::Values(v) => v.clone(),
            };
            let w = wilson_expectation(t, *genus, &values)?;
            (json!({ "value": complex_json(w) }), Vec::new())
        }
        Task::Mt { word } => {
            let z = mapping_torus_partition(t, word);
            (json!({ "value": complex_json(z) }), Vec::new())
        }
        Task::Check => check_suite(t),
        Task::Dgcheck { .. } => unreachable!("handled without a theory"),
    })
}

/// The full invariant suite over one theory.
fn check_suite(t: &TheoryInstance) -> (Value, Vec<NamedCheck>) {
    let data = t.modular();
    let s = t.settings();
    let mut checks = Vec::new();
    let prefixed = |prefix: &str, list: Vec<NamedCheck>| -> Vec<NamedCheck> {
        list.into_iter().map(|c| NamedCheck { name: format!("{prefix}.{}", c.name), ..c }).collect()
    };
    let failed = |name: String, tol: f64| NamedCheck::new(&name, f64::INFINITY, tol);

    checks.extend(prefixed("modular", verify_modular_axioms_with(data, s).checks));

    let mut dims = Map::new();
    let mut skipped = Vec::new();
    for g in 0..=CHECK_MAX_GENUS {
        let report = gluing_check(t, g);
        skipped.extend(report.skipped.iter().map(|(route, why)| json!({ "genus": g, "route": route, "reason": why })));
        if let Ok(d) = hilbert_dim(t, SurfaceSpec::new(g).expect("small genus")) {
            dims.insert(g.to_string(), big_json(d));
        }
        checks.extend(prefixed(&format!("gluing.g{g}"), report.checks));
    }

    match verlinde_ring(data) {
        Ok(ring) => {
            checks.extend(prefixed("frobenius", ring.checks(s.matrix_tol)));
            for g in 0..=REDUCTION_MAX_GENUS {
                let name = format!("frobenius.surface_vs_hilbert.g{g}");
                match hilbert_dim(t, SurfaceSpec::new(g).expect("small genus")) {
                    Ok(h) => {
                        let z = surface_value(&ring, g);
                        checks.push(NamedCheck::new(&name, (z - h as f64).norm() / (h as f64).max(1.0), s.rounding_tol));
                    }
                    Err(_) => checks.push(failed(name, s.rounding_tol)),
                }
            }
        }
        Err(_) => checks.push(failed("frobenius.construction".into(), s.matrix_tol)),
    }
    match reduce_theory(t) {
        Ok(r) => checks.push(NamedCheck::new("reduce2d.integrality", r.max_deviation, s.rounding_tol)),
        Err(_) => checks.push(failed("reduce2d.integrality".into(), s.rounding_tol)),
    }

    let z = |x: ThreeManifoldSpec| partition_function(t, &x).map(|v| v.value);
    let order = t.group().order() as f64;
    for p in 2..=7u64 {
        let name = format!("lens.orientation.p{p}");
        match (z(ThreeManifoldSpec::Lens { p, q: 1 }), z(ThreeManifoldSpec::Lens { p, q: p - 1 })) {
            (Ok(a), Ok(b)) => checks.push(NamedCheck::new(&name, (a.conj() - b).norm(), s.matrix_tol)),
            _ => checks.push(failed(name, s.matrix_tol)),
        }
    }
    if t.is_untwisted() {
        let g = t.group();
        for p in 1..=12u64 {
            let name = format!("lens.torsion_count.p{p}");
            let expect = g.elements().filter(|&x| g.pow(x, p) == 0).count() as f64 / order;
            let spec = if p == 1 { ThreeManifoldSpec::sphere() } else { ThreeManifoldSpec::Lens { p, q: 1 } };
            match z(spec) {
                Ok(v) => checks.push(NamedCheck::new(&name, (v - expect).norm(), s.matrix_tol)),
                Err(_) => checks.push(failed(name, s.matrix_tol)),
            }
        }
    }
    match z(ThreeManifoldSpec::Torus3) {
        Ok(v) => checks.push(NamedCheck::new("torus3.simples", (v - data.rank() as f64).norm(), s.matrix_tol)),
        Err(_) => checks.push(failed("torus3.simples".into(), s.matrix_tol)),
    }
    let id = mapping_torus_partition(t, &ModularWord::identity());
    checks.push(NamedCheck::new("mt.identity_is_rank", (id - data.rank() as f64).norm(), s.matrix_tol));
    let fixed = data.conjugation.iter().enumerate().filter(|(i, j)| i == *j).count() as f64;
    let ss = mapping_torus_partition(t, &ModularWord::parse("SS").expect("static word"));
    checks.push(NamedCheck::new("mt.charge_conjugation_trace", (ss - fixed).norm(), s.matrix_tol));

    let passed = checks.iter().filter(|c| c.passed).count();
    let result = json!({
        "group": t.group().name(),
        "order": t.group().order(),
        "rank": data.rank(),
        "untwisted": t.is_untwisted(),
        "hilbert_dims": Value::Object(dims),
        "checks_total": checks.len(),
        "checks_passed": passed,
        "skipped_routes": skipped,
    });
    (result, checks)
}

/// Parses, executes, renders and writes; returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let command = match parse_args(argv) {
        Ok(c) => c,
        Err(ArgError::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(rendered.as_bytes()) } else { stderr.write_all(rendered.as_bytes()) };
            return code;
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            return EXIT_USAGE;
        }
    };
    let report = execute(&command);
    let text = render_report(&report, command.format);
    if report.exit_code != EXIT_OK {
        if let Some(msg) = report.result.pointer("/error/message").and_then(Value::as_str) {
            let _ = writeln!(stderr, "error: {msg}");
        } else {
            let failed: Vec<&str> = report.residuals.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            let _ = writeln!(stderr, "failed checks: {}", failed.join(", "));
        }
    }
    let _ = writeln!(stderr, "elapsed: {:.1} ms", report.elapsed_ms);
    let written = match &command.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => stdout.write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write report: {e}");
        return EXIT_USAGE;
    }
    report.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("dwtqft".to_string()).chain(s.split_whitespace().map(String::from)).collect()
    }

    #[test]
    fn parses_lens_command() {
        let c = parse_args(args("partition --group S3 --cocycle trivial --manifold L(5,1)")).unwrap();
        assert_eq!(c.verb, Verb::Partition);
        assert!(matches!(c.task, Task::Partition { manifold: ThreeManifoldSpec::Lens { p: 5, q: 1 }, .. }));
    }

    #[test]
    fn parses_twisted_modular() {
        let c = parse_args(args("modular --group C2 --cocycle cyclic:1 --format json")).unwrap();
        assert_eq!(c.cocycle, "cyclic:1");
        assert_eq!(c.format, Format::Json);
    }

    #[test]
    fn usage_errors_name_the_flag() {
        let flag = |s: &str| match parse_args(args(s)) {
            Err(ArgError::Usage { flag, .. }) => flag,
            other => panic!("{s}: {other:?}"),
        };
        assert_eq!(flag("modular --group C0"), "--group");
        assert_eq!(flag("hilbert --group C2"), "--genus");
        assert_eq!(flag("modular --group C2 --tol 0.5"), "--tol");
        assert_eq!(flag("partition --group C2 --manifold L(4,2)"), "--manifold");
        assert_eq!(flag("mt --group C2 --word SQ"), "--word");
        assert_eq!(flag("dgcheck --file /nonexistent.json"), "--file");
        assert!(matches!(parse_args(args("frobnicate --group C2")), Err(ArgError::Clap(_))));
    }

    #[test]
    fn hilbert_c2_genus_two() {
        let c = parse_args(args("hilbert --group C2 --cocycle trivial --genus 2")).unwrap();
        let r = execute(&c);
        assert_eq!(r.exit_code, EXIT_OK);
        assert_eq!(r.result["dimension"], json!(16));
    }

    #[test]
    fn scope_errors_exit_three() {
        let c = parse_args(args("wilson --group C2 --cocycle cyclic:1 --genus 1")).unwrap();
        assert_eq!(execute(&c).exit_code, EXIT_SCOPE);
        let c = parse_args(args("modular --group S3 --cocycle cyclic:1")).unwrap();
        let code = execute(&c).exit_code;
        assert!(code == EXIT_SCOPE || code == EXIT_USAGE, "{code}");
    }

    #[test]
    fn csv_has_one_row_per_entry() {
        let c = parse_args(args("reduce2d --group C2 --format csv")).unwrap();
        let r = execute(&c);
        let text = render_report(&r, Format::Csv);
        assert_eq!(text.lines().count(), r.entries().len() + 1);
    }

    #[test]
    fn json_round_trips() {
        let c = parse_args(args("modular --group S3")).unwrap();
        let r = execute(&c);
        let text = render_report(&r, Format::Json);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r.to_json());
    }

    #[test]
    fn table_lists_every_check() {
        let c = parse_args(args("check --group C2 --cocycle cyclic:1")).unwrap();
        let r = execute(&c);
        assert_eq!(r.exit_code, EXIT_OK, "{:?}", r.residuals.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        let text = render_report(&r, Format::Table);
        for check in &r.residuals {
            assert!(text.contains(&check.name), "{}", check.name);
        }
    }

    #[test]
    fn class_function_values() {
        assert_eq!(
            parse_class_fn("1, -1, 0.5:2").unwrap(),
            vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.5, 2.0)]
        );
        assert!(parse_class_fn("x").is_err());
    }
}
