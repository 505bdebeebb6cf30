//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or internal error, 2 usage error, 3 invalid
//! input, 4 infeasible size or empty grid, 5 failed verification. Errors are
//! reported on stderr as a single `error: kind=<kind> msg=<message>` line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::asymptotics::{
    congruence_bound, congruence_bound_extended, max_rt_congruence, max_rt_principal, principal_bound,
    principal_bound_extended, ring_of_integers_bound, ring_of_integers_bound_extended, search_congruence_with,
    search_principal_with, table1, xing_reference_constant, GridRow, PrimePower, SearchConfig, TABLE1_Y,
};
use crate::concat::{brute_density_check, ConcatenationSpec};
use crate::eisenstein::split_prime;
use crate::numeric::primes_up_to;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Double,
    Extended,
}

#[derive(Debug, Parser)]
#[command(
    name = "hexpack",
    version,
    about = "Eisenstein concatenation packings and density-exponent bounds"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Precision::Double, global = true)]
    pub precision: Precision,
    /// Worker threads for searches and enumerations.
    #[arg(long, env = "HEXPACK_THREADS", global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Splitting of rational primes in Z[ω].
    Primes {
        #[arg(long)]
        limit: u64,
    },
    /// Evaluate one density-exponent bound.
    #[command(subcommand)]
    Exponent(ExponentCmd),
    /// Grid search for the best bound of a family.
    Search(SearchArgs),
    /// Best lattice-only exponent over a grid of q.
    Baseline(BaselineArgs),
    /// Componential contributions at Q = 4, q = 11^94, y = 2.5e-10.
    Table1,
    /// Build a concatenation from a spec file.
    Construct {
        #[arg(long)]
        spec: PathBuf,
        /// Run the exhaustive distance and density checks.
        #[arg(long)]
        verify: bool,
        /// Half side of the density-count box.
        #[arg(long, default_value_t = 4)]
        window: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExponentCmd {
    Ring {
        #[arg(long = "Q")]
        q_norm: u64,
        #[arg(long)]
        ell: u32,
    },
    Principal {
        #[arg(long = "Q")]
        q_norm: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u32,
    },
    Congruence {
        #[arg(long = "Q")]
        q_norm: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u32,
        /// Decimal or fraction, e.g. 1/4000000000.
        #[arg(long)]
        y: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchFamily {
    Principal,
    Congruence,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(value_enum)]
    pub family: SearchFamily,
    /// TOML search configuration.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Use the built-in grid for the family.
    #[arg(long = "paper-grid")]
    pub preset: bool,
    /// Write every evaluated grid point to this CSV file.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(value_enum)]
    pub family: SearchFamily,
    #[arg(long, default_value_t = 100)]
    pub prime_limit: u64,
    #[arg(long, default_value_t = 250)]
    pub r_max: u32,
    #[arg(long, default_value = "1")]
    pub y: String,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Io(_) => (1, "io"),
            Error::NotPrime(_) | Error::InvalidArgument(_) | Error::DegenerateBasis => (3, "invalid_input"),
            Error::Parse { .. } => (3, "parse"),
            Error::InvalidSpec(_) => (3, "invalid_spec"),
            Error::CapExceeded { .. } | Error::Overflow(_) => (4, "infeasible"),
            Error::EmptyGrid => (4, "empty_grid"),
        };
        Failure {
            code,
            kind,
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args`, runs the command, writes to stdout and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = out.flush();
            eprintln!("error: kind={} msg={}", f.kind, f.msg.replace('\n', " "));
            f.code
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be at least 1").into());
        }
        // A second initialisation (repeated in-process runs) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let extended = cli.precision == Precision::Extended;
    let fmt = cli.format;
    match &cli.command {
        Command::Primes { limit } => {
            let mut rows = Vec::new();
            for p in primes_up_to(*limit) {
                let info = split_prime(p)?;
                rows.push(serde_json::json!({
                    "p": p,
                    "kind": info.kind.to_string(),
                    "Q": info.q,
                    "t": info.t.to_string(),
                }));
            }
            emit_rows(out, fmt, &rows)
        }
        Command::Exponent(cmd) => {
            let value = match (cmd, extended) {
                (ExponentCmd::Ring { q_norm, ell }, false) => to_value(&ring_of_integers_bound(*q_norm, *ell)?),
                (ExponentCmd::Ring { q_norm, ell }, true) => to_value(&ring_of_integers_bound_extended(*q_norm, *ell)?),
                (ExponentCmd::Principal { q_norm, p, r }, false) => {
                    to_value(&principal_bound(*q_norm, &PrimePower::new(*p, *r)?)?)
                }
                (ExponentCmd::Principal { q_norm, p, r }, true) => {
                    to_value(&principal_bound_extended(*q_norm, *p, *r)?)
                }
                (ExponentCmd::Congruence { q_norm, p, r, y }, false) => {
                    to_value(&congruence_bound(*q_norm, &PrimePower::new(*p, *r)?, parse_y(y)?)?)
                }
                (ExponentCmd::Congruence { q_norm, p, r, y }, true) => {
                    to_value(&congruence_bound_extended(*q_norm, *p, *r, y)?)
                }
            };
            emit_record(out, fmt, value)
        }
        Command::Search(args) => {
            warn_double_only(extended, "search");
            run_search(args, fmt, out)
        }
        Command::Baseline(args) => {
            warn_double_only(extended, "baseline");
            let range = [2, args.r_max];
            let report = match args.family {
                SearchFamily::Principal => max_rt_principal(args.prime_limit, range)?,
                SearchFamily::Congruence => max_rt_congruence(args.prime_limit, range, parse_y(&args.y)?)?,
            };
            emit_record(out, fmt, to_value(&report))
        }
        Command::Table1 => {
            let (principal, congruence) = if extended {
                (
                    to_value(&principal_bound_extended(4, 11, 94)?),
                    to_value(&congruence_bound_extended(4, 11, 94, "1/4000000000")?),
                )
            } else {
                let t = table1()?;
                (to_value(&t.principal), to_value(&t.congruence))
            };
            debug_assert_eq!(TABLE1_Y, 2.5e-10);
            if fmt == Format::Text {
                let (principal, congruence) = (rounded(principal), rounded(congruence));
                write_table1(out, &principal, &congruence)?;
                return Ok(());
            }
            let mut m = Map::new();
            m.insert("principal".into(), principal);
            m.insert("congruence".into(), congruence);
            m.insert("xing_reference".into(), Value::from(xing_reference_constant()));
            emit_record(out, fmt, Value::Object(m))
        }
        Command::Construct { spec, verify, window } => {
            warn_double_only(extended, "construct");
            run_construct(spec, *verify, *window, fmt, out)
        }
    }
}

fn warn_double_only(extended: bool, what: &str) {
    if extended {
        log::warn!("{what} always runs in double precision");
    }
}

/// `y` as a decimal or an exact fraction `a/b`.
pub fn parse_y(text: &str) -> CliResult<f64> {
    let bad = || Failure::from(Error::invalid(format!("cannot parse y = {text:?}")));
    let y = match text.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            n / d
        }
        None => text.trim().parse().map_err(|_| bad())?,
    };
    if !y.is_finite() {
        return Err(bad());
    }
    Ok(y)
}

fn run_search(args: &SearchArgs, fmt: Format, out: &mut dyn Write) -> CliResult<()> {
    let cfg = match (&args.config, args.family) {
        (Some(path), _) => SearchConfig::from_toml(&std::fs::read_to_string(path)?)?,
        (None, SearchFamily::Principal) => SearchConfig::reference_principal(),
        (None, SearchFamily::Congruence) => SearchConfig::reference_congruence(),
    };
    let mut dump = match &args.dump {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            writeln!(w, "Q,p,r,y,ell,lambda_lower")?;
            Some(w)
        }
        None => None,
    };
    let mut io_error: Option<std::io::Error> = None;
    let mut write_row = |row: &GridRow| {
        if let (Some(w), None) = (dump.as_mut(), io_error.as_ref()) {
            let y = row.y.map(|y| format!("{y:e}")).unwrap_or_default();
            if let Err(e) = writeln!(
                w,
                "{},{},{},{},{},{}",
                row.q_norm,
                row.p,
                row.r,
                y,
                row.ell,
                sig15(row.lambda_lower)
            ) {
                io_error = Some(e);
            }
        }
    };
    let sink: Option<&mut dyn FnMut(&GridRow)> = if args.dump.is_some() {
        Some(&mut write_row)
    } else {
        None
    };
    let result = match args.family {
        SearchFamily::Principal => search_principal_with(&cfg, sink)?,
        SearchFamily::Congruence => search_congruence_with(&cfg, sink)?,
    };
    if let Some(e) = io_error {
        return Err(e.into());
    }
    if let Some(mut w) = dump {
        w.flush()?;
    }
    match fmt {
        Format::Csv => emit_record(out, fmt, to_value(&result.best)),
        _ => emit_record(out, fmt, to_value(&result)),
    }
}

fn run_construct(path: &Path, verify: bool, window: u32, fmt: Format, out: &mut dyn Write) -> CliResult<()> {
    let spec = ConcatenationSpec::from_file(path)?;
    let violations = spec.validate()?;
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidSpec(msgs.join("; ")).into());
    }
    let built = spec.build()?;
    if !verify {
        let value = serde_json::json!({
            "n": built.n(),
            "Q": built.q,
            "ell": built.levels,
            "M_list": built.code_sizes,
            "d_E2_required": built.required_d2(),
            "det_per_point": built.det_per_point(),
            "lambda_lower": built.lambda_lower,
        });
        return emit_record(out, fmt, value);
    }
    let report = built.verify()?;
    let density = brute_density_check(&built.packing, window);
    let ok = report.d2_measured >= report.d2_required
        && report.distinct_cosets
        && report.lambda_measured >= report.lambda_lower - 1e-9;
    let mut value = to_value(&report);
    if let Value::Object(m) = &mut value {
        m.insert("window".into(), Value::from(density.window));
        m.insert("window_count".into(), Value::from(density.count));
        m.insert("density_measured".into(), Value::from(density.measured));
        m.insert("density_expected".into(), Value::from(density.expected));
        m.insert("verified".into(), Value::from(ok));
    }
    emit_record(out, fmt, value)?;
    if !ok {
        return Err(Failure {
            code: 5,
            kind: "verification_failed",
            msg: format!(
                "measured d_E^2 {} vs required {}, distinct cosets {}, lambda {} vs lower {}",
                report.d2_measured,
                report.d2_required,
                report.distinct_cosets,
                report.lambda_measured,
                report.lambda_lower
            ),
        });
    }
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Rounds to 15 significant digits.
pub fn sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::from(sig15(n.as_f64().unwrap_or(0.0))),
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Array(a) => a.iter().map(scalar_text).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn emit_record(out: &mut dyn Write, fmt: Format, value: Value) -> CliResult<()> {
    let value = rounded(value);
    match fmt {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"))?,
        Format::Csv => {
            // Nested objects become one row each, keyed by their field name.
            let Value::Object(m) = &value else {
                writeln!(out, "{}", scalar_text(&value))?;
                return Ok(());
            };
            let nested: Vec<(&String, &Map<String, Value>)> =
                m.iter().filter_map(|(k, v)| v.as_object().map(|o| (k, o))).collect();
            if nested.is_empty() {
                write_csv(out, std::slice::from_ref(m))?;
            } else {
                let rows: Vec<Map<String, Value>> = nested
                    .into_iter()
                    .map(|(k, o)| {
                        let mut row = Map::new();
                        row.insert("entry".into(), Value::from(k.clone()));
                        row.extend(
                            o.iter()
                                .filter(|(_, v)| !v.is_object())
                                .map(|(k, v)| (k.clone(), v.clone())),
                        );
                        row
                    })
                    .collect();
                write_csv(out, &rows)?;
            }
        }
        Format::Text => write_text(out, &value, 0)?,
    }
    Ok(())
}

fn emit_rows(out: &mut dyn Write, fmt: Format, rows: &[Value]) -> CliResult<()> {
    let rows: Vec<Value> = rows.iter().cloned().map(rounded).collect();
    match fmt {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("json"))?,
        Format::Csv | Format::Text => {
            let maps: Vec<Map<String, Value>> = rows.iter().filter_map(|r| r.as_object().cloned()).collect();
            if fmt == Format::Csv {
                write_csv(out, &maps)?;
            } else {
                let Some(first) = maps.first() else { return Ok(()) };
                let keys: Vec<&String> = first.keys().collect();
                let cells: Vec<Vec<String>> = maps
                    .iter()
                    .map(|m| keys.iter().map(|k| scalar_text(&m[*k])).collect())
                    .collect();
                let widths: Vec<usize> = keys
                    .iter()
                    .enumerate()
                    .map(|(i, k)| {
                        cells
                            .iter()
                            .map(|c| c[i].chars().count())
                            .max()
                            .unwrap_or(0)
                            .max(k.len())
                    })
                    .collect();
                let line = |items: Vec<String>| {
                    items
                        .iter()
                        .zip(&widths)
                        .map(|(s, w)| format!("{s:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                writeln!(out, "{}", line(keys.iter().map(|k| k.to_string()).collect()))?;
                for c in cells {
                    writeln!(out, "{}", line(c))?;
                }
            }
        }
    }
    Ok(())
}

fn write_csv(out: &mut dyn Write, rows: &[Map<String, Value>]) -> std::io::Result<()> {
    let mut keys: Vec<String> = Vec::new();
    for r in rows {
        for k in r.keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    writeln!(out, "{}", keys.join(","))?;
    for r in rows {
        let cells: Vec<String> = keys
            .iter()
            .map(|k| {
                let s = r.get(k).map(scalar_text).unwrap_or_default();
                if s.contains(',') {
                    format!("\"{s}\"")
                } else {
                    s
                }
            })
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

fn write_text(out: &mut dyn Write, value: &Value, indent: usize) -> std::io::Result<()> {
    let pad = " ".repeat(indent);
    match value {
        Value::Object(m) => {
            for (k, v) in m {
                if v.is_object() {
                    writeln!(out, "{pad}{k}:")?;
                    write_text(out, v, indent + 2)?;
                } else if let Value::Array(a) = v {
                    if a.iter().any(Value::is_object) {
                        writeln!(out, "{pad}{k}:")?;
                        for item in a {
                            write_text(out, item, indent + 2)?;
                            writeln!(out)?;
                        }
                    } else {
                        writeln!(out, "{pad}{k}: {}", scalar_text(v))?;
                    }
                } else {
                    writeln!(out, "{pad}{k}: {}", scalar_text(v))?;
                }
            }
        }
        other => writeln!(out, "{pad}{}", scalar_text(other))?,
    }
    Ok(())
}

fn write_table1(out: &mut dyn Write, principal: &Value, congruence: &Value) -> std::io::Result<()> {
    let cell = |v: &Value, key: &str| scalar_text(&v[key]);
    let rows = [
        (
            "Lattice",
            format!("c = {}", cell(principal, "c")),
            format!("c = {}", cell(congruence, "c")),
        ),
        ("", cell(principal, "lattice_term"), cell(congruence, "lattice_term")),
        (
            "Codes",
            format!("ell = {}", cell(principal, "ell")),
            format!("ell = {}", cell(congruence, "ell")),
        ),
        ("", cell(principal, "codes_term"), cell(congruence, "codes_term")),
        (
            "lambda >=",
            cell(principal, "lambda_lower"),
            cell(congruence, "lambda_lower"),
        ),
    ];
    let w1 = rows
        .iter()
        .map(|r| r.1.len())
        .max()
        .unwrap_or(0)
        .max("Principal lattices".len());
    let w2 = rows
        .iter()
        .map(|r| r.2.len())
        .max()
        .unwrap_or(0)
        .max("Congruence lattices".len());
    let header = format!(
        "{:<10}  {:<w1$}  {:<w2$}",
        "", "Principal lattices", "Congruence lattices"
    );
    writeln!(out, "{}", header.trim_end())?;
    for (label, a, b) in rows {
        writeln!(out, "{}", format!("{label:<10}  {a:<w1$}  {b:<w2$}").trim_end())?;
    }
    Ok(())
}
