//! `covolume` — exact covolumes of special unitary groups of Hermitian
//! lattices over imaginary quadratic rings, and the downstream non-freeness
//! and reflective-form machinery built on them.
//!
//! Every report is emitted as deterministic JSON (keys sorted, no floats);
//! exact values are rendered as `num/den` strings, decimal mirrors as
//! truncated decimal strings honoring `--precision`.  Exit codes:
//!
//! | code | meaning                                                    |
//! |------|------------------------------------------------------------|
//! | 0    | success                                                    |
//! | 2    | parse error (malformed input file, bad slope, CLI usage)   |
//! | 3    | invariant violation (bad discriminant, degenerate Gram, …) |
//! | 4    | internal assertion failure                                 |
//! | 5    | undecided comparison at maximal precision                  |

use clap::{Parser, Subcommand, ValueEnum};
use exact_arith::{is_valid_odd_disc, rational_to_decimal_trunc, Rational};
use hermitian::{HermitianLattice, LatticeError};
use local_profile::{LocalValue, PlaceType, QuadraticValue};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::{Read, Write as _};
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

const SCHEMA_VERSION: u64 = 1;

const EXIT_PARSE: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;
const EXIT_UNDECIDED: u8 = 5;

#[derive(Parser)]
#[command(
    name = "covolume",
    version,
    about = "Exact SU(L) covolumes and non-freeness certificates for Hermitian lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Decimal digits carried by numeric mirrors of exact values (≥ 15).
    #[arg(long, global = true, default_value_t = 30)]
    precision: u32,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    /// Append-only JSON-lines result cache.  The `COVOLUME_CACHE`
    /// environment variable overrides this path.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Worker threads for the scan commands (≥ 1; default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact covolume of SU(L) for a lattice read from a JSON file.
    Volume {
        /// Lattice file (`-` reads standard input).
        #[arg(long)]
        input: String,
    },
    /// Non-freeness criterion for the graded algebra of modular forms on L.
    Criterion {
        /// Lattice file (`-` reads standard input).
        #[arg(long)]
        input: String,
    },
    /// Scan the unimodular criterion over n ∈ [3, n-max] and locate the
    /// stable threshold.
    Scan {
        #[arg(long = "D")]
        d: u64,
        #[arg(long)]
        n_max: u64,
    },
    /// Decide whether a reflective modular form of the given slope can
    /// exist in signature (1, n) over discriminant −D.
    Reflective {
        #[arg(long)]
        n: u64,
        #[arg(long = "D")]
        d: u64,
        /// Positive rational, e.g. `1/102`.
        #[arg(long)]
        slope: String,
    },
    /// Enumerate every grid cell (n, D, N) on which the generic
    /// non-freeness criterion fails.
    Exceptions {
        #[arg(long, default_value_t = 3)]
        n_min: u64,
        #[arg(long = "D-max")]
        d_max: u64,
        #[arg(long = "N-max")]
        n_max_of_l: u64,
    },
    /// The cubic-threefold worked example (D = 3, ramified place p = 3).
    Cubic,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// A failed run, carrying its process exit code.
enum Failure {
    /// Malformed input that never became a value: exit 2.
    Parse(String),
    /// Well-formed input violating a documented invariant: exit 3.
    Invariant(String),
    /// A certified comparison stayed undecided at maximal precision: exit 5.
    Undecided(String),
    /// A bug surfaced by an internal assertion: exit 4.
    Internal(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Invariant(_) => EXIT_INVARIANT,
            Failure::Undecided(_) => EXIT_UNDECIDED,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m)
            | Failure::Invariant(m)
            | Failure::Undecided(m)
            | Failure::Internal(m) => m,
        }
    }
}

impl From<LatticeError> for Failure {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Parse(_) => Failure::Parse(e.to_string()),
            _ => Failure::Invariant(e.to_string()),
        }
    }
}

impl From<covolume::CovolumeError> for Failure {
    fn from(e: covolume::CovolumeError) -> Self {
        match e {
            covolume::CovolumeError::NotSignature1N { .. } => Failure::Invariant(e.to_string()),
            covolume::CovolumeError::Lattice(le) => le.into(),
            // Rationality violations and local-factor errors on an accepted
            // lattice are bugs, not input problems.
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<freeness::FreenessError> for Failure {
    fn from(e: freeness::FreenessError) -> Self {
        match e {
            freeness::FreenessError::NotSignature1N { .. } => Failure::Invariant(e.to_string()),
            freeness::FreenessError::Undecided(_) => Failure::Undecided(e.to_string()),
            freeness::FreenessError::Lattice(le) => le.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.precision < 15 {
        eprintln!(
            "INVARIANT_VIOLATION: --precision must be at least 15, got {}",
            cli.precision
        );
        return ExitCode::from(EXIT_INVARIANT);
    }
    if let Some(jobs) = cli.jobs {
        if jobs < 1 {
            eprintln!("INVARIANT_VIOLATION: --jobs must be at least 1");
            return ExitCode::from(EXIT_INVARIANT);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("INTERNAL_ASSERTION: cannot build thread pool: {e}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    }

    // Read any input file up front so the cache key covers its content.
    let input_content = match read_command_input(&cli.command) {
        Ok(c) => c,
        Err(f) => {
            eprintln!("{}", f.message());
            return ExitCode::from(f.exit_code());
        }
    };

    let cache_file = cache_path(&cli);
    let key = cache_key(&cli, input_content.as_deref());
    if let Some(path) = &cache_file {
        if let Some(report) = cache_lookup(path, &key) {
            print!("{}", render(&report, cli.format));
            return ExitCode::SUCCESS;
        }
    }

    // A panic anywhere below is a broken internal assertion: report it on
    // stderr and exit 4 instead of aborting with a backtrace.
    let prev_hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
        run(&cli.command, input_content.as_deref(), cli.precision)
    }));
    panic::set_hook(prev_hook);

    match outcome {
        Ok(Ok(report)) => {
            if let Some(path) = &cache_file {
                if let Err(e) = cache_store(path, &key, &report) {
                    eprintln!("warning: cannot write cache {}: {e}", path.display());
                }
            }
            print!("{}", render(&report, cli.format));
            ExitCode::SUCCESS
        }
        Ok(Err(f)) => {
            eprintln!("{}", f.message());
            ExitCode::from(f.exit_code())
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unidentified panic payload".to_string());
            eprintln!("INTERNAL_ASSERTION: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

// ---------------------------------------------------------------------------
// Command dispatch.
// ---------------------------------------------------------------------------

fn read_command_input(cmd: &Cmd) -> Result<Option<String>, Failure> {
    let path = match cmd {
        Cmd::Volume { input } | Cmd::Criterion { input } => input,
        _ => return Ok(None),
    };
    let content = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::Parse(format!("PARSE_ERROR: cannot read stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::Parse(format!("PARSE_ERROR: cannot read {path}: {e}")))?
    };
    Ok(Some(content))
}

fn run(cmd: &Cmd, input: Option<&str>, precision: u32) -> Result<Value, Failure> {
    match cmd {
        Cmd::Volume { .. } => cmd_volume(input.expect("volume input was read"), precision),
        Cmd::Criterion { .. } => cmd_criterion(input.expect("criterion input was read"), precision),
        Cmd::Scan { d, n_max } => cmd_scan(*d, *n_max),
        Cmd::Reflective { n, d, slope } => cmd_reflective(*n, *d, slope, precision),
        Cmd::Exceptions {
            n_min,
            d_max,
            n_max_of_l,
        } => cmd_exceptions(*n_min, *d_max, *n_max_of_l),
        Cmd::Cubic => cmd_cubic(precision),
    }
}

fn cmd_volume(input: &str, precision: u32) -> Result<Value, Failure> {
    let lattice = hermitian::parse_lattice(input)?;
    let (pos, neg) = hermitian::signature(&lattice)?;
    let result = covolume::su_covolume(&lattice)?;
    let exact = result
        .exact
        .as_rational()
        .expect("su_covolume output is rational by construction");
    let local: Map<String, Value> = result
        .local_factors
        .iter()
        .map(|(p, v)| (p.to_string(), Value::from(local_value_str(v))))
        .collect();
    let trace: Vec<Value> = result
        .formula_trace
        .iter()
        .map(|t| json!({ "name": t.name, "value": t.value.to_string() }))
        .collect();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "volume",
        "input": input_echo(&lattice, input),
        "signature": [pos, neg],
        "center_order": result.center_order,
        "exact": rational_json(&exact),
        "numeric": rational_to_decimal_trunc(&exact, precision),
        "local_factors": local,
        "formula_trace": trace,
    }))
}

fn cmd_criterion(input: &str, precision: u32) -> Result<Value, Failure> {
    let lattice = hermitian::parse_lattice(input)?;
    let report = freeness::nonfree_criterion(&lattice)?;
    let phi_table: Vec<Value> = report
        .phi_table
        .iter()
        .map(|(p, place, n_v, phi)| {
            json!({
                "p": p,
                "place": place_str(*place),
                "N_v": n_v,
                "phi_sum": quadratic_str(phi),
            })
        })
        .collect();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "criterion",
        "input": input_echo(&lattice, input),
        "n": report.n,
        "D": report.d,
        "N_of_L": bigint_json(&report.n_of_l),
        "epsilon": rational_json(&report.epsilon),
        "bound_value": report.bound_value.to_string(),
        "bound_numeric": report.bound_value.numeric(precision),
        "threshold": rational_json(&report.threshold),
        "verdict": report.verdict.to_string(),
        "phi_table": phi_table,
    }))
}

fn cmd_scan(d: u64, n_max: u64) -> Result<Value, Failure> {
    if !is_valid_odd_disc(d) {
        return Err(Failure::Invariant(format!(
            "INVARIANT_VIOLATION: {d} is not a valid odd discriminant (squarefree, ≡ 3 mod 4)"
        )));
    }
    if n_max < 10 {
        return Err(Failure::Invariant(format!(
            "INVARIANT_VIOLATION: --n-max must be at least 10, got {n_max}"
        )));
    }
    let report = freeness::threshold_scan(d, n_max)?;
    let below: Vec<Value> = report
        .below
        .iter()
        .map(|(n, b)| json!([n, b]))
        .collect();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "scan",
        "D": report.d,
        "n_max": report.n_max,
        "threshold_n": report.threshold_n,
        "monotone_tail_verified": report.monotone_tail_verified,
        "below": below,
    }))
}

fn cmd_reflective(n: u64, d: u64, slope: &str, precision: u32) -> Result<Value, Failure> {
    let slope_rat = parse_slope(slope)?;
    if n <= 2 {
        return Err(Failure::Invariant(format!(
            "INVARIANT_VIOLATION: --n must exceed 2 (signature (1, n)), got {n}"
        )));
    }
    if !is_valid_odd_disc(d) {
        return Err(Failure::Invariant(format!(
            "INVARIANT_VIOLATION: {d} is not a valid odd discriminant (squarefree, ≡ 3 mod 4)"
        )));
    }
    let report = freeness::reflective_check(n, d, &slope_rat)?;
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "reflective",
        "n": report.n,
        "D": report.d,
        "slope": rational_json(&report.slope_queried),
        "g_value": report.g_value.to_string(),
        "g_numeric": report.g_value.numeric(precision),
        "verdict": report.verdict.to_string(),
        "excludes_fano_slope": report.excludes_fano_slope,
    }))
}

fn cmd_exceptions(n_min: u64, d_max: u64, n_max_of_l: u64) -> Result<Value, Failure> {
    if n_min < 3 {
        return Err(Failure::Invariant(format!(
            "INVARIANT_VIOLATION: --n-min must be at least 3, got {n_min}"
        )));
    }
    if n_max_of_l < 1 {
        return Err(Failure::Invariant(
            "INVARIANT_VIOLATION: --N-max must be at least 1".to_string(),
        ));
    }
    let triples = freeness::exception_search(n_min, d_max, n_max_of_l)?;
    let rows: Vec<Value> = triples
        .iter()
        .map(|t| json!({ "n": t.n, "D": t.d, "N": t.n_of_l }))
        .collect();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "exceptions",
        "n_min": n_min,
        "D_max": d_max,
        "N_max": n_max_of_l,
        "count": rows.len(),
        "exceptions": rows,
    }))
}

fn cmd_cubic(precision: u32) -> Result<Value, Failure> {
    let r = freeness::cubic_example();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "cubic",
        "p": r.p,
        "profiles": {
            "cubic": profile_json(&r.profile_cub),
            "corank_one": profile_json(&r.profile_n),
            "hyperplane": profile_json(&r.profile_h),
        },
        "lambda": {
            "cubic": variants_json(&r.lambda_cub),
            "corank_one": variants_json(&r.lambda_n),
            "hyperplane": variants_json(&r.lambda_h),
        },
        "lambda_m": {
            "cubic": rationals_json(&r.lambda_m_cub),
            "corank_one": rationals_json(&r.lambda_m_corank_one),
        },
        "ratio_corank_one": rationals_json(&r.ratio_n),
        "ratio_hyperplane": rationals_json(&r.ratio_h),
        "ratios_at_most_one": r.ratios_at_most_one,
        "mismatch": r.mismatch,
        "weight_split": rational_json(&r.weight_split),
        "weight_nonsplit": rational_json(&r.weight_nonsplit),
        "lhs": rational_json(&r.lhs),
        "lhs_numeric": rational_to_decimal_trunc(&r.lhs, precision),
        "rhs": rational_json(&r.rhs),
        "margin": rational_json(&r.margin),
        "final_inequality_holds": r.final_inequality_holds,
        "verdict": r.verdict.to_string(),
    }))
}

// ---------------------------------------------------------------------------
// Value rendering.
// ---------------------------------------------------------------------------

/// Rationals with denominator 1 that fit in `i64` become JSON integers;
/// everything else is a `num/den` string.  No floats ever enter a report.
fn rational_json(r: &Rational) -> Value {
    if r.is_integer() {
        if let Some(i) = r.numer().to_i64() {
            return Value::from(i);
        }
    }
    Value::from(r.to_string())
}

fn bigint_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(i) => Value::from(i),
        None => Value::from(n.to_string()),
    }
}

fn rationals_json(rs: &[Rational]) -> Vec<Value> {
    rs.iter().map(rational_json).collect()
}

fn profile_json(blocks: &[(u64, usize)]) -> Vec<Value> {
    blocks.iter().map(|(s, r)| json!([s, r])).collect()
}

fn variants_json(vs: &freeness::LambdaVariants) -> Vec<Value> {
    vs.iter()
        .map(|(assignment, value)| {
            let classes: Vec<Value> = assignment.iter().map(|(s, c)| json!([s, c])).collect();
            json!({ "classes": classes, "value": rational_json(value) })
        })
        .collect()
}

fn place_str(place: PlaceType) -> &'static str {
    match place {
        PlaceType::Inert => "inert",
        PlaceType::Split => "split",
        PlaceType::Ramified => "ramified",
    }
}

fn local_value_str(v: &LocalValue) -> String {
    match v.as_rational() {
        Some(r) => r.to_string(),
        None => format!("({})·{}^({}/2)", v.coeff, v.q, v.half_q_exp),
    }
}

fn quadratic_str(v: &QuadraticValue) -> String {
    if v.irr.is_zero() {
        v.rat.to_string()
    } else if v.rat.is_zero() {
        format!("({})·√{}", v.irr, v.q)
    } else {
        format!("{} + ({})·√{}", v.rat, v.irr, v.q)
    }
}

/// Echo of the parsed lattice (not the raw bytes, which may differ in
/// whitespace) plus a digest of the bytes actually read.
fn input_echo(lattice: &HermitianLattice, raw: &str) -> Value {
    let parsed: Value =
        serde_json::from_str(&lattice.to_json()).expect("lattice JSON round-trips");
    json!({ "lattice": parsed, "sha256": sha256_hex(raw.as_bytes()) })
}

fn parse_slope(s: &str) -> Result<Rational, Failure> {
    let r = Rational::from_str(s.trim())
        .map_err(|e| Failure::Parse(format!("PARSE_ERROR: bad slope {s:?}: {e}")))?;
    if !r.is_positive() {
        return Err(Failure::Invariant(format!(
            "INVARIANT_VIOLATION: slope must be positive, got {r}"
        )));
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Output formats.
// ---------------------------------------------------------------------------

fn render(report: &Value, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut out = String::from("field,value\n");
            for (k, v) in report.as_object().expect("reports are objects") {
                let _ = writeln!(out, "{},{}", csv_cell(k), csv_cell(&scalar_str(v)));
            }
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            for (k, v) in report.as_object().expect("reports are objects") {
                let _ = writeln!(out, "{k}: {}", scalar_str(v));
            }
            out
        }
    }
}

fn scalar_str(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "null".to_string(),
        other => serde_json::to_string(other).expect("values serialize"),
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

// ---------------------------------------------------------------------------
// Result cache: append-only JSON lines, single writer.  Each line holds
// `{"key": <sha256 hex>, "report": <value>}`; the key covers the code
// version, the command, every semantic parameter, and the input bytes, so
// a hit reproduces the fresh output byte for byte.
// ---------------------------------------------------------------------------

fn cache_path(cli: &Cli) -> Option<PathBuf> {
    std::env::var_os("COVOLUME_CACHE")
        .map(PathBuf::from)
        .or_else(|| cli.cache.clone())
}

fn cache_key(cli: &Cli, input: Option<&str>) -> String {
    let (name, params) = match &cli.command {
        Cmd::Volume { .. } => ("volume", json!({})),
        Cmd::Criterion { .. } => ("criterion", json!({})),
        Cmd::Scan { d, n_max } => ("scan", json!({ "D": d, "n_max": n_max })),
        Cmd::Reflective { n, d, slope } => {
            ("reflective", json!({ "D": d, "n": n, "slope": slope }))
        }
        Cmd::Exceptions {
            n_min,
            d_max,
            n_max_of_l,
        } => (
            "exceptions",
            json!({ "D_max": d_max, "N_max": n_max_of_l, "n_min": n_min }),
        ),
        Cmd::Cubic => ("cubic", json!({})),
    };
    let material = format!(
        "{}\u{0}{}\u{0}{}\u{0}{}\u{0}{}",
        env!("CARGO_PKG_VERSION"),
        name,
        params,
        cli.precision,
        input.unwrap_or_default(),
    );
    sha256_hex(material.as_bytes())
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

fn cache_lookup(path: &PathBuf, key: &str) -> Option<Value> {
    let content = std::fs::read_to_string(path).ok()?;
    let mut hit = None;
    for line in content.lines() {
        // Tolerate torn or foreign lines: the cache is advisory.
        let Ok(entry) = serde_json::from_str::<Value>(line) else {
            continue;
        };
        if entry.get("key").and_then(Value::as_str) == Some(key) {
            if let Some(report) = entry.get("report") {
                hit = Some(report.clone());
            }
        }
    }
    hit
}

fn cache_store(path: &PathBuf, key: &str, report: &Value) -> std::io::Result<()> {
    let line = serde_json::to_string(&json!({ "key": key, "report": report }))
        .expect("cache entries serialize");
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(file, "{line}")
}
