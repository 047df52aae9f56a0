//! Command-line front end.
//!
//! Exit codes: 0 success, 1 an identity or decomposition failed, 2 the input
//! could not be parsed, 3 a precondition of the requested operation failed.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bps::{
    bps_decompose, bps_recompose, hilbert_decompose, validate_ggtc, BpsError, BpsVector,
    IdentityCheck, PairsSeries,
};
use crate::curve::{
    milnor_from_geometry, nodal_contribution, nodal_pairs_series, nonsingular_contribution,
    parse_subset_key, q_series_decompose, stratify_pairs_series, sym_euler, CurveError, NodalCurve,
    SingularityGerm, MAX_NODES,
};
use crate::k3::{
    kkv_decompose, kkv_product, ky_series, signed_conversion_check, yau_zaslow, K3Error,
};
use crate::series::json::to_sorted_json;
use crate::series::{
    binom_pow, euler_product_power, involution_check, product_family, series_arith, BiSeries,
    Factor, LaurentPoly, SeriesError, SeriesOp, Sign, TruncSeries,
};

#[derive(Debug)]
pub enum CliError {
    /// Identity or decomposition failure (exit 1).
    Validation(String),
    /// Unreadable or malformed input (exit 2).
    Parse(String),
    /// Operation precondition violated (exit 3).
    Precondition(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Parse(m) | CliError::Precondition(m) => m,
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::EmptyWindow | SeriesError::NonUnitLeading { .. } => {
                CliError::Precondition(e.to_string())
            }
            SeriesError::InvalidWindow { .. } | SeriesError::LengthMismatch { .. } => {
                CliError::Parse(e.to_string())
            }
        }
    }
}

impl From<BpsError> for CliError {
    fn from(e: BpsError) -> Self {
        match e {
            BpsError::NotBpsForm { .. } => CliError::Validation(e.to_string()),
            BpsError::InsufficientWindow { .. } => CliError::Precondition(e.to_string()),
            BpsError::LengthMismatch { .. } => CliError::Parse(e.to_string()),
            BpsError::Series(s) => s.into(),
        }
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        match e {
            CurveError::Bps(b) => b.into(),
            CurveError::MilnorMismatch { .. }
            | CurveError::InvalidCurve(_)
            | CurveError::InvalidGerm(_) => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<K3Error> for CliError {
    fn from(e: K3Error) -> Self {
        match e {
            K3Error::AsymmetricInput { .. } | K3Error::NotKkvForm { .. } => {
                CliError::Validation(e.to_string())
            }
            K3Error::InvalidYOrder(_) => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Parse(format!("I/O error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Parse(format!("CSV error: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

/// Known zero coefficients appended to an inline polynomial by default.
const INLINE_PADDING: i64 = 10;

#[derive(Parser, Debug)]
#[command(
    name = "bps",
    version,
    about = "BPS invariants of stable pairs: exact series calculus"
)]
struct Cli {
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand, Debug)]
enum Group {
    /// Pairs series <-> BPS vectors
    #[command(subcommand)]
    Bps(BpsCmd),
    /// Hilbert-scheme Euler characteristic series
    #[command(subcommand)]
    Hilb(HilbCmd),
    /// Local contributions of single curves and singularity germs
    #[command(subcommand)]
    Curve(CurveCmd),
    /// K3 surfaces: product formulas and BPS tables
    #[command(subcommand)]
    K3(K3Cmd),
    /// Series engine utilities
    #[command(subcommand)]
    Series(SeriesCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output path; `-` or absent writes to standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A series given as a JSON file or as inline coefficients.
#[derive(Args, Debug)]
struct SeriesInput {
    /// JSON input file (`-` for standard input)
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Inline exact polynomial coefficients, comma separated, lowest first
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,
    /// Exponent of the first inline coefficient
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    min_exp: i64,
    /// Truncation order for inline coefficients, which are read as an exact
    /// polynomial (defaults to --order, else the last exponent plus 10)
    #[arg(long, allow_hyphen_values = true)]
    window: Option<i64>,
}

#[derive(Subcommand, Debug)]
enum BpsCmd {
    /// Read off the BPS vector of a pairs series
    Decompose {
        #[command(flatten)]
        input: SeriesInput,
        #[arg(long)]
        g: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<i64>,
        #[command(flatten)]
        output: Output,
    },
    /// Expand a BPS vector into its pairs series
    Recompose {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        g: Option<u32>,
        /// Entries n_0..n_g, comma separated
        #[arg(long, allow_hyphen_values = true)]
        n: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        order: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Check the identities relating P_n, P_-n and N = n_0
    Validate {
        #[command(flatten)]
        input: SeriesInput,
        #[arg(long)]
        g: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<i64>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
enum HilbCmd {
    /// Write sum e(Hilb^i C) q^i in the basis q^(g-r)(1-q)^(2r-2)
    Decompose {
        #[command(flatten)]
        input: SeriesInput,
        #[arg(long)]
        g: u32,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<i64>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct CurveArgs {
    /// NodalCurve JSON file
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    g: Option<u32>,
    #[arg(long)]
    r: Option<u32>,
    /// Subset weights `subset=value` separated by `;`, e.g. `=1;0=-2`
    #[arg(long, allow_hyphen_values = true)]
    chi: Option<String>,
}

#[derive(Args, Debug)]
struct GermArgs {
    /// SingularityGerm JSON file
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Built-in germ
    #[arg(long, value_enum)]
    germ: Option<BuiltinGerm>,
    /// Q-series length for a built-in germ
    #[arg(long, default_value_t = 20)]
    germ_order: u32,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BuiltinGerm {
    Node,
    Smooth,
}

#[derive(Subcommand, Debug)]
enum CurveCmd {
    /// Contribution of a nonsingular curve
    Nonsingular {
        #[arg(long)]
        g: u32,
        #[arg(long, allow_hyphen_values = true)]
        chi: String,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<i64>,
        #[command(flatten)]
        output: Output,
    },
    /// BPS contributions of a nodal curve
    Nodal {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Pairs series of a nodal curve, assembled from its strata
    NodalSeries {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<i64>,
        #[command(flatten)]
        output: Output,
    },
    /// Decompose the Q-series of a singularity germ
    Qseries {
        #[command(flatten)]
        germ: GermArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Signed pairs series of a curve with one singularity germ
    Stratify {
        #[command(flatten)]
        germ: GermArgs,
        /// Euler characteristic of the smooth locus
        #[arg(long, allow_hyphen_values = true)]
        e_c0: i64,
        #[arg(long)]
        g: u32,
        #[arg(long, allow_hyphen_values = true)]
        order: i64,
        #[command(flatten)]
        output: Output,
    },
    /// e(S^k M) for e(M) = e
    SymEuler {
        #[arg(long, allow_hyphen_values = true)]
        e: i64,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Milnor fibre Euler characteristic (2 - 2g) - e(C0)
    Milnor {
        #[arg(long)]
        g: u32,
        #[arg(long, allow_hyphen_values = true)]
        e_c0: i64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
enum K3Cmd {
    /// Euler characteristics e(P_n(S,h))
    Ky {
        #[arg(long)]
        hmax: u32,
        #[arg(long, allow_hyphen_values = true)]
        yorder: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Table r_(g,h) from the product formula (or from --in BiSeries JSON)
    Kkv {
        #[arg(long)]
        hmax: Option<u32>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// The bivariate product itself
    KkvProduct {
        #[arg(long)]
        hmax: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Genus-zero counts prod (1-q^n)^-24
    Yz {
        #[arg(long)]
        hmax: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Check the signed form of the Euler characteristic series
    SignedCheck {
        #[arg(long)]
        hmax: u32,
        #[arg(long, allow_hyphen_values = true)]
        yorder: i64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
enum SeriesCmd {
    /// prod (1-q^n)^exponent
    Eta {
        #[arg(long)]
        hmax: u32,
        #[arg(long, default_value_t = -24, allow_hyphen_values = true)]
        exponent: i64,
        #[command(flatten)]
        output: Output,
    },
    /// (1 +- q)^e
    Binom {
        #[arg(long, allow_hyphen_values = true)]
        e: i64,
        #[arg(long, value_enum, default_value = "plus")]
        sign: SignArg,
        #[arg(long)]
        order: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Multiplicative inverse
    Inverse {
        #[command(flatten)]
        input: SeriesInput,
        #[arg(long, allow_hyphen_values = true)]
        order: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Product of two series
    Mul {
        #[command(flatten)]
        pair: SeriesPair,
        #[command(flatten)]
        output: Output,
    },
    /// Sum of two series
    Add {
        #[command(flatten)]
        pair: SeriesPair,
        #[command(flatten)]
        output: Output,
    },
    /// Substitute q -> -q
    Negate {
        #[command(flatten)]
        input: SeriesInput,
        #[command(flatten)]
        output: Output,
    },
    /// prod_n prod_(a,e) (1 - z^a q^n)^e
    Product {
        /// Factors `a:e`, comma separated, e.g. `0:-20,1:-2,-1:-2`
        #[arg(long, allow_hyphen_values = true)]
        factors: String,
        #[arg(long)]
        order: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Is a Laurent polynomial invariant under z <-> 1/z?
    Involution {
        /// LaurentPoly JSON file
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Inline terms `exp:coeff`, comma separated
        #[arg(long, allow_hyphen_values = true)]
        terms: Option<String>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct SeriesPair {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long = "in2")]
    input2: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    min_exp: i64,
    #[arg(long, allow_hyphen_values = true)]
    coeffs2: Option<String>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    min_exp2: i64,
    /// Truncation order applied to inline coefficients (default: last
    /// exponent plus 10)
    #[arg(long, allow_hyphen_values = true)]
    window: Option<i64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

/// Parses `argv` (including the program name), runs one command and returns
/// the process exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let kind = match e {
                CliError::Validation(_) => "validation failure",
                CliError::Parse(_) => "input error",
                CliError::Precondition(_) => "precondition failure",
            };
            let _ = writeln!(err, "bps: {kind}: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.group {
        Group::Bps(cmd) => run_bps(cmd, stdout),
        Group::Hilb(cmd) => run_hilb(cmd, stdout),
        Group::Curve(cmd) => run_curve(cmd, stdout),
        Group::K3(cmd) => run_k3(cmd, stdout),
        Group::Series(cmd) => run_series(cmd, stdout),
    }
}

// ---------------------------------------------------------------- input

fn read_source(path: &Path) -> CliResult<String> {
    let mut s = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut s)?;
    } else {
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut s))
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    }
    Ok(s)
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("invalid {what} JSON: {e}")))
}

fn parse_int_list(s: &str) -> CliResult<Vec<BigInt>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| BigInt::from_str(p).map_err(|_| CliError::Parse(format!("invalid integer {p:?}"))))
        .collect()
}

fn parse_bigint(s: &str) -> CliResult<BigInt> {
    BigInt::from_str(s.trim()).map_err(|_| CliError::Parse(format!("invalid integer {s:?}")))
}

fn inline_series(coeffs: &str, min_exp: i64, window: Option<i64>) -> CliResult<TruncSeries> {
    let c = parse_int_list(coeffs)?;
    let last = min_exp + c.len() as i64 - 1;
    let order = window.unwrap_or(last + INLINE_PADDING);
    if order < min_exp - 1 {
        return Err(CliError::Parse(format!(
            "window order {order} is below min_exp {min_exp}"
        )));
    }
    Ok(TruncSeries::from_poly(min_exp, &c, order))
}

/// Parsed series input plus the genus carried by a PairsSeries document.
fn load_series(input: &SeriesInput, order: Option<i64>) -> CliResult<(TruncSeries, Option<u32>)> {
    match (&input.input, &input.coeffs) {
        (Some(_), Some(_)) => Err(CliError::Parse(
            "give either --in or --coeffs, not both".into(),
        )),
        (None, None) => Err(CliError::Parse(
            "missing series input (--in or --coeffs)".into(),
        )),
        (None, Some(c)) => Ok((
            inline_series(c, input.min_exp, input.window.or(order))?,
            None,
        )),
        (Some(path), None) => {
            let text = read_source(path)?;
            let value: Value = parse_json(&text, "series")?;
            if value.get("series").is_some() {
                let p: PairsSeries = parse_json(&text, "pairs series")?;
                Ok((p.series, Some(p.g)))
            } else {
                Ok((parse_json(&text, "series")?, None))
            }
        }
    }
}

fn load_pairs(input: &SeriesInput, g: Option<u32>, order: Option<i64>) -> CliResult<PairsSeries> {
    let (series, doc_g) = load_series(input, order)?;
    Ok(match g.or(doc_g) {
        Some(g) => PairsSeries::new(series, g),
        None => PairsSeries::with_default_genus(series),
    })
}

fn load_curve(args: &CurveArgs) -> CliResult<NodalCurve> {
    if let Some(path) = &args.input {
        if args.g.is_some() || args.r.is_some() || args.chi.is_some() {
            return Err(CliError::Parse("give either --in or --g/--r/--chi".into()));
        }
        return parse_json(&read_source(path)?, "nodal curve");
    }
    let (Some(g), Some(r), Some(chi)) = (args.g, args.r, args.chi.as_deref()) else {
        return Err(CliError::Parse(
            "nodal curve needs --in or all of --g, --r, --chi".into(),
        ));
    };
    if r > MAX_NODES {
        return Err(CliError::Precondition(format!("at most {MAX_NODES} nodes")));
    }
    let mut weights: Vec<Option<BigInt>> = vec![None; 1usize << r];
    for entry in chi.split(';').filter(|e| !e.trim().is_empty()) {
        let (key, val) = entry
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("chi entry {entry:?} is not subset=value")))?;
        let mask = parse_subset_key(key, r).map_err(CliError::Parse)?;
        if weights[mask as usize].replace(parse_bigint(val)?).is_some() {
            return Err(CliError::Parse(format!("duplicate subset {key:?}")));
        }
    }
    let chi = weights
        .into_iter()
        .enumerate()
        .map(|(mask, w)| {
            w.ok_or_else(|| {
                CliError::Parse(format!(
                    "missing weight for subset {:?}",
                    crate::curve::subset_key(mask as u32)
                ))
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(NodalCurve::new(g, r, chi)?)
}

fn load_germ(args: &GermArgs) -> CliResult<SingularityGerm> {
    match (&args.input, args.germ) {
        (Some(path), None) => parse_json(&read_source(path)?, "singularity germ"),
        (None, Some(BuiltinGerm::Node)) => Ok(SingularityGerm::node(args.germ_order)),
        (None, Some(BuiltinGerm::Smooth)) => Ok(SingularityGerm::smooth(args.germ_order)),
        _ => Err(CliError::Parse("give exactly one of --in or --germ".into())),
    }
}

// ---------------------------------------------------------------- output

fn with_sink(
    output: &Output,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> CliResult<()>,
) -> CliResult<()> {
    match output.out.as_deref() {
        Some(p) if p.as_os_str() != "-" => {
            let file = File::create(p)
                .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        _ => f(stdout),
    }
}

fn emit_json<T: Serialize>(output: &Output, stdout: &mut dyn Write, value: &T) -> CliResult<()> {
    let text = to_sorted_json(value).map_err(|e| CliError::Parse(e.to_string()))?;
    with_sink(output, stdout, |w| {
        w.write_all(text.as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

fn emit_csv<R, I>(
    output: &Output,
    stdout: &mut dyn Write,
    header: &[&str],
    rows: I,
) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    with_sink(output, stdout, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(header)?;
        for row in rows {
            csv.write_record(row)?;
        }
        csv.flush()?;
        Ok(())
    })
}

fn emit_series(
    output: &Output,
    stdout: &mut dyn Write,
    s: &TruncSeries,
    header: [&str; 2],
) -> CliResult<()> {
    match output.format {
        Format::Json => emit_json(output, stdout, s),
        Format::Csv => emit_csv(
            output,
            stdout,
            &header,
            s.iter().map(|(e, c)| [e.to_string(), c.to_string()]),
        ),
    }
}

fn emit_pairs(output: &Output, stdout: &mut dyn Write, p: &PairsSeries) -> CliResult<()> {
    match output.format {
        Format::Json => emit_json(output, stdout, p),
        Format::Csv => emit_series(output, stdout, &p.series, ["n", "p_n"]),
    }
}

fn emit_vector(output: &Output, stdout: &mut dyn Write, v: &BpsVector) -> CliResult<()> {
    match output.format {
        Format::Json => emit_json(output, stdout, v),
        Format::Csv => emit_csv(
            output,
            stdout,
            &["r", "n_r"],
            v.n()
                .iter()
                .enumerate()
                .map(|(r, n)| [r.to_string(), n.to_string()]),
        ),
    }
}

fn json_only(output: &Output) -> CliResult<()> {
    match output.format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Parse(
            "this command only supports --format json".into(),
        )),
    }
}

fn describe_failure(name: &str, c: &IdentityCheck) -> Option<String> {
    let n = c.first_failure?;
    Some(format!(
        "{name} fails at n = {n}: expected {}, found {}",
        c.expected
            .as_ref()
            .map(ToString::to_string)
            .unwrap_or_default(),
        c.actual
            .as_ref()
            .map(ToString::to_string)
            .unwrap_or_default()
    ))
}

// ---------------------------------------------------------------- commands

fn run_bps(cmd: BpsCmd, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        BpsCmd::Decompose {
            input,
            g,
            order,
            output,
        } => {
            let z = load_pairs(&input, g, order)?;
            let v = bps_decompose(&z)?;
            emit_vector(&output, stdout, &v)
        }
        BpsCmd::Recompose {
            input,
            g,
            n,
            order,
            output,
        } => {
            let v = match (input, n) {
                (Some(path), None) => parse_json::<BpsVector>(&read_source(&path)?, "BPS vector")?,
                (None, Some(n)) => {
                    let entries = parse_int_list(&n)?;
                    if entries.is_empty() {
                        return Err(CliError::Parse("--n needs at least one entry".into()));
                    }
                    let g = g.unwrap_or(entries.len() as u32 - 1);
                    BpsVector::new(g, entries)?
                }
                _ => return Err(CliError::Parse("give exactly one of --in or --n".into())),
            };
            let z = bps_recompose(&v, order)?;
            emit_pairs(&output, stdout, &z)
        }
        BpsCmd::Validate {
            input,
            g,
            order,
            output,
        } => {
            json_only(&output)?;
            let z = load_pairs(&input, g, order)?;
            let report = validate_ggtc(&z)?;
            emit_json(&output, stdout, &report)?;
            if report.pass {
                Ok(())
            } else {
                let msg = [
                    describe_failure("identity_0 (P_n = 0, n <= -g)", &report.identity_0),
                    describe_failure(
                        "identity_gg (P_n - P_-n = (-1)^(n-1) n N)",
                        &report.identity_gg,
                    ),
                    describe_failure("identity_g0 (P_n = (-1)^(n-1) n N)", &report.identity_g0),
                ]
                .into_iter()
                .flatten()
                .collect::<Vec<_>>()
                .join("; ");
                Err(CliError::Validation(msg))
            }
        }
    }
}

fn run_hilb(cmd: HilbCmd, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        HilbCmd::Decompose {
            input,
            g,
            order,
            output,
        } => {
            let (h, _) = load_series(&input, order)?;
            let v = hilbert_decompose(&h, g)?;
            emit_vector(&output, stdout, &v)
        }
    }
}

fn run_curve(cmd: CurveCmd, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        CurveCmd::Nonsingular {
            g,
            chi,
            order,
            output,
        } => {
            json_only(&output)?;
            let chi = parse_bigint(&chi)?;
            let order = order.unwrap_or(g as i64 + 10);
            let (v, z) = nonsingular_contribution(g, &chi, order)?;
            emit_json(&output, stdout, &json!({"bps": v, "series": z}))
        }
        CurveCmd::Nodal { curve, output } => {
            let c = load_curve(&curve)?;
            emit_vector(&output, stdout, &nodal_contribution(&c))
        }
        CurveCmd::NodalSeries {
            curve,
            order,
            output,
        } => {
            let c = load_curve(&curve)?;
            let z = nodal_pairs_series(&c, order.unwrap_or(c.g() as i64 + 10))?;
            emit_pairs(&output, stdout, &z)
        }
        CurveCmd::Qseries { germ, output } => {
            let germ = load_germ(&germ)?;
            emit_vector(&output, stdout, &q_series_decompose(&germ)?)
        }
        CurveCmd::Stratify {
            germ,
            e_c0,
            g,
            order,
            output,
        } => {
            let germ = load_germ(&germ)?;
            let z = stratify_pairs_series(&germ, e_c0, g, order)?;
            emit_pairs(&output, stdout, &z)
        }
        CurveCmd::SymEuler { e, k, output } => {
            json_only(&output)?;
            let v = sym_euler(e, k);
            emit_json(
                &output,
                stdout,
                &json!({"e": e, "k": k, "value": v.to_string()}),
            )
        }
        CurveCmd::Milnor { g, e_c0, output } => {
            json_only(&output)?;
            let mu = milnor_from_geometry(g, e_c0);
            emit_json(&output, stdout, &json!({"g": g, "e_c0": e_c0, "mu": mu}))
        }
    }
}

fn run_k3(cmd: K3Cmd, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        K3Cmd::Ky {
            hmax,
            yorder,
            output,
        } => {
            let ky = ky_series(hmax, yorder)?;
            match output.format {
                Format::Json => emit_json(&output, stdout, &ky),
                Format::Csv => with_sink(&output, stdout, |w| Ok(ky.write_csv(w)?)),
            }
        }
        K3Cmd::Kkv {
            hmax,
            input,
            output,
        } => {
            let product = match (input, hmax) {
                (Some(path), None) => {
                    parse_json::<BiSeries>(&read_source(&path)?, "bivariate series")?
                }
                (None, Some(h)) => kkv_product(h),
                _ => return Err(CliError::Parse("give exactly one of --hmax or --in".into())),
            };
            let table = kkv_decompose(&product)?;
            match output.format {
                Format::Json => emit_json(&output, stdout, &table),
                Format::Csv => with_sink(&output, stdout, |w| Ok(table.write_csv(w)?)),
            }
        }
        K3Cmd::KkvProduct { hmax, output } => {
            json_only(&output)?;
            emit_json(&output, stdout, &kkv_product(hmax))
        }
        K3Cmd::Yz { hmax, output } => {
            emit_series(&output, stdout, &yau_zaslow(hmax), ["h", "r_0h"])
        }
        K3Cmd::SignedCheck {
            hmax,
            yorder,
            output,
        } => {
            json_only(&output)?;
            let report = signed_conversion_check(hmax, yorder)?;
            emit_json(&output, stdout, &report)?;
            match &report.first_mismatch {
                None => Ok(()),
                Some(m) => Err(CliError::Validation(format!(
                    "signed conversion fails at h = {}, n = {}: {} != {}",
                    m.h, m.n, m.lhs, m.rhs
                ))),
            }
        }
    }
}

fn load_pair(pair: &SeriesPair) -> CliResult<(TruncSeries, TruncSeries)> {
    let one = |path: &Option<PathBuf>,
               coeffs: &Option<String>,
               min_exp: i64,
               flag: &str|
     -> CliResult<TruncSeries> {
        match (path, coeffs) {
            (Some(p), None) => parse_json(&read_source(p)?, "series"),
            (None, Some(c)) => inline_series(c, min_exp, pair.window),
            _ => Err(CliError::Parse(format!(
                "give exactly one source for operand {flag}"
            ))),
        }
    };
    Ok((
        one(&pair.input, &pair.coeffs, pair.min_exp, "1 (--in/--coeffs)")?,
        one(
            &pair.input2,
            &pair.coeffs2,
            pair.min_exp2,
            "2 (--in2/--coeffs2)",
        )?,
    ))
}

fn parse_pairs_list(s: &str, what: &str) -> CliResult<Vec<(i64, BigInt)>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (a, b) = p
                .rsplit_once(':')
                .ok_or_else(|| CliError::Parse(format!("{what} entry {p:?} is not a:b")))?;
            let a: i64 = a
                .trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("invalid exponent {a:?}")))?;
            Ok((a, parse_bigint(b)?))
        })
        .collect()
}

fn run_series(cmd: SeriesCmd, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        SeriesCmd::Eta {
            hmax,
            exponent,
            output,
        } => emit_series(
            &output,
            stdout,
            &euler_product_power(exponent, hmax),
            ["n", "coeff"],
        ),
        SeriesCmd::Binom {
            e,
            sign,
            order,
            output,
        } => {
            let sign = match sign {
                SignArg::Plus => Sign::Plus,
                SignArg::Minus => Sign::Minus,
            };
            emit_series(&output, stdout, &binom_pow(e, sign, order), ["n", "coeff"])
        }
        SeriesCmd::Inverse {
            input,
            order,
            output,
        } => {
            let (s, _) = load_series(&input, None)?;
            emit_series(&output, stdout, &s.inverse(order)?, ["n", "coeff"])
        }
        SeriesCmd::Mul { pair, output } => {
            let (a, b) = load_pair(&pair)?;
            emit_series(
                &output,
                stdout,
                &series_arith(&a, &b, SeriesOp::Mul)?,
                ["n", "coeff"],
            )
        }
        SeriesCmd::Add { pair, output } => {
            let (a, b) = load_pair(&pair)?;
            emit_series(
                &output,
                stdout,
                &series_arith(&a, &b, SeriesOp::Add)?,
                ["n", "coeff"],
            )
        }
        SeriesCmd::Negate { input, output } => {
            let (s, _) = load_series(&input, None)?;
            emit_series(&output, stdout, &s.q_negate(), ["n", "coeff"])
        }
        SeriesCmd::Product {
            factors,
            order,
            output,
        } => {
            json_only(&output)?;
            let factors = parse_pairs_list(&factors, "factor")?
                .into_iter()
                .map(|(a, e)| {
                    i64::try_from(e)
                        .map(|power| Factor { z_exp: a, power })
                        .map_err(|_| CliError::Parse("factor exponent out of range".into()))
                })
                .collect::<CliResult<Vec<_>>>()?;
            emit_json(&output, stdout, &product_family(&factors, order))
        }
        SeriesCmd::Involution {
            input,
            terms,
            output,
        } => {
            json_only(&output)?;
            let p: LaurentPoly = match (input, terms) {
                (Some(path), None) => parse_json(&read_source(&path)?, "Laurent polynomial")?,
                (None, Some(t)) => LaurentPoly::from_terms(parse_pairs_list(&t, "term")?),
                _ => {
                    return Err(CliError::Parse(
                        "give exactly one of --in or --terms".into(),
                    ))
                }
            };
            emit_json(
                &output,
                stdout,
                &json!({"symmetric": involution_check(&p), "poly": p}),
            )
        }
    }
}
