//! `irdf` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or argument error, 2 infeasible distortion,
//! 3 solver failure, 4 a verification (`compare`, `simulate`) fell outside
//! its tolerance.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bounds::{convexified_upper_bound, direct_rdf, upper_bound, CurveKind};
use crate::distortion::{distortion_table, simulate_reduction, Estimator, RNG_NAME};
use crate::dual::irdf_point;
use crate::error::Error;
use crate::model::{canonicalize, LogBase, SourceModel};
use crate::oracle::{ba_rate_at_distortion, build_reduced_problem, DISTORTION_TOL};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_CHECK_FAILED: u8 = 4;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parameters of the `sweep --fig3` preset.
pub const FIG3_ALPHA: f64 = 0.25;
pub const FIG3_P: f64 = 0.05;
pub const FIG3_GRID: &str = "0.05:0.3:51";
/// Parameters of the `sweep --fig4` preset.
pub const FIG4_ALPHA: f64 = 0.5;
pub const FIG4_PS: [f64; 5] = [0.05, 0.1, 0.2, 0.3, 0.4];
pub const FIG4_GRID: &str = "0:0.5:101";

#[derive(Debug, Parser)]
#[command(
    name = "irdf",
    version,
    about = "Indirect rate-distortion function of a Bernoulli source seen through a BSC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rate, slope parameter and bounds at a single distortion.
    Point(PointArgs),
    /// Evaluate rate curves over a distortion grid.
    Sweep(SweepArgs),
    /// Compare the dual solver against Blahut–Arimoto on a grid.
    Compare(CompareArgs),
    /// Monte-Carlo check of E[d(X, X̂)] = E[d̂(Y, X̂)].
    Simulate(SimulateArgs),
    /// Print the amended distortion table d̂(y, x̂).
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Base {
    Bits,
    Nats,
}

impl From<Base> for LogBase {
    fn from(b: Base) -> Self {
        match b {
            Base::Bits => LogBase::Bits,
            Base::Nats => LogBase::Nats,
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_enum, default_value = "bits")]
    base: Base,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: f64,
    #[arg(long = "D", visible_alias = "d")]
    d: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, required_unless_present_any = ["fig3", "fig4"])]
    alpha: Option<f64>,
    #[arg(long, required_unless_present_any = ["fig3", "fig4"])]
    p: Option<f64>,
    /// `start:stop:count` or a comma-separated list of distortions.
    #[arg(long, required_unless_present_any = ["fig3", "fig4"])]
    grid: Option<String>,
    /// Comma-separated curves: irdf, direct_rdf, upper_bound,
    /// convexified_upper_bound, ba_oracle.
    #[arg(long, value_delimiter = ',')]
    curves: Option<Vec<Output>>,
    #[arg(long, conflicts_with_all = ["alpha", "p", "fig4"])]
    fig3: bool,
    #[arg(long, conflicts_with_all = ["alpha", "p"])]
    fig4: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: f64,
    /// Defaults to 20 points strictly inside (p, α).
    #[arg(long)]
    grid: Option<String>,
    /// Maximum allowed |dual − Blahut–Arimoto| in the chosen base.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: f64,
    /// identity, zero, one or flip.
    #[arg(long, default_value = "identity")]
    estimator: String,
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// Columns a sweep can produce, in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Output {
    Irdf,
    DirectRdf,
    UpperBound,
    ConvexifiedUpperBound,
    BaOracle,
}

impl Output {
    fn name(self) -> &'static str {
        match self {
            Output::Irdf => "irdf",
            Output::DirectRdf => "direct_rdf",
            Output::UpperBound => "upper_bound",
            Output::ConvexifiedUpperBound => "convexified_upper_bound",
            Output::BaOracle => "ba_oracle",
        }
    }
}

/// Distortion grid: explicit values or an inclusive linear range.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Range { start, stop, count } => (0..count)
                .map(|i| {
                    if i + 1 == count {
                        stop
                    } else {
                        start + (stop - start) * i as f64 / (count - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let num = |t: &str| -> Result<f64, Error> {
            let v: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad grid value '{t}'")))?;
            if (0.0..=1.0).contains(&v) {
                Ok(v)
            } else {
                Err(Error::Invalid(format!("grid value {v} outside [0, 1]")))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, count] => {
                let count: usize = count
                    .trim()
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad grid count '{count}'")))?;
                if count < 2 {
                    return Err(Error::Invalid("grid range needs count ≥ 2".into()));
                }
                Ok(Grid::Range {
                    start: num(start)?,
                    stop: num(stop)?,
                    count,
                })
            }
            [list] => {
                let values = list.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
                if values.is_empty() {
                    return Err(Error::Invalid("empty grid".into()));
                }
                Ok(Grid::List(values))
            }
            _ => Err(Error::Invalid(format!(
                "grid '{s}' is neither start:stop:count nor a list"
            ))),
        }
    }
}

/// Everything needed to produce one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub alpha: f64,
    /// One curve block per entry.
    pub ps: Vec<f64>,
    pub grid: Grid,
    pub outputs: Vec<Output>,
    pub base: LogBase,
}

impl SweepSpec {
    pub fn fig3() -> Self {
        SweepSpec {
            alpha: FIG3_ALPHA,
            ps: vec![FIG3_P],
            grid: FIG3_GRID.parse().expect("preset grid"),
            outputs: vec![
                Output::Irdf,
                Output::DirectRdf,
                Output::UpperBound,
                Output::ConvexifiedUpperBound,
            ],
            base: LogBase::Bits,
        }
    }

    pub fn fig4() -> Self {
        SweepSpec {
            alpha: FIG4_ALPHA,
            ps: FIG4_PS.to_vec(),
            grid: FIG4_GRID.parse().expect("preset grid"),
            outputs: vec![Output::Irdf],
            base: LogBase::Bits,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Missing, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            // 17 significant digits: lossless for f64.
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Missing => Value::Null,
        }
    }
}

/// Rows with a fixed column order plus `key=value` metadata.
struct Report {
    kind: &'static str,
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Report {
    fn new(kind: &'static str, columns: &[&str]) -> Self {
        Report {
            kind,
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "# irdf {VERSION} {}", self.kind)?;
                for (k, v) in &self.meta {
                    writeln!(out, "# {k}={v}")?;
                }
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv))?;
                }
                w.flush()
            }
            Format::Json => {
                let meta: Map<String, Value> = self
                    .meta
                    .iter()
                    .map(|(k, v)| (k.clone(), json!(v)))
                    .collect();
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        Value::Object(
                            self.columns
                                .iter()
                                .cloned()
                                .zip(row.iter().map(Cell::json))
                                .collect(),
                        )
                    })
                    .collect();
                let doc = json!({
                    "generator": format!("irdf {VERSION}"),
                    "kind": self.kind,
                    "meta": meta,
                    "columns": self.columns,
                    "rows": rows,
                });
                serde_json::to_writer_pretty(&mut *out, &doc)?;
                writeln!(out)
            }
        }
    }
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InfeasibleDistortion { .. } => EXIT_INFEASIBLE,
            Error::NoConvergence { .. } => EXIT_SOLVER,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: format!("I/O error: {e}"),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: format!("CSV error: {e}"),
        }
    }
}

/// Parse `args` (including the program name) and run the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Point(a) => cmd_point(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Compare(a) => cmd_compare(&a, out, err),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Table(a) => cmd_table(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "irdf: {}", f.message);
            f.code
        }
    }
}

fn model_meta(report: &mut Report, model: &SourceModel) {
    let c = model.complements();
    report.meta("source_complemented", c.source);
    report.meta("observation_complemented", c.observation);
}

fn cmd_point(a: &PointArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let base: LogBase = a.common.base.into();
    let model = canonicalize(a.alpha, a.p)?;
    let point = irdf_point(&model, a.d, base)?;
    let ub = upper_bound(&model, a.d, base).ok();
    let cub = convexified_upper_bound(&model, a.d, base).ok();

    let mut report = Report::new(
        "point",
        &[
            "alpha",
            "p",
            "D",
            "base",
            "rate",
            "r_star",
            "upper_bound",
            "convexified_upper_bound",
            "regime",
        ],
    );
    model_meta(&mut report, &model);
    report.rows.push(vec![
        Cell::Num(model.alpha()),
        Cell::Num(model.p()),
        Cell::Num(a.d),
        Cell::Text(base.to_string()),
        Cell::Num(point.rate),
        Cell::opt(point.r_star),
        Cell::opt(ub),
        Cell::opt(cub),
        Cell::Text(point.regime.as_str().to_string()),
    ]);
    report.write(a.common.format, out)?;
    Ok(EXIT_OK)
}

fn curve_cell(output: Output, model: &SourceModel, d: f64, base: LogBase) -> Result<Cell, Error> {
    let value = match output {
        Output::Irdf => CurveKind::Irdf.evaluate(model, d, base),
        Output::DirectRdf => direct_rdf(model.alpha(), d, base),
        Output::UpperBound => upper_bound(model, d, base),
        Output::ConvexifiedUpperBound => convexified_upper_bound(model, d, base),
        Output::BaOracle => match build_reduced_problem(model) {
            Ok(problem) => {
                let r = ba_rate_at_distortion(&problem, d, DISTORTION_TOL)?;
                if !r.converged {
                    return Err(Error::NoConvergence {
                        what: "Blahut–Arimoto",
                        residual: r.distortion - d,
                    });
                }
                Ok(r.rate_in(base))
            }
            Err(Error::DegenerateObservation { .. }) => return Ok(Cell::Missing),
            Err(e) => Err(e),
        },
    };
    match value {
        Ok(v) => Ok(Cell::Num(v)),
        Err(Error::InfeasibleDistortion { .. }) | Err(Error::Domain { .. }) => Ok(Cell::Missing),
        Err(Error::ZeroInformation { .. }) => Ok(Cell::Missing),
        Err(e) => Err(e),
    }
}

/// Build the sweep table for a spec. Infeasible cells are left empty.
fn sweep_report(spec: &SweepSpec) -> Result<Report, Error> {
    let mut outputs = spec.outputs.clone();
    outputs.sort();
    outputs.dedup();
    let mut columns = vec!["alpha", "p", "D"];
    columns.extend(outputs.iter().map(|o| o.name()));
    columns.push("r_star");
    let mut report = Report::new("sweep", &columns);
    report.meta("base", spec.base);
    report.meta("r_star_unit", "nats");

    let grid = spec.grid.values();
    for &p in &spec.ps {
        let model = canonicalize(spec.alpha, p)?;
        for &d in &grid {
            let mut row = vec![Cell::Num(model.alpha()), Cell::Num(model.p()), Cell::Num(d)];
            for &o in &outputs {
                row.push(curve_cell(o, &model, d, spec.base)?);
            }
            let r_star = irdf_point(&model, d, spec.base)
                .ok()
                .and_then(|pt| pt.r_star);
            row.push(Cell::opt(r_star));
            report.rows.push(row);
        }
    }
    Ok(report)
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let mut spec = if a.fig3 {
        SweepSpec::fig3()
    } else if a.fig4 {
        SweepSpec::fig4()
    } else {
        SweepSpec {
            alpha: a.alpha.expect("required by clap"),
            ps: vec![a.p.expect("required by clap")],
            grid: Grid::Range {
                start: 0.0,
                stop: 1.0,
                count: 2,
            },
            outputs: vec![
                Output::Irdf,
                Output::DirectRdf,
                Output::UpperBound,
                Output::ConvexifiedUpperBound,
            ],
            base: LogBase::Bits,
        }
    };
    if let Some(g) = &a.grid {
        spec.grid = g.parse()?;
    }
    if let Some(c) = &a.curves {
        spec.outputs = c.clone();
    }
    spec.base = a.common.base.into();

    let report = sweep_report(&spec)?;
    match &a.out {
        Some(path) => {
            let mut file = File::create(path).map_err(|e| Failure {
                code: EXIT_USAGE,
                message: format!("cannot write {}: {e}", path.display()),
            })?;
            report.write(a.common.format, &mut file)?;
        }
        None => report.write(a.common.format, out)?,
    }
    Ok(EXIT_OK)
}

/// Default comparison grid: `count` points strictly inside `(lo, hi)`.
pub fn interior_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| lo + (hi - lo) * i as f64 / (count + 1) as f64)
        .collect()
}

fn cmd_compare(a: &CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Failure> {
    let base: LogBase = a.common.base.into();
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(Error::domain("tol", a.tol, "(0, ∞)").into());
    }
    let model = canonicalize(a.alpha, a.p)?;
    let grid = match &a.grid {
        Some(g) => g.parse::<Grid>()?.values(),
        None => {
            if !model.is_informative() {
                return Err(Error::Invalid(format!(
                    "no interior distortions: p = {} ≥ α = {}",
                    model.p(),
                    model.alpha()
                ))
                .into());
            }
            interior_grid(model.p(), model.alpha(), 20)
        }
    };
    let problem = build_reduced_problem(&model)?;

    let mut report = Report::new(
        "compare",
        &[
            "alpha",
            "p",
            "D",
            "dual_rate",
            "ba_rate",
            "abs_diff",
            "ba_iterations",
        ],
    );
    report.meta("base", base);
    report.meta("tol", format!("{:e}", a.tol));
    model_meta(&mut report, &model);

    let mut worst: f64 = 0.0;
    for &d in &grid {
        let dual = irdf_point(&model, d, base)?;
        let ba = ba_rate_at_distortion(&problem, d, DISTORTION_TOL)?;
        if !ba.converged {
            let _ = writeln!(
                err,
                "irdf: Blahut–Arimoto did not converge at alpha={} p={} D={d} (reached D={})",
                model.alpha(),
                model.p(),
                ba.distortion
            );
            return Ok(EXIT_SOLVER);
        }
        let ba_rate = ba.rate_in(base);
        let diff = (dual.rate - ba_rate).abs();
        worst = worst.max(diff);
        report.rows.push(vec![
            Cell::Num(model.alpha()),
            Cell::Num(model.p()),
            Cell::Num(d),
            Cell::Num(dual.rate),
            Cell::Num(ba_rate),
            Cell::Num(diff),
            Cell::Int(ba.iterations as u64),
        ]);
    }
    let ok = worst < a.tol;
    report.meta("max_abs_diff", format!("{worst:.16e}"));
    report.meta("status", if ok { "ok" } else { "exceeds-tolerance" });
    report.write(a.common.format, out)?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let estimator: Estimator = a.estimator.parse()?;
    let model = canonicalize(a.alpha, a.p)?;
    let s = simulate_reduction(&model, estimator, a.n, a.seed)?;
    let mut report = Report::new(
        "simulate",
        &[
            "alpha",
            "p",
            "estimator",
            "n",
            "seed",
            "empirical_d",
            "empirical_dhat",
            "analytic",
            "band_low",
            "band_high",
            "within_band",
        ],
    );
    report.meta("rng", RNG_NAME);
    report.meta("seed", a.seed);
    model_meta(&mut report, &model);
    report.rows.push(vec![
        Cell::Num(model.alpha()),
        Cell::Num(model.p()),
        Cell::Text(estimator.to_string()),
        Cell::Int(s.n),
        Cell::Int(s.seed),
        Cell::Num(s.empirical_d),
        Cell::Num(s.empirical_dhat),
        Cell::Num(s.analytic),
        Cell::Num(s.analytic - s.band()),
        Cell::Num(s.analytic + s.band()),
        Cell::Bool(s.within_band()),
    ]);
    report.write(a.format, out)?;
    Ok(if s.within_band() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn cmd_table(a: &TableArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let model = canonicalize(a.alpha, a.p)?;
    let table = distortion_table(&model)?;
    let mut report = Report::new("table", &["y", "xhat_0", "xhat_1"]);
    report.meta("alpha", model.alpha());
    report.meta("p", model.p());
    report.meta("beta", model.beta());
    model_meta(&mut report, &model);
    for y in 0..2 {
        report.rows.push(vec![
            Cell::Int(y as u64),
            Cell::Num(table.get(y, 0)),
            Cell::Num(table.get(y, 1)),
        ]);
    }
    report.write(a.format, out)?;
    Ok(EXIT_OK)
}
