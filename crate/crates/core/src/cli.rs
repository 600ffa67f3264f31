//! Batch front end: one subcommand per pipeline, CSV or JSON output, and a
//! run manifest next to every result.
//!
//! In CSV mode the rows go to `--out` (or stdout) and the manifest to
//! `<out>.manifest.json` (or stderr). In JSON mode both are written as one
//! document. Cells of a sweep fail independently: a failed cell becomes a
//! row with a `status` message, the sweep continues, and the process exits
//! with the code of the first failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::ensembles::{t_correlated_pair, CountMode, CspModel};
use crate::error::{Error, Result};
use crate::landscape::{
    brute_force_max, chi_curve, interpolate, ogp_scan, vmax, AnnealAlgorithm, AnnealSchedule, ChiSettings,
    EnergyOracle, OgpMode,
};
use crate::parisi::{csp_value_formula, minimize_gsed, OptimizerSettings, ParisiGrid};
use crate::predicates::{
    builtin_predicate, mixture_of, Predicate, PredicateDistribution, PredicateFamily, PredicateSpec,
};
use crate::rng::SeedTree;

#[derive(Debug, Parser)]
#[command(name = "csp-glass", version, about = "Random Max-CSPs and their mean-field spin glasses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fourier spectrum, level weights and mixture polynomial of a predicate.
    Spectrum(PredicateArgs),
    /// Ground-state energy densities for the standard families.
    Table1(Table1Args),
    /// Free-energy comparison between CSP and spin-glass instances.
    Interpolate(InterpolateArgs),
    /// Exact optimal values of random instances.
    Vmax(VmaxArgs),
    /// Correlation curve of the debiased annealer on t-correlated pairs.
    Chi(ChiArgs),
    /// Overlap histograms of near-optimal pairs.
    Ogp(OgpArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredicateArgs {
    /// Built-in family: kXOR, kSAT, kNAE, oneInK.
    #[arg(long, default_value = "kXOR")]
    pub family: String,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// JSON predicate file; overrides --family and --k.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

impl PredicateArgs {
    fn resolve(&self) -> Result<Predicate> {
        match &self.table {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                let spec: PredicateSpec = serde_json::from_str(&text).map_err(|e| {
                    let at = if e.line() > 0 {
                        format!("line {}, column {}: ", e.line(), e.column())
                    } else {
                        String::new()
                    };
                    Error::Validation(format!("{}: {at}{e}", path.display()))
                })?;
                spec.resolve()
            }
            None => builtin_predicate(self.family.parse()?, self.k),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// Spatial grid points of the Parisi solver.
    #[arg(long = "grid-nx")]
    pub grid_nx: Option<usize>,
    /// Half width of the spatial domain.
    #[arg(long = "grid-L")]
    pub grid_l: Option<f64>,
    /// Largest number of atoms of the order parameter.
    #[arg(long, default_value_t = 8)]
    pub atoms: usize,
}

impl GridArgs {
    fn settings(&self, predicate: &Predicate) -> OptimizerSettings {
        let xi = mixture_of(predicate);
        let mut grid = ParisiGrid::for_mixture(&xi);
        if let Some(nx) = self.grid_nx {
            grid = grid.with_points(nx);
        }
        if let Some(l) = self.grid_l {
            grid = grid.with_half_width(l);
        }
        OptimizerSettings::default().with_atoms(self.atoms).with_grid(grid)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Table1Args {
    /// Comma-separated families.
    #[arg(long = "family", value_delimiter = ',', default_value = "oneInK,kNAE,kSAT,kXOR")]
    pub families: Vec<String>,
    /// Comma-separated arities.
    #[arg(long = "k", value_delimiter = ',', default_value = "2,3,4,5")]
    pub ks: Vec<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InterpolateArgs {
    #[command(flatten)]
    pub predicate: PredicateArgs,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Comma-separated clause densities.
    #[arg(long, value_delimiter = ',', default_value = "4,16,64")]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exact,
    Poisson,
}

impl From<ModeArg> for CountMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => CountMode::Exact,
            ModeArg::Poisson => CountMode::Poisson,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VmaxArgs {
    #[command(flatten)]
    pub predicate: PredicateArgs,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "64")]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChiArgs {
    #[command(flatten)]
    pub predicate: PredicateArgs,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 8.0)]
    pub alpha: f64,
    /// Comma-separated correlation levels.
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Annealing sweeps per restart.
    #[arg(long, default_value_t = 200)]
    pub sweeps: usize,
    /// Run the annealer without the sign-extraction wrapper.
    #[arg(long)]
    pub no_debias: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OgpModeArg {
    Average,
    Plain,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OgpArgs {
    #[command(flatten)]
    pub predicate: PredicateArgs,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 4.0)]
    pub alpha: f64,
    /// Correlation of the instance pair; 1 scans one instance against itself.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Comma-separated energy-density thresholds, relative to the pair's
    /// exact optimum when --relative is set.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.9,0.95,1")]
    pub thresholds: Vec<f64>,
    /// Interpret thresholds as fractions of the optimal average density.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub relative: bool,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = OgpModeArg::Average)]
    pub mode: OgpModeArg,
}

/// Parameters and diagnostics of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Value,
    pub seed: u64,
    pub version: String,
    pub diagnostics: Value,
}

struct Report {
    manifest: RunManifest,
    rows: Vec<Value>,
    columns: Vec<&'static str>,
    failure: Option<Error>,
}

fn to_row<T: Serialize>(row: &T) -> Value {
    serde_json::to_value(row).expect("rows serialize")
}

fn status(r: &Result<()>) -> String {
    match r {
        Ok(()) => "ok".into(),
        Err(e) => e.to_string(),
    }
}

/// Reduced fraction `p/q` for a dyadic rational.
fn dyadic_fraction(x: f64) -> String {
    let mut den: u64 = 1;
    while (x * den as f64).fract() != 0.0 && den < 1 << 40 {
        den *= 2;
    }
    let num = (x * den as f64).round() as i64;
    let g = gcd(num.unsigned_abs(), den);
    if den / g == 1 {
        format!("{}", num / g as i64)
    } else {
        format!("{}/{}", num / g as i64, den / g)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a.max(1) } else { gcd(b, a % b) }
}

fn spectrum(args: &PredicateArgs) -> Result<(Vec<Value>, Vec<&'static str>, Value)> {
    let p = args.resolve()?;
    let s = p.spectrum();
    let xi = mixture_of(&p);
    let mut rows = vec![json!({"quantity": "mean_term", "degree": 0, "value": s.mean()})];
    for (j, w) in s.level_weights().iter().enumerate() {
        rows.push(json!({"quantity": "level_weight", "degree": j, "value": w}));
    }
    for (deg, c) in xi.active_degrees() {
        rows.push(json!({"quantity": "xi_coefficient", "degree": deg, "value": c}));
    }
    let diag = json!({"arity": p.arity(), "mixture": xi.to_string(), "mean_term": dyadic_fraction(s.mean())});
    Ok((rows, vec!["quantity", "degree", "value"], diag))
}

fn table1(args: &Table1Args) -> Vec<(Value, Result<()>)> {
    let cells: Vec<(String, usize)> = args
        .families
        .iter()
        .flat_map(|f| args.ks.iter().map(move |&k| (f.clone(), k)))
        .collect();
    cells
        .par_iter()
        .map(|(family, k)| {
            let mut row = json!({"family": family, "k": k});
            let outcome = (|| -> Result<()> {
                let fam: PredicateFamily = family.parse()?;
                row["family"] = json!(fam.as_str());
                let p = builtin_predicate(fam, *k)?;
                let settings = args.grid.settings(&p);
                let r = minimize_gsed(&mixture_of(&p), &settings)?;
                let mean = p.spectrum().mean();
                row["mean_term"] = json!(mean);
                row["mean_term_fraction"] = json!(dyadic_fraction(mean));
                row["gsed"] = json!(r.value);
                row["grid_delta"] = json!(r.evaluation.grid_delta);
                row["atoms"] = json!(r.order.atoms());
                row["converged"] = json!(r.converged);
                Ok(())
            })();
            (row, outcome)
        })
        .collect()
}

fn point_mass(args: &PredicateArgs) -> Result<PredicateDistribution> {
    Ok(PredicateDistribution::point_mass(args.resolve()?))
}

fn interpolate_cmd(args: &InterpolateArgs, seed: SeedTree) -> Vec<(Value, Result<()>)> {
    args.alpha
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let mut row = json!({"alpha": alpha});
            let outcome = (|| -> Result<()> {
                let d = point_mass(&args.predicate)?;
                let r = interpolate(&d, args.n, args.beta, &[alpha], args.reps, seed.child(i as u64))?;
                let r = &r[0];
                row["phi_csp"] = json!(r.phi_csp.mean);
                row["phi_csp_se"] = json!(r.phi_csp.stderr);
                row["phi_sg"] = json!(r.phi_sg.mean);
                row["phi_sg_se"] = json!(r.phi_sg.stderr);
                row["predicted"] = json!(r.predicted);
                row["delta"] = json!(r.delta);
                row["delta_se"] = json!(r.delta_stderr);
                Ok(())
            })();
            (row, outcome)
        })
        .collect()
}

fn vmax_cmd(args: &VmaxArgs, seed: SeedTree) -> Vec<(Value, Result<()>)> {
    args.alpha
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let mut row = json!({"alpha": alpha, "n": args.n});
            let outcome = (|| -> Result<()> {
                let p = args.predicate.resolve()?;
                let model = CspModel::new(PredicateDistribution::point_mass(p.clone()), alpha, args.n, args.mode.into())?;
                let r = vmax(&model, args.reps, seed.child(i as u64))?;
                row["mean"] = json!(r.summary.mean);
                row["stderr"] = json!(r.summary.stderr);
                row["reps"] = json!(r.summary.count);
                let predicted = csp_value_formula(&mixture_of(&p), alpha, &args.grid.settings(&p))?;
                row["predicted"] = json!(predicted.value);
                Ok(())
            })();
            (row, outcome)
        })
        .collect()
}

fn chi_cmd(args: &ChiArgs, seed: SeedTree) -> Result<Vec<(Value, Result<()>)>> {
    let model = CspModel::new(point_mass(&args.predicate)?, args.alpha, args.n, CountMode::Poisson)?;
    let algorithm = AnnealAlgorithm {
        schedule: AnnealSchedule {
            sweeps: args.sweeps,
            ..AnnealSchedule::default()
        },
    };
    let settings = ChiSettings {
        reps: args.reps,
        debias: !args.no_debias,
    };
    let curve = chi_curve(&model, &algorithm, &args.t, &settings, seed)?;
    Ok((0..curve.t.len())
        .map(|i| {
            (
                json!({"t": curve.t[i], "chi": curve.chi[i], "stderr": curve.stderr[i], "reps": curve.reps}),
                Ok(()),
            )
        })
        .collect())
}

fn ogp_cmd(args: &OgpArgs, seed: SeedTree) -> Result<(Vec<(Value, Result<()>)>, Value)> {
    let model = CspModel::new(point_mass(&args.predicate)?, args.alpha, args.n, CountMode::Poisson)?;
    let (a, b) = t_correlated_pair(&model, args.t, seed)?;
    let oracle = EnergyOracle::grand(vec![std::sync::Arc::new(a), std::sync::Arc::new(b)])?;
    let best = brute_force_max(&oracle, None)?.expect("the full cube is nonempty");
    let thresholds: Vec<f64> = if args.relative {
        args.thresholds.iter().map(|f| f * best.density).collect()
    } else {
        args.thresholds.clone()
    };
    let mode = match args.mode {
        OgpModeArg::Average => OgpMode::Average,
        OgpModeArg::Plain => OgpMode::Plain,
    };
    let hists = ogp_scan(&oracle, &thresholds, args.bins, mode)?;
    let mut rows = Vec::new();
    for h in &hists {
        for (b, &count) in h.counts.iter().enumerate() {
            rows.push((
                json!({
                    "threshold": h.threshold,
                    "bin_lo": h.edges[b],
                    "bin_hi": h.edges[b + 1],
                    "count": count,
                    "tuples": h.tuples,
                }),
                Ok(()),
            ));
        }
    }
    Ok((rows, json!({"optimal_average_density": best.density})))
}

fn execute(cli: &Cli) -> Result<Report> {
    let seed = SeedTree::new(cli.output.seed);
    let (name, parameters) = match &cli.command {
        Command::Spectrum(a) => ("spectrum", to_row(a)),
        Command::Table1(a) => ("table1", to_row(a)),
        Command::Interpolate(a) => ("interpolate", to_row(a)),
        Command::Vmax(a) => ("vmax", to_row(a)),
        Command::Chi(a) => ("chi", to_row(a)),
        Command::Ogp(a) => ("ogp", to_row(a)),
    };
    let mut diagnostics = Value::Null;
    let (cells, columns): (Vec<(Value, Result<()>)>, Vec<&'static str>) = match &cli.command {
        Command::Spectrum(a) => {
            let (rows, cols, diag) = spectrum(a)?;
            diagnostics = diag;
            (rows.into_iter().map(|r| (r, Ok(()))).collect(), cols)
        }
        Command::Table1(a) => (
            table1(a),
            vec!["family", "k", "mean_term", "mean_term_fraction", "gsed", "grid_delta", "atoms", "converged", "status"],
        ),
        Command::Interpolate(a) => (
            interpolate_cmd(a, seed),
            vec!["alpha", "phi_csp", "phi_csp_se", "phi_sg", "phi_sg_se", "predicted", "delta", "delta_se", "status"],
        ),
        Command::Vmax(a) => (
            vmax_cmd(a, seed),
            vec!["alpha", "n", "mean", "stderr", "reps", "predicted", "status"],
        ),
        Command::Chi(a) => (chi_cmd(a, seed)?, vec!["t", "chi", "stderr", "reps"]),
        Command::Ogp(a) => {
            let (rows, diag) = ogp_cmd(a, seed)?;
            diagnostics = diag;
            (rows, vec!["threshold", "bin_lo", "bin_hi", "count", "tuples"])
        }
    };
    let mut failure = None;
    let rows = cells
        .into_iter()
        .map(|(mut row, outcome)| {
            if columns.contains(&"status") {
                row["status"] = json!(status(&outcome));
            }
            if let Err(e) = outcome {
                failure.get_or_insert(e);
            }
            row
        })
        .collect();
    Ok(Report {
        manifest: RunManifest {
            subcommand: name.into(),
            parameters,
            seed: cli.output.seed,
            version: env!("CARGO_PKG_VERSION").into(),
            diagnostics,
        },
        rows,
        columns,
        failure,
    })
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render(report: &Report, format: Format) -> Result<(Vec<u8>, Option<Vec<u8>>)> {
    let manifest = serde_json::to_vec_pretty(&report.manifest)?;
    match format {
        Format::Json => {
            let doc = json!({"manifest": report.manifest, "rows": report.rows});
            let mut body = serde_json::to_vec_pretty(&doc)?;
            body.push(b'\n');
            Ok((body, None))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.columns)?;
            for row in &report.rows {
                w.write_record(report.columns.iter().map(|c| csv_cell(&row[*c])))?;
            }
            let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok((body, Some(manifest)))
        }
    }
}

/// Runs a parsed command line and writes its outputs.
pub fn run(cli: &Cli) -> Result<()> {
    let report = execute(cli)?;
    let (body, manifest) = render(&report, cli.output.format)?;
    match &cli.output.out {
        Some(path) => {
            std::fs::write(path, &body)?;
            if let Some(m) = manifest {
                let mut side = path.clone().into_os_string();
                side.push(".manifest.json");
                std::fs::write(PathBuf::from(side), m)?;
            }
        }
        None => {
            std::io::stdout().write_all(&body)?;
            if let Some(m) = manifest {
                let mut err = std::io::stderr();
                err.write_all(&m)?;
                err.write_all(b"\n")?;
            }
        }
    }
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
