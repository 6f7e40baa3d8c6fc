//! `morse-spectrum`: eigenvalue curves, Jacobi events and index checks for
//! domain families on constant mean curvature surfaces.

mod format;
mod plot;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use morse_spectrum::analytic;
use morse_spectrum::morse::{
    detect_events, spectrum_at, trace_curves, uniform_grid, verify, EigenCurve, EventScan, JacobiEvent,
    Resolution,
};
use morse_spectrum::surfaces::{DomainFamily, FamilyKind};

const THREADS_ENV: &str = "MORSE_SPECTRUM_THREADS";

#[derive(Parser, Debug)]
#[command(name = "morse-spectrum", version, about = "Dirichlet and volume-constrained eigenvalue curves along domain families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues at a single t.
    Spectrum(SpectrumArgs),
    /// Eigenvalue curves over a t grid.
    Curves(SweepArgs),
    /// Zero crossings of the eigenvalue curves.
    Events(EventArgs),
    /// Full report: curves, events and every index check.
    Verify(SweepArgs),
    /// Closed-form reference values.
    #[command(subcommand)]
    Oracle(Oracle),
    /// SVG plot of a curves CSV, or of ψ.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// circle, gap, cylinder or sphere.
    #[arg(long)]
    family: String,
    /// Number of eigenvalues per kind.
    #[arg(long, default_value_t = 6)]
    k: usize,
    #[arg(long, default_value_t = 600)]
    n_per_unit: usize,
    /// Highest azimuthal mode for disk and cap families.
    #[arg(long, default_value_t = 8)]
    m_max: u32,
    /// Override the nullity tolerance.
    #[arg(long)]
    null_tol: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    t: f64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Skip bisection refinement of crossings.
    #[arg(long)]
    no_refine: bool,
}

#[derive(Args, Debug)]
struct EventArgs {
    #[command(flatten)]
    sweep: SweepArgs,
}

#[derive(Subcommand, Debug)]
enum Oracle {
    /// k²π²/t² − 1.
    CircleLambda {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: f64,
    },
    /// (l_k/t)² − 1.
    TwistedLambda {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: f64,
    },
    /// ψ(t) = 2 − 2cos t − t sin t.
    Psi {
        #[arg(long)]
        t: f64,
    },
    /// The first positive zeros of ψ.
    PsiZeros {
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
    /// n-th positive zero of J_m.
    BesselZero {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
    },
    /// First Dirichlet eigenvalue of the gap family.
    GapLambda1 {
        #[arg(long)]
        t: f64,
    },
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Curves CSV (`t,kind,k,value`).
    #[arg(long, required_unless_present = "psi")]
    input: Option<PathBuf>,
    /// Events CSV whose crossings are marked on the zero axis.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Plot ψ on [0, t_max] with its zeros marked instead.
    #[arg(long, conflicts_with = "input")]
    psi: bool,
    #[arg(long, default_value_t = 22.0)]
    t_max: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Everything needed to rerun a computation; embedded in every JSON report.
#[derive(Debug, Clone, Serialize)]
struct RunConfig {
    command: &'static str,
    family: String,
    t: Option<f64>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    steps: Option<usize>,
    k: usize,
    n_per_unit: usize,
    m_max: u32,
    null_tol: Option<f64>,
    refine: bool,
    format: Format,
    version: &'static str,
}

/// A bad argument or input file, reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Usage(msg.into()))
}

/// The verification ran but some check failed unexpectedly.
#[derive(Debug)]
struct VerificationFailed;

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for VerificationFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return 1;
    }
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<morse_spectrum::Error>() {
        return if e.is_numeric() { 3 } else { 2 };
    }
    if err.downcast_ref::<io::Error>().is_some() {
        return 2;
    }
    3
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match configure_threads().and_then(|_| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.downcast_ref::<VerificationFailed>().is_none() {
                eprintln!("error: {e:#}");
            }
            let code = exit_code(&e);
            if code == 2 {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            ExitCode::from(code)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be an integer >= 1, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Curves(a) => cmd_curves(a),
        Command::Events(a) => cmd_events(a.sweep),
        Command::Verify(a) => cmd_verify(a),
        Command::Oracle(o) => cmd_oracle(o),
        Command::Plot(a) => cmd_plot(a),
    }
}

fn parse_family(name: &str) -> Result<FamilyKind> {
    name.parse::<FamilyKind>().map_err(|_| {
        let known: Vec<&str> = FamilyKind::ALL.iter().map(|k| k.name()).collect();
        usage(format!("unknown family `{name}`; expected one of {}", known.join(", ")))
    })
}

fn check_common(c: &Common) -> Result<Resolution> {
    if c.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    if c.n_per_unit < 50 {
        return Err(usage("--n-per-unit must be at least 50"));
    }
    if let Some(tol) = c.null_tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(usage("--null-tol must be positive"));
        }
    }
    Ok(Resolution {
        n_per_unit: c.n_per_unit,
        m_max: c.m_max,
    })
}

fn config(command: &'static str, c: &Common, format: Format) -> RunConfig {
    RunConfig {
        command,
        family: c.family.clone(),
        t: None,
        t_min: None,
        t_max: None,
        steps: None,
        k: c.k,
        n_per_unit: c.n_per_unit,
        m_max: c.m_max,
        null_tol: c.null_tol,
        refine: false,
        format,
        version: env!("CARGO_PKG_VERSION"),
    }
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| anyhow!("csv buffer: {e}"))
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<()> {
    let res = check_common(&a.common)?;
    let family = DomainFamily::builtin(parse_family(&a.common.family)?);
    let format = a.common.format.unwrap_or(Format::Csv);
    let s = spectrum_at(&family, a.t, a.common.k, res)?;
    let bytes = match format {
        Format::Csv => csv_bytes(
            &["k", "lambda", "lambda_twisted"],
            (0..s.dirichlet.len()).map(|i| {
                vec![
                    (i + 1).to_string(),
                    format::float(s.dirichlet[i]),
                    format::float(s.twisted[i]),
                ]
            }),
        )?,
        Format::Json => {
            let mut cfg = config("spectrum", &a.common, format);
            cfg.t = Some(a.t);
            format::json(&serde_json::json!({ "config": cfg, "spectrum": s }))?
        }
        Format::Svg => return Err(usage("spectrum supports csv and json output")),
    };
    emit(a.common.output.as_deref(), &bytes)
}

struct Sweep {
    family: DomainFamily,
    grid: Vec<f64>,
    res: Resolution,
    cfg: RunConfig,
}

fn prepare_sweep(a: &SweepArgs, command: &'static str, default: Format) -> Result<Sweep> {
    let res = check_common(&a.common)?;
    let builtin = DomainFamily::builtin(parse_family(&a.common.family)?);
    let t_min = a.t_min.unwrap_or(builtin.t_min);
    let t_max = a.t_max.unwrap_or(builtin.t_max);
    if a.steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    let family = builtin.with_range(t_min, t_max)?;
    let grid = uniform_grid(t_min, t_max, a.steps)?;
    let format = a.common.format.unwrap_or(default);
    let mut cfg = config(command, &a.common, format);
    cfg.t_min = Some(t_min);
    cfg.t_max = Some(t_max);
    cfg.steps = Some(a.steps);
    cfg.refine = !a.no_refine;
    Ok(Sweep {
        family,
        grid,
        res,
        cfg,
    })
}

fn trace(sw: &Sweep, null_tol: Option<f64>) -> Result<EigenCurve> {
    let mut curve = trace_curves(&sw.family, &sw.grid, sw.cfg.k, sw.res)?;
    if let Some(tol) = null_tol {
        curve.null_tol.iter_mut().for_each(|v| *v = tol);
    }
    Ok(curve)
}

fn curve_rows(curve: &EigenCurve) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (i, &t) in curve.t_samples.iter().enumerate() {
        for (kind, data) in [("dirichlet", &curve.dirichlet), ("twisted", &curve.twisted)] {
            for (k, row) in data.iter().enumerate() {
                rows.push(vec![format::float(t), kind.to_string(), (k + 1).to_string(), format::float(row[i])]);
            }
        }
    }
    rows
}

fn event_rows(events: &[JacobiEvent]) -> Vec<Vec<String>> {
    events
        .iter()
        .map(|e| {
            vec![
                format::float(e.t_star),
                e.kind.name().to_string(),
                e.k.to_string(),
                e.multiplicity.to_string(),
                format::float(e.refined_width),
            ]
        })
        .collect()
}

const CURVE_HEADER: [&str; 4] = ["t", "kind", "k", "value"];
const EVENT_HEADER: [&str; 5] = ["t_star", "kind", "k", "multiplicity", "width"];

fn cmd_curves(a: SweepArgs) -> Result<()> {
    let sw = prepare_sweep(&a, "curves", Format::Csv)?;
    let curve = trace(&sw, a.common.null_tol)?;
    let bytes = match sw.cfg.format {
        Format::Csv => csv_bytes(&CURVE_HEADER, curve_rows(&curve))?,
        Format::Json => format::json(&serde_json::json!({ "config": sw.cfg, "curve": curve }))?,
        Format::Svg => plot::render(&curve_figure(&curve, &[])).into_bytes(),
    };
    emit(a.common.output.as_deref(), &bytes)
}

fn scan(sw: &Sweep, curve: &EigenCurve) -> Result<EventScan> {
    let scan = detect_events(curve, sw.cfg.refine)?;
    for w in &scan.warnings {
        eprintln!("warning: {w}");
    }
    Ok(scan)
}

fn cmd_events(a: SweepArgs) -> Result<()> {
    let sw = prepare_sweep(&a, "events", Format::Csv)?;
    let curve = trace(&sw, a.common.null_tol)?;
    let scan = scan(&sw, &curve)?;
    let bytes = match sw.cfg.format {
        Format::Csv => csv_bytes(&EVENT_HEADER, event_rows(&scan.events))?,
        Format::Json => format::json(&serde_json::json!({
            "config": sw.cfg,
            "events": scan.events,
            "warnings": scan.warnings,
        }))?,
        Format::Svg => plot::render(&curve_figure(&curve, &scan.events)).into_bytes(),
    };
    emit(a.common.output.as_deref(), &bytes)
}

fn cmd_verify(a: SweepArgs) -> Result<()> {
    let sw = prepare_sweep(&a, "verify", Format::Json)?;
    let curve = trace(&sw, a.common.null_tol)?;
    let scan = scan(&sw, &curve)?;
    let report = verify(&curve, &scan)?;
    let bytes = match sw.cfg.format {
        Format::Json => format::json(&serde_json::json!({
            "config": sw.cfg,
            "curve": report.curve,
            "events": report.events,
            "checks": report.checks,
            "identity_ok": report.identity_ok(),
            "lemma_d_ok": report.index_sandwich_ok(),
            "interlacing_ok": report.interlacing_ok(),
            "monotone_ok": report.monotone_ok(),
            "all_ok": report.all_acceptable(),
            "index": report.index,
            "jacobi_intervals": report.jacobi_intervals,
            "warnings": report.warnings,
        }))?,
        Format::Csv => csv_bytes(
            &["name", "ok", "expected", "detail"],
            report.checks.iter().map(|c| {
                vec![c.name.clone(), c.ok.to_string(), c.expected.to_string(), c.detail.clone()]
            }),
        )?,
        Format::Svg => plot::render(&curve_figure(&curve, &report.events)).into_bytes(),
    };
    emit(a.common.output.as_deref(), &bytes)?;
    for c in report.checks.iter().filter(|c| !c.acceptable()) {
        eprintln!("check failed: {}: {}", c.name, c.detail);
    }
    if report.all_acceptable() {
        Ok(())
    } else {
        Err(anyhow!(VerificationFailed))
    }
}

fn cmd_oracle(o: Oracle) -> Result<()> {
    let lines: Vec<String> = match o {
        Oracle::CircleLambda { k, t } => {
            positive_k(k)?;
            positive_t(t)?;
            vec![format::float(analytic::circle_dirichlet_lambda(k, t))]
        }
        Oracle::TwistedLambda { k, t } => {
            positive_k(k)?;
            positive_t(t)?;
            vec![format::float(analytic::circle_twisted_lambda(k, t)?)]
        }
        Oracle::Psi { t } => vec![format::float(analytic::psi(t))],
        Oracle::PsiZeros { count } => {
            positive_k(count)?;
            let z = analytic::PsiZeros::first(count)?;
            z.zeros
                .iter()
                .enumerate()
                .map(|(i, l)| format!("{},{}", i + 1, format::float(*l)))
                .collect()
        }
        Oracle::BesselZero { m, n } => {
            if n == 0 {
                return Err(usage("--n counts zeros from 1"));
            }
            vec![format::float(analytic::bessel_zero(m, n)?)]
        }
        Oracle::GapLambda1 { t } => vec![format::float(analytic::gap_lambda1(t)?)],
    };
    let mut out = lines.join("\n");
    out.push('\n');
    emit(None, out.as_bytes())
}

fn positive_k(k: usize) -> Result<()> {
    if k == 0 {
        bail!(Usage("index must be at least 1".into()));
    }
    Ok(())
}

fn positive_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        bail!(Usage(format!("t must be positive, got {t}")));
    }
    Ok(())
}

fn curve_figure(curve: &EigenCurve, events: &[JacobiEvent]) -> plot::Figure {
    let records: Vec<(f64, String, usize, f64)> = curve
        .t_samples
        .iter()
        .enumerate()
        .flat_map(|(i, &t)| {
            let d = curve.dirichlet.iter().enumerate().map(move |(k, r)| (t, "dirichlet".to_string(), k + 1, r[i]));
            let w = curve.twisted.iter().enumerate().map(move |(k, r)| (t, "twisted".to_string(), k + 1, r[i]));
            d.chain(w)
        })
        .collect();
    plot::Figure {
        title: format!("{} family eigenvalues", curve.family.family_kind),
        x_label: "t".into(),
        series: plot::curve_series(&records),
        markers: events.iter().map(|e| e.t_star).collect(),
    }
}

fn read_csv(path: &Path) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
    let header = r.headers()?.clone();
    let rows = r
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| usage(format!("parsing {}: {e}", path.display())))?;
    Ok((header, rows))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| usage(format!("{}: bad value in column {} of {:?}", path.display(), i + 1, rec)))
}

fn cmd_plot(a: PlotArgs) -> Result<()> {
    let figure = if a.psi {
        if !(a.t_max > 0.0 && a.t_max.is_finite()) {
            return Err(usage("--t-max must be positive"));
        }
        let samples = 800;
        let points = (0..=samples)
            .map(|i| {
                let s = a.t_max * i as f64 / samples as f64;
                (s, analytic::psi(s))
            })
            .collect();
        let mut markers = Vec::new();
        for k in 1.. {
            let l = analytic::psi_zero(k)?;
            if l > a.t_max {
                break;
            }
            markers.push(l);
        }
        plot::Figure {
            title: "psi(s) = 2 - 2 cos s - s sin s".into(),
            x_label: "s".into(),
            series: vec![plot::Series {
                label: "psi".into(),
                dashed: false,
                points,
            }],
            markers,
        }
    } else {
        let path = a.input.as_deref().expect("clap enforces --input without --psi");
        let (header, rows) = read_csv(path)?;
        if header.iter().collect::<Vec<_>>() != CURVE_HEADER {
            return Err(usage(format!("{}: expected header {}", path.display(), CURVE_HEADER.join(","))));
        }
        let records = rows
            .iter()
            .map(|r| Ok((field(r, 0, path)?, field(r, 1, path)?, field(r, 2, path)?, field(r, 3, path)?)))
            .collect::<Result<Vec<(f64, String, usize, f64)>>>()?;
        let mut markers = Vec::new();
        if let Some(ev) = a.events.as_deref() {
            let (h, rows) = read_csv(ev)?;
            if h.iter().collect::<Vec<_>>() != EVENT_HEADER {
                return Err(usage(format!("{}: expected header {}", ev.display(), EVENT_HEADER.join(","))));
            }
            for r in &rows {
                markers.push(field::<f64>(r, 0, ev)?);
            }
        }
        plot::Figure {
            title: "eigenvalue curves".into(),
            x_label: "t".into(),
            series: plot::curve_series(&records),
            markers,
        }
    };
    emit(a.output.as_deref(), plot::render(&figure).as_bytes())
}
