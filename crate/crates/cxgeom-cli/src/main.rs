use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use cxgeom::verify::{self, Check, ReportFormat, SuiteOptions, SUITES};
use cxgeom::GeomError;
use serde::Deserialize;
use serde_json::{json, Value};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(name = "cxgeom", version, about = "Geometry check suites and one-off computations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Seed for every stochastic step (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplier applied to upper tolerances.
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// TOML file with `[run]` and `[tolerances]` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a named check suite, or `all`.
    Verify { suite: String },
    #[command(subcommand)]
    Dbar(DbarCmd),
    #[command(subcommand)]
    Sigma(SigmaCmd),
    #[command(subcommand)]
    Jspace(JspaceCmd),
    #[command(subcommand)]
    Spinor(SpinorCmd),
    #[command(subcommand)]
    Curvlab(CurvlabCmd),
    #[command(subcommand)]
    Gauge(GaugeCmd),
    /// Re-emit a stored JSON report and exit by its verdict.
    Report { file: PathBuf },
}

#[derive(Subcommand)]
enum DbarCmd {
    /// Solve ∂̄G = GA on a square by the Neumann series.
    Solve {
        #[arg(long, value_enum, default_value_t = DbarFixture::Manufactured)]
        fixture: DbarFixture,
        #[arg(long, default_value_t = 65)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DbarFixture {
    Manufactured,
    Generic,
}

#[derive(Subcommand)]
enum SigmaCmd {
    /// Harmonicity, holomorphy type, charge and nilpotency of a fixture.
    Classify {
        #[arg(long, value_enum)]
        fixture: SigmaFixture,
        #[arg(long, default_value_t = 65)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, value_enum, default_value_t = DerivKind::Analytic)]
        deriv: DerivKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SigmaFixture {
    Cp1Identity,
    Cp1Conjugate,
    Cp1Square,
    Cp1Nonharmonic,
    Cp2VeroneseMiddle,
    Cp2Generic,
}

#[derive(Clone, Copy, ValueEnum)]
enum DerivKind {
    Analytic,
    Grid,
}

#[derive(Subcommand)]
enum JspaceCmd {
    /// Self-duality against pure type, sampled over complex structures.
    Lemma77 {
        #[arg(long, default_value_t = 2)]
        ell: usize,
        #[arg(long, value_enum, default_value_t = FormKind::Mixed)]
        form: FormKind,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormKind {
    /// Random form projected to the H₊ side.
    Plus,
    /// Random form projected to the H₋ side.
    Minus,
    /// Random form with both parts.
    Mixed,
}

#[derive(Subcommand)]
enum SpinorCmd {
    /// J → vacuum spinor → J over random complex structures.
    Roundtrip {
        #[arg(long, default_value_t = 3)]
        ell: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum CurvlabCmd {
    /// Curvature diagnostics of a Gibbons–Hawking chart.
    Gh {
        #[arg(long, value_enum, default_value_t = GhFixture::TwoCenter)]
        fixture: GhFixture,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GhFixture {
    OneCenter,
    TwoCenter,
}

#[derive(Subcommand)]
enum GaugeCmd {
    /// BPST instanton duality, field equation and charge.
    Bpst {
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 20)]
        probes: usize,
    },
    /// τ/σ residuals and equivalence verdict for a frame-section fixture.
    Tau {
        /// JSON object such as {"fixture": "schwarzschild", "mass": 1.0}.
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Config(String),
    Runtime(String),
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    run: RunSection,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    seed: Option<u64>,
    tol_scale: Option<f64>,
}

fn options(common: &Common) -> Result<SuiteOptions, Failure> {
    let file = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            toml::from_str::<ConfigFile>(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => ConfigFile::default(),
    };
    let defaults = SuiteOptions::default();
    let opts = SuiteOptions {
        seed: common.seed.or(file.run.seed).unwrap_or(defaults.seed),
        tol_scale: common.tol_scale.or(file.run.tol_scale).unwrap_or(defaults.tol_scale),
        tolerances: file.tolerances,
    };
    opts.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(opts)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(p) => std::fs::File::create(p)
            .map(|f| Box::new(std::io::BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn emit_checks(common: &Common, checks: &[Check]) -> Result<u8, Failure> {
    let format = match common.format {
        Format::Json => ReportFormat::Json,
        Format::Csv => ReportFormat::Csv,
    };
    let mut w = sink(&common.out)?;
    format.write(checks, &mut w)?;
    w.flush().map_err(|e| Failure::Runtime(e.to_string()))?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("{} of {} checks failed: {}", failed.len(), checks.len(), failed.join(", "));
        Ok(EXIT_FAIL)
    }
}

fn emit_value(common: &Common, v: &Value) -> Result<u8, Failure> {
    if let Format::Csv = common.format {
        return Err(Failure::Usage("this command only writes JSON".into()));
    }
    let mut w = sink(&common.out)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| Failure::Runtime(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(0)
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn run_verify(common: &Common, suite: &str) -> Result<u8, Failure> {
    if suite != "all" && !SUITES.contains(&suite) {
        return Err(Failure::Usage(format!("unknown suite {suite:?}; expected one of {}, all", SUITES.join(", "))));
    }
    let opts = options(common)?;
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut checks = Vec::new();
    for s in names {
        let t = Instant::now();
        let got = verify::run_suite(s, &opts)?;
        eprintln!("{s}: {} checks in {:.2}s", got.len(), t.elapsed().as_secs_f64());
        checks.extend(got);
    }
    emit_checks(common, &checks)
}

fn run_dbar(common: &Common, cmd: &DbarCmd) -> Result<u8, Failure> {
    use cxgeom::dbar::{fixtures, gauge_solve, relative_gauge_residual, square_spec, CauchyQuadrature};
    let DbarCmd::Solve { fixture, n } = *cmd;
    if n < 9 {
        return Err(Failure::Usage(format!("--n {n} is too coarse (need at least 9)")));
    }
    let spec = square_spec(1.0, n, 1);
    let a = match fixture {
        DbarFixture::Manufactured => fixtures::manufactured(spec),
        DbarFixture::Generic => fixtures::generic(spec, options(common)?.seed),
    };
    let sol = gauge_solve(&a, &CauchyQuadrature::for_slice(&a.spec, 0))?;
    let residual = relative_gauge_residual(&sol.g, &a, &sol.cutoff)?;
    emit_value(
        common,
        &json!({
            "n": n,
            "relative_residual": residual,
            "contraction_bound": sol.contraction_bound,
            "iterate_norms": sol.iterate_norms,
        }),
    )
}

fn run_sigma(common: &Common, cmd: &SigmaCmd) -> Result<u8, Failure> {
    use cxgeom::sigma::{fixtures, report, Deriv, ProjectorField};
    use cxgeom::tensor::GridSpec;
    let SigmaCmd::Classify { fixture, n, radius, deriv } = *cmd;
    if n < 9 || !(radius > 0.0) {
        return Err(Failure::Usage("need --n ≥ 9 and --radius > 0".into()));
    }
    let (name, closure) = match fixture {
        SigmaFixture::Cp1Identity => ("cp1-identity", fixtures::cp1_identity()),
        SigmaFixture::Cp1Conjugate => ("cp1-conjugate", fixtures::cp1_conjugate()),
        SigmaFixture::Cp1Square => ("cp1-square", fixtures::cp1_square()),
        SigmaFixture::Cp1Nonharmonic => ("cp1-nonharmonic", fixtures::cp1_nonharmonic()),
        SigmaFixture::Cp2VeroneseMiddle => ("cp2-veronese-middle", fixtures::cp2_veronese_middle()),
        SigmaFixture::Cp2Generic => ("cp2-generic", fixtures::cp2_generic()),
    };
    let field = ProjectorField::from_closure(GridSpec::cube(2, -radius, radius, n), 1, closure)?;
    let d = match deriv {
        DerivKind::Analytic => Deriv::Analytic,
        DerivKind::Grid => Deriv::Grid,
    };
    emit_value(common, &to_json(&report(name, &field, d)?))
}

fn run_jspace(common: &Common, cmd: &JspaceCmd) -> Result<u8, Failure> {
    use cxgeom::jspace::{selfduality_pure_equivalence, twisted_star};
    use cxgeom::tensor::{basis::binomial, ExteriorForm};
    let JspaceCmd::Lemma77 { ell, form, samples } = *cmd;
    if !(1..=4).contains(&ell) || samples == 0 {
        return Err(Failure::Usage("need 1 ≤ --ell ≤ 4 and --samples > 0".into()));
    }
    let seed = options(common)?.seed;
    let n = 2 * ell;
    let mut g = cxgeom::rng::seeded(seed, "cli.jspace.form");
    let w = ExteriorForm { n, degree: ell, coeffs: (0..binomial(n, ell)).map(|_| cxgeom::rng::cnormal(&mut g)).collect() };
    let ts = twisted_star(&w);
    let w = match form {
        FormKind::Plus => w.sub(&ts).scale(0.5),
        FormKind::Minus => w.add(&ts).scale(0.5),
        FormKind::Mixed => w,
    };
    emit_value(common, &to_json(&selfduality_pure_equivalence(&w, samples, seed)?))
}

fn run_spinor(common: &Common, cmd: &SpinorCmd) -> Result<u8, Failure> {
    let SpinorCmd::Roundtrip { ell, samples } = *cmd;
    if !(1..=5).contains(&ell) {
        return Err(Failure::Usage("need 1 ≤ --ell ≤ 5".into()));
    }
    let seed = options(common)?.seed;
    emit_value(common, &to_json(&cxgeom::spinor::roundtrip(ell, samples, seed)?))
}

fn run_curvlab(common: &Common, cmd: &CurvlabCmd) -> Result<u8, Failure> {
    use cxgeom::curvlab::{
        asd_triplet_closure, gibbons_hawking_chart, riemann_selfduality, two_center_fixture, GibbonsHawkingData,
        GH_PROBES,
    };
    let CurvlabCmd::Gh { fixture } = *cmd;
    let data = match fixture {
        GhFixture::OneCenter => GibbonsHawkingData::new(0.0, vec![[0.0; 3]], vec![1.0])?,
        GhFixture::TwoCenter => two_center_fixture(),
    };
    let chart = gibbons_hawking_chart(&data)?;
    let probes: Vec<Value> = GH_PROBES
        .iter()
        .map(|p| riemann_selfduality(&chart, p, 1.0).map(|r| json!({"x": p, "report": to_json(&r)})))
        .collect::<Result<_, _>>()?;
    let triplet = asd_triplet_closure(&data, [1.6, 1.2, 0.9], 0.25, 17)?;
    emit_value(common, &json!({"probes": probes, "triplet_closure": triplet}))
}

fn run_gauge(common: &Common, cmd: &GaugeCmd) -> Result<u8, Failure> {
    use cxgeom::gaugelab::einstein_cartan::sigma_identity_fd;
    use cxgeom::gaugelab::yang_mills::duality_residuals;
    use cxgeom::gaugelab::{
        bpst, conservation_form_residual, einstein_equivalence_check, tau_sigma, topological_charge, ym_residual,
        SectionFixture,
    };
    match cmd {
        GaugeCmd::Bpst { rho, probes } => {
            if !(*rho > 0.0) || *probes == 0 {
                return Err(Failure::Usage("need --rho > 0 and --probes > 0".into()));
            }
            let a = bpst(*rho, [0.0; 4])?;
            let mut g = cxgeom::rng::seeded(options(common)?.seed, "cli.gauge.probes");
            let (mut asd, mut sd, mut ym, mut cons) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for _ in 0..*probes {
                let x = [0; 4].map(|_| cxgeom::rng::uniform(&mut g, -2.0 * rho, 2.0 * rho));
                let (p, m) = duality_residuals(&a, &x)?;
                asd = asd.max(p);
                sd = sd.max(m);
                ym = ym.max(ym_residual(&a, &x)?);
                cons = cons.max(conservation_form_residual(&a, &x)?);
            }
            let charge = topological_charge(&a, [0.0; 4], 50.0 * rho)?;
            emit_value(
                common,
                &json!({
                    "rho": rho,
                    "probes": probes,
                    "max_f_plus_star_f": asd,
                    "max_f_minus_star_f": sd,
                    "max_ym_residual": ym,
                    "max_conservation_residual": cons,
                    "charge": to_json(&charge),
                }),
            )
        }
        GaugeCmd::Tau { metric, tol } => {
            let text = std::fs::read_to_string(metric).map_err(|e| Failure::Config(format!("{}: {e}", metric.display())))?;
            let fixture: SectionFixture =
                serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", metric.display())))?;
            let section = fixture.build()?;
            let probes = fixture.default_probes();
            let mut rows = Vec::new();
            for x in &probes {
                let (_, res) = tau_sigma(&section, x)?;
                let fd = (sigma_identity_fd(&section, x, 1e-2)?, sigma_identity_fd(&section, x, 5e-3)?);
                rows.push(json!({"x": x, "residuals": to_json(&res), "sigma_identity_fd": [fd.0, fd.1]}));
            }
            let verdict = einstein_equivalence_check(&section, &probes, *tol)?;
            emit_value(common, &json!({"fixture": to_json(&fixture), "probes": rows, "verdict": to_json(&verdict)}))
        }
    }
}

fn run_report(common: &Common, file: &Path) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| Failure::Runtime(format!("{}: {e}", file.display())))?;
    let checks = verify::read_json(&text).map_err(|e| Failure::Config(format!("{}: {e}", file.display())))?;
    emit_checks(common, &checks)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let c = &cli.common;
    match &cli.cmd {
        Cmd::Verify { suite } => run_verify(c, suite),
        Cmd::Dbar(cmd) => run_dbar(c, cmd),
        Cmd::Sigma(cmd) => run_sigma(c, cmd),
        Cmd::Jspace(cmd) => run_jspace(c, cmd),
        Cmd::Spinor(cmd) => run_spinor(c, cmd),
        Cmd::Curvlab(cmd) => run_curvlab(c, cmd),
        Cmd::Gauge(cmd) => run_gauge(c, cmd),
        Cmd::Report { file } => run_report(c, file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", Cli::command().render_usage());
            EXIT_USAGE
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    };
    eprintln!("elapsed {:.2}s", start.elapsed().as_secs_f64());
    ExitCode::from(code)
}
