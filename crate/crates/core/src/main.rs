//! Command-line front end: evaluate the finite-N velocity law, draw
//! samples, run the collision verifier, and emit the figure data files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use shellgas::analysis::{
    convergence_report, figure1_series, figure2_series, ks_test, quad_pdf_integral, GridSpec,
};
use shellgas::distribution::{FiniteNDistribution, GasParams, MaxwellianDistribution};
use shellgas::sampler::{sample_marginal, RngSeed};
use shellgas::shellsim::{run_instrumented, InitMode, SimConfig};
use shellgas::specialfn::gamma_factor;

#[derive(Parser)]
#[command(
    name = "shellgas",
    version,
    about = "Finite-N molecular velocity statistics on the constant-energy shell"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the velocity density and its Gaussian limit on a grid
    Pdf(EvalArgs),
    /// Tabulate the cumulative distribution on a grid
    Cdf(EvalArgs),
    /// Draw seeded velocity samples from the finite-N law
    Sample(SampleArgs),
    /// Closed-form moments, quadrature oracles, and their discrepancies
    Moments(MomentsArgs),
    /// Mean-speed ratio table for N = 1..=n-max
    Gamma(GammaArgs),
    /// Distance metrics between the finite-N law and the Gaussian limit
    Converge(ConvergeArgs),
    /// Pair-collision run checked against the closed-form distribution
    Simulate(SimulateArgs),
    /// Write the figure1.csv and figure2.csv data files
    Figures(FiguresArgs),
}

#[derive(Args)]
struct GasArgs {
    /// Number of molecules N (at least 2)
    #[arg(long, default_value_t = 3)]
    n_molecules: u64,
    /// Molecular mass m
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    /// Boltzmann constant k
    #[arg(long, default_value_t = 1.0)]
    boltzmann: f64,
    /// Temperature T
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
}

impl GasArgs {
    fn to_params(&self) -> shellgas::Result<GasParams> {
        GasParams::new(
            self.n_molecules,
            self.mass,
            self.boltzmann,
            self.temperature,
        )
    }
}

#[derive(Args)]
struct OutArgs {
    /// Write to this file instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    gas: GasArgs,
    /// Evaluation grid as min:max:points
    #[arg(long, value_parser = parse_grid, default_value = "-4:4:401", allow_hyphen_values = true)]
    grid: GridSpec,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    gas: GasArgs,
    /// Number of velocities to draw
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Stream seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    gas: GasArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GammaArgs {
    /// Largest N in the table
    #[arg(long, default_value_t = 1000)]
    n_max: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Comma-separated list of N values
    #[arg(long, value_delimiter = ',', default_value = "3,10,100,1000")]
    n_list: Vec<u64>,
    /// Grid for the sup-norm and stored density columns
    #[arg(long, value_parser = parse_grid, default_value = "-8:8:3201", allow_hyphen_values = true)]
    grid: GridSpec,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    gas: GasArgs,
    /// Total collision steps
    #[arg(long, default_value_t = 1_000_000)]
    steps: u64,
    /// Steps discarded before sampling starts
    #[arg(long, default_value_t = 10_000)]
    burn_in: u64,
    /// Steps between recorded samples
    #[arg(long, default_value_t = 10)]
    stride: u64,
    /// Initial microstate
    #[arg(long, value_enum, default_value_t = Init::EqualSpeeds)]
    init: Init,
    /// Stream seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Init {
    EqualSpeeds,
    ShellUniform,
}

impl From<Init> for InitMode {
    fn from(value: Init) -> Self {
        match value {
            Init::EqualSpeeds => InitMode::EqualSpeeds,
            Init::ShellUniform => InitMode::ShellUniform,
        }
    }
}

#[derive(Args)]
struct FiguresArgs {
    /// Directory the two CSV files are written into
    #[arg(long, default_value = ".")]
    output: PathBuf,
    /// Largest N in the figure2 table
    #[arg(long, default_value_t = 1000)]
    n_max: u64,
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, points] = parts.as_slice() else {
        return Err(format!("expected min:max:points, got '{s}'"));
    };
    let min: f64 = min.parse().map_err(|_| format!("bad grid min '{min}'"))?;
    let max: f64 = max.parse().map_err(|_| format!("bad grid max '{max}'"))?;
    let points: usize = points
        .parse()
        .map_err(|_| format!("bad grid point count '{points}'"))?;
    GridSpec::new(min, max, points).map_err(|e| e.to_string())
}

enum CliError {
    Lib(shellgas::Error),
    Io(std::io::Error),
}

impl From<shellgas::Error> for CliError {
    fn from(e: shellgas::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Decimal notation with 10 significant digits, locale-independent.
fn fmt_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (9 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

fn emit(out: &OutArgs, content: &str) -> std::io::Result<()> {
    match &out.output {
        Some(path) => fs::write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_sidecar(data_path: &Path, meta: &serde_json::Value) -> std::io::Result<()> {
    let mut name = data_path.as_os_str().to_owned();
    name.push(".meta.json");
    let mut body = serde_json::to_string_pretty(meta).expect("static metadata serializes");
    body.push('\n');
    fs::write(PathBuf::from(name), body)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Pdf(args) => cmd_pdf(&args),
        Command::Cdf(args) => cmd_cdf(&args),
        Command::Sample(args) => cmd_sample(&args),
        Command::Moments(args) => cmd_moments(&args),
        Command::Gamma(args) => cmd_gamma(&args),
        Command::Converge(args) => cmd_converge(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Figures(args) => cmd_figures(&args),
    }
}

fn cmd_pdf(args: &EvalArgs) -> Result<ExitCode, CliError> {
    let params = args.gas.to_params()?;
    let dist = FiniteNDistribution::new(params)?;
    let maxwell = MaxwellianDistribution::from_params(&params);
    let vs = args.grid.linspace();
    let mut f = Vec::with_capacity(vs.len());
    let mut fm = Vec::with_capacity(vs.len());
    for &v in &vs {
        f.push(dist.pdf(v)?);
        fm.push(maxwell.pdf(v)?);
    }
    let content = match args.out.format {
        Format::Csv => {
            let mut s = String::from("v,f,f_maxwell\n");
            for i in 0..vs.len() {
                writeln!(
                    s,
                    "{},{},{}",
                    fmt_sig10(vs[i]),
                    fmt_sig10(f[i]),
                    fmt_sig10(fm[i])
                )
                .expect("string write");
            }
            s
        }
        Format::Json => {
            let mut s = json!({ "v": vs, "f": f, "f_maxwell": fm }).to_string();
            s.push('\n');
            s
        }
    };
    emit(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_cdf(args: &EvalArgs) -> Result<ExitCode, CliError> {
    let params = args.gas.to_params()?;
    let dist = FiniteNDistribution::new(params)?;
    let vs = args.grid.linspace();
    let mut c = Vec::with_capacity(vs.len());
    for &v in &vs {
        c.push(dist.cdf(v)?);
    }
    let content = match args.out.format {
        Format::Csv => {
            let mut s = String::from("v,cdf\n");
            for i in 0..vs.len() {
                writeln!(s, "{},{}", fmt_sig10(vs[i]), fmt_sig10(c[i])).expect("string write");
            }
            s
        }
        Format::Json => {
            let mut s = json!({ "v": vs, "cdf": c }).to_string();
            s.push('\n');
            s
        }
    };
    emit(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample(args: &SampleArgs) -> Result<ExitCode, CliError> {
    let params = args.gas.to_params()?;
    let dist = FiniteNDistribution::new(params)?;
    let batch = sample_marginal(&dist, RngSeed(args.seed), args.count)?;
    let content = match args.out.format {
        Format::Csv => {
            let mut s = String::from("v\n");
            for v in batch.values() {
                writeln!(s, "{}", fmt_sig10(*v)).expect("string write");
            }
            s
        }
        Format::Json => {
            let mut s = json!({ "values": batch.values() }).to_string();
            s.push('\n');
            s
        }
    };
    emit(&args.out, &content)?;
    if let Some(path) = &args.out.output {
        write_sidecar(
            path,
            &json!({
                "n_molecules": params.n_molecules(),
                "mass": params.mass(),
                "boltzmann": params.boltzmann(),
                "temperature": params.temperature(),
                "seed": args.seed,
                "count": batch.count(),
            }),
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_moments(args: &MomentsArgs) -> Result<ExitCode, CliError> {
    let params = args.gas.to_params()?;
    let dist = FiniteNDistribution::new(params)?;
    let (maxwell_v2, maxwell_speed) = MaxwellianDistribution::from_params(&params).moments();
    let quad_v2 = quad_pdf_integral(&dist, 2)?;
    let quad_speed = quad_pdf_integral(&dist, 1)?;
    let rows: Vec<(&str, f64)> = vec![
        ("expected_v2", dist.expected_v2()),
        ("expected_speed", dist.expected_speed()),
        ("gamma", gamma_factor(params.n_molecules())?),
        ("maxwell_v2", maxwell_v2),
        ("maxwell_speed", maxwell_speed),
        ("quad_v2", quad_v2),
        ("quad_speed", quad_speed),
        ("v2_discrepancy", (quad_v2 - dist.expected_v2()).abs()),
        (
            "speed_discrepancy",
            (quad_speed - dist.expected_speed()).abs(),
        ),
    ];
    let content = match args.out.format {
        Format::Csv => {
            let mut s = String::from("quantity,value\n");
            writeln!(s, "n_molecules,{}", params.n_molecules()).expect("string write");
            for (key, value) in &rows {
                writeln!(s, "{key},{}", fmt_sig10(*value)).expect("string write");
            }
            s
        }
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("n_molecules".into(), json!(params.n_molecules()));
            for (key, value) in &rows {
                obj.insert((*key).into(), json!(value));
            }
            let mut s = serde_json::Value::Object(obj).to_string();
            s.push('\n');
            s
        }
    };
    emit(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gamma(args: &GammaArgs) -> Result<ExitCode, CliError> {
    let rows = figure2_series(args.n_max)?;
    let content = match args.out.format {
        Format::Csv => {
            let mut s = String::from("N,gamma\n");
            for (n, g) in &rows {
                writeln!(s, "{n},{}", fmt_sig10(*g)).expect("string write");
            }
            s
        }
        Format::Json => {
            let ns: Vec<u64> = rows.iter().map(|r| r.0).collect();
            let gs: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let mut s = json!({ "n": ns, "gamma": gs }).to_string();
            s.push('\n');
            s
        }
    };
    emit(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_converge(args: &ConvergeArgs) -> Result<ExitCode, CliError> {
    let report = convergence_report(&args.n_list, &args.grid)?;
    let content = match args.out.format {
        Format::Csv => {
            let mut s = String::from("n,sup_norm,total_variation,kl_divergence\n");
            for i in 0..report.n_values.len() {
                writeln!(
                    s,
                    "{},{},{},{}",
                    report.n_values[i],
                    fmt_sig10(report.sup_norm[i]),
                    fmt_sig10(report.total_variation[i]),
                    fmt_sig10(report.kl_divergence[i]),
                )
                .expect("string write");
            }
            s
        }
        Format::Json => {
            let mut s = json!({
                "n_values": report.n_values,
                "sup_norm": report.sup_norm,
                "total_variation": report.total_variation,
                "kl_divergence": report.kl_divergence,
            })
            .to_string();
            s.push('\n');
            s
        }
    };
    emit(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode, CliError> {
    let params = args.gas.to_params()?;
    let config = SimConfig {
        params,
        steps: args.steps,
        burn_in: args.burn_in,
        sample_stride: args.stride,
        seed: RngSeed(args.seed),
        init_mode: args.init.into(),
    };
    let (batch, drift) = run_instrumented(&config)?;
    let dist = FiniteNDistribution::new(params)?;
    let gof = ks_test(batch.values(), |v| {
        dist.cdf(v).expect("simulated velocities are finite")
    })?;
    if let Some(path) = &args.out.output {
        let mut data = String::from("v\n");
        for v in batch.values() {
            writeln!(data, "{}", fmt_sig10(*v)).expect("string write");
        }
        fs::write(path, data)?;
        write_sidecar(
            path,
            &json!({
                "n_molecules": params.n_molecules(),
                "mass": params.mass(),
                "boltzmann": params.boltzmann(),
                "temperature": params.temperature(),
                "seed": args.seed,
                "count": batch.count(),
                "steps": args.steps,
                "burn_in": args.burn_in,
                "stride": args.stride,
            }),
        )?;
    }
    match args.out.format {
        Format::Csv => {
            print!(
                "samples,{}\nenergy_drift,{}\nks_statistic,{}\np_value,{}\n",
                batch.count(),
                fmt_sig10(drift),
                fmt_sig10(gof.statistic),
                fmt_sig10(gof.p_value),
            );
        }
        Format::Json => {
            println!(
                "{}",
                json!({
                    "samples": batch.count(),
                    "energy_drift": drift,
                    "ks_statistic": gof.statistic,
                    "p_value": gof.p_value,
                })
            );
        }
    }
    Ok(if gof.p_value >= 0.01 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_figures(args: &FiguresArgs) -> Result<ExitCode, CliError> {
    let table = figure1_series(&[3, 4, 5, 10], 0.01)?;
    let mut fig1 = String::from("vbar,F3,F4,F5,F10,FM\n");
    for j in 0..table.vbar.len() {
        writeln!(
            fig1,
            "{:.2},{:.10},{:.10},{:.10},{:.10},{:.10}",
            table.vbar[j],
            table.finite[0][j],
            table.finite[1][j],
            table.finite[2][j],
            table.finite[3][j],
            table.maxwell[j],
        )
        .expect("string write");
    }
    fs::write(args.output.join("figure1.csv"), fig1)?;
    let rows = figure2_series(args.n_max)?;
    let mut fig2 = String::from("N,gamma\n");
    for (n, g) in &rows {
        writeln!(fig2, "{n},{g:.10}").expect("string write");
    }
    fs::write(args.output.join("figure2.csv"), fig2)?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig10_covers_magnitudes_and_specials() {
        assert_eq!(fmt_sig10(0.0), "0");
        assert_eq!(fmt_sig10(1.0), "1.000000000");
        assert_eq!(fmt_sig10(0.5), "0.5000000000");
        assert_eq!(fmt_sig10(-123.456), "-123.4560000");
        assert_eq!(fmt_sig10(1.0e-12), "0.000000000001000000000");
        assert_eq!(fmt_sig10(1.23456789012e10), "12345678901");
        assert_eq!(fmt_sig10(f64::INFINITY), "inf");
        assert_eq!(fmt_sig10(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_sig10(f64::NAN), "nan");
    }

    #[test]
    fn grid_strings_parse_or_explain() {
        let grid = parse_grid("-4:4:401").unwrap();
        let vs = grid.linspace();
        assert_eq!(vs.len(), 401);
        assert_eq!(vs[0], -4.0);
        assert_eq!(vs[400], 4.0);

        assert!(parse_grid("1:2").unwrap_err().contains("min:max:points"));
        assert!(parse_grid("a:2:10").unwrap_err().contains("grid min"));
        assert!(parse_grid("1:b:10").unwrap_err().contains("grid max"));
        assert!(parse_grid("1:2:many").unwrap_err().contains("point count"));
        assert!(parse_grid("2:1:10").is_err(), "reversed bounds");
        assert!(
            parse_grid("1:2:1").is_err(),
            "single point spans no interval"
        );
    }
}
