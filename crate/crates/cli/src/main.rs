use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qgroup_core::export::{export_qg, import_qg};
use qgroup_core::pipeline::{run_analysis, run_pipeline, PipelineConfig};
use qgroup_core::report::VerificationReport;
use qgroup_core::spec_file::{builtin, QGSpecFile};
use qgroup_core::{Error, Result, Tolerance};

#[derive(Parser)]
#[command(name = "qgroup", version, about = "Build and verify finite quantum groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the quantum group and check its axioms and Haar weights.
    Build(RunArgs),
    /// Run every verification suite.
    Verify(RunArgs),
    /// Build the dual and run the suites on it.
    Dualize(RunArgs),
    /// Run the pipeline and write the computed operators to a file.
    Export {
        #[command(flatten)]
        run: RunArgs,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        /// Leave the dual section out.
        #[arg(long)]
        no_dual: bool,
    },
    /// Read an exported file, validate it and recompute its operators.
    Import {
        /// Exported file.
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Render a saved JSON report.
    Report {
        /// Report written by `--report PATH --format json`.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Spec file (JSON).
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    spec: Option<PathBuf>,
    /// Bundled example such as c-s3, l-q8 or kp.
    #[arg(long)]
    example: Option<String>,
    /// Relative tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// External dimensions for the strengthened invariance check.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    kdims: Vec<usize>,
    /// Random samples per dimension.
    #[arg(long, default_value_t = 20)]
    batch: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn tolerance(rel: f64) -> Result<Tolerance> {
    Tolerance::new(rel, Tolerance::default().abs.min(rel))
}

impl RunArgs {
    fn spec(&self) -> Result<QGSpecFile> {
        match (&self.spec, &self.example) {
            (Some(path), _) => QGSpecFile::load(path),
            (None, Some(name)) => builtin(name),
            (None, None) => Err(Error::SpecInvalid("pass --spec or --example".into())),
        }
    }

    fn config(&self, skip_dual: bool) -> Result<PipelineConfig> {
        if self.kdims.contains(&0) {
            return Err(Error::SpecInvalid("--kdims entries must be positive".into()));
        }
        Ok(PipelineConfig {
            tol: tolerance(self.tol)?,
            seed: self.seed,
            kdims: self.kdims.clone(),
            batch: self.batch,
            skip_dual,
            ..Default::default()
        })
    }
}

fn emit(report: &VerificationReport, out: &OutputArgs) -> Result<()> {
    let text = match out.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    match &out.report {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn status(report: &VerificationReport) -> ExitCode {
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn build(args: &RunArgs) -> Result<VerificationReport> {
    let spec = args.spec()?;
    let cfg = args.config(true)?;
    let raw = spec.structure()?;
    let mut rep = VerificationReport::new();
    rep.merge(raw.alg.axioms_check(cfg.tol).prefixed("axioms"));
    rep.merge(
        qgroup_core::builders::comultiplication_check(&raw.alg, &raw.comul, cfg.tol).prefixed("comultiplication"),
    );
    if rep.all_pass() {
        match spec.build(cfg.tol) {
            Ok(qg) => {
                rep.check("haar.left_unique", "θ = r φ", (qg.left_nullity as f64 - 1.0).abs(), 0.0);
                rep.check("haar.right_unique", "θ = r ψ", (qg.right_nullity as f64 - 1.0).abs(), 0.0);
                eprintln!("{}: dimension {}", qg.name, qg.dim());
                eprintln!("  φ = {}", fmt_coeffs(&qg.phi.coeffs));
                eprintln!("  ψ = {}", fmt_coeffs(&qg.psi.coeffs));
            }
            Err(e) => rep.skip("haar.unique", "θ = r φ", e.to_string()),
        }
    }
    rep.set_example(&raw.name);
    Ok(rep)
}

fn fmt_coeffs(v: &qgroup_core::CVector) -> String {
    let parts: Vec<String> = v
        .iter()
        .map(|z| if z.im.abs() < 1e-14 { format!("{:.6}", z.re) } else { format!("{:.6}{:+.6}i", z.re, z.im) })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn dualize(args: &RunArgs) -> Result<VerificationReport> {
    let spec = args.spec()?;
    let out = run_pipeline(&spec, &args.config(false)?)?;
    let Some((d, _)) = &out.dual else {
        let mut rep = out.report;
        rep.skip("dual.build", "dual quantum group", "dual could not be built");
        return Ok(rep);
    };
    eprintln!("{}: dimension {}, ν = {}", d.name(), d.dim(), d.nu);
    let (rep, _) = run_analysis(d, &args.config(false)?);
    Ok(rep)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build(args) => {
            let rep = build(&args)?;
            emit(&rep, &args.output)?;
            Ok(status(&rep))
        }
        Command::Verify(args) => {
            let out = run_pipeline(&args.spec()?, &args.config(false)?)?;
            emit(&out.report, &args.output)?;
            Ok(status(&out.report))
        }
        Command::Dualize(args) => {
            let rep = dualize(&args)?;
            emit(&rep, &args.output)?;
            Ok(status(&rep))
        }
        Command::Export { run, out, no_dual } => {
            let result = run_pipeline(&run.spec()?, &run.config(no_dual)?)?;
            export_qg(&result, &out)?;
            eprintln!("wrote {}", out.display());
            emit(&result.report, &run.output)?;
            Ok(status(&result.report))
        }
        Command::Import { file, output, tol } => {
            let tol = tolerance(tol)?;
            let data = import_qg(&file, tol)?;
            if !data.absent.is_empty() {
                eprintln!("absent sections: {}", data.absent.join(", "));
            }
            let rep = data.revalidate(tol)?;
            emit(&rep, &output)?;
            Ok(status(&rep))
        }
        Command::Report { input, output } => {
            let rep = load_report(&input)?;
            emit(&rep, &output)?;
            Ok(status(&rep))
        }
    }
}

fn load_report(path: &Path) -> Result<VerificationReport> {
    VerificationReport::from_json(&std::fs::read_to_string(path)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
