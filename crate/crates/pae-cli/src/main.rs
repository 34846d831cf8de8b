use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use pae_core::experiments::{self, config::parse_backend, verify};
use pae_core::pae_driver::Backend;
use pae_core::qsp_synthesis::{format_angles, select_l, select_l_empirical, PhaseShifterSpec};
use pae_core::{PaeError, SolveMethod};

/// Default output directory when neither `--out-dir` nor the config sets one.
const OUT_ENV: &str = "PAE_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "pae",
    version,
    about = "Parallel amplitude estimation experiments"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a config file.
    Run(RunArgs),
    /// Synthesize phase-shifter angles and write them to a file.
    Angles(AnglesArgs),
    /// Run the invariant suite.
    Verify,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Overrides the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// analytic, ideal, statevector or statevector:random:<seed>.
    #[arg(long, value_parser = parse_backend)]
    backend: Option<Backend>,
    /// Output directory; beats the config's `output` and $PAE_OUTPUT_DIR.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
#[group(id = "length", multiple = false)]
struct LengthArgs {
    /// Query length (even).
    #[arg(long = "L")]
    l: Option<usize>,
    /// Target operator error; L is chosen from it.
    #[arg(long = "eps-oc")]
    eps_oc: Option<f64>,
}

#[derive(Args)]
struct AnglesArgs {
    #[arg(long = "T")]
    t: f64,
    #[command(flatten)]
    length: LengthArgs,
    #[arg(long)]
    out: PathBuf,
}

fn run(args: RunArgs) -> Result<(), PaeError> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = experiments::parse(&text)
        .map_err(|e| PaeError::Config(format!("{}: {e}", args.config.display())))?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(b) = args.backend {
        cfg.backend = b;
    }
    let dir = args
        .out_dir
        .or_else(|| cfg.output.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("pae-out"));
    let start = Instant::now();
    let mut art = experiments::execute(&cfg)?;
    // Name files after the config so runs of the same kind can share a directory.
    if let Some(stem) = args.config.file_stem().and_then(|s| s.to_str()) {
        let kind = cfg.kind.name();
        for (name, _) in art.csv.iter_mut().chain(art.svg.iter_mut()) {
            *name = match name.strip_prefix(kind) {
                Some(rest) => format!("{stem}{rest}"),
                None => format!("{stem}_{name}"),
            };
        }
    }
    for p in experiments::write_artifacts(&dir, &art)? {
        println!("wrote {}", p.display());
    }
    eprintln!("{} finished in {:.1?}", cfg.kind.name(), start.elapsed());
    Ok(())
}

fn angles(args: AnglesArgs) -> Result<(), PaeError> {
    let l = match (args.length.l, args.length.eps_oc) {
        (Some(l), _) => l,
        (None, Some(eps)) => select_l(args.t, eps)?,
        (None, None) => select_l_empirical(args.t),
    };
    let spec = PhaseShifterSpec::synthesize(args.t, l, &SolveMethod::LayerPeel)?;
    std::fs::write(&args.out, format_angles(&spec))?;
    println!(
        "T={} L={} residual={:.3e} eps_oc={:.3e} -> {}",
        spec.t,
        spec.l,
        spec.angles.residual,
        spec.eps_oc,
        args.out.display()
    );
    Ok(())
}

fn verify_all() -> bool {
    let mut ok = true;
    for c in verify::run_all() {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        ok &= c.passed;
    }
    ok
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let res = match cli.cmd {
        Cmd::Run(a) => run(a),
        Cmd::Angles(a) => angles(a),
        Cmd::Verify => {
            return if verify_all() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            };
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
