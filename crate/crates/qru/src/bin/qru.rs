use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qru::arch::{presets, ParameterSet, QruArchitecture};
use qru::cell::{build_cell_circuit, forward_cell, HiddenState};
use qru::config::ExperimentConfig;
use qru::error::{Error, Result};
use qru::gradient::gradient_check;
use qru::loss::{LossSpec, Sample, Target};

#[derive(Parser)]
#[command(name = "qru", version, about = "Quantum recurrent unit simulator and experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run(RunArgs),
    /// Compare analytic gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// Report closed-form parameter counts next to the published targets.
    ParamCount(ParamCountArgs),
    /// Debug dump of a single cell evaluation.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a TOML experiment config.
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Print per-epoch progress to stderr.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Architecture preset: oscillation, wdbc or mnist35.
    #[arg(long, default_value = "oscillation")]
    arch: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-5)]
    step: f64,
    /// Random samples in the check batch.
    #[arg(long, default_value_t = 3)]
    batch: usize,
    /// Sequence length of each random sample.
    #[arg(long, default_value_t = 6)]
    steps: usize,
    /// Maximum allowed relative discrepancy.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

#[derive(Args)]
struct ParamCountArgs {
    /// Restrict to one preset; default reports all three.
    #[arg(long)]
    arch: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Architecture preset: oscillation, wdbc or mnist35.
    #[arg(long, default_value = "oscillation")]
    arch: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated input values for one time step; zeros when omitted.
    #[arg(long)]
    input: Option<String>,
}

fn preset_or_err(name: &str) -> Result<(QruArchitecture, usize)> {
    presets::by_name(name)
        .ok_or_else(|| Error::Config(format!("unknown preset {name:?}; expected oscillation, wdbc or mnist35")))
}

fn preset_loss(name: &str) -> LossSpec {
    match name {
        "wdbc" => LossSpec::bce(),
        "mnist35" => LossSpec::ce(),
        _ => LossSpec::mse(),
    }
}

fn random_batch(
    arch: &QruArchitecture,
    loss: &LossSpec,
    count: usize,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Sample> {
    (0..count)
        .map(|_| {
            let inputs: Vec<Vec<f64>> = (0..steps)
                .map(|_| (0..arch.input_dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let target = match loss.kind {
                qru::loss::LossKind::Mse => {
                    Target::Series((0..steps).map(|_| rng.random_range(-1.0..1.0)).collect())
                }
                _ => Target::Label(rng.random_range(0..2)),
            };
            Sample { steps: inputs, target }
        })
        .collect()
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(dir) = args.output_dir {
        config.output_dir = dir;
    }
    let output = qru::experiment::run_experiment(&config, args.verbose)?;
    println!("experiment: {}", output.record.experiment);
    println!("seed: {}", output.record.seed);
    if let Some(osc) = &output.record.oscillation {
        println!("seeds run: {}", osc.per_seed.len());
        println!("median train mse: {:.3e}", osc.train_mse_summary.median);
        println!("median test mse:  {:.3e}", osc.test_mse_summary.median);
    }
    if let Some(cls) = &output.record.classification {
        println!("folds run: {}/{}", cls.folds_run, cls.folds_total);
        println!("accuracy:    {:.2}%", 100.0 * cls.accuracy);
        println!("sensitivity: {:.2}%", 100.0 * cls.sensitivity);
        println!("specificity: {:.2}%", 100.0 * cls.specificity);
        println!("precision:   {:.2}%", 100.0 * cls.precision);
        println!("f1:          {:.2}%", 100.0 * cls.f1);
    }
    println!("results: {}", output.results_path.display());
    for p in &output.csv_paths {
        println!("series:  {}", p.display());
    }
    Ok(())
}

fn cmd_gradcheck(args: GradcheckArgs) -> Result<()> {
    let (arch, _) = preset_or_err(&args.arch)?;
    let loss = preset_loss(&args.arch);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let params = ParameterSet::init(&arch, &mut rng);
    let batch = random_batch(&arch, &loss, args.batch, args.steps, &mut rng);
    let discrepancy = gradient_check(&arch, &params, &batch, &loss, args.step)?;
    println!(
        "{}: {} parameters, batch {} × {} steps, fd step {:.1e}",
        args.arch,
        arch.param_count(),
        args.batch,
        args.steps,
        args.step
    );
    println!("max relative discrepancy: {discrepancy:.3e} (tolerance {:.1e})", args.tolerance);
    if discrepancy <= args.tolerance {
        println!("gradcheck: PASS");
        Ok(())
    } else {
        Err(Error::Divergence(format!(
            "gradient discrepancy {discrepancy:.3e} exceeds tolerance {:.1e}",
            args.tolerance
        )))
    }
}

fn cmd_param_count(args: ParamCountArgs) -> Result<()> {
    let names: Vec<&str> = match &args.arch {
        Some(name) => vec![name.as_str()],
        None => vec!["oscillation", "wdbc", "mnist35"],
    };
    println!("{:<12} {:>8} {:>10} {:>9}", "preset", "computed", "published", "match");
    let mut any_mismatch = false;
    for name in names {
        let (arch, published) = preset_or_err(name)?;
        let computed = arch.param_count();
        let matches = computed == published;
        any_mismatch |= !matches;
        println!(
            "{:<12} {:>8} {:>10} {:>9}",
            name,
            computed,
            published,
            if matches { "yes" } else { "MISMATCH" }
        );
    }
    if any_mismatch {
        println!();
        println!("note: computed counts come from the closed form");
        println!("  2·(encoding gates) + (variational angles) + (output scale)");
        println!("with the default update/reset wiring. The published totals are");
        println!("slightly higher; the source description underdetermines the");
        println!("exact wiring, so the gap is reported rather than padded.");
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let (arch, _) = preset_or_err(&args.arch)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let params = ParameterSet::init(&arch, &mut rng);
    let input: Vec<f64> = match &args.input {
        Some(text) => text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Input(format!("bad input value {s:?}")))
            })
            .collect::<Result<_>>()?,
        None => vec![0.0; arch.input_dim()],
    };
    let hidden = HiddenState::zeros(&arch);
    let circuit = build_cell_circuit(&arch, &params, &input, &hidden)?;
    let out = forward_cell(&arch, &params, &input, &hidden)?;

    println!("architecture: {} ({} qubits: {} data, {} hidden, {} ancilla)",
        args.arch, arch.total_qubits(), arch.data_qubits, arch.hidden_qubits, arch.ancilla_qubits);
    println!("parameters: {}", arch.param_count());
    println!("gates per time step: {}", circuit.gates.len());
    println!("input: {input:?}");
    println!("outputs (⟨Z⟩ on {:?}): {:?}", arch.output_qubits, out.outputs);
    println!("next hidden ({} values, Z then X per hidden qubit):", out.next_hidden.values.len());
    for (i, v) in out.next_hidden.values.iter().enumerate() {
        let (basis, q) = if i < arch.hidden_qubits {
            ("Z", arch.hidden_base() + i)
        } else {
            ("X", arch.hidden_base() + i - arch.hidden_qubits)
        };
        println!("  {basis}(q{q}) = {v:+.6}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::ParamCount(args) => cmd_param_count(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
