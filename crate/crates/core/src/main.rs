use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tipping_sim::io::plot::emit_plot_from_csv;
use tipping_sim::io::reproduce::{reproduce_paper, DEFAULT_TOLERANCE};
use tipping_sim::io::{
    export_sweep, export_trajectory, load_scenario_file, RunArtifact, RunPayload,
};
use tipping_sim::scenario::{run_sweep, SweepSpec, SweepTarget};
use tipping_sim::tipping::{closed_form_tipping, run_ensemble};
use tipping_sim::Error;

#[derive(Parser)]
#[command(
    name = "tipsim",
    version,
    about = "Deterministic attention-tipping simulator and analyzer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a trajectory for a scenario file and export it as CSV.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's max_steps.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Also write a JSON run artifact (scenario echo + trajectory).
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    /// Evaluate the closed-form tipping step for a scenario's vocabulary.
    Predict {
        #[arg(long)]
        scenario: PathBuf,
        /// Prompt length: m A-tokens.
        #[arg(long)]
        m: u64,
        /// Perpendicularity tolerance for the C-type precondition.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Cross-validate the closed form against simulation on random
    /// conforming configurations.
    Crossval {
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Sweep one parameter and export the flip positions as CSV.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Parameter path: t_eff, m, or vector:<label>:<axis>.
        #[arg(long)]
        param: String,
        /// Comma-separated sample values.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render an SVG plot from an exported trajectory table.
    Plot {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify the built-in scenario against the published arithmetic.
    ReproducePaper {
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
}

// exit codes: 0 success, 1 validation/usage error, 2 verification mismatch
fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate {
            scenario,
            steps,
            out,
            artifact,
        } => {
            let mut scenario = load_scenario_file(&scenario)?;
            if let Some(steps) = steps {
                scenario.config.max_steps = steps;
                scenario.validate()?;
            }
            let trajectory = scenario.run()?;
            export_trajectory(&trajectory, &out)?;
            println!(
                "simulated {} steps from prompt {}; wrote {}",
                trajectory.records.len(),
                scenario.prompt.join(""),
                out.display()
            );
            if let Some(path) = artifact {
                RunArtifact::new(scenario, RunPayload::Trajectory(trajectory)).write(&path)?;
                println!("wrote artifact {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict { scenario, m, tol } => {
            let scenario = load_scenario_file(&scenario)?;
            let result = closed_form_tipping(&scenario.vocab, m, scenario.config.t_eff, tol)?;
            println!("n* = {}", result.n_star);
            match result.predicted_block_length {
                Some(n) => println!("predicted block length ceil(n*) = {n}"),
                None => println!("predicted block length: none"),
            }
            println!("integral tie: {}", result.integral_tie);
            println!("assumptions: {}", result.assumption_report);
            Ok(ExitCode::SUCCESS)
        }
        Command::Crossval { samples, seed } => {
            let report = run_ensemble(samples, seed)?;
            println!("seed: {}", report.seed);
            println!(
                "agreement: {}/{}",
                report.agreements(),
                report.samples.len()
            );
            for sample in report.samples.iter().filter(|s| !s.agree) {
                println!(
                    "disagreement at sample {}: n* = {}, predicted {}, simulated {}",
                    sample.index,
                    sample.n_star,
                    sample.predicted_block_length,
                    sample.simulated_flip_block
                );
            }
            if report.all_agree() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out,
        } => {
            let scenario = load_scenario_file(&scenario)?;
            let target = SweepTarget::parse(&param)?;
            let values = values
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Validation(format!("bad sweep value `{v}`")))
                })
                .collect::<Result<Vec<f64>, Error>>()?;
            let spec = SweepSpec::new(target, values)?;
            let table = run_sweep(&scenario, &spec)?;
            export_sweep(&table, &out)?;
            println!("swept {} values; wrote {}", table.rows.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { trajectory, out } => {
            emit_plot_from_csv(&trajectory, &out)?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::ReproducePaper { tolerance } => {
            let report = reproduce_paper(tolerance)?;
            print!("{}", report.render());
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
    }
}
