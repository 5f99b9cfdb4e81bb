use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tripound::bap::{parse_bap, run_bap, BapState, DEFAULT_STEP_CAP};
use tripound::counting::{compare_counts, PhiVariant};
use tripound::harness::{measure_scaling, verify_all};
use tripound::model::{parse_instance, Instance};
use tripound::sat::{encode, write_dimacs};
use tripound::tripound::{tripound_solve, Mode, ScanMode};

const EXIT_PROPERTY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tripound",
    version,
    about = "Conflict-constrained pairing solver and verifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pair the elements of an instance file.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "faithful")]
        mode: Mode,
        #[arg(long, default_value = "linear")]
        scan: ScanMode,
        /// Append the step trace after the pairing.
        #[arg(long)]
        trace: bool,
    },
    /// Emit the instance's CNF encoding as DIMACS.
    Encode {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Compare the series formula with brute-force counts.
    Count {
        file: PathBuf,
        #[arg(long, default_value = "even-step")]
        variant: PhiVariant,
    },
    /// Run a matrix program against an instance.
    RunBap {
        program: PathBuf,
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
        step_cap: u64,
    },
    /// Fit step counts against instance size.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [64usize, 128, 256, 512, 1024, 2048, 4096])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "linear")]
        scan: ScanMode,
    },
    /// Run the oracle suite and print one line per claim.
    Verify {
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn solver(message: impl ToString) -> Self {
        Self {
            code: EXIT_SOLVER,
            message: message.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve {
            file,
            mode,
            scan,
            trace,
        } => {
            let inst = load_instance(&file)?;
            let (pairing, t) = tripound_solve(&inst, mode, scan).map_err(Failure::solver)?;
            print!("{}", pairing.to_text(&inst));
            if trace {
                print!("{t}");
            }
        }
        Command::Encode { file, output } => {
            let inst = load_instance(&file)?;
            let text = write_dimacs(&encode(&inst).0);
            match output {
                Some(path) => fs::write(&path, text)
                    .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
        }
        Command::Count { file, variant } => {
            let inst = load_instance(&file)?;
            let report = compare_counts(&inst, variant).map_err(Failure::usage)?;
            print!("{}", report.to_text());
        }
        Command::RunBap {
            program,
            file,
            step_cap,
        } => {
            let prog = parse_bap(&read(&program)?)
                .map_err(|e| Failure::usage(format!("{}: {e}", program.display())))?;
            let inst = load_instance(&file)?;
            let state = BapState::from_instance(&inst).with_step_cap(step_cap);
            let (state, steps) = run_bap(&prog, state).map_err(Failure::solver)?;
            let n = inst.n() as i64;
            let name = |v: i64| {
                if (0..n).contains(&v) {
                    inst.name(v as usize).to_string()
                } else {
                    v.to_string()
                }
            };
            if let Some(d) = state.matrix("D") {
                print!("{}", d.render(name));
            }
            println!("steps={steps}");
        }
        Command::Bench { sizes, seed, scan } => {
            let report = measure_scaling(&sizes, scan, seed).map_err(|e| match e {
                tripound::harness::ScalingError::Solve(e) => Failure::solver(e),
                other => Failure::usage(other),
            })?;
            print!("{}", report.to_text());
        }
        Command::Verify { max_n, seed } => {
            let report = verify_all(max_n, seed);
            print!("{}", report.to_text());
            if !report.ok() {
                return Ok(EXIT_PROPERTY);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
