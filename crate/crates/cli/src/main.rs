use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jointorbit::{BackendChoice, Region, SampleCfg};

mod commands;
mod report;

#[derive(Parser)]
#[command(
    name = "jointorbit",
    version,
    about = "Joint orbit dimensions of Cartesian Lie group actions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Sampling seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Sampled tuples per order.
    #[arg(long, default_value_t = 32)]
    trials: usize,
    /// Relative singular-value threshold of the float backend.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Force exact rational arithmetic.
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Force floating-point arithmetic.
    #[arg(long)]
    float: bool,
    /// Sampling box "lo,hi;lo,hi;...".
    #[arg(long = "box", value_name = "BOUNDS", allow_hyphen_values = true)]
    sample_box: Option<String>,
    /// Write the JSON report to this file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print only the JSON report.
    #[arg(long)]
    porcelain: bool,
}

impl Common {
    fn cfg(&self) -> jointorbit::Result<SampleCfg> {
        let backend = if self.exact {
            BackendChoice::Exact
        } else if self.float {
            BackendChoice::Float
        } else {
            BackendChoice::Auto
        };
        let region = self.sample_box.as_deref().map(Region::parse).transpose()?;
        let cfg = SampleCfg {
            trials: self.trials,
            seed: self.seed,
            region,
            tol: self.tol,
            backend,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Orbit dimensions s_1, s_2, ... up to the stabilization order.
    Stabilize {
        spec: String,
        #[command(flatten)]
        common: Common,
    },
    /// Rank of the Lie (or Wronskian) matrix at given or sampled points.
    Rank {
        spec: String,
        #[arg(long)]
        order: Option<usize>,
        /// Points "x,y;x,y;...".
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
        /// Include the matrix entries in the report.
        #[arg(long)]
        dump_matrix: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Local effectiveness of the action on a region.
    Effective {
        spec: String,
        /// Named region of the input file, or bounds "lo,hi;...".
        #[arg(long, allow_hyphen_values = true)]
        region: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Linear independence of a function family on a region.
    Independent {
        family: String,
        /// Bounds "lo,hi;...".
        #[arg(long, allow_hyphen_values = true)]
        region: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Number of functionally independent joint invariants at an order.
    Invariants {
        spec: String,
        #[arg(long)]
        order: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Invariance of rank strata and of the Lie determinant zero set under flows.
    CheckInvariance {
        spec: String,
        /// Tuple order; defaults to the stabilization order.
        #[arg(long)]
        order: Option<usize>,
        /// Sampled flows per tuple.
        #[arg(long, default_value_t = 10)]
        flows: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Determinant of a square Lie matrix.
    LieDet {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Extends one point to a tuple with an orbit of maximal dimension.
    CompleteTuple {
        spec: String,
        /// Base point "x,y,...".
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[command(flatten)]
        common: Common,
    },
    /// The built-in fixture gallery.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Subcommand)]
enum ExamplesAction {
    /// List fixture names.
    List,
    /// Print a fixture's JSON.
    Show { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Examples { action } => match action {
            ExamplesAction::List => {
                for name in jointorbit::actionmodel::FIXTURE_NAMES {
                    println!("{name}");
                }
                ExitCode::SUCCESS
            }
            ExamplesAction::Show { name } => match jointorbit::actionmodel::fixture_source(&name) {
                Some(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                None => report::fail(&jointorbit::Error::UnknownFixture(name)),
            },
        },
        Command::Stabilize { spec, common } => run(&common, "stabilize", &spec, |input, cfg| {
            commands::stabilize(input, cfg)
        }),
        Command::Rank {
            spec,
            order,
            points,
            dump_matrix,
            common,
        } => run(&common, "rank", &spec, |input, cfg| {
            commands::rank(input, cfg, order, points.as_deref(), dump_matrix)
        }),
        Command::Effective {
            spec,
            region,
            common,
        } => run(&common, "effective", &spec, |input, cfg| {
            commands::effective(input, cfg, region.as_deref())
        }),
        Command::Independent {
            family,
            region,
            common,
        } => run(&common, "independent", &family, |input, cfg| {
            commands::independent(input, cfg, region.as_deref())
        }),
        Command::Invariants {
            spec,
            order,
            common,
        } => run(&common, "invariants", &spec, |input, cfg| {
            commands::invariants(input, cfg, order)
        }),
        Command::CheckInvariance {
            spec,
            order,
            flows,
            common,
        } => run(&common, "check-invariance", &spec, |input, cfg| {
            commands::check_invariance(input, cfg, order, flows)
        }),
        Command::LieDet {
            spec,
            points,
            common,
        } => run(&common, "lie-det", &spec, |input, cfg| {
            commands::lie_det(input, cfg, points.as_deref())
        }),
        Command::CompleteTuple {
            spec,
            point,
            common,
        } => run(&common, "complete-tuple", &spec, |input, cfg| {
            commands::complete_tuple(input, cfg, &point)
        }),
    }
}

fn run<F>(common: &Common, command: &str, path: &str, f: F) -> ExitCode
where
    F: FnOnce(&commands::Input, &SampleCfg) -> jointorbit::Result<commands::Outcome>,
{
    let started = std::time::Instant::now();
    let result = common.cfg().and_then(|cfg| {
        let input = commands::Input::load(path)?;
        let outcome = f(&input, &cfg)?;
        Ok((input, cfg, outcome))
    });
    match result {
        Ok((input, cfg, outcome)) => {
            let rep = report::RunReport::new(command, &input, &cfg, &outcome, started.elapsed());
            report::emit(&rep, &outcome, common.out.as_deref(), common.porcelain)
        }
        Err(e) => report::fail(&e),
    }
}
