//! streamframe: frame, transport and surface analyses of 3D vector fields.
//!
//! Six subcommands wrap the library: `analyze` (frame and helicities at a
//! point), `flow` (trajectory CSV with conserved monitors), `riccati`
//! (transported Poisson pair along a streamline), `geodesic` (surface
//! geodesic with measured curvature), `distance` (shooting distance between
//! two surface points) and `verify` (built-in case checks).
//!
//! Exit codes: 0 success, 1 failed verification, 2 bad configuration or a
//! domain error at the requested input.

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::FileDefaults;

#[derive(Parser, Debug)]
#[command(name = "streamframe", version)]
#[command(about = "Streamline frames, Poisson pairs and potential-surface geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file of flag defaults; explicit flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write the report here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Field source shared by every subcommand: a built-in case or three
/// component expressions.
#[derive(Args, Debug, Clone)]
struct SourceArgs {
    /// Built-in case: sphere, euler-like or aristotle
    #[arg(long, value_name = "NAME")]
    case: Option<String>,

    /// Vector field as three comma-separated expressions
    #[arg(long, value_name = "fx,fy,fz", allow_hyphen_values = true)]
    field: Option<String>,

    /// Named constants, e.g. a=1/3,b=1/3,c=1/3
    #[arg(long, value_name = "k=v,...", allow_hyphen_values = true)]
    params: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frame, helicities, curl and divergence at a point
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        /// Evaluation point
        #[arg(long, value_name = "x,y,z", allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Integrate the flow and monitor conserved expressions (CSV)
    Flow {
        #[command(flatten)]
        source: SourceArgs,
        /// Seed point; defaults to the case seed
        #[arg(long, value_name = "x,y,z", allow_hyphen_values = true)]
        x0: Option<String>,
        /// Time span
        #[arg(long, value_name = "a,b", allow_hyphen_values = true)]
        t: Option<String>,
        /// Relative tolerance of the adaptive integrator
        #[arg(long, value_name = "TOL")]
        rtol: Option<f64>,
        /// Absolute tolerance of the adaptive integrator
        #[arg(long, value_name = "TOL")]
        atol: Option<f64>,
        /// Fixed RK4 step; bypasses the adaptive controller
        #[arg(long, value_name = "H")]
        fixed_step: Option<f64>,
        /// Monitored expressions; defaults to the case invariants
        #[arg(long, value_name = "e1,e2,...", allow_hyphen_values = true)]
        monitor: Option<String>,
        /// json or csv
        #[arg(long, value_name = "FMT")]
        format: Option<String>,
    },
    /// Transport a Poisson pair along a streamline (CSV)
    Riccati {
        #[command(flatten)]
        source: SourceArgs,
        /// Seed point; defaults to the case seed
        #[arg(long, value_name = "x,y,z", allow_hyphen_values = true)]
        x0: Option<String>,
        /// Arclength span measured from the seed
        #[arg(long, value_name = "a,b", allow_hyphen_values = true)]
        s: Option<String>,
        /// Initial slopes of the two tracks; inf selects the binormal
        #[arg(long, value_name = "m1,m2", allow_hyphen_values = true)]
        mu0: Option<String>,
        /// Output lattice step in arclength
        #[arg(long, value_name = "H")]
        fixed_step: Option<f64>,
        /// json or csv
        #[arg(long, value_name = "FMT")]
        format: Option<String>,
    },
    /// Integrate a geodesic of a case potential surface (CSV)
    Geodesic {
        #[command(flatten)]
        source: SourceArgs,
        /// Start point, projected onto the surface
        #[arg(long, alias = "from", value_name = "x,y,z", allow_hyphen_values = true)]
        x0: Option<String>,
        /// Initial direction, projected onto the tangent plane
        #[arg(long, value_name = "x,y,z", allow_hyphen_values = true)]
        dir: Option<String>,
        /// Arclength span
        #[arg(long, value_name = "a,b", allow_hyphen_values = true)]
        s: Option<String>,
        /// Level of the potential; defaults to its value at the start
        #[arg(long, value_name = "LEVEL", allow_hyphen_values = true)]
        c: Option<f64>,
        /// Integration step
        #[arg(long, value_name = "H")]
        fixed_step: Option<f64>,
        /// json or csv
        #[arg(long, value_name = "FMT")]
        format: Option<String>,
    },
    /// Geodesic distance between two points of a case surface (JSON)
    Distance {
        #[command(flatten)]
        source: SourceArgs,
        /// Source point of the distance function
        #[arg(long, value_name = "x,y,z", allow_hyphen_values = true)]
        p: Option<String>,
        /// Target point
        #[arg(long, value_name = "x,y,z", allow_hyphen_values = true)]
        x: Option<String>,
        /// Level of the potential; defaults to its value at p
        #[arg(long, value_name = "LEVEL", allow_hyphen_values = true)]
        c: Option<f64>,
    },
    /// Run the built-in checks of one case, or of all cases
    Verify {
        #[command(flatten)]
        source: SourceArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let defaults = match FileDefaults::load(cli.config.as_deref()) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match commands::dispatch(cli.command, &defaults, cli.out.as_deref()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
