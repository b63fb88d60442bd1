use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cggpack::experiment::{self, Command, Manifest, Outcome, Params, Route};
use cggpack::{Error, Graph};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Default scan limit for `--minimal` when `--m` is not given.
const MINIMAL_SCAN: usize = 201;

#[derive(Parser)]
#[command(name = "cggpack", version, about = "Pack convex geometric and ordered graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cyclic or interval chromatic number with a witness partition.
    Chroma {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Decide whether K_m has a perfect fractional packing of a weighted K_k.
    Feasible {
        #[arg(long)]
        k: usize,
        /// Length weights w1,w2,... as integers or p/q.
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<String>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, conflicts_with = "minimal")]
        witness: bool,
        /// Scan odd m upward (up to --m, default 201).
        #[arg(long)]
        minimal: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Pack the input graph into K_n and verify the result.
    Pack {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, required = true)]
        n: Vec<usize>,
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
        route: RouteArg,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        cutoff: Option<usize>,
        /// Blowup factor.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        nibble_runs: Option<usize>,
        /// Use the closed-form witness m for the base host (default).
        #[arg(long, conflicts_with = "minimal")]
        witness: bool,
        /// Use the smallest feasible m, scanning up to --m.
        #[arg(long)]
        minimal: bool,
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Coverage upper bound from edge lengths, optionally against a packing.
    Bound {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: Vec<usize>,
        #[arg(long)]
        packing: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Re-run a manifest written by an earlier command.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct OutArgs {
    /// Directory for result.json, manifest.json and packing files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Auto,
    Greedy,
    C4Schedule,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Auto => Route::Auto,
            RouteArg::Greedy => Route::Greedy,
            RouteArg::C4Schedule => Route::C4Schedule,
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Writes via a temporary file and a rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn manifest_of(cmd: Cmd) -> Result<(Manifest, OutArgs), Error> {
    Ok(match cmd {
        Cmd::Chroma { input, out } => {
            let g: Graph = read_json(&input)?;
            (Manifest::new(Command::Chroma, Some(g), Params::default(), vec![]), out)
        }
        Cmd::Feasible { k, weights, m, witness, minimal, out } => {
            let params = Params {
                k: Some(k),
                weights: Some(weights),
                m: if minimal { None } else { m },
                witness,
                minimal: minimal.then(|| m.unwrap_or(MINIMAL_SCAN)),
                ..Params::default()
            };
            (Manifest::new(Command::Feasible, None, params, vec![]), out)
        }
        Cmd::Pack {
            input,
            n,
            seeds,
            route,
            epsilon,
            cutoff,
            t,
            restarts,
            nibble_runs,
            witness: _,
            minimal,
            m,
            out,
        } => {
            let g: Graph = read_json(&input)?;
            let params = Params {
                n,
                route: route.into(),
                epsilon,
                cutoff,
                t,
                restarts,
                nibble_runs,
                minimal: minimal.then(|| m.unwrap_or(MINIMAL_SCAN)),
                ..Params::default()
            };
            let seeds = if seeds.is_empty() { vec![0] } else { seeds };
            (Manifest::new(Command::Pack, Some(g), params, seeds), out)
        }
        Cmd::Bound { input, n, packing, out } => {
            let g: Graph = read_json(&input)?;
            let packing = packing.map(|p| read_json(&p)).transpose()?;
            let params = Params {
                n,
                packing,
                ..Params::default()
            };
            (Manifest::new(Command::Bound, Some(g), params, vec![]), out)
        }
        Cmd::Run { manifest, out } => (read_json(&manifest)?, out),
    })
}

fn emit(man: &Manifest, outcome: &Outcome, out: &OutArgs) -> Result<(), Error> {
    for line in &outcome.summary {
        println!("{line}");
    }
    let Some(dir) = &out.out else {
        return Ok(());
    };
    fs::create_dir_all(dir)?;
    let mut man_bytes = serde_json::to_string_pretty(man)?;
    man_bytes.push('\n');
    write_atomic(&dir.join("manifest.json"), man_bytes.as_bytes())?;
    write_atomic(&dir.join("result.json"), &outcome.result_bytes())?;
    for (stem, p) in &outcome.packings {
        write_atomic(&dir.join(format!("{stem}.json")), &serde_json::to_vec(p)?)?;
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Precondition(_)
        | Error::UnsupportedRoute(_)
        | Error::InvalidParameter(_)
        | Error::Composition(_) => 2,
        Error::Verification(_) => 3,
        Error::Parse(_) | Error::Json(_) | Error::InvalidEdge(..) => 4,
        Error::Io(_) => 1,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("PACK_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let res = manifest_of(cli.cmd).and_then(|(man, out)| {
        let outcome = experiment::run(&man)?;
        emit(&man, &outcome, &out)
    });
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
