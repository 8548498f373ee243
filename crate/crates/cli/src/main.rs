use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod bundle;
mod commands;
mod inputs;

#[derive(Parser, Debug)]
#[command(
    name = "spr-shift",
    version,
    about = "Thermodynamic formalism and recurrence diagnostics for countable Markov shifts",
    after_help = "Exit status: 0 when every requested check passes, 2 when a check fails, 1 on input errors.\n\
                  SPR_SHIFT_THREADS caps the worker pool."
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Directory receiving `<subcommand>-<graph hash>-<seed>/`.
    #[arg(long, global = true, default_value = "reports")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Graph description (JSON).
    #[arg(long)]
    pub graph: PathBuf,
    /// Equilibrium potential (JSON); the measure of maximal entropy if absent.
    #[arg(long)]
    pub potential: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Components, periods and cyclic classes [spectral decomposition of irreducible shifts]
    Graph {
        #[command(flatten)]
        g: GraphArgs,
    },
    /// Exact loop census and Gurevich entropy [entropy as growth rate of loops at a vertex]
    Entropy {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, default_value_t = 0)]
        base: usize,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
    },
    /// Strong positive recurrence verdict [first-return series, entropy gap and exit-path criterion]
    Spr {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, default_value_t = 0)]
        base: usize,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        /// Initial vertex set for the exit-path search, comma separated.
        #[arg(long)]
        w: Option<String>,
    },
    /// Measure of maximal entropy and effective ergodicity [Parry measure; entropy gap controls averages]
    Mme {
        #[command(flatten)]
        g: GraphArgs,
        /// Observable for the tilted-family scan.
        #[arg(long)]
        obs: Option<PathBuf>,
        #[arg(long, default_value = "-1:1:40")]
        t: String,
    },
    /// Pressure curve of phi + t psi [pressure as log spectral radius; convexity]
    Pressure {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        obs: PathBuf,
        #[arg(long, default_value = "-2:2:40")]
        t: String,
    },
    /// Asymptotic variance three ways [Green-Kubo, second derivative of pressure, simulation]
    Variance {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        obs: PathBuf,
        #[arg(long, default_value = "gk,lr,emp")]
        methods: String,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        replicas: usize,
    },
    /// Rate function and tail slopes [large deviations with rate from the Legendre transform of pressure]
    Ldp {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        obs: PathBuf,
        /// Deviation level; 0.8 of the certified domain bound if absent.
        #[arg(long)]
        a: Option<f64>,
        #[arg(
            long,
            default_value = "64,128,192,256,320,384,448,512,576,640,704,768,832,896,960,1024"
        )]
        ns: String,
        #[arg(long, default_value_t = 20_000)]
        replicas: usize,
    },
    /// Exact and sampled return-time tails [taboo probabilities and exponential return tails]
    Tail {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, default_value_t = 0)]
        vertex: usize,
        #[arg(long, default_value_t = 30)]
        horizon: usize,
        /// Sampled return times; 0 skips the empirical check.
        #[arg(long, default_value_t = 0)]
        replicas: usize,
    },
    /// Stationary trajectories [Markov measure as a stationary chain]
    Simulate {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        replicas: usize,
    },
    /// Limit-law suite for Birkhoff sums [CLT, functional CLT, arcsine, records, iterated logarithm]
    Stats {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        obs: PathBuf,
        /// Any of clt,fclt,arcsine,records,lil,laplace.
        #[arg(long, default_value = "clt,arcsine,records")]
        suite: String,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        replicas: usize,
        #[arg(long, default_value_t = 0.5)]
        lil_c: f64,
        /// Concentration bound for zero-variance observables; n^(-1/4) if absent.
        #[arg(long)]
        degenerate_bound: Option<f64>,
    },
    /// Pliss points, tempered envelopes and Pesin constants [Pliss lemma and Pesin blocks on periodic orbits]
    Pliss {
        /// Request file (JSON) with `orbits` and the parameters used.
        #[arg(long)]
        input: PathBuf,
    },
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("SPR_SHIFT_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("SPR_SHIFT_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("SPR_SHIFT_THREADS must be a positive integer");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    configure_threads()?;
    let c = &cli.common;
    let (report, dir) = match cli.command {
        Command::Graph { g } => commands::graph(c, &g)?,
        Command::Entropy { g, base, horizon } => commands::entropy(c, &g, base, horizon)?,
        Command::Spr { g, base, horizon, w } => commands::spr(c, &g, base, horizon, w.as_deref())?,
        Command::Mme { g, obs, t } => commands::mme(c, &g, obs.as_deref(), &t)?,
        Command::Pressure { g, obs, t } => commands::pressure(c, &g, &obs, &t)?,
        Command::Variance {
            g,
            obs,
            methods,
            n,
            replicas,
        } => commands::variance(c, &g, &obs, &methods, n, replicas)?,
        Command::Ldp {
            g,
            obs,
            a,
            ns,
            replicas,
        } => commands::ldp(c, &g, &obs, a, &ns, replicas)?,
        Command::Tail {
            g,
            vertex,
            horizon,
            replicas,
        } => commands::tail(c, &g, vertex, horizon, replicas)?,
        Command::Simulate { g, n, replicas } => commands::simulate(c, &g, n, replicas)?,
        Command::Stats {
            g,
            obs,
            suite,
            n,
            replicas,
            lil_c,
            degenerate_bound,
        } => commands::stats(c, &g, &obs, &suite, n, replicas, lil_c, degenerate_bound)?,
        Command::Pliss { input } => commands::pliss(c, &input)?,
    };
    let path = bundle::write_bundle(&c.out, &dir, &report)?;
    println!("{}", path.display());
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
