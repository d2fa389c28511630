use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cyclotile", version, about = "Factorizations of cyclic groups Z_(pqr)^2")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Brute,
    Sands,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    P,
    Q,
    R,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether A ⊕ B = Z_M. Any modulus is accepted.
    Verify {
        #[command(flatten)]
        primes: OptPrimes,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Division set of a set, or of the pairs between two sets.
    Divset {
        #[command(flatten)]
        primes: OptPrimes,
        #[arg(long)]
        set: PathBuf,
        /// Second set: report Div(set, against) instead.
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Coefficients of Phi_s, and whether it divides a set's mask polynomial.
    Cyclotomic {
        #[arg(long)]
        s: u64,
        #[arg(long)]
        set: Option<PathBuf>,
    },
    /// Build or certify sumset tiles and their complements.
    #[command(subcommand)]
    Szabo(SzaboCommand),
    /// Complement enumeration.
    #[command(subcommand)]
    Search(SearchCommand),
    /// Structural checks on tiles and factorizations.
    #[command(subcommand)]
    Props(PropsCommand),
}

fn parse_triple(s: &str) -> Result<[u64; 3], String> {
    let values = s
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<u64>| format!("expected three comma-separated primes, got {}", v.len()))
}

#[derive(Debug, Args)]
pub struct Primes {
    /// The three primes, e.g. `2,3,5`.
    #[arg(long, value_parser = parse_triple)]
    pub primes: [u64; 3],
}

#[derive(Debug, Args)]
pub struct OptPrimes {
    /// Check that the sets live in Z_(pqr)^2 for these primes.
    #[arg(long, value_parser = parse_triple)]
    pub primes: Option<[u64; 3]>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[command(flatten)]
    pub primes: Primes,
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SzaboCommand {
    /// Certify (A, B) or (B, A) as a sumset tile with a matching complement.
    Check(PairArgs),
    /// Build a tile and complement from index sets and a plan, or at random.
    Build {
        #[command(flatten)]
        primes: Primes,
        /// Representatives of U mod p^2, one per class mod p.
        #[arg(long, value_delimiter = ',', requires_all = ["v", "w"])]
        u: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',')]
        v: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',')]
        w: Option<Vec<i64>>,
        /// Complement plan as JSON: `{"h": [[..], [..], [..]], "assign": ...}`.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Seed for the random instance, used when no plan is given.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_a: Option<PathBuf>,
        #[arg(long)]
        out_b: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Stop after this many complements.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Single worker, reproducible order.
    #[arg(long)]
    pub stable: bool,
    /// Skip complements lying in a proper subgroup.
    #[arg(long)]
    pub require_nonsubgroup: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum SearchCommand {
    /// Stream complements B ∋ 0 of A, one per line. Any modulus is accepted.
    Complement {
        #[command(flatten)]
        primes: OptPrimes,
        #[arg(long)]
        a: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check every found generating complement of a sumset tile for a certificate.
    Theorem {
        #[command(flatten)]
        primes: Primes,
        #[arg(long)]
        a: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum PropsCommand {
    /// Cyclotomic and divisor consequences for a generating pair.
    Check210(PairArgs),
    /// Averaged class counts along one axis or all three.
    Average {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
    },
    /// Division set and class-zero strata of a tile.
    Divstructure {
        #[command(flatten)]
        primes: Primes,
        #[arg(long)]
        a: PathBuf,
    },
    /// Divisor forcing for a set of congruent elements.
    Lemma24 {
        #[command(flatten)]
        primes: Primes,
        #[arg(long)]
        set: PathBuf,
        #[arg(long, value_enum, default_value_t = AxisArg::P)]
        axis: AxisArg,
    },
    /// kA ⊕ B = Z_M for k coprime to |A|. Any modulus is accepted.
    Dilate {
        #[command(flatten)]
        primes: OptPrimes,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        k: u64,
    },
}
