use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};

/// Exact Laplace-expansion invariants and equivalence of (f, b) pairs.
///
/// Instances are JSON files `{"dim", "trunc", "f", "b", "psi"?}`; results go
/// to standard output as JSON.
#[derive(Debug, Parser)]
#[command(name = "phylon", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Λ_0 … Λ_K in factored form.
    Invariants {
        instance: PathBuf,
        /// Highest order K.
        #[arg(long, short = 'K', default_value_t = 4)]
        orders: usize,
        /// Use the complete-trace formula; the instance's f must be x·x.
        #[arg(long)]
        reduced: bool,
    },
    /// Decide equivalence of two pairs (d > 1) through density jets of order `degree`.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        degree: usize,
        /// Write the witness map here when the pairs are equivalent.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Decide equivalence of two one-dimensional pairs.
    Equiv1d {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Morse normalizer φ with φf = x·x.
    Morse {
        instance: PathBuf,
        /// Round irrational pivot roots instead of failing.
        #[arg(long)]
        approx: bool,
        /// Binary digits kept in approximate mode [default: $PHYLON_PRECISION_BITS or 64].
        #[arg(long)]
        bits: Option<u32>,
    },
    /// λ_0 … λ_K of a one-dimensional pair over ℚ(√s).
    Lambda1d {
        instance: PathBuf,
        #[arg(long, short = 'K', default_value_t = 4)]
        orders: usize,
    },
    /// Compare the truncated expansion with numeric quadrature.
    Verify {
        instance: PathBuf,
        /// Comma-separated values of n.
        #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 100.0, 1000.0])]
        n: Vec<f64>,
        #[arg(long, short = 'K', default_value_t = 2)]
        orders: usize,
        /// Gauss–Legendre nodes per panel and axis.
        #[arg(long, default_value_t = 16)]
        points: usize,
        /// `auto` or a fixed half-width R of the integration cube.
        #[arg(long, default_value = "auto")]
        radius: RadiusArg,
    },
    /// Transport a pair by ψ (from --psi, the instance's own "psi", or a seeded random map).
    Act {
        instance: PathBuf,
        #[arg(long)]
        psi: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the map that was applied to this file.
        #[arg(long)]
        emit_psi: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug)]
pub enum RadiusArg {
    Auto,
    Fixed(f64),
}

impl FromStr for RadiusArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(RadiusArg::Auto);
        }
        match s.parse::<f64>() {
            Ok(r) if r.is_finite() && r > 0.0 => Ok(RadiusArg::Fixed(r)),
            _ => Err(format!("expected `auto` or a positive radius, got `{s}`")),
        }
    }
}
