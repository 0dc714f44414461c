use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "povmforge", version, about = "Build, dilate, compile and verify the five-outcome two-qubit POVM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the five POVM elements and report their spectra.
    Povm(Common),
    /// Complete the oracle dilation unitary and audit it.
    Dilate(Common),
    /// Evaluate the reference 32x32 matrix and audit it entry by entry.
    PaperMatrix {
        #[command(flatten)]
        common: Common,
        /// Exit 1 when the audit fails instead of only reporting it.
        #[arg(long)]
        strict: bool,
    },
    /// Two-level factorization as JSON.
    Decompose {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = FactorSource::Generic)]
        source: FactorSource,
        /// Product order for `--source paper`.
        #[arg(long, value_enum, default_value_t = Order::LeftFirst)]
        order: Order,
        /// Exit 1 when the audit of the reference product fails.
        #[arg(long)]
        strict: bool,
    },
    /// Compile the dilation to CNOT and single-qubit gates.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = FactorSource::Generic)]
        source: FactorSource,
    },
    /// Sample outcome histograms.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// `00`, `01`, `10`, `11` or `psi1`..`psi4`.
        #[arg(long, default_value = "00")]
        input: String,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        #[arg(long, value_enum, default_value_t = Route::Matrix)]
        route: Route,
    },
    /// Run every stage and emit the combined audit report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Shots for the sampling checks.
        #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Override every stage tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, env = "POVMFORGE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write the audit report as JSON here; otherwise it goes to stderr as text.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    /// Reciprocal squares 1/alpha^2,1/beta^2,1/gamma^2,1/delta^2.
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with_all = ["alpha", "beta", "gamma", "delta"])]
    pub inv_sq: Option<Vec<f64>>,
    #[arg(long, requires_all = ["beta", "gamma", "delta"], allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, requires_all = ["alpha", "gamma", "delta"], allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, requires_all = ["alpha", "beta", "delta"], allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, requires_all = ["alpha", "beta", "gamma"], allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// `auto` for the optimal value or an explicit number.
    #[arg(long, default_value = "auto")]
    pub q: String,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
    Qasm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorSource {
    /// Generic factorization of the oracle unitary.
    Generic,
    /// The reference 43-factor product.
    Paper,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    LeftFirst,
    Reversed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Matrix,
    Circuit,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("povmforge").chain(args.iter().copied()))
    }

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn inv_sq_splits_on_commas() {
        let cli = parse(&["povm", "--inv-sq", "0.5,0.25,0.125,0.125"]).unwrap();
        let Command::Povm(common) = cli.command else { panic!("wrong subcommand") };
        assert_eq!(common.params.inv_sq, Some(vec![0.5, 0.25, 0.125, 0.125]));
        assert_eq!(common.params.q, "auto");
        assert_eq!(common.format, Format::Json);
    }

    #[test]
    fn negative_amplitudes_parse() {
        let cli = parse(&["dilate", "--alpha", "-2", "--beta", "2", "--gamma", "2", "--delta", "-2"]).unwrap();
        let Command::Dilate(common) = cli.command else { panic!("wrong subcommand") };
        assert_eq!(common.params.alpha, Some(-2.0));
        assert_eq!(common.params.delta, Some(-2.0));
    }

    #[test]
    fn rejected_combinations() {
        assert!(parse(&["povm", "--inv-sq", "0.25,0.25,0.25,0.25", "--alpha", "2"]).is_err());
        assert!(parse(&["povm", "--alpha", "2", "--beta", "2", "--gamma", "2"]).is_err());
        assert!(parse(&["simulate", "--inv-sq", "0.25,0.25,0.25,0.25", "--shots", "0"]).is_err());
        assert!(parse(&["synth", "--inv-sq", "0.25,0.25,0.25,0.25", "--format", "svg"]).is_err());
    }

    #[test]
    fn subcommand_defaults() {
        let cli = parse(&["decompose", "--inv-sq", "0.25,0.25,0.25,0.25"]).unwrap();
        let Command::Decompose { source, order, strict, .. } = cli.command else { panic!("wrong subcommand") };
        assert_eq!((source, order, strict), (FactorSource::Generic, Order::LeftFirst, false));
        let cli = parse(&["verify", "--inv-sq", "0.25,0.25,0.25,0.25"]).unwrap();
        let Command::Verify { shots, .. } = cli.command else { panic!("wrong subcommand") };
        assert_eq!(shots, 20_000);
    }
}
