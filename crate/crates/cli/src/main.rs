use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epik::artifact::{self, ArtifactError, Format};
use epik::bench::{self, BenchError};
use epik_core::codec::{self, CodecError};
use epik_core::engel::{engel_decode, engel_encode, EngelError};
use epik_core::kem::{Kem, KemError};
use epik_core::laurent::LaurentSeries;
use epik_core::params::{ParamSet, Preset};
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;

const SEED_ENV: &str = "EPIK_TEST_SEED";

#[derive(Debug, Parser)]
#[command(name = "epik", version, about = "Toy isogeny KEM over p-adic Laurent series")]
struct Cli {
    /// Allow a fixed RNG seed. Keys made this way are reproducible and unsafe.
    #[arg(long, global = true)]
    test_mode: bool,
    /// RNG seed; needs --test-mode. Falls back to EPIK_TEST_SEED in test mode.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Encoding of written artifacts.
    #[arg(long, global = true, value_enum, default_value_t = Format::Binary)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a key pair.
    Keygen {
        #[arg(long, default_value = "iot")]
        preset: Preset,
        #[arg(long)]
        out_pk: PathBuf,
        #[arg(long)]
        out_sk: PathBuf,
    },
    /// Encapsulate a shared key to a public key.
    Encap {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        out_ct: PathBuf,
        #[arg(long)]
        out_key: PathBuf,
        /// Also encrypt this file into the ciphertext payload.
        #[arg(long)]
        message: Option<PathBuf>,
    },
    /// Recover the shared key from a ciphertext.
    Decap {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        out_key: PathBuf,
        /// Write the decrypted payload here.
        #[arg(long)]
        out_message: Option<PathBuf>,
    },
    /// Engel expansions of power series.
    #[command(subcommand)]
    Engel(EngelCommand),
    /// Time encryption against message size.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
enum EngelCommand {
    /// Expand a series given as wire hex or as integer coefficients.
    Encode {
        #[arg(long, conflicts_with = "coeffs", required_unless_present = "coeffs")]
        input: Option<String>,
        /// Comma-separated integer coefficients of 1, t, t^2, ...
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
        /// Maximum number of digits; defaults to the preset depth.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value = "iot")]
        preset: Preset,
    },
    /// Sum an expansion given as wire hex back into a series.
    Decode {
        #[arg(long)]
        input: String,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value = "iot")]
        preset: Preset,
    },
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Size range in bytes, `lo..hi`.
    #[arg(long, default_value = "16..2000")]
    sizes: String,
    #[arg(long, default_value_t = 64)]
    step: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Simulated per-hop latency for the relay chain.
    #[arg(long, default_value_t = 90.0)]
    latency_ms: f64,
    #[arg(long, default_value_t = bench::MIN_TRIALS)]
    trials: u32,
    #[arg(long, default_value_t = 4)]
    nodes: usize,
    #[arg(long, default_value = "iot")]
    preset: Preset,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
    #[error(transparent)]
    Kem(#[from] KemError),
    #[error(transparent)]
    Engel(#[from] EngelError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Artifact(ArtifactError::Io { .. }) => 2,
            CliError::Usage(_)
            | CliError::Kem(KemError::ParameterMismatch)
            | CliError::Kem(KemError::Codec(CodecError::Param(_)))
            | CliError::Artifact(ArtifactError::Codec {
                source: CodecError::Param(_),
                ..
            })
            | CliError::Bench(BenchError::ZeroNodes | BenchError::TooFewTrials(_) | BenchError::TooFewSamples(_)) => 3,
            CliError::Bench(BenchError::Csv(e)) if e.is_io_error() => 2,
            _ => 4,
        }
    }
}

fn rng_for(cli: &Cli) -> Result<ChaCha20Rng, CliError> {
    if !cli.test_mode {
        if cli.seed.is_some() {
            return Err(CliError::Usage("--seed requires --test-mode".into()));
        }
        return Ok(ChaCha20Rng::from_entropy());
    }
    let seed = match cli.seed {
        Some(seed) => seed,
        None => match std::env::var(SEED_ENV) {
            Ok(text) => text
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV} is not an integer")))?,
            Err(_) => return Err(CliError::Usage("--test-mode needs --seed or EPIK_TEST_SEED".into())),
        },
    };
    eprintln!("warning: test mode, seed {seed}; keys are not secret");
    Ok(ChaCha20Rng::seed_from_u64(seed))
}

fn keygen(cli: &Cli, preset: Preset, out_pk: &Path, out_sk: &Path) -> Result<(), CliError> {
    let mut rng = rng_for(cli)?;
    let params = ParamSet::preset(preset);
    let kem = Kem::new(params.clone())?;
    let (pk, sk) = kem.keygen(&mut rng);
    let pk_bytes = codec::encode_pk(&pk).map_err(KemError::from)?;
    artifact::write_artifact(out_pk, &pk_bytes, cli.format)?;
    artifact::write_artifact(out_sk, &codec::encode_sk(&sk), cli.format)?;
    println!("preset={preset}");
    println!("pk_bits={}", params.pk_size_bits());
    println!("pk={}", out_pk.display());
    println!("sk={}", out_sk.display());
    Ok(())
}

fn encap(cli: &Cli, pk: &Path, out_ct: &Path, out_key: &Path, message: Option<&Path>) -> Result<(), CliError> {
    let mut rng = rng_for(cli)?;
    let pk = artifact::load(pk, codec::decode_pk)?;
    let kem = Kem::new(pk.params().clone())?;
    let (mut ct, key) = kem.encap(&pk, &mut rng)?;
    if let Some(path) = message {
        let plain = artifact::read_raw(path)?;
        let (a, b) = ct.curve_coefficients();
        ct = epik_core::kem::Ciphertext::new(
            ct.params().clone(),
            a.clone(),
            b.clone(),
            epik_core::kem::apply_mask(&key, &plain),
        );
    }
    let ct_bytes = codec::encode_ct(&ct).map_err(KemError::from)?;
    artifact::write_artifact(out_ct, &ct_bytes, cli.format)?;
    artifact::write_key(out_key, &key, cli.format)?;
    println!("ct={}", out_ct.display());
    println!("key={}", out_key.display());
    Ok(())
}

fn decap(cli: &Cli, sk: &Path, ct: &Path, out_key: &Path, out_message: Option<&Path>) -> Result<(), CliError> {
    let sk = artifact::load(sk, codec::decode_sk)?;
    let ct = artifact::load(ct, codec::decode_ct)?;
    let kem = Kem::new(sk.params().clone())?;
    let key = kem.decap(&sk, &ct)?;
    artifact::write_key(out_key, &key, cli.format)?;
    println!("key={}", out_key.display());
    if let Some(path) = out_message {
        let plain = epik_core::kem::apply_mask(&key, ct.payload());
        std::fs::write(path, plain).map_err(|source| ArtifactError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        println!("message={}", path.display());
    }
    Ok(())
}

fn parse_hex(text: &str) -> Result<Vec<u8>, CliError> {
    hex::decode(text.trim()).map_err(|e| CliError::Malformed(format!("hex: {e}")))
}

fn engel(command: &EngelCommand) -> Result<(), CliError> {
    match command {
        EngelCommand::Encode {
            input,
            coeffs,
            depth,
            preset,
        } => {
            let params = ParamSet::preset(*preset);
            let (prime, policy) = (params.prime(), params.policy());
            let series = match (input, coeffs) {
                (Some(hex_text), _) => codec::decode_series(&parse_hex(hex_text)?, prime, policy)
                    .map_err(|e| CliError::Malformed(e.to_string()))?,
                (None, Some(list)) => {
                    let values = list
                        .split(',')
                        .map(|v| v.trim().parse::<i64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| CliError::Malformed(format!("coefficient: {e}")))?;
                    if values.len() > policy.window() {
                        return Err(CliError::Usage(format!(
                            "at most {} coefficients for preset {preset}",
                            policy.window()
                        )));
                    }
                    LaurentSeries::from_integers(prime, policy, 0, &values)
                }
                (None, None) => return Err(CliError::Usage("--input or --coeffs is required".into())),
            };
            let expansion = engel_encode(&series, depth.unwrap_or(usize::from(params.m())))?;
            let valuations: Vec<String> = expansion.residual_valuations().iter().map(ToString::to_string).collect();
            println!("digits={}", expansion.len());
            println!("termination={}", expansion.termination().name());
            println!("residual_valuations={}", valuations.join(","));
            println!("expansion={}", hex::encode(codec::encode_expansion(&expansion)));
        }
        EngelCommand::Decode { input, depth, preset } => {
            let params = ParamSet::preset(*preset);
            let max_depth = depth.unwrap_or(usize::from(params.m()));
            let expansion = codec::decode_expansion(&parse_hex(input)?, params.prime(), params.policy(), max_depth)
                .map_err(|e| CliError::Malformed(e.to_string()))?;
            let series = engel_decode(&expansion)?;
            println!("series={}", hex::encode(codec::encode_series(&series)));
        }
    }
    Ok(())
}

fn parse_sizes(range: &str, step: usize) -> Result<Vec<usize>, CliError> {
    let usage = || CliError::Usage(format!("--sizes expects lo..hi, got {range:?}"));
    let (lo, hi) = range.split_once("..").ok_or_else(usage)?;
    let lo: usize = lo.trim().parse().map_err(|_| usage())?;
    let hi: usize = hi.trim().parse().map_err(|_| usage())?;
    if step == 0 || lo > hi {
        return Err(usage());
    }
    Ok((lo..=hi).step_by(step).collect())
}

fn run_bench(cli: &Cli, args: &BenchArgs) -> Result<(), CliError> {
    let sizes = parse_sizes(&args.sizes, args.step)?;
    if args.nodes == 0 {
        return Err(BenchError::ZeroNodes.into());
    }
    if !(args.latency_ms >= 0.0 && args.latency_ms.is_finite()) {
        return Err(CliError::Usage("--latency-ms must be a non-negative number".into()));
    }
    let mut rng = rng_for(cli)?;
    let kem = Kem::new(ParamSet::preset(args.preset))?;
    let samples = bench::run_sweep(&kem, &sizes, args.trials, bench::DEFAULT_REPS, &mut rng)?;
    let report = bench::fit_report(&samples)?;
    match &args.csv {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|source| ArtifactError::Io {
                path: path.clone(),
                source,
            })?;
            bench::write_csv(&report, std::io::BufWriter::new(file))?;
        }
        None => bench::write_csv(&report, std::io::stdout().lock())?,
    }
    let rows = bench::chain_sim(&kem, args.latency_ms, &[500], args.nodes, args.trials, &mut rng)?;
    for row in rows {
        println!(
            "# chain nodes={} size_bytes={} compute_us={:.1} latency_us={:.1} compute_share={:.4}",
            row.nodes, row.size_bytes, row.compute_us, row.latency_us, row.compute_share
        );
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Keygen { preset, out_pk, out_sk } => keygen(cli, *preset, out_pk, out_sk),
        Command::Encap {
            pk,
            out_ct,
            out_key,
            message,
        } => encap(cli, pk, out_ct, out_key, message.as_deref()),
        Command::Decap {
            sk,
            ct,
            out_key,
            out_message,
        } => decap(cli, sk, ct, out_key, out_message.as_deref()),
        Command::Engel(command) => engel(command),
        Command::Bench(args) => run_bench(cli, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
