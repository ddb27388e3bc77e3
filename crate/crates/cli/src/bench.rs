//! Timing sweeps over message sizes, least-squares fits of the linear law
//! `T(S) = m S + c`, and a simulated multi-hop relay chain.
//!
//! The sweep times the payload masking step under an already established
//! shared key. Key establishment is a fixed cost per message that does not
//! depend on `S`; it is measured separately by [`chain_sim`].

use std::hint::black_box;
use std::io::{Read, Write};
use std::time::Instant;

use epik_core::kem::{apply_mask, Kem, KemError};
use rand_core::{CryptoRng, RngCore};

/// Inner repetitions per timed trial; keeps each trial well above timer
/// resolution for the smallest messages.
pub const DEFAULT_REPS: u32 = 1000;
pub const MIN_TRIALS: u32 = 11;
pub const CSV_HEADER: [&str; 4] = ["size_bytes", "encrypt_us", "decrypt_us", "trials"];

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("need at least 3 samples for a fit, got {0}")]
    TooFewSamples(usize),
    #[error("all sample sizes are equal")]
    DegenerateSizes,
    #[error("a chain needs at least one node")]
    ZeroNodes,
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(u32),
    #[error(transparent)]
    Kem(#[from] KemError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad report line {0:?}")]
    BadReport(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSample {
    pub size_bytes: usize,
    pub encrypt_us: f64,
    pub decrypt_us: f64,
    pub trials: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    /// Microseconds per byte.
    pub slope: f64,
    /// Microseconds.
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub encrypt: LinearFit,
    pub decrypt: LinearFit,
    /// Mean decrypt time over mean encrypt time.
    pub dec_to_enc_ratio: f64,
    pub samples: Vec<BenchSample>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

/// Median per-call time, in microseconds, of `op` over `trials` trials of
/// `reps` calls each.
fn time_median(trials: u32, reps: u32, mut op: impl FnMut()) -> f64 {
    let mut times: Vec<f64> = (0..trials)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..reps {
                op();
            }
            start.elapsed().as_secs_f64() * 1e6 / f64::from(reps)
        })
        .collect();
    median(&mut times)
}

/// Times masking and unmasking of a random message of every size.
pub fn run_sweep<R: RngCore + CryptoRng>(
    kem: &Kem,
    sizes: &[usize],
    trials: u32,
    reps: u32,
    rng: &mut R,
) -> Result<Vec<BenchSample>, BenchError> {
    if trials < MIN_TRIALS {
        return Err(BenchError::TooFewTrials(trials));
    }
    let (pk, sk) = kem.keygen(rng);
    let (ct, key) = kem.encap(&pk, rng)?;
    let receiver_key = kem.decap(&sk, &ct)?;
    debug_assert_eq!(key, receiver_key);

    let mut samples = Vec::with_capacity(sizes.len());
    let mut previous: Option<f64> = None;
    for &size in sizes {
        let mut message = vec![0u8; size];
        rng.fill_bytes(&mut message);
        let sealed = apply_mask(&key, &message);
        let encrypt_us = time_median(trials, reps, || {
            black_box(apply_mask(black_box(&key), black_box(&message)));
        });
        let decrypt_us = time_median(trials, reps, || {
            black_box(apply_mask(black_box(&receiver_key), black_box(&sealed)));
        });
        if previous.is_some_and(|p| encrypt_us < p * 0.9) {
            eprintln!("warning: median encrypt time dropped at {size} bytes");
        }
        previous = Some(encrypt_us);
        samples.push(BenchSample {
            size_bytes: size,
            encrypt_us,
            decrypt_us,
            trials,
        });
    }
    Ok(samples)
}

/// Ordinary least squares of `ys` on `xs`.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<LinearFit, BenchError> {
    let n = xs.len().min(ys.len());
    if n < 3 {
        return Err(BenchError::TooFewSamples(n));
    }
    let (xs, ys) = (&xs[..n], &ys[..n]);
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(BenchError::DegenerateSizes);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

pub fn fit_report(samples: &[BenchSample]) -> Result<BenchReport, BenchError> {
    let xs: Vec<f64> = samples.iter().map(|s| s.size_bytes as f64).collect();
    let enc: Vec<f64> = samples.iter().map(|s| s.encrypt_us).collect();
    let dec: Vec<f64> = samples.iter().map(|s| s.decrypt_us).collect();
    let encrypt = fit_linear(&xs, &enc)?;
    let decrypt = fit_linear(&xs, &dec)?;
    let dec_to_enc_ratio = dec.iter().sum::<f64>() / enc.iter().sum::<f64>();
    Ok(BenchReport {
        encrypt,
        decrypt,
        dec_to_enc_ratio,
        samples: samples.to_vec(),
    })
}

fn report_lines(report: &BenchReport) -> Vec<(&'static str, f64)> {
    vec![
        ("encrypt_slope_us_per_byte", report.encrypt.slope),
        ("encrypt_intercept_us", report.encrypt.intercept),
        ("encrypt_r_squared", report.encrypt.r_squared),
        ("decrypt_slope_us_per_byte", report.decrypt.slope),
        ("decrypt_intercept_us", report.decrypt.intercept),
        ("decrypt_r_squared", report.decrypt.r_squared),
        ("dec_to_enc_ratio", report.dec_to_enc_ratio),
    ]
}

/// Samples as CSV rows followed by `# key=value` report lines.
pub fn write_csv<W: Write>(report: &BenchReport, mut out: W) -> Result<(), BenchError> {
    {
        let mut writer = csv::Writer::from_writer(&mut out);
        writer.write_record(CSV_HEADER)?;
        for s in &report.samples {
            writer.write_record([
                s.size_bytes.to_string(),
                format!("{:.4}", s.encrypt_us),
                format!("{:.4}", s.decrypt_us),
                s.trials.to_string(),
            ])?;
        }
        writer.flush().map_err(csv::Error::from)?;
    }
    for (key, value) in report_lines(report) {
        writeln!(out, "# {key}={value}").map_err(csv::Error::from)?;
    }
    Ok(())
}

/// Parses [`write_csv`] output. Sample times keep the written precision.
pub fn read_csv<R: Read>(mut input: R) -> Result<BenchReport, BenchError> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(csv::Error::from)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or_default().trim().to_string();
        let parse_err = |_| BenchError::BadReport(format!("{record:?}"));
        samples.push(BenchSample {
            size_bytes: field(0).parse().map_err(|_| BenchError::BadReport(field(0)))?,
            encrypt_us: field(1).parse().map_err(parse_err)?,
            decrypt_us: field(2).parse().map_err(parse_err)?,
            trials: field(3).parse().map_err(|_| BenchError::BadReport(field(3)))?,
        });
    }
    let mut report = fit_report(&samples)?;
    let mut seen = 0;
    for line in text.lines().filter_map(|l| l.strip_prefix("# ")) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| BenchError::BadReport(line.to_string()))?;
        let value: f64 = value
            .parse()
            .map_err(|_| BenchError::BadReport(line.to_string()))?;
        let slot = match key {
            "encrypt_slope_us_per_byte" => &mut report.encrypt.slope,
            "encrypt_intercept_us" => &mut report.encrypt.intercept,
            "encrypt_r_squared" => &mut report.encrypt.r_squared,
            "decrypt_slope_us_per_byte" => &mut report.decrypt.slope,
            "decrypt_intercept_us" => &mut report.decrypt.intercept,
            "decrypt_r_squared" => &mut report.decrypt.r_squared,
            "dec_to_enc_ratio" => &mut report.dec_to_enc_ratio,
            _ => return Err(BenchError::BadReport(line.to_string())),
        };
        *slot = value;
        seen += 1;
    }
    if seen != report_lines(&report).len() {
        return Err(BenchError::BadReport("missing report lines".into()));
    }
    Ok(report)
}

/// One message relayed through a chain of nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSimRow {
    pub size_bytes: usize,
    pub nodes: usize,
    /// Crypto time over all hops, microseconds.
    pub compute_us: f64,
    /// Injected link latency over all hops, microseconds.
    pub latency_us: f64,
    pub total_us: f64,
    pub compute_share: f64,
}

/// Sequential relay model: each of the `nodes - 1` hops costs one
/// encryption at the sender, the link latency, and one decryption at the
/// receiver. A single node does one local encrypt/decrypt round.
pub fn chain_model(nodes: usize, latency_ms: f64, encrypt_us: f64, decrypt_us: f64, size_bytes: usize) -> Result<ChainSimRow, BenchError> {
    if nodes == 0 {
        return Err(BenchError::ZeroNodes);
    }
    let hops = (nodes - 1).max(1) as f64;
    let compute_us = hops * (encrypt_us + decrypt_us);
    let latency_us = if nodes > 1 { hops * latency_ms * 1e3 } else { 0.0 };
    let total_us = compute_us + latency_us;
    Ok(ChainSimRow {
        size_bytes,
        nodes,
        compute_us,
        latency_us,
        total_us,
        compute_share: if total_us > 0.0 { compute_us / total_us } else { 0.0 },
    })
}

/// Measures full public-key encryption and decryption of a message of each
/// size and feeds the medians into [`chain_model`]. No real sleeping.
pub fn chain_sim<R: RngCore + CryptoRng>(
    kem: &Kem,
    latency_ms: f64,
    sizes: &[usize],
    nodes: usize,
    trials: u32,
    rng: &mut R,
) -> Result<Vec<ChainSimRow>, BenchError> {
    if nodes == 0 {
        return Err(BenchError::ZeroNodes);
    }
    let (pk, sk) = kem.keygen(rng);
    sizes
        .iter()
        .map(|&size| {
            let mut message = vec![0u8; size];
            rng.fill_bytes(&mut message);
            let ct = kem.pke_encrypt(&pk, &message, rng)?;
            let encrypt_us = time_median(trials, 1, || {
                black_box(kem.pke_encrypt(&pk, &message, rng).expect("key was accepted above"));
            });
            let decrypt_us = time_median(trials, 1, || {
                black_box(kem.pke_decrypt(&sk, &ct).expect("ciphertext was produced above"));
            });
            chain_model(nodes, latency_ms, encrypt_us, decrypt_us, size)
        })
        .collect()
}
