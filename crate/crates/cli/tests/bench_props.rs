use epik::bench::{
    chain_model, chain_sim, fit_linear, fit_report, read_csv, run_sweep, write_csv, BenchError, BenchSample,
};
use epik_core::kem::Kem;
use epik_core::params::{ParamSet, Preset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Slope and intercept from the normal equations in raw sums.
fn normal_equations(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope, (sy - slope * sx) / n)
}

#[test]
fn fit_matches_normal_equations() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for _ in 0..200 {
        let m: f64 = rng.gen_range(0.01..5.0);
        let c: f64 = rng.gen_range(-50.0..50.0);
        let xs: Vec<f64> = (16..2000).step_by(64).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| m * x + c + rng.gen_range(-1.0..1.0)).collect();
        let fit = fit_linear(&xs, &ys).unwrap();
        let (slope, intercept) = normal_equations(&xs, &ys);
        assert!((fit.slope - slope).abs() < 1e-9 * slope.abs().max(1.0));
        assert!((fit.intercept - intercept).abs() < 1e-6 * intercept.abs().max(1.0));
        assert!(fit.r_squared > 0.99 && fit.r_squared <= 1.0);
    }
}

#[test]
fn pure_noise_has_low_r_squared() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let xs: Vec<f64> = (0..200).map(f64::from).collect();
    let ys: Vec<f64> = xs.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
    assert!(fit_linear(&xs, &ys).unwrap().r_squared < 0.1);
}

#[test]
fn csv_round_trip() {
    let samples: Vec<BenchSample> = (0..10)
        .map(|i| BenchSample {
            size_bytes: 16 + 64 * i,
            encrypt_us: 1.5 + 0.25 * i as f64,
            decrypt_us: 1.25 + 0.3 * i as f64,
            trials: 11,
        })
        .collect();
    let report = fit_report(&samples).unwrap();
    let mut buf = Vec::new();
    write_csv(&report, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("size_bytes,encrypt_us,decrypt_us,trials\n"));
    let back = read_csv(buf.as_slice()).unwrap();
    assert_eq!((back.encrypt, back.decrypt, back.dec_to_enc_ratio), (report.encrypt, report.decrypt, report.dec_to_enc_ratio));
    assert_eq!(back.samples.len(), report.samples.len());
    for (a, b) in back.samples.iter().zip(&report.samples) {
        assert_eq!((a.size_bytes, a.trials), (b.size_bytes, b.trials));
        assert!((a.encrypt_us - b.encrypt_us).abs() < 1e-4 && (a.decrypt_us - b.decrypt_us).abs() < 1e-4);
    }
    assert!(read_csv("size_bytes,encrypt_us,decrypt_us,trials\n1,2,3,11\n".as_bytes()).is_err());
}

#[test]
fn chain_model_shares() {
    let mut last = 1.0;
    for latency in [0.0, 1.0, 10.0, 90.0, 500.0] {
        let row = chain_model(4, latency, 300.0, 300.0, 500).unwrap();
        assert!(row.compute_share <= last);
        assert!((row.total_us - row.compute_us - row.latency_us).abs() < 1e-9);
        last = row.compute_share;
    }
    assert_eq!(chain_model(4, 0.0, 300.0, 300.0, 500).unwrap().compute_share, 1.0);
    let single = chain_model(1, 90.0, 300.0, 300.0, 500).unwrap();
    assert_eq!(single.latency_us, 0.0);
    assert!(matches!(chain_model(0, 90.0, 1.0, 1.0, 1), Err(BenchError::ZeroNodes)));
}

#[test]
fn sweep_and_simulation_run_on_a_real_key() {
    let kem = Kem::new(ParamSet::preset(Preset::Iot)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    let sizes = [16, 80, 144, 208];
    let samples = run_sweep(&kem, &sizes, 11, 10, &mut rng).unwrap();
    assert_eq!(samples.iter().map(|s| s.size_bytes).collect::<Vec<_>>(), sizes);
    assert!(samples.iter().all(|s| s.encrypt_us > 0.0 && s.decrypt_us > 0.0));
    assert!(matches!(run_sweep(&kem, &sizes, 10, 10, &mut rng), Err(BenchError::TooFewTrials(10))));

    let rows = chain_sim(&kem, 90.0, &[500], 4, 11, &mut rng).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].compute_share > 0.0 && rows[0].compute_share < 1.0);
    assert!(chain_sim(&kem, 90.0, &[500], 0, 11, &mut rng).is_err());
}
