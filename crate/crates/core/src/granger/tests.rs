use super::*;
use crate::datasets::rng::SeededRng;
use crate::datasets::{complementary_noise, generate, GeneratorSpec};
use crate::infoflow::mutual_information_binned;
use crate::normalization::QuantileMap;
use crate::stats::ks_uniform;

fn normalized(xs: &[f64]) -> Vec<f64> {
    QuantileMap::fit(xs).unwrap().forward_all(xs).unwrap()
}

fn white(t: usize, seed: u64) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    normalized(&(0..t).map(|_| rng.normal()).collect::<Vec<_>>())
}

fn lagged_pair(delay: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let t = generate(&GeneratorSpec::LaggedPair {
        t: 5000,
        delay,
        coupling: 0.8,
        noise: complementary_noise(0.8),
        seed,
    })
    .unwrap();
    (
        normalized(t.column("x").unwrap()),
        normalized(t.column("y").unwrap()),
    )
}

fn opts(lags: usize) -> ResidueOptions {
    ResidueOptions {
        lags,
        ..Default::default()
    }
}

fn naive_dft_magnitudes(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in values.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                re += (v - mean) * ang.cos();
                im += (v - mean) * ang.sin();
            }
            re.hypot(im)
        })
        .collect()
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[test]
fn white_noise_residues_are_uniform_and_uninformed() {
    let x = white(5000, 1);
    let r = fit_residues("x", &x, &opts(2), &[]).unwrap();
    assert_eq!(r.len(), 4998);
    assert!(r.values.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(ks_uniform(&r.values) <= 0.05);
    let mi = mutual_information_binned(&r.values, &x[1..4999], 16).unwrap().value;
    assert!(mi <= 0.02, "{mi}");
}

#[test]
fn ar1_information_is_removed() {
    let mut rng = SeededRng::new(2);
    let mut raw = vec![0.0; 5000];
    for t in 1..raw.len() {
        raw[t] = 0.9 * raw[t - 1] + rng.normal();
    }
    let x = normalized(&raw);
    let before = mutual_information_binned(&x[1..], &x[..4999], 16).unwrap().value;
    assert!(before >= 0.5, "{before}");
    let r = fit_residues("x", &x, &opts(1), &[]).unwrap();
    let after = mutual_information_binned(&r.values, &x[..4999], 16).unwrap().value;
    assert!(after <= 0.03, "{after}");
}

#[test]
fn linear_mode_residues() {
    let x = white(2000, 3);
    let r = fit_residues(
        "x",
        &x,
        &ResidueOptions {
            mode: ResidueMode::Linear,
            ..opts(2)
        },
        &[],
    )
    .unwrap();
    assert_eq!(r.linear_weights.len(), 3);
    assert!(r.values.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(ks_uniform(&r.values) <= 0.05);
}

#[test]
fn residue_errors() {
    let x = white(500, 4);
    assert!(matches!(fit_residues("x", &x, &opts(0), &[]), Err(Error::InvalidInput(_))));
    assert!(matches!(fit_residues("x", &x[..10], &opts(2), &[]), Err(Error::InvalidInput(_))));
    assert!(fit_residues("x", &[0.5, 2.0, 0.1, 0.3], &opts(1), &[]).is_err());
}

#[test]
fn independent_profile_is_flat() {
    let x = white(5000, 5);
    let y = white(5000, 6);
    let r = fit_residues("x", &x, &opts(2), &[]).unwrap();
    let p = delay_profile(&r, &y, 10, 16).unwrap();
    assert_eq!(p.delays, (0..=10).collect::<Vec<_>>());
    assert!(p.peak_abs_correlation() <= 0.05);
    let field = delay_coefficients(&r, &y, 10, 4).unwrap();
    let bound = 3.0 / (5000f64).sqrt();
    for d in 0..field.delays.len() {
        assert_eq!(field.coeff(d, 0, 0), 1.0);
        for j in 0..=4 {
            for k in 0..=4 {
                if j > 0 && k > 0 {
                    assert!(field.coeff(d, j, k).abs() <= bound, "a_{j}{k}({d})");
                }
            }
        }
    }
}

#[test]
fn planted_delay_is_recovered() {
    let (x, y) = lagged_pair(3, 7);
    let r = fit_residues("x", &x, &opts(2), &[]).unwrap();
    let p = delay_profile(&r, &y, 10, 16).unwrap();
    assert_eq!(p.argmax_delay, 3);
    let field = delay_coefficients(&r, &y, 10, 4).unwrap();
    let a11 = field.curve(1, 1);
    assert_eq!(argmax(&a11.iter().map(|v| v.abs()).collect::<Vec<_>>()), 3);
    // first mixed moment equals Pearson correlation on uniform margins
    assert!((a11[3] - p.correlation[3]).abs() <= 0.02);
}

#[test]
fn contemporaneous_delay_and_overlap_limit() {
    let x = white(300, 8);
    let r = fit_residues("x", &x, &opts(1), &[]).unwrap();
    let p = delay_profile(&r, &x, 0, 8).unwrap();
    assert_eq!(p.delays, vec![0]);
    assert!(p.correlation[0] > 0.9);
    assert!(matches!(delay_profile(&r, &x, 250, 8), Err(Error::InvalidInput(_))));
}

#[test]
fn argmax_ties_take_smallest_delay() {
    assert_eq!(profile::argmax_abs(&[0.1, -0.5, 0.5, 0.2]), 1);
}

fn field_from_rows(degree: usize, rows: &[Vec<f64>]) -> DelayCoefficientField {
    let base = degree + 1;
    DelayCoefficientField {
        degree,
        delays: (0..rows.len()).collect(),
        coeffs: rows
            .iter()
            .map(|block| {
                let mut c = vec![0.0; base * base];
                c[0] = 1.0;
                for j in 1..=degree {
                    for k in 1..=degree {
                        c[j * base + k] = block[(j - 1) * degree + (k - 1)];
                    }
                }
                c
            })
            .collect(),
    }
}

#[test]
fn pca_rank_one_pattern() {
    let pattern: Vec<f64> = (0..9).map(|i| (i as f64 - 3.0) * 0.1).collect();
    let rows: Vec<Vec<f64>> = (0..6)
        .map(|d| pattern.iter().map(|p| p * (d as f64 + 1.0)).collect())
        .collect();
    let dec = pca_reduce(&field_from_rows(3, &rows), PcaTarget::Rank(1), false).unwrap();
    assert!(dec.variance_fraction >= 0.999);
    let norm = pattern.iter().map(|p| p * p).sum::<f64>().sqrt();
    let dot: f64 = dec.directions[0].iter().zip(&pattern).map(|(a, b)| a * b).sum();
    assert!((dot.abs() / norm - 1.0).abs() < 1e-9);
}

#[test]
fn pca_zero_field() {
    let rows = vec![vec![0.0; 4]; 3];
    let dec = pca_reduce(&field_from_rows(2, &rows), PcaTarget::Rank(2), false).unwrap();
    assert!(dec.eigenvalues.iter().all(|&e| e == 0.0));
    assert!(dec.scores.iter().flatten().all(|&s| s == 0.0));
    assert_eq!(dec.variance_fraction, 1.0);
}

#[test]
fn pca_full_rank_reconstruction_and_orthonormality() {
    let mut rng = SeededRng::new(9);
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|_| (0..9).map(|_| rng.normal()).collect())
        .collect();
    for center in [false, true] {
        let field = field_from_rows(3, &rows);
        let dec = pca_reduce(&field, PcaTarget::Rank(9), center).unwrap();
        let back = dec.reconstruct();
        for (a, b) in back.iter().flatten().zip(rows.iter().flatten()) {
            assert!((a - b).abs() <= 1e-9);
        }
        for (i, u) in dec.directions.iter().enumerate() {
            for (j, v) in dec.directions.iter().enumerate() {
                let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() <= 1e-9);
            }
        }
        assert!(dec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(dec.eigenvalues.iter().all(|&e| e >= 0.0));
        // truncation error equals the discarded eigenvalue mass
        let r2 = pca_reduce(&field, PcaTarget::Rank(4), center).unwrap();
        let approx = r2.reconstruct();
        let err: f64 = approx
            .iter()
            .flatten()
            .zip(rows.iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / rows.len() as f64;
        let discarded: f64 = r2.eigenvalues[4..].iter().sum();
        assert!((err - discarded).abs() <= 1e-9);
    }
}

#[test]
fn pca_rank_and_target_validation() {
    let rows = vec![vec![1.0; 4]; 3];
    let f = field_from_rows(2, &rows);
    assert!(pca_reduce(&f, PcaTarget::Rank(4), false).is_err());
    assert!(pca_reduce(&f, PcaTarget::Rank(0), false).is_err());
    let dec = pca_reduce(&f, PcaTarget::Variance(0.9), false).unwrap();
    assert_eq!(dec.rank, 1);
}

#[test]
fn spectrum_cases() {
    let flat = spectrum(&[0.3; 16]).unwrap();
    assert!(flat.iter().skip(1).all(|p| p.magnitude <= 1e-12));
    let tone: Vec<f64> = (0..32)
        .map(|d| (2.0 * std::f64::consts::PI * d as f64 / 8.0).cos())
        .collect();
    let s = spectrum(&tone).unwrap();
    let mags: Vec<f64> = s.iter().map(|p| p.magnitude).collect();
    assert_eq!(s[argmax(&mags)].frequency, 0.125);
    assert_eq!(argmax(&mags), argmax(&naive_dft_magnitudes(&tone)));
    assert!(spectrum(&[1.0, 2.0, 3.0]).is_err());
}

#[test]
fn spectrum_matches_naive_dft() {
    let mut rng = SeededRng::new(10);
    for n in [4, 7, 11, 32] {
        let v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let fast = spectrum(&v).unwrap();
        let slow = naive_dft_magnitudes(&v);
        assert_eq!(fast.len(), slow.len());
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a.magnitude - b).abs() <= 1e-12);
        }
        assert_eq!(
            argmax(&fast.iter().map(|p| p.magnitude).collect::<Vec<_>>()),
            argmax(&slow)
        );
    }
}

#[test]
fn independent_panel_has_no_links() {
    let panel = generate(&GeneratorSpec::Independent {
        n: 5000,
        dims: 3,
        seed: 11,
    })
    .unwrap();
    let report = multivariate_granger(&panel, &GrangerConfig::default()).unwrap();
    assert_eq!(report.pairs.len(), 6);
    assert!(report.pairs.iter().all(|p| p.peak_abs_correlation <= 0.05));
    assert!(report
        .pairs
        .windows(2)
        .all(|w| w[0].peak_abs_correlation >= w[1].peak_abs_correlation));
}

#[test]
fn chain_is_deconfounded_by_decoupling() {
    let panel = generate(&GeneratorSpec::LaggedChain {
        t: 5000,
        delay_xy: 2,
        delay_yz: 3,
        coupling: 0.8,
        noise: complementary_noise(0.8),
        seed: 12,
    })
    .unwrap();
    let with = multivariate_granger(&panel, &GrangerConfig::default()).unwrap();
    let without = multivariate_granger(
        &panel,
        &GrangerConfig {
            decouple_first: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(with.pair("x", "y").unwrap().profile.argmax_delay, 2);
    assert_eq!(with.pair("y", "z").unwrap().profile.argmax_delay, 3);
    let xz_with = with.pair("x", "z").unwrap().peak_abs_correlation;
    let xz_without = without.pair("x", "z").unwrap().peak_abs_correlation;
    assert!(xz_with <= 0.05, "{xz_with}");
    assert!(xz_without > 0.05 && xz_without > xz_with);
}

#[test]
fn panel_needs_two_series() {
    let t = SampleTable::from_pairs(vec![("x", vec![0.1; 200])]).unwrap();
    assert!(multivariate_granger(&t, &GrangerConfig::default()).is_err());
}

