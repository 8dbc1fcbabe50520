use num_complex::Complex64;
use otfs_core::channel::{add_awgn_with_power, apply_channel, dd_effective_channel, ChannelTap, NoiseSpec};
use otfs_core::dd::{estimate_channel_dd, mp_equalize, EstimatorParams, MpParams, PilotLayout, SparseDdChannel};
use otfs_core::fec::qam::constellation;
use otfs_core::frame::OtfsFrameConfig;
use otfs_core::otfs::{otfs_demodulate, otfs_modulate, DdGrid, WindowSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn integer_taps(rng: &mut ChaCha8Rng, cfg: &OtfsFrameConfig, paths: &[(usize, i64)]) -> Vec<ChannelTap> {
    let res = cfg.doppler_resolution();
    let mut taps: Vec<ChannelTap> = paths
        .iter()
        .map(|&(d, k)| {
            let g = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            ChannelTap::new(g, d as f64 / cfg.sample_rate, k as f64 * res)
        })
        .collect();
    let p: f64 = taps.iter().map(|t| t.gain.norm_sqr()).sum();
    taps.iter_mut().for_each(|t| t.gain /= p.sqrt());
    taps
}

/// Exhaustive minimum-distance search over every data hypothesis.
fn map_decisions(y: &DdGrid, h: &SparseDdChannel, points: &[Complex64]) -> Vec<usize> {
    let dim = h.dim();
    let q = points.len();
    let mut labels = vec![0usize; dim];
    let (mut best, mut best_labels) = (f64::INFINITY, labels.clone());
    loop {
        let x: Vec<Complex64> = labels.iter().map(|&l| points[l]).collect();
        let d: f64 = h.apply(&x).iter().zip(y.as_slice()).map(|(a, b)| (a - b).norm_sqr()).sum();
        if d < best {
            best = d;
            best_labels.copy_from_slice(&labels);
        }
        let mut i = 0;
        while i < dim {
            labels[i] += 1;
            if labels[i] < q {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
        if i == dim {
            return best_labels;
        }
    }
}

/// Gaussian-approximated MP is not exact: on this graph every data bin has
/// two edges and a small share of frames ends in a confident wrong fixed
/// point, so agreement is checked as a rate.
#[test]
fn mp_agrees_with_exhaustive_map_on_toy_grid() {
    let cfg = OtfsFrameConfig::without_pilot(4, 2, 1, 1e6);
    let w = WindowSpec::rectangular(4, 2);
    let points = constellation(2).unwrap();
    let bins: Vec<usize> = (0..8).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let frames = 200;
    let mut agree = 0;
    for _ in 0..frames {
        let taps = integer_taps(&mut rng, &cfg, &[(0, 0), (1, 1)]);
        let h = dd_effective_channel(&taps, &cfg).unwrap();
        let sent: Vec<usize> = (0..8).map(|_| rng.random_range(0..4)).collect();
        let mut x = DdGrid::zeros(4, 2);
        for (v, &l) in x.as_mut_slice().iter_mut().zip(&sent) {
            *v = points[l];
        }
        let r = apply_channel(&otfs_modulate(&x, &w, &cfg).unwrap(), &taps, 0.0).unwrap();
        let y = otfs_demodulate(&r, &w, &cfg).unwrap();
        let map = map_decisions(&y, &h, &points);
        // Noiseless and full rank: the exhaustive search returns what was sent.
        assert_eq!(map, sent);
        let mp = mp_equalize(&y, &h, None, &bins, &points, 1e-4, &MpParams::default()).unwrap();
        agree += (mp.posteriors.hard_decisions() == map) as usize;
        for i in 0..8 {
            let s: f64 = mp.posteriors.get(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }
    assert!(agree as f64 >= 0.95 * frames as f64, "{agree}/{frames}");
}

#[test]
fn mp_symbol_error_rate_with_true_channel() {
    let cfg = OtfsFrameConfig::without_pilot(16, 8, 3, 1e6);
    let w = WindowSpec::rectangular(16, 8);
    let points = constellation(2).unwrap();
    let bins: Vec<usize> = (0..128).collect();
    let noise = NoiseSpec::new(30.0);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (mut errors, mut total) = (0usize, 0usize);
    for _ in 0..100 {
        let taps = integer_taps(&mut rng, &cfg, &[(0, 0), (1, 1), (2, -1)]);
        let h = dd_effective_channel(&taps, &cfg).unwrap();
        let sent: Vec<usize> = (0..128).map(|_| rng.random_range(0..4)).collect();
        let mut x = DdGrid::zeros(16, 8);
        for (v, &l) in x.as_mut_slice().iter_mut().zip(&sent) {
            *v = points[l];
        }
        let s = otfs_modulate(&x, &w, &cfg).unwrap();
        let r = add_awgn_with_power(&apply_channel(&s, &taps, 0.0).unwrap(), noise, 1.0, &mut rng).unwrap();
        let y = otfs_demodulate(&r, &w, &cfg).unwrap();
        let mp = mp_equalize(&y, &h, None, &bins, &points, noise.noise_var(1.0), &MpParams::default()).unwrap();
        errors += mp.posteriors.hard_decisions().iter().zip(&sent).filter(|(a, b)| a != b).count();
        total += sent.len();
    }
    let ser = errors as f64 / total as f64;
    assert!(ser < 1e-3, "SER {ser}");
}

#[test]
fn estimate_close_to_truth_at_30_db() {
    let cfg = OtfsFrameConfig::with_centered_pilot(32, 16, 4, 12, 16, 1e6);
    let layout = PilotLayout::from_config(&cfg, 10.0).unwrap();
    let w = WindowSpec::rectangular(32, 16);
    let noise = NoiseSpec::new(30.0);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let taps = integer_taps(&mut rng, &cfg, &[(0, 0), (3, 2)]);
        let x = layout.pilot_grid(32, 16);
        let s = otfs_modulate(&x, &w, &cfg).unwrap();
        // Unit data power reference: the pilot-only grid would otherwise set it.
        let r = add_awgn_with_power(&apply_channel(&s, &taps, 0.0).unwrap(), noise, 1.0, &mut rng).unwrap();
        let y = otfs_demodulate(&r, &w, &cfg).unwrap();
        let params = EstimatorParams {
            noise_sigma: Some(noise.noise_var(1.0).sqrt()),
            ..EstimatorParams::new(4)
        };
        let est = estimate_channel_dd(&y, &layout, &params).unwrap();
        let truth = dd_effective_channel(&taps, &cfg).unwrap();
        let rms = est.rms_difference(&truth);
        assert!(rms < 1e-3, "rms {rms}");
    }
}
