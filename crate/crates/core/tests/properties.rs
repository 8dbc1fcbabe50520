use num_complex::Complex64;
use otfs_core::channel::{apply_channel, dd_effective_channel, ChannelTap};
use otfs_core::fec::crc::{crc24_attach, crc24_check};
use otfs_core::fec::qam::{qam_demap_llr, qam_map};
use otfs_core::fft::Fft;
use otfs_core::frame::OtfsFrameConfig;
use otfs_core::otfs::{otfs_demodulate, otfs_modulate, DdGrid, WindowSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(seed: u64, len: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitary_fft_keeps_energy_and_inverts(len in 1usize..300, seed in any::<u64>()) {
        let x = noise(seed, len);
        let f = Fft::new(len);
        let mut y = x.clone();
        f.forward_unitary(&mut y);
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((ex - ey).abs() < 1e-9 * ex.max(1.0));
        f.inverse_unitary(&mut y);
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn crc_catches_any_single_flip(bits in proptest::collection::vec(0u8..2, 1..400), pos in any::<prop::sample::Index>()) {
        let mut c = crc24_attach(&bits);
        prop_assert!(crc24_check(&c));
        let i = pos.index(c.len());
        c[i] ^= 1;
        prop_assert!(!crc24_check(&c));
    }

    #[test]
    fn qam_llr_signs_recover_bits(q in prop::sample::select(vec![2u32, 4, 6]), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..q as usize * 20).map(|_| rng.random_range(0..2)).collect();
        let s = qam_map(&bits, q).unwrap();
        let llr = qam_demap_llr(&s, 1e-3, q).unwrap();
        for (b, l) in bits.iter().zip(&llr) {
            // Positive LLR favours bit 0.
            prop_assert_eq!(*b == 0, *l > 0.0);
        }
    }

    #[test]
    fn dd_operator_predicts_chain_on_integer_taps(seed in any::<u64>(), d in 0usize..4, k in -3i64..=3) {
        let cfg = OtfsFrameConfig::without_pilot(8, 4, 3, 1e6);
        let w = WindowSpec::rectangular(8, 4);
        let taps = [
            ChannelTap::new(Complex64::new(0.8, 0.1), 0.0, 0.0),
            ChannelTap::new(Complex64::new(-0.2, 0.5), d as f64 / cfg.sample_rate, k as f64 * cfg.doppler_resolution()),
        ];
        let mut x = DdGrid::zeros(8, 4);
        x.as_mut_slice().copy_from_slice(&noise(seed, 32));
        let r = apply_channel(&otfs_modulate(&x, &w, &cfg).unwrap(), &taps, 0.0).unwrap();
        let y = otfs_demodulate(&r, &w, &cfg).unwrap();
        let h = dd_effective_channel(&taps, &cfg).unwrap();
        for (a, b) in h.apply(x.as_slice()).iter().zip(y.as_slice()) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }
}
