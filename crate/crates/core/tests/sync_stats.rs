use num_complex::Complex64;
use otfs_core::channel::complex_gaussian;
use otfs_core::sync::{correlate_and_sync, correlate_multipath, PreambleSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn template() -> Vec<Complex64> {
    PreambleSpec::default().waveform(3.84e6).unwrap().samples
}

/// Unit-power preamble after `lead` zeros, then a zero tail, plus noise of
/// variance `nv` everywhere.
fn received(t: &[Complex64], lead: usize, nv: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let p = t.iter().map(|v| v.norm_sqr()).sum::<f64>() / t.len() as f64;
    let mut rx = vec![Complex64::new(0.0, 0.0); lead + t.len() + 64];
    for (i, v) in t.iter().enumerate() {
        rx[lead + i] = v / p.sqrt();
    }
    if nv > 0.0 {
        rx.iter_mut().for_each(|v| *v += complex_gaussian(rng, nv));
    }
    rx
}

#[test]
fn noiseless_offset_is_exact() {
    let t = template();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for lead in [0, 1, 17, 64, 200] {
        let rx = received(&t, lead, 0.0, &mut rng);
        let r = correlate_and_sync(&rx, &t, 0.6).unwrap();
        assert!(r.detected);
        assert_eq!(r.offset, lead);
    }
}

#[test]
fn zero_db_offset_within_one_sample() {
    let t = template();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let trials = 1000;
    let mut good = 0;
    for _ in 0..trials {
        let lead = rng.random_range(0..=64);
        let rx = received(&t, lead, 1.0, &mut rng);
        let r = correlate_and_sync(&rx, &t, 0.6).unwrap();
        if r.detected && (r.offset as i64 - lead as i64).abs() <= 1 {
            good += 1;
        }
    }
    assert!(good as f64 / trials as f64 > 0.99, "{good}/{trials}");
}

#[test]
fn false_alarm_on_noise() {
    let t = template();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let trials = 1000;
    let (mut alarms, mut alarms_strict, mut alarms_multipath) = (0, 0, 0);
    for _ in 0..trials {
        let rx: Vec<Complex64> = (0..t.len() + 128).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        alarms += correlate_and_sync(&rx, &t, 0.6).unwrap().detected as usize;
        alarms_strict += correlate_and_sync(&rx, &t, 0.8).unwrap().detected as usize;
        alarms_multipath += correlate_multipath(&rx, &t, 0.6, 6).unwrap().detected as usize;
    }
    assert!((alarms as f64) < 0.01 * trials as f64, "{alarms}");
    assert_eq!(alarms_strict, 0);
    assert!((alarms_multipath as f64) < 0.01 * trials as f64, "{alarms_multipath}");
}
