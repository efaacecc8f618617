mod common;

use std::f64::consts::PI;

use common::ks_distance;
use qce_core::distributions::{cdf_v, sample_quant_gain, sample_v};
use qce_core::model::QuantLevels;
use qce_core::precoding::quantized_mf;
use qce_core::rng::{draw_channel, tag, RandomStream};
use qce_core::{PskConstellation, QceAlphabet};

const N: usize = 1_000_000;

fn stream(index: u64) -> RandomStream {
    RandomStream::tagged(0x5eed, tag::CHECK, index)
}

#[test]
fn channel_magnitudes_are_rayleigh() {
    let mut s = stream(1);
    let mut mags: Vec<f64> = (0..N).map(|_| s.complex_normal().norm()).collect();
    let d = ks_distance(&mut mags, |r| 1.0 - (-r * r).exp());
    assert!(d < 0.005, "KS {d}");
}

#[test]
fn channel_phases_are_uniform() {
    let mut s = stream(2);
    let h = draw_channel(N, &mut s);
    let mut phases: Vec<f64> = h.entries.iter().map(|z| z.arg()).collect();
    let d = ks_distance(&mut phases, |x| (x + PI) / (2.0 * PI));
    assert!(d < 0.005, "KS {d}");
}

#[test]
fn precoder_angle_errors_are_uniform() {
    for &l in &[2u32, 3, 8, 9] {
        let alphabet = QceAlphabet::new(l, 1, 1.0).unwrap();
        let psk = PskConstellation::new(4).unwrap();
        let mut s = stream(10 + l as u64);
        let mut thetas = Vec::with_capacity(200_000);
        while thetas.len() < 200_000 {
            let h = draw_channel(5, &mut s);
            let sym = psk.point(s.index(4));
            thetas.extend(quantized_mf(&h, sym, &alphabet).unwrap().theta);
        }
        let w = PI / l as f64;
        assert!(thetas.iter().all(|t| t.abs() <= w + 1e-12));
        let d = ks_distance(&mut thetas, |t| ((t + w) / (2.0 * w)).clamp(0.0, 1.0));
        assert!(d < 0.005, "L={l}: KS {d}");
    }
}

#[test]
fn v_samples_match_cdf() {
    for &(m, l) in &[(4u32, 4u32), (4, 2), (8, 8), (8, 4), (4, 1), (8, 9)] {
        let levels = QuantLevels::Finite(l);
        let mut s = stream(100 + 16 * m as u64 + l as u64);
        let mut v: Vec<f64> = (0..N).map(|_| sample_v(m, levels, &mut s)).collect();
        let d = ks_distance(&mut v, |x| cdf_v(x, m, levels));
        assert!(d < 0.005, "M={m} L={l}: KS {d}");
    }
}

#[test]
fn negative_margin_probability() {
    for &(m, l) in &[(4u32, 2u32), (8, 4), (8, 7), (4, 3)] {
        let levels = QuantLevels::Finite(l);
        let mut s = stream(300 + 16 * m as u64 + l as u64);
        let hits = (0..N).filter(|_| sample_v(m, levels, &mut s) <= 0.0).count() as f64;
        let p = 1.0 - l as f64 / m as f64;
        let se = (p * (1.0 - p) / N as f64).sqrt();
        assert!((hits / N as f64 - p).abs() < 3.0 * se, "M={m} L={l}");
        assert!((cdf_v(0.0, m, levels) - p).abs() < 1e-12);
    }
}

#[test]
fn quant_gain_parts_are_consistent() {
    let mut s = stream(400);
    for _ in 0..10_000 {
        let g = sample_quant_gain(8, QuantLevels::Finite(5), &mut s);
        assert!(g.theta.abs() <= PI / 5.0);
        assert!(g.alpha_i * g.v >= 0.0);
    }
    let g = sample_quant_gain(8, QuantLevels::Infinite, &mut s);
    assert_eq!((g.theta, g.v), (0.0, 1.0));
}
