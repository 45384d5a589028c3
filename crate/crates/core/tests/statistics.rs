//! Monte Carlo checks of the estimators against known qualitative behavior.

use gradperc::arms::{arm_probability, arm_stream, quasi_multiplicativity_ratio};
use gradperc::charlen::{check_scaling_relation, estimate_characteristic_length, estimate_sigma, gradient_p, CharLenParams};
use gradperc::cluster::{crossing_probability, Orientation};
use gradperc::front::{extract_front, front_statistics, sample_strip, verify_front, StripSpec};
use gradperc::rng::stream_id;
use gradperc::{Color, DensityProfile, Executor, Region, SeedSpec, SiteCoord};

fn exec() -> Executor {
    Executor::sequential()
}

fn length(p: f64, params: &CharLenParams, seed: u64) -> u32 {
    estimate_characteristic_length(p, params, seed, &exec()).unwrap().length().expect("within cap")
}

#[test]
fn rsw_floor_on_two_by_one_parallelograms() {
    for n in [8u32, 16, 32, 64] {
        let r = Region::rectangle(2 * n, n);
        let est = crossing_probability(
            &r,
            &DensityProfile::critical(),
            Orientation::Horizontal,
            Color::Black,
            2000,
            SeedSpec::new(3, n as u64, 0),
            &exec(),
        )
        .unwrap();
        assert!(est.mean >= 0.1, "n={n}: {est:?}");
    }
}

#[test]
fn characteristic_length_is_symmetric_in_p() {
    let params = CharLenParams::default();
    for seed in 0..3 {
        let below = length(0.4, &params, seed);
        let above = length(0.6, &params, seed);
        assert!(below.abs_diff(above) <= 1, "seed {seed}: {below} vs {above}");
    }
}

#[test]
fn characteristic_length_grows_toward_criticality() {
    let params = CharLenParams::default();
    let grid = [0.40, 0.42, 0.44, 0.46, 0.48];
    for pair in grid.windows(2) {
        for seed in 10..13 {
            let (a, b) = (length(pair[0], &params, seed), length(pair[1], &params, seed + 100));
            assert!(a <= b, "L({}) = {a} > L({}) = {b}", pair[0], pair[1]);
        }
    }
}

#[test]
fn length_ratio_is_power_bounded() {
    let params = CharLenParams::default();
    let ratio = length(0.48, &params, 5) as f64 / length(0.42, &params, 5) as f64;
    assert!((1.0..=32.0).contains(&ratio), "{ratio}");
}

#[test]
fn scaling_relation_flags_far_from_critical() {
    let rel = check_scaling_relation(0.05, &CharLenParams::default(), 1000, 1, &exec()).unwrap();
    assert!(!rel.near_critical);
    let rel = check_scaling_relation(0.45, &CharLenParams::default(), 1000, 1, &exec()).unwrap();
    assert!(rel.near_critical);
    assert!(rel.product.unwrap() > 0.0);
}

#[test]
fn sigma_band_and_consistency() {
    let params = CharLenParams::default();
    for n in [64u32, 256, 1024] {
        let s = estimate_sigma(n, &params, 7, &exec()).unwrap();
        assert!(!s.degenerate, "{s:?}");
        let sigma = s.sigma as f64;
        if n == 256 {
            assert!((12.0..=49.0).contains(&sigma), "{sigma}");
        }
        let at_sigma = length(gradient_p(n, sigma), &params, 8);
        let ratio = at_sigma as f64 / sigma;
        assert!((0.25..=4.0).contains(&ratio), "N={n}: L(p(sigma))={at_sigma} sigma={sigma}");
        let at_double = length(gradient_p(n, 2.0 * sigma), &params, 9);
        assert!(at_double <= at_sigma, "N={n}: {at_double} > {at_sigma}");
    }
}

#[test]
fn sigma_barely_depends_on_eps() {
    let a = estimate_sigma(256, &CharLenParams { eps: 0.2, ..Default::default() }, 4, &exec()).unwrap().sigma as f64;
    let b = estimate_sigma(256, &CharLenParams { eps: 0.3, ..Default::default() }, 4, &exec()).unwrap().sigma as f64;
    assert!(a.max(b) / a.min(b) <= 3.0, "{a} {b}");
}

#[test]
fn two_arm_probability_decreases() {
    let pr = DensityProfile::critical();
    let est: Vec<f64> = [4u32, 8, 16, 32, 64]
        .iter()
        .map(|&n| arm_probability(2, 0, n, &pr, 4000, arm_stream(21, 2, 0, n, &pr), &exec()).unwrap().mean)
        .collect();
    assert!(est.windows(2).all(|w| w[1] < w[0]), "{est:?}");
}

#[test]
fn four_arm_a_priori_band() {
    let pr = DensityProfile::critical();
    for (n1, n2) in [(1u32, 4u32), (2, 8), (2, 16), (4, 16)] {
        let est = arm_probability(4, n1, n2, &pr, 4000, arm_stream(22, 4, n1, n2, &pr), &exec()).unwrap();
        let floor = 0.5 * (n1 as f64 / n2 as f64).powi(2);
        assert!(est.mean >= floor, "({n1},{n2}): {} < {floor}", est.mean);
    }
}

#[test]
fn quasi_multiplicativity_at_criticality() {
    let pr = DensityProfile::critical();
    let ratios: Vec<f64> = [32u32, 64, 128]
        .iter()
        .map(|&n2| quasi_multiplicativity_ratio(2, 8, n2, &pr, 2000, 23, &exec()).unwrap().ratio.unwrap())
        .collect();
    assert!((0.1..=10.0).contains(&ratios[0]), "{ratios:?}");
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    assert!(hi / lo <= 5.0, "{ratios:?}");
}

#[test]
fn near_critical_two_arm_probability_matches_critical() {
    let a = DensityProfile::homogeneous(0.45).unwrap();
    let b = DensityProfile::critical();
    let pa = arm_probability(2, 8, 32, &a, 4000, arm_stream(24, 2, 8, 32, &a), &exec()).unwrap().mean;
    let pb = arm_probability(2, 8, 32, &b, 4000, arm_stream(24, 2, 8, 32, &b), &exec()).unwrap().mean;
    let ratio = pa / pb;
    assert!((0.2..=5.0).contains(&ratio), "{pa} / {pb}");
}

#[test]
fn middle_row_is_balanced() {
    let spec = StripSpec::new(64, 2000, true).unwrap();
    let c = sample_strip(&spec, SeedSpec::new(31, 0, 0)).unwrap();
    let cols = 2000.0f64;
    let black = (1..=2000).filter(|&i| c.is_black(SiteCoord::new(i, 0))).count() as f64;
    let se = (0.25 / cols).sqrt();
    assert!((black / cols - 0.5).abs() <= 4.0 * se, "{}", black / cols);
}

#[test]
fn fronts_agree_with_cluster_oracle() {
    for n in [32u32, 64] {
        let spec = StripSpec::with_default_length(n, 8).unwrap();
        let stream = stream_id("front-oracle-test", &[n as u64]);
        for t in 0..1000 {
            let c = sample_strip(&spec, SeedSpec::new(41, stream, t)).unwrap();
            let path = extract_front(&c).unwrap();
            assert!(path.check_chirality(&c) && verify_front(&path, &c), "N={n} trial {t}");
        }
    }
}

#[test]
fn front_statistics_at_n256() {
    let n = 256u32;
    let sigma = estimate_sigma(n, &CharLenParams::default(), 7, &exec()).unwrap().sigma as i64;
    let spec = StripSpec::with_default_length(n, sigma as u32).unwrap();
    let t = spec.length as i64;
    let nn = n as i64;
    let full = Region::new(2 * sigma, t - 2 * sigma, -nn, nn).unwrap();
    let lower = Region::new(2 * sigma, t - 2 * sigma, -nn, -1).unwrap();
    let center = t / 2;
    let widths = [sigma / 4, sigma / 2, sigma, 2 * sigma];
    let strips = 1000;
    let mut excess_lower = Vec::with_capacity(strips);
    let mut exceed = [0u32; 3];
    let mut multi = [0u32; 4];
    for k in 0..strips as u64 {
        let c = sample_strip(&spec, SeedSpec::new(51, 0, k)).unwrap();
        let path = extract_front(&c).unwrap();
        let stats = front_statistics(&path, &c, &full).unwrap();
        for (u, slot) in exceed.iter_mut().enumerate() {
            *slot += (stats.max_abs_y > (u + 1) as f64 * sigma as f64) as u32;
        }
        excess_lower.push(front_statistics(&path, &c, &lower).map(|s| s.boundary_excess()).unwrap_or(0) as f64);
        for (w, slot) in widths.iter().zip(multi.iter_mut()) {
            let (lo, hi) = ((center - w / 2) as f64, (center + w / 2) as f64);
            *slot += (path.band_traversals(lo, hi) >= 3) as u32;
        }
    }
    let mean = excess_lower.iter().sum::<f64>() / strips as f64;
    assert!(mean > 0.0, "black excess below the midline: {mean}");
    assert!(exceed.windows(2).all(|w| w[1] <= w[0]), "{exceed:?}");
    assert!(multi.windows(2).all(|w| w[1] <= w[0]), "{multi:?}");
    assert!(multi[0] > multi[3], "{multi:?}");
}
