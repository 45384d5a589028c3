//! Pathwise invariants on randomly generated configurations.

use gradperc::arms::ArmDetector;
use gradperc::cluster::{has_crossing, Orientation};
use gradperc::front::{extract_front, front_statistics, sample_strip, verify_front, StripSpec};
use gradperc::{Annulus, Color, Configuration, DensityProfile, Region, SeedSpec, SiteCoord};
use proptest::prelude::*;

fn sample(r: Region, p: f64, seed: u64) -> Configuration {
    gradperc::profile::sample_configuration(r, &DensityProfile::homogeneous(p).unwrap(), SeedSpec::new(seed, 0, 0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exactly_one_of_black_horizontal_and_white_vertical(n in 1u32..40, p in 0.0f64..=1.0, seed: u64) {
        let r = Region::square(n);
        let c = sample(r, p, seed);
        let h = has_crossing(&c, &r, Orientation::Horizontal, Color::Black).unwrap();
        let v = has_crossing(&c, &r, Orientation::Vertical, Color::White).unwrap();
        prop_assert_ne!(h, v);
    }

    #[test]
    fn adding_black_keeps_black_crossings(n in 2u32..30, seed: u64, flips in proptest::collection::vec((0usize..900, 0usize..900), 1..40)) {
        let r = Region::square(n);
        let mut c = sample(r, 0.5, seed);
        let before = has_crossing(&c, &r, Orientation::Horizontal, Color::Black).unwrap();
        for (a, b) in flips {
            c.set(SiteCoord::new((a % n as usize) as i64, (b % n as usize) as i64), Color::Black);
        }
        let after = has_crossing(&c, &r, Orientation::Horizontal, Color::Black).unwrap();
        prop_assert!(!before || after);
    }

    #[test]
    fn flipping_colors_swaps_crossings(n in 1u32..30, p in 0.0f64..=1.0, seed: u64) {
        let r = Region::square(n);
        let c = sample(r, p, seed);
        let f = c.flipped();
        for o in [Orientation::Horizontal, Orientation::Vertical] {
            prop_assert_eq!(
                has_crossing(&c, &r, o, Color::Black).unwrap(),
                has_crossing(&f, &r, o, Color::White).unwrap()
            );
        }
    }

    #[test]
    fn four_arms_imply_two_arms(n1 in 0u32..4, extra in 1u32..12, p in 0.3f64..0.7, seed: u64) {
        let a = Annulus::new(n1, n1 + extra).unwrap();
        let c = sample(a.outer_region(), p, seed);
        let mut det = ArmDetector::new();
        let four = det.detect(&c, &a, 4);
        let two = det.detect(&c, &a, 2);
        prop_assert!(!four || two);
        // Detection is invariant under the color flip.
        let f = c.flipped();
        prop_assert_eq!(det.detect(&f, &a, 4), four);
        prop_assert_eq!(det.detect(&f, &a, 2), two);
    }

    #[test]
    fn extracted_fronts_are_valid(n in 16u32..48, seed: u64) {
        let min_len = (4.0 * (n as f64).powf(4.0 / 7.0)).ceil() as u32;
        let spec = StripSpec::new(n, min_len + 10, true).unwrap();
        let c = sample_strip(&spec, SeedSpec::new(seed, 1, 0)).unwrap();
        let path = extract_front(&c).unwrap();
        prop_assert!(path.check_chirality(&c));
        prop_assert!(path.is_self_avoiding());
        prop_assert!(verify_front(&path, &c));
        let last = path.edges.last().unwrap();
        prop_assert!(last.black.i == spec.length as i64 || last.white.i == spec.length as i64);
        let window = Region::new(2, spec.length as i64 - 2, -(n as i64), n as i64).unwrap();
        let stats = front_statistics(&path, &c, &window).unwrap();
        prop_assert!(stats.max_abs_y <= n as f64);
        prop_assert!(stats.boundary_total() > 0);
    }
}
