use adicspace::laurent::{rat, Rational};
use adicspace::rotation::CFExpansion;
use adicspace::stacking::{build_tower, compare_with_rotation, extent_limit, Skyscraper};
use adicspace::Error;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn linear(depth: u64) -> CFExpansion {
    let terms: Vec<u64> = (1..=depth).map(|n| n + 1).collect();
    CFExpansion::from_u64(&terms, Some("linear".parse().unwrap())).unwrap()
}

#[test]
fn bottom_orbit_climbs_the_tower() {
    let cf = linear(8);
    for stage in 1..=4 {
        let t = build_tower(&cf, stage).unwrap();
        let mut x = Rational::zero();
        for level in 0..t.height() {
            assert_eq!(t.locate(&x).unwrap(), level);
            match t.map(&x) {
                Ok(y) => x = y,
                Err(Error::TopLevel(_)) => assert_eq!(level + 1, t.height()),
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn spacers_per_stage() {
    let cf = linear(8);
    for n in 1..6 {
        let (t, next) = (
            build_tower(&cf, n).unwrap(),
            build_tower(&cf, n + 1).unwrap(),
        );
        let a = cf.a(n + 1).unwrap().to_usize().unwrap();
        let spacers = next.height() - a * t.height();
        assert_eq!(
            BigInt::from(spacers),
            BigInt::from(a) * cf.q(n as isize - 2).unwrap()
        );
        assert_eq!(
            BigInt::from(next.height()),
            cf.a(n + 1).unwrap() * cf.q(n as isize).unwrap()
        );
    }
}

#[test]
fn extent_limit_encloses_later_extents() {
    let cf = linear(10);
    let l = extent_limit(&cf).unwrap();
    let t = build_tower(&cf, 8).unwrap();
    assert!(t.extent() < l.lo());
    let deep = linear(16);
    let dl = extent_limit(&deep).unwrap();
    assert!(dl.lo() >= l.lo() && dl.hi() <= l.hi());
}

#[test]
fn comparison_report_counts_every_non_top_point() {
    let cf = linear(10);
    let t = build_tower(&cf, 3).unwrap();
    let r = compare_with_rotation(&t, &cf, 1000, &rat(1, 8)).unwrap();
    let covered: usize = r.translations.iter().map(|x| x.points).sum();
    assert_eq!(covered, r.counted);
    assert!(r.counted < 1000);
    assert!(r.outside + r.undecided <= r.counted);
    assert!(compare_with_rotation(&t, &cf, 0, &rat(1, 8)).is_err());
    let json = r.to_json();
    assert_eq!(json["grid"], 1000);
}

#[test]
fn skyscraper_orbit_visits_every_floor_once() {
    let cf = linear(8);
    for depth in 1..=5 {
        let s = Skyscraper::new(&cf, depth).unwrap();
        let (visited, expected) = s.orbit_count().unwrap();
        assert_eq!(BigInt::from(visited), expected, "depth {depth}");
    }
    assert!(matches!(
        Skyscraper::new(&cf, 9),
        Err(Error::InsufficientDepth(_))
    ));
}

proptest! {
    #[test]
    fn later_stages_extend_earlier_ones(stage in 1usize..5, num in 0u64..1_000_000, den in 1u64..1_000_000) {
        let cf = linear(8);
        let t = build_tower(&cf, stage).unwrap();
        let next = build_tower(&cf, stage + 1).unwrap();
        let x = t.extent() * Rational::new(BigInt::from(num % den), BigInt::from(den));
        if let Ok(y) = t.map(&x) {
            prop_assert_eq!(next.map(&x).unwrap(), y);
        }
    }
}
