use std::collections::BTreeMap;

use adicspace::bratteli::{Predecessor, Successor};
use adicspace::dimspace::{build_matrices, is_nonincreasing, ones_state};
use adicspace::families;
use adicspace::labeling::label_edges;
use adicspace::laurent::{LaurentMatrix, LaurentPoly, Rational};
use adicspace::walk::{exact_distribution, shifted, step_distribution, WalkState};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coeff() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn poly() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((-8i64..=8, coeff()), 0..5).prop_map(LaurentPoly::from_terms)
}

fn matrix(r: usize, c: usize) -> impl Strategy<Value = LaurentMatrix> {
    prop::collection::vec(prop::collection::vec(poly(), c), r)
        .prop_map(|rows| LaurentMatrix::from_rows(rows).unwrap())
}

fn nonneg_poly() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((-8i64..=8, 0i64..=9), 0..5).prop_map(|t| {
        LaurentPoly::from_terms(
            t.into_iter()
                .map(|(e, c)| (e, Rational::from_integer(c.into()))),
        )
    })
}

proptest! {
    #[test]
    fn ring_axioms(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert_eq!(&p * &LaurentPoly::one(), p.clone());
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(p in poly(), q in poly()) {
        prop_assert_eq!((&p * &q).eval_at_one(), p.eval_at_one() * q.eval_at_one());
        prop_assert_eq!((&p + &q).eval_at_one(), p.eval_at_one() + q.eval_at_one());
    }

    #[test]
    fn shift_is_multiplication_by_a_monomial(p in poly(), s in -10i64..=10) {
        let x = LaurentPoly::monomial(s, Rational::from_integer(1.into()));
        prop_assert_eq!(p.shift(&BigInt::from(s)), &p * &x);
    }

    #[test]
    fn mat_mul_is_associative(a in matrix(2, 3), b in matrix(3, 2), c in matrix(2, 2)) {
        let left = a.mat_mul(&b).unwrap().mat_mul(&c).unwrap();
        let right = a.mat_mul(&b.mat_mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn one_norm_is_multiplicative_on_nonnegative_polys(p in nonneg_poly(), q in nonneg_poly()) {
        prop_assert_eq!((&p * &q).one_norm(), p.one_norm() * q.one_norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn successor_increments_and_sums_are_consecutive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = families::random_diagram(&mut rng, 3, 3, 4);
        let l = label_edges(&d);
        for n in 0..d.depth() {
            for v in 0..d.dim(n + 1) {
                let paths = d.enumerate_paths(n, Some(v)).unwrap();
                for (i, p) in paths.iter().enumerate() {
                    prop_assert_eq!(l.path_bsum(p), BigInt::from(i));
                    match d.successor(p).unwrap() {
                        Successor::Path(q) => {
                            prop_assert_eq!(l.cocycle(&d, p, &q).unwrap(), BigInt::from(1));
                            prop_assert_eq!(d.predecessor(&q).unwrap(), Predecessor::Path(p.clone()));
                        }
                        Successor::Maximal => prop_assert_eq!(i + 1, paths.len()),
                    }
                }
                prop_assert_eq!(l.wmax(n + 1, v), &BigInt::from(paths.len() - 1));
                prop_assert_eq!(l.wmin(n + 1, v), &BigInt::zero());
            }
        }
    }

    #[test]
    fn matrices_are_stochastic_and_harmonic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = families::random_diagram(&mut rng, 4, 3, 4);
        let ds = build_matrices(&d, &label_edges(&d));
        prop_assert!(ds.is_column_stochastic());
        prop_assert!(ds.check_harmonic(&ones_state::<Rational>(ds.dims())).unwrap().pass);
    }

    #[test]
    fn state_is_compatible_and_norms_decrease(
        seed in any::<u64>(),
        f in prop::collection::vec(poly(), 4),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = families::random_diagram(&mut rng, 4, 2, 4);
        let ds = build_matrices(&d, &label_edges(&d));
        let mu = ones_state::<Rational>(ds.dims());
        let k = ds.dims()[1];
        let f = &f[..k];
        let pushed = ds.push_forward(f, 1, 2).unwrap();
        prop_assert_eq!(ds.state_eval(&mu[1], f).unwrap(), ds.state_eval(&mu[2], &pushed).unwrap());
        prop_assert!(is_nonincreasing(&ds.norm_sequence(f, 1, ds.depth()).unwrap()));
    }

    #[test]
    fn walk_law_is_shift_equivariant(start in -50i64..=50, family in 0usize..3) {
        let d = match family {
            0 => families::odometer(4),
            1 => families::morse(4),
            _ => families::circulant(3, 4),
        };
        let ds = build_matrices(&d, &label_edges(&d));
        let base = exact_distribution(&ds, 4, &WalkState::new(0, 0, 0)).unwrap();
        // Absolute positions by stepping from the shifted start.
        let mut states: BTreeMap<(BigInt, usize), Rational> = BTreeMap::new();
        states.insert((BigInt::from(start), 0), Rational::from_integer(1.into()));
        for level in 0..4 {
            let mut next = BTreeMap::new();
            for ((pos, v), w) in states {
                for (s, p) in step_distribution(&ds, &WalkState::new(pos, v, level)).unwrap() {
                    *next.entry((s.position, s.vertex)).or_insert_with(Rational::zero) += &w * p;
                }
            }
            states = next;
        }
        let want = shifted(&base, &BigInt::from(start));
        for v in 0..want.vertices() {
            let got: BTreeMap<BigInt, Rational> = states
                .iter()
                .filter(|((_, u), _)| *u == v)
                .map(|((pos, _), w)| (pos.clone(), w.clone()))
                .collect();
            prop_assert_eq!(&got, &want.masses[v]);
        }
    }
}
