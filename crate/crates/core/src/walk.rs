//! The matrix-valued random walk on `ℤ × {vertices}` attached to a
//! dimension space: from `(m, i)` at level `n` the walk moves to
//! `(m + d, j)` with probability `(M_n[j, i], x^d)`.
//!
//! Simulation draws one `u64` per step from ChaCha8, seeded with
//! `seed_from_u64(seed)` and switched to stream `trial` for each trajectory,
//! so every trajectory is reproducible on its own and trials can run in any
//! order. Each step compares the draw against the thresholds
//! `⌈c_k · 2^64⌉` of the cumulative probabilities `c_k`, which realises
//! every transition probability to within `2^-64`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::dimspace::DimensionSpace;
use crate::error::{Error, Result};
use crate::laurent::{format_rational, LaurentPoly, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WalkState {
    pub position: BigInt,
    pub vertex: usize,
    pub level: usize,
}

impl WalkState {
    pub fn new(position: impl Into<BigInt>, vertex: usize, level: usize) -> Self {
        WalkState {
            position: position.into(),
            vertex,
            level,
        }
    }
}

/// Mass per terminal vertex and displacement from the start position.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementHistogram<M> {
    pub masses: Vec<BTreeMap<BigInt, M>>,
}

impl<M: Clone> DisplacementHistogram<M> {
    pub fn vertices(&self) -> usize {
        self.masses.len()
    }

    pub fn mass(&self, vertex: usize, displacement: &BigInt) -> Option<&M> {
        self.masses.get(vertex)?.get(displacement)
    }

    /// `{"<vertex>": {"<displacement>": <mass>}}`.
    pub fn to_json_with(&self, f: impl Fn(&M) -> Value) -> Value {
        let mut out = Map::new();
        for (v, m) in self.masses.iter().enumerate() {
            let inner = m.iter().map(|(d, x)| (d.to_string(), f(x))).collect();
            out.insert(v.to_string(), Value::Object(inner));
        }
        Value::Object(out)
    }
}

impl DisplacementHistogram<Rational> {
    pub fn total(&self) -> Rational {
        self.masses.iter().flat_map(|m| m.values()).sum()
    }

    pub fn to_json(&self) -> Value {
        self.to_json_with(|q| Value::String(format_rational(q)))
    }
}

impl DisplacementHistogram<u64> {
    pub fn trials(&self) -> u64 {
        self.masses.iter().flat_map(|m| m.values()).sum()
    }

    pub fn to_json(&self) -> Value {
        self.to_json_with(|c| Value::String(c.to_string()))
    }

    fn merge(mut self, other: Self) -> Self {
        for (mine, theirs) in self.masses.iter_mut().zip(other.masses) {
            for (d, c) in theirs {
                *mine.entry(d).or_insert(0) += c;
            }
        }
        self
    }
}

/// All one-step outcomes from `s` with their probabilities.
pub fn step_distribution<C: Scalar>(
    ds: &DimensionSpace<C>,
    s: &WalkState,
) -> Result<Vec<(WalkState, C)>> {
    if s.level >= ds.depth() {
        return Err(Error::DepthExceeded {
            requested: s.level,
            depth: ds.depth(),
        });
    }
    let m = ds.matrix(s.level);
    if s.vertex >= m.cols() {
        return Err(Error::InvalidParameter(format!(
            "vertex {} not in level {}",
            s.vertex, s.level
        )));
    }
    let mut out = Vec::new();
    for j in 0..m.rows() {
        for (d, c) in m.get(j, s.vertex).terms() {
            out.push((WalkState::new(&s.position + d, j, s.level + 1), c.clone()));
        }
    }
    Ok(out)
}

/// Exact law of the walk at level `n` started from `start`, as displacement
/// from `start.position`.
pub fn exact_distribution<C: Scalar>(
    ds: &DimensionSpace<C>,
    n: usize,
    start: &WalkState,
) -> Result<DisplacementHistogram<C>> {
    if n < start.level || n > ds.depth() {
        return Err(Error::RangeError(format!(
            "level {n} not between {} and {}",
            start.level,
            ds.depth()
        )));
    }
    let k = ds.dims()[start.level];
    if start.vertex >= k {
        return Err(Error::InvalidParameter(format!(
            "vertex {} not in level {}",
            start.vertex, start.level
        )));
    }
    let mut unit = vec![LaurentPoly::zero(); k];
    unit[start.vertex] = LaurentPoly::one();
    let v = ds.push_forward(&unit, start.level, n)?;
    Ok(DisplacementHistogram {
        masses: v
            .iter()
            .map(|p| p.terms().map(|(d, c)| (d.clone(), c.clone())).collect())
            .collect(),
    })
}

/// Absolute-position view of an exact law.
pub fn shifted<M: Clone>(h: &DisplacementHistogram<M>, by: &BigInt) -> DisplacementHistogram<M> {
    DisplacementHistogram {
        masses: h
            .masses
            .iter()
            .map(|m| m.iter().map(|(d, x)| (d + by, x.clone())).collect())
            .collect(),
    }
}

struct Outcome {
    row: usize,
    displacement: BigInt,
    threshold: u128,
}

fn samplers(
    ds: &DimensionSpace<Rational>,
    from: usize,
    to: usize,
) -> Result<Vec<Vec<Vec<Outcome>>>> {
    let scale = Rational::from_integer(BigInt::one() << 64);
    (from..to)
        .map(|n| {
            let m = ds.matrix(n);
            (0..m.cols())
                .map(|i| {
                    let mut cum = Rational::zero();
                    let mut out = Vec::new();
                    for j in 0..m.rows() {
                        for (d, c) in m.get(j, i).terms() {
                            if c.is_negative() {
                                return Err(Error::InvalidParameter(format!(
                                    "negative transition probability at level {n}"
                                )));
                            }
                            cum += c;
                            let t = (&cum * &scale).ceil().to_integer();
                            out.push(Outcome {
                                row: j,
                                displacement: d.clone(),
                                threshold: t.to_u128().unwrap_or(u128::MAX),
                            });
                        }
                    }
                    if !cum.is_one() {
                        return Err(Error::InvalidParameter(format!(
                            "column {i} of level {n} sums to {}, not 1",
                            format_rational(&cum)
                        )));
                    }
                    Ok(out)
                })
                .collect()
        })
        .collect()
}

/// Empirical law of `trials` independent trajectories from `start` to
/// level `n`.
pub fn simulate(
    ds: &DimensionSpace<Rational>,
    n: usize,
    start: &WalkState,
    trials: u64,
    seed: u64,
) -> Result<DisplacementHistogram<u64>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if n < start.level || n > ds.depth() {
        return Err(Error::RangeError(format!(
            "level {n} not between {} and {}",
            start.level,
            ds.depth()
        )));
    }
    if start.vertex >= ds.dims()[start.level] {
        return Err(Error::InvalidParameter(format!(
            "vertex {} not in level {}",
            start.vertex, start.level
        )));
    }
    let table = samplers(ds, start.level, n)?;
    let k = ds.dims()[n];
    let empty = || DisplacementHistogram {
        masses: vec![BTreeMap::new(); k],
    };
    let hist = (0..trials)
        .into_par_iter()
        .fold(empty, |mut h, trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let mut vertex = start.vertex;
            let mut disp = BigInt::zero();
            for level in &table {
                let u = rng.next_u64() as u128;
                let col = &level[vertex];
                let pick = col
                    .iter()
                    .find(|o| u < o.threshold)
                    .unwrap_or(col.last().unwrap());
                vertex = pick.row;
                disp += &pick.displacement;
            }
            *h.masses[vertex].entry(disp).or_insert(0) += 1;
            h
        })
        .reduce(empty, DisplacementHistogram::merge);
    Ok(hist)
}

/// `½ Σ |exact − count/trials|`, exact.
pub fn tv_distance(
    exact: &DisplacementHistogram<Rational>,
    empirical: &DisplacementHistogram<u64>,
) -> Result<Rational> {
    if exact.vertices() != empirical.vertices() {
        return Err(Error::DimensionMismatch(
            "histograms over different levels".into(),
        ));
    }
    let trials = Rational::from_integer(BigInt::from(empirical.trials()));
    if trials.is_zero() {
        return Err(Error::InvalidParameter("empty empirical histogram".into()));
    }
    let mut total = Rational::zero();
    for (e, m) in exact.masses.iter().zip(&empirical.masses) {
        for (d, p) in e {
            let q = m
                .get(d)
                .map_or_else(Rational::zero, |&c| Rational::from_integer(c.into()));
            total += Signed::abs(&(p - q / &trials));
        }
        for (d, &c) in m {
            if !e.contains_key(d) {
                total += Rational::from_integer(c.into()) / &trials;
            }
        }
    }
    Ok(total / Rational::from_integer(2.into()))
}

/// `Σ P(s → (p, j)) μ_{n+1}[j]`: the one-step expectation of the ℤ-invariant
/// function given by the level vectors `μ`.
pub fn one_step_expectation<C: Scalar>(
    ds: &DimensionSpace<C>,
    mu: &[Vec<C>],
    s: &WalkState,
) -> Result<C> {
    let next = mu
        .get(s.level + 1)
        .ok_or_else(|| Error::DimensionMismatch("no harmonic vector for the next level".into()))?;
    step_distribution(ds, s)?
        .into_iter()
        .try_fold(C::zero(), |acc, (t, p)| {
            let w = next
                .get(t.vertex)
                .ok_or_else(|| Error::DimensionMismatch("harmonic vector too short".into()))?;
            Ok(acc + p * w.clone())
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimspace::{build_matrices, ones_state};
    use crate::families;
    use crate::labeling::label_edges;
    use crate::laurent::rat;

    fn space(d: &crate::bratteli::OrderedBratteliDiagram) -> DimensionSpace {
        build_matrices(d, &label_edges(d))
    }

    #[test]
    fn odometer_step() {
        let ds = space(&families::odometer(4));
        let out = step_distribution(&ds, &WalkState::new(0, 0, 2)).unwrap();
        assert_eq!(
            out,
            vec![
                (WalkState::new(0, 0, 3), rat(1, 2)),
                (WalkState::new(4, 0, 3), rat(1, 2))
            ]
        );
        assert!(step_distribution(&ds, &WalkState::new(0, 0, 4)).is_err());
    }

    #[test]
    fn morse_step_from_five() {
        let ds = space(&families::morse(4));
        let out = step_distribution(&ds, &WalkState::new(5, 0, 2)).unwrap();
        assert_eq!(
            out,
            vec![
                (WalkState::new(5, 0, 3), rat(1, 2)),
                (WalkState::new(7, 1, 3), rat(1, 2))
            ]
        );
    }

    #[test]
    fn odometer_exact_is_uniform() {
        let ds = space(&families::odometer(3));
        let h = exact_distribution(&ds, 3, &WalkState::new(0, 0, 0)).unwrap();
        assert_eq!(h.masses[0].len(), 8);
        assert!(h.masses[0].values().all(|m| *m == rat(1, 8)));
        let point = exact_distribution(&ds, 0, &WalkState::new(9, 0, 0)).unwrap();
        assert_eq!(point.masses[0].get(&BigInt::zero()), Some(&rat(1, 1)));
    }

    #[test]
    fn simulation_is_deterministic() {
        let ds = space(&families::morse(4));
        let s = WalkState::new(0, 0, 0);
        let a = simulate(&ds, 4, &s, 500, 11).unwrap();
        let b = simulate(&ds, 4, &s, 500, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials(), 500);
        let one = simulate(&ds, 4, &s, 1, 3).unwrap();
        assert_eq!(one.trials(), 1);
        assert!(simulate(&ds, 4, &s, 0, 3).is_err());
    }

    #[test]
    fn tv_of_exact_against_itself_scaled() {
        let ds = space(&families::odometer(1));
        let exact = exact_distribution(&ds, 1, &WalkState::new(0, 0, 0)).unwrap();
        let mut emp = DisplacementHistogram {
            masses: vec![BTreeMap::new()],
        };
        emp.masses[0].insert(BigInt::zero(), 3);
        emp.masses[0].insert(BigInt::one(), 1);
        assert_eq!(tv_distance(&exact, &emp).unwrap(), rat(1, 4));
    }

    #[test]
    fn harmonic_expectation() {
        let ds = space(&families::circulant(3, 3));
        let mu = ones_state::<Rational>(ds.dims());
        for v in 0..3 {
            let e = one_step_expectation(&ds, &mu, &WalkState::new(-4, v, 1)).unwrap();
            assert_eq!(e, rat(1, 1));
        }
    }
}
