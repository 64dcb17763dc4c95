//! Cutting and stacking for the rotation by `α`, and the skyscraper over the
//! product odometer on `∏{1..a(n)}`.
//!
//! Towers are kept in their natural, unscaled coordinates. Stage 1 cuts
//! `[0, 1)` into `a(1)` levels; stage `n + 1` cuts every level of stage `n`
//! into `a(n+1)` equal pieces, puts `q(n−2)` fresh spacer levels (taken from
//! `[L, L + w)` just beyond the space used so far) on top of each sub-column,
//! and stacks sub-column `k + 1` on sub-column `k`. Stage `n` therefore
//! covers `[0, L_n)` with `L_n = q(n−1) / (a(1)⋯a(n−1))`. Only the comparison
//! with the rotation rescales, using an enclosure of `1/L_∞`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::laurent::{format_rational, Interval, Rational, Scalar};
use crate::rotation::CFExpansion;

#[derive(Clone, Debug, PartialEq)]
pub struct Tower {
    stage: usize,
    /// Left endpoints, bottom level first.
    levels: Vec<Rational>,
    width: Rational,
    extent: Rational,
    /// `(left endpoint, level index)` sorted by position.
    index: Vec<(Rational, usize)>,
}

pub fn build_tower(cf: &CFExpansion, stage: usize) -> Result<Tower> {
    if stage == 0 || stage > cf.depth() {
        return Err(Error::InsufficientDepth(format!(
            "stage {stage} needs 1 <= stage <= {}",
            cf.depth()
        )));
    }
    let a = |n: usize| -> Result<usize> {
        cf.a(n)?
            .to_usize()
            .ok_or_else(|| Error::InvalidParameter(format!("a({n}) too large to stack")))
    };
    let a1 = a(1)?;
    let mut width = Rational::new(BigInt::one(), BigInt::from(a1));
    let mut levels: Vec<Rational> = (0..a1)
        .map(|i| &width * Rational::from_integer(i.into()))
        .collect();
    let mut extent = Rational::one();
    for n in 1..stage {
        let pieces = a(n + 1)?;
        let spacers = cf
            .q(n as isize - 2)?
            .to_usize()
            .ok_or_else(|| Error::InvalidParameter("spacer count too large".into()))?;
        let w = &width / Rational::from_integer(pieces.into());
        let mut next = Vec::with_capacity(pieces * (levels.len() + spacers));
        for k in 0..pieces {
            let offset = &w * Rational::from_integer(k.into());
            next.extend(levels.iter().map(|lo| lo + &offset));
            for _ in 0..spacers {
                next.push(extent.clone());
                extent += &w;
            }
        }
        levels = next;
        width = w;
    }
    let mut index: Vec<(Rational, usize)> = levels.iter().cloned().zip(0..).collect();
    index.sort();
    Ok(Tower {
        stage,
        levels,
        width,
        extent,
        index,
    })
}

impl Tower {
    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn width(&self) -> &Rational {
        &self.width
    }

    /// Right end of the space `[0, L)` the tower partitions.
    pub fn extent(&self) -> &Rational {
        &self.extent
    }

    /// `[lo, hi)` of level `i`.
    pub fn level(&self, i: usize) -> (Rational, Rational) {
        let lo = self.levels[i].clone();
        let hi = &lo + &self.width;
        (lo, hi)
    }

    /// Index of the level containing `x`.
    pub fn locate(&self, x: &Rational) -> Result<usize> {
        let pos = self.index.partition_point(|(lo, _)| lo <= x);
        if pos == 0 {
            return Err(Error::PointOutsideTower(format_rational(x)));
        }
        let (lo, i) = &self.index[pos - 1];
        if *x < lo + &self.width {
            Ok(*i)
        } else {
            Err(Error::PointOutsideTower(format_rational(x)))
        }
    }

    /// Translates `x` from its level to the one above.
    pub fn map(&self, x: &Rational) -> Result<Rational> {
        let i = self.locate(x)?;
        if i + 1 == self.height() {
            return Err(Error::TopLevel(format_rational(x)));
        }
        Ok(x - &self.levels[i] + &self.levels[i + 1])
    }

    /// Levels are disjoint, tile `[0, L)`, and each non-top level is carried
    /// by a translation onto the next level with equal width.
    pub fn is_measure_preserving(&self) -> bool {
        let tiles = self
            .index
            .first()
            .map(|(lo, _)| lo.is_zero())
            .unwrap_or(false)
            && self
                .index
                .windows(2)
                .all(|w| w[1].0 == &w[0].0 + &self.width)
            && self.index.last().map(|(lo, _)| lo + &self.width) == Some(self.extent.clone());
        if !tiles {
            return false;
        }
        (0..self.height() - 1).all(|i| {
            let (lo, hi) = self.level(i);
            let inner = &hi - &self.width / Rational::from_integer(2.into());
            let shift = &self.levels[i + 1] - &lo;
            self.map(&lo).ok() == Some(&lo + &shift)
                && self.map(&inner).ok() == Some(&inner + &shift)
                && self.locate(&(&lo + &shift)).ok() == Some(i + 1)
        })
    }

    /// Ordered `["lo", "hi"]` pairs, bottom first.
    pub fn to_json(&self) -> Value {
        json!({
            "stage": self.stage,
            "height": self.height(),
            "width": format_rational(&self.width),
            "extent": format_rational(&self.extent),
            "levels": (0..self.height()).map(|i| {
                let (lo, hi) = self.level(i);
                json!([format_rational(&lo), format_rational(&hi)])
            }).collect::<Vec<_>>(),
        })
    }
}

/// `L_D = q(D)/(a(1)⋯a(D))` bounds `L_∞` from below, and
/// `L_∞ ≤ L_D/(1 − τ_D)` where `τ_D` bounds `Σ_{n≥D} 1/(a(n)a(n+1))`.
/// Needs a declared growth rule.
pub fn extent_limit(cf: &CFExpansion) -> Result<Interval> {
    let rule = cf.rule().ok_or_else(|| {
        Error::InsufficientDepth(
            "the limit of the tower extent needs a declared growth rule".into(),
        )
    })?;
    let d = cf.depth();
    let prod: BigInt = (1..=d).map(|n| cf.a(n).unwrap().clone()).product();
    let ld = Rational::new(cf.q(d as isize)?.clone(), prod);
    let tau = cf.tail_bound(rule, d);
    if tau >= Rational::one() {
        return Err(Error::InsufficientDepth(
            "tail bound is not below 1; supply more terms".into(),
        ));
    }
    let hi = &ld / (Rational::one() - tau);
    Ok(Interval::hull(ld, hi))
}

fn circle_distance(x: &Interval) -> Interval {
    let m = x.midpoint().round();
    let u = x.clone() - Interval::point(m);
    let mag = u.magnitude();
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    if mag.hi() <= &half {
        return mag;
    }
    let lo = std::cmp::min(mag.lo().clone(), Rational::one() - mag.hi());
    Interval::new(lo, half).expect("ordered")
}

/// One distinct translation value `T_n(x) − x` and its grid mass.
#[derive(Clone, Debug)]
pub struct Translation {
    pub shift: Rational,
    /// `shift / L_∞ mod 1`, enclosed.
    pub scaled: Interval,
    /// Circle distance of `scaled` to `α`, enclosed.
    pub distance: Interval,
    pub points: usize,
}

#[derive(Clone, Debug)]
pub struct DeviationReport {
    pub stage: usize,
    pub grid: usize,
    pub tolerance: Rational,
    /// Grid points not on the top level.
    pub counted: usize,
    /// Certainly farther than `tolerance` from `α`.
    pub outside: usize,
    /// Enclosure straddles the tolerance.
    pub undecided: usize,
    pub translations: Vec<Translation>,
}

impl DeviationReport {
    /// `outside / counted`.
    pub fn outside_fraction(&self) -> Rational {
        if self.counted == 0 {
            return Rational::zero();
        }
        Rational::new(BigInt::from(self.outside), BigInt::from(self.counted))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "stage": self.stage,
            "grid": self.grid,
            "tolerance": format_rational(&self.tolerance),
            "counted": self.counted,
            "outside": self.outside,
            "undecided": self.undecided,
            "outside_fraction": format_rational(&self.outside_fraction()),
            "distinct_translations": self.translations.len(),
            "translations": self.translations.iter().map(|t| json!({
                "shift": format_rational(&t.shift),
                "scaled": t.scaled.to_json(),
                "distance_to_alpha": t.distance.to_json(),
                "points": t.points,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Evaluates `T_n(x) − x` on the grid `x_j = (j + ½)·L_n/grid`, rescales by
/// the `1/L_∞` enclosure and measures the circle distance to `α`.
pub fn compare_with_rotation(
    t: &Tower,
    cf: &CFExpansion,
    grid: usize,
    tolerance: &Rational,
) -> Result<DeviationReport> {
    if grid == 0 {
        return Err(Error::InvalidParameter(
            "grid must have at least one point".into(),
        ));
    }
    let limit = extent_limit(cf)?;
    let inv = Interval::hull(limit.hi().recip(), limit.lo().recip());
    let step = t.extent() / Rational::from_integer(grid.into());
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let shifts: Vec<Option<Rational>> = (0..grid)
        .into_par_iter()
        .map(|j| {
            let x = &step * (Rational::from_integer(j.into()) + &half);
            match t.map(&x) {
                Ok(y) => Ok(Some(y - x)),
                Err(Error::TopLevel(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut groups: BTreeMap<Rational, usize> = BTreeMap::new();
    for s in shifts.into_iter().flatten() {
        *groups.entry(s).or_insert(0) += 1;
    }
    let alpha = cf.alpha().clone();
    let mut translations = Vec::with_capacity(groups.len());
    let (mut counted, mut outside, mut undecided) = (0, 0, 0);
    for (shift, points) in groups {
        let scaled = inv.scale(&shift);
        let distance = circle_distance(&(scaled.clone() - alpha.clone()));
        counted += points;
        if distance.lo() > tolerance {
            outside += points;
        } else if distance.hi() > tolerance {
            undecided += points;
        }
        let m = scaled.midpoint().floor();
        translations.push(Translation {
            shift,
            scaled: scaled - Interval::point(m),
            distance,
            points,
        });
    }
    Ok(DeviationReport {
        stage: t.stage(),
        grid,
        tolerance: tolerance.clone(),
        counted,
        outside,
        undecided,
        translations,
    })
}

/// The skyscraper over the product odometer on `∏_{n≤D}{1..a(n)}`.
#[derive(Clone, Debug)]
pub struct Skyscraper {
    a: Vec<u64>,
    /// `q[n] = q(n)` for `0 ≤ n ≤ D`.
    q: Vec<BigInt>,
}

/// A point `(x, height)` with `x = (x_1, …, x_D)`, `1 ≤ x_n ≤ a(n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkyscraperPoint {
    pub base: Vec<u64>,
    pub height: BigInt,
}

impl Skyscraper {
    pub fn new(cf: &CFExpansion, depth: usize) -> Result<Self> {
        if depth == 0 || depth > cf.depth() {
            return Err(Error::InsufficientDepth(format!(
                "skyscraper depth {depth} needs 1 <= depth <= {}",
                cf.depth()
            )));
        }
        let a = (1..=depth)
            .map(|n| {
                cf.a(n)?
                    .to_u64()
                    .ok_or_else(|| Error::InvalidParameter(format!("a({n}) too large")))
            })
            .collect::<Result<Vec<_>>>()?;
        let q = (0..=depth)
            .map(|n| cf.q(n as isize).cloned())
            .collect::<Result<_>>()?;
        Ok(Skyscraper { a, q })
    }

    pub fn depth(&self) -> usize {
        self.a.len()
    }

    fn check(&self, x: &[u64]) -> Result<()> {
        if x.len() != self.depth() || x.iter().zip(&self.a).any(|(&d, &a)| d == 0 || d > a) {
            return Err(Error::InvalidParameter(format!(
                "{x:?} is not a word of the odometer"
            )));
        }
        Ok(())
    }

    /// First index `m` (1-based) with `x_m < a(m)`.
    fn carry(&self, x: &[u64]) -> Result<usize> {
        self.check(x)?;
        x.iter()
            .zip(&self.a)
            .position(|(d, a)| d < a)
            .map(|i| i + 1)
            .ok_or(Error::TruncationBoundary)
    }

    /// `h = 1` when `x_1 < a(1)`; `h = q(m−1)` when `m ≥ 2` is the first
    /// index with `x_m < a(m)`.
    pub fn h(&self, x: &[u64]) -> Result<BigInt> {
        let m = self.carry(x)?;
        Ok(if m == 1 {
            BigInt::one()
        } else {
            self.q[m - 1].clone()
        })
    }

    /// Add-with-carry.
    pub fn odometer(&self, x: &[u64]) -> Result<Vec<u64>> {
        let m = self.carry(x)?;
        let mut y = x.to_vec();
        for d in y.iter_mut().take(m - 1) {
            *d = 1;
        }
        y[m - 1] += 1;
        Ok(y)
    }

    pub fn step(&self, p: &SkyscraperPoint) -> Result<SkyscraperPoint> {
        let h = self.h(&p.base)?;
        if p.height.sign() == num_bigint::Sign::Minus || p.height >= h {
            return Err(Error::InvalidParameter("height outside the column".into()));
        }
        let next = &p.height + 1;
        if next < h {
            Ok(SkyscraperPoint {
                base: p.base.clone(),
                height: next,
            })
        } else {
            Ok(SkyscraperPoint {
                base: self.odometer(&p.base)?,
                height: BigInt::zero(),
            })
        }
    }

    pub fn bottom(&self) -> SkyscraperPoint {
        SkyscraperPoint {
            base: vec![1; self.depth()],
            height: BigInt::zero(),
        }
    }

    /// Iterates from the bottom until the truncation boundary; returns the
    /// number of points visited and `Σ_{x not all-maximal} h(x) + 1`.
    pub fn orbit_count(&self) -> Result<(u64, BigInt)> {
        let mut p = self.bottom();
        let mut visited = 1u64;
        loop {
            match self.step(&p) {
                Ok(next) => {
                    p = next;
                    visited += 1;
                }
                Err(Error::TruncationBoundary) => break,
                Err(e) => return Err(e),
            }
        }
        let mut expected = BigInt::one();
        let mut x = vec![1; self.depth()];
        loop {
            match self.h(&x) {
                Ok(h) => expected += h,
                Err(Error::TruncationBoundary) => break,
                Err(e) => return Err(e),
            }
            x = self.odometer(&x)?;
        }
        Ok((visited, expected))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::rat;

    fn linear(depth: u64) -> CFExpansion {
        let terms: Vec<u64> = (1..=depth).map(|n| n + 1).collect();
        CFExpansion::from_u64(&terms, Some("linear".parse().unwrap())).unwrap()
    }

    #[test]
    fn first_stages() {
        let cf = linear(8);
        let t1 = build_tower(&cf, 1).unwrap();
        assert_eq!(t1.height(), 2);
        assert_eq!(t1.level(0), (rat(0, 1), rat(1, 2)));
        assert_eq!(t1.level(1), (rat(1, 2), rat(1, 1)));
        assert_eq!(t1.map(&rat(1, 4)).unwrap(), rat(3, 4));
        assert!(matches!(t1.map(&rat(3, 4)), Err(Error::TopLevel(_))));
        assert!(matches!(
            t1.map(&rat(1, 1)),
            Err(Error::PointOutsideTower(_))
        ));
        let heights: Vec<usize> = (1..=6)
            .map(|n| build_tower(&cf, n).unwrap().height())
            .collect();
        assert_eq!(heights, vec![2, 6, 28, 150, 942, 6804]);
        assert!(build_tower(&cf, 0).is_err());
        assert!(build_tower(&cf, 9).is_err());
    }

    #[test]
    fn extents_telescope() {
        let cf = linear(8);
        for n in 1..=6 {
            let t = build_tower(&cf, n).unwrap();
            let prod: BigInt = (1..n).map(|i| cf.a(i).unwrap().clone()).product();
            let expected = Rational::new(cf.q(n as isize - 1).unwrap().clone(), prod);
            assert_eq!(t.extent(), &expected);
            assert!(t.is_measure_preserving());
        }
        let l = extent_limit(&cf).unwrap();
        assert!(l.lo() < l.hi());
        let bare = CFExpansion::from_u64(&[2, 3, 4], None).unwrap();
        assert!(extent_limit(&bare).is_err());
    }

    #[test]
    fn circle_distance_wraps() {
        let d = circle_distance(&Interval::point(rat(9, 10)));
        assert_eq!(d, Interval::point(rat(1, 10)));
        let d = circle_distance(&Interval::new(rat(2, 5), rat(3, 5)).unwrap());
        assert_eq!(d.hi(), &rat(1, 2));
        assert_eq!(d.lo(), &rat(2, 5));
    }

    #[test]
    fn comparison_excludes_top_level() {
        let cf = linear(8);
        let t = build_tower(&cf, 1).unwrap();
        let r = compare_with_rotation(&t, &cf, 10, &rat(1, 10)).unwrap();
        assert_eq!(r.counted, 5);
        assert_eq!(r.translations.len(), 1);
        assert_eq!(r.translations[0].shift, rat(1, 2));
    }

    #[test]
    fn skyscraper_heights_and_steps() {
        let cf = linear(6);
        let s = Skyscraper::new(&cf, 3).unwrap();
        assert_eq!(s.h(&[1, 1, 1]).unwrap(), BigInt::one());
        assert_eq!(s.h(&[2, 2, 4]).unwrap(), BigInt::from(2));
        assert_eq!(s.h(&[2, 3, 1]).unwrap(), BigInt::from(7));
        assert!(matches!(s.h(&[2, 3, 4]), Err(Error::TruncationBoundary)));
        let p = SkyscraperPoint {
            base: vec![1, 1, 1],
            height: BigInt::zero(),
        };
        assert_eq!(s.step(&p).unwrap().base, vec![2, 1, 1]);
        let p = SkyscraperPoint {
            base: vec![2, 3, 1],
            height: BigInt::from(3),
        };
        assert_eq!(s.step(&p).unwrap().height, BigInt::from(4));
        let (visited, expected) = s.orbit_count().unwrap();
        assert_eq!(BigInt::from(visited), expected);
    }

    #[test]
    fn sub_column_heights_match_h() {
        let cf = linear(7);
        let s = Skyscraper::new(&cf, 6).unwrap();
        for n in 1..6 {
            let next = build_tower(&cf, n + 1).unwrap();
            let sub = next.height() / cf.a(n + 1).unwrap().to_usize().unwrap();
            let mut word: Vec<u64> = (1..=6).map(|i| i as u64 + 1).collect();
            word[n] = 1;
            assert_eq!(s.h(&word).unwrap(), BigInt::from(sub));
        }
    }
}
