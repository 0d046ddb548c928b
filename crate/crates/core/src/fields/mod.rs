//! Exact arithmetic, square classes, valuations and residues for field towers.

pub mod factor;
pub mod finite;
pub mod poly;
pub mod tower;

use std::ops::Add;

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
pub use finite::FiniteField;
use poly::Field;
pub use tower::{Element, FieldTower, Level, LevelDescriptor, LevelKind, Ratio};

/// Value of the composed valuation over the Laurent levels, outermost level first.
/// Ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ValueVector(pub Vec<i64>);

impl ValueVector {
    pub fn zero(rank: usize) -> Self {
        ValueVector(vec![0; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Class in `vK / 2vK`, one bit per component.
    pub fn parity(&self) -> Vec<bool> {
        self.0.iter().map(|x| x.rem_euclid(2) == 1).collect()
    }

    pub fn is_even(&self) -> bool {
        self.0.iter().all(|x| x % 2 == 0)
    }
}

impl Add for &ValueVector {
    type Output = ValueVector;
    fn add(self, rhs: &ValueVector) -> ValueVector {
        assert_eq!(self.rank(), rhs.rank());
        ValueVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// t-adic order of `a` at level `depth` (`a` nonzero).
pub(crate) fn order_at(k: &FieldTower, depth: usize, a: &Element) -> i64 {
    let lv = k.at(depth - 1);
    let r = a.as_ratio().expect("ratio above level 0");
    let on = poly::order_at_zero(&lv, r.numerator()).expect("nonzero") as i64;
    let od = poly::order_at_zero(&lv, r.denominator()).expect("nonzero") as i64;
    on - od
}

/// Residue of `a * t^(-ord(a))` at level `depth`, an element of level `depth - 1`.
pub(crate) fn unit_residue_at(k: &FieldTower, depth: usize, a: &Element) -> Element {
    let lv = k.at(depth - 1);
    let r = a.as_ratio().expect("ratio above level 0");
    let n = &r.numerator()[poly::order_at_zero(&lv, r.numerator()).unwrap()];
    let d = &r.denominator()[poly::order_at_zero(&lv, r.denominator()).unwrap()];
    lv.mul(n, &lv.inv(d))
}

/// Composed valuation over the outermost `rank` levels of `k` (all Laurent) together
/// with the iterated residue of the unit part, an element of level `depth - rank`.
pub(crate) fn leading_data(
    k: &FieldTower,
    a: &Element,
    rank: usize,
) -> Result<(ValueVector, Element)> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let mut x = a.clone();
    let mut v = Vec::with_capacity(rank);
    for depth in ((k.depth() + 1 - rank)..=k.depth()).rev() {
        let level = &k.levels()[depth - 1];
        if level.kind != LevelKind::LaurentSeries {
            return Err(Error::UnsupportedLevel(format!(
                "level `{}` is not a Laurent level",
                level.symbol
            )));
        }
        v.push(order_at(k, depth, &x));
        x = unit_residue_at(k, depth, &x);
    }
    Ok((ValueVector(v), x))
}

/// The composed valuation of `a` over every Laurent level of `k`, outermost first.
///
/// A rational-function outermost level is skipped only when `a` does not involve its
/// variable; valuations at places live in [`crate::localglobal`].
pub fn valuation(k: &FieldTower, a: &Element) -> Result<ValueVector> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let (k, a) = strip_rational_level(k, a)?;
    if k.laurent_rank() == 0 {
        return Err(Error::UnsupportedLevel("tower has no Laurent level".into()));
    }
    Ok(leading_data(&k, &a, k.depth())?.0)
}

fn strip_rational_level(k: &FieldTower, a: &Element) -> Result<(FieldTower, Element)> {
    match k.outermost() {
        Some(l) if l.kind == LevelKind::RationalFunction => {
            let c = k.constant_part(a, k.depth()).ok_or_else(|| {
                Error::UnsupportedLevel(format!(
                    "element involves the global variable `{}`",
                    l.symbol
                ))
            })?;
            Ok((k.truncate(k.depth() - 1), c))
        }
        _ => Ok((k.clone(), a.clone())),
    }
}

/// Image of a unit (or zero) in the residue tower of the outermost Laurent level.
pub fn residue(k: &FieldTower, a: &Element) -> Result<Element> {
    let res = k.residue_tower()?;
    if a.is_zero() {
        return Ok(res.zero());
    }
    let d = k.depth();
    let v = order_at(k, d, a);
    if v != 0 {
        return Err(Error::NotIntegralUnit(vec![v]));
    }
    Ok(unit_residue_at(k, d, a))
}

/// `prod t_i^(e_i)` over the outermost `exps.len()` levels, `exps` outermost first.
pub fn monomial(k: &FieldTower, exps: &[i64]) -> Element {
    let n = k.depth();
    let mut acc = k.one();
    for (i, &e) in exps.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let depth = n - i;
        let t = k.embed(&k.variable_at(depth), depth);
        acc = k.mul(&acc, &k.pow(&t, e).expect("symbol is nonzero"));
    }
    acc
}

/// Whether `a` is a square in the field described by `k`.
pub fn is_square(k: &FieldTower, a: &Element) -> Result<bool> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    Ok(is_square_at(k, k.depth(), a))
}

pub(crate) fn is_square_at(k: &FieldTower, depth: usize, a: &Element) -> bool {
    if depth == 0 {
        return k.base().is_square(a.as_scalar().unwrap());
    }
    match k.levels()[depth - 1].kind {
        LevelKind::LaurentSeries => {
            order_at(k, depth, a) % 2 == 0 && is_square_at(k, depth - 1, &unit_residue_at(k, depth, a))
        }
        LevelKind::RationalFunction => {
            let r = a.as_ratio().unwrap();
            if depth == 1 {
                let f = k.base();
                let to_u32 = |p: &[Element]| -> Vec<u32> {
                    p.iter().map(|c| c.as_scalar().unwrap()).collect()
                };
                let num = to_u32(r.numerator());
                let den = to_u32(r.denominator());
                if !f.is_square(*num.last().unwrap()) {
                    return false;
                }
                let prod = poly::make_monic(&**f, &poly::mul(&**f, &num, &den));
                factor::squarefree_decomposition(f, &prod)
                    .iter()
                    .all(|(_, m)| m % 2 == 0)
            } else {
                // a monic square root has its coefficients in the coefficient field, so
                // only the leading coefficient needs the henselian test
                let lv = k.at(depth - 1);
                let lc = poly::lead(&lv, r.numerator());
                is_square_at(k, depth - 1, &lc)
                    && poly::monic_sqrt(&lv, &poly::make_monic(&lv, r.numerator())).is_some()
                    && poly::monic_sqrt(&lv, r.denominator()).is_some()
            }
        }
    }
}

/// A square root inside the represented field (finite field or field of rational
/// functions), if one exists there. For Laurent levels this is stricter than
/// [`is_square`], which uses henselian semantics.
pub fn exact_sqrt(k: &FieldTower, a: &Element) -> Option<Element> {
    exact_sqrt_at(k, k.depth(), a)
}

pub(crate) fn exact_sqrt_at(k: &FieldTower, depth: usize, a: &Element) -> Option<Element> {
    if depth == 0 {
        return k.base().sqrt(a.as_scalar().unwrap()).map(Element::Scalar);
    }
    if a.is_zero() {
        return Some(a.clone());
    }
    let lv = k.at(depth - 1);
    let r = a.as_ratio().unwrap();
    let lc = poly::lead(&lv, r.numerator());
    let s = exact_sqrt_at(k, depth - 1, &lc)?;
    let g = poly::monic_sqrt(&lv, &poly::make_monic(&lv, r.numerator()))?;
    let h = poly::monic_sqrt(&lv, r.denominator())?;
    k.ratio(depth, poly::scale(&lv, &g, &s), h).ok()
}

/// Bounds for [`sample`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleBudget {
    /// Laurent valuations are drawn from `[-valuation, valuation]`.
    pub valuation: i64,
    /// Maximal degree of the polynomials making up unit parts and rational functions.
    pub degree: usize,
    /// Whether rational-function samples may carry denominators.
    pub denominators: bool,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget {
            valuation: 2,
            degree: 2,
            denominators: true,
        }
    }
}

/// Deterministic pseudorandom nonzero element.
pub fn sample(k: &FieldTower, budget: &SampleBudget, seed: u64) -> Element {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(k, budget, &mut rng)
}

pub fn sample_with(k: &FieldTower, budget: &SampleBudget, rng: &mut ChaCha8Rng) -> Element {
    sample_at(k, k.depth(), budget, rng)
}

fn sample_any(k: &FieldTower, depth: usize, budget: &SampleBudget, rng: &mut ChaCha8Rng) -> Element {
    if rng.random_range(0..3) == 0 {
        k.at(depth).zero()
    } else {
        sample_at(k, depth, budget, rng)
    }
}

fn sample_poly(
    k: &FieldTower,
    depth: usize,
    deg: usize,
    budget: &SampleBudget,
    rng: &mut ChaCha8Rng,
) -> Vec<Element> {
    let inner = SampleBudget {
        degree: budget.degree.min(1),
        valuation: budget.valuation.min(1),
        ..*budget
    };
    (0..=deg).map(|_| sample_any(k, depth, &inner, rng)).collect()
}

fn sample_at(k: &FieldTower, depth: usize, budget: &SampleBudget, rng: &mut ChaCha8Rng) -> Element {
    if depth == 0 {
        let q = k.base_order();
        return Element::Scalar(rng.random_range(1..q));
    }
    let lv = k.at(depth - 1);
    match k.levels()[depth - 1].kind {
        LevelKind::LaurentSeries => {
            let e = rng.random_range(-budget.valuation..=budget.valuation);
            let c = sample_at(k, depth - 1, budget, rng);
            let mut num = vec![c];
            let mut den = vec![lv.one()];
            if budget.degree > 0 {
                let d1 = rng.random_range(0..=budget.degree);
                num.extend(sample_poly(k, depth - 1, d1.saturating_sub(1), budget, rng).into_iter().take(d1));
                if budget.denominators {
                    let d2 = rng.random_range(0..=budget.degree);
                    den.extend(sample_poly(k, depth - 1, d2.saturating_sub(1), budget, rng).into_iter().take(d2));
                }
            }
            let unit = k.ratio(depth, num, den).expect("unit denominator is nonzero");
            let t = k.variable_at(depth);
            let lvl = k.at(depth);
            lvl.mul(&unit, &lvl.pow(&t, e).unwrap())
        }
        LevelKind::RationalFunction => loop {
            let d1 = rng.random_range(0..=budget.degree);
            let num = sample_poly(k, depth - 1, d1, budget, rng);
            let den = if budget.denominators {
                let d2 = rng.random_range(0..=budget.degree);
                let mut den = sample_poly(k, depth - 1, d2, budget, rng);
                poly::trim(&lv, &mut den);
                if den.is_empty() {
                    vec![lv.one()]
                } else {
                    den
                }
            } else {
                vec![lv.one()]
            };
            let x = k.ratio(depth, num, den).unwrap();
            if !x.is_zero() {
                break x;
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laurent(q: u64, syms: &[&str]) -> FieldTower {
        let mut k = FieldTower::finite(q).unwrap();
        for s in syms {
            k = k.with_level(LevelDescriptor::laurent(s)).unwrap();
        }
        k
    }

    #[test]
    fn valuation_examples() {
        let k = laurent(3, &["t"]);
        let t = k.symbol("t").unwrap();
        let a = k.mul(&k.mul(&t, &t), &k.add(&k.one(), &t));
        assert_eq!(valuation(&k, &a).unwrap(), ValueVector(vec![2]));

        let k2 = laurent(3, &["t", "u"]);
        let t = k2.symbol("t").unwrap();
        let u = k2.symbol("u").unwrap();
        let a = k2.div(&u, &t).unwrap();
        assert_eq!(valuation(&k2, &a).unwrap(), ValueVector(vec![1, -1]));

        let k5 = laurent(5, &["t"]);
        let t = k5.symbol("t").unwrap();
        let num = k5.add(&t, &k5.mul(&t, &t));
        let a = k5.div(&num, &k5.add(&k5.one(), &t)).unwrap();
        assert_eq!(valuation(&k5, &a).unwrap(), ValueVector(vec![1]));
        assert_eq!(valuation(&k5, &k5.zero()), Err(Error::ZeroArgument));
    }

    #[test]
    fn residue_examples() {
        let k = laurent(3, &["t"]);
        let t = k.symbol("t").unwrap();
        let a = k.div(&k.add(&k.one(), &t), &k.sub(&k.one(), &t)).unwrap();
        assert_eq!(residue(&k, &a).unwrap(), Element::Scalar(1));
        assert!(matches!(residue(&k, &t), Err(Error::NotIntegralUnit(_))));

        let k5 = laurent(5, &["t"]);
        let t = k5.symbol("t").unwrap();
        let a = k5.add(&k5.from_int(2), &k5.mul(&k5.from_int(3), &t));
        assert_eq!(residue(&k5, &a).unwrap(), Element::Scalar(2));

        let k2 = laurent(3, &["t", "u"]);
        let t = k2.symbol("t").unwrap();
        let u = k2.symbol("u").unwrap();
        let a = k2.add(&k2.add(&k2.from_int(2), &u), &t);
        let res = k2.residue_tower().unwrap();
        let expect = res.add(&res.from_int(2), &res.symbol("t").unwrap());
        assert_eq!(residue(&k2, &a).unwrap(), expect);
    }

    #[test]
    fn square_examples() {
        let k7 = FieldTower::finite(7).unwrap();
        assert!(is_square(&k7, &k7.from_int(2)).unwrap());
        let k = laurent(3, &["t"]);
        assert!(!is_square(&k, &k.symbol("t").unwrap()).unwrap());
        let kx = FieldTower::finite(3)
            .unwrap()
            .with_level(LevelDescriptor::rational("X"))
            .unwrap();
        let x = kx.symbol("X").unwrap();
        let f = kx.add(&kx.add(&kx.mul(&x, &x), &kx.mul(&kx.from_int(2), &x)), &kx.one());
        assert!(is_square(&kx, &f).unwrap());
        assert!(!is_square(&kx, &x).unwrap());
        let k5 = laurent(5, &["t"]);
        let a = k5.add(&k5.from_int(4), &k5.symbol("t").unwrap());
        assert!(is_square(&k5, &a).unwrap());
        assert!(exact_sqrt(&k5, &a).is_none());
    }

    #[test]
    fn semi_global_squares() {
        let k = laurent(5, &["t"]).with_level(LevelDescriptor::rational("X")).unwrap();
        let x = k.symbol("X").unwrap();
        let t = k.symbol("t").unwrap();
        let a = k.add(&x, &t);
        let sq = k.mul(&a, &a);
        assert!(is_square(&k, &sq).unwrap());
        assert!(!is_square(&k, &a).unwrap());
        // 1+t is a square in GF(5)((t)) though not in GF(5)(t)
        let b = k.mul(&sq, &k.add(&k.one(), &t));
        assert!(is_square(&k, &b).unwrap());
        assert!(exact_sqrt(&k, &b).is_none());
        assert!(!is_square(&k, &k.mul(&sq, &t)).unwrap());
    }

    #[test]
    fn sample_is_reproducible_and_nonzero() {
        let k = laurent(3, &["t"]);
        let b = SampleBudget::default();
        for seed in 0..50 {
            let a = sample(&k, &b, seed);
            assert!(!a.is_zero());
            assert_eq!(a, sample(&k, &b, seed));
            let v = valuation(&k, &a).unwrap().0[0];
            assert!((-2..=2).contains(&v));
        }
        let f3 = FieldTower::finite(3).unwrap();
        for seed in 0..20 {
            assert!(matches!(sample(&f3, &b, seed), Element::Scalar(1 | 2)));
        }
    }

    #[test]
    fn sample_reaches_every_square_class() {
        let k = laurent(3, &["t"]);
        let b = SampleBudget::default();
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..200 {
            let a = sample(&k, &b, seed);
            let (v, r) = leading_data(&k, &a, 1).unwrap();
            seen.insert((v.parity()[0], r));
        }
        assert_eq!(seen.len(), 4);
    }
}
