//! Field towers `GF(p^k)(t_1)...(t_r)` and their exact element arithmetic.
//!
//! Level 0 is the base finite field; level `i >= 1` adjoins the i-th symbol. An element
//! of level `i` is a reduced fraction of polynomials in that symbol whose coefficients
//! are elements of level `i - 1`. Laurent levels are represented by their dense
//! subfield of rational functions; the level kind only changes how square classes,
//! valuations and isotropy are decided.

use std::fmt;
use std::sync::Arc;

use super::finite::FiniteField;
use super::poly::{self, Field};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum LevelKind {
    /// Henselian level: `K((t))`, decided through valuation and residue data.
    LaurentSeries,
    /// Global level: `K(X)`, decided through its places.
    RationalFunction,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelDescriptor {
    pub symbol: String,
    pub kind: LevelKind,
}

impl LevelDescriptor {
    pub fn laurent(symbol: &str) -> Self {
        LevelDescriptor {
            symbol: symbol.to_string(),
            kind: LevelKind::LaurentSeries,
        }
    }

    pub fn rational(symbol: &str) -> Self {
        LevelDescriptor {
            symbol: symbol.to_string(),
            kind: LevelKind::RationalFunction,
        }
    }
}

/// Reserved name for the generator of a non-prime base field.
pub const GENERATOR_SYMBOL: &str = "g";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Scalar(u32),
    Ratio(Box<Ratio>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ratio {
    num: Vec<Element>,
    den: Vec<Element>,
}

impl Ratio {
    pub fn numerator(&self) -> &[Element] {
        &self.num
    }

    pub fn denominator(&self) -> &[Element] {
        &self.den
    }
}

impl Element {
    pub fn is_zero(&self) -> bool {
        match self {
            Element::Scalar(c) => *c == 0,
            Element::Ratio(r) => r.num.is_empty(),
        }
    }

    pub fn as_ratio(&self) -> Option<&Ratio> {
        match self {
            Element::Ratio(r) => Some(r),
            Element::Scalar(_) => None,
        }
    }

    pub fn as_scalar(&self) -> Option<u32> {
        match self {
            Element::Scalar(c) => Some(*c),
            Element::Ratio(_) => None,
        }
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct TowerInner {
    p: u32,
    k: u32,
    levels: Vec<LevelDescriptor>,
}

/// A computable field: a base finite field plus an ordered list of transcendental
/// levels, innermost first.
#[derive(Clone)]
pub struct FieldTower {
    inner: Arc<TowerInner>,
    base: Arc<FiniteField>,
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl Eq for FieldTower {}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldTower({self})")
    }
}

impl fmt::Display for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.base.order())?;
        for l in &self.inner.levels {
            match l.kind {
                LevelKind::LaurentSeries => write!(f, "(({}))", l.symbol)?,
                LevelKind::RationalFunction => write!(f, "({})", l.symbol)?,
            }
        }
        Ok(())
    }
}

fn valid_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FieldTower {
    pub fn new(p: u32, k: u32, levels: Vec<LevelDescriptor>) -> Result<Self> {
        let base = FiniteField::get(p, k)?;
        for (i, l) in levels.iter().enumerate() {
            if !valid_symbol(&l.symbol) {
                return Err(Error::InvalidSymbol(l.symbol.clone()));
            }
            if l.symbol == GENERATOR_SYMBOL {
                return Err(Error::InvalidSymbol(format!(
                    "`{GENERATOR_SYMBOL}` is reserved for the base field generator"
                )));
            }
            if levels[..i].iter().any(|m| m.symbol == l.symbol) {
                return Err(Error::InvalidSymbol(format!("duplicate symbol `{}`", l.symbol)));
            }
            if l.kind == LevelKind::RationalFunction && i + 1 != levels.len() {
                return Err(Error::InvalidField(
                    "a rational-function level must be the outermost level".into(),
                ));
            }
        }
        Ok(FieldTower {
            inner: Arc::new(TowerInner { p, k, levels }),
            base,
        })
    }

    /// `GF(q)` with no levels.
    pub fn finite(q: u64) -> Result<Self> {
        let (p, k) = super::finite::prime_power(q)
            .ok_or_else(|| Error::InvalidField(format!("{q} is not a prime power")))?;
        Self::new(p, k, Vec::new())
    }

    pub fn with_level(&self, level: LevelDescriptor) -> Result<Self> {
        let mut levels = self.inner.levels.clone();
        levels.push(level);
        Self::new(self.inner.p, self.inner.k, levels)
    }

    pub fn base(&self) -> &Arc<FiniteField> {
        &self.base
    }

    pub fn characteristic(&self) -> u32 {
        self.inner.p
    }

    pub fn base_order(&self) -> u32 {
        self.base.order()
    }

    pub fn levels(&self) -> &[LevelDescriptor] {
        &self.inner.levels
    }

    /// Number of transcendental levels.
    pub fn depth(&self) -> usize {
        self.inner.levels.len()
    }

    pub fn outermost(&self) -> Option<&LevelDescriptor> {
        self.inner.levels.last()
    }

    /// Number of Laurent levels.
    pub fn laurent_rank(&self) -> usize {
        self.inner
            .levels
            .iter()
            .filter(|l| l.kind == LevelKind::LaurentSeries)
            .count()
    }

    /// The tower made of the innermost `n` levels.
    pub fn truncate(&self, n: usize) -> FieldTower {
        FieldTower {
            inner: Arc::new(TowerInner {
                p: self.inner.p,
                k: self.inner.k,
                levels: self.inner.levels[..n].to_vec(),
            }),
            base: self.base.clone(),
        }
    }

    /// The residue tower of the outermost Laurent level.
    pub fn residue_tower(&self) -> Result<FieldTower> {
        match self.outermost() {
            Some(l) if l.kind == LevelKind::LaurentSeries => Ok(self.truncate(self.depth() - 1)),
            Some(l) => Err(Error::UnsupportedLevel(format!(
                "outermost level `{}` is not a Laurent level",
                l.symbol
            ))),
            None => Err(Error::UnsupportedLevel("finite field has no valuation".into())),
        }
    }

    /// Field operations on elements of level `depth`.
    pub fn at(&self, depth: usize) -> Level<'_> {
        assert!(depth <= self.depth());
        Level { tower: self, depth }
    }

    pub fn top(&self) -> Level<'_> {
        self.at(self.depth())
    }

    pub fn zero(&self) -> Element {
        self.top().zero()
    }

    pub fn one(&self) -> Element {
        self.top().one()
    }

    pub fn from_int(&self, n: i64) -> Element {
        self.top().from_int(n)
    }

    pub fn add(&self, a: &Element, b: &Element) -> Element {
        self.top().add(a, b)
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Element {
        self.top().sub(a, b)
    }

    pub fn neg(&self, a: &Element) -> Element {
        self.top().neg(a)
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        self.top().mul(a, b)
    }

    pub fn inv(&self, a: &Element) -> Result<Element> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.top().inv(a))
    }

    pub fn div(&self, a: &Element, b: &Element) -> Result<Element> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Element, e: i64) -> Result<Element> {
        self.top().pow(a, e)
    }

    pub fn product<'b>(&self, items: impl IntoIterator<Item = &'b Element>) -> Element {
        items
            .into_iter()
            .fold(self.one(), |acc, x| self.mul(&acc, x))
    }

    /// The level symbol `name` as an element of the full tower.
    pub fn symbol(&self, name: &str) -> Result<Element> {
        if name == GENERATOR_SYMBOL && self.base.degree() > 1 {
            return Ok(self.embed(&Element::Scalar(self.base.generator()), 0));
        }
        let idx = self
            .inner
            .levels
            .iter()
            .position(|l| l.symbol == name)
            .ok_or_else(|| Error::InvalidSymbol(format!("unknown symbol `{name}`")))?;
        Ok(self.embed(&self.variable_at(idx + 1), idx + 1))
    }

    /// The symbol of level `depth` as an element of that level.
    pub fn variable_at(&self, depth: usize) -> Element {
        let lv = self.at(depth - 1);
        Element::Ratio(Box::new(Ratio {
            num: vec![lv.zero(), lv.one()],
            den: vec![lv.one()],
        }))
    }

    /// Lifts an element of level `from` to the full tower as a constant.
    pub fn embed(&self, x: &Element, from: usize) -> Element {
        self.embed_to(x, from, self.depth())
    }

    pub fn embed_to(&self, x: &Element, from: usize, to: usize) -> Element {
        let mut e = x.clone();
        for d in from..to {
            let lv = self.at(d);
            e = Element::Ratio(Box::new(Ratio {
                num: poly::constant(&lv, e),
                den: vec![lv.one()],
            }));
        }
        e
    }

    /// If `x` (of level `depth >= 1`) is constant in that level's symbol, returns the
    /// constant as an element of level `depth - 1`.
    pub fn constant_part(&self, x: &Element, depth: usize) -> Option<Element> {
        let r = x.as_ratio()?;
        let lv = self.at(depth - 1);
        match (r.num.len(), r.den.len()) {
            (0, 1) => Some(lv.zero()),
            (1, 1) => Some(r.num[0].clone()),
            _ => None,
        }
    }

    /// Builds `num/den` at level `depth` from polynomials over level `depth - 1`.
    pub fn ratio(&self, depth: usize, num: Vec<Element>, den: Vec<Element>) -> Result<Element> {
        let lv = self.at(depth - 1);
        let mut num = num;
        let mut den = den;
        poly::trim(&lv, &mut num);
        poly::trim(&lv, &mut den);
        if den.is_empty() {
            return Err(Error::DivisionByZero);
        }
        Ok(normalize(&lv, num, den))
    }

    /// Polynomial with coefficients of level `depth - 1`, as an element of level `depth`.
    pub fn polynomial(&self, depth: usize, coeffs: Vec<Element>) -> Element {
        let lv = self.at(depth - 1);
        let mut num = coeffs;
        poly::trim(&lv, &mut num);
        Element::Ratio(Box::new(Ratio {
            num,
            den: vec![lv.one()],
        }))
    }

    pub fn display(&self, x: &Element) -> String {
        self.display_at(x, self.depth())
    }

    pub fn display_at(&self, x: &Element, depth: usize) -> String {
        if depth == 0 {
            let c = x.as_scalar().expect("scalar at level 0");
            return self.display_scalar(c);
        }
        let r = x.as_ratio().expect("ratio above level 0");
        let sym = &self.inner.levels[depth - 1].symbol;
        let num = self.display_poly(&r.num, depth - 1, sym);
        if r.den.len() == 1 {
            num
        } else {
            let den = self.display_poly(&r.den, depth - 1, sym);
            format!("({num})/({den})")
        }
    }

    fn display_scalar(&self, c: u32) -> String {
        if self.base.degree() == 1 {
            return c.to_string();
        }
        let digits = self.base.coefficients(c);
        let terms: Vec<String> = digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(i, &d)| match (i, d) {
                (0, d) => d.to_string(),
                (1, 1) => GENERATOR_SYMBOL.to_string(),
                (1, d) => format!("{d}*{GENERATOR_SYMBOL}"),
                (i, 1) => format!("{GENERATOR_SYMBOL}^{i}"),
                (i, d) => format!("{d}*{GENERATOR_SYMBOL}^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }

    fn display_poly(&self, coeffs: &[Element], depth: usize, sym: &str) -> String {
        let lv = self.at(depth);
        let mut terms = Vec::new();
        for (i, c) in coeffs.iter().enumerate() {
            if lv.is_zero(c) {
                continue;
            }
            let power = match i {
                0 => String::new(),
                1 => sym.to_string(),
                _ => format!("{sym}^{i}"),
            };
            let cs = self.display_at(c, depth);
            let atomic = !cs.contains(['+', '/', '*']);
            let term = if i == 0 {
                cs
            } else if *c == lv.one() {
                power
            } else if atomic {
                format!("{cs}*{power}")
            } else {
                format!("({cs})*{power}")
            };
            terms.push(term);
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}

/// Reduces `num/den` to lowest terms with a monic denominator.
fn normalize(lv: &Level<'_>, num: Vec<Element>, den: Vec<Element>) -> Element {
    if num.is_empty() {
        return Element::Ratio(Box::new(Ratio {
            num,
            den: vec![lv.one()],
        }));
    }
    let (num, den) = if den.len() == 1 {
        (num, den)
    } else {
        let g = poly::gcd(lv, &num, &den);
        if g.len() > 1 {
            (poly::div_exact(lv, &num, &g), poly::div_exact(lv, &den, &g))
        } else {
            (num, den)
        }
    };
    let lc = poly::lead(lv, &den);
    if lc == lv.one() {
        Element::Ratio(Box::new(Ratio { num, den }))
    } else {
        let inv = lv.inv(&lc);
        Element::Ratio(Box::new(Ratio {
            num: poly::scale(lv, &num, &inv),
            den: poly::scale(lv, &den, &inv),
        }))
    }
}

/// Field operations at one level of a tower.
#[derive(Clone, Copy)]
pub struct Level<'a> {
    tower: &'a FieldTower,
    depth: usize,
}

impl<'a> Level<'a> {
    pub fn tower(&self) -> &'a FieldTower {
        self.tower
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn below(&self) -> Level<'a> {
        Level {
            tower: self.tower,
            depth: self.depth - 1,
        }
    }

    pub fn pow(&self, a: &Element, e: i64) -> Result<Element> {
        let base = if e < 0 {
            if a.is_zero() {
                return Err(Error::DivisionByZero);
            }
            self.inv(a)
        } else {
            a.clone()
        };
        let mut e = e.unsigned_abs();
        let mut acc = self.one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        Ok(acc)
    }

    pub fn div(&self, a: &Element, b: &Element) -> Result<Element> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.mul(a, &self.inv(b)))
    }
}

impl Field for Level<'_> {
    type E = Element;

    fn zero(&self) -> Element {
        if self.depth == 0 {
            Element::Scalar(0)
        } else {
            let lv = self.below();
            Element::Ratio(Box::new(Ratio {
                num: Vec::new(),
                den: vec![lv.one()],
            }))
        }
    }

    fn one(&self) -> Element {
        if self.depth == 0 {
            Element::Scalar(1)
        } else {
            let lv = self.below();
            Element::Ratio(Box::new(Ratio {
                num: vec![lv.one()],
                den: vec![lv.one()],
            }))
        }
    }

    fn is_zero(&self, a: &Element) -> bool {
        a.is_zero()
    }

    fn from_int(&self, n: i64) -> Element {
        if self.depth == 0 {
            Element::Scalar(self.tower.base.from_int(n))
        } else {
            let lv = self.below();
            Element::Ratio(Box::new(Ratio {
                num: poly::constant(&lv, lv.from_int(n)),
                den: vec![lv.one()],
            }))
        }
    }

    fn add(&self, a: &Element, b: &Element) -> Element {
        match (a, b) {
            (Element::Scalar(x), Element::Scalar(y)) => Element::Scalar(self.tower.base.add(*x, *y)),
            (Element::Ratio(x), Element::Ratio(y)) => {
                let lv = self.below();
                if x.num.is_empty() {
                    return b.clone();
                }
                if y.num.is_empty() {
                    return a.clone();
                }
                if x.den == y.den {
                    let num = poly::add(&lv, &x.num, &y.num);
                    return normalize(&lv, num, x.den.clone());
                }
                let num = poly::add(
                    &lv,
                    &poly::mul(&lv, &x.num, &y.den),
                    &poly::mul(&lv, &y.num, &x.den),
                );
                let den = poly::mul(&lv, &x.den, &y.den);
                normalize(&lv, num, den)
            }
            _ => panic!("mixed-level element arithmetic"),
        }
    }

    fn neg(&self, a: &Element) -> Element {
        match a {
            Element::Scalar(x) => Element::Scalar(self.tower.base.neg(*x)),
            Element::Ratio(x) => {
                let lv = self.below();
                Element::Ratio(Box::new(Ratio {
                    num: poly::neg(&lv, &x.num),
                    den: x.den.clone(),
                }))
            }
        }
    }

    fn mul(&self, a: &Element, b: &Element) -> Element {
        match (a, b) {
            (Element::Scalar(x), Element::Scalar(y)) => Element::Scalar(self.tower.base.mul(*x, *y)),
            (Element::Ratio(x), Element::Ratio(y)) => {
                let lv = self.below();
                if x.num.is_empty() || y.num.is_empty() {
                    return self.zero();
                }
                if x.den.len() == 1 && y.den.len() == 1 {
                    return Element::Ratio(Box::new(Ratio {
                        num: poly::mul(&lv, &x.num, &y.num),
                        den: vec![lv.one()],
                    }));
                }
                // cross-cancel before multiplying
                let g1 = poly::gcd(&lv, &x.num, &y.den);
                let g2 = poly::gcd(&lv, &y.num, &x.den);
                let xn = poly::div_exact(&lv, &x.num, &g1);
                let yd = poly::div_exact(&lv, &y.den, &g1);
                let yn = poly::div_exact(&lv, &y.num, &g2);
                let xd = poly::div_exact(&lv, &x.den, &g2);
                let num = poly::mul(&lv, &xn, &yn);
                let den = poly::mul(&lv, &xd, &yd);
                let lc = poly::lead(&lv, &den);
                if lc == lv.one() {
                    Element::Ratio(Box::new(Ratio { num, den }))
                } else {
                    let inv = lv.inv(&lc);
                    Element::Ratio(Box::new(Ratio {
                        num: poly::scale(&lv, &num, &inv),
                        den: poly::scale(&lv, &den, &inv),
                    }))
                }
            }
            _ => panic!("mixed-level element arithmetic"),
        }
    }

    fn inv(&self, a: &Element) -> Element {
        match a {
            Element::Scalar(x) => Element::Scalar(self.tower.base.inv(*x).expect("inverse of zero")),
            Element::Ratio(x) => {
                assert!(!x.num.is_empty(), "inverse of zero");
                let lv = self.below();
                let lc = poly::lead(&lv, &x.num);
                let inv = lv.inv(&lc);
                Element::Ratio(Box::new(Ratio {
                    num: poly::scale(&lv, &x.den, &inv),
                    den: poly::scale(&lv, &x.num, &inv),
                }))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf7_product() {
        let k = FieldTower::finite(7).unwrap();
        assert_eq!(k.mul(&k.from_int(3), &k.from_int(5)), k.one());
    }

    #[test]
    fn rational_sum_reduces() {
        let k = FieldTower::new(3, 1, vec![LevelDescriptor::rational("X")]).unwrap();
        let x = k.symbol("X").unwrap();
        let one = k.one();
        let a = k.div(&k.add(&x, &one), &x).unwrap();
        let b = k.div(&k.sub(&x, &one), &x).unwrap();
        assert_eq!(k.add(&a, &b), k.from_int(2));
    }

    #[test]
    fn laurent_inverse_pair() {
        let k = FieldTower::new(5, 1, vec![LevelDescriptor::laurent("t")]).unwrap();
        let t = k.symbol("t").unwrap();
        let u = k.sub(&k.one(), &t);
        let inv = k.div(&k.one(), &u).unwrap();
        assert_eq!(k.mul(&inv, &u), k.one());
    }

    #[test]
    fn nested_levels_and_display() {
        let k = FieldTower::new(
            3,
            1,
            vec![LevelDescriptor::laurent("t"), LevelDescriptor::laurent("u")],
        )
        .unwrap();
        let t = k.symbol("t").unwrap();
        let u = k.symbol("u").unwrap();
        let x = k.div(&k.add(&u, &t), &k.sub(&u, &k.one())).unwrap();
        let back = k.mul(&x, &k.sub(&u, &k.one()));
        assert_eq!(back, k.add(&u, &t));
        assert_eq!(k.display(&k.add(&u, &t)), "t+u");
    }

    #[test]
    fn rejects_bad_towers() {
        assert!(FieldTower::new(
            3,
            1,
            vec![LevelDescriptor::rational("X"), LevelDescriptor::laurent("t")]
        )
        .is_err());
        assert!(FieldTower::new(
            3,
            1,
            vec![LevelDescriptor::laurent("t"), LevelDescriptor::laurent("t")]
        )
        .is_err());
        assert!(FieldTower::new(2, 1, vec![]).is_err());
        assert!(FieldTower::new(3, 1, vec![LevelDescriptor::laurent("g")]).is_err());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let k = FieldTower::finite(5).unwrap();
        assert_eq!(k.div(&k.one(), &k.zero()), Err(Error::DivisionByZero));
    }
}
