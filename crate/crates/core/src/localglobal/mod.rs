//! Places of `GF(q)(X)`, completions, local-global isotropy and the tame Hilbert symbol.

mod conic;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::finite::FiniteField;
use crate::fields::{self, factor, poly, Element, FieldTower, LevelKind};
use crate::qforms::{QuadraticForm, WittOptions};
use crate::valuation::ValuationCtx;

use conic::{is_square_mod, squarefree_split, P};

/// A place of `GF(q)(X)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    /// A monic irreducible polynomial, constant term first.
    Finite(Vec<u32>),
    Infinity,
}

impl Place {
    pub fn degree(&self) -> usize {
        match self {
            Place::Finite(p) => p.len() - 1,
            Place::Infinity => 1,
        }
    }

    /// Valuation and unit residue (a polynomial reduced modulo the place, or a constant
    /// at infinity) of `num/den`.
    fn local_data(&self, f: &FiniteField, num: &[u32], den: &[u32]) -> (i64, P) {
        match self {
            Place::Infinity => {
                let v = den.len() as i64 - num.len() as i64;
                let c = f.mul(poly::lead(f, num), f.inv(poly::lead(f, den)).unwrap());
                (v, vec![c])
            }
            Place::Finite(m) => {
                let (vn, un) = strip(f, num, m);
                let (vd, ud) = strip(f, den, m);
                let ud = poly::rem(f, &ud, m);
                let u = poly::rem(f, &poly::mul(f, &poly::rem(f, &un, m), &inv_mod(f, &ud, m)), m);
                (vn - vd, u)
            }
        }
    }

    fn display_with(&self, symbol: &str, f: &FiniteField) -> String {
        match self {
            Place::Infinity => "Infinity".into(),
            Place::Finite(m) => display_poly(f, m, symbol),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(fm, "Infinity"),
            Place::Finite(m) => write!(fm, "{m:?}"),
        }
    }
}

fn display_poly(f: &FiniteField, m: &[u32], symbol: &str) -> String {
    let g = if f.degree() > 1 { "g" } else { "" };
    let coeff = |c: u32| -> String {
        if f.degree() == 1 {
            return c.to_string();
        }
        let terms: Vec<String> = f
            .coefficients(c)
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(i, &d)| match i {
                0 => d.to_string(),
                1 if d == 1 => g.to_string(),
                1 => format!("{d}*{g}"),
                _ if d == 1 => format!("{g}^{i}"),
                _ => format!("{d}*{g}^{i}"),
            })
            .collect();
        if terms.len() > 1 {
            format!("({})", terms.join("+"))
        } else {
            terms.join("")
        }
    };
    let mut out = Vec::new();
    for (i, &c) in m.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let x = match i {
            0 => String::new(),
            1 => symbol.to_string(),
            _ => format!("{symbol}^{i}"),
        };
        out.push(match (i, c) {
            (0, _) => coeff(c),
            (_, 1) => x,
            _ => format!("{}*{x}", coeff(c)),
        });
    }
    out.join(" + ")
}

/// Multiplicity of `m` in `a` and the cofactor.
fn strip(f: &FiniteField, a: &[u32], m: &[u32]) -> (i64, P) {
    let mut a = a.to_vec();
    let mut v = 0;
    loop {
        let (qt, r) = poly::divrem(f, &a, m);
        if !r.is_empty() {
            return (v, a);
        }
        a = qt;
        v += 1;
    }
}

fn inv_mod(f: &FiniteField, a: &[u32], m: &[u32]) -> P {
    let (mut r0, mut r1) = (m.to_vec(), poly::rem(f, a, m));
    let (mut s0, mut s1): (P, P) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (qt, r) = poly::divrem(f, &r0, &r1);
        let s = poly::sub(f, &s0, &poly::mul(f, &qt, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    let c = f.inv(r0[0]).expect("unit modulo the place");
    poly::rem(f, &poly::scale(f, &s0, &c), m)
}

fn check_global(k: &FieldTower) -> Result<()> {
    match k.levels() {
        [l] if l.kind == LevelKind::RationalFunction => Ok(()),
        _ => Err(Error::UnsupportedTower(format!("{k} is not of the form GF(q)(X)"))),
    }
}

/// Numerator and denominator of an element of `GF(q)(X)`.
pub(crate) fn to_polys(a: &Element) -> (P, P) {
    match a {
        Element::Scalar(c) => (if *c == 0 { vec![] } else { vec![*c] }, vec![1]),
        Element::Ratio(r) => (
            r.numerator().iter().map(|c| c.as_scalar().unwrap()).collect(),
            r.denominator().iter().map(|c| c.as_scalar().unwrap()).collect(),
        ),
    }
}

pub(crate) fn from_poly(k: &FieldTower, p: &[u32]) -> Element {
    k.polynomial(1, p.iter().map(|&c| Element::Scalar(c)).collect())
}

/// Canonical representative of the square class of `a` in `GF(q)(X)`: a squarefree
/// monic polynomial times `1` or the least nonsquare.
pub fn square_class_rep(k: &FieldTower, a: &Element) -> Element {
    let f = k.base();
    let (n, d) = to_polys(a);
    let c = f.mul(poly::lead(&**f, &n), f.inv(poly::lead(&**f, &d)).unwrap());
    let prod = poly::mul(&**f, &poly::make_monic(&**f, &n), &poly::make_monic(&**f, &d));
    let (core, _) = squarefree_split(f, &prod);
    let c = if f.is_square(c) { 1 } else { f.nonsquare() };
    from_poly(k, &poly::scale(&**f, &core, &c))
}

/// Every place where some diagonal entry is not a unit, followed by infinity.
pub fn places_of_interest(q: &QuadraticForm) -> Result<Vec<Place>> {
    let k = q.tower();
    check_global(k)?;
    let f = k.base();
    let mut ps: Vec<P> = Vec::new();
    for a in q.diag() {
        let (n, d) = to_polys(a);
        for p in [n, d] {
            for (g, _) in factor::factor(f, &poly::make_monic(&**f, &p)) {
                if !ps.contains(&g) {
                    ps.push(g);
                }
            }
        }
    }
    ps.sort_by(|a, b| factor::compare_polys(a, b));
    let mut places: Vec<Place> = ps.into_iter().map(Place::Finite).collect();
    places.push(Place::Infinity);
    Ok(places)
}

/// A diagonal entry in a completion: `residue * pi^valuation` with `residue` a unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalEntry {
    pub valuation: i64,
    /// Residue as a polynomial reduced modulo the place.
    pub residue: Vec<u32>,
    /// Image of the residue in `residue_field`, when that field was built.
    pub residue_image: Option<u32>,
}

/// A form over `GF(q)(X)` seen in the completion at a place.
#[derive(Clone, Debug)]
pub struct Completion {
    pub place: Place,
    /// `GF(q^deg)`; absent when its order exceeds the supported table size.
    pub residue_field: Option<FieldTower>,
    pub entries: Vec<LocalEntry>,
    base: Arc<FiniteField>,
}

impl Completion {
    /// Whether the residue of entry `i` is a square in the residue field.
    pub fn residue_is_square(&self, i: usize) -> bool {
        residue_square(&self.base, &self.place, &self.entries[i].residue)
    }

    /// Springer parts `(class, residues)` for the even and odd valuations.
    pub fn parts(&self) -> [Vec<&LocalEntry>; 2] {
        let mut parts = [Vec::new(), Vec::new()];
        for e in &self.entries {
            parts[e.valuation.rem_euclid(2) as usize].push(e);
        }
        parts
    }

    pub fn is_isotropic(&self) -> bool {
        self.parts().iter().any(|part| part_isotropic(&self.base, &self.place, part))
    }

    /// Witt index over the completion: the sum of the indices of the two residue parts.
    pub fn witt_index(&self) -> usize {
        let minus_one_square = self.base.order() % 4 == 1 || self.place.degree() % 2 == 0;
        self.parts()
            .iter()
            .map(|part| {
                let n = part.len();
                if n % 2 == 1 {
                    return n / 2;
                }
                let nonsquares = part
                    .iter()
                    .filter(|e| !residue_square(&self.base, &self.place, &e.residue))
                    .count();
                let sign_square = minus_one_square || (n / 2) % 2 == 0;
                if (nonsquares % 2 == 0) == sign_square {
                    n / 2
                } else {
                    n / 2 - 1
                }
            })
            .sum()
    }
}

fn residue_square(f: &FiniteField, place: &Place, u: &[u32]) -> bool {
    match place {
        Place::Infinity => f.is_square(u[0]),
        Place::Finite(m) => is_square_mod(f, u, m),
    }
}

fn part_isotropic(f: &FiniteField, place: &Place, part: &[&LocalEntry]) -> bool {
    match part.len() {
        0 | 1 => false,
        2 => {
            let prod = match place {
                Place::Infinity => vec![f.neg(f.mul(part[0].residue[0], part[1].residue[0]))],
                Place::Finite(m) => poly::rem(
                    f,
                    &poly::neg(f, &poly::mul(f, &part[0].residue, &part[1].residue)),
                    m,
                ),
            };
            residue_square(f, place, &prod)
        }
        _ => true,
    }
}

/// Embedding of `GF(q)[X]/(m)` into the interned field `GF(q^deg m)`.
struct ResidueEmbedding {
    big: Arc<FiniteField>,
    beta: u32,
    alpha: u32,
}

impl ResidueEmbedding {
    fn new(f: &FiniteField, m: &[u32]) -> Result<Self> {
        let deg = (m.len() - 1) as u32;
        let big = FiniteField::get(f.characteristic(), f.degree() * deg)?;
        let beta = if f.degree() == 1 {
            0
        } else {
            let lifted: P = f.modulus().iter().map(|&c| big.from_int(c as i64)).collect();
            factor::roots(&big, &lifted)[0]
        };
        let mut e = ResidueEmbedding { big, beta, alpha: 0 };
        let lifted: P = m.iter().map(|&c| e.base_image(f, c)).collect();
        e.alpha = factor::roots(&e.big, &lifted)[0];
        Ok(e)
    }

    fn base_image(&self, f: &FiniteField, c: u32) -> u32 {
        if f.degree() == 1 {
            return self.big.from_int(c as i64);
        }
        let big = &self.big;
        f.coefficients(c)
            .iter()
            .rev()
            .fold(0, |acc, &d| big.add(big.mul(acc, self.beta), big.from_int(d as i64)))
    }

    fn image(&self, f: &FiniteField, u: &[u32]) -> u32 {
        let big = &self.big;
        u.iter()
            .rev()
            .fold(0, |acc, &c| big.add(big.mul(acc, self.alpha), self.base_image(f, c)))
    }
}

/// Rewrites the diagonal of `q` at the place `place`.
pub fn localize(q: &QuadraticForm, place: &Place) -> Result<Completion> {
    let k = q.tower();
    check_global(k)?;
    let f = k.base().clone();
    let entries: Vec<(i64, P)> = q
        .diag()
        .iter()
        .map(|a| {
            let (n, d) = to_polys(a);
            place.local_data(&f, &n, &d)
        })
        .collect();
    let embedding = match place {
        Place::Infinity => None,
        Place::Finite(m) => ResidueEmbedding::new(&f, m).ok(),
    };
    let residue_field = match (place, &embedding) {
        (Place::Infinity, _) => Some(FieldTower::new(f.characteristic(), f.degree(), vec![])?),
        (_, Some(e)) => Some(FieldTower::new(e.big.characteristic(), e.big.degree(), vec![])?),
        _ => None,
    };
    let entries = entries
        .into_iter()
        .map(|(valuation, residue)| {
            let residue_image = match (place, &embedding) {
                (Place::Infinity, _) => Some(residue[0]),
                (_, Some(e)) => Some(e.image(&f, &residue)),
                _ => None,
            };
            LocalEntry {
                valuation,
                residue,
                residue_image,
            }
        })
        .collect();
    Ok(Completion {
        place: place.clone(),
        residue_field,
        entries,
        base: f,
    })
}

/// Outcome of the local test at one place.
#[derive(Clone, Debug, Serialize)]
pub struct LocalVerdict {
    pub place: String,
    pub degree: usize,
    pub isotropic: bool,
    /// Valuation and residue of every diagonal entry.
    pub entries: Vec<(i64, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalIsotropyReport {
    pub isotropic: bool,
    /// `"dimension"` when decided by the dimension alone, `"square"` for binary forms,
    /// `"places"` otherwise.
    pub rule: &'static str,
    pub places: Vec<LocalVerdict>,
}

/// The completion at `place` without its residue field.
fn local_entries(q: &QuadraticForm, place: &Place) -> Completion {
    let f = q.tower().base();
    let entries = q
        .diag()
        .iter()
        .map(|a| {
            let (num, den) = to_polys(a);
            let (valuation, residue) = place.local_data(f, &num, &den);
            LocalEntry {
                valuation,
                residue,
                residue_image: None,
            }
        })
        .collect();
    Completion {
        place: place.clone(),
        residue_field: None,
        entries,
        base: f.clone(),
    }
}

/// Witt index over `GF(q)(X)`: `q = r H + q'` holds globally iff it holds at every place,
/// so the index is the least local index. Places outside [`places_of_interest`] see a
/// unimodular form, whose index is the generic one unless the signed discriminant is a
/// nonsquare there, which happens at some place iff it is not a global square.
pub fn witt_index_global(q: &QuadraticForm) -> Result<usize> {
    let k = q.tower();
    check_global(k)?;
    let n = q.dim();
    if n == 0 {
        return Ok(0);
    }
    let mut index = n / 2;
    if n % 2 == 0 {
        let mut disc = q.determinant();
        if (n / 2) % 2 == 1 {
            disc = k.neg(&disc);
        }
        if !fields::is_square(k, &disc)? {
            index -= 1;
        }
    }
    for place in places_of_interest(q)? {
        index = index.min(local_entries(q, &place).witt_index());
    }
    Ok(index)
}

/// Isotropy over `GF(q)(X)` by the local-global principle.
pub fn is_isotropic_global(q: &QuadraticForm) -> Result<bool> {
    Ok(isotropy_report(q)?.isotropic)
}

pub fn isotropy_report(q: &QuadraticForm) -> Result<GlobalIsotropyReport> {
    let k = q.tower();
    check_global(k)?;
    let n = q.dim();
    let decided = |isotropic, rule| GlobalIsotropyReport {
        isotropic,
        rule,
        places: Vec::new(),
    };
    match n {
        0 | 1 => return Ok(decided(false, "dimension")),
        2 => {
            let d = q.diag();
            let s = fields::is_square(k, &k.neg(&k.mul(&d[0], &d[1])))?;
            return Ok(decided(s, "square"));
        }
        n if n >= 5 => return Ok(decided(true, "dimension")),
        _ => {}
    }
    let f = k.base();
    let symbol = &k.levels()[0].symbol;
    let mut places = Vec::new();
    let mut isotropic = true;
    for place in places_of_interest(q)? {
        let c = local_entries(q, &place);
        let local = c.is_isotropic();
        isotropic &= local;
        places.push(LocalVerdict {
            place: place.display_with(symbol, f),
            degree: place.degree(),
            isotropic: local,
            entries: c
                .entries
                .iter()
                .map(|e| (e.valuation, display_poly(f, &e.residue, symbol)))
                .collect(),
        });
    }
    Ok(GlobalIsotropyReport {
        isotropic,
        rule: "places",
        places,
    })
}

/// Explicit nontrivial zero of `q` over `GF(q)(X)`; `None` when `q` is anisotropic.
pub fn find_isotropic_vector(q: &QuadraticForm, opts: &WittOptions, salt: u64) -> Result<Option<Vec<Element>>> {
    let k = q.tower();
    check_global(k)?;
    let n = q.dim();
    if n < 2 {
        return Ok(None);
    }
    let f = k.base();
    // <n/d> ~ <n d> with coordinates scaled by d
    let (polys, scales): (Vec<P>, Vec<P>) = q
        .diag()
        .iter()
        .map(|a| {
            let (num, den) = to_polys(a);
            (poly::mul(&**f, &num, &den), den)
        })
        .unzip();
    let vector = |ys: Vec<P>| -> Vec<Element> {
        ys.iter()
            .zip(&scales)
            .map(|(y, d)| from_poly(k, &poly::mul(&**f, y, d)))
            .collect()
    };
    if n == 2 {
        let minus = k.neg(&k.div(&q.diag()[1], &q.diag()[0])?);
        return Ok(fields::exact_sqrt(k, &minus).map(|s| vec![s, k.one()]));
    }
    if n == 4 && !is_isotropic_global(q)? {
        return Ok(None);
    }
    let seed = opts.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let isotropic4 = |d: &[P]| {
        let entries = d.iter().map(|p| from_poly(k, p)).collect();
        QuadraticForm::new(k, entries)
            .and_then(|g| is_isotropic_global(&g))
            .unwrap_or(false)
    };
    match conic::polynomial_zero(f, &polys, &opts.degree_caps, opts.attempts_per_cap, seed, &isotropic4) {
        conic::Search::Found(ys) => {
            let v = vector(ys);
            debug_assert!(q.evaluate(&v).is_zero());
            Ok(Some(v))
        }
        conic::Search::Anisotropic => Ok(None),
        conic::Search::Exhausted => Err(Error::BudgetExceeded(format!(
            "no isotropic vector of {} with coordinates up to degree {}",
            q.display(),
            opts.degree_caps.last().copied().unwrap_or(0)
        ))),
    }
}

/// Local data for the Hilbert symbol.
#[derive(Clone, Copy, Debug)]
pub enum SymbolPlace<'a> {
    /// A rank-one valuation whose residue field is finite.
    Valuation(&'a ValuationCtx),
    /// A place of the field `GF(q)(X)`.
    Place(&'a FieldTower, &'a Place),
}

/// Tame Hilbert symbol `(a, b)`: `+1` iff `<1, -a, -b, ab>` is isotropic locally.
pub fn hilbert_symbol(a: &Element, b: &Element, at: SymbolPlace<'_>) -> Result<i8> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let sign = |square: bool| if square { 1 } else { -1 };
    match at {
        SymbolPlace::Valuation(ctx) => {
            let res = ctx.residue_tower();
            if ctx.rank() != 1 || res.depth() != 0 {
                return Err(Error::UnsupportedTower(format!(
                    "Hilbert symbol needs a finite residue field, got {res}"
                )));
            }
            let f = res.base().clone();
            let (va, ua) = ctx.leading(a)?;
            let (vb, ub) = ctx.leading(b)?;
            let (va, vb) = (va.0[0], vb.0[0]);
            let (ua, ub) = (ua.as_scalar().unwrap(), ub.as_scalar().unwrap());
            Ok(sign(f.is_square(tame(&*f, va, ua, vb, ub))))
        }
        SymbolPlace::Place(k, place) => {
            check_global(k)?;
            let f = k.base().clone();
            let (an, ad) = to_polys(a);
            let (bn, bd) = to_polys(b);
            let (va, ua) = place.local_data(&f, &an, &ad);
            let (vb, ub) = place.local_data(&f, &bn, &bd);
            match place {
                Place::Infinity => Ok(sign(f.is_square(tame(&*f, va, ua[0], vb, ub[0])))),
                Place::Finite(m) => {
                    // the symbol only depends on parities, so work with exponents 0/1
                    let mut x = vec![1];
                    if va * vb % 2 != 0 {
                        x = poly::neg(&*f, &x);
                    }
                    if vb % 2 != 0 {
                        x = poly::rem(&*f, &poly::mul(&*f, &x, &ua), m);
                    }
                    if va % 2 != 0 {
                        x = poly::rem(&*f, &poly::mul(&*f, &x, &ub), m);
                    }
                    Ok(sign(is_square_mod(&f, &x, m)))
                }
            }
        }
    }
}

/// `(-1)^(va vb) ua^vb ub^(-va)`.
fn tame(f: &FiniteField, va: i64, ua: u32, vb: i64, ub: u32) -> u32 {
    let mut x = if va * vb % 2 != 0 { f.neg(1) } else { 1 };
    if vb % 2 != 0 {
        x = f.mul(x, ua);
    }
    if va % 2 != 0 {
        x = f.mul(x, ub);
    }
    x
}

/// Hilbert symbol of `a, b` in `k = GF(q)(X)` at `place`.
pub fn hilbert_symbol_at(k: &FieldTower, a: &Element, b: &Element, place: &Place) -> Result<i8> {
    hilbert_symbol(a, b, SymbolPlace::Place(k, place))
}
