//! Discrete valuations on Laurent towers: composed valuations, Springer decomposition,
//! residue forms, Hensel lifting of isotropic vectors and `F_2`-linear algebra on
//! `vK / 2vK`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{self, poly, Element, FieldTower, LevelKind, ValueVector};
use crate::qforms::{witt_decompose, QuadraticForm};

/// The composition of the valuations of the outermost `rank` Laurent levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationCtx {
    tower: FieldTower,
    rank: usize,
}

impl ValuationCtx {
    pub fn new(tower: &FieldTower, rank: usize) -> Result<Self> {
        let d = tower.depth();
        if rank == 0 || rank > d {
            return Err(Error::UnsupportedLevel(format!(
                "no valuation of rank {rank} on {tower}"
            )));
        }
        if let Some(l) = tower.levels()[d - rank..]
            .iter()
            .find(|l| l.kind != LevelKind::LaurentSeries)
        {
            return Err(Error::UnsupportedLevel(format!(
                "level `{}` is not a Laurent level",
                l.symbol
            )));
        }
        Ok(ValuationCtx {
            tower: tower.clone(),
            rank,
        })
    }

    /// The valuation of the outermost level.
    pub fn outermost(tower: &FieldTower) -> Result<Self> {
        Self::new(tower, 1)
    }

    /// The composition over every Laurent level.
    pub fn composed(tower: &FieldTower) -> Result<Self> {
        Self::new(tower, tower.laurent_rank())
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `[vK : 2vK]`.
    pub fn index(&self) -> usize {
        1 << self.rank
    }

    pub fn residue_tower(&self) -> FieldTower {
        self.tower.truncate(self.tower.depth() - self.rank)
    }

    pub fn value(&self, a: &Element) -> Result<ValueVector> {
        Ok(self.leading(a)?.0)
    }

    /// Valuation and the residue of the unit part `a / prod t_i^(v_i)`.
    pub fn leading(&self, a: &Element) -> Result<(ValueVector, Element)> {
        fields::leading_data(&self.tower, a, self.rank)
    }

    /// Residue of a unit.
    pub fn residue(&self, a: &Element) -> Result<Element> {
        if a.is_zero() {
            return Ok(self.residue_tower().zero());
        }
        let (v, r) = self.leading(a)?;
        if !v.is_zero() {
            return Err(Error::NotIntegralUnit(v.0));
        }
        Ok(r)
    }

    /// `prod t_i^(e_i)`, exponents outermost first.
    pub fn monomial(&self, exps: &[i64]) -> Element {
        assert_eq!(exps.len(), self.rank);
        fields::monomial(&self.tower, exps)
    }

    /// The fixed representatives `prod t_i^(e_i)`, `e in {0,1}^r`, in lexicographic order
    /// of `e` (outermost level first).
    pub fn coset_reps(&self) -> Vec<(Vec<bool>, Element)> {
        (0..self.index())
            .map(|bits| {
                let class: Vec<bool> = (0..self.rank)
                    .map(|i| bits >> (self.rank - 1 - i) & 1 == 1)
                    .collect();
                let exps: Vec<i64> = class.iter().map(|&b| b as i64).collect();
                (class, self.monomial(&exps))
            })
            .collect()
    }
}

/// Composes a valuation with a valuation on its residue tower.
pub fn compose(outer: &ValuationCtx, inner: &ValuationCtx) -> Result<ValuationCtx> {
    if inner.tower != outer.residue_tower() {
        return Err(Error::TowerMismatch);
    }
    ValuationCtx::new(&outer.tower, outer.rank + inner.rank)
}

/// Residue forms of a form, one per class of `vK / 2vK` that the diagonal meets.
#[derive(Clone, Debug)]
pub struct ResidueDecomposition {
    pub classes: Vec<Vec<bool>>,
    pub coset_reps: Vec<Element>,
    /// Unit residues of the diagonal entries of each class, as they stand.
    pub raw_parts: Vec<QuadraticForm>,
    /// Anisotropic kernels of the raw parts: the residue forms of the anisotropic
    /// kernel of the input.
    pub parts: Vec<QuadraticForm>,
}

impl ResidueDecomposition {
    pub fn part(&self, class: &[bool]) -> Option<&QuadraticForm> {
        self.classes.iter().position(|c| c == class).map(|i| &self.parts[i])
    }

    pub fn raw_part(&self, class: &[bool]) -> Option<&QuadraticForm> {
        self.classes.iter().position(|c| c == class).map(|i| &self.raw_parts[i])
    }

    pub fn to_json(&self, tower: &FieldTower) -> serde_json::Value {
        let residue = tower.truncate(tower.depth() - self.classes.first().map_or(0, Vec::len));
        let entries: Vec<serde_json::Value> = self
            .classes
            .iter()
            .enumerate()
            .map(|(i, _)| {
                serde_json::json!({
                    "pi": tower.display(&self.coset_reps[i]),
                    "form": self.parts[i].diag().iter().map(|e| residue.display(e)).collect::<Vec<_>>(),
                    "raw": self.raw_parts[i].diag().iter().map(|e| residue.display(e)).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::Value::Array(entries)
    }
}

/// Groups the diagonal by valuation class and takes unit residues. Only classes met by
/// the form are returned, in lexicographic order.
pub(crate) fn raw_parts(
    q: &QuadraticForm,
    ctx: &ValuationCtx,
) -> Result<Vec<(Vec<bool>, QuadraticForm)>> {
    if q.tower() != ctx.tower() {
        return Err(Error::TowerMismatch);
    }
    let res = ctx.residue_tower();
    let mut groups: Vec<(Vec<bool>, Vec<Element>)> = Vec::new();
    for a in q.diag() {
        let (v, u) = ctx.leading(a)?;
        let class = v.parity();
        match groups.iter_mut().find(|(c, _)| *c == class) {
            Some((_, g)) => g.push(u),
            None => groups.push((class, vec![u])),
        }
    }
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    groups
        .into_iter()
        .map(|(c, g)| Ok((c, QuadraticForm::new(&res, g)?)))
        .collect()
}

/// Springer decomposition: `q ~ (+)_e pi_e lift(part_e)` over the henselian field.
pub fn springer_decompose(q: &QuadraticForm, ctx: &ValuationCtx) -> Result<ResidueDecomposition> {
    let raw = raw_parts(q, ctx)?;
    let mut out = ResidueDecomposition {
        classes: Vec::new(),
        coset_reps: Vec::new(),
        raw_parts: Vec::new(),
        parts: Vec::new(),
    };
    for (class, part) in raw {
        let exps: Vec<i64> = class.iter().map(|&b| b as i64).collect();
        out.coset_reps.push(ctx.monomial(&exps));
        out.parts.push(witt_decompose(&part)?.anisotropic_kernel);
        out.classes.push(class);
        out.raw_parts.push(part);
    }
    Ok(out)
}

/// The residue form `d_pi(q)`: the part at the class of `v(pi)`, rescaled by the unit
/// residue of `rep / pi`. Empty when the class does not occur.
pub fn residue_form(q: &QuadraticForm, ctx: &ValuationCtx, pi: &Element) -> Result<QuadraticForm> {
    if pi.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let (v, u) = ctx.leading(pi)?;
    let res = ctx.residue_tower();
    let dec = springer_decompose(q, ctx)?;
    match dec.part(&v.parity()) {
        None => Ok(QuadraticForm::empty(&res)),
        Some(part) => part.scale(&res.inv(&u)?),
    }
}

/// Output of [`hensel_lift_isotropic`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HenselLift {
    pub vector: Vec<Element>,
    /// `q(vector) = 0` exactly.
    pub exact: bool,
    /// Otherwise `q(vector)` has outer valuation at least this value.
    pub precision: Option<i64>,
}

/// Default `t`-adic precision of non-exact lifts.
pub const DEFAULT_LIFT_PRECISION: usize = 16;

/// Lifts a zero of the first residue form of a unit-diagonal form.
///
/// With `x` the constant lift of the witness and `j` a coordinate where it is nonzero,
/// `f(T) = q(x + T e_j)` has a simple root near `0`; its discriminant is a unit whose
/// residue is a known square. The root is exact when the discriminant is a square of a
/// rational function, otherwise its square root is expanded to `precision` terms.
pub fn hensel_lift_isotropic(
    q: &QuadraticForm,
    ctx: &ValuationCtx,
    witness: &[Element],
    precision: usize,
) -> Result<HenselLift> {
    if ctx.rank() != 1 {
        return Err(Error::UnsupportedLevel("Hensel lifting uses a rank-1 valuation".into()));
    }
    let k = q.tower();
    let depth = k.depth();
    let res = ctx.residue_tower();
    if witness.len() != q.dim() {
        return Err(Error::WitnessInvalid(format!(
            "witness has {} coordinates, form has dimension {}",
            witness.len(),
            q.dim()
        )));
    }
    let mut residues = Vec::with_capacity(q.dim());
    for d in q.diag() {
        let (v, u) = ctx.leading(d)?;
        if !v.is_zero() {
            return Err(Error::WitnessInvalid("diagonal entries must be units".into()));
        }
        residues.push(u);
    }
    let qbar = QuadraticForm::new(&res, residues)?;
    if !qbar.evaluate(witness).is_zero() {
        return Err(Error::WitnessInvalid("witness is not a zero of the residue form".into()));
    }
    let j = witness
        .iter()
        .position(|x| !x.is_zero())
        .ok_or_else(|| Error::WitnessInvalid("witness is zero".into()))?;
    let x: Vec<Element> = witness.iter().map(|w| k.embed_to(w, depth - 1, depth)).collect();
    let c = q.evaluate(&x);
    if c.is_zero() {
        return Ok(HenselLift {
            vector: x,
            exact: true,
            precision: None,
        });
    }
    let a = q.diag()[j].clone();
    let two = k.from_int(2);
    let b = k.mul(&two, &k.mul(&a, &x[j]));
    let disc = k.sub(&k.mul(&b, &b), &k.mul(&k.from_int(4), &k.mul(&a, &c)));
    let two_a_inv = k.inv(&k.mul(&two, &a))?;
    let with_root = |s: &Element| -> Vec<Element> {
        let t = k.mul(&k.sub(s, &b), &two_a_inv);
        let mut z = x.clone();
        z[j] = k.add(&z[j], &t);
        z
    };
    if let Some(s) = fields::exact_sqrt(k, &disc) {
        // pick the root congruent to b so that T stays small
        let s = if ctx.residue(&k.sub(&s, &b)).is_ok_and(|r| r.is_zero()) {
            s
        } else {
            k.neg(&s)
        };
        let z = with_root(&s);
        if q.evaluate(&z).is_zero() {
            return Ok(HenselLift {
                vector: z,
                exact: true,
                precision: None,
            });
        }
    }
    let s0 = ctx.residue(&b)?;
    let s = series_sqrt(k, &disc, &s0, precision)?;
    let z = with_root(&s);
    let err = q.evaluate(&z);
    let reached = if err.is_zero() {
        None
    } else {
        Some(fields::order_at(k, depth, &err))
    };
    if let Some(v) = reached {
        if v < precision as i64 {
            return Err(Error::WitnessInvalid(format!(
                "lift reached precision {v} only"
            )));
        }
    }
    Ok(HenselLift {
        vector: z,
        exact: reached.is_none(),
        precision: reached.map(|_| precision as i64),
    })
}

/// Truncation to `n` terms of the power-series square root of the unit `a` whose
/// constant term is `s0^2`.
fn series_sqrt(k: &FieldTower, a: &Element, s0: &Element, n: usize) -> Result<Element> {
    let depth = k.depth();
    let lv = k.at(depth - 1);
    use poly::Field;
    let r = a.as_ratio().expect("element of a transcendental level");
    let coeff = |p: &[Element], i: usize| p.get(i).cloned().unwrap_or_else(|| lv.zero());
    // power series of the denominator inverse
    let den = r.denominator();
    let d0_inv = lv.inv(&coeff(den, 0));
    let mut inv = vec![d0_inv.clone()];
    for i in 1..n {
        let mut acc = lv.zero();
        for j in 1..=i {
            acc = lv.add(&acc, &lv.mul(&coeff(den, j), &inv[i - j]));
        }
        inv.push(lv.neg(&lv.mul(&acc, &d0_inv)));
    }
    let num = r.numerator();
    let ser: Vec<Element> = (0..n)
        .map(|i| {
            (0..=i).fold(lv.zero(), |acc, j| lv.add(&acc, &lv.mul(&coeff(num, j), &inv[i - j])))
        })
        .collect();
    if lv.mul(s0, s0) != ser[0] {
        return Err(Error::WitnessInvalid("constant term mismatch in square root".into()));
    }
    let two_s0_inv = lv.inv(&lv.mul(&lv.from_int(2), s0));
    let mut s = vec![s0.clone()];
    for i in 1..n {
        let mut acc = ser[i].clone();
        for j in 1..i {
            acc = lv.sub(&acc, &lv.mul(&s[j], &s[i - j]));
        }
        s.push(lv.mul(&acc, &two_s0_inv));
    }
    let sp = k.polynomial(depth, s);
    Ok(sp)
}

/// Result of [`f2_span`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanResult {
    pub in_span: bool,
    /// Indices of a maximal independent subset, chosen greedily in input order.
    pub basis: Vec<usize>,
    /// Indices whose sum is congruent to the target, when it lies in the span.
    pub combination: Option<Vec<usize>>,
}

/// Membership of the class of `target` in the span of the classes of `vectors`
/// inside `vK / 2vK`.
pub fn f2_span(vectors: &[ValueVector], target: &ValueVector) -> SpanResult {
    let bits = |v: &ValueVector| -> Vec<bool> { v.parity() };
    // echelon rows: (bits, pivot, set of input indices)
    let mut rows: Vec<(Vec<bool>, usize, Vec<bool>)> = Vec::new();
    let mut basis = Vec::new();
    let n = vectors.len();
    let reduce = |rows: &[(Vec<bool>, usize, Vec<bool>)], mut v: Vec<bool>, mut set: Vec<bool>| {
        for (r, p, s) in rows {
            if v[*p] {
                for (a, b) in v.iter_mut().zip(r) {
                    *a ^= *b;
                }
                for (a, b) in set.iter_mut().zip(s) {
                    *a ^= *b;
                }
            }
        }
        (v, set)
    };
    for (i, vec) in vectors.iter().enumerate() {
        let mut set = vec![false; n];
        set[i] = true;
        let (v, set) = reduce(&rows, bits(vec), set);
        if let Some(p) = v.iter().position(|&b| b) {
            rows.push((v, p, set));
            basis.push(i);
        }
    }
    let (rest, set) = reduce(&rows, bits(target), vec![false; n]);
    let in_span = rest.iter().all(|b| !b);
    SpanResult {
        in_span,
        basis,
        combination: in_span.then(|| (0..n).filter(|&i| set[i]).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::LevelDescriptor;

    fn laurent(q: u64, syms: &[&str]) -> FieldTower {
        let mut k = FieldTower::finite(q).unwrap();
        for s in syms {
            k = k.with_level(LevelDescriptor::laurent(s)).unwrap();
        }
        k
    }

    fn ints(k: &FieldTower, xs: &[i64]) -> Vec<Element> {
        xs.iter().map(|&x| k.from_int(x)).collect()
    }

    #[test]
    fn springer_examples() {
        let k = laurent(3, &["t"]);
        let t = k.symbol("t").unwrap();
        let q = QuadraticForm::new(&k, vec![k.one(), k.from_int(-2), t.clone(), k.mul(&k.from_int(-2), &t)]).unwrap();
        let ctx = ValuationCtx::outermost(&k).unwrap();
        let d = springer_decompose(&q, &ctx).unwrap();
        let f3 = FieldTower::finite(3).unwrap();
        let expect = QuadraticForm::new(&f3, ints(&f3, &[1, -2])).unwrap();
        assert_eq!(d.classes, vec![vec![false], vec![true]]);
        assert_eq!(d.parts, vec![expect.clone(), expect]);

        let k5 = laurent(5, &["t"]);
        let t = k5.symbol("t").unwrap();
        let t2 = k5.mul(&t, &t);
        let q = QuadraticForm::new(&k5, vec![k5.one(), t2.clone(), k5.mul(&k5.from_int(4), &k5.mul(&t2, &t))]).unwrap();
        let d = springer_decompose(&q, &ValuationCtx::outermost(&k5).unwrap()).unwrap();
        let f5 = FieldTower::finite(5).unwrap();
        assert_eq!(d.raw_parts[0], QuadraticForm::new(&f5, ints(&f5, &[1, 1])).unwrap());
        assert_eq!(d.raw_parts[1], QuadraticForm::new(&f5, ints(&f5, &[4])).unwrap());
        // <1,1> is hyperbolic over GF(5), so the kernel parts shrink
        assert!(d.parts[0].is_empty());
    }

    #[test]
    fn rank_two_springer() {
        let k = laurent(3, &["t", "u"]);
        let t = k.symbol("t").unwrap();
        let u = k.symbol("u").unwrap();
        let q = QuadraticForm::new(&k, vec![k.one(), k.neg(&u), k.neg(&t), k.mul(&u, &t)]).unwrap();
        let ctx = ValuationCtx::composed(&k).unwrap();
        let d = springer_decompose(&q, &ctx).unwrap();
        let f3 = FieldTower::finite(3).unwrap();
        let forms: Vec<QuadraticForm> = [1, -1, -1, 1]
            .iter()
            .map(|&x| QuadraticForm::new(&f3, ints(&f3, &[x])).unwrap())
            .collect();
        assert_eq!(d.parts, forms);
        assert_eq!(d.coset_reps, vec![k.one(), t.clone(), u.clone(), k.mul(&u, &t)]);
    }

    #[test]
    fn residue_form_examples() {
        let k3 = laurent(3, &["t"]);
        let ctx = ValuationCtx::outermost(&k3).unwrap();
        let q = QuadraticForm::new(&k3, ints(&k3, &[1, -2])).unwrap();
        assert!(residue_form(&q, &ctx, &k3.symbol("t").unwrap()).unwrap().is_empty());
        let t = k3.symbol("t").unwrap();
        let q = QuadraticForm::new(&k3, vec![t.clone()]).unwrap();
        let f3 = FieldTower::finite(3).unwrap();
        assert_eq!(residue_form(&q, &ctx, &t).unwrap(), QuadraticForm::new(&f3, ints(&f3, &[1])).unwrap());

        let k5 = laurent(5, &["t"]);
        let ctx = ValuationCtx::outermost(&k5).unwrap();
        let t = k5.symbol("t").unwrap();
        let q = QuadraticForm::new(&k5, vec![t.clone()]).unwrap();
        let pi = k5.mul(&k5.from_int(4), &t);
        let f5 = FieldTower::finite(5).unwrap();
        assert_eq!(residue_form(&q, &ctx, &pi).unwrap(), QuadraticForm::new(&f5, ints(&f5, &[4])).unwrap());
        assert_eq!(residue_form(&q, &ctx, &k5.zero()).unwrap_err(), Error::ZeroArgument);
    }

    #[test]
    fn hensel_examples() {
        let k3 = laurent(3, &["t"]);
        let f3 = FieldTower::finite(3).unwrap();
        let ctx = ValuationCtx::outermost(&k3).unwrap();
        let q = QuadraticForm::new(&k3, ints(&k3, &[1, -1])).unwrap();
        let z = hensel_lift_isotropic(&q, &ctx, &ints(&f3, &[1, 1]), 16).unwrap();
        assert!(z.exact);
        assert_eq!(z.vector, ints(&k3, &[1, 1]));

        let k5 = laurent(5, &["t"]);
        let f5 = FieldTower::finite(5).unwrap();
        let ctx = ValuationCtx::outermost(&k5).unwrap();
        let t = k5.symbol("t").unwrap();
        let q = QuadraticForm::new(&k5, vec![k5.one(), k5.neg(&k5.add(&k5.one(), &t))]).unwrap();
        let z = hensel_lift_isotropic(&q, &ctx, &ints(&f5, &[1, 1]), 16).unwrap();
        assert!(!z.exact);
        assert_eq!(z.precision, Some(16));
        assert_eq!(z.vector[1], k5.one());
        let s = &z.vector[0];
        let err = k5.sub(&k5.mul(s, s), &k5.add(&k5.one(), &t));
        assert!(fields::valuation(&k5, &err).unwrap().0[0] >= 16);

        let k7 = laurent(7, &["t"]);
        let f7 = FieldTower::finite(7).unwrap();
        let q = QuadraticForm::new(&k7, ints(&k7, &[1, 1, 1])).unwrap();
        let ctx = ValuationCtx::outermost(&k7).unwrap();
        let z = hensel_lift_isotropic(&q, &ctx, &ints(&f7, &[1, 2, 3]), 16).unwrap();
        assert!(z.exact && z.vector == ints(&k7, &[1, 2, 3]));
        assert!(matches!(
            hensel_lift_isotropic(&q, &ctx, &ints(&f7, &[1, 1, 1]), 16),
            Err(Error::WitnessInvalid(_))
        ));
    }

    #[test]
    fn span_examples() {
        let v = |xs: &[i64]| ValueVector(xs.to_vec());
        assert!(f2_span(&[v(&[1])], &v(&[3])).in_span);
        assert!(!f2_span(&[v(&[1, 0])], &v(&[0, 1])).in_span);
        let r = f2_span(&[v(&[1, 0]), v(&[1, 1])], &v(&[0, 1]));
        assert!(r.in_span);
        assert_eq!(r.combination, Some(vec![0, 1]));
        assert_eq!(r.basis, vec![0, 1]);
        let r = f2_span(&[v(&[1, 0]), v(&[3, 0]), v(&[0, 1])], &v(&[0, 0]));
        assert_eq!(r.basis, vec![0, 2]);
        assert_eq!(r.combination, Some(vec![]));
    }

    #[test]
    fn composition() {
        let k = laurent(3, &["t", "u"]);
        let outer = ValuationCtx::outermost(&k).unwrap();
        let inner = ValuationCtx::outermost(&outer.residue_tower()).unwrap();
        let c = compose(&outer, &inner).unwrap();
        assert_eq!(c.rank(), 2);
        assert_eq!(c.index(), 4);
        assert_eq!(c.residue_tower(), FieldTower::finite(3).unwrap());
        let t = k.symbol("t").unwrap();
        let u = k.symbol("u").unwrap();
        let a = k.div(&t, &k.mul(&u, &u)).unwrap();
        assert_eq!(c.value(&a).unwrap(), ValueVector(vec![-2, 1]));
        assert_eq!(compose(&inner, &outer), Err(Error::TowerMismatch));
    }
}
