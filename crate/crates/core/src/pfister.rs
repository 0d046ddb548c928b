//! Bilinear and quadratic Pfister symbols, the slot calculus and Pfister residues.
//!
//! `<<a_1, ..., a_n>>` is the bilinear form `<1, -a_1> (x) ... (x) <1, -a_n>` and
//! `<<a_1, ..., a_n; b]]` is `<<a_1, ..., a_n>> (x) [1, -b]` where `[1, -b]` is
//! `x^2 - xy - b y^2 ~ <1, -(1 + 4b)>`. Rule indices are 1-based.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fields::{Element, FieldTower, ValueVector};
use crate::qforms::{is_isotropic, QuadraticForm};
use crate::valuation::{f2_span, ValuationCtx};

#[derive(Clone, PartialEq, Eq)]
pub struct BilinearPfisterSymbol {
    tower: FieldTower,
    slots: Vec<Element>,
}

impl BilinearPfisterSymbol {
    pub fn new(tower: &FieldTower, slots: Vec<Element>) -> Result<Self> {
        if slots.iter().any(Element::is_zero) {
            return Err(Error::ZeroArgument);
        }
        Ok(BilinearPfisterSymbol {
            tower: tower.clone(),
            slots,
        })
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn slots(&self) -> &[Element] {
        &self.slots
    }

    pub fn fold(&self) -> usize {
        self.slots.len()
    }

    /// The entries `(-1)^|I| prod_(i in I) a_i`, with `a_1` as the lowest bit of `I`.
    pub fn entries(&self) -> Vec<Element> {
        let k = &self.tower;
        let mut out = vec![k.one()];
        for a in &self.slots {
            let m = k.neg(a);
            let next: Vec<Element> = out.iter().map(|x| k.mul(x, &m)).collect();
            out.extend(next);
        }
        out
    }

    pub fn expand(&self) -> QuadraticForm {
        QuadraticForm::new(&self.tower, self.entries()).expect("entries are nonzero")
    }

    pub fn display(&self) -> String {
        let s: Vec<String> = self.slots.iter().map(|a| self.tower.display(a)).collect();
        format!("<<{}>>", s.join(", "))
    }
}

impl fmt::Display for BilinearPfisterSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

impl fmt::Debug for BilinearPfisterSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}", self.display(), self.tower)
    }
}

/// `<<a_1, ..., a_(d-1); b]]`, of fold `d`.
#[derive(Clone, PartialEq, Eq)]
pub struct QuadraticPfisterSymbol {
    tower: FieldTower,
    slots: Vec<Element>,
    last: Element,
}

impl QuadraticPfisterSymbol {
    pub fn new(tower: &FieldTower, slots: Vec<Element>, last: Element) -> Result<Self> {
        if slots.iter().any(Element::is_zero) {
            return Err(Error::ZeroArgument);
        }
        let s = QuadraticPfisterSymbol {
            tower: tower.clone(),
            slots,
            last,
        };
        if s.discriminant().is_zero() {
            return Err(Error::ZeroArgument);
        }
        Ok(s)
    }

    /// The symbol whose bilinear presentation is `b`, i.e. with last slot `(c - 1)/4`
    /// for the last bilinear slot `c`.
    pub fn from_bilinear(b: &BilinearPfisterSymbol) -> Result<Self> {
        let k = b.tower();
        let (c, rest) = b
            .slots()
            .split_last()
            .ok_or_else(|| Error::ConfigUnsupported("empty bilinear symbol".into()))?;
        let last = k.div(&k.sub(c, &k.one()), &k.from_int(4))?;
        Self::new(k, rest.to_vec(), last)
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn slots(&self) -> &[Element] {
        &self.slots
    }

    pub fn last(&self) -> &Element {
        &self.last
    }

    pub fn fold(&self) -> usize {
        self.slots.len() + 1
    }

    /// `1 + 4b`.
    pub fn discriminant(&self) -> Element {
        let k = &self.tower;
        k.add(&k.one(), &k.mul(&k.from_int(4), &self.last))
    }

    /// `<<a_1, ..., a_(d-1), 1 + 4b>>`, whose expansion is that of `self`.
    pub fn bilinear(&self) -> BilinearPfisterSymbol {
        let mut slots = self.slots.clone();
        slots.push(self.discriminant());
        BilinearPfisterSymbol {
            tower: self.tower.clone(),
            slots,
        }
    }

    /// `<1, -(1 + 4b)> (x) <<a_1, ..., a_(d-1)>>`, a diagonal form of dimension `2^d`.
    pub fn expand(&self) -> QuadraticForm {
        let k = &self.tower;
        let binary = QuadraticForm::new(k, vec![k.one(), k.neg(&self.discriminant())])
            .expect("1 + 4b is nonzero");
        let outer = BilinearPfisterSymbol {
            tower: k.clone(),
            slots: self.slots.clone(),
        };
        binary.tensor_bilinear(&outer.entries()).expect("entries are nonzero")
    }

    /// The pure part: the expansion without its leading `1`.
    pub fn pure_part(&self) -> QuadraticForm {
        let d = self.expand().into_diag();
        QuadraticForm::new(&self.tower, d[1..].to_vec()).expect("entries are nonzero")
    }

    pub fn display(&self) -> String {
        let k = &self.tower;
        let b = k.display(&self.last);
        if self.slots.is_empty() {
            return format!("<<{b}]]");
        }
        let s: Vec<String> = self.slots.iter().map(|a| k.display(a)).collect();
        format!("<<{}; {b}]]", s.join(", "))
    }
}

impl fmt::Display for QuadraticPfisterSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

impl fmt::Debug for QuadraticPfisterSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}", self.display(), self.tower)
    }
}

/// Isometry-preserving rewrites of a bilinear symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Exchange slots `i` and `i + 1`.
    Swap(usize),
    /// `<<a, b>> -> <<a + b, -ab>>` on slots `i, i + 1`; needs `a + b != 0`.
    Merge(usize),
    /// `<<a, -a>> -> <<a, 1>>` on slots `i, i + 1`; both are metabolic.
    Collapse(usize),
    /// `a_i -> a_i c^2`.
    SquareScale(usize, Element),
}

impl Rule {
    pub fn describe(&self, k: &FieldTower) -> String {
        match self {
            Rule::Swap(i) => format!("Swap({i})"),
            Rule::Merge(i) => format!("Merge({i})"),
            Rule::Collapse(i) => format!("Collapse({i})"),
            Rule::SquareScale(i, c) => format!("SquareScale({i}, {})", k.display(c)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: Rule,
    pub before: Vec<Element>,
    pub after: Vec<Element>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// Applies the recorded rules to `s` in order.
    pub fn replay(&self, s: &BilinearPfisterSymbol) -> Result<BilinearPfisterSymbol> {
        let mut cur = s.clone();
        for step in &self.steps {
            cur = apply(&cur, &step.rule)?;
        }
        Ok(cur)
    }

    pub fn to_json(&self, k: &FieldTower) -> Value {
        let show = |v: &[Element]| -> Vec<String> { v.iter().map(|a| k.display(a)).collect() };
        Value::Array(
            self.steps
                .iter()
                .map(|s| {
                    json!({
                        "rule": s.rule.describe(k),
                        "before": show(&s.before),
                        "after": show(&s.after),
                    })
                })
                .collect(),
        )
    }
}

fn not_applicable(rule: &Rule, s: &BilinearPfisterSymbol, why: &str) -> Error {
    Error::RuleNotApplicable(format!("{} on {}: {why}", rule.describe(s.tower()), s.display()))
}

fn apply(s: &BilinearPfisterSymbol, rule: &Rule) -> Result<BilinearPfisterSymbol> {
    let k = s.tower();
    let n = s.fold();
    let pair = |i: usize| -> Result<usize> {
        if i == 0 || i >= n {
            return Err(not_applicable(rule, s, "no such pair of slots"));
        }
        Ok(i - 1)
    };
    let mut slots = s.slots.clone();
    match rule {
        Rule::Swap(i) => {
            let j = pair(*i)?;
            slots.swap(j, j + 1);
        }
        Rule::Merge(i) => {
            let j = pair(*i)?;
            let sum = k.add(&slots[j], &slots[j + 1]);
            if sum.is_zero() {
                return Err(not_applicable(rule, s, "the two slots sum to zero"));
            }
            slots[j + 1] = k.neg(&k.mul(&slots[j], &slots[j + 1]));
            slots[j] = sum;
        }
        Rule::Collapse(i) => {
            let j = pair(*i)?;
            if !k.add(&slots[j], &slots[j + 1]).is_zero() {
                return Err(not_applicable(rule, s, "the two slots do not sum to zero"));
            }
            slots[j + 1] = k.one();
        }
        Rule::SquareScale(i, c) => {
            if *i == 0 || *i > n {
                return Err(not_applicable(rule, s, "no such slot"));
            }
            if c.is_zero() {
                return Err(not_applicable(rule, s, "zero scale"));
            }
            slots[i - 1] = k.mul(&slots[i - 1], &k.mul(c, c));
        }
    }
    Ok(BilinearPfisterSymbol {
        tower: k.clone(),
        slots,
    })
}

/// Applies one rule.
pub fn rewrite(s: &BilinearPfisterSymbol, rule: Rule) -> Result<(BilinearPfisterSymbol, RewriteTrace)> {
    let mut trace = RewriteTrace::default();
    let out = step(s, rule, &mut trace)?;
    Ok((out, trace))
}

fn step(s: &BilinearPfisterSymbol, rule: Rule, trace: &mut RewriteTrace) -> Result<BilinearPfisterSymbol> {
    let out = apply(s, &rule)?;
    trace.steps.push(RewriteStep {
        rule,
        before: s.slots.clone(),
        after: out.slots.clone(),
    });
    Ok(out)
}

/// Moves slot `from` to position `to` (0-based) by adjacent swaps.
fn move_slot(
    mut s: BilinearPfisterSymbol,
    from: usize,
    to: usize,
    trace: &mut RewriteTrace,
) -> Result<BilinearPfisterSymbol> {
    let mut i = from;
    while i < to {
        s = step(&s, Rule::Swap(i + 1), trace)?;
        i += 1;
    }
    while i > to {
        s = step(&s, Rule::Swap(i), trace)?;
        i -= 1;
    }
    Ok(s)
}

fn values(ctx: &ValuationCtx, slots: &[Element]) -> Result<Vec<ValueVector>> {
    slots.iter().map(|a| ctx.value(a)).collect()
}

/// Makes slot `end - 1` a unit, touching only slots `lo..end`. The class of its value
/// must lie in the span of the classes of slots `lo..end - 1`.
fn normalize_range(
    mut s: BilinearPfisterSymbol,
    ctx: &ValuationCtx,
    mut lo: usize,
    end: usize,
    trace: &mut RewriteTrace,
) -> Result<BilinearPfisterSymbol> {
    loop {
        let last = end - 1;
        let v = ctx.value(&s.slots[last])?;
        if v.is_zero() {
            return Ok(s);
        }
        if v.is_even() {
            let exps: Vec<i64> = v.0.iter().map(|e| -e / 2).collect();
            return step(&s, Rule::SquareScale(end, ctx.monomial(&exps)), trace);
        }
        let vals = values(ctx, &s.slots[lo..last])?;
        let span = f2_span(&vals, &v);
        let comb = span.combination.ok_or(Error::PreconditionSpanViolated)?;
        let j = lo + *comb.last().expect("odd value needs a nonempty combination");
        s = move_slot(s, j, last - 1, trace)?;
        let sum = s.tower.add(&s.slots[last - 1], &s.slots[last]);
        if sum.is_zero() {
            return step(&s, Rule::Collapse(last), trace);
        }
        s = step(&s, Rule::Merge(last), trace)?;
        // the merged slot is frozen at the front of the active range
        s = move_slot(s, last - 1, lo, trace)?;
        lo += 1;
    }
}

/// Rewrites `s` so that its last slot is a unit for `ctx`.
pub fn normalize_last_slot(
    s: &BilinearPfisterSymbol,
    ctx: &ValuationCtx,
) -> Result<(BilinearPfisterSymbol, RewriteTrace)> {
    if s.tower() != ctx.tower() {
        return Err(Error::TowerMismatch);
    }
    let n = s.fold();
    if n == 0 {
        return Err(Error::ConfigUnsupported("empty bilinear symbol".into()));
    }
    let vals = values(ctx, &s.slots)?;
    if !f2_span(&vals[..n - 1], &vals[n - 1]).in_span {
        return Err(Error::PreconditionSpanViolated);
    }
    let mut trace = RewriteTrace::default();
    let out = normalize_range(s.clone(), ctx, 0, n, &mut trace)?;
    Ok((out, trace))
}

/// A presentation `<<a_1, ..., a_m, u_(m+1), ..., u_n>>` where the classes of
/// `v(a_1), ..., v(a_m)` are independent in `vK / 2vK` and every `u_i` is a unit.
#[derive(Clone, Debug)]
pub struct NormalPresentation {
    pub symbol: BilinearPfisterSymbol,
    pub independent: usize,
    pub trace: RewriteTrace,
}

pub fn normal_presentation(s: &BilinearPfisterSymbol, ctx: &ValuationCtx) -> Result<NormalPresentation> {
    if s.tower() != ctx.tower() {
        return Err(Error::TowerMismatch);
    }
    let n = s.fold();
    let mut trace = RewriteTrace::default();
    let mut cur = s.clone();
    let mut active = n;
    // units found so far sit in slots active..n
    loop {
        let vals = values(ctx, &cur.slots[..active])?;
        let dependent = (0..active).find(|&i| f2_span(&vals[..i], &vals[i]).in_span);
        let Some(i) = dependent else {
            break;
        };
        cur = move_slot(cur, i, active - 1, &mut trace)?;
        cur = normalize_range(cur, ctx, 0, active, &mut trace)?;
        active -= 1;
    }
    Ok(NormalPresentation {
        symbol: cur,
        independent: active,
        trace,
    })
}

/// An isometric quadratic symbol `<<a_1, ..., a_(d-1); b]]` with `v(b) = v(1 + 4b) = 0`.
/// With `ctx = None` the valuation is trivial and `s` is returned unchanged.
pub fn good_slot_presentation(
    s: &QuadraticPfisterSymbol,
    ctx: Option<&ValuationCtx>,
) -> Result<QuadraticPfisterSymbol> {
    match ctx {
        Some(ctx) if !is_good(s, ctx)? => Ok(good_slot(s, ctx)?.0),
        _ => Ok(s.clone()),
    }
}

fn is_good(s: &QuadraticPfisterSymbol, ctx: &ValuationCtx) -> Result<bool> {
    if s.tower() != ctx.tower() {
        return Err(Error::TowerMismatch);
    }
    Ok(!s.last.is_zero() && ctx.value(&s.last)?.is_zero() && ctx.value(&s.discriminant())?.is_zero())
}

/// `Some(m)` when `s` is good and its slots are `m` of independent value followed by units.
fn normalized_shape(s: &QuadraticPfisterSymbol, ctx: &ValuationCtx) -> Result<Option<usize>> {
    if !is_good(s, ctx)? {
        return Ok(None);
    }
    let vals = values(ctx, &s.slots)?;
    let m = vals.iter().take_while(|v| !v.is_zero()).count();
    let independent = (0..m).all(|i| !f2_span(&vals[..i], &vals[i]).in_span);
    Ok(independent.then_some(m))
}

/// The good presentation and the number of slots of independent value.
fn good_slot(s: &QuadraticPfisterSymbol, ctx: &ValuationCtx) -> Result<(QuadraticPfisterSymbol, usize)> {
    let k = s.tower();
    let np = normal_presentation(&s.bilinear(), ctx)?;
    let m = np.independent;
    let sym = np.symbol;
    let res = ctx.residue_tower();
    let unit_slots = m..sym.fold();
    let chosen = unit_slots
        .clone()
        .find(|&i| ctx.residue(&sym.slots[i]).is_ok_and(|r| r != res.one()));
    if let Some(i) = chosen {
        let last = sym.fold() - 1;
        let moved = move_slot(sym, i, last, &mut RewriteTrace::default())?;
        return Ok((QuadraticPfisterSymbol::from_bilinear(&moved)?, m));
    }
    if unit_slots.is_empty() {
        return Err(Error::NoGoodSlot(format!("every slot of {} has odd value", s.display())));
    }
    // a unit slot with residue 1 is a square: the form is hyperbolic
    let d = s.fold();
    if d >= 2 {
        let half = k.div(&k.from_int(-1), &k.from_int(2))?;
        return Ok((QuadraticPfisterSymbol::new(k, vec![k.one(); d - 1], half)?, 0));
    }
    let p = k.characteristic();
    let square = if p != 3 {
        Some(k.from_int(4))
    } else if k.base().degree() > 1 {
        let g = k.symbol(crate::fields::tower::GENERATOR_SYMBOL)?;
        Some(k.mul(&g, &g))
    } else if res.depth() > 0 {
        let y = k.symbol(&k.levels()[0].symbol)?;
        let y1 = k.add(&k.one(), &y);
        Some(k.mul(&y1, &y1))
    } else {
        None
    };
    let c = square.ok_or_else(|| {
        Error::NoGoodSlot(format!("no square unit c with c - 1 a unit over {}", res))
    })?;
    let b = k.div(&k.sub(&c, &k.one()), &k.from_int(4))?;
    Ok((QuadraticPfisterSymbol::new(k, vec![], b)?, 0))
}

/// One class of `vK / 2vK` met by the expansion, labelled by a subset `I` of the
/// independent slots.
#[derive(Clone, Debug)]
pub struct ResidueClassEntry {
    /// 1-based slot indices.
    pub subset: Vec<usize>,
    pub class: Vec<bool>,
    /// `prod_(i in I) a_i`.
    pub pi: Element,
    /// Residue of the unit `(-1)^|I| a_I / rep`, with `rep` the fixed coset representative:
    /// the Springer part at `class` is this multiple of the expansion of `first_residue`.
    pub multiplier: Element,
}

#[derive(Clone, Debug)]
pub struct PfisterResidueReport {
    /// The normalized presentation of the input.
    pub presentation: QuadraticPfisterSymbol,
    /// Number of slots of independent value.
    pub m: usize,
    /// `<<a_(m+1)-bar, ..., a_(d-1)-bar; b-bar]]` over the residue tower.
    pub first_residue: QuadraticPfisterSymbol,
    /// The classes with nonzero residue; every other class has residue zero.
    pub classes: Vec<ResidueClassEntry>,
}

impl PfisterResidueReport {
    pub fn to_json(&self) -> Value {
        let k = self.presentation.tower();
        let r = self.first_residue.tower();
        json!({
            "presentation": self.presentation.display(),
            "m": self.m,
            "first_residue": self.first_residue.display(),
            "first_residue_form": self.first_residue.expand().display(),
            "residue_field": r.to_string(),
            "classes": self.classes.iter().map(|c| json!({
                "subset": c.subset,
                "class": c.class.iter().map(|&b| b as u8).collect::<Vec<_>>(),
                "pi": k.display(&c.pi),
                "multiplier": r.display(&c.multiplier),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Residue forms of an anisotropic Pfister form: every nonzero residue is similar to the
/// first residue symbol.
pub fn pfister_residues(s: &QuadraticPfisterSymbol, ctx: &ValuationCtx) -> Result<PfisterResidueReport> {
    if s.tower() != ctx.tower() {
        return Err(Error::TowerMismatch);
    }
    if is_isotropic(&s.expand())? {
        return Err(Error::IsotropicInput);
    }
    let (good, m) = match normalized_shape(s, ctx)? {
        Some(m) => (s.clone(), m),
        None => good_slot(s, ctx)?,
    };
    let k = s.tower();
    let res = ctx.residue_tower();
    let units: Vec<Element> = good.slots[m..]
        .iter()
        .map(|a| ctx.residue(a))
        .collect::<Result<_>>()?;
    let first_residue = QuadraticPfisterSymbol::new(&res, units, ctx.residue(&good.last)?)?;
    let mut classes = Vec::new();
    for mask in 0usize..1 << m {
        let subset: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let pi = k.product(subset.iter().map(|&i| &good.slots[i]));
        let signed = if subset.len() % 2 == 1 { k.neg(&pi) } else { pi.clone() };
        let (v, multiplier) = ctx.leading(&signed)?;
        classes.push(ResidueClassEntry {
            subset: subset.iter().map(|i| i + 1).collect(),
            class: v.parity(),
            pi,
            multiplier,
        });
    }
    Ok(PfisterResidueReport {
        presentation: good,
        m,
        first_residue,
        classes,
    })
}
