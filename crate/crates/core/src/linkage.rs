//! Linkage of quadratic Pfister forms: the Witt-index decider, common-slot certificates
//! and the seeded verification harnesses.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fields::{self, Element, FieldTower, LevelDescriptor, SampleBudget};
use crate::localglobal;
use crate::pfister::{pfister_residues, BilinearPfisterSymbol, QuadraticPfisterSymbol};
use crate::qforms::witt::{shape, Shape};
use crate::qforms::{
    diagonalize, is_isotropic, isometric_with, witt_decompose_until, witt_index, GramForm, QuadraticForm, WittOptions,
};
use crate::valuation::ValuationCtx;

fn check_pair(q1: &QuadraticPfisterSymbol, q2: &QuadraticPfisterSymbol) -> Result<usize> {
    if q1.tower() != q2.tower() {
        return Err(Error::TowerMismatch);
    }
    if q1.fold() != q2.fold() {
        return Err(Error::FoldMismatch(q1.fold(), q2.fold()));
    }
    Ok(q1.fold())
}

/// `q1` and `q2` share a `(d-1)`-fold Pfister subform, i.e. the Witt index of
/// `q1 _|_ -q2` is at least `2^(d-1)`.
pub fn is_linked_pair(q1: &QuadraticPfisterSymbol, q2: &QuadraticPfisterSymbol) -> Result<bool> {
    is_linked_pair_with(q1, q2, &WittOptions::default())
}

pub fn is_linked_pair_with(
    q1: &QuadraticPfisterSymbol,
    q2: &QuadraticPfisterSymbol,
    opts: &WittOptions,
) -> Result<bool> {
    let d = check_pair(q1, q2)?;
    // both expansions start with <1>, so the difference is H _|_ (pure1 _|_ -pure2)
    let target = (1usize << (d - 1)) - 1;
    if target == 0 {
        return Ok(true);
    }
    let rest = q1.pure_part().orth_sum(&q2.pure_part().negate())?;
    if target == 1 {
        return is_isotropic(&rest);
    }
    witt_index_at_least(&rest, target, opts)
}

/// Evidence that `q1 ~ <<a_1, a_2, ..., a_(d-1); b]]` and `q2 ~ <<a_1', a_2, ..., a_(d-1); b]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkageCertificate {
    pub tower: FieldTower,
    /// `a_1`.
    pub left: Element,
    /// `a_1'`.
    pub left_prime: Element,
    /// `a_2, ..., a_(d-1)`.
    pub shared: Vec<Element>,
    /// `b`.
    pub last: Element,
    /// Witt indices of `q_i _|_ -(presentation i)`; both equal `2^d` for a valid certificate.
    pub witt_indices: [usize; 2],
}

impl LinkageCertificate {
    pub fn fold(&self) -> usize {
        self.shared.len() + 2
    }

    fn symbol(&self, left: &Element) -> Result<QuadraticPfisterSymbol> {
        let mut slots = vec![left.clone()];
        slots.extend(self.shared.iter().cloned());
        QuadraticPfisterSymbol::new(&self.tower, slots, self.last.clone())
    }

    /// `<<a_1, a_2, ..., a_(d-1); b]]`.
    pub fn first(&self) -> Result<QuadraticPfisterSymbol> {
        self.symbol(&self.left)
    }

    /// `<<a_1', a_2, ..., a_(d-1); b]]`.
    pub fn second(&self) -> Result<QuadraticPfisterSymbol> {
        self.symbol(&self.left_prime)
    }

    /// Re-checks both isometries from scratch.
    pub fn verify(&self, q1: &QuadraticPfisterSymbol, q2: &QuadraticPfisterSymbol) -> Result<bool> {
        self.verify_with(q1, q2, &WittOptions::default())
    }

    pub fn verify_with(
        &self,
        q1: &QuadraticPfisterSymbol,
        q2: &QuadraticPfisterSymbol,
        opts: &WittOptions,
    ) -> Result<bool> {
        if check_pair(q1, q2)? != self.fold() || q1.tower() != &self.tower {
            return Ok(false);
        }
        let (Ok(p1), Ok(p2)) = (self.first(), self.second()) else {
            return Ok(false);
        };
        if self.left.is_zero() || self.left_prime.is_zero() {
            return Ok(false);
        }
        Ok(isometric_with(&q1.expand(), &p1.expand(), opts)?
            && isometric_with(&q2.expand(), &p2.expand(), opts)?)
    }

    pub fn to_json(&self) -> Value {
        let k = &self.tower;
        json!({
            "left": k.display(&self.left),
            "left_prime": k.display(&self.left_prime),
            "shared": self.shared.iter().map(|a| k.display(a)).collect::<Vec<_>>(),
            "last": k.display(&self.last),
            "first": self.first().map(|s| s.display()).unwrap_or_default(),
            "second": self.second().map(|s| s.display()).unwrap_or_default(),
            "witt_indices": self.witt_indices,
        })
    }
}

/// Limits for [`find_certificate`].
#[derive(Clone, Debug)]
pub struct CertificateBudget {
    /// Subform and isometry tests allowed in the slot search.
    pub max_checks: usize,
    pub witt: WittOptions,
    pub salt: u64,
}

impl Default for CertificateBudget {
    fn default() -> Self {
        CertificateBudget {
            max_checks: 20_000,
            witt: WittOptions::default(),
            salt: 0,
        }
    }
}

/// `i_W(q) >= target`; splits off at most `target` planes where that is explicit.
fn witt_index_at_least(q: &QuadraticForm, target: usize, opts: &WittOptions) -> Result<bool> {
    match shape(q.tower()) {
        Shape::Global => Ok(witt_index(q, opts)? >= target),
        _ => Ok(witt_decompose_until(q, target, opts)?.witt_index >= target),
    }
}

/// A common-slot presentation of a linked pair. `Ok(None)` means none was found in the
/// search space; running out of budget is `Err(BudgetExceeded)`.
pub fn find_certificate(
    q1: &QuadraticPfisterSymbol,
    q2: &QuadraticPfisterSymbol,
    budget: &CertificateBudget,
) -> Result<Option<LinkageCertificate>> {
    let d = check_pair(q1, q2)?;
    if d < 2 {
        return Err(Error::ConfigUnsupported(
            "certificates need fold at least 2; 1-fold symbols have no left slot".into(),
        ));
    }
    let k = q1.tower();
    let raw = if is_isotropic(&q1.expand())? {
        // an isotropic Pfister form is hyperbolic, as is <<1, ...]]
        Some(from_presentation(q2, true))
    } else if is_isotropic(&q2.expand())? {
        Some(from_presentation(q1, false))
    } else {
        match shape(k) {
            Shape::Global if d == 2 => global_certificate(q1, q2, budget)?,
            Shape::Laurent => pool_search(q1, q2, budget)?,
            Shape::SemiGlobal => {
                return Err(Error::UnsupportedTower(format!("certificates over {k}")));
            }
            _ => None,
        }
    };
    let Some((left, left_prime, shared, last)) = raw else {
        return Ok(None);
    };
    let mut cert = LinkageCertificate {
        tower: k.clone(),
        left,
        left_prime,
        shared,
        last,
        witt_indices: [0, 0],
    };
    let full = 1usize << d;
    for (i, (q, p)) in [(q1, cert.first()?), (q2, cert.second()?)].into_iter().enumerate() {
        let diff = q.expand().orth_sum(&p.expand().negate())?;
        cert.witt_indices[i] = witt_index(&diff, &budget.witt)?;
    }
    if cert.witt_indices != [full, full] {
        return Err(Error::WitnessInvalid(format!(
            "certificate for {} and {} does not verify",
            q1.display(),
            q2.display()
        )));
    }
    Ok(Some(cert))
}

type RawCertificate = (Element, Element, Vec<Element>, Element);

/// Certificate built from the presentation of `q`, the other form being hyperbolic.
fn from_presentation(q: &QuadraticPfisterSymbol, q_is_second: bool) -> RawCertificate {
    let k = q.tower();
    let own = q.slots()[0].clone();
    let (left, left_prime) = if q_is_second { (k.one(), own) } else { (own, k.one()) };
    (left, left_prime, q.slots()[1..].to_vec(), q.last().clone())
}

/// First diagonal entry of the orthogonal complement of `w` in `p`.
fn complement_entry(p: &QuadraticForm, w: &[Element]) -> Result<Element> {
    let k = p.tower();
    let d = p.diag();
    let i = w.iter().position(|x| !x.is_zero()).ok_or(Error::ZeroArgument)?;
    // f_j = e_j - (p_j w_j / p_i w_i) e_i spans w^perp
    let piwi = k.mul(&d[i], &w[i]);
    let basis: Vec<Vec<Element>> = (0..d.len())
        .filter(|&j| j != i)
        .map(|j| {
            let mut f = vec![k.zero(); d.len()];
            f[j] = k.one();
            f[i] = k.neg(&k.div(&k.mul(&d[j], &w[j]), &piwi)?);
            Ok(f)
        })
        .collect::<Result<_>>()?;
    let bil = |x: &[Element], y: &[Element]| -> Element {
        let terms: Vec<Element> = (0..d.len()).map(|t| k.mul(&d[t], &k.mul(&x[t], &y[t]))).collect();
        terms.iter().fold(k.zero(), |acc, t| k.add(&acc, t))
    };
    let gram = basis.iter().map(|x| basis.iter().map(|y| bil(x, y)).collect()).collect();
    let form = diagonalize(&GramForm::new(k, gram)?)?.form;
    Ok(form.diag()[0].clone())
}

/// Over `GF(q)(X)`: a common value `e` of the pure parts gives the shared slot
/// `c = -e`, and the complements of `e` give the left slots.
fn global_certificate(
    q1: &QuadraticPfisterSymbol,
    q2: &QuadraticPfisterSymbol,
    budget: &CertificateBudget,
) -> Result<Option<RawCertificate>> {
    let k = q1.tower();
    let (p1, p2) = (q1.pure_part(), q2.pure_part());
    let diff = p1.orth_sum(&p2.negate())?;
    let Some(v) = localglobal::find_isotropic_vector(&diff, &budget.witt, budget.salt)? else {
        return Ok(None);
    };
    let (v1, v2) = v.split_at(p1.dim());
    let e = p1.evaluate(v1);
    if e.is_zero() {
        return Ok(None);
    }
    let c = k.neg(&e);
    let last = k.div(&k.sub(&c, &k.one()), &k.from_int(4))?;
    let left = k.neg(&complement_entry(&p1, v1)?);
    let left_prime = k.neg(&complement_entry(&p2, v2)?);
    Ok(Some((left, left_prime, Vec::new(), last)))
}

/// Square-class representatives `u * prod t_i^(e_i)`, with `u` running over `1`, a
/// nonsquare and (for infinite residue fields) a few sampled residue units.
fn square_class_pool(k: &FieldTower) -> Result<Vec<Element>> {
    let ctx = ValuationCtx::composed(k)?;
    let res = ctx.residue_tower();
    let f = res.base();
    let mut units = vec![res.one(), res.embed(&Element::Scalar(f.nonsquare()), 0)];
    if res.depth() > 0 {
        let budget = SampleBudget {
            valuation: 1,
            degree: 1,
            denominators: false,
        };
        for s in 0..8 {
            let u = fields::sample(&res, &budget, s);
            if !units.contains(&u) {
                units.push(u);
            }
        }
    }
    let depth = res.depth();
    let mut pool = Vec::new();
    for u in &units {
        let u = k.embed(u, depth);
        for (_, rep) in ctx.coset_reps() {
            pool.push(k.mul(&u, &rep));
        }
    }
    Ok(pool)
}

struct SlotSearch<'a> {
    forms: [QuadraticForm; 2],
    pool: Vec<Element>,
    checks: usize,
    budget: &'a CertificateBudget,
    fold: usize,
}

impl SlotSearch<'_> {
    fn tick(&mut self) -> Result<()> {
        self.checks += 1;
        if self.checks > self.budget.max_checks {
            return Err(Error::BudgetExceeded(format!(
                "{} subform tests in the common-slot search",
                self.budget.max_checks
            )));
        }
        Ok(())
    }

    fn contains(&mut self, i: usize, psi: &QuadraticForm) -> Result<bool> {
        self.tick()?;
        let diff = self.forms[i].orth_sum(&psi.negate())?;
        witt_index_at_least(&diff, psi.dim(), &self.budget.witt)
    }

    fn left_slot(&mut self, i: usize, tail: &[Element]) -> Result<Option<Element>> {
        let k = self.forms[0].tower().clone();
        for a in self.pool.clone() {
            let mut slots = vec![a.clone()];
            slots.extend(tail.iter().cloned());
            let psi = BilinearPfisterSymbol::new(&k, slots)?.expand();
            if self.contains(i, &psi)? {
                return Ok(Some(a));
            }
        }
        Ok(None)
    }

    /// Extends the common bilinear tail `a_j, ..., a_(d-1), c`.
    fn extend(&mut self, tail: Vec<Element>) -> Result<Option<(Element, Element, Vec<Element>)>> {
        if tail.len() == self.fold - 1 {
            let Some(a) = self.left_slot(0, &tail)? else {
                return Ok(None);
            };
            let Some(a2) = self.left_slot(1, &tail)? else {
                return Ok(None);
            };
            return Ok(Some((a, a2, tail)));
        }
        let k = self.forms[0].tower().clone();
        for a in self.pool.clone() {
            let mut slots = vec![a];
            slots.extend(tail.iter().cloned());
            let psi = BilinearPfisterSymbol::new(&k, slots.clone())?.expand();
            if self.contains(0, &psi)? && self.contains(1, &psi)? {
                if let Some(found) = self.extend(slots)? {
                    return Ok(Some(found));
                }
            }
        }
        Ok(None)
    }
}

fn pool_search(
    q1: &QuadraticPfisterSymbol,
    q2: &QuadraticPfisterSymbol,
    budget: &CertificateBudget,
) -> Result<Option<RawCertificate>> {
    let k = q1.tower();
    let mut search = SlotSearch {
        forms: [q1.expand(), q2.expand()],
        pool: square_class_pool(k)?,
        checks: 0,
        budget,
        fold: q1.fold(),
    };
    let Some((a, a2, mut tail)) = search.extend(Vec::new())? else {
        return Ok(None);
    };
    let c = tail.pop().expect("tail ends with the discriminant slot");
    let last = k.div(&k.sub(&c, &k.one()), &k.from_int(4))?;
    Ok(Some((a, a2, tail, last)))
}

/// One recorded failure of a verification run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub sample: usize,
    pub check: String,
    pub detail: String,
}

/// Outcome of a seeded verification run; replayable from `(theorem, field, seed, samples)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub theorem: String,
    pub field: String,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub failures: Vec<Failure>,
    /// Counters of what the samples exercised (skipped isotropic inputs, certificates...).
    pub stats: BTreeMap<String, usize>,
    pub elapsed_ms: Option<u64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "{} over {}: {} seeded samples, {} failures",
            self.theorem,
            self.field,
            self.samples,
            self.failures.len()
        )
    }
}

/// Seed of sample `i` of a run with master seed `seed` (splitmix64 finalizer).
pub fn sample_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed ^ i.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Slot distribution: uniform over finite fields, valuations in `[-2, 2]` over Laurent
/// levels, polynomials of degree at most 2 over a rational level.
pub fn slot_budget(k: &FieldTower) -> SampleBudget {
    match shape(k) {
        Shape::Global => SampleBudget {
            valuation: 0,
            degree: 2,
            denominators: false,
        },
        _ => SampleBudget {
            valuation: 2,
            degree: 1,
            denominators: false,
        },
    }
}

/// A random `fold`-fold quadratic symbol.
pub fn sample_symbol(k: &FieldTower, fold: usize, rng: &mut ChaCha8Rng) -> QuadraticPfisterSymbol {
    let budget = slot_budget(k);
    let slots: Vec<Element> = (1..fold).map(|_| fields::sample_with(k, &budget, rng)).collect();
    loop {
        let b = fields::sample_with(k, &budget, rng);
        if let Ok(s) = QuadraticPfisterSymbol::new(k, slots.clone(), b) {
            return s;
        }
    }
}

/// What one sample contributes to a report.
#[derive(Default)]
struct Outcome {
    failures: Vec<Failure>,
    stats: BTreeMap<String, usize>,
}

impl Outcome {
    fn fail(&mut self, sample: usize, check: &str, detail: String) {
        self.failures.push(Failure {
            sample,
            check: check.into(),
            detail,
        });
    }

    fn count(&mut self, key: &str) {
        *self.stats.entry(key.into()).or_default() += 1;
    }
}

fn run_samples<F>(theorem: &str, k: &FieldTower, dnm: [Option<usize>; 3], samples: usize, seed: u64, f: F) -> VerificationReport
where
    F: Fn(usize, &mut ChaCha8Rng, &mut Outcome) + Sync,
{
    let outcomes: Vec<Outcome> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, i as u64));
            let mut out = Outcome::default();
            f(i, &mut rng, &mut out);
            out
        })
        .collect();
    let mut failures = Vec::new();
    let mut stats = BTreeMap::new();
    for o in outcomes {
        failures.extend(o.failures);
        for (key, v) in o.stats {
            *stats.entry(key).or_default() += v;
        }
    }
    VerificationReport {
        theorem: theorem.into(),
        field: k.to_string(),
        d: dnm[0],
        n: dnm[1],
        m: dnm[2],
        samples,
        seed,
        failures,
        stats,
        elapsed_ms: None,
    }
}

/// Samples `(d+1)`-fold symbols (expected isotropic) and pairs of `d`-fold symbols
/// (expected linked).
pub fn check_top_d_linked(k: &FieldTower, d: usize, samples: usize, seed: u64) -> VerificationReport {
    run_samples("top-linked", k, [Some(d), None, None], samples, seed, |i, rng, out| {
        let s = sample_symbol(k, d + 1, rng);
        match is_isotropic(&s.expand()) {
            Ok(true) => out.count("isotropic_higher_fold"),
            Ok(false) => out.fail(i, "higher-fold-isotropic", format!("{} is anisotropic", s.display())),
            Err(e) => out.fail(i, "higher-fold-isotropic", format!("{}: {e}", s.display())),
        }
        let q1 = sample_symbol(k, d, rng);
        let q2 = sample_symbol(k, d, rng);
        match is_linked_pair(&q1, &q2) {
            Ok(true) => out.count("linked_pairs"),
            Ok(false) => out.fail(i, "pair-linked", format!("{} and {} are not linked", q1.display(), q2.display())),
            Err(e) => out.fail(i, "pair-linked", format!("{} and {}: {e}", q1.display(), q2.display())),
        }
    })
}

fn residue_setup(k: &FieldTower, n: usize, m: usize) -> Result<(ValuationCtx, FieldTower)> {
    let ctx = ValuationCtx::new(k, m)?;
    let res = ctx.residue_tower();
    if res.depth() != 0 || n == 0 {
        return Err(Error::ConfigUnsupported(format!(
            "the vanishing of I^{} over the residue field {res} is only certified for finite residue fields and n >= 1",
            n + 1
        )));
    }
    Ok((ctx, res))
}

/// `<<t_1, ..., t_m, lifted slots; lifted b]]` for a symbol over the residue tower.
fn lift_symbol(ctx: &ValuationCtx, rho: &QuadraticPfisterSymbol) -> Result<QuadraticPfisterSymbol> {
    let k = ctx.tower();
    let from = ctx.residue_tower().depth();
    // t_1, ..., t_m: the outer uniformizers, outermost first
    let mut slots: Vec<Element> = (0..ctx.rank())
        .map(|i| {
            let depth = k.depth() - i;
            k.embed(&k.variable_at(depth), depth)
        })
        .collect();
    slots.extend(rho.slots().iter().map(|a| k.embed(a, from)));
    QuadraticPfisterSymbol::new(k, slots, k.embed(rho.last(), from))
}

/// Pfister residues of `(n+m)`-fold symbols: the first residue is an `n'`-fold symbol with
/// `n <= n' <= n + m` and every nonzero residue is similar to it; lifts realize every
/// `n`-fold residue symbol and separate non-isometric ones.
pub fn verify_residue_transfer(
    k: &FieldTower,
    n: usize,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let (ctx, res) = residue_setup(k, n, m)?;
    let opts = WittOptions::default();
    Ok(run_samples("residue-transfer", k, [None, Some(n), Some(m)], samples, seed, |i, rng, out| {
        let sub = |e: Error| e.to_string();
        // (a) residues of a sampled symbol
        let s = sample_symbol(k, n + m, rng);
        match pfister_residues(&s, &ctx) {
            Err(Error::IsotropicInput) => out.count("isotropic_skipped"),
            Err(e) => out.fail(i, "residue-shape", format!("{}: {}", s.display(), sub(e))),
            Ok(r) => {
                out.count("anisotropic_checked");
                let nf = r.first_residue.fold();
                if nf < n || nf > n + m {
                    out.fail(i, "residue-shape", format!("{}: first residue has fold {nf}", s.display()));
                }
                match crate::valuation::springer_decompose(&s.expand(), &ctx) {
                    Ok(dec) => {
                        let first = r.first_residue.expand();
                        if dec.classes.len() != r.classes.len() {
                            out.fail(i, "residue-shape", format!("{}: residue classes differ", s.display()));
                        }
                        for c in &r.classes {
                            let ok = match (dec.part(&c.class), first.scale(&c.multiplier)) {
                                (Some(part), Ok(expected)) => isometric_with(part, &expected, &opts).unwrap_or(false),
                                _ => false,
                            };
                            if !ok {
                                out.fail(i, "residue-similarity", format!("{} at class {:?}", s.display(), c.class));
                            }
                        }
                    }
                    Err(e) => out.fail(i, "residue-shape", sub(e)),
                }
            }
        }
        // (b) surjectivity through explicit lifts
        let rho = sample_symbol(&res, n, rng);
        let rho_iso = is_isotropic(&rho.expand()).unwrap_or(false);
        let lift = match lift_symbol(&ctx, &rho) {
            Ok(l) => l,
            Err(e) => return out.fail(i, "surjectivity", sub(e)),
        };
        match (pfister_residues(&lift, &ctx), rho_iso) {
            (Err(Error::IsotropicInput), true) => out.count("isotropic_lifts"),
            (Ok(r), false) => {
                out.count("lifts_checked");
                if !isometric_with(&r.first_residue.expand(), &rho.expand(), &opts).unwrap_or(false) {
                    out.fail(i, "surjectivity", format!("{} does not lift {}", lift.display(), rho.display()));
                }
            }
            (r, _) => out.fail(
                i,
                "surjectivity",
                format!("{} lifting {}: {:?}", lift.display(), rho.display(), r.map(|r| r.first_residue.display())),
            ),
        }
        // (c) injectivity on the sample
        let rho2 = sample_symbol(&res, n, rng);
        let same_residue = isometric_with(&rho.expand(), &rho2.expand(), &opts).unwrap_or(true);
        if !same_residue {
            out.count("injectivity_pairs");
            let lifted = lift_symbol(&ctx, &rho2).and_then(|l2| isometric_with(&lift.expand(), &l2.expand(), &opts));
            if !matches!(lifted, Ok(false)) {
                out.fail(i, "injectivity", format!("lifts of {} and {} are isometric", rho.display(), rho2.display()));
            }
        }
    }))
}

/// Top-`d`-linkedness of the residue tower agrees with top-`(d+m)`-linkedness of `k`.
pub fn verify_lifting_equivalence(k: &FieldTower, d: usize, m: usize, samples: usize, seed: u64) -> Result<VerificationReport> {
    let res = if m == 0 { k.clone() } else { ValuationCtx::new(k, m)?.residue_tower() };
    let low = check_top_d_linked(&res, d, samples, seed);
    let high = check_top_d_linked(k, d + m, samples, seed);
    let mut failures = Vec::new();
    if low.passed() != high.passed() {
        failures.push(Failure {
            sample: 0,
            check: "equivalence".into(),
            detail: format!("{}; {}", low.summary(), high.summary()),
        });
    }
    let mut stats = BTreeMap::new();
    stats.insert("residue_failures".into(), low.failures.len());
    stats.insert("field_failures".into(), high.failures.len());
    stats.insert("residue_passed".into(), low.passed() as usize);
    stats.insert("field_passed".into(), high.passed() as usize);
    Ok(VerificationReport {
        theorem: "lifting-equivalence".into(),
        field: k.to_string(),
        d: Some(d),
        n: None,
        m: Some(m),
        samples,
        seed,
        failures,
        stats,
        elapsed_ms: None,
    })
}

/// `GF(q)(X)` is top-2-linked on samples: 3-fold symbols are isotropic, with an explicit
/// zero, and pairs of 2-fold symbols are linked, with re-verified certificates.
pub fn verify_higher_local_d1(q: u64, samples: usize, seed: u64, opts: &WittOptions) -> Result<VerificationReport> {
    let k = FieldTower::finite(q)?.with_level(LevelDescriptor::rational("X"))?;
    let k = &k;
    Ok(run_samples("higher-local-d1", k, [Some(2), None, None], samples, seed, |i, rng, out| {
        let s = sample_symbol(k, 3, rng);
        let form = s.expand();
        match localglobal::is_isotropic_global(&form) {
            Ok(true) => match localglobal::find_isotropic_vector(&form, opts, i as u64) {
                Ok(Some(v)) if form.evaluate(&v).is_zero() && v.iter().any(|x| !x.is_zero()) => {
                    out.count("witnesses")
                }
                Ok(_) => out.fail(i, "witness", format!("no valid zero of {}", s.display())),
                Err(e) => out.fail(i, "witness", format!("{}: {e}", s.display())),
            },
            Ok(false) => out.fail(i, "three-fold-isotropic", format!("{} is anisotropic", s.display())),
            Err(e) => out.fail(i, "three-fold-isotropic", format!("{}: {e}", s.display())),
        }
        let q1 = sample_symbol(k, 2, rng);
        let q2 = sample_symbol(k, 2, rng);
        let pair = format!("{} and {}", q1.display(), q2.display());
        match is_linked_pair_with(&q1, &q2, opts) {
            Ok(true) => out.count("linked_pairs"),
            Ok(false) => return out.fail(i, "pair-linked", format!("{pair} are not linked")),
            Err(e) => return out.fail(i, "pair-linked", format!("{pair}: {e}")),
        }
        let budget = CertificateBudget {
            witt: opts.clone(),
            salt: i as u64,
            ..Default::default()
        };
        match find_certificate(&q1, &q2, &budget) {
            Ok(Some(c)) => match c.verify_with(&q1, &q2, opts) {
                Ok(true) => out.count("certificates_verified"),
                Ok(false) => out.fail(i, "certificate", format!("certificate for {pair} does not verify")),
                Err(e) => out.fail(i, "certificate", format!("{pair}: {e}")),
            },
            Ok(None) => out.count("certificates_not_found"),
            Err(Error::BudgetExceeded(_)) => out.count("certificates_budget_exceeded"),
            Err(e) => out.fail(i, "certificate", format!("{pair}: {e}")),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laurent(q: u64) -> FieldTower {
        FieldTower::finite(q).unwrap().with_level(LevelDescriptor::laurent("t")).unwrap()
    }

    fn global(q: u64) -> FieldTower {
        FieldTower::finite(q).unwrap().with_level(LevelDescriptor::rational("X")).unwrap()
    }

    fn sym(k: &FieldTower, slots: Vec<Element>, b: Element) -> QuadraticPfisterSymbol {
        QuadraticPfisterSymbol::new(k, slots, b).unwrap()
    }

    #[test]
    fn linked_examples() {
        let k = laurent(3);
        let t = k.symbol("t").unwrap();
        let q = sym(&k, vec![t.clone()], k.one());
        assert!(is_linked_pair(&q, &q).unwrap());
        let g = global(3);
        let x = g.symbol("X").unwrap();
        let q1 = sym(&g, vec![x.clone()], g.one());
        let q2 = sym(&g, vec![g.add(&x, &g.one())], g.one());
        assert!(is_linked_pair(&q1, &q2).unwrap());
        let f = FieldTower::finite(3).unwrap();
        assert!(is_linked_pair(&sym(&f, vec![], f.one()), &sym(&f, vec![], f.zero())).unwrap());
        assert_eq!(is_linked_pair(&q1, &sym(&g, vec![], g.one())), Err(Error::FoldMismatch(2, 1)));
    }

    #[test]
    fn unlinked_pair_in_three_folds() {
        // over GF(3)((t))((u)) the 3-fold symbols are not all linked with each other
        let k = laurent(3).with_level(LevelDescriptor::laurent("u")).unwrap();
        let t = k.symbol("t").unwrap();
        let u = k.symbol("u").unwrap();
        let q1 = sym(&k, vec![t.clone(), u.clone()], k.one());
        assert!(is_linked_pair(&q1, &q1).unwrap());
        let q2 = sym(&k, vec![k.mul(&t, &u), k.from_int(2)], k.zero());
        // q2 is hyperbolic since its last bilinear slot 1 + 4*0 = 1 is a square
        assert!(is_linked_pair(&q1, &q2).unwrap());
    }

    #[test]
    fn certificates_over_laurent_fields() {
        let k = laurent(3);
        let t = k.symbol("t").unwrap();
        let q = sym(&k, vec![t.clone()], k.one());
        let c = find_certificate(&q, &q, &CertificateBudget::default()).unwrap().unwrap();
        assert!(c.verify(&q, &q).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let q1 = sample_symbol(&k, 2, &mut rng);
            let q2 = sample_symbol(&k, 2, &mut rng);
            if !is_linked_pair(&q1, &q2).unwrap() {
                continue;
            }
            let c = find_certificate(&q1, &q2, &CertificateBudget::default()).unwrap().unwrap();
            assert!(c.verify(&q1, &q2).unwrap());
        }
    }

    #[test]
    fn certificates_over_rational_functions() {
        let g = global(3);
        let x = g.symbol("X").unwrap();
        let q1 = sym(&g, vec![x.clone()], g.one());
        let q2 = sym(&g, vec![g.add(&x, &g.one())], g.one());
        let c = find_certificate(&q1, &q2, &CertificateBudget::default()).unwrap().unwrap();
        assert!(c.verify(&q1, &q2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..6 {
            let q1 = sample_symbol(&g, 2, &mut rng);
            let q2 = sample_symbol(&g, 2, &mut rng);
            let budget = CertificateBudget {
                salt: i,
                ..Default::default()
            };
            let c = find_certificate(&q1, &q2, &budget).unwrap().unwrap();
            assert!(c.verify(&q1, &q2).unwrap(), "{} {}", q1.display(), q2.display());
        }
    }

    #[test]
    fn mutated_certificate_fails() {
        let k = laurent(3);
        let t = k.symbol("t").unwrap();
        let q = sym(&k, vec![t.clone()], k.one());
        let mut c = find_certificate(&q, &q, &CertificateBudget::default()).unwrap().unwrap();
        c.left = k.one();
        assert!(!c.verify(&q, &q).unwrap());
    }

    #[test]
    fn one_fold_certificates_unsupported() {
        let f = FieldTower::finite(3).unwrap();
        let q = sym(&f, vec![], f.one());
        assert!(matches!(find_certificate(&q, &q, &CertificateBudget::default()), Err(Error::ConfigUnsupported(_))));
    }

    #[test]
    fn top_linked_small_runs() {
        assert!(check_top_d_linked(&FieldTower::finite(3).unwrap(), 1, 30, 1).passed());
        assert!(check_top_d_linked(&laurent(3), 2, 20, 1).passed());
        let r = check_top_d_linked(&laurent(3), 1, 30, 1);
        // 2-fold forms over GF(3)((t)) can be anisotropic: GF(3)((t)) is not top-1-linked
        assert!(!r.passed());
    }

    #[test]
    fn residue_transfer_small_run() {
        let r = verify_residue_transfer(&laurent(3), 1, 1, 20, 3).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert!(matches!(
            verify_residue_transfer(&laurent(3).with_level(LevelDescriptor::laurent("u")).unwrap(), 1, 1, 5, 0),
            Err(Error::ConfigUnsupported(_))
        ));
    }

    #[test]
    fn lifting_equivalence_small_run() {
        assert!(verify_lifting_equivalence(&laurent(5), 1, 1, 20, 2).unwrap().passed());
        assert!(verify_lifting_equivalence(&FieldTower::finite(7).unwrap(), 1, 0, 20, 2).unwrap().passed());
    }

    #[test]
    fn higher_local_small_run() {
        let r = verify_higher_local_d1(3, 8, 4, &WittOptions::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn reports_are_deterministic() {
        let mut a = check_top_d_linked(&laurent(5), 2, 16, 11);
        let mut b = check_top_d_linked(&laurent(5), 2, 16, 11);
        a.elapsed_ms = None;
        b.elapsed_ms = None;
        assert_eq!(a, b);
    }
}
