//! Acceptance suite: nine seeded checks, one PASS/FAIL line each.
//!
//! Run with `cargo test --release --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quadlink::fields::{self, factor, Element, FieldTower, LevelDescriptor, SampleBudget};
use quadlink::linkage::{self, CertificateBudget, LinkageCertificate};
use quadlink::localglobal::{hilbert_symbol, hilbert_symbol_at, places_of_interest, Place, SymbolPlace};
use quadlink::pfister::{normalize_last_slot, BilinearPfisterSymbol, QuadraticPfisterSymbol};
use quadlink::qforms::{diagonalize, is_isotropic, isometric, GramForm, QuadraticForm, WittOptions};
use quadlink::valuation::{springer_decompose, ValuationCtx};

const SEED: u64 = 20_240_601;

struct Verdict {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Verdict {
    Verdict { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Verdict {
    Verdict { ok: false, detail: detail.into() }
}

fn field(s: &str) -> FieldTower {
    quadlink::dsl::parse_field(s).unwrap()
}

fn gf(q: u64) -> FieldTower {
    FieldTower::finite(q).unwrap()
}

fn laurent(q: u64) -> FieldTower {
    gf(q).with_level(LevelDescriptor::laurent("t")).unwrap()
}

/// Every vector of `GF(p)^n` except zero.
fn nonzero_vectors(p: u32, n: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = (p as usize).pow(n as u32);
    (1..total).map(move |mut i| {
        (0..n)
            .map(|_| {
                let d = (i % p as usize) as u32;
                i /= p as usize;
                d
            })
            .collect()
    })
}

// 1. Finite-field ground truth.
fn exhaustive_finite() -> Verdict {
    let mut checked = 0;
    for p in [3u32, 5] {
        let k = gf(p as u64);
        // symmetric Gram matrices, which include all diagonal forms
        for n in 1..=3usize {
            let slots = n * (n + 1) / 2;
            let mut entries = vec![0u32; slots];
            'matrices: loop {
                let mut g = vec![vec![0u32; n]; n];
                let mut s = 0;
                for i in 0..n {
                    for j in i..n {
                        g[i][j] = entries[s];
                        g[j][i] = entries[s];
                        s += 1;
                    }
                }
                let value = |x: &[u32]| -> u32 {
                    let mut acc = 0u64;
                    for i in 0..n {
                        for j in 0..n {
                            acc += (g[i][j] as u64) * (x[i] as u64) * (x[j] as u64);
                        }
                    }
                    (acc % p as u64) as u32
                };
                let gram: Vec<Vec<Element>> = g
                    .iter()
                    .map(|row| row.iter().map(|&c| k.from_int(c as i64)).collect())
                    .collect();
                if let Ok(d) = diagonalize(&GramForm::new(&k, gram).unwrap()) {
                    let d = d.form;
                    let brute = nonzero_vectors(p, n).any(|x| value(&x) == 0);
                    if is_isotropic(&d).unwrap() != brute {
                        return fail(format!("GF({p}) Gram matrix {g:?}: brute force says {brute}"));
                    }
                    checked += 1;
                }
                // next matrix
                for e in entries.iter_mut() {
                    *e += 1;
                    if *e < p {
                        continue 'matrices;
                    }
                    *e = 0;
                }
                break;
            }
        }
    }
    pass(format!("{checked} nonsingular forms, 0 mismatches"))
}

fn sample(k: &FieldTower, budget: &SampleBudget, rng: &mut ChaCha8Rng) -> Element {
    fields::sample_with(k, budget, rng)
}

const ENTRY: SampleBudget = SampleBudget {
    valuation: 3,
    degree: 2,
    denominators: true,
};

// 2. Residue recursion against tame symbols.
fn springer_vs_symbols() -> Verdict {
    let mut counts = [0usize; 2];
    for q in [3u64, 5, 7] {
        let k = laurent(q);
        let ctx = ValuationCtx::outermost(&k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ q);
        for _ in 0..1000 {
            let n = rng.random_range(3..=4);
            let d: Vec<Element> = (0..n).map(|_| sample(&k, &ENTRY, &mut rng)).collect();
            let form = QuadraticForm::new(&k, d.clone()).unwrap();
            let recursion = is_isotropic(&form).unwrap();
            // <a, b, c (, e)> ~ a <1, ab, ac (, ae)>; the ternary part is isotropic iff
            // (-ab, -ac) = 1, and a quaternary form is anisotropic iff in addition its
            // discriminant is a square
            let neg = |x: &Element| k.neg(x);
            let ab = k.mul(&d[0], &d[1]);
            let ac = k.mul(&d[0], &d[2]);
            let symbol = hilbert_symbol(&neg(&ab), &neg(&ac), SymbolPlace::Valuation(&ctx)).unwrap();
            let expected = if n == 3 {
                symbol == 1
            } else {
                let disc = k.product(d.iter());
                !fields::is_square(&k, &disc).unwrap() || symbol == 1
            };
            if recursion != expected {
                return fail(format!("GF({q})((t)) {}: recursion {recursion}, symbols {expected}", form.display()));
            }
            counts[recursion as usize] += 1;
        }
    }
    pass(format!("3000 forms ({} isotropic, {} anisotropic), 0 mismatches", counts[1], counts[0]))
}

fn unit(k: &FieldTower, rng: &mut ChaCha8Rng) -> Element {
    let budget = SampleBudget {
        valuation: 0,
        degree: 2,
        denominators: true,
    };
    sample(k, &budget, rng)
}

// 3. Values of anisotropic binary forms.
fn value_formula() -> Verdict {
    let mut n = 0;
    for q in [3u64, 5, 7] {
        let k = laurent(q);
        let f = k.base().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ (q << 8));
        for _ in 0..1000 {
            let (u1, u2) = loop {
                let (u1, u2) = (unit(&k, &mut rng), unit(&k, &mut rng));
                let r = |u: &Element| fields::residue(&k, u).unwrap().as_scalar().unwrap();
                if !f.is_square(f.neg(f.mul(r(&u1), r(&u2)))) {
                    break (u1, u2);
                }
            };
            let form = QuadraticForm::new(&k, vec![u1, u2]).unwrap();
            let mut x: Vec<Element> = (0..2).map(|_| sample(&k, &ENTRY, &mut rng)).collect();
            if rng.random_range(0..4) == 0 {
                let i = rng.random_range(0..2);
                x[i] = k.zero();
            }
            if x.iter().all(|c| c.is_zero()) {
                x[0] = k.one();
            }
            let min = x
                .iter()
                .filter(|c| !c.is_zero())
                .map(|c| fields::valuation(&k, c).unwrap().0[0])
                .min()
                .unwrap();
            let v = fields::valuation(&k, &form.evaluate(&x)).unwrap().0[0];
            if v != 2 * min {
                return fail(format!("GF({q})((t)) {}: v(q(x)) = {v}, 2 min v(x_i) = {}", form.display(), 2 * min));
            }
            n += 1;
        }
    }
    pass(format!("{n} (form, vector) pairs, 0 failures"))
}

fn anisotropic_form(k: &FieldTower, n: usize, rng: &mut ChaCha8Rng) -> QuadraticForm {
    let budget = SampleBudget {
        valuation: 2,
        degree: 1,
        denominators: false,
    };
    loop {
        let d = (0..n).map(|_| sample(k, &budget, rng)).collect();
        let q = QuadraticForm::new(k, d).unwrap();
        if !is_isotropic(&q).unwrap() {
            return q;
        }
    }
}

/// `M^T diag(q) M` for a random invertible `M`, diagonalized again.
fn disguise(q: &QuadraticForm, rng: &mut ChaCha8Rng) -> QuadraticForm {
    let k = q.tower();
    let n = q.dim();
    let budget = SampleBudget {
        valuation: 1,
        degree: 1,
        denominators: false,
    };
    loop {
        let m: Vec<Vec<Element>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| if rng.random_range(0..3) == 0 { k.zero() } else { sample(k, &budget, rng) })
                    .collect()
            })
            .collect();
        let gram: Vec<Vec<Element>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut acc = k.zero();
                        for (l, a) in q.diag().iter().enumerate() {
                            acc = k.add(&acc, &k.mul(a, &k.mul(&m[l][i], &m[l][j])));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        if let Ok(d) = diagonalize(&GramForm::new(k, gram).unwrap()) {
            return d.form;
        }
    }
}

/// Finite-field classification: dimension and discriminant class.
fn finite_invariants(part: &QuadraticForm) -> (usize, bool) {
    let f = part.tower().base().clone();
    let disc = part
        .diag()
        .iter()
        .fold(1u32, |acc, e| f.mul(acc, e.as_scalar().unwrap()));
    (part.dim(), f.is_square(disc))
}

// 4. Residue classification.
fn residue_classification() -> Verdict {
    let k = laurent(3);
    let ctx = ValuationCtx::outermost(&k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let mut isometric_pairs = 0;
    for i in 0..500 {
        let n = rng.random_range(1..=4);
        let q1 = anisotropic_form(&k, n, &mut rng);
        let (q2, by_construction) = match i % 3 {
            0 => (disguise(&q1, &mut rng), true),
            1 => {
                // one entry twisted by a unit
                let mut d = q1.diag().to_vec();
                let j = rng.random_range(0..n);
                d[j] = k.mul(&d[j], &unit(&k, &mut rng));
                let q2 = QuadraticForm::new(&k, d).unwrap();
                if is_isotropic(&q2).unwrap() {
                    (anisotropic_form(&k, n, &mut rng), false)
                } else {
                    (q2, false)
                }
            }
            _ => (anisotropic_form(&k, n, &mut rng), false),
        };
        let iso = isometric(&q1, &q2).unwrap();
        if by_construction && !iso {
            return fail(format!("{} and its change of basis {} reported non-isometric", q1.display(), q2.display()));
        }
        let (d1, d2) = (springer_decompose(&q1, &ctx).unwrap(), springer_decompose(&q2, &ctx).unwrap());
        let invariants = |d: &quadlink::valuation::ResidueDecomposition, class: &[bool]| {
            d.part(class).map_or((0, true), finite_invariants)
        };
        let residues_agree = ctx
            .coset_reps()
            .iter()
            .all(|(class, _)| invariants(&d1, class) == invariants(&d2, class));
        if iso != residues_agree {
            return fail(format!("{} vs {}: isometric {iso}, residue parts agree {residues_agree}", q1.display(), q2.display()));
        }
        isometric_pairs += iso as usize;
    }
    pass(format!("500 pairs ({isometric_pairs} isometric), 0 mismatches"))
}

// 5. Slot normalization.
fn slot_normalization() -> Verdict {
    let slot = SampleBudget {
        valuation: 2,
        degree: 1,
        denominators: false,
    };
    let mut done = 0;
    for (name, per_field) in [("GF(3)((t))", 100), ("GF(5)((t))", 50), ("GF(7)((t))", 50), ("GF(3)((t))((u))", 100)] {
        let k = field(name);
        let ctx = ValuationCtx::composed(&k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5 ^ done as u64);
        for _ in 0..per_field {
            let fold = rng.random_range(2..=4);
            let mut slots: Vec<Element> = (1..fold).map(|_| sample(&k, &slot, &mut rng)).collect();
            // last slot: a product of earlier slots, times a unit and a square
            let mut last = unit(&k, &mut rng);
            for a in &slots {
                if rng.random_bool(0.5) {
                    last = k.mul(&last, a);
                }
            }
            let c = sample(&k, &slot, &mut rng);
            last = k.mul(&last, &k.mul(&c, &c));
            slots.push(last);
            let s = BilinearPfisterSymbol::new(&k, slots).unwrap();
            let (out, trace) = match normalize_last_slot(&s, &ctx) {
                Ok(r) => r,
                Err(e) => return fail(format!("{name} {}: {e}", s.display())),
            };
            let out_last = out.slots().last().unwrap();
            if !ctx.value(out_last).unwrap().is_zero() {
                return fail(format!("{name} {} -> {}: last slot is not a unit", s.display(), out.display()));
            }
            if !isometric(&s.expand(), &out.expand()).unwrap() {
                return fail(format!("{name} {} -> {}: expansions differ", s.display(), out.display()));
            }
            if trace.replay(&s).unwrap() != out {
                return fail(format!("{name} {}: trace does not replay", s.display()));
            }
            done += 1;
        }
    }
    pass(format!("{done} symbols of folds 2-4, 0 failures"))
}

// 6. Pfister residues.
fn pfister_residue_theorem() -> Verdict {
    let mut lines = Vec::new();
    for (name, n, m) in [("GF(3)((t))", 1, 1), ("GF(3)((t))((u))", 1, 2)] {
        let r = linkage::verify_residue_transfer(&field(name), n, m, 200, SEED).unwrap();
        if !r.passed() {
            let f = &r.failures[0];
            return fail(format!("{}; first: sample {} {} {}", r.summary(), f.sample, f.check, f.detail));
        }
        lines.push(format!("{name} n={n} m={m}: 200 samples"));
    }
    pass(format!("{}, 0 failures", lines.join("; ")))
}

// 7. Linkage lifting.
fn linkage_lifting() -> Verdict {
    let runs = [
        ("GF(3)", 1),
        ("GF(5)", 1),
        ("GF(3)((t))", 2),
        ("GF(5)((t))", 2),
        ("GF(3)((t))((u))", 3),
        ("GF(5)((t))((u))", 3),
    ];
    for (name, d) in runs {
        let r = linkage::check_top_d_linked(&field(name), d, 200, SEED);
        if !r.passed() {
            let f = &r.failures[0];
            return fail(format!("{}; first: sample {} {} {}", r.summary(), f.sample, f.check, f.detail));
        }
    }
    pass("6 towers x 200 samples, 0 failures")
}

// 8. Function fields of finite fields.
fn higher_local_d1() -> Verdict {
    let mut lines = Vec::new();
    for q in [3u64, 5] {
        let r = linkage::verify_higher_local_d1(q, 500, SEED, &WittOptions::default()).unwrap();
        if !r.passed() {
            let f = &r.failures[0];
            return fail(format!("{}; first: sample {} {} {}", r.summary(), f.sample, f.check, f.detail));
        }
        let stat = |key: &str| r.stats.get(key).copied().unwrap_or(0);
        if stat("witnesses") != 500 || stat("linked_pairs") != 500 {
            return fail(format!("GF({q})(X): {:?}", r.stats));
        }
        lines.push(format!(
            "GF({q})(X): 500 witnesses, {} certificates verified, {} not found",
            stat("certificates_verified"),
            stat("certificates_not_found") + stat("certificates_budget_exceeded")
        ));
    }
    pass(lines.join("; "))
}

/// A multiplier `c` with `(c, 1 + 4 last) = -1` at some place, where `last` is the shared
/// last slot of `cert`: replacing a left slot `a` by `a c` changes the quaternion algebra
/// `[a, last)` and so the isometry class of that side.
fn flipping_multiplier(q: &QuadraticPfisterSymbol, cert: &LinkageCertificate, rng: &mut ChaCha8Rng) -> Option<Element> {
    let k = q.tower();
    let disc = cert.first().unwrap().discriminant();
    if k.outermost().unwrap().kind == fields::LevelKind::LaurentSeries {
        let ctx = ValuationCtx::outermost(k).unwrap();
        let t = k.symbol("t").unwrap();
        for _ in 0..200 {
            let mut c = unit(k, rng);
            if rng.random_bool(0.5) {
                c = k.mul(&c, &t);
            }
            if hilbert_symbol(&c, &disc, SymbolPlace::Valuation(&ctx)).unwrap() == -1 {
                return Some(c);
            }
        }
        return None;
    }
    // GF(q)(X): a prime P away from every slot, with disc a nonsquare mod P
    let mut involved = q.slots().to_vec();
    involved.extend([q.last().clone(), disc.clone(), cert.left.clone(), cert.left_prime.clone(), cert.last.clone()]);
    let bad = places_of_interest(&QuadraticForm::new(k, involved).unwrap()).unwrap();
    let f = k.base().clone();
    for deg in 1..=4usize {
        for _ in 0..400 {
            let mut m: Vec<u32> = (0..deg).map(|_| rng.random_range(0..f.order())).collect();
            m.push(1);
            if !factor::is_irreducible(&f, &m) || bad.contains(&Place::Finite(m.clone())) {
                continue;
            }
            let p = k.polynomial(1, m.iter().map(|&c| Element::Scalar(c)).collect());
            if hilbert_symbol_at(k, &p, &disc, &Place::Finite(m)).unwrap() == -1 {
                return Some(p);
            }
        }
    }
    None
}

// 9. Certificate soundness.
fn certificate_soundness() -> Verdict {
    let mut emitted = 0;
    let mut mutated = 0;
    let mut per_tower = Vec::new();
    let towers = [("GF(3)(X)", 2), ("GF(5)(X)", 2), ("GF(3)((t))", 2), ("GF(5)((t))", 2), ("GF(3)((t))((u))", 3)];
    for (ti, (name, d)) in towers.into_iter().enumerate() {
        let k = field(name);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9 ^ ti as u64);
        // keep sampling until this tower has contributed its share of mutations
        let share = [40, 80, 90, 100, 100][ti];
        for i in 0..400 {
            if i >= 40 && (d != 2 || mutated >= share) {
                break;
            }
            let q1 = linkage::sample_symbol(&k, d, &mut rng);
            let q2 = linkage::sample_symbol(&k, d, &mut rng);
            let budget = CertificateBudget {
                salt: i,
                ..Default::default()
            };
            let cert = match linkage::find_certificate(&q1, &q2, &budget) {
                Ok(Some(c)) => c,
                Ok(None) | Err(quadlink::Error::BudgetExceeded(_)) => continue,
                Err(e) => return fail(format!("{name} {} and {}: {e}", q1.display(), q2.display())),
            };
            emitted += 1;
            if !cert.verify(&q1, &q2).unwrap() {
                return fail(format!("{name}: emitted certificate for {} and {} does not verify", q1.display(), q2.display()));
            }
            if d != 2 || mutated >= 100 || is_isotropic(&q1.expand()).unwrap() || is_isotropic(&q2.expand()).unwrap() {
                continue;
            }
            // mutate one side so that its quaternion algebra changes
            let (target, other) = if i % 2 == 0 { (&q1, &q2) } else { (&q2, &q1) };
            let Some(c) = flipping_multiplier(target, &cert, &mut rng) else {
                continue;
            };
            let mut bad = cert.clone();
            if i % 2 == 0 {
                bad.left = k.mul(&bad.left, &c);
            } else {
                bad.left_prime = k.mul(&bad.left_prime, &c);
            }
            let (a, b) = if i % 2 == 0 { (target, other) } else { (other, target) };
            if bad.verify(a, b).unwrap() {
                return fail(format!("{name}: mutated certificate {} re-verifies", bad.to_json()));
            }
            mutated += 1;
        }
        per_tower.push(format!("{name}: {mutated}"));
    }
    if mutated < 100 {
        return fail(format!("only {mutated} mutations could be built ({})", per_tower.join(", ")));
    }
    pass(format!("{emitted} certificates re-verified, {mutated} mutations rejected"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict, Duration); 9] = [
        ("finite-field exhaustive isotropy", exhaustive_finite, Duration::from_secs(5)),
        ("residue recursion vs tame symbols", springer_vs_symbols, Duration::from_secs(30)),
        ("value formula for anisotropic forms", value_formula, Duration::from_secs(60)),
        ("residue classification", residue_classification, Duration::from_secs(60)),
        ("slot normalization", slot_normalization, Duration::from_secs(60)),
        ("Pfister residues", pfister_residue_theorem, Duration::from_secs(120)),
        ("linkage lifting", linkage_lifting, Duration::from_secs(120)),
        ("GF(q)(X) isotropy and linkage", higher_local_d1, Duration::from_secs(600)),
        ("certificate soundness", certificate_soundness, Duration::from_secs(300)),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        if only.is_some_and(|n| n != i + 1) {
            continue;
        }
        let start = Instant::now();
        let mut v = run();
        let elapsed = start.elapsed();
        if v.ok && elapsed > limit {
            v = fail(format!("{} (took {elapsed:.1?}, limit {limit:?})", v.detail));
        }
        failed += !v.ok as usize;
        println!(
            "[{}] criterion {}: {name}: {} ({elapsed:.1?})",
            if v.ok { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
