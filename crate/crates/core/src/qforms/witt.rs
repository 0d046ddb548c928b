//! Isotropy, Witt decomposition and isometry.

use crate::error::{Error, Result};
use crate::fields::{self, Element, FieldTower, LevelKind};
use crate::localglobal;
use crate::valuation;

use super::{diagonalize, GramForm, QuadraticForm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittDecomposition {
    pub anisotropic_kernel: QuadraticForm,
    pub witt_index: usize,
}

/// Resource limits for explicit isotropic-vector searches over `GF(q)(X)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittOptions {
    /// Successive degree caps for the randomly chosen coordinates.
    pub degree_caps: Vec<usize>,
    /// Random attempts per cap.
    pub attempts_per_cap: usize,
    pub seed: u64,
}

impl Default for WittOptions {
    fn default() -> Self {
        WittOptions {
            degree_caps: vec![2, 4, 8, 12],
            attempts_per_cap: 48,
            seed: 0x1dea,
        }
    }
}

impl WittOptions {
    /// Default options with the largest degree cap replaced by `cap`.
    pub fn with_max_degree(cap: usize) -> Self {
        let mut caps: Vec<usize> = [2, 4, 8, 12].into_iter().filter(|&c| c < cap).collect();
        caps.push(cap);
        WittOptions {
            degree_caps: caps,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Shape {
    Finite,
    Laurent,
    Global,
    SemiGlobal,
}

pub(crate) fn shape(k: &FieldTower) -> Shape {
    match k.outermost() {
        None => Shape::Finite,
        Some(l) if l.kind == LevelKind::LaurentSeries => Shape::Laurent,
        Some(_) if k.depth() == 1 => Shape::Global,
        Some(_) => Shape::SemiGlobal,
    }
}

/// Whether `q` has a nontrivial zero.
pub fn is_isotropic(q: &QuadraticForm) -> Result<bool> {
    let k = q.tower();
    let n = q.dim();
    if n == 0 {
        return Ok(false);
    }
    match shape(k) {
        Shape::Finite => Ok(match n {
            1 => false,
            2 => minus_product_is_square(q)?,
            _ => true,
        }),
        Shape::Laurent => {
            if n == 1 {
                return Ok(false);
            }
            let ctx = valuation::ValuationCtx::outermost(k)?;
            for (_, part) in valuation::raw_parts(q, &ctx)? {
                if is_isotropic(&part)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Shape::Global => localglobal::is_isotropic_global(q),
        Shape::SemiGlobal => match n {
            1 => Ok(false),
            2 => minus_product_is_square(q),
            _ => Err(Error::UnsupportedTower(format!(
                "isotropy of forms of dimension {n} over the semi-global field {k}"
            ))),
        },
    }
}

fn minus_product_is_square(q: &QuadraticForm) -> Result<bool> {
    let k = q.tower();
    let d = q.diag();
    fields::is_square(k, &k.neg(&k.mul(&d[0], &d[1])))
}

pub fn witt_decompose(q: &QuadraticForm) -> Result<WittDecomposition> {
    witt_decompose_with(q, &WittOptions::default())
}

pub fn witt_decompose_with(q: &QuadraticForm, opts: &WittOptions) -> Result<WittDecomposition> {
    witt_decompose_until(q, usize::MAX, opts)
}

/// Splits off hyperbolic planes until `target` of them have been found or the rest is
/// anisotropic. With `target = usize::MAX` this is the full Witt decomposition; for a
/// smaller target the returned kernel need not be anisotropic.
pub fn witt_decompose_until(
    q: &QuadraticForm,
    target: usize,
    opts: &WittOptions,
) -> Result<WittDecomposition> {
    let k = q.tower();
    match shape(k) {
        Shape::Laurent => laurent_decompose(q, opts),
        Shape::Finite => split_loop(q, target, opts),
        // the index is known from the completions; only the planes are explicit
        Shape::Global => split_loop(q, target.min(crate::localglobal::witt_index_global(q)?), opts),
        Shape::SemiGlobal => {
            if q.dim() == 2 && target > 0 && is_isotropic(q)? {
                // -ab is a square in the henselian sense; the root need not be a rational
                // function, so no explicit vector is produced
                Ok(WittDecomposition {
                    anisotropic_kernel: QuadraticForm::empty(k),
                    witt_index: 1,
                })
            } else if q.dim() <= 2 {
                Ok(WittDecomposition {
                    anisotropic_kernel: q.clone(),
                    witt_index: 0,
                })
            } else {
                Err(Error::UnsupportedTower(format!(
                    "Witt decomposition of forms of dimension {} over the semi-global field {k}",
                    q.dim()
                )))
            }
        }
    }
}

/// `q ~ (+) t^e lift(part_e)` over a henselian level; decomposing each residue part
/// and lifting the kernels gives the decomposition of `q`.
fn laurent_decompose(q: &QuadraticForm, opts: &WittOptions) -> Result<WittDecomposition> {
    let k = q.tower();
    let depth = k.depth();
    let ctx = valuation::ValuationCtx::outermost(k)?;
    let t = k.variable_at(depth);
    let mut kernel = Vec::new();
    let mut index = 0;
    for (class, part) in valuation::raw_parts(q, &ctx)? {
        let w = witt_decompose_with(&part, opts)?;
        index += w.witt_index;
        for e in w.anisotropic_kernel.diag() {
            let lifted = k.embed_to(e, depth - 1, depth);
            kernel.push(if class[0] { k.mul(&lifted, &t) } else { lifted });
        }
    }
    Ok(WittDecomposition {
        anisotropic_kernel: QuadraticForm::new(k, kernel)?,
        witt_index: index,
    })
}

fn split_loop(q: &QuadraticForm, target: usize, opts: &WittOptions) -> Result<WittDecomposition> {
    let k = q.tower();
    let mut cur = reduce(q)?;
    let mut index = 0;
    let mut attempt = 0u64;
    while index < target && cur.dim() >= 2 {
        let v = match find_isotropic_vector(&cur, opts, attempt)? {
            Some(v) => v,
            None => break,
        };
        attempt += 1;
        cur = reduce(&split_hyperbolic(&cur, &v)?)?;
        index += 1;
    }
    Ok(WittDecomposition {
        anisotropic_kernel: QuadraticForm::new(k, cur.into_diag())?,
        witt_index: index,
    })
}

/// Replaces every entry by a canonical representative of its square class when one is
/// available.
fn reduce(q: &QuadraticForm) -> Result<QuadraticForm> {
    let k = q.tower();
    match shape(k) {
        Shape::Finite => {
            let f = k.base();
            let ns = f.nonsquare();
            let diag = q
                .diag()
                .iter()
                .map(|d| Element::Scalar(if f.is_square(d.as_scalar().unwrap()) { 1 } else { ns }))
                .collect();
            QuadraticForm::new(k, diag)
        }
        Shape::Global => {
            QuadraticForm::new(k, q.diag().iter().map(|d| localglobal::square_class_rep(k, d)).collect())
        }
        _ => Ok(q.clone()),
    }
}

/// An explicit nonzero zero of `q`, or `None` when `q` is anisotropic.
pub(crate) fn find_isotropic_vector(
    q: &QuadraticForm,
    opts: &WittOptions,
    salt: u64,
) -> Result<Option<Vec<Element>>> {
    let k = q.tower();
    let n = q.dim();
    if n < 2 {
        return Ok(None);
    }
    if let Some(v) = binary_zero(q)? {
        return Ok(Some(v));
    }
    match shape(k) {
        Shape::Finite => {
            if n == 2 {
                return Ok(None);
            }
            Ok(Some(finite_ternary_zero(q)))
        }
        Shape::Global => localglobal::find_isotropic_vector(q, opts, salt),
        // binary_zero already decided the binary case
        Shape::SemiGlobal => Ok(None),
        Shape::Laurent => unreachable!("Laurent levels decompose through residues"),
    }
}

/// A zero supported on two coordinates, if some pair `d_i, d_j` has `-d_i d_j` square.
fn binary_zero(q: &QuadraticForm) -> Result<Option<Vec<Element>>> {
    let k = q.tower();
    let d = q.diag();
    let n = d.len();
    for i in 0..n {
        for j in i + 1..n {
            let ratio = k.neg(&k.div(&d[j], &d[i])?);
            if !fields::is_square(k, &ratio)? {
                continue;
            }
            if let Some(s) = fields::exact_sqrt(k, &ratio) {
                // d_i s^2 + d_j = 0
                let mut v = vec![k.zero(); n];
                v[i] = s;
                v[j] = k.one();
                return Ok(Some(v));
            }
        }
    }
    Ok(None)
}

/// Over a finite field `a x^2 + b y^2 = -c` always has a solution.
fn finite_ternary_zero(q: &QuadraticForm) -> Vec<Element> {
    let k = q.tower();
    let f = k.base();
    let d: Vec<u32> = q.diag().iter().map(|e| e.as_scalar().unwrap()).collect();
    let b_inv = f.inv(d[1]).unwrap();
    for x in 0..f.order() {
        let rhs = f.mul(f.neg(f.add(d[2], f.mul(d[0], f.mul(x, x)))), b_inv);
        if let Some(y) = f.sqrt(rhs) {
            let mut v = vec![k.zero(); d.len()];
            v[0] = Element::Scalar(x);
            v[1] = Element::Scalar(y);
            v[2] = k.one();
            return v;
        }
    }
    unreachable!("binary forms over a finite field are universal")
}

/// Orthogonal complement of the hyperbolic plane through the isotropic vector `v`,
/// re-diagonalized.
pub(crate) fn split_hyperbolic(q: &QuadraticForm, v: &[Element]) -> Result<QuadraticForm> {
    let k = q.tower();
    let n = q.dim();
    debug_assert!(q.evaluate(v).is_zero());
    let support: Vec<usize> = (0..n).filter(|&i| !v[i].is_zero()).collect();
    if support.len() < 2 {
        return Err(Error::WitnessInvalid("isotropic vector has fewer than two nonzero coordinates".into()));
    }
    let rest: Vec<usize> = (0..n).filter(|i| !support.contains(i)).collect();
    if support.len() == 2 {
        // span(e_i, e_j) is the hyperbolic plane itself
        let diag = rest.iter().map(|&i| q.diag()[i].clone()).collect();
        return QuadraticForm::new(k, diag);
    }
    let (i, kk) = (support[0], support[1]);
    let d = q.diag();
    let bil = |x: &[Element], y: &[Element]| -> Element {
        d.iter()
            .zip(x.iter().zip(y))
            .fold(k.zero(), |acc, (di, (a, b))| {
                if a.is_zero() || b.is_zero() {
                    acc
                } else {
                    k.add(&acc, &k.mul(di, &k.mul(a, b)))
                }
            })
    };
    let unit = |j: usize| -> Vec<Element> {
        (0..n).map(|r| if r == j { k.one() } else { k.zero() }).collect()
    };
    let w = unit(i);
    let beta = bil(v, &w);
    let gamma = d[i].clone();
    let beta_inv = k.inv(&beta)?;
    let mut comps = Vec::with_capacity(n - 2);
    for j in (0..n).filter(|&j| j != i && j != kk) {
        let x = unit(j);
        let delta = k.mul(&bil(&x, v), &beta_inv);
        let alpha = k.mul(&k.sub(&bil(&x, &w), &k.mul(&delta, &gamma)), &beta_inv);
        let proj: Vec<Element> = (0..n)
            .map(|r| k.sub(&k.sub(&x[r], &k.mul(&alpha, &v[r])), &k.mul(&delta, &w[r])))
            .collect();
        comps.push(proj);
    }
    let gram: Vec<Vec<Element>> = comps
        .iter()
        .map(|a| comps.iter().map(|b| bil(a, b)).collect())
        .collect();
    Ok(diagonalize(&GramForm::new(k, gram)?)?.form)
}

/// Witt index of `q`. Over `GF(q)(X)` it is read off the completions, without
/// splitting hyperbolic planes explicitly.
pub fn witt_index(q: &QuadraticForm, opts: &WittOptions) -> Result<usize> {
    match shape(q.tower()) {
        Shape::Global => crate::localglobal::witt_index_global(q),
        _ => Ok(witt_decompose_with(q, opts)?.witt_index),
    }
}

/// `q1 ~ q2` iff they have the same dimension and `q1 _|_ -q2` is hyperbolic.
pub fn isometric(q1: &QuadraticForm, q2: &QuadraticForm) -> Result<bool> {
    isometric_with(q1, q2, &WittOptions::default())
}

pub fn isometric_with(q1: &QuadraticForm, q2: &QuadraticForm, opts: &WittOptions) -> Result<bool> {
    if q1.tower() != q2.tower() {
        return Err(Error::TowerMismatch);
    }
    if q1.dim() != q2.dim() {
        return Ok(false);
    }
    if q1.dim() == 0 {
        return Ok(true);
    }
    let k = q1.tower();
    // the determinant class is an isometry invariant: a cheap negative answer where
    // products stay small (nested Laurent entries grow quickly when multiplied)
    let cheap = matches!(shape(k), Shape::Finite | Shape::Global);
    if cheap && !fields::is_square(k, &k.mul(&q1.determinant(), &q2.determinant()))? {
        return Ok(false);
    }
    let diff = q1.orth_sum(&q2.negate())?;
    Ok(witt_index(&diff, opts)? == q1.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::LevelDescriptor;

    fn gf(q: u64) -> FieldTower {
        FieldTower::finite(q).unwrap()
    }

    fn laurent(q: u64) -> FieldTower {
        gf(q).with_level(LevelDescriptor::laurent("t")).unwrap()
    }

    #[test]
    fn finite_isotropy_examples() {
        assert!(!is_isotropic(&QuadraticForm::from_ints(&gf(3), &[1, 1]).unwrap()).unwrap());
        assert!(is_isotropic(&QuadraticForm::from_ints(&gf(5), &[1, 1]).unwrap()).unwrap());
        assert!(is_isotropic(&QuadraticForm::from_ints(&gf(3), &[1, 1, 1]).unwrap()).unwrap());
    }

    #[test]
    fn laurent_isotropy_example() {
        let k = laurent(3);
        let t = k.symbol("t").unwrap();
        let q = QuadraticForm::new(
            &k,
            vec![k.one(), k.from_int(-2), t.clone(), k.mul(&k.from_int(-2), &t)],
        )
        .unwrap();
        assert!(!is_isotropic(&q).unwrap());
    }

    #[test]
    fn witt_examples() {
        let k = gf(3);
        let w = witt_decompose(&QuadraticForm::from_ints(&k, &[1, -1]).unwrap()).unwrap();
        assert_eq!((w.witt_index, w.anisotropic_kernel.dim()), (1, 0));
        let w = witt_decompose(&QuadraticForm::from_ints(&k, &[1, 1, 1, 1]).unwrap()).unwrap();
        assert_eq!((w.witt_index, w.anisotropic_kernel.dim()), (2, 0));
        let q = QuadraticForm::from_ints(&gf(7), &[1, 3, 5]).unwrap();
        let w = witt_decompose(&q.orth_sum(&q.negate()).unwrap()).unwrap();
        assert_eq!(w.witt_index, 3);
    }

    #[test]
    fn isometry_examples() {
        let k5 = gf(5);
        assert!(isometric(
            &QuadraticForm::from_ints(&k5, &[1, 1]).unwrap(),
            &QuadraticForm::from_ints(&k5, &[2, 2]).unwrap()
        )
        .unwrap());
        let k3 = gf(3);
        assert!(!isometric(
            &QuadraticForm::from_ints(&k3, &[1]).unwrap(),
            &QuadraticForm::from_ints(&k3, &[2]).unwrap()
        )
        .unwrap());
        let k = laurent(5);
        let t = k.symbol("t").unwrap();
        let mt = k.neg(&t);
        let m2t = k.mul(&k.from_int(-2), &t);
        let q1 = QuadraticForm::new(&k, vec![k.one(), k.one(), mt.clone(), mt]).unwrap();
        let q2 = QuadraticForm::new(&k, vec![k.one(), k.one(), m2t.clone(), m2t]).unwrap();
        assert!(isometric(&q1, &q2).unwrap());
        assert_eq!(isometric(&q1, &QuadraticForm::from_ints(&k5, &[1]).unwrap()), Err(Error::TowerMismatch));
    }

    #[test]
    fn laurent_kernel_is_anisotropic() {
        let k = laurent(3);
        let t = k.symbol("t").unwrap();
        let q = QuadraticForm::new(&k, vec![k.one(), k.one(), t.clone(), k.mul(&t, &k.from_int(2)), k.one()]).unwrap();
        let w = witt_decompose(&q).unwrap();
        assert_eq!(2 * w.witt_index + w.anisotropic_kernel.dim(), 5);
        assert!(!is_isotropic(&w.anisotropic_kernel).unwrap());
    }
}
