//! Explicit zeros of quadratic forms over `GF(q)(X)`.
//!
//! Ternary forms are solved by Legendre descent in `GF(q)[X]`; larger forms are cut
//! down to a ternary one by fixing the remaining coordinates at random.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::factor;
use crate::fields::finite::FiniteField;
use crate::fields::poly;

pub(crate) type P = Vec<u32>;

fn is_const(a: &[u32]) -> bool {
    a.len() <= 1
}

/// `a = core * s^2` with `core` squarefree (keeping the leading coefficient of `a`).
pub(crate) fn squarefree_split(f: &FiniteField, a: &[u32]) -> (P, P) {
    let lc = *a.last().expect("nonzero polynomial");
    let monic = poly::make_monic(f, a);
    let mut core = vec![lc];
    let mut s = vec![1];
    for (g, m) in factor::squarefree_decomposition(f, &monic) {
        if m % 2 == 1 {
            core = poly::mul(f, &core, &g);
        }
        if m >= 2 {
            s = poly::mul(f, &s, &poly::pow(f, &g, (m / 2) as u64));
        }
    }
    (core, s)
}

/// Base-`q` digits (least significant first) of `(q^n + c) / div`; the division is exact.
fn wide_exponent(q: u64, n: usize, c: i64, div: u64) -> Vec<u64> {
    let mut digits = vec![0u64; n + 1];
    digits[n] = 1;
    if c >= 0 {
        digits[0] += c as u64;
    } else {
        // q^n - 1 = (q - 1)(1 + q + ... + q^(n-1))
        debug_assert_eq!(c, -1);
        digits = vec![q - 1; n];
    }
    let mut rem = 0u64;
    for d in digits.iter_mut().rev() {
        let cur = rem * q + *d;
        *d = cur / div;
        rem = cur % div;
    }
    debug_assert_eq!(rem, 0);
    digits
}

fn pow_small<T>(x: &T, mut e: u64, one: T, mul: &impl Fn(&T, &T) -> T) -> T
where
    T: Clone,
{
    let mut acc = one;
    let mut base = x.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    acc
}

/// `x^E` with `E` given by its base-`q` digits.
fn pow_digits<T>(x: &T, digits: &[u64], q: u64, one: T, mul: &impl Fn(&T, &T) -> T) -> T
where
    T: Clone,
{
    let mut acc = one.clone();
    for &d in digits.iter().rev() {
        acc = pow_small(&acc, q, one.clone(), mul);
        if d > 0 {
            acc = mul(&acc, &pow_small(x, d, one.clone(), mul));
        }
    }
    acc
}

/// Quadratic character of a nonzero element of `GF(q)[X]/(m)`, `m` irreducible.
pub(crate) fn is_square_mod(f: &FiniteField, a: &[u32], m: &[u32]) -> bool {
    let a = poly::rem(f, a, m);
    debug_assert!(!a.is_empty());
    euler(f, &a, m) == vec![1]
}

fn euler(f: &FiniteField, a: &[u32], m: &[u32]) -> P {
    let q = f.order() as u64;
    let e = wide_exponent(q, m.len() - 1, -1, 2);
    let mulm = |x: &P, y: &P| poly::rem(f, &poly::mul(f, x, y), m);
    pow_digits(&a.to_vec(), &e, q, vec![1], &mulm)
}

/// Square root modulo an irreducible `m` (Cipolla).
fn sqrt_mod_irreducible(f: &FiniteField, a: &[u32], m: &[u32], rng: &mut ChaCha8Rng) -> Option<P> {
    let a = poly::rem(f, a, m);
    if a.is_empty() {
        return Some(Vec::new());
    }
    if euler(f, &a, m) != vec![1] {
        return None;
    }
    let q = f.order() as u64;
    let deg = m.len() - 1;
    let mulm = |x: &P, y: &P| poly::rem(f, &poly::mul(f, x, y), m);
    if q % 4 == 3 && deg % 2 == 1 {
        // q^deg = 3 mod 4
        return Some(pow_digits(&a, &wide_exponent(q, deg, 1, 4), q, vec![1], &mulm));
    }
    loop {
        let mut t: P = (0..deg).map(|_| rng.random_range(0..f.order())).collect();
        poly::trim(f, &mut t);
        let w = poly::sub(f, &mulm(&t, &t), &a);
        if w.is_empty() || is_square_mod(f, &w, m) {
            continue;
        }
        // (t + s)^((Q+1)/2) in GF(Q)[s]/(s^2 - w)
        let mul2 = |x: &(P, P), y: &(P, P)| -> (P, P) {
            let c0 = poly::add(f, &mulm(&x.0, &y.0), &mulm(&mulm(&x.1, &y.1), &w));
            let c1 = poly::add(f, &mulm(&x.0, &y.1), &mulm(&x.1, &y.0));
            (c0, c1)
        };
        let e = wide_exponent(q, deg, 1, 2);
        let acc = pow_digits(&(t, vec![1]), &e, q, (vec![1], Vec::new()), &mul2);
        debug_assert!(acc.1.is_empty());
        return Some(acc.0);
    }
}

/// Inverse of `a` modulo `m` (coprime).
fn inv_mod(f: &FiniteField, a: &[u32], m: &[u32]) -> P {
    // extended Euclid tracking the coefficient of a
    let (mut r0, mut r1) = (m.to_vec(), poly::rem(f, a, m));
    let (mut s0, mut s1): (P, P) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (qt, r) = poly::divrem(f, &r0, &r1);
        let s = poly::sub(f, &s0, &poly::mul(f, &qt, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    // r0 is a nonzero constant
    let c = f.inv(r0[0]).expect("coprime inputs");
    poly::rem(f, &poly::scale(f, &s0, &c), m)
}

/// `r` with `r^2 = a mod b`, `b` squarefree, `deg r < deg b`.
fn sqrt_mod(f: &FiniteField, a: &[u32], b: &[u32], rng: &mut ChaCha8Rng) -> Option<P> {
    let b = poly::make_monic(f, b);
    let mut r: P = Vec::new();
    for (pf, _) in factor::factor(f, &b) {
        let rp = sqrt_mod_irreducible(f, a, &pf, rng)?;
        let cof = poly::div_exact(f, &b, &pf);
        let e = poly::mul(f, &cof, &inv_mod(f, &cof, &pf));
        r = poly::add(f, &r, &poly::mul(f, &rp, &e));
    }
    Some(poly::rem(f, &r, &b))
}

fn gcd3(f: &FiniteField, x: P, y: P, z: P) -> (P, P, P) {
    let g = poly::gcd(f, &poly::gcd(f, &x, &y), &z);
    if g.len() <= 1 {
        return (x, y, z);
    }
    (
        poly::div_exact(f, &x, &g),
        poly::div_exact(f, &y, &g),
        poly::div_exact(f, &z, &g),
    )
}

/// A nontrivial solution of `w^2 = a y^2 + b z^2` for squarefree nonzero `a`, `b`, or
/// `None` when there is none.
pub(crate) fn descent(f: &FiniteField, a: &[u32], b: &[u32], rng: &mut ChaCha8Rng) -> Option<(P, P, P)> {
    if a.len() > b.len() {
        let (w, y, z) = descent(f, b, a, rng)?;
        return Some((w, z, y));
    }
    if is_const(a) {
        if let Some(s) = f.sqrt(a[0]) {
            return Some((vec![s], vec![1], Vec::new()));
        }
    }
    if is_const(b) {
        // both constant, a not a square
        let q = f.order();
        for y in 0..q {
            for z in 0..q {
                if y == 0 && z == 0 {
                    continue;
                }
                let v = f.add(f.mul(a[0], f.mul(y, y)), f.mul(b[0], f.mul(z, z)));
                if let Some(w) = f.sqrt(v) {
                    let c = |x: u32| poly::constant(f, x);
                    return Some((c(w), c(y), c(z)));
                }
            }
        }
        unreachable!("ternary forms over a finite field are isotropic");
    }
    let r = sqrt_mod(f, a, b, rng)?;
    let num = poly::sub(f, &poly::mul(f, &r, &r), a);
    let (qt, rem) = poly::divrem(f, &num, b);
    debug_assert!(rem.is_empty());
    if qt.is_empty() {
        return Some((r, vec![1], Vec::new()));
    }
    let (b0, d) = squarefree_split(f, &qt);
    let (w, x, y) = descent(f, a, &b0, rng)?;
    let big_x = poly::add(f, &poly::mul(f, &w, &r), &poly::mul(f, a, &x));
    let big_y = poly::add(f, &w, &poly::mul(f, &r, &x));
    let big_z = poly::mul(f, &b0, &poly::mul(f, &y, &d));
    Some(gcd3(f, big_x, big_y, big_z))
}

/// A nontrivial zero of `al x^2 + be y^2 + ga z^2`, or `None` if the form is
/// anisotropic.
pub(crate) fn ternary_zero(
    f: &FiniteField,
    al: &[u32],
    be: &[u32],
    ga: &[u32],
    rng: &mut ChaCha8Rng,
) -> Option<(P, P, P)> {
    // (al x)^2 = -al be y^2 - al ga z^2
    let a1 = poly::neg(f, &poly::mul(f, al, be));
    let b1 = poly::neg(f, &poly::mul(f, al, ga));
    let (a, sa) = squarefree_split(f, &a1);
    let (b, sb) = squarefree_split(f, &b1);
    let (w, y, z) = descent(f, &a, &b, rng)?;
    let x = poly::mul(f, &w, &poly::mul(f, &sa, &sb));
    let y = poly::mul(f, &y, &poly::mul(f, al, &sb));
    let z = poly::mul(f, &z, &poly::mul(f, al, &sa));
    let (x, y, z) = gcd3(f, x, y, z);
    if x.is_empty() && y.is_empty() && z.is_empty() {
        return None;
    }
    Some((x, y, z))
}

fn eval_form(f: &FiniteField, d: &[P], x: &[P]) -> P {
    d.iter().zip(x).fold(Vec::new(), |acc, (di, xi)| {
        poly::add(f, &acc, &poly::mul(f, di, &poly::mul(f, xi, xi)))
    })
}

fn random_poly(f: &FiniteField, max_deg: usize, rng: &mut ChaCha8Rng) -> P {
    let deg = rng.random_range(0..=max_deg);
    let mut p: P = (0..=deg).map(|_| rng.random_range(0..f.order())).collect();
    poly::trim(f, &mut p);
    p
}

/// Outcome of [`polynomial_zero`].
pub(crate) enum Search {
    Found(Vec<P>),
    Anisotropic,
    Exhausted,
}

/// A zero of the diagonal form with polynomial entries `d`, assumed isotropic when
/// `d.len() >= 4`.
pub(crate) fn polynomial_zero(
    f: &FiniteField,
    d: &[P],
    caps: &[usize],
    attempts: usize,
    seed: u64,
    isotropic4: &dyn Fn(&[P]) -> bool,
) -> Search {
    // solve on the squarefree cores, then undo the square factors
    let (cores, squares): (Vec<P>, Vec<P>) = d.iter().map(|a| squarefree_split(f, a)).unzip();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let search = ZeroSearch {
        f,
        caps,
        attempts,
        isotropic4,
    };
    let xs = match search.zero(&cores, &mut rng) {
        Search::Found(xs) => xs,
        other => return other,
    };
    let l = squares.iter().fold(vec![1], |acc, s| poly::mul(f, &acc, s));
    let ys = xs
        .iter()
        .zip(&squares)
        .map(|(x, s)| poly::mul(f, x, &poly::div_exact(f, &l, s)))
        .collect();
    Search::Found(ys)
}

struct ZeroSearch<'a> {
    f: &'a FiniteField,
    caps: &'a [usize],
    attempts: usize,
    isotropic4: &'a dyn Fn(&[P]) -> bool,
}

impl ZeroSearch<'_> {
    fn zero(&self, d: &[P], rng: &mut ChaCha8Rng) -> Search {
        let f = self.f;
        let n = d.len();
        match n {
            0 | 1 => return Search::Anisotropic,
            2 => return binary_zero(f, &d[0], &d[1]),
            3 => {
                return match ternary_zero(f, &d[0], &d[1], &d[2], rng) {
                    Some((x, y, z)) => Search::Found(vec![x, y, z]),
                    None => Search::Anisotropic,
                }
            }
            4 if !(self.isotropic4)(d) => return Search::Anisotropic,
            _ => {}
        }
        // five-dimensional forms are isotropic: work in the five lowest-degree entries
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| d[i].len());
        order.truncate(5);
        let (i, j) = (order[0], order[1]);
        let rest = &order[2..];
        // q = <d_i, d_j> + q'; a value e of <d_i, d_j> with <e> + q' isotropic reduces the dimension
        for &cap in self.caps {
            for _ in 0..self.attempts {
                let (x, y) = (random_poly(f, cap, rng), random_poly(f, cap, rng));
                let e = eval_form(f, &[d[i].clone(), d[j].clone()], &[x.clone(), y.clone()]);
                if e.is_empty() {
                    if x.is_empty() && y.is_empty() {
                        continue;
                    }
                    let mut v = vec![Vec::new(); n];
                    v[i] = x;
                    v[j] = y;
                    return Search::Found(v);
                }
                let (core, s) = squarefree_split(f, &e);
                let mut sub = vec![core];
                sub.extend(rest.iter().map(|&k| d[k].clone()));
                if sub.len() == 4 && !(self.isotropic4)(&sub) {
                    continue;
                }
                let z = match self.zero(&sub, rng) {
                    Search::Found(z) => z,
                    _ => continue,
                };
                // e z0^2 = core (s z0)^2, so the other coordinates scale by s
                let mut v = vec![Vec::new(); n];
                v[i] = poly::mul(f, &x, &z[0]);
                v[j] = poly::mul(f, &y, &z[0]);
                for (&k, zk) in rest.iter().zip(&z[1..]) {
                    v[k] = poly::mul(f, zk, &s);
                }
                debug_assert!(eval_form(f, d, &v).is_empty());
                return Search::Found(v);
            }
        }
        Search::Exhausted
    }
}

/// `a x^2 + b y^2 = 0` needs `-ab` to be a square.
fn binary_zero(f: &FiniteField, a: &[u32], b: &[u32]) -> Search {
    let (core, s) = squarefree_split(f, &poly::neg(f, &poly::mul(f, a, b)));
    if core.len() != 1 {
        return Search::Anisotropic;
    }
    match f.sqrt(core[0]) {
        // a (r s)^2 + b a^2 = a (-ab) + a^2 b = 0
        Some(r) => Search::Found(vec![poly::scale(f, &s, &r), a.to_vec()]),
        None => Search::Anisotropic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: u64) -> std::sync::Arc<FiniteField> {
        FiniteField::of_order(q).unwrap()
    }

    #[test]
    fn wide_exponents() {
        // (3^4 - 1) / 2 = 40 = 1 + 1*3 + 1*9 + 1*27
        assert_eq!(wide_exponent(3, 4, -1, 2), vec![1, 1, 1, 1]);
        // (7^3 + 1) / 4 = 86 = 2 + 5*7 + 1*49
        assert_eq!(wide_exponent(7, 3, 1, 4), vec![2, 5, 1, 0]);
        // (5^2 + 1) / 2 = 13 = 3 + 2*5
        assert_eq!(wide_exponent(5, 2, 1, 2), vec![3, 2, 0]);
    }

    #[test]
    fn euler_criterion_at_high_degree() {
        // residue fields of order 3^83 and 3^84 overflow machine integers
        let f = gf(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for deg in [83usize, 84] {
            let m = loop {
                let mut m = random_poly(&f, deg - 1, &mut rng);
                m.resize(deg, 0);
                m.push(1);
                if factor::is_irreducible(&f, &m) {
                    break m;
                }
            };
            let a = random_poly(&f, deg - 1, &mut rng);
            let sq = poly::rem(&*f, &poly::mul(&*f, &a, &a), &m);
            assert!(is_square_mod(&f, &sq, &m));
            let r = sqrt_mod_irreducible(&f, &sq, &m, &mut rng).unwrap();
            assert_eq!(poly::rem(&*f, &poly::mul(&*f, &r, &r), &m), sq);
            // -1 is a square in GF(3^deg) iff deg is even
            assert_eq!(is_square_mod(&f, &[2], &m), deg % 2 == 0);
        }
    }

    #[test]
    fn sqrt_mod_composite() {
        let f = gf(5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // b = (x^2+2)(x+1)(x+3), a = (x^3+x+4)^2 is a square modulo anything
        let b = poly::mul(&*f, &poly::mul(&*f, &[2, 0, 1], &[1, 1]), &[3, 1]);
        let g = vec![4, 1, 0, 1];
        let a = poly::mul(&*f, &g, &g);
        let r = sqrt_mod(&f, &a, &b, &mut rng).unwrap();
        let diff = poly::sub(&*f, &poly::mul(&*f, &r, &r), &a);
        assert!(poly::rem(&*f, &diff, &b).is_empty());
    }

    #[test]
    fn sqrt_mod_even_degree_needs_extension_elements() {
        // every element of GF(3) is a square modulo an irreducible quadratic
        let f = gf(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = vec![1, 0, 1];
        for a in 1..3u32 {
            let r = sqrt_mod_irreducible(&f, &[a], &m, &mut rng).unwrap();
            assert_eq!(poly::rem(&*f, &poly::mul(&*f, &r, &r), &m), vec![a]);
        }
    }

    #[test]
    fn ternary_solutions_satisfy_the_equation() {
        let f = gf(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cases: Vec<[P; 3]> = vec![
            [vec![1], vec![1], vec![1]],
            [vec![1], vec![0, 1], vec![2, 2]],
            [vec![1, 1], vec![0, 1], vec![2, 0, 1]],
            [vec![2], vec![1, 0, 1], vec![0, 2]],
        ];
        for [a, b, c] in cases {
            if let Some((x, y, z)) = ternary_zero(&f, &a, &b, &c, &mut rng) {
                let v = eval_form(&f, &[a, b, c], &[x.clone(), y.clone(), z.clone()]);
                assert!(v.is_empty());
                assert!(!(x.is_empty() && y.is_empty() && z.is_empty()));
            }
        }
    }

    #[test]
    fn anisotropic_ternary_is_detected() {
        // <1, -2, -X> over GF(3)(X): at (X) the residue <1,-2> is anisotropic
        let f = gf(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(ternary_zero(&f, &[1], &[1], &[0, 2], &mut rng).is_none());
    }
}
