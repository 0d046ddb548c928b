//! Dense univariate polynomials over an abstract coefficient field.
//!
//! Polynomials are `Vec<E>` with the constant term first and no trailing zeros; the
//! zero polynomial is the empty vector.

use super::finite::FiniteField;

/// Field operations needed by the polynomial routines.
pub trait Field {
    type E: Clone + PartialEq + std::fmt::Debug;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    /// Multiplicative inverse; callers never pass zero.
    fn inv(&self, a: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E {
        self.add(a, &self.neg(b))
    }
    fn from_int(&self, n: i64) -> Self::E;
}

impl Field for FiniteField {
    type E = u32;
    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        FiniteField::add(self, *a, *b)
    }
    fn neg(&self, a: &u32) -> u32 {
        FiniteField::neg(self, *a)
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        FiniteField::mul(self, *a, *b)
    }
    fn inv(&self, a: &u32) -> u32 {
        FiniteField::inv(self, *a).expect("inverse of zero")
    }
    fn from_int(&self, n: i64) -> u32 {
        FiniteField::from_int(self, n)
    }
}

pub fn trim<F: Field>(f: &F, p: &mut Vec<F::E>) {
    while p.last().is_some_and(|c| f.is_zero(c)) {
        p.pop();
    }
}

pub fn degree<E>(p: &[E]) -> Option<usize> {
    p.len().checked_sub(1)
}

pub fn constant<F: Field>(f: &F, c: F::E) -> Vec<F::E> {
    if f.is_zero(&c) {
        Vec::new()
    } else {
        vec![c]
    }
}

/// `c * x^n`.
pub fn monomial<F: Field>(f: &F, c: F::E, n: usize) -> Vec<F::E> {
    if f.is_zero(&c) {
        return Vec::new();
    }
    let mut v = vec![f.zero(); n + 1];
    v[n] = c;
    v
}

pub fn add<F: Field>(f: &F, a: &[F::E], b: &[F::E]) -> Vec<F::E> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => f.add(x, y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        });
    }
    trim(f, &mut out);
    out
}

pub fn neg<F: Field>(f: &F, a: &[F::E]) -> Vec<F::E> {
    a.iter().map(|c| f.neg(c)).collect()
}

pub fn sub<F: Field>(f: &F, a: &[F::E], b: &[F::E]) -> Vec<F::E> {
    add(f, a, &neg(f, b))
}

pub fn scale<F: Field>(f: &F, a: &[F::E], c: &F::E) -> Vec<F::E> {
    if f.is_zero(c) {
        return Vec::new();
    }
    let mut out: Vec<F::E> = a.iter().map(|x| f.mul(x, c)).collect();
    trim(f, &mut out);
    out
}

pub fn mul<F: Field>(f: &F, a: &[F::E], b: &[F::E]) -> Vec<F::E> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if f.is_zero(y) {
                continue;
            }
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(f, &mut out);
    out
}

pub fn pow<F: Field>(f: &F, a: &[F::E], mut e: u64) -> Vec<F::E> {
    let mut acc = vec![f.one()];
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(f, &acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(f, &base, &base);
        }
    }
    acc
}

/// Euclidean division; panics on a zero divisor.
pub fn divrem<F: Field>(f: &F, a: &[F::E], b: &[F::E]) -> (Vec<F::E>, Vec<F::E>) {
    assert!(!b.is_empty(), "polynomial division by zero");
    let db = b.len() - 1;
    let inv_lc = f.inv(&b[db]);
    let mut r = a.to_vec();
    trim(f, &mut r);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut quo = vec![f.zero(); r.len() - db];
    while r.len() > db {
        let deg = r.len() - 1;
        let c = f.mul(&r[deg], &inv_lc);
        for (i, bi) in b.iter().enumerate() {
            let idx = deg - db + i;
            r[idx] = f.sub(&r[idx], &f.mul(&c, bi));
        }
        quo[deg - db] = c;
        r.pop();
        trim(f, &mut r);
    }
    trim(f, &mut quo);
    (quo, r)
}

pub fn rem<F: Field>(f: &F, a: &[F::E], b: &[F::E]) -> Vec<F::E> {
    divrem(f, a, b).1
}

/// Exact quotient; the caller guarantees divisibility.
pub fn div_exact<F: Field>(f: &F, a: &[F::E], b: &[F::E]) -> Vec<F::E> {
    let (q, r) = divrem(f, a, b);
    debug_assert!(r.is_empty(), "inexact polynomial division");
    q
}

pub fn lead<F: Field>(f: &F, a: &[F::E]) -> F::E {
    a.last().cloned().unwrap_or_else(|| f.zero())
}

pub fn make_monic<F: Field>(f: &F, a: &[F::E]) -> Vec<F::E> {
    match a.last() {
        None => Vec::new(),
        Some(lc) => {
            let inv = f.inv(lc);
            a.iter().map(|c| f.mul(c, &inv)).collect()
        }
    }
}

pub fn is_monic<F: Field>(f: &F, a: &[F::E]) -> bool {
    a.last().is_some_and(|c| *c == f.one())
}

/// Monic greatest common divisor (zero if both inputs are zero).
pub fn gcd<F: Field>(f: &F, a: &[F::E], b: &[F::E]) -> Vec<F::E> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(f, &mut a);
    trim(f, &mut b);
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    make_monic(f, &a)
}

pub fn derivative<F: Field>(f: &F, a: &[F::E]) -> Vec<F::E> {
    let mut out: Vec<F::E> = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| f.mul(&f.from_int(i as i64), c))
        .collect();
    trim(f, &mut out);
    out
}

pub fn eval<F: Field>(f: &F, a: &[F::E], x: &F::E) -> F::E {
    a.iter()
        .rev()
        .fold(f.zero(), |acc, c| f.add(&f.mul(&acc, x), c))
}

/// Order of vanishing at `x = 0` (index of the lowest nonzero coefficient).
pub fn order_at_zero<F: Field>(f: &F, a: &[F::E]) -> Option<usize> {
    a.iter().position(|c| !f.is_zero(c))
}

/// `a^e mod m`.
pub fn pow_mod<F: Field>(f: &F, a: &[F::E], mut e: u64, m: &[F::E]) -> Vec<F::E> {
    let mut acc = rem(f, &[f.one()], m);
    let mut base = rem(f, a, m);
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(f, &mul(f, &acc, &base), m);
        }
        e >>= 1;
        if e > 0 {
            base = rem(f, &mul(f, &base, &base), m);
        }
    }
    acc
}

/// Reverses the coefficient list of `a` viewed as a polynomial of formal degree `n`,
/// i.e. returns `x^n a(1/x)`.
pub fn reverse<F: Field>(f: &F, a: &[F::E], n: usize) -> Vec<F::E> {
    let mut out = vec![f.zero(); n + 1];
    for (i, c) in a.iter().enumerate() {
        out[n - i] = c.clone();
    }
    trim(f, &mut out);
    out
}

/// Monic square root: if `a` is monic of even degree and a perfect square, returns the
/// monic `g` with `g^2 = a`. Requires characteristic different from 2.
pub fn monic_sqrt<F: Field>(f: &F, a: &[F::E]) -> Option<Vec<F::E>> {
    let deg = degree(a)?;
    if deg % 2 != 0 || !is_monic(f, a) {
        return None;
    }
    let n = deg / 2;
    let two_inv = f.inv(&f.from_int(2));
    let mut g = vec![f.zero(); n + 1];
    g[n] = f.one();
    for k in 1..=n {
        // coefficient of x^(2n-k) in g^2 equals 2 g_n g_{n-k} + sum over the known pairs
        let target = 2 * n - k;
        let mut known = f.zero();
        for i in (n - k + 1)..=n {
            let j = target - i;
            if j > n - k && j <= n {
                known = f.add(&known, &f.mul(&g[i], &g[j]));
            }
        }
        let c = f.sub(&a[target], &known);
        g[n - k] = f.mul(&c, &two_inv);
    }
    if mul(f, &g, &g) == a {
        Some(g)
    } else {
        None
    }
}
