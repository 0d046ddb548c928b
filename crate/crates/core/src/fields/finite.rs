//! Finite fields GF(p^k) for odd p.
//!
//! An element is stored as its index `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`, i.e. the
//! base-p digits are the coefficients of its representative modulo the defining
//! polynomial. Multiplication goes through discrete log/exp tables built once per
//! field; fields are interned so that every `(p, k)` pair shares one instance.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest field order for which tables are built.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

#[derive(Debug)]
pub struct FiniteField {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

static FIELDS: OnceLock<Mutex<HashMap<(u32, u32), Arc<FiniteField>>>> = OnceLock::new();

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^k` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut k = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p as u32, k))
}

impl FiniteField {
    /// Returns the interned field GF(p^k).
    pub fn get(p: u32, k: u32) -> Result<Arc<FiniteField>> {
        if p == 2 {
            return Err(Error::InvalidField(
                "characteristic 2 is not supported".into(),
            ));
        }
        if !is_prime(p as u64) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(Error::InvalidField("extension degree must be positive".into()));
        }
        let order = (p as u64).checked_pow(k).unwrap_or(u64::MAX);
        if order > MAX_FIELD_ORDER {
            return Err(Error::UnsupportedTower(format!(
                "GF({p}^{k}) exceeds the supported field order {MAX_FIELD_ORDER}"
            )));
        }
        let map = FIELDS.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(f) = map.lock().unwrap().get(&(p, k)) {
            return Ok(f.clone());
        }
        let field = Arc::new(Self::build(p, k));
        let mut guard = map.lock().unwrap();
        Ok(guard.entry((p, k)).or_insert(field).clone())
    }

    /// Returns GF(q) for a prime power q.
    pub fn of_order(q: u64) -> Result<Arc<FiniteField>> {
        let (p, k) = prime_power(q)
            .ok_or_else(|| Error::InvalidField(format!("{q} is not a prime power")))?;
        Self::get(p, k)
    }

    fn build(p: u32, k: u32) -> FiniteField {
        let q = p.pow(k);
        let modulus = if k == 1 {
            vec![0, 1]
        } else {
            minimal_irreducible(p, k)
        };
        let mut field = FiniteField {
            p,
            k,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
        };
        let (exp, log) = field.discrete_log_tables();
        field.exp = exp;
        field.log = log;
        field
    }

    fn discrete_log_tables(&self) -> (Vec<u32>, Vec<u32>) {
        let n = (self.q - 1) as usize;
        for g in 2..self.q {
            let mut exp = Vec::with_capacity(2 * n);
            let mut x = 1u32;
            let mut order = 0usize;
            loop {
                exp.push(x);
                x = self.mul_slow(x, g);
                order += 1;
                if x == 1 || order > n {
                    break;
                }
            }
            if order == n {
                let mut log = vec![0u32; self.q as usize];
                for (i, &e) in exp.iter().enumerate() {
                    log[e as usize] = i as u32;
                }
                let head = exp.clone();
                exp.extend(head);
                return (exp, log);
            }
        }
        // GF(p^k)^x is cyclic, so the loop always finds a generator.
        unreachable!("no primitive element found")
    }

    fn digits(&self, mut a: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.k as usize);
        for _ in 0..self.k {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    fn from_digits(&self, d: &[u32]) -> u32 {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let p = self.p as u64;
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * self.k as usize];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        let k = self.k as usize;
        for deg in (k..prod.len()).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            for (i, &m) in self.modulus.iter().enumerate().take(k) {
                let idx = deg - k + i;
                prod[idx] = (prod[idx] + (p - c) * m as u64) % p;
            }
            prod[deg] = 0;
        }
        let d: Vec<u32> = prod[..k].iter().map(|&c| c as u32).collect();
        self.from_digits(&d)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Coefficients of the stored defining polynomial, lowest degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The class of the polynomial variable modulo the defining polynomial (index `p`),
    /// or `1` in a prime field.
    pub fn generator(&self) -> u32 {
        if self.k == 1 {
            1
        } else {
            self.p
        }
    }

    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }

    /// Digits of an element, i.e. its coefficients over GF(p).
    pub fn coefficients(&self, a: u32) -> Vec<u32> {
        self.digits(a)
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            let s = (a % self.p + b % self.p) % self.p;
            out += s * place;
            place *= self.p;
            a /= self.p;
            b /= self.p;
        }
        out
    }

    pub fn neg(&self, a: u32) -> u32 {
        if self.k == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        let d: Vec<u32> = self
            .digits(a)
            .into_iter()
            .map(|c| (self.p - c) % self.p)
            .collect();
        self.from_digits(&d)
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let n = self.q - 1;
        Some(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let n = (self.q - 1) as u64;
        self.exp[((self.log[a as usize] as u64 * (e % n)) % n) as usize]
    }

    /// Euler's criterion; with a primitive generator this is the parity of the log.
    pub fn is_square(&self, a: u32) -> bool {
        a == 0 || self.log[a as usize] % 2 == 0
    }

    /// The square root with the smaller index, if `a` is a square.
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return Some(0);
        }
        let l = self.log[a as usize];
        if l % 2 != 0 {
            return None;
        }
        let r = self.exp[(l / 2) as usize];
        Some(r.min(self.neg(r)))
    }

    /// The smallest-index nonsquare.
    pub fn nonsquare(&self) -> u32 {
        (1..self.q).find(|&a| !self.is_square(a)).unwrap()
    }

    /// p-th root (the Frobenius is an automorphism of a finite field).
    pub fn pth_root(&self, a: u32) -> u32 {
        self.pow(a, (self.q / self.p) as u64)
    }
}

// --- polynomials over GF(p), only used to find the defining polynomial -------------

fn zp_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn zp_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    zp_trim(&mut r);
    let dm = m.len() - 1;
    let inv_lc = zp_inv(m[dm], p);
    while r.len() > dm {
        let deg = r.len() - 1;
        let c = r[deg] as u64 * inv_lc as u64 % p as u64;
        for (i, &mi) in m.iter().enumerate() {
            let idx = deg - dm + i;
            r[idx] = ((r[idx] as u64 + (p as u64 - c) * mi as u64) % p as u64) as u32;
        }
        zp_trim(&mut r);
    }
    r
}

fn zp_inv(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn zp_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    zp_rem(&prod, m, p)
}

fn zp_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    zp_trim(&mut a);
    zp_trim(&mut b);
    while !b.is_empty() {
        let r = zp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn zp_is_irreducible(f: &[u32], p: u32) -> bool {
    let k = f.len() - 1;
    // x^(p^i) mod f for i = 1..=k/2; f is irreducible iff gcd(x^(p^i) - x, f) = 1 for all.
    let mut xp = vec![0, 1];
    for _ in 0..k / 2 {
        let mut acc = vec![1u32];
        let mut base = xp.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = zp_mulmod(&acc, &base, f, p);
            }
            base = zp_mulmod(&base, &base, f, p);
            e >>= 1;
        }
        xp = acc;
        let mut diff = xp.clone();
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        zp_trim(&mut diff);
        let g = zp_gcd(&diff, f, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

/// The monic irreducible polynomial of degree k over GF(p) whose lower coefficients,
/// read as base-p digits, form the smallest integer.
fn minimal_irreducible(p: u32, k: u32) -> Vec<u32> {
    let count = p.pow(k);
    for idx in 0..count {
        let mut f = Vec::with_capacity(k as usize + 1);
        let mut r = idx;
        for _ in 0..k {
            f.push(r % p);
            r /= p;
        }
        f.push(1);
        if f[0] != 0 && zp_is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}
