//! Squarefree decomposition and factorization of polynomials over a finite field.

use rand::SeedableRng;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

use super::finite::FiniteField;
use super::poly;

type P = Vec<u32>;

fn is_one(f: &[u32]) -> bool {
    f.len() == 1 && f[0] == 1
}

/// Replaces `f(x) = g(x^p)` by `g` with p-th roots taken coefficientwise.
fn pth_root_poly(field: &FiniteField, f: &[u32]) -> P {
    let p = field.characteristic() as usize;
    f.iter()
        .step_by(p)
        .map(|&c| field.pth_root(c))
        .collect()
}

/// Squarefree decomposition of a monic polynomial: pairs `(g, m)` with `g` monic
/// squarefree of positive degree, pairwise coprime, and `f = prod g^m`.
pub fn squarefree_decomposition(field: &FiniteField, f: &[u32]) -> Vec<(P, u32)> {
    let mut out = Vec::new();
    if f.len() <= 1 {
        return out;
    }
    let p = field.characteristic();
    let df = poly::derivative(field, f);
    if df.is_empty() {
        for (g, m) in squarefree_decomposition(field, &pth_root_poly(field, f)) {
            out.push((g, m * p));
        }
        return out;
    }
    let mut c = poly::gcd(field, f, &df);
    let mut w = poly::div_exact(field, f, &c);
    let mut i = 1;
    while !is_one(&w) {
        let y = poly::gcd(field, &w, &c);
        let z = poly::div_exact(field, &w, &y);
        if !is_one(&z) {
            out.push((z, i));
        }
        i += 1;
        w = y;
        c = poly::div_exact(field, &c, &w);
    }
    if !is_one(&c) {
        for (g, m) in squarefree_decomposition(field, &pth_root_poly(field, &c)) {
            out.push((g, m * p));
        }
    }
    out
}

/// Distinct-degree factorization of a monic squarefree polynomial.
fn distinct_degree(field: &FiniteField, f: &[u32]) -> Vec<(P, usize)> {
    let q = field.order() as u64;
    let mut out = Vec::new();
    let mut rest = f.to_vec();
    let x = vec![0, 1];
    let mut h = x.clone();
    let mut d = 0;
    while rest.len() > 1 {
        d += 1;
        if 2 * d > rest.len() - 1 {
            out.push((rest.clone(), rest.len() - 1));
            break;
        }
        h = poly::pow_mod(field, &h, q, &rest);
        let g = poly::gcd(field, &poly::sub(field, &h, &x), &rest);
        if !is_one(&g) {
            rest = poly::div_exact(field, &rest, &g);
            h = poly::rem(field, &h, &rest);
            out.push((g, d));
        }
    }
    out
}

/// `a^((q^d - 1)/2) mod f` computed as a product of Frobenius images.
fn half_power(field: &FiniteField, a: &[u32], d: usize, f: &[u32]) -> P {
    let q = field.order() as u64;
    let mut frob = poly::rem(field, a, f);
    let mut acc = vec![1];
    for i in 0..d {
        if i > 0 {
            frob = poly::pow_mod(field, &frob, q, f);
        }
        acc = poly::rem(field, &poly::mul(field, &acc, &frob), f);
    }
    // acc = a^(1 + q + ... + q^(d-1)) = norm-like power; raise to (q-1)/2
    poly::pow_mod(field, &acc, (q - 1) / 2, f)
}

/// Splits a product of distinct monic irreducibles of degree `d`.
fn equal_degree(field: &FiniteField, f: &[u32], d: usize, rng: &mut ChaCha8Rng) -> Vec<P> {
    let n = f.len() - 1;
    if n == d {
        return vec![f.to_vec()];
    }
    loop {
        let mut a: P = (0..n).map(|_| rng.random_range(0..field.order())).collect();
        poly::trim(field, &mut a);
        if a.len() < 2 {
            continue;
        }
        let mut b = half_power(field, &a, d, f);
        b = poly::sub(field, &b, &[1]);
        let g = poly::gcd(field, &b, f);
        if g.len() > 1 && g.len() < f.len() {
            let h = poly::div_exact(field, f, &g);
            let mut out = equal_degree(field, &g, d, rng);
            out.extend(equal_degree(field, &h, d, rng));
            return out;
        }
    }
}

/// Factors a nonzero polynomial into monic irreducibles with multiplicities, sorted
/// by degree then coefficients. The leading coefficient is dropped.
pub fn factor(field: &FiniteField, f: &[u32]) -> Vec<(P, u32)> {
    let monic = poly::make_monic(field, f);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    for (g, m) in squarefree_decomposition(field, &monic) {
        for (h, d) in distinct_degree(field, &g) {
            for irr in equal_degree(field, &h, d, &mut rng) {
                out.push((irr, m));
            }
        }
    }
    out.sort_by(|a, b| compare_polys(&a.0, &b.0));
    out
}

/// Degree first, then coefficients from the top down.
pub fn compare_polys(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    a.len()
        .cmp(&b.len())
        .then_with(|| a.iter().rev().cmp(b.iter().rev()))
}

/// All roots of `f` in the field.
pub fn roots(field: &FiniteField, f: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = factor(field, f)
        .into_iter()
        .filter(|(g, _)| g.len() == 2)
        .map(|(g, _)| field.neg(g[0]))
        .collect();
    out.sort_unstable();
    out
}

pub fn is_irreducible(field: &FiniteField, f: &[u32]) -> bool {
    let fac = factor(field, f);
    fac.len() == 1 && fac[0].1 == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(field: &FiniteField, fac: &[(P, u32)]) -> P {
        fac.iter().fold(vec![1], |acc, (g, m)| {
            poly::mul(field, &acc, &poly::pow(field, g, *m as u64))
        })
    }

    #[test]
    fn factorization_reconstructs() {
        let f = FiniteField::get(3, 1).unwrap();
        // (x^2+1)^2 (x+1)^3 x
        let a = poly::pow(&*f, &[1, 0, 1], 2);
        let b = poly::pow(&*f, &[1, 1], 3);
        let g = poly::mul(&*f, &poly::mul(&*f, &a, &b), &[0, 1]);
        let fac = factor(&f, &g);
        assert_eq!(expand(&f, &fac), g);
        assert_eq!(fac.len(), 3);
        assert!(fac.contains(&(vec![1, 0, 1], 2)));
        assert!(fac.contains(&(vec![1, 1], 3)));
    }

    #[test]
    fn squarefree_handles_pth_powers() {
        let f = FiniteField::get(5, 1).unwrap();
        let g = poly::pow(&*f, &[2, 1], 10);
        let sf = squarefree_decomposition(&f, &g);
        assert_eq!(sf, vec![(vec![2, 1], 10)]);
    }

    #[test]
    fn irreducibility_over_gf3() {
        let f = FiniteField::get(3, 1).unwrap();
        assert!(is_irreducible(&f, &[1, 0, 1]));
        assert!(!is_irreducible(&f, &[2, 0, 1]));
        assert!(is_irreducible(&f, &[1, 2, 0, 1]));
    }

    #[test]
    fn roots_in_extension() {
        let f9 = FiniteField::get(3, 2).unwrap();
        // x^2 + 1 splits over GF(9)
        let r = roots(&f9, &[1, 0, 1]);
        assert_eq!(r.len(), 2);
        for x in r {
            assert_eq!(f9.add(f9.mul(x, x), 1), 0);
        }
    }
}
