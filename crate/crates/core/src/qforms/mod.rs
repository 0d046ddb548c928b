//! Nonsingular quadratic forms held in diagonal shape.

pub(crate) mod witt;

use std::fmt;

use crate::error::{Error, Result};
use crate::fields::{Element, FieldTower};

pub use witt::{
    is_isotropic, isometric, isometric_with, witt_decompose, witt_decompose_until, witt_decompose_with, witt_index,
    WittDecomposition, WittOptions,
};

/// The form `d_1 x_1^2 + ... + d_n x_n^2` with every `d_i` nonzero.
///
/// The zero-dimensional form is allowed; it shows up as an anisotropic kernel or an
/// absent residue form.
#[derive(Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    tower: FieldTower,
    diag: Vec<Element>,
}

impl QuadraticForm {
    pub fn new(tower: &FieldTower, diag: Vec<Element>) -> Result<Self> {
        if diag.iter().any(Element::is_zero) {
            return Err(Error::SingularForm);
        }
        Ok(QuadraticForm {
            tower: tower.clone(),
            diag,
        })
    }

    pub fn from_ints(tower: &FieldTower, diag: &[i64]) -> Result<Self> {
        Self::new(tower, diag.iter().map(|&n| tower.from_int(n)).collect())
    }

    pub fn empty(tower: &FieldTower) -> Self {
        QuadraticForm {
            tower: tower.clone(),
            diag: Vec::new(),
        }
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn diag(&self) -> &[Element] {
        &self.diag
    }

    pub fn into_diag(self) -> Vec<Element> {
        self.diag
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn determinant(&self) -> Element {
        self.tower.product(&self.diag)
    }

    /// `q(x)`.
    pub fn evaluate(&self, x: &[Element]) -> Element {
        assert_eq!(x.len(), self.dim());
        let k = &self.tower;
        self.diag.iter().zip(x).fold(k.zero(), |acc, (d, xi)| {
            k.add(&acc, &k.mul(d, &k.mul(xi, xi)))
        })
    }

    /// The polar form `b_q(x, y) = q(x + y) - q(x) - q(y)`.
    pub fn polar(&self, x: &[Element], y: &[Element]) -> Element {
        let k = &self.tower;
        let two = k.from_int(2);
        self.diag
            .iter()
            .zip(x.iter().zip(y))
            .fold(k.zero(), |acc, (d, (a, b))| {
                k.add(&acc, &k.mul(&two, &k.mul(d, &k.mul(a, b))))
            })
    }

    fn check_tower(&self, other: &QuadraticForm) -> Result<()> {
        if self.tower != other.tower {
            return Err(Error::TowerMismatch);
        }
        Ok(())
    }

    pub fn orth_sum(&self, other: &QuadraticForm) -> Result<QuadraticForm> {
        self.check_tower(other)?;
        let mut diag = self.diag.clone();
        diag.extend(other.diag.iter().cloned());
        Ok(QuadraticForm {
            tower: self.tower.clone(),
            diag,
        })
    }

    pub fn scale(&self, c: &Element) -> Result<QuadraticForm> {
        if c.is_zero() {
            return Err(Error::ZeroScalar);
        }
        let diag = self.diag.iter().map(|d| self.tower.mul(d, c)).collect();
        Ok(QuadraticForm {
            tower: self.tower.clone(),
            diag,
        })
    }

    pub fn negate(&self) -> QuadraticForm {
        QuadraticForm {
            tower: self.tower.clone(),
            diag: self.diag.iter().map(|d| self.tower.neg(d)).collect(),
        }
    }

    /// Tensor product with the diagonal bilinear form `<b_1, ..., b_m>`. The entries
    /// are ordered with the bilinear index outermost: `b_1 q, b_2 q, ...`.
    pub fn tensor_bilinear(&self, b: &[Element]) -> Result<QuadraticForm> {
        if b.iter().any(Element::is_zero) {
            return Err(Error::ZeroScalar);
        }
        let k = &self.tower;
        let diag = b
            .iter()
            .flat_map(|y| self.diag.iter().map(move |x| k.mul(x, y)))
            .collect();
        Ok(QuadraticForm {
            tower: self.tower.clone(),
            diag,
        })
    }

    pub fn display(&self) -> String {
        let entries: Vec<String> = self.diag.iter().map(|d| self.tower.display(d)).collect();
        format!("diag[{}]", entries.join(", "))
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

impl fmt::Debug for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}", self.display(), self.tower)
    }
}

/// The ways two forms (or a form and a scalar) are combined.
#[derive(Clone, Debug)]
pub enum Combine<'a> {
    OrthSum(&'a QuadraticForm),
    Scale(Element),
    TensorBilinear(Vec<Element>),
}

pub fn combine(q: &QuadraticForm, op: Combine<'_>) -> Result<QuadraticForm> {
    match op {
        Combine::OrthSum(p) => q.orth_sum(p),
        Combine::Scale(c) => q.scale(&c),
        Combine::TensorBilinear(b) => q.tensor_bilinear(&b),
    }
}

/// A symmetric bilinear form given by its Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramForm {
    pub tower: FieldTower,
    pub gram: Vec<Vec<Element>>,
}

/// Result of [`diagonalize`]: `T^t G T = diag(form)`.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub form: QuadraticForm,
    /// Columns are the new basis vectors, in the coordinates of the input.
    pub basis_change: Vec<Vec<Element>>,
}

impl GramForm {
    pub fn new(tower: &FieldTower, gram: Vec<Vec<Element>>) -> Result<Self> {
        let n = gram.len();
        for (i, row) in gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::SingularForm);
            }
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::SingularForm);
                }
            }
        }
        Ok(GramForm {
            tower: tower.clone(),
            gram,
        })
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    /// `x^t G y`.
    pub fn bilinear(&self, x: &[Element], y: &[Element]) -> Element {
        let k = &self.tower;
        let mut acc = k.zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() || self.gram[i][j].is_zero() {
                    continue;
                }
                acc = k.add(&acc, &k.mul(xi, &k.mul(&self.gram[i][j], yj)));
            }
        }
        acc
    }
}

/// Symmetric Gaussian reduction.
pub fn diagonalize(g: &GramForm) -> Result<Diagonalization> {
    let k = &g.tower;
    let n = g.dim();
    let mut m = g.gram.clone();
    // columns of T
    let mut t: Vec<Vec<Element>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { k.one() } else { k.zero() }).collect())
        .collect();
    for i in 0..n {
        if m[i][i].is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !m[j][j].is_zero()) {
                swap_basis(&mut m, &mut t, i, j);
            } else if let Some(j) = (i + 1..n).find(|&j| !m[i][j].is_zero()) {
                // e_i += e_j makes the pivot 2 m_ij
                add_basis(k, &mut m, &mut t, i, j, &k.one());
            } else {
                return Err(Error::SingularForm);
            }
        }
        let piv_inv = k.inv(&m[i][i])?;
        for j in i + 1..n {
            if m[i][j].is_zero() {
                continue;
            }
            let c = k.neg(&k.mul(&m[i][j], &piv_inv));
            add_basis(k, &mut m, &mut t, j, i, &c);
        }
    }
    let diag = (0..n).map(|i| m[i][i].clone()).collect();
    Ok(Diagonalization {
        form: QuadraticForm::new(k, diag)?,
        basis_change: t,
    })
}

fn swap_basis(m: &mut [Vec<Element>], t: &mut [Vec<Element>], i: usize, j: usize) {
    m.swap(i, j);
    for row in m.iter_mut() {
        row.swap(i, j);
    }
    t.swap(i, j);
}

/// Replaces basis vector `e_i` by `e_i + c e_j`.
fn add_basis(
    k: &FieldTower,
    m: &mut [Vec<Element>],
    t: &mut [Vec<Element>],
    i: usize,
    j: usize,
    c: &Element,
) {
    let n = m.len();
    let m_jj = m[j][j].clone();
    let m_ij = m[i][j].clone();
    let two = k.from_int(2);
    // new m_ii = m_ii + 2c m_ij + c^2 m_jj
    let new_ii = k.add(
        &m[i][i],
        &k.add(&k.mul(&two, &k.mul(c, &m_ij)), &k.mul(&k.mul(c, c), &m_jj)),
    );
    for r in 0..n {
        if r == i {
            continue;
        }
        let v = k.add(&m[r][i], &k.mul(c, &m[r][j]));
        m[r][i] = v.clone();
        m[i][r] = v;
    }
    m[i][i] = new_ii;
    let col_j = t[j].clone();
    for (x, y) in t[i].iter_mut().zip(col_j) {
        *x = k.add(x, &k.mul(c, &y));
    }
}
