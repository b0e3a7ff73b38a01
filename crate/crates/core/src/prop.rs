//! Matrices over a semiring as a PROP, convex matrices, the operad of
//! convex vectors, and the action of convex matrices on convex sets.
//!
//! A morphism `m → n` is an `n × m` matrix. Composition is the matrix
//! product, the monoidal product is the block direct sum, and symmetries
//! permute rows and columns.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{rank, solve_linear_system};
use crate::presented::{quotient_mix, same_presentation, Presentation, PresentedElement};
use crate::semiring::{format_rational, is_convex_vector, parse_rational, qi, Rational, Semiring};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix<S = Rational> {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<S>>,
}

impl<S: Semiring> Matrix<S> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Vec<S>>) -> Result<Self> {
        if entries.len() != rows || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!("entries do not form a {rows}x{cols} array")));
        }
        Ok(Matrix { rows, cols, entries })
    }

    pub fn from_rows(entries: Vec<Vec<S>>, cols: usize) -> Result<Self> {
        Self::new(entries.len(), cols, entries)
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, entries: vec![vec![S::zero(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.entries[i][i] = S::one();
        }
        m
    }

    /// `C_n`: the `n × 1` column of ones, the unique convex matrix `1 → n`.
    pub fn copy(n: usize) -> Self {
        Matrix { rows: n, cols: 1, entries: vec![vec![S::one()]; n] }
    }

    /// The matrix of a permutation: column `i` has its one in row `tau[i]`.
    pub fn permutation(tau: &[usize]) -> Result<Self> {
        check_permutation(tau, tau.len())?;
        let mut m = Self::zero(tau.len(), tau.len());
        for (i, &t) in tau.iter().enumerate() {
            m.entries[t][i] = S::one();
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Vec<S>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.entries[i][j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.entries[i]
    }

    /// Every row sums to one (vacuous with no rows) and entries are
    /// admissible.
    pub fn is_convex(&self) -> bool {
        self.entries.iter().all(|r| is_convex_vector(r))
    }

    /// The product `self · other`.
    pub fn compose(&self, other: &Matrix<S>) -> Result<Matrix<S>> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.entries[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.mul(&other.entries[k][j]);
                    out.entries[i][j] = out.entries[i][j].add(&prod);
                }
            }
        }
        Ok(out)
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Matrix<S>) -> Matrix<S> {
        let mut out = Self::zero(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            out.entries[i][..self.cols].clone_from_slice(&self.entries[i]);
        }
        for i in 0..other.rows {
            out.entries[self.rows + i][self.cols..].clone_from_slice(&other.entries[i]);
        }
        out
    }

    /// Moves row `i` to `tau[i]` and column `j` to `sigma[j]`.
    pub fn permute(&self, tau: &[usize], sigma: &[usize]) -> Result<Matrix<S>> {
        check_permutation(tau, self.rows)?;
        check_permutation(sigma, self.cols)?;
        let mut out = Self::zero(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[tau[i]][sigma[j]] = self.entries[i][j].clone();
            }
        }
        Ok(out)
    }
}

pub(crate) fn check_permutation(p: &[usize], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::SizeMismatch(format!("permutation of {} points for dimension {n}", p.len())));
    }
    let mut seen = vec![false; n];
    for &x in p {
        if x >= n || std::mem::replace(&mut seen[x], true) {
            return Err(Error::SizeMismatch(format!("{p:?} is not a permutation")));
        }
    }
    Ok(())
}

/// `(a ∘ b)[i] = a[b[i]]`.
pub fn compose_permutations(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&i| a[i]).collect()
}

pub fn identity_permutation(n: usize) -> Vec<usize> {
    (0..n).collect()
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<String>>,
}

impl Serialize for Matrix<Rational> {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|r| r.iter().map(format_rational).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix<Rational> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MatrixJson::deserialize(d)?;
        let entries = raw
            .entries
            .iter()
            .map(|r| r.iter().map(|x| parse_rational(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Matrix::new(raw.rows, raw.cols, entries).map_err(D::Error::custom)
    }
}

/// An operation of the operad of convex vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QConvOp {
    weights: Vec<Rational>,
}

impl QConvOp {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if !is_convex_vector(&weights) {
            return Err(Error::NotConvexVector);
        }
        Ok(QConvOp { weights })
    }

    pub fn unit() -> Self {
        QConvOp { weights: vec![qi(1)] }
    }

    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// The `1 × n` convex matrix of this operation.
    pub fn as_matrix(&self) -> Matrix<Rational> {
        Matrix { rows: 1, cols: self.arity(), entries: vec![self.weights.clone()] }
    }

    /// Right action of a permutation: `(α·σ)_i = α_{σ(i)}`.
    pub fn permute(&self, sigma: &[usize]) -> Result<Self> {
        check_permutation(sigma, self.arity())?;
        Ok(QConvOp { weights: sigma.iter().map(|&i| self.weights[i].clone()).collect() })
    }
}

/// Operadic composition: weights `α_i β^i_j`, flattened in order.
pub fn qconv_compose(z: &QConvOp, xs: &[QConvOp]) -> Result<QConvOp> {
    if xs.len() != z.arity() {
        return Err(Error::ArityMismatch { expected: z.arity(), found: xs.len() });
    }
    let weights = z
        .weights
        .iter()
        .zip(xs)
        .flat_map(|(a, x)| x.weights.iter().map(move |b| a * b))
        .collect();
    Ok(QConvOp { weights })
}

/// Applies a convex `n × m` matrix to an `m`-tuple of elements: output `i`
/// mixes the inputs with row `i`.
pub fn algebra_apply(
    a: &Arc<Presentation>,
    m: &Matrix<Rational>,
    xs: &[PresentedElement],
) -> Result<Vec<PresentedElement>> {
    if xs.len() != m.cols {
        return Err(Error::DimensionMismatch(format!("{} inputs for a matrix with {} columns", xs.len(), m.cols)));
    }
    if !m.is_convex() {
        return Err(Error::NotConvexMatrix);
    }
    if xs.iter().any(|x| !same_presentation(x.presentation(), a)) {
        return Err(Error::PresentationMismatch);
    }
    m.entries.iter().map(|row| quotient_mix(row, xs)).collect()
}

/// The vector-space algebra of all matrices on `Q^d`:
/// `(v_1, …, v_m) ↦ (Σ_j M_ij v_j)_i`.
pub fn linear_apply(m: &Matrix<Rational>, vs: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    if vs.len() != m.cols {
        return Err(Error::DimensionMismatch(format!("{} vectors for {} columns", vs.len(), m.cols)));
    }
    let d = vs.first().map_or(0, Vec::len);
    if vs.iter().any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch("vectors of different lengths".into()));
    }
    Ok(m.entries
        .iter()
        .map(|row| {
            (0..d)
                .map(|k| row.iter().zip(vs).fold(qi(0), |acc, (a, v)| acc + a * &v[k]))
                .collect()
        })
        .collect())
}

/// Convex `n × 1` matrices are determined by their row-sum equations:
/// returns the unique solution (which is `C_n`) or `None` if the system is
/// not uniquely solvable.
pub fn unique_convex_column(n: usize) -> Option<Matrix<Rational>> {
    // Unknown column x with one equation per row: x_i = 1.
    let rows: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { qi(1) } else { qi(0) }).collect())
        .collect();
    let rhs = vec![qi(1); n];
    if rank(&rows, n) != n {
        return None;
    }
    let x = solve_linear_system(&rows, &rhs, n)?;
    Matrix::new(n, 1, x.into_iter().map(|v| vec![v]).collect()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::dist;
    use crate::semiring::{q, qi};

    fn m(rows: &[&[Rational]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect(), cols).unwrap()
    }

    #[test]
    fn convexity_examples() {
        assert!(Matrix::<Rational>::identity(3).is_convex());
        assert!(Matrix::<Rational>::zero(0, 4).is_convex());
        assert!(!m(&[&[q(1, 2), q(1, 3)]]).is_convex());
    }

    #[test]
    fn composition_and_units() {
        let a = m(&[&[q(1, 2), q(1, 2)], &[qi(1), qi(0)]]);
        assert_eq!(Matrix::identity(2).compose(&a).unwrap(), a);
        assert_eq!(Matrix::<Rational>::copy(2).compose(&m(&[&[qi(1)]])).unwrap(), Matrix::copy(2));
        assert!(matches!(a.compose(&Matrix::identity(3)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn direct_sum_examples() {
        let a = m(&[&[q(1, 3), q(2, 3)]]);
        assert_eq!(a.direct_sum(&Matrix::zero(0, 0)), a);
        assert_eq!(m(&[&[qi(1)]]).direct_sum(&m(&[&[qi(1)]])), Matrix::identity(2));
    }

    #[test]
    fn permutations_compose() {
        let a = m(&[&[qi(1), qi(0), qi(0)], &[q(1, 2), q(1, 2), qi(0)]]);
        let (t1, t2) = (vec![1, 0], vec![1, 0]);
        let (s1, s2) = (vec![2, 0, 1], vec![1, 2, 0]);
        let twice = a.permute(&t1, &s1).unwrap().permute(&t2, &s2).unwrap();
        let once = a.permute(&compose_permutations(&t2, &t1), &compose_permutations(&s2, &s1)).unwrap();
        assert_eq!(twice, once);
        assert_eq!(a.permute(&[0, 1], &[0, 1, 2]).unwrap(), a);
        assert!(a.permute(&t1, &s1).unwrap().is_convex());
        assert!(matches!(a.permute(&[0], &[0, 1, 2]), Err(Error::SizeMismatch(_))));
        // Matching the permutation-matrix description.
        let p = Matrix::<Rational>::permutation(&t1).unwrap();
        assert_eq!(p.compose(&a).unwrap(), a.permute(&t1, &identity_permutation(3)).unwrap());
    }

    #[test]
    fn operad_composition() {
        let z = QConvOp::new(vec![q(1, 2), q(1, 2)]).unwrap();
        let out = qconv_compose(&z, &[QConvOp::unit(), QConvOp::new(vec![q(1, 3), q(2, 3)]).unwrap()]).unwrap();
        assert_eq!(out.weights(), &[q(1, 2), q(1, 6), q(1, 3)]);
        assert_eq!(qconv_compose(&z, &[QConvOp::unit(), QConvOp::unit()]).unwrap(), z);
        assert!(matches!(qconv_compose(&z, &[QConvOp::unit()]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn algebra_action() {
        let a = Arc::new(Presentation::free(["x", "y"]).unwrap());
        let x = a.generator("x").unwrap();
        let y = a.generator("y").unwrap();
        let out = algebra_apply(&a, &Matrix::copy(2), std::slice::from_ref(&x)).unwrap();
        assert_eq!(out, vec![x.clone(), x.clone()]);
        assert_eq!(algebra_apply(&a, &Matrix::identity(2), &[x.clone(), y.clone()]).unwrap(), vec![x.clone(), y.clone()]);
        let mix = algebra_apply(&a, &m(&[&[q(1, 4), q(3, 4)]]), &[x.clone(), y]).unwrap();
        assert_eq!(mix[0].rep(), &dist(&[("x", q(1, 4)), ("y", q(3, 4))]));
        assert!(matches!(algebra_apply(&a, &m(&[&[q(1, 2)]]), &[x]), Err(Error::NotConvexMatrix)));
    }

    #[test]
    fn only_copy_is_a_convex_column() {
        for n in 0..5 {
            assert_eq!(unique_convex_column(n), Some(Matrix::copy(n)));
        }
    }

    #[test]
    fn matrix_json() {
        let a = m(&[&[q(1, 2), q(1, 2)]]);
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(text, r#"{"rows":1,"cols":2,"entries":[["1/2","1/2"]]}"#);
        assert_eq!(serde_json::from_str::<Matrix>(&text).unwrap(), a);
        assert!(serde_json::from_str::<Matrix>(r#"{"rows":2,"cols":2,"entries":[["1","0"]]}"#).is_err());
    }

    #[test]
    fn linear_algebra_is_functorial() {
        let a = m(&[&[qi(2), qi(-1)], &[qi(0), qi(3)]]);
        let b = m(&[&[qi(1), qi(1)], &[q(1, 2), qi(0)]]);
        let vs = vec![vec![qi(1), qi(2)], vec![qi(-3), q(1, 2)]];
        let lhs = linear_apply(&a.compose(&b).unwrap(), &vs).unwrap();
        let rhs = linear_apply(&a, &linear_apply(&b, &vs).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
