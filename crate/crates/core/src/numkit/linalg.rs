//! Dense linear algebra over either scalar regime.
//!
//! Elimination pivots on the first nonzero entry in the exact regime and on the
//! largest modulus in the float regime. Numerical rank goes through a complex
//! SVD so that rank calls carry an auditable singular-value margin.

use nalgebra::DMatrix;
use serde::Serialize;

use super::scalar::{CFloat, Rational, Scalar};
use super::NumError;

/// Relative tolerance below which a float pivot is treated as zero.
pub const FLOAT_PIVOT_TOL: f64 = 1e-11;

/// Default singular-value ratio separating "nonzero" from "zero".
pub const RANK_GAP_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    /// Builds a matrix from row vectors; all rows must share one length.
    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self, NumError> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(NumError::DimensionMismatch(format!(
                "ragged rows: expected {ncols} columns"
            )));
        }
        Ok(Mat {
            rows: rows.len(),
            cols: ncols,
            data: rows.iter().flatten().cloned().collect(),
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<S>]) -> Result<Self, NumError> {
        Ok(Self::from_rows(cols)?.transpose())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Vec<S> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_mat(&self, other: &Self) -> Result<Self, NumError> {
        if self.cols != other.rows {
            return Err(NumError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other[(k, j)].clone();
                    let slot = &mut out[(i, j)];
                    *slot = slot.clone() + prod;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[S]) -> Result<Vec<S>, NumError> {
        if self.cols != v.len() {
            return Err(NumError::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], v))
            .collect())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_cfloat(&self) -> Mat<CFloat> {
        self.map(Scalar::to_cfloat)
    }

    fn max_modulus(&self) -> f64 {
        self.data.iter().map(Scalar::modulus).fold(0.0, f64::max)
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let scale = self.max_modulus();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let candidate = if S::EXACT {
                (r..m.rows).find(|&i| !m[(i, c)].is_zero())
            } else {
                (r..m.rows)
                    .max_by(|&a, &b| m[(a, c)].modulus().total_cmp(&m[(b, c)].modulus()))
                    .filter(|&i| !m[(i, c)].is_negligible(scale, FLOAT_PIVOT_TOL))
            };
            let Some(p) = candidate else { continue };
            m.swap_rows(p, r);
            let inv = S::one() / m[(r, c)].clone();
            for j in 0..m.cols {
                m[(r, j)] = m[(r, j)].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let factor = m[(i, c)].clone();
                for j in 0..m.cols {
                    let v = m[(r, j)].clone() * factor.clone();
                    m[(i, j)] = m[(i, j)].clone() - v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Rank by elimination (exact in the rational regime).
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<S>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![S::zero(); self.cols];
                v[f] = S::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    pub fn det(&self) -> Result<S, NumError> {
        if self.rows != self.cols {
            return Err(NumError::DimensionMismatch(format!(
                "determinant of {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = S::one();
        for c in 0..n {
            let p = if S::EXACT {
                (c..n).find(|&i| !m[(i, c)].is_zero())
            } else {
                (c..n).max_by(|&a, &b| m[(a, c)].modulus().total_cmp(&m[(b, c)].modulus()))
            };
            let Some(p) = p else { return Ok(S::zero()) };
            if m[(p, c)].is_zero() {
                return Ok(S::zero());
            }
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let pivot = m[(c, c)].clone();
            det = det * pivot.clone();
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let factor = m[(i, c)].clone() / pivot.clone();
                for j in c..n {
                    let v = m[(c, j)].clone() * factor.clone();
                    m[(i, j)] = m[(i, j)].clone() - v;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Self, NumError> {
        if self.rows != self.cols {
            return Err(NumError::DimensionMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = S::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(NumError::Singular);
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Ok(inv)
    }

    /// Solves `self * x = rhs` for a particular solution, if consistent.
    pub fn solve(&self, rhs: &[S]) -> Result<Option<Vec<S>>, NumError> {
        if rhs.len() != self.rows {
            return Err(NumError::DimensionMismatch(format!(
                "{} rows but right-hand side of length {}",
                self.rows,
                rhs.len()
            )));
        }
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = rhs[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![S::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r[(row, self.cols)].clone();
        }
        Ok(Some(x))
    }
}

impl<S> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Solution space of a linear system.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionSpace {
    /// A particular solution; `None` for homogeneous requests or inconsistent systems.
    pub particular: Option<Vec<Rational>>,
    /// True when a right-hand side was supplied and no solution exists.
    pub inconsistent: bool,
    /// Basis of the homogeneous solution space.
    pub basis: Vec<Vec<Rational>>,
}

/// Exact solve of `matrix * x = rhs` (or the kernel when `rhs` is `None`).
pub fn solve_linear(
    matrix: &[Vec<Rational>],
    rhs: Option<&[Rational]>,
) -> Result<SolutionSpace, NumError> {
    let m = Mat::from_rows(matrix)?;
    let basis = m.kernel();
    match rhs {
        None => Ok(SolutionSpace {
            particular: None,
            inconsistent: false,
            basis,
        }),
        Some(b) => {
            let particular = m.solve(b)?;
            Ok(SolutionSpace {
                inconsistent: particular.is_none(),
                particular,
                basis,
            })
        }
    }
}

/// Numerical rank decision with its singular-value evidence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    /// Singular values divided by the largest one, in decreasing order.
    pub normalized_singular_values: Vec<f64>,
    /// Distance (in log10 units) of the closest ratio to the threshold.
    pub margin_decades: f64,
    /// Set when some ratio lies within a factor 10 of the threshold.
    pub ill_conditioned: bool,
}

pub fn singular_values(m: &Mat<CFloat>) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let dm = DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)]);
    let mut sv: Vec<f64> = dm.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Right singular vector of the smallest singular value of a square matrix.
pub fn null_vector(m: &Mat<CFloat>) -> Vec<CFloat> {
    let dm = DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)]);
    let svd = dm.svd(false, true);
    let k = (0..svd.singular_values.len())
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .expect("nonempty matrix");
    let vt = svd.v_t.expect("requested");
    (0..m.cols()).map(|j| vt[(k, j)].conj()).collect()
}

/// Rank by singular-value ratio against `threshold`.
pub fn numerical_rank(m: &Mat<CFloat>, threshold: f64) -> RankReport {
    let sv = singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return RankReport {
            rank: 0,
            normalized_singular_values: sv.iter().map(|_| 0.0).collect(),
            margin_decades: f64::INFINITY,
            ill_conditioned: false,
        };
    }
    let ratios: Vec<f64> = sv.iter().map(|s| s / top).collect();
    let rank = ratios.iter().filter(|&&r| r > threshold).count();
    let margin_decades = ratios
        .iter()
        .map(|&r| (r.max(1e-300).log10() - threshold.log10()).abs())
        .fold(f64::INFINITY, f64::min);
    RankReport {
        rank,
        ill_conditioned: margin_decades < 1.0,
        normalized_singular_values: ratios,
        margin_decades,
    }
}

/// Rank decision in either regime: exact elimination or SVD gap.
pub fn rank_report<S: Scalar>(m: &Mat<S>) -> RankReport {
    if S::EXACT {
        let rank = m.rank();
        RankReport {
            rank,
            normalized_singular_values: Vec::new(),
            margin_decades: f64::INFINITY,
            ill_conditioned: false,
        }
    } else {
        numerical_rank(&m.to_cfloat(), RANK_GAP_THRESHOLD)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::numkit::scalar::int;

    fn rows(v: &[&[i64]]) -> Vec<Vec<Rational>> {
        v.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn identity_has_trivial_kernel() {
        let s = solve_linear(&rows(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]), None).unwrap();
        assert!(s.basis.is_empty());
    }

    #[test]
    fn single_condition_leaves_two_dimensions() {
        let m = rows(&[&[1, 1, 1]]);
        let s = solve_linear(&m, None).unwrap();
        assert_eq!(s.basis.len(), 2);
        for v in &s.basis {
            assert!(dot(&m[0], v).is_zero());
        }
    }

    #[test]
    fn ragged_input_is_rejected() {
        let m = vec![vec![int(1), int(2)], vec![int(3)]];
        assert!(matches!(solve_linear(&m, None), Err(NumError::DimensionMismatch(_))));
        let m = rows(&[&[1, 2]]);
        assert!(matches!(
            solve_linear(&m, Some(&[int(1), int(2)])),
            Err(NumError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn inhomogeneous_solve_and_inconsistency() {
        let m = rows(&[&[1, 1], &[1, -1]]);
        let s = solve_linear(&m, Some(&[int(3), int(1)])).unwrap();
        assert_eq!(s.particular, Some(vec![int(2), int(1)]));
        let m = rows(&[&[1, 1], &[2, 2]]);
        let s = solve_linear(&m, Some(&[int(1), int(3)])).unwrap();
        assert!(s.inconsistent);
    }

    #[test]
    fn determinant_and_inverse_agree() {
        let m = Mat::from_rows(&rows(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]])).unwrap();
        assert_eq!(m.det().unwrap(), int(18));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul_mat(&inv).unwrap(), Mat::identity(3));
    }

    #[test]
    fn numerical_rank_reports_gap() {
        let m = Mat::from_rows(&[
            vec![CFloat::new(1.0, 0.0), CFloat::new(0.0, 0.0)],
            vec![CFloat::new(0.0, 0.0), CFloat::new(1e-14, 0.0)],
        ])
        .unwrap();
        let r = numerical_rank(&m, RANK_GAP_THRESHOLD);
        assert_eq!(r.rank, 1);
        assert!(!r.ill_conditioned);
        let m = Mat::from_rows(&[
            vec![CFloat::new(1.0, 0.0), CFloat::new(0.0, 0.0)],
            vec![CFloat::new(0.0, 0.0), CFloat::new(3e-8, 0.0)],
        ])
        .unwrap();
        assert!(numerical_rank(&m, RANK_GAP_THRESHOLD).ill_conditioned);
    }
}
