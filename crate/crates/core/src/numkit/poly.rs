//! Sparse homogeneous multivariate polynomials and dense univariate ones.

use std::collections::BTreeMap;

use super::linalg::Mat;
use super::scalar::{CFloat, Rational, Scalar};
use super::NumError;

/// Exponent vector of a monomial.
pub type Exponent = Vec<u32>;

/// All exponent vectors of total degree `degree` in `nvars` variables, in
/// lexicographically decreasing order.
pub fn monomials(nvars: usize, degree: u32) -> Vec<Exponent> {
    fn rec(nvars: usize, degree: u32, prefix: &mut Exponent, out: &mut Vec<Exponent>) {
        if nvars == 1 {
            prefix.push(degree);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=degree).rev() {
            prefix.push(first);
            rec(nvars - 1, degree - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(nvars, degree, &mut Vec::new(), &mut out);
    out
}

/// Evaluates the monomial `x^e`.
pub fn eval_monomial<S: Scalar>(e: &[u32], x: &[S]) -> S {
    e.iter()
        .zip(x)
        .fold(S::one(), |acc, (&k, v)| acc * v.powi(k))
}

/// Homogeneous polynomial with a sparse term map. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<S> {
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Exponent, S>,
}

impl<S: Scalar> MultiPoly<S> {
    pub fn zero(nvars: usize, degree: u32) -> Self {
        MultiPoly {
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a polynomial, rejecting terms of the wrong length or degree.
    pub fn from_terms(
        nvars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Exponent, S)>,
    ) -> Result<Self, NumError> {
        let mut p = Self::zero(nvars, degree);
        for (e, c) in terms {
            if e.len() != nvars || e.iter().sum::<u32>() != degree {
                return Err(NumError::NotHomogeneous {
                    expected: degree,
                    exponent: e,
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars, 1);
        p.terms.insert(e, S::one());
        p
    }

    /// The linear form with the given covector.
    pub fn linear(coeffs: &[S]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n, 1);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        let mut p = Self::zero(nvars, 0);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The quadratic form `x^T m x` of a symmetric matrix.
    pub fn from_symmetric(m: &Mat<S>) -> Self {
        let n = m.rows();
        let mut p = Self::zero(n, 2);
        for i in 0..n {
            for j in i..n {
                let mut e = vec![0; n];
                e[i] += 1;
                e[j] += 1;
                let c = if i == j {
                    m[(i, i)].clone()
                } else {
                    m[(i, j)].clone() + m[(j, i)].clone()
                };
                p.add_term(e, c);
            }
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &[u32]) -> S {
        self.terms.get(e).cloned().unwrap_or_else(S::zero)
    }

    fn add_term(&mut self, e: Exponent, c: S) {
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&e) {
            Some(old) => old + c,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(e, merged);
        }
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(Scalar::modulus).fold(0.0, f64::max)
    }

    /// True when every coefficient is negligible relative to `scale`.
    pub fn is_negligible(&self, scale: f64, tol: f64) -> bool {
        self.terms.values().all(|c| c.is_negligible(scale, tol))
    }

    pub fn add(&self, other: &Self) -> Result<Self, NumError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NumError> {
        self.add(&other.scale(&-S::one()))
    }

    fn check_compatible(&self, other: &Self) -> Result<(), NumError> {
        if self.nvars != other.nvars || (self.degree != other.degree && !self.is_zero() && !other.is_zero()) {
            return Err(NumError::DimensionMismatch(format!(
                "adding degree {} in {} vars to degree {} in {} vars",
                self.degree, self.nvars, other.degree, other.nvars
            )));
        }
        Ok(())
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.nvars, self.degree);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, NumError> {
        if self.nvars != other.nvars {
            return Err(NumError::DimensionMismatch("multiplying polynomials in different rings".into()));
        }
        let mut out = Self::zero(self.nvars, self.degree + other.degree);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self, NumError> {
        let mut acc = Self::constant(self.nvars, S::one());
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn eval(&self, x: &[S]) -> Result<S, NumError> {
        if x.len() != self.nvars {
            return Err(NumError::DimensionMismatch(format!(
                "evaluating a {}-variable polynomial at a point of length {}",
                self.nvars,
                x.len()
            )));
        }
        Ok(self
            .terms
            .iter()
            .fold(S::zero(), |acc, (e, c)| acc + c.clone() * eval_monomial(e, x)))
    }

    /// Sum of absolute term values at `x`, used to scale residuals.
    pub fn eval_abs(&self, x: &[S]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.modulus() * eval_monomial(e, x).modulus())
            .sum()
    }

    /// Partial derivative in variable `i` (degree drops by one).
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.degree.saturating_sub(1));
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c.clone() * S::from_i64(e[i] as i64));
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    pub fn gradient_at(&self, x: &[S]) -> Result<Vec<S>, NumError> {
        self.gradient().iter().map(|g| g.eval(x)).collect()
    }

    /// Substitutes `x_i = sum_j columns[j][i] * y_j`: the result lives on the span
    /// of the given vectors with coordinates `y`.
    pub fn restrict_to_span(&self, columns: &[Vec<S>]) -> Result<Self, NumError> {
        if columns.iter().any(|c| c.len() != self.nvars) {
            return Err(NumError::DimensionMismatch("span vectors of the wrong length".into()));
        }
        let m = columns.len();
        let forms: Vec<Self> = (0..self.nvars)
            .map(|i| {
                let coeffs: Vec<S> = columns.iter().map(|c| c[i].clone()).collect();
                Self::linear(&coeffs)
            })
            .collect();
        let mut powers: Vec<Vec<Self>> = Vec::with_capacity(self.nvars);
        for f in &forms {
            let mut row = vec![Self::constant(m, S::one())];
            for k in 1..=self.degree {
                let next = row[(k - 1) as usize].mul(f)?;
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = Self::zero(m, self.degree);
        for (e, c) in &self.terms {
            let mut term = Self::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&powers[i][k as usize])?;
                }
            }
            for (te, tc) in term.terms {
                out.add_term(te, tc);
            }
        }
        Ok(out)
    }

    /// Exact division by a linear form; `None` if it does not divide.
    pub fn div_linear(&self, l: &Self) -> Option<Self> {
        if l.degree != 1 || l.nvars != self.nvars || self.degree == 0 {
            return None;
        }
        // pivot on the variable of the divisor's leading (lex-greatest) term
        let (lead_e, lead_c) = l.terms.iter().next_back()?;
        let var = lead_e.iter().position(|&k| k == 1)?;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars, self.degree - 1);
        while let Some((e, c)) = rem
            .terms
            .iter()
            .rev()
            .find(|(e, _)| e[var] > 0)
            .map(|(e, c)| (e.clone(), c.clone()))
        {
            let mut qe = e.clone();
            qe[var] -= 1;
            let qc = c / lead_c.clone();
            let mut mono = Self::zero(self.nvars, self.degree - 1);
            mono.add_term(qe.clone(), qc.clone());
            quot.add_term(qe, qc);
            let prod = mono.mul(l).ok()?;
            rem = rem.sub(&prod).ok()?;
        }
        if rem.is_zero() {
            Some(quot)
        } else {
            None
        }
    }

    /// Symmetric matrix of a quadratic form.
    pub fn quadratic_matrix(&self) -> Result<Mat<S>, NumError> {
        if self.degree != 2 {
            return Err(NumError::DimensionMismatch("not a quadratic form".into()));
        }
        let n = self.nvars;
        let two = S::from_i64(2);
        let mut m = Mat::zeros(n, n);
        for (e, c) in &self.terms {
            let idx: Vec<usize> = e
                .iter()
                .enumerate()
                .flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize))
                .collect();
            let (i, j) = (idx[0], idx[1]);
            if i == j {
                m[(i, i)] = c.clone();
            } else {
                m[(i, j)] = c.clone() / two.clone();
                m[(j, i)] = c.clone() / two.clone();
            }
        }
        Ok(m)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MultiPoly<T> {
        let mut out = MultiPoly::zero(self.nvars, self.degree);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    pub fn to_cfloat(&self) -> MultiPoly<CFloat> {
        self.map(Scalar::to_cfloat)
    }

    /// Degree in variable `i` (largest exponent appearing).
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// Homogeneity check of the term table.
    pub fn is_homogeneous(&self) -> bool {
        self.terms
            .keys()
            .all(|e| e.len() == self.nvars && e.iter().sum::<u32>() == self.degree)
    }
}

impl MultiPoly<Rational> {
    pub fn from_int_terms(nvars: usize, degree: u32, terms: &[(&[u32], i64)]) -> Result<Self, NumError> {
        Self::from_terms(
            nvars,
            degree,
            terms
                .iter()
                .map(|(e, c)| (e.to_vec(), Rational::from_i64(*c))),
        )
    }
}

/// Dense univariate polynomial, coefficients from the constant term upward.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> UniPoly<S> {
    /// Drops exact trailing zeros so the leading coefficient is nonzero.
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&S> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * S::from_i64(k as i64))
                .collect(),
        )
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(Scalar::modulus).fold(0.0, f64::max)
    }

    /// Removes trailing coefficients negligible relative to the largest one.
    pub fn trimmed(&self, tol: f64) -> Self {
        let scale = self.max_coeff();
        let mut c = self.coeffs.clone();
        while c.last().is_some_and(|x| x.is_negligible(scale, tol)) {
            c.pop();
        }
        UniPoly { coeffs: c }
    }

    /// Polynomial division with remainder.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), NumError> {
        let dd = divisor.degree().ok_or(NumError::Singular)?;
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::new(Vec::new()), self.clone()));
        }
        let mut quot = vec![S::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd].clone() / lead.clone();
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].clone() - q.clone() * dc.clone();
            }
            rem[k + dd] = S::zero();
            quot[k] = q;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Monic greatest common divisor; remainders below `tol` (relative) count as zero.
    pub fn gcd(&self, other: &Self, tol: f64) -> Self {
        let mut a = self.trimmed(tol);
        let mut b = other.trimmed(tol);
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        let scale = a.max_coeff().max(b.max_coeff());
        while !b.is_zero() {
            let (_, r) = match a.div_rem(&b) {
                Ok(qr) => qr,
                Err(_) => break,
            };
            let mut rc = r.coeffs.clone();
            while rc.last().is_some_and(|x| x.is_negligible(scale, tol)) {
                rc.pop();
            }
            a = b;
            b = UniPoly { coeffs: rc };
        }
        a.monic()
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) if !l.is_zero() => {
                let inv = S::one() / l.clone();
                Self::new(self.coeffs.iter().map(|c| c.clone() * inv.clone()).collect())
            }
            _ => self.clone(),
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> UniPoly<T> {
        UniPoly::new(self.coeffs.iter().map(f).collect())
    }
}

/// Homogeneous form of fixed degree in two variables `(u, v)`; coefficient `k`
/// multiplies `u^k v^(d-k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryForm<S> {
    degree: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> BinaryForm<S> {
    pub fn new(degree: usize, mut coeffs: Vec<S>) -> Result<Self, NumError> {
        if coeffs.len() > degree + 1 {
            if coeffs[degree + 1..].iter().any(|c| !c.is_zero()) {
                return Err(NumError::DimensionMismatch(format!(
                    "{} coefficients for a binary form of degree {degree}",
                    coeffs.len()
                )));
            }
            coeffs.truncate(degree + 1);
        }
        coeffs.resize(degree + 1, S::zero());
        Ok(BinaryForm { degree, coeffs })
    }

    /// Product of the linear forms `b_i u - a_i v`, vanishing at the points `(a_i : b_i)`.
    pub fn from_roots(roots: &[(S, S)]) -> Self {
        let mut coeffs = vec![S::one()];
        for (a, b) in roots {
            let mut next = vec![S::zero(); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] = next[k + 1].clone() + c.clone() * b.clone();
                next[k] = next[k].clone() - c.clone() * a.clone();
            }
            coeffs = next;
        }
        BinaryForm {
            degree: roots.len(),
            coeffs,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, u: &S, v: &S) -> S {
        self.coeffs.iter().enumerate().fold(S::zero(), |acc, (k, c)| {
            acc + c.clone() * u.powi(k as u32) * v.powi((self.degree - k) as u32)
        })
    }

    /// Dehomogenization `v = 1`, as a polynomial in `u`.
    pub fn dehomogenize(&self) -> UniPoly<S> {
        UniPoly::new(self.coeffs.clone())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> BinaryForm<T> {
        BinaryForm {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::numkit::scalar::{int, rat};

    fn cubic_example() -> MultiPoly<Rational> {
        // x^3 + 2 x y z - z^3
        MultiPoly::from_int_terms(3, 3, &[(&[3, 0, 0], 1), (&[1, 1, 1], 2), (&[0, 0, 3], -1)]).unwrap()
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(4, 2).len(), 10);
        assert_eq!(monomials(5, 3).len(), 35);
        assert!(monomials(3, 4).iter().all(|e| e.iter().sum::<u32>() == 4));
    }

    #[test]
    fn non_homogeneous_terms_are_rejected() {
        let err = MultiPoly::from_int_terms(2, 2, &[(&[1, 0], 1)]).unwrap_err();
        assert!(matches!(err, NumError::NotHomogeneous { .. }));
    }

    #[test]
    fn restriction_agrees_with_pointwise_evaluation() {
        let f = cubic_example();
        let cols = vec![vec![int(1), int(2), int(0)], vec![int(0), int(1), int(-3)]];
        let g = f.restrict_to_span(&cols).unwrap();
        assert_eq!(g.nvars(), 2);
        assert!(g.is_homogeneous());
        for (s, t) in [(1, 2), (-3, 5), (7, 0)] {
            let x: Vec<Rational> = (0..3)
                .map(|i| int(s) * cols[0][i].clone() + int(t) * cols[1][i].clone())
                .collect();
            assert_eq!(g.eval(&[int(s), int(t)]).unwrap(), f.eval(&x).unwrap());
        }
    }

    #[test]
    fn linear_division_round_trips() {
        let l = MultiPoly::linear(&[int(1), int(-2), int(3)]);
        let q = cubic_example().partial(0);
        let prod = l.mul(&q).unwrap();
        assert_eq!(prod.div_linear(&l), Some(q));
        assert_eq!(cubic_example().div_linear(&l), None);
    }

    #[test]
    fn quadratic_matrix_round_trip() {
        let q = MultiPoly::from_int_terms(3, 2, &[(&[2, 0, 0], 1), (&[1, 1, 0], 3), (&[0, 0, 2], -1)]).unwrap();
        let m = q.quadratic_matrix().unwrap();
        assert_eq!(m[(0, 1)], rat(3, 2));
        assert_eq!(MultiPoly::from_symmetric(&m), q);
    }

    #[test]
    fn univariate_gcd_exact() {
        // (x - 1)(x + 2) and (x - 1)(x - 5)
        let a = UniPoly::new(vec![int(-2), int(1), int(1)]);
        let b = UniPoly::new(vec![int(5), int(-6), int(1)]);
        assert_eq!(a.gcd(&b, 0.0), UniPoly::new(vec![int(-1), int(1)]));
    }

    #[test]
    fn binary_form_from_roots_vanishes_there() {
        let f = BinaryForm::from_roots(&[(int(1), int(2)), (int(1), int(0)), (int(-3), int(1))]);
        assert_eq!(f.degree(), 3);
        assert!(f.eval(&int(1), &int(2)).is_zero());
        assert!(f.eval(&int(1), &int(0)).is_zero());
        assert!(f.eval(&int(-3), &int(1)).is_zero());
        assert!(!f.eval(&int(1), &int(1)).is_zero());
    }

    fn random_form(coeffs: &[i64], degree: u32) -> MultiPoly<Rational> {
        let mons = monomials(3, degree);
        let terms: Vec<(&[u32], i64)> = mons.iter().zip(coeffs).map(|(e, &c)| (e.as_slice(), c)).collect();
        MultiPoly::from_int_terms(3, degree, &terms).unwrap()
    }

    fn homogeneous_of(p: &MultiPoly<Rational>, d: u32) -> bool {
        p.is_homogeneous() && p.terms().all(|(e, _)| e.iter().sum::<u32>() == d)
    }

    proptest::proptest! {
        #[test]
        fn operations_preserve_degree(
            a in proptest::collection::vec(-5i64..6, 6),
            b in proptest::collection::vec(-5i64..6, 6),
            c in proptest::collection::vec(-5i64..6, 10),
            l in proptest::array::uniform3(-3i64..4),
        ) {
            let (f, g, h) = (random_form(&a, 2), random_form(&b, 2), random_form(&c, 3));
            proptest::prop_assert!(homogeneous_of(&f.add(&g).unwrap(), 2));
            proptest::prop_assert!(homogeneous_of(&f.sub(&g).unwrap(), 2));
            proptest::prop_assert!(homogeneous_of(&f.mul(&h).unwrap(), 5));
            proptest::prop_assert!(homogeneous_of(&h.pow(2).unwrap(), 6));
            proptest::prop_assert!(homogeneous_of(&h.partial(0), 2));
            proptest::prop_assert!(homogeneous_of(&f.scale(&rat(3, 7)), 2));
            let span = vec![vec![int(l[0]), int(1), int(0)], vec![int(0), int(l[1]), int(1)]];
            let r = h.restrict_to_span(&span).unwrap();
            proptest::prop_assert!(r.is_zero() || homogeneous_of(&r, 3));
        }
    }
}
