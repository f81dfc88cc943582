//! Elimination for a pair of plane curves: resultants and shared linear factors.
//!
//! Both routines evaluate the Sylvester determinants at sample values of the
//! remaining variables and interpolate, so the same code runs in both regimes.


use super::linalg::Mat;
use super::poly::{BinaryForm, MultiPoly, UniPoly};
use super::scalar::{CFloat, Scalar};
use super::NumError;

/// Coefficients (constant term first) of `f` as a polynomial in variable `var`,
/// after substituting the other variables.
fn coefficients_in<S: Scalar>(f: &MultiPoly<S>, var: usize, others: &[(usize, S)]) -> Vec<S> {
    let deg = f.degree_in(var) as usize;
    let mut c = vec![S::zero(); deg + 1];
    for (e, coef) in f.terms() {
        let mut v = coef.clone();
        for (i, x) in others {
            v = v * x.powi(e[*i]);
        }
        let k = e[var] as usize;
        c[k] = c[k].clone() + v;
    }
    c
}

/// Sylvester matrix of two univariate polynomials with the given formal degrees.
fn sylvester<S: Scalar>(f: &[S], g: &[S], df: usize, dg: usize) -> Mat<S> {
    let n = df + dg;
    let mut m = Mat::zeros(n, n);
    // columns ordered from the top power downward
    for r in 0..dg {
        for k in 0..=df {
            m[(r, r + df - k)] = f.get(k).cloned().unwrap_or_else(S::zero);
        }
    }
    for r in 0..df {
        for k in 0..=dg {
            m[(dg + r, r + dg - k)] = g.get(k).cloned().unwrap_or_else(S::zero);
        }
    }
    m
}

fn interpolation_nodes<S: Scalar>(count: usize) -> Vec<S> {
    (0..count).map(|k| S::interpolation_node(k, count)).collect()
}

/// Interpolates the polynomial of degree `< nodes.len()` through the samples.
fn interpolate<S: Scalar>(nodes: &[S], values: &[S]) -> Result<Vec<S>, NumError> {
    let n = nodes.len();
    let mut vand = Mat::zeros(n, n);
    for (i, x) in nodes.iter().enumerate() {
        for j in 0..n {
            vand[(i, j)] = x.powi(j as u32);
        }
    }
    vand.solve(values)?.ok_or(NumError::Singular)
}

/// The two variable indices other than `var` among three.
fn remaining_pair(var: usize) -> (usize, usize) {
    match var {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Resultant of two ternary forms with respect to `var`. The result is a binary
/// form in the remaining two variables `(u, v)` in index order, with
/// coefficient `k` on `u^k v^(D-k)`.
pub fn resultant<S: Scalar>(
    f: &MultiPoly<S>,
    g: &MultiPoly<S>,
    var: usize,
) -> Result<BinaryForm<S>, NumError> {
    if f.nvars() != 3 || g.nvars() != 3 || var > 2 {
        return Err(NumError::DimensionMismatch(
            "resultant expects two forms on a projective plane".into(),
        ));
    }
    let (m, n) = (f.degree() as usize, g.degree() as usize);
    let (k, l) = (f.degree_in(var) as usize, g.degree_in(var) as usize);
    let out_degree = m * l + n * k - k * l;
    let (u, v) = remaining_pair(var);
    let nodes: Vec<S> = interpolation_nodes(out_degree + 1);
    let mut values = Vec::with_capacity(nodes.len());
    for t in &nodes {
        let subs = [(u, t.clone()), (v, S::one())];
        let fc = coefficients_in(f, var, &subs);
        let gc = coefficients_in(g, var, &subs);
        let det = if k + l == 0 {
            S::one()
        } else {
            sylvester(&fc, &gc, k, l).det()?
        };
        values.push(det);
    }
    let coeffs = interpolate(&nodes, &values)?;
    BinaryForm::new(out_degree, coeffs)
}

/// A linear form shared by a conic and a cubic, with the evidence for the call.
#[derive(Clone, Debug, PartialEq)]
pub struct CommonFactor<S> {
    /// Covector of the shared line.
    pub form: Vec<S>,
    /// Relative size of the resultant (0 in the exact regime when it vanishes).
    pub resultant_size: f64,
}

const GENERIC_SHIFTS: [(i64, i64); 10] = [
    (0, 0),
    (1, 2),
    (2, -1),
    (-3, 1),
    (1, 5),
    (4, 3),
    (-2, -5),
    (7, -3),
    (3, 8),
    (-6, 7),
];

/// Change of coordinates `x = T y` moving the eliminated variable's point to `(a, b, 1)`.
fn shift_matrix<S: Scalar>(a: i64, b: i64) -> Mat<S> {
    let mut t = Mat::identity(3);
    t[(0, 2)] = S::from_i64(a);
    t[(1, 2)] = S::from_i64(b);
    t
}

fn transform<S: Scalar>(f: &MultiPoly<S>, t: &Mat<S>) -> Result<MultiPoly<S>, NumError> {
    let cols: Vec<Vec<S>> = (0..3).map(|j| t.col(j)).collect();
    f.restrict_to_span(&cols)
}

/// Finds a linear form dividing both a conic `f` and a cubic `g`.
///
/// Uses the first subresultant: when the resultant vanishes and the gcd is a
/// line, `S_1 = c(u, v) * L`, so `L` is recovered as `S_1 / gcd(coefficients)`.
/// In the float regime, quantities below `tol` (relative) count as zero.
pub fn common_factor<S: Scalar>(
    f: &MultiPoly<S>,
    g: &MultiPoly<S>,
    tol: f64,
) -> Result<Option<CommonFactor<S>>, NumError> {
    if f.nvars() != 3 || g.nvars() != 3 {
        return Err(NumError::DimensionMismatch("expected ternary forms".into()));
    }
    for (a, b) in GENERIC_SHIFTS {
        let t = shift_matrix::<S>(a, b);
        let pt = [S::from_i64(a), S::from_i64(b), S::one()];
        let fa = f.eval(&pt)?;
        let ga = g.eval(&pt)?;
        if fa.is_negligible(f.max_coeff(), tol) || ga.is_negligible(g.max_coeff(), tol) {
            continue;
        }
        let ft = transform(f, &t)?;
        let gt = transform(g, &t)?;
        let res = resultant(&ft, &gt, 2)?;
        let scale = ft.max_coeff().powi(gt.degree() as i32) * gt.max_coeff().powi(ft.degree() as i32);
        let size = res
            .coeffs()
            .iter()
            .map(Scalar::modulus)
            .fold(0.0, f64::max)
            / scale.max(f64::MIN_POSITIVE);
        let vanishes = res.coeffs().iter().all(|c| c.is_negligible(scale, tol));
        if !vanishes {
            return Ok(None);
        }
        let Some(form_t) = linear_factor_from_subresultant(&ft, &gt, tol)? else {
            return Ok(None);
        };
        // back to the original coordinates: L(x) = L_t(T^{-1} x)
        let tinv = t.inverse()?;
        let form = tinv.transpose().mul_vec(&form_t)?;
        let mut form = form;
        S::normalize_projective(&mut form);
        let l = MultiPoly::linear(&form);
        let divides = |p: &MultiPoly<S>| -> bool {
            if S::EXACT {
                p.div_linear(&l).is_some()
            } else {
                line_residual(p, &form) <= tol.sqrt()
            }
        };
        if !divides(f) || !divides(g) {
            return Ok(None);
        }
        return Ok(Some(CommonFactor {
            form,
            resultant_size: if S::EXACT { 0.0 } else { size },
        }));
    }
    Err(NumError::NoGenericChart)
}

/// Largest relative value of `p` on the line `form = 0`, sampled at a few points.
pub fn line_residual<S: Scalar>(p: &MultiPoly<S>, form: &[S]) -> f64 {
    let cov = Mat::from_rows(&[form.to_vec()]).expect("single row");
    let basis = cov.kernel();
    if basis.len() != 2 {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for (s, t) in [(1, 0), (0, 1), (1, 1), (2, -3), (-5, 7)] {
        let x: Vec<S> = (0..3)
            .map(|i| S::from_i64(s) * basis[0][i].clone() + S::from_i64(t) * basis[1][i].clone())
            .collect();
        let v = p.eval(&x).map(|v| v.modulus()).unwrap_or(f64::INFINITY);
        let size = x.iter().map(Scalar::modulus).fold(0.0, f64::max);
        let scale = (p.max_coeff() * size.powi(p.degree() as i32)).max(f64::MIN_POSITIVE);
        worst = worst.max(v / scale);
    }
    worst
}

/// `S_1 = A z + B` for a conic and a cubic with nonzero leading coefficients in
/// `z`; returns the covector of `S_1 / gcd(A, B)` when that is linear.
fn linear_factor_from_subresultant<S: Scalar>(
    f: &MultiPoly<S>,
    g: &MultiPoly<S>,
    tol: f64,
) -> Result<Option<Vec<S>>, NumError> {
    let (k, l) = (f.degree_in(2) as usize, g.degree_in(2) as usize);
    if k == 0 || l == 0 {
        return Ok(None);
    }
    // S_1 rows: l-1 shifts of f, k-1 shifts of g; columns z^(k+l-2) .. z^0
    let rows = k + l - 2;
    let cols = k + l - 1;
    let nodes: Vec<S> = interpolation_nodes(f.degree() as usize * g.degree() as usize + 2);
    let mut a_vals = Vec::new();
    let mut b_vals = Vec::new();
    for t in &nodes {
        let subs = [(0, t.clone()), (1, S::one())];
        let fc = coefficients_in(f, 2, &subs);
        let gc = coefficients_in(g, 2, &subs);
        let mut m = Mat::zeros(rows, cols);
        for r in 0..l - 1 {
            for (p, c) in fc.iter().enumerate() {
                m[(r, r + k - p)] = c.clone();
            }
        }
        for r in 0..k - 1 {
            for (p, c) in gc.iter().enumerate() {
                m[(l - 1 + r, r + l - p)] = c.clone();
            }
        }
        // leading rows-1 columns fixed, last column chosen for z^1 or z^0
        let pick = |last: usize| -> Result<S, NumError> {
            let mut sq = Mat::zeros(rows, rows);
            for i in 0..rows {
                for j in 0..rows - 1 {
                    sq[(i, j)] = m[(i, j)].clone();
                }
                sq[(i, rows - 1)] = m[(i, last)].clone();
            }
            sq.det()
        };
        a_vals.push(pick(cols - 2)?);
        b_vals.push(pick(cols - 1)?);
    }
    let a = UniPoly::new(interpolate(&nodes, &a_vals)?).trimmed(tol);
    let b = UniPoly::new(interpolate(&nodes, &b_vals)?).trimmed(tol);
    if a.is_zero() {
        return Ok(None);
    }
    let c = a.gcd(&b, tol);
    let (qa, ra) = a.div_rem(&c)?;
    let (qb, rb) = b.div_rem(&c)?;
    let scale = a.max_coeff().max(b.max_coeff());
    let clean = |r: &UniPoly<S>| r.coeffs().iter().all(|x| x.is_negligible(scale, tol.sqrt()));
    if !clean(&ra) || !clean(&rb) {
        return Ok(None);
    }
    let qa = qa.trimmed(tol);
    let qb = qb.trimmed(tol);
    if qa.degree() != Some(0) || qb.degree().unwrap_or(0) > 1 {
        return Ok(None);
    }
    // dehomogenized at (t, 1, z): L = qb1 * x + qb0 * y + qa0 * z
    let qb0 = qb.coeffs().first().cloned().unwrap_or_else(S::zero);
    let qb1 = qb.coeffs().get(1).cloned().unwrap_or_else(S::zero);
    Ok(Some(vec![qb1, qb0, qa.coeffs()[0].clone()]))
}

/// Relative residual of a form at a point: `|f(x)| / (max|coeff| * |x|^deg)`.
pub fn form_residual<S: Scalar>(f: &MultiPoly<S>, x: &[S]) -> f64 {
    let size = x.iter().map(Scalar::modulus).fold(0.0, f64::max);
    let v = f.eval(x).map(|v| v.modulus()).unwrap_or(f64::INFINITY);
    v / (f.max_coeff() * size.powi(f.degree() as i32)).max(f64::MIN_POSITIVE)
}

/// A root `z` of `f(u, v, z)` shared with `g(u, v, z)`: the root of `f` closest
/// to the common root read off the null vector of the Sylvester matrix.
pub fn lift_root(f: &MultiPoly<CFloat>, g: &MultiPoly<CFloat>, u: CFloat, v: CFloat) -> Option<CFloat> {
    let c = coefficients_in(f, 2, &[(0, u), (1, v)]);
    let cg = coefficients_in(g, 2, &[(0, u), (1, v)]);
    let (df, dg) = (c.len() - 1, cg.len() - 1);
    let target = if df > 0 && dg > 0 {
        // the null vector is proportional to (z^(n-1), ..., z, 1)
        let w = super::linalg::null_vector(&sylvester(&c, &cg, df, dg));
        let n = w.len();
        let i = (0..n - 1).max_by(|&a, &b| w[a + 1].norm().total_cmp(&w[b + 1].norm()))?;
        Some(w[i] / w[i + 1])
    } else {
        None
    };
    let poly = UniPoly::new(c);
    let cands: Vec<CFloat> = match poly.degree() {
        Some(0) | None => return None,
        Some(_) => super::roots::univariate_roots(&poly, &super::roots::RootOptions::default())
            .ok()?
            .into_iter()
            .map(|r| r.value)
            .collect(),
    };
    if let Some(t) = target.filter(|t| t.is_finite()) {
        return cands.into_iter().min_by(|a, b| (a - t).norm().total_cmp(&(b - t).norm()));
    }
    cands.into_iter().min_by(|z1, z2| {
        let r1 = g.eval(&[u, v, *z1]).map(|x| x.norm()).unwrap_or(f64::INFINITY);
        let r2 = g.eval(&[u, v, *z2]).map(|x| x.norm()).unwrap_or(f64::INFINITY);
        r1.total_cmp(&r2)
    })
}

/// Newton refinement of a common zero of two plane curves, in the affine chart
/// of the largest coordinate. Returns the refined point and its residual.
pub fn refine_plane_point(
    f: &MultiPoly<CFloat>,
    g: &MultiPoly<CFloat>,
    x: &[CFloat],
    iterations: usize,
) -> (Vec<CFloat>, f64) {
    let mut x = x.to_vec();
    CFloat::normalize_projective(&mut x);
    let residual = |x: &[CFloat]| form_residual(f, x).max(form_residual(g, x));
    let mut best = (x.clone(), residual(&x));
    let fg = [f.gradient(), g.gradient()];
    for _ in 0..iterations {
        let chart = (0..3)
            .max_by(|&i, &j| x[i].norm().total_cmp(&x[j].norm()))
            .expect("three coordinates");
        let free: Vec<usize> = (0..3).filter(|&i| i != chart).collect();
        let vals = [f.eval(&x).expect("3 vars"), g.eval(&x).expect("3 vars")];
        let mut jac = [[CFloat::new(0.0, 0.0); 2]; 2];
        for (r, grad) in fg.iter().enumerate() {
            for (c, &k) in free.iter().enumerate() {
                jac[r][c] = grad[k].eval(&x).expect("3 vars");
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.norm() == 0.0 || !det.is_finite() {
            break;
        }
        let d0 = (vals[0] * jac[1][1] - vals[1] * jac[0][1]) / det;
        let d1 = (jac[0][0] * vals[1] - jac[1][0] * vals[0]) / det;
        x[free[0]] -= d0;
        x[free[1]] -= d1;
        CFloat::normalize_projective(&mut x);
        let r = residual(&x);
        if r < best.1 {
            best = (x.clone(), r);
        }
        if r < 1e-15 {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::scalar::{int, CFloat, Rational};

    fn p3(terms: &[(&[u32], i64)], degree: u32) -> MultiPoly<Rational> {
        MultiPoly::from_int_terms(3, degree, terms).unwrap()
    }

    #[test]
    fn axis_example_gives_pure_power() {
        // f = x y, g = x^3 + y^3, eliminate y: Res = x^6 (in the (x, z) pair)
        let f = p3(&[(&[1, 1, 0], 1)], 2);
        let g = p3(&[(&[3, 0, 0], 1), (&[0, 3, 0], 1)], 3);
        let r = resultant(&f, &g, 1).unwrap();
        assert_eq!(r.degree(), 6);
        let mut want = vec![int(0); 7];
        want[6] = int(1);
        assert_eq!(r.coeffs(), &want[..]);
    }

    #[test]
    fn shared_line_makes_resultant_vanish() {
        // f = x (x + y + z), g = x (y^2 + z^2)
        let f = p3(&[(&[2, 0, 0], 1), (&[1, 1, 0], 1), (&[1, 0, 1], 1)], 2);
        let g = p3(&[(&[1, 2, 0], 1), (&[1, 0, 2], 1)], 3);
        assert!(resultant(&f, &g, 0).unwrap().is_zero());
        // a shared factor free of the eliminated variable leaves it nonzero
        assert!(!resultant(&f, &g, 2).unwrap().is_zero());
    }

    #[test]
    fn exact_factor_with_shifted_chart() {
        let f = p3(&[(&[2, 0, 0], 1), (&[1, 1, 0], -2), (&[1, 0, 1], 3)], 2);
        let g = p3(&[(&[1, 2, 0], 1), (&[1, 0, 2], 1), (&[1, 1, 1], 5)], 3);
        let cf = common_factor(&f, &g, 0.0).unwrap().unwrap();
        assert_eq!(cf.form, vec![int(1), int(0), int(0)]);
    }

    #[test]
    fn common_factor_finds_x() {
        let f = p3(&[(&[1, 1, 0], 1)], 2);
        let g = p3(&[(&[1, 2, 0], 1), (&[1, 0, 2], 1)], 3);
        let cf = common_factor(&f, &g, 0.0).unwrap().unwrap();
        assert_eq!(cf.form, vec![int(1), int(0), int(0)]);
    }

    #[test]
    fn generic_pair_has_no_factor() {
        let f = p3(&[(&[2, 0, 0], 1), (&[0, 2, 0], 1), (&[0, 0, 2], -1)], 2);
        let g = p3(&[(&[3, 0, 0], 1), (&[0, 1, 2], -1)], 3);
        assert_eq!(common_factor(&f, &g, 0.0).unwrap(), None);
    }

    #[test]
    fn float_regime_detects_factor_within_tolerance() {
        let f = p3(&[(&[2, 0, 0], 1), (&[1, 1, 0], -2), (&[1, 0, 1], 3)], 2).to_cfloat();
        let g = p3(&[(&[1, 2, 0], 1), (&[1, 0, 2], 1), (&[1, 1, 1], 5)], 3).to_cfloat();
        let cf = common_factor(&f, &g, 1e-9).unwrap().unwrap();
        let ratio = cf.form[1] / cf.form[0];
        assert!(ratio.norm() < 1e-9 && (cf.form[2] / cf.form[0]).norm() < 1e-9);
        let _: CFloat = cf.form[0];
    }

    #[test]
    fn conic_and_cuspidal_cubic_meet_in_six_points() {
        // x^2 + y^2 - z^2 and x^3 - z^2 y; eliminating y leaves x^6 + x^2 z^4 - z^6
        let f = p3(&[(&[2, 0, 0], 1), (&[0, 2, 0], 1), (&[0, 0, 2], -1)], 2);
        let g = p3(&[(&[3, 0, 0], 1), (&[0, 1, 2], -1)], 3);
        let r = resultant(&f, &g, 1).unwrap();
        let c = r.coeffs();
        assert_eq!(r.degree(), 6);
        let lead = c[6].clone();
        let want = [-1, 0, 1, 0, 0, 0, 1];
        for k in 0..7 {
            assert_eq!(c[k].clone(), lead.clone() * int(want[k]));
        }
        // oracle: Newton on the affine system z = 1 from a grid of seeds
        let mut sols: Vec<(CFloat, CFloat)> = Vec::new();
        for (a, b) in itertools::iproduct!(-4..=4, -4..=4) {
            let mut x = CFloat::new(a as f64 * 0.3 + 0.01, b as f64 * 0.3 + 0.02);
            let mut y = CFloat::new(0.5, -0.1) - x;
            for _ in 0..80 {
                let (f1, f2) = (x * x + y * y - 1.0, x * x * x - y);
                let (a11, a12, a21, a22) = (2.0 * x, 2.0 * y, 3.0 * x * x, CFloat::new(-1.0, 0.0));
                let det = a11 * a22 - a12 * a21;
                if det.norm() < 1e-14 {
                    break;
                }
                x -= (f1 * a22 - f2 * a12) / det;
                y -= (a11 * f2 - a21 * f1) / det;
            }
            if (x * x + y * y - 1.0).norm() < 1e-12 && (x * x * x - y).norm() < 1e-12 && !sols.iter().any(|s| (s.0 - x).norm() < 1e-8) {
                sols.push((x, y));
            }
        }
        assert_eq!(sols.len(), 6);
        let rf: Vec<CFloat> = c.iter().map(|v| v.to_cfloat()).collect();
        let roots = crate::numkit::roots::binary_roots(&rf, &Default::default()).unwrap();
        assert_eq!(roots.len(), 6);
        for (x, _) in &sols {
            // roots come as (t, s) with the form in t^k s^(6-k), t = x, s = z
            assert!(roots.iter().any(|(t, s, m)| *m == 1 && (t / s - x).norm() < 1e-9));
        }
    }

    fn linear_times(l: &[i64; 3], q: &MultiPoly<Rational>) -> MultiPoly<Rational> {
        MultiPoly::linear(&l.iter().map(|&c| int(c)).collect::<Vec<_>>()).mul(q).unwrap()
    }

    fn form(coeffs: &[i64], degree: u32) -> MultiPoly<Rational> {
        let mons = crate::numkit::poly::monomials(3, degree);
        let terms: Vec<(&[u32], i64)> = mons.iter().zip(coeffs).map(|(e, &c)| (e.as_slice(), c)).collect();
        MultiPoly::from_int_terms(3, degree, &terms).unwrap()
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

        #[test]
        fn shared_factor_pairs_have_zero_resultant(
            l in proptest::array::uniform3(-4i64..5),
            a in proptest::collection::vec(-4i64..5, 3),
            b in proptest::collection::vec(-4i64..5, 6),
        ) {
            proptest::prop_assume!(l.iter().any(|&c| c != 0));
            let (fa, fb) = (form(&a, 1), form(&b, 2));
            proptest::prop_assume!(!fa.is_zero() && !fb.is_zero());
            let f = linear_times(&l, &fa);
            let g = linear_times(&l, &fb);
            let found = common_factor(&f, &g, 0.0).unwrap();
            proptest::prop_assert!(found.is_some());
            // a variable present in the shared line is eliminated with zero resultant
            let var = (0..3).find(|&i| l[i] != 0).unwrap();
            proptest::prop_assert!(resultant(&f, &g, var).unwrap().is_zero());
        }

        #[test]
        fn zero_resultant_in_every_variable_means_a_factor(
            a in proptest::collection::vec(-3i64..4, 6),
            b in proptest::collection::vec(-3i64..4, 10),
        ) {
            let (f, g) = (form(&a, 2), form(&b, 3));
            proptest::prop_assume!(!f.is_zero() && !g.is_zero());
            let vanish = (0..3).all(|v| resultant(&f, &g, v).map(|r| r.is_zero()).unwrap_or(false));
            let found = common_factor(&f, &g, 0.0).map(|c| c.is_some()).unwrap_or(false);
            if vanish {
                // a shared component of higher degree is possible; a factor must show up then
                proptest::prop_assert!(found || f.degree() > 1);
            } else {
                proptest::prop_assert!(!found);
            }
        }
    }
}
