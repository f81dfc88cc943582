//! Lines through a point of a cubic threefold in P^4.
//!
//! Around `p` write `x = y0 p + sum y_i v_i`; then
//! `F(x) = y0^2 F1(y) + y0 F2(y) + F3(y)`, and lines through `p` are the
//! directions with `F1 = F2 = F3 = 0`: a conic and a cubic in the plane `F1 = 0`.

use itertools::Itertools;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::elim::{common_factor, form_residual, lift_root, refine_plane_point, resultant};
use crate::numkit::linalg::Mat;
use crate::numkit::poly::{monomials, MultiPoly};
use crate::numkit::roots::{binary_roots, univariate_roots, RootOptions};
use crate::numkit::scalar::{CFloat, Rational, Scalar};
use crate::projgeom::{quadric_rank, vector_distance, ProjLine, ProjPoint, QuadricForm, RankCall};
use crate::sample::{small_int, SeededRng};
use crate::segre::NodalCubic;

/// Relative residual accepted for a float point on a hypersurface.
pub const ON_CUBIC_TOL: f64 = 1e-10;
/// Plücker distance under which marked lines are merged.
pub const COINCIDENCE_RADIUS: f64 = 1e-6;

/// A cubic form in five variables.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicThreefold<S> {
    form: MultiPoly<S>,
}

impl<S: Scalar> CubicThreefold<S> {
    pub fn new(form: MultiPoly<S>) -> Result<Self> {
        if form.nvars() != 5 || form.degree() != 3 || form.is_zero() {
            return Err(Error::Degenerate("expected a nonzero cubic form in 5 variables".into()));
        }
        Ok(CubicThreefold { form })
    }

    pub fn form(&self) -> &MultiPoly<S> {
        &self.form
    }

    pub fn residual(&self, x: &[S]) -> f64 {
        form_residual(&self.form, x)
    }

    pub fn contains(&self, x: &[S]) -> bool {
        if S::EXACT {
            self.form.eval(x).map(|v| v.is_zero()).unwrap_or(false)
        } else {
            self.residual(x) <= ON_CUBIC_TOL
        }
    }

    pub fn to_cfloat(&self) -> CubicThreefold<CFloat> {
        CubicThreefold {
            form: self.form.to_cfloat(),
        }
    }
}

/// A cubic with independent random integer coefficients in `[-bound, bound]`.
pub fn random_cubic(rng: &mut SeededRng, bound: i64) -> CubicThreefold<Rational> {
    loop {
        let terms: Vec<(Vec<u32>, i64)> = monomials(5, 3).into_iter().map(|e| (e, small_int(rng, bound))).collect();
        let refs: Vec<(&[u32], i64)> = terms.iter().map(|(e, c)| (e.as_slice(), *c)).collect();
        let form = MultiPoly::from_int_terms(5, 3, &refs).expect("homogeneous by construction");
        if let Ok(c) = CubicThreefold::new(form) {
            return c;
        }
    }
}

/// A point of the cubic on a random rational line; the only inexact step is
/// the root of the restricted binary cubic.
pub fn point_on_cubic(f: &CubicThreefold<Rational>, rng: &mut SeededRng) -> Result<Vec<CFloat>> {
    for _ in 0..32 {
        let a: Vec<Rational> = (0..5).map(|_| Rational::from_i64(small_int(rng, 9))).collect();
        let b: Vec<Rational> = (0..5).map(|_| Rational::from_i64(small_int(rng, 9))).collect();
        let restricted = f.form.restrict_to_span(&[a.clone(), b.clone()])?;
        // coefficient of s^(3-k) t^k
        let coeffs: Vec<CFloat> = (0..=3u32).map(|k| restricted.coeff(&[3 - k, k]).to_cfloat()).collect();
        let poly = crate::numkit::poly::UniPoly::new(coeffs);
        if poly.degree() != Some(3) {
            continue;
        }
        let roots = match univariate_roots(&poly, &RootOptions::default()) {
            Ok(r) => r,
            Err(_) => continue,
        };
        let t = roots[rng.gen_range(0..roots.len())].value;
        let x: Vec<CFloat> = a.iter().zip(&b).map(|(p, q)| p.to_cfloat() + t * q.to_cfloat()).collect();
        let fc = f.to_cfloat();
        if fc.residual(&x) <= ON_CUBIC_TOL && fc.form.gradient_at(&x)?.iter().any(|g| g.norm() > 1e-8) {
            return Ok(x);
        }
    }
    Err(Error::NoCandidate("no usable point on the cubic".into()))
}

/// `F1`, `F2`, `F3` of a cubic around a point, in a frame completing the point.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalExpansion<S> {
    pub point: Vec<S>,
    /// Four vectors completing `point` to a basis.
    pub frame: Vec<Vec<S>>,
    pub f1: MultiPoly<S>,
    pub f2: MultiPoly<S>,
    pub f3: MultiPoly<S>,
}

impl<S: Scalar> LocalExpansion<S> {
    pub fn is_singular(&self) -> bool {
        self.f1.is_negligible(1.0, 1e-12) || self.f1.is_zero()
    }

    /// Ambient vector `sum d_i v_i` of a direction.
    pub fn ambient(&self, d: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); 5];
        for (di, v) in d.iter().zip(&self.frame) {
            for k in 0..5 {
                out[k] = out[k].clone() + di.clone() * v[k].clone();
            }
        }
        out
    }

    /// Direction part of an ambient vector (drops the `point` component).
    pub fn direction(&self, x: &[S]) -> Result<Vec<S>> {
        let mut cols = vec![self.point.clone()];
        cols.extend(self.frame.iter().cloned());
        let m = Mat::from_cols(&cols)?;
        let c = m.solve(x)?.ok_or(Error::Degenerate("frame is singular".into()))?;
        Ok(c[1..].to_vec())
    }

    /// Checks `F(y0 p + v) = y0^2 F1 + y0 F2 + F3` at a probe.
    pub fn probe_residual(&self, f: &MultiPoly<S>, y0: &S, d: &[S]) -> Result<f64> {
        let mut x = self.ambient(d);
        for (xi, pi) in x.iter_mut().zip(&self.point) {
            *xi = xi.clone() + y0.clone() * pi.clone();
        }
        let lhs = f.eval(&x)?;
        let rhs = y0.clone() * y0.clone() * self.f1.eval(d)? + y0.clone() * self.f2.eval(d)? + self.f3.eval(d)?;
        Ok((lhs - rhs).modulus())
    }
}

pub fn local_expand<S: Scalar>(f: &CubicThreefold<S>, p: &[S]) -> Result<LocalExpansion<S>> {
    if p.len() != 5 {
        return Err(Error::Degenerate("point must have 5 coordinates".into()));
    }
    if !f.contains(p) {
        return Err(Error::NotOnHypersurface(f.residual(p)));
    }
    let pivot = (0..5).max_by(|&i, &j| p[i].modulus().total_cmp(&p[j].modulus())).expect("nonempty");
    let frame: Vec<Vec<S>> = (0..5)
        .filter(|&j| j != pivot)
        .map(|j| {
            let mut e = vec![S::zero(); 5];
            e[j] = S::one();
            e
        })
        .collect();
    let mut cols = vec![p.to_vec()];
    cols.extend(frame.iter().cloned());
    let g = f.form.restrict_to_span(&cols)?;
    let mut parts: [Vec<(Vec<u32>, S)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (e, c) in g.terms() {
        match e[0] {
            2 => parts[0].push((e[1..].to_vec(), c.clone())),
            1 => parts[1].push((e[1..].to_vec(), c.clone())),
            0 => parts[2].push((e[1..].to_vec(), c.clone())),
            _ => {}
        }
    }
    let mk = |terms: &[(Vec<u32>, S)], d: u32| MultiPoly::from_terms(4, d, terms.to_vec());
    Ok(LocalExpansion {
        point: p.to_vec(),
        frame,
        f1: mk(&parts[0], 1)?,
        f2: mk(&parts[1], 2)?,
        f3: mk(&parts[2], 3)?,
    })
}

/// A line of a fan with its multiplicity and containment residual.
#[derive(Clone, Debug, PartialEq)]
pub struct FanLine {
    pub line: ProjLine<CFloat>,
    pub multiplicity: usize,
    /// Largest relative value of the cubic at sample points of the line.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FanKind<S> {
    /// Finitely many lines, multiplicities summing to 6.
    Finite,
    /// A pencil of lines in a plane through the point, plus residual lines.
    PencilPlusResidual {
        /// Spanning vectors of the plane of the pencil.
        plane: Vec<Vec<S>>,
    },
}

/// The lines of a cubic threefold through a smooth point.
#[derive(Clone, Debug, PartialEq)]
pub struct LineFan<S> {
    pub point: Vec<S>,
    pub kind: FanKind<S>,
    /// Lines of the finite part (the residual lines in the pencil case).
    pub lines: Vec<FanLine>,
    /// Rank of `F2` restricted to `F1 = 0`, the quadric cone through the lines.
    pub cone_rank: RankCall,
    /// The conic `F2 | F1=0` in coordinates of the direction plane.
    pub conic: MultiPoly<S>,
    /// Spanning directions of the plane `F1 = 0` (ambient vectors).
    pub direction_plane: Vec<Vec<S>>,
}

impl<S: Scalar> LineFan<S> {
    pub fn total_multiplicity(&self) -> usize {
        self.lines.iter().map(|l| l.multiplicity).sum()
    }

    pub fn all_simple(&self) -> bool {
        self.lines.iter().all(|l| l.multiplicity == 1)
    }

    pub fn max_residual(&self) -> f64 {
        self.lines.iter().map(|l| l.residual).fold(0.0, f64::max)
    }
}

/// Largest projective move of a resultant root accepted from Newton refinement.
const PROJECTION_DRIFT: f64 = 1e-6;
/// Root separation above which a projection is accepted without trying others.
const WELL_SEPARATED: f64 = 1e-2;
/// Largest residual of a computed line for a projection to count as clean.
const LINE_RESIDUAL_TOL: f64 = 1e-8;

const PROJECTION_SHIFTS: [(i64, i64); 12] = [
    (0, 0),
    (2, -3),
    (-5, 1),
    (3, 7),
    (-4, -6),
    (9, 2),
    (1, -11),
    (-7, 8),
    (13, 5),
    (6, -13),
    (-17, -3),
    (11, 19),
];

fn shift<S: Scalar>(a: i64, b: i64) -> Vec<Vec<S>> {
    // columns of T, with T e_2 = (a, b, 1)
    vec![
        vec![S::one(), S::zero(), S::zero()],
        vec![S::zero(), S::one(), S::zero()],
        vec![S::from_i64(a), S::from_i64(b), S::one()],
    ]
}

/// Rebases a set of independent vectors to a nearly orthonormal one. The
/// change of basis is a Gram-Schmidt matrix computed in floats and rounded to
/// dyadic rationals, so exact inputs stay exact.
fn condition_basis<S: Scalar>(v: &[Vec<S>]) -> Vec<Vec<S>> {
    let n = v.len();
    let vf: Vec<Vec<f64>> = v.iter().map(|x| x.iter().map(|c| c.to_cfloat().re).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut q = vf.clone();
    let mut c: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for i in 0..n {
        for j in 0..i {
            let proj = dot(&q[i], &q[j]);
            for k in 0..q[i].len() {
                q[i][k] -= proj * q[j][k];
            }
            for k in 0..n {
                c[i][k] -= proj * c[j][k];
            }
        }
        let norm = dot(&q[i], &q[i]).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return v.to_vec();
        }
        q[i].iter_mut().for_each(|x| *x /= norm);
        c[i].iter_mut().for_each(|x| *x /= norm);
    }
    let mut out = Vec::with_capacity(n);
    for row in &c {
        let top = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let unit = 2f64.powi(top.log2().floor() as i32 - 30);
        let rounded: Vec<Rational> = row.iter().map(|x| Rational::from_float((x / unit).round() * unit).unwrap_or_default()).collect();
        let w: Vec<S> = (0..v[0].len())
            .map(|k| (0..n).fold(S::zero(), |acc, j| acc + S::from_rational(&rounded[j]) * v[j][k].clone()))
            .collect();
        out.push(w);
    }
    // the triangular change of basis keeps the span only with nonzero diagonal
    if (0..n).any(|i| c[i][i].abs() < 2f64.powi(-25) * c[i].iter().fold(0.0f64, |m, x| m.max(x.abs()))) {
        return v.to_vec();
    }
    out
}

/// Relative size of the cubic along sampled points of a line.
pub fn line_residual_on(f: &MultiPoly<CFloat>, line: &ProjLine<CFloat>) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let angle = 0.3 + k as f64 * 0.7;
        let s = CFloat::new(angle.cos(), 0.25 * angle.sin());
        let t = CFloat::new(angle.sin(), -0.5 * angle.cos());
        let x = line.point_at(&s, &t);
        worst = worst.max(form_residual(f, &x));
    }
    worst
}

fn direction_line<S: Scalar>(exp: &LocalExpansion<S>, kernel: &[Vec<S>], w: &[CFloat]) -> Result<ProjLine<CFloat>> {
    let d: Vec<CFloat> = (0..4)
        .map(|j| (0..3).map(|i| w[i] * kernel[i][j].to_cfloat()).sum())
        .collect();
    let amb: Vec<CFloat> = (0..5)
        .map(|k| (0..4).map(|j| d[j] * exp.frame[j][k].to_cfloat()).sum())
        .collect();
    let p: Vec<CFloat> = exp.point.iter().map(Scalar::to_cfloat).collect();
    Ok(ProjLine::from_coords(p, amb)?)
}

/// Lines of `f` through the smooth point `p`.
pub fn lines_through<S: Scalar>(f: &CubicThreefold<S>, p: &[S]) -> Result<LineFan<S>> {
    let exp = local_expand(f, p)?;
    if exp.is_singular() {
        return Err(Error::SingularPoint);
    }
    let f1: Vec<S> = (0..4)
        .map(|i| {
            let mut e = vec![0u32; 4];
            e[i] = 1;
            exp.f1.coeff(&e)
        })
        .collect();
    let kernel = condition_basis(&Mat::from_rows(&[f1])?.kernel());
    let conic = exp.f2.restrict_to_span(&kernel)?;
    let cubic = exp.f3.restrict_to_span(&kernel)?;
    let cone_rank = quadric_rank(&QuadricForm::from_poly(&conic)?);
    let direction_plane: Vec<Vec<S>> = kernel.iter().map(|k| exp.ambient(k)).collect();
    let ff = f.to_cfloat();

    let tol = if S::EXACT { 0.0 } else { 1e-9 };
    if let Some(cf) = common_factor(&conic, &cubic, tol)? {
        let l = MultiPoly::linear(&cf.form);
        let m = conic.div_linear(&l).ok_or(Error::Degenerate("conic division by the shared line".into()))?;
        let e = cubic.div_linear(&l).ok_or(Error::Degenerate("cubic division by the shared line".into()))?;
        // residual lines: the line m = 0 meets the conic e = 0 in two points
        let mcov: Vec<S> = (0..3)
            .map(|i| {
                let mut ex = vec![0u32; 3];
                ex[i] = 1;
                m.coeff(&ex)
            })
            .collect();
        let mline = Mat::from_rows(&[mcov])?.kernel();
        let e2 = e.restrict_to_span(&mline)?;
        let coeffs: Vec<CFloat> = (0..=2u32).map(|k| e2.coeff(&[2 - k, k]).to_cfloat()).collect();
        let params = binary_roots(&coeffs, &RootOptions::default())?;
        let mut lines = Vec::new();
        // coefficient k multiplies t^k s^(2-k)
        for (t, s, mult) in params {
            let w: Vec<CFloat> = (0..3).map(|i| s * mline[0][i].to_cfloat() + t * mline[1][i].to_cfloat()).collect();
            let line = direction_line(&exp, &kernel, &w)?;
            let residual = line_residual_on(ff.form(), &line);
            lines.push(FanLine {
                line,
                multiplicity: mult,
                residual,
            });
        }
        let pencil_dirs = Mat::from_rows(&[cf.form.clone()])?.kernel();
        let mut plane = vec![p.to_vec()];
        for d in &pencil_dirs {
            let k: Vec<S> = (0..4)
                .map(|j| (0..3).fold(S::zero(), |acc, i| acc + d[i].clone() * kernel[i][j].clone()))
                .collect();
            plane.push(exp.ambient(&k));
        }
        return Ok(LineFan {
            point: p.to_vec(),
            kind: FanKind::PencilPlusResidual { plane },
            lines,
            cone_rank,
            conic,
            direction_plane,
        });
    }

    // prefer the projection whose resultant roots are best separated
    let mut best: Option<(bool, f64, Vec<FanLine>)> = None;
    for (a, b) in PROJECTION_SHIFTS {
        let t = shift::<S>(a, b);
        let c2 = conic.restrict_to_span(&t)?;
        let c3 = cubic.restrict_to_span(&t)?;
        let center = [S::zero(), S::zero(), S::one()];
        if c2.eval(&center)?.is_negligible(c2.max_coeff(), 1e-12) || c3.eval(&center)?.is_negligible(c3.max_coeff(), 1e-12) {
            continue;
        }
        let res = resultant(&c2, &c3, 2)?;
        let coeffs: Vec<CFloat> = res.coeffs().iter().map(Scalar::to_cfloat).collect();
        let params = match binary_roots(&coeffs, &RootOptions::default()) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let separation = params
            .iter()
            .tuple_combinations()
            .map(|(x, y)| vector_distance(&[x.0, x.1], &[y.0, y.1]))
            .fold(1.0, f64::min);
        let c2f = c2.to_cfloat();
        let c3f = c3.to_cfloat();
        let mut lines = Vec::new();
        for (u, v, mult) in params {
            let z = lift_root(&c2f, &c3f, u, v).ok_or(Error::Degenerate("conic has no root over the projection point".into()))?;
            let start = [u, v, z];
            let (refined, _) = refine_plane_point(&c2f, &c3f, &start, 40);
            // Newton may not leave the fibre of the resultant root
            let x = if vector_distance(&refined[..2], &start[..2]) <= PROJECTION_DRIFT { refined } else { start.to_vec() };
            let w: Vec<CFloat> = (0..3).map(|i| (0..3).map(|j| t[j][i].to_cfloat() * x[j]).sum()).collect();
            let line = direction_line(&exp, &kernel, &w)?;
            let residual = line_residual_on(ff.form(), &line);
            lines.push(FanLine {
                line,
                multiplicity: mult,
                residual,
            });
        }
        let clean = lines.iter().all(|l| l.multiplicity == 1)
            && merge_lines(lines.clone(), COINCIDENCE_RADIUS).len() == lines.len()
            && lines.iter().all(|l| l.residual <= LINE_RESIDUAL_TOL);
        if clean && separation >= WELL_SEPARATED {
            best = Some((clean, separation, lines));
            break;
        }
        let better = match &best {
            None => true,
            Some((c, sep, _)) => (clean, separation) > (*c, *sep),
        };
        if better {
            best = Some((clean, separation, lines));
        }
    }
    let fallback = best.map(|(_, _, lines)| lines);
    let lines = fallback.ok_or(Error::NoCandidate("no projection center avoided the curves".into()))?;
    Ok(LineFan {
        point: p.to_vec(),
        kind: FanKind::Finite,
        lines,
        cone_rank,
        conic,
        direction_plane,
    })
}

/// Expands multiplicities and finds the assignment minimizing the largest
/// Plücker distance. Returns the largest distance of the optimal matching.
pub fn match_fans(a: &[FanLine], b: &[FanLine]) -> Option<f64> {
    let ea: Vec<&ProjLine<CFloat>> = a.iter().flat_map(|l| std::iter::repeat(&l.line).take(l.multiplicity)).collect();
    let eb: Vec<&ProjLine<CFloat>> = b.iter().flat_map(|l| std::iter::repeat(&l.line).take(l.multiplicity)).collect();
    match_lines(&ea, &eb)
}

/// Bottleneck matching between two equally sized line lists.
pub fn match_lines(a: &[&ProjLine<CFloat>], b: &[&ProjLine<CFloat>]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let d: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| x.distance(y)).collect()).collect();
    (0..b.len())
        .permutations(b.len())
        .map(|perm| perm.iter().enumerate().map(|(i, &j)| d[i][j]).fold(0.0, f64::max))
        .min_by(f64::total_cmp)
}

/// Merges lines closer than `radius` (Plücker distance), adding multiplicities.
pub fn merge_lines(lines: Vec<FanLine>, radius: f64) -> Vec<FanLine> {
    let mut out: Vec<FanLine> = Vec::new();
    for l in lines {
        if let Some(m) = out.iter_mut().find(|m| m.line.distance(&l.line) <= radius) {
            m.multiplicity += l.multiplicity;
            m.residual = m.residual.max(l.residual);
        } else {
            out.push(l);
        }
    }
    out
}

/// The six marked lines through a non-node point `p` of plane `plane` of a
/// nodal cubic: the joins of `p` with the four nodes of the plane, and the two
/// lines through `p` off the plane.
pub fn marked_lines_at_plane_point(view: &NodalCubic, plane: usize, p: &[Rational]) -> Result<Vec<FanLine>> {
    let info = view.planes.get(plane).ok_or(Error::Degenerate("no such plane".into()))?;
    if !info.space.contains(p, 0.0) {
        return Err(Error::Degenerate("point is not on the plane".into()));
    }
    let pp = ProjPoint::new(p.to_vec())?;
    if view.nodes.iter().any(|n| ProjPoint::new(n.clone()).map(|q| q == pp).unwrap_or(false)) {
        return Err(Error::Indeterminate("point is a node".into()));
    }
    let fan = lines_through(&view.cubic, p)?;
    let FanKind::PencilPlusResidual { .. } = fan.kind else {
        return Err(Error::Degenerate("no pencil at a plane point".into()));
    };
    let ff = view.cubic.to_cfloat();
    let mut lines = Vec::new();
    for &n in &info.nodes {
        let line = ProjLine::through(&pp, &ProjPoint::new(view.nodes[n].clone())?)?.to_cfloat();
        let residual = line_residual_on(ff.form(), &line);
        lines.push(FanLine {
            line,
            multiplicity: 1,
            residual,
        });
    }
    lines.extend(fan.lines);
    Ok(merge_lines(lines, COINCIDENCE_RADIUS))
}

/// Distances from the line fans at points approaching a plane point to the
/// marked fan there.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitProbe {
    pub steps: Vec<f64>,
    pub distances: Vec<f64>,
}

impl LimitProbe {
    pub fn monotone(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }
}

/// Follows `x_t = path(t)` toward `path(0)` on the cubic and compares fans.
pub fn limit_probe(
    view: &NodalCubic,
    plane: usize,
    path: impl Fn(&Rational) -> Result<Vec<Rational>>,
    steps: &[Rational],
) -> Result<LimitProbe> {
    let p = path(&Rational::from_i64(0))?;
    let marked = marked_lines_at_plane_point(view, plane, &p)?;
    let mut distances = Vec::new();
    for t in steps {
        let x = path(t)?;
        let fan = lines_through(&view.cubic, &x)?;
        let d = match_fans(&fan.lines, &marked).ok_or_else(|| {
            let size = |l: &[FanLine]| l.iter().map(|x| x.multiplicity).sum::<usize>();
            Error::CheckFailed(format!("fan sizes differ: {} near, {} marked", size(&fan.lines), size(&marked)))
        })?;
        distances.push(d);
    }
    Ok(LimitProbe {
        steps: steps.iter().map(|t| t.to_cfloat().re).collect(),
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::scalar::int;
    use crate::sample::rng;

    fn fermat() -> CubicThreefold<Rational> {
        let terms: Vec<(Vec<u32>, i64)> = (0..5)
            .map(|i| {
                let mut e = vec![0u32; 5];
                e[i] = 3;
                (e, 1)
            })
            .collect();
        let refs: Vec<(&[u32], i64)> = terms.iter().map(|(e, c)| (e.as_slice(), *c)).collect();
        CubicThreefold::new(MultiPoly::from_int_terms(5, 3, &refs).unwrap()).unwrap()
    }

    #[test]
    fn expansion_reproduces_the_cubic_on_probes() {
        let f = fermat();
        let p = vec![int(1), int(-1), int(2), int(-2), int(0)];
        let exp = local_expand(&f, &p).unwrap();
        assert!(!exp.is_singular());
        let mut r = rng(3);
        for _ in 0..20 {
            let d: Vec<Rational> = (0..4).map(|_| int(small_int(&mut r, 5))).collect();
            let y0 = int(small_int(&mut r, 5));
            assert_eq!(exp.probe_residual(f.form(), &y0, &d).unwrap(), 0.0);
        }
    }

    #[test]
    fn off_hypersurface_is_rejected() {
        let f = fermat();
        assert!(matches!(local_expand(&f, &[int(1), int(0), int(0), int(0), int(0)]), Err(Error::NotOnHypersurface(_))));
    }

    #[test]
    fn fermat_point_has_six_lines_on_a_cone() {
        // the Fermat cubic contains lines through this point in a non-generic way,
        // so use a general cubic point instead
        let mut r = rng(11);
        let f = random_cubic(&mut r, 5);
        let p = point_on_cubic(&f, &mut r).unwrap();
        let fan = lines_through(&f.to_cfloat(), &p).unwrap();
        assert_eq!(fan.kind, FanKind::Finite);
        assert_eq!(fan.total_multiplicity(), 6);
        assert!(fan.all_simple());
        assert_eq!(fan.cone_rank.rank, 3);
        assert!(fan.max_residual() < 1e-10, "{}", fan.max_residual());
    }

    #[test]
    fn bottleneck_matching_ignores_order() {
        let l1 = ProjLine::from_coords(vec![int(1), int(0), int(0)], vec![int(0), int(1), int(0)]).unwrap().to_cfloat();
        let l2 = ProjLine::from_coords(vec![int(1), int(0), int(0)], vec![int(0), int(0), int(1)]).unwrap().to_cfloat();
        assert_eq!(match_lines(&[&l1, &l2], &[&l2, &l1]), Some(0.0));
        assert!(match_lines(&[&l1, &l1], &[&l2, &l1]).unwrap() > 0.5);
    }
}
