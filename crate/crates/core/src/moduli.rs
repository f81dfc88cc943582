//! Six points on P^1 as a point of M_2 (Igusa-Clebsch invariants up to
//! weighted scaling) and as a point of M_{0,6} (cross-ratio coordinates).
//!
//! Points are homogeneous pairs `(x : y)`; `(1 : 0)` is infinity. The
//! invariants are sums over squared brackets `[ij] = x_i y_j - x_j y_i`:
//!
//! * `I2`: 15 pairings `{ab}{cd}{ef}`, term `[ab]^2 [cd]^2 [ef]^2`;
//! * `I4`: 10 splits `{abc}{def}`, term `[ab]^2 [bc]^2 [ca]^2 [de]^2 [ef]^2 [fd]^2`;
//! * `I6`: the 60 splits with a bijection `a-d, b-e, c-f`, term
//!   `[ab]^2 [bc]^2 [ca]^2 [de]^2 [ef]^2 [fd]^2 [ad]^2 [be]^2 [cf]^2`;
//! * `I10`: the product of the 15 squared brackets.
//!
//! Rescaling the pair of point `i` by `c` multiplies every invariant of weight
//! `w` by `c^w`, so the tuple is a point of weighted projective space.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::linalg::Mat;
use crate::numkit::scalar::{CFloat, Scalar};
use crate::projgeom::{bracket, conic_parametrize, cross_ratio, line_parameter, ProjLine, QuadricForm};

/// Relative tolerance for float comparisons of invariants.
pub const INVARIANT_TOL: f64 = 1e-9;
/// Residual bound for marked points on a conic.
pub const ON_CONIC_TOL: f64 = 1e-10;

/// Six ordered points of P^1.
#[derive(Clone, Debug, PartialEq)]
pub struct BinarySextic<S> {
    points: Vec<[S; 2]>,
}

impl<S: Scalar> BinarySextic<S> {
    pub fn new(points: Vec<[S; 2]>) -> Result<Self> {
        if points.len() != 6 {
            return Err(Error::Degenerate(format!("a sextic needs six points, got {}", points.len())));
        }
        if points.iter().any(|p| p[0].is_zero() && p[1].is_zero()) {
            return Err(Error::Degenerate("zero pair is not a point".into()));
        }
        Ok(BinarySextic { points })
    }

    /// From affine values; `None` is infinity.
    pub fn from_values(values: &[Option<S>]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|v| match v {
                    Some(x) => [x.clone(), S::one()],
                    None => [S::one(), S::zero()],
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[[S; 2]] {
        &self.points
    }

    /// True iff no two points coincide.
    pub fn distinct(&self, tol: f64) -> bool {
        self.points.iter().tuple_combinations().all(|(a, b)| !coincide(a, b, tol))
    }

    /// Moves point `i` to label `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut out = self.points.clone();
        for (i, &pi) in perm.iter().enumerate() {
            out[pi] = self.points[i].clone();
        }
        BinarySextic { points: out }
    }

    /// Applies the Möbius map `(x : y) -> (a x + b y : c x + d y)`.
    pub fn transform(&self, m: &[[S; 2]; 2]) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| {
                [
                    m[0][0].clone() * p[0].clone() + m[0][1].clone() * p[1].clone(),
                    m[1][0].clone() * p[0].clone() + m[1][1].clone() * p[1].clone(),
                ]
            })
            .collect();
        BinarySextic { points }
    }

    /// Rescales the homogeneous pair of each point.
    pub fn rescale(&self, factors: &[S]) -> Self {
        let points = self
            .points
            .iter()
            .zip(factors)
            .map(|(p, c)| [p[0].clone() * c.clone(), p[1].clone() * c.clone()])
            .collect();
        BinarySextic { points }
    }

    pub fn to_cfloat(&self) -> BinarySextic<CFloat> {
        BinarySextic {
            points: self.points.iter().map(|p| [p[0].to_cfloat(), p[1].to_cfloat()]).collect(),
        }
    }
}

fn coincide<S: Scalar>(a: &[S; 2], b: &[S; 2], tol: f64) -> bool {
    let scale = a[0].modulus().max(a[1].modulus()) * b[0].modulus().max(b[1].modulus());
    bracket(a, b).is_negligible(scale, tol)
}

/// Weighted-projective point `(I2 : I4 : I6 : I10)`, weights `(2, 4, 6, 10)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IgusaInvariants<S> {
    pub i2: S,
    pub i4: S,
    pub i6: S,
    pub i10: S,
}

pub const WEIGHTS: [i32; 4] = [2, 4, 6, 10];

impl<S: Scalar> IgusaInvariants<S> {
    pub fn values(&self) -> [S; 4] {
        [self.i2.clone(), self.i4.clone(), self.i6.clone(), self.i10.clone()]
    }

    /// `(l^2 I2, l^4 I4, l^6 I6, l^10 I10)`.
    pub fn scaled(&self, l: &S) -> Self {
        let [a, b, c, d] = self.values();
        IgusaInvariants {
            i2: a * l.powi(2),
            i4: b * l.powi(4),
            i6: c * l.powi(6),
            i10: d * l.powi(10),
        }
    }

    pub fn to_cfloat(&self) -> IgusaInvariants<CFloat> {
        IgusaInvariants {
            i2: self.i2.to_cfloat(),
            i4: self.i4.to_cfloat(),
            i6: self.i6.to_cfloat(),
            i10: self.i10.to_cfloat(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "I2": self.i2.to_json(),
            "I4": self.i4.to_json(),
            "I6": self.i6.to_json(),
            "I10": self.i10.to_json(),
        })
    }
}

/// The 15 pairings of `{0..5}`.
pub fn pairings() -> Vec<[(usize, usize); 3]> {
    let mut out = Vec::new();
    for a in 1..6 {
        let rest: Vec<usize> = (1..6).filter(|&x| x != a).collect();
        for &c in &rest[1..] {
            let last: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != c).collect();
            out.push([(0, a), (rest[0], c), (last[0], last[1])]);
        }
    }
    out
}

/// The 10 splits of `{0..5}` into two triples, the first containing 0.
pub fn splits() -> Vec<([usize; 3], [usize; 3])> {
    (1..6)
        .combinations(2)
        .map(|pair| {
            let a = [0, pair[0], pair[1]];
            let b: Vec<usize> = (1..6).filter(|x| !pair.contains(x)).collect();
            (a, [b[0], b[1], b[2]])
        })
        .collect()
}

pub fn igusa_clebsch<S: Scalar>(s: &BinarySextic<S>) -> IgusaInvariants<S> {
    let p = &s.points;
    let mut d2 = vec![vec![S::zero(); 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            let b = bracket(&p[i], &p[j]);
            d2[i][j] = b.clone() * b;
        }
    }
    let tri = |t: &[usize; 3]| d2[t[0]][t[1]].clone() * d2[t[1]][t[2]].clone() * d2[t[2]][t[0]].clone();

    let i2 = pairings().iter().fold(S::zero(), |acc, m| {
        acc + m.iter().fold(S::one(), |t, &(a, b)| t * d2[a][b].clone())
    });
    let mut i4 = S::zero();
    let mut i6 = S::zero();
    for (a, b) in splits() {
        let both = tri(&a) * tri(&b);
        i4 = i4 + both.clone();
        for sigma in b.iter().permutations(3) {
            let cross = (0..3).fold(S::one(), |t, k| t * d2[a[k]][*sigma[k]].clone());
            i6 = i6 + both.clone() * cross;
        }
    }
    let i10 = (0..6).tuple_combinations().fold(S::one(), |acc, (i, j)| acc * d2[i][j].clone());
    IgusaInvariants { i2, i4, i6, i10 }
}

/// Equality of points of weighted projective space: the same entries vanish,
/// and every weight-0 ratio of nonzero entries agrees.
pub fn m2_equal<S: Scalar>(a: &IgusaInvariants<S>, b: &IgusaInvariants<S>, tol: f64) -> bool {
    if !S::EXACT {
        return m2_margin(&a.to_cfloat(), &b.to_cfloat(), tol) <= tol;
    }
    let (ea, eb) = (a.values(), b.values());
    if (0..4).any(|k| ea[k].is_zero() != eb[k].is_zero()) {
        return false;
    }
    let live: Vec<usize> = (0..4).filter(|&k| !ea[k].is_zero()).collect();
    live.iter().tuple_combinations().all(|(&i, &j)| {
        ea[i].powi(half_weight(j)) * eb[j].powi(half_weight(i)) == ea[j].powi(half_weight(i)) * eb[i].powi(half_weight(j))
    })
}

// a_i^{w_j} b_j^{w_i} = a_j^{w_i} b_i^{w_j} with the weights halved
fn half_weight(k: usize) -> u32 {
    (WEIGHTS[k] / 2) as u32
}

/// Largest relative mismatch of the weight-0 ratios after normalizing both
/// tuples; infinite when the entries vanishing at `zero_tol` differ.
pub fn m2_margin(a: &IgusaInvariants<CFloat>, b: &IgusaInvariants<CFloat>, zero_tol: f64) -> f64 {
    let (va, vb) = (normalize_weighted(a), normalize_weighted(b));
    let mut live = Vec::new();
    for k in 0..4 {
        let (za, zb) = (va[k].norm() <= zero_tol, vb[k].norm() <= zero_tol);
        if za != zb {
            return f64::INFINITY;
        }
        if !za {
            live.push(k);
        }
    }
    live.iter()
        .tuple_combinations()
        .map(|(&i, &j)| {
            let lhs = va[i].powu(half_weight(j)) * vb[j].powu(half_weight(i));
            let rhs = va[j].powu(half_weight(i)) * vb[i].powu(half_weight(j));
            (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// Representative with `max_k |I_k|^(1/w_k) = 1`.
fn normalize_weighted(x: &IgusaInvariants<CFloat>) -> [CFloat; 4] {
    let v = x.values();
    let rho = (0..4).map(|k| v[k].norm().powf(1.0 / WEIGHTS[k] as f64)).fold(0.0, f64::max);
    if rho == 0.0 || !rho.is_finite() {
        return v;
    }
    let mut out = v;
    for k in 0..4 {
        out[k] = v[k] / rho.powi(WEIGHTS[k]);
    }
    out
}

/// Ordered six distinct points up to Möbius maps: the images of points 4, 5, 6
/// under the map sending points 1, 2, 3 to `0, 1, ∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct M06Point<S> {
    pub lambda: [S; 3],
}

impl<S: Scalar> M06Point<S> {
    /// Largest coordinate difference, relative to the coordinate size.
    pub fn distance(&self, other: &Self) -> f64 {
        (0..3)
            .map(|k| {
                let (a, b) = (self.lambda[k].to_cfloat(), other.lambda[k].to_cfloat());
                (a - b).norm() / a.norm().max(b.norm()).max(1.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn to_cfloat(&self) -> M06Point<CFloat> {
        M06Point {
            lambda: [self.lambda[0].to_cfloat(), self.lambda[1].to_cfloat(), self.lambda[2].to_cfloat()],
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "lambda": self.lambda.iter().map(Scalar::to_json).collect::<Vec<_>>() })
    }
}

pub fn m06_coords<S: Scalar>(s: &BinarySextic<S>, tol: f64) -> Result<M06Point<S>> {
    if !s.distinct(tol) {
        return Err(Error::Degenerate("coincident marked points".into()));
    }
    let p = &s.points;
    let mut lambda = Vec::with_capacity(3);
    for k in 3..6 {
        let [num, den] = cross_ratio(&p[0], &p[1], &p[2], &p[k], tol)?;
        lambda.push(num / den);
    }
    Ok(M06Point {
        lambda: [lambda[0].clone(), lambda[1].clone(), lambda[2].clone()],
    })
}

/// A smooth conic of P^2 with six ordered points on it.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedConic<S> {
    pub conic: QuadricForm<S>,
    pub points: Vec<Vec<S>>,
}

impl<S: Scalar> MarkedConic<S> {
    pub fn new(conic: QuadricForm<S>, points: Vec<Vec<S>>) -> Result<Self> {
        if conic.ambient() != 2 || points.len() != 6 || points.iter().any(|p| p.len() != 3) {
            return Err(Error::Degenerate("expected a conic with six points of P^2".into()));
        }
        for p in &points {
            let on = if S::EXACT { conic.eval(p).is_zero() } else { conic.residual(p) <= ON_CONIC_TOL };
            if !on {
                return Err(Error::NotOnHypersurface(conic.residual(p)));
            }
        }
        Ok(MarkedConic { conic, points })
    }
}

/// Parametrizes the conic from marked point `seed` (sent to ∞) and returns the
/// parameters of the six points.
pub fn marked_conic_to_sextic_from<S: Scalar>(g: &MarkedConic<S>, seed: usize) -> Result<BinarySextic<S>> {
    let param = conic_parametrize(&g.conic, &g.points[seed], ON_CONIC_TOL).map_err(|e| match e {
        crate::projgeom::GeomError::RankDeficient(r) => {
            Error::Degenerate(format!("conic of rank {r}: use boundary_invariants for a line pair"))
        }
        other => other.into(),
    })?;
    let points = g
        .points
        .iter()
        .enumerate()
        .map(|(i, x)| if i == seed { [S::one(), S::zero()] } else { param.inverse(x) })
        .collect();
    BinarySextic::new(points)
}

/// Parameters of the marked points, the first one at ∞.
pub fn marked_conic_to_sextic<S: Scalar>(g: &MarkedConic<S>) -> Result<BinarySextic<S>> {
    marked_conic_to_sextic_from(g, 0)
}

/// One component of a two-component stable 6-pointed rational curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryComponent<S> {
    /// Labels of the marked points, increasing.
    pub labels: [usize; 3],
    /// Image of the node under the map sending the marked points to `0, 1, ∞`.
    #[serde(skip)]
    pub node: S,
}

/// A boundary point of M_{0,6} with two components of three marked points.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryM06Point<S> {
    /// The component carrying label 0 comes first.
    pub components: [BoundaryComponent<S>; 2],
}

impl<S: Scalar> BoundaryM06Point<S> {
    pub fn partition(&self) -> [[usize; 3]; 2] {
        [self.components[0].labels, self.components[1].labels]
    }

    /// Same partition, node invariants within `tol`.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        self.partition() == other.partition()
            && (0..2).all(|k| {
                let (a, b) = (self.components[k].node.to_cfloat(), other.components[k].node.to_cfloat());
                (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
            })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "components": self.components.iter().map(|c| serde_json::json!({
                "labels": c.labels,
                "node": c.node.to_json(),
            })).collect::<Vec<_>>()
        })
    }
}

/// Meeting point of two coplanar lines.
///
/// `s a0 + t a1` lies on `b0 b1` iff every 3x3 minor of `[s a0 + t a1, b0, b1]`
/// vanishes; each minor is linear in `(s, t)`, so the largest one fixes them.
pub fn line_meet<S: Scalar>(a: &ProjLine<S>, b: &ProjLine<S>, tol: f64) -> Result<Vec<S>> {
    let (a0, a1) = a.points();
    let (b0, b1) = b.points();
    let (a0, a1, b0, b1) = (a0.coords(), a1.coords(), b0.coords(), b1.coords());
    let n = a0.len();
    let minor = |x: &[S], r: &[usize]| -> S {
        let col = |v: &[S]| r.iter().map(|&i| v[i].clone()).collect::<Vec<S>>();
        Mat::from_cols(&[col(x), col(b0), col(b1)]).expect("3x3").det().expect("square")
    };
    let rows: Vec<Vec<usize>> = (0..n).combinations(3).collect();
    let coeffs: Vec<(S, S)> = rows.iter().map(|r| (minor(a0, r), minor(a1, r))).collect();
    let best = coeffs
        .iter()
        .max_by(|x, y| {
            let m = |c: &(S, S)| c.0.modulus().max(c.1.modulus());
            m(x).total_cmp(&m(y))
        })
        .expect("at least one minor");
    let (s, t) = (best.1.clone(), -best.0.clone());
    let scale = best.0.modulus().max(best.1.modulus());
    if scale == 0.0 {
        return Err(Error::Degenerate("first line lies in the second".into()));
    }
    // the other minors must vanish at (s, t)
    for (c0, c1) in &coeffs {
        let r = s.clone() * c0.clone() + t.clone() * c1.clone();
        if !r.is_negligible(scale * scale, tol.max(if S::EXACT { 0.0 } else { 1e-12 })) {
            return Err(Error::Degenerate("lines do not meet".into()));
        }
    }
    Ok(a.point_at(&s, &t))
}

/// Boundary point from two lines with three labelled marked points each.
pub fn boundary_invariants<S: Scalar>(
    a: &ProjLine<S>,
    a_marks: &[(usize, Vec<S>)],
    b: &ProjLine<S>,
    b_marks: &[(usize, Vec<S>)],
    tol: f64,
) -> Result<BoundaryM06Point<S>> {
    if a_marks.len() != 3 || b_marks.len() != 3 {
        return Err(Error::Degenerate("each component carries three marked points".into()));
    }
    if a.same_as(b) {
        return Err(Error::Degenerate("the two components coincide".into()));
    }
    let node = line_meet(a, b, tol)?;
    let component = |line: &ProjLine<S>, marks: &[(usize, Vec<S>)]| -> Result<BoundaryComponent<S>> {
        let mut marks = marks.to_vec();
        marks.sort_by_key(|m| m.0);
        let n = line_parameter(line, &node)?;
        let params: Vec<[S; 2]> = marks.iter().map(|(_, x)| line_parameter(line, x)).collect::<std::result::Result<_, _>>()?;
        if params.iter().any(|p| coincide(p, &n, tol)) {
            return Err(Error::Degenerate("marked point at the node".into()));
        }
        let [num, den] = cross_ratio(&params[0], &params[1], &params[2], &n, tol)?;
        Ok(BoundaryComponent {
            labels: [marks[0].0, marks[1].0, marks[2].0],
            node: num / den,
        })
    };
    let ca = component(a, a_marks)?;
    let cb = component(b, b_marks)?;
    let mut labels: Vec<usize> = ca.labels.iter().chain(cb.labels.iter()).copied().collect();
    labels.sort();
    if labels != (0..6).collect::<Vec<_>>() {
        return Err(Error::Degenerate("labels must be 0..5, each once".into()));
    }
    let components = if ca.labels[0] == 0 { [ca, cb] } else { [cb, ca] };
    Ok(BoundaryM06Point { components })
}
