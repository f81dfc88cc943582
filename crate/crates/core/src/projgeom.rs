//! Projective points, lines, linear subspaces, quadrics, projectivities,
//! cross-ratios and conic parametrization.

use serde::Serialize;

use crate::numkit::linalg::{dot, rank_report, Mat, RankReport};
use crate::numkit::poly::MultiPoly;
use crate::numkit::scalar::{CFloat, Scalar};
use crate::numkit::NumError;

/// Tolerance for line equality in the float regime (Plücker distance).
pub const LINE_EQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("zero vector is not a projective point")]
    ZeroVector,
    #[error("points do not span the requested subspace")]
    Dependent,
    #[error("coincident points")]
    Coincident,
    #[error("point is not on the quadric")]
    NotOnQuadric,
    #[error("point is a vertex of the quadric")]
    Vertex,
    #[error("quadric has rank {0}, expected full rank")]
    RankDeficient(usize),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("{0}")]
    Degenerate(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// A point of projective space, stored normalized.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = ""))]
pub struct ProjPoint<S> {
    #[serde(skip)]
    coords: Vec<S>,
}

impl<S: Scalar> ProjPoint<S> {
    pub fn new(mut coords: Vec<S>) -> Result<Self, GeomError> {
        if coords.iter().all(|c| c.is_zero()) {
            return Err(GeomError::ZeroVector);
        }
        S::normalize_projective(&mut coords);
        Ok(ProjPoint { coords })
    }

    pub fn from_ints(c: &[i64]) -> Result<Self, GeomError> {
        Self::new(c.iter().map(|&x| S::from_i64(x)).collect())
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }

    /// Dimension of the ambient projective space.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn to_cfloat(&self) -> ProjPoint<CFloat> {
        ProjPoint {
            coords: self.coords.iter().map(Scalar::to_cfloat).collect(),
        }
    }

    /// Equality as projective points: exact proportionality, or angular distance below `tol`.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        if S::EXACT {
            self.coords == other.coords
        } else {
            vector_distance(&self.to_cfloat().coords, &other.to_cfloat().coords) <= tol
        }
    }
}

/// `sqrt(1 - |<u,v>|^2 / (|u|^2 |v|^2))`: sine of the Hermitian angle between two rays.
pub fn vector_distance(u: &[CFloat], v: &[CFloat]) -> f64 {
    let nu: f64 = u.iter().map(|x| x.norm_sqr()).sum();
    let nv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    if nu == 0.0 || nv == 0.0 {
        return 1.0;
    }
    // |u|^2 |v|^2 - |<u, v>|^2 = sum |u_i v_j - u_j v_i|^2, without cancellation
    let (su, sv) = (nu.sqrt(), nv.sqrt());
    let un: Vec<CFloat> = u.iter().map(|x| x / su).collect();
    let vn: Vec<CFloat> = v.iter().map(|x| x / sv).collect();
    let s: f64 = wedge(&un, &vn).iter().map(|w| w.norm_sqr()).sum();
    s.sqrt().min(1.0)
}

/// The 2x2 minors `a_i b_j - a_j b_i` for `i < j`.
pub fn wedge<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let n = a.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone());
        }
    }
    out
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    // position of (i, j), i < j, in the lexicographic pair list
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// A line, spanned by two points, with Plücker coordinates `p_ij`, `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjLine<S> {
    a: ProjPoint<S>,
    b: ProjPoint<S>,
    plucker: Vec<S>,
}

impl<S: Scalar> ProjLine<S> {
    pub fn through(a: &ProjPoint<S>, b: &ProjPoint<S>) -> Result<Self, GeomError> {
        if a.coords.len() != b.coords.len() {
            return Err(NumError::DimensionMismatch("points in different spaces".into()).into());
        }
        let mut plucker = wedge(&a.coords, &b.coords);
        let scale = a.coords.iter().chain(&b.coords).map(Scalar::modulus).fold(0.0, f64::max);
        if plucker.iter().all(|p| p.is_negligible(scale * scale, 1e-13)) {
            return Err(GeomError::Dependent);
        }
        S::normalize_projective(&mut plucker);
        Ok(ProjLine {
            a: a.clone(),
            b: b.clone(),
            plucker,
        })
    }

    pub fn from_coords(a: Vec<S>, b: Vec<S>) -> Result<Self, GeomError> {
        Self::through(&ProjPoint::new(a)?, &ProjPoint::new(b)?)
    }

    pub fn plucker(&self) -> &[S] {
        &self.plucker
    }

    pub fn points(&self) -> (&ProjPoint<S>, &ProjPoint<S>) {
        (&self.a, &self.b)
    }

    pub fn ambient_dim(&self) -> usize {
        self.a.dim()
    }

    /// `s * a + t * b`.
    pub fn point_at(&self, s: &S, t: &S) -> Vec<S> {
        self.a
            .coords
            .iter()
            .zip(&self.b.coords)
            .map(|(x, y)| s.clone() * x.clone() + t.clone() * y.clone())
            .collect()
    }

    /// Residuals of all Grassmann-Plücker relations `p_ij p_kl - p_ik p_jl + p_il p_jk`.
    pub fn grassmann_residuals(&self) -> Vec<S> {
        let n = self.a.coords.len();
        let p = |i: usize, j: usize| self.plucker[pair_index(n, i, j)].clone();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in k + 1..n {
                        out.push(p(i, j) * p(k, l) - p(i, k) * p(j, l) + p(i, l) * p(j, k));
                    }
                }
            }
        }
        out
    }

    /// Plücker distance to another line (0 iff equal).
    pub fn distance(&self, other: &Self) -> f64 {
        let u: Vec<CFloat> = self.plucker.iter().map(Scalar::to_cfloat).collect();
        let v: Vec<CFloat> = other.plucker.iter().map(Scalar::to_cfloat).collect();
        vector_distance(&u, &v)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        if S::EXACT {
            self.plucker == other.plucker
        } else {
            self.distance(other) <= LINE_EQ_TOL
        }
    }

    pub fn contains(&self, x: &[S], tol: f64) -> bool {
        let m = Mat::from_rows(&[self.a.coords.clone(), self.b.coords.clone(), x.to_vec()])
            .expect("equal lengths");
        if S::EXACT {
            m.rank() == 2
        } else {
            crate::numkit::linalg::numerical_rank(&m.to_cfloat(), tol).rank <= 2
        }
    }

    pub fn to_cfloat(&self) -> ProjLine<CFloat> {
        ProjLine {
            a: self.a.to_cfloat(),
            b: self.b.to_cfloat(),
            plucker: {
                let mut p: Vec<CFloat> = self.plucker.iter().map(Scalar::to_cfloat).collect();
                CFloat::normalize_projective(&mut p);
                p
            },
        }
    }
}

/// A linear subspace given by independent covectors (its equations).
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<S> {
    ambient: usize,
    covectors: Vec<Vec<S>>,
}

impl<S: Scalar> Subspace<S> {
    /// Subspace cut out by the given covectors (redundant ones are dropped).
    pub fn from_equations(ambient: usize, covectors: &[Vec<S>]) -> Result<Self, GeomError> {
        if covectors.iter().any(|c| c.len() != ambient + 1) {
            return Err(NumError::DimensionMismatch("covector length".into()).into());
        }
        if covectors.is_empty() {
            return Ok(Subspace {
                ambient,
                covectors: Vec::new(),
            });
        }
        let m = Mat::from_rows(covectors)?;
        let (r, pivots) = m.rref();
        let covectors = (0..pivots.len()).map(|i| r.row(i)).collect();
        Ok(Subspace { ambient, covectors })
    }

    /// Span of the given points.
    pub fn span(points: &[Vec<S>]) -> Result<Self, GeomError> {
        let n = points.first().map(|p| p.len()).ok_or(GeomError::Dependent)?;
        let m = Mat::from_rows(points)?;
        let eqs = m.kernel();
        Self::from_equations(n - 1, &eqs)
    }

    pub fn covectors(&self) -> &[Vec<S>] {
        &self.covectors
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Projective dimension.
    pub fn dim(&self) -> isize {
        self.ambient as isize - self.covectors.len() as isize
    }

    /// Spanning vectors (a basis of the underlying linear space).
    pub fn basis(&self) -> Vec<Vec<S>> {
        if self.covectors.is_empty() {
            return Mat::<S>::identity(self.ambient + 1).to_rows();
        }
        Mat::from_rows(&self.covectors).expect("rectangular").kernel()
    }

    pub fn contains(&self, x: &[S], tol: f64) -> bool {
        let scale = x.iter().map(Scalar::modulus).fold(0.0, f64::max);
        self.covectors.iter().all(|c| {
            let cs = c.iter().map(Scalar::modulus).fold(0.0, f64::max);
            dot(c, x).is_negligible(scale * cs, tol)
        })
    }
}

/// Rank decision for a quadric, with numerical evidence in the float regime.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankCall {
    pub rank: usize,
    pub evidence: RankReport,
}

/// A quadric given by a symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricForm<S> {
    m: Mat<S>,
}

impl<S: Scalar> QuadricForm<S> {
    pub fn new(m: Mat<S>) -> Result<Self, GeomError> {
        if m.rows() != m.cols() {
            return Err(NumError::DimensionMismatch("quadric matrix must be square".into()).into());
        }
        if m != m.transpose() {
            return Err(GeomError::NotSymmetric);
        }
        Ok(QuadricForm { m })
    }

    pub fn from_poly(q: &MultiPoly<S>) -> Result<Self, GeomError> {
        Self::new(q.quadratic_matrix()?)
    }

    pub fn diagonal(d: &[S]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        QuadricForm { m }
    }

    pub fn matrix(&self) -> &Mat<S> {
        &self.m
    }

    pub fn to_poly(&self) -> MultiPoly<S> {
        MultiPoly::from_symmetric(&self.m)
    }

    /// Dimension of the ambient projective space.
    pub fn ambient(&self) -> usize {
        self.m.rows() - 1
    }

    pub fn eval(&self, x: &[S]) -> S {
        self.bilinear(x, x)
    }

    pub fn bilinear(&self, x: &[S], y: &[S]) -> S {
        let my = self.m.mul_vec(y).expect("matching length");
        dot(x, &my)
    }

    /// Relative residual `|Q(x)| / (max|Q_ij| * |x|^2)`.
    pub fn residual(&self, x: &[S]) -> f64 {
        let nx = x.iter().map(Scalar::modulus).fold(0.0, f64::max);
        let nm = self.m.to_rows().iter().flatten().map(Scalar::modulus).fold(0.0, f64::max);
        self.eval(x).modulus() / (nm * nx * nx).max(f64::MIN_POSITIVE)
    }

    /// Pullback to a subspace with the given spanning vectors: `B^T M B`.
    pub fn restrict(&self, basis: &[Vec<S>]) -> Result<Self, GeomError> {
        let b = Mat::from_cols(basis)?;
        let m = b.transpose().mul_mat(&self.m)?.mul_mat(&b)?;
        Ok(QuadricForm { m: symmetrize(m) })
    }

    pub fn to_cfloat(&self) -> QuadricForm<CFloat> {
        QuadricForm {
            m: self.m.to_cfloat(),
        }
    }
}

fn symmetrize<S: Scalar>(m: Mat<S>) -> Mat<S> {
    if S::EXACT {
        return m;
    }
    let half = S::one() / S::from_i64(2);
    let mut out = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, j)] = (m[(i, j)].clone() + m[(j, i)].clone()) * half.clone();
        }
    }
    out
}

/// Exact rank (exact regime) or singular-value gap rank (float regime).
pub fn quadric_rank<S: Scalar>(q: &QuadricForm<S>) -> RankCall {
    let evidence = rank_report(&q.m);
    RankCall {
        rank: evidence.rank,
        evidence,
    }
}

/// Covector of the tangent hyperplane of `q` at `x`.
pub fn tangent_hyperplane<S: Scalar>(q: &QuadricForm<S>, x: &[S], tol: f64) -> Result<Vec<S>, GeomError> {
    let on = if S::EXACT { q.eval(x).is_zero() } else { q.residual(x) <= tol };
    if !on {
        return Err(GeomError::NotOnQuadric);
    }
    let h = q.m.mul_vec(x)?;
    let scale = x.iter().map(Scalar::modulus).fold(0.0, f64::max)
        * q.m.to_rows().iter().flatten().map(Scalar::modulus).fold(0.0, f64::max);
    if h.iter().all(|c| c.is_negligible(scale, tol)) {
        return Err(GeomError::Vertex);
    }
    Ok(h)
}

/// An invertible linear map acting on points and covectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Projectivity<S> {
    m: Mat<S>,
    inv: Mat<S>,
    pub label: Option<String>,
}

impl<S: Scalar> Projectivity<S> {
    pub fn new(m: Mat<S>) -> Result<Self, GeomError> {
        let inv = m.inverse().map_err(|_| GeomError::Degenerate("singular projectivity".into()))?;
        Ok(Projectivity { m, inv, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn matrix(&self) -> &Mat<S> {
        &self.m
    }

    pub fn apply_point(&self, x: &[S]) -> Vec<S> {
        self.m.mul_vec(x).expect("matching length")
    }

    /// Image of a hyperplane `c`: the covector `c M^{-1}`.
    pub fn apply_covector(&self, c: &[S]) -> Vec<S> {
        self.inv.transpose().mul_vec(c).expect("matching length")
    }

    pub fn compose(&self, other: &Self) -> Self {
        Projectivity {
            m: self.m.mul_mat(&other.m).expect("square"),
            inv: other.inv.mul_mat(&self.inv).expect("square"),
            label: None,
        }
    }

    pub fn inverse(&self) -> Self {
        Projectivity {
            m: self.inv.clone(),
            inv: self.m.clone(),
            label: None,
        }
    }

    /// Canonical scale representative of the matrix entries, for set membership tests.
    pub fn normalized_entries(&self) -> Vec<S> {
        let mut e: Vec<S> = self.m.to_rows().into_iter().flatten().collect();
        S::normalize_projective(&mut e);
        e
    }
}

/// `x_0 y_1 - x_1 y_0` for points of the projective line.
pub fn bracket<S: Scalar>(x: &[S; 2], y: &[S; 2]) -> S {
    x[0].clone() * y[1].clone() - x[1].clone() * y[0].clone()
}

/// Cross-ratio of four points of the projective line, as a homogeneous pair.
///
/// This is the image of `d` under the Möbius map sending `a, b, c` to
/// `0, 1, ∞`, with `∞ = (1 : 0)`.
pub fn cross_ratio<S: Scalar>(a: &[S; 2], b: &[S; 2], c: &[S; 2], d: &[S; 2], tol: f64) -> Result<[S; 2], GeomError> {
    for (x, y) in [(a, b), (a, c), (b, c)] {
        let scale = (x[0].modulus().max(x[1].modulus())) * (y[0].modulus().max(y[1].modulus()));
        if bracket(x, y).is_negligible(scale, tol) {
            return Err(GeomError::Coincident);
        }
    }
    let num = bracket(d, a) * bracket(b, c);
    let den = bracket(d, c) * bracket(b, a);
    let mut out = [num, den];
    S::normalize_projective(&mut out);
    Ok(out)
}

/// Affine value of a point of the projective line, `None` at `∞`.
pub fn affine_value<S: Scalar>(x: &[S; 2], tol: f64) -> Option<S> {
    let scale = x[0].modulus().max(x[1].modulus());
    if x[1].is_negligible(scale, tol) {
        None
    } else {
        Some(x[0].clone() / x[1].clone())
    }
}

/// Coordinates `(s, t)` with `x = s * a + t * b` for a point on the line `ab`.
pub fn line_parameter<S: Scalar>(line: &ProjLine<S>, x: &[S]) -> Result<[S; 2], GeomError> {
    let (a, b) = line.points();
    let m = Mat::from_cols(&[a.coords().to_vec(), b.coords().to_vec()])?;
    // least-squares-free: solve on the two best-conditioned coordinates
    let n = x.len();
    let mut best = (0, 1);
    let mut best_val = -1.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = (m[(i, 0)].clone() * m[(j, 1)].clone() - m[(i, 1)].clone() * m[(j, 0)].clone()).modulus();
            if d > best_val {
                best_val = d;
                best = (i, j);
            }
        }
    }
    let (i, j) = best;
    let det = m[(i, 0)].clone() * m[(j, 1)].clone() - m[(i, 1)].clone() * m[(j, 0)].clone();
    let s = (x[i].clone() * m[(j, 1)].clone() - x[j].clone() * m[(i, 1)].clone()) / det.clone();
    let t = (m[(i, 0)].clone() * x[j].clone() - m[(j, 0)].clone() * x[i].clone()) / det;
    Ok([s, t])
}

/// A degree-2 parametrization of a smooth conic by lines through a seed point.
///
/// With `v = b u + a w`, the parameter `(a : b)` maps to
/// `-Q(v) seed + 2 B(seed, v) v`; the seed itself has parameter `(1 : 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicParam<S> {
    q: QuadricForm<S>,
    seed: Vec<S>,
    u: Vec<S>,
    w: Vec<S>,
    frame_inv: Mat<S>,
}

pub fn conic_parametrize<S: Scalar>(c: &QuadricForm<S>, seed: &[S], tol: f64) -> Result<ConicParam<S>, GeomError> {
    if c.m.rows() != 3 {
        return Err(NumError::DimensionMismatch("a conic lives on a plane".into()).into());
    }
    let rank = quadric_rank(c).rank;
    if rank < 3 {
        return Err(GeomError::RankDeficient(rank));
    }
    let on = if S::EXACT { c.eval(seed).is_zero() } else { c.residual(seed) <= tol };
    if !on {
        return Err(GeomError::NotOnQuadric);
    }
    let h = c.m.mul_vec(seed)?;
    let tangent = Mat::from_rows(&[h.clone()])?.kernel();
    let seed_mod = seed.iter().map(Scalar::modulus).fold(0.0, f64::max);
    let w = tangent
        .iter()
        .max_by(|p, q| {
            let dp = vector_distance_any(p, seed);
            let dq = vector_distance_any(q, seed);
            dp.total_cmp(&dq)
        })
        .cloned()
        .ok_or(GeomError::Vertex)?;
    let mut best = 0;
    for i in 0..3 {
        if h[i].modulus() > h[best].modulus() {
            best = i;
        }
    }
    if h[best].is_negligible(seed_mod, tol) {
        return Err(GeomError::Vertex);
    }
    let mut u = vec![S::zero(); 3];
    u[best] = S::one();
    let frame = Mat::from_cols(&[seed.to_vec(), u.clone(), w.clone()])?;
    let frame_inv = frame.inverse().map_err(|_| GeomError::Dependent)?;
    Ok(ConicParam {
        q: c.clone(),
        seed: seed.to_vec(),
        u,
        w,
        frame_inv,
    })
}

fn vector_distance_any<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    let u: Vec<CFloat> = a.iter().map(Scalar::to_cfloat).collect();
    let v: Vec<CFloat> = b.iter().map(Scalar::to_cfloat).collect();
    vector_distance(&u, &v)
}

impl<S: Scalar> ConicParam<S> {
    pub fn seed(&self) -> &[S] {
        &self.seed
    }

    pub fn eval(&self, t: &[S; 2]) -> Vec<S> {
        let v: Vec<S> = (0..3)
            .map(|i| t[1].clone() * self.u[i].clone() + t[0].clone() * self.w[i].clone())
            .collect();
        let qv = self.q.eval(&v);
        let bv = self.q.bilinear(&self.seed, &v);
        let two = S::from_i64(2);
        (0..3)
            .map(|i| -(qv.clone() * self.seed[i].clone()) + two.clone() * bv.clone() * v[i].clone())
            .collect()
    }

    /// Parameter of a point of the conic.
    pub fn inverse(&self, x: &[S]) -> [S; 2] {
        let c = self.frame_inv.mul_vec(x).expect("length 3");
        let mut t = [c[2].clone(), c[1].clone()];
        let scale = c.iter().map(Scalar::modulus).fold(0.0, f64::max);
        if t[0].is_negligible(scale, 1e-13) && t[1].is_negligible(scale, 1e-13) {
            return [S::one(), S::zero()];
        }
        S::normalize_projective(&mut t);
        t
    }
}

/// The points of a quadric whose tangent hyperplane contains a given codimension-2 space.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarPoints<S> {
    /// The two points in the working field, when the discriminant is a square there.
    pub exact: Option<[Vec<S>; 2]>,
    pub approx: [Vec<CFloat>; 2],
    pub coincident: bool,
    /// Relative size of the discriminant of the quadratic in the pencil parameter.
    pub discriminant: f64,
}

/// Intersects the polar line `M^{-1} span(c1, c2)` of a plane with the quadric.
pub fn polar_points_on_quadric<S: Scalar>(
    q: &QuadricForm<S>,
    plane: &Subspace<S>,
    tol: f64,
) -> Result<PolarPoints<S>, GeomError> {
    if plane.covectors().len() != 2 {
        return Err(GeomError::Degenerate("expected a codimension-2 subspace".into()));
    }
    let inv = q.m.inverse().map_err(|_| GeomError::RankDeficient(quadric_rank(q).rank))?;
    let y1 = inv.mul_vec(&plane.covectors()[0])?;
    let y2 = inv.mul_vec(&plane.covectors()[1])?;
    let a = q.eval(&y1);
    let b = q.bilinear(&y1, &y2);
    let c = q.eval(&y2);
    // a s^2 + 2 b s t + c t^2 = 0
    let disc = b.clone() * b.clone() - a.clone() * c.clone();
    let scale = a.modulus().max(b.modulus()).max(c.modulus());
    let coincident = disc.is_negligible(scale * scale, tol);
    let combine = |s: &CFloat, t: &CFloat| -> Vec<CFloat> {
        let mut v: Vec<CFloat> = y1.iter().zip(&y2).map(|(p, r)| s * p.to_cfloat() + t * r.to_cfloat()).collect();
        CFloat::normalize_projective(&mut v);
        v
    };
    let roots_f = quadratic_roots(&a.to_cfloat(), &b.to_cfloat(), &c.to_cfloat());
    let approx = [combine(&roots_f[0][0], &roots_f[0][1]), combine(&roots_f[1][0], &roots_f[1][1])];
    let exact = disc.sqrt_in_field().map(|r| {
        let pair = exact_quadratic_roots(&a, &b, &c, &r);
        pair.map(|[s, t]| {
            let mut v: Vec<S> = y1.iter().zip(&y2).map(|(p, w)| s.clone() * p.clone() + t.clone() * w.clone()).collect();
            S::normalize_projective(&mut v);
            v
        })
    });
    Ok(PolarPoints {
        exact,
        approx,
        coincident,
        discriminant: disc.modulus() / (scale * scale).max(f64::MIN_POSITIVE),
    })
}

/// Roots `(s : t)` of `a s^2 + 2 b s t + c t^2` given `r = sqrt(b^2 - a c)`.
fn exact_quadratic_roots<S: Scalar>(a: &S, b: &S, c: &S, r: &S) -> [[S; 2]; 2] {
    if !a.is_zero() {
        [
            [-b.clone() + r.clone(), a.clone()],
            [-b.clone() - r.clone(), a.clone()],
        ]
    } else {
        // a = 0: t (2 b s + c t) = 0
        [[S::one(), S::zero()], [-c.clone(), S::from_i64(2) * b.clone()]]
    }
}

fn quadratic_roots<S: Scalar>(a: &S, b: &S, c: &S) -> [[CFloat; 2]; 2] {
    let (a, b, c) = (a.to_cfloat(), b.to_cfloat(), c.to_cfloat());
    let r = (b * b - a * c).sqrt();
    let scale = a.norm().max(b.norm()).max(c.norm());
    if a.norm() <= 1e-14 * scale {
        return [[CFloat::new(1.0, 0.0), CFloat::new(0.0, 0.0)], [-c, 2.0 * b]];
    }
    // avoid cancellation: pick the larger-modulus root first
    let q = if (-b + r).norm() >= (-b - r).norm() { -b + r } else { -b - r };
    // roots s/t = q / a and c / q
    if q.norm() <= 1e-300 {
        return [[CFloat::new(0.0, 0.0), CFloat::new(1.0, 0.0)], [CFloat::new(0.0, 0.0), CFloat::new(1.0, 0.0)]];
    }
    [[q, a], [c, q]]
}

/// The other point `y` of the smooth quadric `q` with `T_y ∩ H = T_x ∩ H`, for the hyperplane `h`.
///
/// `y = (h^T M^{-1} h) x - 2 (h . x) M^{-1} h`; `y = x` exactly when `x` is on the polar of `h`.
pub fn partner_point<S: Scalar>(q: &QuadricForm<S>, x: &[S], h: &[S]) -> Result<Vec<S>, GeomError> {
    let inv = q.m.inverse().map_err(|_| GeomError::RankDeficient(quadric_rank(q).rank))?;
    let mh = inv.mul_vec(h)?;
    let hmh = dot(h, &mh);
    let hx = dot(h, x);
    let two = S::from_i64(2);
    let mut y: Vec<S> = x
        .iter()
        .zip(&mh)
        .map(|(xi, mi)| hmh.clone() * xi.clone() - two.clone() * hx.clone() * mi.clone())
        .collect();
    if y.iter().all(|c| c.is_zero()) {
        return Err(GeomError::Degenerate("polar point of the hyperplane".into()));
    }
    S::normalize_projective(&mut y);
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::scalar::{int, rat, Rational};

    fn pt(c: &[i64]) -> ProjPoint<Rational> {
        ProjPoint::from_ints(c).unwrap()
    }

    #[test]
    fn plucker_independent_of_spanning_pair() {
        let a = pt(&[1, 2, 0, -1]);
        let b = pt(&[0, 1, 3, 2]);
        let l1 = ProjLine::through(&a, &b).unwrap();
        let c = ProjPoint::new(l1.point_at(&int(3), &int(-2))).unwrap();
        let d = ProjPoint::new(l1.point_at(&rat(1, 2), &int(5))).unwrap();
        let l2 = ProjLine::through(&c, &d).unwrap();
        assert_eq!(l1.plucker(), l2.plucker());
        assert!(l1.grassmann_residuals().iter().all(|r| r == &int(0)));
        assert!(l1.distance(&l2) < 1e-15);
    }

    #[test]
    fn dependent_points_do_not_span_a_line() {
        assert_eq!(ProjLine::through(&pt(&[1, 2, 3]), &pt(&[2, 4, 6])), Err(GeomError::Dependent));
    }

    #[test]
    fn rank_of_diagonal_quadric() {
        let q = QuadricForm::diagonal(&[int(1), int(1), int(1), int(0)]);
        assert_eq!(quadric_rank(&q).rank, 3);
        let f = q.to_cfloat();
        let call = quadric_rank(&f);
        assert_eq!(call.rank, 3);
        assert!(!call.evidence.ill_conditioned);
    }

    #[test]
    fn cross_ratio_normalization() {
        let zero = [int(0), int(1)];
        let one = [int(1), int(1)];
        let inf = [int(1), int(0)];
        let two = [int(2), int(1)];
        assert_eq!(cross_ratio(&zero, &one, &inf, &two, 0.0).unwrap(), [int(2), int(1)]);
        // swapping the first two points sends λ to 1 - λ
        assert_eq!(cross_ratio(&one, &zero, &inf, &two, 0.0).unwrap(), [int(1), int(-1)]);
        assert_eq!(cross_ratio(&zero, &zero, &inf, &two, 0.0), Err(GeomError::Coincident));
    }

    #[test]
    fn circle_parametrization() {
        let q = QuadricForm::diagonal(&[int(1), int(1), int(-1)]);
        let seed = vec![int(1), int(0), int(1)];
        let p = conic_parametrize(&q, &seed, 0.0).unwrap();
        for (a, b) in [(0, 1), (1, 1), (2, -3), (5, 7), (1, 0)] {
            let t = [int(a), int(b)];
            let x = p.eval(&t);
            assert_eq!(q.eval(&x), int(0));
            let mut back = p.inverse(&x);
            let mut want = t.clone();
            Rational::normalize_projective(&mut back);
            Rational::normalize_projective(&mut want);
            assert_eq!(back, want);
        }
        assert_eq!(p.inverse(&seed), [int(1), int(0)]);
    }

    #[test]
    fn degenerate_conic_is_rejected() {
        // x y: two lines
        let mut m = Mat::zeros(3, 3);
        m[(0, 1)] = rat(1, 2);
        m[(1, 0)] = rat(1, 2);
        let q = QuadricForm::new(m).unwrap();
        let err = conic_parametrize(&q, &[int(1), int(0), int(0)], 0.0).unwrap_err();
        assert_eq!(err, GeomError::RankDeficient(2));
    }

    #[test]
    fn tangent_hyperplane_contains_point_and_rejects_vertex() {
        let q = QuadricForm::diagonal(&[int(1), int(1), int(1), int(-1), int(0)]);
        let x = vec![int(1), int(0), int(0), int(1), int(0)];
        let h = tangent_hyperplane(&q, &x, 0.0).unwrap();
        assert_eq!(h, vec![int(1), int(0), int(0), int(-1), int(0)]);
        assert_eq!(dot(&h, &x), int(0));
        let vertex = vec![int(0), int(0), int(0), int(0), int(1)];
        assert_eq!(tangent_hyperplane(&q, &vertex, 0.0), Err(GeomError::Vertex));
    }

    #[test]
    fn polar_points_match_tangent_containment() {
        let q = QuadricForm::diagonal(&[int(1), int(1), int(-1), int(-1), int(1)]);
        // plane x0 = x2 = 0
        let plane = Subspace::from_equations(
            4,
            &[
                vec![int(1), int(0), int(0), int(0), int(0)],
                vec![int(0), int(0), int(1), int(0), int(0)],
            ],
        )
        .unwrap();
        let pp = polar_points_on_quadric(&q, &plane, 1e-12).unwrap();
        assert!(!pp.coincident);
        let pts = pp.exact.expect("square discriminant");
        for x in &pts {
            assert_eq!(q.eval(x), int(0));
            let h = tangent_hyperplane(&q, x, 0.0).unwrap();
            for b in plane.basis() {
                assert_eq!(dot(&h, &b), int(0));
            }
        }
        assert_ne!(pts[0], pts[1]);
    }

    #[test]
    fn partner_shares_tangent_section() {
        // x0 x3 - x1 x2 + x4^2 with hyperplane x4 = 0
        let mut m = Mat::zeros(5, 5);
        m[(0, 3)] = rat(1, 2);
        m[(3, 0)] = rat(1, 2);
        m[(1, 2)] = rat(-1, 2);
        m[(2, 1)] = rat(-1, 2);
        m[(4, 4)] = int(1);
        let q = QuadricForm::new(m).unwrap();
        let x = vec![int(2), int(3), int(1), rat(1, 2), int(1)];
        // 2 * 1/2 - 3 + 1 = -1 ... adjust x3 so that x lies on q
        let x3 = (x[1].clone() * x[2].clone() - x[4].clone() * x[4].clone()) / x[0].clone();
        let x = vec![x[0].clone(), x[1].clone(), x[2].clone(), x3, x[4].clone()];
        assert_eq!(q.eval(&x), int(0));
        let h = vec![int(0), int(0), int(0), int(0), int(1)];
        let y = partner_point(&q, &x, &h).unwrap();
        assert_eq!(q.eval(&y), int(0));
        let tx = tangent_hyperplane(&q, &x, 0.0).unwrap();
        let ty = tangent_hyperplane(&q, &y, 0.0).unwrap();
        let sx = Subspace::from_equations(4, &[tx, h.clone()]).unwrap();
        let sy = Subspace::from_equations(4, &[ty, h.clone()]).unwrap();
        assert_eq!(sx, sy);
        let mut xn = x.clone();
        Rational::normalize_projective(&mut xn);
        assert_ne!(y, xn);
        assert_eq!(partner_point(&q, &y, &h).unwrap(), xn);
    }

    #[test]
    fn projectivity_preserves_incidence() {
        let m = Mat::from_rows(&[
            vec![int(1), int(2), int(0)],
            vec![int(0), int(1), int(3)],
            vec![int(1), int(0), int(1)],
        ])
        .unwrap();
        let g = Projectivity::new(m).unwrap();
        let x = vec![int(1), int(-1), int(2)];
        let c = vec![int(1), int(1), int(0)];
        assert_eq!(dot(&c, &x), int(0));
        assert_eq!(dot(&g.apply_covector(&c), &g.apply_point(&x)), int(0));
        let id = g.compose(&g.inverse());
        assert_eq!(id.matrix(), &Mat::identity(3));
    }
}
