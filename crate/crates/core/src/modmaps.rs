//! Modular maps and the degree count.
//!
//! * `phi_prime`: planes of P^3 to M_{0,6}, through the six points a plane
//!   cuts on three lines of each ruling of the quadric `x0 x3 = x1 x2`.
//! * `phi0` / `phi_general`: a point of a cubic threefold to M_2, through the
//!   six lines of the cubic passing through it.
//! * `exceptional_map`: a point of the quadric `x0 x3 - x1 x2 + x4^2` in P^4
//!   to M_2, through the plane its tangent hyperplane cuts on `x4 = 0`.
//!
//! The quadric surface is the Segre embedding
//! `((s0:s1),(t0:t1)) -> (s0 t0, s0 t1, s1 t0, s1 t1)`. Lines 0, 1, 2 are
//! `s = 0, 1, ∞` and lines 3, 4, 5 are `t = 0, 1, ∞`.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lines3fold::{lines_through, CubicThreefold, FanKind};
use crate::moduli::{
    boundary_invariants, igusa_clebsch, m06_coords, m2_equal, m2_margin, marked_conic_to_sextic, BinarySextic,
    BoundaryM06Point, IgusaInvariants, M06Point, MarkedConic,
};
use crate::numkit::linalg::{null_vector, numerical_rank, Mat, RankReport, RANK_GAP_THRESHOLD};
use crate::numkit::scalar::{int, CFloat, Rational, Scalar};
use crate::projgeom::{partner_point, quadric_rank, ProjLine, Projectivity, QuadricForm};
use crate::sample::{complex_unit, nonzero_int, small_int, SeededRng};
use crate::segre::{NodalCubic, SegreModel};

pub const NEWTON_TOL: f64 = 1e-12;
pub const CLUSTER_RADIUS: f64 = 1e-6;
/// Seeds per chart coordinate in the local-degree search.
pub const SEED_GRID: usize = 5;
/// The local-degree search ball has radius `SEARCH_RADIUS_FACTOR * eps`.
pub const SEARCH_RADIUS_FACTOR: f64 = 10.0;
pub const EPSILON_RANGE: (f64, f64) = (1e-6, 1e-3);
pub const PENCIL_RATIO_TOL: f64 = 1e-6;
pub const ORBIT_MARGIN: f64 = 1e-8;
/// Float tolerance for the six-point invariants.
pub const INVARIANT_TOL: f64 = 1e-9;
const NEWTON_MAX_STEPS: usize = 60;
const FD_STEP: f64 = 1e-7;

pub const GROUP_ORDER: usize = 72;
pub const S6_ORDER: usize = 720;

/// Homogeneous coordinates of `0, 1, ∞` on P^1.
fn special_points() -> [[Rational; 2]; 3] {
    [[int(0), int(1)], [int(1), int(1)], [int(1), int(0)]]
}

pub fn segre_point<S: Scalar>(s: &[S; 2], t: &[S; 2]) -> Vec<S> {
    vec![
        s[0].clone() * t[0].clone(),
        s[0].clone() * t[1].clone(),
        s[1].clone() * t[0].clone(),
        s[1].clone() * t[1].clone(),
    ]
}

/// A projectivity of P^3 preserving the six lines, with the induced permutation.
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub map: Projectivity<Rational>,
    /// Line `i` is sent to line `perm[i]`.
    pub perm: [usize; 6],
    /// True when the two rulings are exchanged.
    pub swaps_rulings: bool,
}

/// The quadric surface with three lines in each ruling and its symmetry group.
#[derive(Clone, Debug)]
pub struct RulingConfig {
    pub quadric: QuadricForm<Rational>,
    pub lines: Vec<ProjLine<Rational>>,
    pub group: Vec<GroupElement>,
}

fn segre_quadric() -> QuadricForm<Rational> {
    let mut m = Mat::zeros(4, 4);
    let half = Rational::new(1.into(), 2.into());
    m[(0, 3)] = half.clone();
    m[(3, 0)] = half.clone();
    m[(1, 2)] = -half.clone();
    m[(2, 1)] = -half;
    QuadricForm::new(m).expect("symmetric")
}

fn kron(a: &[[i64; 2]; 2], b: &[[i64; 2]; 2]) -> Mat<Rational> {
    let mut m = Mat::zeros(4, 4);
    for (i, j, k, l) in itertools::iproduct!(0..2, 0..2, 0..2, 0..2) {
        m[(2 * i + j, 2 * k + l)] = int(a[i][k] * b[j][l]);
    }
    m
}

impl RulingConfig {
    pub fn standard() -> Result<Self> {
        let quadric = segre_quadric();
        let pts = special_points();
        let (e0, e1) = ([int(1), int(0)], [int(0), int(1)]);
        let mut lines = Vec::with_capacity(6);
        for s in &pts {
            lines.push(ProjLine::from_coords(segre_point(s, &e0), segre_point(s, &e1))?);
        }
        for t in &pts {
            lines.push(ProjLine::from_coords(segre_point(&e0, t), segre_point(&e1, t))?);
        }
        let mut cfg = RulingConfig {
            quadric,
            lines,
            group: Vec::new(),
        };
        cfg.group = build_g(&cfg)?;
        Ok(cfg)
    }

    /// Index of a line of the configuration.
    pub fn line_index(&self, l: &ProjLine<Rational>) -> Option<usize> {
        self.lines.iter().position(|m| m.same_as(l))
    }

    /// Plane tangent to the quadric at the image of `(s, t)`.
    pub fn tangent_plane(&self, s: &[Rational; 2], t: &[Rational; 2]) -> Vec<Rational> {
        let p = segre_point(s, t);
        let mut h = self.quadric.matrix().mul_vec(&p).expect("length 4");
        Rational::normalize_projective(&mut h);
        h
    }

    /// Elements fixing the rulings.
    pub fn ruling_subgroup(&self) -> Vec<&GroupElement> {
        self.group.iter().filter(|g| !g.swaps_rulings).collect()
    }
}

/// Closure of the anharmonic maps on each factor and the factor swap.
pub fn build_g(cfg: &RulingConfig) -> Result<Vec<GroupElement>> {
    let id = [[1, 0], [0, 1]];
    // s -> 1/s and s -> 1 - s permute {0, 1, ∞}
    let inv = [[0, 1], [1, 0]];
    let refl = [[-1, 1], [0, 1]];
    let mut swap = Mat::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        swap[(i, j)] = int(1);
    }
    let generators = [kron(&inv, &id), kron(&refl, &id), kron(&id, &inv), kron(&id, &refl), swap];
    let generators: Vec<Projectivity<Rational>> =
        generators.into_iter().map(Projectivity::new).collect::<std::result::Result<_, _>>()?;
    let identity = Projectivity::new(Mat::identity(4))?;
    let mut seen = BTreeSet::new();
    seen.insert(key(&identity));
    let mut elements = vec![identity];
    let mut frontier = 0;
    while frontier < elements.len() {
        let g = elements[frontier].clone();
        frontier += 1;
        for h in &generators {
            let gh = h.compose(&g);
            if seen.insert(key(&gh)) {
                elements.push(gh);
            }
        }
        if elements.len() > GROUP_ORDER {
            break;
        }
    }
    if elements.len() != GROUP_ORDER {
        return Err(Error::CheckFailed(format!("group closure has {} elements", elements.len())));
    }
    elements
        .into_iter()
        .map(|map| {
            let mut perm = [0; 6];
            for (i, l) in cfg.lines.iter().enumerate() {
                let (a, b) = l.points();
                let image = ProjLine::from_coords(map.apply_point(a.coords()), map.apply_point(b.coords()))?;
                perm[i] = cfg
                    .line_index(&image)
                    .ok_or_else(|| Error::CheckFailed("group element moves a line off the configuration".into()))?;
            }
            let swaps_rulings = perm[0] >= 3;
            Ok(GroupElement { map, perm, swaps_rulings })
        })
        .collect()
}

fn key(g: &Projectivity<Rational>) -> Vec<String> {
    g.normalized_entries().iter().map(|x| x.to_string()).collect()
}

/// Image of a plane of P^3 in M_{0,6}.
#[derive(Clone, Debug, PartialEq)]
pub enum PhiPrimeValue<S> {
    Interior(M06Point<S>),
    Boundary(BoundaryM06Point<S>),
}

impl<S: Scalar> PhiPrimeValue<S> {
    /// Coordinates `(λ4, λ5, λ6)`, continued to boundary points where labels
    /// 0, 1, 2 share a component: there all three equal that component's node.
    pub fn lambda_chart(&self) -> Result<[CFloat; 3]> {
        match self {
            PhiPrimeValue::Interior(m) => Ok(m.to_cfloat().lambda),
            PhiPrimeValue::Boundary(b) if b.partition() == [[0, 1, 2], [3, 4, 5]] => {
                let n = b.components[0].node.to_cfloat();
                Ok([n, n, n])
            }
            PhiPrimeValue::Boundary(b) => Err(Error::Degenerate(format!(
                "cross-ratio chart does not extend to the boundary stratum {:?}",
                b.partition()
            ))),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            PhiPrimeValue::Interior(m) => serde_json::json!({ "interior": m.to_json() }),
            PhiPrimeValue::Boundary(b) => serde_json::json!({ "boundary": b.to_json() }),
        }
    }
}

/// Coordinates of `x` in the span of `basis`: solves on the best-conditioned rows.
pub fn coords_in_basis<S: Scalar>(basis: &[Vec<S>], x: &[S]) -> Result<Vec<S>> {
    let k = basis.len();
    let b = Mat::from_cols(basis)?;
    let rows = (0..x.len())
        .combinations(k)
        .max_by(|r1, r2| {
            let d = |r: &Vec<usize>| {
                let sub: Vec<Vec<S>> = r.iter().map(|&i| b.row(i)).collect();
                Mat::from_rows(&sub).and_then(|m| m.det()).map(|d| d.modulus()).unwrap_or(0.0)
            };
            d(r1).total_cmp(&d(r2))
        })
        .ok_or_else(|| Error::Degenerate("empty basis".into()))?;
    let sub: Vec<Vec<S>> = rows.iter().map(|&i| b.row(i)).collect();
    let rhs: Vec<S> = rows.iter().map(|&i| x[i].clone()).collect();
    Mat::from_rows(&sub)?
        .solve(&rhs)?
        .ok_or_else(|| Error::Degenerate("basis vectors are dependent".into()))
}

/// Points where the plane `h` meets the six lines, in line order.
pub fn plane_marks<S: Scalar>(cfg: &RulingConfig, h: &[S]) -> Result<Vec<Vec<S>>> {
    let tol = if S::EXACT { 0.0 } else { 1e-12 };
    let hn = h.iter().map(Scalar::modulus).fold(0.0, f64::max);
    cfg.lines
        .iter()
        .map(|l| {
            let (a, b) = l.points();
            let a: Vec<S> = a.coords().iter().map(S::from_rational).collect();
            let b: Vec<S> = b.coords().iter().map(S::from_rational).collect();
            let (ha, hb) = (dot(h, &a), dot(h, &b));
            let scale = hn * a.iter().chain(&b).map(Scalar::modulus).fold(0.0, f64::max);
            if ha.is_negligible(scale, tol) && hb.is_negligible(scale, tol) {
                return Err(Error::Degenerate("plane contains a line of the configuration".into()));
            }
            let mut x: Vec<S> = a.iter().zip(&b).map(|(p, q)| hb.clone() * p.clone() - ha.clone() * q.clone()).collect();
            S::normalize_projective(&mut x);
            Ok(x)
        })
        .collect()
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// `phi_prime` with the point on line `j` carrying label `labels[j]`.
pub fn phi_prime_labeled<S: Scalar>(cfg: &RulingConfig, h: &[S], labels: &[usize; 6]) -> Result<PhiPrimeValue<S>> {
    if h.len() != 4 || h.iter().all(|x| x.is_zero()) {
        return Err(Error::Degenerate("a plane of P^3 needs a nonzero covector of length 4".into()));
    }
    let marks = plane_marks(cfg, h)?;
    let basis = Mat::from_rows(&[h.to_vec()])?.kernel();
    let q = QuadricForm::new(cfg.quadric.matrix().map(S::from_rational))?;
    let conic = q.restrict(&basis)?;
    let tol = if S::EXACT { 0.0 } else { 1e-9 };
    match quadric_rank(&conic).rank {
        3 => {
            let coords: Vec<Vec<S>> = marks.iter().map(|x| coords_in_basis(&basis, x)).collect::<Result<_>>()?;
            let sextic = marked_conic_to_sextic(&MarkedConic::new(conic, coords)?)?;
            let perm: Vec<usize> = labels.to_vec();
            Ok(PhiPrimeValue::Interior(m06_coords(&sextic.relabel(&perm), tol)?))
        }
        2 => {
            // a tangent plane meets the quadric in one line of each ruling;
            // the points of lines 0-2 lie on one, those of lines 3-5 on the other
            let a = ProjLine::from_coords(marks[0].clone(), marks[1].clone())
                .map_err(|_| Error::Degenerate("marked points coincide".into()))?;
            let b = ProjLine::from_coords(marks[3].clone(), marks[4].clone())
                .map_err(|_| Error::Degenerate("marked points coincide".into()))?;
            if !a.contains(&marks[2], 1e-9) || !b.contains(&marks[5], 1e-9) {
                return Err(Error::Degenerate("marked points are not split 3 + 3 by the two lines".into()));
            }
            let am: Vec<(usize, Vec<S>)> = (0..3).map(|j| (labels[j], marks[j].clone())).collect();
            let bm: Vec<(usize, Vec<S>)> = (3..6).map(|j| (labels[j], marks[j].clone())).collect();
            Ok(PhiPrimeValue::Boundary(boundary_invariants(&a, &am, &b, &bm, tol)?))
        }
        r => Err(Error::Degenerate(format!("plane section of rank {r}"))),
    }
}

pub fn phi_prime<S: Scalar>(cfg: &RulingConfig, h: &[S]) -> Result<PhiPrimeValue<S>> {
    phi_prime_labeled(cfg, h, &[0, 1, 2, 3, 4, 5])
}

/// Result of comparing the images of the G-orbit of a plane.
#[derive(Clone, Debug, Serialize)]
pub struct GOrbitReport {
    pub orbit_size: usize,
    pub stabilizer_order: usize,
    pub boundary_images: usize,
    /// Orbit images equal to the image of the plane after label matching.
    pub images_equal: usize,
    /// Distinct images when labels are not matched.
    pub unmatched_distinct: usize,
}

impl GOrbitReport {
    pub fn all_pass(&self) -> bool {
        self.orbit_size == GROUP_ORDER
            && self.stabilizer_order == 1
            && self.boundary_images == GROUP_ORDER
            && self.images_equal == GROUP_ORDER
    }
}

/// Images of `g.h` for every `g` in G, relabelled by the permutation g induces.
pub fn g_orbit_fiber_check(cfg: &RulingConfig, h: &[Rational]) -> Result<GOrbitReport> {
    let base = phi_prime(cfg, h)?;
    let mut planes = BTreeSet::new();
    let mut stabilizer_order = 0;
    let mut boundary_images = 0;
    let mut images_equal = 0;
    let mut unmatched = Vec::new();
    let mut hn = h.to_vec();
    Rational::normalize_projective(&mut hn);
    for g in &cfg.group {
        let mut gh = g.map.apply_covector(h);
        Rational::normalize_projective(&mut gh);
        if gh == hn {
            stabilizer_order += 1;
        }
        planes.insert(gh.iter().map(|x| x.to_string()).join(","));
        // the point of g.h on line perm[i] is the image of the point on line i
        let mut labels = [0; 6];
        for i in 0..6 {
            labels[g.perm[i]] = i;
        }
        let matched = phi_prime_labeled(cfg, &gh, &labels)?;
        if matches!(matched, PhiPrimeValue::Boundary(_)) {
            boundary_images += 1;
        }
        if matched == base {
            images_equal += 1;
        }
        let plain = phi_prime(cfg, &gh)?;
        if !unmatched.contains(&plain) {
            unmatched.push(plain);
        }
    }
    Ok(GOrbitReport {
        orbit_size: planes.len(),
        stabilizer_order,
        boundary_images,
        images_equal,
        unmatched_distinct: unmatched.len(),
    })
}

/// Affine chart of plane space fixing the largest covector entry to 1.
#[derive(Clone, Debug)]
pub struct PlaneChart {
    pub fixed: usize,
    pub origin: Vec<CFloat>,
}

impl PlaneChart {
    pub fn around(h: &[CFloat]) -> Self {
        let fixed = (0..h.len()).max_by(|&i, &j| h[i].norm().total_cmp(&h[j].norm())).expect("nonempty");
        let origin = (0..h.len()).filter(|&i| i != fixed).map(|i| h[i] / h[fixed]).collect();
        PlaneChart { fixed, origin }
    }

    pub fn plane(&self, z: &[CFloat]) -> Vec<CFloat> {
        let mut h = z.to_vec();
        h.insert(self.fixed, CFloat::new(1.0, 0.0));
        h
    }
}

/// `phi_prime` in the cross-ratio chart, at chart coordinates `z`.
pub fn chart_value(cfg: &RulingConfig, chart: &PlaneChart, z: &[CFloat]) -> Result<[CFloat; 3]> {
    phi_prime(cfg, &chart.plane(z))?.lambda_chart()
}

/// Central-difference Jacobian of the chart map.
pub fn chart_jacobian(cfg: &RulingConfig, chart: &PlaneChart, z: &[CFloat], step: f64) -> Result<Mat<CFloat>> {
    jacobian(&|x| chart_value(cfg, chart, x).ok(), z, step)
        .ok_or_else(|| Error::Degenerate("chart map undefined near the plane".into()))
}

fn norm(v: &[CFloat]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// A map `C^3 -> C^3`; `None` where undefined.
pub type Map3<'a> = dyn Fn(&[CFloat]) -> Option<[CFloat; 3]> + 'a;

/// Central-difference Jacobian of a map.
pub fn jacobian(f: &Map3, z: &[CFloat], step: f64) -> Option<Mat<CFloat>> {
    let mut jac = Mat::zeros(3, 3);
    for j in 0..3 {
        let (mut zp, mut zm) = (z.to_vec(), z.to_vec());
        zp[j] += step;
        zm[j] -= step;
        let (fp, fm) = (f(&zp)?, f(&zm)?);
        for i in 0..3 {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    Some(jac)
}

/// Newton iteration for `f(z) = target` with step halving.
pub fn newton_solve(f: &Map3, start: &[CFloat], target: &[CFloat; 3]) -> Option<Vec<CFloat>> {
    let scale = norm(target).max(1.0);
    let residual = |z: &[CFloat]| -> Option<(Vec<CFloat>, f64)> {
        let v = f(z)?;
        let r: Vec<CFloat> = (0..3).map(|i| v[i] - target[i]).collect();
        let n = norm(&r);
        n.is_finite().then_some((r, n))
    };
    let mut z = start.to_vec();
    let (mut r, mut rn) = residual(&z)?;
    for _ in 0..NEWTON_MAX_STEPS {
        if rn <= NEWTON_TOL * scale {
            return Some(z);
        }
        let jac = jacobian(f, &z, FD_STEP * norm(&z).max(1.0))?;
        let minus_r: Vec<CFloat> = r.iter().map(|x| -x).collect();
        let dz = jac.solve(&minus_r).ok()??;
        let mut t = 1.0;
        loop {
            let trial: Vec<CFloat> = z.iter().zip(&dz).map(|(a, b)| a + b * t).collect();
            match residual(&trial) {
                Some((rt, nt)) if nt < rn => {
                    z = trial;
                    r = rt;
                    rn = nt;
                    break;
                }
                _ => t *= 0.5,
            }
            if t < 1e-3 {
                return None;
            }
        }
    }
    (rn <= NEWTON_TOL * scale).then_some(z)
}

/// Greedy clusters of points within `radius` of a cluster's first member.
pub fn cluster(points: &[Vec<CFloat>], radius: f64) -> Vec<Vec<CFloat>> {
    let mut reps: Vec<Vec<CFloat>> = Vec::new();
    for p in points {
        let near = reps.iter().any(|r| {
            let d: Vec<CFloat> = r.iter().zip(p).map(|(a, b)| a - b).collect();
            norm(&d) <= radius
        });
        if !near {
            reps.push(p.clone());
        }
    }
    reps
}

/// Count of preimages of a nearby target found near a plane.
#[derive(Clone, Debug, Serialize)]
pub struct LocalDegree {
    pub epsilon: f64,
    pub clusters: usize,
    pub converged: usize,
    pub seeds: usize,
    /// Some cluster contains the perturbed plane the target came from.
    pub contains_source: bool,
}

/// Preimages of `phi_prime(h + eps w)` within `10 eps` of `h`, by Newton from a
/// grid of seeds; the count is the local degree of the map at `h`.
pub fn local_degree(cfg: &RulingConfig, h: &[CFloat], eps: f64, rng: &mut SeededRng) -> Result<LocalDegree> {
    if !(EPSILON_RANGE.0..=EPSILON_RANGE.1).contains(&eps) {
        return Err(Error::Tolerance {
            name: "epsilon".into(),
            value: eps,
        });
    }
    let chart = PlaneChart::around(h);
    let w: Vec<CFloat> = (0..3).map(|_| complex_unit(rng)).collect();
    let wn = norm(&w);
    let source: Vec<CFloat> = chart.origin.iter().zip(&w).map(|(o, d)| o + d * (eps / wn)).collect();
    let target = chart_value(cfg, &chart, &source)?;
    let map = |z: &[CFloat]| chart_value(cfg, &chart, z).ok();
    let radius = SEARCH_RADIUS_FACTOR * eps;
    let offsets: Vec<f64> = (0..SEED_GRID).map(|k| radius * (2.0 * k as f64 / (SEED_GRID - 1) as f64 - 1.0)).collect();
    let mut solutions = Vec::new();
    let mut seeds = 0;
    for (a, b, c) in itertools::iproduct!(&offsets, &offsets, &offsets) {
        seeds += 1;
        let start: Vec<CFloat> = chart.origin.iter().zip([a, b, c]).map(|(o, d)| o + d).collect();
        if let Some(z) = newton_solve(&map, &start, &target) {
            let d: Vec<CFloat> = z.iter().zip(&chart.origin).map(|(x, o)| x - o).collect();
            if norm(&d) <= radius {
                solutions.push(z);
            }
        }
    }
    if solutions.is_empty() {
        return Err(Error::NoCandidate("Newton diverged from every seed".into()));
    }
    let clusters = cluster(&solutions, CLUSTER_RADIUS);
    let contains_source = clusters.iter().any(|c| {
        let d: Vec<CFloat> = c.iter().zip(&source).map(|(x, o)| x - o).collect();
        norm(&d) <= CLUSTER_RADIUS
    });
    Ok(LocalDegree {
        epsilon: eps,
        clusters: clusters.len(),
        converged: solutions.len(),
        seeds,
        contains_source,
    })
}

/// Numerical rank of the chart Jacobian at a plane, with step halving.
#[derive(Clone, Debug, Serialize)]
pub struct DiffRank {
    pub rank: usize,
    pub half_step_rank: usize,
    pub evidence: RankReport,
}

pub fn diff_rank(cfg: &RulingConfig, h: &[CFloat], step: f64) -> Result<DiffRank> {
    let chart = PlaneChart::around(h);
    let full = numerical_rank(&chart_jacobian(cfg, &chart, &chart.origin, step)?, RANK_GAP_THRESHOLD);
    let half = numerical_rank(&chart_jacobian(cfg, &chart, &chart.origin, step / 2.0)?, RANK_GAP_THRESHOLD);
    if full.ill_conditioned {
        return Err(Error::Degenerate("singular value gap too close to the threshold".into()));
    }
    Ok(DiffRank {
        rank: full.rank,
        half_step_rank: half.rank,
        evidence: full,
    })
}

/// Derivative of the chart map along the pencil of planes through a line of a
/// tangent section, against derivatives along random directions.
#[derive(Clone, Debug, Serialize)]
pub struct PencilDerivative {
    pub pencil_norm: f64,
    pub typical_norm: f64,
    pub ratio: f64,
}

/// Difference quotients at step `1/10^6`, exact: the pencil through the line
/// carrying the points of lines 3-5 stays tangent along that line.
pub fn pencil_derivative(cfg: &RulingConfig, h: &[Rational], rng: &mut SeededRng) -> Result<PencilDerivative> {
    let marks = plane_marks(cfg, h)?;
    let base = phi_prime(cfg, h)?;
    if !matches!(base, PhiPrimeValue::Boundary(_)) {
        return Err(Error::Degenerate("pencil derivative needs a tangent plane".into()));
    }
    let f0 = base.lambda_chart()?;
    let mu = Rational::new(1.into(), 1_000_000.into());
    let quotient = |w: &[Rational]| -> Result<f64> {
        let hp: Vec<Rational> = h.iter().zip(w).map(|(a, b)| a.clone() + mu.clone() * b.clone()).collect();
        let f = phi_prime(cfg, &hp)?.lambda_chart()?;
        let d: Vec<CFloat> = (0..3).map(|i| f[i] - f0[i]).collect();
        Ok(norm(&d) / crate::numkit::scalar::rational_to_f64(&mu))
    };
    // planes through the line b = span(marks[3], marks[4]) other than h
    let through_b = Mat::from_rows(&[marks[3].clone(), marks[4].clone()])?.kernel();
    let hb = through_b
        .into_iter()
        .find(|c| Mat::from_rows(&[c.clone(), h.to_vec()]).map(|m| m.rank() == 2).unwrap_or(false))
        .ok_or_else(|| Error::Degenerate("no second plane through the line".into()))?;
    let pencil_norm = quotient(&hb)?;
    let mut typical = Vec::new();
    while typical.len() < 3 {
        let w: Vec<Rational> = (0..4).map(|_| int(small_int(rng, 9))).collect();
        if let Ok(q) = quotient(&w) {
            typical.push(q);
        }
    }
    let typical_norm = typical.iter().sum::<f64>() / typical.len() as f64;
    Ok(PencilDerivative {
        pencil_norm,
        typical_norm,
        ratio: pencil_norm / typical_norm,
    })
}

/// A random plane tangent to the quadric, avoiding the six lines and `s, t = 0, 1, ∞`.
pub fn random_tangent_plane(cfg: &RulingConfig, rng: &mut SeededRng) -> Vec<Rational> {
    loop {
        let s = [int(nonzero_int(rng, 30)), int(nonzero_int(rng, 30))];
        let t = [int(nonzero_int(rng, 30)), int(nonzero_int(rng, 30))];
        if s[0] == s[1] || t[0] == t[1] {
            continue;
        }
        let h = cfg.tangent_plane(&s, &t);
        if matches!(phi_prime(cfg, &h), Ok(PhiPrimeValue::Boundary(_))) {
            return h;
        }
    }
}

/// A random plane whose section is a smooth conic.
pub fn random_plane(cfg: &RulingConfig, rng: &mut SeededRng) -> Vec<Rational> {
    loop {
        let h: Vec<Rational> = (0..4).map(|_| int(small_int(rng, 20))).collect();
        if matches!(phi_prime(cfg, &h), Ok(PhiPrimeValue::Interior(_))) {
            return h;
        }
    }
}

/// Global count of preimages of a target by monodromy loops in the target
/// space, tracking every known preimage around each loop.
#[derive(Clone, Debug, Serialize)]
pub struct MonodromyCount {
    pub solutions: usize,
    pub loops: usize,
    pub failed_tracks: usize,
}

/// Stops after `stale_loops` consecutive loops without a new preimage.
pub fn monodromy_count(f: &Map3, start: &[CFloat], rng: &mut SeededRng, max_loops: usize, stale_loops: usize) -> Result<MonodromyCount> {
    let target = f(start).ok_or_else(|| Error::Degenerate("map undefined at the start point".into()))?;
    let mut known = vec![start.to_vec()];
    let mut failed_tracks = 0;
    let mut stale = 0;
    let mut loops = 0;
    while loops < max_loops && stale < stale_loops {
        loops += 1;
        // wide random quadrilaterals so the loops wind around the branch locus
        let reach = 3.0 * norm(&target).max(1.0);
        let mut path = vec![target];
        path.extend((0..3).map(|_| -> [CFloat; 3] { std::array::from_fn(|_| complex_unit(rng) * reach) }));
        path.push(target);
        let mut found_new = false;
        for z0 in known.clone() {
            match track(f, &z0, &path) {
                Some(z1) => {
                    let is_new = known.iter().all(|k| norm(&k.iter().zip(&z1).map(|(a, b)| a - b).collect::<Vec<_>>()) > CLUSTER_RADIUS);
                    if is_new {
                        known.push(z1);
                        found_new = true;
                    }
                }
                None => failed_tracks += 1,
            }
        }
        stale = if found_new { 0 } else { stale + 1 };
    }
    Ok(MonodromyCount {
        solutions: known.len(),
        loops,
        failed_tracks,
    })
}

/// Preimages of a random interior value of `phi_prime`, counted by monodromy.
pub fn phi_prime_monodromy(cfg: &RulingConfig, rng: &mut SeededRng, max_loops: usize, stale_loops: usize) -> Result<MonodromyCount> {
    let h: Vec<CFloat> = random_plane(cfg, rng).iter().map(Scalar::to_cfloat).collect();
    let chart = PlaneChart::around(&h);
    let map = |z: &[CFloat]| chart_value(cfg, &chart, z).ok();
    monodromy_count(&map, &chart.origin, rng, max_loops, stale_loops)
}

/// Follows a preimage along a piecewise-linear path of targets.
fn track(f: &Map3, z0: &[CFloat], path: &[[CFloat; 3]]) -> Option<Vec<CFloat>> {
    let mut z = z0.to_vec();
    for leg in path.windows(2) {
        let mut t: f64 = 0.0;
        let mut dt: f64 = 0.02;
        while t < 1.0 {
            let tn = (t + dt).min(1.0);
            let target: [CFloat; 3] = std::array::from_fn(|i| leg[0][i] * (1.0 - tn) + leg[1][i] * tn);
            match newton_solve(f, &z, &target) {
                Some(zn) if norm(&zn.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>()) < 0.1 * norm(&z).max(1.0) => {
                    z = zn;
                    t = tn;
                    dt = (dt * 1.5).min(0.1);
                }
                _ => {
                    dt *= 0.5;
                    if dt < 1e-6 {
                        return None;
                    }
                }
            }
        }
    }
    Some(z)
}

/// A hyperplane of P^4 not through `p`.
pub fn random_slice(rng: &mut SeededRng, p: &[CFloat]) -> Vec<CFloat> {
    loop {
        let h: Vec<CFloat> = (0..p.len()).map(|_| complex_unit(rng)).collect();
        let hp: CFloat = h.iter().zip(p).map(|(a, b)| a * b).sum();
        if hp.norm() > 1e-3 * norm(&h) * norm(p) {
            return h;
        }
    }
}

/// The marked conic cut on the tangent cone of the lines through `p` by a hyperplane.
pub fn slice_fan<S: Scalar>(f: &CubicThreefold<S>, p: &[S], slice: &[CFloat]) -> Result<MarkedConic<CFloat>> {
    let fan = match lines_through(f, p) {
        Err(Error::SingularPoint) => return Err(Error::Indeterminate("the point is a node".into())),
        other => other?,
    };
    if let FanKind::PencilPlusResidual { .. } = fan.kind {
        return Err(Error::Degenerate("the point lies on a plane: its image is on the boundary".into()));
    }
    if fan.lines.len() != 6 || !fan.all_simple() || fan.cone_rank.rank != 3 {
        return Err(Error::Degenerate(format!(
            "{} lines with cone rank {}",
            fan.lines.len(),
            fan.cone_rank.rank
        )));
    }
    let pf: Vec<CFloat> = p.iter().map(Scalar::to_cfloat).collect();
    let grad: Vec<CFloat> = f.to_cfloat().form().gradient_at(&pf)?;
    // the plane cut by the tangent hyperplane and the slice
    let basis = orthonormal_kernel(&Mat::from_rows(&[grad, slice.to_vec()])?);
    let points: Vec<Vec<CFloat>> = fan
        .lines
        .iter()
        .map(|l| {
            let (a, b) = l.line.points();
            let (ha, hb) = (dot(slice, a.coords()), dot(slice, b.coords()));
            let x: Vec<CFloat> = a.coords().iter().zip(b.coords()).map(|(u, v)| hb * u - ha * v).collect();
            let c = coords_in_basis(&basis, &x)?;
            let n = norm(&c);
            Ok(c.iter().map(|v| v / n).collect())
        })
        .collect::<Result<_>>()?;
    let conic = fit_conic(&points)?;
    MarkedConic::new(conic, points)
}

/// Orthonormal basis of the kernel of a full-rank wide matrix.
fn orthonormal_kernel(m: &Mat<CFloat>) -> Vec<Vec<CFloat>> {
    let mut out: Vec<Vec<CFloat>> = Vec::new();
    for v in m.kernel() {
        let mut w = v.clone();
        for u in &out {
            let c: CFloat = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= c * ui;
            }
        }
        let n = norm(&w);
        out.push(w.iter().map(|x| x / n).collect());
    }
    out
}

/// The conic through six points of P^2; rejects point sets on no conic.
pub fn fit_conic(points: &[Vec<CFloat>]) -> Result<QuadricForm<CFloat>> {
    let rows: Vec<Vec<CFloat>> = points
        .iter()
        .map(|x| vec![x[0] * x[0], x[1] * x[1], x[2] * x[2], x[0] * x[1], x[0] * x[2], x[1] * x[2]])
        .collect();
    let m = Mat::from_rows(&rows)?;
    let sv = crate::numkit::linalg::singular_values(&m);
    if sv[5] > 1e-8 * sv[0] || sv[4] <= RANK_GAP_THRESHOLD * sv[0] {
        return Err(Error::Degenerate("six points do not determine one conic".into()));
    }
    let c = null_vector(&m);
    let half = |x: CFloat| x * 0.5;
    let q = Mat::from_rows(&[
        vec![c[0], half(c[3]), half(c[4])],
        vec![half(c[3]), c[1], half(c[5])],
        vec![half(c[4]), half(c[5]), c[2]],
    ])?;
    Ok(QuadricForm::new(q)?)
}

/// Invariants of the six lines through a smooth point of a cubic threefold.
pub fn phi_general<S: Scalar>(f: &CubicThreefold<S>, p: &[S], slice: &[CFloat]) -> Result<IgusaInvariants<CFloat>> {
    let conic = slice_fan(f, p, slice)?;
    Ok(igusa_clebsch(&marked_conic_to_sextic(&conic)?))
}

/// `phi_general` on the Segre cubic, in the chart of the standard model.
pub fn phi0(view: &NodalCubic, p: &[Rational], slice: &[CFloat]) -> Result<IgusaInvariants<CFloat>> {
    phi_general(&view.cubic, p, slice)
}

/// Point of the Segre cubic in the standard model with distinct coordinates,
/// off the planes. Through a node: the line
/// `n + t v` meets the cubic doubly at `n`, so the third point is rational.
pub fn random_segre_point(model: &SegreModel, view: &NodalCubic, rng: &mut SeededRng, bound: i64) -> Vec<Rational> {
    let n = &model.nodes[0];
    loop {
        let mut v: Vec<i64> = (0..5).map(|_| small_int(rng, bound)).collect();
        v.push(-v.iter().sum::<i64>());
        let v: Vec<Rational> = v.into_iter().map(int).collect();
        if let Some(x) = third_point(n, &v) {
            let y = &x[..5];
            // equal coordinates give a transposition in the stabilizer
            let distinct = x.iter().tuple_combinations().all(|(a, b)| a != b);
            if distinct && model.node_index(&x).is_none() && view.planes.iter().all(|pl| !pl.space.contains(y, 0.0)) {
                return x;
            }
        }
    }
}

/// Third intersection of `n + t v` with `sum x_i^3 = 0` for a node `n`.
fn third_point(n: &[Rational], v: &[Rational]) -> Option<Vec<Rational>> {
    let cube: Rational = v.iter().map(|x| x.clone() * x.clone() * x.clone()).sum();
    let quad: Rational = n.iter().zip(v).map(|(a, b)| a.clone() * b.clone() * b.clone()).sum();
    if cube == int(0) || quad == int(0) {
        return None;
    }
    let t = -int(3) * quad / cube;
    let mut x: Vec<Rational> = n.iter().zip(v).map(|(a, b)| a.clone() + t.clone() * b.clone()).collect();
    Rational::normalize_projective(&mut x);
    Some(x)
}

/// Comparison of a point of the Segre cubic with its permutation orbit.
#[derive(Clone, Debug, Serialize)]
pub struct S6FiberReport {
    pub orbit_size: usize,
    pub evaluated: usize,
    pub all_equal: bool,
    /// Largest weight-0 ratio mismatch against the first point.
    pub margin: f64,
}

impl S6FiberReport {
    pub fn generic(&self) -> bool {
        self.orbit_size == S6_ORDER
    }
}

/// Invariants over the 720 coordinate permutations of a standard-model point.
pub fn s6_fiber_check(view: &NodalCubic, x: &[Rational], rng: &mut SeededRng, tol: f64) -> Result<S6FiberReport> {
    let mut orbit = Vec::new();
    let mut seen = BTreeSet::new();
    for perm in (0..6).permutations(6) {
        let mut y = crate::segre::permute_coords(&perm, x);
        Rational::normalize_projective(&mut y);
        if seen.insert(y.iter().map(|c| c.to_string()).join(",")) {
            orbit.push(y);
        }
    }
    let mut reference: Option<IgusaInvariants<CFloat>> = None;
    let mut margin: f64 = 0.0;
    for y in &orbit {
        let chart_point = &y[..5];
        let pf: Vec<CFloat> = chart_point.iter().map(Scalar::to_cfloat).collect();
        let inv = phi0(view, chart_point, &random_slice(rng, &pf))?;
        match &reference {
            None => reference = Some(inv),
            Some(r) => margin = margin.max(m2_margin(r, &inv, 1e-300)),
        }
    }
    Ok(S6FiberReport {
        orbit_size: orbit.len(),
        evaluated: orbit.len(),
        all_equal: margin <= tol,
        margin,
    })
}

/// Rank of the finite-difference Jacobian of the absolute invariants
/// `(I4/I2^2, I6/I2^3, I10/I2^5)` in three directions along the cubic.
pub fn dominance_rank(f: &CubicThreefold<CFloat>, p: &[CFloat], rng: &mut SeededRng, step: f64) -> Result<RankReport> {
    let slice = random_slice(rng, p);
    let absolute = |x: &[CFloat]| -> Result<[CFloat; 3]> {
        let i = phi_general(f, x, &slice)?;
        Ok([i.i4 / i.i2.powu(2), i.i6 / i.i2.powu(3), i.i10 / i.i2.powu(5)])
    };
    let grad = f.form().gradient_at(p)?;
    let tangent = orthonormal_kernel(&Mat::from_rows(&[grad, p.iter().map(|x| x.conj()).collect()])?);
    let mut jac = Mat::zeros(3, 3);
    for (j, d) in tangent.iter().take(3).enumerate() {
        let plus = project_to_cubic(f, &p.iter().zip(d).map(|(a, b)| a + b * step).collect::<Vec<_>>(), &tangent)?;
        let minus = project_to_cubic(f, &p.iter().zip(d).map(|(a, b)| a - b * step).collect::<Vec<_>>(), &tangent)?;
        let (fp, fm) = (absolute(&plus)?, absolute(&minus)?);
        for i in 0..3 {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    Ok(numerical_rank(&jac, 1e-6))
}

/// Newton along the normal `conj(grad)` back to the cubic.
fn project_to_cubic(f: &CubicThreefold<CFloat>, x: &[CFloat], _tangent: &[Vec<CFloat>]) -> Result<Vec<CFloat>> {
    let mut y = x.to_vec();
    for _ in 0..30 {
        let v = f.form().eval(&y)?;
        if v.norm() <= 1e-15 * norm(&y).powi(3) {
            return Ok(y);
        }
        let g = f.form().gradient_at(&y)?;
        let gg: f64 = g.iter().map(|c| c.norm_sqr()).sum();
        let t = v / gg;
        for (yi, gi) in y.iter_mut().zip(&g) {
            *yi -= t * gi.conj();
        }
    }
    Err(Error::NoCandidate("projection to the cubic did not converge".into()))
}

/// The 3-dimensional quadric `x0 x3 - x1 x2 + x4^2` meeting `x4 = 0` in the
/// quadric surface of the configuration.
#[derive(Clone, Debug)]
pub struct ExceptionalSetup {
    pub quadric: QuadricForm<Rational>,
    pub hyperplane: Vec<Rational>,
    pub config: RulingConfig,
}

/// Value of the exceptional map at a point.
#[derive(Clone, Debug)]
pub struct ExceptionalValue {
    /// Covector in `x4 = 0` of the plane cut by the tangent hyperplane.
    pub plane: Vec<Rational>,
    pub sextic: BinarySextic<Rational>,
    pub invariants: IgusaInvariants<Rational>,
    /// The other point of the quadric with the same plane.
    pub partner: Vec<Rational>,
}

impl ExceptionalSetup {
    pub fn standard(config: RulingConfig) -> Result<Self> {
        let mut m = Mat::zeros(5, 5);
        let q = config.quadric.matrix();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = q[(i, j)].clone();
            }
        }
        m[(4, 4)] = int(1);
        let quadric = QuadricForm::new(m)?;
        let mut hyperplane = vec![int(0); 5];
        hyperplane[4] = int(1);
        let setup = ExceptionalSetup {
            quadric,
            hyperplane,
            config,
        };
        let full = quadric_rank(&setup.quadric).rank;
        let section = quadric_rank(&setup.config.quadric).rank;
        if full != 5 || section != 4 {
            return Err(Error::Degenerate(format!("quadric ranks {full} and {section}, expected 5 and 4")));
        }
        Ok(setup)
    }

    /// Second intersection with the quadric of a random line through `(1:0:0:0:0)`.
    pub fn random_point(&self, rng: &mut SeededRng, bound: i64) -> Vec<Rational> {
        let mut base = vec![int(0); 5];
        base[0] = int(1);
        loop {
            let v: Vec<Rational> = (0..5).map(|_| int(small_int(rng, bound))).collect();
            let qv = self.quadric.eval(&v);
            let bv = self.quadric.bilinear(&base, &v);
            if qv == int(0) || bv == int(0) {
                continue;
            }
            let t = -int(2) * bv / qv;
            let mut x: Vec<Rational> = base.iter().zip(&v).map(|(a, b)| a.clone() + t.clone() * b.clone()).collect();
            Rational::normalize_projective(&mut x);
            if x[4] != int(0) && matches!(phi_prime(&self.config, &self.plane_of(&x)), Ok(PhiPrimeValue::Interior(_))) {
                return x;
            }
        }
    }

    /// The plane `T_x Q ∩ {x4 = 0}` as a covector of the hyperplane.
    pub fn plane_of(&self, x: &[Rational]) -> Vec<Rational> {
        let t = self.quadric.matrix().mul_vec(x).expect("length 5");
        let mut h = t[..4].to_vec();
        Rational::normalize_projective(&mut h);
        h
    }
}

pub fn exceptional_map(setup: &ExceptionalSetup, x: &[Rational]) -> Result<ExceptionalValue> {
    if !setup.quadric.eval(x).is_zero() {
        return Err(Error::NotOnHypersurface(setup.quadric.residual(x)));
    }
    let plane = setup.plane_of(x);
    if plane.iter().all(|x| x.is_zero()) {
        return Err(Error::Degenerate("tangent hyperplane is the hyperplane itself".into()));
    }
    let marks = plane_marks(&setup.config, &plane)?;
    let basis = Mat::from_rows(&[plane.clone()])?.kernel();
    let conic = setup.config.quadric.restrict(&basis)?;
    let coords: Vec<Vec<Rational>> = marks.iter().map(|m| coords_in_basis(&basis, m)).collect::<Result<_>>()?;
    let sextic = marked_conic_to_sextic(&MarkedConic::new(conic, coords)?)?;
    let invariants = igusa_clebsch(&sextic);
    let partner = partner_point(&setup.quadric, x, &setup.hyperplane)?;
    if setup.plane_of(&partner) != plane {
        return Err(Error::CheckFailed("partner point has a different plane".into()));
    }
    Ok(ExceptionalValue {
        plane,
        sextic,
        invariants,
        partner,
    })
}

/// The forgetful image in M_2 of a point of M_{0,6}.
pub fn forget_labels(m: &M06Point<Rational>) -> IgusaInvariants<Rational> {
    let values = [Some(int(0)), Some(int(1)), None, Some(m.lambda[0].clone()), Some(m.lambda[1].clone()), Some(m.lambda[2].clone())];
    igusa_clebsch(&BinarySextic::from_values(&values).expect("six values"))
}

/// True when the exceptional value agrees with the forgetful image of `phi_prime`.
pub fn factors_through_phi_prime(setup: &ExceptionalSetup, v: &ExceptionalValue) -> Result<bool> {
    match phi_prime(&setup.config, &v.plane)? {
        PhiPrimeValue::Interior(m) => Ok(m2_equal(&forget_labels(&m), &v.invariants, 0.0)),
        PhiPrimeValue::Boundary(_) => Ok(false),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    VerifiedExact,
    VerifiedNumeric,
    PaperAccepted,
}

#[derive(Clone, Debug, Serialize)]
pub struct Ingredient {
    pub name: String,
    pub value: u64,
    pub status: Status,
    pub anchor: String,
    /// Value the degree count needs; `None` for derived rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required: Option<u64>,
}

impl Ingredient {
    pub fn holds(&self) -> bool {
        self.required.is_none_or(|r| r == self.value)
    }
}

/// Measured inputs of the degree count.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DegreeInputs {
    pub node_count: usize,
    pub incidence_6_4: bool,
    pub s6_orbit_size: usize,
    pub group_order: usize,
    pub tangent_orbit_size: usize,
    /// Cluster counts at tangent planes, one per perturbation size.
    pub local_degrees: Vec<usize>,
    pub generic_diff_rank: usize,
    pub relabel_orbit_size: usize,
    /// Points of the exceptional quadric over a plane.
    pub plane_fiber: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub ingredients: Vec<Ingredient>,
    pub delta: u64,
    pub total: u64,
    pub failures: Vec<String>,
}

impl DegreeReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self, seed: u64, tolerances: &serde_json::Value) -> serde_json::Value {
        serde_json::json!({
            "ingredients": self.ingredients,
            "delta": self.delta,
            "total": self.total,
            "failures": self.failures,
            "seed": seed,
            "tolerances": tolerances,
        })
    }
}

/// Assembles `deg = 6! + nodes * delta` with `delta = fiber * deg(phi') * 6!`
/// and `deg(phi') = |orbit| * local degree`, from the measured inputs.
pub fn assemble_degree(m: &DegreeInputs) -> DegreeReport {
    let row = |name: &str, value: u64, status: Status, anchor: &str, required: Option<u64>| Ingredient {
        name: name.into(),
        value,
        status,
        anchor: anchor.into(),
        required,
    };
    let local = match m.local_degrees.iter().all_equal_value() {
        Ok(&d) => d as u64,
        Err(_) => 0,
    };
    let phi_prime_degree = m.tangent_orbit_size as u64 * local;
    let delta = m.plane_fiber as u64 * phi_prime_degree * S6_ORDER as u64;
    let total = S6_ORDER as u64 + m.node_count as u64 * delta;
    let ingredients = vec![
        row("node count", m.node_count as u64, Status::VerifiedExact, "nodes of the Segre cubic", Some(10)),
        row("plane-node incidence (6,4)", m.incidence_6_4 as u64, Status::VerifiedExact, "15 planes, 4 nodes each, 6 planes per node", Some(1)),
        row("permutation orbit size", m.s6_orbit_size as u64, Status::VerifiedExact, "generic orbit of the symmetric group on the cubic", Some(720)),
        row("degree of phi0", S6_ORDER as u64, Status::PaperAccepted, "birationality of the level-2 moduli map (not recomputed)", None),
        row("|G|", m.group_order as u64, Status::VerifiedExact, "projectivities preserving the six lines", Some(72)),
        row("tangent-plane orbit size", m.tangent_orbit_size as u64, Status::VerifiedExact, "G-orbit of a generic tangent plane, trivial stabilizer", Some(72)),
        row("ramification multiplicity", local, Status::VerifiedNumeric, "Newton clusters near a tangent plane", Some(2)),
        row("generic differential rank", m.generic_diff_rank as u64, Status::VerifiedNumeric, "finite differences at a generic plane", Some(3)),
        row("deg(phi')", phi_prime_degree, Status::VerifiedNumeric, "orbit size times ramification multiplicity", Some(144)),
        row("forgetful factor", m.relabel_orbit_size as u64, Status::VerifiedExact, "relabelings of six points", Some(720)),
        row("plane-fiber factor", m.plane_fiber as u64, Status::VerifiedExact, "points of the quadric over one plane", Some(2)),
        row("delta", delta, Status::VerifiedNumeric, "fiber factor * deg(phi') * 6!", Some(207_360)),
        row("deg(phi)", total, Status::VerifiedNumeric, "6! + nodes * delta", Some(2_074_320)),
    ];
    let failures = ingredients
        .iter()
        .filter(|i| !i.holds())
        .map(|i| format!("{}: measured {}, required {}", i.name, i.value, i.required.expect("failing rows have a requirement")))
        .collect();
    DegreeReport {
        ingredients,
        delta,
        total,
        failures,
    }
}

/// `assemble_degree`, failing when a measured ingredient is off.
pub fn degree_report(m: &DegreeInputs) -> Result<DegreeReport> {
    let r = assemble_degree(m);
    if r.ok() {
        Ok(r)
    } else {
        Err(Error::CheckFailed(r.failures.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::scalar::rat;
    use crate::sample::{rng, substream};
    use proptest::prelude::*;

    fn cfg() -> RulingConfig {
        RulingConfig::standard().unwrap()
    }

    #[test]
    fn group_has_order_72_with_index_two_ruling_subgroup() {
        let c = cfg();
        assert_eq!(c.group.len(), 72);
        assert_eq!(c.ruling_subgroup().len(), 36);
        let keys: BTreeSet<Vec<String>> = c.group.iter().map(|g| key(&g.map)).collect();
        for g in &c.group {
            assert!(keys.contains(&key(&g.map.inverse())));
            let mut p = g.perm.to_vec();
            p.sort();
            assert_eq!(p, (0..6).collect::<Vec<_>>());
        }
        assert!(c.group.iter().any(|g| g.perm == [0, 1, 2, 3, 4, 5]));
    }

    #[test]
    fn lines_lie_on_the_quadric() {
        let c = cfg();
        for l in &c.lines {
            let (a, b) = l.points();
            assert!(c.quadric.eval(a.coords()).is_zero());
            assert!(c.quadric.eval(b.coords()).is_zero());
            assert!(c.quadric.bilinear(a.coords(), b.coords()).is_zero());
        }
    }

    /// The section is the graph of a Moebius map in the first factor's
    /// coordinate; lines 0-2 sit at 0, 1, ∞ and line 3+j at the root of
    /// `h(s, t_j) = 0`.
    fn projection_oracle(h: &[Rational]) -> [Rational; 3] {
        let (a, b, c, d) = (&h[0], &h[1], &h[2], &h[3]);
        [
            -d.clone() / b.clone(),
            -(c.clone() + d.clone()) / (a.clone() + b.clone()),
            -c.clone() / a.clone(),
        ]
    }

    #[test]
    fn interior_value_matches_the_projection_oracle() {
        let c = cfg();
        let mut r = rng(7);
        for _ in 0..20 {
            let h = random_plane(&c, &mut r);
            let PhiPrimeValue::Interior(m) = phi_prime(&c, &h).unwrap() else { panic!("interior expected") };
            assert_eq!(m.lambda.to_vec(), projection_oracle(&h).to_vec());
        }
    }

    #[test]
    fn tangent_plane_is_a_three_plus_three_boundary_point() {
        let c = cfg();
        let h = c.tangent_plane(&[int(2), int(3)], &[int(-5), int(7)]);
        let PhiPrimeValue::Boundary(b) = phi_prime(&c, &h).unwrap() else { panic!("boundary expected") };
        assert_eq!(b.partition(), [[0, 1, 2], [3, 4, 5]]);
        // the node of the first component sits at s = 2/3
        assert_eq!(b.components[0].node, rat(2, 3));
        assert_eq!(b.components[1].node, rat(-5, 7));
        assert_eq!(PhiPrimeValue::Boundary(b).lambda_chart().unwrap()[0].re, 2.0 / 3.0);
    }

    #[test]
    fn plane_through_a_line_is_rejected() {
        let c = cfg();
        // x0 = 0 contains s = 0
        assert!(phi_prime(&c, &[int(1), int(0), int(0), int(0)]).is_err());
    }

    #[test]
    fn float_and_exact_agree() {
        let c = cfg();
        let h = [int(3), int(-2), int(5), int(7)];
        let exact = phi_prime(&c, &h).unwrap();
        let hf: Vec<CFloat> = h.iter().map(Scalar::to_cfloat).collect();
        let float = phi_prime(&c, &hf).unwrap();
        let (a, b) = (exact.lambda_chart().unwrap(), float.lambda_chart().unwrap());
        for k in 0..3 {
            assert!((a[k] - b[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn tangent_orbit_fiber() {
        let c = cfg();
        let h = random_tangent_plane(&c, &mut rng(3));
        let rep = g_orbit_fiber_check(&c, &h).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        assert!(rep.unmatched_distinct > 1);
    }

    #[test]
    fn general_plane_orbit_images_differ_without_matching() {
        let c = cfg();
        let h = random_plane(&c, &mut rng(4));
        let rep = g_orbit_fiber_check(&c, &h).unwrap();
        assert_eq!(rep.orbit_size, 72);
        assert!(rep.unmatched_distinct > 1);
        assert_eq!(rep.boundary_images, 0);
    }

    #[test]
    fn pencil_through_the_second_line_is_flat() {
        let c = cfg();
        let h = random_tangent_plane(&c, &mut rng(5));
        let d = pencil_derivative(&c, &h, &mut rng(6)).unwrap();
        assert!(d.ratio <= PENCIL_RATIO_TOL, "{d:?}");
        assert!(d.typical_norm > 0.0);
    }

    #[test]
    fn generic_plane_has_full_differential_rank() {
        let c = cfg();
        let h: Vec<CFloat> = random_plane(&c, &mut rng(8)).iter().map(Scalar::to_cfloat).collect();
        let d = diff_rank(&c, &h, 1e-5).unwrap();
        assert_eq!((d.rank, d.half_step_rank), (3, 3));
    }

    #[test]
    fn generic_plane_is_a_simple_preimage() {
        let c = cfg();
        let h: Vec<CFloat> = random_plane(&c, &mut rng(9)).iter().map(Scalar::to_cfloat).collect();
        let d = local_degree(&c, &h, 1e-4, &mut rng(10)).unwrap();
        assert_eq!(d.clusters, 1);
        assert!(d.contains_source);
    }

    #[test]
    fn monodromy_counts_a_map_of_degree_six() {
        // (z0^2, z1^3, z2) has six preimages over a generic value
        let f = |z: &[CFloat]| Some([z[0] * z[0], z[1] * z[1] * z[1], z[2]]);
        let start = [CFloat::new(0.7, 0.2), CFloat::new(-0.4, 0.9), CFloat::new(0.3, 0.0)];
        let c = monodromy_count(&f, &start, &mut rng(15), 200, 30).unwrap();
        assert_eq!(c.solutions, 6, "{c:?}");
    }

    #[test]
    fn epsilon_outside_range_is_rejected() {
        let c = cfg();
        let h: Vec<CFloat> = random_plane(&c, &mut rng(9)).iter().map(Scalar::to_cfloat).collect();
        assert!(local_degree(&c, &h, 1e-1, &mut rng(10)).is_err());
    }

    #[test]
    fn partner_is_an_involution_with_equal_invariants() {
        let setup = ExceptionalSetup::standard(cfg()).unwrap();
        let mut r = substream(11, 1);
        for _ in 0..10 {
            let x = setup.random_point(&mut r, 9);
            let v = exceptional_map(&setup, &x).unwrap();
            assert_ne!(v.partner, x);
            let w = exceptional_map(&setup, &v.partner).unwrap();
            assert_eq!(w.partner, x);
            assert!(m2_equal(&v.invariants, &w.invariants, 0.0));
            assert!(factors_through_phi_prime(&setup, &v).unwrap());
            // the partner reflects the last coordinate
            let mut refl = x.clone();
            refl[4] = -refl[4].clone();
            Rational::normalize_projective(&mut refl);
            assert_eq!(v.partner, refl);
        }
    }

    #[test]
    fn segre_points_are_on_the_cubic_off_the_planes() {
        let (model, _) = SegreModel::standard().unwrap();
        let view = model.chart().unwrap();
        let mut r = rng(12);
        for _ in 0..5 {
            let x = random_segre_point(&model, &view, &mut r, 6);
            assert!(view.cubic.contains(&x[..5]));
            assert_eq!(x.iter().cloned().sum::<Rational>(), int(0));
        }
    }

    #[test]
    fn phi0_is_independent_of_the_slice() {
        let (model, _) = SegreModel::standard().unwrap();
        let view = model.chart().unwrap();
        let mut r = rng(13);
        let x = random_segre_point(&model, &view, &mut r, 6);
        let pf: Vec<CFloat> = x[..5].iter().map(Scalar::to_cfloat).collect();
        let values: Vec<_> = (0..3).map(|_| phi0(&view, &x[..5], &random_slice(&mut r, &pf)).unwrap()).collect();
        assert!(m2_equal(&values[0], &values[1], INVARIANT_TOL));
        assert!(m2_equal(&values[0], &values[2], INVARIANT_TOL));
    }

    #[test]
    fn node_is_indeterminate_and_plane_point_is_boundary() {
        let (model, _) = SegreModel::standard().unwrap();
        let view = model.chart().unwrap();
        let slice: Vec<CFloat> = [1.0, 2.0, -3.0, 0.5, 0.25].iter().map(|&x| CFloat::new(x, 0.3)).collect();
        assert!(matches!(phi0(&view, &view.nodes[0], &slice), Err(Error::Indeterminate(_))));
        let b = &view.planes[0].basis;
        let p: Vec<Rational> = (0..5).map(|i| int(2) * b[0][i].clone() + int(3) * b[1][i].clone() - b[2][i].clone()).collect();
        assert!(matches!(phi0(&view, &p, &slice), Err(Error::Degenerate(_))));
    }

    #[test]
    fn transposition_fixed_point_has_a_short_orbit() {
        let (model, _) = SegreModel::standard().unwrap();
        let view = model.chart().unwrap();
        // the node (1,1,1,-1,-1,-1) and v0 = v1 keep x0 = x1
        let n = &model.nodes[0];
        assert_eq!(n[0], n[1]);
        let v: Vec<Rational> = [2, 2, -3, 1, 5, -7].iter().map(|&k| int(k)).collect();
        let x = third_point(n, &v).unwrap();
        let rep = s6_fiber_check(&view, &x, &mut rng(14), ORBIT_MARGIN);
        let rep = rep.unwrap();
        assert!(rep.orbit_size < 720 && !rep.generic());
    }

    #[test]
    fn assembled_degree_from_required_inputs() {
        let inputs = DegreeInputs {
            node_count: 10,
            incidence_6_4: true,
            s6_orbit_size: 720,
            group_order: 72,
            tangent_orbit_size: 72,
            local_degrees: vec![2, 2, 2],
            generic_diff_rank: 3,
            relabel_orbit_size: 720,
            plane_fiber: 2,
        };
        let r = degree_report(&inputs).unwrap();
        assert_eq!((r.delta, r.total), (207_360, 2_074_320));
        assert_eq!(720 * 2881, 2_074_320);
        let mut off = inputs.clone();
        off.local_degrees = vec![1, 1, 1];
        let r = assemble_degree(&off);
        assert_eq!(r.total, 720 + 10 * 2 * 72 * 720);
        assert!(degree_report(&off).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn group_acts_on_images_by_relabeling(h in proptest::array::uniform4(-12i64..13), gi in 0usize..72) {
            let c = cfg();
            let h: Vec<Rational> = h.iter().map(|&k| int(k)).collect();
            let base = phi_prime(&c, &h);
            prop_assume!(base.is_ok());
            let g = &c.group[gi];
            let gh = g.map.apply_covector(&h);
            let mut labels = [0; 6];
            for i in 0..6 {
                labels[g.perm[i]] = i;
            }
            prop_assert_eq!(phi_prime_labeled(&c, &gh, &labels).unwrap(), base.unwrap());
        }

        #[test]
        fn tangent_planes_map_to_the_boundary(s in (1i64..40, 1i64..40), t in (1i64..40, 1i64..40)) {
            prop_assume!(s.0 != s.1 && t.0 != t.1);
            let c = cfg();
            let h = c.tangent_plane(&[int(s.0), int(s.1)], &[int(t.0), int(t.1)]);
            let v = phi_prime(&c, &h).unwrap();
            prop_assert!(matches!(v, PhiPrimeValue::Boundary(_)));
        }
    }
}
