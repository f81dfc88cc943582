//! The Segre primal: the cubic `sum x_i^3 = 0` on the hyperplane `sum x_i = 0`
//! of P^5, its 10 nodes and 15 planes, and its realization as the image of P^3
//! under the quadrics through five general points.

use itertools::Itertools;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lines3fold::{local_expand, CubicThreefold};
use crate::numkit::elim::form_residual;
use crate::numkit::linalg::Mat;
use crate::numkit::poly::{eval_monomial, monomials, MultiPoly};
use crate::numkit::roots::{binary_roots, RootOptions};
use crate::numkit::scalar::{int, parse_rational, CFloat, Rational, Scalar};
use crate::projgeom::{quadric_rank, ProjLine, ProjPoint, QuadricForm, Subspace};
use crate::sample::{small_int, SeededRng};

/// A cubic threefold in P^4 with a list of nodes and of planes it contains.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalCubic {
    pub cubic: CubicThreefold<Rational>,
    pub nodes: Vec<Vec<Rational>>,
    pub planes: Vec<PlaneInfo>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneInfo {
    pub label: String,
    pub space: Subspace<Rational>,
    /// Three spanning vectors.
    pub basis: Vec<Vec<Rational>>,
    /// Indices of the nodes on the plane.
    pub nodes: Vec<usize>,
}

impl NodalCubic {
    /// Indices of the planes through a node.
    pub fn planes_at(&self, node: usize) -> Vec<usize> {
        (0..self.planes.len()).filter(|&k| self.planes[k].nodes.contains(&node)).collect()
    }

    fn attach_incidence(cubic: CubicThreefold<Rational>, nodes: Vec<Vec<Rational>>, planes: Vec<(String, Vec<Vec<Rational>>)>) -> Result<Self> {
        let mut infos = Vec::new();
        for (label, basis) in planes {
            let space = Subspace::span(&basis)?;
            if space.dim() != 2 {
                return Err(Error::Degenerate(format!("plane {label} is not a plane")));
            }
            let on: Vec<usize> = (0..nodes.len()).filter(|&n| space.contains(&nodes[n], 0.0)).collect();
            infos.push(PlaneInfo {
                label,
                space,
                basis,
                nodes: on,
            });
        }
        Ok(NodalCubic {
            cubic,
            nodes,
            planes: infos,
        })
    }
}

/// A pairing of `{0..5}` into three pairs, each pair sorted, pairs sorted.
pub type Matching = [(usize, usize); 3];

/// The standard model in P^5.
#[derive(Clone, Debug, PartialEq)]
pub struct SegreModel {
    pub cubic: MultiPoly<Rational>,
    /// Covector of the hyperplane `sum x_i = 0`.
    pub hyperplane: Vec<Rational>,
    pub nodes: Vec<Vec<Rational>>,
    pub planes: Vec<Matching>,
    /// `incidence[plane][node]`.
    pub incidence: Vec<Vec<bool>>,
}

/// Structural facts checked at construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegreChecks {
    pub nodes: usize,
    pub planes: usize,
    pub nodes_on_cubic: bool,
    pub nodes_singular: bool,
    pub planes_on_cubic: bool,
    pub nodes_per_plane: Vec<usize>,
    pub planes_per_node: Vec<usize>,
}

impl SegreChecks {
    pub fn configuration_is_6_4(&self) -> bool {
        self.nodes_per_plane.iter().all(|&k| k == 4) && self.planes_per_node.iter().all(|&k| k == 6)
    }

    pub fn all_pass(&self) -> bool {
        self.nodes == 10
            && self.planes == 15
            && self.nodes_on_cubic
            && self.nodes_singular
            && self.planes_on_cubic
            && self.configuration_is_6_4()
    }
}

fn matchings() -> Vec<Matching> {
    let mut out = Vec::new();
    for a in 1..6 {
        let rest: Vec<usize> = (1..6).filter(|&x| x != a).collect();
        let b = rest[0];
        for &c in &rest[1..] {
            let last: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != c).collect();
            let mut m = [(0, a), (b.min(c), b.max(c)), (last[0].min(last[1]), last[0].max(last[1]))];
            m.sort();
            out.push(m);
        }
    }
    out.sort();
    out
}

fn node_vectors() -> Vec<Vec<Rational>> {
    // three +1 and three -1, first coordinate +1
    (1..6)
        .combinations(2)
        .map(|plus| {
            (0..6)
                .map(|i| if i == 0 || plus.contains(&i) { int(1) } else { int(-1) })
                .collect()
        })
        .collect()
}

fn matching_basis(m: &Matching) -> Vec<Vec<Rational>> {
    m.iter()
        .map(|&(i, j)| {
            let mut v = vec![int(0); 6];
            v[i] = int(1);
            v[j] = int(-1);
            v
        })
        .collect()
}

fn matching_equations(m: &Matching) -> Vec<Vec<Rational>> {
    m.iter()
        .map(|&(i, j)| {
            let mut v = vec![int(0); 6];
            v[i] = int(1);
            v[j] = int(1);
            v
        })
        .collect()
}

/// Applies a permutation of coordinates: `y[perm[i]] = x[i]`.
pub fn permute_coords<T: Clone>(perm: &[usize], x: &[T]) -> Vec<T> {
    let mut y = x.to_vec();
    for (i, &pi) in perm.iter().enumerate() {
        y[pi] = x[i].clone();
    }
    y
}

impl SegreModel {
    /// Builds the standard model and checks its structure exactly.
    pub fn standard() -> Result<(Self, SegreChecks)> {
        let cubic_terms: Vec<(Vec<u32>, i64)> = (0..6)
            .map(|i| {
                let mut e = vec![0u32; 6];
                e[i] = 3;
                (e, 1)
            })
            .collect();
        let refs: Vec<(&[u32], i64)> = cubic_terms.iter().map(|(e, c)| (e.as_slice(), *c)).collect();
        let cubic = MultiPoly::from_int_terms(6, 3, &refs)?;
        let hyperplane = vec![int(1); 6];
        let nodes = node_vectors();
        let planes = matchings();
        let incidence: Vec<Vec<bool>> = planes
            .iter()
            .map(|m| nodes.iter().map(|n| m.iter().all(|&(i, j)| (n[i].clone() + n[j].clone()).is_zero())).collect())
            .collect();
        let model = SegreModel {
            cubic,
            hyperplane,
            nodes,
            planes,
            incidence,
        };
        let checks = model.checks()?;
        Ok((model, checks))
    }

    pub fn checks(&self) -> Result<SegreChecks> {
        let grad = self.cubic.gradient();
        let mut nodes_on_cubic = true;
        let mut nodes_singular = true;
        for n in &self.nodes {
            let on_h = crate::numkit::linalg::dot(&self.hyperplane, n).is_zero();
            nodes_on_cubic &= on_h && self.cubic.eval(n)?.is_zero();
            // gradient restricted to the hyperplane vanishes iff it is a multiple of (1, ..., 1)
            let g: Vec<Rational> = grad.iter().map(|d| d.eval(n)).collect::<std::result::Result<_, _>>()?;
            nodes_singular &= g.iter().all(|x| x == &g[0]);
        }
        let mut planes_on_cubic = true;
        for m in &self.planes {
            let basis = matching_basis(m);
            planes_on_cubic &= basis.iter().all(|b| crate::numkit::linalg::dot(&self.hyperplane, b).is_zero());
            planes_on_cubic &= self.cubic.restrict_to_span(&basis)?.is_zero();
            // the equations cut exactly this plane inside the hyperplane
            let mut eqs = matching_equations(m);
            eqs.push(self.hyperplane.clone());
            planes_on_cubic &= Subspace::from_equations(5, &eqs)?.dim() == 2;
        }
        Ok(SegreChecks {
            nodes: self.nodes.len(),
            planes: self.planes.len(),
            nodes_on_cubic,
            nodes_singular,
            planes_on_cubic,
            nodes_per_plane: self.incidence.iter().map(|row| row.iter().filter(|&&b| b).count()).collect(),
            planes_per_node: (0..self.nodes.len())
                .map(|n| self.incidence.iter().filter(|row| row[n]).count())
                .collect(),
        })
    }

    pub fn node_index(&self, x: &[Rational]) -> Option<usize> {
        let p = ProjPoint::new(x.to_vec()).ok()?;
        self.nodes.iter().position(|n| ProjPoint::new(n.clone()).map(|q| q == p).unwrap_or(false))
    }

    pub fn plane_index(&self, m: &Matching) -> Option<usize> {
        self.planes.iter().position(|x| x == m)
    }

    /// Image of a point under a coordinate permutation.
    pub fn s6_apply_point(&self, perm: &[usize], x: &[Rational]) -> Vec<Rational> {
        permute_coords(perm, x)
    }

    pub fn s6_apply_node(&self, perm: &[usize], node: usize) -> Option<usize> {
        self.node_index(&permute_coords(perm, &self.nodes[node]))
    }

    pub fn s6_apply_plane(&self, perm: &[usize], plane: usize) -> Option<usize> {
        let mut m = self.planes[plane].map(|(i, j)| {
            let (a, b) = (perm[i], perm[j]);
            (a.min(b), a.max(b))
        });
        m.sort();
        // the image of the plane as a subspace must be the plane of the permuted matching
        let image: Vec<Vec<Rational>> = matching_basis(&self.planes[plane]).iter().map(|b| permute_coords(perm, b)).collect();
        let target = Subspace::span(&matching_basis(&m)).ok()?;
        if image.iter().all(|v| target.contains(v, 0.0)) {
            self.plane_index(&m)
        } else {
            None
        }
    }

    /// Chart `x_5 = -(x_0 + ... + x_4)`: the cubic `sum y_i^3 - (sum y_i)^3` in P^4.
    pub fn chart(&self) -> Result<NodalCubic> {
        let embed: Vec<Vec<Rational>> = (0..5)
            .map(|j| {
                let mut v = vec![int(0); 6];
                v[j] = int(1);
                v[5] = int(-1);
                v
            })
            .collect();
        let cubic = CubicThreefold::new(self.cubic.restrict_to_span(&embed)?)?;
        let nodes: Vec<Vec<Rational>> = self.nodes.iter().map(|n| n[..5].to_vec()).collect();
        let planes = self
            .planes
            .iter()
            .map(|m| {
                let label = format!("x{}+x{}=x{}+x{}=x{}+x{}=0", m[0].0, m[0].1, m[1].0, m[1].1, m[2].0, m[2].1);
                (label, matching_basis(m).into_iter().map(|b| b[..5].to_vec()).collect())
            })
            .collect();
        let view = NodalCubic::attach_incidence(cubic, nodes, planes)?;
        for (k, row) in self.incidence.iter().enumerate() {
            let want: Vec<usize> = (0..row.len()).filter(|&n| row[n]).collect();
            if view.planes[k].nodes != want {
                return Err(Error::CheckFailed("chart incidence differs from the model".into()));
            }
        }
        Ok(view)
    }
}

/// Sizes of the orbits of the symmetric group on nodes and planes.
pub fn s6_orbit_sizes(model: &SegreModel) -> (usize, usize) {
    let mut nodes = std::collections::BTreeSet::new();
    let mut planes = std::collections::BTreeSet::new();
    for perm in (0..6).permutations(6) {
        if let Some(n) = model.s6_apply_node(&perm, 0) {
            nodes.insert(n);
        }
        if let Some(p) = model.s6_apply_plane(&perm, 0) {
            planes.insert(p);
        }
    }
    (nodes.len(), planes.len())
}

/// Tangent cone data at a node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeConeReport {
    pub node: usize,
    /// `F1` vanishes identically.
    pub singular: bool,
    pub cone_rank: usize,
    pub planes: Vec<usize>,
    /// Every incident plane satisfies `F2 = F3 = 0`.
    pub planes_on_cone: bool,
    /// The incident planes split by ruling of the cone.
    pub rulings: [Vec<usize>; 2],
}

impl NodeConeReport {
    pub fn is_expected(&self) -> bool {
        self.singular
            && self.cone_rank == 4
            && self.planes.len() == 6
            && self.planes_on_cone
            && self.rulings[0].len() == 3
            && self.rulings[1].len() == 3
    }
}

/// Tangent cone at a node and the split of its six planes into the two rulings.
///
/// Planes through the node are lines on the quadric surface `F2 = 0` in the
/// P^3 of directions; two such lines are in the same ruling iff they are disjoint.
pub fn node_cone_analysis(view: &NodalCubic, node: usize) -> Result<NodeConeReport> {
    let p = view.nodes.get(node).ok_or(Error::Degenerate("no such node".into()))?;
    let exp = local_expand(&view.cubic, p)?;
    let singular = exp.f1.is_zero();
    let cone_rank = quadric_rank(&QuadricForm::from_poly(&exp.f2)?).rank;
    let planes = view.planes_at(node);
    let mut planes_on_cone = true;
    let mut dirs = Vec::new();
    for &k in &planes {
        let d: Vec<Vec<Rational>> = view.planes[k].basis.iter().map(|b| exp.direction(b)).collect::<Result<_>>()?;
        let m = Mat::from_rows(&d)?;
        let (r, piv) = m.rref();
        let span: Vec<Vec<Rational>> = (0..piv.len()).map(|i| r.row(i)).collect();
        if span.len() != 2 {
            return Err(Error::Degenerate("plane does not pass through the node".into()));
        }
        planes_on_cone &= exp.f2.restrict_to_span(&span)?.is_zero() && exp.f3.restrict_to_span(&span)?.is_zero();
        dirs.push(span);
    }
    let meet = |a: &Vec<Vec<Rational>>, b: &Vec<Vec<Rational>>| -> Result<bool> {
        let rows: Vec<Vec<Rational>> = a.iter().chain(b.iter()).cloned().collect();
        Ok(Mat::from_rows(&rows)?.rank() <= 3)
    };
    let mut first = vec![0usize];
    let mut second = Vec::new();
    for i in 1..dirs.len() {
        if meet(&dirs[0], &dirs[i])? {
            second.push(i);
        } else {
            first.push(i);
        }
    }
    // consistency: disjoint within a class, meeting across classes
    for class in [&first, &second] {
        for (a, b) in class.iter().tuple_combinations() {
            if meet(&dirs[*a], &dirs[*b])? {
                return Err(Error::CheckFailed("lines of one ruling meet".into()));
            }
        }
    }
    for a in &first {
        for b in &second {
            if !meet(&dirs[*a], &dirs[*b])? {
                return Err(Error::CheckFailed("lines of opposite rulings are disjoint".into()));
            }
        }
    }
    Ok(NodeConeReport {
        node,
        singular,
        cone_rank,
        rulings: [first.iter().map(|&i| planes[i]).collect(), second.iter().map(|&i| planes[i]).collect()],
        planes,
        planes_on_cone,
    })
}

/// The map P^3 -> P^4 given by the quadrics through five points in general position.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiL {
    pub base: Vec<Vec<Rational>>,
    pub quadrics: Vec<MultiPoly<Rational>>,
    pub cubic: CubicThreefold<Rational>,
    /// Dimension of the space of cubics through the sampled images.
    pub fit_kernel_dim: usize,
    pub fit_samples: usize,
}

/// Default base points: the coordinate simplex and `(1, 1, 1, 1)`.
pub fn default_base_points() -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = (0..4)
        .map(|i| {
            let mut v = vec![int(0); 4];
            v[i] = int(1);
            v
        })
        .collect();
    out.push(vec![int(1); 4]);
    out
}

/// Parses points given one per line as fractions, ignoring `#` comments.
pub fn parse_points(text: &str, len: usize) -> Result<Vec<Vec<Rational>>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let coords: Vec<Rational> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                parse_rational(s).ok_or_else(|| Error::Fixture {
                    line: no + 1,
                    message: format!("not a fraction: {s}"),
                })
            })
            .collect::<Result<_>>()?;
        if coords.len() != len {
            return Err(Error::Fixture {
                line: no + 1,
                message: format!("expected {len} coordinates, found {}", coords.len()),
            });
        }
        if coords.iter().all(|c| c.is_zero()) {
            return Err(Error::Fixture {
                line: no + 1,
                message: "zero vector".into(),
            });
        }
        out.push(coords);
    }
    Ok(out)
}

fn in_general_position(points: &[Vec<Rational>]) -> Result<bool> {
    for quad in points.iter().combinations(4) {
        let m = Mat::from_rows(&quad.into_iter().cloned().collect::<Vec<_>>())?;
        if m.det()?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Integer-scaled kernel vectors of the monomial evaluation matrix.
fn forms_through(points: &[Vec<Rational>], nvars: usize, degree: u32) -> Result<Vec<MultiPoly<Rational>>> {
    let monos = monomials(nvars, degree);
    let rows: Vec<Vec<Rational>> = points.iter().map(|p| monos.iter().map(|e| eval_monomial(e, p)).collect()).collect();
    let kernel = Mat::from_rows(&rows)?.kernel();
    kernel
        .into_iter()
        .map(|mut v| {
            Rational::normalize_projective(&mut v);
            let terms: Vec<_> = monos.iter().cloned().zip(v).filter(|(_, c)| !c.is_zero()).collect();
            Ok(MultiPoly::from_terms(nvars, degree, terms)?)
        })
        .collect()
}

impl PhiL {
    /// Builds the map and fits its image cubic on at least 40 sample images.
    pub fn build(base: &[Vec<Rational>], rng: &mut SeededRng) -> Result<Self> {
        if base.len() != 5 || base.iter().any(|p| p.len() != 4) {
            return Err(Error::Degenerate("expected five points of P^3".into()));
        }
        if !in_general_position(base)? {
            return Err(Error::Degenerate("four base points are coplanar".into()));
        }
        let quadrics = forms_through(base, 4, 2)?;
        if quadrics.len() != 5 {
            return Err(Error::Degenerate(format!("{} quadrics through the base points", quadrics.len())));
        }
        let mut map = PhiL {
            base: base.to_vec(),
            quadrics,
            cubic: CubicThreefold::new(MultiPoly::var(5, 0).pow(3)?)?,
            fit_kernel_dim: 0,
            fit_samples: 0,
        };
        let mut images = Vec::new();
        while images.len() < 40 {
            let x: Vec<Rational> = (0..4).map(|_| int(small_int(rng, 7))).collect();
            if let Ok(y) = map.eval(&x) {
                images.push(y);
            }
        }
        let cubics = forms_through(&images, 5, 3)?;
        map.fit_kernel_dim = cubics.len();
        map.fit_samples = images.len();
        if cubics.len() != 1 {
            return Err(Error::CheckFailed(format!("image cubic not unique: kernel dimension {}", cubics.len())));
        }
        map.cubic = CubicThreefold::new(cubics.into_iter().next().expect("one cubic"))?;
        Ok(map)
    }

    /// Values of the quadrics, with no indeterminacy check.
    pub fn eval_raw<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let q: Vec<S> = self
            .quadrics
            .iter()
            .map(|f| f.map(|c| S::from_rational(c)).eval(x))
            .collect::<std::result::Result<_, _>>()?;
        Ok(q)
    }

    fn on_join(&self, x: &[Rational]) -> Result<bool> {
        for (a, b) in self.base.iter().tuple_combinations() {
            if Mat::from_rows(&[a.clone(), b.clone(), x.to_vec()])?.rank() <= 2 {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Image of a point off the base points and the joins of pairs of base points.
    pub fn eval(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != 4 || x.iter().all(|c| c.is_zero()) {
            return Err(Error::Degenerate("expected a point of P^3".into()));
        }
        if self.on_join(x)? {
            return Err(Error::Indeterminate("point on a contracted line".into()));
        }
        let mut y = self.eval_raw(x)?;
        if y.iter().all(|c| c.is_zero()) {
            return Err(Error::Indeterminate("base point".into()));
        }
        Rational::normalize_projective(&mut y);
        Ok(y)
    }

    pub fn pairs() -> Vec<(usize, usize)> {
        (0..5).tuple_combinations().collect()
    }

    /// Images of the sample points `p_i + k p_j` (k = 1..5) of each join.
    pub fn join_images(&self) -> Result<Vec<Vec<Vec<Rational>>>> {
        Self::pairs()
            .into_iter()
            .map(|(i, j)| {
                (1..=5)
                    .map(|k| {
                        let x: Vec<Rational> = (0..4).map(|c| self.base[i][c].clone() + int(k) * self.base[j][c].clone()).collect();
                        let mut y = self.eval_raw(&x)?;
                        Rational::normalize_projective(&mut y);
                        Ok(y)
                    })
                    .collect()
            })
            .collect()
    }

    /// Spanning vectors of the image of the plane through three base points.
    pub fn triple_plane(&self, i: usize, j: usize, k: usize) -> Result<Vec<Vec<Rational>>> {
        let mut images = Vec::new();
        for (a, b, c) in [(1, 2, 3), (2, -1, 1), (1, 1, -3), (3, 1, 1), (-2, 5, 1), (1, 4, 2), (5, -3, 2), (2, 2, 7), (-1, 3, 4), (4, -5, 3)] {
            let x: Vec<Rational> = (0..4)
                .map(|t| int(a) * self.base[i][t].clone() + int(b) * self.base[j][t].clone() + int(c) * self.base[k][t].clone())
                .collect();
            images.push(self.eval_raw(&x)?);
        }
        span_basis(&images)
    }

    /// Spanning vectors of the image of the blown-up base point `p_i`: the
    /// span of the gradients of the quadrics at `p_i` applied to directions.
    pub fn exceptional_plane(&self, i: usize) -> Result<Vec<Vec<Rational>>> {
        let grads: Vec<Vec<Rational>> = self.quadrics.iter().map(|q| q.gradient_at(&self.base[i])).collect::<std::result::Result<_, _>>()?;
        let jac = Mat::from_rows(&grads)?;
        let cols: Vec<Vec<Rational>> = (0..4).map(|c| jac.col(c)).collect();
        span_basis(&cols)
    }

    /// The image as a nodal cubic: 10 join images, 10 triple planes, 5 exceptional planes.
    pub fn view(&self) -> Result<NodalCubic> {
        let nodes: Vec<Vec<Rational>> = self.join_images()?.into_iter().map(|v| v[0].clone()).collect();
        let mut planes = Vec::new();
        for (i, j, k) in (0..5).tuple_combinations() {
            planes.push((format!("image of <p{i} p{j} p{k}>"), self.triple_plane(i, j, k)?));
        }
        for i in 0..5 {
            planes.push((format!("image of p{i}"), self.exceptional_plane(i)?));
        }
        NodalCubic::attach_incidence(self.cubic.clone(), nodes, planes)
    }

    /// The six lines through `phi(x)` predicted by the construction: images of
    /// the joins of `x` with the base points, and the image of the twisted cubic
    /// through the base points and `x`.
    pub fn construction_lines(&self, x: &[Rational], probe: &[Vec<Rational>]) -> Result<Vec<ProjLine<CFloat>>> {
        let y = ProjPoint::new(self.eval(x)?)?;
        let mut lines = Vec::new();
        for p in &self.base {
            let mut line = None;
            for k in 1..=4 {
                let z: Vec<Rational> = x.iter().zip(p).map(|(a, b)| a.clone() + int(k) * b.clone()).collect();
                let w = ProjPoint::new(self.eval_raw(&z)?)?;
                if let Ok(l) = ProjLine::through(&y, &w) {
                    line = Some(l.to_cfloat());
                    break;
                }
            }
            lines.push(line.ok_or(Error::Degenerate("join image collapsed".into()))?);
        }
        let mut six = self.base.clone();
        six.push(x.to_vec());
        let t = twisted_cubic_sample(&six, probe)?;
        let w = ProjPoint::new(self.eval_raw(&t)?)?;
        lines.push(ProjLine::through(&y.to_cfloat(), &w)?);
        Ok(lines)
    }
}

fn span_basis(vectors: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let (r, piv) = Mat::from_rows(vectors)?.rref();
    Ok((0..piv.len())
        .map(|i| {
            let mut v = r.row(i);
            Rational::normalize_projective(&mut v);
            v
        })
        .collect())
}

/// Checks for the image cubic of `PhiL`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiLChecks {
    pub quadric_dim: usize,
    pub fit_kernel_dim: usize,
    pub fit_samples: usize,
    /// Each join maps its five sample points to one point.
    pub joins_contract: bool,
    /// The ten join images are pairwise distinct.
    pub distinct_nodes: usize,
    /// Gradient of the cubic vanishes at every join image.
    pub nodes_singular: bool,
    /// Triple-plane images are planes inside the cubic.
    pub triple_planes_on_cubic: bool,
    /// Exceptional images are planes inside the cubic.
    pub exceptional_planes_on_cubic: bool,
}

impl PhiLChecks {
    pub fn all_pass(&self) -> bool {
        self.quadric_dim == 5
            && self.fit_kernel_dim == 1
            && self.joins_contract
            && self.distinct_nodes == 10
            && self.nodes_singular
            && self.triple_planes_on_cubic
            && self.exceptional_planes_on_cubic
    }
}

pub fn phi_l_checks(map: &PhiL) -> Result<PhiLChecks> {
    let joins = map.join_images()?;
    let joins_contract = joins.iter().all(|pts| pts.iter().all(|p| p == &pts[0]));
    let nodes: Vec<Vec<Rational>> = joins.iter().map(|v| v[0].clone()).collect();
    let distinct_nodes = nodes.iter().unique().count();
    let grad = map.cubic.form().gradient();
    let mut nodes_singular = true;
    for n in &nodes {
        for g in &grad {
            nodes_singular &= g.eval(n)?.is_zero();
        }
    }
    let mut triple = true;
    for (i, j, k) in (0..5).tuple_combinations() {
        let b = map.triple_plane(i, j, k)?;
        triple &= b.len() == 3 && map.cubic.form().restrict_to_span(&b)?.is_zero();
    }
    let mut exceptional = true;
    for i in 0..5 {
        let b = map.exceptional_plane(i)?;
        exceptional &= b.len() == 3 && map.cubic.form().restrict_to_span(&b)?.is_zero();
    }
    Ok(PhiLChecks {
        quadric_dim: map.quadrics.len(),
        fit_kernel_dim: map.fit_kernel_dim,
        fit_samples: map.fit_samples,
        joins_contract,
        distinct_nodes,
        nodes_singular,
        triple_planes_on_cubic: triple,
        exceptional_planes_on_cubic: exceptional,
    })
}

/// Relative residual of a point of the twisted cubic against its quadrics.
pub const TWISTED_CUBIC_TOL: f64 = 1e-10;

/// Exact data of the rational normal cubic through six points of P^3.
///
/// With the first four points at the coordinate vertices and the fifth at
/// `(1,1,1,1)`, the cubo-cubic transformation `y -> (1/y_0, ..., 1/y_3)` turns
/// the cubics through the vertices into lines; the curve is the image of the
/// line through `(1,1,1,1)` and the transform of the sixth point.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedCubic {
    /// Columns are the scaled first four points.
    frame: Mat<Rational>,
    /// Transform of the sixth point in the normalized frame.
    direction: Vec<Rational>,
}

fn binary_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![int(0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x.clone() * y.clone();
        }
    }
    out
}

impl TwistedCubic {
    pub fn through(points: &[Vec<Rational>]) -> Result<Self> {
        if points.len() != 6 || points.iter().any(|p| p.len() != 4) {
            return Err(Error::Degenerate("expected six points of P^3".into()));
        }
        let cols = Mat::from_cols(&points[..4].to_vec())?;
        let scale = cols
            .solve(&points[4])?
            .ok_or_else(|| Error::Degenerate("first four points are coplanar".into()))?;
        if scale.iter().any(Zero::is_zero) {
            return Err(Error::Degenerate("five points with four coplanar".into()));
        }
        let scaled: Vec<Vec<Rational>> = (0..4).map(|j| points[j].iter().map(|c| c.clone() * scale[j].clone()).collect()).collect();
        let frame = Mat::from_cols(&scaled)?;
        let u = frame
            .solve(&points[5])?
            .ok_or_else(|| Error::Degenerate("frame is singular".into()))?;
        if u.iter().any(Zero::is_zero) {
            return Err(Error::Degenerate("sixth point is coplanar with three others".into()));
        }
        let direction: Vec<Rational> = u.iter().map(|c| num_traits::Inv::inv(c.clone())).collect();
        if direction.iter().all(|c| c == &direction[0]) {
            return Err(Error::Degenerate("fifth and sixth points coincide".into()));
        }
        Ok(TwistedCubic { frame, direction })
    }

    /// The curve point at parameter `(s : t)`; `(1 : 0)` is the fifth point and
    /// `(0 : 1)` the sixth.
    pub fn point<S: Scalar>(&self, s: &S, t: &S) -> Vec<S> {
        let y: Vec<S> = self.direction.iter().map(|d| s.clone() + t.clone() * S::from_rational(d)).collect();
        let k: Vec<S> = (0..4)
            .map(|i| (0..4).filter(|&j| j != i).fold(S::one(), |acc, j| acc * y[j].clone()))
            .collect();
        (0..4)
            .map(|r| (0..4).fold(S::zero(), |acc, c| acc + S::from_rational(&self.frame[(r, c)]) * k[c].clone()))
            .collect()
    }

    /// Binary cubic in `(t, s)` whose roots are the parameters where the curve
    /// meets the hyperplane `h`.
    pub fn section(&self, h: &[Rational]) -> Vec<Rational> {
        let mut total = vec![int(0); 4];
        for c in 0..4 {
            let coord = (0..4)
                .filter(|&j| j != c)
                .fold(vec![int(1)], |acc, j| binary_mul(&acc, &[int(1), self.direction[j].clone()]));
            let weight: Rational = (0..4).fold(int(0), |acc, r| acc + h[r].clone() * self.frame[(r, c)].clone());
            for (k, v) in coord.into_iter().enumerate() {
                total[k] += weight.clone() * v;
            }
        }
        total
    }

    /// Basis of the quadrics containing the curve.
    pub fn quadrics(&self) -> Result<Vec<MultiPoly<Rational>>> {
        let samples: Vec<Vec<Rational>> = (0..8).map(|k| self.point(&int(1), &int(k - 3))).collect();
        forms_through(&samples, 4, 2)
    }
}

/// A point of the rational normal cubic through six points of P^3 on a
/// probe plane, checked against the quadrics containing the curve.
pub fn twisted_cubic_sample(points: &[Vec<Rational>], probe: &[Vec<Rational>]) -> Result<Vec<CFloat>> {
    if points.len() != 6 || probe.len() != 3 {
        return Err(Error::Degenerate("expected six points and a plane".into()));
    }
    let plane = Subspace::span(probe)?;
    if plane.dim() != 2 {
        return Err(Error::Degenerate("probe is not a plane".into()));
    }
    if points.iter().any(|p| plane.contains(p, 0.0)) {
        return Err(Error::Degenerate("probe plane passes through a configuration point".into()));
    }
    let curve = TwistedCubic::through(points)?;
    let quadrics = curve.quadrics()?;
    if quadrics.len() != 3 {
        return Err(Error::Degenerate(format!("{} quadrics contain the curve", quadrics.len())));
    }
    let quadrics_f: Vec<MultiPoly<CFloat>> = quadrics.iter().map(MultiPoly::to_cfloat).collect();
    let section: Vec<CFloat> = curve.section(&plane.covectors()[0]).iter().map(Scalar::to_cfloat).collect();
    let roots = binary_roots(&section, &RootOptions::default())?;
    let inputs: Vec<ProjPoint<CFloat>> = points.iter().map(|p| ProjPoint::new(p.iter().map(Scalar::to_cfloat).collect())).collect::<std::result::Result<_, _>>()?;
    for (t, s, _) in roots {
        let mut x = curve.point(&s, &t);
        CFloat::normalize_projective(&mut x);
        let Ok(xp) = ProjPoint::new(x.clone()) else { continue };
        if inputs.iter().any(|p| p.same_as(&xp, crate::lines3fold::COINCIDENCE_RADIUS)) {
            continue;
        }
        if quadrics_f.iter().all(|q| form_residual(q, &x) <= TWISTED_CUBIC_TOL) {
            return Ok(x);
        }
    }
    Err(Error::NoCandidate("no probe intersection passed all quadrics".into()))
}

/// A random rational plane of P^3 avoiding the given points.
pub fn random_probe(rng: &mut SeededRng, avoid: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    loop {
        let rows: Vec<Vec<Rational>> = (0..3).map(|_| (0..4).map(|_| int(small_int(rng, 9))).collect()).collect();
        let Ok(plane) = Subspace::span(&rows) else { continue };
        if plane.dim() == 2 && !avoid.iter().any(|p| plane.contains(p, 0.0)) {
            return rows;
        }
    }
}

/// A random integer point of P^3 with nonzero image, such that no four of
/// it and the base points are coplanar.
pub fn random_source_point(map: &PhiL, rng: &mut SeededRng, bound: i64) -> Vec<Rational> {
    loop {
        let x: Vec<Rational> = (0..4).map(|_| int(small_int(rng, bound))).collect();
        let mut six = map.base.clone();
        six.push(x.clone());
        if map.eval(&x).is_ok() && in_general_position(&six).unwrap_or(false) {
            return x;
        }
    }
}

/// Scans `samples` image points for vanishing gradients of the cubic (float).
/// Returns the smallest relative gradient norm found.
pub fn singular_probe(map: &PhiL, rng: &mut SeededRng, samples: usize) -> Result<f64> {
    let f = map.cubic.form().to_cfloat();
    let grad = f.gradient();
    let quads: Vec<MultiPoly<CFloat>> = map.quadrics.iter().map(MultiPoly::to_cfloat).collect();
    let mut worst = f64::INFINITY;
    let mut k = 0;
    while k < samples {
        let x: Vec<CFloat> = (0..4).map(|_| CFloat::new(crate::sample::real_unit(rng), crate::sample::real_unit(rng))).collect();
        let mut y: Vec<CFloat> = quads.iter().map(|q| q.eval(&x)).collect::<std::result::Result<_, _>>()?;
        CFloat::normalize_projective(&mut y);
        let g: f64 = grad.iter().map(|d| d.eval(&y).map(|v| v.norm()).unwrap_or(0.0)).fold(0.0, f64::max);
        worst = worst.min(g / f.max_coeff());
        k += 1;
    }
    Ok(worst)
}
