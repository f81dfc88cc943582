//! The named suites. Each suite draws from its own substream of the seed.

use std::time::Instant;

use itertools::Itertools;
use segre_core::lines3fold::{limit_probe, lines_through, match_lines, FanKind};
use segre_core::modmaps::{
    assemble_degree, diff_rank, exceptional_map, factors_through_phi_prime, g_orbit_fiber_check, local_degree,
    pencil_derivative, phi_prime_monodromy, random_plane, random_segre_point, random_tangent_plane, s6_fiber_check,
    DegreeInputs, ExceptionalSetup, RulingConfig, GROUP_ORDER, S6_ORDER,
};
use segre_core::moduli::{igusa_clebsch, m06_coords, m2_equal, BinarySextic};
use segre_core::numkit::scalar::{int, rat, set_precision, CFloat, Rational, Scalar};
use segre_core::projgeom::{polar_points_on_quadric, ProjLine, Subspace};
use segre_core::sample::{complex_unit, small_int, small_rational, substream, SeededRng};
use segre_core::segre::{
    default_base_points, node_cone_analysis, parse_points, phi_l_checks, random_probe, random_source_point,
    s6_orbit_sizes, PhiL, SegreModel,
};

use crate::config::{RunConfig, Tolerances};
use crate::report::{Assertion, SuiteReport, PLUMBING};
use crate::CliError;

/// Suite names in run order; `all` runs every one of them.
pub const SUITES: [&str; 11] = [
    "segre",
    "phi-l",
    "lines",
    "plane-points",
    "node-cone",
    "invariants",
    "phi0-orbit",
    "g-orbit",
    "local-degree",
    "exceptional",
    "degree-report",
];

const PERTURBATIONS: [f64; 3] = [1e-5, 1e-4, 1e-3];

struct Ctx<'a> {
    cfg: &'a RunConfig,
    tol: Tolerances,
    fixtures: Option<Vec<Vec<Rational>>>,
    rows: Vec<Assertion>,
    inputs: DegreeInputs,
    degree: Option<serde_json::Value>,
    suite: &'static str,
}

impl Ctx<'_> {
    fn rng(&self) -> SeededRng {
        let label = SUITES.iter().position(|s| *s == self.suite).unwrap_or(SUITES.len()) as u64;
        substream(self.cfg.seed, label + 1)
    }

    fn row(&mut self, name: &str, pass: bool, anchor: &str, margin: Option<f64>, detail: impl Into<String>) {
        self.rows.push(Assertion {
            suite: self.suite.to_string(),
            name: name.to_string(),
            pass,
            anchor: anchor.to_string(),
            margin,
            detail: detail.into(),
        });
    }

    fn error_row(&mut self, name: &str, e: impl std::fmt::Display) {
        self.row(name, false, PLUMBING, None, format!("error: {e}"));
    }
}

/// Runs one suite, or every suite for `all`.
pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    let names: Vec<&'static str> = if name == "all" {
        SUITES.to_vec()
    } else {
        vec![*SUITES.iter().find(|s| **s == name).ok_or_else(|| CliError::UnknownSuite(name.to_string()))?]
    };
    let tol = cfg.validate()?;
    let fixtures = match &cfg.fixtures {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Some(parse_points(&text, 4)?)
        }
        None => None,
    };
    set_precision(cfg.precision);
    let start = Instant::now();
    let mut ctx = Ctx {
        cfg,
        tol,
        fixtures,
        rows: Vec::new(),
        inputs: DegreeInputs::default(),
        degree: None,
        suite: names[0],
    };
    for n in names {
        ctx.suite = n;
        match n {
            "segre" => segre(&mut ctx),
            "phi-l" => phi_l(&mut ctx),
            "lines" => lines(&mut ctx),
            "plane-points" => plane_points(&mut ctx),
            "node-cone" => node_cone(&mut ctx),
            "invariants" => invariants(&mut ctx),
            "phi0-orbit" => phi0_orbit(&mut ctx),
            "g-orbit" => g_orbit(&mut ctx),
            "local-degree" => local_degree_suite(&mut ctx),
            "exceptional" => exceptional(&mut ctx),
            _ => degree_report(&mut ctx),
        }
    }
    let mut cfg_echo = cfg.clone();
    cfg_echo.suite = name.to_string();
    Ok(SuiteReport::new(&cfg_echo, tol, ctx.rows, ctx.degree, start.elapsed().as_secs_f64()))
}

fn segre(ctx: &mut Ctx) {
    let (model, checks) = match SegreModel::standard() {
        Ok(m) => m,
        Err(e) => return ctx.error_row("model", e),
    };
    ctx.inputs.node_count = checks.nodes;
    ctx.inputs.incidence_6_4 = checks.configuration_is_6_4();
    ctx.row("nodes", checks.nodes == 10, "ten nodes", None, format!("{} nodes", checks.nodes));
    ctx.row(
        "nodes singular",
        checks.nodes_on_cubic && checks.nodes_singular,
        "gradient vanishes at every node",
        None,
        format!("on cubic {}, gradient zero {}", checks.nodes_on_cubic, checks.nodes_singular),
    );
    ctx.row(
        "planes",
        checks.planes == 15 && checks.planes_on_cubic,
        "fifteen planes inside the cubic",
        None,
        format!("{} planes, all on the cubic {}", checks.planes, checks.planes_on_cubic),
    );
    ctx.row(
        "incidence",
        checks.configuration_is_6_4(),
        "six planes per node, four nodes per plane",
        None,
        format!("nodes per plane {:?}, planes per node {:?}", checks.nodes_per_plane, checks.planes_per_node),
    );
    let (nodes, planes) = s6_orbit_sizes(&model);
    ctx.row(
        "permutation orbits",
        nodes == 10 && planes == 15,
        "coordinate permutations act transitively on nodes and planes",
        None,
        format!("node orbit {nodes}, plane orbit {planes}"),
    );
}

fn phi_l(ctx: &mut Ctx) {
    let mut r = ctx.rng();
    let map = match PhiL::build(&default_base_points(), &mut r) {
        Ok(m) => m,
        Err(e) => return ctx.error_row("build", e),
    };
    let c = match phi_l_checks(&map) {
        Ok(c) => c,
        Err(e) => return ctx.error_row("checks", e),
    };
    ctx.row("quadric system", c.quadric_dim == 5, "quadrics through five points", None, format!("dimension {}", c.quadric_dim));
    ctx.row(
        "image cubic",
        c.fit_kernel_dim == 1,
        "image is a single cubic",
        None,
        format!("kernel {} from {} samples", c.fit_kernel_dim, c.fit_samples),
    );
    ctx.row(
        "contracted joins",
        c.joins_contract && c.distinct_nodes == 10 && c.nodes_singular,
        "joins of base points contract to the ten nodes",
        None,
        format!("contract {}, distinct {}, singular {}", c.joins_contract, c.distinct_nodes, c.nodes_singular),
    );
    ctx.row(
        "planes",
        c.triple_planes_on_cubic && c.exceptional_planes_on_cubic,
        "ten triple planes and five exceptional planes map into the cubic",
        None,
        format!("triple {}, exceptional {}", c.triple_planes_on_cubic, c.exceptional_planes_on_cubic),
    );
}

fn lines(ctx: &mut Ctx) {
    let mut r = ctx.rng();
    let map = match PhiL::build(&default_base_points(), &mut r) {
        Ok(m) => m,
        Err(e) => return ctx.error_row("build", e),
    };
    let sources: Vec<Vec<Rational>> = match &ctx.fixtures {
        Some(points) => points.clone(),
        None => (0..ctx.cfg.trials_or(100)).map(|_| random_source_point(&map, &mut r, 12)).collect(),
    };
    let mut six_simple = 0;
    let mut rank3 = 0;
    let mut matched = 0;
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for (trial, x) in sources.iter().enumerate() {
        let fan = match map.eval(x).and_then(|y| lines_through(&map.cubic, &y)) {
            Ok(f) => f,
            Err(e) => {
                notes.push(format!("point {trial}: {e}"));
                continue;
            }
        };
        if matches!(fan.kind, FanKind::Finite) && fan.lines.len() == 6 && fan.all_simple() {
            six_simple += 1;
        }
        if fan.cone_rank.rank == 3 {
            rank3 += 1;
        }
        let mut six = map.base.clone();
        six.push(x.clone());
        let probe = random_probe(&mut r, &six);
        match map.construction_lines(x, &probe) {
            Ok(predicted) => {
                let a: Vec<&ProjLine<CFloat>> = fan.lines.iter().map(|l| &l.line).collect();
                let b: Vec<&ProjLine<CFloat>> = predicted.iter().collect();
                let d = match_lines(&a, &b).unwrap_or(f64::INFINITY);
                worst = worst.max(d);
                if d <= ctx.tol.plucker {
                    matched += 1;
                }
            }
            Err(e) => notes.push(format!("point {trial}: construction {e}")),
        }
    }
    let n = sources.len();
    let tail = if notes.is_empty() { String::new() } else { format!("; {}", notes.iter().take(3).join("; ")) };
    ctx.row("six simple lines", six_simple == n, "six simple lines through a general point", None, format!("{six_simple}/{n}{tail}"));
    ctx.row("cone rank", rank3 == n, "the six lines span a rank-3 quadric cone", None, format!("{rank3}/{n}"));
    ctx.row(
        "construction agreement",
        matched == n,
        "lines are the five joins and the twisted-cubic secant",
        Some(worst),
        format!("{matched}/{n} six-line agreements, max Plücker distance {worst:.2e}"),
    );
}

fn plane_points(ctx: &mut Ctx) {
    let mut r = ctx.rng();
    let map = match PhiL::build(&default_base_points(), &mut r) {
        Ok(m) => m,
        Err(e) => return ctx.error_row("build", e),
    };
    let view = match map.view() {
        Ok(v) => v,
        Err(e) => return ctx.error_row("view", e),
    };
    let trials = ctx.cfg.trials_or(50);
    let triples: Vec<(usize, usize, usize)> = (0..5).tuple_combinations().collect();
    let steps = [rat(1, 100), rat(1, 1000), rat(1, 10000)];
    let (mut pencils, mut monotone) = (0, 0);
    let mut worst_final: f64 = 0.0;
    let mut notes = Vec::new();
    for trial in 0..trials {
        let plane = trial % triples.len();
        let (i, j, k) = triples[plane];
        // a point of exactly one of the 15 planes
        let (y0, p) = loop {
            let c: Vec<i64> = (0..3).map(|_| small_int(&mut r, 9)).collect();
            if c.contains(&0) {
                continue;
            }
            let y0: Vec<Rational> = (0..4)
                .map(|m| int(c[0]) * map.base[i][m].clone() + int(c[1]) * map.base[j][m].clone() + int(c[2]) * map.base[k][m].clone())
                .collect();
            let Ok(p) = map.eval(&y0) else { continue };
            if view.planes.iter().filter(|pl| pl.space.contains(&p, 0.0)).count() == 1 {
                break (y0, p);
            }
        };
        let Ok(source_plane) = Subspace::span(&[map.base[i].clone(), map.base[j].clone(), map.base[k].clone()]) else {
            notes.push(format!("trial {trial}: source plane"));
            continue;
        };
        let w: Vec<Rational> = loop {
            let w: Vec<Rational> = (0..4).map(|_| int(small_int(&mut r, 9))).collect();
            if !source_plane.contains(&w, 0.0) {
                break w;
            }
        };
        match lines_through(&map.cubic, &p) {
            Ok(fan) if matches!(fan.kind, FanKind::PencilPlusResidual { .. }) && fan.total_multiplicity() == 2 => pencils += 1,
            Ok(fan) => notes.push(format!("trial {trial}: {} residual lines", fan.total_multiplicity())),
            Err(e) => notes.push(format!("trial {trial}: {e}")),
        }
        let path = |t: &Rational| -> segre_core::Result<Vec<Rational>> {
            let y: Vec<Rational> = y0.iter().zip(&w).map(|(a, b)| a.clone() + t.clone() * b.clone()).collect();
            map.eval(&y)
        };
        match limit_probe(&view, plane, path, &steps) {
            Ok(probe) => {
                worst_final = worst_final.max(probe.distances.last().copied().unwrap_or(f64::INFINITY));
                if probe.monotone() {
                    monotone += 1;
                } else {
                    notes.push(format!("trial {trial}: distances {:?}", probe.distances));
                }
            }
            Err(e) => notes.push(format!("trial {trial}: probe {e}")),
        }
    }
    let tail = if notes.is_empty() { String::new() } else { format!("; {}", notes.iter().take(3).join("; ")) };
    ctx.row(
        "pencil plus two lines",
        pencils == trials,
        "at a plane point the lines are the pencil in the plane and two more",
        None,
        format!("{pencils}/{trials}{tail}"),
    );
    ctx.row(
        "limit continuity",
        monotone == trials,
        "limits of the six lines approaching a plane point",
        Some(worst_final),
        format!("{monotone}/{trials} monotone over t = 1e-2, 1e-3, 1e-4"),
    );
}

fn node_cone(ctx: &mut Ctx) {
    let view = match SegreModel::standard().and_then(|(m, _)| m.chart()) {
        Ok(v) => v,
        Err(e) => return ctx.error_row("chart", e),
    };
    for n in 0..view.nodes.len() {
        match node_cone_analysis(&view, n) {
            Ok(rep) => ctx.row(
                &format!("node {n}"),
                rep.is_expected(),
                "rank-4 tangent cone with its six planes split three and three by ruling",
                None,
                format!("cone rank {}, planes {:?} | {:?}", rep.cone_rank, rep.rulings[0], rep.rulings[1]),
            ),
            Err(e) => ctx.error_row(&format!("node {n}"), e),
        }
    }
}

/// Sum of a bracket monomial over all of S6, divided by its stabilizer order.
pub fn expansion_oracle(s: &BinarySextic<Rational>) -> [Rational; 4] {
    let p = s.points();
    let d2 = |i: usize, j: usize| {
        let b = p[i][0].clone() * p[j][1].clone() - p[j][0].clone() * p[i][1].clone();
        b.clone() * b
    };
    let tri = |g: &[usize]| d2(g[0], g[1]) * d2(g[1], g[2]) * d2(g[2], g[0]) * d2(g[3], g[4]) * d2(g[4], g[5]) * d2(g[5], g[3]);
    let mut sums = [int(0), int(0), int(0)];
    for g in (0..6).permutations(6) {
        sums[0] += d2(g[0], g[1]) * d2(g[2], g[3]) * d2(g[4], g[5]);
        sums[1] += tri(&g);
        sums[2] += tri(&g) * d2(g[0], g[3]) * d2(g[1], g[4]) * d2(g[2], g[5]);
    }
    let i10 = (0..6).tuple_combinations().fold(int(1), |acc, (i, j)| acc * d2(i, j));
    [sums[0].clone() / int(48), sums[1].clone() / int(72), sums[2].clone() / int(12), i10]
}

fn random_sextic(r: &mut SeededRng) -> BinarySextic<Rational> {
    loop {
        let pts: Vec<[Rational; 2]> = (0..6).map(|_| [small_rational(r, 12), small_rational(r, 12)]).collect();
        if let Ok(s) = BinarySextic::new(pts) {
            if s.distinct(0.0) {
                return s;
            }
        }
    }
}

fn invariants(ctx: &mut Ctx) {
    let mut r = ctx.rng();
    let fuzz = ctx.cfg.trials_or(1000);
    let exact = fuzz.min(20);
    let oracle_ok = (0..exact)
        .filter(|_| {
            let s = random_sextic(&mut r);
            igusa_clebsch(&s).values().to_vec() == expansion_oracle(&s).to_vec()
        })
        .count();
    ctx.row("expansion oracle", oracle_ok == exact, "closed forms equal the bracket expansion", None, format!("{oracle_ok}/{exact} exact"));
    let mut m2_ok = 0;
    let mut drift: f64 = 0.0;
    for _ in 0..fuzz {
        let s = match BinarySextic::new((0..6).map(|_| [complex_unit(&mut r), complex_unit(&mut r)]).collect::<Vec<[CFloat; 2]>>()) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let m = [[complex_unit(&mut r), complex_unit(&mut r)], [complex_unit(&mut r), complex_unit(&mut r)]];
        let t = s.transform(&m);
        if m2_equal(&igusa_clebsch(&s), &igusa_clebsch(&t), ctx.tol.invariant) {
            m2_ok += 1;
        }
        if let (Ok(a), Ok(b)) = (m06_coords(&s, 1e-12), m06_coords(&t, 1e-12)) {
            drift = drift.max(a.distance(&b));
        } else {
            drift = f64::INFINITY;
        }
    }
    ctx.row("Moebius invariance", m2_ok == fuzz, "invariants are projective invariants", None, format!("{m2_ok}/{fuzz} same class"));
    ctx.row(
        "M06 invariance",
        drift <= ctx.tol.invariant,
        "cross-ratio coordinates are projective invariants",
        Some(drift),
        format!("max drift {drift:.1e}"),
    );
    let repeated = (0..exact)
        .filter(|_| {
            let mut pts = random_sextic(&mut r).points().to_vec();
            pts[5] = [pts[2][0].clone() * int(3), pts[2][1].clone() * int(3)];
            BinarySextic::new(pts).map(|s| igusa_clebsch(&s).i10 == int(0)).unwrap_or(false)
        })
        .count();
    ctx.row("discriminant", repeated == exact, "I10 vanishes on a repeated root", None, format!("{repeated}/{exact}"));
    let s = random_sextic(&mut r);
    let base = igusa_clebsch(&s);
    let mut same = 0;
    let mut images = std::collections::BTreeSet::new();
    for perm in (0..6).permutations(6) {
        let t = s.relabel(&perm);
        if m2_equal(&igusa_clebsch(&t), &base, 0.0) {
            same += 1;
        }
        if let Ok(m) = m06_coords(&t, 0.0) {
            images.insert(m.lambda.iter().map(|x| x.to_string()).join(","));
        }
    }
    ctx.inputs.relabel_orbit_size = images.len();
    ctx.row(
        "relabelings",
        same == S6_ORDER && images.len() == S6_ORDER,
        "forgetting the labels has degree 720",
        None,
        format!("{same}/720 same class, {} distinct M06 points", images.len()),
    );
}

fn phi0_orbit(ctx: &mut Ctx) {
    let mut r = ctx.rng();
    let (model, view) = match SegreModel::standard().and_then(|(m, _)| m.chart().map(|v| (m, v))) {
        Ok(x) => x,
        Err(e) => return ctx.error_row("chart", e),
    };
    let trials = ctx.cfg.trials_or(5);
    let mut sizes = Vec::new();
    let mut worst: f64 = 0.0;
    let mut equal = 0;
    let mut notes = Vec::new();
    for trial in 0..trials {
        let x = random_segre_point(&model, &view, &mut r, 6);
        match s6_fiber_check(&view, &x, &mut r, ctx.tol.orbit_margin) {
            Ok(rep) => {
                sizes.push(rep.orbit_size);
                worst = worst.max(rep.margin);
                if rep.all_equal {
                    equal += 1;
                }
            }
            Err(e) => notes.push(format!("trial {trial}: {e}")),
        }
    }
    ctx.inputs.s6_orbit_size = if sizes.len() == trials { sizes.iter().copied().min().unwrap_or(0) } else { 0 };
    let tail = if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) };
    ctx.row(
        "orbit size",
        sizes.len() == trials && sizes.iter().all(|&n| n == S6_ORDER),
        "generic permutation orbits have 720 points",
        None,
        format!("sizes {sizes:?}{tail}"),
    );
    ctx.row(
        "equal invariants",
        equal == trials && worst <= ctx.tol.orbit_margin,
        "each orbit lies in one fiber",
        Some(worst),
        format!("{equal}/{trials} orbits, margin {worst:.1e}; global degree 720 is paper-accepted"),
    );
}

fn g_orbit(ctx: &mut Ctx) {
    let mut r = ctx.rng();
    let cfg = match RulingConfig::standard() {
        Ok(c) => c,
        Err(e) => return ctx.error_row("configuration", e),
    };
    ctx.inputs.group_order = cfg.group.len();
    ctx.row("group order", cfg.group.len() == GROUP_ORDER, "the group fixing the six lines has order 72", None, format!("|G| = {}", cfg.group.len()));
    let trials = ctx.cfg.trials_or(3);
    let mut good = 0;
    let mut details = Vec::new();
    for _ in 0..trials {
        let h = random_tangent_plane(&cfg, &mut r);
        match g_orbit_fiber_check(&cfg, &h) {
            Ok(rep) => {
                if rep.all_pass() {
                    good += 1;
                }
                details.push(format!(
                    "orbit {} stabilizer {} boundary {} matched {}",
                    rep.orbit_size, rep.stabilizer_order, rep.boundary_images, rep.images_equal
                ));
            }
            Err(e) => details.push(format!("error: {e}")),
        }
    }
    ctx.inputs.tangent_orbit_size = if good == trials { GROUP_ORDER } else { 0 };
    ctx.row(
        "tangent orbits",
        good == trials,
        "tangent planes have free orbits with equal boundary images",
        None,
        format!("{good}/{trials}: {}", details.iter().unique().join("; ")),
    );
}

fn local_degree_suite(ctx: &mut Ctx) {
    let mut r = ctx.rng();
    let cfg = match RulingConfig::standard() {
        Ok(c) => c,
        Err(e) => return ctx.error_row("configuration", e),
    };
    let h = random_tangent_plane(&cfg, &mut r);
    let hf: Vec<CFloat> = h.iter().map(Scalar::to_cfloat).collect();
    let mut degrees = Vec::new();
    let mut sources = true;
    for eps in PERTURBATIONS {
        match local_degree(&cfg, &hf, eps, &mut r) {
            Ok(d) => {
                degrees.push(d.clusters);
                sources &= d.contains_source;
            }
            Err(_) => degrees.push(0),
        }
    }
    ctx.inputs.local_degrees = degrees.clone();
    ctx.row(
        "ramification",
        sources && degrees.iter().all(|&d| d == 2),
        "local degree 2 at tangent planes",
        None,
        format!("clusters {degrees:?} at eps 1e-5, 1e-4, 1e-3; source recovered {sources}"),
    );
    match pencil_derivative(&cfg, &h, &mut r) {
        Ok(p) => ctx.row(
            "pencil derivative",
            p.ratio <= ctx.tol.pencil_ratio,
            "the differential kills the pencil direction",
            Some(p.ratio),
            format!("ratio {:.1e}", p.ratio),
        ),
        Err(e) => ctx.error_row("pencil derivative", e),
    }
    let generic: Vec<CFloat> = random_plane(&cfg, &mut r).iter().map(Scalar::to_cfloat).collect();
    let rank = diff_rank(&cfg, &generic, 1e-5).map(|d| if d.rank == d.half_step_rank { d.rank } else { 0 });
    let rank = rank.unwrap_or(0);
    ctx.inputs.generic_diff_rank = rank;
    ctx.row("generic rank", rank == 3, "the map is dominant", None, format!("rank {rank}"));
    if ctx.cfg.long {
        match phi_prime_monodromy(&cfg, &mut r, 400, 40) {
            Ok(c) => ctx.row(
                "monodromy",
                c.failed_tracks == 0,
                PLUMBING,
                Some(c.solutions as f64),
                format!("{} preimages after {} loops, {} failed tracks", c.solutions, c.loops, c.failed_tracks),
            ),
            Err(e) => ctx.error_row("monodromy", e),
        }
    }
}

fn exceptional(ctx: &mut Ctx) {
    let mut r = ctx.rng();
    let setup = match RulingConfig::standard().and_then(ExceptionalSetup::standard) {
        Ok(s) => s,
        Err(e) => return ctx.error_row("setup", e),
    };
    let trials = ctx.cfg.trials_or(50);
    let (mut involution, mut polar, mut factors) = (0, 0, 0);
    let mut notes = Vec::new();
    for trial in 0..trials {
        let x = setup.random_point(&mut r, 9);
        let check = || -> segre_core::Result<(bool, bool, bool)> {
            let v = exceptional_map(&setup, &x)?;
            let w = exceptional_map(&setup, &v.partner)?;
            let mut xn = x.clone();
            Rational::normalize_projective(&mut xn);
            let inv = v.partner != xn && w.partner == xn && w.plane == v.plane && m2_equal(&v.invariants, &w.invariants, 0.0);
            // independent oracle: the points of the quadric whose tangent hyperplanes contain the plane
            let tangent = setup.quadric.matrix().mul_vec(&x)?;
            let plane = Subspace::from_equations(4, &[tangent, setup.hyperplane.clone()])?;
            let pair = polar_points_on_quadric(&setup.quadric, &plane, 0.0)?.exact;
            let pol = pair.is_some_and(|p| (p[0] == xn && p[1] == v.partner) || (p[1] == xn && p[0] == v.partner));
            Ok((inv, pol, factors_through_phi_prime(&setup, &v)?))
        };
        match check() {
            Ok((a, b, c)) => {
                involution += a as usize;
                polar += b as usize;
                factors += c as usize;
            }
            Err(e) => notes.push(format!("trial {trial}: {e}")),
        }
    }
    ctx.inputs.plane_fiber = if involution == trials && polar == trials { 2 } else { 0 };
    let tail = if notes.is_empty() { String::new() } else { format!("; {}", notes.iter().take(3).join("; ")) };
    ctx.row(
        "partner involution",
        involution == trials,
        "two points over each plane with equal invariants",
        None,
        format!("{involution}/{trials}{tail}"),
    );
    ctx.row("polar oracle", polar == trials, "partner equals the second polar point", None, format!("{polar}/{trials}"));
    ctx.row("factorization", factors == trials, "the map factors through the plane map", None, format!("{factors}/{trials}"));
}

fn degree_report(ctx: &mut Ctx) {
    let needs: [(&'static str, fn(&mut Ctx)); 6] = [
        ("segre", segre),
        ("invariants", invariants),
        ("phi0-orbit", phi0_orbit),
        ("g-orbit", g_orbit),
        ("local-degree", local_degree_suite),
        ("exceptional", exceptional),
    ];
    let have = ctx.rows.iter().map(|a| a.suite.clone()).unique().collect::<Vec<_>>();
    for (name, run) in needs {
        if !have.iter().any(|s| s == name) {
            ctx.suite = name;
            run(ctx);
        }
    }
    ctx.suite = "degree-report";
    let report = assemble_degree(&ctx.inputs);
    for ing in &report.ingredients {
        let detail = match ing.required {
            Some(req) => format!("{} (needs {req}), {:?}", ing.value, ing.status),
            None => format!("{}, {:?}", ing.value, ing.status),
        };
        ctx.row(&ing.name, ing.holds(), &ing.anchor, None, detail);
    }
    ctx.row(
        "total",
        report.ok() && report.total == 2_074_320,
        "degree of the modular map",
        None,
        format!("delta = {}, deg = 720 + 10 * {} = {}", report.delta, report.delta, report.total),
    );
    ctx.degree = Some(report.to_json(ctx.cfg.seed, &serde_json::to_value(ctx.tol).expect("tolerances serialize")));
}
