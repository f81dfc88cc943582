//! Univariate complex root finding: Aberth iteration, cluster-based
//! multiplicity estimates, Newton polish.

use num_complex::Complex;
use serde::Serialize;

use super::poly::UniPoly;
use super::scalar::{precision, two_prod, two_sum, CFloat, Precision};
use super::NumError;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RootOptions {
    /// Floor of the radius within which computed roots are merged into one cluster.
    pub cluster_radius: f64,
    /// Bound on the scaled residual `|p(r)| / sum |a_k| |r|^k` after polishing.
    pub residual_tol: f64,
    pub max_iterations: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            cluster_radius: 1e-7,
            residual_tol: 1e-10,
            max_iterations: 800,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub value: CFloat,
    pub multiplicity: usize,
    /// Scaled residual at `value`.
    pub residual: f64,
}

/// All roots of `p` with multiplicity estimates. Multiplicities always sum to the degree.
pub fn univariate_roots(p: &UniPoly<CFloat>, opts: &RootOptions) -> Result<Vec<Root>, NumError> {
    let degree = match p.degree() {
        Some(d) if d >= 1 => d,
        _ => return Err(NumError::DegreeTooLow),
    };
    if p.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(NumError::NonFinite);
    }

    // exact zero roots first
    let zeros = p.coeffs().iter().take_while(|c| **c == Complex::new(0.0, 0.0)).count();
    let reduced = UniPoly::new(p.coeffs()[zeros..].to_vec());
    let lead = *reduced.leading().expect("nonzero polynomial");
    let monic: Vec<CFloat> = reduced.coeffs().iter().map(|c| c / lead).collect();
    let monic = UniPoly::new(monic);

    let mut roots = Vec::new();
    if zeros > 0 {
        roots.push(Root {
            value: Complex::new(0.0, 0.0),
            multiplicity: zeros,
            residual: 0.0,
        });
    }
    if let Some(d) = monic.degree().filter(|&d| d > 0) {
        let approx = aberth(&monic, opts.max_iterations)?;
        debug_assert_eq!(approx.len(), d);
        for (center, mult) in cluster(&approx, opts.cluster_radius) {
            let value = polish(&monic, center, mult);
            let residual = scaled_residual(&monic, value);
            roots.push(Root {
                value,
                multiplicity: mult,
                residual,
            });
        }
    }

    let worst = roots
        .iter()
        .filter(|r| r.multiplicity == 1)
        .map(|r| r.residual)
        .fold(0.0, f64::max);
    if worst > opts.residual_tol {
        return Err(NumError::NonConvergence {
            iterations: opts.max_iterations,
            diagnostic: format!("worst scaled residual {worst:.3e} exceeds {:.1e}", opts.residual_tol),
        });
    }
    debug_assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<usize>(), degree);
    roots.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    Ok(roots)
}

fn horner_with_derivative(p: &UniPoly<CFloat>, z: CFloat) -> (CFloat, CFloat) {
    let mut val = Complex::new(0.0, 0.0);
    let mut der = Complex::new(0.0, 0.0);
    for c in p.coeffs().iter().rev() {
        der = der * z + val;
        val = val * z + c;
    }
    (val, der)
}

fn aberth(p: &UniPoly<CFloat>, max_iterations: usize) -> Result<Vec<CFloat>, NumError> {
    let d = p.degree().unwrap_or(0);
    let c = p.coeffs();
    // Fujiwara-style bound for the initial circle
    let radius = (1..=d)
        .map(|k| c[d - k].norm().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let center = -c[d - 1] / (d as f64);
    let mut z: Vec<CFloat> = (0..d)
        .map(|k| {
            let angle = std::f64::consts::TAU * (k as f64) / (d as f64) + 0.4;
            center + Complex::from_polar(radius, angle)
        })
        .collect();
    let mut converged = vec![false; d];
    for _ in 0..max_iterations {
        let mut max_step: f64 = 0.0;
        for k in 0..d {
            if converged[k] {
                continue;
            }
            let (val, der) = horner_with_derivative(p, z[k]);
            if val.norm() == 0.0 {
                converged[k] = true;
                continue;
            }
            let ratio = val / der;
            let repulsion: CFloat = (0..d)
                .filter(|&j| j != k)
                .map(|j| {
                    let diff = z[k] - z[j];
                    if diff.norm() == 0.0 {
                        Complex::new(0.0, 0.0)
                    } else {
                        Complex::new(1.0, 0.0) / diff
                    }
                })
                .sum();
            let denom = Complex::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() == 0.0 || !der.is_finite() || der.norm() == 0.0 {
                Complex::new(1e-8 * (1.0 + z[k].norm()), 0.0)
            } else {
                ratio / denom
            };
            z[k] -= step;
            let rel = step.norm() / (1.0 + z[k].norm());
            max_step = max_step.max(rel);
            if rel < 4.0 * f64::EPSILON {
                converged[k] = true;
            }
        }
        if converged.iter().all(|&c| c) || max_step < 4.0 * f64::EPSILON {
            return Ok(z);
        }
    }
    // Slow linear convergence near clusters is expected; accept if residuals are small.
    let worst = z
        .iter()
        .map(|&r| scaled_residual(p, r))
        .fold(0.0, f64::max);
    if worst < 1e-6 {
        Ok(z)
    } else {
        Err(NumError::NonConvergence {
            iterations: max_iterations,
            diagnostic: format!("Aberth residual {worst:.3e} after cap"),
        })
    }
}

/// Greedy clustering: a group of `m` computed roots counts as one `m`-fold root
/// when its spread is within the perturbation radius expected for an `m`-fold
/// root, floored at `radius`.
fn cluster(z: &[CFloat], radius: f64) -> Vec<(CFloat, usize)> {
    let d = z.len();
    let eta = 16.0 * f64::EPSILON * d as f64;
    let mut assigned = vec![false; d];
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| z[a].re.total_cmp(&z[b].re));
    let mut out = Vec::new();
    for &i in &order {
        if assigned[i] {
            continue;
        }
        let mut near: Vec<usize> = (0..d).filter(|&j| !assigned[j]).collect();
        near.sort_by(|&a, &b| (z[a] - z[i]).norm().total_cmp(&(z[b] - z[i]).norm()));
        let mut chosen = 1;
        for m in (2..=near.len()).rev() {
            let group = &near[..m];
            let c: CFloat = group.iter().map(|&j| z[j]).sum::<CFloat>() / m as f64;
            let spread = group.iter().map(|&j| (z[j] - c).norm()).fold(0.0, f64::max);
            let allowed = radius.max(eta.powf(1.0 / m as f64)) * c.norm().max(1.0);
            if spread <= allowed {
                chosen = m;
                break;
            }
        }
        let group = &near[..chosen];
        let c: CFloat = group.iter().map(|&j| z[j]).sum::<CFloat>() / chosen as f64;
        for &j in group {
            assigned[j] = true;
        }
        out.push((c, chosen));
    }
    out
}

/// Newton polish; an `m`-fold root is a simple root of the `(m-1)`-th derivative.
fn polish(p: &UniPoly<CFloat>, start: CFloat, multiplicity: usize) -> CFloat {
    let mut q = p.clone();
    for _ in 1..multiplicity {
        q = q.derivative();
    }
    let extended = precision() == Precision::Extended;
    let mut z = start;
    let mut last_step = f64::INFINITY;
    for _ in 0..30 {
        let (_, der) = horner_with_derivative(&q, z);
        let val = if extended {
            compensated_horner(&q, z)
        } else {
            horner_with_derivative(&q, z).0
        };
        if der.norm() == 0.0 || val.norm() == 0.0 {
            break;
        }
        let step = val / der;
        let size = step.norm();
        if !size.is_finite() || size > 2.0 * last_step {
            break;
        }
        z -= step;
        last_step = size;
        if size <= f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Roots `(u, v, multiplicity)` of a binary form with coefficient `k` on
/// `u^k v^(d-k)`; vanishing top coefficients become roots at `(1, 0)`.
pub fn binary_roots(coeffs: &[CFloat], opts: &RootOptions) -> Result<Vec<(CFloat, CFloat, usize)>, NumError> {
    let d = coeffs.len().saturating_sub(1);
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 || d == 0 {
        return Err(NumError::DegreeTooLow);
    }
    let mut top = d;
    while top > 0 && coeffs[top].norm() <= 1e-13 * scale {
        top -= 1;
    }
    let mut out = Vec::new();
    if top > 0 {
        let poly = UniPoly::new(coeffs[..=top].to_vec());
        for r in univariate_roots(&poly, opts)? {
            out.push((r.value, Complex::new(1.0, 0.0), r.multiplicity));
        }
    }
    if top < d {
        out.push((Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), d - top));
    }
    Ok(out)
}

/// `|p(z)| / sum |a_k| |z|^k`.
pub fn scaled_residual(p: &UniPoly<CFloat>, z: CFloat) -> f64 {
    let val = if precision() == Precision::Extended {
        compensated_horner(p, z)
    } else {
        horner_with_derivative(p, z).0
    };
    let r = z.norm();
    let scale: f64 = p
        .coeffs()
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * r + c.norm());
    if scale == 0.0 {
        0.0
    } else {
        val.norm() / scale
    }
}

#[derive(Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        DoubleDouble { hi, lo }
    }
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

/// Horner evaluation carried out in double-double complex arithmetic.
fn compensated_horner(p: &UniPoly<CFloat>, z: CFloat) -> CFloat {
    let (zr, zi) = (DoubleDouble::from(z.re), DoubleDouble::from(z.im));
    let mut re = DoubleDouble::from(0.0);
    let mut im = DoubleDouble::from(0.0);
    for c in p.coeffs().iter().rev() {
        let nre = re.mul(zr).add(im.mul(zi).neg()).add(DoubleDouble::from(c.re));
        let nim = re.mul(zi).add(im.mul(zr)).add(DoubleDouble::from(c.im));
        re = nre;
        im = nim;
    }
    Complex::new(re.hi + re.lo, im.hi + im.lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::scalar::{set_precision, Precision};

    fn poly(c: &[f64]) -> UniPoly<CFloat> {
        UniPoly::new(c.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    #[test]
    fn difference_of_squares() {
        let r = univariate_roots(&poly(&[-1.0, 0.0, 1.0]), &RootOptions::default()).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].value - Complex::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1].value - Complex::new(1.0, 0.0)).norm() < 1e-14);
        assert!(r.iter().all(|x| x.multiplicity == 1));
    }

    #[test]
    fn triple_root_is_clustered() {
        // (x - 2)^3
        let r = univariate_roots(&poly(&[-8.0, 12.0, -6.0, 1.0]), &RootOptions::default()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 3);
        assert!((r[0].value - Complex::new(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn zero_roots_are_exact() {
        let r = univariate_roots(&poly(&[0.0, 0.0, -4.0, 1.0]), &RootOptions::default()).unwrap();
        let zero = r.iter().find(|x| x.value.norm() == 0.0).unwrap();
        assert_eq!(zero.multiplicity, 2);
    }

    #[test]
    fn constants_are_rejected() {
        assert!(matches!(
            univariate_roots(&poly(&[3.0]), &RootOptions::default()),
            Err(NumError::DegreeTooLow)
        ));
    }

    #[test]
    fn extended_precision_polish_agrees() {
        let p = poly(&[-6.0, 11.0, -6.0, 1.0]);
        set_precision(Precision::Extended);
        let r = univariate_roots(&p, &RootOptions::default());
        set_precision(Precision::Double);
        let r = r.unwrap();
        for (root, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((root.value.re - want).abs() < 1e-13);
        }
    }

    #[test]
    fn compensated_horner_beats_plain_near_a_cluster() {
        let p = poly(&[-8.0, 12.0, -6.0, 1.0]);
        let z = Complex::new(2.0 + 1e-6, 0.0);
        let exact = 1e-18;
        let comp = compensated_horner(&p, z).re;
        assert!((comp - exact).abs() < 1e-20, "{comp}");
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(200))]

        #[test]
        fn roots_satisfy_vieta(c in proptest::collection::vec(-5.0f64..5.0, 3..8)) {
            let lead = c.last().copied().unwrap();
            proptest::prop_assume!(lead.abs() > 0.1 && c[0].abs() > 0.1);
            let p = poly(&c);
            let d = c.len() - 1;
            let roots = univariate_roots(&p, &RootOptions::default()).unwrap();
            let all: Vec<CFloat> = roots.iter().flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity)).collect();
            proptest::prop_assert_eq!(all.len(), d);
            let sum: CFloat = all.iter().sum();
            let prod: CFloat = all.iter().product();
            let want_sum = -c[d - 1] / lead;
            let want_prod = if d % 2 == 0 { c[0] / lead } else { -c[0] / lead };
            let scale = all.iter().map(|z| z.norm()).fold(1.0, f64::max);
            proptest::prop_assert!((sum - want_sum).norm() <= 1e-9 * scale * d as f64, "sum {} vs {}", sum, want_sum);
            proptest::prop_assert!((prod - want_prod).norm() <= 1e-9 * scale.powi(d as i32), "product {} vs {}", prod, want_prod);
        }
    }
}
