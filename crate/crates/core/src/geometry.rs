//! Star-shaped planar domains `r(θ) = 1 + Σ_k (a_k cos kθ + b_k sin kθ)` and
//! their boundary and interior quadratures.
//!
//! Boundary nodes are placed equispaced in arclength so that the boundary
//! Laplacian `-d²/ds²` is diagonal in the discrete Fourier basis of the
//! samples.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};

pub type Point = [f64; 2];

const POSITIVITY_SAMPLES: usize = 4096;
const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-13;

/// Radial trigonometric polynomial domain. `radial_cos[i]` and `radial_sin[i]`
/// multiply `cos((i+1)θ)` and `sin((i+1)θ)`; empty lists give the unit disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain", into = "RawDomain")]
pub struct DomainSpec {
    radial_cos: Vec<f64>,
    radial_sin: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawDomain {
    #[serde(default)]
    radial_cos: Vec<f64>,
    #[serde(default)]
    radial_sin: Vec<f64>,
}

impl TryFrom<RawDomain> for DomainSpec {
    type Error = MpsError;
    fn try_from(raw: RawDomain) -> Result<Self> {
        DomainSpec::new(raw.radial_cos, raw.radial_sin)
    }
}

impl From<DomainSpec> for RawDomain {
    fn from(d: DomainSpec) -> Self {
        RawDomain {
            radial_cos: d.radial_cos,
            radial_sin: d.radial_sin,
        }
    }
}

impl DomainSpec {
    pub fn new(radial_cos: Vec<f64>, radial_sin: Vec<f64>) -> Result<Self> {
        if radial_cos.iter().chain(&radial_sin).any(|c| !c.is_finite()) {
            return Err(MpsError::InvalidDomain("non-finite coefficient".into()));
        }
        let spec = DomainSpec {
            radial_cos,
            radial_sin,
        };
        for i in 0..POSITIVITY_SAMPLES {
            let theta = TAU * i as f64 / POSITIVITY_SAMPLES as f64;
            let r = spec.radius(theta);
            if r <= 0.0 {
                return Err(MpsError::InvalidDomain(format!(
                    "radius {r} <= 0 at θ = {theta}"
                )));
            }
        }
        Ok(spec)
    }

    pub fn unit_disc() -> Self {
        DomainSpec {
            radial_cos: Vec::new(),
            radial_sin: Vec::new(),
        }
    }

    pub fn radial_cos(&self) -> &[f64] {
        &self.radial_cos
    }

    pub fn radial_sin(&self) -> &[f64] {
        &self.radial_sin
    }

    pub fn is_disc(&self) -> bool {
        self.radial_cos
            .iter()
            .chain(&self.radial_sin)
            .all(|&c| c == 0.0)
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.radius_and_derivative(theta).0
    }

    /// `(r(θ), r'(θ))`.
    pub fn radius_and_derivative(&self, theta: f64) -> (f64, f64) {
        let mut r = 1.0;
        let mut dr = 0.0;
        for (i, &a) in self.radial_cos.iter().enumerate() {
            let k = (i + 1) as f64;
            let (s, c) = (k * theta).sin_cos();
            r += a * c;
            dr -= a * k * s;
        }
        for (i, &b) in self.radial_sin.iter().enumerate() {
            let k = (i + 1) as f64;
            let (s, c) = (k * theta).sin_cos();
            r += b * s;
            dr += b * k * c;
        }
        (r, dr)
    }

    pub fn point(&self, theta: f64) -> Point {
        let r = self.radius(theta);
        let (s, c) = theta.sin_cos();
        [r * c, r * s]
    }

    /// Parametric velocity `x'(θ)`.
    pub fn tangent(&self, theta: f64) -> Point {
        let (r, dr) = self.radius_and_derivative(theta);
        let (s, c) = theta.sin_cos();
        [dr * c - r * s, dr * s + r * c]
    }

    /// Arclength speed `|x'(θ)| = sqrt(r² + r'²)`.
    pub fn speed(&self, theta: f64) -> f64 {
        let (r, dr) = self.radius_and_derivative(theta);
        r.hypot(dr)
    }

    /// Outward unit normal at parameter `θ`.
    pub fn normal(&self, theta: f64) -> Point {
        let t = self.tangent(theta);
        let len = t[0].hypot(t[1]);
        [t[1] / len, -t[0] / len]
    }

    /// Strict point-in-domain test.
    pub fn contains(&self, p: Point) -> bool {
        let rho = p[0].hypot(p[1]);
        if rho == 0.0 {
            return true;
        }
        rho < self.radius(p[1].atan2(p[0]))
    }

    /// Axis-aligned bounding box `[xmin, xmax, ymin, ymax]` from dense sampling.
    pub fn bounding_box(&self) -> [f64; 4] {
        let mut bb = [
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ];
        for i in 0..POSITIVITY_SAMPLES {
            let p = self.point(TAU * i as f64 / POSITIVITY_SAMPLES as f64);
            bb[0] = bb[0].min(p[0]);
            bb[1] = bb[1].max(p[0]);
            bb[2] = bb[2].min(p[1]);
            bb[3] = bb[3].max(p[1]);
        }
        bb
    }

    pub fn max_radius(&self) -> f64 {
        (0..POSITIVITY_SAMPLES)
            .map(|i| self.radius(TAU * i as f64 / POSITIVITY_SAMPLES as f64))
            .fold(0.0, f64::max)
    }
}

/// Periodic trapezoid rule on `[0, 2π)` with doubling until successive values
/// agree to `rel_tol`. Returns the value and the final node count.
fn adaptive_periodic_trapezoid(f: impl Fn(f64) -> f64, rel_tol: f64) -> (f64, usize) {
    let trap =
        |n: usize| (0..n).map(|i| f(TAU * i as f64 / n as f64)).sum::<f64>() * TAU / n as f64;
    let mut n = 32;
    let mut prev = trap(n);
    loop {
        n *= 2;
        let next = trap(n);
        if (next - prev).abs() <= rel_tol * next.abs() || n >= 1 << 20 {
            return (next, n);
        }
        prev = next;
    }
}

/// Perimeter of the domain boundary.
pub fn perimeter(spec: &DomainSpec) -> f64 {
    adaptive_periodic_trapezoid(|t| spec.speed(t), 1e-13).0
}

/// Area `½∮ x·n ds = ½∫ r(θ)² dθ`.
pub fn area(spec: &DomainSpec) -> f64 {
    0.5 * adaptive_periodic_trapezoid(|t| spec.radius(t).powi(2), 1e-14).0
}

/// Spectral antiderivative of the arclength speed, `s(θ) = ∫_0^θ |x'|`.
struct ArclengthMap {
    mean: f64,
    cos_coef: Vec<f64>,
    sin_coef: Vec<f64>,
}

impl ArclengthMap {
    fn new(spec: &DomainSpec) -> Self {
        let (_, samples) = adaptive_periodic_trapezoid(|t| spec.speed(t), 1e-15);
        let m = samples.max(64);
        let g: Vec<f64> = (0..m)
            .map(|i| spec.speed(TAU * i as f64 / m as f64))
            .collect();
        let mean = g.iter().sum::<f64>() / m as f64;
        let kmax = m / 2 - 1;
        let mut cos_coef = Vec::with_capacity(kmax);
        let mut sin_coef = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            let (mut c, mut s) = (0.0, 0.0);
            for (i, gi) in g.iter().enumerate() {
                let (sn, cs) = (TAU * (k * i % m) as f64 / m as f64).sin_cos();
                c += gi * cs;
                s += gi * sn;
            }
            cos_coef.push(2.0 * c / m as f64);
            sin_coef.push(2.0 * s / m as f64);
        }
        ArclengthMap {
            mean,
            cos_coef,
            sin_coef,
        }
    }

    fn perimeter(&self) -> f64 {
        self.mean * TAU
    }

    fn eval(&self, theta: f64) -> f64 {
        let mut s = self.mean * theta;
        for (i, (&c, &d)) in self.cos_coef.iter().zip(&self.sin_coef).enumerate() {
            let k = (i + 1) as f64;
            let (sn, cs) = (k * theta).sin_cos();
            s += (c * sn + d * (1.0 - cs)) / k;
        }
        s
    }
}

/// Boundary samples equispaced in arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDiscretization {
    pub nodes: Vec<Point>,
    pub normals: Vec<Point>,
    pub weights: Vec<f64>,
    pub perimeter: f64,
    pub arclengths: Vec<f64>,
    /// Polar parameter of each node.
    pub thetas: Vec<f64>,
}

impl BoundaryDiscretization {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Polar parameters `θ_i` with `s(θ_i) = i·L/n`, found by Newton's method on
/// the arclength function, together with the perimeter `L`.
pub fn arclength_thetas(spec: &DomainSpec, n: usize) -> Result<(Vec<f64>, f64)> {
    if n == 0 {
        return Err(MpsError::InvalidInput("need at least one node".into()));
    }
    let map = ArclengthMap::new(spec);
    let length = map.perimeter();
    let mut thetas = Vec::with_capacity(n);
    for i in 0..n {
        let target = length * i as f64 / n as f64;
        let mut theta = TAU * i as f64 / n as f64;
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let step = (map.eval(theta) - target) / spec.speed(theta);
            theta -= step;
            if step.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(MpsError::Discretization(format!(
                "arclength inversion did not converge at node {i}"
            )));
        }
        thetas.push(theta);
    }
    Ok((thetas, length))
}

/// Samples the boundary at `n` nodes equispaced in arclength.
pub fn build_boundary(spec: &DomainSpec, n: usize) -> Result<BoundaryDiscretization> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(MpsError::InvalidInput(format!(
            "boundary node count must be even and >= 4, got {n}"
        )));
    }
    let (thetas, length) = arclength_thetas(spec, n)?;
    Ok(BoundaryDiscretization {
        nodes: thetas.iter().map(|&t| spec.point(t)).collect(),
        normals: thetas.iter().map(|&t| spec.normal(t)).collect(),
        weights: vec![length / n as f64; n],
        perimeter: length,
        arclengths: (0..n).map(|i| length * i as f64 / n as f64).collect(),
        thetas,
    })
}

/// Tensor-product interior rule under the polar map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorQuadrature {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * pn - p0) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre in `ρ ∈ (0, 1]` times the periodic trapezoid in `θ`.
pub fn build_interior(spec: &DomainSpec, n_r: usize, n_t: usize) -> Result<InteriorQuadrature> {
    if n_r < 4 || n_t < 8 {
        return Err(MpsError::InvalidInput(format!(
            "interior rule needs n_r >= 4 and n_t >= 8, got ({n_r}, {n_t})"
        )));
    }
    let (gx, gw) = gauss_legendre(n_r);
    let mut points = Vec::with_capacity(n_r * n_t);
    let mut weights = Vec::with_capacity(n_r * n_t);
    for j in 0..n_t {
        let theta = TAU * j as f64 / n_t as f64;
        let r = spec.radius(theta);
        let (s, c) = theta.sin_cos();
        for (x, w) in gx.iter().zip(&gw) {
            let rho = 0.5 * (x + 1.0);
            points.push([rho * r * c, rho * r * s]);
            weights.push(0.5 * w * (TAU / n_t as f64) * rho * r * r);
        }
    }
    Ok(InteriorQuadrature { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trefoil() -> DomainSpec {
        DomainSpec::new(vec![0.0, 0.0, 0.3], vec![]).unwrap()
    }

    /// Adaptive Simpson on `[a, b]`, written independently of the trapezoid path.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn disc_perimeter_is_two_pi() {
        assert!((perimeter(&DomainSpec::unit_disc()) - TAU).abs() < 1e-14);
    }

    #[test]
    fn trefoil_perimeter_matches_simpson_oracle() {
        let d = trefoil();
        let speed = |t: f64| {
            let r = 1.0 + 0.3 * (3.0 * t).cos();
            let dr = -0.9 * (3.0 * t).sin();
            (r * r + dr * dr).sqrt()
        };
        let oracle: f64 = (0..6)
            .map(|i| {
                simpson(
                    &speed,
                    i as f64 * TAU / 6.0,
                    (i + 1) as f64 * TAU / 6.0,
                    1e-15,
                )
            })
            .sum();
        let got = perimeter(&d);
        assert!((got - oracle).abs() < 1e-12 * oracle, "{got} vs {oracle}");
    }

    #[test]
    fn perimeter_is_second_order_in_small_perturbation() {
        for eps in [1e-2, 1e-3] {
            let d = DomainSpec::new(vec![eps], vec![]).unwrap();
            let excess = perimeter(&d) - TAU;
            assert!(excess.abs() < 5.0 * eps * eps, "eps={eps}: {excess}");
        }
    }

    #[test]
    fn nonpositive_radius_is_rejected() {
        assert!(matches!(
            DomainSpec::new(vec![1.2], vec![]),
            Err(MpsError::InvalidDomain(_))
        ));
        assert!(DomainSpec::new(vec![], vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn disc_four_nodes() {
        let bd = build_boundary(&DomainSpec::unit_disc(), 4).unwrap();
        let want = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for i in 0..4 {
            for c in 0..2 {
                assert!((bd.nodes[i][c] - want[i][c]).abs() < 1e-13);
                assert!((bd.normals[i][c] - want[i][c]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn odd_or_tiny_node_counts_are_rejected() {
        assert!(build_boundary(&DomainSpec::unit_disc(), 17).is_err());
        assert!(build_boundary(&DomainSpec::unit_disc(), 2).is_err());
    }

    #[test]
    fn weights_sum_to_perimeter_and_normals_are_unit() {
        let d = DomainSpec::new(vec![0.1, 0.0, 0.05], vec![0.0, 0.07]).unwrap();
        let bd = build_boundary(&d, 256).unwrap();
        let total: f64 = bd.weights.iter().sum();
        assert!((total - bd.perimeter).abs() < 1e-10 * bd.perimeter);
        assert!((bd.perimeter - perimeter(&d)).abs() < 1e-12);
        for n in &bd.normals {
            assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equi_arclength_chords() {
        let bd = build_boundary(&trefoil(), 256).unwrap();
        let n = bd.len();
        let chords: Vec<f64> = (0..n)
            .map(|i| {
                let (a, b) = (bd.nodes[i], bd.nodes[(i + 1) % n]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .collect();
        let max = chords.iter().cloned().fold(0.0, f64::max);
        let min = chords.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((max - min) / max < 1e-3, "spread {}", (max - min) / max);
    }

    #[test]
    fn segment_arclengths_equal() {
        let d = trefoil();
        let bd = build_boundary(&d, 64).unwrap();
        let n = bd.len();
        for i in 0..n {
            let a = bd.thetas[i];
            let mut b = bd.thetas[(i + 1) % n];
            if b < a {
                b += TAU;
            }
            let seg = simpson(&|t| d.speed(t), a, b, 1e-15);
            assert!((seg - bd.perimeter / n as f64).abs() < 1e-10 * bd.perimeter);
        }
    }

    #[test]
    fn normals_point_outward() {
        let d = DomainSpec::new(vec![0.1, 0.0, 0.2], vec![0.05]).unwrap();
        let bd = build_boundary(&d, 128).unwrap();
        let eps = 1e-4;
        for (x, n) in bd.nodes.iter().zip(&bd.normals) {
            assert!(!d.contains([x[0] + eps * n[0], x[1] + eps * n[1]]));
            assert!(d.contains([x[0] - eps * n[0], x[1] - eps * n[1]]));
        }
    }

    #[test]
    fn disc_interior_rule() {
        let d = DomainSpec::unit_disc();
        let iq = build_interior(&d, 8, 16).unwrap();
        let total: f64 = iq.weights.iter().sum();
        assert!((total - PI).abs() < 1e-12);
        let second: f64 = iq
            .points
            .iter()
            .zip(&iq.weights)
            .map(|(p, w)| w * (p[0] * p[0] + p[1] * p[1]))
            .sum();
        assert!((second - PI / 2.0).abs() < 1e-12);
        assert!(build_interior(&d, 3, 16).is_err());
        assert!(build_interior(&d, 8, 7).is_err());
    }

    #[test]
    fn interior_area_matches_boundary_divergence_oracle() {
        let d = trefoil();
        let bd = build_boundary(&d, 512).unwrap();
        let oracle: f64 = bd
            .nodes
            .iter()
            .zip(&bd.normals)
            .zip(&bd.weights)
            .map(|((x, n), w)| 0.5 * w * (x[0] * n[0] + x[1] * n[1]))
            .sum();
        let iq = build_interior(&d, 8, 64).unwrap();
        let total: f64 = iq.weights.iter().sum();
        assert!((total - oracle).abs() < 1e-9 * oracle);
        assert!((area(&d) - oracle).abs() < 1e-10 * oracle);
        assert!(iq.points.iter().all(|&p| d.contains(p)));
    }

    #[test]
    fn spectral_convergence_under_doubling() {
        let d = DomainSpec::new(vec![0.1, 0.0, 0.05], vec![0.0, 0.0, 0.0, 0.0, 0.05]).unwrap();
        let exact = perimeter(&d);
        let errs: Vec<f64> = [16, 32, 64, 128]
            .iter()
            .map(|&n| {
                let s: f64 = (0..n)
                    .map(|i| d.speed(TAU * i as f64 / n as f64))
                    .sum::<f64>()
                    * TAU
                    / n as f64;
                (s - exact).abs()
            })
            .collect();
        // Each doubling gains far more than the factor 4 of a second-order rule.
        assert!(
            errs[1] < errs[0] / 100.0 && errs[2] < errs[1] / 100.0,
            "{errs:?}"
        );
        assert!(errs[3] < 1e-13, "{errs:?}");
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let int = |p: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum::<f64>();
        assert!((int(0) - 2.0).abs() < 1e-14);
        assert!((int(10) - 2.0 / 11.0).abs() < 1e-14);
        assert!(int(7).abs() < 1e-14);
    }
}
