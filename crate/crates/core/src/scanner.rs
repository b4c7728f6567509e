//! Tension-curve scans, minimum refinement and eigenvalue certificates.

use serde::{Deserialize, Serialize};

use crate::basis::{make_mfs_basis, BasisSet};
use crate::error::{MpsError, Result};
use crate::exec::Exec;
use crate::geometry::{
    build_boundary, build_interior, BoundaryDiscretization, DomainSpec, InteriorQuadrature,
};
use crate::tension::{self, BoundaryCondition, TensionResult, DEFAULT_HIGHER, DEFAULT_REG_EPS};

/// Golden-section step fraction `(3 - √5)/2`.
const GOLDEN: f64 = 0.381_966_011_250_105_1;
pub const MAX_REFINE_EVALS: usize = 200;

/// How to build the particular-solution basis for a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisConfig {
    Mfs { points: usize, offset: f64 },
    FourierBessel { max_order: usize },
}

impl BasisConfig {
    pub fn build(&self, domain: &DomainSpec) -> Result<BasisSet> {
        match *self {
            BasisConfig::Mfs { points, offset } => make_mfs_basis(domain, points, offset),
            BasisConfig::FourierBessel { max_order } => BasisSet::fourier_bessel(max_order),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub domain: DomainSpec,
    pub basis: BasisConfig,
    pub bc: BoundaryCondition,
    pub n_boundary: usize,
    pub interior_radial: usize,
    pub interior_angular: usize,
    pub reg_eps: f64,
    /// Number of higher generalized tensions reported per energy.
    pub n_higher: usize,
}

impl ProblemSpec {
    /// Defaults for everything but the domain, basis and boundary condition.
    pub fn new(domain: DomainSpec, basis: BasisConfig, bc: BoundaryCondition) -> Self {
        ProblemSpec {
            domain,
            basis,
            bc,
            n_boundary: 256,
            interior_radial: 24,
            interior_angular: 160,
            reg_eps: DEFAULT_REG_EPS,
            n_higher: DEFAULT_HIGHER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_boundary < 4 || !self.n_boundary.is_multiple_of(2) {
            return Err(MpsError::InvalidInput(format!(
                "n_boundary must be even and >= 4, got {}",
                self.n_boundary
            )));
        }
        if self.interior_radial < 4 || self.interior_angular < 8 {
            return Err(MpsError::InvalidInput(
                "interior resolution too small".into(),
            ));
        }
        if !(1e-16..=1e-6).contains(&self.reg_eps) {
            return Err(MpsError::InvalidInput(format!(
                "reg_eps {:e} outside [1e-16, 1e-6]",
                self.reg_eps
            )));
        }
        match self.basis {
            BasisConfig::Mfs { points, offset } => {
                if points == 0 || points > 2000 {
                    return Err(MpsError::InvalidBasis(format!(
                        "mfs_points {points} outside [1, 2000]"
                    )));
                }
                if !(0.02..=1.0).contains(&offset) {
                    return Err(MpsError::InvalidBasis(format!(
                        "mfs_offset {offset} outside [0.02, 1]"
                    )));
                }
            }
            BasisConfig::FourierBessel { max_order } => {
                if 2 * max_order + 1 > 2000 || max_order + 1 > crate::specfun::MAX_ORDER {
                    return Err(MpsError::InvalidBasis(format!(
                        "fb_max_order {max_order} too large"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Builds the discretizations and basis.
    pub fn prepare(&self, exec: Exec) -> Result<Problem> {
        self.validate()?;
        Ok(Problem {
            bd: build_boundary(&self.domain, self.n_boundary)?,
            iq: build_interior(&self.domain, self.interior_radial, self.interior_angular)?,
            basis: self.basis.build(&self.domain)?,
            spec: self.clone(),
            exec,
        })
    }
}

/// A problem ready for tension evaluations.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub bd: BoundaryDiscretization,
    pub iq: InteriorQuadrature,
    pub basis: BasisSet,
    pub exec: Exec,
}

impl Problem {
    fn check_energy(&self, e: f64) -> Result<()> {
        let floor = if self.spec.bc == BoundaryCondition::NeumannFiltered {
            1.0
        } else {
            0.0
        };
        if !(e.is_finite() && e > floor) {
            return Err(MpsError::InvalidInput(format!(
                "energy {e} must exceed {floor}"
            )));
        }
        Ok(())
    }

    fn gram(&self, e: f64) -> Result<tension::GramPair> {
        self.check_energy(e)?;
        tension::assemble(self.spec.bc, &self.basis, e, &self.bd, &self.iq, self.exec)
    }

    /// Lowest `1 + n_higher` tensions at `e`.
    pub fn tensions(&self, e: f64) -> Result<Vec<f64>> {
        tension::tension_values(&self.gram(e)?, self.spec.reg_eps, 1 + self.spec.n_higher)
    }

    pub fn tension(&self, e: f64) -> Result<f64> {
        Ok(tension::tension_values(&self.gram(e)?, self.spec.reg_eps, 1)?[0])
    }

    /// Minimum tension with its coefficients.
    pub fn solve_at(&self, e: f64) -> Result<TensionResult> {
        tension::min_tension_with(&self.gram(e)?, self.spec.reg_eps, self.spec.n_higher)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFailure {
    pub energy: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub energies: Vec<f64>,
    pub tensions: Vec<f64>,
    pub higher_tensions: Vec<Vec<f64>>,
    /// Grid energies whose evaluation failed; they are left out above.
    pub failures: Vec<ScanFailure>,
}

/// Evaluates the tension curve on `n_grid` equispaced energies in `[e_lo, e_hi]`.
pub fn scan(p: &Problem, e_lo: f64, e_hi: f64, n_grid: usize) -> Result<ScanResult> {
    if !(e_lo > 0.0 && e_lo < e_hi && e_hi.is_finite()) {
        return Err(MpsError::InvalidInput(format!(
            "bad window [{e_lo}, {e_hi}]"
        )));
    }
    if n_grid < 2 {
        return Err(MpsError::InvalidInput(
            "need at least two grid points".into(),
        ));
    }
    if p.spec.bc == BoundaryCondition::NeumannFiltered && e_lo <= 1.0 {
        return Err(MpsError::InvalidInput(
            "filtered Neumann scans need E_lo > 1".into(),
        ));
    }
    let step = (e_hi - e_lo) / (n_grid - 1) as f64;
    let grid: Vec<f64> = (0..n_grid)
        .map(|i| {
            if i + 1 == n_grid {
                e_hi
            } else {
                e_lo + step * i as f64
            }
        })
        .collect();
    let rows = p.exec.map(n_grid, |i| p.tensions(grid[i]));
    let mut out = ScanResult {
        energies: Vec::with_capacity(n_grid),
        tensions: Vec::with_capacity(n_grid),
        higher_tensions: Vec::with_capacity(n_grid),
        failures: Vec::new(),
    };
    for (e, row) in grid.into_iter().zip(rows) {
        match row {
            Ok(mut t) => {
                let higher = t.split_off(1);
                out.energies.push(e);
                out.tensions.push(t[0]);
                out.higher_tensions.push(higher);
            }
            Err(err) => out.failures.push(ScanFailure {
                energy: e,
                message: err.to_string(),
            }),
        }
    }
    Ok(out)
}

/// Three consecutive scan energies with the middle one lowest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub mid: f64,
    pub hi: f64,
    pub t_mid: f64,
}

/// Strict interior local minima of the scanned tensions.
pub fn find_minima(s: &ScanResult) -> Vec<Bracket> {
    let t = &s.tensions;
    (1..t.len().saturating_sub(1))
        .filter(|&i| t[i] < t[i - 1] && t[i] < t[i + 1])
        .map(|i| Bracket {
            lo: s.energies[i - 1],
            mid: s.energies[i],
            hi: s.energies[i + 1],
            t_mid: t[i],
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Golden-section search on `[a, c]` from an interior point `b` with
/// `f(b) = fb` no larger than the ends. Stops once the bracket is narrower
/// than `tol(best)` or after `max_evals` evaluations.
pub fn golden_section<F>(
    mut f: F,
    (mut a, mut b, mut c): (f64, f64, f64),
    mut fb: f64,
    tol: impl Fn(f64) -> f64,
    max_evals: usize,
) -> Result<GoldenResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut evaluations = 0;
    while c - a > tol(b) {
        if evaluations >= max_evals {
            return Ok(GoldenResult {
                x: b,
                fx: fb,
                evaluations,
                converged: false,
            });
        }
        let x = if c - b > b - a {
            b + GOLDEN * (c - b)
        } else {
            b - GOLDEN * (b - a)
        };
        if x <= a || x >= c || x == b {
            break;
        }
        let fx = f(x)?;
        evaluations += 1;
        if fx < fb {
            if x > b {
                a = b;
            } else {
                c = b;
            }
            b = x;
            fb = fx;
        } else if x > b {
            c = x;
        } else {
            a = x;
        }
    }
    Ok(GoldenResult {
        x: b,
        fx: fb,
        evaluations,
        converged: true,
    })
}

/// Bracket width at which refinement stops.
pub fn refine_tolerance(e: f64) -> f64 {
    (1e-12 * e.abs()).max(1e-10)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refined {
    pub e_star: f64,
    pub t_star: f64,
    pub result: TensionResult,
    pub evaluations: usize,
    /// False when the evaluation budget ran out before the tolerance was met.
    pub converged: bool,
}

/// Golden-section refinement of a scan bracket.
pub fn refine_minimum(p: &Problem, bracket: &Bracket) -> Result<Refined> {
    if !(bracket.lo < bracket.mid && bracket.mid < bracket.hi) {
        return Err(MpsError::InvalidInput(format!(
            "malformed bracket {bracket:?}"
        )));
    }
    let g = golden_section(
        |e| p.tension(e),
        (bracket.lo, bracket.mid, bracket.hi),
        bracket.t_mid,
        refine_tolerance,
        MAX_REFINE_EVALS,
    )?;
    let result = p.solve_at(g.x)?;
    Ok(Refined {
        e_star: g.x,
        t_star: result.t_min,
        result,
        evaluations: g.evaluations + 1,
        converged: g.converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub left: f64,
    pub right: f64,
    pub delta: f64,
}

/// Finite-difference step used for the local slope.
pub fn slope_step(e_star: f64) -> f64 {
    (1e-6 * e_star).max(10.0 * refine_tolerance(e_star))
}

/// Mean of the one-sided slope magnitudes of the tension curve at `e_star`.
pub fn estimate_slope(p: &Problem, e_star: f64, t_star: f64) -> Result<SlopeEstimate> {
    let delta = slope_step(e_star);
    let right = (p.tension(e_star + delta)? - t_star) / delta;
    let left = (p.tension(e_star - delta)? - t_star) / delta;
    let slope = 0.5 * (right.abs() + left.abs());
    if !(slope > 0.0 && slope.is_finite()) {
        return Err(MpsError::SlopeEstimation(format!(
            "slope {slope} at E = {e_star} (left {left}, right {right})"
        )));
    }
    Ok(SlopeEstimate {
        slope,
        left,
        right,
        delta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigCertificate {
    pub bc: BoundaryCondition,
    pub e_star: f64,
    pub t_star: f64,
    pub slope: f64,
    pub c_est: f64,
    pub interval: [f64; 2],
    pub moler_payne_interval: Option<[f64; 2]>,
    pub angle_bound: Option<f64>,
}

impl EigCertificate {
    pub fn width(&self) -> f64 {
        self.interval[1] - self.interval[0]
    }

    /// Whether `e` lies in the interval widened about `e_star` by `factor`.
    pub fn contains_inflated(&self, e: f64, factor: f64) -> bool {
        (e - self.e_star).abs() <= factor * 0.5 * self.width()
    }
}

/// Inclusion interval from the tension and the measured slope.
pub fn certify(
    bc: BoundaryCondition,
    e_star: f64,
    t_star: f64,
    slope: f64,
    neighbor_gap: Option<f64>,
) -> Result<EigCertificate> {
    if !(slope > 0.0 && slope.is_finite()) {
        return Err(MpsError::SlopeEstimation(format!(
            "slope {slope} must be positive"
        )));
    }
    let c_est = 1.0 / slope;
    let around = |kappa: f64| {
        let half = c_est * kappa * t_star;
        [e_star - half, e_star + half]
    };
    let dirichlet = bc == BoundaryCondition::Dirichlet;
    let kappa = if dirichlet { e_star.sqrt() } else { 1.0 };
    Ok(EigCertificate {
        bc,
        e_star,
        t_star,
        slope,
        c_est,
        interval: around(kappa),
        moler_payne_interval: dirichlet.then(|| around(e_star)),
        angle_bound: neighbor_gap
            .filter(|g| *g > 0.0)
            .map(|gap| c_est * kappa * t_star / gap),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub bracket: Bracket,
    pub certificate: Option<EigCertificate>,
    /// Count of generalized tensions (the minimum included) at the refined
    /// energy lying below the slope-step threshold.
    pub multiplicity: usize,
    pub evaluations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub coeffs: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub scan: ScanResult,
    pub records: Vec<SolveRecord>,
}

struct Located {
    refined: Refined,
    slope: f64,
}

/// Scan, refine every minimum, measure slopes and certify.
pub fn solve(p: &Problem, e_lo: f64, e_hi: f64, n_grid: usize) -> Result<SolveReport> {
    let s = scan(p, e_lo, e_hi, n_grid)?;
    let brackets = find_minima(&s);
    let located: Vec<Result<Located>> = p.exec.map(brackets.len(), |i| {
        let refined = refine_minimum(p, &brackets[i])?;
        let slope = estimate_slope(p, refined.e_star, refined.t_star)?.slope;
        Ok(Located { refined, slope })
    });
    let stars: Vec<Option<f64>> = located
        .iter()
        .map(|l| l.as_ref().ok().map(|l| l.refined.e_star))
        .collect();
    let mut records = Vec::with_capacity(brackets.len());
    for (i, (bracket, loc)) in brackets.into_iter().zip(located).enumerate() {
        let record = match loc.and_then(|l| {
            let gap = stars
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .filter_map(|(_, e)| e.map(|e| (e - l.refined.e_star).abs()))
                .filter(|g| *g > slope_step(l.refined.e_star))
                .reduce(f64::min);
            let cert = certify(p.spec.bc, l.refined.e_star, l.refined.t_star, l.slope, gap)?;
            Ok((l, cert))
        }) {
            Ok((l, cert)) => {
                let threshold =
                    (l.slope * slope_step(l.refined.e_star)).max(10.0 * l.refined.t_star);
                let multiplicity = 1 + l
                    .refined
                    .result
                    .higher_tensions
                    .iter()
                    .filter(|&&t| t <= threshold)
                    .count();
                SolveRecord {
                    bracket,
                    certificate: Some(cert),
                    multiplicity,
                    evaluations: l.refined.evaluations + 2,
                    converged: l.refined.converged,
                    coeffs: l.refined.result.coeffs,
                    error: None,
                }
            }
            Err(err) => SolveRecord {
                bracket,
                certificate: None,
                multiplicity: 0,
                evaluations: 0,
                converged: false,
                coeffs: Vec::new(),
                error: Some(err.to_string()),
            },
        };
        records.push(record);
    }
    Ok(SolveReport { scan: s, records })
}

/// `|v|²` on a square lattice over the bounding box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    pub grid_n: usize,
    /// `[xmin, xmax, ymin, ymax]`.
    pub bbox: [f64; 4],
    /// Row-major, row `j` at `y_j`, column `i` at `x_i` (cell centres).
    pub density: Vec<f64>,
    pub inside: Vec<bool>,
}

impl ModeGrid {
    pub fn cell(&self, i: usize, j: usize) -> [f64; 2] {
        let dx = (self.bbox[1] - self.bbox[0]) / self.grid_n as f64;
        let dy = (self.bbox[3] - self.bbox[2]) / self.grid_n as f64;
        [
            self.bbox[0] + (i as f64 + 0.5) * dx,
            self.bbox[2] + (j as f64 + 0.5) * dy,
        ]
    }

    pub fn cell_area(&self) -> f64 {
        (self.bbox[1] - self.bbox[0]) * (self.bbox[3] - self.bbox[2])
            / (self.grid_n * self.grid_n) as f64
    }
}

/// Renders the mode `Σ c_p ξ_p` at energy `e_star`, normalized to unit
/// interior `L²` norm; cells outside the domain are masked with zero.
pub fn render_mode(p: &Problem, e_star: f64, coeffs: &[f64], grid_n: usize) -> Result<ModeGrid> {
    if coeffs.len() != p.basis.len() {
        return Err(MpsError::InvalidInput(format!(
            "{} coefficients for a basis of {}",
            coeffs.len(),
            p.basis.len()
        )));
    }
    if grid_n == 0 {
        return Err(MpsError::InvalidInput("grid_n must be positive".into()));
    }
    let c = nalgebra::DVector::from_column_slice(coeffs);
    let interior = p.basis.values(e_star, &p.iq.points, p.exec)? * &c;
    let norm2: f64 = interior
        .iter()
        .zip(&p.iq.weights)
        .map(|(v, w)| w * v * v)
        .sum();
    if !(norm2 > 0.0) {
        return Err(MpsError::DegenerateBasis);
    }
    let bbox = p.spec.domain.bounding_box();
    let mut grid = ModeGrid {
        grid_n,
        bbox,
        density: vec![0.0; grid_n * grid_n],
        inside: vec![false; grid_n * grid_n],
    };
    let cells: Vec<[f64; 2]> = (0..grid_n * grid_n)
        .map(|k| grid.cell(k % grid_n, k / grid_n))
        .collect();
    let inside: Vec<usize> = (0..cells.len())
        .filter(|&k| p.spec.domain.contains(cells[k]))
        .collect();
    let pts: Vec<[f64; 2]> = inside.iter().map(|&k| cells[k]).collect();
    let vals = p.basis.values(e_star, &pts, p.exec)? * &c;
    for (&k, v) in inside.iter().zip(vals.iter()) {
        grid.inside[k] = true;
        grid.density[k] = v * v / norm2;
    }
    Ok(grid)
}
