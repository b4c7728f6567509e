//! Particular solutions of `(Δ - E)u = 0`: fundamental-solution charges
//! outside the domain (MFS) and Fourier–Bessel harmonics about the origin.
//!
//! Fourier–Bessel columns are ordered `J_0`, then `J_n cos nθ`, `J_n sin nθ`
//! for `n = 1..=max_order`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};
use crate::exec::Exec;
use crate::geometry::{arclength_thetas, BoundaryDiscretization, DomainSpec, Point};
use crate::specfun::{self, j_sequence, y01};

/// Smallest allowed charge offset from the boundary, before relaxation for
/// offsets below it.
pub const D_MIN: f64 = 0.05;
const DISTANCE_SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisSet {
    Mfs { charges: Vec<Point> },
    FourierBessel { max_order: usize },
}

impl BasisSet {
    pub fn fourier_bessel(max_order: usize) -> Result<Self> {
        if max_order + 1 > specfun::MAX_ORDER {
            return Err(MpsError::InvalidBasis(format!(
                "Fourier-Bessel order {max_order} exceeds {}",
                specfun::MAX_ORDER - 1
            )));
        }
        Ok(BasisSet::FourierBessel { max_order })
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        match self {
            BasisSet::Mfs { charges } => charges.len(),
            BasisSet::FourierBessel { max_order } => 2 * max_order + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Basis values at `points`; rows are points, columns basis functions.
    pub fn values(&self, e: f64, points: &[Point], exec: Exec) -> Result<DMatrix<f64>> {
        self.assemble(e, points, None, exec)
    }

    /// Directional derivatives `d_i·∇ξ_p(x_i)`.
    pub fn directional_derivs(
        &self,
        e: f64,
        points: &[Point],
        directions: &[Point],
        exec: Exec,
    ) -> Result<DMatrix<f64>> {
        if points.len() != directions.len() {
            return Err(MpsError::InvalidInput(format!(
                "{} points but {} directions",
                points.len(),
                directions.len()
            )));
        }
        self.assemble(e, points, Some(directions), exec)
    }

    fn assemble(
        &self,
        e: f64,
        points: &[Point],
        directions: Option<&[Point]>,
        exec: Exec,
    ) -> Result<DMatrix<f64>> {
        if !(e > 0.0 && e.is_finite()) {
            return Err(MpsError::InvalidInput(format!(
                "energy must be positive, got {e}"
            )));
        }
        let k = e.sqrt();
        let p = self.len();
        if p == 0 {
            return Err(MpsError::InvalidBasis("empty basis".into()));
        }
        if let BasisSet::Mfs { charges } = self {
            check_clear_of_charges(points, charges)?;
        }
        if let BasisSet::FourierBessel { .. } = self {
            let rmax = points.iter().map(|q| q[0].hypot(q[1])).fold(0.0, f64::max);
            if k * rmax > specfun::MAX_ARGUMENT {
                return Err(MpsError::SpecialFunctionDomain(format!(
                    "Bessel argument {} out of range",
                    k * rmax
                )));
            }
        }
        // Column-major P x n: each chunk of length P is one row of the result.
        let mut transposed = vec![0.0; p * points.len()];
        exec.for_each_chunk(&mut transposed, p, |i, row| match directions {
            None => self.row_values(k, points[i], row),
            Some(d) => self.row_derivs(k, points[i], d[i], row),
        });
        Ok(DMatrix::from_vec(p, points.len(), transposed).transpose())
    }

    fn row_values(&self, k: f64, x: Point, row: &mut [f64]) {
        match self {
            BasisSet::Mfs { charges } => {
                for (out, y) in row.iter_mut().zip(charges) {
                    let d = (x[0] - y[0]).hypot(x[1] - y[1]);
                    *out = 0.25 * y01(k * d).0;
                }
            }
            BasisSet::FourierBessel { max_order } => {
                let r = x[0].hypot(x[1]);
                let theta = x[1].atan2(x[0]);
                let js = j_sequence(*max_order, k * r);
                row[0] = js[0];
                for n in 1..=*max_order {
                    let (s, c) = (n as f64 * theta).sin_cos();
                    row[2 * n - 1] = js[n] * c;
                    row[2 * n] = js[n] * s;
                }
            }
        }
    }

    fn row_derivs(&self, k: f64, x: Point, dir: Point, row: &mut [f64]) {
        match self {
            BasisSet::Mfs { charges } => {
                for (out, y) in row.iter_mut().zip(charges) {
                    let (dx, dy) = (x[0] - y[0], x[1] - y[1]);
                    let d = dx.hypot(dy);
                    let y1 = y01(k * d).1;
                    *out = -0.25 * k * y1 * (dir[0] * dx + dir[1] * dy) / d;
                }
            }
            BasisSet::FourierBessel { max_order } => {
                let r = x[0].hypot(x[1]);
                let theta = x[1].atan2(x[0]);
                let (st, ct) = theta.sin_cos();
                // Radial and angular components of the direction.
                let dr = dir[0] * ct + dir[1] * st;
                let dt = -dir[0] * st + dir[1] * ct;
                let js = j_sequence(*max_order + 1, k * r);
                let below = |n: usize| if n == 0 { -js[1] } else { js[n - 1] };
                row[0] = dr * k * 0.5 * (below(0) - js[1]);
                for n in 1..=*max_order {
                    let (s, c) = (n as f64 * theta).sin_cos();
                    let radial = k * 0.5 * (below(n) - js[n + 1]);
                    // n J_n(kr)/r without dividing by r.
                    let angular = k * 0.5 * (below(n) + js[n + 1]);
                    row[2 * n - 1] = dr * radial * c - dt * angular * s;
                    row[2 * n] = dr * radial * s + dt * angular * c;
                }
            }
        }
    }
}

fn check_clear_of_charges(points: &[Point], charges: &[Point]) -> Result<()> {
    for x in points {
        for y in charges {
            let d = (x[0] - y[0]).hypot(x[1] - y[1]);
            if d <= 1e-12 * (1.0 + y[0].hypot(y[1])) {
                return Err(MpsError::Singularity(format!(
                    "point ({}, {}) coincides with a charge",
                    x[0], x[1]
                )));
            }
        }
    }
    Ok(())
}

/// Places `p` charges at `offset` along the outward normal from boundary
/// points equispaced in arclength.
pub fn make_mfs_basis(spec: &DomainSpec, p: usize, offset: f64) -> Result<BasisSet> {
    if p == 0 {
        return Err(MpsError::InvalidBasis("need at least one charge".into()));
    }
    if !(0.02..=1.0).contains(&offset) {
        return Err(MpsError::InvalidBasis(format!(
            "charge offset {offset} outside [0.02, 1]"
        )));
    }
    let (thetas, _) = arclength_thetas(spec, p)?;
    let charges: Vec<Point> = thetas
        .iter()
        .map(|&t| {
            let (x, n) = (spec.point(t), spec.normal(t));
            [x[0] + offset * n[0], x[1] + offset * n[1]]
        })
        .collect();
    let d_min = D_MIN.min(0.9 * offset);
    let boundary: Vec<Point> = (0..DISTANCE_SAMPLES)
        .map(|i| spec.point(std::f64::consts::TAU * i as f64 / DISTANCE_SAMPLES as f64))
        .collect();
    if let Some(i) = charges.iter().position(|y| spec.contains(*y)) {
        return Err(MpsError::InvalidBasis(format!(
            "charge {i} lies inside the domain; use a smaller offset"
        )));
    }
    for (i, y) in charges.iter().enumerate() {
        let dist = boundary
            .iter()
            .map(|b| (b[0] - y[0]).hypot(b[1] - y[1]))
            .fold(f64::INFINITY, f64::min);
        if dist < d_min {
            return Err(MpsError::InvalidBasis(format!(
                "charge {i} is {dist:.3e} from the boundary (minimum {d_min}); use a smaller offset"
            )));
        }
    }
    Ok(BasisSet::Mfs { charges })
}

/// Basis values at `points` (rows) for every basis function (columns).
pub fn eval_values(basis: &BasisSet, e: f64, points: &[Point]) -> Result<DMatrix<f64>> {
    basis.values(e, points, Exec::default())
}

/// Outward normal derivatives of every basis function at the boundary nodes.
pub fn eval_normal_derivs(
    basis: &BasisSet,
    e: f64,
    bd: &BoundaryDiscretization,
) -> Result<DMatrix<f64>> {
    basis.directional_derivs(e, &bd.nodes, &bd.normals, Exec::default())
}
