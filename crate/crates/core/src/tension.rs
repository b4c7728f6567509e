//! Boundary and interior quadratic forms of a basis at one energy, and the
//! minimum tension `min ‖boundary data‖ / ‖u‖_Ω` over the basis span.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::BasisSet;
use crate::boundary_filter::{f_mu, FilterPlan};
use crate::error::{MpsError, Result};
use crate::exec::Exec;
use crate::geometry::{BoundaryDiscretization, InteriorQuadrature};

pub const DEFAULT_REG_EPS: f64 = 1e-14;
pub const DEFAULT_HIGHER: usize = 5;

/// Which boundary data the tension measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Boundary values.
    Dirichlet,
    /// Normal derivatives passed through `F_√E(Δ_∂)`.
    NeumannFiltered,
    /// Raw normal derivatives.
    NeumannUnfiltered,
}

impl BoundaryCondition {
    pub fn is_neumann(self) -> bool {
        !matches!(self, BoundaryCondition::Dirichlet)
    }
}

/// Boundary form `G` and interior form `M`. When assembled from samples,
/// `boundary` holds the weighted boundary matrix `X` with `G = XᵀX`, which
/// lets the tension be computed without squaring.
#[derive(Debug, Clone, PartialEq)]
pub struct GramPair {
    pub g: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub boundary: Option<DMatrix<f64>>,
}

impl GramPair {
    pub fn new(g: DMatrix<f64>, m: DMatrix<f64>) -> Result<Self> {
        if !g.is_square() || g.shape() != m.shape() {
            return Err(MpsError::InvalidInput(format!(
                "Gram shapes {:?} and {:?} do not match",
                g.shape(),
                m.shape()
            )));
        }
        Ok(GramPair {
            g,
            m,
            boundary: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensionResult {
    pub t_min: f64,
    /// Minimizing coefficients, normalized so `cᵀMc = 1`.
    pub coeffs: Vec<f64>,
    pub higher_tensions: Vec<f64>,
    pub numerical_rank: usize,
}

/// `XᵀWX` for diagonal `W`.
fn weighted_gram(x: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut scaled = x.clone();
    for (mut row, &wi) in scaled.row_iter_mut().zip(w) {
        row *= wi.sqrt();
    }
    scaled.transpose() * &scaled
}

fn interior_gram(
    basis: &BasisSet,
    e: f64,
    iq: &InteriorQuadrature,
    exec: Exec,
) -> Result<DMatrix<f64>> {
    let a = basis.values(e, &iq.points, exec)?;
    Ok(weighted_gram(&a, &iq.weights))
}

fn from_boundary(mut x: DMatrix<f64>, bd: &BoundaryDiscretization, m: DMatrix<f64>) -> GramPair {
    for (mut row, &wi) in x.row_iter_mut().zip(&bd.weights) {
        row *= wi.sqrt();
    }
    GramPair {
        g: x.transpose() * &x,
        m,
        boundary: Some(x),
    }
}

/// Gram pair for the boundary condition `bc`.
pub fn assemble(
    bc: BoundaryCondition,
    basis: &BasisSet,
    e: f64,
    bd: &BoundaryDiscretization,
    iq: &InteriorQuadrature,
    exec: Exec,
) -> Result<GramPair> {
    match bc {
        BoundaryCondition::Dirichlet => {
            let b = basis.values(e, &bd.nodes, exec)?;
            Ok(from_boundary(b, bd, interior_gram(basis, e, iq, exec)?))
        }
        BoundaryCondition::NeumannFiltered => {
            if !(e > 1.0) {
                return Err(MpsError::InvalidInput(format!(
                    "filtered Neumann tension needs E > 1, got {e}"
                )));
            }
            let mu = e.sqrt();
            assemble_neumann_multiplier(basis, e, bd, iq, Some(&|s| f_mu(s, mu)), exec)
        }
        BoundaryCondition::NeumannUnfiltered => {
            assemble_neumann_multiplier(basis, e, bd, iq, None, exec)
        }
    }
}

/// Neumann Gram pair with the normal-derivative columns passed through an
/// arbitrary boundary multiplier (`None` for the identity).
pub fn assemble_neumann_multiplier(
    basis: &BasisSet,
    e: f64,
    bd: &BoundaryDiscretization,
    iq: &InteriorQuadrature,
    multiplier: Option<&dyn Fn(f64) -> f64>,
    exec: Exec,
) -> Result<GramPair> {
    let mut d = basis.directional_derivs(e, &bd.nodes, &bd.normals, exec)?;
    if let Some(m) = multiplier {
        FilterPlan::new(bd.len(), bd.perimeter, m)?.apply_columns(&mut d)?;
    }
    Ok(from_boundary(d, bd, interior_gram(basis, e, iq, exec)?))
}

/// `G = Bᵀ W_∂ B`, `M = Aᵀ W_Ω A` from boundary and interior values.
pub fn assemble_dirichlet(
    basis: &BasisSet,
    e: f64,
    bd: &BoundaryDiscretization,
    iq: &InteriorQuadrature,
) -> Result<GramPair> {
    assemble(
        BoundaryCondition::Dirichlet,
        basis,
        e,
        bd,
        iq,
        Exec::default(),
    )
}

/// Neumann Gram pair, filtered by `F_√E` when `filtered` is set.
pub fn assemble_neumann(
    basis: &BasisSet,
    e: f64,
    bd: &BoundaryDiscretization,
    iq: &InteriorQuadrature,
    filtered: bool,
) -> Result<GramPair> {
    let bc = if filtered {
        BoundaryCondition::NeumannFiltered
    } else {
        BoundaryCondition::NeumannUnfiltered
    };
    assemble(bc, basis, e, bd, iq, Exec::default())
}

/// Whitening map `S = Q_r Λ_r^{-1/2}` from the eigendecomposition of
/// `M + G`, keeping `Λ_i > reg_eps · max Λ`.
///
/// Truncating on `M + G` rather than `M` alone only drops coefficient
/// directions that are negligible both inside and on the boundary, so the
/// small boundary corrections carried by ill-conditioned charge combinations
/// survive. After whitening `SᵀMS + SᵀGS = I`, and a generalized value `g` of
/// `SᵀGS` maps to the tension `√(g / (1 - g))`.
fn whitening(g: &GramPair, reg_eps: f64) -> Result<DMatrix<f64>> {
    if !(1e-16..=1e-6).contains(&reg_eps) {
        return Err(MpsError::InvalidInput(format!(
            "regularization {reg_eps:e} outside [1e-16, 1e-6]"
        )));
    }
    let total = &g.m + &g.g;
    let sym = 0.5 * (&total + total.transpose());
    let eig = SymmetricEigen::new(sym);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let m_top = g.m.diagonal().iter().cloned().fold(0.0, f64::max);
    if !(m_top > 0.0) {
        return Err(MpsError::DegenerateBasis);
    }
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| top > 0.0 && eig.eigenvalues[i] > reg_eps * top)
        .collect();
    if keep.is_empty() {
        return Err(MpsError::DegenerateBasis);
    }
    let mut s = DMatrix::zeros(g.dim(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        let scale = eig.eigenvalues[i].sqrt().recip();
        s.set_column(j, &(eig.eigenvectors.column(i) * scale));
    }
    Ok(s)
}

/// Tension from the boundary share `b = ‖Xc‖` of a whitened unit vector.
fn share_to_tension(b: f64) -> f64 {
    let b2 = b * b;
    if b2 >= 1.0 {
        f64::INFINITY
    } else {
        (b2 / (1.0 - b2)).sqrt()
    }
}

/// Ascending generalized tensions and, when `vectors`, the coefficient
/// vector of the lowest one.
fn reduced_spectrum(
    g: &GramPair,
    s: &DMatrix<f64>,
    vectors: bool,
) -> (Vec<f64>, Option<DVector<f64>>) {
    let r = s.ncols();
    if let Some(x) = g.boundary.as_ref().filter(|x| x.nrows() >= r) {
        let c = x * s;
        if !vectors {
            let mut sv: Vec<f64> = c
                .singular_values()
                .iter()
                .map(|&b| share_to_tension(b))
                .collect();
            sv.sort_by(f64::total_cmp);
            return (sv, None);
        }
        let svd = c.svd(false, true);
        let vt = svd.v_t.expect("right singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let t = order
            .iter()
            .map(|&i| share_to_tension(svd.singular_values[i]))
            .collect();
        let v = DVector::from_fn(r, |row, _| vt[(order[0], row)]);
        return (t, Some(s * v));
    }
    // Only the squared form is available (or too few boundary rows).
    let red = s.transpose() * (&g.g * s);
    let red = 0.5 * (&red + red.transpose());
    let eig = SymmetricEigen::new(red);
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let t = order
        .iter()
        .map(|&i| share_to_tension(eig.eigenvalues[i].max(0.0).sqrt()))
        .collect();
    let v = vectors.then(|| s * eig.eigenvectors.column(order[0]));
    (t, v)
}

/// Minimum tension with `n_higher` further generalized values.
pub fn min_tension_with(g: &GramPair, reg_eps: f64, n_higher: usize) -> Result<TensionResult> {
    let s = whitening(g, reg_eps)?;
    let (t, v) = reduced_spectrum(g, &s, true);
    let mut c = v.expect("vectors requested");
    let norm2 = c.dot(&(&g.m * &c));
    if norm2 > 0.0 {
        c /= norm2.sqrt();
    }
    Ok(TensionResult {
        t_min: t[0],
        coeffs: c.as_slice().to_vec(),
        higher_tensions: t.iter().skip(1).take(n_higher).cloned().collect(),
        numerical_rank: s.ncols(),
    })
}

/// Minimum tension and the next five generalized values.
pub fn min_tension(g: &GramPair, reg_eps: f64) -> Result<TensionResult> {
    min_tension_with(g, reg_eps, DEFAULT_HIGHER)
}

/// The lowest `count` tensions only; skips the singular vectors.
pub fn tension_values(g: &GramPair, reg_eps: f64, count: usize) -> Result<Vec<f64>> {
    let s = whitening(g, reg_eps)?;
    let (mut t, _) = reduced_spectrum(g, &s, false);
    t.truncate(count.max(1));
    Ok(t)
}
