//! Closed-form spectra and boundary traces of the unit disc.
//!
//! Modes are real: `c J_n(λr) cos nθ` and, for `n >= 1`, the matching
//! `sin nθ` mode, each with unit `L²` norm. Traces of different angular
//! orders are orthogonal on the circle, which makes every boundary operator
//! below block diagonal by order.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::boundary_filter::{apply_multiplier, f_mu, half_wave_weight, BoundaryFunction};
use crate::error::{MpsError, Result};
use crate::specfun::{bessel_j, bessel_j_zeros_below, bessel_jprime_zeros_below};

pub const MAX_FREQUENCY: f64 = 200.0;
/// Node count of the sampled (DFT) route.
pub const CHECK_NODES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscBc {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscMode {
    pub bc: DiscBc,
    pub n: usize,
    /// Radial index; 0 only for the constant Neumann mode.
    pub l: usize,
    pub frequency: f64,
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub norm_const: f64,
}

impl DiscMode {
    fn angular_mass(n: usize) -> f64 {
        if n == 0 {
            TAU
        } else {
            PI
        }
    }

    fn new(bc: DiscBc, n: usize, l: usize, frequency: f64) -> Result<Self> {
        let radial = if frequency == 0.0 {
            0.5
        } else {
            match bc {
                DiscBc::Dirichlet => 0.5 * bessel_j(n + 1, frequency)?.value.powi(2),
                DiscBc::Neumann => {
                    let ratio = n as f64 / frequency;
                    0.5 * (1.0 - ratio * ratio) * bessel_j(n, frequency)?.value.powi(2)
                }
            }
        };
        Ok(DiscMode {
            bc,
            n,
            l,
            frequency,
            eigenvalue: frequency * frequency,
            multiplicity: if n == 0 { 1 } else { 2 },
            norm_const: (Self::angular_mass(n) * radial).sqrt().recip(),
        })
    }

    /// Amplitude of the boundary trace (normal derivative for Dirichlet,
    /// value for Neumann) in front of `cos nθ`.
    pub fn trace_amplitude(&self) -> Result<f64> {
        if self.frequency == 0.0 {
            return Ok(self.norm_const);
        }
        let j = bessel_j(self.n, self.frequency)?;
        Ok(match self.bc {
            DiscBc::Dirichlet => self.norm_const * self.frequency * j.derivative,
            DiscBc::Neumann => self.norm_const * j.value,
        })
    }

    /// Boundary trace of the cosine mode sampled at `nodes` equispaced angles.
    pub fn sampled_trace(&self, nodes: usize) -> Result<BoundaryFunction> {
        let a = self.trace_amplitude()?;
        let samples = (0..nodes)
            .map(|i| a * (self.n as f64 * TAU * i as f64 / nodes as f64).cos())
            .collect();
        BoundaryFunction::new(samples, TAU)
    }
}

/// All modes with frequency at most `freq_max`, ascending (ties by order).
pub fn disc_spectrum(bc: DiscBc, freq_max: f64) -> Result<Vec<DiscMode>> {
    if !(freq_max > 0.0 && freq_max <= MAX_FREQUENCY) {
        return Err(MpsError::InvalidInput(format!(
            "freq_max {freq_max} outside (0, {MAX_FREQUENCY}]"
        )));
    }
    let mut modes = Vec::new();
    if bc == DiscBc::Neumann {
        modes.push(DiscMode::new(bc, 0, 0, 0.0)?);
    }
    // Both j_{n,1} and μ_{n,1} exceed n.
    for n in 0..=freq_max.floor() as usize {
        let zeros = match bc {
            DiscBc::Dirichlet => bessel_j_zeros_below(n, freq_max)?,
            DiscBc::Neumann => bessel_jprime_zeros_below(n, freq_max)?,
        };
        for (i, z) in zeros.into_iter().enumerate() {
            modes.push(DiscMode::new(bc, n, i + 1, z)?);
        }
    }
    modes.sort_by(|a, b| a.frequency.total_cmp(&b.frequency).then(a.n.cmp(&b.n)));
    Ok(modes)
}

/// `‖ψ‖` (Dirichlet) or `‖w‖` (Neumann) on the unit circle, from the closed
/// form of the trace.
pub fn boundary_trace_norm(mode: &DiscMode) -> Result<f64> {
    Ok(mode.trace_amplitude()?.abs() * DiscMode::angular_mass(mode.n).sqrt())
}

/// The same norm by trapezoid quadrature of the sampled trace.
pub fn boundary_trace_norm_sampled(mode: &DiscMode, nodes: usize) -> Result<f64> {
    Ok(mode.sampled_trace(nodes)?.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sqrt2Check {
    pub closed_form: f64,
    pub sampled: f64,
}

/// `‖(1 - Δ_∂/μ²)_+^{1/2} w‖` for a nonconstant Neumann mode, by the closed
/// form and by filtering sampled traces through the DFT.
pub fn verify_sqrt2(mode: &DiscMode) -> Result<Sqrt2Check> {
    if mode.bc != DiscBc::Neumann || mode.frequency == 0.0 {
        return Err(MpsError::InvalidInput(
            "needs a nonconstant Neumann mode".into(),
        ));
    }
    let h = 1.0 / mode.frequency;
    let weight = half_wave_weight((mode.n * mode.n) as f64, h);
    let closed_form = weight * boundary_trace_norm(mode)?;
    let filtered = apply_multiplier(&mode.sampled_trace(CHECK_NODES)?, |s| {
        half_wave_weight(s, h)
    })?;
    Ok(Sqrt2Check {
        closed_form,
        sampled: filtered.norm(),
    })
}

fn sampled_real_traces(mode: &DiscMode, nodes: usize) -> Result<Vec<Vec<f64>>> {
    let a = mode.trace_amplitude()?;
    let n = mode.n as f64;
    let angle = |i: usize| n * TAU * i as f64 / nodes as f64;
    let mut out = vec![(0..nodes).map(|i| a * angle(i).cos()).collect()];
    if mode.n > 0 {
        out.push((0..nodes).map(|i| a * angle(i).sin()).collect());
    }
    Ok(out)
}

/// Norm of `Σ φ_j⟨φ_j, ·⟩` over modes with frequency in `[freq_lo, freq_lo + 1]`,
/// as the top eigenvalue of the Gram matrix of the sampled traces. For
/// Neumann with `filter`, traces pass through `(1 - Δ_∂/freq_lo²)_+^{1/2}`.
pub fn cluster_operator_norm(bc: DiscBc, freq_lo: f64, filter: bool) -> Result<f64> {
    if !(freq_lo > 0.0) {
        return Err(MpsError::InvalidInput(format!(
            "freq_lo {freq_lo} must be positive"
        )));
    }
    let modes: Vec<DiscMode> = disc_spectrum(bc, freq_lo + 1.0)?
        .into_iter()
        .filter(|m| m.frequency >= freq_lo)
        .collect();
    if modes.is_empty() {
        return Ok(0.0);
    }
    let max_n = modes.iter().map(|m| m.n).max().unwrap_or(0);
    let nodes = (4 * max_n + 64).next_multiple_of(2).max(CHECK_NODES);
    let h = 1.0 / freq_lo;
    let mut traces = Vec::new();
    for m in &modes {
        for t in sampled_real_traces(m, nodes)? {
            let mut f = BoundaryFunction::new(t, TAU)?;
            if filter && bc == DiscBc::Neumann {
                f = apply_multiplier(&f, |s| half_wave_weight(s, h))?;
            }
            traces.push(f);
        }
    }
    let gram = DMatrix::from_fn(traces.len(), traces.len(), |i, j| {
        traces[i].inner(&traces[j])
    });
    Ok(SymmetricEigen::new(gram).eigenvalues.max())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AOperatorNorm {
    /// Norm of the sum truncated at `freq_cut`.
    pub norm: f64,
    /// Bound on what the omitted modes can add.
    pub tail_bound: f64,
    pub modes_used: usize,
}

/// Norm of `A(E) = Σ φ_j⟨φ_j, ·⟩ / (E - E_j)²` over modes with frequency up to
/// `freq_cut`; `φ_j = ψ_j` (Dirichlet) or `F_√E(Δ_∂)^{-1} w_j` (Neumann with
/// `filter`) or `w_j`.
///
/// The tail bound uses `E_j - E >= (3/4)E_j` once `λ_j >= 2√E`, the trace
/// growth `‖ψ_j‖² = 2E_j` resp. `‖w_j‖² <= E_j`, and zero spacing above 3
/// within one angular order, so each order contributes at most
/// `c (1/cut² + 1/(3·cut))` with `c = 32/9` resp. `16/9`.
pub fn a_operator_norm(bc: DiscBc, e: f64, freq_cut: f64, filter: bool) -> Result<AOperatorNorm> {
    if !(e > 0.0) {
        return Err(MpsError::InvalidInput(format!(
            "energy {e} must be positive"
        )));
    }
    if freq_cut < 2.0 * e.sqrt() {
        return Err(MpsError::InvalidInput(format!(
            "freq_cut {freq_cut} must be at least 2√E = {}",
            2.0 * e.sqrt()
        )));
    }
    if filter && bc == DiscBc::Neumann && e <= 1.0 {
        return Err(MpsError::InvalidInput("filtered traces need E > 1".into()));
    }
    let modes = disc_spectrum(bc, freq_cut)?;
    if let Some(m) = modes.iter().find(|m| (m.eigenvalue - e).abs() < 1e-8) {
        return Err(MpsError::Conditioning(format!(
            "E = {e} is within 1e-8 of the eigenvalue {} (n = {}, l = {})",
            m.eigenvalue, m.n, m.l
        )));
    }
    let mu = e.sqrt();
    let max_n = modes.iter().map(|m| m.n).max().unwrap_or(0);
    let mut blocks = vec![0.0; max_n + 1];
    for m in &modes {
        let mut phi2 = boundary_trace_norm(m)?.powi(2);
        if filter && bc == DiscBc::Neumann {
            phi2 /= f_mu((m.n * m.n) as f64, mu).powi(2);
        }
        blocks[m.n] += phi2 / (e - m.eigenvalue).powi(2);
    }
    let c = match bc {
        DiscBc::Dirichlet => 32.0 / 9.0,
        DiscBc::Neumann => 16.0 / 9.0,
    };
    Ok(AOperatorNorm {
        norm: blocks.iter().cloned().fold(0.0, f64::max),
        tail_bound: c * (1.0 / (freq_cut * freq_cut) + 1.0 / (3.0 * freq_cut)),
        modes_used: modes.len(),
    })
}

/// One row of the disc verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub measured: f64,
    pub expected: String,
    pub pass: bool,
}

fn row(
    name: impl Into<String>,
    measured: f64,
    expected: impl Into<String>,
    pass: bool,
) -> CheckRow {
    CheckRow {
        name: name.into(),
        measured,
        expected: expected.into(),
        pass,
    }
}

/// Cluster windows used by the report, trimmed to `freq_max`.
pub const CLUSTER_WINDOWS: [f64; 4] = [10.0, 20.0, 40.0, 60.0];

/// Runs the disc trace checks up to `freq_max` (at most 80).
pub fn verify_disc(freq_max: f64) -> Result<Vec<CheckRow>> {
    if !(5.0..=80.0).contains(&freq_max) {
        return Err(MpsError::InvalidInput(format!(
            "freq_max {freq_max} outside [5, 80]"
        )));
    }
    let mut rows = Vec::new();
    let dir = disc_spectrum(DiscBc::Dirichlet, freq_max)?;
    let neu = disc_spectrum(DiscBc::Neumann, freq_max)?;

    let mut worst_sqrt2: f64 = 0.0;
    let mut worst_routes: f64 = 0.0;
    let mut lowest_w = f64::INFINITY;
    for m in &neu {
        lowest_w = lowest_w.min(boundary_trace_norm(m)?);
        if m.frequency == 0.0 {
            continue;
        }
        let c = verify_sqrt2(m)?;
        worst_sqrt2 = worst_sqrt2
            .max((c.closed_form - 2f64.sqrt()).abs())
            .max((c.sampled - 2f64.sqrt()).abs());
        worst_routes = worst_routes.max((c.closed_form - c.sampled).abs());
    }
    rows.push(row(
        "sqrt2 identity, max deviation",
        worst_sqrt2,
        "<= 1e-8",
        worst_sqrt2 <= 1e-8,
    ));
    rows.push(row(
        "sqrt2 closed form vs DFT",
        worst_routes,
        "<= 1e-9",
        worst_routes <= 1e-9,
    ));
    rows.push(row(
        "Neumann trace lower bound min ||w||",
        lowest_w,
        ">= 1 (observed constant)",
        lowest_w >= 1.0,
    ));

    let mut worst_rellich: f64 = 0.0;
    let mut worst_quad: f64 = 0.0;
    for m in &dir {
        let norm = boundary_trace_norm(m)?;
        worst_rellich = worst_rellich.max((norm * norm / (2.0 * m.eigenvalue) - 1.0).abs());
        let sampled = boundary_trace_norm_sampled(m, CHECK_NODES)?;
        worst_quad = worst_quad.max((sampled - norm).abs() / norm);
    }
    rows.push(row(
        "Rellich ||psi||^2/(2E) - 1",
        worst_rellich,
        "<= 1e-9",
        worst_rellich <= 1e-9,
    ));
    rows.push(row(
        "Dirichlet trace closed form vs quadrature",
        worst_quad,
        "<= 1e-9",
        worst_quad <= 1e-9,
    ));

    let (lo_band, hi_band) = whispering_gallery_band(freq_max)?;
    rows.push(row(
        "whispering gallery min ||w||/mu^(1/3)",
        lo_band,
        ">= 0.3",
        lo_band >= 0.3,
    ));
    rows.push(row(
        "whispering gallery max ||w||/mu^(1/3)",
        hi_band,
        "<= 3",
        hi_band <= 3.0,
    ));

    let windows: Vec<f64> = CLUSTER_WINDOWS
        .iter()
        .cloned()
        .filter(|w| w + 1.0 <= freq_max)
        .collect();
    let mut ratios = Vec::new();
    for &w in &windows {
        let d = cluster_operator_norm(DiscBc::Dirichlet, w, false)? / (w * w);
        rows.push(row(
            format!("Dirichlet cluster norm / lambda^2 at {w}"),
            d,
            "<= 4",
            d <= 4.0,
        ));
        let f = cluster_operator_norm(DiscBc::Neumann, w, true)?;
        rows.push(row(
            format!("Neumann filtered cluster norm at {w}"),
            f,
            "<= 3",
            f <= 3.0,
        ));
        let u = cluster_operator_norm(DiscBc::Neumann, w, false)?;
        rows.push(row(
            format!("Neumann unfiltered cluster norm at {w}"),
            u,
            "> filtered",
            u > f,
        ));
        ratios.push(u / f);
    }
    let growing = ratios.windows(2).all(|p| p[1] > p[0]);
    let last = ratios.last().cloned().unwrap_or(f64::NAN);
    rows.push(row(
        "unfiltered/filtered ratio grows across windows",
        last,
        "increasing",
        growing,
    ));

    let lambda = freq_max.min(60.0);
    let count: usize = dir
        .iter()
        .filter(|m| m.frequency <= lambda)
        .map(|m| m.multiplicity)
        .sum();
    let weyl = count as f64 * 4.0 / (lambda * lambda);
    rows.push(row(
        format!("Weyl ratio N(lambda)*4/lambda^2 at {lambda}"),
        weyl,
        "within 0.15 of 1",
        (weyl - 1.0).abs() <= 0.15,
    ));
    Ok(rows)
}

/// Range of `‖w_{n,1}‖/μ_{n,1}^{1/3}` for `n ∈ [5, 60]` with `μ_{n,1} <= freq_max`.
pub fn whispering_gallery_band(freq_max: f64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for n in 5..=60 {
        let mu = crate::specfun::bessel_jprime_zero(n, 1)?;
        if mu > freq_max {
            break;
        }
        let mode = DiscMode::new(DiscBc::Neumann, n, 1, mu)?;
        let r = boundary_trace_norm(&mode)? / mu.cbrt();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}
