//! Time translation by a post-selected superposition of evolutions.
//!
//! The machine runs the system for `n·τ`, `n = 0..N`, in superposition with
//! machine pre-selection amplitudes `α_n` and post-selection amplitudes `β_n`.
//! When the post-selection succeeds the system has been acted on by
//!
//! ```text
//! K = Σ_n β_n* α_n U(τ)ⁿ
//! ```
//!
//! On an energy eigenstate `K` is the scalar `Σ_n γ_n e^{-iEnτ}` (with
//! `γ_n = β_n* α_n`), so choosing `γ` to match `e^{-iET′}` over a whole energy
//! band makes the machine translate every band-limited state by `T′`, even for
//! `T′` outside `[0, (N-1)τ]` or negative. The price is a small `‖Kψ‖²`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::qcore::{
    apply, check_dim, eigh, unitary_from_hamiltonian, CMatrix, CVector, HermitianOperator, Operator, State,
    UnitaryOperator,
};
use crate::rng::{substream, with_pool};
use crate::{Error, Result, C64};

/// Conditioning above which a design is flagged.
pub const ILL_CONDITIONED: f64 = 1e12;
/// Below this `‖Kψ‖` the machine never fires.
pub const NEVER_SUCCEEDS: f64 = 1e-12;

/// Energy band the machine must reproduce, sampled on `n_grid` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandSpec {
    pub e_min: f64,
    pub e_max: f64,
    pub n_grid: usize,
}

impl BandSpec {
    pub const DEFAULT_GRID: usize = 512;

    pub fn new(e_min: f64, e_max: f64, n_grid: usize) -> Result<Self> {
        if !(e_min.is_finite() && e_max.is_finite() && e_min < e_max) {
            return Err(Error::InvalidBand(format!("need e_min < e_max, got [{e_min}, {e_max}]")));
        }
        if n_grid < 128 {
            return Err(Error::InvalidBand(format!("n_grid must be >= 128, got {n_grid}")));
        }
        Ok(Self { e_min, e_max, n_grid })
    }

    pub fn width(&self) -> f64 {
        self.e_max - self.e_min
    }

    /// `n` equally spaced energies including both edges.
    pub fn grid_with(&self, n: usize) -> Vec<f64> {
        let step = self.width() / (n - 1) as f64;
        (0..n).map(|k| self.e_min + k as f64 * step).collect()
    }

    pub fn grid(&self) -> Vec<f64> {
        self.grid_with(self.n_grid)
    }

    pub fn contains(&self, e: f64) -> bool {
        e >= self.e_min - 1e-12 && e <= self.e_max + 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignWarning {
    IllConditioned,
}

/// Branch coefficients `γ` matching `e^{-iET′}` over a band.
#[derive(Debug, Clone, Serialize)]
pub struct DesignResult {
    pub n: usize,
    pub tau: f64,
    pub t_prime: f64,
    #[serde(serialize_with = "serialize_pairs")]
    pub gamma: Vec<C64>,
    /// `max_E |Σ γ_n e^{-iEnτ} − e^{-iET′}|` over the band grid.
    pub residual: f64,
    /// Ratio of extreme singular values of the band design matrix.
    pub conditioning: f64,
    pub warnings: Vec<DesignWarning>,
}

fn serialize_pairs<S: serde::Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::qcore::to_pairs(v).serialize(s)
}

/// `Σ_n γ_n e^{-iEnτ}`.
pub fn kernel_scalar(gamma: &[C64], tau: f64, energy: f64) -> C64 {
    // Horner in z = e^{-iEτ}
    let z = C64::from_polar(1.0, -energy * tau);
    gamma.iter().rev().fold(C64::new(0.0, 0.0), |acc, &g| acc * z + g)
}

/// Largest band-grid error of `γ` against `e^{-iET′}` on `energies`.
pub fn band_residual(gamma: &[C64], tau: f64, t_prime: f64, energies: &[f64]) -> f64 {
    energies
        .iter()
        .map(|&e| (kernel_scalar(gamma, tau, e) - C64::from_polar(1.0, -e * t_prime)).norm())
        .fold(0.0, f64::max)
}

/// Ridge least-squares fit of `Σ γ_n e^{-iEnτ}` to `e^{-iET′}` on the band grid.
///
/// Minimizes `(1/n_grid) Σ_E |Σ γ_n e^{-iEnτ} − e^{-iET′}|² + ridge·‖γ‖²`
/// through the SVD of the design matrix. With `ridge = 0` this is the
/// minimum-norm least-squares solution.
pub fn design_coefficients(n: usize, tau: f64, t_prime: f64, band: &BandSpec, ridge: f64) -> Result<DesignResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("branch count must be at least 1".into()));
    }
    if !(tau > 0.0 && tau.is_finite()) || !t_prime.is_finite() {
        return Err(Error::InvalidArgument(format!("need finite tau > 0 and T', got {tau}, {t_prime}")));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidArgument(format!("ridge must be >= 0, got {ridge}")));
    }
    let phase_span = band.width() * tau;
    if phase_span >= 2.0 * std::f64::consts::PI {
        return Err(Error::InfeasibleBand { phase_span });
    }
    let energies = band.grid();
    let rows = energies.len();
    let scale = 1.0 / (rows as f64).sqrt();
    let a = DMatrix::from_fn(rows, n, |r, c| C64::from_polar(scale, -energies[r] * c as f64 * tau));
    let b = CVector::from_iterator(rows, energies.iter().map(|&e| C64::from_polar(scale, -e * t_prime)));

    let svd = a.svd(true, true);
    let s = &svd.singular_values;
    let s_max = s.max();
    let s_min = s.min();
    let conditioning = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };

    // Exact branch selection needs no fit.
    let m = (t_prime / tau).round();
    let gamma: Vec<C64> = if (t_prime / tau - m).abs() <= 1e-12 && m >= 0.0 && (m as usize) < n {
        let mut g = vec![C64::new(0.0, 0.0); n];
        g[m as usize] = C64::new(1.0, 0.0);
        g
    } else {
        let u = svd.u.as_ref().expect("requested U");
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let utb = u.adjoint() * &b;
        let filtered = CVector::from_iterator(
            s.len(),
            s.iter().zip(utb.iter()).map(|(&si, &c)| {
                let f = if ridge > 0.0 {
                    si / (si * si + ridge)
                } else if si > s_max * f64::EPSILON {
                    1.0 / si
                } else {
                    0.0
                };
                c * f
            }),
        );
        (v_t.adjoint() * filtered).iter().copied().collect()
    };

    let residual = band_residual(&gamma, tau, t_prime, &energies);
    let mut warnings = Vec::new();
    if conditioning > ILL_CONDITIONED {
        warnings.push(DesignWarning::IllConditioned);
    }
    Ok(DesignResult {
        n,
        tau,
        t_prime,
        gamma,
        residual,
        conditioning,
        warnings,
    })
}

/// Splits `γ` into normalized machine amplitudes:
/// `α_n = √|γ_n| e^{i arg γ_n}/√S`, `β_n = √|γ_n|/√S`, `S = Σ|γ_n|`,
/// so that `β_n* α_n = γ_n / S`.
pub fn factorize_design(gamma: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let s: f64 = gamma.iter().map(|g| g.norm()).sum();
    if !(s > 0.0) {
        return Err(Error::ZeroDesign);
    }
    let alpha = gamma
        .iter()
        .map(|g| C64::from_polar((g.norm() / s).sqrt(), g.arg()))
        .collect();
    let beta = gamma.iter().map(|g| C64::new((g.norm() / s).sqrt(), 0.0)).collect();
    Ok((alpha, beta))
}

/// Machine pre/post-selection amplitudes over `N` branches spaced by `τ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MachineSpec {
    pub tau: f64,
    #[serde(serialize_with = "serialize_pairs")]
    pub alpha: Vec<C64>,
    #[serde(serialize_with = "serialize_pairs")]
    pub beta: Vec<C64>,
    pub t_target: f64,
}

impl MachineSpec {
    pub fn new(tau: f64, alpha: Vec<C64>, beta: Vec<C64>, t_target: f64) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidArgument("machine needs at least one branch".into()));
        }
        check_dim(alpha.len(), beta.len())?;
        for (name, v) in [("alpha", &alpha), ("beta", &beta)] {
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!("{name} has squared norm {norm}, expected 1")));
            }
        }
        if !(tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be finite, got {tau}")));
        }
        Ok(Self {
            tau,
            alpha,
            beta,
            t_target,
        })
    }

    /// Machine realizing `γ` (up to the factor `1/Σ|γ_n|`).
    pub fn from_gamma(gamma: &[C64], tau: f64, t_target: f64) -> Result<Self> {
        let (alpha, beta) = factorize_design(gamma)?;
        Self::new(tau, alpha, beta, t_target)
    }

    pub fn from_design(design: &DesignResult) -> Result<Self> {
        Self::from_gamma(&design.gamma, design.tau, design.t_prime)
    }

    pub fn branches(&self) -> usize {
        self.alpha.len()
    }

    /// `T = (N-1)τ`.
    pub fn total_time(&self) -> f64 {
        (self.branches() - 1) as f64 * self.tau
    }

    /// `β_n* α_n`.
    pub fn coefficients(&self) -> Vec<C64> {
        self.alpha.iter().zip(&self.beta).map(|(a, b)| b.conj() * a).collect()
    }
}

/// The conditional (generally non-unitary) action of a successful run.
#[derive(Debug, Clone)]
pub struct EffectiveKernel {
    k: CMatrix,
}

impl EffectiveKernel {
    pub fn entries(&self) -> &CMatrix {
        &self.k
    }

    pub fn from_matrix(k: CMatrix) -> Self {
        Self { k }
    }

    pub fn sigma_max(&self) -> f64 {
        self.k.clone().singular_values().max()
    }
}

impl Operator for EffectiveKernel {
    fn matrix(&self) -> &CMatrix {
        &self.k
    }
}

/// `K = Σ_n β_n* α_n U(τ)ⁿ`, summed by Horner's rule in `U(τ)`.
pub fn effective_kernel(spec: &MachineSpec, h: &HermitianOperator) -> EffectiveKernel {
    let u = unitary_from_hamiltonian(h, spec.tau);
    kernel_from_step(&spec.coefficients(), &u)
}

fn kernel_from_step(coeffs: &[C64], u: &UnitaryOperator) -> EffectiveKernel {
    let d = u.dim();
    let id = CMatrix::identity(d, d);
    let mut acc = CMatrix::zeros(d, d);
    for &c in coeffs.iter().rev() {
        acc = u.entries() * acc + &id * c;
    }
    EffectiveKernel { k: acc }
}

/// `‖Kψ‖²`, the probability that the machine's post-selection fires.
pub fn success_probability(k: &EffectiveKernel, psi: &State) -> Result<f64> {
    Ok(apply(k, psi)?.norm.powi(2))
}

/// Overlap of the normalized machine output with `U(T′)ψ`, and the success
/// probability: `(|⟨ψ|U(T′)† K|ψ⟩|² / ‖Kψ‖², ‖Kψ‖²)`.
pub fn translation_fidelity(k: &EffectiveKernel, h: &HermitianOperator, t_prime: f64, psi: &State) -> Result<(f64, f64)> {
    check_dim(k.dim(), h.dim())?;
    let target = unitary_from_hamiltonian(h, t_prime);
    fidelity_against(k, &target, psi)
}

fn fidelity_against(k: &EffectiveKernel, target: &UnitaryOperator, psi: &State) -> Result<(f64, f64)> {
    let out = apply(k, psi)?;
    if !(out.norm > NEVER_SUCCEEDS) {
        return Err(Error::PostSelectionNeverSucceeds { norm: out.norm });
    }
    let ideal = apply(target, psi)?;
    let overlap = ideal.vector.dotc(&out.vector);
    let fidelity = (overlap.norm_sqr() / (out.norm * out.norm)).min(1.0);
    Ok((fidelity, out.norm * out.norm))
}

/// Whether `γ` is a classical (convex) mixture of evolutions, and its weak time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalBound {
    pub is_classical: bool,
    /// `τ·Re(Σ γ_n n / Σ γ_n)`; `None` when `Σ γ_n = 0`.
    pub weak_time: Option<f64>,
    /// `(N-1)τ`.
    pub total_time: f64,
}

/// A nonnegative real `γ` averages the branch times `nτ`, so its weak time
/// lies in `[0, (N-1)τ]`: such a device can only slow evolution down.
pub fn classical_time_bound(gamma: &[C64], tau: f64) -> Result<ClassicalBound> {
    let scale = gamma.iter().map(|g| g.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::ZeroDesign);
    }
    let total_time = (gamma.len() - 1) as f64 * tau;
    let is_classical = gamma.iter().all(|g| g.re >= 0.0 && g.im.abs() <= 1e-12 * scale);
    let weak_time = if is_classical {
        let sum: f64 = gamma.iter().map(|g| g.re).sum();
        let first: f64 = gamma.iter().enumerate().map(|(n, g)| n as f64 * g.re).sum();
        // Rounding can nudge the average past an end point.
        Some((tau * first / sum).clamp(total_time.min(0.0), total_time.max(0.0)))
    } else {
        let sum: C64 = gamma.iter().sum();
        if sum.norm() <= 1e-300 {
            None
        } else {
            let first: C64 = gamma.iter().enumerate().map(|(n, g)| g * n as f64).sum();
            Some(tau * (first / sum).re)
        }
    };
    Ok(ClassicalBound {
        is_classical,
        weak_time,
        total_time,
    })
}

/// Hermitian with eigenvalues drawn uniformly from the band, in a Haar-like
/// random eigenbasis (QR of a complex Gaussian matrix).
pub fn random_band_hamiltonian<R: Rng>(dim: usize, band: &BandSpec, rng: &mut R) -> HermitianOperator {
    let energies: Vec<f64> = (0..dim).map(|_| rng.random_range(band.e_min..=band.e_max)).collect();
    let z = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let q = z.qr().q();
    HermitianOperator::from_spectrum(&energies, &q).expect("unitary conjugation of a real diagonal")
}

/// One random band Hamiltonian per dimension; system `i` uses substream
/// `u64::MAX - i` of `seed`, clear of the state substreams of the audit.
pub fn audit_systems(dims: &[usize], band: &BandSpec, seed: u64) -> Vec<HermitianOperator> {
    dims.iter()
        .enumerate()
        .map(|(i, &d)| random_band_hamiltonian(d, band, &mut substream(seed, u64::MAX - i as u64)))
        .collect()
}

/// Normalized complex-Gaussian combination of the given eigenvectors.
pub fn random_combination<R: Rng>(vectors: &[State], rng: &mut R) -> Result<State> {
    let first = vectors.first().ok_or_else(|| Error::EmptyInput("no vectors to combine".into()))?;
    let mut v = CVector::zeros(first.dim());
    for s in vectors {
        let c = C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal));
        v += s.amplitudes() * c;
    }
    State::normalize(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditRow {
    pub system_id: usize,
    pub state_id: usize,
    pub fidelity: f64,
    pub success_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditSummary {
    pub count: usize,
    pub min_fidelity: f64,
    pub median_fidelity: f64,
    pub max_fidelity: f64,
    pub min_success_prob: f64,
    pub median_success_prob: f64,
    pub max_success_prob: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub summary: AuditSummary,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn summarize(rows: &[AuditRow]) -> AuditSummary {
    let f: Vec<f64> = rows.iter().map(|r| r.fidelity).collect();
    let p: Vec<f64> = rows.iter().map(|r| r.success_prob).collect();
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    AuditSummary {
        count: rows.len(),
        min_fidelity: min(&f),
        median_fidelity: median(&f),
        max_fidelity: max(&f),
        min_success_prob: min(&p),
        median_success_prob: median(&p),
        max_success_prob: max(&p),
    }
}

/// Runs the machine on random band-limited states of several systems.
///
/// State `j` of system `i` is a complex-Gaussian combination of the in-band
/// eigenvectors of `H_i`, drawn from substream `(i << 32) | j` of `seed`.
pub fn universality_audit(
    spec: &MachineSpec,
    systems: &[HermitianOperator],
    states_per_system: usize,
    band: &BandSpec,
    seed: u64,
    threads: usize,
) -> Result<AuditReport> {
    if systems.is_empty() {
        return Err(Error::EmptyInput("no systems to audit".into()));
    }
    if states_per_system == 0 {
        return Err(Error::EmptyInput("no states per system".into()));
    }
    struct Prepared {
        kernel: EffectiveKernel,
        target: UnitaryOperator,
        in_band: Vec<State>,
    }
    let prepared = systems
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let spectrum = eigh(h);
            let in_band: Vec<State> = (0..spectrum.dim())
                .filter(|&k| band.contains(spectrum.eigenvalues[k]))
                .map(|k| spectrum.eigenvector(k))
                .collect();
            if in_band.is_empty() {
                return Err(Error::EmptyInput(format!("system {i} has no eigenvalue inside the band")));
            }
            Ok(Prepared {
                kernel: kernel_from_step(&spec.coefficients(), &spectrum.evolution(spec.tau)),
                target: spectrum.evolution(spec.t_target),
                in_band,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..systems.len())
        .flat_map(|i| (0..states_per_system).map(move |j| (i, j)))
        .collect();
    let rows = with_pool(threads, || {
        jobs.par_iter()
            .map(|&(i, j)| {
                let mut rng = substream(seed, ((i as u64) << 32) | j as u64);
                let psi = random_combination(&prepared[i].in_band, &mut rng)?;
                let (fidelity, success_prob) = fidelity_against(&prepared[i].kernel, &prepared[i].target, &psi)?;
                Ok(AuditRow {
                    system_id: i,
                    state_id: j,
                    fidelity,
                    success_prob,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = summarize(&rows);
    Ok(AuditReport { rows, summary })
}
