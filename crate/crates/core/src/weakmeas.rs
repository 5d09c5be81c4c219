//! Weak values and the von Neumann pointer model.
//!
//! A Gaussian pointer `φ(q)` is coupled to the system by the impulse
//! `exp(-i g A ⊗ p)`, which displaces it by `g·a` on the eigenspace of `A`
//! with eigenvalue `a`. Projecting the system on the post-selected state
//! leaves the pointer in
//!
//! ```text
//! Φ(q) = Σ_a ⟨Ψ₂|P_a|Ψ₁⟩ φ(q − g·a)
//! ```
//!
//! which is exact to all orders in `g`. For small `g` the normalized density
//! keeps the shape of `|φ|²` and its centre moves to `g·Re A_w`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::qcore::{check_dim, eigh, inner, HermitianOperator, Operator, State};
use crate::rng::{substream, with_pool};
use crate::{Error, Result, C64};

/// Below this `|⟨Ψ₂|Ψ₁⟩|` the weak value is undefined.
pub const ORTHOGONAL_TOL: f64 = 1e-12;
/// Eigenvalues closer than this share one projector.
pub const EIGEN_GROUP_TOL: f64 = 1e-9;
/// Minimal clearance, in pointer widths, between a shifted centre and the grid edge.
pub const GRID_MARGIN_WIDTHS: f64 = 5.0;

/// Pre-selected `|Ψ₁⟩` and post-selected `|Ψ₂⟩` states.
#[derive(Debug, Clone)]
pub struct PrePostPair {
    pre: State,
    post: State,
    overlap: C64,
}

impl PrePostPair {
    pub fn new(pre: State, post: State) -> Result<Self> {
        // ⟨Ψ₂|Ψ₁⟩
        let overlap = inner(&post, &pre)?;
        Ok(Self { pre, post, overlap })
    }

    /// Real two-level pair from angles in radians.
    pub fn from_angles(pre: f64, post: f64) -> Self {
        Self::new(State::from_angle(pre), State::from_angle(post)).expect("both states are 2-dimensional")
    }

    pub fn pre(&self) -> &State {
        &self.pre
    }

    pub fn post(&self) -> &State {
        &self.post
    }

    /// `⟨Ψ₂|Ψ₁⟩`.
    pub fn overlap(&self) -> C64 {
        self.overlap
    }

    pub fn dim(&self) -> usize {
        self.pre.dim()
    }
}

/// `A_w = ⟨Ψ₂|A|Ψ₁⟩ / ⟨Ψ₂|Ψ₁⟩`.
pub fn weak_value(a: &HermitianOperator, pp: &PrePostPair) -> Result<C64> {
    let overlap = pp.overlap();
    if overlap.norm() < ORTHOGONAL_TOL {
        return Err(Error::OrthogonalPostSelection {
            overlap: overlap.norm(),
        });
    }
    Ok(a.matrix_element(pp.post(), pp.pre())? / overlap)
}

/// `|⟨Ψ₂|Ψ₁⟩|²`, the post-selection probability at zero coupling.
pub fn postselection_probability(pp: &PrePostPair) -> f64 {
    pp.overlap().norm_sqr().clamp(0.0, 1.0)
}

/// Projective statistics of `A` between pre- and post-selection:
/// `(a, |⟨Ψ₂|P_a|Ψ₁⟩|² / Σ)` per distinct eigenvalue.
pub fn projective_weights(a: &HermitianOperator, pp: &PrePostPair) -> Result<Vec<(f64, f64)>> {
    let amps = eigenspace_amplitudes(a, pp)?;
    let total: f64 = amps.iter().map(|(_, c)| c.norm_sqr()).sum();
    if total <= 0.0 {
        return Err(Error::EmptyDistribution);
    }
    Ok(amps.into_iter().map(|(e, c)| (e, c.norm_sqr() / total)).collect())
}

/// `(a, ⟨Ψ₂|P_a|Ψ₁⟩)` per distinct eigenvalue of `A`.
fn eigenspace_amplitudes(a: &HermitianOperator, pp: &PrePostPair) -> Result<Vec<(f64, C64)>> {
    check_dim(a.dim(), pp.dim())?;
    let spec = eigh(a);
    let mut out = Vec::new();
    for (e, cols) in spec.eigenspaces(EIGEN_GROUP_TOL) {
        let amp = cols
            .iter()
            .map(|&k| {
                let v = spec.eigenvectors.column(k);
                v.dotc(pp.post().amplitudes()).conj() * v.dotc(pp.pre().amplitudes())
            })
            .sum();
        out.push((e, amp));
    }
    Ok(out)
}

/// Gaussian measuring device on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianPointer {
    /// Position standard deviation Δ of `|φ|²`.
    pub width: f64,
    /// Grid covers `[-halfwidth, halfwidth]`.
    pub halfwidth: f64,
    /// Number of grid points, a power of two.
    pub points: usize,
}

impl GaussianPointer {
    pub const DEFAULT_POINTS: usize = 4096;

    pub fn new(width: f64, halfwidth: f64, points: usize) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidPointer(format!("width must be positive, got {width}")));
        }
        if !(halfwidth >= 6.0 * width && halfwidth.is_finite()) {
            return Err(Error::InvalidPointer(format!(
                "halfwidth {halfwidth} is below 6 widths ({})",
                6.0 * width
            )));
        }
        if points < 256 || !points.is_power_of_two() {
            return Err(Error::InvalidPointer(format!(
                "grid points must be a power of two >= 256, got {points}"
            )));
        }
        let ptr = Self {
            width,
            halfwidth,
            points,
        };
        let norm = ptr.initial_norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidPointer(format!(
                "grid does not resolve the pointer (norm {norm})"
            )));
        }
        Ok(ptr)
    }

    /// Default grid for coupling `g` to `a`: `L = max(8Δ, |g|·max|a| + 8Δ)`, 4096 points.
    pub fn for_coupling(width: f64, coupling: f64, a: &HermitianOperator) -> Result<Self> {
        let spec = eigh(a);
        let amax = spec.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let halfwidth = (8.0 * width).max(coupling.abs() * amax + 8.0 * width);
        Self::new(width, halfwidth, Self::DEFAULT_POINTS)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.halfwidth / (self.points - 1) as f64
    }

    /// Symmetric grid, `q[M-1-k] == -q[k]` exactly.
    pub fn grid(&self) -> Vec<f64> {
        symmetric_grid(self.halfwidth, self.points)
    }

    /// `φ(q) = (2πΔ²)^{-1/4} exp(-q²/(4Δ²))`.
    pub fn amplitude(&self, q: f64) -> f64 {
        let w2 = self.width * self.width;
        (2.0 * std::f64::consts::PI * w2).powf(-0.25) * (-q * q / (4.0 * w2)).exp()
    }

    /// Momentum-space amplitude `(2Δ²/π)^{1/4} exp(-Δ²p²)`.
    pub fn momentum_amplitude(&self, p: f64) -> f64 {
        let w2 = self.width * self.width;
        (2.0 * w2 / std::f64::consts::PI).powf(0.25) * (-w2 * p * p).exp()
    }

    /// `Σ |φ(q_k)|² h` with trapezoid weights.
    pub fn initial_norm(&self) -> f64 {
        let grid = self.grid();
        let w = trapezoid_weights(grid.len(), self.spacing());
        grid.iter().zip(&w).map(|(&q, &wk)| self.amplitude(q).powi(2) * wk).sum()
    }
}

fn symmetric_grid(halfwidth: f64, points: usize) -> Vec<f64> {
    let m = (points - 1) as f64;
    (0..points)
        .map(|k| halfwidth * (2.0 * k as f64 - m) / m)
        .collect()
}

fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n > 1 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}

/// Post-selected pointer wavefunction on the grid.
#[derive(Debug, Clone)]
pub struct PointerDistribution {
    /// Grid points (position, or momentum for [`pointer_momentum_distribution`]).
    pub grid: Vec<f64>,
    /// Unnormalized amplitudes; `Σ|Φ|² h` is the post-selection probability.
    pub amplitudes: Vec<C64>,
    pub spacing: f64,
    pub postselection_probability: f64,
    pub mean: f64,
    pub variance: f64,
}

impl PointerDistribution {
    fn from_amplitudes(grid: Vec<f64>, amplitudes: Vec<C64>, spacing: f64) -> Self {
        let w = trapezoid_weights(grid.len(), spacing);
        let mass: Vec<f64> = amplitudes.iter().zip(&w).map(|(a, wk)| a.norm_sqr() * wk).collect();
        let p: f64 = mass.iter().sum();
        let (mean, variance) = if p > 0.0 {
            let mean = grid.iter().zip(&mass).map(|(q, m)| q * m).sum::<f64>() / p;
            let var = grid
                .iter()
                .zip(&mass)
                .map(|(q, m)| (q - mean).powi(2) * m)
                .sum::<f64>()
                / p;
            (mean, var)
        } else {
            (f64::NAN, f64::NAN)
        };
        Self {
            grid,
            amplitudes,
            spacing,
            postselection_probability: p,
            mean,
            variance,
        }
    }

    /// `|Φ(q_k)|²`, unnormalized.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Fraction of the post-selected probability with grid point in `[lo, hi]`.
    pub fn weight_between(&self, lo: f64, hi: f64) -> f64 {
        let w = trapezoid_weights(self.grid.len(), self.spacing);
        let inside: f64 = self
            .grid
            .iter()
            .zip(self.amplitudes.iter().zip(&w))
            .filter(|(q, _)| **q >= lo && **q <= hi)
            .map(|(_, (a, wk))| a.norm_sqr() * wk)
            .sum();
        inside / self.postselection_probability
    }
}

/// Exact post-selected pointer state after the impulse `exp(-i g A ⊗ p)`.
pub fn pointer_final_distribution(
    a: &HermitianOperator,
    pp: &PrePostPair,
    ptr: &GaussianPointer,
    g: f64,
) -> Result<PointerDistribution> {
    if !g.is_finite() {
        return Err(Error::InvalidArgument(format!("coupling must be finite, got {g}")));
    }
    let amps = eigenspace_amplitudes(a, pp)?;
    for &(e, _) in &amps {
        let shift = g * e;
        let required = shift.abs() + GRID_MARGIN_WIDTHS * ptr.width;
        if required > ptr.halfwidth {
            return Err(Error::GridTooSmall {
                shift,
                required,
                halfwidth: ptr.halfwidth,
            });
        }
    }
    let grid = ptr.grid();
    let phi: Vec<C64> = grid
        .iter()
        .map(|&q| amps.iter().map(|&(e, c)| c * ptr.amplitude(q - g * e)).sum())
        .collect();
    Ok(PointerDistribution::from_amplitudes(grid, phi, ptr.spacing()))
}

/// Post-selected pointer in the momentum representation:
/// `Φ̃(p) = φ̃(p) Σ_a ⟨Ψ₂|P_a|Ψ₁⟩ e^{-i g a p}`.
///
/// In the weak limit the mean momentum moves by `2 g Var(p) Im A_w`, with
/// `Var(p) = 1/(4Δ²)`.
pub fn pointer_momentum_distribution(
    a: &HermitianOperator,
    pp: &PrePostPair,
    ptr: &GaussianPointer,
    g: f64,
) -> Result<PointerDistribution> {
    let amps = eigenspace_amplitudes(a, pp)?;
    // σ_p = 1/(2Δ); the same number of standard deviations as the position grid.
    let halfwidth = ptr.halfwidth / (2.0 * ptr.width * ptr.width);
    let grid = symmetric_grid(halfwidth, ptr.points);
    let spacing = 2.0 * halfwidth / (ptr.points - 1) as f64;
    let phi: Vec<C64> = grid
        .iter()
        .map(|&p| {
            let phase: C64 = amps
                .iter()
                .map(|&(e, c)| c * C64::from_polar(1.0, -g * e * p))
                .sum();
            phase * ptr.momentum_amplitude(p)
        })
        .collect();
    Ok(PointerDistribution::from_amplitudes(grid, phi, spacing))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerMoments {
    pub mean: f64,
    pub variance: f64,
    pub probability: f64,
}

pub fn pointer_statistics(dist: &PointerDistribution) -> Result<PointerMoments> {
    if !(dist.postselection_probability >= 1e-300) {
        return Err(Error::EmptyDistribution);
    }
    Ok(PointerMoments {
        mean: dist.mean,
        variance: dist.variance,
        probability: dist.postselection_probability,
    })
}

/// Inverse-CDF sampler over the normalized `|Φ|²`, piecewise uniform per cell.
#[derive(Debug, Clone)]
pub struct ReadingSampler {
    lower: Vec<f64>,
    cumulative: Vec<f64>,
    cell_mass: Vec<f64>,
    spacing: f64,
}

impl ReadingSampler {
    pub fn new(dist: &PointerDistribution) -> Result<Self> {
        let d = dist.density();
        if d.len() < 2 {
            return Err(Error::EmptyDistribution);
        }
        let h = dist.spacing;
        let cell_mass: Vec<f64> = d.windows(2).map(|w| 0.5 * (w[0] + w[1]) * h).collect();
        let mut acc = 0.0;
        let cumulative: Vec<f64> = cell_mass
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        if !(acc > 0.0) {
            return Err(Error::EmptyDistribution);
        }
        Ok(Self {
            lower: dist.grid[..dist.grid.len() - 1].to_vec(),
            cumulative,
            cell_mass,
            spacing: h,
        })
    }

    /// Reading for a uniform variate `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> f64 {
        let total = *self.cumulative.last().expect("nonempty");
        let target = u * total;
        let j = self
            .cumulative
            .partition_point(|&c| c <= target)
            .min(self.cumulative.len() - 1);
        let start = self.cumulative[j] - self.cell_mass[j];
        let frac = if self.cell_mass[j] > 0.0 {
            ((target - start) / self.cell_mass[j]).clamp(0.0, 1.0)
        } else {
            0.5
        };
        self.lower[j] + frac * self.spacing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub seed: u64,
    /// Trials per RNG substream.
    pub block_size: u64,
    /// Worker cap, `0` = automatic. Results do not depend on it.
    pub threads: usize,
}

impl MonteCarloConfig {
    pub const DEFAULT_BLOCK: u64 = 4096;

    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            block_size: Self::DEFAULT_BLOCK,
            threads: 0,
        }
    }
}

/// Statistics of the pointer readings that survived post-selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub m_total: u64,
    pub m_acc: u64,
    #[serde(rename = "mean")]
    pub sample_mean: f64,
    /// `sample_stddev / √m_acc`; NaN when fewer than two trials were accepted.
    #[serde(rename = "stderr")]
    pub sample_stderr: f64,
    pub seed: u64,
}

/// Measure, post-select, discard, average.
///
/// Each trial passes post-selection with the exact probability of
/// [`pointer_final_distribution`]; accepted trials draw a reading from the
/// normalized `|Φ|²` by inverse CDF. Rejected readings are never generated.
pub fn monte_carlo_run(
    a: &HermitianOperator,
    pp: &PrePostPair,
    ptr: &GaussianPointer,
    g: f64,
    cfg: &MonteCarloConfig,
) -> Result<EnsembleStats> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    if cfg.block_size == 0 {
        return Err(Error::InvalidArgument("block size must be positive".into()));
    }
    let dist = pointer_final_distribution(a, pp, ptr, g)?;
    let p = dist.postselection_probability.clamp(0.0, 1.0);
    if p == 0.0 {
        return Err(Error::NoAcceptedTrials { m_total: cfg.trials });
    }
    let sampler = ReadingSampler::new(&dist)?;
    let blocks = cfg.trials.div_ceil(cfg.block_size);

    let readings: Vec<Vec<f64>> = with_pool(cfg.threads, || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = substream(cfg.seed, b);
                let n = cfg.block_size.min(cfg.trials - b * cfg.block_size);
                let mut out = Vec::new();
                for _ in 0..n {
                    if rng.random::<f64>() < p {
                        out.push(sampler.sample(rng.random::<f64>()));
                    }
                }
                out
            })
            .collect()
    });

    let m_acc: u64 = readings.iter().map(|r| r.len() as u64).sum();
    if m_acc == 0 {
        return Err(Error::NoAcceptedTrials { m_total: cfg.trials });
    }
    let n = m_acc as f64;
    let mean = readings.iter().flatten().sum::<f64>() / n;
    let stderr = if m_acc > 1 {
        let ss: f64 = readings.iter().flatten().map(|q| (q - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        f64::NAN
    };
    Ok(EnsembleStats {
        m_total: cfg.trials,
        m_acc,
        sample_mean: mean,
        sample_stderr: stderr,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::CMatrix;
    use proptest::prelude::*;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    fn amplifying_pair() -> PrePostPair {
        PrePostPair::from_angles(deg(45.0), deg(-44.0))
    }

    /// Independent grid-summation oracle: evaluates the two shifted Gaussians
    /// directly from hand-written σ_z projector amplitudes.
    fn sigma_z_grid_oracle(pre: [f64; 2], post: [f64; 2], width: f64, g: f64, half: f64, m: usize) -> (f64, f64) {
        let (cp, cm) = (post[0] * pre[0], post[1] * pre[1]);
        let h = 2.0 * half / (m - 1) as f64;
        let norm = (2.0 * std::f64::consts::PI * width * width).powf(-0.25);
        let phi = |q: f64| norm * (-q * q / (4.0 * width * width)).exp();
        let (mut p, mut first) = (0.0, 0.0);
        for k in 0..m {
            let q = -half + k as f64 * h;
            let w = if k == 0 || k == m - 1 { 0.5 * h } else { h };
            let amp = cp * phi(q - g) + cm * phi(q + g);
            p += amp * amp * w;
            first += q * amp * amp * w;
        }
        (p, first / p)
    }

    #[test]
    fn weak_value_eigenstate() {
        let pp = PrePostPair::new(State::basis(2, 1).unwrap(), State::basis(2, 1).unwrap()).unwrap();
        let aw = weak_value(&HermitianOperator::sigma_z(), &pp).unwrap();
        assert_eq!(aw, C64::new(-1.0, 0.0));
    }

    #[test]
    fn weak_value_imaginary() {
        let pre = State::from_slice(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let post = State::from_slice(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
        let aw = weak_value(&HermitianOperator::sigma_z(), &PrePostPair::new(pre, post).unwrap()).unwrap();
        // ⟨↑y|σz|↑x⟩ = (1 + i)/2, ⟨↑y|↑x⟩ = (1 − i)/2, ratio i.
        assert!((aw - C64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn weak_value_amplified() {
        let aw = weak_value(&HermitianOperator::sigma_z(), &amplifying_pair()).unwrap();
        let (c, s) = (deg(44.0).cos(), deg(44.0).sin());
        let oracle = (c + s) / (c - s);
        assert!((aw.re - oracle).abs() < 1e-10);
        assert!(aw.im.abs() < 1e-12);
        assert!((oracle - deg(89.0).tan()).abs() < 1e-9);
        assert!((aw.re - 57.29).abs() < 1e-3);
    }

    #[test]
    fn weak_value_orthogonal_rejected() {
        let pp = PrePostPair::from_angles(0.0, deg(90.0));
        assert!(matches!(
            weak_value(&HermitianOperator::sigma_z(), &pp),
            Err(Error::OrthogonalPostSelection { .. })
        ));
    }

    #[test]
    fn postselection_probability_examples() {
        let up = State::basis(2, 0).unwrap();
        let down = State::basis(2, 1).unwrap();
        assert_eq!(postselection_probability(&PrePostPair::new(up.clone(), up.clone()).unwrap()), 1.0);
        assert_eq!(postselection_probability(&PrePostPair::new(up, down).unwrap()), 0.0);
        let x = State::from_slice(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let y = State::from_slice(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
        assert!((postselection_probability(&PrePostPair::new(x, y).unwrap()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pointer_validation() {
        assert!(GaussianPointer::new(1.0, 5.0, 4096).is_err());
        assert!(GaussianPointer::new(1.0, 8.0, 1000).is_err());
        assert!(GaussianPointer::new(1.0, 8.0, 128).is_err());
        assert!(GaussianPointer::new(0.0, 8.0, 4096).is_err());
        // 256 points over ±2000Δ cannot resolve the Gaussian.
        assert!(GaussianPointer::new(1.0, 2000.0, 256).is_err());
        let ptr = GaussianPointer::new(1.0, 6.0, 256).unwrap();
        assert!((ptr.initial_norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn identity_observable_rigid_shift() {
        let pp = PrePostPair::from_angles(deg(10.0), deg(70.0));
        let a = HermitianOperator::identity(2);
        let g = 0.75;
        let ptr = GaussianPointer::for_coupling(1.0, g, &a).unwrap();
        let dist = pointer_final_distribution(&a, &pp, &ptr, g).unwrap();
        let stats = pointer_statistics(&dist).unwrap();
        assert!((stats.probability - postselection_probability(&pp)).abs() < 1e-8);
        assert!((stats.mean - g).abs() < 1e-10);
        assert!((stats.variance - 1.0).abs() < 1e-8);
        for (&q, amp) in dist.grid.iter().zip(&dist.amplitudes) {
            assert!((amp - pp.overlap() * ptr.amplitude(q - g)).norm() < 1e-14);
        }
    }

    #[test]
    fn strong_regime_two_resolved_peaks() {
        let pp = PrePostPair::from_angles(deg(45.0), deg(45.0));
        let a = HermitianOperator::sigma_z();
        let g = 20.0;
        let ptr = GaussianPointer::for_coupling(1.0, g, &a).unwrap();
        let dist = pointer_final_distribution(&a, &pp, &ptr, g).unwrap();
        let stats = pointer_statistics(&dist).unwrap();
        assert!(stats.mean.abs() < 1e-9);
        assert!((dist.weight_between(0.0, f64::INFINITY) - 0.5).abs() < 1e-6);
        assert!((dist.weight_between(f64::NEG_INFINITY, 0.0) - 0.5).abs() < 1e-6);
        // Each peak is a Gaussian of variance Δ², the pair adds g².
        assert!((stats.variance - (1.0 + g * g)).abs() < 1e-6);
    }

    #[test]
    fn weak_regime_mean_matches_grid_oracle() {
        let a = HermitianOperator::sigma_z();
        let pp = amplifying_pair();
        let g = 1e-4;
        let ptr = GaussianPointer::for_coupling(1.0, g, &a).unwrap();
        let dist = pointer_final_distribution(&a, &pp, &ptr, g).unwrap();
        let pre = [deg(45.0).cos(), deg(45.0).sin()];
        let post = [deg(-44.0).cos(), deg(-44.0).sin()];
        let (p, mean) = sigma_z_grid_oracle(pre, post, 1.0, g, ptr.halfwidth, ptr.points);
        assert!((dist.postselection_probability - p).abs() < 1e-12);
        assert!((dist.mean - mean).abs() < 1e-9 * mean.abs());
        assert!((dist.mean / g - 57.29).abs() < 0.01 * 57.29);
    }

    #[test]
    fn statistics_of_single_gaussian() {
        let pp = PrePostPair::from_angles(0.0, 0.0);
        let a = HermitianOperator::sigma_z();
        let g = 2.5;
        let ptr = GaussianPointer::for_coupling(0.5, g, &a).unwrap();
        let dist = pointer_final_distribution(&a, &pp, &ptr, g).unwrap();
        let m = pointer_statistics(&dist).unwrap();
        assert!((m.mean - g).abs() < 1e-10);
        assert!((m.variance - 0.25).abs() < 1e-9);
        assert!((m.probability - 1.0).abs() < 1e-8);
        assert_eq!(pointer_statistics(&dist).unwrap(), m);
    }

    #[test]
    fn grid_too_small() {
        let ptr = GaussianPointer::new(1.0, 8.0, 4096).unwrap();
        let pp = amplifying_pair();
        let a = HermitianOperator::sigma_z();
        assert!(pointer_final_distribution(&a, &pp, &ptr, 3.0).is_ok());
        assert!(matches!(
            pointer_final_distribution(&a, &pp, &ptr, 3.5),
            Err(Error::GridTooSmall { .. })
        ));
    }

    #[test]
    fn empty_distribution() {
        let pp = PrePostPair::new(State::basis(2, 0).unwrap(), State::basis(2, 1).unwrap()).unwrap();
        let a = HermitianOperator::sigma_z();
        let ptr = GaussianPointer::new(1.0, 8.0, 4096).unwrap();
        let dist = pointer_final_distribution(&a, &pp, &ptr, 0.0).unwrap();
        assert_eq!(pointer_statistics(&dist), Err(Error::EmptyDistribution));
    }

    #[test]
    fn weak_limit_converges_quadratically() {
        let a = HermitianOperator::sigma_z();
        let pp = amplifying_pair();
        let aw = weak_value(&a, &pp).unwrap().re;
        let err = |g: f64| {
            let ptr = GaussianPointer::for_coupling(1.0, g, &a).unwrap();
            let d = pointer_final_distribution(&a, &pp, &ptr, g).unwrap();
            (d.mean / g - aw).abs()
        };
        let (e3, e4) = (err(1e-3), err(1e-4));
        assert!(e3 / e4 >= 50.0, "error ratio {}", e3 / e4);
    }

    #[test]
    fn momentum_shift_tracks_imaginary_weak_value() {
        let pre = State::from_slice(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let post = State::from_slice(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
        let pp = PrePostPair::new(pre, post).unwrap();
        let a = HermitianOperator::sigma_z();
        let aw = weak_value(&a, &pp).unwrap();
        let width = 1.0;
        let g = 1e-4;
        let ptr = GaussianPointer::for_coupling(width, g, &a).unwrap();
        let dist = pointer_momentum_distribution(&a, &pp, &ptr, g).unwrap();
        let var_p = 1.0 / (4.0 * width * width);
        let predicted = 2.0 * g * var_p * aw.im;
        assert!((dist.mean - predicted).abs() < 1e-3 * predicted.abs());
        // Position shift vanishes: Re A_w = 0.
        let pos = pointer_final_distribution(&a, &pp, &ptr, g).unwrap();
        assert!(pos.mean.abs() < 1e-12);
    }

    #[test]
    fn sampler_inverts_cdf() {
        let pp = PrePostPair::from_angles(0.0, 0.0);
        let a = HermitianOperator::sigma_z();
        let ptr = GaussianPointer::for_coupling(1.0, 0.0, &a).unwrap();
        let dist = pointer_final_distribution(&a, &pp, &ptr, 0.0).unwrap();
        let s = ReadingSampler::new(&dist).unwrap();
        assert!(s.sample(0.5).abs() < 1e-9);
        assert!((s.sample(0.841_344_746_068_543) - 1.0).abs() < 1e-4);
        assert!(s.sample(0.0) >= -ptr.halfwidth);
        assert!(s.sample(1.0 - 1e-16) <= ptr.halfwidth);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_thread_independent() {
        let a = HermitianOperator::sigma_z();
        let pp = PrePostPair::from_angles(deg(45.0), deg(-30.0));
        let g = 0.05;
        let ptr = GaussianPointer::for_coupling(1.0, g, &a).unwrap();
        let mut cfg = MonteCarloConfig::new(20_000, 11);
        cfg.block_size = 1000;
        cfg.threads = 1;
        let one = monte_carlo_run(&a, &pp, &ptr, g, &cfg).unwrap();
        cfg.threads = 4;
        let four = monte_carlo_run(&a, &pp, &ptr, g, &cfg).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.sample_mean.to_bits(), four.sample_mean.to_bits());
        assert!(one.m_acc <= one.m_total);
    }

    #[test]
    fn monte_carlo_errors() {
        let a = HermitianOperator::sigma_z();
        let ptr = GaussianPointer::new(1.0, 8.0, 4096).unwrap();
        let orth = PrePostPair::from_angles(0.0, deg(90.0));
        assert!(matches!(
            monte_carlo_run(&a, &orth, &ptr, 0.0, &MonteCarloConfig::new(10, 1)),
            Err(Error::NoAcceptedTrials { .. })
        ));
        let pp = amplifying_pair();
        assert!(monte_carlo_run(&a, &pp, &ptr, 0.0, &MonteCarloConfig::new(0, 1)).is_err());
    }

    fn herm2() -> impl Strategy<Value = HermitianOperator> {
        prop::array::uniform4(-3.0f64..3.0).prop_map(|[a, b, c, d]| {
            let m = CMatrix::from_row_slice(2, 2, &[C64::new(a, 0.0), C64::new(b, c), C64::new(b, -c), C64::new(d, 0.0)]);
            HermitianOperator::new(m).unwrap()
        })
    }

    fn state2() -> impl Strategy<Value = State> {
        prop::array::uniform4(-1.0f64..1.0).prop_filter_map("nonzero", |[a, b, c, d]| {
            State::from_slice(&[C64::new(a, b), C64::new(c, d)]).ok()
        })
    }

    proptest! {
        #[test]
        fn weak_value_is_linear(a in herm2(), b in herm2(), pre in state2(), post in state2()) {
            let pp = PrePostPair::new(pre, post).unwrap();
            prop_assume!(pp.overlap().norm() > 1e-3);
            let sum = weak_value(&a.add(&b).unwrap(), &pp).unwrap();
            let parts = weak_value(&a, &pp).unwrap() + weak_value(&b, &pp).unwrap();
            prop_assert!((sum - parts).norm() <= 1e-10 * (1.0 + parts.norm()));
        }

        #[test]
        fn eigenstate_pre_selection_collapses(h in herm2(), post in state2(), k in 0usize..2) {
            let spec = eigh(&h);
            let pp = PrePostPair::new(spec.eigenvector(k), post).unwrap();
            prop_assume!(pp.overlap().norm() > 1e-2);
            let aw = weak_value(&h, &pp).unwrap();
            prop_assert!((aw - C64::new(spec.eigenvalues[k], 0.0)).norm() <= 1e-12);
        }

        #[test]
        fn probabilities_bounded(pre in state2(), post in state2(), g in -3.0f64..3.0) {
            let pp = PrePostPair::new(pre, post).unwrap();
            let p0 = postselection_probability(&pp);
            prop_assert!((0.0..=1.0).contains(&p0));
            let a = HermitianOperator::sigma_x();
            let ptr = GaussianPointer::for_coupling(1.0, g, &a).unwrap();
            let d = pointer_final_distribution(&a, &pp, &ptr, g).unwrap();
            prop_assert!(d.postselection_probability >= -1e-8 && d.postselection_probability <= 1.0 + 1e-8);
        }
    }
}
