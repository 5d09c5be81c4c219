//! Birefringent retarder between polarization filters.
//!
//! Jones vectors live in the (fast axis, slow axis) basis. The retarder is
//! `R(δ) = diag(e^{iδ/2}, e^{-iδ/2})`, i.e. `exp(iδσ_z/2)`, so a small
//! retardation between pre- and post-selecting polarizers imprints the phase
//! `(δ/2)·Re (σ_z)_w` on the transmitted light. The same filters define a
//! two-branch machine: the two polarization components are the two branches.

use serde::Serialize;

use crate::qcore::{inner, HermitianOperator, State, UnitaryOperator};
use crate::timemachine::{classical_time_bound, MachineSpec};
use crate::weakmeas::{weak_value, PrePostPair};
use crate::{Error, Result, C64};

/// Transmission below this magnitude has no defined phase.
pub const VANISHING_TRANSMISSION: f64 = 1e-12;

/// Polarization in the (fast, slow) basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationState(State);

impl PolarizationState {
    /// Linear polarizer at angle `theta` (radians) from the fast axis.
    pub fn from_angle(theta: f64) -> Self {
        Self(State::from_angle(theta))
    }

    pub fn from_degrees(theta: f64) -> Self {
        Self::from_angle(theta.to_radians())
    }

    pub fn from_state(s: State) -> Result<Self> {
        if s.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: s.dim(),
            });
        }
        Ok(Self(s))
    }

    pub fn fast_axis() -> Self {
        Self::from_angle(0.0)
    }

    pub fn state(&self) -> &State {
        &self.0
    }

    fn amp(&self, k: usize) -> C64 {
        self.0.amplitudes()[k]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retarder {
    pub delta: f64,
}

impl Retarder {
    pub fn unitary(&self) -> UnitaryOperator {
        retarder_unitary(self.delta)
    }
}

/// `diag(e^{iδ/2}, e^{-iδ/2})`.
pub fn retarder_unitary(delta: f64) -> UnitaryOperator {
    UnitaryOperator::diagonal_phases(&[0.5 * delta, -0.5 * delta])
}

/// `t = ⟨post| R(δ) |pre⟩`.
pub fn filtered_transmission(pre: &PolarizationState, post: &PolarizationState, delta: f64) -> C64 {
    post.amp(0).conj() * pre.amp(0) * C64::from_polar(1.0, 0.5 * delta)
        + post.amp(1).conj() * pre.amp(1) * C64::from_polar(1.0, -0.5 * delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseGain {
    pub phase: f64,
    pub gain: f64,
}

/// Phase acquired by the filtered light and its ratio to the bare `δ/2`.
///
/// The phase is measured against the `δ = 0` transmission `⟨post|pre⟩`, so a
/// negative overlap does not show up as a spurious `π`.
pub fn effective_phase_gain(pre: &PolarizationState, post: &PolarizationState, delta: f64) -> Result<PhaseGain> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("retardation must be finite and nonzero, got {delta}")));
    }
    let t = filtered_transmission(pre, post, delta);
    if t.norm() < VANISHING_TRANSMISSION {
        return Err(Error::VanishingTransmission { magnitude: t.norm() });
    }
    let reference = filtered_transmission(pre, post, 0.0);
    let phase = if reference.norm() >= VANISHING_TRANSMISSION {
        (t * reference.conj()).arg()
    } else {
        t.arg()
    };
    Ok(PhaseGain {
        phase,
        gain: phase / (0.5 * delta),
    })
}

/// `Re (σ_z)_w` for the filter pair, the `δ → 0` limit of the gain.
pub fn weak_gain(pre: &PolarizationState, post: &PolarizationState) -> Result<f64> {
    let pp = PrePostPair::new(pre.state().clone(), post.state().clone())?;
    Ok(weak_value(&HermitianOperator::sigma_z(), &pp)?.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub phase: f64,
    pub gain: f64,
    pub throughput: f64,
}

pub fn sweep(pre: &PolarizationState, post: &PolarizationState, deltas: &[f64]) -> Result<Vec<SweepRow>> {
    deltas
        .iter()
        .map(|&delta| {
            let pg = effective_phase_gain(pre, post, delta)?;
            Ok(SweepRow {
                delta,
                phase: pg.phase,
                gain: pg.gain,
                throughput: filtered_transmission(pre, post, delta).norm_sqr(),
            })
        })
        .collect()
}

/// Retardation as a function of mode frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dispersion {
    Constant { delta: f64 },
    /// `δ(ω) = δ₀ + δ′·(ω − ω₀)`.
    Linear { delta0: f64, slope: f64, omega0: f64 },
}

impl Dispersion {
    pub fn retardation(&self, omega: f64) -> f64 {
        match *self {
            Dispersion::Constant { delta } => delta,
            Dispersion::Linear { delta0, slope, omega0 } => delta0 + slope * (omega - omega0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub omega: f64,
    #[serde(serialize_with = "serialize_pair")]
    pub amplitude: C64,
}

fn serialize_pair<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// Normalized amplitudes over optical modes with a retardation rule.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    modes: Vec<Mode>,
    dispersion: Dispersion,
}

impl WavePacket {
    pub fn new(modes: Vec<Mode>, dispersion: Dispersion) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidPacket("no modes".into()));
        }
        if !modes.windows(2).all(|w| w[0].omega < w[1].omega) {
            return Err(Error::InvalidPacket("frequencies must be strictly increasing".into()));
        }
        let norm: f64 = modes.iter().map(|m| m.amplitude.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidPacket(format!("squared norm {norm}, expected 1")));
        }
        Ok(Self { modes, dispersion })
    }

    /// Scales the amplitudes to unit norm first.
    pub fn normalized(mut modes: Vec<Mode>, dispersion: Dispersion) -> Result<Self> {
        let norm = modes.iter().map(|m| m.amplitude.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidPacket("all amplitudes vanish".into()));
        }
        for m in &mut modes {
            m.amplitude /= norm;
        }
        Self::new(modes, dispersion)
    }

    /// `n_modes` equally spaced modes over `ω₀ ± span_sigmas·σ` with Gaussian
    /// amplitudes `exp(-(ω-ω₀)²/(4σ²))`, so `|c|²` has standard deviation σ.
    pub fn gaussian(omega0: f64, sigma: f64, n_modes: usize, span_sigmas: f64, dispersion: Dispersion) -> Result<Self> {
        if n_modes == 0 || !(sigma > 0.0) || !(span_sigmas > 0.0) {
            return Err(Error::InvalidPacket(format!(
                "need n_modes >= 1, sigma > 0, span > 0 (got {n_modes}, {sigma}, {span_sigmas})"
            )));
        }
        let omegas: Vec<f64> = if n_modes == 1 {
            vec![omega0]
        } else {
            let lo = omega0 - span_sigmas * sigma;
            let step = 2.0 * span_sigmas * sigma / (n_modes - 1) as f64;
            (0..n_modes).map(|k| lo + k as f64 * step).collect()
        };
        let modes = omegas
            .into_iter()
            .map(|omega| Mode {
                omega,
                amplitude: C64::new((-(omega - omega0).powi(2) / (4.0 * sigma * sigma)).exp(), 0.0),
            })
            .collect();
        Self::normalized(modes, dispersion)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn dispersion(&self) -> Dispersion {
        self.dispersion
    }
}

/// Filtered packet: unnormalized amplitudes and total transmitted intensity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmittedPacket {
    pub modes: Vec<Mode>,
    pub throughput: f64,
}

/// Multiplies each mode by its own `t_k = ⟨post|R(δ(ω_k))|pre⟩`.
pub fn wavepacket_transmit(wp: &WavePacket, pre: &PolarizationState, post: &PolarizationState) -> TransmittedPacket {
    let modes: Vec<Mode> = wp
        .modes
        .iter()
        .map(|m| Mode {
            omega: m.omega,
            amplitude: m.amplitude * filtered_transmission(pre, post, wp.dispersion.retardation(m.omega)),
        })
        .collect();
    let throughput = modes.iter().map(|m| m.amplitude.norm_sqr()).sum();
    TransmittedPacket { modes, throughput }
}

/// The packet a true time translation would produce: every mode advanced by
/// the time that reproduces the phase gained at `omega_design`,
/// `c_k e^{iφ₀ ω_k/ω_design}`.
pub fn uniform_translation(
    wp: &WavePacket,
    pre: &PolarizationState,
    post: &PolarizationState,
    omega_design: f64,
) -> Result<Vec<Mode>> {
    if !(omega_design != 0.0 && omega_design.is_finite()) {
        return Err(Error::InvalidArgument(format!("design frequency must be nonzero, got {omega_design}")));
    }
    let phase = effective_phase_gain(pre, post, wp.dispersion.retardation(omega_design))?.phase;
    Ok(wp
        .modes
        .iter()
        .map(|m| Mode {
            omega: m.omega,
            amplitude: m.amplitude * C64::from_polar(1.0, phase * m.omega / omega_design),
        })
        .collect())
}

/// `1 − |⟨ideal|out⟩|² / (‖ideal‖² ‖out‖²)`.
pub fn distortion_metric(out: &[Mode], ideal: &[Mode]) -> Result<f64> {
    if out.len() != ideal.len()
        || out
            .iter()
            .zip(ideal)
            .any(|(a, b)| (a.omega - b.omega).abs() > 1e-12 * a.omega.abs().max(1.0))
    {
        return Err(Error::ModeGridMismatch);
    }
    let overlap: C64 = out.iter().zip(ideal).map(|(a, b)| b.amplitude.conj() * a.amplitude).sum();
    let n_out: f64 = out.iter().map(|m| m.amplitude.norm_sqr()).sum();
    let n_ideal: f64 = ideal.iter().map(|m| m.amplitude.norm_sqr()).sum();
    if !(n_out > 0.0 && n_ideal > 0.0) {
        return Err(Error::InvalidPacket("cannot compare a packet with zero norm".into()));
    }
    Ok((1.0 - overlap.norm_sqr() / (n_out * n_ideal)).clamp(0.0, 1.0))
}

/// The filter pair read as a two-branch machine.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuterMachine {
    pub spec: MachineSpec,
    /// `(post₀* pre₀, post₁* pre₁)`.
    #[serde(serialize_with = "serialize_gamma")]
    pub gamma: [C64; 2],
    /// Weak time `τ·Re(γ₁/(γ₀+γ₁))`; `None` for crossed filters.
    pub weak_time: Option<f64>,
    pub is_classical: bool,
}

fn serialize_gamma<S: serde::Serializer>(g: &[C64; 2], s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::qcore::to_pairs(g).serialize(s)
}

/// Maps filters and retarder onto branches `n = 0, 1` with step `τ = δ/ω₀`,
/// so that a mode of energy `ω₀` picks up `e^{-iδ}` between the branches.
///
/// Up to the common factor `e^{iδ/2}` the filtered transmission of that mode
/// equals the scalar kernel `γ₀ + γ₁ e^{-iω₀τ}`.
pub fn map_to_machine(
    pre: &PolarizationState,
    post: &PolarizationState,
    delta: f64,
    omega0: f64,
) -> Result<SuterMachine> {
    if !(omega0 > 0.0 && delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need delta > 0 and omega0 > 0, got {delta}, {omega0}"
        )));
    }
    let gamma = [post.amp(0).conj() * pre.amp(0), post.amp(1).conj() * pre.amp(1)];
    let tau = delta / omega0;
    let bound = classical_time_bound(&gamma, tau)?;
    let spec = MachineSpec::from_gamma(&gamma, tau, bound.weak_time.unwrap_or(f64::NAN))?;
    Ok(SuterMachine {
        spec,
        gamma,
        weak_time: bound.weak_time,
        is_classical: bound.is_classical,
    })
}

/// `‖R(δ) s‖`, which the bare retarder keeps at one.
pub fn retarder_norm(s: &PolarizationState, delta: f64) -> f64 {
    let r = retarder_unitary(delta);
    (r.entries() * s.state().amplitudes()).norm()
}

/// Overlap of two polarizations, `⟨a|b⟩`.
pub fn polarization_overlap(a: &PolarizationState, b: &PolarizationState) -> C64 {
    inner(a.state(), b.state()).expect("both states are 2-dimensional")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::CMatrix;
    use crate::timemachine::{effective_kernel, translation_fidelity};
    use proptest::prelude::*;

    fn deg(x: f64) -> PolarizationState {
        PolarizationState::from_degrees(x)
    }

    /// Closed-form Jones product for real filters at angles a, b.
    fn jones_oracle(a: f64, b: f64, delta: f64) -> C64 {
        let (a, b) = (a.to_radians(), b.to_radians());
        C64::from_polar(b.cos() * a.cos(), 0.5 * delta) + C64::from_polar(b.sin() * a.sin(), -0.5 * delta)
    }

    #[test]
    fn retarder_examples() {
        let id = retarder_unitary(0.0);
        assert_eq!(id.entries(), &CMatrix::identity(2, 2));
        let pi = retarder_unitary(std::f64::consts::PI);
        assert!((pi.entries()[(0, 0)] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((pi.entries()[(1, 1)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(Retarder { delta: 0.4 }.unitary(), retarder_unitary(0.4));
    }

    #[test]
    fn transmission_examples() {
        let fast = PolarizationState::fast_axis();
        let t = filtered_transmission(&fast, &fast, 0.3);
        assert!((t - C64::from_polar(1.0, 0.15)).norm() < 1e-15);

        assert!(filtered_transmission(&deg(20.0), &deg(110.0), 0.0).norm() < 1e-15);

        let t = filtered_transmission(&deg(45.0), &deg(-44.0), 0.01);
        let (c, s) = (44f64.to_radians().cos(), 44f64.to_radians().sin());
        let oracle = (C64::from_polar(c, 0.005) - C64::from_polar(s, -0.005)) / 2f64.sqrt();
        assert!((t - oracle).norm() < 1e-15);
        // Exact phase sits a few percent below the linearized 0.01/2 × 57.29.
        assert!((t.arg() - 0.278_982).abs() < 1e-6, "{}", t.arg());
        assert!((t.arg() - 0.2865).abs() < 0.03 * 0.2865);
    }

    #[test]
    fn gain_examples() {
        let fast = PolarizationState::fast_axis();
        for delta in [1e-6, 0.3, 2.0] {
            assert!((effective_phase_gain(&fast, &fast, delta).unwrap().gain - 1.0).abs() < 1e-12);
        }
        let (pre, post) = (deg(45.0), deg(-44.0));
        let aw = weak_gain(&pre, &post).unwrap();
        let g = effective_phase_gain(&pre, &post, 1e-4).unwrap().gain;
        assert!((g - 57.29).abs() < 1e-3 * 57.29);
        assert!((g - aw).abs() < 1e-3 * aw);
        let strong = effective_phase_gain(&pre, &post, 1.0).unwrap().gain;
        assert!((strong - 57.29).abs() > 0.1 * 57.29);
    }

    #[test]
    fn gain_errors() {
        assert!(effective_phase_gain(&deg(45.0), &deg(-44.0), 0.0).is_err());
        assert!(matches!(
            effective_phase_gain(&deg(0.0), &deg(90.0), 0.1),
            Err(Error::VanishingTransmission { .. })
        ));
    }

    #[test]
    fn negative_overlap_has_no_pi_offset() {
        let (pre, post) = (deg(30.0), deg(170.0));
        let g = effective_phase_gain(&pre, &post, 1e-5).unwrap().gain;
        assert!((g - weak_gain(&pre, &post).unwrap()).abs() < 1e-4 * g.abs().max(1.0));
    }

    #[test]
    fn sweep_rows() {
        let rows = sweep(&deg(45.0), &deg(-44.0), &[1e-4, 1e-2, 1.0]).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!((r.throughput - filtered_transmission(&deg(45.0), &deg(-44.0), r.delta).norm_sqr()).abs() < 1e-15);
        }
        assert!(rows[0].gain > rows[2].gain);
    }

    #[test]
    fn constant_dispersion_does_not_distort() {
        let wp = WavePacket::gaussian(1.0, 0.1, 64, 4.0, Dispersion::Constant { delta: 0.02 }).unwrap();
        let out = wavepacket_transmit(&wp, &deg(45.0), &deg(-44.0));
        assert!(distortion_metric(&out.modes, wp.modes()).unwrap() <= 1e-12);
    }

    #[test]
    fn single_mode_never_distorts() {
        let disp = Dispersion::Linear {
            delta0: 0.3,
            slope: 5.0,
            omega0: 1.0,
        };
        let wp = WavePacket::gaussian(1.7, 0.1, 1, 4.0, disp).unwrap();
        let out = wavepacket_transmit(&wp, &deg(45.0), &deg(-44.0));
        assert!(distortion_metric(&out.modes, wp.modes()).unwrap() <= 1e-12);
        let ideal = uniform_translation(&wp, &deg(45.0), &deg(-44.0), 1.0).unwrap();
        assert!(distortion_metric(&out.modes, &ideal).unwrap() <= 1e-12);
    }

    #[test]
    fn metric_examples() {
        let a = vec![
            Mode { omega: 1.0, amplitude: C64::new(1.0, 0.0) },
            Mode { omega: 2.0, amplitude: C64::new(0.0, 0.0) },
        ];
        let b = vec![
            Mode { omega: 1.0, amplitude: C64::new(0.0, 0.0) },
            Mode { omega: 2.0, amplitude: C64::new(0.0, 3.0) },
        ];
        assert_eq!(distortion_metric(&a, &a).unwrap(), 0.0);
        assert_eq!(distortion_metric(&a, &b).unwrap(), 1.0);
        assert_eq!(distortion_metric(&a, &b[..1]), Err(Error::ModeGridMismatch));
        let shifted = vec![a[0], Mode { omega: 2.5, amplitude: C64::new(0.0, 0.0) }];
        assert_eq!(distortion_metric(&a, &shifted), Err(Error::ModeGridMismatch));
    }

    #[test]
    fn packet_validation() {
        let m = |omega: f64, a: f64| Mode { omega, amplitude: C64::new(a, 0.0) };
        let disp = Dispersion::Constant { delta: 0.1 };
        assert!(WavePacket::new(vec![m(1.0, 0.6), m(2.0, 0.8)], disp).is_ok());
        assert!(WavePacket::new(vec![m(1.0, 0.6), m(2.0, 0.7)], disp).is_err());
        assert!(WavePacket::new(vec![m(2.0, 0.6), m(1.0, 0.8)], disp).is_err());
        assert!(WavePacket::new(vec![], disp).is_err());
        assert!(WavePacket::normalized(vec![m(1.0, 0.0)], disp).is_err());
    }

    #[test]
    fn machine_mapping_examples() {
        let fast = PolarizationState::fast_axis();
        let m = map_to_machine(&fast, &fast, 0.05, 1.0).unwrap();
        assert_eq!(m.gamma, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(m.is_classical);
        assert_eq!(m.weak_time, Some(0.0));

        let m = map_to_machine(&deg(45.0), &deg(-45.0), 0.05, 1.0).unwrap();
        assert!((m.gamma[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((m.gamma[1] - C64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!(!m.is_classical);
        // Crossed filters: Σγ = 0, the weak time diverges.
        assert!(m.weak_time.is_none_or(|t| !(0.0..=m.spec.tau).contains(&t)));
    }

    #[test]
    fn mapped_kernel_reproduces_transmission() {
        let (pre, post) = (deg(45.0), deg(-44.0));
        let (delta, omega0) = (0.05, 2.0);
        let m = map_to_machine(&pre, &post, delta, omega0).unwrap();
        let h = HermitianOperator::from_real_diagonal(&[omega0]).unwrap();
        let k = effective_kernel(&m.spec, &h);
        let s: f64 = m.gamma.iter().map(|g| g.norm()).sum();
        let t = filtered_transmission(&pre, &post, delta);
        assert!((k.entries()[(0, 0)] * s * C64::from_polar(1.0, 0.5 * delta) - t).norm() < 1e-14);
        // The designed mode is an eigenstate: translated perfectly.
        let psi = State::basis(1, 0).unwrap();
        let (f, _) = translation_fidelity(&k, &h, m.spec.t_target, &psi).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        assert!(m.weak_time.unwrap() < 0.0);
    }

    #[test]
    fn jones_oracle_agrees() {
        for (a, b, d) in [(45.0, -44.0, 0.01), (10.0, 80.0, 0.5), (-30.0, 12.0, 3.0)] {
            assert!((filtered_transmission(&deg(a), &deg(b), d) - jones_oracle(a, b, d)).norm() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn retarder_preserves_norm(theta in -4.0f64..4.0, delta in -10.0f64..10.0) {
            prop_assert!((retarder_norm(&PolarizationState::from_angle(theta), delta) - 1.0).abs() <= 1e-15);
        }

        #[test]
        fn throughput_at_most_one(a in -4.0f64..4.0, b in -4.0f64..4.0, delta in -10.0f64..10.0) {
            prop_assert!(filtered_transmission(&PolarizationState::from_angle(a), &PolarizationState::from_angle(b), delta).norm_sqr() <= 1.0 + 1e-15);
        }

        #[test]
        fn single_mode_packets_never_distort(omega in 0.1f64..10.0, d0 in -1.0f64..1.0, slope in -5.0f64..5.0, a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let (pre, post) = (PolarizationState::from_angle(a), PolarizationState::from_angle(b));
            prop_assume!(filtered_transmission(&pre, &post, d0 + slope * (omega - 1.0)).norm() > 1e-6);
            let wp = WavePacket::gaussian(omega, 1.0, 1, 1.0, Dispersion::Linear { delta0: d0, slope, omega0: 1.0 }).unwrap();
            let out = wavepacket_transmit(&wp, &pre, &post);
            prop_assert!(distortion_metric(&out.modes, wp.modes()).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn throughput_is_one_for_identical_filters_without_retardation() {
        for theta in [0.0, 0.3, 1.1, 2.9] {
            let s = PolarizationState::from_angle(theta);
            assert!((filtered_transmission(&s, &s, 0.0).norm_sqr() - 1.0).abs() < 1e-15);
            assert!((polarization_overlap(&s, &s).norm() - 1.0).abs() < 1e-15);
        }
    }
}
