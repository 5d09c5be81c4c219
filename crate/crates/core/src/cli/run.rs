//! Scenario dispatch, artifacts and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use thiserror::Error;

use super::emit::{emit_results, EmitError, Field, Format, Record};
use super::scenario::{
    AuditMachine, AuditParams, DesignParams, DispersionParams, Kind, PacketParams, Parameters, PointerParams,
    Scenario, ScenarioError, SweepParams, WeakValueParams,
};
use crate::suter::{self, Dispersion, PolarizationState, WavePacket};
use crate::timemachine::{self, BandSpec, MachineSpec};
use crate::weakmeas::{self, GaussianPointer, MonteCarloConfig, PrePostPair};
use crate::C64;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            RunError::Scenario(ScenarioError::Parse { .. }) => EXIT_PARSE,
            RunError::Scenario(ScenarioError::Validation { .. }) => EXIT_VALIDATION,
            RunError::Core(
                E::InvalidPointer(_) | E::InvalidBand(_) | E::InvalidPacket(_) | E::InvalidArgument(_),
            ) => EXIT_VALIDATION,
            RunError::Core(_) => EXIT_NUMERIC,
            RunError::Emit(EmitError::Io { .. }) | RunError::Read { .. } => EXIT_IO,
            RunError::Emit(_) => EXIT_NUMERIC,
        }
    }

    fn category(&self) -> &'static str {
        match self.exit_code() {
            EXIT_PARSE => "parse",
            EXIT_VALIDATION => "validation",
            EXIT_IO => "io",
            _ => "numeric",
        }
    }

    /// Machine-readable error document printed on stderr.
    pub fn to_json(&self) -> String {
        let mut doc = json!({
            "error": self.category(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            RunError::Scenario(ScenarioError::Validation { key, .. }) => doc["key"] = json!(key),
            RunError::Scenario(ScenarioError::Parse { line, column, .. }) => {
                doc["line"] = json!(line);
                doc["column"] = json!(column);
            }
            _ => {}
        }
        doc.to_string()
    }
}

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// Worker cap, `0` = automatic.
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub artifact: PathBuf,
    pub manifest: PathBuf,
    /// Human-readable summary lines for stdout.
    pub messages: Vec<String>,
}

fn default_format(kind: Kind) -> Format {
    match kind {
        Kind::WeakValue | Kind::Ensemble | Kind::MachineDesign => Format::Json,
        Kind::Pointer | Kind::MachineAudit | Kind::SuterSweep | Kind::Packet => Format::Csv,
    }
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// `<artifact>.manifest.json` next to the artifact.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn complex_field(z: C64) -> Field {
    Field::List(vec![Field::Float(z.re), Field::Float(z.im)])
}

fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() && z.im != 0.0 { '-' } else { '+' };
    format!("{:.4} {} {:.4}i", z.re, sign, z.im.abs())
}

fn pair(p: &WeakValueParams) -> Result<PrePostPair, RunError> {
    Ok(PrePostPair::new(p.pre.clone(), p.post.clone())?)
}

fn pointer(p: &PointerParams) -> Result<GaussianPointer, RunError> {
    let default = GaussianPointer::for_coupling(p.width, p.coupling, &p.base.observable)?;
    if p.grid_points.is_none() && p.grid_halfwidth.is_none() {
        return Ok(default);
    }
    Ok(GaussianPointer::new(
        p.width,
        p.grid_halfwidth.unwrap_or(default.halfwidth),
        p.grid_points.unwrap_or(default.points),
    )?)
}

fn band(p: &super::scenario::BandParams) -> Result<BandSpec, RunError> {
    Ok(BandSpec::new(p.e_min, p.e_max, p.n_grid)?)
}

fn run_weak_value(p: &WeakValueParams, msgs: &mut Vec<String>) -> Result<Vec<Record>, RunError> {
    let pp = pair(p)?;
    let aw = weakmeas::weak_value(&p.observable, &pp)?;
    msgs.push(format!("A_w = {}", format_complex(aw)));
    Ok(vec![Record::new()
        .with("observable", p.observable_label.as_str())
        .with("re", aw.re)
        .with("im", aw.im)
        .with("postselection_probability", weakmeas::postselection_probability(&pp))])
}

fn run_pointer(p: &PointerParams, msgs: &mut Vec<String>) -> Result<Vec<Record>, RunError> {
    let pp = pair(&p.base)?;
    let ptr = pointer(p)?;
    let dist = weakmeas::pointer_final_distribution(&p.base.observable, &pp, &ptr, p.coupling)?;
    let stats = weakmeas::pointer_statistics(&dist)?;
    msgs.push(format!(
        "pointer mean = {:.6e}, variance = {:.6e}, p = {:.6e}",
        stats.mean, stats.variance, stats.probability
    ));
    Ok(dist
        .grid
        .iter()
        .zip(&dist.amplitudes)
        .zip(dist.density())
        .map(|((&q, a), d)| Record::new().with("q", q).with("re", a.re).with("im", a.im).with("density", d))
        .collect())
}

fn run_ensemble(
    p: &super::scenario::EnsembleParams,
    seed: u64,
    threads: usize,
    msgs: &mut Vec<String>,
) -> Result<Vec<Record>, RunError> {
    let pp = pair(&p.pointer.base)?;
    let ptr = pointer(&p.pointer)?;
    let mut cfg = MonteCarloConfig::new(p.trials, seed);
    cfg.threads = threads;
    if let Some(b) = p.block_size {
        cfg.block_size = b;
    }
    let stats = weakmeas::monte_carlo_run(&p.pointer.base.observable, &pp, &ptr, p.pointer.coupling, &cfg)?;
    msgs.push(format!(
        "accepted {} of {}, mean = {:.6e} +/- {:.2e}",
        stats.m_acc, stats.m_total, stats.sample_mean, stats.sample_stderr
    ));
    Ok(vec![Record::new()
        .with("m_total", stats.m_total)
        .with("m_acc", stats.m_acc)
        .with("mean", stats.sample_mean)
        .with("stderr", stats.sample_stderr)
        .with("seed", stats.seed)])
}

fn run_design(p: &DesignParams, format: Format, msgs: &mut Vec<String>) -> Result<Vec<Record>, RunError> {
    let d = timemachine::design_coefficients(p.n, p.tau, p.t_prime, &band(&p.band)?, p.ridge)?;
    msgs.push(format!("residual = {:.3e}, conditioning = {:.3e}", d.residual, d.conditioning));
    for w in &d.warnings {
        msgs.push(format!("warning: {w:?}"));
    }
    let mut r = Record::new().with("n", d.n).with("tau", d.tau).with("t_prime", d.t_prime);
    match format {
        Format::Json => r.push("gamma", Field::List(d.gamma.iter().copied().map(complex_field).collect())),
        Format::Csv => {
            for (k, g) in d.gamma.iter().enumerate() {
                r.push(&format!("gamma_{k}_re"), g.re);
                r.push(&format!("gamma_{k}_im"), g.im);
            }
        }
    }
    r.push("residual", d.residual);
    Ok(vec![r])
}

fn run_audit(p: &AuditParams, seed: u64, threads: usize, msgs: &mut Vec<String>) -> Result<Vec<Record>, RunError> {
    let band = band(&p.band)?;
    let spec = match &p.machine {
        AuditMachine::Designed { n, tau, t_prime, ridge } => {
            let d = timemachine::design_coefficients(*n, *tau, *t_prime, &band, *ridge)?;
            msgs.push(format!("design residual = {:.3e}", d.residual));
            MachineSpec::from_design(&d)?
        }
        AuditMachine::Suter {
            pre_angle,
            post_angle,
            delta,
            omega0,
        } => {
            let pre = PolarizationState::from_degrees(*pre_angle);
            let post = PolarizationState::from_degrees(*post_angle);
            let m = suter::map_to_machine(&pre, &post, *delta, *omega0)?;
            if m.weak_time.is_none() {
                return Err(crate::Error::ZeroDesign.into());
            }
            m.spec
        }
    };
    let systems = timemachine::audit_systems(&p.dims, &band, seed);
    let report = timemachine::universality_audit(&spec, &systems, p.states_per_system, &band, seed, threads)?;
    let s = &report.summary;
    msgs.push(format!(
        "fidelity min/median/max = {:.6}/{:.6}/{:.6}",
        s.min_fidelity, s.median_fidelity, s.max_fidelity
    ));
    msgs.push(format!(
        "success probability min/median/max = {:.3e}/{:.3e}/{:.3e}",
        s.min_success_prob, s.median_success_prob, s.max_success_prob
    ));
    Ok(report
        .rows
        .iter()
        .map(|r| {
            Record::new()
                .with("system_id", r.system_id)
                .with("state_id", r.state_id)
                .with("fidelity", r.fidelity)
                .with("success_prob", r.success_prob)
        })
        .collect())
}

fn run_sweep(p: &SweepParams, msgs: &mut Vec<String>) -> Result<Vec<Record>, RunError> {
    let pre = PolarizationState::from_degrees(p.pre_angle);
    let post = PolarizationState::from_degrees(p.post_angle);
    let rows = suter::sweep(&pre, &post, &p.delta)?;
    msgs.push(format!("weak gain = {:.6}", suter::weak_gain(&pre, &post)?));
    Ok(rows
        .iter()
        .map(|r| {
            Record::new()
                .with("delta", r.delta)
                .with("phase", r.phase)
                .with("gain", r.gain)
                .with("throughput", r.throughput)
        })
        .collect())
}

fn run_packet(p: &PacketParams, msgs: &mut Vec<String>) -> Result<Vec<Record>, RunError> {
    let pre = PolarizationState::from_degrees(p.pre_angle);
    let post = PolarizationState::from_degrees(p.post_angle);
    let dispersion = match p.dispersion {
        DispersionParams::Constant { delta0 } => Dispersion::Constant { delta: delta0 },
        DispersionParams::Linear { delta0, slope } => Dispersion::Linear {
            delta0,
            slope,
            omega0: p.omega0,
        },
    };
    let wp = WavePacket::gaussian(p.omega0, p.sigma, p.modes, p.span_sigmas, dispersion)?;
    let out = suter::wavepacket_transmit(&wp, &pre, &post);
    let ideal = suter::uniform_translation(&wp, &pre, &post, p.omega0)?;
    let distortion = suter::distortion_metric(&out.modes, &ideal)?;
    msgs.push(format!("throughput = {:.6e}, distortion = {:.6e}", out.throughput, distortion));
    Ok(out
        .modes
        .iter()
        .map(|m| {
            Record::new()
                .with("omega", m.omega)
                .with("re", m.amplitude.re)
                .with("im", m.amplitude.im)
        })
        .collect())
}

/// Runs one scenario, writing the artifact and its manifest.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let seed = opts.seed.unwrap_or(s.seed);
    let format = opts.format.unwrap_or_else(|| default_format(s.kind));
    let artifact = opts
        .out
        .clone()
        .or_else(|| s.output_path.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", s.kind.name(), extension(format))));
    let mut messages = Vec::new();
    let records = match &s.parameters {
        Parameters::WeakValue(p) => run_weak_value(p, &mut messages)?,
        Parameters::Pointer(p) => run_pointer(p, &mut messages)?,
        Parameters::Ensemble(p) => run_ensemble(p, seed, opts.threads, &mut messages)?,
        Parameters::MachineDesign(p) => run_design(p, format, &mut messages)?,
        Parameters::MachineAudit(p) => run_audit(p, seed, opts.threads, &mut messages)?,
        Parameters::SuterSweep(p) => run_sweep(p, &mut messages)?,
        Parameters::Packet(p) => run_packet(p, &mut messages)?,
    };
    emit_results(&records, format, &artifact)?;
    let manifest = manifest_path(&artifact);
    let doc = json!({
        "scenario": s.source,
        "seed": seed,
        "artifact_version": ARTIFACT_VERSION,
        "wall_time": start.elapsed().as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&doc).expect("manifest serializes") + "\n";
    std::fs::write(&manifest, text).map_err(|source| EmitError::Io {
        path: manifest.display().to_string(),
        source,
    })?;
    messages.push(format!("wrote {}", artifact.display()));
    Ok(RunOutcome {
        artifact,
        manifest,
        messages,
    })
}

/// Reads and parses a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Read {
        path: path.display().to_string(),
        source,
    })?;
    Ok(super::scenario::parse_scenario(&text)?)
}
