//! Strict JSON scenario configs.
//!
//! ```json
//! {
//!   "kind": "weak_value",
//!   "seed": 1,
//!   "output_path": "out/weak_value.json",
//!   "parameters": { "observable": "sigma_z", "pre_angle": 45, "post_angle": -44 }
//! }
//! ```
//!
//! Unknown keys are rejected at every level. Angles are in degrees.

use std::path::PathBuf;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::qcore::{from_pairs, matrix_from_pairs, HermitianOperator, Operator, State};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid key '{key}': {message}")]
    Validation { key: String, message: String },
}

impl ScenarioError {
    fn key(key: &str, message: impl Into<String>) -> Self {
        ScenarioError::Validation {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// Offending key of a validation error.
    pub fn offending_key(&self) -> Option<&str> {
        match self {
            ScenarioError::Validation { key, .. } => Some(key),
            ScenarioError::Parse { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    WeakValue,
    Pointer,
    Ensemble,
    MachineDesign,
    MachineAudit,
    SuterSweep,
    Packet,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::WeakValue,
        Kind::Pointer,
        Kind::Ensemble,
        Kind::MachineDesign,
        Kind::MachineAudit,
        Kind::SuterSweep,
        Kind::Packet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::WeakValue => "weak_value",
            Kind::Pointer => "pointer",
            Kind::Ensemble => "ensemble",
            Kind::MachineDesign => "machine_design",
            Kind::MachineAudit => "machine_audit",
            Kind::SuterSweep => "suter_sweep",
            Kind::Packet => "packet",
        }
    }

    pub fn from_name(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Pre/post-selection and the measured observable.
#[derive(Debug, Clone)]
pub struct WeakValueParams {
    pub observable: HermitianOperator,
    pub observable_label: String,
    pub pre: State,
    pub post: State,
}

#[derive(Debug, Clone)]
pub struct PointerParams {
    pub base: WeakValueParams,
    pub width: f64,
    pub coupling: f64,
    pub grid_points: Option<usize>,
    pub grid_halfwidth: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EnsembleParams {
    pub pointer: PointerParams,
    pub trials: u64,
    pub block_size: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandParams {
    pub e_min: f64,
    pub e_max: f64,
    pub n_grid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignParams {
    pub n: usize,
    pub tau: f64,
    pub t_prime: f64,
    pub band: BandParams,
    pub ridge: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AuditMachine {
    Designed { n: usize, tau: f64, t_prime: f64, ridge: f64 },
    Suter { pre_angle: f64, post_angle: f64, delta: f64, omega0: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditParams {
    pub machine: AuditMachine,
    pub band: BandParams,
    pub dims: Vec<usize>,
    pub states_per_system: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepParams {
    pub pre_angle: f64,
    pub post_angle: f64,
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DispersionParams {
    Constant { delta0: f64 },
    Linear { delta0: f64, slope: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketParams {
    pub pre_angle: f64,
    pub post_angle: f64,
    pub omega0: f64,
    pub sigma: f64,
    pub modes: usize,
    pub span_sigmas: f64,
    pub dispersion: DispersionParams,
}

#[derive(Debug, Clone)]
pub enum Parameters {
    WeakValue(WeakValueParams),
    Pointer(PointerParams),
    Ensemble(EnsembleParams),
    MachineDesign(DesignParams),
    MachineAudit(AuditParams),
    SuterSweep(SweepParams),
    Packet(PacketParams),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: Kind,
    pub parameters: Parameters,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    /// The document as parsed, echoed into the run manifest.
    pub source: Value,
}

const TOP_KEYS: &[&str] = &["kind", "seed", "output_path", "parameters"];
const STATE_KEYS: &[&str] = &["observable", "pre_angle", "pre_state", "post_angle", "post_state"];
const POINTER_KEYS: &[&str] = &["width", "coupling", "grid_points", "grid_halfwidth"];
const BAND_KEYS: &[&str] = &["e_min", "e_max", "n_grid"];

fn allowed_keys(kind: Kind) -> Vec<&'static str> {
    let mut keys: Vec<&str> = Vec::new();
    match kind {
        Kind::WeakValue => keys.extend(STATE_KEYS),
        Kind::Pointer => {
            keys.extend(STATE_KEYS);
            keys.extend(POINTER_KEYS);
        }
        Kind::Ensemble => {
            keys.extend(STATE_KEYS);
            keys.extend(POINTER_KEYS);
            keys.extend(["trials", "block_size"]);
        }
        Kind::MachineDesign => {
            keys.extend(["n", "tau", "t_prime", "ridge"]);
            keys.extend(BAND_KEYS);
        }
        Kind::MachineAudit => {
            keys.extend(["machine", "n", "tau", "t_prime", "ridge"]);
            keys.extend(["pre_angle", "post_angle", "delta", "omega0"]);
            keys.extend(BAND_KEYS);
            keys.extend(["dims", "states_per_system"]);
        }
        Kind::SuterSweep => keys.extend(["pre_angle", "post_angle", "delta"]),
        Kind::Packet => keys.extend([
            "pre_angle",
            "post_angle",
            "omega0",
            "sigma",
            "modes",
            "span_sigmas",
            "dispersion",
            "delta0",
            "slope",
        ]),
    }
    keys
}

/// Typed access to a parameter object.
struct Params<'a> {
    map: &'a Map<String, Value>,
}

impl<'a> Params<'a> {
    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn value(&self, key: &str) -> Result<&'a Value, ScenarioError> {
        self.map
            .get(key)
            .ok_or_else(|| ScenarioError::key(key, "required key is missing"))
    }

    fn f64(&self, key: &str) -> Result<f64, ScenarioError> {
        self.value(key)?
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| ScenarioError::key(key, "expected a finite number"))
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>, ScenarioError> {
        if self.has(key) {
            self.f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn u64(&self, key: &str) -> Result<u64, ScenarioError> {
        self.value(key)?
            .as_u64()
            .ok_or_else(|| ScenarioError::key(key, "expected a nonnegative integer"))
    }

    fn usize(&self, key: &str) -> Result<usize, ScenarioError> {
        self.u64(key).map(|x| x as usize)
    }

    fn opt_u64(&self, key: &str) -> Result<Option<u64>, ScenarioError> {
        if self.has(key) {
            self.u64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn str(&self, key: &str) -> Result<&'a str, ScenarioError> {
        self.value(key)?
            .as_str()
            .ok_or_else(|| ScenarioError::key(key, "expected a string"))
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>, ScenarioError> {
        let arr = self
            .value(key)?
            .as_array()
            .filter(|a| !a.is_empty())
            .ok_or_else(|| ScenarioError::key(key, "expected a nonempty array of numbers"))?;
        arr.iter()
            .map(|v| v.as_f64().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| ScenarioError::key(key, "expected a nonempty array of numbers"))
    }

    fn usize_list(&self, key: &str) -> Result<Vec<usize>, ScenarioError> {
        let arr = self
            .value(key)?
            .as_array()
            .filter(|a| !a.is_empty())
            .ok_or_else(|| ScenarioError::key(key, "expected a nonempty array of integers"))?;
        arr.iter()
            .map(|v| v.as_u64().map(|x| x as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| ScenarioError::key(key, "expected a nonempty array of integers"))
    }

    fn forbid(&self, key: &str, why: &str) -> Result<(), ScenarioError> {
        if self.has(key) {
            return Err(ScenarioError::key(key, why));
        }
        Ok(())
    }

    fn observable(&self) -> Result<(HermitianOperator, String), ScenarioError> {
        let v = self.value("observable")?;
        if let Some(name) = v.as_str() {
            let op = match name {
                "sigma_x" => HermitianOperator::sigma_x(),
                "sigma_y" => HermitianOperator::sigma_y(),
                "sigma_z" => HermitianOperator::sigma_z(),
                "identity" => HermitianOperator::identity(2),
                other => {
                    return Err(ScenarioError::key(
                        "observable",
                        format!("unknown observable '{other}' (sigma_x, sigma_y, sigma_z, identity or a matrix)"),
                    ))
                }
            };
            return Ok((op, name.to_string()));
        }
        let rows: Vec<Vec<[f64; 2]>> = serde_json::from_value(v.clone())
            .map_err(|e| ScenarioError::key("observable", format!("expected rows of [re, im] pairs: {e}")))?;
        let m = matrix_from_pairs(&rows).map_err(|e| ScenarioError::key("observable", e.to_string()))?;
        let op = HermitianOperator::new(m).map_err(|e| ScenarioError::key("observable", e.to_string()))?;
        Ok((op, "matrix".to_string()))
    }

    fn state(&self, prefix: &str) -> Result<State, ScenarioError> {
        let angle_key = format!("{prefix}_angle");
        let state_key = format!("{prefix}_state");
        match (self.has(&angle_key), self.has(&state_key)) {
            (true, true) => Err(ScenarioError::key(&state_key, format!("give either {angle_key} or {state_key}"))),
            (true, false) => Ok(State::from_angle(self.f64(&angle_key)?.to_radians())),
            (false, true) => {
                let pairs: Vec<[f64; 2]> = serde_json::from_value(self.value(&state_key)?.clone())
                    .map_err(|e| ScenarioError::key(&state_key, format!("expected [re, im] pairs: {e}")))?;
                State::from_slice(&from_pairs(&pairs)).map_err(|e| ScenarioError::key(&state_key, e.to_string()))
            }
            (false, false) => Err(ScenarioError::key(&angle_key, "required key is missing")),
        }
    }

    fn weak_value(&self) -> Result<WeakValueParams, ScenarioError> {
        let (observable, observable_label) = self.observable()?;
        let pre = self.state("pre")?;
        let post = self.state("post")?;
        for (key, s) in [("pre", &pre), ("post", &post)] {
            if s.dim() != observable.dim() {
                return Err(ScenarioError::key(
                    &format!("{key}_state"),
                    format!("dimension {} does not match the observable ({})", s.dim(), observable.dim()),
                ));
            }
        }
        Ok(WeakValueParams {
            observable,
            observable_label,
            pre,
            post,
        })
    }

    fn pointer(&self) -> Result<PointerParams, ScenarioError> {
        let base = self.weak_value()?;
        let width = self.f64("width")?;
        if width <= 0.0 {
            return Err(ScenarioError::key("width", "must be positive"));
        }
        Ok(PointerParams {
            base,
            width,
            coupling: self.f64("coupling")?,
            grid_points: self.opt_u64("grid_points")?.map(|x| x as usize),
            grid_halfwidth: self.opt_f64("grid_halfwidth")?,
        })
    }

    fn band(&self) -> Result<BandParams, ScenarioError> {
        let e_min = self.f64("e_min")?;
        let e_max = self.f64("e_max")?;
        if e_max <= e_min {
            return Err(ScenarioError::key("e_max", "must exceed e_min"));
        }
        let n_grid = self.opt_u64("n_grid")?.map(|x| x as usize).unwrap_or(512);
        if n_grid < 128 {
            return Err(ScenarioError::key("n_grid", "must be at least 128"));
        }
        Ok(BandParams { e_min, e_max, n_grid })
    }

    fn design(&self) -> Result<(usize, f64, f64, f64), ScenarioError> {
        let n = self.usize("n")?;
        if n == 0 {
            return Err(ScenarioError::key("n", "must be at least 1"));
        }
        let tau = self.f64("tau")?;
        if tau <= 0.0 {
            return Err(ScenarioError::key("tau", "must be positive"));
        }
        let ridge = self.opt_f64("ridge")?.unwrap_or(0.0);
        if ridge < 0.0 {
            return Err(ScenarioError::key("ridge", "must be nonnegative"));
        }
        Ok((n, tau, self.f64("t_prime")?, ridge))
    }
}

fn parse_parameters(kind: Kind, map: &Map<String, Value>) -> Result<Parameters, ScenarioError> {
    let allowed = allowed_keys(kind);
    if let Some(unknown) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(ScenarioError::key(
            unknown,
            format!("unknown key for scenario kind '{}'", kind.name()),
        ));
    }
    let p = Params { map };
    Ok(match kind {
        Kind::WeakValue => Parameters::WeakValue(p.weak_value()?),
        Kind::Pointer => Parameters::Pointer(p.pointer()?),
        Kind::Ensemble => {
            let pointer = p.pointer()?;
            let trials = p.u64("trials")?;
            if trials == 0 {
                return Err(ScenarioError::key("trials", "must be at least 1"));
            }
            let block_size = p.opt_u64("block_size")?;
            if block_size == Some(0) {
                return Err(ScenarioError::key("block_size", "must be at least 1"));
            }
            Parameters::Ensemble(EnsembleParams {
                pointer,
                trials,
                block_size,
            })
        }
        Kind::MachineDesign => {
            let (n, tau, t_prime, ridge) = p.design()?;
            Parameters::MachineDesign(DesignParams {
                n,
                tau,
                t_prime,
                band: p.band()?,
                ridge,
            })
        }
        Kind::MachineAudit => {
            let machine = match p.str("machine")? {
                "designed" => {
                    for k in ["pre_angle", "post_angle", "delta", "omega0"] {
                        p.forbid(k, "only used with machine = \"suter\"")?;
                    }
                    let (n, tau, t_prime, ridge) = p.design()?;
                    AuditMachine::Designed { n, tau, t_prime, ridge }
                }
                "suter" => {
                    for k in ["n", "tau", "t_prime", "ridge"] {
                        p.forbid(k, "only used with machine = \"designed\"")?;
                    }
                    let delta = p.f64("delta")?;
                    if delta <= 0.0 {
                        return Err(ScenarioError::key("delta", "must be positive"));
                    }
                    let omega0 = p.f64("omega0")?;
                    if omega0 <= 0.0 {
                        return Err(ScenarioError::key("omega0", "must be positive"));
                    }
                    AuditMachine::Suter {
                        pre_angle: p.f64("pre_angle")?,
                        post_angle: p.f64("post_angle")?,
                        delta,
                        omega0,
                    }
                }
                other => {
                    return Err(ScenarioError::key(
                        "machine",
                        format!("expected \"designed\" or \"suter\", got \"{other}\""),
                    ))
                }
            };
            let dims = p.usize_list("dims")?;
            if dims.contains(&0) {
                return Err(ScenarioError::key("dims", "dimensions must be positive"));
            }
            let states_per_system = p.usize("states_per_system")?;
            if states_per_system == 0 {
                return Err(ScenarioError::key("states_per_system", "must be at least 1"));
            }
            Parameters::MachineAudit(AuditParams {
                machine,
                band: p.band()?,
                dims,
                states_per_system,
            })
        }
        Kind::SuterSweep => {
            let pre_angle = p.f64("pre_angle")?;
            let post_angle = p.f64("post_angle")?;
            let delta = p.f64_list("delta")?;
            if delta.contains(&0.0) {
                return Err(ScenarioError::key("delta", "retardations must be nonzero"));
            }
            Parameters::SuterSweep(SweepParams {
                pre_angle,
                post_angle,
                delta,
            })
        }
        Kind::Packet => {
            let pre_angle = p.f64("pre_angle")?;
            let post_angle = p.f64("post_angle")?;
            let omega0 = p.f64("omega0")?;
            if omega0 <= 0.0 {
                return Err(ScenarioError::key("omega0", "must be positive"));
            }
            let sigma = p.f64("sigma")?;
            if sigma <= 0.0 {
                return Err(ScenarioError::key("sigma", "must be positive"));
            }
            let modes = p.usize("modes")?;
            if modes == 0 {
                return Err(ScenarioError::key("modes", "must be at least 1"));
            }
            let span_sigmas = p.opt_f64("span_sigmas")?.unwrap_or(4.0);
            if span_sigmas <= 0.0 {
                return Err(ScenarioError::key("span_sigmas", "must be positive"));
            }
            let delta0 = p.f64("delta0")?;
            let dispersion = match p.str("dispersion")? {
                "constant" => {
                    p.forbid("slope", "constant dispersion has no slope")?;
                    DispersionParams::Constant { delta0 }
                }
                "linear" => DispersionParams::Linear {
                    delta0,
                    slope: p.f64("slope")?,
                },
                other => {
                    return Err(ScenarioError::key(
                        "dispersion",
                        format!("expected \"constant\" or \"linear\", got \"{other}\""),
                    ))
                }
            };
            Parameters::Packet(PacketParams {
                pre_angle,
                post_angle,
                omega0,
                sigma,
                modes,
                span_sigmas,
                dispersion,
            })
        }
    })
}

pub fn parse_scenario(config_text: &str) -> Result<Scenario, ScenarioError> {
    let source: Value = serde_json::from_str(config_text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let top = source
        .as_object()
        .ok_or_else(|| ScenarioError::key("kind", "scenario must be a JSON object"))?;
    if let Some(unknown) = top.keys().find(|k| !TOP_KEYS.contains(&k.as_str())) {
        return Err(ScenarioError::key(unknown, "unknown top-level key"));
    }
    let kind_name = top
        .get("kind")
        .ok_or_else(|| ScenarioError::key("kind", "required key is missing"))?
        .as_str()
        .ok_or_else(|| ScenarioError::key("kind", "expected a string"))?;
    let kind = Kind::from_name(kind_name)
        .ok_or_else(|| ScenarioError::key("kind", format!("unknown scenario kind '{kind_name}'")))?;
    let seed = match top.get("seed") {
        None => 0,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| ScenarioError::key("seed", "expected a nonnegative integer"))?,
    };
    let output_path = match top.get("output_path") {
        None => None,
        Some(v) => Some(PathBuf::from(
            v.as_str()
                .ok_or_else(|| ScenarioError::key("output_path", "expected a string"))?,
        )),
    };
    let params = top
        .get("parameters")
        .ok_or_else(|| ScenarioError::key("parameters", "required key is missing"))?
        .as_object()
        .ok_or_else(|| ScenarioError::key("parameters", "expected an object"))?;
    let parameters = parse_parameters(kind, params)?;
    Ok(Scenario {
        kind,
        parameters,
        seed,
        output_path,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const WEAK: &str = r#"{
        "kind": "weak_value",
        "parameters": {"observable": "sigma_z", "pre_angle": 45, "post_angle": -44}
    }"#;

    #[test]
    fn minimal_weak_value() {
        let s = parse_scenario(WEAK).unwrap();
        assert_eq!(s.kind, Kind::WeakValue);
        assert_eq!(s.seed, 0);
        assert!(s.output_path.is_none());
        match s.parameters {
            Parameters::WeakValue(p) => {
                assert_eq!(p.observable, HermitianOperator::sigma_z());
                assert!((p.post.amplitudes()[1].re + 44f64.to_radians().sin()).abs() < 1e-15);
            }
            other => panic!("wrong parameters {other:?}"),
        }
    }

    #[test]
    fn missing_delta_for_sweep() {
        let text = r#"{"kind": "suter_sweep", "parameters": {"pre_angle": 45, "post_angle": -44}}"#;
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.offending_key(), Some("delta"));
    }

    #[test]
    fn unknown_key_rejected() {
        let text = r#"{"kind": "weak_value", "parameters": {"observable": "sigma_z", "pre_angle": 45, "post_angle": -44, "gamma_ray": 1}}"#;
        assert_eq!(parse_scenario(text).unwrap_err().offending_key(), Some("gamma_ray"));
        let text = r#"{"kind": "weak_value", "gamma_ray": 1, "parameters": {}}"#;
        assert_eq!(parse_scenario(text).unwrap_err().offending_key(), Some("gamma_ray"));
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_scenario("{\n  \"kind\": \"weak_value\",\n  oops\n}").unwrap_err();
        match err {
            ScenarioError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn type_errors_name_the_key() {
        let text = r#"{"kind": "pointer", "parameters": {"observable": "sigma_z", "pre_angle": 45, "post_angle": -44, "width": "wide", "coupling": 0.1}}"#;
        assert_eq!(parse_scenario(text).unwrap_err().offending_key(), Some("width"));
        let text = r#"{"kind": "weak_value", "parameters": {"observable": [[[0,0],[1,0]],[[0,0],[0,0]]], "pre_angle": 45, "post_angle": -44}}"#;
        assert_eq!(parse_scenario(text).unwrap_err().offending_key(), Some("observable"));
        let text = r#"{"kind": "teleport", "parameters": {}}"#;
        assert_eq!(parse_scenario(text).unwrap_err().offending_key(), Some("kind"));
    }

    #[test]
    fn explicit_states_and_matrices() {
        let text = r#"{"kind": "weak_value", "parameters": {
            "observable": [[[1,0],[0,0]],[[0,0],[-1,0]]],
            "pre_state": [[1,0],[1,0]], "post_state": [[1,0],[0,1]]}}"#;
        let s = parse_scenario(text).unwrap();
        assert!(matches!(s.parameters, Parameters::WeakValue(_)));
        let both = r#"{"kind": "weak_value", "parameters": {"observable": "sigma_z", "pre_angle": 1, "pre_state": [[1,0],[0,0]], "post_angle": 2}}"#;
        assert_eq!(parse_scenario(both).unwrap_err().offending_key(), Some("pre_state"));
    }

    #[test]
    fn audit_machine_variants() {
        let designed = r#"{"kind": "machine_audit", "seed": 3, "parameters": {"machine": "designed", "n": 12, "tau": 0.1, "t_prime": 2.0, "e_min": 0, "e_max": 5, "dims": [2, 4, 8], "states_per_system": 100}}"#;
        let s = parse_scenario(designed).unwrap();
        assert_eq!(s.seed, 3);
        let mixed = r#"{"kind": "machine_audit", "parameters": {"machine": "designed", "delta": 0.1, "n": 12, "tau": 0.1, "t_prime": 2.0, "e_min": 0, "e_max": 5, "dims": [2], "states_per_system": 1}}"#;
        assert_eq!(parse_scenario(mixed).unwrap_err().offending_key(), Some("delta"));
        let suter = r#"{"kind": "machine_audit", "parameters": {"machine": "suter", "pre_angle": 45, "post_angle": -44, "delta": 0.05, "omega0": 1, "e_min": 0, "e_max": 2, "dims": [2], "states_per_system": 5}}"#;
        assert!(parse_scenario(suter).is_ok());
    }

    #[test]
    fn packet_dispersion_rules() {
        let constant_with_slope = r#"{"kind": "packet", "parameters": {"pre_angle": 45, "post_angle": -44, "omega0": 1, "sigma": 0.05, "modes": 64, "dispersion": "constant", "delta0": 0.01, "slope": 1}}"#;
        assert_eq!(parse_scenario(constant_with_slope).unwrap_err().offending_key(), Some("slope"));
        let linear_without = r#"{"kind": "packet", "parameters": {"pre_angle": 45, "post_angle": -44, "omega0": 1, "sigma": 0.05, "modes": 64, "dispersion": "linear", "delta0": 0.01}}"#;
        assert_eq!(parse_scenario(linear_without).unwrap_err().offending_key(), Some("slope"));
    }
}
