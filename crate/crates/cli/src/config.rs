//! The JSON run configuration (schema 1).
//!
//! Model parameters live at the top level under their paper names
//! (`t1`..`t4`, `N`, `N_d` for the HN chain; `t`, `gamma`, `t0`, `N_L`,
//! `N_R`, `p` for the SSH chain); unknown keys are rejected. Complex
//! amplitudes accept either a plain number or an `[re, im]` pair.

use std::fs;
use std::path::Path;

use nhse_core::builders::{apply_defect_strength, build_hn, build_ssh, HnParams, SshParams};
use nhse_core::classify::Thresholds;
use nhse_core::{Complex64, LatticeSpec};
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

/// Complex amplitude: serialized as a bare number when purely real,
/// otherwise as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cplx(pub Complex64);

impl Cplx {
    pub fn re(v: f64) -> Self {
        Cplx(Complex64::new(v, 0.0))
    }
}

impl Serialize for Cplx {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Cplx {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged, expecting = "a number or an [re, im] pair")]
        enum Raw {
            Re(f64),
            Pair([f64; 2]),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Re(re) => Cplx(Complex64::new(re, 0.0)),
            Raw::Pair([re, im]) => Cplx(Complex64::new(re, im)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Hn,
    Ssh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    #[default]
    Obc,
    Pbc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    #[serde(default = "default_theta_b")]
    pub theta_b: f64,
    #[serde(default = "default_theta_d")]
    pub theta_d: f64,
    #[serde(default = "default_window")]
    pub w: usize,
    #[serde(default = "default_eps_loop")]
    pub eps_loop: f64,
    #[serde(default = "default_eps_deg")]
    pub eps_deg: f64,
}

fn default_theta_b() -> f64 {
    0.25
}
fn default_theta_d() -> f64 {
    0.20
}
fn default_window() -> usize {
    5
}
fn default_eps_loop() -> f64 {
    1e-3
}
fn default_eps_deg() -> f64 {
    1e-8
}
fn default_n_k() -> usize {
    512
}
fn default_true() -> bool {
    true
}
fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::SpectrumCsv, OutputKind::StatesCsv]
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            theta_b: default_theta_b(),
            theta_d: default_theta_d(),
            w: default_window(),
            eps_loop: default_eps_loop(),
            eps_deg: default_eps_deg(),
        }
    }
}

impl ThresholdConfig {
    pub fn to_core(self) -> Thresholds {
        Thresholds {
            theta_b: self.theta_b,
            theta_d: self.theta_d,
            window: self.w,
            eps_loop_rel: self.eps_loop,
            eps_deg: self.eps_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Name of a real scalar field of the chosen model's parameter record.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    SpectrumCsv,
    StatesCsv,
    LoopCsv,
    SvgSpectrum,
    SvgProfiles,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalSizeConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub n_step: usize,
}

impl Default for CriticalSizeConfig {
    fn default() -> Self {
        CriticalSizeConfig {
            n_min: 20,
            n_max: 300,
            n_step: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapScanConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
}

impl Default for GapScanConfig {
    fn default() -> Self {
        GapScanConfig {
            t_min: -2.0,
            t_max: 0.0,
            step: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub model: ModelKind,

    #[serde(default = "default_true")]
    pub with_defect: bool,
    #[serde(default)]
    pub bc: BcKind,
    #[serde(default = "default_n_k")]
    pub n_k: usize,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,

    // Hatano-Nelson parameters (paper names)
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "N_d", default, skip_serializing_if = "Option::is_none")]
    pub n_d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t3: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t4: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1p: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2p: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t3p: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t4p: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1pp: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2pp: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t3pp: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t4pp: Option<Cplx>,

    // SSH parameters
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0p: Option<f64>,
    #[serde(rename = "N_L", default, skip_serializing_if = "Option::is_none")]
    pub n_l: Option<usize>,
    #[serde(rename = "N_R", default, skip_serializing_if = "Option::is_none")]
    pub n_r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,

    // subcommand-specific sections
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_size: Option<CriticalSizeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_scan: Option<GapScanConfig>,
}

const HN_SWEEPABLE: &[&str] = &[
    "t1", "t2", "t3", "t4", "t1p", "t2p", "t3p", "t4p", "t1pp", "t2pp", "t3pp", "t4pp",
];
const SSH_SWEEPABLE: &[&str] = &[
    "t", "gamma", "t0", "t0p", "t1pp", "t2pp", "t3pp", "t4pp", "p",
];

impl RunConfig {
    fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
        v.ok_or_else(|| CliError::Config(format!("missing required key \"{key}\"")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(CliError::Config(format!(
                "unsupported schema version {} (expected 1)",
                self.schema
            )));
        }
        if self.n_k < 64 {
            return Err(CliError::Config(format!(
                "n_k = {} below the minimum of 64",
                self.n_k
            )));
        }
        let mut seen = Vec::new();
        for o in &self.outputs {
            if seen.contains(o) {
                return Err(CliError::Config(format!("duplicate output kind {o:?}")));
            }
            seen.push(*o);
        }
        match self.model {
            ModelKind::Hn => {
                self.hn_params()?;
            }
            ModelKind::Ssh => {
                self.ssh_params()?;
            }
        }
        if let Some(sweep) = &self.sweep {
            let allowed = match self.model {
                ModelKind::Hn => HN_SWEEPABLE,
                ModelKind::Ssh => SSH_SWEEPABLE,
            };
            if !allowed.contains(&sweep.parameter.as_str()) {
                return Err(CliError::Config(format!(
                    "sweep parameter \"{}\" is not a real scalar field of the {:?} model",
                    sweep.parameter, self.model
                )));
            }
            if sweep.values.is_empty() {
                return Err(CliError::Config("sweep values list is empty".into()));
            }
        }
        Ok(())
    }

    pub fn hn_params(&self) -> Result<HnParams> {
        if self.model != ModelKind::Hn {
            return Err(CliError::Config(
                "this operation requires model = \"hn\"".into(),
            ));
        }
        let n = Self::require(self.n, "N")?;
        let t1 = Self::require(self.t1, "t1")?.0;
        let t2 = Self::require(self.t2, "t2")?.0;
        let t3 = Self::require(self.t3, "t3")?.0;
        let t4 = Self::require(self.t4, "t4")?.0;
        let or = |v: Option<Cplx>, bulk: Complex64| v.map_or(bulk, |c| c.0);
        Ok(HnParams {
            n_sites: n,
            defect_site: self.n_d.unwrap_or(n / 2),
            t1,
            t2,
            t3,
            t4,
            t1_p: or(self.t1p, t1),
            t2_p: or(self.t2p, t2),
            t1_pp: or(self.t1pp, t1),
            t2_pp: or(self.t2pp, t2),
            t3_p: or(self.t3p, t3),
            t4_p: or(self.t4p, t4),
            t3_pp: or(self.t3pp, t3),
            t4_pp: or(self.t4pp, t4),
        })
    }

    pub fn ssh_params(&self) -> Result<SshParams> {
        if self.model != ModelKind::Ssh {
            return Err(CliError::Config(
                "this operation requires model = \"ssh\"".into(),
            ));
        }
        let real = |v: Option<Cplx>, key: &str| -> Result<f64> {
            match v {
                None => Ok(0.0),
                Some(c) if c.0.im == 0.0 => Ok(c.0.re),
                Some(_) => Err(CliError::Config(format!(
                    "SSH parameter \"{key}\" must be real"
                ))),
            }
        };
        let params = SshParams {
            t: Self::require(self.t, "t")?,
            gamma: Self::require(self.gamma, "gamma")?,
            t0: self.t0.unwrap_or(1.0),
            t0_p: self.t0p.unwrap_or(0.0),
            t1_pp: real(self.t1pp, "t1pp")?,
            t2_pp: real(self.t2pp, "t2pp")?,
            t3_pp: real(self.t3pp, "t3pp")?,
            t4_pp: real(self.t4pp, "t4pp")?,
            p: self.p.unwrap_or(0.0),
            n_cells_left: Self::require(self.n_l, "N_L")?,
            n_cells_right: Self::require(self.n_r, "N_R")?,
        };
        if self.p.is_some() {
            return Ok(apply_defect_strength(&params)?);
        }
        Ok(params)
    }

    /// Build the lattice spec and return it with the 0-based defect site.
    pub fn build_spec(&self) -> Result<(LatticeSpec, usize)> {
        match self.model {
            ModelKind::Hn => {
                let p = self.hn_params()?;
                let spec = build_hn(&p, self.with_defect)?;
                Ok((spec, p.defect_site.saturating_sub(1)))
            }
            ModelKind::Ssh => {
                let p = self.ssh_params()?;
                let spec = build_ssh(&p, self.with_defect)?;
                Ok((spec, 2 * p.n_cells_left))
            }
        }
    }

    pub fn core_thresholds(&self) -> Thresholds {
        self.thresholds.to_core()
    }

    /// Overwrite one sweepable parameter with a new value.
    pub fn apply_sweep_value(&mut self, parameter: &str, value: f64) -> Result<()> {
        let slot_c: Option<&mut Option<Cplx>> = match parameter {
            "t1" => Some(&mut self.t1),
            "t2" => Some(&mut self.t2),
            "t3" => Some(&mut self.t3),
            "t4" => Some(&mut self.t4),
            "t1p" => Some(&mut self.t1p),
            "t2p" => Some(&mut self.t2p),
            "t3p" => Some(&mut self.t3p),
            "t4p" => Some(&mut self.t4p),
            "t1pp" => Some(&mut self.t1pp),
            "t2pp" => Some(&mut self.t2pp),
            "t3pp" => Some(&mut self.t3pp),
            "t4pp" => Some(&mut self.t4pp),
            _ => None,
        };
        if self.model == ModelKind::Hn || matches!(parameter, "t1pp" | "t2pp" | "t3pp" | "t4pp") {
            if let Some(slot) = slot_c {
                *slot = Some(Cplx::re(value));
                return Ok(());
            }
        }
        let slot_f: &mut Option<f64> = match parameter {
            "t" => &mut self.t,
            "gamma" => &mut self.gamma,
            "t0" => &mut self.t0,
            "t0p" => &mut self.t0p,
            "p" => &mut self.p,
            _ => {
                return Err(CliError::Config(format!(
                    "cannot sweep parameter \"{parameter}\" for model {:?}",
                    self.model
                )))
            }
        };
        *slot_f = Some(value);
        Ok(())
    }
}

/// Parse and fully validate a config file; parse errors carry line/column,
/// schema violations name the offending key.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn write_config(cfg: &RunConfig, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(cfg).map_err(|e| CliError::Config(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            serde_json::from_str(json).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn minimal_hn_config_fills_defaults() {
        let cfg =
            parse(r#"{"schema":1,"model":"hn","N":50,"N_d":25,"t1":1,"t2":0.6,"t3":1,"t4":0.75}"#)
                .unwrap();
        assert_eq!(cfg.n_k, 512);
        assert_eq!(cfg.thresholds.w, 5);
        assert_eq!(cfg.thresholds.theta_b, 0.25);
        assert!(cfg.with_defect);
        let p = cfg.hn_params().unwrap();
        // unspecified defect couplings default to their bulk partners
        assert_eq!(p.t1_p, p.t1);
        assert_eq!(p.t4_pp, p.t4);
    }

    #[test]
    fn unknown_key_is_named() {
        let err =
            parse(r#"{"schema":1,"model":"hn","N":50,"t1":1,"t2":0.6,"t3":1,"t4":0.75,"t5":2}"#)
                .unwrap_err();
        assert!(err.to_string().contains("t5"), "{err}");
    }

    #[test]
    fn sweep_plan_parses() {
        let cfg = parse(
            r#"{"schema":1,"model":"ssh","t":-1.0,"gamma":0.4,"N_L":25,"N_R":25,
               "sweep":{"parameter":"gamma","values":[0.2,0.4,0.49,0.6]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.sweep.as_ref().unwrap().values.len(), 4);
    }

    #[test]
    fn rejects_bad_sweep_parameter() {
        let err = parse(
            r#"{"schema":1,"model":"ssh","t":-1.0,"gamma":0.4,"N_L":25,"N_R":25,
               "sweep":{"parameter":"N_L","values":[1,2]}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("N_L"));
    }

    #[test]
    fn complex_amplitudes_accept_pairs() {
        let cfg =
            parse(r#"{"schema":1,"model":"hn","N":50,"t1":[1,0.5],"t2":0.6,"t3":1,"t4":0.75}"#)
                .unwrap();
        assert_eq!(cfg.t1.unwrap().0, Complex64::new(1.0, 0.5));
    }

    #[test]
    fn ssh_p_applies_defect_strength() {
        let cfg =
            parse(r#"{"schema":1,"model":"ssh","t":-1.0,"gamma":0.4,"N_L":25,"N_R":25,"p":0.3}"#)
                .unwrap();
        let p = cfg.ssh_params().unwrap();
        assert!((p.t0_p - 0.3).abs() < 1e-15);
        assert!((p.t1_pp - 0.3 * p.t3()).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let dir = std::env::temp_dir().join("nhse-config-roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        let cfg = parse(
            r#"{"schema":1,"model":"hn","N":50,"N_d":25,"t1":[1,0.25],"t2":0.6,"t3":1,"t4":0.75,
               "t2p":0,"t1pp":0,"t4p":0,"t3pp":0,"n_k":128,
               "thresholds":{"theta_b":0.3},
               "outputs":["states_csv","svg_spectrum"]}"#,
        )
        .unwrap();
        write_config(&cfg, &path).unwrap();
        let reloaded = load_config(&path).unwrap();
        assert_eq!(cfg, reloaded);
    }
}
