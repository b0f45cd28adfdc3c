//! Versioned parameter file holding everything fitted once and then frozen:
//! the short-circuit current surrogate and the reaction-energy envelope.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tartarus_core::objectives::{
    JscFit, OutlierEnvelope, ScharberConfig, ScharberError, Spectrum,
};

pub const PARAMS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScharberParams {
    pub a: f64,
    pub b: f64,
    pub p_in_mw_cm2: f64,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub center: [f64; 2],
    pub covariance: [[f64; 2]; 2],
    pub threshold: f64,
    pub contamination: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub version: u32,
    pub scharber: ScharberParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeParams>,
}

#[derive(Debug, thiserror::Error)]
pub enum ParamsError {
    #[error("parameter file version {0} is not supported (expected {PARAMS_VERSION})")]
    Version(u32),
    #[error("malformed parameter file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot access parameter file: {0}")]
    Io(#[from] std::io::Error),
}

impl Params {
    pub fn from_spectrum(spectrum: &Spectrum) -> Result<Params, ScharberError> {
        let (cfg, fit) = ScharberConfig::from_spectrum(spectrum)?;
        Ok(Params::new(&cfg, &fit, None))
    }

    pub fn new(cfg: &ScharberConfig, fit: &JscFit, envelope: Option<&OutlierEnvelope>) -> Params {
        let mut p = Params {
            version: PARAMS_VERSION,
            scharber: ScharberParams {
                a: cfg.a,
                b: cfg.b,
                p_in_mw_cm2: cfg.p_in,
                max_rel_error: fit.max_rel_error,
            },
            envelope: None,
        };
        if let Some(e) = envelope {
            p.set_envelope(e);
        }
        p
    }

    pub fn set_envelope(&mut self, e: &OutlierEnvelope) {
        self.envelope = Some(EnvelopeParams {
            center: e.center,
            covariance: e.covariance,
            threshold: e.threshold,
            contamination: e.contamination,
        });
    }

    pub fn scharber_config(&self) -> ScharberConfig {
        ScharberConfig::new(self.scharber.a, self.scharber.b, self.scharber.p_in_mw_cm2)
    }

    pub fn outlier_envelope(&self) -> Option<OutlierEnvelope> {
        self.envelope.as_ref().map(|e| OutlierEnvelope {
            center: e.center,
            covariance: e.covariance,
            threshold: e.threshold,
            contamination: e.contamination,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn from_json(text: &str) -> Result<Params, ParamsError> {
        let p: Params = serde_json::from_str(text)?;
        if p.version != PARAMS_VERSION {
            return Err(ParamsError::Version(p.version));
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Params, ParamsError> {
        Params::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ParamsError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}
