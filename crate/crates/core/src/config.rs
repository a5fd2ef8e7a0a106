//! JSON model documents: `{"A1","A2","gamma","alpha","mu","rho_minus","n_minus","u_minus","u_plus"}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{complete_far_field, FarFieldData, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub mu: f64,
    pub rho_minus: f64,
    pub n_minus: f64,
    pub u_minus: f64,
    pub u_plus: f64,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<(ModelParams, FarFieldData)> {
        let params = ModelParams::new(self.a1, self.a2, self.gamma, self.alpha, self.mu)?;
        let far = complete_far_field(
            &params,
            self.rho_minus,
            self.n_minus,
            self.u_minus,
            self.u_plus,
        )?;
        Ok((params, far))
    }

    /// Document for a prescribed far state `(ρ₊, n₊, u₊)` and inflow speed `u₋`.
    pub fn from_far_state(
        params: &ModelParams,
        rho_plus: f64,
        n_plus: f64,
        u_plus: f64,
        u_minus: f64,
    ) -> Self {
        Self {
            a1: params.a1(),
            a2: params.a2(),
            gamma: params.gamma(),
            alpha: params.alpha(),
            mu: params.mu(),
            rho_minus: rho_plus * u_plus / u_minus,
            n_minus: n_plus * u_plus / u_minus,
            u_minus,
            u_plus,
        }
    }
}
