use serde::{Deserialize, Serialize};

use super::{switching_ornstein_uhlenbeck, wright_fisher_model, SwitchingDiffusionModel, WrightFisherParams};
use crate::error::Result;

/// JSON descriptor of a built-in model, e.g.
/// `{"model":"wright_fisher","alpha":0,"beta":0,"k":0.5,"phases":4}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelDescriptor {
    WrightFisher {
        alpha: f64,
        beta: f64,
        k: f64,
        phases: usize,
    },
    OrnsteinUhlenbeck,
}

impl ModelDescriptor {
    pub fn wright_fisher(p: WrightFisherParams) -> Self {
        Self::WrightFisher {
            alpha: p.alpha,
            beta: p.beta,
            k: p.k,
            phases: p.n_phases,
        }
    }

    pub fn wright_fisher_params(&self) -> Option<Result<WrightFisherParams>> {
        match *self {
            Self::WrightFisher { alpha, beta, k, phases } => Some(WrightFisherParams::new(alpha, beta, k, phases)),
            Self::OrnsteinUhlenbeck => None,
        }
    }

    pub fn build(&self) -> Result<SwitchingDiffusionModel> {
        match self.wright_fisher_params() {
            Some(p) => wright_fisher_model(p?),
            None => Ok(switching_ornstein_uhlenbeck()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_wright_fisher_descriptor() {
        let d: ModelDescriptor =
            serde_json::from_str(r#"{"model":"wright_fisher","alpha":0,"beta":0,"k":0.5,"phases":4}"#).unwrap();
        let m = d.build().unwrap();
        assert_eq!(m.n_phases(), 4);
        assert_eq!(m.wright_fisher_params().unwrap().k, 0.5);
    }

    #[test]
    fn invalid_parameters_surface_on_build() {
        let d: ModelDescriptor =
            serde_json::from_str(r#"{"model":"wright_fisher","alpha":0,"beta":0,"k":2,"phases":4}"#).unwrap();
        assert!(d.build().is_err());
    }

    #[test]
    fn unknown_model_rejected() {
        assert!(serde_json::from_str::<ModelDescriptor>(r#"{"model":"heston"}"#).is_err());
    }
}
