use std::fmt;

/// Settings of the observation-realism pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealismConfig {
    /// Pose latency in control steps.
    pub latency_steps: usize,
    pub sigma_xyz: f64,
    pub sigma_rpy: f64,
    pub lowpass_alpha: f64,
    pub diff_window: usize,
    pub stack_k: usize,
}

impl Default for RealismConfig {
    fn default() -> Self {
        Self {
            latency_steps: 2,
            sigma_xyz: 0.01,
            sigma_rpy: 0.01,
            lowpass_alpha: 0.3,
            diff_window: 7,
            stack_k: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("realism config `{key}`: {reason}")]
pub struct RealismError {
    pub key: String,
    pub reason: String,
}

impl RealismConfig {
    pub const KEYS: [&'static str; 6] = [
        "latency_steps",
        "sigma_xyz",
        "sigma_rpy",
        "lowpass_alpha",
        "diff_window",
        "stack_k",
    ];

    /// No latency and no noise; filtering and differentiation stay on.
    pub fn clean() -> Self {
        Self {
            latency_steps: 0,
            sigma_xyz: 0.0,
            sigma_rpy: 0.0,
            ..Self::default()
        }
    }

    /// Also switches the z lowpass off, leaving only the differentiator.
    pub fn disabled() -> Self {
        Self {
            lowpass_alpha: 1.0,
            ..Self::clean()
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), RealismError> {
        let err = |reason: String| RealismError {
            key: key.to_string(),
            reason,
        };
        let float = || value.trim().parse::<f64>().map_err(|e| err(format!("{value:?}: {e}")));
        let int = || value.trim().parse::<usize>().map_err(|e| err(format!("{value:?}: {e}")));
        match key {
            "latency_steps" => self.latency_steps = int()?,
            "sigma_xyz" => self.sigma_xyz = float()?,
            "sigma_rpy" => self.sigma_rpy = float()?,
            "lowpass_alpha" => self.lowpass_alpha = float()?,
            "diff_window" => self.diff_window = int()?,
            "stack_k" => self.stack_k = int()?,
            _ => return Err(err("unknown key".into())),
        }
        self.validate()
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "latency_steps" => self.latency_steps.to_string(),
            "sigma_xyz" => self.sigma_xyz.to_string(),
            "sigma_rpy" => self.sigma_rpy.to_string(),
            "lowpass_alpha" => self.lowpass_alpha.to_string(),
            "diff_window" => self.diff_window.to_string(),
            "stack_k" => self.stack_k.to_string(),
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), RealismError> {
        let bad = |key: &str, reason: &str| {
            Err(RealismError {
                key: key.into(),
                reason: reason.into(),
            })
        };
        if !(self.sigma_xyz >= 0.0 && self.sigma_xyz.is_finite()) {
            return bad("sigma_xyz", "must be a finite value >= 0");
        }
        if !(self.sigma_rpy >= 0.0 && self.sigma_rpy.is_finite()) {
            return bad("sigma_rpy", "must be a finite value >= 0");
        }
        if !(self.lowpass_alpha > 0.0 && self.lowpass_alpha <= 1.0) {
            return bad("lowpass_alpha", "must lie in (0, 1]");
        }
        if self.diff_window < 3 || self.diff_window % 2 == 0 {
            return bad("diff_window", "must be odd and >= 3");
        }
        if self.stack_k == 0 {
            return bad("stack_k", "must be >= 1");
        }
        Ok(())
    }
}

impl fmt::Display for RealismConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in Self::KEYS.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{k}={}", self.get(k).unwrap())?;
        }
        Ok(())
    }
}
