use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Td3,
    Sac,
    Redq,
}

impl Algorithm {
    pub fn code(self) -> u8 {
        match self {
            Algorithm::Td3 => 1,
            Algorithm::Sac => 2,
            Algorithm::Redq => 3,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            1 => Some(Algorithm::Td3),
            2 => Some(Algorithm::Sac),
            3 => Some(Algorithm::Redq),
            _ => None,
        }
    }

    /// Stochastic heads output a mean and a log-std per action dimension.
    pub fn is_stochastic(self) -> bool {
        !matches!(self, Algorithm::Td3)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Td3 => "td3",
            Algorithm::Sac => "sac",
            Algorithm::Redq => "redq",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "td3" => Ok(Algorithm::Td3),
            "sac" => Ok(Algorithm::Sac),
            "redq" => Ok(Algorithm::Redq),
            other => Err(format!("unknown algorithm `{other}` (expected td3, sac or redq)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("algorithm config `{key}`: {reason}")]
pub struct AlgoConfigError {
    pub key: String,
    pub reason: String,
}

/// Hyperparameters of one learning run.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoConfig {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub tau: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub updates_per_episode: usize,
    /// Critic count: 2 for TD3/SAC, the ensemble size N for REDQ.
    pub n_critics: usize,
    /// Target-subset size M.
    pub subset_size: usize,
    /// Critic updates per actor update.
    pub policy_delay: usize,
    pub explore_std: f64,
    pub target_noise: f64,
    pub target_noise_clip: f64,
    pub init_alpha: f64,
    pub target_entropy: f64,
    pub hidden: Vec<usize>,
    pub dense: bool,
    pub replay_capacity: usize,
    pub warmup_episodes: usize,
}

impl AlgoConfig {
    pub fn td3() -> Self {
        Self {
            algorithm: Algorithm::Td3,
            gamma: 0.99,
            tau: 0.005,
            lr: 3e-4,
            batch_size: 256,
            updates_per_episode: 200,
            n_critics: 2,
            subset_size: 2,
            policy_delay: 2,
            explore_std: 0.1,
            target_noise: 0.2,
            target_noise_clip: 0.5,
            init_alpha: 0.2,
            target_entropy: -8.0,
            hidden: vec![256, 256, 256],
            dense: true,
            replay_capacity: 100_000,
            warmup_episodes: 10,
        }
    }

    pub fn sac() -> Self {
        Self {
            algorithm: Algorithm::Sac,
            policy_delay: 1,
            ..Self::td3()
        }
    }

    pub fn redq() -> Self {
        Self {
            algorithm: Algorithm::Redq,
            updates_per_episode: 2000,
            n_critics: 10,
            subset_size: 2,
            policy_delay: 10,
            ..Self::sac()
        }
    }

    pub fn for_algorithm(a: Algorithm) -> Self {
        match a {
            Algorithm::Td3 => Self::td3(),
            Algorithm::Sac => Self::sac(),
            Algorithm::Redq => Self::redq(),
        }
    }

    pub fn validate(&self) -> Result<(), AlgoConfigError> {
        let bad = |key: &str, reason: String| {
            Err(AlgoConfigError {
                key: key.into(),
                reason,
            })
        };
        if self.n_critics == 0 {
            return bad("n_critics", "must be >= 1".into());
        }
        if self.algorithm == Algorithm::Td3 && self.n_critics != 2 {
            return bad("n_critics", "TD3 uses exactly two critics".into());
        }
        if self.subset_size == 0 || self.subset_size > self.n_critics {
            return bad(
                "subset_size",
                format!("M = {} must lie in 1..=N = {}", self.subset_size, self.n_critics),
            );
        }
        if self.policy_delay == 0 {
            return bad("policy_delay", "must be >= 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma", "must lie in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau", "must lie in [0, 1]".into());
        }
        if !(self.lr >= 0.0) {
            return bad("lr", "must be >= 0".into());
        }
        if !(self.init_alpha > 0.0) {
            return bad("init_alpha", "must be > 0".into());
        }
        if self.replay_capacity == 0 {
            return bad("replay_capacity", "must be >= 1".into());
        }
        Ok(())
    }
}
