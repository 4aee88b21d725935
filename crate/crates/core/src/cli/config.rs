use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::mesh::Clock;
use crate::physics::{load_model, BodyModel};
use crate::rl::{AlgoConfig, Algorithm, TrainConfig};
use crate::sensors::RealismConfig;
use crate::tasks::TaskId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    InProcess,
    /// Spawn control, pose and rollout-server children on loopback.
    Mesh,
    /// Connect to an already running rollout server.
    MeshDistributed,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::InProcess => "in-process",
            Mode::Mesh => "mesh",
            Mode::MeshDistributed => "mesh-distributed",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "in-process" => Ok(Mode::InProcess),
            "mesh" => Ok(Mode::Mesh),
            "mesh-distributed" => Ok(Mode::MeshDistributed),
            _ => Err(format!("unknown mode {s:?} (in-process, mesh, mesh-distributed)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{key}: {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

fn config_err(key: &str, reason: impl ToString) -> ConfigError {
    ConfigError {
        key: key.into(),
        reason: reason.to_string(),
    }
}

/// A fully specified training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: TaskId,
    pub algorithm: Algorithm,
    pub episodes: usize,
    pub seed: u64,
    pub realism: RealismConfig,
    /// Physics config file; `None` is the built-in model.
    pub physics: Option<PathBuf>,
    pub friction: Option<f64>,
    pub dense: Option<bool>,
    pub updates: Option<usize>,
    pub mode: Mode,
    pub clock: Clock,
    pub server: Option<String>,
}

impl RunConfig {
    pub fn new(task: TaskId, algorithm: Algorithm, episodes: usize, seed: u64) -> Self {
        Self {
            task,
            algorithm,
            episodes,
            seed,
            realism: RealismConfig::default(),
            physics: None,
            friction: None,
            dense: None,
            updates: None,
            mode: Mode::InProcess,
            clock: Clock::Lockstep,
            server: None,
        }
    }

    pub fn model(&self) -> Result<BodyModel, ConfigError> {
        let mut m = match &self.physics {
            Some(p) => load_model(p).map_err(|e| config_err("physics", e))?,
            None => BodyModel::default(),
        };
        if let Some(mu) = self.friction {
            m.contact.friction_coeff = mu;
            m.validate().map_err(|e| config_err("friction", e))?;
        }
        Ok(m)
    }

    pub fn algo(&self) -> AlgoConfig {
        let mut a = AlgoConfig::for_algorithm(self.algorithm);
        if let Some(d) = self.dense {
            a.dense = d;
        }
        if let Some(u) = self.updates {
            a.updates_per_episode = u;
        }
        a
    }

    /// Check flag combinations that no command accepts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.episodes == 0 {
            return Err(config_err("episodes", "must be >= 1"));
        }
        self.realism.validate().map_err(|e| config_err(&e.key, e.reason))?;
        self.algo().validate().map_err(|e| config_err(&e.key, e.reason))?;
        match (self.mode, &self.server) {
            (Mode::MeshDistributed, None) => return Err(config_err("server", "mesh-distributed mode needs --server")),
            (Mode::InProcess | Mode::Mesh, Some(_)) => {
                return Err(config_err("server", "--server is only used in mesh-distributed mode"))
            }
            _ => {}
        }
        if self.mode == Mode::InProcess && self.clock != Clock::Lockstep {
            return Err(config_err("clock", "the in-process mode has no clock to configure"));
        }
        Ok(())
    }

    pub fn train_config(&self) -> Result<TrainConfig, ConfigError> {
        Ok(TrainConfig {
            realism: self.realism,
            model: self.model()?,
            ..TrainConfig::new(self.task, self.algo(), self.episodes, self.seed)
        })
    }

    /// `key = value` lines echoing the resolved configuration. `physics`
    /// names the model file written next to the manifest.
    pub fn manifest(&self, physics_file: &str) -> Result<String, ConfigError> {
        let algo = self.algo();
        let model = self.model()?;
        let mut out = String::from("# realant run manifest\n");
        let mut kv = |k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("task", &self.task);
        kv("algo", &self.algorithm);
        kv("episodes", &self.episodes);
        kv("seed", &self.seed);
        for k in RealismConfig::KEYS {
            kv(k, &self.realism.get(k).unwrap());
        }
        kv("dense", &algo.dense);
        kv("updates", &algo.updates_per_episode);
        kv("friction", &format!("{:?}", model.contact.friction_coeff));
        kv("physics", &physics_file);
        kv("mode", &self.mode);
        kv("clock", &self.clock);
        if let Some(s) = &self.server {
            kv("server", s);
        }
        Ok(out)
    }

    /// Parse a manifest; relative `physics` paths resolve against `base`.
    pub fn from_manifest(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::new(TaskId::Sleep, Algorithm::Td3, 1, 0);
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("line {}: expected `key = value`", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let parse = |what: &str| config_err(k, format!("bad {what} {v:?}"));
            match k {
                "task" => cfg.task = v.parse().map_err(|e: String| config_err(k, e))?,
                "algo" => cfg.algorithm = v.parse().map_err(|e: String| config_err(k, e))?,
                "episodes" => cfg.episodes = v.parse().map_err(|_| parse("count"))?,
                "seed" => cfg.seed = v.parse().map_err(|_| parse("seed"))?,
                "dense" => cfg.dense = Some(v.parse().map_err(|_| parse("boolean"))?),
                "updates" => cfg.updates = Some(v.parse().map_err(|_| parse("count"))?),
                "friction" => cfg.friction = Some(v.parse().map_err(|_| parse("number"))?),
                "physics" => cfg.physics = (v != "builtin").then(|| base.join(v)),
                "mode" => cfg.mode = v.parse().map_err(|e: String| config_err(k, e))?,
                "clock" => cfg.clock = v.parse().map_err(|e: String| config_err(k, e))?,
                "server" => cfg.server = Some(v.to_string()),
                _ if RealismConfig::KEYS.contains(&k) => {
                    cfg.realism.set(k, v).map_err(|e| config_err(&e.key, e.reason))?
                }
                _ => return Err(config_err(k, "unknown manifest key")),
            }
            seen.push(k.to_string());
        }
        for required in ["task", "algo", "episodes", "seed"] {
            if !seen.iter().any(|k| k == required) {
                return Err(config_err(required, "missing from manifest"));
            }
        }
        Ok(cfg)
    }
}
