use std::fmt;
use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use dpgdp::accountant::DEFAULT_GRID_STEP;
use dpgdp::{MechanismEntry, MechanismKind, MechanismSpec, RunConfig};

use crate::args::RunArgs;

pub const GRID_STEP_ENV: &str = "DPGDP_GRID_STEP";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Library(dpgdp::Error),
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Library(e) => match e {
                dpgdp::Error::NoFiniteMu { .. } => 3,
                dpgdp::Error::InvalidParam(_)
                | dpgdp::Error::InvalidOrder(_)
                | dpgdp::Error::NonBracketed { .. }
                | dpgdp::Error::GridMismatch(..) => 2,
                _ => 1,
            },
            CliError::Write { .. } => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Library(e) => e.fmt(f),
            CliError::Write { path, source } => write!(f, "cannot write {}: {source}", path.display()),
        }
    }
}

impl From<dpgdp::Error> for CliError {
    fn from(e: dpgdp::Error) -> Self {
        CliError::Library(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Writes `content` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, content: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, content).map_err(|source| CliError::Write { path: p.to_path_buf(), source }),
        None => match std::io::stdout().lock().write_all(content.as_bytes()) {
            Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CliError::Write { path: "<stdout>".into(), source: e }),
            _ => Ok(()),
        },
    }
}

/// Grid step from the flag, else the environment, else the default.
pub fn grid_step_fallback(flag: Option<f64>) -> CliResult<f64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(GRID_STEP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{GRID_STEP_ENV}={v} is not a number"))),
        Err(_) => Ok(DEFAULT_GRID_STEP),
    }
}

fn has_mechanism_flags(a: &RunArgs) -> bool {
    a.mechanism.is_some()
        || a.sigma.is_some()
        || a.mu.is_some()
        || a.sample_rate.is_some()
        || a.scale.is_some()
        || a.mech_epsilon.is_some()
        || a.mech_delta.is_some()
}

fn infer_kind(a: &RunArgs) -> Option<MechanismKind> {
    if let Some(m) = a.mechanism {
        return Some(m.into());
    }
    if a.sample_rate.is_some() {
        Some(MechanismKind::SubsampledGaussian)
    } else if a.sigma.is_some() || a.mu.is_some() {
        Some(MechanismKind::Gaussian)
    } else if a.scale.is_some() {
        Some(MechanismKind::Laplace)
    } else if a.mech_delta.is_some() {
        Some(MechanismKind::AdpPoint)
    } else if a.mech_epsilon.is_some() {
        Some(MechanismKind::RandomizedResponse)
    } else {
        None
    }
}

fn apply_flags(spec: &mut MechanismSpec, a: &RunArgs) {
    if let Some(k) = a.mechanism {
        spec.kind = k.into();
    }
    if a.sigma.is_some() {
        spec.sigma = a.sigma;
        if a.mu.is_none() {
            spec.mu = None;
        }
    }
    if a.mu.is_some() {
        spec.mu = a.mu;
    }
    if a.sample_rate.is_some() {
        spec.q = a.sample_rate;
    }
    if a.scale.is_some() {
        spec.b = a.scale;
    }
    if a.mech_epsilon.is_some() {
        spec.eps = a.mech_epsilon;
    }
    if a.mech_delta.is_some() {
        spec.delta = a.mech_delta;
    }
}

fn read_config(path: &Path) -> CliResult<(RunConfig, bool)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let has_step = value.get("grid_step").is_some();
    let config = serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok((config, has_step))
}

/// Builds the run configuration from `--config` and the mechanism flags.
pub fn resolve(a: &RunArgs) -> CliResult<RunConfig> {
    let (mut config, config_step) = match &a.config {
        Some(p) => read_config(p)?,
        None => {
            let kind = infer_kind(a).ok_or_else(|| {
                CliError::Usage("describe the run with --config or mechanism flags such as --sigma".into())
            })?;
            let spec = MechanismSpec {
                kind,
                sigma: None,
                mu: None,
                q: None,
                b: None,
                eps: None,
                delta: None,
                direction: Default::default(),
            };
            (RunConfig::new(vec![MechanismEntry::new(spec, 1)]), false)
        }
    };
    let single = config.mechanisms.len() == 1;
    if has_mechanism_flags(a) || a.steps.is_some() {
        if !single {
            return Err(CliError::Usage("mechanism flags and --steps need a config with exactly one mechanism".into()));
        }
        let entry = &mut config.mechanisms[0];
        apply_flags(&mut entry.mechanism, a);
        if let Some(t) = a.steps {
            entry.count = t;
        }
    }
    if let Some(d) = a.direction {
        for e in &mut config.mechanisms {
            e.mechanism.direction = d.into();
        }
    }
    if a.grid_step.is_some() || !config_step {
        config.grid_step = grid_step_fallback(a.grid_step)?;
    }
    if a.output.is_some() {
        config.output.clone_from(&a.output);
    }
    config.validate()?;
    Ok(config)
}
