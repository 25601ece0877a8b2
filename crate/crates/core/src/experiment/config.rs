use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::WorkloadKind;
use crate::obs::SolDispatch;
use crate::workload::SynthSpec;

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Obs,
    Pbc,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Obs => "obs",
            Problem::Pbc => "pbc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gh,
    Sol,
    Rg,
    Exact,
    UpperBound,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gh => "gh",
            Method::Sol => "sol",
            Method::Rg => "rg",
            Method::Exact => "exact",
            Method::UpperBound => "upper_bound",
        }
    }

    pub fn applies_to(self, problem: Problem) -> bool {
        match self {
            Method::Gh | Method::Exact => true,
            Method::Sol => problem == Problem::Obs,
            Method::Rg | Method::UpperBound => problem == Problem::Pbc,
        }
    }
}

/// Where the workloads of every cell come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    /// A trace file, sliced into `repetitions` consecutive blocks or pools.
    /// Homogeneous experiments keep only plain transfers.
    Trace { path: PathBuf },
    /// Generated records, sliced exactly like a trace.
    Synth {
        spec: SynthSpec,
        #[serde(default)]
        seed: u64,
    },
    /// The conflict-stress pool built for each `(p, B)` cell: `B` writers of
    /// one key and `p * B` readers of it.
    Stress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSettings {
    #[serde(default = "default_time_limit")]
    pub time_limit_secs: f64,
    /// Instances with more transactions are skipped.
    #[serde(default = "default_max_n")]
    pub max_n: usize,
}

fn default_time_limit() -> f64 {
    60.0
}

fn default_max_n() -> usize {
    60
}

impl Default for ExactSettings {
    fn default() -> Self {
        ExactSettings {
            time_limit_secs: default_time_limit(),
            max_n: default_max_n(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub csv: Option<PathBuf>,
    pub text: Option<PathBuf>,
}

/// A full experiment grid. `limits` holds round counts `R` for homogeneous
/// workloads and gas budgets `B` for heterogeneous ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub kind: WorkloadKind,
    pub source: Source,
    pub cores: Vec<usize>,
    pub limits: Vec<u64>,
    /// Mempool size factors `X`; ignored for ordered blocks.
    #[serde(default = "default_pool_factors")]
    pub pool_factors: Vec<u64>,
    pub methods: Vec<Method>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub sol_dispatch: SolDispatch,
    #[serde(default)]
    pub exact: ExactSettings,
    #[serde(default)]
    pub output: Output,
}

fn default_pool_factors() -> Vec<u64> {
    vec![1]
}

fn default_repetitions() -> usize {
    5
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    /// Reads a config file; relative paths inside it are resolved against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let mut config = Self::from_toml(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Source::Trace { path } = &mut config.source {
            rebase(path);
        }
        config.output.csv.as_mut().map(rebase);
        config.output.text.as_mut().map(rebase);
        Ok(config)
    }

    fn check(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_owned()));
        if self.cores.contains(&0) {
            return bad("core counts must be positive");
        }
        if self.limits.contains(&0) {
            return bad("limits must be positive");
        }
        if self.pool_factors.is_empty() || self.pool_factors.contains(&0) {
            return bad("pool factors must be positive");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be positive");
        }
        if !(self.exact.time_limit_secs > 0.0 && self.exact.time_limit_secs.is_finite()) {
            return bad("exact time limit must be a positive number of seconds");
        }
        if self.source == Source::Stress && self.kind != WorkloadKind::Homogeneous {
            return bad("the stress source is homogeneous");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
problem = "obs"
kind = "homogeneous"
cores = [2, 4, 8]
limits = [10, 30, 100]
methods = ["gh", "sol"]

[source]
type = "synth"
spec = { kind = "conflict_free", n = 4000, t = 21000 }
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.repetitions, 5);
        assert_eq!(c.pool_factors, vec![1]);
        assert_eq!(c.sol_dispatch, SolDispatch::HeadOfLine);
        assert_eq!(c.exact, ExactSettings::default());
        assert_eq!(
            c.source,
            Source::Synth {
                spec: SynthSpec::ConflictFree { n: 4000, t: 21000 },
                seed: 0
            }
        );
    }

    #[test]
    fn rejects_bad_values() {
        let zero = SAMPLE.replace("[2, 4, 8]", "[0]");
        assert!(matches!(ExperimentConfig::from_toml(&zero), Err(ExperimentError::Config(_))));
        let typo = SAMPLE.replace("methods", "method");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
        let unknown = SAMPLE.replace("\"sol\"", "\"milp\"");
        assert!(ExperimentConfig::from_toml(&unknown).is_err());
    }

    #[test]
    fn relative_paths_follow_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let text = SAMPLE.replace(
            "[source]\ntype = \"synth\"\nspec = { kind = \"conflict_free\", n = 4000, t = 21000 }",
            "output = { csv = \"out.csv\" }\n[source]\ntype = \"trace\"\npath = \"t.jsonl\"",
        );
        let path = dir.path().join("grid.toml");
        fs::write(&path, text).unwrap();
        let c = ExperimentConfig::load(&path).unwrap();
        assert_eq!(c.source, Source::Trace { path: dir.path().join("t.jsonl") });
        assert_eq!(c.output.csv, Some(dir.path().join("out.csv")));
    }
}
