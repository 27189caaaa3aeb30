//! Plain-text `key = value` experiment configuration.
//!
//! Unknown keys are rejected, and every run embeds its full resolved
//! configuration as comment lines in the output CSV so results stay
//! reproducible from the file alone.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::euler::{InitialData, RunConfig};
use crate::iteration::IterationConfig;
use crate::spaces::SpaceSpec;
use crate::weights::SlowlyVaryingWeight;

/// Parsed `key = value` document.
#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    pairs: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value, got {line}", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if pairs.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("duplicate key {key}")));
            }
        }
        Ok(KvConfig { pairs })
    }

    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for key in self.pairs.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "unknown config key {key}; allowed: {}",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.pairs.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::Parse(format!("bad value for {key}: {e}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing required config key {key}")))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.pairs.get(key).map(String::as_str)
    }
}

fn parse_bool(raw: Option<&str>, default: bool, key: &str) -> Result<bool> {
    match raw {
        None => Ok(default),
        Some("true") | Some("1") => Ok(true),
        Some("false") | Some("0") => Ok(false),
        Some(other) => Err(Error::Parse(format!("bad boolean for {key}: {other}"))),
    }
}

fn parse_lp_exponents(raw: Option<&str>) -> Result<Vec<f64>> {
    match raw {
        None => Ok(vec![2.0]),
        Some(text) => text
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad lp exponent {v}: {e}")))
            })
            .collect(),
    }
}

const SIMULATE_KEYS: [&str; 14] = [
    "grid_n",
    "domain_l",
    "dt",
    "t_end",
    "cfl",
    "dealias",
    "init",
    "space",
    "weight",
    "lp_exponents",
    "sample_every",
    "seed",
    "out",
    "log_level",
];

const ITERATE_KEYS: [&str; 17] = [
    "grid_n",
    "domain_l",
    "dt",
    "t_end",
    "cfl",
    "dealias",
    "init",
    "space",
    "weight",
    "lp_exponents",
    "sample_every",
    "seed",
    "out",
    "log_level",
    "n_max",
    "enforce_t0",
    "c_empirical",
];

/// Fully resolved `simulate` experiment.
#[derive(Debug, Clone)]
pub struct SimulateExperiment {
    pub run: RunConfig,
    pub out: Option<String>,
    pub log_level: String,
}

impl SimulateExperiment {
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        kv.reject_unknown(&SIMULATE_KEYS)?;
        let weight = SlowlyVaryingWeight::parse_spec(kv.raw("weight").unwrap_or("log:alpha=1"))?;
        let space = SpaceSpec::parse(kv.raw("space").unwrap_or("B:s=2,p=2,q=2"), weight)?;
        let run = RunConfig {
            grid_n: kv.get_required("grid_n")?,
            domain_l: kv.get_or("domain_l", std::f64::consts::TAU)?,
            dt: kv.get_required("dt")?,
            t_end: kv.get_required("t_end")?,
            cfl: kv.get_or("cfl", 0.5)?,
            dealias: parse_bool(kv.raw("dealias"), true, "dealias")?,
            init: InitialData::parse(kv.raw("init").unwrap_or("taylor"))?,
            space,
            lp_exponents: parse_lp_exponents(kv.raw("lp_exponents"))?,
            sample_every: kv.get_or("sample_every", 1)?,
            seed: kv.get_or("seed", 0)?,
        };
        run.validate()?;
        Ok(SimulateExperiment {
            run,
            out: kv.raw("out").map(str::to_string),
            log_level: kv.raw("log_level").unwrap_or("info").to_string(),
        })
    }

    /// Resolved key/value pairs for the CSV header.
    pub fn resolved(&self) -> Vec<(String, String)> {
        let r = &self.run;
        let mut out = vec![
            ("cfl".into(), format!("{}", r.cfl)),
            ("dealias".into(), format!("{}", r.dealias)),
            ("domain_l".into(), format!("{}", r.domain_l)),
            ("dt".into(), format!("{}", r.dt)),
            ("grid_n".into(), format!("{}", r.grid_n)),
            ("init".into(), r.init.spec_string()),
            (
                "lp_exponents".into(),
                r.lp_exponents
                    .iter()
                    .map(|p| format!("{p}"))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("log_level".into(), self.log_level.clone()),
            ("sample_every".into(), format!("{}", r.sample_every)),
            ("seed".into(), format!("{}", r.seed)),
            ("space".into(), r.space.spec_string()),
            ("t_end".into(), format!("{}", r.t_end)),
            ("weight".into(), r.space.weight.spec_string()),
        ];
        if let Some(path) = &self.out {
            out.push(("out".into(), path.clone()));
        }
        out.sort();
        out
    }
}

/// Fully resolved `iterate` experiment.
#[derive(Debug, Clone)]
pub struct IterateExperiment {
    pub grid_n: usize,
    pub domain_l: f64,
    pub init: InitialData,
    pub seed: u64,
    pub iteration: IterationConfig,
    /// Present when `c_empirical` was given; otherwise it is fitted from a
    /// short nonlinear run on the same data.
    pub c_empirical_given: Option<f64>,
    pub out: Option<String>,
    pub log_level: String,
}

impl IterateExperiment {
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        kv.reject_unknown(&ITERATE_KEYS)?;
        let weight = SlowlyVaryingWeight::parse_spec(kv.raw("weight").unwrap_or("log:alpha=1"))?;
        let space = SpaceSpec::parse(kv.raw("space").unwrap_or("B:s=2,p=2,q=2"), weight)?;
        let c_given: Option<f64> = kv.get("c_empirical")?;
        let iteration = IterationConfig {
            n_max: kv.get_or("n_max", 8)?,
            t_horizon: kv.get_required("t_end")?,
            dt: kv.get_required("dt")?,
            cfl: kv.get_or("cfl", 0.5)?,
            space,
            c_empirical: c_given.unwrap_or(1.0),
            enforce_t0: parse_bool(kv.raw("enforce_t0"), true, "enforce_t0")?,
            sample_every: kv.get_or("sample_every", 1)?,
        };
        iteration.validate()?;
        Ok(IterateExperiment {
            grid_n: kv.get_required("grid_n")?,
            domain_l: kv.get_or("domain_l", std::f64::consts::TAU)?,
            init: InitialData::parse(kv.raw("init").unwrap_or("taylor"))?,
            seed: kv.get_or("seed", 0)?,
            iteration,
            c_empirical_given: c_given,
            out: kv.raw("out").map(str::to_string),
            log_level: kv.raw("log_level").unwrap_or("info").to_string(),
        })
    }

    pub fn resolved(&self) -> Vec<(String, String)> {
        let it = &self.iteration;
        let mut out = vec![
            ("c_empirical".into(), format!("{}", it.c_empirical)),
            ("cfl".into(), format!("{}", it.cfl)),
            ("domain_l".into(), format!("{}", self.domain_l)),
            ("dt".into(), format!("{}", it.dt)),
            ("enforce_t0".into(), format!("{}", it.enforce_t0)),
            ("grid_n".into(), format!("{}", self.grid_n)),
            ("init".into(), self.init.spec_string()),
            ("log_level".into(), self.log_level.clone()),
            ("n_max".into(), format!("{}", it.n_max)),
            ("sample_every".into(), format!("{}", it.sample_every)),
            ("seed".into(), format!("{}", self.seed)),
            ("space".into(), it.space.spec_string()),
            ("t_end".into(), format!("{}", it.t_horizon)),
            ("weight".into(), it.space.weight.spec_string()),
        ];
        if let Some(path) = &self.out {
            out.push(("out".into(), path.clone()));
        }
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rejects_unknown_keys_and_duplicates() {
        let kv = KvConfig::parse("grid_n = 64\ndt = 0.001\nt_end = 1\n").unwrap();
        assert!(kv.reject_unknown(&SIMULATE_KEYS).is_ok());
        let kv = KvConfig::parse("grid_n = 64\nnope = 1\n").unwrap();
        assert!(kv.reject_unknown(&SIMULATE_KEYS).is_err());
        assert!(KvConfig::parse("a = 1\na = 2\n").is_err());
        assert!(KvConfig::parse("just a line\n").is_err());
    }

    #[test]
    fn simulate_experiment_defaults() {
        let kv = KvConfig::parse("grid_n = 64\ndt = 1e-3\nt_end = 0.5\ninit = taylor\n").unwrap();
        let exp = SimulateExperiment::from_kv(&kv).unwrap();
        assert_eq!(exp.run.grid_n, 64);
        assert_eq!(exp.run.cfl, 0.5);
        assert!(exp.run.dealias);
        assert_eq!(exp.run.lp_exponents, vec![2.0]);
        let resolved = exp.resolved();
        assert!(resolved.iter().any(|(k, v)| k == "space" && v == "B:s=2,p=2,q=2"));
    }

    #[test]
    fn iterate_experiment_keys() {
        let kv = KvConfig::parse(
            "grid_n = 64\ndt = 2e-3\nt_end = 0.2\nn_max = 4\nenforce_t0 = true\nc_empirical = 1.0\n",
        )
        .unwrap();
        let exp = IterateExperiment::from_kv(&kv).unwrap();
        assert_eq!(exp.iteration.n_max, 4);
        assert!(exp.iteration.enforce_t0);
        assert_eq!(exp.c_empirical_given, Some(1.0));
        // simulate-only schema rejects the extras
        assert!(SimulateExperiment::from_kv(&kv).is_err());
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let kv = KvConfig::parse("# a comment\n\ngrid_n = 32\ndt = 1e-3\nt_end = 1\n").unwrap();
        assert_eq!(kv.raw("grid_n"), Some("32"));
    }
}
