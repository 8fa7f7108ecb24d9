use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bench::testbed::{default_testbed, SpectrumKind};
use crate::error::{param_err, Error, Result};
use crate::sketch::{BaseDist, Family, SignDist, TransformKind};

pub const COMMANDS: [&str; 9] = [
    "lowrank", "lsq", "nystrom", "recover", "trace", "osi-diag", "timing", "testbed", "error-ratio",
];

const COMMON: [&str; 3] = ["seed", "trials", "output"];
const SKETCH: [&str; 8] = ["family", "zeta", "xi", "d0", "base", "sign", "transform", "field"];

fn command_keys(command: &str) -> Option<Vec<&'static str>> {
    let extra: &[&str] = match command {
        "lowrank" => &["source", "spectrum", "n", "k", "p", "algo"],
        "nystrom" => &["source", "spectrum", "n", "k"],
        "lsq" => &["n", "d", "k", "noise"],
        "recover" => &["n", "p", "noise", "field"],
        "trace" => &["ell", "h", "beta", "t", "estimator", "mode", "shift"],
        "osi-diag" => &["d", "r", "k", "subspace", "ell", "failure_quantile"],
        "timing" => &["n", "k", "families", "zeta", "reps", "warmup", "seed", "output"],
        "testbed" => &["spectrum", "n", "output"],
        "error-ratio" => &["spectrum", "n", "k"],
        _ => return None,
    };
    let mut keys: Vec<&'static str> = extra.to_vec();
    if !matches!(command, "timing" | "testbed") {
        keys.extend(COMMON);
    }
    if matches!(command, "lowrank" | "nystrom" | "lsq" | "trace" | "osi-diag" | "error-ratio") {
        keys.extend(SKETCH);
    }
    Some(keys)
}

/// Flat `key = value` settings for one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: String,
    values: BTreeMap<String, String>,
    allowed: Vec<&'static str>,
}

impl ExperimentConfig {
    pub fn new(command: &str) -> Result<Self> {
        let allowed = command_keys(command).ok_or_else(|| param_err(format!("unknown command `{command}`")))?;
        Ok(ExperimentConfig {
            command: command.to_string(),
            values: BTreeMap::new(),
            allowed,
        })
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        if !self.allowed.contains(&key.as_str()) {
            return Err(Error::UnknownKey(key));
        }
        self.values.insert(key, value.trim().to_string());
        Ok(())
    }

    /// Lines `key = value`; blank lines and `#` comments are skipped.
    pub fn load_str(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| param_err(format!("config line {}: expected key = value", no + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        self.load_str(&fs::read_to_string(path)?)
    }

    /// `--config FILE` is read first; every other `--key value` or `--key=value` overrides it.
    pub fn from_args(command: &str, args: &[String]) -> Result<Self> {
        let mut cfg = Self::new(command)?;
        let mut pairs = Vec::new();
        let mut it = args.iter();
        while let Some(a) = it.next() {
            let Some(body) = a.strip_prefix("--") else {
                return Err(param_err(format!("unexpected argument `{a}`")));
            };
            let (k, v) = match body.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it.next().ok_or_else(|| param_err(format!("flag --{body} needs a value")))?;
                    (body.to_string(), v.clone())
                }
            };
            pairs.push((k, v));
        }
        if let Some((_, path)) = pairs.iter().find(|(k, _)| k == "config") {
            cfg.load_file(path)?;
        }
        for (k, v) in pairs.iter().filter(|(k, _)| k != "config") {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parse_or<V: FromStr>(&self, key: &str, default: V) -> Result<V> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| param_err(format!("cannot parse `{key}` = `{s}`"))),
        }
    }

    pub fn parse_opt<V: FromStr>(&self, key: &str) -> Result<Option<V>> {
        self.get(key)
            .map(|s| s.parse().map_err(|_| param_err(format!("cannot parse `{key}` = `{s}`"))))
            .transpose()
    }

    pub fn require<V: FromStr>(&self, key: &str) -> Result<V> {
        self.parse_opt(key)?.ok_or_else(|| param_err(format!("missing required key `{key}`")))
    }

    /// Comma-separated list.
    pub fn list_or<V: FromStr>(&self, key: &str, default: Vec<V>) -> Result<Vec<V>> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .split(',')
                .map(|p| p.trim().parse().map_err(|_| param_err(format!("cannot parse `{key}` entry `{p}`"))))
                .collect(),
        }
    }

    pub fn output(&self) -> Option<PathBuf> {
        self.get("output").map(PathBuf::from)
    }

    /// `spectrum` as a list, with `all` (the default) meaning the twelve-spectrum testbed.
    pub fn spectra(&self) -> Result<Vec<SpectrumKind>> {
        match self.get("spectrum") {
            None | Some("all") => Ok(default_testbed()),
            Some(_) => self.list_or("spectrum", Vec::new()),
        }
    }

    pub fn family(&self) -> Result<Family> {
        let name = self.get("family").unwrap_or("gaussian");
        self.family_named(name)
    }

    pub fn family_named(&self, name: &str) -> Result<Family> {
        let sign = self.parse_opt::<SignDist>("sign")?;
        Ok(match name.to_ascii_lowercase().as_str() {
            "gaussian" => Family::Gaussian,
            "sparsestack" => Family::SparseStack {
                zeta: self.parse_or("zeta", 4)?,
                dist: sign,
            },
            "sparseuniform" => Family::SparseUniform {
                zeta: self.parse_or("zeta", 4)?,
                dist: sign,
            },
            "sparseiid" => Family::SparseIid {
                zeta: self.parse_or("zeta", 4.0)?,
                dist: sign,
            },
            "sparsecol" => Family::SparseCol {
                xi: self.require("xi")?,
                dist: sign,
            },
            "sparsertt" => Family::SparseRtt {
                xi: self.parse_opt("xi")?,
                transform: self.parse_opt::<TransformKind>("transform")?,
                diag: sign,
            },
            "khatrirao" => Family::KhatriRao {
                d0: self.parse_or("d0", 2)?,
                base: self.parse_or("base", BaseDist::RealGaussian)?,
            },
            other => return Err(param_err(format!("unknown family `{other}`"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn flags_and_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# comment\nk = 20\nfamily = sparsestack\nzeta=2\n").unwrap();
        let cfg = ExperimentConfig::from_args("osi-diag", &args(&["--config", path.to_str().unwrap(), "--k", "50", "--r=10"])).unwrap();
        assert_eq!(cfg.require::<usize>("k").unwrap(), 50);
        assert_eq!(cfg.require::<usize>("r").unwrap(), 10);
        assert_eq!(cfg.family().unwrap(), Family::SparseStack { zeta: 2, dist: None });
    }

    #[test]
    fn unknown_key_is_named() {
        match ExperimentConfig::from_args("osi-diag", &args(&["--bogus", "1"])) {
            Err(Error::UnknownKey(k)) => assert_eq!(k, "bogus"),
            other => panic!("{other:?}"),
        }
        // Valid for another command only.
        assert!(matches!(ExperimentConfig::from_args("testbed", &args(&["--k", "3"])), Err(Error::UnknownKey(_))));
        assert!(ExperimentConfig::new("nope").is_err());
    }

    #[test]
    fn typed_access() {
        let mut cfg = ExperimentConfig::new("error-ratio").unwrap();
        cfg.set("k", "20, 50,100").unwrap();
        assert_eq!(cfg.list_or::<usize>("k", vec![]).unwrap(), vec![20, 50, 100]);
        assert_eq!(cfg.spectra().unwrap().len(), 12);
        cfg.set("spectrum", "poly:5:1,exp").unwrap();
        assert_eq!(cfg.spectra().unwrap().len(), 2);
        cfg.set("n", "ten").unwrap();
        assert!(cfg.parse_or::<usize>("n", 1).is_err());
        cfg.set("family", "sparsecol").unwrap();
        assert!(cfg.family().is_err());
        cfg.set("xi", "3").unwrap();
        assert!(cfg.family().is_ok());
        assert!(cfg.load_str("no equals sign").is_err());
    }
}
