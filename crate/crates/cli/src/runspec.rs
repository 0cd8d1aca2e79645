use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

pub const KEYS: &[&str] = &[
    "M", "N", "R", "draws", "eps", "grid", "jobs", "method", "n", "out", "s", "seed", "sigma", "sprime",
];

/// Invalid command line, config file or parameter value; maps to exit status 2.
#[derive(Debug)]
pub struct SpecError(pub String);

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SpecError {}

pub type SpecResult<T> = std::result::Result<T, SpecError>;

fn bad<T>(msg: impl Into<String>) -> SpecResult<T> {
    Err(SpecError(msg.into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub command: String,
    pub params: BTreeMap<String, String>,
}

/// key=value lines; blank lines and lines starting with '#' are ignored.
pub fn parse_config(text: &str) -> SpecResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return bad(format!("config line {}: expected key=value", i + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return bad(format!("config line {}: unknown key '{k}'", i + 1));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return bad(format!("config line {}: duplicate key '{k}'", i + 1));
        }
    }
    Ok(map)
}

impl RunSpec {
    /// Flags override the config file.
    pub fn new(command: &str, config: Option<&Path>, flags: BTreeMap<String, String>) -> SpecResult<RunSpec> {
        let mut params = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| SpecError(format!("config {}: {e}", p.display())))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in flags {
            if !KEYS.contains(&k.as_str()) {
                return bad(format!("unknown key '{k}'"));
            }
            params.insert(k, v);
        }
        Ok(RunSpec {
            command: command.to_string(),
            params,
        })
    }

    pub fn provenance(&self) -> Value {
        json!({"command": self.command, "params": self.params})
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> SpecResult<Option<T>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| SpecError(format!("--{key}: cannot parse '{v}'"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> SpecResult<f64> {
        let v = self.parse::<f64>(key)?.unwrap_or(default);
        if !v.is_finite() {
            return bad(format!("--{key} must be finite"));
        }
        Ok(v)
    }

    pub fn f64_opt(&self, key: &str) -> SpecResult<Option<f64>> {
        match self.parse::<f64>(key)? {
            Some(v) if !v.is_finite() => bad(format!("--{key} must be finite")),
            v => Ok(v),
        }
    }

    pub fn positive_f64_or(&self, key: &str, default: f64) -> SpecResult<f64> {
        let v = self.f64_or(key, default)?;
        if !(v > 0.0) {
            return bad(format!("--{key} must be positive, got {v}"));
        }
        Ok(v)
    }

    pub fn usize_opt(&self, key: &str) -> SpecResult<Option<usize>> {
        self.parse::<usize>(key)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> SpecResult<usize> {
        Ok(self.parse::<usize>(key)?.unwrap_or(default))
    }

    pub fn positive_usize_or(&self, key: &str, default: usize) -> SpecResult<usize> {
        let v = self.usize_or(key, default)?;
        if v == 0 {
            return bad(format!("--{key} must be at least 1"));
        }
        Ok(v)
    }

    pub fn u64_or(&self, key: &str, default: u64) -> SpecResult<u64> {
        Ok(self.parse::<u64>(key)?.unwrap_or(default))
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.params.get(key).map(String::as_str).unwrap_or(default)
    }

    /// "a:b:count" → count equally spaced points from a to b; 0 must not be a point.
    pub fn grid_or(&self, default: &str) -> SpecResult<Vec<f64>> {
        parse_grid(self.str_or("grid", default))
    }

    pub fn jobs(&self) -> SpecResult<usize> {
        self.positive_usize_or("jobs", 1)
    }

    /// --out, else HPK_DATA_DIR (default ./hpk-data) joined with `default_name`.
    pub fn out_path(&self, default_name: &str) -> PathBuf {
        match self.params.get("out") {
            Some(p) => PathBuf::from(p),
            None => data_dir().join(default_name),
        }
    }
}

pub fn data_dir() -> PathBuf {
    std::env::var_os("HPK_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("hpk-data"))
}

pub fn parse_grid(text: &str) -> SpecResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return bad(format!("grid '{text}' is not a:b:count"));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| SpecError(format!("grid start '{}'", parts[0])))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| SpecError(format!("grid end '{}'", parts[1])))?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| SpecError(format!("grid count '{}'", parts[2])))?;
    if !a.is_finite() || !b.is_finite() || n == 0 || (n == 1 && a != b) {
        return bad(format!("grid '{text}' is degenerate"));
    }
    let pts: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                a
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    if pts.iter().any(|x| *x == 0.0) {
        return bad(format!("grid '{text}' contains 0"));
    }
    Ok(pts)
}
