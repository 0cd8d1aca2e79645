use crate::runspec::RunSpec;
use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when value < bound.
    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            value,
            bound,
            pass: value < bound,
        }
    }
}

pub fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

/// UTF-8 JSON with sorted keys and the run provenance under "runspec".
pub fn write_json(path: &Path, spec: &RunSpec, body: impl Serialize) -> Result<()> {
    let mut v = serde_json::to_value(body)?;
    if let Value::Object(m) = &mut v {
        m.insert("runspec".into(), spec.provenance());
    } else {
        v = json!({"runspec": spec.provenance(), "body": v});
    }
    create_parent(path)?;
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, &v)?;
    writeln!(f)?;
    Ok(())
}

/// Comment line carrying the run provenance, for CSV outputs.
pub fn csv_provenance(spec: &RunSpec) -> String {
    format!("# runspec: {}", spec.provenance())
}
