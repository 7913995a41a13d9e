//! Instance registry: the built-in files under `instances/` plus any configured directories.
//!
//! A file holds one instance object or an array of them. Suites pick instances by family
//! and by the keys of `expected`.

use std::path::Path;

use massgeom_core::metrics::{load_instance, Instance};
use serde_json::Value;

use crate::error::{CliError, CliResult};

include!(concat!(env!("OUT_DIR"), "/builtin_instances.rs"));

#[derive(Debug, Clone)]
pub struct Registry {
    instances: Vec<Instance>,
}

impl Registry {
    pub fn builtin() -> CliResult<Self> {
        let mut reg = Registry { instances: Vec::new() };
        for (name, text) in BUILTIN_INSTANCES {
            reg.add_text(name, text)?;
        }
        Ok(reg)
    }

    /// Built-in instances plus every `*.json` in `dirs`, in sorted file order.
    pub fn with_dirs<P: AsRef<Path>>(dirs: &[P]) -> CliResult<Self> {
        let mut reg = Self::builtin()?;
        for dir in dirs {
            let dir = dir.as_ref();
            let mut files: Vec<_> = std::fs::read_dir(dir)
                .map_err(|e| CliError::io(dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "json"))
                .collect();
            files.sort();
            for f in files {
                let text = std::fs::read_to_string(&f).map_err(|e| CliError::io(&f, e))?;
                reg.add_text(&f.display().to_string(), &text)?;
            }
        }
        Ok(reg)
    }

    pub fn add_text(&mut self, file: &str, text: &str) -> CliResult<()> {
        for inst in parse_instances(file, text)? {
            if self.get(&inst.id).is_some() {
                return Err(CliError::Instance {
                    file: file.to_string(),
                    message: format!("duplicate instance id `{}`", inst.id),
                });
            }
            self.instances.push(inst);
        }
        Ok(())
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn get(&self, id: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.id == id)
    }
}

/// Parses a file holding one instance or an array; errors carry line/column or field path.
pub fn parse_instances(file: &str, text: &str) -> CliResult<Vec<Instance>> {
    let err = |message: String| CliError::Instance {
        file: file.to_string(),
        message,
    };
    let value: Value = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    match value {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, v)| {
                load_instance(&v.to_string()).map_err(|e| err(prefix_path(&format!("[{i}]"), e)))
            })
            .collect(),
        _ => Ok(vec![load_instance(text).map_err(|e| err(e.to_string()))?]),
    }
}

fn prefix_path(prefix: &str, e: massgeom_core::Error) -> String {
    match e {
        massgeom_core::Error::Schema { path, message } => {
            let sep = if path.is_empty() || path.starts_with('[') { "" } else { "." };
            format!("schema error at `{prefix}{sep}{path}`: {message}")
        }
        other => format!("{prefix}: {other}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use massgeom_core::metrics::Family;

    #[test]
    fn builtin_registry_loads() {
        let reg = Registry::builtin().unwrap();
        assert!(reg.get("schwarzschild-m1-n3").is_some());
        assert!(reg.instances().iter().any(|i| i.family() == Family::Spacetime));
    }

    #[test]
    fn array_errors_name_the_element() {
        let text = r#"[{"family": "flat", "n": 3}, {"family": "schwarzschild", "n": 3}]"#;
        let msg = parse_instances("x.json", text).unwrap_err().to_string();
        assert!(msg.contains("[1].params.m"), "{msg}");
        let msg = parse_instances("x.json", "{\n  \"family\": }").unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let mut reg = Registry::builtin().unwrap();
        let dup = r#"{"id": "flat-n3", "family": "flat", "n": 3}"#;
        assert!(reg.add_text("dup.json", dup).is_err());
    }
}
