//! Output directory handling and byte-stable serialization.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mussel_bif::numfmt::{round12, sig12};
use serde::Serialize;
use serde_json::Value;

use crate::failure::{Failure, Outcome};

/// Output directory of one invocation; files are only created through it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Outcome<Self> {
        fs::create_dir_all(root).map_err(|e| Failure::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Creates `name` and hands a buffered writer to `fill`.
    pub fn write_with<F>(&mut self, name: &str, fill: F) -> Outcome<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| Failure::io(&path, e))?;
        let mut w = BufWriter::new(file);
        fill(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Failure::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Outcome<()> {
        let text = to_json(value)?;
        self.write_with(name, |w| w.write_all(text.as_bytes()))
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Outcome<()> {
        self.write_with(name, |w| w.write_all(text.as_bytes()))
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round12(x)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Outcome<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Failure::Numerical(e.to_string()))?;
    round_numbers(&mut v);
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| Failure::Numerical(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// CSV cell for an optional float: 12 significant digits or empty.
pub fn cell(x: Option<f64>) -> String {
    x.map(sig12).unwrap_or_default()
}
