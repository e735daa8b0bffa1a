//! Where results go: files under `--out`, or stdout with the human summary on
//! stderr.

use std::io::Write;
use std::path::PathBuf;

use regionscore::numeric::{round_sig, OUTPUT_DIGITS};
use regionscore::{Error, Result};
use serde::Serialize;
use serde_json::{Number, Value};

pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).map_err(|e| Error::Io {
                path: d.display().to_string(),
                source: e,
            })?;
        }
        Ok(Sink { dir })
    }

    /// Primary machine-readable result: a file under `--out`, else stdout.
    pub fn primary(&self, name: &str, content: &str) -> Result<()> {
        match &self.dir {
            Some(_) => self.file(name, content),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(content.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| Error::Io {
                        path: "stdout".into(),
                        source: e,
                    })
            }
        }
    }

    /// Secondary artefacts are only written under `--out`.
    pub fn extra(&self, name: &str, content: &str) -> Result<()> {
        if self.dir.is_some() {
            self.file(name, content)?;
        }
        Ok(())
    }

    fn file(&self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.as_ref().expect("output directory").join(name);
        std::fs::write(&path, content).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn summary(&self, text: &str) {
        if self.dir.is_some() {
            print!("{text}");
        } else {
            eprint!("{text}");
        }
    }
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(f64::NAN), OUTPUT_DIGITS);
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

/// Pretty JSON with floats rounded to the output precision.
pub fn json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    serde_json::to_string_pretty(&round_value(v)).expect("serializable") + "\n"
}

pub fn csv(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut buf = Vec::new();
    regionscore::io::write_table(&mut buf, header, rows)?;
    Ok(String::from_utf8(buf).expect("utf-8 csv"))
}
