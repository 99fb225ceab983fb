//! Flat metric reports, printed as `key=value` lines or saved as JSON.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Result;

/// Insertion-ordered metrics. Nested values are flattened with `.` when
/// printed as lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.entries.push((key.into(), v));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.entries.iter().cloned().collect::<Map<_, _>>())
    }

    pub fn write_lines<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        fn emit<W: Write>(w: &mut W, key: &str, v: &Value) -> std::io::Result<()> {
            match v {
                Value::Object(m) => m.iter().try_for_each(|(k, v)| emit(w, &format!("{key}.{k}"), v)),
                Value::String(s) => writeln!(w, "{key}={s}"),
                Value::Array(a) => {
                    let items: Vec<String> = a
                        .iter()
                        .map(|x| match x {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect();
                    writeln!(w, "{key}={}", items.join(","))
                }
                other => writeln!(w, "{key}={other}"),
            }
        }
        self.entries.iter().try_for_each(|(k, v)| emit(&mut w, k, v))
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(&mut f, &self.to_json()).map_err(std::io::Error::from)?;
        writeln!(f)?;
        f.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattens_nested_values() {
        #[derive(Serialize)]
        struct M {
            auc: f64,
        }
        let mut r = Report::new();
        r.insert("task", "lp").insert("embedding", M { auc: 0.5 }).insert("flagged", [3, 7]);
        let mut out = Vec::new();
        r.write_lines(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "task=lp\nembedding.auc=0.5\nflagged=3,7\n");
        assert_eq!(r.to_json()["embedding"]["auc"], 0.5);
    }
}
