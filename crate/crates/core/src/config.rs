//! Textual key-value configuration: UTF-8, one `key = value` per line, `#`
//! starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parses `key = value` lines into `key -> (line, value)`.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key = value`, found `{content}`"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse { line, msg: "empty key".into() });
        }
        if out.insert(key.to_string(), (line, value.trim().to_string())).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate key `{key}`") });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    Table,
    Record,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Table => "table",
            OutputFormat::Record => "record",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "record" => Ok(OutputFormat::Record),
            _ => Err(Error::InvalidInput(format!("unknown output format `{s}` (table|record)"))),
        }
    }
}

/// A resolved command invocation.
///
/// Parameter values are kept as strings so the textual form round-trips
/// exactly; typed accessors parse on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

const RESERVED: [&str; 4] = ["command", "input", "output", "format"];

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            params: BTreeMap::new(),
            input: None,
            output: None,
            format: OutputFormat::Table,
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Inserts `value` only if `key` is absent.
    pub fn set_default(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.entry(key.to_string()).or_insert_with(|| value.to_string());
        self
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.params.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::InvalidInput(format!("parameter `{key}` = `{v}`: {e}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::InvalidInput(format!("missing parameter `{key}`")))
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        match self.params.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|t| t.trim())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<T>()
                        .map_err(|e| Error::InvalidInput(format!("parameter `{key}` item `{t}`: {e}")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command = {}\n", self.command);
        if let Some(p) = &self.input {
            out.push_str(&format!("input = {}\n", p.display()));
        }
        if let Some(p) = &self.output {
            out.push_str(&format!("output = {}\n", p.display()));
        }
        out.push_str(&format!("format = {}\n", self.format));
        for (k, v) in &self.params {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut map = parse_key_values(text)?;
        let (_, command) = map
            .remove("command")
            .ok_or_else(|| Error::Parse { line: 0, msg: "missing `command`".into() })?;
        let input = map.remove("input").map(|(_, v)| PathBuf::from(v));
        let output = map.remove("output").map(|(_, v)| PathBuf::from(v));
        let format = match map.remove("format") {
            Some((line, v)) => v.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("unknown format `{v}`"),
            })?,
            None => OutputFormat::Table,
        };
        let params = map.into_iter().map(|(k, (_, v))| (k, v)).collect();
        Ok(Self { command, params, input, output, format })
    }

    /// Parameters from a config file body (no `command` line required);
    /// reserved keys are applied to the corresponding fields.
    pub fn merge_file(&mut self, text: &str) -> Result<()> {
        for (k, (line, v)) in parse_key_values(text)? {
            match k.as_str() {
                "command" => {}
                "input" => self.input = Some(PathBuf::from(v)),
                "output" => self.output = Some(PathBuf::from(v)),
                "format" => {
                    self.format = v.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("unknown format `{v}`"),
                    })?
                }
                _ => {
                    self.params.insert(k, v);
                }
            }
        }
        Ok(())
    }

    pub fn is_reserved(key: &str) -> bool {
        RESERVED.contains(&key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_reports_lines() {
        let m = parse_key_values("# top\np = 0.5 # trailing\n\n dims = 16,32 \n").unwrap();
        assert_eq!(m["p"], (2, "0.5".to_string()));
        assert_eq!(m["dims"], (4, "16,32".to_string()));
        assert!(matches!(parse_key_values("a = 1\nbroken\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_key_values("a = 1\na = 2\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn typed_access() {
        let mut cfg = RunConfig::new("experiment");
        cfg.set("p", 0.5).set("dims", "16, 32,64");
        assert_eq!(cfg.require::<f64>("p").unwrap(), 0.5);
        assert_eq!(cfg.get_list::<usize>("dims").unwrap().unwrap(), vec![16, 32, 64]);
        assert!(cfg.require::<f64>("q").is_err());
        cfg.set("p", "abc");
        assert!(cfg.get::<f64>("p").is_err());
    }

    fn arb_value() -> impl Strategy<Value = String> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(|x| x.to_string()),
            "[a-z0-9:.,_-]{1,12}",
        ]
    }

    proptest! {
        #[test]
        fn run_config_round_trips(
            command in "[a-z][a-z-]{0,15}",
            params in proptest::collection::btree_map("[a-z][a-z0-9_-]{0,10}", arb_value(), 0..8),
            record in any::<bool>(),
            out in proptest::option::of("[a-z0-9_/]{1,12}"),
        ) {
            let mut cfg = RunConfig::new(&command);
            for (k, v) in params {
                if !RunConfig::is_reserved(&k) {
                    cfg.params.insert(k, v);
                }
            }
            cfg.format = if record { OutputFormat::Record } else { OutputFormat::Table };
            cfg.output = out.map(PathBuf::from);
            let back = RunConfig::from_text(&cfg.to_text()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
