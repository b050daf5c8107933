//! Config merging, transcripts, metadata sidecars and CSV rows.

use period_lattice::check::Check;
use period_lattice::infra::{BoxInfrastructure, InfraJson};
use period_lattice::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub const SCHEMA: &str = "period-lattice.transcript";
pub const SCHEMA_VERSION: u64 = 1;

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))
}

pub fn read_json(path: &Path) -> Result<Value> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

pub fn load_config(path: Option<&Path>) -> Result<Map<String, Value>> {
    match path {
        None => Ok(Map::new()),
        Some(p) => match read_json(p)? {
            Value::Object(m) => Ok(m),
            _ => Err(Error::Parse(format!("{}: config must be a JSON object", p.display()))),
        },
    }
}

/// Overlay the flags that were given on the file values and read the result back.
/// Returns the merged arguments and their JSON echo (absent values dropped).
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: &Map<String, Value>, known: &[&str]) -> Result<(T, Map<String, Value>)> {
    let Value::Object(given) = to_value(flags) else {
        unreachable!("argument structs serialize to objects")
    };
    let mut merged = Map::new();
    for (k, v) in file {
        if given.contains_key(k) {
            merged.insert(k.clone(), v.clone());
        } else if !known.contains(&k.as_str()) {
            return Err(Error::Parse(format!("unknown config key {k}")));
        }
    }
    for (k, v) in given {
        let empty = v.is_null() || v.as_array().is_some_and(|a| a.is_empty());
        if !empty || !merged.contains_key(&k) {
            merged.insert(k, v);
        }
    }
    let args: T = serde_json::from_value(Value::Object(merged)).map_err(|e| Error::Parse(format!("config: {e}")))?;
    // echo the parsed values so rationals appear in their canonical form
    let Value::Object(mut echo) = to_value(&args) else {
        unreachable!("argument structs serialize to objects")
    };
    echo.retain(|_, v| !v.is_null());
    Ok((args, echo))
}

pub fn load_infra(path: &Path) -> Result<BoxInfrastructure> {
    let j: InfraJson = serde_json::from_value(read_json(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    BoxInfrastructure::from_json(&j)
}

/// Read a transcript, rejecting other schemas and, when given, other commands.
pub fn read_transcript(path: &Path, command: Option<&str>) -> Result<Value> {
    let v = read_json(path)?;
    let schema = v.get("schema").and_then(Value::as_str);
    let version = v.get("schema_version").and_then(Value::as_u64);
    if schema != Some(SCHEMA) || version != Some(SCHEMA_VERSION) {
        return Err(Error::Parse(format!(
            "{}: schema mismatch (want {SCHEMA} v{SCHEMA_VERSION}, found {} v{})",
            path.display(),
            schema.unwrap_or("none"),
            version.map(|x| x.to_string()).unwrap_or_else(|| "none".into())
        )));
    }
    if let Some(c) = command {
        let found = v.get("command").and_then(Value::as_str).unwrap_or("");
        if found != c {
            return Err(Error::invalid(format!("{}: expected a {c} transcript, found {found}", path.display())));
        }
    }
    Ok(v)
}

pub fn field<T: DeserializeOwned>(v: &Value, key: &str) -> Result<T> {
    let x = v.get(key).ok_or_else(|| Error::Parse(format!("transcript has no field {key}")))?;
    serde_json::from_value(x.clone()).map_err(|e| Error::Parse(format!("field {key}: {e}")))
}

/// One CSV line of a verification suite.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub instance: String,
    pub bound: String,
    pub empirical: String,
    pub stderr: String,
    pub pass: bool,
}

impl Row {
    pub fn from_check(c: &Check) -> Row {
        Row { instance: c.name.clone(), bound: c.bound.clone(), empirical: c.observed.clone(), stderr: String::new(), pass: c.pass }
    }
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::invalid(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Write to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Bookkeeping for one invocation: the config echo plus wall-clock metadata kept out of the body.
pub struct Run {
    pub command: String,
    pub config: Map<String, Value>,
    pub out: Option<PathBuf>,
    started: SystemTime,
    clock: Instant,
}

impl Run {
    pub fn new(command: &str, config: Map<String, Value>, out: Option<PathBuf>) -> Self {
        Run { command: command.into(), config, out, started: SystemTime::now(), clock: Instant::now() }
    }

    /// Transcript body: schema, command, config echo, payload fields, checks and the verdict.
    pub fn transcript(&self, payload: Value, checks: &[Check]) -> String {
        let mut m = Map::new();
        m.insert("schema".into(), SCHEMA.into());
        m.insert("schema_version".into(), SCHEMA_VERSION.into());
        m.insert("command".into(), self.command.clone().into());
        m.insert("config".into(), Value::Object(self.config.clone()));
        if let Value::Object(p) = payload {
            m.extend(p);
        }
        m.insert("checks".into(), to_value(&checks));
        m.insert("pass".into(), period_lattice::check::all_pass(checks).into());
        let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("serializable");
        s.push('\n');
        s
    }

    /// Write the transcript to `--out` (or stdout) and the metadata next to it (or to stderr).
    pub fn finish(&self, payload: Value, checks: &[Check]) -> Result<bool> {
        let body = self.transcript(payload, checks);
        emit(self.out.as_deref(), &body)?;
        self.metadata()?;
        Ok(period_lattice::check::all_pass(checks))
    }

    pub fn metadata(&self) -> Result<()> {
        let unix = self.started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let meta = serde_json::json!({
            "schema": SCHEMA,
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "started_unix": unix,
            "elapsed_seconds": self.clock.elapsed().as_secs_f64(),
            "version": env!("CARGO_PKG_VERSION"),
            "threads": rayon::current_num_threads(),
        });
        match &self.out {
            Some(p) => {
                let mut name = p.as_os_str().to_owned();
                name.push(".meta.json");
                write_text(Path::new(&name), &format!("{}\n", serde_json::to_string_pretty(&meta).expect("serializable")))
            }
            None => {
                eprintln!("meta: {meta}");
                Ok(())
            }
        }
    }
}
