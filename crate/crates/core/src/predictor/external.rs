//! Predictor backed by a child process speaking newline-delimited JSON.
//!
//! Handshake: the parent writes `{"hello":1}` and expects `{"hello":1}`
//! back. Each batch is one request line
//! `{"id":<int>,"cols":[..],"rows":[[..],..]}` answered by
//! `{"id":<int>,"preds":[..]}` or `{"id":<int>,"error":"<msg>"}`.
//! Categorical cells travel as their level strings.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{check_predictions, Model};
use crate::dataset::{ColumnKind, Features};
use crate::error::{invalid, Result, VividError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalConfig {
    /// Program and arguments.
    pub command: Vec<String>,
    /// Number of child processes; requests are spread across them.
    pub pool: usize,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Cell<'a> {
    Num(f64),
    Str(&'a str),
}

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    cols: Vec<&'a str>,
    rows: Vec<Vec<Cell<'a>>>,
}

struct Process {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

impl Process {
    fn spawn(command: &[String]) -> Result<Self> {
        let (prog, args) = command
            .split_first()
            .ok_or_else(|| invalid("external predictor command is empty"))?;
        let mut child = Command::new(prog)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| VividError::External(format!("cannot start `{prog}`: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut p = Self {
            child,
            stdin,
            stdout,
        };
        let reply = p.round_trip(r#"{"hello":1}"#)?;
        if reply.get("hello").and_then(Value::as_i64) != Some(1) {
            return Err(VividError::External(format!(
                "bad handshake reply: {reply}"
            )));
        }
        Ok(p)
    }

    fn round_trip(&mut self, line: &str) -> Result<Value> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| VividError::External("child stdin closed".into()))?;
        writeln!(stdin, "{line}")
            .and_then(|_| stdin.flush())
            .map_err(|e| VividError::External(format!("write to child failed: {e}")))?;
        let mut reply = String::new();
        let read = self
            .stdout
            .read_line(&mut reply)
            .map_err(|e| VividError::External(format!("read from child failed: {e}")))?;
        if read == 0 {
            let status = self
                .child
                .try_wait()
                .ok()
                .flatten()
                .map_or("still running".to_string(), |s| s.to_string());
            return Err(VividError::External(format!(
                "child closed its output ({status})"
            )));
        }
        serde_json::from_str(reply.trim_end())
            .map_err(|e| VividError::External(format!("malformed reply `{}`: {e}", reply.trim_end())))
    }
}

impl Drop for Process {
    fn drop(&mut self) {
        drop(self.stdin.take());
        if let Ok(None) = self.child.try_wait() {
            let _ = self.child.kill();
        }
        let _ = self.child.wait();
    }
}

pub struct ExternalModel {
    names: Vec<String>,
    procs: Vec<Mutex<Process>>,
    next_proc: AtomicUsize,
    next_id: AtomicU64,
}

impl std::fmt::Debug for ExternalModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalModel")
            .field("names", &self.names)
            .field("pool", &self.procs.len())
            .finish()
    }
}

impl ExternalModel {
    /// Starts the child processes and completes the handshake with each.
    pub fn spawn(config: &ExternalConfig, feature_names: Vec<String>) -> Result<Self> {
        if config.pool == 0 {
            return Err(invalid("external predictor pool must be at least 1"));
        }
        if feature_names.is_empty() {
            return Err(invalid("external predictor needs feature names"));
        }
        let procs = (0..config.pool)
            .map(|_| Process::spawn(&config.command).map(Mutex::new))
            .collect::<Result<_>>()?;
        Ok(Self {
            names: feature_names,
            procs,
            next_proc: AtomicUsize::new(0),
            next_id: AtomicU64::new(1),
        })
    }

    fn encode(&self, id: u64, batch: &Features) -> Result<String> {
        let schema = batch.schema();
        let rows = (0..batch.n_rows())
            .map(|i| {
                schema
                    .iter()
                    .enumerate()
                    .map(|(j, s)| {
                        let v = batch.value(i, j);
                        match s.kind {
                            ColumnKind::Numeric => Cell::Num(v),
                            ColumnKind::Categorical => Cell::Str(&s.levels[v as usize]),
                        }
                    })
                    .collect()
            })
            .collect();
        let req = Request {
            id,
            cols: batch.names().collect(),
            rows,
        };
        Ok(serde_json::to_string(&req)?)
    }
}

fn decode(reply: &Value, id: u64, rows: usize) -> Result<Vec<f64>> {
    if reply.get("id").and_then(Value::as_u64) != Some(id) {
        return Err(VividError::External(format!(
            "reply id mismatch: expected {id}, got {}",
            reply.get("id").unwrap_or(&Value::Null)
        )));
    }
    if let Some(msg) = reply.get("error") {
        let msg = msg.as_str().map_or_else(|| msg.to_string(), str::to_string);
        return Err(VividError::External(msg));
    }
    let preds = reply
        .get("preds")
        .and_then(Value::as_array)
        .ok_or_else(|| VividError::External(format!("reply without preds: {reply}")))?;
    let preds: Vec<f64> = preds
        .iter()
        .map(|p| {
            p.as_f64()
                .ok_or_else(|| VividError::External(format!("non-numeric prediction {p}")))
        })
        .collect::<Result<_>>()?;
    check_predictions(&preds, rows)?;
    Ok(preds)
}

impl Model for ExternalModel {
    fn feature_names(&self) -> &[String] {
        &self.names
    }

    fn predict(&self, batch: &Features) -> Result<Vec<f64>> {
        batch.check_names(&self.names)?;
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let line = self.encode(id, batch)?;
        let slot = self.next_proc.fetch_add(1, Ordering::Relaxed) % self.procs.len();
        let mut proc = self.procs[slot]
            .lock()
            .map_err(|_| VividError::External("child process lock poisoned".into()))?;
        let reply = proc.round_trip(&line)?;
        decode(&reply, id, batch.n_rows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnSchema, Dataset};

    fn script(body: &str) -> (tempfile::TempDir, ExternalConfig) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.py");
        std::fs::write(&path, body).unwrap();
        let cfg = ExternalConfig {
            command: vec!["python3".into(), path.to_string_lossy().into_owned()],
            pool: 1,
        };
        (dir, cfg)
    }

    const ECHO: &str = r#"
import json, sys
for line in sys.stdin:
    msg = json.loads(line)
    if "hello" in msg:
        print(json.dumps({"hello": 1}), flush=True)
        continue
    print(json.dumps({"id": msg["id"], "preds": [r[0] for r in msg["rows"]]}), flush=True)
"#;

    #[test]
    fn echo_first_feature() {
        let (_dir, cfg) = script(ECHO);
        let m = ExternalModel::spawn(&cfg, vec!["a".into(), "b".into()]).unwrap();
        let d = Dataset::from_rows(
            &["a", "b", "y"],
            &[vec![5.0, 1.0, 0.0], vec![7.0, 2.0, 0.0]],
            "y",
        )
        .unwrap();
        assert_eq!(m.predict(&d.features()).unwrap(), vec![5.0, 7.0]);
        // Second request on the same child.
        assert_eq!(m.predict(&d.features()).unwrap(), vec![5.0, 7.0]);
    }

    #[test]
    fn categorical_cells_are_sent_as_strings() {
        let (_dir, cfg) = script(
            r#"
import json, sys
for line in sys.stdin:
    msg = json.loads(line)
    if "hello" in msg:
        print(json.dumps({"hello": 1}), flush=True)
        continue
    print(json.dumps({"id": msg["id"], "preds": [len(r[0]) for r in msg["rows"]]}), flush=True)
"#,
        );
        let schema = vec![
            ColumnSchema::categorical("c", vec!["ab".into(), "wxyz".into()]),
            ColumnSchema::numeric("y"),
        ];
        let d = Dataset::new(schema, vec![vec![0.0, 1.0], vec![0.0, 0.0]], "y").unwrap();
        let m = ExternalModel::spawn(&cfg, vec!["c".into()]).unwrap();
        assert_eq!(m.predict(&d.features()).unwrap(), vec![2.0, 4.0]);
    }

    #[test]
    fn error_reply_aborts() {
        let (_dir, cfg) = script(
            r#"
import json, sys
for line in sys.stdin:
    msg = json.loads(line)
    if "hello" in msg:
        print(json.dumps({"hello": 1}), flush=True)
        continue
    print(json.dumps({"id": msg["id"], "error": "model exploded"}), flush=True)
"#,
        );
        let m = ExternalModel::spawn(&cfg, vec!["a".into()]).unwrap();
        let d = Dataset::from_rows(&["a", "y"], &[vec![1.0, 0.0]], "y").unwrap();
        match m.predict(&d.features()) {
            Err(VividError::External(msg)) => assert_eq!(msg, "model exploded"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_handshake_and_early_exit() {
        let (_dir, cfg) = script("print('{\"hello\": 2}', flush=True)\n");
        assert!(ExternalModel::spawn(&cfg, vec!["a".into()]).is_err());
        let (_dir, cfg) = script("import sys\nsys.exit(3)\n");
        assert!(ExternalModel::spawn(&cfg, vec!["a".into()]).is_err());
        let (_dir, cfg) = script("print('not json', flush=True)\n");
        assert!(ExternalModel::spawn(&cfg, vec!["a".into()]).is_err());
    }

    #[test]
    fn wrong_prediction_count_is_rejected() {
        let (_dir, cfg) = script(
            r#"
import json, sys
for line in sys.stdin:
    msg = json.loads(line)
    if "hello" in msg:
        print(json.dumps({"hello": 1}), flush=True)
        continue
    print(json.dumps({"id": msg["id"], "preds": [1.0]}), flush=True)
"#,
        );
        let m = ExternalModel::spawn(&cfg, vec!["a".into()]).unwrap();
        let d = Dataset::from_rows(&["a", "y"], &[vec![1.0, 0.0], vec![2.0, 0.0]], "y").unwrap();
        assert!(m.predict(&d.features()).is_err());
    }

    #[test]
    fn request_line_layout() {
        let m = ExternalModel {
            names: vec!["a".into()],
            procs: Vec::new(),
            next_proc: AtomicUsize::new(0),
            next_id: AtomicU64::new(1),
        };
        let d = Dataset::from_rows(&["a", "y"], &[vec![1.5, 0.0]], "y").unwrap();
        assert_eq!(
            m.encode(4, &d.features()).unwrap(),
            r#"{"id":4,"cols":["a"],"rows":[[1.5]]}"#
        );
    }
}
