use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Default, Serialize)]
pub struct Counters {
    pub trials: u64,
    pub enumerated: u64,
    pub wires: u64,
    pub depth: u64,
}

/// Summary written by `--report` for every command.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub params: Value,
    pub seed: u64,
    pub mode: &'static str,
    pub verdicts: Vec<Value>,
    pub counters: Counters,
    pub elapsed_ms: u64,
    pub artifacts: Vec<String>,
    pub exit_code: i32,
}

/// Output of the `check` family.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub ok: bool,
    pub counterexample: Value,
    pub enumerated: u64,
    pub elapsed_ms: u64,
}
