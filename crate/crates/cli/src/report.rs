use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// How a command ended. The exit code is a function of this alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    Failed,
    Unknown,
    Usage,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Failed => 1,
            Outcome::Unknown => 2,
            Outcome::Usage => 3,
        }
    }

    /// The worse of two outcomes, for commands over several inputs. A definite
    /// failure outranks an undecided input.
    pub fn meet(self, other: Outcome) -> Outcome {
        let rank = |o: &Outcome| match o {
            Outcome::Ok => 0,
            Outcome::Unknown => 1,
            Outcome::Failed => 2,
            Outcome::Usage => 3,
        };
        std::cmp::max_by_key(self, other, rank)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> InputDigest {
        let digest = Sha256::digest(bytes);
        InputDigest {
            path: path.display().to_string(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

/// Machine-readable record of one run, printed with `--json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub outcome: Outcome,
    pub exit_code: u8,
    pub inputs: Vec<InputDigest>,
    /// Command-specific verdicts.
    pub verdicts: Value,
    pub timings_ms: BTreeMap<String, f64>,
    pub budgets: BTreeMap<String, u64>,
    pub seed: u32,
    pub messages: Vec<String>,
    /// The text printed without `--json`.
    #[serde(skip)]
    pub text: String,
}

impl RunReport {
    pub fn new(command: &str, seed: u32) -> RunReport {
        RunReport {
            command: command.to_string(),
            outcome: Outcome::Ok,
            exit_code: 0,
            inputs: Vec::new(),
            verdicts: Value::Null,
            timings_ms: BTreeMap::new(),
            budgets: BTreeMap::new(),
            seed,
            messages: Vec::new(),
            text: String::new(),
        }
    }

    pub fn finish(mut self, outcome: Outcome) -> RunReport {
        self.outcome = outcome;
        self.exit_code = outcome.exit_code();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips() {
        let mut r = RunReport::new("eval", 0);
        r.inputs.push(InputDigest::of(Path::new("a.nu"), b"gensym ()"));
        r.budgets.insert("term_size".into(), 5);
        r.verdicts = serde_json::json!({"value": "#0"});
        let r = r.finish(Outcome::Unknown);
        let text = serde_json::to_string(&r).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.exit_code, 2);
    }

    #[test]
    fn digest_is_sha256() {
        let d = InputDigest::of(Path::new("x"), b"");
        assert_eq!(d.sha256, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn meet_prefers_worse() {
        assert_eq!(Outcome::Ok.meet(Outcome::Unknown), Outcome::Unknown);
        assert_eq!(Outcome::Failed.meet(Outcome::Unknown), Outcome::Failed);
        assert_eq!(Outcome::Ok.meet(Outcome::Ok), Outcome::Ok);
    }
}
