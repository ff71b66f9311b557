use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// An even-k refusal that was expected and certified.
    ExpectedObstruction,
}

/// Outcome of one identity check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub identity: String,
    pub window: String,
    pub status: Status,
    pub first_mismatch: Option<String>,
    /// Number of coefficients compared.
    pub compared: usize,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl CheckReport {
    pub fn new(identity: impl Into<String>, window: impl Into<String>) -> Self {
        CheckReport {
            identity: identity.into(),
            window: window.into(),
            status: Status::Pass,
            first_mismatch: None,
            compared: 0,
            detail: Value::Null,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn fail(&mut self, mismatch: impl Into<String>) {
        if self.status != Status::Fail {
            self.status = Status::Fail;
            self.first_mismatch = Some(mismatch.into());
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    /// Folds several reports into one, keeping the first failure.
    pub fn combine(identity: impl Into<String>, window: impl Into<String>, parts: &[CheckReport]) -> Self {
        let mut out = CheckReport::new(identity, window);
        for p in parts {
            out.compared += p.compared;
            if p.status == Status::Fail {
                out.fail(format!("{}: {}", p.identity, p.first_mismatch.clone().unwrap_or_default()));
            }
        }
        out
    }
}
