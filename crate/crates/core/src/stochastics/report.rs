use serde::Serialize;

/// Sample metadata attached to every report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SampleInfo {
    pub n: usize,
    pub replicas: usize,
    pub seed: u64,
}

/// One statistical check: `pass` iff `|estimate - reference| <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatReport {
    pub name: String,
    pub estimate: f64,
    pub reference: f64,
    /// Where the reference value comes from.
    pub reference_source: String,
    pub tolerance: f64,
    pub standard_error: Option<f64>,
    pub pass: bool,
    pub sample: SampleInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl StatReport {
    pub fn new(
        name: impl Into<String>,
        estimate: f64,
        reference: f64,
        reference_source: impl Into<String>,
        tolerance: f64,
        sample: SampleInfo,
    ) -> Self {
        StatReport {
            name: name.into(),
            estimate,
            reference,
            reference_source: reference_source.into(),
            tolerance,
            standard_error: None,
            pass: (estimate - reference).abs() <= tolerance,
            sample,
            note: None,
        }
    }

    pub fn with_standard_error(mut self, se: f64) -> Self {
        self.standard_error = Some(se);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

pub fn all_pass(reports: &[StatReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
