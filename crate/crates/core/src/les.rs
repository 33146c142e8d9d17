//! The four-attribute event schema and its canonical serializations.
//!
//! Every event in a case's legal history is a record of four free-text
//! attributes: when it happened, what happened, which judge(s) acted, and
//! which precedent(s) were cited. A timeline is an ordered sequence of such
//! records, kept exactly in the order the producing agent emitted it —
//! chronological correctness is a scored quality dimension, never a
//! post-processing step here.
//!
//! Judge and precedent use the literal marker `"N/A"` when not applicable,
//! so every record always carries all four attributes. That marker is this
//! engine's convention; producing agents are instructed to emit it via the
//! shipped prompt templates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Marker for a judge or precedent attribute that does not apply.
pub const NA_MARKER: &str = "N/A";

/// The four schema attributes, in canonical rendering order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventField {
    Timestamp,
    Event,
    Judge,
    Precedent,
}

impl EventField {
    /// All four fields in canonical order.
    pub const ORDER: [EventField; 4] = [
        EventField::Timestamp,
        EventField::Event,
        EventField::Judge,
        EventField::Precedent,
    ];

    /// The bit-exact JSON key for this field.
    pub fn json_key(self) -> &'static str {
        match self {
            EventField::Timestamp => "Timestamp",
            EventField::Event => "Event",
            EventField::Judge => "Judge",
            EventField::Precedent => "Precedent",
        }
    }

    /// Lowercase name used in violation reports.
    pub fn name(self) -> &'static str {
        match self {
            EventField::Timestamp => "timestamp",
            EventField::Event => "event",
            EventField::Judge => "judge",
            EventField::Precedent => "precedent",
        }
    }
}

impl fmt::Display for EventField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why a field failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// The key is absent from the object.
    Missing,
    /// The value is present but is not a JSON string.
    NotText,
    /// The value is empty after whitespace trimming.
    Empty,
}

/// A single schema violation found by [`validate_event`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldViolation {
    pub field: EventField,
    pub kind: ViolationKind,
}

impl fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ViolationKind::Missing => "missing",
            ViolationKind::NotText => "not text",
            ViolationKind::Empty => "empty",
        };
        write!(f, "{}: {}", self.field, kind)
    }
}

/// One event in a case's legal history.
///
/// Serializes to a JSON object with exactly the keys `"Timestamp"`,
/// `"Event"`, `"Judge"`, `"Precedent"` — the on-disk and on-wire event
/// format everywhere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    #[serde(rename = "Timestamp")]
    pub timestamp: String,
    #[serde(rename = "Event")]
    pub event: String,
    #[serde(rename = "Judge")]
    pub judge: String,
    #[serde(rename = "Precedent")]
    pub precedent: String,
}

impl EventRecord {
    pub fn new(
        timestamp: impl Into<String>,
        event: impl Into<String>,
        judge: impl Into<String>,
        precedent: impl Into<String>,
    ) -> Self {
        Self {
            timestamp: timestamp.into(),
            event: event.into(),
            judge: judge.into(),
            precedent: precedent.into(),
        }
    }

    /// True when the precedent attribute carries a citation rather than the
    /// not-applicable marker.
    pub fn has_precedent(&self) -> bool {
        let p = self.precedent.trim();
        !p.is_empty() && p != NA_MARKER
    }

    /// Re-check the schema invariants on an already-typed record.
    pub fn field_violations(&self) -> Vec<FieldViolation> {
        let mut violations = Vec::new();
        if self.timestamp.trim().is_empty() {
            violations.push(FieldViolation {
                field: EventField::Timestamp,
                kind: ViolationKind::Empty,
            });
        }
        if self.event.trim().is_empty() {
            violations.push(FieldViolation {
                field: EventField::Event,
                kind: ViolationKind::Empty,
            });
        }
        violations
    }
}

/// Validate one raw JSON value as an event record.
///
/// Total: violations are returned as data, never as a failure. A record is
/// accepted iff all four keys are present as strings and timestamp/event are
/// non-empty after trimming. Field text is preserved verbatim — no trimming
/// or other mutation of accepted values.
pub fn validate_event(value: &serde_json::Value) -> Result<EventRecord, Vec<FieldViolation>> {
    let Some(object) = value.as_object() else {
        return Err(EventField::ORDER
            .iter()
            .map(|&field| FieldViolation {
                field,
                kind: ViolationKind::Missing,
            })
            .collect());
    };

    let mut violations = Vec::new();
    let mut texts: [Option<&str>; 4] = [None; 4];
    for (slot, &field) in texts.iter_mut().zip(EventField::ORDER.iter()) {
        match object.get(field.json_key()) {
            None => violations.push(FieldViolation {
                field,
                kind: ViolationKind::Missing,
            }),
            Some(serde_json::Value::String(s)) => {
                let must_be_non_empty =
                    matches!(field, EventField::Timestamp | EventField::Event);
                if must_be_non_empty && s.trim().is_empty() {
                    violations.push(FieldViolation {
                        field,
                        kind: ViolationKind::Empty,
                    });
                } else {
                    *slot = Some(s);
                }
            }
            Some(_) => violations.push(FieldViolation {
                field,
                kind: ViolationKind::NotText,
            }),
        }
    }

    if !violations.is_empty() {
        return Err(violations);
    }
    Ok(EventRecord::new(
        texts[0].unwrap(),
        texts[1].unwrap(),
        texts[2].unwrap(),
        texts[3].unwrap(),
    ))
}

/// An ordered, non-empty sequence of event records.
///
/// Order is preserved exactly as parsed; the engine never re-sorts.
/// Serializes as a bare JSON array of event objects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventTimeline {
    events: Vec<EventRecord>,
}

/// A timeline must contain at least one event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("timeline contains no events")]
pub struct EmptyTimeline;

impl EventTimeline {
    pub fn new(events: Vec<EventRecord>) -> Result<Self, EmptyTimeline> {
        if events.is_empty() {
            return Err(EmptyTimeline);
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// A judgment document: the full text of a court decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentDocument {
    pub id: String,
    pub text: String,
    pub category: CaseCategory,
}

macro_rules! case_categories {
    ($($variant:ident => $name:literal,)+) => {
        /// One of the 25 case categories in the curated classification set.
        ///
        /// The set is closed and immutable at runtime.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum CaseCategory {
            $($variant,)+
        }

        impl CaseCategory {
            /// Every category, in classification order.
            pub const ALL: &'static [CaseCategory] = &[$(CaseCategory::$variant,)+];

            /// The verbatim category name.
            pub fn name(self) -> &'static str {
                match self {
                    $(CaseCategory::$variant => $name,)+
                }
            }
        }

        impl FromStr for CaseCategory {
            type Err = UnknownCategory;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(CaseCategory::$variant),)+
                    _ => Err(UnknownCategory(s.to_string())),
                }
            }
        }
    };
}

case_categories! {
    ConstitutionalLaw => "Constitutional Law",
    CivilLaw => "Civil Law",
    BankingAndFinanceLaw => "Banking and Finance Law",
    EducationLaw => "Education Law",
    IntellectualPropertyRights => "Intellectual Property Rights (IPR)",
    TaxationLaw => "Taxation Law",
    LaborAndEmploymentLaw => "Labor and Employment Law",
    FamilyLaw => "Family Law",
    ConsumerProtectionLaw => "Consumer Protection Law",
    CyberLaw => "Cyber Law",
    RealEstateAndPropertyLaw => "Real Estate and Property Law",
    CriminalLaw => "Criminal Law",
    ServiceLaw => "Service Law (Government Employees)",
    ContractLaw => "Contract Law",
    EnvironmentalLaw => "Environmental Law",
    CorporateLaw => "Corporate Law",
    AdministrativeLaw => "Administrative Law",
    InsuranceLaw => "Insurance Law",
    HealthAndMedicalLaw => "Health and Medical Law",
    MaritimeLaw => "Maritime Law",
    HumanRightsLaw => "Human Rights Law",
    ElectionLaw => "Election Law",
    EnergyAndMiningLaw => "Energy and Mining Law",
    TelecomLaw => "Telecom Law",
    CustomsAndExciseLaw => "Customs and Excise Law",
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown case category: {0:?}")]
pub struct UnknownCategory(pub String);

impl fmt::Display for CaseCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for CaseCategory {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for CaseCategory {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        name.parse().map_err(D::Error::custom)
    }
}

/// Options for the canonical text rendering of a timeline.
///
/// The field order is fixed (timestamp, event, judge, precedent); only the
/// record delimiter is configurable. Rendering the same timeline twice with
/// the same options yields byte-identical text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimelineRenderOptions {
    /// Text inserted between consecutive record blocks.
    pub separator: String,
}

impl Default for TimelineRenderOptions {
    fn default() -> Self {
        Self {
            separator: "\n\n".to_string(),
        }
    }
}

// Field values are escaped so each rendered field occupies exactly one line;
// this is what makes the canonical form parseable back without loss.
fn escape_field(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for ch in value.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            other => out.push(other),
        }
    }
    out
}

fn unescape_field(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Render a timeline as deterministic text: one four-line block per record,
/// fields in canonical order, records in timeline order.
pub fn canonical_render(timeline: &EventTimeline, opts: &TimelineRenderOptions) -> String {
    let blocks: Vec<String> = timeline
        .events()
        .iter()
        .map(|record| {
            let values = [
                &record.timestamp,
                &record.event,
                &record.judge,
                &record.precedent,
            ];
            EventField::ORDER
                .iter()
                .zip(values)
                .map(|(field, value)| format!("{}: {}", field.json_key(), escape_field(value)))
                .collect::<Vec<_>>()
                .join("\n")
        })
        .collect();
    blocks.join(&opts.separator)
}

/// Failure to read canonically rendered timeline text back.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CanonicalParseError {
    #[error("line {line}: expected `{expected}: ...`, found {found:?}")]
    UnexpectedLine {
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("record starting at line {start} is truncated")]
    TruncatedRecord { start: usize },
    #[error("text contains no event records")]
    Empty,
}

/// Read canonically rendered text back into a timeline, field-for-field.
///
/// Inverse of [`canonical_render`] for any valid timeline rendered with the
/// same options.
pub fn parse_canonical(
    text: &str,
    opts: &TimelineRenderOptions,
) -> Result<EventTimeline, CanonicalParseError> {
    let separator_line = opts.separator.trim();
    let mut events = Vec::new();
    let mut lines = text.lines().enumerate();

    while let Some((line_no, line)) = lines.next() {
        let trimmed = line.trim();
        if trimmed.is_empty() || (!separator_line.is_empty() && trimmed == separator_line) {
            continue;
        }
        let mut values = Vec::with_capacity(4);
        let mut current = (line_no, line);
        for (i, field) in EventField::ORDER.iter().enumerate() {
            if i > 0 {
                current = lines
                    .next()
                    .ok_or(CanonicalParseError::TruncatedRecord { start: line_no + 1 })?;
            }
            let prefix = format!("{}: ", field.json_key());
            let rest = current.1.strip_prefix(&prefix).ok_or_else(|| {
                CanonicalParseError::UnexpectedLine {
                    line: current.0 + 1,
                    expected: field.json_key(),
                    found: current.1.to_string(),
                }
            })?;
            values.push(unescape_field(rest));
        }
        let mut values = values.into_iter();
        events.push(EventRecord {
            timestamp: values.next().unwrap(),
            event: values.next().unwrap(),
            judge: values.next().unwrap(),
            precedent: values.next().unwrap(),
        });
    }

    EventTimeline::new(events).map_err(|_| CanonicalParseError::Empty)
}

/// A sortable (year, month, day) key recovered from a free-text temporal
/// expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DateKey {
    pub year: i32,
    pub month: u32,
    pub day: u32,
}

fn month_number(name: &str) -> Option<u32> {
    let lower = name.to_ascii_lowercase();
    let stem = lower.trim_end_matches('.');
    Some(match stem {
        "january" | "jan" => 1,
        "february" | "feb" => 2,
        "march" | "mar" => 3,
        "april" | "apr" => 4,
        "may" => 5,
        "june" | "jun" => 6,
        "july" | "jul" => 7,
        "august" | "aug" => 8,
        "september" | "sept" | "sep" => 9,
        "october" | "oct" => 10,
        "november" | "nov" => 11,
        "december" | "dec" => 12,
        _ => return None,
    })
}

const MONTH_PATTERN: &str = "(?:january|february|march|april|may|june|july|august|september|\
                             october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|\
                             oct|nov|dec)\\.?";

struct TimestampPatterns {
    numeric_dmy: Regex,
    day_month_year: Regex,
    month_day_year: Regex,
    month_year: Regex,
    bare_year: Regex,
}

fn timestamp_patterns() -> &'static TimestampPatterns {
    static PATTERNS: OnceLock<TimestampPatterns> = OnceLock::new();
    PATTERNS.get_or_init(|| TimestampPatterns {
        numeric_dmy: Regex::new(r"\b(\d{1,2})[./-](\d{1,2})[./-](\d{4})\b").unwrap(),
        day_month_year: Regex::new(&format!(
            r"(?i)\b(\d{{1,2}})(?:st|nd|rd|th)?\s+({MONTH_PATTERN}),?\s+(\d{{4}})\b"
        ))
        .unwrap(),
        month_day_year: Regex::new(&format!(
            r"(?i)\b({MONTH_PATTERN})\s+(\d{{1,2}})(?:st|nd|rd|th)?\s*,?\s+(\d{{4}})\b"
        ))
        .unwrap(),
        month_year: Regex::new(&format!(r"(?i)\b({MONTH_PATTERN}),?\s+(\d{{4}})\b")).unwrap(),
        bare_year: Regex::new(r"\b([12]\d{3})\b").unwrap(),
    })
}

fn plausible(month: u32, day: u32) -> bool {
    (1..=12).contains(&month) && (1..=31).contains(&day)
}

/// Best-effort recovery of a sortable date key from a free-text temporal
/// expression.
///
/// Recognizes English month names and numeric day-month-year forms only.
/// A month without a day maps to day 1; a bare year maps to January 1.
/// Anything else yields `None`. Used for diagnostics, never for re-sorting.
pub fn normalize_timestamp(text: &str) -> Option<DateKey> {
    let patterns = timestamp_patterns();

    for caps in patterns.numeric_dmy.captures_iter(text) {
        let day: u32 = caps[1].parse().ok()?;
        let month: u32 = caps[2].parse().ok()?;
        let year: i32 = caps[3].parse().ok()?;
        if plausible(month, day) {
            return Some(DateKey { year, month, day });
        }
    }
    for caps in patterns.day_month_year.captures_iter(text) {
        let day: u32 = caps[1].parse().ok()?;
        let month = month_number(&caps[2])?;
        let year: i32 = caps[3].parse().ok()?;
        if plausible(month, day) {
            return Some(DateKey { year, month, day });
        }
    }
    for caps in patterns.month_day_year.captures_iter(text) {
        let month = month_number(&caps[1])?;
        let day: u32 = caps[2].parse().ok()?;
        let year: i32 = caps[3].parse().ok()?;
        if plausible(month, day) {
            return Some(DateKey { year, month, day });
        }
    }
    if let Some(caps) = patterns.month_year.captures(text) {
        let month = month_number(&caps[1])?;
        let year: i32 = caps[2].parse().ok()?;
        return Some(DateKey {
            year,
            month,
            day: 1,
        });
    }
    if let Some(caps) = patterns.bare_year.captures(text) {
        let year: i32 = caps[1].parse().ok()?;
        return Some(DateKey {
            year,
            month: 1,
            day: 1,
        });
    }
    None
}

/// Per-category record counts, keyed by verbatim category name.
pub type CategoryCounts = BTreeMap<String, usize>;
