//! Error classification and output rendering.

use serde_json::{json, Value};
use subgroups::amenability::AmenabilityError;
use subgroups::chabauty::ChabautyError;
use subgroups::cosets::CosetError;
use subgroups::permrep::PermRepError;
use subgroups::stallings::StallingsError;
use subgroups::words::WordError;

use crate::config::Format;

/// A module error reduced to the module that raised it and the variant name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainError {
    pub module: &'static str,
    pub kind: &'static str,
    pub message: String,
}

impl DomainError {
    pub fn new(module: &'static str, kind: &'static str, message: impl Into<String>) -> DomainError {
        DomainError { module, kind, message: message.into() }
    }

    pub fn to_json(&self) -> Value {
        json!({"error": {"module": self.module, "kind": self.kind, "message": self.message}})
    }
}

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments; exit code 2.
    Usage(String),
    /// A structured module error; exit code 1.
    Domain(DomainError),
}

impl From<WordError> for DomainError {
    fn from(e: WordError) -> DomainError {
        let kind = match &e {
            WordError::Syntax { .. } => "Syntax",
            WordError::UnknownGenerator(_) => "UnknownGenerator",
            WordError::EmptyAlphabet => "EmptyAlphabet",
            WordError::DuplicateGenerator(_) => "DuplicateGenerator",
            WordError::InvalidGeneratorName(_) => "InvalidGeneratorName",
            WordError::IndexOutOfRange { .. } => "IndexOutOfRange",
            WordError::AlphabetMismatch => "AlphabetMismatch",
        };
        DomainError::new("words", kind, e.to_string())
    }
}

impl From<CosetError> for DomainError {
    fn from(e: CosetError) -> DomainError {
        let kind = match e {
            CosetError::Word(inner) => return inner.into(),
            CosetError::Overflow { .. } => "Overflow",
            CosetError::AlphabetMismatch => "AlphabetMismatch",
            CosetError::ResourceBudgetExceeded { .. } => "ResourceBudgetExceeded",
            CosetError::InvalidTable(_) => "InvalidTable",
        };
        DomainError::new("cosets", kind, e.to_string())
    }
}

impl From<StallingsError> for DomainError {
    fn from(e: StallingsError) -> DomainError {
        let kind = match e {
            StallingsError::SeparationImpossible => "SeparationImpossible",
            StallingsError::NotFree => "NotFree",
            StallingsError::AlphabetMismatch => "AlphabetMismatch",
        };
        DomainError::new("stallings", kind, e.to_string())
    }
}

impl From<ChabautyError> for DomainError {
    fn from(e: ChabautyError) -> DomainError {
        let kind = match e {
            ChabautyError::Cosets(inner) => return inner.into(),
            ChabautyError::Stallings(inner) => return inner.into(),
            ChabautyError::AlphabetMismatch => "AlphabetMismatch",
            ChabautyError::NotFiniteIndex => "NotFiniteIndex",
            ChabautyError::ConstraintOverlap(_) => "ConstraintOverlap",
        };
        DomainError::new("chabauty", kind, e.to_string())
    }
}

impl From<PermRepError> for DomainError {
    fn from(e: PermRepError) -> DomainError {
        let kind = match e {
            PermRepError::Chabauty(inner) => return inner.into(),
            PermRepError::Cosets(inner) => return inner.into(),
            PermRepError::WindowExhausted { .. } => "WindowExhausted",
            PermRepError::PointOutOfRange { .. } => "PointOutOfRange",
            PermRepError::AlphabetMismatch => "AlphabetMismatch",
            PermRepError::NotABijection(_) => "NotABijection",
            PermRepError::WindowMismatch { .. } => "WindowMismatch",
            PermRepError::ConjugateDuplicate(..) => "ConjugateDuplicate",
            PermRepError::InvalidClassification(_) => "InvalidClassification",
            PermRepError::RelatorViolated(_) => "RelatorViolated",
        };
        DomainError::new("permrep", kind, e.to_string())
    }
}

impl From<AmenabilityError> for DomainError {
    fn from(e: AmenabilityError) -> DomainError {
        let kind = match e {
            AmenabilityError::PermRep(inner) => return inner.into(),
            AmenabilityError::Cosets(inner) => return inner.into(),
            AmenabilityError::EmptySet => "EmptySet",
            AmenabilityError::WindowExhausted { .. } => "WindowExhausted",
            AmenabilityError::InvalidEpsilon => "InvalidEpsilon",
            AmenabilityError::InvalidRational(_) => "InvalidRational",
            AmenabilityError::InsufficientFixedPoints { .. } => "InsufficientFixedPoints",
            AmenabilityError::NoFolnerInOrbit => "NoFolnerInOrbit",
        };
        DomainError::new("amenability", kind, e.to_string())
    }
}

impl<E: Into<DomainError>> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure::Domain(e.into())
    }
}

/// A command result, renderable in each format it supports.
#[derive(Debug, Default)]
pub struct Output {
    pub json: Value,
    pub text: Option<String>,
    pub dot: Option<String>,
    pub csv: Option<String>,
}

impl Output {
    pub fn json(json: Value) -> Output {
        Output { json, ..Output::default() }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Output {
        self.text = Some(text.into());
        self
    }

    pub fn with_dot(mut self, dot: String) -> Output {
        self.dot = Some(dot);
        self
    }

    pub fn with_csv(mut self, csv: String) -> Output {
        self.csv = Some(csv);
        self
    }

    /// The rendered output, or `UnsupportedFormat`.
    pub fn render(self, format: Format) -> Result<String, DomainError> {
        let unsupported = |name: &str| DomainError::new("harness", "UnsupportedFormat", format!("this command has no {name} output"));
        let mut out = match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("values serialise"),
            Format::Text => self.text.ok_or_else(|| unsupported("text"))?,
            Format::Dot => self.dot.ok_or_else(|| unsupported("dot"))?,
            Format::Csv => self.csv.ok_or_else(|| unsupported("csv"))?,
        };
        if !out.ends_with('\n') {
            out.push('\n');
        }
        Ok(out)
    }
}

/// FNV-1a over the canonical rows, printed in hex.
pub fn table_hash(rows: &[Vec<usize>]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    feed(rows.len() as u64);
    for row in rows {
        for &d in row {
            feed(d as u64);
        }
    }
    format!("{h:016x}")
}

/// Rows as CSV with a header `point,<col0>,<col1>,...`.
pub fn rows_csv<T: std::fmt::Display>(header: &[String], rows: &[Vec<T>]) -> String {
    let mut out = format!("point,{}\n", header.join(","));
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        out.push_str(&format!("{i},{}\n", cells.join(",")));
    }
    out
}
