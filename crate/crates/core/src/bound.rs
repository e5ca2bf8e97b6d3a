use std::collections::BTreeMap;
use std::fmt;

/// Whether a bound sits above or below capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundKind {
    Upper,
    Lower,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Upper => "upper",
            Self::Lower => "lower",
        })
    }
}

/// A named capacity bound in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub name: &'static str,
    pub kind: BoundKind,
    pub value_bits: f64,
    pub params: BTreeMap<String, f64>,
    pub diagnostics: Vec<String>,
    /// Published-convention variant; reported but never used in sandwich checks.
    pub reference_variant: bool,
}

impl BoundResult {
    pub(crate) fn new(name: &'static str, kind: BoundKind, value_bits: f64) -> Self {
        Self {
            name,
            kind,
            value_bits,
            params: BTreeMap::new(),
            diagnostics: Vec::new(),
            reference_variant: false,
        }
    }

    pub(crate) fn upper(name: &'static str, value_bits: f64) -> Self {
        Self::new(name, BoundKind::Upper, value_bits)
    }

    pub(crate) fn lower(name: &'static str, value_bits: f64) -> Self {
        Self::new(name, BoundKind::Lower, value_bits)
    }

    /// Clamps negative raw values to zero, noting it in the diagnostics.
    pub(crate) fn clamped(name: &'static str, kind: BoundKind, raw_bits: f64) -> Self {
        let mut r = Self::new(name, kind, raw_bits.max(0.0));
        if raw_bits < 0.0 {
            r.diagnostics.push(format!("clamped raw value {raw_bits:e} to 0"));
        }
        r
    }

    pub(crate) fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.diagnostics.push(note.into());
        self
    }

    pub(crate) fn as_reference_variant(mut self) -> Self {
        self.reference_variant = true;
        self
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// Diagnostics joined with `; `.
    pub fn note(&self) -> String {
        self.diagnostics.join("; ")
    }
}

pub(crate) const LN_2PI_E: f64 = 2.837_877_066_409_345_3;

pub(crate) fn bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}
