//! JSON wire helpers shared by every report.
//!
//! Exact quantities are written as `{"exact": "p/q", "approx": f64}` so that
//! consumers can either compare strings or plot floats. Reports never carry
//! wall-clock data unless the caller adds it explicitly.

use serde::{Deserialize, Serialize, Serializer};

use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub exact: String,
    pub approx: f64,
}

impl ExactValue {
    pub fn new(r: &Rational) -> ExactValue {
        ExactValue { exact: rational::to_string(r), approx: rational::to_f64(r) }
    }

    pub fn parse(&self) -> crate::Result<Rational> {
        rational::parse(&self.exact)
    }
}

impl From<&Rational> for ExactValue {
    fn from(r: &Rational) -> Self {
        ExactValue::new(r)
    }
}

/// `serialize_with` adapter for `Rational` fields.
pub fn exact<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    ExactValue::new(r).serialize(s)
}

/// `serialize_with` adapter for `Option<Rational>` fields.
pub fn exact_opt<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    r.as_ref().map(ExactValue::new).serialize(s)
}

/// `serialize_with` adapter for `Vec<Rational>` fields.
pub fn exact_vec<S: Serializer>(r: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(r.iter().map(ExactValue::new))
}

/// Identification block placed at the top of every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(seed: Option<u64>) -> Provenance {
        Provenance { tool: "shiftgame".into(), version: crate::VERSION.into(), seed }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn exact_value_round_trip() {
        let v = ExactValue::new(&ratio(-3, 8));
        assert_eq!(v.exact, "-3/8");
        assert_eq!(v.approx, -0.375);
        assert_eq!(v.parse().unwrap(), ratio(-3, 8));
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"{"exact":"-3/8","approx":-0.375}"#);
    }
}
