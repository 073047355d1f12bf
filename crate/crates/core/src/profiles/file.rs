//! On-disk profile format.
//!
//! ```json
//! {"depth": 0, "sigma_g": ["1", "1"], "sigma_r1": ["1", "1"], "sigma_r2": ["1", "1"]}
//! ```
//!
//! Entries are indexed by cylinder code and may be `"p/q"` strings, decimal
//! strings or bare JSON numbers. Writing always produces `"p/q"` strings.

use serde::{Deserialize, Serialize};

use super::StrategyProfile;
use crate::error::Result;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub depth: u32,
    pub sigma_g: Vec<Entry>,
    pub sigma_r1: Vec<Entry>,
    pub sigma_r2: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Text(String),
    Number(serde_json::Number),
}

impl Entry {
    fn value(&self) -> Result<Rational> {
        match self {
            Entry::Text(s) => rational::parse(s),
            Entry::Number(n) => rational::parse(&n.to_string()),
        }
    }
}

fn parse_all(entries: &[Entry]) -> Result<Vec<Rational>> {
    entries.iter().map(Entry::value).collect()
}

fn write_all(values: &[Rational]) -> Vec<Entry> {
    values.iter().map(|v| Entry::Text(rational::to_string(v))).collect()
}

impl ProfileFile {
    pub fn from_json(text: &str) -> Result<ProfileFile> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_profile(&self) -> Result<StrategyProfile> {
        StrategyProfile::new(
            self.depth,
            parse_all(&self.sigma_g)?,
            parse_all(&self.sigma_r1)?,
            parse_all(&self.sigma_r2)?,
        )
    }
}

impl From<&StrategyProfile> for ProfileFile {
    fn from(p: &StrategyProfile) -> Self {
        ProfileFile {
            depth: p.depth(),
            sigma_g: write_all(p.sigma_g()),
            sigma_r1: write_all(p.sigma_r1()),
            sigma_r2: write_all(p.sigma_r2()),
        }
    }
}

impl StrategyProfile {
    pub fn from_json(text: &str) -> Result<StrategyProfile> {
        ProfileFile::from_json(text)?.to_profile()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ProfileFile::from(self))?)
    }
}
