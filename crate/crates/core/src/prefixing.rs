//! Prefix logs: every trace truncated at the admissible lengths
//! `1, 1 + g, 1 + 2g, ...` up to `min(trace length, k)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::{AttributeSpec, Event, LabeledLog, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrefixSpec {
    pub max_prefix_len: usize,
    pub gap: usize,
}

impl PrefixSpec {
    pub fn new(max_prefix_len: usize, gap: usize) -> Result<Self> {
        let spec = PrefixSpec { max_prefix_len, gap };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_prefix_len == 0 || self.gap == 0 {
            return Err(Error::InvalidConfig(format!(
                "prefix spec needs k >= 1 and g >= 1, got k={} g={}",
                self.max_prefix_len, self.gap
            )));
        }
        Ok(())
    }
}

/// Admissible prefix lengths for a trace of `trace_len` events.
pub fn prefix_lengths(trace_len: usize, spec: PrefixSpec) -> Vec<usize> {
    let cap = trace_len.min(spec.max_prefix_len);
    (1..=cap).step_by(spec.gap.max(1)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prefix {
    pub case_id: String,
    pub prefix_len: usize,
    pub events: Vec<Event>,
    pub static_values: BTreeMap<String, Value>,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixLog {
    pub schema: Vec<AttributeSpec>,
    pub prefixes: Vec<Prefix>,
    pub spec: PrefixSpec,
}

pub fn build_prefix_log(log: &LabeledLog, spec: PrefixSpec) -> Result<PrefixLog> {
    spec.validate()?;
    if log.log.traces.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut prefixes = Vec::new();
    for t in &log.log.traces {
        let label = log.label(&t.case_id);
        for len in prefix_lengths(t.len(), spec) {
            prefixes.push(Prefix {
                case_id: t.case_id.clone(),
                prefix_len: len,
                events: t.events[..len].to_vec(),
                static_values: t.static_values.clone(),
                label,
            });
        }
    }
    Ok(PrefixLog {
        schema: log.log.schema.clone(),
        prefixes,
        spec,
    })
}
