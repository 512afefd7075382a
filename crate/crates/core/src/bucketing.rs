//! Offline bucketing of prefixes and online routing of running cases.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefixing::{Prefix, PrefixLog};

/// Bucketing strategies. Only `Single` and `PrefixLength` are implemented;
/// the remaining kinds are accepted in configs and rejected at assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BucketingStrategy {
    Single,
    PrefixLength,
    State,
    Clustering,
    DomainKnowledge,
}

impl BucketingStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            BucketingStrategy::Single => "single",
            BucketingStrategy::PrefixLength => "prefix_length",
            BucketingStrategy::State => "state",
            BucketingStrategy::Clustering => "clustering",
            BucketingStrategy::DomainKnowledge => "domain_knowledge",
        }
    }

    pub fn is_supported(&self) -> bool {
        matches!(self, BucketingStrategy::Single | BucketingStrategy::PrefixLength)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BucketKey {
    All,
    Length(usize),
}

impl fmt::Display for BucketKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BucketKey::All => f.write_str("ALL"),
            BucketKey::Length(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketedLog {
    pub strategy: BucketingStrategy,
    pub buckets: BTreeMap<BucketKey, Vec<Prefix>>,
}

impl BucketedLog {
    pub fn keys(&self) -> impl Iterator<Item = BucketKey> + '_ {
        self.buckets.keys().copied()
    }

    pub fn prefix_count(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }
}

pub fn assign_buckets(plog: &PrefixLog, strategy: BucketingStrategy) -> Result<BucketedLog> {
    if !strategy.is_supported() {
        return Err(Error::UnsupportedStrategy(strategy.name().into()));
    }
    if plog.prefixes.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut buckets: BTreeMap<BucketKey, Vec<Prefix>> = BTreeMap::new();
    for p in &plog.prefixes {
        buckets.entry(key_for(strategy, p.prefix_len)).or_default().push(p.clone());
    }
    Ok(BucketedLog { strategy, buckets })
}

fn key_for(strategy: BucketingStrategy, len: usize) -> BucketKey {
    match strategy {
        BucketingStrategy::PrefixLength => BucketKey::Length(len),
        _ => BucketKey::All,
    }
}

/// Routes a running case to a bucket: the single bucket, or the largest
/// bucketed prefix length not exceeding the case's length.
pub fn lookup_bucket(blog: &BucketedLog, partial: &Prefix) -> Result<BucketKey> {
    lookup_length(blog, partial.prefix_len.max(partial.events.len()))
}

pub fn lookup_length(blog: &BucketedLog, len: usize) -> Result<BucketKey> {
    if blog.buckets.is_empty() {
        return Err(Error::EmptyBucket);
    }
    match blog.strategy {
        BucketingStrategy::Single => Ok(BucketKey::All),
        BucketingStrategy::PrefixLength => blog
            .buckets
            .range(..=BucketKey::Length(len))
            .next_back()
            .map(|(k, _)| *k)
            .ok_or(Error::NoApplicableBucket(len)),
        other => Err(Error::UnsupportedStrategy(other.name().into())),
    }
}
