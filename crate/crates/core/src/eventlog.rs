//! Event logs: parsing, labeling, statistics, temporal splits and a seeded
//! synthetic generator.
//!
//! A log is ingested from a CSV file with the header
//! `case_id,activity,timestamp,<attr...>` plus a JSON schema sidecar of the
//! form `{"static": {"name": "categorical"|"numeric"}, "dynamic": {...}}`.
//! Timestamps are ISO-8601 with an offset and are stored as epoch
//! milliseconds. Traces are kept sorted by the timestamp of their first
//! event (ties broken by case id) and events inside a trace by timestamp
//! (ties broken by input order).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CASE_ID: &str = "case_id";
pub const ACTIVITY: &str = "activity";
pub const TIMESTAMP: &str = "timestamp";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub scope: Scope,
    pub kind: Kind,
}

impl AttributeSpec {
    pub fn new(name: impl Into<String>, scope: Scope, kind: Kind) -> Self {
        AttributeSpec {
            name: name.into(),
            scope,
            kind,
        }
    }
}

/// An attribute value. `Missing` is the explicit missing marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Cat(String),
    Missing,
}

impl Value {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            Value::Cat(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    fn parse(raw: &str, kind: Kind, row: usize, attribute: &str) -> Result<Value> {
        if raw.is_empty() {
            return Ok(Value::Missing);
        }
        match kind {
            Kind::Categorical => Ok(Value::Cat(raw.to_string())),
            Kind::Numeric => raw
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Value::Num)
                .ok_or_else(|| Error::BadNumber {
                    row,
                    attribute: attribute.to_string(),
                    value: raw.to_string(),
                }),
        }
    }

    fn to_field(&self) -> String {
        match self {
            Value::Num(x) => format!("{x}"),
            Value::Cat(s) => s.clone(),
            Value::Missing => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub activity: String,
    /// Epoch milliseconds.
    pub timestamp: i64,
    pub values: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: String,
    pub static_values: BTreeMap<String, Value>,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn start(&self) -> i64 {
        self.events.first().map(|e| e.timestamp).unwrap_or(0)
    }

    /// Milliseconds between the first and the last event.
    pub fn duration_ms(&self) -> i64 {
        match (self.events.first(), self.events.last()) {
            (Some(a), Some(b)) => b.timestamp - a.timestamp,
            _ => 0,
        }
    }

    pub fn activities(&self) -> Vec<&str> {
        self.events.iter().map(|e| e.activity.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub schema: Vec<AttributeSpec>,
    pub traces: Vec<Trace>,
}

/// Checks name uniqueness and that no mandatory column is declared.
pub fn validate_schema(schema: &[AttributeSpec]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for a in schema {
        if [CASE_ID, ACTIVITY, TIMESTAMP].contains(&a.name.as_str()) {
            return Err(Error::InvalidSchema(format!(
                "`{}` is a mandatory column and cannot be declared as an attribute",
                a.name
            )));
        }
        if a.name.starts_with("__") {
            return Err(Error::InvalidSchema(format!("reserved attribute name `{}`", a.name)));
        }
        if !seen.insert(a.name.as_str()) {
            return Err(Error::InvalidSchema(format!("duplicate attribute `{}`", a.name)));
        }
    }
    Ok(())
}

impl EventLog {
    /// Validates the schema and trace shapes and brings traces into canonical order.
    pub fn new(schema: Vec<AttributeSpec>, mut traces: Vec<Trace>) -> Result<Self> {
        validate_schema(&schema)?;
        let mut ids = BTreeSet::new();
        for t in &mut traces {
            if t.events.is_empty() {
                return Err(Error::InvalidConfig(format!("trace `{}` has no events", t.case_id)));
            }
            if !ids.insert(t.case_id.clone()) {
                return Err(Error::InvalidConfig(format!("duplicate case id `{}`", t.case_id)));
            }
            for a in &schema {
                match a.scope {
                    Scope::Static => {
                        t.static_values.entry(a.name.clone()).or_insert(Value::Missing);
                    }
                    Scope::Dynamic => {
                        for e in &mut t.events {
                            e.values.entry(a.name.clone()).or_insert(Value::Missing);
                        }
                    }
                }
            }
            if let Some(bad) = t
                .static_values
                .keys()
                .find(|k| !schema.iter().any(|a| a.scope == Scope::Static && &a.name == *k))
            {
                return Err(Error::UnknownAttribute(bad.clone()));
            }
            // stable: ties keep input order
            t.events.sort_by_key(|e| e.timestamp);
        }
        traces.sort_by(|a, b| a.start().cmp(&b.start()).then_with(|| a.case_id.cmp(&b.case_id)));
        Ok(EventLog { schema, traces })
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.schema.iter().find(|a| a.name == name)
    }

    pub fn attributes(&self, scope: Scope, kind: Kind) -> impl Iterator<Item = &AttributeSpec> {
        self.schema
            .iter()
            .filter(move |a| a.scope == scope && a.kind == kind)
    }

    /// Reads a CSV log against an already-parsed schema.
    pub fn from_csv_reader<R: Read>(reader: R, schema: Vec<AttributeSpec>) -> Result<Self> {
        validate_schema(&schema)?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let position = |name: &str| headers.iter().position(|h| h == name);
        let case_col = position(CASE_ID).ok_or_else(|| Error::MissingColumn(CASE_ID.into()))?;
        let act_col = position(ACTIVITY).ok_or_else(|| Error::MissingColumn(ACTIVITY.into()))?;
        let ts_col = position(TIMESTAMP).ok_or_else(|| Error::MissingColumn(TIMESTAMP.into()))?;
        for h in headers.iter() {
            if h != CASE_ID && h != ACTIVITY && h != TIMESTAMP && !schema.iter().any(|a| a.name == h) {
                return Err(Error::UnknownColumn(h.to_string()));
            }
        }
        let mut attr_cols = Vec::with_capacity(schema.len());
        for a in &schema {
            let col = position(&a.name).ok_or_else(|| Error::MissingColumn(a.name.clone()))?;
            attr_cols.push((a, col));
        }

        let mut order: Vec<String> = Vec::new();
        let mut traces: HashMap<String, Trace> = HashMap::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row = i + 1;
            let case_id = record.get(case_col).unwrap_or_default().to_string();
            let activity = record.get(act_col).unwrap_or_default().to_string();
            if case_id.is_empty() || activity.is_empty() {
                return Err(Error::InvalidConfig(format!("row {row}: empty case id or activity")));
            }
            let raw_ts = record.get(ts_col).unwrap_or_default();
            let timestamp = parse_timestamp(raw_ts).ok_or_else(|| Error::BadTimestamp {
                row,
                value: raw_ts.to_string(),
            })?;
            let mut statics = BTreeMap::new();
            let mut values = BTreeMap::new();
            for (a, col) in &attr_cols {
                let v = Value::parse(record.get(*col).unwrap_or_default(), a.kind, row, &a.name)?;
                match a.scope {
                    Scope::Static => statics.insert(a.name.clone(), v),
                    Scope::Dynamic => values.insert(a.name.clone(), v),
                };
            }
            let event = Event {
                activity,
                timestamp,
                values,
            };
            match traces.get_mut(&case_id) {
                Some(t) => {
                    for (name, v) in &statics {
                        if t.static_values.get(name) != Some(v) {
                            return Err(Error::StaticAttributeVaries {
                                case_id,
                                attribute: name.clone(),
                            });
                        }
                    }
                    if t.events.contains(&event) {
                        return Err(Error::DuplicateEvent { row, case_id });
                    }
                    t.events.push(event);
                }
                None => {
                    order.push(case_id.clone());
                    traces.insert(
                        case_id.clone(),
                        Trace {
                            case_id,
                            static_values: statics,
                            events: vec![event],
                        },
                    );
                }
            }
        }
        let traces = order
            .into_iter()
            .map(|id| traces.remove(&id).expect("case recorded"))
            .collect();
        EventLog::new(schema, traces)
    }

    /// Writes the log in the ingestion CSV format (timestamps in UTC).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![CASE_ID.to_string(), ACTIVITY.to_string(), TIMESTAMP.to_string()];
        header.extend(self.schema.iter().map(|a| a.name.clone()));
        w.write_record(&header)?;
        for t in &self.traces {
            for e in &t.events {
                let mut rec = vec![t.case_id.clone(), e.activity.clone(), format_timestamp(e.timestamp)];
                for a in &self.schema {
                    let v = match a.scope {
                        Scope::Static => t.static_values.get(&a.name),
                        Scope::Dynamic => e.values.get(&a.name),
                    };
                    rec.push(v.map(Value::to_field).unwrap_or_default());
                }
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn case_ids(&self) -> Vec<&str> {
        self.traces.iter().map(|t| t.case_id.as_str()).collect()
    }
}

pub fn parse_timestamp(raw: &str) -> Option<i64> {
    DateTime::parse_from_rfc3339(raw.trim())
        .ok()
        .map(|dt| dt.timestamp_millis())
}

pub fn format_timestamp(ms: i64) -> String {
    Utc.timestamp_millis_opt(ms)
        .single()
        .map(|dt| dt.to_rfc3339_opts(SecondsFormat::Millis, true))
        .unwrap_or_else(|| ms.to_string())
}

/// Parses the JSON schema sidecar. Attribute order follows the file:
/// static attributes first, then dynamic ones.
pub fn parse_schema(json: &str) -> Result<Vec<AttributeSpec>> {
    let root: serde_json::Value = serde_json::from_str(json)?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::InvalidSchema("schema must be a JSON object".into()))?;
    for key in obj.keys() {
        if key != "static" && key != "dynamic" {
            return Err(Error::InvalidSchema(format!("unexpected key `{key}`")));
        }
    }
    let mut out = Vec::new();
    for (key, scope) in [("static", Scope::Static), ("dynamic", Scope::Dynamic)] {
        let Some(section) = obj.get(key) else { continue };
        let section = section
            .as_object()
            .ok_or_else(|| Error::InvalidSchema(format!("`{key}` must be an object")))?;
        for (name, kind) in section {
            let kind: Kind = serde_json::from_value(kind.clone())
                .map_err(|_| Error::InvalidSchema(format!("attribute `{name}` has an invalid kind")))?;
            out.push(AttributeSpec::new(name.clone(), scope, kind));
        }
    }
    validate_schema(&out)?;
    Ok(out)
}

pub fn schema_to_json(schema: &[AttributeSpec]) -> String {
    let mut stat = serde_json::Map::new();
    let mut dynamic = serde_json::Map::new();
    for a in schema {
        let kind = serde_json::to_value(a.kind).expect("kind serializes");
        match a.scope {
            Scope::Static => stat.insert(a.name.clone(), kind),
            Scope::Dynamic => dynamic.insert(a.name.clone(), kind),
        };
    }
    let mut root = serde_json::Map::new();
    root.insert("static".into(), serde_json::Value::Object(stat));
    root.insert("dynamic".into(), serde_json::Value::Object(dynamic));
    serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("schema serializes")
}

pub fn parse_event_log(csv_path: impl AsRef<Path>, schema_path: impl AsRef<Path>) -> Result<EventLog> {
    let schema_path = schema_path.as_ref();
    let schema_text = std::fs::read_to_string(schema_path).map_err(|e| Error::io(schema_path, e))?;
    let schema = parse_schema(&schema_text)?;
    let csv_path = csv_path.as_ref();
    let file = std::fs::File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    EventLog::from_csv_reader(std::io::BufReader::new(file), schema)
}

pub fn write_event_log(log: &EventLog, csv_path: impl AsRef<Path>, schema_path: impl AsRef<Path>) -> Result<()> {
    let csv_path = csv_path.as_ref();
    let file = std::fs::File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
    log.write_csv(std::io::BufWriter::new(file))?;
    let schema_path = schema_path.as_ref();
    std::fs::write(schema_path, schema_to_json(&log.schema)).map_err(|e| Error::io(schema_path, e))
}

// ---------------------------------------------------------------------------
// labeling

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelCondition {
    /// Positive iff the trace duration is at least `threshold_ms`.
    DurationThreshold { threshold_ms: i64 },
    /// Positive iff some event has this activity.
    ActivityOccurs { activity: String },
    /// Positive iff a static attribute has this value (numbers compare by value).
    StaticAttributeEquals { attribute: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelingRule {
    #[serde(flatten)]
    pub condition: LabelCondition,
    #[serde(default = "default_positive")]
    pub positive_class: String,
    #[serde(default = "default_negative")]
    pub negative_class: String,
}

fn default_positive() -> String {
    "deviant".into()
}

fn default_negative() -> String {
    "regular".into()
}

impl LabelingRule {
    pub fn new(condition: LabelCondition) -> Self {
        LabelingRule {
            condition,
            positive_class: default_positive(),
            negative_class: default_negative(),
        }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }
}

/// A log with one binary outcome per case (`true` = positive class).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledLog {
    pub log: EventLog,
    pub labels: BTreeMap<String, bool>,
    pub positive_class: String,
    pub negative_class: String,
}

impl LabeledLog {
    pub fn new(log: EventLog, labels: BTreeMap<String, bool>) -> Result<Self> {
        for t in &log.traces {
            if !labels.contains_key(&t.case_id) {
                return Err(Error::MissingLabel(t.case_id.clone()));
            }
        }
        if labels.len() != log.traces.len() {
            return Err(Error::InvalidConfig("labels reference unknown cases".into()));
        }
        Ok(LabeledLog {
            log,
            labels,
            positive_class: default_positive(),
            negative_class: default_negative(),
        })
    }

    pub fn label(&self, case_id: &str) -> bool {
        self.labels[case_id]
    }

    /// Reads `case_id,label` rows where label is `1`/`0`, `true`/`false`,
    /// or one of the class names.
    pub fn with_labels_csv<R: Read>(log: EventLog, reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut labels = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let id = rec.get(0).unwrap_or_default().to_string();
            let raw = rec.get(1).unwrap_or_default();
            let v = match raw {
                "1" | "true" | "positive" | "deviant" => true,
                "0" | "false" | "negative" | "regular" => false,
                other => return Err(Error::InvalidConfig(format!("bad label `{other}` for `{id}`"))),
            };
            labels.insert(id, v);
        }
        LabeledLog::new(log, labels)
    }

    pub fn write_labels_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["case_id", "label"])?;
        for t in &self.log.traces {
            w.write_record([t.case_id.as_str(), if self.labels[&t.case_id] { "1" } else { "0" }])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Keeps only the given cases, in log order.
    pub fn subset(&self, keep: &BTreeSet<&str>) -> LabeledLog {
        let traces: Vec<Trace> = self
            .log
            .traces
            .iter()
            .filter(|t| keep.contains(t.case_id.as_str()))
            .cloned()
            .collect();
        let labels = traces
            .iter()
            .map(|t| (t.case_id.clone(), self.labels[&t.case_id]))
            .collect();
        LabeledLog {
            log: EventLog {
                schema: self.log.schema.clone(),
                traces,
            },
            labels,
            positive_class: self.positive_class.clone(),
            negative_class: self.negative_class.clone(),
        }
    }
}

pub fn apply_labeling(log: &EventLog, rule: &LabelingRule) -> Result<LabeledLog> {
    if let LabelCondition::StaticAttributeEquals { attribute, .. } = &rule.condition {
        match log.attribute(attribute) {
            Some(a) if a.scope == Scope::Static => {}
            _ => return Err(Error::UnknownAttribute(attribute.clone())),
        }
    }
    let labels = log
        .traces
        .iter()
        .map(|t| {
            let positive = match &rule.condition {
                LabelCondition::DurationThreshold { threshold_ms } => t.duration_ms() >= *threshold_ms,
                LabelCondition::ActivityOccurs { activity } => t.events.iter().any(|e| &e.activity == activity),
                LabelCondition::StaticAttributeEquals { attribute, value } => match &t.static_values[attribute] {
                    Value::Cat(s) => s == value,
                    Value::Num(x) => value.parse::<f64>().map(|v| v == *x).unwrap_or(false),
                    Value::Missing => false,
                },
            };
            (t.case_id.clone(), positive)
        })
        .collect();
    let mut out = LabeledLog::new(log.clone(), labels)?;
    out.positive_class = rule.positive_class.clone();
    out.negative_class = rule.negative_class.clone();
    Ok(out)
}

// ---------------------------------------------------------------------------
// statistics

/// Summary statistics in the layout of a typical event-log overview table.
///
/// `activity` counts as a dynamic categorical column; the case id and the
/// timestamp are not counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogStatistics {
    pub trace_count: usize,
    pub shortest_trace_len: usize,
    pub avg_trace_len: f64,
    pub longest_trace_len: usize,
    pub trace_variant_count: usize,
    /// `None` for an unlabeled log.
    pub positive_class_ratio: Option<f64>,
    pub event_class_count: usize,
    pub static_col_count: usize,
    pub dynamic_col_count: usize,
    pub categorical_col_count: usize,
    pub numeric_col_count: usize,
    pub categorical_levels_static: usize,
    pub categorical_levels_dynamic: usize,
}

impl LogStatistics {
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        vec![
            ("# traces", self.trace_count.to_string()),
            ("short. trace len.", self.shortest_trace_len.to_string()),
            ("avg. trace len.", format!("{:.2}", self.avg_trace_len)),
            ("long. trace len.", self.longest_trace_len.to_string()),
            ("# trace variants", self.trace_variant_count.to_string()),
            (
                "% pos class",
                self.positive_class_ratio
                    .map(|r| format!("{r:.4}"))
                    .unwrap_or_else(|| "n/a".into()),
            ),
            ("# event class", self.event_class_count.to_string()),
            ("# static cols", self.static_col_count.to_string()),
            ("# dynamic cols", self.dynamic_col_count.to_string()),
            ("# cat cols", self.categorical_col_count.to_string()),
            ("# num cols", self.numeric_col_count.to_string()),
            ("# cat levels static", self.categorical_levels_static.to_string()),
            ("# cat levels dynamic", self.categorical_levels_dynamic.to_string()),
        ]
    }
}

impl fmt::Display for LogStatistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.rows() {
            writeln!(f, "{k:<22} {v}")?;
        }
        Ok(())
    }
}

pub fn compute_statistics(log: &LabeledLog) -> Result<LogStatistics> {
    let mut stats = log_statistics(&log.log)?;
    let positives = log.labels.values().filter(|&&l| l).count();
    stats.positive_class_ratio = Some(positives as f64 / log.labels.len() as f64);
    Ok(stats)
}

/// Statistics of an unlabeled log (`positive_class_ratio` is `None`).
pub fn log_statistics(log: &EventLog) -> Result<LogStatistics> {
    if log.traces.is_empty() {
        return Err(Error::EmptyLog);
    }
    let lens: Vec<usize> = log.traces.iter().map(Trace::len).collect();
    let variants: BTreeSet<Vec<&str>> = log.traces.iter().map(Trace::activities).collect();
    let activities: BTreeSet<&str> = log
        .traces
        .iter()
        .flat_map(|t| t.events.iter().map(|e| e.activity.as_str()))
        .collect();
    let count = |scope: Scope, kind: Option<Kind>| {
        log.schema
            .iter()
            .filter(|a| a.scope == scope && kind.is_none_or(|k| a.kind == k))
            .count()
    };
    let mut static_levels = 0;
    let mut dynamic_levels = activities.len();
    for a in log.schema.iter().filter(|a| a.kind == Kind::Categorical) {
        let levels: BTreeSet<&str> = match a.scope {
            Scope::Static => log
                .traces
                .iter()
                .filter_map(|t| t.static_values.get(&a.name).and_then(Value::as_cat))
                .collect(),
            Scope::Dynamic => log
                .traces
                .iter()
                .flat_map(|t| t.events.iter())
                .filter_map(|e| e.values.get(&a.name).and_then(Value::as_cat))
                .collect(),
        };
        match a.scope {
            Scope::Static => static_levels += levels.len(),
            Scope::Dynamic => dynamic_levels += levels.len(),
        }
    }
    let categorical = log.schema.iter().filter(|a| a.kind == Kind::Categorical).count() + 1;
    Ok(LogStatistics {
        trace_count: log.traces.len(),
        shortest_trace_len: *lens.iter().min().expect("non-empty"),
        avg_trace_len: lens.iter().sum::<usize>() as f64 / lens.len() as f64,
        longest_trace_len: *lens.iter().max().expect("non-empty"),
        trace_variant_count: variants.len(),
        positive_class_ratio: None,
        event_class_count: activities.len(),
        static_col_count: count(Scope::Static, None),
        dynamic_col_count: count(Scope::Dynamic, None) + 1,
        categorical_col_count: categorical,
        numeric_col_count: log.schema.iter().filter(|a| a.kind == Kind::Numeric).count(),
        categorical_levels_static: static_levels,
        categorical_levels_dynamic: dynamic_levels,
    })
}

// ---------------------------------------------------------------------------
// splitting

pub const DEFAULT_TRAIN_RATIO: f64 = 0.8;

/// Splits cases by the timestamp of their first event: the earliest
/// `ceil(train_ratio * n)` cases go to the training part. Both parts are
/// kept non-empty.
pub fn temporal_split(log: &LabeledLog, train_ratio: f64) -> Result<(LabeledLog, LabeledLog)> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(Error::InvalidConfig(format!("train ratio {train_ratio} must lie in (0, 1)")));
    }
    let n = log.log.traces.len();
    if n < 2 {
        return Err(Error::TooFewCases(n));
    }
    let mut order: Vec<&Trace> = log.log.traces.iter().collect();
    order.sort_by(|a, b| a.start().cmp(&b.start()).then_with(|| a.case_id.cmp(&b.case_id)));
    let n_train = ((train_ratio * n as f64 - 1e-9).ceil() as usize).clamp(1, n - 1);
    let train: BTreeSet<&str> = order[..n_train].iter().map(|t| t.case_id.as_str()).collect();
    let test: BTreeSet<&str> = order[n_train..].iter().map(|t| t.case_id.as_str()).collect();
    Ok((log.subset(&train), log.subset(&test)))
}

// ---------------------------------------------------------------------------
// synthetic generator

/// What drives the planted label and how strongly.
///
/// With probability `strength` the label equals the source indicator,
/// otherwise it equals its negation, so the empirical label/indicator
/// agreement is `strength` in expectation (0.5 means no signal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalPlan {
    pub source: SignalSource,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalSource {
    /// Indicator of a static categorical attribute taking `level`.
    StaticLevel { attribute: String, level: String },
    /// Indicator of a static numeric attribute exceeding `threshold`.
    StaticAbove { attribute: String, threshold: f64 },
    /// Indicator of an activity occurring anywhere in the trace.
    ActivityOccurs { activity: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub trace_count: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Mean trace length; lengths are uniform on `[min_len, max_len]` when unset.
    pub mean_len: Option<f64>,
    pub activity_count: usize,
    pub static_categorical: usize,
    pub static_levels: usize,
    pub static_numeric: usize,
    pub dynamic_categorical: usize,
    pub dynamic_levels: usize,
    pub dynamic_numeric: usize,
    pub missing_rate: f64,
    pub signal: SignalPlan,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            trace_count: 200,
            min_len: 2,
            max_len: 12,
            mean_len: None,
            activity_count: 6,
            static_categorical: 1,
            static_levels: 2,
            static_numeric: 1,
            dynamic_categorical: 1,
            dynamic_levels: 3,
            dynamic_numeric: 1,
            missing_rate: 0.0,
            signal: SignalPlan {
                source: SignalSource::StaticLevel {
                    attribute: synth_static_cat(0),
                    level: synth_level(1),
                },
                strength: 0.85,
            },
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// Trace count and length bounds of the Sepsis1 log (776 traces,
    /// lengths 5 to 185, mean 14).
    pub fn sepsis1_scale() -> Self {
        SynthConfig {
            trace_count: 776,
            min_len: 5,
            max_len: 185,
            mean_len: Some(14.0),
            activity_count: 14,
            ..SynthConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.min_len < 1 {
            return Err(Error::InvalidConfig("min_len must be at least 1".into()));
        }
        if self.min_len > self.max_len {
            return Err(Error::InvalidConfig(format!(
                "min_len {} exceeds max_len {}",
                self.min_len, self.max_len
            )));
        }
        if self.trace_count == 0 || self.activity_count == 0 {
            return Err(Error::InvalidConfig("trace and activity counts must be positive".into()));
        }
        if (self.static_categorical > 0 && self.static_levels == 0)
            || (self.dynamic_categorical > 0 && self.dynamic_levels == 0)
        {
            return Err(Error::InvalidConfig("categorical attributes need at least one level".into()));
        }
        if !(0.0..=1.0).contains(&self.signal.strength) {
            return Err(Error::InvalidConfig("signal strength must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.missing_rate) {
            return Err(Error::InvalidConfig("missing rate must lie in [0, 1]".into()));
        }
        if let Some(m) = self.mean_len {
            if !(m >= self.min_len as f64 && m <= self.max_len as f64) {
                return Err(Error::InvalidConfig("mean_len must lie within [min_len, max_len]".into()));
            }
        }
        match &self.signal.source {
            SignalSource::StaticLevel { attribute, level } => {
                let ok = (0..self.static_categorical).any(|i| &synth_static_cat(i) == attribute)
                    && (0..self.static_levels).any(|j| &synth_level(j) == level);
                if !ok {
                    return Err(Error::UnknownAttribute(format!("{attribute}={level}")));
                }
            }
            SignalSource::StaticAbove { attribute, .. } => {
                if !(0..self.static_numeric).any(|i| &synth_static_num(i) == attribute) {
                    return Err(Error::UnknownAttribute(attribute.clone()));
                }
            }
            SignalSource::ActivityOccurs { activity } => {
                if !(0..self.activity_count).any(|i| &synth_activity(i) == activity) {
                    return Err(Error::UnknownAttribute(activity.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn schema(&self) -> Vec<AttributeSpec> {
        let mut s = Vec::new();
        s.extend((0..self.static_categorical).map(|i| AttributeSpec::new(synth_static_cat(i), Scope::Static, Kind::Categorical)));
        s.extend((0..self.static_numeric).map(|i| AttributeSpec::new(synth_static_num(i), Scope::Static, Kind::Numeric)));
        s.extend((0..self.dynamic_categorical).map(|i| AttributeSpec::new(synth_dyn_cat(i), Scope::Dynamic, Kind::Categorical)));
        s.extend((0..self.dynamic_numeric).map(|i| AttributeSpec::new(synth_dyn_num(i), Scope::Dynamic, Kind::Numeric)));
        s
    }
}

pub fn synth_static_cat(i: usize) -> String {
    format!("static_cat_{i}")
}
pub fn synth_static_num(i: usize) -> String {
    format!("static_num_{i}")
}
pub fn synth_dyn_cat(i: usize) -> String {
    format!("dyn_cat_{i}")
}
pub fn synth_dyn_num(i: usize) -> String {
    format!("dyn_num_{i}")
}
pub fn synth_level(j: usize) -> String {
    format!("v{j}")
}
pub fn synth_activity(i: usize) -> String {
    format!("act_{i:02}")
}

const SYNTH_EPOCH_MS: i64 = 1_577_836_800_000; // 2020-01-01T00:00:00Z
const YEAR_MS: f64 = 365.0 * 24.0 * 3600.0 * 1000.0;
const MEAN_GAP_MS: f64 = 30.0 * 60.0 * 1000.0;

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

pub fn generate_synthetic_log(cfg: &SynthConfig) -> Result<LabeledLog> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gap = Exp::new(1.0 / MEAN_GAP_MS).expect("positive rate");
    let schema = cfg.schema();
    let width = (cfg.trace_count.max(2) - 1).to_string().len();

    let mut traces = Vec::with_capacity(cfg.trace_count);
    let mut labels = BTreeMap::new();
    for c in 0..cfg.trace_count {
        let case_id = format!("case_{c:0width$}");
        let len = match cfg.mean_len {
            Some(mean) if mean > cfg.min_len as f64 => {
                let extra = Exp::new(1.0 / (mean - cfg.min_len as f64)).expect("positive rate");
                (cfg.min_len + extra.sample(&mut rng).floor() as usize).min(cfg.max_len)
            }
            _ => rng.random_range(cfg.min_len..=cfg.max_len),
        };
        let mut static_values = BTreeMap::new();
        for i in 0..cfg.static_categorical {
            static_values.insert(synth_static_cat(i), Value::Cat(synth_level(rng.random_range(0..cfg.static_levels))));
        }
        for i in 0..cfg.static_numeric {
            let x: f64 = StandardNormal.sample(&mut rng);
            static_values.insert(synth_static_num(i), Value::Num(round4(x)));
        }
        let mut ts = SYNTH_EPOCH_MS + (rng.random::<f64>() * YEAR_MS) as i64;
        let mut events = Vec::with_capacity(len);
        for k in 0..len {
            if k > 0 {
                ts += 1 + gap.sample(&mut rng) as i64;
            }
            let activity = synth_activity(rng.random_range(0..cfg.activity_count));
            let mut values = BTreeMap::new();
            for i in 0..cfg.dynamic_categorical {
                let level = synth_level(rng.random_range(0..cfg.dynamic_levels));
                let v = if rng.random::<f64>() < cfg.missing_rate { Value::Missing } else { Value::Cat(level) };
                values.insert(synth_dyn_cat(i), v);
            }
            for i in 0..cfg.dynamic_numeric {
                let x: f64 = StandardNormal.sample(&mut rng);
                let v = if rng.random::<f64>() < cfg.missing_rate { Value::Missing } else { Value::Num(round4(x)) };
                values.insert(synth_dyn_num(i), v);
            }
            events.push(Event {
                activity,
                timestamp: ts,
                values,
            });
        }
        let indicator = match &cfg.signal.source {
            SignalSource::StaticLevel { attribute, level } => static_values[attribute].as_cat() == Some(level.as_str()),
            SignalSource::StaticAbove { attribute, threshold } => {
                static_values[attribute].as_num().is_some_and(|x| x > *threshold)
            }
            SignalSource::ActivityOccurs { activity } => events.iter().any(|e| &e.activity == activity),
        };
        let agree = rng.random::<f64>() < cfg.signal.strength;
        labels.insert(case_id.clone(), if agree { indicator } else { !indicator });
        traces.push(Trace {
            case_id,
            static_values,
            events,
        });
    }
    LabeledLog::new(EventLog::new(schema, traces)?, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_schema() -> Vec<AttributeSpec> {
        vec![
            AttributeSpec::new("region", Scope::Static, Kind::Categorical),
            AttributeSpec::new("cost", Scope::Dynamic, Kind::Numeric),
        ]
    }

    const THREE_ROWS: &str = "\
case_id,activity,timestamp,region,cost
c1,register,2021-03-01T10:00:00+01:00,north,1.5
c1,check,2021-03-01T11:00:00+01:00,north,
c1,close,2021-03-01T12:30:00+01:00,north,3
";

    #[test]
    fn groups_rows_into_a_trace() {
        let log = EventLog::from_csv_reader(THREE_ROWS.as_bytes(), small_schema()).unwrap();
        assert_eq!(log.traces.len(), 1);
        let t = &log.traces[0];
        assert_eq!(t.len(), 3);
        assert_eq!(t.static_values["region"], Value::Cat("north".into()));
        assert!(t.events[1].values["cost"].is_missing());
        assert_eq!(t.duration_ms(), 150 * 60 * 1000);
    }

    #[test]
    fn rejects_varying_static_attribute() {
        let csv = THREE_ROWS.replace("12:30:00+01:00,north", "12:30:00+01:00,south");
        let err = EventLog::from_csv_reader(csv.as_bytes(), small_schema()).unwrap_err();
        assert!(matches!(err, Error::StaticAttributeVaries { .. }));
        assert!(err.to_string().contains("static attribute varies"));
    }

    #[test]
    fn rejects_bad_inputs() {
        let no_ts = "case_id,activity,region,cost\nc1,a,n,1\n";
        assert!(matches!(
            EventLog::from_csv_reader(no_ts.as_bytes(), small_schema()),
            Err(Error::MissingColumn(c)) if c == "timestamp"
        ));
        let bad_ts = THREE_ROWS.replace("2021-03-01T11:00:00+01:00", "yesterday");
        assert!(matches!(
            EventLog::from_csv_reader(bad_ts.as_bytes(), small_schema()),
            Err(Error::BadTimestamp { row: 2, .. })
        ));
        let unknown = THREE_ROWS.replace("region,cost", "region,cost2");
        assert!(matches!(
            EventLog::from_csv_reader(unknown.as_bytes(), small_schema()),
            Err(Error::UnknownColumn(c)) if c == "cost2"
        ));
        let dup = format!("{THREE_ROWS}c1,close,2021-03-01T12:30:00+01:00,north,3\n");
        assert!(matches!(
            EventLog::from_csv_reader(dup.as_bytes(), small_schema()),
            Err(Error::DuplicateEvent { row: 4, .. })
        ));
        let bad_num = THREE_ROWS.replace(",1.5", ",abc");
        assert!(matches!(
            EventLog::from_csv_reader(bad_num.as_bytes(), small_schema()),
            Err(Error::BadNumber { .. })
        ));
    }

    #[test]
    fn shuffled_rows_parse_identically() {
        let cfg = SynthConfig {
            trace_count: 30,
            ..SynthConfig::default()
        };
        let log = generate_synthetic_log(&cfg).unwrap().log;
        let csv = log.to_csv_string().unwrap();
        let mut lines: Vec<&str> = csv.lines().collect();
        let header = lines.remove(0);
        // reverse case blocks while keeping each case's rows in time order
        let mut blocks: Vec<Vec<&str>> = Vec::new();
        for line in lines {
            let id = line.split(',').next().unwrap();
            match blocks.last_mut() {
                Some(b) if b[0].split(',').next().unwrap() == id => b.push(line),
                _ => blocks.push(vec![line]),
            }
        }
        // interleave: take rows round-robin across reversed blocks
        blocks.reverse();
        let mut shuffled = vec![header.to_string()];
        let longest = blocks.iter().map(Vec::len).max().unwrap();
        for k in 0..longest {
            for b in &blocks {
                if let Some(l) = b.get(k) {
                    shuffled.push(l.to_string());
                }
            }
        }
        let text = shuffled.join("\n") + "\n";
        let reparsed = EventLog::from_csv_reader(text.as_bytes(), log.schema.clone()).unwrap();
        let sorted = EventLog::from_csv_reader(csv.as_bytes(), log.schema.clone()).unwrap();
        assert_eq!(reparsed, sorted);
        assert_eq!(sorted, log);
    }

    #[test]
    fn schema_sidecar_round_trip() {
        let json = r#"{"static": {"b": "numeric", "a": "categorical"}, "dynamic": {"z": "categorical"}}"#;
        let schema = parse_schema(json).unwrap();
        assert_eq!(schema[0].name, "b");
        assert_eq!(schema[1].name, "a");
        assert_eq!(schema[2].scope, Scope::Dynamic);
        assert_eq!(parse_schema(&schema_to_json(&schema)).unwrap(), schema);
        assert!(parse_schema(r#"{"static": {"activity": "categorical"}}"#).is_err());
        assert!(parse_schema(r#"{"static": {"x": "text"}}"#).is_err());
    }

    #[test]
    fn variants_and_ratio() {
        let csv = "\
case_id,activity,timestamp
a,x,2021-01-01T00:00:00Z
a,y,2021-01-01T01:00:00Z
b,x,2021-01-02T00:00:00Z
b,y,2021-01-02T01:00:00Z
";
        let log = EventLog::from_csv_reader(csv.as_bytes(), vec![]).unwrap();
        let labeled = apply_labeling(
            &log,
            &LabelingRule::new(LabelCondition::ActivityOccurs { activity: "y".into() }),
        )
        .unwrap();
        let s = compute_statistics(&labeled).unwrap();
        assert_eq!(s.trace_variant_count, 1);
        assert_eq!(s.positive_class_ratio, Some(1.0));
        assert_eq!(s.event_class_count, 2);

        let cfg = SynthConfig {
            trace_count: 100,
            ..SynthConfig::default()
        };
        let mut syn = generate_synthetic_log(&cfg).unwrap();
        for (i, v) in syn.labels.values_mut().enumerate() {
            *v = i % 2 == 0;
        }
        assert_eq!(compute_statistics(&syn).unwrap().positive_class_ratio, Some(0.5));
    }

    #[test]
    fn statistics_invariants_and_errors() {
        let syn = generate_synthetic_log(&SynthConfig::default()).unwrap();
        let s = compute_statistics(&syn).unwrap();
        assert!(s.shortest_trace_len as f64 <= s.avg_trace_len);
        assert!(s.avg_trace_len <= s.longest_trace_len as f64);
        assert!(s.trace_variant_count <= s.trace_count);
        assert_eq!(s.static_col_count, 2);
        assert_eq!(s.dynamic_col_count, 3);
        let empty = LabeledLog::new(EventLog::new(vec![], vec![]).unwrap(), BTreeMap::new()).unwrap();
        assert!(matches!(compute_statistics(&empty), Err(Error::EmptyLog)));
    }

    #[test]
    fn sepsis1_scale_trace_count() {
        let log = generate_synthetic_log(&SynthConfig::sepsis1_scale()).unwrap();
        let s = compute_statistics(&log).unwrap();
        assert_eq!(s.trace_count, 776);
        assert!(s.shortest_trace_len >= 5 && s.longest_trace_len <= 185);
    }

    #[test]
    fn labeling_rules() {
        let log = generate_synthetic_log(&SynthConfig::default()).unwrap().log;
        let all = apply_labeling(&log, &LabelingRule::new(LabelCondition::DurationThreshold { threshold_ms: 0 })).unwrap();
        assert!(all.labels.values().all(|&l| l));
        let none = apply_labeling(
            &log,
            &LabelingRule::new(LabelCondition::ActivityOccurs { activity: "X".into() }),
        )
        .unwrap();
        assert!(none.labels.values().all(|&l| !l));

        let mut durations: Vec<i64> = log.traces.iter().map(Trace::duration_ms).collect();
        durations.sort();
        let median = durations[durations.len() / 2];
        let rule = LabelingRule::new(LabelCondition::DurationThreshold { threshold_ms: median });
        let labeled = apply_labeling(&log, &rule).unwrap();
        let ratio = compute_statistics(&labeled).unwrap().positive_class_ratio.unwrap();
        assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
        assert_eq!(apply_labeling(&log, &rule).unwrap(), labeled);

        let unknown = LabelingRule::new(LabelCondition::StaticAttributeEquals {
            attribute: "nope".into(),
            value: "x".into(),
        });
        assert!(matches!(apply_labeling(&log, &unknown), Err(Error::UnknownAttribute(_))));
    }

    #[test]
    fn labeling_rule_json() {
        let rule = LabelingRule::from_json(r#"{"kind": "activity_occurs", "activity": "act_01"}"#).unwrap();
        assert_eq!(rule.condition, LabelCondition::ActivityOccurs { activity: "act_01".into() });
        assert_eq!(rule.positive_class, "deviant");
        let back = LabelingRule::from_json(&serde_json::to_string(&rule).unwrap()).unwrap();
        assert_eq!(back, rule);
    }

    #[test]
    fn generator_determinism_and_signal() {
        let cfg = SynthConfig::default();
        assert_eq!(generate_synthetic_log(&cfg).unwrap(), generate_synthetic_log(&cfg).unwrap());

        let agreement = |strength: f64, n: usize| {
            let cfg = SynthConfig {
                trace_count: n,
                signal: SignalPlan {
                    strength,
                    ..SynthConfig::default().signal
                },
                ..SynthConfig::default()
            };
            let log = generate_synthetic_log(&cfg).unwrap();
            let hits = log
                .log
                .traces
                .iter()
                .filter(|t| (t.static_values["static_cat_0"] == Value::Cat("v1".into())) == log.labels[&t.case_id])
                .count();
            hits as f64 / n as f64
        };
        assert_eq!(agreement(1.0, 300), 1.0);
        let a = agreement(0.8, 500);
        assert!((0.75..=0.85).contains(&a), "agreement {a}");
    }

    #[test]
    fn generator_rejects_contradictory_bounds() {
        let cfg = SynthConfig {
            min_len: 5,
            max_len: 3,
            ..SynthConfig::default()
        };
        assert!(matches!(generate_synthetic_log(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn temporal_split_contract() {
        let cfg = SynthConfig {
            trace_count: 10,
            ..SynthConfig::default()
        };
        let log = generate_synthetic_log(&cfg).unwrap();
        let (train, test) = temporal_split(&log, 0.8).unwrap();
        assert_eq!((train.log.traces.len(), test.log.traces.len()), (8, 2));
        let max_train = train.log.traces.iter().map(Trace::start).max().unwrap();
        let min_test = test.log.traces.iter().map(Trace::start).min().unwrap();
        assert!(max_train <= min_test);

        let two = generate_synthetic_log(&SynthConfig {
            trace_count: 2,
            ..SynthConfig::default()
        })
        .unwrap();
        let (a, b) = temporal_split(&two, 0.5).unwrap();
        assert_eq!((a.log.traces.len(), b.log.traces.len()), (1, 1));

        let one = generate_synthetic_log(&SynthConfig {
            trace_count: 1,
            ..SynthConfig::default()
        })
        .unwrap();
        assert!(matches!(temporal_split(&one, 0.5), Err(Error::TooFewCases(1))));
        assert!(temporal_split(&log, 1.0).is_err());
    }
}
