//! Fixed-width numeric encodings of prefixes.
//!
//! Static attributes are always encoded (one-hot for categorical, raw value
//! for numeric). Dynamic attributes are encoded by one of three strategies:
//!
//! * aggregation: per-level occurrence counts for categorical attributes and
//!   `min, max, mean, sum, std` for numeric ones;
//! * index: one block per event position `1..=k`, padded past the prefix end;
//! * last state: the values of the final event.
//!
//! Two derived dynamic numeric attributes are added from the timestamps:
//! `timesincelastevent` (seconds, 0 for the first event) and `event_nr`
//! (1-based). Categorical vocabularies are frozen at fit time and always
//! carry the reserved levels `other` (unseen at fit time) and `missing`.
//! Missing numeric values are imputed with the fit-time mean.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::{AttributeSpec, Event, Kind, Scope, Value, ACTIVITY};
use crate::prefixing::Prefix;
use crate::util::sha256_hex;

pub const OTHER_LEVEL: &str = "other";
pub const MISSING_LEVEL: &str = "missing";
pub const TIME_SINCE_LAST_EVENT: &str = "timesincelastevent";
pub const EVENT_NR: &str = "event_nr";
pub const LABEL_COLUMN: &str = "__label";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    StaticOnehot,
    StaticNumeric,
    AggCount,
    AggStat,
    IndexOnehot,
    IndexNumeric,
    LaststateOnehot,
    LaststateNumeric,
}

impl EncodingKind {
    /// Columns whose values are level indicators or level counts.
    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            EncodingKind::StaticOnehot | EncodingKind::AggCount | EncodingKind::IndexOnehot | EncodingKind::LaststateOnehot
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    Min,
    Max,
    Mean,
    Sum,
    Std,
}

impl StatKind {
    pub const ALL: [StatKind; 5] = [StatKind::Min, StatKind::Max, StatKind::Mean, StatKind::Sum, StatKind::Std];

    pub fn name(&self) -> &'static str {
        match self {
            StatKind::Min => "min",
            StatKind::Max => "max",
            StatKind::Mean => "mean",
            StatKind::Sum => "sum",
            StatKind::Std => "std",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub origin_attribute: String,
    pub encoding_kind: EncodingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categorical_level: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stat_kind: Option<StatKind>,
}

impl FeatureColumn {
    /// A plain numeric column, for matrices that do not come from an encoder.
    pub fn numeric(name: impl Into<String>) -> Self {
        let name = name.into();
        FeatureColumn {
            origin_attribute: name.clone(),
            name,
            encoding_kind: EncodingKind::StaticNumeric,
            categorical_level: None,
            event_index: None,
            stat_kind: None,
        }
    }

    fn onehot(kind: EncodingKind, attr: &str, level: &str, index: Option<usize>) -> Self {
        let name = match index {
            Some(i) => format!("{attr}_{i}_{level}"),
            None => format!("{attr}_{level}"),
        };
        FeatureColumn {
            name,
            origin_attribute: attr.to_string(),
            encoding_kind: kind,
            categorical_level: Some(level.to_string()),
            event_index: index,
            stat_kind: None,
        }
    }

    fn value(kind: EncodingKind, attr: &str, index: Option<usize>) -> Self {
        let name = match index {
            Some(i) => format!("{attr}_{i}"),
            None => attr.to_string(),
        };
        FeatureColumn {
            name,
            origin_attribute: attr.to_string(),
            encoding_kind: kind,
            categorical_level: None,
            event_index: index,
            stat_kind: None,
        }
    }

    fn stat(attr: &str, stat: StatKind) -> Self {
        FeatureColumn {
            name: format!("{}_{attr}", stat.name()),
            origin_attribute: attr.to_string(),
            encoding_kind: EncodingKind::AggStat,
            categorical_level: None,
            event_index: None,
            stat_kind: Some(stat),
        }
    }
}

/// Stable hash of a column list, used to pair models with matrices.
pub fn schema_hash(columns: &[FeatureColumn]) -> String {
    sha256_hex(&serde_json::to_vec(columns).expect("columns serialize"))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowId {
    pub case_id: String,
    pub prefix_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub columns: Vec<FeatureColumn>,
    pub rows: Vec<Vec<f64>>,
    pub row_ids: Vec<RowId>,
    pub labels: Vec<bool>,
}

impl FeatureMatrix {
    /// Builds a matrix of plain numeric columns `x0, x1, ...`.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        let columns = (0..width).map(|j| FeatureColumn::numeric(format!("x{j}"))).collect();
        let row_ids = (0..rows.len())
            .map(|i| RowId {
                case_id: format!("row{i}"),
                prefix_len: 0,
            })
            .collect();
        let m = FeatureMatrix {
            columns,
            rows,
            row_ids,
            labels,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.columns.len();
        if self.labels.len() != self.rows.len() || self.row_ids.len() != self.rows.len() {
            return Err(Error::SchemaMismatch("rows, row ids and labels differ in length".into()));
        }
        for r in &self.rows {
            if r.len() != w {
                return Err(Error::WidthMismatch {
                    expected: w,
                    got: r.len(),
                });
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::SchemaMismatch("matrix contains non-finite values".into()));
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            columns: self.columns.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            row_ids: indices.iter().map(|&i| self.row_ids[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn schema_hash(&self) -> String {
        schema_hash(&self.columns)
    }

    /// CSV with one column per feature plus `__label` (0/1).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.column_names();
        header.push(LABEL_COLUMN.into());
        w.write_record(&header)?;
        for (r, &l) in self.rows.iter().zip(&self.labels) {
            let mut rec: Vec<String> = r.iter().map(|x| format!("{x}")).collect();
            rec.push(if l { "1".into() } else { "0".into() });
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Reads a matrix written by [`FeatureMatrix::write_csv`]; the header
    /// must match `columns` by name. Row ids are synthesized as `row<i>`.
    pub fn read_csv<R: Read>(reader: R, columns: Vec<FeatureColumn>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        let expected: Vec<&str> = columns
            .iter()
            .map(|c| c.name.as_str())
            .chain(std::iter::once(LABEL_COLUMN))
            .collect();
        if header.iter().collect::<Vec<_>>() != expected {
            return Err(Error::SchemaMismatch("matrix header does not match the feature schema".into()));
        }
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let mut row = Vec::with_capacity(columns.len());
            for (j, field) in rec.iter().take(columns.len()).enumerate() {
                row.push(field.parse::<f64>().map_err(|_| Error::BadNumber {
                    row: rows.len() + 1,
                    attribute: columns[j].name.clone(),
                    value: field.to_string(),
                })?);
            }
            labels.push(rec.get(columns.len()) == Some("1"));
            rows.push(row);
        }
        let row_ids = (0..rows.len())
            .map(|i| RowId {
                case_id: format!("row{i}"),
                prefix_len: 0,
            })
            .collect();
        let m = FeatureMatrix {
            columns,
            rows,
            row_ids,
            labels,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn schema_json(&self) -> String {
        serde_json::to_string_pretty(&self.columns).expect("columns serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingStrategy {
    Aggregation,
    Index,
    LastState,
}

impl EncodingStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            EncodingStrategy::Aggregation => "aggregation",
            EncodingStrategy::Index => "index",
            EncodingStrategy::LastState => "last_state",
        }
    }
}

impl fmt::Display for EncodingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderOptions {
    /// Emit the derived `timesincelastevent` and `event_nr` attributes.
    pub temporal_features: bool,
}

impl Default for EncoderOptions {
    fn default() -> Self {
        EncoderOptions { temporal_features: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderModel {
    pub strategy: EncodingStrategy,
    pub index_len: Option<usize>,
    pub schema: Vec<AttributeSpec>,
    pub options: EncoderOptions,
    /// Frozen level lists (observed levels sorted, then `other`, `missing`).
    pub vocabularies: BTreeMap<String, Vec<String>>,
    pub means: BTreeMap<String, f64>,
    pub columns: Vec<FeatureColumn>,
}

struct Attr<'a> {
    name: &'a str,
}

impl EncoderModel {
    fn static_cats(&self) -> impl Iterator<Item = Attr<'_>> {
        self.schema
            .iter()
            .filter(|a| a.scope == Scope::Static && a.kind == Kind::Categorical)
            .map(|a| Attr { name: &a.name })
    }

    fn static_nums(&self) -> impl Iterator<Item = Attr<'_>> {
        self.schema
            .iter()
            .filter(|a| a.scope == Scope::Static && a.kind == Kind::Numeric)
            .map(|a| Attr { name: &a.name })
    }

    fn dyn_cat_names(&self) -> Vec<&str> {
        dyn_cat_names(&self.schema)
    }

    fn dyn_num_names(&self) -> Vec<&str> {
        dyn_num_names(&self.schema, self.options)
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    fn level_index(&self, attr: &str, value: Option<&Value>) -> usize {
        let vocab = &self.vocabularies[attr];
        let n = vocab.len();
        match value {
            None | Some(Value::Missing) => n - 1,
            Some(Value::Cat(s)) => vocab[..n - 2].binary_search(s).unwrap_or(n - 2),
            Some(Value::Num(x)) => vocab[..n - 2].binary_search(&format!("{x}")).unwrap_or(n - 2),
        }
    }

    fn push_onehot(&self, out: &mut Vec<f64>, attr: &str, value: Option<&Value>) {
        let n = self.vocabularies[attr].len();
        let start = out.len();
        out.resize(start + n, 0.0);
        out[start + self.level_index(attr, value)] = 1.0;
    }

    fn numeric(&self, attr: &str, value: Option<&Value>) -> f64 {
        value.and_then(Value::as_num).unwrap_or(self.means[attr])
    }

    fn check(&self, p: &Prefix) -> Result<()> {
        check_prefix(&self.schema, p)
    }

    /// Encodes a single (running) instance.
    pub fn encode_instance(&self, p: &Prefix) -> Result<Vec<f64>> {
        self.check(p)?;
        let mut row = Vec::with_capacity(self.columns.len());
        for a in self.static_cats() {
            self.push_onehot(&mut row, a.name, p.static_values.get(a.name));
        }
        for a in self.static_nums() {
            row.push(self.numeric(a.name, p.static_values.get(a.name)));
        }
        let events = &p.events[..p.prefix_len.min(p.events.len())];
        let derived = derived_values(events);
        let cats = self.dyn_cat_names();
        let nums = self.dyn_num_names();
        let event_value = |k: usize, attr: &str| -> Option<Value> {
            dyn_value(&events[k], &derived[k], attr)
        };
        match self.strategy {
            EncodingStrategy::Aggregation => {
                for attr in &cats {
                    let n = self.vocabularies[*attr].len();
                    let start = row.len();
                    row.resize(start + n, 0.0);
                    for k in 0..events.len() {
                        row[start + self.level_index(attr, event_value(k, attr).as_ref())] += 1.0;
                    }
                }
                for attr in &nums {
                    let xs: Vec<f64> = (0..events.len())
                        .map(|k| self.numeric(attr, event_value(k, attr).as_ref()))
                        .collect();
                    row.extend(aggregate(&xs));
                }
            }
            EncodingStrategy::Index => {
                let k_len = self.index_len.expect("index encoder has k");
                for pos in 0..k_len {
                    let present = pos < events.len();
                    for attr in &cats {
                        if present {
                            self.push_onehot(&mut row, attr, event_value(pos, attr).as_ref());
                        } else {
                            row.extend(std::iter::repeat_n(0.0, self.vocabularies[*attr].len()));
                        }
                    }
                    for attr in &nums {
                        row.push(if present {
                            self.numeric(attr, event_value(pos, attr).as_ref())
                        } else {
                            self.means[*attr]
                        });
                    }
                }
            }
            EncodingStrategy::LastState => {
                let last = events.len().checked_sub(1);
                for attr in &cats {
                    let v = last.and_then(|k| event_value(k, attr));
                    self.push_onehot(&mut row, attr, v.as_ref());
                }
                for attr in &nums {
                    let v = last.and_then(|k| event_value(k, attr));
                    row.push(self.numeric(attr, v.as_ref()));
                }
            }
        }
        debug_assert_eq!(row.len(), self.columns.len());
        Ok(row)
    }

    pub fn encode_bucket(&self, bucket: &[Prefix]) -> Result<FeatureMatrix> {
        let mut rows = Vec::with_capacity(bucket.len());
        for p in bucket {
            rows.push(self.encode_instance(p)?);
        }
        let m = FeatureMatrix {
            columns: self.columns.clone(),
            rows,
            row_ids: bucket
                .iter()
                .map(|p| RowId {
                    case_id: p.case_id.clone(),
                    prefix_len: p.prefix_len,
                })
                .collect(),
            labels: bucket.iter().map(|p| p.label).collect(),
        };
        m.validate()?;
        Ok(m)
    }
}

pub fn encode_bucket(enc: &EncoderModel, bucket: &[Prefix]) -> Result<FeatureMatrix> {
    enc.encode_bucket(bucket)
}

pub fn encode_instance(enc: &EncoderModel, partial: &Prefix) -> Result<Vec<f64>> {
    enc.encode_instance(partial)
}

fn dyn_cat_names(schema: &[AttributeSpec]) -> Vec<&str> {
    std::iter::once(ACTIVITY)
        .chain(
            schema
                .iter()
                .filter(|a| a.scope == Scope::Dynamic && a.kind == Kind::Categorical)
                .map(|a| a.name.as_str()),
        )
        .collect()
}

fn dyn_num_names(schema: &[AttributeSpec], options: EncoderOptions) -> Vec<&str> {
    let mut v: Vec<&str> = schema
        .iter()
        .filter(|a| a.scope == Scope::Dynamic && a.kind == Kind::Numeric)
        .map(|a| a.name.as_str())
        .collect();
    if options.temporal_features {
        v.push(TIME_SINCE_LAST_EVENT);
        v.push(EVENT_NR);
    }
    v
}

fn derived_values(events: &[Event]) -> Vec<[f64; 2]> {
    events
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let since = if k == 0 {
                0.0
            } else {
                (e.timestamp - events[k - 1].timestamp) as f64 / 1000.0
            };
            [since, (k + 1) as f64]
        })
        .collect()
}

fn dyn_value(e: &Event, derived: &[f64; 2], attr: &str) -> Option<Value> {
    match attr {
        ACTIVITY => Some(Value::Cat(e.activity.clone())),
        TIME_SINCE_LAST_EVENT => Some(Value::Num(derived[0])),
        EVENT_NR => Some(Value::Num(derived[1])),
        _ => e.values.get(attr).cloned(),
    }
}

/// `[min, max, mean, sum, std]` with the population std (0 for one value).
fn aggregate(xs: &[f64]) -> [f64; 5] {
    if xs.is_empty() {
        return [0.0; 5];
    }
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = xs.iter().sum();
    let mean = sum / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    [min, max, mean, sum, var.sqrt()]
}

fn check_prefix(schema: &[AttributeSpec], p: &Prefix) -> Result<()> {
    let find = |name: &str, scope: Scope| schema.iter().find(|a| a.name == name && a.scope == scope);
    let kind_ok = |a: &AttributeSpec, v: &Value| match (a.kind, v) {
        (_, Value::Missing) | (Kind::Categorical, Value::Cat(_)) | (Kind::Numeric, Value::Num(_)) => true,
        // numbers are acceptable category labels
        (Kind::Categorical, Value::Num(_)) => true,
        (Kind::Numeric, Value::Cat(_)) => false,
    };
    for (name, v) in &p.static_values {
        let a = find(name, Scope::Static)
            .ok_or_else(|| Error::SchemaMismatch(format!("unknown static attribute `{name}`")))?;
        if !kind_ok(a, v) {
            return Err(Error::SchemaMismatch(format!("attribute `{name}` has the wrong kind")));
        }
    }
    for e in &p.events {
        for (name, v) in &e.values {
            let a = find(name, Scope::Dynamic)
                .ok_or_else(|| Error::SchemaMismatch(format!("unknown dynamic attribute `{name}`")))?;
            if !kind_ok(a, v) {
                return Err(Error::SchemaMismatch(format!("attribute `{name}` has the wrong kind")));
            }
        }
    }
    Ok(())
}

pub fn fit_encoder(
    schema: &[AttributeSpec],
    bucket: &[Prefix],
    strategy: EncodingStrategy,
    k: Option<usize>,
) -> Result<EncoderModel> {
    fit_encoder_with(schema, bucket, strategy, k, EncoderOptions::default())
}

pub fn fit_encoder_with(
    schema: &[AttributeSpec],
    bucket: &[Prefix],
    strategy: EncodingStrategy,
    k: Option<usize>,
    options: EncoderOptions,
) -> Result<EncoderModel> {
    crate::eventlog::validate_schema(schema)?;
    if options.temporal_features
        && schema
            .iter()
            .any(|a| a.name == TIME_SINCE_LAST_EVENT || a.name == EVENT_NR)
    {
        return Err(Error::SchemaMismatch("schema shadows a derived temporal attribute".into()));
    }
    if bucket.is_empty() {
        return Err(Error::EmptyBucket);
    }
    let index_len = match strategy {
        EncodingStrategy::Index => match k {
            Some(k) if k >= 1 => Some(k),
            _ => return Err(Error::MissingIndexLength),
        },
        _ => None,
    };
    for p in bucket {
        check_prefix(schema, p)?;
    }

    let cat_label = |v: &Value| match v {
        Value::Cat(s) => Some(s.clone()),
        Value::Num(x) => Some(format!("{x}")),
        Value::Missing => None,
    };
    let mut vocabularies = BTreeMap::new();
    let mut means = BTreeMap::new();
    let freeze = |mut seen: BTreeSet<String>| -> Vec<String> {
        seen.remove(OTHER_LEVEL);
        seen.remove(MISSING_LEVEL);
        let mut v: Vec<String> = seen.into_iter().collect();
        v.push(OTHER_LEVEL.into());
        v.push(MISSING_LEVEL.into());
        v
    };
    let mean_of = |xs: &[f64]| if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 };

    for a in schema.iter().filter(|a| a.scope == Scope::Static) {
        match a.kind {
            Kind::Categorical => {
                let seen = bucket
                    .iter()
                    .filter_map(|p| p.static_values.get(&a.name).and_then(cat_label))
                    .collect();
                vocabularies.insert(a.name.clone(), freeze(seen));
            }
            Kind::Numeric => {
                let xs: Vec<f64> = bucket
                    .iter()
                    .filter_map(|p| p.static_values.get(&a.name).and_then(Value::as_num))
                    .collect();
                means.insert(a.name.clone(), mean_of(&xs));
            }
        }
    }
    for attr in dyn_cat_names(schema) {
        let mut seen = BTreeSet::new();
        for p in bucket {
            for e in &p.events[..p.prefix_len.min(p.events.len())] {
                if let Some(l) = dyn_value(e, &[0.0, 0.0], attr).as_ref().and_then(cat_label) {
                    seen.insert(l);
                }
            }
        }
        vocabularies.insert(attr.to_string(), freeze(seen));
    }
    for attr in dyn_num_names(schema, options) {
        let mut xs = Vec::new();
        for p in bucket {
            let events = &p.events[..p.prefix_len.min(p.events.len())];
            let derived = derived_values(events);
            for (e, d) in events.iter().zip(&derived) {
                if let Some(x) = dyn_value(e, d, attr).as_ref().and_then(Value::as_num) {
                    xs.push(x);
                }
            }
        }
        means.insert(attr.to_string(), mean_of(&xs));
    }

    let mut enc = EncoderModel {
        strategy,
        index_len,
        schema: schema.to_vec(),
        options,
        vocabularies,
        means,
        columns: Vec::new(),
    };
    enc.columns = build_columns(&enc);
    Ok(enc)
}

fn build_columns(enc: &EncoderModel) -> Vec<FeatureColumn> {
    let mut cols = Vec::new();
    for a in enc.static_cats() {
        for level in &enc.vocabularies[a.name] {
            cols.push(FeatureColumn::onehot(EncodingKind::StaticOnehot, a.name, level, None));
        }
    }
    for a in enc.static_nums() {
        cols.push(FeatureColumn::value(EncodingKind::StaticNumeric, a.name, None));
    }
    let cats = enc.dyn_cat_names();
    let nums = enc.dyn_num_names();
    match enc.strategy {
        EncodingStrategy::Aggregation => {
            for attr in &cats {
                for level in &enc.vocabularies[*attr] {
                    cols.push(FeatureColumn::onehot(EncodingKind::AggCount, attr, level, None));
                }
            }
            for attr in &nums {
                for s in StatKind::ALL {
                    cols.push(FeatureColumn::stat(attr, s));
                }
            }
        }
        EncodingStrategy::Index => {
            for pos in 1..=enc.index_len.unwrap_or(0) {
                for attr in &cats {
                    for level in &enc.vocabularies[*attr] {
                        cols.push(FeatureColumn::onehot(EncodingKind::IndexOnehot, attr, level, Some(pos)));
                    }
                }
                for attr in &nums {
                    cols.push(FeatureColumn::value(EncodingKind::IndexNumeric, attr, Some(pos)));
                }
            }
        }
        EncodingStrategy::LastState => {
            for attr in &cats {
                for level in &enc.vocabularies[*attr] {
                    cols.push(FeatureColumn::onehot(EncodingKind::LaststateOnehot, attr, level, None));
                }
            }
            for attr in &nums {
                cols.push(FeatureColumn::value(EncodingKind::LaststateNumeric, attr, None));
            }
        }
    }
    cols
}
