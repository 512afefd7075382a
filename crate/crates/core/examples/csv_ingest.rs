//! Parses a small event log from CSV, labels it with a duration rule and
//! splits it into temporal train/test partitions.
//!
//! `cargo run --example csv_ingest`

use ppm_xai::eventlog::{
    apply_labeling, compute_statistics, parse_schema, temporal_split, EventLog, LabelCondition, LabelingRule,
};

const SCHEMA: &str = r#"{
    "static": {"region": "categorical", "amount": "numeric"},
    "dynamic": {"resource": "categorical", "cost": "numeric"}
}"#;

const LOG: &str = "\
case_id,activity,timestamp,region,amount,resource,cost
c1,register,2024-01-01T08:00:00Z,north,120,alice,1.5
c1,check,2024-01-01T09:30:00Z,north,120,bob,2.0
c1,approve,2024-01-02T10:00:00Z,north,120,alice,0.5
c2,register,2024-01-02T08:00:00Z,south,80,carol,1.0
c2,reject,2024-01-02T08:45:00Z,south,80,bob,
c3,register,2024-01-03T12:00:00Z,north,300,alice,1.2
c3,check,2024-01-04T12:00:00Z,north,300,carol,2.4
c3,check,2024-01-05T12:00:00Z,north,300,bob,2.4
c3,approve,2024-01-06T09:00:00Z,north,300,alice,0.8
c4,register,2024-01-04T07:00:00Z,south,50,bob,1.1
c4,approve,2024-01-04T07:30:00Z,south,50,carol,0.4
";

fn main() -> ppm_xai::Result<()> {
    let log = EventLog::from_csv_reader(LOG.as_bytes(), parse_schema(SCHEMA)?)?;
    // One day or longer counts as the positive ("deviant") outcome.
    let rule = LabelingRule::new(LabelCondition::DurationThreshold {
        threshold_ms: 24 * 3600 * 1000,
    });
    let labeled = apply_labeling(&log, &rule)?;
    print!("{}", compute_statistics(&labeled)?);

    for t in &labeled.log.traces {
        println!(
            "{}: {:?} -> {}",
            t.case_id,
            t.activities(),
            if labeled.label(&t.case_id) { &rule.positive_class } else { &rule.negative_class }
        );
    }

    let (train, test) = temporal_split(&labeled, 0.75)?;
    println!("train cases {:?}", train.log.case_ids());
    println!("test cases  {:?}", test.log.case_ids());
    Ok(())
}
