//! Epoch logs as CSV.
//!
//! Header (fixed order):
//!
//! ```text
//! global_epoch,batch_id,round,epoch_in_batch,lambda,train_loss,val_loss,val_accuracy,e1_fired,batch_switch,phase
//! ```
//!
//! `global_epoch`, `batch_id` and `round` are 1-based; `epoch_in_batch` is
//! 0-based. `e1_fired` and `batch_switch` are `0`/`1`. `phase` is `E`, `PD`,
//! or `-` for algorithms without a controller. Floats use the shortest
//! representation that round-trips.

use std::io::{Read, Write};
use std::path::Path;

use epd_core::controller::ControllerPhase;
use epd_core::harness::EpochRecord;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const HEADER: [&str; 11] = [
    "global_epoch",
    "batch_id",
    "round",
    "epoch_in_batch",
    "lambda",
    "train_loss",
    "val_loss",
    "val_accuracy",
    "e1_fired",
    "batch_switch",
    "phase",
];

#[derive(Serialize, Deserialize)]
struct Row {
    global_epoch: u32,
    batch_id: u32,
    round: u32,
    epoch_in_batch: u32,
    lambda: f64,
    train_loss: f64,
    val_loss: f64,
    val_accuracy: f64,
    e1_fired: u8,
    batch_switch: u8,
    phase: String,
}

impl From<&EpochRecord> for Row {
    fn from(r: &EpochRecord) -> Self {
        Row {
            global_epoch: r.global_epoch,
            batch_id: r.batch_id,
            round: r.round,
            epoch_in_batch: r.epoch_in_batch,
            lambda: r.lambda,
            train_loss: r.train_loss,
            val_loss: r.val_loss,
            val_accuracy: r.val_accuracy,
            e1_fired: r.e1_fired.into(),
            batch_switch: r.batch_switch.into(),
            phase: r.phase.map_or("-", ControllerPhase::label).to_string(),
        }
    }
}

impl TryFrom<Row> for EpochRecord {
    type Error = Error;

    fn try_from(r: Row) -> Result<Self> {
        let flag = |v: u8, name: &str| match v {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::Report(format!("{name} must be 0 or 1, got {v}"))),
        };
        let phase = match r.phase.as_str() {
            "E" => Some(ControllerPhase::Exponential),
            "PD" => Some(ControllerPhase::ProportionalDerivative),
            "-" => None,
            other => return Err(Error::Report(format!("unknown phase `{other}`"))),
        };
        Ok(EpochRecord {
            global_epoch: r.global_epoch,
            batch_id: r.batch_id,
            round: r.round,
            epoch_in_batch: r.epoch_in_batch,
            lambda: r.lambda,
            train_loss: r.train_loss,
            val_loss: r.val_loss,
            val_accuracy: r.val_accuracy,
            e1_fired: flag(r.e1_fired, "e1_fired")?,
            batch_switch: flag(r.batch_switch, "batch_switch")?,
            phase,
        })
    }
}

pub fn write_csv<W: Write>(out: W, records: &[EpochRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(Row::from(r))?;
    }
    if records.is_empty() {
        w.write_record(HEADER)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn to_csv_string(records: &[EpochRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<EpochRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(Error::Report(format!("unexpected csv header {header:?}")));
    }
    rd.deserialize::<Row>()
        .map(|row| EpochRecord::try_from(row?))
        .collect()
}

pub fn load_csv(path: &Path) -> Result<Vec<EpochRecord>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(std::io::BufReader::new(f))
}
