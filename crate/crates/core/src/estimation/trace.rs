use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// What happened in one training stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub path: usize,
    pub stage: usize,
    pub bs_beams: Vec<usize>,
    pub ms_beams: Vec<usize>,
    pub tx_power: f64,
    /// `|y|^2` after removing known paths, ordered `bs * ms_beams.len() + ms`.
    pub received_power: Vec<f64>,
    pub selected_bs: usize,
    pub selected_ms: usize,
    pub slots: usize,
    pub feedback_bits: usize,
}

pub const TRACE_SCHEMA: &str = "mmwave-acs/trace/v1";

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Writes one CSV row per stage after a `# schema:` comment line.
pub fn write_trace_csv<W: Write>(mut writer: W, records: &[StageRecord]) -> Result<()> {
    writeln!(writer, "# schema: {TRACE_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "path",
        "stage",
        "bs_beams",
        "ms_beams",
        "tx_power",
        "selected_bs",
        "selected_ms",
        "slots",
        "feedback_bits",
        "received_power",
    ])?;
    for r in records {
        w.write_record([
            r.path.to_string(),
            r.stage.to_string(),
            join(&r.bs_beams),
            join(&r.ms_beams),
            format!("{:e}", r.tx_power),
            r.selected_bs.to_string(),
            r.selected_ms.to_string(),
            r.slots.to_string(),
            r.feedback_bits.to_string(),
            r.received_power.iter().map(|p| format!("{p:e}")).collect::<Vec<_>>().join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}
