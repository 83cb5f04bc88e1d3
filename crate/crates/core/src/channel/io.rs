use std::io::{Read, Write};

use super::sim::ChannelOutcome;
use super::{ChannelConfig, ChannelError};

/// Parses and validates a flat JSON channel config.
pub fn read_channel_config_json<R: Read>(r: R) -> Result<ChannelConfig, ChannelError> {
    let cfg: ChannelConfig = serde_json::from_reader(r).map_err(|e| ChannelError::Format(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// `seq,status,delay_ms,rtx,cause`; lost rows leave delay and rtx empty.
pub fn write_outcomes_csv<W: Write>(outcomes: &[ChannelOutcome], first_seq: usize, mut w: W) -> Result<(), ChannelError> {
    writeln!(w, "seq,status,delay_ms,rtx,cause")?;
    for (i, o) in outcomes.iter().enumerate() {
        let seq = first_seq + i;
        match o {
            ChannelOutcome::Delivered { delay, rtx, .. } => writeln!(w, "{seq},delivered,{:.3},{rtx},", delay.as_ms())?,
            ChannelOutcome::Lost(cause) => writeln!(w, "{seq},lost,,,{}", cause.as_str())?,
        }
    }
    Ok(())
}

pub fn outcome_csv_string(outcomes: &[ChannelOutcome], first_seq: usize) -> String {
    let mut buf = Vec::new();
    write_outcomes_csv(outcomes, first_seq, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is ASCII")
}
