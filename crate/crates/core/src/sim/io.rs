//! Trajectory CSV: header `t,x1,x2,mode,V`, one row per sample with numbers
//! at 17 significant digits, then the event log as `#event,t,kind,detail`
//! comment lines.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{Event, EventKind, Sample, Trajectory};
use crate::numfmt::fmt17;
use crate::planar::{ModeId, Vec2};

pub const CSV_HEADER: &str = "t,x1,x2,mode,V";

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("trajectory CSV contains no samples")]
    Empty,
}

pub fn write_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in &traj.samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt17(s.t),
            fmt17(s.x.x),
            fmt17(s.x.y),
            s.mode,
            fmt17(s.v)
        )?;
    }
    for e in &traj.events {
        writeln!(out, "#event,{},{},{}", fmt17(e.t), e.kind.as_str(), e.detail)?;
    }
    out.flush()
}

fn number(field: &str, line: usize, name: &str) -> Result<f64, CsvError> {
    field.trim().parse().map_err(|_| CsvError::Malformed {
        line,
        reason: format!("{name}: cannot parse {field:?} as a number"),
    })
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Trajectory, CsvError> {
    let mut traj = Trajectory::default();
    let mut saw_header = false;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#event,") {
            let parts: Vec<&str> = rest.splitn(3, ',').collect();
            if parts.len() != 3 {
                return Err(CsvError::Malformed {
                    line: line_no,
                    reason: "event needs t,kind,detail".into(),
                });
            }
            let kind = match parts[1] {
                "switch" => EventKind::Switch,
                "reset" => EventKind::Reset,
                other => {
                    return Err(CsvError::Malformed {
                        line: line_no,
                        reason: format!("unknown event kind {other:?}"),
                    })
                }
            };
            traj.events.push(Event {
                t: number(parts[0], line_no, "t")?,
                kind,
                detail: parts[2].to_string(),
            });
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != CSV_HEADER {
                return Err(CsvError::Malformed {
                    line: line_no,
                    reason: format!("expected header {CSV_HEADER:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(CsvError::Malformed {
                line: line_no,
                reason: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let t = number(fields[0], line_no, "t")?;
        if let Some(prev) = traj.samples.last() {
            if t < prev.t {
                return Err(CsvError::Malformed {
                    line: line_no,
                    reason: "sample times must be nondecreasing".into(),
                });
            }
        }
        traj.samples.push(Sample {
            t,
            x: Vec2::new(number(fields[1], line_no, "x1")?, number(fields[2], line_no, "x2")?),
            mode: ModeId::from(fields[3].trim()),
            v: number(fields[4], line_no, "V")?,
        });
    }
    if traj.samples.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(t: f64, x1: f64, x2: f64, mode: &str, v: f64) -> Sample {
        Sample {
            t,
            x: Vec2::new(x1, x2),
            mode: mode.into(),
            v,
        }
    }

    proptest! {
        #[test]
        fn csv_round_trip(raw in proptest::collection::vec((0.0f64..1e3, -1e6f64..1e6, -1e6f64..1e6, 0.0f64..1e9), 1..40)) {
            let mut t = 0.0;
            let samples: Vec<Sample> = raw
                .iter()
                .enumerate()
                .map(|(i, &(dt, a, b, v))| {
                    t += dt;
                    sample(t, a, b, if i % 2 == 0 { "ON" } else { "OFF" }, v)
                })
                .collect();
            let traj = Trajectory {
                events: vec![Event { t, kind: EventKind::Switch, detail: "ON>OFF".into() }],
                samples,
            };
            let mut buf = Vec::new();
            write_csv(&traj, &mut buf).unwrap();
            let back = read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, traj);
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(read_csv("".as_bytes()), Err(CsvError::Empty)));
        assert!(matches!(read_csv("t,x1,x2,mode,V\n".as_bytes()), Err(CsvError::Empty)));
        assert!(matches!(
            read_csv("a,b\n1,2\n".as_bytes()),
            Err(CsvError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            read_csv("t,x1,x2,mode,V\n0,1,2,ON\n".as_bytes()),
            Err(CsvError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            read_csv("t,x1,x2,mode,V\n0,1,oops,ON,3\n".as_bytes()),
            Err(CsvError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            read_csv("t,x1,x2,mode,V\n1,1,2,ON,3\n0,1,2,ON,3\n".as_bytes()),
            Err(CsvError::Malformed { line: 3, .. })
        ));
    }
}
