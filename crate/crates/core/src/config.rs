//! JSON run configuration.
//!
//! ```json
//! {
//!   "neuron": { "g_p": 0.75, "g_h": 0.15, "m": 1, "o_h": 0.35, "I": 1 },
//!   "signal": { "periodic": { "T_I": 3.84, "T_0": 3.84, "periods": 20 } },
//!   "x0": [0, 0],
//!   "k": 0.2,
//!   "v_th": 2.6,
//!   "reset": { "v_R": 0.0, "h_R": { "ON": 0.0, "OFF": 0.0 } },
//!   "dt": 0.001,
//!   "seed": 7,
//!   "sweep": { "T": [32, 34, 36], "k": [0.2], "periods": 30 }
//! }
//! ```
//!
//! Exactly one of `neuron` and `modes` must be present. Raw modes are
//! `{"id": "A", "a": .., "b": .., "c": .., "d": .., "B": [.., ..]}`. The
//! signal is either `periodic` (first mode, or `ON` for a neuron, held for
//! `T_I`, then the second mode, or `OFF`, for `T_0`) or
//! `explicit: {"switches": [[t, id], ...], "horizon": h}`.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::neuron::{self, NeuronParams, ResetRecovery, DEFAULT_LEVEL};
use crate::planar::{ModeId, ModeTable, PlanarAffineMode, Vec2};
use crate::sim::{ResetRule, SwitchingSignal};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronBlock {
    pub g_p: f64,
    pub g_h: f64,
    pub m: f64,
    pub o_h: f64,
    #[serde(rename = "I")]
    pub current: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeBlock {
    pub id: String,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    #[serde(rename = "B")]
    pub offset: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SignalBlock {
    Periodic {
        #[serde(rename = "T_I")]
        t_on: f64,
        #[serde(rename = "T_0")]
        t_off: f64,
        periods: usize,
    },
    Explicit {
        switches: Vec<(f64, String)>,
        horizon: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetBlock {
    #[serde(rename = "v_R")]
    pub v_reset: f64,
    #[serde(rename = "h_R")]
    pub h_reset: std::collections::BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(rename = "T")]
    pub periods_grid: Vec<f64>,
    pub k: Vec<f64>,
    pub periods: usize,
}

/// The document as written.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub neuron: Option<NeuronBlock>,
    #[serde(default)]
    pub modes: Option<Vec<ModeBlock>>,
    pub signal: SignalBlock,
    #[serde(default)]
    pub x0: Option<[f64; 2]>,
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub v_th: Option<f64>,
    #[serde(default)]
    pub reset: Option<ResetBlock>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

/// A validated configuration ready to run.
#[derive(Debug, Clone)]
pub struct Run {
    pub modes: ModeTable,
    /// Mode order of a periodic signal (`[ON, OFF]` for a neuron).
    pub periodic_pair: Option<(ModeId, ModeId)>,
    pub neuron: Option<NeuronParams>,
    pub signal: SwitchingSignal,
    pub x0: Vec2,
    pub k: f64,
    pub v_th: Option<f64>,
    pub reset: Option<ResetRule>,
    pub dt: f64,
    pub seed: Option<u64>,
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn resolve(&self) -> Result<Run, ConfigError> {
        let k = self.k.unwrap_or(DEFAULT_LEVEL);
        if !(k > 0.0 && k.is_finite()) {
            return Err(invalid("k", format!("level must be positive, got {k}")));
        }
        let x0 = self.x0.map_or(Vec2::zeros(), |x| Vec2::new(x[0], x[1]));

        let (modes, pair, mut neuron) = match (&self.neuron, &self.modes) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(invalid("neuron/modes", "exactly one of `neuron` and `modes` is required"))
            }
            (Some(n), None) => {
                let p = NeuronParams::new(n.g_p, n.g_h, n.m, n.o_h, n.current);
                let (off, on) = neuron::neuron_modes(&p).map_err(|e| invalid("neuron", e))?;
                let table = ModeTable::new([off, on]).map_err(|e| invalid("neuron", e))?;
                (table, Some((ModeId::from(neuron::ON), ModeId::from(neuron::OFF))), Some(p))
            }
            (None, Some(blocks)) => {
                if blocks.is_empty() {
                    return Err(invalid("modes", "at least one mode is required"));
                }
                let modes = blocks
                    .iter()
                    .map(|b| PlanarAffineMode::new(b.id.as_str(), b.a, b.b, b.c, b.d, b.offset))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| invalid("modes", e))?;
                let pair = (modes.len() == 2).then(|| (modes[0].id().clone(), modes[1].id().clone()));
                (ModeTable::new(modes).map_err(|e| invalid("modes", e))?, pair, None)
            }
        };

        let (signal, durations) = match &self.signal {
            SignalBlock::Periodic { t_on, t_off, periods } => {
                let Some((first, second)) = &pair else {
                    return Err(invalid("signal", "periodic signals need exactly two modes"));
                };
                (periodic_signal(first, second, *t_on, *t_off, *periods)?, (*t_on, *t_off))
            }
            SignalBlock::Explicit { switches, horizon } => {
                let sw = switches.iter().map(|(t, id)| (*t, ModeId::from(id.as_str()))).collect();
                let signal = SwitchingSignal::new(sw, *horizon).map_err(|e| invalid("signal", e))?;
                for (_, id) in signal.switches() {
                    modes.get(id).map_err(|e| invalid("signal", e))?;
                }
                let durations = neuron_durations(&signal);
                (signal, durations)
            }
        };

        if let Some(p) = neuron.as_mut() {
            let (t_on, t_off) = durations;
            p.t_on = t_on;
            p.t_off = t_off;
            p.v_th = self.v_th;
        }

        let reset = match &self.reset {
            None => None,
            Some(block) => {
                let v_th = self
                    .v_th
                    .ok_or_else(|| invalid("reset", "a reset block requires `v_th`"))?;
                let h_reset = block
                    .h_reset
                    .iter()
                    .map(|(id, h)| (ModeId::from(id.as_str()), *h))
                    .collect();
                for m in modes.iter() {
                    if !block.h_reset.contains_key(m.id().as_str()) {
                        return Err(invalid("reset", format!("`h_R` has no entry for mode {}", m.id())));
                    }
                }
                if let Some(p) = neuron.as_mut() {
                    p.v_reset = Some(block.v_reset);
                    p.h_reset = Some(ResetRecovery {
                        on: block.h_reset[neuron::ON],
                        off: block.h_reset[neuron::OFF],
                    });
                }
                Some(ResetRule::new(v_th, block.v_reset, h_reset).map_err(|e| invalid("reset", e))?)
            }
        };

        let dt = self.dt.unwrap_or_else(|| signal.default_dt());
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("sampling step must be positive, got {dt}")));
        }
        if let Some(s) = &self.sweep {
            if s.periods == 0 || s.periods_grid.is_empty() || s.k.is_empty() {
                return Err(invalid("sweep", "`T`, `k` and `periods` must be non-empty"));
            }
        }

        Ok(Run {
            modes,
            periodic_pair: pair,
            neuron,
            signal,
            x0,
            k,
            v_th: self.v_th,
            reset,
            dt,
            seed: self.seed,
            sweep: self.sweep.clone(),
        })
    }
}

pub fn periodic_signal(
    first: &ModeId,
    second: &ModeId,
    t_on: f64,
    t_off: f64,
    periods: usize,
) -> Result<SwitchingSignal, ConfigError> {
    if periods == 0 {
        return Err(invalid("signal.periodic.periods", "at least one period is required"));
    }
    if !(t_on > 0.0 && t_off > 0.0 && t_on.is_finite() && t_off.is_finite()) {
        return Err(invalid("signal.periodic", "T_I and T_0 must be positive"));
    }
    let period = t_on + t_off;
    let switches = (0..periods)
        .flat_map(|j| {
            let start = period * j as f64;
            [(start, first.clone()), (start + t_on, second.clone())]
        })
        .collect();
    SwitchingSignal::new(switches, period * periods as f64).map_err(|e| invalid("signal", e))
}

/// Shortest ON and OFF durations of an explicit signal, ignoring the final
/// piece, which the horizon cuts off; a mode without a completed interval
/// contributes `+inf`.
fn neuron_durations(signal: &SwitchingSignal) -> (f64, f64) {
    let segments: Vec<_> = signal.segments().collect();
    let complete = segments.len().saturating_sub(1);
    let shortest = |id: &str| {
        segments[..complete]
            .iter()
            .filter(|(_, _, m)| m.as_str() == id)
            .map(|(s, e, _)| e - s)
            .fold(f64::INFINITY, f64::min)
    };
    (shortest(neuron::ON), shortest(neuron::OFF))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SET1: &str = r#"{
        "neuron": {"g_p": 0.75, "g_h": 0.15, "m": 1, "o_h": 0.35, "I": 1},
        "signal": {"periodic": {"T_I": 3.84, "T_0": 3.84, "periods": 20}},
        "v_th": 2.6
    }"#;

    #[test]
    fn neuron_config_defaults() {
        let run = RunConfig::from_json(SET1).unwrap().resolve().unwrap();
        assert_eq!(run.k, 0.2);
        assert_eq!(run.x0, Vec2::zeros());
        assert_eq!(run.signal.switches().len(), 40);
        assert!((run.dt - 3.84e-3).abs() < 1e-15);
        let p = run.neuron.unwrap();
        assert_eq!((p.t_on, p.t_off, p.v_th), (3.84, 3.84, Some(2.6)));
        assert!(run.reset.is_none());
    }

    #[test]
    fn raw_modes_explicit_signal() {
        let text = r#"{
            "modes": [
                {"id": "A", "a": -1, "b": 2, "c": -3, "d": -4, "B": [0, 0]},
                {"id": "B", "a": -1, "b": 2, "c": -3, "d": -4, "B": [1, 1]}
            ],
            "signal": {"explicit": {"switches": [[0, "A"], [2, "B"], [4, "A"]], "horizon": 6}},
            "k": 1, "x0": [0.1, 0.1], "dt": 0.01
        }"#;
        let run = RunConfig::from_json(text).unwrap().resolve().unwrap();
        assert_eq!(run.modes.len(), 2);
        assert_eq!(run.signal.horizon(), 6.0);
        assert_eq!(run.periodic_pair, Some(("A".into(), "B".into())));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(RunConfig::from_json("{"), Err(ConfigError::Parse(_))));
        let both = SET1.replace(
            "\"v_th\": 2.6",
            "\"modes\": [{\"id\": \"A\", \"a\": -1, \"b\": 2, \"c\": -3, \"d\": -4, \"B\": [0, 0]}]",
        );
        let err = RunConfig::from_json(&both).unwrap().resolve().unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { field: "neuron/modes", .. }));
        let zero = SET1.replace("\"periods\": 20", "\"periods\": 0");
        assert!(RunConfig::from_json(&zero).unwrap().resolve().is_err());
        let typo = SET1.replace("\"v_th\"", "\"vth\"");
        let msg = RunConfig::from_json(&typo).unwrap_err().to_string();
        assert!(msg.contains("vth") && msg.contains("line"), "{msg}");
        let neg = SET1.replace("\"v_th\": 2.6", "\"k\": -1");
        assert!(RunConfig::from_json(&neg).unwrap().resolve().is_err());
        let reset_no_th = SET1.replace("\"v_th\": 2.6", "\"reset\": {\"v_R\": 0, \"h_R\": {\"ON\": 0, \"OFF\": 0}}");
        assert!(RunConfig::from_json(&reset_no_th).unwrap().resolve().is_err());
        let unknown_mode = r#"{
            "modes": [{"id": "A", "a": -1, "b": 2, "c": -3, "d": -4, "B": [0, 0]}],
            "signal": {"explicit": {"switches": [[0, "A"], [1, "Z"]], "horizon": 2}}
        }"#;
        assert!(RunConfig::from_json(unknown_mode).unwrap().resolve().is_err());
    }

    #[test]
    fn reset_block_feeds_neuron_params() {
        let text = SET1.replace(
            "\"v_th\": 2.6",
            "\"v_th\": 0.5, \"reset\": {\"v_R\": 0, \"h_R\": {\"ON\": -0.5, \"OFF\": 0}}",
        );
        let run = RunConfig::from_json(&text).unwrap().resolve().unwrap();
        let rule = run.reset.unwrap();
        assert_eq!(rule.v_th, 0.5);
        let p = run.neuron.unwrap();
        assert_eq!(p.h_reset, Some(ResetRecovery { on: -0.5, off: 0.0 }));
        assert_eq!(p.reset_rule().unwrap(), Some(rule));
    }
}
