//! Named run presets that regenerate the published comparison figures.
//!
//! A preset fixes the channel model and expands one base configuration into
//! a curve per (waveform, detector) pair: AFDM, OCDM and OTFS, each under
//! LMMSE and MMSE-SD. All other settings come from the base configuration.

use ntnsim::channel::TdlModel;
use ntnsim::detection::DetectorKind;
use ntnsim::montecarlo::{ChannelModel, SimConfig};
use ntnsim::waveforms::WaveformKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub channel: TdlModel,
    pub description: &'static str,
}

pub const PRESETS: [Preset; 5] = [
    Preset {
        name: "fig3-tdlc",
        channel: TdlModel::TdlC,
        description: "LMMSE vs MMSE-SD for AFDM, OCDM and OTFS over TDL-C",
    },
    Preset {
        name: "fig4-tdla",
        channel: TdlModel::TdlA,
        description: "waveform comparison over TDL-A",
    },
    Preset {
        name: "fig4-tdlb",
        channel: TdlModel::TdlB,
        description: "waveform comparison over TDL-B",
    },
    Preset {
        name: "fig4-tdlc",
        channel: TdlModel::TdlC,
        description: "waveform comparison over TDL-C",
    },
    Preset {
        name: "fig4-tdld",
        channel: TdlModel::TdlD,
        description: "waveform comparison over TDL-D",
    },
];

/// Waveforms compared by every preset.
pub const PRESET_WAVEFORMS: [WaveformKind; 3] = [WaveformKind::Afdm, WaveformKind::Ocdm, WaveformKind::Otfs];

pub fn find_preset(name: &str) -> Option<Preset> {
    PRESETS.into_iter().find(|p| p.name.eq_ignore_ascii_case(name.trim()))
}

impl Preset {
    /// One configuration per curve, waveform-major.
    pub fn expand(&self, base: &SimConfig) -> Vec<SimConfig> {
        let mut curves = Vec::with_capacity(PRESET_WAVEFORMS.len() * DetectorKind::ALL.len());
        for waveform in PRESET_WAVEFORMS {
            for detector in DetectorKind::ALL {
                curves.push(SimConfig {
                    waveform,
                    detector,
                    channel_model: ChannelModel::Tdl(self.channel),
                    ..base.clone()
                });
            }
        }
        curves
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_cover_all_models_and_both_detectors() {
        assert_eq!(find_preset("fig3-tdlc").unwrap().channel, TdlModel::TdlC);
        for (name, model) in ["fig4-tdla", "fig4-tdlb", "fig4-tdlc", "fig4-tdld"].iter().zip(TdlModel::ALL) {
            let p = find_preset(name).unwrap();
            assert_eq!(p.channel, model);
            let curves = p.expand(&SimConfig::default());
            assert_eq!(curves.len(), 6);
            for c in &curves {
                assert_eq!(c.channel_model, ChannelModel::Tdl(model));
                c.validate().unwrap();
            }
            for w in PRESET_WAVEFORMS {
                for d in DetectorKind::ALL {
                    assert!(curves.iter().any(|c| c.waveform == w && c.detector == d));
                }
            }
        }
        assert!(find_preset("fig5").is_none());
    }

    #[test]
    fn expansion_keeps_base_settings() {
        let base = SimConfig {
            master_seed: 99,
            snr_db_points: vec![3.0],
            ..SimConfig::default()
        };
        for c in find_preset("fig4-tdla").unwrap().expand(&base) {
            assert_eq!(c.master_seed, 99);
            assert_eq!(c.snr_db_points, vec![3.0]);
            assert_eq!((c.n, c.k, c.l, c.modulation_order), (256, 16, 16, 16));
        }
    }
}
