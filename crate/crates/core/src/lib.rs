//! Link-level BER simulation of OFDM, AFDM, OCDM and OTFS over the 3GPP NTN
//! tapped-delay-line LEO channels, with LMMSE and MMSE successive detection.
//!
//! The crate is organised bottom-up:
//!
//! * [`transforms`]: DFT, chirp, DAFT, OTFS Kronecker and shift matrices;
//! * [`waveforms`]: modulators, demodulators and effective channels;
//! * [`channel`]: TDL profiles, Doppler models and channel realizations;
//! * [`detection`]: LMMSE and MMSE-SD detectors;
//! * [`qam`]: Gray-coded square QAM;
//! * [`montecarlo`]: the frame pipeline and SNR sweeps.

pub mod channel;
pub mod detection;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod qam;
pub mod transforms;
pub mod waveforms;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
