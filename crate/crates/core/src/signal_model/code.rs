//! GPS L1 C/A Gold codes.

use serde::{Deserialize, Serialize};

use super::SignalError;

/// Chips per C/A code period.
pub const CA_CODE_LENGTH: usize = 1023;
/// C/A chipping rate, chips per second.
pub const CA_CHIPPING_RATE: f64 = 1.023e6;

/// G2 phase-selector taps (1-based register stages) for PRN 1..=32.
const G2_TAPS: [(usize, usize); 32] = [
    (2, 6),
    (3, 7),
    (4, 8),
    (5, 9),
    (1, 9),
    (2, 10),
    (1, 8),
    (2, 9),
    (3, 10),
    (2, 3),
    (3, 4),
    (5, 6),
    (6, 7),
    (7, 8),
    (8, 9),
    (9, 10),
    (1, 4),
    (2, 5),
    (3, 6),
    (4, 7),
    (5, 8),
    (6, 9),
    (1, 3),
    (4, 6),
    (5, 7),
    (6, 8),
    (7, 9),
    (8, 10),
    (1, 6),
    (2, 7),
    (3, 8),
    (4, 9),
];

/// A spreading code with ±1 chips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipSequence {
    chips: Vec<i8>,
    prn_id: u8,
    chipping_rate: f64,
}

impl ChipSequence {
    /// Builds a sequence from explicit chips. Every chip must be +1 or -1.
    pub fn new(chips: Vec<i8>, prn_id: u8, chipping_rate: f64) -> Result<Self, SignalError> {
        if chips.is_empty() {
            return Err(SignalError::InvalidCode("empty chip sequence".into()));
        }
        if let Some(bad) = chips.iter().find(|&&c| c != 1 && c != -1) {
            return Err(SignalError::InvalidCode(format!("chip value {bad} is not ±1")));
        }
        if !(chipping_rate.is_finite() && chipping_rate > 0.0) {
            return Err(SignalError::InvalidCode(format!(
                "chipping rate {chipping_rate} must be positive"
            )));
        }
        Ok(Self {
            chips,
            prn_id,
            chipping_rate,
        })
    }

    pub fn chips(&self) -> &[i8] {
        &self.chips
    }

    pub fn prn_id(&self) -> u8 {
        self.prn_id
    }

    pub fn chipping_rate(&self) -> f64 {
        self.chipping_rate
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    /// Duration of one chip in seconds.
    pub fn chip_duration(&self) -> f64 {
        1.0 / self.chipping_rate
    }

    /// Duration of one full code period in seconds.
    pub fn period(&self) -> f64 {
        self.chips.len() as f64 / self.chipping_rate
    }

    /// Chip at a (possibly negative or out-of-range) index, wrapping periodically.
    pub fn chip(&self, index: i64) -> f64 {
        let n = self.chips.len() as i64;
        f64::from(self.chips[index.rem_euclid(n) as usize])
    }
}

/// Generates the 1023-chip C/A Gold code of a GPS satellite.
///
/// Chips are produced by the G1/G2 shift-register pair and mapped
/// `0 -> +1`, `1 -> -1`.
pub fn generate_ca_code(prn: u8) -> Result<ChipSequence, SignalError> {
    if !(1..=32).contains(&prn) {
        return Err(SignalError::UnsupportedPrn(prn));
    }
    let (tap_a, tap_b) = G2_TAPS[usize::from(prn) - 1];

    // Stage i of the register lives at index i - 1.
    let mut g1 = [1u8; 10];
    let mut g2 = [1u8; 10];
    let mut chips = Vec::with_capacity(CA_CODE_LENGTH);
    for _ in 0..CA_CODE_LENGTH {
        let bit = g1[9] ^ g2[tap_a - 1] ^ g2[tap_b - 1];
        chips.push(if bit == 0 { 1 } else { -1 });

        let f1 = g1[2] ^ g1[9];
        let f2 = g2[1] ^ g2[2] ^ g2[5] ^ g2[7] ^ g2[8] ^ g2[9];
        g1.copy_within(0..9, 1);
        g2.copy_within(0..9, 1);
        g1[0] = f1;
        g2[0] = f2;
    }
    ChipSequence::new(chips, prn, CA_CHIPPING_RATE)
}
