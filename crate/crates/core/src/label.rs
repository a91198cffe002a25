use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error};

/// Number of classes the classifier distinguishes (noise plus six modulations).
pub const NUM_CLASSES: usize = 7;

/// Classifier output label. The discriminants are the wire/file ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum ModulationLabel {
    Noise = 0,
    Bpsk = 1,
    Qpsk = 2,
    Cpm = 3,
    Gfsk = 4,
    Qam16 = 5,
    Gmsk = 6,
}

impl ModulationLabel {
    pub const ALL: [ModulationLabel; NUM_CLASSES] = [
        Self::Noise,
        Self::Bpsk,
        Self::Qpsk,
        Self::Cpm,
        Self::Gfsk,
        Self::Qam16,
        Self::Gmsk,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Noise => "noise",
            Self::Bpsk => "BPSK",
            Self::Qpsk => "QPSK",
            Self::Cpm => "CPM",
            Self::Gfsk => "GFSK",
            Self::Qam16 => "QAM16",
            Self::Gmsk => "GMSK",
        }
    }

    /// BPSK, QPSK and QAM16 map symbols onto a fixed constellation.
    pub fn is_linear(self) -> bool {
        matches!(self, Self::Bpsk | Self::Qpsk | Self::Qam16)
    }

    /// CPM, GFSK and GMSK carry data in a continuous phase trajectory.
    pub fn is_constant_envelope(self) -> bool {
        matches!(self, Self::Cpm | Self::Gfsk | Self::Gmsk)
    }
}

impl fmt::Display for ModulationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModulationLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(id) = s.parse::<u8>() {
            return Self::from_id(id).ok_or_else(|| invalid(format!("label id {id} out of range")));
        }
        Self::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid(format!("unknown modulation label {s:?}")))
    }
}
