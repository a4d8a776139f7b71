//! Boolean gate discovery from excitation dynamics.
//!
//! Every gate here is a two-input function with output fixed false at input
//! 00 (an unstimulated network stays at rest), so a gate is exactly a
//! non-empty subset of the stimulated pairs {01, 10, 11} on which it outputs
//! true. The four discovery routes differ only in how that subset is read
//! off the dynamics:
//!
//! * [`structural`]: which output channels a wave reaches,
//! * [`domains`]: which high-frequency domains a node belongs to,
//! * [`activity`]: which pairs have average activity inside an interval,
//! * [`spikes`] and [`counts`]: which pairs spike at an electrode together.

pub mod activity;
pub mod counts;
pub mod domains;
pub mod spikes;
pub mod structural;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fhn::InputPair;

pub use self::activity::activity_gate;
pub use self::counts::{
    count_gates, rank_gates, segment_events, ColumnStats, GateCountRow, GateCountTable, GateFamily,
};
pub use self::domains::{domain_overlay, extract_domains, frequency_gate_sites, FrequencyDomain};
pub use self::spikes::{
    detect_spikes, merge_coincidences, spiking_events, CoincidenceEvent, SpikeEvent, SpikeSettings,
};
pub use self::structural::{channel_functions, OutputFunction, StructuralReport};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GateError {
    #[error("an empty set of input pairs does not identify a gate")]
    EmptySubset,
    #[error("unknown gate {0:?}")]
    UnknownGate(String),
}

/// A set of stimulated input pairs, as a bitmask over (01, 10, 11).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairSet(u8);

impl PairSet {
    pub const EMPTY: PairSet = PairSet(0);
    pub const ALL: PairSet = PairSet(0b111);

    pub fn from_bits(bits: u8) -> Self {
        PairSet(bits & 0b111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_truth(truth: [bool; 3]) -> Self {
        PairSet(
            truth
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &b)| acc | (u8::from(b) << i)),
        )
    }

    pub fn truth(self) -> [bool; 3] {
        [self.0 & 1 != 0, self.0 & 2 != 0, self.0 & 4 != 0]
    }

    /// Adding 00 is a no-op: it never belongs to a gate subset.
    pub fn with(self, pair: InputPair) -> Self {
        match pair.gate_index() {
            Some(i) => PairSet(self.0 | 1 << i),
            None => self,
        }
    }

    pub fn contains(self, pair: InputPair) -> bool {
        pair.gate_index().is_some_and(|i| self.0 & 1 << i != 0)
    }

    pub fn union(self, other: PairSet) -> Self {
        PairSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn pairs(self) -> impl Iterator<Item = InputPair> {
        InputPair::GATE_PAIRS
            .into_iter()
            .filter(move |&p| self.contains(p))
    }

    /// All seven non-empty subsets.
    pub fn non_empty() -> impl Iterator<Item = PairSet> {
        (1..8).map(PairSet)
    }
}

impl fmt::Display for PairSet {
    /// Pairs joined by `+`, e.g. `01+11`; the empty set prints as `-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        let parts: Vec<String> = self.pairs().map(|p| p.to_string()).collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for PairSet {
    type Err = crate::fhn::ParseInputPairError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "-" {
            return Ok(PairSet::EMPTY);
        }
        s.split('+')
            .try_fold(PairSet::EMPTY, |acc, p| Ok(acc.with(p.trim().parse()?)))
    }
}

impl Serialize for PairSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PairSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The seven two-input gates, in the column order of the gate tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    Or,
    SelectY,
    Xor,
    SelectX,
    NotAnd,
    AndNot,
    And,
}

impl GateKind {
    pub const ALL: [GateKind; 7] = [
        GateKind::Or,
        GateKind::SelectY,
        GateKind::Xor,
        GateKind::SelectX,
        GateKind::NotAnd,
        GateKind::AndNot,
        GateKind::And,
    ];

    /// Output on (01, 10, 11).
    pub fn truth(self) -> [bool; 3] {
        match self {
            GateKind::Or => [true, true, true],
            GateKind::SelectY => [true, false, true],
            GateKind::Xor => [true, true, false],
            GateKind::SelectX => [false, true, true],
            GateKind::NotAnd => [true, false, false],
            GateKind::AndNot => [false, true, false],
            GateKind::And => [false, false, true],
        }
    }

    pub fn subset(self) -> PairSet {
        PairSet::from_truth(self.truth())
    }

    /// Evaluate the gate on an input pair (false at 00).
    pub fn eval(self, inputs: InputPair) -> bool {
        inputs.gate_index().is_some_and(|i| self.truth()[i])
    }

    /// Algebraic notation: `x+y`, `y`, `x⊕y`, `x`, `x̄y`, `xȳ`, `xy`.
    pub fn notation(self) -> &'static str {
        match self {
            GateKind::Or => "x+y",
            GateKind::SelectY => "y",
            GateKind::Xor => "x⊕y",
            GateKind::SelectX => "x",
            GateKind::NotAnd => "x̄y",
            GateKind::AndNot => "xȳ",
            GateKind::And => "xy",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Or => "OR",
            GateKind::SelectY => "SELECT_Y",
            GateKind::Xor => "XOR",
            GateKind::SelectX => "SELECT_X",
            GateKind::NotAnd => "NOT_AND",
            GateKind::AndNot => "AND_NOT",
            GateKind::And => "AND",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s) || g.notation() == s)
            .ok_or_else(|| GateError::UnknownGate(s.to_owned()))
    }
}

/// Map the set of input pairs producing a `True` output to its gate.
pub fn classify_gate(subset: PairSet) -> Result<GateKind, GateError> {
    let [p01, p10, p11] = subset.truth();
    Ok(match (p01, p10, p11) {
        (true, true, true) => GateKind::Or,
        (true, false, true) => GateKind::SelectY,
        (true, true, false) => GateKind::Xor,
        (false, true, true) => GateKind::SelectX,
        (true, false, false) => GateKind::NotAnd,
        (false, true, false) => GateKind::AndNot,
        (false, false, true) => GateKind::And,
        (false, false, false) => return Err(GateError::EmptySubset),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pairs: &[&str]) -> PairSet {
        pairs
            .iter()
            .fold(PairSet::EMPTY, |s, p| s.with(p.parse().unwrap()))
    }

    #[test]
    fn table_rows() {
        assert_eq!(classify_gate(set(&["01", "10", "11"])), Ok(GateKind::Or));
        assert_eq!(classify_gate(set(&["10"])), Ok(GateKind::AndNot));
        assert_eq!(classify_gate(set(&["11"])), Ok(GateKind::And));
        assert_eq!(classify_gate(PairSet::EMPTY), Err(GateError::EmptySubset));
    }

    #[test]
    fn classify_inverts_subset() {
        for s in PairSet::non_empty() {
            assert_eq!(classify_gate(s).unwrap().subset(), s);
        }
        for g in GateKind::ALL {
            assert_eq!(classify_gate(g.subset()).unwrap(), g);
        }
    }

    #[test]
    fn eval_is_false_at_rest() {
        for g in GateKind::ALL {
            assert!(!g.eval(InputPair::P00));
        }
        assert!(GateKind::Xor.eval(InputPair::P01));
        assert!(!GateKind::Xor.eval(InputPair::P11));
    }

    #[test]
    fn pair_set_text() {
        let s = set(&["01", "11"]);
        assert_eq!(s.to_string(), "01+11");
        assert_eq!("01+11".parse::<PairSet>().unwrap(), s);
        assert_eq!("-".parse::<PairSet>().unwrap(), PairSet::EMPTY);
        assert_eq!(PairSet::EMPTY.with(InputPair::P00), PairSet::EMPTY);
    }

    #[test]
    fn gate_names_parse() {
        for g in GateKind::ALL {
            assert_eq!(g.name().parse::<GateKind>().unwrap(), g);
            assert_eq!(g.notation().parse::<GateKind>().unwrap(), g);
        }
        assert!("NAND".parse::<GateKind>().is_err());
    }
}
