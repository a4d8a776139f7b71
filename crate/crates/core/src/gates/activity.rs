//! Gates read off the steady-state average activity of each input pair.

use super::{classify_gate, GateKind, PairSet};

/// Treat an average activity inside `[lo, hi]` (inclusive) as `True`.
/// `averages` are for the pairs (01, 10, 11); `None` when no pair falls
/// inside the interval.
pub fn activity_gate(averages: [f64; 3], interval: (f64, f64)) -> Option<GateKind> {
    let (lo, hi) = interval;
    let truth = averages.map(|a| lo <= a && a <= hi);
    classify_gate(PairSet::from_truth(truth)).ok()
}

/// Every gate realisable by some interval whose end points are drawn from
/// the averages themselves, with one representative interval per gate.
pub fn realisable_activity_gates(averages: [f64; 3]) -> Vec<(GateKind, (f64, f64))> {
    let mut out: Vec<(GateKind, (f64, f64))> = Vec::new();
    for &lo in &averages {
        for &hi in &averages {
            if lo > hi {
                continue;
            }
            if let Some(g) = activity_gate(averages, (lo, hi)) {
                if !out.iter().any(|(k, _)| *k == g) {
                    out.push((g, (lo, hi)));
                }
            }
        }
    }
    out.sort_by_key(|(g, _)| *g);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXCITABLE: [f64; 3] = [0.068, 0.05, 0.08];
    const SUB_EXCITABLE: [f64; 3] = [0.006, 0.02, 0.02];

    #[test]
    fn reference_intervals_excitable() {
        assert_eq!(
            activity_gate(EXCITABLE, (0.075, 0.085)),
            Some(GateKind::And)
        );
        assert_eq!(
            activity_gate(EXCITABLE, (0.045, 0.055)),
            Some(GateKind::AndNot)
        );
        assert_eq!(
            activity_gate(EXCITABLE, (0.063, 0.073)),
            Some(GateKind::NotAnd)
        );
        assert_eq!(
            activity_gate(EXCITABLE, (0.045, 0.073)),
            Some(GateKind::Xor)
        );
    }

    #[test]
    fn reference_intervals_sub_excitable() {
        assert_eq!(
            activity_gate(SUB_EXCITABLE, (0.005, 0.007)),
            Some(GateKind::NotAnd)
        );
        assert_eq!(
            activity_gate(SUB_EXCITABLE, (0.015, 0.025)),
            Some(GateKind::SelectX)
        );
    }

    #[test]
    fn empty_interval_gives_none() {
        assert_eq!(activity_gate(EXCITABLE, (0.2, 0.3)), None);
    }

    #[test]
    fn bounds_are_inclusive() {
        assert_eq!(
            activity_gate([0.1, 0.2, 0.3], (0.1, 0.1)),
            Some(GateKind::NotAnd)
        );
        assert_eq!(
            activity_gate([0.1, 0.2, 0.3], (0.2, 0.3)),
            Some(GateKind::SelectX)
        );
    }

    #[test]
    fn distinct_averages_realise_six_gates() {
        // Every contiguous run of the sorted averages is reachable; SELECT_X
        // would need 10 and 11 without 01, which 0.05 < 0.068 < 0.08 forbids.
        let gates: Vec<GateKind> = realisable_activity_gates(EXCITABLE)
            .into_iter()
            .map(|(g, _)| g)
            .collect();
        assert_eq!(gates.len(), 6);
        assert!(!gates.contains(&GateKind::SelectX));
    }
}
