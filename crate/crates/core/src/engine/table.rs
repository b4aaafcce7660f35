use serde::{Deserialize, Serialize};

use super::{probabilities, probability_fock, Scenario};
use crate::linalg::OccupationVector;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComputationPath {
    /// Permutation sum for Fock inputs with every photon detected.
    Fock,
    /// Exact Taylor coefficients of the generating function.
    Series,
    /// Chebyshev interpolation of the generating function.
    Interpolated,
    /// Brute-force Fock-space simulation.
    Oracle,
}

impl ComputationPath {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fock => "fock",
            Self::Series => "series",
            Self::Interpolated => "interpolated",
            Self::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub pattern: OccupationVector,
    pub probability: f64,
    pub path: ComputationPath,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    /// Content hash of the scenario file, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    pub cutoff: usize,
    pub max_total: usize,
    /// Input population dropped by source and total-photon truncation.
    pub truncation_budget: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub metadata: TableMetadata,
    pub entries: Vec<TableEntry>,
}

impl ProbabilityTable {
    pub fn get(&self, pattern: &OccupationVector) -> Option<f64> {
        self.entries.iter().find(|e| &e.pattern == pattern).map(|e| e.probability)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    /// Largest absolute difference over patterns present in both tables.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .filter_map(|e| other.get(&e.pattern).map(|p| (p - e.probability).abs()))
            .fold(0.0, f64::max)
    }
}

/// Every pattern with at most `max_total` detected photons, ordered by total
/// and then in descending lexicographic order. Fock scenarios use the
/// permutation sum for the fully detected patterns.
pub fn distribution(s: &Scenario, max_total: usize) -> Result<ProbabilityTable> {
    if max_total > s.p_max() {
        return Err(Error::Domain(format!(
            "max_total {max_total} exceeds the cutoff {}",
            s.p_max()
        )));
    }
    let patterns = OccupationVector::all_up_to(s.ports(), max_total);
    let fock_total = s
        .fock_numbers()
        .map(|n| n.iter().sum::<usize>())
        .filter(|&n| n <= super::MAX_FOCK_PHOTONS);
    let (fast, slow): (Vec<_>, Vec<_>) =
        patterns.iter().cloned().partition(|m| Some(m.total()) == fock_total);
    let slow_values = probabilities(s, &slow)?;
    let mut slow_iter = slow_values.into_iter();
    let mut fast_iter = fast.iter();
    let mut entries = Vec::with_capacity(patterns.len());
    for m in patterns {
        let entry = if Some(m.total()) == fock_total {
            let pattern = fast_iter.next().expect("partitioned").clone();
            let probability = probability_fock(s, &pattern)?;
            TableEntry { pattern, probability, path: ComputationPath::Fock }
        } else {
            let probability = slow_iter.next().expect("partitioned");
            TableEntry { pattern: m, probability, path: ComputationPath::Series }
        };
        entries.push(entry);
    }
    let total: f64 = entries.iter().map(|e| e.probability).sum();
    if total > 1.0 + 1e-8 {
        return Err(Error::InvariantViolation(format!("probabilities sum to {total}")));
    }
    Ok(ProbabilityTable {
        metadata: TableMetadata {
            digest: None,
            cutoff: s.p_max(),
            max_total,
            truncation_budget: s.truncation_budget(),
        },
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distinguishability::{model_uniform_overlap, GramMatrix};
    use crate::engine::DetectorBank;
    use crate::linalg::ComplexMatrix;
    use crate::sources::SingleModeSource;
    use crate::C64;

    #[test]
    fn all_vacuum_table() {
        let s = Scenario::new(
            ComplexMatrix::identity(2),
            vec![SingleModeSource::vacuum(); 2],
            GramMatrix::identity(2),
            DetectorBank::perfect(2),
        )
        .unwrap();
        let t = distribution(&s, 0).unwrap();
        assert_eq!(t.entries.len(), 1);
        assert_eq!(t.entries[0].probability, 1.0);
    }

    #[test]
    fn lossy_hom_is_complete_and_ordered() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = Scenario::new(
            ComplexMatrix::from_real_rows(&[&[r, r], &[r, -r]]).unwrap(),
            vec![SingleModeSource::fock(1, 1).unwrap(); 2],
            model_uniform_overlap(2, C64::new(1.0, 0.0)).unwrap(),
            DetectorBank::uniform(2, 0.5).unwrap(),
        )
        .unwrap();
        let t = distribution(&s, 2).unwrap();
        assert!((t.total() - 1.0).abs() < 1e-12);
        let order: Vec<String> = t.entries.iter().map(|e| e.pattern.to_string()).collect();
        assert_eq!(order, ["0 0", "1 0", "0 1", "2 0", "1 1", "0 2"]);
        assert_eq!(t.entries[3].path, ComputationPath::Fock);
        assert_eq!(t.entries[1].path, ComputationPath::Series);
        assert!(t.get(&OccupationVector::new(vec![1, 1])).unwrap() < 1e-15);
    }
}
