//! Contiguous code-distance metrics.
//!
//! All three distances share one scan shape: a criterion value per
//! contiguous window length (windows wrap, and every start position is
//! averaged), and the distance is the largest length at which the ensemble
//! mean stays below a threshold ε = 1.
//!
//! * mutual-information distance: smallest contiguous region whose mutual
//!   information with the reference register exceeds ε, from purified
//!   tableaux;
//! * erasure-rank distance of the evolved particle basis: deleting rows
//!   (initial sites) must not change the rank;
//! * classical-code distance: deleting final-site columns of the evolved
//!   generator matrix must not change the rank.

use serde::Serialize;
use thiserror::Error;

use crate::gf2::{prefix_column_ranks, BitMatrix, BitVec, CyclicWindowRank};
use crate::stabilizer::Tableau;

pub const EPSILON: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum CodesError {
    #[error("distance scan needs a non-empty ensemble")]
    EmptyEnsemble,
}

/// Result of one window scan: criterion mean per window length and the
/// extracted distance.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceScan {
    pub l: usize,
    pub p: f64,
    pub t: usize,
    pub epsilon: f64,
    /// `criterion[k-1]` = ensemble mean at window length k.
    pub criterion: Vec<f64>,
    /// Largest window length whose criterion stays below ε (first crossing
    /// of the mean, no smoothing).
    pub distance: usize,
    /// The ensemble had nothing left to protect (pure state / zero rank);
    /// the scan is reported but the distance carries no information.
    pub degenerate: bool,
}

/// First crossing of ε by the mean criterion: distance = length just below
/// it, or the full scan length if the criterion never crosses.
pub fn extract_distance(
    l: usize,
    p: f64,
    t: usize,
    criterion: Vec<f64>,
    degenerate: bool,
) -> DistanceScan {
    let distance = criterion
        .iter()
        .position(|&c| c >= EPSILON)
        .unwrap_or(criterion.len());
    DistanceScan {
        l,
        p,
        t,
        epsilon: EPSILON,
        criterion,
        distance,
        degenerate,
    }
}

// ===== per-trajectory criteria =====

/// Mutual information between a contiguous dynamical window and the
/// reference register of a purified tableau, averaged over all window
/// starts, for every window length 1..=L. Also returns the total dynamical
/// entropy S_Q. Uses the purity of the global state: I(A:R) = S_A + S_Q −
/// S_{Q∖A}, so one cyclic rank structure answers every window.
pub fn reference_mi_by_window(tab: &Tableau, l_sys: usize) -> (usize, Vec<f64>) {
    assert_eq!(tab.num_qubits(), 2 * l_sys, "needs a purified register");
    let q_sites: Vec<usize> = (0..l_sys).collect();
    let mt = tab.stab_site_matrix(&q_sites).transpose();
    let site_rows: Vec<Vec<BitVec>> = (0..l_sys)
        .map(|s| vec![mt.row(2 * s).clone(), mt.row(2 * s + 1).clone()])
        .collect();
    let cwr = CyclicWindowRank::build(&site_rows);
    let rank_q = cwr.rank(0, l_sys);
    let s_q = rank_q - l_sys;
    let mut crit = Vec::with_capacity(l_sys);
    for l_a in 1..=l_sys {
        let mut sum = 0i64;
        for start in 0..l_sys {
            let ra = cwr.rank(start, l_a) as i64;
            let rc = cwr.rank((start + l_a) % l_sys, l_sys - l_a) as i64;
            let i_ar = ra + rank_q as i64 - rc - 2 * l_a as i64;
            debug_assert!(i_ar >= 0, "mutual information must be nonnegative");
            sum += i_ar;
        }
        crit.push(sum as f64 / l_sys as f64);
    }
    (s_q, crit)
}

/// Rank deficits after deleting a cyclic window of vector groups: for each
/// window length, the mean over starts of rank(all) − rank(outside window).
/// Per start the deficit is non-decreasing in the length (deleting more
/// can only lose rank), so the returned criterion is monotone.
pub fn deletion_deficits(groups: &[Vec<BitVec>]) -> (usize, Vec<f64>) {
    let n = groups.len();
    let cwr = CyclicWindowRank::build(groups);
    let k = cwr.rank(0, n);
    let mut crit = Vec::with_capacity(n);
    for len in 1..=n {
        let mut sum = 0usize;
        for start in 0..n {
            sum += k - cwr.rank((start + len) % n, n - len);
        }
        crit.push(sum as f64 / n as f64);
    }
    (k, crit)
}

/// Deficits from deleting rows (one group per row).
pub fn row_deletion_deficits(m: &BitMatrix) -> (usize, Vec<f64>) {
    let groups: Vec<Vec<BitVec>> = m.rows().iter().map(|r| vec![r.clone()]).collect();
    deletion_deficits(&groups)
}

/// Deficits from deleting (zeroing) columns.
pub fn column_deletion_deficits(m: &BitMatrix) -> (usize, Vec<f64>) {
    let mt = m.transpose();
    let groups: Vec<Vec<BitVec>> = mt.rows().iter().map(|r| vec![r.clone()]).collect();
    deletion_deficits(&groups)
}

fn mean_criteria(per_traj: Vec<Vec<f64>>) -> Vec<f64> {
    let n = per_traj.len() as f64;
    let len = per_traj[0].len();
    let mut mean = vec![0.0; len];
    for crit in &per_traj {
        assert_eq!(crit.len(), len);
        for (m, c) in mean.iter_mut().zip(crit) {
            *m += c;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

// ===== ensemble scans =====

/// Mutual-information distance over an ensemble of purified tableaux:
/// the largest contiguous region length whose mean information with the
/// reference stays below ε. Degenerate (flagged) when the ensemble has
/// fully purified — every region then looks correctable.
pub fn qecc_distance(
    tabs: &[Tableau],
    l: usize,
    p: f64,
    t: usize,
) -> Result<DistanceScan, CodesError> {
    if tabs.is_empty() {
        return Err(CodesError::EmptyEnsemble);
    }
    let mut s_q_total = 0usize;
    let mut per_traj = Vec::with_capacity(tabs.len());
    for tab in tabs {
        let (s_q, crit) = reference_mi_by_window(tab, l);
        s_q_total += s_q;
        per_traj.push(crit);
    }
    Ok(extract_distance(l, p, t, mean_criteria(per_traj), s_q_total == 0))
}

/// Erasure distance of the evolved particle basis: for each contiguous set
/// of deleted basis rows, the rank deficit of what remains. A zero-rank
/// final basis (fully purified) is degenerate: nothing can be lost.
pub fn z_error_distance(
    bases: &[BitMatrix],
    l: usize,
    p: f64,
    t: usize,
) -> Result<DistanceScan, CodesError> {
    if bases.is_empty() {
        return Err(CodesError::EmptyEnsemble);
    }
    let mut rank_total = 0usize;
    let mut per_traj = Vec::with_capacity(bases.len());
    for m in bases {
        let (k, crit) = row_deletion_deficits(m);
        rank_total += k;
        per_traj.push(crit);
    }
    Ok(extract_distance(l, p, t, mean_criteria(per_traj), rank_total == 0))
}

/// Classical-code distance: generator matrices evolved to time T, scanned
/// by zeroing contiguous site-column windows. Zero final rank is flagged.
pub fn clc_distance(
    generators: &[BitMatrix],
    l: usize,
    p: f64,
    t: usize,
) -> Result<DistanceScan, CodesError> {
    if generators.is_empty() {
        return Err(CodesError::EmptyEnsemble);
    }
    let mut rank_total = 0usize;
    let mut per_traj = Vec::with_capacity(generators.len());
    for m in generators {
        let (k, crit) = column_deletion_deficits(m);
        rank_total += k;
        per_traj.push(crit);
    }
    Ok(extract_distance(l, p, t, mean_criteria(per_traj), rank_total == 0))
}

// ===== subsystem profiles =====

/// Per-trajectory prefix-cut profiles of a purified run: tableau-side
/// entropies and reference information, particle-side basis ranks.
#[derive(Clone, Debug)]
pub struct SubsystemProfile {
    /// S_A for A = first L_A sites, index = L_A ∈ 0..=L.
    pub s_a: Vec<usize>,
    /// I(A:R), same indexing.
    pub i_ar: Vec<i64>,
    /// Rank of the rows of the evolved basis that started inside A —
    /// the −log₂ of the survival weight restricted to A.
    pub neg_log2_p2: Vec<usize>,
    /// Total dynamical entropy S_Q = −log₂ of the full survival weight.
    pub s_q: usize,
}

/// Prefix-cut entropies and reference information of a purified tableau:
/// (S_A, I(A:R), S_Q) with index = L_A ∈ 0..=L.
pub fn tableau_profile(tab: &Tableau, l_sys: usize) -> (Vec<usize>, Vec<i64>, usize) {
    assert_eq!(tab.num_qubits(), 2 * l_sys, "needs a purified register");
    let q_sites: Vec<usize> = (0..l_sys).collect();
    let mut s_a = vec![0];
    s_a.extend(tab.entropy_prefix_profile(&q_sites));
    let reversed: Vec<usize> = q_sites.iter().rev().copied().collect();
    let mut suffix = vec![0];
    suffix.extend(tab.entropy_prefix_profile(&reversed));
    let s_q = s_a[l_sys];
    let i_ar: Vec<i64> = (0..=l_sys)
        .map(|l_a| s_a[l_a] as i64 + s_q as i64 - suffix[l_sys - l_a] as i64)
        .collect();
    (s_a, i_ar, s_q)
}

/// Profiles a purified tableau against the particle basis evolved through
/// the same realization.
pub fn subsystem_profile(tab: &Tableau, final_basis: &BitMatrix, l_sys: usize) -> SubsystemProfile {
    assert_eq!(final_basis.nrows(), l_sys);
    let (s_a, i_ar, s_q) = tableau_profile(tab, l_sys);
    let mut neg_log2_p2 = vec![0];
    neg_log2_p2.extend(prefix_column_ranks(&final_basis.transpose(), 1));
    SubsystemProfile {
        s_a,
        i_ar,
        neg_log2_p2,
        s_q,
    }
}

// ===== tests =====

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{rng_stream, sample_realization, CircuitSpec, Family};
    use crate::gf2::rank2;
    use crate::particles::{purification_ranks, BasisEnsemble};
    use crate::stabilizer::Tableau;

    fn purified_tableau(spec: &CircuitSpec, stream: u64) -> (Tableau, crate::circuit::CircuitRealization) {
        let r = sample_realization(spec, rng_stream(spec.seed, stream));
        let mut tab = Tableau::plus_x(r.nqubits, false);
        tab.apply_realization(&r);
        (tab, r)
    }

    #[test]
    fn window_scan_matches_direct_mutual_information() {
        let spec = CircuitSpec::new(Family::Purify, 8, 0.15, 12, 31);
        let (tab, _) = purified_tableau(&spec, 0);
        let r_sites: Vec<usize> = (8..16).collect();
        let (s_q, crit) = reference_mi_by_window(&tab, 8);
        assert_eq!(s_q as i64, tab.entropy(&(0..8).collect::<Vec<_>>()) as i64);
        for l_a in 1..=8usize {
            let mut direct = 0i64;
            for start in 0..8usize {
                let a: Vec<usize> = (0..l_a).map(|k| (start + k) % 8).collect();
                direct += tab.mutual_information(&a, &r_sites);
            }
            let direct_mean = direct as f64 / 8.0;
            assert!(
                (crit[l_a - 1] - direct_mean).abs() < 1e-12,
                "length {l_a}: scan {} vs direct {}",
                crit[l_a - 1],
                direct_mean
            );
        }
    }

    #[test]
    fn pure_state_scan_is_degenerate_and_extensive() {
        // a fresh product state carries no mixedness: information with the
        // reference vanishes for every region
        let tabs = vec![Tableau::plus_x(16, false)];
        let scan = qecc_distance(&tabs, 8, 0.0, 0).unwrap();
        assert!(scan.degenerate);
        assert_eq!(scan.distance, 8);
        assert!(scan.criterion.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn row_deletion_on_identity_and_zero() {
        let id = BitMatrix::identity(6);
        let (k, crit) = row_deletion_deficits(&id);
        assert_eq!(k, 6);
        for (i, &c) in crit.iter().enumerate() {
            assert_eq!(c, (i + 1) as f64, "every deleted row costs one rank");
        }
        let scan = z_error_distance(&[id], 6, 0.0, 0).unwrap();
        assert_eq!(scan.distance, 0);
        assert!(!scan.degenerate);

        let zero = BitMatrix::zeros(6, 6);
        let scan = z_error_distance(&[zero], 6, 0.0, 0).unwrap();
        assert!(scan.degenerate);
        assert_eq!(scan.distance, 6, "nothing to lose: every erasure is fine");
    }

    #[test]
    fn deficits_are_monotone_in_window_length() {
        let spec = CircuitSpec::new(Family::Entangle, 10, 0.2, 8, 77);
        let r = sample_realization(&spec, rng_stream(77, 0));
        let basis = purification_ranks(&r, false).final_basis;
        for deficits in [row_deletion_deficits(&basis).1, column_deletion_deficits(&basis).1] {
            for w in deficits.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }

    #[test]
    fn unitary_classical_evolution_loses_exactly_window_rank() {
        let l = 9;
        let spec = CircuitSpec::new(Family::Entangle, l, 0.0, 6, 55);
        let r = sample_realization(&spec, rng_stream(55, 0));
        let mut m = BasisEnsemble::unit_rows(l, &(0..l).collect::<Vec<_>>());
        for step in &r.steps {
            for layer in step {
                m.apply_layer(layer);
            }
        }
        let (k, crit) = column_deletion_deficits(&m.to_matrix());
        assert_eq!(k, l, "unitary layers preserve full rank");
        for (i, &c) in crit.iter().enumerate() {
            assert_eq!(c, (i + 1) as f64, "invertible map: deficit equals window length");
        }
    }

    #[test]
    fn first_crossing_extraction() {
        let scan = extract_distance(5, 0.1, 10, vec![0.0, 0.4, 0.99, 1.0, 1.7], false);
        assert_eq!(scan.distance, 3);
        let scan = extract_distance(5, 0.1, 10, vec![0.0; 5], false);
        assert_eq!(scan.distance, 5, "never crossing means the scan is extensive");
        let scan = extract_distance(5, 0.1, 10, vec![2.0, 2.0], false);
        assert_eq!(scan.distance, 0);
        assert_eq!(qecc_distance(&[], 4, 0.0, 0).unwrap_err(), CodesError::EmptyEnsemble);
    }

    #[test]
    fn subsystem_profile_consistency() {
        let spec = CircuitSpec::um_u(8, 0.3, 6, 4, 91);
        let (tab, r) = purified_tableau(&spec, 3);
        let basis = purification_ranks(&r, false).final_basis;
        let profile = subsystem_profile(&tab, &basis, 8);
        let r_sites: Vec<usize> = (8..16).collect();
        assert_eq!(profile.i_ar[0], 0);
        assert_eq!(profile.i_ar[8], 2 * profile.s_q as i64);
        for l_a in 0..=8usize {
            let a: Vec<usize> = (0..l_a).collect();
            assert_eq!(profile.s_a[l_a], tab.entropy(&a));
            assert_eq!(profile.i_ar[l_a], tab.mutual_information(&a, &r_sites));
            assert!(profile.neg_log2_p2[l_a] <= l_a, "rank of L_A rows is at most L_A");
        }
        for w in profile.neg_log2_p2.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert_eq!(profile.neg_log2_p2[8], rank2(&basis));
    }
}
