//! Exact small-size reference engine.
//!
//! States reachable here are equal-weight superpositions of computational
//! basis strings with signs in {+1, -1}; gates permute basis labels up to
//! sign flips and composite measurements project then re-equalize. The
//! representation stores one support flag and one sign bit per basis label,
//! so every check against the production engines is exact, not statistical.
//!
//! Everything is deliberately scalar and unoptimized: this module is the
//! ground truth the bit-packed engines are validated against.

use crate::circuit::{CircuitRealization, Gate, Layer, MeasureEvent};

/// Practical cap: tables are dense over 2^l labels.
const MAX_QUBITS: usize = 16;

// ===== phase state =====

/// Equal-weight superposition with per-label sign; amplitude of label `n` is
/// `support[n] ? (-1)^sign[n] / sqrt(support size) : 0`.
#[derive(Clone, PartialEq, Eq)]
pub struct PhaseState {
    l: usize,
    support: Vec<bool>,
    sign: Vec<bool>,
}

impl PhaseState {
    /// Every site in the equal superposition of both basis values.
    pub fn plus_x(l: usize) -> Self {
        assert!(l <= MAX_QUBITS);
        PhaseState {
            l,
            support: vec![true; 1 << l],
            sign: vec![false; 1 << l],
        }
    }

    /// Equal superposition of all even-parity strings (the sector the
    /// three-site family dynamics preserves).
    pub fn parity_sector(l: usize) -> Self {
        assert!(l <= MAX_QUBITS);
        let support = (0..1u32 << l)
            .map(|n| n.count_ones() % 2 == 0)
            .collect();
        PhaseState {
            l,
            support,
            sign: vec![false; 1 << l],
        }
    }

    /// Single basis label (test helper).
    pub fn basis_state(l: usize, label: usize) -> Self {
        assert!(l <= MAX_QUBITS && label < 1 << l);
        let mut support = vec![false; 1 << l];
        support[label] = true;
        PhaseState {
            l,
            support,
            sign: vec![false; 1 << l],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.l
    }

    pub fn support_size(&self) -> usize {
        self.support.iter().filter(|&&s| s).count()
    }

    pub fn supported(&self, label: usize) -> bool {
        self.support[label]
    }

    /// Sign of a supported label; meaningless otherwise.
    pub fn label_sign(&self, label: usize) -> bool {
        self.sign[label]
    }

    fn swap_labels(&mut self, a: usize, b: usize) {
        self.support.swap(a, b);
        self.sign.swap(a, b);
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        let dim = 1usize << self.l;
        match *gate {
            Gate::Cnot { control, target } => {
                let (c, t) = (1usize << control, 1usize << target);
                for n in 0..dim {
                    if n & c != 0 && n & t == 0 {
                        self.swap_labels(n, n | t);
                    }
                }
            }
            Gate::Cz { a, b } => {
                let (a, b) = (1usize << a, 1usize << b);
                for n in 0..dim {
                    if n & a != 0 && n & b != 0 && self.support[n] {
                        self.sign[n] = !self.sign[n];
                    }
                }
            }
            Gate::Cnn {
                control,
                targets: (t1, t2),
            } => {
                let c = 1usize << control;
                let m = (1usize << t1) | (1usize << t2);
                let t1 = 1usize << t1;
                for n in 0..dim {
                    // visit each swapped pair once
                    if n & c != 0 && n & t1 == 0 {
                        self.swap_labels(n, n ^ m);
                    }
                }
            }
        }
    }

    /// Projects Z at `site`, preferring outcome 0 when both restrictions are
    /// populated; returns the realized outcome bit.
    fn project_z_forced(&mut self, site: usize) -> bool {
        let bit = 1usize << site;
        let zero_populated = (0..self.support.len()).any(|n| self.support[n] && n & bit == 0);
        let outcome = !zero_populated;
        let keep = if outcome { bit } else { 0 };
        for n in 0..self.support.len() {
            if n & bit != keep {
                self.support[n] = false;
                self.sign[n] = false;
            }
        }
        outcome
    }

    /// Single-site composite measurement: project, then restore the equal
    /// superposition at the site. Sign rule: the site-1 branch inherits an
    /// extra minus for outcome 1.
    pub fn composite_measure(&mut self, site: usize) -> bool {
        let outcome = self.project_z_forced(site);
        let bit = 1usize << site;
        for n in 0..self.support.len() {
            if n & bit == 0 {
                let src = if outcome { n | bit } else { n };
                if self.support[src] {
                    let s = self.sign[src];
                    // branch with site bit = 0 keeps the sign,
                    // branch with site bit = 1 picks up (-1)^outcome
                    self.support[n] = true;
                    self.sign[n] = s;
                    self.support[n | bit] = true;
                    self.sign[n | bit] = s ^ outcome;
                } else {
                    self.support[n] = false;
                    self.support[n | bit] = false;
                    self.sign[n] = false;
                    self.sign[n | bit] = false;
                }
            }
        }
        outcome
    }

    /// Two-site composite measurement on the bond (left, right): project one
    /// side, then rotate within the pair-parity sectors. Inputs with left bit
    /// 1 send their left-bit-1 image to minus.
    pub fn composite_measure_pair(&mut self, left: usize, right: usize, project_left: bool) -> bool {
        let outcome = self.project_z_forced(if project_left { left } else { right });
        let (lb, rb) = (1usize << left, 1usize << right);
        let old_support = std::mem::take(&mut self.support);
        let old_sign = std::mem::take(&mut self.sign);
        self.support = vec![false; old_support.len()];
        self.sign = vec![false; old_support.len()];
        for n in 0..old_support.len() {
            if !old_support[n] {
                continue;
            }
            let lambda = n & lb != 0;
            let parity = lambda ^ (n & rb != 0);
            let base = n & !(lb | rb);
            let m0 = base | if parity { rb } else { 0 };
            let m1 = base | lb | if parity { 0 } else { rb };
            debug_assert!(!self.support[m0] && !self.support[m1]);
            self.support[m0] = true;
            self.sign[m0] = old_sign[n];
            self.support[m1] = true;
            self.sign[m1] = old_sign[n] ^ lambda;
        }
        outcome
    }

    pub fn apply_layer(&mut self, layer: &Layer) {
        match layer {
            Layer::Unitary(gates) => {
                for g in gates {
                    self.apply_gate(g);
                }
            }
            Layer::Measure(events) => {
                for e in events {
                    match *e {
                        MeasureEvent::Site(s) => {
                            self.composite_measure(s);
                        }
                        MeasureEvent::Pair {
                            left,
                            right,
                            project_left,
                        } => {
                            self.composite_measure_pair(left, right, project_left);
                        }
                    }
                }
            }
        }
    }

    pub fn apply_realization(&mut self, r: &CircuitRealization) {
        for layer in r.layers() {
            self.apply_layer(layer);
        }
    }

    /// Whether the Pauli operator `(-1)^minus * prod_q sigma(x_q, z_q)`
    /// (sigma(1,1) = Y) fixes this state. Exact check over every supported
    /// label; the engine-level state comparison runs through this.
    pub fn is_stabilized_by(&self, x_mask: usize, z_mask: usize, minus: bool) -> bool {
        for n in 0..self.support.len() {
            if !self.support[n] {
                continue;
            }
            let m = n ^ x_mask;
            if !self.support[m] {
                return false;
            }
            // i-exponent of the per-qubit factors acting on label n
            let mut e: u32 = 0;
            for q in 0..self.l {
                let (x, z, b) = ((x_mask >> q) & 1, (z_mask >> q) & 1, ((n >> q) & 1) as u32);
                if z == 1 {
                    e += if x == 1 { 1 + 2 * b } else { 2 * b };
                }
            }
            e += 2 * minus as u32;
            if e % 2 == 1 {
                return false; // imaginary amplitude cannot fix a real state
            }
            let flip = (e / 2) % 2 == 1;
            if self.sign[n] ^ flip != self.sign[m] {
                return false;
            }
        }
        true
    }

    /// Global parity of every supported label, if uniform.
    pub fn uniform_parity(&self) -> Option<bool> {
        let mut parity = None;
        for n in 0..self.support.len() {
            if self.support[n] {
                let p = (n as u32).count_ones() % 2 == 1;
                match parity {
                    None => parity = Some(p),
                    Some(q) if q != p => return None,
                    _ => {}
                }
            }
        }
        parity
    }
}

impl std::fmt::Debug for PhaseState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PhaseState(l={}, support={{", self.l)?;
        for n in 0..self.support.len() {
            if self.support[n] {
                write!(f, "{}{:0w$b} ", if self.sign[n] { '-' } else { '+' }, n, w = self.l)?;
            }
        }
        write!(f, "}})")
    }
}

// ===== purity =====

/// Exact dyadic rational `num / 2^log2_den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicPurity {
    pub num: u128,
    pub log2_den: u32,
}

impl DyadicPurity {
    pub fn as_f64(&self) -> f64 {
        self.num as f64 / (self.log2_den as f64).exp2()
    }

    /// `-log2(purity)` when the purity is an exact power of two.
    pub fn exact_neg_log2(&self) -> Option<u32> {
        if self.num.is_power_of_two() {
            let k = self.num.trailing_zeros();
            (k <= self.log2_den).then_some(self.log2_den - k)
        } else {
            None
        }
    }
}

/// Second moment of the reduced state on `region` (site indices), via the
/// swap-operator double sum evaluated exactly in integers.
pub fn purity_swap(state: &PhaseState, region: &[usize]) -> DyadicPurity {
    let l = state.l;
    assert!(region.iter().all(|&s| s < l));
    assert!(region.len() <= 12, "region too large for dense reduced state");
    let a_sites = region;
    let b_sites: Vec<usize> = (0..l).filter(|s| !a_sites.contains(s)).collect();
    let gather = |n: usize, sites: &[usize]| -> usize {
        sites
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &s)| acc | (((n >> s) & 1) << k))
    };
    let da = 1usize << a_sites.len();
    // rho[a1 * da + a2] accumulates sum over b of s(a1,b) s(a2,b)
    let mut rho = vec![0i64; da * da];
    let mut by_b: Vec<Vec<(usize, i64)>> = vec![Vec::new(); 1 << b_sites.len()];
    let mut support_size = 0u64;
    for n in 0..state.support.len() {
        if state.support[n] {
            support_size += 1;
            let sgn = if state.sign[n] { -1 } else { 1 };
            by_b[gather(n, &b_sites)].push((gather(n, a_sites), sgn));
        }
    }
    for group in &by_b {
        for &(a1, s1) in group {
            for &(a2, s2) in group {
                rho[a1 * da + a2] += s1 * s2;
            }
        }
    }
    assert!(support_size.is_power_of_two(), "support must stay a power of two");
    let num: u128 = rho.iter().map(|&t| (t * t) as u128).sum::<u128>();
    let log2_den = 2 * support_size.trailing_zeros();
    DyadicPurity { num, log2_den }
}

/// Exact entanglement entropy in bits; states here always give an integer.
pub fn entropy_exact(state: &PhaseState, region: &[usize]) -> u32 {
    purity_swap(state, region)
        .exact_neg_log2()
        .expect("purity of a sign-superposition state must be a power of two")
}

// ===== exhaustive pair counting =====

/// Counts from evolving every (hX, hY) difference-string split under the
/// particle rules, hX supported on the region, hY on its complement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCounts {
    /// Alive configs after each evolved step; index 0 is before evolution.
    pub n: Vec<u64>,
    /// Alive configs whose hX is currently empty, same indexing.
    pub n1: Vec<u64>,
    /// Alive at the end with X annihilated no later than Y.
    pub n_x: u64,
    /// Alive at the end with Y annihilated no later than X.
    pub n_y: u64,
    /// Alive at the end with both annihilated in the same layer.
    pub n_xy: u64,
    pub total: u64,
}

struct PairConfig {
    hx: u64,
    hy: u64,
    alive: bool,
    x_extinct_at: Option<u32>,
    y_extinct_at: Option<u32>,
}

impl PairConfig {
    fn new(hx: u64, hy: u64) -> Self {
        PairConfig {
            hx,
            hy,
            alive: true,
            x_extinct_at: (hx == 0).then_some(0),
            y_extinct_at: (hy == 0).then_some(0),
        }
    }

    /// Death check on pre-gate occupancy, then the linear update.
    fn apply_gate(&mut self, gate: &Gate) {
        let support_mask: u64 = gate.support().map(|s| 1u64 << s).sum();
        if self.alive && self.hx & support_mask != 0 && self.hy & support_mask != 0 {
            self.alive = false;
        }
        match *gate {
            Gate::Cnot { control, target } => {
                for h in [&mut self.hx, &mut self.hy] {
                    *h ^= ((*h >> control) & 1) << target;
                }
            }
            Gate::Cz { .. } => {}
            Gate::Cnn {
                control,
                targets: (t1, t2),
            } => {
                for h in [&mut self.hx, &mut self.hy] {
                    let c = (*h >> control) & 1;
                    *h ^= (c << t1) | (c << t2);
                }
            }
        }
    }

    fn apply_layer(&mut self, layer: &Layer, layer_index: u32) {
        match layer {
            Layer::Unitary(gates) => {
                for g in gates {
                    self.apply_gate(g);
                }
            }
            Layer::Measure(events) => {
                for e in events {
                    match *e {
                        MeasureEvent::Site(s) => {
                            self.hx &= !(1 << s);
                            self.hy &= !(1 << s);
                        }
                        MeasureEvent::Pair { .. } => {
                            panic!("two-site composites have no single-bit particle dual")
                        }
                    }
                }
                if self.hx == 0 && self.x_extinct_at.is_none() {
                    self.x_extinct_at = Some(layer_index);
                }
                if self.hy == 0 && self.y_extinct_at.is_none() {
                    self.y_extinct_at = Some(layer_index);
                }
            }
        }
    }
}

/// Evolves all 2^l splits through the realization's steps in reversed order
/// (the dual dynamics direction) and tallies survival under the annihilation
/// model: a split dies when the two species touch a common gate. This is the
/// counting the particle observables are defined by; it approximates the
/// purity (see `exhaustive_signed_pair_sum` for the exact identity) because
/// splits that meet keep a +-1 weight rather than dropping out.
pub fn exhaustive_pair_count(r: &CircuitRealization, region: &[usize]) -> PairCounts {
    let l = r.nsites;
    assert!(l <= 20, "exhaustive enumeration is exponential in L");
    assert!(region.iter().all(|&s| s < l));
    let a_sites: Vec<usize> = region.to_vec();
    let b_sites: Vec<usize> = (0..l).filter(|s| !a_sites.contains(s)).collect();
    let scatter = |idx: usize, sites: &[usize]| -> u64 {
        sites
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &s)| acc | ((((idx >> k) & 1) as u64) << s))
    };
    let mut configs: Vec<PairConfig> = Vec::with_capacity(1 << l);
    for ia in 0..1usize << a_sites.len() {
        let hx = scatter(ia, &a_sites);
        for ib in 0..1usize << b_sites.len() {
            configs.push(PairConfig::new(hx, scatter(ib, &b_sites)));
        }
    }

    let steps = r.steps.len();
    let mut n = Vec::with_capacity(steps + 1);
    let mut n1 = Vec::with_capacity(steps + 1);
    let tally = |configs: &[PairConfig]| -> (u64, u64) {
        let alive = configs.iter().filter(|c| c.alive).count() as u64;
        let empty_x = configs.iter().filter(|c| c.alive && c.hx == 0).count() as u64;
        (alive, empty_x)
    };
    let (a0, e0) = tally(&configs);
    n.push(a0);
    n1.push(e0);

    let mut layer_index = 1u32;
    for step in r.steps.iter().rev() {
        for layer in step.iter().rev() {
            for c in configs.iter_mut() {
                c.apply_layer(layer, layer_index);
            }
            layer_index += 1;
        }
        let (a, e) = tally(&configs);
        n.push(a);
        n1.push(e);
    }

    let mut n_x = 0;
    let mut n_y = 0;
    let mut n_xy = 0;
    for c in &configs {
        if !c.alive {
            continue;
        }
        match (c.x_extinct_at, c.y_extinct_at) {
            (Some(tx), Some(ty)) => {
                if tx <= ty {
                    n_x += 1;
                }
                if ty <= tx {
                    n_y += 1;
                }
                if tx == ty {
                    n_xy += 1;
                }
            }
            (Some(_), None) => n_x += 1,
            (None, Some(_)) => n_y += 1,
            (None, None) => {}
        }
    }
    PairCounts {
        n,
        n1,
        n_x,
        n_y,
        n_xy,
        total: 1 << l,
    }
}

/// Exact second-moment identity for full-support states evolved from the
/// all-plus product state: the purity of the region equals the signed sum
/// over all (hX, hY) splits divided by 2^l, realization by realization.
///
/// Each split carries a +-1 weight: strings move linearly through the
/// reversed layers, measured sites clear bits, and a CZ on bond (a, b) flips
/// the weight iff the two strings straddle the bond (hX_a hY_b xor hX_b
/// hY_a) — the fourth finite difference of the CZ phase. Same-species
/// adjacency and measurement outcomes never contribute, so the sum is
/// outcome-independent.
pub fn exhaustive_signed_pair_sum(r: &CircuitRealization, region: &[usize]) -> (i64, u64) {
    let l = r.nsites;
    assert!(l <= 20, "exhaustive enumeration is exponential in L");
    assert!(region.iter().all(|&s| s < l));
    let a_sites: Vec<usize> = region.to_vec();
    let b_sites: Vec<usize> = (0..l).filter(|s| !a_sites.contains(s)).collect();
    let scatter = |idx: usize, sites: &[usize]| -> u64 {
        sites
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &s)| acc | ((((idx >> k) & 1) as u64) << s))
    };
    let mut sum: i64 = 0;
    for ia in 0..1usize << a_sites.len() {
        for ib in 0..1usize << b_sites.len() {
            let mut hx = scatter(ia, &a_sites);
            let mut hy = scatter(ib, &b_sites);
            let mut neg = false;
            for layer in r.rev_step_layers() {
                match layer {
                    Layer::Unitary(gates) => {
                        for g in gates {
                            match *g {
                                Gate::Cnot { control, target } => {
                                    hx ^= ((hx >> control) & 1) << target;
                                    hy ^= ((hy >> control) & 1) << target;
                                }
                                Gate::Cz { a, b } => {
                                    let cross = ((hx >> a) & (hy >> b)) ^ ((hx >> b) & (hy >> a));
                                    neg ^= cross & 1 == 1;
                                }
                                Gate::Cnn {
                                    control,
                                    targets: (t1, t2),
                                } => {
                                    let cx = (hx >> control) & 1;
                                    hx ^= (cx << t1) | (cx << t2);
                                    let cy = (hy >> control) & 1;
                                    hy ^= (cy << t1) | (cy << t2);
                                }
                            }
                        }
                    }
                    Layer::Measure(events) => {
                        for e in events {
                            match *e {
                                MeasureEvent::Site(s) => {
                                    hx &= !(1 << s);
                                    hy &= !(1 << s);
                                }
                                MeasureEvent::Pair { .. } => {
                                    panic!("two-site composites have no single-bit particle dual")
                                }
                            }
                        }
                    }
                }
            }
            sum += if neg { -1 } else { 1 };
        }
    }
    (sum, 1 << l)
}

// ===== tests =====

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{rng_stream, sample_realization, CircuitSpec, Family};

    #[test]
    fn plus_x_is_product() {
        let s = PhaseState::plus_x(4);
        assert_eq!(s.support_size(), 16);
        for region in [vec![0], vec![1, 3], vec![0, 1, 2]] {
            let p = purity_swap(&s, &region);
            assert_eq!(p.as_f64(), 1.0);
            assert_eq!(entropy_exact(&s, &region), 0);
        }
    }

    #[test]
    fn cz_on_plus_plus_gives_one_bit() {
        let mut s = PhaseState::plus_x(2);
        s.apply_gate(&Gate::Cz { a: 0, b: 1 });
        // phases (+, +, +, -) over labels 00,01,10,11
        for n in 0..4 {
            assert!(s.supported(n));
            assert_eq!(s.label_sign(n), n == 3);
        }
        let p = purity_swap(&s, &[0]);
        assert_eq!((p.num, p.log2_den), (8, 4));
        assert_eq!(entropy_exact(&s, &[0]), 1);
    }

    #[test]
    fn bell_pair_purity_half() {
        // CZ then composite measurement is not needed; build via labels:
        // (|00> + |11>)/sqrt(2)
        let mut s = PhaseState::basis_state(2, 0);
        s.support = vec![true, false, false, true];
        s.sign = vec![false; 4];
        assert_eq!(entropy_exact(&s, &[0]), 1);
        assert_eq!(purity_swap(&s, &[0]).as_f64(), 0.5);
        assert_eq!(entropy_exact(&s, &[0, 1]), 0);
    }

    #[test]
    fn composite_measure_fixes_plus_x() {
        let mut s = PhaseState::plus_x(3);
        let outcome = s.composite_measure(1);
        assert!(!outcome);
        assert_eq!(s, PhaseState::plus_x(3));
    }

    #[test]
    fn composite_measure_forced_outcome_one() {
        // state |1> on one qubit: projection must report 1, then re-equalize
        let mut s = PhaseState::basis_state(1, 1);
        let outcome = s.composite_measure(0);
        assert!(outcome);
        assert_eq!(s.support_size(), 2);
        // (|0> - |1>)/sqrt(2)
        assert!(!s.label_sign(0));
        assert!(s.label_sign(1));
    }

    #[test]
    fn cnot_and_cnn_permute_labels() {
        let mut s = PhaseState::basis_state(3, 0b001); // site 0 set
        s.apply_gate(&Gate::Cnot { control: 0, target: 2 });
        assert!(s.supported(0b101));
        let mut s = PhaseState::basis_state(3, 0b001);
        s.apply_gate(&Gate::Cnn { control: 0, targets: (1, 2) });
        assert!(s.supported(0b111));
        let mut s = PhaseState::basis_state(3, 0b110); // control 0 clear
        s.apply_gate(&Gate::Cnn { control: 0, targets: (1, 2) });
        assert!(s.supported(0b110));
    }

    #[test]
    fn pair_composite_on_plus_plus() {
        // projecting the left site reproduces |++>: the rotation's Hadamard
        // leg sits on the left input
        let mut s = PhaseState::plus_x(2);
        assert!(!s.composite_measure_pair(0, 1, true));
        assert_eq!(s, PhaseState::plus_x(2));
        // projecting the right site entangles the pair by one bit:
        // (|00> - |10> + |01> + |11>)/2 in (left, right) order
        let mut s = PhaseState::plus_x(2);
        assert!(!s.composite_measure_pair(0, 1, false));
        assert_eq!(s.support_size(), 4);
        for n in 0..4 {
            assert_eq!(s.label_sign(n), n == 1);
        }
        assert_eq!(entropy_exact(&s, &[0]), 1);
    }

    #[test]
    fn pair_composite_preserves_parity_sector() {
        let mut s = PhaseState::parity_sector(4);
        assert_eq!(s.support_size(), 8);
        assert_eq!(s.uniform_parity(), Some(false));
        s.apply_gate(&Gate::Cnn { control: 0, targets: (1, 2) });
        s.composite_measure_pair(1, 2, false);
        s.apply_gate(&Gate::Cz { a: 2, b: 3 });
        s.composite_measure_pair(3, 0, true);
        assert_eq!(s.uniform_parity(), Some(false));
        assert!(s.support_size().is_power_of_two());
    }

    #[test]
    fn purity_matches_reduced_state_norm_on_random_circuit() {
        let spec = CircuitSpec::new(Family::Entangle, 8, 0.2, 4, 17);
        let r = sample_realization(&spec, rng_stream(17, 0));
        let mut s = PhaseState::plus_x(8);
        s.apply_realization(&r);
        assert!(s.support_size().is_power_of_two());
        for cut in [1, 2, 4] {
            let region: Vec<usize> = (0..cut).collect();
            let p = purity_swap(&s, &region);
            assert!(p.as_f64() > 0.0 && p.as_f64() <= 1.0);
            let complement: Vec<usize> = (cut..8).collect();
            // pure global state: both halves share the spectrum
            assert_eq!(p, purity_swap(&s, &complement));
            entropy_exact(&s, &region);
        }
    }

    #[test]
    fn pauli_stabilizer_checks() {
        let s = PhaseState::plus_x(2);
        assert!(s.is_stabilized_by(0b01, 0, false)); // X_0
        assert!(!s.is_stabilized_by(0, 0b01, false)); // Z_0
        assert!(!s.is_stabilized_by(0b01, 0, true)); // -X_0
        // Bell pair: +XX, +ZZ, -YY
        let mut b = PhaseState::basis_state(2, 0);
        b.support = vec![true, false, false, true];
        b.sign = vec![false; 4];
        assert!(b.is_stabilized_by(0b11, 0, false));
        assert!(b.is_stabilized_by(0, 0b11, false));
        assert!(b.is_stabilized_by(0b11, 0b11, true));
        assert!(!b.is_stabilized_by(0b11, 0b11, false));
        // even-parity sector: global Z and global X strings, plus sign
        let g = PhaseState::parity_sector(4);
        assert!(g.is_stabilized_by(0, 0b1111, false));
        assert!(g.is_stabilized_by(0b1111, 0, false));
        assert!(!g.is_stabilized_by(0, 0b0001, false));
    }

    #[test]
    fn pair_count_initial_is_full() {
        let spec = CircuitSpec::new(Family::Entangle, 6, 0.3, 0, 5);
        let r = sample_realization(&spec, rng_stream(5, 0));
        let counts = exhaustive_pair_count(&r, &[0, 1, 2]);
        assert_eq!(counts.n, vec![64]);
        assert_eq!(counts.total, 64);
        // only hx == 0 splits: 2^3 hy choices
        assert_eq!(counts.n1, vec![8]);
    }

    #[test]
    fn pair_count_full_measurement_keeps_everyone_alive() {
        // reversed dynamics meets the measure layer first: all difference
        // strings are wiped before any gate sees them
        let spec = CircuitSpec::new(Family::Entangle, 4, 1.0, 2, 5);
        let r = sample_realization(&spec, rng_stream(5, 0));
        let counts = exhaustive_pair_count(&r, &[0, 1]);
        assert_eq!(counts.n, vec![16, 16, 16]);
        // initially-empty species are extinct at time 0, everything else is
        // wiped together in the first reversed layer: ties are the 3 x 3
        // doubly-occupied splits plus the empty-empty one
        assert_eq!(counts.n_xy, 10);
        assert_eq!(counts.n_x, 13);
        assert_eq!(counts.n_y, 13);
        assert_eq!(counts.n_x + counts.n_y - counts.n_xy, 16);
        // consistency: purity of the final state is 1 at p = 1
        let mut s = PhaseState::plus_x(4);
        s.apply_realization(&r);
        assert_eq!(purity_swap(&s, &[0, 1]).as_f64(), 1.0);
        assert_eq!(exhaustive_signed_pair_sum(&r, &[0, 1]), (16, 16));
    }

    #[test]
    fn signed_pair_sum_equals_purity_exactly() {
        for seed in 1..=6u64 {
            for (t, p) in [(1usize, 0.25), (2, 0.15), (3, 0.0), (5, 0.6)] {
                let spec = CircuitSpec::new(Family::Entangle, 6, p, t, seed);
                let r = sample_realization(&spec, rng_stream(seed, 1));
                let mut s = PhaseState::plus_x(6);
                s.apply_realization(&r);
                assert_eq!(s.support_size(), 64, "these states keep full support");
                for region in [vec![0usize, 1, 2], vec![1, 4], vec![0, 1, 2, 3, 4]] {
                    let (signed, total) = exhaustive_signed_pair_sum(&r, &region);
                    let pur = purity_swap(&s, &region);
                    // num / 2^(2L) == signed / 2^L
                    assert!(signed > 0);
                    assert_eq!(
                        pur.num as i128,
                        signed as i128 * total as i128,
                        "seed {seed} t {t} p {p} region {region:?}"
                    );
                    assert_eq!(pur.log2_den, 12);
                }
            }
        }
    }

    #[test]
    fn pair_count_invariants() {
        let spec = CircuitSpec::new(Family::Entangle, 6, 0.15, 4, 9);
        let r = sample_realization(&spec, rng_stream(9, 3));
        let c = exhaustive_pair_count(&r, &[0, 1, 2]);
        for w in c.n.windows(2) {
            assert!(w[1] <= w[0], "alive count must be non-increasing");
        }
        for (a, b) in c.n1.iter().zip(c.n.iter()) {
            assert!(a <= b);
        }
        assert!(c.n_x + c.n_y - c.n_xy <= *c.n.last().unwrap());
    }
}
