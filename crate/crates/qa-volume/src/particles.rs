//! Classical particle-model engines.
//!
//! Difference strings evolve linearly through the circuit layers taken in
//! reversed order (`CircuitRealization::rev_step_layers`): CNOT xors the
//! control bit into the target, the three-site gate xors the control into
//! both targets, phase gates move nothing, and a composite measurement
//! clears its site in every tracked vector. The empty string is an absorbing
//! fixed point.
//!
//! Engines:
//! - `TwoSpeciesState`: one (hX, hY) split, scalar; the reference the batch
//!   engine is validated against.
//! - `ConfigBatch`: many splits in parallel, one bit lane per config.
//! - `BasisEnsemble`: a basis of single-species strings in site-major bit
//!   planes, with rank-style elimination against forbidden site ranges.
//! - `rwre_run`: the end-point random-walk-in-random-environment model.

use std::ops::Range;

use rand_chacha::ChaCha8Rng;

use crate::circuit::{CircuitRealization, Gate, Layer, MeasureEvent};
use crate::gf2::{rank2, BitMatrix, BitVec};
use rand::Rng;

fn gate_support_mask(gate: &Gate, v: &mut BitVec) {
    v.words_mut().fill(0);
    for s in gate.support() {
        v.set(s);
    }
}

// ===== scalar reference =====

/// One (hX, hY) split evolved through shared layers. Dies (permanently) the
/// first time a gate's support holds sites of both species, checked on the
/// pre-gate occupancies.
#[derive(Clone, Debug)]
pub struct TwoSpeciesState {
    pub hx: BitVec,
    pub hy: BitVec,
    pub alive: bool,
    pub died_at: Option<u32>,
    pub x_extinct_at: Option<u32>,
    pub y_extinct_at: Option<u32>,
}

impl TwoSpeciesState {
    pub fn new(hx: BitVec, hy: BitVec) -> Self {
        assert_eq!(hx.len(), hy.len());
        let x0 = hx.is_zero().then_some(0);
        let y0 = hy.is_zero().then_some(0);
        TwoSpeciesState {
            hx,
            hy,
            alive: true,
            died_at: None,
            x_extinct_at: x0,
            y_extinct_at: y0,
        }
    }

    pub fn apply_layer(&mut self, layer: &Layer, time: u32) {
        match layer {
            Layer::Unitary(gates) => {
                let mut mask = BitVec::zeros(self.hx.len());
                for gate in gates {
                    gate_support_mask(gate, &mut mask);
                    if self.alive
                        && self.hx.intersects_mask(mask.words())
                        && self.hy.intersects_mask(mask.words())
                    {
                        self.alive = false;
                        self.died_at = Some(time);
                    }
                    for h in [&mut self.hx, &mut self.hy] {
                        match *gate {
                            Gate::Cnot { control, target } => {
                                if h.get(control) {
                                    h.flip(target);
                                }
                            }
                            Gate::Cz { .. } => {}
                            Gate::Cnn {
                                control,
                                targets: (t1, t2),
                            } => {
                                if h.get(control) {
                                    h.flip(t1);
                                    h.flip(t2);
                                }
                            }
                        }
                    }
                }
            }
            Layer::Measure(events) => {
                for e in events {
                    match *e {
                        MeasureEvent::Site(s) => {
                            self.hx.clear(s);
                            self.hy.clear(s);
                        }
                        MeasureEvent::Pair { .. } => {
                            panic!("two-site composites have no single-bit particle dual")
                        }
                    }
                }
                if self.hx.is_zero() && self.x_extinct_at.is_none() {
                    self.x_extinct_at = Some(time);
                }
                if self.hy.is_zero() && self.y_extinct_at.is_none() {
                    self.y_extinct_at = Some(time);
                }
            }
        }
    }
}

// ===== batched configurations =====

/// Many (hX, hY) splits evolved in lockstep, one bit lane per config:
/// site s's occupancies live in words [s*w, (s+1)*w).
pub struct ConfigBatch {
    nsites: usize,
    nconfigs: usize,
    w: usize,
    hx: Vec<u64>,
    hy: Vec<u64>,
    alive: Vec<u64>,
}

impl ConfigBatch {
    pub fn from_configs(nsites: usize, configs: &[(BitVec, BitVec)]) -> Self {
        let nconfigs = configs.len();
        let w = nconfigs.div_ceil(64);
        let mut batch = ConfigBatch {
            nsites,
            nconfigs,
            w,
            hx: vec![0; nsites * w],
            hy: vec![0; nsites * w],
            alive: vec![0; w],
        };
        for (i, (hx, hy)) in configs.iter().enumerate() {
            assert!(hx.len() == nsites && hy.len() == nsites);
            batch.alive[i / 64] |= 1 << (i % 64);
            for s in hx.ones() {
                batch.hx[s * w + i / 64] |= 1 << (i % 64);
            }
            for s in hy.ones() {
                batch.hy[s * w + i / 64] |= 1 << (i % 64);
            }
        }
        batch
    }

    /// Uniform splits: every lane draws each site of `a_sites` into hX and
    /// each remaining site into hY independently with probability 1/2.
    pub fn sample(nsites: usize, a_sites: &[usize], nconfigs: usize, rng: &mut ChaCha8Rng) -> Self {
        let w = nconfigs.div_ceil(64);
        let mut batch = ConfigBatch {
            nsites,
            nconfigs,
            w,
            hx: vec![0; nsites * w],
            hy: vec![0; nsites * w],
            alive: vec![0; w],
        };
        let pad = Self::pad_mask(nconfigs, w);
        for k in 0..w {
            batch.alive[k] = pad[k];
        }
        let in_a: Vec<bool> = {
            let mut v = vec![false; nsites];
            for &s in a_sites {
                v[s] = true;
            }
            v
        };
        for s in 0..nsites {
            let plane = if in_a[s] { &mut batch.hx } else { &mut batch.hy };
            for k in 0..w {
                plane[s * w + k] = rng.random::<u64>() & pad[k];
            }
        }
        batch
    }

    fn pad_mask(nconfigs: usize, w: usize) -> Vec<u64> {
        let mut pad = vec![!0u64; w];
        if nconfigs % 64 != 0 {
            pad[w - 1] = !0u64 >> (64 - nconfigs % 64);
        }
        pad
    }

    pub fn num_configs(&self) -> u64 {
        self.nconfigs as u64
    }

    pub fn apply_layer(&mut self, layer: &Layer) {
        let w = self.w;
        match layer {
            Layer::Unitary(gates) => {
                let mut accx = vec![0u64; w];
                let mut accy = vec![0u64; w];
                for gate in gates {
                    accx.fill(0);
                    accy.fill(0);
                    for s in gate.support() {
                        for k in 0..w {
                            accx[k] |= self.hx[s * w + k];
                            accy[k] |= self.hy[s * w + k];
                        }
                    }
                    for k in 0..w {
                        self.alive[k] &= !(accx[k] & accy[k]);
                    }
                    match *gate {
                        Gate::Cnot { control, target } => {
                            for plane in [&mut self.hx, &mut self.hy] {
                                for k in 0..w {
                                    let c = plane[control * w + k];
                                    plane[target * w + k] ^= c;
                                }
                            }
                        }
                        Gate::Cz { .. } => {}
                        Gate::Cnn {
                            control,
                            targets: (t1, t2),
                        } => {
                            for plane in [&mut self.hx, &mut self.hy] {
                                for k in 0..w {
                                    let c = plane[control * w + k];
                                    plane[t1 * w + k] ^= c;
                                    plane[t2 * w + k] ^= c;
                                }
                            }
                        }
                    }
                }
            }
            Layer::Measure(events) => {
                for e in events {
                    match *e {
                        MeasureEvent::Site(s) => {
                            self.hx[s * w..(s + 1) * w].fill(0);
                            self.hy[s * w..(s + 1) * w].fill(0);
                        }
                        MeasureEvent::Pair { .. } => {
                            panic!("two-site composites have no single-bit particle dual")
                        }
                    }
                }
            }
        }
    }

    pub fn alive_count(&self) -> u64 {
        self.alive.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn empty_plane_mask(&self, plane: &[u64]) -> Vec<u64> {
        let mut occupied = vec![0u64; self.w];
        for s in 0..self.nsites {
            for k in 0..self.w {
                occupied[k] |= plane[s * self.w + k];
            }
        }
        occupied.iter().map(|o| !o).collect()
    }

    /// Alive lanes whose X string is (currently and hence forever) empty.
    pub fn alive_with_empty_x(&self) -> u64 {
        let empty = self.empty_plane_mask(&self.hx);
        self.alive
            .iter()
            .zip(&empty)
            .map(|(a, e)| (a & e).count_ones() as u64)
            .sum()
    }

    pub fn alive_with_empty_y(&self) -> u64 {
        let empty = self.empty_plane_mask(&self.hy);
        self.alive
            .iter()
            .zip(&empty)
            .map(|(a, e)| (a & e).count_ones() as u64)
            .sum()
    }

    /// Test accessor: lane i as a scalar state (alive flag plus strings).
    pub fn lane(&self, i: usize) -> (BitVec, BitVec, bool) {
        assert!(i < self.nconfigs);
        let (mut hx, mut hy) = (BitVec::zeros(self.nsites), BitVec::zeros(self.nsites));
        for s in 0..self.nsites {
            if self.hx[s * self.w + i / 64] >> (i % 64) & 1 == 1 {
                hx.set(s);
            }
            if self.hy[s * self.w + i / 64] >> (i % 64) & 1 == 1 {
                hy.set(s);
            }
        }
        (hx, hy, self.alive[i / 64] >> (i % 64) & 1 == 1)
    }
}

/// Survival counts per step (index 0 = before evolution) for one batch of
/// sampled splits driven through one realization.
#[derive(Clone, Debug)]
pub struct SurvivalSeries {
    /// Lanes still alive after each step.
    pub alive: Vec<u64>,
    /// Alive lanes with the X species annihilated, same indexing.
    pub n1: Vec<u64>,
    pub total: u64,
}

impl SurvivalSeries {
    /// First step at which no lane survives, if the sample ran dry.
    pub fn exhausted_at(&self) -> Option<usize> {
        self.alive.iter().position(|&a| a == 0)
    }
}

/// Monte Carlo estimate of the never-meet fraction: `nconfigs` uniform
/// splits across the cut, all driven through the same reversed layers.
pub fn sample_p(
    r: &CircuitRealization,
    a_sites: &[usize],
    nconfigs: usize,
    rng: &mut ChaCha8Rng,
) -> SurvivalSeries {
    let mut batch = ConfigBatch::sample(r.nsites, a_sites, nconfigs, rng);
    let mut alive = vec![batch.alive_count()];
    let mut n1 = vec![batch.alive_with_empty_x()];
    for step in r.steps.iter().rev() {
        for layer in step.iter().rev() {
            batch.apply_layer(layer);
        }
        alive.push(batch.alive_count());
        n1.push(batch.alive_with_empty_x());
    }
    SurvivalSeries {
        alive,
        n1,
        total: nconfigs as u64,
    }
}

/// Final-time survival survey over a sweep of cut positions: for each cut
/// L_A, the alive count, the alive-with-X-gone count (the entropy estimator),
/// and the alive-with-Y-gone count.
#[derive(Clone, Debug)]
pub struct CutSurvey {
    pub cuts: Vec<usize>,
    pub alive: Vec<u64>,
    pub x_gone: Vec<u64>,
    pub y_gone: Vec<u64>,
    pub total: u64,
}

pub fn survey_cuts(
    r: &CircuitRealization,
    cuts: &[usize],
    nconfigs: usize,
    rng: &mut ChaCha8Rng,
) -> CutSurvey {
    let mut survey = CutSurvey {
        cuts: cuts.to_vec(),
        alive: Vec::with_capacity(cuts.len()),
        x_gone: Vec::with_capacity(cuts.len()),
        y_gone: Vec::with_capacity(cuts.len()),
        total: nconfigs as u64,
    };
    for &cut in cuts {
        let a_sites: Vec<usize> = (0..cut).collect();
        let mut batch = ConfigBatch::sample(r.nsites, &a_sites, nconfigs, rng);
        for layer in r.rev_step_layers() {
            batch.apply_layer(layer);
        }
        survey.alive.push(batch.alive_count());
        survey.x_gone.push(batch.alive_with_empty_x());
        survey.y_gone.push(batch.alive_with_empty_y());
    }
    survey
}

// ===== basis ensembles =====

/// A set of single-species strings stored site-major (site s's words hold
/// one bit per basis row), evolved linearly and eliminated in place against
/// forbidden site ranges: each elimination removes one independent row
/// direction, and eliminated rows are zeroed so they never resurface.
pub struct BasisEnsemble {
    nsites: usize,
    nrows: usize,
    wr: usize,
    cols: Vec<u64>,
    eliminated: usize,
}

impl BasisEnsemble {
    /// Row k is the unit string occupying `row_sites[k]`.
    pub fn unit_rows(nsites: usize, row_sites: &[usize]) -> Self {
        let mut b = Self::empty(nsites, row_sites.len());
        for (k, &s) in row_sites.iter().enumerate() {
            assert!(s < nsites);
            b.cols[s * b.wr + k / 64] |= 1 << (k % 64);
        }
        b
    }

    /// Arbitrary rows (test constructor).
    pub fn from_rows(nsites: usize, rows: &[BitVec]) -> Self {
        let mut b = Self::empty(nsites, rows.len());
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), nsites);
            for s in row.ones() {
                b.cols[s * b.wr + k / 64] |= 1 << (k % 64);
            }
        }
        b
    }

    fn empty(nsites: usize, nrows: usize) -> Self {
        let wr = nrows.div_ceil(64).max(1);
        BasisEnsemble {
            nsites,
            nrows,
            wr,
            cols: vec![0; nsites * wr],
            eliminated: 0,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.nrows
    }

    pub fn eliminated(&self) -> usize {
        self.eliminated
    }

    #[inline]
    fn col(&self, s: usize) -> &[u64] {
        &self.cols[s * self.wr..(s + 1) * self.wr]
    }

    pub fn apply_layer(&mut self, layer: &Layer) {
        let wr = self.wr;
        match layer {
            Layer::Unitary(gates) => {
                for gate in gates {
                    match *gate {
                        Gate::Cnot { control, target } => {
                            for k in 0..wr {
                                let c = self.cols[control * wr + k];
                                self.cols[target * wr + k] ^= c;
                            }
                        }
                        Gate::Cz { .. } => {}
                        Gate::Cnn {
                            control,
                            targets: (t1, t2),
                        } => {
                            for k in 0..wr {
                                let c = self.cols[control * wr + k];
                                self.cols[t1 * wr + k] ^= c;
                                self.cols[t2 * wr + k] ^= c;
                            }
                        }
                    }
                }
            }
            Layer::Measure(events) => {
                for e in events {
                    match *e {
                        MeasureEvent::Site(s) => self.cols[s * wr..(s + 1) * wr].fill(0),
                        MeasureEvent::Pair { .. } => {
                            panic!("two-site composites have no single-bit particle dual")
                        }
                    }
                }
            }
        }
    }

    /// Removes one independent row direction per occupied site in the range,
    /// exactly as a window-restricted elimination: the first row occupying
    /// the site is xored into every other row occupying it, then zeroed.
    /// Returns the number of rows eliminated.
    pub fn eliminate_in_range(&mut self, range: Range<usize>) -> usize {
        let wr = self.wr;
        let mut newly = 0;
        for c in range {
            let colw: Vec<u64> = self.col(c).to_vec();
            let Some(p) = colw
                .iter()
                .enumerate()
                .find_map(|(k, &word)| (word != 0).then(|| k * 64 + word.trailing_zeros() as usize))
            else {
                continue;
            };
            let mut tmask = colw;
            tmask[p / 64] &= !(1u64 << (p % 64));
            // xor the pivot row into every target row, then zero the pivot
            for s in 0..self.nsites {
                if self.cols[s * wr + p / 64] >> (p % 64) & 1 == 1 {
                    let col = &mut self.cols[s * wr..(s + 1) * wr];
                    for k in 0..wr {
                        col[k] ^= tmask[k];
                    }
                    col[p / 64] &= !(1u64 << (p % 64));
                }
            }
            self.eliminated += 1;
            newly += 1;
        }
        newly
    }

    /// First site whose column is occupied by any row.
    pub fn leftmost_occupied(&self) -> Option<usize> {
        (0..self.nsites).find(|&s| self.col(s).iter().any(|&w| w != 0))
    }

    pub fn all_rows_empty(&self) -> bool {
        self.cols.iter().all(|&w| w == 0)
    }

    /// GF(2) rank of the live rows (site columns are the transpose rows).
    pub fn rank(&self) -> usize {
        let rows: Vec<BitVec> = (0..self.nsites)
            .map(|s| {
                let mut v = BitVec::zeros(self.nrows);
                v.words_mut().copy_from_slice(self.col(s));
                v
            })
            .collect();
        rank2(&BitMatrix::from_rows(rows, self.nrows))
    }

    /// Row-major extraction of the current rows.
    pub fn to_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.nrows, self.nsites);
        for s in 0..self.nsites {
            let col = self.col(s);
            for k in 0..self.nrows {
                if col[k / 64] >> (k % 64) & 1 == 1 {
                    m.row_mut(k).set(s);
                }
            }
        }
        m
    }
}

/// Never-cross fraction of the single-species model by basis decomposition:
/// unit strings on [0, l_a) evolve through the reversed layers, eliminating
/// after every layer against the complement range. Entry t of the returned
/// series is the accumulated elimination count (= the entropy estimate)
/// after t steps; extinction freezes the series early.
pub fn single_species_k(r: &CircuitRealization, l_a: usize) -> Vec<usize> {
    let l = r.nsites;
    assert!(0 < l_a && l_a < l);
    let a_sites: Vec<usize> = (0..l_a).collect();
    let mut basis = BasisEnsemble::unit_rows(l, &a_sites);
    let steps = r.steps.len();
    let mut series = Vec::with_capacity(steps + 1);
    series.push(0);
    for step in r.steps.iter().rev() {
        for layer in step.iter().rev() {
            basis.apply_layer(layer);
            basis.eliminate_in_range(l_a..l);
        }
        series.push(basis.eliminated());
        if basis.all_rows_empty() {
            break;
        }
    }
    series.resize(steps + 1, basis.eliminated());
    series
}

/// The moving-front variant: the X basis is eliminated against everything
/// from the leftmost site any Y-basis row occupies, with both bases driven
/// by the same layers. Once the Y basis is extinct the count freezes.
pub fn approx_two_species_m(r: &CircuitRealization, l_a: usize) -> Vec<usize> {
    let l = r.nsites;
    assert!(0 < l_a && l_a < l);
    let mut hx = BasisEnsemble::unit_rows(l, &(0..l_a).collect::<Vec<_>>());
    let mut hy = BasisEnsemble::unit_rows(l, &(l_a..l).collect::<Vec<_>>());
    let steps = r.steps.len();
    let mut series = Vec::with_capacity(steps + 1);
    series.push(0);
    for step in r.steps.iter().rev() {
        for layer in step.iter().rev() {
            hx.apply_layer(layer);
            hy.apply_layer(layer);
            if let Some(b) = hy.leftmost_occupied() {
                hx.eliminate_in_range(b..l);
            }
        }
        series.push(hx.eliminated());
        if hx.all_rows_empty() && hy.all_rows_empty() {
            break;
        }
    }
    series.resize(steps + 1, hx.eliminated());
    series
}

/// Rank evolution of an initially-identity basis (one unit row per site),
/// for purification observables: the full-basis rank at time t is the
/// entropy estimate of the whole system, and row-subset ranks of the final
/// matrix give the window-deleted variants.
pub struct PurificationRanks {
    /// rank of the evolved basis after each step (entry 0 = before), when
    /// recording was requested.
    pub rank_series: Option<Vec<usize>>,
    /// The evolved rows at the final time.
    pub final_basis: BitMatrix,
}

pub fn purification_ranks(r: &CircuitRealization, record_series: bool) -> PurificationRanks {
    let l = r.nsites;
    let mut h = BasisEnsemble::unit_rows(l, &(0..l).collect::<Vec<_>>());
    let mut series = record_series.then(|| vec![l]);
    for step in r.steps.iter().rev() {
        for layer in step.iter().rev() {
            h.apply_layer(layer);
        }
        if let Some(s) = &mut series {
            s.push(h.rank());
        }
    }
    PurificationRanks {
        rank_series: series,
        final_basis: h.to_matrix(),
    }
}

// ===== end-point random walk in a random environment =====

/// One walker per site of [0, l_a), absorbed on reaching l_a. Each step
/// draws a fresh uniform bias per occupied site; every walker on that site
/// independently moves right with that bias, else left. Entry t of the
/// series is the length of the contiguous right-aligned block of starting
/// sites whose walkers have all been absorbed.
pub fn rwre_run(l_a: usize, horizon: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    rwre_run_with(l_a, horizon, rng, |rng| rng.random::<f64>())
}

/// Same, with an injectable bias distribution (tests pin the ballistic
/// limit with a constant 1).
pub fn rwre_run_with(
    l_a: usize,
    horizon: usize,
    rng: &mut ChaCha8Rng,
    mut omega: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> Vec<usize> {
    assert!(l_a >= 1);
    let mut pos: Vec<i64> = (0..l_a as i64).collect();
    let mut arrived = vec![false; l_a];
    let mut series = Vec::with_capacity(horizon + 1);
    series.push(0);
    // environment slots for positions in [-(horizon), l_a)
    let mut env: Vec<Option<f64>> = vec![None; l_a + horizon];
    for t in 1..=horizon {
        env.fill(None);
        let offset = t as i64;
        for i in 0..l_a {
            if arrived[i] {
                continue;
            }
            let slot = (pos[i] + offset) as usize;
            if env[slot].is_none() {
                env[slot] = Some(omega(rng));
            }
            let bias = env[slot].unwrap();
            pos[i] += if rng.random_bool(bias) { 1 } else { -1 };
            if pos[i] >= l_a as i64 {
                arrived[i] = true;
            }
        }
        series.push(arrived.iter().rev().take_while(|&&a| a).count());
    }
    series
}

// ===== tests =====

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{rng_stream, sample_realization, Boundary, CircuitSpec, Family};
    use crate::gf2::{kernel_restricted, Window};
    use crate::oracle::exhaustive_pair_count;

    fn evolve_single(l: usize, h: &BitVec, layers: &[&Layer]) -> BitVec {
        let mut s = TwoSpeciesState::new(h.clone(), BitVec::zeros(l));
        for (t, layer) in layers.iter().enumerate() {
            s.apply_layer(layer, t as u32);
        }
        s.hx
    }

    #[test]
    fn evolution_is_linear_exhaustively() {
        let l = 8;
        let spec = CircuitSpec::new(Family::Entangle, l, 0.3, 2, 41);
        let r = sample_realization(&spec, rng_stream(41, 0));
        let layers: Vec<&Layer> = r.rev_step_layers().collect();
        let table: Vec<BitVec> = (0..1usize << l)
            .map(|bits| {
                let mut h = BitVec::zeros(l);
                for s in 0..l {
                    if bits >> s & 1 == 1 {
                        h.set(s);
                    }
                }
                evolve_single(l, &h, &layers)
            })
            .collect();
        for a in 0..1usize << l {
            for b in 0..1usize << l {
                let mut sum = table[a].clone();
                sum.xor_assign(&table[b]);
                assert_eq!(sum, table[a ^ b], "xor-additivity failed at {a:#x},{b:#x}");
            }
        }
    }

    #[test]
    fn batch_matches_scalar_reference() {
        let l = 12;
        let spec = CircuitSpec::new(Family::Entangle, l, 0.3, 3, 42);
        let r = sample_realization(&spec, rng_stream(42, 1));
        let mut rng = rng_stream(7, 0);
        let configs: Vec<(BitVec, BitVec)> = (0..130)
            .map(|_| {
                let mut hx = BitVec::zeros(l);
                let mut hy = BitVec::zeros(l);
                for s in 0..l / 2 {
                    if rng.random_bool(0.5) {
                        hx.set(s);
                    }
                }
                for s in l / 2..l {
                    if rng.random_bool(0.5) {
                        hy.set(s);
                    }
                }
                (hx, hy)
            })
            .collect();
        let mut batch = ConfigBatch::from_configs(l, &configs);
        let mut scalars: Vec<TwoSpeciesState> = configs
            .iter()
            .map(|(hx, hy)| TwoSpeciesState::new(hx.clone(), hy.clone()))
            .collect();
        for (t, layer) in r.rev_step_layers().enumerate() {
            batch.apply_layer(layer);
            for s in scalars.iter_mut() {
                s.apply_layer(layer, t as u32);
            }
            for (i, s) in scalars.iter().enumerate() {
                let (hx, hy, alive) = batch.lane(i);
                assert_eq!((hx, hy, alive), (s.hx.clone(), s.hy.clone(), s.alive), "lane {i} layer {t}");
            }
        }
        assert_eq!(
            batch.alive_count(),
            scalars.iter().filter(|s| s.alive).count() as u64
        );
    }

    #[test]
    fn batch_enumeration_matches_reference_counts() {
        let l = 6;
        for seed in [3u64, 4, 5] {
            let spec = CircuitSpec::new(Family::Entangle, l, 0.25, 4, seed);
            let r = sample_realization(&spec, rng_stream(seed, 2));
            let region: Vec<usize> = vec![0, 1, 2];
            let reference = exhaustive_pair_count(&r, &region);
            // all 2^l splits, scattering indices exactly like the reference
            let b_sites: Vec<usize> = (3..6).collect();
            let mut configs = Vec::new();
            for ia in 0..8usize {
                for ib in 0..8usize {
                    let mut hx = BitVec::zeros(l);
                    let mut hy = BitVec::zeros(l);
                    for (k, &s) in region.iter().enumerate() {
                        if ia >> k & 1 == 1 {
                            hx.set(s);
                        }
                    }
                    for (k, &s) in b_sites.iter().enumerate() {
                        if ib >> k & 1 == 1 {
                            hy.set(s);
                        }
                    }
                    configs.push((hx, hy));
                }
            }
            let mut batch = ConfigBatch::from_configs(l, &configs);
            let mut alive = vec![batch.alive_count()];
            let mut n1 = vec![batch.alive_with_empty_x()];
            for step in r.steps.iter().rev() {
                for layer in step.iter().rev() {
                    batch.apply_layer(layer);
                }
                alive.push(batch.alive_count());
                n1.push(batch.alive_with_empty_x());
            }
            assert_eq!(alive, reference.n, "alive series, seed {seed}");
            assert_eq!(n1, reference.n1, "X-gone series, seed {seed}");
        }
    }

    #[test]
    fn sample_p_full_measurement_saturates() {
        let spec = CircuitSpec::new(Family::Entangle, 8, 1.0, 3, 6);
        let r = sample_realization(&spec, rng_stream(6, 0));
        let a: Vec<usize> = (0..4).collect();
        let series = sample_p(&r, &a, 200, &mut rng_stream(6, 1));
        // first reversed layer wipes every string: everyone survives
        assert!(series.alive.iter().all(|&n| n == 200));
        assert_eq!(series.n1[3], 200);
        assert_eq!(series.exhausted_at(), None);
    }

    #[test]
    fn basis_elimination_matches_kernel_restricted() {
        let mut rng = rng_stream(99, 0);
        for trial in 0..20 {
            let l = 10;
            let l_a = 4;
            let spec = CircuitSpec::new(Family::Entangle, l, 0.2, 3, 100 + trial);
            let r = sample_realization(&spec, rng_stream(100 + trial, 0));
            let _ = &mut rng;
            // reference: row-major basis + library kernel elimination
            let mut rows: Vec<BitVec> = (0..l_a).map(|k| BitVec::unit(l, k)).collect();
            let mut ref_eliminated = 0;
            let window = Window::new(l_a, l - l_a, l);
            // fast engine
            let mut basis = BasisEnsemble::unit_rows(l, &(0..l_a).collect::<Vec<_>>());
            for layer in r.rev_step_layers() {
                // evolve reference rows
                for row in rows.iter_mut() {
                    let mut tmp = TwoSpeciesState::new(row.clone(), BitVec::zeros(l));
                    tmp.apply_layer(layer, 0);
                    *row = tmp.hx;
                }
                let m = BitMatrix::from_rows(rows.clone(), l);
                let (survivors, elim) = kernel_restricted(&m, &window);
                ref_eliminated += elim;
                rows = survivors.rows().to_vec();

                basis.apply_layer(layer);
                basis.eliminate_in_range(l_a..l);
                assert_eq!(basis.eliminated(), ref_eliminated, "trial {trial}");
            }
        }
    }

    #[test]
    fn single_species_k_limits() {
        // t=0 entry is zero; counts never decrease
        let spec = CircuitSpec::new(Family::Entangle, 12, 0.2, 8, 13);
        let r = sample_realization(&spec, rng_stream(13, 0));
        let k = single_species_k(&r, 5);
        assert_eq!(k[0], 0);
        assert_eq!(k.len(), 9);
        for w in k.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(*k.last().unwrap() <= 5);
        // p=0: every basis direction eventually crosses
        let spec = CircuitSpec::new(Family::Entangle, 8, 0.0, 60, 14);
        let r = sample_realization(&spec, rng_stream(14, 0));
        let k = single_species_k(&r, 3);
        assert_eq!(*k.last().unwrap(), 3);
    }

    #[test]
    fn approx_m_limits() {
        let spec = CircuitSpec::new(Family::Entangle, 12, 1.0, 4, 15)
            .with_boundary(Boundary::Open);
        let r = sample_realization(&spec, rng_stream(15, 0));
        let m = approx_two_species_m(&r, 6);
        // reversed dynamics wipes both bases in the first measure layer:
        // the boundary never exists and the count freezes at zero
        assert!(m.iter().all(|&v| v == 0));

        let spec = CircuitSpec::new(Family::Entangle, 12, 0.1, 6, 16).with_boundary(Boundary::Open);
        let r = sample_realization(&spec, rng_stream(16, 0));
        let m = approx_two_species_m(&r, 6);
        assert_eq!(m[0], 0);
        for w in m.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(*m.last().unwrap() <= 6);
    }

    #[test]
    fn purification_rank_monotonicity() {
        let spec = CircuitSpec::um_u(8, 0.4, 4, 3, 18);
        let r = sample_realization(&spec, rng_stream(18, 0));
        let ranks = purification_ranks(&r, true).rank_series.unwrap();
        assert_eq!(ranks[0], 8);
        for w in ranks.windows(2) {
            assert!(w[1] <= w[0], "rank must not increase: {ranks:?}");
        }
        // p=0: purely unitary evolution preserves rank
        let spec = CircuitSpec::new(Family::Entangle, 8, 0.0, 5, 19);
        let r = sample_realization(&spec, rng_stream(19, 0));
        let ranks = purification_ranks(&r, true).rank_series.unwrap();
        assert!(ranks.iter().all(|&k| k == 8));
        // final basis row-subset rank is bounded by the full rank
        let full = purification_ranks(&r, false).final_basis;
        let sub = BitMatrix::from_rows(full.rows()[2..].to_vec(), 8);
        assert!(rank2(&sub) <= rank2(&full));
    }

    #[test]
    fn rwre_ballistic_staircase_and_saturation() {
        let mut rng = rng_stream(1, 0);
        let n = rwre_run_with(10, 25, &mut rng, |_| 1.0);
        for (t, &v) in n.iter().enumerate() {
            assert_eq!(v, t.min(10), "ballistic staircase at t={t}");
        }
        // generic run: starts at zero, never decreases, stays within range
        let mut rng = rng_stream(2, 7);
        let n = rwre_run(6, 4000, &mut rng);
        assert_eq!(n[0], 0);
        for w in n.windows(2) {
            assert!(w[1] >= w[0] && w[1] <= 6);
        }
        // a rightward drift makes absorption certain on short horizons
        let mut rng = rng_stream(2, 8);
        let n = rwre_run_with(6, 600, &mut rng, |_| 0.9);
        assert_eq!(*n.last().unwrap(), 6, "drifted walkers are all absorbed");
    }
}
