//! Circuit families, sampled realizations, and reproducible RNG streams.
//!
//! A time step of the two-qubit hybrid family is four layers: three brickwork
//! unitary layers of CNOT and CZ gates with alternating bond parity, then one
//! measure layer. Each bond gate is drawn uniformly from the two CNOT
//! orientations and CZ; every site is measured independently with probability
//! `p` in the measure layer. The purified variants double the register
//! (system sites `0..L`, references `L..2L`), prepend one CZ layer pairing
//! `i` with `L+i`, and act on the system half only.
//!
//! The three-site family's step is three control-flips-two-neighbours layers
//! (offsets 0,1,2 mod 3, control side uniform), two CZ layers, and three
//! measured layers of two-site composite measurements on even then odd bonds
//! (bond present with probability `p`, projected side uniform), interleaved
//! as CNN0, M, CZeven, CNN1, M, CZodd, CNN2, M.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

// ===== spec =====

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "ENTANGLE")]
    Entangle,
    #[serde(rename = "PURIFY")]
    Purify,
    #[serde(rename = "UM_U")]
    UmU,
    #[serde(rename = "Z2")]
    Z2,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Entangle => "ENTANGLE",
            Family::Purify => "PURIFY",
            Family::UmU => "UM_U",
            Family::Z2 => "Z2",
        }
    }

    /// Purified families carry a reference register of equal size.
    pub fn purified(&self) -> bool {
        matches!(self, Family::Purify | Family::UmU)
    }
}

impl std::str::FromStr for Family {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "ENTANGLE" => Ok(Family::Entangle),
            "PURIFY" => Ok(Family::Purify),
            "UM_U" => Ok(Family::UmU),
            "Z2" => Ok(Family::Z2),
            _ => Err(ConfigError::UnknownFamily(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("unknown circuit family {0:?}")]
    UnknownFamily(String),
    #[error("L must be even and >= 2, got {0}")]
    BadLength(usize),
    #[error("measurement rate must lie in [0, 1], got {0}")]
    BadRate(f64),
    #[error("family {family} requires {requirement}")]
    BadBlocks {
        family: &'static str,
        requirement: &'static str,
    },
    #[error("config file: {0}")]
    Parse(String),
}

/// Parameters that pin a circuit ensemble. `seed` is the ensemble seed;
/// trajectory k draws from stream k of this seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub family: Family,
    #[serde(rename = "L")]
    pub l: usize,
    pub p: f64,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "T1", default)]
    pub t1: Option<usize>,
    #[serde(rename = "T2", default)]
    pub t2: Option<usize>,
    pub seed: u64,
}

impl CircuitSpec {
    pub fn new(family: Family, l: usize, p: f64, t: usize, seed: u64) -> Self {
        CircuitSpec {
            family,
            l,
            p,
            boundary: Boundary::Periodic,
            t,
            t1: None,
            t2: None,
            seed,
        }
    }

    /// Alternating-block spec: hybrid for `t1` steps, then unitary-only for `t2`.
    pub fn um_u(l: usize, p: f64, t1: usize, t2: usize, seed: u64) -> Self {
        CircuitSpec {
            family: Family::UmU,
            l,
            p,
            boundary: Boundary::Periodic,
            t: t1 + t2,
            t1: Some(t1),
            t2: Some(t2),
            seed,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.l < 2 || self.l % 2 != 0 {
            return Err(ConfigError::BadLength(self.l));
        }
        if !(0.0..=1.0).contains(&self.p) || self.p.is_nan() {
            return Err(ConfigError::BadRate(self.p));
        }
        match self.family {
            Family::UmU => match (self.t1, self.t2) {
                (Some(t1), Some(t2)) if t1 + t2 == self.t => Ok(()),
                _ => Err(ConfigError::BadBlocks {
                    family: "UM_U",
                    requirement: "T1 and T2 with T = T1 + T2",
                }),
            },
            _ => {
                if self.t1.is_some() || self.t2.is_some() {
                    Err(ConfigError::BadBlocks {
                        family: self.family.as_str(),
                        requirement: "no T1/T2 blocks",
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Total register size: purified families carry references.
    pub fn nqubits(&self) -> usize {
        if self.family.purified() {
            2 * self.l
        } else {
            self.l
        }
    }

    /// Dynamical sites (gates and measurements act here).
    pub fn nsites(&self) -> usize {
        self.l
    }

    pub fn steps(&self) -> usize {
        self.t
    }
}

/// Deterministic per-trajectory RNG: stream `stream` of the ensemble seed.
/// Streams are independent, so workers may claim trajectories in any order
/// and still reproduce the same ensemble.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// ===== realization =====

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Cnot { control: usize, target: usize },
    Cz { a: usize, b: usize },
    /// Control flips both targets (two CNOTs sharing a control).
    Cnn { control: usize, targets: (usize, usize) },
}

impl Gate {
    pub fn support(&self) -> impl Iterator<Item = usize> {
        let (a, b, c) = match *self {
            Gate::Cnot { control, target } => (control, target, None),
            Gate::Cz { a, b } => (a, b, None),
            Gate::Cnn {
                control,
                targets: (t1, t2),
            } => (control, t1, Some(t2)),
        };
        [Some(a), Some(b), c].into_iter().flatten()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureEvent {
    /// Single-site composite measurement: project Z at the site, then restore
    /// the equal-weight superposition there.
    Site(usize),
    /// Two-site composite measurement on bond (left, right): project Z on one
    /// side, then apply the parity-sector rotation on the pair.
    Pair {
        left: usize,
        right: usize,
        project_left: bool,
    },
}

impl MeasureEvent {
    pub fn support(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            MeasureEvent::Site(s) => (s, None),
            MeasureEvent::Pair { left, right, .. } => (left, Some(right)),
        };
        [Some(a), b].into_iter().flatten()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Unitary(Vec<Gate>),
    Measure(Vec<MeasureEvent>),
}

/// One sampled trajectory's circuit: immutable once sampled.
#[derive(Clone, Debug)]
pub struct CircuitRealization {
    /// Reference-coupling layer for purified families, empty otherwise.
    pub prologue: Vec<Layer>,
    /// Layers grouped by time step.
    pub steps: Vec<Vec<Layer>>,
    pub nqubits: usize,
    pub nsites: usize,
}

impl CircuitRealization {
    /// All layers in circuit order (prologue first).
    pub fn layers(&self) -> impl Iterator<Item = &Layer> {
        self.prologue.iter().chain(self.steps.iter().flatten())
    }

    /// Step layers in reversed order (steps reversed, layers within a step
    /// reversed). The particle duals evolve in this order: difference strings
    /// propagate from the final time back through the circuit, and every
    /// layer map is an involution on bit strings. The prologue is excluded;
    /// it never touches the dynamical sites' difference strings.
    pub fn rev_step_layers(&self) -> impl Iterator<Item = &Layer> {
        self.steps.iter().rev().flat_map(|s| s.iter().rev())
    }
}

// ===== sampling =====

/// Streams one time step of layers at a time; `sample_realization` collects
/// the whole circuit. Both are pure functions of (spec, rng stream).
pub struct StepSampler<'a> {
    spec: &'a CircuitSpec,
    rng: ChaCha8Rng,
    step: usize,
}

impl<'a> StepSampler<'a> {
    pub fn new(spec: &'a CircuitSpec, rng: ChaCha8Rng) -> Self {
        StepSampler { spec, rng, step: 0 }
    }

    /// The deterministic reference-coupling layer (no randomness consumed).
    pub fn prologue(spec: &CircuitSpec) -> Vec<Layer> {
        if spec.family.purified() {
            let gates = (0..spec.l)
                .map(|i| Gate::Cz { a: i, b: spec.l + i })
                .collect();
            vec![Layer::Unitary(gates)]
        } else {
            Vec::new()
        }
    }

    pub fn next_step(&mut self) -> Option<Vec<Layer>> {
        if self.step >= self.spec.steps() {
            return None;
        }
        let p = match self.spec.family {
            // Unitary-only tail block.
            Family::UmU if self.step >= self.spec.t1.unwrap() => 0.0,
            _ => self.spec.p,
        };
        let step = match self.spec.family {
            Family::Z2 => self.z2_step(p),
            _ => self.hybrid_step(p),
        };
        self.step += 1;
        Some(step)
    }

    fn bonds(&self, even: bool) -> Vec<(usize, usize)> {
        let l = self.spec.l;
        let start = if even { 0 } else { 1 };
        let mut bonds: Vec<(usize, usize)> = (start..l - 1).step_by(2).map(|i| (i, i + 1)).collect();
        if !even && self.spec.boundary == Boundary::Periodic {
            bonds.push((l - 1, 0));
        }
        bonds
    }

    /// Brickwork layer with each bond gate drawn uniformly from
    /// {CNOT left-to-right, CNOT right-to-left, CZ}.
    fn mixed_layer(&mut self, even: bool) -> Layer {
        let gates = self
            .bonds(even)
            .into_iter()
            .map(|(a, b)| match self.rng.random_range(0..3u8) {
                0 => Gate::Cnot { control: a, target: b },
                1 => Gate::Cnot { control: b, target: a },
                _ => Gate::Cz { a, b },
            })
            .collect();
        Layer::Unitary(gates)
    }

    fn cz_layer(&mut self, even: bool) -> Layer {
        let gates = self.bonds(even).into_iter().map(|(a, b)| Gate::Cz { a, b }).collect();
        Layer::Unitary(gates)
    }

    fn site_measure_layer(&mut self, p: f64) -> Layer {
        let mut events = Vec::new();
        if p > 0.0 {
            for site in 0..self.spec.l {
                if self.rng.random_bool(p) {
                    events.push(MeasureEvent::Site(site));
                }
            }
        }
        Layer::Measure(events)
    }

    /// Three brickwork unitary layers with alternating bond parity, then one
    /// site-measure layer. The parity offset `3 * step` keeps the even/odd
    /// alternation seamless across step boundaries.
    fn hybrid_step(&mut self, p: f64) -> Vec<Layer> {
        let s = 3 * self.step;
        vec![
            self.mixed_layer(s % 2 == 0),
            self.mixed_layer((s + 1) % 2 == 0),
            self.mixed_layer((s + 2) % 2 == 0),
            self.site_measure_layer(p),
        ]
    }

    fn cnn_layer(&mut self, offset: usize) -> Layer {
        let l = self.spec.l;
        let wrap = self.spec.boundary == Boundary::Periodic && l % 3 == 0;
        let mut gates = Vec::new();
        let mut i = offset;
        loop {
            if wrap {
                if gates.len() == l / 3 {
                    break;
                }
            } else if i + 2 >= l {
                break;
            }
            let (a, b, c) = (i % l, (i + 1) % l, (i + 2) % l);
            gates.push(if self.rng.random_bool(0.5) {
                Gate::Cnn { control: a, targets: (b, c) }
            } else {
                Gate::Cnn { control: c, targets: (a, b) }
            });
            i += 3;
        }
        Layer::Unitary(gates)
    }

    /// Two consecutive measure layers: two-site composites on even bonds,
    /// then on odd bonds.
    fn pair_measure_rows(&mut self, p: f64) -> [Layer; 2] {
        let mut rows = Vec::with_capacity(2);
        for even in [true, false] {
            let mut events = Vec::new();
            if p > 0.0 {
                for (a, b) in self.bonds(even) {
                    if self.rng.random_bool(p) {
                        let project_left = self.rng.random_bool(0.5);
                        events.push(MeasureEvent::Pair {
                            left: a,
                            right: b,
                            project_left,
                        });
                    }
                }
            }
            rows.push(Layer::Measure(events));
        }
        rows.try_into().unwrap()
    }

    fn z2_step(&mut self, p: f64) -> Vec<Layer> {
        let mut layers = Vec::with_capacity(11);
        layers.push(self.cnn_layer(0));
        layers.extend(self.pair_measure_rows(p));
        layers.push(self.cz_layer(true));
        layers.push(self.cnn_layer(1));
        layers.extend(self.pair_measure_rows(p));
        layers.push(self.cz_layer(false));
        layers.push(self.cnn_layer(2));
        layers.extend(self.pair_measure_rows(p));
        layers
    }
}

/// Samples the full circuit for one trajectory.
pub fn sample_realization(spec: &CircuitSpec, rng: ChaCha8Rng) -> CircuitRealization {
    let mut sampler = StepSampler::new(spec, rng);
    let mut steps = Vec::with_capacity(spec.steps());
    while let Some(step) = sampler.next_step() {
        steps.push(step);
    }
    CircuitRealization {
        prologue: StepSampler::prologue(spec),
        steps,
        nqubits: spec.nqubits(),
        nsites: spec.nsites(),
    }
}

// ===== tests =====

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn entangle(l: usize, p: f64, t: usize) -> CircuitSpec {
        CircuitSpec::new(Family::Entangle, l, p, t, 42)
    }

    fn layer_supports_disjoint(layer: &Layer) -> bool {
        let mut seen = HashSet::new();
        let sites: Vec<usize> = match layer {
            Layer::Unitary(gates) => gates.iter().flat_map(|g| g.support()).collect(),
            Layer::Measure(events) => events.iter().flat_map(|e| e.support()).collect(),
        };
        sites.into_iter().all(|s| seen.insert(s))
    }

    #[test]
    fn entangle_p0_step_structure() {
        let spec = entangle(8, 0.0, 2);
        let r = sample_realization(&spec, rng_stream(1, 0));
        assert!(r.prologue.is_empty());
        assert_eq!(r.steps.len(), 2);
        for (s, step) in r.steps.iter().enumerate() {
            assert_eq!(step.len(), 4);
            // Bond parity alternates layer to layer, continuing across steps.
            for (u, layer) in step[..3].iter().enumerate() {
                let Layer::Unitary(gates) = layer else { panic!() };
                assert_eq!(gates.len(), 4);
                let start = (3 * s + u) % 2;
                let bonds: Vec<(usize, usize)> =
                    (0..4).map(|k| ((start + 2 * k) % 8, (start + 2 * k + 1) % 8)).collect();
                for (g, &(a, b)) in gates.iter().zip(&bonds) {
                    assert!(matches!(g, Gate::Cnot { .. } | Gate::Cz { .. }));
                    let mut s: Vec<usize> = g.support().collect();
                    s.sort();
                    let mut want = vec![a, b];
                    want.sort();
                    assert_eq!(s, want);
                }
            }
            let Layer::Measure(events) = &step[3] else { panic!() };
            assert!(events.is_empty());
        }
    }

    #[test]
    fn mixed_layers_use_all_gate_choices() {
        let spec = entangle(32, 0.0, 8);
        let r = sample_realization(&spec, rng_stream(5, 0));
        let (mut fwd, mut rev, mut cz) = (0usize, 0usize, 0usize);
        for layer in r.layers() {
            let Layer::Unitary(gates) = layer else { continue };
            for g in gates {
                match g {
                    Gate::Cnot { control, target } if control < target => fwd += 1,
                    Gate::Cnot { .. } => rev += 1,
                    Gate::Cz { .. } => cz += 1,
                    _ => panic!("unexpected gate"),
                }
            }
        }
        // 384 draws, uniform over three choices: each count far from zero.
        assert!(fwd > 80 && rev > 80 && cz > 80, "{fwd}/{rev}/{cz}");
    }

    #[test]
    fn entangle_p1_measures_every_site() {
        let spec = entangle(8, 1.0, 2);
        let r = sample_realization(&spec, rng_stream(2, 0));
        for step in &r.steps {
            for layer in step {
                if let Layer::Measure(events) = layer {
                    assert_eq!(events.len(), 8);
                    let sites: Vec<_> = events
                        .iter()
                        .map(|e| match e {
                            MeasureEvent::Site(s) => *s,
                            _ => unreachable!(),
                        })
                        .collect();
                    assert_eq!(sites, (0..8).collect::<Vec<_>>());
                }
            }
        }
    }

    #[test]
    fn purify_prologue_couples_references_and_steps_stay_on_system() {
        let spec = CircuitSpec::new(Family::Purify, 4, 0.2, 3, 7);
        let r = sample_realization(&spec, rng_stream(7, 0));
        assert_eq!(r.nqubits, 8);
        assert_eq!(r.prologue.len(), 1);
        let Layer::Unitary(gates) = &r.prologue[0] else { panic!() };
        let expect: Vec<Gate> = (0..4).map(|i| Gate::Cz { a: i, b: 4 + i }).collect();
        assert_eq!(gates, &expect);
        for layer in r.steps.iter().flatten() {
            let sites: Vec<usize> = match layer {
                Layer::Unitary(g) => g.iter().flat_map(|g| g.support()).collect(),
                Layer::Measure(e) => e.iter().flat_map(|e| e.support()).collect(),
            };
            assert!(sites.into_iter().all(|s| s < 4));
        }
    }

    #[test]
    fn um_u_tail_block_is_unitary_only() {
        let spec = CircuitSpec::um_u(6, 0.5, 2, 3, 9);
        spec.validate().unwrap();
        let r = sample_realization(&spec, rng_stream(9, 0));
        assert_eq!(r.steps.len(), 5);
        let measured: Vec<usize> = r
            .steps
            .iter()
            .map(|s| {
                s.iter()
                    .map(|l| match l {
                        Layer::Measure(e) => e.len(),
                        _ => 0,
                    })
                    .sum()
            })
            .collect();
        assert!(measured[0] + measured[1] > 0, "hybrid block should measure");
        assert_eq!(measured[2] + measured[3] + measured[4], 0);
    }

    #[test]
    fn odd_bonds_wrap_only_under_periodic() {
        for (boundary, expect_wrap) in [(Boundary::Periodic, true), (Boundary::Open, false)] {
            let spec = entangle(6, 0.0, 1).with_boundary(boundary);
            let r = sample_realization(&spec, rng_stream(3, 0));
            // Step 0, layer 1 is the odd-parity unitary layer.
            let Layer::Unitary(odd_gates) = &r.steps[0][1] else { panic!() };
            let has_wrap = odd_gates.iter().any(|g| {
                let s: Vec<_> = g.support().collect();
                s.contains(&5) && s.contains(&0)
            });
            assert_eq!(has_wrap, expect_wrap);
        }
    }

    #[test]
    fn layer_supports_are_disjoint_across_families() {
        for spec in [
            entangle(10, 0.3, 4),
            CircuitSpec::new(Family::Purify, 8, 0.3, 4, 5),
            CircuitSpec::new(Family::Z2, 12, 0.4, 4, 5),
            CircuitSpec::um_u(8, 0.3, 2, 2, 5),
        ] {
            spec.validate().unwrap();
            for stream in 0..5 {
                let r = sample_realization(&spec, rng_stream(spec.seed, stream));
                for layer in r.layers() {
                    assert!(layer_supports_disjoint(layer));
                }
            }
        }
    }

    #[test]
    fn z2_step_structure() {
        let spec = CircuitSpec::new(Family::Z2, 12, 1.0, 1, 3);
        let r = sample_realization(&spec, rng_stream(3, 0));
        let step = &r.steps[0];
        assert_eq!(step.len(), 11);
        let mut cnn_layers = 0;
        let mut cz_layers = 0;
        let mut measure_layers = 0;
        for layer in step {
            match layer {
                Layer::Unitary(gates) if matches!(gates[0], Gate::Cnn { .. }) => {
                    cnn_layers += 1;
                    assert_eq!(gates.len(), 4); // 12 / 3, wrapped tiling
                }
                Layer::Unitary(gates) => {
                    assert!(matches!(gates[0], Gate::Cz { .. }));
                    cz_layers += 1;
                }
                Layer::Measure(events) => {
                    measure_layers += 1;
                    assert!(!events.is_empty()); // p = 1
                    assert!(events
                        .iter()
                        .all(|e| matches!(e, MeasureEvent::Pair { .. })));
                }
            }
        }
        assert_eq!((cnn_layers, cz_layers, measure_layers), (3, 2, 6));
    }

    #[test]
    fn measured_fraction_tracks_rate() {
        let spec = entangle(64, 0.15, 50);
        let r = sample_realization(&spec, rng_stream(11, 0));
        let (mut hits, mut draws) = (0usize, 0usize);
        for layer in r.layers() {
            if let Layer::Measure(events) = layer {
                hits += events.len();
                draws += 64;
            }
        }
        let frac = hits as f64 / draws as f64;
        let sigma = (0.15 * 0.85 / draws as f64).sqrt();
        assert!((frac - 0.15).abs() < 4.0 * sigma, "frac={frac}");
    }

    #[test]
    fn same_stream_reproduces_different_streams_differ() {
        let spec = entangle(16, 0.2, 5);
        let a = sample_realization(&spec, rng_stream(1, 7));
        let b = sample_realization(&spec, rng_stream(1, 7));
        let c = sample_realization(&spec, rng_stream(1, 8));
        assert_eq!(format!("{:?}", a.steps), format!("{:?}", b.steps));
        assert_ne!(format!("{:?}", a.steps), format!("{:?}", c.steps));
    }

    #[test]
    fn streaming_matches_collected() {
        let spec = CircuitSpec::new(Family::Purify, 8, 0.25, 6, 13);
        let collected = sample_realization(&spec, rng_stream(13, 2));
        let mut sampler = StepSampler::new(&spec, rng_stream(13, 2));
        let mut streamed = Vec::new();
        while let Some(s) = sampler.next_step() {
            streamed.push(s);
        }
        assert_eq!(collected.steps, streamed);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(entangle(7, 0.1, 1).validate().is_err());
        assert!(entangle(0, 0.1, 1).validate().is_err());
        assert!(entangle(8, -0.1, 1).validate().is_err());
        assert!(entangle(8, 1.5, 1).validate().is_err());
        let mut s = entangle(8, 0.1, 1);
        s.t1 = Some(1);
        assert!(s.validate().is_err());
        let mut u = CircuitSpec::um_u(8, 0.1, 2, 2, 0);
        u.t = 3;
        assert!(u.validate().is_err());
    }

    #[test]
    fn spec_json_roundtrip_uses_exact_field_names() {
        let spec = CircuitSpec::um_u(32, 0.08, 64, 64, 99);
        let json = serde_json::to_string(&spec).unwrap();
        for key in ["\"family\"", "\"L\"", "\"p\"", "\"boundary\"", "\"T\"", "\"T1\"", "\"T2\"", "\"seed\""] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        assert!(json.contains("\"UM_U\""));
        assert!(json.contains("\"periodic\""));
        let back: CircuitSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let partial: CircuitSpec = serde_json::from_str(
            r#"{"family":"ENTANGLE","L":16,"p":0.1,"T":8,"seed":1}"#,
        )
        .unwrap();
        assert_eq!(partial.boundary, Boundary::Periodic);
        assert!(serde_json::from_str::<CircuitSpec>(
            r#"{"family":"ENTANGLE","L":16,"p":0.1,"T":8,"seed":1,"extra":3}"#
        )
        .is_err());
    }

    #[test]
    fn rev_step_layers_reverses_steps_and_layers() {
        let spec = entangle(6, 0.5, 3);
        let r = sample_realization(&spec, rng_stream(5, 0));
        let fwd: Vec<&Layer> = r.steps.iter().flatten().collect();
        let rev: Vec<&Layer> = r.rev_step_layers().collect();
        assert_eq!(rev.len(), fwd.len());
        for (a, b) in rev.iter().zip(fwd.iter().rev()) {
            assert_eq!(a, b);
        }
    }
}
