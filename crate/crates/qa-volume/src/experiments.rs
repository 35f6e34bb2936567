//! Ensemble orchestration: every observable the binary exposes, built from
//! deterministic per-trajectory RNG streams.
//!
//! Reproducibility contract: trajectory `g` of an ensemble touches only
//! streams derived from (seed, g) — stream 2g drives circuit sampling and
//! stream 2g+1 any auxiliary draws (configuration batches, walk
//! environments). Results are collected in trajectory order and folded
//! serially, so output bytes are independent of the worker count. Sweeps
//! over several sizes or rates index trajectories globally, one contiguous
//! block per axis point.

use crate::circuit::{
    rng_stream, sample_realization, Boundary, CircuitRealization, CircuitSpec, Family,
    StepSampler,
};
use crate::codes::{self, CodesError, DistanceScan};
use crate::gf2::{rank2, BitVec};
use crate::oracle::{
    entropy_exact, exhaustive_pair_count, exhaustive_signed_pair_sum, purity_swap, PhaseState,
};
use crate::particles::{self, BasisEnsemble};
use crate::stabilizer::Tableau;
use crate::stats::{Axis, EnsembleSeries, Moments};
use rayon::prelude::*;
use serde::Serialize;

// ===== worker pool =====

/// Builds the pool all ensembles run on; `threads = 0` means "use the
/// default parallelism".
pub fn make_pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("worker pool")
}

/// Runs `jobs` independent trajectories on the pool and returns the results
/// in trajectory order regardless of scheduling.
pub fn run_trajectories<T: Send>(
    pool: &rayon::ThreadPool,
    jobs: usize,
    job: impl Fn(usize) -> T + Sync + Send,
) -> Vec<T> {
    pool.install(|| (0..jobs).into_par_iter().map(job).collect())
}

fn circuit_stream(g: usize) -> u64 {
    2 * g as u64
}

fn aux_stream(g: usize) -> u64 {
    2 * g as u64 + 1
}

/// Roughly geometric integer grid over [1, t_max] with both endpoints,
/// strictly increasing.
pub fn log_time_grid(t_max: usize, points: usize) -> Vec<usize> {
    assert!(t_max >= 1 && points >= 2);
    let mut grid = Vec::with_capacity(points);
    let ratio = (t_max as f64).ln() / (points - 1) as f64;
    for k in 0..points {
        let t = (ratio * k as f64).exp().round() as usize;
        let t = t.clamp(1, t_max);
        if grid.last() != Some(&t) {
            grid.push(t);
        }
    }
    grid
}

// ===== stabilizer ensembles =====

/// Initial state for a family: the even-parity superposition for the
/// parity-conserving circuits, the all-plus product otherwise (reference
/// register included for purified families; the entangling prologue is
/// applied separately).
pub fn initial_tableau(spec: &CircuitSpec) -> Tableau {
    match spec.family {
        Family::Z2 => Tableau::ghz_x(spec.nqubits(), false),
        _ => Tableau::plus_x(spec.nqubits(), false),
    }
}

/// Streams one trajectory forward; `visit(t, tab)` fires at t = 0 (after
/// the prologue) and after every completed step.
pub fn stream_forward(spec: &CircuitSpec, stream: u64, visit: &mut dyn FnMut(usize, &Tableau)) {
    let mut tab = initial_tableau(spec);
    for layer in StepSampler::prologue(spec) {
        tab.apply_layer(&layer);
    }
    visit(0, &tab);
    let mut sampler = StepSampler::new(spec, rng_stream(spec.seed, stream));
    let mut t = 0;
    while let Some(step) = sampler.next_step() {
        t += 1;
        for layer in &step {
            tab.apply_layer(layer);
        }
        visit(t, &tab);
    }
}

/// One trajectory evolved to its horizon.
pub fn final_tableau(spec: &CircuitSpec, stream: u64) -> Tableau {
    let mut tab = initial_tableau(spec);
    for layer in StepSampler::prologue(spec) {
        tab.apply_layer(&layer);
    }
    let mut sampler = StepSampler::new(spec, rng_stream(spec.seed, stream));
    while let Some(step) = sampler.next_step() {
        for layer in &step {
            tab.apply_layer(layer);
        }
    }
    tab
}

/// Entanglement entropy of the leading `cut` sites on a sorted time grid,
/// one value per trajectory per grid point.
pub fn entropy_growth_series(
    spec: &CircuitSpec,
    cut: usize,
    t_grid: &[usize],
    samples: usize,
    pool: &rayon::ThreadPool,
) -> EnsembleSeries {
    assert!(t_grid.windows(2).all(|w| w[0] < w[1]), "grid must increase");
    assert!(t_grid.last().is_none_or(|&t| t <= spec.steps()));
    let sites: Vec<usize> = (0..cut).collect();
    let rows = run_trajectories(pool, samples, |g| {
        let mut vals = Vec::with_capacity(t_grid.len());
        let mut next = 0;
        stream_forward(spec, circuit_stream(g), &mut |t, tab| {
            if next < t_grid.len() && t_grid[next] == t {
                vals.push(tab.entropy(&sites) as f64);
                next += 1;
            }
        });
        vals
    });
    let mut series = EnsembleSeries::new(Axis::Time, t_grid.iter().map(|&t| t as f64).collect());
    for row in &rows {
        series.accumulate(row);
    }
    series
}

/// Half-cut entropy at t = ceil(t_factor·L) across system sizes.
pub fn steady_half_entropy_by_size(
    family: Family,
    l_values: &[usize],
    p: f64,
    t_factor: f64,
    samples: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> EnsembleSeries {
    let vals = run_trajectories(pool, l_values.len() * samples, |g| {
        let l = l_values[g / samples];
        let t = (t_factor * l as f64).ceil() as usize;
        let spec = CircuitSpec::new(family, l, p, t, seed);
        let sites: Vec<usize> = (0..l / 2).collect();
        let tab = final_tableau(&spec, circuit_stream(g));
        (g / samples, tab.entropy(&sites) as f64)
    });
    let xs = l_values.iter().map(|&l| l as f64).collect();
    let mut series = EnsembleSeries::new(Axis::SystemSize, xs);
    for (si, v) in vals {
        series.push_at(si, v);
    }
    series
}

/// Entropy of the leading `cut` sites at a fixed time for each measurement
/// rate; pairs with `ps` index by index.
pub fn steady_entropy_vs_rate(
    family: Family,
    l: usize,
    cut: usize,
    ps: &[f64],
    t: usize,
    samples: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> Vec<Moments> {
    let sites: Vec<usize> = (0..cut).collect();
    let vals = run_trajectories(pool, ps.len() * samples, |g| {
        let spec = CircuitSpec::new(family, l, ps[g / samples], t, seed);
        let tab = final_tableau(&spec, circuit_stream(g));
        (g / samples, tab.entropy(&sites) as f64)
    });
    let mut points = vec![Moments::default(); ps.len()];
    for (pi, v) in vals {
        points[pi].push(v);
    }
    points
}

/// Crossing points of two curves on a shared grid, linearly interpolating
/// their difference; exact endpoint ties count once.
pub fn crossing_points(xs: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    assert!(xs.len() == a.len() && xs.len() == b.len());
    let mut out = Vec::new();
    for i in 1..xs.len() {
        let d0 = a[i - 1] - b[i - 1];
        let d1 = a[i] - b[i];
        if d0 == 0.0 {
            out.push(xs[i - 1]);
        } else if d0 * d1 < 0.0 {
            out.push(xs[i - 1] + (xs[i] - xs[i - 1]) * d0 / (d0 - d1));
        }
    }
    if xs.len() >= 2 && a.last() == b.last() {
        out.push(*xs.last().unwrap());
    }
    out
}

/// Trajectories whose global Z string ever leaves the stabilizer group
/// (checked exactly after every step).
pub fn z2_parity_violations(
    l: usize,
    p: f64,
    t: usize,
    samples: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> usize {
    let spec = CircuitSpec::new(Family::Z2, l, p, t, seed);
    let x = BitVec::zeros(l);
    let z = {
        let mut z = BitVec::zeros(l);
        for i in 0..l {
            z.set(i);
        }
        z
    };
    let vals = run_trajectories(pool, samples, |g| {
        let mut bad = false;
        stream_forward(&spec, circuit_stream(g), &mut |_, tab| {
            bad = bad || !tab.contains_stabilizer(&x, &z);
        });
        bad
    });
    vals.iter().filter(|&&b| b).count()
}

// ===== purified profiles =====

/// Per-cut ensemble of a purified family at its final time.
pub struct ProfileStats {
    /// S_A moments per prefix cut, x = L_A ∈ 0..=L.
    pub s_a: EnsembleSeries,
    /// I(A:R) moments per prefix cut; the mean is the distance criterion.
    pub i_ar: EnsembleSeries,
    /// I(A:B) between a prefix and the rest of the dynamical register
    /// (= 2·S_A − I(A:R) by purity of the full register).
    pub i_ab: EnsembleSeries,
    /// −log₂P₂ from the evolved particle basis, same cuts (when requested).
    pub neg_log2_p2: Option<EnsembleSeries>,
    /// Final S_Q moments.
    pub s_q: Moments,
    /// Smallest I(A:R) seen in any trajectory at any cut.
    pub min_i_ar: i64,
    /// Trajectories where S_Q ever increased between steps.
    pub s_q_increases: usize,
}

/// Final-time subsystem profiles for a purified spec, with S_Q tracked every
/// step (it may only shrink) and optionally the particle-basis estimate
/// evolved through the same realizations.
pub fn profile_stats(
    spec: &CircuitSpec,
    samples: usize,
    with_particles: bool,
    pool: &rayon::ThreadPool,
) -> ProfileStats {
    assert!(spec.family.purified(), "profiles need a reference register");
    let l = spec.nsites();
    let q_sites: Vec<usize> = (0..l).collect();
    struct Row {
        s_a: Vec<usize>,
        i_ar: Vec<i64>,
        p2: Option<Vec<usize>>,
        s_q: usize,
        min_i: i64,
        increased: bool,
    }
    let rows = run_trajectories(pool, samples, |g| {
        let r = sample_realization(spec, rng_stream(spec.seed, circuit_stream(g)));
        let mut tab = initial_tableau(spec);
        for layer in &r.prologue {
            tab.apply_layer(layer);
        }
        let mut prev = tab.entropy(&q_sites);
        let mut increased = false;
        for step in &r.steps {
            for layer in step {
                tab.apply_layer(layer);
            }
            let s = tab.entropy(&q_sites);
            increased = increased || s > prev;
            prev = s;
        }
        let (s_a, i_ar, p2, s_q) = if with_particles {
            let basis = particles::purification_ranks(&r, false).final_basis;
            let prof = codes::subsystem_profile(&tab, &basis, l);
            (prof.s_a, prof.i_ar, Some(prof.neg_log2_p2), prof.s_q)
        } else {
            let (s_a, i_ar, s_q) = codes::tableau_profile(&tab, l);
            (s_a, i_ar, None, s_q)
        };
        let min_i = i_ar.iter().copied().min().unwrap();
        Row {
            s_a,
            i_ar,
            p2,
            s_q,
            min_i,
            increased,
        }
    });

    let xs: Vec<f64> = (0..=l).map(|c| c as f64).collect();
    let mut s_a = EnsembleSeries::new(Axis::SubsystemSize, xs.clone());
    let mut i_ar = EnsembleSeries::new(Axis::SubsystemSize, xs.clone());
    let mut i_ab = EnsembleSeries::new(Axis::SubsystemSize, xs.clone());
    let mut p2 = with_particles.then(|| EnsembleSeries::new(Axis::SubsystemSize, xs));
    let mut s_q = Moments::default();
    let mut min_i_ar = i64::MAX;
    let mut s_q_increases = 0;
    for row in rows {
        s_a.accumulate(&row.s_a.iter().map(|&v| v as f64).collect::<Vec<_>>());
        i_ar.accumulate(&row.i_ar.iter().map(|&v| v as f64).collect::<Vec<_>>());
        let ab: Vec<f64> = row
            .s_a
            .iter()
            .zip(&row.i_ar)
            .map(|(&s, &i)| 2.0 * s as f64 - i as f64)
            .collect();
        i_ab.accumulate(&ab);
        if let (Some(series), Some(vals)) = (p2.as_mut(), row.p2) {
            series.accumulate(&vals.iter().map(|&v| v as f64).collect::<Vec<_>>());
        }
        s_q.push(row.s_q as f64);
        min_i_ar = min_i_ar.min(row.min_i);
        s_q_increases += row.increased as usize;
    }
    ProfileStats {
        s_a,
        i_ar,
        i_ab,
        neg_log2_p2: p2,
        s_q,
        min_i_ar,
        s_q_increases,
    }
}

// ===== code distances =====

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceKind {
    /// ⟨I(A:R)⟩ of contiguous windows of the purified state.
    MutualInfo,
    /// Rank deficit of the evolved particle basis under window erasure.
    ZError,
    /// Rank deficit of the forward generator matrix under column erasure.
    Classical,
}

fn scaled_samples(base: usize, l_min: usize, l: usize) -> usize {
    (base * l_min / l).max(16)
}

/// Contiguous-distance scans over a sweep of system sizes at t = t_factor·L.
/// The sample count is `base_samples` at the smallest size and shrinks like
/// 1/L so the sweep's cost stays roughly flat per size.
pub fn distance_scaling(
    kind: DistanceKind,
    family: Family,
    l_values: &[usize],
    p: f64,
    t_factor: usize,
    base_samples: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> Result<Vec<DistanceScan>, CodesError> {
    if kind == DistanceKind::MutualInfo {
        assert!(family.purified(), "window information needs a reference");
    }
    let l_min = *l_values.iter().min().unwrap();
    let mut scans = Vec::with_capacity(l_values.len());
    let mut g0 = 0usize;
    for &l in l_values {
        let samples = scaled_samples(base_samples, l_min, l);
        let t = t_factor * l;
        let spec = if family == Family::UmU {
            CircuitSpec::um_u(l, p, t_factor * l / 2, t - t_factor * l / 2, seed)
        } else {
            CircuitSpec::new(family, l, p, t, seed)
        };
        let scan = match kind {
            DistanceKind::MutualInfo => {
                let tabs = run_trajectories(pool, samples, |i| {
                    final_tableau(&spec, circuit_stream(g0 + i))
                });
                codes::qecc_distance(&tabs, l, p, t)?
            }
            DistanceKind::ZError => {
                let bases = run_trajectories(pool, samples, |i| {
                    let r = sample_realization(&spec, rng_stream(seed, circuit_stream(g0 + i)));
                    particles::purification_ranks(&r, false).final_basis
                });
                codes::z_error_distance(&bases, l, p, t)?
            }
            DistanceKind::Classical => {
                let all: Vec<usize> = (0..l).collect();
                let generators = run_trajectories(pool, samples, |i| {
                    let r = sample_realization(&spec, rng_stream(seed, circuit_stream(g0 + i)));
                    let mut gen = BasisEnsemble::unit_rows(l, &all);
                    for layer in r.layers() {
                        gen.apply_layer(layer);
                    }
                    gen.to_matrix()
                });
                codes::clc_distance(&generators, l, p, t)?
            }
        };
        scans.push(scan);
        g0 += samples;
    }
    Ok(scans)
}

/// (L, distance) pairs ready for the exponent fit.
pub fn distance_points(scans: &[DistanceScan]) -> Vec<(usize, usize)> {
    scans.iter().map(|s| (s.l, s.distance)).collect()
}

// ===== particle ensembles =====

/// Survival fraction P(t) of sampled splits (X species on the leading `l_a`
/// sites), one fraction series per realization.
pub fn survival_fraction_series(
    l: usize,
    l_a: usize,
    p: f64,
    t: usize,
    lanes: usize,
    realizations: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> EnsembleSeries {
    let spec = CircuitSpec::new(Family::Entangle, l, p, t, seed);
    let a_sites: Vec<usize> = (0..l_a).collect();
    let rows = run_trajectories(pool, realizations, |g| {
        let r = sample_realization(&spec, rng_stream(seed, circuit_stream(g)));
        let mut rng = rng_stream(seed, aux_stream(g));
        let s = particles::sample_p(&r, &a_sites, lanes, &mut rng);
        s.alive
            .iter()
            .map(|&a| a as f64 / s.total as f64)
            .collect::<Vec<_>>()
    });
    let mut series = EnsembleSeries::new(Axis::Time, (0..=t).map(|x| x as f64).collect());
    for row in &rows {
        series.accumulate(row);
    }
    series
}

/// Sampled −log₂P(t) per realization; times where a realization has zero
/// surviving lanes stop contributing (visible as a count drop).
pub fn sampled_neg_log2_p_series(
    l: usize,
    l_a: usize,
    p: f64,
    t: usize,
    lanes: usize,
    realizations: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> EnsembleSeries {
    let spec = CircuitSpec::new(Family::Entangle, l, p, t, seed);
    let a_sites: Vec<usize> = (0..l_a).collect();
    let rows = run_trajectories(pool, realizations, |g| {
        let r = sample_realization(&spec, rng_stream(seed, circuit_stream(g)));
        let mut rng = rng_stream(seed, aux_stream(g));
        let s = particles::sample_p(&r, &a_sites, lanes, &mut rng);
        s.alive
            .iter()
            .map(|&a| (a > 0).then(|| -((a as f64 / s.total as f64).log2())))
            .collect::<Vec<_>>()
    });
    let mut series = EnsembleSeries::new(Axis::Time, (0..=t).map(|x| x as f64).collect());
    for row in rows {
        for (i, v) in row.into_iter().enumerate() {
            if let Some(v) = v {
                series.push_at(i, v);
            }
        }
    }
    series
}

/// −log₂K(t) ensemble for the single-species basis method at a fixed cut.
pub fn k_growth_series(
    l: usize,
    l_a: usize,
    p: f64,
    t: usize,
    samples: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> EnsembleSeries {
    let spec = CircuitSpec::new(Family::Entangle, l, p, t, seed);
    let rows = run_trajectories(pool, samples, |g| {
        let r = sample_realization(&spec, rng_stream(seed, circuit_stream(g)));
        particles::single_species_k(&r, l_a)
            .iter()
            .map(|&v| v as f64)
            .collect::<Vec<_>>()
    });
    let mut series = EnsembleSeries::new(Axis::Time, (0..=t).map(|x| x as f64).collect());
    for row in &rows {
        series.accumulate(row);
    }
    series
}

/// Steady −log₂K across cut sizes at fixed ratio L_A/L = 1/2; each point
/// runs to t = t_cap·L_A or until the basis dies out.
pub fn k_steady_by_size(
    l_a_values: &[usize],
    p: f64,
    t_cap: usize,
    samples: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> EnsembleSeries {
    let vals = run_trajectories(pool, l_a_values.len() * samples, |g| {
        let l_a = l_a_values[g / samples];
        let spec = CircuitSpec::new(Family::Entangle, 2 * l_a, p, t_cap * l_a, seed);
        let r = sample_realization(&spec, rng_stream(seed, circuit_stream(g)));
        let series = particles::single_species_k(&r, l_a);
        (g / samples, *series.last().unwrap() as f64)
    });
    let xs = l_a_values.iter().map(|&v| v as f64).collect();
    let mut series = EnsembleSeries::new(Axis::SubsystemSize, xs);
    for (si, v) in vals {
        series.push_at(si, v);
    }
    series
}

/// Steady −log₂M across cut sizes at fixed ratio L_A/L = 1/2, on the open
/// chain so the species boundary stays one-sided.
pub fn m_steady_by_size(
    l_a_values: &[usize],
    p: f64,
    t_cap: usize,
    samples: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> EnsembleSeries {
    let vals = run_trajectories(pool, l_a_values.len() * samples, |g| {
        let l_a = l_a_values[g / samples];
        let spec = CircuitSpec::new(Family::Entangle, 2 * l_a, p, t_cap * l_a, seed)
            .with_boundary(Boundary::Open);
        let r = sample_realization(&spec, rng_stream(seed, circuit_stream(g)));
        let series = particles::approx_two_species_m(&r, l_a);
        (g / samples, *series.last().unwrap() as f64)
    });
    let xs = l_a_values.iter().map(|&v| v as f64).collect();
    let mut series = EnsembleSeries::new(Axis::SubsystemSize, xs);
    for (si, v) in vals {
        series.push_at(si, v);
    }
    series
}

/// Endpoint-walk boundary counts N(t).
pub fn rwre_series(
    l_a: usize,
    horizon: usize,
    samples: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> EnsembleSeries {
    let rows = run_trajectories(pool, samples, |g| {
        let mut rng = rng_stream(seed, aux_stream(g));
        particles::rwre_run(l_a, horizon, &mut rng)
            .iter()
            .map(|&v| v as f64)
            .collect::<Vec<_>>()
    });
    let mut series = EnsembleSeries::new(Axis::Time, (0..=horizon).map(|x| x as f64).collect());
    for row in &rows {
        series.accumulate(row);
    }
    series
}

// ===== final-time cut survey =====

/// Sampled subsystem-entropy survey over cut positions, with the factorized
/// comparison −log₂P_Y + rank₂H(T).
pub struct SurveyStats {
    pub cuts: Vec<usize>,
    /// −log₂ of the X-gone survivor fraction per cut (the S_A^{(2)} estimate).
    pub s1: EnsembleSeries,
    /// −log₂ of the Y-gone survivor fraction plus the basis rank, per cut.
    pub y_q: EnsembleSeries,
    /// Realizations skipped per cut because no lane satisfied the event.
    pub undersampled_s1: Vec<u64>,
    pub undersampled_y: Vec<u64>,
}

pub fn survey_stats(
    l: usize,
    p: f64,
    t: usize,
    cuts: &[usize],
    lanes: usize,
    realizations: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> SurveyStats {
    let spec = CircuitSpec::new(Family::Purify, l, p, t, seed);
    struct Row {
        s1: Vec<Option<f64>>,
        y_q: Vec<Option<f64>>,
    }
    let rows = run_trajectories(pool, realizations, |g| {
        let r = sample_realization(&spec, rng_stream(seed, circuit_stream(g)));
        let mut rng = rng_stream(seed, aux_stream(g));
        let survey = particles::survey_cuts(&r, cuts, lanes, &mut rng);
        let rank = rank2(&particles::purification_ranks(&r, false).final_basis);
        let frac = |count: u64| -> Option<f64> {
            (count > 0).then(|| -((count as f64 / survey.total as f64).log2()))
        };
        Row {
            s1: survey.x_gone.iter().map(|&c| frac(c)).collect(),
            y_q: survey
                .y_gone
                .iter()
                .map(|&c| frac(c).map(|v| v + rank as f64))
                .collect(),
        }
    });
    let xs: Vec<f64> = cuts.iter().map(|&c| c as f64).collect();
    let mut s1 = EnsembleSeries::new(Axis::SubsystemSize, xs.clone());
    let mut y_q = EnsembleSeries::new(Axis::SubsystemSize, xs);
    let mut undersampled_s1 = vec![0u64; cuts.len()];
    let mut undersampled_y = vec![0u64; cuts.len()];
    for row in rows {
        for (i, v) in row.s1.iter().enumerate() {
            match v {
                Some(v) => s1.push_at(i, *v),
                None => undersampled_s1[i] += 1,
            }
        }
        for (i, v) in row.y_q.iter().enumerate() {
            match v {
                Some(v) => y_q.push_at(i, *v),
                None => undersampled_y[i] += 1,
            }
        }
    }
    SurveyStats {
        cuts: cuts.to_vec(),
        s1,
        y_q,
        undersampled_s1,
        undersampled_y,
    }
}

// ===== cross-engine check =====

/// Outcome of driving the enumeration engine and the stabilizer engine
/// through identical realizations: the entropy identity and the signed
/// pair-sum identity must hold exactly; the unsigned survival count only
/// approximates the purity, so its gap is reported rather than asserted.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub realizations: usize,
    pub entropy_checks: u64,
    pub entropy_mismatches: u64,
    pub signed_identity_mismatches: u64,
    pub survival_checks: u64,
    /// max over checks of |log₂(N(t)/2^L) − log₂ purity|.
    pub max_survival_log2_gap: f64,
    pub mean_survival_log2_gap: f64,
}

/// Exhaustive small-size comparison of the three engines on shared
/// realizations, all measurement projections taken deterministically.
pub fn oracle_check(
    l_values: &[usize],
    realizations: usize,
    p: f64,
    t_factor: usize,
    seed: u64,
) -> OracleReport {
    let mut report = OracleReport {
        realizations: l_values.len() * realizations,
        entropy_checks: 0,
        entropy_mismatches: 0,
        signed_identity_mismatches: 0,
        survival_checks: 0,
        max_survival_log2_gap: 0.0,
        mean_survival_log2_gap: 0.0,
    };
    let mut gap_sum = 0.0;
    for (si, &l) in l_values.iter().enumerate() {
        let t = t_factor * l;
        let spec = CircuitSpec::new(Family::Entangle, l, p, t, seed);
        let half: Vec<usize> = (0..l / 2).collect();
        for i in 0..realizations {
            let g = si * realizations + i;
            let r = sample_realization(&spec, rng_stream(seed, circuit_stream(g)));
            let mut tab = initial_tableau(&spec);
            let mut state = PhaseState::plus_x(l);
            for (k, step) in r.steps.iter().enumerate() {
                for layer in step {
                    tab.apply_layer(layer);
                    state.apply_layer(layer);
                }
                for cut in 1..l {
                    let region: Vec<usize> = (0..cut).collect();
                    report.entropy_checks += 1;
                    if tab.entropy(&region) as u32 != entropy_exact(&state, &region) {
                        report.entropy_mismatches += 1;
                    }
                }
                // Survival counting vs the true purity: truncate the
                // realization after k+1 steps so the dual runs over exactly
                // the layers applied so far.
                let trunc = CircuitRealization {
                    prologue: r.prologue.clone(),
                    steps: r.steps[..=k].to_vec(),
                    nqubits: r.nqubits,
                    nsites: r.nsites,
                };
                let counts = exhaustive_pair_count(&trunc, &half);
                let n_frac = *counts.n.last().unwrap() as f64 / counts.total as f64;
                let purity = purity_swap(&state, &half).as_f64();
                let gap = (n_frac.log2() - purity.log2()).abs();
                report.survival_checks += 1;
                gap_sum += gap;
                report.max_survival_log2_gap = report.max_survival_log2_gap.max(gap);
            }
            // Signed pair sum: exact dyadic identity with the final purity.
            let (signed, den) = exhaustive_signed_pair_sum(&r, &half);
            let dyadic = purity_swap(&state, &half);
            let lhs = i128::from(signed) << dyadic.log2_den;
            let rhs = dyadic.num as i128 * i128::from(den);
            if lhs != rhs {
                report.signed_identity_mismatches += 1;
            }
        }
    }
    if report.survival_checks > 0 {
        report.mean_survival_log2_gap = gap_sum / report.survival_checks as f64;
    }
    report
}

// ===== tests =====
