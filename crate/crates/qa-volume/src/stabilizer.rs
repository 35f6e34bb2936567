//! Bit-packed stabilizer tableau for the circuit families.
//!
//! Storage is column-major: each qubit owns a fixed range of words in the X
//! and Z bit planes, with the 2n generator rows (destabilizers first, then
//! stabilizers) packed across word bits. Gates touch only their own columns;
//! a measurement adds the pivot row to every anticommuting row with one
//! whole-word XOR per pivot-support column.
//!
//! Sign tracking is optional. The X/Z evolution never depends on signs or
//! outcomes, and every rank/entropy observable is sign-blind, so production
//! runs leave signs off. With signs on, gates update the sign plane wordwise
//! and measurements take a scalar path; that mode exists for exact
//! cross-validation against the dense reference engine at small sizes.

use crate::circuit::{CircuitRealization, Gate, Layer, MeasureEvent};
use crate::gf2::{prefix_column_ranks, rank2, BitMatrix, BitVec};

#[inline]
fn bit_get(col: &[u64], row: usize) -> bool {
    col[row / 64] >> (row % 64) & 1 == 1
}

#[inline]
fn bit_set(col: &mut [u64], row: usize, v: bool) {
    let m = 1u64 << (row % 64);
    if v {
        col[row / 64] |= m;
    } else {
        col[row / 64] &= !m;
    }
}

/// i-exponent of sigma(x1,z1) * sigma(x2,z2), in {-1, 0, 1}.
#[inline]
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, false) => {
            if z2 {
                if x2 { 1 } else { -1 }
            } else {
                0
            }
        }
        (false, true) => {
            if x2 {
                if z2 { -1 } else { 1 }
            } else {
                0
            }
        }
        (true, true) => z2 as i32 - x2 as i32,
    }
}

/// Result of a Z measurement. `value` is the outcome bit (true = the -1
/// eigenvalue was realized): indeterminate projections are forced to the +1
/// outcome; determinate values are known only when signs are tracked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureOutcome {
    pub indeterminate: bool,
    pub value: Option<bool>,
}

/// One generator row as dense bit vectors over qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliRow {
    pub x: BitVec,
    pub z: BitVec,
    pub sign: Option<bool>,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    /// Words per column; rows 0..n are destabilizers, n..2n stabilizers.
    rw: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Option<Vec<u64>>,
}

impl Tableau {
    fn blank(n: usize, track_signs: bool) -> Self {
        assert!(n >= 1);
        let rw = (2 * n).div_ceil(64);
        Tableau {
            n,
            rw,
            x: vec![0; n * rw],
            z: vec![0; n * rw],
            r: track_signs.then(|| vec![0; rw]),
        }
    }

    /// Product state with every site in the +1 eigenstate of X.
    pub fn plus_x(n: usize, track_signs: bool) -> Self {
        let mut t = Self::blank(n, track_signs);
        for q in 0..n {
            bit_set(t.zcol_mut(q), q, true); // destabilizer Z_q
            bit_set(t.xcol_mut(q), n + q, true); // stabilizer X_q
        }
        t
    }

    /// Equal superposition of the two all-X-eigenstate branches: stabilized
    /// by every X_i X_{i+1} and by the global Z string (even parity sector).
    pub fn ghz_x(n: usize, track_signs: bool) -> Self {
        assert!(n >= 2);
        let mut t = Self::blank(n, track_signs);
        for i in 0..n - 1 {
            bit_set(t.xcol_mut(i), n + i, true);
            bit_set(t.xcol_mut(i + 1), n + i, true);
            // destabilizer Z_0..Z_i anticommutes only with X_i X_{i+1}
            for c in 0..=i {
                bit_set(t.zcol_mut(c), i, true);
            }
        }
        for c in 0..n {
            bit_set(t.zcol_mut(c), 2 * n - 1, true);
        }
        bit_set(t.xcol_mut(n - 1), n - 1, true);
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn tracks_signs(&self) -> bool {
        self.r.is_some()
    }

    #[inline]
    fn xcol(&self, q: usize) -> &[u64] {
        &self.x[q * self.rw..(q + 1) * self.rw]
    }

    #[inline]
    fn zcol(&self, q: usize) -> &[u64] {
        &self.z[q * self.rw..(q + 1) * self.rw]
    }

    #[inline]
    fn xcol_mut(&mut self, q: usize) -> &mut [u64] {
        &mut self.x[q * self.rw..(q + 1) * self.rw]
    }

    #[inline]
    fn zcol_mut(&mut self, q: usize) -> &mut [u64] {
        &mut self.z[q * self.rw..(q + 1) * self.rw]
    }

    // ===== gates =====

    pub fn hadamard(&mut self, q: usize) {
        let rw = self.rw;
        if let Some(r) = &mut self.r {
            let xc = &self.x[q * rw..(q + 1) * rw];
            let zc = &self.z[q * rw..(q + 1) * rw];
            for w in 0..rw {
                r[w] ^= xc[w] & zc[w];
            }
        }
        for w in 0..rw {
            std::mem::swap(&mut self.x[q * rw + w], &mut self.z[q * rw + w]);
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        assert_ne!(c, t);
        let rw = self.rw;
        if let Some(r) = &mut self.r {
            let (xc, zc) = (&self.x[c * rw..(c + 1) * rw], &self.z[c * rw..(c + 1) * rw]);
            let (xt, zt) = (&self.x[t * rw..(t + 1) * rw], &self.z[t * rw..(t + 1) * rw]);
            for w in 0..rw {
                r[w] ^= xc[w] & zt[w] & !(xt[w] ^ zc[w]);
            }
        }
        for w in 0..rw {
            let xc = self.x[c * rw + w];
            self.x[t * rw + w] ^= xc;
            let zt = self.z[t * rw + w];
            self.z[c * rw + w] ^= zt;
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        assert_ne!(a, b);
        let rw = self.rw;
        if let Some(r) = &mut self.r {
            let (xa, za) = (&self.x[a * rw..(a + 1) * rw], &self.z[a * rw..(a + 1) * rw]);
            let (xb, zb) = (&self.x[b * rw..(b + 1) * rw], &self.z[b * rw..(b + 1) * rw]);
            for w in 0..rw {
                r[w] ^= xa[w] & xb[w] & (za[w] ^ zb[w]);
            }
        }
        for w in 0..rw {
            let xa = self.x[a * rw + w];
            let xb = self.x[b * rw + w];
            self.z[a * rw + w] ^= xb;
            self.z[b * rw + w] ^= xa;
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        match *gate {
            Gate::Cnot { control, target } => self.cnot(control, target),
            Gate::Cz { a, b } => self.cz(a, b),
            Gate::Cnn {
                control,
                targets: (t1, t2),
            } => {
                self.cnot(control, t1);
                self.cnot(control, t2);
            }
        }
    }

    // ===== measurement =====

    /// Projective Z measurement with the forced-outcome convention: an
    /// indeterminate site collapses onto the +1 eigenstate.
    pub fn measure_z(&mut self, q: usize) -> MeasureOutcome {
        let (n, rw) = (self.n, self.rw);
        let pivot = {
            let xc = self.xcol(q);
            let mut found = None;
            for w in n / 64..rw {
                let mut word = xc[w];
                if w == n / 64 && n % 64 != 0 {
                    word &= !0u64 << (n % 64);
                }
                if word != 0 {
                    found = Some(w * 64 + word.trailing_zeros() as usize);
                    break;
                }
            }
            found
        };
        let Some(p) = pivot else {
            let value = self.r.as_ref().map(|_| self.determinate_outcome(q));
            return MeasureOutcome {
                indeterminate: false,
                value,
            };
        };

        // every row with x_q set, except the pivot, absorbs the pivot row
        let mut tmask = self.xcol(q).to_vec();
        tmask[p / 64] &= !(1u64 << (p % 64));
        let mut px = Vec::new();
        let mut pz = Vec::new();
        let mut pcols = Vec::new();
        for c in 0..n {
            let bx = bit_get(self.xcol(c), p);
            let bz = bit_get(self.zcol(c), p);
            if bx {
                px.push(c);
            }
            if bz {
                pz.push(c);
            }
            if bx || bz {
                pcols.push((c, bx, bz));
            }
        }
        if self.r.is_some() {
            self.rowsum_phases(&tmask, p, &pcols);
        }
        for &c in &px {
            let col = &mut self.x[c * rw..(c + 1) * rw];
            for w in 0..rw {
                col[w] ^= tmask[w];
            }
        }
        for &c in &pz {
            let col = &mut self.z[c * rw..(c + 1) * rw];
            for w in 0..rw {
                col[w] ^= tmask[w];
            }
        }

        // old pivot row becomes the destabilizer partner; pivot row := Z_q
        let partner = p - n;
        for c in 0..n {
            bit_set(self.xcol_mut(c), partner, false);
            bit_set(self.zcol_mut(c), partner, false);
        }
        for &c in &px {
            bit_set(self.xcol_mut(c), partner, true);
            bit_set(self.xcol_mut(c), p, false);
        }
        for &c in &pz {
            bit_set(self.zcol_mut(c), partner, true);
            bit_set(self.zcol_mut(c), p, false);
        }
        bit_set(self.zcol_mut(q), p, true);
        if let Some(r) = &mut self.r {
            let v = bit_get(r, p);
            bit_set(r, partner, v);
            bit_set(r, p, false); // forced +1 outcome
        }
        MeasureOutcome {
            indeterminate: true,
            value: Some(false),
        }
    }

    /// Scalar phase update for the stabilizer target rows before a mass row
    /// addition. Destabilizer rows may anticommute with the pivot, leaving
    /// their sign ill-defined; no observable ever reads it, so those bits are
    /// left untouched.
    fn rowsum_phases(&mut self, tmask: &[u64], p: usize, pcols: &[(usize, bool, bool)]) {
        let n = self.n;
        let rp = bit_get(self.r.as_ref().unwrap(), p) as i32;
        let mut updates = Vec::new();
        for (w, &word) in tmask.iter().enumerate() {
            let mut bits = word;
            if w < n / 64 {
                continue;
            }
            if w == n / 64 && n % 64 != 0 {
                bits &= !0u64 << (n % 64);
            }
            while bits != 0 {
                let t = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let rt = bit_get(self.r.as_ref().unwrap(), t) as i32;
                let mut sum = 2 * rp + 2 * rt;
                for &(c, bx, bz) in pcols {
                    sum += g(bx, bz, bit_get(self.xcol(c), t), bit_get(self.zcol(c), t));
                }
                let m = sum.rem_euclid(4);
                debug_assert!(m % 2 == 0, "commuting row product must square to identity");
                updates.push((t, m == 2));
            }
        }
        let r = self.r.as_mut().unwrap();
        for (t, v) in updates {
            bit_set(r, t, v);
        }
    }

    /// Outcome of a determinate Z measurement, from the product of the
    /// stabilizer rows selected by the destabilizer X bits at q. Scalar.
    fn determinate_outcome(&self, q: usize) -> bool {
        let n = self.n;
        let r = self.r.as_ref().expect("outcome requires sign tracking");
        let mut ax = BitVec::zeros(n);
        let mut az = BitVec::zeros(n);
        let mut exp: i32 = 0;
        for i in 0..n {
            if !bit_get(self.xcol(q), i) {
                continue;
            }
            let row = n + i;
            for c in 0..n {
                let rx = bit_get(self.xcol(c), row);
                let rz = bit_get(self.zcol(c), row);
                if rx || rz {
                    exp += g(rx, rz, ax.get(c), az.get(c));
                }
            }
            for c in 0..n {
                if bit_get(self.xcol(c), row) {
                    ax.flip(c);
                }
                if bit_get(self.zcol(c), row) {
                    az.flip(c);
                }
            }
            exp += 2 * bit_get(r, row) as i32;
        }
        debug_assert!(ax.is_zero() && az.get(q) && az.count_ones() == 1);
        let m = exp.rem_euclid(4);
        debug_assert!(m % 2 == 0);
        m == 2
    }

    /// Composite events: project, then restore the site (or rotate the bond).
    pub fn apply_event(&mut self, event: &MeasureEvent) -> MeasureOutcome {
        match *event {
            MeasureEvent::Site(s) => {
                let out = self.measure_z(s);
                self.hadamard(s);
                out
            }
            MeasureEvent::Pair {
                left,
                right,
                project_left,
            } => {
                let out = self.measure_z(if project_left { left } else { right });
                self.cnot(left, right);
                self.hadamard(left);
                self.cnot(left, right);
                out
            }
        }
    }

    pub fn apply_layer(&mut self, layer: &Layer) {
        match layer {
            Layer::Unitary(gates) => {
                for gate in gates {
                    self.apply_gate(gate);
                }
            }
            Layer::Measure(events) => {
                for event in events {
                    self.apply_event(event);
                }
            }
        }
    }

    pub fn apply_realization(&mut self, r: &CircuitRealization) {
        assert_eq!(self.n, r.nqubits);
        for layer in r.layers() {
            self.apply_layer(layer);
        }
    }

    // ===== observables =====

    /// Stabilizer rows restricted to the given sites: n rows, two columns
    /// (X then Z) per site, in the order given.
    pub fn stab_site_matrix(&self, sites: &[usize]) -> BitMatrix {
        let n = self.n;
        let mut m = BitMatrix::zeros(n, 2 * sites.len());
        for (k, &c) in sites.iter().enumerate() {
            let xc = self.xcol(c);
            let zc = self.zcol(c);
            for i in 0..n {
                if bit_get(xc, n + i) {
                    m.row_mut(i).set(2 * k);
                }
                if bit_get(zc, n + i) {
                    m.row_mut(i).set(2 * k + 1);
                }
            }
        }
        m
    }

    /// Entanglement entropy of the region, in bits.
    pub fn entropy(&self, sites: &[usize]) -> usize {
        rank2(&self.stab_site_matrix(sites)) - sites.len()
    }

    /// Entropy of every prefix of `sites` from one elimination pass:
    /// entry k is the entropy of sites[..=k].
    pub fn entropy_prefix_profile(&self, sites: &[usize]) -> Vec<usize> {
        let ranks = prefix_column_ranks(&self.stab_site_matrix(sites), 2);
        ranks
            .into_iter()
            .enumerate()
            .map(|(k, r)| r - (k + 1))
            .collect()
    }

    /// I(A:B) = S_A + S_B - S_AB for disjoint regions.
    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> i64 {
        debug_assert!(a.iter().all(|s| !b.contains(s)));
        let mut ab = a.to_vec();
        ab.extend_from_slice(b);
        self.entropy(a) as i64 + self.entropy(b) as i64 - self.entropy(&ab) as i64
    }

    /// Sign-blind membership of the Pauli (x, z) in the stabilizer group.
    pub fn contains_stabilizer(&self, x: &BitVec, z: &BitVec) -> bool {
        assert!(x.len() == self.n && z.len() == self.n);
        let sites: Vec<usize> = (0..self.n).collect();
        let mut m = self.stab_site_matrix(&sites);
        let base = rank2(&m);
        let mut target = BitVec::zeros(2 * self.n);
        for c in 0..self.n {
            if x.get(c) {
                target.set(2 * c);
            }
            if z.get(c) {
                target.set(2 * c + 1);
            }
        }
        m.push_row(target);
        rank2(&m) == base
    }

    pub fn stab_row(&self, i: usize) -> PauliRow {
        self.extract_row(self.n + i)
    }

    pub fn destab_row(&self, i: usize) -> PauliRow {
        self.extract_row(i)
    }

    fn extract_row(&self, row: usize) -> PauliRow {
        let mut x = BitVec::zeros(self.n);
        let mut z = BitVec::zeros(self.n);
        for c in 0..self.n {
            if bit_get(self.xcol(c), row) {
                x.set(c);
            }
            if bit_get(self.zcol(c), row) {
                z.set(c);
            }
        }
        PauliRow {
            x,
            z,
            sign: self.r.as_ref().map(|r| bit_get(r, row)),
        }
    }

    /// Panics unless the generator rows form a valid symplectic basis:
    /// stabilizers and destabilizers commute internally, and destab_i
    /// anticommutes exactly with stab_i.
    pub fn assert_valid(&self) {
        let n = self.n;
        let anti = |a: &PauliRow, b: &PauliRow| -> bool {
            let mut acc = 0u32;
            for (wa, wb) in a.x.words().iter().zip(b.z.words()) {
                acc ^= (wa & wb).count_ones();
            }
            for (wa, wb) in a.z.words().iter().zip(b.x.words()) {
                acc ^= (wa & wb).count_ones();
            }
            acc % 2 == 1
        };
        let stabs: Vec<PauliRow> = (0..n).map(|i| self.stab_row(i)).collect();
        let destabs: Vec<PauliRow> = (0..n).map(|i| self.destab_row(i)).collect();
        for i in 0..n {
            for j in 0..n {
                assert!(!anti(&stabs[i], &stabs[j]), "stabilizers must commute");
                assert!(!anti(&destabs[i], &destabs[j]), "destabilizers must commute");
                assert_eq!(
                    anti(&destabs[i], &stabs[j]),
                    i == j,
                    "destabilizer {i} must anticommute exactly with stabilizer {i}"
                );
            }
        }
        let sites: Vec<usize> = (0..n).collect();
        assert_eq!(rank2(&self.stab_site_matrix(&sites)), n, "stabilizer rows must be independent");
    }
}

impl std::fmt::Debug for Tableau {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Tableau(n={})", self.n)?;
        for (label, base) in [("destab", 0), ("stab", self.n)] {
            for i in 0..self.n {
                let row = self.extract_row(base + i);
                write!(f, "  {label}[{i}] ")?;
                if let Some(s) = row.sign {
                    write!(f, "{}", if s { '-' } else { '+' })?;
                }
                for c in 0..self.n {
                    let ch = match (row.x.get(c), row.z.get(c)) {
                        (false, false) => 'I',
                        (true, false) => 'X',
                        (false, true) => 'Z',
                        (true, true) => 'Y',
                    };
                    write!(f, "{ch}")?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

// ===== tests =====
