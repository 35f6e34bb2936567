//! Bit-packed GF(2) linear algebra: vectors, matrices, rank, restricted
//! kernels, and a sliding-window rank scanner for cyclic region scans.
//!
//! Bit index 0 is the first site. All row vectors keep tail bits (past `len`)
//! zeroed so word-level ops never see garbage.

const WORD_BITS: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

// ===== BitVec =====

/// Fixed-length bit vector packed into u64 words, LSB-first within a word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; words_for(len)],
            len,
        }
    }

    /// Unit vector with a single bit set at `idx`.
    pub fn unit(len: usize, idx: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(idx);
        v
    }

    /// Parses "0110..." with char position = bit index. Test/debug helper.
    pub fn from_str01(s: &str) -> Self {
        let mut v = Self::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => v.set(i),
                '0' => {}
                _ => panic!("expected 0/1, got {c:?}"),
            }
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] &= !(1 << (i % WORD_BITS));
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    #[inline]
    pub fn assign(&mut self, i: usize, value: bool) {
        if value {
            self.set(i)
        } else {
            self.clear(i)
        }
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= *b;
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Lowest set bit index, if any.
    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD_BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rem = w;
            std::iter::from_fn(move || {
                if rem == 0 {
                    return None;
                }
                let b = rem.trailing_zeros() as usize;
                rem &= rem - 1;
                Some(wi * WORD_BITS + b)
            })
        })
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    /// Clears all bits whose word-mask bit is set. `mask` must have the same
    /// word count.
    pub fn clear_masked(&mut self, mask: &[u64]) {
        debug_assert_eq!(self.words.len(), mask.len());
        for (w, m) in self.words.iter_mut().zip(mask.iter()) {
            *w &= !m;
        }
    }

    /// True if any bit under the word mask is set.
    pub fn intersects_mask(&self, mask: &[u64]) -> bool {
        self.words.iter().zip(mask.iter()).any(|(w, m)| w & m != 0)
    }
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

// ===== Window =====

/// Contiguous column window `[start, start+len)` taken modulo `ncols`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    start: usize,
    len: usize,
    ncols: usize,
}

impl Window {
    pub fn new(start: usize, len: usize, ncols: usize) -> Self {
        assert!(len <= ncols, "window longer than the column count");
        assert!(start < ncols.max(1), "window start out of range");
        Window { start, len, ncols }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Columns in window order (wrapping past ncols).
    pub fn cols(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |i| (self.start + i) % self.ncols)
    }

    pub fn contains(&self, col: usize) -> bool {
        let rel = (col + self.ncols - self.start) % self.ncols;
        rel < self.len
    }

    /// The complementary window; under wrap the complement of a contiguous
    /// window is contiguous.
    pub fn complement(&self) -> Window {
        Window {
            start: (self.start + self.len) % self.ncols,
            len: self.ncols - self.len,
            ncols: self.ncols,
        }
    }

    /// Word mask with window bits set, sized for vectors of length `ncols`.
    pub fn to_mask(&self) -> Vec<u64> {
        let mut mask = vec![0u64; words_for(self.ncols)];
        for c in self.cols() {
            mask[c / WORD_BITS] |= 1 << (c % WORD_BITS);
        }
        mask
    }
}

// ===== BitMatrix =====

/// Row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitVec>,
    ncols: usize,
}

impl BitMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        BitMatrix {
            rows: vec![BitVec::zeros(ncols); nrows],
            ncols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| BitVec::unit(n, i)).collect();
        BitMatrix { rows, ncols: n }
    }

    pub fn from_rows(rows: Vec<BitVec>, ncols: usize) -> Self {
        for r in &rows {
            assert_eq!(r.len(), ncols);
        }
        BitMatrix { rows, ncols }
    }

    /// Rows parsed from "0101"-style strings. Test/debug helper.
    pub fn from_str_rows(rows: &[&str]) -> Self {
        assert!(!rows.is_empty());
        let ncols = rows[0].len();
        Self::from_rows(rows.iter().map(|s| BitVec::from_str01(s)).collect(), ncols)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut BitVec {
        &mut self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [BitVec] {
        &mut self.rows
    }

    pub fn push_row(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.ncols);
        self.rows.push(row);
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.ncols, self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                t.rows[c].set(i);
            }
        }
        t
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in &self.rows {
            writeln!(f, "{row:?}")?;
        }
        Ok(())
    }
}

// ===== rank / kernel / window ops =====

/// GF(2) rank by echelon insertion.
pub fn rank2(m: &BitMatrix) -> usize {
    let mut basis: Vec<Option<BitVec>> = vec![None; m.ncols()];
    let mut rank = 0;
    for row in m.rows() {
        if insert_into_basis(&mut basis, row.clone()) {
            rank += 1;
        }
    }
    rank
}

/// Reduces `v` against `basis` (indexed by pivot column); inserts and returns
/// true if independent.
fn insert_into_basis(basis: &mut [Option<BitVec>], mut v: BitVec) -> bool {
    while let Some(p) = v.first_one() {
        match &basis[p] {
            Some(b) => v.xor_assign(b),
            None => {
                basis[p] = Some(v);
                return true;
            }
        }
    }
    false
}

/// Rank of every column-prefix submatrix, reported per group of
/// `cols_per_group` columns: entry k is the rank of the first
/// (k+1)*cols_per_group columns. One elimination pass serves all prefixes.
pub fn prefix_column_ranks(m: &BitMatrix, cols_per_group: usize) -> Vec<usize> {
    assert!(cols_per_group > 0 && m.ncols() % cols_per_group == 0);
    let mut rows = m.rows().to_vec();
    let mut rank = 0;
    let mut out = Vec::with_capacity(m.ncols() / cols_per_group);
    for c in 0..m.ncols() {
        if let Some(i) = (rank..rows.len()).find(|&i| rows[i].get(c)) {
            rows.swap(rank, i);
            let pivot = rows[rank].clone();
            for row in rows[rank + 1..].iter_mut() {
                if row.get(c) {
                    row.xor_assign(&pivot);
                }
            }
            rank += 1;
        }
        if (c + 1) % cols_per_group == 0 {
            out.push(rank);
        }
    }
    out
}

/// Eliminates rows against the window columns: pivots are chosen only among
/// window columns. Returns the surviving rows (every survivor has zero
/// support on the window; zero rows are retained) and the number of rows
/// eliminated, which equals the rank of the window-restricted submatrix.
///
/// The survivors span exactly the row-space vectors with zero window support.
pub fn kernel_restricted(m: &BitMatrix, window: &Window) -> (BitMatrix, usize) {
    let mut rows = m.rows().to_vec();
    let mut alive: Vec<bool> = vec![true; rows.len()];
    let mut eliminated = 0;
    for c in window.cols() {
        let Some(pivot) = (0..rows.len()).find(|&r| alive[r] && rows[r].get(c)) else {
            continue;
        };
        alive[pivot] = false;
        eliminated += 1;
        let pivot_row = rows[pivot].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if alive[r] && row.get(c) {
                row.xor_assign(&pivot_row);
            }
        }
    }
    let survivors: Vec<BitVec> = rows
        .into_iter()
        .zip(alive)
        .filter_map(|(r, keep)| keep.then_some(r))
        .collect();
    (BitMatrix::from_rows(survivors, m.ncols()), eliminated)
}

/// Copy of `m` with the window columns cleared in every row.
pub fn zero_window(m: &BitMatrix, window: &Window) -> BitMatrix {
    let mask = window.to_mask();
    let mut out = m.clone();
    for row in out.rows_mut() {
        row.clear_masked(&mask);
    }
    out
}

// ===== sliding cyclic window rank =====

/// Rank queries over contiguous cyclic windows of a fixed row sequence.
///
/// Rows are grouped by site (`rows_per_site` rows each). After an O(n^2)-ish
/// build, `rank(start, len)` answers the GF(2) rank of the rows of any cyclic
/// site window in O(log n), replacing one Gaussian elimination per window.
///
/// Internally: insert the doubled row sequence into a basis that keeps, per
/// pivot, the vector with the newest timestamp; then rank of rows [i, j) =
/// #(basis timestamps >= i) in the snapshot taken after row j-1.
pub struct CyclicWindowRank {
    snaps: Vec<Vec<u32>>,
    rows_per_site: usize,
    nsites: usize,
}

impl CyclicWindowRank {
    /// `site_rows[s]` holds the rows of site `s`, each of equal bit length.
    pub fn build(site_rows: &[Vec<BitVec>]) -> Self {
        let nsites = site_rows.len();
        assert!(nsites > 0);
        let rows_per_site = site_rows[0].len();
        assert!(site_rows.iter().all(|r| r.len() == rows_per_site));
        let veclen = site_rows[0]
            .first()
            .map(|v| v.len())
            .unwrap_or(0);

        let total = 2 * nsites * rows_per_site;
        let mut slots: Vec<Option<(BitVec, u32)>> = vec![None; veclen];
        let mut live_ts: Vec<u32> = Vec::new();
        let mut snaps: Vec<Vec<u32>> = Vec::with_capacity(total);
        for j in 0..total {
            let site = (j / rows_per_site) % nsites;
            let within = j % rows_per_site;
            let v = site_rows[site][within].clone();
            Self::insert(&mut slots, &mut live_ts, v, j as u32);
            let mut snap = live_ts.clone();
            snap.sort_unstable();
            snaps.push(snap);
        }
        CyclicWindowRank {
            snaps,
            rows_per_site,
            nsites,
        }
    }

    fn insert(slots: &mut [Option<(BitVec, u32)>], live_ts: &mut Vec<u32>, v: BitVec, ts: u32) {
        let mut v = v;
        let mut ts = ts;
        loop {
            let Some(p) = v.first_one() else {
                return;
            };
            match slots[p].take() {
                None => {
                    slots[p] = Some((v, ts));
                    live_ts.push(ts);
                    return;
                }
                Some((mut w, mut s)) => {
                    if s < ts {
                        // Keep the newer vector at this pivot; keep reducing
                        // the displaced older one. Spans are preserved.
                        std::mem::swap(&mut w, &mut v);
                        std::mem::swap(&mut s, &mut ts);
                        let idx = live_ts.iter().position(|&t| t == ts).unwrap();
                        live_ts[idx] = s;
                    }
                    v.xor_assign(&w);
                    slots[p] = Some((w, s));
                }
            }
        }
    }

    pub fn nsites(&self) -> usize {
        self.nsites
    }

    /// Rank of the rows of sites `[start, start+len)` mod nsites.
    pub fn rank(&self, start: usize, len: usize) -> usize {
        assert!(len <= self.nsites);
        assert!(start < self.nsites);
        if len == 0 {
            return 0;
        }
        let lo = (start * self.rows_per_site) as u32;
        let hi_row = (start + len) * self.rows_per_site - 1;
        let snap = &self.snaps[hi_row];
        // count timestamps >= lo
        let pos = snap.partition_point(|&t| t < lo);
        snap.len() - pos
    }
}

// ===== tests =====

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::SmallRng;
    use rand::{Rng, SeedableRng};

    /// Naive fraction-free Gaussian elimination over bool rows.
    fn naive_rank(rows: &[Vec<bool>]) -> usize {
        let mut rows: Vec<Vec<bool>> = rows.to_vec();
        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut rank = 0;
        for c in 0..ncols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) else {
                continue;
            };
            rows.swap(rank, p);
            for r in 0..rows.len() {
                if r != rank && rows[r][c] {
                    for k in 0..ncols {
                        rows[r][k] ^= rows[rank][k];
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    fn random_matrix(rng: &mut SmallRng, nrows: usize, ncols: usize, density: f64) -> BitMatrix {
        let mut m = BitMatrix::zeros(nrows, ncols);
        for r in 0..nrows {
            for c in 0..ncols {
                if rng.random_bool(density) {
                    m.row_mut(r).set(c);
                }
            }
        }
        m
    }

    fn to_bools(m: &BitMatrix) -> Vec<Vec<bool>> {
        m.rows()
            .iter()
            .map(|r| (0..m.ncols()).map(|c| r.get(c)).collect())
            .collect()
    }

    /// Row-span as a set of packed u64 states; only for ncols <= 16, nrows <= 14.
    fn span_set(m: &BitMatrix) -> std::collections::HashSet<u64> {
        assert!(m.ncols() <= 16 && m.nrows() <= 14);
        let pack = |v: &BitVec| -> u64 {
            let mut x = 0u64;
            for c in v.ones() {
                x |= 1 << c;
            }
            x
        };
        let rows: Vec<u64> = m.rows().iter().map(pack).collect();
        let mut set = std::collections::HashSet::new();
        for combo in 0u32..(1 << rows.len()) {
            let mut acc = 0u64;
            for (i, r) in rows.iter().enumerate() {
                if combo >> i & 1 == 1 {
                    acc ^= r;
                }
            }
            set.insert(acc);
        }
        set
    }

    #[test]
    fn bitvec_basics_across_word_boundaries() {
        let mut v = BitVec::zeros(130);
        v.set(0);
        v.set(63);
        v.set(64);
        v.set(129);
        assert!(v.get(0) && v.get(63) && v.get(64) && v.get(129));
        assert!(!v.get(1) && !v.get(128));
        assert_eq!(v.count_ones(), 4);
        assert_eq!(v.first_one(), Some(0));
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        v.flip(0);
        assert_eq!(v.first_one(), Some(63));
        v.clear(63);
        v.clear(64);
        v.clear(129);
        assert!(v.is_zero());
    }

    #[test]
    fn bitvec_xor_assign() {
        let a = BitVec::from_str01("1100101");
        let mut b = BitVec::from_str01("1010011");
        b.xor_assign(&a);
        assert_eq!(b, BitVec::from_str01("0110110"));
    }

    #[test]
    fn window_wrap_and_complement() {
        let w = Window::new(6, 4, 8);
        assert_eq!(w.cols().collect::<Vec<_>>(), vec![6, 7, 0, 1]);
        assert!(w.contains(7) && w.contains(0));
        assert!(!w.contains(2) && !w.contains(5));
        let c = w.complement();
        assert_eq!(c.cols().collect::<Vec<_>>(), vec![2, 3, 4, 5]);
        let mask = w.to_mask();
        assert_eq!(mask[0], 0b1100_0011);
    }

    #[test]
    fn rank2_identity_and_zero() {
        for n in [1, 5, 64, 90] {
            assert_eq!(rank2(&BitMatrix::identity(n)), n);
            assert_eq!(rank2(&BitMatrix::zeros(n, n)), 0);
        }
    }

    #[test]
    fn prefix_column_ranks_match_submatrix_ranks() {
        let mut rng = SmallRng::seed_from_u64(11);
        for _ in 0..30 {
            let nrows = rng.random_range(1..20);
            let groups = rng.random_range(1..12);
            let per = rng.random_range(1..4);
            let m = random_matrix(&mut rng, nrows, groups * per, 0.4);
            let prefix = prefix_column_ranks(&m, per);
            assert_eq!(prefix.len(), groups);
            for k in 0..groups {
                // rank of the first (k+1)*per columns, via explicit truncation
                let truncated: Vec<BitVec> = m
                    .rows()
                    .iter()
                    .map(|r| {
                        let mut v = BitVec::zeros((k + 1) * per);
                        for c in 0..(k + 1) * per {
                            if r.get(c) {
                                v.set(c);
                            }
                        }
                        v
                    })
                    .collect();
                let sub = BitMatrix::from_rows(truncated, (k + 1) * per);
                assert_eq!(prefix[k], rank2(&sub));
            }
        }
    }

    #[test]
    fn rank2_dependent_triple() {
        let m = BitMatrix::from_str_rows(&["110", "011", "101"]);
        assert_eq!(rank2(&m), 2);
    }

    #[test]
    fn rank2_matches_naive_oracle_on_random_matrices() {
        let mut rng = SmallRng::seed_from_u64(7);
        for _ in 0..60 {
            let nrows = rng.random_range(1..=64);
            let ncols = rng.random_range(1..=64);
            let density = [0.1, 0.5, 0.9][rng.random_range(0..3)];
            let m = random_matrix(&mut rng, nrows, ncols, density);
            assert_eq!(rank2(&m), naive_rank(&to_bools(&m)));
        }
    }

    #[test]
    fn kernel_restricted_no_support_in_window() {
        let m = BitMatrix::from_str_rows(&["100", "010"]);
        let (surv, elim) = kernel_restricted(&m, &Window::new(2, 1, 3));
        assert_eq!(elim, 0);
        assert_eq!(surv.rows(), m.rows());
    }

    #[test]
    fn kernel_restricted_single_pivot() {
        let m = BitMatrix::from_str_rows(&["011", "001"]);
        let (surv, elim) = kernel_restricted(&m, &Window::new(2, 1, 3));
        assert_eq!(elim, 1);
        assert_eq!(surv.nrows(), 1);
        assert_eq!(surv.row(0), &BitVec::from_str01("010"));
    }

    #[test]
    fn kernel_restricted_full_identity() {
        let m = BitMatrix::identity(3);
        let (surv, elim) = kernel_restricted(&m, &Window::new(0, 3, 3));
        assert_eq!(elim, 3);
        assert_eq!(surv.nrows(), 0);
    }

    #[test]
    fn kernel_restricted_retains_zero_rows() {
        let m = BitMatrix::from_str_rows(&["0000", "1100", "0011"]);
        let (surv, elim) = kernel_restricted(&m, &Window::new(3, 1, 4));
        assert_eq!(elim, 1);
        assert_eq!(surv.nrows(), 2);
        assert!(surv.rows().iter().any(|r| r.is_zero()));
    }

    #[test]
    fn kernel_restricted_span_is_zero_window_subspace() {
        // survivors span == {row-space vectors with zero window support}
        let mut rng = SmallRng::seed_from_u64(11);
        for _ in 0..40 {
            let nrows = rng.random_range(1..=9);
            let ncols = rng.random_range(1..=10);
            let start = rng.random_range(0..ncols);
            let len = rng.random_range(0..=ncols);
            let w = Window::new(start, len, ncols);
            let m = random_matrix(&mut rng, nrows, ncols, 0.5);
            let (surv, elim) = kernel_restricted(&m, &w);
            assert_eq!(surv.nrows() + elim, m.nrows());
            let mask = w.to_mask();
            for r in surv.rows() {
                assert!(!r.intersects_mask(&mask), "survivor touches window");
            }
            let wmask_packed: u64 = w.cols().map(|c| 1u64 << c).sum();
            let expected: std::collections::HashSet<u64> = span_set(&m)
                .into_iter()
                .filter(|v| v & wmask_packed == 0)
                .collect();
            assert_eq!(span_set(&surv), expected);
            // eliminated == rank of window-restricted submatrix
            let restricted = zero_window(&m, &w.complement());
            assert_eq!(elim, rank2(&restricted));
        }
    }

    #[test]
    fn zero_window_empty_is_identity_map() {
        let m = BitMatrix::from_str_rows(&["1011", "0110"]);
        let z = zero_window(&m, &Window::new(0, 0, 4));
        assert_eq!(z.rows(), m.rows());
    }

    #[test]
    fn zero_window_drops_rank_on_identity() {
        let m = BitMatrix::identity(4);
        let z = zero_window(&m, &Window::new(1, 2, 4));
        assert_eq!(rank2(&z), 2);
    }

    #[test]
    fn zero_window_full_gives_zero_rows() {
        let m = BitMatrix::from_str_rows(&["1111"]);
        let z = zero_window(&m, &Window::new(0, 4, 4));
        assert!(z.row(0).is_zero());
    }

    #[test]
    fn zero_window_never_increases_rank() {
        let mut rng = SmallRng::seed_from_u64(3);
        for _ in 0..40 {
            let nrows = rng.random_range(1..=12);
            let ncols = rng.random_range(1..=40);
            let m = random_matrix(&mut rng, nrows, ncols, 0.4);
            let start = rng.random_range(0..ncols);
            let len = rng.random_range(0..=ncols);
            let z = zero_window(&m, &Window::new(start, len, ncols));
            assert!(rank2(&z) <= rank2(&m));
        }
    }

    #[test]
    fn transpose_involution_and_rank_invariance() {
        let mut rng = SmallRng::seed_from_u64(5);
        for _ in 0..20 {
            let nrows = rng.random_range(1..=20);
            let ncols = rng.random_range(1..=20);
            let m = random_matrix(&mut rng, nrows, ncols, 0.5);
            let t = m.transpose();
            assert_eq!(t.transpose(), m);
            assert_eq!(rank2(&t), rank2(&m));
        }
    }

    #[test]
    fn cyclic_window_rank_matches_direct_rank() {
        let mut rng = SmallRng::seed_from_u64(13);
        for trial in 0..30 {
            let nsites = rng.random_range(1..=12);
            let rps = 1 + (trial % 2);
            let veclen = rng.random_range(1..=24);
            let site_rows: Vec<Vec<BitVec>> = (0..nsites)
                .map(|_| {
                    (0..rps)
                        .map(|_| {
                            let mut v = BitVec::zeros(veclen);
                            for c in 0..veclen {
                                if rng.random_bool(0.5) {
                                    v.set(c);
                                }
                            }
                            v
                        })
                        .collect()
                })
                .collect();
            let scan = CyclicWindowRank::build(&site_rows);
            for start in 0..nsites {
                for len in 0..=nsites {
                    let mut rows = Vec::new();
                    for k in 0..len {
                        let s = (start + k) % nsites;
                        rows.extend(site_rows[s].iter().cloned());
                    }
                    let direct = rank2(&BitMatrix::from_rows(rows, veclen));
                    assert_eq!(
                        scan.rank(start, len),
                        direct,
                        "nsites={nsites} rps={rps} start={start} len={len}"
                    );
                }
            }
        }
    }
}
