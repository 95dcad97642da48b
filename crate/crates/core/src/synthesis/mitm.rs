//! Meet-in-the-middle search over Matsumoto–Amano words.
//!
//! A word of T-count t > h splits as L·R with L a bare syllable string of
//! T-count t − h and R a table word (T-count ≤ h, Clifford tail included).
//! For each L we look up R ≈ L†·target in a grid over the imaginary part of
//! the canonical quaternion.

use super::quat::Quat;
use super::SynthError;
use crate::cliffordt::{
    clifford_group, concat, eval_exact, ma_count, syllable_seq_count, syllables_at, GateWord, Syllable, N_CLIFFORD,
};
use rustc_hash::FxHashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub const MAX_TABLE_DEPTH: usize = 15;

type CellKey = (i32, i32, i32);

struct Table {
    depth: usize,
    quats: Arc<Vec<Quat>>,
}

struct GridIndex {
    quats: Arc<Vec<Quat>>,
    inv_cell: f64,
    perm: Vec<u32>,
    cells: FxHashMap<CellKey, (u32, u32)>,
}

#[derive(Default)]
struct Cache {
    table: Option<Table>,
    indices: FxHashMap<(usize, i32), Arc<GridIndex>>,
}

fn cache() -> &'static Mutex<Cache> {
    static C: OnceLock<Mutex<Cache>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(Cache::default()))
}

fn syllable_quats() -> &'static [Quat; 3] {
    static Q: OnceLock<[Quat; 3]> = OnceLock::new();
    Q.get_or_init(|| [Syllable::T, Syllable::HT, Syllable::SHT].map(|s| Quat::from_unitary(&s.float())))
}

fn clifford_quats() -> &'static Vec<Quat> {
    static Q: OnceLock<Vec<Quat>> = OnceLock::new();
    Q.get_or_init(|| (0..N_CLIFFORD).map(|c| Quat::from_unitary(&clifford_group().rep(c).to_float())).collect())
}

fn seq_quat(syl: &[Syllable]) -> Quat {
    let sq = syllable_quats();
    syl.iter().fold(Quat::ONE, |acc, s| acc.mul(&sq[*s as usize]))
}

/// Appends the table entries of T-count exactly `t`, given the syllable
/// quaternions of T-count t − 1 (in enumeration order).
fn extend_level(out: &mut Vec<Quat>, prev: &[Quat], t: usize) -> Vec<Quat> {
    let sq = syllable_quats();
    let seqs: Vec<Quat> = match t {
        0 => vec![Quat::ONE],
        1 => sq.to_vec(),
        _ => (0..syllable_seq_count(t) as usize)
            .map(|m| prev[m >> 1].mul(&sq[if m & 1 == 0 { 1 } else { 2 }]))
            .collect(),
    };
    let cq = clifford_quats();
    out.reserve(seqs.len() * N_CLIFFORD);
    for s in &seqs {
        for c in cq {
            out.push(s.mul(c).canonical());
        }
    }
    seqs
}

fn build_table(depth: usize) -> Vec<Quat> {
    let mut out = Vec::with_capacity(ma_count(depth, false) as usize);
    let mut prev = Vec::new();
    for t in 0..=depth {
        prev = extend_level(&mut out, &prev, t);
    }
    out
}

fn table_quats(c: &mut Cache, depth: usize) -> Arc<Vec<Quat>> {
    match &c.table {
        Some(t) if t.depth >= depth => t.quats.clone(),
        _ => {
            let quats = Arc::new(build_table(depth));
            c.table = Some(Table { depth, quats: quats.clone() });
            c.indices.clear();
            quats
        }
    }
}

fn cell_of(q: &Quat, inv_cell: f64) -> CellKey {
    (
        (q.0[1] * inv_cell).floor() as i32,
        (q.0[2] * inv_cell).floor() as i32,
        (q.0[3] * inv_cell).floor() as i32,
    )
}

impl GridIndex {
    fn build(quats: Arc<Vec<Quat>>, n: usize, cell_exp: i32) -> GridIndex {
        let inv_cell = (cell_exp as f64).exp2();
        let mut keyed: Vec<(CellKey, u32)> = (0..n).map(|i| (cell_of(&quats[i], inv_cell), i as u32)).collect();
        keyed.sort_unstable();
        let mut cells = FxHashMap::default();
        let mut start = 0usize;
        while start < keyed.len() {
            let key = keyed[start].0;
            let mut end = start + 1;
            while end < keyed.len() && keyed[end].0 == key {
                end += 1;
            }
            cells.insert(key, (start as u32, end as u32));
            start = end;
        }
        let perm = keyed.into_iter().map(|(_, i)| i).collect();
        GridIndex { quats, inv_cell, perm, cells }
    }

    /// Calls `f(index, dist)` for every entry within channel distance `eps` of `q`.
    fn query(&self, q: &Quat, rho: f64, eps: f64, mut f: impl FnMut(usize, f64)) {
        let q = q.canonical();
        self.scan(&q, eps, &mut f);
        if q.0[0] <= rho {
            self.scan(&q.neg(), eps, &mut f);
        }
    }

    fn scan(&self, q: &Quat, eps: f64, f: &mut impl FnMut(usize, f64)) {
        let (x, y, z) = cell_of(q, self.inv_cell);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(&(s, e)) = self.cells.get(&(x + dx, y + dy, z + dz)) {
                        for &i in &self.perm[s as usize..e as usize] {
                            let d = self.quats[i as usize].dist(q);
                            if d <= eps {
                                f(i as usize, d);
                            }
                        }
                    }
                }
            }
        }
    }
}

fn grid_index(depth: usize, cell_exp: i32) -> Arc<GridIndex> {
    let mut c = cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(ix) = c.indices.get(&(depth, cell_exp)) {
        return ix.clone();
    }
    let quats = table_quats(&mut c, depth);
    let n = ma_count(depth, false) as usize;
    let ix = Arc::new(GridIndex::build(quats, n, cell_exp));
    c.indices.insert((depth, cell_exp), ix.clone());
    ix
}

/// Decodes a table position into its normal-form word.
pub fn table_word(index: usize) -> GateWord {
    let mut t = 0;
    while index as u64 >= ma_count(t, false) {
        t += 1;
    }
    let base = if t == 0 { 0 } else { ma_count(t - 1, false) as usize };
    let off = index - base;
    GateWord { syllables: syllables_at(t, (off / N_CLIFFORD) as u64), clifford: (off % N_CLIFFORD) as u8, omega_exp: 0 }
}

/// Table depth used for accuracy `eps`: about half the expected T-count.
pub fn default_depth(eps: f64) -> usize {
    let t_est = 3.0 * (1.0 / eps).log2() - 4.93;
    ((t_est / 2.0).ceil() as i64 + 2).clamp(4, MAX_TABLE_DEPTH as i64) as usize
}

/// Chord radius in R⁴ equivalent to channel distance `eps`.
fn chord_radius(eps: f64) -> f64 {
    (2.0 - 2.0 * (1.0 - eps * eps).max(0.0).sqrt()).sqrt()
}

/// Channel distance of a word to the target quaternion, with the word
/// evaluated through exact ring arithmetic.
pub fn verified_distance(word: &GateWord, target: &Quat) -> f64 {
    Quat::from_unitary(&eval_exact(word).to_float()).dist(target)
}

#[derive(Clone, Debug)]
pub struct MitmHit {
    pub word: GateWord,
    pub dist: f64,
}

pub fn search(target: &Quat, eps: f64, budget: usize, depth: Option<usize>) -> Result<MitmHit, SynthError> {
    let h = depth.unwrap_or_else(|| default_depth(eps)).min(budget).min(MAX_TABLE_DEPTH);
    let rho = chord_radius(eps);
    let cell_exp = (1.0 / rho).log2().floor() as i32;
    let index = grid_index(h, cell_exp);
    // Float filter is slightly loose; the exact check decides.
    let filter = eps * (1.0 + 1e-9) + 1e-13;

    let mut best: Option<(usize, f64, usize, GateWord)> = None;
    index.query(target, rho, filter, |i, _| {
        let w = table_word(i);
        let d = verified_distance(&w, target);
        if d <= eps {
            let key = (w.tcount(), d, i);
            if best.as_ref().map_or(true, |b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                best = Some((key.0, key.1, key.2, w));
            }
        }
    });
    if let Some((_, d, _, w)) = best {
        return Ok(MitmHit { word: w, dist: d });
    }

    for tl in 1..=budget.saturating_sub(h) {
        let mut best: Option<(usize, f64, u64, usize, GateWord)> = None;
        for m in 0..syllable_seq_count(tl) {
            let syl = syllables_at(tl, m);
            let query = seq_quat(&syl).conj().mul(target);
            index.query(&query, rho, filter, |i, _| {
                let left = GateWord { syllables: syl.clone(), clifford: 0, omega_exp: 0 };
                let w = concat(&left, &table_word(i)).dephased();
                let d = verified_distance(&w, target);
                if d <= eps {
                    let key = (w.tcount(), d, m, i);
                    if best.as_ref().map_or(true, |b| (key.0, key.1, key.2, key.3) < (b.0, b.1, b.2, b.3)) {
                        best = Some((key.0, key.1, key.2, key.3, w));
                    }
                }
            });
        }
        if let Some((_, d, _, _, w)) = best {
            return Ok(MitmHit { word: w, dist: d });
        }
    }
    Err(SynthError::BudgetExceeded { eps, budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cliffordt::enumerate_ma_dephased;

    #[test]
    fn table_order_matches_enumerator() {
        let quats = build_table(3);
        for (i, w) in enumerate_ma_dephased(3).enumerate() {
            assert_eq!(table_word(i), w);
            let q = Quat::from_unitary(&eval_exact(&w).to_float());
            assert!(quats[i].dist(&q) < 1e-13);
        }
    }

    #[test]
    fn exact_target_found_at_its_tcount() {
        let w = crate::cliffordt::ma_normalize("THTSHTHTSHTH").unwrap();
        let target = Quat::from_unitary(&eval_exact(&w).to_float());
        let hit = search(&target, 1e-6, 20, Some(4)).unwrap();
        assert_eq!(hit.word.tcount(), w.tcount());
        assert!(hit.dist < 1e-12);
    }

    #[test]
    fn chord_radius_bounds_projection() {
        let eps: f64 = 1e-3;
        let rho = chord_radius(eps);
        assert!(rho >= eps && rho < 1.01 * eps);
    }
}
