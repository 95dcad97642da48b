use super::clifford::N_CLIFFORD;
use super::word::{GateWord, Syllable};

/// Number of syllable sequences with exactly `t` syllables.
pub fn syllable_seq_count(t: usize) -> u64 {
    if t == 0 {
        1
    } else {
        3 << (t - 1)
    }
}

/// Number of distinct operators with T-count ≤ t, with or without ω-phases.
pub fn ma_count(t: usize, with_phase: bool) -> u64 {
    let seqs = if t == 0 { 1 } else { 3 * (1u64 << t) - 2 };
    seqs * if with_phase { 192 } else { N_CLIFFORD as u64 }
}

/// The `m`-th syllable sequence of length `t` in lexicographic order
/// (T < HT < SHT).
pub fn syllables_at(t: usize, m: u64) -> Vec<Syllable> {
    if t == 0 {
        return Vec::new();
    }
    let rest_len = t - 1;
    let first = match m >> rest_len {
        0 => Syllable::T,
        1 => Syllable::HT,
        _ => Syllable::SHT,
    };
    let mut out = Vec::with_capacity(t);
    out.push(first);
    for bit in (0..rest_len).rev() {
        out.push(if (m >> bit) & 1 == 0 { Syllable::HT } else { Syllable::SHT });
    }
    out
}

/// Streams every Clifford+T operator with T-count ≤ `t_max` exactly once, ordered
/// by T-count, then syllables, then Clifford class, then phase.
pub struct MaEnumerator {
    t_max: usize,
    with_phase: bool,
    t: usize,
    m: u64,
    syl: Vec<Syllable>,
    clifford: u8,
    phase: u8,
}

impl Iterator for MaEnumerator {
    type Item = GateWord;

    fn next(&mut self) -> Option<GateWord> {
        if self.t > self.t_max {
            return None;
        }
        let out = GateWord { syllables: self.syl.clone(), clifford: self.clifford, omega_exp: self.phase };
        let phases = if self.with_phase { 8 } else { 1 };
        self.phase += 1;
        if self.phase == phases {
            self.phase = 0;
            self.clifford += 1;
            if self.clifford as usize == N_CLIFFORD {
                self.clifford = 0;
                self.m += 1;
                if self.m == syllable_seq_count(self.t) {
                    self.m = 0;
                    self.t += 1;
                }
                if self.t <= self.t_max {
                    self.syl = syllables_at(self.t, self.m);
                }
            }
        }
        Some(out)
    }
}

pub fn enumerate_ma(t_max: usize) -> MaEnumerator {
    MaEnumerator { t_max, with_phase: true, t: 0, m: 0, syl: Vec::new(), clifford: 0, phase: 0 }
}

/// As [`enumerate_ma`] but with one representative per phase class.
pub fn enumerate_ma_dephased(t_max: usize) -> MaEnumerator {
    MaEnumerator { with_phase: false, ..enumerate_ma(t_max) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cliffordt::word::eval_exact;
    use std::collections::HashSet;

    #[test]
    fn closed_form_counts() {
        assert_eq!(ma_count(0, true), 192);
        assert_eq!(ma_count(1, true), 768);
        assert_eq!(ma_count(2, true), 1920);
        assert_eq!(ma_count(2, false), 240);
    }

    #[test]
    fn stream_length_matches_closed_form() {
        for t in 0..=3 {
            assert_eq!(enumerate_ma(t).count() as u64, ma_count(t, true));
            assert_eq!(enumerate_ma_dephased(t).count() as u64, ma_count(t, false));
        }
    }

    #[test]
    fn no_duplicate_operators_t2() {
        let set: HashSet<_> = enumerate_ma(2).map(|w| eval_exact(&w)).collect();
        assert_eq!(set.len() as u64, ma_count(2, true));
    }

    #[test]
    fn order_is_tcount_then_lex() {
        let words: Vec<_> = enumerate_ma_dephased(2).collect();
        assert!(words.windows(2).all(|p| p[0].tcount() <= p[1].tcount()));
        assert_eq!(words[24].syllables, vec![Syllable::T]);
        assert_eq!(words[48].syllables, vec![Syllable::HT]);
        assert_eq!(syllables_at(2, 0), vec![Syllable::T, Syllable::HT]);
        assert_eq!(syllables_at(2, 5), vec![Syllable::SHT, Syllable::SHT]);
    }
}
