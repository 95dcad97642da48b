//! The 192-element single-qubit Clifford group ⟨H, S⟩ (24 classes × 8 ω-phases).

use super::exact::ExactUnitary;
use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

pub const N_CLIFFORD: usize = 24;
pub const N_CLIFFORD_PHASED: usize = 192;

/// Left coset of the Z-fixing subgroup that a Clifford belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coset {
    I,
    H,
    SH,
}

/// Element id `8·class + e` stands for ω^e · rep[class].
pub type CliffordId = u8;

pub struct CliffordGroup {
    elems: Vec<ExactUnitary>,
    lookup: HashMap<ExactUnitary, CliffordId>,
    rep_words: Vec<String>,
    mul: Vec<[CliffordId; N_CLIFFORD_PHASED]>,
    // C·T = a·T·C' with a the coset representative.
    t_push: Vec<(Coset, CliffordId)>,
    pub id_h: CliffordId,
    pub id_s: CliffordId,
    pub id_sh: CliffordId,
    pub id_x: CliffordId,
    pub id_y: CliffordId,
    pub id_z: CliffordId,
    pub id_omega: CliffordId,
}

pub fn clifford_group() -> &'static CliffordGroup {
    static G: OnceLock<CliffordGroup> = OnceLock::new();
    G.get_or_init(CliffordGroup::build)
}

impl CliffordGroup {
    fn build() -> Self {
        let gens = [('H', ExactUnitary::h()), ('S', ExactUnitary::s())];
        let mut reps: Vec<(String, ExactUnitary)> = vec![(String::new(), ExactUnitary::identity())];
        let mut seen: HashMap<ExactUnitary, usize> = HashMap::new();
        for e in 0..8 {
            seen.insert(ExactUnitary::identity().mul_omega(e), 0);
        }
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (ch, g) in &gens {
                let m = reps[i].1.mul(g);
                if seen.contains_key(&m) {
                    continue;
                }
                let idx = reps.len();
                for e in 0..8 {
                    seen.insert(m.mul_omega(e), idx);
                }
                let mut w = reps[i].0.clone();
                w.push(*ch);
                reps.push((w, m));
                queue.push_back(idx);
            }
        }
        assert_eq!(reps.len(), N_CLIFFORD, "Clifford closure");

        let mut elems = Vec::with_capacity(N_CLIFFORD_PHASED);
        let mut lookup = HashMap::new();
        for (idx, (_, m)) in reps.iter().enumerate() {
            for e in 0..8u8 {
                let u = m.mul_omega(e as i64);
                lookup.insert(u.clone(), (idx as u8) * 8 + e);
                elems.push(u);
            }
        }
        let find = |u: &ExactUnitary| -> CliffordId { *lookup.get(u).expect("not a Clifford") };

        let mut mul = vec![[0u8; N_CLIFFORD_PHASED]; N_CLIFFORD_PHASED];
        for a in 0..N_CLIFFORD_PHASED {
            for b in 0..N_CLIFFORD_PHASED {
                mul[a][b] = find(&elems[a].mul(&elems[b]));
            }
        }

        let h = ExactUnitary::h();
        let sh = ExactUnitary::s().mul(&h);
        let t = ExactUnitary::t();
        let tdg = t.adjoint();
        let cosets = [(Coset::I, ExactUnitary::identity()), (Coset::H, h.clone()), (Coset::SH, sh.clone())];
        let t_push = elems
            .iter()
            .map(|c| {
                for (kind, a) in &cosets {
                    let k = a.adjoint().mul(c);
                    if k.is_monomial() {
                        return (*kind, find(&tdg.mul(&k).mul(&t)));
                    }
                }
                unreachable!("every Clifford lies in one of three cosets")
            })
            .collect();

        CliffordGroup {
            id_h: find(&h),
            id_s: find(&ExactUnitary::s()),
            id_sh: find(&sh),
            id_x: find(&ExactUnitary::x()),
            id_y: find(&ExactUnitary::y()),
            id_z: find(&ExactUnitary::z()),
            id_omega: find(&ExactUnitary::omega()),
            rep_words: reps.into_iter().map(|(w, _)| w).collect(),
            elems,
            lookup,
            mul,
            t_push,
        }
    }

    pub fn elem(&self, id: CliffordId) -> &ExactUnitary {
        &self.elems[id as usize]
    }

    pub fn id_of(&self, u: &ExactUnitary) -> Option<CliffordId> {
        self.lookup.get(u).copied()
    }

    pub fn mul(&self, a: CliffordId, b: CliffordId) -> CliffordId {
        self.mul[a as usize][b as usize]
    }

    pub fn t_push(&self, c: CliffordId) -> (Coset, CliffordId) {
        self.t_push[c as usize]
    }

    /// Generator string over {H, S} whose product is the class representative.
    pub fn rep_word(&self, class: usize) -> &str {
        &self.rep_words[class]
    }

    pub fn rep(&self, class: usize) -> &ExactUnitary {
        &self.elems[class * 8]
    }

    pub fn id_of_coset(&self, c: Coset) -> CliffordId {
        match c {
            Coset::I => 0,
            Coset::H => self.id_h,
            Coset::SH => self.id_sh,
        }
    }
}

pub fn split_id(id: CliffordId) -> (usize, u8) {
    ((id / 8) as usize, id % 8)
}

pub fn make_id(class: usize, omega: u8) -> CliffordId {
    (class as u8) * 8 + (omega % 8)
}
