use super::clifford::{clifford_group, make_id, split_id, CliffordId, Coset, N_CLIFFORD};
use super::exact::ExactUnitary;
use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("illegal generator {symbol:?} at position {position}")]
    IllegalSymbol { symbol: char, position: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Syllable {
    T,
    HT,
    SHT,
}

impl Syllable {
    pub fn as_str(self) -> &'static str {
        match self {
            Syllable::T => "T",
            Syllable::HT => "HT",
            Syllable::SHT => "SHT",
        }
    }

    pub fn exact(self) -> &'static ExactUnitary {
        static M: OnceLock<[ExactUnitary; 3]> = OnceLock::new();
        let m = M.get_or_init(|| {
            let t = ExactUnitary::t();
            let ht = ExactUnitary::h().mul(&t);
            let sht = ExactUnitary::s().mul(&ht);
            [t, ht, sht]
        });
        &m[self as usize]
    }

    pub fn float(self) -> Matrix2<Complex64> {
        let t = gate_float('T');
        match self {
            Syllable::T => t,
            Syllable::HT => gate_float('H') * t,
            Syllable::SHT => gate_float('S') * gate_float('H') * t,
        }
    }
}

/// Float matrix of a single generator symbol.
pub fn gate_float(g: char) -> Matrix2<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match g {
        'H' => Matrix2::new(o * s, o * s, o * s, -o * s),
        'S' => Matrix2::new(o, z, z, i),
        'T' => Matrix2::new(o, z, z, Complex64::new(s, s)),
        'X' => Matrix2::new(z, o, o, z),
        'Y' => Matrix2::new(z, -i, i, z),
        'Z' => Matrix2::new(o, z, z, -o),
        'ω' | 'W' => Matrix2::identity() * Complex64::new(s, s),
        _ => panic!("unknown generator {g}"),
    }
}

/// Clifford+T operator in Matsumoto–Amano normal form
/// `(T|ε)(HT|SHT)* · C · ω^omega_exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GateWord {
    pub syllables: Vec<Syllable>,
    /// Class index 0..24 of the trailing Clifford.
    pub clifford: u8,
    pub omega_exp: u8,
}

impl GateWord {
    pub fn identity() -> Self {
        GateWord { syllables: Vec::new(), clifford: 0, omega_exp: 0 }
    }

    pub fn tcount(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_ma_form(&self) -> bool {
        self.clifford < N_CLIFFORD as u8
            && self.omega_exp < 8
            && self.syllables.iter().skip(1).all(|s| *s != Syllable::T)
    }

    /// Generator string without the phase (the `word` field of the JSON form).
    pub fn word_string(&self) -> String {
        let mut s: String = self.syllables.iter().map(|x| x.as_str()).collect();
        s.push_str(clifford_group().rep_word(self.clifford as usize));
        s
    }

    /// Generator string including `ω` symbols for the phase.
    pub fn generator_string(&self) -> String {
        let mut s = self.word_string();
        for _ in 0..self.omega_exp {
            s.push('ω');
        }
        s
    }

    pub fn with_phase(mut self, omega_exp: i64) -> Self {
        self.omega_exp = ((self.omega_exp as i64 + omega_exp).rem_euclid(8)) as u8;
        self
    }

    /// Same operator without the global phase.
    pub fn dephased(&self) -> Self {
        GateWord { omega_exp: 0, ..self.clone() }
    }
}

impl fmt::Display for GateWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.generator_string())
    }
}

#[derive(Serialize, Deserialize)]
struct WordJson {
    word: String,
    omega_exp: u8,
}

impl Serialize for GateWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WordJson { word: self.word_string(), omega_exp: self.omega_exp }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GateWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = WordJson::deserialize(d)?;
        let w = ma_normalize(&j.word).map_err(serde::de::Error::custom)?;
        Ok(w.with_phase(j.omega_exp as i64))
    }
}

/// Builder that right-multiplies generators onto a word kept in normal form.
#[derive(Clone, Debug)]
pub struct NormalFormBuilder {
    syllables: Vec<Syllable>,
    tail: CliffordId,
}

impl Default for NormalFormBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl NormalFormBuilder {
    pub fn new() -> Self {
        NormalFormBuilder { syllables: Vec::new(), tail: 0 }
    }

    pub fn push_clifford(&mut self, c: CliffordId) {
        self.tail = clifford_group().mul(self.tail, c);
    }

    pub fn push_t(&mut self) {
        let g = clifford_group();
        let (coset, rest) = g.t_push(self.tail);
        match coset {
            Coset::H => {
                self.syllables.push(Syllable::HT);
                self.tail = rest;
            }
            Coset::SH => {
                self.syllables.push(Syllable::SHT);
                self.tail = rest;
            }
            Coset::I => match self.syllables.pop() {
                None => {
                    self.syllables.push(Syllable::T);
                    self.tail = rest;
                }
                Some(last) => {
                    // W'·s·T·T·C' = W'·(s·S·C')
                    let prefix = match last {
                        Syllable::T => 0,
                        Syllable::HT => g.id_h,
                        Syllable::SHT => g.id_sh,
                    };
                    self.tail = g.mul(g.mul(prefix, g.id_s), rest);
                }
            },
        }
    }

    pub fn push_symbol(&mut self, ch: char, position: usize) -> Result<(), ParseError> {
        let g = clifford_group();
        match ch {
            'T' => self.push_t(),
            'H' => self.push_clifford(g.id_h),
            'S' => self.push_clifford(g.id_s),
            'X' => self.push_clifford(g.id_x),
            'Y' => self.push_clifford(g.id_y),
            'Z' => self.push_clifford(g.id_z),
            'ω' | 'W' => self.push_clifford(g.id_omega),
            _ => return Err(ParseError::IllegalSymbol { symbol: ch, position }),
        }
        Ok(())
    }

    pub fn push_word(&mut self, w: &GateWord) {
        let g = clifford_group();
        for s in &w.syllables {
            match s {
                Syllable::T => {}
                Syllable::HT => self.push_clifford(g.id_h),
                Syllable::SHT => {
                    self.push_clifford(g.id_s);
                    self.push_clifford(g.id_h);
                }
            }
            self.push_t();
        }
        self.push_clifford(make_id(w.clifford as usize, w.omega_exp));
    }

    pub fn finish(self) -> GateWord {
        let (class, omega) = split_id(self.tail);
        GateWord { syllables: self.syllables, clifford: class as u8, omega_exp: omega }
    }
}

/// Normal form of a generator string over {H, S, T, X, Y, Z, ω} (`W` is
/// accepted for ω). Whitespace is ignored.
pub fn ma_normalize(raw: &str) -> Result<GateWord, ParseError> {
    let mut b = NormalFormBuilder::new();
    for (pos, ch) in raw.chars().enumerate() {
        if ch.is_whitespace() {
            continue;
        }
        b.push_symbol(ch, pos)?;
    }
    Ok(b.finish())
}

/// Normal form of the product `a · b`.
pub fn concat(a: &GateWord, b: &GateWord) -> GateWord {
    let mut nb = NormalFormBuilder::new();
    nb.push_word(a);
    nb.push_word(b);
    nb.finish()
}

pub fn eval_exact(w: &GateWord) -> ExactUnitary {
    let g = clifford_group();
    let mut m = ExactUnitary::identity();
    for s in &w.syllables {
        m = m.mul(s.exact());
    }
    m.mul(g.rep(w.clifford as usize)).mul_omega(w.omega_exp as i64)
}

pub fn eval_float(w: &GateWord) -> Matrix2<Complex64> {
    static SYL: OnceLock<[Matrix2<Complex64>; 3]> = OnceLock::new();
    static REP: OnceLock<Vec<Matrix2<Complex64>>> = OnceLock::new();
    let syl = SYL.get_or_init(|| [Syllable::T.float(), Syllable::HT.float(), Syllable::SHT.float()]);
    let rep = REP.get_or_init(|| (0..N_CLIFFORD).map(|c| clifford_group().rep(c).to_float()).collect());
    let mut m = Matrix2::identity();
    for s in &w.syllables {
        m *= syl[*s as usize];
    }
    m *= rep[w.clifford as usize];
    m * Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * w.omega_exp as f64)
}
