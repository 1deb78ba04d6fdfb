//! Exact arithmetic in SL2(Z).
//!
//! Matrices carry arbitrary-precision entries. Every element can be written
//! as a word in the generators `S = (0 -1; 1 0)` and `T = (1 1; 0 1)`;
//! [`UnimodularMatrix::word`] produces the canonical word by Euclidean
//! reduction of the bottom row.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::C64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UnimodularMatrix {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl UnimodularMatrix {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self> {
        let m = UnimodularMatrix {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        };
        let det = &m.a * &m.d - &m.b * &m.c;
        if !det.is_one() {
            return Err(Error::NotUnimodular(det.to_string()));
        }
        Ok(m)
    }

    fn raw(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        debug_assert!((&a * &d - &b * &c).is_one());
        UnimodularMatrix { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::raw(1.into(), 0.into(), 0.into(), 1.into())
    }

    pub fn minus_identity() -> Self {
        Self::raw((-1).into(), 0.into(), 0.into(), (-1).into())
    }

    pub fn s() -> Self {
        Self::raw(0.into(), (-1).into(), 1.into(), 0.into())
    }

    pub fn t() -> Self {
        Self::t_pow(BigInt::one())
    }

    pub fn t_pow(n: BigInt) -> Self {
        Self::raw(1.into(), n, 0.into(), 1.into())
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::raw(
            &self.a * &other.a + &self.b * &other.c,
            &self.a * &other.b + &self.b * &other.d,
            &self.c * &other.a + &self.d * &other.c,
            &self.c * &other.b + &self.d * &other.d,
        )
    }

    pub fn inverse(&self) -> Self {
        Self::raw(self.d.clone(), -&self.b, -&self.c, self.a.clone())
    }

    pub fn negate(&self) -> Self {
        Self::raw(-&self.a, -&self.b, -&self.c, -&self.d)
    }

    pub fn to_f64(&self) -> [f64; 4] {
        self.entries().map(|x| x.to_f64().unwrap_or(f64::NAN))
    }

    /// The automorphy factor `c*tau + d`.
    pub fn cocycle(&self, tau: C64) -> C64 {
        let [_, _, c, d] = self.to_f64();
        tau * c + d
    }

    /// `(a tau + b) / (c tau + d)` for `tau` in the upper half-plane.
    pub fn moebius(&self, tau: C64) -> Result<C64> {
        if !(tau.im > 0.0) {
            return Err(Error::DomainError(format!(
                "moebius requires Im(tau) > 0, got {tau}"
            )));
        }
        let [a, b, c, d] = self.to_f64();
        Ok((tau * a + b) / (tau * c + d))
    }

    /// Canonical word in `S` and powers of `T`.
    pub fn word(&self) -> GeneratorWord {
        let mut h = self.clone();
        let mut shifts: Vec<BigInt> = Vec::new();
        while !h.c.is_zero() {
            let modulus = h.c.abs();
            let mut r = h.d.mod_floor(&modulus);
            if &r * 2 > modulus {
                r -= &modulus;
            }
            // r = c*n + d
            let n = (&r - &h.d) / &h.c;
            // h * T^n * S
            let b = &h.a * &n + &h.b;
            h = Self::raw(b, -&h.a, r, -&h.c);
            shifts.push(n);
        }
        // self * T^{n1} S ... T^{nk} S = eps * T^m with eps = h.a = +-1
        let eps_negative = h.a.is_negative();
        let m = &h.a * &h.b;
        let mut tokens = vec![Token::T(m)];
        for n in shifts.iter().rev() {
            tokens.push(Token::S);
            tokens.push(Token::T(-n));
        }
        // each S^{-1} = -S contributes a sign
        let negate = eps_negative ^ (shifts.len() % 2 == 1);
        GeneratorWord::new(negate, tokens)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> Self {
        assert!(bound >= 1);
        loop {
            let c: i64 = rng.gen_range(-bound..=bound);
            let d: i64 = rng.gen_range(-bound..=bound);
            if c == 0 {
                if d.abs() != 1 {
                    continue;
                }
                let b: i64 = rng.gen_range(-bound..=bound);
                return Self::raw(d.into(), (d * b).into(), 0.into(), d.into());
            }
            let (c, d) = (BigInt::from(c), BigInt::from(d));
            let e = c.extended_gcd(&d);
            if !e.gcd.is_one() {
                continue;
            }
            // x*c + y*d = 1 ; take a = y, b = -x so that a*d - b*c = 1
            let (mut a, mut b) = (e.y, -e.x);
            // shift (a, b) by multiples of (c, d) to keep entries small
            let k = a.div_floor(&c);
            a -= &k * &c;
            b -= &k * &d;
            let m = Self::raw(a, b, c, d);
            if m.entries().iter().all(|x| x.abs() <= BigInt::from(bound)) {
                return m;
            }
        }
    }
}

impl fmt::Debug for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

impl fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for UnimodularMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [
            [self.a.to_string(), self.b.to_string()],
            [self.c.to_string(), self.d.to_string()],
        ]
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnimodularMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[String; 2]; 2]>::deserialize(de)?;
        let parse = |s: &str| s.trim().parse::<BigInt>().map_err(D::Error::custom);
        UnimodularMatrix::new(
            parse(&rows[0][0])?,
            parse(&rows[0][1])?,
            parse(&rows[1][0])?,
            parse(&rows[1][1])?,
        )
        .map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    S,
    /// `T^n` with `n != 0`.
    T(BigInt),
}

/// `(-I)^negate * tokens[0] * tokens[1] * ...`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorWord {
    negate: bool,
    tokens: Vec<Token>,
}

impl GeneratorWord {
    /// Normalizes the token list: zero powers are dropped and adjacent
    /// `T`-powers merged. Repeated `S` tokens are kept as given.
    pub fn new(negate: bool, tokens: impl IntoIterator<Item = Token>) -> Self {
        let mut out: Vec<Token> = Vec::new();
        for tok in tokens {
            match tok {
                Token::T(n) => {
                    if let Some(Token::T(prev)) = out.last_mut() {
                        *prev += n;
                        if prev.is_zero() {
                            out.pop();
                        }
                    } else if !n.is_zero() {
                        out.push(Token::T(n));
                    }
                }
                Token::S => out.push(Token::S),
            }
        }
        GeneratorWord {
            negate,
            tokens: out,
        }
    }

    pub fn negate(&self) -> bool {
        self.negate
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Exact product of the token matrices.
    pub fn evaluate(&self) -> UnimodularMatrix {
        let mut acc = if self.negate {
            UnimodularMatrix::minus_identity()
        } else {
            UnimodularMatrix::identity()
        };
        for tok in &self.tokens {
            acc = match tok {
                Token::S => acc.compose(&UnimodularMatrix::s()),
                Token::T(n) => {
                    // acc * T^n only changes the right column
                    let b = &acc.a * n + &acc.b;
                    let d = &acc.c * n + &acc.d;
                    UnimodularMatrix::raw(acc.a, b, acc.c, d)
                }
            };
        }
        acc
    }

    /// Concatenation `self * other`.
    pub fn concat(&self, other: &GeneratorWord) -> GeneratorWord {
        GeneratorWord::new(
            self.negate ^ other.negate,
            self.tokens.iter().chain(&other.tokens).cloned(),
        )
    }
}

impl fmt::Display for GeneratorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.negate {
            parts.push("-I".into());
        }
        for t in &self.tokens {
            parts.push(match t {
                Token::S => "S".into(),
                Token::T(n) => format!("T^{n}"),
            });
        }
        if parts.is_empty() {
            parts.push("I".into());
        }
        write!(f, "{}", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(a: i64, b: i64, c: i64, d: i64) -> UnimodularMatrix {
        UnimodularMatrix::new(a, b, c, d).unwrap()
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(UnimodularMatrix::new(2, 0, 0, 1).is_err());
    }

    #[test]
    fn compose_examples() {
        let s = UnimodularMatrix::s();
        let t = UnimodularMatrix::t();
        let g = m(2, 1, 1, 1);
        assert_eq!(UnimodularMatrix::identity().compose(&g), g);
        assert_eq!(s.compose(&s), m(-1, 0, 0, -1));
        assert_eq!(t.compose(&s), m(1, -1, 1, 0));
    }

    #[test]
    fn relations() {
        let s = UnimodularMatrix::s();
        let st = s.compose(&UnimodularMatrix::t());
        let s2 = s.compose(&s);
        assert_eq!(s2.compose(&s2), UnimodularMatrix::identity());
        assert_eq!(st.compose(&st).compose(&st), s2);
    }

    #[test]
    fn moebius_examples() {
        let i = C64::new(0.0, 1.0);
        assert!((UnimodularMatrix::s().moebius(i).unwrap() - i).norm() < 1e-15);
        let tau = C64::new(0.3, 0.7);
        assert!((UnimodularMatrix::t().moebius(tau).unwrap() - (tau + 1.0)).norm() < 1e-15);
        // (2*2i + 1) / (1*2i + 1)
        let expected = C64::new(1.0, 4.0) / C64::new(1.0, 2.0);
        let got = m(2, 1, 1, 1).moebius(C64::new(0.0, 2.0)).unwrap();
        assert!((got - expected).norm() < 1e-14);
        assert!(m(2, 1, 1, 1).moebius(C64::new(1.0, 0.0)).is_err());
        assert!(m(2, 1, 1, 1).moebius(C64::new(1.0, -1.0)).is_err());
    }

    #[test]
    fn word_examples() {
        let w = m(1, 1, 0, 1).word();
        assert_eq!(w, GeneratorWord::new(false, [Token::T(1.into())]));
        let w = UnimodularMatrix::s().word();
        assert_eq!(w, GeneratorWord::new(false, [Token::S]));
        let g = m(1, 0, 1, 1);
        assert_eq!(g.word().evaluate(), g);
        assert_eq!(UnimodularMatrix::minus_identity().word().to_string(), "-I");
    }

    #[test]
    fn word_evaluate_examples() {
        let w = GeneratorWord::new(false, [Token::T(3.into())]);
        assert_eq!(w.evaluate(), m(1, 3, 0, 1));
        let w = GeneratorWord::new(false, [Token::S, Token::S]);
        assert_eq!(w.evaluate(), UnimodularMatrix::minus_identity());
    }

    #[test]
    fn word_normalization_merges_t_powers() {
        let w = GeneratorWord::new(
            false,
            [Token::T(2.into()), Token::T((-2).into()), Token::S, Token::T(0.into()), Token::T(4.into())],
        );
        assert_eq!(w.tokens(), &[Token::S, Token::T(4.into())]);
    }

    #[test]
    fn canonical_word_alternates_and_is_short() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let g = UnimodularMatrix::random(&mut rng, 1_000_000);
            let w = g.word();
            for pair in w.tokens().windows(2) {
                assert_ne!(matches!(pair[0], Token::S), matches!(pair[1], Token::S));
            }
            // centered remainders at least halve |c| per S
            assert!(w.len() <= 2 * 22 + 1, "{} has word of length {}", g, w.len());
            assert_eq!(w.evaluate(), g);
        }
    }

    #[test]
    fn json_roundtrip() {
        let g = m(2, 1, 1, 1);
        let js = serde_json::to_string(&g).unwrap();
        assert_eq!(js, r#"[["2","1"],["1","1"]]"#);
        let back: UnimodularMatrix = serde_json::from_str(&js).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<UnimodularMatrix>(r#"[["2","0"],["0","2"]]"#).is_err());
    }

    #[test]
    fn big_entries_do_not_overflow() {
        let big: BigInt = BigInt::from(10u64).pow(30);
        let g = UnimodularMatrix::new(1, 0, big.clone(), 1).unwrap();
        let h = UnimodularMatrix::new(1, big, 0, 1).unwrap();
        let gh = g.compose(&h);
        assert_eq!(gh.word().evaluate(), gh);
    }
}
