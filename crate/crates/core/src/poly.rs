//! Univariate polynomials in `tau` with exact `Q(i)` coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::modgroup::UnimodularMatrix;
use crate::scalar::{GaussRat, Scalar, C64};

/// Coefficients in ascending degree; never has trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<GaussRat>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<GaussRat>) -> Self {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: GaussRat) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(GaussRat::one())
    }

    /// `tau^j`
    pub fn monomial(j: usize) -> Self {
        let mut c = vec![GaussRat::zero(); j + 1];
        c[j] = GaussRat::one();
        Poly { coeffs: c }
    }

    /// `a*tau + b`
    pub fn linear(a: GaussRat, b: GaussRat) -> Self {
        Poly::new(vec![b, a])
    }

    pub fn from_integers(a: &BigInt, b: &BigInt) -> Self {
        Poly::linear(GaussRat::from_bigint(a), GaussRat::from_bigint(b))
    }

    /// `binom(tau, s) = tau (tau-1) ... (tau-s+1) / s!`
    pub fn binomial(s: usize) -> Self {
        let mut p = Poly::one();
        for r in 0..s {
            p = &p * &Poly::linear(GaussRat::one(), GaussRat::from_i64(-(r as i64)));
            p = p.scale(&(GaussRat::one() / GaussRat::from_i64(r as i64 + 1)));
        }
        p
    }

    pub fn coeffs(&self) -> &[GaussRat] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> GaussRat {
        self.coeffs.get(j).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, s: &GaussRat) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Poly::one(), |acc, _| &acc * self)
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c.clone() * GaussRat::from_i64(j as i64))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn eval(&self, tau: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * tau + c.to_c64())
    }

    /// Composition `self(inner(tau))`.
    pub fn compose(&self, inner: &Poly) -> Poly {
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, c| &(&acc * inner) + &Poly::constant(c.clone()))
    }

    pub fn eval_exact(&self, tau: &GaussRat) -> GaussRat {
        self.coeffs
            .iter()
            .rev()
            .fold(GaussRat::zero(), |acc, c| acc * tau.clone() + c.clone())
    }
}

/// `(c tau + d)^{-k} f(g tau)`, provided the result is again a polynomial.
///
/// This happens exactly when `f = 0`, when `c = 0`, or when `k <= 0` and
/// `deg f <= -k`; otherwise the pole at `-d/c` survives.
pub fn slash_poly(k: i64, g: &UnimodularMatrix, f: &Poly) -> Result<Poly> {
    let Some(deg) = f.degree() else {
        return Ok(Poly::zero());
    };
    let (a, b, c, d) = (
        GaussRat::from_bigint(g.a()),
        GaussRat::from_bigint(g.b()),
        GaussRat::from_bigint(g.c()),
        GaussRat::from_bigint(g.d()),
    );
    if c.is_zero() {
        // d = a = +-1, so g tau = d (a tau + b) and (c tau + d)^{-k} = d^k
        let inner = Poly::linear(d.clone() * a, d.clone() * b);
        let sign = if d == GaussRat::one() || k % 2 == 0 { GaussRat::one() } else { -GaussRat::one() };
        return Ok(f.compose(&inner).scale(&sign));
    }
    if k > 0 || deg as i64 > -k {
        return Err(Error::NonPolynomialResult);
    }
    let w = (-k) as usize;
    let num = Poly::linear(a, b);
    let den = Poly::linear(c, d);
    let mut out = Poly::zero();
    for (j, fj) in f.coeffs().iter().enumerate() {
        if fj.is_zero() {
            continue;
        }
        let term = &num.pow(j) * &den.pow(w - j);
        out = &out + &term.scale(fj);
    }
    Ok(out)
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|j| self.coeff(j) + rhs.coeff(j)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|j| self.coeff(j) - rhs.coeff(j)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![GaussRat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| format!("({c})*tau^{j}"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        let b2 = Poly::binomial(2);
        assert_eq!(b2.eval_exact(&GaussRat::from_i64(3)), GaussRat::from_i64(3));
        assert_eq!(Poly::binomial(0), Poly::one());
        assert_eq!(b2.coeff(2), GaussRat::from_ratio(1, 2));
        for n in 0..8 {
            for s in 0..6 {
                let expected = (0..s).fold(1i64, |acc, r| acc * (n - r) / (r + 1));
                assert_eq!(Poly::binomial(s as usize).eval_exact(&GaussRat::from_i64(n)), GaussRat::from_i64(expected));
            }
        }
    }

    fn m(a: i64, b: i64, c: i64, d: i64) -> UnimodularMatrix {
        UnimodularMatrix::new(a, b, c, d).unwrap()
    }

    #[test]
    fn slash_examples() {
        let s = UnimodularMatrix::s();
        // weight 0 constants are invariant
        assert_eq!(slash_poly(0, &m(2, 1, 1, 1), &Poly::one()).unwrap(), Poly::one());
        // tau |_{-1} S = -1, 1 |_{-1} S = tau
        assert_eq!(slash_poly(-1, &s, &Poly::monomial(1)).unwrap(), Poly::constant(-GaussRat::one()));
        assert_eq!(slash_poly(-1, &s, &Poly::one()).unwrap(), Poly::monomial(1));
        // tau^j |_{1-p} g = (a tau + b)^j (c tau + d)^{p-1-j}
        let g = m(2, 1, 1, 1);
        let expected = &Poly::linear(q(2), q(1)).pow(1) * &Poly::linear(q(1), q(1)).pow(2);
        assert_eq!(slash_poly(-3, &g, &Poly::monomial(1)).unwrap(), expected);
        assert_eq!(slash_poly(-1, &g, &Poly::monomial(2)), Err(Error::NonPolynomialResult));
        assert_eq!(slash_poly(2, &g, &Poly::one()), Err(Error::NonPolynomialResult));
        // c = 0 is always polynomial, including -I with odd weight
        let minus = UnimodularMatrix::minus_identity();
        assert_eq!(slash_poly(3, &minus, &Poly::monomial(2)).unwrap(), Poly::monomial(2).scale(&q(-1)));
        assert_eq!(slash_poly(-1, &m(1, 5, 0, 1), &Poly::monomial(1)).unwrap(), Poly::linear(q(1), q(5)));
    }

    fn q(n: i64) -> GaussRat {
        GaussRat::from_i64(n)
    }

    #[test]
    fn arithmetic() {
        let p = Poly::linear(GaussRat::one(), GaussRat::one());
        let sq = &p * &p;
        assert_eq!(sq, Poly::new(vec![GaussRat::one(), GaussRat::from_i64(2), GaussRat::one()]));
        assert_eq!(p.pow(2), sq);
        assert_eq!(sq.derivative(), Poly::linear(GaussRat::from_i64(2), GaussRat::from_i64(2)));
        assert!((&sq - &sq).is_zero());
        assert_eq!((&sq - &sq).degree(), None);
    }
}
