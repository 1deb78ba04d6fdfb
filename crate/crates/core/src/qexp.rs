//! Left-finite q-series `e^{2 pi i mu tau} sum_{n >= nu} a_n q^n` and the
//! logarithmic blocks built from them.
//!
//! A series is either exact (every omitted coefficient is zero) or truncated,
//! in which case coefficients are known for indices below its *reach*
//! `nu + coeffs.len()`.

use std::f64::consts::PI;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{GaussRat, C64};

/// Relative size of the truncation tail above which evaluation warns.
pub const TAIL_WARN_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct PureQSeries {
    mu: Rational64,
    nu: i64,
    coeffs: Vec<C64>,
    exact: bool,
}

/// Value of a series together with a bound on the omitted tail.
#[derive(Clone, Debug, PartialEq)]
pub struct QValue {
    pub value: C64,
    pub tail_bound: f64,
    pub warning: Option<String>,
}

pub fn check_mu(mu: Rational64) -> Result<()> {
    if mu < Rational64::zero() || mu >= Rational64::one() {
        return Err(Error::DomainError(format!("exponent offset {mu} outside [0, 1)")));
    }
    Ok(())
}

pub fn mu_to_f64(mu: Rational64) -> f64 {
    *mu.numer() as f64 / *mu.denom() as f64
}

impl PureQSeries {
    /// Strips leading zeros, and trailing zeros when `exact`.
    pub fn new(mu: Rational64, nu: i64, mut coeffs: Vec<C64>, exact: bool) -> Result<Self> {
        check_mu(mu)?;
        if let Some(bad) = coeffs.iter().find(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::DomainError(format!("non-finite coefficient {bad}")));
        }
        if exact {
            while coeffs.last().is_some_and(Zero::is_zero) {
                coeffs.pop();
            }
        }
        let lead = coeffs.iter().position(|c| !c.is_zero()).unwrap_or(coeffs.len());
        let nu = nu + lead as i64;
        coeffs.drain(..lead);
        Ok(PureQSeries {
            mu,
            nu: if exact && coeffs.is_empty() { 0 } else { nu },
            coeffs,
            exact,
        })
    }

    pub fn zero(mu: Rational64) -> Self {
        PureQSeries {
            mu,
            nu: 0,
            coeffs: Vec::new(),
            exact: true,
        }
    }

    /// A truncated series known to vanish below `reach`.
    pub fn zero_to(mu: Rational64, reach: i64) -> Self {
        PureQSeries {
            mu,
            nu: reach,
            coeffs: Vec::new(),
            exact: false,
        }
    }

    pub fn constant(c: C64) -> Self {
        PureQSeries::new(Rational64::zero(), 0, vec![c], true).expect("mu = 0 is valid")
    }

    /// `c q^{n + mu}` exactly.
    pub fn monomial(mu: Rational64, n: i64, c: C64) -> Result<Self> {
        PureQSeries::new(mu, n, vec![c], true)
    }

    pub fn mu(&self) -> Rational64 {
        self.mu
    }

    pub fn nu(&self) -> i64 {
        self.nu
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// First index whose coefficient is unknown; `None` for exact series.
    pub fn reach(&self) -> Option<i64> {
        (!self.exact).then_some(self.nu + self.coeffs.len() as i64)
    }

    pub fn coeff(&self, n: i64) -> C64 {
        if n < self.nu {
            return C64::zero();
        }
        self.coeffs.get((n - self.nu) as usize).copied().unwrap_or_else(C64::zero)
    }

    /// `(n, a_n)` over retained nonzero coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(j, c)| (self.nu + j as i64, *c))
    }

    /// Coefficients read as exact dyadic rationals.
    pub fn exact_coeffs(&self) -> Result<Vec<(i64, GaussRat)>> {
        self.terms().map(|(n, c)| Ok((n, GaussRat::from_c64_exact(c)?))).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Forgets coefficients from `reach` on.
    pub fn truncate(&self, reach: i64) -> Self {
        let reach = self.reach().map_or(reach, |r| r.min(reach));
        PureQSeries::with_coeffs(self.mu, self.nu, Some(reach), self.coeffs.clone())
    }

    fn with_coeffs(mu: Rational64, lo: i64, reach: Option<i64>, coeffs: Vec<C64>) -> Self {
        match reach {
            None => PureQSeries::new(mu, lo, coeffs, true).expect("mu already validated"),
            Some(r) => {
                let keep = (r - lo).clamp(0, coeffs.len() as i64) as usize;
                let s = PureQSeries::new(mu, lo, coeffs[..keep].to_vec(), false).expect("mu already validated");
                if s.is_zero() {
                    PureQSeries::zero_to(mu, r)
                } else {
                    let mut s = s;
                    s.coeffs.resize((r - s.nu) as usize, C64::zero());
                    s
                }
            }
        }
    }

    /// Low index for arithmetic: the zero series contributes nothing.
    fn lo(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.nu)
    }
}

fn min_reach(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

pub fn q_add(a: &PureQSeries, b: &PureQSeries) -> Result<PureQSeries> {
    if a.mu != b.mu {
        return Err(Error::OffsetMismatch(a.mu.to_string(), b.mu.to_string()));
    }
    let reach = min_reach(a.reach(), b.reach());
    let lo = match (a.lo(), b.lo()) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => return Ok(PureQSeries::with_coeffs(a.mu, 0, reach, Vec::new())),
    };
    let hi = a.nu + a.coeffs.len() as i64;
    let hi = hi.max(b.nu + b.coeffs.len() as i64);
    let coeffs = (lo..hi).map(|n| a.coeff(n) + b.coeff(n)).collect();
    Ok(PureQSeries::with_coeffs(a.mu, lo, reach, coeffs))
}

pub fn q_sub(a: &PureQSeries, b: &PureQSeries) -> Result<PureQSeries> {
    q_add(a, &q_scale(b, C64::new(-1.0, 0.0)))
}

/// Product; offsets add modulo 1 with the carry moved into the leading index.
pub fn q_mul(a: &PureQSeries, b: &PureQSeries) -> PureQSeries {
    let mut mu = a.mu + b.mu;
    let mut carry = 0;
    if mu >= Rational64::one() {
        mu -= Rational64::one();
        carry = 1;
    }
    let reach_a = a.reach().map(|r| r + b.nu);
    let reach_b = b.reach().map(|r| r + a.nu);
    // an exact zero factor annihilates everything
    let reach = if (a.exact && a.is_zero()) || (b.exact && b.is_zero()) {
        None
    } else {
        min_reach(reach_a, reach_b)
    };
    let reach = reach.map(|r| r + carry);
    if a.is_zero() || b.is_zero() {
        return PureQSeries::with_coeffs(mu, 0, reach, Vec::new());
    }
    let mut out = vec![C64::zero(); a.coeffs.len() + b.coeffs.len() - 1];
    for (i, x) in a.coeffs.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.coeffs.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    PureQSeries::with_coeffs(mu, a.nu + b.nu + carry, reach, out)
}

pub fn q_scale(a: &PureQSeries, c: C64) -> PureQSeries {
    PureQSeries::with_coeffs(a.mu, a.nu, a.reach(), a.coeffs.iter().map(|x| x * c).collect())
}

/// Derivative in `tau`: `a_n q^{n+mu}` becomes `2 pi i (n + mu) a_n q^{n+mu}`.
pub fn q_derivative(a: &PureQSeries) -> PureQSeries {
    let mu = mu_to_f64(a.mu);
    let coeffs = a
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, x)| x * C64::new(0.0, 2.0 * PI * (a.nu as f64 + j as f64 + mu)))
        .collect();
    PureQSeries::with_coeffs(a.mu, a.nu, a.reach(), coeffs)
}

pub fn q_nth_derivative(a: &PureQSeries, m: usize) -> PureQSeries {
    (0..m).fold(a.clone(), |s, _| q_derivative(&s))
}

fn require_upper(tau: C64) -> Result<()> {
    if !(tau.im > 0.0) {
        return Err(Error::DomainError(format!("Im(tau) must be positive, got {tau}")));
    }
    Ok(())
}

/// `e^{2 pi i x tau}`
pub fn q_power(x: f64, tau: C64) -> C64 {
    (C64::new(0.0, 2.0 * PI * x) * tau).exp()
}

pub fn q_evaluate(a: &PureQSeries, tau: C64) -> Result<QValue> {
    require_upper(tau)?;
    let mu = mu_to_f64(a.mu);
    let q = q_power(1.0, tau);
    let mut value = C64::zero();
    for c in a.coeffs.iter().rev() {
        value = value * q + c;
    }
    if !a.is_zero() {
        value *= q_power(a.nu as f64 + mu, tau);
    }
    let tail_bound = match a.reach() {
        None => 0.0,
        Some(reach) => {
            // omitted coefficients are assumed no larger than the retained ones
            let r = (-2.0 * PI * tau.im).exp();
            let m = a.max_abs().max(1.0);
            m * (-2.0 * PI * tau.im * (reach as f64 + mu)).exp() / (1.0 - r)
        }
    };
    let warning = (tail_bound > TAIL_WARN_TOL * value.norm().max(f64::MIN_POSITIVE)).then(|| {
        format!("tail bound {tail_bound:e} is not negligible against |value| = {:e}", value.norm())
    });
    Ok(QValue {
        value,
        tail_bound,
        warning,
    })
}

/// `binom(tau, s) = tau (tau - 1) ... (tau - s + 1) / s!`
pub fn binom_evaluate(s: usize, tau: C64) -> C64 {
    (0..s).fold(C64::new(1.0, 0.0), |acc, r| acc * (tau - r as f64) / (r as f64 + 1.0))
}

/// One Jordan block's worth of logarithmic expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct LogBlock {
    mu: Rational64,
    h: Vec<PureQSeries>,
}

impl LogBlock {
    pub fn new(mu: Rational64, h: Vec<PureQSeries>) -> Result<Self> {
        check_mu(mu)?;
        if h.is_empty() {
            return Err(Error::DomainError("a block needs at least one series".into()));
        }
        if let Some(bad) = h.iter().find(|s| s.mu != mu) {
            return Err(Error::OffsetMismatch(mu.to_string(), bad.mu.to_string()));
        }
        Ok(LogBlock { mu, h })
    }

    pub fn mu(&self) -> Rational64 {
        self.mu
    }

    pub fn m(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[PureQSeries] {
        &self.h
    }

    pub fn is_exact(&self) -> bool {
        self.h.iter().all(PureQSeries::is_exact)
    }

    pub fn is_zero(&self) -> bool {
        self.h.iter().all(PureQSeries::is_zero)
    }

    /// Every series concentrated at exponent `n + mu = 0`.
    pub fn is_polynomial(&self) -> bool {
        self.h.iter().all(|s| s.terms().all(|(n, _)| n == 0 && self.mu.is_zero()))
    }
}

/// `phi_l = sum_{s < l} binom(tau, s) h_{l-1-s}(tau)` with its tail bound.
pub fn assemble_component_bounded(block: &LogBlock, l: usize, tau: C64) -> Result<(C64, f64)> {
    if l == 0 || l > block.m() {
        return Err(Error::IndexOutOfRange {
            index: l,
            len: block.m(),
        });
    }
    let mut value = C64::zero();
    let mut tail = 0.0;
    for s in 0..l {
        let b = binom_evaluate(s, tau);
        let h = q_evaluate(&block.h[l - 1 - s], tau)?;
        value += b * h.value;
        tail += b.norm() * h.tail_bound;
    }
    Ok((value, tail))
}

pub fn assemble_component(block: &LogBlock, l: usize, tau: C64) -> Result<C64> {
    assemble_component_bounded(block, l, tau).map(|(v, _)| v)
}

/// `(holomorphic, first violation (s, n))`: a violation is a retained nonzero
/// coefficient with `n + mu < 0`.
pub fn holomorphy_check(block: &LogBlock) -> (bool, Option<(usize, i64)>) {
    for (s, series) in block.h.iter().enumerate() {
        if let Some((n, _)) = series.terms().find(|&(n, _)| n < 0) {
            return (false, Some((s, n)));
        }
    }
    (true, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn series(mu: Rational64, nu: i64, cs: &[f64], exact: bool) -> PureQSeries {
        PureQSeries::new(mu, nu, cs.iter().map(|&x| c(x)).collect(), exact).unwrap()
    }

    #[test]
    fn canonical_form() {
        let s = series(r(0, 1), -2, &[0.0, 0.0, 3.0, 0.0], true);
        assert_eq!((s.nu(), s.coeffs().len()), (0, 1));
        let z = series(r(1, 2), 5, &[0.0, 0.0], true);
        assert_eq!(z, PureQSeries::zero(r(1, 2)));
        let t = series(r(0, 1), 0, &[0.0, 1.0, 0.0], false);
        assert_eq!((t.nu(), t.reach()), (1, Some(3)));
        assert!(PureQSeries::new(r(1, 1), 0, vec![], true).is_err());
    }

    #[test]
    fn ring_operations() {
        let h = series(r(0, 1), 0, &[1.0, 240.0, 2160.0], false);
        assert_eq!(q_add(&h, &PureQSeries::zero(r(0, 1))).unwrap(), h);
        let q = PureQSeries::monomial(r(0, 1), 1, c(1.0)).unwrap();
        let q2 = q_mul(&q, &q);
        assert_eq!((q2.mu(), q2.nu(), q2.coeffs()), (r(0, 1), 2, &[c(1.0)][..]));
        let d = q_scale(&h, c(2.0));
        assert_eq!(d.coeffs(), &[c(2.0), c(480.0), c(4320.0)]);
        assert!(matches!(q_add(&h, &PureQSeries::zero(r(1, 2))), Err(Error::OffsetMismatch(..))));
    }

    #[test]
    fn mul_offset_carry_and_reach() {
        let a = series(r(2, 3), 0, &[1.0, 1.0], false);
        let b = series(r(1, 2), 1, &[1.0], true);
        let p = q_mul(&a, &b);
        assert_eq!(p.mu(), r(1, 6));
        assert_eq!(p.nu(), 2);
        assert_eq!(p.reach(), Some(4));
        let e = series(r(0, 1), 0, &[1.0, 2.0, 3.0], false);
        let f = series(r(0, 1), 0, &[1.0, 1.0, 1.0, 1.0, 1.0], false);
        assert_eq!(q_mul(&e, &f).reach(), Some(3));
        assert_eq!(q_mul(&e, &f).coeffs(), &[c(1.0), c(3.0), c(6.0)]);
    }

    #[test]
    fn derivative_rules() {
        assert!(q_derivative(&PureQSeries::constant(c(1.0))).is_zero());
        let q = PureQSeries::monomial(r(0, 1), 1, c(1.0)).unwrap();
        let dq = q_derivative(&q);
        assert!((dq.coeff(1) - C64::new(0.0, 2.0 * PI)).norm() < 1e-14);
        for n in 0..4 {
            let h = PureQSeries::monomial(r(1, 2), n, c(1.0)).unwrap();
            for m in 1..5 {
                let got = q_nth_derivative(&h, m).coeff(n);
                let expected = C64::new(0.0, 2.0 * PI * (n as f64 + 0.5)).powu(m as u32);
                assert!((got - expected).norm() < 1e-12 * expected.norm());
            }
        }
    }

    #[test]
    fn evaluation_examples() {
        let i = C64::new(0.0, 1.0);
        assert_eq!(q_evaluate(&PureQSeries::constant(c(1.0)), C64::new(0.2, 0.4)).unwrap().value, c(1.0));
        let q = PureQSeries::monomial(r(0, 1), 1, c(1.0)).unwrap();
        assert!((q_evaluate(&q, i).unwrap().value - c((-2.0 * PI).exp())).norm() < 1e-17);
        assert!((q_evaluate(&q, i).unwrap().value.re - 1.8674e-3).abs() < 1e-7);
        let half = PureQSeries::monomial(r(1, 2), 0, c(1.0)).unwrap();
        assert!((q_evaluate(&half, i).unwrap().value - c((-PI).exp())).norm() < 1e-16);
        assert!(matches!(q_evaluate(&q, c(1.0)), Err(Error::DomainError(_))));
    }

    #[test]
    fn truncation_warning() {
        let h = series(r(0, 1), 0, &[1.0, 1.0], false);
        assert!(q_evaluate(&h, C64::new(0.0, 0.05)).unwrap().warning.is_some());
        assert!(q_evaluate(&h, C64::new(0.0, 4.0)).unwrap().warning.is_none());
    }

    #[test]
    fn binomials() {
        assert_eq!(binom_evaluate(0, C64::new(0.3, 2.0)), c(1.0));
        assert!((binom_evaluate(2, c(3.0)) - c(3.0)).norm() < 1e-15);
    }

    #[test]
    fn assembly_examples() {
        let one = PureQSeries::constant(c(1.0));
        let b1 = LogBlock::new(r(0, 1), vec![one.clone()]).unwrap();
        let tau = C64::new(0.25, 0.8);
        assert_eq!(assemble_component(&b1, 1, tau).unwrap(), c(1.0));
        let b2 = LogBlock::new(r(0, 1), vec![one.clone(), one]).unwrap();
        assert!((assemble_component(&b2, 2, tau).unwrap() - (tau + 1.0)).norm() < 1e-15);
        let shifted = assemble_component(&b2, 2, tau + 1.0).unwrap();
        let expected = assemble_component(&b2, 2, tau).unwrap() + assemble_component(&b2, 1, tau).unwrap();
        assert!((shifted - expected).norm() < 1e-14);
        assert!(matches!(assemble_component(&b2, 3, tau), Err(Error::IndexOutOfRange { index: 3, len: 2 })));
    }

    #[test]
    fn holomorphy_examples() {
        let ok = LogBlock::new(r(0, 1), vec![series(r(0, 1), 0, &[1.0], true)]).unwrap();
        assert_eq!(holomorphy_check(&ok), (true, None));
        let bad = LogBlock::new(
            r(1, 2),
            vec![series(r(1, 2), 0, &[1.0], true), series(r(1, 2), -1, &[1.0], true)],
        )
        .unwrap();
        assert_eq!(holomorphy_check(&bad), (false, Some((1, -1))));
        let half = LogBlock::new(r(1, 2), vec![series(r(1, 2), 0, &[1.0], true)]).unwrap();
        assert!(holomorphy_check(&half).0);
    }
}
