//! Scalar modular forms and synthetic logarithmic forms used as test data.

use num_rational::Rational64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{AnyMatrix, Matrix};
use crate::poly::Poly;
use crate::qexp::{LogBlock, PureQSeries};
use crate::repspace::{rep_from_poly_basis, AnyRepresentation, Representation};
use crate::scalar::{unit_phase, GaussRat, Scalar, C64};
use crate::vvmf::{Body, VvmfForm};

/// A truncated scalar modular form for the trivial representation.
#[derive(Clone, Debug, PartialEq)]
pub struct FixtureSeries {
    pub name: String,
    pub weight: i64,
    pub series: PureQSeries,
}

impl FixtureSeries {
    pub fn form(&self) -> VvmfForm {
        VvmfForm::new(
            self.weight,
            AnyRepresentation::Exact(Representation::trivial()),
            Body::Scalars {
                series: vec![self.series.clone()],
                frame: None,
            },
        )
        .expect("scalar fixtures are one-dimensional and holomorphic")
    }
}

/// `sigma_e(n)` for `n < len` by a divisor sieve.
pub fn divisor_sums(e: u32, len: usize) -> Vec<i128> {
    let mut out = vec![0i128; len];
    for d in 1..len {
        let de = (d as i128).pow(e);
        for n in (d..len).step_by(d) {
            out[n] += de;
        }
    }
    out
}

fn real_series(mu: Rational64, nu: i64, coeffs: &[i128]) -> PureQSeries {
    let cs = coeffs.iter().map(|&c| C64::new(c as f64, 0.0)).collect();
    PureQSeries::new(mu, nu, cs, false).expect("offset in range")
}

/// Normalized Eisenstein series of weight 4 or 6 with `terms` coefficients.
pub fn eisenstein_series(weight: i64, terms: usize) -> Result<FixtureSeries> {
    let (e, factor) = match weight {
        4 => (3, 240),
        6 => (5, -504),
        w => return Err(Error::UnsupportedWeight(w)),
    };
    if terms == 0 {
        return Err(Error::DomainError("at least one coefficient is required".into()));
    }
    let mut coeffs = divisor_sums(e, terms);
    coeffs.iter_mut().for_each(|c| *c *= factor);
    coeffs[0] = 1;
    Ok(FixtureSeries {
        name: format!("E{weight}"),
        weight,
        series: real_series(Rational64::from_integer(0), 0, &coeffs),
    })
}

pub fn eisenstein(weight: i64, terms: usize) -> Result<VvmfForm> {
    eisenstein_series(weight, terms).map(|f| f.form())
}

/// `prod_{n >= 1} (1 - q^n)^e` to `terms` coefficients.
pub fn euler_product_power(e: usize, terms: usize) -> Vec<i128> {
    let mut c = vec![0i128; terms];
    if terms == 0 {
        return c;
    }
    c[0] = 1;
    for n in 1..terms {
        for _ in 0..e {
            for j in (n..terms).rev() {
                c[j] -= c[j - n];
            }
        }
    }
    c
}

/// `eta(tau)^{2r} = q^{r/12} prod (1 - q^n)^{2r}` with `terms` coefficients.
pub fn eta_power(r: usize, terms: usize) -> PureQSeries {
    let mu = Rational64::new((r % 12) as i64, 12);
    real_series(mu, (r / 12) as i64, &euler_product_power(2 * r, terms))
}

/// The discriminant `Delta = eta^{24}` of weight 12.
pub fn cusp_delta(terms: usize) -> Result<FixtureSeries> {
    if terms == 0 {
        return Err(Error::DomainError("at least one coefficient is required".into()));
    }
    // the product starts at q^1, so `terms` coefficients reach index `terms`
    Ok(FixtureSeries {
        name: "Delta".into(),
        weight: 12,
        series: eta_power(12, terms),
    })
}

/// `(1, tau, binom(tau, 2), ..., binom(tau, m-1))` in weight `1 - m`;
/// its image of `T` is exactly `I + N`.
pub fn binomial_rep(m: usize) -> Representation<GaussRat> {
    let basis: Vec<Poly> = (0..m).map(Poly::binomial).collect();
    rep_from_poly_basis(&basis, 1 - m as i64).expect("binomials span the polynomials of degree below m")
}

/// `chi_r(S) = e(-r/4)`, `chi_r(T) = e(r/12)`: the multiplier of `eta^{2r}`.
pub fn eta_character(r: usize) -> (C64, C64) {
    (unit_phase(-(r as f64) / 4.0), unit_phase(r as f64 / 12.0))
}

/// Block data `(r, m)` of a synthetic form: the block `eta^{2r} (1, tau, ..., binom(tau, m-1))`
/// of weight `r + 1 - m` for `chi_r` tensored with the binomial representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EtaBlock {
    pub r: usize,
    pub m: usize,
}

impl EtaBlock {
    pub fn weight(&self) -> i64 {
        self.r as i64 + 1 - self.m as i64
    }

    pub fn mu(&self) -> Rational64 {
        Rational64::new((self.r % 12) as i64, 12)
    }
}

/// Direct sum of eta-twisted binomial blocks, all of the same weight, with
/// `terms` retained coefficients per series and an optional frame.
pub fn synthetic_form(specs: &[EtaBlock], terms: usize, frame: Option<Matrix<C64>>) -> Result<VvmfForm> {
    let Some(first) = specs.first() else {
        return Err(Error::DomainError("no blocks given".into()));
    };
    let k = first.weight();
    if let Some(bad) = specs.iter().find(|b| b.weight() != k) {
        return Err(Error::InconsistentInput(format!(
            "block (r = {}, m = {}) has weight {}, expected {k}",
            bad.r,
            bad.m,
            bad.weight()
        )));
    }
    let mut reps = Vec::new();
    let mut blocks = Vec::new();
    for b in specs {
        let (chi_s, chi_t) = eta_character(b.r);
        reps.push(binomial_rep(b.m).to_float().twist(chi_s, chi_t)?);
        let eta = eta_power(b.r, terms);
        let mut h = vec![eta.clone()];
        h.extend((1..b.m).map(|_| PureQSeries::zero(b.mu())));
        blocks.push(LogBlock::new(b.mu(), h)?);
    }
    let rep = Representation::direct_sum(&reps)?;
    let form = VvmfForm::new(k, AnyRepresentation::Float(rep), Body::LogBlocks { blocks, frame: None })?;
    match frame {
        None => Ok(form),
        Some(a) => crate::vvmf::equivalence_transform(&form, &AnyMatrix::Float(a)),
    }
}

/// `L U` with unit triangular factors and integer entries in `[-bound, bound]`,
/// so the inverse is again integral.
pub fn random_unimodular_matrix<R: Rng + ?Sized>(rng: &mut R, p: usize, bound: i64) -> Matrix<GaussRat> {
    let tri = |rng: &mut R, lower: bool| {
        Matrix::from_fn(p, p, |i, j| {
            if i == j {
                GaussRat::one()
            } else if (i > j) == lower {
                GaussRat::from_i64(rng.gen_range(-bound..=bound))
            } else {
                GaussRat::zero()
            }
        })
    };
    let l = tri(rng, true);
    let u = tri(rng, false);
    &l * &u
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straightforward divisor sum.
    fn sigma(e: u32, n: i128) -> i128 {
        (1..=n).filter(|d| n % d == 0).map(|d| d.pow(e)).sum()
    }

    #[test]
    fn eisenstein_coefficients_match_divisor_sums() {
        let e4 = eisenstein_series(4, 30).unwrap().series;
        assert_eq!(e4.coeff(0).re, 1.0);
        assert_eq!(e4.coeff(1).re, 240.0);
        assert_eq!(e4.coeff(2).re, 2160.0);
        let e6 = eisenstein_series(6, 30).unwrap().series;
        for n in 1..30 {
            assert_eq!(e4.coeff(n).re, (240 * sigma(3, n as i128)) as f64);
            assert_eq!(e6.coeff(n).re, (-504 * sigma(5, n as i128)) as f64);
        }
        assert_eq!(eisenstein_series(8, 3), Err(Error::UnsupportedWeight(8)));
    }

    #[test]
    fn delta_coefficients() {
        // Ramanujan tau(1..6)
        let d = cusp_delta(6).unwrap().series;
        let expected = [1.0, -24.0, 252.0, -1472.0, 4830.0, -6048.0];
        for (n, t) in expected.iter().enumerate() {
            assert_eq!(d.coeff(n as i64 + 1).re, *t);
        }
        assert_eq!(d.mu(), Rational64::from_integer(0));
    }

    #[test]
    fn euler_pentagonal() {
        // prod (1 - q^n) = 1 - q - q^2 + q^5 + q^7 - q^12 - q^15 + ...
        let c = euler_product_power(1, 16);
        let mut expected = vec![0i128; 16];
        for (k, s) in [(0, 1), (1, -1), (2, -1), (5, 1), (7, 1), (12, -1), (15, -1)] {
            expected[k] = s;
        }
        assert_eq!(c, expected);
    }

    #[test]
    fn binomial_rep_t_is_unipotent_block() {
        for m in 1..=4 {
            let r = binomial_rep(m);
            let n = Matrix::from_fn(m, m, |i, j| if i == j || i == j + 1 { GaussRat::one() } else { GaussRat::zero() });
            assert_eq!(r.t(), &n);
        }
    }

    #[test]
    fn synthetic_weights_must_agree() {
        let ok = synthetic_form(&[EtaBlock { r: 2, m: 1 }, EtaBlock { r: 3, m: 2 }], 10, None);
        assert!(ok.is_ok());
        let bad = synthetic_form(&[EtaBlock { r: 2, m: 1 }, EtaBlock { r: 2, m: 2 }], 10, None);
        assert!(matches!(bad, Err(Error::InconsistentInput(_))));
    }
}
