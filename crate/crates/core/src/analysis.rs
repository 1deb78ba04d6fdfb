//! Exponential-polynomial regrouping of transformed components, growth
//! probes near cusps, and Bol's identity.

use std::f64::consts::PI;

use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::modgroup::UnimodularMatrix;
use crate::poly::Poly;
use crate::qexp::{binom_evaluate, mu_to_f64, q_evaluate, q_nth_derivative, LogBlock, PureQSeries};
use crate::matrix::Matrix;
use crate::scalar::{GaussRat, C64};
use crate::vvmf::{Body, VvmfForm};

/// Coefficients below this fraction of the largest contribution are treated
/// as cancelled when regrouping floating data.
pub const CANCEL_TOL: f64 = 1e-12;
/// Points whose tail bound exceeds this fraction of `|value|` are dropped from a fit.
pub const FIT_TAIL_TOL: f64 = 1e-3;
/// Largest admissible truncation error in Bol residuals.
pub const BOL_TAIL_TOL: f64 = 1e-10;

/// `e^{2 pi i mu~ tau} g(tau)` with `g` a pure q-series.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpTerm {
    pub mu_tilde: Rational64,
    pub g: PureQSeries,
}

impl ExpTerm {
    /// `nu + mu~` for nonzero `g`.
    pub fn leading_exponent(&self) -> Option<Rational64> {
        (!self.g.is_zero()).then(|| Rational64::from_integer(self.g.nu()) + self.mu_tilde)
    }

    pub fn evaluate(&self, tau: C64) -> Result<(C64, f64)> {
        let v = q_evaluate(&self.g, tau)?;
        let phase = (C64::new(0.0, 2.0 * PI * mu_to_f64(self.mu_tilde)) * tau).exp();
        Ok((v.value * phase, v.tail_bound * phase.norm()))
    }
}

/// `sum_{s <= B} binom(tau, s) sum_j e^{2 pi i mu~_j tau} g_s^{(j)}(tau)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialPolySum {
    pub b: usize,
    pub k: i64,
    /// `layers[s]`, nonzero terms only, sorted by `mu~`.
    pub layers: Vec<Vec<ExpTerm>>,
}

fn cleanup(coeffs: Vec<C64>, scale: f64) -> Vec<C64> {
    coeffs
        .into_iter()
        .map(|c| if c.norm() <= CANCEL_TOL * scale { C64::zero() } else { c })
        .collect()
}

/// Regroups `sum_j sum_l alpha^{(j)}_l phi^{(j)}_l` by powers `binom(tau, s)`
/// and distinct exponents `mu~`.
pub fn regroup(blocks: &[LogBlock], row: &[C64], k: i64) -> Result<ExponentialPolySum> {
    let p: usize = blocks.iter().map(LogBlock::m).sum();
    if row.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: row.len(),
        });
    }
    let big_m = blocks.iter().map(LogBlock::m).max().unwrap_or(0);
    let mut mus: Vec<Rational64> = blocks.iter().map(LogBlock::mu).collect();
    mus.sort();
    mus.dedup();
    let mut layers = Vec::with_capacity(big_m);
    for s in 0..big_m {
        let mut layer = Vec::new();
        for &mu in &mus {
            // sum over blocks with this exponent and l = s+1..m_j of alpha_l h_{l-1-s}
            let mut lo = i64::MAX;
            let mut hi = i64::MIN;
            let mut reach: Option<i64> = None;
            let mut contributions = Vec::new();
            let mut offset = 0;
            for b in blocks {
                if b.mu() == mu {
                    for l in (s + 1)..=b.m() {
                        let alpha = row[offset + l - 1];
                        let h = &b.h()[l - 1 - s];
                        if alpha == C64::zero() {
                            continue;
                        }
                        if let Some(r) = h.reach() {
                            reach = Some(reach.map_or(r, |x| x.min(r)));
                        }
                        if !h.is_zero() {
                            lo = lo.min(h.nu());
                            hi = hi.max(h.nu() + h.coeffs().len() as i64);
                        }
                        contributions.push((alpha, h));
                    }
                }
                offset += b.m();
            }
            if contributions.is_empty() {
                continue;
            }
            if lo > hi {
                lo = reach.unwrap_or(0);
                hi = lo;
            }
            let scale = contributions.iter().map(|(a, h)| a.norm() * h.max_abs()).fold(0.0, f64::max);
            let coeffs: Vec<C64> = (lo..hi)
                .map(|n| contributions.iter().map(|(a, h)| a * h.coeff(n)).sum())
                .collect();
            let g = match reach {
                None => PureQSeries::new(Rational64::zero(), lo, cleanup(coeffs, scale), true)?,
                Some(r) => {
                    let g = PureQSeries::new(Rational64::zero(), lo, cleanup(coeffs, scale), false)?;
                    if g.is_zero() {
                        PureQSeries::zero_to(Rational64::zero(), r)
                    } else {
                        g.truncate(r)
                    }
                }
            };
            if !g.is_zero() {
                layer.push(ExpTerm { mu_tilde: mu, g });
            }
        }
        layers.push(layer);
    }
    let Some(b) = layers.iter().rposition(|l| !l.is_empty()) else {
        return Err(Error::ZeroSum);
    };
    layers.truncate(b + 1);
    Ok(ExponentialPolySum { b, k, layers })
}

/// Raw blocks of a series body and row `u` of `rho(g) P`.
pub fn regroup_form(form: &VvmfForm, u: usize, g: &UnimodularMatrix) -> Result<ExponentialPolySum> {
    let p = form.p();
    if u >= p {
        return Err(Error::IndexOutOfRange { index: u + 1, len: p });
    }
    let Some((blocks, _)) = form.body().blocks() else {
        return Err(Error::DomainError("regrouping needs a series body".into()));
    };
    regroup(&blocks, &regroup_row(form, u, g)?, form.k())
}

impl ExponentialPolySum {
    /// Value at `tau` and a bound on the truncation error.
    pub fn evaluate(&self, tau: C64) -> Result<(C64, f64)> {
        let mut value = C64::zero();
        let mut tail = 0.0;
        for (s, layer) in self.layers.iter().enumerate() {
            let bs = binom_evaluate(s, tau);
            for t in layer {
                let (v, e) = t.evaluate(tau)?;
                value += bs * v;
                tail += bs.norm() * e;
            }
        }
        Ok((value, tail))
    }

    pub fn top_layer(&self) -> &[ExpTerm] {
        &self.layers[self.b]
    }
}

/// The unique minimizer of `nu(j, B) + mu~_j` over the top layer.
pub fn dominant_term(sum: &ExponentialPolySum) -> Result<(usize, Rational64)> {
    sum.layers
        .get(sum.b)
        .into_iter()
        .flatten()
        .enumerate()
        .filter_map(|(j, t)| t.leading_exponent().map(|e| (j, e)))
        .min_by_key(|&(_, e)| e)
        .ok_or(Error::ZeroSum)
}

/// Upper bound on `|e^{2 pi i e tau} x|` over a term's coefficients at height `y`,
/// excluding the leading coefficient when `skip_lead`.
fn term_envelope(t: &ExpTerm, y: f64, skip_lead: bool) -> f64 {
    let mu = mu_to_f64(t.mu_tilde);
    let decay = |x: f64| (-2.0 * PI * y * x).exp();
    let mut s: f64 = t
        .g
        .terms()
        .skip(usize::from(skip_lead))
        .map(|(n, c)| c.norm() * decay(n as f64 + mu))
        .sum();
    if let Some(reach) = t.g.reach() {
        let r = decay(1.0);
        s += t.g.max_abs().max(1.0) * decay(reach as f64 + mu) / (1.0 - r);
    }
    s
}

fn domination_margin(top: &[ExpTerm], j0: usize, y: f64) -> f64 {
    let d = &top[j0];
    let (_, lead) = d.g.terms().next().expect("dominant term is nonzero");
    let mu = mu_to_f64(d.mu_tilde);
    let lower = lead.norm() * (-2.0 * PI * y * (d.g.nu() as f64 + mu)).exp() - term_envelope(d, y, true);
    let upper: f64 = top.iter().enumerate().filter(|&(j, _)| j != j0).map(|(_, t)| term_envelope(t, y, false)).sum();
    lower - 2.0 * upper
}

/// Whether `|dominant| > 2 |rest of the top layer|` at `tau`, by direct evaluation.
pub fn domination_holds(sum: &ExponentialPolySum, tau: C64) -> Result<bool> {
    let (j0, _) = dominant_term(sum)?;
    let top = sum.top_layer();
    let (dom, _) = top[j0].evaluate(tau)?;
    let mut rest = C64::zero();
    for (j, t) in top.iter().enumerate() {
        if j != j0 {
            rest += t.evaluate(tau)?.0;
        }
    }
    Ok(dom.norm() > 2.0 * rest.norm())
}

const Y_MAX: f64 = 1e4;

/// A height `y0` above which the dominant top-layer term beats twice the rest,
/// certified from retained coefficients and geometric tail bounds.
pub fn min_imag_threshold(sum: &ExponentialPolySum) -> Result<f64> {
    let (j0, _) = dominant_term(sum)?;
    let top = sum.top_layer();
    if top.len() == 1 {
        return Ok(1.0);
    }
    let mut hi = 1e-2;
    while domination_margin(top, j0, hi) <= 0.0 {
        hi *= 2.0;
        if hi > Y_MAX {
            return Err(Error::TruncationUnreliable {
                bound: domination_margin(top, j0, Y_MAX).abs(),
                tol: 0.0,
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if domination_margin(top, j0, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let y0 = hi * (1.0 + 1e-9);
    for factor in [1.0, 1.5, 2.0] {
        for x in [-0.5, -0.25, 0.0, 0.25, 0.5] {
            if !domination_holds(sum, C64::new(x, y0 * factor))? {
                return Err(Error::TruncationUnreliable {
                    bound: y0 * factor,
                    tol: 0.0,
                });
            }
        }
    }
    Ok(y0)
}

/// Least-squares fit of `log |phi_u(g(tau0 + N))|` against `log N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub n_range: (u64, u64),
    pub points: usize,
    /// Domination height of the regrouped sum; absent for polynomial bodies.
    pub y0: Option<f64>,
    pub gamma: UnimodularMatrix,
    pub tau0: C64,
    pub component: usize,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n < 3 {
        return Err(Error::DegenerateFit(format!("only {n} usable points")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok((slope, intercept, stderr))
}

/// Growth of component `u` along `g(tau0 + N)`, `N` in `[N_max/2, N_max]`.
///
/// Series bodies are evaluated through the functional equation,
/// `phi_u(g(tau)) = (c tau + d)^k Sigma_1(tau)`, so only heights `Im tau0` are needed.
pub fn growth_probe(form: &VvmfForm, u: usize, g: &UnimodularMatrix, tau0: C64, n_max: u64) -> Result<GrowthFit> {
    if g.c().is_zero() {
        return Err(Error::DomainError("c = 0: g(tau + N) does not approach a cusp a/c".into()));
    }
    if !(tau0.im > 0.0) {
        return Err(Error::DomainError(format!("Im(tau0) must be positive, got {tau0}")));
    }
    if u >= form.p() {
        return Err(Error::IndexOutOfRange {
            index: u + 1,
            len: form.p(),
        });
    }
    let lo = (n_max / 2).max(1);
    if n_max < lo + 2 {
        return Err(Error::DegenerateFit(format!("N range [{lo}, {n_max}] is too short")));
    }
    let k = form.k();
    let (sum, y0) = match form.body() {
        Body::Poly(_) => (None, None),
        _ => {
            let sum = regroup_form(form, u, g)?;
            let y0 = min_imag_threshold(&sum)?;
            if tau0.im <= y0 {
                return Err(Error::DomainError(format!(
                    "Im(tau0) = {} does not exceed the domination height {y0}",
                    tau0.im
                )));
            }
            (Some(sum), Some(y0))
        }
    };
    let values: Vec<Result<Option<(f64, f64)>>> = (lo..=n_max)
        .map(|n| {
            let tau = tau0 + n as f64;
            let (value, tail) = match (&sum, form.body()) {
                (None, Body::Poly(v)) => (v.0[u].eval(g.moebius(tau)?), 0.0),
                (Some(s), _) => {
                    let (v, t) = s.evaluate(tau)?;
                    let f = g.cocycle(tau).powi(k as i32);
                    (v * f, t * f.norm())
                }
                _ => unreachable!("series bodies always regroup"),
            };
            let mag = value.norm();
            if !mag.is_finite() || mag == 0.0 || tail > FIT_TAIL_TOL * mag {
                return Ok(None);
            }
            Ok(Some(((n as f64).ln(), mag.ln())))
        })
        .collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for v in values {
        if let Some((x, y)) = v? {
            xs.push(x);
            ys.push(y);
        }
    }
    let (slope, intercept, stderr) = linear_fit(&xs, &ys)?;
    Ok(GrowthFit {
        slope,
        intercept,
        stderr,
        n_range: (lo, n_max),
        points: xs.len(),
        y0,
        gamma: g.clone(),
        tau0,
        component: u,
    })
}

/// Function whose Bol identity is checked.
#[derive(Clone, Debug, PartialEq)]
pub enum BolInput {
    Poly(Poly),
    Series(PureQSeries),
}

/// `N / (c tau + d)^e`
#[derive(Clone, Debug, PartialEq)]
struct Rational {
    num: Poly,
    e: usize,
}

impl Rational {
    fn derivative(&self, lin: &Poly, c: &GaussRat) -> Rational {
        use crate::scalar::Scalar;
        let dn = &(&self.num.derivative() * lin) - &self.num.scale(&(c.clone() * GaussRat::from_i64(self.e as i64)));
        Rational { num: dn, e: self.e + 1 }
    }

    fn lift(&self, lin: &Poly, e: usize) -> Poly {
        &self.num * &lin.pow(e - self.e)
    }
}

fn bol_poly(f: &Poly, g: &UnimodularMatrix, m: usize) -> (Rational, Rational) {
    use crate::scalar::Scalar;
    let a = GaussRat::from_bigint(g.a());
    let b = GaussRat::from_bigint(g.b());
    let c = GaussRat::from_bigint(g.c());
    let d = GaussRat::from_bigint(g.d());
    let num = Poly::linear(a, b);
    let lin = Poly::linear(c.clone(), d);
    // (c tau + d)^{M-1} f(g tau) = sum_j f_j (a tau + b)^j (c tau + d)^{M-1-j}
    let compose = |h: &Poly, shift: i64| -> Rational {
        let deg = h.degree().unwrap_or(0) as i64;
        let e = (deg - shift).max(0) as usize;
        let mut out = Poly::zero();
        for (j, hj) in h.coeffs().iter().enumerate() {
            let power = shift - j as i64 + e as i64;
            out = &out + &(&num.pow(j) * &lin.pow(power as usize)).scale(hj);
        }
        Rational { num: out, e }
    };
    let mut lhs = compose(f, m as i64 - 1);
    for _ in 0..m {
        lhs = lhs.derivative(&lin, &c);
    }
    // (c tau + d)^{-1-M} f^{(M)}(g tau)
    let rhs = compose(&f.nth_derivative(m), -1 - m as i64);
    (lhs, rhs)
}

fn bell_polynomials(xs: &[C64], n: usize) -> Vec<Vec<C64>> {
    // table[r][k] = B_{r,k}(x_1, ..., x_{r-k+1})
    let mut table = vec![vec![C64::zero(); n + 1]; n + 1];
    table[0][0] = C64::new(1.0, 0.0);
    for r in 1..=n {
        for k in 1..=r {
            let mut acc = C64::zero();
            for i in 1..=(r - k + 1) {
                acc += binomial(r - 1, i - 1) * xs[i - 1] * table[r - i][k - 1];
            }
            table[r][k] = acc;
        }
    }
    table
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn falling(n: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64)
}

/// Both sides of Bol's identity for a q-series at one point, and the error bound.
fn bol_series_at(h: &PureQSeries, g: &UnimodularMatrix, m: usize, tau: C64) -> Result<(C64, C64, f64)> {
    let [_, _, c, _] = g.to_f64();
    let w = g.moebius(tau)?;
    let j = g.cocycle(tau);
    // derivatives of g tau: (-1)^{r-1} r! c^{r-1} (c tau + d)^{-r-1}
    let xs: Vec<C64> = (1..=m.max(1))
        .map(|r| {
            let sign = if r % 2 == 1 { 1.0 } else { -1.0 };
            j.powi(-(r as i32) - 1) * (sign * falling(r, r) * c.powi(r as i32 - 1))
        })
        .collect();
    let bell = bell_polynomials(&xs, m);
    let mut derivs = Vec::with_capacity(m + 1);
    for k in 0..=m {
        derivs.push(q_evaluate(&q_nth_derivative(h, k), w)?);
    }
    let mut lhs = C64::zero();
    let mut tail = 0.0;
    for r in 0..=m {
        // D^{M-r} (c tau + d)^{M-1}
        let jr = m - r;
        if jr > m - 1 && m >= 1 {
            continue;
        }
        let poly_part = j.powi(m as i32 - 1 - jr as i32) * (falling(m - 1, jr) * c.powi(jr as i32));
        // D^r [h(g tau)]
        let (comp, comp_tail) = if r == 0 {
            (derivs[0].value, derivs[0].tail_bound)
        } else {
            (1..=r).fold((C64::zero(), 0.0), |(v, t), k| {
                (v + derivs[k].value * bell[r][k], t + derivs[k].tail_bound * bell[r][k].norm())
            })
        };
        let weight = binomial(m, r);
        lhs += poly_part * comp * weight;
        tail += (poly_part * weight).norm() * comp_tail;
    }
    let factor = j.powi(-1 - m as i32);
    let rhs = factor * derivs[m].value;
    tail += factor.norm() * derivs[m].tail_bound;
    Ok((lhs, rhs, tail))
}

/// `max |LHS - RHS| / max(1, |RHS|)` over the samples for
/// `D^M((c tau + d)^{M-1} phi(g tau)) = (c tau + d)^{-1-M} phi^{(M)}(g tau)`.
///
/// Polynomials are compared as exact rational functions first; a symbolic
/// match returns exactly zero. Series use the term rule, Leibniz, and Faa di
/// Bruno with the derivatives of the Moebius map.
pub fn bol_check(phi: &BolInput, g: &UnimodularMatrix, m: usize, taus: &[C64]) -> Result<f64> {
    if m == 0 {
        return Err(Error::DomainError("Bol's identity needs M >= 1".into()));
    }
    match phi {
        BolInput::Poly(f) => {
            let (lhs, rhs) = bol_poly(f, g, m);
            let lin = Poly::from_integers(g.c(), g.d());
            let e = lhs.e.max(rhs.e);
            if lhs.lift(&lin, e) == rhs.lift(&lin, e) {
                return Ok(0.0);
            }
            let mut worst: f64 = 0.0;
            for &tau in taus {
                let den = g.cocycle(tau);
                let l = lhs.num.eval(tau) / den.powi(lhs.e as i32);
                let r = rhs.num.eval(tau) / den.powi(rhs.e as i32);
                worst = worst.max((l - r).norm() / r.norm().max(1.0));
            }
            Ok(worst)
        }
        BolInput::Series(h) => {
            let mut worst: f64 = 0.0;
            for &tau in taus {
                let (l, r, tail) = bol_series_at(h, g, m, tau)?;
                let scale = r.norm().max(1.0);
                if tail > BOL_TAIL_TOL * scale {
                    return Err(Error::TruncationUnreliable {
                        bound: tail / scale,
                        tol: BOL_TAIL_TOL,
                    });
                }
                worst = worst.max((l - r).norm() / scale);
            }
            Ok(worst)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Flatness {
    /// Every term is a constant at exponent zero; the constants `b_0` in input order.
    Flat { b0: Vec<C64> },
    /// A coefficient surviving `M` derivatives: term index, `n`, and exponent `n + mu~`.
    NotFlat { term: usize, n: i64, exponent: Rational64 },
}

/// Whether `D^M sum_j e^{2 pi i mu~_j tau} g_j(tau)` vanishes identically,
/// decided coefficientwise by the term rule.
pub fn exp_sum_flatness(terms: &[(Rational64, PureQSeries)], m: usize) -> Result<Flatness> {
    for (i, (a, _)) in terms.iter().enumerate() {
        if terms[..i].iter().any(|(b, _)| b == a) {
            return Err(Error::DomainError(format!("exponent offset {a} appears twice")));
        }
    }
    let mut b0 = Vec::with_capacity(terms.len());
    for (j, (mu, g)) in terms.iter().enumerate() {
        let shifted = PureQSeries::new(*mu, g.nu(), g.coeffs().to_vec(), g.is_exact())?;
        let d = q_nth_derivative(&shifted, m);
        if let Some((n, _)) = d.terms().next() {
            return Ok(Flatness::NotFlat {
                term: j,
                n,
                exponent: Rational64::from_integer(n) + mu,
            });
        }
        b0.push(g.coeff(0));
    }
    Ok(Flatness::Flat { b0 })
}

/// Row `u` of `rho(g)` times the frame, as used by [`regroup_form`].
pub fn regroup_row(form: &VvmfForm, u: usize, g: &UnimodularMatrix) -> Result<Vec<C64>> {
    let rho: Matrix<C64> = form.rep().evaluate_c64(g);
    let m = match form.body().blocks() {
        Some((_, Some(f))) => &rho * &f.to_c64(),
        _ => rho,
    };
    if u >= m.rows() {
        return Err(Error::IndexOutOfRange { index: u + 1, len: m.rows() });
    }
    Ok(m.row(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qexp::assemble_component;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn exact(mu: Rational64, nu: i64, cs: &[f64]) -> PureQSeries {
        PureQSeries::new(mu, nu, cs.iter().map(|&x| c(x)).collect(), true).unwrap()
    }

    #[test]
    fn regroup_single_block() {
        let h = exact(r(1, 3), 0, &[2.0, 1.0]);
        let b = LogBlock::new(r(1, 3), vec![h]).unwrap();
        let sum = regroup(&[b], &[c(1.0)], 0).unwrap();
        assert_eq!(sum.b, 0);
        assert_eq!(sum.layers[0].len(), 1);
        assert_eq!(sum.layers[0][0].mu_tilde, r(1, 3));
        assert_eq!(sum.layers[0][0].g.coeffs(), &[c(2.0), c(1.0)]);
    }

    #[test]
    fn regroup_merges_equal_offsets() {
        let b1 = LogBlock::new(r(1, 2), vec![exact(r(1, 2), 0, &[1.0, 2.0])]).unwrap();
        let b2 = LogBlock::new(r(1, 2), vec![exact(r(1, 2), 1, &[5.0])]).unwrap();
        let sum = regroup(&[b1, b2], &[c(1.0), c(1.0)], 0).unwrap();
        assert_eq!(sum.layers[0].len(), 1);
        assert_eq!(sum.layers[0][0].g.coeffs(), &[c(1.0), c(7.0)]);
    }

    #[test]
    fn regroup_top_degree_is_block_size() {
        let b = LogBlock::new(r(0, 1), vec![exact(r(0, 1), 0, &[1.0]), exact(r(0, 1), 1, &[3.0])]).unwrap();
        let sum = regroup(std::slice::from_ref(&b), &[c(0.0), c(2.0)], 0).unwrap();
        assert_eq!(sum.b, 1);
        let only_first = regroup(std::slice::from_ref(&b), &[c(2.0), c(0.0)], 0).unwrap();
        assert_eq!(only_first.b, 0);
        assert_eq!(regroup(&[b], &[c(0.0), c(0.0)], 0), Err(Error::ZeroSum));
    }

    #[test]
    fn regroup_matches_assembly() {
        let b1 = LogBlock::new(r(1, 3), vec![exact(r(1, 3), 0, &[1.0, -2.0, 0.5]), exact(r(1, 3), 0, &[0.0, 3.0])]).unwrap();
        let b2 = LogBlock::new(r(0, 1), vec![exact(r(0, 1), 0, &[4.0, 1.0])]).unwrap();
        let row = [C64::new(0.5, 1.0), c(-1.5), C64::new(0.0, 2.0)];
        let sum = regroup(&[b1.clone(), b2.clone()], &row, 0).unwrap();
        for tau in [C64::new(0.2, 0.7), C64::new(-1.3, 1.1)] {
            let direct = row[0] * assemble_component(&b1, 1, tau).unwrap()
                + row[1] * assemble_component(&b1, 2, tau).unwrap()
                + row[2] * assemble_component(&b2, 1, tau).unwrap();
            let (v, _) = sum.evaluate(tau).unwrap();
            assert!((v - direct).norm() < 1e-12 * direct.norm().max(1.0));
        }
    }

    fn sum_of(terms: Vec<ExpTerm>) -> ExponentialPolySum {
        ExponentialPolySum { b: 0, k: 0, layers: vec![terms] }
    }

    #[test]
    fn dominant_term_examples() {
        let one = ExpTerm { mu_tilde: r(0, 1), g: exact(r(0, 1), 0, &[1.0]) };
        assert_eq!(dominant_term(&sum_of(vec![one.clone()])).unwrap(), (0, r(0, 1)));
        let half = ExpTerm { mu_tilde: r(1, 2), g: exact(r(0, 1), 0, &[1.0]) };
        assert_eq!(dominant_term(&sum_of(vec![one.clone(), half])).unwrap(), (0, r(0, 1)));
        let third = ExpTerm { mu_tilde: r(1, 3), g: exact(r(0, 1), 0, &[1.0]) };
        let q1 = ExpTerm { mu_tilde: r(0, 1), g: exact(r(0, 1), 1, &[1.0]) };
        assert_eq!(dominant_term(&sum_of(vec![q1, third])).unwrap(), (1, r(1, 3)));
        assert_eq!(dominant_term(&sum_of(vec![])), Err(Error::ZeroSum));
    }

    #[test]
    fn threshold_two_terms() {
        let one = ExpTerm { mu_tilde: r(0, 1), g: exact(r(0, 1), 0, &[1.0]) };
        let half = ExpTerm { mu_tilde: r(1, 2), g: exact(r(0, 1), 0, &[1.0]) };
        let sum = sum_of(vec![one.clone(), half]);
        let y0 = min_imag_threshold(&sum).unwrap();
        // 1 > 2 e^{-pi y}  iff  y > ln 2 / pi
        assert!((y0 - 2f64.ln() / PI).abs() < 1e-8, "{y0}");
        assert_eq!(min_imag_threshold(&sum_of(vec![one])).unwrap(), 1.0);
    }

    #[test]
    fn bol_order_one_and_low_degree() {
        use crate::scalar::Scalar;
        let g = UnimodularMatrix::new(2, 1, 1, 1).unwrap();
        let taus = [C64::new(0.3, 1.2)];
        let f = Poly::new(vec![GaussRat::from_i64(3), GaussRat::from_i64(-1), GaussRat::from_i64(2)]);
        assert_eq!(bol_check(&BolInput::Poly(f.clone()), &g, 1, &taus).unwrap(), 0.0);
        assert_eq!(bol_check(&BolInput::Poly(f.clone()), &g, 3, &taus).unwrap(), 0.0);
        assert_eq!(bol_check(&BolInput::Poly(f), &g, 5, &taus).unwrap(), 0.0);
        let q = PureQSeries::monomial(r(0, 1), 1, c(1.0)).unwrap();
        let res = bol_check(&BolInput::Series(q.clone()), &UnimodularMatrix::s(), 2, &[C64::new(0.0, 2.0)]).unwrap();
        assert!(res < 1e-8, "{res}");
        let res = bol_check(&BolInput::Series(q), &g, 1, &taus).unwrap();
        assert!(res < 1e-13, "{res}");
    }

    #[test]
    fn bol_series_against_hand_derivative() {
        // M = 2, g = S: D^2 (tau e(-1/tau)) computed by hand
        let q = PureQSeries::monomial(r(0, 1), 1, c(1.0)).unwrap();
        let tau = C64::new(0.4, 1.3);
        let a = C64::new(0.0, 2.0 * PI);
        let e = (-a / tau).exp();
        // d/dtau [tau e] = e + tau e a/tau^2 = e (1 + a/tau)
        // d^2 = e (a/tau^2)(1 + a/tau) - e a/tau^2 = e a^2 / tau^3
        let hand = e * a * a / tau.powi(3);
        let rhs = tau.powi(-3) * a * a * e;
        assert!((hand - rhs).norm() < 1e-12 * rhs.norm());
        let (l, rr, _) = bol_series_at(&q, &UnimodularMatrix::s(), 2, tau).unwrap();
        assert!((l - hand).norm() < 1e-10 * hand.norm().max(1.0));
        assert!((rr - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn flatness_examples() {
        let five = (r(0, 1), exact(r(0, 1), 0, &[5.0]));
        assert_eq!(exp_sum_flatness(&[five], 2).unwrap(), Flatness::Flat { b0: vec![c(5.0)] });
        let half = (r(1, 2), exact(r(0, 1), 0, &[1.0]));
        assert_eq!(
            exp_sum_flatness(&[half], 3).unwrap(),
            Flatness::NotFlat { term: 0, n: 0, exponent: r(1, 2) }
        );
        let lin = (r(0, 1), exact(r(0, 1), 0, &[1.0, 1.0]));
        assert_eq!(
            exp_sum_flatness(&[lin], 1).unwrap(),
            Flatness::NotFlat { term: 0, n: 1, exponent: r(1, 1) }
        );
    }
}
