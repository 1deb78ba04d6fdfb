//! Finite-dimensional representations of SL2(Z).
//!
//! A representation is determined by the images of `S` and `T`; the
//! constructor checks `S^4 = I` and `(ST)^3 = S^2` eagerly so that evaluation
//! along generator words is well defined.

pub mod jordan;

pub use jordan::{modified_jordan_t, JordanBlock, JordanData};

use num_bigint::{BigInt, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{AnyMatrix, Matrix, FLOAT_TOL};
use crate::modgroup::{GeneratorWord, Token, UnimodularMatrix};
use crate::poly::{slash_poly, Poly};
use crate::scalar::{GaussRat, Scalar, C64};

/// Tolerance for relation checks on the floating backend (Frobenius norm).
pub const RELATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Representation<F: Scalar> {
    s: Matrix<F>,
    t: Matrix<F>,
    s_inv: Matrix<F>,
    t_inv: Matrix<F>,
}

fn relation_residuals<F: Scalar>(s: &Matrix<F>, t: &Matrix<F>) -> (f64, f64, bool, bool) {
    let p = s.rows();
    let id = Matrix::identity(p);
    let s2 = s * s;
    let s4 = &s2 * &s2;
    let st = s * t;
    let st3 = &(&st * &st) * &st;
    (
        s4.distance(&id),
        st3.distance(&s2),
        s4 == id,
        st3 == s2,
    )
}

impl<F: Scalar> Representation<F> {
    pub fn new(s: Matrix<F>, t: Matrix<F>) -> Result<Self> {
        let p = s.rows();
        for m in [&s, &t] {
            if !m.is_square() || m.rows() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: if m.rows() != p { m.rows() } else { m.cols() },
                });
            }
        }
        if p == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let (r4, r3, e4, e3) = relation_residuals(&s, &t);
        if F::EXACT {
            if !e4 {
                return Err(Error::RelationViolation("S^4 != I".into()));
            }
            if !e3 {
                return Err(Error::RelationViolation("(ST)^3 != S^2".into()));
            }
        } else {
            if !(r4 <= RELATION_TOL) {
                return Err(Error::RelationViolation(format!("|S^4 - I| = {r4:e}")));
            }
            if !(r3 <= RELATION_TOL) {
                return Err(Error::RelationViolation(format!("|(ST)^3 - S^2| = {r3:e}")));
            }
        }
        let s_inv = s.inverse(FLOAT_TOL)?;
        let t_inv = t.inverse(FLOAT_TOL)?;
        Ok(Representation { s, t, s_inv, t_inv })
    }

    pub fn trivial() -> Self {
        Representation::new(Matrix::identity(1), Matrix::identity(1)).expect("trivial representation")
    }

    pub fn p(&self) -> usize {
        self.s.rows()
    }

    pub fn s(&self) -> &Matrix<F> {
        &self.s
    }

    pub fn t(&self) -> &Matrix<F> {
        &self.t
    }

    /// `T_img^n` for an arbitrary-precision exponent.
    pub fn t_power(&self, n: &BigInt) -> Matrix<F> {
        let base = match n.sign() {
            Sign::Minus => &self.t_inv,
            _ => &self.t,
        };
        let mag = n.magnitude();
        let mut acc = Matrix::identity(self.p());
        for i in (0..mag.bits()).rev() {
            acc = &acc * &acc;
            if mag.bit(i) {
                acc = &acc * base;
            }
        }
        acc
    }

    /// Image of an arbitrary (not necessarily canonical) word.
    pub fn evaluate_word(&self, w: &GeneratorWord) -> Matrix<F> {
        let mut acc = Matrix::identity(self.p());
        if w.negate() {
            acc = &self.s * &self.s;
        }
        for tok in w.tokens() {
            acc = match tok {
                Token::S => &acc * &self.s,
                Token::T(n) => &acc * &self.t_power(n),
            };
        }
        acc
    }

    pub fn evaluate(&self, g: &UnimodularMatrix) -> Matrix<F> {
        self.evaluate_word(&g.word())
    }

    /// Images replaced by `A X A^{-1}`.
    pub fn conjugate(&self, a: &Matrix<F>) -> Result<Self> {
        if a.rows() != self.p() || !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: a.rows(),
            });
        }
        let a_inv = a.inverse(FLOAT_TOL)?;
        let conj = |x: &Matrix<F>| &(a * x) * &a_inv;
        let s = conj(&self.s);
        let t = conj(&self.t);
        if F::EXACT {
            Representation::new(s, t)
        } else {
            // conjugation by an ill-conditioned matrix amplifies rounding;
            // relations hold by construction
            Ok(Representation {
                s_inv: conj(&self.s_inv),
                t_inv: conj(&self.t_inv),
                s,
                t,
            })
        }
    }

    pub fn direct_sum(parts: &[Representation<F>]) -> Result<Self> {
        let s: Vec<_> = parts.iter().map(|r| r.s.clone()).collect();
        let t: Vec<_> = parts.iter().map(|r| r.t.clone()).collect();
        Representation::new(Matrix::block_diag(&s), Matrix::block_diag(&t))
    }

    pub fn to_float(&self) -> Representation<C64> {
        Representation {
            s: self.s.to_c64(),
            t: self.t.to_c64(),
            s_inv: self.s_inv.to_c64(),
            t_inv: self.t_inv.to_c64(),
        }
    }

    /// Maximum relation residual (Frobenius), zero for exact relations.
    pub fn relation_residual(&self) -> f64 {
        let (r4, r3, _, _) = relation_residuals(&self.s, &self.t);
        r4.max(r3)
    }
}

impl Representation<C64> {
    /// Tensor with a one-dimensional character `chi`.
    pub fn twist(&self, chi_s: C64, chi_t: C64) -> Result<Self> {
        Representation::new(self.s.scale(&chi_s), self.t.scale(&chi_t))
    }
}

/// A representation tagged with its scalar backend.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyRepresentation {
    Exact(Representation<GaussRat>),
    Float(Representation<C64>),
}

impl AnyRepresentation {
    pub fn p(&self) -> usize {
        match self {
            AnyRepresentation::Exact(r) => r.p(),
            AnyRepresentation::Float(r) => r.p(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnyRepresentation::Exact(_))
    }

    pub fn evaluate(&self, g: &UnimodularMatrix) -> AnyMatrix {
        match self {
            AnyRepresentation::Exact(r) => AnyMatrix::Exact(r.evaluate(g)),
            AnyRepresentation::Float(r) => AnyMatrix::Float(r.evaluate(g)),
        }
    }

    pub fn evaluate_c64(&self, g: &UnimodularMatrix) -> Matrix<C64> {
        match self {
            AnyRepresentation::Exact(r) => r.evaluate(g).to_c64(),
            AnyRepresentation::Float(r) => r.evaluate(g),
        }
    }

    pub fn to_float(&self) -> Representation<C64> {
        match self {
            AnyRepresentation::Exact(r) => r.to_float(),
            AnyRepresentation::Float(r) => r.clone(),
        }
    }

    pub fn s(&self) -> AnyMatrix {
        match self {
            AnyRepresentation::Exact(r) => AnyMatrix::Exact(r.s().clone()),
            AnyRepresentation::Float(r) => AnyMatrix::Float(r.s().clone()),
        }
    }

    pub fn t(&self) -> AnyMatrix {
        match self {
            AnyRepresentation::Exact(r) => AnyMatrix::Exact(r.t().clone()),
            AnyRepresentation::Float(r) => AnyMatrix::Float(r.t().clone()),
        }
    }

    pub fn conjugate(&self, a: &AnyMatrix) -> Result<Self> {
        match (self, a) {
            (AnyRepresentation::Exact(r), AnyMatrix::Exact(a)) => Ok(AnyRepresentation::Exact(r.conjugate(a)?)),
            (AnyRepresentation::Float(r), AnyMatrix::Float(a)) => Ok(AnyRepresentation::Float(r.conjugate(a)?)),
            _ => Err(Error::BackendMismatch),
        }
    }

    pub fn relation_residual(&self) -> f64 {
        match self {
            AnyRepresentation::Exact(r) => r.relation_residual(),
            AnyRepresentation::Float(r) => r.relation_residual(),
        }
    }
}

impl From<Representation<GaussRat>> for AnyRepresentation {
    fn from(r: Representation<GaussRat>) -> Self {
        AnyRepresentation::Exact(r)
    }
}

impl From<Representation<C64>> for AnyRepresentation {
    fn from(r: Representation<C64>) -> Self {
        AnyRepresentation::Float(r)
    }
}

/// Matrix of `g` on homogeneous polynomials of degree `p - 1` under
/// `X -> aX + bY, Y -> cX + dY`. Row `i` expands the image of
/// `X^{p-1-i} Y^i` in the basis `X^{p-1-j} Y^j`.
pub fn sym_power_matrix(g: &UnimodularMatrix, p: usize) -> Matrix<GaussRat> {
    assert!(p >= 1);
    // dehomogenize with Y = 1: X^{p-1-j} Y^j  <->  x^{p-1-j}
    let x_img = Poly::from_integers(g.a(), g.b());
    let y_img = Poly::from_integers(g.c(), g.d());
    let mut m = Matrix::zeros(p, p);
    for i in 0..p {
        let img = &x_img.pow(p - 1 - i) * &y_img.pow(i);
        for j in 0..p {
            m[(i, j)] = img.coeff(p - 1 - j);
        }
    }
    m
}

/// The symmetric power `S^{p-1}` of the defining representation.
pub fn sym_power_rep(p: usize) -> Representation<GaussRat> {
    Representation::new(
        sym_power_matrix(&UnimodularMatrix::s(), p),
        sym_power_matrix(&UnimodularMatrix::t(), p),
    )
    .expect("symmetric powers satisfy the relations")
}

/// The unique representation `alpha` with `alpha(g) B = B|_k g` for a
/// linearly independent family `B` of polynomials spanning a stable space.
pub fn rep_from_poly_basis(basis: &[Poly], k: i64) -> Result<Representation<GaussRat>> {
    let n = basis.len();
    if n == 0 {
        return Err(Error::InconsistentInput("empty polynomial basis".into()));
    }
    let width = basis.iter().filter_map(Poly::degree).max().unwrap_or(0) + 1;
    let coef = |polys: &[Poly]| Matrix::from_fn(polys.len(), width, |i, j| polys[i].coeff(j));
    let b = coef(basis);
    let (_, pivots) = b.rref(0.0);
    if pivots.len() < n {
        return Err(Error::InconsistentInput("polynomial family is linearly dependent".into()));
    }
    let b_sub = Matrix::from_fn(n, n, |i, j| b[(i, pivots[j])].clone());
    let b_sub_inv = b_sub.inverse(0.0)?;
    let mut images = Vec::with_capacity(2);
    for g in [UnimodularMatrix::s(), UnimodularMatrix::t()] {
        let slashed = basis
            .iter()
            .map(|f| slash_poly(k, &g, f))
            .collect::<Result<Vec<_>>>()?;
        if slashed.iter().filter_map(Poly::degree).any(|d| d >= width) {
            return Err(Error::InconsistentInput("span is not stable under the slash action".into()));
        }
        let sl = coef(&slashed);
        let sl_sub = Matrix::from_fn(n, n, |i, j| sl[(i, pivots[j])].clone());
        let m = &sl_sub * &b_sub_inv;
        if &m * &b != sl {
            return Err(Error::InconsistentInput("span is not stable under the slash action".into()));
        }
        images.push(m);
    }
    let t = images.pop().expect("two images");
    let s = images.pop().expect("two images");
    Representation::new(s, t)
}

/// The representation attached to `C(tau) = (tau^{p-1}, ..., tau, 1)` in weight `1 - p`.
pub fn sigma_rep(p: usize) -> Representation<GaussRat> {
    assert!(p >= 1);
    rep_from_poly_basis(&c_basis(p), 1 - p as i64).expect("C spans a stable space")
}

/// `(tau^{p-1}, ..., tau, 1)`
pub fn c_basis(p: usize) -> Vec<Poly> {
    (0..p).map(|i| Poly::monomial(p - 1 - i)).collect()
}

/// Number of random combinations tried before reporting no invertible intertwiner.
pub const INTERTWINER_ATTEMPTS: usize = 50;

/// Invertible `A` with `A rho(g) = rho2(g) A` on the generators, if one exists.
pub fn find_intertwiner<F: Scalar>(
    rho: &Representation<F>,
    rho2: &Representation<F>,
) -> Result<Option<Matrix<F>>> {
    find_intertwiner_seeded(rho, rho2, 0)
}

pub fn find_intertwiner_seeded<F: Scalar>(
    rho: &Representation<F>,
    rho2: &Representation<F>,
    seed: u64,
) -> Result<Option<Matrix<F>>> {
    let p = rho.p();
    if rho2.p() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: rho2.p(),
        });
    }
    // unknown a_{ij} sits at index i*p + j
    let n = p * p;
    let mut sys = Matrix::<F>::zeros(2 * n, n);
    for (blk, (x, y)) in [(rho.s(), rho2.s()), (rho.t(), rho2.t())].into_iter().enumerate() {
        for i in 0..p {
            for j in 0..p {
                let row = blk * n + i * p + j;
                // (A X)_{ij} - (Y A)_{ij}
                for k in 0..p {
                    let v = sys[(row, i * p + k)].clone() + x[(k, j)].clone();
                    sys[(row, i * p + k)] = v;
                    let v = sys[(row, k * p + j)].clone() - y[(i, k)].clone();
                    sys[(row, k * p + j)] = v;
                }
            }
        }
    }
    let basis = sys.nullspace(FLOAT_TOL);
    if basis.is_empty() {
        return Ok(None);
    }
    let to_matrix = |v: &[F]| Matrix::from_vec(p, p, v.to_vec());
    let scale = rho.s().max_abs().max(rho.t().max_abs()).max(1.0);
    let valid = |a: &Matrix<F>| {
        if !a.is_invertible(FLOAT_TOL) {
            return false;
        }
        let tol = RELATION_TOL * scale * a.max_abs().max(1.0);
        (a * rho.s()).approx_eq(&(rho2.s() * a), tol) && (a * rho.t()).approx_eq(&(rho2.t() * a), tol)
    };
    if basis.len() == 1 {
        let a = to_matrix(&basis[0]);
        return Ok(valid(&a).then_some(a));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..INTERTWINER_ATTEMPTS {
        let coeffs: Vec<i64> = (0..basis.len()).map(|_| rng.gen_range(-5..=5)).collect();
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let mut v = vec![F::zero(); n];
        for (c, b) in coeffs.iter().zip(&basis) {
            if *c == 0 {
                continue;
            }
            let c = F::from_i64(*c);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi = vi.clone() + c.clone() * bi.clone();
            }
        }
        let a = to_matrix(&v);
        if valid(&a) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Backend-dispatching intertwiner search; mixed backends are rejected.
pub fn find_intertwiner_any(
    rho: &AnyRepresentation,
    rho2: &AnyRepresentation,
    seed: u64,
) -> Result<Option<AnyMatrix>> {
    match (rho, rho2) {
        (AnyRepresentation::Exact(a), AnyRepresentation::Exact(b)) => {
            Ok(find_intertwiner_seeded(a, b, seed)?.map(AnyMatrix::Exact))
        }
        (AnyRepresentation::Float(a), AnyRepresentation::Float(b)) => {
            Ok(find_intertwiner_seeded(a, b, seed)?.map(AnyMatrix::Float))
        }
        _ => Err(Error::BackendMismatch),
    }
}
