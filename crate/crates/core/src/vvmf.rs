//! Vector-valued modular forms `(rho, F)` of integral weight and the
//! natural-boundary classifier.
//!
//! A series body stores raw components `G` (the concatenated block components
//! `phi_1, ..., phi_m` of every block) together with an optional frame `P`;
//! the form is `F = P G` and `rho(T) = P J P^{-1}` with `J` the block matrix
//! `diag(e(mu_i) (I + N))`. Without a frame `P = I`.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::Zero as _;

use crate::error::{Error, Result};
use crate::matrix::{AnyMatrix, Matrix, FLOAT_TOL};
use crate::modgroup::UnimodularMatrix;
use crate::poly::{self, Poly};
use crate::qexp::{assemble_component_bounded, holomorphy_check, mu_to_f64, LogBlock, PureQSeries};
use crate::repspace::jordan::jordan_block;
use crate::repspace::{sigma_rep, AnyRepresentation};
use crate::scalar::{unit_phase, GaussRat, Scalar, C64};

/// Threshold for the optional numeric functional-equation check.
pub const FUNCEQ_VERIFY_TOL: f64 = 1e-8;
/// Largest truncation tail tolerated by numeric residuals.
pub const FUNCEQ_TAIL_TOL: f64 = 1e-10;

/// Polynomial components with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVector(pub Vec<Poly>);

impl PolyVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Poly::is_zero)
    }

    /// `A v` for an exact matrix `A`.
    pub fn transform(&self, a: &Matrix<GaussRat>) -> PolyVector {
        PolyVector(
            (0..a.rows())
                .map(|i| {
                    self.0.iter().enumerate().fold(Poly::zero(), |acc, (j, f)| {
                        let c = &a[(i, j)];
                        if c.is_zero() {
                            acc
                        } else {
                            &acc + &f.scale(c)
                        }
                    })
                })
                .collect(),
        )
    }

    pub fn eval(&self, tau: C64) -> Vec<C64> {
        self.0.iter().map(|f| f.eval(tau)).collect()
    }
}

/// `(c tau + d)^{-k} v(g tau)` componentwise.
pub fn slash_poly(k: i64, g: &UnimodularMatrix, v: &PolyVector) -> Result<PolyVector> {
    v.0.iter().map(|f| poly::slash_poly(k, g, f)).collect::<Result<_>>().map(PolyVector)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    Poly(PolyVector),
    LogBlocks { blocks: Vec<LogBlock>, frame: Option<AnyMatrix> },
    /// One series per component; equivalent to blocks of size one.
    Scalars { series: Vec<PureQSeries>, frame: Option<AnyMatrix> },
}

impl Body {
    /// Blocks and frame for series bodies.
    pub fn blocks(&self) -> Option<(Vec<LogBlock>, Option<&AnyMatrix>)> {
        match self {
            Body::Poly(_) => None,
            Body::LogBlocks { blocks, frame } => Some((blocks.clone(), frame.as_ref())),
            Body::Scalars { series, frame } => Some((
                series
                    .iter()
                    .map(|s| LogBlock::new(s.mu(), vec![s.clone()]).expect("offset shared by construction"))
                    .collect(),
                frame.as_ref(),
            )),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Body::Poly(v) => v.len(),
            Body::LogBlocks { blocks, .. } => blocks.iter().map(LogBlock::m).sum(),
            Body::Scalars { series, .. } => series.len(),
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            Body::Poly(_) => true,
            Body::LogBlocks { blocks, .. } => blocks.iter().all(LogBlock::is_exact),
            Body::Scalars { series, .. } => series.iter().all(PureQSeries::is_exact),
        }
    }

    /// True when every raw component vanishes identically (the frame is invertible).
    pub fn is_zero(&self) -> bool {
        match self {
            Body::Poly(v) => v.is_zero(),
            Body::LogBlocks { blocks, .. } => blocks.iter().all(|b| b.is_exact() && b.is_zero()),
            Body::Scalars { series, .. } => series.iter().all(|s| s.is_exact() && s.is_zero()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VvmfForm {
    k: i64,
    rep: AnyRepresentation,
    body: Body,
}

/// `e(mu)` exactly when it lies in `Q(i)`.
fn exact_phase(mu: Rational64) -> Option<GaussRat> {
    let q = |a, b| Rational64::new(a, b);
    if mu == q(0, 1) {
        Some(GaussRat::one())
    } else if mu == q(1, 4) {
        Some(GaussRat::i())
    } else if mu == q(1, 2) {
        Some(-GaussRat::one())
    } else if mu == q(3, 4) {
        Some(-GaussRat::i())
    } else {
        None
    }
}

fn block_matrix_exact(blocks: &[LogBlock]) -> Option<Matrix<GaussRat>> {
    let parts = blocks
        .iter()
        .map(|b| exact_phase(b.mu()).map(|l| jordan_block(l, b.m())))
        .collect::<Option<Vec<_>>>()?;
    Some(Matrix::block_diag(&parts))
}

fn block_matrix_float(blocks: &[LogBlock]) -> Matrix<C64> {
    let parts: Vec<_> = blocks.iter().map(|b| jordan_block(unit_phase(mu_to_f64(b.mu())), b.m())).collect();
    Matrix::block_diag(&parts)
}

fn check_frame(rep: &AnyRepresentation, blocks: &[LogBlock], frame: Option<&AnyMatrix>) -> Result<()> {
    let p = rep.p();
    if let Some(f) = frame {
        if f.rows() != p || f.cols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: if f.rows() != p { f.rows() } else { f.cols() },
            });
        }
    }
    let exact = match (rep, frame, block_matrix_exact(blocks)) {
        (AnyRepresentation::Exact(r), None, Some(j)) => Some(r.t() == &j),
        (AnyRepresentation::Exact(r), Some(AnyMatrix::Exact(f)), Some(j)) => {
            if !f.is_invertible(0.0) {
                return Err(Error::SingularMatrix);
            }
            Some(r.t() * f == f * &j)
        }
        _ => None,
    };
    let ok = match exact {
        Some(ok) => ok,
        None => {
            let t = rep.t().to_c64();
            let f = frame.map_or_else(|| Matrix::identity(p), AnyMatrix::to_c64);
            if !f.is_invertible(FLOAT_TOL) {
                return Err(Error::SingularMatrix);
            }
            let j = block_matrix_float(blocks);
            let scale = t.max_abs().max(1.0) * f.max_abs().max(1.0);
            (&t * &f).distance(&(&f * &j)) <= 1e-9 * scale
        }
    };
    if !ok {
        return Err(Error::InconsistentInput(
            "rho(T) is not conjugate by the frame to the block matrix of the expansion".into(),
        ));
    }
    Ok(())
}

impl VvmfForm {
    /// Checks dimensions, the block structure against `rho(T)`, and holomorphy.
    pub fn new(k: i64, rep: AnyRepresentation, body: Body) -> Result<Self> {
        let p = rep.p();
        if body.dimension() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: body.dimension(),
            });
        }
        match &body {
            Body::Poly(v) => {
                if v.0.iter().filter_map(Poly::degree).any(|d| d >= p) {
                    return Err(Error::InconsistentInput(format!("a component has degree above {}", p - 1)));
                }
            }
            _ => {
                let (blocks, frame) = body.blocks().expect("series body");
                for (i, b) in blocks.iter().enumerate() {
                    if let (false, Some((s, n))) = holomorphy_check(b) {
                        return Err(Error::InconsistentInput(format!(
                            "block {i} is not holomorphic: h_{s} has a term at n = {n}"
                        )));
                    }
                }
                check_frame(&rep, &blocks, frame)?;
            }
        }
        Ok(VvmfForm { k, rep, body })
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn rep(&self) -> &AnyRepresentation {
        &self.rep
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn p(&self) -> usize {
        self.rep.p()
    }

    pub fn is_exact(&self) -> bool {
        self.body.is_exact()
    }

    /// `F(tau)` and a bound on the truncation error of each entry.
    pub fn evaluate(&self, tau: C64) -> Result<(Vec<C64>, f64)> {
        if !(tau.im > 0.0) {
            return Err(Error::DomainError(format!("Im(tau) must be positive, got {tau}")));
        }
        match &self.body {
            Body::Poly(v) => Ok((v.eval(tau), 0.0)),
            _ => {
                let (blocks, frame) = self.body.blocks().expect("series body");
                let mut raw = Vec::with_capacity(self.p());
                let mut tails = Vec::with_capacity(self.p());
                for b in &blocks {
                    for l in 1..=b.m() {
                        let (v, t) = assemble_component_bounded(b, l, tau)?;
                        raw.push(v);
                        tails.push(t);
                    }
                }
                match frame {
                    None => Ok((raw, tails.into_iter().fold(0.0, f64::max))),
                    Some(f) => {
                        let f = f.to_c64();
                        let tail = (0..f.rows())
                            .map(|i| (0..f.cols()).map(|j| f[(i, j)].norm() * tails[j]).sum::<f64>())
                            .fold(0.0, f64::max);
                        Ok((f.mul_vec(&raw), tail))
                    }
                }
            }
        }
    }
}

/// `(sigma_p, C, 1 - p)` with `C = (tau^{p-1}, ..., tau, 1)`.
pub fn make_c(p: usize) -> VvmfForm {
    VvmfForm {
        k: 1 - p as i64,
        rep: AnyRepresentation::Exact(sigma_rep(p)),
        body: Body::Poly(PolyVector(crate::repspace::c_basis(p))),
    }
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max_tau || F|_k g (tau) - rho(g) F(tau) ||_inf`.
///
/// Polynomial bodies with an exact representation are compared symbolically;
/// a symbolic match returns exactly zero.
pub fn functional_equation_residual(form: &VvmfForm, g: &UnimodularMatrix, taus: &[C64]) -> Result<f64> {
    if let (Body::Poly(v), AnyRepresentation::Exact(r)) = (&form.body, &form.rep) {
        if let Ok(lhs) = slash_poly(form.k, g, v) {
            let rhs = v.transform(&r.evaluate(g));
            if lhs == rhs {
                return Ok(0.0);
            }
            if taus.is_empty() {
                let diff = lhs.0.iter().zip(&rhs.0).map(|(a, b)| a - b);
                return Ok(diff
                    .flat_map(|d| d.coeffs().iter().map(Scalar::magnitude).collect::<Vec<_>>())
                    .fold(0.0, f64::max));
            }
        }
    }
    let rho = form.rep.evaluate_c64(g);
    let mut worst: f64 = 0.0;
    for &tau in taus {
        let gt = g.moebius(tau)?;
        let factor = g.cocycle(tau).powi(-form.k as i32);
        let (at_gt, tail_gt) = form.evaluate(gt)?;
        let (at_t, tail_t) = form.evaluate(tau)?;
        let bound = factor.norm() * tail_gt + rho.max_abs() * form.p() as f64 * tail_t;
        if bound > FUNCEQ_TAIL_TOL {
            return Err(Error::TruncationUnreliable {
                bound,
                tol: FUNCEQ_TAIL_TOL,
            });
        }
        let lhs: Vec<C64> = at_gt.iter().map(|z| z * factor).collect();
        let rhs = rho.mul_vec(&at_t);
        let diff: Vec<C64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        worst = worst.max(max_norm(&diff));
    }
    Ok(worst)
}

fn coerce_matrix(rep: &AnyRepresentation, a: &AnyMatrix) -> Result<AnyMatrix> {
    Ok(match (rep, a) {
        (AnyRepresentation::Exact(_), AnyMatrix::Float(_)) => AnyMatrix::Exact(a.to_exact()?),
        (AnyRepresentation::Float(_), AnyMatrix::Exact(m)) => AnyMatrix::Float(m.to_c64()),
        _ => a.clone(),
    })
}

fn mul_any(a: &AnyMatrix, b: &AnyMatrix) -> AnyMatrix {
    match (a, b) {
        (AnyMatrix::Exact(x), AnyMatrix::Exact(y)) => AnyMatrix::Exact(x * y),
        _ => AnyMatrix::Float(&a.to_c64() * &b.to_c64()),
    }
}

/// `(A rho A^{-1}, A F)`.
pub fn equivalence_transform(form: &VvmfForm, a: &AnyMatrix) -> Result<VvmfForm> {
    let p = form.p();
    if a.rows() != p || a.cols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: if a.rows() != p { a.rows() } else { a.cols() },
        });
    }
    let a = coerce_matrix(&form.rep, a)?;
    let rep = form.rep.conjugate(&a)?;
    let body = match &form.body {
        Body::Poly(v) => Body::Poly(v.transform(&a.to_exact()?)),
        Body::LogBlocks { blocks, frame } => Body::LogBlocks {
            blocks: blocks.clone(),
            frame: Some(frame.as_ref().map_or_else(|| a.clone(), |f| mul_any(&a, f))),
        },
        Body::Scalars { series, frame } => Body::Scalars {
            series: series.clone(),
            frame: Some(frame.as_ref().map_or_else(|| a.clone(), |f| mul_any(&a, f))),
        },
    };
    Ok(VvmfForm { k: form.k, rep, body })
}

/// Coordinate of a raw component on `binom(tau, s) e^{2 pi i e tau}`, keyed by `(s, e)`.
type Coordinates = BTreeMap<(usize, Rational64), GaussRat>;

fn raw_coordinates(blocks: &[LogBlock]) -> Result<Vec<Coordinates>> {
    let mut out = Vec::new();
    for b in blocks {
        for l in 1..=b.m() {
            let mut coords = Coordinates::new();
            for s in 0..l {
                for (n, c) in b.h()[l - 1 - s].exact_coeffs()? {
                    coords.insert((s, Rational64::from_integer(n) + b.mu()), c);
                }
            }
            out.push(coords);
        }
    }
    Ok(out)
}

fn framed_coordinates(raw: Vec<Coordinates>, frame: Option<&Matrix<GaussRat>>) -> Vec<Coordinates> {
    let Some(f) = frame else { return raw };
    (0..f.rows())
        .map(|i| {
            let mut acc = Coordinates::new();
            for (j, coords) in raw.iter().enumerate() {
                let a = &f[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for (key, c) in coords {
                    let e = acc.entry(*key).or_insert_with(GaussRat::zero);
                    *e = e.clone() + a.clone() * c.clone();
                }
            }
            acc.retain(|_, c| !c.is_zero());
            acc
        })
        .collect()
}

fn poly_coordinates(v: &PolyVector) -> Vec<Coordinates> {
    v.0.iter()
        .map(|f| {
            f.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| ((j, Rational64::zero()), c.clone()))
                .collect()
        })
        .collect()
}

/// A maximal independent subfamily of the components.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentBasis {
    /// Dimension of the span.
    pub l: usize,
    /// Indices of the chosen components, increasing.
    pub indices: Vec<usize>,
    /// `p x l` matrix `R` with `F = R F_basis`.
    pub reduction: Matrix<GaussRat>,
    /// False when truncated data make `l` only a lower bound.
    pub exact: bool,
}

fn basis_from_coordinates(coords: &[Coordinates], exact: bool) -> ComponentBasis {
    let keys: Vec<(usize, Rational64)> = {
        let mut k: Vec<_> = coords.iter().flat_map(|c| c.keys().copied()).collect();
        k.sort();
        k.dedup();
        k
    };
    let p = coords.len();
    // columns are components, so pivot columns pick independent components
    let m = Matrix::from_fn(keys.len(), p, |i, j| coords[j].get(&keys[i]).cloned().unwrap_or_else(GaussRat::zero));
    let (rref, pivots) = m.rref(0.0);
    let l = pivots.len();
    let reduction = Matrix::from_fn(p, l, |j, i| rref[(i, j)].clone());
    ComponentBasis {
        l,
        indices: pivots,
        reduction,
        exact,
    }
}

fn exact_frame(frame: Option<&AnyMatrix>) -> Result<Option<Matrix<GaussRat>>> {
    frame.map(AnyMatrix::to_exact).transpose()
}

/// Rank of the component family over the exact coefficient data.
pub fn component_basis(form: &VvmfForm) -> Result<ComponentBasis> {
    match &form.body {
        Body::Poly(v) => Ok(basis_from_coordinates(&poly_coordinates(v), true)),
        body => {
            let (blocks, frame) = body.blocks().expect("series body");
            let coords = framed_coordinates(raw_coordinates(&blocks)?, exact_frame(frame)?.as_ref());
            Ok(basis_from_coordinates(&coords, body.is_exact()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    Entire,
    NaturalBoundary,
    Zero,
}

/// A retained nonzero coefficient `a_n(s)` of block `block` with `n + mu > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub block: usize,
    pub s: usize,
    pub n: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// Span dimension `l` when it is determined by exact data.
    pub span: Option<usize>,
    /// Intertwiner `A` with `A F_basis = C(l)` for entire forms.
    pub witness: Option<Matrix<GaussRat>>,
    pub basis: Vec<usize>,
    pub reduction: Option<Matrix<GaussRat>>,
    pub certificate: Option<Certificate>,
    /// Per component: `Some(true)` polynomial, `Some(false)` not, `None` undecided.
    pub polynomial_components: Vec<Option<bool>>,
    pub warnings: Vec<String>,
    pub funceq_residual: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClassifyOptions {
    pub verify_funceq: bool,
}

fn verification_samples() -> [C64; 3] {
    [C64::new(0.0, 1.1), C64::new(0.31, 1.27), C64::new(-0.42, 0.95)]
}

fn verify_funceq(form: &VvmfForm) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for g in [UnimodularMatrix::s(), UnimodularMatrix::t()] {
        worst = worst.max(functional_equation_residual(form, &g, &verification_samples())?);
    }
    let scale = form.evaluate(verification_samples()[0])?.0.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if worst > FUNCEQ_VERIFY_TOL * scale {
        return Err(Error::InconsistentInput(format!(
            "functional equation residual {worst:e} exceeds {FUNCEQ_VERIFY_TOL:e}"
        )));
    }
    Ok(worst)
}

fn find_certificate(blocks: &[LogBlock]) -> Option<Certificate> {
    for (i, b) in blocks.iter().enumerate() {
        for (s, h) in b.h().iter().enumerate() {
            if let Some((n, _)) = h.terms().find(|&(n, _)| n > 0 || (n == 0 && !b.mu().is_zero())) {
                return Some(Certificate { block: i, s, n });
            }
        }
    }
    None
}

fn polynomial_flags(coords: &[Coordinates], exact: bool) -> Vec<Option<bool>> {
    coords
        .iter()
        .map(|c| {
            if c.keys().any(|(_, e)| !e.is_zero()) {
                Some(false)
            } else if exact {
                Some(true)
            } else {
                None
            }
        })
        .collect()
}

/// Polynomials `phi_l = sum_s binom(tau, s) h_{l-1-s}` for blocks whose series are constants.
fn blocks_to_polys(blocks: &[LogBlock], frame: Option<&Matrix<GaussRat>>) -> Result<PolyVector> {
    let mut raw = Vec::new();
    for b in blocks {
        for l in 1..=b.m() {
            let mut f = Poly::zero();
            for s in 0..l {
                let h = &b.h()[l - 1 - s];
                let c = GaussRat::from_c64_exact(h.coeff(0))?;
                f = &f + &Poly::binomial(s).scale(&c);
            }
            raw.push(f);
        }
    }
    let v = PolyVector(raw);
    Ok(match frame {
        Some(f) => v.transform(f),
        None => v,
    })
}

/// Entire/natural-boundary decision for a nonzero holomorphic form.
///
/// A retained nonzero coefficient at a positive exponent certifies a natural
/// boundary even for truncated data. Otherwise polynomial components must
/// span `P_{l-1}` with `k = 1 - l`, and the witness `A = M^{-1}` satisfies
/// `A F_basis = C(l)` and conjugates the representation on the span into `sigma_l`.
pub fn classify_boundary(form: &VvmfForm, opts: &ClassifyOptions) -> Result<Classification> {
    let funceq_residual = if opts.verify_funceq { Some(verify_funceq(form)?) } else { None };
    let mut out = Classification {
        verdict: Verdict::Zero,
        span: None,
        witness: None,
        basis: Vec::new(),
        reduction: None,
        certificate: None,
        polynomial_components: Vec::new(),
        warnings: Vec::new(),
        funceq_residual,
    };
    if form.body.is_zero() {
        out.span = Some(0);
        out.polynomial_components = vec![Some(true); form.p()];
        return Ok(out);
    }
    let polys = match &form.body {
        Body::Poly(v) => v.clone(),
        body => {
            let (blocks, frame) = body.blocks().expect("series body");
            let frame = exact_frame(frame)?;
            let coords = framed_coordinates(raw_coordinates(&blocks)?, frame.as_ref());
            out.polynomial_components = polynomial_flags(&coords, body.is_exact());
            if let Some(cert) = find_certificate(&blocks) {
                let basis = basis_from_coordinates(&coords, body.is_exact());
                out.verdict = Verdict::NaturalBoundary;
                out.certificate = Some(cert);
                out.span = basis.exact.then_some(basis.l);
                out.basis = basis.indices;
                out.reduction = basis.exact.then_some(basis.reduction);
                return Ok(out);
            }
            if !body.is_exact() {
                return Err(Error::InexactInput(
                    "truncated series with no retained coefficient at a positive exponent".into(),
                ));
            }
            blocks_to_polys(&blocks, frame.as_ref())?
        }
    };
    out.polynomial_components = vec![Some(true); form.p()];
    entire_witness(form, &polys, out)
}

fn entire_witness(form: &VvmfForm, polys: &PolyVector, mut out: Classification) -> Result<Classification> {
    let basis = basis_from_coordinates(&poly_coordinates(polys), true);
    let l = basis.l;
    let chosen: Vec<Poly> = basis.indices.iter().map(|&i| polys.0[i].clone()).collect();
    if chosen.iter().filter_map(Poly::degree).any(|d| d >= l) {
        return Err(Error::InconsistentInput(format!(
            "components span a {l}-dimensional space that is not the polynomials of degree below {l}"
        )));
    }
    let k_expected = 1 - l as i64;
    if form.k != k_expected {
        let detail = if form.k == -(l as i64) {
            " (this matches the k = -l reading; the weight of C(l) is 1 - l)"
        } else {
            ""
        };
        return Err(Error::InconsistentInput(format!(
            "polynomial span of dimension {l} requires weight {k_expected}, got {}{detail}",
            form.k
        )));
    }
    // g_i = sum_j M_ij tau^{l-1-j}
    let m = Matrix::from_fn(l, l, |i, j| chosen[i].coeff(l - 1 - j));
    let a = m.inverse(0.0)?;
    check_rep_on_span(form, polys, &chosen, &a, l)?;
    out.verdict = Verdict::Entire;
    out.span = Some(l);
    out.witness = Some(a);
    out.basis = basis.indices;
    out.reduction = Some(basis.reduction);
    Ok(out)
}

/// The representation must act on the components as the slash action does,
/// and the basis representation must be conjugate to `sigma_l` by the witness.
fn check_rep_on_span(form: &VvmfForm, polys: &PolyVector, chosen: &[Poly], a: &Matrix<GaussRat>, l: usize) -> Result<()> {
    let inconsistent = |what: &str| Err(Error::InconsistentInput(what.into()));
    for g in [UnimodularMatrix::s(), UnimodularMatrix::t()] {
        let slashed = slash_poly(form.k, &g, polys)?;
        let ok = match &form.rep {
            AnyRepresentation::Exact(r) => polys.transform(&r.evaluate(&g)) == slashed,
            AnyRepresentation::Float(r) => {
                let m = r.evaluate(&g);
                verification_samples().iter().all(|&tau| {
                    let lhs = slashed.eval(tau);
                    let rhs = m.mul_vec(&polys.eval(tau));
                    let scale = max_norm(&rhs).max(1.0);
                    lhs.iter().zip(&rhs).all(|(x, y)| (x - y).norm() <= FUNCEQ_VERIFY_TOL * scale)
                })
            }
        };
        if !ok {
            return inconsistent("rho(g) F differs from F|_k g on a generator");
        }
    }
    let reduced = crate::repspace::rep_from_poly_basis(chosen, form.k)?;
    let sigma = sigma_rep(l);
    let a_inv = a.inverse(0.0)?;
    for (x, y) in [(reduced.s(), sigma.s()), (reduced.t(), sigma.t())] {
        if &(&(a * x) * &a_inv) != y {
            return inconsistent("witness does not conjugate the span representation into sigma");
        }
    }
    Ok(())
}
