//! Modified Jordan form of `rho(T)`.
//!
//! Blocks have the shape `lambda (I + N)` with `N` the subdiagonal of ones and
//! `lambda = e^{2 pi i mu}`. A chain `p_1, ..., p_m` for such a block satisfies
//! `(T / lambda - I) p_l = p_{l+1}` and `(T / lambda - I) p_m = 0`.

use nalgebra::{DMatrix, Schur};
use num_rational::Rational64;
use num_traits::Zero;

use super::{AnyRepresentation, Representation};
use crate::error::{Error, Result};
use crate::matrix::{AnyMatrix, Matrix};
use crate::scalar::{unit_phase, GaussRat, Scalar, C64};

/// Largest denominator accepted when snapping `mu` to a rational.
pub const MU_DENOMINATOR_CAP: i64 = 96;
/// Snapping radius for `mu`.
pub const MU_SNAP_TOL: f64 = 1e-9;
/// Allowed deviation of `|lambda|` from 1.
pub const UNITARY_TOL: f64 = 1e-8;
/// Relative rank tolerance used when clustering floating eigenvalues.
pub const CLUSTER_TOL: f64 = 1e-6;

const LINKAGE_RADII: [f64; 9] = [1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1];

#[derive(Clone, Debug, PartialEq)]
pub struct JordanBlock {
    /// Exponent in `[0, 1)`; a continued-fraction approximation when `snapped` is false.
    pub mu: Rational64,
    pub m: usize,
    pub lambda: C64,
    pub snapped: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JordanData {
    /// Sorted by decreasing size, then increasing `mu`.
    pub blocks: Vec<JordanBlock>,
    /// Columns are the concatenated chains, so `P^{-1} T P` is block diagonal.
    pub p: AnyMatrix,
}

impl JordanData {
    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(|b| b.m).max().unwrap_or(0)
    }

    /// The block-diagonal matrix `diag(lambda_i (I + N))`.
    pub fn block_matrix(&self) -> Matrix<C64> {
        let blocks: Vec<Matrix<C64>> = self.blocks.iter().map(|b| jordan_block(b.lambda, b.m)).collect();
        Matrix::block_diag(&blocks)
    }

    /// `P J P^{-1}` in floating point.
    pub fn reassemble(&self) -> Result<Matrix<C64>> {
        let p = self.p.to_c64();
        let p_inv = p.inverse(1e-12)?;
        Ok(&(&p * &self.block_matrix()) * &p_inv)
    }
}

pub fn jordan_block<F: Scalar>(lambda: F, m: usize) -> Matrix<F> {
    Matrix::from_fn(m, m, |i, j| {
        if i == j || i == j + 1 {
            lambda.clone()
        } else {
            F::zero()
        }
    })
}

/// `mu` in `[0, 1)` from an eigenvalue phase, snapped to a small-denominator
/// rational when possible.
pub fn phase_to_mu(lambda: C64) -> (Rational64, bool) {
    let mut x = lambda.arg() / (2.0 * std::f64::consts::PI);
    x -= x.floor();
    for q in 1..=MU_DENOMINATOR_CAP {
        let a = (x * q as f64).round();
        if (x - a / q as f64).abs() <= MU_SNAP_TOL {
            let r = Rational64::new(a as i64 % q, q);
            return (r, true);
        }
    }
    (continued_fraction(x, 1_000_000_000), false)
}

fn continued_fraction(x: f64, max_den: i64) -> Rational64 {
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut y = x;
    for _ in 0..40 {
        let a = y.floor() as i64;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        y = 1.0 / frac;
    }
    if k1 == 0 {
        return Rational64::zero();
    }
    let r = Rational64::new(h1, k1);
    if r >= Rational64::from_integer(1) {
        Rational64::zero()
    } else {
        r
    }
}

fn mu_phase(mu: Rational64) -> C64 {
    unit_phase(*mu.numer() as f64 / *mu.denom() as f64)
}

/// Jordan chains of `t` for eigenvalue `lambda`, longest first.
///
/// `multiplicity` caps the generalized eigenspace; relative rank tests on
/// high powers of `U` would otherwise absorb directions of nearby eigenvalues.
fn chains<F: Scalar>(t: &Matrix<F>, lambda: &F, tol: f64, multiplicity: Option<usize>) -> Vec<Vec<Vec<F>>> {
    let p = t.rows();
    let u = &t.scale(&(F::one() / lambda.clone())) - &Matrix::identity(p);
    // kernels of U^s until they stabilize
    let mut kernels: Vec<Vec<Vec<F>>> = vec![Vec::new()];
    let mut power = Matrix::identity(p);
    loop {
        power = &power * &u;
        let ker = power.nullspace(tol);
        let prev = kernels.last().map_or(0, Vec::len);
        if ker.len() == prev {
            break;
        }
        kernels.push(ker.into_iter().map(normalize).collect());
        let dim = kernels.last().map_or(0, Vec::len);
        if dim == p || multiplicity.is_some_and(|g| dim >= g) {
            break;
        }
    }
    let depth = kernels.len() - 1;
    let mut tops: Vec<(usize, Vec<F>)> = Vec::new();
    for s in (1..=depth).rev() {
        let mut span: Vec<Vec<F>> = kernels[s - 1].clone();
        for (len, top) in &tops {
            let mut v = top.clone();
            for _ in 0..(len - s) {
                v = u.mul_vec(&v);
            }
            span.push(v);
        }
        let mut rank = rank_of(&span, tol);
        let mut cands: Vec<(f64, &Vec<F>)> = kernels[s]
            .iter()
            .map(|c| {
                let mut v = c.clone();
                for _ in 1..s {
                    v = u.mul_vec(&v);
                }
                (v.iter().map(|x| x.magnitude().powi(2)).sum::<f64>(), c)
            })
            .collect();
        if !F::EXACT {
            // long image under U^{s-1} keeps the chain well conditioned
            cands.sort_by(|a, b| b.0.total_cmp(&a.0));
        }
        for (_, cand) in cands {
            span.push(cand.clone());
            let r = rank_of(&span, tol);
            if r > rank {
                rank = r;
                tops.push((s, cand.clone()));
            } else {
                span.pop();
            }
        }
    }
    tops.into_iter()
        .map(|(len, top)| {
            let mut chain = vec![top];
            for _ in 1..len {
                let next = u.mul_vec(chain.last().expect("nonempty chain"));
                chain.push(next);
            }
            chain
        })
        .collect()
}

fn normalize<F: Scalar>(v: Vec<F>) -> Vec<F> {
    if F::EXACT {
        return v;
    }
    let m = v.iter().map(Scalar::magnitude).fold(0.0, f64::max);
    if m == 0.0 {
        return v;
    }
    let inv = F::one() / v.iter().find(|x| x.magnitude() == m).cloned().expect("max entry");
    v.into_iter().map(|x| x * inv.clone()).collect()
}

fn rank_of<F: Scalar>(vectors: &[Vec<F>], tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_cols(vectors).rank(tol)
}

struct Found<F> {
    blocks: Vec<(JordanBlock, Vec<Vec<F>>)>,
}

impl<F: Scalar> Found<F> {
    fn finish(mut self, wrap: impl Fn(Matrix<F>) -> AnyMatrix) -> JordanData {
        self.blocks
            .sort_by(|(a, _), (b, _)| b.m.cmp(&a.m).then(a.mu.cmp(&b.mu)));
        let cols: Vec<Vec<F>> = self.blocks.iter().flat_map(|(_, c)| c.iter().cloned()).collect();
        JordanData {
            blocks: self.blocks.into_iter().map(|(b, _)| b).collect(),
            p: wrap(Matrix::from_cols(&cols)),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn collect_chains<F: Scalar>(
    t: &Matrix<F>,
    lambda: &F,
    lam_c: C64,
    mu: Rational64,
    snapped: bool,
    tol: f64,
    multiplicity: Option<usize>,
    out: &mut Found<F>,
) -> usize {
    let mut dim = 0;
    for chain in chains(t, lambda, tol, multiplicity) {
        dim += chain.len();
        out.blocks.push((
            JordanBlock {
                mu,
                m: chain.len(),
                lambda: lam_c,
                snapped,
            },
            chain,
        ));
    }
    dim
}

/// Exact decomposition when every eigenvalue is one of `1, i, -1, -i`.
fn exact_jordan(t: &Matrix<GaussRat>) -> Option<JordanData> {
    let p = t.rows();
    let mut found = Found { blocks: Vec::new() };
    let mut total = 0;
    for (lambda, mu) in [
        (GaussRat::one(), Rational64::new(0, 1)),
        (GaussRat::i(), Rational64::new(1, 4)),
        (-GaussRat::one(), Rational64::new(1, 2)),
        (-GaussRat::i(), Rational64::new(3, 4)),
    ] {
        let lam_c = lambda.to_c64();
        total += collect_chains(t, &lambda, lam_c, mu, true, 0.0, None, &mut found);
    }
    (total == p).then(|| found.finish(AnyMatrix::Exact))
}

fn eigenvalues(t: &Matrix<C64>) -> Result<Vec<C64>> {
    let n = t.rows();
    let m = DMatrix::<C64>::from_fn(n, n, |i, j| t[(i, j)]);
    let schur = Schur::try_new(m, 1e-15, 100_000)
        .ok_or_else(|| Error::IllConditioned("Schur iteration did not converge".into()))?;
    let (_, tri) = schur.unpack();
    Ok((0..n).map(|i| tri[(i, i)]).collect())
}

fn single_linkage(values: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => groups[k].push(i),
            None => {
                roots.push(r);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Best-fit chain for an eigenvalue carrying a single block.
///
/// Regrowing a chain with the perturbed `U` amplifies rounding by `|U|^m`.
/// Instead all columns are solved at once from `(T - lambda) x_l = lambda x_{l+1}`,
/// `(T - lambda) x_m = 0`, and among the near-null solutions the one with the
/// longest last column is kept.
fn refine_lone_chain(t: &Matrix<C64>, lambda: C64, m: usize) -> Option<Vec<Vec<C64>>> {
    let p = t.rows();
    let n = p * m;
    let mut sys = DMatrix::<C64>::zeros(n, n);
    for l in 0..m {
        for i in 0..p {
            for j in 0..p {
                sys[(l * p + i, l * p + j)] = t[(i, j)];
            }
            sys[(l * p + i, l * p + i)] -= lambda;
            if l + 1 < m {
                sys[(l * p + i, (l + 1) * p + i)] = -lambda;
            }
        }
    }
    let svd = sys.svd(false, true);
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let null = &order[..m];
    // the last p coordinates of each null vector
    let tail = DMatrix::<C64>::from_fn(p, m, |i, c| v_t[(null[c], (m - 1) * p + i)].conj());
    let w = tail.svd(false, true);
    let wv = w.v_t?;
    let top = (0..m).max_by(|&a, &b| w.singular_values[a].total_cmp(&w.singular_values[b]))?;
    let x: Vec<C64> = (0..n)
        .map(|r| (0..m).map(|c| v_t[(null[c], r)].conj() * wv[(top, c)].conj()).sum())
        .collect();
    Some(x.chunks(p).map(<[C64]>::to_vec).collect())
}

fn float_jordan(t: &Matrix<C64>) -> Result<JordanData> {
    let p = t.rows();
    let eig = eigenvalues(t)?;
    let scale = t.max_abs().max(1.0);
    let mut unitary_failure: Option<C64> = None;
    let mut unitary_somewhere = false;
    // rational exponents first: a slightly split defective block must not be
    // read as two nearby simple eigenvalues
    let passes = [true, false];
    let ladder = passes.iter().flat_map(|&snap_only| LINKAGE_RADII.iter().map(move |&r| (snap_only, r)));
    'radius: for (snap_only, radius) in ladder {
        let groups = single_linkage(&eig, radius);
        let means: Vec<C64> = groups
            .iter()
            .map(|g| g.iter().map(|&i| eig[i]).sum::<C64>() / g.len() as f64)
            .collect();
        for mean in &means {
            if (mean.norm() - 1.0).abs() > UNITARY_TOL {
                unitary_failure.get_or_insert(*mean);
                continue 'radius;
            }
        }
        unitary_somewhere = true;
        // means must be resolved from each other at this radius
        for i in 0..means.len() {
            for j in i + 1..means.len() {
                if (means[i] - means[j]).norm() <= 2.0 * radius {
                    continue 'radius;
                }
            }
        }
        let mut found = Found { blocks: Vec::new() };
        let mut total = 0;
        for (group, mean) in groups.iter().zip(&means) {
            let (mu, snapped) = phase_to_mu(*mean);
            if snap_only && !snapped {
                continue 'radius;
            }
            let lambda = if snapped { mu_phase(mu) } else { *mean / mean.norm() };
            let shifted = t - &Matrix::identity(p).scale(&lambda);
            let nullity = p - shifted.pow(group.len() as u64).rank(CLUSTER_TOL);
            if nullity != group.len() {
                continue 'radius;
            }
            let dim = collect_chains(t, &lambda, lambda, mu, snapped, CLUSTER_TOL, Some(group.len()), &mut found);
            if dim != group.len() {
                continue 'radius;
            }
            total += dim;
        }
        if total != p {
            continue;
        }
        let lone: Vec<bool> = found
            .blocks
            .iter()
            .map(|(b, _)| found.blocks.iter().filter(|(o, _)| o.mu == b.mu && o.lambda == b.lambda).count() == 1)
            .collect();
        for ((block, chain), lone) in found.blocks.iter_mut().zip(lone) {
            if lone {
                if let Some(better) = refine_lone_chain(t, block.lambda, block.m) {
                    *chain = better;
                }
            }
        }
        let data = found.finish(AnyMatrix::Float);
        match data.reassemble() {
            Ok(back) if back.distance(t) <= 1e-8 * scale => return Ok(data),
            _ => continue,
        }
    }
    if let Some(z) = unitary_failure.filter(|_| !unitary_somewhere) {
        return Err(Error::NonUnitaryEigenvalue {
            re: z.re,
            im: z.im,
            modulus: z.norm(),
        });
    }
    Err(Error::IllConditioned(format!(
        "no eigenvalue clustering up to radius {} is consistent at tolerance {CLUSTER_TOL:e}",
        LINKAGE_RADII[LINKAGE_RADII.len() - 1]
    )))
}

/// Modified Jordan decomposition of the image of `T`.
pub fn modified_jordan_t(rep: &AnyRepresentation) -> Result<JordanData> {
    match rep {
        AnyRepresentation::Exact(r) => jordan_of_exact(r),
        AnyRepresentation::Float(r) => float_jordan(r.t()),
    }
}

fn jordan_of_exact(r: &Representation<GaussRat>) -> Result<JordanData> {
    match exact_jordan(r.t()) {
        Some(d) => Ok(d),
        None => float_jordan(&r.t().to_c64()),
    }
}
