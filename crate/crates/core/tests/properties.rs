use logvvmf::analysis::{domination_holds, growth_probe, min_imag_threshold, regroup_form};
use logvvmf::fixtures::{eisenstein, random_unimodular_matrix, synthetic_form, EtaBlock};
use logvvmf::qexp::{assemble_component, binom_evaluate, q_derivative, q_evaluate, LogBlock, PureQSeries};
use logvvmf::repspace::{modified_jordan_t, sigma_rep, sym_power_rep};
use logvvmf::vvmf::{classify_boundary, equivalence_transform, functional_equation_residual, make_c, slash_poly, ClassifyOptions};
use logvvmf::{AnyMatrix, AnyRepresentation, Body, GaussRat, Matrix, Poly, PolyVector, Representation, Scalar, Token, UnimodularMatrix, Verdict, C64};
use num_rational::Rational64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gamma(seed: u64, bound: i64) -> UnimodularMatrix {
    UnimodularMatrix::random(&mut ChaCha8Rng::seed_from_u64(seed), bound)
}

fn mu_strategy() -> impl Strategy<Value = Rational64> {
    prop::sample::select(vec![(0, 1), (1, 2), (1, 3), (2, 3), (1, 4), (5, 12)]).prop_map(|(a, b)| Rational64::new(a, b))
}

fn series_strategy(mu: Rational64) -> impl Strategy<Value = PureQSeries> {
    (0i64..3, prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..10), any::<bool>())
        .prop_map(move |(nu, cs, exact)| PureQSeries::new(mu, nu, cs.into_iter().map(|(a, b)| C64::new(a, b)).collect(), exact).unwrap())
}

fn block_strategy() -> impl Strategy<Value = LogBlock> {
    mu_strategy().prop_flat_map(|mu| prop::collection::vec(series_strategy(mu), 1..4).prop_map(move |h| LogBlock::new(mu, h).unwrap()))
}

/// Largest distance from a computed eigenvalue of `T` to the exact eigenvalue of its block.
fn cluster_spread(rep: &AnyRepresentation, specs: &[EtaBlock]) -> f64 {
    let t = rep.evaluate_c64(&UnimodularMatrix::t());
    let n = t.rows();
    let m = nalgebra::DMatrix::<C64>::from_fn(n, n, |i, j| t[(i, j)]);
    let tri = nalgebra::Schur::new(m).unpack().1;
    (0..n)
        .map(|i| {
            specs
                .iter()
                .map(|b| (tri[(i, i)] - logvvmf::scalar::unit_phase(b.r as f64 / 12.0)).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn random_poly_vector(rng: &mut ChaCha8Rng, p: usize) -> PolyVector {
    PolyVector(
        (0..p)
            .map(|_| Poly::new((0..p).map(|_| GaussRat::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4))).collect()))
            .collect(),
    )
}

proptest! {
    #[test]
    fn word_roundtrip(seed in any::<u64>(), bound in 1i64..=1_000_000) {
        let g = gamma(seed, bound);
        prop_assert_eq!(g.word().evaluate(), g);
    }

    #[test]
    fn moebius_is_a_left_action(s1 in any::<u64>(), s2 in any::<u64>(), x in -2.0f64..2.0, y in 0.2f64..3.0) {
        let (g, h) = (gamma(s1, 20), gamma(s2, 20));
        let tau = C64::new(x, y);
        let lhs = g.moebius(h.moebius(tau).unwrap()).unwrap();
        let rhs = g.compose(&h).moebius(tau).unwrap();
        prop_assert!(rel_err(lhs, rhs) < 1e-12);
    }

    #[test]
    fn cocycle_relation(s1 in any::<u64>(), s2 in any::<u64>(), x in -2.0f64..2.0, y in 0.2f64..3.0) {
        let (g, h) = (gamma(s1, 20), gamma(s2, 20));
        let tau = C64::new(x, y);
        let lhs = g.compose(&h).cocycle(tau);
        let rhs = g.cocycle(h.moebius(tau).unwrap()) * h.cocycle(tau);
        prop_assert!(rel_err(lhs, rhs) < 1e-10);
    }

    #[test]
    fn two_words_agree(seed in any::<u64>(), p in 1usize..=6) {
        let g = gamma(seed, 1000);
        let rho = sym_power_rep(p);
        let w = g.word();
        let padded = w.concat(&logvvmf::GeneratorWord::new(false, vec![Token::S; 4]));
        prop_assert_eq!(padded.evaluate(), g.clone());
        prop_assert_eq!(rho.evaluate_word(&padded), rho.evaluate_word(&w));
        let via_s = g.compose(&UnimodularMatrix::s()).word().concat(&logvvmf::GeneratorWord::new(false, vec![Token::S; 3]));
        prop_assert_eq!(rho.evaluate_word(&via_s), rho.evaluate(&g));
    }

    #[test]
    fn pascal_identity(s in 1usize..12, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let shift = Poly::linear(GaussRat::one(), GaussRat::one());
        let lhs = Poly::binomial(s).compose(&shift);
        prop_assert_eq!(lhs, &Poly::binomial(s) + &Poly::binomial(s - 1));
        let tau = C64::new(x, y);
        let sum = binom_evaluate(s, tau) + binom_evaluate(s - 1, tau);
        prop_assert!((binom_evaluate(s, tau + 1.0) - sum).norm() <= 1e-12 * sum.norm().max(1.0));
    }

    #[test]
    fn q_translation_covariance(h in mu_strategy().prop_flat_map(series_strategy), x in -1.0f64..1.0, y in 0.3f64..2.0) {
        let tau = C64::new(x, y);
        let lhs = q_evaluate(&h, tau + 1.0).unwrap().value;
        let phase = logvvmf::scalar::unit_phase(*h.mu().numer() as f64 / *h.mu().denom() as f64);
        let rhs = phase * q_evaluate(&h, tau).unwrap().value;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn derivative_matches_finite_difference(h in mu_strategy().prop_flat_map(series_strategy)) {
        let tau = C64::new(0.3, 1.5);
        let step = 1e-5;
        let f = |t: C64| q_evaluate(&h, t).unwrap().value;
        let fd = (f(tau + step) - f(tau - step)) / (2.0 * step);
        let d = q_evaluate(&q_derivative(&h), tau).unwrap().value;
        prop_assume!(d.norm() > 1e-8);
        prop_assert!(rel_err(fd, d) < 1e-6, "{} vs {}", fd, d);
    }

    #[test]
    fn logarithmic_translation(block in block_strategy(), x in -1.0f64..1.0, y in 0.4f64..2.0) {
        let tau = C64::new(x, y);
        let mu = block.mu();
        let lambda = logvvmf::scalar::unit_phase(*mu.numer() as f64 / *mu.denom() as f64);
        for l in 1..=block.m() {
            let prev = if l == 1 { C64::new(0.0, 0.0) } else { assemble_component(&block, l - 1, tau).unwrap() };
            let lhs = assemble_component(&block, l, tau + 1.0).unwrap();
            let rhs = lambda * (assemble_component(&block, l, tau).unwrap() + prev);
            prop_assert!((lhs - rhs).norm() <= 1e-11 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn assembly_is_linear(h1 in prop::collection::vec(series_strategy(Rational64::new(1, 3)), 3),
                          h2 in prop::collection::vec(series_strategy(Rational64::new(1, 3)), 3),
                          a in -2.0f64..2.0) {
        let mu = Rational64::new(1, 3);
        let tau = C64::new(0.2, 0.8);
        let exact = |v: Vec<PureQSeries>| -> Vec<PureQSeries> {
            v.into_iter().map(|s| PureQSeries::new(s.mu(), s.nu(), s.coeffs().to_vec(), true).unwrap()).collect()
        };
        let (h1, h2) = (exact(h1), exact(h2));
        let combined: Vec<PureQSeries> = h1.iter().zip(&h2).map(|(x, y)| {
            logvvmf::qexp::q_add(x, &logvvmf::qexp::q_scale(y, C64::new(a, 0.0))).unwrap()
        }).collect();
        let (b1, b2, b) = (LogBlock::new(mu, h1).unwrap(), LogBlock::new(mu, h2).unwrap(), LogBlock::new(mu, combined).unwrap());
        for l in 1..=3 {
            let lhs = assemble_component(&b, l, tau).unwrap();
            let rhs = assemble_component(&b1, l, tau).unwrap() + assemble_component(&b2, l, tau).unwrap() * a;
            prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn stroke_cocycle(s1 in any::<u64>(), s2 in any::<u64>(), p in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(s1 ^ s2.rotate_left(7));
        let v = random_poly_vector(&mut rng, p);
        let (g1, g2) = (gamma(s1, 12), gamma(s2, 12));
        let k = 1 - p as i64;
        let twice = slash_poly(k, &g2, &slash_poly(k, &g1, &v).unwrap()).unwrap();
        prop_assert_eq!(twice, slash_poly(k, &g1.compose(&g2), &v).unwrap());
    }

    #[test]
    fn conjugation_invariance(seed in any::<u64>(), p in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = ClassifyOptions::default();
        let base = make_c(p);
        let a = random_unimodular_matrix(&mut rng, p, 4);
        let moved = equivalence_transform(&base, &AnyMatrix::Exact(a)).unwrap();
        let c = classify_boundary(&moved, &opts).unwrap();
        prop_assert_eq!(c.verdict, classify_boundary(&base, &opts).unwrap().verdict);
        // A F = C and A rho A^{-1} = sigma on the generators
        let w = c.witness.clone().unwrap();
        let Body::Poly(v) = moved.body() else { unreachable!() };
        prop_assert_eq!(c.basis.len(), p);
        let basis = PolyVector(c.basis.iter().map(|&i| v.0[i].clone()).collect());
        prop_assert_eq!(basis.transform(&w).0, logvvmf::repspace::c_basis(p));
        let AnyRepresentation::Exact(rho) = moved.rep() else { unreachable!() };
        let perm = Matrix::from_fn(p, p, |i, j| if c.basis[i] == j { GaussRat::one() } else { GaussRat::zero() });
        let reduced = rho.conjugate(&perm).unwrap();
        prop_assert_eq!(reduced.conjugate(&w).unwrap(), sigma_rep(p));
    }

    #[test]
    fn jordan_reassembly(seed in any::<u64>(), pick in 0usize..4) {
        let specs: [&[EtaBlock]; 4] = [
            &[EtaBlock { r: 2, m: 1 }, EtaBlock { r: 3, m: 2 }],
            &[EtaBlock { r: 4, m: 3 }],
            &[EtaBlock { r: 1, m: 1 }, EtaBlock { r: 2, m: 2 }, EtaBlock { r: 3, m: 3 }],
            &[EtaBlock { r: 6, m: 2 }, EtaBlock { r: 5, m: 1 }],
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = synthetic_form(specs[pick], 8, None).unwrap();
        let a = random_unimodular_matrix(&mut rng, base.p(), 2);
        let rep = base.rep().conjugate(&AnyMatrix::Float(a.to_c64())).unwrap();
        let jd = match modified_jordan_t(&rep) {
            Ok(jd) => jd,
            Err(logvvmf::Error::IllConditioned(msg)) => {
                let spread = cluster_spread(&rep, specs[pick]);
                prop_assert!(spread > 1e-6, "ill-conditioned with eigenvalue spread {}: {}", spread, msg);
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let t = rep.evaluate_c64(&UnimodularMatrix::t());
        let dist = jd.reassemble().unwrap().distance(&t);
        prop_assert!(dist < 1e-8, "distance {dist:e}, scale {}", t.max_abs());
        let mut sizes: Vec<usize> = jd.blocks.iter().map(|b| b.m).collect();
        let mut expected: Vec<usize> = specs[pick].iter().map(|b| b.m).collect();
        sizes.sort();
        expected.sort();
        prop_assert_eq!(sizes, expected);
    }

    #[test]
    fn domination_above_threshold(seed in any::<u64>(), pick in 0usize..3, u_pick in 0usize..8) {
        let specs: [&[EtaBlock]; 3] = [
            &[EtaBlock { r: 2, m: 1 }, EtaBlock { r: 3, m: 2 }, EtaBlock { r: 4, m: 3 }],
            &[EtaBlock { r: 1, m: 2 }, EtaBlock { r: 2, m: 3 }, EtaBlock { r: 3, m: 4 }],
            &[EtaBlock { r: 5, m: 2 }, EtaBlock { r: 6, m: 3 }],
        ];
        let form = synthetic_form(specs[pick], 30, None).unwrap();
        let g = gamma(seed, 6);
        let g = if g.c() == &0.into() { g.compose(&UnimodularMatrix::s()) } else { g };
        let sum = regroup_form(&form, u_pick % form.p(), &g).unwrap();
        let y0 = min_imag_threshold(&sum).unwrap();
        for factor in [1.0, 1.3, 2.5] {
            for x in [-0.4, 0.0, 0.35] {
                for n in [0.0, 1.0, 10.0, 100.0] {
                    let tau = C64::new(x + n, y0 * factor);
                    prop_assert!(domination_holds(&sum, tau).unwrap(), "y0 = {}, tau = {}", y0, tau);
                }
            }
        }
    }
}

/// Random changes of basis with entries up to 2 rarely push a block past the clustering tolerance.
#[test]
fn float_jordan_mostly_resolves_blocks() {
    let spec = [EtaBlock { r: 1, m: 1 }, EtaBlock { r: 2, m: 2 }, EtaBlock { r: 3, m: 3 }];
    let base = synthetic_form(&spec, 8, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let ok = (0..200)
        .filter(|_| {
            let a = random_unimodular_matrix(&mut rng, base.p(), 2);
            let rep = base.rep().conjugate(&AnyMatrix::Float(a.to_c64())).unwrap();
            modified_jordan_t(&rep).is_ok()
        })
        .count();
    assert!(ok >= 180, "{ok} of 200");
}

#[test]
fn exact_jordan_reassembles_exactly() {
    use logvvmf::repspace::jordan::jordan_block;
    for p in 1..=6 {
        for rep in [sym_power_rep(p), sigma_rep(p)] {
            let t = rep.t().clone();
            let jd = modified_jordan_t(&AnyRepresentation::Exact(rep)).unwrap();
            let AnyMatrix::Exact(pm) = &jd.p else { panic!("exact input gives an exact frame") };
            let blocks: Vec<Matrix<GaussRat>> = jd.blocks.iter().map(|b| jordan_block(GaussRat::one(), b.m)).collect();
            let j = Matrix::block_diag(&blocks);
            assert_eq!(&(pm * &j) * &pm.inverse(0.0).unwrap(), t);
        }
    }
}

#[test]
fn group_relations_under_compose() {
    let s = UnimodularMatrix::s();
    let t = UnimodularMatrix::t();
    let s2 = s.compose(&s);
    assert_eq!(s2.compose(&s2), UnimodularMatrix::identity());
    let st = s.compose(&t);
    assert_eq!(st.compose(&st).compose(&st), s2);
}

#[test]
fn sym_power_s_squared_is_a_sign() {
    for p in 1..=8 {
        let rho: Representation<GaussRat> = sym_power_rep(p);
        let sign = if p % 2 == 1 { GaussRat::one() } else { -GaussRat::one() };
        assert_eq!(rho.s().pow(2), Matrix::identity(p).scale(&sign));
    }
}

#[test]
fn make_c_funceq_exact_to_p8() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in 1..=8 {
        let form = make_c(p);
        for _ in 0..10 {
            let g = UnimodularMatrix::random(&mut rng, 30);
            assert_eq!(functional_equation_residual(&form, &g, &[]).unwrap(), 0.0);
        }
    }
}

/// The fitted slope of `|tau0 + N|^k |f(tau0)|` approaches `k` like `k (1 - Re tau0 / N)`,
/// so it is compared with the exact log-derivative rather than with `k` itself.
#[test]
fn growth_slope_matches_transformation_law() {
    let tau0 = C64::new(0.3, 1.5);
    for k in [4i64, 6] {
        let form = eisenstein(k, 60).unwrap();
        let fit = growth_probe(&form, 0, &UnimodularMatrix::s(), tau0, 200).unwrap();
        // oracle: same least squares on log |tau0 + N|^k, the dependence predicted by the functional equation
        let (xs, ys): (Vec<f64>, Vec<f64>) = (100..=200)
            .map(|n| ((n as f64).ln(), k as f64 * (tau0 + n as f64).norm().ln()))
            .unzip();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let oracle = sxy / sxx;
        assert!((fit.slope - oracle).abs() < 1e-9, "{} vs {oracle}", fit.slope);
        let bias = k as f64 * (tau0.re.abs() + tau0.norm_sqr() / 100.0) / 100.0;
        assert!((fit.slope - k as f64).abs() <= 2.0 * fit.stderr + bias, "{fit:?}");
    }
}

#[test]
fn probe_rejects_translations() {
    let form = eisenstein(4, 20).unwrap();
    assert!(growth_probe(&form, 0, &UnimodularMatrix::t(), C64::new(0.0, 1.0), 50).is_err());
}

#[test]
fn classifier_rejects_inexact_without_certificate() {
    let rep = AnyRepresentation::Exact(Representation::trivial());
    let c = PureQSeries::new(Rational64::from_integer(0), 0, vec![C64::new(1.0, 0.0)], false).unwrap();
    let form = logvvmf::VvmfForm::new(0, rep, Body::Scalars { series: vec![c], frame: None }).unwrap();
    let err = classify_boundary(&form, &ClassifyOptions::default()).unwrap_err();
    assert!(matches!(err, logvvmf::Error::InexactInput(_)));
    let _ = Verdict::Entire;
}
