use cvwit::combin::{
    binom_ratio_exact, binomial_big, ln_binomial, PartitionFamily, ENUM_CAP,
};
use cvwit::ghzcert::{kappa_bisep, Kappa, QuadCoeffs, ReducedBlock};
use cvwit::model::{apply_loss_noise, parse_cm_document, pure_ghz_cm, CovarianceMatrix, GhzParams};
use cvwit::oracle::full_matrix_min_eig;
use cvwit::signcrit::{certify_with, generate_sign_set, uniform_simplex, Objective, OptConfig, SamplingConfig};
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reduced(n: usize, m: usize, r: f64, eta: f64, nn: f64) -> (f64, f64, f64) {
    let cm = GhzParams::new(n, r, eta, nn).unwrap().cm();
    let rb = ReducedBlock::new(&cm, m, 0.0).unwrap();
    (rb.a, rb.b, rb.c)
}

#[test]
fn purity_identity() {
    for n in 2..=64 {
        for m in 1..n {
            for r in [0.0, 0.3, 1.0, 3.0] {
                let (a, b, c) = reduced(n, m, r, 1.0, 0.0);
                assert!((a * b - c * c - 1.0).abs() < 1e-9 * (a * b).max(1.0), "n={n} m={m} r={r}");
            }
        }
    }
}

#[test]
fn bipartition_count() {
    for n in 2..=10 {
        let p = PartitionFamily::AllBipartitions.partitions(n, ENUM_CAP).unwrap();
        assert_eq!(p.len(), (1 << (n - 1)) - 1);
        for part in &p {
            let mut seen = part.blocks.concat();
            seen.sort();
            assert_eq!(seen, (0..n).collect::<Vec<_>>());
        }
    }
}

#[test]
fn log_binomial_against_exact() {
    for l in (0..=1000i64).step_by(7) {
        for j in (0..=l).step_by(5) {
            let exact = binomial_big(l, j).to_f64().unwrap();
            let ln = ln_binomial(l, j).unwrap();
            if exact.is_finite() {
                assert!((ln.exp() / exact - 1.0).abs() < 1e-12, "C({l},{j})");
            } else {
                let lx = num_bigint::BigUint::bits(&binomial_big(l, j)) as f64 * std::f64::consts::LN_2;
                assert!((ln - lx).abs() < 1.0);
            }
        }
    }
}

#[test]
fn kappa_symmetric_and_bounded() {
    for n in [5usize, 17, 64, 333] {
        for m in [1, 2, n / 3, n - 1] {
            for n0 in 1..n {
                let k = kappa_bisep(n, m, n0).unwrap().value();
                assert!(k <= 1.0);
                assert_eq!(k, kappa_bisep(n, m, n - n0).unwrap().value());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn loss_identity(n in 2usize..5000, mf in 0.0f64..1.0, r in 0.0f64..3.0, eta in 0.0f64..=1.0, nn in 0.0f64..3.0) {
        let m = 1 + ((n - 1) as f64 * mf) as usize % (n - 1);
        let (a, b, c) = reduced(n, m, r, eta, nn);
        let n1 = (1.0 - eta) * (2.0 * nn + 1.0);
        let want = eta * eta + n1 * n1 + 2.0 * eta * n1 * (2.0 * r).cosh();
        prop_assert!((a * b - c * c - want).abs() <= 1e-9 * (a * b).max(want).max(1.0));
    }

    #[test]
    fn loss_never_reduces_margin(n in 2usize..200, r in 0.0f64..2.5, eta in 0.0f64..=1.0, nn in 0.0f64..3.0) {
        let pure = pure_ghz_cm(n, r).unwrap();
        let lossy = apply_loss_noise(&pure, eta, nn).unwrap();
        prop_assert!(lossy.physicality().min_eigenvalue >= pure.physicality().min_eigenvalue - 1e-12);
    }

    #[test]
    fn expand_and_read_back(n in 2usize..20, r in 0.0f64..2.0, eta in 0.1f64..=1.0, nn in 0.0f64..1.0) {
        let cm = GhzParams::new(n, r, eta, nn).unwrap().cm();
        let full = cm.expand().unwrap();
        let back = full.to_symmetric(1e-12).unwrap();
        prop_assert_eq!(back.n, n);
        prop_assert!((back.a - cm.a).abs() < 1e-12 * cm.a && (back.b - cm.b).abs() < 1e-12 * cm.b);
        prop_assert!((back.c - cm.c).abs() <= 1e-12 * cm.b);
        // through the file format as well
        let doc = format!(r#"{{"format_version": 1, "n": {n}, "kind": "symmetric", "a": {:e}, "b": {:e}, "c": {:e}}}"#, cm.a, cm.b, cm.c);
        match parse_cm_document(&doc).unwrap() {
            CovarianceMatrix::Symmetric(s) => prop_assert_eq!(s, cm),
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn pascal_in_log_space(l in 2i64..1_000_000, jf in 0.0f64..1.0) {
        let j = 1 + ((l - 1) as f64 * jf) as i64;
        let j = j.min(l - 1);
        // C(l-1,j)/C(l,j) + C(l-1,j-1)/C(l,j) = 1, ratios formed in log space
        let r1 = cvwit::combin::binom_ratio(&[(l - 1, j)], &[(l, j)]).unwrap().value();
        let r2 = cvwit::combin::binom_ratio(&[(l - 1, j - 1)], &[(l, j)]).unwrap().value();
        prop_assert!((r1 + r2 - 1.0).abs() < 1e-10, "l={} j={} s={}", l, j, r1 + r2);
        prop_assert!(ln_binomial(l, j).unwrap() > ln_binomial(l - 1, j).unwrap());
    }

    #[test]
    fn log_ratio_matches_rational(n in 3i64..400, k in 1i64..200, m in 1i64..100) {
        let k = 1 + k % (n - 1);
        let m = 1 + m % (n - 1);
        let exact = binom_ratio_exact(&[(n - m - 1, k - 1)], &[(n, k)]).unwrap().to_f64().unwrap();
        let log = cvwit::combin::binom_ratio(&[(n - m - 1, k - 1)], &[(n, k)]).unwrap().value();
        prop_assert!((exact - log).abs() <= 1e-12 * exact.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn region_shrinks_as_kappa_grows(n in 3usize..100_000, mf in 0.0f64..1.0, eta in 0.9f64..=1.0, v in 0.0f64..0.01, k1 in -1.0f64..1.0, k2 in -1.0f64..1.0) {
        let m = 1 + ((n - 1) as f64 * mf) as usize % (n - 1);
        let (lo_k, hi_k) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
        let nn = v / (1.0 - v);
        let wide = QuadCoeffs::new(n, m, Kappa::from_value(lo_k), eta, nn).unwrap().violation();
        let narrow = QuadCoeffs::new(n, m, Kappa::from_value(hi_k), eta, nn).unwrap().violation();
        if let Some(nv) = narrow {
            let wv = wide.expect("larger kappa violated but smaller did not");
            prop_assert!(wv.lo <= nv.lo * (1.0 + 1e-9) + 1e-12 && wv.hi >= nv.hi * (1.0 - 1e-9));
        }
    }

    #[test]
    fn kappa_roots_straddle_one(n in 3usize..10_000, mf in 0.0f64..1.0, r in 0.01f64..3.0, eta in 0.0f64..=1.0, nn in 0.0f64..1.0) {
        let m = 1 + ((n - 1) as f64 * mf) as usize % (n - 1);
        let rb = ReducedBlock::new(&GhzParams::new(n, r, eta, nn).unwrap().cm(), m, 0.0).unwrap();
        // det as a quadratic in kappa
        let p = rb.a * rb.b - rb.c * rb.c;
        let qa = 1.0 - rb.a * rb.b;
        let qb = 2.0 * rb.c * rb.c;
        let qc = p * p - rb.a * rb.b;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 && qa.abs() > 1e-12 {
            let s = disc.sqrt();
            let (x1, x2) = ((-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa));
            let (lo, hi) = (x1.min(x2), x1.max(x2));
            prop_assert!(hi >= 1.0 - 1e-9 && lo <= 1.0 + 1e-9, "roots {} {}", lo, hi);
        }
    }

    #[test]
    fn widest_kappa_at_edge_or_middle(n in 3usize..1000, mf in 0.0f64..1.0) {
        let m = 1 + ((n - 1) as f64 * mf) as usize % (n - 1);
        let best = (1..n)
            .map(|n0| (kappa_bisep(n, m, n0).unwrap().value(), n0))
            .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
        let cands = [1, n - 1, n / 2, n - n / 2];
        let top = cands.iter().map(|&n0| kappa_bisep(n, m, n0).unwrap().value()).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(top >= best.0 - 1e-15, "n={} m={} argmax n0={}", n, m, best.1);
    }

    #[test]
    fn nonuniform_tau_weights_never_beat_uniform(n in 3usize..10, mf in 0.0f64..1.0, r in 0.0f64..2.0, eta in 0.5f64..=1.0, kappa in -1.0f64..1.0, seed in 0u64..1000) {
        let m = 1 + ((n - 1) as f64 * mf) as usize % (n - 1);
        let cm = GhzParams::new(n, r, eta, 0.01).unwrap().cm();
        let uni = full_matrix_min_eig(&cm, m, &vec![kappa; n - m]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = uniform_simplex(n - m, &mut rng);
        // same mean, clipped into [-1, 1]
        let mut v: Vec<f64> = w.iter().map(|x| kappa + 0.5 * (x * (n - m) as f64 - 1.0)).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x += kappa - mean);
        prop_assert!(full_matrix_min_eig(&cm, m, &v).unwrap() <= uni + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn objective_is_concave(seed in 0u64..10_000, r in 0.0f64..1.5, eta in 0.5f64..=1.0, lam in 0.0f64..=1.0) {
        let parts = PartitionFamily::AllBipartitions.partitions(4, ENUM_CAP).unwrap();
        let set = generate_sign_set(4, parts, &SamplingConfig { random_draws: 20_000, seed: 1 }).unwrap();
        let cm = GhzParams::new(4, r, eta, 0.05).unwrap().cm().expand().unwrap();
        let obj = Objective::new(&cm, &set).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = obj.dim();
        let (q1, q2) = (uniform_simplex(d, &mut rng), uniform_simplex(d, &mut rng));
        let mix: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
        let f = |q: &[f64]| obj.value(q).0;
        prop_assert!(f(&mix) >= lam * f(&q1) + (1.0 - lam) * f(&q2) - 1e-9);
    }

    #[test]
    fn certify_commutes_with_mode_relabeling(seed in 0u64..1000, r in 0.2f64..1.5, eta in 0.6f64..=1.0) {
        let parts = PartitionFamily::AllBipartitions.partitions(3, ENUM_CAP).unwrap();
        let set = generate_sign_set(3, parts, &SamplingConfig::default()).unwrap();
        let base = GhzParams::new(3, r, eta, 0.02).unwrap().cm().expand().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // break the GHZ symmetry with a random block state on mode 0 + 1
        let mut g = base.matrix().clone();
        let local = cvwit::oracle::random_physical_cm(2, &mut rng);
        for (i, ii) in [0usize, 1].iter().enumerate() {
            for (j, jj) in [0usize, 1].iter().enumerate() {
                for (oa, ob) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    g[(oa * 3 + ii, ob * 3 + jj)] += 0.2 * local[(oa * 2 + i, ob * 2 + j)];
                }
            }
        }
        let cm = cvwit::model::FullCm::new(g).unwrap();
        let cfg = OptConfig { stop_when_decided: false, ..OptConfig::default() };
        let a = certify_with(&cm, &set, &cfg).unwrap();
        for perm in [[1, 2, 0], [2, 1, 0]] {
            let b = certify_with(&cm.permute_modes(&perm).unwrap(), &set, &cfg).unwrap();
            prop_assert_eq!(a.certified, b.certified);
            prop_assert!((a.best_value - b.best_value).abs() < 1e-8, "{} vs {}", a.best_value, b.best_value);
        }
    }
}
