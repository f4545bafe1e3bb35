//! Independent routes used to cross-check the closed forms.
//!
//! Everything here is deliberately brute force: explicit partition
//! enumeration, dense 2n x 2n eigensolves, symplectic state construction.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combin::{Partition, PartitionFamily, ENUM_CAP};
use crate::error::{domain, Error, Result};
use crate::ghzcert::{
    kappa_bisep, xi_bisep_exact, xi_layout_exact, xi_occupancy_exact, ReducedBlock,
};
use crate::linalg::min_eigenvalue;
use crate::model::{pure_ghz_cm, FullCm, SymmetricCm, EXPAND_CAP};
use crate::signcrit::{
    certify_with, criterion_matrix_real, generate_sign_set, uniform_simplex, OptConfig,
    SamplingConfig, SignMatrix, SignSet,
};

/// One closed-form vs brute-force comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub quantity: String,
    pub closed_form: f64,
    pub brute_force: f64,
    pub abs_dev: f64,
    pub rel_dev: f64,
    pub tol: f64,
    pub pass: bool,
}

impl OracleReport {
    /// Passes when the absolute deviation is within `tol`.
    pub fn new(quantity: impl Into<String>, closed_form: f64, brute_force: f64, tol: f64) -> Self {
        let abs_dev = (closed_form - brute_force).abs();
        let rel_dev = abs_dev / brute_force.abs().max(f64::MIN_POSITIVE);
        Self {
            quantity: quantity.into(),
            closed_form,
            brute_force,
            abs_dev,
            rel_dev,
            tol,
            pass: abs_dev <= tol,
        }
    }

    pub fn exact(quantity: impl Into<String>, equal: bool, closed: f64, brute: f64) -> Self {
        let mut r = Self::new(quantity, closed, brute, 0.0);
        r.pass = equal;
        r
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} closed={:.15e} brute={:.15e} abs={:.3e} rel={:.3e} tol={:.1e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.quantity,
            self.closed_form,
            self.brute_force,
            self.abs_dev,
            self.rel_dev,
            self.tol
        )
    }
}

/// kappa obtained by listing every layout and averaging the sign rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CountedKappa {
    pub kappa: BigRational,
    /// Every row is +1 on the first m modes.
    pub first_columns_positive: bool,
    /// All tau-columns average to the same value.
    pub tau_columns_equal: bool,
    pub partitions: usize,
}

fn count_with_integer_b(n: usize, m: usize, parts: &[Partition], big: i64, small: i64) -> CountedKappa {
    // b = (big, .., big, -small, .., -small)
    let b: Vec<i64> = (0..n).map(|i| if i < m { big } else { -small }).collect();
    let mut col = vec![0i64; n];
    let mut first_ok = true;
    for p in parts {
        for blk in &p.blocks {
            let s: i64 = blk.iter().map(|&i| b[i]).sum();
            let sign = if s > 0 { 1 } else { -1 };
            for &i in blk {
                col[i] += sign;
                if i < m && sign < 0 {
                    first_ok = false;
                }
            }
        }
    }
    let np = parts.len() as i64;
    let tau_equal = col[m..].iter().all(|&c| c == col[m]);
    CountedKappa {
        kappa: BigRational::new(BigInt::from(col[m]), BigInt::from(np)),
        first_columns_positive: first_ok,
        tau_columns_equal: tau_equal,
        partitions: parts.len(),
    }
}

/// kappa for block sizes `sizes` by exhaustive enumeration, with tau = 1/(2(n-m)).
pub fn kappa_by_counting(n: usize, m: usize, sizes: &[usize]) -> Result<CountedKappa> {
    if m == 0 || m >= n {
        return domain(format!("m = {m} outside 1..{n}"));
    }
    let parts = PartitionFamily::Sized { sizes: sizes.to_vec() }.partitions(n, ENUM_CAP)?;
    let d = 2 * (n - m) as i64;
    Ok(count_with_integer_b(n, m, &parts, d, 1))
}

/// Whether the first m columns stay +1 for tau = num/den. They do whenever
/// (n - m) tau < 1; larger tau can flip blocks holding few of the first modes.
pub fn first_columns_positive(n: usize, m: usize, sizes: &[usize], tau_num: i64, tau_den: i64) -> Result<bool> {
    let parts = PartitionFamily::Sized { sizes: sizes.to_vec() }.partitions(n, ENUM_CAP)?;
    Ok(count_with_integer_b(n, m, &parts, tau_den, tau_num).first_columns_positive)
}

/// pure GHZ covariance matrix built from squeezers and an orthogonal interferometer.
pub fn ghz_by_symplectic(n: usize, r: f64) -> Result<FullCm> {
    if n < 2 {
        return domain("n must be >= 2");
    }
    // rows of o: an orthonormal basis whose first vector is uniform
    let mut seed = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        seed[(i, 0)] = 1.0;
    }
    let qr = seed.qr();
    let o = qr.q().transpose();
    let (e, ei) = ((2.0 * r).exp(), (-2.0 * r).exp());
    let mut gx = DMatrix::zeros(n, n);
    let mut gp = DMatrix::zeros(n, n);
    for k in 0..n {
        let row = o.row(k).transpose();
        let (vx, vp) = if k == 0 { (e, ei) } else { (ei, e) };
        gx += &row * row.transpose() * vx;
        gp += &row * row.transpose() * vp;
    }
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    g.view_mut((0, 0), (n, n)).copy_from(&gx);
    g.view_mut((n, n), (n, n)).copy_from(&gp);
    FullCm::new(g)
}

/// Loss and thermal noise on every mode of a dense CM.
pub fn lossy_dense(cm: &FullCm, eta: f64, noise_n: f64) -> Result<FullCm> {
    let add = (1.0 - eta) * (2.0 * noise_n + 1.0);
    let dim = 2 * cm.n();
    FullCm::new(cm.matrix() * eta + DMatrix::identity(dim, dim) * add)
}

/// [[gamma_x, Q], [Q, gamma_p]] with Q = diag(1, .., 1, v_tau...), dense.
pub fn full_criterion_matrix(cm: &SymmetricCm, m: usize, v_tau: &[f64]) -> Result<DMatrix<f64>> {
    if cm.n > EXPAND_CAP {
        return Err(Error::Capacity { what: "modes", got: cm.n as u64, limit: EXPAND_CAP as u64 });
    }
    if v_tau.len() != cm.n - m {
        return Err(Error::Dimension(format!("{} tau weights for {} tau-modes", v_tau.len(), cm.n - m)));
    }
    let v: Vec<f64> = (0..cm.n).map(|i| if i < m { 1.0 } else { v_tau[i - m] }).collect();
    Ok(criterion_matrix_real(&cm.gamma_x(), &cm.gamma_p(), &v))
}

/// Smallest eigenvalue of the dense criterion matrix.
pub fn full_matrix_min_eig(cm: &SymmetricCm, m: usize, v_tau: &[f64]) -> Result<f64> {
    Ok(min_eigenvalue(&full_criterion_matrix(cm, m, v_tau)?))
}

/// Smallest eigenvalues of the invariant sectors for uniform kappa.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorMins {
    /// 4x4 symmetric sector.
    pub symmetric: f64,
    /// Non-symmetric combinations of the first m modes (m >= 2).
    pub first_block: Option<f64>,
    /// Non-symmetric combinations of the last n - m modes (n - m >= 2).
    pub tau_block: Option<f64>,
}

impl SectorMins {
    pub fn global(&self) -> f64 {
        [Some(self.symmetric), self.first_block, self.tau_block]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn sector_mins(cm: &SymmetricCm, m: usize, kappa: f64) -> Result<SectorMins> {
    let rb = ReducedBlock::new(cm, m, kappa)?;
    let (x, p) = (cm.a - cm.c, cm.b + cm.c);
    let low = |off: f64| 0.5 * ((x + p) - ((x - p).powi(2) + 4.0 * off * off).sqrt());
    Ok(SectorMins {
        symmetric: rb.min_eigenvalue(),
        first_block: (m >= 2).then(|| low(1.0)),
        tau_block: (cm.n - m >= 2).then(|| low(kappa)),
    })
}

/// Projection of the dense criterion matrix onto the symmetric sector.
pub fn projected_symmetric_min_eig(cm: &SymmetricCm, m: usize, kappa: f64) -> Result<f64> {
    let n = cm.n;
    let full = full_criterion_matrix(cm, m, &vec![kappa; n - m])?;
    let mut p = DMatrix::zeros(2 * n, 4);
    let (s1, s2) = (1.0 / (m as f64).sqrt(), 1.0 / ((n - m) as f64).sqrt());
    for i in 0..n {
        let (col, w) = if i < m { (0, s1) } else { (1, s2) };
        p[(i, col)] = w;
        p[(n + i, col + 2)] = w;
    }
    // sign of the second p-vector matches the (x2, p2) basis of the 4x4 block
    let red = p.transpose() * full * &p;
    Ok(min_eigenvalue(&red))
}

/// Random physical CM of k modes: thermal state through random squeezers,
/// rotations and beam splitters.
pub fn random_physical_cm<R: Rng>(k: usize, rng: &mut R) -> DMatrix<f64> {
    let dim = 2 * k;
    let mut s = DMatrix::<f64>::identity(dim, dim);
    let apply = |s: &mut DMatrix<f64>, e: DMatrix<f64>| *s = e * &*s;
    for _ in 0..(3 * k + 2) {
        let i = rng.random_range(0..k);
        let mut e = DMatrix::<f64>::identity(dim, dim);
        match rng.random_range(0..3) {
            0 => {
                let t: f64 = rng.random_range(-0.8..0.8);
                e[(i, i)] = t.exp();
                e[(k + i, k + i)] = (-t).exp();
            }
            1 => {
                let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let (c, sn) = (th.cos(), th.sin());
                e[(i, i)] = c;
                e[(i, k + i)] = sn;
                e[(k + i, i)] = -sn;
                e[(k + i, k + i)] = c;
            }
            _ => {
                if k < 2 {
                    continue;
                }
                let mut j = rng.random_range(0..k - 1);
                if j >= i {
                    j += 1;
                }
                let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let (c, sn) = (th.cos(), th.sin());
                for off in [0, k] {
                    e[(off + i, off + i)] = c;
                    e[(off + i, off + j)] = sn;
                    e[(off + j, off + i)] = -sn;
                    e[(off + j, off + j)] = c;
                }
            }
        }
        apply(&mut s, e);
    }
    let mut d = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..k {
        let nu = 1.0 + rng.random_range(0.0..0.5);
        d[(i, i)] = nu;
        d[(k + i, k + i)] = nu;
    }
    &s * d * s.transpose()
}

/// Mixture over `parts` with weights `q`, each term a product of random block states.
pub fn random_separable_mixture<R: Rng>(n: usize, parts: &[Partition], q: &[f64], rng: &mut R) -> Result<FullCm> {
    let mut g = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for (p, &w) in parts.iter().zip(q) {
        for blk in &p.blocks {
            let k = blk.len();
            let local = random_physical_cm(k, rng);
            for (a, &ia) in blk.iter().enumerate() {
                for (bb, &ib) in blk.iter().enumerate() {
                    for (oa, ob) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        g[(oa * n + ia, ob * n + ib)] += w * local[(oa * k + a, ob * k + bb)];
                    }
                }
            }
        }
    }
    FullCm::new(g)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub trials: usize,
    pub certified: usize,
    /// Smallest F(q_true) seen; should stay >= -tol.
    pub min_true_q_value: f64,
    pub nonconverged: usize,
}

/// Random separable mixtures over a family must never be certified.
pub fn soundness_trials(set: &SignSet, trials: usize, seed: u64, cfg: &OptConfig) -> Result<SoundnessReport> {
    let n = set.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SoundnessReport { trials, certified: 0, min_true_q_value: f64::INFINITY, nonconverged: 0 };
    for _ in 0..trials {
        let q = uniform_simplex(set.partitions.len(), &mut rng);
        let cm = random_separable_mixture(n, &set.partitions, &q, &mut rng)?;
        let obj = crate::signcrit::Objective::new(&cm, set)?;
        rep.min_true_q_value = rep.min_true_q_value.min(obj.value(&q).0);
        let v = certify_with(&cm, set, cfg)?;
        if v.certified {
            rep.certified += 1;
        }
        if !v.converged && v.best_value < -cfg.tol {
            rep.nonconverged += 1;
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformQReport {
    pub uniform_value: f64,
    /// Largest F(q) over the draws that exceeded F(uniform); -inf if none did.
    pub worst_excess: f64,
    pub draws: usize,
    pub violations: usize,
}

/// F(uniform) against F at random points of the simplex.
///
/// For each draw it is enough to find one sign matrix whose eigenvalue is
/// already below F(uniform) + tol; matrices that did so recently are tried first.
pub fn uniform_q_check(cm: &FullCm, set: &SignSet, draws: usize, seed: u64, tol: f64) -> Result<UniformQReport> {
    let obj = crate::signcrit::Objective::new(cm, set)?;
    let d = obj.dim();
    let (fu, iu) = obj.value(&vec![1.0 / d as f64; d]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hints: Vec<usize> = vec![iu];
    let mut rep = UniformQReport { uniform_value: fu, worst_excess: f64::NEG_INFINITY, draws, violations: 0 };
    for _ in 0..draws {
        let q = uniform_simplex(d, &mut rng);
        let hit = hints
            .iter()
            .position(|&i| obj.lambda(&set.matrices[i].average(&q)) <= fu + tol);
        match hit {
            Some(p) => {
                let i = hints.remove(p);
                hints.insert(0, i);
            }
            None => {
                let (f, i) = obj.value(&q);
                if f > fu + tol {
                    rep.violations += 1;
                    rep.worst_excess = rep.worst_excess.max(f - fu);
                }
                hints.insert(0, i);
                hints.truncate(16);
            }
        }
    }
    Ok(rep)
}

/// The three-mode matrices written out by hand, canonicalized.
pub fn three_mode_reference() -> [SignMatrix; 3] {
    let t = |rows: [[i8; 3]; 3]| SignMatrix { n: 3, entries: rows.concat() }.canonical();
    [
        t([[1, -1, -1], [1, -1, 1], [1, 1, -1]]),
        t([[1, -1, -1], [1, -1, 1], [1, 1, 1]]),
        t([[1, 1, 1], [1, 1, 1], [1, 1, -1]]),
    ]
}

/// The hand-derived matrices use rows ordered 1|23, 2|13, 3|12. Reorders a
/// generated matrix (rows in enumeration order) to that convention.
pub fn to_singleton_row_order(t: &SignMatrix, parts: &[Partition]) -> Result<SignMatrix> {
    let n = t.n;
    let mut rows = vec![Vec::new(); parts.len()];
    for (r, p) in parts.iter().enumerate() {
        let single = p
            .blocks
            .iter()
            .find(|b| b.len() == 1)
            .ok_or_else(|| Error::Domain("partition without singleton".into()))?[0];
        rows[single] = t.entries[r * n..(r + 1) * n].to_vec();
    }
    Ok(SignMatrix { n, entries: rows.concat() }.canonical())
}

fn permute_matrix(t: &SignMatrix, perm: &[usize]) -> SignMatrix {
    // relabel modes: row for singleton perm[i] moves to row i, column likewise
    let n = t.n;
    let mut e = vec![0i8; n * n];
    for i in 0..n {
        for j in 0..n {
            e[i * n + j] = t.get(perm[i], perm[j]);
        }
    }
    SignMatrix { n, entries: e }.canonical()
}

/// Suite `signset3`: generated three-mode set has 12 members, including the
/// hand-derived ones and all their mode permutations.
pub fn suite_signset3(sampling: &SamplingConfig) -> Result<Vec<OracleReport>> {
    let parts = PartitionFamily::AllBipartitions.partitions(3, ENUM_CAP)?;
    let set = generate_sign_set(3, parts.clone(), sampling)?;
    let got: Vec<SignMatrix> = set
        .matrices
        .iter()
        .map(|t| to_singleton_row_order(t, &parts))
        .collect::<Result<_>>()?;
    let mut out = vec![OracleReport::exact(
        "signset3.count",
        got.len() == 12,
        got.len() as f64,
        12.0,
    )];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for (i, t) in three_mode_reference().iter().enumerate() {
        let all = perms.iter().all(|p| got.contains(&permute_matrix(t, p)));
        out.push(OracleReport::exact(format!("signset3.T{}_orbit", i + 1), all, 1.0, 1.0));
    }
    Ok(out)
}

/// Suite `kappa-small`: closed-form kappa against enumeration, exactly.
pub fn suite_kappa_small(n_max: usize) -> Result<Vec<OracleReport>> {
    let mut out = Vec::new();
    let (mut total, mut bad) = (0usize, 0usize);
    for n in 2..=n_max {
        for m in 1..n {
            for n0 in 1..=n / 2 {
                let counted = kappa_by_counting(n, m, &[n0, n - n0])?;
                let xi = xi_bisep_exact(n, m, n0)?;
                let closed = BigRational::from_integer(1.into()) - xi * BigRational::from_integer(2.into());
                total += 1;
                if closed != counted.kappa || !counted.first_columns_positive || !counted.tau_columns_equal {
                    bad += 1;
                    out.push(OracleReport::exact(
                        format!("kappa.bisep n={n} m={m} n0={n0}"),
                        false,
                        closed.to_f64().unwrap_or(f64::NAN),
                        counted.kappa.to_f64().unwrap_or(f64::NAN),
                    ));
                }
            }
        }
    }
    out.push(OracleReport::exact(format!("kappa.bisep all {total} cases"), bad == 0, bad as f64, 0.0));
    // three- and four-block layouts, direct and occupancy forms
    let (mut total, mut bad) = (0usize, 0usize);
    for n in 3..=n_max.min(8) {
        for sizes in size_tuples(n, 3).into_iter().chain(size_tuples(n, 4)) {
            for m in 1..n {
                let counted = kappa_by_counting(n, m, &sizes)?;
                let two = BigRational::from_integer(2.into());
                let one = BigRational::from_integer(1.into());
                let direct = &one - xi_layout_exact(n, m, &sizes)? * &two;
                let occ = &one - xi_occupancy_exact(n, m, &sizes)? * &two;
                total += 1;
                if direct != counted.kappa || occ != counted.kappa {
                    bad += 1;
                    out.push(OracleReport::exact(
                        format!("kappa.layout n={n} m={m} {sizes:?}"),
                        false,
                        direct.to_f64().unwrap_or(f64::NAN),
                        counted.kappa.to_f64().unwrap_or(f64::NAN),
                    ));
                }
            }
        }
    }
    out.push(OracleReport::exact(format!("kappa.layout all {total} cases"), bad == 0, bad as f64, 0.0));
    Ok(out)
}

/// Nonincreasing size tuples with k parts summing to n.
pub fn size_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for s in (1..=cap.min(left)).rev() {
            if left - s < parts - 1 {
                continue;
            }
            cur.push(s);
            rec(left - s, parts - 1, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, n, &mut Vec::new(), &mut out);
    out
}

/// Suite `reduce4`: 4x4 reduction against the dense matrix.
pub fn suite_reduce4(n_values: &[usize]) -> Result<Vec<OracleReport>> {
    let mut out = Vec::new();
    for &n in n_values {
        for (i, &(r, eta, nn)) in [(0.2, 0.99, 0.0), (0.9, 0.9, 0.05), (1.6, 0.7, 0.3)].iter().enumerate() {
            let m = (n / 3).max(1);
            let kappa = kappa_bisep(n, m, 1)?.value();
            let cm = crate::model::apply_loss_noise(&pure_ghz_cm(n, r)?, eta, nn)?;
            let sec = sector_mins(&cm, m, kappa)?;
            let full = full_matrix_min_eig(&cm, m, &vec![kappa; n - m])?;
            let proj = projected_symmetric_min_eig(&cm, m, kappa)?;
            out.push(OracleReport::new(format!("reduce4.global n={n} pt={i}"), sec.global(), full, 1e-8));
            out.push(OracleReport::new(format!("reduce4.sector n={n} pt={i}"), sec.symmetric, proj, 1e-8));
        }
    }
    Ok(out)
}

pub fn run_suite(name: &str) -> Result<Vec<OracleReport>> {
    match name {
        "signset3" => suite_signset3(&SamplingConfig::default()),
        "kappa-small" => suite_kappa_small(12),
        "reduce4" => suite_reduce4(&[3, 5, 8, 12, 40, 100]),
        "all" => {
            let mut v = run_suite("signset3")?;
            v.extend(run_suite("kappa-small")?);
            v.extend(run_suite("reduce4")?);
            Ok(v)
        }
        other => domain(format!("unknown oracle suite {other:?} (signset3, kappa-small, reduce4, all)")),
    }
}

/// Exact kappa equality helper used by tests.
pub fn rational_is_zero(x: &BigRational) -> bool {
    x.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symplectic_ghz_matches_closed_form() {
        for n in [2usize, 3, 7] {
            let a = ghz_by_symplectic(n, 0.8).unwrap();
            let b = pure_ghz_cm(n, 0.8).unwrap().expand().unwrap();
            assert!((a.matrix() - b.matrix()).amax() < 1e-12);
        }
    }

    #[test]
    fn random_block_states_are_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..5 {
            let g = random_physical_cm(k, &mut rng);
            let p = FullCm::new(g).unwrap().physicality();
            assert!(p.physical, "{}", p.min_eigenvalue);
        }
    }

    #[test]
    fn counting_small_case() {
        let c = kappa_by_counting(3, 1, &[1, 2]).unwrap();
        assert_eq!(c.kappa, BigRational::new((-1).into(), 3.into()));
        assert!(c.first_columns_positive && c.tau_columns_equal);
    }

    #[test]
    fn large_tau_flips_first_columns() {
        // n = 4, m = 2, split 1|3: a block {first, tau, tau} goes negative once 2 tau > 1
        assert!(first_columns_positive(4, 2, &[1, 3], 1, 3).unwrap());
        assert!(!first_columns_positive(4, 2, &[1, 3], 2, 3).unwrap());
    }

    #[test]
    fn size_tuple_enumeration() {
        assert_eq!(size_tuples(6, 3), vec![vec![4, 1, 1], vec![3, 2, 1], vec![2, 2, 2]]);
    }
}
