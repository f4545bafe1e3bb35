//! Generic sign-matrix criterion for partial separability of small states.
//!
//! For a partition I and a sign vector b, each block contributes the sign of
//! its sum of b. Stacking these rows over a partition family gives a sign
//! matrix T. If the state is a mixture over the family with weights q, then
//! gamma + sigma_2 (x) diag(q T) is positive semidefinite for every realizable
//! T. The test maximizes F(q) = min_T lambda_min over the simplex; F < 0 at
//! the maximum refutes the separability class.

use std::collections::HashMap;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combin::{Partition, PartitionFamily, ENUM_CAP};
use crate::error::{domain, Error, Result};
use crate::linalg::{min_eigenpair, min_eigenpair_herm, min_eigenvalue, min_eigenvalue_herm, C64};
use crate::model::FullCm;

/// Largest mode count the generic engine accepts.
pub const MODE_CAP: usize = 12;
/// Largest number of distinct sign matrices kept.
pub const SIGN_SET_CAP: usize = 250_000;
/// F below minus this value certifies.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Local weights of the two quadrature combinations u = sum h_i x_i, v = sum g_i p_i.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessVectors {
    pub h: Vec<f64>,
    pub g: Vec<f64>,
}

impl WitnessVectors {
    pub fn new(h: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if h.len() != g.len() {
            return Err(Error::Dimension(format!("h has {} entries, g has {}", h.len(), g.len())));
        }
        Ok(Self { h, g })
    }

    /// b_i = h_i g_i.
    pub fn b(&self) -> Vec<f64> {
        self.h.iter().zip(&self.g).map(|(h, g)| h * g).collect()
    }

    /// Var(u) + Var(v) for a state with covariance matrix `cm`.
    pub fn variance_sum(&self, cm: &FullCm) -> Result<f64> {
        let n = cm.n();
        if self.h.len() != n {
            return Err(Error::Dimension(format!("{} weights for {} modes", self.h.len(), n)));
        }
        let gam = cm.matrix();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.h[i] * gam[(i, j)] * self.h[j] + self.g[i] * gam[(n + i, n + j)] * self.g[j];
            }
        }
        Ok(s)
    }
}

/// Separable lower bound on Var(u) + Var(v): sum_I q_I sum_blocks 2 |sum_{i in block} b_i|.
pub fn uncertainty_bound(b: &[f64], partitions: &[Partition], q: &[f64]) -> f64 {
    partitions
        .iter()
        .zip(q)
        .map(|(p, w)| {
            w * p
                .blocks
                .iter()
                .map(|blk| blk.iter().map(|&i| b[i]).sum::<f64>().abs())
                .sum::<f64>()
        })
        .sum::<f64>()
        * 2.0
}

/// Sign matrix with one row per partition and one column per mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignMatrix {
    pub n: usize,
    pub entries: Vec<i8>,
}

impl SignMatrix {
    pub fn rows(&self) -> impl Iterator<Item = &[i8]> {
        self.entries.chunks(self.n)
    }

    pub fn row_count(&self) -> usize {
        self.entries.len() / self.n
    }

    pub fn get(&self, row: usize, mode: usize) -> i8 {
        self.entries[row * self.n + mode]
    }

    pub fn negated(&self) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|v| -v).collect() }
    }

    /// T and -T give complex-conjugate criterion matrices; keep the
    /// lexicographically larger one.
    pub fn canonical(self) -> Self {
        let neg = self.negated();
        if neg > self {
            neg
        } else {
            self
        }
    }

    /// V = q T.
    pub fn average(&self, q: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        for (row, w) in self.rows().zip(q) {
            for (vs, &t) in v.iter_mut().zip(row) {
                *vs += w * t as f64;
            }
        }
        v
    }
}

/// Sign matrix realized by b, or `None` if some block sum is (numerically) zero.
pub fn sign_matrix(b: &[f64], partitions: &[Partition]) -> Option<SignMatrix> {
    let n = b.len();
    let scale: f64 = b.iter().map(|x| x.abs()).sum();
    let mut entries = vec![0i8; n * partitions.len()];
    for (r, p) in partitions.iter().enumerate() {
        for blk in &p.blocks {
            let s: f64 = blk.iter().map(|&i| b[i]).sum();
            if s.abs() <= 1e-12 * scale {
                return None;
            }
            let sign = if s > 0.0 { 1 } else { -1 };
            for &i in blk {
                entries[r * n + i] = sign;
            }
        }
    }
    Some(SignMatrix { n, entries })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Random sign vectors drawn after the orthant seeds.
    pub random_draws: usize,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { random_draws: 200_000, seed: 0x5eed }
    }
}

/// How thoroughly the sign-vector space was sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub draws: usize,
    pub orthant_seeds: usize,
    pub ambiguous: usize,
    /// Index of the draw that produced the last new matrix.
    pub last_new_draw: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignSet {
    pub n: usize,
    pub partitions: Vec<Partition>,
    pub matrices: Vec<SignMatrix>,
    pub coverage: Coverage,
}

const CHUNK: usize = 4096;

fn draw_b(n: usize, idx: usize, orthants: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if idx < orthants {
        return (0..n)
            .map(|i| {
                let mag: f64 = rng.sample::<f64, _>(StandardNormal).abs() + 1e-3;
                if idx >> i & 1 == 1 { -mag } else { mag }
            })
            .collect();
    }
    if idx % 2 == 0 {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    } else {
        // log-uniform magnitudes reach thin cones near the coordinate hyperplanes
        (0..n)
            .map(|_| {
                let mag = 10f64.powf(rng.random_range(-3.0..3.0));
                if rng.random::<bool>() { mag } else { -mag }
            })
            .collect()
    }
}

/// Samples the sign matrices realizable over a set of partitions.
pub fn generate_sign_set(n: usize, partitions: Vec<Partition>, cfg: &SamplingConfig) -> Result<SignSet> {
    if n > MODE_CAP {
        return Err(Error::Capacity { what: "modes", got: n as u64, limit: MODE_CAP as u64 });
    }
    if partitions.is_empty() || partitions.iter().any(|p| p.n() != n) {
        return domain(format!("partition family does not match n = {n}"));
    }
    let orthants = 1usize << n;
    let total = orthants + cfg.random_draws;
    let chunks: Vec<usize> = (0..total.div_ceil(CHUNK)).collect();
    let found: Vec<(HashMap<SignMatrix, usize>, usize)> = chunks
        .par_iter()
        .map(|&c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let mut seen = HashMap::new();
            let mut ambiguous = 0;
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let b = draw_b(n, idx, orthants, &mut rng);
                match sign_matrix(&b, &partitions) {
                    Some(t) => {
                        seen.entry(t.canonical()).or_insert(idx);
                    }
                    None => ambiguous += 1,
                }
            }
            (seen, ambiguous)
        })
        .collect();
    let mut first: HashMap<SignMatrix, usize> = HashMap::new();
    let mut ambiguous = 0;
    for (seen, amb) in found {
        ambiguous += amb;
        for (t, idx) in seen {
            let e = first.entry(t).or_insert(idx);
            *e = (*e).min(idx);
        }
    }
    if first.len() > SIGN_SET_CAP {
        return Err(Error::Capacity {
            what: "sign matrices",
            got: first.len() as u64,
            limit: SIGN_SET_CAP as u64,
        });
    }
    // all +1 reduces to gamma + i Omega >= 0, true for every physical state
    first.retain(|t, _| t.entries.iter().any(|&e| e < 0));
    let last_new_draw = first.values().copied().max().unwrap_or(0);
    let mut matrices: Vec<SignMatrix> = first.into_keys().collect();
    matrices.sort();
    Ok(SignSet {
        n,
        partitions,
        matrices,
        coverage: Coverage { draws: total, orthant_seeds: orthants, ambiguous, last_new_draw },
    })
}

pub fn generate_for_family(n: usize, family: &PartitionFamily, cfg: &SamplingConfig) -> Result<SignSet> {
    if n > MODE_CAP {
        return Err(Error::Capacity { what: "modes", got: n as u64, limit: MODE_CAP as u64 });
    }
    generate_sign_set(n, family.partitions(n, ENUM_CAP)?, cfg)
}

/// gamma + sigma_2 (x) diag(v), Hermitian.
pub fn criterion_matrix(cm: &FullCm, v: &[f64]) -> DMatrix<C64> {
    let n = cm.n();
    let g = cm.matrix();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let mut z = C64::new(g[(i, j)], 0.0);
        if i < n && j == i + n {
            z.im -= v[i];
        } else if i >= n && j + n == i {
            z.im += v[j];
        }
        z
    })
}

/// Real form [[gamma_x, diag v], [diag v, gamma_p]], unitarily equivalent to
/// [`criterion_matrix`] when there are no x-p correlations.
pub fn criterion_matrix_real(gx: &DMatrix<f64>, gp: &DMatrix<f64>, v: &[f64]) -> DMatrix<f64> {
    let n = gx.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(gx);
    m.view_mut((n, n), (n, n)).copy_from(gp);
    for i in 0..n {
        m[(i, n + i)] = v[i];
        m[(n + i, i)] = v[i];
    }
    m
}

/// A supporting linear function of F: F(q') <= w . q' for all q' on the simplex.
#[derive(Clone, Debug)]
pub struct Cut {
    pub value: f64,
    pub matrix_index: usize,
    pub w: Vec<f64>,
    pub eigenvector: Vec<C64>,
}

/// F(q) for a fixed state and sign set.
pub struct Objective<'a> {
    cm: &'a FullCm,
    set: &'a SignSet,
    real_blocks: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

impl<'a> Objective<'a> {
    pub fn new(cm: &'a FullCm, set: &'a SignSet) -> Result<Self> {
        if cm.n() != set.n {
            return Err(Error::Dimension(format!("state has {} modes, sign set {}", cm.n(), set.n)));
        }
        let real_blocks = cm.is_xp_block_diagonal().then(|| (cm.gamma_x(), cm.gamma_p()));
        Ok(Self { cm, set, real_blocks })
    }

    pub fn dim(&self) -> usize {
        self.set.partitions.len()
    }

    pub fn lambda(&self, v: &[f64]) -> f64 {
        match &self.real_blocks {
            Some((gx, gp)) => min_eigenvalue(&criterion_matrix_real(gx, gp, v)),
            None => min_eigenvalue_herm(&criterion_matrix(self.cm, v)),
        }
    }

    /// Smallest eigenvalue, its (complex-form) eigenvector and d lambda / d v.
    pub fn lambda_grad(&self, v: &[f64]) -> (f64, Vec<C64>, Vec<f64>) {
        let n = self.cm.n();
        match &self.real_blocks {
            Some((gx, gp)) => {
                let (lam, u) = min_eigenpair(&criterion_matrix_real(gx, gp, v));
                let grad = (0..n).map(|s| 2.0 * u[s] * u[s + n]).collect();
                // undo the diag(I, iI) change of basis
                let z = (0..2 * n)
                    .map(|k| if k < n { C64::new(u[k], 0.0) } else { C64::new(0.0, u[k]) })
                    .collect();
                (lam, z, grad)
            }
            None => {
                let (lam, z) = min_eigenpair_herm(&criterion_matrix(self.cm, v));
                let grad = (0..n).map(|s| 2.0 * (z[s].conj() * z[s + n]).im).collect();
                (lam, z.iter().copied().collect(), grad)
            }
        }
    }

    /// (F(q), index of the minimizing sign matrix).
    pub fn value(&self, q: &[f64]) -> (f64, usize) {
        self.set
            .matrices
            .par_iter()
            .enumerate()
            .map(|(i, t)| (self.lambda(&t.average(q)), i))
            .reduce(|| (f64::INFINITY, usize::MAX), |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
    }

    pub fn cut(&self, q: &[f64]) -> Cut {
        let (value, idx) = self.value(q);
        let t = &self.set.matrices[idx];
        let v = t.average(q);
        let (lam, z, d) = self.lambda_grad(&v);
        // z^dag gamma z = lam - sum_s v_s d_s; the rest is linear in q
        let base = lam - v.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
        let w = t
            .rows()
            .map(|row| base + row.iter().zip(&d).map(|(&s, ds)| s as f64 * ds).sum::<f64>())
            .collect();
        Cut { value, matrix_index: idx, w, eigenvector: z }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub multistart: usize,
    pub ascent_iters: usize,
    pub cut_iters: usize,
    pub tol: f64,
    /// Stop once the upper and lower bounds on max F are this close.
    pub gap_tol: f64,
    pub seed: u64,
    /// Return as soon as the verdict is settled (some F(q) >= -tol, or the
    /// upper bound drops below -tol) instead of tightening the value.
    pub stop_when_decided: bool,
    pub sampling: SamplingConfig,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            multistart: 64,
            ascent_iters: 40,
            cut_iters: 400,
            tol: DEFAULT_TOL,
            gap_tol: 1e-10,
            seed: 7,
            stop_when_decided: true,
            sampling: SamplingConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertVerdict {
    pub certified: bool,
    /// Best F(q) found (lower bound on the maximum).
    pub best_value: f64,
    /// Cutting-plane upper bound on the maximum.
    pub upper_bound: f64,
    pub q: Vec<f64>,
    pub sign_matrix: SignMatrix,
    #[serde(skip)]
    pub eigenvector: Vec<C64>,
    pub converged: bool,
    pub evaluations: usize,
    pub sign_matrices: usize,
}

/// Uniform draw from the probability simplex (flat Dirichlet).
pub fn uniform_simplex<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let (mut css, mut theta) = (0.0, 0.0);
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Kelley master problem: max t s.t. t <= w_k . q, q on the simplex.
fn lp_step(cuts: &[Vec<f64>], d: usize) -> Option<(f64, Vec<f64>)> {
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let t = p.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let q: Vec<_> = (0..d).map(|_| p.add_var(0.0, (0.0, 1.0))).collect();
    let ones: Vec<_> = q.iter().map(|&v| (v, 1.0)).collect();
    p.add_constraint(ones.as_slice(), ComparisonOp::Eq, 1.0);
    for w in cuts {
        let mut e = vec![(t, 1.0)];
        e.extend(q.iter().zip(w).map(|(&v, &c)| (v, -c)));
        p.add_constraint(e.as_slice(), ComparisonOp::Le, 0.0);
    }
    let sol = p.solve().ok()?.into_solution().ok()?;
    let qs: Vec<f64> = q.iter().map(|&v| sol.var_value(v).max(0.0)).collect();
    let s: f64 = qs.iter().sum();
    Some((sol.objective(), qs.iter().map(|x| x / s).collect()))
}

const STALL_ROUNDS: usize = 25;

/// Maximizes F over the simplex: multistart, projected supergradient ascent,
/// then cutting planes that also give an upper bound.
pub fn maximize(obj: &Objective, cfg: &OptConfig) -> CertVerdict {
    let d = obj.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evaluations = 0usize;
    let mut cuts: Vec<Vec<f64>> = Vec::new();
    let mut best: Option<(Vec<f64>, Cut)> = None;
    let uncertified = |c: &Cut| c.value >= -cfg.tol;

    let record = |q: Vec<f64>, cut: Cut, cuts: &mut Vec<Vec<f64>>, best: &mut Option<(Vec<f64>, Cut)>| {
        cuts.push(cut.w.clone());
        if best.as_ref().is_none_or(|(_, b)| cut.value > b.value) {
            *best = Some((q, cut));
        }
    };

    let finish = |best: (Vec<f64>, Cut), ub: f64, converged: bool, evaluations: usize| {
        let (q, cut) = best;
        let ub = ub.max(cut.value);
        CertVerdict {
            certified: ub < -cfg.tol,
            best_value: cut.value,
            upper_bound: ub,
            q,
            sign_matrix: obj.set.matrices[cut.matrix_index].clone(),
            eigenvector: cut.eigenvector,
            converged,
            evaluations,
            sign_matrices: obj.set.matrices.len(),
        }
    };

    // start points: uniform, vertices, random
    let mut starts = vec![vec![1.0 / d as f64; d]];
    if d > 1 {
        for p in 0..d {
            let mut e = vec![0.0; d];
            e[p] = 1.0;
            starts.push(e);
        }
        for _ in 0..cfg.multistart {
            starts.push(uniform_simplex(d, &mut rng));
        }
    }
    let mut scored: Vec<(f64, Vec<f64>)> = Vec::with_capacity(starts.len());
    for q in starts {
        let cut = obj.cut(&q);
        evaluations += 1;
        let v = cut.value;
        let stop = uncertified(&cut) && cfg.stop_when_decided;
        record(q.clone(), cut, &mut cuts, &mut best);
        if stop {
            return finish(best.unwrap(), f64::INFINITY, false, evaluations);
        }
        scored.push((v, q));
    }
    if d == 1 {
        let b = best.unwrap();
        let v = b.1.value;
        return finish(b, v, true, evaluations);
    }

    // projected supergradient ascent from the best few starts
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (_, q0) in scored.into_iter().take(3) {
        let mut q = q0;
        let mut step = 0.25;
        let mut cur = best.as_ref().map(|b| b.1.value).unwrap_or(f64::NEG_INFINITY);
        for k in 0..cfg.ascent_iters {
            let cut = obj.cut(&q);
            evaluations += 1;
            let g: Vec<f64> = cut.w.iter().map(|w| w - cut.value).collect();
            let mean = g.iter().sum::<f64>() / d as f64;
            let norm = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>().sqrt();
            let stop = uncertified(&cut) && cfg.stop_when_decided;
            if cut.value > cur {
                cur = cut.value;
            } else {
                step *= 0.7;
            }
            record(q.clone(), cut, &mut cuts, &mut best);
            if stop {
                return finish(best.unwrap(), f64::INFINITY, false, evaluations);
            }
            if norm < 1e-14 {
                break;
            }
            let y: Vec<f64> = q.iter().zip(&g).map(|(qi, gi)| qi + step / (1.0 + k as f64).sqrt() * (gi - mean) / norm).collect();
            q = project_simplex(&y);
        }
    }

    // cutting planes
    let mut ub = f64::INFINITY;
    let mut converged = false;
    let mut stalled = 0;
    for _ in 0..cfg.cut_iters {
        let Some((t, q)) = lp_step(&cuts, d) else { break };
        let lb = best.as_ref().unwrap().1.value;
        let scale = lb.abs().max(1.0);
        // the LP itself is only good to ~1e-11; stop once the bound stops moving
        stalled = if t < ub - 1e-13 * scale { 0 } else { stalled + 1 };
        ub = ub.min(t);
        if ub - lb <= cfg.gap_tol * scale {
            converged = true;
            break;
        }
        if stalled >= STALL_ROUNDS {
            converged = ub - lb <= 1e-9 * scale;
            break;
        }
        if ub < -cfg.tol && cfg.stop_when_decided {
            converged = true;
            break;
        }
        let cut = obj.cut(&q);
        evaluations += 1;
        let stop = uncertified(&cut) && cfg.stop_when_decided;
        record(q, cut, &mut cuts, &mut best);
        if stop {
            return finish(best.unwrap(), ub, false, evaluations);
        }
    }
    finish(best.unwrap(), ub, converged, evaluations)
}

/// Generic certification of a small state against a partition family.
pub fn certify(cm: &FullCm, family: &PartitionFamily, cfg: &OptConfig) -> Result<CertVerdict> {
    let set = generate_for_family(cm.n(), family, &cfg.sampling)?;
    certify_with(cm, &set, cfg)
}

pub fn certify_with(cm: &FullCm, set: &SignSet, cfg: &OptConfig) -> Result<CertVerdict> {
    if cm.n() > MODE_CAP {
        return Err(Error::Capacity { what: "modes", got: cm.n() as u64, limit: MODE_CAP as u64 });
    }
    let obj = Objective::new(cm, set)?;
    Ok(maximize(&obj, cfg))
}
