//! Closed-form separability tests for lossy, noisy GHZ states.
//!
//! The witness is labelled by m: the sign vector is +1 on the first m modes and
//! -tau on the rest. Averaging its sign rows over a partition layout gives a
//! single parameter kappa = 1 - 2 xi, where xi is the probability that a fixed
//! tau-mode shares its block with none of the first m modes. Symmetry reduces
//! the 2n x 2n criterion matrix to a 4x4 block whose determinant is a
//! quadratic in X = cosh(2r).

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combin::{binom_ratio, binom_ratio_exact, log_sum};
use crate::error::{domain, Error, Result};
use crate::linalg::eigen4;
use crate::model::{added_noise, noise_from_v, GhzParams, SymmetricCm};

/// Which separability notion is being refuted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeparabilityClass {
    /// Mixtures of K-block product states; K = 2 is biseparability, whose
    /// violation certifies genuine multipartite entanglement.
    KSeparable(usize),
    /// Mixtures over J | (n - J) splits.
    Producible(usize),
}

impl SeparabilityClass {
    pub const BISEPARABLE: Self = Self::KSeparable(2);
}

impl fmt::Display for SeparabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::KSeparable(2) => write!(f, "biseparable"),
            Self::KSeparable(3) => write!(f, "triseparable"),
            Self::KSeparable(4) => write!(f, "quadriseparable"),
            Self::KSeparable(k) => write!(f, "{k}-separable"),
            Self::Producible(j) => write!(f, "{j}-producible"),
        }
    }
}

impl FromStr for SeparabilityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::Domain(format!("bad class parameter {t:?}")))
        };
        match s.as_str() {
            "genuine" | "bisep" | "biseparable" => Ok(Self::KSeparable(2)),
            "trisep" | "triseparable" => Ok(Self::KSeparable(3)),
            "quadsep" | "quadriseparable" => Ok(Self::KSeparable(4)),
            _ => {
                if let Some(k) = s.strip_prefix("ksep:") {
                    Ok(Self::KSeparable(num(k)?))
                } else if let Some(j) = s.strip_prefix("prod:") {
                    Ok(Self::Producible(num(j)?))
                } else {
                    domain(format!(
                        "unknown class {s:?} (genuine, trisep, quadsep, ksep:K, prod:J)"
                    ))
                }
            }
        }
    }
}

/// Shape of the candidate block layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LayoutKind {
    /// K - 2 singletons, the rest split as evenly as possible into two blocks.
    Balanced,
    /// K - 1 singletons and one large block.
    Singletons,
    /// The J | (n - J) split of a producibility test.
    Fixed,
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Balanced => "balanced",
            Self::Singletons => "singletons",
            Self::Fixed => "fixed",
        })
    }
}

/// kappa stored through xi, so 1 - kappa keeps full relative precision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub xi: f64,
}

impl Kappa {
    pub fn from_value(kappa: f64) -> Self {
        Self { xi: 0.5 * (1.0 - kappa) }
    }

    pub fn value(&self) -> f64 {
        1.0 - 2.0 * self.xi
    }

    pub fn one_minus(&self) -> f64 {
        2.0 * self.xi
    }
}

fn check_nm(n: usize, m: usize) -> Result<()> {
    if n < 2 {
        return domain(format!("n = {n} must be >= 2"));
    }
    if m == 0 || m >= n {
        return domain(format!("witness size m = {m} outside 1..{n}"));
    }
    Ok(())
}

fn check_sizes(n: usize, sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) || sizes.iter().sum::<usize>() != n {
        return domain(format!("block sizes {sizes:?} do not split {n} modes into >= 2 blocks"));
    }
    Ok(())
}

/// kappa for n0 | n - n0 splits, two-term closed form.
pub fn kappa_bisep(n: usize, m: usize, n0: usize) -> Result<Kappa> {
    check_nm(n, m)?;
    if n0 == 0 || n0 >= n {
        return domain(format!("bipartition size n0 = {n0} outside 1..{n}"));
    }
    let (n, m, n0) = (n as i64, m as i64, n0 as i64);
    let den = [(n, n0)];
    let t1 = binom_ratio(&[(n - m - 1, n0 - 1)], &den)?;
    let t2 = binom_ratio(&[(n - m - 1, n0 - m)], &den)?;
    Ok(Kappa { xi: log_sum(&[t1, t2]).value() })
}

pub fn xi_bisep_exact(n: usize, m: usize, n0: usize) -> Result<BigRational> {
    check_nm(n, m)?;
    if n0 == 0 || n0 >= n {
        return domain(format!("bipartition size n0 = {n0} outside 1..{n}"));
    }
    let (n, m, n0) = (n as i64, m as i64, n0 as i64);
    let den = [(n, n0)];
    Ok(binom_ratio_exact(&[(n - m - 1, n0 - 1)], &den)? + binom_ratio_exact(&[(n - m - 1, n0 - m)], &den)?)
}

/// kappa for a layout with the given block sizes: xi = sum_i C(n-m-1, n_i-1) / C(n, n_i).
pub fn kappa_layout(n: usize, m: usize, sizes: &[usize]) -> Result<Kappa> {
    check_nm(n, m)?;
    check_sizes(n, sizes)?;
    let (nn, mm) = (n as i64, m as i64);
    let terms = sizes
        .iter()
        .map(|&k| binom_ratio(&[(nn - mm - 1, k as i64 - 1)], &[(nn, k as i64)]))
        .collect::<Result<Vec<_>>>()?;
    Ok(Kappa { xi: log_sum(&terms).value() })
}

pub fn xi_layout_exact(n: usize, m: usize, sizes: &[usize]) -> Result<BigRational> {
    check_nm(n, m)?;
    check_sizes(n, sizes)?;
    let (nn, mm) = (n as i64, m as i64);
    let mut acc = BigRational::zero();
    for &k in sizes {
        acc += binom_ratio_exact(&[(nn - mm - 1, k as i64 - 1)], &[(nn, k as i64)])?;
    }
    Ok(acc)
}

/// xi summed over which blocks host the first m modes (one, two or three
/// blocks), for layouts of at most four blocks. Exact.
pub fn xi_occupancy_exact(n: usize, m: usize, sizes: &[usize]) -> Result<BigRational> {
    check_nm(n, m)?;
    check_sizes(n, sizes)?;
    if sizes.len() > 4 {
        return domain("occupancy route supports at most four blocks");
    }
    let (n, m) = (n as i64, m as i64);
    let s: Vec<i64> = sizes.iter().map(|&k| k as i64).collect();
    let k = s.len();
    let mut acc = BigRational::zero();
    for i in 0..k {
        acc += binom_ratio_exact(&[(n - m - 1, s[i] - m)], &[(n, s[i])])?;
    }
    for i in 0..k {
        for j in 0..k {
            if i >= j {
                continue;
            }
            let (ni, nj) = (s[i], s[j]);
            let den = [(n, ni), (n - ni, nj)];
            for m1 in 1..m {
                acc += binom_ratio_exact(
                    &[(n - m - 1, ni + nj - m), (ni + nj - m, nj - m1), (m, m1)],
                    &den,
                )?;
            }
        }
    }
    for i in 0..k {
        for j in (i + 1)..k {
            for l in (j + 1)..k {
                let (ni, nj, nl) = (s[i], s[j], s[l]);
                let tot = ni + nj + nl;
                let den = [(n, ni), (n - ni, nj), (n - ni - nj, nl)];
                for m2 in 1..m {
                    for m1 in 1..(m - m2) {
                        acc += binom_ratio_exact(
                            &[
                                (n - m - 1, tot - m),
                                (tot - m, nl - m2),
                                (m, m2),
                                (m - m2, m1),
                                (ni + nj + m2 - m, nj - m1),
                            ],
                            &den,
                        )?;
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// Zero-noise threshold score of a witness: (1 - kappa)/(1 + kappa) m (n - m).
///
/// At r -> 0 the test certifies exactly when (1 - eta)/eta < 4 score / n^2,
/// so a larger score means a larger certified region.
pub fn witness_score(n: usize, m: usize, kappa: Kappa) -> f64 {
    kappa.xi / (1.0 - kappa.xi) * (m as f64) * ((n - m) as f64)
}

/// Candidate layouts for a class at n modes, in tie-break order (later wins).
pub fn layout_candidates(n: usize, class: SeparabilityClass) -> Result<Vec<(LayoutKind, Vec<usize>)>> {
    match class {
        SeparabilityClass::KSeparable(k) => {
            if k < 2 {
                return domain(format!("K = {k} must be >= 2"));
            }
            if n < k.max(2) {
                return domain(format!("{k}-separability needs n >= {k}, got {n}"));
            }
            let mut out = Vec::new();
            // balanced: K-2 singletons, remaining split in two
            if n >= k {
                let rest = n - (k - 2);
                if rest >= 2 {
                    let mut sizes = vec![rest - rest / 2, rest / 2];
                    sizes.extend(std::iter::repeat_n(1, k - 2));
                    out.push((LayoutKind::Balanced, sizes));
                }
            }
            let mut sizes = vec![n - (k - 1)];
            sizes.extend(std::iter::repeat_n(1, k - 1));
            out.push((LayoutKind::Singletons, sizes));
            Ok(out)
        }
        SeparabilityClass::Producible(j) => {
            if n < 2 || j >= n || 2 * j < n {
                return domain(format!(
                    "{j}-producibility at n = {n} needs ceil(n/2) <= J <= n - 1"
                ));
            }
            Ok(vec![(LayoutKind::Fixed, vec![j, n - j])])
        }
    }
}

/// A fully specified witness: m, layout, kappa and its score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessChoice {
    pub n: usize,
    pub m: usize,
    pub kind: LayoutKind,
    pub sizes: Vec<usize>,
    pub kappa: Kappa,
    pub score: f64,
}

/// Worst-case (largest kappa) candidate layout for a fixed m.
pub fn witness_for_m(n: usize, m: usize, class: SeparabilityClass) -> Result<WitnessChoice> {
    check_nm(n, m)?;
    let mut best: Option<WitnessChoice> = None;
    for (kind, sizes) in layout_candidates(n, class)? {
        let kappa = kappa_layout(n, m, &sizes)?;
        if best.as_ref().is_none_or(|b| kappa.xi <= b.kappa.xi) {
            best = Some(WitnessChoice {
                n,
                m,
                kind,
                sizes,
                kappa,
                score: witness_score(n, m, kappa),
            });
        }
    }
    Ok(best.expect("at least one candidate"))
}

/// Witness used for a class at n modes.
///
/// Compares the m = 1 witness with the first local maximum of the score over
/// m = 2, 3, ...; ties go to the smaller m.
pub fn optimal_witness(n: usize, class: SeparabilityClass) -> Result<WitnessChoice> {
    layout_candidates(n, class)?;
    let first = witness_for_m(n, 1, class)?;
    if n < 3 {
        return Ok(first);
    }
    let mut prev = witness_for_m(n, 2, class)?;
    for m in 3..n {
        let cur = witness_for_m(n, m, class)?;
        if cur.score <= prev.score {
            break;
        }
        prev = cur;
    }
    Ok(if prev.score > first.score { prev } else { first })
}

/// The symmetric-sector 4x4 block of the criterion matrix.
///
/// Basis: normalized sum of x over the first m modes, over the last n - m,
/// then the same for p.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedBlock {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub kappa: f64,
}

impl ReducedBlock {
    pub fn new(cm: &SymmetricCm, m: usize, kappa: f64) -> Result<Self> {
        check_nm(cm.n, m)?;
        let (n, mf) = (cm.n as f64, m as f64);
        Ok(Self {
            a: cm.a + (mf - 1.0) * cm.c,
            b: cm.b - (mf - 1.0) * cm.c,
            c: (mf * (n - mf)).sqrt() * cm.c,
            kappa,
        })
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        let (a, b, c, k) = (self.a, self.b, self.c, self.kappa);
        Matrix4::new(
            a, c, 1.0, 0.0, //
            c, b, 0.0, k, //
            1.0, 0.0, b, -c, //
            0.0, k, -c, a,
        )
    }

    /// Determinant in closed form.
    pub fn det_y(&self) -> f64 {
        let (a, b, c, k) = (self.a, self.b, self.c, self.kappa);
        let p = a * b - c * c;
        p * p - (1.0 + k * k) * a * b + 2.0 * k * c * c + k * k
    }

    /// Sum of the magnitudes of the determinant's terms.
    pub fn det_scale(&self) -> f64 {
        let (a, b, c, k) = (self.a, self.b, self.c, self.kappa);
        let p = a * b - c * c;
        p * p + (1.0 + k * k) * (a * b).abs() + (2.0 * k * c * c).abs() + k * k
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigen4(&self.matrix()).0[0]
    }
}

/// Validity check of the sign pattern behind the witness.
///
/// With the lowest eigenvector written as (alpha, -beta, delta, omega), the
/// implied tau satisfies (n - m) tau = m beta omega / (alpha delta), which has
/// to lie in [0, 1) for the sign rows to be the assumed ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditionalCondition {
    pub ratio: f64,
    pub holds: bool,
    /// The lowest eigenvalue was (near) degenerate; the eigenspace was scanned.
    pub degenerate: bool,
}

fn ratio_of(m: usize, v: &Vector4<f64>) -> f64 {
    let (al, be, de, om) = (v[0], -v[1], v[2], v[3]);
    m as f64 * be * om / (al * de)
}

pub fn additional_condition(rb: &ReducedBlock, m: usize) -> AdditionalCondition {
    let (vals, vecs) = eigen4(&rb.matrix());
    let scale = vals[3].abs().max(1.0);
    let ok = |r: f64| r.is_finite() && (0.0..1.0).contains(&r);
    if vals[1] - vals[0] > 1e-10 * scale {
        let ratio = ratio_of(m, &vecs[0]);
        return AdditionalCondition { ratio, holds: ok(ratio), degenerate: false };
    }
    // any unit vector of the 2D eigenspace is a valid minimizer
    let mut best = f64::NAN;
    for s in 0..720 {
        let th = std::f64::consts::PI * s as f64 / 720.0;
        let v = vecs[0] * th.cos() + vecs[1] * th.sin();
        let r = ratio_of(m, &v);
        if ok(r) && !(best <= r) {
            best = r;
        }
    }
    AdditionalCondition { ratio: best, holds: ok(best), degenerate: true }
}

/// Coefficients of det = A X^2 + B X + C with X = cosh 2r.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// det at X = 1 in factored form (never negative).
    pub y_at_one: f64,
}

impl QuadCoeffs {
    pub fn new(n: usize, m: usize, kappa: Kappa, eta: f64, noise_n: f64) -> Result<Self> {
        check_nm(n, m)?;
        GhzParams::new(n, 0.0, eta, noise_n)?;
        let n1 = added_noise(eta, noise_n);
        let k = kappa.value();
        let om = kappa.one_minus();
        let w = om * om * (m as f64) * ((n - m) as f64) / ((n as f64) * (n as f64));
        let s = eta * eta + n1 * n1;
        let a = 4.0 * eta * eta * (n1 * n1 - w);
        let b = 4.0 * eta * n1 * s - 2.0 * eta * n1 * (1.0 + k * k);
        let c = (s - 1.0) * (s - k * k) + 4.0 * eta * eta * w;
        // P0 = (eta + N1)^2 and P0 - 1 = 2N(1-eta)(eta + N1 + 1)
        let p0 = (eta + n1) * (eta + n1);
        let y_at_one = 2.0 * noise_n * (1.0 - eta) * (eta + n1 + 1.0) * (p0 - k * k);
        Ok(Self { a, b, c, y_at_one })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    pub fn eval_r(&self, r: f64) -> f64 {
        let d = cosh2_minus_one(r);
        (self.a * d + (2.0 * self.a + self.b)) * d + self.y_at_one
    }

    pub fn scale(&self, x: f64) -> f64 {
        self.a.abs() * x * x + self.b.abs() * x + self.c.abs()
    }

    /// Squeezing interval on which det < 0, if any. The negative set in r is a
    /// single interval because det(r = 0) >= 0.
    pub fn violation(&self) -> Option<RInterval> {
        let (a, bp, c0) = (self.a, 2.0 * self.a + self.b, self.y_at_one);
        let tiny = 1e-300;
        if a.abs() <= 1e-15 * (bp.abs() + c0.abs()) || a == 0.0 {
            if bp >= 0.0 {
                return None;
            }
            return Some(RInterval { lo: r_of_delta(-c0 / bp), hi: f64::INFINITY });
        }
        let disc = bp * bp - 4.0 * a * c0;
        if disc < 0.0 {
            return if a < 0.0 {
                Some(RInterval { lo: 0.0, hi: f64::INFINITY })
            } else {
                None
            };
        }
        let sq = disc.sqrt();
        let q = -0.5 * (bp + bp.signum() * sq);
        let (r1, r2) = if q.abs() < tiny {
            (0.0, 0.0)
        } else {
            let (u, v) = (q / a, c0 / q);
            (u.min(v), u.max(v))
        };
        if a > 0.0 {
            if r2 <= 0.0 || r1 >= r2 {
                return None;
            }
            Some(RInterval { lo: r_of_delta(r1.max(0.0)), hi: r_of_delta(r2) })
        } else {
            Some(RInterval { lo: r_of_delta(r2.max(0.0)), hi: f64::INFINITY })
        }
    }
}

/// cosh(2r) - 1 without cancellation.
pub fn cosh2_minus_one(r: f64) -> f64 {
    2.0 * r.sinh().powi(2)
}

fn r_of_delta(d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    0.5 * (d + (d * (2.0 + d)).sqrt()).ln_1p()
}

/// Open interval (lo, hi) of squeezing values; `hi` may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RInterval {
    pub lo: f64,
    pub hi: f64,
}

impl RInterval {
    pub fn contains(&self, r: f64) -> bool {
        r > self.lo && r < self.hi
    }
}

/// Largest r below which the additional condition holds (it tightens with r).
/// Returns infinity if it holds up to r = `R_SEARCH_MAX`.
///
/// The ratio grows with r, so the cap is the root of ratio - 1; it is
/// bracketed by galloping and refined by Illinois false position with a
/// bisection fallback. Points where the condition fails for another reason
/// count as being past the cap.
pub fn additional_r_cap(cm_at: impl Fn(f64) -> SymmetricCm, m: usize, kappa: f64) -> f64 {
    // negative iff the condition holds
    let g = |r: f64| -> f64 {
        match ReducedBlock::new(&cm_at(r), m, kappa) {
            Ok(rb) => {
                let ac = additional_condition(&rb, m);
                if ac.holds {
                    ac.ratio - 1.0
                } else if ac.ratio.is_finite() && ac.ratio >= 1.0 {
                    ac.ratio - 1.0
                } else {
                    1.0
                }
            }
            Err(_) => 1.0,
        }
    };
    let (mut lo, mut hi) = (0.0, 1e-3);
    let (mut glo, mut ghi) = (-1.0, g(hi));
    while ghi < 0.0 {
        lo = hi;
        glo = ghi;
        hi *= 4.0;
        if hi > R_SEARCH_MAX {
            return if g(R_SEARCH_MAX) < 0.0 { f64::INFINITY } else { refine(&g, lo, glo, R_SEARCH_MAX, 1.0) };
        }
        ghi = g(hi);
    }
    refine(&g, lo, glo, hi, ghi)
}

fn refine(g: &impl Fn(f64) -> f64, mut lo: f64, mut glo: f64, mut hi: f64, mut ghi: f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        let fp = (lo * ghi - hi * glo) / (ghi - glo);
        let mid = if fp.is_finite() && fp > lo && fp < hi && ghi.abs() < 1e3 {
            fp
        } else {
            0.5 * (lo + hi)
        };
        let gm = g(mid);
        if gm < 0.0 {
            lo = mid;
            glo = gm;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            ghi = gm;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
    }
    lo
}

pub const R_SEARCH_MAX: f64 = 40.0;

/// Threshold data of one witness at fixed (eta, N).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub witness: WitnessChoice,
    pub eta: f64,
    pub noise_n: f64,
    pub coeffs: QuadCoeffs,
    /// Squeezing range where the necessary condition of separability fails.
    pub violation: Option<RInterval>,
    /// Upper limit on r from the additional condition.
    pub r_additional_cap: f64,
    /// The lowest eigenvalue of the 4x4 block changes sign at the interval ends.
    pub eigen_consistent: bool,
}

impl ThresholdReport {
    /// Certified squeezing range: violation clipped by the additional condition.
    pub fn certified(&self) -> Option<RInterval> {
        let v = self.violation?;
        let hi = v.hi.min(self.r_additional_cap);
        (hi > v.lo).then_some(RInterval { lo: v.lo, hi })
    }
}

pub fn threshold_for(witness: &WitnessChoice, eta: f64, noise_n: f64) -> Result<ThresholdReport> {
    let n = witness.n;
    let m = witness.m;
    let coeffs = QuadCoeffs::new(n, m, witness.kappa, eta, noise_n)?;
    let violation = coeffs.violation();
    let kv = witness.kappa.value();
    let cm_at = |r: f64| GhzParams::new(n, r, eta, noise_n).expect("validated").cm();
    let r_additional_cap = additional_r_cap(cm_at, m, kv);
    let eigen_consistent = match violation {
        None => true,
        Some(iv) => {
            let lam = |r: f64| ReducedBlock::new(&cm_at(r), m, kv).map(|rb| rb.min_eigenvalue());
            let mut ok = true;
            for (edge, inside_dir) in [(iv.lo, 1.0), (iv.hi, -1.0)] {
                if !edge.is_finite() || edge > R_SEARCH_MAX {
                    continue;
                }
                let h = 1e-6 * edge.max(1e-3);
                let inner = lam(edge + inside_dir * h)?;
                let outer_r = edge - inside_dir * h;
                if outer_r > 0.0 && inner >= 0.0 {
                    ok = false;
                }
                if outer_r > 0.0 && lam(outer_r)? < 0.0 {
                    ok = false;
                }
            }
            ok
        }
    };
    Ok(ThresholdReport {
        witness: witness.clone(),
        eta,
        noise_n,
        coeffs,
        violation,
        r_additional_cap,
        eigen_consistent,
    })
}

pub fn threshold(n: usize, class: SeparabilityClass, eta: f64, noise_n: f64) -> Result<ThresholdReport> {
    threshold_for(&optimal_witness(n, class)?, eta, noise_n)
}

/// J-producibility threshold at fixed (eta, N).
pub fn producibility_threshold(n: usize, j: usize, eta: f64, noise_n: f64) -> Result<ThresholdReport> {
    threshold(n, SeparabilityClass::Producible(j), eta, noise_n)
}

/// Verdict at a single parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointVerdict {
    pub certified: bool,
    pub witness: WitnessChoice,
    /// Determinant of the 4x4 block from the closed form.
    pub y: f64,
    /// Same determinant from the quadratic in cosh(2r).
    pub y_quadratic: f64,
    pub lambda_min: f64,
    pub additional: AdditionalCondition,
    /// det < 0 and lambda_min < 0 agree.
    pub routes_agree: bool,
}

pub fn certify_point(params: &GhzParams, class: SeparabilityClass, m: Option<usize>) -> Result<PointVerdict> {
    let witness = match m {
        Some(m) => witness_for_m(params.n, m, class)?,
        None => optimal_witness(params.n, class)?,
    };
    certify_point_with(params, &witness)
}

pub fn certify_point_with(params: &GhzParams, witness: &WitnessChoice) -> Result<PointVerdict> {
    if witness.n != params.n {
        return Err(Error::Dimension(format!(
            "witness for n = {} used at n = {}",
            witness.n, params.n
        )));
    }
    let rb = ReducedBlock::new(&params.cm(), witness.m, witness.kappa.value())?;
    let y = rb.det_y();
    let coeffs = QuadCoeffs::new(params.n, witness.m, witness.kappa, params.eta, params.noise_n)?;
    let y_quadratic = coeffs.eval_r(params.r);
    let lambda_min = rb.min_eigenvalue();
    let additional = additional_condition(&rb, witness.m);
    Ok(PointVerdict {
        certified: y < 0.0 && additional.holds,
        witness: witness.clone(),
        y,
        y_quadratic,
        lambda_min,
        additional,
        routes_agree: (y < 0.0) == (lambda_min < 0.0),
    })
}

/// One grid point of a region sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub eta: f64,
    pub v: f64,
    /// NaN when the necessary condition is never violated.
    pub r_lo: f64,
    pub r_hi: f64,
    pub r_additional_cap: f64,
}

pub fn region_sweep(witness: &WitnessChoice, etas: &[f64], vs: &[f64]) -> Result<Vec<RegionRow>> {
    let pts: Vec<(f64, f64)> = vs
        .iter()
        .flat_map(|&v| etas.iter().map(move |&e| (e, v)))
        .collect();
    pts.par_iter()
        .map(|&(eta, v)| {
            let t = threshold_for(witness, eta, noise_from_v(v)?)?;
            let (r_lo, r_hi) = t.violation.map_or((f64::NAN, f64::NAN), |iv| (iv.lo, iv.hi));
            Ok(RegionRow { eta, v, r_lo, r_hi, r_additional_cap: t.r_additional_cap })
        })
        .collect()
}

/// Smallest eta in [0, 1] with a nonempty certified squeezing range at noise v.
pub fn eta_boundary(witness: &WitnessChoice, v: f64, tol: f64) -> Result<Option<f64>> {
    let noise = noise_from_v(v)?;
    let nonempty = |eta: f64| -> Result<bool> { Ok(threshold_for(witness, eta, noise)?.certified().is_some()) };
    if !nonempty(1.0)? {
        return Ok(None);
    }
    if nonempty(0.0)? {
        return Ok(Some(0.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if nonempty(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// A maximal range of n sharing the same optimal (m, layout).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub m: usize,
    pub kind: LayoutKind,
    pub n_start: u64,
    pub n_end: u64,
}

/// Optimal-witness ranges for n in [n_lo, n_hi].
///
/// Ranges are located by galloping then bisection on the regime key; every
/// reported boundary is checked on both sides.
pub fn optimal_table(class: SeparabilityClass, n_lo: u64, n_hi: u64) -> Result<Vec<TableRow>> {
    if n_lo > n_hi {
        return domain(format!("empty range {n_lo}..={n_hi}"));
    }
    let key = |n: u64| -> Result<(usize, LayoutKind)> {
        let w = optimal_witness(n as usize, class)?;
        Ok((w.m, w.kind))
    };
    let mut rows = Vec::new();
    let mut start = n_lo;
    while start <= n_hi {
        let k0 = key(start)?;
        let (mut good, mut step) = (start, 1u64);
        let mut bad = None;
        while good < n_hi {
            let probe = (good + step).min(n_hi);
            if key(probe)? == k0 {
                good = probe;
                step *= 2;
            } else {
                bad = Some(probe);
                break;
            }
        }
        if let Some(mut b) = bad {
            while b - good > 1 {
                let mid = good + (b - good) / 2;
                if key(mid)? == k0 {
                    good = mid;
                } else {
                    b = mid;
                }
            }
        }
        rows.push(TableRow { m: k0.0, kind: k0.1, n_start: start, n_end: good });
        start = good + 1;
    }
    for w in rows.windows(2) {
        if (w[0].m, w[0].kind) == (w[1].m, w[1].kind) {
            return Err(Error::Domain(format!(
                "non-contiguous regime m = {} near n = {}",
                w[0].m, w[0].n_end
            )));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::pure_ghz_cm;
    use num_traits::ToPrimitive;

    #[test]
    fn kappa_small_values() {
        // n = 3, m = 1: two of the three singleton splits leave the tau-mode without mode 1
        assert!((kappa_bisep(3, 1, 1).unwrap().value() + 1.0 / 3.0).abs() < 1e-15);
        assert!(kappa_bisep(4, 1, 1).unwrap().value().abs() < 1e-15);
        assert!((kappa_bisep(4, 1, 2).unwrap().value() + 1.0 / 3.0).abs() < 1e-15);
        assert!((kappa_bisep(2, 1, 1).unwrap().value() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn kappa_domain() {
        assert!(kappa_bisep(5, 0, 2).is_err());
        assert!(kappa_bisep(5, 5, 2).is_err());
        assert!(kappa_bisep(5, 2, 0).is_err());
        assert!(kappa_bisep(5, 2, 5).is_err());
        assert!(kappa_layout(5, 2, &[3, 1]).is_err());
    }

    #[test]
    fn bisep_is_a_two_block_layout() {
        for n in 2..30 {
            for m in 1..n {
                for n0 in 1..n {
                    let a = kappa_bisep(n, m, n0).unwrap().xi;
                    let b = kappa_layout(n, m, &[n0, n - n0]).unwrap().xi;
                    assert!((a - b).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn occupancy_equals_direct() {
        for n in 4..14 {
            for m in 1..n {
                for sizes in [vec![n - 2, 1, 1], vec![n - 3, 2, 1], vec![n / 2, n - n / 2]] {
                    if sizes.contains(&0) {
                        continue;
                    }
                    assert_eq!(
                        xi_occupancy_exact(n, m, &sizes).unwrap(),
                        xi_layout_exact(n, m, &sizes).unwrap(),
                        "n={n} m={m} {sizes:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn quadratic_matches_closed_form_det() {
        for &(n, m, r, eta, nn) in &[(10, 3, 0.4, 0.8, 0.2), (100, 6, 1.3, 0.99, 0.0), (7, 1, 0.05, 0.3, 1.5)] {
            let kappa = kappa_bisep(n, m, 1).unwrap();
            let p = GhzParams::new(n, r, eta, nn).unwrap();
            let rb = ReducedBlock::new(&p.cm(), m, kappa.value()).unwrap();
            let q = QuadCoeffs::new(n, m, kappa, eta, nn).unwrap();
            let x = (2.0 * r).cosh();
            assert!((rb.det_y() - q.eval(x)).abs() <= 1e-10 * q.scale(x));
            assert!((rb.det_y() - rb.matrix().determinant()).abs() <= 1e-10 * rb.det_scale());
            assert!((q.eval_r(r) - q.eval(x)).abs() <= 1e-10 * q.scale(x));
        }
    }

    #[test]
    fn pure_state_threshold_starts_at_zero() {
        for n in [3usize, 8, 50] {
            let w = optimal_witness(n, SeparabilityClass::BISEPARABLE).unwrap();
            let q = QuadCoeffs::new(n, w.m, w.kappa, 1.0, 0.0).unwrap();
            let iv = q.violation().unwrap();
            assert!(iv.lo.abs() < 1e-9 && iv.hi.is_infinite());
        }
    }

    #[test]
    fn reduced_block_of_vacuum() {
        let rb = ReducedBlock::new(&pure_ghz_cm(5, 0.0).unwrap(), 2, 0.5).unwrap();
        assert_eq!((rb.a, rb.b, rb.c), (1.0, 1.0, 0.0));
        assert!(rb.min_eigenvalue().abs() < 1e-15);
    }

    #[test]
    fn layouts_for_small_n() {
        let c = layout_candidates(3, SeparabilityClass::BISEPARABLE).unwrap();
        assert_eq!(c[0].1, vec![2, 1]);
        assert_eq!(c[1].1, vec![2, 1]);
        let c = layout_candidates(10, SeparabilityClass::KSeparable(4)).unwrap();
        assert_eq!(c[0].1, vec![4, 4, 1, 1]);
        assert_eq!(c[1].1, vec![7, 1, 1, 1]);
        assert!(layout_candidates(10, SeparabilityClass::Producible(4)).is_err());
        assert!(layout_candidates(3, SeparabilityClass::KSeparable(4)).is_err());
    }

    #[test]
    fn exact_bisep_matches_float() {
        let x = xi_bisep_exact(40, 5, 12).unwrap().to_f64().unwrap();
        let y = kappa_bisep(40, 5, 12).unwrap().xi;
        assert!((x - y).abs() < 1e-15);
    }

    #[test]
    fn class_parsing() {
        assert_eq!("genuine".parse::<SeparabilityClass>().unwrap(), SeparabilityClass::KSeparable(2));
        assert_eq!("prod:19".parse::<SeparabilityClass>().unwrap(), SeparabilityClass::Producible(19));
        assert!("prod:x".parse::<SeparabilityClass>().is_err());
    }
}
