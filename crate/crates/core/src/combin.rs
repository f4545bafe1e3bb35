//! Binomial ratios at very large n, and subset / set-partition enumeration.
//!
//! Ratios of binomial products are evaluated in log space. ln x! - ln y! is
//! formed for nearby arguments directly, so the large common part cancels
//! analytically instead of numerically.

use std::sync::OnceLock;

use itertools::Itertools;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const TABLE_LEN: usize = 256;
const DIRECT_SUM_SPAN: u64 = 64;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn ln_fact_table() -> &'static [f64; TABLE_LEN] {
    static T: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = [0.0; TABLE_LEN];
        for k in 2..TABLE_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

// 1/(12k) - 1/(360k^3) + 1/(1260k^5) - 1/(1680k^7)
fn stirling_tail(k: f64) -> f64 {
    let r = 1.0 / k;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)))
}

/// ln k!
pub fn ln_factorial(k: u64) -> f64 {
    if (k as usize) < TABLE_LEN {
        return ln_fact_table()[k as usize];
    }
    let x = k as f64;
    (x + 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_tail(x)
}

/// ln x! - ln y!, accurate relative to the size of the difference.
pub fn ln_factorial_diff(x: u64, y: u64) -> f64 {
    if x < y {
        return -ln_factorial_diff(y, x);
    }
    let d = x - y;
    if d == 0 {
        return 0.0;
    }
    if d <= DIRECT_SUM_SPAN {
        return ((y + 1)..=x).map(|k| (k as f64).ln()).sum();
    }
    if (y as usize) < TABLE_LEN {
        return ln_factorial(x) - ln_factorial(y);
    }
    // (x+1/2)ln x - (y+1/2)ln y - d = (y+1/2) ln(x/y) + d ln x - d
    let (xf, yf, df) = (x as f64, y as f64, d as f64);
    (yf + 0.5) * (df / yf).ln_1p() + df * xf.ln() - df + (stirling_tail(xf) - stirling_tail(yf))
}

/// ln C(l, j), or `None` when the coefficient is zero (j < 0, j > l or l < 0).
pub fn ln_binomial(l: i64, j: i64) -> Option<f64> {
    if l < 0 || j < 0 || j > l {
        return None;
    }
    let (l, j) = (l as u64, j as u64);
    let (s, b) = if j <= l - j { (j, l - j) } else { (l - j, j) };
    if s <= DIRECT_SUM_SPAN {
        let bf = b as f64;
        return Some((1..=s).map(|i| (bf / i as f64).ln_1p()).sum());
    }
    // Stirling with the -l + s + b terms cancelled; every term has the size of the result
    let (lf, sf, bf) = (l as f64, s as f64, b as f64);
    Some(
        sf * (bf / sf).ln_1p() + bf * (sf / bf).ln_1p() + 0.5 * (lf / (sf * bf)).ln() - LN_SQRT_2PI
            + (stirling_tail(lf) - stirling_tail(sf) - stirling_tail(bf)),
    )
}

/// A nonnegative quantity stored as its natural log; zero is `-inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub ln: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { ln: f64::NEG_INFINITY };

    pub fn is_zero(&self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    pub fn value(&self) -> f64 {
        self.ln.exp()
    }
}

/// prod C(num) / prod C(den) for integer (l, j) pairs.
///
/// Any zero numerator gives [`LogValue::ZERO`]; a zero denominator is an error.
pub fn binom_ratio(num: &[(i64, i64)], den: &[(i64, i64)]) -> Result<LogValue> {
    for &(l, j) in den {
        if ln_binomial(l, j).is_none() {
            return Err(Error::ZeroDenominator(format!("C({l}, {j})")));
        }
    }
    if num.iter().any(|&(l, j)| ln_binomial(l, j).is_none()) {
        return Ok(LogValue::ZERO);
    }
    // factorial arguments with the sign they enter the log
    let mut pos: Vec<u64> = Vec::with_capacity(3 * (num.len() + den.len()));
    let mut neg: Vec<u64> = Vec::with_capacity(pos.capacity());
    for &(l, j) in num {
        let (l, j) = (l as u64, j as u64);
        pos.push(l);
        neg.extend([j, l - j]);
    }
    for &(l, j) in den {
        let (l, j) = (l as u64, j as u64);
        neg.push(l);
        pos.extend([j, l - j]);
    }
    pos.sort_unstable_by(|a, b| b.cmp(a));
    neg.sort_unstable_by(|a, b| b.cmp(a));
    let mut ln = 0.0;
    let k = pos.len().min(neg.len());
    for i in 0..k {
        ln += ln_factorial_diff(pos[i], neg[i]);
    }
    ln += pos[k..].iter().map(|&x| ln_factorial(x)).sum::<f64>();
    ln -= neg[k..].iter().map(|&x| ln_factorial(x)).sum::<f64>();
    Ok(LogValue { ln })
}

/// Stable log of a sum of nonnegative terms (max shift plus compensated sum).
pub fn log_sum(terms: &[LogValue]) -> LogValue {
    let mx = terms.iter().map(|t| t.ln).fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return LogValue::ZERO;
    }
    let (mut s, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let y = (t.ln - mx).exp();
        let u = s + y;
        comp += if s.abs() >= y.abs() { (s - u) + y } else { (y - u) + s };
        s = u;
    }
    LogValue { ln: mx + (s + comp).ln() }
}

pub fn binomial_big(l: i64, j: i64) -> BigUint {
    if l < 0 || j < 0 || j > l {
        return BigUint::zero();
    }
    let j = j.min(l - j) as u64;
    let l = l as u64;
    let mut acc = BigUint::one();
    for i in 0..j {
        acc *= l - i;
        acc /= i + 1;
    }
    acc
}

/// Exact prod C(num) / prod C(den).
pub fn binom_ratio_exact(num: &[(i64, i64)], den: &[(i64, i64)]) -> Result<BigRational> {
    let mut d = BigUint::one();
    for &(l, j) in den {
        let b = binomial_big(l, j);
        if b.is_zero() {
            return Err(Error::ZeroDenominator(format!("C({l}, {j})")));
        }
        d *= b;
    }
    let mut nmr = BigUint::one();
    for &(l, j) in num {
        nmr *= binomial_big(l, j);
    }
    Ok(BigRational::new(nmr.into(), d.into()))
}

/// Default ceiling on enumeration sizes.
pub const ENUM_CAP: u64 = 2_000_000;

/// All k-subsets of {0..n} in lexicographic order.
pub fn subsets(n: usize, k: usize, cap: u64) -> Result<impl Iterator<Item = Vec<usize>>> {
    if k > n {
        return domain(format!("subset size {k} exceeds n = {n}"));
    }
    let count = binomial_big(n as i64, k as i64);
    if count > BigUint::from(cap) {
        return Err(Error::Capacity {
            what: "subsets",
            got: u64::try_from(&count).unwrap_or(u64::MAX),
            limit: cap,
        });
    }
    Ok((0..n).combinations(k))
}

/// A set partition of modes {0..n}; blocks are ordered by their smallest mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn from_labels(labels: &[usize]) -> Self {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); k];
        for (mode, &l) in labels.iter().enumerate() {
            blocks[l].push(mode);
        }
        Partition { blocks }
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Block index of every mode.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &m in block {
                out[m] = b;
            }
        }
        out
    }
}

/// A family of partitions over which a separable state may be mixed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionFamily {
    /// Every split into two nonempty parts.
    AllBipartitions,
    /// Splits n0 | n - n0.
    FixedSizeBipartitions { n0: usize },
    /// Exactly k nonempty blocks.
    KSeparable { k: usize },
    /// Blocks with exactly these sizes (as a multiset).
    Sized { sizes: Vec<usize> },
    /// Every partition whose largest block has at most j modes, excluding the
    /// single-block partition.
    JProducible { j: usize },
}

impl PartitionFamily {
    pub fn partitions(&self, n: usize, cap: u64) -> Result<Vec<Partition>> {
        if n < 2 {
            return domain(format!("n = {n} must be >= 2"));
        }
        let mut spec = Rgs { n, max_blocks: n, min_blocks: 2, max_size: n, sizes: None };
        match self {
            Self::AllBipartitions => spec.max_blocks = 2,
            Self::FixedSizeBipartitions { n0 } => {
                if *n0 == 0 || *n0 >= n {
                    return domain(format!("bipartition size {n0} outside 1..{n}"));
                }
                spec.max_blocks = 2;
                spec.sizes = Some(sorted_desc(vec![*n0, n - n0]));
            }
            Self::KSeparable { k } => {
                if *k < 2 || *k > n {
                    return domain(format!("k = {k} outside 2..={n}"));
                }
                spec.min_blocks = *k;
                spec.max_blocks = *k;
            }
            Self::Sized { sizes } => {
                if sizes.len() < 2 || sizes.contains(&0) || sizes.iter().sum::<usize>() != n {
                    return domain(format!("block sizes {sizes:?} do not split {n} modes"));
                }
                spec.min_blocks = sizes.len();
                spec.max_blocks = sizes.len();
                spec.max_size = *sizes.iter().max().unwrap();
                spec.sizes = Some(sorted_desc(sizes.clone()));
            }
            Self::JProducible { j } => {
                if *j == 0 || *j >= n {
                    return domain(format!("producibility j = {j} outside 1..{n}"));
                }
                spec.max_size = *j;
            }
        }
        spec.run(cap)
    }
}

fn sorted_desc(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

// restricted growth strings with pruning
struct Rgs {
    n: usize,
    min_blocks: usize,
    max_blocks: usize,
    max_size: usize,
    sizes: Option<Vec<usize>>,
}

impl Rgs {
    fn run(&self, cap: u64) -> Result<Vec<Partition>> {
        let mut out = Vec::new();
        let mut labels = vec![0usize; self.n];
        let mut counts = vec![0usize; self.n];
        counts[0] = 1;
        self.rec(1, 1, &mut labels, &mut counts, &mut out, cap)?;
        Ok(out)
    }

    fn rec(
        &self,
        i: usize,
        nblocks: usize,
        labels: &mut [usize],
        counts: &mut [usize],
        out: &mut Vec<Partition>,
        cap: u64,
    ) -> Result<()> {
        if nblocks + (self.n - i) < self.min_blocks {
            return Ok(());
        }
        if i == self.n {
            if nblocks < self.min_blocks {
                return Ok(());
            }
            if let Some(target) = &self.sizes {
                if sorted_desc(counts[..nblocks].to_vec()) != *target {
                    return Ok(());
                }
            }
            if out.len() as u64 >= cap {
                return Err(Error::Capacity { what: "partitions", got: cap + 1, limit: cap });
            }
            out.push(Partition::from_labels(labels));
            return Ok(());
        }
        let upper = if nblocks < self.max_blocks { nblocks + 1 } else { nblocks };
        for l in 0..upper {
            if counts[l] >= self.max_size {
                continue;
            }
            labels[i] = l;
            counts[l] += 1;
            self.rec(i + 1, nblocks.max(l + 1), labels, counts, out, cap)?;
            counts[l] -= 1;
        }
        labels[i] = 0;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn small_factorials_exact() {
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_factorial(10) - 3_628_800f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn stirling_branch_is_continuous() {
        let by_sum: f64 = (1..=300u64).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(300) - by_sum).abs() < 1e-10);
    }

    #[test]
    fn diff_branches_agree() {
        // span just above the direct-sum threshold, large arguments
        let (x, y) = (1_000_000_100u64, 1_000_000_000u64);
        let direct: f64 = ((y + 1)..=x).map(|k| (k as f64).ln()).sum();
        let rel = (ln_factorial_diff(x, y) - direct).abs() / direct;
        assert!(rel < 1e-14, "{rel}");
    }

    #[test]
    fn binomial_edge_cases() {
        assert_eq!(ln_binomial(5, 0), Some(0.0));
        assert_eq!(ln_binomial(5, 6), None);
        assert_eq!(ln_binomial(5, -1), None);
        assert!(binom_ratio(&[(3, 1)], &[(2, 3)]).is_err());
        assert!(binom_ratio(&[(3, 4)], &[(5, 2)]).unwrap().is_zero());
    }

    #[test]
    fn log_ratio_matches_exact() {
        let num = [(40, 13), (17, 5)];
        let den = [(45, 20)];
        let exact = binom_ratio_exact(&num, &den).unwrap().to_f64().unwrap();
        let lr = binom_ratio(&num, &den).unwrap().value();
        assert!((lr / exact - 1.0).abs() < 1e-13);
    }

    #[test]
    fn log_sum_of_zeros() {
        assert!(log_sum(&[LogValue::ZERO, LogValue::ZERO]).is_zero());
        let s = log_sum(&[LogValue { ln: 0.0 }, LogValue { ln: 2f64.ln() }]);
        assert!((s.value() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn partition_counts() {
        let bip = PartitionFamily::AllBipartitions.partitions(5, ENUM_CAP).unwrap();
        assert_eq!(bip.len(), 15);
        let k3 = PartitionFamily::KSeparable { k: 3 }.partitions(5, ENUM_CAP).unwrap();
        assert_eq!(k3.len(), 25); // S(5,3)
        let fixed = PartitionFamily::FixedSizeBipartitions { n0: 2 }.partitions(4, ENUM_CAP).unwrap();
        assert_eq!(fixed.len(), 3);
        let prod = PartitionFamily::JProducible { j: 2 }.partitions(4, ENUM_CAP).unwrap();
        assert_eq!(prod.len(), 10); // 15 minus the four with a 3-block minus the trivial one
        let sized = PartitionFamily::Sized { sizes: vec![1, 1, 2] }.partitions(4, ENUM_CAP).unwrap();
        assert_eq!(sized.len(), 6);
    }

    #[test]
    fn partitions_are_canonical() {
        for p in (PartitionFamily::KSeparable { k: 3 }).partitions(6, ENUM_CAP).unwrap() {
            let firsts: Vec<usize> = p.blocks.iter().map(|b| b[0]).collect();
            assert!(firsts.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(p.blocks[0][0], 0);
        }
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(
            PartitionFamily::AllBipartitions.partitions(12, 10),
            Err(Error::Capacity { .. })
        ));
        assert!(subsets(40, 20, 1000).is_err());
        assert_eq!(subsets(5, 2, 1000).unwrap().count(), 10);
    }
}
