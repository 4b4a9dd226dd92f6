//! Set-partition enumeration via restricted growth strings, surjection
//! counts, and integer compositions.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Maximal `k` for partition enumeration (Bell(12) ~ 4.2M).
pub const MAX_PARTITION_K: usize = 12;

/// Visit every partition of `{0,...,k-1}` into non-empty unordered blocks.
/// The callback receives the restricted growth string: `rgs[i]` is the block
/// index of element `i`, and block indices appear in first-use order.
pub fn for_each_partition<F: FnMut(&[usize], usize)>(k: usize, mut f: F) -> Result<()> {
    if k == 0 || k > MAX_PARTITION_K {
        return Err(Error::EnumerationCap(format!(
            "set partitions need 1 <= k <= {MAX_PARTITION_K}, got {k}"
        )));
    }
    let mut rgs = vec![0usize; k];
    // max[i] = 1 + max(rgs[0..i])
    let mut max = vec![1usize; k];
    loop {
        let blocks = max[k - 1].max(rgs[k - 1] + 1);
        f(&rgs, blocks);
        // next restricted growth string
        let mut i = k - 1;
        loop {
            if i == 0 {
                return Ok(());
            }
            if rgs[i] < max[i] {
                rgs[i] += 1;
                break;
            }
            rgs[i] = 0;
            i -= 1;
        }
        for j in i + 1..k {
            max[j] = max[j - 1].max(rgs[j - 1] + 1);
            rgs[j] = 0;
        }
    }
}

/// Number of surjections from an `a`-set onto a `b`-set:
/// `S(a,b) = sum_{j=0}^{b} (-1)^{b-j} C(b,j) j^a`.
pub fn surjections(a: u64, b: u64) -> BigInt {
    if b == 0 {
        return if a == 0 {
            BigInt::one()
        } else {
            BigInt::zero()
        };
    }
    let mut total = BigInt::zero();
    for j in 0..=b {
        let term = binomial_big(b, j) * BigInt::from(j).pow(a as u32);
        if (b - j).is_multiple_of(2) {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Exact binomial coefficient.
pub fn binomial_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        num /= BigInt::from(i + 1);
    }
    num
}

/// `C(n, k)` as f64 via log-gamma for large inputs, exact below 30.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 30 {
        let mut v = 1.0;
        let k = k.min(n - k);
        for i in 0..k {
            v = v * (n - i) as f64 / (i + 1) as f64;
        }
        return v;
    }
    (ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)).exp()
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Number of compositions of `r` into `k` positive parts: `C(r-1, k-1)`.
pub fn count_compositions(r: u64, k: u64) -> BigInt {
    if k == 0 || k > r {
        return BigInt::zero();
    }
    binomial_big(r - 1, k - 1)
}

/// Visit all compositions of `r` into `k` positive parts, via their cut
/// points `0 < c_1 < ... < c_{k-1} < r`.
pub fn for_each_composition<F: FnMut(&[u64])>(r: u64, k: u64, mut f: F) {
    if k == 0 || k > r {
        return;
    }
    if k == 1 {
        f(&[r]);
        return;
    }
    let m = (k - 1) as usize;
    let mut cuts: Vec<u64> = (1..=m as u64).collect();
    let mut parts = vec![0u64; k as usize];
    loop {
        parts[0] = cuts[0];
        for i in 1..m {
            parts[i] = cuts[i] - cuts[i - 1];
        }
        parts[m] = r - cuts[m - 1];
        f(&parts);
        // next combination of {1..r-1} choose m, lexicographic
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if cuts[i] < r - 1 - (m - 1 - i) as u64 {
                cuts[i] += 1;
                for j in i + 1..m {
                    cuts[j] = cuts[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        // Bell(k) for k = 1..6: 1, 2, 5, 15, 52, 203
        let bell = [1usize, 2, 5, 15, 52, 203];
        for (k, &want) in bell.iter().enumerate() {
            let mut count = 0;
            for_each_partition(k + 1, |_, _| count += 1).unwrap();
            assert_eq!(count, want);
        }
        assert!(for_each_partition(13, |_, _| {}).is_err());
    }

    #[test]
    fn partition_blocks_are_valid() {
        for_each_partition(5, |rgs, blocks| {
            let mut seen = vec![false; blocks];
            for &b in rgs {
                assert!(b < blocks);
                seen[b] = true;
            }
            assert!(seen.iter().all(|&s| s));
        })
        .unwrap();
    }

    #[test]
    fn surjection_counts() {
        assert_eq!(surjections(3, 2), BigInt::from(6));
        assert_eq!(surjections(4, 2), BigInt::from(14));
        assert_eq!(surjections(4, 4), BigInt::from(24));
        assert_eq!(surjections(2, 3), BigInt::zero());
    }

    #[test]
    fn composition_counts_match_enumeration() {
        assert_eq!(count_compositions(5, 3), BigInt::from(6));
        assert_eq!(count_compositions(7, 1), BigInt::from(1));
        assert_eq!(count_compositions(7, 7), BigInt::from(1));
        for r in 1..=8u64 {
            for k in 1..=r {
                let mut cnt = 0u64;
                for_each_composition(r, k, |parts| {
                    assert_eq!(parts.iter().sum::<u64>(), r);
                    assert!(parts.iter().all(|&p| p >= 1));
                    cnt += 1;
                });
                assert_eq!(BigInt::from(cnt), count_compositions(r, k), "r={r} k={k}");
            }
        }
    }

    #[test]
    fn binomials_agree() {
        for n in 0..40u64 {
            for k in 0..=n {
                let exact = binomial_big(n, k);
                let approx = binomial_f64(n, k);
                let exact_f: f64 = exact.to_string().parse().unwrap();
                assert!((approx - exact_f).abs() <= 1e-9 * exact_f.max(1.0));
            }
        }
    }
}
