//! Big-rational tier: exact hypergeometric and binomial probabilities.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::hyper::HyperSpec;

pub fn choose(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn hyper_pmf(spec: &HyperSpec) -> BigRational {
    let l = spec.threshold;
    if l < spec.support_min() || l > spec.support_max() {
        return BigRational::zero();
    }
    let num = choose(spec.successes, l) * choose(spec.population - spec.successes, spec.draws - l);
    let den = choose(spec.population, spec.draws);
    BigRational::new(num.into(), den.into())
}

pub fn hyper_tail(spec: &HyperSpec) -> BigRational {
    let lo = spec.threshold.max(spec.support_min());
    (lo..=spec.support_max()).fold(BigRational::zero(), |acc, j| acc + hyper_pmf(&spec.with_threshold(j)))
}

/// Is `Pr[X ≤ at_most] ≤ num/den` for `X ~ Binomial(n, s_num/s_den)`?
///
/// Integers only: compares `den · Σ_{i ≤ at_most} C(n,i) s^i f^{n−i}` with
/// `num · s_den^n`, where `s = s_num` and `f = s_den − s_num`.
pub fn binomial_lower_tail_at_most(n: u64, at_most: u64, s_num: u64, s_den: u64, num: u64, den: u64) -> bool {
    assert!(s_num <= s_den && s_den > 0);
    let at_most = at_most.min(n);
    let f = BigUint::from(s_den - s_num);
    let s = BigUint::from(s_num);
    // Horner: P_j = Σ_{i ≤ j} C(n,i) s^i f^{j−i}.
    let mut acc = BigUint::zero();
    let mut c = BigUint::one();
    let mut s_pow = BigUint::one();
    for i in 0..=at_most {
        if i > 0 {
            c = c * BigUint::from(n - i + 1) / BigUint::from(i);
            s_pow *= &s;
        }
        acc = acc * &f + &c * &s_pow;
    }
    let lhs = acc * f.pow((n - at_most) as u32) * BigUint::from(den);
    let rhs = BigUint::from(s_den).pow(n as u32) * BigUint::from(num);
    lhs <= rhs
}
