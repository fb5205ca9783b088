//! Log-space binomial machinery.

/// `ln C(n, k)` via log-gamma; `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// `ln n!` for every `n` up to a fixed maximum, for tight sweep loops.
#[derive(Debug, Clone)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn new(max: u64) -> Self {
        let table = (0..=max).map(|i| libm::lgamma(i as f64 + 1.0)).collect();
        LnFactorial { table }
    }

    pub fn max(&self) -> u64 {
        self.table.len() as u64 - 1
    }

    pub fn ln_choose(&self, n: u64, k: u64) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n as usize] - self.table[k as usize] - self.table[(n - k) as usize]
    }
}

/// `ln Σ exp(terms)`, robust to `-inf` entries and empty input.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `x · ln y` with the convention `0 · ln 0 = 0`.
fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `ln Pr[lo ≤ X ≤ hi]` for `X ~ Binomial(n, s)`.
pub fn ln_binomial_range(n: u64, lo: u64, hi: u64, s: f64) -> f64 {
    let hi = hi.min(n);
    if lo > hi {
        return f64::NEG_INFINITY;
    }
    let terms: Vec<f64> = (lo..=hi)
        .map(|i| ln_choose(n, i) + xlny(i as f64, s) + xlny((n - i) as f64, 1.0 - s))
        .collect();
    log_sum_exp(&terms)
}
