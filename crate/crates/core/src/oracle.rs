//! Hidden total order plus a comparison oracle whose answers are independently
//! wrong with probability `p`.

use rand::seq::SliceRandom;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::CounterRng;

const DUMMY_BIT: u32 = 1 << 31;

/// Opaque element handle. Real elements are `0..n`; dummies carry a tag bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Element(u32);

impl Element {
    pub fn real(id: u32) -> Self {
        assert!(id & DUMMY_BIT == 0, "element id {id} collides with the dummy tag");
        Element(id)
    }

    /// Synthetic element ordered below every real element.
    pub fn dummy(index: u32) -> Self {
        Element(index | DUMMY_BIT)
    }

    pub fn is_dummy(self) -> bool {
        self.0 & DUMMY_BIT != 0
    }

    pub fn index(self) -> u32 {
        self.0 & !DUMMY_BIT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankClass {
    Small,
    Relevant,
    Large,
}

/// Classification of rank `rank` for target `k` with window `n·eps`:
/// small `(0, k−nε]`, relevant `(k−nε, k+nε]`, large `(k+nε, n]`.
pub fn classify(rank: u64, n: u64, k: u64, eps: f64) -> RankClass {
    let half_width = n as f64 * eps;
    let r = rank as f64;
    let k = k as f64;
    if r <= k - half_width {
        RankClass::Small
    } else if r <= k + half_width {
        RankClass::Relevant
    } else {
        RankClass::Large
    }
}

/// A problem instance: `n` elements in a seeded random order, target rank `k`,
/// tolerance `eps`.
///
/// Instances with `k > n/2` are mirrored: the algorithms see working rank
/// `n + 1 − r` and target `n − k`, while success is always judged on the
/// original ranks. Odd `n` gets one extra element that is largest in the
/// working order and is never relevant.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    n: u64,
    k: u64,
    eps: f64,
    mirrored: bool,
    padded: bool,
    /// Original rank (1-based) by element id; the pad element stores `n + 1`.
    rank_of: Vec<u32>,
    /// Rank the oracle compares by.
    working_rank: Vec<u32>,
}

impl GroundTruth {
    pub fn new(n: u64, k: u64, eps: f64, seed: u64) -> Result<Self> {
        validate_instance(n, k, eps)?;
        let padded = n % 2 == 1;
        let total = n + u64::from(padded);
        let mirrored = 2 * k > n;

        let mut ranks: Vec<u32> = (1..=n as u32).collect();
        let mut rng = CounterRng::from_stream(seed, 0);
        ranks.shuffle(&mut rng);
        if padded {
            ranks.push(n as u32 + 1);
        }
        let working_rank = ranks
            .iter()
            .map(|&r| {
                if mirrored && u64::from(r) <= n {
                    n as u32 + 1 - r
                } else {
                    r
                }
            })
            .collect();
        debug_assert_eq!(ranks.len() as u64, total);
        Ok(GroundTruth { n, k, eps, mirrored, padded, rank_of: ranks, working_rank })
    }

    /// Original element count (without padding).
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    pub fn is_padded(&self) -> bool {
        self.padded
    }

    /// Number of elements the algorithms operate on (even).
    pub fn working_n(&self) -> u64 {
        self.rank_of.len() as u64
    }

    /// Target rank in the working order (`≤ working_n / 2`).
    pub fn working_k(&self) -> u64 {
        if self.mirrored {
            self.n - self.k
        } else {
            self.k
        }
    }

    /// All real elements, padding included.
    pub fn population(&self) -> Vec<Element> {
        (0..self.rank_of.len() as u32).map(Element::real).collect()
    }

    /// Original rank of a real element; `None` for dummies.
    pub fn rank(&self, e: Element) -> Option<u64> {
        if e.is_dummy() {
            None
        } else {
            Some(u64::from(self.rank_of[e.index() as usize]))
        }
    }

    pub fn working_rank(&self, e: Element) -> Option<u64> {
        if e.is_dummy() {
            None
        } else {
            Some(u64::from(self.working_rank[e.index() as usize]))
        }
    }

    pub fn class_of_rank(&self, rank: u64) -> RankClass {
        if rank > self.n {
            return RankClass::Large;
        }
        classify(rank, self.n, self.k, self.eps)
    }

    /// Class of an element in the original frame. Dummies count as small.
    pub fn class_of(&self, e: Element) -> RankClass {
        match self.rank(e) {
            None => RankClass::Small,
            Some(r) => self.class_of_rank(r),
        }
    }

    pub fn is_relevant(&self, e: Element) -> bool {
        self.class_of(e) == RankClass::Relevant
    }

    /// True order in the working frame: does `x` precede `y`?
    ///
    /// Dummies precede every real element and are ordered among themselves by
    /// index. Two copies of the same element compare with the first argument
    /// as the smaller copy.
    pub fn precedes(&self, x: Element, y: Element) -> bool {
        match (x.is_dummy(), y.is_dummy()) {
            (true, true) => x.index() <= y.index(),
            (true, false) => true,
            (false, true) => false,
            (false, false) => {
                x == y || self.working_rank[x.index() as usize] < self.working_rank[y.index() as usize]
            }
        }
    }
}

pub(crate) fn validate_instance(n: u64, k: u64, eps: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyPopulation);
    }
    if k == 0 || k > n {
        return Err(Error::RankOutOfRange { k, n });
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    if n >= u64::from(DUMMY_BIT) {
        return Err(Error::RankOutOfRange { k, n });
    }
    Ok(())
}

/// Anything the selection algorithms can query.
///
/// `compare` is a single noisy comparison. `compare_repeated` asks the same
/// question `times` times and reports how many answers said "x precedes y";
/// implementations must charge `times` calls and keep answers independent.
pub trait Comparator {
    fn error_rate(&self) -> f64;

    /// `c_p` for this error rate; implementors may cache it.
    fn vote_constant(&self) -> u32 {
        crate::primitives::vote_constant(&self.error_rate())
    }

    fn compare(&mut self, x: Element, y: Element) -> bool;

    fn compare_repeated(&mut self, x: Element, y: Element, times: u32) -> u32 {
        (0..times).filter(|_| self.compare(x, y)).count() as u32
    }

    /// Majority of `times` answers: does "x precedes y" win more than
    /// `losing_max` of them?
    fn majority(&mut self, x: Element, y: Element, times: u32, losing_max: u32) -> bool {
        self.compare_repeated(x, y, times) > losing_max
    }

    fn calls(&self) -> u64;

    /// Randomness for the algorithms themselves (sampling, tie breaking).
    fn rng(&mut self) -> &mut CounterRng;
}

/// Cumulative distribution of the number of wrong answers among `times`
/// independent comparisons.
#[derive(Debug, Clone)]
struct WrongAnswerTable {
    times: u32,
    cdf: Vec<f64>,
}

impl WrongAnswerTable {
    fn new(times: u32, p: f64) -> Self {
        let ln_p = p.ln();
        let ln_q = (1.0 - p).ln();
        let mut ln_choose = 0.0f64;
        let mut cdf = Vec::with_capacity(times as usize + 1);
        let mut acc = 0.0f64;
        for w in 0..=times {
            if w > 0 {
                ln_choose += f64::from(times - w + 1).ln() - f64::from(w).ln();
            }
            acc += (ln_choose + f64::from(w) * ln_p + f64::from(times - w) * ln_q).exp();
            cdf.push(acc);
        }
        // Guard the top so a uniform draw can never fall past the last bucket.
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        WrongAnswerTable { times, cdf }
    }

    fn sample(&self, u: f64) -> u32 {
        self.cdf.partition_point(|&c| c <= u) as u32
    }
}

/// The simulated fault model.
///
/// Every comparison between two real elements is charged one call and is
/// answered wrongly with probability `p`, independently of everything else.
/// Comparisons that involve a dummy are answered correctly and cost nothing
/// unless `charge_dummies` is set.
#[derive(Debug, Clone)]
pub struct NoisyOracle<'a> {
    truth: &'a GroundTruth,
    p: f64,
    c_p: u32,
    flip_threshold: u64,
    noise: CounterRng,
    coins: CounterRng,
    calls: u64,
    charge_dummies: bool,
    tables: Vec<WrongAnswerTable>,
    /// `(times, losing_max, ⌊Pr[majority wrong]·2^64⌋)`.
    vote_thresholds: Vec<(u32, u32, u64)>,
}

impl<'a> NoisyOracle<'a> {
    /// Noise and algorithm randomness come from streams 1 and 2 of `seed`
    /// (stream 0 shuffles the universe).
    pub fn new(truth: &'a GroundTruth, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::ErrorRateOutOfRange(p));
        }
        Ok(NoisyOracle {
            truth,
            p,
            c_p: crate::primitives::vote_constant(&p),
            flip_threshold: (p * 2f64.powi(64)) as u64,
            noise: CounterRng::from_stream(seed, 1),
            coins: CounterRng::from_stream(seed, 2),
            calls: 0,
            charge_dummies: false,
            tables: Vec::new(),
            vote_thresholds: Vec::new(),
        })
    }

    /// Charge dummy comparisons as if they were physical ones.
    pub fn with_dummy_charging(mut self, charge: bool) -> Self {
        self.charge_dummies = charge;
        self
    }

    pub fn truth(&self) -> &'a GroundTruth {
        self.truth
    }

    fn table(&mut self, times: u32) -> &WrongAnswerTable {
        let pos = match self.tables.iter().position(|t| t.times == times) {
            Some(pos) => pos,
            None => {
                self.tables.push(WrongAnswerTable::new(times, self.p));
                self.tables.len() - 1
            }
        };
        &self.tables[pos]
    }

    fn vote_threshold(&mut self, times: u32, losing_max: u32) -> u64 {
        if let Some(&(_, _, t)) = self.vote_thresholds.iter().find(|v| v.0 == times && v.1 == losing_max) {
            return t;
        }
        // Wrong iff at most `losing_max` of the answers are correct.
        let fail = crate::bounds::special::ln_binomial_range(u64::from(times), 0, u64::from(losing_max), 1.0 - self.p).exp();
        let threshold = (fail * 2f64.powi(64)) as u64;
        self.vote_thresholds.push((times, losing_max, threshold));
        threshold
    }
}

impl Comparator for NoisyOracle<'_> {
    fn error_rate(&self) -> f64 {
        self.p
    }

    fn vote_constant(&self) -> u32 {
        self.c_p
    }

    fn compare(&mut self, x: Element, y: Element) -> bool {
        let truth = self.truth.precedes(x, y);
        if x.is_dummy() || y.is_dummy() {
            if self.charge_dummies {
                self.calls += 1;
            }
            return truth;
        }
        self.calls += 1;
        let flipped = self.noise.next_u64() < self.flip_threshold;
        truth != flipped
    }

    /// Draws the number of wrong answers from its exact binomial law in one
    /// step; distributionally identical to `times` calls of `compare`.
    fn compare_repeated(&mut self, x: Element, y: Element, times: u32) -> u32 {
        let truth = self.truth.precedes(x, y);
        if x.is_dummy() || y.is_dummy() {
            if self.charge_dummies {
                self.calls += u64::from(times);
            }
            return if truth { times } else { 0 };
        }
        self.calls += u64::from(times);
        let wrong = if self.p == 0.0 || times == 0 {
            0
        } else {
            let u = self.noise.unit_f64();
            self.table(times).sample(u)
        };
        if truth {
            times - wrong
        } else {
            wrong
        }
    }

    /// One draw against the exact failure probability of the vote, charged
    /// `times` calls; distributionally identical to counting `times` answers.
    fn majority(&mut self, x: Element, y: Element, times: u32, losing_max: u32) -> bool {
        let truth = self.truth.precedes(x, y);
        if x.is_dummy() || y.is_dummy() {
            if self.charge_dummies {
                self.calls += u64::from(times);
            }
            return truth;
        }
        self.calls += u64::from(times);
        if self.p == 0.0 {
            return truth;
        }
        let threshold = self.vote_threshold(times, losing_max);
        truth != (self.noise.next_u64() < threshold)
    }

    fn calls(&self) -> u64 {
        self.calls
    }

    fn rng(&mut self) -> &mut CounterRng {
        &mut self.coins
    }
}
