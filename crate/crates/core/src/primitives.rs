//! Constant-size noisy building blocks: boosted comparison, min of two,
//! symmetric median of three, boosted exact selection and the
//! "neither min nor max of four" experiment.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::bounds::special::ln_binomial_range;
use crate::error::{Error, Result};
use crate::oracle::{Comparator, Element};
use crate::scalar::{ceil_rational, powu, Scalar};

/// Vote level used by [`min_of_two`].
pub const MIN_OF_TWO_LEVEL: u32 = 3;
/// Vote level used by [`median_of_three`].
pub const MEDIAN_OF_THREE_LEVEL: u32 = 4;
/// `⌈ln 108⌉`: each tournament comparison fails with probability ≤ 1/108.
pub const FOUR_WAY_LEVEL: u32 = 5;

/// `c_p = ⌈4(1−p)/(1−2p)²⌉`, evaluated exactly on the rational value of `p`.
pub fn vote_constant<T: Scalar>(p: &T) -> u32 {
    let p = p.to_rational();
    let one = BigRational::one();
    let two = &one + &one;
    let four = &two + &two;
    let gap = &one - &two * &p;
    assert!(gap > BigRational::zero(), "error rate must be below 1/2");
    let c = four * (&one - &p) / (&gap * &gap);
    ceil_rational(&c) as u32
}

/// Boost level `t = ⌈ln(1/δ)⌉` that drives a majority vote below `δ`.
pub fn level_for(delta: f64) -> u32 {
    assert!(delta > 0.0 && delta < 1.0, "vote failure target {delta} outside (0,1)");
    (1.0 / delta).ln().ceil().max(1.0) as u32
}

/// Parameters of a boosted comparison: `2·c_p·t + 1` raw comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteParams {
    pub p: f64,
    pub c_p: u32,
    pub t: u32,
}

impl VoteParams {
    pub fn new(p: f64, t: u32) -> Self {
        assert!(t >= 1, "vote level must be positive");
        VoteParams { p, c_p: vote_constant(&p), t }
    }

    /// Parameters for `oracle` at level `t`, reusing its cached `c_p`.
    pub fn for_oracle<O: Comparator + ?Sized>(oracle: &O, t: u32) -> Self {
        assert!(t >= 1, "vote level must be positive");
        VoteParams { p: oracle.error_rate(), c_p: oracle.vote_constant(), t }
    }

    pub fn votes(&self) -> u32 {
        2 * self.c_p * self.t + 1
    }

    /// Largest number of correct answers that still loses the vote.
    pub fn losing_max(&self) -> u32 {
        self.c_p * self.t
    }

    /// The guaranteed `e^{-t}`.
    pub fn failure_bound(&self) -> f64 {
        (-f64::from(self.t)).exp()
    }
}

/// Exact probability that the majority of `2c_p·t+1` comparisons is wrong:
/// `Σ_{i=0}^{c_p t} C(2c_p t+1, i)(1−p)^i p^{2c_p t+1−i}`, in log space.
pub fn vote_failure_exact(params: &VoteParams) -> f64 {
    if params.p == 0.0 {
        return 0.0;
    }
    ln_binomial_range(u64::from(params.votes()), 0, u64::from(params.losing_max()), 1.0 - params.p).exp()
}

/// The same tail by direct summation in any scalar type. With rationals this
/// is exact and serves as an independent check of [`vote_failure_exact`].
pub fn vote_failure<T: Scalar>(p: &T, t: u32) -> T {
    let c = vote_constant(p);
    let votes = 2 * c * t + 1;
    let q = T::one() - p.clone();
    let mut choose = T::one();
    let mut total = T::zero();
    for i in 0..=(c * t) {
        if i > 0 {
            choose = choose * T::from_u64(u64::from(votes - i + 1)) / T::from_u64(u64::from(i));
        }
        total = total + choose.clone() * powu(&q, i) * powu(p, votes - i);
    }
    total
}

/// Failure probability `q` of [`min_of_two`] (the `t = 3` vote).
pub fn q_of(p: f64) -> f64 {
    vote_failure_exact(&VoteParams::new(p, MIN_OF_TWO_LEVEL))
}

/// Majority of `2c_p·t+1` comparisons of `x` against `y`: does `x` precede `y`?
pub fn majority_compare<O: Comparator>(oracle: &mut O, x: Element, y: Element, t: u32) -> bool {
    let params = VoteParams::for_oracle(oracle, t);
    vote(oracle, x, y, &params)
}

pub(crate) fn vote<O: Comparator>(oracle: &mut O, x: Element, y: Element, params: &VoteParams) -> bool {
    oracle.majority(x, y, params.votes(), params.losing_max())
}

/// Boosted comparison between two slots of a multiset. Copies of one element
/// are ordered by slot so that every tie is broken consistently.
fn slot_precedes<O: Comparator>(
    oracle: &mut O,
    (slot_a, a): (usize, Element),
    (slot_b, b): (usize, Element),
    params: &VoteParams,
) -> bool {
    if a == b && slot_a > slot_b {
        !vote(oracle, b, a, params)
    } else {
        vote(oracle, a, b, params)
    }
}

/// Boosted minimum of two elements (`6c_p + 1` comparisons).
pub fn min_of_two<O: Comparator>(oracle: &mut O, x: Element, y: Element) -> Element {
    let params = VoteParams::for_oracle(oracle, MIN_OF_TWO_LEVEL);
    if vote(oracle, x, y, &params) {
        x
    } else {
        y
    }
}

/// Symmetric median of three: three `t = 4` votes, one point to each vote's
/// winner, return the element holding exactly one point (uniformly random
/// among all three when every element holds one).
pub fn median_of_three<O: Comparator>(oracle: &mut O, x: Element, y: Element, z: Element) -> Element {
    let params = VoteParams::for_oracle(oracle, MEDIAN_OF_THREE_LEVEL);
    let items = [x, y, z];
    let mut points = [0u8; 3];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if slot_precedes(oracle, (i, items[i]), (j, items[j]), &params) {
            points[i] += 1;
        } else {
            points[j] += 1;
        }
    }
    if points == [1, 1, 1] {
        return items[oracle.rng().below(3) as usize];
    }
    let winner = points.iter().position(|&pt| pt == 1).expect("a transitive outcome has a unique one-point element");
    items[winner]
}

/// Output law of [`median_of_three`] when each vote is wrong with probability `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianOfThreeLaw<T> {
    pub min: T,
    pub median: T,
    pub max: T,
}

/// Enumerates the eight vote patterns over sorted inputs (min, median, max).
pub fn median_of_three_law<T: Scalar>(g: &T) -> MedianOfThreeLaw<T> {
    let right = T::one() - g.clone();
    let third = T::from_ratio(1, 3);
    let mut law = [T::zero(), T::zero(), T::zero()];
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    for pattern in 0u8..8 {
        let mut points = [0u8; 3];
        let mut weight = T::one();
        for (bit, &(i, j)) in pairs.iter().enumerate() {
            let correct = pattern & (1 << bit) == 0;
            // A correct vote awards the point to the smaller element `i`.
            if correct {
                points[i] += 1;
                weight = weight * right.clone();
            } else {
                points[j] += 1;
                weight = weight * g.clone();
            }
        }
        if points == [1, 1, 1] {
            for slot in law.iter_mut() {
                *slot = slot.clone() + weight.clone() * third.clone();
            }
        } else {
            let winner = points.iter().position(|&pt| pt == 1).expect("unique one-point element");
            law[winner] = law[winner].clone() + weight;
        }
    }
    let [min, median, max] = law;
    MedianOfThreeLaw { min, median, max }
}

/// Outcome of [`sel_exact`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub element: Element,
    /// Boosted comparisons performed.
    pub votes: u64,
    /// Vote level used for each of them.
    pub level: u32,
}

/// Boosted-sort exact selection: merge sort whose every comparison is a
/// majority vote failing with probability at most `failure / (m⌈log₂m⌉ + 1)`,
/// then the `rank`-th (1-based) item of the sorted order.
pub fn sel_exact<O: Comparator>(oracle: &mut O, items: &[Element], rank: usize, failure: f64) -> Result<Selection> {
    let m = items.len();
    if rank == 0 || rank > m {
        return Err(Error::RankOutOfRange { k: rank as u64, n: m as u64 });
    }
    if !(failure > 0.0 && failure < 0.5) {
        return Err(Error::FailureBudgetOutOfRange(failure));
    }
    if m == 1 {
        return Ok(Selection { element: items[0], votes: 0, level: 0 });
    }
    let depth = usize::BITS - (m - 1).leading_zeros();
    let per_vote = failure / (m as f64 * f64::from(depth) + 1.0);
    let level = level_for(per_vote);
    let params = VoteParams::for_oracle(oracle, level);

    let mut order: Vec<usize> = (0..m).collect();
    let mut scratch = vec![0usize; m];
    let mut votes = 0u64;
    let mut precedes = |a: usize, b: usize| {
        votes += 1;
        slot_precedes(oracle, (a, items[a]), (b, items[b]), &params)
    };
    merge_sort(&mut order, &mut scratch, &mut precedes);
    Ok(Selection { element: items[order[rank - 1]], votes, level })
}

/// Top-down merge sort that tolerates an inconsistent comparator; at most
/// `m⌈log₂ m⌉` comparisons.
fn merge_sort<F: FnMut(usize, usize) -> bool>(order: &mut [usize], scratch: &mut [usize], precedes: &mut F) {
    let len = order.len();
    if len < 2 {
        return;
    }
    let mid = len / 2;
    merge_sort(&mut order[..mid], &mut scratch[..mid], precedes);
    merge_sort(&mut order[mid..], &mut scratch[mid..], precedes);
    let (mut i, mut j, mut out) = (0, mid, 0);
    while i < mid && j < len {
        if precedes(order[j], order[i]) {
            scratch[out] = order[j];
            j += 1;
        } else {
            scratch[out] = order[i];
            i += 1;
        }
        out += 1;
    }
    scratch[out..out + mid - i].copy_from_slice(&order[i..mid]);
    out += mid - i;
    scratch[out..out + len - j].copy_from_slice(&order[j..len]);
    order.copy_from_slice(&scratch[..len]);
}

/// Is `x` neither the minimum nor the maximum of `{x} ∪ others`?
///
/// Minimum and maximum come from two three-comparison tournaments whose
/// comparisons each fail with probability at most 1/108.
pub fn neither_min_nor_max<O: Comparator>(oracle: &mut O, x: Element, others: [Element; 3]) -> bool {
    neither_min_nor_max_at(oracle, (0, x), [(1, others[0]), (2, others[1]), (3, others[2])])
}

/// [`neither_min_nor_max`] on positions of a multiset: copies of one element
/// are ordered by position.
pub fn neither_min_nor_max_at<O: Comparator>(
    oracle: &mut O,
    x: (usize, Element),
    others: [(usize, Element); 3],
) -> bool {
    let params = VoteParams::for_oracle(oracle, FOUR_WAY_LEVEL);
    let slots = [x, others[0], others[1], others[2]];
    let mut min = 0;
    for s in 1..4 {
        if slot_precedes(oracle, slots[s], slots[min], &params) {
            min = s;
        }
    }
    let mut max = 0;
    for s in 1..4 {
        if slot_precedes(oracle, slots[max], slots[s], &params) {
            max = s;
        }
    }
    min != 0 && max != 0
}
