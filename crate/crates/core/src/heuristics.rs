//! Greedy manipulation heuristics.
//!
//! [`reverse`] builds ballots one after another. [`largest_fit`] and
//! [`average_fit`] fill a relaxed manipulation matrix for a fixed coalition
//! size, borrowing from bin packing, and grow the coalition until the
//! placement succeeds. Relaxed placements are turned into ballots through
//! [`relaxed_to_strict`].

use std::fmt;
use std::str::FromStr;

use crate::election::{apply_votes, check_win, gaps, ManipulationProblem, ScoreVector, Vote};
use crate::error::{Error, Result};
use crate::exact::lower_bound;
use crate::matrices::{matrix_to_votes, relaxed_to_strict, RelaxedMatrix};

/// How AVERAGE FIT picks among columns with the same average remaining gap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TieBreakPolicy {
    /// The column holding the fewest scores so far, then the lowest index.
    #[default]
    FewestPlaced,
    LowestIndex,
}

impl FromStr for TieBreakPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fewest-placed" => Ok(TieBreakPolicy::FewestPlaced),
            "lowest-index" => Ok(TieBreakPolicy::LowestIndex),
            other => Err(Error::InvalidInstance(format!("unknown tie-break policy {other:?}"))),
        }
    }
}

/// One score dropped into a column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Placement {
    pub value: usize,
    pub column: usize,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->col{}", self.value, self.column)
    }
}

/// A relaxed placement for a fixed coalition size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedOutcome {
    pub relaxed: RelaxedMatrix,
    /// Placements in the order they were made.
    pub trace: Vec<Placement>,
    /// Base scores plus the column sums placed so far.
    pub final_scores: ScoreVector,
    /// True when every score was placed and `d` is a co-winner.
    pub success: bool,
}

/// A manipulation found by a heuristic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicResult {
    pub n_used: usize,
    pub ballots: Vec<Vote>,
    /// Relaxed matrix the ballots came from (LARGEST FIT, AVERAGE FIT).
    pub relaxed: Option<RelaxedMatrix>,
    pub final_scores: ScoreVector,
    pub trace: Option<Vec<Placement>>,
}

impl HeuristicResult {
    fn no_manipulation(problem: &ManipulationProblem) -> Self {
        HeuristicResult {
            n_used: 0,
            ballots: Vec::new(),
            relaxed: None,
            final_scores: problem.base().clone(),
            trace: None,
        }
    }

    /// The ballots as a relaxed matrix.
    pub fn as_relaxed(&self, m: usize) -> RelaxedMatrix {
        if let Some(r) = &self.relaxed {
            return r.clone();
        }
        let mut r = RelaxedMatrix::empty(self.n_used, m);
        for ballot in &self.ballots {
            for (j, &p) in ballot.points().iter().enumerate() {
                r.place(p as usize, j + 1);
            }
        }
        r
    }
}

/// d first, then the others from lowest to highest current score (lower index
/// first on ties), until `d` wins.
pub fn reverse(problem: &ManipulationProblem) -> Result<HeuristicResult> {
    let d = problem.d();
    let m = problem.m();
    let mut current = problem.base().clone();
    let mut ballots = Vec::new();
    while !check_win(&current, d) {
        let mut others: Vec<usize> = (1..=m).filter(|&c| c != d).collect();
        others.sort_by_key(|&c| (current.score(c), c));
        let mut ranking = Vec::with_capacity(m);
        ranking.push(d);
        ranking.extend(others);
        let ballot = Vote::from_ranking_unchecked(ranking);
        current.add_points(&ballot.points())?;
        ballots.push(ballot);
    }
    Ok(HeuristicResult { n_used: ballots.len(), ballots, relaxed: None, final_scores: current, trace: None })
}

/// LARGEST FIT for a fixed coalition size.
pub fn largest_fit_fixed(problem: &ManipulationProblem, n: usize) -> Option<RelaxedMatrix> {
    let out = largest_fit_traced(problem, n);
    out.success.then_some(out.relaxed)
}

/// LARGEST FIT with its placement log. `d`'s column gets `n` copies of
/// `m - 1`; every other score, largest first, goes to the lowest-scoring
/// candidate (lowest index on ties) that still has a free slot. Gaps are not
/// checked while placing, only the final win.
pub fn largest_fit_traced(problem: &ManipulationProblem, n: usize) -> FixedOutcome {
    let m = problem.m();
    let d = problem.d();
    let mut relaxed = RelaxedMatrix::empty(n, m);
    let mut scores = problem.base().scores().to_vec();
    let mut filled = vec![0usize; m];
    let mut trace = Vec::with_capacity(n * m);

    let mut put = |value: usize, column: usize, scores: &mut Vec<i64>, filled: &mut Vec<usize>| {
        relaxed.place(value, column);
        scores[column - 1] += value as i64;
        filled[column - 1] += 1;
        trace.push(Placement { value, column });
    };

    for _ in 0..n {
        put(m - 1, d, &mut scores, &mut filled);
    }
    for value in (0..m.saturating_sub(1)).rev() {
        for _ in 0..n {
            let column = (1..=m)
                .filter(|&j| filled[j - 1] < n)
                .min_by_key(|&j| (scores[j - 1], j))
                .expect("free slots remain while scores remain");
            put(value, column, &mut scores, &mut filled);
        }
    }

    let final_scores = ScoreVector::new(scores).expect("scores only grow");
    let success = check_win(&final_scores, d);
    FixedOutcome { relaxed, trace, final_scores, success }
}

/// AVERAGE FIT for a fixed coalition size.
pub fn average_fit_fixed(
    problem: &ManipulationProblem,
    n: usize,
    policy: TieBreakPolicy,
) -> Option<RelaxedMatrix> {
    let out = average_fit_traced(problem, n, policy);
    out.success.then_some(out.relaxed)
}

/// AVERAGE FIT with its placement log. After filling `d`'s column with
/// `m - 1`, repeatedly pick the column with the largest remaining gap per
/// remaining slot and put the largest unassigned score that still fits its
/// gap. Stops unsuccessfully when nothing fits.
pub fn average_fit_traced(problem: &ManipulationProblem, n: usize, policy: TieBreakPolicy) -> FixedOutcome {
    let m = problem.m();
    let d = problem.d();
    let g = gaps(problem, n);
    let mut relaxed = RelaxedMatrix::empty(n, m);
    let mut scores = problem.base().scores().to_vec();
    let mut trace = Vec::with_capacity(n * m);
    let finish = |relaxed, trace, scores: Vec<i64>, success| FixedOutcome {
        relaxed,
        trace,
        final_scores: ScoreVector::new(scores).expect("scores only grow"),
        success,
    };

    if g.any_negative() {
        return finish(relaxed, trace, scores, false);
    }
    for _ in 0..n {
        relaxed.place(m - 1, d);
        scores[d - 1] += m as i64 - 1;
        trace.push(Placement { value: m - 1, column: d });
    }

    let mut remaining: Vec<i64> = g.gaps().to_vec();
    let mut slots = vec![n as i64; m];
    slots[d - 1] = 0;
    // Unassigned copies of each score 0..m-1.
    let mut pool = vec![n; m.saturating_sub(1)];

    for _ in 0..n * m.saturating_sub(1) {
        let column = (1..=m)
            .filter(|&j| slots[j - 1] > 0)
            .reduce(|best, j| {
                let (gb, sb) = (remaining[best - 1], slots[best - 1]);
                let (gj, sj) = (remaining[j - 1], slots[j - 1]);
                // gj / sj against gb / sb, both slot counts positive.
                match (gj * sb).cmp(&(gb * sj)) {
                    std::cmp::Ordering::Greater => j,
                    std::cmp::Ordering::Less => best,
                    std::cmp::Ordering::Equal => match policy {
                        TieBreakPolicy::FewestPlaced if sj > sb => j,
                        _ => best,
                    },
                }
            })
            .expect("free slots remain while scores remain");
        let cap = remaining[column - 1];
        let Some(value) = (0..pool.len()).rev().find(|&v| pool[v] > 0 && v as i64 <= cap) else {
            return finish(relaxed, trace, scores, false);
        };
        pool[value] -= 1;
        remaining[column - 1] -= value as i64;
        slots[column - 1] -= 1;
        scores[column - 1] += value as i64;
        relaxed.place(value, column);
        trace.push(Placement { value, column });
    }

    let success = check_win(&ScoreVector::new(scores.clone()).expect("non-negative"), d);
    finish(relaxed, trace, scores, success)
}

/// Smallest coalition, from the counting lower bound upward, for which
/// LARGEST FIT succeeds.
pub fn largest_fit(problem: &ManipulationProblem) -> Result<HeuristicResult> {
    grow(problem, |n| largest_fit_traced(problem, n))
}

/// Smallest coalition, from the counting lower bound upward, for which
/// AVERAGE FIT succeeds.
pub fn average_fit(problem: &ManipulationProblem, policy: TieBreakPolicy) -> Result<HeuristicResult> {
    grow(problem, |n| average_fit_traced(problem, n, policy))
}

/// Size limit for the growing loop. Both fit methods succeed well before it:
/// with enough manipulators the points spread evenly and `d` pulls ahead.
fn size_limit(problem: &ManipulationProblem, start: usize) -> usize {
    4 * start + 2 * problem.m() + 16
}

fn grow(
    problem: &ManipulationProblem,
    mut attempt: impl FnMut(usize) -> FixedOutcome,
) -> Result<HeuristicResult> {
    if check_win(problem.base(), problem.d()) {
        return Ok(HeuristicResult::no_manipulation(problem));
    }
    let start = lower_bound(problem).max(1);
    let limit = size_limit(problem, start);
    for n in start..=limit {
        let out = attempt(n);
        if out.success {
            return realise(problem, n, out);
        }
    }
    Err(Error::SearchExhausted { limit })
}

fn realise(problem: &ManipulationProblem, n: usize, out: FixedOutcome) -> Result<HeuristicResult> {
    let strict = relaxed_to_strict(&out.relaxed)?;
    let ballots = matrix_to_votes(&strict);
    let final_scores = apply_votes(problem.base(), &ballots)?;
    if final_scores != out.final_scores {
        return Err(Error::Internal(format!(
            "ballots give {final_scores}, placement predicted {}",
            out.final_scores
        )));
    }
    Ok(HeuristicResult {
        n_used: n,
        ballots,
        relaxed: Some(out.relaxed),
        final_scores,
        trace: Some(out.trace),
    })
}
