//! Constructions behind the hardness of two-manipulator Borda manipulation.
//!
//! * [`target_votes`] builds non-manipulator votes realising any target score
//!   profile up to a common offset.
//! * [`reduce_perm_sum`] turns a Permutation Sum instance into a manipulation
//!   problem that two manipulators can solve exactly when the instance is
//!   solvable.
//! * [`to_pmrds`] / [`decode_pmrds`] translate balanced two-manipulator
//!   problems to and from permutation matrices with prescribed diagonal sums.

use crate::election::{gaps, tally, ManipulationProblem, ScoreVector, Vote};
use crate::error::{Error, Result};
use crate::exact::{feasible, PermSumInstance};
use crate::matrices::{relaxed_to_strict, row_to_vote};

/// Votes over `m + 1` candidates whose tally is `targets[i] + offset` for the
/// first `m` candidates and `last_score <= offset` for candidate `m + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetVotes {
    pub votes: Vec<Vote>,
    pub offset: i64,
    pub last_score: i64,
}

/// Boost pair for candidate `i` of `m`: `i > m+1 > others ascending` then
/// `others descending > i > m+1`. Candidate `i` gains `m + 1`, the other
/// targets `m`, candidate `m + 1` gains `m - 1`.
fn boost_pair(i: usize, m: usize) -> [Vote; 2] {
    let others: Vec<usize> = (1..=m).filter(|&c| c != i).collect();
    let mut first = vec![i, m + 1];
    first.extend(others.iter().copied());
    let mut second: Vec<usize> = others.iter().rev().copied().collect();
    second.extend([i, m + 1]);
    [Vote::from_ranking_unchecked(first), Vote::from_ranking_unchecked(second)]
}

/// `1 > 2 > ... > m > m+1` and `m > ... > 1 > m+1`: every target gains `m + 1`,
/// candidate `m + 1` gains nothing.
fn neutral_pair(m: usize) -> [Vote; 2] {
    let mut first: Vec<usize> = (1..=m).collect();
    first.push(m + 1);
    let mut second: Vec<usize> = (1..=m).rev().collect();
    second.push(m + 1);
    [Vote::from_ranking_unchecked(first), Vote::from_ranking_unchecked(second)]
}

pub fn target_votes(targets: &[i64]) -> Result<TargetVotes> {
    let m = targets.len();
    if m < 2 {
        return Err(Error::InvalidInstance(format!("need at least 2 target scores, got {m}")));
    }
    let low = *targets.iter().min().expect("non-empty");
    let boosts: Vec<i64> = targets.iter().map(|&t| t - low).collect();
    let pairs: i64 = boosts.iter().sum();
    let mi = m as i64;
    let last_score = pairs * (mi - 1);
    // Neutral pairs lift the targets until the last candidate sits at or
    // below the offset.
    let shortfall = (low - pairs).max(0);
    let neutral = (shortfall + mi) / (mi + 1);
    let offset = pairs * mi + neutral * (mi + 1) - low;

    let mut votes = Vec::with_capacity(2 * (pairs + neutral) as usize);
    for (i, &t) in boosts.iter().enumerate() {
        for _ in 0..t {
            votes.extend(boost_pair(i + 1, m));
        }
    }
    for _ in 0..neutral {
        votes.extend(neutral_pair(m));
    }

    let scores = tally(&votes, m + 1)?;
    let realised = targets.iter().enumerate().all(|(i, &t)| scores.scores()[i] == t + offset);
    if !realised || scores.scores()[m] != last_score || last_score > offset {
        return Err(Error::Internal(format!(
            "target construction produced {scores} for targets {targets:?} + {offset}"
        )));
    }
    Ok(TargetVotes { votes, offset, last_score })
}

/// The election a Permutation Sum instance reduces to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionOutput {
    /// Non-manipulator votes over `n + 3` candidates.
    pub votes: Vec<Vote>,
    /// The constant `C` of the score profile.
    pub offset: i64,
    pub target_scores: ScoreVector,
    /// Preferred candidate, always 1.
    pub d: usize,
}

/// Builds the profile `<C, 2(n+2)-X_1+C, ..., 2(n+2)-X_n+C, 2(n+2)+C, y>`
/// with `y <= C`, where candidate 1 should win with two manipulators.
pub fn reduce_perm_sum(inst: &PermSumInstance) -> Result<(ManipulationProblem, ReductionOutput)> {
    let n = inst.n() as i64;
    let top = 2 * (n + 2);
    let mut targets = Vec::with_capacity(inst.n() + 2);
    targets.push(0);
    targets.extend(inst.xs().iter().map(|&x| top - x));
    targets.push(top);
    let built = target_votes(&targets)?;
    let target_scores = tally(&built.votes, inst.n() + 3)?;
    let problem = ManipulationProblem::new(target_scores.clone(), 1)?;
    Ok((problem, ReductionOutput { votes: built.votes, offset: built.offset, target_scores, d: 1 }))
}

/// Diagonal sums for a permutation matrix problem.
///
/// `diag_sums[k]` belongs to the diagonal whose cells carry label `k`, where
/// cell `(r, c)` of an `n x n` matrix is labelled `r + (n - 1 - c)`. The
/// 1-based diagonal `d_{k+1}` of the usual notation is `diag_sums[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PmrdsInstance {
    n: usize,
    diag_sums: Vec<u32>,
}

impl PmrdsInstance {
    pub fn new(n: usize, diag_sums: Vec<u32>) -> Result<Self> {
        if n == 0 || diag_sums.len() != 2 * n - 1 {
            return Err(Error::InvalidInstance(format!(
                "an {n} x {n} matrix has {} diagonals, got {}",
                (2 * n).saturating_sub(1),
                diag_sums.len()
            )));
        }
        let total: u32 = diag_sums.iter().sum();
        if total as usize != n {
            return Err(Error::InvalidInstance(format!("diagonal sums add to {total}, expected {n}")));
        }
        let weighted: usize = diag_sums.iter().enumerate().map(|(k, &c)| k * c as usize).sum();
        if weighted != n * (n - 1) {
            return Err(Error::InvalidInstance(format!(
                "labelled diagonal sums add to {weighted}, a permutation matrix gives {}",
                n * (n - 1)
            )));
        }
        Ok(PmrdsInstance { n, diag_sums })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diag_sums(&self) -> &[u32] {
        &self.diag_sums
    }
}

fn non_d_gaps(problem: &ManipulationProblem) -> Vec<(usize, i64)> {
    let g = gaps(problem, 2);
    (1..=problem.m()).filter(|&c| c != problem.d()).map(|c| (c, g.gap(c))).collect()
}

/// Encodes a two-manipulator problem whose non-`d` gaps add up to `n(n-1)`
/// (`n` non-`d` candidates): `diag_sums[k]` counts the gaps equal to `k`.
pub fn to_pmrds(problem: &ManipulationProblem) -> Result<PmrdsInstance> {
    let n = problem
        .m()
        .checked_sub(1)
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInstance("need at least one candidate besides d".into()))?;
    let gaps = non_d_gaps(problem);
    let total: i64 = gaps.iter().map(|&(_, g)| g).sum();
    let balance = (n * (n - 1)) as i64;
    if total != balance {
        return Err(Error::InvalidInstance(format!(
            "gaps add to {total}, the encoding needs exactly {balance}"
        )));
    }
    let mut diag_sums = vec![0u32; 2 * n - 1];
    for (c, g) in gaps {
        if g < 0 || g as usize >= diag_sums.len() {
            return Err(Error::InvalidInstance(format!("gap {g} of candidate {c} has no diagonal")));
        }
        diag_sums[g as usize] += 1;
    }
    PmrdsInstance::new(n, diag_sums)
}

/// Scores two manipulators give the non-`d` candidates, in candidate order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PmrdsDecoding {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

impl PmrdsDecoding {
    /// Full ballots, with `d` ranked first by both manipulators.
    pub fn ballots(&self, problem: &ManipulationProblem) -> Vec<Vote> {
        let d = problem.d();
        let top = problem.m() - 1;
        [&self.first, &self.second]
            .into_iter()
            .map(|scores| {
                let mut row = scores.clone();
                row.insert(d - 1, top);
                row_to_vote(&row)
            })
            .collect()
    }
}

/// Checks a 0/1 grid is an `n x n` permutation matrix and returns the column
/// of each row's 1.
fn permutation_columns(solution: &[Vec<u8>], n: usize) -> Result<Vec<usize>> {
    if solution.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: solution.len() });
    }
    let mut used = vec![false; n];
    let mut cols = Vec::with_capacity(n);
    for (r, row) in solution.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
        let ones: Vec<usize> = (0..n).filter(|&c| row[c] != 0).collect();
        if ones.len() != 1 || row.iter().any(|&x| x > 1) {
            return Err(Error::InvalidMatrix(format!("row {r} must hold exactly one 1")));
        }
        if std::mem::replace(&mut used[ones[0]], true) {
            return Err(Error::InvalidMatrix(format!("column {} holds two 1s", ones[0])));
        }
        cols.push(ones[0]);
    }
    Ok(cols)
}

/// Reads a permutation matrix solution back as two manipulator score
/// assignments: the 1 at `(r, c)` means the first manipulator gives `r` and
/// the second `n - 1 - c` to a candidate with gap `r + n - 1 - c`.
/// Rows are read top to bottom and candidates sharing a gap are served in
/// increasing order.
pub fn decode_pmrds(solution: &[Vec<u8>], problem: &ManipulationProblem) -> Result<PmrdsDecoding> {
    let inst = to_pmrds(problem)?;
    let n = inst.n;
    let cols = permutation_columns(solution, n)?;

    let mut diag = vec![0u32; 2 * n - 1];
    for (r, &c) in cols.iter().enumerate() {
        diag[r + n - 1 - c] += 1;
    }
    if diag != inst.diag_sums {
        return Err(Error::InvalidInstance(format!(
            "solution has diagonal sums {diag:?}, the problem needs {:?}",
            inst.diag_sums
        )));
    }

    let gaps = non_d_gaps(problem);
    let mut taken = vec![false; n];
    let mut first = vec![0; n];
    let mut second = vec![0; n];
    for (r, &c) in cols.iter().enumerate() {
        let label = (r + n - 1 - c) as i64;
        let slot = (0..n)
            .find(|&k| !taken[k] && gaps[k].1 == label)
            .ok_or_else(|| Error::Internal(format!("no candidate left with gap {label}")))?;
        taken[slot] = true;
        first[slot] = r;
        second[slot] = n - 1 - c;
    }
    Ok(PmrdsDecoding { first, second })
}

/// Finds a permutation matrix with the given diagonal sums by solving the
/// equivalent two-manipulator problem with the exact search.
pub fn solve_pmrds(inst: &PmrdsInstance) -> Result<Option<Vec<Vec<u8>>>> {
    let n = inst.n;
    let gaps: Vec<i64> = inst
        .diag_sums
        .iter()
        .enumerate()
        .flat_map(|(label, &count)| std::iter::repeat_n(label as i64, count as usize))
        .collect();
    // d = n + 1 with score 0, so s(i) = 2n - g(i).
    let mut scores: Vec<i64> = gaps.iter().map(|&g| 2 * n as i64 - g).collect();
    scores.push(0);
    let problem = ManipulationProblem::new(ScoreVector::new(scores)?, n + 1)?;
    let Some(relaxed) = feasible(&problem, 2) else {
        return Ok(None);
    };
    let strict = relaxed_to_strict(&relaxed)?;
    let (first, second) = (&strict.rows()[0], &strict.rows()[1]);
    let mut grid = vec![vec![0u8; n]; n];
    for i in 0..n {
        grid[first[i]][n - 1 - second[i]] = 1;
    }
    Ok(Some(grid))
}
