//! Borda scoring, gaps and the win check.
//!
//! Candidates are numbered `1..=m`. A candidate in `k`-th place of a ballot
//! earns `m - k` points, and ties are broken in favour of the manipulators'
//! preferred candidate, so being a co-winner is enough.

use std::fmt;

use crate::error::{Error, Result};

/// A complete strict ranking of the candidates, most preferred first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vote {
    ranking: Vec<usize>,
}

impl Vote {
    /// Builds a vote, checking that `ranking` is a permutation of `1..=m`.
    pub fn new(ranking: Vec<usize>, m: usize) -> Result<Self> {
        validate_ranking(&ranking, m).map_err(|reason| Error::InvalidVote { index: 0, reason })?;
        Ok(Vote { ranking })
    }

    /// Builds a vote without validation. Callers must guarantee the
    /// permutation invariant.
    pub(crate) fn from_ranking_unchecked(ranking: Vec<usize>) -> Self {
        Vote { ranking }
    }

    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    pub fn m(&self) -> usize {
        self.ranking.len()
    }

    /// Borda points per candidate, indexed by `candidate - 1`.
    pub fn points(&self) -> Vec<i64> {
        let m = self.ranking.len();
        let mut points = vec![0; m];
        for (pos, &c) in self.ranking.iter().enumerate() {
            points[c - 1] = (m - 1 - pos) as i64;
        }
        points
    }
}

impl fmt::Display for Vote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.ranking.iter().enumerate() {
            if i > 0 {
                f.write_str(">")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

fn validate_ranking(ranking: &[usize], m: usize) -> std::result::Result<(), String> {
    if ranking.len() != m {
        return Err(format!("expected {m} candidates, found {}", ranking.len()));
    }
    let mut seen = vec![false; m];
    for &c in ranking {
        if c == 0 || c > m {
            return Err(format!("candidate {c} is out of range 1..={m}"));
        }
        if std::mem::replace(&mut seen[c - 1], true) {
            return Err(format!("candidate {c} appears more than once"));
        }
    }
    Ok(())
}

/// Checks that every vote ranks exactly the candidates `1..=m`, reporting the
/// index of the first offending vote.
pub fn validate_votes(votes: &[Vote], m: usize) -> Result<()> {
    for (index, vote) in votes.iter().enumerate() {
        validate_ranking(&vote.ranking, m).map_err(|reason| Error::InvalidVote { index, reason })?;
    }
    Ok(())
}

/// Aggregated Borda scores, `scores()[i]` belonging to candidate `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScoreVector {
    scores: Vec<i64>,
}

impl ScoreVector {
    pub fn new(scores: Vec<i64>) -> Result<Self> {
        if let Some(pos) = scores.iter().position(|&s| s < 0) {
            return Err(Error::InvalidInstance(format!("score of candidate {} is negative", pos + 1)));
        }
        Ok(ScoreVector { scores })
    }

    pub fn zeros(m: usize) -> Self {
        ScoreVector { scores: vec![0; m] }
    }

    pub fn m(&self) -> usize {
        self.scores.len()
    }

    pub fn scores(&self) -> &[i64] {
        &self.scores
    }

    /// Score of a 1-based candidate.
    pub fn score(&self, candidate: usize) -> i64 {
        self.scores[candidate - 1]
    }

    pub fn total(&self) -> i64 {
        self.scores.iter().sum()
    }

    /// The lowest-scoring candidate, ties to the lowest index.
    pub fn weakest(&self) -> Option<usize> {
        let (idx, _) = self.scores.iter().enumerate().min_by_key(|&(i, &s)| (s, i))?;
        Some(idx + 1)
    }

    pub(crate) fn add_points(&mut self, points: &[i64]) -> Result<()> {
        for (s, &p) in self.scores.iter_mut().zip(points) {
            *s = s.checked_add(p).ok_or(Error::Overflow)?;
        }
        Ok(())
    }
}

impl fmt::Display for ScoreVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, s) in self.scores.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(">")
    }
}

/// The non-manipulators' tally together with the candidate the coalition wants
/// to win.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ManipulationProblem {
    base: ScoreVector,
    d: usize,
}

impl ManipulationProblem {
    pub fn new(base: ScoreVector, d: usize) -> Result<Self> {
        if d == 0 || d > base.m() {
            return Err(Error::InvalidCandidate { candidate: d, m: base.m() });
        }
        Ok(ManipulationProblem { base, d })
    }

    pub fn base(&self) -> &ScoreVector {
        &self.base
    }

    /// The preferred candidate.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.base.m()
    }
}

/// `g(i) = s(d) + n(m-1) - s(i)` for every candidate, for a coalition of `n`.
///
/// The entry for `d` itself equals `n(m-1)` and is never consulted when
/// placing scores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapVector {
    n: usize,
    gaps: Vec<i64>,
}

impl GapVector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gaps(&self) -> &[i64] {
        &self.gaps
    }

    /// Gap of a 1-based candidate.
    pub fn gap(&self, candidate: usize) -> i64 {
        self.gaps[candidate - 1]
    }

    /// True when some candidate already beats `d` by more than the coalition
    /// can make up.
    pub fn any_negative(&self) -> bool {
        self.gaps.iter().any(|&g| g < 0)
    }
}

/// Borda tally of `votes` over `m` candidates.
pub fn tally(votes: &[Vote], m: usize) -> Result<ScoreVector> {
    validate_votes(votes, m)?;
    let mut scores = ScoreVector::zeros(m);
    for vote in votes {
        scores.add_points(&vote.points())?;
    }
    Ok(scores)
}

pub fn gaps(problem: &ManipulationProblem, n: usize) -> GapVector {
    let m = problem.m() as i64;
    let top = problem.base.score(problem.d) + n as i64 * (m - 1);
    GapVector { n, gaps: problem.base.scores.iter().map(|&s| top - s).collect() }
}

/// True iff `d` is at least tied for the highest score.
pub fn check_win(final_scores: &ScoreVector, d: usize) -> bool {
    let sd = final_scores.score(d);
    final_scores.scores.iter().all(|&s| s <= sd)
}

/// Pointwise sum of `base` and the tally of `votes`.
pub fn apply_votes(base: &ScoreVector, votes: &[Vote]) -> Result<ScoreVector> {
    let added = tally(votes, base.m())?;
    let mut out = base.clone();
    out.add_points(&added.scores)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vote(r: &[usize]) -> Vote {
        Vote::new(r.to_vec(), r.len()).unwrap()
    }

    fn sv(s: &[i64]) -> ScoreVector {
        ScoreVector::new(s.to_vec()).unwrap()
    }

    #[test]
    fn tally_of_first_worked_example() {
        let votes = [vote(&[3, 1, 2, 4]), vote(&[2, 3, 1, 4])];
        assert_eq!(tally(&votes, 4).unwrap(), sv(&[3, 4, 5, 0]));
    }

    #[test]
    fn tally_of_nothing_is_zero() {
        assert_eq!(tally(&[], 5).unwrap(), sv(&[0, 0, 0, 0, 0]));
    }

    #[test]
    fn tally_of_identical_votes() {
        let votes = vec![vote(&[1, 2, 3, 4]); 72];
        assert_eq!(tally(&votes, 4).unwrap(), sv(&[216, 144, 72, 0]));
    }

    #[test]
    fn malformed_vote_is_reported_by_index() {
        let votes = vec![vote(&[1, 2, 3]), Vote::from_ranking_unchecked(vec![1, 1, 3])];
        match tally(&votes, 3) {
            Err(Error::InvalidVote { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Vote::new(vec![1, 2], 3).is_err());
        assert!(Vote::new(vec![0, 1, 2], 3).is_err());
    }

    #[test]
    fn gap_examples() {
        let p = ManipulationProblem::new(sv(&[3, 4, 5, 0]), 4).unwrap();
        assert_eq!(gaps(&p, 2).gaps(), &[3, 2, 1, 6]);
        let p = ManipulationProblem::new(sv(&[4, 4, 6, 6, 0]), 5).unwrap();
        assert_eq!(gaps(&p, 2).gaps(), &[4, 4, 2, 2, 8]);
        let p = ManipulationProblem::new(sv(&[0, 0]), 1).unwrap();
        assert_eq!(gaps(&p, 0).gaps(), &[0, 0]);
    }

    #[test]
    fn win_check_examples() {
        assert!(check_win(&sv(&[7, 7, 7, 9]), 4));
        assert!(check_win(&sv(&[6, 6, 6, 6]), 4));
        assert!(!check_win(&sv(&[5, 4, 5, 3]), 4));
    }

    #[test]
    fn apply_votes_examples() {
        let base = sv(&[3, 4, 5, 0]);
        let once = apply_votes(&base, &[vote(&[4, 1, 2, 3])]).unwrap();
        assert_eq!(once, sv(&[5, 5, 5, 3]));
        let twice = apply_votes(&once, &[vote(&[4, 1, 2, 3])]).unwrap();
        assert_eq!(twice, sv(&[7, 6, 5, 6]));
        assert_eq!(apply_votes(&base, &[]).unwrap(), base);
    }

    #[test]
    fn problem_rejects_bad_candidate() {
        assert!(ManipulationProblem::new(sv(&[1, 2]), 0).is_err());
        assert!(ManipulationProblem::new(sv(&[1, 2]), 3).is_err());
        assert!(ScoreVector::new(vec![1, -1]).is_err());
    }

    #[test]
    fn display_formats() {
        assert_eq!(vote(&[4, 1, 2, 3]).to_string(), "4>1>2>3");
        assert_eq!(sv(&[7, 7, 7, 9]).to_string(), "<7,7,7,9>");
    }

    fn arb_votes() -> impl Strategy<Value = (usize, Vec<Vote>)> {
        (1usize..7).prop_flat_map(|m| {
            let perm = Just((1..=m).collect::<Vec<_>>()).prop_shuffle();
            (Just(m), proptest::collection::vec(perm.prop_map(Vote::from_ranking_unchecked), 0..20))
        })
    }

    proptest! {
        #[test]
        fn borda_points_are_conserved((m, votes) in arb_votes()) {
            let s = tally(&votes, m).unwrap();
            let expected = (votes.len() * m * (m.saturating_sub(1)) / 2) as i64;
            prop_assert_eq!(s.total(), expected);
        }

        #[test]
        fn gaps_reflect_scores((m, votes) in arb_votes(), n in 0usize..10, d_seed in 0usize..100) {
            let s = tally(&votes, m).unwrap();
            let p = ManipulationProblem::new(s.clone(), d_seed % m + 1).unwrap();
            let g = gaps(&p, n);
            for i in 0..m {
                for j in 0..m {
                    prop_assert_eq!(g.gaps()[i] - g.gaps()[j], s.scores()[j] - s.scores()[i]);
                }
            }
        }

        #[test]
        fn apply_votes_ignores_order((m, votes) in arb_votes()) {
            let base = ScoreVector::zeros(m);
            let mut reversed = votes.clone();
            reversed.reverse();
            prop_assert_eq!(apply_votes(&base, &votes).unwrap(), apply_votes(&base, &reversed).unwrap());
        }

        #[test]
        fn win_check_is_monotone(scores in proptest::collection::vec(0i64..50, 1..8), d_seed in 0usize..100, bump in 0i64..10, other_seed in 0usize..100) {
            let m = scores.len();
            let d = d_seed % m + 1;
            let before = ScoreVector::new(scores.clone()).unwrap();
            let mut raised = scores.clone();
            raised[d - 1] += bump;
            let mut lowered = scores.clone();
            let other = other_seed % m;
            if other != d - 1 {
                lowered[other] = (lowered[other] - bump).max(0);
            }
            if check_win(&before, d) {
                prop_assert!(check_win(&ScoreVector::new(raised).unwrap(), d));
                prop_assert!(check_win(&ScoreVector::new(lowered).unwrap(), d));
            }
        }
    }
}
