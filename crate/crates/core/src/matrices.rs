//! Manipulation matrices and their relaxed form.
//!
//! A manipulation matrix has one row per manipulator, each row a permutation
//! of `0..m`, with entry `(i, j)` the score manipulator `i` gives candidate
//! `j + 1`. The relaxed form only keeps, for each column, the multiset of
//! scores it receives: `n` copies of every value overall and `n` entries per
//! column, with no row structure. Any relaxed matrix can be turned back into
//! a proper one with the same column sums by peeling off one perfect matching
//! per row.

use std::fmt;

use crate::election::{GapVector, Vote};
use crate::error::{Error, Result};

/// Column-multiset form of a relaxed manipulation matrix.
///
/// `count(v, j)` is the number of copies of score `v` in column `j`
/// (`j` is a 1-based candidate).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RelaxedMatrix {
    n: usize,
    m: usize,
    // counts[v][j - 1]
    counts: Vec<Vec<u32>>,
}

impl RelaxedMatrix {
    /// An empty `n x m` relaxed matrix. It only becomes valid once all
    /// `n * m` scores are placed.
    pub fn empty(n: usize, m: usize) -> Self {
        RelaxedMatrix { n, m, counts: vec![vec![0; m]; m] }
    }

    /// Builds from a `m x m` multiplicity table indexed `[value][column - 1]`.
    /// Invariants are not checked here; see [`validate_relaxed`].
    pub fn from_counts(n: usize, counts: Vec<Vec<u32>>) -> Result<Self> {
        let m = counts.len();
        if let Some(row) = counts.iter().find(|row| row.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, found: row.len() });
        }
        Ok(RelaxedMatrix { n, m, counts })
    }

    /// Forgets the row structure of a strict matrix.
    pub fn from_matrix(b: &ManipulationMatrix) -> Self {
        let mut r = RelaxedMatrix::empty(b.n(), b.m());
        for row in &b.rows {
            for (j, &v) in row.iter().enumerate() {
                r.counts[v][j] += 1;
            }
        }
        r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn count(&self, value: usize, column: usize) -> u32 {
        self.counts[value][column - 1]
    }

    /// Adds one copy of `value` to `column`.
    pub fn place(&mut self, value: usize, column: usize) {
        self.counts[value][column - 1] += 1;
    }

    pub(crate) fn add(&mut self, value: usize, column: usize, copies: u32) {
        self.counts[value][column - 1] += copies;
    }

    /// Number of entries in a column.
    pub fn column_len(&self, column: usize) -> u32 {
        self.counts.iter().map(|row| row[column - 1]).sum()
    }

    pub fn column_sums(&self) -> Vec<i64> {
        (1..=self.m)
            .map(|j| self.counts.iter().enumerate().map(|(v, row)| v as i64 * row[j - 1] as i64).sum())
            .collect()
    }

    /// Scores of column `j`, in descending order.
    pub fn column_values(&self, column: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for v in (0..self.m).rev() {
            out.extend(std::iter::repeat_n(v, self.counts[v][column - 1] as usize));
        }
        out
    }
}

impl fmt::Display for RelaxedMatrix {
    /// `n m` then one `j: v^count ...` line per column.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.m)?;
        for j in 1..=self.m {
            write!(f, "{j}:")?;
            for v in (0..self.m).rev() {
                let c = self.counts[v][j - 1];
                if c > 0 {
                    write!(f, " {v}^{c}")?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// `n x m` matrix whose rows are permutations of `0..m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManipulationMatrix {
    m: usize,
    rows: Vec<Vec<usize>>,
}

impl ManipulationMatrix {
    pub fn new(m: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if !is_permutation_of_range(row, m) {
                return Err(Error::InvalidMatrix(format!("row {} is not a permutation of 0..{}", i + 1, m)));
            }
        }
        Ok(ManipulationMatrix { m, rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn column_sums(&self) -> Vec<i64> {
        let mut sums = vec![0i64; self.m];
        for row in &self.rows {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += v as i64;
            }
        }
        sums
    }

    /// True when every column sum is within its gap.
    pub fn fits(&self, gaps: &GapVector) -> bool {
        gaps.gaps().len() == self.m && self.column_sums().iter().zip(gaps.gaps()).all(|(s, g)| s <= g)
    }
}

impl fmt::Display for ManipulationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows.len(), self.m)?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

fn is_permutation_of_range(row: &[usize], m: usize) -> bool {
    if row.len() != m {
        return false;
    }
    let mut seen = vec![false; m];
    row.iter().all(|&v| v < m && !std::mem::replace(&mut seen[v], true))
}

/// First place where an invariant fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub value: Option<usize>,
    pub column: Option<usize>,
    pub expected: i64,
    pub found: i64,
}

/// Outcome of [`validate_relaxed`], one slot per invariant; `None` means it holds.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelaxedDiagnostics {
    /// Every value `0..m` occurs exactly `n` times.
    pub value_counts: Option<Violation>,
    /// Every column holds exactly `n` entries.
    pub column_counts: Option<Violation>,
    /// Every column sum is at most its gap.
    pub column_sums: Option<Violation>,
}

impl RelaxedDiagnostics {
    pub fn all_pass(&self) -> bool {
        self.value_counts.is_none() && self.column_counts.is_none() && self.column_sums.is_none()
    }

    /// True when the two counting invariants hold, regardless of gaps.
    pub fn counts_pass(&self) -> bool {
        self.value_counts.is_none() && self.column_counts.is_none()
    }
}

fn count_diagnostics(r: &RelaxedMatrix) -> RelaxedDiagnostics {
    let n = r.n as i64;
    let value_counts = (0..r.m).find_map(|v| {
        let found: i64 = r.counts[v].iter().map(|&c| c as i64).sum();
        (found != n).then_some(Violation { value: Some(v), column: None, expected: n, found })
    });
    let column_counts = (1..=r.m).find_map(|j| {
        let found = r.column_len(j) as i64;
        (found != n).then_some(Violation { value: None, column: Some(j), expected: n, found })
    });
    RelaxedDiagnostics { value_counts, column_counts, column_sums: None }
}

pub fn validate_relaxed(r: &RelaxedMatrix, gaps: &GapVector) -> RelaxedDiagnostics {
    let mut diag = count_diagnostics(r);
    if gaps.gaps().len() != r.m {
        diag.column_sums = Some(Violation {
            value: None,
            column: None,
            expected: r.m as i64,
            found: gaps.gaps().len() as i64,
        });
        return diag;
    }
    diag.column_sums =
        r.column_sums().into_iter().zip(gaps.gaps()).enumerate().find_map(|(j, (sum, &gap))| {
            (sum > gap).then_some(Violation { value: None, column: Some(j + 1), expected: gap, found: sum })
        });
    diag
}

/// Kuhn's augmenting-path matching. `adj[v]` lists the right vertices of `v`
/// in ascending order; returns `match_of_left` when every left vertex is matched.
fn perfect_matching(adj: &[Vec<usize>], right: usize) -> Option<Vec<usize>> {
    fn augment(v: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &w in &adj[v] {
            if std::mem::replace(&mut seen[w], true) {
                continue;
            }
            if owner[w].is_none_or(|u| augment(u, adj, seen, owner)) {
                owner[w] = Some(v);
                return true;
            }
        }
        false
    }

    let mut owner: Vec<Option<usize>> = vec![None; right];
    for v in 0..adj.len() {
        let mut seen = vec![false; right];
        if !augment(v, adj, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut matched = vec![usize::MAX; adj.len()];
    for (w, v) in owner.iter().enumerate() {
        if let Some(v) = v {
            matched[*v] = w;
        }
    }
    Some(matched)
}

/// Removes one row from a regular multiplicity table, returning the row as
/// `row[column] = value`.
pub(crate) fn peel_row(counts: &mut [Vec<u32>]) -> Option<Vec<usize>> {
    let m = counts.len();
    let adj: Vec<Vec<usize>> = counts.iter().map(|row| (0..m).filter(|&j| row[j] > 0).collect()).collect();
    let value_to_column = perfect_matching(&adj, m)?;
    let mut row = vec![0; m];
    for (v, &j) in value_to_column.iter().enumerate() {
        counts[v][j] -= 1;
        row[j] = v;
    }
    Some(row)
}

/// Converts a relaxed matrix into a manipulation matrix with identical column sums.
pub fn relaxed_to_strict(r: &RelaxedMatrix) -> Result<ManipulationMatrix> {
    let diag = count_diagnostics(r);
    if let Some(v) = diag.value_counts.or(diag.column_counts) {
        return Err(Error::InvalidMatrix(format!("relaxed matrix breaks the count invariant at {v:?}")));
    }
    let mut counts = r.counts.clone();
    let mut rows = Vec::with_capacity(r.n);
    for round in 0..r.n {
        let row = peel_row(&mut counts)
            .ok_or_else(|| Error::Internal(format!("no perfect matching in round {}", round + 1)))?;
        rows.push(row);
    }
    Ok(ManipulationMatrix { m: r.m, rows })
}

/// Reads each row as a ballot: candidates ranked by decreasing score.
pub fn matrix_to_votes(b: &ManipulationMatrix) -> Vec<Vote> {
    b.rows.iter().map(|row| row_to_vote(row)).collect()
}

/// Ballot for a single row of scores. The row must be a permutation of `0..m`.
pub(crate) fn row_to_vote(row: &[usize]) -> Vote {
    let m = row.len();
    let mut ranking = vec![0; m];
    for (j, &v) in row.iter().enumerate() {
        ranking[m - 1 - v] = j + 1;
    }
    Vote::from_ranking_unchecked(ranking)
}

/// Checks the rows and reads them as ballots.
pub fn rows_to_votes(m: usize, rows: Vec<Vec<usize>>) -> Result<Vec<Vote>> {
    Ok(matrix_to_votes(&ManipulationMatrix::new(m, rows)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{gaps, tally, ManipulationProblem, ScoreVector};
    use proptest::prelude::*;

    /// Two manipulators on base <3,4,5,0>, d = 4: columns {2,1}, {2,0}, {1,0}, {3,3}.
    fn small_placement() -> RelaxedMatrix {
        let mut r = RelaxedMatrix::empty(2, 4);
        for (v, j) in [(3, 4), (3, 4), (2, 1), (2, 2), (1, 1), (1, 3), (0, 2), (0, 3)] {
            r.place(v, j);
        }
        r
    }

    fn example_gaps() -> GapVector {
        let p = ManipulationProblem::new(ScoreVector::new(vec![3, 4, 5, 0]).unwrap(), 4).unwrap();
        gaps(&p, 2)
    }

    #[test]
    fn small_placement_validates() {
        let r = small_placement();
        assert_eq!(r.column_sums(), vec![3, 2, 1, 6]);
        assert!(validate_relaxed(&r, &example_gaps()).all_pass());
    }

    #[test]
    fn single_candidate_validates() {
        let r = RelaxedMatrix::from_counts(1, vec![vec![1]]).unwrap();
        let p = ManipulationProblem::new(ScoreVector::new(vec![0]).unwrap(), 1).unwrap();
        let g = gaps(&p, 0);
        assert_eq!(g.gaps(), &[0]);
        assert!(validate_relaxed(&r, &g).all_pass());
    }

    #[test]
    fn extra_copy_breaks_counts() {
        let mut r = small_placement();
        r.place(3, 1);
        let diag = validate_relaxed(&r, &example_gaps());
        let v = diag.value_counts.clone().unwrap();
        assert_eq!((v.value, v.expected, v.found), (Some(3), 2, 3));
        let c = diag.column_counts.clone().unwrap();
        assert_eq!((c.column, c.found), (Some(1), 3));
        let s = diag.column_sums.unwrap();
        assert_eq!((s.column, s.expected, s.found), (Some(1), 3, 6));
        assert!(relaxed_to_strict(&r).is_err());
    }

    #[test]
    fn over_gap_is_reported() {
        let mut r = RelaxedMatrix::empty(1, 3);
        r.place(2, 1);
        r.place(1, 2);
        r.place(0, 3);
        let p = ManipulationProblem::new(ScoreVector::new(vec![5, 0, 0]).unwrap(), 3).unwrap();
        let diag = validate_relaxed(&r, &gaps(&p, 1));
        assert!(diag.counts_pass());
        assert_eq!(diag.column_sums.unwrap().column, Some(1));
    }

    #[test]
    fn single_row_is_copied() {
        let mut r = RelaxedMatrix::empty(1, 4);
        for (v, j) in [(2, 1), (1, 2), (0, 3), (3, 4)] {
            r.place(v, j);
        }
        let b = relaxed_to_strict(&r).unwrap();
        assert_eq!(b.rows(), &[vec![2, 1, 0, 3]]);
    }

    #[test]
    fn small_placement_converts_to_ballots() {
        let b = relaxed_to_strict(&small_placement()).unwrap();
        assert_eq!(b.column_sums(), vec![3, 2, 1, 6]);
        let mut votes: Vec<String> = matrix_to_votes(&b).iter().map(|v| v.to_string()).collect();
        votes.sort();
        assert_eq!(votes, vec!["4>1>3>2", "4>2>1>3"]);
    }

    #[test]
    fn row_inversion() {
        let b = ManipulationMatrix::new(4, vec![vec![2, 1, 0, 3]]).unwrap();
        assert_eq!(matrix_to_votes(&b)[0].to_string(), "4>1>2>3");
        let b = ManipulationMatrix::new(5, vec![vec![0, 1, 2, 3, 4]]).unwrap();
        assert_eq!(matrix_to_votes(&b)[0].to_string(), "5>4>3>2>1");
        assert!(ManipulationMatrix::new(3, vec![vec![0, 0, 2]]).is_err());
        assert!(ManipulationMatrix::new(3, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn display_relaxed() {
        let text = small_placement().to_string();
        assert_eq!(text, "2 4\n1: 2^1 1^1\n2: 2^1 0^1\n3: 1^1 0^1\n4: 3^2\n");
    }

    /// Random relaxed matrix: `n` copies of each value, shuffled, dealt into
    /// columns of `n`.
    fn arb_relaxed(max_n: usize, max_m: usize) -> impl Strategy<Value = RelaxedMatrix> {
        (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
            let pool: Vec<usize> = (0..m).flat_map(|v| std::iter::repeat_n(v, n)).collect();
            Just(pool).prop_shuffle().prop_map(move |pool| {
                let mut r = RelaxedMatrix::empty(n, m);
                for (k, v) in pool.into_iter().enumerate() {
                    r.place(v, k / n + 1);
                }
                r
            })
        })
    }

    proptest! {
        #[test]
        fn conversion_keeps_column_sums(r in arb_relaxed(8, 8)) {
            let b = relaxed_to_strict(&r).unwrap();
            prop_assert_eq!(b.n(), r.n());
            prop_assert_eq!(b.column_sums(), r.column_sums());
            prop_assert!(b.rows().iter().all(|row| is_permutation_of_range(row, r.m())));
            prop_assert_eq!(RelaxedMatrix::from_matrix(&b), r.clone());
            let votes = matrix_to_votes(&b);
            let scores = tally(&votes, r.m()).unwrap();
            prop_assert_eq!(scores.scores(), &b.column_sums()[..]);
        }

        #[test]
        fn each_round_keeps_the_table_regular(r in arb_relaxed(8, 8)) {
            let mut counts = r.counts.clone();
            let m = r.m();
            for t in 1..=r.n() {
                prop_assert!(peel_row(&mut counts).is_some());
                let left = (r.n() - t) as u32;
                for row in &counts {
                    prop_assert_eq!(row.iter().sum::<u32>(), left);
                }
                for j in 0..m {
                    prop_assert_eq!(counts.iter().map(|row| row[j]).sum::<u32>(), left);
                }
            }
        }
    }
}
