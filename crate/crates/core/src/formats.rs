//! Plain-text file formats.
//!
//! * Election: `m k`, then `k` lines each holding a permutation of `1..=m`,
//!   most preferred first.
//! * Score vector: `m d`, then one line of `m` scores.
//! * Strict matrix: `n m`, then `n` rows of `m` scores.
//! * Relaxed matrix: `n m`, then `m` lines `j: v^count ...`.
//!
//! Lines end with LF. Blank lines are ignored.

use std::fmt::Write as _;

use crate::election::{validate_votes, ManipulationProblem, ScoreVector, Vote};
use crate::error::{Error, Result};
use crate::matrices::{ManipulationMatrix, RelaxedMatrix};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    /// Number of the last line read, blank or not.
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate(), last: 0 }
    }

    /// Next non-blank line with its 1-based number.
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            if !l.trim().is_empty() {
                return Some((i + 1, l.trim()));
            }
        }
        None
    }

    fn expect_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_line().ok_or_else(|| Error::Parse {
            line: self.last + 1,
            message: format!("unexpected end of input, expected {what}"),
        })
    }

    fn finish(mut self) -> Result<()> {
        match self.next_line() {
            Some((line, _)) => Err(Error::Parse { line, message: "unexpected trailing content".into() }),
            None => Ok(()),
        }
    }
}

fn parse_numbers<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<T>().map_err(|_| Error::Parse { line, message: format!("bad number {tok:?}") })
        })
        .collect()
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize)> {
    match parse_numbers::<usize>(line, text)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(Error::Parse { line, message: "expected two integers".into() }),
    }
}

pub fn parse_election(text: &str) -> Result<(usize, Vec<Vote>)> {
    let mut lines = Lines::new(text);
    let (line, header) = lines.expect_line("header `m k`")?;
    let (m, k) = parse_pair(line, header)?;
    let mut votes = Vec::with_capacity(k);
    for _ in 0..k {
        let (line, text) = lines.expect_line("a vote")?;
        let ranking = parse_numbers::<usize>(line, text)?;
        votes.push(Vote::from_ranking_unchecked(ranking));
    }
    lines.finish()?;
    validate_votes(&votes, m)?;
    Ok((m, votes))
}

pub fn write_election(m: usize, votes: &[Vote]) -> String {
    let mut out = format!("{m} {}\n", votes.len());
    for v in votes {
        let line: Vec<String> = v.ranking().iter().map(|c| c.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_score_vector(text: &str) -> Result<ManipulationProblem> {
    let mut lines = Lines::new(text);
    let (line, header) = lines.expect_line("header `m d`")?;
    let (m, d) = parse_pair(line, header)?;
    let (line, body) = lines.expect_line("the scores")?;
    let scores = parse_numbers::<i64>(line, body)?;
    if scores.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: scores.len() });
    }
    lines.finish()?;
    ManipulationProblem::new(ScoreVector::new(scores)?, d)
}

pub fn write_score_vector(problem: &ManipulationProblem) -> String {
    let scores: Vec<String> = problem.base().scores().iter().map(|s| s.to_string()).collect();
    format!("{} {}\n{}\n", problem.m(), problem.d(), scores.join(" "))
}

pub fn parse_strict_matrix(text: &str) -> Result<ManipulationMatrix> {
    let mut lines = Lines::new(text);
    let (line, header) = lines.expect_line("header `n m`")?;
    let (n, m) = parse_pair(line, header)?;
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, text) = lines.expect_line("a matrix row")?;
        rows.push(parse_numbers::<usize>(line, text)?);
    }
    lines.finish()?;
    ManipulationMatrix::new(m, rows)
}

pub fn parse_relaxed_matrix(text: &str) -> Result<RelaxedMatrix> {
    let mut lines = Lines::new(text);
    let (line, header) = lines.expect_line("header `n m`")?;
    let (n, m) = parse_pair(line, header)?;
    let mut r = RelaxedMatrix::empty(n, m);
    let mut seen = vec![false; m];
    for _ in 0..m {
        let (line, text) = lines.expect_line("a column line `j: v^count ...`")?;
        let bad = |message: String| Error::Parse { line, message };
        let (col, entries) = text.split_once(':').ok_or_else(|| bad("missing `:`".into()))?;
        let j: usize = col.trim().parse().map_err(|_| bad(format!("bad column {col:?}")))?;
        if j == 0 || j > m {
            return Err(bad(format!("column {j} is out of range 1..={m}")));
        }
        if std::mem::replace(&mut seen[j - 1], true) {
            return Err(bad(format!("column {j} listed twice")));
        }
        for tok in entries.split_whitespace() {
            let (v, c) = tok.split_once('^').unwrap_or((tok, "1"));
            let v: usize = v.parse().map_err(|_| bad(format!("bad value in {tok:?}")))?;
            let c: u32 = c.parse().map_err(|_| bad(format!("bad count in {tok:?}")))?;
            if v >= m {
                return Err(bad(format!("value {v} is out of range 0..{m}")));
            }
            r.add(v, j, c);
        }
    }
    lines.finish()?;
    Ok(r)
}

/// One line per row, space separated.
pub fn write_grid(rows: &[Vec<u8>]) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// `n` rows of `n` zeros and ones.
pub fn parse_grid(text: &str) -> Result<Vec<Vec<u8>>> {
    let mut lines = Lines::new(text);
    let mut rows = Vec::new();
    while let Some((line, body)) = lines.next_line() {
        rows.push(parse_numbers::<u8>(line, body)?);
    }
    Ok(rows)
}
