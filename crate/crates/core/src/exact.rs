//! Exact oracles: the minimum coalition size for a Borda manipulation, and a
//! brute-force Permutation Sum solver.
//!
//! The manipulation search works on relaxed matrices, which is enough since
//! every relaxed matrix converts to a proper one with the same column sums.
//! The preferred candidate's column is fixed to `n` copies of `m - 1`; the
//! remaining values `0..m-1` (`n` copies each) are distributed over the other
//! columns, one value level at a time from the largest down, with failed
//! sub-problems cached under a canonical key.

use std::collections::HashSet;

use crate::election::{check_win, gaps, ManipulationProblem};
use crate::error::{Error, Result};
use crate::matrices::RelaxedMatrix;

/// Smallest `n` that passes two counting tests: every candidate is within
/// reach of `d` (`s(d) + n(m-1) >= s(i)`), and the non-`d` gaps can absorb
/// the `n(m-1)(m-2)/2` points the coalition must hand out to them.
pub fn lower_bound(problem: &ManipulationProblem) -> usize {
    let m = problem.m() as i128;
    if m < 2 {
        return 0;
    }
    let d = problem.d();
    let sd = problem.base().score(d) as i128;
    let scores = problem.base().scores();

    let mut need = 0i128;
    let mut others = 0i128;
    for (i, &s) in scores.iter().enumerate() {
        if i + 1 == d {
            continue;
        }
        let s = s as i128;
        others += s;
        need = need.max(ceil_div(s - sd, m - 1));
    }
    // n * m(m-1)/2 >= sum_{i != d} s(i) - (m-1) s(d)
    need = need.max(ceil_div(2 * (others - (m - 1) * sd), m * (m - 1)));
    need.max(0) as usize
}

fn ceil_div(a: i128, b: i128) -> i128 {
    let q = a.div_euclid(b);
    if a.rem_euclid(b) == 0 {
        q
    } else {
        q + 1
    }
}

/// Result of a bounded feasibility search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(RelaxedMatrix),
    /// The search tree was exhausted.
    Infeasible,
    /// The node budget ran out before a decision.
    Unknown,
}

impl SearchOutcome {
    pub fn witness(self) -> Option<RelaxedMatrix> {
        match self {
            SearchOutcome::Found(r) => Some(r),
            _ => None,
        }
    }
}

/// Decides whether `n` manipulators suffice, with no node budget.
pub fn feasible(problem: &ManipulationProblem, n: usize) -> Option<RelaxedMatrix> {
    feasible_with_budget(problem, n, None).witness()
}

/// Decides whether `n` manipulators suffice, giving up with
/// [`SearchOutcome::Unknown`] after `node_budget` search nodes.
pub fn feasible_with_budget(
    problem: &ManipulationProblem,
    n: usize,
    node_budget: Option<u64>,
) -> SearchOutcome {
    let m = problem.m();
    let d = problem.d();
    let g = gaps(problem, n);
    if g.any_negative() {
        return SearchOutcome::Infeasible;
    }
    if n == 0 {
        return if check_win(problem.base(), d) {
            SearchOutcome::Found(RelaxedMatrix::empty(0, m))
        } else {
            SearchOutcome::Infeasible
        };
    }

    let columns: Vec<usize> = (1..=m).filter(|&j| j != d).collect();
    let mut search =
        Search { n: n as u32, node_budget, nodes: 0, failed: HashSet::new(), placed: Vec::new() };
    let mut gap: Vec<i64> = columns.iter().map(|&j| g.gap(j)).collect();
    let mut slots = vec![n as u32; columns.len()];

    let status = match m.checked_sub(2) {
        Some(top) => search.level(top, &mut gap, &mut slots),
        None => Status::Found,
    };
    match status {
        Status::Found => {
            let mut r = RelaxedMatrix::empty(n, m);
            r.add(m - 1, d, n as u32);
            let mut filled = vec![0u32; columns.len()];
            for &(v, c, k) in &search.placed {
                r.add(v, columns[c], k);
                filled[c] += k;
            }
            for (c, &f) in filled.iter().enumerate() {
                r.add(0, columns[c], n as u32 - f);
            }
            SearchOutcome::Found(r)
        }
        Status::Failed => SearchOutcome::Infeasible,
        Status::Aborted => SearchOutcome::Unknown,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Found,
    Failed,
    Aborted,
}

struct Search {
    n: u32,
    node_budget: Option<u64>,
    nodes: u64,
    /// Level entry states known to be infeasible.
    failed: HashSet<(usize, Vec<(i64, u32)>)>,
    /// (value, column index, copies) along the current path.
    placed: Vec<(usize, usize, u32)>,
}

impl Search {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.node_budget.is_some_and(|b| self.nodes > b)
    }

    /// Places all copies of values `value, value-1, ..., 1`; zeros fill
    /// whatever slots are left.
    fn level(&mut self, value: usize, gap: &mut [i64], slots: &mut [u32]) -> Status {
        if value == 0 {
            return Status::Found;
        }
        if self.tick() {
            return Status::Aborted;
        }
        let v = value as i64;
        let n = self.n as i64;

        // Capacity beyond `slots * value` can never be used from here on.
        let state: Vec<(i64, u32)> =
            gap.iter().zip(slots.iter()).map(|(&g, &s)| (g.min(s as i64 * v), s)).collect();

        // Taking the tightest columns (by gap per slot) first, the first k
        // absorb at most their gaps and the others at most the largest values
        // that fit in their slots; together that must cover the mass left.
        let mass = n * v * (v + 1) / 2;
        // Full columns hold (0, 0) and would break the ratio order.
        let mut by_tightness: Vec<(i64, u32)> = state.iter().copied().filter(|&(_, s)| s > 0).collect();
        by_tightness.sort_by(|a, b| (a.0 * b.1 as i64).cmp(&(b.0 * a.1 as i64)));
        let mut capped = 0i64;
        let mut free_slots: i64 = state.iter().map(|&(_, s)| s as i64).sum();
        for &(g, s) in &by_tightness {
            capped += g;
            free_slots -= s as i64;
            if capped + top_mass(free_slots, v, n) < mass {
                return Status::Failed;
            }
        }
        // Each column takes at most g/t entries of size >= t.
        for t in 1..=v {
            let room: i64 = state.iter().map(|&(g, s)| (s as i64).min(g / t)).sum();
            if room < n * (v - t + 1) {
                return Status::Failed;
            }
        }

        let mut key_state = state.clone();
        key_state.sort_unstable();
        let key = (value, key_state);
        if self.failed.contains(&key) {
            return Status::Failed;
        }

        let mut order: Vec<usize> = (0..state.len()).collect();
        order.sort_by_key(|&c| (state[c], c));
        // suffix[p]: copies of `value` that columns order[p..] can still take.
        let mut suffix = vec![0u32; order.len() + 1];
        for p in (0..order.len()).rev() {
            let c = order[p];
            let fit = (gap[c] / v).min(slots[c] as i64) as u32;
            suffix[p] = suffix[p + 1] + fit;
        }

        let ctx = Level { value, order, state, suffix };
        let status = self.distribute(&ctx, 0, self.n, u32::MAX, gap, slots);
        if status == Status::Failed {
            self.failed.insert(key.clone());
        }
        status
    }

    /// Chooses how many copies of `ctx.value` go to column `ctx.order[pos]`.
    fn distribute(
        &mut self,
        ctx: &Level,
        pos: usize,
        left: u32,
        prev_copies: u32,
        gap: &mut [i64],
        slots: &mut [u32],
    ) -> Status {
        if left == 0 {
            return self.level(ctx.value - 1, gap, slots);
        }
        if pos == ctx.order.len() || ctx.suffix[pos] < left {
            return Status::Failed;
        }
        if self.tick() {
            return Status::Aborted;
        }
        let c = ctx.order[pos];
        let v = ctx.value as i64;
        let mut most = left.min((gap[c] / v).min(slots[c] as i64) as u32);
        // Interchangeable neighbours get non-increasing shares.
        if pos > 0 && ctx.state[ctx.order[pos - 1]] == ctx.state[c] {
            most = most.min(prev_copies);
        }
        let least = left.saturating_sub(ctx.suffix[pos + 1]);
        if least > most {
            return Status::Failed;
        }
        for k in least..=most {
            gap[c] -= k as i64 * v;
            slots[c] -= k;
            if k > 0 {
                self.placed.push((ctx.value, c, k));
            }
            let status = self.distribute(ctx, pos + 1, left - k, k, gap, slots);
            if status == Status::Found {
                return status;
            }
            if k > 0 {
                self.placed.pop();
            }
            gap[c] += k as i64 * v;
            slots[c] += k;
            if status == Status::Aborted {
                return status;
            }
        }
        Status::Failed
    }
}

/// Sum of the `slots` largest values among `n` copies each of `0..=value`.
fn top_mass(slots: i64, value: i64, n: i64) -> i64 {
    let full = (slots / n).min(value + 1);
    let rest = if full > value { 0 } else { (slots - full * n) * (value - full) };
    n * (full * value - full * (full - 1) / 2) + rest
}

struct Level {
    value: usize,
    order: Vec<usize>,
    state: Vec<(i64, u32)>,
    suffix: Vec<u32>,
}

/// Minimum coalition size together with a witness at that size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalResult {
    pub n_opt: usize,
    pub witness: RelaxedMatrix,
}

/// Outcome of an optimisation run under a node budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OptimalOutcome {
    Optimal(OptimalResult),
    /// Some size below the best known witness could not be decided.
    Unknown {
        undecided: usize,
    },
}

/// Minimum number of manipulators, searching upward from [`lower_bound`].
pub fn optimal(problem: &ManipulationProblem) -> OptimalResult {
    match optimal_with_budget(problem, None, None) {
        OptimalOutcome::Optimal(r) => r,
        OptimalOutcome::Unknown { .. } => unreachable!("unbounded search always decides"),
    }
}

/// Like [`optimal`], with a per-size node budget.
///
/// When `known` carries a witness for some size `k`, sizes `k` and above are
/// not searched: the answer is the first feasible size below `k`, or `k`
/// itself once every smaller size is certified infeasible.
pub fn optimal_with_budget(
    problem: &ManipulationProblem,
    node_budget: Option<u64>,
    known: Option<(usize, RelaxedMatrix)>,
) -> OptimalOutcome {
    let mut n = lower_bound(problem);
    loop {
        if let Some((k, witness)) = &known {
            if n >= *k {
                return OptimalOutcome::Optimal(OptimalResult { n_opt: *k, witness: witness.clone() });
            }
        }
        match feasible_with_budget(problem, n, node_budget) {
            SearchOutcome::Found(witness) => {
                return OptimalOutcome::Optimal(OptimalResult { n_opt: n, witness })
            }
            SearchOutcome::Infeasible => n += 1,
            SearchOutcome::Unknown => return OptimalOutcome::Unknown { undecided: n },
        }
    }
}

/// `n` integers `X_1 <= ... <= X_n` with `sum X_i = n(n+1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermSumInstance {
    xs: Vec<i64>,
}

impl PermSumInstance {
    pub fn new(xs: Vec<i64>) -> Result<Self> {
        let n = xs.len() as i64;
        if n == 0 {
            return Err(Error::InvalidInstance("permutation sum needs at least one integer".into()));
        }
        if xs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInstance("integers must be non-decreasing".into()));
        }
        if let Some(x) = xs.iter().find(|&&x| x < 2 || x > 2 * n) {
            return Err(Error::InvalidInstance(format!("{x} is outside 2..={}", 2 * n)));
        }
        let sum: i64 = xs.iter().sum();
        if sum != n * (n + 1) {
            return Err(Error::InvalidInstance(format!("integers sum to {sum}, expected {}", n * (n + 1))));
        }
        Ok(PermSumInstance { xs })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn xs(&self) -> &[i64] {
        &self.xs
    }
}

/// Two permutations of `1..=n` with `sigma[i] + pi[i] = X_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermSumSolution {
    pub sigma: Vec<usize>,
    pub pi: Vec<usize>,
}

/// Exhaustive search over `sigma`; `pi` is forced position by position.
pub fn solve_perm_sum(inst: &PermSumInstance) -> Option<PermSumSolution> {
    fn extend(
        i: usize,
        xs: &[i64],
        sigma: &mut Vec<usize>,
        pi: &mut Vec<usize>,
        used_s: &mut [bool],
        used_p: &mut [bool],
    ) -> bool {
        let n = xs.len();
        if i == n {
            return true;
        }
        for s in 1..=n {
            let p = xs[i] - s as i64;
            if used_s[s] || p < 1 || p > n as i64 || used_p[p as usize] {
                continue;
            }
            let p = p as usize;
            used_s[s] = true;
            used_p[p] = true;
            sigma.push(s);
            pi.push(p);
            if extend(i + 1, xs, sigma, pi, used_s, used_p) {
                return true;
            }
            sigma.pop();
            pi.pop();
            used_s[s] = false;
            used_p[p] = false;
        }
        false
    }

    let n = inst.n();
    let mut sigma = Vec::with_capacity(n);
    let mut pi = Vec::with_capacity(n);
    let mut used_s = vec![false; n + 1];
    let mut used_p = vec![false; n + 1];
    extend(0, &inst.xs, &mut sigma, &mut pi, &mut used_s, &mut used_p)
        .then_some(PermSumSolution { sigma, pi })
}

/// Every valid instance of size `n`, in lexicographic order.
pub fn all_perm_sum_instances(n: usize) -> Vec<PermSumInstance> {
    fn rec(n: i64, lo: i64, left: usize, sum: i64, cur: &mut Vec<i64>, out: &mut Vec<PermSumInstance>) {
        if left == 0 {
            if sum == n * (n + 1) {
                out.push(PermSumInstance { xs: cur.clone() });
            }
            return;
        }
        for x in lo..=2 * n {
            // Remaining entries are at least x each.
            if sum + x * left as i64 > n * (n + 1) {
                break;
            }
            cur.push(x);
            rec(n, x, left - 1, sum + x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n as i64, 2, n, 0, &mut Vec::new(), &mut out);
    }
    out
}
