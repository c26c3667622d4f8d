//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use borda_core::exact::{
    all_perm_sum_instances, feasible, optimal, optimal_with_budget, solve_perm_sum, OptimalOutcome,
};
use borda_core::generators::{derive_seed, gen_urn_sourced, generate, GenSpec, Model, UrnSource};
use borda_core::hardness::{decode_pmrds, reduce_perm_sum, target_votes, to_pmrds};
use borda_core::harness::{run_experiment, ExperimentConfig};
use borda_core::heuristics::{average_fit, largest_fit, reverse};
use borda_core::matrices::relaxed_to_strict;
use borda_core::{apply_votes, check_win, tally, ManipulationProblem, RelaxedMatrix, ScoreVector, Vote};

const EXAMPLE_TIME_LIMIT: Duration = Duration::from_millis(1);
const MATRIX_TIME_LIMIT: Duration = Duration::from_secs(10);
const REDUCTION_TIME_LIMIT: Duration = Duration::from_secs(60);
const TABLE_TIME_LIMIT: Duration = Duration::from_secs(600);
const RANDOM_MATRICES: usize = 1_000;
const REVERSE_INSTANCES: usize = 5_000;
const TARGET_VECTORS: usize = 500;
const URN_TRIALS: u64 = 100_000;
const URN_TOLERANCE: f64 = 0.01;
const NODE_BUDGET: u64 = 1_000_000;
const AF_MIN_FRACTION: f64 = 0.95;
const LF_SLACK_BELOW_REVERSE: f64 = 0.10;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn problem(scores: &[i64], d: usize) -> ManipulationProblem {
    ManipulationProblem::new(ScoreVector::new(scores.to_vec()).unwrap(), d).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Fastest of a few runs, so a single scheduler hiccup does not count.
fn best_time<T>(mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut best = Duration::MAX;
    let mut out = None;
    for _ in 0..5 {
        let start = Instant::now();
        let v = f();
        best = best.min(start.elapsed());
        out = Some(v);
    }
    (out.unwrap(), best)
}

fn worked_example() -> Outcome {
    let p = problem(&[3, 4, 5, 0], 4);
    let (rev, t_rev) = best_time(|| reverse(&p).unwrap());
    let (lf, t_lf) = best_time(|| largest_fit(&p).unwrap());
    let (opt, t_opt) = best_time(|| optimal(&p).n_opt);
    let ok = rev.n_used == 3
        && rev.final_scores.scores() == [7, 7, 7, 9]
        && lf.n_used == 2
        && lf.final_scores.scores() == [6, 6, 6, 6]
        && opt == 2
        && [t_rev, t_lf, t_opt].iter().all(|&t| t < EXAMPLE_TIME_LIMIT);
    check(
        ok,
        format!(
            "reverse {} {} ({t_rev:?}), largest fit {} {} ({t_lf:?}), opt {opt} ({t_opt:?})",
            rev.n_used, rev.final_scores, lf.n_used, lf.final_scores
        ),
    )
}

fn random_relaxed(rng: &mut ChaCha8Rng, n: usize, m: usize) -> RelaxedMatrix {
    let mut cells: Vec<usize> = (0..m).flat_map(|v| std::iter::repeat_n(v, n)).collect();
    cells.shuffle(rng);
    let mut counts = vec![vec![0u32; m]; m];
    for (i, &v) in cells.iter().enumerate() {
        counts[v][i / n] += 1;
    }
    RelaxedMatrix::from_counts(n, counts).unwrap()
}

/// Every `m x m` table with all line sums equal to `n`.
fn all_tables(n: usize, m: usize) -> Vec<Vec<Vec<u32>>> {
    fn fill(
        cell: usize,
        m: usize,
        rows: &mut [u32],
        cols: &mut [u32],
        t: &mut Vec<Vec<u32>>,
        out: &mut Vec<Vec<Vec<u32>>>,
    ) {
        if cell == m * m {
            out.push(t.clone());
            return;
        }
        let (v, j) = (cell / m, cell % m);
        let lo = if j == m - 1 { rows[v] } else { 0 };
        let hi = rows[v].min(cols[j]);
        for k in lo..=hi {
            rows[v] -= k;
            cols[j] -= k;
            t[v][j] = k;
            fill(cell + 1, m, rows, cols, t, out);
            rows[v] += k;
            cols[j] += k;
        }
        t[v][j] = 0;
    }
    let mut out = Vec::new();
    fill(0, m, &mut vec![n as u32; m], &mut vec![n as u32; m], &mut vec![vec![0; m]; m], &mut out);
    out
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::new();
        for p in &out {
            for x in (0..m).filter(|x| !p.contains(x)) {
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Column sums of every multiset of `n` permutation rows.
fn strict_column_sums(n: usize, m: usize) -> BTreeSet<Vec<i64>> {
    fn rec(left: usize, from: usize, perms: &[Vec<usize>], acc: &mut Vec<i64>, out: &mut BTreeSet<Vec<i64>>) {
        if left == 0 {
            out.insert(acc.clone());
            return;
        }
        for i in from..perms.len() {
            for (a, &x) in acc.iter_mut().zip(&perms[i]) {
                *a += x as i64;
            }
            rec(left - 1, i, perms, acc, out);
            for (a, &x) in acc.iter_mut().zip(&perms[i]) {
                *a -= x as i64;
            }
        }
    }
    let mut out = BTreeSet::new();
    rec(n, 0, &permutations(m), &mut vec![0; m], &mut out);
    out
}

fn converts(r: &RelaxedMatrix) -> bool {
    relaxed_to_strict(r).is_ok_and(|b| b.n() == r.n() && b.column_sums() == r.column_sums())
}

fn matrix_conversion() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    for _ in 0..RANDOM_MATRICES {
        let n = rng.gen_range(1..=10);
        let m = rng.gen_range(1..=10);
        failures += usize::from(!converts(&random_relaxed(&mut rng, n, m)));
    }
    let mut tables = 0;
    for n in 1..=4 {
        for m in 1..=4 {
            let mut relaxed_sums = BTreeSet::new();
            for t in all_tables(n, m) {
                let r = RelaxedMatrix::from_counts(n, t).unwrap();
                failures += usize::from(!converts(&r));
                relaxed_sums.insert(r.column_sums());
                tables += 1;
            }
            failures += usize::from(relaxed_sums != strict_column_sums(n, m));
        }
    }
    let elapsed = start.elapsed();
    check(
        failures == 0 && elapsed < MATRIX_TIME_LIMIT,
        format!("{RANDOM_MATRICES} random and {tables} exhaustive tables, {failures} failures ({elapsed:?})"),
    )
}

fn reverse_guarantee() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut known, mut undecided, mut violations) = (0, 0, 0);
    while known < REVERSE_INSTANCES {
        let model = if rng.gen() { Model::Uniform } else { Model::Urn };
        let m = rng.gen_range(2..=8);
        let voters = rng.gen_range(1..=64);
        let spec = GenSpec::new(model, m, voters, rng.gen()).unwrap();
        let base = tally(&generate(&spec), m).unwrap();
        let p = ManipulationProblem::new(base, rng.gen_range(1..=m)).unwrap();
        match optimal_with_budget(&p, Some(NODE_BUDGET), None) {
            OptimalOutcome::Optimal(r) => {
                known += 1;
                violations += usize::from(reverse(&p).unwrap().n_used > r.n_opt + 1);
            }
            OptimalOutcome::Unknown { .. } => undecided += 1,
        }
    }
    check(
        violations == 0,
        format!("{known} instances with known opt ({undecided} undecided skipped), {violations} violations"),
    )
}

fn reverse_versus_largest_fit() -> Outcome {
    let votes: Vec<Vote> = (0..72).map(|_| Vote::new(vec![1, 2, 3, 4], 4).unwrap()).collect();
    let p = ManipulationProblem::new(tally(&votes, 4).unwrap(), 4).unwrap();
    let rev = reverse(&p).unwrap().n_used;
    let lf = largest_fit(&p).unwrap().n_used;
    check(rev == 72 && lf >= 73, format!("base {}, reverse {rev}, largest fit {lf}", p.base()))
}

fn largest_fit_versus_average_fit() -> Outcome {
    let p = problem(&[41, 34, 30, 27, 27, 26, 25, 14], 8);
    let opt = optimal(&p).n_opt;
    let lf = largest_fit(&p).unwrap().n_used;
    let af = average_fit(&p, Default::default()).unwrap().n_used;
    check(lf == opt && af == opt + 1, format!("opt {opt}, largest fit {lf}, average fit {af}"))
}

fn perm_sum_round_trip() -> Outcome {
    let start = Instant::now();
    let (mut instances, mut discrepancies) = (0, 0);
    for n in 1..=5 {
        for inst in all_perm_sum_instances(n) {
            let (p, _) = reduce_perm_sum(&inst).unwrap();
            discrepancies += usize::from(solve_perm_sum(&inst).is_some() != feasible(&p, 2).is_some());
            instances += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        discrepancies == 0 && elapsed < REDUCTION_TIME_LIMIT,
        format!("{instances} instances, {discrepancies} discrepancies ({elapsed:?})"),
    )
}

fn target_construction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    for _ in 0..TARGET_VECTORS {
        let m = rng.gen_range(3..=10);
        let targets: Vec<i64> = (0..m - 1).map(|_| rng.gen_range(0..=20)).collect();
        let t = target_votes(&targets).unwrap();
        let s = tally(&t.votes, m).unwrap();
        let hit = targets.iter().enumerate().all(|(i, &x)| s.score(i + 1) == x + t.offset);
        failures += usize::from(!hit || s.score(m) != t.last_score || t.last_score > t.offset);
    }
    check(failures == 0, format!("{TARGET_VECTORS} target vectors, {failures} failures"))
}

fn pmrds_example() -> Outcome {
    let p = problem(&[4, 4, 6, 6, 0], 5);
    let inst = to_pmrds(&p).unwrap();
    let solution: Vec<Vec<u8>> =
        [1, 0, 3, 2].iter().map(|&c| (0..4).map(|k| u8::from(k == c)).collect()).collect();
    let dec = decode_pmrds(&solution, &p).unwrap();
    let fin = apply_votes(p.base(), &dec.ballots(&p)).unwrap();
    let ok = inst.diag_sums() == [0, 0, 2, 0, 2, 0, 0]
        && dec.first == [1, 3, 0, 2]
        && dec.second == [3, 1, 2, 0]
        && check_win(&fin, 5);
    check(
        ok,
        format!(
            "diagonal sums {:?}, decoded {:?} and {:?}, final {fin}",
            inst.diag_sums(),
            dec.first,
            dec.second
        ),
    )
}

fn urn_law() -> Outcome {
    let (mut copies, mut equal) = (0u64, 0u64);
    for t in 0..URN_TRIALS {
        let spec = GenSpec::new(Model::Urn, 3, 2, derive_seed(9, &[t])).unwrap();
        let v = gen_urn_sourced(&spec);
        copies += u64::from(v[1].1 == UrnSource::Copy(0));
        equal += u64::from(v[0].0 == v[1].0);
    }
    let copy_rate = copies as f64 / URN_TRIALS as f64;
    let equal_rate = equal as f64 / URN_TRIALS as f64;
    // A fresh second vote also repeats the first with probability 1/3!.
    let ok = (copy_rate - 0.5).abs() <= URN_TOLERANCE && (equal_rate - 7.0 / 12.0).abs() <= URN_TOLERANCE;
    check(ok, format!("second vote copied {copy_rate:.4}, equal to first {equal_rate:.4}"))
}

fn table_config(dir: &std::path::Path, name: &str, workers: usize) -> ExperimentConfig {
    ExperimentConfig {
        models: vec![Model::Uniform, Model::Urn],
        m_values: vec![4, 8, 16],
        voter_counts: vec![4, 8, 16, 32, 64, 128],
        trials: 200,
        seed: 7,
        node_budget: Some(NODE_BUDGET),
        output: dir.join(name),
        timings: false,
        workers,
    }
}

fn desk_table(dir: &std::path::Path) -> Outcome {
    let start = Instant::now();
    let res = run_experiment(&table_config(dir, "first.csv", 1)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let uni = res.summary.total(Model::Uniform).unwrap();
    let urn = res.summary.total(Model::Urn).unwrap();
    let (ur, ul, ua) = (uni.reverse_fraction(), uni.lf_fraction(), uni.af_fraction());
    let (rr, rl, ra) = (urn.reverse_fraction(), urn.lf_fraction(), urn.af_fraction());
    let ok = ua >= AF_MIN_FRACTION
        && ua >= ul
        && ul >= ur - LF_SLACK_BELOW_REVERSE
        && ra >= AF_MIN_FRACTION
        && rl < rr
        && elapsed < TABLE_TIME_LIMIT;
    check(
        ok,
        format!(
            "uniform rev/lf/af {:.1}/{:.1}/{:.1}% of {}, urn {:.1}/{:.1}/{:.1}% of {} ({elapsed:?})",
            100.0 * ur,
            100.0 * ul,
            100.0 * ua,
            uni.known,
            100.0 * rr,
            100.0 * rl,
            100.0 * ra,
            urn.known
        ),
    )
}

fn determinism(dir: &std::path::Path) -> Outcome {
    let workers = std::thread::available_parallelism().map_or(2, |n| n.get().max(2));
    run_experiment(&table_config(dir, "second.csv", workers)).map_err(|e| e.to_string())?;
    let a = std::fs::read(dir.join("first.csv")).map_err(|e| e.to_string())?;
    let b = std::fs::read(dir.join("second.csv")).map_err(|e| e.to_string())?;
    check(a == b && !a.is_empty(), format!("{} bytes, second run on {workers} workers", a.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<Criterion> = vec![
        ("worked example", Box::new(worked_example)),
        ("relaxed to strict conversion", Box::new(matrix_conversion)),
        ("reverse within one of optimal", Box::new(reverse_guarantee)),
        ("reverse beats largest fit", Box::new(reverse_versus_largest_fit)),
        ("largest fit beats average fit", Box::new(largest_fit_versus_average_fit)),
        ("permutation sum reduction", Box::new(perm_sum_round_trip)),
        ("target score construction", Box::new(target_construction)),
        ("diagonal sums example", Box::new(pmrds_example)),
        ("urn repeat law", Box::new(urn_law)),
        ("desk-scale table", Box::new(|| desk_table(dir.path()))),
        ("deterministic output", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {}: {name}: {detail}", k + 1);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
