//! Acceptance suite: one check per criterion, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the summary is printed on
//! every `cargo test`. Exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use blockcur::bench::{self, storage, ImputationConfig, Placement, StorageLayout, SurrogateSpec, SweepConfig};
use blockcur::cur::{block_cur, rank_k_cur};
use blockcur::leverage::{block_leverage, block_stable_rank_nonzero, column_block_stable_rank, column_leverage};
use blockcur::matcore::{numerical_rank, svd};
use blockcur::sketch::harness::{validate_multiplication, validate_regression};
use blockcur::sketch::{frobenius_block_probs, multiplication_blocks, regression_blocks, regression_probs};
use blockcur::{BlockPartition, CurConfig, Generator, Matrix, RowSampling, SamplingMode, Variant};
use rand::Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn random_partition(n: usize, rng: &mut Generator) -> BlockPartition {
    let blocks = rng.random_range(1..=n);
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, n - 1, blocks - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    BlockPartition::from_cut_points(n, &cuts).unwrap()
}

struct Instance {
    v_k: Matrix,
    k: usize,
    part: BlockPartition,
}

/// The shared sweep of criteria 1 and 2.
fn score_sweep() -> Vec<Instance> {
    let mut rng = Generator::from_seed(1001);
    (0..100)
        .map(|_| {
            let m = rng.random_range(2..=64);
            let n = rng.random_range(2..=64);
            let rank = rng.random_range(1..=m.min(n));
            let a: Matrix = bench::synthetic_low_rank(m, n, rank, 0.0, &mut rng).unwrap();
            let k = rng.random_range(1..=rank);
            let v_k = svd(&a).unwrap().truncate(k).right().clone();
            let part = random_partition(n, &mut rng);
            Instance { v_k, k, part }
        })
        .collect()
}

fn criterion_1() -> Verdict {
    let mut worst_sum: f64 = 0.0;
    let mut worst_col: f64 = 0.0;
    for inst in score_sweep() {
        let scores = block_leverage(&inst.v_k, &inst.part).unwrap();
        worst_sum = worst_sum.max((scores.total() - inst.k as f64).abs());
        // diagonal of the projector V_k·V_kᵀ, the per-column definition
        let proj = inst.v_k.matmul(&inst.v_k.transpose()).unwrap();
        let singles = BlockPartition::singletons(inst.v_k.rows()).unwrap();
        let s1 = block_leverage(&inst.v_k, &singles).unwrap();
        let cols = column_leverage(&inst.v_k).unwrap();
        for j in 0..inst.v_k.rows() {
            worst_col = worst_col.max((s1.scores()[j] - proj.get(j, j)).abs());
            worst_col = worst_col.max((s1.scores()[j] - cols.scores()[j]).abs());
        }
    }
    verdict(
        worst_sum <= 1e-10 && worst_col <= 1e-12,
        format!("max |sum - k| = {worst_sum:.2e} (tol 1e-10), max |s=1 score - column score| = {worst_col:.2e} (tol 1e-12)"),
    )
}

fn random_orthogonal(n: usize, rng: &mut Generator) -> Matrix {
    let g: Matrix = bench::synthetic_low_rank(n, n, n, 0.0, rng).unwrap();
    let s = svd(&g).unwrap();
    s.left().matmul(&s.right().transpose()).unwrap()
}

fn criterion_2() -> Verdict {
    let mut ok = true;
    let mut range = (f64::INFINITY, 0.0f64);
    for inst in score_sweep() {
        let alpha = block_stable_rank_nonzero(&inst.v_k, &inst.part).unwrap().unwrap();
        let cap = inst.part.max_width() as f64;
        range = (range.0.min(alpha), range.1.max(alpha / cap));
        ok &= alpha >= 1.0 - 1e-10 && alpha <= cap + 1e-10;
    }
    // rank-one blocks: block g of A is u_g·w_gᵀ with orthonormal u_g
    let mut rng = Generator::from_seed(1002);
    let (s, blocks) = (4, 5);
    let u = random_orthogonal(8, &mut rng);
    let mut a = Matrix::zeros(8, s * blocks);
    for g in 0..blocks {
        let w: Vec<f64> = (0..s).map(|_| rng.random_range(0.5..2.0)).collect();
        let outer = Matrix::outer(&u.column(g), &w);
        a = Matrix::from_fn(8, s * blocks, |i, j| if j / s == g { outer.get(i, j % s) } else { a.get(i, j) });
    }
    let part = BlockPartition::uniform(s * blocks, s).unwrap();
    let v = svd(&a).unwrap().truncate(blocks).right().clone();
    let alpha_one = block_stable_rank_nonzero(&v, &part).unwrap().unwrap();
    // equal singular values: a random orthogonal matrix, k = n
    let q = random_orthogonal(12, &mut rng);
    let part3 = BlockPartition::uniform(12, 3).unwrap();
    let vq = svd(&q).unwrap().right().clone();
    let alpha_s = block_stable_rank_nonzero(&vq, &part3).unwrap().unwrap();
    let passed = ok && (alpha_one - 1.0).abs() <= 1e-10 && (alpha_s - 3.0).abs() <= 1e-10;
    verdict(
        passed,
        format!(
            "sweep within [1, max width]: {ok} (min alpha {:.6}, max alpha/width {:.6}); rank-one blocks alpha = {alpha_one:.12}; equal singular values alpha = {alpha_s:.12} (s = 3)",
            range.0, range.1
        ),
    )
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut rng = Generator::from_seed(1003);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let m = rng.random_range(10..=40);
        let n = rng.random_range(10..=40);
        let k = rng.random_range(1..=5);
        let a: Matrix = bench::synthetic_low_rank(m, n, k, 0.0, &mut rng).unwrap();
        let s = rng.random_range(1..=5);
        let part = BlockPartition::uniform(n, s).unwrap();
        let config = CurConfig::new(k, 2 * k, part.len())
            .with_mode(SamplingMode::WithoutReplacement)
            .with_row_sampling(RowSampling::UniformDistinct);
        let run = block_cur(&a, &part, &config, &mut rng).unwrap();
        assert_eq!(numerical_rank(&run.r).unwrap(), k, "row sample must span");
        worst = worst.max(run.metrics.rel_to_a);
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-8 && elapsed < Duration::from_secs(10),
        format!("max relative error {worst:.2e} (tol 1e-8), {:.2} s (limit 10 s)", elapsed.as_secs_f64()),
    )
}

fn criterion_4() -> Verdict {
    let (delta, eps) = (0.2, 0.5);
    let mut rng = Generator::from_seed(1004);
    let mut ok = true;
    let mut lines = Vec::new();
    for (p, part) in [
        (5, BlockPartition::uniform(6, 2).unwrap()),
        (3, BlockPartition::uniform(6, 1).unwrap()),
        (4, BlockPartition::from_cut_points(6, &[1, 4]).unwrap()),
    ] {
        let a: Matrix = bench::synthetic_low_rank(4, 6, 4, 0.0, &mut rng).unwrap();
        let b: Matrix = bench::synthetic_low_rank(6, p, p.min(6), 0.0, &mut rng).unwrap();
        let alpha = column_block_stable_rank(&a, &part).unwrap().unwrap();
        let g = multiplication_blocks(delta, eps, alpha).unwrap();
        let probs = frobenius_block_probs(&a, &part, 1.0).unwrap().distribution().unwrap();
        let rep = validate_multiplication(&a, &b, &part, &probs, 1.0, delta, g, 2000, &mut rng).unwrap();
        let z = rep.mean_max_z.unwrap();
        ok &= rep.passed && z <= 3.0;
        lines.push(format!("B 6x{p}, G={}, g={g}: rate {:.4} <= {:.4}, max mean z {z:.2}", part.len(), rep.violation_rate, delta + rep.slack));
    }
    verdict(ok, lines.join("; "))
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let (delta, eps) = (0.2, 0.5);
    let mut rng = Generator::from_seed(1005);
    let a: Matrix = bench::synthetic_low_rank(6, 12, 6, 0.0, &mut rng).unwrap();
    let b: Matrix = bench::synthetic_low_rank(3, 12, 3, 0.0, &mut rng).unwrap();
    let part = BlockPartition::uniform(12, 3).unwrap();
    let (_, v) = regression_probs(&b, &part).unwrap();
    let alpha = block_stable_rank_nonzero(&v, &part).unwrap().unwrap();
    let g = regression_blocks(3, alpha, eps, delta, 1.0).unwrap();
    let rep = validate_regression(&a, &b, &part, eps, delta, g, SamplingMode::WithReplacement, 1000, &mut rng).unwrap();
    let failures = rep.dominance_failures.unwrap();
    verdict(
        rep.passed && failures == 0,
        format!(
            "alpha {alpha:.3}, g = {g} (constant 1): rate {:.4} <= {:.4}; residual >= optimal in {}/1000 trials; {:.1} s",
            rep.violation_rate,
            delta + rep.slack,
            1000 - failures,
            start.elapsed().as_secs_f64()
        ),
    )
}

struct SyntheticSweep {
    a: Matrix,
    part: BlockPartition,
    single: bench::SweepTable,
    boosted: bench::SweepTable,
    elapsed: Duration,
}

fn synthetic_sweep() -> SyntheticSweep {
    let start = Instant::now();
    let a: Matrix = bench::synthetic_low_rank(200, 200, 20, 0.1, &mut Generator::from_seed(1006)).unwrap();
    let part = BlockPartition::uniform(200, 10).unwrap();
    let mut config = SweepConfig::new(20, 40, (1..=6).collect(), (0..10).collect());
    let single = bench::error_vs_g_sweep(&a, &part, &config).unwrap();
    config.trials = 3;
    config.variants = vec![Variant::U];
    let boosted = bench::error_vs_g_sweep(&a, &part, &config).unwrap();
    SyntheticSweep {
        a,
        part,
        single,
        boosted,
        elapsed: start.elapsed(),
    }
}

fn criterion_6(sw: &SyntheticSweep) -> Verdict {
    let medians: Vec<f64> = (1..=6).map(|g| sw.single.row(g, Variant::U).unwrap().median_rel_to_best_k.unwrap()).collect();
    let boosted: Vec<f64> = (1..=6).map(|g| sw.boosted.row(g, Variant::U).unwrap().median_rel_to_best_k.unwrap()).collect();
    let monotone = sw.single.median_non_increasing(Variant::U);
    let at6 = medians[5] <= 1.5;
    let boost_ok = boosted.iter().zip(&medians).all(|(b, s)| b <= s);
    let fast = sw.elapsed < Duration::from_secs(60);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    verdict(
        monotone && at6 && boost_ok && fast,
        format!(
            "medians [{}]: non-increasing {monotone}, <= 1.5 at g=6 {at6}; boosted t=3 [{}] <= single {boost_ok}; {:.1} s (limit 60 s)",
            fmt(&medians),
            fmt(&boosted),
            sw.elapsed.as_secs_f64()
        ),
    )
}

fn criterion_7(sw: &SyntheticSweep) -> Verdict {
    let mut min_ratio = f64::INFINITY;
    for c in sw.single.cells.iter().filter(|c| c.variant == Variant::Uk) {
        min_ratio = min_ratio.min(c.rel_to_best_k.unwrap());
    }
    let mut max_rank = 0;
    let mut rng = Generator::from_seed(1007);
    for g in [1, 3, 6] {
        for _ in 0..3 {
            let config = CurConfig::new(20, 40, g).with_mode(SamplingMode::WithoutReplacement);
            let run = block_cur(&sw.a, &sw.part, &config, &mut rng).unwrap();
            let rk = rank_k_cur(&sw.a, &run, 20).unwrap();
            min_ratio = min_ratio.min(rk.metrics.rel_to_best_k.unwrap());
            max_rank = max_rank.max(numerical_rank(&rk.approximation().unwrap()).unwrap());
        }
    }
    verdict(
        min_ratio >= 1.0 - 1e-9 && max_rank <= 20,
        format!("min U_k ratio {min_ratio:.6} (>= 1 - 1e-9), max rank(C U_k R) {max_rank} (<= 20)"),
    )
}

fn criterion_8() -> Verdict {
    let mut rng = Generator::from_seed(1008);
    let mut dominated = 0;
    let mut oracle_ok = true;
    for _ in 0..1000 {
        let blocks = rng.random_range(1..=40);
        let s = rng.random_range(1..=6);
        let executors = rng.random_range(1..=16);
        let placement = if rng.random_bool(0.5) { Placement::RoundRobin } else { Placement::Random };
        let part = BlockPartition::uniform(blocks * s, s).unwrap();
        let layout = StorageLayout::build(placement, blocks, executors, 1.0, 0.01, &mut rng).unwrap();
        let g = rng.random_range(1..=blocks);
        let plan = storage::random_block_plan(&part, g, &mut rng).unwrap();
        let check = storage::compare_access(&layout, &part, &plan, 3, &mut rng).unwrap();
        if check.block.executors_contacted <= check.same_columns.executors_contacted {
            dominated += 1;
        }
        let owners: BTreeSet<usize> = plan.blocks().iter().map(|&b| layout.placement()[b]).collect();
        oracle_ok &= owners.len() == check.block.executors_contacted;
    }
    let mut formulas_ok = true;
    for k in 1..=10 {
        for &eps in &[0.1, 0.3, 0.5, 0.9] {
            for &delta in &[0.01, 0.1, 0.5] {
                let base = storage::ops_count_formulas(k, eps, delta, 1.0).unwrap();
                formulas_ok &= base.block == base.traditional;
                let s = 10.0;
                let mut prev = 1.0;
                for step in 1..=50 {
                    let alpha = 1.0 + (s - 1.0) * step as f64 / 50.0;
                    let f = storage::ops_count_formulas(k, eps, delta, alpha).unwrap();
                    formulas_ok &= f.block <= f.traditional && f.ratio() < prev;
                    prev = f.ratio();
                }
            }
        }
    }
    verdict(
        dominated == 1000 && oracle_ok && formulas_ok,
        format!("block <= column contacts in {dominated}/1000 layouts; contacts match enumeration {oracle_ok}; formulas block <= traditional, equal at alpha = 1, ratio decreasing: {formulas_ok}"),
    )
}

fn bcur(dir: &Path, args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_bcur")).current_dir(dir).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = ["gen", "--seed", "5", "--rows", "30", "--cols", "40", "--rank", "4", "--noise", "0.01", "--out", "a.csv"];
    let runs: Vec<(&str, Vec<&str>, Option<&str>)> = vec![
        ("gen", gen.to_vec(), None),
        (
            "decompose",
            vec!["decompose", "--input", "a.csv", "--seed", "7", "--k", "4", "--rows", "12", "--blocks", "5", "--block-size", "4", "--out-dir", "out", "--trials", "2"],
            Some("out/report.json"),
        ),
        ("scores", vec!["scores", "--input", "a.csv", "--k", "4", "--block-size", "5", "--out", "s.csv"], None),
        ("validate", vec!["validate", "mult", "--seed", "9", "--trials", "300", "--block-size", "2"], None),
        ("simulate", vec!["simulate", "--seed", "3", "--blocks", "12", "--block-size", "4", "--executors", "5", "--placement", "random", "--random-blocks", "4"], None),
        (
            "sweep",
            vec!["sweep", "--input", "a.csv", "--seed", "11", "--replicates", "3", "--k", "4", "--rows", "10", "--g", "1,2,4", "--block-size", "4"],
            None,
        ),
    ];
    let mut identical = Vec::new();
    for (name, args, file) in &runs {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let (code, stdout) = bcur(d, args);
            assert_eq!(code, 0, "{name} failed");
            let bytes = match file {
                Some(f) => std::fs::read(d.join(f)).unwrap(),
                None => stdout,
            };
            assert!(!bytes.is_empty(), "{name} produced no JSON");
            outputs.push(bytes);
        }
        identical.push((name.to_string(), outputs[0] == outputs[1]));
    }
    let all = identical.iter().all(|(_, same)| *same);
    verdict(
        all,
        identical.iter().map(|(n, s)| format!("{n}: {}", if *s { "identical" } else { "DIFFERENT" })).collect::<Vec<_>>().join(", "),
    )
}

fn criterion_10() -> Verdict {
    let spec = SurrogateSpec::default();
    let s: bench::Surrogate<f64> = bench::planted_block_surrogate(&spec, &mut Generator::from_seed(1010)).unwrap();
    let config = ImputationConfig {
        k: 5,
        observed: 20,
        g_list: vec![2, 4, 6, 8, 10],
        seeds: (0..10).collect(),
    };
    let table = bench::imputation_sweep(&s.matrix, &s.partition, &config).unwrap();
    let medians: Vec<String> = table.rows.iter().map(|r| format!("{:.4}", r.median)).collect();
    let mut hits = 0;
    for seed in 0..10 {
        let sur: bench::Surrogate<f64> = bench::planted_block_surrogate(&spec, &mut Generator::from_seed(2000 + seed)).unwrap();
        let timeline = bench::leverage_timeline(&sur.matrix, &sur.partition, 5, Some(4.0)).unwrap();
        if timeline.argmax() == Some(sur.planted_block) {
            hits += 1;
        }
    }
    verdict(
        table.median_decreasing() && hits >= 9,
        format!(
            "24x1000, 20 observed / 4 held out, medians over g = 2,4,6,8,10: [{}] decreasing {}; planted block is argmax in {hits}/10 seeds",
            medians.join(", "),
            table.median_decreasing()
        ),
    )
}

fn run(id: usize, f: impl FnOnce() -> Verdict) -> bool {
    let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        verdict(false, format!("panicked: {msg}"))
    });
    println!("criterion {id:>2}: {}  {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
    v.passed
}

fn main() {
    // libtest arguments such as --nocapture are accepted and ignored
    let mut results = vec![
        run(1, criterion_1),
        run(2, criterion_2),
        run(3, criterion_3),
        run(4, criterion_4),
        run(5, criterion_5),
    ];
    let sweep = catch_unwind(synthetic_sweep);
    match &sweep {
        Ok(sw) => {
            results.push(run(6, || criterion_6(sw)));
            results.push(run(7, || criterion_7(sw)));
        }
        Err(_) => {
            results.push(run(6, || verdict(false, "synthetic sweep panicked")));
            results.push(run(7, || verdict(false, "synthetic sweep panicked")));
        }
    }
    results.push(run(8, criterion_8));
    results.push(run(9, criterion_9));
    results.push(run(10, criterion_10));
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
