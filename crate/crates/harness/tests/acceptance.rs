//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero on any failure.
//!
//! Every tolerance, sample count and budget is a constant below.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use psl_eps::domain::simplex_project;
use psl_eps::eps::{crowding_distance, fast_nondominated_sort, run_training, CountingProblem, EpsConfig, Sampler};
use psl_eps::indicators::{cached_reference_set, hypervolume_exact, hypervolume_mc};
use psl_eps::{
    Benchmark, IdealPoint, OptimizerConfig, ParetoSetModel, PreferenceVector, Problem, RngStream, ScalarizationKind,
};
use psl_harness::analysis::{concentration_fraction, last_period_preferences, project_front, CONCENTRATION_RADIUS, PROJECTION_OFFSET};
use psl_harness::matrix::{median, rows_csv, run_all, MatrixRow};
use psl_harness::{run_single, RunConfig, SamplerKind};

// 1: gradients
const GRAD_SAMPLES_PER_PROBLEM: usize = 20;
/// Bound on `|g - fd| / max(|g|, |fd|)` in the 2-norm, per (theta, lambda) sample.
const GRAD_REL_TOL: f64 = 1e-3;
const GRAD_STEP: f64 = 1e-6;
/// Required relative gap between the largest and second largest MTCH term.
const ARGMAX_GAP: f64 = 1e-3;
const GRAD_BUDGET: Duration = Duration::from_secs(60);

// 2: sorting and crowding
const SORT_INSTANCES: usize = 500;
const SORT_MAX_N: usize = 64;
const SORT_BUDGET: Duration = Duration::from_secs(30);

// 3: hypervolume
const HV_INSTANCES: usize = 200;
const HV_MC_SAMPLES: usize = 20_000;
const HV_SE_MULTIPLE: f64 = 3.0;
const HV_ABS_SLACK: f64 = 1e-12;
const HV_BUDGET: Duration = Duration::from_secs(120);

// 4: simplex and evaluation counts
const SIMPLEX_SWEEP: usize = 10_000;
const SIMPLEX_TOL: f64 = 1e-9;

// 6, 7: statistical
const STAT_SEEDS: u64 = 11;
const STAT_BUDGET: Duration = Duration::from_secs(45 * 60);
const CONCENTRATION_MIN_WINS: usize = 8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_preference(rng: &mut RngStream, m: usize, low: f64) -> PreferenceVector<f64> {
    loop {
        let raw: Vec<f64> = (0..m).map(|_| rng.exponential()).collect();
        let p = simplex_project(&raw).unwrap();
        if p.iter().all(|&w| w >= low) {
            return p;
        }
    }
}

/// Random parameters scaled by each layer's fan-in, the output layer included.
fn randomize(model: &mut ParetoSetModel<f64>, rng: &mut RngStream) {
    let sizes = model.layer_sizes().to_vec();
    let mut offset = 0;
    let params = model.parameters_mut();
    for w in sizes.windows(2) {
        let count = w[0] * w[1] + w[1];
        let bound = 1.5 / (w[0] as f64).sqrt();
        for p in &mut params[offset..offset + count] {
            *p = rng.uniform_in(-bound, bound);
        }
        offset += count;
    }
}

fn mtch_terms(f: &[f64], lambda: &[f64], ideal: &IdealPoint<f64>) -> Vec<f64> {
    f.iter()
        .zip(ideal.z())
        .zip(lambda)
        .map(|((fi, zi), li)| (fi - (zi - ideal.epsilon())) / li)
        .collect()
}

fn criterion_1() -> Outcome {
    let mut rng = RngStream::new(101);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_entry: f64 = 0.0;
    let mut checked = 0;
    for kind in Benchmark::ALL {
        let problem = kind.problem::<f64>();
        let spec = problem.spec();
        let m = spec.n_objectives;
        for scal in [ScalarizationKind::Ls, ScalarizationKind::Mtch] {
            let mut done = 0;
            while done < GRAD_SAMPLES_PER_PROBLEM {
                let mut model = ParetoSetModel::for_problem(spec, &[64, 64], &mut rng).unwrap();
                randomize(&mut model, &mut rng);
                let lambda = random_preference(&mut rng, m, 0.02);
                let batch = vec![lambda.clone()];
                let x = model.forward(&batch, spec).unwrap();
                let f = problem.evaluate(&x[0]).unwrap();
                let z: Vec<f64> = f.iter().map(|v| v - rng.uniform_in(0.1, 1.0) * (v.abs() + 1.0)).collect();
                let ideal = IdealPoint::new(z, 0.1).unwrap();
                if scal == ScalarizationKind::Mtch {
                    let mut t = mtch_terms(&f, &lambda, &ideal);
                    t.sort_by(|a, b| b.total_cmp(a));
                    if (t[0] - t[1]) <= ARGMAX_GAP * t[0].abs() {
                        continue;
                    }
                }
                let lg = model.loss_and_gradient(&batch, &problem, scal, &ideal).unwrap();
                let mut fd = vec![0.0; lg.gradient.len()];
                for (k, fd_k) in fd.iter_mut().enumerate() {
                    let theta = model.parameters()[k];
                    let h = GRAD_STEP * theta.abs().max(1e-2);
                    model.parameters_mut()[k] = theta + h;
                    let up = model.batch_loss(&batch, &problem, scal, &ideal).unwrap();
                    model.parameters_mut()[k] = theta - h;
                    let down = model.batch_loss(&batch, &problem, scal, &ideal).unwrap();
                    model.parameters_mut()[k] = theta;
                    *fd_k = (up - down) / (2.0 * h);
                }
                let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
                let diff = norm(&mut lg.gradient.iter().zip(&fd).map(|(g, f)| g - f));
                let denom = norm(&mut lg.gradient.iter().copied()).max(norm(&mut fd.iter().copied())).max(1e-300);
                worst = worst.max(diff / denom);
                let scale = lg.gradient.iter().fold(0.0f64, |a, g| a.max(g.abs()));
                for (g, f) in lg.gradient.iter().zip(&fd) {
                    worst_entry = worst_entry.max((g - f).abs() / scale.max(1e-300));
                }
                done += 1;
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < GRAD_REL_TOL && elapsed < GRAD_BUDGET,
        format!(
            "{checked} (theta, lambda) pairs, worst relative error {worst:.2e} (tol {GRAD_REL_TOL:e}), worst entry gap {worst_entry:.2e} of max |grad|"
        ),
    )
}

/// Repeatedly strips the points nobody dominates.
fn peel(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let dominates = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y);
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates(&points[j], &points[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// Deb's crowding distance, ties broken by position.
fn crowding_oracle(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    let mut d = vec![0.0; n];
    if n == 0 {
        return d;
    }
    for k in 0..front[0].len() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| front[a][k].total_cmp(&front[b][k]).then(a.cmp(&b)));
        d[idx[0]] = f64::INFINITY;
        d[idx[n - 1]] = f64::INFINITY;
        let span = front[idx[n - 1]][k] - front[idx[0]][k];
        if span > 0.0 {
            for w in 1..n - 1 {
                d[idx[w]] += (front[idx[w + 1]][k] - front[idx[w - 1]][k]) / span;
            }
        }
    }
    d
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(202);
    let mut mismatches = 0;
    for inst in 0..SORT_INSTANCES {
        let n = 1 + rng.below(SORT_MAX_N);
        let m = 2 + rng.below(2);
        // every third instance is on a coarse grid so ties and duplicates occur
        let coarse = inst % 3 == 0;
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..m)
                    .map(|_| if coarse { rng.below(5) as f64 } else { rng.uniform() })
                    .collect()
            })
            .collect();
        let fast = fast_nondominated_sort(&pts);
        let brute = peel(&pts);
        let as_sets = |fs: &[Vec<usize>]| fs.iter().map(|f| f.iter().copied().collect::<BTreeSet<_>>()).collect::<Vec<_>>();
        if as_sets(&fast) != as_sets(&brute) {
            mismatches += 1;
            continue;
        }
        for front in &fast {
            let members: Vec<Vec<f64>> = front.iter().map(|&i| pts[i].clone()).collect();
            let got = crowding_distance::<f64, _>(&members);
            let want = crowding_oracle(&members);
            if got != want {
                mismatches += 1;
                break;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < SORT_BUDGET,
        format!("{SORT_INSTANCES} instances, {mismatches} mismatches, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(303);
    let mut worst_z: f64 = 0.0;
    let mut outside = 0;
    for inst in 0..HV_INSTANCES {
        let m = 2 + inst % 2;
        let n = 1 + rng.below(20);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.uniform()).collect()).collect();
        let reference = vec![1.0; m];
        let exact = hypervolume_exact(&pts, &reference).unwrap();
        let mc = hypervolume_mc(&pts, &reference, HV_MC_SAMPLES, &mut rng).unwrap();
        let gap = (exact - mc.value).abs();
        if gap > HV_SE_MULTIPLE * mc.standard_error + HV_ABS_SLACK {
            outside += 1;
        }
        if mc.standard_error > 0.0 {
            worst_z = worst_z.max(gap / mc.standard_error);
        }
    }
    let closed = [
        (vec![vec![0.5, 0.5]], vec![1.0, 1.0], 0.25f64),
        (vec![vec![0.25, 0.75], vec![0.75, 0.25]], vec![1.0, 1.0], 0.3125),
        (vec![vec![0.5, 0.5, 0.5]], vec![1.0, 1.0, 1.0], 0.125),
        (vec![vec![2.0, 0.0]], vec![1.0, 1.0], 0.0),
    ];
    let closed_ok = closed
        .iter()
        .all(|(p, r, want)| (hypervolume_exact(p, r).unwrap() - want).abs() < 1e-15);
    let elapsed = start.elapsed();
    outcome(
        outside == 0 && closed_ok && elapsed < HV_BUDGET,
        format!(
            "{HV_INSTANCES} instances, {outside} beyond {HV_SE_MULTIPLE} SE (max {worst_z:.2} SE), closed forms {}, {:.2}s",
            if closed_ok { "ok" } else { "WRONG" },
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut bad = 0;
    let mut swept = 0;
    let mut counts = Vec::new();
    for kind in [Benchmark::Zdt3, Benchmark::Dtlz7] {
        let m = kind.dims().0;
        let optimizer = OptimizerConfig {
            max_iterations: SIMPLEX_SWEEP / 8,
            ..OptimizerConfig::default()
        };
        let aggressive = EpsConfig {
            period_length: 125,
            crossover_prob: 1.0,
            mutation_prob: 1.0,
            ..EpsConfig::default()
        };
        let samplers = [
            Sampler::Uniform,
            Sampler::Eps(EpsConfig {
                period_length: 125,
                ..EpsConfig::default()
            }),
            Sampler::Eps(aggressive),
        ];
        let mut evals = Vec::new();
        for sampler in samplers {
            let problem = CountingProblem::new(kind.problem::<f64>());
            let base = RngStream::new(404);
            let mut model = ParetoSetModel::for_problem(problem.spec(), &[64, 64], &mut base.substream(0)).unwrap();
            let mut seen = 0;
            run_training(
                &problem,
                &mut model,
                ScalarizationKind::Mtch,
                &optimizer,
                &sampler,
                0.1,
                &mut base.substream(1),
                |_, rec| {
                    for p in &rec.preferences {
                        seen += 1;
                        let w = p.weights();
                        let sum: f64 = w.iter().sum();
                        if w.len() != m || w.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > SIMPLEX_TOL {
                            bad += 1;
                        }
                    }
                    Ok(())
                },
            )
            .unwrap();
            swept += seen;
            evals.push(problem.evaluations());
        }
        counts.push((kind, evals));
    }
    let counts_equal = counts
        .iter()
        .all(|(_, e)| e.iter().all(|&c| c == SIMPLEX_SWEEP));
    outcome(
        bad == 0 && counts_equal && swept == 6 * SIMPLEX_SWEEP,
        format!(
            "{swept} preferences checked, {bad} invalid; evaluations {:?}",
            counts.iter().map(|(k, e)| format!("{k}={e:?}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut identical = 0;
    let mut total = 0;
    for (kind, scal) in [
        (Benchmark::Zdt3, ScalarizationKind::Mtch),
        (Benchmark::Dtlz7, ScalarizationKind::Tch),
        (Benchmark::Re21, ScalarizationKind::Ls),
    ] {
        for seed in 0..2 {
            let mut c = RunConfig {
                problem: kind,
                scalarization: scal,
                seed,
                ..RunConfig::default()
            };
            c.optimizer.max_iterations = 300;
            c.eps.period_length = 300;
            c.sampler = SamplerKind::Uniform;
            let uni = run_single(&c, None).unwrap();
            c.sampler = SamplerKind::Eps;
            let eps = run_single(&c, None).unwrap();
            total += 1;
            if uni.trace_csv().as_bytes() == eps.trace_csv().as_bytes() {
                identical += 1;
            }
        }
    }
    outcome(identical == total, format!("{identical}/{total} traces byte-identical"))
}

fn stat_config(kind: Benchmark, scal: ScalarizationKind, sampler: SamplerKind, seed: u64) -> RunConfig {
    // 1000 iterations, batch 8, learning rate 0.001, T = 100 are the defaults
    RunConfig {
        problem: kind,
        scalarization: scal,
        sampler,
        seed,
        ..RunConfig::default()
    }
}

fn criterion_6(budget_start: Instant) -> Outcome {
    let mut cells = Vec::new();
    let mut all_better = true;
    for kind in [Benchmark::Zdt3, Benchmark::Dtlz5, Benchmark::Dtlz7] {
        for scal in [ScalarizationKind::Mtch, ScalarizationKind::Tch] {
            let mut medians = [0.0; 2];
            for (slot, sampler) in SamplerKind::ALL.into_iter().enumerate() {
                let configs: Vec<RunConfig> = (0..STAT_SEEDS).map(|s| stat_config(kind, scal, sampler, s)).collect();
                let finals: Vec<f64> = run_all(&configs, None, true)
                    .unwrap()
                    .iter()
                    .map(|r| r.final_log_hv_diff().unwrap_or(f64::NAN))
                    .collect();
                medians[slot] = median(&finals);
            }
            let better = medians[1] < medians[0];
            all_better &= better;
            cells.push(format!(
                "{kind}/{scal} uniform {:.3} eps {:.3} {}",
                medians[0],
                medians[1],
                if better { "ok" } else { "NOT LOWER" }
            ));
        }
    }
    let elapsed = budget_start.elapsed();
    outcome(
        all_better && elapsed < STAT_BUDGET,
        format!("medians over {STAT_SEEDS} seeds: {}", cells.join("; ")),
    )
}

fn criterion_7() -> Outcome {
    let reference = cached_reference_set(Benchmark::Dtlz7).unwrap();
    let targets = project_front(&reference.front.points, PROJECTION_OFFSET);
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..STAT_SEEDS {
        let mut fractions = [0.0; 2];
        for (slot, sampler) in SamplerKind::ALL.into_iter().enumerate() {
            let mut c = stat_config(Benchmark::Dtlz7, ScalarizationKind::Mtch, sampler, seed);
            c.log_preferences = true;
            let record = run_single(&c, None).unwrap();
            let last = last_period_preferences(&record, c.eps.period_length);
            fractions[slot] = concentration_fraction(&last, &targets, CONCENTRATION_RADIUS);
        }
        if fractions[1] > fractions[0] {
            wins += 1;
        }
        pairs.push(format!("{:.2}/{:.2}", fractions[0], fractions[1]));
    }
    outcome(
        wins >= CONCENTRATION_MIN_WINS,
        format!(
            "eps above uniform in {wins}/{STAT_SEEDS} seeds (need {CONCENTRATION_MIN_WINS}); uniform/eps fractions {}",
            pairs.join(" ")
        ),
    )
}

fn without_wallclock(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_8() -> Outcome {
    let mut configs = Vec::new();
    for kind in [Benchmark::Zdt3, Benchmark::Dtlz7, Benchmark::Re33] {
        for sampler in SamplerKind::ALL {
            for seed in 0..3 {
                let mut c = stat_config(kind, ScalarizationKind::Mtch, sampler, seed);
                c.optimizer.max_iterations = 200;
                c.eps.period_length = 20;
                configs.push(c);
            }
        }
    }
    let serial_dir = tempfile::tempdir().unwrap();
    let parallel_dir = tempfile::tempdir().unwrap();
    let serial = run_all(&configs, Some(serial_dir.path()), false).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let parallel = pool.install(|| run_all(&configs, Some(parallel_dir.path()), true)).unwrap();
    let again = run_all(&configs, None, false).unwrap();

    let mut same = 0;
    for ((s, p), a) in serial.iter().zip(&parallel).zip(&again) {
        let name = s.config.dir_name();
        let on_disk = |root: &std::path::Path| std::fs::read(root.join(&name).join("trace.csv")).unwrap();
        let disk_s = on_disk(serial_dir.path());
        if disk_s == on_disk(parallel_dir.path()) && disk_s == a.trace_csv().into_bytes() && s.trace_csv() == p.trace_csv() {
            same += 1;
        }
    }
    let rows = |rs: &[psl_harness::RunRecord]| without_wallclock(&rows_csv(&rs.iter().map(MatrixRow::from_record).collect::<Vec<_>>()));
    let rows_same = rows(&serial) == rows(&parallel);
    outcome(
        same == configs.len() && rows_same,
        format!(
            "{same}/{} trace CSVs byte-identical across serial, 4-thread parallel and repeat runs; rows {}",
            configs.len(),
            if rows_same { "identical" } else { "DIFFER" }
        ),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    // numeric arguments pick criteria, as in `cargo test --test acceptance -- 2 5`
    let only: Vec<usize> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let criteria: [(&str, Box<dyn Fn() -> Outcome>); 8] = [
        ("gradient correctness", Box::new(criterion_1)),
        ("sorting and crowding oracles", Box::new(criterion_2)),
        ("hypervolume oracles", Box::new(criterion_3)),
        ("simplex and evaluation counts", Box::new(criterion_4)),
        ("eps degeneracy at T = T_max", Box::new(criterion_5)),
        ("directional comparison, MTCH and TCH", Box::new(|| criterion_6(Instant::now()))),
        ("DTLZ7 concentration proxy", Box::new(criterion_7)),
        ("reproducibility", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} [{}] {name}: {} ({:.1}s)",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
