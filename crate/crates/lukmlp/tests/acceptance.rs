//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fail.

use std::path::Path;
use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use lukmlp::cli::{cmd_gen_data, cmd_train, GenDataArgs, TrainArgs};
use lukmlp_core::formula::extract;
use lukmlp_core::network::{end_condition, forward_layer};
use lukmlp_core::selftest::{run_suite, Standard};
use lukmlp_core::trace::{check_trace, symbolic_train_loop};
use lukmlp_core::training::{apply_update, backward_aggregate, finite_diff_check, parameters_closed};
use lukmlp_core::{
    Action, Aggregator, Axiom, Configuration, Digest, NetworkState, Prng, Sample, TrainConfig,
    TraceStep, UnitValue,
};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

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

fn u(x: f64) -> UnitValue {
    UnitValue::new(x).unwrap()
}

fn random_dims(rng: &mut Prng, max_width: u64, max_layers: u64) -> Vec<usize> {
    let layers = 1 + rng.below(max_layers) as usize;
    (0..=layers).map(|_| 1 + rng.below(max_width) as usize).collect()
}

fn random_input(rng: &mut Prng, n: usize) -> Vec<UnitValue> {
    (0..n).map(|_| u(rng.next_f64())).collect()
}

fn algebra_suite() -> Outcome {
    let start = Instant::now();
    let report = run_suite(&Standard, 100_000, 2024, 1e-9);
    let elapsed = start.elapsed();
    let failed: Vec<_> = report.results.iter().filter(|r| r.failures > 0).map(|r| r.name).collect();
    outcome(
        failed.is_empty() && elapsed < Duration::from_secs(30),
        format!(
            "{} equations x 1e5 samples, failed {:?}, {:.2?}",
            report.results.len(),
            failed,
            elapsed
        ),
    )
}

fn worked_example_layers() -> Outcome {
    let net = NetworkState::worked_example();
    let h = [u(0.2), u(0.3)];
    let (_, a1) = forward_layer(&net.layers()[0], &h).unwrap();
    let l1_ok = (a1[0].get() - 0.27).abs() <= 1e-12 && (a1[1].get() - 0.25).abs() <= 1e-12;
    let (_, a2) = forward_layer(&net.layers()[1], &a1).unwrap();
    let l = &net.layers()[1];
    let oracle: Vec<f64> = (0..l.rows())
        .map(|i| {
            let s: f64 = (0..l.cols()).map(|j| l.weight(i, j).get() * a1[j].get()).sum();
            (s + l.bias(i).get()).min(1.0)
        })
        .collect();
    let l2_ok = a2.iter().zip(&oracle).all(|(a, o)| (a.get() - o).abs() <= 1e-12);
    outcome(
        l1_ok && l2_ok,
        format!(
            "layer 1 ({}, {}), layer 2 ({}, {}) vs oracle ({}, {})",
            a1[0], a1[1], a2[0], a2[1], oracle[0], oracle[1]
        ),
    )
}

fn end_consistency() -> Outcome {
    let e = end_condition(u(0.8), &[u(0.626)], u(0.1), Aggregator::Max).unwrap();
    outcome(
        (e.truth.get() - 0.926).abs() <= 1e-12 && !e.satisfied,
        format!("truth {} satisfied {}", e.truth, e.satisfied),
    )
}

fn extraction_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = Prng::new(4);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let dims = random_dims(&mut rng, 4, 3);
        let net = NetworkState::random_uniform(&dims, &mut rng).unwrap();
        let x = random_input(&mut rng, dims[0]);
        let out = net.predict(&x).unwrap();
        for (j, a) in out.iter().enumerate() {
            let v = extract(&net, j).unwrap().eval(&x).unwrap();
            worst = worst.max((v.get() - a.get()).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(60),
        format!("1e4 networks, max deviation {worst:e}, {elapsed:.2?}"),
    )
}

fn gradient_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = Prng::new(5);
    let (mut checked, mut agree, mut kinked) = (0usize, 0usize, 0usize);
    for _ in 0..1_000 {
        let dims = random_dims(&mut rng, 3, 2);
        let net = NetworkState::random(&dims, &mut rng).unwrap();
        let sample = Sample {
            input: random_input(&mut rng, dims[0]),
            target: u(rng.next_f64()),
        };
        let r = finite_diff_check(&net, &sample, Aggregator::Max, 1e-6, 1e-9).unwrap();
        checked += r.checked;
        agree += r.sign_agreements;
        kinked += r.kinked;
    }
    let rate = agree as f64 / checked.max(1) as f64;
    let elapsed = start.elapsed();
    outcome(
        checked > 0 && rate >= 0.99 && elapsed < Duration::from_secs(60),
        format!("1e3 networks, {agree}/{checked} signs agree ({rate:.4}), {kinked} kinked excluded, {elapsed:.2?}"),
    )
}

fn parameter_closure() -> Outcome {
    let mut rng = Prng::new(6);
    let mut violations = 0usize;
    let mut updates = 0usize;
    while updates < 10_000 {
        let dims = random_dims(&mut rng, 4, 3);
        let mut net = NetworkState::random_uniform(&dims, &mut rng).unwrap();
        let cfg = TrainConfig {
            eta: u(rng.next_f64()),
            ..TrainConfig::default()
        };
        for _ in 0..10 {
            let x = random_input(&mut rng, dims[0]);
            let cache = net.forward(&x).unwrap();
            let b = backward_aggregate(&net, &cache, u(rng.next_f64()), &cfg).unwrap();
            net = apply_update(&net, &b, &cfg);
            updates += 1;
            if !parameters_closed(&net) {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{updates} updates, {violations} violations"))
}

fn shift(v: UnitValue) -> UnitValue {
    u(if v.get() < 0.5 { v.get() + 0.25 } else { v.get() - 0.25 })
}

/// Changes one field of one step, or `None` if the step lacks that field.
fn mutate(trace: &[TraceStep], step: usize, field: usize) -> Option<Vec<TraceStep>> {
    let mut t = trace.to_vec();
    let s = &mut t[step];
    match field {
        0 => {
            s.axiom = match s.axiom {
                Axiom::N0 => Axiom::N1,
                Axiom::N1 => Axiom::N2,
                Axiom::N2 => Axiom::N3,
                Axiom::N3 => Axiom::N2,
                Axiom::N0E => Axiom::N0,
            }
        }
        1 => s.pre = Digest(s.pre.0 ^ 0x10),
        2 => s.post = Digest(s.post.0 ^ 0x100),
        3 => {
            let l = s.lambda.as_mut()?;
            l[0] = shift(l[0]);
        }
        4 => s.r = shift(s.r),
        5 => s.err = Some(shift(s.err?)),
        6 => match &mut s.action {
            Action::Init(v) | Action::Train(v) | Action::Stop(Some(v)) => v[0] = shift(v[0]),
            _ => return None,
        },
        _ => s.index += 1,
    }
    Some(t)
}

struct Run {
    init: Configuration,
    sample: Sample,
    cfg: TrainConfig,
}

fn random_run(rng: &mut Prng) -> Run {
    let dims = random_dims(rng, 3, 2);
    let net = NetworkState::random_uniform(&dims, rng).unwrap();
    let sample = Sample {
        input: random_input(rng, dims[0]),
        target: u(rng.next_f64()),
    };
    let cfg = TrainConfig {
        eps: u(0.3 * rng.next_f64()),
        max_epochs: 1 + rng.below(6) as u32,
        ..TrainConfig::default()
    };
    Run {
        init: Configuration::new(net),
        sample,
        cfg,
    }
}

fn trace_round_trip() -> Outcome {
    let mut rng = Prng::new(7);
    let (mut accepted, mut rejected, mut guard_ok) = (0, 0, true);
    let mut runs = Vec::new();
    for _ in 0..100 {
        let r = random_run(&mut rng);
        let t = symbolic_train_loop(&r.init, &r.sample.input, r.sample.target, r.cfg.eps, r.cfg.max_epochs, &r.cfg)
            .unwrap();
        if check_trace(&t, &r.init, &r.sample, &r.cfg).is_ok() {
            accepted += 1;
        }
        for (k, s) in t.iter().enumerate() {
            if s.axiom == Axiom::N2 {
                let pre_r = if k == 0 { UnitValue::ZERO } else { t[k - 1].r };
                guard_ok &= pre_r.get() < 1.0 - 1e-9 && s.end.is_some_and(|e| e.get() < 1.0 - 1e-9);
            }
        }
        runs.push((r, t));
    }
    let mut mutations = 0;
    while mutations < 100 {
        let (r, t) = &runs[rng.below(runs.len() as u64) as usize];
        let step = rng.below(t.len() as u64) as usize;
        let Some(bad) = mutate(t, step, rng.below(8) as usize) else {
            continue;
        };
        mutations += 1;
        if check_trace(&bad, &r.init, &r.sample, &r.cfg).is_err() {
            rejected += 1;
        }
    }
    outcome(
        accepted == 100 && rejected == 100 && guard_ok,
        format!("accepted {accepted}/100, rejected {rejected}/100 mutations, N2 guards hold {guard_ok}"),
    )
}

fn epoch_accounting() -> Outcome {
    let init = Configuration::new(NetworkState::worked_example());
    let cfg = TrainConfig::default();
    let t = symbolic_train_loop(&init, &[u(0.2), u(0.3)], u(0.8), UnitValue::ZERO, 5, &cfg).unwrap();
    let n2 = t.iter().filter(|s| s.axiom == Axiom::N2).count();
    let last = t.last().unwrap();
    outcome(
        n2 == 5 && last.axiom == Axiom::N0E && (last.r.get() - 1.0).abs() <= 1e-9,
        format!("{n2} N2 steps, last {} with r = {}", last.axiom, last.r),
    )
}

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn two_moons_run(dir: &Path, seed: u64) -> anyhow::Result<(f64, Duration)> {
    let data = cmd_gen_data(&GenDataArgs {
        n_per_class: 4000,
        noise: 0.1,
        seed: Some(seed),
        train_frac: 0.75,
        out_dir: dir.join("data"),
    })?;
    let start = Instant::now();
    let report = cmd_train(&TrainArgs {
        train: Some(data.train),
        test: Some(data.test),
        arch: Some(vec![2, 32, 32, 1]),
        eta: Some(1.0),
        epochs: Some(250),
        batch: Some(128),
        seed: Some(seed),
        out_dir: Some(dir.join("run")),
        ..TrainArgs::default()
    })?;
    Ok((report.test_accuracy.unwrap(), start.elapsed()))
}

fn two_moons(root: &Path) -> Outcome {
    let handles: Vec<_> = SEEDS
        .iter()
        .map(|&seed| {
            let dir = root.join(format!("seed{seed}"));
            thread::spawn(move || two_moons_run(&dir, seed))
        })
        .collect();
    let mut accs = Vec::new();
    let mut slowest = Duration::ZERO;
    for h in handles {
        match h.join().unwrap() {
            Ok((acc, t)) => {
                accs.push(acc);
                slowest = slowest.max(t);
            }
            Err(e) => return outcome(false, format!("run failed: {e:#}")),
        }
    }
    let good = accs.iter().filter(|&&a| a >= 0.85).count();
    outcome(
        good >= 3 && slowest < Duration::from_secs(300),
        format!("test accuracy {accs:?}, {good}/5 seeds >= 0.85, slowest run {slowest:.2?}"),
    )
}

fn determinism(root: &Path) -> Outcome {
    let first = root.join(format!("seed{}", SEEDS[0])).join("run");
    let rerun = root.join("rerun");
    let result = cmd_train(&TrainArgs {
        from_manifest: Some(first.join("manifest.json")),
        out_dir: Some(rerun.clone()),
        ..TrainArgs::default()
    });
    if let Err(e) = result {
        return outcome(false, format!("rerun failed: {e:#}"));
    }
    let same = |name: &str| std::fs::read(first.join(name)).ok() == std::fs::read(rerun.join(name)).ok();
    let (model, history) = (same("model.txt"), same("history.csv"));
    outcome(model && history, format!("model identical {model}, history identical {history}"))
}

fn main() -> ExitCode {
    let root = tempfile::tempdir().expect("temp dir");
    let criteria: [Criterion; 10] = [
        ("algebra suite", Box::new(algebra_suite)),
        ("worked example layers", Box::new(worked_example_layers)),
        ("end condition", Box::new(end_consistency)),
        ("extraction equivalence", Box::new(extraction_equivalence)),
        ("gradient soundness", Box::new(gradient_soundness)),
        ("parameter closure", Box::new(parameter_closure)),
        ("trace round trip and mutation", Box::new(trace_round_trip)),
        ("epoch accounting", Box::new(epoch_accounting)),
        ("two-moons accuracy", Box::new(|| two_moons(root.path()))),
        ("manifest determinism", Box::new(|| determinism(root.path()))),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
