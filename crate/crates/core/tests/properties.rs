use lukmlp_core::formula::{extract, extract_aggregate, parse, print, simplify};
use lukmlp_core::network::bit_identical;
use lukmlp_core::trace::{check_trace, epoch_tick, symbolic_train_loop};
use lukmlp_core::training::{apply_update, backward_aggregate, normalize, train, EtaCombine, UpdateMode};
use lukmlp_core::{
    fold_oplus, Action, Aggregator, Axiom, Configuration, Digest, Formula, NetworkState, Prng,
    Sample, TrainConfig, TraceStep, UnitValue,
};
use proptest::prelude::*;

fn u(x: f64) -> UnitValue {
    UnitValue::new(x).unwrap()
}

fn dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=4, 2..=4)
}

fn network() -> impl Strategy<Value = NetworkState> {
    (dims(), any::<u64>()).prop_map(|(d, seed)| NetworkState::random_uniform(&d, &mut Prng::new(seed)).unwrap())
}

fn network_and_input() -> impl Strategy<Value = (NetworkState, Vec<UnitValue>)> {
    network().prop_flat_map(|net| {
        let n = net.input_width();
        (Just(net), prop::collection::vec((0.0..=1.0f64).prop_map(u), n))
    })
}

/// Coefficients with at most nine decimals, so printing is exact.
fn coefficient() -> impl Strategy<Value = UnitValue> {
    prop_oneof![
        Just(UnitValue::ZERO),
        Just(UnitValue::ONE),
        (0u32..=1_000_000_000).prop_map(|k| u(k as f64 / 1e9)),
        (0u32..=10).prop_map(|k| u(k as f64 / 10.0)),
    ]
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![coefficient().prop_map(Formula::Const), (0usize..4).prop_map(Formula::Var)];
    leaf.prop_recursive(11, 96, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::oplus(a, b)),
            (coefficient(), inner).prop_map(|(r, a)| Formula::scale(r, a)),
        ]
    })
}

fn env() -> impl Strategy<Value = Vec<UnitValue>> {
    prop::collection::vec((0.0..=1.0f64).prop_map(u), 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn extracted_formula_agrees_with_forward((net, x) in network_and_input()) {
        let forward = net.forward(&x).unwrap();
        for (j, a) in forward.output().iter().enumerate() {
            let v = extract(&net, j).unwrap().eval(&x).unwrap();
            prop_assert!((v.get() - a.get()).abs() <= 1e-9);
        }
        let agg = extract_aggregate(&net, Aggregator::Max).unwrap().eval(&x).unwrap();
        prop_assert!((agg.get() - forward.yhat.get()).abs() <= 1e-9);
    }

    #[test]
    fn simplify_preserves_value_and_never_grows(phi in formula(), x in env()) {
        let s = simplify(&phi);
        prop_assert!(s.node_count() <= phi.node_count());
        let (a, b) = (phi.eval(&x).unwrap(), s.eval(&x).unwrap());
        prop_assert!((a.get() - b.get()).abs() <= 1e-9, "{} vs {}", phi, s);
        prop_assert_eq!(print(&simplify(&s)), print(&s));
    }

    #[test]
    fn print_then_parse_is_identity(phi in formula()) {
        prop_assume!(phi.depth() <= 12);
        let text = print(&phi);
        let back = parse(&text).unwrap();
        prop_assert_eq!(print(&back), text);
        prop_assert_eq!(back, phi);
    }

    #[test]
    fn derived_rewrite_instances(phi in formula(), r in coefficient(), q in coefficient(), x in env()) {
        let v = phi.eval(&x).unwrap();
        let cases = [
            (Formula::not(Formula::not(phi.clone())), v),
            (Formula::oplus(phi.clone(), Formula::Const(UnitValue::ZERO)), v),
            (Formula::scale(UnitValue::ONE, phi.clone()), v),
            (Formula::scale(r, Formula::scale(q, phi.clone())), r.scale(q).scale(v)),
        ];
        for (f, expect) in cases {
            prop_assert!(simplify(&f).eval(&x).unwrap().approx_eq(expect, 1e-9));
        }
    }

    #[test]
    fn network_is_monotone((net, x) in network_and_input(), k in 0usize..4, bump in 0.0..=1.0f64) {
        let k = k % x.len();
        let mut y = x.clone();
        y[k] = u((x[k].get() + bump).min(1.0));
        let (a, b) = (net.predict(&x).unwrap(), net.predict(&y).unwrap());
        for (p, q) in a.iter().zip(&b) {
            prop_assert!(p.get() <= q.get());
        }
    }

    #[test]
    fn updates_stay_in_unit_interval(
        (net, x) in network_and_input(),
        y in 0.0..=1.0f64,
        eta in 0.0..=1.0f64,
        mode in prop_oneof![Just(UpdateMode::Lukasiewicz), Just(UpdateMode::ClippedGd)],
        combine in prop_oneof![Just(EtaCombine::LukasiewiczProduct), Just(EtaCombine::RealProduct)],
    ) {
        let cfg = TrainConfig { eta: u(eta), update_mode: mode, eta_combine: combine, ..TrainConfig::default() };
        let mut net = net;
        for _ in 0..5 {
            let cache = net.forward(&x).unwrap();
            let b = backward_aggregate(&net, &cache, u(y), &cfg).unwrap();
            for layer in &b.layers {
                prop_assert!(layer.weights.ghat.iter().chain(&layer.bias.ghat).all(|g| (0.0..1.0).contains(g)));
            }
            net = apply_update(&net, &b, &cfg);
            for layer in net.layers() {
                prop_assert!(layer.weights().iter().chain(layer.biases()).all(|p| (0.0..=1.0).contains(&p.get())));
            }
        }
    }

    #[test]
    fn normalized_entries_in_range(raw in prop::collection::vec(-10.0..10.0f64, 0..20)) {
        let g = normalize(&raw, 1e-8);
        prop_assert!(g.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn fold_equals_truncated_sum(xs in prop::collection::vec(0.0..=1.0f64, 0..30)) {
        let vals: Vec<UnitValue> = xs.iter().map(|&x| u(x)).collect();
        let total: f64 = xs.iter().sum();
        prop_assert!((fold_oplus(vals).get() - total.min(1.0)).abs() <= 1e-9);
    }

    #[test]
    fn canonical_text_round_trips(net in network()) {
        let back = NetworkState::from_canonical_text(&net.to_canonical_text()).unwrap();
        prop_assert!(bit_identical(&net, &back));
        prop_assert_eq!(back.digest(), net.digest());
    }
}

#[derive(Debug, Clone)]
struct Run {
    init: Configuration,
    sample: Sample,
    cfg: TrainConfig,
}

fn run() -> impl Strategy<Value = Run> {
    (
        prop::collection::vec(1usize..=3, 2..=3),
        any::<u64>(),
        0.0..=0.3f64,
        1u32..=6,
        prop_oneof![Just(UpdateMode::Lukasiewicz), Just(UpdateMode::ClippedGd)],
        prop_oneof![Just(Aggregator::Max), Just(Aggregator::Min), Just(Aggregator::TruncatedSum)],
    )
        .prop_map(|(d, seed, eps, epochs, mode, agg)| {
            let mut rng = Prng::new(seed);
            let net = NetworkState::random_uniform(&d, &mut rng).unwrap();
            let input = (0..d[0]).map(|_| u(rng.next_f64())).collect();
            let target = u(rng.next_f64());
            Run {
                init: Configuration::new(net),
                sample: Sample { input, target },
                cfg: TrainConfig {
                    eps: u(eps),
                    max_epochs: epochs,
                    update_mode: mode,
                    aggregator: agg,
                    ..TrainConfig::default()
                },
            }
        })
}

fn generate(r: &Run) -> Vec<TraceStep> {
    symbolic_train_loop(&r.init, &r.sample.input, r.sample.target, r.cfg.eps, r.cfg.max_epochs, &r.cfg).unwrap()
}

fn shift(v: UnitValue) -> UnitValue {
    u(if v.get() < 0.5 { v.get() + 0.25 } else { v.get() - 0.25 })
}

/// Changes one field of one step; `None` when that step has no such field.
fn mutate(trace: &[TraceStep], step: usize, field: usize) -> Option<Vec<TraceStep>> {
    let mut t = trace.to_vec();
    let s = &mut t[step];
    match field {
        0 => {
            s.axiom = match s.axiom {
                Axiom::N0 => Axiom::N1,
                Axiom::N1 => Axiom::N0,
                Axiom::N2 => Axiom::N3,
                Axiom::N3 => Axiom::N2,
                Axiom::N0E => Axiom::N0,
            }
        }
        1 => s.pre = Digest(s.pre.0 ^ 1),
        2 => s.post = Digest(s.post.0 ^ (1 << 40)),
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generated_traces_are_accepted(r in run()) {
        let t = generate(&r);
        let layers = r.init.net.layers().len();
        prop_assert!(t.len() <= r.cfg.max_epochs as usize * (layers + 2) + 1);
        prop_assert_eq!(check_trace(&t, &r.init, &r.sample, &r.cfg), Ok(()));
        let has_n3 = t.iter().any(|s| s.axiom == Axiom::N3);
        let has_n0e = t.iter().any(|s| s.axiom == Axiom::N0E);
        prop_assert!(has_n3 != has_n0e);
        let mut k = 0u32;
        for s in &t {
            if s.axiom == Axiom::N2 {
                k += 1;
                prop_assert!(s.end.unwrap().get() < 1.0 - 1e-9);
                let expect = (k as f64 / r.cfg.max_epochs as f64).min(1.0);
                prop_assert!((s.r.get() - expect).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn single_field_mutations_are_rejected(r in run(), step in any::<prop::sample::Index>(), field in 0usize..8) {
        let t = generate(&r);
        let i = step.index(t.len());
        if let Some(bad) = mutate(&t, i, field) {
            let v = check_trace(&bad, &r.init, &r.sample, &r.cfg).unwrap_err();
            prop_assert!(v.iter().any(|v| v.step == i), "{:?}", v);
        }
    }

    #[test]
    fn counter_law(epochs in 1u32..50, k in 0u32..60) {
        let mut r = UnitValue::ZERO;
        for _ in 0..k {
            r = epoch_tick(r, epochs);
        }
        prop_assert!((r.get() - (k as f64 / epochs as f64).min(1.0)).abs() <= 1e-9);
    }
}

#[test]
fn training_is_deterministic() {
    let mut rng = Prng::new(7);
    let net = NetworkState::random(&[2, 4, 1], &mut rng).unwrap();
    let data: Vec<Sample> = (0..64)
        .map(|_| {
            let input = vec![u(rng.next_f64()), u(rng.next_f64())];
            let target = u((input[0].get() > 0.5) as u8 as f64);
            Sample { input, target }
        })
        .collect();
    let cfg = TrainConfig {
        max_epochs: 3,
        batch_size: 16,
        ..TrainConfig::default()
    };
    let a = train(&net, &data, &cfg).unwrap();
    let b = train(&net, &data, &cfg).unwrap();
    assert!(bit_identical(&a.net, &b.net));
    assert_eq!(a.history, b.history);
    assert_eq!(a.trace, b.trace);
}
