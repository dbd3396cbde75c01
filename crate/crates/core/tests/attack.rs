use aag_core::aag::{gen_private, make_transmission, run_with_keys, PrivateKey, PublicParams, Side, Transmission};
use aag_core::attack::{
    recover_key, single_conjugacy, solve_simultaneous, AttackError, AttackInstance, AttackOptions, AttackReport, Outcome,
};
use aag_core::{ContractionBudget, Element, Platform, SignedIndex};
use proptest::prelude::*;

fn platform(name: &str) -> Platform {
    Platform::by_name(name, ContractionBudget::default()).unwrap()
}

fn grig_params(alice: &[&str], bob: &[&str]) -> PublicParams {
    let p = platform("grigorchuk");
    let ws = |v: &[&str]| v.iter().map(|s| p.parse_generator_word(s).unwrap()).collect::<Vec<_>>();
    PublicParams::from_words(p.clone(), &ws(alice), &ws(bob)).unwrap()
}

fn instance_for(params: &PublicParams, key: &PrivateKey) -> AttackInstance {
    AttackInstance::new(params.clone(), make_transmission(params, key).unwrap()).unwrap()
}

/// Reference search written without any sharing with the library: every
/// freely reduced word in length-lex order, each evaluated from scratch and
/// checked by literal conjugation.
fn reference_first_solution(
    params: &PublicParams,
    side: Side,
    target: &Transmission,
    max_len: usize,
) -> Option<Vec<SignedIndex>> {
    let p = params.platform();
    let gens = params.generators(side);
    let us = params.generators(side.other());
    let k = gens.len() as u16;
    let alphabet: Vec<SignedIndex> =
        (0..k).flat_map(|i| [SignedIndex::new(i, false), SignedIndex::new(i, true)]).collect();
    let mut words: Vec<Vec<SignedIndex>> = vec![vec![]];
    for len in 0..=max_len {
        if len > 0 {
            words = words
                .iter()
                .flat_map(|w| {
                    alphabet.iter().filter(move |&&x| w.last() != Some(&x.inverse())).map(move |&x| {
                        let mut v = w.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        for w in &words {
            let x = params.evaluate(side, w).unwrap();
            let xi = p.invert(&x).unwrap();
            let ok = us.iter().zip(&target.elements).all(|(u, v)| {
                let c = match side {
                    Side::Alice => p.multiply(&p.multiply(&xi, u).unwrap(), &x).unwrap(),
                    Side::Bob => p.multiply(&p.multiply(&x, u).unwrap(), &xi).unwrap(),
                };
                &c == v
            });
            if ok {
                return Some(w.clone());
            }
        }
    }
    None
}

#[test]
fn length_one_private_word_is_found() {
    let params = PublicParams::random(platform("grigorchuk"), 3, 3, 4, 7).unwrap();
    let key = PrivateKey::new(&params, Side::Alice, vec![SignedIndex::new(0, false)]).unwrap();
    let r = solve_simultaneous(&instance_for(&params, &key), &AttackOptions::new(1)).unwrap();
    let sol = r.solution().expect("solution at L = 1");
    assert!(sol.len() <= 1);
}

#[test]
fn unchanged_tuple_gives_empty_word() {
    let params = grig_params(&["a", "b"], &["c", "a d"]);
    for side in [Side::Alice, Side::Bob] {
        let target = Transmission { side, elements: params.generators(side.other()).to_vec() };
        let inst = AttackInstance::new(params.clone(), target).unwrap();
        let r = solve_simultaneous(&inst, &AttackOptions::new(0)).unwrap();
        assert_eq!(r.outcome, Outcome::Found(vec![]));
        assert_eq!(r.nodes, 1);
    }
}

#[test]
fn grigorchuk_aba_target() {
    let params = grig_params(&["a", "c"], &["b"]);
    let p = params.platform();
    let aba = p.evaluate(&p.parse_generator_word("a b a").unwrap()).unwrap();
    let inst = AttackInstance::new(params.clone(), Transmission { side: Side::Alice, elements: vec![aba.clone()] }).unwrap();
    let r = solve_simultaneous(&inst, &AttackOptions::new(3)).unwrap();
    let sol = r.solution().unwrap();
    let a = params.evaluate(Side::Alice, sol).unwrap();
    let b = &params.generators(Side::Bob)[0];
    assert_eq!(p.multiply(&p.multiply(&p.invert(&a).unwrap(), b).unwrap(), &a).unwrap(), aba);
}

#[test]
fn single_conjugacy_examples() {
    let p = platform("grigorchuk");
    let e = |s: &str| p.evaluate(&p.parse_generator_word(s).unwrap()).unwrap();
    let (a, b, aba) = (e("a"), e("b"), e("a b a"));

    let r = single_conjugacy(&p, &b, &b, &[a.clone()], &AttackOptions::new(3)).unwrap();
    assert_eq!(r.outcome, Outcome::Found(vec![]));

    let r = single_conjugacy(&p, &b, &aba, &[a.clone()], &AttackOptions::new(1)).unwrap();
    assert_eq!(r.outcome, Outcome::Found(vec![SignedIndex::new(0, false)]));

    // b and c are not conjugate by anything in ⟨a⟩, which is {e, a}.
    let r = single_conjugacy(&p, &b, &e("c"), &[a], &AttackOptions::new(4)).unwrap();
    assert_eq!(r.outcome, Outcome::NoSolutionUpTo(4));
    assert_eq!(r.nodes, 1 + 2 + 2 + 2 + 2);
}

#[test]
fn honest_words_recover_honest_key() {
    let params = PublicParams::random(platform("grigorchuk"), 3, 3, 4, 11).unwrap();
    let ka = gen_private(&params, Side::Alice, 6, 1).unwrap();
    let kb = gen_private(&params, Side::Bob, 6, 2).unwrap();
    let s = run_with_keys(&params, ka.clone(), kb.clone()).unwrap();
    assert_eq!(recover_key(&params, ka.word(), kb.word()).unwrap(), s.alice_shared.bytes);
}

#[test]
fn identity_solutions_on_commuting_instance() {
    // ⟨a⟩ and ⟨b c d⟩ trivially commute; identity conjugators solve both systems.
    let params = grig_params(&["b"], &["c"]);
    let p = params.platform();
    let r = recover_key(&params, &[], &[]).unwrap();
    assert_eq!(r, aag_core::aag::key_digest(p, &p.identity().unwrap()));
}

#[test]
fn matches_reference_search_and_recovers_key() {
    let mut solved = 0;
    for name in ["grigorchuk", "basilica", "hanoi", "universal", "affine"] {
        for seed in 0..6u64 {
            let params = PublicParams::random(platform(name), 2, 2, 3, seed).unwrap();
            let ka = gen_private(&params, Side::Alice, 2, 100 + seed).unwrap();
            let kb = gen_private(&params, Side::Bob, 2, 200 + seed).unwrap();
            let s = run_with_keys(&params, ka, kb).unwrap();
            let ia = AttackInstance::new(params.clone(), s.alice_sent.clone()).unwrap();
            let ib = AttackInstance::new(params.clone(), s.bob_sent.clone()).unwrap();
            let ra = solve_simultaneous(&ia, &AttackOptions::new(3)).unwrap();
            let rb = solve_simultaneous(&ib, &AttackOptions::new(3)).unwrap();
            assert_eq!(ra.solution().map(<[_]>::to_vec), reference_first_solution(&params, Side::Alice, &s.alice_sent, 3));
            assert_eq!(rb.solution().map(<[_]>::to_vec), reference_first_solution(&params, Side::Bob, &s.bob_sent, 3));
            // Honest words of length 2 lie inside the enumeration.
            let (sa, sb) = (ra.solution().unwrap(), rb.solution().unwrap());
            assert!(sa.len() <= 2 && sb.len() <= 2, "{name} seed {seed}");
            assert_eq!(recover_key(&params, sa, sb).unwrap(), s.alice_shared.bytes, "{name} seed {seed}");
            solved += 1;
        }
    }
    assert_eq!(solved, 30);
}

#[test]
fn parallel_and_dedup_agree_with_sequential() {
    for name in ["grigorchuk", "universal", "gomega:2/01"] {
        for seed in 0..4u64 {
            let params = PublicParams::random(platform(name), 3, 3, 4, seed).unwrap();
            let ka = gen_private(&params, Side::Alice, 3, seed).unwrap();
            let inst = instance_for(&params, &ka);
            let base = AttackOptions::new(4);
            let seq = solve_simultaneous(&inst, &base).unwrap();
            let par = solve_simultaneous(&inst, &AttackOptions { parallel: true, ..base }).unwrap();
            assert_eq!(seq.outcome, par.outcome);
            assert_eq!(seq.nodes, par.nodes);
            let dd = solve_simultaneous(&inst, &AttackOptions { dedup: true, ..base }).unwrap();
            assert_eq!(seq.outcome, dd.outcome, "dedup keeps the length-lex first solution");
            assert!(dd.nodes <= seq.nodes);
            let ddp = solve_simultaneous(&inst, &AttackOptions { dedup: true, parallel: true, ..base }).unwrap();
            assert_eq!((dd.outcome, dd.nodes), (ddp.outcome, ddp.nodes));
        }
    }
}

#[test]
fn budget_exhaustion_is_distinct() {
    let p = platform("grigorchuk");
    let e = |s: &str| p.evaluate(&p.parse_generator_word(s).unwrap()).unwrap();
    let gens = [e("a"), e("b"), e("c")];
    let opts = AttackOptions { max_nodes: 10, ..AttackOptions::new(6) };
    let err = single_conjugacy(&p, &e("b"), &e("d"), &gens, &opts).unwrap_err();
    assert_eq!(err, AttackError::NodeBudget { nodes: 10 });
}

#[test]
fn mismatched_tuple_rejected() {
    let params = grig_params(&["a"], &["b", "c"]);
    let t = Transmission { side: Side::Alice, elements: vec![params.generators(Side::Bob)[0].clone()] };
    assert!(matches!(AttackInstance::new(params, t), Err(AttackError::LengthMismatch { expected: 2, found: 1 })));
}

#[test]
fn report_record_layout() {
    let r = AttackReport {
        platform: "grigorchuk".into(),
        n: 3,
        m: 2,
        s: 2,
        t: 1,
        max_length: 4,
        found: true,
        nodes: 17,
        millis: 5,
    };
    assert_eq!(r.record(), "platform=grigorchuk\tn=3\tm=2\ts=2\tt=1\tL=4\tfound=true\tnodes=17\tms=5");
}

fn side_strategy() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Alice), Just(Side::Bob)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solutions_are_sound_complete_and_deterministic(
        pseed in 0u64..1000, kseed in 0u64..1000, len in 1usize..=3, side in side_strategy(),
    ) {
        let params = PublicParams::random(platform("grigorchuk"), 2, 2, 3, pseed).unwrap();
        let key = gen_private(&params, side, len, kseed).unwrap();
        let inst = instance_for(&params, &key);
        let opts = AttackOptions::new(len);
        let r1 = solve_simultaneous(&inst, &opts).unwrap();
        let r2 = solve_simultaneous(&inst, &opts).unwrap();
        prop_assert_eq!(&r1.outcome, &r2.outcome);
        prop_assert_eq!(r1.nodes, r2.nodes);
        let sol = r1.solution().expect("honest word is within reach");
        prop_assert!(sol.len() <= len);
        let p = params.platform();
        let x: Element = params.evaluate(side, sol).unwrap();
        let xi = p.invert(&x).unwrap();
        for (u, v) in params.generators(side.other()).iter().zip(&inst.target.elements) {
            let c = match side {
                Side::Alice => p.multiply(&p.multiply(&xi, u).unwrap(), &x).unwrap(),
                Side::Bob => p.multiply(&p.multiply(&x, u).unwrap(), &xi).unwrap(),
            };
            prop_assert_eq!(&c, v);
        }
    }
}
