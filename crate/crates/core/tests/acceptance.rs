//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass criterion numbers as arguments to
//! run a subset.

use std::collections::HashSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use tca_core::distribution::accepts_word;
use tca_core::format::{print_tca, Universe};
use tca_core::harness::{
    all_defined_words, build_family, gen_dfa, gen_tca, gen_words, lockstep, rng_for, view_labeled_tree_with, Family,
    GenSpec, Invariant,
};
use tca_core::raa::{self, run_with_data, Raa};
use tca_core::reconfig::apply_unchecked;
use tca_core::rldfa::{alphabet, check_diamond_in, ConfigGraph, DiamondError, ViewOracle};
use tca_core::samples::{c, chain4, parity_raa, sample};
use tca_core::{
    apply, build_sync, check_diamond, check_valid, distribute, plan, specialize_fixed, state_from_sync, validate_tca,
    Action, ChannelId, CommArch, Diam, DistributedRaa, EdgeLabel, GlobalState, LocalState, Op, ProcSet, RlDfa, StateId,
    Tca, Tree,
};

type Verdict = Result<String, String>;

/// Number, name, time limit and check of a criterion that runs on its own.
type Standalone = (usize, &'static str, Option<Duration>, fn() -> Verdict);

const GOLDEN_JOINED: &str = r#"{"format-version":1,"kind":"tca","processes":["p1","p2","p3","p4","p5"],"channels":["c1","c2","c3"]}
{"root":"p1"}
{"edge":1,"parent":"p1","child":"p2"}
{"edge":2,"parent":"p1","child":"p3"}
{"edge":3,"parent":"p3","child":"p4"}
{"edge":4,"parent":"p3","child":"p5"}
{"channel":"c1","members":["p1","p2","p3"]}
{"channel":"c2","members":["p1","p2","p3","p4"]}
{"channel":"c3","members":["p3","p5"]}
"#;

const GOLDEN_LEFT: &str = r#"{"format-version":1,"kind":"tca","processes":["p1","p2","p3","p4","p5"],"channels":["c1","c2","c3"]}
{"root":"p1"}
{"edge":1,"parent":"p1","child":"p2"}
{"edge":2,"parent":"p1","child":"p3"}
{"edge":3,"parent":"p3","child":"p4"}
{"edge":4,"parent":"p3","child":"p5"}
{"channel":"c1","members":["p1","p2"]}
{"channel":"c2","members":["p1","p3","p4"]}
{"channel":"c3","members":["p3","p5"]}
"#;

fn e(i: usize) -> EdgeLabel {
    EdgeLabel::new(i)
}

fn act(channel: usize, op: Op) -> Action {
    Action::new(c(channel), op)
}

fn sample_judgments() -> Verdict {
    let u = Universe::numbered(5, 3);
    let mut judged: Vec<(String, bool, bool)> = Vec::new();
    let mut judge = |label: &str, a: Action, want: bool| {
        judged.push((format!("{label} [{}]", u.action(a)), check_valid(&sample(), a).is_ok(), want));
    };
    judge("swap c1 1", act(1, Op::Swap(e(1))), true);
    judge("swap c3 4", act(3, Op::Swap(e(4))), false);
    judge("move c1 3 2", act(1, Op::Move(e(3), e(2))), true);
    judge("move c3 3 4", act(3, Op::Move(e(3), e(4))), false);
    judge("connect c1 1 c2", act(1, Op::Connect(e(1), c(2))), true);
    for ch in 1..=3 {
        judge("connect p2 to c3", act(ch, Op::Connect(e(1), c(3))), false);
    }
    judge("disc c2 3", act(2, Op::Disc(e(3))), false);
    judge("disc c2 0", act(2, Op::Disc(e(0))), true);
    judge("disc c1 2", act(1, Op::Disc(e(2))), true);

    let mut wrong: Vec<String> = judged
        .iter()
        .filter(|(_, got, want)| got != want)
        .map(|(l, got, want)| format!("{l}: valid={got}, expected valid={want}"))
        .collect();
    for (a, golden, name) in
        [(act(1, Op::Connect(e(1), c(2))), GOLDEN_JOINED, "joined"), (act(1, Op::Disc(e(2))), GOLDEN_LEFT, "left")]
    {
        match apply(&sample(), a) {
            Ok(t) if print_tca(&u, t.arch(), t.tree()) == golden => {}
            Ok(_) => wrong.push(format!("{name}: output differs from the golden file")),
            Err(why) => wrong.push(format!("{name}: {}", u.invalid(&why))),
        }
    }
    if wrong.is_empty() {
        Ok(format!("{} judgments and 2 golden outputs", judged.len()))
    } else {
        Err(wrong.join("; "))
    }
}

fn small_spec(seed: u64, max_n: usize, max_k: usize) -> (usize, usize) {
    (2 + (seed as usize) % (max_n - 1), 1 + (seed as usize / (max_n - 1)) % max_k)
}

fn preservation() -> Verdict {
    let mut pairs = 0usize;
    let mut seed = 0u64;
    while pairs < 10_000 {
        let (n, k) = small_spec(seed, 6, 4);
        let tca = gen_tca(n, k, &mut rng_for(seed)).map_err(|e| e.to_string())?;
        for a in alphabet(n, k) {
            if check_valid(&tca, a).is_err() {
                continue;
            }
            let next = apply_unchecked(&tca, a);
            let report = validate_tca(next.arch(), next.tree()).map_err(|e| e.to_string())?;
            if !report.is_ok() {
                return Err(format!("seed {seed}: {a} gives {report}"));
            }
            pairs += 1;
        }
        seed += 1;
    }
    Ok(format!("{pairs} pairs over {seed} architectures"))
}

fn universality() -> Verdict {
    let mut steps = 0usize;
    for seed in 0..500u64 {
        let (n, k) = small_spec(seed, 6, 4);
        let from = gen_tca(n, k, &mut rng_for(2 * seed)).map_err(|e| e.to_string())?;
        let to = gen_tca(n, k, &mut rng_for(2 * seed + 1)).map_err(|e| e.to_string())?;
        let word = plan(&from, &to).map_err(|e| format!("pair {seed}: {e}"))?;
        let mut cur = from;
        for (i, &a) in word.iter().enumerate() {
            cur = apply(&cur, a).map_err(|why| format!("pair {seed}, step {i}: {a} invalid: {why}"))?;
            if !validate_tca(cur.arch(), cur.tree()).map_err(|e| e.to_string())?.is_ok() {
                return Err(format!("pair {seed}, step {i}: intermediate is not tree-like"));
            }
        }
        if cur != to {
            return Err(format!("pair {seed}: plan ends elsewhere"));
        }
        steps += word.len();
    }
    Ok(format!("500 pairs, {steps} planned actions"))
}

fn diamond_checker() -> Verdict {
    let mut closed = 0;
    for n in 2..=4 {
        for k in 1..=3 {
            for seed in 0..3u64 {
                for family in [Family::Tracker, Family::Parity] {
                    let spec = GenSpec { n, k, seed, family, max_len: 8 };
                    let dfa = gen_dfa(&spec).map_err(|e| e.to_string())?;
                    check_diamond(&dfa).map_err(|e| format!("{spec:?}: {e}"))?;
                    closed += 1;
                }
            }
        }
    }
    // Trackers over every action of small universes.
    for (n, k) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
        let arch0 = gen_tca(n, k, &mut rng_for(n as u64 * 10 + k as u64)).map_err(|e| e.to_string())?;
        let dfa = build_family(&arch0, &alphabet(n, k), Family::Tracker, k).ok_or("tracker too large")?;
        check_diamond(&dfa).map_err(|e| format!("full tracker n={n} k={k}: {e}"))?;
        closed += 1;
    }
    let one_order = RlDfa::new(
        3,
        StateId(0),
        chain4(),
        [(StateId(0), Action::nop(c(1)), StateId(1)), (StateId(1), Action::nop(c(2)), StateId(2))],
        [StateId(2)],
    )
    .map_err(|e| e.to_string())?;
    match check_diamond(&one_order) {
        Err(DiamondError::Counterexample(cx)) if cx.state == one_order.initial() && &cx.tca == one_order.arch0() => {
            Ok(format!("{closed} tracker automata closed; counterexample at the initial configuration"))
        }
        other => Err(format!("single-word automaton: {other:?}")),
    }
}

/// Words for one automaton: the generated ones, topped up with random
/// extensions (mostly undefined) until there are `count`.
fn corpus_words(dfa: &RlDfa, graph: &ConfigGraph, seed: u64, count: usize, max_len: usize) -> Vec<Vec<Action>> {
    let mut rng = rng_for(seed ^ 0xacce97);
    let mut words: Vec<Vec<Action>> =
        gen_words(dfa, graph, max_len, count, &mut rng).into_iter().map(|w| w.word).collect();
    let sigma = alphabet(dfa.arch0().n(), dfa.arch0().channel_count());
    let base: Vec<Vec<Action>> = words.iter().filter(|w| w.len() < max_len).cloned().collect();
    while words.len() < count {
        let mut w = base.choose(&mut rng).cloned().unwrap_or_default();
        w.push(*sigma.choose(&mut rng).unwrap());
        words.push(w);
    }
    words
}

/// Lockstep results over the generated corpus.
#[derive(Default)]
struct Corpus {
    automata: usize,
    skipped: usize,
    words: usize,
    undefined: usize,
    steps: usize,
    violations: [usize; Invariant::COUNT],
    examples: Vec<(Invariant, String)>,
    /// Prefixes where diamtree over parent-view labels misses the state.
    parent_labeled: usize,
    parent_labeled_total: usize,
    parent_example: Option<String>,
    /// Whether the encoding width stays within the structural bound.
    size_ok: bool,
    elapsed: Duration,
}

const REQUIRED: [Invariant; 9] = [
    Invariant::Defined,
    Invariant::StateParent,
    Invariant::State,
    Invariant::Arch,
    Invariant::Tree,
    Invariant::Connected,
    Invariant::Disconnected,
    Invariant::Decode,
    Invariant::Acceptance,
];

fn ceil_log2(x: usize) -> usize {
    (usize::BITS - x.saturating_sub(1).leading_zeros()) as usize
}

fn corpus_case(spec: GenSpec) -> Option<Corpus> {
    let dfa = Arc::new(gen_dfa(&spec).ok()?);
    let diam = Arc::new(Diam::new(dfa.clone()).ok()?);
    let mut out = Corpus { size_ok: true, ..Corpus::default() };
    if check_diamond_in(diam.graph()).is_err() {
        out.skipped = 1;
        return Some(out);
    }
    out.automata = 1;
    let raa = DistributedRaa::with_diam(diam.clone(), false).ok()?;
    let (n, k) = (spec.n, spec.k);
    out.size_ok =
        LocalState::encoded_bits(dfa.state_count(), n, k) <= 2 * ceil_log2(dfa.state_count()) + 3 * (k + 1) * n;
    let u = Universe::numbered(n, k);
    for word in corpus_words(&dfa, diam.graph(), spec.seed, 200, spec.max_len) {
        let trace = lockstep(&raa, &word);
        out.words += 1;
        out.undefined += trace.stopped.is_some() as usize;
        out.steps += trace.steps.len();
        for v in &trace.violations {
            out.violations[v.invariant as usize] += 1;
            if !out.examples.iter().any(|x| x.0 == v.invariant) {
                out.examples.push((v.invariant, format!("{spec:?} {} {}", u.word(&word), u.violation(v))));
            }
        }

        let run = dfa.run(&word);
        let defined = run.configs.len() - 1;
        let oracle = ViewOracle::new(&dfa, &word[..defined]).expect("defined prefix");
        for prefix in 0..=defined {
            let t = view_labeled_tree_with(&oracle, prefix, |p| oracle.parent_view(p, prefix));
            let got = t.map(|t| diam.diamtree(&t));
            out.parent_labeled_total += 1;
            if got != Some(Ok(run.configs[prefix].state)) {
                out.parent_labeled += 1;
                out.parent_example
                    .get_or_insert_with(|| format!("{spec:?} {} prefix {prefix}: {got:?}", u.word(&word[..defined])));
            }
        }
    }
    Some(out)
}

fn corpus() -> Corpus {
    let start = Instant::now();
    let families = [Family::Tracker, Family::Parity, Family::Counter(2), Family::Modulo(3)];
    let mut total = Corpus { size_ok: true, ..Corpus::default() };
    let mut seed = 0u64;
    while total.automata < 50 {
        let specs: Vec<GenSpec> = (seed..seed + 16)
            .map(|s| {
                let (n, k) = small_spec(s, 5, 4);
                GenSpec { n, k, seed: s, family: families[(s / 16) as usize % 4], max_len: 10 }
            })
            .collect();
        seed += 16;
        for case in specs.into_par_iter().map(corpus_case).collect::<Vec<_>>() {
            let Some(case) = case else {
                total.skipped += 1;
                continue;
            };
            total.automata += case.automata;
            total.skipped += case.skipped;
            total.words += case.words;
            total.undefined += case.undefined;
            total.steps += case.steps;
            for (t, x) in total.violations.iter_mut().zip(case.violations) {
                *t += x;
            }
            for ex in case.examples {
                if !total.examples.iter().any(|x| x.0 == ex.0) {
                    total.examples.push(ex);
                }
            }
            total.parent_labeled += case.parent_labeled;
            total.parent_labeled_total += case.parent_labeled_total;
            if total.parent_example.is_none() {
                total.parent_example = case.parent_example;
            }
            total.size_ok &= case.size_ok;
        }
    }
    total.elapsed = start.elapsed();
    total
}

fn counts(corpus: &Corpus, which: &[Invariant]) -> String {
    which.iter().map(|&inv| format!("{inv}={}", corpus.violations[inv as usize])).collect::<Vec<_>>().join(" ")
}

fn example(corpus: &Corpus, inv: Invariant) -> String {
    corpus.examples.iter().find(|x| x.0 == inv).map_or(String::new(), |x| format!("; e.g. {}", x.1))
}

fn correctness(corpus: &Corpus) -> Verdict {
    let head = format!(
        "{} automata ({} skipped), {} words ({} undefined), {} steps",
        corpus.automata, corpus.skipped, corpus.words, corpus.undefined, corpus.steps
    );
    let failing: Vec<Invariant> = REQUIRED.into_iter().filter(|&i| corpus.violations[i as usize] > 0).collect();
    if corpus.words < 200 * corpus.automata || corpus.undefined == 0 {
        return Err(format!("{head}: corpus too small"));
    }
    let all = counts(corpus, &REQUIRED);
    match failing.first() {
        None => Ok(format!("{head}; {all}")),
        Some(&inv) => Err(format!("{head}; {all}{}", example(corpus, inv))),
    }
}

fn diam_oracles(corpus: &Corpus) -> Verdict {
    let diam = corpus.violations[Invariant::Diam as usize];
    let cut = corpus.violations[Invariant::ViewTree as usize];
    let head = format!(
        "diam mismatches={diam}; parent-view trees wrong at {}/{} prefixes; cut-view trees wrong at {cut}",
        corpus.parent_labeled, corpus.parent_labeled_total
    );
    if diam > 0 {
        Err(format!("{head}{}", example(corpus, Invariant::Diam)))
    } else if corpus.parent_labeled > 0 {
        Err(format!("{head}; e.g. {}", corpus.parent_example.as_deref().unwrap_or("")))
    } else {
        Ok(head)
    }
}

/// Compares the automaton and its distribution on every word of length at
/// most `max_len` whose proper prefixes are defined; longer extensions of an
/// undefined word stay undefined on both sides. Returns the number of words.
fn same_language(dfa: &RlDfa, raa: &DistributedRaa, max_len: usize) -> Result<usize, String> {
    let u = Universe::numbered(dfa.arch0().n(), dfa.arch0().channel_count());
    let sigma = alphabet(dfa.arch0().n(), dfa.arch0().channel_count());
    let start = dfa.run(&[]).last().clone();
    let g = raa.initial();
    if dfa.is_accepting(start.state) != raa::accepts(raa, &g).is_some() {
        return Err("empty word".into());
    }
    let mut count = 1;
    let mut stack = vec![(Vec::new(), start, g)];
    while let Some((word, cfg, g)) = stack.pop() {
        for &a in &sigma {
            count += 1;
            let central = dfa.step(&cfg, a).ok();
            let dist = raa::step(raa, &g, &raa.propose(&g, a), a).ok();
            let mut w = word.clone();
            w.push(a);
            match (central, dist) {
                (None, None) => {}
                (Some(cfg), Some(g)) => {
                    if dfa.is_accepting(cfg.state) != raa::accepts(raa, &g).is_some() {
                        return Err(format!("acceptance differs on {}", u.word(&w)));
                    }
                    if w.len() < max_len {
                        stack.push((w, cfg, g));
                    }
                }
                (central, _) => {
                    return Err(format!("definedness differs on {}: centralized {}", u.word(&w), central.is_some()))
                }
            }
        }
    }
    Ok(count)
}

fn language_equality() -> Verdict {
    let families = [Family::Tracker, Family::Parity, Family::Counter(2), Family::Modulo(3)];
    let specs: Vec<GenSpec> = (0..48u64)
        .map(|s| {
            let (n, k) = small_spec(s, 4, 3);
            GenSpec { n, k, seed: s, family: families[(s / 9) as usize % 4], max_len: 6 }
        })
        .collect();
    let results: Vec<Result<Option<usize>, String>> = specs
        .par_iter()
        .map(|spec| {
            let dfa = Arc::new(gen_dfa(spec).map_err(|e| e.to_string())?);
            let diam = Arc::new(Diam::new(dfa.clone()).map_err(|e| e.to_string())?);
            if check_diamond_in(diam.graph()).is_err() || all_defined_words(diam.graph(), 6, 3000).is_none() {
                return Ok(None);
            }
            let raa = DistributedRaa::with_diam(diam, false).map_err(|e| e.to_string())?;
            same_language(&dfa, &raa, 6).map(Some).map_err(|e| format!("{spec:?}: {e}"))
        })
        .collect();
    let mut automata = 0;
    let mut words = 0;
    for r in results {
        if let Some(w) = r? {
            automata += 1;
            words += w;
        }
    }
    if automata < 10 {
        return Err(format!("only {automata} automata small enough"));
    }
    Ok(format!("{automata} automata, {words} words up to length 6"))
}

fn parity_language() -> Verdict {
    let raa = parity_raa();
    let mut words = 0;
    for len in 0..=8u32 {
        for code in 0..3usize.pow(len) {
            let letters: Vec<usize> = (0..len).map(|i| code / 3usize.pow(i) % 3).collect();
            let word: Vec<((), Action)> = letters.iter().map(|&l| ((), Action::nop(c(l + 1)))).collect();
            let run = run_with_data(&raa, &word);
            let member = run.is_defined() && raa::accepts(&raa, run.last()).is_some();
            let (mut a, mut b) = (0, 0);
            let mut even = true;
            for &l in &letters {
                match l {
                    0 => a += 1,
                    1 => b += 1,
                    _ => even &= a % 2 == 0 && b % 2 == 0,
                }
            }
            if member != even {
                return Err(format!("word {letters:?}: member={member}"));
            }
            words += 1;
        }
    }
    Ok(format!("{words} words"))
}

/// A tree from `gen_tca` with one two-member channel per edge.
fn binary_tca(n: usize, seed: u64) -> Tca {
    let tree: Tree = gen_tca(n, 1, &mut rng_for(seed)).unwrap().tree().clone();
    let mut edges: Vec<_> = tree.edges().collect();
    edges.sort_by_key(|x| x.2);
    let members = edges.iter().map(|&(p, q, _)| ProcSet::singleton(p).with(q)).collect();
    Tca::new(CommArch::new(members).unwrap(), tree).unwrap()
}

fn nop_words(k: usize, max_len: usize) -> Vec<Vec<Action>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<Action>| {
                (0..k).map(move |ch| {
                    let mut w = w.clone();
                    w.push(Action::nop(ChannelId::new(ch)));
                    w
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn fixed_reduction(corpus: &Corpus) -> Verdict {
    let families = [Family::Parity, Family::Modulo(3), Family::Counter(2)];
    let mut instances = 0;
    let mut words = 0;
    for seed in 0..12u64 {
        let (n, k) = small_spec(seed, 5, 3);
        let arch0 = gen_tca(n, k, &mut rng_for(seed)).map_err(|e| e.to_string())?;
        let nops: Vec<Action> = (0..k).map(|ch| Action::nop(ChannelId::new(ch))).collect();
        let dfa = Arc::new(build_family(&arch0, &nops, families[seed as usize % 3], k).ok_or("too large")?);
        let full = distribute(dfa.clone(), true).map_err(|e| e.to_string())?;
        let fixed = specialize_fixed(dfa.clone(), true).map_err(|e| e.to_string())?;
        for w in nop_words(k, 6) {
            let a = accepts_word(&full, &w, |g, x| full.propose(g, x));
            let b = accepts_word(&fixed, &w, |g, x| fixed.propose(g, x));
            if a != b || a != dfa.accepts(&w) {
                return Err(format!("seed {seed} {w:?}: distributed={a} fixed={b}"));
            }
            words += 1;
        }
        instances += 1;
    }

    let mut binary_steps = 0;
    for seed in 0..8u64 {
        let n = 2 + seed as usize % 4;
        let arch0 = binary_tca(n, seed);
        let k = n - 1;
        let nops: Vec<Action> = (0..k).map(|ch| Action::nop(ChannelId::new(ch))).collect();
        let dfa = Arc::new(build_family(&arch0, &nops, Family::Modulo(3), k).ok_or("too large")?);
        let raa = distribute(dfa.clone(), true).map_err(|e| e.to_string())?;
        let mut rng = rng_for(seed);
        for _ in 0..40 {
            let mut g: GlobalState<LocalState> = raa.initial();
            for _ in 0..rng.gen_range(1..=8) {
                let a = *nops.choose(&mut rng).unwrap();
                let sync = build_sync(&g.0, a.channel);
                let [x, y] = sync.0.as_slice() else {
                    return Err(format!("channel {} has {} participants", a.channel, sync.0.len()));
                };
                let (top, child) = if x.cedges.contains(y.pedge) { (x, y) } else { (y, x) };
                let once = raa.diam().diam(child.s1, top.s2, child.s2, child.c);
                let joint = state_from_sync(raa.diam(), &sync);
                let want = joint.as_ref().ok().and_then(|&s| dfa.delta(s, a));
                if once.as_ref().ok() != joint.as_ref().ok() {
                    return Err(format!("seed {seed}: binary diam {once:?}, recombination {joint:?}"));
                }
                g = raa::step(&raa, &g, &raa.propose(&g, a), a).map_err(|e| e.to_string())?;
                let listeners = arch0.members(a.channel);
                if listeners.iter().any(|p| Some(g.0[p.index()].s2) != want) {
                    return Err(format!("seed {seed}: update after {a} differs from the binary diam"));
                }
                binary_steps += 1;
            }
        }
    }

    let size = corpus.violations[Invariant::Size as usize];
    if size > 0 || !corpus.size_ok {
        return Err(format!(
            "local state encoding: {size} failures, bound ok={}{}",
            corpus.size_ok,
            example(corpus, Invariant::Size)
        ));
    }
    Ok(format!(
        "{instances} nop-only automata, {words} words; {binary_steps} binary-channel steps; encodings within bound"
    ))
}

fn main() -> ExitCode {
    let wanted: HashSet<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let runs = |i: usize| wanted.is_empty() || wanted.contains(&i);
    let mut failed = 0;
    let mut report = |i: usize, name: &str, limit: Option<Duration>, elapsed: Duration, verdict: Verdict| {
        let late = limit.is_some_and(|l| elapsed > l);
        let (ok, text) = match verdict {
            Ok(t) if late => (false, format!("{t}; took longer than {:?}", limit.unwrap())),
            Ok(t) => (true, t),
            Err(t) => (false, t),
        };
        failed += !ok as usize;
        println!("{} criterion {i} {name}: {text} [{:.2}s]", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    };
    let timed = |f: fn() -> Verdict| {
        let start = Instant::now();
        let v = f();
        (start.elapsed(), v)
    };
    let secs = Duration::from_secs;

    let simple: [Standalone; 4] = [
        (1, "sample-judgments", Some(secs(1)), sample_judgments),
        (2, "preservation", Some(secs(30)), preservation),
        (3, "universality", Some(secs(60)), universality),
        (4, "diamond-checker", Some(secs(60)), diamond_checker),
    ];
    for (i, name, limit, f) in simple {
        if runs(i) {
            let (t, v) = timed(f);
            report(i, name, limit, t, v);
        }
    }
    let corpus = (runs(5) || runs(7) || runs(9)).then(corpus);
    if let Some(corpus) = &corpus {
        if runs(5) {
            report(5, "correctness", Some(secs(600)), corpus.elapsed, correctness(corpus));
        }
    }
    if runs(6) {
        let (t, v) = timed(language_equality);
        report(6, "language-equality", None, t, v);
    }
    if let Some(corpus) = &corpus {
        if runs(7) {
            report(7, "diam-oracles", None, corpus.elapsed, diam_oracles(corpus));
        }
    }
    if runs(8) {
        let (t, v) = timed(parity_language);
        report(8, "parity-language", None, t, v);
    }
    if let Some(corpus) = &corpus {
        if runs(9) {
            let start = Instant::now();
            let v = fixed_reduction(corpus);
            report(9, "fixed-reduction", None, start.elapsed(), v);
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
