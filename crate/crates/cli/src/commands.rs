//! Subcommand bodies. Each returns `Ok(false)` on a semantic failure (exit 1)
//! and `Err` on I/O or parse problems (exit 2).

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use tca_core::format::{
    parse_rldfa, parse_tca, parse_words, print_report, print_rldfa, print_tca, print_words, Universe,
};
use tca_core::harness::{gen_dfa, gen_tca, gen_words, lockstep, rng_for, run_suite, Family, GenSpec, Invariant};
use tca_core::raa::{accepts, run_with};
use tca_core::rldfa::{ConfigGraph, Counterexample, DEFAULT_CONFIG_CAP};
use tca_core::{apply, check_diamond, distribute, plan, Action, RlDfa, Tca, TopologyError, Violation};

use crate::{AuditFlags, Command, Gen, SpecFlags};

type Out<'a> = &'a mut dyn Write;

pub fn run(command: Command, out: Out) -> Result<bool> {
    match command {
        Command::Validate { file } => validate(&file, out),
        Command::Apply { file, actions } => {
            let (u, tca) = match load_tca(&file, out)? {
                Some(x) => x,
                None => return Ok(false),
            };
            let word = actions.iter().map(|a| u.parse_action(a).map_err(|e| anyhow!(e))).collect::<Result<Vec<_>>>()?;
            replay(&u, tca, &[word], out)
        }
        Command::Plan { from, to } => {
            let Some((u, from)) = load_tca(&from, out)? else { return Ok(false) };
            let Some((u2, to)) = load_tca(&to, out)? else { return Ok(false) };
            same_universe(&u, &u2)?;
            let word = plan(&from, &to)?;
            write!(out, "{}", print_words(&u, &[word]))?;
            Ok(true)
        }
        Command::Replay { file, words } => {
            let Some((u, tca)) = load_tca(&file, out)? else { return Ok(false) };
            let (u2, words) = parse_words(&read(&words)?).with_context(|| words.display().to_string())?;
            same_universe(&u, &u2)?;
            replay(&u, tca, &words, out)
        }
        Command::CheckDiamond { dfa } => {
            let (u, dfa) = load_dfa(&dfa)?;
            match check_diamond(&dfa) {
                Ok(()) => {
                    writeln!(out, "ok")?;
                    Ok(true)
                }
                Err(tca_core::rldfa::DiamondError::Counterexample(cx)) => {
                    counterexample(&u, &dfa, &cx, out)?;
                    Ok(false)
                }
                Err(e) => {
                    writeln!(out, "FAILED {e}")?;
                    Ok(false)
                }
            }
        }
        Command::Run { dfa, words } => run_words(&dfa, &words, out),
        Command::Compare { dfa, words, audit, report } => compare(&dfa, &words, audit, report.as_deref(), out),
        Command::Gen { what } => generate(what, out),
        Command::Suite { spec, count, words, audit } => suite(&spec, count, words, audit, out),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn same_universe(a: &Universe, b: &Universe) -> Result<()> {
    if a != b {
        bail!("files name different processes or channels");
    }
    Ok(())
}

fn violation_line(u: &Universe, v: &Violation) -> String {
    match *v {
        Violation::TooFewMembers { channel, members } => {
            format!("COND1 channel={} members={members}", u.channel_name(channel))
        }
        Violation::Disconnected { channel, between: (p, q) } => {
            format!("COND2 channel={} between={},{}", u.channel_name(channel), u.process_name(p), u.process_name(q))
        }
        Violation::Uncovered { edge, .. } => format!("COND3 edge={}", edge.0),
    }
}

/// Reads an architecture; prints the violated conditions and returns `None`
/// if it is not tree-like.
fn load_tca(path: &Path, out: Out) -> Result<Option<(Universe, Tca)>> {
    let file = parse_tca(&read(path)?).with_context(|| path.display().to_string())?;
    match file.tca() {
        Ok(tca) => Ok(Some((file.universe, tca))),
        Err(TopologyError::Invalid(report)) => {
            for v in &report.violations {
                writeln!(out, "{}", violation_line(&file.universe, v))?;
            }
            Ok(None)
        }
        Err(e) => Err(anyhow!("{}: {e}", path.display())),
    }
}

fn load_dfa(path: &Path) -> Result<(Universe, RlDfa)> {
    parse_rldfa(&read(path)?).with_context(|| path.display().to_string())
}

fn validate(path: &Path, out: Out) -> Result<bool> {
    let valid = load_tca(path, out)?.is_some();
    if valid {
        writeln!(out, "ok")?;
    }
    Ok(valid)
}

fn replay(u: &Universe, mut tca: Tca, words: &[Vec<Action>], out: Out) -> Result<bool> {
    for (step, &a) in words.iter().flatten().enumerate() {
        match apply(&tca, a) {
            Ok(next) => tca = next,
            Err(why) => {
                writeln!(out, "INVALID step={step} action=\"{}\" {}", u.action(a), u.invalid(&why))?;
                return Ok(false);
            }
        }
    }
    write!(out, "{}", print_tca(u, tca.arch(), tca.tree()))?;
    Ok(true)
}

fn counterexample(u: &Universe, dfa: &RlDfa, cx: &Counterexample, out: Out) -> Result<()> {
    let show = |s: Option<tca_core::StateId>| s.map_or("undefined".to_string(), |s| s.to_string());
    let initial = cx.state == dfa.initial() && &cx.tca == dfa.arch0();
    writeln!(
        out,
        "COUNTEREXAMPLE state={} initial={initial} a1=\"{}\" a2=\"{}\" a1a2={} a2a1={}",
        cx.state,
        u.action(cx.a1),
        u.action(cx.a2),
        show(cx.first),
        show(cx.second)
    )?;
    Ok(())
}

fn load_pair(dfa: &Path, words: &Path) -> Result<(Universe, RlDfa, Vec<Vec<Action>>)> {
    let (u, dfa) = load_dfa(dfa)?;
    let (u2, words) = parse_words(&read(words)?).with_context(|| words.display().to_string())?;
    same_universe(&u, &u2)?;
    Ok((u, dfa, words))
}

/// Distributes `dfa`, printing the counterexample if it is not diamond
/// closed.
fn distributed(u: &Universe, dfa: RlDfa, out: Out) -> Result<Option<tca_core::DistributedRaa>> {
    let dfa = Arc::new(dfa);
    match distribute(dfa.clone(), true) {
        Ok(raa) => Ok(Some(raa)),
        Err(tca_core::distribution::DistributeError::NotDiamond(cx)) => {
            counterexample(u, &dfa, &cx, out)?;
            Ok(None)
        }
        Err(e) => {
            writeln!(out, "FAILED {e}")?;
            Ok(None)
        }
    }
}

fn run_words(dfa: &Path, words: &Path, out: Out) -> Result<bool> {
    let (u, dfa, words) = load_pair(dfa, words)?;
    let Some(raa) = distributed(&u, dfa, out)? else { return Ok(false) };
    for (i, w) in words.iter().enumerate() {
        let run = run_with(&raa, w.len(), |j, g| (raa.propose(g, w[j]), w[j]));
        match &run.undefined {
            Some((step, _)) => writeln!(out, "word={i} stopped step={step}")?,
            None => {
                let verdict = if accepts(&raa, run.last()).is_some() { "accepted" } else { "rejected" };
                writeln!(out, "word={i} {verdict}")?;
            }
        }
    }
    Ok(true)
}

fn ignored(audit: AuditFlags) -> &'static [Invariant] {
    if audit.literal_parent {
        &[]
    } else {
        &[Invariant::StateParent]
    }
}

fn compare(dfa: &Path, words: &Path, audit: AuditFlags, report: Option<&Path>, out: Out) -> Result<bool> {
    let (u, dfa, words) = load_pair(dfa, words)?;
    let Some(raa) = distributed(&u, dfa, out)? else { return Ok(false) };
    let skip = ignored(audit);
    let mut traces = Vec::with_capacity(words.len());
    let mut green = true;
    for (i, w) in words.iter().enumerate() {
        let trace = lockstep(&raa, w);
        let failing = trace.violations.iter().find(|v| !skip.contains(&v.invariant));
        match failing {
            Some(v) => {
                green = false;
                writeln!(out, "FAIL word={i} {}", u.violation(v))?;
            }
            None => {
                let end = trace.stopped.map_or("completed".to_string(), |s| format!("stopped step={s}"));
                writeln!(out, "PASS word={i} {end}")?;
            }
        }
        traces.push((trace, raa.dfa().accepts(w)));
    }
    if let Some(path) = report {
        fs::write(path, print_report(&u, &words, &traces))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(green)
}

fn gen_spec(flags: &SpecFlags) -> Result<GenSpec> {
    let family = Family::parse(&flags.family).ok_or_else(|| anyhow!("unknown family {:?}", flags.family))?;
    Ok(GenSpec { n: flags.n, k: flags.k, seed: flags.seed, family, max_len: flags.max_len })
}

fn generate(what: Gen, out: Out) -> Result<bool> {
    match what {
        Gen::Tca { n, k, seed } => {
            let tca = gen_tca(n, k, &mut rng_for(seed))?;
            write!(out, "{}", print_tca(&Universe::numbered(n, k), tca.arch(), tca.tree()))?;
        }
        Gen::Dfa { spec } => {
            let spec = gen_spec(&spec)?;
            let dfa = gen_dfa(&spec)?;
            write!(out, "{}", print_rldfa(&Universe::numbered(spec.n, spec.k), &dfa))?;
        }
        Gen::Words { dfa, seed, max_len, count } => {
            let (u, dfa) = load_dfa(&dfa)?;
            let graph = ConfigGraph::explore(&dfa, DEFAULT_CONFIG_CAP)?;
            let words = gen_words(&dfa, &graph, max_len, count, &mut rng_for(seed));
            let words: Vec<Vec<Action>> = words.into_iter().map(|w| w.word).collect();
            write!(out, "{}", print_words(&u, &words))?;
        }
    }
    Ok(true)
}

fn suite(flags: &SpecFlags, count: u64, words: usize, audit: AuditFlags, out: Out) -> Result<bool> {
    let base = gen_spec(flags)?;
    let u = Universe::numbered(base.n, base.k);
    let specs: Vec<GenSpec> = (0..count).map(|i| GenSpec { seed: base.seed + i, ..base }).collect();
    let skip = ignored(audit);
    let mut green = true;
    for r in run_suite(&specs, words) {
        let s = r.spec;
        let head = format!("seed={} n={} k={} family={}", s.seed, s.n, s.k, s.family.name());
        if let Some(why) = &r.skipped {
            writeln!(out, "SKIP {head} {why}")?;
            continue;
        }
        let ok = r.is_green_except(skip);
        green &= ok;
        let ignored: usize = skip.iter().map(|&inv| r.violation_counts[inv as usize]).sum();
        writeln!(
            out,
            "{} {head} states={} configs={} words={} undefined={} steps={} violations={} ignored={ignored}",
            if ok { "PASS" } else { "FAIL" },
            r.states,
            r.configs,
            r.words,
            r.undefined_words,
            r.steps,
            r.violation_count() - ignored
        )?;
        if !ok {
            for (w, v) in &r.violations {
                writeln!(out, "  {} {}", u.word(w), u.violation(v))?;
            }
        }
    }
    Ok(green)
}
