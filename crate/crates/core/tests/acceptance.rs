//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::time::{Duration, Instant};

use alphaquota::domains::{self, OrderKind};
use alphaquota::experiments::{self, ExperimentGrid, RunOptions};
use alphaquota::optimize::{self, alpha_grid};
use alphaquota::rules::{run_rule, RuleOptions};
use alphaquota::sampling::{self, Model, SamplerConfig};
use alphaquota::verify;
use alphaquota::{fixtures, Axiom, CandidateSet, Committee, Instance, Rational, Rule};
use common::*;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

type Outcome = Result<String, String>;

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn draw<S: Strategy>(strategy: &S, runner: &mut TestRunner, count: usize) -> Vec<S::Value> {
    (0..count).map(|_| strategy.new_tree(runner).unwrap().current()).collect()
}

fn fig1() -> Outcome {
    let inst = fixtures::bridged_pair();
    let start = Instant::now();
    let a = verify::alpha_jr(&inst, Committee::from_indices(&[2, 3])).alpha;
    let b = verify::alpha_jr(&inst, Committee::from_indices(&[0, 1])).alpha;
    let sat = verify::satisfies(&inst, Committee::from_indices(&[2, 3]), &Rational::one(), Axiom::Jr).unwrap();
    let elapsed = start.elapsed();
    check(a == r("4/5"), || format!("alpha_jr({{c3,c4}}) = {a}"))?;
    check(b.is_zero(), || format!("alpha_jr({{c1,c2}}) = {b}"))?;
    check(sat, || "committee {c3,c4} fails 1-JR".into())?;
    check(elapsed < Duration::from_millis(1), || format!("took {elapsed:?}"))?;
    Ok(format!("4/5, 0, satisfied; {elapsed:?}"))
}

fn fig2() -> Outcome {
    let inst = fixtures::three_blocks();
    let out = optimize::optimal_alpha_jr(&inst).map_err(|e| e.to_string())?;
    let (s, _) = verify::s_max_jr(&inst, out.committee);
    let brute = brute_optimal_jr(&inst);
    let a = verify::alpha_jr(&inst, Committee::from_indices(&[0, 1, 2])).alpha;
    check(committees(&inst).count() == 35, || "expected 35 committees".into())?;
    check(out.alpha_star == r("1/4"), || format!("optimal_alpha_jr = {}", out.alpha_star))?;
    check(brute == r("1/4"), || format!("enumeration gives {brute}"))?;
    check(s <= 1, || format!("committee {} leaves a complaint of {s}", out.committee))?;
    check(a == r("3/4"), || format!("alpha_jr({{c1,c2,c3}}) = {a}"))?;
    Ok(format!("1/4 via {}, enumeration agrees; 3/4", out.committee))
}

fn gap() -> Outcome {
    let inst = fixtures::jr_ejr_gap(2, 2);
    let ejr = optimize::optimal_alpha_ejr(&inst).map_err(|e| e.to_string())?.alpha_star;
    let jr = optimize::optimal_alpha_jr(&inst).map_err(|e| e.to_string())?.alpha_star;
    let brute = brute_optimal_ejr(&inst);
    check(ejr == r("2/3") && brute == r("2/3"), || format!("alpha*_EJR = {ejr}, enumeration {brute}"))?;
    check(jr.is_zero(), || format!("alpha*_JR = {jr}"))?;
    Ok("alpha*_EJR = 2/3, alpha*_JR = 0".into())
}

fn tie_free() -> Outcome {
    let inst = fixtures::block_grid_tie_free(5);
    let start = Instant::now();
    let blocks = CandidateSet::full(6);
    let mut outputs = 0;
    for rule in [Rule::Cc, Rule::SeqCc, Rule::SeqPhragmen, Rule::Pav, Rule::AlphaMes, Rule::AlphaGjcr] {
        // the six blocks are symmetric, so every tied output is checked
        let opts = RuleOptions { max_committees: 64, ..Default::default() };
        let out = run_rule(&inst, rule, &opts).map_err(|e| e.to_string())?;
        check(!out.committees.is_empty(), || format!("{rule} returned nothing"))?;
        for &w in &out.committees {
            check(w.members().is_subset(blocks), || format!("{rule} picked {w}"))?;
            let a = verify::alpha_jr(&inst, w).alpha;
            check(a == r("5/6"), || format!("{rule}: alpha_jr = {a}"))?;
        }
        outputs += out.committees.len();
    }
    let opt = optimize::optimal_alpha_jr(&inst).map_err(|e| e.to_string())?.alpha_star;
    let elapsed = start.elapsed();
    check(opt == r("10/42"), || format!("alpha*_JR = {opt}"))?;
    check(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("six rules, {outputs} tied outputs, all block-only at 5/6, optimum 10/42; {elapsed:?}"))
}

fn random_instances() -> Vec<Instance> {
    let mut runner = TestRunner::deterministic();
    draw(&arb_instance(8, 6), &mut runner, 500)
}

fn ilp_equivalence(instances: &[Instance]) -> Outcome {
    let mut checks = 0;
    for (i, inst) in instances.iter().enumerate() {
        let all: Vec<Rational> = committees(inst).map(|w| brute_alpha_jr(inst, w)).collect();
        for alpha in alpha_grid(inst, Axiom::Jr).values.iter().filter(|a| a.is_positive()) {
            let fast = optimize::exists_committee_jr(inst, alpha).map_err(|e| e.to_string())?;
            let slow = all.iter().any(|a| a < alpha);
            check(fast.is_some() == slow, || format!("instance {i}, alpha {alpha}: search {}, enumeration {slow}", fast.is_some()))?;
            if let Some(w) = fast {
                check(brute_alpha_jr(inst, w) < *alpha, || format!("instance {i}: returned committee {w} fails"))?;
            }
            checks += 1;
        }
    }
    Ok(format!("{} instances, {checks} grid checks, 0 mismatches", instances.len()))
}

fn grid_lemmas(instances: &[Instance]) -> Outcome {
    for (i, inst) in instances.iter().enumerate() {
        let (n, k) = (inst.n(), inst.k());
        let jr = alpha_grid(inst, Axiom::Jr);
        let ejr = alpha_grid(inst, Axiom::Ejr);
        check(jr.values.len() <= n.div_ceil(k), || format!("instance {i}: |X| = {}", jr.values.len()))?;
        check(ejr.values.len() <= n * k + 1, || format!("instance {i}: |X_EJR| = {}", ejr.values.len()))?;
        let a = brute_optimal_jr(inst);
        let b = brute_optimal_ejr(inst);
        check(jr.values.contains(&a), || format!("instance {i}: alpha*_JR = {a} off grid"))?;
        check(ejr.values.contains(&b), || format!("instance {i}: alpha*_EJR = {b} off grid"))?;
    }
    Ok(format!("{} instances, 0 violations", instances.len()))
}

fn implication_chain(instances: &[Instance]) -> Outcome {
    let mut runner = TestRunner::deterministic();
    let picks = draw(&proptest::num::u64::ANY, &mut runner, instances.len());
    for (i, (inst, pick)) in instances.iter().zip(picks).enumerate() {
        let all: Vec<Committee> = committees(inst).collect();
        let w = all[(pick % all.len() as u64) as usize];
        let jr = verify::alpha_jr(inst, w).alpha;
        let ejr = verify::alpha_ejr(inst, w).map_err(|e| e.to_string())?.alpha;
        let plus = verify::alpha_ejr_plus(inst, w).alpha;
        check(jr <= ejr && ejr <= plus, || format!("pair {i}: {jr} / {ejr} / {plus}"))?;
    }
    Ok(format!("{} pairs, 0 violations", instances.len()))
}

fn party_list() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let mut tested = 0;
    let mut committees_checked = 0;
    while tested < 200 {
        let inst = arb_party_instance(12).new_tree(&mut runner).unwrap().current();
        let structure = domains::detect_party_list(&inst).map_err(|v| format!("generator produced non-party profile: {v}"))?;
        let offered: usize = structure.parties.iter().map(|p| p.candidates.len()).sum();
        if offered < inst.k() {
            continue;
        }
        tested += 1;
        let out = domains::party_list_optimal_ejr(&inst, &structure).map_err(|e| e.to_string())?;
        let brute = brute_optimal_ejr(&inst);
        check(out.alpha_star == brute, || format!("party rounds {} vs enumeration {brute}", out.alpha_star))?;
        for w in committees(&inst) {
            let a = verify::alpha_ejr(&inst, w).map_err(|e| e.to_string())?.alpha;
            let b = verify::alpha_ejr_plus(&inst, w).alpha;
            check(a == b, || format!("committee {w}: EJR {a} vs EJR+ {b}"))?;
            committees_checked += 1;
        }
    }
    Ok(format!("{tested} instances, {committees_checked} committees, 0 mismatches"))
}

fn interval_domains() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let vi = draw(&arb_vi_instance(8, 8), &mut runner, 200);
    let ci = draw(&arb_ci_instance(8, 8), &mut runner, 200);
    let picks = draw(&proptest::num::u64::ANY, &mut runner, 400);
    let mut checks = 0;
    for (i, (inst, kind)) in vi.iter().map(|x| (x, OrderKind::Vi)).chain(ci.iter().map(|x| (x, OrderKind::Ci))).enumerate() {
        let order = match kind {
            OrderKind::Vi => domains::recognize_vi(inst),
            OrderKind::Ci => domains::recognize_ci(inst),
        }
        .ok_or_else(|| format!("{kind} instance {i} not recognized"))?;
        for t in 1..=inst.n() {
            let alpha = Rational::ratio(t * inst.k(), inst.n());
            let w = match kind {
                OrderKind::Vi => domains::vi_greedy_jr(inst, &order, &alpha),
                OrderKind::Ci => domains::ci_greedy_jr(inst, &order, &alpha),
            }
            .map_err(|e| e.to_string())?;
            let best = min_jr_set_size(inst, t);
            check(w.len() == best, || format!("{kind} instance {i}, threshold {t}: greedy {} vs minimum {best}", w.len()))?;
            checks += 1;
        }
        let all: Vec<Committee> = committees(inst).collect();
        let w = all[(picks[i] % all.len() as u64) as usize];
        let scan = match kind {
            OrderKind::Vi => domains::vi_alpha_ejr(inst, &order, w),
            OrderKind::Ci => domains::ci_alpha_ejr(inst, &order, w),
        }
        .map_err(|e| e.to_string())?
        .alpha;
        let brute = brute_alpha_ejr(inst, w);
        check(scan == brute, || format!("{kind} instance {i}: scan {scan} vs brute force {brute}"))?;
    }
    Ok(format!("200 VI + 200 CI instances, {checks} greedy checks, 0 mismatches"))
}

fn droop() -> Outcome {
    let mut worst = Rational::zero();
    for i in 0..1000u64 {
        let seed = sampling::mix64(i);
        let n = 2 + (seed % 11) as usize;
        let m = 2 + (seed / 11 % 6) as usize;
        let k = 1 + (seed / 66 % (m as u64 - 1)) as usize;
        let model = if i % 2 == 0 {
            Model::Ic { p: [0.3, 0.5][(seed / 1000 % 2) as usize] }
        } else {
            Model::Euclidean { t: [1.7, 2.3, 0.8][(seed / 1000 % 3) as usize] }
        };
        let inst = sampling::sample(&SamplerConfig::new(model, n, m, k, seed)).map_err(|e| e.to_string())?;
        let plus = optimize::optimal_alpha_ejr_plus(&inst).map_err(|e| e.to_string())?.alpha_star;
        let ceiling = Rational::ratio(k, k + 1);
        check(plus <= ceiling, || format!("instance {i}: alpha*_EJR+ = {plus} > {ceiling}"))?;
        worst = worst.max(plus / ceiling);
    }
    Ok(format!("1000 instances, 0 violations; largest alpha*/ceiling = {:.4}", worst.to_f64()))
}

fn desk_experiment() -> Outcome {
    let grid = ExperimentGrid::default();
    let opts = RunOptions { seed: 2024, scale: 0.1, jobs: 0 };
    let start = Instant::now();
    let mut csv = [Vec::new(), Vec::new()];
    let mut records = Vec::new();
    for bytes in &mut csv {
        records = experiments::run_grid(&grid, &opts).map_err(|e| e.to_string())?;
        experiments::write_csv(&records, bytes).map_err(|e| e.to_string())?;
    }
    let elapsed = start.elapsed();
    check(csv[0] == csv[1], || "CSV output differs between runs".into())?;
    let per_model = records.iter().filter(|r| r.model == sampling::ModelKind::Ic).count();
    check(per_model == 640, || format!("{per_model} IC instances"))?;
    for rec in records.iter().filter(|r| !r.is_excluded()) {
        for s in &rec.rules {
            let (jr, ejr) = (s.jr_mean.as_ref().unwrap(), s.ejr_mean.as_ref().unwrap());
            check(jr >= rec.alpha_jr_opt.as_ref().unwrap() && ejr >= rec.alpha_ejr_opt.as_ref().unwrap(), || {
                format!("seed {}: {} below the optimum", rec.seed, s.rule)
            })?;
        }
    }
    let summary = experiments::summarize(&grid, &records).map_err(|e| e.to_string())?;
    let pooled = |rule: Rule| summary.pooled.iter().find(|d| d.rule == rule).unwrap().ejr.clone();
    let (cc, pav) = (pooled(Rule::Cc), pooled(Rule::Pav));
    check(cc > pav, || format!("CC {:.6} vs PAV {:.6}", cc.to_f64(), pav.to_f64()))?;
    check(elapsed < Duration::from_secs(30 * 60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} records, identical CSVs, {} excluded, EJR distance CC {:.6} > PAV {:.6}; {:.1?} for two runs",
        records.len(),
        summary.excluded,
        cc.to_f64(),
        pav.to_f64(),
        elapsed
    ))
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let instances = random_instances();
    let criteria: Vec<Criterion> = vec![
        ("fig1-fixture", Box::new(fig1)),
        ("fig2-fixture", Box::new(fig2)),
        ("jr-ejr-gap", Box::new(gap)),
        ("tie-free-grid", Box::new(tie_free)),
        ("ilp-equivalence", Box::new(|| ilp_equivalence(&instances))),
        ("grid-lemmas", Box::new(|| grid_lemmas(&instances))),
        ("implication-chain", Box::new(|| implication_chain(&instances))),
        ("party-list", Box::new(party_list)),
        ("interval-domains", Box::new(interval_domains)),
        ("droop-ceiling", Box::new(droop)),
        ("desk-experiment", Box::new(desk_experiment)),
    ];
    // `ACCEPTANCE_ONLY=name` runs a single criterion
    let only = std::env::var("ACCEPTANCE_ONLY").ok();
    let criteria: Vec<_> = criteria.into_iter().filter(|(name, _)| only.as_deref().is_none_or(|o| o == *name)).collect();
    let mut failed = 0;
    for (name, run) in &criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
