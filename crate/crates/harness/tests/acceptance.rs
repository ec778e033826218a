//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use cleanup_core::agents::{GreedyCleaner, GreedyPicker, Policy};
use cleanup_core::metrics::{collective_return, gini};
use cleanup_core::rng::{policy_stream, stream};
use cleanup_core::teams::share_rewards;
use cleanup_core::{
    run_episode, Action, Env, EnvConfig, EpisodeLog, Identity, Pos, RowSpan, SimRng, TeamRegistry, SOLO,
};
use cleanup_harness::runner::run_seed;
use cleanup_harness::{run_experiment, ExperimentSpec, PolicyKind};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

// 1 ------------------------------------------------------------------------

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let make = |out: &Path| {
        let mut spec = ExperimentSpec {
            policies: vec![
                PolicyKind::GreedyCleaner,
                PolicyKind::GreedyPicker,
                PolicyKind::QLearner,
                PolicyKind::Random,
            ],
            team_slots: vec![1, 1, 0, 0],
            episodes: 3,
            seeds: vec![3, 0, 11],
            output_dir: out.to_path_buf(),
            write_replays: true,
            write_timeseries: true,
            ..ExperimentSpec::default()
        };
        spec.learner.choose_team = true;
        spec
    };
    let a = make(&tmp.path().join("a"));
    let b = make(&tmp.path().join("b"));
    run_experiment(&a).map_err(|e| e.to_string())?;
    run_experiment(&b).map_err(|e| e.to_string())?;
    let keep = |m: BTreeMap<String, Vec<u8>>| -> BTreeMap<String, Vec<u8>> {
        m.into_iter()
            .filter(|(k, _)| k == "results.csv" || k.starts_with("replays/"))
            .collect()
    };
    let fa = keep(all_files(&a.output_dir));
    let fb = keep(all_files(&b.output_dir));
    ensure(fa.len() == 1 + 9, || format!("expected results.csv and 9 replays, found {}", fa.len()))?;
    for (name, bytes) in &fa {
        ensure(fb.get(name) == Some(bytes), || format!("{name} differs between runs"))?;
    }

    // timing: 4 agents × 1000 steps × 10 episodes, replays on
    let timed = ExperimentSpec {
        episodes: 10,
        seeds: vec![0],
        output_dir: tmp.path().join("timed"),
        write_replays: true,
        ..ExperimentSpec::default()
    };
    let start = Instant::now();
    run_experiment(&timed).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("runtime {elapsed:?} ≥ 10 s"))?;
    Ok(format!(
        "{} files byte-identical across runs; 4×1000×10 run in {:.2} s",
        fa.len(),
        elapsed.as_secs_f64()
    ))
}

// 2 ------------------------------------------------------------------------

fn stay(n: usize) -> Vec<Action> {
    vec![Action::Stay; n]
}

fn threshold_law() -> Outcome {
    const STEPS: u32 = 10_000;
    // (i) pollution held at or above θ: zero spawns, exactly
    let at_theta = EnvConfig {
        width: 10,
        waste_spawn_prob: 0.0,
        episode_length: STEPS,
        ..EnvConfig::default()
    };
    let rising = EnvConfig {
        episode_length: STEPS,
        ..EnvConfig::default()
    };
    let mut held_spawns = 0;
    for (cfg, seed) in [(at_theta, 1), (rising, 2)] {
        let mut env = Env::new(cfg.clone(), seed).map_err(|e| e.to_string())?;
        ensure(env.pollution_level() >= cfg.depletion_threshold, || {
            format!("start pollution {} below θ", env.pollution_level())
        })?;
        for _ in 0..STEPS {
            let out = env.step(&stay(cfg.num_agents)).map_err(|e| e.to_string())?;
            ensure(out.pollution_level >= cfg.depletion_threshold, || "pollution fell below θ".into())?;
            held_spawns += out.apples_spawned;
        }
        ensure(env.state().apple_count() == 0, || "apples present above θ".into())?;
    }
    ensure(held_spawns == 0, || format!("{held_spawns} apples spawned with pollution ≥ θ"))?;

    // (ii) per-cell spawn rate against the closed-form binomial standard error
    let mut report = Vec::new();
    for (initial, seed) in [(0.0, 3), (0.2, 4)] {
        let cfg = EnvConfig {
            width: 10,
            waste_spawn_prob: 0.0,
            initial_pollution: initial,
            episode_length: STEPS,
            ..EnvConfig::default()
        };
        let mut env = Env::new(cfg.clone(), seed).map_err(|e| e.to_string())?;
        let d = env.pollution_level();
        ensure((d - initial).abs() < 1e-12, || format!("pollution {d}, wanted {initial}"))?;
        let p = cfg.apple_spawn_max * (1.0 - d / cfg.depletion_threshold).max(0.0);
        let mut trials = 0u64;
        let mut spawns = 0u64;
        for _ in 0..STEPS {
            env.clear_apples();
            trials += cfg.orchard_cell_count() as u64;
            spawns += env.step(&stay(cfg.num_agents)).map_err(|e| e.to_string())?.apples_spawned as u64;
        }
        let rate = spawns as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        let z = (rate - p) / se;
        ensure(z.abs() <= 3.0, || format!("d={d}: rate {rate:.5} vs p {p:.5}, {z:.2} SE"))?;
        report.push(format!("d={d}: {rate:.5} vs {p:.4} ({z:+.2} SE)"));
    }
    Ok(format!("0 spawns in 2×{STEPS} steps at d ≥ θ; {}", report.join("; ")))
}

// 3 ------------------------------------------------------------------------

fn scripted_team(cfg: &EnvConfig, seed: u64) -> Result<EpisodeLog, String> {
    let mut policies: Vec<Box<dyn Policy>> = vec![
        Box::new(GreedyCleaner::new(1)),
        Box::new(GreedyCleaner::new(1)),
        Box::new(GreedyPicker::new(2)),
        Box::new(GreedyPicker::new(SOLO)),
    ];
    let mut rngs: Vec<SimRng> = (0..4).map(|i| policy_stream(seed, i)).collect();
    run_episode(cfg, seed, &mut policies, &mut rngs).map_err(|e| e.to_string())
}

fn conservation() -> Outcome {
    let mut rng = stream(0xC0_5E, 0);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = rng.gen_range(1..=16);
        let slots: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=n)).collect();
        let raw: Vec<f64> = (0..n)
            .map(|_| match rng.gen_range(0..3) {
                0 => 0.0,
                1 => rng.gen_range(0..5) as f64,
                _ => rng.gen_range(-5.0..20.0),
            })
            .collect();
        let shared = share_rewards(&raw, &TeamRegistry::from_slots(slots));
        let diff = (shared.iter().sum::<f64>() - raw.iter().sum::<f64>()).abs();
        worst = worst.max(diff);
        ensure(diff <= 1e-9, || format!("case {case}: |Σshared − Σraw| = {diff:e}"))?;
    }

    // shaping is private: same seed and actions, shaping on vs off
    let on = EnvConfig {
        identity_utility_bonus: 0.5,
        identity_utility_cost: 0.25,
        ..EnvConfig::default()
    };
    let off = EnvConfig {
        identity_utility_bonus: 0.0,
        identity_utility_cost: 0.0,
        ..EnvConfig::default()
    };
    let mut shaping_seen = 0.0;
    for seed in 0..10 {
        let with = scripted_team(&on, seed)?;
        let mut without = with.clone();
        without.config = off.clone();
        let without = without.replay_with(|_| {}).map_err(|e| e.to_string())?;
        ensure(collective_return(&with) == collective_return(&without), || {
            format!(
                "seed {seed}: {} with shaping vs {} without",
                collective_return(&with),
                collective_return(&without)
            )
        })?;
        shaping_seen += with
            .steps
            .iter()
            .flat_map(|s| &s.outcome.agents)
            .map(|a| a.shaping_reward.abs())
            .sum::<f64>();
    }
    ensure(shaping_seen > 0.0, || "shaping never fired; comparison is vacuous".into())?;
    Ok(format!(
        "1000 cases, max |Σshared − Σraw| = {worst:.1e}; return identical with/without shaping on 10 seeds"
    ))
}

// 4 ------------------------------------------------------------------------

#[derive(Default)]
struct AgentAudit {
    slot: usize,
    last: Option<u32>,
    count: u32,
}

fn switching_rules() -> Outcome {
    const PROPOSALS: usize = 10_000;
    let mut rng = stream(0x5A17, 0);
    let mut proposed = 0usize;
    let (mut accepted, mut rejected, mut violations, mut disagreements) = (0u32, 0u32, 0u32, 0u32);
    let mut episodes = 0u64;
    while proposed < PROPOSALS {
        let n = rng.gen_range(2..=6);
        let cfg = EnvConfig {
            num_agents: n,
            episode_length: 200,
            switch_interval: rng.gen_range(1..=30),
            max_switches: rng.gen_bool(0.7).then(|| rng.gen_range(0..=5)),
            lock_step: rng.gen_bool(0.7).then(|| rng.gen_range(0..=200)),
            ..EnvConfig::default()
        };
        let mut env = Env::new(cfg.clone(), episodes).map_err(|e| e.to_string())?;
        let mut events = Vec::new();
        let mut issued = 0usize;
        while !env.is_done() {
            let actions: Vec<Action> = (0..n)
                .map(|_| {
                    if proposed + issued < PROPOSALS && rng.gen_bool(0.5) {
                        issued += 1;
                        Action::ChooseTeam(rng.gen_range(0..=n))
                    } else {
                        Action::BASIC[rng.gen_range(0..7)]
                    }
                })
                .collect();
            events.extend(env.step(&actions).map_err(|e| e.to_string())?.team_events);
        }
        ensure(events.len() == issued, || format!("{} logged events for {issued} proposals", events.len()))?;

        // Independent audit: rebuild every agent's history from the log
        let mut audit: Vec<AgentAudit> = (0..n).map(|_| AgentAudit::default()).collect();
        for ev in &events {
            let a = &mut audit[ev.agent];
            let interval_ok = a.last.is_none_or(|l| ev.step - l >= cfg.switch_interval);
            let budget_ok = cfg.max_switches.is_none_or(|m| a.count < m);
            let lock_ok = cfg.lock_step.is_none_or(|l| ev.step < l);
            let expected = ev.to != a.slot && interval_ok && budget_ok && lock_ok;
            if ev.from != a.slot || ev.accepted != expected {
                disagreements += 1;
            }
            if ev.accepted {
                accepted += 1;
                if !(interval_ok && budget_ok && lock_ok) {
                    violations += 1;
                }
                a.slot = ev.to;
                a.last = Some(ev.step);
                a.count += 1;
            } else {
                rejected += 1;
            }
        }
        let slots: Vec<usize> = audit.iter().map(|a| a.slot).collect();
        ensure(env.state().teams().slots() == slots.as_slice(), || {
            format!("episode {episodes}: final registry disagrees with the audit")
        })?;
        proposed += issued;
        episodes += 1;
    }
    ensure(violations == 0, || format!("{violations} accepted changes break a rule"))?;
    ensure(disagreements == 0, || format!("{disagreements} decisions disagree with the audit"))?;
    ensure(accepted > 0 && rejected > 0, || "fuzz never exercised both outcomes".into())?;
    Ok(format!(
        "{proposed} proposals over {episodes} episodes: {accepted} accepted, {rejected} rejected, 0 violations"
    ))
}

// 5 ------------------------------------------------------------------------

fn identity_asymmetry() -> Outcome {
    // Reach 2 puts ten river cells in reach of a bank agent, five of them dirty
    let river = EnvConfig {
        num_agents: 1,
        river_rows: RowSpan::new(0, 1),
        orchard_rows: RowSpan::new(6, 9),
        reach_radius: 2,
        initial_pollution: 0.0,
        waste_spawn_prob: 0.0,
        ..EnvConfig::default()
    };
    let waste = [(0, 3), (0, 7), (1, 4), (1, 5), (1, 6)];
    for (identity, expected) in [(Identity::RiverCleaner, 3), (Identity::ApplePicker, 1)] {
        let mut env = Env::new(river.clone(), 21).map_err(|e| e.to_string())?;
        env.set_identities(&[identity]).map_err(|e| e.to_string())?;
        env.place_agent(0, Pos::new(2, 5)).map_err(|e| e.to_string())?;
        for (r, c) in waste {
            env.set_waste(Pos::new(r, c), true).map_err(|e| e.to_string())?;
        }
        ensure(env.observe(0).unwrap().waste_in_reach == 5, || "scenario needs 5 waste in reach".into())?;
        let out = env.step(&[Action::Clean]).map_err(|e| e.to_string())?;
        let removed = 5 - env.state().waste_count();
        ensure(out.agents[0].waste_cleaned == expected && removed == expected as usize, || {
            format!("{identity:?} removed {removed}, expected {expected}")
        })?;
    }

    // Default reach: nine orchard cells in reach, five with apples
    let orchard = EnvConfig {
        num_agents: 1,
        initial_pollution: 0.0,
        waste_spawn_prob: 0.0,
        apple_spawn_max: 0.0,
        ..EnvConfig::default()
    };
    let apples = [(6, 4), (6, 6), (7, 5), (8, 4), (8, 5)];
    for (identity, expected) in [(Identity::ApplePicker, 3), (Identity::RiverCleaner, 1)] {
        let mut env = Env::new(orchard.clone(), 22).map_err(|e| e.to_string())?;
        env.set_identities(&[identity]).map_err(|e| e.to_string())?;
        env.place_agent(0, Pos::new(7, 5)).map_err(|e| e.to_string())?;
        for (r, c) in apples {
            env.set_apple(Pos::new(r, c), true).map_err(|e| e.to_string())?;
        }
        ensure(env.observe(0).unwrap().apples_in_reach == 5, || "scenario needs 5 apples in reach".into())?;
        let out = env.step(&[Action::Pick]).map_err(|e| e.to_string())?;
        let removed = 5 - env.state().apple_count();
        ensure(out.agents[0].apples_harvested == expected && removed == expected as usize, || {
            format!("{identity:?} harvested {removed}, expected {expected}")
        })?;
        ensure(out.agents[0].material_reward == expected as f64, || "reward does not match harvest".into())?;
    }
    Ok("clean 3 vs 1 and pick 3 vs 1 with 5 targets in reach".into())
}

// 6 ------------------------------------------------------------------------

fn baseline_returns(policies: Vec<PolicyKind>, team_slots: Vec<usize>) -> Result<Vec<f64>, String> {
    let mut env = EnvConfig::default();
    env.initial_pollution = env.depletion_threshold;
    let spec = ExperimentSpec {
        env,
        policies,
        team_slots,
        ..ExperimentSpec::default()
    };
    spec.validate().map_err(|e| e.to_string())?;
    (0..10)
        .map(|seed| {
            let (rows, _) = run_seed(&spec, seed, |_, _| Ok(())).map_err(|e| e.to_string())?;
            Ok(rows[0].metrics.collective_return)
        })
        .collect()
}

fn social_dilemma() -> Outcome {
    use PolicyKind::{GreedyCleaner as C, GreedyPicker as P};
    let a = baseline_returns(vec![P; 4], vec![SOLO; 4])?;
    let b = baseline_returns(vec![C, C, P, P], vec![1; 4])?;
    ensure(a.iter().all(|&r| r == 0.0), || format!("(a) pickers only: {a:?}"))?;
    ensure(b.iter().all(|&r| r > 0.0), || format!("(b) team baseline: {b:?}"))?;
    ensure(a.iter().zip(&b).all(|(x, y)| y > x), || "(c) (b) does not beat (a) on every seed".into())?;
    let min = b.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    Ok(format!("(a) 0 on all 10 seeds; (b) min {min}, mean {mean:.1}"))
}

// 7 ------------------------------------------------------------------------

fn final_mean(kind: PolicyKind, seed: u64) -> Result<f64, String> {
    let spec = ExperimentSpec {
        env: EnvConfig::micro_orchard(),
        policies: vec![kind],
        team_slots: vec![SOLO],
        episodes: 500,
        seeds: vec![seed],
        ..ExperimentSpec::default()
    };
    let (rows, _) = run_seed(&spec, seed, |_, _| Ok(())).map_err(|e| e.to_string())?;
    Ok(rows[400..].iter().map(|r| r.metrics.collective_return).sum::<f64>() / 100.0)
}

fn learning_sanity() -> Outcome {
    let mut parts = Vec::new();
    for seed in 0..3 {
        let start = Instant::now();
        let q = final_mean(PolicyKind::QLearner, seed)?;
        let elapsed = start.elapsed();
        let r = final_mean(PolicyKind::Random, seed)?;
        ensure(elapsed < Duration::from_secs(60), || format!("seed {seed}: training took {elapsed:?}"))?;
        ensure(q >= 2.0 * r, || format!("seed {seed}: learner {q:.2} < 2 × random {r:.2}"))?;
        parts.push(format!("seed {seed}: {q:.2} vs {r:.2} ({:.2}×, {:.1} s)", q / r, elapsed.as_secs_f64()));
    }
    Ok(parts.join("; "))
}

// 8 ------------------------------------------------------------------------

fn pairwise_gini(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let total: f64 = x.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut diffs = 0.0;
    for a in x {
        for b in x {
            diffs += (a - b).abs();
        }
    }
    diffs / (2.0 * n * total)
}

fn gini_oracle() -> Outcome {
    let mut rng = stream(0x61_21, 0);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let len = rng.gen_range(1..=60);
        let v: Vec<f64> = match case % 4 {
            0 => (0..len).map(|_| rng.gen_range(0.0..100.0)).collect(),
            1 => (0..len).map(|_| rng.gen_range(0..20) as f64).collect(),
            2 => (0..len).map(|_| if rng.gen_bool(0.7) { 0.0 } else { rng.gen_range(0.0..1e3) }).collect(),
            _ => vec![rng.gen_range(0..3) as f64; len],
        };
        let diff = (gini(&v) - pairwise_gini(&v)).abs();
        worst = worst.max(diff);
        ensure(diff <= 1e-12, || format!("case {case}: |Δ| = {diff:e} on {v:?}"))?;
    }
    Ok(format!("100 vectors, max |Δ| = {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("determinism", determinism),
        ("threshold law", threshold_law),
        ("conservation", conservation),
        ("switching rules", switching_rules),
        ("identity asymmetry", identity_asymmetry),
        ("social-dilemma baseline", social_dilemma),
        ("learning sanity", learning_sanity),
        ("gini oracle", gini_oracle),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
