use swarmmap::harness::stats::median;
use swarmmap::harness::{run_batch, run_episode, CommMode, EpisodeConfig, SweepSpec};

fn cfg(seed: u64, comm_mode: CommMode) -> EpisodeConfig {
    EpisodeConfig {
        seed,
        comm_mode,
        ..EpisodeConfig::default()
    }
}

#[test]
fn full_broadcast_needs_fewer_steps_than_silence() {
    let steps = |mode| {
        let cfgs: Vec<EpisodeConfig> = (0..100).map(|s| cfg(s, mode)).collect();
        let rows = run_batch(&cfgs, 2).unwrap();
        median(&rows.iter().map(|r| f64::from(r.steps)).collect::<Vec<_>>())
    };
    let (full, none) = (steps(CommMode::Full), steps(CommMode::None));
    assert!(full < none, "full {full} vs none {none}");
}

#[test]
fn logs_are_internally_consistent() {
    for seed in 0..12 {
        let mode = CommMode::ALL[seed as usize % 4];
        let c = EpisodeConfig {
            bit_budget: [4, 16, 64, 128][seed as usize % 4],
            n_agents: 2 + seed as usize % 4,
            ..cfg(seed, mode)
        };
        let log = run_episode(&c).unwrap();
        let o = &log.outcome;
        assert!(o.steps_used <= c.max_steps);
        assert_eq!(o.steps_used as usize, log.steps.len());

        let bits: usize = log
            .steps
            .iter()
            .flat_map(|s| &s.messages)
            .map(|m| m.header.payload_bits)
            .sum();
        let msgs: usize = log.steps.iter().map(|s| s.messages.len()).sum();
        assert_eq!(bits, o.bits_tx);
        assert_eq!(msgs, o.msgs);

        let collisions: u32 = log
            .steps
            .iter()
            .map(|s| s.agents.iter().filter(|a| a.collided).count() as u32)
            .sum();
        assert_eq!(collisions, o.collisions);
        let expected =
            500.0 * f64::from(u8::from(o.success)) - 0.01 * f64::from(o.steps_used) - 3.0 * f64::from(collisions);
        assert_eq!(o.extrinsic_total, expected);

        let on_target = log
            .steps
            .last()
            .is_some_and(|s| s.agents.iter().any(|a| a.cell == log.target));
        assert_eq!(o.success, on_target);
        if mode == CommMode::None {
            assert_eq!(o.msgs, 0);
        }
    }
}

#[test]
fn transmissions_respect_token_refill() {
    for seed in 0..20 {
        let c = cfg(seed, CommMode::Gated);
        let log = run_episode(&c).unwrap();
        for id in 0..c.n_agents {
            let sent = log.steps.iter().filter(|s| s.agents[id].transmitted).count() as f64;
            let bound = c.token_initial + log.steps.len() as f64 * c.token_refill + 1.0;
            assert!(sent <= bound, "seed {seed} agent {id}: {sent} > {bound}");
        }
    }
}

#[test]
fn periodic_mode_keeps_its_cadence() {
    let log = run_episode(&cfg(2, CommMode::Periodic)).unwrap();
    for s in &log.steps {
        if !s.messages.is_empty() {
            assert_eq!(s.t % 10, 0);
        }
    }
}

#[test]
fn dropped_messages_are_logged_not_fused() {
    let c = EpisodeConfig {
        drop_probability: 1.0,
        ..cfg(1, CommMode::Full)
    };
    let log = run_episode(&c).unwrap();
    let sent: Vec<_> = log.steps.iter().flat_map(|s| &s.messages).collect();
    assert!(!sent.is_empty());
    assert!(sent
        .iter()
        .all(|m| m.delivered_to.is_empty() && !m.dropped_for.is_empty()));
    assert!(log.steps.iter().all(|s| s.fusions.is_empty()));
}

#[test]
fn budget_sweep_expands_to_every_combination() {
    let spec = SweepSpec::from_toml_str(
        "comm_modes = [\"gated\"]\nbit_budgets = [4, 16, 64, 128]\n[seeds]\nstart = 0\ncount = 100\n",
    )
    .unwrap();
    let cfgs = spec.expand().unwrap();
    assert_eq!(cfgs.len(), 400);
    assert!(cfgs.windows(2).all(|w| w[0].seed <= w[1].seed));
}
