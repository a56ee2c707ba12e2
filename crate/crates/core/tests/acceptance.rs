//! Acceptance suite. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line regardless of output capture; exits non-zero on any failure.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swarmmap::coordination::{coordination_reward, exploration_reward, intrinsic_reward, IntrinsicWeights};
use swarmmap::geometry::{
    angular_distance, apply_rigid, integrate_path, phase_closed_form, phase_step, FrequencyVector, MotorCommand,
    PhaseState, Pose, RigidTransform, Vec2,
};
use swarmmap::gridness::{
    best_gridness, build_rate_map, hex_magnitude_for_spacing, spatial_autocorrelogram, synthetic_rate_map, Arena,
    RateMap, TrajectorySample,
};
use swarmmap::harness::stats::{mean, median, paired_bootstrap_p};
use swarmmap::harness::{run_batch, run_episode, CommMode, EpisodeConfig, MetricsRow};
use swarmmap::ib_comm::{gaussian_kl, kl_monte_carlo, GaussianLatent};
use swarmmap::spatial_codes::{isotropy_check, make_hex_code, GridCode};
use swarmmap::world::Cell;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn random_command(rng: &mut ChaCha8Rng) -> MotorCommand {
    let v = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    MotorCommand::new(v, rng.random_range(-1.0..1.0)).unwrap()
}

fn equivariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let cmds: Vec<MotorCommand> = (0..100).map(|_| random_command(&mut rng)).collect();
        let p0 = Pose::new(
            Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)),
            rng.random_range(0.0..TAU),
        )
        .unwrap();
        let g = RigidTransform::new(
            Vec2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)),
            rng.random_range(-PI..PI),
        );
        let dt = rng.random_range(0.01..0.5);
        let a = apply_rigid(&g, &integrate_path(&p0, &cmds, dt).unwrap());
        let b = integrate_path(&apply_rigid(&g, &p0), &cmds, dt).unwrap();
        worst = worst
            .max((a.position - b.position).amax())
            .max(angular_distance(a.heading(), b.heading()));
    }
    ensure(worst <= 1e-9, format!("max deviation {worst:.3e}"))?;
    Ok(format!("max deviation {worst:.3e}"))
}

fn phase_encoding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q = FrequencyVector::from_angle(rng.random_range(0.0..TAU), rng.random_range(0.1..3.0)).unwrap();
        let mut y = PhaseState::unit();
        let mut net = Vec2::zeros();
        for _ in 0..100 {
            let dr = Vec2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            y = phase_step(&y, &q, &dr);
            net += dr;
        }
        worst = worst.max((y.y - phase_closed_form(&q, &net).y).amax());
    }
    ensure(worst <= 1e-9, format!("max deviation {worst:.3e}"))?;
    Ok(format!("max deviation {worst:.3e}"))
}

fn isotropy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let code = make_hex_code(rng.random_range(0.1..10.0), rng.random_range(-PI..PI)).unwrap();
        let r = isotropy_check(&code);
        ensure(r.lambda == 1.5, format!("lambda {}", r.lambda))?;
        worst = worst.max(r.first_order_residual).max(r.second_order_residual);
    }
    ensure(worst <= 1e-12, format!("hex residual {worst:.3e}"))?;
    let mut k2_min = f64::INFINITY;
    for _ in 0..1000 {
        // a balanced pair is antipodal, so Σuuᵀ = 2uuᵀ has rank one
        let code = GridCode::evenly_spaced(2, 1.0, rng.random_range(-PI..PI)).unwrap();
        let r = isotropy_check(&code);
        ensure(r.first_order_residual <= 1e-12, "antipodal pair should balance")?;
        k2_min = k2_min.min(r.second_order_residual);
    }
    ensure(k2_min > 0.5, format!("K=2 second-order residual as low as {k2_min}"))?;
    Ok(format!(
        "hex residual {worst:.1e}, lambda 3/2, K=2 residual ≥ {k2_min:.3}"
    ))
}

fn noise_map(rng: &mut ChaCha8Rng, side: usize) -> RateMap {
    let rates = (0..side * side).map(|_| Some(rng.random::<f64>())).collect();
    RateMap::from_rates(side, side, rates, 1.0).unwrap()
}

fn hexagonality() -> Outcome {
    let q = hex_magnitude_for_spacing(12.0);
    let hex = best_gridness(
        &spatial_autocorrelogram(&synthetic_rate_map(&make_hex_code(q, 0.3).unwrap(), 64, 1.0).unwrap()).unwrap(),
    )
    .unwrap();
    ensure(
        hex.g60 >= 0.8 && hex.g60 > hex.g90,
        format!("hex g60 {:.3} g90 {:.3}", hex.g60, hex.g90),
    )?;
    let sq = best_gridness(
        &spatial_autocorrelogram(
            &synthetic_rate_map(&GridCode::square(2.0 * PI / 12.0, 0.3).unwrap(), 64, 1.0).unwrap(),
        )
        .unwrap(),
    )
    .unwrap();
    ensure(sq.g90 > sq.g60, format!("square g60 {:.3} g90 {:.3}", sq.g60, sq.g90))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let noise: Vec<f64> = (0..100)
        .map(|_| {
            best_gridness(&spatial_autocorrelogram(&noise_map(&mut rng, 64)).unwrap())
                .unwrap()
                .g60
        })
        .collect();
    let med = median(&noise);
    ensure(med.abs() < 0.2, format!("noise median g60 {med:.3}"))?;
    Ok(format!(
        "hex g60 {:.3} g90 {:.3}; square g60 {:.3} g90 {:.3}; noise median g60 {med:+.3}",
        hex.g60, hex.g90, sq.g60, sq.g90
    ))
}

fn kl_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let dim = rng.random_range(1..=8);
        let mean: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
        let var: Vec<f64> = (0..dim).map(|_| rng.random_range(0.2..3.0)).collect();
        let latent = GaussianLatent::new(mean, var).unwrap();
        let exact = gaussian_kl(&latent);
        let mc = kl_monte_carlo(&latent, 100_000, 1000 + i).unwrap();
        let z = (exact - mc.estimate).abs() / mc.std_error;
        ensure(
            z <= 3.0,
            format!("latent {i}: closed {exact:.5} mc {:.5} ({z:.2} se)", mc.estimate),
        )?;
        worst = worst.max(z);
    }
    Ok(format!("max |closed − mc| = {worst:.2} se"))
}

fn rate_map_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let arena = Arena::square(10.0).unwrap();
    for case in 0..50 {
        let n = rng.random_range(20..400);
        let traj: Vec<TrajectorySample> = (0..n)
            .map(|_| TrajectorySample {
                position: Vec2::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)),
                dwell: rng.random_range(0.1..2.0),
            })
            .collect();
        let act: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let m = build_rate_map(&traj, &act, &arena, 1.0).unwrap();
        ensure(m.rows() == 10 && m.cols() == 10, "shape")?;
        for r in 0..10 {
            for c in 0..10 {
                let (mut s, mut o) = (0.0, 0.0);
                for (p, a) in traj.iter().zip(&act) {
                    if p.position.x.floor() as usize == c && p.position.y.floor() as usize == r {
                        s += a;
                        o += p.dwell;
                    }
                }
                let want = (o > 0.0).then(|| s / o);
                ensure(
                    m.get(r, c) == want,
                    format!("case {case} bin ({r},{c}): {:?} vs {want:?}", m.get(r, c)),
                )?;
            }
        }
    }
    Ok("50 maps match bin for bin".into())
}

fn reward_arithmetic() -> Outcome {
    let cr = |d: f64| coordination_reward(&[d], 10.0, 3.0).unwrap();
    ensure(
        cr(5.0) == 0.5 && cr(2.0) == 0.0 && cr(20.0) == 1.0,
        "coordination values",
    )?;
    let agent = Cell::new(10, 10);
    let e = exploration_reward(&[(Cell::new(10, 12), true)], &agent, 0.1, 3);
    ensure(e == (-0.2f64).exp(), format!("exploration {e}"))?;
    let w = IntrinsicWeights::default();
    ensure(
        w.curiosity == 1.0 && w.coord == 0.5 && w.explore == 0.3,
        "default weights",
    )?;
    let b = intrinsic_reward(0.8, 0.5, e, w);
    ensure(
        b.composite == 1.0 * 0.8 + 0.5 * 0.5 + 0.3 * e,
        format!("composite {}", b.composite),
    )?;
    Ok("coordination, exploration and composite exact".into())
}

fn protocol_invariants() -> Outcome {
    let budgets = [4, 16, 64, 128, 1024];
    let mut fusions = 0;
    let mut msgs = 0;
    for seed in 0..100u64 {
        let cfg = EpisodeConfig {
            seed,
            bit_budget: budgets[seed as usize % budgets.len()],
            ..EpisodeConfig::default()
        };
        let log = run_episode(&cfg).map_err(|e| e.to_string())?;
        let n = cfg.n_agents;
        let mut tokens = vec![cfg.token_initial; n];
        let mut iou = vec![0.0; n];
        for step in &log.steps {
            for a in &step.agents {
                let spent = if a.transmitted { 1.0 } else { 0.0 };
                ensure(
                    !a.transmitted || tokens[a.id] >= 1.0 - 1e-9,
                    format!("seed {seed}: sent without a token"),
                )?;
                let want = (tokens[a.id] - spent + cfg.token_refill).clamp(0.0, cfg.token_initial);
                ensure(
                    (a.tokens - want).abs() < 1e-12,
                    format!("seed {seed} t {}: tokens {} vs {want}", step.t, a.tokens),
                )?;
                ensure(
                    (0.0..=10.0).contains(&a.tokens),
                    format!("seed {seed}: tokens {}", a.tokens),
                )?;
                tokens[a.id] = a.tokens;
                ensure(
                    a.iou >= iou[a.id],
                    format!("seed {seed} t {} agent {}: iou dropped", step.t, a.id),
                )?;
                iou[a.id] = a.iou;
            }
            for m in &step.messages {
                ensure(
                    m.header.payload_bits <= cfg.bit_budget,
                    format!("seed {seed}: {} bits", m.header.payload_bits),
                )?;
                msgs += 1;
            }
            for f in &step.fusions {
                ensure(f.idempotent, format!("seed {seed} t {}: fusion not idempotent", step.t))?;
                fusions += 1;
            }
        }
    }
    ensure(msgs > 0 && fusions > 0, "no traffic to check")?;
    Ok(format!("{msgs} messages, {fusions} fusions checked"))
}

fn sweep(seeds: std::ops::Range<u64>, mode: CommMode, budget: usize) -> Vec<MetricsRow> {
    let cfgs: Vec<EpisodeConfig> = seeds
        .map(|seed| EpisodeConfig {
            seed,
            maze_side: 29,
            n_agents: 2,
            comm_mode: mode,
            bit_budget: budget,
            ..EpisodeConfig::default()
        })
        .collect();
    run_batch(&cfgs, jobs()).expect("batch")
}

fn successes(rows: &[MetricsRow]) -> Vec<f64> {
    rows.iter().map(|r| f64::from(u8::from(r.success))).collect()
}

fn steps(rows: &[MetricsRow]) -> Vec<f64> {
    rows.iter().map(|r| f64::from(r.steps)).collect()
}

fn total_bits(rows: &[MetricsRow]) -> usize {
    rows.iter().map(|r| r.bits_tx).sum()
}

fn communication_benefit() -> Outcome {
    let none = sweep(0..200, CommMode::None, 128);
    let gated = sweep(0..200, CommMode::Gated, 128);
    let periodic = sweep(0..200, CommMode::Periodic, 128);
    let full = sweep(0..200, CommMode::Full, 128);
    let (sg, sn) = (mean(&successes(&gated)), mean(&successes(&none)));
    let (mg, mn) = (median(&steps(&gated)), median(&steps(&none)));
    let p_success = paired_bootstrap_p(&successes(&gated), &successes(&none), mean, 2000, 1);
    let p_steps = paired_bootstrap_p(&steps(&none), &steps(&gated), median, 2000, 2);
    let (bg, bp, bf) = (total_bits(&gated), total_bits(&periodic), total_bits(&full));
    let detail = format!(
        "success {sg:.3} vs {sn:.3} (p={p_success:.3}), median steps {mg} vs {mn} (p={p_steps:.3}), bits {bg} < {bp} < {bf}"
    );
    ensure(sg > sn && p_success < 0.05, detail.clone())?;
    ensure(mg < mn && p_steps < 0.05, detail.clone())?;
    ensure(bg < bp && bp < bf, detail.clone())?;
    Ok(detail)
}

fn bandwidth_robustness() -> Outcome {
    let rate = |mode, budget| mean(&successes(&sweep(0..100, mode, budget)));
    let (g128, g4) = (rate(CommMode::Gated, 128), rate(CommMode::Gated, 4));
    let (f128, f4) = (rate(CommMode::Full, 128), rate(CommMode::Full, 4));
    let dg = (g128 - g4) / g128;
    let df = (f128 - f4) / f128;
    let detail = format!("gated {g128:.2}→{g4:.2} (drop {dg:.3}), full {f128:.2}→{f4:.2} (drop {df:.3})");
    ensure(dg < df, detail.clone())?;
    Ok(detail)
}

fn determinism() -> Outcome {
    for (seed, mode) in [
        (3, CommMode::Gated),
        (4, CommMode::Full),
        (5, CommMode::Periodic),
        (6, CommMode::None),
    ] {
        let cfg = EpisodeConfig {
            seed,
            comm_mode: mode,
            ..EpisodeConfig::default()
        };
        let a = run_episode(&cfg).map_err(|e| e.to_string())?.to_json();
        let b = run_episode(&cfg).map_err(|e| e.to_string())?.to_json();
        ensure(a == b, format!("seed {seed} {mode}: logs differ"))?;
    }
    let cfgs: Vec<EpisodeConfig> = (0..6u64)
        .flat_map(|seed| {
            [CommMode::Gated, CommMode::Full].map(|comm_mode| EpisodeConfig {
                seed,
                comm_mode,
                ..EpisodeConfig::default()
            })
        })
        .collect();
    let serial = run_batch(&cfgs, 1).map_err(|e| e.to_string())?;
    let parallel = run_batch(&cfgs, 4).map_err(|e| e.to_string())?;
    ensure(serial == parallel, "batch rows depend on job count")?;
    Ok("logs byte-identical; batch invariant to jobs".into())
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "equivariance",
            budget: Duration::from_secs(5),
            run: equivariance,
        },
        Criterion {
            id: 2,
            name: "phase encoding",
            budget: Duration::from_secs(2),
            run: phase_encoding,
        },
        Criterion {
            id: 3,
            name: "isotropy",
            budget: Duration::from_secs(1),
            run: isotropy,
        },
        Criterion {
            id: 4,
            name: "hexagonality",
            budget: Duration::from_secs(30),
            run: hexagonality,
        },
        Criterion {
            id: 5,
            name: "kl closed form",
            budget: Duration::from_secs(20),
            run: kl_closed_form,
        },
        Criterion {
            id: 6,
            name: "rate map oracle",
            budget: Duration::from_secs(1),
            run: rate_map_oracle,
        },
        Criterion {
            id: 7,
            name: "reward arithmetic",
            budget: Duration::from_secs(1),
            run: reward_arithmetic,
        },
        Criterion {
            id: 8,
            name: "protocol invariants",
            budget: Duration::from_secs(120),
            run: protocol_invariants,
        },
        Criterion {
            id: 9,
            name: "communication benefit",
            budget: Duration::from_secs(600),
            run: communication_benefit,
        },
        Criterion {
            id: 10,
            name: "bandwidth robustness",
            budget: Duration::from_secs(600),
            run: bandwidth_robustness,
        },
        Criterion {
            id: 11,
            name: "determinism",
            budget: Duration::from_secs(60),
            run: determinism,
        },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(d) if elapsed > c.budget => Err(format!("{d}; took {elapsed:.1?}, budget {:?}", c.budget)),
            r => r,
        };
        match result {
            Ok(d) => println!("PASS criterion {:>2} {}: {d} [{elapsed:.2?}]", c.id, c.name),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {:>2} {}: {d} [{elapsed:.2?}]", c.id, c.name);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
