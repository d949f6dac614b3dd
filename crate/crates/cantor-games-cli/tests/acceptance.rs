//! The acceptance battery: ten numbered criteria covering the whole
//! suite, each printing one pass/fail line (run with --nocapture to see
//! them). Every criterion is exercised end to end with exact dyadic
//! arithmetic; there are no tolerances anywhere.

use cantor_games::alice::{random_adversary, star_adversary, RandomProfile, StarPlan};
use cantor_games::bob::greedy::{DegreeCappedAlice, ExhaustiveStreams};
use cantor_games::bob::{
    apriori_allocator, blaming_with_extras, blaming_with_extras_within, dynamic_regions_unchecked,
    greedy_pairs, outside_contract, set_friends, set_groups, set_leaders,
};
use cantor_games::designs::{
    design_length, gen_index_list, line_label_bound, projective_plane, triangle_counterexample,
    verify_item1, verify_item2_small, DesignList, Xi,
};
use cantor_games::game::{
    run_match, Actor, AliceStrategy, BobStrategy, GameConfig, Mode, Outcome, Request,
    ScriptedAlice, Transcript,
};
use cantor_games::{CantorAddress, Dyadic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::AssertUnwindSafe;
use std::process::Command;

fn dy(s: &str) -> Dyadic {
    s.parse().unwrap()
}

fn report(n: u32, f: impl FnOnce()) {
    match std::panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(()) => println!("criterion {n}: pass"),
        Err(e) => {
            println!("criterion {n}: fail");
            std::panic::resume_unwind(e);
        }
    }
}

/// Every transcript in the battery must satisfy the ball-count invariant
/// at c = 1 (criterion 9 spot-checks more modes).
fn assert_ball_count(t: &Transcript) {
    assert!(t.metrics.ball_count_ok, "ball count failed: {}", t.outcome);
}

fn pair_cfg(d: &str, sizes: &[&str], n: Option<u32>) -> GameConfig {
    let sizes: Vec<Dyadic> = sizes.iter().map(|s| dy(s)).collect();
    let delta = sizes.iter().max().cloned().unwrap();
    let mut cfg = GameConfig::pair(Mode::PairPrefixFree, dy(d), delta, sizes);
    cfg.n = n;
    cfg
}

// 1. Greedy never dead-ends: exhaustive over all streams of length <= 6
// on 4 vertices at size 1/8, d = 1/2, plus a long random fuzz.
#[test]
fn criterion_01_greedy_soundness() {
    report(1, || {
        let cfg = pair_cfg("1/2^1", &["1/2^3"], Some(2));
        let eps = dy("1/2^3");
        let streams = ExhaustiveStreams::new(4, 6);
        let (mut ran, mut completed) = (0u64, 0u64);
        streams.for_each(|stream| {
            if stream.is_empty() {
                return;
            }
            let script: Vec<Request> = stream
                .iter()
                .map(|&(u, v)| Request { vertices: vec![u, v], size: eps.clone() })
                .collect();
            let mut alice = DegreeCappedAlice::new(script);
            let mut bob = greedy_pairs(&cfg);
            let t = run_match(&cfg, &mut alice, &mut bob, 20);
            match &t.outcome {
                Outcome::BobWinsScriptExhausted => completed += 1,
                // streams that bust a budget are Alice's violation, never
                // a greedy failure
                Outcome::RuleViolation { actor: Actor::Alice, .. } => {}
                other => panic!("greedy lost on {stream:?}: {other:?}"),
            }
            assert_ball_count(&t);
            ran += 1;
        });
        assert_eq!(ran, 55_986, "all streams of length 1..=6 over 6 pairs");
        assert!(completed > 0);

        for seed in [1, 2, 3] {
            let cfg = pair_cfg("1/2^1", &["1/2^3"], Some(6));
            let mut alice = random_adversary(seed, RandomProfile::Uniform).with_requests(10_000);
            let mut bob = greedy_pairs(&cfg);
            let t = run_match(&cfg, &mut alice, &mut bob, 25_000);
            assert_eq!(t.outcome, Outcome::BobWinsScriptExhausted, "{:?}", t.outcome);
            assert_eq!(t.metrics.allocations, t.metrics.requests);
            assert_ball_count(&t);
        }
    });
}

// 2. The star adversary defeats greedy, dynamic regions and the blaming
// allocator at d = 1/2 and d = 1/4, growing the zone by >= d per stage.
#[test]
fn criterion_02_star_adversary_wins() {
    report(2, || {
        for (d_str, ell) in [("1/2^1", 16u64), ("1/2^2", 256u64)] {
            let d = dy(d_str);
            let plan = StarPlan::new(&d).unwrap();
            let cfg = plan.game_config(Mode::PairPrefixFree);
            let design = gen_index_list(ell, 4, 64, Xi::new(9, 20), 2, 42);
            let mut bobs: Vec<Box<dyn BobStrategy>> = vec![
                Box::new(greedy_pairs(&cfg)),
                Box::new(outside_contract(dynamic_regions_unchecked(&cfg))),
                Box::new(outside_contract(
                    blaming_with_extras_within(CantorAddress::root(), design).unwrap(),
                )),
            ];
            for bob in &mut bobs {
                let mut alice = star_adversary(&d).unwrap();
                let t = run_match(&cfg, &mut alice, bob.as_mut(), 50_000);
                assert!(
                    matches!(t.outcome, Outcome::AliceWins { .. }),
                    "star vs {} at d={d_str}: {:?}",
                    bob.name(),
                    t.outcome
                );
                for row in &t.metrics.stages {
                    let growth = row
                        .zone_b
                        .checked_sub(&row.zone_a)
                        .expect("the zone only grows");
                    assert!(growth >= d, "stage {} grew by {growth} < {d}", row.stage);
                }
                if bob.name() == "greedy-pairs" {
                    assert_eq!(t.metrics.stages.len(), plan.stage_count, "all stages complete");
                }
                assert_ball_count(&t);
            }
        }
    });
}

/// A star-shaped in-contract stream: rotating centers, every other vertex
/// a leaf, sizes alternating over the allowed list.
fn star_shaped_script(cfg: &GameConfig, seed: u64, len: usize) -> Vec<Request> {
    let verts = 16u64;
    let mut out = Vec::with_capacity(len);
    let mut i = 0u64;
    while out.len() < len {
        let center = (seed + i / (verts - 1)) % verts;
        let leaf = (center + 1 + i % (verts - 1)) % verts;
        let size = cfg.allowed_sizes[(i % cfg.allowed_sizes.len() as u64) as usize].clone();
        out.push(Request { vertices: vec![center, leaf], size });
        i += 1;
    }
    out
}

// 3. Blaming allocator bounds under random and star-shaped in-contract
// load: everything allocated, per-vertex blames <= b*m^2, extras clean.
#[test]
fn criterion_03_blaming_bounds() {
    report(3, || {
        let cfg = pair_cfg("1/2^2", &["1/2^13", "1/2^14"], Some(6));
        let (b, m) = (8u64, cfg.allowed_sizes.len() as u64);
        let blame_bound = b * m * m;
        let design = gen_index_list(4096, 4, 1024, Xi::new(9, 20), 2, 42);
        for seed in 0..20u64 {
            let adversaries: Vec<Box<dyn AliceStrategy>> = vec![
                Box::new(random_adversary(seed, RandomProfile::Uniform).with_requests(1_000)),
                Box::new(ScriptedAlice::new(star_shaped_script(&cfg, seed, 1_000))),
            ];
            for mut alice in adversaries {
                let mut bob = blaming_with_extras(&cfg, design.clone(), 64).unwrap();
                let t = run_match(&cfg, alice.as_mut(), &mut bob, 5_000);
                assert_eq!(t.outcome, Outcome::BobWinsScriptExhausted, "{:?}", t.outcome);
                assert_eq!(
                    t.metrics.allocations, t.metrics.requests,
                    "unallocated in-contract requests (seed {seed})"
                );
                let max_blames: u64 = t.metrics.extras["max-blames-per-vertex"].parse().unwrap();
                assert!(max_blames <= blame_bound, "{max_blames} blames on one vertex");
                assert_eq!(t.metrics.extras["extra-blames"], "0", "an extra region was blamed");
                assert_ball_count(&t);
            }
        }
    });
}

// 4. The measure-exact incremental allocator: measure(U_{x,y}) is exactly
// half the accumulated weight after every increment, disjoint per vertex.
#[test]
fn criterion_04_apriori_exactness() {
    report(4, || {
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a = apriori_allocator();
            let mut neighbors: Vec<(u64, u64)> = Vec::new();
            for _ in 0..1_000 {
                let x = rng.gen_range(0..8u64);
                let y = rng.gen_range(0..8u64);
                if x == y {
                    continue;
                }
                let r = Dyadic::pow2_neg(rng.gen_range(3..=10));
                if &a.row_sum(x) + &r > Dyadic::one() || &a.row_sum(y) + &r > Dyadic::one() {
                    continue;
                }
                a.increment(x, y, &r).expect("in-bounds increments never fail");
                let pair = (x.min(y), x.max(y));
                if !neighbors.contains(&pair) {
                    neighbors.push(pair);
                }
                assert_eq!(a.set(x, y).measure(), a.weight(x, y).shr(1), "half-weight identity");
                for v in [x, y] {
                    let total: Dyadic = neighbors
                        .iter()
                        .filter(|&&(p, q)| p == v || q == v)
                        .map(|&(p, q)| a.set(p, q).measure())
                        .fold(Dyadic::zero(), |acc, m| &acc + &m);
                    assert_eq!(a.occupied(v).measure(), total, "rows stay disjoint at {v}");
                }
            }
        }
    });
}

// 5. Index-list regularity: at the production length, at least half of 20
// seeds pass pairwise and triple checks; the second property is verified
// exhaustively in the tiny regime.
#[test]
fn criterion_05_index_list_regularity() {
    report(5, || {
        let ell = design_length(16, 4, 32, 2);
        assert_eq!(ell, 8192, "smallest power of two >= 16 * 4^3 * log2(32)");
        let passing: Vec<u64> = (0..20u64)
            .filter(|&seed| {
                let d = gen_index_list(ell, 4, 32, Xi::new(9, 20), 2, seed);
                verify_item1(&d, 3).is_ok()
            })
            .collect();
        assert!(passing.len() >= 10, "only {} of 20 seeds pass", passing.len());

        for seed in 0..5u64 {
            let d = gen_index_list(12, 2, 6, Xi::new(9, 20), 2, seed);
            verify_item2_small(&d, 8).expect("exhaustive small-regime check");
        }
    });
}

// 6. Projective planes: exact counts, unique line intersections, and the
// label-length pigeonhole witness.
#[test]
fn criterion_06_projective_planes() {
    report(6, || {
        for q in [2u64, 3, 5] {
            let p = projective_plane(q).unwrap();
            let expect = (q * q + q + 1) as usize;
            assert_eq!(p.points.len(), expect);
            assert_eq!(p.lines.len(), expect);
            for line in &p.incidence {
                assert_eq!(line.len() as u64, q + 1);
            }
            for i in 0..p.incidence.len() {
                for j in i + 1..p.incidence.len() {
                    let common = p.incidence[i]
                        .iter()
                        .filter(|x| p.incidence[j].contains(x))
                        .count();
                    assert_eq!(common, 1, "lines {i} and {j} at q={q}");
                }
            }
            let bound = line_label_bound(&p);
            assert_eq!(bound.min_length, (q * q).ilog2());
            assert_eq!(bound.shorter_strings, (1u64 << bound.min_length) - 1);
            assert!(bound.shorter_strings < bound.lines, "pigeonhole witness");
        }
    });
}

fn set_cfg(size: &str) -> GameConfig {
    GameConfig {
        mode: Mode::Set,
        n: Some(4),
        s: 3,
        d: dy("1/2^2"),
        delta: dy(size),
        c: Dyadic::one(),
        allowed_sizes: vec![dy(size)],
        seed: 0,
    }
}

// 7. Set strategies at s = 3 over a 16-vertex universe: leaders and
// friends handle a long fuzz with ledgers in bounds; the group cascade
// double-merges under flooding.
#[test]
fn criterion_07_set_strategies() {
    report(7, || {
        let cfg = set_cfg("1/2^14");
        let design = || gen_index_list(4096, 4, 64, Xi::new(9, 20), 3, 1);
        let leader_bound = 32u64;
        let friend_scale = 1u64 << 12;
        for seed in 0..4u64 {
            let mut alice = random_adversary(seed, RandomProfile::Uniform).with_requests(1_000);
            let mut leaders = set_leaders(&cfg, design(), leader_bound).unwrap();
            let t = run_match(&cfg, &mut alice, &mut leaders, 5_000);
            assert_eq!(t.outcome, Outcome::BobWinsScriptExhausted, "{:?}", t.outcome);
            assert_eq!(t.metrics.allocations + t.metrics.passed, t.metrics.requests);
            let declared: u64 = t.metrics.extras["leader-declarations"].parse().unwrap();
            assert!(declared <= leader_bound);
            assert_ball_count(&t);

            let mut alice = random_adversary(seed, RandomProfile::Uniform).with_requests(1_000);
            let mut friends = set_friends(&cfg, design(), friend_scale).unwrap();
            let t = run_match(&cfg, &mut alice, &mut friends, 5_000);
            assert_eq!(t.outcome, Outcome::BobWinsScriptExhausted, "{:?}", t.outcome);
            assert_eq!(t.metrics.allocations + t.metrics.passed, t.metrics.requests);
            // each friend pair needs coappearance measure 1/scale, and a
            // request adds size to its three pairs
            let cap = dy("1/2^14").scale_int(3 * t.metrics.requests as u64 * friend_scale);
            let pairs: u64 = t.metrics.extras["friend-pairs"].parse().unwrap();
            assert!(Dyadic::from_int(pairs) <= cap, "{pairs} friend pairs above the budget");
            assert_ball_count(&t);
        }

        // flooding one set cascades both merges: 3 groups collapse to 1
        let designs: Vec<DesignList> = (0..3)
            .map(|i| gen_index_list(1024, 4, 64, Xi::new(9, 20), 3, 100 + i))
            .collect();
        let cfg = GameConfig { d: dy("1/2^1"), ..set_cfg("1/2^14") };
        let mut groups = set_groups(&cfg, designs, 1 << 13).unwrap();
        let script: Vec<Request> = (0..8)
            .map(|_| Request { vertices: vec![0, 1, 2], size: dy("1/2^14") })
            .collect();
        let mut alice = ScriptedAlice::new(script);
        let t = run_match(&cfg, &mut alice, &mut groups, 20);
        assert_eq!(t.outcome, Outcome::BobWinsScriptExhausted, "{:?}", t.outcome);
        assert_eq!(t.metrics.allocations, 8);
        assert_eq!(t.metrics.extras["merges"], "2", "a double merge");
        assert_ball_count(&t);
    });
}

// 8. The split-counting lower bound grows linearly in n.
#[test]
fn criterion_08_triangle_counterexample() {
    report(8, || {
        let mut last: Option<Dyadic> = None;
        for n in [8u32, 12, 16] {
            let t = triangle_counterexample(n);
            let floor = Dyadic::from_int(n as u64).shr(2); // n/4
            assert!(t.ratio >= floor, "ratio {} below n/4 at n={n}", t.ratio);
            assert_eq!(t.ratio.scale_int(1u64 << (n / 2)), Dyadic::from_int(t.count));
            if let Some(prev) = &last {
                assert!(&t.ratio > prev, "ratio must grow strictly");
            }
            last = Some(t.ratio);
        }
    });
}

// 9. The ball-count invariant at c = 1 holds across all four modes.
#[test]
fn criterion_09_ball_count_everywhere() {
    report(9, || {
        for mode in [
            Mode::PairPrefixFree,
            Mode::PairPrefixStable,
            Mode::PairBipartite,
            Mode::Set,
        ] {
            let s = if mode == Mode::Set { 3 } else { 2 };
            let cfg = GameConfig {
                mode,
                n: Some(5),
                s,
                d: dy("1/2^2"),
                delta: dy("1/2^9"),
                c: Dyadic::one(),
                allowed_sizes: vec![dy("1/2^9"), dy("1/2^10")],
                seed: 0,
            };
            for seed in 0..5u64 {
                let mut alice =
                    random_adversary(seed, RandomProfile::Uniform).with_requests(300);
                let mut bob = greedy_pairs(&cfg);
                let t = run_match(&cfg, &mut alice, &mut bob, 2_000);
                assert_ball_count(&t);
            }
        }
        // and on the adversarial transcripts
        let d = dy("1/2^1");
        let cfg = StarPlan::new(&d).unwrap().game_config(Mode::PairPrefixFree);
        let mut alice = star_adversary(&d).unwrap();
        let mut bob = greedy_pairs(&cfg);
        assert_ball_count(&run_match(&cfg, &mut alice, &mut bob, 10_000));
    });
}

// 10. cmd_verify round-trips every artifact kind and rejects three
// tampered fixtures.
#[test]
fn criterion_10_verify_round_trip() {
    report(10, || {
        let dir = tempfile::tempdir().unwrap();
        let bin = env!("CARGO_BIN_EXE_cantor-games");
        let verify = |path: &std::path::Path| {
            Command::new(bin)
                .arg("verify")
                .arg(path)
                .output()
                .unwrap()
                .status
                .code()
                .unwrap()
        };

        // a transcript from the star match of criterion 2
        let d = dy("1/2^1");
        let cfg = StarPlan::new(&d).unwrap().game_config(Mode::PairPrefixFree);
        let mut alice = star_adversary(&d).unwrap();
        let mut bob = greedy_pairs(&cfg);
        let t = run_match(&cfg, &mut alice, &mut bob, 10_000);
        let tpath = dir.path().join("star.ndjson");
        t.write_ndjson(std::io::BufWriter::new(std::fs::File::create(&tpath).unwrap()))
            .unwrap();
        assert_eq!(verify(&tpath), 0);

        // a design from criterion 5 (first passing seed)
        let ell = design_length(16, 4, 32, 2);
        let design = (0..20u64)
            .map(|seed| gen_index_list(ell, 4, 32, Xi::new(9, 20), 2, seed))
            .find(|d| verify_item1(d, 3).is_ok())
            .expect("criterion 5 guarantees a passing seed");
        let dpath = dir.path().join("design.txt");
        design
            .write(std::io::BufWriter::new(std::fs::File::create(&dpath).unwrap()))
            .unwrap();
        assert_eq!(verify(&dpath), 0);

        // the q = 3 plane from criterion 6
        let plane = projective_plane(3).unwrap();
        let ppath = dir.path().join("plane.csv");
        plane
            .write_csv(std::io::BufWriter::new(std::fs::File::create(&ppath).unwrap()))
            .unwrap();
        assert_eq!(verify(&ppath), 0);

        // tamper 1: transcript trailer claims one extra allocation
        let text = std::fs::read_to_string(&tpath).unwrap();
        let at = text.find("\"allocations\":").unwrap() + "\"allocations\":".len();
        let digits = text[at..].chars().take_while(|c| c.is_ascii_digit()).count();
        let n: u64 = text[at..at + digits].parse().unwrap();
        let bad = dir.path().join("tampered.ndjson");
        std::fs::write(&bad, format!("{}{}{}", &text[..at], n + 1, &text[at + digits..]))
            .unwrap();
        assert_ne!(verify(&bad), 0, "inflated allocation count must fail");

        // tamper 2: the first index set collapses to three elements
        let text = std::fs::read_to_string(&dpath).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[1] = "0 1 2";
        let bad = dir.path().join("tampered-design.txt");
        std::fs::write(&bad, lines.join("\n")).unwrap();
        assert_ne!(verify(&bad), 0, "a collapsed set must fail the regularity check");

        // tamper 3: one incidence row dropped from the plane
        let text = std::fs::read_to_string(&ppath).unwrap();
        let kept: Vec<&str> = text.lines().collect();
        let bad = dir.path().join("tampered-plane.csv");
        std::fs::write(&bad, kept[..kept.len() - 1].join("\n")).unwrap();
        assert_ne!(verify(&bad), 0, "a short line must fail the plane properties");
    });
}
