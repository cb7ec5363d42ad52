//! Cross-module behavior: conservation, determinism, lifecycle, and the
//! statistically derived expectations of the shipped models.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swarmsim::config::parse_config;
use swarmsim::models::{stream_rng, ModelSet, RandomVariable};
use swarmsim::world::{
    MessageEnvelope, NodeContext, NodeId, Payload, Position, Processor, TagValue, Transition, World,
};
use swarmsim::SimulationController;

struct Idle;
impl Processor for Idle {}

fn params(entries: &[(&str, TagValue)]) -> BTreeMap<String, TagValue> {
    entries
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn oracle_degree(positions: &[Position], v: usize, range: f64) -> u64 {
    let range_sq = range * range;
    positions
        .iter()
        .enumerate()
        .filter(|(u, p)| *u != v && p.distance_squared(&positions[v]) <= range_sq)
        .count() as u64
}

/// Conservation under reliable transmission: delivered equals the summed
/// neighbor counts of all senders, measured against the pairwise oracle.
#[test]
fn message_conservation_under_reliable() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20 {
        let n = rng.random_range(2..60usize);
        let positions: Vec<Position> = (0..n)
            .map(|_| Position::planar(rng.random_range(0.0..6.0), rng.random_range(0.0..6.0)))
            .collect();
        let mut world = World::new(ModelSet::defaults(0), (6.0, 6.0));
        for &p in &positions {
            world.add_node(p, vec![Box::new(Idle)]).unwrap();
        }
        let mut expected = 0u64;
        let mut sends = 0u64;
        for _ in 0..3 {
            for _ in 0..rng.random_range(0..10) {
                let v = rng.random_range(0..n);
                world
                    .send_message(NodeId::new(v as u32), Payload::empty("x"), 2)
                    .unwrap();
                expected += oracle_degree(&positions, v, 1.0);
                sends += 1;
            }
            world.step_round().unwrap();
        }
        // Drain the last round's in-flight deliveries.
        world.step_round().unwrap();
        assert_eq!(world.metrics().messages_sent, sends);
        assert_eq!(world.metrics().messages_delivered, expected);
    }
}

/// A reliable broadcast with four in-range neighbors turns into four
/// deliveries, all exactly one round after the send.
#[test]
fn reliable_broadcast_delivers_next_round() {
    let mut world = World::new(ModelSet::defaults(0), (10.0, 10.0));
    let hub = world
        .add_node(Position::planar(5.0, 5.0), vec![Box::new(Idle)])
        .unwrap();
    for (dx, dy) in [(0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5)] {
        world
            .add_node(Position::planar(5.0 + dx, 5.0 + dy), vec![Box::new(Idle)])
            .unwrap();
    }
    world.send_message(hub, Payload::empty("x"), 0).unwrap();
    let same_round = world.step_round().unwrap();
    assert_eq!(
        same_round.deliveries, 0,
        "nothing arrives in the send round"
    );
    let next_round = world.step_round().unwrap();
    assert_eq!(next_round.deliveries, 4);
}

/// The delay model shifts deliveries by whole fractions of rounds on top of
/// the next-round baseline.
#[test]
fn delay_model_shifts_delivery_rounds() {
    let run = |delay: f64| -> Vec<u64> {
        let mut controller = SimulationController::new(Some(1));
        controller
            .run_task(
                "prepare_world",
                &params(&[
                    ("width", TagValue::Real(4.0)),
                    ("height", TagValue::Real(4.0)),
                    ("transmission_model", TagValue::Str("delay".into())),
                    ("transmission.rv", TagValue::Str("constant".into())),
                    ("transmission.c", TagValue::Real(delay)),
                ]),
            )
            .unwrap();
        let world = controller.world_mut().unwrap();
        let sender = world
            .add_node(Position::planar(0.0, 0.0), vec![Box::new(Idle)])
            .unwrap();
        world
            .add_node(Position::planar(0.5, 0.0), vec![Box::new(Idle)])
            .unwrap();
        world.send_message(sender, Payload::empty("x"), 0).unwrap();
        (0..4)
            .map(|_| world.step_round().unwrap().deliveries)
            .collect()
    };
    // Sub-round delay lands in the round right after the send.
    assert_eq!(run(0.4), [0, 1, 0, 0]);
    // A delay beyond the next round boundary shifts one round further.
    assert_eq!(run(1.6), [0, 0, 1, 0]);
}

/// Every receiver the random-drop model picks is a true neighbor of the
/// sender, and dropped plus delivered adds up to the full neighbor count.
#[test]
fn random_drop_receivers_are_neighbor_subsets() {
    struct RecordSenders(Rc<RefCell<Vec<(u32, u32)>>>);
    impl Processor for RecordSenders {
        fn process_message(
            &mut self,
            ctx: &mut NodeContext<'_>,
            envelope: &MessageEnvelope,
        ) -> Transition {
            self.0
                .borrow_mut()
                .push((ctx.node_id().value(), envelope.sender.value()));
            Transition::Stay
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let pairs = Rc::new(RefCell::new(Vec::new()));
    let positions: Vec<Position> = (0..50)
        .map(|_| Position::planar(rng.random_range(0.0..4.0), rng.random_range(0.0..4.0)))
        .collect();

    let mut controller = SimulationController::new(Some(3));
    controller
        .run_task(
            "prepare_world",
            &params(&[
                ("width", TagValue::Real(4.0)),
                ("height", TagValue::Real(4.0)),
                ("transmission_model", TagValue::Str("random_drop".into())),
                ("transmission.p", TagValue::Real(0.5)),
            ]),
        )
        .unwrap();
    let world = controller.world_mut().unwrap();
    for &p in &positions {
        world
            .add_node(p, vec![Box::new(RecordSenders(pairs.clone()))])
            .unwrap();
    }
    let mut expected_receiver_sets = 0u64;
    for v in 0..positions.len() {
        world
            .send_message(NodeId::new(v as u32), Payload::empty("x"), 1)
            .unwrap();
        expected_receiver_sets += oracle_degree(&positions, v, 1.0);
    }
    world.step_round().unwrap();
    world.step_round().unwrap();

    let metrics = world.metrics();
    assert_eq!(
        metrics.messages_delivered + metrics.messages_dropped,
        expected_receiver_sets
    );
    assert!(metrics.messages_dropped > 0);
    assert!(metrics.messages_delivered > 0);
    let range_sq = 1.0;
    for (receiver, sender) in pairs.borrow().iter() {
        let d = positions[*receiver as usize].distance_squared(&positions[*sender as usize]);
        assert!(
            d <= range_sq && receiver != sender,
            "delivery to non-neighbor: {sender} -> {receiver}"
        );
    }
}

/// Degenerate drop probability: p=1 delivers nothing and counts every
/// receiver as dropped.
#[test]
fn random_drop_p1_drops_everything() {
    let mut controller = SimulationController::new(Some(1));
    controller
        .run_task(
            "prepare_world",
            &params(&[
                ("width", TagValue::Real(4.0)),
                ("height", TagValue::Real(4.0)),
                ("transmission_model", TagValue::Str("random_drop".into())),
                ("transmission.p", TagValue::Real(1.0)),
            ]),
        )
        .unwrap();
    let world = controller.world_mut().unwrap();
    let hub = world
        .add_node(Position::planar(1.0, 1.0), vec![Box::new(Idle)])
        .unwrap();
    for dx in [-0.5, 0.5] {
        world
            .add_node(Position::planar(1.0 + dx, 1.0), vec![Box::new(Idle)])
            .unwrap();
    }
    for _ in 0..10 {
        world.send_message(hub, Payload::empty("x"), 1).unwrap();
    }
    world.step_round().unwrap();
    world.step_round().unwrap();
    assert_eq!(world.metrics().messages_delivered, 0);
    assert_eq!(world.metrics().messages_dropped, 20);
}

/// Two identically seeded runs produce identical metrics and byte-identical
/// snapshots.
#[test]
fn deterministic_replay() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let mut controller = SimulationController::new(Some(7));
        controller.set_csv_path(&dir.path().join("m.csv")).unwrap();
        controller
            .run_task(
                "timesync_case",
                &params(&[
                    ("count", TagValue::Int(150)),
                    ("width", TagValue::Real(6.0)),
                    ("height", TagValue::Real(6.0)),
                    ("transmission_model", TagValue::Str("random_drop".into())),
                    ("transmission.p", TagValue::Real(0.2)),
                    ("timing", TagValue::Bool(false)),
                ]),
            )
            .unwrap();
        let world = controller.take_world().unwrap();
        let mut snapshot = Vec::new();
        world.save_snapshot(&mut snapshot).unwrap();
        let mut metrics = world.metrics().clone();
        metrics.wall_clock_ms = 0.0;
        (metrics, snapshot)
    };
    let (metrics_a, snapshot_a) = run();
    let (metrics_b, snapshot_b) = run();
    assert_eq!(metrics_a, metrics_b);
    assert_eq!(snapshot_a, snapshot_b);
}

/// Callback trace per processor matches boot (process_message | work)*,
/// with nothing while Sleeping and nothing after Inactive.
#[test]
fn processor_lifecycle_trace() {
    #[derive(PartialEq, Debug, Clone, Copy)]
    enum Call {
        Boot,
        Message,
        Work,
    }
    struct Scripted {
        log: Rc<RefCell<Vec<Call>>>,
        works: u32,
        sleep_after: u32,
        terminate_after: u32,
    }
    impl Processor for Scripted {
        fn boot(&mut self, _ctx: &mut NodeContext<'_>) -> Transition {
            self.log.borrow_mut().push(Call::Boot);
            Transition::Stay
        }
        fn process_message(
            &mut self,
            _ctx: &mut NodeContext<'_>,
            _envelope: &MessageEnvelope,
        ) -> Transition {
            self.log.borrow_mut().push(Call::Message);
            Transition::Stay
        }
        fn work(&mut self, _ctx: &mut NodeContext<'_>) -> Transition {
            self.log.borrow_mut().push(Call::Work);
            self.works += 1;
            if self.works == self.terminate_after {
                Transition::Terminate
            } else if self.works == self.sleep_after {
                Transition::Sleep
            } else {
                Transition::Stay
            }
        }
    }

    let log = Rc::new(RefCell::new(Vec::new()));
    let mut world = World::new(ModelSet::defaults(0), (4.0, 4.0));
    let scripted = world
        .add_node(
            Position::planar(0.0, 0.0),
            vec![Box::new(Scripted {
                log: log.clone(),
                works: 0,
                sleep_after: 2,
                terminate_after: 3,
            })],
        )
        .unwrap();
    let talker = world
        .add_node(Position::planar(0.5, 0.0), vec![Box::new(Idle)])
        .unwrap();

    // Round 0: work #1. Round 1: a message arrives, then work #2 -> sleep.
    world.send_message(talker, Payload::empty("x"), 0).unwrap();
    world.step_round().unwrap();
    world.step_round().unwrap();
    // Rounds 2-3: sleeping; a message sent in round 2 arrives in round 3
    // and must not reach the sleeping processor.
    world.send_message(talker, Payload::empty("x"), 0).unwrap();
    world.step_round().unwrap();
    world.step_round().unwrap();
    // Wake it; round 4: work #3 -> inactive. Nothing after that.
    world
        .set_processor_state(scripted, 0, swarmsim::ProcessorState::Active)
        .unwrap();
    world.step_round().unwrap();
    world.send_message(talker, Payload::empty("x"), 0).unwrap();
    world.step_round().unwrap();
    world.step_round().unwrap();

    use Call::*;
    assert_eq!(
        *log.borrow(),
        [Boot, Work, Message, Work, Work],
        "boot first and exactly once, no callbacks while sleeping or after termination"
    );
}

#[test]
fn rounds_increment_by_exactly_one() {
    let mut world = World::new(ModelSet::defaults(0), (4.0, 4.0));
    world
        .add_node(Position::planar(0.0, 0.0), vec![Box::new(Idle)])
        .unwrap();
    for expected in 0..5 {
        assert_eq!(world.round(), expected);
        world.step_round().unwrap();
    }
}

/// 100 uniform nodes in 10x10 at range 1: the mean neighborhood size sits
/// below the unbounded-area density of ~3.14 (boundary loss), and the edge
/// model agrees with the oracle exactly.
#[test]
fn mean_neighborhood_small_world() {
    let mut controller = SimulationController::new(Some(7));
    controller
        .run_task(
            "rect_world",
            &params(&[
                ("count", TagValue::Int(100)),
                ("width", TagValue::Int(10)),
                ("height", TagValue::Int(10)),
            ]),
        )
        .unwrap();
    let world = controller.world_mut().unwrap();
    let positions: Vec<Position> = world.nodes().map(|n| n.position()).collect();
    let mut total = 0u64;
    for v in 0..positions.len() {
        let got = world.neighbors(NodeId::new(v as u32)).unwrap().len() as u64;
        assert_eq!(got, oracle_degree(&positions, v, 1.0));
        total += got;
    }
    let mean = total as f64 / positions.len() as f64;
    assert!(mean < 3.1, "mean neighborhood {mean} should sit below 3.1");
    assert!(mean > 1.0, "seed 7 placement should not be degenerate");
}

/// 1000 uniform nodes in 10x10: the empirical mean degree is within 10% of
/// the boundary-corrected expectation (n-1) * P(|U - V| <= r), with the
/// pair probability estimated by Monte Carlo integration.
#[test]
fn mean_degree_matches_boundary_corrected_expectation() {
    // Independent Monte Carlo estimate of P(two uniform points in 10x10
    // within distance 1).
    let mut mc = ChaCha8Rng::seed_from_u64(1234);
    let samples = 2_000_000u32;
    let mut hits = 0u64;
    for _ in 0..samples {
        let ax: f64 = mc.random_range(0.0..10.0);
        let ay: f64 = mc.random_range(0.0..10.0);
        let bx: f64 = mc.random_range(0.0..10.0);
        let by: f64 = mc.random_range(0.0..10.0);
        let (dx, dy) = (ax - bx, ay - by);
        if dx * dx + dy * dy <= 1.0 {
            hits += 1;
        }
    }
    let pair_probability = hits as f64 / samples as f64;
    let expected = 999.0 * pair_probability;

    let mut controller = SimulationController::new(Some(7));
    controller
        .run_task(
            "rect_world",
            &params(&[
                ("count", TagValue::Int(1000)),
                ("width", TagValue::Int(10)),
                ("height", TagValue::Int(10)),
            ]),
        )
        .unwrap();
    let world = controller.world_mut().unwrap();
    let n = world.node_count();
    let mut total = 0u64;
    for v in 0..n {
        total += world.neighbors(NodeId::new(v as u32)).unwrap().len() as u64;
    }
    let empirical = total as f64 / n as f64;
    assert!(
        (empirical - expected).abs() <= 0.1 * expected,
        "empirical mean degree {empirical} vs boundary-corrected expectation {expected}"
    );
}

/// Placement draws from its own named stream: unrelated configuration lines
/// cannot shift node positions.
#[test]
fn placement_is_unaffected_by_unrelated_config_lines() {
    let positions = |config: &str| -> Vec<(u64, u64)> {
        let program = parse_config(config).unwrap();
        let mut controller = SimulationController::new(Some(5));
        controller.run_program(&program).unwrap();
        controller
            .world()
            .unwrap()
            .nodes()
            .map(|n| (n.position().x.to_bits(), n.position().y.to_bits()))
            .collect()
    };
    let plain = positions("rect_world count=40 width=10 height=10\n");
    let with_noise = positions(
        "set label=experiment other=1\n# comment\nset distance_estimate=noisy distance.sigma=0.5\nrect_world count=40 width=10 height=10\n",
    );
    assert_eq!(plain, with_noise);
}

/// u is a neighbor of v exactly when v is a neighbor of u.
#[test]
fn neighborhoods_are_symmetric() {
    let mut controller = SimulationController::new(Some(11));
    controller
        .run_task(
            "rect_world",
            &params(&[
                ("count", TagValue::Int(120)),
                ("width", TagValue::Real(5.0)),
                ("height", TagValue::Real(5.0)),
            ]),
        )
        .unwrap();
    let world = controller.world_mut().unwrap();
    let n = world.node_count();
    let neighbor_sets: Vec<Vec<NodeId>> = (0..n)
        .map(|v| world.neighbors(NodeId::new(v as u32)).unwrap())
        .collect();
    for v in 0..n {
        for u in &neighbor_sets[v] {
            assert!(
                neighbor_sets[u.index()].contains(&NodeId::new(v as u32)),
                "asymmetric edge {v} <-> {u}"
            );
        }
    }
}

/// The default-seed uniform(0, 1) stream has the pinned sample mean.
#[test]
fn uniform_sample_mean_is_pinned() {
    let mut rv = RandomVariable::uniform(0.0, 1.0, stream_rng(0, "rv.uniform")).unwrap();
    let mean = (0..10_000).map(|_| rv.sample()).sum::<f64>() / 10_000.0;
    assert!(
        (0.49..=0.51).contains(&mean),
        "uniform mean {mean} outside [0.49, 0.51]"
    );
}
