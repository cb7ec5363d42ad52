//! Time-synchronization traffic workload and benchmark harness.
//!
//! Every node periodically broadcasts a time-stamped message; receivers
//! convert the stamp into their local clock. The protocol itself is trivial
//! on purpose: the workload exists to measure how fast the simulator
//! dispatches large message volumes, and how the edge-model choice trades
//! memory against runtime.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::config::{generate_rect_world, ScenarioSpec};
use crate::models::random::{stream_rng, stream_seed};
use crate::models::{build_random_variable, ModelFamily, ModelRegistry, ParamReader};
use crate::sequencer::controller::{
    ReportRow, SimulationController, SimulationTask, TaskError, TaskParams,
};
use crate::sequencer::tasks::build_model_set;
use crate::sequencer::Metrics;
use crate::world::{
    MessageEnvelope, NodeContext, NodeId, Payload, Processor, TagValue, Transition, World,
};

/// Messages each node sends over a full run.
pub const DEFAULT_TOTAL_MESSAGES: u32 = 380;
/// Accounted message size: two 8-byte stamps.
pub const DEFAULT_SIZE_BYTES: u64 = 16;

/// Wire content of one timesync broadcast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimesyncPayload {
    pub origin: NodeId,
    /// Sender's local clock at send time.
    pub local_send_stamp: f64,
    /// 0-based message index at the sender.
    pub sequence: u32,
}

impl TimesyncPayload {
    pub const KIND: &'static str = "timesync";

    pub fn encode(&self) -> Payload {
        let mut bytes = Vec::with_capacity(16);
        bytes.extend_from_slice(&self.origin.value().to_le_bytes());
        bytes.extend_from_slice(&self.sequence.to_le_bytes());
        bytes.extend_from_slice(&self.local_send_stamp.to_le_bytes());
        Payload::new(Self::KIND, bytes)
    }

    pub fn decode(payload: &Payload) -> Option<TimesyncPayload> {
        if payload.kind != Self::KIND || payload.bytes.len() != 16 {
            return None;
        }
        let b = &payload.bytes;
        Some(TimesyncPayload {
            origin: NodeId::new(u32::from_le_bytes(b[0..4].try_into().ok()?)),
            sequence: u32::from_le_bytes(b[4..8].try_into().ok()?),
            local_send_stamp: f64::from_le_bytes(b[8..16].try_into().ok()?),
        })
    }
}

/// Broadcasts one stamped message per send period until `total` have been
/// sent, converting every received stamp into the local clock. The local
/// clock is the simulation round plus a fixed per-node offset. Terminates in
/// the round after its final send, once that round's arrivals are processed;
/// final counters are published as volatile node tags
/// (`timesync.sent` / `timesync.received` / `timesync.converted`).
pub struct TimesyncProcessor {
    offset: f64,
    total: u32,
    period: u32,
    size_bytes: u64,
    sent: u32,
    ticks: u32,
    received: u64,
    converted: u64,
    converted_sum: f64,
}

impl TimesyncProcessor {
    pub fn new(offset: f64, total: u32, period: u32, size_bytes: u64) -> Self {
        assert!(period > 0, "send period must be positive");
        TimesyncProcessor {
            offset,
            total,
            period,
            size_bytes,
            sent: 0,
            ticks: 0,
            received: 0,
            converted: 0,
            converted_sum: 0.0,
        }
    }

    fn publish_counters(&self, ctx: &mut NodeContext<'_>) {
        ctx.set_tag("timesync.sent", TagValue::Int(self.sent as i64), false);
        ctx.set_tag(
            "timesync.received",
            TagValue::Int(self.received as i64),
            false,
        );
        ctx.set_tag(
            "timesync.converted",
            TagValue::Int(self.converted as i64),
            false,
        );
        ctx.set_tag(
            "timesync.converted_sum",
            TagValue::Real(self.converted_sum),
            false,
        );
    }
}

impl Processor for TimesyncProcessor {
    fn process_message(
        &mut self,
        _ctx: &mut NodeContext<'_>,
        envelope: &MessageEnvelope,
    ) -> Transition {
        if let Some(payload) = TimesyncPayload::decode(&envelope.payload) {
            self.received += 1;
            // Convert the remote stamp into the local clock. The sender
            // offset estimate is zero, so the conversion is the stamp plus
            // the receiver offset; a fixed-cost arithmetic transform.
            let converted = payload.local_send_stamp + self.offset;
            self.converted_sum += converted;
            self.converted += 1;
        }
        Transition::Stay
    }

    fn work(&mut self, ctx: &mut NodeContext<'_>) -> Transition {
        if self.sent == self.total {
            self.publish_counters(ctx);
            return Transition::Terminate;
        }
        if self.ticks.is_multiple_of(self.period) {
            let stamp = ctx.round() as f64 + self.offset;
            let payload = TimesyncPayload {
                origin: ctx.node_id(),
                local_send_stamp: stamp,
                sequence: self.sent,
            };
            if ctx.send(payload.encode(), self.size_bytes).is_ok() {
                self.sent += 1;
            }
        }
        self.ticks += 1;
        Transition::Stay
    }
}

/// Resolved configuration of one timesync run.
pub struct TimesyncConfig {
    pub count: u64,
    pub width: f64,
    pub height: f64,
    pub total_messages: u32,
    pub send_period: u32,
    pub size_bytes: u64,
    pub max_rounds: Option<u64>,
}

/// Outcome of one run: the finished world plus whether the wall-clock
/// budget was exceeded (the run stops early in that case).
pub struct TimesyncOutcome {
    pub world: World,
    pub over_budget: bool,
}

/// Builds a fresh world per the task parameters, attaches one
/// [`TimesyncProcessor`] to every node, and drives the simulation until done.
/// Per-node clock offsets come from the ("timesync.offset", seed) stream;
/// the distribution is configurable through `offset.*` parameters and
/// defaults to uniform(0, 1).
pub fn run_timesync(
    registry: &ModelRegistry,
    params: &mut TaskParams<'_>,
    cfg: &TimesyncConfig,
    seed: u64,
    budget_ms: Option<f64>,
) -> Result<TimesyncOutcome, TaskError> {
    let models = build_model_set(registry, params, seed)?;
    let offset_params = params.scoped("offset");
    let mut reader = ParamReader::new(&offset_params);
    let mut offsets = if offset_params.is_empty() {
        crate::models::RandomVariable::uniform(0.0, 1.0, stream_rng(seed, "timesync.offset"))
            .map_err(TaskError::Model)?
    } else {
        let rv = build_random_variable(&mut reader, seed, "timesync.offset")?;
        reader.finish()?;
        rv
    };

    let spec = ScenarioSpec {
        count: cfg.count,
        width: cfg.width,
        height: cfg.height,
        seed,
        placement: "uniform".to_string(),
    };
    let positions = generate_rect_world(&spec)?;

    let mut world = World::new(models, (cfg.width, cfg.height));
    for position in positions {
        world.add_node(
            position,
            vec![Box::new(TimesyncProcessor::new(
                offsets.sample(),
                cfg.total_messages,
                cfg.send_period,
                cfg.size_bytes,
            ))],
        )?;
    }
    world.set_max_rounds(cfg.max_rounds);

    let start = Instant::now();
    let mut over_budget = false;
    while !world.is_done() {
        world.step_round()?;
        if let Some(budget) = budget_ms {
            if start.elapsed().as_secs_f64() * 1000.0 > budget {
                over_budget = true;
                break;
            }
        }
    }
    world.metrics_mut().wall_clock_ms += start.elapsed().as_secs_f64() * 1000.0;
    Ok(TimesyncOutcome { world, over_budget })
}

/// `timesync_case count=.. width=.. height=..` runs the traffic workload on
/// a fresh world and emits one metrics CSV row. The finished world replaces
/// the controller's current world so follow-up tasks can inspect it.
pub struct TimesyncCaseTask;

impl SimulationTask for TimesyncCaseTask {
    fn name(&self) -> &'static str {
        "timesync_case"
    }

    fn run(
        &self,
        controller: &mut SimulationController,
        params: &mut TaskParams<'_>,
    ) -> Result<BTreeMap<String, TagValue>, TaskError> {
        let count = params.require_int("count")?;
        if count <= 0 {
            return Err(TaskError::BadParameter {
                key: "count".to_string(),
                reason: format!("must be positive, got {count}"),
            });
        }
        let cfg = TimesyncConfig {
            count: count as u64,
            width: params.require_real("width")?,
            height: params.require_real("height")?,
            total_messages: read_u32(params, "total_messages", DEFAULT_TOTAL_MESSAGES)?,
            send_period: read_u32(params, "send_period", 1)?.max(1),
            size_bytes: params.u64_opt("size_bytes")?.unwrap_or(DEFAULT_SIZE_BYTES),
            max_rounds: params.u64_opt("max_rounds")?,
        };
        let timing = params.bool_or("timing", true)?;
        let seed = controller.resolve_seed(params)?;
        let outcome = run_timesync(controller.registry(), params, &cfg, seed, None)?;
        let row = ReportRow::from_world(&outcome.world, timing);
        let results = {
            let m = outcome.world.metrics();
            let mut out = BTreeMap::new();
            out.insert(
                "rounds".to_string(),
                TagValue::Int(m.rounds_executed as i64),
            );
            out.insert(
                "msgs_sent".to_string(),
                TagValue::Int(m.messages_sent as i64),
            );
            out.insert(
                "msgs_delivered".to_string(),
                TagValue::Int(m.messages_delivered as i64),
            );
            out.insert(
                "msgs_dropped".to_string(),
                TagValue::Int(m.messages_dropped as i64),
            );
            out
        };
        controller.set_world(outcome.world);
        controller.emit_report_row(&row)?;
        Ok(results)
    }
}

fn read_u32(params: &mut TaskParams<'_>, key: &str, default: u32) -> Result<u32, TaskError> {
    match params.int(key)? {
        None => Ok(default),
        Some(v) if (0..=u32::MAX as i64).contains(&v) => Ok(v as u32),
        Some(v) => Err(TaskError::BadParameter {
            key: key.to_string(),
            reason: format!("out of range: {v}"),
        }),
    }
}

/// One benchmark configuration: a scenario plus the models under test.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub count: u64,
    pub width: f64,
    pub height: f64,
    pub edge_model: String,
    pub transmission_model: String,
}

/// Result of one executed sweep cell.
pub struct SweepOutcome {
    pub row_index: usize,
    pub repetition: u32,
    pub metrics: Metrics,
    /// Wall-clock milliseconds, or -1 when the row exceeded its budget and
    /// was cut short.
    pub wall_ms: i64,
}

/// Runs every row of the benchmark grid `repetitions` times with derived
/// seeds (base seed, row index, repetition), appending one CSV row per run.
/// Rows that blow the optional wall-clock budget record `wall_ms = -1`
/// instead of aborting the sweep; configuration errors abort before any row
/// runs.
pub fn bench_sweep(
    controller: &mut SimulationController,
    rows: &[SweepRow],
    repetitions: u32,
    base_seed: u64,
    budget_ms: Option<f64>,
) -> Result<Vec<SweepOutcome>, TaskError> {
    if rows.is_empty() {
        return Err(TaskError::BadParameter {
            key: "rows".to_string(),
            reason: "must not be empty".to_string(),
        });
    }
    if repetitions == 0 {
        return Err(TaskError::BadParameter {
            key: "repetitions".to_string(),
            reason: "must be positive".to_string(),
        });
    }
    for (index, row) in rows.iter().enumerate() {
        if row.count == 0 || row.width <= 0.0 || row.height <= 0.0 {
            return Err(TaskError::BadParameter {
                key: format!("rows[{index}]"),
                reason: "count and extents must be positive".to_string(),
            });
        }
        for (family, id) in [
            (ModelFamily::Edge, &row.edge_model),
            (ModelFamily::Transmission, &row.transmission_model),
        ] {
            if !controller.registry().contains(family, id) {
                return Err(TaskError::Model(
                    crate::models::ModelError::UnknownIdentifier {
                        family: family.as_str(),
                        identifier: id.clone(),
                    },
                ));
            }
        }
    }

    let mut outcomes = Vec::with_capacity(rows.len() * repetitions as usize);
    for repetition in 0..repetitions {
        for (row_index, row) in rows.iter().enumerate() {
            let seed = stream_seed(base_seed, &format!("bench.row{row_index}.rep{repetition}"));
            let invocation: BTreeMap<String, TagValue> = [
                (
                    "edge_model".to_string(),
                    TagValue::Str(row.edge_model.clone()),
                ),
                (
                    "transmission_model".to_string(),
                    TagValue::Str(row.transmission_model.clone()),
                ),
            ]
            .into_iter()
            .collect();
            let mut params = TaskParams::new(&invocation, controller.env().clone());
            let cfg = TimesyncConfig {
                count: row.count,
                width: row.width,
                height: row.height,
                total_messages: DEFAULT_TOTAL_MESSAGES,
                send_period: 1,
                size_bytes: DEFAULT_SIZE_BYTES,
                max_rounds: None,
            };
            let outcome = run_timesync(controller.registry(), &mut params, &cfg, seed, budget_ms)?;
            let wall_ms = if outcome.over_budget {
                -1
            } else {
                outcome.world.metrics().wall_clock_ms.round() as i64
            };
            let mut report = ReportRow::from_world(&outcome.world, true);
            report.wall_ms = wall_ms;
            controller.emit_report_row(&report)?;
            outcomes.push(SweepOutcome {
                row_index,
                repetition,
                metrics: outcome.world.metrics().clone(),
                wall_ms,
            });
        }
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelSet;
    use crate::world::Position;

    #[test]
    fn payload_round_trip() {
        let payload = TimesyncPayload {
            origin: NodeId::new(7),
            local_send_stamp: 123.456,
            sequence: 42,
        };
        let encoded = payload.encode();
        assert_eq!(encoded.bytes.len(), 16);
        assert_eq!(TimesyncPayload::decode(&encoded), Some(payload));
        assert_eq!(TimesyncPayload::decode(&Payload::empty("other")), None);
    }

    fn manual_pair_world(distance: f64) -> World {
        let mut world = World::new(ModelSet::defaults(0), (10.0, 10.0));
        for x in [0.0, distance] {
            world
                .add_node(
                    Position::planar(x, 0.0),
                    vec![Box::new(TimesyncProcessor::new(0.25, 380, 1, 16))],
                )
                .unwrap();
        }
        world
    }

    fn run_to_completion(world: &mut World) {
        while !world.is_done() {
            world.step_round().unwrap();
        }
    }

    #[test]
    fn disconnected_pair_sends_without_delivering() {
        let mut world = manual_pair_world(5.0);
        run_to_completion(&mut world);
        assert_eq!(world.metrics().messages_sent, 760);
        assert_eq!(world.metrics().messages_delivered, 0);
    }

    #[test]
    fn connected_pair_delivers_everything() {
        let mut world = manual_pair_world(0.5);
        run_to_completion(&mut world);
        assert_eq!(world.metrics().messages_sent, 760);
        assert_eq!(world.metrics().messages_delivered, 760);
        // 380 send rounds plus the drain round.
        assert_eq!(world.metrics().rounds_executed, 381);
        for id in [NodeId::new(0), NodeId::new(1)] {
            assert_eq!(
                world.node_tag(id, "timesync.sent").unwrap(),
                Some(&TagValue::Int(380))
            );
            assert_eq!(
                world.node_tag(id, "timesync.received").unwrap(),
                Some(&TagValue::Int(380))
            );
            // Every received stamp was converted.
            assert_eq!(
                world.node_tag(id, "timesync.converted").unwrap(),
                Some(&TagValue::Int(380))
            );
        }
    }

    #[test]
    fn send_period_spreads_sends() {
        let mut world = World::new(ModelSet::defaults(0), (10.0, 10.0));
        world
            .add_node(
                Position::planar(0.0, 0.0),
                vec![Box::new(TimesyncProcessor::new(0.0, 3, 2, 16))],
            )
            .unwrap();
        run_to_completion(&mut world);
        assert_eq!(world.metrics().messages_sent, 3);
        // Sends at rounds 0, 2, 4; termination in round 5.
        assert_eq!(world.metrics().rounds_executed, 6);
    }

    #[test]
    fn zero_offset_conversion_sums_are_exact() {
        use std::collections::BTreeMap;
        // Two nodes in a 0.3 x 0.3 box are always in range; with offset 0
        // the converted stamps are exactly the send rounds 0, 1, 2.
        let invocation: BTreeMap<String, TagValue> = [
            ("count".to_string(), TagValue::Int(2)),
            ("width".to_string(), TagValue::Real(0.3)),
            ("height".to_string(), TagValue::Real(0.3)),
            ("total_messages".to_string(), TagValue::Int(3)),
            ("offset.rv".to_string(), TagValue::Str("constant".into())),
            ("offset.c".to_string(), TagValue::Real(0.0)),
        ]
        .into_iter()
        .collect();
        let dir = tempfile::tempdir().unwrap();
        let mut controller = SimulationController::new(Some(2));
        controller.set_csv_path(&dir.path().join("m.csv")).unwrap();
        controller.run_task("timesync_case", &invocation).unwrap();
        let world = controller.world().unwrap();
        for id in [NodeId::new(0), NodeId::new(1)] {
            assert_eq!(
                world.node_tag(id, "timesync.converted_sum").unwrap(),
                Some(&TagValue::Real(0.0 + 1.0 + 2.0))
            );
        }
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let mut controller = SimulationController::new(None);
        assert!(bench_sweep(&mut controller, &[], 1, 0, None).is_err());
        let row = SweepRow {
            count: 2,
            width: 1.0,
            height: 1.0,
            edge_model: "bogus".to_string(),
            transmission_model: "reliable".to_string(),
        };
        assert!(bench_sweep(&mut controller, &[row], 1, 0, None).is_err());
    }

    #[test]
    fn sweep_is_reproducible_within_repetition() {
        let rows = [SweepRow {
            count: 30,
            width: 5.0,
            height: 5.0,
            edge_model: "list".to_string(),
            transmission_model: "reliable".to_string(),
        }];
        let run = || {
            let dir = tempfile::tempdir().unwrap();
            let mut controller = SimulationController::new(None);
            controller.set_csv_path(&dir.path().join("m.csv")).unwrap();
            bench_sweep(&mut controller, &rows, 2, 11, None).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.metrics.messages_delivered, y.metrics.messages_delivered);
            assert_eq!(x.metrics.messages_sent, 30 * 380);
        }
        // Different repetition index means a different derived seed, which
        // shows up in the placement-dependent delivery counts.
        assert_ne!(
            a[0].metrics.messages_delivered,
            a[1].metrics.messages_delivered
        );
    }
}
