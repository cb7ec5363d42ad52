//! Built-in simulation tasks, pre-registered on every controller.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::rc::Rc;
use std::time::Instant;

use crate::config::generate_rect_world;
use crate::config::ScenarioSpec;
use crate::models::{ModelRegistry, ModelSet};
use crate::sequencer::controller::{
    ReportRow, SimulationController, SimulationTask, TaskError, TaskParams,
};
use crate::world::{TagValue, World};

/// The shipped task roster.
pub fn builtin_tasks() -> Vec<Rc<dyn SimulationTask>> {
    vec![
        Rc::new(SetTask),
        Rc::new(PrepareWorldTask),
        Rc::new(RectWorldTask),
        Rc::new(RunSimulationTask),
        Rc::new(SaveWorldTask),
        Rc::new(LoadWorldTask),
        Rc::new(crate::casestudy::TimesyncCaseTask),
        Rc::new(ReportTask),
    ]
}

/// Builds a model set from the `comm_model` / `edge_model` /
/// `transmission_model` / `distance_estimate` selections plus their scoped
/// parameter groups (`comm.*`, `edge.*`, `transmission.*`, `distance.*`,
/// `rv.*`).
pub fn build_model_set(
    registry: &ModelRegistry,
    params: &mut TaskParams<'_>,
    seed: u64,
) -> Result<ModelSet, TaskError> {
    let comm_id = params.str_or("comm_model", "disc_graph")?;
    let edge_id = params.str_or("edge_model", "list")?;
    let transmission_id = params.str_or("transmission_model", "reliable")?;
    let distance_id = params.str_or("distance_estimate", "perfect")?;
    let rv_id = params.str_or("random_variable", "uniform")?;

    let comm_params = params.scoped("comm");
    let edge_params = params.scoped("edge");
    let transmission_params = params.scoped("transmission");
    let distance_params = params.scoped("distance");
    let rv_params = params.scoped("rv");

    Ok(ModelSet::new(
        registry.create_communication(&comm_id, &comm_params, seed)?,
        registry.create_edge(&edge_id, &edge_params, seed)?,
        registry.create_transmission(&transmission_id, &transmission_params, seed)?,
        registry.create_distance_estimate(&distance_id, &distance_params, seed)?,
        registry.create_random_variable(&rv_id, &rv_params, seed)?,
    ))
}

fn metrics_result_tags(world: &World) -> BTreeMap<String, TagValue> {
    let m = world.metrics();
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
}

/// `set key=value ...` merges its parameters into the global environment.
struct SetTask;

impl SimulationTask for SetTask {
    fn name(&self) -> &'static str {
        "set"
    }

    fn run(
        &self,
        controller: &mut SimulationController,
        params: &mut TaskParams<'_>,
    ) -> Result<BTreeMap<String, TagValue>, TaskError> {
        for (key, value) in params.take_all() {
            controller.env_mut().insert(key, value);
        }
        Ok(BTreeMap::new())
    }
}

/// `prepare_world width=.. height=..` creates an empty world bound to the
/// selected models, replacing any current world.
struct PrepareWorldTask;

impl SimulationTask for PrepareWorldTask {
    fn name(&self) -> &'static str {
        "prepare_world"
    }

    fn run(
        &self,
        controller: &mut SimulationController,
        params: &mut TaskParams<'_>,
    ) -> Result<BTreeMap<String, TagValue>, TaskError> {
        let width = params.require_real("width")?;
        let height = params.require_real("height")?;
        let seed = controller.resolve_seed(params)?;
        let models = build_model_set(controller.registry(), params, seed)?;
        controller.set_world(World::new(models, (width, height)));
        Ok(BTreeMap::new())
    }
}

/// `rect_world count=.. width=.. height=..` places nodes uniformly at random
/// in the rectangle. Creates the world first (like `prepare_world`) if none
/// exists yet.
struct RectWorldTask;

impl SimulationTask for RectWorldTask {
    fn name(&self) -> &'static str {
        "rect_world"
    }

    fn run(
        &self,
        controller: &mut SimulationController,
        params: &mut TaskParams<'_>,
    ) -> Result<BTreeMap<String, TagValue>, TaskError> {
        let count = params.require_int("count")?;
        let width = params.require_real("width")?;
        let height = params.require_real("height")?;
        let seed = controller.resolve_seed(params)?;
        if count <= 0 {
            return Err(TaskError::BadParameter {
                key: "count".to_string(),
                reason: format!("must be positive, got {count}"),
            });
        }
        let spec = ScenarioSpec {
            count: count as u64,
            width,
            height,
            seed,
            placement: params.str_or("placement", "uniform")?,
        };
        let positions = generate_rect_world(&spec)?;
        if controller.world().is_none() {
            let models = build_model_set(controller.registry(), params, seed)?;
            controller.set_world(World::new(models, (width, height)));
        }
        let world = controller.world_mut().expect("world just ensured");
        for position in positions {
            world.add_node(position, Vec::new())?;
        }
        let mut out = BTreeMap::new();
        out.insert("nodes".to_string(), TagValue::Int(count));
        Ok(out)
    }
}

/// `simulation [max_rounds=N]` drives the world round by round until it is
/// done, accumulating wall-clock time.
struct RunSimulationTask;

impl SimulationTask for RunSimulationTask {
    fn name(&self) -> &'static str {
        "simulation"
    }

    fn run(
        &self,
        controller: &mut SimulationController,
        params: &mut TaskParams<'_>,
    ) -> Result<BTreeMap<String, TagValue>, TaskError> {
        let max_rounds = params.u64_opt("max_rounds")?;
        let world = controller.world_mut().ok_or(TaskError::WorldMissing)?;
        world.set_max_rounds(max_rounds);
        let start = Instant::now();
        while !world.is_done() {
            world.step_round()?;
        }
        world.metrics_mut().wall_clock_ms += start.elapsed().as_secs_f64() * 1000.0;
        Ok(metrics_result_tags(world))
    }
}

/// `save_world file=..` writes the snapshot of the current world.
struct SaveWorldTask;

impl SimulationTask for SaveWorldTask {
    fn name(&self) -> &'static str {
        "save_world"
    }

    fn run(
        &self,
        controller: &mut SimulationController,
        params: &mut TaskParams<'_>,
    ) -> Result<BTreeMap<String, TagValue>, TaskError> {
        let file = params.require_str("file")?;
        let world = controller.world().ok_or(TaskError::WorldMissing)?;
        let mut sink = BufWriter::new(File::create(&file)?);
        world.save_snapshot(&mut sink)?;
        use std::io::Write;
        sink.flush()?;
        let mut out = BTreeMap::new();
        out.insert("file".to_string(), TagValue::Str(file));
        Ok(out)
    }
}

/// `load_world file=..` replaces the current world with a snapshot, bound to
/// freshly constructed models per the usual selections.
struct LoadWorldTask;

impl SimulationTask for LoadWorldTask {
    fn name(&self) -> &'static str {
        "load_world"
    }

    fn run(
        &self,
        controller: &mut SimulationController,
        params: &mut TaskParams<'_>,
    ) -> Result<BTreeMap<String, TagValue>, TaskError> {
        let file = params.require_str("file")?;
        let seed = controller.resolve_seed(params)?;
        let models = build_model_set(controller.registry(), params, seed)?;
        let source = BufReader::new(File::open(&file)?);
        let world = World::load_snapshot(source, models)?;
        let mut out = BTreeMap::new();
        out.insert(
            "nodes".to_string(),
            TagValue::Int(world.node_count() as i64),
        );
        out.insert("round".to_string(), TagValue::Int(world.round() as i64));
        controller.set_world(world);
        Ok(out)
    }
}

/// `report [timing=true]` appends one row to the metrics CSV and prints a
/// human summary when the CSV goes to a file. `timing=false` zeroes the
/// wall-clock column so output is byte-reproducible.
struct ReportTask;

impl SimulationTask for ReportTask {
    fn name(&self) -> &'static str {
        "report"
    }

    fn run(
        &self,
        controller: &mut SimulationController,
        params: &mut TaskParams<'_>,
    ) -> Result<BTreeMap<String, TagValue>, TaskError> {
        let timing = params.bool_or("timing", true)?;
        let world = controller.world().ok_or(TaskError::WorldMissing)?;
        let row = ReportRow::from_world(world, timing);
        let results = metrics_result_tags(world);
        if controller.csv_is_file() {
            println!(
                "{} nodes, {} rounds: {} sent, {} delivered, {} dropped, peak {} adjacency entries, {} ms",
                row.nodes,
                row.rounds,
                row.msgs_sent,
                row.msgs_delivered,
                row.msgs_dropped,
                row.adjacency_entries_peak,
                row.wall_ms
            );
        }
        controller.emit_report_row(&row)?;
        Ok(results)
    }
}
