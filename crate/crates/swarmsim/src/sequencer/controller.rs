//! The simulation controller: central repository of tasks and models, and
//! the driver that turns configuration input into parameterized task calls.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::rc::Rc;

use thiserror::Error;

use crate::config::{format_sig6, ConfigProgram};
use crate::models::{ModelError, ModelRegistry};
use crate::sequencer::scheduler::SchedulerError;
use crate::world::{SnapshotError, TagValue, World, WorldError};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("task {0:?} is already registered")]
    DuplicateTask(String),
    #[error("missing required parameter {0:?}")]
    MissingParameter(String),
    #[error("unknown parameter {0:?}")]
    UnknownParameter(String),
    #[error("parameter {key:?}: {reason}")]
    BadParameter { key: String, reason: String },
    #[error("no world has been prepared")]
    WorldMissing,
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Failed(String),
}

impl TaskError {
    /// Process exit status for this failure class: 3 for task errors, 4 when
    /// the runaway-event guard tripped.
    pub fn exit_status(&self) -> i32 {
        match self {
            TaskError::World(WorldError::Scheduler(SchedulerError::RunawayEvents { .. })) => 4,
            _ => 3,
        }
    }
}

/// A failure while executing a config program, annotated with its source line.
#[derive(Debug, Error)]
#[error("line {line}: task {task:?}: {source}")]
pub struct RunError {
    pub line: u32,
    pub task: String,
    #[source]
    pub source: TaskError,
}

impl RunError {
    pub fn exit_status(&self) -> i32 {
        self.source.exit_status()
    }
}

/// Parameter view for one task invocation. Lookups check the invocation
/// line first, then the global environment; invocation keys win. Keys read
/// from the invocation are tracked so [`finish`](TaskParams::finish) can
/// reject typos, while unrelated environment entries pass through silently.
pub struct TaskParams<'a> {
    invocation: &'a BTreeMap<String, TagValue>,
    env: BTreeMap<String, TagValue>,
    used: std::collections::BTreeSet<String>,
}

impl<'a> TaskParams<'a> {
    pub fn new(
        invocation: &'a BTreeMap<String, TagValue>,
        env: BTreeMap<String, TagValue>,
    ) -> Self {
        TaskParams {
            invocation,
            env,
            used: Default::default(),
        }
    }

    pub fn get(&mut self, key: &str) -> Option<&TagValue> {
        if let Some(v) = self.invocation.get(key) {
            self.used.insert(key.to_string());
            return Some(v);
        }
        self.env.get(key)
    }

    fn wrong_type(key: &str, expected: &str, got: &TagValue) -> TaskError {
        TaskError::BadParameter {
            key: key.to_string(),
            reason: format!("expected {expected}, got {}", got.type_name()),
        }
    }

    pub fn int(&mut self, key: &str) -> Result<Option<i64>, TaskError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_int()
                .map(Some)
                .ok_or_else(|| Self::wrong_type(key, "an integer", v)),
        }
    }

    pub fn int_or(&mut self, key: &str, default: i64) -> Result<i64, TaskError> {
        Ok(self.int(key)?.unwrap_or(default))
    }

    pub fn require_int(&mut self, key: &str) -> Result<i64, TaskError> {
        self.int(key)?
            .ok_or_else(|| TaskError::MissingParameter(key.to_string()))
    }

    pub fn real(&mut self, key: &str) -> Result<Option<f64>, TaskError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_real()
                .map(Some)
                .ok_or_else(|| Self::wrong_type(key, "a number", v)),
        }
    }

    pub fn require_real(&mut self, key: &str) -> Result<f64, TaskError> {
        self.real(key)?
            .ok_or_else(|| TaskError::MissingParameter(key.to_string()))
    }

    pub fn str_opt(&mut self, key: &str) -> Result<Option<String>, TaskError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_str()
                .map(|s| Some(s.to_string()))
                .ok_or_else(|| Self::wrong_type(key, "a string", v)),
        }
    }

    pub fn str_or(&mut self, key: &str, default: &str) -> Result<String, TaskError> {
        Ok(self.str_opt(key)?.unwrap_or_else(|| default.to_string()))
    }

    pub fn require_str(&mut self, key: &str) -> Result<String, TaskError> {
        self.str_opt(key)?
            .ok_or_else(|| TaskError::MissingParameter(key.to_string()))
    }

    pub fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, TaskError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| Self::wrong_type(key, "a boolean", v)),
        }
    }

    /// Non-negative integer, e.g. counts and seeds.
    pub fn u64_opt(&mut self, key: &str) -> Result<Option<u64>, TaskError> {
        match self.int(key)? {
            None => Ok(None),
            Some(v) if v >= 0 => Ok(Some(v as u64)),
            Some(v) => Err(TaskError::BadParameter {
                key: key.to_string(),
                reason: format!("must be non-negative, got {v}"),
            }),
        }
    }

    /// Collects `<prefix>.<key>` entries into a plain key map, environment
    /// first, invocation values overriding. Used to pass scoped parameter
    /// groups (e.g. `comm.range=2.0`) to model factories.
    pub fn scoped(&mut self, prefix: &str) -> BTreeMap<String, TagValue> {
        let dotted = format!("{prefix}.");
        let mut out = BTreeMap::new();
        for (k, v) in &self.env {
            if let Some(stripped) = k.strip_prefix(&dotted) {
                out.insert(stripped.to_string(), v.clone());
            }
        }
        for (k, v) in self.invocation {
            if let Some(stripped) = k.strip_prefix(&dotted) {
                self.used.insert(k.clone());
                out.insert(stripped.to_string(), v.clone());
            }
        }
        out
    }

    /// Every invocation entry, marking them all as consumed. Used by tasks
    /// with open-ended parameters, e.g. `set`.
    pub fn take_all(&mut self) -> Vec<(String, TagValue)> {
        for k in self.invocation.keys() {
            self.used.insert(k.clone());
        }
        self.invocation
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    /// Rejects invocation keys nothing consumed: they are almost always typos.
    pub fn finish(&self) -> Result<(), TaskError> {
        for key in self.invocation.keys() {
            if !self.used.contains(key) {
                return Err(TaskError::UnknownParameter(key.clone()));
            }
        }
        Ok(())
    }
}

/// A named, parameterized procedure with full access to the simulation.
/// Tasks run strictly sequentially, in configuration order.
pub trait SimulationTask {
    fn name(&self) -> &'static str;

    fn run(
        &self,
        controller: &mut SimulationController,
        params: &mut TaskParams<'_>,
    ) -> Result<BTreeMap<String, TagValue>, TaskError>;
}

enum CsvSink {
    Stdout,
    File(BufWriter<File>),
}

/// One row of the metrics CSV interface.
pub struct ReportRow {
    pub nodes: u64,
    pub width: f64,
    pub height: f64,
    pub density: f64,
    pub edge_model: String,
    pub transmission_model: String,
    pub rounds: u64,
    pub msgs_sent: u64,
    pub msgs_delivered: u64,
    pub msgs_dropped: u64,
    pub adjacency_entries_peak: u64,
    pub wall_ms: i64,
}

impl ReportRow {
    pub const HEADER: &'static str = "nodes,width,height,density,edge_model,transmission_model,rounds,msgs_sent,msgs_delivered,msgs_dropped,adjacency_entries_peak,wall_ms";

    /// Snapshot of a world's metrics. With `timing` off, wall_ms is written
    /// as 0 so output is byte-reproducible.
    pub fn from_world(world: &World, timing: bool) -> ReportRow {
        let (width, height) = world.size_hint();
        let range = world.models().communication.max_range().unwrap_or(1.0);
        let m = world.metrics();
        ReportRow {
            nodes: world.node_count() as u64,
            width,
            height,
            density: crate::config::density(world.node_count() as u64, width, height, range),
            edge_model: world.models().edge.name().to_string(),
            transmission_model: world.models().transmission.name().to_string(),
            rounds: m.rounds_executed,
            msgs_sent: m.messages_sent,
            msgs_delivered: m.messages_delivered,
            msgs_dropped: m.messages_dropped,
            adjacency_entries_peak: m.adjacency_entries_peak,
            wall_ms: if timing {
                m.wall_clock_ms.round() as i64
            } else {
                0
            },
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.nodes,
            format_sig6(self.width),
            format_sig6(self.height),
            format_sig6(self.density),
            self.edge_model,
            self.transmission_model,
            self.rounds,
            self.msgs_sent,
            self.msgs_delivered,
            self.msgs_dropped,
            self.adjacency_entries_peak,
            self.wall_ms
        )
    }
}

/// Central coordinating unit: task registry, model registry, the global
/// parameter environment, the world, and the metrics output sink.
pub struct SimulationController {
    tasks: BTreeMap<String, Rc<dyn SimulationTask>>,
    registry: ModelRegistry,
    env: BTreeMap<String, TagValue>,
    world: Option<World>,
    cli_seed: Option<u64>,
    csv: CsvSink,
    header_written: bool,
    executed: Vec<String>,
}

impl SimulationController {
    /// A controller with the built-in tasks and models registered. A seed
    /// given on the command line beats any `seed` from the configuration.
    pub fn new(cli_seed: Option<u64>) -> Self {
        let mut controller = SimulationController {
            tasks: BTreeMap::new(),
            registry: ModelRegistry::with_builtins(),
            env: BTreeMap::new(),
            world: None,
            cli_seed,
            csv: CsvSink::Stdout,
            header_written: false,
            executed: Vec::new(),
        };
        for task in crate::sequencer::tasks::builtin_tasks() {
            controller.register_task(task).expect("builtins are unique");
        }
        controller
    }

    pub fn register_task(&mut self, task: Rc<dyn SimulationTask>) -> Result<(), TaskError> {
        let name = task.name().to_string();
        if self.tasks.contains_key(&name) {
            return Err(TaskError::DuplicateTask(name));
        }
        self.tasks.insert(name, task);
        Ok(())
    }

    pub fn task_names(&self) -> Vec<&str> {
        self.tasks.keys().map(String::as_str).collect()
    }

    pub fn registry(&self) -> &ModelRegistry {
        &self.registry
    }

    pub fn registry_mut(&mut self) -> &mut ModelRegistry {
        &mut self.registry
    }

    pub fn env(&self) -> &BTreeMap<String, TagValue> {
        &self.env
    }

    pub fn env_mut(&mut self) -> &mut BTreeMap<String, TagValue> {
        &mut self.env
    }

    pub fn world(&self) -> Option<&World> {
        self.world.as_ref()
    }

    pub fn world_mut(&mut self) -> Option<&mut World> {
        self.world.as_mut()
    }

    pub fn set_world(&mut self, world: World) {
        self.world = Some(world);
    }

    pub fn take_world(&mut self) -> Option<World> {
        self.world.take()
    }

    /// Names of the tasks executed so far, in order.
    pub fn executed_tasks(&self) -> &[String] {
        &self.executed
    }

    /// Seed resolution: command line beats the invocation line, which beats
    /// the environment; the fallback is 0.
    pub fn resolve_seed(&self, params: &mut TaskParams<'_>) -> Result<u64, TaskError> {
        if let Some(seed) = self.cli_seed {
            // Still consume an invocation-line seed so it does not trip the
            // unknown-parameter check.
            params.u64_opt("seed")?;
            return Ok(seed);
        }
        Ok(params.u64_opt("seed")?.unwrap_or(0))
    }

    /// Routes metric rows to a file instead of standard output.
    pub fn set_csv_path(&mut self, path: &Path) -> io::Result<()> {
        self.csv = CsvSink::File(BufWriter::new(File::create(path)?));
        self.header_written = false;
        Ok(())
    }

    pub fn csv_is_file(&self) -> bool {
        matches!(self.csv, CsvSink::File(_))
    }

    /// Appends one row to the metrics CSV, writing the header first on the
    /// initial call.
    pub fn emit_report_row(&mut self, row: &ReportRow) -> io::Result<()> {
        let header = if self.header_written {
            None
        } else {
            self.header_written = true;
            Some(ReportRow::HEADER)
        };
        match &mut self.csv {
            CsvSink::Stdout => {
                let stdout = io::stdout();
                let mut out = stdout.lock();
                if let Some(h) = header {
                    writeln!(out, "{h}")?;
                }
                writeln!(out, "{}", row.to_line())?;
            }
            CsvSink::File(file) => {
                if let Some(h) = header {
                    writeln!(file, "{h}")?;
                }
                writeln!(file, "{}", row.to_line())?;
                file.flush()?;
            }
        }
        Ok(())
    }

    /// Runs one registered task. Invocation parameters override environment
    /// entries; results come back as a tag map and are also mirrored into
    /// the world's global tags under `task.<name>.` when a world exists.
    pub fn run_task(
        &mut self,
        name: &str,
        invocation: &BTreeMap<String, TagValue>,
    ) -> Result<BTreeMap<String, TagValue>, TaskError> {
        let task = self
            .tasks
            .get(name)
            .cloned()
            .ok_or_else(|| TaskError::UnknownTask(name.to_string()))?;
        self.executed.push(name.to_string());
        let mut params = TaskParams::new(invocation, self.env.clone());
        let results = task.run(self, &mut params)?;
        params.finish()?;
        if let Some(world) = &mut self.world {
            for (key, value) in &results {
                world
                    .global_tags_mut()
                    .set(format!("task.{name}.{key}"), value.clone(), false);
            }
        }
        Ok(results)
    }

    /// Executes a parsed configuration program, aborting on the first error.
    pub fn run_program(&mut self, program: &ConfigProgram) -> Result<(), RunError> {
        for invocation in &program.invocations {
            self.run_task(&invocation.name, &invocation.params)
                .map_err(|source| RunError {
                    line: invocation.line,
                    task: invocation.name.clone(),
                    source,
                })?;
        }
        Ok(())
    }
}
