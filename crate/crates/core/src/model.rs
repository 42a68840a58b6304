//! Domain types shared by every stage of the pipeline: task and model
//! registry entries, the per-seed metric tensor and the report settings.
//!
//! A [`MetricTensor`] is always valid once constructed. The wire form,
//! [`TensorDocument`], can hold anything; [`validate_tensor`] lists every
//! invariant it breaks.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TENSOR_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricDirection {
    HigherIsBetter,
    LowerIsBetter,
}

impl MetricDirection {
    /// Whether `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            MetricDirection::HigherIsBetter => a > b,
            MetricDirection::LowerIsBetter => a < b,
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            MetricDirection::HigherIsBetter => "↑",
            MetricDirection::LowerIsBetter => "↓",
        }
    }
}

/// Kind of learning problem a task poses. Compatibility between models and
/// tasks is decided on this tag alone.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum TaskType {
    NodeCls,
    GraphCls,
    GraphReg,
    LinkPred,
    Custom(String),
}

impl TaskType {
    pub fn as_str(&self) -> &str {
        match self {
            TaskType::NodeCls => "node_cls",
            TaskType::GraphCls => "graph_cls",
            TaskType::GraphReg => "graph_reg",
            TaskType::LinkPred => "link_pred",
            TaskType::Custom(tag) => tag,
        }
    }
}

impl From<String> for TaskType {
    fn from(s: String) -> Self {
        match s.as_str() {
            "node_cls" => TaskType::NodeCls,
            "graph_cls" => TaskType::GraphCls,
            "graph_reg" => TaskType::GraphReg,
            "link_pred" => TaskType::LinkPred,
            _ => TaskType::Custom(s),
        }
    }
}

impl From<TaskType> for String {
    fn from(t: TaskType) -> Self {
        t.as_str().to_owned()
    }
}

impl FromStr for TaskType {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(TaskType::from(s.to_owned()))
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    #[serde(default)]
    pub category: String,
    pub task_type: TaskType,
    pub metric_name: String,
    pub direction: MetricDirection,
    #[serde(default = "default_epochs")]
    pub epochs: u32,
    /// The benchmark seed is threaded into data generation when set.
    #[serde(default)]
    pub seed_aware_data: bool,
}

fn default_epochs() -> u32 {
    1
}

impl TaskSpec {
    pub fn new(
        name: impl Into<String>,
        category: impl Into<String>,
        task_type: TaskType,
        metric_name: impl Into<String>,
        direction: MetricDirection,
    ) -> Self {
        TaskSpec {
            name: name.into(),
            category: category.into(),
            task_type,
            metric_name: metric_name.into(),
            direction,
            epochs: 1,
            seed_aware_data: false,
        }
    }

    pub fn with_epochs(mut self, epochs: u32) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn seed_aware(mut self, flag: bool) -> Self {
        self.seed_aware_data = flag;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub compatible_task_types: BTreeSet<TaskType>,
    /// Name of the trial executor that runs this model.
    #[serde(default = "default_binding")]
    pub executor_binding: String,
}

fn default_binding() -> String {
    "default".to_owned()
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, task_types: impl IntoIterator<Item = TaskType>) -> Self {
        ModelSpec {
            name: name.into(),
            compatible_task_types: task_types.into_iter().collect(),
            executor_binding: default_binding(),
        }
    }

    pub fn with_binding(mut self, binding: impl Into<String>) -> Self {
        self.executor_binding = binding.into();
        self
    }

    pub fn is_compatible(&self, task: &TaskSpec) -> bool {
        self.compatible_task_types.contains(&task.task_type)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    #[default]
    T,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairwiseMethod {
    T,
    Wilcoxon,
    #[default]
    Both,
}

impl PairwiseMethod {
    pub fn includes_t(self) -> bool {
        matches!(self, PairwiseMethod::T | PairwiseMethod::Both)
    }

    pub fn includes_wilcoxon(self) -> bool {
        matches!(self, PairwiseMethod::Wilcoxon | PairwiseMethod::Both)
    }
}

impl FromStr for PairwiseMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(PairwiseMethod::T),
            "wilcoxon" => Ok(PairwiseMethod::Wilcoxon),
            "both" => Ok(PairwiseMethod::Both),
            other => Err(Error::InvalidArgument(format!(
                "unknown pairwise method `{other}` (expected t, wilcoxon or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub ci_method: CiMethod,
    #[serde(default)]
    pub pairwise_method: PairwiseMethod,
    #[serde(default = "default_resamples")]
    pub bootstrap_b: usize,
    #[serde(default)]
    pub bootstrap_seed: u64,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_resamples() -> usize {
    10_000
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            alpha: default_alpha(),
            ci_method: CiMethod::T,
            pairwise_method: PairwiseMethod::Both,
            bootstrap_b: default_resamples(),
            bootstrap_seed: 0,
        }
    }
}

impl ReportConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.bootstrap_b == 0 {
            return Err(Error::InvalidArgument(
                "bootstrap_b must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One `(task, model, seed) -> value` record of the wire form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub task: String,
    pub model: String,
    pub seed: u64,
    pub value: f64,
}

/// Unvalidated JSON form of a metric tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorDocument {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub tasks: Vec<TaskSpec>,
    pub models: Vec<String>,
    pub seeds: Vec<u64>,
    pub cells: Vec<CellRecord>,
}

fn default_schema_version() -> u32 {
    TENSOR_SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SchemaVersion(u32),
    DuplicateTask(String),
    DuplicateModel(String),
    ZeroEpochs(String),
    SeedsNotIncreasing {
        position: usize,
    },
    UnknownTask(String),
    UnknownModel(String),
    UnknownSeed {
        task: String,
        model: String,
        seed: u64,
    },
    DuplicateCell {
        task: String,
        model: String,
        seed: u64,
    },
    NonFinite {
        task: String,
        model: String,
        seed: u64,
    },
    RaggedSeeds {
        task: String,
        model: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SchemaVersion(v) => write!(f, "unsupported tensor schema_version {v}"),
            Violation::DuplicateTask(t) => write!(f, "duplicate task `{t}`"),
            Violation::DuplicateModel(m) => write!(f, "duplicate model `{m}`"),
            Violation::ZeroEpochs(t) => write!(f, "task `{t}` has an epoch budget of 0"),
            Violation::SeedsNotIncreasing { position } => {
                write!(f, "seeds not strictly increasing at position {position}")
            }
            Violation::UnknownTask(t) => write!(f, "cell references unknown task `{t}`"),
            Violation::UnknownModel(m) => write!(f, "cell references unknown model `{m}`"),
            Violation::UnknownSeed { task, model, seed } => {
                write!(f, "cell ({task},{model}) references unlisted seed {seed}")
            }
            Violation::DuplicateCell { task, model, seed } => {
                write!(f, "duplicate key ({task},{model},{seed})")
            }
            Violation::NonFinite { task, model, seed } => {
                write!(f, "non-finite value at ({task},{model},{seed})")
            }
            Violation::RaggedSeeds { task, model } => {
                write!(f, "ragged seed set at ({task},{model})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every invariant violated by `doc`.
pub fn validate_tensor(doc: &TensorDocument) -> Verdict {
    validate_inner(doc).0
}

type CellGrid = Vec<Option<Vec<Option<f64>>>>;

fn validate_inner(doc: &TensorDocument) -> (Verdict, CellGrid) {
    let mut violations = Vec::new();
    if doc.schema_version != TENSOR_SCHEMA_VERSION {
        violations.push(Violation::SchemaVersion(doc.schema_version));
    }

    let mut task_index = HashMap::new();
    for (i, t) in doc.tasks.iter().enumerate() {
        if task_index.insert(t.name.as_str(), i).is_some() {
            violations.push(Violation::DuplicateTask(t.name.clone()));
        }
        if t.epochs == 0 {
            violations.push(Violation::ZeroEpochs(t.name.clone()));
        }
    }
    let mut model_index = HashMap::new();
    for (i, m) in doc.models.iter().enumerate() {
        if model_index.insert(m.as_str(), i).is_some() {
            violations.push(Violation::DuplicateModel(m.clone()));
        }
    }
    for (i, w) in doc.seeds.windows(2).enumerate() {
        if w[0] >= w[1] {
            violations.push(Violation::SeedsNotIncreasing { position: i + 1 });
        }
    }
    let seed_index: HashMap<u64, usize> =
        doc.seeds.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    let k = doc.models.len();
    let s = doc.seeds.len();
    let mut grid: CellGrid = vec![None; doc.tasks.len() * k];
    let mut reported_unknown: HashSet<String> = HashSet::new();
    for c in &doc.cells {
        let Some(&ti) = task_index.get(c.task.as_str()) else {
            if reported_unknown.insert(format!("t:{}", c.task)) {
                violations.push(Violation::UnknownTask(c.task.clone()));
            }
            continue;
        };
        let Some(&mi) = model_index.get(c.model.as_str()) else {
            if reported_unknown.insert(format!("m:{}", c.model)) {
                violations.push(Violation::UnknownModel(c.model.clone()));
            }
            continue;
        };
        let Some(&si) = seed_index.get(&c.seed) else {
            violations.push(Violation::UnknownSeed {
                task: c.task.clone(),
                model: c.model.clone(),
                seed: c.seed,
            });
            continue;
        };
        if !c.value.is_finite() {
            violations.push(Violation::NonFinite {
                task: c.task.clone(),
                model: c.model.clone(),
                seed: c.seed,
            });
        }
        let slot = grid[ti * k + mi].get_or_insert_with(|| vec![None; s]);
        if slot[si].is_some() {
            violations.push(Violation::DuplicateCell {
                task: c.task.clone(),
                model: c.model.clone(),
                seed: c.seed,
            });
        } else {
            slot[si] = Some(c.value);
        }
    }

    for (ti, t) in doc.tasks.iter().enumerate() {
        for (mi, m) in doc.models.iter().enumerate() {
            if let Some(series) = &grid[ti * k + mi] {
                if series.iter().any(Option::is_none) {
                    violations.push(Violation::RaggedSeeds {
                        task: t.name.clone(),
                        model: m.clone(),
                    });
                }
            }
        }
    }
    (Verdict { violations }, grid)
}

/// Per-seed final metrics indexed by (task, model, seed). Absent
/// (task, model) pairs encode incompatibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorDocument", into = "TensorDocument")]
pub struct MetricTensor {
    tasks: Vec<TaskSpec>,
    models: Vec<String>,
    seeds: Vec<u64>,
    values: Vec<Option<Vec<f64>>>,
}

impl TryFrom<TensorDocument> for MetricTensor {
    type Error = Error;

    fn try_from(doc: TensorDocument) -> Result<Self> {
        let (verdict, grid) = validate_inner(&doc);
        if !verdict.is_ok() {
            return Err(Error::InvalidTensor(verdict.violations));
        }
        let values = grid
            .into_iter()
            .map(|cell| cell.map(|series| series.into_iter().flatten().collect()))
            .collect();
        Ok(MetricTensor {
            tasks: doc.tasks,
            models: doc.models,
            seeds: doc.seeds,
            values,
        })
    }
}

impl From<MetricTensor> for TensorDocument {
    fn from(t: MetricTensor) -> Self {
        t.to_document()
    }
}

/// A single present cell: one (task, model) pair with its seed series.
#[derive(Debug, Clone, Copy)]
pub struct CellView<'a> {
    pub task: &'a TaskSpec,
    pub model: &'a str,
    pub values: &'a [f64],
}

impl MetricTensor {
    pub fn builder(tasks: Vec<TaskSpec>, models: Vec<String>, seeds: Vec<u64>) -> TensorBuilder {
        TensorBuilder {
            doc: TensorDocument {
                schema_version: TENSOR_SCHEMA_VERSION,
                tasks,
                models,
                seeds,
                cells: Vec::new(),
            },
        }
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn task_index(&self, name: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.name == name)
    }

    pub fn model_index(&self, name: &str) -> Option<usize> {
        self.models.iter().position(|m| m == name)
    }

    pub fn task(&self, name: &str) -> Result<&TaskSpec> {
        self.task_index(name)
            .map(|i| &self.tasks[i])
            .ok_or_else(|| Error::UnknownTask(name.to_owned()))
    }

    /// Seed series of a (task, model) pair by index, `None` when absent.
    pub fn series(&self, task: usize, model: usize) -> Option<&[f64]> {
        self.values
            .get(task * self.models.len() + model)
            .and_then(|v| v.as_deref())
    }

    pub fn series_by_name(&self, task: &str, model: &str) -> Option<&[f64]> {
        let t = self.task_index(task)?;
        let m = self.model_index(model)?;
        self.series(t, m)
    }

    /// Models with cells on `task`, in registry order.
    pub fn seed_intersection(&self, task: &str) -> Result<Vec<&str>> {
        let t = self
            .task_index(task)
            .ok_or_else(|| Error::UnknownTask(task.to_owned()))?;
        Ok(self
            .present_models(t)
            .map(|m| self.models[m].as_str())
            .collect())
    }

    /// Indices of the models present on task `task`.
    pub fn present_models(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.models.len()).filter(move |&m| self.series(task, m).is_some())
    }

    /// Present cells in (task, model) registry order.
    pub fn cells(&self) -> impl Iterator<Item = CellView<'_>> {
        self.tasks.iter().enumerate().flat_map(move |(ti, task)| {
            self.models
                .iter()
                .enumerate()
                .filter_map(move |(mi, model)| {
                    self.series(ti, mi).map(|values| CellView {
                        task,
                        model,
                        values,
                    })
                })
        })
    }

    pub fn to_document(&self) -> TensorDocument {
        let mut cells = Vec::new();
        for cell in self.cells() {
            for (&seed, &value) in self.seeds.iter().zip(cell.values) {
                cells.push(CellRecord {
                    task: cell.task.name.clone(),
                    model: cell.model.to_owned(),
                    seed,
                    value,
                });
            }
        }
        TensorDocument {
            schema_version: TENSOR_SCHEMA_VERSION,
            tasks: self.tasks.clone(),
            models: self.models.clone(),
            seeds: self.seeds.clone(),
            cells,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TensorDocument = serde_json::from_str(text)?;
        MetricTensor::try_from(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("tensor document serializes")
    }

    /// Reads the CSV form (`task,model,seed,value`) together with its
    /// task-spec sidecar. Model order follows the sidecar when it lists
    /// models, otherwise first appearance in the CSV; seeds are sorted.
    pub fn from_csv<R: Read>(reader: R, sidecar: TaskSidecar) -> Result<Self> {
        let (tasks, listed_models) = sidecar.into_parts();
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["task", "model", "seed", "value"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::InvalidArgument(format!(
                "CSV header must be `task,model,seed,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut cells = Vec::new();
        for row in rdr.deserialize() {
            let rec: CellRecord = row?;
            cells.push(rec);
        }
        let models = match listed_models {
            Some(m) => m,
            None => {
                let mut seen = HashSet::new();
                cells
                    .iter()
                    .filter(|c| seen.insert(c.model.clone()))
                    .map(|c| c.model.clone())
                    .collect()
            }
        };
        let seeds: BTreeSet<u64> = cells.iter().map(|c| c.seed).collect();
        MetricTensor::try_from(TensorDocument {
            schema_version: TENSOR_SCHEMA_VERSION,
            tasks,
            models,
            seeds: seeds.into_iter().collect(),
            cells,
        })
    }
}

/// Task specifications accompanying a CSV tensor: either a bare array of
/// task specs or an object with `tasks` and an optional `models` ordering.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TaskSidecar {
    Tasks(Vec<TaskSpec>),
    Full {
        tasks: Vec<TaskSpec>,
        #[serde(default)]
        models: Option<Vec<String>>,
    },
}

impl TaskSidecar {
    fn into_parts(self) -> (Vec<TaskSpec>, Option<Vec<String>>) {
        match self {
            TaskSidecar::Tasks(t) => (t, None),
            TaskSidecar::Full { tasks, models } => (tasks, models),
        }
    }
}

/// Incremental construction of a tensor; validation happens in `build`.
#[derive(Debug, Clone)]
pub struct TensorBuilder {
    doc: TensorDocument,
}

impl TensorBuilder {
    pub fn cell(mut self, task: &str, model: &str, seed: u64, value: f64) -> Self {
        self.push(task, model, seed, value);
        self
    }

    /// Assigns `values` to the listed seeds in order.
    pub fn series(mut self, task: &str, model: &str, values: &[f64]) -> Self {
        let seeds = self.doc.seeds.clone();
        for (&seed, &v) in seeds.iter().zip(values) {
            self.push(task, model, seed, v);
        }
        self
    }

    pub fn push(&mut self, task: &str, model: &str, seed: u64, value: f64) {
        self.doc.cells.push(CellRecord {
            task: task.to_owned(),
            model: model.to_owned(),
            seed,
            value,
        });
    }

    pub fn document(&self) -> &TensorDocument {
        &self.doc
    }

    pub fn build(self) -> Result<MetricTensor> {
        MetricTensor::try_from(self.doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acc(name: &str) -> TaskSpec {
        TaskSpec::new(
            name,
            "c",
            TaskType::NodeCls,
            "acc",
            MetricDirection::HigherIsBetter,
        )
    }

    fn complete() -> TensorBuilder {
        let mut b = MetricTensor::builder(
            vec![acc("t1"), acc("t2")],
            vec!["m1".into(), "m2".into()],
            vec![0, 1, 2],
        );
        for t in ["t1", "t2"] {
            for m in ["m1", "m2"] {
                for s in 0..3 {
                    b.push(t, m, s, 0.5 + s as f64 * 0.01);
                }
            }
        }
        b
    }

    #[test]
    fn complete_tensor_is_ok() {
        let b = complete();
        assert!(validate_tensor(b.document()).is_ok());
        b.build().unwrap();
    }

    #[test]
    fn ragged_seed_set_is_reported() {
        let mut b = MetricTensor::builder(vec![acc("t1")], vec!["m1".into()], vec![0, 1, 2]);
        b.push("t1", "m1", 0, 0.1);
        b.push("t1", "m1", 1, 0.2);
        let v = validate_tensor(b.document());
        assert_eq!(
            v.violations,
            vec![Violation::RaggedSeeds {
                task: "t1".into(),
                model: "m1".into()
            }]
        );
        assert_eq!(v.violations[0].to_string(), "ragged seed set at (t1,m1)");
    }

    #[test]
    fn nan_is_reported() {
        let mut b = complete();
        b.push("t1", "m1", 0, f64::NAN);
        let v = validate_tensor(b.document());
        assert!(v
            .violations
            .iter()
            .any(|x| x.to_string().starts_with("non-finite value")));
        // the NaN also duplicates an existing key
        assert!(v
            .violations
            .iter()
            .any(|x| matches!(x, Violation::DuplicateCell { .. })));
    }

    #[test]
    fn structural_violations() {
        let doc = TensorDocument {
            schema_version: 1,
            tasks: vec![acc("t"), acc("t").with_epochs(0)],
            models: vec!["m".into(), "m".into()],
            seeds: vec![1, 1],
            cells: vec![CellRecord {
                task: "zz".into(),
                model: "m".into(),
                seed: 1,
                value: 0.0,
            }],
        };
        let v = validate_tensor(&doc);
        assert!(v.violations.contains(&Violation::DuplicateTask("t".into())));
        assert!(v
            .violations
            .contains(&Violation::DuplicateModel("m".into())));
        assert!(v.violations.contains(&Violation::ZeroEpochs("t".into())));
        assert!(v
            .violations
            .contains(&Violation::SeedsNotIncreasing { position: 1 }));
        assert!(v.violations.contains(&Violation::UnknownTask("zz".into())));
    }

    #[test]
    fn seed_intersection_follows_registry_order() {
        let mut b = MetricTensor::builder(
            vec![acc("a"), acc("b")],
            vec!["x".into(), "y".into(), "z".into()],
            vec![0, 1],
        );
        for m in ["z", "x"] {
            b = b.series("a", m, &[0.1, 0.2]);
        }
        b = b.series("b", "y", &[0.3, 0.4]);
        let t = b.build().unwrap();
        assert_eq!(t.seed_intersection("a").unwrap(), vec!["x", "z"]);
        assert_eq!(t.seed_intersection("b").unwrap(), vec!["y"]);
        assert!(matches!(
            t.seed_intersection("q"),
            Err(Error::UnknownTask(_))
        ));
    }

    #[test]
    fn cells_iterate_in_registry_order_regardless_of_insertion() {
        let mut b = MetricTensor::builder(
            vec![acc("a"), acc("b")],
            vec!["x".into(), "y".into()],
            vec![0, 1],
        );
        b.push("b", "y", 1, 4.0);
        b.push("a", "y", 0, 1.0);
        b.push("b", "y", 0, 3.0);
        b.push("a", "y", 1, 2.0);
        let t = b.build().unwrap();
        let order: Vec<_> = t
            .to_document()
            .cells
            .into_iter()
            .map(|c| (c.task, c.seed, c.value))
            .collect();
        assert_eq!(
            order,
            vec![
                ("a".into(), 0, 1.0),
                ("a".into(), 1, 2.0),
                ("b".into(), 0, 3.0),
                ("b".into(), 1, 4.0)
            ]
        );
    }

    #[test]
    fn csv_ingestion() {
        let csv = "task,model,seed,value\nt1,B,1,0.2\nt1,A,0,0.3\nt1,B,0,0.1\nt1,A,1,0.4\n";
        let sidecar: TaskSidecar =
            serde_json::from_str(r#"[{"name":"t1","task_type":"node_cls","metric_name":"acc","direction":"higher_is_better"}]"#)
                .unwrap();
        let t = MetricTensor::from_csv(csv.as_bytes(), sidecar).unwrap();
        assert_eq!(t.models(), ["B", "A"]);
        assert_eq!(t.seeds(), [0, 1]);
        assert_eq!(t.series_by_name("t1", "A").unwrap(), [0.3, 0.4]);
    }

    #[test]
    fn task_type_tags() {
        let t: TaskType = serde_json::from_str("\"link_pred\"").unwrap();
        assert_eq!(t, TaskType::LinkPred);
        let c: TaskType = serde_json::from_str("\"hypergraph\"").unwrap();
        assert_eq!(c, TaskType::Custom("hypergraph".into()));
        assert_eq!(serde_json::to_string(&c).unwrap(), "\"hypergraph\"");
    }

    #[test]
    fn report_config_bounds() {
        assert!(ReportConfig::default().validate().is_ok());
        let bad = ReportConfig {
            alpha: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ReportConfig {
            bootstrap_b: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn json_round_trip_is_bit_exact(
                values in proptest::collection::vec(-1e6f64..1e6, 12),
                seed0 in 0u64..1000,
            ) {
                let seeds = vec![seed0, seed0 + 3, seed0 + 7];
                let mut b = MetricTensor::builder(
                    vec![acc("t1"), acc("t2")],
                    vec!["m1".into(), "m2".into()],
                    seeds.clone(),
                );
                let mut it = values.iter();
                for t in ["t1", "t2"] {
                    for m in ["m1", "m2"] {
                        for &s in &seeds {
                            b.push(t, m, s, *it.next().unwrap());
                        }
                    }
                }
                let t = b.build().unwrap();
                let back = MetricTensor::from_json(&t.to_json()).unwrap();
                prop_assert_eq!(&back, &t);
                for (a, b) in back.cells().zip(t.cells()) {
                    for (x, y) in a.values.iter().zip(b.values) {
                        prop_assert_eq!(x.to_bits(), y.to_bits());
                    }
                }
            }
        }
    }
}
