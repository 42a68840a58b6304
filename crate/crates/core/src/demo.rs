//! The ten-domain, five-encoder demo benchmark.
//!
//! Each cell is rebuilt from its published mean and 95% half-width: ten
//! seeds taken from a fixed zero-mean pattern, scaled so the t interval
//! has exactly that half-width, and rotated by the model's index so no
//! two series are proportional. Euroroad's GCN/GraphTransformer tie at
//! .524 is broken as .5238 < .5242, which gives the published mean ranks.

use crate::model::{MetricDirection, MetricTensor, ModelSpec, TaskSpec, TaskType};
use crate::runner::Registry;
use crate::synthetic::{ModelProfile, SyntheticProfile};

pub const MODELS: [&str; 5] = ["GCN", "GAT", "GraphSAGE", "GraphTransformer", "GIN"];

/// The file under `demo/` holding the cached report of [`demo_tensor`].
pub const DEMO_CACHE_FILE: &str = "demo-report.json";

/// The file under `demo/` holding a synthetic run config over
/// [`demo_registry`].
pub const DEMO_RUN_CONFIG_FILE: &str = "run-config.json";

struct Row {
    category: &'static str,
    task: &'static str,
    task_type: TaskType,
    metric: &'static str,
    cells: [(f64, f64); 4],
    gin: Option<(f64, f64)>,
}

fn rows() -> [Row; 10] {
    use TaskType::*;
    let row = |category, task, task_type, metric, cells, gin| Row {
        category,
        task,
        task_type,
        metric,
        cells,
        gin,
    };
    [
        row(
            "Combinatorial",
            "TSP-random",
            LinkPred,
            "AUC",
            [
                (0.864, 0.025),
                (0.832, 0.017),
                (0.884, 0.021),
                (0.871, 0.023),
            ],
            None,
        ),
        row(
            "Biology",
            "MUTAG",
            GraphCls,
            "Acc.",
            [
                (0.705, 0.059),
                (0.637, 0.038),
                (0.708, 0.050),
                (0.721, 0.049),
            ],
            Some((0.834, 0.036)),
        ),
        row(
            "Social",
            "Cora",
            NodeCls,
            "Acc.",
            [
                (0.811, 0.001),
                (0.793, 0.007),
                (0.798, 0.003),
                (0.794, 0.004),
            ],
            None,
        ),
        row(
            "Knowledge",
            "FB15k-237",
            LinkPred,
            "AUC",
            [
                (0.674, 0.009),
                (0.528, 0.007),
                (0.633, 0.044),
                (0.538, 0.012),
            ],
            None,
        ),
        row(
            "Infrastructure",
            "Euroroad",
            LinkPred,
            "AUC",
            [
                (0.5238, 0.019),
                (0.609, 0.022),
                (0.534, 0.030),
                (0.5242, 0.021),
            ],
            None,
        ),
        row(
            "Finance",
            "Board-directors",
            LinkPred,
            "AUC",
            [
                (0.968, 0.007),
                (0.988, 0.002),
                (0.902, 0.016),
                (0.847, 0.016),
            ],
            None,
        ),
        row(
            "Computing",
            "Internet AS",
            LinkPred,
            "AUC",
            [
                (0.967, 0.001),
                (0.652, 0.015),
                (0.751, 0.018),
                (0.598, 0.070),
            ],
            None,
        ),
        row(
            "Vision",
            "MNIST-superpixels",
            GraphCls,
            "Acc.",
            [
                (0.103, 0.010),
                (0.107, 0.010),
                (0.123, 0.017),
                (0.137, 0.026),
            ],
            Some((0.267, 0.038)),
        ),
        row(
            "Physics",
            "Ising-lattice",
            LinkPred,
            "AUC",
            [
                (0.676, 0.030),
                (0.625, 0.031),
                (0.632, 0.021),
                (0.628, 0.026),
            ],
            None,
        ),
        row(
            "Security",
            "9/11 terrorists",
            LinkPred,
            "AUC",
            [
                (0.685, 0.096),
                (0.756, 0.083),
                (0.700, 0.103),
                (0.712, 0.089),
            ],
            None,
        ),
    ]
}

const T_975_DF9: f64 = 2.262_157_162_798_205_5;

/// Ten values with mean `m` and t half-width `h` at alpha 0.05.
pub fn seed_series(m: f64, h: f64, shift: usize) -> Vec<f64> {
    let pattern = [-1.2, 0.4, 0.9, -0.3, 1.5, -0.8, 0.1, -1.6, 0.7, 0.3];
    let mu = pattern.iter().sum::<f64>() / 10.0;
    let centered: Vec<f64> = pattern.iter().map(|p| p - mu).collect();
    let sd = (centered.iter().map(|c| c * c).sum::<f64>() / 9.0).sqrt();
    let sigma = h * 10f64.sqrt() / T_975_DF9;
    (0..10)
        .map(|i| m + sigma * centered[(i + shift) % 10] / sd)
        .collect()
}

pub fn demo_tasks() -> Vec<TaskSpec> {
    rows()
        .into_iter()
        .map(|r| {
            TaskSpec::new(
                r.task,
                r.category,
                r.task_type,
                r.metric,
                MetricDirection::HigherIsBetter,
            )
        })
        .collect()
}

pub fn demo_tensor() -> MetricTensor {
    let mut b = MetricTensor::builder(
        demo_tasks(),
        MODELS.map(String::from).to_vec(),
        (0..10).collect(),
    );
    for r in rows() {
        for (i, &(m, h)) in r.cells.iter().enumerate() {
            b = b.series(r.task, MODELS[i], &seed_series(m, h, i));
        }
        if let Some((m, h)) = r.gin {
            b = b.series(r.task, MODELS[4], &seed_series(m, h, 4));
        }
    }
    b.build().expect("demo tensor is valid")
}

fn model_specs() -> Vec<ModelSpec> {
    use TaskType::*;
    let mut specs: Vec<ModelSpec> = MODELS[..4]
        .iter()
        .map(|m| ModelSpec::new(*m, [NodeCls, LinkPred, GraphCls]))
        .collect();
    specs.push(ModelSpec::new(MODELS[4], [GraphCls]));
    specs
}

/// The demo tasks registered under their categories, plus the five models.
pub fn demo_registry() -> Registry {
    let mut reg = Registry::new();
    for t in demo_tasks() {
        let category = t.category.clone();
        reg.register_task(&category, t)
            .expect("demo tasks are unique");
    }
    for m in model_specs() {
        reg.register_model(m).expect("demo models are unique");
    }
    reg
}

/// Synthetic profile centred on the published means, one noise scale for
/// every model.
pub fn demo_profile(noise_sd: f64) -> SyntheticProfile {
    let mut profiles: Vec<ModelProfile> = MODELS
        .iter()
        .map(|_| ModelProfile::new(0.0, noise_sd))
        .collect();
    for r in rows() {
        for (i, &(m, _)) in r.cells.iter().enumerate() {
            profiles[i].task_offsets.insert(r.task.into(), m);
        }
        if let Some((m, _)) = r.gin {
            profiles[4].task_offsets.insert(r.task.into(), m);
        }
    }
    SyntheticProfile::new(MODELS.iter().copied().zip(profiles))
}
