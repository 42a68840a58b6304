use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, TaskSpec, TaskType};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Category {
    name: String,
    tasks: Vec<TaskSpec>,
}

/// Tasks grouped by category plus the model catalogue, both kept in
/// registration order. Task names are unique across categories.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    categories: Vec<Category>,
    models: Vec<ModelSpec>,
}

/// A task given by name (looked up in the registry) or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskRef {
    Name(String),
    Spec(TaskSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskSelector {
    Category(String),
    Tasks(Vec<TaskRef>),
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_task(&mut self, category: &str, spec: TaskSpec) -> Result<()> {
        if spec.epochs == 0 {
            return Err(Error::InvalidArgument(format!(
                "task `{}` needs an epoch budget of at least 1",
                spec.name
            )));
        }
        if self.find_task(&spec.name).is_some() {
            return Err(Error::Duplicate(spec.name));
        }
        match self.categories.iter_mut().find(|c| c.name == category) {
            Some(c) => c.tasks.push(spec),
            None => self.categories.push(Category {
                name: category.to_owned(),
                tasks: vec![spec],
            }),
        }
        Ok(())
    }

    pub fn unregister_task(&mut self, category: &str, name: &str) -> Result<TaskSpec> {
        let cat = self
            .categories
            .iter_mut()
            .find(|c| c.name == category)
            .ok_or_else(|| Error::UnknownCategory(category.to_owned()))?;
        let pos = cat
            .tasks
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| Error::UnknownTask(name.to_owned()))?;
        let spec = cat.tasks.remove(pos);
        if cat.tasks.is_empty() {
            self.categories.retain(|c| c.name != category);
        }
        Ok(spec)
    }

    pub fn register_model(&mut self, spec: ModelSpec) -> Result<()> {
        if spec.compatible_task_types.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "model `{}` declares no compatible task types",
                spec.name
            )));
        }
        if self.model(&spec.name).is_some() {
            return Err(Error::Duplicate(spec.name));
        }
        self.models.push(spec);
        Ok(())
    }

    pub fn unregister_model(&mut self, name: &str) -> Result<ModelSpec> {
        let pos = self
            .models
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| Error::UnknownModel(name.to_owned()))?;
        Ok(self.models.remove(pos))
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|c| c.name.as_str())
    }

    pub fn models(&self) -> &[ModelSpec] {
        &self.models
    }

    pub fn model(&self, name: &str) -> Option<&ModelSpec> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn find_task(&self, name: &str) -> Option<&TaskSpec> {
        self.categories
            .iter()
            .flat_map(|c| c.tasks.iter())
            .find(|t| t.name == name)
    }

    /// Tasks for `selector` in registration (or listed) order, optionally
    /// restricted to one task type. An empty result is an error.
    pub fn resolve_tasks(
        &self,
        selector: &TaskSelector,
        filter: Option<&TaskType>,
    ) -> Result<Vec<TaskSpec>> {
        let tasks: Vec<TaskSpec> = match selector {
            TaskSelector::Category(name) => self
                .categories
                .iter()
                .find(|c| c.name == *name)
                .ok_or_else(|| Error::UnknownCategory(name.clone()))?
                .tasks
                .clone(),
            TaskSelector::Tasks(refs) => refs
                .iter()
                .map(|r| match r {
                    TaskRef::Name(n) => self
                        .find_task(n)
                        .cloned()
                        .ok_or_else(|| Error::UnknownTask(n.clone())),
                    TaskRef::Spec(s) => Ok(s.clone()),
                })
                .collect::<Result<_>>()?,
        };
        let mut seen = std::collections::BTreeSet::new();
        for t in &tasks {
            if !seen.insert(t.name.as_str()) {
                return Err(Error::Duplicate(t.name.clone()));
            }
        }
        let tasks: Vec<TaskSpec> = tasks
            .into_iter()
            .filter(|t| filter.is_none_or(|f| t.task_type == *f))
            .collect();
        if tasks.is_empty() {
            return Err(Error::EmptySelection(match filter {
                Some(f) => format!("no `{f}` tasks in the selection"),
                None => "the selection contains no tasks".into(),
            }));
        }
        Ok(tasks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MetricDirection;

    fn task(name: &str, tt: TaskType) -> TaskSpec {
        TaskSpec::new(name, "x", tt, "acc", MetricDirection::HigherIsBetter)
    }

    fn registry() -> Registry {
        let mut r = Registry::new();
        r.register_task("social", task("Cora", TaskType::NodeCls))
            .unwrap();
        r.register_task("social", task("Reddit-links", TaskType::LinkPred))
            .unwrap();
        r.register_task("social", task("CiteSeer", TaskType::NodeCls))
            .unwrap();
        r.register_task("biology", task("MUTAG", TaskType::GraphCls))
            .unwrap();
        r
    }

    #[test]
    fn registration_order() {
        let names: Vec<_> = registry()
            .resolve_tasks(&TaskSelector::Category("social".into()), None)
            .unwrap()
            .into_iter()
            .map(|t| t.name)
            .collect();
        assert_eq!(names, ["Cora", "Reddit-links", "CiteSeer"]);
    }

    #[test]
    fn filter_by_type() {
        let names: Vec<_> = registry()
            .resolve_tasks(
                &TaskSelector::Category("social".into()),
                Some(&TaskType::NodeCls),
            )
            .unwrap()
            .into_iter()
            .map(|t| t.name)
            .collect();
        assert_eq!(names, ["Cora", "CiteSeer"]);
    }

    #[test]
    fn unknown_or_empty() {
        let r = registry();
        assert!(matches!(
            r.resolve_tasks(&TaskSelector::Category("nope".into()), None),
            Err(Error::UnknownCategory(_))
        ));
        assert!(matches!(
            r.resolve_tasks(
                &TaskSelector::Category("biology".into()),
                Some(&TaskType::NodeCls)
            ),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn duplicates_rejected() {
        let mut r = registry();
        assert!(matches!(
            r.register_task("biology", task("Cora", TaskType::NodeCls)),
            Err(Error::Duplicate(_))
        ));
        r.register_model(ModelSpec::new("GCN", [TaskType::NodeCls]))
            .unwrap();
        assert!(r
            .register_model(ModelSpec::new("GCN", [TaskType::NodeCls]))
            .is_err());
        assert!(r.register_model(ModelSpec::new("Empty", [])).is_err());
    }

    #[test]
    fn unregister_removes_exactly_one() {
        let mut r = registry();
        r.unregister_task("social", "Reddit-links").unwrap();
        let names: Vec<_> = r
            .resolve_tasks(&TaskSelector::Category("social".into()), None)
            .unwrap()
            .into_iter()
            .map(|t| t.name)
            .collect();
        assert_eq!(names, ["Cora", "CiteSeer"]);
        assert!(r.unregister_task("social", "Reddit-links").is_err());
        r.unregister_task("biology", "MUTAG").unwrap();
        assert!(r.categories().all(|c| c != "biology"));
    }

    #[test]
    fn ad_hoc_lists() {
        let r = registry();
        let sel = TaskSelector::Tasks(vec![
            TaskRef::Name("MUTAG".into()),
            TaskRef::Spec(task("synthetic-1", TaskType::Custom("toy".into()))),
        ]);
        let tasks = r.resolve_tasks(&sel, None).unwrap();
        assert_eq!(tasks[1].name, "synthetic-1");
        let bad = TaskSelector::Tasks(vec![
            TaskRef::Name("Cora".into()),
            TaskRef::Name("Cora".into()),
        ]);
        assert!(r.resolve_tasks(&bad, None).is_err());
    }

    #[test]
    fn zero_epochs_rejected() {
        let mut r = Registry::new();
        assert!(r
            .register_task("c", task("t", TaskType::NodeCls).with_epochs(0))
            .is_err());
    }
}
