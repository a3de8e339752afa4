use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EventTree, FitMetadata, StagedTreeModel, Staging, Variable};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const PREFIX_SEPARATOR: char = '|';

#[derive(Serialize, Deserialize)]
struct VariableEntry {
    name: String,
    levels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    n: usize,
    alpha: f64,
    version: u32,
    #[serde(default)]
    asymmetric: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    undefined: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<BTreeMap<String, BTreeMap<String, Vec<u64>>>>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    variables: Vec<VariableEntry>,
    staging: BTreeMap<String, BTreeMap<String, String>>,
    parameters: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    meta: Meta,
}

#[derive(Deserialize)]
struct SchemaFile {
    variables: Vec<VariableEntry>,
}

fn prefix_key(tree: &EventTree, prefix: &[usize]) -> String {
    let labels: Vec<&str> = prefix
        .iter()
        .enumerate()
        .map(|(j, &c)| tree.variable(j).levels[c].as_str())
        .collect();
    labels.join(&PREFIX_SEPARATOR.to_string())
}

/// Serializes a model. Floats use the shortest representation that parses
/// back to the same value.
pub fn model_to_json(model: &StagedTreeModel) -> Result<String> {
    let tree = model.tree();
    let staging = model.staging();
    for v in tree.variables() {
        if v.levels.iter().any(|l| l.contains(PREFIX_SEPARATOR)) {
            return Err(Error::Schema(format!(
                "level labels of {:?} contain {PREFIX_SEPARATOR:?}, which the model format reserves",
                v.name
            )));
        }
    }
    let mut staging_out = BTreeMap::new();
    let mut params_out = BTreeMap::new();
    let mut undefined = BTreeMap::new();
    let mut counts_out = BTreeMap::new();
    for i in 0..tree.p() {
        let name = tree.variable(i).name.clone();
        let entries: BTreeMap<String, String> = staging
            .assignment(i)
            .map(|(ctx, s)| {
                (
                    prefix_key(tree, &tree.context(i, ctx).prefix),
                    staging.stage_label(i, s).to_string(),
                )
            })
            .collect();
        staging_out.insert(name.clone(), entries);
        let mut params = BTreeMap::new();
        let mut undef = Vec::new();
        for s in 0..staging.n_stages(i) {
            let label = staging.stage_label(i, s).to_string();
            params.insert(label.clone(), model.parameters(i, s).to_vec());
            if model.is_undefined(i, s) {
                undef.push(label);
            }
        }
        params_out.insert(name.clone(), params);
        if !undef.is_empty() {
            undefined.insert(name.clone(), undef);
        }
        if let Some(sc) = &model.meta().stage_counts {
            let per: BTreeMap<String, Vec<u64>> = (0..staging.n_stages(i))
                .map(|s| (staging.stage_label(i, s).to_string(), sc[i][s].clone()))
                .collect();
            counts_out.insert(name, per);
        }
    }
    let file = ModelFile {
        variables: tree
            .variables()
            .iter()
            .map(|v| VariableEntry {
                name: v.name.clone(),
                levels: v.levels.clone(),
            })
            .collect(),
        staging: staging_out,
        parameters: params_out,
        meta: Meta {
            n: model.meta().n,
            alpha: model.meta().alpha,
            version: MODEL_FORMAT_VERSION,
            asymmetric: tree.is_pruned(),
            undefined,
            counts: model.meta().stage_counts.as_ref().map(|_| counts_out),
        },
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

fn parse_prefix(vars: &[Variable], var: usize, key: &str) -> Result<Vec<usize>> {
    if var == 0 {
        return if key.is_empty() {
            Ok(Vec::new())
        } else {
            Err(Error::Model(format!("root variable has context {key:?}; expected \"\"")))
        };
    }
    let parts: Vec<&str> = key.split(PREFIX_SEPARATOR).collect();
    if parts.len() != var {
        return Err(Error::Model(format!(
            "context {key:?} of {:?} needs {var} labels",
            vars[var].name
        )));
    }
    parts
        .iter()
        .enumerate()
        .map(|(j, l)| {
            vars[j]
                .level_code(l)
                .ok_or_else(|| Error::Model(format!("context {key:?}: {l:?} is not a level of {:?}", vars[j].name)))
        })
        .collect()
}

/// Parses and re-validates a serialized model.
pub fn model_from_json(text: &str) -> Result<StagedTreeModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.meta.version != MODEL_FORMAT_VERSION {
        return Err(Error::Model(format!(
            "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
            file.meta.version
        )));
    }
    let vars: Vec<Variable> = file
        .variables
        .into_iter()
        .map(|v| Variable {
            name: v.name,
            levels: v.levels,
        })
        .collect();
    let full = EventTree::new(vars.clone())?;
    for name in file.staging.keys().chain(file.parameters.keys()) {
        if full.variable_index(name).is_none() {
            return Err(Error::Model(format!("unknown variable {name:?}")));
        }
    }
    let mut labels: Vec<BTreeMap<usize, String>> = Vec::with_capacity(vars.len());
    for (i, v) in vars.iter().enumerate() {
        let entries = file
            .staging
            .get(&v.name)
            .ok_or_else(|| Error::Model(format!("no staging for variable {:?}", v.name)))?;
        let mut map = BTreeMap::new();
        for (key, stage) in entries {
            let prefix = parse_prefix(&vars, i, key)?;
            map.insert(full.context_index(i, &prefix)?, stage.clone());
        }
        labels.push(map);
    }
    let tree = if file.meta.asymmetric {
        let retained = labels.iter().map(|m| m.keys().copied().collect()).collect();
        EventTree::with_retained(vars.clone(), retained)?
    } else {
        for (i, map) in labels.iter().enumerate() {
            if let Some(ctx) = (0..full.n_full_contexts(i)).find(|c| !map.contains_key(c)) {
                return Err(Error::Model(format!(
                    "staging has no entry for context {}",
                    full.describe_context(&full.context(i, ctx))
                )));
            }
        }
        full
    };
    let staging = Staging::from_labels(&tree, labels)?;
    let mut params = Vec::with_capacity(vars.len());
    let mut undefined = Vec::with_capacity(vars.len());
    let mut counts = Vec::with_capacity(vars.len());
    for (i, v) in vars.iter().enumerate() {
        let table = file
            .parameters
            .get(&v.name)
            .ok_or_else(|| Error::Model(format!("no parameters for variable {:?}", v.name)))?;
        let stage_labels = staging.stage_labels(i);
        if let Some(extra) = table.keys().find(|k| !stage_labels.contains(k)) {
            return Err(Error::Model(format!("variable {:?}: parameters for unknown stage {extra:?}", v.name)));
        }
        let lookup = |label: &String| {
            table
                .get(label)
                .cloned()
                .ok_or_else(|| Error::Model(format!("variable {:?}: no parameters for stage {label:?}", v.name)))
        };
        params.push(stage_labels.iter().map(lookup).collect::<Result<Vec<_>>>()?);
        let undef = file.meta.undefined.get(&v.name);
        undefined.push(stage_labels.iter().map(|l| undef.is_some_and(|u| u.contains(l))).collect());
        if let Some(c) = &file.meta.counts {
            let per = c
                .get(&v.name)
                .ok_or_else(|| Error::Model(format!("no counts for variable {:?}", v.name)))?;
            counts.push(
                stage_labels
                    .iter()
                    .map(|l| {
                        per.get(l)
                            .cloned()
                            .ok_or_else(|| Error::Model(format!("no counts for stage {l:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
    }
    let meta = FitMetadata {
        n: file.meta.n,
        alpha: file.meta.alpha,
        stage_counts: file.meta.counts.is_some().then_some(counts),
        undefined,
    };
    StagedTreeModel::with_meta(tree, staging, params, meta)
}

pub fn write_model(model: &StagedTreeModel, path: impl AsRef<Path>) -> Result<()> {
    let mut text = model_to_json(model)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<StagedTreeModel> {
    model_from_json(&fs::read_to_string(path)?)
}

/// Reads `{"variables": [{"name": ..., "levels": [...]}, ...]}`; the list
/// order is the causal order.
pub fn read_schema(path: impl AsRef<Path>) -> Result<Vec<Variable>> {
    let file: SchemaFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let vars: Vec<Variable> = file
        .variables
        .into_iter()
        .map(|v| Variable {
            name: v.name,
            levels: v.levels,
        })
        .collect();
    EventTree::new(vars.clone())?;
    Ok(vars)
}
