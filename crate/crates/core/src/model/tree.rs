use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Dataset;

/// A categorical variable with ordered level labels.
///
/// Level codes are the dense indices `0..arity` into `levels`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub levels: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>, L: Into<String>>(name: S, levels: impl IntoIterator<Item = L>) -> Self {
        Variable {
            name: name.into(),
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }

    /// Binary variable with levels `"0"` and `"1"`.
    pub fn binary<S: Into<String>>(name: S) -> Self {
        Variable::new(name, ["0", "1"])
    }

    pub fn arity(&self) -> usize {
        self.levels.len()
    }

    pub fn level_code(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == label)
    }
}

/// A node of the event tree that is the parent of the edges of `variable`:
/// the values taken by all preceding variables.
///
/// Variables are indexed from 0, so the root context is
/// `Context { variable: 0, prefix: [] }`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Context {
    pub variable: usize,
    pub prefix: Vec<usize>,
}

impl Context {
    pub fn new(variable: usize, prefix: Vec<usize>) -> Self {
        Context { variable, prefix }
    }

    pub fn root() -> Self {
        Context::new(0, Vec::new())
    }
}

/// An event tree over an ordered list of categorical variables.
///
/// Contexts of variable `i` are addressed by the mixed-radix index of their
/// prefix (first variable most significant), so index order is the
/// lexicographic order over level codes. The tree is implicit; only the
/// optional set of retained contexts of an asymmetric tree is stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventTree {
    variables: Vec<Variable>,
    full_contexts: Vec<usize>,
    retained: Option<Vec<BTreeSet<usize>>>,
}

impl EventTree {
    /// Builds the full symmetric event tree for the given variables.
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        validate_schema(&variables)?;
        let mut full_contexts = Vec::with_capacity(variables.len());
        let mut count: usize = 1;
        for (i, v) in variables.iter().enumerate() {
            full_contexts.push(count);
            count = count.checked_mul(v.arity()).ok_or_else(|| {
                Error::Schema(format!(
                    "event tree too large: context count overflows at variable {} ({})",
                    i, v.name
                ))
            })?;
        }
        Ok(EventTree {
            variables,
            full_contexts,
            retained: None,
        })
    }

    /// Builds an asymmetric tree retaining only the given contexts.
    ///
    /// `retained[i]` holds the context indices kept for variable `i`. The set
    /// must be closed under taking parents.
    pub fn with_retained(variables: Vec<Variable>, retained: Vec<BTreeSet<usize>>) -> Result<Self> {
        let mut tree = EventTree::new(variables)?;
        if retained.len() != tree.p() {
            return Err(Error::Schema(format!(
                "retained contexts given for {} variables, tree has {}",
                retained.len(),
                tree.p()
            )));
        }
        for (i, set) in retained.iter().enumerate() {
            if let Some(&max) = set.iter().next_back() {
                if max >= tree.full_contexts[i] {
                    return Err(Error::Schema(format!(
                        "context index {} out of range for variable {}",
                        max, tree.variables[i].name
                    )));
                }
            }
            if i == 0 {
                if !set.contains(&0) {
                    return Err(Error::Schema("root context must be retained".into()));
                }
                continue;
            }
            let parent_arity = tree.variables[i - 1].arity();
            for &ctx in set {
                if !retained[i - 1].contains(&(ctx / parent_arity)) {
                    let c = tree.context(i, ctx);
                    return Err(Error::Schema(format!(
                        "context {} is retained but its parent is pruned",
                        tree.describe_context(&c)
                    )));
                }
            }
        }
        tree.retained = Some(retained);
        Ok(tree)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, i: usize) -> &Variable {
        &self.variables[i]
    }

    /// Number of variables.
    pub fn p(&self) -> usize {
        self.variables.len()
    }

    pub fn arity(&self, i: usize) -> usize {
        self.variables[i].arity()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn is_pruned(&self) -> bool {
        self.retained.is_some()
    }

    /// Number of contexts of variable `i` in the full symmetric tree.
    pub fn n_full_contexts(&self, i: usize) -> usize {
        self.full_contexts[i]
    }

    /// Number of retained contexts of variable `i`.
    pub fn n_contexts(&self, i: usize) -> usize {
        match &self.retained {
            Some(r) => r[i].len(),
            None => self.full_contexts[i],
        }
    }

    pub fn total_contexts(&self) -> usize {
        (0..self.p()).map(|i| self.n_contexts(i)).sum()
    }

    /// Number of root-to-leaf paths.
    pub fn n_leaves(&self) -> usize {
        let last = self.p() - 1;
        self.n_contexts(last) * self.arity(last)
    }

    pub fn contains(&self, variable: usize, ctx: usize) -> bool {
        match &self.retained {
            Some(r) => r[variable].contains(&ctx),
            None => ctx < self.full_contexts[variable],
        }
    }

    /// Retained context indices of variable `i` in canonical order.
    pub fn context_indices(&self, i: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.retained {
            Some(r) => Box::new(r[i].iter().copied()),
            None => Box::new(0..self.full_contexts[i]),
        }
    }

    /// Retained contexts of variable `i` in canonical order.
    pub fn contexts(&self, i: usize) -> impl Iterator<Item = Context> + '_ {
        self.context_indices(i).map(move |idx| self.context(i, idx))
    }

    pub fn retained_sets(&self) -> Option<&[BTreeSet<usize>]> {
        self.retained.as_deref()
    }

    /// Mixed-radix index of a prefix of length `variable`.
    pub fn context_index(&self, variable: usize, prefix: &[usize]) -> Result<usize> {
        if variable >= self.p() || prefix.len() != variable {
            return Err(Error::InvalidArgument(format!(
                "prefix of length {} does not address a context of variable {}",
                prefix.len(),
                variable
            )));
        }
        let mut idx = 0;
        for (j, &code) in prefix.iter().enumerate() {
            if code >= self.arity(j) {
                return Err(Error::InvalidArgument(format!(
                    "level code {} invalid for variable {}",
                    code, self.variables[j].name
                )));
            }
            idx = idx * self.arity(j) + code;
        }
        Ok(idx)
    }

    /// Decodes a context index back into its prefix.
    pub fn context(&self, variable: usize, mut idx: usize) -> Context {
        let mut prefix = vec![0; variable];
        for j in (0..variable).rev() {
            let a = self.arity(j);
            prefix[j] = idx % a;
            idx /= a;
        }
        Context::new(variable, prefix)
    }

    /// Index of the context of `variable + 1` reached from `ctx` along `level`.
    #[inline]
    pub fn child_index(&self, variable: usize, ctx: usize, level: usize) -> usize {
        ctx * self.arity(variable) + level
    }

    /// Human-readable `Name=label` rendering of a context.
    pub fn describe_context(&self, c: &Context) -> String {
        if c.prefix.is_empty() {
            return format!("{}:<root>", self.variables[c.variable].name);
        }
        let parts: Vec<String> = c
            .prefix
            .iter()
            .enumerate()
            .map(|(j, &code)| {
                let v = &self.variables[j];
                let label = v.levels.get(code).map(String::as_str).unwrap_or("?");
                format!("{}={}", v.name, label)
            })
            .collect();
        format!("{}|{}", self.variables[c.variable].name, parts.join(","))
    }

    /// Retains only contexts reached by at least one row of `data`.
    pub fn prune_unobserved(&self, data: &Dataset) -> Result<EventTree> {
        self.check_dataset(data)?;
        if data.n_rows() == 0 {
            return Err(Error::Data("cannot prune with an empty dataset".into()));
        }
        let mut retained = vec![BTreeSet::new(); self.p()];
        for row in data.rows() {
            let mut ctx = 0;
            for (i, &code) in row.iter().enumerate() {
                if !self.contains(i, ctx) {
                    return Err(Error::Data(format!(
                        "row reaches pruned context {}",
                        self.describe_context(&self.context(i, ctx))
                    )));
                }
                retained[i].insert(ctx);
                ctx = self.child_index(i, ctx, code);
            }
        }
        Ok(EventTree {
            variables: self.variables.clone(),
            full_contexts: self.full_contexts.clone(),
            retained: Some(retained),
        })
    }

    /// Full symmetric tree over the same variables.
    pub fn unpruned(&self) -> EventTree {
        EventTree {
            variables: self.variables.clone(),
            full_contexts: self.full_contexts.clone(),
            retained: None,
        }
    }

    pub(crate) fn check_dataset(&self, data: &Dataset) -> Result<()> {
        if data.variables() != self.variables.as_slice() {
            return Err(Error::Data(
                "dataset schema does not match the event tree variables".into(),
            ));
        }
        Ok(())
    }
}

/// Builds the full event tree for a schema.
pub fn build_event_tree(variables: Vec<Variable>) -> Result<EventTree> {
    EventTree::new(variables)
}

pub(crate) fn validate_schema(variables: &[Variable]) -> Result<()> {
    if variables.is_empty() {
        return Err(Error::Schema("at least one variable is required".into()));
    }
    let mut names = HashSet::new();
    for v in variables {
        if !names.insert(v.name.as_str()) {
            return Err(Error::Schema(format!("duplicate variable name {:?}", v.name)));
        }
        if v.arity() < 2 {
            return Err(Error::Schema(format!(
                "variable {:?} has {} level(s); at least 2 are required",
                v.name,
                v.arity()
            )));
        }
        let mut labels = HashSet::new();
        for l in &v.levels {
            if !labels.insert(l.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate level {:?} in variable {:?}",
                    l, v.name
                )));
            }
        }
    }
    Ok(())
}
