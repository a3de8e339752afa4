use crate::error::{Error, Result};
use crate::model::{EventTree, Variable};

/// Roles of the variables in a treatment-effect query: covariates are all
/// variables before the treatment, the outcome is the last variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CausalFrame {
    pub treatment: usize,
    pub outcome: usize,
    pub treated_level: usize,
    pub positive_level: usize,
}

/// Level treated as "1": the label `1` when present, else code 1.
pub fn default_level(variable: &Variable) -> usize {
    variable.level_code("1").unwrap_or(1)
}

impl CausalFrame {
    pub fn new(tree: &EventTree, treatment: usize, outcome: usize) -> Result<Self> {
        if treatment >= tree.p() || outcome >= tree.p() {
            return Err(Error::InvalidArgument("treatment or outcome index out of range".into()));
        }
        let frame = CausalFrame {
            treatment,
            outcome,
            treated_level: default_level(tree.variable(treatment)),
            positive_level: default_level(tree.variable(outcome)),
        };
        frame.check(tree)?;
        Ok(frame)
    }

    pub fn from_names(tree: &EventTree, treatment: &str, outcome: &str) -> Result<Self> {
        let find = |n: &str| {
            tree.variable_index(n)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown variable {n:?}")))
        };
        CausalFrame::new(tree, find(treatment)?, find(outcome)?)
    }

    pub fn with_levels(mut self, tree: &EventTree, treated: &str, positive: &str) -> Result<Self> {
        let code = |v: usize, label: &str| {
            tree.variable(v).level_code(label).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "level {label:?} not found in variable {:?}",
                    tree.variable(v).name
                ))
            })
        };
        self.treated_level = code(self.treatment, treated)?;
        self.positive_level = code(self.outcome, positive)?;
        Ok(self)
    }

    pub fn untreated_level(&self) -> usize {
        1 - self.treated_level
    }

    /// Indices of the covariates.
    pub fn covariates(&self) -> std::ops::Range<usize> {
        0..self.treatment
    }

    pub(crate) fn check(&self, tree: &EventTree) -> Result<()> {
        self.check_variables(tree.variables())
    }

    pub(crate) fn check_variables(&self, vars: &[Variable]) -> Result<()> {
        if self.outcome + 1 != vars.len() {
            return Err(Error::InvalidArgument(format!(
                "outcome {:?} must be the last variable",
                vars.get(self.outcome).map_or("?", |v| v.name.as_str())
            )));
        }
        if self.treatment >= self.outcome {
            return Err(Error::InvalidArgument("treatment must precede the outcome".into()));
        }
        for v in [self.treatment, self.outcome] {
            if vars[v].arity() != 2 {
                return Err(Error::InvalidArgument(format!(
                    "variable {:?} must be binary",
                    vars[v].name
                )));
            }
        }
        if self.treated_level > 1 || self.positive_level > 1 {
            return Err(Error::InvalidArgument("level codes must be 0 or 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_rules() {
        let t = EventTree::new(vec![
            Variable::binary("Z"),
            Variable::new("R", ["no", "yes"]),
            Variable::new("Y", ["1", "0"]),
        ])
        .unwrap();
        let f = CausalFrame::from_names(&t, "R", "Y").unwrap();
        assert_eq!((f.treated_level, f.positive_level), (1, 0));
        assert_eq!(f.covariates(), 0..1);
        assert!(CausalFrame::new(&t, 2, 1).is_err());
        assert!(CausalFrame::new(&t, 0, 1).is_err());
        let g = f.with_levels(&t, "no", "0").unwrap();
        assert_eq!((g.treated_level, g.untreated_level(), g.positive_level), (0, 1, 1));
    }
}
