use crate::error::{Error, Result};
use crate::model::tree::{validate_schema, Variable};

/// Complete categorical observations stored as level codes, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    variables: Vec<Variable>,
    codes: Vec<usize>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(variables: Vec<Variable>, rows: Vec<Vec<usize>>) -> Result<Self> {
        let p = variables.len();
        let mut codes = Vec::with_capacity(rows.len() * p);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Data(format!(
                    "row {} has {} values, expected {}",
                    r,
                    row.len(),
                    p
                )));
            }
            codes.extend_from_slice(row);
        }
        Dataset::from_codes(variables, codes)
    }

    /// Builds a dataset from a flat row-major code buffer.
    pub fn from_codes(variables: Vec<Variable>, codes: Vec<usize>) -> Result<Self> {
        validate_schema(&variables)?;
        let p = variables.len();
        if codes.len() % p != 0 {
            return Err(Error::Data("code buffer is not a multiple of the row width".into()));
        }
        for (k, &c) in codes.iter().enumerate() {
            let v = &variables[k % p];
            if c >= v.arity() {
                return Err(Error::Data(format!(
                    "row {}: code {} invalid for variable {:?} with {} levels",
                    k / p,
                    c,
                    v.name,
                    v.arity()
                )));
            }
        }
        let n_rows = codes.len() / p;
        Ok(Dataset {
            variables,
            codes,
            n_rows,
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn p(&self) -> usize {
        self.variables.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn row(&self, i: usize) -> &[usize] {
        let p = self.p();
        &self.codes[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.codes.chunks_exact(self.p())
    }

    pub fn value(&self, row: usize, col: usize) -> usize {
        self.codes[row * self.p() + col]
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Rows selected by index, with repetition allowed (bootstrap resamples).
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let p = self.p();
        let mut codes = Vec::with_capacity(indices.len() * p);
        for &i in indices {
            codes.extend_from_slice(self.row(i));
        }
        Dataset {
            variables: self.variables.clone(),
            codes,
            n_rows: indices.len(),
        }
    }

    /// Keeps and reorders columns to follow `names`.
    pub fn reorder(&self, names: &[&str]) -> Result<Dataset> {
        let cols = names
            .iter()
            .map(|n| {
                self.variable_index(n)
                    .ok_or_else(|| Error::Schema(format!("unknown variable {:?}", n)))
            })
            .collect::<Result<Vec<_>>>()?;
        let variables: Vec<Variable> = cols.iter().map(|&c| self.variables[c].clone()).collect();
        validate_schema(&variables)?;
        let mut codes = Vec::with_capacity(self.n_rows * cols.len());
        for row in self.rows() {
            codes.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(Dataset {
            variables,
            codes,
            n_rows: self.n_rows,
        })
    }
}
