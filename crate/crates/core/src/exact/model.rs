//! Integer-program representation: variables, a linear objective and linear
//! constraints with integer coefficients.

use std::fmt;

use serde::Serialize;

use super::build::Layout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: i128,
    /// `None` means unbounded above.
    pub upper: Option<i128>,
}

impl Variable {
    /// Whether the bounds are the LP-format defaults for this kind.
    pub fn has_default_bounds(&self) -> bool {
        match self.kind {
            VarKind::Binary => self.lower == 0 && self.upper == Some(1),
            VarKind::Integer | VarKind::Continuous => self.lower == 0 && self.upper.is_none(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LinExpr {
    pub terms: Vec<(VarId, i128)>,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, var: VarId, coef: i128) -> Self {
        self.push(var, coef);
        self
    }

    pub fn push(&mut self, var: VarId, coef: i128) {
        if coef != 0 {
            self.terms.push((var, coef));
        }
    }

    pub fn eval(&self, values: &[i128]) -> i128 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }

    fn holds(self, lhs: i128, rhs: i128) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub name: String,
    pub expr: LinExpr,
    pub relation: Relation,
    pub rhs: i128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Which of the four scheduling programs a model encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Formulation {
    /// Round-based ordered-block scheduling (unit execution times).
    ObsHomogeneous,
    /// Makespan minimisation with start/end times and same-core linearisation.
    ObsHeterogeneous,
    /// Round-based block construction.
    PbcHomogeneous,
    /// Selection plus timed scheduling under a budget.
    PbcHeterogeneous,
}

impl Formulation {
    pub fn label(self) -> &'static str {
        match self {
            Formulation::ObsHomogeneous => "obs-hom",
            Formulation::ObsHeterogeneous => "obs-het",
            Formulation::PbcHomogeneous => "pbc-hom",
            Formulation::PbcHeterogeneous => "pbc-het",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The scheduling instance a model was generated from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub durations: Vec<u64>,
    pub weights: Vec<u128>,
    /// Conflict pairs `(i, j)` with `i < j`. For ordered-block programs these
    /// are precedence arcs `i -> j`.
    pub pairs: Vec<(usize, usize)>,
    pub cores: usize,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelMeta {
    pub formulation: Formulation,
    pub instance: Instance,
    /// Round count `R` for the round-based programs.
    pub rounds: Option<u64>,
    /// Big constant (ordered blocks) or runtime budget (block construction).
    pub horizon: Option<u64>,
    #[serde(skip)]
    pub(crate) layout: Layout,
}

/// Variable and constraint counts of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ModelShape {
    pub binaries: usize,
    pub integers: usize,
    pub continuous: usize,
    pub constraints: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactModel {
    pub variables: Vec<Variable>,
    pub sense: Sense,
    pub objective: LinExpr,
    pub constraints: Vec<Constraint>,
    pub meta: Option<ModelMeta>,
}

impl ExactModel {
    pub fn new(sense: Sense) -> Self {
        ExactModel {
            variables: Vec::new(),
            sense,
            objective: LinExpr::new(),
            constraints: Vec::new(),
            meta: None,
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind) -> VarId {
        let (lower, upper) = match kind {
            VarKind::Binary => (0, Some(1)),
            VarKind::Integer | VarKind::Continuous => (0, None),
        };
        self.variables.push(Variable {
            name: name.into(),
            kind,
            lower,
            upper,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        expr: LinExpr,
        relation: Relation,
        rhs: i128,
    ) {
        self.constraints.push(Constraint {
            name: name.into(),
            expr,
            relation,
            rhs,
        });
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn formulation(&self) -> Option<Formulation> {
        self.meta.as_ref().map(|m| m.formulation)
    }

    pub fn shape(&self) -> ModelShape {
        let mut shape = ModelShape {
            constraints: self.constraints.len(),
            ..ModelShape::default()
        };
        for v in &self.variables {
            match v.kind {
                VarKind::Binary => shape.binaries += 1,
                VarKind::Integer => shape.integers += 1,
                VarKind::Continuous => shape.continuous += 1,
            }
        }
        shape
    }

    pub fn objective_value(&self, values: &[i128]) -> i128 {
        self.objective.eval(values)
    }

    /// Verifies that `values` respects every bound, integrality requirement
    /// and constraint. Returns a description of the first violation.
    pub fn check(&self, values: &[i128]) -> Result<(), String> {
        if values.len() != self.variables.len() {
            return Err(format!(
                "assignment has {} values for {} variables",
                values.len(),
                self.variables.len()
            ));
        }
        for (var, &value) in self.variables.iter().zip(values) {
            if value < var.lower || var.upper.is_some_and(|u| value > u) {
                return Err(format!("{} = {value} is out of bounds", var.name));
            }
        }
        for c in &self.constraints {
            let lhs = c.expr.eval(values);
            if !c.relation.holds(lhs, c.rhs) {
                return Err(format!(
                    "constraint {} violated: {lhs} {} {}",
                    c.name,
                    c.relation.symbol(),
                    c.rhs
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_reports_violations() {
        let mut m = ExactModel::new(Sense::Maximize);
        let x = m.add_var("x", VarKind::Binary);
        let y = m.add_var("y", VarKind::Integer);
        m.add_constraint("c", LinExpr::new().term(x, 1).term(y, 1), Relation::Le, 3);
        assert!(m.check(&[1, 2]).is_ok());
        assert!(m.check(&[1, 3]).unwrap_err().contains("constraint c"));
        assert!(m.check(&[2, 0]).unwrap_err().contains("out of bounds"));
        assert!(m.check(&[0, -1]).is_err());
        assert_eq!(
            m.shape(),
            ModelShape {
                binaries: 1,
                integers: 1,
                continuous: 0,
                constraints: 1
            }
        );
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let e = LinExpr::new().term(VarId(0), 0).term(VarId(1), -2);
        assert_eq!(e.terms, vec![(VarId(1), -2)]);
        assert_eq!(e.eval(&[5, 3]), -6);
    }
}
