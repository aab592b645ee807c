//! Closed-form field expressions (`"2 + 0.5*sin(pi*x)"`) and per-node tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// How a scalar field is given: a constant, an expression in `x` (and `y`),
/// or an explicit per-node table in mesh node order.
///
/// Expressions understand the usual elementary functions, the constants `pi`
/// and `e`, and `step(t)` (1 for `t ≥ 0`, else 0) for piecewise fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Constant(f64),
    Expression(String),
    Table { table: Vec<f64> },
}

impl FieldSpec {
    pub fn expr(src: impl Into<String>) -> Self {
        FieldSpec::Expression(src.into())
    }

    /// Evaluates the spec at every mesh node.
    pub fn sample(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        match self {
            FieldSpec::Constant(c) => Ok(vec![*c; mesh.node_count()]),
            FieldSpec::Table { table } => {
                mesh.check_nodal(table.len())?;
                Ok(table.clone())
            }
            FieldSpec::Expression(src) => {
                let f = compile(src)?;
                Ok(mesh.coords().iter().map(|c| f(c[0], c[1])).collect())
            }
        }
    }
}

impl From<f64> for FieldSpec {
    fn from(c: f64) -> Self {
        FieldSpec::Constant(c)
    }
}

impl From<&str> for FieldSpec {
    fn from(s: &str) -> Self {
        FieldSpec::Expression(s.to_string())
    }
}

/// Compiles an expression into a function of `(x, y)`.
pub fn compile(src: &str) -> Result<impl Fn(f64, f64) -> f64> {
    let err = |reason: String| Error::Expression {
        expr: src.to_string(),
        reason,
    };
    let expr: meval::Expr = src.parse().map_err(|e| err(format!("{e}")))?;
    let mut ctx = meval::Context::new();
    ctx.func("step", |t| if t >= 0.0 { 1.0 } else { 0.0 });
    expr.bind2_with_context(ctx, "x", "y")
        .map_err(|e| err(format!("{e}")))
}
