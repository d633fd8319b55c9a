//! Reified program DAGs: validation, evaluation, and the printable dump.
//!
//! A node pairs an expression template with the *reified* specification the
//! compiler settled on — argument types narrowed to what was actually bound
//! and the return type rewritten by the reification rules. Evaluation is a
//! post-order walk with an explicit node budget so runaway programs stop with
//! a resource error rather than stalling a run.

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{EvalIo, Expression, HofKind};
use crate::types::{Specification, TypeExpr, TypeHierarchy};
use crate::value::Value;

// ---- Structure -------------------------------------------------------------

/// One node of a reified program.
#[derive(Clone, Debug, PartialEq)]
pub struct DagNode {
    pub expr: Expression,
    /// Reified specification: `spec.ret` is this node's result type.
    pub spec: Specification,
    /// Argument subgraphs, in argument order (receiver first for methods;
    /// collection then body for higher-order nodes).
    pub children: Vec<Arc<DagNode>>,
}

impl DagNode {
    /// Childless node whose result type is `ty`.
    pub fn leaf(expr: Expression, ty: TypeExpr) -> Self {
        DagNode {
            expr,
            spec: Specification::value(ty),
            children: Vec::new(),
        }
    }

    pub fn ret(&self) -> &TypeExpr {
        &self.spec.ret
    }

    /// Total node count of the subtree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }
}

/// A complete reified program.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgramDag {
    pub root: Arc<DagNode>,
}

impl ProgramDag {
    pub fn new(root: Arc<DagNode>) -> Self {
        ProgramDag { root }
    }

    pub fn ret(&self) -> &TypeExpr {
        self.root.ret()
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    /// Indented tree text: one `name : type` line per node, children indented
    /// two spaces below their parent.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        dump_node(&self.root, 0, &mut out);
        out
    }
}

fn dump_node(node: &DagNode, depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    // Callables print capitalized (`Take`, `Min`) as in DAG diagrams; emitted
    // source keeps the registered lowercase names.
    let name = node.expr.display_name();
    match node.expr {
        Expression::Function(_)
        | Expression::Method(_)
        | Expression::Constructor(_)
        | Expression::HigherOrder(_) => {
            let mut cs = name.chars();
            if let Some(first) = cs.next() {
                out.extend(first.to_uppercase());
                out.push_str(cs.as_str());
            }
        }
        _ => out.push_str(&name),
    }
    out.push_str(" : ");
    out.push_str(&node.spec.ret.to_string());
    out.push('\n');
    for c in &node.children {
        dump_node(c, depth + 1, out);
    }
}

// ---- Validation ------------------------------------------------------------

/// Why a DAG failed validation; the diagnostic names the offending node.
#[derive(Debug, Error, PartialEq)]
pub enum Violation {
    #[error("leaf `{at}` must not have children")]
    LeafWithChildren { at: String },
    #[error("`{at}` expects {expected} argument(s), has {got}")]
    ArityMismatch { at: String, expected: usize, got: usize },
    #[error("`{at}` argument `{arg}` expects {expected}, child returns {got}")]
    ChildTypeMismatch {
        at: String,
        arg: String,
        // Boxed to keep the error small; this is the cold path.
        expected: Box<TypeExpr>,
        got: Box<TypeExpr>,
    },
    #[error("local input _{depth} used under only {nesting} lambda level(s)")]
    LocalOutOfScope { depth: usize, nesting: usize },
    #[error("higher-order node `{at}`: {reason}")]
    BadHigherOrder { at: String, reason: String },
    #[error("constant `{at}` does not inhabit its declared type")]
    ConstantMismatch { at: String },
}

/// Checks arity, child/argument subtyping, local-input scoping, and
/// higher-order shape for every node.
pub fn validate(dag: &ProgramDag, h: &TypeHierarchy) -> Result<(), Violation> {
    validate_node(&dag.root, h, 0)
}

fn validate_node(node: &DagNode, h: &TypeHierarchy, lambda_depth: usize) -> Result<(), Violation> {
    let at = node.expr.display_name();
    match &node.expr {
        Expression::Constant { value, ty } => {
            check_leaf(node, &at)?;
            if !value.conforms(ty, h) {
                return Err(Violation::ConstantMismatch { at });
            }
            Ok(())
        }
        Expression::Input { .. } => check_leaf(node, &at),
        Expression::LocalInput { depth } => {
            check_leaf(node, &at)?;
            if *depth >= lambda_depth {
                return Err(Violation::LocalOutOfScope {
                    depth: *depth,
                    nesting: lambda_depth,
                });
            }
            Ok(())
        }
        Expression::Function(d) | Expression::Method(d) | Expression::Constructor(d) => {
            let _ = d;
            let args = &node.spec.args;
            if node.children.len() != args.len() {
                return Err(Violation::ArityMismatch {
                    at,
                    expected: args.len(),
                    got: node.children.len(),
                });
            }
            for (child, param) in node.children.iter().zip(args) {
                if !h.subtypes(child.ret(), &param.ty) {
                    return Err(Violation::ChildTypeMismatch {
                        at,
                        arg: param.name.clone(),
                        expected: Box::new(param.ty.clone()),
                        got: Box::new(child.ret().clone()),
                    });
                }
            }
            for child in &node.children {
                validate_node(child, h, lambda_depth)?;
            }
            Ok(())
        }
        Expression::HigherOrder(kind) => {
            if node.children.len() != 2 {
                return Err(Violation::ArityMismatch {
                    at,
                    expected: 2,
                    got: node.children.len(),
                });
            }
            let coll = &node.children[0];
            let body = &node.children[1];
            let elem = match h.decompose(coll.ret()) {
                Some((_, params)) if !params.is_empty() => params[0].clone(),
                _ => {
                    return Err(Violation::BadHigherOrder {
                        at,
                        reason: format!("collection type {} does not decompose", coll.ret()),
                    })
                }
            };
            let _ = elem;
            match kind {
                HofKind::Map => {
                    let implied = TypeExpr::list_of(body.ret().clone());
                    if !h.subtypes(&implied, &node.spec.ret) {
                        return Err(Violation::BadHigherOrder {
                            at,
                            reason: format!(
                                "body maps to {implied} but node claims {}",
                                node.spec.ret
                            ),
                        });
                    }
                }
                HofKind::Filter => {
                    if !h.subtypes(body.ret(), &TypeExpr::nominal("Bool")) {
                        return Err(Violation::BadHigherOrder {
                            at,
                            reason: format!("filter body returns {}", body.ret()),
                        });
                    }
                    if !h.subtypes(coll.ret(), &node.spec.ret) {
                        return Err(Violation::BadHigherOrder {
                            at,
                            reason: format!(
                                "filter keeps {} but node claims {}",
                                coll.ret(),
                                node.spec.ret
                            ),
                        });
                    }
                }
            }
            validate_node(coll, h, lambda_depth)?;
            validate_node(body, h, lambda_depth + 1)
        }
    }
}

fn check_leaf(node: &DagNode, at: &str) -> Result<(), Violation> {
    if node.children.is_empty() && node.spec.args.is_empty() {
        Ok(())
    } else {
        Err(Violation::LeafWithChildren { at: at.to_string() })
    }
}

// ---- Evaluation ------------------------------------------------------------

/// Node-visit budget per evaluation; each node visit (including repeated body
/// visits inside higher-order nodes) costs one.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("`{expr}` raised: {msg}")]
    Host { expr: String, msg: String },
    #[error("input `{0}` was not supplied")]
    MissingInput(String),
    #[error("local input _{0} out of scope at runtime")]
    LocalOutOfScope(usize),
    #[error("node budget exhausted")]
    ResourceLimit,
    #[error("internal evaluation invariant broken: {0}")]
    Internal(String),
}

/// Result of a successful evaluation: the root value plus everything the
/// print tap appended.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: Value,
    pub printed: String,
}

/// Evaluates with the default node budget.
pub fn evaluate(dag: &ProgramDag, inputs: &[(String, Value)]) -> Result<Evaluation, EvalError> {
    evaluate_with_budget(dag, inputs, DEFAULT_NODE_BUDGET)
}

pub fn evaluate_with_budget(
    dag: &ProgramDag,
    inputs: &[(String, Value)],
    budget: u64,
) -> Result<Evaluation, EvalError> {
    let mut ctx = EvalCtx {
        inputs,
        locals: Vec::new(),
        io: EvalIo::default(),
        remaining: budget,
    };
    let value = eval_node(&dag.root, &mut ctx)?;
    Ok(Evaluation {
        value,
        printed: ctx.io.printed,
    })
}

struct EvalCtx<'a> {
    inputs: &'a [(String, Value)],
    locals: Vec<Value>,
    io: EvalIo,
    remaining: u64,
}

fn eval_node(node: &DagNode, ctx: &mut EvalCtx<'_>) -> Result<Value, EvalError> {
    if ctx.remaining == 0 {
        return Err(EvalError::ResourceLimit);
    }
    ctx.remaining -= 1;
    match &node.expr {
        Expression::Constant { value, .. } => Ok(value.clone()),
        Expression::Input { name, .. } => ctx
            .inputs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| EvalError::MissingInput(name.clone())),
        Expression::LocalInput { depth } => ctx
            .locals
            .get(*depth)
            .cloned()
            .ok_or(EvalError::LocalOutOfScope(*depth)),
        Expression::Function(d) | Expression::Method(d) | Expression::Constructor(d) => {
            let mut args = Vec::with_capacity(node.children.len());
            for c in &node.children {
                args.push(eval_node(c, ctx)?);
            }
            (d.run)(&mut ctx.io, &args).map_err(|e| EvalError::Host {
                expr: node.expr.display_name(),
                msg: e.0,
            })
        }
        Expression::HigherOrder(kind) => {
            let coll = eval_node(&node.children[0], ctx)?;
            let Value::List(items) = coll else {
                return Err(EvalError::Internal(format!(
                    "higher-order node over non-list {}",
                    coll.base_type_name()
                )));
            };
            let body = &node.children[1];
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                ctx.locals.push(item.clone());
                let r = eval_node(body, ctx);
                ctx.locals.pop();
                let v = r?;
                match kind {
                    HofKind::Map => out.push(v),
                    HofKind::Filter => match v {
                        Value::Bool(true) => out.push(item),
                        Value::Bool(false) => {}
                        other => {
                            return Err(EvalError::Internal(format!(
                                "filter body produced {}",
                                other.base_type_name()
                            )))
                        }
                    },
                }
            }
            Ok(Value::List(out))
        }
    }
}

// ---- Tests -----------------------------------------------------------------
