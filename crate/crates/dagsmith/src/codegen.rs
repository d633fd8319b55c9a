//! Source emission and the round-trip parser.
//!
//! Solved programs are written as a single function definition in a small
//! scripting-style surface syntax: `def name(params):` followed by one
//! indented `return` of a pure expression. Higher-order nodes render as
//! `map(lambda _0: body, coll)`; methods render as `recv.name(args)`.
//! [`parse_and_check`] reads that syntax back, resolves names against a
//! registry, re-types every call (including overload selection), and returns
//! a validating DAG — so emitted text is a faithful, executable artifact, not
//! just pretty printing.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::dag::{validate, DagNode, ProgramDag};
use crate::expr::{CallableDef, Expression, HofKind, Registry};
use crate::reify::apply_rules;
use crate::types::{Param, Specification, TypeExpr, TypeHierarchy};
use crate::value::{unquote_body, Value};

// ---- Emission --------------------------------------------------------------

/// A rendered function definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub name: String,
    pub params: Vec<String>,
    /// The expression text after `return`.
    pub body: String,
}

impl SourceUnit {
    /// The complete definition, indented four spaces, trailing newline.
    pub fn text(&self) -> String {
        format!(
            "def {}({}):\n    return {}\n",
            self.name,
            self.params.join(", "),
            self.body
        )
    }
}

impl fmt::Display for SourceUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text())
    }
}

/// Renders a DAG as a function definition over the given parameter names.
pub fn emit(dag: &ProgramDag, fn_name: &str, params: &[String]) -> SourceUnit {
    SourceUnit {
        name: fn_name.to_string(),
        params: params.to_vec(),
        body: render(&dag.root, 0),
    }
}

fn render(node: &DagNode, lambda_depth: usize) -> String {
    match &node.expr {
        Expression::Constant { value, .. } => value.literal_form(),
        Expression::Input { name, .. } => name.clone(),
        Expression::LocalInput { depth } => format!("_{depth}"),
        Expression::Function(d) | Expression::Constructor(d) => {
            let args: Vec<String> = node
                .children
                .iter()
                .map(|c| render(c, lambda_depth))
                .collect();
            format!("{}({})", d.name, args.join(", "))
        }
        Expression::Method(d) => {
            let recv = render(&node.children[0], lambda_depth);
            let args: Vec<String> = node.children[1..]
                .iter()
                .map(|c| render(c, lambda_depth))
                .collect();
            format!("{recv}.{}({})", d.name, args.join(", "))
        }
        Expression::HigherOrder(kind) => {
            let coll = render(&node.children[0], lambda_depth);
            let body = render(&node.children[1], lambda_depth + 1);
            format!("{}(lambda _{lambda_depth}: {body}, {coll})", kind.key())
        }
    }
}

// ---- Parsing ---------------------------------------------------------------

#[derive(Debug, Error, PartialEq)]
pub enum SourceError {
    #[error("lex error at byte {at}: {msg}")]
    Lex { at: usize, msg: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("parameter `{0}` is not an input of this problem")]
    UnknownParam(String),
    #[error("lambda parameter `{got}` should be `_{depth}` at this nesting")]
    BadLambdaParam { got: String, depth: usize },
    #[error("lambda outside map/filter")]
    MisplacedLambda,
    #[error("`{name}` has no overload accepting ({args})")]
    NoMatchingOverload { name: String, args: String },
    #[error("{kind} over non-collection type {ty}")]
    BadCollection { kind: String, ty: String },
    #[error("filter body returns {0}, not Bool")]
    FilterBodyNotBool(String),
    #[error("function returns {got}, target needs {expected}")]
    ReturnTypeMismatch { expected: String, got: String },
    #[error("emitted program failed validation: {0}")]
    Invalid(String),
}

/// A successfully parsed and re-typed source unit.
#[derive(Debug, Clone)]
pub struct ParsedSource {
    pub name: String,
    pub params: Vec<String>,
    pub dag: ProgramDag,
}

/// Parses a function definition, types it against the registry and the given
/// input/target types, and returns a validating DAG. Overloads resolve by
/// display name, arity, and argument types in registration order.
pub fn parse_and_check(
    text: &str,
    reg: &Registry,
    inputs: &[(String, TypeExpr)],
    target: &TypeExpr,
) -> Result<ParsedSource, SourceError> {
    let tokens = lex(text)?;
    let mut p = TokParser { toks: &tokens, pos: 0 };
    p.expect_kw("def")?;
    let name = p.expect_ident()?;
    p.expect_punct('(')?;
    let mut params = Vec::new();
    if !p.peek_punct(')') {
        loop {
            params.push(p.expect_ident()?);
            if p.peek_punct(',') {
                p.pos += 1;
            } else {
                break;
            }
        }
    }
    p.expect_punct(')')?;
    p.expect_punct(':')?;
    p.expect_kw("return")?;
    let ast = p.parse_expr()?;
    if p.pos != p.toks.len() {
        return Err(SourceError::Parse("trailing tokens after expression".into()));
    }
    for param in &params {
        if !inputs.iter().any(|(n, _)| n == param) {
            return Err(SourceError::UnknownParam(param.clone()));
        }
    }
    let h = reg.hierarchy();
    let mut ctx = TypeCtx {
        reg,
        inputs,
        locals: Vec::new(),
    };
    let root = build(&ast, &mut ctx)?;
    if !h.subtypes(root.ret(), target) {
        return Err(SourceError::ReturnTypeMismatch {
            expected: target.to_string(),
            got: root.ret().to_string(),
        });
    }
    let dag = ProgramDag::new(root);
    validate(&dag, h).map_err(|v| SourceError::Invalid(v.to_string()))?;
    Ok(ParsedSource { name, params, dag })
}

// Untyped surface expression.
#[derive(Debug, Clone)]
enum Ast {
    Ident(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    Call { name: String, args: Vec<Ast> },
    MethodCall { recv: Box<Ast>, name: String, args: Vec<Ast> },
    Lambda { param: String, body: Box<Ast> },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    Punct(char),
}

fn lex(text: &str) -> Result<Vec<Tok>, SourceError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            toks.push(Tok::Ident(text[start..i].to_string()));
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            i += 1;
            let mut is_float = false;
            while i < bytes.len() {
                match bytes[i] {
                    b'0'..=b'9' => i += 1,
                    b'.' if bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => {
                        is_float = true;
                        i += 1;
                    }
                    b'e' | b'E' => {
                        is_float = true;
                        i += 1;
                        if matches!(bytes.get(i), Some(b'+') | Some(b'-')) {
                            i += 1;
                        }
                    }
                    _ => break,
                }
            }
            let s = &text[start..i];
            let tok = if is_float {
                Tok::Float(s.parse().map_err(|_| SourceError::Lex {
                    at: start,
                    msg: format!("bad float `{s}`"),
                })?)
            } else {
                Tok::Int(s.parse().map_err(|_| SourceError::Lex {
                    at: start,
                    msg: format!("bad integer `{s}`"),
                })?)
            };
            toks.push(tok);
            continue;
        }
        if c == '"' {
            let start = i;
            i += 1;
            let body_start = i;
            while i < bytes.len() {
                match bytes[i] {
                    b'"' => break,
                    b'\\' => i += 2,
                    _ => i += 1,
                }
            }
            if i >= bytes.len() {
                return Err(SourceError::Lex {
                    at: start,
                    msg: "unterminated string".into(),
                });
            }
            let body = &text[body_start..i];
            i += 1; // closing quote
            let s = unquote_body(body).ok_or(SourceError::Lex {
                at: start,
                msg: "bad escape in string".into(),
            })?;
            toks.push(Tok::Str(s));
            continue;
        }
        if matches!(c, '(' | ')' | ',' | ':' | '.') {
            toks.push(Tok::Punct(c));
            i += 1;
            continue;
        }
        return Err(SourceError::Lex {
            at: i,
            msg: format!("unexpected character `{c}`"),
        });
    }
    Ok(toks)
}

struct TokParser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl<'a> TokParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Tok::Punct(p)) if *p == c)
    }

    fn expect_punct(&mut self, c: char) -> Result<(), SourceError> {
        if self.peek_punct(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(SourceError::Parse(format!("expected `{c}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<String, SourceError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            other => Err(SourceError::Parse(format!("expected name, got {other:?}"))),
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SourceError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            other => Err(SourceError::Parse(format!("expected `{kw}`, got {other:?}"))),
        }
    }

    fn parse_expr(&mut self) -> Result<Ast, SourceError> {
        let mut node = self.parse_atom()?;
        // Method-call chain.
        while self.peek_punct('.') {
            self.pos += 1;
            let name = self.expect_ident()?;
            self.expect_punct('(')?;
            let args = self.parse_args()?;
            node = Ast::MethodCall {
                recv: Box::new(node),
                name,
                args,
            };
        }
        Ok(node)
    }

    fn parse_atom(&mut self) -> Result<Ast, SourceError> {
        match self.peek().cloned() {
            Some(Tok::Int(i)) => {
                self.pos += 1;
                Ok(Ast::Int(i))
            }
            Some(Tok::Float(f)) => {
                self.pos += 1;
                Ok(Ast::Float(f))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Ast::Str(s))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "True" => return Ok(Ast::Bool(true)),
                    "False" => return Ok(Ast::Bool(false)),
                    "lambda" => {
                        let param = self.expect_ident()?;
                        self.expect_punct(':')?;
                        let body = self.parse_expr()?;
                        return Ok(Ast::Lambda {
                            param,
                            body: Box::new(body),
                        });
                    }
                    _ => {}
                }
                if self.peek_punct('(') {
                    self.pos += 1;
                    let args = self.parse_args()?;
                    Ok(Ast::Call { name, args })
                } else {
                    Ok(Ast::Ident(name))
                }
            }
            other => Err(SourceError::Parse(format!("expected expression, got {other:?}"))),
        }
    }

    fn parse_args(&mut self) -> Result<Vec<Ast>, SourceError> {
        let mut args = Vec::new();
        if !self.peek_punct(')') {
            loop {
                args.push(self.parse_expr()?);
                if self.peek_punct(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect_punct(')')?;
        Ok(args)
    }
}

// ---- Typing ----------------------------------------------------------------

struct TypeCtx<'a> {
    reg: &'a Registry,
    inputs: &'a [(String, TypeExpr)],
    /// Element types of enclosing lambdas, outermost first.
    locals: Vec<TypeExpr>,
}

fn build(ast: &Ast, ctx: &mut TypeCtx<'_>) -> Result<Arc<DagNode>, SourceError> {
    match ast {
        Ast::Int(i) => Ok(const_leaf(Value::Int(*i))),
        Ast::Float(f) => Ok(const_leaf(Value::Float(*f))),
        Ast::Bool(b) => Ok(const_leaf(Value::Bool(*b))),
        Ast::Str(s) => Ok(const_leaf(Value::Str(s.clone()))),
        Ast::Ident(name) => {
            if let Some(depth) = local_index(name) {
                let ty = ctx
                    .locals
                    .get(depth)
                    .cloned()
                    .ok_or_else(|| SourceError::UnknownName(name.clone()))?;
                return Ok(Arc::new(DagNode::leaf(
                    Expression::LocalInput { depth },
                    ty,
                )));
            }
            let (n, ty) = ctx
                .inputs
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| SourceError::UnknownName(name.clone()))?;
            Ok(Arc::new(DagNode::leaf(
                Expression::input(n, ty.clone()),
                ty.clone(),
            )))
        }
        Ast::Lambda { .. } => Err(SourceError::MisplacedLambda),
        Ast::Call { name, args } => build_call(name, args, ctx),
        Ast::MethodCall { recv, name, args } => {
            let mut children = vec![build(recv, ctx)?];
            for a in args {
                children.push(build(a, ctx)?);
            }
            apply_overloads(name, children, ctx, true)
        }
    }
}

fn build_call(
    name: &str,
    args: &[Ast],
    ctx: &mut TypeCtx<'_>,
) -> Result<Arc<DagNode>, SourceError> {
    // map/filter take a lambda and a collection, in that order.
    if let Some(kind) = match name {
        "map" => Some(HofKind::Map),
        "filter" => Some(HofKind::Filter),
        _ => None,
    } {
        let [Ast::Lambda { param, body }, coll_ast] = args else {
            return Err(SourceError::Parse(format!(
                "{name} expects (lambda, collection)"
            )));
        };
        let coll = build(coll_ast, ctx)?;
        let h = ctx.reg.hierarchy();
        let elem = match h.decompose(coll.ret()) {
            Some((_, params)) if !params.is_empty() => params[0].clone(),
            _ => {
                return Err(SourceError::BadCollection {
                    kind: name.to_string(),
                    ty: coll.ret().to_string(),
                })
            }
        };
        let depth = ctx.locals.len();
        if local_index(param) != Some(depth) {
            return Err(SourceError::BadLambdaParam {
                got: param.clone(),
                depth,
            });
        }
        ctx.locals.push(elem);
        let body_dag = build(body, ctx);
        ctx.locals.pop();
        let body_dag = body_dag?;
        let ret = match kind {
            HofKind::Map => TypeExpr::list_of(body_dag.ret().clone()),
            HofKind::Filter => {
                if !h.subtypes(body_dag.ret(), &TypeExpr::nominal("Bool")) {
                    return Err(SourceError::FilterBodyNotBool(body_dag.ret().to_string()));
                }
                coll.ret().clone()
            }
        };
        let spec = Specification::new(
            vec![
                Param::new("coll", coll.ret().clone()),
                Param::new("body", body_dag.ret().clone()),
            ],
            ret,
        );
        return Ok(Arc::new(DagNode {
            expr: Expression::HigherOrder(kind),
            spec,
            children: vec![coll, body_dag],
        }));
    }
    let mut children = Vec::with_capacity(args.len());
    for a in args {
        children.push(build(a, ctx)?);
    }
    apply_overloads(name, children, ctx, false)
}

/// Picks the first overload (registration order) whose specification accepts
/// the children in order, replaying the reification rules exactly as the
/// compiler does.
fn apply_overloads(
    name: &str,
    children: Vec<Arc<DagNode>>,
    ctx: &TypeCtx<'_>,
    method: bool,
) -> Result<Arc<DagNode>, SourceError> {
    let h = ctx.reg.hierarchy();
    let mut saw_name = false;
    for e in ctx.reg.overloads(name) {
        if matches!(e, Expression::Method(_)) != method {
            continue;
        }
        let Some(def) = e.callable() else { continue };
        saw_name = true;
        if def.spec.args.len() != children.len() {
            continue;
        }
        if let Some(spec) = reify_children(def, &children, h) {
            return Ok(Arc::new(DagNode {
                expr: e.clone(),
                spec,
                children,
            }));
        }
    }
    if saw_name {
        let args: Vec<String> = children.iter().map(|c| c.ret().to_string()).collect();
        Err(SourceError::NoMatchingOverload {
            name: name.to_string(),
            args: args.join(", "),
        })
    } else {
        Err(SourceError::UnknownName(name.to_string()))
    }
}

/// Binds `children` to `def`'s arguments in order, applying reification rules
/// incrementally; `None` if any child fails its (reified) expected type.
fn reify_children(
    def: &CallableDef,
    children: &[Arc<DagNode>],
    h: &TypeHierarchy,
) -> Option<Specification> {
    let mut spec = def.spec.clone();
    let mut bound: HashMap<String, TypeExpr> = HashMap::new();
    for (i, child) in children.iter().enumerate() {
        if !h.subtypes(child.ret(), &spec.args[i].ty) {
            return None;
        }
        bound.insert(spec.args[i].name.clone(), child.ret().clone());
        apply_rules(&def.rules, &mut spec, &bound, h).ok()?;
    }
    Some(spec)
}

fn const_leaf(v: Value) -> Arc<DagNode> {
    let ty = v.most_specific_type();
    Arc::new(DagNode::leaf(Expression::Constant { value: v, ty: ty.clone() }, ty))
}

fn local_index(name: &str) -> Option<usize> {
    name.strip_prefix('_')?.parse().ok()
}

// ---- Tests -----------------------------------------------------------------
