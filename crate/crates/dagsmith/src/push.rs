//! Linear genomes, their nested program form, and the type-directed compiler.
//!
//! A genome is a flat list of genes: expression templates plus OPEN/CLOSE
//! markers. Translation balances the markers into a nested program. The
//! compiler then walks that program with three stacks — pending items, built
//! DAG fragments, and anonymous blocks — binding arguments by type and
//! silently discarding whatever cannot be satisfied, so *every* genome
//! compiles or fails cleanly, never crashes.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::dag::{DagNode, ProgramDag};
use crate::expr::{Expression, HofKind, Registry};
use crate::reify::apply_rules;
use crate::types::{parse_type_in, Param, Specification, TypeExpr};
use crate::value::{unquote_body, Value};

// ---- Genomes ---------------------------------------------------------------

/// One element of a linear genome.
#[derive(Clone, Debug, PartialEq)]
pub enum Gene {
    Open,
    Close,
    Expr(Expression),
}

/// A linear genome: the unit of variation and inheritance.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PlushyGenome(pub Vec<Gene>);

impl PlushyGenome {
    pub fn new(genes: Vec<Gene>) -> Self {
        PlushyGenome(genes)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One element of a nested program: a bare expression or a bracketed block.
#[derive(Clone, Debug, PartialEq)]
pub enum PushItem {
    Expr(Expression),
    Block(PushProgram),
}

/// A nested program produced by genome translation.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PushProgram(pub Vec<PushItem>);

impl PushProgram {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Balances OPEN/CLOSE markers into nested blocks. A stray CLOSE at the top
/// level is ignored; blocks still open when the genome ends are closed
/// implicitly.
pub fn plushy_to_push(genome: &PlushyGenome) -> PushProgram {
    let mut stack: Vec<Vec<PushItem>> = vec![Vec::new()];
    for gene in &genome.0 {
        match gene {
            Gene::Open => stack.push(Vec::new()),
            Gene::Close => {
                if stack.len() > 1 {
                    let items = stack.pop().expect("depth checked");
                    stack
                        .last_mut()
                        .expect("root level always present")
                        .push(PushItem::Block(PushProgram(items)));
                }
            }
            Gene::Expr(e) => stack
                .last_mut()
                .expect("root level always present")
                .push(PushItem::Expr(e.clone())),
        }
    }
    while stack.len() > 1 {
        let items = stack.pop().expect("depth checked");
        stack
            .last_mut()
            .expect("root level always present")
            .push(PushItem::Block(PushProgram(items)));
    }
    PushProgram(stack.pop().expect("root level always present"))
}

// ---- Genome text form ------------------------------------------------------

/// One line per gene: `OPEN`, `CLOSE`, `local:<depth>`, `input:<name>`,
/// `const:<Type>:<literal>`, or a registry key.
pub fn format_genome(genome: &PlushyGenome) -> String {
    let mut out = String::new();
    for gene in &genome.0 {
        out.push_str(&format_gene(gene));
        out.push('\n');
    }
    out
}

fn format_gene(gene: &Gene) -> String {
    match gene {
        Gene::Open => "OPEN".to_string(),
        Gene::Close => "CLOSE".to_string(),
        Gene::Expr(Expression::LocalInput { depth }) => format!("local:{depth}"),
        Gene::Expr(Expression::Input { name, .. }) => format!("input:{name}"),
        Gene::Expr(Expression::Constant { value, ty }) => {
            format!("const:{ty}:{}", value.literal_form())
        }
        Gene::Expr(e) => e
            .registry_key()
            .expect("callable genes carry registry keys")
            .to_string(),
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenomeParseError {
    #[error("line {line}: unknown expression `{token}`")]
    UnknownExpression { line: usize, token: String },
    #[error("line {line}: `{token}` is ambiguous; use a registry key")]
    AmbiguousExpression { line: usize, token: String },
    #[error("line {line}: unknown input `{name}`")]
    UnknownInput { line: usize, name: String },
    #[error("line {line}: bad local marker")]
    BadLocal { line: usize },
    #[error("line {line}: bad constant: {reason}")]
    BadConst { line: usize, reason: String },
}

/// Parses the genome text form. Expression tokens resolve by exact registry
/// key first, then by unique case-insensitive display name. Blank lines are
/// skipped.
pub fn parse_genome(text: &str, reg: &Registry) -> Result<PlushyGenome, GenomeParseError> {
    let mut genes = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let tok = raw.trim();
        if tok.is_empty() {
            continue;
        }
        genes.push(parse_gene(tok, line, reg)?);
    }
    Ok(PlushyGenome(genes))
}

fn parse_gene(tok: &str, line: usize, reg: &Registry) -> Result<Gene, GenomeParseError> {
    match tok {
        "OPEN" => return Ok(Gene::Open),
        "CLOSE" => return Ok(Gene::Close),
        _ => {}
    }
    if let Some(rest) = tok.strip_prefix("local:") {
        let depth: usize = rest
            .trim()
            .parse()
            .map_err(|_| GenomeParseError::BadLocal { line })?;
        return Ok(Gene::Expr(Expression::LocalInput { depth }));
    }
    if let Some(rest) = tok.strip_prefix("input:") {
        let name = rest.trim();
        return reg
            .input_named(name)
            .cloned()
            .map(Gene::Expr)
            .ok_or_else(|| GenomeParseError::UnknownInput {
                line,
                name: name.to_string(),
            });
    }
    if let Some(rest) = tok.strip_prefix("const:") {
        return parse_const(rest, line, reg).map(Gene::Expr);
    }
    // Registry token: exact key, else unique display name.
    if let Some(e) = reg.by_key(tok) {
        return Ok(Gene::Expr(e.clone()));
    }
    let lower = tok.to_lowercase();
    let matches: Vec<&Expression> = reg
        .expressions()
        .iter()
        .filter(|e| e.display_name().to_lowercase() == lower)
        .collect();
    match matches.len() {
        1 => Ok(Gene::Expr(matches[0].clone())),
        0 => Err(GenomeParseError::UnknownExpression {
            line,
            token: tok.to_string(),
        }),
        _ => Err(GenomeParseError::AmbiguousExpression {
            line,
            token: tok.to_string(),
        }),
    }
}

fn parse_const(rest: &str, line: usize, reg: &Registry) -> Result<Expression, GenomeParseError> {
    let bad = |reason: &str| GenomeParseError::BadConst {
        line,
        reason: reason.to_string(),
    };
    let (ty_text, lit) = rest.split_once(':').ok_or_else(|| bad("missing `:`"))?;
    let ty = parse_type_in(ty_text, reg.hierarchy()).map_err(|e| bad(&e.to_string()))?;
    let value = match &ty {
        TypeExpr::Nominal(n) => match n.as_str() {
            "Int" => lit
                .parse::<i64>()
                .map(Value::Int)
                .map_err(|_| bad("bad Int literal"))?,
            "Float" => lit
                .parse::<f64>()
                .map(Value::Float)
                .map_err(|_| bad("bad Float literal"))?,
            "Bool" => match lit {
                "True" => Value::Bool(true),
                "False" => Value::Bool(false),
                _ => return Err(bad("Bool literal must be True or False")),
            },
            "Str" => {
                let body = lit
                    .strip_prefix('"')
                    .and_then(|s| s.strip_suffix('"'))
                    .ok_or_else(|| bad("Str literal must be double-quoted"))?;
                Value::Str(unquote_body(body).ok_or_else(|| bad("bad escape in Str literal"))?)
            }
            other => return Err(bad(&format!("unsupported constant type `{other}`"))),
        },
        other => return Err(bad(&format!("unsupported constant type `{other}`"))),
    };
    Ok(Expression::Constant { value, ty })
}

// ---- Compiler --------------------------------------------------------------

/// Compilation produced no DAG whose return type fits the target.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("no DAG matching the target type was produced")]
pub struct CompileFailure;

/// The three compiler stacks. Tops are the vector ends.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CompilerState {
    /// Items still to process.
    pub exec: Vec<PushItem>,
    /// Built DAG fragments.
    pub dags: Vec<Arc<DagNode>>,
    /// Blocks waiting to become lambda bodies.
    pub anon: Vec<PushProgram>,
}

impl fmt::Display for CompilerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "exec: {} item(s)", self.exec.len())?;
        for d in self.dags.iter().rev() {
            writeln!(f, "dag:  {} : {}", d.expr.display_name(), d.spec.ret)?;
        }
        writeln!(f, "anon: {} block(s)", self.anon.len())
    }
}

/// A single compilation in progress. Driving it step by step exposes the
/// stacks for inspection; [`compile`] wraps the whole loop.
pub struct Compiler<'a> {
    reg: &'a Registry,
    target: TypeExpr,
    /// Element types of enclosing lambdas, outermost first.
    locals: Vec<TypeExpr>,
    pub state: CompilerState,
}

impl<'a> Compiler<'a> {
    pub fn new(reg: &'a Registry, target: TypeExpr, locals: Vec<TypeExpr>) -> Self {
        Compiler {
            reg,
            target,
            locals,
            state: CompilerState::default(),
        }
    }

    /// Loads a program so its first item is processed first.
    pub fn load(&mut self, program: &PushProgram) {
        for item in program.0.iter().rev() {
            self.state.exec.push(item.clone());
        }
    }

    /// Processes one item from the exec stack. Returns false when idle.
    pub fn step(&mut self) -> bool {
        let Some(item) = self.state.exec.pop() else {
            return false;
        };
        match item {
            PushItem::Block(p) => self.state.anon.push(p),
            PushItem::Expr(e) => self.dispatch(&e),
        }
        true
    }

    pub fn run(&mut self) {
        while self.step() {}
    }

    fn dispatch(&mut self, e: &Expression) {
        match e {
            Expression::Constant { ty, .. } => {
                let node = DagNode::leaf(e.clone(), ty.clone());
                self.state.dags.push(Arc::new(node));
            }
            Expression::Input { ty, .. } => {
                let node = DagNode::leaf(e.clone(), ty.clone());
                self.state.dags.push(Arc::new(node));
            }
            Expression::LocalInput { depth } => {
                // Only meaningful under a lambda; elsewhere it has no effect.
                if let Some(ty) = self.locals.get(*depth) {
                    let node = DagNode::leaf(e.clone(), ty.clone());
                    self.state.dags.push(Arc::new(node));
                }
            }
            Expression::Function(_) | Expression::Method(_) | Expression::Constructor(_) => {
                self.bind_arguments(e);
            }
            Expression::HigherOrder(kind) => {
                self.compile_hof(*kind);
            }
        }
    }

    /// Binds each argument in declaration order to the topmost DAG whose
    /// return type fits its (progressively reified) expected type. On any
    /// unsatisfiable argument the expression is discarded and the stacks
    /// revert exactly. Returns whether a node was pushed.
    pub fn bind_arguments(&mut self, e: &Expression) -> bool {
        let def = e.callable().expect("bind_arguments takes callables");
        let h = self.reg.hierarchy();
        let snapshot = self.state.dags.clone();
        let mut spec = def.spec.clone();
        let mut bound: HashMap<String, TypeExpr> = HashMap::new();
        let mut children: Vec<Arc<DagNode>> = Vec::with_capacity(spec.args.len());
        for i in 0..spec.args.len() {
            let expected = spec.args[i].ty.clone();
            let found = self
                .state
                .dags
                .iter()
                .rposition(|d| h.subtypes(&d.spec.ret, &expected));
            let Some(pos) = found else {
                self.state.dags = snapshot;
                return false;
            };
            let node = self.state.dags.remove(pos);
            bound.insert(spec.args[i].name.clone(), node.spec.ret.clone());
            children.push(node);
            if apply_rules(&def.rules, &mut spec, &bound, h).is_err() {
                self.state.dags = snapshot;
                return false;
            }
        }
        self.state.dags.push(Arc::new(DagNode {
            expr: e.clone(),
            spec,
            children,
        }));
        true
    }

    /// Builds a map/filter node: takes the topmost DAG with a decomposable
    /// collection type, then tries anonymous blocks top-down as the lambda
    /// body (compiled in a fresh nested compilation whose locals gain the
    /// element type). Nothing changes unless a body compiles. Returns whether
    /// a node was pushed.
    pub fn compile_hof(&mut self, kind: HofKind) -> bool {
        let h = self.reg.hierarchy();
        let found = self.state.dags.iter().rposition(|d| {
            h.decompose(&d.spec.ret)
                .is_some_and(|(_, params)| !params.is_empty())
        });
        let Some(cpos) = found else {
            return false;
        };
        let coll_ty = self.state.dags[cpos].spec.ret.clone();
        let elem = h
            .decompose(&coll_ty)
            .expect("position chosen as decomposable")
            .1
            .remove(0);
        let body_target = match kind {
            HofKind::Filter => TypeExpr::nominal("Bool"),
            HofKind::Map => TypeExpr::Top,
        };
        let mut nested_locals = self.locals.clone();
        nested_locals.push(elem);
        for apos in (0..self.state.anon.len()).rev() {
            let mut sub = Compiler::new(self.reg, body_target.clone(), nested_locals.clone());
            sub.load(&self.state.anon[apos]);
            sub.run();
            let Ok(body) = sub.finish() else {
                continue;
            };
            let body = body.root;
            let coll = self.state.dags.remove(cpos);
            self.state.anon.remove(apos);
            let ret = match kind {
                HofKind::Map => TypeExpr::list_of(body.spec.ret.clone()),
                HofKind::Filter => coll_ty,
            };
            let spec = Specification::new(
                vec![
                    Param::new("coll", coll.spec.ret.clone()),
                    Param::new("body", body.spec.ret.clone()),
                ],
                ret,
            );
            self.state.dags.push(Arc::new(DagNode {
                expr: Expression::HigherOrder(kind),
                spec,
                children: vec![coll, body],
            }));
            return true;
        }
        false
    }

    /// Drains the exec stack, then pops DAGs until one fits the target type.
    pub fn finish(mut self) -> Result<ProgramDag, CompileFailure> {
        self.run();
        let h = self.reg.hierarchy();
        while let Some(d) = self.state.dags.pop() {
            if h.subtypes(&d.spec.ret, &self.target) {
                return Ok(ProgramDag::new(d));
            }
        }
        Err(CompileFailure)
    }
}

/// Compiles a nested program against a target type. Inputs and all other
/// templates come from the registry. Total: every program either yields a
/// validating DAG or a [`CompileFailure`].
pub fn compile(
    program: &PushProgram,
    target: &TypeExpr,
    reg: &Registry,
) -> Result<ProgramDag, CompileFailure> {
    let mut c = Compiler::new(reg, target.clone(), Vec::new());
    c.load(program);
    c.finish()
}

// ---- Tests -----------------------------------------------------------------
