//! Expression templates and the registry the compiler draws from.
//!
//! An [`Expression`] is a template: a constant, a problem input, a local
//! (lambda) input, a callable with a host implementation, or one of the two
//! higher-order forms. The [`Registry`] owns every template available to a
//! run together with the type hierarchy they were validated against, and is
//! the source of random genes during evolution.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::push::Gene;
use crate::reify::{ReificationRule, RuleError};
use crate::types::{Specification, TypeError, TypeExpr, TypeHierarchy};
use crate::value::Value;

// ---- Host plumbing ---------------------------------------------------------

/// Failure raised by a host implementation (bad index, overflow, division by
/// zero, ...). Evaluation wraps it into an evaluation error; it never aborts
/// the process.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct HostError(pub String);

impl HostError {
    pub fn new(msg: impl Into<String>) -> Self {
        HostError(msg.into())
    }
}

/// Side channel populated during evaluation: the print tap appends here.
#[derive(Debug, Default, Clone)]
pub struct EvalIo {
    pub printed: String,
}

impl EvalIo {
    pub fn print(&mut self, v: &Value) {
        self.printed.push_str(&v.printed_form());
    }
}

/// A host implementation: pure except for the explicit side channel.
pub type HostFn = fn(&mut EvalIo, &[Value]) -> Result<Value, HostError>;

// ---- Expression ------------------------------------------------------------

/// The two higher-order expression forms.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum HofKind {
    Map,
    Filter,
}

impl HofKind {
    pub fn key(&self) -> &'static str {
        match self {
            HofKind::Map => "map",
            HofKind::Filter => "filter",
        }
    }
}

/// A callable template: registry key, display name, specification,
/// reification rules, and the host implementation.
#[derive(Clone)]
pub struct CallableDef {
    /// Unique registry key; also the genome-line token (`sub_dt_dt`).
    pub key: String,
    /// Name used in emitted source (`sub`); several keys may share one.
    pub name: String,
    pub spec: Specification,
    pub rules: Vec<ReificationRule>,
    pub run: HostFn,
}

impl fmt::Debug for CallableDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CallableDef({} : {})", self.key, self.spec)
    }
}

/// An expression template.
#[derive(Clone)]
pub enum Expression {
    /// A literal with its declared (concrete) type.
    Constant { value: Value, ty: TypeExpr },
    /// A named problem input.
    Input { name: String, ty: TypeExpr },
    /// A lambda parameter; `depth` counts outward from the outermost
    /// enclosing lambda (0 = outermost).
    LocalInput { depth: usize },
    Function(CallableDef),
    Method(CallableDef),
    Constructor(CallableDef),
    HigherOrder(HofKind),
}

impl Expression {
    pub fn constant(value: Value, ty: TypeExpr) -> Self {
        Expression::Constant { value, ty }
    }

    pub fn input(name: &str, ty: TypeExpr) -> Self {
        Expression::Input {
            name: name.to_string(),
            ty,
        }
    }

    /// The callable definition, when this is a function, method, or
    /// constructor.
    pub fn callable(&self) -> Option<&CallableDef> {
        match self {
            Expression::Function(d) | Expression::Method(d) | Expression::Constructor(d) => {
                Some(d)
            }
            _ => None,
        }
    }

    /// Registry key for callables and higher-order forms.
    pub fn registry_key(&self) -> Option<&str> {
        match self {
            Expression::HigherOrder(k) => Some(k.key()),
            other => other.callable().map(|d| d.key.as_str()),
        }
    }

    /// Name as it appears in emitted source.
    pub fn display_name(&self) -> String {
        match self {
            Expression::Constant { value, .. } => value.literal_form(),
            Expression::Input { name, .. } => name.clone(),
            Expression::LocalInput { depth } => format!("_{depth}"),
            Expression::HigherOrder(k) => k.key().to_string(),
            other => other.callable().expect("callable").name.clone(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Expression::Constant { .. } => "constant",
            Expression::Input { .. } => "input",
            Expression::LocalInput { .. } => "local",
            Expression::Function(_) => "function",
            Expression::Method(_) => "method",
            Expression::Constructor(_) => "constructor",
            Expression::HigherOrder(_) => "higher-order",
        }
    }
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                Expression::Constant { value: v1, ty: t1 },
                Expression::Constant { value: v2, ty: t2 },
            ) => v1 == v2 && t1 == t2,
            (
                Expression::Input { name: n1, ty: t1 },
                Expression::Input { name: n2, ty: t2 },
            ) => n1 == n2 && t1 == t2,
            (Expression::LocalInput { depth: d1 }, Expression::LocalInput { depth: d2 }) => {
                d1 == d2
            }
            (Expression::HigherOrder(a), Expression::HigherOrder(b)) => a == b,
            // Callables are registry-unique by key.
            (a, b) => match (a.callable(), b.callable()) {
                (Some(da), Some(db)) => {
                    std::mem::discriminant(a) == std::mem::discriminant(b) && da.key == db.key
                }
                _ => false,
            },
        }
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Constant { value, ty } => write!(f, "Constant({value} : {ty})"),
            Expression::Input { name, ty } => write!(f, "Input({name} : {ty})"),
            Expression::LocalInput { depth } => write!(f, "LocalInput(_{depth})"),
            Expression::HigherOrder(k) => write!(f, "HigherOrder({})", k.key()),
            other => {
                let d = other.callable().expect("callable");
                write!(f, "{}({} : {})", other.kind_name(), d.key, d.spec)
            }
        }
    }
}

// ---- Registry --------------------------------------------------------------

#[derive(Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error("expression key `{0}` registered twice")]
    DuplicateName(String),
    #[error("input `{0}` registered twice")]
    DuplicateInput(String),
    #[error("method `{0}` needs at least a receiver argument")]
    MethodNeedsReceiver(String),
    #[error("constant of type `{0}` must be concrete")]
    VarInConstant(String),
    #[error("constant value does not inhabit declared type `{0}`")]
    ConstantTypeMismatch(String),
    #[error("local-input markers are built directly, not registered")]
    UnregistrableKind,
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Relative weights for drawing random genes. Categories whose pool is empty
/// are skipped regardless of weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneWeights {
    pub expression: f64,
    pub constant: f64,
    pub input: f64,
    pub local: f64,
    pub open: f64,
    pub close: f64,
}

impl Default for GeneWeights {
    fn default() -> Self {
        GeneWeights {
            expression: 10.0,
            constant: 2.0,
            input: 3.0,
            local: 1.5,
            open: 1.0,
            close: 1.0,
        }
    }
}

/// Every expression template available to a run, validated against one type
/// hierarchy.
#[derive(Clone, Debug)]
pub struct Registry {
    hierarchy: TypeHierarchy,
    templates: Vec<Expression>,
    constants: Vec<Expression>,
    inputs: Vec<Expression>,
    keys: HashMap<String, usize>,
}

impl Registry {
    pub fn new(hierarchy: TypeHierarchy) -> Self {
        Registry {
            hierarchy,
            templates: Vec::new(),
            constants: Vec::new(),
            inputs: Vec::new(),
            keys: HashMap::new(),
        }
    }

    pub fn hierarchy(&self) -> &TypeHierarchy {
        &self.hierarchy
    }

    /// Validates and stores a template. Callables and higher-order forms join
    /// the keyed pool; constants and inputs join their own pools.
    pub fn register(&mut self, e: Expression) -> Result<(), RegistryError> {
        match &e {
            Expression::Constant { value, ty } => {
                self.hierarchy.check_declared(ty)?;
                if !ty.is_concrete() {
                    return Err(RegistryError::VarInConstant(ty.to_string()));
                }
                if !value.conforms(ty, &self.hierarchy) {
                    return Err(RegistryError::ConstantTypeMismatch(ty.to_string()));
                }
                self.constants.push(e);
                Ok(())
            }
            Expression::Input { name, ty } => {
                self.hierarchy.check_declared(ty)?;
                if self.inputs.iter().any(|i| i.display_name() == *name) {
                    return Err(RegistryError::DuplicateInput(name.clone()));
                }
                self.inputs.push(e);
                Ok(())
            }
            Expression::LocalInput { .. } => Err(RegistryError::UnregistrableKind),
            Expression::HigherOrder(k) => {
                self.insert_keyed(k.key().to_string(), e.clone())
            }
            Expression::Function(d) | Expression::Method(d) | Expression::Constructor(d) => {
                for p in &d.spec.args {
                    self.hierarchy.check_declared(&p.ty)?;
                }
                self.hierarchy.check_declared(&d.spec.ret)?;
                if matches!(e, Expression::Method(_)) && d.spec.args.is_empty() {
                    return Err(RegistryError::MethodNeedsReceiver(d.key.clone()));
                }
                for rule in &d.rules {
                    rule.check_against(&d.spec)?;
                }
                self.insert_keyed(d.key.clone(), e.clone())
            }
        }
    }

    fn insert_keyed(&mut self, key: String, e: Expression) -> Result<(), RegistryError> {
        if self.keys.contains_key(&key) {
            return Err(RegistryError::DuplicateName(key));
        }
        self.keys.insert(key, self.templates.len());
        self.templates.push(e);
        Ok(())
    }

    /// Exact key match first, then the first case-insensitive display-name
    /// match in registration order (`Take` finds `take`).
    pub fn lookup(&self, name: &str) -> Option<&Expression> {
        if let Some(&i) = self.keys.get(name) {
            return Some(&self.templates[i]);
        }
        let lower = name.to_lowercase();
        self.templates
            .iter()
            .find(|e| e.display_name().to_lowercase() == lower)
    }

    pub fn by_key(&self, key: &str) -> Option<&Expression> {
        self.keys.get(key).map(|&i| &self.templates[i])
    }

    pub fn input_named(&self, name: &str) -> Option<&Expression> {
        self.inputs.iter().find(|i| i.display_name() == name)
    }

    /// Keyed templates (callables and higher-order forms) in registration
    /// order.
    pub fn expressions(&self) -> &[Expression] {
        &self.templates
    }

    pub fn constants(&self) -> &[Expression] {
        &self.constants
    }

    pub fn inputs(&self) -> &[Expression] {
        &self.inputs
    }

    /// Callables with the given display name, in registration order.
    pub fn overloads<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a Expression> {
        let name = name.to_string();
        self.templates
            .iter()
            .filter(move |e| e.display_name() == name)
    }

    /// One line per keyed template: key, specification, rule count.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        for e in &self.templates {
            match e {
                Expression::HigherOrder(k) => {
                    out.push_str(&format!("{} : higher-order\n", k.key()));
                }
                other => {
                    let d = other.callable().expect("keyed templates are callable");
                    out.push_str(&format!("{} : {}\n", d.key, d.spec));
                }
            }
        }
        out
    }

    /// Draws one random gene according to `weights`, skipping empty pools.
    pub fn random_gene<R: Rng>(&self, weights: &GeneWeights, rng: &mut R) -> Gene {
        enum Cat {
            Expression,
            Constant,
            Input,
            Local,
            Open,
            Close,
        }
        let mut cats: Vec<(f64, Cat)> = Vec::with_capacity(6);
        if !self.templates.is_empty() && weights.expression > 0.0 {
            cats.push((weights.expression, Cat::Expression));
        }
        if !self.constants.is_empty() && weights.constant > 0.0 {
            cats.push((weights.constant, Cat::Constant));
        }
        if !self.inputs.is_empty() && weights.input > 0.0 {
            cats.push((weights.input, Cat::Input));
        }
        if weights.local > 0.0 {
            cats.push((weights.local, Cat::Local));
        }
        if weights.open > 0.0 {
            cats.push((weights.open, Cat::Open));
        }
        if weights.close > 0.0 {
            cats.push((weights.close, Cat::Close));
        }
        let total: f64 = cats.iter().map(|(w, _)| w).sum();
        // NaN weights must land here too, or `random_range` below panics.
        if total.is_nan() || total <= 0.0 {
            return Gene::Close;
        }
        let mut x = rng.random_range(0.0..total);
        for (w, cat) in &cats {
            if x < *w {
                return match cat {
                    Cat::Expression => {
                        Gene::Expr(self.templates[rng.random_range(0..self.templates.len())].clone())
                    }
                    Cat::Constant => {
                        Gene::Expr(self.constants[rng.random_range(0..self.constants.len())].clone())
                    }
                    Cat::Input => {
                        Gene::Expr(self.inputs[rng.random_range(0..self.inputs.len())].clone())
                    }
                    // Deeper lambda nesting than two levels is rare enough
                    // that depths 0 and 1 cover it.
                    Cat::Local => Gene::Expr(Expression::LocalInput {
                        depth: if rng.random_bool(0.9) { 0 } else { 1 },
                    }),
                    Cat::Open => Gene::Open,
                    Cat::Close => Gene::Close,
                };
            }
            x -= w;
        }
        Gene::Close
    }
}

// ---- Tests -----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{parse_type_in, Param};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h() -> TypeHierarchy {
        TypeHierarchy::standard()
    }

    fn t(s: &str) -> TypeExpr {
        parse_type_in(s, &h()).unwrap()
    }

    fn host_id(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
        Ok(vs[0].clone())
    }

    fn reg_with(entries: Vec<Expression>) -> Registry {
        let mut r = Registry::new(h());
        for e in entries {
            r.register(e).unwrap();
        }
        r
    }

    fn take_def() -> Expression {
        Expression::Function(CallableDef {
            key: "take".to_string(),
            name: "take".to_string(),
            spec: Specification::new(
                vec![Param::new("L", t("List")), Param::new("N", t("Int"))],
                t("List"),
            ),
            rules: vec![ReificationRule::pass_through("L")],
            run: host_id,
        })
    }

    #[test]
    fn lookup_is_case_insensitive_on_display_names() {
        let r = reg_with(vec![take_def()]);
        let hit = r.lookup("Take").expect("found by capitalized name");
        assert_eq!(hit.registry_key(), Some("take"));
        assert!(r.lookup("take").is_some());
        assert!(r.lookup("missing").is_none());
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let mut r = reg_with(vec![take_def()]);
        assert_eq!(
            r.register(take_def()),
            Err(RegistryError::DuplicateName("take".to_string()))
        );
    }

    #[test]
    fn constants_must_be_concrete_and_conforming() {
        let mut r = Registry::new(h());
        assert!(r
            .register(Expression::constant(Value::Int(3), t("Int")))
            .is_ok());
        assert_eq!(
            r.register(Expression::constant(Value::Int(3), t("Str"))),
            Err(RegistryError::ConstantTypeMismatch("Str".to_string()))
        );
        let var_list = TypeExpr::list_of(TypeExpr::var("T", None));
        assert_eq!(
            r.register(Expression::constant(Value::List(vec![]), var_list)),
            Err(RegistryError::VarInConstant("List[?T]".to_string()))
        );
    }

    #[test]
    fn inputs_may_carry_type_variables() {
        let mut r = Registry::new(h());
        let lst = TypeExpr::list_of(TypeExpr::var("T", Some(t("Union[Int,Float,Str]"))));
        assert!(r.register(Expression::input("lst", lst)).is_ok());
        assert!(r.input_named("lst").is_some());
        assert_eq!(
            r.register(Expression::input("lst", t("Int"))),
            Err(RegistryError::DuplicateInput("lst".to_string()))
        );
    }

    #[test]
    fn methods_need_a_receiver() {
        let mut r = Registry::new(h());
        let bad = Expression::Method(CallableDef {
            key: "Str.broken".to_string(),
            name: "broken".to_string(),
            spec: Specification::value(t("Int")),
            rules: vec![],
            run: host_id,
        });
        assert_eq!(
            r.register(bad),
            Err(RegistryError::MethodNeedsReceiver("Str.broken".to_string()))
        );
    }

    #[test]
    fn rules_are_checked_at_registration() {
        let mut r = Registry::new(h());
        let bad = Expression::Function(CallableDef {
            key: "bad".to_string(),
            name: "bad".to_string(),
            spec: Specification::new(vec![Param::new("a", t("Int"))], t("Int")),
            rules: vec![ReificationRule::pass_through("zz")],
            run: host_id,
        });
        assert!(matches!(r.register(bad), Err(RegistryError::Rule(_))));
    }

    #[test]
    fn random_gene_respects_zeroed_weights() {
        let mut r = reg_with(vec![take_def()]);
        r.register(Expression::constant(Value::Int(0), t("Int"))).unwrap();
        r.register(Expression::input("x", t("Int"))).unwrap();
        let only_exprs = GeneWeights {
            expression: 1.0,
            constant: 0.0,
            input: 0.0,
            local: 0.0,
            open: 0.0,
            close: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            match r.random_gene(&only_exprs, &mut rng) {
                Gene::Expr(e) => assert_eq!(e.registry_key(), Some("take")),
                other => panic!("unexpected gene {other:?}"),
            }
        }
    }

    #[test]
    fn random_gene_draws_are_seed_deterministic() {
        let mut r = reg_with(vec![take_def()]);
        r.register(Expression::constant(Value::Int(0), t("Int"))).unwrap();
        let w = GeneWeights::default();
        let draw = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..40)
                .map(|_| format!("{:?}", r.random_gene(&w, &mut rng)))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }
}
