//! Type expressions, the nominal hierarchy, and the subtype relation.
//!
//! Types are structural trees over declared nominal names: `Int`, `List[Str]`,
//! `Union[Int,Float]`, the universal `Top`, and bounded variables written
//! `?T` in text form. The hierarchy owns the nominal edges (`List -> Sequence`,
//! `Str -> Sequence`) plus the numeric promotion order used by max-type
//! reification.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

// ---- TypeExpr --------------------------------------------------------------

/// A structural type expression.
///
/// Canonical form: unions are flattened (no nested unions), deduplicated, and
/// never wrap a single member; bare constructor names are represented as
/// `Parametric` applied to `Top` (so `List` and `List[Top]` are the same
/// value).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum TypeExpr {
    /// Supertype of everything.
    Top,
    /// A plain declared name, e.g. `Int`.
    Nominal(String),
    /// A constructor applied to parameters, e.g. `List[Str]`.
    Parametric(String, Vec<TypeExpr>),
    /// A flattened, deduplicated union with at least two members.
    Union(Vec<TypeExpr>),
    /// A bounded type variable; `bound = None` means bounded only by `Top`.
    Var {
        id: String,
        bound: Option<Box<TypeExpr>>,
    },
}

impl TypeExpr {
    pub fn nominal(name: &str) -> Self {
        TypeExpr::Nominal(name.to_string())
    }

    pub fn list_of(elem: TypeExpr) -> Self {
        TypeExpr::Parametric("List".to_string(), vec![elem])
    }

    /// Builds a union in canonical form: flattens nested unions, drops
    /// duplicates (first occurrence wins), and collapses singletons.
    pub fn union(members: Vec<TypeExpr>) -> Self {
        let mut flat: Vec<TypeExpr> = Vec::new();
        let push = |t: TypeExpr, flat: &mut Vec<TypeExpr>| {
            if !flat.contains(&t) {
                flat.push(t);
            }
        };
        for m in members {
            match m {
                TypeExpr::Union(inner) => {
                    for t in inner {
                        push(t, &mut flat);
                    }
                }
                other => push(other, &mut flat),
            }
        }
        match flat.len() {
            0 => TypeExpr::Top,
            1 => flat.pop().unwrap(),
            _ => TypeExpr::Union(flat),
        }
    }

    pub fn var(id: &str, bound: Option<TypeExpr>) -> Self {
        TypeExpr::Var {
            id: id.to_string(),
            bound: bound.map(Box::new),
        }
    }

    /// True if the expression contains no type variables.
    pub fn is_concrete(&self) -> bool {
        match self {
            TypeExpr::Top | TypeExpr::Nominal(_) => true,
            TypeExpr::Parametric(_, ps) => ps.iter().all(|p| p.is_concrete()),
            TypeExpr::Union(ms) => ms.iter().all(|m| m.is_concrete()),
            TypeExpr::Var { .. } => false,
        }
    }

    /// All nominal names mentioned anywhere in the expression.
    pub fn mentioned_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            TypeExpr::Top => {}
            TypeExpr::Nominal(n) => out.push(n),
            TypeExpr::Parametric(c, ps) => {
                out.push(c);
                for p in ps {
                    p.collect_names(out);
                }
            }
            TypeExpr::Union(ms) => {
                for m in ms {
                    m.collect_names(out);
                }
            }
            TypeExpr::Var { bound, .. } => {
                if let Some(b) = bound {
                    b.collect_names(out);
                }
            }
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Top => write!(f, "Top"),
            TypeExpr::Nominal(n) => write!(f, "{n}"),
            TypeExpr::Parametric(c, ps) => {
                write!(f, "{c}[")?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "]")
            }
            TypeExpr::Union(ms) => {
                write!(f, "Union[")?;
                for (i, m) in ms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, "]")
            }
            TypeExpr::Var { id, .. } => write!(f, "?{id}"),
        }
    }
}

// ---- Errors ----------------------------------------------------------------

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("unknown type name `{0}`")]
    UnknownType(String),
    #[error("`{0}` is not a parametric constructor")]
    NotAConstructor(String),
    #[error("`{0}` expects {1} parameter(s), got {2}")]
    WrongArity(String, usize, usize),
    #[error("cycle through `{0}` in the type hierarchy")]
    CyclicHierarchy(String),
    #[error("type name `{0}` declared twice")]
    DuplicateType(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TypeParseError {
    #[error("empty type text")]
    Empty,
    #[error("unexpected character `{0}` at byte {1}")]
    Unexpected(char, usize),
    #[error("unbalanced brackets")]
    Unbalanced,
    #[error("trailing input after type at byte {0}")]
    Trailing(usize),
    #[error("{0}")]
    Undeclared(TypeError),
}

// ---- TypeHierarchy ---------------------------------------------------------

/// Declared nominal names, parametric constructors, direct subtype edges, and
/// the numeric promotion order.
#[derive(Clone, Debug)]
pub struct TypeHierarchy {
    declared: HashSet<String>,
    constructors: HashMap<String, usize>,
    parents: HashMap<String, Vec<String>>,
    numeric_order: Vec<String>,
}

impl TypeHierarchy {
    pub fn new() -> Self {
        TypeHierarchy {
            declared: HashSet::new(),
            constructors: HashMap::new(),
            parents: HashMap::new(),
            numeric_order: Vec::new(),
        }
    }

    /// The hierarchy shared by the core library and all benchmark problems:
    /// scalars, `Sequence` with `List` and `Str` below it, and the calendar
    /// and filesystem classes. Numeric promotion is `Int < Float`.
    pub fn standard() -> Self {
        let mut h = TypeHierarchy::new();
        for name in ["Int", "Float", "Bool", "Str", "Sequence", "DateTime", "TimeDelta", "Path"] {
            h.declare(name).unwrap();
        }
        h.declare_constructor("List", 1).unwrap();
        h.add_edge("List", "Sequence").unwrap();
        h.add_edge("Str", "Sequence").unwrap();
        h.set_numeric_order(&["Int", "Float"]).unwrap();
        h
    }

    pub fn declare(&mut self, name: &str) -> Result<(), TypeError> {
        if !self.declared.insert(name.to_string()) {
            return Err(TypeError::DuplicateType(name.to_string()));
        }
        Ok(())
    }

    pub fn declare_constructor(&mut self, name: &str, arity: usize) -> Result<(), TypeError> {
        self.declare(name)?;
        self.constructors.insert(name.to_string(), arity);
        Ok(())
    }

    /// Adds a direct edge `child <: parent`, rejecting cycles.
    pub fn add_edge(&mut self, child: &str, parent: &str) -> Result<(), TypeError> {
        self.check_declared_name(child)?;
        self.check_declared_name(parent)?;
        if self.nominal_subtype(parent, child) {
            return Err(TypeError::CyclicHierarchy(child.to_string()));
        }
        self.parents
            .entry(child.to_string())
            .or_default()
            .push(parent.to_string());
        Ok(())
    }

    /// Sets the numeric promotion order, lowest first.
    pub fn set_numeric_order(&mut self, names: &[&str]) -> Result<(), TypeError> {
        for n in names {
            self.check_declared_name(n)?;
        }
        self.numeric_order = names.iter().map(|s| s.to_string()).collect();
        Ok(())
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.declared.contains(name)
    }

    pub fn constructor_arity(&self, name: &str) -> Option<usize> {
        self.constructors.get(name).copied()
    }

    /// Position of `name` in the numeric promotion order, if numeric.
    pub fn numeric_rank(&self, name: &str) -> Option<usize> {
        self.numeric_order.iter().position(|n| n == name)
    }

    pub fn numeric_order(&self) -> &[String] {
        &self.numeric_order
    }

    fn check_declared_name(&self, name: &str) -> Result<(), TypeError> {
        if self.is_declared(name) {
            Ok(())
        } else {
            Err(TypeError::UnknownType(name.to_string()))
        }
    }

    /// Reflexive-transitive closure of the direct edges.
    pub fn nominal_subtype(&self, sub: &str, sup: &str) -> bool {
        if sub == sup {
            return true;
        }
        let mut stack = vec![sub];
        let mut seen: HashSet<&str> = HashSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            if let Some(ps) = self.parents.get(n) {
                for p in ps {
                    if p == sup {
                        return true;
                    }
                    stack.push(p);
                }
            }
        }
        false
    }

    /// Rejects undeclared names anywhere inside `t`, including constructor
    /// arity mismatches.
    pub fn check_declared(&self, t: &TypeExpr) -> Result<(), TypeError> {
        match t {
            TypeExpr::Top => Ok(()),
            TypeExpr::Nominal(n) => self.check_declared_name(n),
            TypeExpr::Parametric(c, ps) => {
                let arity = self
                    .constructor_arity(c)
                    .ok_or_else(|| if self.is_declared(c) {
                        TypeError::NotAConstructor(c.clone())
                    } else {
                        TypeError::UnknownType(c.clone())
                    })?;
                if ps.len() != arity {
                    return Err(TypeError::WrongArity(c.clone(), arity, ps.len()));
                }
                ps.iter().try_for_each(|p| self.check_declared(p))
            }
            TypeExpr::Union(ms) => ms.iter().try_for_each(|m| self.check_declared(m)),
            TypeExpr::Var { bound, .. } => match bound {
                Some(b) => self.check_declared(b),
                None => Ok(()),
            },
        }
    }

    // ---- Subtyping ---------------------------------------------------------

    /// Decidable structural subtyping. Errors only on undeclared names; for
    /// types already validated against this hierarchy it cannot fail.
    pub fn is_subtype(&self, sub: &TypeExpr, sup: &TypeExpr) -> Result<bool, TypeError> {
        self.check_declared(sub)?;
        self.check_declared(sup)?;
        Ok(self.subtype_inner(sub, sup))
    }

    /// `is_subtype` for pre-validated types; undeclared names compare false.
    pub fn subtypes(&self, sub: &TypeExpr, sup: &TypeExpr) -> bool {
        self.subtype_inner(sub, sup)
    }

    fn subtype_inner(&self, sub: &TypeExpr, sup: &TypeExpr) -> bool {
        if matches!(sup, TypeExpr::Top) || sub == sup {
            return true;
        }
        match (sub, sup) {
            // A bounded variable is below whatever its bound is below. An
            // unbounded variable falls through to the supertype-side rules:
            // besides Top (caught above) it still fits under an admitting
            // variable or a union listing an admitting member.
            (TypeExpr::Var { bound: Some(b), .. }, _) => self.subtype_inner(b, sup),
            // Anything fits under a variable whose bound admits it; an
            // unbounded variable admits everything.
            (_, TypeExpr::Var { bound, .. }) => match bound {
                Some(b) => self.subtype_inner(sub, b),
                None => true,
            },
            // A union fits under T when every member does; checked before the
            // sup-union case so union-vs-union quantifies correctly.
            (TypeExpr::Union(ms), _) => ms.iter().all(|m| self.subtype_inner(m, sup)),
            (_, TypeExpr::Union(ms)) => ms.iter().any(|m| self.subtype_inner(sub, m)),
            // Past the variable and union cases an unbounded variable is
            // below nothing further.
            (TypeExpr::Var { bound: None, .. }, _) => false,
            (TypeExpr::Nominal(a), TypeExpr::Nominal(b)) => self.nominal_subtype(a, b),
            // Same constructor: element-wise covariance.
            (TypeExpr::Parametric(c, ps), TypeExpr::Parametric(d, qs)) => {
                c == d
                    && ps.len() == qs.len()
                    && ps.iter().zip(qs).all(|(p, q)| self.subtype_inner(p, q))
            }
            // A parametric type sits below a plain name via the nominal edges
            // of its constructor (List[Str] <: Sequence).
            (TypeExpr::Parametric(c, _), TypeExpr::Nominal(d)) => self.nominal_subtype(c, d),
            _ => false,
        }
    }

    /// Splits a collection type into its constructor and parameters. Plain
    /// constructor names decompose with `Top` parameters; non-collection types
    /// do not decompose.
    pub fn decompose(&self, t: &TypeExpr) -> Option<(String, Vec<TypeExpr>)> {
        match t {
            TypeExpr::Parametric(c, ps) => Some((c.clone(), ps.clone())),
            TypeExpr::Nominal(n) => self
                .constructor_arity(n)
                .map(|arity| (n.clone(), vec![TypeExpr::Top; arity])),
            _ => None,
        }
    }
}

impl Default for TypeHierarchy {
    fn default() -> Self {
        TypeHierarchy::new()
    }
}

// ---- Parsing ---------------------------------------------------------------

/// Parses canonical type text: `Int`, `List[Str]`, `Union[Int,Float]`, `Top`,
/// `?T`. Whitespace around names and separators is tolerated. Bare declared
/// constructor names canonicalize to `Top` parameters when a hierarchy is
/// supplied via [`parse_type_in`].
pub fn parse_type(text: &str) -> Result<TypeExpr, TypeParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(TypeParseError::Empty);
    }
    let t = p.parse_expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(TypeParseError::Trailing(p.pos));
    }
    Ok(t)
}

/// [`parse_type`] plus canonicalization and declaration checking against a
/// hierarchy: `List` becomes `List[Top]`, and undeclared names are rejected.
pub fn parse_type_in(text: &str, h: &TypeHierarchy) -> Result<TypeExpr, TypeParseError> {
    let t = parse_type(text)?;
    let t = canonicalize(t, h);
    match h.check_declared(&t) {
        Ok(()) => Ok(t),
        Err(e) => Err(TypeParseError::Undeclared(e)),
    }
}

/// Rewrites bare constructor names to fully applied form (`List` ->
/// `List[Top]`) everywhere inside `t`.
pub fn canonicalize(t: TypeExpr, h: &TypeHierarchy) -> TypeExpr {
    match t {
        TypeExpr::Nominal(n) => match h.constructor_arity(&n) {
            Some(arity) => TypeExpr::Parametric(n, vec![TypeExpr::Top; arity]),
            None => TypeExpr::Nominal(n),
        },
        TypeExpr::Parametric(c, ps) => {
            TypeExpr::Parametric(c, ps.into_iter().map(|p| canonicalize(p, h)).collect())
        }
        TypeExpr::Union(ms) => {
            TypeExpr::union(ms.into_iter().map(|m| canonicalize(m, h)).collect())
        }
        TypeExpr::Var { id, bound } => TypeExpr::Var {
            id,
            bound: bound.map(|b| Box::new(canonicalize(*b, h))),
        },
        other => other,
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn parse_expr(&mut self) -> Result<TypeExpr, TypeParseError> {
        self.skip_ws();
        if self.peek() == Some(b'?') {
            self.pos += 1;
            let id = self.parse_name()?;
            return Ok(TypeExpr::var(&id, None));
        }
        let name = self.parse_name()?;
        self.skip_ws();
        if self.peek() != Some(b'[') {
            return Ok(match name.as_str() {
                "Top" => TypeExpr::Top,
                _ => TypeExpr::Nominal(name),
            });
        }
        self.pos += 1; // consume '['
        let mut params = Vec::new();
        loop {
            params.push(self.parse_expr()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => return Err(TypeParseError::Unexpected(c as char, self.pos)),
                None => return Err(TypeParseError::Unbalanced),
            }
        }
        if name == "Union" {
            Ok(TypeExpr::union(params))
        } else {
            Ok(TypeExpr::Parametric(name, params))
        }
    }

    fn parse_name(&mut self) -> Result<String, TypeParseError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            match self.peek() {
                Some(c) => Err(TypeParseError::Unexpected(c as char, self.pos)),
                None => Err(TypeParseError::Unbalanced),
            }
        } else {
            Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
        }
    }
}

// ---- Specifications --------------------------------------------------------

/// A named, typed parameter of an expression.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub ty: TypeExpr,
}

impl Param {
    pub fn new(name: &str, ty: TypeExpr) -> Self {
        Param {
            name: name.to_string(),
            ty,
        }
    }
}

/// Argument types plus return type of an expression; reification rewrites a
/// copy of this as arguments are bound.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Specification {
    pub args: Vec<Param>,
    pub ret: TypeExpr,
}

impl Specification {
    pub fn new(args: Vec<Param>, ret: TypeExpr) -> Self {
        Specification { args, ret }
    }

    /// Leaf specification: no arguments, fixed return type.
    pub fn value(ret: TypeExpr) -> Self {
        Specification { args: Vec::new(), ret }
    }

    pub fn arg_index(&self, name: &str) -> Option<usize> {
        self.args.iter().position(|p| p.name == name)
    }
}

impl fmt::Display for Specification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", p.name, p.ty)?;
        }
        write!(f, ") -> {}", self.ret)
    }
}

// ---- Tests -----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn h() -> TypeHierarchy {
        TypeHierarchy::standard()
    }

    fn t(s: &str) -> TypeExpr {
        parse_type_in(s, &h()).unwrap()
    }

    #[test]
    fn subtype_pinned_examples() {
        let h = h();
        assert!(h.is_subtype(&t("List[Str]"), &t("List")).unwrap());
        assert!(h.is_subtype(&t("Int"), &t("Union[Int,Float]")).unwrap());
        assert!(h.is_subtype(&t("List[Str]"), &t("List[Str]")).unwrap());
        assert!(!h.is_subtype(&t("Int"), &t("List")).unwrap());
    }

    #[test]
    fn subtype_nominal_edges() {
        let h = h();
        assert!(h.is_subtype(&t("List[Str]"), &t("Sequence")).unwrap());
        assert!(h.is_subtype(&t("Str"), &t("Sequence")).unwrap());
        assert!(!h.is_subtype(&t("Sequence"), &t("Str")).unwrap());
        assert!(!h.is_subtype(&t("Int"), &t("Sequence")).unwrap());
    }

    #[test]
    fn subtype_top_and_unions() {
        let h = h();
        assert!(h.is_subtype(&t("DateTime"), &TypeExpr::Top).unwrap());
        assert!(h.is_subtype(&t("Union[Int,Float]"), &t("Union[Int,Float,Str]")).unwrap());
        assert!(!h.is_subtype(&t("Union[Int,Str]"), &t("Union[Int,Float]")).unwrap());
        // Union order is irrelevant to the relation even though the canonical
        // text preserves insertion order.
        assert!(h.is_subtype(&t("Union[Float,Int]"), &t("Union[Int,Float]")).unwrap());
        assert!(h.is_subtype(&t("Union[Int,Float]"), &t("Union[Float,Int]")).unwrap());
    }

    #[test]
    fn subtype_covariance() {
        let h = h();
        assert!(h.is_subtype(&t("List[Int]"), &t("List[Union[Int,Float]]")).unwrap());
        assert!(!h.is_subtype(&t("List[Union[Int,Float]]"), &t("List[Int]")).unwrap());
        assert!(h.is_subtype(&t("List[List[Str]]"), &t("List[List]")).unwrap());
    }

    #[test]
    fn subtype_vars() {
        let h = h();
        let tv = TypeExpr::var("T", Some(t("Union[Int,Float,Str]")));
        // As a subtype a variable acts through its bound.
        assert!(h.is_subtype(&tv, &t("Union[Int,Float,Str]")).unwrap());
        assert!(h
            .is_subtype(&tv, &t("Union[Int,Float,Bool,Str,DateTime,TimeDelta]"))
            .unwrap());
        assert!(!h.is_subtype(&tv, &t("Int")).unwrap());
        // As a supertype a variable admits anything inside its bound.
        assert!(h.is_subtype(&t("Int"), &tv).unwrap());
        assert!(!h.is_subtype(&t("DateTime"), &tv).unwrap());
        // Same variable on both sides.
        assert!(h.is_subtype(&tv, &tv).unwrap());
        // An unbounded variable is below Top only, but admits everything.
        let u = TypeExpr::var("U", None);
        assert!(h.is_subtype(&u, &TypeExpr::Top).unwrap());
        assert!(!h.is_subtype(&u, &t("Int")).unwrap());
        assert!(h.is_subtype(&t("List[Str]"), &u).unwrap());
        // A var-parameterized list admits a concrete list inside the bound.
        let list_tv = TypeExpr::list_of(tv.clone());
        assert!(h.is_subtype(&t("List[Int]"), &list_tv).unwrap());
        assert!(!h.is_subtype(&t("List[DateTime]"), &list_tv).unwrap());
    }

    #[test]
    fn subtype_unknown_name_errors() {
        let h = h();
        assert_eq!(
            h.is_subtype(&TypeExpr::nominal("Mystery"), &t("Int")),
            Err(TypeError::UnknownType("Mystery".to_string()))
        );
    }

    #[test]
    fn decompose_pinned_examples() {
        let h = h();
        assert_eq!(
            h.decompose(&t("List[Str]")),
            Some(("List".to_string(), vec![t("Str")]))
        );
        assert_eq!(h.decompose(&t("Int")), None);
        assert_eq!(
            h.decompose(&TypeExpr::nominal("List")),
            Some(("List".to_string(), vec![TypeExpr::Top]))
        );
        assert_eq!(h.decompose(&t("Union[Int,Float]")), None);
    }

    #[test]
    fn union_canonical_form() {
        let int = t("Int");
        let float = t("Float");
        // Singleton collapses; duplicates drop; nesting flattens.
        assert_eq!(TypeExpr::union(vec![int.clone()]), int);
        assert_eq!(
            TypeExpr::union(vec![int.clone(), int.clone(), float.clone()]),
            TypeExpr::Union(vec![int.clone(), float.clone()])
        );
        assert_eq!(
            TypeExpr::union(vec![
                TypeExpr::union(vec![int.clone(), float.clone()]),
                int.clone()
            ]),
            TypeExpr::Union(vec![int, float])
        );
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in [
            "Int",
            "Float",
            "List[Str]",
            "List[List[Int]]",
            "Union[Int,Float]",
            "Union[Int,Float,Str]",
            "List[Union[Int,Float]]",
            "Top",
            "?T",
        ] {
            let t = parse_type(s).unwrap();
            assert_eq!(t.to_string(), s, "round trip of `{s}`");
        }
    }

    #[test]
    fn parse_canonicalizes_bare_list() {
        assert_eq!(t("List"), t("List[Top]"));
        assert_eq!(t("List").to_string(), "List[Top]");
    }

    #[test]
    fn parse_tolerates_spaces() {
        assert_eq!(parse_type("Union[Int, Float]").unwrap(), t("Union[Int,Float]"));
        assert_eq!(parse_type(" List[ Str ] ").unwrap(), parse_type("List[Str]").unwrap());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_type("").is_err());
        assert!(parse_type("List[").is_err());
        assert!(parse_type("List[Str]]").is_err());
        assert!(parse_type("List[]").is_err());
        assert!(parse_type("[Int]").is_err());
        assert!(parse_type_in("Widget", &h()).is_err());
        assert!(parse_type_in("List[Int,Int]", &h()).is_err());
    }

    #[test]
    fn hierarchy_rejects_cycles_and_duplicates() {
        let mut h = TypeHierarchy::new();
        h.declare("A").unwrap();
        h.declare("B").unwrap();
        assert_eq!(h.declare("A"), Err(TypeError::DuplicateType("A".into())));
        h.add_edge("A", "B").unwrap();
        assert_eq!(h.add_edge("B", "A"), Err(TypeError::CyclicHierarchy("B".into())));
        assert_eq!(h.add_edge("A", "A"), Err(TypeError::CyclicHierarchy("A".into())));
    }

    #[test]
    fn numeric_order_ranks() {
        let h = h();
        assert_eq!(h.numeric_rank("Int"), Some(0));
        assert_eq!(h.numeric_rank("Float"), Some(1));
        assert_eq!(h.numeric_rank("Str"), None);
    }
}
