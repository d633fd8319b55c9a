//! Reification rules: how a polymorphic specification narrows as arguments
//! are bound.
//!
//! Each rule reads the types already bound to named arguments and rewrites the
//! working copy of the specification — either the expected types of
//! still-unbound arguments or the return type. Rules are applied after every
//! argument binding, so a rule sees bindings as soon as they exist; a rule
//! whose referenced arguments are not bound yet simply waits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{Specification, TypeExpr, TypeHierarchy};

/// A rewrite applied to a specification as argument types become known.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum ReificationRule {
    /// Return type becomes the bound type of the referenced argument.
    PassThrough { arg: String },
    /// Return type becomes the element type of the referenced collection.
    ReturnElement { arg: String },
    /// The element argument's expected type becomes the element type of the
    /// bound collection argument.
    ArgsToElement { collection: String, element: String },
    /// Every referenced argument still unbound takes the type of the first
    /// referenced argument that is bound.
    ArgsToSame { args: Vec<String> },
    /// Return type becomes `List[T]` where `T` is the bound argument type.
    ListOf { arg: String },
    /// Return type becomes the numeric maximum of the bound argument types,
    /// following the hierarchy's numeric promotion order.
    MaxType { args: Vec<String> },
}

impl ReificationRule {
    pub fn pass_through(arg: &str) -> Self {
        ReificationRule::PassThrough { arg: arg.to_string() }
    }

    pub fn return_element(arg: &str) -> Self {
        ReificationRule::ReturnElement { arg: arg.to_string() }
    }

    pub fn args_to_element(collection: &str, element: &str) -> Self {
        ReificationRule::ArgsToElement {
            collection: collection.to_string(),
            element: element.to_string(),
        }
    }

    pub fn args_to_same(args: &[&str]) -> Self {
        ReificationRule::ArgsToSame {
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn list_of(arg: &str) -> Self {
        ReificationRule::ListOf { arg: arg.to_string() }
    }

    pub fn max_type(args: &[&str]) -> Self {
        ReificationRule::MaxType {
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Argument names this rule reads or writes.
    pub fn referenced_args(&self) -> Vec<&str> {
        match self {
            ReificationRule::PassThrough { arg }
            | ReificationRule::ReturnElement { arg }
            | ReificationRule::ListOf { arg } => vec![arg],
            ReificationRule::ArgsToElement { collection, element } => {
                vec![collection, element]
            }
            ReificationRule::ArgsToSame { args } | ReificationRule::MaxType { args } => {
                args.iter().map(|s| s.as_str()).collect()
            }
        }
    }

    /// Checks that every referenced argument exists in `spec`.
    pub fn check_against(&self, spec: &Specification) -> Result<(), RuleError> {
        for name in self.referenced_args() {
            if spec.arg_index(name).is_none() {
                return Err(RuleError::UnknownArg(name.to_string()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("rule references unknown argument `{0}`")]
    UnknownArg(String),
    #[error("rule read argument `{0}` before it was bound")]
    MissingBinding(String),
    #[error("bound type `{0}` does not decompose into a collection")]
    NotDecomposable(String),
    #[error("bound type `{0}` is outside the numeric promotion order")]
    NotNumeric(String),
}

/// Applies one rule to a specification given the argument types bound so far.
/// Every argument the rule reads must already be bound; use [`apply_rules`]
/// for the incremental form that lets rules wait for their bindings.
pub fn apply_rule(
    rule: &ReificationRule,
    spec: &Specification,
    bound: &HashMap<String, TypeExpr>,
    h: &TypeHierarchy,
) -> Result<Specification, RuleError> {
    rule.check_against(spec)?;
    for name in rule.read_args(bound) {
        if !bound.contains_key(name) {
            return Err(RuleError::MissingBinding(name.to_string()));
        }
    }
    let mut out = spec.clone();
    apply_into(rule, &mut out, bound, h)?;
    Ok(out)
}

/// Applies every applicable rule in order, skipping rules whose referenced
/// arguments are not all bound yet. This is the form the compiler uses after
/// each argument binding. Errors mean the binding is unsatisfiable (for
/// example a non-numeric type reached a max-type rule).
pub fn apply_rules(
    rules: &[ReificationRule],
    spec: &mut Specification,
    bound: &HashMap<String, TypeExpr>,
    h: &TypeHierarchy,
) -> Result<(), RuleError> {
    for rule in rules {
        rule.check_against(spec)?;
        if rule.read_args(bound).iter().all(|a| bound.contains_key(*a)) {
            apply_into(rule, spec, bound, h)?;
        }
    }
    Ok(())
}

impl ReificationRule {
    /// The arguments this rule needs bound before it can fire. For the
    /// variadic rules a single bound reference is enough, so the requirement
    /// is computed against the current bindings.
    fn read_args<'a>(&'a self, bound: &HashMap<String, TypeExpr>) -> Vec<&'a str> {
        match self {
            ReificationRule::PassThrough { arg }
            | ReificationRule::ReturnElement { arg }
            | ReificationRule::ListOf { arg } => vec![arg.as_str()],
            ReificationRule::ArgsToElement { collection, .. } => vec![collection.as_str()],
            ReificationRule::ArgsToSame { args } | ReificationRule::MaxType { args } => {
                match args.iter().find(|a| bound.contains_key(*a)) {
                    Some(first) => vec![first.as_str()],
                    // Nothing bound yet: require the first reference so the
                    // strict form reports it and the incremental form waits.
                    None => args.first().map(|a| a.as_str()).into_iter().collect(),
                }
            }
        }
    }
}

fn apply_into(
    rule: &ReificationRule,
    spec: &mut Specification,
    bound: &HashMap<String, TypeExpr>,
    h: &TypeHierarchy,
) -> Result<(), RuleError> {
    match rule {
        ReificationRule::PassThrough { arg } => {
            spec.ret = bound[arg].clone();
        }
        ReificationRule::ReturnElement { arg } => {
            spec.ret = element_of(&bound[arg], h)?;
        }
        ReificationRule::ArgsToElement { collection, element } => {
            let elem = element_of(&bound[collection], h)?;
            if !bound.contains_key(element) {
                let i = spec.arg_index(element).expect("checked against spec");
                spec.args[i].ty = elem;
            }
        }
        ReificationRule::ArgsToSame { args } => {
            if let Some(first) = args.iter().find(|a| bound.contains_key(*a)) {
                let ty = bound[first].clone();
                for a in args {
                    if !bound.contains_key(a) {
                        let i = spec.arg_index(a).expect("checked against spec");
                        spec.args[i].ty = ty.clone();
                    }
                }
            }
        }
        ReificationRule::ListOf { arg } => {
            spec.ret = TypeExpr::list_of(bound[arg].clone());
        }
        ReificationRule::MaxType { args } => {
            let mut interval: Option<(usize, usize)> = None;
            for a in args {
                let Some(ty) = bound.get(a) else { continue };
                let (lo, hi) = numeric_interval(ty, h)
                    .ok_or_else(|| RuleError::NotNumeric(ty.to_string()))?;
                interval = Some(match interval {
                    None => (lo, hi),
                    Some((alo, ahi)) => (alo.max(lo), ahi.max(hi)),
                });
            }
            if let Some((lo, hi)) = interval {
                spec.ret = interval_type(lo, hi, h);
            }
        }
    }
    Ok(())
}

fn element_of(ty: &TypeExpr, h: &TypeHierarchy) -> Result<TypeExpr, RuleError> {
    let (_, params) = h
        .decompose(ty)
        .ok_or_else(|| RuleError::NotDecomposable(ty.to_string()))?;
    params
        .into_iter()
        .next()
        .ok_or_else(|| RuleError::NotDecomposable(ty.to_string()))
}

/// The ranks a numeric type can take: a plain numeric name is a point, a
/// union of numerics spans its members. Non-numeric types have no interval.
fn numeric_interval(ty: &TypeExpr, h: &TypeHierarchy) -> Option<(usize, usize)> {
    match ty {
        TypeExpr::Nominal(n) => h.numeric_rank(n).map(|r| (r, r)),
        TypeExpr::Union(ms) => {
            let mut lo = usize::MAX;
            let mut hi = 0;
            for m in ms {
                let (mlo, mhi) = numeric_interval(m, h)?;
                lo = lo.min(mlo);
                hi = hi.max(mhi);
            }
            Some((lo, hi))
        }
        _ => None,
    }
}

fn interval_type(lo: usize, hi: usize, h: &TypeHierarchy) -> TypeExpr {
    let order = h.numeric_order();
    if lo == hi {
        TypeExpr::Nominal(order[lo].clone())
    } else {
        TypeExpr::union(
            order[lo..=hi]
                .iter()
                .map(|n| TypeExpr::Nominal(n.clone()))
                .collect(),
        )
    }
}

// ---- Tests -----------------------------------------------------------------
