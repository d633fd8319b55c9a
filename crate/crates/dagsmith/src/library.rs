//! The standard expression library: arithmetic, comparisons, logic,
//! sequences, strings, lists, the print tap, and the calendar/filesystem
//! classes.
//!
//! Host implementations follow everyday scripting semantics: division is
//! true division and rejects zero, indexing accepts negative positions and
//! raises on misses, `replace` with a negative count replaces everywhere,
//! and `count` of an empty needle is length plus one. Integer overflow is an
//! error, not a wrap.

use crate::expr::{CallableDef, EvalIo, Expression, HofKind, HostError, HostFn, Registry};
use crate::reify::ReificationRule;
use crate::types::{Param, Specification, TypeExpr};
use crate::value::{PathValue, Value};

// ---- Type shorthands -------------------------------------------------------

fn t_int() -> TypeExpr {
    TypeExpr::nominal("Int")
}

fn t_float() -> TypeExpr {
    TypeExpr::nominal("Float")
}

fn t_bool() -> TypeExpr {
    TypeExpr::nominal("Bool")
}

fn t_str() -> TypeExpr {
    TypeExpr::nominal("Str")
}

fn t_seq() -> TypeExpr {
    TypeExpr::nominal("Sequence")
}

fn t_dt() -> TypeExpr {
    TypeExpr::nominal("DateTime")
}

fn t_td() -> TypeExpr {
    TypeExpr::nominal("TimeDelta")
}

fn t_path() -> TypeExpr {
    TypeExpr::nominal("Path")
}

fn t_list() -> TypeExpr {
    TypeExpr::list_of(TypeExpr::Top)
}

/// `Union[Int,Float]`: a number whose exact width is not yet known.
pub fn t_number() -> TypeExpr {
    TypeExpr::union(vec![t_int(), t_float()])
}

/// The ordered family: everything the relational comparisons accept.
pub fn t_comparable() -> TypeExpr {
    TypeExpr::union(vec![t_int(), t_float(), t_bool(), t_str(), t_dt(), t_td()])
}

// ---- Registration ----------------------------------------------------------

/// Builds a registry over the standard hierarchy with the core library and
/// benchmark classes installed.
pub fn standard_registry() -> Registry {
    let mut r = Registry::new(crate::types::TypeHierarchy::standard());
    register_core_library(&mut r);
    register_benchmark_classes(&mut r);
    r
}

fn func(key: &str, name: &str, args: Vec<Param>, ret: TypeExpr, rules: Vec<ReificationRule>, run: HostFn) -> Expression {
    Expression::Function(CallableDef {
        key: key.to_string(),
        name: name.to_string(),
        spec: Specification::new(args, ret),
        rules,
        run,
    })
}

fn method(class: &str, name: &str, args: Vec<Param>, ret: TypeExpr, rules: Vec<ReificationRule>, run: HostFn) -> Expression {
    Expression::Method(CallableDef {
        key: format!("{class}.{name}"),
        name: name.to_string(),
        spec: Specification::new(args, ret),
        rules,
        run,
    })
}

/// Arithmetic, comparisons, logic, conversions, sequence/string/list
/// operations, the print tap, and the two higher-order forms.
pub fn register_core_library(r: &mut Registry) {
    let num2 = || vec![Param::new("a", t_number()), Param::new("b", t_number())];
    let cmp2 = || vec![Param::new("a", t_comparable()), Param::new("b", t_comparable())];
    let max_ab = || vec![ReificationRule::max_type(&["a", "b"])];
    let same_ab = || vec![ReificationRule::args_to_same(&["a", "b"])];

    let defs = vec![
        // Arithmetic. Numeric results follow the max-type rule; division is
        // always Float.
        func("add", "add", num2(), t_number(), max_ab(), host_add),
        func("sub", "sub", num2(), t_number(), max_ab(), host_sub),
        func("mul", "mul", num2(), t_number(), max_ab(), host_mul),
        func("div", "div", num2(), t_float(), vec![], host_div),
        func(
            "abs",
            "abs",
            vec![Param::new("a", t_number())],
            t_number(),
            vec![ReificationRule::pass_through("a")],
            host_abs,
        ),
        func("min", "min", num2(), t_number(), max_ab(), host_min),
        func("max", "max", num2(), t_number(), max_ab(), host_max),
        // Relational comparisons narrow both operands to one family.
        func("lt", "lt", cmp2(), t_bool(), same_ab(), host_lt),
        func("le", "le", cmp2(), t_bool(), same_ab(), host_le),
        func("gt", "gt", cmp2(), t_bool(), same_ab(), host_gt),
        func("ge", "ge", cmp2(), t_bool(), same_ab(), host_ge),
        func(
            "eq",
            "eq",
            vec![Param::new("a", TypeExpr::Top), Param::new("b", TypeExpr::Top)],
            t_bool(),
            same_ab(),
            host_eq,
        ),
        // Logic.
        func(
            "and",
            "and",
            vec![Param::new("a", t_bool()), Param::new("b", t_bool())],
            t_bool(),
            vec![],
            host_and,
        ),
        func(
            "or",
            "or",
            vec![Param::new("a", t_bool()), Param::new("b", t_bool())],
            t_bool(),
            vec![],
            host_or,
        ),
        func(
            "not",
            "not",
            vec![Param::new("a", t_bool())],
            t_bool(),
            vec![],
            host_not,
        ),
        // Conversions.
        func(
            "bool2int",
            "bool2int",
            vec![Param::new("a", t_bool())],
            t_int(),
            vec![],
            host_bool2int,
        ),
        func(
            "float2bool",
            "float2bool",
            vec![Param::new("a", t_float())],
            t_bool(),
            vec![],
            host_float2bool,
        ),
        // Sequences.
        func(
            "len",
            "len",
            vec![Param::new("s", t_seq())],
            t_int(),
            vec![],
            host_len,
        ),
        func(
            "concat",
            "concat",
            vec![
                Param::new("a", TypeExpr::union(vec![t_str(), t_list()])),
                Param::new("b", TypeExpr::union(vec![t_str(), t_list()])),
            ],
            TypeExpr::union(vec![t_str(), t_list()]),
            vec![
                ReificationRule::args_to_same(&["a", "b"]),
                ReificationRule::pass_through("a"),
            ],
            host_concat,
        ),
        // Lists.
        func(
            "take",
            "take",
            vec![Param::new("L", t_list()), Param::new("N", t_int())],
            t_list(),
            vec![ReificationRule::pass_through("L")],
            host_take,
        ),
        func(
            "first",
            "first",
            vec![Param::new("L", t_list())],
            TypeExpr::Top,
            vec![ReificationRule::return_element("L")],
            host_first,
        ),
        func(
            "last",
            "last",
            vec![Param::new("L", t_list())],
            TypeExpr::Top,
            vec![ReificationRule::return_element("L")],
            host_last,
        ),
        func(
            "nth",
            "nth",
            vec![Param::new("L", t_list()), Param::new("N", t_int())],
            TypeExpr::Top,
            vec![ReificationRule::return_element("L")],
            host_nth,
        ),
        func(
            "reverse",
            "reverse",
            vec![Param::new("L", t_list())],
            t_list(),
            vec![ReificationRule::pass_through("L")],
            host_reverse,
        ),
        func(
            "index_of",
            "index_of",
            vec![Param::new("L", t_list()), Param::new("x", TypeExpr::Top)],
            t_int(),
            vec![ReificationRule::args_to_element("L", "x")],
            host_index_of,
        ),
        func(
            "is_in",
            "is_in",
            vec![Param::new("L", t_list()), Param::new("x", TypeExpr::Top)],
            t_bool(),
            vec![ReificationRule::args_to_element("L", "x")],
            host_is_in,
        ),
        func(
            "list_of",
            "list_of",
            vec![Param::new("x", TypeExpr::Top)],
            t_list(),
            vec![ReificationRule::list_of("x")],
            host_list_of,
        ),
        func(
            "sum",
            "sum",
            vec![Param::new("L", TypeExpr::list_of(t_number()))],
            t_number(),
            vec![ReificationRule::return_element("L")],
            host_sum,
        ),
        func(
            "list_min",
            "min",
            vec![Param::new("L", TypeExpr::list_of(t_number()))],
            t_number(),
            vec![ReificationRule::return_element("L")],
            host_list_min,
        ),
        func(
            "list_max",
            "max",
            vec![Param::new("L", TypeExpr::list_of(t_number()))],
            t_number(),
            vec![ReificationRule::return_element("L")],
            host_list_max,
        ),
        // The print tap: records the value and passes it through unchanged.
        func(
            "print_tap",
            "print_tap",
            vec![Param::new("x", TypeExpr::Top)],
            TypeExpr::Top,
            vec![ReificationRule::pass_through("x")],
            host_print_tap,
        ),
        // String methods.
        method(
            "Str",
            "replace",
            vec![
                Param::new("self", t_str()),
                Param::new("old", t_str()),
                Param::new("new", t_str()),
                Param::new("count", t_int()),
            ],
            t_str(),
            vec![],
            host_str_replace,
        ),
        method(
            "Str",
            "count",
            vec![Param::new("self", t_str()), Param::new("sub", t_str())],
            t_int(),
            vec![],
            host_str_count,
        ),
        method(
            "Str",
            "split",
            vec![Param::new("self", t_str())],
            TypeExpr::list_of(t_str()),
            vec![],
            host_str_split,
        ),
    ];
    for d in defs {
        r.register(d).expect("core library registers cleanly");
    }
    r.register(Expression::HigherOrder(HofKind::Map))
        .expect("core library registers cleanly");
    r.register(Expression::HigherOrder(HofKind::Filter))
        .expect("core library registers cleanly");
}

/// Calendar and filesystem classes: `DateTime` and `TimeDelta` accessors,
/// their arithmetic overloads (registered under distinct keys but emitted as
/// plain `add`/`sub`), and the `Path` constructor and methods.
pub fn register_benchmark_classes(r: &mut Registry) {
    let defs = vec![
        method("DateTime", "year", vec![Param::new("self", t_dt())], t_int(), vec![], host_dt_year),
        method("DateTime", "month", vec![Param::new("self", t_dt())], t_int(), vec![], host_dt_month),
        method("DateTime", "day", vec![Param::new("self", t_dt())], t_int(), vec![], host_dt_day),
        method("DateTime", "hour", vec![Param::new("self", t_dt())], t_int(), vec![], host_dt_hour),
        method("DateTime", "minute", vec![Param::new("self", t_dt())], t_int(), vec![], host_dt_minute),
        method("DateTime", "second", vec![Param::new("self", t_dt())], t_int(), vec![], host_dt_second),
        method("TimeDelta", "days", vec![Param::new("self", t_td())], t_int(), vec![], host_td_days),
        method("TimeDelta", "seconds", vec![Param::new("self", t_td())], t_int(), vec![], host_td_seconds),
        method(
            "TimeDelta",
            "total_seconds",
            vec![Param::new("self", t_td())],
            t_int(),
            vec![],
            host_td_total_seconds,
        ),
        // Calendar arithmetic: typed overloads of the core add/sub names.
        func(
            "sub_dt_dt",
            "sub",
            vec![Param::new("a", t_dt()), Param::new("b", t_dt())],
            t_td(),
            vec![],
            host_sub_dt_dt,
        ),
        func(
            "add_dt_td",
            "add",
            vec![Param::new("a", t_dt()), Param::new("b", t_td())],
            t_dt(),
            vec![],
            host_add_dt_td,
        ),
        func(
            "sub_dt_td",
            "sub",
            vec![Param::new("a", t_dt()), Param::new("b", t_td())],
            t_dt(),
            vec![],
            host_sub_dt_td,
        ),
        func(
            "add_td_td",
            "add",
            vec![Param::new("a", t_td()), Param::new("b", t_td())],
            t_td(),
            vec![],
            host_add_td_td,
        ),
        func(
            "sub_td_td",
            "sub",
            vec![Param::new("a", t_td()), Param::new("b", t_td())],
            t_td(),
            vec![],
            host_sub_td_td,
        ),
        Expression::Constructor(CallableDef {
            key: "Path".to_string(),
            name: "Path".to_string(),
            spec: Specification::new(vec![Param::new("s", t_str())], t_path()),
            rules: vec![],
            run: host_path_new,
        }),
        method(
            "Path",
            "join",
            vec![Param::new("self", t_path()), Param::new("other", t_path())],
            t_path(),
            vec![],
            host_path_join,
        ),
        method("Path", "to_str", vec![Param::new("self", t_path())], t_str(), vec![], host_path_to_str),
        method("Path", "abspath", vec![Param::new("self", t_path())], t_path(), vec![], host_path_abspath),
        method(
            "Path",
            "split",
            vec![Param::new("self", t_path())],
            TypeExpr::list_of(t_str()),
            vec![],
            host_path_split,
        ),
        method("Path", "basename", vec![Param::new("self", t_path())], t_str(), vec![], host_path_basename),
        method("Path", "dirname", vec![Param::new("self", t_path())], t_path(), vec![], host_path_dirname),
        method("Path", "isabs", vec![Param::new("self", t_path())], t_bool(), vec![], host_path_isabs),
    ];
    for d in defs {
        r.register(d).expect("benchmark classes register cleanly");
    }
}

/// The constant pool problems draw genes from: small integers, float
/// landmarks, string atoms, and the booleans.
pub fn default_constants() -> Vec<(Value, TypeExpr)> {
    let mut pool = Vec::new();
    for i in -10..=10 {
        pool.push((Value::Int(i), t_int()));
    }
    for f in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        pool.push((Value::Float(f), t_float()));
    }
    for s in ["", " ", "\n"] {
        pool.push((Value::str(s), t_str()));
    }
    pool.push((Value::Bool(true), t_bool()));
    pool.push((Value::Bool(false), t_bool()));
    pool
}

// ---- Host helpers ----------------------------------------------------------

fn want(kind: &str, got: &Value) -> HostError {
    HostError(format!("expected {kind}, got {}", got.base_type_name()))
}

fn as_int(v: &Value) -> Result<i64, HostError> {
    match v {
        Value::Int(i) => Ok(*i),
        other => Err(want("Int", other)),
    }
}

fn as_bool(v: &Value) -> Result<bool, HostError> {
    match v {
        Value::Bool(b) => Ok(*b),
        other => Err(want("Bool", other)),
    }
}

fn as_str(v: &Value) -> Result<&str, HostError> {
    match v {
        Value::Str(s) => Ok(s),
        other => Err(want("Str", other)),
    }
}

fn as_list(v: &Value) -> Result<&[Value], HostError> {
    match v {
        Value::List(es) => Ok(es),
        other => Err(want("List", other)),
    }
}

fn as_dt(v: &Value) -> Result<&crate::value::DateTime, HostError> {
    match v {
        Value::DateTime(d) => Ok(d),
        other => Err(want("DateTime", other)),
    }
}

fn as_td(v: &Value) -> Result<&crate::value::TimeDelta, HostError> {
    match v {
        Value::TimeDelta(d) => Ok(d),
        other => Err(want("TimeDelta", other)),
    }
}

fn as_path(v: &Value) -> Result<&PathValue, HostError> {
    match v {
        Value::Path(p) => Ok(p),
        other => Err(want("Path", other)),
    }
}

fn as_f64(v: &Value) -> Result<f64, HostError> {
    match v {
        Value::Int(i) => Ok(*i as f64),
        Value::Float(f) => Ok(*f),
        other => Err(want("number", other)),
    }
}

fn overflow() -> HostError {
    HostError("integer overflow".to_string())
}

/// Int op if both ints (checked), Float op otherwise.
fn arith(
    vs: &[Value],
    int_op: fn(i64, i64) -> Option<i64>,
    float_op: fn(f64, f64) -> f64,
) -> Result<Value, HostError> {
    match (&vs[0], &vs[1]) {
        (Value::Int(a), Value::Int(b)) => int_op(*a, *b).map(Value::Int).ok_or_else(overflow),
        (a, b) => Ok(Value::Float(float_op(as_f64(a)?, as_f64(b)?))),
    }
}

fn ordering(vs: &[Value]) -> Result<std::cmp::Ordering, HostError> {
    vs[0]
        .compare(&vs[1])
        .ok_or_else(|| HostError("values are not comparable".to_string()))
}

// ---- Hosts: arithmetic and logic -------------------------------------------

fn host_add(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    arith(vs, i64::checked_add, |a, b| a + b)
}

fn host_sub(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    arith(vs, i64::checked_sub, |a, b| a - b)
}

fn host_mul(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    arith(vs, i64::checked_mul, |a, b| a * b)
}

fn host_div(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    let b = as_f64(&vs[1])?;
    if b == 0.0 {
        return Err(HostError("division by zero".to_string()));
    }
    Ok(Value::Float(as_f64(&vs[0])? / b))
}

fn host_abs(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    match &vs[0] {
        Value::Int(i) => i.checked_abs().map(Value::Int).ok_or_else(overflow),
        Value::Float(f) => Ok(Value::Float(f.abs())),
        other => Err(want("number", other)),
    }
}

/// An Int winner is promoted when the other operand is a Float, so the
/// value's runtime type always matches the MaxType-reified return type.
fn promote_mixed(winner: Value, vs: &[Value]) -> Value {
    match winner {
        Value::Int(i) if vs.iter().any(|v| matches!(v, Value::Float(_))) => {
            Value::Float(i as f64)
        }
        other => other,
    }
}

fn host_min(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    let winner = if ordering(vs)?.is_le() { vs[0].clone() } else { vs[1].clone() };
    Ok(promote_mixed(winner, vs))
}

fn host_max(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    let winner = if ordering(vs)?.is_ge() { vs[0].clone() } else { vs[1].clone() };
    Ok(promote_mixed(winner, vs))
}

fn host_lt(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Bool(ordering(vs)?.is_lt()))
}

fn host_le(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Bool(ordering(vs)?.is_le()))
}

fn host_gt(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Bool(ordering(vs)?.is_gt()))
}

fn host_ge(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Bool(ordering(vs)?.is_ge()))
}

fn host_eq(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Bool(vs[0] == vs[1]))
}

fn host_and(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Bool(as_bool(&vs[0])? && as_bool(&vs[1])?))
}

fn host_or(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Bool(as_bool(&vs[0])? || as_bool(&vs[1])?))
}

fn host_not(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Bool(!as_bool(&vs[0])?))
}

fn host_bool2int(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Int(as_bool(&vs[0])? as i64))
}

fn host_float2bool(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    match &vs[0] {
        Value::Float(f) => Ok(Value::Bool(*f != 0.0)),
        other => Err(want("Float", other)),
    }
}

// ---- Hosts: sequences, strings, lists --------------------------------------

fn host_len(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    match &vs[0] {
        Value::Str(s) => Ok(Value::Int(s.chars().count() as i64)),
        Value::List(es) => Ok(Value::Int(es.len() as i64)),
        other => Err(want("Sequence", other)),
    }
}

fn host_concat(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    match (&vs[0], &vs[1]) {
        (Value::Str(a), Value::Str(b)) => Ok(Value::Str(format!("{a}{b}"))),
        (Value::List(a), Value::List(b)) => {
            let mut out = a.clone();
            out.extend(b.iter().cloned());
            Ok(Value::List(out))
        }
        (a, _) => Err(want("two Str or two List", a)),
    }
}

fn host_take(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    let es = as_list(&vs[0])?;
    let n = as_int(&vs[1])?.max(0) as usize;
    Ok(Value::List(es.iter().take(n).cloned().collect()))
}

fn host_first(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    as_list(&vs[0])?
        .first()
        .cloned()
        .ok_or_else(|| HostError("first of empty list".to_string()))
}

fn host_last(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    as_list(&vs[0])?
        .last()
        .cloned()
        .ok_or_else(|| HostError("last of empty list".to_string()))
}

fn host_nth(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    let es = as_list(&vs[0])?;
    let n = as_int(&vs[1])?;
    // Negative positions index from the end.
    let idx = if n < 0 { n + es.len() as i64 } else { n };
    if idx < 0 || idx as usize >= es.len() {
        return Err(HostError(format!("index {n} out of range for length {}", es.len())));
    }
    Ok(es[idx as usize].clone())
}

fn host_reverse(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    let mut es = as_list(&vs[0])?.to_vec();
    es.reverse();
    Ok(Value::List(es))
}

fn host_index_of(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    as_list(&vs[0])?
        .iter()
        .position(|e| e == &vs[1])
        .map(|i| Value::Int(i as i64))
        .ok_or_else(|| HostError("value not in list".to_string()))
}

fn host_is_in(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Bool(as_list(&vs[0])?.contains(&vs[1])))
}

fn host_list_of(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::List(vec![vs[0].clone()]))
}

fn host_sum(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    let es = as_list(&vs[0])?;
    // An empty sum has no element type to speak in; reject it rather than
    // invent a zero of the wrong width.
    if es.is_empty() {
        return Err(HostError("sum of empty list".to_string()));
    }
    if es.iter().all(|e| matches!(e, Value::Int(_))) {
        let mut acc: i64 = 0;
        for e in es {
            acc = acc.checked_add(as_int(e)?).ok_or_else(overflow)?;
        }
        Ok(Value::Int(acc))
    } else {
        let mut acc = 0.0;
        for e in es {
            acc += as_f64(e)?;
        }
        Ok(Value::Float(acc))
    }
}

fn pick_by(vs: &[Value], keep_left: fn(std::cmp::Ordering) -> bool) -> Result<Value, HostError> {
    let es = as_list(&vs[0])?;
    let mut best = es
        .first()
        .cloned()
        .ok_or_else(|| HostError("extremum of empty list".to_string()))?;
    for e in &es[1..] {
        let ord = best
            .compare(e)
            .ok_or_else(|| HostError("values are not comparable".to_string()))?;
        if !keep_left(ord) {
            best = e.clone();
        }
    }
    Ok(best)
}

fn host_list_min(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    pick_by(vs, std::cmp::Ordering::is_le)
}

fn host_list_max(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    pick_by(vs, std::cmp::Ordering::is_ge)
}

fn host_print_tap(io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    io.print(&vs[0]);
    Ok(vs[0].clone())
}

fn host_str_replace(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    let s = as_str(&vs[0])?;
    let old = as_str(&vs[1])?;
    let new = as_str(&vs[2])?;
    let count = as_int(&vs[3])?;
    Ok(Value::Str(replace_counted(s, old, new, count)))
}

/// Replace up to `count` occurrences; a negative count means all. An empty
/// needle inserts `new` between characters and at both ends, scripting-style.
fn replace_counted(s: &str, old: &str, new: &str, count: i64) -> String {
    let unlimited = count < 0;
    let mut budget = if unlimited { usize::MAX } else { count as usize };
    let mut out = String::with_capacity(s.len());
    if old.is_empty() {
        if budget > 0 {
            out.push_str(new);
            budget -= 1;
        }
        for c in s.chars() {
            out.push(c);
            if budget > 0 {
                out.push_str(new);
                budget -= 1;
            }
        }
        return out;
    }
    let mut rest = s;
    while budget > 0 {
        match rest.find(old) {
            Some(i) => {
                out.push_str(&rest[..i]);
                out.push_str(new);
                rest = &rest[i + old.len()..];
                budget -= 1;
            }
            None => break,
        }
    }
    out.push_str(rest);
    out
}

fn host_str_count(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    let s = as_str(&vs[0])?;
    let needle = as_str(&vs[1])?;
    if needle.is_empty() {
        // Matches between every character and at both ends.
        return Ok(Value::Int(s.chars().count() as i64 + 1));
    }
    let mut n = 0i64;
    let mut rest = s;
    while let Some(i) = rest.find(needle) {
        n += 1;
        rest = &rest[i + needle.len()..];
    }
    Ok(Value::Int(n))
}

fn host_str_split(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    let s = as_str(&vs[0])?;
    Ok(Value::List(
        s.split_whitespace().map(Value::str).collect(),
    ))
}

// ---- Hosts: calendar -------------------------------------------------------

fn host_dt_year(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Int(as_dt(&vs[0])?.year()))
}

fn host_dt_month(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Int(as_dt(&vs[0])?.month()))
}

fn host_dt_day(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Int(as_dt(&vs[0])?.day()))
}

fn host_dt_hour(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Int(as_dt(&vs[0])?.hour()))
}

fn host_dt_minute(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Int(as_dt(&vs[0])?.minute()))
}

fn host_dt_second(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Int(as_dt(&vs[0])?.second()))
}

fn host_td_days(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Int(as_td(&vs[0])?.days()))
}

fn host_td_seconds(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Int(as_td(&vs[0])?.seconds()))
}

fn host_td_total_seconds(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Int(as_td(&vs[0])?.total_seconds()))
}

fn host_sub_dt_dt(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::TimeDelta(as_dt(&vs[0])?.diff(as_dt(&vs[1])?)))
}

fn host_add_dt_td(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    as_dt(&vs[0])?
        .add_delta(as_td(&vs[1])?)
        .map(Value::DateTime)
        .ok_or_else(|| HostError("datetime out of range".to_string()))
}

fn host_sub_dt_td(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    as_dt(&vs[0])?
        .sub_delta(as_td(&vs[1])?)
        .map(Value::DateTime)
        .ok_or_else(|| HostError("datetime out of range".to_string()))
}

fn host_add_td_td(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    as_td(&vs[0])?
        .checked_add(as_td(&vs[1])?)
        .map(Value::TimeDelta)
        .ok_or_else(overflow)
}

fn host_sub_td_td(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    as_td(&vs[0])?
        .checked_sub(as_td(&vs[1])?)
        .map(Value::TimeDelta)
        .ok_or_else(overflow)
}

// ---- Hosts: paths ----------------------------------------------------------

fn host_path_new(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Path(PathValue::new(as_str(&vs[0])?)))
}

fn host_path_join(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Path(as_path(&vs[0])?.join(as_path(&vs[1])?)))
}

fn host_path_to_str(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Str(as_path(&vs[0])?.text()))
}

fn host_path_abspath(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Path(as_path(&vs[0])?.abspath()))
}

fn host_path_split(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::List(
        as_path(&vs[0])?
            .segments()
            .iter()
            .map(|s| Value::str(s))
            .collect(),
    ))
}

fn host_path_basename(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Str(as_path(&vs[0])?.basename()))
}

fn host_path_dirname(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Path(as_path(&vs[0])?.dirname()))
}

fn host_path_isabs(_io: &mut EvalIo, vs: &[Value]) -> Result<Value, HostError> {
    Ok(Value::Bool(as_path(&vs[0])?.is_absolute()))
}

// ---- Tests -----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::{DateTime, TimeDelta};

    fn run(key: &str, args: Vec<Value>) -> Result<Value, HostError> {
        let r = standard_registry();
        let def = r.by_key(key).unwrap().callable().unwrap();
        let mut io = EvalIo::default();
        (def.run)(&mut io, &args)
    }

    fn ints(xs: &[i64]) -> Value {
        Value::List(xs.iter().copied().map(Value::Int).collect())
    }

    #[test]
    fn arithmetic_widths() {
        assert_eq!(run("add", vec![Value::Int(2), Value::Int(3)]), Ok(Value::Int(5)));
        assert_eq!(
            run("add", vec![Value::Int(2), Value::Float(0.5)]),
            Ok(Value::Float(2.5))
        );
        assert_eq!(
            run("mul", vec![Value::Float(2.0), Value::Float(3.0)]),
            Ok(Value::Float(6.0))
        );
        assert_eq!(run("sub", vec![Value::Int(2), Value::Int(5)]), Ok(Value::Int(-3)));
        // True division: Int/Int is Float.
        assert_eq!(
            run("div", vec![Value::Int(7), Value::Int(2)]),
            Ok(Value::Float(3.5))
        );
    }

    #[test]
    fn arithmetic_errors() {
        assert!(run("add", vec![Value::Int(i64::MAX), Value::Int(1)]).is_err());
        assert!(run("abs", vec![Value::Int(i64::MIN)]).is_err());
        assert!(run("div", vec![Value::Int(1), Value::Int(0)]).is_err());
        assert!(run("div", vec![Value::Float(1.0), Value::Float(0.0)]).is_err());
    }

    #[test]
    fn min_max_match_their_reified_type() {
        // Mixed operands reify the return to Float (MaxType), so an Int
        // winner is promoted; same-family operands come back unchanged.
        assert_eq!(
            run("min", vec![Value::Int(2), Value::Float(3.0)]),
            Ok(Value::Float(2.0))
        );
        assert_eq!(
            run("max", vec![Value::Int(2), Value::Float(3.0)]),
            Ok(Value::Float(3.0))
        );
        assert_eq!(
            run("min", vec![Value::Int(2), Value::Int(5)]),
            Ok(Value::Int(2))
        );
        // Ties keep the first operand (then promote if mixed).
        assert_eq!(
            run("min", vec![Value::Int(2), Value::Float(2.0)]),
            Ok(Value::Float(2.0))
        );
        assert_eq!(
            run("max", vec![Value::Float(2.0), Value::Int(2)]),
            Ok(Value::Float(2.0))
        );
    }

    #[test]
    fn comparisons_and_logic() {
        assert_eq!(run("lt", vec![Value::Int(1), Value::Int(2)]), Ok(Value::Bool(true)));
        assert_eq!(run("ge", vec![Value::str("b"), Value::str("a")]), Ok(Value::Bool(true)));
        assert_eq!(
            run("lt", vec![Value::Bool(false), Value::Bool(true)]),
            Ok(Value::Bool(true))
        );
        assert_eq!(
            run("eq", vec![Value::str("x"), Value::str("x")]),
            Ok(Value::Bool(true))
        );
        assert_eq!(
            run("and", vec![Value::Bool(true), Value::Bool(false)]),
            Ok(Value::Bool(false))
        );
        assert_eq!(run("not", vec![Value::Bool(false)]), Ok(Value::Bool(true)));
        assert_eq!(run("bool2int", vec![Value::Bool(true)]), Ok(Value::Int(1)));
        assert_eq!(run("float2bool", vec![Value::Float(0.0)]), Ok(Value::Bool(false)));
        assert_eq!(run("float2bool", vec![Value::Float(0.5)]), Ok(Value::Bool(true)));
    }

    #[test]
    fn sequence_operations() {
        assert_eq!(run("len", vec![Value::str("abc")]), Ok(Value::Int(3)));
        assert_eq!(run("len", vec![ints(&[1, 2])]), Ok(Value::Int(2)));
        assert_eq!(
            run("concat", vec![Value::str("ab"), Value::str("cd")]),
            Ok(Value::str("abcd"))
        );
        assert_eq!(
            run("concat", vec![ints(&[1]), ints(&[2, 3])]),
            Ok(ints(&[1, 2, 3]))
        );
    }

    #[test]
    fn list_operations() {
        assert_eq!(run("take", vec![ints(&[1, 2, 3, 4]), Value::Int(2)]), Ok(ints(&[1, 2])));
        assert_eq!(run("take", vec![ints(&[1, 2]), Value::Int(9)]), Ok(ints(&[1, 2])));
        assert_eq!(run("take", vec![ints(&[1, 2]), Value::Int(-1)]), Ok(ints(&[])));
        assert_eq!(run("first", vec![ints(&[7, 8])]), Ok(Value::Int(7)));
        assert_eq!(run("last", vec![ints(&[7, 8])]), Ok(Value::Int(8)));
        assert!(run("first", vec![ints(&[])]).is_err());
        assert_eq!(run("nth", vec![ints(&[5, 6, 7]), Value::Int(1)]), Ok(Value::Int(6)));
        assert_eq!(run("nth", vec![ints(&[5, 6, 7]), Value::Int(-1)]), Ok(Value::Int(7)));
        assert!(run("nth", vec![ints(&[5]), Value::Int(3)]).is_err());
        assert_eq!(run("reverse", vec![ints(&[1, 2, 3])]), Ok(ints(&[3, 2, 1])));
        assert_eq!(
            run("index_of", vec![ints(&[4, 5, 6]), Value::Int(5)]),
            Ok(Value::Int(1))
        );
        assert!(run("index_of", vec![ints(&[4]), Value::Int(9)]).is_err());
        assert_eq!(
            run("is_in", vec![ints(&[4, 5]), Value::Int(9)]),
            Ok(Value::Bool(false))
        );
        assert_eq!(run("list_of", vec![Value::Int(3)]), Ok(ints(&[3])));
        assert_eq!(run("sum", vec![ints(&[1, 2, 3])]), Ok(Value::Int(6)));
        assert_eq!(
            run("sum", vec![Value::List(vec![Value::Int(1), Value::Float(0.5)])]),
            Ok(Value::Float(1.5))
        );
        assert!(run("sum", vec![ints(&[])]).is_err());
        assert_eq!(run("list_min", vec![ints(&[3, 1, 2])]), Ok(Value::Int(1)));
        assert_eq!(run("list_max", vec![ints(&[3, 1, 2])]), Ok(Value::Int(3)));
        assert!(run("list_min", vec![ints(&[])]).is_err());
    }

    #[test]
    fn string_methods() {
        assert_eq!(
            run("Str.replace", vec![Value::str("a b c"), Value::str(" "), Value::str("\n"), Value::Int(-1)]),
            Ok(Value::str("a\nb\nc"))
        );
        assert_eq!(
            run("Str.replace", vec![Value::str("aaa"), Value::str("a"), Value::str("b"), Value::Int(2)]),
            Ok(Value::str("bba"))
        );
        assert_eq!(
            run("Str.replace", vec![Value::str("ab"), Value::str(""), Value::str("-"), Value::Int(-1)]),
            Ok(Value::str("-a-b-"))
        );
        assert_eq!(
            run("Str.replace", vec![Value::str("aaa"), Value::str("a"), Value::str("b"), Value::Int(0)]),
            Ok(Value::str("aaa"))
        );
        assert_eq!(
            run("Str.count", vec![Value::str("banana"), Value::str("an")]),
            Ok(Value::Int(2))
        );
        assert_eq!(
            run("Str.count", vec![Value::str("aaaa"), Value::str("aa")]),
            Ok(Value::Int(2)) // non-overlapping
        );
        assert_eq!(
            run("Str.count", vec![Value::str("abc"), Value::str("")]),
            Ok(Value::Int(4))
        );
        assert_eq!(
            run("Str.split", vec![Value::str("  a b\t c ")]),
            Ok(Value::List(vec![Value::str("a"), Value::str("b"), Value::str("c")]))
        );
    }

    #[test]
    fn print_tap_appends_and_passes_through() {
        let r = standard_registry();
        let def = r.by_key("print_tap").unwrap().callable().unwrap();
        let mut io = EvalIo::default();
        let out = (def.run)(&mut io, &[Value::str("a b")]).unwrap();
        assert_eq!(out, Value::str("a b"));
        assert_eq!(io.printed, "a b");
        let out = (def.run)(&mut io, &[Value::Int(42)]).unwrap();
        assert_eq!(out, Value::Int(42));
        assert_eq!(io.printed, "a b42");
    }

    #[test]
    fn calendar_methods() {
        let a = Value::DateTime(DateTime::from_ymd_hms(2020, 3, 5, 13, 45, 7).unwrap());
        let b = Value::DateTime(DateTime::from_ymd_hms(2020, 3, 1, 1, 0, 0).unwrap());
        assert_eq!(run("DateTime.year", vec![a.clone()]), Ok(Value::Int(2020)));
        assert_eq!(run("DateTime.day", vec![a.clone()]), Ok(Value::Int(5)));
        assert_eq!(run("DateTime.hour", vec![a.clone()]), Ok(Value::Int(13)));
        let d = run("sub_dt_dt", vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(run("TimeDelta.days", vec![d.clone()]), Ok(Value::Int(4)));
        let total = 4 * 86_400 + 12 * 3600 + 45 * 60 + 7;
        assert_eq!(run("TimeDelta.total_seconds", vec![d.clone()]), Ok(Value::Int(total)));
        // Mirrored difference reports mirrored fields.
        let neg = run("sub_dt_dt", vec![b.clone(), a.clone()]).unwrap();
        assert_eq!(run("TimeDelta.days", vec![neg]), Ok(Value::Int(-4)));
        // Shifts invert the difference.
        assert_eq!(run("add_dt_td", vec![b.clone(), d.clone()]), Ok(a.clone()));
        assert_eq!(run("sub_dt_td", vec![a, d]), Ok(b));
        let td = |s: i64| Value::TimeDelta(TimeDelta::from_total_seconds(s));
        assert_eq!(run("add_td_td", vec![td(10), td(5)]), Ok(td(15)));
        assert_eq!(run("sub_td_td", vec![td(10), td(25)]), Ok(td(-15)));
    }

    #[test]
    fn path_methods() {
        let p = run("Path", vec![Value::str("/srv//data/")]).unwrap();
        assert_eq!(run("Path.to_str", vec![p.clone()]), Ok(Value::str("/srv/data")));
        assert_eq!(run("Path.isabs", vec![p.clone()]), Ok(Value::Bool(true)));
        let child = run("Path", vec![Value::str("logs/x.txt")]).unwrap();
        let joined = run("Path.join", vec![p.clone(), child]).unwrap();
        assert_eq!(
            run("Path.to_str", vec![joined.clone()]),
            Ok(Value::str("/srv/data/logs/x.txt"))
        );
        assert_eq!(run("Path.basename", vec![joined.clone()]), Ok(Value::str("x.txt")));
        let parent = run("Path.dirname", vec![joined.clone()]).unwrap();
        assert_eq!(run("Path.to_str", vec![parent]), Ok(Value::str("/srv/data/logs")));
        assert_eq!(
            run("Path.split", vec![joined]),
            Ok(Value::List(vec![
                Value::str("srv"),
                Value::str("data"),
                Value::str("logs"),
                Value::str("x.txt"),
            ]))
        );
        let rel = run("Path", vec![Value::str("a/b")]).unwrap();
        let abs = run("Path.abspath", vec![rel]).unwrap();
        assert_eq!(run("Path.to_str", vec![abs]), Ok(Value::str("/a/b")));
    }

    #[test]
    fn registry_is_complete_and_keyed() {
        let r = standard_registry();
        for key in [
            "add", "sub", "mul", "div", "abs", "min", "max", "lt", "le", "gt", "ge", "eq",
            "and", "or", "not", "bool2int", "float2bool", "len", "concat", "take", "first",
            "last", "nth", "reverse", "index_of", "is_in", "list_of", "sum", "list_min",
            "list_max", "print_tap", "Str.replace", "Str.count", "Str.split", "map", "filter",
            "DateTime.year", "DateTime.month", "DateTime.day", "DateTime.hour",
            "DateTime.minute", "DateTime.second", "TimeDelta.days", "TimeDelta.seconds",
            "TimeDelta.total_seconds", "sub_dt_dt", "add_dt_td", "sub_dt_td", "add_td_td",
            "sub_td_td", "Path", "Path.join", "Path.to_str", "Path.abspath", "Path.split",
            "Path.basename", "Path.dirname", "Path.isabs",
        ] {
            assert!(r.by_key(key).is_some(), "missing {key}");
        }
        // Overloads share display names but have distinct keys.
        assert_eq!(r.overloads("sub").count(), 4);
        assert_eq!(r.overloads("add").count(), 3);
        assert_eq!(r.overloads("min").count(), 2);
        // Capitalized lookup resolves.
        assert!(r.lookup("Take").is_some());
        assert!(r.lookup("Length").is_none());
    }
}
