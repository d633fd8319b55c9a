//! Runtime values, the calendar and filesystem classes, and the mapping from
//! values back to types.
//!
//! `DateTime` wraps a civil calendar timestamp at second precision,
//! `TimeDelta` a signed span of seconds, and `PathValue` a purely textual
//! path — no clock or filesystem is ever touched, so evaluation stays
//! hermetic and reproducible.

use std::cmp::Ordering;
use std::fmt;

use chrono::{Datelike, Duration as ChronoDuration, NaiveDate, NaiveDateTime, Timelike};

use crate::types::{TypeExpr, TypeHierarchy};

// ---- Value -----------------------------------------------------------------

/// A runtime value. Equality is structural (floats compare by IEEE equality).
#[derive(Clone, PartialEq, Debug)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    List(Vec<Value>),
    DateTime(DateTime),
    TimeDelta(TimeDelta),
    Path(PathValue),
}

impl Value {
    pub fn str(s: &str) -> Self {
        Value::Str(s.to_string())
    }

    /// The narrowest type this value inhabits. Lists take the union of their
    /// element types; an empty list is `List[Top]`.
    pub fn most_specific_type(&self) -> TypeExpr {
        match self {
            Value::Int(_) => TypeExpr::nominal("Int"),
            Value::Float(_) => TypeExpr::nominal("Float"),
            Value::Bool(_) => TypeExpr::nominal("Bool"),
            Value::Str(_) => TypeExpr::nominal("Str"),
            Value::DateTime(_) => TypeExpr::nominal("DateTime"),
            Value::TimeDelta(_) => TypeExpr::nominal("TimeDelta"),
            Value::Path(_) => TypeExpr::nominal("Path"),
            Value::List(es) => {
                if es.is_empty() {
                    TypeExpr::list_of(TypeExpr::Top)
                } else {
                    TypeExpr::list_of(TypeExpr::union(
                        es.iter().map(|e| e.most_specific_type()).collect(),
                    ))
                }
            }
        }
    }

    /// Structural membership check: does this value inhabit `ty`? Unlike
    /// `most_specific_type`-based subtyping this accepts an empty list at
    /// every list type.
    pub fn conforms(&self, ty: &TypeExpr, h: &TypeHierarchy) -> bool {
        match ty {
            TypeExpr::Top => true,
            TypeExpr::Union(ms) => ms.iter().any(|m| self.conforms(m, h)),
            TypeExpr::Var { bound, .. } => match bound {
                Some(b) => self.conforms(b, h),
                None => true,
            },
            TypeExpr::Nominal(n) => h.nominal_subtype(self.base_type_name(), n),
            TypeExpr::Parametric(c, ps) => match self {
                Value::List(es) => {
                    h.nominal_subtype("List", c)
                        && ps.len() == 1
                        && es.iter().all(|e| e.conforms(&ps[0], h))
                }
                _ => false,
            },
        }
    }

    /// The nominal name of this value's base type.
    pub fn base_type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "Int",
            Value::Float(_) => "Float",
            Value::Bool(_) => "Bool",
            Value::Str(_) => "Str",
            Value::List(_) => "List",
            Value::DateTime(_) => "DateTime",
            Value::TimeDelta(_) => "TimeDelta",
            Value::Path(_) => "Path",
        }
    }

    /// Total order within comparable families; `None` across families.
    /// Numerics compare across Int/Float.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Float(a), Value::Float(b)) => a.partial_cmp(b),
            (Value::Int(a), Value::Float(b)) => (*a as f64).partial_cmp(b),
            (Value::Float(a), Value::Int(b)) => a.partial_cmp(&(*b as f64)),
            (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
            (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
            (Value::DateTime(a), Value::DateTime(b)) => Some(a.cmp(b)),
            (Value::TimeDelta(a), Value::TimeDelta(b)) => Some(a.cmp(b)),
            (Value::Path(a), Value::Path(b)) => Some(a.text().cmp(&b.text())),
            _ => None,
        }
    }

    /// The text the print channel records: strings verbatim, everything else
    /// in literal form.
    pub fn printed_form(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            other => other.literal_form(),
        }
    }

    /// Source-text literal form: what the emitter writes for constants and
    /// dumps. Strings are double-quoted with escapes.
    pub fn literal_form(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(f) => float_literal(*f),
            Value::Bool(true) => "True".to_string(),
            Value::Bool(false) => "False".to_string(),
            Value::Str(s) => quote_str(s),
            Value::List(es) => {
                let inner: Vec<String> = es.iter().map(|e| e.literal_form()).collect();
                format!("[{}]", inner.join(", "))
            }
            Value::DateTime(dt) => dt.to_string(),
            Value::TimeDelta(td) => td.to_string(),
            Value::Path(p) => format!("Path({})", quote_str(&p.text())),
        }
    }
}

/// Shortest round-trip float text, with a `.0` appended to integral values so
/// literals stay visibly floating-point.
pub fn float_literal(f: f64) -> String {
    let s = format!("{f}");
    if s.bytes().any(|b| matches!(b, b'.' | b'e' | b'E' | b'i' | b'N' | b'n')) {
        s
    } else {
        format!("{s}.0")
    }
}

/// Double-quoted string literal with `\\`, `\"`, `\n`, `\t`, `\r` escapes.
pub fn quote_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

/// Inverse of [`quote_str`] given the text between the quotes.
pub fn unquote_body(body: &str) -> Option<String> {
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            '\\' => out.push('\\'),
            '"' => out.push('"'),
            'n' => out.push('\n'),
            't' => out.push('\t'),
            'r' => out.push('\r'),
            _ => return None,
        }
    }
    Some(out)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.literal_form())
    }
}

// ---- DateTime --------------------------------------------------------------

/// A civil calendar timestamp at second precision. No time zone and no clock:
/// instances come only from explicit fields or epoch seconds.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct DateTime(NaiveDateTime);

impl DateTime {
    pub fn from_ymd_hms(y: i32, mo: u32, d: u32, h: u32, mi: u32, s: u32) -> Option<Self> {
        let date = NaiveDate::from_ymd_opt(y, mo, d)?;
        let dt = date.and_hms_opt(h, mi, s)?;
        Some(DateTime(dt))
    }

    pub fn from_epoch_seconds(secs: i64) -> Option<Self> {
        chrono::DateTime::UNIX_EPOCH
            .naive_utc()
            .checked_add_signed(ChronoDuration::seconds(secs))
            .map(DateTime)
    }

    pub fn epoch_seconds(&self) -> i64 {
        self.0.and_utc().timestamp()
    }

    pub fn year(&self) -> i64 {
        self.0.year() as i64
    }

    pub fn month(&self) -> i64 {
        self.0.month() as i64
    }

    pub fn day(&self) -> i64 {
        self.0.day() as i64
    }

    pub fn hour(&self) -> i64 {
        self.0.hour() as i64
    }

    pub fn minute(&self) -> i64 {
        self.0.minute() as i64
    }

    pub fn second(&self) -> i64 {
        self.0.second() as i64
    }

    /// `self - other` as a span.
    pub fn diff(&self, other: &DateTime) -> TimeDelta {
        TimeDelta::from_total_seconds(self.epoch_seconds() - other.epoch_seconds())
    }

    pub fn add_delta(&self, d: &TimeDelta) -> Option<DateTime> {
        self.0
            .checked_add_signed(ChronoDuration::seconds(d.total_seconds()))
            .map(DateTime)
    }

    pub fn sub_delta(&self, d: &TimeDelta) -> Option<DateTime> {
        self.0
            .checked_sub_signed(ChronoDuration::seconds(d.total_seconds()))
            .map(DateTime)
    }
}

impl fmt::Display for DateTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%dT%H:%M:%S"))
    }
}

// ---- TimeDelta -------------------------------------------------------------

/// A signed span of whole seconds.
///
/// `days()` and `seconds()` truncate toward zero and satisfy
/// `days * 86400 + seconds == total`, so a span and its negation report
/// mirrored fields — which keeps day-difference arithmetic symmetric.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct TimeDelta {
    total: i64,
}

pub const SECONDS_PER_DAY: i64 = 86_400;

impl TimeDelta {
    pub fn from_total_seconds(total: i64) -> Self {
        TimeDelta { total }
    }

    pub fn from_days_seconds(days: i64, seconds: i64) -> Option<Self> {
        let total = days.checked_mul(SECONDS_PER_DAY)?.checked_add(seconds)?;
        Some(TimeDelta { total })
    }

    pub fn total_seconds(&self) -> i64 {
        self.total
    }

    /// Whole days, truncated toward zero.
    pub fn days(&self) -> i64 {
        self.total / SECONDS_PER_DAY
    }

    /// Leftover seconds after removing whole days; same sign as the span.
    pub fn seconds(&self) -> i64 {
        self.total % SECONDS_PER_DAY
    }

    pub fn checked_add(&self, other: &TimeDelta) -> Option<TimeDelta> {
        self.total.checked_add(other.total).map(TimeDelta::from_total_seconds)
    }

    pub fn checked_sub(&self, other: &TimeDelta) -> Option<TimeDelta> {
        self.total.checked_sub(other.total).map(TimeDelta::from_total_seconds)
    }
}

impl fmt::Display for TimeDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}d{}s", self.days(), self.seconds())
    }
}

// ---- PathValue -------------------------------------------------------------

/// A purely textual filesystem path: an absolute flag plus normalized
/// segments. Construction collapses repeated separators and `.` segments and
/// keeps `..` as written; nothing ever touches a real filesystem.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PathValue {
    absolute: bool,
    segments: Vec<String>,
}

impl PathValue {
    pub fn new(text: &str) -> Self {
        let absolute = text.starts_with('/');
        let segments = text
            .split('/')
            .filter(|s| !s.is_empty() && *s != ".")
            .map(|s| s.to_string())
            .collect();
        PathValue { absolute, segments }
    }

    pub fn is_absolute(&self) -> bool {
        self.absolute
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    /// Canonical text: `/a/b` or `a/b`; the empty relative path is `.` and
    /// the empty absolute path is `/`.
    pub fn text(&self) -> String {
        match (self.absolute, self.segments.is_empty()) {
            (true, true) => "/".to_string(),
            (true, false) => format!("/{}", self.segments.join("/")),
            (false, true) => ".".to_string(),
            (false, false) => self.segments.join("/"),
        }
    }

    /// Appends `other`; an absolute `other` replaces the whole path.
    pub fn join(&self, other: &PathValue) -> PathValue {
        if other.absolute {
            return other.clone();
        }
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        PathValue {
            absolute: self.absolute,
            segments,
        }
    }

    /// Final segment, or empty when there is none.
    pub fn basename(&self) -> String {
        self.segments.last().cloned().unwrap_or_default()
    }

    /// Everything but the final segment. The roots are their own parents.
    pub fn dirname(&self) -> PathValue {
        let mut segments = self.segments.clone();
        segments.pop();
        PathValue {
            absolute: self.absolute,
            segments,
        }
    }

    /// The same segments anchored at the root.
    pub fn abspath(&self) -> PathValue {
        PathValue {
            absolute: true,
            segments: self.segments.clone(),
        }
    }
}

impl fmt::Display for PathValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text())
    }
}

// ---- Tests -----------------------------------------------------------------
