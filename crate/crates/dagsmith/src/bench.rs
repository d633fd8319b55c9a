//! Benchmark problems: typed signatures, seeded case generators, and error
//! functions.
//!
//! Each [`Problem`] owns everything a run needs: the input names and types to
//! register, the compile target, a deterministic case generator, and an error
//! function grading one evaluation against one [`Case`]. Error functions
//! return `f64::INFINITY` for structurally wrong results (wrong type,
//! unparseable print channel); the evolution layer clamps that to its penalty
//! constant. Expected outputs are computed here by direct arithmetic or
//! string/path manipulation — never by running library code through the
//! evaluator — so tests can compare the two routes independently.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::types::TypeExpr;
use crate::value::{DateTime, PathValue, Value, SECONDS_PER_DAY};

/// One training or test case: argument values plus the graded outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub inputs: Vec<Value>,
    pub expected: Value,
    /// What the program should leave on the print channel ("" when the
    /// problem does not grade printing).
    pub expected_printed: String,
}

/// Grades `(returned value, printed text)` against a case. Non-finite means
/// "structurally wrong"; the caller clamps to its penalty.
pub type ErrorFn = fn(&Value, &str, &Case) -> f64;

#[derive(Debug, Clone)]
pub struct Problem {
    /// Kebab-case CLI name, e.g. `days-between`.
    pub name: &'static str,
    /// Function name used in emitted source, e.g. `days_between`.
    pub fn_name: &'static str,
    pub inputs: Vec<(String, TypeExpr)>,
    pub return_type: TypeExpr,
    pub error_fn: ErrorFn,
    pub generator: fn(&mut ChaCha8Rng) -> Case,
    /// A hand-written genome solving the problem, used by tests and the
    /// simplification harness. Always compiles against [`Problem::registry`].
    pub known_genome: Option<&'static str>,
}

impl Problem {
    /// The standard registry extended with this problem's inputs.
    pub fn registry(&self) -> crate::expr::Registry {
        let mut reg = crate::library::standard_registry();
        for (name, ty) in &self.inputs {
            reg.register(crate::expr::Expression::input(name, ty.clone()))
                .expect("problem inputs register cleanly");
        }
        reg
    }

    /// Deterministic train/test case sets. Train and test draw from
    /// independent streams of the same base seed, so growing one set never
    /// perturbs the other.
    pub fn generate(&self, seed: u64, n_train: usize, n_test: usize) -> (Vec<Case>, Vec<Case>) {
        let mut r = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
        let train = (0..n_train).map(|_| (self.generator)(&mut r)).collect();
        let mut r = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
        let test = (0..n_test).map(|_| (self.generator)(&mut r)).collect();
        (train, test)
    }
}

/// Splits one base seed into independent stream seeds (splitmix64 of
/// `base ^ tag·φ`). Used for train/test case streams and per-component RNGs
/// so adding draws to one consumer never shifts another.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Edit distance between two sequences (insert/delete/substitute, unit cost).
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// All benchmark problems, calendar/path/generic set first, then the
/// program-synthesis classics.
pub fn all_problems() -> Vec<Problem> {
    vec![
        days_between(),
        prefix_paths(),
        filter_bounds(),
        number_io(),
        median(),
        smallest(),
        negative_to_zero(),
        vector_average(),
        compare_string_lengths(),
        replace_space_with_newline(),
    ]
}

pub fn find_problem(name: &str) -> Option<Problem> {
    all_problems().into_iter().find(|p| p.name == name)
}

// ---- Shared generator helpers ----------------------------------------------

const INT_LO: i64 = -100;
const INT_HI: i64 = 100;

fn rand_int(r: &mut ChaCha8Rng) -> i64 {
    r.random_range(INT_LO..=INT_HI)
}

fn rand_float(r: &mut ChaCha8Rng) -> f64 {
    r.random_range(-100.0..=100.0)
}

fn rand_lower(r: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| r.random_range(b'a'..=b'z') as char).collect()
}

fn rand_printable(r: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| r.random_range(33u8..=126) as char).collect()
}

fn int_err(v: &Value, expected: i64) -> f64 {
    match v {
        Value::Int(i) => (i - expected).abs() as f64,
        _ => f64::INFINITY,
    }
}

fn list_edit_err(v: &Value, expected: &Value) -> f64 {
    match (v, expected) {
        (Value::List(a), Value::List(e)) => levenshtein(a, e) as f64,
        _ => f64::INFINITY,
    }
}

// ---- days-between ----------------------------------------------------------

/// Whole days between two timestamps, ignoring direction.
fn days_between() -> Problem {
    // Epoch seconds spanning 1970-01-01 .. 2029-12-30, including time of day.
    const EPOCH_MAX: i64 = 1_893_456_000;
    Problem {
        name: "days-between",
        fn_name: "days_between",
        inputs: vec![
            ("dt1".into(), TypeExpr::nominal("DateTime")),
            ("dt2".into(), TypeExpr::nominal("DateTime")),
        ],
        return_type: TypeExpr::nominal("Int"),
        error_fn: |v, _p, c| int_err(v, c.expected.clone().into_int()),
        generator: |r| {
            let e1 = r.random_range(0..EPOCH_MAX);
            let e2 = r.random_range(0..EPOCH_MAX);
            let expected = (e1 - e2).abs() / SECONDS_PER_DAY;
            Case {
                inputs: vec![
                    Value::DateTime(DateTime::from_epoch_seconds(e1).unwrap()),
                    Value::DateTime(DateTime::from_epoch_seconds(e2).unwrap()),
                ],
                expected: Value::Int(expected),
                expected_printed: String::new(),
            }
        },
        known_genome: Some("input:dt2\ninput:dt1\nsub_dt_dt\nTimeDelta.days\nabs"),
    }
}

// ---- prefix-paths ----------------------------------------------------------

/// Join every file name in a list onto a root directory.
fn prefix_paths() -> Problem {
    Problem {
        name: "prefix-paths",
        fn_name: "prefix_files",
        inputs: vec![
            ("root".into(), TypeExpr::nominal("Path")),
            ("filenames".into(), TypeExpr::list_of(TypeExpr::nominal("Str"))),
        ],
        return_type: TypeExpr::list_of(TypeExpr::nominal("Path")),
        error_fn: |v, _p, c| {
            let Value::List(actual) = v else { return f64::INFINITY };
            let Value::List(exp) = &c.expected else { return f64::INFINITY };
            let mut texts = Vec::with_capacity(actual.len());
            for el in actual {
                match el {
                    Value::Path(p) => texts.push(p.text()),
                    _ => return f64::INFINITY,
                }
            }
            let exp_texts: Vec<String> = exp
                .iter()
                .map(|el| match el {
                    Value::Path(p) => p.text(),
                    _ => unreachable!("expected lists hold paths"),
                })
                .collect();
            levenshtein(&texts, &exp_texts) as f64
        },
        generator: |r| {
            let absolute = r.random_bool(0.5);
            let depth = r.random_range(0..=3usize);
            let mut root_text = if absolute { "/".to_string() } else { String::new() };
            let segs: Vec<String> = (0..depth)
                .map(|_| {
                    let l = r.random_range(1..=5);
                    rand_lower(r, l)
                })
                .collect();
            root_text.push_str(&segs.join("/"));
            let root = PathValue::new(&root_text);
            let n = r.random_range(0..=10usize);
            let names: Vec<String> = (0..n)
                .map(|_| {
                    let l = r.random_range(1..=6);
                    let stem = rand_lower(r, l);
                    let ext = rand_lower(r, 3);
                    format!("{stem}.{ext}")
                })
                .collect();
            // Expected via plain text concatenation, independent of the
            // library's segment-based join.
            let expected: Vec<Value> = names
                .iter()
                .map(|name| {
                    let rt = root.text();
                    let joined = if rt == "." {
                        name.clone()
                    } else if rt == "/" {
                        format!("/{name}")
                    } else {
                        format!("{rt}/{name}")
                    };
                    Value::Path(PathValue::new(&joined))
                })
                .collect();
            Case {
                inputs: vec![
                    Value::Path(root),
                    Value::List(names.into_iter().map(Value::Str).collect()),
                ],
                expected: Value::List(expected),
                expected_printed: String::new(),
            }
        },
        known_genome: Some(
            "input:filenames\nOPEN\nlocal:0\nPath\ninput:root\nPath.join\nCLOSE\nmap",
        ),
    }
}

// ---- filter-bounds ---------------------------------------------------------

/// Keep the elements of a list lying within `[lower, upper]`. Generic over
/// the element family: each case is all-Int, all-Float, or all-Str.
fn filter_bounds() -> Problem {
    let bound = TypeExpr::union(vec![
        TypeExpr::nominal("Int"),
        TypeExpr::nominal("Float"),
        TypeExpr::nominal("Str"),
    ]);
    let t = TypeExpr::var("T", Some(bound));
    Problem {
        name: "filter-bounds",
        fn_name: "filter_bounds",
        inputs: vec![
            ("lst".into(), TypeExpr::list_of(t.clone())),
            ("lower".into(), t.clone()),
            ("upper".into(), t.clone()),
        ],
        return_type: TypeExpr::list_of(t),
        error_fn: |v, _p, c| list_edit_err(v, &c.expected),
        generator: |r| {
            let family = r.random_range(0..3u8);
            let draw = |r: &mut ChaCha8Rng| match family {
                0 => Value::Int(rand_int(r)),
                1 => Value::Float(rand_float(r)),
                _ => {
                    let l = r.random_range(0..=10);
                    Value::Str(rand_lower(r, l))
                }
            };
            let n = r.random_range(0..=50usize);
            let lst: Vec<Value> = (0..n).map(|_| draw(r)).collect();
            let lower = draw(r);
            let upper = draw(r);
            let expected: Vec<Value> = lst
                .iter()
                .filter(|x| {
                    lower.compare(x).is_some_and(|o| o.is_le())
                        && x.compare(&upper).is_some_and(|o| o.is_le())
                })
                .cloned()
                .collect();
            Case {
                inputs: vec![Value::List(lst), lower, upper],
                expected: Value::List(expected),
                expected_printed: String::new(),
            }
        },
        known_genome: Some(
            "input:lst\nOPEN\ninput:upper\nlocal:0\nle\ninput:lower\nlocal:0\nlt\nlt\nCLOSE\nfilter",
        ),
    }
}

// ---- number-io -------------------------------------------------------------

/// Print the sum of a float and an integer. Graded on the print channel.
fn number_io() -> Problem {
    Problem {
        name: "number-io",
        fn_name: "number_io",
        inputs: vec![
            ("f".into(), TypeExpr::nominal("Float")),
            ("i".into(), TypeExpr::nominal("Int")),
        ],
        return_type: TypeExpr::nominal("Float"),
        error_fn: |_v, printed, c| {
            let target = c.expected.clone().into_float();
            match printed.trim().parse::<f64>() {
                Ok(p) => {
                    let d = (p - target).abs();
                    if d < 1e-4 {
                        0.0
                    } else {
                        d
                    }
                }
                Err(_) => f64::INFINITY,
            }
        },
        generator: |r| {
            let f = rand_float(r);
            let i = rand_int(r);
            let expected = Value::Float(f + i as f64);
            Case {
                expected_printed: expected.printed_form(),
                inputs: vec![Value::Float(f), Value::Int(i)],
                expected,
                }
        },
        known_genome: Some("input:i\ninput:f\nadd\nprint_tap"),
    }
}

// ---- median ----------------------------------------------------------------

fn median() -> Problem {
    Problem {
        name: "median",
        fn_name: "median",
        inputs: vec![
            ("a".into(), TypeExpr::nominal("Int")),
            ("b".into(), TypeExpr::nominal("Int")),
            ("c".into(), TypeExpr::nominal("Int")),
        ],
        return_type: TypeExpr::nominal("Int"),
        error_fn: |v, _p, c| int_err(v, c.expected.clone().into_int()),
        generator: |r| {
            let (a, b, c) = (rand_int(r), rand_int(r), rand_int(r));
            let mut s = [a, b, c];
            s.sort_unstable();
            Case {
                inputs: vec![Value::Int(a), Value::Int(b), Value::Int(c)],
                expected: Value::Int(s[1]),
                expected_printed: String::new(),
            }
        },
        known_genome: Some("input:c\ninput:b\ninput:a\nmax\nmin\ninput:b\ninput:a\nmin\nmax"),
    }
}

// ---- smallest --------------------------------------------------------------

fn smallest() -> Problem {
    Problem {
        name: "smallest",
        fn_name: "smallest",
        inputs: vec![
            ("a".into(), TypeExpr::nominal("Int")),
            ("b".into(), TypeExpr::nominal("Int")),
            ("c".into(), TypeExpr::nominal("Int")),
            ("d".into(), TypeExpr::nominal("Int")),
        ],
        return_type: TypeExpr::nominal("Int"),
        error_fn: |v, _p, c| int_err(v, c.expected.clone().into_int()),
        generator: |r| {
            let vals = [rand_int(r), rand_int(r), rand_int(r), rand_int(r)];
            Case {
                inputs: vals.iter().map(|&i| Value::Int(i)).collect(),
                expected: Value::Int(*vals.iter().min().unwrap()),
                expected_printed: String::new(),
            }
        },
        known_genome: Some("input:d\ninput:c\nmin\ninput:b\nmin\ninput:a\nmin"),
    }
}

// ---- negative-to-zero ------------------------------------------------------

fn negative_to_zero() -> Problem {
    Problem {
        name: "negative-to-zero",
        fn_name: "negative_to_zero",
        inputs: vec![("lst".into(), TypeExpr::list_of(TypeExpr::nominal("Int")))],
        return_type: TypeExpr::list_of(TypeExpr::nominal("Int")),
        error_fn: |v, _p, c| list_edit_err(v, &c.expected),
        generator: |r| {
            let n = r.random_range(0..=50usize);
            let lst: Vec<i64> = (0..n).map(|_| rand_int(r)).collect();
            Case {
                expected: Value::List(lst.iter().map(|&i| Value::Int(i.max(0))).collect()),
                inputs: vec![Value::List(lst.into_iter().map(Value::Int).collect())],
                expected_printed: String::new(),
            }
        },
        known_genome: Some("input:lst\nOPEN\nconst:Int:0\nlocal:0\nmax\nCLOSE\nmap"),
    }
}

// ---- vector-average --------------------------------------------------------

fn vector_average() -> Problem {
    Problem {
        name: "vector-average",
        fn_name: "vector_average",
        inputs: vec![("lst".into(), TypeExpr::list_of(TypeExpr::nominal("Float")))],
        return_type: TypeExpr::nominal("Float"),
        error_fn: |v, _p, c| match v {
            Value::Float(f) => {
                let d = (f - c.expected.clone().into_float()).abs();
                if d < 1e-4 {
                    0.0
                } else {
                    d
                }
            }
            _ => f64::INFINITY,
        },
        generator: |r| {
            let n = r.random_range(1..=50usize);
            let lst: Vec<f64> = (0..n).map(|_| rand_float(r)).collect();
            let mean = lst.iter().sum::<f64>() / n as f64;
            Case {
                inputs: vec![Value::List(lst.into_iter().map(Value::Float).collect())],
                expected: Value::Float(mean),
                expected_printed: String::new(),
            }
        },
        known_genome: Some("input:lst\nlen\ninput:lst\nsum\ndiv"),
    }
}

// ---- compare-string-lengths ------------------------------------------------

/// True iff the three strings have strictly increasing lengths.
fn compare_string_lengths() -> Problem {
    Problem {
        name: "compare-string-lengths",
        fn_name: "compare_string_lengths",
        inputs: vec![
            ("s1".into(), TypeExpr::nominal("Str")),
            ("s2".into(), TypeExpr::nominal("Str")),
            ("s3".into(), TypeExpr::nominal("Str")),
        ],
        return_type: TypeExpr::nominal("Bool"),
        error_fn: |v, _p, c| match (v, &c.expected) {
            (Value::Bool(a), Value::Bool(e)) => f64::from(a != e),
            _ => f64::INFINITY,
        },
        generator: |r| {
            // Bias a third of cases toward the positive class, which is rare
            // under independent lengths.
            let lens = if r.random_bool(1.0 / 3.0) {
                let l1 = r.random_range(0..=8usize);
                let l2 = r.random_range(l1 + 1..=9);
                let l3 = r.random_range(l2 + 1..=10);
                [l1, l2, l3]
            } else {
                [
                    r.random_range(0..=10usize),
                    r.random_range(0..=10),
                    r.random_range(0..=10),
                ]
            };
            let s: Vec<String> = lens.iter().map(|&l| rand_printable(r, l)).collect();
            let expected = lens[0] < lens[1] && lens[1] < lens[2];
            Case {
                inputs: s.into_iter().map(Value::Str).collect(),
                expected: Value::Bool(expected),
                expected_printed: String::new(),
            }
        },
        known_genome: Some(
            "input:s3\nlen\ninput:s2\nlen\nlt\ninput:s2\nlen\ninput:s1\nlen\nlt\nand",
        ),
    }
}

// ---- replace-space-with-newline --------------------------------------------

/// Print the input with spaces turned into newlines; return the count of
/// non-space characters. Graded on both channels.
fn replace_space_with_newline() -> Problem {
    Problem {
        name: "replace-space-with-newline",
        fn_name: "replace_space_with_newline",
        inputs: vec![("input1".into(), TypeExpr::nominal("Str"))],
        return_type: TypeExpr::nominal("Int"),
        error_fn: |v, printed, c| {
            let Value::Int(ret) = v else { return f64::INFINITY };
            let expect_ret = c.expected.clone().into_int();
            let pa: Vec<char> = printed.chars().collect();
            let pe: Vec<char> = c.expected_printed.chars().collect();
            levenshtein(&pa, &pe) as f64 + (ret - expect_ret).abs() as f64
        },
        generator: |r| {
            let n = r.random_range(0..=20usize);
            let s: String = (0..n)
                .map(|_| {
                    if r.random_bool(0.2) {
                        ' '
                    } else {
                        // Printable, non-space (space is 32).
                        r.random_range(33u8..=126) as char
                    }
                })
                .collect();
            let spaces = s.chars().filter(|&c| c == ' ').count();
            Case {
                expected: Value::Int((s.chars().count() - spaces) as i64),
                expected_printed: s.replace(' ', "\n"),
                inputs: vec![Value::Str(s)],
            }
        },
        known_genome: Some(
            "const:Str:\"\\n\"\nconst:Int:-87\nconst:Str:\"\\n\"\nconst:Str:\" \"\ninput:input1\nStr.replace\nprint_tap\nStr.count\ninput:input1\nlen\nsub",
        ),
    }
}

// ---- Small Value accessors used by error functions -------------------------

impl Value {
    fn into_int(self) -> i64 {
        match self {
            Value::Int(i) => i,
            other => panic!("expected Int case target, got {other:?}"),
        }
    }

    fn into_float(self) -> f64 {
        match self {
            Value::Float(f) => f,
            other => panic!("expected Float case target, got {other:?}"),
        }
    }
}

// ---- Tests -----------------------------------------------------------------
