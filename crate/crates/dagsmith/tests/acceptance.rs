//! Acceptance gate: one test per criterion, each printing a single
//! `ACCEPTANCE <name>: PASS|FAIL` line (run with `-- --nocapture` to see the
//! lines on success). Thresholds and tolerances are asserted exactly as
//! stated; failures panic with diagnostics after printing the FAIL line.

use std::panic::AssertUnwindSafe;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dagsmith::bench::{all_problems, derive_seed, find_problem};
use dagsmith::codegen::{emit, parse_and_check};
use dagsmith::dag::{evaluate, validate, DagNode, ProgramDag, DEFAULT_NODE_BUDGET};
use dagsmith::evolve::{random_genome, run_evolution, simplify, Evaluator, RunConfig};
use dagsmith::expr::{Expression, GeneWeights};
use dagsmith::push::{compile, parse_genome, plushy_to_push, Compiler};
use dagsmith::types::TypeExpr;
use dagsmith::value::Value;

fn criterion<F: FnOnce() -> Result<(), String>>(name: &str, f: F) {
    // Write through the raw stderr handle: the harness captures the print
    // macros on passing tests, and these lines must always reach the log.
    fn verdict(name: &str, verdict: &str) {
        use std::io::Write;
        let _ = writeln!(std::io::stderr().lock(), "ACCEPTANCE {name}: {verdict}");
    }
    match std::panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => verdict(name, "PASS"),
        Ok(Err(msg)) => {
            verdict(name, "FAIL");
            panic!("{name}: {msg}");
        }
        Err(cause) => {
            verdict(name, "FAIL");
            std::panic::resume_unwind(cause);
        }
    }
}

// ---- 1. Type-safety fuzzing ------------------------------------------------

#[test]
fn type_safety_fuzzing() {
    criterion("type-safety-fuzzing", || {
        let started = Instant::now();
        let weights = GeneWeights::default();
        let mut compiled_total = 0usize;
        for (pi, p) in all_problems().iter().enumerate() {
            let reg = p.registry();
            let (cases, _) = p.generate(17, 1, 0);
            let named: Vec<(String, Value)> = p
                .inputs
                .iter()
                .map(|(n, _)| n.clone())
                .zip(cases[0].inputs.iter().cloned())
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xF0_5A, pi as u64));
            for i in 0..10_000 {
                let genome = random_genome(&reg, &weights, (1, 50), &mut rng);
                let Ok(dag) = compile(&plushy_to_push(&genome), &p.return_type, &reg) else {
                    continue;
                };
                compiled_total += 1;
                if let Err(v) = validate(&dag, reg.hierarchy()) {
                    return Err(format!(
                        "{} genome {i}: compiled DAG fails validation: {v}\n{}",
                        p.name,
                        dag.dump()
                    ));
                }
                // Any outcome is fine as long as it is a declared EvalError;
                // a panic would abort the test (and fail the criterion).
                let _ = dagsmith::dag::evaluate_with_budget(&dag, &named, DEFAULT_NODE_BUDGET);
            }
        }
        let secs = started.elapsed().as_secs_f64();
        println!("  fuzzed 100000 genomes, {compiled_total} compiled, {secs:.0}s");
        if secs >= 300.0 {
            return Err(format!("runtime budget exceeded: {secs:.0}s >= 300s"));
        }
        if compiled_total == 0 {
            return Err("no random genome compiled; generator or compiler is broken".into());
        }
        Ok(())
    });
}

// ---- 2. Compilation trace fidelity ------------------------------------------

/// `name : type` lines for the dag stack, bottom first.
fn dag_stack(c: &Compiler<'_>) -> Vec<String> {
    c.state
        .dags
        .iter()
        .map(|d: &Arc<DagNode>| format!("{} : {}", d.expr.display_name(), d.spec.ret))
        .collect()
}

#[test]
fn compilation_trace_fidelity() {
    criterion("compilation-trace-fidelity", || {
        let mut reg = dagsmith::library::standard_registry();
        let list_str = TypeExpr::list_of(TypeExpr::nominal("Str"));
        reg.register(Expression::input("MyList", list_str.clone())).unwrap();

        // First-three-elements program, stepped one item at a time; the dag
        // stack must match the hand trace after every step.
        let genome = parse_genome(
            "input:MyList\ninput:MyList\nlen\nconst:Int:3\nmin\ntake",
            &reg,
        )
        .unwrap();
        let program = plushy_to_push(&genome);
        let mut c = Compiler::new(&reg, list_str.clone(), Vec::new());
        c.load(&program);
        let expected: [&[&str]; 6] = [
            &["MyList : List[Str]"],
            &["MyList : List[Str]", "MyList : List[Str]"],
            &["MyList : List[Str]", "len : Int"],
            &["MyList : List[Str]", "len : Int", "3 : Int"],
            &["MyList : List[Str]", "min : Int"],
            &["take : List[Str]"],
        ];
        for (step, want) in expected.iter().enumerate() {
            if !c.step() {
                return Err(format!("compiler exhausted early at step {step}"));
            }
            let got = dag_stack(&c);
            if got != *want {
                return Err(format!(
                    "step {step}: dag stack {got:?}, expected {want:?}"
                ));
            }
        }
        let dag = c.finish().map_err(|e| format!("finish failed: {e}"))?;
        let want_dump = "Take : List[Str]\n  MyList : List[Str]\n  Min : Int\n    3 : Int\n    Len : Int\n      MyList : List[Str]\n";
        if dag.dump() != want_dump {
            return Err(format!("dump mismatch:\n{}\nexpected:\n{want_dump}", dag.dump()));
        }
        // Evaluation oracle for the reconstructed DAG.
        let out = evaluate(
            &ProgramDag::new(dag.root.clone()),
            &[(
                "MyList".into(),
                Value::List(vec![
                    Value::str("a"),
                    Value::str("b"),
                    Value::str("c"),
                    Value::str("d"),
                ]),
            )],
        )
        .map_err(|e| format!("evaluation failed: {e}"))?;
        let want = Value::List(vec![Value::str("a"), Value::str("b"), Value::str("c")]);
        if out.value != want {
            return Err(format!("DAG 1 evaluated to {:?}, expected {want:?}", out.value));
        }

        // Discard-and-revert: an unsatisfiable callable must leave all three
        // stacks exactly as they were.
        let mut c = Compiler::new(&reg, TypeExpr::nominal("Int"), Vec::new());
        c.load(&plushy_to_push(
            &parse_genome("const:Str:\"a\"", &reg).unwrap(),
        ));
        c.run();
        let before = c.state.clone();
        let add = reg.lookup("add").expect("add registered").clone();
        if c.bind_arguments(&add) {
            return Err("add bound against a lone Str; should be discarded".into());
        }
        if c.state != before {
            return Err("stacks changed across a discarded expression".into());
        }

        // Unsatisfiable whole program: [3, take] compiles to no List.
        let genome = parse_genome("const:Int:3\ntake", &reg).unwrap();
        if compile(&plushy_to_push(&genome), &list_str, &reg).is_ok() {
            return Err("[3, take] should be a CompileFailure for a List target".into());
        }
        Ok(())
    });
}

// ---- 3. Reification --------------------------------------------------------

#[test]
fn reification_examples() {
    criterion("reification", || {
        let mut reg = dagsmith::library::standard_registry();
        let list_str = TypeExpr::list_of(TypeExpr::nominal("Str"));
        reg.register(Expression::input("MyList", list_str.clone())).unwrap();

        // Take over a List[Str] child must reify its bare-List return.
        let genome = parse_genome("const:Int:3\ninput:MyList\ntake", &reg).unwrap();
        let dag = compile(&plushy_to_push(&genome), &list_str, &reg)
            .map_err(|e| format!("take program failed to compile: {e}"))?;
        if dag.ret() != &list_str {
            return Err(format!("take reified to {}, expected List[Str]", dag.ret()));
        }

        // MaxType on random numeric pairs: the static type equals the
        // evaluated value's most specific type, 1000 trials.
        let reg = dagsmith::library::standard_registry();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..1000 {
            let ops = ["add", "sub", "mul", "min", "max"];
            let op = ops[rng.random_range(0..ops.len())];
            let mk = |rng: &mut ChaCha8Rng| {
                if rng.random_bool(0.5) {
                    format!("const:Int:{}", rng.random_range(-9i64..=9))
                } else {
                    format!("const:Float:{:.1}", rng.random_range(-9.0f64..=9.0))
                }
            };
            let (a, b) = (mk(&mut rng), mk(&mut rng));
            let both_int = a.starts_with("const:Int") && b.starts_with("const:Int");
            let text = format!("{a}\n{b}\n{op}");
            let genome = parse_genome(&text, &reg).unwrap();
            let target = TypeExpr::union(vec![
                TypeExpr::nominal("Int"),
                TypeExpr::nominal("Float"),
            ]);
            let dag = compile(&plushy_to_push(&genome), &target, &reg)
                .map_err(|e| format!("trial {trial} `{text}`: {e}"))?;
            let want = TypeExpr::nominal(if both_int { "Int" } else { "Float" });
            if dag.ret() != &want {
                return Err(format!(
                    "trial {trial} `{text}`: static type {} but MaxType demands {want}",
                    dag.ret()
                ));
            }
            let out = evaluate(&dag, &[]).map_err(|e| format!("trial {trial}: {e}"))?;
            if out.value.most_specific_type() != want {
                return Err(format!(
                    "trial {trial} `{text}`: value {:?} disagrees with static type {want}",
                    out.value
                ));
            }
        }
        Ok(())
    });
}

// ---- 4. HOF oracle equivalence ---------------------------------------------

#[test]
fn hof_oracle_equivalence() {
    criterion("hof-oracle-equivalence", || {
        let mut reg = dagsmith::library::standard_registry();
        let list_int = TypeExpr::list_of(TypeExpr::nominal("Int"));
        reg.register(Expression::input("xs", list_int.clone())).unwrap();

        type MapOracle = fn(i64) -> i64;
        type FilterOracle = fn(i64) -> bool;
        let map_bodies: [(&str, MapOracle); 4] = [
            ("local:0\nabs", |x| x.abs()),
            ("const:Int:3\nlocal:0\nadd", |x| x + 3),
            ("local:0\nlocal:0\nmul", |x| x * x),
            ("const:Int:1\nlocal:0\nsub", |x| x - 1),
        ];
        let filter_bodies: [(&str, FilterOracle); 3] = [
            ("const:Int:0\nlocal:0\nlt", |x| x < 0),
            ("const:Int:2\nlocal:0\nge", |x| x >= 2),
            ("const:Int:0\nlocal:0\neq", |x| x == 0),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for trial in 0..1000 {
            let xs: Vec<i64> = (0..rng.random_range(0..=20))
                .map(|_| rng.random_range(-50..=50))
                .collect();
            let named = vec![(
                "xs".to_string(),
                Value::List(xs.iter().map(|&i| Value::Int(i)).collect()),
            )];
            let run = |body: &str, hof: &str| -> Result<Vec<i64>, String> {
                let text = format!("input:xs\nOPEN\n{body}\nCLOSE\n{hof}");
                let genome = parse_genome(&text, &reg).unwrap();
                let dag = compile(&plushy_to_push(&genome), &list_int, &reg)
                    .map_err(|e| format!("trial {trial} `{text}`: {e}"))?;
                let out = evaluate(&dag, &named).map_err(|e| format!("trial {trial}: {e}"))?;
                let Value::List(items) = out.value else {
                    return Err(format!("trial {trial}: non-list result"));
                };
                Ok(items
                    .into_iter()
                    .map(|v| match v {
                        Value::Int(i) => i,
                        other => panic!("non-int element {other:?}"),
                    })
                    .collect())
            };
            if rng.random_bool(0.5) {
                let (body, oracle) = map_bodies[rng.random_range(0..map_bodies.len())];
                let got = run(body, "map")?;
                let want: Vec<i64> = xs.iter().map(|&x| oracle(x)).collect();
                if got != want {
                    return Err(format!(
                        "trial {trial}: map body `{body}` on {xs:?} gave {got:?}, loop oracle {want:?}"
                    ));
                }
            } else {
                let (body, oracle) = filter_bodies[rng.random_range(0..filter_bodies.len())];
                let got = run(body, "filter")?;
                let want: Vec<i64> = xs.iter().copied().filter(|&x| oracle(x)).collect();
                if got != want {
                    return Err(format!(
                        "trial {trial}: filter body `{body}` on {xs:?} gave {got:?}, loop oracle {want:?}"
                    ));
                }
            }
        }
        Ok(())
    });
}

// ---- 5. Codegen golden tests -----------------------------------------------

#[test]
fn codegen_golden_tests() {
    criterion("codegen-golden-tests", || {
        let goldens = [
            (
                "days-between",
                "def days_between(dt1, dt2):\n    return abs(sub(dt1, dt2).days())\n",
            ),
            (
                "prefix-paths",
                "def prefix_files(root, filenames):\n    return map(lambda _0: root.join(Path(_0)), filenames)\n",
            ),
            (
                "filter-bounds",
                "def filter_bounds(lst, lower, upper):\n    return filter(lambda _0: lt(lt(_0, lower), le(_0, upper)), lst)\n",
            ),
        ];
        for (name, golden) in goldens {
            let p = find_problem(name).unwrap();
            let reg = p.registry();
            let genome = parse_genome(p.known_genome.unwrap(), &reg).unwrap();
            let dag = compile(&plushy_to_push(&genome), &p.return_type, &reg)
                .map_err(|e| format!("{name}: {e}"))?;
            let params: Vec<String> = p.inputs.iter().map(|(n, _)| n.clone()).collect();
            let unit = emit(&dag, p.fn_name, &params);
            if unit.text() != golden {
                return Err(format!(
                    "{name} golden mismatch:\n--- got\n{}\n--- want\n{golden}",
                    unit.text()
                ));
            }
            // Round-trip: parse the emitted source, re-type it, and check the
            // two programs evaluate identically on 100 benchmark inputs.
            let parsed = parse_and_check(&unit.text(), &reg, &p.inputs, &p.return_type)
                .map_err(|e| format!("{name}: reparse failed: {e}"))?;
            let (cases, _) = p.generate(1234, 100, 0);
            for (i, case) in cases.iter().enumerate() {
                let named: Vec<(String, Value)> = p
                    .inputs
                    .iter()
                    .map(|(n, _)| n.clone())
                    .zip(case.inputs.iter().cloned())
                    .collect();
                let a = evaluate(&dag, &named).map_err(|e| format!("{name} case {i}: {e}"))?;
                let b = evaluate(&parsed.dag, &named)
                    .map_err(|e| format!("{name} case {i} (reparsed): {e}"))?;
                if a.value != b.value || a.printed != b.printed {
                    return Err(format!(
                        "{name} case {i}: emit/parse round-trip changed behavior"
                    ));
                }
            }
        }
        Ok(())
    });
}

// ---- 6. Desk-scale evolution -----------------------------------------------

#[test]
fn desk_scale_evolution() {
    criterion("desk-scale-evolution", || {
        let targets: [(&str, usize); 4] = [
            ("days-between", 3),
            ("filter-bounds", 3),
            ("smallest", 2),
            ("median", 2),
        ];
        let mut failures = Vec::new();
        for (name, need) in targets {
            let p = find_problem(name).unwrap();
            let mut solved = 0usize;
            let mut curves = String::new();
            for seed in 1..=5u64 {
                let cfg = RunConfig {
                    population_size: 300,
                    max_generations: 100,
                    training_cases: 100,
                    test_cases: 200,
                    seed,
                    ..RunConfig::default()
                };
                let started = Instant::now();
                let report = run_evolution(&p, &cfg);
                let secs = started.elapsed().as_secs_f64();
                if secs >= 600.0 {
                    return Err(format!("{name} seed {seed}: run took {secs:.0}s >= 10min"));
                }
                if report.solved {
                    solved += 1;
                } else {
                    curves.push_str(&format!("  {name} seed {seed} error curve:\n"));
                    for s in &report.history {
                        curves.push_str(&format!(
                            "    gen {:>3}  best {:>12.1}  mean {:>14.1}\n",
                            s.generation, s.best_total_error, s.mean_total_error
                        ));
                    }
                }
            }
            println!("  {name}: solved {solved}/5 (need {need})");
            if solved < need {
                failures.push(format!(
                    "{name}: solved {solved}/5 < {need}/5; per-generation curves:\n{curves}"
                ));
            }
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(failures.join("\n"))
        }
    });
}

// ---- 7. Simplification safety ----------------------------------------------

#[test]
fn simplification_safety() {
    criterion("simplification", || {
        // A genuinely evolved solution, then the hill-climbing cleanup; no
        // accepted step may worsen any training case, and length shrinks
        // monotonically to at most the original.
        let p = find_problem("days-between").unwrap();
        let cfg = RunConfig {
            population_size: 300,
            max_generations: 100,
            training_cases: 60,
            test_cases: 100,
            seed: 1,
            ..RunConfig::default()
        };
        let report = run_evolution(&p, &cfg);
        if !report.solved {
            return Err("seed 1 days-between run unexpectedly failed to solve".into());
        }
        let (pre, post) = (
            report.pre_simplification_length.unwrap(),
            report.genome_length.unwrap(),
        );
        if post > pre {
            return Err(format!("simplified length {post} > original {pre}"));
        }

        // Direct harness: junk-padded known solution; element-wise
        // non-worsening is asserted inside simplify() on every accepted step,
        // and re-checked here.
        let p = find_problem("median").unwrap();
        let reg = p.registry();
        let (train, _) = p.generate(8, 50, 0);
        let ev = Evaluator::new(&p, &reg, &train, 1e6, DEFAULT_NODE_BUDGET);
        let mut text = p.known_genome.unwrap().to_string();
        for _ in 0..8 {
            text.push_str("\nconst:Str:\"x\"");
        }
        let genome = parse_genome(&text, &reg).unwrap();
        let before = ev.grade(&genome);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (slim, errors) = simplify(&genome, &before.errors, &ev, 300, &mut rng);
        if slim.0.len() > genome.0.len() {
            return Err("simplification grew the genome".into());
        }
        for (i, (new, old)) in errors.iter().zip(&before.errors).enumerate() {
            if new > old {
                return Err(format!("case {i} worsened: {new} > {old}"));
            }
        }
        Ok(())
    });
}

// ---- 8. Reproducibility ----------------------------------------------------

#[test]
fn reproducibility() {
    criterion("reproducibility", || {
        let bin = env!("CARGO_BIN_EXE_dagsmith");
        let run = |workers: &str, dir: &std::path::Path| -> Result<Vec<u8>, String> {
            let status = Command::new(bin)
                .args([
                    "bench",
                    "--problem",
                    "filter-bounds",
                    "--runs",
                    "3",
                    "--seed-base",
                    "7",
                    "--out",
                ])
                .arg(dir)
                .env("DAGSMITH_WORKERS", workers)
                .output()
                .map_err(|e| format!("spawn failed: {e}"))?;
            if !status.status.success() {
                return Err(format!(
                    "bench exited with {:?}:\n{}",
                    status.status.code(),
                    String::from_utf8_lossy(&status.stderr)
                ));
            }
            std::fs::read(dir.join("bench_filter-bounds.json"))
                .map_err(|e| format!("aggregate missing: {e}"))
        };
        let serial_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let parallel_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let serial = run("1", serial_dir.path())?;
        let parallel = run("4", parallel_dir.path())?;
        if serial != parallel {
            return Err("serial and parallel aggregates differ byte-wise".into());
        }
        if serial.is_empty() {
            return Err("aggregate file is empty".into());
        }
        Ok(())
    });
}
