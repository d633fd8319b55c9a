//! Fuzzes the whole genome-to-program pipeline. The first input byte picks a
//! benchmark problem; each following byte decodes to one gene (OPEN, CLOSE,
//! or a registry expression). Whatever the bytes, compilation must either
//! fail cleanly or produce a validating DAG that evaluates without panicking.

#![no_main]

use std::sync::LazyLock;

use dagsmith::bench::{all_problems, Case, Problem};
use dagsmith::dag::{evaluate_with_budget, validate};
use dagsmith::expr::Registry;
use dagsmith::push::{compile, plushy_to_push, Gene, PlushyGenome};
use dagsmith::value::Value;
use libfuzzer_sys::fuzz_target;

const MAX_GENES: usize = 400;
const NODE_BUDGET: u64 = 100_000;

static PROBLEMS: LazyLock<Vec<(Problem, Registry, Case)>> = LazyLock::new(|| {
    all_problems()
        .into_iter()
        .map(|p| {
            let reg = p.registry();
            let case = p.generate(0, 1, 0).0.remove(0);
            (p, reg, case)
        })
        .collect()
});

fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else { return };
    let (p, reg, case) = &PROBLEMS[pick as usize % PROBLEMS.len()];
    let exprs = reg.expressions();
    let genes = rest
        .iter()
        .take(MAX_GENES)
        .map(|&b| match b as usize % (exprs.len() + 2) {
            0 => Gene::Open,
            1 => Gene::Close,
            k => Gene::Expr(exprs[k - 2].clone()),
        })
        .collect();
    if let Ok(dag) = compile(&plushy_to_push(&PlushyGenome::new(genes)), &p.return_type, reg) {
        validate(&dag, reg.hierarchy()).expect("compiled DAG validates");
        let inputs: Vec<(String, Value)> = p
            .inputs
            .iter()
            .map(|(name, _)| name.clone())
            .zip(case.inputs.iter().cloned())
            .collect();
        // Runtime errors (division by zero, budget exhaustion, ...) are
        // legitimate outcomes; panics and type confusion are not.
        let _ = evaluate_with_budget(&dag, &inputs, NODE_BUDGET);
    }
});
