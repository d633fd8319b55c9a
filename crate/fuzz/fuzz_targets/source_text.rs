//! Fuzzes the source text parser and checker. The first input byte picks a
//! benchmark problem; the rest is parsed as a function definition against
//! that problem's inputs and return type. Anything accepted must yield a
//! validating DAG whose emitted source re-parses to identical text.

#![no_main]

use std::sync::LazyLock;

use dagsmith::bench::{all_problems, Problem};
use dagsmith::codegen::{emit, parse_and_check};
use dagsmith::dag::validate;
use dagsmith::expr::Registry;
use libfuzzer_sys::fuzz_target;

static PROBLEMS: LazyLock<Vec<(Problem, Registry)>> = LazyLock::new(|| {
    all_problems()
        .into_iter()
        .map(|p| {
            let reg = p.registry();
            (p, reg)
        })
        .collect()
});

fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let (p, reg) = &PROBLEMS[pick as usize % PROBLEMS.len()];
    if let Ok(parsed) = parse_and_check(text, reg, &p.inputs, &p.return_type) {
        validate(&parsed.dag, reg.hierarchy()).expect("accepted source validates");
        let printed = emit(&parsed.dag, &parsed.name, &parsed.params).text();
        let again = parse_and_check(&printed, reg, &p.inputs, &p.return_type)
            .expect("emitted source re-parses");
        let twice = emit(&again.dag, &again.name, &again.params).text();
        assert_eq!(printed, twice, "emission is not a fixed point");
    }
});
