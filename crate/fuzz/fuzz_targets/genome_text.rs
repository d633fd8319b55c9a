//! Fuzzes the genome text parser. The first input byte picks a benchmark
//! problem (so `input:` genes can resolve); the rest is parsed as genome
//! text. Anything that parses must format back to text that parses to the
//! same genome.

#![no_main]

use std::sync::LazyLock;

use dagsmith::bench::all_problems;
use dagsmith::expr::Registry;
use dagsmith::push::{format_genome, parse_genome};
use libfuzzer_sys::fuzz_target;

static REGISTRIES: LazyLock<Vec<Registry>> =
    LazyLock::new(|| all_problems().iter().map(|p| p.registry()).collect());

fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let reg = &REGISTRIES[pick as usize % REGISTRIES.len()];
    if let Ok(genome) = parse_genome(text, reg) {
        let printed = format_genome(&genome);
        let again = parse_genome(&printed, reg).expect("formatted genome re-parses");
        assert_eq!(genome, again, "round-trip changed:\n{printed}");
    }
});
