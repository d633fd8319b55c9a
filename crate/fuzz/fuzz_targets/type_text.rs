//! Fuzzes the type expression parser. Anything that parses must print back
//! to a form that re-parses to the same type, and must be self-subtyping.

#![no_main]

use std::sync::LazyLock;

use dagsmith::types::{parse_type_in, TypeHierarchy};
use libfuzzer_sys::fuzz_target;

static HIERARCHY: LazyLock<TypeHierarchy> = LazyLock::new(TypeHierarchy::standard);

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_type_in(text, &HIERARCHY) {
        let printed = t.to_string();
        let again = parse_type_in(&printed, &HIERARCHY).expect("printed type re-parses");
        assert_eq!(t, again, "round-trip changed `{printed}`");
        assert!(HIERARCHY.subtypes(&t, &t), "`{printed}` is not a subtype of itself");
    }
});
