mod common;

use common::{arb_instance, fixture};
use forcematch_core::divorces::DivorceStrategy;
use forcematch_core::format::{
    parse_instance, parse_matching, parse_strategies, parse_women_section, write_instance, write_strategies,
    write_women_section,
};
use forcematch_core::{run, Error, ManId, Side};
use proptest::prelude::*;

#[test]
fn fixtures_parse() {
    let inst = parse_instance(&fixture("two_stable.txt")).unwrap();
    assert_eq!((inst.n_women(), inst.n_men()), (2, 2));
    let cyc = parse_instance(&fixture("cyclic3.txt")).unwrap();
    let mu = parse_matching(&fixture("cyclic3_target.txt"), 3, 3).unwrap();
    assert_eq!(run(&cyc, Side::Men), mu);
}

#[test]
fn women_section_replaces_one_side() {
    let cyc = parse_instance(&fixture("cyclic3.txt")).unwrap();
    let text = write_women_section(cyc.prefs_w());
    assert_eq!(text, "W 0: 0\nW 1: 1 0 2\nW 2: 2 1 0\n");
    assert_eq!(&parse_women_section(&text, 3, 3).unwrap(), cyc.prefs_w());
    assert!(matches!(parse_women_section("W 0: 0\n", 2, 3), Err(Error::Parse { line: 2, .. })));
    assert!(matches!(parse_women_section("W 0: 0\nW 1: 1\nW 2:\n", 2, 3), Err(Error::Parse { line: 3, .. })));
}

#[test]
fn bad_headers() {
    for text in ["", "# only a comment\n", "x 1\n", "1\n", "1 1 1\n"] {
        assert!(matches!(parse_instance(text), Err(Error::Parse { line: 1, .. })), "{text:?}");
    }
    assert!(matches!(parse_instance("1 1\nW 0: 0\nM 0: 0\nM 1: 0\n"), Err(Error::Parse { line: 4, .. })));
    assert!(parse_strategies("w 0 sometimes: 1\n", 1, 2).is_err());
    assert!(parse_strategies("w 0 never:\nw 0 never:\n", 1, 2).is_err());
}

fn arb_strategy(nm: usize) -> impl Strategy<Value = DivorceStrategy> {
    prop_oneof![
        Just(DivorceStrategy::Never),
        proptest::collection::btree_set((0..nm).prop_map(ManId), 0..=nm).prop_map(DivorceStrategy::DivorceIfPartnerIn),
        proptest::collection::vec((1usize..10, (0..nm).prop_map(ManId)), 0..4).prop_map(DivorceStrategy::Scripted),
    ]
}

proptest! {
    #[test]
    fn instances_round_trip(inst in arb_instance(7, 7)) {
        let text = write_instance(&inst);
        prop_assert_eq!(&parse_instance(&text).unwrap(), &inst);
        let women = parse_women_section(&write_women_section(inst.prefs_w()), inst.n_women(), inst.n_men()).unwrap();
        prop_assert_eq!(&women, inst.prefs_w());
    }

    #[test]
    fn strategies_round_trip(s in proptest::collection::vec(arb_strategy(4), 0..5)) {
        prop_assert_eq!(parse_strategies(&write_strategies(&s), s.len(), 4).unwrap(), s);
    }
}
