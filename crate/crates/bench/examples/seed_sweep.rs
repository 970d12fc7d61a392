//! Seed-robustness sweep: every catalog anchor must classify to its
//! expected tag for arbitrary seeds, not just the ones the tests pin.
//! Run with `cargo run --release -p maskdisk-bench --example seed_sweep`.

use maskdisk_core::catalog::{build, CatalogItem, ExampleId};
use maskdisk_core::classify::{classify_qutrit_target_set, TargetTag};
use maskdisk_core::optimize::SearchConfig;
use maskdisk_core::Tolerance;

fn main() {
    let t = Tolerance::default();
    let cases = [
        (ExampleId::TypeI, TargetTag::TypeI),
        (ExampleId::TypeII, TargetTag::TypeII),
        (ExampleId::TypeIII, TargetTag::TypeIII),
        (ExampleId::BellTriple, TargetTag::FiniteOrthogonalSet(3)),
        (ExampleId::PartialNoDisk, TargetTag::Other),
    ];
    let mut failures = 0;
    for (id, expected) in cases {
        let CatalogItem::TargetSet { states, spec } = build(id).unwrap() else {
            unreachable!()
        };
        for seed in [1u64, 42, 1234, 99991, 7_777_777, 0xDEADBEEF] {
            let v =
                classify_qutrit_target_set(&states, &spec, &SearchConfig::block_unitary(seed), &t)
                    .unwrap();
            let ok = v.tag == expected;
            if !ok {
                failures += 1;
            }
            println!(
                "{id} seed {seed}: {} {}",
                v.tag,
                if ok { "ok" } else { "MISMATCH" }
            );
        }
    }
    println!("failures: {failures}");
}
