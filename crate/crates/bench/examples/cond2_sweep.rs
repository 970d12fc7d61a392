//! Omission-detection sweep: for several seeds, dropping any one of the
//! three maskable disks must be caught with a witness on the dropped disk.

use maskdisk_core::catalog::{build, CatalogItem, ExampleId};
use maskdisk_core::masking::{verify_condition1, verify_condition2, ClaimedSet};
use maskdisk_core::optimize::SearchConfig;
use maskdisk_core::Tolerance;

fn main() {
    let t = Tolerance::default();
    let CatalogItem::Machine { machine, claimed } = build(ExampleId::NdN3D4).unwrap() else {
        unreachable!()
    };
    let disks = claimed.unwrap().disks;
    let full = ClaimedSet {
        states: vec![],
        disks: disks.clone(),
    };
    let cond1 = verify_condition1(&machine, &full.sample_states(16).unwrap(), &t).unwrap();
    let mut failures = 0;
    for seed in [1u64, 42, 1234, 99991, 7_777_777, 0xDEADBEEF] {
        let cfg = SearchConfig::projective(seed);
        let report = verify_condition2(&machine, &full, &cond1, &cfg, &t).unwrap();
        if !report.passed {
            println!("seed {seed}: full claim REJECTED (bad)");
            failures += 1;
        }
        for dropped in 0..3 {
            let kept: Vec<_> = disks
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != dropped)
                .map(|(_, d)| d.clone())
                .collect();
            let claim = ClaimedSet {
                states: vec![],
                disks: kept,
            };
            let report = verify_condition2(&machine, &claim, &cond1, &cfg, &t).unwrap();
            let caught = !report.passed
                && report
                    .counterexamples
                    .iter()
                    .all(|w| disks[dropped].contains_within(w, 1e-4));
            if !caught {
                println!(
                    "seed {seed} drop {dropped}: NOT caught (passed={}, witnesses={})",
                    report.passed,
                    report.counterexamples.len()
                );
                failures += 1;
            }
        }
        println!("seed {seed}: ok");
    }
    println!("failures: {failures}");
}
