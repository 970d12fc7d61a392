//! Shared fixtures for the benchmarks.

use maskdisk_core::catalog::{build, CatalogItem, ExampleId};
use maskdisk_core::masking::{ClaimedSet, MaskingMachine};
use maskdisk_core::optimize::{random_state, seeded_rng};
use maskdisk_core::{PureState, Tolerance};

/// The four-level machine with its complete claimed set.
pub fn nd_fixture() -> (MaskingMachine, ClaimedSet) {
    match build(ExampleId::NdN3D4).expect("catalog entry") {
        CatalogItem::Machine { machine, claimed } => (machine, claimed.expect("finite claim")),
        _ => unreachable!("nd_n3_d4 is a machine entry"),
    }
}

/// A deterministic batch of bipartite states.
pub fn random_bipartite_states(count: usize, d_a: usize, d_b: usize) -> Vec<PureState> {
    let mut rng = seeded_rng(0xBE9C);
    (0..count)
        .map(|_| {
            random_state(&mut rng, d_a * d_b)
                .with_bipartite(d_a, d_b)
                .expect("consistent dims")
        })
        .collect()
}

pub fn tol() -> Tolerance {
    Tolerance::default()
}
