//! Qubit-classifier robustness: each machine family must keep its verdict
//! across seeds at the reduced search budget the bulk tests use.

use maskdisk_core::classify::{classify_qubit_maskable_set, TargetTag};
use maskdisk_core::masking::{MarginalSpec, MaskingMachine};
use maskdisk_core::optimize::{random_unitary, seeded_rng, SearchConfig};
use maskdisk_core::{CMatrix, CVector, PureState, Tolerance, C64};

fn main() {
    let t = Tolerance::default();
    let mut failures = 0usize;
    let mut rng = seeded_rng(0x5EEE);
    for trial in 0..30 {
        // completely degenerate d = 3, third-root phases: two states
        let spec = MarginalSpec::completely_degenerate(3).unwrap();
        let legal = spec.legal_set();
        let v = random_unitary(&mut rng, 3);
        let w = 2.0 * std::f64::consts::PI / 3.0;
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(w.cos(), w.sin()),
            C64::new((2.0 * w).cos(), (2.0 * w).sin()),
        ]));
        let relative = &v * d * v.adjoint();
        let q = random_unitary(&mut rng, 3);
        let psi0 = legal.legal_state_from_unitary(&q).unwrap();
        let psi1 = legal.legal_state_from_unitary(&(&q * relative)).unwrap();
        let machine = MaskingMachine::from_columns(
            &[
                PureState::normalized(psi0.amplitudes().clone()).unwrap(),
                PureState::normalized(psi1.amplitudes().clone()).unwrap(),
            ],
            3,
            3,
            &t,
        )
        .unwrap();
        for seed in [1u64, 99991, 0xDEADBEEF] {
            let mut cfg = SearchConfig::projective(seed);
            cfg.grid_points = 512;
            cfg.descents = 8;
            cfg.max_iter = 300;
            let verdict = classify_qubit_maskable_set(&machine, &cfg, &t).unwrap();
            if verdict.tag != TargetTag::TwoStates {
                println!("trial {trial} seed {seed}: got {}", verdict.tag);
                failures += 1;
            }
        }
    }
    println!("failures: {failures}");
}
