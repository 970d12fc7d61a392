//! Parametrized builders for every worked example: masking machines, target
//! subspaces, and the continuous families they carry. These double as test
//! fixtures and as the payload of the CLI `example` subcommand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperdisk::Hyperdisk;
use crate::linalg::{
    generalized_pauli, orthonormal_span, CMatrix, CVector, DensityMatrix, Pauli, PureState,
    Tolerance, C64,
};
use crate::masking::{marginals_of, ClaimedSet, MarginalSpec, MaskingMachine};
use crate::optimize::seeded_rng;
use rand::Rng;

/// Stable identifiers of the catalog entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleId {
    NdN3D4,
    CdN3D2,
    BellTriple,
    PartialNoDisk,
    TypeI,
    TypeII,
    TypeIII,
    AppendixAFamily,
    AppendixBFamily,
}

impl ExampleId {
    pub const ALL: [ExampleId; 9] = [
        ExampleId::NdN3D4,
        ExampleId::CdN3D2,
        ExampleId::BellTriple,
        ExampleId::PartialNoDisk,
        ExampleId::TypeI,
        ExampleId::TypeII,
        ExampleId::TypeIII,
        ExampleId::AppendixAFamily,
        ExampleId::AppendixBFamily,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExampleId::NdN3D4 => "nd_n3_d4",
            ExampleId::CdN3D2 => "cd_n3_d2",
            ExampleId::BellTriple => "bell_triple",
            ExampleId::PartialNoDisk => "partial_no_disk",
            ExampleId::TypeI => "type_i",
            ExampleId::TypeII => "type_ii",
            ExampleId::TypeIII => "type_iii",
            ExampleId::AppendixAFamily => "appendix_a_family",
            ExampleId::AppendixBFamily => "appendix_b_family",
        }
    }
}

impl std::str::FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownExample(s.to_string()))
    }
}

impl std::fmt::Display for ExampleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a catalog entry builds to.
#[derive(Debug, Clone)]
pub enum CatalogItem {
    /// A masking machine plus, when it is finite, its claimed maskable set.
    Machine {
        machine: MaskingMachine,
        claimed: Option<ClaimedSet>,
    },
    /// A target subspace: orthonormal spanning states plus the marginal spec.
    TargetSet {
        states: Vec<PureState>,
        spec: MarginalSpec,
    },
}

/// Norm of the unnormalized third machine column of the `nd_n3_d4` entry
/// (the printed form has square norm 50/21; the stored column is normalized
/// by this constant).
pub fn nd_phi_perp_norm() -> f64 {
    (50.0_f64 / 21.0).sqrt()
}

fn ket(dim: usize, entries: &[(usize, C64)]) -> CVector {
    let mut v = CVector::zeros(dim);
    for &(i, z) in entries {
        v[i] = z;
    }
    v
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn phase(t: f64) -> C64 {
    C64::new(t.cos(), t.sin())
}

/// Unnormalized third column of the `nd_n3_d4` machine.
fn nd_phi_perp() -> CVector {
    ket(
        16,
        &[
            (0, re(2.0 / 3.0)),
            (5, re(-2.0_f64.sqrt() / 3.0)),
            (10, re(4.0 * 3.0_f64.sqrt() / 7.0)),
            (15, re(-6.0 / 7.0)),
        ],
    )
}

/// The nondegenerate `n = 3, d = 4` machine.
fn build_nd_machine(tol: &Tolerance) -> Result<MaskingMachine> {
    let col0 = ket(16, &[(0, re(1.0)), (5, re(2.0_f64.sqrt()))]) / re(3.0_f64.sqrt());
    let col1 = ket(16, &[(10, re(3.0_f64.sqrt())), (15, re(2.0))]) / re(7.0_f64.sqrt());
    let col2 = nd_phi_perp() / re(nd_phi_perp_norm());
    let mut m = CMatrix::zeros(16, 3);
    m.set_column(0, &col0);
    m.set_column(1, &col1);
    m.set_column(2, &col2);
    let spec = MarginalSpec::nondegenerate(&[0.4, 0.3, 0.2, 0.1])?;
    Ok(MaskingMachine::new(m, 4, 4, tol)?.with_claimed_spec(spec))
}

/// The input-space hyperdisks masked by the `nd_n3_d4` machine.
///
/// The first two are the stated families (their bases taken as the exact
/// pullbacks of the target disks; the printed input-space form carries the
/// opposite sign on the |2> components, which does not mask back onto the
/// target family). The stated pair is not the whole story, though: in the
/// diagonal four-level space the target span is the orthogonal complement
/// of a single vector whose mass pattern `sqrt(lambda_j)|w_j|` comes out
/// equal on all four levels, so the legality constraint reads "four unit
/// phasors sum to zero" and admits a third antipodal pairing
/// `(-|00> + 2|33>) + e^{i gamma} (sqrt2 |11> - sqrt3 |22>)`. Its pullback
/// is returned as the third disk: the machine masks all three.
pub fn nd_maskable_disks(tol: &Tolerance) -> Result<Vec<Hyperdisk>> {
    let machine = build_nd_machine(tol)?;
    let disk0 = Hyperdisk::new(
        vec![PureState::basis_state(3, 0), PureState::basis_state(3, 1)],
        vec![0.3_f64.sqrt(), 0.7_f64.sqrt()],
        tol,
    )?;

    let pull = |entries: &[(usize, C64)]| -> Result<PureState> {
        let target = PureState::normalized(ket(16, entries))?.with_bipartite(4, 4)?;
        machine.pullback(&target)
    };
    let disk1 = Hyperdisk::new(
        vec![
            pull(&[(0, re(1.0)), (10, re(3.0_f64.sqrt()))])?,
            pull(&[(5, re(2.0_f64.sqrt())), (15, re(2.0))])?,
        ],
        vec![0.4_f64.sqrt(), 0.6_f64.sqrt()],
        tol,
    )?;
    let disk2 = Hyperdisk::new(
        vec![
            pull(&[(0, re(-1.0)), (15, re(2.0))])?,
            pull(&[(5, re(2.0_f64.sqrt())), (10, re(-(3.0_f64.sqrt())))])?,
        ],
        vec![0.5_f64.sqrt(), 0.5_f64.sqrt()],
        tol,
    )?;
    Ok(vec![disk0, disk1, disk2])
}

/// The four-coefficient Schmidt hyperdisk containing both target disks of
/// the `nd_n3_d4` entry.
pub fn nd_schmidt_disk(tol: &Tolerance) -> Result<Hyperdisk> {
    let basis: Vec<PureState> = (0..4)
        .map(|j| {
            PureState::basis_state(16, j * 4 + j)
                .with_bipartite(4, 4)
                .expect("16 = 4*4")
        })
        .collect();
    Hyperdisk::new(
        basis,
        vec![
            0.1_f64.sqrt(),
            0.2_f64.sqrt(),
            0.3_f64.sqrt(),
            0.4_f64.sqrt(),
        ],
        tol,
    )
}

/// The completely degenerate `n = 3, d = 2` machine.
fn build_cd_machine(tol: &Tolerance) -> Result<MaskingMachine> {
    let inv = re(1.0 / 2.0_f64.sqrt());
    let mut m = CMatrix::zeros(4, 3);
    m[(0, 0)] = re(1.0);
    m[(3, 1)] = re(1.0);
    m[(1, 2)] = inv;
    m[(2, 2)] = inv;
    let spec = MarginalSpec::completely_degenerate(2)?;
    Ok(MaskingMachine::new(m, 2, 2, tol)?.with_claimed_spec(spec))
}

/// Local qubit basis pair `(phi+, phi-)` embedded in a qutrit on levels 0/1.
pub fn bloch_pair_01(theta: f64, phi: f64) -> (PureState, PureState) {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let plus = PureState::normalized(ket(3, &[(0, re(c)), (1, phase(phi) * s)])).unwrap();
    let minus = PureState::normalized(ket(3, &[(0, phase(-phi) * s), (1, re(-c))])).unwrap();
    (plus, minus)
}

/// Local qubit basis pair on levels 1/2 of a qutrit.
pub fn bloch_pair_12(nu: f64, omega: f64) -> (PureState, PureState) {
    let (c, s) = ((nu / 2.0).cos(), (nu / 2.0).sin());
    let plus = PureState::normalized(ket(3, &[(1, re(c)), (2, phase(omega) * s)])).unwrap();
    let minus = PureState::normalized(ket(3, &[(1, re(s)), (2, phase(omega) * -c)])).unwrap();
    (plus, minus)
}

fn basis_state_tagged(d: usize, a: usize, b: usize) -> PureState {
    PureState::basis_state(d * d, a * d + b)
        .with_bipartite(d, d)
        .expect("square split")
}

/// The maximally entangled anchor `(1/sqrt d) sum_j |jj>`.
pub fn maximally_entangled(d: usize) -> PureState {
    let mut v = CVector::zeros(d * d);
    for j in 0..d {
        v[j * d + j] = re(1.0);
    }
    PureState::normalized(v)
        .unwrap()
        .with_bipartite(d, d)
        .unwrap()
}

fn bell_triple_states() -> Result<Vec<PureState>> {
    let anchor = maximally_entangled(3);
    let z = generalized_pauli(3, Pauli::Z)?;
    let x = generalized_pauli(3, Pauli::X)?;
    let lift = |u: &CMatrix| -> Result<PureState> {
        let m = anchor.as_bipartite_matrix()?;
        let mapped = u * m;
        let mut v = CVector::zeros(9);
        for a in 0..3 {
            for b in 0..3 {
                v[a * 3 + b] = mapped[(a, b)];
            }
        }
        PureState::normalized(v)?.with_bipartite(3, 3)
    };
    Ok(vec![anchor.clone(), lift(&z)?, lift(&x)?])
}

/// Parameters of the continuous families, one variant per catalog entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FamilyParams {
    Nd(NdParams),
    Cd(CdParams),
    Bell(BellParams),
    PartialNoDisk(PartialNoDiskParams),
    TypeI(TypeIParams),
    TypeII(TypeIiParams),
    TypeIII(TypeIiiParams),
    AppendixA(AppendixAParams),
    AppendixB(AppendixBParams),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NdParams {
    /// Which of the two target disks, 0 or 1.
    pub disk: usize,
    /// The disk's free phase (alpha or beta).
    pub phase: f64,
}

impl Default for NdParams {
    fn default() -> Self {
        NdParams {
            disk: 0,
            phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CdParams {
    pub xi: f64,
    pub eta: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BellParams {
    /// Which of the three orthogonal states, 0..=2.
    pub index: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialNoDiskParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub eta: f64,
}

impl Default for PartialNoDiskParams {
    fn default() -> Self {
        PartialNoDiskParams {
            lambda1: 0.35,
            lambda2: 0.3,
            eta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TypeIParams {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl Default for TypeIParams {
    fn default() -> Self {
        TypeIParams {
            lambda0: 0.5,
            lambda1: 0.3,
            lambda2: 0.2,
            theta1: 0.0,
            theta2: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TypeIiParams {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Bloch angles of the two rotated local bases.
    pub theta0: f64,
    pub theta1: f64,
    pub phi0: f64,
    pub phi1: f64,
    /// Which of the two disks, 0 or 1.
    pub disk: usize,
    pub phase: f64,
}

impl Default for TypeIiParams {
    fn default() -> Self {
        TypeIiParams {
            lambda1: 0.35,
            lambda2: 0.3,
            theta0: std::f64::consts::FRAC_PI_2,
            theta1: std::f64::consts::FRAC_PI_2,
            phi0: 0.0,
            phi1: std::f64::consts::FRAC_PI_2,
            disk: 0,
            phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TypeIiiParams {
    /// 0 samples the disk component at `alpha`, 1 the isolated state.
    pub part: usize,
    pub alpha: f64,
    pub theta: f64,
    pub nu: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub omega: f64,
    pub eta: f64,
}

impl Default for TypeIiiParams {
    fn default() -> Self {
        TypeIiiParams {
            part: 1,
            alpha: 0.0,
            theta: std::f64::consts::FRAC_PI_2,
            nu: std::f64::consts::FRAC_PI_2,
            phi0: 0.0,
            phi1: 0.0,
            omega: 0.0,
            eta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppendixAParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub eta: f64,
    pub beta: f64,
}

impl Default for AppendixAParams {
    fn default() -> Self {
        AppendixAParams {
            lambda1: 0.35,
            lambda2: 0.3,
            theta0: std::f64::consts::FRAC_PI_3,
            theta1: std::f64::consts::FRAC_PI_3,
            phi0: 0.0,
            phi1: 0.0,
            eta: 0.0,
            beta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppendixBParams {
    pub theta: f64,
    pub nu: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub omega: f64,
    pub eta: f64,
}

impl Default for AppendixBParams {
    fn default() -> Self {
        AppendixBParams {
            theta: std::f64::consts::FRAC_PI_2,
            nu: std::f64::consts::FRAC_PI_2,
            phi0: 0.0,
            phi1: 0.0,
            omega: 0.0,
            eta: 0.0,
        }
    }
}

/// Default parameters for an entry's family.
pub fn default_params(id: ExampleId) -> FamilyParams {
    match id {
        ExampleId::NdN3D4 => FamilyParams::Nd(NdParams::default()),
        ExampleId::CdN3D2 => FamilyParams::Cd(CdParams::default()),
        ExampleId::BellTriple => FamilyParams::Bell(BellParams::default()),
        ExampleId::PartialNoDisk => FamilyParams::PartialNoDisk(PartialNoDiskParams::default()),
        ExampleId::TypeI => FamilyParams::TypeI(TypeIParams::default()),
        ExampleId::TypeII => FamilyParams::TypeII(TypeIiParams::default()),
        ExampleId::TypeIII => FamilyParams::TypeIII(TypeIiiParams::default()),
        ExampleId::AppendixAFamily => FamilyParams::AppendixA(AppendixAParams::default()),
        ExampleId::AppendixBFamily => FamilyParams::AppendixB(AppendixBParams::default()),
    }
}

fn check_partial_spectrum(lambda1: f64, lambda2: f64) -> Result<()> {
    if (2.0 * lambda1 + lambda2 - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "spectrum must satisfy 2*lambda1 + lambda2 = 1, got ({lambda1}, {lambda2})"
        )));
    }
    if lambda1 <= lambda2 || lambda2 <= 0.0 {
        return Err(Error::invalid(
            "spectrum must satisfy lambda1 > lambda2 > 0 (degenerate block first)",
        ));
    }
    Ok(())
}

/// Builds the catalog entry.
pub fn build(id: ExampleId) -> Result<CatalogItem> {
    let tol = Tolerance::default();
    match id {
        ExampleId::NdN3D4 => {
            let machine = build_nd_machine(&tol)?;
            let disks = nd_maskable_disks(&tol)?;
            Ok(CatalogItem::Machine {
                machine,
                claimed: Some(ClaimedSet {
                    states: vec![],
                    disks,
                }),
            })
        }
        ExampleId::CdN3D2 => Ok(CatalogItem::Machine {
            machine: build_cd_machine(&tol)?,
            // the maskable set is a continuum of disks, not a finite claim
            claimed: None,
        }),
        ExampleId::BellTriple => Ok(CatalogItem::TargetSet {
            states: bell_triple_states()?,
            spec: MarginalSpec::completely_degenerate(3)?,
        }),
        ExampleId::PartialNoDisk => {
            let p = PartialNoDiskParams::default();
            check_partial_spectrum(p.lambda1, p.lambda2)?;
            let third = PureState::normalized(ket(
                9,
                &[
                    (1, C64::new(0.0, (p.lambda1 / 2.0).sqrt())),
                    (3, C64::new(0.0, (p.lambda1 / 2.0).sqrt())),
                    (8, re(p.lambda2.sqrt())),
                ],
            ))?
            .with_bipartite(3, 3)?;
            Ok(CatalogItem::TargetSet {
                states: vec![
                    basis_state_tagged(3, 0, 0),
                    basis_state_tagged(3, 1, 1),
                    third,
                ],
                spec: MarginalSpec::new(vec![(p.lambda1, 2), (p.lambda2, 1)])?,
            })
        }
        ExampleId::TypeI => {
            let p = TypeIParams::default();
            Ok(CatalogItem::TargetSet {
                states: (0..3).map(|j| basis_state_tagged(3, j, j)).collect(),
                spec: MarginalSpec::nondegenerate(&[p.lambda0, p.lambda1, p.lambda2])?,
            })
        }
        ExampleId::TypeII => {
            let p = TypeIiParams::default();
            let (disk0, disk1) = type_ii_disks(&p, &tol)?;
            let mut all = disk0.basis().to_vec();
            all.extend_from_slice(disk1.basis());
            let states = orthonormal_span(&all, &tol)?;
            if states.len() != 3 {
                return Err(Error::BadHyperdisk {
                    reason: format!("type II span has dimension {}", states.len()),
                });
            }
            let states = states
                .into_iter()
                .map(|s| s.with_bipartite(3, 3))
                .collect::<Result<Vec<_>>>()?;
            Ok(CatalogItem::TargetSet {
                states,
                spec: MarginalSpec::new(vec![(p.lambda1, 2), (p.lambda2, 1)])?,
            })
        }
        ExampleId::TypeIII | ExampleId::AppendixBFamily => {
            let p = if id == ExampleId::TypeIII {
                let d = TypeIiiParams::default();
                AppendixBParams {
                    theta: d.theta,
                    nu: d.nu,
                    phi0: d.phi0,
                    phi1: d.phi1,
                    omega: d.omega,
                    eta: d.eta,
                }
            } else {
                AppendixBParams::default()
            };
            Ok(CatalogItem::TargetSet {
                states: appendix_b_target_set(&p, &tol)?,
                spec: MarginalSpec::completely_degenerate(3)?,
            })
        }
        ExampleId::AppendixAFamily => {
            let p = AppendixAParams::default();
            check_partial_spectrum(p.lambda1, p.lambda2)?;
            let anchor0 = basis_state_tagged(3, 0, 0);
            let anchor1 = PureState::normalized(ket(
                9,
                &[(4, re(p.lambda1.sqrt())), (8, re(p.lambda2.sqrt()))],
            ))?
            .with_bipartite(3, 3)?;
            let perp = appendix_a_phi_perp(p.lambda1, p.lambda2, p.theta0, p.phi0, p.phi1)?;
            Ok(CatalogItem::TargetSet {
                states: vec![anchor0, anchor1, perp],
                spec: MarginalSpec::new(vec![(p.lambda1, 2), (p.lambda2, 1)])?,
            })
        }
    }
}

/// The two target-space subhyperdisks of the type II structure.
pub fn type_ii_disks(p: &TypeIiParams, tol: &Tolerance) -> Result<(Hyperdisk, Hyperdisk)> {
    check_partial_spectrum(p.lambda1, p.lambda2)?;
    let norm01 = (p.lambda1 + p.lambda2).sqrt();
    let b00 = basis_state_tagged(3, 0, 0);
    let b01 = PureState::normalized(ket(
        9,
        &[(4, re(p.lambda1.sqrt())), (8, re(p.lambda2.sqrt()))],
    ))?
    .with_bipartite(3, 3)?;
    let disk0 = Hyperdisk::new(vec![b00, b01], vec![p.lambda1.sqrt(), norm01], tol)?;

    let (phi_plus, phi_minus) = bloch_pair_01(p.theta0, p.phi0);
    let (psi_plus, psi_minus) = bloch_pair_01(p.theta1, p.phi1);
    let b10 = phi_plus.kron(&psi_plus);
    let minus_pair = phi_minus.kron(&psi_minus);
    let b11 = PureState::normalized(
        minus_pair.amplitudes() * re(p.lambda1.sqrt()) + ket(9, &[(8, re(p.lambda2.sqrt()))]),
    )?
    .with_bipartite(3, 3)?;
    let disk1 = Hyperdisk::new(vec![b10, b11], vec![p.lambda1.sqrt(), norm01], tol)?;
    Ok((disk0, disk1))
}

/// The balanced residual direction of the appendix-A family (normalized):
/// collinear with both basis-state residuals exactly when the two Bloch
/// angles agree and the extra phase vanishes.
pub fn appendix_a_phi_perp(
    lambda1: f64,
    lambda2: f64,
    theta: f64,
    phi0: f64,
    phi1: f64,
) -> Result<PureState> {
    check_partial_spectrum(lambda1, lambda2)?;
    let s = theta.sin();
    let c = theta.cos();
    let w = lambda1 * lambda2 / (lambda1 + lambda2) * (1.0 - c);
    let v = ket(
        9,
        &[
            (1, phase(-phi0) * (s * lambda1.sqrt())),
            (3, phase(-phi1) * (s * lambda1.sqrt())),
            (4, re(w / lambda1.sqrt())),
            (8, re(-w / lambda2.sqrt())),
        ],
    );
    PureState::normalized(v)?.with_bipartite(3, 3)
}

/// The two basis states of the appendix-A candidate subhyperdisk at the
/// given parameters.
pub fn appendix_a_disk_basis(p: &AppendixAParams) -> Result<(PureState, PureState)> {
    check_partial_spectrum(p.lambda1, p.lambda2)?;
    let (phi_plus, phi_minus) = bloch_pair_01(p.theta0, p.phi0);
    let (psi_plus, psi_minus) = bloch_pair_01(p.theta1, p.phi1);
    let first = phi_plus.kron(&psi_plus);
    let second = PureState::normalized(
        phi_minus.kron(&psi_minus).amplitudes() * re(p.lambda1.sqrt())
            + ket(9, &[(8, phase(p.eta) * p.lambda2.sqrt())]),
    )?
    .with_bipartite(3, 3)?;
    Ok((first, second))
}

/// Domain regimes of the appendix-B parameter `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuRegime {
    Zero,
    Interior,
    Pi,
}

pub fn nu_regime(nu: f64) -> Result<NuRegime> {
    let angtol = 1e-12;
    if !(0.0..=std::f64::consts::PI + angtol).contains(&nu) {
        return Err(Error::invalid(format!("nu = {nu} outside [0, pi]")));
    }
    if nu.abs() <= angtol {
        Ok(NuRegime::Zero)
    } else if (nu - std::f64::consts::PI).abs() <= angtol {
        Ok(NuRegime::Pi)
    } else {
        Ok(NuRegime::Interior)
    }
}

/// The target subspace spanned by the completely degenerate base disk
/// `|00> + e^{i alpha}(|11> + |22>)` and the extra state at the given
/// parameters: three orthonormal states.
pub fn appendix_b_target_set(p: &AppendixBParams, tol: &Tolerance) -> Result<Vec<PureState>> {
    let psi2 = appendix_b_state(p)?;
    let anchor0 = basis_state_tagged(3, 0, 0);
    let anchor1 =
        PureState::normalized(ket(9, &[(4, re(1.0)), (8, re(1.0))]))?.with_bipartite(3, 3)?;
    let states = orthonormal_span(&[anchor0, anchor1, psi2], tol)?;
    if states.len() != 3 {
        return Err(Error::BadHyperdisk {
            reason: "target span is degenerate at these parameters".into(),
        });
    }
    states.into_iter().map(|s| s.with_bipartite(3, 3)).collect()
}

/// The appendix-B extra state, in the closed form printed for each `nu`
/// regime, normalized and tagged `(3, 3)`.
pub fn appendix_b_state(p: &AppendixBParams) -> Result<PureState> {
    if !(p.theta > 0.0 && p.theta <= std::f64::consts::PI) {
        return Err(Error::invalid(format!(
            "theta = {} outside (0, pi]",
            p.theta
        )));
    }
    let c = (p.theta / 2.0).cos();
    let s = (p.theta / 2.0).sin();
    let e0 = phase(p.phi0);
    let e1 = phase(p.phi1);
    let e01 = phase(p.phi0 + p.phi1);
    let eta = phase(p.eta);
    let v = match nu_regime(p.nu)? {
        NuRegime::Zero => ket(
            9,
            &[
                (0, re(c)),
                (3, e0 * s),
                (1, e1 * s),
                (4, e01 * -c),
                (8, e01 * eta * -1.0),
            ],
        ),
        // the nu -> pi limit of the interior form (phases reabsorbed); the
        // extra state keeps both marginals maximally mixed, which pins the
        // |02> component where a first reading might expect |01>
        NuRegime::Pi => ket(
            9,
            &[
                (0, re(c)),
                (3, e0 * s),
                (2, e1 * s),
                (5, e01 * -c),
                (7, e01 * eta),
            ],
        ),
        NuRegime::Interior => {
            let cn = (p.nu / 2.0).cos();
            let sn = (p.nu / 2.0).sin();
            let ew = phase(p.omega);
            ket(
                9,
                &[
                    (0, re(c)),
                    (3, e0 * s),
                    (1, e1 * (s * cn)),
                    (2, e1 * ew * (s * sn)),
                    (7, e01 * eta * sn),
                    (8, e01 * eta * ew * -cn),
                    (4, e01 * -(c * cn)),
                    (5, e01 * ew * -(c * sn)),
                ],
            )
        }
    };
    PureState::normalized(v)?.with_bipartite(3, 3)
}

/// The pulled-back maskable disk of the completely degenerate machine at
/// local-basis parameters `(xi, eta)`.
pub fn cd_pullback_disk(xi: f64, eta: f64, tol: &Tolerance) -> Result<Hyperdisk> {
    let c2 = (xi / 2.0).cos().powi(2);
    let s2 = (xi / 2.0).sin().powi(2);
    let cross = xi.sin() / 2.0_f64.sqrt();
    let e2 = phase(2.0 * eta);
    let e1 = phase(eta);
    let b0 = PureState::normalized(ket(3, &[(0, re(c2)), (1, e2 * s2), (2, e1 * cross)]))?;
    let b1 = PureState::normalized(ket(3, &[(0, re(s2)), (1, e2 * c2), (2, e1 * -cross)]))?;
    let r = 1.0 / 2.0_f64.sqrt();
    Hyperdisk::new(vec![b0, b1], vec![r, r], tol)
}

/// Evaluates the family member at the given parameters.
pub fn family_state(id: ExampleId, params: &FamilyParams) -> Result<PureState> {
    match (id, params) {
        (ExampleId::NdN3D4, FamilyParams::Nd(p)) => {
            let e = phase(p.phase);
            let v = match p.disk {
                0 => ket(
                    16,
                    &[
                        (0, re(1.0)),
                        (5, re(2.0_f64.sqrt())),
                        (10, e * 3.0_f64.sqrt()),
                        (15, e * 2.0),
                    ],
                ),
                1 => ket(
                    16,
                    &[
                        (0, re(1.0)),
                        (10, re(3.0_f64.sqrt())),
                        (5, e * 2.0_f64.sqrt()),
                        (15, e * 2.0),
                    ],
                ),
                other => return Err(Error::invalid(format!("disk index {other} not in 0..=1"))),
            };
            PureState::normalized(v)?.with_bipartite(4, 4)
        }
        (ExampleId::CdN3D2, FamilyParams::Cd(p)) => {
            let (c, s) = ((p.xi / 2.0).cos(), (p.xi / 2.0).sin());
            let e = phase(p.eta);
            let plus = PureState::normalized(CVector::from_vec(vec![re(c), e * s]))?;
            let minus = PureState::normalized(CVector::from_vec(vec![re(s), e * -c]))?;
            let term0 = plus.kron(&plus);
            let term1 = minus.kron(&minus);
            let v = term0.amplitudes() + term1.amplitudes() * phase(p.theta);
            PureState::normalized(v)?.with_bipartite(2, 2)
        }
        (ExampleId::BellTriple, FamilyParams::Bell(p)) => {
            let states = bell_triple_states()?;
            states
                .into_iter()
                .nth(p.index)
                .ok_or_else(|| Error::invalid(format!("index {} not in 0..=2", p.index)))
        }
        (ExampleId::PartialNoDisk, FamilyParams::PartialNoDisk(p)) => {
            check_partial_spectrum(p.lambda1, p.lambda2)?;
            let half = (p.lambda1 / 2.0).sqrt();
            let i = C64::new(0.0, 1.0);
            let v = ket(
                9,
                &[
                    (0, phase(p.eta) * half),
                    (4, phase(-p.eta) * half),
                    (1, i * half),
                    (3, i * half),
                    (8, re(p.lambda2.sqrt())),
                ],
            );
            PureState::normalized(v)?.with_bipartite(3, 3)
        }
        (ExampleId::TypeI, FamilyParams::TypeI(p)) => {
            let sum = p.lambda0 + p.lambda1 + p.lambda2;
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("spectrum sums to {sum}, not 1")));
            }
            let v = ket(
                9,
                &[
                    (0, re(p.lambda0.sqrt())),
                    (4, phase(p.theta1) * p.lambda1.sqrt()),
                    (8, phase(p.theta2) * p.lambda2.sqrt()),
                ],
            );
            PureState::normalized(v)?.with_bipartite(3, 3)
        }
        (ExampleId::TypeII, FamilyParams::TypeII(p)) => {
            let tol = Tolerance::default();
            let (disk0, disk1) = type_ii_disks(p, &tol)?;
            let disk = match p.disk {
                0 => disk0,
                1 => disk1,
                other => return Err(Error::invalid(format!("disk index {other} not in 0..=1"))),
            };
            disk.sample_state(&[0.0, p.phase])
        }
        (ExampleId::TypeIII, FamilyParams::TypeIII(p)) => match p.part {
            0 => {
                let v = ket(9, &[(0, re(1.0)), (4, phase(p.alpha)), (8, phase(p.alpha))]);
                PureState::normalized(v)?.with_bipartite(3, 3)
            }
            1 => appendix_b_state(&AppendixBParams {
                theta: p.theta,
                nu: p.nu,
                phi0: p.phi0,
                phi1: p.phi1,
                omega: p.omega,
                eta: p.eta,
            }),
            other => Err(Error::invalid(format!("part {other} not in 0..=1"))),
        },
        (ExampleId::AppendixAFamily, FamilyParams::AppendixA(p)) => {
            // a member of the second subhyperdisk at phase beta
            let (first, second) = appendix_a_disk_basis(p)?;
            let v = second.amplitudes() * re((p.lambda1 + p.lambda2).sqrt())
                + first.amplitudes() * (phase(p.beta) * p.lambda1.sqrt());
            PureState::normalized(v)?.with_bipartite(3, 3)
        }
        (ExampleId::AppendixBFamily, FamilyParams::AppendixB(p)) => appendix_b_state(p),
        (id, _) => Err(Error::invalid(format!(
            "parameter variant does not match example id {id}"
        ))),
    }
}

/// Outcome of sampling a family and checking every member's marginals
/// against the family's fixed expected pair.
#[derive(Debug, Clone)]
pub struct MarginalCheckReport {
    pub passed: bool,
    pub max_deviation: f64,
    pub samples: usize,
    pub expected: DensityMatrix,
}

/// Expected common marginal of a family, in the computational basis.
pub fn family_expected_marginal(id: ExampleId) -> Result<DensityMatrix> {
    Ok(match id {
        ExampleId::NdN3D4 => DensityMatrix::from_diagonal(&[0.1, 0.2, 0.3, 0.4])?,
        ExampleId::CdN3D2 => DensityMatrix::maximally_mixed(2),
        ExampleId::BellTriple | ExampleId::TypeIII | ExampleId::AppendixBFamily => {
            DensityMatrix::maximally_mixed(3)
        }
        ExampleId::PartialNoDisk => {
            let p = PartialNoDiskParams::default();
            DensityMatrix::from_diagonal(&[p.lambda1, p.lambda1, p.lambda2])?
        }
        ExampleId::TypeI => {
            let p = TypeIParams::default();
            DensityMatrix::from_diagonal(&[p.lambda0, p.lambda1, p.lambda2])?
        }
        ExampleId::TypeII => {
            let p = TypeIiParams::default();
            DensityMatrix::from_diagonal(&[p.lambda1, p.lambda1, p.lambda2])?
        }
        ExampleId::AppendixAFamily => {
            let p = AppendixAParams::default();
            DensityMatrix::from_diagonal(&[p.lambda1, p.lambda1, p.lambda2])?
        }
    })
}

/// Draws family parameters uniformly over their domain (spectra stay at
/// their defaults; only angles, phases, and branch choices vary).
pub fn sample_params(id: ExampleId, rng: &mut rand_chacha::ChaCha8Rng) -> FamilyParams {
    use std::f64::consts::PI;
    let tau = 2.0 * PI;
    match id {
        ExampleId::NdN3D4 => FamilyParams::Nd(NdParams {
            disk: rng.random_range(0..2),
            phase: rng.random_range(0.0..tau),
        }),
        ExampleId::CdN3D2 => FamilyParams::Cd(CdParams {
            xi: rng.random_range(0.0..PI),
            eta: rng.random_range(0.0..tau),
            theta: rng.random_range(0.0..tau),
        }),
        ExampleId::BellTriple => FamilyParams::Bell(BellParams {
            index: rng.random_range(0..3),
        }),
        ExampleId::PartialNoDisk => FamilyParams::PartialNoDisk(PartialNoDiskParams {
            eta: rng.random_range(0.0..tau),
            ..Default::default()
        }),
        ExampleId::TypeI => FamilyParams::TypeI(TypeIParams {
            theta1: rng.random_range(0.0..tau),
            theta2: rng.random_range(0.0..tau),
            ..Default::default()
        }),
        ExampleId::TypeII => FamilyParams::TypeII(TypeIiParams {
            disk: rng.random_range(0..2),
            phase: rng.random_range(0.0..tau),
            ..Default::default()
        }),
        ExampleId::TypeIII => FamilyParams::TypeIII(TypeIiiParams {
            part: rng.random_range(0..2),
            alpha: rng.random_range(0.0..tau),
            theta: rng.random_range(0.05..PI),
            nu: rng.random_range(0.0..=PI),
            phi0: rng.random_range(0.0..tau),
            phi1: rng.random_range(0.0..tau),
            omega: rng.random_range(0.0..tau),
            eta: rng.random_range(0.0..tau),
        }),
        ExampleId::AppendixAFamily => FamilyParams::AppendixA(AppendixAParams {
            theta0: rng.random_range(0.05..PI - 0.05),
            theta1: rng.random_range(0.05..PI - 0.05),
            phi0: rng.random_range(0.0..tau),
            phi1: rng.random_range(0.0..tau),
            eta: rng.random_range(0.0..tau),
            beta: rng.random_range(0.0..tau),
            ..Default::default()
        }),
        ExampleId::AppendixBFamily => FamilyParams::AppendixB(AppendixBParams {
            theta: rng.random_range(0.05..PI),
            nu: rng.random_range(0.0..=PI),
            phi0: rng.random_range(0.0..tau),
            phi1: rng.random_range(0.0..tau),
            omega: rng.random_range(0.0..tau),
            eta: rng.random_range(0.0..tau),
        }),
    }
}

/// Samples the family and checks every member's marginals against the
/// expected pair within the algebraic tolerance.
pub fn family_marginal_check(
    id: ExampleId,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<MarginalCheckReport> {
    let expected = family_expected_marginal(id)?;
    let mut rng = seeded_rng(seed);
    let mut max_dev: f64 = 0.0;
    for _ in 0..samples {
        let params = sample_params(id, &mut rng);
        let state = family_state(id, &params)?;
        let (a, b) = marginals_of(&state)?;
        max_dev = max_dev
            .max(a.distance(&expected))
            .max(b.distance(&expected));
    }
    Ok(MarginalCheckReport {
        passed: max_dev < tol.algebraic,
        max_deviation: max_dev,
        samples,
        expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperdisk::{common_parent_obstruction, is_subhyperdisk};
    use crate::linalg;
    use crate::linalg::is_isometry;
    use crate::masking::verify_condition1;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn machine(id: ExampleId) -> (MaskingMachine, Option<ClaimedSet>) {
        match build(id).unwrap() {
            CatalogItem::Machine { machine, claimed } => (machine, claimed),
            other => panic!("expected machine, got {other:?}"),
        }
    }

    fn target_set(id: ExampleId) -> (Vec<PureState>, MarginalSpec) {
        match build(id).unwrap() {
            CatalogItem::TargetSet { states, spec } => (states, spec),
            other => panic!("expected target set, got {other:?}"),
        }
    }

    #[test]
    fn nd_machine_columns_match_printed_forms() {
        let (machine, claimed) = machine(ExampleId::NdN3D4);
        assert!(is_isometry(machine.matrix(), &tol()).unwrap());
        assert_eq!(machine.n(), 3);

        // |0> -> (|00> + sqrt2 |11>)/sqrt3
        let image0 = machine.image(0).unwrap();
        let expected =
            PureState::normalized(ket(16, &[(0, re(1.0)), (5, re(2.0_f64.sqrt()))])).unwrap();
        assert!(image0.fidelity(&expected) > 1.0 - 1e-12);

        // masking the claimed disks reproduces the printed target families
        let claimed = claimed.unwrap();
        let alpha = 0.77;
        let input = claimed.disks[0].sample_state(&[0.0, alpha]).unwrap();
        let masked = machine.mask(&input).unwrap();
        let target = family_state(
            ExampleId::NdN3D4,
            &FamilyParams::Nd(NdParams {
                disk: 0,
                phase: alpha,
            }),
        )
        .unwrap();
        assert!(masked.fidelity(&target) > 1.0 - 1e-12);
    }

    #[test]
    fn nd_disks_transport_onto_target_subdisks() {
        let (machine, claimed) = machine(ExampleId::NdN3D4);
        let claimed = claimed.unwrap();
        let parent = nd_schmidt_disk(&tol()).unwrap();
        for disk in &claimed.disks {
            let image = disk.image_under_isometry(machine.matrix(), &tol()).unwrap();
            assert!(is_subhyperdisk(&image, &parent, &tol()).unwrap());
        }
        // input-space disks pairwise have no common 3-dimensional parent
        for i in 0..claimed.disks.len() {
            for j in (i + 1)..claimed.disks.len() {
                let found = common_parent_obstruction(&claimed.disks[i], &claimed.disks[j], &tol())
                    .unwrap();
                assert_eq!(found, None, "disks {i} and {j}");
            }
        }
    }

    #[test]
    fn nd_condition1_on_claimed_set() {
        let (machine, claimed) = machine(ExampleId::NdN3D4);
        let samples = claimed.unwrap().sample_states(25).unwrap();
        let report = verify_condition1(&machine, &samples, &tol()).unwrap();
        assert!(report.passed, "max deviation {}", report.max_deviation);
        let expected = DensityMatrix::from_diagonal(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(report.rho_a.distance(&expected) < 1e-9);
        assert!(report.rho_b.distance(&expected) < 1e-9);
    }

    #[test]
    fn cd_machine_masks_third_basis_state_to_bell_pair() {
        let (machine, _) = machine(ExampleId::CdN3D2);
        let image2 = machine.image(2).unwrap();
        let expected = PureState::normalized(ket(4, &[(1, re(1.0)), (2, re(1.0))])).unwrap();
        assert!(image2.fidelity(&expected) > 1.0 - 1e-12);
    }

    #[test]
    fn cd_family_members_mask_through_the_machine() {
        let (machine, _) = machine(ExampleId::CdN3D2);
        // the pulled-back disk masks onto the target family
        let (xi, eta) = (0.8, 1.3);
        let pulled = cd_pullback_disk(xi, eta, &tol()).unwrap();
        for theta in [0.0, 0.7, 2.9] {
            let input = pulled.sample_state(&[0.0, theta]).unwrap();
            let masked = machine.mask(&input).unwrap();
            let target = family_state(
                ExampleId::CdN3D2,
                &FamilyParams::Cd(CdParams { xi, eta, theta }),
            )
            .unwrap();
            assert!(
                masked.fidelity(&target) > 1.0 - 1e-10,
                "theta {theta}: fidelity {}",
                masked.fidelity(&target)
            );
        }
    }

    #[test]
    fn cd_family_at_origin_is_bell_state() {
        let state = family_state(
            ExampleId::CdN3D2,
            &FamilyParams::Cd(CdParams {
                xi: 0.0,
                eta: 0.0,
                theta: 0.0,
            }),
        )
        .unwrap();
        let bell = PureState::normalized(ket(4, &[(0, re(1.0)), (3, re(1.0))])).unwrap();
        assert!(state.fidelity(&bell) > 1.0 - 1e-12);
    }

    #[test]
    fn family_marginals_hold() {
        for id in ExampleId::ALL {
            let report = family_marginal_check(id, 60, 7, &tol()).unwrap();
            assert!(
                report.passed,
                "{id}: max marginal deviation {}",
                report.max_deviation
            );
        }
    }

    #[test]
    fn bell_triple_is_orthonormal_and_maximally_entangled() {
        let (states, spec) = target_set(ExampleId::BellTriple);
        assert_eq!(states.len(), 3);
        assert!(linalg::orthonormality_deviation(&states) < 1e-12);
        assert_eq!(spec.d(), 3);
        for s in &states {
            let (a, b) = marginals_of(s).unwrap();
            assert!(a.distance(&DensityMatrix::maximally_mixed(3)) < 1e-12);
            assert!(b.distance(&DensityMatrix::maximally_mixed(3)) < 1e-12);
        }
    }

    #[test]
    fn partial_no_disk_state_matches_printed_form_at_zero() {
        let p = PartialNoDiskParams::default();
        let state = family_state(
            ExampleId::PartialNoDisk,
            &FamilyParams::PartialNoDisk(p.clone()),
        )
        .unwrap();
        let half = (p.lambda1 / 2.0).sqrt();
        let i = C64::new(0.0, 1.0);
        let expected = PureState::normalized(ket(
            9,
            &[
                (0, re(half)),
                (4, re(half)),
                (1, i * half),
                (3, i * half),
                (8, re(p.lambda2.sqrt())),
            ],
        ))
        .unwrap();
        assert!(state.fidelity(&expected) > 1.0 - 1e-12);
        // it lies in the declared target span
        let (states, _) = target_set(ExampleId::PartialNoDisk);
        let p_span = linalg::projector(&states);
        let residual = (state.amplitudes() - p_span * state.amplitudes()).norm();
        assert!(residual < 1e-10);
    }

    #[test]
    fn type_sets_are_orthonormal_qutrit_spans() {
        for id in [
            ExampleId::PartialNoDisk,
            ExampleId::TypeI,
            ExampleId::TypeII,
            ExampleId::TypeIII,
            ExampleId::AppendixAFamily,
            ExampleId::AppendixBFamily,
        ] {
            let (states, spec) = target_set(id);
            assert_eq!(states.len(), 3, "{id}");
            assert_eq!(spec.d(), 3, "{id}");
            assert!(
                linalg::orthonormality_deviation(&states) < 1e-9,
                "{id}: span not orthonormal"
            );
            for s in &states {
                assert_eq!(s.dim(), 9, "{id}");
            }
        }
    }

    #[test]
    fn type_ii_disks_live_in_the_span_and_in_legal_set() {
        let p = TypeIiParams::default();
        let (disk0, disk1) = type_ii_disks(&p, &tol()).unwrap();
        let (states, spec) = target_set(ExampleId::TypeII);
        let p_span = linalg::projector(&states);
        let rho = spec.density_matrix();
        for disk in [&disk0, &disk1] {
            for theta in [0.0, 1.1, 2.7, 4.4] {
                let member = disk.sample_state(&[0.0, theta]).unwrap();
                let residual = (member.amplitudes() - &p_span * member.amplitudes()).norm();
                assert!(residual < 1e-10, "span residual {residual}");
                let (a, b) = marginals_of(&member).unwrap();
                assert!(a.distance(&rho) < 1e-10);
                assert!(b.distance(&rho) < 1e-10);
            }
        }
        // the two disks sit on different Schmidt disks
        let found = common_parent_obstruction(&disk0, &disk1, &tol()).unwrap();
        assert_eq!(found, None);
    }

    #[test]
    fn appendix_b_regimes_match_general_form_limits() {
        // the nu = 0 closed form agrees with the printed pattern
        let p0 = AppendixBParams {
            nu: 0.0,
            ..AppendixBParams::default()
        };
        let s0 = appendix_b_state(&p0).unwrap();
        let c = (p0.theta / 2.0).cos();
        let s = (p0.theta / 2.0).sin();
        let expected = PureState::normalized(ket(
            9,
            &[
                (0, re(c)),
                (3, re(s)),
                (1, re(s)),
                (4, re(-c)),
                (8, re(-1.0)),
            ],
        ))
        .unwrap();
        assert!(s0.fidelity(&expected) > 1.0 - 1e-12);

        // nu = pi form at phases zero; both boundary forms stay legal
        let ppi = AppendixBParams {
            nu: std::f64::consts::PI,
            ..AppendixBParams::default()
        };
        let spi = appendix_b_state(&ppi).unwrap();
        let expected = PureState::normalized(ket(
            9,
            &[
                (0, re(c)),
                (3, re(s)),
                (2, re(s)),
                (5, re(-c)),
                (7, re(1.0)),
            ],
        ))
        .unwrap();
        assert!(spi.fidelity(&expected) > 1.0 - 1e-12);
        for state in [&s0, &spi] {
            let (a, b) = marginals_of(state).unwrap();
            assert!(a.distance(&DensityMatrix::maximally_mixed(3)) < 1e-12);
            assert!(b.distance(&DensityMatrix::maximally_mixed(3)) < 1e-12);
        }

        assert!(appendix_b_state(&AppendixBParams {
            theta: 0.0,
            ..AppendixBParams::default()
        })
        .is_err());
        assert!(appendix_b_state(&AppendixBParams {
            nu: 3.5,
            ..AppendixBParams::default()
        })
        .is_err());
    }

    #[test]
    fn unknown_example_id_errors() {
        assert!("no_such_example".parse::<ExampleId>().is_err());
        assert!("nd_n3_d4".parse::<ExampleId>().is_ok());
    }

    #[test]
    fn phi_perp_norm_constant_matches() {
        let v = nd_phi_perp();
        assert!((v.norm() - nd_phi_perp_norm()).abs() < 1e-12);
    }
}
