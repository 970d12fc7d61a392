//! JSON document schemas: complex numbers as `[re, im]` pairs, matrices in
//! row-major order, UTF-8 throughout. Field order is fixed so reports are
//! byte-identical across runs with the same seed.

use serde::{Deserialize, Serialize};

use maskdisk_core::catalog::{ExampleId, FamilyParams};
use maskdisk_core::{
    CMatrix, CVector, Error, Hyperdisk, MarginalSpec, MaskingMachine, PureState, Result, Tolerance,
    C64,
};

/// A pure state: `{"dim": n, "dims": [dA, dB]?, "amplitudes": [[re, im], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dims: Option<[usize; 2]>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn to_state(&self) -> Result<PureState> {
        if self.amplitudes.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: self.amplitudes.len(),
            });
        }
        let v = CVector::from_iterator(
            self.dim,
            self.amplitudes.iter().map(|&[re, im]| C64::new(re, im)),
        );
        // loads tolerate 1e-6 of drift and renormalize exactly
        let state = PureState::new(v)?;
        match self.dims {
            Some([a, b]) => state.with_bipartite(a, b),
            None => Ok(state),
        }
    }

    pub fn from_state(state: &PureState) -> Self {
        StateFile {
            dim: state.dim(),
            dims: state.bipartite().map(|(a, b)| [a, b]),
            amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// A hyperdisk: orthonormal basis states plus strictly positive coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiskFile {
    pub basis: Vec<StateFile>,
    pub coeffs: Vec<f64>,
}

impl DiskFile {
    pub fn to_disk(&self, tol: &Tolerance) -> Result<Hyperdisk> {
        let basis = self
            .basis
            .iter()
            .map(|s| s.to_state())
            .collect::<Result<Vec<_>>>()?;
        Hyperdisk::new(basis, self.coeffs.clone(), tol)
    }

    pub fn from_disk(disk: &Hyperdisk) -> Self {
        DiskFile {
            basis: disk.basis().iter().map(StateFile::from_state).collect(),
            coeffs: disk.coeffs().to_vec(),
        }
    }
}

/// A masking machine: `{"dims": [dA, dB], "columns": [state amplitudes...]}`.
/// Columns are the images of the input basis states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MachineFile {
    pub dims: [usize; 2],
    pub columns: Vec<Vec<[f64; 2]>>,
}

impl MachineFile {
    pub fn to_machine(&self, tol: &Tolerance) -> Result<MaskingMachine> {
        let rows = self.dims[0] * self.dims[1];
        let n = self.columns.len();
        let mut m = CMatrix::zeros(rows, n);
        for (k, col) in self.columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    got: col.len(),
                });
            }
            for (i, &[re, im]) in col.iter().enumerate() {
                m[(i, k)] = C64::new(re, im);
            }
        }
        MaskingMachine::new(m, self.dims[0], self.dims[1], tol)
    }

    pub fn from_machine(machine: &MaskingMachine) -> Self {
        let (d_a, d_b) = machine.dims();
        let m = machine.matrix();
        MachineFile {
            dims: [d_a, d_b],
            columns: (0..machine.n())
                .map(|k| m.column(k).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

/// A claimed maskable set: explicit states plus hyperdisks.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ClaimedSetFile {
    #[serde(default)]
    pub states: Vec<StateFile>,
    #[serde(default)]
    pub disks: Vec<DiskFile>,
}

impl ClaimedSetFile {
    pub fn to_claimed(&self, tol: &Tolerance) -> Result<maskdisk_core::ClaimedSet> {
        Ok(maskdisk_core::ClaimedSet {
            states: self
                .states
                .iter()
                .map(|s| s.to_state())
                .collect::<Result<Vec<_>>>()?,
            disks: self
                .disks
                .iter()
                .map(|d| d.to_disk(tol))
                .collect::<Result<Vec<_>>>()?,
        })
    }

    pub fn from_claimed(set: &maskdisk_core::ClaimedSet) -> Self {
        ClaimedSetFile {
            states: set.states.iter().map(StateFile::from_state).collect(),
            disks: set.disks.iter().map(DiskFile::from_disk).collect(),
        }
    }
}

/// A marginal spec: eigenvalue/degeneracy blocks, strictly decreasing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecFile {
    pub blocks: Vec<BlockFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockFile {
    pub eigenvalue: f64,
    pub degeneracy: usize,
}

impl SpecFile {
    pub fn to_spec(&self) -> Result<MarginalSpec> {
        MarginalSpec::new(
            self.blocks
                .iter()
                .map(|b| (b.eigenvalue, b.degeneracy))
                .collect(),
        )
    }

    pub fn from_spec(spec: &MarginalSpec) -> Self {
        SpecFile {
            blocks: spec
                .blocks()
                .iter()
                .map(|&(eigenvalue, degeneracy)| BlockFile {
                    eigenvalue,
                    degeneracy,
                })
                .collect(),
        }
    }
}

/// A target subspace: orthonormal spanning states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceFile {
    pub states: Vec<StateFile>,
}

/// One report witness: a state or a disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    State { state: StateFile },
    Disk { disk: DiskFile },
}

/// Tolerances as recorded in reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TolerancesOut {
    pub algebraic: f64,
    pub optimization: f64,
}

/// Report diagnostics; every run records its seed and tolerances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_marginal_deviation: f64,
    pub disks_found: usize,
    pub seed: u64,
    pub tolerances: TolerancesOut,
    pub solutions_found: usize,
    pub counterexamples: usize,
}

/// The machine-readable outcome of `verify` and `classify`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub verdict: String,
    pub witnesses: Vec<Witness>,
    pub diagnostics: Diagnostics,
}

/// Parses `--params` JSON into the family parameters of an entry.
pub fn parse_params(id: ExampleId, json: &str) -> Result<FamilyParams> {
    let bad = |e: serde_json::Error| Error::InvalidParameter {
        reason: format!("params for {id}: {e}"),
    };
    Ok(match id {
        ExampleId::NdN3D4 => FamilyParams::Nd(serde_json::from_str(json).map_err(bad)?),
        ExampleId::CdN3D2 => FamilyParams::Cd(serde_json::from_str(json).map_err(bad)?),
        ExampleId::BellTriple => FamilyParams::Bell(serde_json::from_str(json).map_err(bad)?),
        ExampleId::PartialNoDisk => {
            FamilyParams::PartialNoDisk(serde_json::from_str(json).map_err(bad)?)
        }
        ExampleId::TypeI => FamilyParams::TypeI(serde_json::from_str(json).map_err(bad)?),
        ExampleId::TypeII => FamilyParams::TypeII(serde_json::from_str(json).map_err(bad)?),
        ExampleId::TypeIII => FamilyParams::TypeIII(serde_json::from_str(json).map_err(bad)?),
        ExampleId::AppendixAFamily => {
            FamilyParams::AppendixA(serde_json::from_str(json).map_err(bad)?)
        }
        ExampleId::AppendixBFamily => {
            FamilyParams::AppendixB(serde_json::from_str(json).map_err(bad)?)
        }
    })
}
