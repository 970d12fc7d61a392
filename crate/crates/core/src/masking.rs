//! Masking machines and the structures around them: marginal specifications,
//! legal-set parametrization by block-diagonal unitaries, the two defining
//! conditions of a masking machine as executable checks, dimension bounds,
//! and the Schmidt-hyperdisk commutation certificate.

use crate::error::{Error, Result};
use crate::hyperdisk::{phase_sweep, Hyperdisk, SchmidtHyperdisk};
use crate::linalg::{
    self, commutator_norm, hermitian_eigen, partial_trace, CMatrix, CVector, DensityMatrix,
    PureState, Side, Tolerance, C64,
};
use crate::optimize::{multi_start_search, ProjectiveChart, SearchConfig};

/// Eigenvalue/degeneracy structure `{(lambda_j, g(j))}` of a common marginal.
/// Eigenvalues are strictly decreasing across blocks; the eigenbasis is the
/// computational basis grouped by block in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSpec {
    blocks: Vec<(f64, usize)>,
}

/// Degeneracy regime of a marginal spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegeneracyClass {
    Nondegenerate,
    CompletelyDegenerate,
    Partial,
}

impl MarginalSpec {
    pub fn new(blocks: Vec<(f64, usize)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::BadMarginalSpec {
                reason: "no blocks".into(),
            });
        }
        for w in blocks.windows(2) {
            if w[0].0 <= w[1].0 {
                return Err(Error::BadMarginalSpec {
                    reason: "eigenvalues must be strictly decreasing".into(),
                });
            }
        }
        if blocks.iter().any(|&(l, g)| l <= 0.0 || g < 1) {
            return Err(Error::BadMarginalSpec {
                reason: "eigenvalues must be positive and degeneracies >= 1".into(),
            });
        }
        let trace: f64 = blocks.iter().map(|&(l, g)| l * g as f64).sum();
        if (trace - 1.0).abs() > 1e-6 {
            return Err(Error::BadMarginalSpec {
                reason: format!("weighted eigenvalue sum {trace} != 1"),
            });
        }
        Ok(MarginalSpec { blocks })
    }

    /// All degeneracies one.
    pub fn nondegenerate(lambdas: &[f64]) -> Result<Self> {
        MarginalSpec::new(lambdas.iter().map(|&l| (l, 1)).collect())
    }

    /// The maximally mixed marginal `I/d`.
    pub fn completely_degenerate(d: usize) -> Result<Self> {
        MarginalSpec::new(vec![(1.0 / d as f64, d)])
    }

    /// Clusters a nonincreasing eigenvalue list into blocks, dropping values
    /// below `support_cut`. Adjacent eigenvalues within `gap` share a block.
    pub fn from_eigenvalues(values: &[f64], gap: f64, support_cut: f64) -> Result<Self> {
        let mut blocks: Vec<(f64, usize)> = Vec::new();
        for &v in values {
            if v < support_cut {
                continue;
            }
            match blocks.last_mut() {
                Some((l, g)) if (*l - v).abs() <= gap => {
                    // running mean keeps the representative stable
                    *l = (*l * *g as f64 + v) / (*g as f64 + 1.0);
                    *g += 1;
                }
                _ => blocks.push((v, 1)),
            }
        }
        MarginalSpec::new(blocks)
    }

    pub fn blocks(&self) -> &[(f64, usize)] {
        &self.blocks
    }

    /// Total dimension `d = sum_j g(j)`.
    pub fn d(&self) -> usize {
        self.blocks.iter().map(|&(_, g)| g).sum()
    }

    /// Number of distinct eigenvalues.
    pub fn t(&self) -> usize {
        self.blocks.len()
    }

    /// Starting computational index of each block.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.t());
        let mut acc = 0;
        for &(_, g) in &self.blocks {
            offsets.push(acc);
            acc += g;
        }
        offsets
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|&(_, g)| g).collect()
    }

    /// Eigenvalue list expanded to length `d`, nonincreasing.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|&(l, g)| std::iter::repeat_n(l, g))
            .collect()
    }

    /// The diagonal density matrix in the block-grouped computational basis.
    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix::from_diagonal(&self.eigenvalues()).expect("valid spec")
    }

    pub fn degeneracy_class(&self) -> DegeneracyClass {
        if self.t() == 1 {
            DegeneracyClass::CompletelyDegenerate
        } else if self.blocks.iter().all(|&(_, g)| g == 1) {
            DegeneracyClass::Nondegenerate
        } else {
            DegeneracyClass::Partial
        }
    }

    /// Upper bound `sum_j g(j)^2` on the input dimension of any machine with
    /// this common marginal.
    pub fn dimension_bound(&self) -> usize {
        self.blocks.iter().map(|&(_, g)| g * g).sum()
    }

    /// Frobenius distance of a matrix from block-diagonal form.
    pub fn off_block_residual(&self, u: &CMatrix) -> f64 {
        let offsets = self.block_offsets();
        let dims = self.block_dims();
        let d = self.d();
        let mut sq = 0.0;
        for i in 0..d {
            for j in 0..d {
                let same_block = offsets
                    .iter()
                    .zip(&dims)
                    .any(|(&o, &g)| i >= o && i < o + g && j >= o && j < o + g);
                if !same_block {
                    sq += u[(i, j)].norm_sqr();
                }
            }
        }
        sq.sqrt()
    }

    /// The legal-set description for this marginal pair.
    pub fn legal_set(&self) -> LegalSetSpec {
        let d = self.d();
        let mut anchor = CVector::zeros(d * d);
        for (offset, &(l, g)) in self.block_offsets().iter().zip(&self.blocks) {
            for k in 0..g {
                let idx = offset + k;
                anchor[idx * d + idx] = C64::new(l.sqrt(), 0.0);
            }
        }
        let anchor = PureState::normalized(anchor)
            .expect("anchor norm is 1 by the trace invariant")
            .with_bipartite(d, d)
            .expect("d*d space");
        LegalSetSpec {
            spec: self.clone(),
            anchor,
        }
    }
}

/// The set of all bipartite purifications of a fixed marginal pair,
/// parametrized as `(U + I)|anchor>` over block-diagonal unitaries `U`.
#[derive(Debug, Clone)]
pub struct LegalSetSpec {
    spec: MarginalSpec,
    anchor: PureState,
}

impl LegalSetSpec {
    pub fn spec(&self) -> &MarginalSpec {
        &self.spec
    }

    /// The anchor purification `sum_j sqrt(lambda_j) sum_k |j,k>|j,k>`.
    pub fn anchor(&self) -> &PureState {
        &self.anchor
    }

    /// Assembles `U = bigoplus_j U^{(j)}`, validating shapes and unitarity.
    pub fn block_unitary(&self, blocks: &[CMatrix], tol: &Tolerance) -> Result<CMatrix> {
        let dims = self.spec.block_dims();
        if blocks.len() != dims.len() {
            return Err(Error::invalid(format!(
                "expected {} blocks, got {}",
                dims.len(),
                blocks.len()
            )));
        }
        let d = self.spec.d();
        let mut u = CMatrix::zeros(d, d);
        let offsets = self.spec.block_offsets();
        for ((block, &g), &offset) in blocks.iter().zip(&dims).zip(&offsets) {
            if block.nrows() != g || block.ncols() != g {
                return Err(Error::invalid(format!(
                    "block at offset {offset} must be {g}x{g}, got {}x{}",
                    block.nrows(),
                    block.ncols()
                )));
            }
            linalg::check_unitary(block, tol)?;
            for i in 0..g {
                for j in 0..g {
                    u[(offset + i, offset + j)] = block[(i, j)];
                }
            }
        }
        Ok(u)
    }

    /// The legal state `(U + I)|anchor>` for the given unitary blocks.
    pub fn legal_state(&self, blocks: &[CMatrix], tol: &Tolerance) -> Result<PureState> {
        let u = self.block_unitary(blocks, tol)?;
        self.legal_state_from_unitary(&u)
    }

    /// Applies a pre-assembled `d x d` operator as `(U + I)|anchor>`.
    pub fn legal_state_from_unitary(&self, u: &CMatrix) -> Result<PureState> {
        let d = self.spec.d();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.nrows(),
            });
        }
        let m = self.anchor.as_bipartite_matrix()?;
        let mapped = u * m;
        let mut v = CVector::zeros(d * d);
        for a in 0..d {
            for b in 0..d {
                v[a * d + b] = mapped[(a, b)];
            }
        }
        PureState::normalized(v)?.with_bipartite(d, d)
    }

    /// Recovers the block-diagonal unitary of a legal state in the canonical
    /// frame, split into per-block matrices after a per-block polar
    /// projection (so the result is exactly unitary).
    pub fn extract_block_unitary(&self, psi: &PureState) -> Result<CMatrix> {
        let d = self.spec.d();
        if psi.dim() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: psi.dim(),
            });
        }
        let m = psi.clone().with_bipartite(d, d)?.as_bipartite_matrix()?;
        let lambdas = self.spec.eigenvalues();
        // U_raw = M Lambda^{-1/2}
        let mut u = m;
        for j in 0..d {
            let s = lambdas[j].sqrt();
            for i in 0..d {
                u[(i, j)] /= C64::new(s, 0.0);
            }
        }
        // per-block polar projection onto the unitary group
        let offsets = self.spec.block_offsets();
        let dims = self.spec.block_dims();
        let mut out = CMatrix::zeros(d, d);
        for (&offset, &g) in offsets.iter().zip(&dims) {
            let block = u.view((offset, offset), (g, g)).into_owned();
            let svd = block.svd(true, true);
            let w = svd.u.unwrap() * svd.v_t.unwrap();
            for i in 0..g {
                for j in 0..g {
                    out[(offset + i, offset + j)] = w[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// How far a legal-state candidate is from this legal set: distance to
    /// its own block-unitary reprojection.
    pub fn legality_residual(&self, psi: &PureState) -> Result<f64> {
        let u = self.extract_block_unitary(psi)?;
        let reprojected = self.legal_state_from_unitary(&u)?;
        Ok((psi.amplitudes() - reprojected.amplitudes())
            .norm()
            .min((psi.amplitudes() + reprojected.amplitudes()).norm()))
    }

    /// The search chart over block-diagonal unitaries.
    pub fn chart(&self) -> crate::optimize::BlockUnitaryChart {
        let d = self.spec.d();
        crate::optimize::BlockUnitaryChart::new(
            self.spec.block_dims(),
            self.anchor.amplitudes().clone(),
            (d, d),
        )
    }
}

/// A linear isometry from an `n`-dimensional input space into a bipartite
/// `d_a x d_b` space, with an optional claimed marginal spec.
#[derive(Debug, Clone)]
pub struct MaskingMachine {
    matrix: CMatrix,
    d_a: usize,
    d_b: usize,
    claimed_spec: Option<MarginalSpec>,
}

impl MaskingMachine {
    pub fn new(matrix: CMatrix, d_a: usize, d_b: usize, tol: &Tolerance) -> Result<Self> {
        if matrix.nrows() != d_a * d_b {
            return Err(Error::DimensionMismatch {
                expected: d_a * d_b,
                got: matrix.nrows(),
            });
        }
        if !linalg::is_isometry(&matrix, tol)? {
            let dev = (matrix.adjoint() * &matrix
                - CMatrix::identity(matrix.ncols(), matrix.ncols()))
            .norm();
            return Err(Error::NotIsometry { deviation: dev });
        }
        Ok(MaskingMachine {
            matrix,
            d_a,
            d_b,
            claimed_spec: None,
        })
    }

    /// Builds a machine whose columns are the given orthonormal bipartite
    /// states.
    pub fn from_columns(
        columns: &[PureState],
        d_a: usize,
        d_b: usize,
        tol: &Tolerance,
    ) -> Result<Self> {
        let rows = d_a * d_b;
        let mut m = CMatrix::zeros(rows, columns.len());
        for (k, c) in columns.iter().enumerate() {
            if c.dim() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    got: c.dim(),
                });
            }
            m.set_column(k, c.amplitudes());
        }
        MaskingMachine::new(m, d_a, d_b, tol)
    }

    pub fn with_claimed_spec(mut self, spec: MarginalSpec) -> Self {
        self.claimed_spec = Some(spec);
        self
    }

    pub fn claimed_spec(&self) -> Option<&MarginalSpec> {
        self.claimed_spec.as_ref()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Input dimension `n`.
    pub fn n(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    /// Masks an input state: `V|psi>`, tagged with the bipartite split.
    pub fn mask(&self, psi: &PureState) -> Result<PureState> {
        if psi.dim() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: psi.dim(),
            });
        }
        PureState::new(&self.matrix * psi.amplitudes())?.with_bipartite(self.d_a, self.d_b)
    }

    /// Image of the `k`-th input basis state.
    pub fn image(&self, k: usize) -> Result<PureState> {
        self.mask(&PureState::basis_state(self.n(), k))
    }

    /// Pulls a state in the machine's image back to the input space,
    /// normalizing (`V^H Psi`).
    pub fn pullback(&self, psi: &PureState) -> Result<PureState> {
        if psi.dim() != self.d_a * self.d_b {
            return Err(Error::DimensionMismatch {
                expected: self.d_a * self.d_b,
                got: psi.dim(),
            });
        }
        PureState::normalized(self.matrix.adjoint() * psi.amplitudes())
    }
}

/// Both marginals of a bipartite state, `(Tr_B, Tr_A)`.
pub fn marginals_of(psi: &PureState) -> Result<(DensityMatrix, DensityMatrix)> {
    Ok((partial_trace(psi, Side::A)?, partial_trace(psi, Side::B)?))
}

/// Outcome of checking condition (1): all masked samples share marginals.
#[derive(Debug, Clone)]
pub struct Condition1Report {
    pub passed: bool,
    pub rho_a: DensityMatrix,
    pub rho_b: DensityMatrix,
    pub max_deviation: f64,
    pub samples: usize,
}

/// Masks every sample and compares all marginal pairs; passes when the
/// largest pairwise Frobenius deviation stays below the algebraic tolerance.
pub fn verify_condition1(
    machine: &MaskingMachine,
    samples: &[PureState],
    tol: &Tolerance,
) -> Result<Condition1Report> {
    if samples.is_empty() {
        return Err(Error::Empty {
            what: "condition-1 sample list".into(),
        });
    }
    let mut marginals = Vec::with_capacity(samples.len());
    for s in samples {
        marginals.push(marginals_of(&machine.mask(s)?)?);
    }
    let mut max_dev: f64 = 0.0;
    for i in 0..marginals.len() {
        for j in (i + 1)..marginals.len() {
            let dev_a = marginals[i].0.distance(&marginals[j].0);
            let dev_b = marginals[i].1.distance(&marginals[j].1);
            max_dev = max_dev.max(dev_a).max(dev_b);
        }
    }
    let (rho_a, rho_b) = marginals.swap_remove(0);
    Ok(Condition1Report {
        passed: max_dev < tol.algebraic,
        rho_a,
        rho_b,
        max_deviation: max_dev,
        samples: samples.len(),
    })
}

/// A claimed maskable set: explicit states plus hyperdisks, both in the
/// machine's input space.
#[derive(Debug, Clone, Default)]
pub struct ClaimedSet {
    pub states: Vec<PureState>,
    pub disks: Vec<Hyperdisk>,
}

impl ClaimedSet {
    pub fn is_empty(&self) -> bool {
        self.states.is_empty() && self.disks.is_empty()
    }

    /// Membership at an explicit residual threshold.
    pub fn contains(&self, psi: &PureState, eps: f64) -> bool {
        self.states.iter().any(|s| 1.0 - s.fidelity(psi) <= eps)
            || self.disks.iter().any(|d| d.contains_within(psi, eps))
    }

    /// Deterministic representative states: every listed state plus a phase
    /// sweep of each disk.
    pub fn sample_states(&self, per_disk: usize) -> Result<Vec<PureState>> {
        let mut out = self.states.clone();
        for disk in &self.disks {
            for theta in phase_sweep(disk.dim(), per_disk) {
                out.push(disk.sample_state(&theta)?);
            }
        }
        Ok(out)
    }
}

/// Outcome of checking condition (2): no maskable state outside the claim.
#[derive(Debug, Clone)]
pub struct Condition2Report {
    pub passed: bool,
    /// Recovered maskable states not covered by the claimed set.
    pub counterexamples: Vec<PureState>,
    /// Total marginal-matching states recovered by the search.
    pub matches: usize,
    pub membership_eps: f64,
    pub seed: u64,
    pub grid_points: usize,
    pub descents: usize,
}

/// Searches the input projective space for states whose masked marginals
/// match the common pair, then checks each find against the claimed set.
///
/// The search is a seeded quasi-random grid refined by local descents;
/// exhaustive verification over a continuum is not attempted, so a pass is
/// evidence at the configured grid density rather than proof.
pub fn verify_condition2(
    machine: &MaskingMachine,
    claimed: &ClaimedSet,
    common: &Condition1Report,
    cfg: &SearchConfig,
    tol: &Tolerance,
) -> Result<Condition2Report> {
    let n = machine.n();
    let membership_eps = (tol.optimization * 10.0).max(1e-7);
    if n <= 1 {
        return Ok(Condition2Report {
            passed: true,
            counterexamples: Vec::new(),
            matches: 0,
            membership_eps,
            seed: cfg.seed,
            grid_points: 0,
            descents: 0,
        });
    }

    let chart = ProjectiveChart { n, bipartite: None };
    let rho_a = common.rho_a.clone();
    let rho_b = common.rho_b.clone();
    let objective = move |psi: &PureState| match machine.mask(psi).and_then(|m| marginals_of(&m)) {
        Ok((a, b)) => a.distance(&rho_a).powi(2) + b.distance(&rho_b).powi(2),
        Err(_) => 1e6,
    };
    let mut cfg = *cfg;
    cfg.accept = tol.optimization.powi(2);
    let solutions = multi_start_search(&chart, objective, &cfg);

    let mut counterexamples = Vec::new();
    for sol in &solutions {
        if !claimed.contains(&sol.state, membership_eps) {
            counterexamples.push(sol.state.clone());
        }
    }
    Ok(Condition2Report {
        passed: counterexamples.is_empty(),
        matches: solutions.len(),
        counterexamples,
        membership_eps,
        seed: cfg.seed,
        grid_points: cfg.grid_points,
        descents: cfg.descents,
    })
}

/// The legal set of a nondegenerate spec is a `d`-dimensional Schmidt
/// hyperdisk with basis `|jj>` and coefficients `sqrt(lambda_j)`.
pub fn nondegenerate_legal_disk(spec: &MarginalSpec, tol: &Tolerance) -> Result<SchmidtHyperdisk> {
    if spec.degeneracy_class() != DegeneracyClass::Nondegenerate {
        return Err(Error::precondition(
            "legal disk construction requires a nondegenerate spec",
        ));
    }
    let d = spec.d();
    let factors: Vec<PureState> = (0..d).map(|j| PureState::basis_state(d, j)).collect();
    let coeffs: Vec<f64> = spec.eigenvalues().iter().map(|l| l.sqrt()).collect();
    SchmidtHyperdisk::from_factors(factors.clone(), factors, coeffs, tol)
}

/// Searches the finite candidate family `{U_k^H} + {(U_k D)^H}` (with `D`
/// running over fourth-root diagonal phase refinements) for a block-diagonal
/// `U_T` making every `U_a U_T` pairwise commute within `threshold`.
///
/// `None` means "no certificate found in the candidate family", never a
/// proof that no certificate exists.
pub fn find_schmidt_certificate(
    unitaries: &[CMatrix],
    spec: &MarginalSpec,
    threshold: f64,
    tol: &Tolerance,
) -> Result<Option<CMatrix>> {
    if unitaries.len() < 2 {
        return Err(Error::precondition(
            "certificate search needs at least two unitaries",
        ));
    }
    let d = spec.d();
    for u in unitaries {
        linalg::check_unitary(u, tol)?;
        let off = spec.off_block_residual(u);
        if off > tol.optimization.max(tol.algebraic * 100.0) {
            return Err(Error::precondition(format!(
                "unitary is not block-diagonal for the spec (residual {off})"
            )));
        }
    }

    let commutes = |u_t: &CMatrix| -> bool {
        let rotated: Vec<CMatrix> = unitaries.iter().map(|u| u * u_t).collect();
        for i in 0..rotated.len() {
            for j in (i + 1)..rotated.len() {
                if commutator_norm(&rotated[i], &rotated[j]).unwrap() > threshold {
                    return false;
                }
            }
        }
        true
    };

    for u_k in unitaries {
        let base = u_k.adjoint();
        if commutes(&base) {
            return Ok(Some(base));
        }
        for refinement in diagonal_phase_refinements(d) {
            let candidate = (u_k * refinement).adjoint();
            if commutes(&candidate) {
                return Ok(Some(candidate));
            }
        }
    }
    Ok(None)
}

/// Spec-facing wrapper using the algebraic tolerance as the commutation
/// threshold.
pub fn schmidt_hyperdisk_criterion(
    unitaries: &[CMatrix],
    spec: &MarginalSpec,
    tol: &Tolerance,
) -> Result<Option<CMatrix>> {
    find_schmidt_certificate(unitaries, spec, tol.algebraic, tol)
}

/// All diagonal matrices with entries in `{1, i, -1, -i}` and first entry 1.
fn diagonal_phase_refinements(d: usize) -> Vec<CMatrix> {
    let roots = [
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, -1.0),
    ];
    let count = 4usize.pow((d - 1) as u32);
    let mut out = Vec::with_capacity(count.saturating_sub(1));
    for code in 1..count {
        let mut diag = CVector::from_element(d, C64::new(1.0, 0.0));
        let mut c = code;
        for k in 1..d {
            diag[k] = roots[c % 4];
            c /= 4;
        }
        out.push(CMatrix::from_diagonal(&diag));
    }
    out
}

/// Simultaneous eigenbasis of a family of commuting block-diagonal
/// unitaries, refined block by block. Returns, per block, an orthonormal
/// family of full-dimension eigenvectors.
pub fn simultaneous_eigenbasis(
    family: &[CMatrix],
    spec: &MarginalSpec,
    tol: &Tolerance,
) -> Result<Vec<Vec<PureState>>> {
    let d = spec.d();
    let cluster_gap = 1e-7;
    let mut result = Vec::with_capacity(spec.t());
    for (&offset, &g) in spec.block_offsets().iter().zip(&spec.block_dims()) {
        // start from the block's computational basis
        let mut subspaces: Vec<CMatrix> = vec![CMatrix::from_fn(d, g, |i, j| {
            if i == offset + j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })];
        for m in family {
            let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
            let skew = (m - m.adjoint()) * C64::new(0.0, -0.5);
            for h in [herm, skew] {
                let mut next = Vec::new();
                for s in &subspaces {
                    if s.ncols() == 1 {
                        next.push(s.clone());
                        continue;
                    }
                    let restricted = s.adjoint() * &h * s;
                    let sym = (&restricted + restricted.adjoint()) * C64::new(0.5, 0.0);
                    let (vals, vecs) = hermitian_eigen(&sym, tol)?;
                    // split columns at eigenvalue gaps
                    let mut start = 0;
                    for k in 1..=vals.len() {
                        if k == vals.len() || (vals[k - 1] - vals[k]).abs() > cluster_gap {
                            let q = vecs.columns(start, k - start).into_owned();
                            next.push(s * q);
                            start = k;
                        }
                    }
                }
                subspaces = next;
            }
        }
        let mut vectors = Vec::with_capacity(g);
        for s in &subspaces {
            for c in 0..s.ncols() {
                vectors.push(PureState::normalized(s.column(c).into_owned())?);
            }
        }
        result.push(vectors);
    }
    Ok(result)
}

/// Builds the Schmidt hyperdisk certified by `u_t`: left factors are the
/// simultaneous eigenvectors of `{U_a U_T}`, right factors their images under
/// `U_T` conjugated entrywise, coefficients `sqrt(lambda_j)` per block.
pub fn schmidt_disk_from_certificate(
    unitaries: &[CMatrix],
    u_t: &CMatrix,
    spec: &MarginalSpec,
    tol: &Tolerance,
) -> Result<SchmidtHyperdisk> {
    let family: Vec<CMatrix> = unitaries.iter().map(|u| u * u_t).collect();
    let per_block = simultaneous_eigenbasis(&family, spec, tol)?;
    let mut left = Vec::with_capacity(spec.d());
    let mut right = Vec::with_capacity(spec.d());
    let mut coeffs = Vec::with_capacity(spec.d());
    for (vectors, &(l, _)) in per_block.iter().zip(spec.blocks()) {
        for psi in vectors {
            let phi = PureState::normalized(u_t * psi.amplitudes())?.conjugate();
            left.push(psi.clone());
            right.push(phi);
            coeffs.push(l.sqrt());
        }
    }
    SchmidtHyperdisk::from_factors(left, right, coeffs, tol)
}
