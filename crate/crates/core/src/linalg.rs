//! Dense complex linear algebra over small fixed dimensions.
//!
//! Everything here works on explicit `Complex<f64>` matrices and vectors;
//! decompositions are delegated to nalgebra. Dimensions stay small (a few
//! dozen at most), so no attention is paid to sparsity or blocking.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;
/// Dense complex matrix, dynamically sized.
pub type CMatrix = DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = DVector<C64>;

/// Numerical tolerances: `algebraic` for exact linear-algebra identities,
/// `optimization` for quantities recovered by numerical search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub algebraic: f64,
    pub optimization: f64,
}

impl Tolerance {
    pub fn new(algebraic: f64, optimization: f64) -> Result<Self> {
        if !(algebraic > 0.0 && algebraic <= optimization && optimization < 1.0) {
            return Err(Error::invalid(format!(
                "tolerances must satisfy 0 < algebraic <= optimization < 1, got ({algebraic}, {optimization})"
            )));
        }
        Ok(Tolerance {
            algebraic,
            optimization,
        })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            algebraic: 1e-9,
            optimization: 1e-6,
        }
    }
}

/// Which subsystem of a bipartite state a marginal refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Generalized Pauli operator kind: cyclic shift `X` or clock `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Z,
}

/// A normalized pure state, optionally tagged with a bipartite factorization
/// `dim = d_a * d_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    bipartite: Option<(usize, usize)>,
}

impl PureState {
    /// Builds a state from amplitudes, renormalizing when the norm is within
    /// `1e-6` of one and rejecting anything further off.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { norm });
        }
        if amplitudes.is_empty() {
            return Err(Error::Empty {
                what: "state amplitudes".into(),
            });
        }
        Ok(PureState {
            amplitudes: amplitudes / C64::new(norm, 0.0),
            bipartite: None,
        })
    }

    /// Builds a state from an arbitrary nonzero vector by normalizing it.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(PureState {
            amplitudes: amplitudes / C64::new(norm, 0.0),
            bipartite: None,
        })
    }

    /// Computational basis state `|k>` in the given dimension.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dim {dim}");
        let mut v = CVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        PureState {
            amplitudes: v,
            bipartite: None,
        }
    }

    /// Attaches a bipartite tag `(d_a, d_b)`; the product must equal `dim`.
    pub fn with_bipartite(mut self, d_a: usize, d_b: usize) -> Result<Self> {
        if d_a * d_b != self.dim() {
            return Err(Error::BadBipartiteTag {
                d_a,
                d_b,
                dim: self.dim(),
            });
        }
        self.bipartite = Some((d_a, d_b));
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn bipartite(&self) -> Option<(usize, usize)> {
        self.bipartite
    }

    /// Amplitudes reshaped to a `d_a x d_b` matrix, `M[a, b] = <a, b|psi>`.
    pub fn as_bipartite_matrix(&self) -> Result<CMatrix> {
        let (d_a, d_b) = self.bipartite.ok_or(Error::MissingBipartiteTag)?;
        Ok(CMatrix::from_fn(d_a, d_b, |a, b| {
            self.amplitudes[a * d_b + b]
        }))
    }

    /// Tensor product, tagged with the factor dimensions.
    pub fn kron(&self, other: &PureState) -> PureState {
        let (da, db) = (self.dim(), other.dim());
        let mut v = CVector::zeros(da * db);
        for a in 0..da {
            for b in 0..db {
                v[a * db + b] = self.amplitudes[a] * other.amplitudes[b];
            }
        }
        PureState {
            amplitudes: v,
            bipartite: Some((da, db)),
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|<self|other>|`, the overlap magnitude.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm()
    }

    /// Entrywise complex conjugate, preserving the bipartite tag.
    pub fn conjugate(&self) -> PureState {
        PureState {
            amplitudes: self.amplitudes.map(|z| z.conj()),
            bipartite: self.bipartite,
        }
    }

    /// Applies a matrix, renormalizing the result. The bipartite tag is
    /// dropped since the output lives in a different space.
    pub fn apply(&self, m: &CMatrix) -> Result<PureState> {
        if m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.ncols(),
                got: self.dim(),
            });
        }
        PureState::normalized(m * &self.amplitudes)
    }
}

/// A trace-one positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, tol: &Tolerance) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotDensityMatrix {
                reason: format!("not square: {}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        let herm_dev = (&matrix - matrix.adjoint()).norm();
        if herm_dev > tol.algebraic {
            return Err(Error::NotHermitian {
                deviation: herm_dev,
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol.algebraic || trace.im.abs() > tol.algebraic {
            return Err(Error::NotDensityMatrix {
                reason: format!("trace = {trace} != 1"),
            });
        }
        let eig = nalgebra::SymmetricEigen::new(matrix.clone());
        if eig.eigenvalues.iter().any(|&l| l < -tol.algebraic) {
            return Err(Error::NotDensityMatrix {
                reason: "negative eigenvalue".into(),
            });
        }
        Ok(DensityMatrix { matrix })
    }

    /// Diagonal density matrix from a probability vector.
    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || probs.iter().any(|&p| p < 0.0) {
            return Err(Error::NotDensityMatrix {
                reason: format!("diagonal does not form a distribution (sum {sum})"),
            });
        }
        let d = probs.len();
        Ok(DensityMatrix {
            matrix: CMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    C64::new(probs[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix {
            matrix: CMatrix::identity(d, d) / C64::new(d as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Frobenius distance to another density matrix.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

/// Schmidt decomposition of a bipartite pure state: nonincreasing positive
/// coefficients with orthonormal local bases on each side.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub left: Vec<PureState>,
    pub right: Vec<PureState>,
}

impl SchmidtForm {
    /// Number of nonzero Schmidt coefficients.
    pub fn schmidt_number(&self) -> usize {
        self.coefficients.len()
    }

    /// Rebuilds `sum_j c_j |u_j>|v_j>` as a bipartite state.
    pub fn reconstruct(&self) -> Result<PureState> {
        let (da, db) = (self.left[0].dim(), self.right[0].dim());
        let mut v = CVector::zeros(da * db);
        for ((c, u), w) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            let term = u.kron(w);
            v += term.amplitudes() * C64::new(*c, 0.0);
        }
        PureState::normalized(v)?.with_bipartite(da, db)
    }
}

/// Rescales a vector so its first entry above `tol` in magnitude is real
/// positive. Zero vectors pass through untouched.
pub fn fix_phase(v: &CVector, tol: f64) -> CVector {
    for z in v.iter() {
        if z.norm() > tol {
            let phase = z / z.norm();
            return v.map(|x| x * phase.conj());
        }
    }
    v.clone()
}

/// Schmidt-decomposes a bipartite pure state via SVD of its amplitude matrix.
///
/// Coefficients below the algebraic tolerance are dropped; the rest are
/// sorted nonincreasing with ties broken lexicographically on the left-basis
/// amplitudes. Each left-basis state has its first significant amplitude made
/// real positive; the matching right-basis state absorbs the phase so the
/// reconstruction is exact.
pub fn schmidt_decompose(state: &PureState, tol: &Tolerance) -> Result<SchmidtForm> {
    let m = state.as_bipartite_matrix()?;
    let (d_a, d_b) = state.bipartite().unwrap();
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().expect("svd with u requested");
    let v_t = svd.v_t.as_ref().expect("svd with v_t requested");

    let mut terms: Vec<(f64, CVector, CVector)> = Vec::new();
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= tol.algebraic {
            continue;
        }
        let mut left: CVector = u.column(k).into_owned();
        let mut right: CVector = v_t.row(k).transpose();
        // Push the left factor's phase onto the right factor.
        if let Some(z) = left.iter().find(|z| z.norm() > tol.algebraic) {
            let phase = z / z.norm();
            left = left.map(|x| x * phase.conj());
            right = right.map(|x| x * phase);
        }
        terms.push((sigma, left, right));
    }
    if terms.is_empty() {
        return Err(Error::NotNormalized { norm: 0.0 });
    }
    terms.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| lex_cmp(&a.1, &b.1))
    });

    let mut coefficients = Vec::with_capacity(terms.len());
    let mut left = Vec::with_capacity(terms.len());
    let mut right = Vec::with_capacity(terms.len());
    for (sigma, l, r) in terms {
        coefficients.push(sigma);
        left.push(PureState::normalized(l)?);
        right.push(PureState::normalized(r)?);
    }
    debug_assert!(left.iter().all(|s| s.dim() == d_a));
    debug_assert!(right.iter().all(|s| s.dim() == d_b));
    Ok(SchmidtForm {
        coefficients,
        left,
        right,
    })
}

fn lex_cmp(a: &CVector, b: &CVector) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x
            .re
            .partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
        {
            std::cmp::Ordering::Equal => continue,
            ord => return ord,
        }
    }
    std::cmp::Ordering::Equal
}

/// Traces out one subsystem of a bipartite pure state.
///
/// `Side::A` returns `Tr_B |psi><psi|` (the state kept on A), `Side::B` the
/// other marginal.
pub fn partial_trace(state: &PureState, side: Side) -> Result<DensityMatrix> {
    let m = state.as_bipartite_matrix()?;
    let rho = match side {
        Side::A => &m * m.adjoint(),
        Side::B => (m.adjoint() * &m).transpose(),
    };
    // The construction is Hermitian PSD with unit trace by normalization.
    Ok(DensityMatrix { matrix: rho })
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues sorted nonincreasing,
/// eigenvector phases fixed. Returns the eigenvectors as matrix columns.
pub fn hermitian_eigen(m: &CMatrix, tol: &Tolerance) -> Result<(Vec<f64>, CMatrix)> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch {
            rows_a: m.nrows(),
            cols_a: m.ncols(),
            rows_b: m.ncols(),
            cols_b: m.nrows(),
        });
    }
    let dev = (m - m.adjoint()).norm();
    if dev > tol.algebraic {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let d = m.nrows();
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        let col = fix_phase(&eig.eigenvectors.column(i).into_owned(), tol.algebraic);
        vectors.set_column(k, &col);
    }
    Ok((values, vectors))
}

/// Spectral decomposition of a density matrix.
pub fn eig_hermitian(rho: &DensityMatrix, tol: &Tolerance) -> Result<(Vec<f64>, Vec<PureState>)> {
    let (values, vectors) = hermitian_eigen(rho.matrix(), tol)?;
    let states = (0..rho.dim())
        .map(|k| PureState::normalized(vectors.column(k).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    Ok((values, states))
}

/// Checks `M^H M = I` within the algebraic tolerance. A matrix with fewer
/// rows than columns cannot be an isometry and is rejected outright.
pub fn is_isometry(m: &CMatrix, tol: &Tolerance) -> Result<bool> {
    if m.nrows() < m.ncols() {
        return Err(Error::IsometryShape {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let gram = m.adjoint() * m;
    let dev = (&gram - CMatrix::identity(m.ncols(), m.ncols())).norm();
    Ok(dev <= tol.algebraic)
}

/// Checks a square matrix for unitarity, returning the deviation on failure.
pub fn check_unitary(m: &CMatrix, tol: &Tolerance) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch {
            rows_a: m.nrows(),
            cols_a: m.ncols(),
            rows_b: m.ncols(),
            cols_b: m.nrows(),
        });
    }
    let dev = (m.adjoint() * m - CMatrix::identity(m.nrows(), m.ncols())).norm();
    if dev > tol.algebraic {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(())
}

/// Frobenius norm of `AB - BA`.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.nrows() != a.ncols() || a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            rows_a: a.nrows(),
            cols_a: a.ncols(),
            rows_b: b.nrows(),
            cols_b: b.ncols(),
        });
    }
    Ok((a * b - b * a).norm())
}

/// Generalized Pauli operators in dimension `d >= 2`:
/// `Z = sum_k exp(2 pi i k / d) |k><k|` and `X = sum_k |k+1 mod d><k|`.
pub fn generalized_pauli(d: usize, kind: Pauli) -> Result<CMatrix> {
    if d < 2 {
        return Err(Error::invalid(format!(
            "generalized Pauli needs dimension >= 2, got {d}"
        )));
    }
    let mut m = CMatrix::zeros(d, d);
    match kind {
        Pauli::Z => {
            for k in 0..d {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / d as f64;
                m[(k, k)] = C64::new(phi.cos(), phi.sin());
            }
        }
        Pauli::X => {
            for k in 0..d {
                m[((k + 1) % d, k)] = C64::new(1.0, 0.0);
            }
        }
    }
    Ok(m)
}

/// Completes a set of linearly independent states to a full orthonormal
/// basis and returns the new (complement) states, orthonormal and orthogonal
/// to every input. Modified Gram-Schmidt with a re-orthogonalization pass.
pub fn orthonormal_complement(
    vectors: &[PureState],
    dim: usize,
    tol: &Tolerance,
) -> Result<Vec<PureState>> {
    let mut basis: Vec<CVector> = Vec::with_capacity(dim);
    for s in vectors {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        let v = orthogonalize_against(s.amplitudes(), &basis);
        let norm = v.norm();
        if norm < tol.algebraic.max(1e-8) {
            return Err(Error::DependentVectors);
        }
        basis.push(v / C64::new(norm, 0.0));
    }
    let span = basis.len();
    let mut complement = Vec::with_capacity(dim - span);
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = CVector::zeros(dim);
        e[k] = C64::new(1.0, 0.0);
        let v = orthogonalize_against(&e, &basis);
        let norm = v.norm();
        if norm < 1e-8 {
            continue;
        }
        let v = fix_phase(&(v / C64::new(norm, 0.0)), tol.algebraic);
        complement.push(PureState::normalized(v.clone())?);
        basis.push(v);
    }
    debug_assert_eq!(span + complement.len(), dim);
    Ok(complement)
}

fn orthogonalize_against(v: &CVector, basis: &[CVector]) -> CVector {
    let mut out = v.clone();
    // two passes keep the result orthogonal to working precision
    for _ in 0..2 {
        for b in basis {
            let overlap = b.dotc(&out);
            out -= b * overlap;
        }
    }
    out
}

/// Orthonormal basis of the span of the given states (modified Gram-Schmidt,
/// dependent directions skipped).
pub fn orthonormal_span(states: &[PureState], tol: &Tolerance) -> Result<Vec<PureState>> {
    let mut basis: Vec<CVector> = Vec::new();
    for s in states {
        let v = orthogonalize_against(s.amplitudes(), &basis);
        if v.norm() > tol.algebraic.max(1e-8) {
            let n = v.norm();
            basis.push(v / C64::new(n, 0.0));
        }
    }
    basis
        .into_iter()
        .map(|v| PureState::normalized(fix_phase(&v, tol.algebraic)))
        .collect()
}

/// Projector onto the span of the given states (assumed orthonormal).
pub fn projector(states: &[PureState]) -> CMatrix {
    let dim = states[0].dim();
    let mut p = CMatrix::zeros(dim, dim);
    for s in states {
        p += s.amplitudes() * s.amplitudes().adjoint();
    }
    p
}

/// Max deviation from pairwise orthonormality over a list of states.
pub fn orthonormality_deviation(states: &[PureState]) -> f64 {
    let mut dev: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((a.inner(b).norm() - target).abs());
        }
    }
    dev
}
