//! Hyperdisks: families of pure states with fixed overlap magnitudes
//! against an orthonormal basis of their span.
//!
//! An `m`-dimensional hyperdisk is the set `{ sum_j r_j e^{i theta_j} |phi_j> }`
//! for a fixed orthonormal basis `{|phi_j>}` and strictly positive
//! coefficients `r` with unit square sum. This module provides membership,
//! sampling, phase-unitary generation, isometric transport, the Gramian
//! subhyperdisk criterion, the common-parent obstruction for pairs of disks,
//! and the classification of two-dimensional regular subsets.

use crate::error::{Error, Result};
use crate::linalg::{
    self, projector, schmidt_decompose, CMatrix, CVector, PureState, Tolerance, C64,
};

/// Angular tolerance for deciding whether two relative phases coincide.
pub const ANGULAR_TOL: f64 = 1e-7;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// An `m`-dimensional hyperdisk: orthonormal basis plus strictly positive
/// coefficient vector with unit square sum.
#[derive(Debug, Clone)]
pub struct Hyperdisk {
    basis: Vec<PureState>,
    coeffs: Vec<f64>,
}

impl Hyperdisk {
    pub fn new(basis: Vec<PureState>, coeffs: Vec<f64>, tol: &Tolerance) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Empty {
                what: "hyperdisk basis".into(),
            });
        }
        if basis.len() != coeffs.len() {
            return Err(Error::BadHyperdisk {
                reason: format!(
                    "basis size {} != coefficient count {}",
                    basis.len(),
                    coeffs.len()
                ),
            });
        }
        let dim = basis[0].dim();
        if basis.iter().any(|s| s.dim() != dim) {
            return Err(Error::BadHyperdisk {
                reason: "basis states live in different spaces".into(),
            });
        }
        let dev = linalg::orthonormality_deviation(&basis);
        if dev > tol.algebraic {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
        if coeffs.iter().any(|&r| r <= tol.algebraic) {
            return Err(Error::BadHyperdisk {
                reason: "coefficients must be strictly positive".into(),
            });
        }
        let sq: f64 = coeffs.iter().map(|r| r * r).sum();
        if (sq - 1.0).abs() > 1e-6 {
            return Err(Error::BadHyperdisk {
                reason: format!("coefficient square sum {sq} != 1"),
            });
        }
        // renormalize exactly
        let scale = sq.sqrt();
        let coeffs = coeffs.iter().map(|r| r / scale).collect();
        Ok(Hyperdisk { basis, coeffs })
    }

    /// Dimension `m` of the disk (number of basis states).
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Dimension of the ambient Hilbert space.
    pub fn ambient_dim(&self) -> usize {
        self.basis[0].dim()
    }

    pub fn basis(&self) -> &[PureState] {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Membership residual: how far `psi` is from being a member, as the
    /// larger of the out-of-span norm and the worst coefficient deviation.
    pub fn membership_residual(&self, psi: &PureState) -> f64 {
        let p = projector(&self.basis);
        let in_span = &p * psi.amplitudes();
        let span_residual = (psi.amplitudes() - &in_span).norm();
        let coeff_residual = self
            .basis
            .iter()
            .zip(&self.coeffs)
            .map(|(phi, r)| (phi.fidelity(psi) - r).abs())
            .fold(0.0_f64, f64::max);
        span_residual.max(coeff_residual)
    }

    /// True iff `psi` lies in the span and its overlap magnitudes match the
    /// coefficient vector, both within the algebraic tolerance.
    pub fn contains(&self, psi: &PureState, tol: &Tolerance) -> bool {
        self.contains_within(psi, tol.algebraic)
    }

    /// Membership at an explicit residual threshold (used when `psi` comes
    /// out of a numerical search rather than exact algebra).
    pub fn contains_within(&self, psi: &PureState, eps: f64) -> bool {
        psi.dim() == self.ambient_dim() && self.membership_residual(psi) <= eps
    }

    /// The member `sum_j r_j e^{i theta_j} |phi_j>`.
    pub fn sample_state(&self, theta: &[f64]) -> Result<PureState> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        let mut v = CVector::zeros(self.ambient_dim());
        for ((phi, &r), &t) in self.basis.iter().zip(&self.coeffs).zip(theta) {
            v += phi.amplitudes() * (C64::new(t.cos(), t.sin()) * C64::new(r, 0.0));
        }
        let state = PureState::normalized(v)?;
        match common_tag(&self.basis) {
            Some((a, b)) => state.with_bipartite(a, b),
            None => Ok(state),
        }
    }

    /// The commuting phase unitary `U(theta) = sum_j e^{i theta_j}
    /// |phi_j><phi_j| + P_perp` generating the disk from any fixed member.
    pub fn phase_unitary(&self, theta: &[f64]) -> Result<CMatrix> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        let n = self.ambient_dim();
        let mut u = CMatrix::identity(n, n) - projector(&self.basis);
        for (phi, &t) in self.basis.iter().zip(theta) {
            let outer = phi.amplitudes() * phi.amplitudes().adjoint();
            u += outer * C64::new(t.cos(), t.sin());
        }
        Ok(u)
    }

    /// Transports the disk through a linear isometry: basis states map, the
    /// coefficient vector is untouched.
    pub fn image_under_isometry(&self, v: &CMatrix, tol: &Tolerance) -> Result<Hyperdisk> {
        if !linalg::is_isometry(v, tol)? {
            let dev = (v.adjoint() * v - CMatrix::identity(v.ncols(), v.ncols())).norm();
            return Err(Error::NotIsometry { deviation: dev });
        }
        if v.ncols() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: v.ncols(),
            });
        }
        let basis = self
            .basis
            .iter()
            .map(|phi| PureState::normalized(v * phi.amplitudes()))
            .collect::<Result<Vec<_>>>()?;
        Hyperdisk::new(basis, self.coeffs.clone(), tol)
    }

    /// Re-tags every basis state with a bipartite factorization.
    pub fn with_bipartite(self, d_a: usize, d_b: usize) -> Result<Hyperdisk> {
        let basis = self
            .basis
            .into_iter()
            .map(|s| s.with_bipartite(d_a, d_b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Hyperdisk {
            basis,
            coeffs: self.coeffs,
        })
    }

    /// Presentation-independent equality: every basis state of one disk must
    /// match a unique basis state of the other with unit overlap and equal
    /// coefficient. Matching is greedy by largest overlap.
    pub fn equals(&self, other: &Hyperdisk, tol: &Tolerance) -> bool {
        if self.dim() != other.dim() || self.ambient_dim() != other.ambient_dim() {
            return false;
        }
        let eps = tol.algebraic.max(1e-9) * 10.0;
        let mut used = vec![false; other.dim()];
        for (phi, &r) in self.basis.iter().zip(&self.coeffs) {
            let mut best: Option<(usize, f64)> = None;
            for (k, other_phi) in other.basis.iter().enumerate() {
                if used[k] {
                    continue;
                }
                let f = phi.fidelity(other_phi);
                if best.is_none_or(|(_, bf)| f > bf) {
                    best = Some((k, f));
                }
            }
            match best {
                Some((k, f)) if (1.0 - f).abs() <= eps && (r - other.coeffs[k]).abs() <= eps => {
                    used[k] = true;
                }
                _ => return false,
            }
        }
        true
    }
}

fn common_tag(states: &[PureState]) -> Option<(usize, usize)> {
    let first = states.first()?.bipartite()?;
    states
        .iter()
        .all(|s| s.bipartite() == Some(first))
        .then_some(first)
}

/// The overlap-magnitude vector `(|<phi_0|psi>|, ..., |<phi_{m-1}|psi>|)`.
/// It has unit norm exactly when `psi` lies in the span of the basis.
pub fn coefficient_vector(basis: &[PureState], psi: &PureState) -> Result<Vec<f64>> {
    let dev = linalg::orthonormality_deviation(basis);
    if dev > 1e-9 {
        return Err(Error::NotOrthonormal { deviation: dev });
    }
    if let Some(first) = basis.first() {
        if first.dim() != psi.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                got: psi.dim(),
            });
        }
    }
    Ok(basis.iter().map(|phi| phi.fidelity(psi)).collect())
}

/// The unique-by-construction two-dimensional hyperdisk through a pair of
/// distinct states: the great circle of their qubit span.
///
/// With `s = |<psi0|psi1>|`, the basis is `(psi0 +/- e^{i gamma} psi1)`
/// normalized (the phase making the overlap real), and the coefficients are
/// `sqrt((1 +/- s) / 2)`, which give both inputs the same overlap pattern.
pub fn hyperdisk_through_pair(
    psi0: &PureState,
    psi1: &PureState,
    tol: &Tolerance,
) -> Result<Hyperdisk> {
    if psi0.dim() != psi1.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi0.dim(),
            got: psi1.dim(),
        });
    }
    let overlap = psi0.inner(psi1);
    let s = overlap.norm();
    if s >= 1.0 - tol.algebraic {
        return Err(Error::DegeneratePair);
    }
    // rotate psi1 so the overlap is real nonnegative
    let gamma = if s > 0.0 {
        overlap.conj() / s
    } else {
        C64::new(1.0, 0.0)
    };
    let rotated = psi1.amplitudes() * gamma;
    let plus = psi0.amplitudes() + &rotated;
    let minus = psi0.amplitudes() - &rotated;
    let phi_plus = PureState::normalized(plus)?;
    let phi_minus = PureState::normalized(minus)?;
    let r_plus = ((1.0 + s) / 2.0).sqrt();
    let r_minus = ((1.0 - s) / 2.0).sqrt();
    let disk = Hyperdisk::new(vec![phi_plus, phi_minus], vec![r_plus, r_minus], tol)?;
    match (psi0.bipartite(), psi1.bipartite()) {
        (Some(t0), Some(t1)) if t0 == t1 => disk.with_bipartite(t0.0, t0.1),
        _ => Ok(disk),
    }
}

/// Gramian `G_jk = r'_k <phi_j|phi'_k>` between a disk and a candidate
/// subdisk, with per-row and per-column counts of entries above tolerance.
#[derive(Debug, Clone)]
pub struct GramianPattern {
    pub matrix: CMatrix,
    pub row_support: Vec<usize>,
    pub col_support: Vec<usize>,
}

impl GramianPattern {
    /// The subhyperdisk pattern: every row carries exactly one entry above
    /// tolerance, of magnitude `r_j`, and every column at least one.
    pub fn is_subdisk_pattern(&self, parent_coeffs: &[f64], tol: &Tolerance) -> bool {
        let eps = tol.algebraic;
        for (j, &support) in self.row_support.iter().enumerate() {
            if support != 1 {
                return false;
            }
            let row_max = (0..self.matrix.ncols())
                .map(|k| self.matrix[(j, k)].norm())
                .fold(0.0_f64, f64::max);
            if (row_max - parent_coeffs[j]).abs() > eps.max(1e-9) * 10.0 {
                return false;
            }
        }
        self.col_support.iter().all(|&c| c >= 1)
    }
}

/// Computes the Gramian pattern of `h_prime` against `h`.
pub fn gramian(h: &Hyperdisk, h_prime: &Hyperdisk, tol: &Tolerance) -> Result<GramianPattern> {
    if h.ambient_dim() != h_prime.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: h.ambient_dim(),
            got: h_prime.ambient_dim(),
        });
    }
    let (m, mp) = (h.dim(), h_prime.dim());
    let matrix = CMatrix::from_fn(m, mp, |j, k| {
        h.basis()[j].inner(&h_prime.basis()[k]) * C64::new(h_prime.coeffs()[k], 0.0)
    });
    let above = |z: &C64| z.norm() > tol.algebraic;
    let row_support = (0..m)
        .map(|j| (0..mp).filter(|&k| above(&matrix[(j, k)])).count())
        .collect();
    let col_support = (0..mp)
        .map(|k| (0..m).filter(|&j| above(&matrix[(j, k)])).count())
        .collect();
    Ok(GramianPattern {
        matrix,
        row_support,
        col_support,
    })
}

/// Decides whether `h_prime` is a subhyperdisk of `h`: the Gramian pattern
/// must hold and a deterministic sweep of `h_prime` members must all be
/// contained in `h`.
pub fn is_subhyperdisk(h_prime: &Hyperdisk, h: &Hyperdisk, tol: &Tolerance) -> Result<bool> {
    if h_prime.dim() > h.dim() {
        return Ok(false);
    }
    let pattern = gramian(h, h_prime, tol)?;
    if !pattern.is_subdisk_pattern(h.coeffs(), tol) {
        return Ok(false);
    }
    for theta in phase_sweep(h_prime.dim(), 64) {
        let sample = h_prime.sample_state(&theta)?;
        if !h.contains_within(&sample, tol.algebraic.max(1e-9) * 100.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Deterministic low-discrepancy sweep of the `m`-torus: a few axis-aligned
/// corners plus a Kronecker sequence.
pub fn phase_sweep(m: usize, points: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(points + 2);
    out.push(vec![0.0; m]);
    let mut alternating = vec![0.0; m];
    for (j, a) in alternating.iter_mut().enumerate() {
        if j % 2 == 1 {
            *a = std::f64::consts::PI;
        }
    }
    out.push(alternating);
    // Kronecker sequence on irrational multiples of the golden ratio
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut alphas = Vec::with_capacity(m);
    let mut a = phi;
    for _ in 0..m {
        alphas.push(a);
        a = (a * phi).fract();
    }
    for t in 1..=points {
        out.push(
            alphas
                .iter()
                .map(|alpha| TAU * ((t as f64) * alpha).fract())
                .collect(),
        );
    }
    out
}

/// Scans for a pair of basis states, one from each disk, that are orthogonal
/// within tolerance. An empty result certifies (by the contrapositive of the
/// common-parent criterion) that the two disks are not subsets of any single
/// `(m+1)`-dimensional hyperdisk.
pub fn common_parent_obstruction(
    h0: &Hyperdisk,
    h1: &Hyperdisk,
    tol: &Tolerance,
) -> Result<Option<(usize, usize)>> {
    if h0.dim() != h1.dim() {
        return Err(Error::invalid(format!(
            "disks must have equal dimension, got {} and {}",
            h0.dim(),
            h1.dim()
        )));
    }
    if h0.dim() < 2 {
        return Err(Error::precondition(
            "common-parent obstruction needs disks of dimension >= 2",
        ));
    }
    if h0.ambient_dim() != h1.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: h0.ambient_dim(),
            got: h1.ambient_dim(),
        });
    }
    for (k, phi0) in h0.basis().iter().enumerate() {
        for (l, phi1) in h1.basis().iter().enumerate() {
            if phi0.fidelity(phi1) < tol.algebraic {
                return Ok(Some((k, l)));
            }
        }
    }
    Ok(None)
}

/// Verdict for a two-dimensional regular subset: either exactly two states
/// or a two-dimensional subhyperdisk.
#[derive(Debug, Clone)]
pub enum RegularSubsetVerdict {
    TwoStates { states: [PureState; 2] },
    Disk { disk: Hyperdisk },
}

/// Classifies the regular subset generated by two distinct members of a
/// hyperdisk.
///
/// The relative phases `theta_j = arg<phi_j|psi1> - arg<phi_j|psi0>` are
/// reduced mod 2 pi and clustered with [`ANGULAR_TOL`]. At most two distinct
/// values means the pair generates a two-dimensional subhyperdisk (the
/// grouped-basis construction); three or more distinct values pin the subset
/// down to the two states themselves.
pub fn classify_2d_regular_subset(
    psi0: &PureState,
    psi1: &PureState,
    h: &Hyperdisk,
    tol: &Tolerance,
) -> Result<RegularSubsetVerdict> {
    let eps = tol.optimization;
    if !h.contains_within(psi0, eps) || !h.contains_within(psi1, eps) {
        return Err(Error::precondition(
            "both states must be members of the hyperdisk",
        ));
    }
    if psi0.fidelity(psi1) >= 1.0 - tol.algebraic {
        return Err(Error::DegeneratePair);
    }

    let overlaps0: Vec<C64> = h.basis().iter().map(|phi| phi.inner(psi0)).collect();
    let overlaps1: Vec<C64> = h.basis().iter().map(|phi| phi.inner(psi1)).collect();
    let phases: Vec<f64> = overlaps0
        .iter()
        .zip(&overlaps1)
        .map(|(a, b)| {
            let t = b.arg() - a.arg();
            t.rem_euclid(TAU)
        })
        .collect();

    let clusters = circular_clusters(&phases, ANGULAR_TOL);
    let n_clusters = 1 + clusters.iter().copied().max().unwrap_or(0);
    match n_clusters {
        0 | 1 => Err(Error::DegeneratePair),
        2 => {
            // two-group construction: merge each phase group into one basis state
            // carrying the group's combined weight. Basis states are rephased
            // so psi0 has all-positive overlaps first.
            let dim = h.ambient_dim();
            let mut group_vec = [CVector::zeros(dim), CVector::zeros(dim)];
            for (j, phi) in h.basis().iter().enumerate() {
                let sigma = overlaps0[j] / overlaps0[j].norm();
                let weight = C64::new(h.coeffs()[j], 0.0) * sigma;
                group_vec[clusters[j]] += phi.amplitudes() * weight;
            }
            let r: Vec<f64> = group_vec.iter().map(|v| v.norm()).collect();
            let basis = group_vec
                .iter()
                .map(|v| PureState::normalized(v.clone()))
                .collect::<Result<Vec<_>>>()?;
            let basis = match common_tag(h.basis()) {
                Some((a, b)) => basis
                    .into_iter()
                    .map(|s| s.with_bipartite(a, b))
                    .collect::<Result<Vec<_>>>()?,
                None => basis,
            };
            let disk = Hyperdisk::new(basis, r, tol)?;
            Ok(RegularSubsetVerdict::Disk { disk })
        }
        _ => Ok(RegularSubsetVerdict::TwoStates {
            states: [psi0.clone(), psi1.clone()],
        }),
    }
}

/// Assigns each angle to a cluster index; angles within `angtol` of each
/// other (circularly) share a cluster. Cluster 0 holds the smallest angles
/// after the largest circular gap.
fn circular_clusters(phases: &[f64], angtol: f64) -> Vec<usize> {
    let n = phases.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| phases[i].partial_cmp(&phases[j]).unwrap());

    // circular gaps between consecutive sorted values
    let mut gaps = Vec::with_capacity(n);
    for w in 0..n {
        let a = phases[order[w]];
        let b = phases[order[(w + 1) % n]];
        let gap = if w + 1 == n { b + TAU - a } else { b - a };
        gaps.push(gap);
    }
    let boundaries: Vec<usize> = (0..n).filter(|&w| gaps[w] > angtol).collect();
    let mut clusters = vec![0usize; n];
    if boundaries.is_empty() {
        return clusters; // all angles coincide
    }
    // walk the sorted order starting just past the last boundary
    let start = (boundaries[boundaries.len() - 1] + 1) % n;
    let mut cluster = 0usize;
    for step in 0..n {
        let w = (start + step) % n;
        clusters[order[w]] = cluster;
        if gaps[w] > angtol && step + 1 < n {
            cluster += 1;
        }
    }
    clusters
}

/// A hyperdisk whose basis is a Schmidt basis: product states with
/// orthonormal local factors on each side.
#[derive(Debug, Clone)]
pub struct SchmidtHyperdisk {
    disk: Hyperdisk,
    left: Vec<PureState>,
    right: Vec<PureState>,
    dims: (usize, usize),
}

impl SchmidtHyperdisk {
    /// Builds the disk `sum_j r_j e^{i theta_j} |l_j>|r_j>` from local
    /// factors and coefficients.
    pub fn from_factors(
        left: Vec<PureState>,
        right: Vec<PureState>,
        coeffs: Vec<f64>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if left.len() != right.len() || left.len() != coeffs.len() {
            return Err(Error::BadHyperdisk {
                reason: "factor lists and coefficients must have equal length".into(),
            });
        }
        for (factors, side) in [(&left, "left"), (&right, "right")] {
            let dev = linalg::orthonormality_deviation(factors);
            if dev > tol.algebraic {
                return Err(Error::BadHyperdisk {
                    reason: format!("{side} factors not orthonormal (deviation {dev})"),
                });
            }
        }
        let basis: Vec<PureState> = left.iter().zip(&right).map(|(l, r)| l.kron(r)).collect();
        let disk = Hyperdisk::new(basis, coeffs, tol)?;
        let dims = (left[0].dim(), right[0].dim());
        Ok(SchmidtHyperdisk {
            disk,
            left,
            right,
            dims,
        })
    }

    /// Validates that a hyperdisk in a `d_a x d_b` space is a Schmidt
    /// hyperdisk and extracts the local factors.
    pub fn from_hyperdisk(
        disk: Hyperdisk,
        d_a: usize,
        d_b: usize,
        tol: &Tolerance,
    ) -> Result<Self> {
        if disk.ambient_dim() != d_a * d_b {
            return Err(Error::BadBipartiteTag {
                d_a,
                d_b,
                dim: disk.ambient_dim(),
            });
        }
        let mut left = Vec::with_capacity(disk.dim());
        let mut right = Vec::with_capacity(disk.dim());
        for phi in disk.basis() {
            let tagged = phi.clone().with_bipartite(d_a, d_b)?;
            let form = schmidt_decompose(&tagged, tol)?;
            if form.schmidt_number() != 1 {
                return Err(Error::BadHyperdisk {
                    reason: "basis state is not a product state".into(),
                });
            }
            left.push(form.left[0].clone());
            right.push(form.right[0].clone());
        }
        for factors in [&left, &right] {
            let dev = linalg::orthonormality_deviation(factors);
            if dev > tol.algebraic.max(1e-9) * 100.0 {
                return Err(Error::BadHyperdisk {
                    reason: format!("local factors not orthonormal (deviation {dev})"),
                });
            }
        }
        let disk = disk.with_bipartite(d_a, d_b)?;
        Ok(SchmidtHyperdisk {
            disk,
            left,
            right,
            dims: (d_a, d_b),
        })
    }

    pub fn as_hyperdisk(&self) -> &Hyperdisk {
        &self.disk
    }

    pub fn left_factors(&self) -> &[PureState] {
        &self.left
    }

    pub fn right_factors(&self) -> &[PureState] {
        &self.right
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }
}

/// Checks the Schmidt-hyperdisk property without constructing the factors:
/// every basis state is a product state and the local factors on each side
/// are pairwise orthonormal.
pub fn is_schmidt_hyperdisk(
    h: &Hyperdisk,
    d_a: usize,
    d_b: usize,
    tol: &Tolerance,
) -> Result<bool> {
    if h.ambient_dim() != d_a * d_b {
        return Err(Error::BadBipartiteTag {
            d_a,
            d_b,
            dim: h.ambient_dim(),
        });
    }
    Ok(SchmidtHyperdisk::from_hyperdisk(h.clone(), d_a, d_b, tol).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn ket(amps: &[(f64, f64)]) -> PureState {
        PureState::normalized(CVector::from_iterator(
            amps.len(),
            amps.iter().map(|&(re, im)| C64::new(re, im)),
        ))
        .unwrap()
    }

    fn basis_pair(dim: usize) -> Vec<PureState> {
        vec![
            PureState::basis_state(dim, 0),
            PureState::basis_state(dim, 1),
        ]
    }

    fn equal_disk(dim: usize) -> Hyperdisk {
        let r = 1.0 / 2.0_f64.sqrt();
        Hyperdisk::new(basis_pair(dim), vec![r, r], &tol()).unwrap()
    }

    /// The four-coefficient Schmidt disk over {|00>,|11>,|22>,|33>} with
    /// weights sqrt(0.1..0.4).
    fn schmidt_disk_d4() -> Hyperdisk {
        let basis: Vec<PureState> = (0..4)
            .map(|j| {
                PureState::basis_state(16, j * 4 + j)
                    .with_bipartite(4, 4)
                    .unwrap()
            })
            .collect();
        let coeffs = vec![
            0.1_f64.sqrt(),
            0.2_f64.sqrt(),
            0.3_f64.sqrt(),
            0.4_f64.sqrt(),
        ];
        Hyperdisk::new(basis, coeffs, &tol()).unwrap()
    }

    fn s0_subdisk() -> Hyperdisk {
        // basis {(|00> + sqrt2 |11>)/sqrt3, (sqrt3 |22> + 2 |33>)/sqrt7}
        let mut b0 = CVector::zeros(16);
        b0[0] = C64::new(1.0, 0.0);
        b0[5] = C64::new(2.0_f64.sqrt(), 0.0);
        let mut b1 = CVector::zeros(16);
        b1[10] = C64::new(3.0_f64.sqrt(), 0.0);
        b1[15] = C64::new(2.0, 0.0);
        Hyperdisk::new(
            vec![
                PureState::normalized(b0)
                    .unwrap()
                    .with_bipartite(4, 4)
                    .unwrap(),
                PureState::normalized(b1)
                    .unwrap()
                    .with_bipartite(4, 4)
                    .unwrap(),
            ],
            vec![0.3_f64.sqrt(), 0.7_f64.sqrt()],
            &tol(),
        )
        .unwrap()
    }

    fn s1_subdisk() -> Hyperdisk {
        // basis {(|00> + sqrt3 |22>)/2, (sqrt2 |11> + 2 |33>)/sqrt6}
        let mut b0 = CVector::zeros(16);
        b0[0] = C64::new(1.0, 0.0);
        b0[10] = C64::new(3.0_f64.sqrt(), 0.0);
        let mut b1 = CVector::zeros(16);
        b1[5] = C64::new(2.0_f64.sqrt(), 0.0);
        b1[15] = C64::new(2.0, 0.0);
        Hyperdisk::new(
            vec![
                PureState::normalized(b0)
                    .unwrap()
                    .with_bipartite(4, 4)
                    .unwrap(),
                PureState::normalized(b1)
                    .unwrap()
                    .with_bipartite(4, 4)
                    .unwrap(),
            ],
            vec![0.4_f64.sqrt(), 0.6_f64.sqrt()],
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn coefficient_vector_plus_state() {
        let psi = ket(&[(1.0, 0.0), (1.0, 0.0)]);
        let r = coefficient_vector(&basis_pair(2), &psi).unwrap();
        let inv = 1.0 / 2.0_f64.sqrt();
        assert_abs_diff_eq!(r[0], inv, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], inv, epsilon = 1e-12);
    }

    #[test]
    fn coefficient_vector_orthogonal_state() {
        let psi = PureState::basis_state(3, 2);
        let r = coefficient_vector(&basis_pair(3), &psi).unwrap();
        assert_abs_diff_eq!(r[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn coefficient_vector_rejects_bad_basis() {
        let skew = vec![
            ket(&[(1.0, 0.0), (0.0, 0.0)]),
            ket(&[(1.0, 0.0), (1.0, 0.0)]),
        ];
        assert!(coefficient_vector(&skew, &PureState::basis_state(2, 0)).is_err());
    }

    #[test]
    fn membership_respects_phase_freedom() {
        let h = equal_disk(2);
        let member = ket(&[(1.0, 0.0), (0.0, 1.0)]); // (|0> + i|1>)/sqrt2
        assert!(h.contains(&member, &tol()));
        assert!(!h.contains(&PureState::basis_state(2, 0), &tol()));
    }

    #[test]
    fn membership_requires_span() {
        let h = equal_disk(3);
        let outside = ket(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(!h.contains(&outside, &tol()));
    }

    #[test]
    fn sample_state_zero_phases() {
        let h = equal_disk(2);
        let s = h.sample_state(&[0.0, 0.0]).unwrap();
        let expected = ket(&[(1.0, 0.0), (1.0, 0.0)]);
        assert!(s.fidelity(&expected) > 1.0 - 1e-12);
        let t = h.sample_state(&[0.0, std::f64::consts::PI]).unwrap();
        let expected_minus = ket(&[(1.0, 0.0), (-1.0, 0.0)]);
        assert!(t.fidelity(&expected_minus) > 1.0 - 1e-12);
        assert!(h.contains(&s, &tol()) && h.contains(&t, &tol()));
    }

    #[test]
    fn sample_reproduces_theta_pattern_on_schmidt_disk() {
        // theta = (0, 0, a, a) gives the alpha-family member of the S0 split
        let disk = schmidt_disk_d4();
        let alpha = 1.234;
        let sample = disk.sample_state(&[0.0, 0.0, alpha, alpha]).unwrap();
        let mut v = CVector::zeros(16);
        let e = C64::new(alpha.cos(), alpha.sin());
        v[0] = C64::new(1.0, 0.0);
        v[5] = C64::new(2.0_f64.sqrt(), 0.0);
        v[10] = C64::new(3.0_f64.sqrt(), 0.0) * e;
        v[15] = C64::new(2.0, 0.0) * e;
        let expected = PureState::normalized(v).unwrap();
        assert!(sample.fidelity(&expected) > 1.0 - 1e-12);
    }

    #[test]
    fn phase_unitary_identity_and_diag() {
        let h = equal_disk(3);
        let u = h.phase_unitary(&[0.0, 0.0]).unwrap();
        assert!((u - CMatrix::identity(3, 3)).norm() < 1e-12);

        let u = h.phase_unitary(&[0.0, std::f64::consts::PI]).unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(1.0, 0.0),
        ]));
        assert!((u - expected).norm() < 1e-12);
    }

    #[test]
    fn phase_unitary_moves_samples() {
        let h = s0_subdisk();
        let theta = [0.7, -1.1];
        let u = h.phase_unitary(&theta).unwrap();
        let base = h.sample_state(&[0.0, 0.0]).unwrap();
        let moved = base.apply(&u).unwrap();
        let target = h.sample_state(&theta).unwrap();
        assert!(moved.fidelity(&target) > 1.0 - 1e-12);
    }

    #[test]
    fn image_under_identity_is_identity() {
        let h = equal_disk(2);
        let mapped = h
            .image_under_isometry(&CMatrix::identity(2, 2), &tol())
            .unwrap();
        assert!(h.equals(&mapped, &tol()));
    }

    #[test]
    fn image_rejects_non_isometry() {
        let h = equal_disk(2);
        let m = CMatrix::identity(2, 2) * C64::new(2.0, 0.0);
        assert!(h.image_under_isometry(&m, &tol()).is_err());
    }

    #[test]
    fn pair_disk_for_orthogonal_states() {
        let d = hyperdisk_through_pair(
            &PureState::basis_state(2, 0),
            &PureState::basis_state(2, 1),
            &tol(),
        )
        .unwrap();
        let inv = 1.0 / 2.0_f64.sqrt();
        assert_abs_diff_eq!(d.coeffs()[0], inv, epsilon = 1e-12);
        assert_abs_diff_eq!(d.coeffs()[1], inv, epsilon = 1e-12);
        let plus = ket(&[(1.0, 0.0), (1.0, 0.0)]);
        let minus = ket(&[(1.0, 0.0), (-1.0, 0.0)]);
        assert!(d.basis()[0].fidelity(&plus) > 1.0 - 1e-12);
        assert!(d.basis()[1].fidelity(&minus) > 1.0 - 1e-12);
        assert!(d.contains(&PureState::basis_state(2, 0), &tol()));
        assert!(d.contains(&PureState::basis_state(2, 1), &tol()));
    }

    #[test]
    fn pair_disk_for_oblique_states() {
        let psi0 = PureState::basis_state(2, 0);
        let psi1 = ket(&[(1.0, 0.0), (1.0, 0.0)]);
        let d = hyperdisk_through_pair(&psi0, &psi1, &tol()).unwrap();
        assert!(d.contains(&psi0, &tol()));
        assert!(d.contains(&psi1, &tol()));
    }

    #[test]
    fn pair_disk_rejects_equal_states() {
        let psi0 = ket(&[(1.0, 0.0), (1.0, 0.0)]);
        let phase = C64::new(0.3_f64.cos(), 0.3_f64.sin());
        let psi1 = PureState::normalized(psi0.amplitudes() * phase).unwrap();
        assert!(matches!(
            hyperdisk_through_pair(&psi0, &psi1, &tol()),
            Err(Error::DegeneratePair)
        ));
    }

    #[test]
    fn gramian_of_disk_with_itself() {
        let h = equal_disk(2);
        let g = gramian(&h, &h, &tol()).unwrap();
        assert_eq!(g.row_support, vec![1, 1]);
        assert_eq!(g.col_support, vec![1, 1]);
        assert!(g.is_subdisk_pattern(h.coeffs(), &tol()));
    }

    #[test]
    fn gramian_pattern_for_catalog_subdisks() {
        let parent = schmidt_disk_d4();
        for sub in [s0_subdisk(), s1_subdisk()] {
            let g = gramian(&parent, &sub, &tol()).unwrap();
            assert_eq!(g.row_support, vec![1, 1, 1, 1]);
            assert!(g.col_support.iter().all(|&c| c >= 1));
            assert!(g.is_subdisk_pattern(parent.coeffs(), &tol()));
            assert!(is_subhyperdisk(&sub, &parent, &tol()).unwrap());
        }
    }

    #[test]
    fn rotated_basis_breaks_pattern() {
        let parent = schmidt_disk_d4();
        // both candidate basis states overlap the |00> and |11> rows
        let mut b0 = CVector::zeros(16);
        b0[0] = C64::new(1.0, 0.0);
        b0[5] = C64::new(1.0, 0.0);
        let mut b1 = CVector::zeros(16);
        b1[0] = C64::new(1.0, 0.0);
        b1[5] = C64::new(-1.0, 0.0);
        let skewed = Hyperdisk::new(
            vec![
                PureState::normalized(b0).unwrap(),
                PureState::normalized(b1).unwrap(),
            ],
            vec![0.5_f64.sqrt(), 0.5_f64.sqrt()],
            &tol(),
        )
        .unwrap();
        let g = gramian(&parent, &skewed, &tol()).unwrap();
        assert!(g.row_support.iter().any(|&c| c != 1));
        assert!(!is_subhyperdisk(&skewed, &parent, &tol()).unwrap());
    }

    #[test]
    fn perturbed_coefficients_fail_membership_sweep() {
        let parent = schmidt_disk_d4();
        let s0 = s0_subdisk();
        let r0 = (0.3_f64.sqrt() + 0.05).powi(2);
        let scale = (r0 + 0.7).sqrt();
        let perturbed = Hyperdisk::new(
            s0.basis().to_vec(),
            vec![r0.sqrt() / scale, 0.7_f64.sqrt() / scale],
            &tol(),
        )
        .unwrap();
        assert!(!is_subhyperdisk(&perturbed, &parent, &tol()).unwrap());
    }

    #[test]
    fn obstruction_found_for_identical_disks() {
        let h = equal_disk(2);
        let found = common_parent_obstruction(&h, &h, &tol()).unwrap();
        assert_eq!(found, Some((0, 1)));
    }

    #[test]
    fn obstruction_empty_for_catalog_bases() {
        // input-space bases of the two maskable disks of the n=3, d=4 machine
        let b0 = vec![PureState::basis_state(3, 0), PureState::basis_state(3, 1)];
        let c = (50.0_f64 / 21.0).sqrt();
        let b1 = vec![
            ket(&[
                (0.5 / 3.0_f64.sqrt(), 0.0),
                (1.5 / 7.0_f64.sqrt(), 0.0),
                (0.5 * c, 0.0),
            ]),
            ket(&[
                (2.0 / (3.0_f64.sqrt() * 6.0_f64.sqrt()), 0.0),
                (4.0 / (7.0_f64.sqrt() * 6.0_f64.sqrt()), 0.0),
                (-c / 6.0_f64.sqrt(), 0.0),
            ]),
        ];
        let h0 = Hyperdisk::new(b0, vec![0.3_f64.sqrt(), 0.7_f64.sqrt()], &tol()).unwrap();
        let h1 = Hyperdisk::new(b1, vec![0.4_f64.sqrt(), 0.6_f64.sqrt()], &tol()).unwrap();
        assert_eq!(common_parent_obstruction(&h0, &h1, &tol()).unwrap(), None);
        // all four cross inner products clear 1e-3
        for a in h0.basis() {
            for b in h1.basis() {
                assert!(a.fidelity(b) > 1e-3);
            }
        }
    }

    #[test]
    fn regular_subset_two_phase_values_is_disk() {
        let r = 1.0 / 3.0_f64.sqrt();
        let h = Hyperdisk::new(
            (0..3).map(|k| PureState::basis_state(3, k)).collect(),
            vec![r, r, r],
            &tol(),
        )
        .unwrap();
        let psi0 = h.sample_state(&[0.0, 0.0, 0.0]).unwrap();
        let psi1 = h
            .sample_state(&[0.0, std::f64::consts::PI, std::f64::consts::PI])
            .unwrap();
        match classify_2d_regular_subset(&psi0, &psi1, &h, &tol()).unwrap() {
            RegularSubsetVerdict::Disk { disk } => {
                assert_eq!(disk.dim(), 2);
                assert!(disk.contains(&psi0, &tol()));
                assert!(disk.contains(&psi1, &tol()));
                // grouped weights: r and r*sqrt(2)
                let mut coeffs = disk.coeffs().to_vec();
                coeffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert_abs_diff_eq!(coeffs[0], r, epsilon = 1e-12);
                assert_abs_diff_eq!(coeffs[1], r * 2.0_f64.sqrt(), epsilon = 1e-12);
            }
            other => panic!("expected Disk, got {other:?}"),
        }
    }

    #[test]
    fn regular_subset_three_phase_values_is_two_states() {
        let r = 1.0 / 3.0_f64.sqrt();
        let h = Hyperdisk::new(
            (0..3).map(|k| PureState::basis_state(3, k)).collect(),
            vec![r, r, r],
            &tol(),
        )
        .unwrap();
        let psi0 = h.sample_state(&[0.0, 0.0, 0.0]).unwrap();
        let psi1 = h
            .sample_state(&[
                0.0,
                2.0 * std::f64::consts::PI / 3.0,
                4.0 * std::f64::consts::PI / 3.0,
            ])
            .unwrap();
        assert!(matches!(
            classify_2d_regular_subset(&psi0, &psi1, &h, &tol()).unwrap(),
            RegularSubsetVerdict::TwoStates { .. }
        ));
    }

    #[test]
    fn regular_subset_of_2d_disk_is_the_disk() {
        let h = equal_disk(2);
        let psi0 = h.sample_state(&[0.0, 0.4]).unwrap();
        let psi1 = h.sample_state(&[0.0, 2.1]).unwrap();
        match classify_2d_regular_subset(&psi0, &psi1, &h, &tol()).unwrap() {
            RegularSubsetVerdict::Disk { disk } => assert!(disk.equals(&h, &tol())),
            other => panic!("expected Disk, got {other:?}"),
        }
    }

    #[test]
    fn schmidt_property_detection() {
        let product_basis: Vec<PureState> = (0..3)
            .map(|j| PureState::basis_state(9, j * 3 + j))
            .collect();
        let r = 1.0 / 3.0_f64.sqrt();
        let h = Hyperdisk::new(product_basis, vec![r, r, r], &tol()).unwrap();
        assert!(is_schmidt_hyperdisk(&h, 3, 3, &tol()).unwrap());

        // {|00>, (|11> + |22>)/sqrt2} is not a Schmidt basis
        let mut ent = CVector::zeros(9);
        ent[4] = C64::new(1.0, 0.0);
        ent[8] = C64::new(1.0, 0.0);
        let h = Hyperdisk::new(
            vec![
                PureState::basis_state(9, 0),
                PureState::normalized(ent).unwrap(),
            ],
            vec![(1.0_f64 / 3.0).sqrt(), (2.0_f64 / 3.0).sqrt()],
            &tol(),
        )
        .unwrap();
        assert!(!is_schmidt_hyperdisk(&h, 3, 3, &tol()).unwrap());

        // {|00>, |01>}: right factors collide
        let h = Hyperdisk::new(
            vec![PureState::basis_state(4, 0), PureState::basis_state(4, 1)],
            vec![0.5_f64.sqrt(), 0.5_f64.sqrt()],
            &tol(),
        )
        .unwrap();
        assert!(!is_schmidt_hyperdisk(&h, 2, 2, &tol()).unwrap());
    }

    #[test]
    fn disk_equality_is_presentation_independent() {
        let h = equal_disk(2);
        // same disk, basis listed in the other order
        let swapped = Hyperdisk::new(
            vec![PureState::basis_state(2, 1), PureState::basis_state(2, 0)],
            h.coeffs().to_vec(),
            &tol(),
        )
        .unwrap();
        assert!(h.equals(&swapped, &tol()));

        let other = Hyperdisk::new(
            vec![
                ket(&[(1.0, 0.0), (1.0, 0.0)]),
                ket(&[(1.0, 0.0), (-1.0, 0.0)]),
            ],
            h.coeffs().to_vec(),
            &tol(),
        )
        .unwrap();
        assert!(!h.equals(&other, &tol()));
    }
}
