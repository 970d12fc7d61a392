//! Deterministic seeded search: quasi-random chart sampling, Nelder-Mead
//! descent, and the multi-start driver shared by machine verification and
//! target-set classification. Also home to the seeded random generators the
//! tests and benchmarks draw from.
//!
//! Everything here is a pure function of its seed; repeated runs produce
//! identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{hermitian_eigen, CMatrix, CVector, PureState, Tolerance, C64};

/// Budget and thresholds for a multi-start search.
#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    /// RNG seed; the entire search is a function of it.
    pub seed: u64,
    /// Number of chart points scored before any descent.
    pub grid_points: usize,
    /// Number of local descents launched from the best, mutually diverse
    /// grid points.
    pub descents: usize,
    /// Objective value below which a descent endpoint counts as a solution.
    pub accept: f64,
    /// Fidelity above which two solutions are considered the same ray.
    pub dedup_fidelity: f64,
    /// Fidelity below which two starts are considered diverse.
    pub diversity_fidelity: f64,
    /// Hard cap on retained solutions (diverse representatives are kept).
    pub max_solutions: usize,
    /// Iteration cap per Nelder-Mead run.
    pub max_iter: usize,
}

impl SearchConfig {
    /// Preset for searching the projective chart of a machine input space.
    pub fn projective(seed: u64) -> Self {
        SearchConfig {
            seed,
            grid_points: 1 << 13,
            descents: 64,
            accept: 1e-12,
            dedup_fidelity: 1.0 - 1e-8,
            diversity_fidelity: 0.995,
            max_solutions: 512,
            max_iter: 600,
        }
    }

    /// Preset for searching a block-unitary chart of legal states.
    pub fn block_unitary(seed: u64) -> Self {
        SearchConfig {
            seed,
            grid_points: 1 << 14,
            descents: 160,
            accept: 1e-12,
            dedup_fidelity: 1.0 - 1e-8,
            diversity_fidelity: 0.995,
            max_solutions: 512,
            max_iter: 700,
        }
    }
}

/// A parametrized family of pure states a search can walk over.
pub trait Chart {
    /// Number of real parameters.
    fn dim(&self) -> usize;
    /// Draws one parameter vector.
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    /// Maps parameters to a state; `None` off the chart (e.g. zero vector).
    fn state(&self, x: &[f64]) -> Option<PureState>;
}

/// Rays of `C^n` via `2n` real coordinates, normalized on evaluation.
pub struct ProjectiveChart {
    pub n: usize,
    pub bipartite: Option<(usize, usize)>,
}

impl Chart for ProjectiveChart {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim()).map(|_| gauss(rng)).collect()
    }

    fn state(&self, x: &[f64]) -> Option<PureState> {
        let v = CVector::from_iterator(
            self.n,
            (0..self.n).map(|k| C64::new(x[2 * k], x[2 * k + 1])),
        );
        if v.norm() < 1e-6 {
            return None;
        }
        let s = PureState::normalized(v).ok()?;
        match self.bipartite {
            Some((a, b)) => s.with_bipartite(a, b).ok(),
            None => Some(s),
        }
    }
}

/// Legal states `(U + I) |anchor>` with `U` a block-diagonal unitary built
/// as `exp(iH_j)` per block from a real Hermitian parametrization.
pub struct BlockUnitaryChart {
    blocks: Vec<usize>,
    anchor: CVector,
    d: usize,
    bipartite: (usize, usize),
}

impl BlockUnitaryChart {
    pub fn new(blocks: Vec<usize>, anchor: CVector, bipartite: (usize, usize)) -> Self {
        let d: usize = blocks.iter().sum();
        BlockUnitaryChart {
            blocks,
            anchor,
            d,
            bipartite,
        }
    }

    /// Assembles the block-diagonal unitary for a parameter vector.
    pub fn unitary(&self, x: &[f64]) -> CMatrix {
        let mut u = CMatrix::zeros(self.d, self.d);
        let mut offset = 0usize;
        let mut cursor = 0usize;
        for &g in &self.blocks {
            let h = hermitian_from_params(&x[cursor..cursor + g * g], g);
            let block = unitary_exp(&h);
            for i in 0..g {
                for j in 0..g {
                    u[(offset + i, offset + j)] = block[(i, j)];
                }
            }
            offset += g;
            cursor += g * g;
        }
        u
    }
}

impl Chart for BlockUnitaryChart {
    fn dim(&self) -> usize {
        self.blocks.iter().map(|g| g * g).sum()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        for &g in &self.blocks {
            for k in 0..g * g {
                // diagonal entries get the full phase range, off-diagonal a
                // moderate spread; descents do the fine placement
                if k < g {
                    x.push(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
                } else {
                    x.push(rng.random_range(-1.5..1.5));
                }
            }
        }
        x
    }

    fn state(&self, x: &[f64]) -> Option<PureState> {
        let u = self.unitary(x);
        let mut out = CVector::zeros(self.anchor.len());
        // (U tensor I) acting on the anchor, row blocks of size d_b
        let d_b = self.bipartite.1;
        for a in 0..self.d {
            for ap in 0..self.d {
                let w = u[(a, ap)];
                if w.norm() == 0.0 {
                    continue;
                }
                for b in 0..d_b {
                    out[a * d_b + b] += w * self.anchor[ap * d_b + b];
                }
            }
        }
        PureState::normalized(out)
            .ok()?
            .with_bipartite(self.bipartite.0, self.bipartite.1)
            .ok()
    }
}

/// Packs `g^2` reals into a `g x g` Hermitian matrix: first `g` on the
/// diagonal, the rest as real/imaginary pairs above it.
pub fn hermitian_from_params(x: &[f64], g: usize) -> CMatrix {
    let mut h = CMatrix::zeros(g, g);
    for i in 0..g {
        h[(i, i)] = C64::new(x[i], 0.0);
    }
    let mut k = g;
    for i in 0..g {
        for j in (i + 1)..g {
            let z = C64::new(x[k], x[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// `exp(iH)` for Hermitian `H` via spectral decomposition.
pub fn unitary_exp(h: &CMatrix) -> CMatrix {
    let tol = Tolerance::default();
    let (vals, vecs) = hermitian_eigen(h, &tol).expect("Hermitian by construction");
    let phases =
        CVector::from_iterator(vals.len(), vals.iter().map(|&l| C64::new(l.cos(), l.sin())));
    &vecs * CMatrix::from_diagonal(&phases) * vecs.adjoint()
}

/// One recovered solution: the state, its chart parameters, and the final
/// objective value.
#[derive(Debug, Clone)]
pub struct Solution {
    pub state: PureState,
    pub params: Vec<f64>,
    pub objective: f64,
}

/// Runs the search: score a seeded chart grid, descend from the best diverse
/// starts, accept low-objective endpoints, and deduplicate by ray fidelity.
pub fn multi_start_search<C: Chart>(
    chart: &C,
    objective: impl Fn(&PureState) -> f64,
    cfg: &SearchConfig,
) -> Vec<Solution> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let f = |x: &[f64]| match chart.state(x) {
        Some(s) => objective(&s),
        None => 1e6,
    };

    let mut scored: Vec<(Vec<f64>, PureState, f64)> = Vec::with_capacity(cfg.grid_points);
    for _ in 0..cfg.grid_points {
        let x = chart.sample(&mut rng);
        if let Some(s) = chart.state(&x) {
            let v = objective(&s);
            scored.push((x, s, v));
        }
    }
    scored.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());

    // diverse starts: walk the ranking, skip anything too close to a pick
    let mut starts: Vec<&(Vec<f64>, PureState, f64)> = Vec::with_capacity(cfg.descents);
    for cand in &scored {
        if starts.len() >= cfg.descents {
            break;
        }
        if starts
            .iter()
            .all(|s| s.1.fidelity(&cand.1) < cfg.diversity_fidelity)
        {
            starts.push(cand);
        }
    }
    for cand in &scored {
        if starts.len() >= cfg.descents {
            break;
        }
        if !starts.iter().any(|s| std::ptr::eq(*s, cand)) {
            starts.push(cand);
        }
    }

    let opts = NelderMeadOptions {
        max_iter: cfg.max_iter,
        init_step: 0.25,
        ftol: 1e-16,
        xtol: 1e-10,
    };
    let polish = NelderMeadOptions {
        init_step: 1e-3,
        ..opts
    };

    let mut solutions: Vec<Solution> = Vec::new();
    for start in starts {
        let (x1, _) = nelder_mead(&f, &start.0, &opts);
        let (x2, f2) = nelder_mead(&f, &x1, &polish);
        if f2 > cfg.accept {
            continue;
        }
        let Some(state) = chart.state(&x2) else {
            continue;
        };
        if let Some(existing) = solutions
            .iter_mut()
            .find(|s| s.state.fidelity(&state) > cfg.dedup_fidelity)
        {
            if f2 < existing.objective {
                *existing = Solution {
                    state,
                    params: x2,
                    objective: f2,
                };
            }
            continue;
        }
        if solutions.len() < cfg.max_solutions {
            solutions.push(Solution {
                state,
                params: x2,
                objective: f2,
            });
        }
    }
    solutions
}

/// A single descent from an explicit start (used for isolation probes).
pub fn descend<C: Chart>(
    chart: &C,
    objective: impl Fn(&PureState) -> f64,
    x0: &[f64],
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let f = |x: &[f64]| match chart.state(x) {
        Some(s) => objective(&s),
        None => 1e6,
    };
    let opts = NelderMeadOptions {
        max_iter,
        init_step: 0.05,
        ftol: 1e-16,
        xtol: 1e-10,
    };
    let (x1, _) = nelder_mead(&f, x0, &opts);
    nelder_mead(
        &f,
        &x1,
        &NelderMeadOptions {
            init_step: 1e-3,
            ..opts
        },
    )
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    pub init_step: f64,
    pub ftol: f64,
    pub xtol: f64,
}

/// Plain Nelder-Mead simplex descent. Deterministic given the start.
pub fn nelder_mead(
    f: &impl Fn(&[f64]) -> f64,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.init_step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

    for _ in 0..opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap().then(i.cmp(&j)));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = values[worst] - values[best];
        let xspread = (0..n)
            .map(|k| (simplex[worst][k] - simplex[best][k]).abs())
            .fold(0.0_f64, f64::max);
        if spread < opts.ftol && xspread < opts.xtol {
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for k in 0..n {
                centroid[k] += simplex[i][k] / n as f64;
            }
        }

        let reflect: Vec<f64> = (0..n)
            .map(|k| centroid[k] + alpha * (centroid[k] - simplex[worst][k]))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < values[best] {
            let expand: Vec<f64> = (0..n)
                .map(|k| centroid[k] + gamma * (centroid[k] - simplex[worst][k]))
                .collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                values[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                values[worst] = f_reflect;
            }
        } else if f_reflect < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = f_reflect;
        } else {
            let contract: Vec<f64> = if f_reflect < values[worst] {
                (0..n)
                    .map(|k| centroid[k] + rho * (reflect[k] - centroid[k]))
                    .collect()
            } else {
                (0..n)
                    .map(|k| centroid[k] + rho * (simplex[worst][k] - centroid[k]))
                    .collect()
            };
            let f_contract = f(&contract);
            if f_contract < values[worst].min(f_reflect) {
                simplex[worst] = contract;
                values[worst] = f_contract;
            } else {
                // shrink toward the best vertex
                let best_x = simplex[best].clone();
                for i in 0..=n {
                    if i == best {
                        continue;
                    }
                    for k in 0..n {
                        simplex[i][k] = best_x[k] + sigma * (simplex[i][k] - best_x[k]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..=n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap().then(i.cmp(&j)));
    (simplex[order[0]].clone(), values[order[0]])
}

/// Seeded RNG used across the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box-Muller.
pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Haar-ish random pure state (isotropic complex Gaussian, normalized).
pub fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> PureState {
    loop {
        let v = CVector::from_iterator(dim, (0..dim).map(|_| C64::new(gauss(rng), gauss(rng))));
        if v.norm() > 1e-6 {
            return PureState::normalized(v).expect("nonzero vector");
        }
    }
}

/// Haar random unitary via QR of a complex Ginibre matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| C64::new(gauss(rng), gauss(rng)));
    let qr = a.qr();
    let q = qr.q();
    let r = qr.r();
    // fix the phase ambiguity so the distribution is Haar
    let mut u = q;
    for k in 0..d {
        let rkk = r[(k, k)];
        if rkk.norm() > 0.0 {
            let phase = rkk / rkk.norm();
            for i in 0..d {
                u[(i, k)] *= phase;
            }
        }
    }
    u
}

/// Random orthonormal family of `m` states in `C^dim`.
pub fn random_orthonormal(rng: &mut ChaCha8Rng, dim: usize, m: usize) -> Result<Vec<PureState>> {
    let u = random_unitary(rng, dim);
    (0..m)
        .map(|k| PureState::normalized(u.column(k).into_owned()))
        .collect()
}

/// Random hyperdisk: random orthonormal basis and random strictly positive
/// coefficients, normalized.
pub fn random_hyperdisk(
    rng: &mut ChaCha8Rng,
    ambient: usize,
    m: usize,
    tol: &Tolerance,
) -> Result<crate::hyperdisk::Hyperdisk> {
    let basis = random_orthonormal(rng, ambient, m)?;
    let mut coeffs: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..1.0)).collect();
    let norm: f64 = coeffs.iter().map(|r| r * r).sum::<f64>().sqrt();
    coeffs.iter_mut().for_each(|r| *r /= norm);
    crate::hyperdisk::Hyperdisk::new(basis, coeffs, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.5).powi(2) + (x[1] + 0.5).powi(2) + 3.0;
        let opts = NelderMeadOptions {
            max_iter: 500,
            init_step: 0.5,
            ftol: 1e-16,
            xtol: 1e-12,
        };
        let (x, v) = nelder_mead(&f, &[0.0, 0.0], &opts);
        assert!((x[0] - 1.5).abs() < 1e-6);
        assert!((x[1] + 0.5).abs() < 1e-6);
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = seeded_rng(11);
        for d in 2..=4 {
            let u = random_unitary(&mut rng, d);
            let dev = (u.adjoint() * &u - CMatrix::identity(d, d)).norm();
            assert!(dev < 1e-12, "dim {d}: deviation {dev}");
        }
    }

    #[test]
    fn unitary_exp_of_hermitian_is_unitary() {
        let mut rng = seeded_rng(7);
        let params: Vec<f64> = (0..9).map(|_| gauss(&mut rng)).collect();
        let h = hermitian_from_params(&params, 3);
        let u = unitary_exp(&h);
        let dev = (u.adjoint() * &u - CMatrix::identity(3, 3)).norm();
        assert!(dev < 1e-12);
    }

    #[test]
    fn search_is_deterministic() {
        let chart = ProjectiveChart {
            n: 2,
            bipartite: None,
        };
        let target = PureState::basis_state(2, 0);
        let objective = |s: &PureState| 1.0 - s.fidelity(&target).powi(2);
        let cfg = SearchConfig {
            seed: 5,
            grid_points: 256,
            descents: 8,
            accept: 1e-10,
            dedup_fidelity: 1.0 - 1e-8,
            diversity_fidelity: 0.995,
            max_solutions: 16,
            max_iter: 400,
        };
        let a = multi_start_search(&chart, objective, &cfg);
        let b = multi_start_search(&chart, objective, &cfg);
        assert_eq!(a.len(), b.len());
        assert!(!a.is_empty());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.params, y.params);
        }
        assert!(a[0].state.fidelity(&target) > 1.0 - 1e-6);
    }
}
