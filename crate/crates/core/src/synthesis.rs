//! Potentials that induce perfect state transfer between non-adjacent twins.
//!
//! With `Q(u) = Q(v) = 0`, the vector `1_u - 1_v` is an eigenvector with
//! eigenvalue 0 and every other eigenvector takes equal values on `u` and `v`.
//! Transfer then only needs a time `t` with `t λ_i ∈ π · odd` for the remaining
//! eigenvalues `λ_1 < ... < λ_{n+1}`, which holds once every ratio
//! `λ_i / λ_{n+1}` is an odd/odd fraction `(2p_i + 1) / (2q + 1)`; the time is
//! `t = π (2q + 1) / λ_{n+1}`.
//!
//! Synthesis starts from large, distinct potentials on the `n` free vertices,
//! picks a nearby odd/odd target for the ratio vector and runs Newton's method
//! on the `n x n` ratio map.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{PstError, Result};
use crate::evolution::fidelity;
use crate::graph::{are_twins, build_hamiltonian, Graph, Potential};
use crate::spectral::{decompose, SpectralDecomposition, DEGENERACY_THRESHOLD};

/// Minimum overlap with `(1_u - 1_v)/√2` for an eigenvector to count as the twin mode.
const TWIN_MODE_OVERLAP: f64 = 1.0 - 1e-8;
const INIT_RETRIES: u64 = 16;
const INIT_MIN_GAP: f64 = 1e-6;
const NEWTON_MIN_GAP: f64 = 1e-10;
const NEWTON_MIN_STEP: f64 = 1e-4;
const MAX_CONDITION: f64 = 1e12;
/// Newton steps are clipped to `max(1, max|Q|)` in max norm.
const TRUST_RADIUS: f64 = 1.0;
/// Synthesis succeeds once the predicted time reaches this fidelity.
pub const SYNTHESIS_MIN_FIDELITY: f64 = 1.0 - 1e-6;

/// Odd/odd target `(2p_i + 1) / (2q + 1)` for every ratio.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioTarget {
    /// Odd, strictly increasing, each below `denominator`.
    pub numerators: Vec<i64>,
    /// Odd and at least 3.
    pub denominator: i64,
}

impl RatioTarget {
    pub fn values(&self) -> Vec<f64> {
        self.numerators
            .iter()
            .map(|&p| p as f64 / self.denominator as f64)
            .collect()
    }

    /// `p_i` with numerator `2p_i + 1`.
    pub fn p(&self) -> Vec<i64> {
        self.numerators.iter().map(|&x| (x - 1).div_euclid(2)).collect()
    }

    /// `q` with denominator `2q + 1`.
    pub fn q(&self) -> i64 {
        (self.denominator - 1) / 2
    }
}

/// Vertices other than `u` and `v`, in increasing order.
pub fn free_vertices(g: &Graph, u: usize, v: usize) -> Vec<usize> {
    (0..g.n()).filter(|&x| x != u && x != v).collect()
}

fn check_twins(g: &Graph, u: usize, v: usize) -> Result<()> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if !are_twins(g, u, v) {
        return Err(PstError::NotTwins { u, v });
    }
    if g.neighbors(u).is_empty() {
        return Err(PstError::input(format!(
            "twins {u} and {v} have no neighbors, so nothing can move between them"
        )));
    }
    Ok(())
}

/// Zero at `u`, `v`; free vertex `i` (in index order) gets
/// `scale (1 + i/n) + jitter`, jitter uniform in `[0, scale / (10 n)]`.
/// Re-draws with seeds `seed + 1, seed + 2, ...` until the spectrum is simple.
pub fn initial_potential(g: &Graph, u: usize, v: usize, scale: f64, seed: u64) -> Result<Potential> {
    check_twins(g, u, v)?;
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(PstError::input("scale must be positive"));
    }
    let free = free_vertices(g, u, v);
    let m = free.len() as f64;
    let mut best_gap = 0.0f64;
    for attempt in 0..INIT_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut values = vec![0.0; g.n()];
        for (i, &x) in free.iter().enumerate() {
            let jitter = rng.random_range(0.0..=scale / (10.0 * m));
            values[x] = scale * (1.0 + i as f64 / m) + jitter;
        }
        let q = Potential::new(values)?;
        let d = decompose(&build_hamiltonian(g, &q)?, 1e-10)?;
        if d.simplicity_gap() >= INIT_MIN_GAP {
            return Ok(q);
        }
        best_gap = best_gap.max(d.simplicity_gap());
    }
    Err(PstError::Initialization(format!(
        "no simple spectrum after {INIT_RETRIES} draws (best gap {best_gap:e})"
    )))
}

/// Eigen-indices split into the twin mode and the remaining `n + 1` modes (ascending).
fn split_twin_mode(d: &SpectralDecomposition, u: usize, v: usize) -> Result<(usize, Vec<usize>)> {
    if d.simplicity_gap() <= DEGENERACY_THRESHOLD {
        let index = (0..d.n()).find(|&i| d.gap_at(i) <= DEGENERACY_THRESHOLD).unwrap_or(0);
        return Err(PstError::Degenerate {
            index,
            gap: d.simplicity_gap(),
        });
    }
    let x = d.eigenvectors();
    let twin = (0..d.n())
        .find(|&k| (x[(u, k)] - x[(v, k)]).abs() / 2f64.sqrt() >= TWIN_MODE_OVERLAP)
        .ok_or_else(|| {
            PstError::NotGoodPotential(format!("no eigenvector proportional to 1_{u} - 1_{v}"))
        })?;
    let rest: Vec<usize> = (0..d.n()).filter(|&k| k != twin).collect();
    let top = d.eigenvalues()[*rest.last().expect("at least two vertices")];
    if top.abs() <= 1e-10 {
        return Err(PstError::DegenerateScale(top));
    }
    Ok((twin, rest))
}

/// `(λ_1/λ_{n+1}, ..., λ_n/λ_{n+1})` over the eigenvalues left after removing the twin mode.
pub fn ratio_map(d: &SpectralDecomposition, u: usize, v: usize) -> Result<Vec<f64>> {
    let (_, rest) = split_twin_mode(d, u, v)?;
    let ev = d.eigenvalues();
    let top = ev[*rest.last().unwrap()];
    Ok(rest[..rest.len() - 1].iter().map(|&k| ev[k] / top).collect())
}

/// Derivative of [`ratio_map`] with respect to the potential on the free vertices:
/// `J_ij = (∂_jλ_i λ_{n+1} - λ_i ∂_jλ_{n+1}) / λ_{n+1}²`, with `∂_jλ_i = φ_i(j)²`.
pub fn ratio_jacobian(d: &SpectralDecomposition, g: &Graph, u: usize, v: usize) -> Result<DMatrix<f64>> {
    let (_, rest) = split_twin_mode(d, u, v)?;
    let free = free_vertices(g, u, v);
    let ev = d.eigenvalues();
    let x = d.eigenvectors();
    let top = *rest.last().unwrap();
    let lt = ev[top];
    let m = free.len();
    let mut j = DMatrix::zeros(m, m);
    for (row, &i) in rest[..m].iter().enumerate() {
        for (col, &vert) in free.iter().enumerate() {
            let di = x[(vert, i)].powi(2);
            let dt = x[(vert, top)].powi(2);
            j[(row, col)] = (di * lt - ev[i] * dt) / (lt * lt);
        }
    }
    Ok(j)
}

/// Odd/odd fraction vector closest (in max norm) to `ratios` over odd
/// denominators `3..=d_max`; smaller denominators win ties.
///
/// Each ratio is rounded to the nearest odd multiple of `1/d`. Candidates must be
/// strictly increasing and stay below 1 so the target spectrum remains simple.
pub fn select_targets(ratios: &[f64], d_max: i64, radius: f64) -> Option<RatioTarget> {
    let mut best: Option<(f64, RatioTarget)> = None;
    let mut d = 3;
    while d <= d_max {
        let nums: Vec<i64> = ratios.iter().map(|&r| nearest_odd(r * d as f64)).collect();
        let valid = nums.windows(2).all(|w| w[0] < w[1]) && nums.iter().all(|&p| p < d);
        if valid {
            let score = ratios
                .iter()
                .zip(&nums)
                .map(|(&r, &p)| (r - p as f64 / d as f64).abs())
                .fold(0.0, f64::max);
            if best.as_ref().is_none_or(|(s, _)| score < *s) {
                best = Some((
                    score,
                    RatioTarget {
                        numerators: nums,
                        denominator: d,
                    },
                ));
            }
        }
        d += 2;
    }
    best.filter(|(s, _)| *s <= radius).map(|(_, t)| t)
}

fn nearest_odd(y: f64) -> i64 {
    2 * ((y - 1.0) / 2.0).round() as i64 + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSolution {
    pub potential: Potential,
    pub iterations: usize,
    pub residual: f64,
}

fn with_free_values(n: usize, free: &[usize], values: &DVector<f64>) -> Result<Potential> {
    let mut q = vec![0.0; n];
    for (&x, &val) in free.iter().zip(values.iter()) {
        q[x] = val;
    }
    Potential::new(q)
}

fn residual_at(g: &Graph, u: usize, v: usize, q: &Potential, target: &[f64]) -> Result<(SpectralDecomposition, f64)> {
    let d = decompose(&build_hamiltonian(g, q)?, 1e-10)?;
    if d.simplicity_gap() < NEWTON_MIN_GAP {
        return Err(PstError::SimplicityLost {
            gap: d.simplicity_gap(),
        });
    }
    let phi = ratio_map(&d, u, v)?;
    let r = phi
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((d, r))
}

/// Newton iteration `Q <- Q - J⁻¹ (Φ(Q) - target)` on the free vertices, with
/// `Q(u) = Q(v) = 0` pinned. Steps are clipped to a trust region, then halved
/// (down to 1e-4) until the residual decreases and the spectrum stays simple.
pub fn newton_solve(
    g: &Graph,
    u: usize,
    v: usize,
    target: &RatioTarget,
    q0: &Potential,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonSolution> {
    check_twins(g, u, v)?;
    if q0.len() != g.n() {
        return Err(PstError::DimensionMismatch {
            expected: g.n(),
            found: q0.len(),
        });
    }
    if q0[u] != 0.0 || q0[v] != 0.0 {
        return Err(PstError::NotGoodPotential(format!(
            "potential must vanish on the twins {u} and {v}"
        )));
    }
    let free = free_vertices(g, u, v);
    if target.numerators.len() != free.len() {
        return Err(PstError::DimensionMismatch {
            expected: free.len(),
            found: target.numerators.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(PstError::input("tolerance must be positive"));
    }
    let goal = target.values();
    let mut q = q0.clone();
    let (mut d, mut res) = residual_at(g, u, v, &q, &goal)?;
    let mut iterations = 0;
    loop {
        if res <= tol {
            return Ok(NewtonSolution {
                potential: q,
                iterations,
                residual: res,
            });
        }
        if iterations == max_iter {
            return Err(PstError::NoConvergence {
                iterations,
                residual: res,
            });
        }
        let jac = ratio_jacobian(&d, g, u, v)?;
        let sv = jac.clone().singular_values();
        let condition = sv.max() / sv.min();
        if !(condition <= MAX_CONDITION) {
            return Err(PstError::JacobianSingular { condition });
        }
        let phi = ratio_map(&d, u, v)?;
        let r = DVector::from_iterator(goal.len(), phi.iter().zip(&goal).map(|(a, b)| a - b));
        let delta = jac
            .lu()
            .solve(&r)
            .ok_or(PstError::JacobianSingular { condition })?;
        let current = DVector::from_iterator(free.len(), free.iter().map(|&x| q[x]));
        let radius = TRUST_RADIUS * current.amax().max(1.0);
        let delta = if delta.amax() > radius {
            &delta * (radius / delta.amax())
        } else {
            delta
        };

        let mut step = 1.0;
        let mut last_err = None;
        let accepted = loop {
            let trial = with_free_values(g.n(), &free, &(&current - &delta * step))?;
            match residual_at(g, u, v, &trial, &goal) {
                Ok((td, tres)) if tres < res => break Some((trial, td, tres)),
                Ok(_) => last_err = None,
                Err(e @ PstError::SimplicityLost { .. }) => last_err = Some(e),
                Err(PstError::Degenerate { gap, .. }) => {
                    last_err = Some(PstError::SimplicityLost { gap })
                }
                Err(e) => return Err(e),
            }
            step *= 0.5;
            if step < NEWTON_MIN_STEP {
                break None;
            }
        };
        iterations += 1;
        match accepted {
            Some((nq, nd, nres)) => {
                q = nq;
                d = nd;
                res = nres;
            }
            None => {
                return Err(last_err.unwrap_or(PstError::NoConvergence {
                    iterations,
                    residual: res,
                }))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynthesisConfig {
    /// Largest odd denominator tried on the first seed; doubled per seed up to 10x.
    pub d_max: i64,
    pub seeds: usize,
    pub tol: f64,
    pub radius: f64,
    pub scale: f64,
    pub max_iter: usize,
    pub base_seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            d_max: 101,
            seeds: 64,
            tol: 1e-12,
            radius: 0.02,
            scale: 10.0,
            max_iter: 100,
            base_seed: 0,
        }
    }
}

/// Why one seed did not produce a result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedDiagnostic {
    pub seed: u64,
    pub d_max: i64,
    pub scale: f64,
    pub stage: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisResult {
    pub source: usize,
    pub target: usize,
    pub potential: Vec<f64>,
    pub targets: RatioTarget,
    pub p: Vec<i64>,
    pub q: i64,
    pub transfer_time: f64,
    /// Largest eigenvalue after removing the twin mode.
    pub lambda_max: f64,
    pub achieved_fidelity: f64,
    pub newton_iterations: usize,
    pub residual: f64,
    pub seed: u64,
    /// `max|Q| · t`, logged for comparison with the `P3` tradeoff.
    pub potential_time_product: f64,
}

fn odd_at_most(x: i64) -> i64 {
    if x % 2 == 0 {
        x + 1
    } else {
        x
    }
}

/// Potential with perfect state transfer between the non-adjacent twins `u` and `v`.
///
/// Seeds are tried in order and the first success is returned. Seed `k`
/// uses denominators up to `min(d_max 2^k, 10 d_max)` and scale `scale (1 + k/4)`.
pub fn synthesize(g: &Graph, u: usize, v: usize, config: &SynthesisConfig) -> Result<SynthesisResult> {
    check_twins(g, u, v)?;
    if config.d_max < 3 {
        return Err(PstError::input("d_max must be at least 3"));
    }
    let mut attempts = Vec::new();
    for k in 0..config.seeds {
        let seed = config.base_seed.wrapping_add(k as u64 * INIT_RETRIES);
        let growth = 1i64.checked_shl(k.min(32) as u32).unwrap_or(i64::MAX);
        let d_max = odd_at_most(config.d_max.saturating_mul(growth).min(10 * config.d_max));
        let scale = config.scale * (1.0 + k as f64 / 4.0);
        let diag = |stage: &'static str, message: String| SeedDiagnostic {
            seed,
            d_max,
            scale,
            stage,
            message,
        };

        let q0 = match initial_potential(g, u, v, scale, seed) {
            Ok(q) => q,
            Err(e) => {
                attempts.push(diag("initialize", e.to_string()));
                continue;
            }
        };
        let ratios = match decompose(&build_hamiltonian(g, &q0)?, 1e-10)
            .and_then(|d| ratio_map(&d, u, v))
        {
            Ok(r) => r,
            Err(e) => {
                attempts.push(diag("ratio-map", e.to_string()));
                continue;
            }
        };
        let Some(target) = select_targets(&ratios, d_max, config.radius) else {
            attempts.push(diag(
                "select-targets",
                format!("no odd/odd target within {} of {ratios:?}", config.radius),
            ));
            continue;
        };
        let sol = match newton_solve(g, u, v, &target, &q0, config.tol, config.max_iter) {
            Ok(s) => s,
            Err(e) => {
                attempts.push(diag("newton", e.to_string()));
                continue;
            }
        };
        let d = decompose(&build_hamiltonian(g, &sol.potential)?, 1e-10)?;
        let (_, rest) = split_twin_mode(&d, u, v)?;
        let lambda_max = d.eigenvalues()[*rest.last().unwrap()];
        let time = PI * target.denominator as f64 / lambda_max;
        let fid = fidelity(&d, u, v, time);
        if !(time > 0.0) || fid < SYNTHESIS_MIN_FIDELITY {
            attempts.push(diag(
                "verify",
                format!("fidelity {fid} at t = {time}"),
            ));
            continue;
        }
        let qmax = sol.potential.values().iter().fold(0.0f64, |a, b| a.max(b.abs()));
        return Ok(SynthesisResult {
            source: u,
            target: v,
            potential: sol.potential.into_inner(),
            p: target.p(),
            q: target.q(),
            targets: target,
            transfer_time: time,
            lambda_max,
            achieved_fidelity: fid,
            newton_iterations: sol.iterations,
            residual: sol.residual,
            seed,
            potential_time_product: qmax * time,
        });
    }
    Err(PstError::SynthesisFailure { attempts })
}
