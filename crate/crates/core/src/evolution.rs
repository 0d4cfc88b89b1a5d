//! Continuous-time evolution `U(t) = e^{itH}` built from a spectral decomposition.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PstError, Result};
use crate::format::fmt_fixed_sig;
use crate::spectral::SpectralDecomposition;

/// Golden-section refinement stops once the bracket is this narrow.
const REFINE_WINDOW: f64 = 1e-10;

/// Transfer probability `|U(t)_{u,v}|²` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityRecord {
    pub time: f64,
    pub fidelity: f64,
    pub source: usize,
    pub target: usize,
}

/// `Σ_i e^{itλ_i} x_i x_iᵀ`.
pub fn propagator(d: &SpectralDecomposition, t: f64) -> DMatrix<Complex64> {
    let n = d.n();
    let v = d.eigenvectors();
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    for (k, &lambda) in d.eigenvalues().iter().enumerate() {
        let phase = Complex64::from_polar(1.0, t * lambda);
        for j in 0..n {
            let xj = v[(j, k)];
            if xj == 0.0 {
                continue;
            }
            let w = phase * xj;
            for i in 0..n {
                u[(i, j)] += w * v[(i, k)];
            }
        }
    }
    u
}

/// `U(t)_{u,v} = Σ_i e^{itλ_i} x_i(u) x_i(v)`.
pub fn amplitude(d: &SpectralDecomposition, u: usize, v: usize, t: f64) -> Complex64 {
    let vecs = d.eigenvectors();
    d.eigenvalues()
        .iter()
        .enumerate()
        .map(|(k, &lambda)| Complex64::from_polar(vecs[(u, k)] * vecs[(v, k)], t * lambda))
        .sum()
}

pub fn fidelity(d: &SpectralDecomposition, u: usize, v: usize, t: f64) -> f64 {
    amplitude(d, u, v, t).norm_sqr()
}

/// Grid size whose spacing is at most `π / (10 · spread)` over `[0, t_max]`,
/// where `spread` is the eigenvalue range.
pub fn default_samples(d: &SpectralDecomposition, t_max: f64) -> usize {
    let ev = d.eigenvalues();
    let spread = match (ev.first(), ev.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    };
    if spread <= 0.0 {
        return 2;
    }
    let spacing = std::f64::consts::PI / (10.0 * spread);
    ((t_max / spacing).ceil() as usize + 1).max(2)
}

fn grid_time(t_max: f64, samples: usize, i: usize) -> f64 {
    t_max * i as f64 / (samples - 1) as f64
}

/// Fidelity sampled on `samples` evenly spaced points of `[0, t_max]`.
pub fn fidelity_trace(
    d: &SpectralDecomposition,
    u: usize,
    v: usize,
    t_max: f64,
    samples: usize,
) -> Vec<(f64, f64)> {
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let t = grid_time(t_max, samples, i);
            (t, fidelity(d, u, v, t))
        })
        .collect()
}

/// Maximum fidelity over `[0, t_max]`: uniform grid, then golden-section
/// refinement around the best grid point. Earliest grid point wins ties.
pub fn max_fidelity(
    d: &SpectralDecomposition,
    u: usize,
    v: usize,
    t_max: f64,
    samples: usize,
) -> Result<FidelityRecord> {
    if u >= d.n() || v >= d.n() {
        return Err(PstError::input(format!(
            "vertex pair ({u}, {v}) out of range for {} vertices",
            d.n()
        )));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(PstError::input("t_max must be positive and finite"));
    }
    if samples < 2 {
        return Err(PstError::input("need at least 2 samples"));
    }
    let (best_i, best_f) = (0..samples)
        .into_par_iter()
        .map(|i| (i, fidelity(d, u, v, grid_time(t_max, samples, i))))
        .reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    let lo = grid_time(t_max, samples, best_i.saturating_sub(1));
    let hi = grid_time(t_max, samples, (best_i + 1).min(samples - 1));
    let (t_ref, f_ref) = golden_section_max(|t| fidelity(d, u, v, t), lo, hi, REFINE_WINDOW);
    let (time, fid) = if f_ref >= best_f {
        (t_ref, f_ref)
    } else {
        (grid_time(t_max, samples, best_i), best_f)
    };
    Ok(FidelityRecord {
        time,
        fidelity: fid,
        source: u,
        target: v,
    })
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, window: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut e = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fe = f(e);
    // bounded: the bracket shrinks by 1/φ per step
    for _ in 0..200 {
        if b - a <= window {
            break;
        }
        if fc >= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + inv_phi * (b - a);
            fe = f(e);
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    [(c, fc), (e, fe), (mid, fm)]
        .into_iter()
        .fold((mid, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// CSV with header `t,fidelity`, values in fixed-point with 12 significant digits.
pub fn write_trace_csv(mut w: impl Write, trace: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "t,fidelity")?;
    for &(t, f) in trace {
        writeln!(w, "{},{}", fmt_fixed_sig(t, 12), fmt_fixed_sig(f, 12))?;
    }
    Ok(())
}
