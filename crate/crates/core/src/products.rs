//! Transfer on Cartesian products: if `u -> v` in `G1` and `x -> y` in `G2` at
//! the same time `t`, then `(u, x) -> (v, y)` in `G1 □ G2` at `t`, because the
//! product propagator is `U1(t) ⊗ U2(t)`.
//!
//! Products of twin-synthesized graphs usually have no twin pairs left, which
//! makes them useful fixtures for the non-twin paths through the certifier.

use serde::Serialize;

use crate::certifier::{certify, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL};
use crate::error::{PstError, Result};
use crate::evolution::{fidelity, propagator};
use crate::graph::{build_hamiltonian, cartesian_product, combine_potentials, Graph, Potential};
use crate::io::GraphFile;
use crate::spectral::{decompose, SpectralDecomposition};

/// Each factor must reach this fidelity at the shared time.
pub const FACTOR_MIN_FIDELITY: f64 = 1.0 - 1e-8;
/// The composed instance must reach this fidelity.
pub const PRODUCT_MIN_FIDELITY: f64 = 1.0 - 1e-7;
/// Two certified times count as equal within this absolute difference.
pub const TIME_TOLERANCE: f64 = 1e-9;

/// One side of a product: graph, potential and transfer pair.
#[derive(Debug, Clone)]
pub struct Factor<'a> {
    pub graph: &'a Graph,
    pub potential: &'a Potential,
    pub source: usize,
    pub target: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductInstance {
    #[serde(flatten)]
    pub graph: GraphFile,
    pub source: usize,
    pub target: usize,
    pub time: f64,
    pub fidelity: f64,
    pub factor_fidelities: [f64; 2],
}

fn decomp(g: &Graph, q: &Potential) -> Result<SpectralDecomposition> {
    decompose(&build_hamiltonian(g, q)?, 1e-10)
}

fn check_factor(index: usize, f: &Factor<'_>, t: f64) -> Result<f64> {
    f.graph.check_vertex(f.source)?;
    f.graph.check_vertex(f.target)?;
    let d = decomp(f.graph, f.potential)?;
    let fid = fidelity(&d, f.source, f.target, t);
    if fid >= FACTOR_MIN_FIDELITY {
        return Ok(fid);
    }
    if f.source != f.target {
        let cert = certify(&d, f.source, f.target, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL)?;
        if let Some(ct) = cert.transfer_time {
            if (ct - t).abs() > TIME_TOLERANCE {
                return Err(PstError::TimeMismatch { first: t, second: ct });
            }
        }
    }
    Err(PstError::FactorFailure {
        factor: index,
        time: t,
        fidelity: fid,
    })
}

/// Composes two instances that both transfer at time `t`.
///
/// A factor that misses `t` but is certified at a different time yields
/// [`PstError::TimeMismatch`]; one with no transfer at all yields
/// [`PstError::FactorFailure`].
pub fn product_pst(first: &Factor<'_>, second: &Factor<'_>, t: f64) -> Result<ProductInstance> {
    if !t.is_finite() {
        return Err(PstError::input("time must be finite"));
    }
    let f1 = check_factor(1, first, t)?;
    let f2 = check_factor(2, second, t)?;
    let g = cartesian_product(first.graph, second.graph);
    let q = combine_potentials(first.potential, second.potential);
    let n2 = second.graph.n();
    let source = first.source * n2 + second.source;
    let target = first.target * n2 + second.target;
    let fid = fidelity(&decomp(&g, &q)?, source, target, t);
    if fid < PRODUCT_MIN_FIDELITY {
        return Err(PstError::FactorFailure {
            factor: 0,
            time: t,
            fidelity: fid,
        });
    }
    Ok(ProductInstance {
        graph: GraphFile::from_parts(&g, Some(&q)),
        source,
        target,
        time: t,
        fidelity: fid,
        factor_fidelities: [f1, f2],
    })
}

/// Certifies both factors and composes them at their common earliest time.
pub fn product_from_certified(first: &Factor<'_>, second: &Factor<'_>) -> Result<ProductInstance> {
    let time_of = |index: usize, f: &Factor<'_>| -> Result<f64> {
        f.graph.check_vertex(f.source)?;
        f.graph.check_vertex(f.target)?;
        let d = decomp(f.graph, f.potential)?;
        let cert = certify(&d, f.source, f.target, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL)?;
        cert.transfer_time.ok_or(PstError::FactorFailure {
            factor: index,
            time: f64::NAN,
            fidelity: 0.0,
        })
    };
    let t1 = time_of(1, first)?;
    let t2 = time_of(2, second)?;
    if (t1 - t2).abs() > TIME_TOLERANCE {
        return Err(PstError::TimeMismatch { first: t1, second: t2 });
    }
    product_pst(first, second, t1)
}

/// `max |U12(t) - U1(t) ⊗ U2(t)|` over all entries.
pub fn kron_check(
    d1: &SpectralDecomposition,
    d2: &SpectralDecomposition,
    d12: &SpectralDecomposition,
    t: f64,
) -> Result<f64> {
    let expected = d1.n() * d2.n();
    if d12.n() != expected {
        return Err(PstError::DimensionMismatch {
            expected,
            found: d12.n(),
        });
    }
    let k = propagator(d1, t).kronecker(&propagator(d2, t));
    let u = propagator(d12, t);
    Ok((u - k).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path_graph;
    use crate::paths::p3_instance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn factor<'a>(g: &'a Graph, q: &'a Potential, s: usize, t: usize) -> Factor<'a> {
        Factor {
            graph: g,
            potential: q,
            source: s,
            target: t,
        }
    }

    #[test]
    fn p2_squared_is_c4() {
        let p2 = path_graph(2).unwrap();
        let z = Potential::zeros(2);
        let inst = product_pst(&factor(&p2, &z, 0, 1), &factor(&p2, &z, 0, 1), PI / 2.0).unwrap();
        assert_eq!((inst.source, inst.target), (0, 3));
        assert!((inst.fidelity - 1.0).abs() < 1e-10);
        assert_eq!(inst.graph.edges.len(), 4);
    }

    #[test]
    fn p3_squared_with_family_potentials() {
        let p3 = path_graph(3).unwrap();
        let inst = p3_instance(2, 1).unwrap();
        let q = inst.potential();
        let out = product_pst(&factor(&p3, &q, 0, 2), &factor(&p3, &q, 0, 2), inst.t).unwrap();
        assert_eq!((out.source, out.target), (0, 8));
        assert!(out.fidelity >= 1.0 - 1e-8);

        let via_cert = product_from_certified(&factor(&p3, &q, 0, 2), &factor(&p3, &q, 0, 2)).unwrap();
        assert!((via_cert.time - inst.t).abs() < 1e-8);
    }

    #[test]
    fn mismatched_times() {
        let p2 = path_graph(2).unwrap();
        let p3 = path_graph(3).unwrap();
        let (z2, z3) = (Potential::zeros(2), Potential::zeros(3));
        let err = product_pst(&factor(&p2, &z2, 0, 1), &factor(&p3, &z3, 0, 2), PI / 2.0).unwrap_err();
        assert!(matches!(err, PstError::TimeMismatch { .. }), "{err:?}");
        let err = product_from_certified(&factor(&p2, &z2, 0, 1), &factor(&p3, &z3, 0, 2)).unwrap_err();
        assert!(matches!(err, PstError::TimeMismatch { .. }), "{err:?}");
    }

    #[test]
    fn factor_without_transfer() {
        let p2 = path_graph(2).unwrap();
        let p4 = path_graph(4).unwrap();
        let (z2, z4) = (Potential::zeros(2), Potential::zeros(4));
        let err = product_pst(&factor(&p2, &z2, 0, 1), &factor(&p4, &z4, 0, 3), PI / 2.0).unwrap_err();
        assert!(matches!(err, PstError::FactorFailure { factor: 2, .. }), "{err:?}");
    }

    #[test]
    fn product_of_certified_is_certified() {
        let p3 = path_graph(3).unwrap();
        let inst = p3_instance(4, 1).unwrap();
        let q = inst.potential();
        let out = product_pst(&factor(&p3, &q, 0, 2), &factor(&p3, &q, 0, 2), inst.t).unwrap();
        let g = cartesian_product(&p3, &p3);
        let d = decomp(&g, &combine_potentials(&q, &q)).unwrap();
        let cert = certify(&d, out.source, out.target, DEFAULT_MAX_DEN, DEFAULT_RATIO_TOL).unwrap();
        assert!(cert.is_certified(), "{cert:?}");
        assert!((cert.transfer_time.unwrap() - inst.t).abs() < 1e-8);
    }

    fn random_potential(rng: &mut ChaCha8Rng, n: usize) -> Potential {
        Potential::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
    }

    #[test]
    fn kron_examples() {
        let p2 = path_graph(2).unwrap();
        let z = Potential::zeros(2);
        let d = decomp(&p2, &z).unwrap();
        let d12 = decomp(&cartesian_product(&p2, &p2), &combine_potentials(&z, &z)).unwrap();
        assert!(kron_check(&d, &d, &d12, 0.0).unwrap() <= 1e-12);
        assert!(kron_check(&d, &d, &d12, 1.7).unwrap() <= 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p3 = path_graph(3).unwrap();
        let (q3, q2) = (random_potential(&mut rng, 3), random_potential(&mut rng, 2));
        let d3 = decomp(&p3, &q3).unwrap();
        let d2 = decomp(&p2, &q2).unwrap();
        let d32 = decomp(&cartesian_product(&p3, &p2), &combine_potentials(&q3, &q2)).unwrap();
        assert!(kron_check(&d3, &d2, &d32, 3.3).unwrap() <= 1e-9);
        assert!(matches!(
            kron_check(&d2, &d3, &d12, 1.0),
            Err(PstError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn product_spectrum_is_sumset() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g1 = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let g2 = Graph::cycle(3).unwrap();
        let (q1, q2) = (random_potential(&mut rng, 4), random_potential(&mut rng, 3));
        let d1 = decomp(&g1, &q1).unwrap();
        let d2 = decomp(&g2, &q2).unwrap();
        let h = build_hamiltonian(&cartesian_product(&g1, &g2), &combine_potentials(&q1, &q2)).unwrap();
        let d12 = crate::spectral::decompose_symmetric(h.matrix(), 1e-10).unwrap();
        let mut sums: Vec<f64> = d1
            .eigenvalues()
            .iter()
            .flat_map(|a| d2.eigenvalues().iter().map(move |b| a + b))
            .collect();
        sums.sort_by(f64::total_cmp);
        for (a, b) in sums.iter().zip(d12.eigenvalues()) {
            assert!((a - b).abs() <= 1e-9);
        }
        for _ in 0..10 {
            let t = rng.random_range(0.0..20.0);
            assert!(kron_check(&d1, &d2, &d12, t).unwrap() <= 1e-9);
        }
    }
}
