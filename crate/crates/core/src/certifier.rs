//! Spectral certification of perfect state transfer between two vertices.
//!
//! Transfer from `u` to `v` happens iff every eigenspace projection `E`
//! satisfies `E1_u = ±E1_v`, and the eigenvalues supported on `u` admit a time
//! `T` where all phases `e^{iTλ}` agree on the `+` class and are opposite on
//! the `-` class. The phase condition is decided numerically by reconstructing
//! eigenvalue ratios as fractions and checking their parity pattern; every
//! certificate is then re-checked by direct evolution.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{PstError, Result};
use crate::evolution::fidelity;
use crate::spectral::{SpectralDecomposition, DEGENERACY_THRESHOLD};

pub const DEFAULT_MAX_DEN: u64 = 1_000_000;
pub const DEFAULT_RATIO_TOL: f64 = 1e-9;
/// Relative tolerance on `‖E1_u ∓ E1_v‖` used when classifying eigenspaces.
pub const CLASSIFY_TOL: f64 = 1e-6;
/// A certificate is only issued if evolution reaches at least `1 - CERTIFY_FIDELITY_SLACK`.
pub const CERTIFY_FIDELITY_SLACK: f64 = 1e-8;
/// A fraction `p/q` only counts as the value of a ratio when
/// `|x - p/q| q² <= RATIO_SIGNIFICANCE`. Every real has convergents with
/// `|x - p/q| < 1/q²`, so the tolerance alone cannot tell rationals apart once
/// `q` reaches `tol^(-1/2)`.
pub const RATIO_SIGNIFICANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateStatus {
    Certified,
    Refused,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefusalReason {
    SymmetryFailure,
    IrrationalRatio,
    ParityFailure,
    DegenerateAmbiguity,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParityClass {
    #[serde(rename = "odd/even")]
    OddEven,
    #[serde(rename = "even/odd")]
    EvenOdd,
    #[serde(rename = "odd/odd")]
    OddOdd,
    #[serde(rename = "even/even")]
    EvenEven,
}

impl ParityClass {
    pub fn of(num: i64, den: i64) -> Self {
        match (num.rem_euclid(2) == 1, den.rem_euclid(2) == 1) {
            (true, false) => ParityClass::OddEven,
            (false, true) => ParityClass::EvenOdd,
            (true, true) => ParityClass::OddOdd,
            (false, false) => ParityClass::EvenEven,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioEntry {
    pub value: f64,
    pub num: i64,
    pub den: i64,
    pub residual: f64,
    pub parity_class: ParityClass,
}

/// Eigenvalue offsets `(λ - λ_min) / base_gap` and their rational reconstructions.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RatioReport {
    pub base_gap: f64,
    pub ratios: Vec<RatioEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PstCertificate {
    pub status: CertificateStatus,
    pub refusal_reason: RefusalReason,
    pub transfer_time: Option<f64>,
    /// Eigenvalues of eigenspaces with `E1_u = E1_v`.
    pub plus: Vec<f64>,
    /// Eigenvalues of eigenspaces with `E1_u = -E1_v`.
    pub minus: Vec<f64>,
    #[serde(rename = "ratios")]
    pub ratio_report: RatioReport,
    /// Fidelity at `transfer_time` (or at the candidate time that failed the check).
    pub verified_fidelity: Option<f64>,
}

impl PstCertificate {
    pub fn is_certified(&self) -> bool {
        self.status == CertificateStatus::Certified
    }

    fn refused(reason: RefusalReason, plus: Vec<f64>, minus: Vec<f64>) -> Self {
        PstCertificate {
            status: CertificateStatus::Refused,
            refusal_reason: reason,
            transfer_time: None,
            plus,
            minus,
            ratio_report: RatioReport::default(),
            verified_fidelity: None,
        }
    }
}

/// Eigenvalue split by endpoint symmetry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Classification {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifyFailure {
    /// An eigenspace has `E1_u ≠ ±E1_v`, or is supported on only one of the two vertices.
    Symmetry { cluster_start: usize },
    /// Same, but the offending eigenspace is degenerate.
    Degenerate { cluster_start: usize },
}

/// Partition the eigenvalues supported on `u` by whether `E1_u = E1_v` or `E1_u = -E1_v`,
/// where `E` is the projection onto an eigenvalue cluster (consecutive gaps ≤ 1e-8).
pub fn cospectral_classify(
    d: &SpectralDecomposition,
    u: usize,
    v: usize,
    tol: f64,
) -> std::result::Result<Classification, ClassifyFailure> {
    let x = d.eigenvectors();
    let n = d.n();
    let mut out = Classification::default();
    for cluster in d.clusters(DEGENERACY_THRESHOLD) {
        let mut eu = vec![0.0; n];
        let mut ev = vec![0.0; n];
        for k in cluster.clone() {
            let (xu, xv) = (x[(u, k)], x[(v, k)]);
            for i in 0..n {
                eu[i] += x[(i, k)] * xu;
                ev[i] += x[(i, k)] * xv;
            }
        }
        let norm = |f: &dyn Fn(usize) -> f64| (0..n).map(|i| f(i).powi(2)).sum::<f64>().sqrt();
        let nu = norm(&|i| eu[i]);
        let nv = norm(&|i| ev[i]);
        let degenerate = cluster.len() > 1;
        let failure = if degenerate {
            ClassifyFailure::Degenerate {
                cluster_start: cluster.start,
            }
        } else {
            ClassifyFailure::Symmetry {
                cluster_start: cluster.start,
            }
        };
        if nu <= tol {
            if nv > tol {
                return Err(ClassifyFailure::Symmetry {
                    cluster_start: cluster.start,
                });
            }
            continue;
        }
        let lambda =
            d.eigenvalues()[cluster.clone()].iter().sum::<f64>() / cluster.len() as f64;
        if norm(&|i| eu[i] - ev[i]) <= tol * nu {
            out.plus.push(lambda);
        } else if norm(&|i| eu[i] + ev[i]) <= tol * nu {
            out.minus.push(lambda);
        } else {
            return Err(failure);
        }
    }
    Ok(out)
}

/// First continued-fraction convergent of `x` within `tol`, searching while the
/// denominator stays at most `max_den`. Fractions are in lowest terms with `den > 0`.
pub fn rational_reconstruct(x: f64, max_den: u64, tol: f64) -> Result<Option<(i64, i64)>> {
    if !x.is_finite() {
        return Err(PstError::input("cannot reconstruct a non-finite value"));
    }
    if max_den == 0 || !(tol > 0.0) {
        return Err(PstError::input("max_den must be >= 1 and tol > 0"));
    }
    // convergent recurrences h_k = a_k h_{k-1} + h_{k-2}, k_k likewise
    let (mut h_prev, mut h) = (1i128, x.floor() as i128);
    let (mut k_prev, mut k) = (0i128, 1i128);
    let mut frac = x - x.floor();
    loop {
        let value = h as f64 / k as f64;
        if (x - value).abs() <= tol {
            return Ok(Some((h as i64, k as i64)));
        }
        if frac == 0.0 {
            return Ok(None);
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        frac = inv - a;
        if !a.is_finite() || a > max_den as f64 {
            return Ok(None);
        }
        let a = a as i128;
        let next_k = a * k + k_prev;
        if next_k > max_den as i128 {
            return Ok(None);
        }
        let next_h = a * h + h_prev;
        (h_prev, h) = (h, next_h);
        (k_prev, k) = (k, next_k);
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Decide perfect state transfer from `u` to `v` and compute the earliest transfer time.
///
/// Refusals carry the reason; a certificate is only issued after the predicted
/// time reaches fidelity `≥ 1 - 1e-8` under direct evolution.
pub fn certify(
    d: &SpectralDecomposition,
    u: usize,
    v: usize,
    max_den: u64,
    tol: f64,
) -> Result<PstCertificate> {
    if u >= d.n() || v >= d.n() {
        return Err(PstError::input(format!(
            "vertex pair ({u}, {v}) out of range for {} vertices",
            d.n()
        )));
    }
    if u == v {
        return Err(PstError::input("source and target must differ"));
    }
    if max_den == 0 || !(tol > 0.0) {
        return Err(PstError::input("max_den must be >= 1 and tol > 0"));
    }

    let classes = match cospectral_classify(d, u, v, CLASSIFY_TOL) {
        Ok(c) => c,
        Err(ClassifyFailure::Symmetry { .. }) => {
            return Ok(PstCertificate::refused(RefusalReason::SymmetryFailure, vec![], vec![]))
        }
        Err(ClassifyFailure::Degenerate { .. }) => {
            return Ok(PstCertificate::refused(
                RefusalReason::DegenerateAmbiguity,
                vec![],
                vec![],
            ))
        }
    };
    let Classification { plus, minus } = classes;

    // (eigenvalue, is_plus), ascending
    let mut supported: Vec<(f64, bool)> = plus
        .iter()
        .map(|&l| (l, true))
        .chain(minus.iter().map(|&l| (l, false)))
        .collect();
    supported.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lo = supported.first().map(|s| s.0).unwrap_or(0.0);
    let hi = supported.last().map(|s| s.0).unwrap_or(0.0);
    let base_gap = hi - lo;
    if supported.len() < 2 || base_gap <= 0.0 || plus.is_empty() || minus.is_empty() {
        return Ok(PstCertificate::refused(RefusalReason::SymmetryFailure, plus, minus));
    }

    let mut report = RatioReport {
        base_gap,
        ratios: Vec::with_capacity(supported.len()),
    };
    let mut fractions = Vec::with_capacity(supported.len());
    for &(lambda, _) in &supported {
        let value = (lambda - lo) / base_gap;
        match rational_reconstruct(value, max_den, tol)? {
            Some((num, den)) => {
                let residual = (value - num as f64 / den as f64).abs();
                report.ratios.push(RatioEntry {
                    value,
                    num,
                    den,
                    residual,
                    parity_class: ParityClass::of(num, den),
                });
                fractions.push((num, den));
                if residual * (den as f64).powi(2) > RATIO_SIGNIFICANCE {
                    let mut cert =
                        PstCertificate::refused(RefusalReason::IrrationalRatio, plus, minus);
                    cert.ratio_report = report;
                    return Ok(cert);
                }
            }
            None => {
                let mut cert =
                    PstCertificate::refused(RefusalReason::IrrationalRatio, plus, minus);
                cert.ratio_report = report;
                return Ok(cert);
            }
        }
    }

    // common denominator D; scaled integers s_i = D * ratio_i
    let mut common: i64 = 1;
    for &(_, den) in &fractions {
        let g = gcd(common, den);
        common = match (common / g).checked_mul(den) {
            Some(c) if c as u64 <= max_den => c,
            _ => {
                let mut cert =
                    PstCertificate::refused(RefusalReason::IrrationalRatio, plus, minus);
                cert.ratio_report = report;
                return Ok(cert);
            }
        };
    }
    let scaled: Vec<i64> = fractions.iter().map(|&(num, den)| num * (common / den)).collect();

    // smallest m <= 2D with m*(s_i - s_j) even within a class and odd across
    // classes; T = π m D / g then aligns all phases. The parity of m*x only
    // depends on m mod 2, so m in {1, 2} covers the whole range.
    let reference = scaled[0];
    let reference_plus = supported[0].1;
    let multiplier = (1..=2.min(2 * common)).find(|&m| {
        scaled.iter().zip(&supported).all(|(&s, &(_, is_plus))| {
            let diff = (m as i128 * (s - reference) as i128).rem_euclid(2);
            if is_plus == reference_plus {
                diff == 0
            } else {
                diff == 1
            }
        })
    });
    let Some(m) = multiplier else {
        let mut cert = PstCertificate::refused(RefusalReason::ParityFailure, plus, minus);
        cert.ratio_report = report;
        return Ok(cert);
    };

    let time = PI * m as f64 * common as f64 / base_gap;
    let fid = fidelity(d, u, v, time);
    let certified = fid >= 1.0 - CERTIFY_FIDELITY_SLACK;
    Ok(PstCertificate {
        status: if certified {
            CertificateStatus::Certified
        } else {
            CertificateStatus::Refused
        },
        refusal_reason: if certified {
            RefusalReason::None
        } else {
            // the reconstructed fractions were not accurate enough to align the phases
            RefusalReason::IrrationalRatio
        },
        transfer_time: certified.then_some(time),
        plus,
        minus,
        ratio_report: report,
        verified_fidelity: Some(fid),
    })
}
