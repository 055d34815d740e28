//! Statistical checks used by the tests and the CLI: sample moments,
//! two-sample Kolmogorov–Smirnov tests, and constraint residuals.

use crate::error::{check_dim, Error, Result};
use crate::hyperplane::HyperplaneConstraint;
use crate::linalg::{gemm, DenseMatrix};

/// Sample mean and unbiased sample covariance of `n` draws.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    pub n: usize,
    pub mean: Vec<f64>,
    pub cov: DenseMatrix,
}

/// Moments of the rows of an `n × k` sample matrix (`n ≥ 2`).
pub fn summarize(samples: &DenseMatrix) -> Result<MomentSummary> {
    let (n, k) = samples.shape();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    let mut mean = vec![0.0; k];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(samples.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut centered = samples.clone();
    for i in 0..n {
        for (v, m) in centered.row_mut(i).iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let mut cov = DenseMatrix::zeros(k, k);
    gemm(
        1.0 / (n - 1) as f64,
        centered.view().t(),
        centered.view(),
        0.0,
        &mut cov,
    );
    cov.symmetrize_in_place();
    Ok(MomentSummary { n, mean, cov })
}

/// Two-sample Kolmogorov–Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// `sup |F_a − F_b|`.
    pub statistic: f64,
    /// Asymptotic p-value.
    pub p_value: f64,
}

/// Kolmogorov distribution tail `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 * sum.abs().max(1e-300) {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Classical two-sample KS test with the asymptotic p-value
/// `Q((√nₑ + 0.12 + 0.11/√nₑ) D)`, `nₑ = n m / (n + m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument(
            "KS test needs two nonempty samples".into(),
        ));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::NonFinite("ks_two_sample input"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let sq = ne.sqrt();
    let p_value = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
    Ok(KsResult {
        statistic: d,
        p_value,
    })
}

/// Per-column KS tests between two sample matrices with a Bonferroni
/// correction: passes iff every p-value is at least `alpha / k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KsBattery {
    pub pass: bool,
    pub min_p_value: f64,
    pub worst_column: usize,
    pub threshold: f64,
}

pub fn ks_battery(a: &DenseMatrix, b: &DenseMatrix, alpha: f64) -> Result<KsBattery> {
    check_dim("ks_battery columns", a.cols(), b.cols())?;
    let k = a.cols();
    let threshold = alpha / k as f64;
    let (mut min_p, mut worst) = (1.0f64, 0);
    for c in 0..k {
        let r = ks_two_sample(&a.column(c), &b.column(c))?;
        if r.p_value < min_p {
            min_p = r.p_value;
            worst = c;
        }
    }
    Ok(KsBattery {
        pass: min_p >= threshold,
        min_p_value: min_p,
        worst_column: worst,
        threshold,
    })
}

/// `‖G x − r‖∞ / max(1, ‖r‖∞)`.
pub fn constraint_residual(c: &HyperplaneConstraint, x: &[f64]) -> Result<f64> {
    c.residual(x)
}

/// Outcome of a moment comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub pass: bool,
    /// Largest `|mean error| / standard error` over coordinates.
    pub max_mean_z: f64,
    pub worst_coordinate: usize,
    /// `‖C_emp − C_ref‖_F / ‖C_ref‖_F`.
    pub cov_rel_error: f64,
}

/// Mean tolerance in standard errors.
pub const MEAN_Z_LIMIT: f64 = 4.0;
/// Relative Frobenius covariance tolerance.
pub const COV_REL_LIMIT: f64 = 0.05;

fn judge(
    mean_diff: &[f64],
    se: &[f64],
    cov_emp: &DenseMatrix,
    cov_ref: &DenseMatrix,
) -> Result<MomentReport> {
    let (mut max_z, mut worst) = (0.0f64, 0);
    for (i, (d, s)) in mean_diff.iter().zip(se).enumerate() {
        let z = if *s > 0.0 {
            d.abs() / s
        } else if d.abs() > 1e-12 {
            f64::INFINITY
        } else {
            0.0
        };
        if z > max_z {
            max_z = z;
            worst = i;
        }
    }
    let cov_rel_error = cov_emp.sub(cov_ref)?.frobenius_norm() / cov_ref.frobenius_norm();
    Ok(MomentReport {
        pass: max_z <= MEAN_Z_LIMIT && cov_rel_error <= COV_REL_LIMIT,
        max_mean_z: max_z,
        worst_coordinate: worst,
        cov_rel_error,
    })
}

/// Passes iff every `|mean error| ≤ 4·√(varᵢ/n)` (analytic variance) and the
/// relative Frobenius covariance error is at most 0.05.
pub fn moment_match_report(
    samples: &DenseMatrix,
    analytic_mean: &[f64],
    analytic_cov: &DenseMatrix,
) -> Result<MomentReport> {
    let k = samples.cols();
    check_dim("moment_match_report mean", k, analytic_mean.len())?;
    check_dim("moment_match_report cov rows", k, analytic_cov.rows())?;
    check_dim("moment_match_report cov cols", k, analytic_cov.cols())?;
    let s = summarize(samples)?;
    let n = s.n as f64;
    let diff: Vec<f64> = s
        .mean
        .iter()
        .zip(analytic_mean)
        .map(|(a, b)| a - b)
        .collect();
    let se: Vec<f64> = analytic_cov
        .diagonal()
        .iter()
        .map(|v| (v.max(0.0) / n).sqrt())
        .collect();
    judge(&diff, &se, &s.cov, analytic_cov)
}

/// Compares two samples of the same law: mean differences within 4 combined
/// standard errors and `‖C_a − C_b‖_F / ‖C_b‖_F ≤ 0.05`.
pub fn compare_samples(a: &DenseMatrix, b: &DenseMatrix) -> Result<MomentReport> {
    check_dim("compare_samples columns", a.cols(), b.cols())?;
    let (sa, sb) = (summarize(a)?, summarize(b)?);
    let diff: Vec<f64> = sa.mean.iter().zip(&sb.mean).map(|(x, y)| x - y).collect();
    let (va, vb) = (sa.cov.diagonal(), sb.cov.diagonal());
    let se: Vec<f64> = va
        .iter()
        .zip(&vb)
        .map(|(x, y)| (x / sa.n as f64 + y / sb.n as f64).sqrt())
        .collect();
    judge(&diff, &se, &sa.cov, &sb.cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_summary() {
        let s = summarize(&DenseMatrix::from_rows(&[&[0.0, 0.0], &[2.0, 2.0]])).unwrap();
        assert_eq!(s.mean, vec![1.0, 1.0]);
        assert_eq!(s.cov, DenseMatrix::from_rows(&[&[2.0, 2.0], &[2.0, 2.0]]));
    }

    #[test]
    fn constant_rows_have_zero_covariance() {
        let s = summarize(&DenseMatrix::from_fn(10, 3, |_, j| j as f64)).unwrap();
        assert_eq!(s.cov.max_abs(), 0.0);
    }

    #[test]
    fn summary_needs_two_rows() {
        assert!(summarize(&DenseMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn ks_extremes() {
        let a = [1.0, 2.0, 3.0];
        let same = ks_two_sample(&a, &a).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
        let far = ks_two_sample(&a, &[10.0, 11.0]).unwrap();
        assert_eq!(far.statistic, 1.0);
        assert!(ks_two_sample(&[], &a).is_err());
    }

    #[test]
    fn ks_statistic_with_ties() {
        // F_a jumps to 1 at 1; F_b is ½ at 1 and 1 at 2.
        let r = ks_two_sample(&[1.0, 1.0], &[1.0, 2.0]).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_tail_reference_values() {
        // Q(1.36) ≈ 0.049, Q(1.63) ≈ 0.0098 (classical 5% and 1% critical values)
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 5e-4);
    }
}
