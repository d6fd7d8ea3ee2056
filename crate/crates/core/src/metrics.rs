//! Statistical comparison machinery for real-vs-generated data: Pearson and
//! Spearman correlations, marginal ECDF and KDE curve export, the joint-ECDF
//! Kolmogorov–Smirnov distance, direct-error statistics and R².

use crate::math;
use crate::matrix::Matrix;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    /// The two datasets disagree on column count or length.
    ShapeMismatch { left: usize, right: usize },
    /// Fewer points than the operation needs.
    TooFewPoints { needed: usize, got: usize },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::ShapeMismatch { left, right } => {
                write!(f, "shape mismatch: {left} vs {right}")
            }
            MetricsError::TooFewPoints { needed, got } => {
                write!(f, "needs at least {needed} points, got {got}")
            }
        }
    }
}

impl core::error::Error for MetricsError {}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Pearson product-moment correlation. Returns NaN for a constant column
/// (the undefined-entry flag; callers report rather than abort).
pub fn pcc(a: &[f64], b: &[f64]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::ShapeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(MetricsError::TooFewPoints {
            needed: 2,
            got: a.len(),
        });
    }
    let (ma, mb) = (mean(a), mean(b));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(f64::NAN);
    }
    Ok(cov / math::sqrt(va * vb))
}

/// Mid-ranks (ties averaged), 1-based.
pub fn midranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&i, &j| xs[i].partial_cmp(&xs[j]).expect("NaN in rank input"));
    let mut ranks = alloc::vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end averaged over the tie group
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation on mid-ranks.
pub fn srcc(a: &[f64], b: &[f64]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::ShapeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    pcc(&midranks(a), &midranks(b))
}

fn correlation_matrix(
    data: &Matrix,
    f: fn(&[f64], &[f64]) -> Result<f64, MetricsError>,
) -> Result<Matrix, MetricsError> {
    let cols = data.cols();
    let columns: Vec<Vec<f64>> = (0..cols).map(|j| data.column(j)).collect();
    let mut m = Matrix::zeros(cols, cols);
    for i in 0..cols {
        m.set(i, i, 1.0);
        for j in (i + 1)..cols {
            let c = f(&columns[i], &columns[j])?;
            m.set(i, j, c);
            m.set(j, i, c);
        }
    }
    Ok(m)
}

/// Symmetric PCC matrix with unit diagonal.
pub fn pcc_matrix(data: &Matrix) -> Result<Matrix, MetricsError> {
    correlation_matrix(data, pcc)
}

/// Symmetric SRCC matrix with unit diagonal.
pub fn srcc_matrix(data: &Matrix) -> Result<Matrix, MetricsError> {
    correlation_matrix(data, srcc)
}

/// Right-continuous ECDF sampled at the sorted unique values:
/// pairs (v, F(v)) with F reaching 1 at the maximum.
pub fn marginal_ecdf(column: &[f64]) -> Result<Vec<(f64, f64)>, MetricsError> {
    if column.is_empty() {
        return Err(MetricsError::TooFewPoints { needed: 1, got: 0 });
    }
    let mut sorted = column.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN in ECDF input"));
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = f,
            _ => out.push((v, f)),
        }
    }
    Ok(out)
}

/// Gaussian KDE evaluated on a 512-point uniform grid spanning the data
/// range ± 3 bandwidths. Bandwidth by Silverman's rule,
/// 0.9·min(std, IQR/1.34)·n^(−1/5), with the population standard deviation.
pub fn kde_1d(column: &[f64]) -> Result<Vec<(f64, f64)>, MetricsError> {
    const GRID: usize = 512;
    let n = column.len();
    if n < 2 {
        return Err(MetricsError::TooFewPoints { needed: 2, got: n });
    }
    let m = mean(column);
    let var = column.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
    let std = math::sqrt(var);
    if std == 0.0 {
        return Err(MetricsError::TooFewPoints { needed: 2, got: 1 });
    }
    let mut sorted = column.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN in KDE input"));
    let iqr = percentile_sorted(&sorted, 0.75) - percentile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { std.min(iqr / 1.34) } else { std };
    let h = 0.9 * spread * math::powf(n as f64, -0.2);

    let lo = sorted[0] - 3.0 * h;
    let hi = sorted[n - 1] + 3.0 * h;
    let step = (hi - lo) / (GRID - 1) as f64;
    let norm = 1.0 / (n as f64 * h * math::sqrt(2.0 * core::f64::consts::PI));
    let mut curve = Vec::with_capacity(GRID);
    for g in 0..GRID {
        let x = lo + g as f64 * step;
        let mut density = 0.0;
        for &v in column {
            let z = (x - v) / h;
            density += math::exp(-0.5 * z * z);
        }
        curve.push((x, density * norm));
    }
    Ok(curve)
}

/// Percentile by linear interpolation between order statistics
/// (position q·(n−1) on the sorted sample).
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "percentile of empty slice");
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = math::floor(pos) as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Joint-ECDF Kolmogorov–Smirnov distance.
///
/// The multivariate ECDF of a dataset at point z is the fraction of its rows
/// componentwise ≤ z; the distance is the maximum absolute ECDF difference
/// over the union of both datasets' rows.
pub fn joint_ecdf_ks(real: &Matrix, synth: &Matrix) -> Result<f64, MetricsError> {
    if real.cols() != synth.cols() {
        return Err(MetricsError::ShapeMismatch {
            left: real.cols(),
            right: synth.cols(),
        });
    }
    if real.rows() == 0 || synth.rows() == 0 {
        return Err(MetricsError::TooFewPoints { needed: 1, got: 0 });
    }
    let dominated_fraction = |data: &Matrix, z: &[f64]| -> f64 {
        let mut count = 0usize;
        for row in data.iter_rows() {
            if row.iter().zip(z).all(|(&v, &zi)| v <= zi) {
                count += 1;
            }
        }
        count as f64 / data.rows() as f64
    };
    let mut ks = 0.0f64;
    for z in real.iter_rows().chain(synth.iter_rows()) {
        let d = math::abs(dominated_fraction(real, z) - dominated_fraction(synth, z));
        if d > ks {
            ks = d;
        }
    }
    Ok(ks)
}

/// Absolute relative-error statistics for paired true/generated columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    /// Mean absolute relative error (%).
    pub mean: f64,
    /// Maximum absolute relative error (%).
    pub max: f64,
    /// Population standard deviation of the absolute relative error (%).
    pub std: f64,
    /// Fraction of rows with error strictly greater than 10% (%).
    pub frac_gt_10: f64,
    /// Fraction of rows with error strictly greater than 25% (%).
    pub frac_gt_25: f64,
    /// Fraction of rows strictly above the configured threshold (%).
    pub frac_gt_threshold: f64,
    /// The configured threshold itself (%).
    pub threshold: f64,
    /// Rows excluded because the true value was zero.
    pub zero_true_rows: usize,
    /// Per-row errors (%), aligned with the included rows.
    pub per_row: Vec<f64>,
}

/// Per-row |gen − true|/|true|·100 statistics. Rows with a zero true value
/// are excluded from the relative-error statistics and counted.
pub fn error_stats(
    true_vals: &[f64],
    generated: &[f64],
    threshold_pct: f64,
) -> Result<ErrorStats, MetricsError> {
    if true_vals.len() != generated.len() {
        return Err(MetricsError::ShapeMismatch {
            left: true_vals.len(),
            right: generated.len(),
        });
    }
    if true_vals.is_empty() {
        return Err(MetricsError::TooFewPoints { needed: 1, got: 0 });
    }
    let mut per_row = Vec::with_capacity(true_vals.len());
    let mut zero_true_rows = 0usize;
    for (&t, &g) in true_vals.iter().zip(generated) {
        if t == 0.0 {
            zero_true_rows += 1;
            continue;
        }
        per_row.push(math::abs(g - t) / math::abs(t) * 100.0);
    }
    if per_row.is_empty() {
        return Err(MetricsError::TooFewPoints { needed: 1, got: 0 });
    }
    let m = mean(&per_row);
    let var = per_row.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / per_row.len() as f64;
    let count_gt = |thr: f64| -> f64 {
        per_row.iter().filter(|&&e| e > thr).count() as f64 / per_row.len() as f64 * 100.0
    };
    let max = per_row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ErrorStats {
        mean: m,
        max,
        std: math::sqrt(var),
        frac_gt_10: count_gt(10.0),
        frac_gt_25: count_gt(25.0),
        frac_gt_threshold: count_gt(threshold_pct),
        threshold: threshold_pct,
        zero_true_rows,
        per_row,
    })
}

/// Coefficient of determination, 1 − SS_res/SS_tot.
pub fn r_squared(true_vals: &[f64], generated: &[f64]) -> Result<f64, MetricsError> {
    if true_vals.len() != generated.len() {
        return Err(MetricsError::ShapeMismatch {
            left: true_vals.len(),
            right: generated.len(),
        });
    }
    if true_vals.len() < 2 {
        return Err(MetricsError::TooFewPoints {
            needed: 2,
            got: true_vals.len(),
        });
    }
    let m = mean(true_vals);
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&t, &g) in true_vals.iter().zip(generated) {
        ss_res += (t - g) * (t - g);
        ss_tot += (t - m) * (t - m);
    }
    Ok(1.0 - ss_res / ss_tot)
}

/// Mean and max over a slice; used for UQ relative-std summaries.
pub fn mean_max(values: &[f64]) -> (f64, f64) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean(values), max)
}

/// The assembled real-vs-generated comparison bundle. Correlation matrices
/// are symmetric with unit diagonal (NaN flags a constant column) and the
/// KS distance lies in [0, 1] by construction; the paired-error and UQ
/// blocks are present only when the caller computed them.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub columns: Vec<alloc::string::String>,
    pub pcc_real: Matrix,
    pub pcc_generated: Matrix,
    pub srcc_real: Matrix,
    pub srcc_generated: Matrix,
    pub ks_distance: f64,
    pub error_stats: Option<ErrorStats>,
    pub r_squared: Option<f64>,
    /// Mean and max relative standard deviation (%) over a UQ ensemble run.
    pub uq_summary: Option<(f64, f64)>,
}

/// Computes the distributional layer of the report (correlation matrices
/// and the joint-ECDF KS distance) over the shared columns.
pub fn build_report(
    real: &Matrix,
    generated: &Matrix,
    columns: &[&str],
) -> Result<MetricsReport, MetricsError> {
    if real.cols() != columns.len() || generated.cols() != columns.len() {
        return Err(MetricsError::ShapeMismatch {
            left: real.cols(),
            right: columns.len(),
        });
    }
    Ok(MetricsReport {
        columns: columns
            .iter()
            .map(|s| alloc::string::String::from(*s))
            .collect(),
        pcc_real: pcc_matrix(real)?,
        pcc_generated: pcc_matrix(generated)?,
        srcc_real: srcc_matrix(real)?,
        srcc_generated: srcc_matrix(generated)?,
        ks_distance: joint_ecdf_ks(real, generated)?,
        error_stats: None,
        r_squared: None,
        uq_summary: None,
    })
}

impl MetricsReport {
    /// Largest |real − generated| gap over a pair of correlation matrices.
    pub fn max_gap(real: &Matrix, generated: &Matrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..real.rows() {
            for j in 0..real.cols() {
                let gap = math::abs(real.get(i, j) - generated.get(i, j));
                if gap.is_finite() && gap > worst {
                    worst = gap;
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pcc_affine_invariance_and_sign() {
        let a = vec![1.0, 2.0, 5.0, 7.0, 11.0];
        let b: Vec<f64> = a.iter().map(|x| 2.0 * x + 3.0).collect();
        assert!((pcc(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((pcc(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pcc_hand_case() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let b = vec![1.0, 3.0, 2.0, 4.0];
        assert!((pcc(&a, &b).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn pcc_constant_column_flags_nan() {
        let a = vec![1.0, 1.0, 1.0];
        let b = vec![1.0, 2.0, 3.0];
        assert!(pcc(&a, &b).unwrap().is_nan());
    }

    #[test]
    fn srcc_monotone_invariance() {
        let a = vec![0.5, 1.0, 2.0, 3.5, 7.0];
        let cubed: Vec<f64> = a.iter().map(|x| x * x * x).collect();
        assert!((srcc(&a, &cubed).unwrap() - 1.0).abs() < 1e-12);
        let exp: Vec<f64> = a.iter().map(|&x| math::exp(x)).collect();
        assert!((srcc(&a, &exp).unwrap() - 1.0).abs() < 1e-12);
        let reversed: Vec<f64> = a.iter().rev().copied().collect();
        assert!((srcc(&a, &reversed).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn srcc_tie_case_matches_midrank_oracle() {
        // Independent oracle: mid-rank by counting (#less + (#equal+1)/2),
        // then the product-moment formula on the ranks.
        fn oracle(a: &[f64], b: &[f64]) -> f64 {
            let rank = |xs: &[f64]| -> Vec<f64> {
                xs.iter()
                    .map(|&x| {
                        let less = xs.iter().filter(|&&y| y < x).count() as f64;
                        let equal = xs.iter().filter(|&&y| y == x).count() as f64;
                        less + (equal + 1.0) / 2.0
                    })
                    .collect()
            };
            pcc(&rank(a), &rank(b)).unwrap()
        }
        let a = vec![1.0, 2.0, 2.0, 3.0];
        let b = vec![1.0, 2.0, 3.0, 4.0];
        let got = srcc(&a, &b).unwrap();
        assert!((got - oracle(&a, &b)).abs() < 1e-12, "{got}");
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn correlation_matrices_symmetric_unit_diagonal() {
        let data = Matrix::from_vec(
            4,
            3,
            vec![1.0, 2.0, 0.5, 2.0, 1.0, 0.7, 3.0, 5.0, 0.2, 4.0, 4.0, 0.9],
        );
        for m in [pcc_matrix(&data).unwrap(), srcc_matrix(&data).unwrap()] {
            for i in 0..3 {
                assert_eq!(m.get(i, i), 1.0);
                for j in 0..3 {
                    assert_eq!(m.get(i, j), m.get(j, i));
                    assert!(m.get(i, j).abs() <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn ecdf_counting() {
        let steps = marginal_ecdf(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(steps, vec![(1.0, 1.0 / 3.0), (2.0, 2.0 / 3.0), (3.0, 1.0)]);
    }

    #[test]
    fn ecdf_distinct_points_hit_k_over_n() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let steps = marginal_ecdf(&xs).unwrap();
        for (k, &(_, f)) in steps.iter().enumerate() {
            assert!((f - (k + 1) as f64 / 10.0).abs() < 1e-15);
        }
        assert_eq!(steps.last().unwrap().1, 1.0);
    }

    #[test]
    fn kde_integrates_to_one() {
        let mut rng = crate::rng::Rng::new(11);
        let xs: Vec<f64> = (0..400).map(|_| rng.next_normal() * 2.0 + 1.0).collect();
        let curve = kde_1d(&xs).unwrap();
        let mut integral = 0.0;
        for w in curve.windows(2) {
            integral += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
        }
        assert!((integral - 1.0).abs() < 1e-3, "integral {integral}");
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = Matrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]);
        assert_eq!(joint_ecdf_ks(&a, &a).unwrap(), 0.0);
        let zero = Matrix::from_vec(1, 1, vec![0.0]);
        let ten = Matrix::from_vec(1, 1, vec![10.0]);
        assert_eq!(joint_ecdf_ks(&zero, &ten).unwrap(), 1.0);
    }

    #[test]
    fn ks_two_dimensional_hand_case() {
        // Exhaustive evaluation over all 8 union points, by hand:
        // the max difference occurs at (1,4) where real covers 2/4 rows and
        // synth covers 0.
        let real = Matrix::from_vec(4, 2, vec![1.0, 1.0, 1.0, 4.0, 3.0, 2.0, 4.0, 4.0]);
        let synth = Matrix::from_vec(4, 2, vec![2.0, 1.0, 2.0, 5.0, 3.0, 3.0, 5.0, 1.0]);
        let ks = joint_ecdf_ks(&real, &synth).unwrap();

        let brute = |z: (f64, f64)| -> f64 {
            let count = |m: &Matrix| {
                m.iter_rows().filter(|r| r[0] <= z.0 && r[1] <= z.1).count() as f64
                    / m.rows() as f64
            };
            (count(&real) - count(&synth)).abs()
        };
        let mut expect = 0.0f64;
        for m in [&real, &synth] {
            for r in m.iter_rows() {
                expect = expect.max(brute((r[0], r[1])));
            }
        }
        assert_eq!(ks, expect);
        assert_eq!(ks, 0.5);
    }

    #[test]
    fn ks_column_mismatch_errors() {
        let a = Matrix::zeros(2, 2);
        let b = Matrix::zeros(2, 3);
        assert!(joint_ecdf_ks(&a, &b).is_err());
    }

    #[test]
    fn error_stats_perfect_agreement() {
        let t = vec![10.0, 20.0, 30.0];
        let s = error_stats(&t, &t, 10.0).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.max, 0.0);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.frac_gt_10, 0.0);
        assert_eq!(r_squared(&t, &t).unwrap(), 1.0);
    }

    #[test]
    fn error_stats_strict_threshold() {
        let s = error_stats(&[100.0], &[110.0], 10.0).unwrap();
        assert!((s.mean - 10.0).abs() < 1e-12);
        assert!((s.max - 10.0).abs() < 1e-12);
        // exactly 10% is not strictly greater than 10%
        assert_eq!(s.frac_gt_10, 0.0);
    }

    #[test]
    fn error_stats_excludes_zero_true_rows() {
        let s = error_stats(&[0.0, 100.0], &[5.0, 150.0], 10.0).unwrap();
        assert_eq!(s.zero_true_rows, 1);
        assert_eq!(s.per_row.len(), 1);
        assert!((s.mean - 50.0).abs() < 1e-12);
        assert_eq!(s.frac_gt_25, 100.0);
    }

    #[test]
    fn error_stats_match_naive_loop() {
        let mut rng = crate::rng::Rng::new(21);
        let t: Vec<f64> = (0..500).map(|_| 100.0 + 50.0 * rng.next_f64()).collect();
        let g: Vec<f64> = t
            .iter()
            .map(|v| v * (1.0 + 0.2 * rng.next_normal()))
            .collect();
        let s = error_stats(&t, &g, 10.0).unwrap();

        // Naive re-computation, one row at a time.
        let mut errs = Vec::new();
        for i in 0..t.len() {
            errs.push((g[i] - t[i]).abs() / t[i].abs() * 100.0);
        }
        let m = errs.iter().sum::<f64>() / errs.len() as f64;
        let mut mx = 0.0f64;
        let mut var = 0.0;
        let mut over10 = 0;
        for &e in &errs {
            mx = mx.max(e);
            var += (e - m) * (e - m);
        }
        for &e in &errs {
            if e > 10.0 {
                over10 += 1;
            }
        }
        var /= errs.len() as f64;
        assert!((s.mean - m).abs() < 1e-12);
        assert!((s.max - mx).abs() < 1e-12);
        assert!((s.std - math::sqrt(var)).abs() < 1e-12);
        assert!((s.frac_gt_10 - over10 as f64 / errs.len() as f64 * 100.0).abs() < 1e-12);
    }

    #[test]
    fn percentile_interpolation_hand_case() {
        let sorted = vec![1.0, 2.0, 10.0];
        assert_eq!(percentile_sorted(&sorted, 0.0), 1.0);
        assert_eq!(percentile_sorted(&sorted, 0.5), 2.0);
        assert_eq!(percentile_sorted(&sorted, 1.0), 10.0);
        assert_eq!(percentile_sorted(&sorted, 0.25), 1.5);
        assert_eq!(percentile_sorted(&sorted, 0.75), 6.0);
    }

    #[test]
    fn report_bundle_invariants() {
        let mut rng = crate::rng::Rng::new(31);
        let mut real = Matrix::zeros(40, 3);
        let mut gen = Matrix::zeros(40, 3);
        for m in [&mut real, &mut gen] {
            for v in m.as_mut_slice().iter_mut() {
                *v = rng.next_normal();
            }
        }
        let report = build_report(&real, &gen, &["a", "b", "c"]).unwrap();
        assert!((0.0..=1.0).contains(&report.ks_distance));
        for m in [&report.pcc_real, &report.srcc_generated] {
            for i in 0..3 {
                assert_eq!(m.get(i, i), 1.0);
                for j in 0..3 {
                    assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
        }
        assert!(report.error_stats.is_none());
        assert!(build_report(&real, &gen, &["a", "b"]).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_matrix(max_rows: usize) -> impl Strategy<Value = Matrix> {
            (1..=max_rows, 1usize..=3).prop_flat_map(|(r, c)| {
                proptest::collection::vec(-5.0f64..5.0, r * c)
                    .prop_map(move |v| Matrix::from_vec(r, c, v))
            })
        }

        proptest! {
            #[test]
            fn ks_symmetric_bounded(
                a in small_matrix(16),
                b in small_matrix(16),
            ) {
                prop_assume!(a.cols() == b.cols());
                let d1 = joint_ecdf_ks(&a, &b).unwrap();
                let d2 = joint_ecdf_ks(&b, &a).unwrap();
                prop_assert_eq!(d1, d2);
                prop_assert!((0.0..=1.0).contains(&d1));
            }

            #[test]
            fn pcc_bounded(
                pairs in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..50)
            ) {
                let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
                let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
                let c = pcc(&a, &b).unwrap();
                if !c.is_nan() {
                    prop_assert!(c.abs() <= 1.0 + 1e-12);
                }
            }
        }
    }
}
