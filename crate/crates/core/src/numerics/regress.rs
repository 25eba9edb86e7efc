//! Fixed-effects ("within") least squares with rank detection and robust
//! covariance.
//!
//! The solver demeans outcome and regressors by unit, factors the demeaned
//! design with a column-pivoted Householder QR, drops columns whose pivoted
//! diagonal falls below a relative tolerance (reported by name, mirroring the
//! usual "partialled out" treatment of collinear regressors), and computes
//! either a cluster-by-unit sandwich covariance or a Bartlett-kernel HAC
//! covariance on the within-unit residual series.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::gamma::chi_square_sf;

/// Relative tolerance on pivoted-QR diagonal magnitudes for rank detection.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A design matrix with named columns.
#[derive(Debug, Clone)]
pub struct Design {
    names: Vec<String>,
    matrix: DMatrix<f64>,
}

impl Design {
    pub fn new(names: Vec<String>, matrix: DMatrix<f64>) -> Result<Self> {
        if names.len() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} column names for a {}-column matrix",
                names.len(),
                matrix.ncols()
            )));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::invalid(format!("duplicate column name `{a}`")));
            }
        }
        Ok(Design { names, matrix })
    }

    /// Build from per-column vectors, all of equal length.
    pub fn from_columns(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid(
                "design must have at least one column".to_string(),
            ));
        }
        let n = columns[0].1.len();
        if columns.iter().any(|(_, v)| v.len() != n) {
            return Err(Error::DimensionMismatch(
                "design columns have unequal lengths".to_string(),
            ));
        }
        let names = columns.iter().map(|(n, _)| n.clone()).collect();
        let mut matrix = DMatrix::zeros(n, columns.len());
        for (j, (_, v)) in columns.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                matrix[(i, j)] = *x;
            }
        }
        Design::new(names, matrix)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Robust covariance estimator selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceMode {
    /// Liang-Zeger cluster sandwich, clustering on the demeaning unit, with
    /// small-sample factor G/(G−1)·(N−1)/(N−K).
    ClusterByUnit,
    /// Bartlett-kernel (Newey-West) HAC on each unit's time-ordered residual
    /// series. Rows must be ordered by time within unit. `bandwidth = None`
    /// selects ⌊4(T/100)^(2/9)⌋ from the longest unit series.
    HacBartlett { bandwidth: Option<usize> },
}

impl CovarianceMode {
    fn hac_default_bandwidth(t: usize) -> usize {
        (4.0 * (t as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
    }
}

/// Output of [`fe_ols`]: coefficients over retained columns plus diagnostics.
#[derive(Debug, Clone)]
pub struct RegressionFit {
    /// Retained column names, in original design order.
    pub columns: Vec<String>,
    /// Coefficient estimates aligned with `columns`.
    pub coefficients: Vec<f64>,
    /// Robust covariance over retained columns.
    pub covariance: DMatrix<f64>,
    /// Within R-squared (on unit-demeaned data), clamped to [0, 1].
    pub r_squared: f64,
    /// Columns removed by rank detection, in original design order.
    pub dropped_columns: Vec<String>,
    pub n_obs: usize,
    pub n_units: usize,
}

impl RegressionFit {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.coefficients[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.index_of(name)
            .map(|i| self.covariance[(i, i)].max(0.0).sqrt())
    }

    pub fn is_dropped(&self, name: &str) -> bool {
        self.dropped_columns.iter().any(|c| c == name)
    }
}

/// Joint chi-square test of a coefficient subset being zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaldTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Within (fixed-effects) least squares.
///
/// Demeans `y` and every design column by unit, drops rank-deficient columns,
/// solves the least-squares problem, and computes the requested robust
/// covariance. Requires at least two units and at least one retained column.
pub fn fe_ols(
    y: &[f64],
    design: &Design,
    unit_ids: &[u64],
    mode: CovarianceMode,
) -> Result<RegressionFit> {
    let n = y.len();
    if n == 0 {
        return Err(Error::DimensionMismatch("empty outcome vector".to_string()));
    }
    if design.n_rows() != n || unit_ids.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "y has {n} rows, design has {}, unit_ids has {}",
            design.n_rows(),
            unit_ids.len()
        )));
    }

    // Group rows by unit. Demeaning is order-independent: each row only sees
    // its own unit's mean.
    let mut groups: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, &u) in unit_ids.iter().enumerate() {
        groups.entry(u).or_default().push(i);
    }
    let n_units = groups.len();
    if n_units < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 units, got {n_units}"
        )));
    }

    let p = design.n_cols();
    let mut x_dm = design.matrix().clone();
    let mut y_dm = DVector::from_column_slice(y);
    for rows in groups.values() {
        let inv = 1.0 / rows.len() as f64;
        let mut y_mean = 0.0;
        for &i in rows.iter() {
            y_mean += y_dm[i];
        }
        y_mean *= inv;
        for &i in rows.iter() {
            y_dm[i] -= y_mean;
        }
        for j in 0..p {
            let mut m = 0.0;
            for &i in rows.iter() {
                m += x_dm[(i, j)];
            }
            m *= inv;
            for &i in rows.iter() {
                x_dm[(i, j)] -= m;
            }
        }
    }

    // Rank-revealing factorization of the demeaned design.
    let qr = pivoted_qr(x_dm.clone(), RANK_TOLERANCE);
    let rank = qr.rank;
    if rank == 0 {
        return Err(Error::DegenerateRegression(
            "all columns dropped: no variation left after demeaning".to_string(),
        ));
    }
    if n <= rank {
        return Err(Error::DegenerateRegression(format!(
            "{n} observations cannot support {rank} retained columns"
        )));
    }

    // Coefficients in pivot order: solve R z = Q'y on the leading block.
    let mut qty = y_dm.clone();
    qr.apply_q_transpose(&mut qty);
    let z = qr.solve_upper(&qty);

    // (X'X)^{-1} over retained columns, still in pivot order.
    let r_inv = qr.invert_r();
    let bread_pivot = &r_inv * r_inv.transpose();

    // Reorder retained columns back to original design order.
    let mut order: Vec<usize> = (0..rank).collect();
    order.sort_by_key(|&i| qr.perm[i]);
    let retained: Vec<usize> = order.iter().map(|&i| qr.perm[i]).collect();
    let columns: Vec<String> = retained.iter().map(|&j| design.names[j].clone()).collect();
    let coefficients: Vec<f64> = order.iter().map(|&i| z[i]).collect();
    let mut bread = DMatrix::zeros(rank, rank);
    for (a, &ia) in order.iter().enumerate() {
        for (b, &ib) in order.iter().enumerate() {
            bread[(a, b)] = bread_pivot[(ia, ib)];
        }
    }

    let mut dropped: Vec<usize> = qr.perm[rank..].to_vec();
    dropped.sort_unstable();
    let dropped_columns: Vec<String> = dropped.iter().map(|&j| design.names[j].clone()).collect();

    // Residuals on the demeaned data, using retained columns only.
    let mut resid = y_dm.clone();
    for (k, &j) in retained.iter().enumerate() {
        let b = coefficients[k];
        for i in 0..n {
            resid[i] -= x_dm[(i, j)] * b;
        }
    }
    let rss: f64 = resid.iter().map(|e| e * e).sum();
    let tss: f64 = y_dm.iter().map(|v| v * v).sum();
    let r_squared = if tss > 0.0 {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    } else {
        0.0
    };

    // Scores s_i = x_i e_i restricted to retained columns.
    let mut sorted_units: Vec<u64> = groups.keys().copied().collect();
    sorted_units.sort_unstable();

    let meat = match mode {
        CovarianceMode::ClusterByUnit => {
            let mut meat = DMatrix::zeros(rank, rank);
            for u in &sorted_units {
                let rows = &groups[u];
                let mut s = vec![0.0f64; rank];
                for &i in rows.iter() {
                    let e = resid[i];
                    for (k, &j) in retained.iter().enumerate() {
                        s[k] += x_dm[(i, j)] * e;
                    }
                }
                for a in 0..rank {
                    for b in 0..rank {
                        meat[(a, b)] += s[a] * s[b];
                    }
                }
            }
            // Small-sample factor G/(G−1)·(N−1)/(N−K), with K counting the
            // absorbed unit effects alongside the retained regressors.
            let g = n_units as f64;
            let nf = n as f64;
            let kf = (rank + n_units) as f64;
            let factor = if nf > kf {
                g / (g - 1.0) * (nf - 1.0) / (nf - kf)
            } else {
                g / (g - 1.0)
            };
            meat * factor
        }
        CovarianceMode::HacBartlett { bandwidth } => {
            let t_max = groups.values().map(|r| r.len()).max().unwrap_or(1);
            let lag_max = bandwidth.unwrap_or_else(|| CovarianceMode::hac_default_bandwidth(t_max));
            let mut meat = DMatrix::zeros(rank, rank);
            for u in &sorted_units {
                let rows = &groups[u];
                // Scores for this unit's time series, in row order.
                let scores: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|&i| {
                        let e = resid[i];
                        retained.iter().map(|&j| x_dm[(i, j)] * e).collect()
                    })
                    .collect();
                let t_len = scores.len();
                for s_t in &scores {
                    for a in 0..rank {
                        for b in 0..rank {
                            meat[(a, b)] += s_t[a] * s_t[b];
                        }
                    }
                }
                for lag in 1..=lag_max.min(t_len.saturating_sub(1)) {
                    let w = 1.0 - lag as f64 / (lag_max as f64 + 1.0);
                    for t in lag..t_len {
                        for a in 0..rank {
                            for b in 0..rank {
                                let cross = scores[t][a] * scores[t - lag][b]
                                    + scores[t - lag][a] * scores[t][b];
                                meat[(a, b)] += w * cross;
                            }
                        }
                    }
                }
            }
            meat
        }
    };

    let covariance = &bread * meat * &bread;

    Ok(RegressionFit {
        columns,
        coefficients,
        covariance,
        r_squared,
        dropped_columns,
        n_obs: n,
        n_units,
    })
}

/// Joint Wald test that the named coefficients are all zero.
///
/// Computes b'V⁻¹b on the selected sub-vector and sub-covariance; the p-value
/// comes from the chi-square distribution with one degree of freedom per
/// tested column. Invariant to the ordering of `columns`.
pub fn wald_joint(fit: &RegressionFit, columns: &[&str]) -> Result<WaldTest> {
    if columns.is_empty() {
        return Err(Error::invalid(
            "wald test needs at least one column".to_string(),
        ));
    }
    let mut idx = Vec::with_capacity(columns.len());
    for &c in columns {
        match fit.index_of(c) {
            Some(i) => idx.push(i),
            None => return Err(Error::UnknownColumn(c.to_string())),
        }
    }
    let q = idx.len();
    let b = DVector::from_iterator(q, idx.iter().map(|&i| fit.coefficients[i]));
    let mut v = DMatrix::zeros(q, q);
    for (a, &ia) in idx.iter().enumerate() {
        for (c, &ic) in idx.iter().enumerate() {
            v[(a, c)] = fit.covariance[(ia, ic)];
        }
    }
    // Symmetrize before factoring; the sandwich is symmetric up to rounding.
    let v = (&v + v.transpose()) * 0.5;
    let chol = v.cholesky().ok_or_else(|| {
        Error::SingularMatrix("wald sub-covariance is not positive definite".to_string())
    })?;
    let solved = chol.solve(&b);
    let statistic = (b.transpose() * solved)[(0, 0)].max(0.0);
    let p_value = chi_square_sf(statistic, q)?;
    Ok(WaldTest {
        statistic,
        df: q,
        p_value,
    })
}

/// Column-pivoted Householder QR of an n×p matrix.
struct PivotedQr {
    /// R on and above the diagonal; Householder vectors (unit leading entry
    /// implicit) below it. Columns are in pivot order.
    factors: DMatrix<f64>,
    taus: Vec<f64>,
    /// `perm[j]` is the original index of working column `j`.
    perm: Vec<usize>,
    rank: usize,
}

fn pivoted_qr(mut a: DMatrix<f64>, rel_tol: f64) -> PivotedQr {
    let (n, p) = a.shape();
    let kmax = n.min(p);
    let mut perm: Vec<usize> = (0..p).collect();
    let mut taus = vec![0.0f64; kmax];
    let mut rank = 0usize;
    let mut first_diag = 0.0f64;

    for k in 0..kmax {
        // Greedy pivot: the column with the largest remaining norm. Norms are
        // recomputed exactly each step; p is small in this crate.
        let mut best = k;
        let mut best_norm_sq = tail_norm_sq(&a, k, k);
        for j in (k + 1)..p {
            let nj = tail_norm_sq(&a, k, j);
            if nj > best_norm_sq {
                best = j;
                best_norm_sq = nj;
            }
        }
        if best != k {
            a.swap_columns(k, best);
            perm.swap(k, best);
        }
        let norm = best_norm_sq.sqrt();
        if k == 0 {
            first_diag = norm;
        }
        if norm == 0.0 || norm <= rel_tol * first_diag {
            break;
        }

        let alpha = a[(k, k)];
        let beta = if alpha >= 0.0 { -norm } else { norm };
        let scale = alpha - beta;
        a[(k, k)] = beta;
        for i in (k + 1)..n {
            a[(i, k)] /= scale;
        }
        let tau = (beta - alpha) / beta;
        taus[k] = tau;

        for j in (k + 1)..p {
            let mut w = a[(k, j)];
            for i in (k + 1)..n {
                w += a[(i, k)] * a[(i, j)];
            }
            w *= tau;
            a[(k, j)] -= w;
            for i in (k + 1)..n {
                let vik = a[(i, k)];
                a[(i, j)] -= vik * w;
            }
        }
        rank += 1;
    }

    PivotedQr {
        factors: a,
        taus,
        perm,
        rank,
    }
}

fn tail_norm_sq(a: &DMatrix<f64>, from_row: usize, col: usize) -> f64 {
    let mut s = 0.0;
    for i in from_row..a.nrows() {
        s += a[(i, col)] * a[(i, col)];
    }
    s
}

impl PivotedQr {
    fn apply_q_transpose(&self, y: &mut DVector<f64>) {
        let n = self.factors.nrows();
        for k in 0..self.rank {
            let mut w = y[k];
            for i in (k + 1)..n {
                w += self.factors[(i, k)] * y[i];
            }
            w *= self.taus[k];
            y[k] -= w;
            for i in (k + 1)..n {
                y[i] -= self.factors[(i, k)] * w;
            }
        }
    }

    /// Back-substitution on the leading rank×rank block of R.
    fn solve_upper(&self, qty: &DVector<f64>) -> Vec<f64> {
        let r = self.rank;
        let mut z = vec![0.0f64; r];
        for k in (0..r).rev() {
            let mut s = qty[k];
            for j in (k + 1)..r {
                s -= self.factors[(k, j)] * z[j];
            }
            z[k] = s / self.factors[(k, k)];
        }
        z
    }

    /// Inverse of the leading rank×rank block of R (upper triangular).
    fn invert_r(&self) -> DMatrix<f64> {
        let r = self.rank;
        let mut inv = DMatrix::zeros(r, r);
        for col in 0..r {
            // Solve R x = e_col.
            for k in (0..=col).rev() {
                let mut s = if k == col { 1.0 } else { 0.0 };
                for j in (k + 1)..=col {
                    s -= self.factors[(k, j)] * inv[(j, col)];
                }
                inv[(k, col)] = s / self.factors[(k, k)];
            }
        }
        inv
    }
}
