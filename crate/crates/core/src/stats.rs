//! Sample statistics and goodness-of-fit tests used by the diagnostics.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{invalid, Result};

/// Streaming central moments up to order four, mergeable across workers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let t1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += t1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += t1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += t1;
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        let d2 = d * d;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3 + other.m3 + d * d2 * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * other.m3 - nb * self.m3) / n;
        Self {
            count: self.count + other.count,
            mean: self.mean + d * nb / n,
            m2,
            m3,
            m4,
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.m2 / (self.count as f64 - 1.0)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// Moment-ratio kurtosis `m4 / m2²` (3 for a normal sample).
    pub fn kurtosis(&self) -> f64 {
        if self.m2 == 0.0 {
            return f64::NAN;
        }
        self.count as f64 * self.m4 / (self.m2 * self.m2)
    }

    pub fn excess_kurtosis(&self) -> f64 {
        self.kurtosis() - 3.0
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Pearson correlation of two equally long samples.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Survival function of the Kolmogorov distribution, `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Kolmogorov–Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test of `sample` against a continuous `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> KsResult {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    KsResult {
        statistic: d,
        p_value: ks_p_value(d, n),
    }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    KsResult {
        statistic: d,
        p_value: ks_p_value(d, na * nb / (na + nb)),
    }
}

/// KS test against a normal law with the sample's own mean and deviation.
pub fn ks_normal_fit(sample: &[f64]) -> KsResult {
    let m: Moments = sample.iter().copied().collect();
    match Normal::new(m.mean, m.std_dev()) {
        Ok(n) => ks_one_sample(sample, |x| n.cdf(x)),
        Err(_) => KsResult {
            statistic: 1.0,
            p_value: 0.0,
        },
    }
}

/// Real part of the empirical characteristic function at `u`.
pub fn empirical_cf(sample: &[f64], u: f64) -> (f64, f64) {
    let n = sample.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for &x in sample {
        let (s, c) = (u * x).sin_cos();
        re += c;
        im += s;
    }
    (re / n, im / n)
}

/// Pearson goodness-of-fit outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    /// Uncorrected Pearson statistic.
    pub statistic: f64,
    /// Statistic after the design-effect correction (equals `statistic`
    /// when no correction applies).
    pub corrected: f64,
    pub dof: f64,
    pub p_value: f64,
    /// Mean design effect `δ̄`; 1 for independent samples.
    pub design_effect: f64,
}

fn pearson(counts: &[f64], probs: &[f64]) -> Result<(f64, f64)> {
    if counts.len() != probs.len() || counts.len() < 2 {
        return Err(invalid("chi-square needs matching counts and probabilities over at least two bins"));
    }
    let n: f64 = counts.iter().sum();
    let mut x2 = 0.0;
    for (&c, &p) in counts.iter().zip(probs) {
        if !(p > 0.0) {
            return Err(invalid("chi-square bin probabilities must be positive"));
        }
        let e = n * p;
        x2 += (c - e) * (c - e) / e;
    }
    Ok((x2, n))
}

fn chi2_sf(x: f64, dof: f64) -> f64 {
    match ChiSquared::new(dof) {
        Ok(c) => 1.0 - c.cdf(x),
        Err(_) => f64::NAN,
    }
}

/// Pearson χ² test for independent samples.
pub fn chi_square_gof(counts: &[f64], probs: &[f64]) -> Result<ChiSquareResult> {
    let (x2, _) = pearson(counts, probs)?;
    let dof = (counts.len() - 1) as f64;
    Ok(ChiSquareResult {
        statistic: x2,
        corrected: x2,
        dof,
        p_value: chi2_sf(x2, dof),
        design_effect: 1.0,
    })
}

/// Pearson χ² with the second-order Rao–Scott correction for clustered
/// samples. `clusters[c][k]` is the count of cluster `c` in bin `k`; the
/// clusters must be independent and equally sized.
pub fn chi_square_gof_clustered(clusters: &[Vec<f64>], probs: &[f64]) -> Result<ChiSquareResult> {
    let c = clusters.len();
    let k = probs.len();
    if c < 2 {
        return Err(invalid("clustered chi-square needs at least two clusters"));
    }
    if clusters.iter().any(|row| row.len() != k) {
        return Err(invalid("every cluster needs one count per bin"));
    }
    let pooled: Vec<f64> = (0..k).map(|j| clusters.iter().map(|r| r[j]).sum()).collect();
    let (x2, n) = pearson(&pooled, probs)?;
    let d = k - 1;
    // Cluster proportions of the first k-1 bins.
    let props: Vec<Vec<f64>> = clusters
        .iter()
        .map(|r| {
            let m: f64 = r.iter().sum();
            r[..d].iter().map(|&v| v / m).collect()
        })
        .collect();
    let pbar: Vec<f64> = (0..d).map(|j| props.iter().map(|p| p[j]).sum::<f64>() / c as f64).collect();
    let cf = c as f64;
    let mut v = vec![vec![0.0; d]; d];
    for p in &props {
        for i in 0..d {
            let di = p[i] - pbar[i];
            for j in 0..d {
                v[i][j] += di * (p[j] - pbar[j]);
            }
        }
    }
    for row in v.iter_mut() {
        for x in row.iter_mut() {
            *x /= cf * (cf - 1.0);
        }
    }
    // Inverse multinomial covariance: n (diag(1/p) + 11ᵀ/p_k).
    let pk = probs[d];
    let mut dmat = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let col_sum: f64 = (0..d).map(|l| v[l][j]).sum();
            dmat[i][j] = n * (v[i][j] / probs[i] + col_sum / pk);
        }
    }
    let tr: f64 = (0..d).map(|i| dmat[i][i]).sum();
    let tr2: f64 = (0..d).map(|i| (0..d).map(|j| dmat[i][j] * dmat[j][i]).sum::<f64>()).sum();
    let delta = tr / d as f64;
    let a2 = (tr2 / (d as f64 * delta * delta) - 1.0).max(0.0);
    let corrected = x2 / (delta * (1.0 + a2));
    let dof = d as f64 / (1.0 + a2);
    Ok(ChiSquareResult {
        statistic: x2,
        corrected,
        dof,
        p_value: chi2_sf(corrected, dof),
        design_effect: delta,
    })
}

/// Counts of `sample` in the bins delimited by increasing `edges`; the first
/// and last bins are open-ended.
pub fn bin_counts(sample: &[f64], inner_edges: &[f64]) -> Vec<f64> {
    let mut counts = vec![0.0; inner_edges.len() + 1];
    for &x in sample {
        counts[inner_edges.partition_point(|&e| e <= x)] += 1.0;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn moments_merge_matches_sequential() {
        let mut s = RandomStream::new(1, "m");
        let xs: Vec<f64> = (0..5000).map(|_| s.exponential()).collect();
        let all: Moments = xs.iter().copied().collect();
        let a: Moments = xs[..1234].iter().copied().collect();
        let b: Moments = xs[1234..].iter().copied().collect();
        let m = a.merge(&b);
        assert_eq!(m.count, all.count);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.variance() - all.variance()).abs() < 1e-10);
        assert!((m.kurtosis() - all.kurtosis()).abs() < 1e-9);
        // Exponential: kurtosis 9.
        assert!((all.kurtosis() - 9.0).abs() < 1.5);
    }

    #[test]
    fn kolmogorov_sf_reference() {
        // Critical value of the 1% level.
        assert!((kolmogorov_sf(1.627_6) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_sf(1.358_1) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn ks_detects_shift() {
        let mut s = RandomStream::new(2, "ks");
        let a: Vec<f64> = (0..2000).map(|_| s.normal()).collect();
        let b: Vec<f64> = (0..2000).map(|_| s.normal() + 0.3).collect();
        let c: Vec<f64> = (0..2000).map(|_| s.normal()).collect();
        assert!(ks_two_sample(&a, &b).p_value < 1e-6);
        assert!(ks_two_sample(&a, &c).p_value > 0.01);
        assert!(ks_normal_fit(&a).p_value > 0.01);
    }

    #[test]
    fn chi_square_reduces_to_pearson_for_iid_clusters() {
        let mut s = RandomStream::new(3, "chi");
        let probs = [0.25; 4];
        let clusters: Vec<Vec<f64>> = (0..60)
            .map(|_| {
                let xs: Vec<f64> = (0..500).map(|_| s.uniform01()).collect();
                bin_counts(&xs, &[0.25, 0.5, 0.75])
            })
            .collect();
        let r = chi_square_gof_clustered(&clusters, &probs).unwrap();
        assert!((r.design_effect - 1.0).abs() < 0.4, "{r:?}");
        assert!(r.p_value > 0.01);
        let plain = chi_square_gof(&[30.0, 10.0, 10.0, 10.0], &probs).unwrap();
        assert!(plain.p_value < 0.01);
    }
}
