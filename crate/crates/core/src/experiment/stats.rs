//! Summary statistics of completed runs and the one-sided rank-sum test used
//! to compare mechanisms.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::statistics::{Data, OrderStatistics, Statistics};

/// Descriptive statistics over completed runs. Quartiles use the
/// median-unbiased estimator (R type 8); `std` is the sample standard
/// deviation with n-1 denominator, `None` below two observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub std: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub q1: f64,
    pub q3: f64,
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut data = Data::new(values.to_vec());
    Some(Summary {
        count: values.len(),
        mean: values.mean(),
        median: data.median(),
        std: (values.len() > 1).then(|| values.std_dev()),
        min: values.min(),
        max: values.max(),
        q1: data.lower_quartile(),
        q3: data.upper_quartile(),
    })
}

/// Mann-Whitney / Wilcoxon rank-sum test of H1 "`a` tends to be smaller
/// than `b`", normal approximation with tie and continuity correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSumTest {
    /// U statistic of `a`: number of pairs (x in a, y in b) with x > y,
    /// ties counting one half.
    pub u: f64,
    pub z: f64,
    /// One-sided p-value.
    pub p_value: f64,
}

pub fn rank_sum_less(a: &[f64], b: &[f64]) -> Option<RankSumTest> {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return None;
    }
    let mut all: Vec<(f64, usize)> = a.iter().map(|&v| (v, 0)).chain(b.iter().map(|&v| (v, 1))).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total = all.len();
    let mut ranks = vec![0.0; total];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < total {
        let mut j = i;
        while j + 1 < total && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        ranks[i..=j].fill(avg);
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let rank_sum_a: f64 = all.iter().zip(&ranks).filter(|(s, _)| s.1 == 0).map(|(_, r)| r).sum();
    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, total as f64);
    let u = rank_sum_a - n1f * (n1f + 1.0) / 2.0;
    let mean_u = n1f * n2f / 2.0;
    let var_u = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if var_u <= 1e-9 {
        return Some(RankSumTest { u, z: 0.0, p_value: 1.0 });
    }
    // Small U supports H1; continuity correction toward the mean.
    let z = (u - mean_u + 0.5) / var_u.sqrt();
    let p_value = Normal::standard().cdf(z);
    Some(RankSumTest { u, z, p_value })
}
