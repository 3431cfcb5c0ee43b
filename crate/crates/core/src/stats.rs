//! Completion confidence, quartiles and IQR filtering, Mann-Whitney U, descriptive summaries.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Sample standard deviation (n - 1). A single value has spread 0.
pub fn sample_std(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    if values.len() == 1 {
        return Some(0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    let mean = mean(values).ok_or(Error::EmptySample)?;
    Ok(Summary {
        n: values.len(),
        mean,
        std: sample_std(values).unwrap_or(0.0),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionResult {
    pub successes: u32,
    pub failures: u32,
    pub rate: f64,
    pub confidence_at: Vec<(f64, f64)>,
}

/// Confidence that the true success probability is at least `p0`, given the
/// observed successes and failures (binomial demonstration test).
pub fn completion_confidence(successes: u32, failures: u32, p0: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InvalidP0(p0));
    }
    let n = successes + failures;
    if n == 0 {
        return Err(Error::TooFewValues { needed: 1, got: 0 });
    }
    let q = 1.0 - p0;
    let mut coeff = 1.0;
    let mut tail = 0.0;
    for k in 0..=failures {
        if k > 0 {
            coeff *= f64::from(n - k + 1) / f64::from(k);
        }
        tail += coeff * q.powi(k as i32) * p0.powi((n - k) as i32);
    }
    Ok((1.0 - tail).clamp(0.0, 1.0))
}

pub fn completion(successes: u32, failures: u32, thresholds: &[f64]) -> Result<CompletionResult> {
    let n = successes + failures;
    if n == 0 {
        return Err(Error::TooFewValues { needed: 1, got: 0 });
    }
    let confidence_at = thresholds
        .iter()
        .map(|&p0| completion_confidence(successes, failures, p0).map(|c| (p0, c)))
        .collect::<Result<_>>()?;
    Ok(CompletionResult {
        successes,
        failures,
        rate: f64::from(successes) / f64::from(n),
        confidence_at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Value at a 1-based fractional position, interpolating linearly and clamping at the ends.
fn at_position(sorted: &[f64], pos: f64) -> f64 {
    let n = sorted.len();
    if pos <= 1.0 {
        return sorted[0];
    }
    if pos >= n as f64 {
        return sorted[n - 1];
    }
    let lo = pos.floor();
    let frac = pos - lo;
    let i = lo as usize - 1;
    if frac == 0.0 {
        sorted[i]
    } else {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    }
}

/// Quartiles at positions (n+1)/4, (n+1)/2 and 3(n+1)/4.
pub fn quartiles(values: &[f64]) -> Result<Quartiles> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let s = sorted(values);
    let n1 = (s.len() + 1) as f64;
    Ok(Quartiles {
        q1: at_position(&s, n1 / 4.0),
        median: at_position(&s, n1 / 2.0),
        q3: at_position(&s, 3.0 * n1 / 4.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IqrFilter {
    pub kept: Vec<f64>,
    pub removed: Vec<f64>,
    pub quartiles: Quartiles,
    pub lower_fence: f64,
    pub upper_fence: f64,
    pub warning: Option<String>,
}

/// Drop values strictly outside the 1.5 IQR fences, keeping input order.
pub fn iqr_filter(values: &[f64]) -> Result<IqrFilter> {
    if values.len() < 4 {
        return Err(Error::TooFewValues {
            needed: 4,
            got: values.len(),
        });
    }
    let quartiles = quartiles(values)?;
    let r = quartiles.iqr();
    let lower_fence = quartiles.q1 - 1.5 * r;
    let upper_fence = quartiles.q3 + 1.5 * r;
    let (kept, removed): (Vec<f64>, Vec<f64>) = values
        .iter()
        .partition(|&&v| v >= lower_fence && v <= upper_fence);
    let warning = (removed.len() * 10 > values.len()).then(|| {
        format!(
            "outlier rule removed {} of {} values (more than 10%)",
            removed.len(),
            values.len()
        )
    });
    Ok(IqrFilter {
        kept,
        removed,
        quartiles,
        lower_fence,
        upper_fence,
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MannWhitney {
    pub u: f64,
    pub u_a: f64,
    pub u_b: f64,
    pub p_two_sided: f64,
    pub method: PMethod,
}

/// Midranks (1-based) of the pooled sample plus the tie group sizes.
fn midranks(pooled: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    idx.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && pooled[idx[j]] == pooled[idx[i]] {
            j += 1;
        }
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

pub const EXACT_LIMIT: usize = 8;

pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample value".into()));
    }
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let r_a: f64 = ranks[..n1].iter().sum();
    let u_a = r_a - (n1 * (n1 + 1)) as f64 / 2.0;
    let u_b = (n1 * n2) as f64 - u_a;
    let u = u_a.min(u_b);

    let (p, method) = if n1.min(n2) <= EXACT_LIMIT {
        (exact_p(&ranks, n1), PMethod::Exact)
    } else {
        (normal_p(u_a, n1, n2, &ties), PMethod::Normal)
    };
    Ok(MannWhitney {
        u,
        u_a,
        u_b,
        p_two_sided: p,
        method,
    })
}

/// Null distribution of the smaller group's doubled rank sum over every equally likely
/// labelling, counted by dynamic programming (identical to enumerating all subsets).
fn exact_p(ranks: &[f64], n1: usize) -> f64 {
    let n = ranks.len();
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let (m, observed): (usize, usize) = if n1 <= n - n1 {
        (n1, doubled[..n1].iter().sum())
    } else {
        (n - n1, doubled[n1..].iter().sum())
    };
    let mut top = doubled.clone();
    top.sort_unstable_by(|x, y| y.cmp(x));
    let max_sum: usize = top[..m].iter().sum();

    // counts[k][s]: subsets of size k whose doubled ranks sum to s
    let mut counts = vec![vec![0u128; max_sum + 1]; m + 1];
    counts[0][0] = 1;
    for &d in &doubled {
        for k in (1..=m).rev() {
            let (lower, upper) = counts.split_at_mut(k);
            let (prev, cur) = (&lower[k - 1], &mut upper[0]);
            for s in (d..=max_sum).rev() {
                cur[s] += prev[s - d];
            }
        }
    }
    let dist = &counts[m];
    let total: u128 = dist.iter().sum();
    let le: u128 = dist[..=observed].iter().sum();
    let ge: u128 = dist[observed..].iter().sum();
    let tail = le.min(ge) as f64 / total as f64;
    (2.0 * tail).min(1.0)
}

fn normal_p(u_a: f64, n1: usize, n2: usize, ties: &[usize]) -> f64 {
    let (f1, f2) = (n1 as f64, n2 as f64);
    let n = f1 + f2;
    let tie_term: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / (n * (n - 1.0));
    let var = f1 * f2 / 12.0 * ((n + 1.0) - tie_term);
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u_a - f1 * f2 / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - std_normal.cdf(z))).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelchT {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
}

/// Welch's unequal-variance t test; `None` when either side has fewer than two values
/// or both variances vanish.
pub fn welch_t(a: &[f64], b: &[f64]) -> Option<WelchT> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let (ma, mb) = (mean(a)?, mean(b)?);
    let (va, vb) = (sample_std(a)?.powi(2), sample_std(b)?.powi(2));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let se2 = va / na + vb / nb;
    if se2 <= 0.0 {
        return None;
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    let p = (2.0 * (1.0 - dist.cdf(t.abs()))).min(1.0);
    Some(WelchT {
        t,
        df,
        p_two_sided: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn completion_examples() {
        assert!(close(completion_confidence(10, 0, 0.85).unwrap(), 0.8031, 1e-4));
        assert!(close(completion_confidence(5, 0, 0.70).unwrap(), 0.8319, 1e-4));
        assert!(close(completion_confidence(1, 0, 0.999).unwrap(), 0.001, 1e-9));
        assert_eq!(completion_confidence(3, 0, 1.0), Err(Error::InvalidP0(1.0)));
        assert_eq!(completion_confidence(3, 0, 0.0), Err(Error::InvalidP0(0.0)));
    }

    #[test]
    fn completion_matches_binomial_cdf() {
        use statrs::distribution::{Binomial, DiscreteCDF};
        for (s, f, p0) in [(10u32, 1u32, 0.75), (20, 3, 0.6), (7, 7, 0.5)] {
            let n = u64::from(s + f);
            let fails = Binomial::new(1.0 - p0, n).unwrap();
            let expected = 1.0 - fails.cdf(u64::from(f));
            assert!(close(completion_confidence(s, f, p0).unwrap(), expected, 1e-12));
        }
    }

    #[test]
    fn completion_rate_and_table() {
        let r = completion(9, 1, &[0.5, 0.8]).unwrap();
        assert_eq!(r.rate, 0.9);
        assert_eq!(r.confidence_at.len(), 2);
    }

    #[test]
    fn quartile_examples() {
        let q = quartiles(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (2.0, 4.0, 6.0));
        let f = iqr_filter(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        assert_eq!((f.lower_fence, f.upper_fence), (-4.0, 12.0));
        assert!(f.removed.is_empty());

        let mut v: Vec<f64> = (1..=20).map(f64::from).collect();
        v.push(100.0);
        let f = iqr_filter(&v).unwrap();
        assert_eq!((f.quartiles.q1, f.quartiles.q3), (5.5, 16.5));
        assert_eq!(f.removed, vec![100.0]);
        assert!(f.warning.is_none());
    }

    #[test]
    fn iqr_all_equal_and_too_few() {
        let f = iqr_filter(&[3.0; 6]).unwrap();
        assert!(f.removed.is_empty());
        assert_eq!(
            iqr_filter(&[1.0, 2.0, 3.0]),
            Err(Error::TooFewValues { needed: 4, got: 3 })
        );
    }

    #[test]
    fn iqr_warns_above_ten_percent() {
        let f = iqr_filter(&[5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 9.0, 1.0]).unwrap();
        assert_eq!(f.removed.len(), 2);
        assert!(f.warning.is_some());
    }

    #[test]
    fn mann_whitney_examples() {
        let r = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!(close(r.p_two_sided, 0.1, 1e-12));
        assert_eq!(r.method, PMethod::Exact);

        let a = [2.0, 4.0, 6.0, 8.0];
        let r = mann_whitney(&a, &a).unwrap();
        assert_eq!(r.u, 8.0);
        assert!(close(r.p_two_sided, 1.0, 1e-12));

        assert_eq!(mann_whitney(&[], &[1.0]), Err(Error::EmptySample));
    }

    #[test]
    fn mann_whitney_normal_branch() {
        let a: Vec<f64> = (0..20).map(f64::from).collect();
        let b: Vec<f64> = (0..20).map(|v| f64::from(v) + 10.5).collect();
        let r = mann_whitney(&a, &b).unwrap();
        assert_eq!(r.method, PMethod::Normal);
        // a = k beats k - 10 values of b for k >= 11, so U_a = 1 + 2 + ... + 9
        assert_eq!(r.u_a, 45.0);
        let z: f64 = (200.0 - 45.0 - 0.5) / (400.0 * 41.0 / 12.0f64).sqrt();
        let expected = 2.0 * (1.0 - Normal::new(0.0, 1.0).unwrap().cdf(z));
        assert!(close(r.p_two_sided, expected, 1e-12));
    }

    #[test]
    fn welch_t_reference() {
        // equal variances, equal sizes: df = 2n - 2
        let w = welch_t(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!(close(w.t, -1.0 / (2.0f64 / 3.0).sqrt(), 1e-12));
        assert!(close(w.df, 4.0, 1e-12));
        assert!(welch_t(&[1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn summary_single_value() {
        let s = summarize(&[4.0]).unwrap();
        assert_eq!((s.mean, s.std), (4.0, 0.0));
        assert_eq!(summarize(&[]), Err(Error::EmptySample));
    }

    /// Doubled U for `a` by direct pair counting.
    fn u2_pairs(a: &[i64], b: &[i64]) -> i64 {
        a.iter()
            .flat_map(|x| b.iter().map(move |y| (x, y)))
            .map(|(x, y)| match x.cmp(y) {
                std::cmp::Ordering::Greater => 2,
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Less => 0,
            })
            .sum()
    }

    fn brute_force_p(a: &[i64], b: &[i64]) -> f64 {
        let pooled: Vec<i64> = a.iter().chain(b).copied().collect();
        let n = pooled.len();
        let obs = u2_pairs(a, b);
        let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != a.len() {
                continue;
            }
            let (xa, xb): (Vec<_>, Vec<_>) = (0..n).partition(|i| mask & (1 << i) != 0);
            let xa: Vec<i64> = xa.iter().map(|&i| pooled[i]).collect();
            let xb: Vec<i64> = xb.iter().map(|&i| pooled[i]).collect();
            let u = u2_pairs(&xa, &xb);
            total += 1;
            le += u64::from(u <= obs);
            ge += u64::from(u >= obs);
        }
        (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
    }

    #[test]
    fn exact_p_matches_enumeration_small() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n1 = rng.gen_range(1..=5);
            let n2 = rng.gen_range(1..=5);
            let a: Vec<i64> = (0..n1).map(|_| rng.gen_range(1..=5)).collect();
            let b: Vec<i64> = (0..n2).map(|_| rng.gen_range(1..=5)).collect();
            let fa: Vec<f64> = a.iter().map(|&v| v as f64).collect();
            let fb: Vec<f64> = b.iter().map(|&v| v as f64).collect();
            let r = mann_whitney(&fa, &fb).unwrap();
            assert!(close(r.p_two_sided, brute_force_p(&a, &b), 1e-12), "{a:?} {b:?}");
            assert_eq!((2.0 * r.u_a) as i64, u2_pairs(&a, &b));
        }
    }

    proptest! {
        #[test]
        fn u_sum_identity(a in prop::collection::vec(-20i32..20, 1..15), b in prop::collection::vec(-20i32..20, 1..15)) {
            let fa: Vec<f64> = a.iter().map(|&v| f64::from(v)).collect();
            let fb: Vec<f64> = b.iter().map(|&v| f64::from(v)).collect();
            let r = mann_whitney(&fa, &fb).unwrap();
            prop_assert_eq!(r.u_a + r.u_b, (a.len() * b.len()) as f64);
            prop_assert!(r.p_two_sided >= 0.0 && r.p_two_sided <= 1.0);
        }

        #[test]
        fn confidence_monotone(s in 1u32..30, f in 0u32..5, p in 0.05f64..0.9) {
            let lo = completion_confidence(s, f, p).unwrap();
            let hi_p = completion_confidence(s, f, p + 0.05).unwrap();
            let more = completion_confidence(s + 1, f, p).unwrap();
            prop_assert!(hi_p <= lo);
            if lo < 1.0 - 1e-9 {
                prop_assert!(hi_p < lo);
            }
            prop_assert!(more >= lo);
        }

        #[test]
        fn iqr_second_pass(values in prop::collection::vec(-100.0f64..100.0, 4..60)) {
            let once = iqr_filter(&values).unwrap();
            if once.kept.len() >= 4 {
                let twice = iqr_filter(&once.kept).unwrap();
                if twice.removed.is_empty() {
                    prop_assert_eq!(&twice.kept, &once.kept);
                }
            }
            prop_assert_eq!(once.kept.len() + once.removed.len(), values.len());
        }
    }
}
