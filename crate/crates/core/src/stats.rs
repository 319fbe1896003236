//! Wilcoxon signed-rank test and win/tie/loss tabulation.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Differences with magnitude at or below this are treated as zero, and
/// magnitudes closer than this share a rank.
const ZERO_TOL: f64 = 1e-9;

/// Largest sample size for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Non-zero differences used.
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Non-zero differences `a - b` with their average ranks by magnitude.
pub fn signed_ranks(a: &[f64], b: &[f64]) -> Result<Vec<(f64, f64)>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    if a.is_empty() {
        return Err(Error::Empty("paired sample"));
    }
    let mut d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| v.abs() > ZERO_TOL).collect();
    d.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let mut out = Vec::with_capacity(d.len());
    let mut start = 0;
    while start < d.len() {
        let mut end = start + 1;
        while end < d.len() && d[end].abs() - d[start].abs() <= ZERO_TOL {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        out.extend(d[start..end].iter().map(|&v| (v, rank)));
        start = end;
    }
    Ok(out)
}

fn sums(ranked: &[(f64, f64)]) -> (f64, f64) {
    let plus = ranked.iter().filter(|(d, _)| *d > 0.0).map(|(_, r)| r).sum();
    let minus = ranked.iter().filter(|(d, _)| *d < 0.0).map(|(_, r)| r).sum();
    (plus, minus)
}

fn no_evidence(n: usize, method: WilcoxonMethod) -> WilcoxonResult {
    WilcoxonResult { n, w_plus: 0.0, w_minus: 0.0, p_value: 1.0, method }
}

/// Two-sided p-value from the exact permutation distribution of W+, with
/// ranks doubled so averaged ties stay integral.
pub fn wilcoxon_exact(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    let ranked = signed_ranks(a, b)?;
    let n = ranked.len();
    if n == 0 {
        return Ok(no_evidence(0, WilcoxonMethod::Exact));
    }
    let doubled: Vec<usize> = ranked.iter().map(|(_, r)| libm::round(r * 2.0) as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut ways = alloc::vec![0.0f64; total + 1];
    ways[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            ways[s] += ways[s - r];
        }
    }
    let (w_plus, w_minus) = sums(&ranked);
    let observed = doubled.iter().zip(&ranked).filter(|(_, (d, _))| *d > 0.0).map(|(r, _)| r).sum::<usize>();
    let all = libm::pow(2.0, n as f64);
    let lower: f64 = ways[..=observed].iter().sum::<f64>() / all;
    let upper: f64 = ways[observed..].iter().sum::<f64>() / all;
    let p_value = (2.0 * lower.min(upper)).min(1.0);
    Ok(WilcoxonResult { n, w_plus, w_minus, p_value, method: WilcoxonMethod::Exact })
}

/// Normal approximation with tie-corrected variance, optionally with a
/// continuity correction of 0.5.
pub fn wilcoxon_normal(a: &[f64], b: &[f64], continuity: bool) -> Result<WilcoxonResult> {
    let ranked = signed_ranks(a, b)?;
    let n = ranked.len();
    if n == 0 {
        return Ok(no_evidence(0, WilcoxonMethod::Normal));
    }
    let (w_plus, w_minus) = sums(&ranked);
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
    let mut k = 0;
    while k < ranked.len() {
        let t = ranked[k..].iter().take_while(|(_, r)| *r == ranked[k].1).count();
        let t = t as f64;
        var -= (t * t * t - t) / 48.0;
        k += t as usize;
    }
    if var <= 0.0 {
        return Ok(WilcoxonResult { n, w_plus, w_minus, p_value: 1.0, method: WilcoxonMethod::Normal });
    }
    let shift = if continuity { 0.5 } else { 0.0 };
    let z = ((w_plus - mean).abs() - shift).max(0.0) / libm::sqrt(var);
    let p_value = libm::erfc(z / core::f64::consts::SQRT_2).min(1.0);
    Ok(WilcoxonResult { n, w_plus, w_minus, p_value, method: WilcoxonMethod::Normal })
}

/// Exact for up to [`EXACT_MAX_N`] non-zero differences, continuity-corrected
/// normal above.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    let n = signed_ranks(a, b)?.len();
    if n <= EXACT_MAX_N {
        wilcoxon_exact(a, b)
    } else {
        wilcoxon_normal(a, b, true)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinTieLoss {
    pub win: usize,
    pub tie: usize,
    pub loss: usize,
}

/// `results[method][dataset]`. Per dataset the methods within `tie_epsilon`
/// of the best value tie if there are several, and win if alone.
pub fn win_tie_loss(results: &[Vec<f64>], tie_epsilon: f64) -> Result<Vec<WinTieLoss>> {
    let datasets = results.first().map_or(0, Vec::len);
    if let Some(bad) = results.iter().find(|r| r.len() != datasets) {
        return Err(Error::LengthMismatch { expected: datasets, actual: bad.len() });
    }
    let mut out = alloc::vec![WinTieLoss::default(); results.len()];
    for d in 0..datasets {
        let best = results.iter().map(|r| r[d]).fold(f64::NEG_INFINITY, f64::max);
        let near: Vec<bool> = results.iter().map(|r| best - r[d] <= tie_epsilon + 1e-12).collect();
        let count = near.iter().filter(|&&b| b).count();
        for (o, &top) in out.iter_mut().zip(&near) {
            match (top, count) {
                (true, 1) => o.win += 1,
                (true, _) => o.tie += 1,
                (false, _) => o.loss += 1,
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn all_positive_five() {
        let r = wilcoxon_exact(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 5]).unwrap();
        assert_eq!((r.w_plus, r.w_minus), (15.0, 0.0));
        assert!((r.p_value - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn identical_and_symmetric() {
        let a = [0.3, 0.5, 0.9];
        assert_eq!(wilcoxon_signed_rank(&a, &a).unwrap().p_value, 1.0);
        let b = [0.1, 0.7, 0.2];
        assert_eq!(wilcoxon_exact(&a, &b).unwrap().p_value, wilcoxon_exact(&b, &a).unwrap().p_value);
        assert!(wilcoxon_exact(&a, &b[..2]).is_err());
    }

    #[test]
    fn ties_get_average_ranks() {
        let r = signed_ranks(&[1.0, -1.0, 3.0, 0.0], &[0.0; 4]).unwrap();
        assert_eq!(r, vec![(1.0, 1.5), (-1.0, 1.5), (3.0, 3.0)]);
    }

    #[test]
    fn win_tie_loss_cases() {
        let wtl = win_tie_loss(&[vec![0.9, 0.8, 0.7], vec![0.8, 0.8, 0.9]], 0.05).unwrap();
        assert_eq!(wtl[0], WinTieLoss { win: 1, tie: 1, loss: 1 });
        assert_eq!(wtl[1], WinTieLoss { win: 1, tie: 1, loss: 1 });
        let single = win_tie_loss(&[vec![0.1, 0.2]], 0.05).unwrap();
        assert_eq!(single[0].win, 2);
        let same = win_tie_loss(&[vec![0.5, 0.6], vec![0.5, 0.6]], 0.05).unwrap();
        assert_eq!(same[0].tie, 2);
    }
}
