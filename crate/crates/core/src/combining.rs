//! Linear fusion of per-antenna statistics and the combined-statistic
//! threshold.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{combined_moments, min_ber_multi};
use crate::detection::gaussian_intersection;
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;
const MAX_GRID_POINTS: f64 = 1e7;

/// Nonnegative weights with unit sum of squares.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerWeights {
    theta: Vec<f64>,
}

impl CombinerWeights {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::Dimension("no combiner weights".into()));
        }
        if theta.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::Weights(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let s: f64 = theta.iter().map(|t| t * t).sum();
        if (s - 1.0).abs() > NORM_TOL {
            return Err(Error::Weights(format!(
                "sum of squared weights is {s}, not 1"
            )));
        }
        Ok(Self { theta })
    }

    /// Scales a nonnegative, nonzero vector onto the unit sphere.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let norm = raw.iter().map(|t| t * t).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Weights("cannot normalise a zero vector".into()));
        }
        Self::new(raw.into_iter().map(|t| t / norm).collect())
    }

    pub fn single() -> Self {
        Self { theta: vec![1.0] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinerScheme {
    Optimal,
    Mrc,
    Egc,
    Sc,
}

impl fmt::Display for CombinerScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Optimal => "optimal",
            Self::Mrc => "mrc",
            Self::Egc => "egc",
            Self::Sc => "sc",
        })
    }
}

impl FromStr for CombinerScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "optimal" => Ok(Self::Optimal),
            "mrc" => Ok(Self::Mrc),
            "egc" => Ok(Self::Egc),
            "sc" => Ok(Self::Sc),
            _ => Err(Error::Parse(format!("unknown combiner '{s}'"))),
        }
    }
}

/// `sum theta_m R_m`.
pub fn combine_statistics(r: &[f64], theta: &CombinerWeights) -> Result<f64> {
    if r.len() != theta.len() {
        return Err(Error::Dimension(format!(
            "{} statistics for {} weights",
            r.len(),
            theta.len()
        )));
    }
    Ok(r.iter().zip(theta.as_slice()).map(|(r, t)| r * t).sum())
}

/// SNR-driven weights. `Optimal` is not a conventional scheme and is
/// rejected; use [`optimal_weights`].
pub fn conventional_weights(scheme: CombinerScheme, gamma: &[f64]) -> Result<CombinerWeights> {
    if gamma.is_empty() {
        return Err(Error::Dimension("no antennas".into()));
    }
    if gamma.iter().any(|&g| !(g >= 0.0)) {
        return Err(Error::Domain("SNRs must be nonnegative".into()));
    }
    let m = gamma.len();
    let egc = || CombinerWeights::new(vec![1.0 / (m as f64).sqrt(); m]);
    match scheme {
        CombinerScheme::Egc => egc(),
        CombinerScheme::Mrc => {
            if gamma.iter().all(|&g| g == 0.0) {
                egc()
            } else {
                CombinerWeights::normalized(gamma.to_vec())
            }
        }
        CombinerScheme::Sc => {
            let mut best = 0;
            for (i, &g) in gamma.iter().enumerate() {
                if g > gamma[best] {
                    best = i;
                }
            }
            let mut theta = vec![0.0; m];
            theta[best] = 1.0;
            CombinerWeights::new(theta)
        }
        CombinerScheme::Optimal => Err(Error::Config(
            "optimal weights need a numerical search".into(),
        )),
    }
}

/// Threshold of the combined statistic at which the two conditional
/// Gaussians `N(mu0, sum theta^2 / J)` and `N(mu1, sigma1^2)` intersect
/// above `mu0`.
///
/// The quadratic is written in terms of the variance ratio
/// `C = J sigma1^2 = 1 + sum theta^2 gamma (gamma + 2)`, so `C = 1` (all
/// `gamma` zero) is the only degenerate case; there the hypotheses are
/// identical and the midpoint `mu0` is returned.
pub fn multiantenna_threshold(theta: &CombinerWeights, gamma: &[f64], j: usize) -> Result<f64> {
    if gamma.len() != theta.len() {
        return Err(Error::Dimension(format!(
            "{} SNRs for {} weights",
            gamma.len(),
            theta.len()
        )));
    }
    let m = combined_moments(theta.as_slice(), gamma, j);
    let a: f64 = theta
        .as_slice()
        .iter()
        .zip(gamma)
        .map(|(t, g)| t * t * g * (g + 2.0))
        .sum();
    Ok(gaussian_intersection(m.mu0, m.mu1, a, m.var1))
}

fn angles_to_weights(phi: &[f64]) -> Vec<f64> {
    let mut theta = Vec::with_capacity(phi.len() + 1);
    let mut s = 1.0;
    for &p in phi {
        theta.push(s * p.cos());
        s *= p.sin();
    }
    theta.push(s);
    theta.iter().map(|t| t.max(0.0)).collect()
}

fn objective(phi: &[f64], gamma: &[f64], j: usize) -> (f64, Vec<f64>) {
    let raw = angles_to_weights(phi);
    match CombinerWeights::normalized(raw.clone()) {
        Ok(w) => (
            min_ber_multi(&w, gamma, j)
                .map(|b| b.p_e)
                .unwrap_or(f64::INFINITY),
            w.theta,
        ),
        Err(_) => (f64::INFINITY, raw),
    }
}

/// Scans a box of angles; the first minimum wins.
fn scan(lo: &[f64], hi: &[f64], n: usize, gamma: &[f64], j: usize) -> (f64, Vec<f64>) {
    let dims = lo.len();
    let mut idx = vec![0usize; dims];
    let mut phi = vec![0.0; dims];
    let mut best = (f64::INFINITY, lo.to_vec());
    loop {
        for d in 0..dims {
            phi[d] = if n == 1 {
                lo[d]
            } else {
                lo[d] + (hi[d] - lo[d]) * idx[d] as f64 / (n - 1) as f64
            };
        }
        let (v, _) = objective(&phi, gamma, j);
        if v < best.0 {
            best = (v, phi.clone());
        }
        let mut d = 0;
        loop {
            if d == dims {
                return best;
            }
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Minimum-BER weights by grid search over the spherical angles of the
/// nonnegative orthant.
///
/// Each of the `M - 1` angles spans `[0, pi/2]` at `grid_step` radians. If
/// the full grid would exceed 1e7 points, a coarse grid is refined around
/// its best point until the step reaches `grid_step`.
pub fn optimal_weights(gamma: &[f64], j: usize, grid_step: f64) -> Result<CombinerWeights> {
    if gamma.is_empty() {
        return Err(Error::Dimension("no antennas".into()));
    }
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::Domain("grid step must lie in (0, 1]".into()));
    }
    if gamma.iter().any(|&g| !(g >= 0.0)) {
        return Err(Error::Domain("SNRs must be nonnegative".into()));
    }
    let dims = gamma.len() - 1;
    if dims == 0 {
        return Ok(CombinerWeights::single());
    }
    let full = (FRAC_PI_2 / grid_step).ceil() as usize + 1;
    let mut lo = vec![0.0; dims];
    let mut hi = vec![FRAC_PI_2; dims];
    let best = if (full as f64).powi(dims as i32) <= MAX_GRID_POINTS {
        scan(&lo, &hi, full, gamma, j)
    } else {
        let n = (MAX_GRID_POINTS.powf(1.0 / dims as f64).floor() as usize).clamp(3, full);
        let n = n.min(((1e5f64).powf(1.0 / dims as f64).floor() as usize).max(5));
        let mut best = scan(&lo, &hi, n, gamma, j);
        let mut step = FRAC_PI_2 / (n - 1) as f64;
        while step > grid_step {
            for d in 0..dims {
                lo[d] = (best.1[d] - step).max(0.0);
                hi[d] = (best.1[d] + step).min(FRAC_PI_2);
            }
            let cand = scan(&lo, &hi, n, gamma, j);
            if cand.0 < best.0 {
                best = cand;
            }
            step = 2.0 * step / (n - 1) as f64;
        }
        best
    };
    CombinerWeights::normalized(angles_to_weights(&best.1))
}

/// Weights for any scheme; `grid_step` is used only by `Optimal`.
pub fn weights_for(
    scheme: CombinerScheme,
    gamma: &[f64],
    j: usize,
    grid_step: f64,
) -> Result<CombinerWeights> {
    match scheme {
        CombinerScheme::Optimal => optimal_weights(gamma, j, grid_step),
        s => conventional_weights(s, gamma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn weight_validation() {
        assert!(CombinerWeights::new(vec![1.0, 1.0]).is_err());
        assert!(CombinerWeights::new(vec![-1.0]).is_err());
        assert!(CombinerWeights::new(vec![]).is_err());
        assert!(CombinerWeights::new(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]).is_ok());
    }

    #[test]
    fn combine() {
        let w = CombinerWeights::new(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let r = combine_statistics(&[1.0, 3.0], &w).unwrap();
        assert!((r - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(
            combine_statistics(&[5.0], &CombinerWeights::single()).unwrap(),
            5.0
        );
        assert!(combine_statistics(&[1.0], &w).is_err());
    }

    #[test]
    fn conventional() {
        let egc = conventional_weights(CombinerScheme::Egc, &[0.3, 9.0]).unwrap();
        assert!(egc
            .as_slice()
            .iter()
            .all(|t| (t - FRAC_1_SQRT_2).abs() < 1e-15));
        let sc = conventional_weights(CombinerScheme::Sc, &[0.5, 2.0]).unwrap();
        assert_eq!(sc.as_slice(), &[0.0, 1.0]);
        let sc = conventional_weights(CombinerScheme::Sc, &[2.0, 2.0]).unwrap();
        assert_eq!(sc.as_slice(), &[1.0, 0.0]);
        let mrc = conventional_weights(CombinerScheme::Mrc, &[1.0, 1.0]).unwrap();
        assert!((mrc.as_slice()[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        let mrc = conventional_weights(CombinerScheme::Mrc, &[0.0, 0.0]).unwrap();
        assert_eq!(mrc, egc);
        assert!(conventional_weights(CombinerScheme::Egc, &[]).is_err());
    }

    #[test]
    fn degenerate_threshold_is_mean() {
        let w = CombinerWeights::new(vec![0.6, 0.8]).unwrap();
        let t = multiantenna_threshold(&w, &[0.0, 0.0], 59).unwrap();
        assert!((t - 1.4).abs() < 1e-15);
    }

    #[test]
    fn single_antenna_reduction() {
        for &g in &[1e-8, 1e-3, 0.5, 3.0, 1e4] {
            let a = multiantenna_threshold(&CombinerWeights::single(), &[g], 59).unwrap();
            let b = crate::detection::optimal_threshold(g, 59);
            assert!((a - b).abs() < 1e-9, "g={g}: {a} vs {b}");
        }
    }

    #[test]
    fn optimal_symmetric() {
        let w = optimal_weights(&[5.0, 5.0], 59, 0.001).unwrap();
        assert!((w.as_slice()[0] - FRAC_1_SQRT_2).abs() < 1e-3);
        assert_eq!(
            optimal_weights(&[5.0], 59, 0.001).unwrap().as_slice(),
            &[1.0]
        );
    }

    #[test]
    fn optimal_three_antennas_beats_conventional() {
        let g = [4.0, 1.0, 0.2];
        let w = optimal_weights(&g, 59, 0.01).unwrap();
        let best = min_ber_multi(&w, &g, 59).unwrap().p_e;
        for s in [CombinerScheme::Mrc, CombinerScheme::Egc, CombinerScheme::Sc] {
            let c = conventional_weights(s, &g).unwrap();
            assert!(best <= min_ber_multi(&c, &g, 59).unwrap().p_e * (1.0 + 1e-9));
        }
    }
}
