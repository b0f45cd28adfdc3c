//! Robust elliptic envelope over (reaction energy, activation energy).

use alloc::vec::Vec;

pub const PAPER_CONTAMINATION: f64 = 0.00035;
const TRIM_ROUNDS: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvelopeError {
    #[error("need at least 20 points, got {0}")]
    TooFewPoints(usize),
    #[error("contamination must lie in (0, 0.5), got {0}")]
    BadContamination(f64),
    #[error("covariance is singular (collinear or identical points)")]
    DegenerateCovariance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlierEnvelope {
    pub center: [f64; 2],
    pub covariance: [[f64; 2]; 2],
    /// Squared Mahalanobis cutoff; points strictly beyond it are outliers.
    pub threshold: f64,
    pub contamination: f64,
}

impl OutlierEnvelope {
    pub fn squared_distance(&self, p: [f64; 2]) -> f64 {
        mahalanobis2(p, self.center, &inverse(&self.covariance))
    }

    /// Boundary points are inliers.
    pub fn is_outlier(&self, p: [f64; 2]) -> bool {
        self.squared_distance(p) > self.threshold
    }
}

fn mean_cov(points: &[[f64; 2]]) -> ([f64; 2], [[f64; 2]; 2]) {
    let n = points.len() as f64;
    let mut c = [0.0; 2];
    for p in points {
        c[0] += p[0];
        c[1] += p[1];
    }
    c[0] /= n;
    c[1] /= n;
    let mut s = [[0.0; 2]; 2];
    for p in points {
        let d = [p[0] - c[0], p[1] - c[1]];
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] += d[i] * d[j];
            }
        }
    }
    for row in &mut s {
        for v in row {
            *v /= n;
        }
    }
    (c, s)
}

fn inverse(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn degenerate(m: &[[f64; 2]; 2]) -> bool {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m[0][0] + m[1][1];
    !(det.is_finite() && scale > 0.0 && det > 1e-12 * scale * scale)
}

fn mahalanobis2(p: [f64; 2], c: [f64; 2], inv: &[[f64; 2]; 2]) -> f64 {
    let d = [p[0] - c[0], p[1] - c[1]];
    d[0] * (inv[0][0] * d[0] + inv[0][1] * d[1]) + d[1] * (inv[1][0] * d[0] + inv[1][1] * d[1])
}

/// Value at rank ceil(q·n) (1-based) of the sorted sample.
fn upper_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let k = libm::ceil(q * n as f64) as usize;
    sorted[k.clamp(1, n) - 1]
}

/// Repeatedly drops the most distant `contamination` fraction and
/// re-estimates mean and covariance from the rest; the threshold is the
/// empirical (1 − contamination) quantile of squared distances over all
/// training points.
pub fn fit_outlier_envelope(
    points: &[[f64; 2]],
    contamination: f64,
) -> Result<OutlierEnvelope, EnvelopeError> {
    if points.len() < 20 {
        return Err(EnvelopeError::TooFewPoints(points.len()));
    }
    if !(contamination > 0.0 && contamination < 0.5) {
        return Err(EnvelopeError::BadContamination(contamination));
    }
    let (mut center, mut cov) = mean_cov(points);
    if degenerate(&cov) {
        return Err(EnvelopeError::DegenerateCovariance);
    }
    let keep = points.len() - libm::floor(contamination * points.len() as f64) as usize;
    for _ in 0..TRIM_ROUNDS {
        let inv = inverse(&cov);
        let mut ranked: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, &p)| (mahalanobis2(p, center, &inv), i))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let kept: Vec<[f64; 2]> = ranked[..keep].iter().map(|&(_, i)| points[i]).collect();
        let (c, s) = mean_cov(&kept);
        if degenerate(&s) {
            return Err(EnvelopeError::DegenerateCovariance);
        }
        center = c;
        cov = s;
    }
    let inv = inverse(&cov);
    let mut d2: Vec<f64> = points.iter().map(|&p| mahalanobis2(p, center, &inv)).collect();
    d2.sort_by(f64::total_cmp);
    Ok(OutlierEnvelope {
        center,
        covariance: cov,
        threshold: upper_quantile(&d2, 1.0 - contamination),
        contamination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> Vec<[f64; 2]> {
        (0..n)
            .map(|i| {
                let t = i as f64 * 0.7;
                let r = 1.0 + (i % 7) as f64 * 0.1;
                [r * libm::cos(t), 2.0 * r * libm::sin(t)]
            })
            .collect()
    }

    #[test]
    fn errors() {
        assert_eq!(fit_outlier_envelope(&ring(5), 0.01), Err(EnvelopeError::TooFewPoints(5)));
        assert!(matches!(fit_outlier_envelope(&ring(50), 0.0), Err(EnvelopeError::BadContamination(_))));
        let same = alloc::vec![[1.0, 2.0]; 50];
        assert_eq!(fit_outlier_envelope(&same, 0.01), Err(EnvelopeError::DegenerateCovariance));
        let line: Vec<[f64; 2]> = (0..50).map(|i| [i as f64, 2.0 * i as f64]).collect();
        assert_eq!(fit_outlier_envelope(&line, 0.01), Err(EnvelopeError::DegenerateCovariance));
    }

    #[test]
    fn center_and_far_points() {
        let pts = ring(200);
        let env = fit_outlier_envelope(&pts, 0.05).unwrap();
        assert!(!env.is_outlier(env.center));
        let far = pts
            .iter()
            .map(|&p| env.squared_distance(p))
            .fold(0.0, f64::max);
        let scale = libm::sqrt(far) * 10.0;
        let probe = [env.center[0] + scale * libm::sqrt(env.covariance[0][0]), env.center[1]];
        assert!(env.is_outlier(probe));
        let flagged = pts.iter().filter(|&&p| env.is_outlier(p)).count();
        assert!(flagged <= 10);
    }

    #[test]
    fn boundary_is_inlier() {
        let env = OutlierEnvelope {
            center: [0.0, 0.0],
            covariance: [[1.0, 0.0], [0.0, 1.0]],
            threshold: 4.0,
            contamination: 0.01,
        };
        assert!(!env.is_outlier([2.0, 0.0]));
        assert!(env.is_outlier([2.0 + 1e-9, 0.0]));
    }
}
