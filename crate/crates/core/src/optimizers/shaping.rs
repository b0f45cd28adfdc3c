//! Sigmoid score shaping relative to a set of known fitness values.

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ShapeError {
    #[error("need at least two known fitness values")]
    TooFew,
    #[error("maximum equals mean; the slope is undefined")]
    DegenerateSet,
}

/// `S(f) = 2 / (1 + exp(−b (f − a))) − 1` with `a` the mean of the known
/// set and `b` chosen so that `S(max) = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreShaper {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub const DEFAULT_THRESHOLD: f64 = 0.8;

impl ScoreShaper {
    pub fn fit(known: &[f64], c: f64) -> Result<ScoreShaper, ShapeError> {
        if known.len() < 2 {
            return Err(ShapeError::TooFew);
        }
        let a = known.iter().sum::<f64>() / known.len() as f64;
        let max = known.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(max > a) {
            return Err(ShapeError::DegenerateSet);
        }
        let b = -(1.0 / (max - a)) * libm::log(2.0 / (c + 1.0) - 1.0);
        Ok(ScoreShaper { a, b, c })
    }

    pub fn shape(&self, f: f64) -> f64 {
        2.0 / (1.0 + libm::exp(-self.b * (f - self.a))) - 1.0
    }
}

pub fn shape_score(f: f64, known: &[f64]) -> Result<f64, ShapeError> {
    Ok(ScoreShaper::fit(known, DEFAULT_THRESHOLD)?.shape(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors() {
        let known = [1.0, 2.0, 3.0, 6.0];
        let s = ScoreShaper::fit(&known, 0.8).unwrap();
        assert!(s.shape(3.0).abs() < 1e-12);
        assert!((s.shape(6.0) - 0.8).abs() < 1e-12);
        assert!((s.shape(-1e6) + 1.0).abs() < 1e-12);
        assert_eq!(ScoreShaper::fit(&[1.0], 0.8), Err(ShapeError::TooFew));
        assert_eq!(ScoreShaper::fit(&[2.0, 2.0], 0.8), Err(ShapeError::DegenerateSet));
    }
}
