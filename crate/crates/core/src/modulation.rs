//! Modulation formats and their fourth-order statistics.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};

const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationPoint {
    pub point: Complex64,
    pub probability: f64,
}

/// A transmitted symbol alphabet together with its excess kurtosis
/// `Φ = E[|X|⁴]/E²[|X|²] − 2`.
///
/// Formats built from a constellation derive Φ from the points; a format
/// without a constellation is either the circular Gaussian (Φ = 0) or a
/// shaped design known only through its kurtosis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationFormat {
    name: String,
    constellation: Option<Vec<ConstellationPoint>>,
    excess_kurtosis: f64,
}

/// Excess kurtosis of a weighted constellation.
pub fn kurtosis_from_constellation(points: &[ConstellationPoint]) -> Result<f64> {
    if points.is_empty() {
        return domain("constellation is empty");
    }
    let mut total = 0.0;
    let mut second = 0.0;
    let mut fourth = 0.0;
    for p in points {
        if !(p.probability >= 0.0) || !p.point.re.is_finite() || !p.point.im.is_finite() {
            return domain("constellation points need finite coordinates and non-negative weights");
        }
        let energy = p.point.norm_sqr();
        total += p.probability;
        second += p.probability * energy;
        fourth += p.probability * energy * energy;
    }
    if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
        return domain(format!("probabilities sum to {total}, expected 1"));
    }
    if second <= 0.0 {
        return domain("constellation has zero second moment");
    }
    Ok(fourth / (second * second) - 2.0)
}

impl ModulationFormat {
    pub fn gaussian() -> Self {
        Self { name: "gaussian".into(), constellation: None, excess_kurtosis: 0.0 }
    }

    pub fn from_constellation(name: impl Into<String>, points: Vec<ConstellationPoint>) -> Result<Self> {
        let excess_kurtosis = kurtosis_from_constellation(&points)?;
        Ok(Self { name: name.into(), constellation: Some(points), excess_kurtosis })
    }

    /// Equiprobable constellation.
    pub fn uniform(name: impl Into<String>, points: &[Complex64]) -> Result<Self> {
        if points.is_empty() {
            return domain("constellation is empty");
        }
        let p = 1.0 / points.len() as f64;
        Self::from_constellation(
            name,
            points.iter().map(|&point| ConstellationPoint { point, probability: p }).collect(),
        )
    }

    /// A format characterized only by its excess kurtosis, e.g. a shaped
    /// design whose point set is not available.
    pub fn with_kurtosis(name: impl Into<String>, excess_kurtosis: f64) -> Result<Self> {
        // Φ ≥ −1 for any distribution, reached by constant-modulus formats.
        if !(excess_kurtosis >= -1.0) || !excess_kurtosis.is_finite() {
            return domain(format!("excess kurtosis must be finite and ≥ -1, got {excess_kurtosis}"));
        }
        Ok(Self { name: name.into(), constellation: None, excess_kurtosis })
    }

    pub fn qpsk() -> Self {
        let pts = [
            Complex64::new(1.0, 1.0),
            Complex64::new(-1.0, 1.0),
            Complex64::new(-1.0, -1.0),
            Complex64::new(1.0, -1.0),
        ];
        Self::uniform("qpsk", &pts).expect("qpsk is a valid constellation")
    }

    /// Uniform square M-QAM, `order` = 4, 16, 64, 256, 1024, ...
    pub fn square_qam(order: usize) -> Result<Self> {
        let points = square_qam_points(order)?;
        Self::uniform(format!("{order}qam"), &points)
    }

    /// Square M-QAM with Maxwell–Boltzmann probabilities `p ∝ exp(-λ|x|²)`,
    /// with `|x|²` measured on the unit-spaced integer lattice.
    pub fn maxwell_boltzmann_qam(order: usize, shaping: f64) -> Result<Self> {
        if !(shaping >= 0.0) {
            return domain("shaping parameter must be non-negative");
        }
        let points = square_qam_points(order)?;
        let weights: Vec<f64> = points.iter().map(|p| (-shaping * p.norm_sqr()).exp()).collect();
        let total: f64 = weights.iter().sum();
        Self::from_constellation(
            format!("mb{order}qam"),
            points
                .iter()
                .zip(&weights)
                .map(|(&point, w)| ConstellationPoint { point, probability: w / total })
                .collect(),
        )
    }

    /// Looks up a named format: `gaussian`, `qpsk`, `<M>qam` / `<M>-qam`.
    pub fn by_name(name: &str) -> Result<Self> {
        let key = name.trim().to_ascii_lowercase().replace(['-', '_', ' '], "");
        match key.as_str() {
            "gaussian" | "gauss" => Ok(Self::gaussian()),
            "qpsk" | "4qam" => Ok(Self::qpsk()),
            _ => match key.strip_suffix("qam").and_then(|m| m.parse::<usize>().ok()) {
                Some(order) => Self::square_qam(order),
                None => domain(format!("unknown modulation format '{name}'")),
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constellation(&self) -> Option<&[ConstellationPoint]> {
        self.constellation.as_deref()
    }

    pub fn excess_kurtosis(&self) -> f64 {
        self.excess_kurtosis
    }

    pub fn is_gaussian(&self) -> bool {
        self.constellation.is_none() && self.excess_kurtosis == 0.0
    }

    /// Builds a unit-power symbol sampler, or `None` when the format has no
    /// point set and is not Gaussian (nothing to draw from).
    pub fn sampler(&self) -> Option<SymbolSampler> {
        if self.is_gaussian() {
            return Some(SymbolSampler::Gaussian);
        }
        let points = self.constellation.as_ref()?;
        let energy: f64 = points.iter().map(|p| p.probability * p.point.norm_sqr()).sum();
        let scale = energy.sqrt().recip();
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(points.len());
        for p in points {
            acc += p.probability;
            cumulative.push(acc);
        }
        Some(SymbolSampler::Discrete {
            points: points.iter().map(|p| p.point * scale).collect(),
            cumulative,
        })
    }
}

fn square_qam_points(order: usize) -> Result<Vec<Complex64>> {
    let side = (order as f64).sqrt().round() as usize;
    if order < 4 || side * side != order {
        return domain(format!("{order}-QAM is not a square constellation"));
    }
    let level = |i: usize| 2.0 * i as f64 - (side as f64 - 1.0);
    let mut points = Vec::with_capacity(order);
    for i in 0..side {
        for q in 0..side {
            points.push(Complex64::new(level(i), level(q)));
        }
    }
    Ok(points)
}

/// Draws unit-average-power symbols.
#[derive(Debug, Clone)]
pub enum SymbolSampler {
    Gaussian,
    Discrete { points: Vec<Complex64>, cumulative: Vec<f64> },
}

impl SymbolSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self {
            SymbolSampler::Gaussian => {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
            SymbolSampler::Discrete { points, cumulative } => {
                let total = *cumulative.last().expect("non-empty constellation");
                let u: f64 = rng.gen::<f64>() * total;
                let idx = cumulative.partition_point(|&c| c <= u).min(points.len() - 1);
                points[idx]
            }
        }
    }
}

/// Sample excess kurtosis of a symbol sequence.
pub fn empirical_kurtosis(symbols: &[Complex64]) -> f64 {
    let n = symbols.len() as f64;
    let (m2, m4) = symbols.iter().fold((0.0, 0.0), |(m2, m4), s| {
        let e = s.norm_sqr();
        (m2 + e, m4 + e * e)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    m4 / (m2 * m2) - 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn named_formats() {
        assert_eq!(ModulationFormat::qpsk().excess_kurtosis(), -1.0);
        assert_eq!(ModulationFormat::gaussian().excess_kurtosis(), 0.0);
        let f = ModulationFormat::by_name("64-QAM").unwrap();
        assert_abs_diff_eq!(f.excess_kurtosis(), -0.6190, epsilon = 5e-5);
        assert!(ModulationFormat::by_name("8psk").is_err());
        assert!(ModulationFormat::square_qam(32).is_err());
    }

    #[test]
    fn rejects_degenerate_constellations() {
        assert!(kurtosis_from_constellation(&[]).is_err());
        let zero = [ConstellationPoint { point: Complex64::new(0.0, 0.0), probability: 1.0 }];
        assert!(kurtosis_from_constellation(&zero).is_err());
        let bad = [ConstellationPoint { point: Complex64::new(1.0, 0.0), probability: 0.5 }];
        assert!(kurtosis_from_constellation(&bad).is_err());
    }

    #[test]
    fn shaping_moves_toward_gaussian() {
        let uniform = ModulationFormat::square_qam(64).unwrap().excess_kurtosis();
        let shaped = ModulationFormat::maxwell_boltzmann_qam(64, 0.05).unwrap().excess_kurtosis();
        assert!(shaped > uniform && shaped < 0.0, "{shaped}");
    }

    #[test]
    fn sampler_matches_constellation_statistics() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let qpsk = ModulationFormat::qpsk().sampler().unwrap();
        let symbols: Vec<_> = (0..1000).map(|_| qpsk.draw(&mut rng)).collect();
        assert_abs_diff_eq!(empirical_kurtosis(&symbols), -1.0, epsilon = 1e-12);
        for s in &symbols {
            assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
        }
        assert!(ModulationFormat::with_kurtosis("ps64", -0.1871).unwrap().sampler().is_none());
    }

    proptest! {
        #[test]
        fn kurtosis_is_rotation_and_scale_invariant(
            scale in 1e-3f64..1e3, angle in 0.0f64..std::f64::consts::TAU, order_idx in 0usize..4
        ) {
            let order = [4usize, 16, 64, 256][order_idx];
            let base = ModulationFormat::square_qam(order).unwrap();
            let rot = Complex64::from_polar(scale, angle);
            let pts: Vec<_> = base.constellation().unwrap().iter()
                .map(|p| ConstellationPoint { point: p.point * rot, probability: p.probability })
                .collect();
            let phi = kurtosis_from_constellation(&pts).unwrap();
            prop_assert!((phi - base.excess_kurtosis()).abs() < 1e-12);
        }
    }
}
