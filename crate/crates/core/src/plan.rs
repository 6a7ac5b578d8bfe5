//! Span count, SPM coherence exponent and ASE loading.

use crate::error::{domain, Result};
use crate::fiber::FiberSpec;
use crate::grid::ChannelGrid;
use crate::units::{db_to_linear, PLANCK};

/// Accumulated ASE power per channel at the receiver.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum AseModel {
    /// Noiseless amplifiers.
    #[default]
    None,
    /// Same `P_ASE` (W) for every channel.
    Uniform(f64),
    /// One `P_ASE` (W) per channel, e.g. to model gain-equalization penalties.
    PerChannel(Vec<f64>),
    /// Lumped amplifiers exactly compensating each span loss `e^{αL}`:
    /// `P_ASE = n·NF·hν·G·B_i`.
    Amplifier { noise_figure_db: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkPlan {
    span_count: usize,
    coherence_exponent: f64,
    ase: AseModel,
}

impl LinkPlan {
    pub fn new(span_count: usize) -> Result<Self> {
        if span_count == 0 {
            return domain("span count must be at least 1");
        }
        Ok(Self { span_count, coherence_exponent: 0.0, ase: AseModel::None })
    }

    pub fn with_coherence_exponent(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return domain(format!("coherence exponent must be finite and ≥ 0, got {epsilon}"));
        }
        self.coherence_exponent = epsilon;
        Ok(self)
    }

    pub fn with_ase(mut self, ase: AseModel) -> Result<Self> {
        match &ase {
            AseModel::Uniform(p) if !(*p >= 0.0) => return domain("ASE power must be ≥ 0"),
            AseModel::PerChannel(v) if v.iter().any(|p| !(*p >= 0.0)) => {
                return domain("ASE power must be ≥ 0")
            }
            AseModel::Amplifier { noise_figure_db } if !noise_figure_db.is_finite() => {
                return domain("noise figure must be finite")
            }
            _ => {}
        }
        self.ase = ase;
        Ok(self)
    }

    pub fn with_span_count(&self, span_count: usize) -> Result<Self> {
        let mut out = Self::new(span_count)?;
        out.coherence_exponent = self.coherence_exponent;
        out.ase = self.ase.clone();
        Ok(out)
    }

    pub fn span_count(&self) -> usize {
        self.span_count
    }

    /// `ñ`: zero for a single span, `n` otherwise.
    pub fn effective_span_count(&self) -> usize {
        if self.span_count == 1 {
            0
        } else {
            self.span_count
        }
    }

    pub fn coherence_exponent(&self) -> f64 {
        self.coherence_exponent
    }

    pub fn ase(&self) -> &AseModel {
        &self.ase
    }

    /// ASE power at the receiver for channel `index`.
    pub fn ase_power(&self, grid: &ChannelGrid, fiber: &FiberSpec, index: usize) -> Result<f64> {
        match &self.ase {
            AseModel::None => Ok(0.0),
            AseModel::Uniform(p) => Ok(*p),
            AseModel::PerChannel(v) => match v.get(index) {
                Some(p) => Ok(*p),
                None => domain(format!(
                    "per-channel ASE list has {} entries, grid has {} channels",
                    v.len(),
                    grid.len()
                )),
            },
            AseModel::Amplifier { noise_figure_db } => {
                let ch = grid.channel(index);
                let nu = grid.reference_frequency() + ch.center_freq;
                let gain = (fiber.attenuation() * fiber.span_length()).exp();
                Ok(self.span_count as f64 * db_to_linear(*noise_figure_db) * PLANCK * nu * gain * ch.bandwidth)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::ModulationFormat;
    use approx::assert_relative_eq;

    #[test]
    fn effective_span_count() {
        assert_eq!(LinkPlan::new(1).unwrap().effective_span_count(), 0);
        assert_eq!(LinkPlan::new(2).unwrap().effective_span_count(), 2);
        assert_eq!(LinkPlan::new(100).unwrap().effective_span_count(), 100);
        assert!(LinkPlan::new(0).is_err());
    }

    #[test]
    fn rejects_negative_epsilon_and_ase() {
        assert!(LinkPlan::new(3).unwrap().with_coherence_exponent(-0.1).is_err());
        assert!(LinkPlan::new(3).unwrap().with_ase(AseModel::Uniform(-1.0)).is_err());
    }

    #[test]
    fn amplifier_ase_scale() {
        let grid = ChannelGrid::uniform(1, 50e9, 40e9, 1e-3, ModulationFormat::gaussian(), 1550e-9).unwrap();
        let fiber = FiberSpec::standard_smf();
        let plan = LinkPlan::new(10).unwrap().with_ase(AseModel::Amplifier { noise_figure_db: 5.0 }).unwrap();
        let p = plan.ase_power(&grid, &fiber, 0).unwrap();
        // 20 dB span loss, 5 dB NF, 10 spans, hν·B ≈ 5.13e-9 W.
        let expected = 10.0 * 10f64.powf(0.5) * 100.0 * PLANCK * grid.reference_frequency() * 40e9;
        assert_relative_eq!(p, expected, max_relative = 1e-12);
        assert!((p - 1.6e-5).abs() / 1.6e-5 < 0.05, "{p}");
    }
}
