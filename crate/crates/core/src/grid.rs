//! The WDM comb.

use crate::error::{domain, Result};
use crate::modulation::ModulationFormat;
use crate::units::{sinhc, wavelength_to_frequency};

/// One WDM channel. Frequencies are offsets from the reference carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub center_freq: f64,
    pub bandwidth: f64,
    pub launch_power: f64,
    pub modulation: ModulationFormat,
}

impl Channel {
    pub fn lower_edge(&self) -> f64 {
        self.center_freq - 0.5 * self.bandwidth
    }

    pub fn upper_edge(&self) -> f64 {
        self.center_freq + 0.5 * self.bandwidth
    }
}

/// Channels ordered by center frequency, pairwise non-overlapping, with a
/// flat power spectral density `P_i/B_i` over each channel band.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGrid {
    channels: Vec<Channel>,
    reference_wavelength: f64,
    total_power: f64,
}

impl ChannelGrid {
    pub fn new(channels: Vec<Channel>, reference_wavelength: f64) -> Result<Self> {
        if channels.is_empty() {
            return domain("grid has no channels");
        }
        if !(reference_wavelength > 0.0) {
            return domain("reference wavelength must be positive");
        }
        for (i, ch) in channels.iter().enumerate() {
            if !(ch.bandwidth > 0.0) || !ch.bandwidth.is_finite() {
                return domain(format!("channel {i}: bandwidth must be positive"));
            }
            if !(ch.launch_power > 0.0) || !ch.launch_power.is_finite() {
                return domain(format!("channel {i}: launch power must be positive"));
            }
            if !ch.center_freq.is_finite() {
                return domain(format!("channel {i}: center frequency is not finite"));
            }
        }
        for (i, pair) in channels.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if b.center_freq <= a.center_freq {
                return domain(format!("channels {i} and {} are not ordered by frequency", i + 1));
            }
            // Ordering makes adjacent checks sufficient.
            let gap = b.center_freq - a.center_freq;
            let need = 0.5 * (a.bandwidth + b.bandwidth);
            if gap < need * (1.0 - 1e-12) {
                return domain(format!(
                    "channels {i} and {} overlap: spacing {gap} Hz < {need} Hz",
                    i + 1
                ));
            }
        }
        let total_power = channels.iter().map(|c| c.launch_power).sum();
        Ok(Self { channels, reference_wavelength, total_power })
    }

    /// `count` equally spaced, identical channels centered on the reference carrier.
    pub fn uniform(
        count: usize,
        spacing: f64,
        bandwidth: f64,
        launch_power: f64,
        modulation: ModulationFormat,
        reference_wavelength: f64,
    ) -> Result<Self> {
        let mid = (count as f64 - 1.0) / 2.0;
        let channels = (0..count)
            .map(|i| Channel {
                center_freq: (i as f64 - mid) * spacing,
                bandwidth,
                launch_power,
                modulation: modulation.clone(),
            })
            .collect();
        Self::new(channels, reference_wavelength)
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> &Channel {
        &self.channels[index]
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn reference_wavelength(&self) -> f64 {
        self.reference_wavelength
    }

    pub fn reference_frequency(&self) -> f64 {
        wavelength_to_frequency(self.reference_wavelength)
    }

    /// Distance between the outermost channel edges.
    pub fn optical_bandwidth(&self) -> f64 {
        let first = self.channels.first().expect("non-empty");
        let last = self.channels.last().expect("non-empty");
        last.upper_edge() - first.lower_edge()
    }

    /// Index of the channel closest to `freq`.
    pub fn nearest_channel(&self, freq: f64) -> usize {
        let mut best = 0;
        for (i, ch) in self.channels.iter().enumerate() {
            if (ch.center_freq - freq).abs() < (self.channels[best].center_freq - freq).abs() {
                best = i;
            }
        }
        best
    }

    /// `∫ G_Tx(ν) e^{-xν} dν / P_tot` for the flat-per-channel spectrum.
    pub fn spectrum_normalization(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 1.0;
        }
        self.channels
            .iter()
            .map(|c| c.launch_power * (-x * c.center_freq).exp() * sinhc(0.5 * x * c.bandwidth))
            .sum::<f64>()
            / self.total_power
    }

    /// Replaces every channel's format via `f(index, channel)`.
    pub fn map_formats(&self, mut f: impl FnMut(usize, &Channel) -> ModulationFormat) -> Self {
        let mut out = self.clone();
        for (i, ch) in out.channels.iter_mut().enumerate() {
            ch.modulation = f(i, &self.channels[i]);
        }
        out
    }

    /// Scales every launch power by `factor` (> 0).
    pub fn scale_power(&self, factor: f64) -> Result<Self> {
        let channels = self
            .channels
            .iter()
            .map(|c| Channel { launch_power: c.launch_power * factor, ..c.clone() })
            .collect();
        Self::new(channels, self.reference_wavelength)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ch(f: f64, b: f64) -> Channel {
        Channel { center_freq: f, bandwidth: b, launch_power: 1e-3, modulation: ModulationFormat::gaussian() }
    }

    #[test]
    fn validates_invariants() {
        assert!(ChannelGrid::new(vec![ch(0.0, 10.0), ch(9.0, 10.0)], 1550e-9).is_err());
        assert!(ChannelGrid::new(vec![ch(10.0, 10.0), ch(0.0, 10.0)], 1550e-9).is_err());
        assert!(ChannelGrid::new(vec![ch(0.0, 0.0)], 1550e-9).is_err());
        assert!(ChannelGrid::new(vec![], 1550e-9).is_err());
        let mut zero_power = ch(0.0, 1.0);
        zero_power.launch_power = 0.0;
        assert!(ChannelGrid::new(vec![zero_power], 1550e-9).is_err());
        assert!(ChannelGrid::new(vec![ch(0.0, 10.0), ch(10.0, 10.0)], 1550e-9).is_ok());
    }

    #[test]
    fn uniform_grid_totals() {
        let g = ChannelGrid::uniform(251, 40.005e9, 40.004e9, 1e-3, ModulationFormat::gaussian(), 1550e-9)
            .unwrap();
        assert_relative_eq!(g.total_power(), 0.251, max_relative = 1e-12);
        assert_relative_eq!(g.channel(125).center_freq, 0.0);
        assert_relative_eq!(g.optical_bandwidth(), 250.0 * 40.005e9 + 40.004e9, max_relative = 1e-12);
        assert_eq!(g.nearest_channel(-4.0e12), 25);
    }

    #[test]
    fn normalization_matches_direct_integration() {
        let g = ChannelGrid::uniform(5, 50e9, 40e9, 2e-3, ModulationFormat::gaussian(), 1550e-9).unwrap();
        let x = 3e-12;
        // Midpoint rule over each flat band.
        let mut acc = 0.0;
        for c in g.channels() {
            let n = 20_000;
            let h = c.bandwidth / n as f64;
            for j in 0..n {
                let nu = c.lower_edge() + (j as f64 + 0.5) * h;
                acc += c.launch_power / c.bandwidth * (-x * nu).exp() * h;
            }
        }
        assert_relative_eq!(g.spectrum_normalization(x), acc / g.total_power(), max_relative = 1e-9);
    }
}
