//! Network topology and geometry.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{PolarError, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space power gain `λ² / (4πd)²` between two points `distance` apart.
pub fn free_space_gain(distance: f64, wavelength: f64) -> Result<f64> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(PolarError::Domain(format!(
            "distance must be positive and finite, got {distance}"
        )));
    }
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(PolarError::Domain(format!(
            "wavelength must be positive and finite, got {wavelength}"
        )));
    }
    let ratio = wavelength / (4.0 * PI * distance);
    Ok(ratio * ratio)
}

/// Number of repeaters in each layer, ordered from the base station side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LayerSizes(Vec<usize>);

impl LayerSizes {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(PolarError::Domain(
                "a network needs at least one layer".into(),
            ));
        }
        if let Some(pos) = sizes.iter().position(|&m| m == 0) {
            return Err(PolarError::Domain(format!("layer {pos} has no repeaters")));
        }
        Ok(Self(sizes))
    }

    /// Number of repeater layers `n`.
    pub fn layers(&self) -> usize {
        self.0.len()
    }

    pub fn size(&self, layer: usize) -> usize {
        self.0[layer]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn total_repeaters(&self) -> usize {
        self.0.iter().sum()
    }

    /// Number of one-repeater-per-layer paths, `m_1 ⋯ m_n`, saturating.
    pub fn path_count(&self) -> u128 {
        self.0
            .iter()
            .fold(1u128, |acc, &m| acc.saturating_mul(m as u128))
    }
}

impl TryFrom<Vec<usize>> for LayerSizes {
    type Error = PolarError;

    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        Self::new(sizes)
    }
}

impl From<LayerSizes> for Vec<usize> {
    fn from(sizes: LayerSizes) -> Self {
        sizes.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Planar placement of the base station, every repeater, and the user.
///
/// Nodes are stored by level: level 0 is the base station, levels `1..=n`
/// are the repeater layers and level `n + 1` is the user.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGeometry {
    layer_sizes: LayerSizes,
    interlayer_spacing: f64,
    intralayer_spacing: f64,
    wavelength: f64,
    levels: Vec<Vec<Point>>,
}

impl NetworkGeometry {
    pub fn layer_sizes(&self) -> &LayerSizes {
        &self.layer_sizes
    }

    pub fn interlayer_spacing(&self) -> f64 {
        self.interlayer_spacing
    }

    pub fn intralayer_spacing(&self) -> f64 {
        self.intralayer_spacing
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn base_station(&self) -> Point {
        self.levels[0][0]
    }

    pub fn user(&self) -> Point {
        self.levels[self.levels.len() - 1][0]
    }

    /// Repeater positions of the 0-based repeater layer `layer`.
    pub fn repeaters(&self, layer: usize) -> &[Point] {
        &self.levels[layer + 1]
    }

    /// All node positions by level, base station first and user last.
    pub fn node_positions(&self) -> &[Vec<Point>] {
        &self.levels
    }

    #[cfg(test)]
    pub(crate) fn from_levels_for_tests(template: &Self, levels: Vec<Vec<Point>>) -> Self {
        Self {
            levels,
            ..template.clone()
        }
    }
}

/// Places the network on a grid along the x axis.
///
/// Repeater layer `i` (1-based) sits at `x = i · interlayer`, its repeaters
/// spaced `intralayer` apart and centred on the axis. The base station is at
/// the origin and the user at `x = (n + 1) · interlayer`.
pub fn build_grid_geometry(
    layer_sizes: LayerSizes,
    interlayer: f64,
    intralayer: f64,
    carrier_frequency: f64,
) -> Result<NetworkGeometry> {
    for (name, value) in [
        ("interlayer spacing", interlayer),
        ("intralayer spacing", intralayer),
        ("carrier frequency", carrier_frequency),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(PolarError::Domain(format!(
                "{name} must be positive and finite, got {value}"
            )));
        }
    }

    let n = layer_sizes.layers();
    let mut levels = Vec::with_capacity(n + 2);
    levels.push(vec![Point::new(0.0, 0.0)]);
    for (i, &m) in layer_sizes.as_slice().iter().enumerate() {
        let x = (i + 1) as f64 * interlayer;
        let centre = (m as f64 - 1.0) / 2.0;
        levels.push(
            (0..m)
                .map(|j| Point::new(x, (j as f64 - centre) * intralayer))
                .collect(),
        );
    }
    levels.push(vec![Point::new((n + 1) as f64 * interlayer, 0.0)]);

    Ok(NetworkGeometry {
        layer_sizes,
        interlayer_spacing: interlayer,
        intralayer_spacing: intralayer,
        wavelength: SPEED_OF_LIGHT / carrier_frequency,
        levels,
    })
}
