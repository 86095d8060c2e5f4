use super::GeometryError;
use serde::{Deserialize, Serialize};

/// Allowed range for a single printed layer height, mm.
pub const LAYER_HEIGHT_RANGE: (f64, f64) = (0.1, 1.0);

/// Four printed layers, listed top, upper mid, lower mid, bottom.
///
/// Only the outer two carry conductors; the mids insulate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stackup {
    pub layer_heights: [f64; 4],
}

impl Stackup {
    pub fn new(layer_heights: [f64; 4]) -> Result<Self, GeometryError> {
        let s = Self { layer_heights };
        s.validate()?;
        Ok(s)
    }

    pub fn uniform(height: f64) -> Self {
        Self {
            layer_heights: [height; 4],
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let (lo, hi) = LAYER_HEIGHT_RANGE;
        for (i, h) in self.layer_heights.iter().enumerate() {
            if !(*h >= lo && *h <= hi) {
                return Err(GeometryError::Stackup(format!(
                    "layer {i} height {h} mm outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn top(&self) -> f64 {
        self.layer_heights[0]
    }

    pub fn bottom(&self) -> f64 {
        self.layer_heights[3]
    }

    /// Total board depth `d`.
    pub fn depth(&self) -> f64 {
        self.layer_heights.iter().sum()
    }
}
