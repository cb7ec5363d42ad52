//! Random rectangular scenarios and the node-density formula.

use std::f64::consts::PI;

use rand::Rng;

use crate::models::random::stream_rng;
use crate::models::ModelError;
use crate::world::Position;

/// Description of a randomly placed rectangular world.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub count: u64,
    /// Rectangle extent in units of communication range.
    pub width: f64,
    pub height: f64,
    pub seed: u64,
    /// Placement strategy; "uniform" is the only shipped variant.
    pub placement: String,
}

/// Draws `count` positions i.i.d. uniform from [0, width] x [0, height],
/// z = 0, from the ("placement", seed) stream. The same `ScenarioSpec`
/// always yields the same positions.
pub fn generate_rect_world(spec: &ScenarioSpec) -> Result<Vec<Position>, ModelError> {
    if spec.count == 0 {
        return Err(ModelError::InvalidParameter {
            key: "count".to_string(),
            reason: "must be positive".to_string(),
        });
    }
    for (key, value) in [("width", spec.width), ("height", spec.height)] {
        if !value.is_finite() || value <= 0.0 {
            return Err(ModelError::InvalidParameter {
                key: key.to_string(),
                reason: format!("must be a positive finite number, got {value}"),
            });
        }
    }
    if spec.placement != "uniform" {
        return Err(ModelError::InvalidParameter {
            key: "placement".to_string(),
            reason: format!("unknown placement {:?}", spec.placement),
        });
    }
    let mut rng = stream_rng(spec.seed, "placement");
    let mut positions = Vec::with_capacity(spec.count as usize);
    for _ in 0..spec.count {
        let x = rng.random_range(0.0..=spec.width);
        let y = rng.random_range(0.0..=spec.height);
        positions.push(Position::planar(x, y));
    }
    Ok(positions)
}

/// Average number of nodes within one broadcast disk:
/// `count * pi * range^2 / (width * height)`.
pub fn density(count: u64, width: f64, height: f64, range: f64) -> f64 {
    count as f64 * PI * range * range / (width * height)
}
