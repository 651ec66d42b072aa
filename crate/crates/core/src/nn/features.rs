use crate::env::PlanningState;
use crate::traffic::VehicleState;

pub const EGO_FEATURES: usize = 6;
pub const NEIGHBOR_FEATURES: usize = 7;
/// Neighbor slots on each side of the ego.
pub const SLOTS_PER_SIDE: usize = 4;
pub const FEATURE_LEN: usize = EGO_FEATURES + 2 * SLOTS_PER_SIDE * NEIGHBOR_FEATURES;

pub type FeatureVector = [f64; FEATURE_LEN];

/// Filler for an empty neighbor slot: twice the visibility range ahead, at rest.
pub const VIRTUAL_NEIGHBOR: [f64; NEIGHBOR_FEATURES] = [100.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];

fn neighbor_block(ego: &VehicleState, nb: &VehicleState) -> [f64; NEIGHBOR_FEATURES] {
    [
        nb.px - ego.px,
        nb.py - ego.py,
        nb.vx,
        nb.vy,
        nb.width,
        nb.length,
        nb.desired_speed,
    ]
}

/// Ego block, then four front slots and four back slots, each side nearest
/// first. The ego's longitudinal position is not included.
pub fn vectorize_state(s: &PlanningState) -> FeatureVector {
    let ego = &s.ego;
    let mut out = [0.0; FEATURE_LEN];
    out[..EGO_FEATURES].copy_from_slice(&[
        ego.py,
        ego.vx,
        ego.vy,
        ego.width,
        ego.length,
        ego.desired_speed,
    ]);

    let (mut front, mut back): (Vec<&VehicleState>, Vec<&VehicleState>) =
        s.neighbors.iter().partition(|nb| nb.px - ego.px >= 0.0);
    for group in [&mut front, &mut back] {
        group.sort_by(|a, b| {
            (a.px - ego.px)
                .abs()
                .total_cmp(&(b.px - ego.px).abs())
                .then(a.id.cmp(&b.id))
        });
    }

    for (side, group) in [front, back].iter().enumerate() {
        for slot in 0..SLOTS_PER_SIDE {
            let start = EGO_FEATURES + (side * SLOTS_PER_SIDE + slot) * NEIGHBOR_FEATURES;
            let block = group
                .get(slot)
                .map_or(VIRTUAL_NEIGHBOR, |nb| neighbor_block(ego, nb));
            out[start..start + NEIGHBOR_FEATURES].copy_from_slice(&block);
        }
    }
    out
}

/// Fixed per-feature divisors used when input scaling is switched on: road
/// width for lateral quantities, 35 m/s for speeds, 5 m/s for lateral speed,
/// the 100 m virtual offset for longitudinal gaps, 5 m for footprints.
pub fn feature_scale() -> FeatureVector {
    let mut scale = [1.0; FEATURE_LEN];
    scale[..EGO_FEATURES].copy_from_slice(&[10.2, 35.0, 5.0, 5.0, 5.0, 35.0]);
    for block in 0..2 * SLOTS_PER_SIDE {
        let start = EGO_FEATURES + block * NEIGHBOR_FEATURES;
        scale[start..start + NEIGHBOR_FEATURES]
            .copy_from_slice(&[100.0, 10.2, 35.0, 5.0, 5.0, 5.0, 35.0]);
    }
    scale
}
