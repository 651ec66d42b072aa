use crate::env::PlanningState;
use crate::error::{Error, Result};
use crate::mcts::{simulate_transition, Dynamics};
use crate::nn::{vectorize_state, FeatureVector, MlpModel};
use crate::traffic::{ActionIndex, NUM_ACTIONS};

/// Deepest table the enumeration will build (813 616 states).
const MAX_LEVELS: u32 = 5;

/// Nodes in a complete 15-ary tree with `levels` levels: 1, 16, 241, 3616, …
pub fn table_size(levels: u32) -> usize {
    (0..levels).map(|k| NUM_ACTIONS.pow(k)).sum()
}

/// Breadth-first enumeration of every state reachable from `root` in fewer
/// than `levels` steps. Child `a` of entry `n` sits at `15·n + 1 + a`; a
/// terminal state stands in for all of its descendants.
pub fn enumerate_prediction_tree(
    root: &PlanningState,
    levels: u32,
    dynamics: &Dynamics,
) -> Result<Vec<PlanningState>> {
    if !(1..=MAX_LEVELS).contains(&levels) {
        return Err(Error::config(format!(
            "prediction levels must be in 1..={MAX_LEVELS}, got {levels}"
        )));
    }
    if root.terminal {
        return Err(Error::contract("cannot enumerate from a terminal state"));
    }
    let total = table_size(levels);
    let mut states = Vec::with_capacity(total);
    states.push(root.clone());
    let mut parent = 0;
    while states.len() < total {
        for a in ActionIndex::all() {
            let p = &states[parent];
            let child = if p.terminal {
                p.clone()
            } else {
                simulate_transition(p, a, dynamics)?
            };
            states.push(child);
        }
        parent += 1;
    }
    Ok(states)
}

/// Prior vectors for an enumerated tree, one row of 15 per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTable {
    priors: Vec<f64>,
    width: usize,
}

impl PredictionTable {
    pub fn len(&self) -> usize {
        self.priors.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn row(&self, index: usize) -> Option<&[f64]> {
        self.priors.get(index * self.width..(index + 1) * self.width)
    }
}

/// One forward pass over all `states`.
pub fn batch_predict(model: &MlpModel, states: &[PlanningState]) -> Result<PredictionTable> {
    let features: Vec<FeatureVector> = states.iter().map(vectorize_state).collect();
    Ok(PredictionTable {
        priors: model.predict_batch(&features)?,
        width: model.output_width(),
    })
}
