//! Ladder instances for the online and hybrid rate experiments.
//!
//! Each ladder wraps a two-step MDP whose first step offers one honest arm
//! and a geometric ladder of trap arms, together with hypothesis classes
//! whose imposters claim the traps are cheap. A trap imposter survives the
//! version space until the data exposes its claim; how long that takes is
//! exactly where the losses differ:
//!
//! * claims of zero cost against coin-flip arms cost the squared loss only
//!   rho^2 per sample but the log-loss ~ rho * ln(1/eps) — the small-cost
//!   separation;
//! * understating a deterministic interior-valued arm costs bce only the
//!   squared margin per sample, while a point-mass likelihood model dies on
//!   the first observation — the small-variance separation.
//!
//! The trap ladders are spaced so eliminations land inside a K = 32..1024
//! round window with the ladder beta below.

use crate::classes::{RlDistClass, RlMeanClass};
use crate::grid::GridDist;
use crate::mdp::{exact_q_star, DistTuple, FuncTuple, TabularMdp};

/// Version-space threshold for ladder experiments, tuned so the first trap
/// eliminations fall inside the sweep window (the theorem default ~11 would
/// push them past round 40).
pub const LADDER_BETA: f64 = 1.5;

/// A ladder instance with its hypothesis classes.
pub struct LadderSetup {
    pub mdp: TabularMdp,
    pub mean_class: RlMeanClass,
    pub dist_class: Option<RlDistClass>,
}

fn two_state_transitions(horizon: usize, n_actions: usize) -> Vec<Vec<Vec<Vec<f64>>>> {
    // everything funnels into the sink state 1
    let mut trans = vec![vec![vec![vec![0.0; 2]; n_actions]; 2]; horizon];
    for level in trans.iter_mut() {
        for row in level.iter_mut() {
            for arm in row.iter_mut() {
                arm[1] = 1.0;
            }
        }
    }
    trans
}

/// Small-cost ladder: V* = 0. Arm 0 is free; trap arm j pays 1 with
/// probability rho_j = 2^{-(j-1)/2}. Trap imposters claim their arm is free
/// and smear the honest arm by a little, so optimistic ties (every claim is
/// 0 = V*) resolve into the traps, which sit first in member order.
pub fn small_cost_ladder() -> LadderSetup {
    let n_traps = 10;
    let n_actions = n_traps + 1;
    let horizon = 2;
    let m = 2;
    let rhos: Vec<f64> = (0..n_traps)
        .map(|j| 0.5f64.powf(j as f64 / 2.0))
        .collect();

    let trans = two_state_transitions(horizon, n_actions);
    let zero = GridDist::point_mass(m, 0);
    let mut costs = vec![vec![vec![zero.clone(); n_actions]; 2]; horizon];
    for (j, &rho) in rhos.iter().enumerate() {
        costs[0][0][j + 1] = GridDist::bernoulli(m, rho);
    }
    let mdp = TabularMdp::new(0, trans, costs).expect("ladder is normalized");

    let (truth, _, _) = exact_q_star(&mdp);
    let mut members = Vec::with_capacity(n_traps + 1);
    for j in 0..n_traps {
        let mut f = truth.clone();
        f.0[0][0][j + 1] = 0.0; // the trap claim
        f.0[0][0][0] = 0.02; // nudge the honest arm so greed goes to the trap
        members.push(f);
    }
    members.push(truth);
    LadderSetup {
        mdp,
        mean_class: RlMeanClass { members },
        dist_class: None,
    }
}

fn ladder_xis(n_traps: usize) -> Vec<f64> {
    (0..n_traps).map(|j| 0.45 * 0.5f64.powf(j as f64 / 2.0)).collect()
}

fn det_ladder_mdp(noise: bool) -> (TabularMdp, Vec<f64>, Vec<f64>) {
    let n_traps = 9;
    let n_actions = n_traps + 1;
    let horizon = 2;
    let m = 2048usize;
    let v = 0.5f64;
    let xis = ladder_xis(n_traps);
    let gammas: Vec<f64> = xis.iter().map(|x| x / 2.0).collect();

    let trans = two_state_transitions(horizon, n_actions);
    let zero = GridDist::point_mass(m, 0);
    let mut costs = vec![vec![vec![zero.clone(); n_actions]; 2]; horizon];
    costs[0][0][0] = GridDist::point_mass(m, m / 2); // the deterministic optimum
    for (j, &g) in gammas.iter().enumerate() {
        let hi = ((v + g) * m as f64).round() as usize;
        costs[0][0][j + 1] = if noise {
            // +-1/4 coin around the mean; the optimal arm stays deterministic
            GridDist::from_atoms(
                m,
                &[
                    (v + g - 0.25, 0.5),
                    (v + g + 0.25, 0.5),
                ],
            )
            .expect("noise atoms fit the grid")
        } else {
            GridDist::point_mass(m, hi)
        };
    }
    let mdp = TabularMdp::new(0, trans, costs).expect("ladder is normalized");
    (mdp, xis, gammas)
}

/// Deterministic nonzero-cost ladder: the optimal arm costs exactly 1/2 and
/// trap arm j costs v + xi_j/2 deterministically; imposters understate trap
/// j by xi_j. Mean-class imposters survive roughly beta / (2 xi^2) visits
/// (quadratic log-loss margin on deterministic data) while point-mass
/// likelihood imposters die on their first observation.
pub fn deterministic_ladder() -> LadderSetup {
    let (mdp, xis, _) = det_ladder_mdp(false);
    build_det_classes(mdp, xis)
}

/// Same geometry with a +-1/4 coin on the trap arms (the optimal arm stays
/// deterministic, so the instance keeps zero optimal variance). Used for the
/// hybrid FQI contrast, where slice ERM on fully deterministic data never
/// errs for either loss.
pub fn noisy_deterministic_ladder() -> LadderSetup {
    let (mdp, xis, _) = det_ladder_mdp(true);
    build_det_classes(mdp, xis)
}

fn build_det_classes(mdp: TabularMdp, xis: Vec<f64>) -> LadderSetup {
    let m = mdp.grid_size();
    let v = 0.5f64;
    let (truth, _, _) = exact_q_star(&mdp);
    let mut members = Vec::with_capacity(xis.len() + 1);
    for (j, &xi) in xis.iter().enumerate() {
        let mut f = truth.clone();
        f.0[0][0][j + 1] = v - xi;
        members.push(f);
    }
    members.push(truth.clone());
    let mean_class = RlMeanClass { members };

    // distributional analog: step-1 costs are all zero, so the conditional
    // return distribution at every step is the step cost itself
    let truth_tuple = DistTuple(
        (0..mdp.horizon())
            .map(|h| {
                (0..mdp.num_states())
                    .map(|x| {
                        (0..mdp.num_actions())
                            .map(|a| mdp.cost_dist(h, x, a).clone())
                            .collect()
                    })
                    .collect()
            })
            .collect(),
    );
    let mut dist_members = Vec::with_capacity(xis.len() + 1);
    for (j, &xi) in xis.iter().enumerate() {
        let mut p = truth_tuple.clone();
        let k = (((v - xi) * m as f64).round() as usize).min(m);
        p.0[0][0][j + 1] = GridDist::point_mass(m, k);
        dist_members.push(p);
    }
    dist_members.push(truth_tuple);
    LadderSetup {
        mdp,
        mean_class,
        dist_class: Some(RlDistClass { members: dist_members }),
    }
}
