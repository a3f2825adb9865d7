//! Pessimistic offline RL: per-policy TD version spaces over a fixed dataset,
//! with the policy chosen by minimizing the most conservative surviving value
//! estimate. Mean-class (squared/bce) and distributional (MLE) variants.

use crate::classes::{RlDistClass, RlMeanClass};
use crate::error::{Error, Result};
use crate::losses::LossKind;
use crate::mdp::{policy_value, visitation_dist, Policy, TabularMdp, TransitionTuple};
use crate::online::{rl_version_space_dist, rl_version_space_mean, RlDataset, TargetRule};
use crate::rng::derive_rng;
use rand::Rng;

const TAG_OFFLINE: u64 = 0x0FF;

/// Data distribution over (state, action) per step.
pub type Nu = Vec<Vec<Vec<f64>>>;

/// The visitation distribution of `pi` mixed with uniform actions: roll-in
/// with the alpha-mixed policy and record its exact state-action occupancy.
pub fn nu_from_policy(mdp: &TabularMdp, pi: &Policy, uniform_mix: f64) -> Nu {
    let mixed = pi.mix_with_uniform(uniform_mix, mdp.num_actions());
    visitation_dist(mdp, &mixed)
}

/// Uniform data distribution over all (state, action) pairs at every step.
pub fn nu_uniform(mdp: &TabularMdp) -> Nu {
    let w = 1.0 / (mdp.num_states() * mdp.num_actions()) as f64;
    vec![vec![vec![w; mdp.num_actions()]; mdp.num_states()]; mdp.horizon()]
}

/// Draw `n` i.i.d. transitions per step: (x,a) from nu_h, then the cost and
/// next state from the environment. Deterministic in `seed`.
pub fn generate_offline(mdp: &TabularMdp, nu: &Nu, n: usize, seed: u64) -> RlDataset {
    let mut rng = derive_rng(seed, &[TAG_OFFLINE]);
    let mut data = RlDataset::empty(mdp.horizon());
    for h in 0..mdp.horizon() {
        for _ in 0..n {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = (mdp.num_states() - 1, mdp.num_actions() - 1);
            'outer: for x in 0..mdp.num_states() {
                for a in 0..mdp.num_actions() {
                    acc += nu[h][x][a];
                    if u < acc {
                        pick = (x, a);
                        break 'outer;
                    }
                }
            }
            let (x, a) = pick;
            let d = mdp.cost_dist(h, x, a);
            let cost_index = d.sample_index(&mut rng);
            let un: f64 = rng.gen();
            let mut cum = 0.0;
            let mut x2 = mdp.num_states() - 1;
            for (j, &p) in mdp.transition(h, x, a).iter().enumerate() {
                cum += p;
                if un < cum {
                    x2 = j;
                    break;
                }
            }
            data.push(
                TransitionTuple {
                    step: h,
                    state: x,
                    action: a,
                    cost_index,
                    cost_value: d.value(cost_index),
                    next_state: x2,
                },
                seed,
            );
        }
    }
    data
}

/// Per-candidate-policy diagnostics of a pessimistic run.
#[derive(Debug, Clone)]
pub struct PolicyDiag {
    /// Index into the deduplicated greedy policy list.
    pub policy_index: usize,
    /// Member chosen pessimistically for this policy.
    pub member: usize,
    /// max over the surviving members of min_a f_1(x1,a): the conservative
    /// value estimate for this policy.
    pub witness: f64,
    /// Exact V^pi for comparison.
    pub v_pi: f64,
    pub space_size: usize,
    pub skipped: bool,
}

/// Outcome of a pessimistic offline run.
#[derive(Debug, Clone)]
pub struct PessimisticOutcome {
    /// Index of the returned policy in `policies`.
    pub chosen: usize,
    pub policies: Vec<Policy>,
    pub value_estimate: f64,
    pub per_policy: Vec<PolicyDiag>,
}

impl PessimisticOutcome {
    pub fn policy(&self) -> &Policy {
        &self.policies[self.chosen]
    }
}

/// Deduplicated greedy policies of the class members, in first-occurrence
/// order.
pub fn greedy_policy_class(class: &RlMeanClass) -> Vec<Policy> {
    let mut out: Vec<Policy> = Vec::new();
    for f in &class.members {
        let pi = f.greedy();
        if !out.contains(&pi) {
            out.push(pi);
        }
    }
    out
}

/// Mean-greedy policies of a distributional class.
pub fn mean_greedy_policy_class(class: &RlDistClass) -> Vec<Policy> {
    let mut out: Vec<Policy> = Vec::new();
    for p in &class.members {
        let pi = p.greedy();
        if !out.contains(&pi) {
            out.push(pi);
        }
    }
    out
}

/// Pessimistic offline RL with the squared or bce loss. For each greedy
/// policy of the class, the policy-target version space is built from the
/// dataset and its most conservative member (largest initial-state minimum)
/// is kept; the returned policy minimizes that conservative estimate.
/// Policies whose version space is empty are skipped with a diagnostic.
pub fn run_pessimistic(
    mdp: &TabularMdp,
    class: &RlMeanClass,
    data: &RlDataset,
    loss: LossKind,
    beta: f64,
) -> Result<PessimisticOutcome> {
    let policies = greedy_policy_class(class);
    let x1 = mdp.start_state();
    let mut per_policy = Vec::with_capacity(policies.len());
    for (pid, pi) in policies.iter().enumerate() {
        match rl_version_space_mean(class, data, loss, beta, TargetRule::Pi(pi)) {
            Err(Error::EmptyVersionSpace { .. }) => per_policy.push(PolicyDiag {
                policy_index: pid,
                member: 0,
                witness: f64::NAN,
                v_pi: policy_value(mdp, pi),
                space_size: 0,
                skipped: true,
            }),
            Err(e) => return Err(e),
            Ok(space) => {
                // strict comparison keeps the lowest index on ties
                let mut pick = space[0];
                let mut best = class.members[pick].min_start_value(x1);
                for &i in &space[1..] {
                    let v = class.members[i].min_start_value(x1);
                    if v > best {
                        best = v;
                        pick = i;
                    }
                }
                per_policy.push(PolicyDiag {
                    policy_index: pid,
                    member: pick,
                    witness: best,
                    v_pi: policy_value(mdp, pi),
                    space_size: space.len(),
                    skipped: false,
                });
            }
        }
    }
    finish_pessimistic(policies, per_policy)
}

/// Distributional variant with MLE version spaces and mean-greedy policies.
pub fn run_pessimistic_dist(
    mdp: &TabularMdp,
    class: &RlDistClass,
    data: &RlDataset,
    beta: f64,
    exact_targets: bool,
) -> Result<PessimisticOutcome> {
    let policies = mean_greedy_policy_class(class);
    let x1 = mdp.start_state();
    let min_start = |mi: usize| -> f64 {
        class.members[mi].0[0][x1]
            .iter()
            .map(|d| d.mean())
            .fold(f64::INFINITY, f64::min)
    };
    let mut per_policy = Vec::with_capacity(policies.len());
    for (pid, pi) in policies.iter().enumerate() {
        match rl_version_space_dist(class, data, beta, exact_targets, TargetRule::Pi(pi)) {
            Err(Error::EmptyVersionSpace { .. }) => per_policy.push(PolicyDiag {
                policy_index: pid,
                member: 0,
                witness: f64::NAN,
                v_pi: policy_value(mdp, pi),
                space_size: 0,
                skipped: true,
            }),
            Err(e) => return Err(e),
            Ok(space) => {
                let mut pick = space[0];
                let mut best = min_start(pick);
                for &i in &space[1..] {
                    let v = min_start(i);
                    if v > best {
                        best = v;
                        pick = i;
                    }
                }
                per_policy.push(PolicyDiag {
                    policy_index: pid,
                    member: pick,
                    witness: best,
                    v_pi: policy_value(mdp, pi),
                    space_size: space.len(),
                    skipped: false,
                });
            }
        }
    }
    finish_pessimistic(policies, per_policy)
}

fn finish_pessimistic(
    policies: Vec<Policy>,
    per_policy: Vec<PolicyDiag>,
) -> Result<PessimisticOutcome> {
    let mut chosen = None;
    let mut best = f64::INFINITY;
    for diag in per_policy.iter().filter(|d| !d.skipped) {
        if diag.witness < best {
            best = diag.witness;
            chosen = Some(diag.policy_index);
        }
    }
    match chosen {
        None => Err(Error::AllPoliciesSkipped),
        Some(chosen) => Ok(PessimisticOutcome {
            chosen,
            policies,
            value_estimate: best,
            per_policy,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{build_policy_q_class, build_policy_z_class};
    use crate::mdp::{exact_q_pi, random_mdp};

    #[test]
    fn offline_generation_matches_nu_and_is_deterministic() {
        let mdp = random_mdp(3, 2, 2, 8, 33);
        // point-mass nu: all tuples share (h, x, a)
        let mut nu = vec![vec![vec![0.0; 2]; 3]; 2];
        nu[0][1][0] = 1.0;
        nu[1][2][1] = 1.0;
        let data = generate_offline(&mdp, &nu, 20, 5);
        assert!(data.per_h[0].iter().all(|t| t.state == 1 && t.action == 0));
        assert!(data.per_h[1].iter().all(|t| t.state == 2 && t.action == 1));

        let again = generate_offline(&mdp, &nu, 20, 5);
        assert_eq!(data.per_h[0], again.per_h[0]);
        assert_eq!(data.per_h[1], again.per_h[1]);

        // behavior-policy marginals match the exact visitation
        let pi = Policy::deterministic(vec![vec![0, 1, 0]; 2]);
        let nu = nu_from_policy(&mdp, &pi, 0.3);
        let n = 60_000;
        let data = generate_offline(&mdp, &nu, n, 9);
        for h in 0..2 {
            let mut counts = vec![vec![0usize; 2]; 3];
            for t in &data.per_h[h] {
                counts[t.state][t.action] += 1;
            }
            for x in 0..3 {
                for a in 0..2 {
                    let emp = counts[x][a] as f64 / n as f64;
                    let ex = nu[h][x][a];
                    let se = (ex * (1.0 - ex) / n as f64).sqrt();
                    assert!(
                        (emp - ex).abs() <= 3.0 * se + 1e-3,
                        "(h={h},x={x},a={a}) emp {emp} vs {ex}"
                    );
                }
            }
        }
    }

    #[test]
    fn singleton_policy_class_returns_its_policy() {
        let mdp = random_mdp(3, 2, 2, 8, 44);
        let pi = Policy::deterministic(vec![vec![1, 0, 1]; 2]);
        let q = exact_q_pi(&mdp, &pi);
        let class = RlMeanClass { members: vec![q.clone()] };
        let nu = nu_uniform(&mdp);
        let data = generate_offline(&mdp, &nu, 50, 3);
        let beta = 2.0 * ((2 * 1) as f64 / 0.05f64).ln();
        let out = run_pessimistic(&mdp, &class, &data, LossKind::Sq, beta).unwrap();
        // the class has one greedy policy and one member; the estimate is
        // that member's own initial minimum
        assert_eq!(out.policies.len(), 1);
        assert_eq!(out.chosen, 0);
        let x1 = mdp.start_state();
        assert!((out.value_estimate - q.min_start_value(x1)).abs() < 1e-12);
    }

    #[test]
    fn pessimism_witness_dominates_policy_value_mostly() {
        // Claim (b): min_a f^pi(x1) >= V^pi with frequency >= 1 - delta
        let delta = 0.05;
        let mut checked = 0usize;
        let mut violations = 0usize;
        for seed in 0..50 {
            let mdp = random_mdp(3, 2, 2, 12, 500 + seed);
            let (class, _) = build_policy_q_class(&mdp, 2, seed);
            let nu = nu_uniform(&mdp);
            let data = generate_offline(&mdp, &nu, 64, seed);
            let beta = 2.0 * ((mdp.horizon() * class.members.len()) as f64 / delta).ln();
            let out = run_pessimistic(&mdp, &class, &data, LossKind::Bce, beta).unwrap();
            for diag in out.per_policy.iter().filter(|d| !d.skipped) {
                checked += 1;
                if diag.witness < diag.v_pi - 1e-9 {
                    violations += 1;
                }
            }
        }
        let freq = violations as f64 / checked as f64;
        let se = (delta * (1.0 - delta) / checked as f64).sqrt();
        assert!(
            freq <= delta + 3.0 * se,
            "violation rate {freq} over {checked}"
        );
    }

    #[test]
    fn pessimistic_chain_holds_when_witnesses_do() {
        // whenever pessimism held for every policy, the returned policy's
        // true value is bounded by every surviving estimate
        for seed in 0..20 {
            let mdp = random_mdp(3, 2, 2, 12, 900 + seed);
            let (class, _) = build_policy_q_class(&mdp, 2, seed);
            let nu = nu_uniform(&mdp);
            let data = generate_offline(&mdp, &nu, 128, seed);
            let beta = 2.0 * ((mdp.horizon() * class.members.len()) as f64 / 0.05f64).ln();
            let out = run_pessimistic(&mdp, &class, &data, LossKind::Sq, beta).unwrap();
            let all_pessimistic = out
                .per_policy
                .iter()
                .filter(|d| !d.skipped)
                .all(|d| d.witness >= d.v_pi - 1e-9);
            if !all_pessimistic {
                continue;
            }
            let v_chosen = policy_value(&mdp, out.policy());
            for diag in out.per_policy.iter().filter(|d| !d.skipped) {
                assert!(
                    v_chosen <= diag.witness + 1e-9,
                    "chain broke: V(chosen) {v_chosen} vs estimate {}",
                    diag.witness
                );
            }
        }
    }

    #[test]
    fn dist_variant_returns_sane_estimates() {
        let mdp = random_mdp(2, 2, 2, 8, 61);
        let (class, _) = build_policy_z_class(&mdp, 2, 8);
        let nu = nu_uniform(&mdp);
        let data = generate_offline(&mdp, &nu, 80, 4);
        let beta = 2.0 * ((mdp.horizon() * class.members.len()) as f64 / 0.05f64).ln();
        let out = run_pessimistic_dist(&mdp, &class, &data, beta, false).unwrap();
        assert!(!out.per_policy.is_empty());
        let ok = out.per_policy.iter().filter(|d| !d.skipped).count();
        assert!(ok >= 1);
        // estimate within the valid cost range and close to some member mean
        assert!((0.0..=1.0).contains(&out.value_estimate));
    }
}
