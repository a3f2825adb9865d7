//! Finite-horizon tabular MDPs with grid cost distributions: exact value and
//! return-distribution computation, Bellman operators (standard and
//! distributional), rollouts, visitation distributions, coverage
//! coefficients, and a low-rank instance generator.
//!
//! Conventions: steps are indexed h = 0..H-1; value tuples carry an implicit
//! all-zero step H (point mass at zero for distribution tuples); cumulative
//! returns are normalized to lie in [0,1] almost surely, which `new` checks
//! conservatively (the per-step maxima must sum to at most one).

use crate::error::{Error, Result};
use crate::grid::{shift_convolve_project, GridDist};
use crate::rng::derive_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct TabularMdp {
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    start_state: usize,
    /// trans[h][x][a][x']
    trans: Vec<Vec<Vec<Vec<f64>>>>,
    /// costs[h][x][a]
    costs: Vec<Vec<Vec<GridDist>>>,
}

impl TabularMdp {
    pub fn new(
        start_state: usize,
        trans: Vec<Vec<Vec<Vec<f64>>>>,
        costs: Vec<Vec<Vec<GridDist>>>,
    ) -> Result<Self> {
        let horizon = trans.len();
        if horizon == 0 || costs.len() != horizon {
            return Err(Error::InvalidInstance("horizon mismatch".into()));
        }
        let n_states = trans[0].len();
        let n_actions = trans[0][0].len();
        let m = costs[0][0][0].grid_size();
        for h in 0..horizon {
            if trans[h].len() != n_states || costs[h].len() != n_states {
                return Err(Error::InvalidInstance("state dimension mismatch".into()));
            }
            for x in 0..n_states {
                if trans[h][x].len() != n_actions || costs[h][x].len() != n_actions {
                    return Err(Error::InvalidInstance("action dimension mismatch".into()));
                }
                for a in 0..n_actions {
                    let row = &trans[h][x][a];
                    if row.len() != n_states {
                        return Err(Error::InvalidInstance("transition row length".into()));
                    }
                    let s: f64 = row.iter().sum();
                    if (s - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < 0.0) {
                        return Err(Error::InvalidInstance(format!(
                            "transition row (h={h},x={x},a={a}) sums to {s}"
                        )));
                    }
                    if costs[h][x][a].grid_size() != m {
                        return Err(Error::GridMismatch(costs[h][x][a].grid_size(), m));
                    }
                }
            }
        }
        if start_state >= n_states {
            return Err(Error::InvalidInstance("start state out of range".into()));
        }
        // normalization: worst-case sum of per-step cost maxima stays in [0,1]
        let mut worst = 0.0;
        for level in &costs {
            let mut step_max: f64 = 0.0;
            for row in level {
                for d in row {
                    if let Some(&(k, _)) = d.support().last() {
                        step_max = step_max.max(d.value(k));
                    }
                }
            }
            worst += step_max;
        }
        if worst > 1.0 + 1e-9 {
            return Err(Error::InvalidInstance(format!(
                "returns not normalized: per-step maxima sum to {worst}"
            )));
        }
        Ok(Self {
            horizon,
            n_states,
            n_actions,
            start_state,
            trans,
            costs,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
    pub fn num_states(&self) -> usize {
        self.n_states
    }
    pub fn num_actions(&self) -> usize {
        self.n_actions
    }
    pub fn start_state(&self) -> usize {
        self.start_state
    }
    pub fn grid_size(&self) -> usize {
        self.costs[0][0][0].grid_size()
    }
    pub fn transition(&self, h: usize, x: usize, a: usize) -> &[f64] {
        &self.trans[h][x][a]
    }
    pub fn cost_dist(&self, h: usize, x: usize, a: usize) -> &GridDist {
        &self.costs[h][x][a]
    }
    pub fn mean_cost(&self, h: usize, x: usize, a: usize) -> f64 {
        self.costs[h][x][a].mean()
    }

    pub fn to_json(&self) -> String {
        let doc = MdpJson {
            h: self.horizon,
            x: self.n_states,
            a: self.n_actions,
            grid_m: self.grid_size(),
            trans: self.trans.clone(),
            cost_mass: self
                .costs
                .iter()
                .map(|lvl| {
                    lvl.iter()
                        .map(|row| row.iter().map(|d| d.mass().to_vec()).collect())
                        .collect()
                })
                .collect(),
            x1: self.start_state,
        };
        serde_json::to_string_pretty(&doc).expect("mdp serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MdpJson = serde_json::from_str(text)?;
        if doc.grid_m == 0 {
            return Err(Error::InvalidInstance("grid_M must be positive".into()));
        }
        let costs = doc
            .cost_mass
            .into_iter()
            .map(|lvl| {
                lvl.into_iter()
                    .map(|row| row.into_iter().map(GridDist::new).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.x1, doc.trans, costs)
    }
}

/// Canonical on-disk schema.
#[derive(Serialize, Deserialize)]
struct MdpJson {
    #[serde(rename = "H")]
    h: usize,
    #[serde(rename = "X")]
    x: usize,
    #[serde(rename = "A")]
    a: usize,
    #[serde(rename = "grid_M")]
    grid_m: usize,
    trans: Vec<Vec<Vec<Vec<f64>>>>,
    cost_mass: Vec<Vec<Vec<Vec<f64>>>>,
    x1: usize,
}

/// Per-step decision rule. Deterministic policies carry an action table;
/// stochastic variants carry per-(h,x) action distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    act: Vec<Vec<usize>>,
    probs: Option<Vec<Vec<Vec<f64>>>>,
}

impl Policy {
    pub fn deterministic(act: Vec<Vec<usize>>) -> Self {
        Self { act, probs: None }
    }

    pub fn stochastic(probs: Vec<Vec<Vec<f64>>>) -> Self {
        let act = probs
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| {
                        p.iter()
                            .enumerate()
                            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite probs"))
                            .map(|(i, _)| i)
                            .unwrap_or(0)
                    })
                    .collect()
            })
            .collect();
        Self {
            act,
            probs: Some(probs),
        }
    }

    /// Uniform mixing: with probability `alpha` act uniformly at random.
    pub fn mix_with_uniform(&self, alpha: f64, n_actions: usize) -> Policy {
        let probs = self
            .act
            .iter()
            .enumerate()
            .map(|(h, row)| {
                row.iter()
                    .enumerate()
                    .map(|(x, _)| {
                        (0..n_actions)
                            .map(|a| {
                                let base = self.prob(h, x, a);
                                (1.0 - alpha) * base + alpha / n_actions as f64
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Policy::stochastic(probs)
    }

    pub fn action(&self, h: usize, x: usize) -> usize {
        self.act[h][x]
    }

    pub fn prob(&self, h: usize, x: usize, a: usize) -> f64 {
        match &self.probs {
            Some(p) => p[h][x][a],
            None => {
                if self.act[h][x] == a {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample_action<R: Rng + ?Sized>(&self, h: usize, x: usize, rng: &mut R) -> usize {
        match &self.probs {
            None => self.act[h][x],
            Some(p) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let row = &p[h][x];
                for (a, &w) in row.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return a;
                    }
                }
                row.len() - 1
            }
        }
    }
}

/// Per-step value tables f[h][x][a], h = 0..H-1, with implicit zeros at H.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncTuple(pub Vec<Vec<Vec<f64>>>);

impl FuncTuple {
    pub fn zeros(h: usize, x: usize, a: usize) -> Self {
        Self(vec![vec![vec![0.0; a]; x]; h])
    }
    pub fn value(&self, h: usize, x: usize, a: usize) -> f64 {
        self.0[h][x][a]
    }
    /// Greedy (lowest-index argmin) policy.
    pub fn greedy(&self) -> Policy {
        Policy::deterministic(
            self.0
                .iter()
                .map(|lvl| lvl.iter().map(|row| argmin(row)).collect())
                .collect(),
        )
    }
    pub fn min_start_value(&self, x1: usize) -> f64 {
        self.0[0][x1].iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Per-step conditional return distributions p[h][x][a]; the implicit step-H
/// table is a point mass at zero.
#[derive(Debug, Clone)]
pub struct DistTuple(pub Vec<Vec<Vec<GridDist>>>);

impl DistTuple {
    pub fn dist(&self, h: usize, x: usize, a: usize) -> &GridDist {
        &self.0[h][x][a]
    }
    pub fn means(&self) -> FuncTuple {
        FuncTuple(
            self.0
                .iter()
                .map(|lvl| {
                    lvl.iter()
                        .map(|row| row.iter().map(|d| d.mean()).collect())
                        .collect()
                })
                .collect(),
        )
    }
    /// Mean-greedy policy.
    pub fn greedy(&self) -> Policy {
        self.means().greedy()
    }
}

/// One environment transition: cost realized on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionTuple {
    pub step: usize,
    pub state: usize,
    pub action: usize,
    pub cost_index: usize,
    pub cost_value: f64,
    pub next_state: usize,
}

fn argmin(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v < row[best] {
            best = i;
        }
    }
    best
}

/// Q^pi by exact backward recursion.
pub fn exact_q_pi(mdp: &TabularMdp, pi: &Policy) -> FuncTuple {
    let (hh, xx, aa) = (mdp.horizon, mdp.n_states, mdp.n_actions);
    let mut q = FuncTuple::zeros(hh, xx, aa);
    for h in (0..hh).rev() {
        for x in 0..xx {
            for a in 0..aa {
                let mut v = mdp.mean_cost(h, x, a);
                if h + 1 < hh {
                    for (x2, &p) in mdp.trans[h][x][a].iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        let next: f64 = (0..aa)
                            .map(|a2| pi.prob(h + 1, x2, a2) * q.0[h + 1][x2][a2])
                            .sum();
                        v += p * next;
                    }
                }
                q.0[h][x][a] = v;
            }
        }
    }
    q
}

/// V^pi(x1), the initial-state value.
pub fn policy_value(mdp: &TabularMdp, pi: &Policy) -> f64 {
    let q = exact_q_pi(mdp, pi);
    (0..mdp.n_actions)
        .map(|a| pi.prob(0, mdp.start_state, a) * q.0[0][mdp.start_state][a])
        .sum()
}

/// Q*, its greedy policy and V* by exact backward dynamic programming.
pub fn exact_q_star(mdp: &TabularMdp) -> (FuncTuple, Policy, f64) {
    let (hh, xx, aa) = (mdp.horizon, mdp.n_states, mdp.n_actions);
    let mut q = FuncTuple::zeros(hh, xx, aa);
    for h in (0..hh).rev() {
        for x in 0..xx {
            for a in 0..aa {
                let mut v = mdp.mean_cost(h, x, a);
                if h + 1 < hh {
                    for (x2, &p) in mdp.trans[h][x][a].iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        let best = q.0[h + 1][x2].iter().cloned().fold(f64::INFINITY, f64::min);
                        v += p * best;
                    }
                }
                q.0[h][x][a] = v;
            }
        }
    }
    let pi = q.greedy();
    let vstar = q.min_start_value(mdp.start_state);
    (q, pi, vstar)
}

/// Law of Z^pi_h(x,a) (cost-to-go from (h,x,a) following pi afterwards) by
/// exact distributional dynamic programming on the grid.
pub fn exact_return_dist(mdp: &TabularMdp, pi: &Policy) -> DistTuple {
    let (hh, xx, aa) = (mdp.horizon, mdp.n_states, mdp.n_actions);
    let m = mdp.grid_size();
    let point0 = GridDist::point_mass(m, 0);
    let mut out: Vec<Vec<Vec<GridDist>>> = vec![vec![vec![point0.clone(); aa]; xx]; hh];
    for h in (0..hh).rev() {
        for x in 0..xx {
            for a in 0..aa {
                let next = if h + 1 < hh {
                    next_step_mixture(mdp, &out[h + 1], pi, h + 1, &mdp.trans[h][x][a], m)
                } else {
                    point0.clone()
                };
                out[h][x][a] = shift_convolve_project(&next, &mdp.costs[h][x][a]);
            }
        }
    }
    DistTuple(out)
}

fn next_step_mixture(
    mdp: &TabularMdp,
    level: &[Vec<GridDist>],
    pi: &Policy,
    h_next: usize,
    trans_row: &[f64],
    m: usize,
) -> GridDist {
    let mut mass = vec![0.0; m + 1];
    for (x2, &p) in trans_row.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for a2 in 0..mdp.n_actions {
            let w = p * pi.prob(h_next, x2, a2);
            if w == 0.0 {
                continue;
            }
            for (k, &q) in level[x2][a2].mass().iter().enumerate() {
                mass[k] += w * q;
            }
        }
    }
    GridDist::new(mass).expect("mixture of valid dists is valid")
}

/// Return distribution from the start state (mixing over the first action
/// for stochastic policies).
pub fn return_dist_from_start(mdp: &TabularMdp, pi: &Policy) -> GridDist {
    let dt = exact_return_dist(mdp, pi);
    let x1 = mdp.start_state;
    let dists: Vec<&GridDist> = (0..mdp.n_actions).map(|a| dt.dist(0, x1, a)).collect();
    let weights: Vec<f64> = (0..mdp.n_actions).map(|a| pi.prob(0, x1, a)).collect();
    GridDist::mixture(&dists, &weights)
}

/// Variance of the cumulative return Z^pi.
pub fn policy_variance(mdp: &TabularMdp, pi: &Policy) -> f64 {
    return_dist_from_start(mdp, pi).variance()
}

/// One round of data collection. Without the uniform-action flag this is a
/// single H-step trajectory with x'_h = x_{h+1}; with it, H separate
/// roll-ins where the h-th follows the policy for h steps and then plays a
/// uniformly random action, recording only that step's transition.
pub fn rollout<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    pi: &Policy,
    ua_flag: bool,
    rng: &mut R,
) -> Vec<TransitionTuple> {
    let hh = mdp.horizon;
    let mut out = Vec::with_capacity(hh);
    if !ua_flag {
        let mut x = mdp.start_state;
        for h in 0..hh {
            let a = pi.sample_action(h, x, rng);
            out.push(step(mdp, h, x, a, rng));
            x = out[h].next_state;
        }
    } else {
        for target in 0..hh {
            let mut x = mdp.start_state;
            for h in 0..target {
                let a = pi.sample_action(h, x, rng);
                x = step(mdp, h, x, a, rng).next_state;
            }
            let a = rng.gen_range(0..mdp.n_actions);
            out.push(step(mdp, target, x, a, rng));
        }
    }
    out
}

fn step<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    h: usize,
    x: usize,
    a: usize,
    rng: &mut R,
) -> TransitionTuple {
    let d = &mdp.costs[h][x][a];
    let cost_index = d.sample_index(rng);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut x2 = mdp.n_states - 1;
    for (j, &p) in mdp.trans[h][x][a].iter().enumerate() {
        acc += p;
        if u < acc {
            x2 = j;
            break;
        }
    }
    TransitionTuple {
        step: h,
        state: x,
        action: a,
        cost_index,
        cost_value: d.value(cost_index),
        next_state: x2,
    }
}

/// Exact state-action visitation d^pi[h][x][a] by forward propagation.
pub fn visitation_dist(mdp: &TabularMdp, pi: &Policy) -> Vec<Vec<Vec<f64>>> {
    let (hh, xx, aa) = (mdp.horizon, mdp.n_states, mdp.n_actions);
    let mut d = vec![vec![vec![0.0; aa]; xx]; hh];
    let mut occ = vec![0.0; xx];
    occ[mdp.start_state] = 1.0;
    for h in 0..hh {
        for x in 0..xx {
            if occ[x] == 0.0 {
                continue;
            }
            for a in 0..aa {
                d[h][x][a] = occ[x] * pi.prob(h, x, a);
            }
        }
        if h + 1 < hh {
            let mut next = vec![0.0; xx];
            for x in 0..xx {
                for a in 0..aa {
                    let w = d[h][x][a];
                    if w == 0.0 {
                        continue;
                    }
                    for (x2, &p) in mdp.trans[h][x][a].iter().enumerate() {
                        next[x2] += w * p;
                    }
                }
            }
            occ = next;
        }
    }
    d
}

/// Single-policy coverage coefficient: the largest ratio between the
/// comparator's visitation and the data distribution, +infinity on support
/// violations.
pub fn coverage_coefficient(
    mdp: &TabularMdp,
    pi_tilde: &Policy,
    nu: &[Vec<Vec<f64>>],
) -> f64 {
    let d = visitation_dist(mdp, pi_tilde);
    let mut worst: f64 = 0.0;
    for h in 0..mdp.horizon {
        for x in 0..mdp.n_states {
            for a in 0..mdp.n_actions {
                let dv = d[h][x][a];
                if dv <= 0.0 {
                    continue;
                }
                let nv = nu[h][x][a];
                if nv <= 0.0 {
                    return f64::INFINITY;
                }
                worst = worst.max(dv / nv);
            }
        }
    }
    worst
}

/// Which Bellman backup to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackupKind {
    Pi,
    Star,
}

/// Exact mean backup at step `h`: T^pi f (x,a) or T* f (x,a) per state-action
/// pair, bootstrapping on the tuple's step h+1 (implicitly zero at H).
pub fn bellman_backup_mean(
    mdp: &TabularMdp,
    kind: BackupKind,
    f: &FuncTuple,
    h: usize,
    pi: Option<&Policy>,
) -> Vec<Vec<f64>> {
    let (hh, xx, aa) = (mdp.horizon, mdp.n_states, mdp.n_actions);
    let mut out = vec![vec![0.0; aa]; xx];
    for x in 0..xx {
        for a in 0..aa {
            let mut v = mdp.mean_cost(h, x, a);
            if h + 1 < hh {
                for (x2, &p) in mdp.trans[h][x][a].iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let next = match kind {
                        BackupKind::Star => {
                            f.0[h + 1][x2].iter().cloned().fold(f64::INFINITY, f64::min)
                        }
                        BackupKind::Pi => {
                            let pi = pi.expect("policy backup needs a policy");
                            (0..aa)
                                .map(|a2| pi.prob(h + 1, x2, a2) * f.0[h + 1][x2][a2])
                                .sum()
                        }
                    };
                    v += p * next;
                }
            }
            out[x][a] = v;
        }
    }
    out
}

/// Exact distributional backup at step `h`: the law of c + Z' where Z' draws
/// from the tuple's step h+1 at the sampled next state, with actions chosen
/// by the policy (Pi) or greedily with respect to the tuple's own means
/// (Star); projected onto the grid.
pub fn bellman_backup_dist(
    mdp: &TabularMdp,
    kind: BackupKind,
    p: &DistTuple,
    h: usize,
    pi: Option<&Policy>,
) -> Vec<Vec<GridDist>> {
    let (hh, xx, aa) = (mdp.horizon, mdp.n_states, mdp.n_actions);
    let m = mdp.grid_size();
    let point0 = GridDist::point_mass(m, 0);
    // per next-state distribution after action selection
    let next_of_state: Vec<GridDist> = if h + 1 < hh {
        (0..xx)
            .map(|x2| match kind {
                BackupKind::Star => {
                    let a2 = argmin(
                        &(0..aa)
                            .map(|a2| p.0[h + 1][x2][a2].mean())
                            .collect::<Vec<_>>(),
                    );
                    p.0[h + 1][x2][a2].clone()
                }
                BackupKind::Pi => {
                    let pi = pi.expect("policy backup needs a policy");
                    let dists: Vec<&GridDist> = (0..aa).map(|a2| &p.0[h + 1][x2][a2]).collect();
                    let ws: Vec<f64> = (0..aa).map(|a2| pi.prob(h + 1, x2, a2)).collect();
                    GridDist::mixture(&dists, &ws)
                }
            })
            .collect()
    } else {
        vec![point0; xx]
    };
    let mut out = Vec::with_capacity(xx);
    for x in 0..xx {
        let mut row = Vec::with_capacity(aa);
        for a in 0..aa {
            let mut mass = vec![0.0; m + 1];
            for (x2, &pr) in mdp.trans[h][x][a].iter().enumerate() {
                if pr == 0.0 {
                    continue;
                }
                for (k, &q) in next_of_state[x2].mass().iter().enumerate() {
                    mass[k] += pr * q;
                }
            }
            let mixed = GridDist::new(mass).expect("valid mixture");
            row.push(shift_convolve_project(&mixed, &mdp.costs[h][x][a]));
        }
        out.push(row);
    }
    out
}

/// A generated low-rank MDP together with its factorization.
#[derive(Debug, Clone)]
pub struct LowRankMdp {
    pub mdp: TabularMdp,
    /// phi[h][x][a] in R^d, norm at most 1.
    pub phi: Vec<Vec<Vec<Vec<f64>>>>,
    /// mu[h][x'] in R^d.
    pub mu: Vec<Vec<Vec<f64>>>,
    /// v[h] in R^d with mean cost (h,x,a) = phi . v.
    pub v: Vec<Vec<f64>>,
}

/// Random rank-`d` MDP: transitions factor exactly as phi(x,a)^T mu(x') and
/// expected costs are linear in phi. Feature norms are rescaled post-hoc to
/// satisfy |phi| <= 1, |sum_x' |mu(x')|| <= sqrt(d) (integral bound) and
/// |v| <= sqrt(d); infeasible draws are resampled.
pub fn make_low_rank_mdp(
    d: usize,
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    grid_m: usize,
    seed: u64,
) -> Result<LowRankMdp> {
    assert!(d >= 1 && d <= n_states, "rank must be in 1..=X");
    assert!(grid_m % horizon == 0, "grid must be divisible by the horizon");
    let max_attempts = 100;
    let mut rng = derive_rng(seed, &[0x10_44]);
    for _ in 0..max_attempts {
        let mut phi = vec![vec![vec![vec![0.0; d]; n_actions]; n_states]; horizon];
        let mut mu = vec![vec![vec![0.0; d]; n_states]; horizon];
        let mut vcost = vec![vec![0.0; d]; horizon];
        let mut feasible = true;
        for h in 0..horizon {
            for x2 in 0..n_states {
                for k in 0..d {
                    mu[h][x2][k] = rng.gen_range(0.05..1.0);
                }
            }
            let s: Vec<f64> = (0..d)
                .map(|k| (0..n_states).map(|x2| mu[h][x2][k]).sum())
                .collect();
            for x in 0..n_states {
                for a in 0..n_actions {
                    let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..1.0)).collect();
                    let dot: f64 = raw.iter().zip(&s).map(|(r, q)| r * q).sum();
                    for k in 0..d {
                        phi[h][x][a][k] = raw[k] / dot;
                    }
                }
            }
            // rescale phi <-> mu to satisfy the norm constraints
            let max_phi = phi[h]
                .iter()
                .flatten()
                .map(|f| f.iter().map(|v| v * v).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            let b: f64 = mu[h]
                .iter()
                .map(|m| m.iter().map(|v| v * v).sum::<f64>().sqrt())
                .sum();
            // phi / c keeps P intact with mu * c; need max_phi/c <= 1 and
            // c * b <= sqrt(d)
            let c = max_phi;
            if c * b > (d as f64).sqrt() {
                feasible = false;
                break;
            }
            for x in 0..n_states {
                for a in 0..n_actions {
                    for k in 0..d {
                        phi[h][x][a][k] /= c;
                    }
                }
            }
            for x2 in 0..n_states {
                for k in 0..d {
                    mu[h][x2][k] *= c;
                }
            }
            // linear costs, scaled so all means fit in [0, 1/H] and |v| <= sqrt(d)
            let raw_v: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
            let max_mean = phi[h]
                .iter()
                .flatten()
                .map(|f| f.iter().zip(&raw_v).map(|(a, b)| a * b).sum::<f64>())
                .fold(0.0, f64::max);
            let norm_v = raw_v.iter().map(|v| v * v).sum::<f64>().sqrt();
            let t = (1.0 / (horizon as f64 * max_mean)).min((d as f64).sqrt() / norm_v);
            for k in 0..d {
                vcost[h][k] = raw_v[k] * t;
            }
        }
        if !feasible {
            continue;
        }
        // assemble tables
        let mut trans = vec![vec![vec![vec![0.0; n_states]; n_actions]; n_states]; horizon];
        let mut costs = Vec::with_capacity(horizon);
        let atom = grid_m / horizon;
        for h in 0..horizon {
            let mut level = Vec::with_capacity(n_states);
            for x in 0..n_states {
                let mut row = Vec::with_capacity(n_actions);
                for a in 0..n_actions {
                    for x2 in 0..n_states {
                        trans[h][x][a][x2] = phi[h][x][a]
                            .iter()
                            .zip(&mu[h][x2])
                            .map(|(p, m)| p * m)
                            .sum();
                    }
                    let mean: f64 = phi[h][x][a]
                        .iter()
                        .zip(&vcost[h])
                        .map(|(p, v)| p * v)
                        .sum();
                    // two-atom cost {0, 1/H} with the required mean
                    let p1 = (mean * horizon as f64).clamp(0.0, 1.0);
                    let mut mass = vec![0.0; grid_m + 1];
                    mass[0] = 1.0 - p1;
                    mass[atom] += p1;
                    row.push(GridDist::new(mass).expect("two-atom cost"));
                }
                level.push(row);
            }
            costs.push(level);
        }
        let mdp = TabularMdp::new(0, trans, costs)?;
        return Ok(LowRankMdp { mdp, phi, mu, v: vcost });
    }
    Err(Error::LowRankInfeasible {
        attempts: max_attempts,
    })
}

/// Numerical rank of the (x,a) by x' transition matrix at step `h`.
pub fn transition_numerical_rank(mdp: &TabularMdp, h: usize, tol: f64) -> usize {
    let rows = mdp.n_states * mdp.n_actions;
    let mut mat = nalgebra::DMatrix::<f64>::zeros(rows, mdp.n_states);
    for x in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            for x2 in 0..mdp.n_states {
                mat[(x * mdp.n_actions + a, x2)] = mdp.trans[h][x][a][x2];
            }
        }
    }
    mat.svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > tol)
        .count()
}

/// Random normalized MDP for tests and experiments: Dirichlet-ish rows and
/// two-atom costs {0, 1/H} so dynamic programming on the grid is exact.
pub fn random_mdp(
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    grid_m: usize,
    seed: u64,
) -> TabularMdp {
    assert!(grid_m % horizon == 0);
    let mut rng = derive_rng(seed, &[0xADD]);
    let atom = grid_m / horizon;
    let mut trans = vec![vec![vec![vec![0.0; n_states]; n_actions]; n_states]; horizon];
    let mut costs = Vec::with_capacity(horizon);
    for h in 0..horizon {
        let mut level = Vec::with_capacity(n_states);
        for x in 0..n_states {
            let mut row_dists = Vec::with_capacity(n_actions);
            for a in 0..n_actions {
                let mut row: Vec<f64> = (0..n_states).map(|_| rng.gen_range(0.05..1.0)).collect();
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= s);
                trans[h][x][a] = row;
                let p1: f64 = rng.gen_range(0.0..1.0);
                let mut mass = vec![0.0; grid_m + 1];
                mass[0] = 1.0 - p1;
                mass[atom] += p1;
                row_dists.push(GridDist::new(mass).expect("two-atom cost"));
            }
            level.push(row_dists);
        }
        costs.push(level);
    }
    TabularMdp::new(0, trans, costs).expect("random mdp is valid")
}

/// All deterministic policies of a small MDP (A^(X*H) of them).
pub fn all_deterministic_policies(mdp: &TabularMdp) -> Vec<Policy> {
    let slots = mdp.horizon * mdp.n_states;
    let total = (mdp.n_actions as u64).pow(slots as u32);
    assert!(total <= 1 << 20, "policy enumeration too large");
    (0..total)
        .map(|mut code| {
            let mut act = vec![vec![0usize; mdp.n_states]; mdp.horizon];
            for h in 0..mdp.horizon {
                for x in 0..mdp.n_states {
                    act[h][x] = (code % mdp.n_actions as u64) as usize;
                    code /= mdp.n_actions as u64;
                }
            }
            Policy::deterministic(act)
        })
        .collect()
}
