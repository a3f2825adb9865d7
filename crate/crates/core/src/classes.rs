//! Finite hypothesis classes for RL, Bellman-completeness checkers, and a
//! brute-force eluder dimension with the pigeonhole ratio check.
//!
//! Classes are small by construction: version spaces and completeness are
//! evaluated by exhaustive enumeration, and the eluder search is an exact
//! depth-first search intended for desk-scale verification only.

use crate::error::{Error, Result};
use crate::grid::{hellinger_sq, GridDist};
use crate::mdp::{
    bellman_backup_dist, bellman_backup_mean, exact_q_pi, exact_q_star, exact_return_dist,
    BackupKind, DistTuple, FuncTuple, Policy, TabularMdp,
};
use crate::rng::derive_rng;
use rand::Rng;

/// Finite class of value-function tuples sharing one MDP shape.
#[derive(Debug, Clone)]
pub struct RlMeanClass {
    pub members: Vec<FuncTuple>,
}

impl RlMeanClass {
    /// Distinct tables appearing at step h across members.
    pub fn slice(&self, h: usize) -> Vec<Vec<Vec<f64>>> {
        let mut out: Vec<Vec<Vec<f64>>> = Vec::new();
        for m in &self.members {
            if !out.contains(&m.0[h]) {
                out.push(m.0[h].clone());
            }
        }
        out
    }
}

/// Finite class of conditional return-distribution tuples on a shared grid.
#[derive(Debug, Clone)]
pub struct RlDistClass {
    pub members: Vec<DistTuple>,
}

impl RlDistClass {
    pub fn slice(&self, h: usize) -> Vec<Vec<Vec<GridDist>>> {
        let mut out: Vec<Vec<Vec<GridDist>>> = Vec::new();
        for m in &self.members {
            let table = m.0[h].clone();
            if !out.iter().any(|t| dist_tables_equal(t, &table)) {
                out.push(table);
            }
        }
        out
    }
}

fn dist_tables_equal(a: &[Vec<GridDist>], b: &[Vec<GridDist>]) -> bool {
    a.iter()
        .zip(b)
        .all(|(ra, rb)| ra.iter().zip(rb).all(|(da, db)| da.mass() == db.mass()))
}

/// Which closure condition to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletenessKind {
    /// Closed under the optimality backup.
    Star,
    /// Closed under every policy backup from the policy set.
    PiAll,
}

/// Outcome of a completeness check: the largest distance from any required
/// backup to the class, and where it happened.
#[derive(Debug, Clone)]
pub struct CompletenessReport {
    pub holds: bool,
    pub max_violation: f64,
    /// (member, step, state, action) of the worst witness.
    pub witness: (usize, usize, usize, usize),
}

const COMPLETENESS_TOL: f64 = 1e-9;

/// Check closure of a mean class under the Bellman backup. For `PiAll` the
/// policy set defaults to the greedy policies of the members. Distances are
/// sup-norm over (x,a) to the nearest step-h table in the class.
pub fn check_completeness_mean(
    mdp: &TabularMdp,
    class: &RlMeanClass,
    kind: CompletenessKind,
    policy_set: Option<&[Policy]>,
) -> CompletenessReport {
    let greedy: Vec<Policy>;
    let policies: &[Policy] = match (kind, policy_set) {
        (CompletenessKind::Star, _) => &[],
        (CompletenessKind::PiAll, Some(ps)) => ps,
        (CompletenessKind::PiAll, None) => {
            greedy = class.members.iter().map(|f| f.greedy()).collect();
            &greedy
        }
    };
    let mut worst = 0.0;
    let mut witness = (0, 0, 0, 0);
    for h in 0..mdp.horizon() {
        let slice = class.slice(h);
        let mut consider = |backup: &[Vec<f64>], member: usize| {
            let dist = slice
                .iter()
                .map(|table| sup_dist_mean(backup, table))
                .fold(f64::INFINITY, f64::min);
            if dist > worst {
                worst = dist;
                let (x, a) = worst_cell_mean(backup, &slice);
                witness = (member, h, x, a);
            }
        };
        for (mi, f) in class.members.iter().enumerate() {
            match kind {
                CompletenessKind::Star => {
                    let b = bellman_backup_mean(mdp, BackupKind::Star, f, h, None);
                    consider(&b, mi);
                }
                CompletenessKind::PiAll => {
                    for pi in policies {
                        let b = bellman_backup_mean(mdp, BackupKind::Pi, f, h, Some(pi));
                        consider(&b, mi);
                    }
                }
            }
        }
    }
    CompletenessReport {
        holds: worst <= COMPLETENESS_TOL,
        max_violation: worst,
        witness,
    }
}

/// Distributional analog: distances are max-over-(x,a) squared Hellinger to
/// the nearest step-h table.
pub fn check_completeness_dist(
    mdp: &TabularMdp,
    class: &RlDistClass,
    kind: CompletenessKind,
    policy_set: Option<&[Policy]>,
) -> CompletenessReport {
    let greedy: Vec<Policy>;
    let policies: &[Policy] = match (kind, policy_set) {
        (CompletenessKind::Star, _) => &[],
        (CompletenessKind::PiAll, Some(ps)) => ps,
        (CompletenessKind::PiAll, None) => {
            greedy = class.members.iter().map(|p| p.greedy()).collect();
            &greedy
        }
    };
    let mut worst = 0.0;
    let mut witness = (0, 0, 0, 0);
    for h in 0..mdp.horizon() {
        let slice = class.slice(h);
        let mut consider = |backup: &[Vec<GridDist>], member: usize| {
            let dist = slice
                .iter()
                .map(|table| sup_dist_hellinger(backup, table))
                .fold(f64::INFINITY, f64::min);
            if dist > worst {
                worst = dist;
                witness = (member, h, 0, 0);
            }
        };
        for (mi, p) in class.members.iter().enumerate() {
            match kind {
                CompletenessKind::Star => {
                    let b = bellman_backup_dist(mdp, BackupKind::Star, p, h, None);
                    consider(&b, mi);
                }
                CompletenessKind::PiAll => {
                    for pi in policies {
                        let b = bellman_backup_dist(mdp, BackupKind::Pi, p, h, Some(pi));
                        consider(&b, mi);
                    }
                }
            }
        }
    }
    CompletenessReport {
        holds: worst <= COMPLETENESS_TOL,
        max_violation: worst,
        witness,
    }
}

fn sup_dist_mean(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

fn worst_cell_mean(backup: &[Vec<f64>], slice: &[Vec<Vec<f64>>]) -> (usize, usize) {
    let best_table = slice
        .iter()
        .min_by(|a, b| {
            sup_dist_mean(backup, a)
                .partial_cmp(&sup_dist_mean(backup, b))
                .expect("finite")
        })
        .expect("nonempty slice");
    let mut cell = (0, 0);
    let mut worst = -1.0;
    for (x, row) in backup.iter().enumerate() {
        for (a, &v) in row.iter().enumerate() {
            let d = (v - best_table[x][a]).abs();
            if d > worst {
                worst = d;
                cell = (x, a);
            }
        }
    }
    cell
}

fn sup_dist_hellinger(a: &[Vec<GridDist>], b: &[Vec<GridDist>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| hellinger_sq(x, y)))
        .fold(0.0, f64::max)
}

/// Star-closure mean class on `mdp`: start each step-H slice from the true
/// cost means plus a few random tables, then close every earlier slice under
/// the optimality backup. Members are all slice combinations, so the class
/// is Bellman complete and contains Q*.
pub fn build_star_closure_mean_class(
    mdp: &TabularMdp,
    extras_last: usize,
    extras_mid: usize,
    seed: u64,
) -> RlMeanClass {
    let (hh, xx, aa) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let mut rng = derive_rng(seed, &[0xC1A55]);
    let scale = 1.0 / hh as f64;
    let mut rand_table = |lvl: usize| -> Vec<Vec<f64>> {
        // keep values inside the feasible cost-to-go envelope
        let cap = scale * (hh - lvl) as f64;
        (0..xx)
            .map(|_| (0..aa).map(|_| rng.gen_range(0.0..=cap)).collect())
            .collect()
    };
    let mut slices: Vec<Vec<Vec<Vec<f64>>>> = vec![Vec::new(); hh];
    // last step: the truth plus noise tables
    let mut last = vec![(0..xx)
        .map(|x| (0..aa).map(|a| mdp.mean_cost(hh - 1, x, a)).collect())
        .collect::<Vec<Vec<f64>>>()];
    for _ in 0..extras_last {
        last.push(rand_table(hh - 1));
    }
    slices[hh - 1] = last;
    for h in (0..hh.saturating_sub(1)).rev() {
        let mut cur: Vec<Vec<Vec<f64>>> = Vec::new();
        for g in &slices[h + 1] {
            let mut carrier = FuncTuple::zeros(hh, xx, aa);
            carrier.0[h + 1] = g.clone();
            let b = bellman_backup_mean(mdp, BackupKind::Star, &carrier, h, None);
            if !cur.contains(&b) {
                cur.push(b);
            }
        }
        for _ in 0..extras_mid {
            cur.push(rand_table(h));
        }
        slices[h] = cur;
    }
    // members: product of slices
    let mut combos: Vec<Vec<Vec<Vec<f64>>>> = vec![Vec::new()];
    for level in &slices {
        let mut next = Vec::new();
        for partial in &combos {
            for table in level {
                let mut p = partial.clone();
                p.push(table.clone());
                next.push(p);
            }
        }
        combos = next;
    }
    RlMeanClass {
        members: combos.into_iter().map(FuncTuple).collect(),
    }
}

/// Distributional star-closure class; contains the projected solution of the
/// distributional optimality equations.
pub fn build_star_closure_dist_class(
    mdp: &TabularMdp,
    extras_last: usize,
    seed: u64,
) -> RlDistClass {
    let (hh, xx, aa) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let m = mdp.grid_size();
    let mut rng = derive_rng(seed, &[0xD157]);
    let point0 = GridDist::point_mass(m, 0);
    let mut slices: Vec<Vec<Vec<Vec<GridDist>>>> = vec![Vec::new(); hh];
    let truth_last: Vec<Vec<GridDist>> = (0..xx)
        .map(|x| (0..aa).map(|a| mdp.cost_dist(hh - 1, x, a).clone()).collect())
        .collect();
    let mut last = vec![truth_last];
    for _ in 0..extras_last {
        let cap = m / hh; // stay inside the per-step envelope
        last.push(
            (0..xx)
                .map(|_| {
                    (0..aa)
                        .map(|_| {
                            let k = rng.gen_range(0..=cap);
                            GridDist::point_mass(m, k)
                        })
                        .collect()
                })
                .collect(),
        );
    }
    slices[hh - 1] = last;
    for h in (0..hh.saturating_sub(1)).rev() {
        let mut cur: Vec<Vec<Vec<GridDist>>> = Vec::new();
        for g in &slices[h + 1] {
            let mut carrier = DistTuple(vec![vec![vec![point0.clone(); aa]; xx]; hh]);
            carrier.0[h + 1] = g.clone();
            let b = bellman_backup_dist(mdp, BackupKind::Star, &carrier, h, None);
            if !cur.iter().any(|t| dist_tables_equal(t, &b)) {
                cur.push(b);
            }
        }
        slices[h] = cur;
    }
    let mut combos: Vec<Vec<Vec<Vec<GridDist>>>> = vec![Vec::new()];
    for level in &slices {
        let mut next = Vec::new();
        for partial in &combos {
            for table in level {
                let mut p = partial.clone();
                p.push(table.clone());
                next.push(p);
            }
        }
        combos = next;
    }
    RlDistClass {
        members: combos.into_iter().map(DistTuple).collect(),
    }
}

/// {Q^pi} class closed under policy improvement: starting from pi* and a few
/// random policies, greedy(Q^pi) chains are followed until no new policy
/// appears. Every greedy policy of a member is again in the policy set, and
/// each Q^pi is self-consistent under its own backup.
pub fn build_policy_q_class(
    mdp: &TabularMdp,
    extra_policies: usize,
    seed: u64,
) -> (RlMeanClass, Vec<Policy>) {
    let (hh, xx, aa) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let mut rng = derive_rng(seed, &[0x901]);
    let (_, pistar, _) = exact_q_star(mdp);
    let mut policies = vec![pistar];
    for _ in 0..extra_policies {
        let act = (0..hh)
            .map(|_| (0..xx).map(|_| rng.gen_range(0..aa)).collect())
            .collect();
        let pi = Policy::deterministic(act);
        if !policies.contains(&pi) {
            policies.push(pi);
        }
    }
    // close under policy improvement (terminates: improvement is monotone)
    let mut i = 0;
    while i < policies.len() {
        let q = exact_q_pi(mdp, &policies[i]);
        let improved = q.greedy();
        if !policies.contains(&improved) {
            policies.push(improved);
        }
        i += 1;
        assert!(policies.len() <= 4096, "policy closure exploded");
    }
    let members = policies.iter().map(|pi| exact_q_pi(mdp, pi)).collect();
    (RlMeanClass { members }, policies)
}

/// Distributional analog of [`build_policy_q_class`]: members are projected
/// Z^pi tuples over the improvement closure.
pub fn build_policy_z_class(
    mdp: &TabularMdp,
    extra_policies: usize,
    seed: u64,
) -> (RlDistClass, Vec<Policy>) {
    let (mean_class, policies) = build_policy_q_class(mdp, extra_policies, seed);
    drop(mean_class);
    let members = policies.iter().map(|pi| exact_return_dist(mdp, pi)).collect();
    (RlDistClass { members }, policies)
}

/// Exact eluder dimension by exhaustive search.
///
/// `psi` holds each function's values over the finite ground set; `mus` holds
/// distributions over the same set. The dimension is the length of the
/// longest sequence of distributions such that, for a single threshold
/// eps >= eps0 shared across the sequence, every element is "surprising":
/// some function exceeds eps on it while its accumulated q-th powers on the
/// prefix stay at most eps^q. Only thresholds in {|E_mu psi|} u {eps0}
/// change the feasibility structure, so the search sweeps exactly those.
pub fn eluder_dim_bruteforce(
    psi: &[Vec<f64>],
    mus: &[Vec<f64>],
    eps0: f64,
    q: u32,
    budget: usize,
) -> Result<usize> {
    assert!(eps0 > 0.0);
    assert!(q == 1 || q == 2);
    if psi.is_empty() || mus.is_empty() {
        return Ok(0);
    }
    // expectation matrix e[mu][psi]
    let e: Vec<Vec<f64>> = mus
        .iter()
        .map(|mu| {
            psi.iter()
                .map(|f| mu.iter().zip(f).map(|(w, v)| w * v).sum::<f64>().abs())
                .collect()
        })
        .collect();
    let mut thresholds: Vec<f64> = e.iter().flatten().cloned().filter(|&v| v >= eps0).collect();
    thresholds.push(eps0);
    thresholds.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    thresholds.dedup();

    let mut best = 0usize;
    let mut nodes = 0usize;
    for &eps in &thresholds {
        let mut sums = vec![0.0; psi.len()];
        let mut depth_best = 0usize;
        dfs(&e, mus.len(), eps, q, &mut sums, 0, &mut depth_best, &mut nodes, budget)?;
        best = best.max(depth_best);
    }
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    e: &[Vec<f64>],
    n_mus: usize,
    eps: f64,
    q: u32,
    sums: &mut [f64],
    depth: usize,
    best: &mut usize,
    nodes: &mut usize,
    budget: usize,
) -> Result<()> {
    *best = (*best).max(depth);
    for mu in 0..n_mus {
        // a witness function must exceed eps on mu with prefix power <= eps^q
        let has_witness = (0..e[0].len())
            .any(|j| e[mu][j] > eps + 1e-15 && sums[j] <= eps.powi(q as i32) + 1e-15);
        if !has_witness {
            continue;
        }
        *nodes += 1;
        if *nodes > budget {
            return Err(Error::EluderBudget { budget });
        }
        // extend: all functions accumulate mu's contribution
        let saved: Vec<f64> = sums.to_vec();
        for (j, s) in sums.iter_mut().enumerate() {
            *s += e[mu][j].powi(q as i32);
        }
        dfs(e, n_mus, eps, q, sums, depth + 1, best, nodes, budget)?;
        sums.copy_from_slice(&saved);
    }
    Ok(())
}

/// Premise and both sides of the pigeonhole ratio bound for a concrete
/// sequence of (function, distribution) pairs drawn from finite sets.
/// Returns `None` when the sequence violates the premise for the given beta.
///
/// The right side follows the peeling argument at threshold eps0 = 1/N:
/// N eps0 + EluDim(eps0) (2E + beta^q ln(E/eps0)), where E is the envelope;
/// when the envelope sits below eps0 the peeled integral is empty and only
/// the N eps0 term remains.
pub struct PigeonholeWitness {
    pub lhs: f64,
    pub rhs: f64,
    pub eluder_dim: usize,
}

pub fn pigeonhole_ratio_check(
    psi: &[Vec<f64>],
    mus: &[Vec<f64>],
    seq: &[(usize, usize)],
    q: u32,
    beta: f64,
    budget: usize,
) -> Result<Option<PigeonholeWitness>> {
    let n = seq.len();
    if n == 0 {
        return Ok(None);
    }
    let expect = |mu: usize, f: usize| -> f64 {
        mus[mu]
            .iter()
            .zip(&psi[f])
            .map(|(w, v)| w * v)
            .sum::<f64>()
            .abs()
    };
    // premise: prefix powers of each element's function stay under beta^q
    for (j, &(fj, _)) in seq.iter().enumerate() {
        let prefix: f64 = seq[..j]
            .iter()
            .map(|&(_, mi)| expect(mi, fj).powi(q as i32))
            .sum();
        if prefix > beta.powi(q as i32) + 1e-12 {
            return Ok(None);
        }
    }
    let lhs: f64 = seq.iter().map(|&(f, mu)| expect(mu, f)).sum();
    let envelope = psi
        .iter()
        .enumerate()
        .flat_map(|(j, _)| (0..mus.len()).map(move |i| (i, j)))
        .map(|(i, j)| expect(i, j))
        .fold(0.0, f64::max);
    let eps0 = 1.0 / n as f64;
    let dim = eluder_dim_bruteforce(psi, mus, eps0, q, budget)?;
    let peeled = if envelope > eps0 {
        dim as f64 * (2.0 * envelope + beta.powi(q as i32) * (envelope / eps0).ln())
    } else {
        0.0
    };
    let rhs = n as f64 * eps0 + peeled;
    Ok(Some(PigeonholeWitness {
        lhs,
        rhs,
        eluder_dim: dim,
    }))
}
