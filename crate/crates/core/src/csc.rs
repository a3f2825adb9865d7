//! Cost-sensitive classification: instances with full cost feedback, ERM
//! learners for all three losses, the pessimistic MLE, and the lower-bound
//! instance constructions.
//!
//! Everything is finite and exact: contexts, actions and hypothesis classes
//! are enumerable, cost distributions live on a shared grid, and learners are
//! pure functions of (data, class) with lowest-index tie-breaking throughout
//! so that runs are reproducible.

use crate::error::{Error, Result};
use crate::grid::GridDist;
use crate::losses::{bce_loss, mle_loss, sq_loss, LossKind};
use crate::rng::derive_rng;
use rand::Rng;

/// Scalar prediction table, indexed [context][action].
pub type MeanTable = Vec<Vec<f64>>;
/// Distributional prediction table, indexed [context][action].
pub type DistTable = Vec<Vec<GridDist>>;
/// Deterministic decision rule, context -> action.
pub type CscPolicy = Vec<usize>;

/// A finite-context CSC problem: context distribution plus a grid cost
/// distribution per (context, action).
#[derive(Debug, Clone)]
pub struct CscInstance {
    context_probs: Vec<f64>,
    cost_dists: Vec<Vec<GridDist>>,
    means: Vec<Vec<f64>>,
    /// Largest snap distance of any constructed atom, for constructions that
    /// place irrational atoms on the grid.
    pub atom_rounding_error: f64,
}

impl CscInstance {
    pub fn new(context_probs: Vec<f64>, cost_dists: Vec<Vec<GridDist>>) -> Result<Self> {
        if context_probs.is_empty() || cost_dists.len() != context_probs.len() {
            return Err(Error::InvalidInstance(
                "context count mismatch between probs and cost table".into(),
            ));
        }
        let total: f64 = context_probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 || context_probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidInstance(format!(
                "context probabilities sum to {total}"
            )));
        }
        let a = cost_dists[0].len();
        if a == 0 {
            return Err(Error::InvalidInstance("no actions".into()));
        }
        let m = cost_dists[0][0].grid_size();
        for row in &cost_dists {
            if row.len() != a {
                return Err(Error::InvalidInstance("ragged action dimension".into()));
            }
            for d in row {
                if d.grid_size() != m {
                    return Err(Error::GridMismatch(d.grid_size(), m));
                }
            }
        }
        let means = cost_dists
            .iter()
            .map(|row| row.iter().map(|d| d.mean()).collect())
            .collect();
        Ok(Self {
            context_probs,
            cost_dists,
            means,
            atom_rounding_error: 0.0,
        })
    }

    pub fn num_contexts(&self) -> usize {
        self.context_probs.len()
    }

    pub fn num_actions(&self) -> usize {
        self.cost_dists[0].len()
    }

    pub fn grid_size(&self) -> usize {
        self.cost_dists[0][0].grid_size()
    }

    pub fn context_probs(&self) -> &[f64] {
        &self.context_probs
    }

    pub fn cost_dist(&self, x: usize, a: usize) -> &GridDist {
        &self.cost_dists[x][a]
    }

    pub fn mean_cost(&self, x: usize, a: usize) -> f64 {
        self.means[x][a]
    }

    /// The true conditional-mean table (the realizable f*).
    pub fn mean_table(&self) -> MeanTable {
        self.means.clone()
    }

    /// The true conditional-distribution table (the realizable C).
    pub fn dist_table(&self) -> DistTable {
        self.cost_dists.clone()
    }
}

/// One sampled row: the context and the realized cost of every action.
#[derive(Debug, Clone)]
pub struct CscRow {
    pub context: usize,
    pub costs: Vec<f64>,
}

/// Full-feedback i.i.d. dataset.
#[derive(Debug, Clone)]
pub struct CscDataset {
    pub rows: Vec<CscRow>,
}

/// Finite class of scalar prediction tables.
#[derive(Debug, Clone)]
pub struct MeanClass {
    pub members: Vec<MeanTable>,
}

/// Finite class of distributional prediction tables on a shared grid.
#[derive(Debug, Clone)]
pub struct CscDistClass {
    pub members: Vec<DistTable>,
}

/// Draw `n` i.i.d. rows with costs for every action. Deterministic in `seed`.
pub fn sample_dataset(inst: &CscInstance, n: usize, seed: u64) -> CscDataset {
    assert!(n >= 1);
    let mut rng = derive_rng(seed, &[]);
    // compact support lists so huge grids sample in O(atoms)
    let supports: Vec<Vec<Vec<(f64, f64)>>> = (0..inst.num_contexts())
        .map(|x| {
            (0..inst.num_actions())
                .map(|a| {
                    let d = inst.cost_dist(x, a);
                    d.support()
                        .into_iter()
                        .map(|(k, w)| (d.value(k), w))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let ux: f64 = rng.gen();
        let mut cum = 0.0;
        let mut x = inst.num_contexts() - 1;
        for (i, &p) in inst.context_probs.iter().enumerate() {
            cum += p;
            if ux < cum {
                x = i;
                break;
            }
        }
        let costs = (0..inst.num_actions())
            .map(|a| {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let atoms = &supports[x][a];
                for &(v, w) in atoms {
                    acc += w;
                    if u < acc {
                        return v;
                    }
                }
                atoms.last().expect("nonempty support").0
            })
            .collect();
        rows.push(CscRow { context: x, costs });
    }
    CscDataset { rows }
}

/// Total empirical loss of a scalar prediction table over all rows and
/// actions.
pub fn empirical_mean_loss(f: &MeanTable, data: &CscDataset, loss: LossKind) -> f64 {
    let mut total = 0.0;
    for row in &data.rows {
        let preds = &f[row.context];
        for (a, &c) in row.costs.iter().enumerate() {
            total += match loss {
                LossKind::Sq => sq_loss(preds[a], c),
                LossKind::Bce => bce_loss(preds[a], c),
                LossKind::Mle => panic!("mle scores distributional hypotheses; use mle_fit"),
            };
        }
    }
    total
}

/// Empirical risk minimization over a mean class with the squared or bce
/// loss. Ties break to the lowest member index.
pub fn erm(class: &MeanClass, data: &CscDataset, loss: LossKind) -> usize {
    assert!(
        matches!(loss, LossKind::Sq | LossKind::Bce),
        "erm works on scalar losses"
    );
    assert!(!data.rows.is_empty());
    argmin_by_key(&class.members, |f| empirical_mean_loss(f, data, loss))
}

/// Total empirical negative log-likelihood of a distributional table.
pub fn mle_total_loss(p: &DistTable, data: &CscDataset) -> f64 {
    let mut total = 0.0;
    for row in &data.rows {
        let preds = &p[row.context];
        for (a, &c) in row.costs.iter().enumerate() {
            total += mle_loss(&preds[a], c);
        }
    }
    total
}

/// Maximum-likelihood fit: argmin of the empirical negative log-likelihood.
pub fn mle_fit(class: &CscDistClass, data: &CscDataset) -> usize {
    assert!(!data.rows.is_empty());
    argmin_by_key(&class.members, |p| mle_total_loss(p, data))
}

/// Members within `beta` of the best empirical log-likelihood. Always
/// contains the `mle_fit` index.
pub fn mle_version_space(class: &CscDistClass, data: &CscDataset, beta: f64) -> Vec<usize> {
    assert!(beta >= 0.0);
    let losses: Vec<f64> = class
        .members
        .iter()
        .map(|p| mle_total_loss(p, data))
        .collect();
    let best = losses.iter().cloned().fold(f64::INFINITY, f64::min);
    losses
        .iter()
        .enumerate()
        .filter(|(_, &l)| l - best <= beta)
        .map(|(i, _)| i)
        .collect()
}

/// The version-space threshold 2 A ln(A |class| / delta).
pub fn lemma_beta_csc(num_actions: usize, class_size: usize, delta: f64) -> f64 {
    2.0 * num_actions as f64 * ((num_actions * class_size) as f64 / delta).ln()
}

/// Pessimistic MLE: among near-optimal likelihood members, pick the one whose
/// per-row best-case mean cost is largest (under cost minimization that is
/// the most conservative view of the achievable cost). Ties break to the
/// lowest member index.
pub fn pessimistic_mle(class: &CscDistClass, data: &CscDataset, beta: f64) -> usize {
    let space = mle_version_space(class, data, beta);
    let mut best_idx = space[0];
    let mut best_score = f64::NEG_INFINITY;
    for &i in &space {
        let member = &class.members[i];
        let mut score = 0.0;
        for row in &data.rows {
            let means = member[row.context].iter().map(|d| d.mean());
            score += means.fold(f64::INFINITY, f64::min);
        }
        if score > best_score {
            best_score = score;
            best_idx = i;
        }
    }
    best_idx
}

/// Greedy policy, per-context argmin with lowest-index ties.
pub fn greedy_policy(f: &MeanTable) -> CscPolicy {
    f.iter()
        .map(|row| argmin_by_key(row, |&v| v))
        .collect()
}

/// Mean-table view of a distributional table.
pub fn means_of(p: &DistTable) -> MeanTable {
    p.iter()
        .map(|row| row.iter().map(|d| d.mean()).collect())
        .collect()
}

/// V(pi) = E_x mean cost(x, pi(x)), an exact finite sum.
pub fn policy_value(inst: &CscInstance, pi: &CscPolicy) -> f64 {
    inst.context_probs
        .iter()
        .enumerate()
        .map(|(x, &dx)| dx * inst.mean_cost(x, pi[x]))
        .sum()
}

/// Optimal value and the optimal policy's cost variance. Contexts decouple,
/// so the optimum is the per-context argmin; the variance is the total
/// variance of the scalar cost c(pi*(x)) under (x, c) jointly.
pub fn optimal_value(inst: &CscInstance) -> (f64, f64) {
    let pi = optimal_policy(inst);
    let vstar = policy_value(inst, &pi);
    let mut within = 0.0;
    let mut second = 0.0;
    for (x, &dx) in inst.context_probs.iter().enumerate() {
        let d = inst.cost_dist(x, pi[x]);
        within += dx * d.variance();
        second += dx * inst.mean_cost(x, pi[x]).powi(2);
    }
    let across = (second - vstar * vstar).max(0.0);
    (vstar, (within + across).max(0.0))
}

/// Per-context argmin of the true means.
pub fn optimal_policy(inst: &CscInstance) -> CscPolicy {
    greedy_policy(&inst.mean_table())
}

fn argmin_by_key<T, F: FnMut(&T) -> f64>(items: &[T], mut key: F) -> usize {
    assert!(!items.is_empty());
    let mut best = 0;
    let mut best_val = key(&items[0]);
    for (i, it) in items.iter().enumerate().skip(1) {
        let v = key(it);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    best
}

/// Pick the counterexample grid: exact when sqrt(n) is an integer (the atoms
/// 1/(8 sqrt n) and 1/2 then sit on grid points), otherwise a fine fixed grid
/// with atoms snapped to the nearest point.
fn counterexample_grid(n: u64) -> usize {
    let r = (n as f64).sqrt().round() as u64;
    if r * r == n {
        (8 * r) as usize
    } else {
        1_000_000
    }
}

fn point_at(m: usize, v: f64) -> GridDist {
    let k = ((v * m as f64).round() as usize).min(m);
    GridDist::point_mass(m, k)
}

/// Heteroskedastic two-context instance on which squared-loss ERM keeps
/// Theta(1/sqrt n) regret despite the optimal cost being O(1/n): a rare
/// context carries all the cost variance and dominates the empirical squared
/// risk. Returns the instance and the two-member realizable class
/// [truth, imposter].
pub fn build_sq_counterexample(n: u64) -> Result<(CscInstance, MeanClass)> {
    if n <= 400 {
        return Err(Error::BadCounterexampleSize {
            requirement: "n > 400",
            n,
        });
    }
    let nf = n as f64;
    let mu = 1.0 / (8.0 * nf);
    let nu = 1.0 / (8.0 * nf.sqrt());
    let eps = 1.0 / (4.0 * nf.sqrt());
    let m = counterexample_grid(n);

    let cost_dists = vec![
        vec![GridDist::bernoulli(m, mu), point_at(m, nu)],
        vec![GridDist::bernoulli(m, 0.5), point_at(m, 0.5)],
    ];
    let rounding = GridDist::atom_rounding_error(m, &[(nu, 1.0), (0.5, 1.0)]);
    let mut inst = CscInstance::new(vec![1.0 - 1.0 / nf, 1.0 / nf], cost_dists)?;
    inst.atom_rounding_error = rounding;

    let truth = inst.mean_table();
    let mut imposter = truth.clone();
    imposter[0][0] = eps;
    imposter[1][0] = 0.0;
    Ok((inst, MeanClass { members: vec![truth, imposter] }))
}

/// Single-context instance whose optimal action has zero cost variance while
/// the other action is a fair-ish coin; mean-based ERM (bce or sq) picks the
/// tied imposter with constant probability, paying the 1/(8 sqrt n) gap.
pub fn build_bce_counterexample(n: u64) -> Result<(CscInstance, MeanClass)> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::BadCounterexampleSize {
            requirement: "odd n",
            n,
        });
    }
    let eps = 1.0 / (8.0 * (n as f64).sqrt());
    // atoms are only {0, 1/2, 1}
    let m = 2;
    let cost_dists = vec![vec![
        GridDist::bernoulli(m, 0.5 + eps),
        GridDist::point_mass(m, 1),
    ]];
    let inst = CscInstance::new(vec![1.0], cost_dists)?;
    let truth = inst.mean_table();
    let imposter = vec![vec![0.5, 0.5]];
    Ok((inst, MeanClass { members: vec![truth, imposter] }))
}

/// Small-cost rate family: the heteroskedastic construction above extended
/// with a third, constant-probability context whose two arms race at the
/// 1/n scale. The extra race gives bce-ERM a positive ln(n)/n-sized error
/// floor (so its rate is measurable) without disturbing the sq trap.
/// Class order: [truth, sq-imposter, race-imposter].
pub fn build_small_cost_rate_family(n: u64) -> Result<(CscInstance, MeanClass)> {
    if n <= 400 {
        return Err(Error::BadCounterexampleSize {
            requirement: "n > 400",
            n,
        });
    }
    let nf = n as f64;
    let theta = 0.25;
    let mu = 1.0 / (8.0 * nf);
    let nu = 1.0 / (8.0 * nf.sqrt());
    let eps = 1.0 / (4.0 * nf.sqrt());
    let s = 1.0 / nf;
    let g = 1.0 / nf;
    let m = counterexample_grid(n);

    let cost_dists = vec![
        vec![GridDist::bernoulli(m, mu), point_at(m, nu)],
        vec![GridDist::bernoulli(m, 0.5), point_at(m, 0.5)],
        vec![GridDist::bernoulli(m, s), GridDist::bernoulli(m, s + g)],
    ];
    let rounding = GridDist::atom_rounding_error(m, &[(nu, 1.0), (0.5, 1.0)]);
    let mut inst = CscInstance::new(
        vec![1.0 - 1.0 / nf - theta, 1.0 / nf, theta],
        cost_dists,
    )?;
    inst.atom_rounding_error = rounding;

    let truth = inst.mean_table();
    let mut sq_imposter = truth.clone();
    sq_imposter[0][0] = eps;
    sq_imposter[1][0] = 0.0;
    let mut race_imposter = truth.clone();
    race_imposter[2][0] = s + 2.0 * g;
    Ok((
        inst,
        MeanClass { members: vec![truth, sq_imposter, race_imposter] },
    ))
}

/// Zero-variance / large-cost rate family: the optimal arm is deterministic
/// at cost 1/2, one arm is a coin with a 1/(8 sqrt n) edge (the mean-ERM
/// trap), and one deterministic arm sits a 1/(2n) gap above the optimum.
///
/// The mean class carries the coin-flip imposter that mean-based ERM falls
/// for. The distribution class carries, besides the truth and the
/// distributional analog of that imposter, a pessimism trap: a member that
/// inflates the deterministic optimal arm by Theta(1/n) — as much as a
/// likelihood version space ever tolerates on deterministic data — and
/// thereby steers pessimistic MLE to the 1/(2n)-gap arm. Mean-based ERM pays
/// ~ eps_n with constant probability; pessimistic MLE pays exactly 1/(2n).
pub fn build_zero_variance_rate_family(
    n: u64,
) -> Result<(CscInstance, MeanClass, CscDistClass)> {
    if n < 32 {
        return Err(Error::BadCounterexampleSize {
            requirement: "n >= 32",
            n,
        });
    }
    let nf = n as f64;
    let eps = 1.0 / (8.0 * nf.sqrt());
    let m = 2 * n as usize; // atoms 1/2 = n/2n and 1/2 + 1/(2n) = (n+1)/2n are exact
    let lambda = 1.0 / (2.0 * nf);
    let gamma = 2.0 / nf;

    let opt = GridDist::point_mass(m, n as usize);
    let coin = GridDist::bernoulli(m, 0.5 + eps);
    let near = GridDist::point_mass(m, n as usize + 1);
    let inst = CscInstance::new(vec![1.0], vec![vec![opt.clone(), coin.clone(), near.clone()]])?;
    debug_assert!((inst.mean_cost(0, 2) - (0.5 + lambda)).abs() < 1e-15);

    let truth = inst.mean_table();
    let mut coin_imposter = truth.clone();
    coin_imposter[0][1] = 0.5 - eps;
    let mean_class = MeanClass { members: vec![truth, coin_imposter] };

    let dist_truth = inst.dist_table();
    let dist_coin_imposter = vec![vec![
        opt.clone(),
        GridDist::bernoulli(m, 0.5),
        near.clone(),
    ]];
    let mut inflated = vec![0.0; m + 1];
    inflated[n as usize] = 1.0 - gamma;
    inflated[m] = gamma;
    let dist_pessimism_trap = vec![vec![
        GridDist::new(inflated)?,
        coin.clone(),
        near.clone(),
    ]];
    let dist_class = CscDistClass {
        members: vec![dist_truth, dist_coin_imposter, dist_pessimism_trap],
    };
    Ok((inst, mean_class, dist_class))
}

/// Random small instance for tests: Dirichlet-ish context weights and random
/// sparse cost distributions.
pub fn test_instance(contexts: usize, actions: usize, m: usize, seed: u64) -> CscInstance {
    let mut rng = derive_rng(seed, &[0xC5C]);
    let mut probs: Vec<f64> = (0..contexts).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let dists = (0..contexts)
        .map(|_| {
            (0..actions)
                .map(|_| crate::grid::random_dist(m, &mut rng))
                .collect()
        })
        .collect();
    CscInstance::new(probs, dists).expect("random instance is valid")
}
