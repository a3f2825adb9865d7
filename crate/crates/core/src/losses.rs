//! The three regression losses and their population excess risks on
//! cost-sensitive classification instances.
//!
//! `sq` and `bce` score scalar predictions; `mle` scores a distributional
//! prediction. All instance-level risks are exact finite sums over the
//! instance tables, never Monte Carlo.

use crate::csc::{CscInstance, DistTable, MeanTable};
use crate::grid::{bernoulli_hellinger_sq, hellinger_sq, GridDist};
use serde::{Deserialize, Serialize};

/// Clamp for predictions inside logs; exact zeros only arise from
/// misspecified hypotheses, and clamping keeps empirical risks finite.
pub const CLAMP_EPS: f64 = 1e-12;

/// Which regression loss a learner minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Sq,
    Bce,
    Mle,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossKind::Sq => write!(f, "sq"),
            LossKind::Bce => write!(f, "bce"),
            LossKind::Mle => write!(f, "mle"),
        }
    }
}

/// Squared loss (pred - target)^2.
pub fn sq_loss(pred: f64, target: f64) -> f64 {
    let d = pred - target;
    d * d
}

/// Binary cross-entropy -y ln p - (1-y) ln(1-p). The target need not be
/// binary; the prediction is clamped into [eps, 1-eps] so endpoint
/// predictions stay finite (with the 0 ln 0 = 0 convention).
pub fn bce_loss(pred: f64, target: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&target), "bce target {target}");
    let p = pred.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS);
    let mut loss = 0.0;
    if target > 0.0 {
        loss -= target * p.ln();
    }
    if target < 1.0 {
        loss -= (1.0 - target) * (1.0 - p).ln();
    }
    loss
}

/// Negative log-likelihood -ln p(y), with the mass at y's grid point floored
/// at eps before the log.
pub fn mle_loss(pred: &GridDist, target: f64) -> f64 {
    -pred.mass_at(target).max(CLAMP_EPS).ln()
}

/// Excess squared-loss risk: sum_a E_x (f(x,a) - mean cost(x,a))^2,
/// computed exactly from the instance tables.
pub fn excess_sq_risk(f: &MeanTable, inst: &CscInstance) -> f64 {
    let mut total = 0.0;
    for x in 0..inst.num_contexts() {
        let dx = inst.context_probs()[x];
        for a in 0..inst.num_actions() {
            total += dx * sq_loss(f[x][a], inst.mean_cost(x, a));
        }
    }
    total
}

/// sum_a E_x h^2_Ber(mean cost(x,a), f(x,a)).
pub fn delta_ber(f: &MeanTable, inst: &CscInstance) -> f64 {
    let mut total = 0.0;
    for x in 0..inst.num_contexts() {
        let dx = inst.context_probs()[x];
        for a in 0..inst.num_actions() {
            total += dx * bernoulli_hellinger_sq(inst.mean_cost(x, a), f[x][a]);
        }
    }
    total
}

/// sum_a E_x h^2(cost dist(x,a), p(x,a)).
pub fn delta_dis(p: &DistTable, inst: &CscInstance) -> f64 {
    let mut total = 0.0;
    for x in 0..inst.num_contexts() {
        let dx = inst.context_probs()[x];
        for a in 0..inst.num_actions() {
            total += dx * hellinger_sq(inst.cost_dist(x, a), &p[x][a]);
        }
    }
    total
}

/// Exponentiated excess bce risk
/// -sum_a ln E[exp(bce(truth,c)/2 - bce(f,c)/2)], the expectation running
/// jointly over the context and the realized cost. Always >= delta_ber.
pub fn exponentiated_excess_bce(f: &MeanTable, inst: &CscInstance) -> f64 {
    let mut total = 0.0;
    for a in 0..inst.num_actions() {
        let mut inner = 0.0;
        for x in 0..inst.num_contexts() {
            let dx = inst.context_probs()[x];
            let truth = inst.mean_cost(x, a);
            let dist = inst.cost_dist(x, a);
            for (k, w) in dist.support() {
                let y = dist.value(k);
                inner += dx * w * (0.5 * bce_loss(truth, y) - 0.5 * bce_loss(f[x][a], y)).exp();
            }
        }
        total -= inner.ln();
    }
    total
}

/// Exponentiated excess mle risk. For each action this is
/// -ln E_x[ Bhattacharyya(cost dist(x,a), p(x,a)) ], computed exactly;
/// +infinity when the hypothesis misses the entire support. Always >=
/// delta_dis.
pub fn exponentiated_excess_mle(p: &DistTable, inst: &CscInstance) -> f64 {
    let mut total = 0.0;
    for a in 0..inst.num_actions() {
        let mut inner = 0.0;
        for x in 0..inst.num_contexts() {
            let dx = inst.context_probs()[x];
            let truth = inst.cost_dist(x, a);
            let hyp = &p[x][a];
            let bc: f64 = truth
                .mass()
                .iter()
                .zip(hyp.mass())
                .map(|(&c, &q)| (c * q).sqrt())
                .sum();
            inner += dx * bc;
        }
        total += if inner > 0.0 { -inner.ln() } else { f64::INFINITY };
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csc;
    use crate::rng::derive_rng;
    use rand::Rng;

    #[test]
    fn sq_loss_examples() {
        assert_eq!(sq_loss(0.0, 0.0), 0.0);
        assert_eq!(sq_loss(1.0, 0.0), 1.0);
        assert!((sq_loss(0.3, 0.5) - 0.04).abs() < 1e-15);
    }

    #[test]
    fn bce_loss_examples() {
        assert!(bce_loss(1.0, 1.0) < 1e-10);
        assert!((bce_loss(0.5, 1.0) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((bce_loss(0.5, 0.5) - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn mle_loss_examples() {
        let m = 100;
        let p = GridDist::point_mass(m, 40);
        assert_eq!(mle_loss(&p, 0.4), 0.0);
        let u = GridDist::uniform(m);
        assert!((mle_loss(&u, 0.17) - (101f64).ln()).abs() < 1e-12);
        let b = GridDist::bernoulli(m, 0.25);
        assert!((mle_loss(&b, 1.0) - (-(0.25f64).ln())).abs() < 1e-12);
    }

    /// Expected mle loss of a Bernoulli prediction on a Bernoulli target
    /// equals the bce loss; bce is linear in the target.
    #[test]
    fn bernoulli_bridge() {
        let mut rng = derive_rng(5, &[0]);
        for _ in 0..100 {
            let p: f64 = rng.gen_range(0.0..=1.0);
            let yhat: f64 = rng.gen_range(0.01..=0.99);
            let pred = GridDist::bernoulli(10, yhat);
            let expected_mle = p * mle_loss(&pred, 1.0) + (1.0 - p) * mle_loss(&pred, 0.0);
            let direct = p * (-yhat.ln()) + (1.0 - p) * (-(1.0 - yhat).ln());
            assert!((expected_mle - direct).abs() < 1e-12);
            assert!((expected_mle - bce_loss(yhat, p)).abs() < 1e-12);
        }
    }

    /// E_{y~p}[bce(f,y) - bce(mean p, y)] >= 2 (f - mean p)^2 for f away from
    /// the endpoints.
    #[test]
    fn bce_strong_convexity_around_mean() {
        for i in 0..=100 {
            let pbar = i as f64 / 100.0;
            for j in 1..100 {
                let f = j as f64 / 100.0;
                if !(0.01..=0.99).contains(&f) {
                    continue;
                }
                let excess = pbar * (bce_loss(f, 1.0) - bce_loss(pbar, 1.0))
                    + (1.0 - pbar) * (bce_loss(f, 0.0) - bce_loss(pbar, 0.0));
                assert!(
                    excess + 1e-10 >= 2.0 * (f - pbar) * (f - pbar),
                    "pbar={pbar} f={f} excess={excess}"
                );
            }
        }
    }

    #[test]
    fn risks_vanish_at_truth() {
        let inst = csc::test_instance(3, 2, 20, 7);
        let truth_means = inst.mean_table();
        let truth_dists: crate::csc::DistTable = (0..inst.num_contexts())
            .map(|x| {
                (0..inst.num_actions())
                    .map(|a| inst.cost_dist(x, a).clone())
                    .collect()
            })
            .collect();
        assert!(excess_sq_risk(&truth_means, &inst) < 1e-15);
        assert!(delta_ber(&truth_means, &inst) < 1e-15);
        assert!(delta_dis(&truth_dists, &inst) < 1e-15);
        assert!(exponentiated_excess_bce(&truth_means, &inst).abs() < 1e-9);
        assert!(exponentiated_excess_mle(&truth_dists, &inst).abs() < 1e-9);
    }

    #[test]
    fn excess_sq_risk_direct_case() {
        // single context, single action, f - truth = 0.1 -> 0.01
        let inst = csc::CscInstance::new(
            vec![1.0],
            vec![vec![GridDist::bernoulli(10, 0.5)]],
        )
        .unwrap();
        let f = vec![vec![0.6]];
        assert!((excess_sq_risk(&f, &inst) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn delta_ber_disjoint_case() {
        // one context, truth mean 0, f = 1 -> h^2 = 1
        let inst = csc::CscInstance::new(
            vec![1.0],
            vec![vec![GridDist::point_mass(10, 0)]],
        )
        .unwrap();
        let f = vec![vec![1.0]];
        assert!((delta_ber(&f, &inst) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_dis_disjoint_supports() {
        // two actions, hypothesis disjoint from truth everywhere -> 2
        let inst = csc::CscInstance::new(
            vec![1.0],
            vec![vec![GridDist::point_mass(10, 0), GridDist::point_mass(10, 2)]],
        )
        .unwrap();
        let p = vec![vec![GridDist::point_mass(10, 10), GridDist::point_mass(10, 7)]];
        assert!((delta_dis(&p, &inst) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn excess_sq_risk_matches_monte_carlo() {
        let inst = csc::test_instance(2, 2, 16, 3);
        let mut rng = derive_rng(9, &[1]);
        let f: MeanTable = (0..2)
            .map(|_| (0..2).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let exact = excess_sq_risk(&f, &inst);

        // Monte Carlo of the defining expectation
        let n = 200_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..n {
            let x = {
                let u: f64 = rng.gen();
                let mut cum = 0.0;
                let mut pick = 0;
                for (i, &p) in inst.context_probs().iter().enumerate() {
                    cum += p;
                    if u < cum {
                        pick = i;
                        break;
                    }
                }
                pick
            };
            let mut z = 0.0;
            for a in 0..2 {
                let c = inst.cost_dist(x, a).sample_value(&mut rng);
                z += sq_loss(f[x][a], c) - sq_loss(inst.mean_cost(x, a), c);
            }
            acc += z;
            acc2 += z * z;
        }
        let mean = acc / n as f64;
        let se = ((acc2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!(
            (exact - mean).abs() <= 3.0 * se + 1e-9,
            "exact {exact} vs mc {mean} (se {se})"
        );
    }

    /// Lemma bounds: delta_ber <= exponentiated bce excess and
    /// delta_dis <= exponentiated mle excess, plus nonnegativity.
    #[test]
    fn exponentiated_excess_dominates_hellinger_risks() {
        let mut rng = derive_rng(21, &[2]);
        for trial in 0..300 {
            let inst = csc::test_instance(3, 2, 12, 1000 + trial);
            let f: MeanTable = (0..3)
                .map(|_| (0..2).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let eb = exponentiated_excess_bce(&f, &inst);
            assert!(eb >= -1e-10);
            assert!(delta_ber(&f, &inst) <= eb + 1e-9);

            let p: DistTable = (0..3)
                .map(|_| {
                    (0..2)
                        .map(|_| crate::grid::random_dist(12, &mut rng))
                        .collect()
                })
                .collect();
            let em = exponentiated_excess_mle(&p, &inst);
            assert!(em >= -1e-10);
            assert!(delta_dis(&p, &inst) <= em + 1e-9);
        }
    }
}
