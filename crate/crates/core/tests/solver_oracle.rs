//! Value iteration against an exact solve: enumerate every deterministic
//! policy, evaluate each with Gaussian elimination, take the pointwise max.

use mariomix_core::solver::{ActionModel, SolverConfig, TabularMdp, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_mdp(rng: &mut ChaCha8Rng) -> TabularMdp {
    let n = rng.random_range(1..=5);
    let actions = (0..n)
        .map(|_| {
            let k = rng.random_range(1..=3);
            (0..k)
                .map(|action| {
                    let mut next = Vec::new();
                    for j in 0..n {
                        if rng.random_bool(0.6) {
                            next.push((Target::State(j), rng.random_range(0.05..1.0)));
                        }
                    }
                    if rng.random_bool(0.4) {
                        next.push((Target::Terminal(rng.random_range(-5.0..5.0)), rng.random_range(0.05..1.0)));
                    }
                    if rng.random_bool(0.2) {
                        next.push((Target::Unvisited, rng.random_range(0.05..1.0)));
                    }
                    if next.is_empty() {
                        next.push((Target::State(rng.random_range(0..n)), 1.0));
                    }
                    let total: f64 = next.iter().map(|(_, p)| p).sum();
                    for (_, p) in &mut next {
                        *p /= total;
                    }
                    ActionModel {
                        action,
                        reward: rng.random_range(-3.0..3.0),
                        next,
                    }
                })
                .collect()
        })
        .collect();
    TabularMdp { actions }
}

/// Solves `a x = b` in place with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn evaluate(mdp: &TabularMdp, choice: &[usize], gamma: f64) -> Vec<f64> {
    let n = mdp.num_states();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for s in 0..n {
        a[s][s] = 1.0;
        let am = &mdp.actions[s][choice[s]];
        b[s] = am.reward;
        for &(t, p) in &am.next {
            match t {
                Target::State(j) => a[s][j] -= gamma * p,
                Target::Terminal(r) => b[s] += p * r,
                Target::Unvisited => {}
            }
        }
    }
    gauss(a, b)
}

fn brute_force(mdp: &TabularMdp, gamma: f64) -> Vec<f64> {
    let n = mdp.num_states();
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut choice = vec![0; n];
    loop {
        for (b, v) in best.iter_mut().zip(evaluate(mdp, &choice, gamma)) {
            *b = b.max(v);
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            choice[i] += 1;
            if choice[i] < mdp.actions[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn matches_exhaustive_policy_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let config = SolverConfig {
        gamma: 0.95,
        epsilon: 1e-10,
        max_iterations: 100_000,
    };
    for case in 0..200 {
        let mdp = random_mdp(&mut rng);
        let exact = brute_force(&mdp, config.gamma);
        let sol = mdp.solve(&config);
        assert!(sol.converged, "case {case}");
        for (s, (v, e)) in sol.values.iter().zip(&exact).enumerate() {
            assert!((v - e).abs() < 1e-6, "case {case} state {s}: {v} vs {e}");
        }
        // the greedy action attains the optimum
        for s in 0..mdp.num_states() {
            let (i, q) = mdp.greedy_choice(s, &exact, config.gamma);
            assert_eq!(i, sol.greedy[s], "case {case} state {s}");
            assert!((q - exact[s]).abs() < 1e-6);
        }
    }
}

#[test]
fn two_state_chain_closed_form() {
    // s0 -a-> s1 (r = 0), s1 -a-> s1 (r = 1): V1 = 1/(1-g), V0 = g V1
    let mdp = TabularMdp {
        actions: vec![
            vec![ActionModel {
                action: 0,
                reward: 0.0,
                next: vec![(Target::State(1), 1.0)],
            }],
            vec![ActionModel {
                action: 0,
                reward: 1.0,
                next: vec![(Target::State(1), 1.0)],
            }],
        ],
    };
    let config = SolverConfig {
        gamma: 0.9,
        epsilon: 1e-13,
        max_iterations: 100_000,
    };
    let sol = mdp.solve(&config);
    assert!((sol.values[1] - 10.0).abs() < 1e-9);
    assert!((sol.values[0] - 9.0).abs() < 1e-9);
}
