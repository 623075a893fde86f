//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risk_perception::distdp::{AbstractedPerceptionMdp, Axis, Grid};

/// Tabular MDP on integer-labelled states and errors with integer costs, so
/// every return lands on an atom of an integer cost support.
#[derive(Debug, Clone)]
pub struct MicroMdp {
    pub n_states: usize,
    pub n_errors: usize,
    pub time_steps: usize,
    /// `policy[t][s][e]`
    pub policy: Vec<Vec<Vec<f64>>>,
    /// `next[t][s][e]` = list of (next state, prob)
    pub next: Vec<Vec<Vec<Vec<(usize, f64)>>>>,
    /// `cost[t][s][e]`
    pub cost: Vec<Vec<Vec<u32>>>,
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

impl MicroMdp {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_states = rng.random_range(2..=5);
        let n_errors = rng.random_range(1..=3);
        let time_steps = rng.random_range(1..=4);
        let mut policy = Vec::new();
        let mut next = Vec::new();
        let mut cost = Vec::new();
        for _ in 0..time_steps {
            let mut pt = Vec::new();
            let mut nt = Vec::new();
            let mut ct = Vec::new();
            for _ in 0..n_states {
                pt.push(random_simplex(&mut rng, n_errors));
                let mut ns = Vec::new();
                let mut cs = Vec::new();
                for _ in 0..n_errors {
                    let branches = rng.random_range(1..=n_states.min(3));
                    let probs = random_simplex(&mut rng, branches);
                    let succ: Vec<(usize, f64)> = probs
                        .into_iter()
                        .map(|p| (rng.random_range(0..n_states), p))
                        .collect();
                    ns.push(succ);
                    cs.push(rng.random_range(0..=3));
                }
                nt.push(ns);
                ct.push(cs);
            }
            policy.push(pt);
            next.push(nt);
            cost.push(ct);
        }
        Self {
            n_states,
            n_errors,
            time_steps,
            policy,
            next,
            cost,
        }
    }

    pub fn max_return(&self) -> u32 {
        3 * self.time_steps as u32
    }

    pub fn support(&self) -> Vec<f64> {
        (0..=self.max_return()).map(f64::from).collect()
    }

    pub fn to_mdp(&self) -> AbstractedPerceptionMdp {
        let grid = Grid::new(vec![Axis::continuous(
            "s",
            (0..self.n_states).map(|i| i as f64).collect(),
        )
        .unwrap()])
        .unwrap();
        let errors = Grid::new(vec![Axis::discrete(
            "e",
            (0..self.n_errors).map(|i| i as f64).collect(),
        )
        .unwrap()])
        .unwrap();
        let me = Arc::new(self.clone());
        let (m1, m2, m3) = (me.clone(), me.clone(), me);
        AbstractedPerceptionMdp::new(
            grid,
            errors,
            self.time_steps,
            move |t, s| m1.policy[t][s[0] as usize].clone(),
            move |t, s, e| {
                m2.next[t][s[0] as usize][e[0] as usize]
                    .iter()
                    .map(|(sp, p)| (vec![*sp as f64], *p))
                    .collect()
            },
            move |t, s, e| f64::from(m3.cost[t][s[0] as usize][e[0] as usize]),
        )
        .unwrap()
    }

    /// Exhaustive enumeration of every trajectory from `(t, s, e)`, returning
    /// the exact law of the undiscounted return as `return -> probability`.
    pub fn enumerate(&self, t: usize, s: usize, e: usize) -> BTreeMap<u32, f64> {
        let mut law = BTreeMap::new();
        let mut stack = vec![(t, s, e, 0u32, 1.0f64)];
        while let Some((t, s, e, acc, p)) = stack.pop() {
            let acc = acc + self.cost[t][s][e];
            if t == 0 {
                *law.entry(acc).or_insert(0.0) += p;
                continue;
            }
            for &(sp, q) in &self.next[t][s][e] {
                for (ep, r) in self.policy[t - 1][sp].iter().enumerate() {
                    stack.push((t - 1, sp, ep, acc, p * q * r));
                }
            }
        }
        law
    }

    /// One sampled return from `(t, s, e)`.
    pub fn rollout(&self, rng: &mut ChaCha8Rng, mut t: usize, mut s: usize, mut e: usize) -> f64 {
        let mut total = 0.0;
        loop {
            total += f64::from(self.cost[t][s][e]);
            if t == 0 {
                return total;
            }
            s = sample_index(rng, self.next[t][s][e].iter().map(|x| x.1))
                .map(|i| self.next[t][s][e][i].0)
                .unwrap();
            t -= 1;
            e = sample_index(rng, self.policy[t][s].iter().cloned()).unwrap();
        }
    }
}

pub fn sample_index(rng: &mut ChaCha8Rng, weights: impl Iterator<Item = f64>) -> Option<usize> {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last = None;
    for (i, w) in weights.enumerate() {
        cum += w;
        last = Some(i);
        if u < cum {
            return Some(i);
        }
    }
    last
}

/// Projects an exact return law onto `support` by linear splitting.
pub fn project_law(support: &[f64], law: &BTreeMap<u32, f64>) -> Vec<f64> {
    let mut out = vec![0.0; support.len()];
    for (&v, &p) in law {
        let v = f64::from(v);
        if v <= support[0] {
            out[0] += p;
        } else if v >= support[support.len() - 1] {
            *out.last_mut().unwrap() += p;
        } else {
            let hi = support.iter().position(|x| *x > v).unwrap();
            let lo = hi - 1;
            let f = (v - support[lo]) / (support[hi] - support[lo]);
            out[lo] += p * (1.0 - f);
            out[hi] += p * f;
        }
    }
    out
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Brute-force superquantile on samples sorted by value: averages the worst
/// `1 - alpha` mass of an empirical or exact law by explicit enumeration.
pub fn cvar_by_sorting(mut atoms: Vec<(f64, f64)>, alpha: f64) -> f64 {
    atoms.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let tail = 1.0 - alpha;
    let mut left = tail;
    let mut acc = 0.0;
    for (x, p) in atoms {
        let take = p.min(left);
        acc += x * take;
        left -= take;
        if left <= 1e-15 {
            break;
        }
    }
    acc / (tail - left.max(0.0))
}
