use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::alphabet::Symbol;
use crate::automata::{Dfa, State};
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::probabilistic::Pfa;
use crate::stream::SymbolStream;
use crate::weight::Weight;

const ROW_TOLERANCE: f64 = 1e-12;
const DIRECT_SOLVE_MAX: usize = 64;
const ABSORPTION_SOLVE_MAX: usize = 2048;
const POWER_TOLERANCE: f64 = 1e-13;
const POWER_MAX_ITERATIONS: usize = 10_000_000;

/// Stochastic matrix of an automaton driven by IID input, with its states
/// split into transient states and bottom strongly connected components.
#[derive(Debug, Clone, Serialize)]
pub struct ChainModel {
    pub matrix: Vec<Vec<f64>>,
    pub initial: State,
    /// Bottom components, each sorted, ordered by smallest state.
    pub bsccs: Vec<Vec<State>>,
    pub transient: Vec<State>,
}

impl ChainModel {
    pub fn from_matrix(matrix: Vec<Vec<f64>>, initial: State) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || initial >= n {
            return Err(Error::InvalidAutomaton("empty chain or bad initial state".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidAutomaton(format!("row {i} has length {}", row.len())));
            }
            if row.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::InvalidAutomaton(format!("row {i} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidAutomaton(format!("row {i} sums to {s}")));
            }
        }
        let mut g: DiGraph<(), ()> = DiGraph::new();
        let nodes: Vec<NodeIndex> = (0..n).map(|_| g.add_node(())).collect();
        for (i, row) in matrix.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    g.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        let mut comp_of = vec![0usize; n];
        let sccs = tarjan_scc(&g);
        for (c, scc) in sccs.iter().enumerate() {
            for v in scc {
                comp_of[v.index()] = c;
            }
        }
        let mut bsccs = Vec::new();
        let mut transient = Vec::new();
        for (c, scc) in sccs.iter().enumerate() {
            let closed = scc
                .iter()
                .all(|v| matrix[v.index()].iter().enumerate().all(|(j, &p)| p == 0.0 || comp_of[j] == c));
            let mut states: Vec<State> = scc.iter().map(|v| v.index()).collect();
            states.sort_unstable();
            if closed {
                bsccs.push(states);
            } else {
                transient.extend(states);
            }
        }
        bsccs.sort();
        transient.sort_unstable();
        Ok(ChainModel {
            matrix,
            initial,
            bsccs,
            transient,
        })
    }

    pub fn states(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_transient(&self, q: State) -> bool {
        self.transient.binary_search(&q).is_ok()
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(q) = stack.pop() {
            for (j, &p) in self.matrix[q].iter().enumerate() {
                if p > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }
}

/// `P_ij = sum_a mu(a) [delta(i, a) = j]`.
pub fn build_chain<W: Weight>(d: &Dfa, mu: &BernoulliMeasure<W>) -> Result<ChainModel> {
    mu.require_alphabet(d.alphabet())?;
    let n = d.states();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        for (a, w) in mu.weights().iter().enumerate() {
            row[d.step(i, a as Symbol)] += w.to_f64();
        }
    }
    ChainModel::from_matrix(m, d.initial())
}

/// `P_ij = sum_a mu(a) delta(i, a)(j)` for a probabilistic automaton.
pub fn build_pfa_chain<W: Weight>(p: &Pfa<W>, mu: &BernoulliMeasure<W>) -> Result<ChainModel> {
    mu.require_alphabet(p.alphabet())?;
    let n = p.states();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        for (a, w) in mu.weights().iter().enumerate() {
            for t in p.transitions(i, a as Symbol) {
                row[t.target] += w.to_f64() * t.probability.to_f64();
            }
        }
    }
    ChainModel::from_matrix(m, p.initial())
}

/// Asymptotic visit frequencies.
#[derive(Debug, Clone, Serialize)]
pub struct StationaryInfo {
    /// Stationary vector of each BSCC, over all states (zero outside the component).
    pub per_bscc: Vec<Vec<f64>>,
    /// Probability of ending in each BSCC when started from the initial state.
    pub absorption: Vec<f64>,
    /// `sum_b absorption[b] * per_bscc[b]`.
    pub pi: Vec<f64>,
    /// More than one BSCC is reachable, so the limit depends on the input.
    pub input_dependent: bool,
}

fn solve_component(c: &ChainModel, states: &[State]) -> Vec<f64> {
    let m = states.len();
    let sub = |i: usize, j: usize| c.matrix[states[i]][states[j]];
    let local = if m == 1 {
        vec![1.0]
    } else if m <= DIRECT_SOLVE_MAX {
        // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
        let a = DMatrix::from_fn(m, m, |i, j| {
            if i == m - 1 {
                1.0
            } else {
                sub(j, i) - if i == j { 1.0 } else { 0.0 }
            }
        });
        let mut b = DVector::zeros(m);
        b[m - 1] = 1.0;
        match a.lu().solve(&b) {
            Some(x) => x.iter().map(|v| v.max(0.0)).collect(),
            None => power_iteration(m, sub),
        }
    } else {
        power_iteration(m, sub)
    };
    let total: f64 = local.iter().sum();
    let mut full = vec![0.0; c.states()];
    for (i, &q) in states.iter().enumerate() {
        full[q] = local[i] / total;
    }
    full
}

fn power_iteration(m: usize, sub: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let rows: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|i| (0..m).map(|j| (j, sub(i, j))).filter(|&(_, p)| p > 0.0).collect())
        .collect();
    // Lazy chain (P + I) / 2 has the same stationary vector and is aperiodic.
    let mut x = vec![1.0 / m as f64; m];
    for _ in 0..POWER_MAX_ITERATIONS {
        let mut y: Vec<f64> = x.iter().map(|v| 0.5 * v).collect();
        for (i, row) in rows.iter().enumerate() {
            for &(j, p) in row {
                y[j] += 0.5 * x[i] * p;
            }
        }
        let delta: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        if delta < POWER_TOLERANCE {
            break;
        }
    }
    x
}

fn absorption(c: &ChainModel, comp: &[Option<usize>]) -> Vec<f64> {
    let b = c.bsccs.len();
    if let Some(k) = comp[c.initial] {
        let mut out = vec![0.0; b];
        out[k] = 1.0;
        return out;
    }
    let reach = c.reachable();
    let trans: Vec<State> = c.transient.iter().copied().filter(|&q| reach[q]).collect();
    let index = |q: State| trans.binary_search(&q).ok();
    let t = trans.len();
    // h[q][k] = P(absorbed into k | start q), from h = P_TT h + P_TB.
    let mut rhs = DMatrix::zeros(t, b);
    for (i, &q) in trans.iter().enumerate() {
        for (j, &p) in c.matrix[q].iter().enumerate() {
            if let Some(k) = comp[j] {
                rhs[(i, k)] += p;
            }
        }
    }
    let start = index(c.initial).expect("initial state is transient and reachable");
    if t <= ABSORPTION_SOLVE_MAX {
        let a = DMatrix::from_fn(t, t, |i, j| {
            (if i == j { 1.0 } else { 0.0 }) - c.matrix[trans[i]][trans[j]]
        });
        if let Some(h) = a.lu().solve(&rhs) {
            return (0..b).map(|k| h[(start, k)].clamp(0.0, 1.0)).collect();
        }
    }
    // Push mass forward until the transient part is negligible.
    let mut mass = vec![0.0; c.states()];
    mass[c.initial] = 1.0;
    let mut out = vec![0.0; b];
    for _ in 0..POWER_MAX_ITERATIONS {
        let mut next = vec![0.0; c.states()];
        let mut left = 0.0;
        for &q in &trans {
            if mass[q] == 0.0 {
                continue;
            }
            for (j, &p) in c.matrix[q].iter().enumerate() {
                match comp[j] {
                    Some(k) => out[k] += mass[q] * p,
                    None => {
                        next[j] += mass[q] * p;
                        left += mass[q] * p;
                    }
                }
            }
        }
        mass = next;
        if left < POWER_TOLERANCE {
            break;
        }
    }
    out
}

pub fn stationary(c: &ChainModel) -> StationaryInfo {
    let mut comp = vec![None; c.states()];
    for (k, b) in c.bsccs.iter().enumerate() {
        for &q in b {
            comp[q] = Some(k);
        }
    }
    let per_bscc: Vec<Vec<f64>> = c.bsccs.iter().map(|b| solve_component(c, b)).collect();
    let absorption = absorption(c, &comp);
    let mut pi = vec![0.0; c.states()];
    for (k, v) in per_bscc.iter().enumerate() {
        for (q, x) in v.iter().enumerate() {
            pi[q] += absorption[k] * x;
        }
    }
    let input_dependent = absorption.iter().filter(|&&a| a > 0.0).count() > 1;
    StationaryInfo {
        per_bscc,
        absorption,
        pi,
        input_dependent,
    }
}

/// Number of times each state is occupied before reading each of the next `n` symbols.
pub fn visit_counts<S: SymbolStream + ?Sized>(d: &Dfa, s: &mut S, n: u64) -> Vec<u64> {
    let mut counts = vec![0u64; d.states()];
    let mut q = d.initial();
    for _ in 0..n {
        counts[q] += 1;
        q = d.step(q, s.next_symbol());
    }
    counts
}

/// `V_q(n) / n` for every state.
pub fn visit_frequencies<S: SymbolStream + ?Sized>(d: &Dfa, s: &mut S, n: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Invalid("visit frequencies need n >= 1".into()));
    }
    Ok(visit_counts(d, s, n)
        .into_iter()
        .map(|c| c as f64 / n as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::generators::iid_stream;
    use crate::measure::uniform_measure;
    use crate::rng::RandomSource;

    fn uniform() -> BernoulliMeasure {
        uniform_measure(Alphabet::binary())
    }

    fn check_stationary(c: &ChainModel, info: &StationaryInfo) {
        for (b, pi) in c.bsccs.iter().zip(&info.per_bscc) {
            let total: f64 = pi.iter().sum();
            assert!((total - 1.0).abs() < 1e-10);
            for j in 0..c.states() {
                let v: f64 = (0..c.states()).map(|i| pi[i] * c.matrix[i][j]).sum();
                assert!((v - pi[j]).abs() < 1e-10);
                if !b.contains(&j) {
                    assert_eq!(pi[j], 0.0);
                }
            }
        }
    }

    #[test]
    fn swap_chain() {
        let d = Dfa::new(Alphabet::binary(), 0, vec![vec![1, 1], vec![0, 0]]).unwrap();
        let c = build_chain(&d, &uniform()).unwrap();
        assert_eq!(c.matrix, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let info = stationary(&c);
        check_stationary(&c, &info);
        assert!((info.pi[0] - 0.5).abs() < 1e-12);
        let mut s = iid_stream(&uniform(), RandomSource::new(1));
        assert_eq!(visit_frequencies(&d, &mut s, 1000).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn two_thirds_chain() {
        let d = Dfa::new(Alphabet::binary(), 0, vec![vec![0, 1], vec![0, 0]]).unwrap();
        let c = build_chain(&d, &uniform()).unwrap();
        assert_eq!(c.matrix, vec![vec![0.5, 0.5], vec![1.0, 0.0]]);
        let info = stationary(&c);
        check_stationary(&c, &info);
        assert!((info.pi[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((info.pi[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!(!info.input_dependent);
        let mut s = iid_stream(&uniform(), RandomSource::new(2));
        let v = visit_frequencies(&d, &mut s, 1_000_000).unwrap();
        assert!((v[0] - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn identity_and_transient() {
        let c = ChainModel::from_matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 0).unwrap();
        assert_eq!(c.bsccs, vec![vec![0], vec![1]]);
        let info = stationary(&c);
        assert_eq!(info.per_bscc[1], vec![0.0, 1.0]);
        assert_eq!(info.pi, vec![1.0, 0.0]);

        // 0 -> {1, 2}, 1 and 2 absorbing: two reachable BSCCs.
        let d = Dfa::new(Alphabet::binary(), 0, vec![vec![1, 2], vec![1, 1], vec![2, 2]]).unwrap();
        let c = build_chain(&d, &uniform()).unwrap();
        assert_eq!(c.transient, vec![0]);
        let info = stationary(&c);
        assert!(info.input_dependent);
        assert!((info.absorption[0] - 0.5).abs() < 1e-12);
        assert_eq!(info.pi[0], 0.0);

        let single = Dfa::new(Alphabet::binary(), 0, vec![vec![0, 0]]).unwrap();
        let mut s = iid_stream(&uniform(), RandomSource::new(2));
        assert_eq!(visit_frequencies(&single, &mut s, 10).unwrap(), vec![1.0]);
    }

    #[test]
    fn power_iteration_matches_direct() {
        // Cycle of 80 states with lazy self-loops, past the direct-solve size.
        let n = 80;
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 0.25;
            row[(i + 1) % n] = 0.75;
        }
        let c = ChainModel::from_matrix(m, 0).unwrap();
        let info = stationary(&c);
        check_stationary(&c, &info);
        assert!(info.pi.iter().all(|&p| (p - 1.0 / n as f64).abs() < 1e-10));
    }

    #[test]
    fn pfa_chain() {
        let half = vec![(0, 0.5), (1, 0.5)];
        let p = Pfa::new(Alphabet::binary(), 0, vec![vec![half.clone(), vec![(1, 1.0)]], vec![half.clone(), half]]).unwrap();
        let c = build_pfa_chain(&p, &uniform()).unwrap();
        assert_eq!(c.matrix, vec![vec![0.25, 0.75], vec![0.5, 0.5]]);
        let info = stationary(&c);
        assert!((info.pi[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(ChainModel::from_matrix(vec![vec![0.5, 0.4], vec![0.0, 1.0]], 0).is_err());
        assert!(ChainModel::from_matrix(vec![vec![1.5, -0.5], vec![0.0, 1.0]], 0).is_err());
    }
}
