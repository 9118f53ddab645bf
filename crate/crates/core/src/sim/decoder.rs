use rand::Rng;

use super::graph::TannerGraph;

/// Outcome of a single [`DecoderState::peel_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepReport {
    Peeled { variable: usize, check: usize },
    /// No degree-one check left while unresolved variables remain.
    Halted,
    /// Residual graph is empty.
    Finished,
}

/// Residual graph during peeling.
///
/// Each check keeps its surviving edges at the front of its socket block, so
/// removal is a swap with the last surviving slot. Degree-one checks live in
/// an array with back-pointers for O(1) uniform sampling and deletion.
#[derive(Debug, Clone)]
pub struct DecoderState {
    b: usize,
    d: usize,
    edge_check: Vec<u32>,
    slots: Vec<u32>,
    slot_of: Vec<u32>,
    degree: Vec<u32>,
    alive: Vec<bool>,
    alive_vars: usize,
    ones: Vec<u32>,
    ones_pos: Vec<u32>,
    /// `counts[0]` = variable-side edges, `counts[j]` = edges on checks of
    /// residual degree `j` (`1..=d`).
    counts: Vec<u64>,
    iteration: u64,
}

const ABSENT: u32 = u32::MAX;

impl DecoderState {
    /// Erases each variable with probability `epsilon` and strips the known
    /// variables (and their edges) from the graph.
    pub fn apply_channel_and_init<R: Rng + ?Sized>(graph: TannerGraph, epsilon: f64, rng: &mut R) -> DecoderState {
        let erased: Vec<bool> = (0..graph.n).map(|_| rng.random::<f64>() < epsilon).collect();
        DecoderState::with_erasures(graph, erased)
    }

    /// Starts decoding from an explicit erasure pattern (`true` = erased).
    pub fn with_erasures(graph: TannerGraph, erased: Vec<bool>) -> DecoderState {
        assert_eq!(erased.len(), graph.n, "erasure pattern length must equal n");
        let b = graph.params.b() as usize;
        let d = graph.params.d() as usize;
        let TannerGraph { n, m, edge_check, check_edges, .. } = graph;
        let mut slot_of = vec![0u32; edge_check.len()];
        for (slot, &e) in check_edges.iter().enumerate() {
            slot_of[e as usize] = slot as u32;
        }
        let alive = erased;
        let mut st = DecoderState {
            b,
            d,
            edge_check,
            slots: check_edges,
            slot_of,
            degree: vec![d as u32; m],
            alive_vars: alive.iter().filter(|&&a| a).count(),
            alive,
            ones: Vec::new(),
            ones_pos: vec![ABSENT; m],
            counts: vec![0; d + 1],
            iteration: 0,
        };
        for v in 0..n {
            if !st.alive[v] {
                for e in v * b..(v + 1) * b {
                    st.detach_edge(e);
                }
            }
        }
        st.counts[0] = (st.alive_vars * b) as u64;
        for c in 0..m {
            let k = st.degree[c] as usize;
            if k > 0 {
                st.counts[k] += k as u64;
            }
            if k == 1 {
                st.push_one(c);
            }
        }
        st
    }

    #[inline]
    fn detach_edge(&mut self, e: usize) -> usize {
        let c = self.edge_check[e] as usize;
        let p = self.slot_of[e] as usize;
        let last = c * self.d + self.degree[c] as usize - 1;
        let moved = self.slots[last];
        self.slots[last] = e as u32;
        self.slots[p] = moved;
        self.slot_of[moved as usize] = p as u32;
        self.slot_of[e] = last as u32;
        self.degree[c] -= 1;
        c
    }

    #[inline]
    fn push_one(&mut self, c: usize) {
        self.ones_pos[c] = self.ones.len() as u32;
        self.ones.push(c as u32);
    }

    #[inline]
    fn remove_one(&mut self, c: usize) {
        let p = self.ones_pos[c] as usize;
        let last = *self.ones.last().expect("degree-one set is empty");
        self.ones.swap_remove(p);
        if last as usize != c {
            self.ones_pos[last as usize] = p as u32;
        }
        self.ones_pos[c] = ABSENT;
    }

    #[inline]
    fn degree_changed(&mut self, c: usize, old: usize, new: usize) {
        if old > 0 {
            self.counts[old] -= old as u64;
        }
        if new > 0 {
            self.counts[new] += new as u64;
        }
        if old == 1 {
            self.remove_one(c);
        }
        if new == 1 {
            self.push_one(c);
        }
    }

    /// Peels one uniformly chosen degree-one check and its variable.
    pub fn peel_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepReport {
        if self.ones.is_empty() {
            return if self.alive_vars > 0 { StepReport::Halted } else { StepReport::Finished };
        }
        let check = self.ones[rng.random_range(0..self.ones.len())] as usize;
        let edge = self.slots[check * self.d] as usize;
        let variable = edge / self.b;
        debug_assert!(self.alive[variable]);
        for e in variable * self.b..(variable + 1) * self.b {
            let c = self.edge_check[e] as usize;
            let old = self.degree[c] as usize;
            self.detach_edge(e);
            self.degree_changed(c, old, old - 1);
        }
        self.alive[variable] = false;
        self.alive_vars -= 1;
        self.counts[0] -= self.b as u64;
        self.iteration += 1;
        StepReport::Peeled { variable, check }
    }

    /// Peeled variables so far.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn alive_variables(&self) -> usize {
        self.alive_vars
    }

    pub fn var_edges(&self) -> u64 {
        self.counts[0]
    }

    /// Edges on checks of residual degree `j`, `1 <= j <= d`.
    pub fn check_edges(&self, j: usize) -> u64 {
        self.counts[j]
    }

    pub fn degree_one_checks(&self) -> usize {
        self.ones.len()
    }

    /// `(l, r_1, ..., r_{d-1})` as raw edge counts.
    pub fn counters(&self) -> Vec<u64> {
        self.counts[..self.d].to_vec()
    }

    pub fn residual_degree(&self, c: usize) -> usize {
        self.degree[c] as usize
    }

    pub fn surviving_edges(&self, c: usize) -> &[u32] {
        &self.slots[c * self.d..c * self.d + self.degree[c] as usize]
    }

    /// Recomputes every counter from scratch and compares it with the
    /// incrementally maintained state.
    pub fn check_invariants(&self) -> Result<(), String> {
        let alive_count = self.alive.iter().filter(|&&a| a).count();
        if alive_count != self.alive_vars {
            return Err(format!("alive count {} != tracked {}", alive_count, self.alive_vars));
        }
        if self.counts[0] != (self.b * alive_count) as u64 {
            return Err(format!("l-count {} != b * alive {}", self.counts[0], self.b * alive_count));
        }
        let mut by_degree = vec![0u64; self.d + 1];
        let mut ones = 0;
        for c in 0..self.degree.len() {
            let k = self.degree[c] as usize;
            by_degree[k] += k as u64;
            if k == 1 {
                ones += 1;
                if self.ones_pos[c] == ABSENT || self.ones[self.ones_pos[c] as usize] as usize != c {
                    return Err(format!("check {c} missing from degree-one set"));
                }
            }
            for &e in self.surviving_edges(c) {
                if !self.alive[e as usize / self.b] {
                    return Err(format!("check {c} keeps edge {e} of a resolved variable"));
                }
                if self.edge_check[e as usize] as usize != c {
                    return Err(format!("edge {e} filed under wrong check"));
                }
            }
        }
        if by_degree[1..] != self.counts[1..] {
            return Err(format!("check counts {:?} != tracked {:?}", &by_degree[1..], &self.counts[1..]));
        }
        if ones != self.ones.len() {
            return Err(format!("degree-one set size {} != {}", self.ones.len(), ones));
        }
        let check_side: u64 = self.counts[1..].iter().sum();
        if check_side != self.counts[0] {
            return Err(format!("edge balance broken: check side {check_side} vs variable side {}", self.counts[0]));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::EnsembleParams;
    use crate::sim::graph::sample_graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Variable 0 (b = 2) is the only erased variable and sits on checks 0
    /// and 1, each of which is left with residual degree one.
    #[test]
    fn single_variable_peel() {
        let params = EnsembleParams::new(2, 2).unwrap();
        let graph = TannerGraph {
            params,
            n: 2,
            m: 2,
            edge_check: vec![0, 1, 0, 1],
            check_edges: vec![0, 2, 1, 3],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut st = DecoderState::with_erasures(graph, vec![true, false]);
        assert_eq!(st.alive_variables(), 1);
        assert_eq!(st.var_edges(), 2);
        assert_eq!(st.degree_one_checks(), 2);
        st.check_invariants().unwrap();
        let rep = st.peel_step(&mut rng);
        assert!(matches!(rep, StepReport::Peeled { variable: 0, .. }));
        assert_eq!(st.var_edges(), 0);
        assert_eq!(st.degree_one_checks(), 0);
        st.check_invariants().unwrap();
        assert_eq!(st.peel_step(&mut rng), StepReport::Finished);
    }

    #[test]
    fn halts_on_stopping_set() {
        // Two erased variables sharing both checks: no degree-one check.
        let params = EnsembleParams::new(2, 2).unwrap();
        let graph = TannerGraph {
            params,
            n: 2,
            m: 2,
            edge_check: vec![0, 1, 0, 1],
            check_edges: vec![0, 2, 1, 3],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut st = DecoderState::with_erasures(graph, vec![true, true]);
        assert_eq!(st.peel_step(&mut rng), StepReport::Halted);
    }

    #[test]
    fn all_known_and_all_erased() {
        let params = EnsembleParams::new(3, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = sample_graph(params, 200, &mut rng).unwrap();
        let mut st = DecoderState::apply_channel_and_init(g.clone(), 0.0, &mut rng);
        assert!(st.counters().iter().all(|&c| c == 0));
        assert_eq!(st.peel_step(&mut rng), StepReport::Finished);
        let st = DecoderState::apply_channel_and_init(g, 1.0, &mut rng);
        assert_eq!(st.var_edges(), 600);
        assert_eq!(st.check_edges(6), 600);
        assert!((0..100).all(|c| st.residual_degree(c) == 6));
        st.check_invariants().unwrap();
    }

    #[test]
    fn invariants_hold_through_decoding() {
        let params = EnsembleParams::new(3, 6).unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = sample_graph(params, 600, &mut rng).unwrap();
            let mut st = DecoderState::apply_channel_and_init(g, 0.42, &mut rng);
            st.check_invariants().unwrap();
            loop {
                let before = st.var_edges();
                match st.peel_step(&mut rng) {
                    StepReport::Peeled { .. } => {
                        assert_eq!(before - st.var_edges(), 3);
                        st.check_invariants().unwrap();
                    }
                    StepReport::Halted => {
                        assert!(st.alive_variables() > 0);
                        break;
                    }
                    StepReport::Finished => {
                        assert_eq!(st.alive_variables(), 0);
                        break;
                    }
                }
            }
        }
    }
}
