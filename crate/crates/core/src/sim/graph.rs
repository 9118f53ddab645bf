use rand::seq::SliceRandom;
use rand::Rng;

use crate::ensemble::EnsembleParams;
use crate::error::{Error, Result};

/// Configuration-model Tanner graph. Edge `e` is variable socket `e`, so it
/// belongs to variable `e / b`; multi-edges are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    pub(crate) params: EnsembleParams,
    pub(crate) n: usize,
    pub(crate) m: usize,
    /// Check node of each edge.
    pub(crate) edge_check: Vec<u32>,
    /// Edge ids grouped by check: check `c` owns `[c*d, (c+1)*d)`.
    pub(crate) check_edges: Vec<u32>,
}

impl TannerGraph {
    pub fn variables(&self) -> usize {
        self.n
    }

    pub fn checks(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> usize {
        self.edge_check.len()
    }

    pub fn params(&self) -> EnsembleParams {
        self.params
    }

    pub fn check_of_edge(&self, e: usize) -> usize {
        self.edge_check[e] as usize
    }

    pub fn edges_of_check(&self, c: usize) -> &[u32] {
        let d = self.params.d() as usize;
        &self.check_edges[c * d..(c + 1) * d]
    }

    pub fn check_of_socket(&self, socket: usize) -> usize {
        socket / self.params.d() as usize
    }
}

pub(crate) fn check_divisible(params: EnsembleParams, n: usize) -> Result<usize> {
    let (b, d) = (params.b() as usize, params.d() as usize);
    if n == 0 {
        return Err(Error::Config("n must be positive".into()));
    }
    let xi = n.checked_mul(b).filter(|&xi| xi <= u32::MAX as usize).ok_or_else(|| Error::Config(format!("n = {n} too large")))?;
    if xi % d != 0 {
        return Err(Error::Config(format!("n*b = {xi} is not divisible by d = {d}")));
    }
    Ok(xi / d)
}

/// Uniformly random pairing of the `n b` variable sockets with the `m d`
/// check sockets (Fisher-Yates over the check sockets).
pub fn sample_graph<R: Rng + ?Sized>(params: EnsembleParams, n: usize, rng: &mut R) -> Result<TannerGraph> {
    let m = check_divisible(params, n)?;
    let xi = n * params.b() as usize;
    let d = params.d();
    let mut perm: Vec<u32> = (0..xi as u32).collect();
    perm.shuffle(rng);
    let mut edge_check = vec![0u32; xi];
    let mut check_edges = vec![0u32; xi];
    for (e, &socket) in perm.iter().enumerate() {
        edge_check[e] = socket / d;
        check_edges[socket as usize] = e as u32;
    }
    Ok(TannerGraph { params, n, m, edge_check, check_edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degrees_are_exact() {
        let params = EnsembleParams::new(6, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = sample_graph(params, 6, &mut rng).unwrap();
        assert_eq!(g.checks(), 6);
        let mut check_deg = vec![0; g.checks()];
        for e in 0..g.edges() {
            check_deg[g.check_of_edge(e)] += 1;
        }
        assert!(check_deg.iter().all(|&k| k == 6));
        for c in 0..g.checks() {
            for &e in g.edges_of_check(c) {
                assert_eq!(g.check_of_edge(e as usize), c);
            }
        }
    }

    #[test]
    fn sizes() {
        let params = EnsembleParams::new(3, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = sample_graph(params, 10_000, &mut rng).unwrap();
        assert_eq!(g.checks(), 5000);
        assert_eq!(g.edges(), 30_000);
        assert!(sample_graph(params, 3, &mut rng).is_err());
        assert!(sample_graph(params, 0, &mut rng).is_err());
    }
}
