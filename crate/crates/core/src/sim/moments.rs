//! Mergeable first and second moments of vector samples.

/// Count, mean and co-moment matrix `Σ (x - μ)(x - μ)ᵀ` of a set of vectors.
/// `merge` combines two disjoint sets exactly (Chan et al. update), so any
/// fixed merge tree gives a reproducible result.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    dim: usize,
    count: usize,
    mean: Vec<f64>,
    comoment: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Self { dim, count: 0, mean: vec![0.0; dim], comoment: vec![0.0; dim * dim] }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.count += 1;
        let n = self.count as f64;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl / n;
        }
        for i in 0..self.dim {
            let after_i = x[i] - self.mean[i];
            for j in 0..self.dim {
                self.comoment[i * self.dim + j] += delta[j] * after_i;
            }
        }
        self.symmetrize();
    }

    pub fn merge(&mut self, other: &Moments) {
        debug_assert_eq!(self.dim, other.dim);
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta: Vec<f64> = other.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.comoment[i * self.dim + j] += other.comoment[i * self.dim + j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl * nb / n;
        }
        self.count += other.count;
    }

    fn symmetrize(&mut self) {
        for i in 0..self.dim {
            for j in 0..i {
                let v = 0.5 * (self.comoment[i * self.dim + j] + self.comoment[j * self.dim + i]);
                self.comoment[i * self.dim + j] = v;
                self.comoment[j * self.dim + i] = v;
            }
        }
    }

    #[inline]
    pub fn comoment(&self, i: usize, j: usize) -> f64 {
        self.comoment[i * self.dim + j]
    }

    /// Unbiased sample covariance (`n - 1` denominator); NaN below 2 samples.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        self.comoment(i, j) / (self.count - 1) as f64
    }
}

const LEAF: usize = 64;

/// Accumulates `samples` in blocks of 64 and merges the blocks pairwise in a
/// fixed binary tree. The result depends only on the sample order.
pub fn tree_reduce(dim: usize, samples: &[Vec<f64>]) -> Moments {
    let mut level: Vec<Moments> = samples
        .chunks(LEAF)
        .map(|chunk| {
            let mut m = Moments::new(dim);
            for s in chunk {
                m.push(s);
            }
            m
        })
        .collect();
    if level.is_empty() {
        return Moments::new(dim);
    }
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| {
                let mut m = pair[0].clone();
                if let Some(rhs) = pair.get(1) {
                    m.merge(rhs);
                }
                m
            })
            .collect();
    }
    level.pop().unwrap()
}

/// Jackknife (leave-one-out) standard errors of the sample covariance
/// entries. Removing sample `k` changes entry `(i, j)` to
/// `(C_ij - n/(n-1) a_i a_j) / (n - 2)` with `a = x_k - μ`, which gives the
/// jackknife variance in closed form. Infinite below 3 samples.
pub fn jackknife_cov_stderr(samples: &[Vec<f64>], moments: &Moments) -> Vec<f64> {
    let dim = moments.dim;
    let n = moments.count;
    if n < 3 {
        return vec![f64::INFINITY; dim * dim];
    }
    let nf = n as f64;
    let w = nf / ((nf - 1.0) * (nf - 2.0));
    let mut ss = vec![0.0; dim * dim];
    let mut dev = vec![0.0; dim];
    for x in samples {
        for (dv, (a, m)) in dev.iter_mut().zip(x.iter().zip(&moments.mean)) {
            *dv = a - m;
        }
        for i in 0..dim {
            for j in i..dim {
                let r = dev[i] * dev[j] - moments.comoment(i, j) / nf;
                ss[i * dim + j] += r * r;
            }
        }
    }
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let v = ((nf - 1.0) / nf * w * w * ss[i * dim + j]).sqrt();
            out[i * dim + j] = v;
            out[j * dim + i] = v;
        }
    }
    out
}
