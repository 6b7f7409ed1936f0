use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

/// Brownian motion on a regular mesh, read as a step function:
/// `B(t) = values[floor((t - start) / mesh)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    start: f64,
    mesh: f64,
    values: Vec<f64>,
}

impl BrownianPath {
    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end(&self) -> f64 {
        self.start + (self.values.len() - 1) as f64 * self.mesh
    }

    pub fn at(&self, t: f64) -> f64 {
        let k = ((t - self.start) / self.mesh).floor();
        let k = if k <= 0.0 { 0 } else { (k as usize).min(self.values.len() - 1) };
        self.values[k]
    }

    pub fn sample(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.at(t)).collect()
    }
}

/// Two Brownian motions on `[start, end]` whose Gaussian steps have
/// correlation `rho` (Cholesky pairing), both starting at 0.
pub fn correlated_paths<R: Rng + ?Sized>(
    start: f64,
    end: f64,
    mesh: f64,
    rho: f64,
    rng: &mut R,
) -> (BrownianPath, BrownianPath) {
    let steps = ((end - start) / mesh - 1e-9).ceil().max(1.0) as usize;
    let sd = mesh.sqrt();
    let ortho = (1.0 - rho * rho).max(0.0).sqrt();
    let mut a = Vec::with_capacity(steps + 1);
    let mut b = Vec::with_capacity(steps + 1);
    a.push(0.0);
    b.push(0.0);
    let (mut xa, mut xb) = (0.0, 0.0);
    for _ in 0..steps {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        xa += sd * z1;
        xb += sd * (rho * z1 + ortho * z2);
        a.push(xa);
        b.push(xb);
    }
    (
        BrownianPath { start, mesh, values: a },
        BrownianPath { start, mesh, values: b },
    )
}

/// Arrival times of a rate-`lambda` Poisson process on `]0, t_end[`, with
/// the endpoints `0` and `t_end` added.
pub fn poisson_grid<R: Rng + ?Sized>(lambda: f64, t_end: f64, rng: &mut R) -> Vec<f64> {
    let exp = Exp::new(lambda).expect("positive intensity");
    let mut out = vec![0.0];
    let mut t = 0.0;
    loop {
        t += exp.sample(rng);
        if t >= t_end {
            break;
        }
        if t > *out.last().expect("non-empty") {
            out.push(t);
        }
    }
    out.push(t_end);
    out
}
