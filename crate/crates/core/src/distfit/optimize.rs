//! Derivative-free Nelder-Mead minimization used for the truncated power law.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<const N: usize> {
    pub point: [f64; N],
    pub value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead<const N: usize> {
    pub step: [f64; N],
    /// Convergence once the simplex values span less than this.
    pub f_tolerance: f64,
    /// ... and its vertices are this close to the best one in every coordinate.
    pub x_tolerance: f64,
    pub max_iterations: usize,
}

const TRACE_LEN: usize = 12;

impl<const N: usize> NelderMead<N> {
    /// Minimizes `f` from `start`. Infinite or NaN values act as walls.
    pub fn minimize<F: Fn(&[f64; N]) -> f64>(&self, f: &F, start: [f64; N]) -> Result<Minimum<N>> {
        let eval = |p: &[f64; N]| {
            let v = f(p);
            if v.is_nan() { f64::INFINITY } else { v }
        };
        let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
        simplex.push((start, eval(&start)));
        for i in 0..N {
            let mut p = start;
            p[i] += self.step[i];
            simplex.push((p, eval(&p)));
        }
        if !simplex[0].1.is_finite() {
            return Err(Error::InvalidArgument("optimizer start point is infeasible".into()));
        }

        let mut trace: Vec<f64> = Vec::new();
        for iteration in 0..self.max_iterations {
            // stable sort keeps vertex order deterministic on ties
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0];
            let worst = simplex[N];
            trace.push(best.1);
            if trace.len() > TRACE_LEN {
                trace.remove(0);
            }

            let spread = worst.1 - best.1;
            let size = simplex[1..]
                .iter()
                .flat_map(|(p, _)| p.iter().zip(best.0.iter()).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if spread <= self.f_tolerance && size <= self.x_tolerance {
                return Ok(Minimum { point: best.0, value: best.1, iterations: iteration });
            }

            let mut centroid = [0.0; N];
            for (p, _) in &simplex[..N] {
                for k in 0..N {
                    centroid[k] += p[k] / N as f64;
                }
            }
            let along = |t: f64| {
                let mut p = [0.0; N];
                for k in 0..N {
                    p[k] = centroid[k] + t * (worst.0[k] - centroid[k]);
                }
                p
            };

            let reflected = along(-1.0);
            let fr = eval(&reflected);
            if fr < best.1 {
                let expanded = along(-2.0);
                let fe = eval(&expanded);
                simplex[N] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr < simplex[N - 1].1 {
                simplex[N] = (reflected, fr);
                continue;
            }
            let (contracted, fc) = if fr < worst.1 {
                let p = along(-0.5);
                (p, eval(&p))
            } else {
                let p = along(0.5);
                (p, eval(&p))
            };
            if fc < worst.1.min(fr) {
                simplex[N] = (contracted, fc);
                continue;
            }
            // shrink toward the best vertex
            for vertex in simplex.iter_mut().skip(1) {
                for k in 0..N {
                    vertex.0[k] = best.0[k] + 0.5 * (vertex.0[k] - best.0[k]);
                }
                vertex.1 = eval(&vertex.0);
            }
        }
        Err(Error::NonConvergence { iterations: self.max_iterations, trace })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_rosenbrock_minimum() {
        let nm = NelderMead { step: [0.5, 0.5], f_tolerance: 1e-14, x_tolerance: 1e-8, max_iterations: 5000 };
        let rosen = |p: &[f64; 2]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let m = nm.minimize(&rosen, [-1.2, 1.0]).unwrap();
        assert!((m.point[0] - 1.0).abs() < 1e-6 && (m.point[1] - 1.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn respects_infeasible_walls() {
        let nm = NelderMead { step: [0.3], f_tolerance: 1e-14, x_tolerance: 1e-9, max_iterations: 2000 };
        let f = |p: &[f64; 1]| if p[0] < 2.0 { f64::INFINITY } else { p[0] * p[0] };
        let m = nm.minimize(&f, [3.0]).unwrap();
        assert!((m.point[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn reports_trace_on_exhaustion() {
        let nm = NelderMead { step: [1.0], f_tolerance: 0.0, x_tolerance: 0.0, max_iterations: 5 };
        let err = nm.minimize(&|p: &[f64; 1]| p[0] * p[0], [10.0]).unwrap_err();
        match err {
            Error::NonConvergence { iterations, trace } => {
                assert_eq!(iterations, 5);
                assert_eq!(trace.len(), 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
