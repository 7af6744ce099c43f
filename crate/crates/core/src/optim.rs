//! Derivative-free minimization with the Nelder-Mead simplex method.

/// Vertex evaluated during a run, in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best vertex after each iteration.
    pub trace: Vec<TraceEntry<N>>,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Stop once the largest vertex distance from the best vertex falls below this.
    pub diameter_tol: f64,
    pub max_iterations: usize,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            diameter_tol: 1e-4,
            max_iterations: 200,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0` using an axis-aligned initial simplex with the
    /// given edge lengths.
    pub fn minimize<const N: usize, F>(
        &self,
        mut f: F,
        x0: [f64; N],
        steps: [f64; N],
    ) -> NelderMeadResult<N>
    where
        F: FnMut(&[f64; N]) -> f64,
    {
        let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
        simplex.push((x0, f(&x0)));
        for i in 0..N {
            let mut x = x0;
            x[i] += steps[i];
            simplex.push((x, f(&x)));
        }

        let mut trace = Vec::new();
        let mut iterations = 0;
        let mut converged = false;
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            trace.push(TraceEntry {
                x: simplex[0].0,
                value: simplex[0].1,
            });
            if diameter(&simplex) < self.diameter_tol {
                converged = true;
                break;
            }
            if iterations >= self.max_iterations {
                break;
            }
            iterations += 1;

            let mut centroid = [0.0; N];
            for (x, _) in &simplex[..N] {
                for d in 0..N {
                    centroid[d] += x[d] / N as f64;
                }
            }
            let worst = simplex[N];
            let along = |t: f64| -> [f64; N] {
                let mut p = [0.0; N];
                for d in 0..N {
                    p[d] = centroid[d] + t * (worst.0[d] - centroid[d]);
                }
                p
            };

            let xr = along(-self.reflection);
            let fr = f(&xr);
            if fr < simplex[0].1 {
                let xe = along(-self.reflection * self.expansion);
                let fe = f(&xe);
                simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[N - 1].1 {
                simplex[N] = (xr, fr);
                continue;
            }
            // contraction, outside if the reflection improved on the worst
            let (xc, fc) = if fr < worst.1 {
                let xc = along(-self.reflection * self.contraction);
                (xc, f(&xc))
            } else {
                let xc = along(self.contraction);
                (xc, f(&xc))
            };
            if fc < worst.1.min(fr) {
                simplex[N] = (xc, fc);
                continue;
            }
            let best = simplex[0].0;
            for vertex in simplex.iter_mut().skip(1) {
                let mut x = [0.0; N];
                for d in 0..N {
                    x[d] = best[d] + self.shrink * (vertex.0[d] - best[d]);
                }
                *vertex = (x, f(&x));
            }
        }
        NelderMeadResult {
            x: simplex[0].0,
            value: simplex[0].1,
            iterations,
            converged,
            trace,
        }
    }
}

fn diameter<const N: usize>(simplex: &[([f64; N], f64)]) -> f64 {
    let best = simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(x, _)| {
            x.iter()
                .zip(&best)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}
