//! Derivative-free Nelder-Mead maximization for small dimensions.


#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Evaluation budget for one call to [`NelderMead::maximize`].
    pub max_evaluations: usize,
    /// Stop once every vertex lies within this distance of the best one.
    pub x_tolerance: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evaluations: 20_000,
            x_tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum<const D: usize> {
    pub x: [f64; D],
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    /// Maximizes `f` from `start`, building the initial simplex by stepping
    /// `step[i]` along each axis.
    pub fn maximize<const D: usize, F>(&self, mut f: F, start: [f64; D], step: [f64; D]) -> Optimum<D>
    where
        F: FnMut(&[f64; D]) -> f64,
    {
        // minimize the negation; NaN is treated as -inf
        let mut eval = |x: &[f64; D]| {
            let v = -f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut points: [([f64; D], f64); 8] = [([0.0; D], 0.0); 8];
        assert!(D + 1 <= points.len(), "dimension too large");
        let n = D + 1;
        points[0] = (start, eval(&start));
        for i in 0..D {
            let mut x = start;
            x[i] += step[i];
            points[i + 1] = (x, eval(&x));
        }
        let mut evaluations = n;
        let mut converged = false;

        while evaluations < self.max_evaluations {
            points[..n].sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = points[0].0;
            let diameter = points[1..n]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(best.iter())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if diameter <= self.x_tolerance {
                converged = true;
                break;
            }

            let mut centroid = [0.0; D];
            for (x, _) in &points[..D] {
                for i in 0..D {
                    centroid[i] += x[i] / D as f64;
                }
            }
            let worst = points[D];
            let along = |t: f64| {
                let mut x = [0.0; D];
                for i in 0..D {
                    x[i] = centroid[i] + t * (worst.0[i] - centroid[i]);
                }
                x
            };

            let xr = along(-REFLECT);
            let fr = eval(&xr);
            evaluations += 1;
            if fr < points[0].1 {
                let xe = along(-EXPAND);
                let fe = eval(&xe);
                evaluations += 1;
                points[D] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < points[D - 1].1 {
                points[D] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = along(-CONTRACT);
                (xc, eval(&xc))
            } else {
                let xc = along(CONTRACT);
                (xc, eval(&xc))
            };
            evaluations += 1;
            if fc < worst.1.min(fr) {
                points[D] = (xc, fc);
                continue;
            }
            for k in 1..n {
                let mut x = [0.0; D];
                for i in 0..D {
                    x[i] = best[i] + SHRINK * (points[k].0[i] - best[i]);
                }
                points[k] = (x, eval(&x));
            }
            evaluations += D;
        }

        points[..n].sort_by(|a, b| a.1.total_cmp(&b.1));
        Optimum {
            x: points[0].0,
            value: -points[0].1,
            evaluations,
            converged,
        }
    }
}
