//! Box-constrained Nelder–Mead minimization.
//!
//! Trial points are projected onto the box before evaluation. The objective
//! may return `+∞` for infeasible points inside the box.

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadConfig {
    /// Convergence threshold on the simplex diameter (max-norm).
    pub x_tol: f64,
    pub max_iter: usize,
    pub initial_step: f64,
    /// Number of fresh simplices built around the incumbent after the first run.
    pub restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig {
            x_tol: 1e-6,
            max_iter: 500,
            initial_step: 0.5,
            restarts: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct Problem<'a, F> {
    f: F,
    lower: &'a [f64],
    upper: &'a [f64],
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Problem<'_, F> {
    fn project(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(self.lower).zip(self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn run<F: FnMut(&[f64]) -> f64>(
    p: &mut Problem<'_, F>,
    x0: &[f64],
    fx0: f64,
    step: f64,
    cfg: &NelderMeadConfig,
) -> Minimum {
    let d = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), fx0));
    for i in 0..d {
        let mut x = x0.to_vec();
        let room_up = p.upper[i] - x[i];
        let room_down = x[i] - p.lower[i];
        x[i] += if room_up >= step || room_up >= room_down { step.min(room_up) } else { -step.min(room_down) };
        if x[i] == x0[i] {
            x[i] += step;
        }
        p.project(&mut x);
        let fx = p.eval(&x);
        simplex.push((x, fx));
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; d];
    let mut trial = vec![0.0; d];
    while iterations < cfg.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let f_spread = simplex[d].1 - simplex[0].1;
        if diameter < cfg.x_tol || f_spread == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..d] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / d as f64;
            }
        }
        let worst = simplex[d].clone();
        let point_at = |coef: f64, out: &mut Vec<f64>, p: &Problem<'_, F>| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(&worst.0) {
                *o = c + coef * (w - c);
            }
            p.project(out);
        };

        point_at(-1.0, &mut trial, p);
        let fr = p.eval(&trial);
        if fr < simplex[0].1 {
            let reflected = trial.clone();
            point_at(-2.0, &mut trial, p);
            let fe = p.eval(&trial);
            simplex[d] = if fe < fr { (trial.clone(), fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (trial.clone(), fr);
            continue;
        }
        let (coef, bound) = if fr < worst.1 { (-0.5, fr) } else { (0.5, worst.1) };
        point_at(coef, &mut trial, p);
        let fc = p.eval(&trial);
        if fc < bound {
            simplex[d] = (trial.clone(), fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for (x, fx) in simplex.iter_mut().skip(1) {
            for (v, b) in x.iter_mut().zip(&best) {
                *v = b + 0.5 * (*v - b);
            }
            p.project(x);
            *fx = p.eval(x);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    Minimum {
        x,
        fx,
        iterations,
        evaluations: 0,
        converged,
    }
}

/// Minimizes `f` over the box `[lower, upper]` starting at `x0`.
///
/// Deterministic: the initial simplex is axis-aligned and each restart
/// rebuilds it around the incumbent with a smaller step.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    cfg: &NelderMeadConfig,
) -> Minimum {
    assert_eq!(x0.len(), lower.len());
    assert_eq!(x0.len(), upper.len());
    let mut p = Problem {
        f,
        lower,
        upper,
        evaluations: 0,
    };
    let mut start = x0.to_vec();
    p.project(&mut start);
    let f0 = p.eval(&start);
    if x0.is_empty() {
        return Minimum {
            x: start,
            fx: f0,
            iterations: 0,
            evaluations: p.evaluations,
            converged: true,
        };
    }
    let mut best = run(&mut p, &start, f0, cfg.initial_step, cfg);
    let mut step = cfg.initial_step;
    for _ in 0..cfg.restarts {
        step *= 0.2;
        let next = run(&mut p, &best.x.clone(), best.fx, step.max(10.0 * cfg.x_tol), cfg);
        let improved = next.fx < best.fx;
        let iterations = best.iterations + next.iterations;
        let gain = best.fx - next.fx;
        if improved {
            best = Minimum {
                iterations,
                ..next
            };
        } else {
            best.iterations = iterations;
            best.converged &= next.converged;
        }
        if gain.abs() <= 1e-12 * (1.0 + best.fx.abs()) {
            break;
        }
    }
    best.evaluations = p.evaluations;
    best
}
