//! Derivative-free simplex minimization.

use crate::num::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions<T> {
    pub reflection: T,
    pub expansion: T,
    pub contraction: T,
    pub shrink: T,
    /// Stop once every vertex is within this distance of the best one.
    pub tol_x: T,
    /// Stop once the spread of function values falls below this.
    pub tol_f: T,
    pub max_evals: usize,
    /// Offset along each coordinate used to build the initial simplex.
    pub initial_step: T,
}

impl<T: Real> Default for NelderMeadOptions<T> {
    fn default() -> Self {
        Self {
            reflection: T::one(),
            expansion: T::lit(2.0),
            contraction: T::lit(0.5),
            shrink: T::lit(0.5),
            tol_x: T::tol(1e-6),
            tol_f: T::tol(1e-9),
            max_evals: 5000,
            initial_step: T::lit(0.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    SimplexSize,
    ValueSpread,
    MaxEvaluations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult<T> {
    pub x: Vec<T>,
    pub f: T,
    /// Best value seen so far, after each evaluation.
    pub history: Vec<T>,
    pub evaluations: usize,
    pub termination: Termination,
}

struct Tracker<'a, T, F> {
    f: &'a mut F,
    history: Vec<T>,
    best: T,
    max: usize,
}

impl<T: Real, F: FnMut(&[T]) -> T> Tracker<'_, T, F> {
    fn eval(&mut self, x: &[T]) -> T {
        let v = (self.f)(x);
        if v < self.best {
            self.best = v;
        }
        self.history.push(self.best);
        v
    }

    fn exhausted(&self) -> bool {
        self.history.len() >= self.max
    }
}

fn lerp<T: Real>(a: &[T], b: &[T], t: T) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + (y - x) * t).collect()
}

/// Minimizes `f` from `x0` with the standard reflect / expand / contract /
/// shrink simplex iteration.
pub fn nelder_mead<T: Real, F: FnMut(&[T]) -> T>(
    mut f: F,
    x0: &[T],
    opts: &NelderMeadOptions<T>,
) -> NelderMeadResult<T> {
    let n = x0.len();
    let mut tr = Tracker { f: &mut f, history: Vec::new(), best: T::infinity(), max: opts.max_evals.max(1) };
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    let f0 = tr.eval(x0);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        if tr.exhausted() {
            break;
        }
        let mut x = x0.to_vec();
        x[i] = x[i] + opts.initial_step;
        let v = tr.eval(&x);
        simplex.push((x, v));
    }
    let order = |s: &mut Vec<(Vec<T>, T)>| {
        s.sort_by(|a, b| match (a.1.is_nan(), b.1.is_nan()) {
            (true, false) => std::cmp::Ordering::Greater,
            (false, true) => std::cmp::Ordering::Less,
            _ => a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal),
        })
    };
    let termination = loop {
        order(&mut simplex);
        if tr.exhausted() || simplex.len() < n + 1 {
            break Termination::MaxEvaluations;
        }
        let best = simplex[0].clone();
        let worst = simplex[n].clone();
        let diameter = simplex
            .iter()
            .map(|(x, _)| x.iter().zip(&best.0).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt())
            .fold(T::zero(), |m, d| m.max(d));
        if diameter < opts.tol_x {
            break Termination::SimplexSize;
        }
        if worst.1 - best.1 < opts.tol_f {
            break Termination::ValueSpread;
        }
        let mut centroid = vec![T::zero(); n];
        for (x, _) in &simplex[..n] {
            for (c, &v) in centroid.iter_mut().zip(x) {
                *c = *c + v;
            }
        }
        for c in &mut centroid {
            *c = *c / T::lit(n as f64);
        }
        let second_worst = simplex[n - 1].1;
        let xr = lerp(&centroid, &worst.0, -opts.reflection);
        let fr = tr.eval(&xr);
        if fr < best.1 {
            if tr.exhausted() {
                simplex[n] = (xr, fr);
                continue;
            }
            let xe = lerp(&centroid, &xr, opts.expansion);
            let fe = tr.eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second_worst {
            simplex[n] = (xr, fr);
            continue;
        }
        if tr.exhausted() {
            if fr < worst.1 {
                simplex[n] = (xr, fr);
            }
            continue;
        }
        if fr < worst.1 {
            let xc = lerp(&centroid, &xr, opts.contraction);
            let fc = tr.eval(&xc);
            if fc <= fr {
                simplex[n] = (xc, fc);
                continue;
            }
        } else {
            let xc = lerp(&centroid, &worst.0, opts.contraction);
            let fc = tr.eval(&xc);
            if fc < worst.1 {
                simplex[n] = (xc, fc);
                continue;
            }
        }
        for i in 1..=n {
            if tr.exhausted() {
                break;
            }
            let x = lerp(&best.0, &simplex[i].0, opts.shrink);
            let v = tr.eval(&x);
            simplex[i] = (x, v);
        }
    };
    order(&mut simplex);
    let (x, fx) = simplex.swap_remove(0);
    let evaluations = tr.history.len();
    NelderMeadResult { x, f: fx, history: tr.history, evaluations, termination }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_bowl() {
        let a = [1.5, -0.3, 2.0];
        let r = nelder_mead(
            |x: &[f64]| x.iter().zip(&a).map(|(u, v)| (u - v).powi(2)).sum(),
            &[0.0, 0.0, 0.0],
            &NelderMeadOptions { tol_f: 1e-16, ..Default::default() },
        );
        for (u, v) in r.x.iter().zip(&a) {
            assert!((u - v).abs() < 1e-6, "{:?}", r.x);
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &NelderMeadOptions { max_evals: 2000, ..Default::default() });
        assert!(r.evaluations <= 2000);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?} {:?}", r.x, r.termination);
    }

    #[test]
    fn history_is_monotone_on_plateaus() {
        let f = |x: &[f64]| if x[0] > 1.0 { 1e9 } else { (x[0] - 0.5).powi(2) + x[1].powi(2) };
        let r = nelder_mead(f, &[3.0, 2.0], &NelderMeadOptions { initial_step: 1.0, ..Default::default() });
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*r.history.last().unwrap(), r.f);
    }
}
