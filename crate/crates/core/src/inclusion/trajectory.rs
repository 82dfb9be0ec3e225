use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{JsrError, Result};
use crate::family::{MatrixFamily, Word};

/// Euclidean norm computed without intermediate overflow.
fn euclidean(x: &DVector<Complex64>) -> f64 {
    let top = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if top == 0.0 || !top.is_finite() {
        return top;
    }
    top * x.iter().map(|z| (z.norm() / top).powi(2)).sum::<f64>().sqrt()
}

/// How the next member is chosen at each step.
#[derive(Clone, Debug)]
pub enum Policy {
    /// Repeats the word cyclically; the first letter acts first.
    FixedWordCyclic(Word),
    RandomSeeded(u64),
    /// Member maximizing `‖A_i x(k)‖₂`, lowest index on ties.
    GreedyNormMax,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// `x(0), …, x(K)`, fewer if the run was truncated.
    pub states: Vec<DVector<Complex64>>,
    /// `i_0, i_1, …`: `x(k+1) = A_{i_k} x(k)`.
    pub word_applied: Vec<usize>,
    /// `‖x(k)‖₂` for every stored state.
    pub growth_log: Vec<f64>,
    /// A state stopped being finite; the last stored state is the last
    /// finite one.
    pub truncated: bool,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.word_applied.len()
    }

    pub fn final_state(&self) -> &DVector<Complex64> {
        self.states.last().expect("x(0) is always stored")
    }

    /// `k,re_0,im_0,…,norm` with one row per state.
    pub fn to_csv(&self) -> String {
        let n = self.states[0].len();
        let mut out = String::from("k");
        for i in 0..n {
            out.push_str(&format!(",re_{i},im_{i}"));
        }
        out.push_str(",norm\n");
        for (k, (x, norm)) in self.states.iter().zip(&self.growth_log).enumerate() {
            out.push_str(&k.to_string());
            for z in x.iter() {
                out.push_str(&format!(",{},{}", z.re, z.im));
            }
            out.push_str(&format!(",{norm}\n"));
        }
        out
    }
}

/// Runs `K` steps of the switched system from `x0`.
pub fn simulate_trajectory(
    family: &MatrixFamily,
    x0: &DVector<Complex64>,
    policy: &Policy,
    steps: usize,
) -> Result<Trajectory> {
    if x0.len() != family.dim() {
        return Err(JsrError::DimensionMismatch { expected: family.dim(), got: x0.len() });
    }
    let norm0 = euclidean(x0);
    if !(norm0 > 0.0) || !norm0.is_finite() {
        return Err(JsrError::Domain("initial state must be finite and nonzero".into()));
    }
    if let Policy::FixedWordCyclic(w) = policy {
        if let Some(&index) = w.indices().iter().find(|&&i| i >= family.len()) {
            return Err(JsrError::MalformedWord { index, m: family.len() });
        }
    }
    let mut rng = match policy {
        Policy::RandomSeeded(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut traj = Trajectory { states: vec![x0.clone()], word_applied: Vec::new(), growth_log: vec![norm0], truncated: false };
    let mut x = x0.clone();
    for k in 0..steps {
        let (i, next) = match policy {
            Policy::FixedWordCyclic(w) => {
                let i = w.indices()[k % w.len()];
                (i, family.member(i).mul_vec(&x))
            }
            Policy::RandomSeeded(_) => {
                let i = rng.as_mut().expect("seeded").random_range(0..family.len());
                (i, family.member(i).mul_vec(&x))
            }
            Policy::GreedyNormMax => {
                let mut best: Option<(usize, DVector<Complex64>, f64)> = None;
                for (i, a) in family.members().iter().enumerate() {
                    let y = a.mul_vec(&x);
                    let ny = euclidean(&y);
                    if best.as_ref().is_none_or(|b| ny > b.2) {
                        best = Some((i, y, ny));
                    }
                }
                let (i, y, _) = best.expect("non-empty family");
                (i, y)
            }
        };
        let norm = euclidean(&next);
        if !norm.is_finite() {
            traj.truncated = true;
            break;
        }
        traj.word_applied.push(i);
        traj.states.push(next.clone());
        traj.growth_log.push(norm);
        x = next;
    }
    Ok(traj)
}

#[derive(Clone, Debug)]
#[derive(Default)]
pub struct UasOptions {
    pub seed: u64,
    /// Initial states to use instead of seeded random unit vectors.
    pub initial_states: Option<Vec<DVector<Complex64>>>,
}


#[derive(Clone, Debug)]
pub struct UasReport {
    /// `min_norm max_trajectory (‖x(K)‖/‖x(0)‖)^{1/K}` over the vector
    /// norms 1, 2 and ∞.
    pub growth_rate_estimate: f64,
    /// Vector norm realizing the estimate: `"1"`, `"2"` or `"inf"`.
    pub norm: &'static str,
    pub worst_trajectory: Trajectory,
    pub trajectories_run: usize,
}

fn vector_norms(x: &DVector<Complex64>) -> [f64; 3] {
    [x.iter().map(|z| z.norm()).sum(), euclidean(x), x.iter().map(|z| z.norm()).fold(0.0, f64::max)]
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<Complex64> {
    loop {
        let v = DVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

/// Empirical growth rate of the switched system: each trial runs a greedy
/// and a random switching sequence of length `K` from its initial state.
/// The rate of a trajectory is measured in the vector 1-, 2- and ∞-norms;
/// the estimate takes the worst trajectory per norm and the smallest of the
/// three, so it never exceeds the corresponding one-step operator norm
/// bounds.
pub fn uas_probe(family: &MatrixFamily, trials: usize, steps: usize, opts: &UasOptions) -> Result<UasReport> {
    if trials == 0 || steps == 0 {
        return Err(JsrError::Domain("trials and horizon must be positive".into()));
    }
    let n = family.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<DVector<Complex64>> = match &opts.initial_states {
        Some(v) if !v.is_empty() => v.clone(),
        _ => (0..trials).map(|_| random_unit(&mut rng, n)).collect(),
    };
    let mut worst: [(f64, Option<Trajectory>); 3] = [(f64::NEG_INFINITY, None), (f64::NEG_INFINITY, None), (f64::NEG_INFINITY, None)];
    let mut run = 0;
    for t in 0..trials {
        let x0 = &starts[t % starts.len()];
        let random_seed: u64 = rng.random();
        for policy in [Policy::GreedyNormMax, Policy::RandomSeeded(random_seed)] {
            let traj = simulate_trajectory(family, x0, &policy, steps)?;
            run += 1;
            let rate_steps = traj.steps().max(1) as f64;
            let n0 = vector_norms(x0);
            let nk = vector_norms(traj.final_state());
            for j in 0..3 {
                let rate = if traj.truncated { f64::INFINITY } else { (nk[j] / n0[j]).powf(1.0 / rate_steps) };
                if rate > worst[j].0 {
                    worst[j] = (rate, Some(traj.clone()));
                }
            }
        }
    }
    let labels = ["1", "2", "inf"];
    let (j, _) = worst.iter().enumerate().min_by(|a, b| a.1 .0.total_cmp(&b.1 .0)).expect("three norms");
    let (rate, traj) = worst[j].clone();
    Ok(UasReport {
        growth_rate_estimate: rate,
        norm: labels[j],
        worst_trajectory: traj.expect("at least one trajectory"),
        trajectories_run: run,
    })
}
