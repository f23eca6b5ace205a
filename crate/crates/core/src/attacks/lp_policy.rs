//! Randomized-policy attack over fading blocks: minimize the ergodic rate
//! while keeping the first two SNR moments inside tolerance windows. With
//! discretized states and the full b-bit action lattice this is a linear
//! program over per-state action probabilities.

use super::AttackError;
use crate::channel::{optimal_phases, quantize_phases, ChannelRealization, PhaseMode, PhaseVector};
use crate::solvers::{solve_lp_with_basis, LpColumns, LpProblem, LpStatus};
use crate::statdist::SnrMomentSet;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Row-stochastic attack policy over sampled channel states and the
/// discrete action lattice, stored sparsely (optimal bases touch only a
/// handful of actions per state).
#[derive(Debug, Clone)]
pub struct LpPolicy {
    pub states: Vec<ChannelRealization>,
    pub state_probs: Vec<f64>,
    pub bits: u8,
    pub n_actions: usize,
    /// per-state (action index, probability), probabilities summing to 1
    pub probs: Vec<Vec<(usize, f64)>>,
    /// re-verified (E SNR, E SNR²) under the policy
    pub moments_achieved: (f64, f64),
    /// ergodic rate under the policy, bits per channel use
    pub rate: f64,
}

impl LpPolicy {
    /// Decode an action index into its lattice phase vector.
    pub fn action_phases(&self, action: usize, n_elements: usize) -> PhaseVector {
        decode_action(action, n_elements, self.bits)
    }
}

pub(crate) fn decode_action(code: usize, n: usize, bits: u8) -> PhaseVector {
    let m = 1usize << bits;
    let step = TAU / m as f64;
    let mut c = code;
    let phases = (0..n)
        .map(|_| {
            let p = step * (c % m) as f64;
            c /= m;
            p
        })
        .collect();
    PhaseVector { phases, mode: PhaseMode::Discrete { bits } }
}

// Columns of the policy LP: one equality row per state plus four moment
// window rows. Entry values derive from the precomputed SNR table.
struct PolicyColumns {
    n_states: usize,
    n_actions: usize,
    snr: Vec<f64>,
    pi: Vec<f64>,
    costs: Vec<f64>,
    /// number of elastic relaxation variables appended after the policy
    /// columns (0 in the primary solve, 4 in the diagnostic solve)
    elastic: usize,
}

impl LpColumns for PolicyColumns {
    fn n_vars(&self) -> usize {
        self.n_states * self.n_actions + self.elastic
    }
    fn cost(&self, j: usize) -> f64 {
        let base = self.n_states * self.n_actions;
        if j < base {
            if self.elastic > 0 {
                0.0
            } else {
                self.costs[j]
            }
        } else {
            1.0
        }
    }
    fn visit(&self, j: usize, f: &mut dyn FnMut(usize, f64)) {
        let base = self.n_states * self.n_actions;
        if j < base {
            let s = j / self.n_actions;
            let v = self.pi[s] * self.snr[j];
            f(s, 1.0);
            f(self.n_states, v);
            f(self.n_states + 1, -v);
            let v2 = v * self.snr[j];
            f(self.n_states + 2, v2);
            f(self.n_states + 3, -v2);
        } else {
            // elastic variable for moment row (j - base)
            f(self.n_states + (j - base), -1.0);
        }
    }
}

/// Design the policy. Tolerances are ζ_l = κ_l · m_l around the reference
/// moments; `kappa_bar` is the SNR scale P/σ_w² used for SNR(s, a).
pub fn design_lp_attack(
    states: &[ChannelRealization],
    state_probs: &[f64],
    b: u8,
    moments: &SnrMomentSet,
    kappa_l: (f64, f64),
    kappa_bar: f64,
) -> Result<LpPolicy, AttackError> {
    if states.is_empty() || states.len() != state_probs.len() {
        return Err(AttackError::InvalidArgument(format!(
            "{} states with {} probabilities",
            states.len(),
            state_probs.len()
        )));
    }
    let n_elem = states[0].n_elements();
    if states.iter().any(|s| s.n_elements() != n_elem) {
        return Err(AttackError::InvalidArgument("states differ in element count".into()));
    }
    if b == 0 || n_elem * b as usize > 16 {
        return Err(AttackError::InvalidArgument(format!(
            "action space 2^(N·b) with N·b = {} not enumerable (cap 16)",
            n_elem * b as usize
        )));
    }
    let psum: f64 = state_probs.iter().sum();
    if (psum - 1.0).abs() > 1e-9 || state_probs.iter().any(|&p| p < 0.0) {
        return Err(AttackError::InvalidArgument("state probabilities must form a law".into()));
    }
    if !(kappa_l.0 > 0.0) || !(kappa_l.1 > 0.0) || !(kappa_bar > 0.0) {
        return Err(AttackError::InvalidArgument("tolerances and SNR scale must be positive".into()));
    }

    let n = states.len();
    let m = 1usize << (b as usize * n_elem);
    let lattice: Vec<Complex64> = (0..(1usize << b))
        .map(|i| Complex64::from_polar(1.0, TAU * i as f64 / (1u64 << b) as f64))
        .collect();
    let mask = (1usize << b) - 1;

    // SNR(s, a) for every pair, states in parallel
    let lattice_ref = &lattice;
    let snr: Vec<f64> = states
        .par_iter()
        .flat_map_iter(|st| {
            let psi: Vec<Complex64> =
                st.h.iter().zip(&st.g).map(|(hk, gk)| gk * hk).collect();
            (0..m).map(move |code| {
                let mut acc = Complex64::default();
                let mut c = code;
                for p in &psi {
                    acc += p * lattice_ref[c & mask];
                    c >>= b;
                }
                kappa_bar * acc.norm_sqr()
            })
        })
        .collect();
    let costs: Vec<f64> = (0..n * m)
        .into_par_iter()
        .map(|j| state_probs[j / m] * (1.0 + snr[j]).log2())
        .collect();

    let zeta1 = kappa_l.0 * moments.m1;
    let zeta2 = kappa_l.1 * moments.m2;
    let b_ub = vec![
        moments.m1 + zeta1,
        -(moments.m1 - zeta1),
        moments.m2 + zeta2,
        -(moments.m2 - zeta2),
    ];

    // warm start: the quantized-optimal action per state + the four slacks
    let mut warm: Vec<usize> = states
        .iter()
        .enumerate()
        .map(|(s, st)| {
            let q = quantize_phases(&optimal_phases(st), b).expect("b >= 1");
            let code = encode_action(&q, b);
            s * m + code
        })
        .collect();
    for i in 0..4 {
        warm.push(n * m + i);
    }

    let prob = LpProblem {
        columns: PolicyColumns {
            n_states: n,
            n_actions: m,
            snr,
            pi: state_probs.to_vec(),
            costs,
            elastic: 0,
        },
        n_eq: n,
        b_eq: vec![1.0; n],
        b_ub,
    };
    let sol = solve_lp_with_basis(&prob, Some(&warm))?;

    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            // elastic diagnostic: minimal uniform window expansion
            let elastic_prob = LpProblem {
                columns: PolicyColumns { elastic: 4, ..clone_cols(&prob.columns) },
                n_eq: prob.n_eq,
                b_eq: prob.b_eq.clone(),
                b_ub: prob.b_ub.clone(),
            };
            let diag = solve_lp_with_basis(&elastic_prob, None)?;
            let base = n * m;
            let need1 = diag.x.get(base).copied().unwrap_or(0.0).max(
                diag.x.get(base + 1).copied().unwrap_or(0.0),
            );
            let need2 = diag.x.get(base + 2).copied().unwrap_or(0.0).max(
                diag.x.get(base + 3).copied().unwrap_or(0.0),
            );
            return Err(AttackError::InfeasibleTarget(format!(
                "moment windows too tight for the sampled states: need zeta1 >= {:.6e}, zeta2 >= {:.6e}",
                zeta1 + need1,
                zeta2 + need2
            )));
        }
        LpStatus::Unbounded => {
            return Err(AttackError::InvalidArgument("policy LP unbounded".into()))
        }
    }

    // sparse extraction + row normalization
    let mut probs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (j, &v) in sol.x.iter().enumerate() {
        if v > 1e-12 {
            probs[j / m].push((j % m, v));
        }
    }
    for row in probs.iter_mut() {
        let total: f64 = row.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(AttackError::InvalidArgument(format!(
                "policy row sums to {total}, expected 1"
            )));
        }
        for e in row.iter_mut() {
            e.1 /= total;
        }
    }

    // re-verify moments and rate by direct summation over the support
    let cols = &prob.columns;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut rate = 0.0;
    for (s, row) in probs.iter().enumerate() {
        for &(a, p) in row {
            let v = cols.snr[s * m + a];
            let w = state_probs[s] * p;
            m1 += w * v;
            m2 += w * v * v;
            rate += w * (1.0 + v).log2();
        }
    }
    if (m1 - moments.m1).abs() > zeta1 + 1e-6 || (m2 - moments.m2).abs() > zeta2 + 1e-6 {
        return Err(AttackError::InfeasibleTarget(format!(
            "re-verified moments ({m1}, {m2}) violate the windows around ({}, {})",
            moments.m1, moments.m2
        )));
    }

    Ok(LpPolicy {
        states: states.to_vec(),
        state_probs: state_probs.to_vec(),
        bits: b,
        n_actions: m,
        probs,
        moments_achieved: (m1, m2),
        rate,
    })
}

fn clone_cols(c: &PolicyColumns) -> PolicyColumns {
    PolicyColumns {
        n_states: c.n_states,
        n_actions: c.n_actions,
        snr: c.snr.clone(),
        pi: c.pi.clone(),
        costs: c.costs.clone(),
        elastic: c.elastic,
    }
}

pub(crate) fn encode_action(pv: &PhaseVector, b: u8) -> usize {
    let m = 1usize << b;
    let step = TAU / m as f64;
    let mut code = 0usize;
    for (k, &p) in pv.phases.iter().enumerate() {
        let idx = (p / step).round() as usize % m;
        code += idx << (b as usize * k);
    }
    code
}

/// Ergodic rate of the per-state quantized-optimal play, bits/channel use;
/// the moment-matched reference the attack is compared against.
pub fn quantized_reference_rate(
    states: &[ChannelRealization],
    state_probs: &[f64],
    b: u8,
    kappa_bar: f64,
) -> Result<(f64, f64, f64), AttackError> {
    if states.is_empty() || states.len() != state_probs.len() {
        return Err(AttackError::InvalidArgument("state/probability mismatch".into()));
    }
    let mut rate = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (st, &pi) in states.iter().zip(state_probs) {
        let q = quantize_phases(&optimal_phases(st), b)?;
        let snr = crate::channel::received_snr(st, &q, kappa_bar)?;
        rate += pi * (1.0 + snr).log2();
        m1 += pi * snr;
        m2 += pi * snr * snr;
    }
    Ok((rate, m1, m2))
}
