//! Fading realizations, RIS phase configurations, composite channels,
//! received SNR and sampled symbols for SISO and MISO links.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate channel: all effective gains below 1e-300")]
    DegenerateChannel,
    #[error("MISO fields required but absent")]
    MissingMiso,
}

/// Multi-antenna extension: Tx→RIS matrix and RIS→Rx vector.
#[derive(Debug, Clone)]
pub struct MisoPart {
    /// N×M gains, element (k, m) from transmit antenna m to RIS element k.
    pub g_mat: DMatrix<Complex64>,
    /// RIS→Rx gains, length N.
    pub h_r: Vec<Complex64>,
}

/// One quasi-static fading block: per-element complex gains with their
/// path-loss scalars (linear power).
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Tx→RIS gains, length N.
    pub h: Vec<Complex64>,
    /// RIS→Rx gains, length N.
    pub g: Vec<Complex64>,
    pub eps_h: f64,
    pub eps_g: f64,
    pub miso: Option<MisoPart>,
}

impl ChannelRealization {
    pub fn n_elements(&self) -> usize {
        self.h.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    Continuous,
    Discrete { bits: u8 },
}

/// RIS phase-shift vector, radians in [0, 2π).
#[derive(Debug, Clone)]
pub struct PhaseVector {
    pub phases: Vec<f64>,
    pub mode: PhaseMode,
}

fn wrap_tau(x: f64) -> f64 {
    let mut v = x % TAU;
    if v < 0.0 {
        v += TAU;
    }
    if v >= TAU {
        v = 0.0;
    }
    v
}

impl PhaseVector {
    pub fn continuous(phases: Vec<f64>) -> Self {
        Self { phases: phases.into_iter().map(wrap_tau).collect(), mode: PhaseMode::Continuous }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Unit-modulus factors e^{jφ_k}.
    pub fn unit_factors(&self) -> Vec<Complex64> {
        self.phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect()
    }
}

fn sample_cn<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Draw one Rayleigh-fading block: gains i.i.d. CN(0, eps_h) and CN(0, eps_g).
pub fn sample_rayleigh<R: Rng + ?Sized>(
    n: usize,
    eps_h: f64,
    eps_g: f64,
    rng: &mut R,
) -> Result<ChannelRealization, ChannelError> {
    if n == 0 {
        return Err(ChannelError::InvalidArgument("n must be >= 1".into()));
    }
    if !(eps_h > 0.0) || !(eps_g > 0.0) {
        return Err(ChannelError::InvalidArgument(format!(
            "path losses must be positive: eps_h = {eps_h}, eps_g = {eps_g}"
        )));
    }
    let h = (0..n).map(|_| sample_cn(rng, eps_h)).collect();
    let g = (0..n).map(|_| sample_cn(rng, eps_g)).collect();
    Ok(ChannelRealization { h, g, eps_h, eps_g, miso: None })
}

/// Rayleigh block with an M-antenna transmitter: adds the N×M Tx→RIS matrix
/// and the RIS→Rx vector.
pub fn sample_rayleigh_miso<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    eps_h: f64,
    eps_g: f64,
    rng: &mut R,
) -> Result<ChannelRealization, ChannelError> {
    let mut ch = sample_rayleigh(n, eps_h, eps_g, rng)?;
    if m == 0 {
        return Err(ChannelError::InvalidArgument("m must be >= 1".into()));
    }
    let g_mat = DMatrix::from_fn(n, m, |_, _| sample_cn(rng, eps_h));
    let h_r = (0..n).map(|_| sample_cn(rng, eps_g)).collect();
    ch.miso = Some(MisoPart { g_mat, h_r });
    Ok(ch)
}

/// SNR-maximizing phases: φ_k = −(arg h_k + arg g_k) mod 2π, so the phase
/// sum Λ_k vanishes element-wise.
pub fn optimal_phases(ch: &ChannelRealization) -> PhaseVector {
    let phases = ch
        .h
        .iter()
        .zip(&ch.g)
        .map(|(hk, gk)| wrap_tau(-(hk.arg() + gk.arg())))
        .collect();
    PhaseVector::continuous(phases)
}

/// Round each phase to the nearest b-bit lattice point, half toward the
/// larger phase, so the rounding error lies in (−π/2^b, π/2^b].
pub fn quantize_phases(omega: &PhaseVector, b: u8) -> Result<PhaseVector, ChannelError> {
    if b == 0 {
        return Err(ChannelError::InvalidArgument("b must be >= 1".into()));
    }
    let m = 1u64 << b;
    let step = TAU / m as f64;
    let phases = omega
        .phases
        .iter()
        .map(|&p| {
            let ratio = p / step;
            // round half up: error = lattice − p ∈ (−step/2, step/2]
            let idx = (ratio + 0.5).floor() as i64;
            wrap_tau(idx as f64 * step)
        })
        .collect();
    Ok(PhaseVector { phases, mode: PhaseMode::Discrete { bits: b } })
}

/// Received SNR κ̄ |Σ_k α_k β_k e^{jΛ_k}|².
pub fn received_snr(
    ch: &ChannelRealization,
    omega: &PhaseVector,
    kappa: f64,
) -> Result<f64, ChannelError> {
    if omega.len() != ch.n_elements() {
        return Err(ChannelError::DimensionMismatch(format!(
            "{} phases for {} elements",
            omega.len(),
            ch.n_elements()
        )));
    }
    let amp = cascade_amplitude(ch, omega);
    Ok(kappa * amp.norm_sqr())
}

/// The scalar g^H Φ h = Σ_k g_k e^{jφ_k} h_k.
pub fn cascade_amplitude(ch: &ChannelRealization, omega: &PhaseVector) -> Complex64 {
    ch.h.iter()
        .zip(&ch.g)
        .zip(&omega.phases)
        .map(|((hk, gk), &p)| gk * hk * Complex64::from_polar(1.0, p))
        .sum()
}

/// One received baseband symbol.
#[derive(Debug, Clone, Copy)]
pub struct LinkSample {
    pub y: Complex64,
    pub block_id: u64,
    pub symbol_index: u32,
}

/// Draw K symbols y = √P (g^H Φ h) x + w with x ~ CN(0,1), w ~ CN(0, σ_w²).
pub fn sample_symbols<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    omega: &PhaseVector,
    k: usize,
    p_tx: f64,
    sigma_w2: f64,
    rng: &mut R,
) -> Result<Vec<LinkSample>, ChannelError> {
    if k == 0 {
        return Err(ChannelError::InvalidArgument("K must be >= 1".into()));
    }
    if omega.len() != ch.n_elements() {
        return Err(ChannelError::DimensionMismatch("phase/channel length".into()));
    }
    let gain = cascade_amplitude(ch, omega) * p_tx.sqrt();
    Ok((0..k)
        .map(|i| {
            let x = sample_cn(rng, 1.0);
            let w = sample_cn(rng, sigma_w2);
            LinkSample { y: gain * x + w, block_id: 0, symbol_index: i as u32 }
        })
        .collect())
}

/// Effective MISO row h_r^H Φ G (length M).
pub fn miso_effective_row(
    ch: &ChannelRealization,
    omega: &PhaseVector,
) -> Result<Vec<Complex64>, ChannelError> {
    let miso = ch.miso.as_ref().ok_or(ChannelError::MissingMiso)?;
    if omega.len() != ch.n_elements() {
        return Err(ChannelError::DimensionMismatch("phase/channel length".into()));
    }
    let n = miso.h_r.len();
    let m = miso.g_mat.ncols();
    let factors = omega.unit_factors();
    let mut row = vec![Complex64::default(); m];
    for k in 0..n {
        let c = miso.h_r[k].conj() * factors[k];
        for (j, r) in row.iter_mut().enumerate() {
            *r += c * miso.g_mat[(k, j)];
        }
    }
    Ok(row)
}

/// Maximal-ratio transmit vector u = (h_r^H Φ G)^H / ‖h_r^H Φ G‖.
pub fn mrt_vector(
    ch: &ChannelRealization,
    omega: &PhaseVector,
) -> Result<Vec<Complex64>, ChannelError> {
    let row = miso_effective_row(ch, omega)?;
    let norm = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-150 {
        return Err(ChannelError::DegenerateChannel);
    }
    Ok(row.iter().map(|c| c.conj() / norm).collect())
}

/// Phases maximizing ‖h_r^H Φ G‖² by alternating maximization over the
/// beamformer direction and the per-element phases, best of a few starts.
pub fn miso_optimal_phases(ch: &ChannelRealization) -> Result<PhaseVector, ChannelError> {
    let miso = ch.miso.as_ref().ok_or(ChannelError::MissingMiso)?;
    let n = ch.n_elements();
    let m = miso.g_mat.ncols();

    let norm2_for = |phases: &PhaseVector| -> f64 {
        miso_effective_row(ch, phases).map(|row| row.iter().map(|c| c.norm_sqr()).sum()).unwrap()
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in 0..(4 + m) {
        // deterministic spread of starting beam directions
        let mut u: Vec<Complex64> = (0..m)
            .map(|j| Complex64::from_polar(1.0, TAU * ((j * (start + 1)) as f64) / (m as f64 + 1.3)))
            .collect();
        let un = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        u.iter_mut().for_each(|c| *c /= un);
        let mut phases = vec![0.0; n];
        let mut last = f64::NEG_INFINITY;
        for _ in 0..60 {
            // given u, align each element phase with its channel term
            for k in 0..n {
                let mut term = Complex64::default();
                for j in 0..m {
                    term += miso.g_mat[(k, j)] * u[j];
                }
                let coeff = ch.miso.as_ref().unwrap().h_r[k].conj() * term;
                phases[k] = wrap_tau(-coeff.arg());
            }
            let pv = PhaseVector::continuous(phases.clone());
            // given phases, best u is the matched filter
            let row = miso_effective_row(ch, &pv)?;
            let norm = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-150 {
                return Err(ChannelError::DegenerateChannel);
            }
            u = row.iter().map(|c| c.conj() / norm).collect();
            let val = norm * norm;
            if val - last < 1e-12 * val.abs().max(1e-300) {
                break;
            }
            last = val;
        }
        let pv = PhaseVector::continuous(phases.clone());
        let val = norm2_for(&pv);
        if best.as_ref().map_or(true, |(b, _)| val > *b) {
            best = Some((val, phases));
        }
    }
    Ok(PhaseVector::continuous(best.unwrap().1))
}

/// The cascade vector/matrix Ψ together with link noise and SNR scaling,
/// so |s^H Ψ|² reproduces |g^H Φ h|² exactly.
#[derive(Debug, Clone)]
pub struct CompositeChannel {
    pub psi: Psi,
    /// σ_w², linear power.
    pub noise_var: f64,
    /// κ̄ = P / σ_w².
    pub snr_scale: f64,
}

#[derive(Debug, Clone)]
pub enum Psi {
    /// SISO: ψ_k = g_k h_k, length N.
    Vector(Vec<Complex64>),
    /// MISO: ψ_{k,m} = conj(h_r)_k G_{k,m}, N×M.
    Matrix(DMatrix<Complex64>),
}

impl CompositeChannel {
    pub fn from_siso(
        ch: &ChannelRealization,
        p_tx: f64,
        sigma_w2: f64,
    ) -> Result<Self, ChannelError> {
        if !(p_tx > 0.0) || !(sigma_w2 > 0.0) {
            return Err(ChannelError::InvalidArgument(format!(
                "p_tx = {p_tx}, sigma_w2 = {sigma_w2} must be positive"
            )));
        }
        let psi: Vec<Complex64> = ch.h.iter().zip(&ch.g).map(|(hk, gk)| gk * hk).collect();
        if psi.iter().all(|c| c.norm_sqr() < 1e-300) {
            return Err(ChannelError::DegenerateChannel);
        }
        Ok(Self { psi: Psi::Vector(psi), noise_var: sigma_w2, snr_scale: p_tx / sigma_w2 })
    }

    pub fn from_miso(
        ch: &ChannelRealization,
        p_tx: f64,
        sigma_w2: f64,
    ) -> Result<Self, ChannelError> {
        let miso = ch.miso.as_ref().ok_or(ChannelError::MissingMiso)?;
        if !(p_tx > 0.0) || !(sigma_w2 > 0.0) {
            return Err(ChannelError::InvalidArgument(format!(
                "p_tx = {p_tx}, sigma_w2 = {sigma_w2} must be positive"
            )));
        }
        let n = miso.h_r.len();
        let m = miso.g_mat.ncols();
        let psi = DMatrix::from_fn(n, m, |k, j| miso.h_r[k].conj() * miso.g_mat[(k, j)]);
        if psi.iter().all(|c| c.norm_sqr() < 1e-300) {
            return Err(ChannelError::DegenerateChannel);
        }
        Ok(Self { psi: Psi::Matrix(psi), noise_var: sigma_w2, snr_scale: p_tx / sigma_w2 })
    }

    pub fn n_elements(&self) -> usize {
        match &self.psi {
            Psi::Vector(v) => v.len(),
            Psi::Matrix(m) => m.nrows(),
        }
    }

    pub fn p_tx(&self) -> f64 {
        self.snr_scale * self.noise_var
    }

    /// |s^H Ψ|² (SISO) or ‖s^H Ψ‖² (MISO) in raw channel-gain units.
    pub fn signal_gain(&self, omega: &PhaseVector) -> Result<f64, ChannelError> {
        if omega.len() != self.n_elements() {
            return Err(ChannelError::DimensionMismatch("phase/psi length".into()));
        }
        let f = omega.unit_factors();
        Ok(match &self.psi {
            Psi::Vector(v) => {
                v.iter().zip(&f).map(|(p, s)| p * s).sum::<Complex64>().norm_sqr()
            }
            Psi::Matrix(mat) => {
                let mut total = 0.0;
                for j in 0..mat.ncols() {
                    let mut acc = Complex64::default();
                    for k in 0..mat.nrows() {
                        acc += mat[(k, j)] * f[k];
                    }
                    total += acc.norm_sqr();
                }
                total
            }
        })
    }

    /// Received SNR at phases `omega`.
    pub fn snr(&self, omega: &PhaseVector) -> Result<f64, ChannelError> {
        Ok(self.snr_scale * self.signal_gain(omega)?)
    }

    /// Received per-symbol variance σ_w² + P·gain.
    pub fn received_variance(&self, omega: &PhaseVector) -> Result<f64, ChannelError> {
        Ok(self.noise_var + self.p_tx() * self.signal_gain(omega)?)
    }
}
