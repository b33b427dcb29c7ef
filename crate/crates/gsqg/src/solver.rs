//! Time integration.
//!
//! Transformed (pathwise deterministic) equation
//! `du/dt + B(u,u) = -(nu^2/2) |grad|^{2s} u`: the linear part is diagonal
//! in Fourier space, so exponential time differencing integrates it
//! exactly; ETDRK2 is the default, ETDRK4 optional (needs the path at
//! half-step resolution). On single-mode data, where the nonlinearity
//! vanishes identically, every step reduces to the exact decay factor
//! `e^{-h nu^2 |k|^{2s}/2}`.
//!
//! Original Ito equation
//! `d theta + (R_perp theta . grad theta) dt = nu |grad|^s theta dW`:
//! an explicit Euler transport substep composed with the exact per-mode
//! geometric factor `e^{nu |k|^s dW - nu^2 |k|^{2s} h / 2}` (noise plus
//! Ito correction). Single-mode data telescope to the closed geometric
//! Brownian form, giving a machine-accurate regression target.

use serde::{Deserialize, Serialize};

use crate::bilinear;
use crate::brownian::BrownianPath;
use crate::diagnostics::{self, MonotoneVerdict};
use crate::error::{Error, Result};
use crate::field::FourierField;
use crate::grid::{wavenumber_pow, SpectralGrid};
use crate::ops;
use crate::params::GevreyParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Etdrk2,
    Etdrk4,
    Picard,
    DirectSpde,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Scheme::Etdrk2 => "etdrk2",
            Scheme::Etdrk4 => "etdrk4",
            Scheme::Picard => "picard",
            Scheme::DirectSpde => "direct_spde",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverflowPolicy {
    /// Propagate the guard error and abort the run.
    Abort,
    /// Downgrade the bilinear evaluation to the direct-convolution oracle
    /// (N <= 64) and log the event in the trajectory record.
    OracleFallback,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub grid: SpectralGrid,
    pub record_every: usize,
    pub overflow_policy: OverflowPolicy,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParams(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        let n = (self.t_end / self.dt).round();
        if n < 1.0 || (self.t_end - n * self.dt).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(Error::NonIntegralSteps {
                span: self.t_end,
                step: self.dt,
            });
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParams("record_every must be >= 1".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// One recorded sample of a trajectory.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    /// `||u(t)||` in the Gevrey norm at radius `phi(t)`, index sigma;
    /// absent where the weight exponent trips the overflow guard.
    pub gevrey_norm: Option<f64>,
    pub sobolev_norm: f64,
    /// Nodal crossing state `nu W(t) - beta t > alpha` at this sample.
    pub crossed: bool,
}

/// Time series of norms, crossing flags and scheme metadata for one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub scheme: Scheme,
    pub dt: f64,
    pub grid_n: usize,
    pub samples: Vec<TrajectorySample>,
    /// First nodal crossing time over all step times (recorded or not).
    pub crossing_time: Option<f64>,
    /// Bilinear evaluations downgraded to the direct oracle.
    pub oracle_fallbacks: u64,
    pub monotone: MonotoneVerdict,
    #[serde(skip)]
    pub terminal_field: Option<FourierField>,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn gevrey_series(&self) -> Vec<Option<f64>> {
        self.samples.iter().map(|s| s.gevrey_norm).collect()
    }

    /// JSON-lines rendering, one record per sample time.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&serde_json::to_string(s).expect("sample serializes"));
            out.push('\n');
        }
        out
    }
}

fn lambda_table(grid: SpectralGrid, params: &GevreyParams) -> Vec<f64> {
    grid.iter_modes()
        .map(|(_, k)| 0.5 * params.nu * params.nu * wavenumber_pow(k, 2.0 * params.s))
        .collect()
}

/// `(e^z - 1)/z`, series below the cancellation threshold.
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        z.exp_m1() / z
    }
}

/// `(e^z - 1 - z)/z^2`.
fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// `(e^z - 1 - z - z^2/2)/z^3`.
fn phi3(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 / 6.0 + z / 24.0 + z * z / 120.0 + z * z * z / 720.0
    } else {
        (z.exp_m1() - z - 0.5 * z * z) / (z * z * z)
    }
}

struct Etd2Tables {
    e: Vec<f64>,
    p1h: Vec<f64>,
    p2h: Vec<f64>,
}

impl Etd2Tables {
    fn new(grid: SpectralGrid, params: &GevreyParams, h: f64) -> Self {
        let lam = lambda_table(grid, params);
        let e = lam.iter().map(|&l| (-h * l).exp()).collect();
        let p1h = lam.iter().map(|&l| h * phi1(-h * l)).collect();
        let p2h = lam.iter().map(|&l| h * phi2(-h * l)).collect();
        Etd2Tables { e, p1h, p2h }
    }
}

struct Etd4Tables {
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
}

impl Etd4Tables {
    fn new(grid: SpectralGrid, params: &GevreyParams, h: f64) -> Self {
        let lam = lambda_table(grid, params);
        let z: Vec<f64> = lam.iter().map(|&l| -h * l).collect();
        Etd4Tables {
            e: z.iter().map(|&z| z.exp()).collect(),
            e2: z.iter().map(|&z| (0.5 * z).exp()).collect(),
            q: z.iter().map(|&z| 0.5 * h * phi1(0.5 * z)).collect(),
            f1: z
                .iter()
                .map(|&z| h * (phi1(z) - 3.0 * phi2(z) + 4.0 * phi3(z)))
                .collect(),
            f2: z.iter().map(|&z| h * (phi2(z) - 2.0 * phi3(z))).collect(),
            f3: z.iter().map(|&z| h * (4.0 * phi3(z) - phi2(z))).collect(),
        }
    }
}

fn axpy_diag(out: &mut FourierField, diag: &[f64], src: &FourierField) {
    for ((o, &d), s) in out.coeffs_mut().iter_mut().zip(diag).zip(src.coeffs()) {
        *o += d * s;
    }
}

fn scale_diag(f: &FourierField, diag: &[f64]) -> FourierField {
    let mut out = f.clone();
    for (c, &d) in out.coeffs_mut().iter_mut().zip(diag) {
        *c *= d;
    }
    out
}

/// `N(u, W) = -B(u, u, W)`, downgrading to the direct oracle per policy.
fn nonlinearity(
    u: &FourierField,
    w: f64,
    params: &GevreyParams,
    policy: OverflowPolicy,
    fallbacks: &mut u64,
) -> Result<FourierField> {
    match bilinear::b_fft(u, u, w, params) {
        Ok(mut b) => {
            b.scale(-1.0);
            Ok(b)
        }
        Err(Error::OverflowGuard { .. }) if matches!(policy, OverflowPolicy::OracleFallback) => {
            let mut b = bilinear::b_direct(u, u, w, params)?;
            b.dealias();
            b.scale(-1.0);
            *fallbacks += 1;
            Ok(b)
        }
        Err(e) => Err(e),
    }
}

fn etdrk2_step(
    u: &FourierField,
    w0: f64,
    w1: f64,
    tab: &Etd2Tables,
    params: &GevreyParams,
    policy: OverflowPolicy,
    fallbacks: &mut u64,
) -> Result<FourierField> {
    let n0 = nonlinearity(u, w0, params, policy, fallbacks)?;
    let mut a = scale_diag(u, &tab.e);
    axpy_diag(&mut a, &tab.p1h, &n0);
    let n1 = nonlinearity(&a, w1, params, policy, fallbacks)?;
    let mut out = a;
    let diff = n1.sub(&n0);
    axpy_diag(&mut out, &tab.p2h, &diff);
    Ok(out)
}

fn etdrk4_step(
    u: &FourierField,
    w0: f64,
    w_half: f64,
    w1: f64,
    tab: &Etd4Tables,
    params: &GevreyParams,
    policy: OverflowPolicy,
    fallbacks: &mut u64,
) -> Result<FourierField> {
    let n0 = nonlinearity(u, w0, params, policy, fallbacks)?;
    let mut a = scale_diag(u, &tab.e2);
    axpy_diag(&mut a, &tab.q, &n0);
    let na = nonlinearity(&a, w_half, params, policy, fallbacks)?;
    let mut b = scale_diag(u, &tab.e2);
    axpy_diag(&mut b, &tab.q, &na);
    let nb = nonlinearity(&b, w_half, params, policy, fallbacks)?;
    let mut c = scale_diag(&a, &tab.e2);
    let mut two_nb_minus_n0 = nb.scaled(2.0);
    two_nb_minus_n0.add_scaled(&n0, -1.0);
    axpy_diag(&mut c, &tab.q, &two_nb_minus_n0);
    let nc = nonlinearity(&c, w1, params, policy, fallbacks)?;

    // u+ = e^{hL} u + f1 N0 + 2 f2 (Na + Nb) + f3 Nc
    let mut out = scale_diag(u, &tab.e);
    axpy_diag(&mut out, &tab.f1, &n0);
    let mut nab = na;
    nab.add_scaled(&nb, 1.0);
    nab.scale(2.0);
    axpy_diag(&mut out, &tab.f2, &nab);
    axpy_diag(&mut out, &tab.f3, &nc);
    Ok(out)
}

/// One step of the transformed equation from time `t`. `t` and `t + dt`
/// must be path nodes; ETDRK4 additionally needs `t + dt/2`.
pub fn step_transformed(
    u: &FourierField,
    t: f64,
    path: &BrownianPath,
    cfg: &SolverConfig,
    params: &GevreyParams,
) -> Result<FourierField> {
    cfg.validate()?;
    let mut fallbacks = 0;
    match cfg.scheme {
        Scheme::Etdrk2 => {
            let tab = Etd2Tables::new(u.grid(), params, cfg.dt);
            etdrk2_step(
                u,
                path.value_at(t)?,
                path.value_at(t + cfg.dt)?,
                &tab,
                params,
                cfg.overflow_policy,
                &mut fallbacks,
            )
        }
        Scheme::Etdrk4 => {
            let tab = Etd4Tables::new(u.grid(), params, cfg.dt);
            etdrk4_step(
                u,
                path.value_at(t)?,
                path.value_at(t + 0.5 * cfg.dt)?,
                path.value_at(t + cfg.dt)?,
                &tab,
                params,
                cfg.overflow_policy,
                &mut fallbacks,
            )
        }
        other => Err(Error::InvalidParams(format!(
            "step_transformed handles etdrk2/etdrk4, not {other}"
        ))),
    }
}

fn record_sample(
    samples: &mut Vec<TrajectorySample>,
    u: &FourierField,
    t: f64,
    w: f64,
    params: &GevreyParams,
) {
    let gevrey = ops::gevrey_norm(u, params.phi(t), params, params.sigma).ok();
    samples.push(TrajectorySample {
        t,
        gevrey_norm: gevrey,
        sobolev_norm: ops::sobolev_norm(u, params.sigma * params.s),
        crossed: crate::brownian::crossed(params, params.alpha, w, t),
    });
}

fn check_finite(u: &FourierField, t: f64, context: &str) -> Result<()> {
    if u.has_nan() {
        Err(Error::NanDetected {
            t,
            context: context.into(),
        })
    } else {
        Ok(())
    }
}

fn path_alignment(path: &BrownianPath, dt: f64, t_end: f64, half_steps: bool) -> Result<()> {
    if path.horizon() < t_end - 1e-9 {
        return Err(Error::InvalidParams(format!(
            "path horizon {} shorter than t_end {}",
            path.horizon(),
            t_end
        )));
    }
    let need = if half_steps { 0.5 * dt } else { dt };
    let ratio = need / path.step();
    if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 - 1e-9 {
        return Err(Error::NonIntegralSteps {
            span: need,
            step: path.step(),
        });
    }
    Ok(())
}

/// Integrates the transformed equation over `[0, t_end]` on a fixed path,
/// recording the weighted norm series, nodal crossing flags, and the
/// regime-aware monotonicity verdict.
pub fn integrate_transformed(
    u0: &FourierField,
    path: &BrownianPath,
    cfg: &SolverConfig,
    params: &GevreyParams,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    params.validate()?;
    path_alignment(path, cfg.dt, cfg.t_end, matches!(cfg.scheme, Scheme::Etdrk4))?;
    let grid = u0.grid();
    let n_steps = cfg.n_steps();
    let mut fallbacks = 0u64;

    enum Tables {
        Two(Etd2Tables),
        Four(Etd4Tables),
    }
    let tables = match cfg.scheme {
        Scheme::Etdrk2 => Tables::Two(Etd2Tables::new(grid, params, cfg.dt)),
        Scheme::Etdrk4 => Tables::Four(Etd4Tables::new(grid, params, cfg.dt)),
        other => {
            return Err(Error::InvalidParams(format!(
                "integrate_transformed handles etdrk2/etdrk4, not {other}"
            )))
        }
    };

    let mut u = u0.clone();
    u.dealias();
    let mut samples = Vec::with_capacity(n_steps / cfg.record_every + 2);
    let mut crossing_time = None;
    record_sample(&mut samples, &u, 0.0, path.value_at(0.0)?, params);

    for step in 1..=n_steps {
        let t0 = (step - 1) as f64 * cfg.dt;
        let t1 = step as f64 * cfg.dt;
        u = match &tables {
            Tables::Two(tab) => etdrk2_step(
                &u,
                path.value_at(t0)?,
                path.value_at(t1)?,
                tab,
                params,
                cfg.overflow_policy,
                &mut fallbacks,
            )?,
            Tables::Four(tab) => etdrk4_step(
                &u,
                path.value_at(t0)?,
                path.value_at(t0 + 0.5 * cfg.dt)?,
                path.value_at(t1)?,
                tab,
                params,
                cfg.overflow_policy,
                &mut fallbacks,
            )?,
        };
        check_finite(&u, t1, "transformed integration")?;
        let w1 = path.value_at(t1)?;
        if crossing_time.is_none() && crate::brownian::crossed(params, params.alpha, w1, t1) {
            crossing_time = Some(t1);
        }
        if step % cfg.record_every == 0 || step == n_steps {
            record_sample(&mut samples, &u, t1, w1, params);
        }
    }

    let monotone =
        diagnostics::monotone_verdict_for_samples(&samples, diagnostics::MONOTONE_REL_TOL);
    Ok(TrajectoryRecord {
        scheme: cfg.scheme,
        dt: cfg.dt,
        grid_n: grid.n(),
        samples,
        crossing_time,
        oracle_fallbacks: fallbacks,
        monotone,
        terminal_field: Some(u),
    })
}

/// One step of the original Ito equation: explicit Euler transport,
/// then the exact per-mode noise factor `e^{nu |k|^s dW - nu^2 |k|^{2s} h/2}`.
pub fn step_direct_spde(
    theta: &FourierField,
    dw: f64,
    h: f64,
    params: &GevreyParams,
) -> Result<FourierField> {
    let max_exp = params.nu * dw.abs() * theta.grid().max_wavenumber().powf(params.s);
    params.guard_exponent(max_exp)?;
    let transport = bilinear::b_fft(theta, theta, 0.0, params)?;
    let mut out = theta.clone();
    out.dealias();
    out.add_scaled(&transport, -h);
    let (nu, s) = (params.nu, params.s);
    let grid = out.grid();
    for (idx, k) in grid.iter_modes() {
        if k == (0, 0) {
            continue;
        }
        let ks = wavenumber_pow(k, s);
        let k2s = wavenumber_pow(k, 2.0 * s);
        let factor = (nu * ks * dw - 0.5 * nu * nu * k2s * h).exp();
        out.coeffs_mut()[idx] *= factor;
    }
    Ok(out)
}

/// Integrates the original Ito equation pathwise. The recorded Gevrey
/// series is that of the conjugated state `u(t) = e^{-nu W_t |grad|^s} theta(t)`,
/// so transformed and direct runs are directly comparable; entries are
/// absent where the reconstruction would overflow.
pub fn integrate_direct(
    theta0: &FourierField,
    path: &BrownianPath,
    cfg: &SolverConfig,
    params: &GevreyParams,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    params.validate()?;
    path_alignment(path, cfg.dt, cfg.t_end, false)?;
    let n_steps = cfg.n_steps();
    let mut theta = theta0.clone();
    theta.dealias();
    let mut samples = Vec::with_capacity(n_steps / cfg.record_every + 2);
    let mut crossing_time = None;

    let sample_direct = |samples: &mut Vec<TrajectorySample>, th: &FourierField, t: f64, w: f64| {
        let gevrey = ops::gamma_apply(th, w, params)
            .ok()
            .and_then(|u| ops::gevrey_norm(&u, params.phi(t), params, params.sigma).ok());
        samples.push(TrajectorySample {
            t,
            gevrey_norm: gevrey,
            sobolev_norm: ops::sobolev_norm(th, params.sigma * params.s),
            crossed: crate::brownian::crossed(params, params.alpha, w, t),
        });
    };

    sample_direct(&mut samples, &theta, 0.0, path.value_at(0.0)?);
    for step in 1..=n_steps {
        let t0 = (step - 1) as f64 * cfg.dt;
        let t1 = step as f64 * cfg.dt;
        let dw = path.value_at(t1)? - path.value_at(t0)?;
        theta = step_direct_spde(&theta, dw, cfg.dt, params)?;
        check_finite(&theta, t1, "direct SPDE integration")?;
        let w1 = path.value_at(t1)?;
        if crossing_time.is_none() && crate::brownian::crossed(params, params.alpha, w1, t1) {
            crossing_time = Some(t1);
        }
        if step % cfg.record_every == 0 || step == n_steps {
            sample_direct(&mut samples, &theta, t1, w1);
        }
    }

    let monotone =
        diagnostics::monotone_verdict_for_samples(&samples, diagnostics::MONOTONE_REL_TOL);
    Ok(TrajectoryRecord {
        scheme: Scheme::DirectSpde,
        dt: cfg.dt,
        grid_n: theta0.grid().n(),
        samples,
        crossing_time,
        oracle_fallbacks: 0,
        monotone,
        terminal_field: Some(theta),
    })
}

/// Back-transform `theta = e^{+nu W |grad|^s} u`. While the radius covers
/// the excursion (`phi(t) - nu W >= 0` and `u` in the corresponding Gevrey
/// ball) this is a contraction into the Sobolev space:
/// `||theta||_{H^{sigma s}} <= ||u||_{Gevrey at phi(t)}`.
pub fn back_transform(
    u: &FourierField,
    w_val: f64,
    params: &GevreyParams,
) -> Result<FourierField> {
    ops::gamma_apply(u, -w_val, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn params(s: f64) -> GevreyParams {
        GevreyParams::new(1.0, s, 1.5, 1.0, 0.25, 0.5).unwrap()
    }

    fn cfg(grid: SpectralGrid, dt: f64, t_end: f64, scheme: Scheme) -> SolverConfig {
        SolverConfig {
            dt,
            t_end,
            scheme,
            grid,
            record_every: 1,
            overflow_policy: OverflowPolicy::Abort,
        }
    }

    fn single_mode(grid: SpectralGrid) -> FourierField {
        FourierField::from_modes(grid, &[((1, 0), Complex64::new(0.8, 0.3))]).unwrap()
    }

    #[test]
    fn zero_field_stays_zero() {
        let g = SpectralGrid::new(8).unwrap();
        let p = params(0.5);
        let path = BrownianPath::sample(1, 1.0, 0.1).unwrap();
        let rec = integrate_transformed(
            &FourierField::zero(g),
            &path,
            &cfg(g, 0.1, 1.0, Scheme::Etdrk2),
            &p,
        )
        .unwrap();
        assert_eq!(rec.terminal_field.as_ref().unwrap().max_abs_coeff(), 0.0);
        for s in &rec.samples {
            assert_eq!(s.sobolev_norm, 0.0);
        }
    }

    #[test]
    fn single_mode_exact_decay_all_schemes() {
        // |k| = 1, nu = 1: terminal amplitude e^{-T/2} for any s.
        for (scheme, s) in [
            (Scheme::Etdrk2, 0.5),
            (Scheme::Etdrk2, 1.0),
            (Scheme::Etdrk4, 0.75),
        ] {
            let g = SpectralGrid::new(8).unwrap();
            let p = params(s);
            let path = BrownianPath::sample(11, 2.0, 0.05).unwrap();
            let u0 = single_mode(g);
            let rec = integrate_transformed(&u0, &path, &cfg(g, 0.1, 2.0, scheme), &p).unwrap();
            let got = rec.terminal_field.as_ref().unwrap().coeff((1, 0));
            let expect = u0.coeff((1, 0)) * (-1.0f64).exp();
            assert!(
                (got - expect).norm() <= 1e-12 * expect.norm(),
                "{scheme}: rel err {}",
                (got - expect).norm() / expect.norm()
            );
        }
    }

    #[test]
    fn single_mode_norm_series_matches_closed_form() {
        // ||u(t)|| = |u0| sqrt(2) |k|^{sigma s} e^{phi(t)|k|^s - t nu^2 |k|^{2s}/2};
        // at |k| = 1 with beta < nu^2/2 this is monotone decreasing.
        let g = SpectralGrid::new(8).unwrap();
        let p = params(0.5);
        let path = BrownianPath::sample(5, 2.0, 0.1).unwrap();
        let u0 = single_mode(g);
        let amp0 = u0.coeff((1, 0)).norm();
        let rec = integrate_transformed(&u0, &path, &cfg(g, 0.1, 2.0, Scheme::Etdrk2), &p).unwrap();
        for s in &rec.samples {
            let expect = amp0 * 2.0f64.sqrt() * (p.phi(s.t) - 0.5 * s.t).exp();
            let got = s.gevrey_norm.unwrap();
            assert!((got - expect).abs() <= 1e-11 * expect, "t = {}", s.t);
        }
        assert!(rec.monotone.pass);
    }

    #[test]
    fn mean_zero_conserved_exactly() {
        let g = SpectralGrid::new(16).unwrap();
        let p = params(0.75);
        let u0 = FourierField::random(3, g, &p, 0.3, 1.5).unwrap();
        let path = BrownianPath::sample(8, 1.0, 0.025).unwrap();
        for scheme in [Scheme::Etdrk2, Scheme::Etdrk4] {
            let rec = integrate_transformed(&u0, &path, &cfg(g, 0.05, 1.0, scheme), &p).unwrap();
            assert_eq!(
                rec.terminal_field.as_ref().unwrap().coeff((0, 0)),
                Complex64::new(0.0, 0.0)
            );
        }
        let rec = integrate_direct(&u0, &path, &cfg(g, 0.05, 1.0, Scheme::DirectSpde), &p).unwrap();
        assert_eq!(
            rec.terminal_field.as_ref().unwrap().coeff((0, 0)),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn direct_spde_single_mode_geometric_form() {
        // theta_hat(T) = theta_hat(0) e^{nu |k|^s W_T - nu^2 |k|^{2s} T/2}, exact.
        let g = SpectralGrid::new(8).unwrap();
        let p = params(0.5);
        let path = BrownianPath::sample(21, 2.0, 0.1).unwrap();
        let th0 = single_mode(g);
        let rec = integrate_direct(&th0, &path, &cfg(g, 0.1, 2.0, Scheme::DirectSpde), &p).unwrap();
        let w_t = path.value_at(2.0).unwrap();
        let expect = th0.coeff((1, 0)) * (w_t - 1.0).exp();
        let got = rec.terminal_field.as_ref().unwrap().coeff((1, 0));
        assert!((got - expect).norm() <= 1e-12 * expect.norm());
    }

    #[test]
    fn direct_spde_zero_noise_reduces_to_viscous_stepping() {
        let g = SpectralGrid::new(8).unwrap();
        let p = params(0.5);
        let th0 = single_mode(g);
        let stepped = step_direct_spde(&th0, 0.0, 0.25, &p).unwrap();
        let expect = th0.coeff((1, 0)) * (-0.5 * 0.25f64).exp();
        assert!((stepped.coeff((1, 0)) - expect).norm() < 1e-15);
    }

    #[test]
    fn back_transform_identity_and_norm_bound() {
        let g = SpectralGrid::new(16).unwrap();
        let p = params(0.5);
        let u = FourierField::random(9, g, &p, 0.4, 1.5).unwrap();
        // W = 0 is the identity.
        assert_eq!(back_transform(&u, 0.0, &p).unwrap().coeffs(), u.coeffs());
        // phi - nu W >= 0: Sobolev norm of theta bounded by the Gevrey norm of u.
        let t = 1.0;
        let w = 0.9; // phi(1) = 1.25 >= nu W
        let theta = back_transform(&u, w, &p).unwrap();
        let lhs = ops::sobolev_norm(&theta, p.sigma * p.s);
        let rhs = ops::gevrey_norm(&u, p.phi(t), &p, p.sigma).unwrap();
        assert!(lhs <= rhs * (1.0 + 1e-10));
        // Single mode: equality iff phi(t) = nu W.
        let single = single_mode(g);
        let th = back_transform(&single, p.phi(t), &p).unwrap();
        let l = ops::sobolev_norm(&th, p.sigma * p.s);
        let r = ops::gevrey_norm(&single, p.phi(t), &p, p.sigma).unwrap();
        assert!((l - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn self_convergence_classical_orders_on_zero_path() {
        // Autonomous (zero-path) setting: classical orders hold.
        let g = SpectralGrid::new(16).unwrap();
        let p = params(0.75);
        let u0 = FourierField::random(17, g, &p, 0.5, 1.0).unwrap();
        let t_end = 0.5;
        let path = BrownianPath::zeros(t_end, 1.0 / 5120.0).unwrap();
        let run = |dt: f64, scheme: Scheme| {
            integrate_transformed(&u0, &path, &cfg(g, dt, t_end, scheme), &p)
                .unwrap()
                .terminal_field
                .unwrap()
        };
        let reference = run(1.0 / 2560.0, Scheme::Etdrk4);
        let err = |dt: f64, scheme: Scheme| ops::l2_norm(&run(dt, scheme).sub(&reference));
        let e1 = err(1.0 / 40.0, Scheme::Etdrk2);
        let e2 = err(1.0 / 80.0, Scheme::Etdrk2);
        let order = (e1 / e2).log2();
        assert!(
            (order - 2.0).abs() < 0.4,
            "ETDRK2 measured order {order} (errors {e1:.3e}, {e2:.3e})"
        );
        let e1 = err(1.0 / 10.0, Scheme::Etdrk4);
        let e2 = err(1.0 / 20.0, Scheme::Etdrk4);
        let order = (e1 / e2).log2();
        assert!(
            (order - 4.0).abs() < 0.8,
            "ETDRK4 measured order {order} (errors {e1:.3e}, {e2:.3e})"
        );
    }

    #[test]
    fn rejects_misaligned_path() {
        let g = SpectralGrid::new(8).unwrap();
        let p = params(0.5);
        let u0 = single_mode(g);
        // Path step 0.3 does not divide dt 0.1.
        let path = BrownianPath::sample(1, 0.9, 0.3).unwrap();
        assert!(integrate_transformed(&u0, &path, &cfg(g, 0.1, 0.9, Scheme::Etdrk2), &p).is_err());
        // ETDRK4 needs half-step nodes.
        let path2 = BrownianPath::sample(1, 1.0, 0.1).unwrap();
        assert!(integrate_transformed(&u0, &path2, &cfg(g, 0.1, 1.0, Scheme::Etdrk4), &p).is_err());
    }
}
