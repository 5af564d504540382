//! Fixed-step RK4 integration of the plant, the observer and the adaptive law.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use nalgebra::Complex;

use super::scenario::{FilterTau, ScenarioConfig};
use super::signals::VectorScript;
use crate::error::{check_shape, Error, Result};
use crate::linalg;
use crate::polytope::{basis, enumerate_vertices};
use crate::model::{augment_descriptor, DescriptorModel, Nonlinearity, PlantModel};
use crate::synth::ObserverGains;

/// States beyond this magnitude count as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Filter factors tried by [`FilterTau::Auto`], in order.
pub const AUTO_TAU_LADDER: &[f64] = &[10.0, 20.0, 30.0, 50.0, 100.0, 200.0, 500.0, 1000.0];

/// `|R(z)|` of classical RK4, `R(z) = 1 + z + z^2/2 + z^3/6 + z^4/24`.
pub fn rk4_amplification(z: Complex<f64>) -> f64 {
    let one = Complex::new(1.0, 0.0);
    let r = one + z * (one + z * (one / 2.0 + z * (one / 6.0 + z / 24.0)));
    libm::hypot(r.re, r.im)
}

/// Linear error loop with the filter as simulated at a vertex, state
/// `[e_zeta; e_a; z - C_bar e_zeta]` reduced to `[e_zeta; e_a; z]` with
/// `z' = (C_bar e_zeta - z) / tau` and `fa_hat' = beta L2 (y_tilde + z')`.
pub fn filtered_error_matrix(
    desc: &DescriptorModel,
    gains: &ObserverGains,
    vertex: &DMatrix<f64>,
    tau: f64,
) -> Result<DMatrix<f64>> {
    let (nn, a1, p, m, nb) = (desc.n_new, desc.a1, desc.p, desc.m(), desc.n_bar());
    check_shape("vertex", vertex, m, nb)?;
    let mut nz = gains.n.clone();
    for i in 0..m {
        let hit = &desc.h[i] * &desc.t;
        for j in 0..nb {
            if vertex[(i, j)] != 0.0 {
                let hij = basis(i + 1, j + 1, m, nb)?.matrix;
                nz += &gains.l1 * &desc.g * hij * &hit * vertex[(i, j)];
            }
        }
    }
    let bl2 = &gains.l2 * gains.beta;
    let dim = nn + a1 + p;
    let mut out = DMatrix::zeros(dim, dim);
    out.view_mut((0, 0), (nn, nn)).copy_from(&nz);
    out.view_mut((0, nn), (nn, a1)).copy_from(&(&gains.l1 * &desc.e_f));
    out.view_mut((nn, 0), (a1, nn)).copy_from(&(&bl2 * &desc.c_bar * -(1.0 + 1.0 / tau)));
    out.view_mut((nn, nn + a1), (a1, p)).copy_from(&(&bl2 / tau));
    out.view_mut((nn + a1, 0), (p, nn)).copy_from(&(&desc.c_bar / tau));
    out.view_mut((nn + a1, nn + a1), (p, p)).copy_from(&(DMatrix::identity(p, p) / -tau));
    Ok(out)
}

/// Whether every vertex loop is Hurwitz and every `lambda dt` lies in the RK4 region.
pub fn filter_is_stable(plant: &PlantModel, gains: &ObserverGains, dt: f64, factor: f64) -> Result<bool> {
    let desc = augment_descriptor(plant);
    let vertices = enumerate_vertices(&plant.lipschitz_bounds)?;
    for v in &vertices.vertices {
        let m = filtered_error_matrix(&desc, gains, v, factor * dt)?;
        for ev in linalg::eigenvalues(&m) {
            if ev.re >= 0.0 || rk4_amplification(ev * dt) >= 1.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The filter factor `tau / dt` used for a run.
pub fn resolve_tau_factor(plant: &PlantModel, gains: &ObserverGains, dt: f64, choice: FilterTau) -> Result<f64> {
    match choice {
        FilterTau::Factor(f) => Ok(f),
        FilterTau::Seconds(s) => Ok(s / dt),
        FilterTau::Auto => {
            for &f in AUTO_TAU_LADDER {
                if filter_is_stable(plant, gains, dt, f)? {
                    return Ok(f);
                }
            }
            Err(Error::InvalidValue {
                field: "tau_factor".into(),
                reason: alloc::format!("no factor in {AUTO_TAU_LADDER:?} gives a stable discretized loop"),
            })
        }
    }
}

/// Sampled closed-loop run. Every series is stored row-major, one row per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub n: usize,
    pub n_new: usize,
    pub p: usize,
    pub q: usize,
    pub a1: usize,
    pub a2: usize,
    pub time: Vec<f64>,
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub zeta_hat: Vec<f64>,
    pub y: Vec<f64>,
    pub y_tilde: Vec<f64>,
    pub fa_hat: Vec<f64>,
    pub fa: Vec<f64>,
    pub fs: Vec<f64>,
    /// `[w; w'; fa']`, width `2q + a1`.
    pub omega_bar: Vec<f64>,
    /// Fault window edges of the scenario.
    pub events: Vec<f64>,
    /// Filter time constant over `dt`.
    pub tau_factor: f64,
}

fn row(data: &[f64], k: usize, w: usize) -> &[f64] {
    &data[k * w..(k + 1) * w]
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.time.len()
    }
    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }
    pub fn omega_bar_width(&self) -> usize {
        2 * self.q + self.a1
    }
    pub fn x(&self, k: usize) -> &[f64] {
        row(&self.x, k, self.n)
    }
    pub fn eta(&self, k: usize) -> &[f64] {
        row(&self.eta, k, self.n_new)
    }
    pub fn zeta_hat(&self, k: usize) -> &[f64] {
        row(&self.zeta_hat, k, self.n_new)
    }
    pub fn y(&self, k: usize) -> &[f64] {
        row(&self.y, k, self.p)
    }
    pub fn y_tilde(&self, k: usize) -> &[f64] {
        row(&self.y_tilde, k, self.p)
    }
    pub fn fa_hat(&self, k: usize) -> &[f64] {
        row(&self.fa_hat, k, self.a1)
    }
    pub fn fa(&self, k: usize) -> &[f64] {
        row(&self.fa, k, self.a1)
    }
    pub fn fs(&self, k: usize) -> &[f64] {
        row(&self.fs, k, self.a2)
    }
    /// Sensor-fault estimate: the last `a2` entries of `zeta_hat`.
    pub fn fs_hat(&self, k: usize) -> &[f64] {
        &self.zeta_hat(k)[self.n..]
    }
    pub fn omega_bar(&self, k: usize) -> &[f64] {
        row(&self.omega_bar, k, self.omega_bar_width())
    }
    pub fn fa_error(&self, k: usize, i: usize) -> f64 {
        self.fa(k)[i] - self.fa_hat(k)[i]
    }
    pub fn fs_error(&self, k: usize, i: usize) -> f64 {
        self.fs(k)[i] - self.fs_hat(k)[i]
    }
    /// `e = [zeta - zeta_hat; fa - fa_hat]` with `zeta = [x; fs]`.
    pub fn error(&self, k: usize) -> DVector<f64> {
        let (n, a2, a1) = (self.n, self.a2, self.a1);
        let zh = self.zeta_hat(k);
        DVector::from_fn(n + a2 + a1, |r, _| {
            if r < n {
                self.x(k)[r] - zh[r]
            } else if r < n + a2 {
                self.fs(k)[r - n] - zh[r]
            } else {
                self.fa_error(k, r - n - a2)
            }
        })
    }
    pub fn horizon(&self) -> f64 {
        self.time.last().copied().unwrap_or(0.0)
    }
}

/// Constant matrices of the coupled right-hand side.
struct Rhs<'a> {
    plant: &'a PlantModel,
    desc: DescriptorModel,
    gains: &'a ObserverGains,
    g: &'a dyn Nonlinearity,
    l1b: DMatrix<f64>,
    l1g: DMatrix<f64>,
    l1ef: DMatrix<f64>,
    beta_l2: DMatrix<f64>,
    ht: Vec<DMatrix<f64>>,
    tau: f64,
}

/// Scratch buffers for one evaluation.
struct Buffers {
    fa: DVector<f64>,
    fs: DVector<f64>,
    w: DVector<f64>,
    u: DVector<f64>,
    y: DVector<f64>,
    zeta_hat: DVector<f64>,
    y_tilde: DVector<f64>,
}

impl Buffers {
    fn new(plant: &PlantModel, desc: &DescriptorModel) -> Self {
        Self {
            fa: DVector::zeros(plant.a1()),
            fs: DVector::zeros(plant.a2()),
            w: DVector::zeros(desc.q),
            u: DVector::zeros(plant.s()),
            y: DVector::zeros(plant.p()),
            zeta_hat: DVector::zeros(desc.n_new),
            y_tilde: DVector::zeros(plant.p()),
        }
    }
}

impl Rhs<'_> {
    fn dims(&self) -> (usize, usize, usize, usize) {
        (self.plant.n(), self.desc.n_new, self.plant.a1(), self.plant.p())
    }

    fn signals(&self, sc: &ScenarioConfig, t: f64, select: f64, b: &mut Buffers) {
        sc.fault_a.value_into(t, select, b.fa.as_mut_slice());
        sc.fault_s.value_into(t, select, b.fs.as_mut_slice());
        sc.disturbance.value_into(t, select, b.w.as_mut_slice());
        sc.input.value_into(t, select, b.u.as_mut_slice());
    }

    /// Fills `y`, `zeta_hat` and `y_tilde` from the state and current signals.
    fn outputs(&self, s: &DVector<f64>, b: &mut Buffers) {
        let (n, nn, _, _) = self.dims();
        let x = s.rows(0, n);
        let eta = s.rows(n, nn);
        b.y.gemv(1.0, &self.plant.c, &x, 0.0);
        b.y.gemv(1.0, &self.plant.d_f, &b.fs, 1.0);
        b.y.gemv(1.0, &self.desc.d, &b.w, 1.0);
        b.zeta_hat.copy_from(&eta);
        b.zeta_hat.gemv(1.0, &self.gains.f, &b.y, 1.0);
        b.y_tilde.copy_from(&b.y);
        b.y_tilde.gemv(-1.0, &self.desc.c_bar, &b.zeta_hat, 1.0);
    }

    fn eval_g(&self, h: &[DMatrix<f64>], v: &DVector<f64>) -> DVector<f64> {
        let args: Vec<DVector<f64>> = h.iter().map(|hi| hi * v).collect();
        self.g.eval(&args)
    }

    fn deriv(&self, sc: &ScenarioConfig, t: f64, select: f64, s: &DVector<f64>, out: &mut DVector<f64>, b: &mut Buffers) {
        let (n, nn, a1, p) = self.dims();
        self.signals(sc, t, select, b);
        self.outputs(s, b);
        let x = s.rows(0, n).into_owned();
        let eta = s.rows(n, nn);
        let fa_hat = s.rows(n + nn, a1);
        let z = s.rows(n + nn + a1, p);

        let gx = self.eval_g(&self.plant.h, &x);
        let mut dx = out.rows_mut(0, n);
        dx.gemv(1.0, &self.plant.a, &x, 0.0);
        dx.gemv(1.0, &self.plant.b, &b.u, 1.0);
        dx.gemv(1.0, &self.plant.g, &gx, 1.0);
        dx.gemv(1.0, &self.plant.e_f, &b.fa, 1.0);
        dx.gemv(1.0, &self.desc.e, &b.w, 1.0);

        let gh = self.eval_g(&self.ht, &b.zeta_hat);
        let mut deta = out.rows_mut(n, nn);
        deta.gemv(1.0, &self.gains.n, &eta, 0.0);
        deta.gemv(1.0, &self.gains.j, &b.y, 1.0);
        deta.gemv(1.0, &self.l1b, &b.u, 1.0);
        deta.gemv(1.0, &self.l1g, &gh, 1.0);
        deta.gemv(1.0, &self.l1ef, &fa_hat, 1.0);

        let d = (&b.y_tilde - z) / self.tau;
        let pd = &b.y_tilde + &d;
        out.rows_mut(n + nn, a1).gemv(1.0, &self.beta_l2, &pd, 0.0);
        out.rows_mut(n + nn + a1, p).copy_from(&d);
    }
}

fn check_gains(plant: &PlantModel, desc: &DescriptorModel, g: &ObserverGains) -> Result<()> {
    let (nn, p, n, a1) = (desc.n_new, plant.p(), plant.n(), plant.a1());
    check_shape("N", &g.n, nn, nn)?;
    check_shape("J", &g.j, nn, p)?;
    check_shape("L1", &g.l1, nn, n)?;
    check_shape("F", &g.f, nn, p)?;
    check_shape("L2", &g.l2, a1, p)?;
    Ok(())
}

fn check_script(name: &str, s: &VectorScript, len: usize) -> Result<()> {
    if s.len() != len {
        return Err(Error::Dimension { field: name.into(), expected: (len, 1), found: (s.len(), 1) });
    }
    Ok(())
}

/// OR-combined active-piece masks, one word per component.
fn masks(s: &VectorScript, select: f64) -> Vec<u64> {
    s.components.iter().map(|c| c.active_mask(select)).collect()
}

/// Integrates plant, observer and adaptive law on the grid `k dt`, `k = 0..=steps`.
///
/// Signals are evaluated with their window membership fixed at the step
/// midpoint, so a switch at a grid point takes effect for the whole following
/// step. `eta(0)` defaults to `-F y(0)`, i.e. `zeta_hat(0) = 0`.
pub fn integrate(
    plant: &PlantModel,
    gains: &ObserverGains,
    g: &dyn Nonlinearity,
    scenario: &ScenarioConfig,
) -> Result<Trajectory> {
    scenario.validate()?;
    let desc = augment_descriptor(plant);
    check_gains(plant, &desc, gains)?;
    if g.m() != plant.m() {
        return Err(Error::Dimension { field: "nonlinearity".into(), expected: (plant.m(), 1), found: (g.m(), 1) });
    }
    let (n, nn, a1, a2, p, q) = (plant.n(), desc.n_new, plant.a1(), plant.a2(), plant.p(), desc.q);
    check_script("fault_a", &scenario.fault_a, a1)?;
    check_script("fault_s", &scenario.fault_s, a2)?;
    check_script("disturbance", &scenario.disturbance, q)?;
    check_script("input", &scenario.input, plant.s())?;
    if scenario.x0.len() != n {
        return Err(Error::Dimension { field: "x0".into(), expected: (n, 1), found: (scenario.x0.len(), 1) });
    }
    if scenario.fa_hat0.len() != a1 {
        return Err(Error::Dimension { field: "fa_hat0".into(), expected: (a1, 1), found: (scenario.fa_hat0.len(), 1) });
    }

    let dt = scenario.dt;
    let tau_factor = resolve_tau_factor(plant, gains, dt, scenario.filter)?;
    let rhs = Rhs {
        plant,
        gains,
        g,
        l1b: &gains.l1 * &plant.b,
        l1g: &gains.l1 * &plant.g,
        l1ef: &gains.l1 * &plant.e_f,
        beta_l2: &gains.l2 * gains.beta,
        ht: plant.h.iter().map(|h| h * &desc.t).collect(),
        tau: tau_factor * dt,
        desc,
    };
    let mut buf = Buffers::new(plant, &rhs.desc);

    let dim = n + nn + a1 + p;
    let mut s = DVector::zeros(dim);
    s.rows_mut(0, n).copy_from(&scenario.x0);
    rhs.signals(scenario, 0.0, 0.5 * dt, &mut buf);
    let mut y0 = &plant.c * &scenario.x0 + &plant.d_f * &buf.fs;
    y0.gemv(1.0, &rhs.desc.d, &buf.w, 1.0);
    match &scenario.eta0 {
        Some(e) => {
            if e.len() != nn {
                return Err(Error::Dimension { field: "eta0".into(), expected: (nn, 1), found: (e.len(), 1) });
            }
            s.rows_mut(n, nn).copy_from(e);
        }
        None => s.rows_mut(n, nn).copy_from(&(-(&gains.f * &y0))),
    }
    s.rows_mut(n + nn, a1).copy_from(&scenario.fa_hat0);
    rhs.outputs(&s, &mut buf);
    s.rows_mut(n + nn + a1, p).copy_from(&buf.y_tilde);

    let steps = scenario.steps();
    let samples = steps + 1;
    let wb = 2 * q + a1;
    let mut tr = Trajectory {
        dt,
        n,
        n_new: nn,
        p,
        q,
        a1,
        a2,
        time: Vec::with_capacity(samples),
        x: Vec::with_capacity(samples * n),
        eta: Vec::with_capacity(samples * nn),
        zeta_hat: Vec::with_capacity(samples * nn),
        y: Vec::with_capacity(samples * p),
        y_tilde: Vec::with_capacity(samples * p),
        fa_hat: Vec::with_capacity(samples * a1),
        fa: Vec::with_capacity(samples * a1),
        fs: Vec::with_capacity(samples * a2),
        omega_bar: vec![0.0; samples * wb],
        events: scenario.fault_events(),
        tau_factor,
    };

    let (mut k1, mut k2, mut k3, mut k4) = (DVector::zeros(dim), DVector::zeros(dim), DVector::zeros(dim), DVector::zeros(dim));
    let mut tmp = DVector::zeros(dim);
    let mut prev_masks: Option<(Vec<u64>, Vec<u64>)> = None;
    let mut prev_vals: (Vec<f64>, Vec<f64>) = (vec![0.0; q], vec![0.0; a1]);
    let mut dw = vec![0.0; q];
    let mut dfa = vec![0.0; a1];

    for k in 0..samples {
        let t = k as f64 * dt;
        let sel = t + 0.5 * dt;
        rhs.signals(scenario, t, sel, &mut buf);
        rhs.outputs(&s, &mut buf);
        tr.time.push(t);
        tr.x.extend_from_slice(s.rows(0, n).as_slice());
        tr.eta.extend_from_slice(s.rows(n, nn).as_slice());
        tr.zeta_hat.extend_from_slice(buf.zeta_hat.as_slice());
        tr.y.extend_from_slice(buf.y.as_slice());
        tr.y_tilde.extend_from_slice(buf.y_tilde.as_slice());
        tr.fa_hat.extend_from_slice(s.rows(n + nn, a1).as_slice());
        tr.fa.extend_from_slice(buf.fa.as_slice());
        tr.fs.extend_from_slice(buf.fs.as_slice());

        // omega_bar: analytic derivatives, replaced by a forward difference on
        // the interval before a window switch.
        let m = (masks(&scenario.disturbance, sel), masks(&scenario.fault_a, sel));
        let ob = &mut tr.omega_bar[k * wb..(k + 1) * wb];
        ob[..q].copy_from_slice(buf.w.as_slice());
        for (i, c) in scenario.disturbance.components.iter().enumerate() {
            dw[i] = c.derivative_with(t, sel);
        }
        for (i, c) in scenario.fault_a.components.iter().enumerate() {
            dfa[i] = c.derivative_with(t, sel);
        }
        ob[q..2 * q].copy_from_slice(&dw);
        ob[2 * q..].copy_from_slice(&dfa);
        if let Some((pw, pf)) = &prev_masks {
            let prev = &mut tr.omega_bar[(k - 1) * wb..k * wb];
            for i in 0..q {
                if pw[i] != m.0[i] {
                    prev[q + i] = (buf.w[i] - prev_vals.0[i]) / dt;
                }
            }
            for i in 0..a1 {
                if pf[i] != m.1[i] {
                    prev[2 * q + i] = (buf.fa[i] - prev_vals.1[i]) / dt;
                }
            }
        }
        prev_vals.0.copy_from_slice(buf.w.as_slice());
        prev_vals.1.copy_from_slice(buf.fa.as_slice());
        prev_masks = Some(m);

        if k == steps {
            break;
        }
        let th = t + 0.5 * dt;
        rhs.deriv(scenario, t, sel, &s, &mut k1, &mut buf);
        tmp.copy_from(&s);
        tmp.axpy(0.5 * dt, &k1, 1.0);
        rhs.deriv(scenario, th, sel, &tmp, &mut k2, &mut buf);
        tmp.copy_from(&s);
        tmp.axpy(0.5 * dt, &k2, 1.0);
        rhs.deriv(scenario, th, sel, &tmp, &mut k3, &mut buf);
        tmp.copy_from(&s);
        tmp.axpy(dt, &k3, 1.0);
        rhs.deriv(scenario, t + dt, sel, &tmp, &mut k4, &mut buf);
        s.axpy(dt / 6.0, &k1, 1.0);
        s.axpy(dt / 3.0, &k2, 1.0);
        s.axpy(dt / 3.0, &k3, 1.0);
        s.axpy(dt / 6.0, &k4, 1.0);
        if s.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::Diverged { step: k + 1, time: t + dt });
        }
    }
    Ok(tr)
}
