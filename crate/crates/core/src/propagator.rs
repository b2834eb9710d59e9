//! Applying `V` and driving the contraction loop end to end.

use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::contraction::{ContractionState, Steady};
use crate::error::{Error, Result};
use crate::pimetric::{
    gershgorin_sigma_inv, spectral_radius, ForwardSweep, SigmaSweep, LanczosOptions, MCholeskyFactor, PiCholeskyFactor, PiMetric,
};
use crate::rate::{RateMatrix, Tolerances};
use crate::scalar::{compensated_sum, Scalar};
use crate::simplex::project_pi;

/// Choice of `V_TT`: `diag(1ᵀM)⁻¹` for Type A, `M⁻¹` for Type B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    TypeA,
    TypeB,
}

/// How the reference time `t^(k)` attached to a snapshot is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeMethod {
    /// `1 / |D_jj|` of the pivot just contracted.
    Diag,
    /// `ln 2 / sqrt(σ(K_SS) ρ(D))` with Lanczos estimates.
    Eigen,
    /// Same with the Gershgorin surrogates `σ̂`, `ρ̂`.
    Gershgorin,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::TypeA => "A",
            Variant::TypeB => "B",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" | "typea" => Ok(Variant::TypeA),
            "b" | "typeb" => Ok(Variant::TypeB),
            _ => Err(Error::InvalidInput(format!("unknown variant '{s}', expected A or B"))),
        }
    }
}

impl fmt::Display for TimeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeMethod::Diag => "diag",
            TimeMethod::Eigen => "eigen",
            TimeMethod::Gershgorin => "gershgorin",
        })
    }
}

impl FromStr for TimeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "diag" => Ok(TimeMethod::Diag),
            "eigen" => Ok(TimeMethod::Eigen),
            "gershgorin" => Ok(TimeMethod::Gershgorin),
            _ => Err(Error::InvalidInput(format!("unknown time method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub variant: Variant,
    pub time_method: TimeMethod,
    /// Stop once `t^(k)` exceeds this many seconds.
    pub t_max: f64,
    pub tol: Tolerances,
    pub lanczos: LanczosOptions,
    /// Keep `Vp` before clamping or projection in each snapshot.
    pub keep_unprojected: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            variant: Variant::TypeA,
            time_method: TimeMethod::Diag,
            t_max: f64::INFINITY,
            tol: Tolerances::default(),
            lanczos: LanczosOptions::default(),
            keep_unprojected: false,
        }
    }
}

/// Spectral quantities behind an `eigen` or `gershgorin` reference time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectra<T> {
    pub sigma_kss: T,
    pub rho_d: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub k: usize,
    /// Seconds; `+∞` on the terminal equilibrium record.
    pub t: T,
    pub q: Vec<T>,
    pub unprojected: Option<Vec<T>>,
    /// State contracted at this step.
    pub pivot: Option<usize>,
    pub spectra: Option<Spectra<T>>,
    /// Set on the terminal equilibrium record, which is not an iterate.
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub variant: Variant,
    pub time_method: TimeMethod,
    pub entries: Vec<Snapshot<T>>,
    /// Pivots behind the emitted snapshots, in order.
    pub pivots: Vec<usize>,
    /// Steps whose time is smaller than the previous one.
    pub time_violations: Vec<usize>,
    /// Contraction reached the numerical rank of `K`.
    pub exhausted: bool,
}

impl<T: Scalar> Trajectory<T> {
    /// Entries that are genuine iterates (excludes the terminal record).
    pub fn iterates(&self) -> impl Iterator<Item = &Snapshot<T>> {
        self.entries.iter().filter(|s| !s.synthetic)
    }
}

/// `Ω p = p_T − K_TS K_SS⁻¹ p_S` over all states, zero on `S`.
pub fn omega_apply<T: Scalar>(st: &ContractionState<T>, p: &[T]) -> Vec<T> {
    st.chol().omega_apply(p)
}

/// `V p = Ω* V_TT Ω p` without forming `V`. No clamping or projection.
pub fn apply_v<T: Scalar>(st: &ContractionState<T>, variant: Variant, p: &[T]) -> Result<Vec<T>> {
    let chol = st.chol();
    let w = chol.omega_apply(p);
    let z = match variant {
        Variant::TypeA => {
            let wpi = chol.omega_apply(st.pi());
            type_a_scale(&w, &wpi, st.pi(), chol)
        }
        Variant::TypeB => st.m_factor().ok_or(Error::TypeBWithoutMFactor)?.solve(&w),
    };
    Ok(chol.omega_adjoint_apply(&z))
}

/// `V_TT w` for Type A. `1ᵀM = Π_T⁻¹ Ω π`, so the divisor comes from one
/// more forward sweep instead of an adjoint solve.
fn type_a_scale<T: Scalar>(w: &[T], omega_pi: &[T], pi: &[T], chol: &PiCholeskyFactor<T>) -> Vec<T> {
    (0..w.len())
        .map(|i| if chol.is_contracted(i) { T::zero() } else { w[i] * pi[i] / omega_pi[i] })
        .collect()
}

/// Reference time after a contraction step. `pivot_diag` is `D_jj` of the
/// pivot before it was eliminated.
pub fn reference_time<T: Scalar>(
    st: &ContractionState<T>,
    method: TimeMethod,
    pivot_diag: T,
    lanczos: &LanczosOptions,
) -> Result<(T, Option<Spectra<T>>)> {
    reference_time_with(st, method, pivot_diag, lanczos, None)
}

fn reference_time_with<T: Scalar>(
    st: &ContractionState<T>,
    method: TimeMethod,
    pivot_diag: T,
    lanczos: &LanczosOptions,
    sigma_sweep: Option<&mut SigmaSweep<T>>,
) -> Result<(T, Option<Spectra<T>>)> {
    let ln2 = T::LN_2();
    match method {
        TimeMethod::Diag => Ok((T::one() / pivot_diag.abs(), None)),
        TimeMethod::Gershgorin => {
            let rho = st.gershgorin_rho_d();
            if rho == T::zero() {
                return Err(Error::InfiniteTime);
            }
            let inv = match sigma_sweep {
                Some(sw) => sw.value(st.chol()),
                None => gershgorin_sigma_inv(st.chol()),
            };
            let sigma = T::one() / inv;
            Ok((ln2 / (sigma * rho).sqrt(), Some(Spectra { sigma_kss: sigma, rho_d: rho })))
        }
        TimeMethod::Eigen => {
            let rho = match lanczos_rho_d(st, lanczos) {
                Ok(r) => r,
                Err(Error::NoConvergence { iterations }) => {
                    warn!("ρ(D) did not converge in {iterations} Lanczos steps; using the Gershgorin bound");
                    st.gershgorin_rho_d()
                }
                Err(e) => return Err(e),
            };
            if rho == T::zero() {
                return Err(Error::InfiniteTime);
            }
            let sigma = match lanczos_sigma_kss(st, lanczos) {
                Ok(s) => s,
                Err(Error::NoConvergence { iterations }) => {
                    warn!("σ(K_SS) did not converge in {iterations} Lanczos steps; using the Gershgorin bound");
                    T::one() / gershgorin_sigma_inv(st.chol())
                }
                Err(e) => return Err(e),
            };
            Ok((ln2 / (sigma * rho).sqrt(), Some(Spectra { sigma_kss: sigma, rho_d: rho })))
        }
    }
}

/// `ρ(D)` by Lanczos in the metric `Π_T`.
pub fn lanczos_rho_d<T: Scalar>(st: &ContractionState<T>, opts: &LanczosOptions) -> Result<T> {
    let t = st.uncontracted();
    let metric = PiMetric::new(t.iter().map(|&i| st.pi()[i]).collect())?;
    let mut full = vec![T::zero(); st.n()];
    spectral_radius(
        |x: &[T]| {
            for (&s, &v) in t.iter().zip(x) {
                full[s] = v;
            }
            let y = st.apply_d(&full);
            t.iter().map(|&s| y[s]).collect()
        },
        &metric,
        opts,
    )
}

/// `σ(K_SS) = 1 / ρ(K_SS⁻¹)` by Lanczos on the solve operator in `Π_S`.
pub fn lanczos_sigma_kss<T: Scalar>(st: &ContractionState<T>, opts: &LanczosOptions) -> Result<T> {
    let s = st.contracted().to_vec();
    let metric = PiMetric::new(s.iter().map(|&i| st.pi()[i]).collect())?;
    let chol = st.chol();
    let mut full = vec![T::zero(); st.n()];
    let rho_inv = spectral_radius(
        |x: &[T]| {
            for (&j, &v) in s.iter().zip(x) {
                full[j] = v;
            }
            let y = chol.solve_kss(&full);
            s.iter().map(|&j| y[j]).collect()
        },
        &metric,
        opts,
    )?;
    Ok(T::one() / rho_inv)
}

/// Runs the contraction from initial distribution `p` and returns the
/// snapshots `(t^(k), q^(k))`.
///
/// Type B needs the whole pivot sequence before its factor of `M` can be
/// ordered, so it contracts once to fix pivots and times and then replays the
/// stored Cholesky columns to produce outputs.
pub fn run<T: Scalar>(k: &RateMatrix<T>, p: &[T], opts: &RunOptions) -> Result<Trajectory<T>> {
    check_initial(k, p)?;
    if !(opts.t_max >= 0.0) {
        return Err(Error::InvalidInput(format!("t_max must be nonnegative, got {}", opts.t_max)));
    }
    opts.tol.check()?;
    let t_max = T::of(opts.t_max);
    let n = k.n();
    let metric = k.metric();

    let mut st = ContractionState::new(k, &opts.tol);
    let mut steps: Vec<(usize, T, Option<Spectra<T>>)> = Vec::new();
    let mut sweep_p = ForwardSweep::new(p);
    let mut sweep_pi = ForwardSweep::new(k.pi());
    let mut sigma_sweep = SigmaSweep::new(k.pi());
    let mut traj = Trajectory {
        variant: opts.variant,
        time_method: opts.time_method,
        entries: vec![Snapshot {
            k: 0,
            t: T::zero(),
            q: p.to_vec(),
            unprojected: None,
            pivot: None,
            spectra: None,
            synthetic: false,
        }],
        pivots: Vec::new(),
        time_violations: Vec::new(),
        exhausted: false,
    };

    let mut terminal = true;
    loop {
        let j = match st.select_steady() {
            Steady::Pivot(j) => j,
            Steady::Exhausted => {
                traj.exhausted = true;
                break;
            }
        };
        let djj = st.d_diag(j);
        st.schur_step(j)?;
        let (t, spectra) = match reference_time_with(&st, opts.time_method, djj, &opts.lanczos, Some(&mut sigma_sweep)) {
            Ok(v) => v,
            Err(Error::InfiniteTime) => {
                debug!("reduced system fully relaxed after {} steps", st.k());
                terminal = opts.t_max == f64::INFINITY;
                break;
            }
            Err(e) => return Err(e),
        };
        if t > t_max {
            terminal = false;
            break;
        }
        steps.push((j, t, spectra));
        if opts.variant == Variant::TypeA {
            sweep_p.advance(st.chol());
            sweep_pi.advance(st.chol());
            let z = type_a_scale(sweep_p.raw(), sweep_pi.raw(), k.pi(), st.chol());
            let raw = st.chol().omega_adjoint_apply(&z);
            let q = finish_type_a(&raw, &metric);
            push_snapshot(&mut traj, st.k(), j, t, q, opts.keep_unprojected.then_some(raw), spectra);
        }
    }

    if opts.variant == Variant::TypeB {
        replay_type_b(k, p, st.chol(), &steps, opts, &metric, &mut traj)?;
    }
    traj.pivots = steps.iter().map(|s| s.0).collect();
    if terminal {
        traj.entries.push(Snapshot {
            k: traj.pivots.len(),
            t: T::infinity(),
            q: equilibrium_limit(k, p),
            unprojected: None,
            pivot: None,
            spectra: None,
            synthetic: true,
        });
    }
    debug_assert!(n == 0 || traj.entries.iter().all(|e| e.q.len() == n));
    Ok(traj)
}

fn replay_type_b<T: Scalar>(
    k: &RateMatrix<T>,
    p: &[T],
    chol: &PiCholeskyFactor<T>,
    steps: &[(usize, T, Option<Spectra<T>>)],
    opts: &RunOptions,
    metric: &PiMetric<T>,
    traj: &mut Trajectory<T>,
) -> Result<()> {
    let n = k.n();
    let pi = k.pi();
    let mut order: Vec<usize> = steps.iter().map(|s| s.0).collect();
    let mut seen = vec![false; n];
    for &j in &order {
        seen[j] = true;
    }
    order.extend((0..n).filter(|&i| !seen[i]));
    let mut mfac = MCholeskyFactor::new(&order, pi)?;
    let mut replay = PiCholeskyFactor::new(pi);
    let mut sweep = ForwardSweep::new(p);
    for (idx, &(j, t, spectra)) in steps.iter().enumerate() {
        let (cj, diag, off) = chol.column(idx);
        debug_assert_eq!(cj, j);
        // recover D_jj and D_Tj from the stored column
        let d_jj = -(diag * diag) / pi[j];
        let ratio = diag / pi[j];
        let d_col: Vec<(usize, T)> = off.iter().map(|&(i, c)| (i, -(c * ratio))).collect();
        let update = mfac.m_rank_one_update(j, d_jj, &d_col);
        replay.push_column(j, diag, off.to_vec());
        match update {
            Ok(()) => {}
            Err(Error::UpdateBreakdown { step }) => {
                warn!("rank-one update of the M factor broke down at step {step}; refactorizing");
                mfac.refactorize(&replay)?;
            }
            Err(e) => return Err(e),
        }
        sweep.advance(&replay);
        let z = mfac.solve(sweep.raw());
        let raw = replay.omega_adjoint_apply(&z);
        let q = project_pi(&raw, metric).q;
        push_snapshot(traj, idx + 1, j, t, q, opts.keep_unprojected.then_some(raw), spectra);
    }
    Ok(())
}

fn push_snapshot<T: Scalar>(
    traj: &mut Trajectory<T>,
    k: usize,
    pivot: usize,
    t: T,
    q: Vec<T>,
    unprojected: Option<Vec<T>>,
    spectra: Option<Spectra<T>>,
) {
    if let Some(prev) = traj.entries.last() {
        if k > 1 && t < prev.t {
            traj.time_violations.push(k);
        }
    }
    traj.entries.push(Snapshot { k, t, q, unprojected, pivot: Some(pivot), spectra, synthetic: false });
}

/// Type A outputs are nonnegative in exact arithmetic: round-off negatives
/// are clamped, and the simplex projection is used only if the result is
/// still off the simplex.
fn finish_type_a<T: Scalar>(raw: &[T], metric: &PiMetric<T>) -> Vec<T> {
    let max = raw.iter().fold(T::zero(), |m, &v| m.max(v));
    let floor = -(T::of(1e-14) * max);
    if raw.iter().any(|&v| v < floor) {
        warn!("type A output has entries below -1e-14 * max; projecting");
        return project_pi(raw, metric).q;
    }
    let q: Vec<T> = raw.iter().map(|&v| v.max(T::zero())).collect();
    let sum = compensated_sum(q.iter().copied());
    if (sum - T::one()).abs() > T::of(1e-12) {
        return project_pi(&q, metric).q;
    }
    q
}

/// `lim_{t→∞} e^{tK} p`: each connected component keeps its mass,
/// distributed in proportion to `π`.
pub fn equilibrium_limit<T: Scalar>(k: &RateMatrix<T>, p: &[T]) -> Vec<T> {
    let pi = k.pi();
    let mut q = vec![T::zero(); k.n()];
    for comp in k.components() {
        let mass = compensated_sum(comp.iter().map(|&i| p[i]));
        let weight = compensated_sum(comp.iter().map(|&i| pi[i]));
        for &i in &comp {
            q[i] = pi[i] * mass / weight;
        }
    }
    q
}

fn check_initial<T: Scalar>(k: &RateMatrix<T>, p: &[T]) -> Result<()> {
    if p.len() != k.n() {
        return Err(Error::DimensionMismatch(format!("initial vector has {} entries, system has {}", p.len(), k.n())));
    }
    if let Some(i) = p.iter().position(|&v| !v.is_finite() || v < T::zero()) {
        return Err(Error::InvalidInput(format!("initial vector entry {i} is negative or not finite")));
    }
    let sum = compensated_sum(p.iter().copied());
    if (sum - T::one()).abs() > T::of(1e-9) {
        return Err(Error::InvalidInput(format!("initial vector sums to {sum}, not 1")));
    }
    Ok(())
}
