"""Monte Carlo simulation of the continuous-time feedback coding scheme.

The channel output increment over one step of size delta is

    dY = [A(t_k) Theta0 + lam Z0(t_k) + lam zeta0 e^{-kappa t_k}] delta + dB_k,

where Z0 is the zero-start OU component (exactly discretized) and zeta0 the
stationary tail.  The receiver runs an exact Kalman filter on the augmented
linear-Gaussian state (Theta0, Z0, zeta0); the OU transition noise is
correlated with the measurement noise because both ride on the same Brownian
motion, and the update uses a Joseph-form covariance recursion that stays
positive semidefinite for any gain.

Randomness contract (all stochastic entry points): trial i uses
``Generator(PCG64(SeedSequence(master_seed).spawn(trials)[i]))`` and draws,
in order, a head block of 2 standard normals (Theta0 slot, then zeta0 slot,
scaled by (2 kappa)^{-1/2}) followed by a (2, steps) standard-normal matrix
whose first row scales into the Brownian increments and whose second row
supplies the extra OU randomness.  Aggregation is in trial order with a fixed
batch size, so results are bit-identical regardless of parallelism or
backend.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.signal import lfilter
from scipy.stats import norm

from . import backends
from .abel import OdeTrajectory
from .channel import ChannelParams
from .errors import FilterDivergence


@dataclass(frozen=True)
class SimConfig:
    """Simulation grid and sampling plan.

    horizon T and steps n fix the step delta = T/n; output_points rows of the
    curves are recorded at (near-)equispaced step indices including 0 and n.
    batch_size only groups trials for vectorization; it never changes results.
    """

    horizon: float
    steps: int
    trials: int
    master_seed: int
    output_points: int = 101
    batch_size: int = 512

    def __post_init__(self) -> None:
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError("horizon must be positive and finite")
        if self.steps < 100:
            raise ValueError("steps must be at least 100")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be a nonnegative integer")
        if self.output_points < 2:
            raise ValueError("output_points must be at least 2")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")

    @property
    def delta(self) -> float:
        return self.horizon / self.steps


@dataclass(frozen=True)
class NoisePath:
    """One sampled path of the channel noise, with its building blocks.

    brownian_increments[k] = dB_k ~ N(0, delta); ou_state[k] = Z0(t_k) for
    k = 0..n (exact OU recursion); tail = zeta0 ~ N(0, 1/(2 kappa));
    z_increments[k] = lam (Z0(t_k) + zeta0 e^{-kappa t_k}) delta + dB_k.
    """

    brownian_increments: np.ndarray
    ou_state: np.ndarray
    tail: float
    z_increments: np.ndarray


@dataclass(frozen=True)
class SimReport:
    """Aggregated Monte Carlo output.

    Curves are sampled at `times`; half-widths are 95% normal-approximation
    bands (infinite for a single trial).  mmse_analytic is the scheme's law
    (1 + int_0^t H^2)^{-1}, evaluated through the exact identity
    (A^2/P)' = H^2 as P/A(t)^2; mmse_filter is the deterministic conditional
    variance of the discrete filter, which differs from it by O(delta).
    empirical_rate = log(A(T)/sqrt(P))/T from the gain trajectory.
    """

    times: np.ndarray
    mmse_emp: np.ndarray
    mmse_analytic: np.ndarray
    mmse_hw: np.ndarray
    power_emp: np.ndarray
    power_hw: np.ndarray
    mmse_filter: np.ndarray
    empirical_rate: float
    master_seed: int
    backend: str
    innovations: np.ndarray | None = None

    @property
    def mmse_curve(self) -> list[tuple[float, float, float, float]]:
        return [
            (float(t), float(e), float(a), float(h))
            for t, e, a, h in zip(
                self.times, self.mmse_emp, self.mmse_analytic, self.mmse_hw
            )
        ]

    @property
    def power_curve(self) -> list[tuple[float, float, float]]:
        return [
            (float(t), float(e), float(h))
            for t, e, h in zip(self.times, self.power_emp, self.power_hw)
        ]


def _trial_generator(master_seed: int, trial: int, total: int) -> np.random.Generator:
    # child `trial` of the root sequence, built directly: identical stream to
    # SeedSequence(master_seed).spawn(total)[trial] without the O(total) spawn
    child = np.random.SeedSequence(master_seed, spawn_key=(trial,))
    return np.random.Generator(np.random.PCG64(child))


def _step_constants(params: ChannelParams, delta: float) -> tuple[float, float, float, float]:
    """(u, sig2, rho, c2): OU decay, transition-noise variance, its covariance
    with the Brownian increment, and the independent-component scale."""
    kappa = params.kappa
    u = math.exp(-kappa * delta)
    sig2 = -math.expm1(-2.0 * kappa * delta) / (2.0 * kappa)
    rho = -math.expm1(-kappa * delta) / kappa
    c2 = math.sqrt(max(sig2 - rho * rho / delta, 0.0))
    return u, sig2, rho, c2


def simulate_noise(params: ChannelParams, cfg: SimConfig, trial: int = 0) -> NoisePath:
    """Sample one channel-noise path (trial `trial` of cfg.trials)."""
    if not 0 <= trial < cfg.trials:
        raise ValueError("trial index out of range")
    g = _trial_generator(cfg.master_seed, trial, cfg.trials)
    head = g.standard_normal(2)
    xi = g.standard_normal((2, cfg.steps))
    delta = cfg.delta
    u, _, rho, c2 = _step_constants(params, delta)
    zeta0 = head[1] / math.sqrt(2.0 * params.kappa)
    db = math.sqrt(delta) * xi[0]
    eta = (rho / math.sqrt(delta)) * xi[0] + c2 * xi[1]
    ou = np.empty(cfg.steps + 1)
    ou[0] = 0.0
    ou[1:] = lfilter([1.0], [1.0, -u], eta)
    tk = np.arange(cfg.steps) * delta
    z_inc = params.lam * (ou[:-1] + zeta0 * np.exp(-params.kappa * tk)) * delta + db
    return NoisePath(brownian_increments=db, ou_state=ou, tail=float(zeta0), z_increments=z_inc)


def stationary_arma_noise(params: ChannelParams, cfg: SimConfig) -> np.ndarray:
    """Sample the stationarized discrete noise, shape (trials, steps).

    Each row is Z~_k = B_k + lam d_k (m(delta) zeta0 + sum_{i<k} e^{kappa
    t_{i+1}} B_i) with d_k = e^{-kappa t_k} (1-e^{-kappa delta})/kappa and
    m(x) = sqrt(2 kappa x / (1 - e^{-2 kappa x})); the tail weight makes the
    sequence exactly stationary.  Each path is verified against the one-lag
    recursion Z~_{k+1} = e^{-kappa delta} Z~_k + B_{k+1} + theta(delta) B_k.
    """
    n = cfg.steps
    delta = cfg.delta
    kappa = params.kappa
    u, _, rho, _ = _step_constants(params, delta)
    ratio = params.lam / kappa
    theta = ratio - (ratio + 1.0) * u
    m_delta = math.sqrt(2.0 * kappa * delta / -math.expm1(-2.0 * kappa * delta))
    decay = np.exp(-kappa * np.arange(n) * delta)
    sqrt_delta = math.sqrt(delta)
    out = np.empty((cfg.trials, n))
    children = np.random.SeedSequence(cfg.master_seed).spawn(cfg.trials)
    for i in range(cfg.trials):
        g = np.random.Generator(np.random.PCG64(children[i]))
        head = g.standard_normal(2)
        xi = g.standard_normal((2, n))
        zeta0 = head[1] / math.sqrt(2.0 * kappa)
        b = sqrt_delta * xi[0]
        # w_k = sum_{i<k} e^{-kappa (t_k - t_{i+1})} B_i via the stable
        # recursion w_{k+1} = u w_k + B_k; then d_k * sum = rho * w_k.
        w = lfilter([0.0, 1.0], [1.0, -u], b)
        z = b + params.lam * (rho * w + (rho * m_delta * zeta0) * decay)
        resid = z[1:] - (u * z[:-1] + b[1:] + theta * b[:-1])
        scale = max(1.0, float(np.max(np.abs(z))))
        if not np.all(np.abs(resid) < 1e-9 * scale):
            raise RuntimeError("stationarized-noise recursion identity violated")
        out[i] = z
    return out


def arma_recursion_residual(z: np.ndarray, brownian: np.ndarray,
                            params: ChannelParams, delta: float) -> float:
    """Max deviation of a path from the stationary one-lag recursion."""
    u = math.exp(-params.kappa * delta)
    ratio = params.lam / params.kappa
    theta = ratio - (ratio + 1.0) * u
    resid = z[1:] - (u * z[:-1] + brownian[1:] + theta * brownian[:-1])
    return float(np.max(np.abs(resid))) if resid.size else 0.0


def _gain_on_grid(traj: OdeTrajectory, params: ChannelParams, times: np.ndarray) -> np.ndarray:
    """log A on the simulation grid via monotone Hermite data ((log A)' = P g^2)."""
    if traj.power != params.power:
        raise ValueError("trajectory was computed for a different power")
    if traj.horizon < times[-1] - 1e-9:
        raise ValueError("trajectory horizon shorter than the simulation horizon")
    spline = CubicHermiteSpline(traj.times, traj.log_a, params.power * traj.g**2)
    return np.asarray(spline(np.minimum(times, traj.times[-1])))


def _filter_coefficients(params: ChannelParams, cfg: SimConfig, amp: np.ndarray):
    """Per-step filter gains and the deterministic variance curve.

    Returns (K0, K1, K2, inv_sqrt_s, var_theta) where var_theta[k] is the
    conditional variance of Theta0 given the first k increments.  Raises
    FilterDivergence if the covariance recursion leaves the PSD cone.
    """
    n = cfg.steps
    delta = cfg.delta
    lam = params.lam
    kappa = params.kappa
    u, sig2, rho, _ = _step_constants(params, delta)
    f_diag = np.array([1.0, u, 1.0])
    q = np.diag([0.0, sig2, 0.0])
    c = np.array([0.0, rho, 0.0])
    p = np.diag([1.0, 0.0, 1.0 / (2.0 * kappa)])
    k0 = np.empty(n)
    k1 = np.empty(n)
    k2 = np.empty(n)
    inv_sqrt_s = np.empty(n)
    var_theta = np.empty(n + 1)
    var_theta[0] = 1.0
    lam_delta = lam * delta
    for k in range(n):
        h = np.array([amp[k] * delta, lam_delta, lam * math.exp(-kappa * k * delta) * delta])
        ph = p @ h
        s = float(h @ ph) + delta
        gain = (f_diag * ph + c) / s
        m = f_diag[:, None] * p - np.outer(gain, ph)
        p = (
            m * f_diag[None, :]
            - np.outer(m @ h, gain)
            + q
            + delta * np.outer(gain, gain)
            - np.outer(c, gain)
            - np.outer(gain, c)
        )
        p = 0.5 * (p + p.T)
        if not np.all(np.isfinite(p)) or min(p[0, 0], p[1, 1], p[2, 2]) < -1e-9:
            raise FilterDivergence(f"covariance lost positive semidefiniteness at step {k}")
        k0[k] = gain[0]
        k1[k] = gain[1]
        k2[k] = gain[2]
        inv_sqrt_s[k] = 1.0 / math.sqrt(s)
        var_theta[k + 1] = p[0, 0]
    return k0, k1, k2, inv_sqrt_s, var_theta


def _draw_batch(children, lo: int, hi: int, n: int):
    m = hi - lo
    th0 = np.empty(m)
    zeta0 = np.empty(m)
    xi1 = np.empty((m, n))
    xi2 = np.empty((m, n))
    gens = []
    for i in range(m):
        g = np.random.Generator(np.random.PCG64(children[lo + i]))
        head = g.standard_normal(2)
        xi = g.standard_normal((2, n))
        th0[i] = head[0]
        zeta0[i] = head[1]
        xi1[i] = xi[0]
        xi2[i] = xi[1]
        gens.append(g)
    return th0, zeta0, xi1, xi2, gens


def run_sk_scheme(params: ChannelParams, cfg: SimConfig, traj: OdeTrajectory,
                  backend: str | None = None,
                  return_innovations: bool = False) -> SimReport:
    """Run the feedback scheme for cfg.trials trials and aggregate.

    `traj` must come from the gain ODE for the same parameters with horizon
    at least cfg.horizon.  Results are bit-identical for a fixed
    (master_seed, cfg) across backends and thread counts.
    """
    kern = backends.get_backend(backend)
    n = cfg.steps
    delta = cfg.delta
    times = np.arange(n + 1) * delta
    log_amp = _gain_on_grid(traj, params, times)
    amp = np.exp(log_amp)
    k0, k1, k2, inv_sqrt_s, var_theta = _filter_coefficients(params, cfg, amp)
    u, _, rho, c2 = _step_constants(params, delta)
    sqrt_delta = math.sqrt(delta)
    c1 = rho / sqrt_delta
    h_amp = amp[:n] * delta
    h_zeta = params.lam * np.exp(-params.kappa * times[:n]) * delta
    out_idx = np.unique(np.round(np.linspace(0, n, cfg.output_points)).astype(np.int64))
    n_out = out_idx.size
    zeta_scale = 1.0 / math.sqrt(2.0 * params.kappa)

    children = np.random.SeedSequence(cfg.master_seed).spawn(cfg.trials)
    edges = list(range(0, cfg.trials, cfg.batch_size)) + [cfg.trials]
    n_batches = len(edges) - 1
    # per-trial rows, so the reduction below is independent of batching
    sq_rows = np.empty((cfg.trials, n_out))
    innov_rows = np.empty((cfg.trials, n)) if return_innovations else None

    def run_batch(b: int):
        lo, hi = edges[b], edges[b + 1]
        th0, zeta0, xi1, xi2, _ = _draw_batch(children, lo, hi, n)
        zeta0 = zeta0 * zeta_scale
        mtheta = np.empty(hi - lo)
        innov = innov_rows[lo:hi] if return_innovations else None
        kern.filter_batch(th0, zeta0, xi1, xi2, h_amp, h_zeta, k0, k1, k2,
                          inv_sqrt_s, u, sqrt_delta, params.lam * delta, c1, c2,
                          out_idx, sq_rows[lo:hi], mtheta, innov)

    workers = backends.thread_count(n_batches)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_batch, range(n_batches)))
    else:
        for b in range(n_batches):
            run_batch(b)

    trials = cfg.trials
    mean = sq_rows.sum(axis=0) / trials
    if trials > 1:
        dev = sq_rows - mean
        var = (dev * dev).sum(axis=0) / (trials - 1)
        hw = 1.96 * np.sqrt(var / trials)
    else:
        hw = np.full(n_out, np.inf)
    amp_out_sq = amp[out_idx] ** 2
    log_p = math.log(params.power)
    report = SimReport(
        times=times[out_idx],
        mmse_emp=mean,
        mmse_analytic=np.exp(log_p - 2.0 * log_amp[out_idx]),
        mmse_hw=hw,
        power_emp=amp_out_sq * mean,
        power_hw=amp_out_sq * hw,
        mmse_filter=var_theta[out_idx],
        empirical_rate=float((log_amp[n] - 0.5 * log_p) / cfg.horizon),
        master_seed=cfg.master_seed,
        backend=kern.NAME,
        innovations=innov_rows,
    )
    return report


def decode_message(params: ChannelParams, cfg: SimConfig, traj: OdeTrajectory,
                   grid_size: int, backend: str | None = None) -> float:
    """Empirical decoding error rate for a grid of `grid_size` messages.

    Message w in {1..M} maps to the equiprobable-cell Gaussian grid point
    Phi^{-1}((w - 1/2)/M); the decoder picks the grid point nearest the
    filter's terminal estimate.  The per-trial message index is drawn after
    the standard noise block (one extra integer draw per trial).
    """
    m_size = int(grid_size)
    if m_size < 1:
        raise ValueError("grid_size must be at least 1")
    if m_size == 1:
        return 0.0
    kern = backends.get_backend(backend)
    n = cfg.steps
    delta = cfg.delta
    times = np.arange(n + 1) * delta
    log_amp = _gain_on_grid(traj, params, times)
    amp = np.exp(log_amp)
    k0, k1, k2, inv_sqrt_s, _ = _filter_coefficients(params, cfg, amp)
    u, _, rho, c2 = _step_constants(params, delta)
    sqrt_delta = math.sqrt(delta)
    c1 = rho / sqrt_delta
    h_amp = amp[:n] * delta
    h_zeta = params.lam * np.exp(-params.kappa * times[:n]) * delta
    out_idx = np.array([n], dtype=np.int64)
    zeta_scale = 1.0 / math.sqrt(2.0 * params.kappa)
    grid = norm.ppf((np.arange(1, m_size + 1) - 0.5) / m_size)

    children = np.random.SeedSequence(cfg.master_seed).spawn(cfg.trials)
    errors = 0
    for lo in range(0, cfg.trials, cfg.batch_size):
        hi = min(lo + cfg.batch_size, cfg.trials)
        _, zeta0, xi1, xi2, gens = _draw_batch(children, lo, hi, n)
        sent = np.array([g.integers(1, m_size + 1) for g in gens])
        th0 = grid[sent - 1]
        zeta0 = zeta0 * zeta_scale
        sqerr = np.empty((hi - lo, 1))
        mtheta = np.empty(hi - lo)
        kern.filter_batch(th0, zeta0, xi1, xi2, h_amp, h_zeta, k0, k1, k2,
                          inv_sqrt_s, u, sqrt_delta, params.lam * delta, c1, c2,
                          out_idx, sqerr, mtheta, None)
        base = np.floor(norm.cdf(mtheta) * m_size + 0.5).astype(np.int64)
        w_lo = np.clip(base, 1, m_size)
        w_hi = np.clip(base + 1, 1, m_size)
        d_lo = np.abs(grid[w_lo - 1] - mtheta)
        d_hi = np.abs(grid[w_hi - 1] - mtheta)
        decoded = np.where(d_hi < d_lo, w_hi, w_lo)
        errors += int(np.sum(decoded != sent))
    return errors / cfg.trials


def ljung_box(innovations: np.ndarray, lags: int = 20) -> np.ndarray:
    """Portmanteau whiteness statistic per trial (rows of `innovations`).

    Q = n(n+2) sum_{j<=L} r_j^2/(n-j); under whiteness Q ~ chi^2(L).
    """
    v = np.atleast_2d(np.asarray(innovations, dtype=float))
    n = v.shape[1]
    if lags < 1 or lags >= n:
        raise ValueError("lags must satisfy 1 <= lags < series length")
    den = np.sum(v * v, axis=1)
    q = np.zeros(v.shape[0])
    for j in range(1, lags + 1):
        r = np.sum(v[:, :-j] * v[:, j:], axis=1) / den
        q += r * r / (n - j)
    return n * (n + 2.0) * q
