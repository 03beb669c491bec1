r"""Classical simulation of one oscillator coupled to a discretised heat bath.

The bath modes couple through the spring energy
:math:`\tfrac12\mu_k\omega_k^2(q_k-\xi)^2`, so the equations of motion are

.. math::
    m(\ddot\xi + \Omega^2\xi) = \sum_k \mu_k\omega_k^2 (q_k - \xi), \qquad
    \ddot q_k + \omega_k^2 q_k = \omega_k^2 \xi .

With :math:`\mu(\omega) = 2\gamma m/(\pi\omega^2)` the bath acts on the
oscillator as the friction force :math:`-\gamma m\dot\xi` once the grid is
fine and wide enough.

Integration splits the Hamiltonian into a free part (every bath mode and the
oscillator with its spring-stiffened frequency, rotated exactly) and the
bilinear coupling :math:`-\sum_k\mu_k\omega_k^2 q_k\xi` (applied as kicks).
Strang splitting gives a second-order symplectic step; the Yoshida
composition of three Strang steps gives fourth order.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit
from scipy.optimize import curve_fit

from .errors import ToleranceError
from .params import OscillatorParams

_YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA_W0 = 1.0 - 2.0 * _YOSHIDA_W1


@dataclass(frozen=True)
class BathDiscretization:
    """Midpoint grid of bath modes on [w_min, w_max].

    Attributes
    ----------
    omegas, weights : ndarray
        Mode frequencies and their quadrature weights (all equal to the spacing).
    mu : ndarray
        Mode masses mu(w_k) * weight_k with mu(w) = 2 gamma m / (pi w^2 (1 + (reg w)^2)).
    gamma, mass, regulator : float
    """

    omegas: np.ndarray
    weights: np.ndarray
    mu: np.ndarray
    gamma: float
    mass: float
    regulator: float = 0.0

    @classmethod
    def build(cls, params: OscillatorParams, n_modes: int, t_end: float, regulator=0.0, lo=1e-3, hi=50.0):
        """Grid on [lo, hi] * max(Omega, gamma, 1/t_end)."""
        if n_modes < 1:
            raise ValueError("need at least one bath mode")
        if params.gamma <= 0:
            raise ValueError("the bath is parametrised by gamma > 0")
        scale = max(params.omega, params.gamma, 1.0 / t_end)
        w_lo, w_hi = lo * scale, hi * scale
        dw = (w_hi - w_lo) / n_modes
        w = w_lo + dw * (np.arange(n_modes) + 0.5)
        wts = np.full(n_modes, dw)
        dens = 2 * params.gamma * params.mass / (np.pi * w**2 * (1 + (regulator * w) ** 2))
        return cls(w, wts, dens * wts, params.gamma, params.mass, regulator)

    @property
    def n_modes(self) -> int:
        return int(self.omegas.size)

    @property
    def w_min(self) -> float:
        return float(self.omegas[0] - 0.5 * self.weights[0])

    @property
    def w_max(self) -> float:
        return float(self.omegas[-1] + 0.5 * self.weights[-1])

    @property
    def recurrence_time(self) -> float:
        """2 pi N / (w_max - w_min); the discrete bath returns energy after this."""
        return 2 * np.pi * self.n_modes / (self.w_max - self.w_min)

    @property
    def stiffness(self) -> float:
        """Sum of mu_k w_k^2, the spring constant added to the oscillator."""
        return float(np.sum(self.mu * self.omegas**2))

    def effective_gamma(self) -> float:
        """gamma recovered from the stiffness, sum mu_k w_k^2 = (2 gamma m / pi)(w_max - w_min) at reg = 0."""
        return self.stiffness * np.pi / (2 * self.mass * (self.w_max - self.w_min))

    def kernel_response(self, nu: float, width: float) -> float:
        r"""Friction force per unit mass for the velocity history cos(nu s) exp(-s^2 / 2 width^2).

        The bath force minus its instantaneous spring part is
        :math:`-\int_0^\infty d\tau\,\sum_k\mu_k\omega_k^2\cos(\omega_k\tau)\,\dot\xi(t-\tau)`;
        in the continuum this equals :math:`-\gamma m\dot\xi(t)` for histories
        smooth on the scale 1/w_max.  Returns the integral divided by m,
        which should approach gamma.
        """
        w = self.omegas
        half = 0.5 * np.sqrt(np.pi / 2) * width
        per = half * (np.exp(-0.5 * ((w - nu) * width) ** 2) + np.exp(-0.5 * ((w + nu) * width) ** 2))
        return float(np.sum(self.mu * w**2 * per) / self.mass)


@dataclass
class SimState:
    xi: float
    xi_dot: float
    q: np.ndarray
    q_dot: np.ndarray
    t: float = 0.0

    def copy(self) -> "SimState":
        return SimState(self.xi, self.xi_dot, self.q.copy(), self.q_dot.copy(), self.t)


def energies(bath: BathDiscretization, params: OscillatorParams, state: SimState):
    """(H_osc, H_bath, H_int) of one state."""
    m, w2 = params.mass, bath.omegas**2
    H_osc = 0.5 * m * (state.xi_dot**2 + params.omega**2 * state.xi**2)
    H_bath = 0.5 * float(np.sum(bath.mu * (state.q_dot**2 + w2 * state.q**2)))
    H_int = 0.5 * float(np.sum(bath.mu * w2 * (state.xi - 2 * state.q))) * state.xi
    return H_osc, H_bath, H_int


def relaxed_state(bath: BathDiscretization, xi: float = 1.0, xi_dot: float = 0.0) -> SimState:
    """Oscillator displaced, bath at rest with every spring unstretched (q_k = xi)."""
    n = bath.n_modes
    return SimState(float(xi), float(xi_dot), np.full(n, float(xi)), np.zeros(n))


def sample_bath(bath: BathDiscretization, T: float, seed, xi: float = 0.0, xi_dot: float = 0.0, params=None) -> SimState:
    """Classical Gibbs sample of the bath with the oscillator held at (xi, xi_dot).

    q_k - xi ~ N(0, T/(mu_k w_k^2)) and q_dot_k ~ N(0, T/mu_k), independent.
    When ``params`` is given and Omega > 0 the oscillator is drawn from its
    own Gibbs marginal as well, which makes the state an exact sample of
    the full equilibrium.
    """
    if not T > 0:
        raise ValueError("sampling needs T > 0")
    rng = np.random.default_rng(seed)
    if params is not None and params.omega > 0:
        xi = rng.normal(0.0, math.sqrt(T / (params.mass * params.omega**2)))
        xi_dot = rng.normal(0.0, math.sqrt(T / params.mass))
    sq = np.sqrt(T / (bath.mu * bath.omegas**2))
    sv = np.sqrt(T / bath.mu)
    q = xi + sq * rng.standard_normal(bath.n_modes)
    v = sv * rng.standard_normal(bath.n_modes)
    return SimState(float(xi), float(xi_dot), q, v)


@njit(cache=True, nogil=True, fastmath=True)
def _pass(q, qd, w, kw2, kmu, C, S, xi, h):
    # rotate every mode, kick it by xi, return sum mu w^2 q
    acc = 0.0
    for k in range(q.size):
        a = q[k] * C[k] + qd[k] * S[k] / w[k]
        b = qd[k] * C[k] - q[k] * w[k] * S[k]
        q[k] = a
        qd[k] = b + h * kw2[k] * xi
        acc += kmu[k] * a
    return acc


@njit(cache=True, nogil=True)
def _observe(q, qd, w2, mu, xi, v, m, omega2, out, i, t):
    hb = 0.0
    s = 0.0
    sd = 0.0
    K = 0.0
    for k in range(q.size):
        hb += 0.5 * mu[k] * (qd[k] * qd[k] + w2[k] * q[k] * q[k])
        s += mu[k] * w2[k] * q[k]
        sd += mu[k] * w2[k] * qd[k]
        K += mu[k] * w2[k]
    out[i, 0] = t
    out[i, 1] = xi
    out[i, 2] = v
    out[i, 3] = 0.5 * m * (v * v + omega2 * xi * xi)
    out[i, 4] = hb
    out[i, 5] = 0.5 * K * xi * xi - xi * s
    out[i, 6] = s
    out[i, 7] = sd


@njit(cache=True, nogil=True)
def _integrate(xi, v, q, qd, w, mu, m, omega2, dt, n_samples, stride, rot_len, kick_len, t0, out):
    n = q.size
    w2 = w * w
    K = 0.0
    for k in range(n):
        K += mu[k] * w2[k]
    Oe = math.sqrt(omega2 + K / m)
    nr = rot_len.size
    # rotation tables: index 0..nr-1 the listed lengths, nr the merged end+start rotation
    C = np.empty((nr + 1, n))
    S = np.empty((nr + 1, n))
    Co = np.empty(nr + 1)
    So = np.empty(nr + 1)
    for j in range(nr + 1):
        h = rot_len[j] * dt if j < nr else (rot_len[0] + rot_len[nr - 1]) * dt
        for k in range(n):
            C[j, k] = math.cos(w[k] * h)
            S[j, k] = math.sin(w[k] * h)
        Co[j] = math.cos(Oe * h)
        So[j] = math.sin(Oe * h) if Oe > 0 else h
    kw2 = w2.copy()
    kmu = mu * w2
    nk = kick_len.size
    _observe(q, qd, w2, mu, xi, v, m, omega2, out, 0, t0)
    for i in range(1, n_samples):
        for step in range(stride):
            for j in range(nk):
                jr = j if (j > 0 or step == 0) else nr
                if Oe > 0:
                    xi, v = xi * Co[jr] + v * So[jr] / Oe, v * Co[jr] - xi * Oe * So[jr]
                else:
                    xi = xi + v * So[jr]
                h = kick_len[j] * dt
                acc = _pass(q, qd, w, kw2, kmu, C[jr], S[jr], xi, h)
                v += h * acc / m
        # close the last step with its final rotation
        jl = nr - 1
        if Oe > 0:
            xi, v = xi * Co[jl] + v * So[jl] / Oe, v * Co[jl] - xi * Oe * So[jl]
        else:
            xi = xi + v * So[jl]
        for k in range(n):
            a = q[k] * C[jl, k] + qd[k] * S[jl, k] / w[k]
            qd[k] = qd[k] * C[jl, k] - q[k] * w[k] * S[jl, k]
            q[k] = a
        _observe(q, qd, w2, mu, xi, v, m, omega2, out, i, t0 + i * stride * dt)
    return xi, v


def _scheme(order):
    if order == 2:
        return np.array([0.5, 0.5]), np.array([1.0])
    if order == 4:
        w1, w0 = _YOSHIDA_W1, _YOSHIDA_W0
        return np.array([0.5 * w1, 0.5 * (w0 + w1), 0.5 * (w0 + w1), 0.5 * w1]), np.array([w1, w0, w1])
    raise ValueError("order must be 2 or 4")


_COLUMNS = ("t", "xi", "xi_dot", "H_osc", "H_bath", "H_int")


@dataclass
class Trajectory:
    """Samples of a run; ``spring_sum`` and ``spring_rate`` are sum mu w^2 q and sum mu w^2 q_dot."""

    t: np.ndarray
    xi: np.ndarray
    xi_dot: np.ndarray
    H_osc: np.ndarray
    H_bath: np.ndarray
    H_int: np.ndarray
    spring_sum: np.ndarray
    spring_rate: np.ndarray
    stiffness: float
    meta: dict = field(default_factory=dict)
    final: SimState | None = None

    @property
    def H_total(self) -> np.ndarray:
        return self.H_osc + self.H_bath + self.H_int

    def energy_drift(self) -> float:
        """max |H(t) - H(0)| / max(|H(0)|, H_bath(0), H_osc(0))."""
        H = self.H_total
        ref = max(abs(H[0]), self.H_bath[0], self.H_osc[0])
        return float(np.max(np.abs(H - H[0])) / ref) if ref > 0 else 0.0

    def to_csv(self, path) -> None:
        """Columns t, xi, xi_dot, H_osc, H_bath, H_int with a parameter echo in the header."""
        head = "# " + " ".join(f"{k}={v}" for k, v in self.meta.items())
        data = np.column_stack([getattr(self, c) for c in _COLUMNS])
        np.savetxt(path, data, delimiter=",", header=head + "\n" + ",".join(_COLUMNS), comments="", fmt="%.17g")


def simulate(
    bath: BathDiscretization,
    params: OscillatorParams,
    initial: SimState,
    t_end: float,
    dt: float | None = None,
    n_samples: int = 1001,
    order: int = 4,
    check_energy: bool = True,
) -> Trajectory:
    """Integrate from ``initial`` to ``t_end`` and sample n_samples equally spaced states.

    Parameters
    ----------
    dt : float, optional
        Step; must stay below 0.1 / w_max.  Defaults to 0.09 / w_max rounded
        so that it divides the sampling interval.
    order : {2, 4}
        Strang or Yoshida composition.
    check_energy : bool
        Raise :class:`ToleranceError` when the total energy drifts by more
        than 1e-3 relative.

    Raises
    ------
    ValueError
        dt too large, or t_end beyond the recurrence time of the bath.
    """
    if abs(params.gamma - bath.gamma) > 1e-12 * max(params.gamma, 1.0) or params.mass != bath.mass:
        raise ValueError("bath was built for different gamma or mass")
    if not t_end < bath.recurrence_time:
        raise ValueError(
            f"t_end={t_end} exceeds the bath recurrence time {bath.recurrence_time:.4g}; use more modes"
        )
    if n_samples < 2:
        raise ValueError("need at least two samples")
    dt_max = 0.1 / bath.w_max
    span = t_end / (n_samples - 1)
    if dt is None:
        dt = 0.9 * dt_max
    if not dt < dt_max:
        raise ValueError(f"dt={dt} must be below 0.1 / w_max = {dt_max:.4g}")
    stride = max(1, math.ceil(span / dt))
    dt = span / stride
    rot, kick = _scheme(order)
    q, qd = initial.q.astype(float).copy(), initial.q_dot.astype(float).copy()
    out = np.empty((n_samples, 8))
    xi, v = _integrate(
        float(initial.xi), float(initial.xi_dot), q, qd, bath.omegas, bath.mu, params.mass,
        params.omega**2, dt, n_samples, stride, rot, kick, float(initial.t), out,
    )
    meta = {
        "omega": params.omega, "gamma": params.gamma, "mass": params.mass,
        "n_modes": bath.n_modes, "w_min": bath.w_min, "w_max": bath.w_max,
        "dt": dt, "order": order, "t_end": t_end,
    }
    traj = Trajectory(
        *out[:, :8].T, stiffness=bath.stiffness, meta=meta,
        final=SimState(xi, v, q, qd, float(initial.t) + t_end),
    )
    if check_energy:
        drift = traj.energy_drift()
        if drift > 1e-3:
            raise ToleranceError(f"total energy drifted by {drift:.3g} relative", estimate=drift, error=drift)
    return traj


@dataclass
class EnergyLedger:
    """Energies and the rates at which they change.

    ``rate_osc`` and ``rate_bath`` come from the instantaneous forces,
    ``rate_int`` from differencing H_int in time; ``residual`` is their sum
    and is limited by the sampling interval.  ``rate_int_exact`` is the
    instantaneous rate, so ``rate_int - rate_int_exact`` measures the
    differencing error alone.
    """

    t: np.ndarray
    H_osc: np.ndarray
    H_bath: np.ndarray
    H_int: np.ndarray
    rate_osc: np.ndarray
    rate_bath: np.ndarray
    rate_int: np.ndarray
    rate_int_exact: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        return self.rate_osc + self.rate_bath + self.rate_int


def energy_flows(traj: Trajectory) -> EnergyLedger:
    """dH_bath/dt = xi sum mu w^2 q_dot and dH_osc/dt = xi_dot sum mu w^2 (q - xi)."""
    rate_bath = traj.xi * traj.spring_rate
    rate_osc = traj.xi_dot * (traj.spring_sum - traj.stiffness * traj.xi)
    rate_int = np.gradient(traj.H_int, traj.t, edge_order=2)
    exact = traj.xi_dot * (traj.stiffness * traj.xi - traj.spring_sum) - traj.xi * traj.spring_rate
    return EnergyLedger(traj.t, traj.H_osc, traj.H_bath, traj.H_int, rate_osc, rate_bath, rate_int, exact)


def _damped(t, A, rate, freq, phase):
    return A * np.exp(-rate * t) * np.cos(freq * t + phase)


def fit_free_decay(traj: Trajectory, params: OscillatorParams, t_max=None):
    """Least-squares fit of A e^{-rate t} cos(freq t + phase) to xi(t).

    Returns
    -------
    rate, freq : float
    """
    g, o = params.gamma, params.omega
    w1 = math.sqrt(max(o * o - 0.25 * g * g, 1e-12))
    t_max = 10.0 / g if t_max is None else t_max
    sel = traj.t <= t_max
    p0 = (traj.xi[0], 0.5 * g, w1, 0.0)
    popt, _ = curve_fit(_damped, traj.t[sel], traj.xi[sel], p0=p0, maxfev=20000)
    return float(popt[1]), float(abs(popt[2]))


@dataclass(frozen=True)
class EnsembleResult:
    """Per-member time averages of H_osc and kinetic energy, in member order."""

    H_osc: np.ndarray
    kinetic: np.ndarray
    T: float
    meta: dict

    @property
    def mean(self) -> float:
        return float(np.mean(self.H_osc))

    @property
    def stderr(self) -> float:
        return float(np.std(self.H_osc, ddof=1) / math.sqrt(self.H_osc.size))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["H_osc"] = self.H_osc.tolist()
        d["kinetic"] = self.kinetic.tolist()
        d.update(mean=self.mean, stderr=self.stderr)
        return d


def equilibrium_ensemble(
    params: OscillatorParams,
    T: float,
    members: int = 64,
    n_modes: int = 1280,
    t_end: float = 150.0,
    t_burn: float | None = None,
    seed: int = 0,
    order: int = 2,
    jobs: int = 1,
) -> EnsembleResult:
    """Thermalise the oscillator against Gibbs-sampled baths and time-average its energy.

    Each member starts with the oscillator at rest at xi = 0 and the bath
    drawn by :func:`sample_bath` with seed (seed, member).  Averages run over
    [t_burn, t_end]; t_burn defaults to 8 / gamma.  Members are independent
    and may run on ``jobs`` threads; results keep member order.
    """
    bath = BathDiscretization.build(params, n_modes, t_end)
    t_burn = 8.0 / params.gamma if t_burn is None else t_burn
    if not t_burn < t_end:
        raise ValueError("t_burn must precede t_end")

    def one(i):
        st = sample_bath(bath, T, seed=[seed, i])
        tr = simulate(bath, params, st, t_end, n_samples=2001, order=order)
        sel = tr.t >= t_burn
        return float(np.mean(tr.H_osc[sel])), float(np.mean(0.5 * params.mass * tr.xi_dot[sel] ** 2))

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            res = list(ex.map(one, range(members)))
    else:
        res = [one(i) for i in range(members)]
    arr = np.asarray(res)
    meta = {"n_modes": n_modes, "t_end": t_end, "t_burn": t_burn, "seed": seed, "order": order}
    return EnsembleResult(arr[:, 0], arr[:, 1], T, meta)
