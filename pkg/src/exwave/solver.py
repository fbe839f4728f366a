"""Radial finite-difference integrator for the weakly coupled damped wave
system on the exterior of the unit ball.

Each component solves

    d_tt u_l - (d_rr + (d-1)/r d_r) u_l + d_t u_l = |u_{l-1}|^(p_l),

with cyclic coupling (component 1 is forced by |u_k|^(p_1)) on r in (1, r_max),
the configured Dirichlet/Neumann/Robin condition at r = 1 and homogeneous
Dirichlet at the outer edge.  Time stepping is the three-level scheme

    (u+ - 2u + u-) / dt^2 + (u+ - u-) / (2 dt) = L u + f,

explicit in space with the damping term solved pointwise for u+ (the damping
never enters the stability constraint).  Fields are real: the blow-up theory
concerns sign-definite real data.

Blow-up is detected by the max norm crossing a large threshold; the crossing
time is located inside the last step by bisection on the log-linear
interpolant of the peak norm.  First crossings of a lower and a higher
threshold are recorded in the same run, giving a free threshold-sensitivity
estimate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .exponents import BoundaryCondition, BoundaryKind, ExponentVector
from .quadrature import RadialMeasure
from .testfn import cutoff_value, psi

DEFAULT_CFL = 0.9
DEFAULT_BLOWUP_THRESHOLD = 1e8
SENSITIVITY_THRESHOLDS = (1e6, 1e8, 1e10)


class CFLViolationError(ValueError):
    pass


class DataPositivityError(ValueError):
    pass


@dataclass(frozen=True)
class RadialGrid:
    """Uniform nodes r_j = 1 + j dr, j = 0..n, on [1, r_max]."""

    r_max: float
    n: int

    def __post_init__(self):
        if self.r_max <= 1.0:
            raise ValueError("r_max must exceed 1")
        if self.n < 16:
            raise ValueError("need at least 16 cells")

    @property
    def dr(self) -> float:
        return (self.r_max - 1.0) / self.n

    @property
    def r(self) -> np.ndarray:
        return 1.0 + self.dr * np.arange(self.n + 1)


@dataclass
class RadialState:
    """k displacement and k velocity fields at one time level.

    ``u_prev`` is the displacement one level back; it is scheme bookkeeping
    (None on a freshly initialized state) and not part of the public contract.
    """

    t: float
    u: np.ndarray  # (k, n+1)
    v: np.ndarray  # (k, n+1)
    u_prev: np.ndarray | None = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return self.u.shape[0]

    def peak(self) -> np.ndarray:
        """Per-component max norm."""
        return np.max(np.abs(self.u), axis=1)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v)))


@dataclass(frozen=True)
class InitialData:
    """Smooth compact bump, identical for u_0 and u_1 and for every component,
    scaled by epsilon.

    The profile reuses the cutoff bridge: B(r) = phi(((r - center)/width)^2),
    supported on |r - center| <= width with unit amplitude at the center.
    """

    center: float = 2.0
    width: float = 0.5
    epsilon: float = 1.0

    def __post_init__(self):
        if self.center - self.width <= 1.0:
            raise ValueError("bump support must stay inside r > 1")
        if self.width <= 0:
            raise ValueError("width must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")

    @property
    def support_outer(self) -> float:
        return self.center + self.width

    def profile(self, r: np.ndarray) -> np.ndarray:
        s = ((np.asarray(r, dtype=float) - self.center) / self.width) ** 2
        return np.asarray(cutoff_value(s))

    def build(self, grid: RadialGrid, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(u0, u1) arrays of shape (k, n+1); u0 = u1 = eps * bump."""
        bump = self.epsilon * self.profile(grid.r)
        u0 = np.tile(bump, (k, 1))
        return u0, u0.copy()


def weighted_data_integral(
    r: np.ndarray, u0: np.ndarray, u1: np.ndarray, d: int, bc: BoundaryCondition
) -> float:
    """omega * int (u0 + u1) Psi r^(d-1) dr for arbitrary data arrays."""
    measure = RadialMeasure(d)
    return measure.integrate(np.asarray(r, float), (u0 + u1) * psi(r, d, bc))


def validate_data_positivity(
    data: InitialData, grid: RadialGrid, d: int, bc: BoundaryCondition
) -> float:
    """omega * int (u_0 + u_1) Psi r^(d-1) dr; must be positive for blow-up runs."""
    r = grid.r
    bump = data.epsilon * data.profile(r)
    return weighted_data_integral(r, bump, bump, d, bc)


def _laplacian(u: np.ndarray, grid: RadialGrid, d: int, bc: BoundaryCondition) -> np.ndarray:
    """Radial Laplacian u_rr + (d-1)/r u_r, centered differences.

    r = 1: Dirichlet rows are overwritten by the boundary anyway; for
    alpha != 0 the ghost node u_{-1} = u_1 - 2 dr (beta/alpha) u_0 realizes
    -alpha d_r u(1) ... = 0 written as d_r u(1) = (beta/alpha) u(1) at second
    order.  The outer node is pinned to zero by the caller.
    """
    dr = grid.dr
    r = grid.r
    out = np.zeros_like(u)
    out[:, 1:-1] = (u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]) / dr**2 + (
        (d - 1.0) / r[1:-1]
    ) * (u[:, 2:] - u[:, :-2]) / (2.0 * dr)
    if bc.kind is not BoundaryKind.DIRICHLET:
        slope = bc.beta / bc.alpha
        out[:, 0] = (
            2.0 * (u[:, 1] - u[:, 0]) / dr**2
            - 2.0 * slope * u[:, 0] / dr
            + (d - 1.0) * slope * u[:, 0]
        )
    return out


def apply_boundary(state: RadialState, bc: BoundaryCondition) -> RadialState:
    """Enforce the strong part of the boundary conditions on a state.

    Dirichlet pins u(r=1) = 0; the flux conditions (alpha != 0) live in the
    ghost-node Laplacian and need no strong enforcement.  The outer edge is
    always pinned to zero.
    """
    bc.require_dissipative()
    u = state.u
    v = state.v
    if bc.kind is BoundaryKind.DIRICHLET:
        u[:, 0] = 0.0
        v[:, 0] = 0.0
    u[:, -1] = 0.0
    v[:, -1] = 0.0
    if state.u_prev is not None:
        if bc.kind is BoundaryKind.DIRICHLET:
            state.u_prev[:, 0] = 0.0
        state.u_prev[:, -1] = 0.0
    return state


def _forcing(
    u: np.ndarray,
    p: ExponentVector,
    t: float,
    source: Callable[[float], np.ndarray] | None,
    nonlinear: bool,
) -> np.ndarray:
    if nonlinear:
        powers = np.array(p.p)[:, None]
        f = np.abs(np.roll(u, 1, axis=0)) ** powers
    else:
        f = np.zeros_like(u)
    if source is not None:
        f = f + source(t)
    return f


def step(
    state: RadialState,
    dt: float,
    p: ExponentVector,
    d: int,
    bc: BoundaryCondition,
    grid: RadialGrid,
    source: Callable[[float], np.ndarray] | None = None,
    cfl: float = DEFAULT_CFL,
    nonlinear: bool = True,
) -> RadialState:
    """Advance one time level.

    A state without ``u_prev`` (the initial level) is started with the
    second-order Taylor step u1 = u0 + dt v0 + dt^2/2 (L u0 + f - v0);
    subsequent levels use the three-level leapfrog with semi-implicit damping.
    The same dt must be used along a trajectory.
    """
    if dt > cfl * grid.dr * (1.0 + 1e-12):
        raise CFLViolationError(
            f"dt = {dt:.3e} exceeds CFL limit {cfl:.2f} * dr = {cfl * grid.dr:.3e}"
        )
    if not state.is_finite():
        raise FloatingPointError("non-finite state; blow-up should have been flagged")
    u = state.u
    f = _forcing(u, p, state.t, source, nonlinear)
    L = _laplacian(u, grid, d, bc)
    if state.u_prev is None:
        u_new = u + dt * state.v + 0.5 * dt**2 * (L + f - state.v)
    else:
        a = 1.0 / dt**2 + 1.0 / (2.0 * dt)
        u_new = (
            (2.0 * u - state.u_prev) / dt**2
            + state.u_prev / (2.0 * dt)
            + L
            + f
        ) / a
    # second-order one-sided velocity at the new level
    if state.u_prev is None:
        v_new = (u_new - u) / dt + 0.5 * dt * (L + f - state.v)
    else:
        v_new = (3.0 * u_new - 4.0 * u + state.u_prev) / (2.0 * dt)
    new = RadialState(t=state.t + dt, u=u_new, v=v_new, u_prev=u.copy())
    return apply_boundary(new, bc)


def energy(
    state: RadialState, grid: RadialGrid, d: int, dt: float | None = None,
    bc: BoundaryCondition | None = None,
) -> float:
    """Discrete energy sum (v^2 + |grad u|^2) r^(d-1) dr over all components.

    Mid-trajectory (``u_prev`` present and dt given) the leapfrog half-level
    form is used: ||(u - u_prev)/dt||^2 + <grad u, grad u_prev>, which is the
    quantity the damped scheme dissipates; the nodal form with the one-sided
    velocity oscillates at O((dt/dr)^2) per mode and is kept only for initial
    states.  A Robin condition contributes the boundary energy
    (beta/alpha) u(1)^2 per component.
    """
    r = grid.r
    dr = grid.dr
    rmid = 0.5 * (r[1:] + r[:-1])
    if state.u_prev is not None and dt is not None:
        du = (state.u - state.u_prev) / dt
        g1 = (state.u[:, 1:] - state.u[:, :-1]) / dr
        g2 = (state.u_prev[:, 1:] - state.u_prev[:, :-1]) / dr
        kin = np.sum(du**2 * r ** (d - 1.0)) * dr
        pot = np.sum(g1 * g2 * rmid ** (d - 1.0)) * dr
    else:
        gmid = (state.u[:, 1:] - state.u[:, :-1]) / dr
        kin = np.sum(state.v**2 * r ** (d - 1.0)) * dr
        pot = np.sum(gmid**2 * rmid ** (d - 1.0)) * dr
    boundary = 0.0
    if bc is not None and bc.kind is BoundaryKind.ROBIN:
        boundary = (bc.beta / bc.alpha) * float(np.sum(state.u[:, 0] ** 2))
    return float(kin + pot + boundary)


class Verdict(str, Enum):
    BLEW_UP = "blew-up"
    SURVIVED = "survived-horizon"


@dataclass
class SolutionHistory:
    """Time-indexed radial snapshots, the quadrature module's input."""

    times: np.ndarray            # (m,)
    r: np.ndarray                # (n+1,)
    u: np.ndarray                # (m, k, n+1)
    v: np.ndarray | None = None  # (m, k, n+1)
    horizon: float = math.inf    # configured T_end of the producing run


@dataclass(frozen=True)
class SolverConfig:
    p: ExponentVector
    d: int
    bc: BoundaryCondition
    grid: RadialGrid
    T_end: float
    data: InitialData
    cfl: float = DEFAULT_CFL
    blowup_threshold: float = DEFAULT_BLOWUP_THRESHOLD
    sensitivity_thresholds: tuple[float, ...] = SENSITIVITY_THRESHOLDS
    history_snapshots: int = 256  # target number of stored time levels; 0 disables
    record_velocity: bool = False

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.T_end <= 0:
            raise ValueError("T_end must be positive")
        self.bc.require_dissipative()
        if not 0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if self.blowup_threshold < 1e4:
            raise ValueError("blow-up threshold unreasonably small")
        if self.data.support_outer >= self.grid.r_max:
            raise ValueError("initial bump support must lie inside the grid")

    @property
    def dt(self) -> float:
        return self.cfl * self.grid.dr

    def domain_of_dependence_ok(self) -> bool:
        """Unit propagation speed: the outer edge never influences the run if
        r_max >= 1 + support + T_end."""
        return self.grid.r_max >= 1.0 + (self.data.support_outer - 1.0) + self.T_end

    @classmethod
    def with_auto_domain(
        cls,
        p: ExponentVector,
        d: int,
        bc: BoundaryCondition,
        n: int,
        T_end: float,
        data: InitialData,
        margin: float = 1.0,
        **kwargs,
    ) -> "SolverConfig":
        """Size r_max from the domain-of-dependence rule."""
        r_max = 1.0 + (data.support_outer - 1.0) + T_end + margin
        return cls(
            p=p, d=d, bc=bc, grid=RadialGrid(r_max=r_max, n=n), T_end=T_end,
            data=data, **kwargs,
        )


@dataclass
class RunRecord:
    """Full provenance of one simulation."""

    config: SolverConfig
    verdict: Verdict
    t_blow: float | None
    t_final: float
    peak_times: np.ndarray
    peaks: np.ndarray                      # (steps+1, k)
    threshold_crossings: dict[float, float]
    nan_encountered: bool = False
    data_positivity: float = 0.0
    history: SolutionHistory | None = None

    @property
    def blow_up_uncertainty(self) -> float:
        return self.config.dt

    @property
    def threshold_sensitivity(self) -> float | None:
        """Spread of the crossing times of the lowest and highest recorded
        thresholds; insensitivity to the threshold choice means this stays
        within a couple of time steps."""
        lows = [m for m in self.threshold_crossings if m < self.config.blowup_threshold]
        highs = [m for m in self.threshold_crossings if m > self.config.blowup_threshold]
        if not lows or not highs:
            return None
        return self.threshold_crossings[max(highs)] - self.threshold_crossings[min(lows)]


def _crossing_time(t0: float, g0: float, t1: float, g1: float, M: float) -> float:
    """Bisect the log-linear interpolant of the peak norm for the M-crossing."""
    if g0 <= 0.0:
        return t1
    a, b = math.log(max(g0, 1e-300)), math.log(g1)
    target = math.log(M)

    def val(t: float) -> float:
        w = (t - t0) / (t1 - t0)
        return a + w * (b - a)

    lo, hi = t0, t1
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if val(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def run(
    config: SolverConfig,
    source: Callable[[float], np.ndarray] | None = None,
) -> RunRecord:
    """Integrate until blow-up or the horizon.

    Deterministic for a given config.  Refuses initial data whose weighted
    integral against Psi is not positive (the blow-up theory's data
    condition).  After the main threshold crossing, stepping continues for a
    short grace period to record the higher sensitivity threshold.
    """
    grid = config.grid
    k = config.p.k
    positivity = validate_data_positivity(config.data, grid, config.d, config.bc)
    if config.data.epsilon > 0 and positivity <= 0.0:
        raise DataPositivityError(
            f"int (u0 + u1) Psi dx = {positivity:.3e} must be positive"
        )
    if not config.domain_of_dependence_ok():
        warnings.warn(
            "r_max < 1 + support + T_end: the outer wall can influence the "
            "solution before the horizon",
            stacklevel=2,
        )
    u0, u1 = config.data.build(grid, k)
    state = apply_boundary(RadialState(t=0.0, u=u0, v=u1), config.bc)
    dt = config.dt
    n_steps = max(1, math.ceil(config.T_end / dt))
    stride = (
        max(1, n_steps // config.history_snapshots)
        if config.history_snapshots > 0
        else 0
    )

    times = [0.0]
    peaks = [state.peak()]
    hist_t: list[float] = []
    hist_u: list[np.ndarray] = []
    hist_v: list[np.ndarray] = []

    def snapshot(s: RadialState):
        hist_t.append(s.t)
        hist_u.append(s.u.copy())
        if config.record_velocity:
            hist_v.append(s.v.copy())

    if stride:
        snapshot(state)

    thresholds = sorted(set(config.sensitivity_thresholds) | {config.blowup_threshold})
    crossings: dict[float, float] = {}
    verdict = Verdict.SURVIVED
    t_blow: float | None = None
    nan_flag = False
    grace_left = -1

    for istep in range(1, n_steps + 1):
        prev_peak = float(np.max(peaks[-1]))
        state = step(state, dt, config.p, config.d, config.bc, grid,
                     source=source, cfl=config.cfl)
        if not state.is_finite():
            nan_flag = True
            if t_blow is None:
                verdict = Verdict.BLEW_UP
                t_blow = state.t
                crossings.setdefault(config.blowup_threshold, state.t)
            break
        pk = state.peak()
        peak_now = float(np.max(pk))
        times.append(state.t)
        peaks.append(pk)
        for M in thresholds:
            if M not in crossings and peak_now > M:
                crossings[M] = _crossing_time(
                    state.t - dt, prev_peak, state.t, peak_now, M
                )
        if t_blow is None and config.blowup_threshold in crossings:
            verdict = Verdict.BLEW_UP
            t_blow = crossings[config.blowup_threshold]
            if stride:
                snapshot(state)  # close the history at the crossing step
            grace_left = 200
        elif stride and t_blow is None and (istep % stride == 0 or istep == n_steps):
            snapshot(state)
        if grace_left >= 0:
            if max(thresholds) in crossings or grace_left == 0:
                break
            grace_left -= 1

    history = None
    if stride:
        history = SolutionHistory(
            times=np.array(hist_t),
            r=grid.r,
            u=np.array(hist_u),
            v=np.array(hist_v) if config.record_velocity else None,
            horizon=config.T_end,
        )
    return RunRecord(
        config=config,
        verdict=verdict,
        t_blow=t_blow,
        t_final=state.t,
        peak_times=np.array(times),
        peaks=np.array(peaks),
        threshold_crossings=crossings,
        nan_encountered=nan_flag,
        data_positivity=positivity,
        history=history,
    )
