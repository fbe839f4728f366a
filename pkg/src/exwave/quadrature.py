"""Space-time integrals over Q_R under radial symmetry.

All integrands in scope are radial, so volume integrals reduce to

    int_Omega f dx = omega_{d-1} * int_1^inf f(r) r^(d-1) dr,

with omega_{d-1} the area of the unit sphere (2 for d = 1, counting both
half-lines).  Three consumers:

* ``theta``: the comparison function Theta_p(R) appearing on the right side
  of the nonlinear inequality chain;
* ``measure_QRstar_psi``: adaptive quadrature of Psi over the transition
  shell Q*_R, whose growth rate in R the theory pins down;
* ``functional_IR`` / ``chain_check``: trapezoidal functionals of simulation
  output against the weights Psi phi_R, and the link-by-link diagnostic of
  the inequality chain leading to the lifespan bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import integrate

from .exponents import BoundaryCondition, ExponentVector, compute_gamma
from .testfn import CutoffProfile, HarmonicWeight, ScaledCutoff, psi


def sphere_area(d: int, one_sided_1d: bool = False) -> float:
    """Area of the unit sphere S^(d-1); 2 for d = 1 (both half-lines), or 1
    when a single ray is requested."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if d == 1:
        return 1.0 if one_sided_1d else 2.0
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class RadialMeasure:
    """Radial reduction of the volume element on the exterior domain."""

    d: int
    one_sided_1d: bool = False

    @property
    def omega(self) -> float:
        return sphere_area(self.d, self.one_sided_1d)

    def integrate(self, r: np.ndarray, values: np.ndarray) -> float:
        """omega * int values(r) r^(d-1) dr by the trapezoidal rule."""
        return float(self.omega * np.trapezoid(values * r ** (self.d - 1), r))


def theta(R: float, d: int, bc: BoundaryCondition, p: float) -> float:
    """Comparison function Theta_p(R) of the inequality chain.

    d = 2, beta != 0:  R^(2 - 4/p) (log R)^(1 - 1/p)
    d >= 3, beta != 0: R^(d - (d+2)/p)
    d >= 2, beta == 0: R^(d - (d+2)/p)
    d = 1:             R^(2 - 4/p) for beta != 0, R^(1 - 3/p) for beta == 0.
    """
    if R <= 1.0:
        raise ValueError("R must exceed 1 (log R must be positive)")
    if p <= 1.0:
        raise ValueError("p must exceed 1")
    neumann = bc.beta == 0.0
    if d == 1:
        return R ** (1.0 - 3.0 / p) if neumann else R ** (2.0 - 4.0 / p)
    if d == 2 and not neumann:
        return R ** (2.0 - 4.0 / p) * math.log(R) ** (1.0 - 1.0 / p)
    return R ** (d - (d + 2.0) / p)


class QuadratureConvergenceError(RuntimeError):
    pass


def measure_QRstar_psi(
    R: float,
    d: int,
    bc: BoundaryCondition,
    T_horizon: float,
    rel_tol: float = 1e-6,
) -> float:
    """int over Q*_R of Psi(x) d(t, x), reduced to a radial integral.

    Q*_R = {(t, r): R^4/2 < t^2 + (r-1)^4 < R^4, t > 0, r > 1}.  For fixed r
    the admissible t form an interval whose length is known in closed form,
    so the 2D integral collapses to an adaptive 1D quadrature of

        [t_hi(r) - t_lo(r)] * Psi(r) * omega_{d-1} r^(d-1)

    over r in (1, 1 + R).  The expected growth rates are R^4 log R for d = 2
    with beta != 0 and R^(d+2) otherwise.
    """
    if R < 2:
        raise ValueError("R >= 2 required")
    if T_horizon < R**2:
        raise ValueError("T_horizon must be at least R^2 so Q_R is not truncated")
    omega = sphere_area(d)
    R4 = R**4

    def integrand(r: float) -> float:
        s4 = (r - 1.0) ** 4
        if s4 >= R4:
            return 0.0
        t_hi = math.sqrt(R4 - s4)
        t_lo = math.sqrt(max(R4 / 2.0 - s4, 0.0))
        return (t_hi - t_lo) * psi(r, d, bc) * omega * r ** (d - 1)

    kink = 1.0 + R * 2.0 ** (-0.25)  # where the inner boundary of Q*_R hits t = 0
    value, abserr = integrate.quad(
        integrand, 1.0, 1.0 + R, points=[kink], limit=200, epsabs=0.0, epsrel=1e-9
    )
    if value <= 0.0 or abserr > rel_tol * value:
        raise QuadratureConvergenceError(
            f"shell integral did not converge: value={value:.6e}, abserr={abserr:.2e}"
        )
    return float(value)


class FunctionalKind(str, Enum):
    I_R = "I_R"            # weight phi_R
    I_R_STAR = "I_R_star"  # weight phi*_R


@dataclass(frozen=True)
class FunctionalValue:
    value: float
    R: float
    ell: int
    which: FunctionalKind

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("functional of |u|^p against a nonnegative weight")


class InsufficientCoverageError(ValueError):
    """Grid or recorded history clips the support of phi_R."""


def functional_IR(
    history,
    R: float,
    ell: int,
    which: FunctionalKind,
    p_next: float,
    weight: HarmonicWeight,
    cutoff: ScaledCutoff,
    allow_truncated: bool = False,
) -> FunctionalValue:
    """Tensor-product trapezoidal quadrature of |u_ell|^p_next Psi phi_R over Q_R.

    ``history`` provides ``times`` (m,), ``r`` (n+1,) and ``u`` (m, k, n+1).
    ``ell`` is the 1-based component index.  The time window must reach
    min(horizon, R^2) and the grid must reach 1 + R, otherwise the support of
    phi_R is clipped; ``allow_truncated`` waives the time check (used on
    blown-up runs, whose natural life ends before R^2).
    """
    times = np.asarray(history.times, dtype=float)
    r = np.asarray(history.r, dtype=float)
    u = np.asarray(history.u, dtype=float)
    k = u.shape[1]
    if not 1 <= ell <= k:
        raise ValueError(f"component index must lie in [1, {k}]")
    if r[-1] < 1.0 + R:
        raise InsufficientCoverageError(
            f"grid reaches r = {r[-1]:.3f} < 1 + R = {1.0 + R:.3f}"
        )
    t_needed = min(R**2, getattr(history, "horizon", math.inf))
    if times[-1] < t_needed * (1.0 - 1e-12) and not allow_truncated:
        raise InsufficientCoverageError(
            f"history ends at t = {times[-1]:.3f} < min(horizon, R^2) = {t_needed:.3f}"
        )
    star = which is FunctionalKind.I_R_STAR
    w_r = weight.value(r) * sphere_area(weight.d) * r ** (weight.d - 1)
    cut = cutoff.phi_R(times[:, None], r[None, :], star=star)
    integrand = np.abs(u[:, ell - 1, :]) ** p_next * cut * w_r[None, :]
    inner = np.trapezoid(integrand, r, axis=1)
    value = float(np.trapezoid(inner, times))
    return FunctionalValue(value=max(value, 0.0), R=R, ell=ell, which=which)


# ---------------------------------------------------------------------------
# inequality-chain diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinkCheck:
    """One link of the cyclic inequality chain at a fixed scale R.

    lhs  = I_R[u_prev] + C0_ell * eps
    rhs  = Theta_p(R) * (int |u_ell|^p Psi phi*_R)^(1/p)
    ratio = lhs / rhs is the measured hidden constant of the link.
    """

    ell: int
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return math.inf if self.lhs > 0 else 0.0
        return self.lhs / self.rhs


@dataclass(frozen=True)
class ChainRow:
    R: float
    links: tuple[LinkCheck, ...]
    final_ratio: float        # eps * R^(2 gamma_max - d)
    final_ratio_data: float   # C0_k * eps * R^(2 gamma_max - d)
    in_theory_window: bool    # R^2 <= covered time span


@dataclass(frozen=True)
class ChainReport:
    rows: tuple[ChainRow, ...]
    gamma_max: float
    epsilon: float

    def table(self) -> str:
        lines = ["    R   window  final_ratio  link ratios"]
        for row in self.rows:
            marks = " ".join(f"{link.ratio:.3e}" for link in row.links)
            lines.append(
                f"{row.R:7.3f}  {'in ' if row.in_theory_window else 'out'}  "
                f"{row.final_ratio:.4e}  {marks}"
            )
        return "\n".join(lines)


def chain_check(
    history,
    p: ExponentVector,
    d: int,
    bc: BoundaryCondition,
    R_values: Sequence[float],
    epsilon: float,
    C0: Sequence[float],
    lam: float | None = None,
) -> ChainReport:
    """Evaluate both sides of every link of the inequality chain on a run.

    Purely diagnostic: hidden constants are reported as measured ratios and
    nothing is asserted.  The final ratio eps * R^(2 gamma_max - d) realizes
    the closing inequality (data term <= C R^(-2 gamma_max + d)); it is only
    meaningful inside the theory window R <= sqrt(covered time).
    """
    k = p.k
    if len(C0) != k:
        raise ValueError(f"expected {k} data constants, got {len(C0)}")
    if lam is None:
        lam = 2.0 / (p.p_min - 1.0)
    report = compute_gamma(p, d)
    weight = HarmonicWeight(d, bc)
    times = np.asarray(history.times, dtype=float)
    t_covered = float(times[-1])

    rows = []
    for R in R_values:
        cutoff = ScaledCutoff(R=float(R), profile=CutoffProfile(lam=lam))
        links = []
        for j in range(k):  # j = ell - 1
            prev = (j - 1) % k
            i_prev = functional_IR(
                history,
                R,
                prev + 1,
                FunctionalKind.I_R,
                p.p[j],
                weight,
                cutoff,
                allow_truncated=True,
            ).value
            p_next = p.p[(j + 1) % k]
            star = functional_IR(
                history,
                R,
                j + 1,
                FunctionalKind.I_R_STAR,
                p_next,
                weight,
                cutoff,
                allow_truncated=True,
            ).value
            lhs = i_prev + C0[j] * epsilon
            rhs = theta(R, d, bc, p_next) * star ** (1.0 / p_next)
            links.append(LinkCheck(ell=j + 1, lhs=lhs, rhs=rhs))
        power = 2.0 * report.gamma_max - d
        rows.append(
            ChainRow(
                R=float(R),
                links=tuple(links),
                final_ratio=epsilon * float(R) ** power,
                final_ratio_data=C0[-1] * epsilon * float(R) ** power,
                in_theory_window=float(R) ** 2 <= t_covered * (1.0 + 1e-12),
            )
        )
    return ChainReport(rows=tuple(rows), gamma_max=report.gamma_max, epsilon=epsilon)
