import math

import numpy as np
import pytest

from exwave.exponents import BoundaryCondition, ExponentVector
from exwave.quadrature import (
    FunctionalKind,
    InsufficientCoverageError,
    RadialMeasure,
    chain_check,
    functional_IR,
    measure_QRstar_psi,
    sphere_area,
    theta,
)
from exwave.solver import SolutionHistory
from exwave.testfn import CutoffProfile, HarmonicWeight, ScaledCutoff


def _const_history(value, k=1, r_max=4.0, t_max=4.0, nr=401, nt=161):
    r = np.linspace(1.0, r_max, nr)
    times = np.linspace(0.0, t_max, nt)
    u = np.full((nt, k, nr), float(value))
    return SolutionHistory(times=times, r=r, u=u, horizon=t_max)


def test_sphere_areas():
    assert sphere_area(1) == 2.0
    assert sphere_area(1, one_sided_1d=True) == 1.0
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2)


def test_radial_measure_against_closed_form():
    # int_1^2 r^2 dr * 4pi = 4pi * 7/3
    r = np.linspace(1.0, 2.0, 20001)
    val = RadialMeasure(3).integrate(r, np.ones_like(r))
    assert val == pytest.approx(4 * math.pi * 7 / 3, rel=1e-8)


def test_theta_branch_table():
    dirichlet = BoundaryCondition.dirichlet()
    neumann = BoundaryCondition.neumann()
    assert theta(math.e, 2, dirichlet, 2.0) == pytest.approx(1.0)
    assert theta(4.0, 3, dirichlet, 2.0) == pytest.approx(2.0)
    assert theta(8.0, 1, neumann, 3.0) == pytest.approx(1.0)
    # beta = 0 has no log factor in d = 2
    assert theta(9.0, 2, neumann, 3.0) == pytest.approx(9.0 ** (2 - 4 / 3))
    assert theta(9.0, 1, dirichlet, 2.0) == pytest.approx(81.0 ** (1 - 2 / 2) * 9 ** 0)
    with pytest.raises(ValueError):
        theta(1.0, 2, dirichlet, 2.0)
    with pytest.raises(ValueError):
        theta(4.0, 2, dirichlet, 1.0)


def test_measure_shell_against_grid_oracle():
    """Adaptive result vs a brute-force 2D grid sum (Neumann, Psi = 1)."""
    R, d = 4.0, 2
    bc = BoundaryCondition.neumann()
    val = measure_QRstar_psi(R, d, bc, T_horizon=R**2)
    t = np.linspace(0.0, R**2, 1500)
    r = np.linspace(1.0, 1.0 + R, 1500)
    T, Rr = np.meshgrid(t, r, indexing="ij")
    arg = T**2 + (Rr - 1) ** 4
    inside = (arg > R**4 / 2) & (arg < R**4)
    cell = (t[1] - t[0]) * (r[1] - r[0])
    oracle = np.sum(inside * sphere_area(d) * Rr ** (d - 1)) * cell
    assert val == pytest.approx(oracle, rel=5e-3)


@pytest.mark.parametrize(
    "d,bc",
    [
        (2, BoundaryCondition.dirichlet()),
        (3, BoundaryCondition.dirichlet()),
        (2, BoundaryCondition.neumann()),
        (1, BoundaryCondition.dirichlet()),
        (1, BoundaryCondition.neumann()),
    ],
)
def test_measure_growth_bands(d, bc):
    """Normalized shell measures stay in a narrow band over an R doubling."""
    if d == 1:
        rate = lambda R: R**4 if bc.beta != 0 else R**3
    elif d == 2 and bc.beta != 0:
        rate = lambda R: R**4 * math.log(R)
    else:
        rate = lambda R: R ** (d + 2)
    vals = [measure_QRstar_psi(R, d, bc, T_horizon=R**2) / rate(R) for R in (4.0, 8.0)]
    assert max(vals) / min(vals) < 2.0


def test_measure_validations():
    with pytest.raises(ValueError):
        measure_QRstar_psi(1.0, 2, BoundaryCondition.dirichlet(), T_horizon=100.0)
    with pytest.raises(ValueError):
        measure_QRstar_psi(4.0, 2, BoundaryCondition.dirichlet(), T_horizon=10.0)


def test_functional_zero_solution():
    hist = _const_history(0.0)
    w = HarmonicWeight(3, BoundaryCondition.neumann())
    cut = ScaledCutoff(R=1.5, profile=CutoffProfile(lam=2.0))
    val = functional_IR(hist, 1.5, 1, FunctionalKind.I_R, 2.0, w, cut)
    assert val.value == 0.0


def test_functional_constant_against_dense_oracle():
    R, d, lam = 2.0, 3, 2.0
    bc = BoundaryCondition.neumann()
    hist = _const_history(1.0)
    w = HarmonicWeight(d, bc)
    cut = ScaledCutoff(R=R, profile=CutoffProfile(lam=lam))
    val = functional_IR(hist, R, 1, FunctionalKind.I_R, 2.0, w, cut).value
    rd = np.linspace(1.0, 4.0, 4001)
    td = np.linspace(0.0, 4.0, 3201)
    dense = np.trapezoid(
        np.trapezoid(
            cut.phi_R(td[:, None], rd[None, :]) * sphere_area(d) * rd**2, rd, axis=1
        ),
        td,
    )
    assert val == pytest.approx(dense, rel=1e-4)


def test_functional_star_below_plain_and_monotone_in_R():
    hist = _const_history(1.0, r_max=5.0, t_max=9.0)
    w = HarmonicWeight(2, BoundaryCondition.dirichlet())
    prof = CutoffProfile(lam=3.0)
    prev = 0.0
    for R in (1.2, 1.6, 2.0):
        cut = ScaledCutoff(R=R, profile=prof)
        plain = functional_IR(hist, R, 1, FunctionalKind.I_R, 2.0, w, cut).value
        star = functional_IR(hist, R, 1, FunctionalKind.I_R_STAR, 2.0, w, cut).value
        assert 0.0 <= star <= plain
        assert plain >= prev  # Q_R nested and phi_R nondecreasing in R
        prev = plain


def test_functional_coverage_errors():
    w = HarmonicWeight(3, BoundaryCondition.neumann())
    cut = ScaledCutoff(R=2.0, profile=CutoffProfile(lam=2.0))
    clipped_r = _const_history(1.0, r_max=2.5)
    with pytest.raises(InsufficientCoverageError):
        functional_IR(clipped_r, 2.0, 1, FunctionalKind.I_R, 2.0, w, cut)
    clipped_t = _const_history(1.0, t_max=2.0)
    clipped_t.horizon = 10.0  # run was meant to reach t = 10 but stopped at 2
    with pytest.raises(InsufficientCoverageError):
        functional_IR(clipped_t, 2.0, 1, FunctionalKind.I_R, 2.0, w, cut)
    functional_IR(clipped_t, 2.0, 1, FunctionalKind.I_R, 2.0, w, cut, allow_truncated=True)


def test_functional_grid_self_consistency():
    """Halving both steps: difference sequence contracts at second order."""
    R, d = 2.0, 3
    w = HarmonicWeight(d, BoundaryCondition.neumann())
    cut = ScaledCutoff(R=R, profile=CutoffProfile(lam=2.0))

    def value(nr, nt):
        r = np.linspace(1.0, 4.0, nr)
        times = np.linspace(0.0, 4.0, nt)
        u = (np.exp(-times)[:, None] * np.exp(-((r - 2.0) ** 2)))[:, None, :]
        hist = SolutionHistory(times=times, r=r, u=u, horizon=4.0)
        return functional_IR(hist, R, 1, FunctionalKind.I_R, 2.0, w, cut).value

    v1, v2, v3 = value(101, 81), value(201, 161), value(401, 321)
    err12 = abs(v1 - v2)
    err23 = abs(v2 - v3)
    assert err12 <= 4.0 * 4.0 * err23  # ratio ~4 expected; slack factor 4


def test_chain_check_zero_solution():
    p = ExponentVector.of(2.0, 2.0)
    hist = _const_history(0.0, k=2, r_max=6.0, t_max=16.0, nr=301, nt=201)
    rep = chain_check(
        hist, p, 3, BoundaryCondition.neumann(), [2.0, 4.0], epsilon=0.1, C0=[1.0, 1.0]
    )
    for row in rep.rows:
        for link in row.links:
            assert link.lhs == pytest.approx(0.1)  # only the data term survives
            assert link.rhs == 0.0
        assert row.final_ratio == pytest.approx(0.1 * row.R ** (2 * rep.gamma_max - 3))


def test_chain_check_data_term_scales_with_epsilon():
    """On a short horizon the chain left sides are data-dominated: doubling
    epsilon doubles them to within the quadrature's nonlinear correction."""
    from exwave.solver import InitialData, SolverConfig, run

    p = ExponentVector.of(1.4, 1.4)
    bc = BoundaryCondition.dirichlet()
    vals = {}
    for eps in (0.02, 0.04):
        cfg = SolverConfig.with_auto_domain(
            p=p, d=3, bc=bc, n=400, T_end=4.0,
            data=InitialData(center=2.0, width=0.5, epsilon=eps),
            history_snapshots=128,
        )
        rec = run(cfg)
        c0 = rec.data_positivity / eps
        rep = chain_check(rec.history, p, 3, bc, [2.0], epsilon=eps, C0=[c0, c0])
        vals[eps] = rep.rows[0].links[0].lhs
    assert vals[0.04] / vals[0.02] == pytest.approx(2.0, rel=5e-2)


def test_chain_check_validates_c0_length():
    hist = _const_history(0.0, k=2, r_max=6.0, t_max=16.0, nr=101, nt=51)
    with pytest.raises(ValueError):
        chain_check(
            hist, ExponentVector.of(2, 2), 3, BoundaryCondition.neumann(),
            [2.0], epsilon=0.1, C0=[1.0],
        )
