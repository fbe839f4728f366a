import numpy as np
import pytest

from exwave.exponents import BoundaryCondition, ExponentVector
from exwave.testfn import (
    CutoffProfile,
    HarmonicWeight,
    ScaledCutoff,
    bridge,
    bridge_derivatives,
    cutoff_value,
    laplacian_psi_phi_R,
    cutoff_estimate_sup_ratios,
    phi_R_derivatives,
    phi_R_radial_derivative,
    psi,
    psi_gradient_magnitude,
)

BCS = [
    BoundaryCondition(0.0, 1.0),
    BoundaryCondition(1.0, 0.0),
    BoundaryCondition(1.0, 1.0),
    BoundaryCondition(2.0, 1.0),
]


# ---------------------------------------------------------------------------
# bridge and cutoffs
# ---------------------------------------------------------------------------

def test_bridge_endpoints_and_midpoint():
    assert bridge(-1.0) == 1.0
    assert bridge(0.0) == 1.0
    assert bridge(1.0) == 0.0
    assert bridge(2.0) == 0.0
    assert bridge(0.5) == pytest.approx(0.5, abs=1e-15)
    s = np.linspace(0.01, 0.99, 199)
    g = bridge(s)
    assert np.all(np.diff(g) <= 0.0)
    core = (s > 0.1) & (s < 0.9)  # the tails saturate to 1/0 in double precision
    assert np.all(np.diff(g[core]) < 0.0)


def test_bridge_derivatives_match_finite_differences():
    s = np.linspace(0.05, 0.95, 19)
    h = 1e-5
    _, g1, g2 = bridge_derivatives(s)
    fd1 = (bridge(s + h) - bridge(s - h)) / (2 * h)
    fd2 = (bridge(s + h) - 2 * bridge(s) + bridge(s - h)) / h**2
    assert np.max(np.abs(g1 - fd1)) < 1e-7
    assert np.max(np.abs(g2 - fd2)) < 1e-4


def test_cutoff_piecewise_values():
    assert cutoff_value(0.3) == 1.0
    assert cutoff_value(0.3, star=True) == 0.0
    assert cutoff_value(0.75) == pytest.approx(0.5, abs=1e-15)
    assert cutoff_value(1.2) == 0.0
    # phi* joins phi at rho = 1/2
    assert cutoff_value(0.5, star=True) == cutoff_value(0.5) == 1.0
    with pytest.raises(ValueError):
        cutoff_value(-0.1)


def test_cutoff_sandwich():
    rho = np.linspace(0.0, 1.5, 700)
    lam = 3.0
    prof = CutoffProfile(lam=lam)
    cut = ScaledCutoff(R=2.0, profile=prof)
    t = np.zeros_like(rho)
    r = 1.0 + (rho * cut.R**4) ** 0.25  # maps rho back to a radius at t = 0
    plain = cut.phi_R(t, r)
    star = cut.phi_R(t, r, star=True)
    assert np.all(star >= 0.0) and np.all(plain <= 1.0) and np.all(star <= plain)
    on = rho >= 0.5 + 1e-9  # roundtripping r(rho) can land a hair below 1/2
    assert np.array_equal(star[on], plain[on])


def test_lambda_floor_rule():
    p = ExponentVector.of(1.4, 2.0)
    assert CutoffProfile.floor_for(p) == pytest.approx(5.0)
    prof = CutoffProfile.for_exponents(p)
    assert prof.admissible_for(p)
    assert not CutoffProfile(lam=1.0).admissible_for(p)
    # paper's equivalent statement of the rule: min(p) * lam/(lam+2) >= 1
    lam = prof.lam
    assert p.p_min * lam / (lam + 2.0) >= 1.0 - 1e-12


# ---------------------------------------------------------------------------
# harmonic weight
# ---------------------------------------------------------------------------

def test_psi_values():
    assert psi(1.0, 2, BoundaryCondition.dirichlet()) == 0.0
    assert psi(2.0, 3, BoundaryCondition.dirichlet()) == pytest.approx(0.5)
    robin = BoundaryCondition.robin(1, 1)
    w = HarmonicWeight(2, robin)
    assert w.value(1.0) == pytest.approx(1.0)
    assert w.boundary_identity() == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        psi(0.5, 2, robin)


def test_psi_gradient_values():
    assert psi_gradient_magnitude(2.0, 2, BoundaryCondition.dirichlet()) == pytest.approx(0.5)
    assert psi_gradient_magnitude(3.0, 5, BoundaryCondition.dirichlet()) == pytest.approx(1.0 / 27.0)
    assert psi_gradient_magnitude(7.3, 4, BoundaryCondition.neumann()) == 0.0
    assert psi_gradient_magnitude(5.0, 1, BoundaryCondition.robin(1, 2)) == 1.0


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
@pytest.mark.parametrize("bc", BCS)
def test_harmonicity_and_boundary_identity(d, bc):
    w = HarmonicWeight(d, bc)
    r = np.linspace(1.0, 100.0, 2001)
    assert np.max(np.abs(w.laplacian_residual(r))) <= 1e-10
    assert abs(w.boundary_identity()) <= 1e-12
    if bc.is_dissipative:
        assert np.all(np.asarray(w.value(r)) >= -1e-15)


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_harmonicity_by_finite_differences(d):
    """Second-order FD Laplacian of Psi shrinks ~4x per halving of h."""
    bc = BoundaryCondition.robin(1, 1)
    r = np.linspace(1.5, 20.0, 101)
    resid = []
    for h in (1e-2, 5e-3):
        lap = (psi(r + h, d, bc) - 2 * psi(r, d, bc) + psi(r - h, d, bc)) / h**2 + (
            (d - 1) / r
        ) * (psi(r + h, d, bc) - psi(r - h, d, bc)) / (2 * h)
        resid.append(np.max(np.abs(lap)))
    if resid[0] > 1e-11:  # below that, rounding noise dominates
        assert resid[0] / resid[1] == pytest.approx(4.0, rel=0.2)


def test_paper_auxiliary_inequalities():
    r = np.linspace(1.0, 50.0, 5000)
    assert np.all(1.0 - 1.0 / r <= np.log(r) + 1e-15)
    for d in (3, 4, 5, 6):
        assert np.all(r ** (d - 1) + 1.0 >= 2.0 * r - 1e-12)


# ---------------------------------------------------------------------------
# scaled cutoff derivatives
# ---------------------------------------------------------------------------

def test_phi_R_flat_and_outside():
    vals = phi_R_derivatives(0.0, 1.0, 4.0, 2.0, 3)
    assert vals[0] == 1.0 and all(v == 0.0 for v in vals[1:])
    for r in (1.0, 3.0, 5.0):
        vals = phi_R_derivatives(4.0**2, r, 4.0, 2.0, 3)
        assert all(v == 0.0 for v in vals)
    # support containment: everything vanishes when t^2 + (r-1)^4 >= R^4
    t = np.linspace(0, 20.0, 41)
    r = 1.0 + np.linspace(0, 3.0, 31)
    T, Rr = np.meshgrid(t, r, indexing="ij")
    out = (T**2 + (Rr - 1) ** 4) >= 2.0**4
    vals = phi_R_derivatives(T, Rr, 2.0, 3.0, 2)
    for v in vals:
        assert np.all(v[out] == 0.0)


def _fd_time(t, r, R, lam, d, h=1e-4):
    f = lambda tt: phi_R_derivatives(tt, r, R, lam, d)[0]
    return (f(t + h) - f(t - h)) / (2 * h), (f(t + h) - 2 * f(t) + f(t - h)) / h**2


def test_phi_R_derivatives_match_finite_differences():
    R, lam, d = 4.0, 2.0, 3
    rng = np.random.default_rng(5)
    pts = 0
    for _ in range(200):
        t = rng.uniform(0.0, R**2)
        r = 1.0 + rng.uniform(0.0, R)
        rho = (t**2 + (r - 1) ** 4) / R**4
        if not 0.55 < rho < 0.95:  # sample the transition shell
            continue
        pts += 1
        phi, d_t, d_tt, lap, grad = phi_R_derivatives(t, r, R, lam, d)
        fd1, fd2 = _fd_time(t, r, R, lam, d)
        assert d_t == pytest.approx(fd1, rel=1e-5, abs=1e-9)
        assert d_tt == pytest.approx(fd2, rel=1e-3, abs=1e-7)
        h = 1e-4
        g = lambda rr: phi_R_derivatives(t, rr, R, lam, d)[0]
        fdr = (g(r + h) - g(r - h)) / (2 * h)
        assert grad == pytest.approx(abs(fdr), rel=1e-5, abs=1e-9)
        fdrr = (g(r + h) - 2 * g(r) + g(r - h)) / h**2
        assert lap == pytest.approx(fdrr + (d - 1) / r * fdr, rel=1e-3, abs=1e-7)
    assert pts > 20


def test_laplacian_psi_phi_R_product_rule_fd():
    """Lap(Psi phi_R) against a finite-difference radial Laplacian."""
    R, lam, d = 4.0, 3.0, 3
    bc = BoundaryCondition.robin(1, 1)
    h = 1e-4
    for (t, r) in [(14.0, 1.8), (12.0, 2.4), (15.0, 1.5)]:  # transition shell
        f = lambda rr: psi(rr, d, bc) * phi_R_derivatives(t, rr, R, lam, d)[0]
        fd = (f(r + h) - 2 * f(r) + f(r - h)) / h**2 + ((d - 1) / r) * (
            f(r + h) - f(r - h)
        ) / (2 * h)
        exact = laplacian_psi_phi_R(t, r, R, lam, d, bc)
        assert exact == pytest.approx(fd, rel=1e-4, abs=1e-8)


def test_phi_R_radial_derivative_sign():
    # phi decreasing in rho and (r-1)^3 >= 0: d_r phi_R <= 0
    t = np.full(50, 3.0)
    r = 1.0 + np.linspace(0.0, 3.9, 50)
    dr = phi_R_radial_derivative(t, r, 4.0, 2.0)
    assert np.all(dr <= 0.0)


# ---------------------------------------------------------------------------
# sup ratios
# ---------------------------------------------------------------------------

def test_sup_ratio_ratios_uniform_in_R():
    bc = BoundaryCondition.dirichlet()
    a = cutoff_estimate_sup_ratios(4.0, 2.0, 3, bc, grid=(256, 256))
    b = cutoff_estimate_sup_ratios(16.0, 2.0, 3, bc, grid=(256, 256))
    assert a.ok and b.ok
    for x, y in zip(a.ratios, b.ratios):
        assert max(x, y) / min(x, y) < 2.0


def test_sup_ratio_ratios_lambda_sweep_finite():
    bc = BoundaryCondition.neumann()
    for lam in (2.0, 5.0, 10.0):
        res = cutoff_estimate_sup_ratios(4.0, lam, 2, bc, grid=(128, 128))
        assert res.ok and all(np.isfinite(res.ratios)) and res.ratios[0] > 0


def test_sup_ratio_neumann_iv_equals_iii():
    res = cutoff_estimate_sup_ratios(8.0, 2.0, 3, BoundaryCondition.neumann(), grid=(128, 128))
    assert res.ratios[3] == res.ratios[2]


def test_sup_ratio_mutation_grows():
    bc = BoundaryCondition.dirichlet()
    mut = dict(rhs_r_powers=(-3.0, -4.0, -2.0, -2.0), grid=(128, 128))
    r4 = cutoff_estimate_sup_ratios(4.0, 2.0, 3, bc, **mut).ratios[0]
    r32 = cutoff_estimate_sup_ratios(32.0, 2.0, 3, bc, **mut).ratios[0]
    assert r32 / r4 >= 2.0


def test_sup_ratio_rejects_small_R():
    with pytest.raises(ValueError):
        cutoff_estimate_sup_ratios(1.0, 2.0, 3, BoundaryCondition.dirichlet())


def test_sup_ratio_ratio_cap_violation_reported():
    res = cutoff_estimate_sup_ratios(
        4.0, 2.0, 3, BoundaryCondition.dirichlet(), grid=(64, 64), ratio_cap=1e-6
    )
    assert not res.ok
    assert any("exceeds cap" in v for v in res.violations)
