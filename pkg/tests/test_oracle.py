import numpy as np
import pytest

from exwave.exponents import ExponentVector
from exwave.oracle import (
    OdeOrder,
    OdeSystem,
    Outcome,
    first_order_tail,
    integrate_adaptive,
    solve_first_order_exact,
)


def test_exact_blow_up_times():
    assert solve_first_order_exact(2.0, 1.0) == 1.0
    assert solve_first_order_exact(2.0, 0.1) == pytest.approx(10.0)
    assert solve_first_order_exact(3.0, 1.0) == 0.5
    with pytest.raises(ValueError):
        solve_first_order_exact(0.9, 1.0)
    with pytest.raises(ValueError):
        solve_first_order_exact(2.0, -1.0)


def test_tail_consistency():
    # T(y0) = t(y) + tail(y) along the trajectory: pick y = 2 y0
    p, y0 = 2.0, 0.5
    T = solve_first_order_exact(p, y0)
    # time to reach y from y0: int_{y0}^{y} dy/y^p
    y = 2 * y0
    t_reach = (y0 ** (1 - p) - y ** (1 - p)) / (p - 1)
    assert t_reach + first_order_tail(p, y) == pytest.approx(T, rel=1e-14)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("y0", [1e-3, 3e-2, 1.0])
def test_adaptive_matches_exact(p, y0):
    sys = OdeSystem(OdeOrder.FIRST, ExponentVector.of(p), epsilon=y0)
    res = integrate_adaptive(sys, M=1e8)
    assert res.blew_up
    exact = solve_first_order_exact(p, y0)
    assert res.t_blow == pytest.approx(exact, rel=1e-6)


def test_threshold_insensitivity():
    sys = OdeSystem(OdeOrder.FIRST, ExponentVector.of(2.0), epsilon=0.25)
    r_low = integrate_adaptive(sys, M=1e6)
    r_high = integrate_adaptive(sys, M=1e10)
    assert abs(r_low.t_blow - r_high.t_blow) <= max(r_low.uncertainty, r_high.uncertainty)
    with pytest.raises(ValueError):
        integrate_adaptive(sys, M=1e3)


def test_no_blowup_at_horizon():
    sys = OdeSystem(OdeOrder.FIRST, ExponentVector.of(2.0), epsilon=1.0)
    res = integrate_adaptive(sys, M=1e8, t_horizon=0.5)
    assert res.outcome is Outcome.NO_BLOWUP_AT_HORIZON
    assert res.t_blow is None and res.t_final <= 0.5 + 1e-12


def test_second_order_damped_single():
    """u'' + u' = u^2 with small data: lifespan grows as eps shrinks; the
    log-log slope is recorded as a calibration reference."""
    ts = []
    eps_list = (0.2, 0.1, 0.05, 0.025)
    for eps in eps_list:
        sys = OdeSystem(OdeOrder.SECOND_DAMPED, ExponentVector.of(2.0), epsilon=eps)
        res = integrate_adaptive(sys, M=1e8)
        assert res.blew_up
        ts.append(res.t_blow)
    assert all(b > a for a, b in zip(ts, ts[1:]))
    slope = np.polyfit(np.log(1.0 / np.asarray(eps_list)), np.log(ts), 1)[0]
    assert 0.5 < slope < 2.0  # calibration reference, no theory value asserted


def test_coupled_components_blow_up_together():
    """Both components diverge at the same time: their threshold-crossing
    times agree to a gap that is tiny relative to the lifespan and shrinks
    as the threshold grows."""
    p = ExponentVector.of(2.0, 3.0)

    def gap_at(M):
        times = []
        for watch in (0, 1):
            sys = OdeSystem(OdeOrder.SECOND_DAMPED, p, epsilon=0.5, watch=watch)
            res = integrate_adaptive(sys, M=M)
            assert res.blew_up
            times.append(res.t_blow)
        return abs(times[0] - times[1]), max(times)

    gap_low, t_blow = gap_at(1e6)
    gap_high, _ = gap_at(1e9)
    assert gap_low <= 1e-3 * t_blow
    assert gap_high < gap_low


def test_system_validation():
    with pytest.raises(ValueError):
        OdeSystem(OdeOrder.FIRST, ExponentVector.of(2.0), epsilon=-1.0)
    with pytest.raises(ValueError):
        OdeSystem(OdeOrder.FIRST, ExponentVector.of(2.0), a=(1.0, 2.0))
    with pytest.raises(ValueError):
        OdeSystem(OdeOrder.FIRST, ExponentVector.of(2.0, 2.0), watch=5)
