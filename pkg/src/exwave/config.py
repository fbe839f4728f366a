"""Config-file ingestion for simulations and sweeps.

Plain INI text with nested sections, e.g.::

    [system]
    p = 1.4, 1.4
    dim = 3

    [bc]
    alpha = 0.0
    beta = 1.0

    [grid]
    n = 4000
    r_max = auto      ; or a number; auto sizes from the propagation cone
    margin = 1.0

    [time]
    t_end = 120.0
    cfl = 0.9

    [data]
    center = 2.0
    width = 0.5
    epsilon = 0.5

    [thresholds]
    blowup = 1e8

    [history]
    snapshots = 256

    [sweep]
    epsilons = 0.8, 0.566, 0.4, 0.283, 0.2
    horizon = bound-aware   ; or fixed
    factor = 4.0
    workers = 1

CLI flags override individual keys.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .exponents import BoundaryCondition, ExponentVector
from .harness import HorizonMode, HorizonRule, SweepSpec
from .solver import InitialData, RadialGrid, SolverConfig


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(";", ",").split(",") if tok.strip())


def load_ini(path: str | Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")
    return parser


def solver_config_from_ini(
    path: str | Path, overrides: dict | None = None
) -> SolverConfig:
    """Build a SolverConfig from an INI file plus optional flag overrides
    (keys: dim, alpha, beta, epsilon)."""
    cfg = load_ini(path)
    overrides = overrides or {}

    p = ExponentVector(_floats(cfg.get("system", "p")))
    d = int(overrides.get("dim") or cfg.getint("system", "dim"))

    alpha = overrides.get("alpha")
    beta = overrides.get("beta")
    if alpha is None:
        alpha = cfg.getfloat("bc", "alpha", fallback=0.0)
    if beta is None:
        beta = cfg.getfloat("bc", "beta", fallback=1.0)
    bc = BoundaryCondition(float(alpha), float(beta))

    data = InitialData(
        center=cfg.getfloat("data", "center", fallback=2.0),
        width=cfg.getfloat("data", "width", fallback=0.5),
        epsilon=float(
            overrides.get("epsilon")
            if overrides.get("epsilon") is not None
            else cfg.getfloat("data", "epsilon", fallback=1.0)
        ),
    )

    T_end = cfg.getfloat("time", "t_end")
    cfl = cfg.getfloat("time", "cfl", fallback=0.9)
    n = cfg.getint("grid", "n")
    r_max_raw = cfg.get("grid", "r_max", fallback="auto").strip().lower()
    margin = cfg.getfloat("grid", "margin", fallback=1.0)
    if r_max_raw == "auto":
        r_max = 1.0 + (data.support_outer - 1.0) + T_end + margin
    else:
        r_max = float(r_max_raw)

    return SolverConfig(
        p=p,
        d=d,
        bc=bc,
        grid=RadialGrid(r_max=r_max, n=n),
        T_end=T_end,
        data=data,
        cfl=cfl,
        blowup_threshold=cfg.getfloat("thresholds", "blowup", fallback=1e8),
        history_snapshots=cfg.getint("history", "snapshots", fallback=256),
    )


def sweep_spec_from_ini(path: str | Path, overrides: dict | None = None) -> SweepSpec:
    """SweepSpec from the [sweep] section on top of the solver config."""
    overrides = overrides or {}
    base = solver_config_from_ini(path, overrides)
    cfg = load_ini(path)
    if overrides.get("eps_list"):
        epsilons = tuple(overrides["eps_list"])
    else:
        epsilons = _floats(cfg.get("sweep", "epsilons"))
    mode = cfg.get("sweep", "horizon", fallback="bound-aware").strip().lower()
    rule = HorizonRule(
        mode=HorizonMode(mode),
        T_fixed=cfg.getfloat("sweep", "t_fixed", fallback=base.T_end),
        factor=cfg.getfloat("sweep", "factor", fallback=4.0),
    )
    workers = int(overrides.get("threads") or cfg.getint("sweep", "workers", fallback=1))
    return SweepSpec(base=base, epsilons=epsilons, horizon=rule, workers=workers)
