"""
Sample-path generation for Brownian motion with uncertain volatility.

A path is produced by an adapted volatility control confined to a band
[sigma_lo, sigma_hi]: on each step the control picks a level sigma_k using
only information up to the left node, and the path advances by
sigma_k * sqrt(dt) * Z_k with Z_k i.i.d. standard normal.  The running
quadratic variation advances by sigma_k**2 * dt.  Each fixed control is one
classical diffusion; the supremum over a family of controls is how the
sublinear expectation is estimated (see :mod:`gbmlab.expectation`).

Also provides the discrete stochastic integrals along a path: the left-point
Ito sum against dB and the left-point sum against d<B>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "VolBand",
    "TimeGrid",
    "ConstantControl",
    "PiecewiseIIDControl",
    "BangBangControl",
    "constant",
    "piecewise_iid",
    "bang_bang",
    "SampledPath",
    "simulate_path",
    "path_from_driver",
    "ito_integral",
    "qv_integral",
]


@dataclass(frozen=True)
class VolBand:
    """Volatility band 0 < sigma_lo <= sigma_hi (per sqrt time unit)."""

    sigma_lo: float
    sigma_hi: float

    def __post_init__(self):
        if not (0.0 < self.sigma_lo <= self.sigma_hi):
            raise ValueError(
                f"volatility band requires 0 < sigma_lo <= sigma_hi, "
                f"got [{self.sigma_lo}, {self.sigma_hi}]"
            )

    def contains(self, sigma: float) -> bool:
        return self.sigma_lo <= sigma <= self.sigma_hi

    def levels(self, n: int) -> np.ndarray:
        """n equally spaced volatility levels spanning the band."""
        if n < 1:
            raise ValueError("need at least one level")
        if n == 1:
            return np.array([self.sigma_hi])
        return np.linspace(self.sigma_lo, self.sigma_hi, n)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform mesh on [0, t_max] with n_steps steps (n_steps + 1 nodes)."""

    t_max: float
    n_steps: int

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be a positive integer")
        if not (self.t_max > 0.0 and math.isfinite(self.t_max)):
            raise ValueError("t_max must be positive and finite")

    @property
    def mesh(self) -> float:
        return self.t_max / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps + 1)

    def index_of(self, t: float) -> int:
        """Index of the node equal to t; raises if t is off-grid."""
        k = int(round(t / self.mesh))
        if k < 0 or k > self.n_steps or abs(k * self.mesh - t) > 1e-9 * max(1.0, self.t_max):
            raise ValueError(f"time {t} is not a node of the grid")
        return k


# ---------------------------------------------------------------------------
# Volatility controls.  Each control is adapted: the level used on
# [t_k, t_{k+1}) depends only on (k, t_k, B_{t_k}), never on the increment
# about to be generated.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantControl:
    sigma: float
    band: VolBand

    def __post_init__(self):
        if not self.band.contains(self.sigma):
            raise ValueError(f"sigma={self.sigma} outside band "
                             f"[{self.band.sigma_lo}, {self.band.sigma_hi}]")

    @property
    def control_id(self) -> str:
        return f"const({self.sigma:g})"


@dataclass(frozen=True)
class PiecewiseIIDControl:
    """Per-step level drawn i.i.d. from a finite subset of the band."""

    levels: tuple
    band: VolBand

    def __post_init__(self):
        if len(self.levels) == 0:
            raise ValueError("need at least one level")
        for s in self.levels:
            if not self.band.contains(s):
                raise ValueError(f"level {s} outside band")

    @property
    def control_id(self) -> str:
        return "iid(" + ",".join(f"{s:g}" for s in self.levels) + ")"


def _below_zero(t: float, b: float) -> bool:
    return b < 0.0


@dataclass(frozen=True)
class BangBangControl:
    """sigma_hi while predicate(t_k, B_{t_k}) holds, else sigma_lo.

    The default predicate switches to the high level on the negative
    half-line, which is extremal for many convex payoffs of the terminal
    value.  Supply your own predicate for other experiments.
    """

    band: VolBand
    predicate: Callable[[float, float], bool] = _below_zero
    label: str = "bang_bang"

    @property
    def control_id(self) -> str:
        return self.label


VolatilityControl = ConstantControl | PiecewiseIIDControl | BangBangControl


def constant(sigma: float, band: VolBand | None = None) -> ConstantControl:
    """Constant-volatility control; band defaults to the degenerate [sigma, sigma]."""
    return ConstantControl(sigma, band if band is not None else VolBand(sigma, sigma))


def piecewise_iid(levels: Sequence[float], band: VolBand | None = None) -> PiecewiseIIDControl:
    lv = tuple(float(s) for s in levels)
    if band is None:
        band = VolBand(min(lv), max(lv))
    return PiecewiseIIDControl(lv, band)


def bang_bang(band: VolBand,
              predicate: Callable[[float, float], bool] | None = None,
              label: str = "bang_bang") -> BangBangControl:
    if predicate is None:
        return BangBangControl(band, label=label)
    return BangBangControl(band, predicate, label)


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampledPath:
    """One simulated trajectory: node values of B and its running <B>.

    b[0] = qv[0] = 0, qv is nondecreasing and qv[k+1] - qv[k] equals
    sigma_k**2 * dt for the level the control used on step k.  Arrays are
    frozen after construction and safe to share across threads.
    """

    grid: TimeGrid
    b: np.ndarray
    qv: np.ndarray
    seed: int
    control_id: str

    def __post_init__(self):
        self.b.setflags(write=False)
        self.qv.setflags(write=False)

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def t_max(self) -> float:
        return self.grid.t_max

    def index_of(self, t: float) -> int:
        return self.grid.index_of(t)

    def range(self) -> tuple[float, float]:
        return float(self.b.min()), float(self.b.max())


def _streams(seed: int) -> tuple[np.random.Generator, np.random.SeedSequence]:
    """Driver stream (Gaussian increments) and auxiliary seed material.

    The driver depends only on the seed, so controls sharing a seed share
    the same Gaussian increments (coupled sampling).
    """
    root = np.random.SeedSequence(seed)
    driver_ss, aux_ss = root.spawn(2)
    return np.random.default_rng(driver_ss), aux_ss


def path_from_driver(control: VolatilityControl,
                     grid: TimeGrid,
                     z: np.ndarray,
                     aux: np.random.SeedSequence | np.random.Generator | None = None,
                     seed: int = -1) -> SampledPath:
    """Build the path driven by the given standard-normal increments z.

    Exposed so tests can vary one increment and confirm nothing before it
    changes; `simulate_path` is the seeded entry point.
    """
    n = grid.n_steps
    z = np.asarray(z, dtype=float)
    if z.shape != (n,):
        raise ValueError(f"driver must have shape ({n},), got {z.shape}")
    dt = grid.mesh
    sq = math.sqrt(dt)

    if isinstance(control, ConstantControl):
        sig = np.full(n, control.sigma)
    elif isinstance(control, PiecewiseIIDControl):
        if aux is None:
            raise ValueError("piecewise i.i.d. control needs an auxiliary stream")
        rng = aux if isinstance(aux, np.random.Generator) else np.random.default_rng(aux)
        sig = np.asarray(control.levels)[rng.integers(0, len(control.levels), n)]
    elif isinstance(control, BangBangControl):
        lo, hi = control.band.sigma_lo, control.band.sigma_hi
        pred = control.predicate
        nodes = grid.nodes
        sig = np.empty(n)
        b_k = 0.0
        zs = z * sq
        for k in range(n):
            s = hi if pred(nodes[k], b_k) else lo
            sig[k] = s
            b_k += s * zs[k]
    else:
        raise TypeError(f"unknown control type {type(control).__name__}")

    b = np.empty(n + 1)
    b[0] = 0.0
    np.cumsum(sig * sq * z, out=b[1:])
    qv = np.empty(n + 1)
    qv[0] = 0.0
    np.cumsum(sig * sig * dt, out=qv[1:])
    return SampledPath(grid, b, qv, seed, control.control_id)


def simulate_path(control: VolatilityControl, grid: TimeGrid, seed: int) -> SampledPath:
    """Simulate one path under the given control; bitwise reproducible.

    For a fixed seed, different controls see the same Gaussian driver, so
    per-scenario payoffs are coupled.
    """
    rng, aux_ss = _streams(seed)
    z = rng.standard_normal(grid.n_steps)
    return path_from_driver(control, grid, z, aux=aux_ss, seed=seed)


# ---------------------------------------------------------------------------
# Discrete integrals along a path (left-point sums throughout)
# ---------------------------------------------------------------------------


def ito_integral(integrand, path: SampledPath) -> float:
    """Left-point Ito sum of a node-sampled integrand against dB.

    `integrand` is either an array of node values (length n_steps + 1; the
    value at the final node is never used) or a callable applied to the
    node values of B.  The node-k value may only use information up to t_k.
    """
    if callable(integrand):
        eta = np.asarray(integrand(path.b), dtype=float)
    else:
        eta = np.asarray(integrand, dtype=float)
    if eta.shape != path.b.shape:
        raise ValueError(
            f"integrand has {eta.shape[0] if eta.ndim else 0} values, "
            f"grid has {path.b.shape[0]} nodes"
        )
    return float(eta[:-1] @ np.diff(path.b))


def qv_integral(f, path: SampledPath) -> float:
    """Left-point sum of f(B) against d<B>: sum f(B_k) (qv[k+1] - qv[k])."""
    vals = np.asarray(f(path.b[:-1]), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand is not finite at some visited point")
    return float(vals @ np.diff(path.qv))
