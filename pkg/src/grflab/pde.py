"""Periodic torus reductions: scalar parabolic flows and the ground state
of the associated Schroedinger operator.

Two pointwise flows on a doubly periodic grid:

* ``krf_rhs``:  du/dt = log(1 + lap(u) / 2), the potential form of the
  Kaehler reduction; admissible while 1 + lap(u)/2 > 0.
* ``gkrf_rhs``: du/dt = log(1 + u_xx / 2) - log(1 - u_yy / 2), the
  generalized variant with opposite concavity in the two axes.

Both satisfy a maximum principle: sup du/dt is nonincreasing and
inf du/dt is nondecreasing along the flow, which the integrator records
at every step.  Time stepping is explicit midpoint RK2 with the usual
parabolic step restriction dt ~ h^2.

``lambda_eigen`` computes the lowest eigenpair of -4 lap + V by shifted
inverse iteration with a Rayleigh-quotient refinement; the shift starts
at min(V) - 1, a guaranteed lower bound for the spectrum.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "PeriodicGrid",
    "PositivityError",
    "PdeTrajectory",
    "laplacian",
    "second_difference",
    "krf_rhs",
    "gkrf_rhs",
    "pde_integrate",
    "lambda_eigen",
    "grid_to_csv",
]

DEFAULT_PERIOD = 2.0 * np.pi
ADMISSIBILITY_FLOOR = 1e-8


class PositivityError(ValueError):
    """An admissibility factor dropped to or below the floor."""

    def __init__(self, message: str, node=None, value=None):
        super().__init__(message)
        self.node = node
        self.value = value


@dataclass
class PeriodicGrid:
    """Scalar samples on a flat periodic rectangle.

    ``values[i, j]`` sits at (i * period / N, j * period / M).  An axis of
    size 1 is degenerate (no variation, zero second difference), which is
    how 1-d problems are represented; active axes need at least 8 points.
    """

    values: np.ndarray
    period: float = DEFAULT_PERIOD

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.ndim != 2:
            raise ValueError("grid values must be 2-d")
        for size in self.values.shape:
            if size != 1 and size < 8:
                raise ValueError("active axes need at least 8 points")
        if max(self.values.shape) < 8:
            raise ValueError("grid needs at least one active axis")
        if self.period <= 0:
            raise ValueError("period must be positive")

    @property
    def shape(self):
        return self.values.shape

    @property
    def h(self) -> float:
        """Axis-0 spacing, period / N."""
        return self.period / self.values.shape[0]

    def spacing(self, axis: int) -> float:
        return self.period / self.values.shape[axis]

    def min_active_spacing(self) -> float:
        return min(self.spacing(ax) for ax in (0, 1) if self.values.shape[ax] > 1)

    def with_values(self, values) -> "PeriodicGrid":
        return PeriodicGrid(values, self.period)

    @classmethod
    def from_function(cls, f, N: int, M: int | None = None,
                      period: float = DEFAULT_PERIOD) -> "PeriodicGrid":
        """Sample f(x, y) at the grid nodes; M defaults to N."""
        M = N if M is None else M
        x = np.arange(N) * (period / N)
        y = np.arange(M) * (period / M)
        X, Y = np.meshgrid(x, y, indexing="ij")
        return cls(f(X, Y), period)


def second_difference(grid: PeriodicGrid, axis: int) -> np.ndarray:
    """Periodic central second difference along one axis (zero when the
    axis is degenerate)."""
    u = grid.values
    if u.shape[axis] == 1:
        return np.zeros_like(u)
    h = grid.spacing(axis)
    return (np.roll(u, 1, axis=axis) + np.roll(u, -1, axis=axis) - 2.0 * u) / (h * h)


def laplacian(grid: PeriodicGrid) -> np.ndarray:
    """Five-point periodic Laplacian (degenerate axes contribute zero)."""
    return second_difference(grid, 0) + second_difference(grid, 1)


def _check_positive(factor: np.ndarray, floor: float, what: str) -> None:
    if np.min(factor) <= floor:
        node = tuple(int(k) for k in
                     np.unravel_index(int(np.argmin(factor)), factor.shape))
        raise PositivityError(
            f"{what} = {float(factor[node]):.3e} <= {floor:.1e} at node {node}",
            node=node, value=float(factor[node]))


def krf_rhs(grid: PeriodicGrid, floor: float = ADMISSIBILITY_FLOOR) -> np.ndarray:
    """du/dt = log(1 + lap(u) / 2); raises PositivityError off the
    admissible cone."""
    half_lap = 0.5 * laplacian(grid)
    _check_positive(1.0 + half_lap, floor, "1 + lap(u)/2")
    return np.log1p(half_lap)


def gkrf_rhs(grid: PeriodicGrid, floor: float = ADMISSIBILITY_FLOOR) -> np.ndarray:
    """du/dt = log((1 + u_xx / 2) / (1 - u_yy / 2)) with both factors
    required positive."""
    uxx = 0.5 * second_difference(grid, 0)
    uyy = 0.5 * second_difference(grid, 1)
    _check_positive(1.0 + uxx, floor, "1 + u_xx/2")
    _check_positive(1.0 - uyy, floor, "1 - u_yy/2")
    return np.log1p(uxx) - np.log1p(-uyy)


@dataclass
class PdeTrajectory:
    times: np.ndarray
    sup_rate: np.ndarray
    inf_rate: np.ndarray
    osc: np.ndarray
    final: PeriodicGrid
    dt: float
    steps_taken: int
    stopped_early: bool

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "sup_rate", "inf_rate", "sup_abs_rate", "osc"])
            for i, t in enumerate(self.times):
                row = [t, self.sup_rate[i], self.inf_rate[i],
                       max(abs(self.sup_rate[i]), abs(self.inf_rate[i])),
                       self.osc[i]]
                w.writerow([repr(float(v)) for v in row])


def pde_integrate(grid: PeriodicGrid, dt: float | None = None,
                  steps: int = 1000, rhs=krf_rhs,
                  stop_sup_rate: float | None = None) -> PdeTrajectory:
    """Explicit midpoint RK2 on du/dt = rhs(u).

    dt defaults to 0.2 h^2 with h the smallest active spacing; a warning
    is issued above the h^2/4 comfort zone.  Each step records sup and
    inf of the rate and the oscillation of u.  When ``stop_sup_rate`` is
    given the run ends as soon as sup |du/dt| falls below it.
    """
    h = grid.min_active_spacing()
    if dt is None:
        dt = 0.2 * h * h
    if dt <= 0:
        raise ValueError("dt must be positive")
    if dt > 0.25 * h * h:
        warnings.warn(f"dt = {dt:.3e} above the parabolic step bound "
                      f"h^2/4 = {0.25 * h * h:.3e}", stacklevel=2)

    u = grid.values.copy()
    times, sups, infs, oscs = [], [], [], []
    t = 0.0
    stopped = False
    steps_taken = 0
    for _ in range(steps):
        rate = rhs(grid.with_values(u))
        times.append(t)
        sups.append(float(np.max(rate)))
        infs.append(float(np.min(rate)))
        oscs.append(float(np.max(u) - np.min(u)))
        if stop_sup_rate is not None and max(abs(sups[-1]), abs(infs[-1])) < stop_sup_rate:
            stopped = True
            break
        mid = u + 0.5 * dt * rate
        u = u + dt * rhs(grid.with_values(mid))
        t += dt
        steps_taken += 1
    # record the arrival state
    rate = rhs(grid.with_values(u))
    times.append(t)
    sups.append(float(np.max(rate)))
    infs.append(float(np.min(rate)))
    oscs.append(float(np.max(u) - np.min(u)))

    return PdeTrajectory(
        times=np.array(times), sup_rate=np.array(sups),
        inf_rate=np.array(infs), osc=np.array(oscs),
        final=grid.with_values(u), dt=dt,
        steps_taken=steps_taken, stopped_early=stopped)


# ---------------------------------------------------------------------------
# ground state of -4 lap + V
# ---------------------------------------------------------------------------

def _second_difference_matrix(n: int, h: float) -> sp.csr_matrix:
    if n == 1:
        return sp.csr_matrix((1, 1))
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    m = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    m[0, n - 1] += 1.0
    m[n - 1, 0] += 1.0
    return (m / (h * h)).tocsr()


def _operator_matrix(V: PeriodicGrid) -> sp.csr_matrix:
    N, M = V.shape
    d2x = _second_difference_matrix(N, V.spacing(0))
    d2y = _second_difference_matrix(M, V.spacing(1))
    lap = sp.kron(d2x, sp.identity(M)) + sp.kron(sp.identity(N), d2y)
    return (-4.0 * lap + sp.diags(V.values.ravel())).tocsr()


def lambda_eigen(V: PeriodicGrid, tol: float = 1e-10,
                 max_iterations: int = 100):
    """Lowest eigenpair of -4 lap + V on the periodic grid.

    Shifted inverse iteration from the constant vector with initial shift
    min(V) - 1 (below the whole spectrum since -4 lap >= 0), switching to
    Rayleigh-quotient shifts once the iterate settles.  Returns
    (eigenvalue, ground_state_grid) with the ground state normalized to
    unit l2 norm and nonnegative mean.
    """
    A = _operator_matrix(V).tocsc()
    n = A.shape[0]
    ident = sp.identity(n, format="csc")
    sigma = float(np.min(V.values)) - 1.0
    v = np.full(n, 1.0 / np.sqrt(n))
    lam = float(v @ (A @ v))
    solver = spla.splu(A - sigma * ident)
    for iteration in range(max_iterations):
        v = solver.solve(v)
        v /= np.linalg.norm(v)
        lam = float(v @ (A @ v))
        residual = float(np.linalg.norm(A @ v - lam * v))
        if residual <= tol * max(1.0, abs(lam)):
            break
        if iteration >= 2:
            # Rayleigh-quotient acceleration; jitter past exact shifts
            try:
                solver = spla.splu(A - lam * ident)
            except RuntimeError:
                solver = spla.splu(A - (lam + 1e-10) * ident)
    if v.sum() < 0:
        v = -v
    return lam, V.with_values(v.reshape(V.shape))


def grid_to_csv(grid: PeriodicGrid, path) -> None:
    """Node table i, j, x, y, value."""
    N, M = grid.shape
    hx, hy = grid.spacing(0), grid.spacing(1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "x", "y", "value"])
        for i in range(N):
            for j in range(M):
                w.writerow([i, j, repr(i * hx), repr(j * hy),
                            repr(float(grid.values[i, j]))])
