"""Hermite-transform engine: coefficients, evidence, density reconstruction.

A target density P on R^N (given through its log density, up to an unknown
constant) is projected onto the orthonormal Hermite basis by Gauss-Hermite
tensor quadrature. The transform works with the lifted function
F = sqrt(P) * e^{+|theta|^2/2}, whose projection coefficients

    a_tau = sum_(j) [prod_k w_{j_k} e^{r_{j_k}^2/2}] * sqrt(P)(r^(j)) * prod_k h_{tau_k}(r_{j_k})

are computed on the raw node grid. This discrete form is exact whenever F is
a polynomial of per-axis degree <= 2*Gamma - 1 (e.g. targets of the form
(polynomial)^2 * Gaussian), and sum_tau a_tau^2 estimates the integral of P.
The normalized reconstruction is [sum_tau a_tau prod_k psi_{tau_k}]^2 divided
by that total energy.

Grid sums stream over fixed-size contiguous blocks of the linearized index
range; per-block partial sums are combined in ascending block order no matter
how many workers ran them, so results are reproducible bit for bit for any
worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hermite
from ._kernels import shell_partial_sums, weight_products
from .errors import CapacityError, DegenerateTargetError, NumericalDomainError
from .multiindex import enumerate_shell
from .quadrature import MAX_ORDER, TensorGrid, gauss_hermite

__all__ = [
    "AffineMap",
    "ApproxDensity",
    "BLOCK_SIZE",
    "CoefficientSet",
    "RunResult",
    "TENSOR_VALUE_LIMIT",
    "TargetDensity",
    "WORKER_ENV_VAR",
    "build_density",
    "coefficient_naive",
    "coefficients_contracted",
    "evidence",
    "run_opaa",
]

# fixed block size: the reduction partition must not depend on worker count
BLOCK_SIZE = 16384
# cap on materialized per-grid-point values (contraction tensor, sqrt-P cache)
TENSOR_VALUE_LIMIT = 10**8
WORKER_ENV_VAR = "OPAA_MAX_WORKERS"


class TargetDensity:
    """A pointwise-evaluable unnormalized density on R^dim.

    Subclasses set ``dim`` and implement ``log_density`` (may return -inf
    where the density vanishes). ``log_density_batch`` has a generic
    row-by-row fallback; vectorized targets should override it.
    """

    dim: int

    def log_density(self, theta):
        raise NotImplementedError

    def log_density_batch(self, points):
        pts = np.asarray(points, dtype=float)
        return np.array([self.log_density(p) for p in pts])


@dataclass(frozen=True)
class AffineMap:
    """Per-coordinate affine change of variables theta -> scale*theta + shift.

    Pulling a target back through the map multiplies it by the constant
    Jacobian prod(scale), so the pulled-back target has the same integral
    (and transform energy) as the original while its mass sits wherever the
    quadrature nodes are.
    """

    scale: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        scale = np.asarray(self.scale, dtype=float).reshape(-1).copy()
        shift = np.asarray(self.shift, dtype=float).reshape(-1).copy()
        if scale.size == 0 or scale.size != shift.size:
            raise ValueError("scale and shift must be non-empty and equal length")
        if not np.all(np.isfinite(scale)) or not np.all(scale > 0):
            raise ValueError("scale entries must be finite and > 0")
        if not np.all(np.isfinite(shift)):
            raise ValueError("shift entries must be finite")
        scale.setflags(write=False)
        shift.setflags(write=False)
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "shift", shift)

    @classmethod
    def identity(cls, dim):
        return cls(scale=np.ones(dim), shift=np.zeros(dim))

    @property
    def dim(self):
        return self.scale.size

    @property
    def log_jacobian(self):
        return float(np.sum(np.log(self.scale)))

    def apply(self, points):
        return np.asarray(points, dtype=float) * self.scale + self.shift

    def pull_back(self, target):
        """The target re-expressed in map coordinates, integral preserved."""
        if target.dim != self.dim:
            raise ValueError(
                f"map dimension {self.dim} != target dimension {target.dim}"
            )
        return _PulledBackTarget(target, self)


class _PulledBackTarget(TargetDensity):
    def __init__(self, target, amap):
        self.dim = target.dim
        self._target = target
        self._map = amap

    def log_density(self, theta):
        return self._target.log_density(self._map.apply(theta)) + self._map.log_jacobian

    def log_density_batch(self, points):
        mapped = self._map.apply(points)
        return (
            np.asarray(self._target.log_density_batch(mapped), dtype=float)
            + self._map.log_jacobian
        )


@dataclass
class CoefficientSet:
    """Transform coefficients grouped by total degree.

    ``shells[d]`` maps each multi-index tuple of total degree d to its
    coefficient, in enumeration order; ``shell_energy[d]`` is the sum of
    squared coefficients of that shell. ``quad_order`` is None for sets
    re-read from disk, where the producing rule is unknown.
    """

    dim: int
    quad_order: int | None
    shells: list[dict[tuple[int, ...], float]] = field(default_factory=list)
    shell_energy: list[float] = field(default_factory=list)

    @property
    def max_degree(self):
        return len(self.shells) - 1

    @property
    def total_energy(self):
        return float(sum(self.shell_energy))

    def coefficient(self, tau):
        """Coefficient at the multi-index tau (0.0 if outside every shell)."""
        tau = tuple(int(v) for v in tau)
        if len(tau) != self.dim:
            raise ValueError(f"multi-index must have {self.dim} entries, got {tau}")
        degree = sum(tau)
        if degree >= len(self.shells):
            return 0.0
        return self.shells[degree].get(tau, 0.0)

    def items(self):
        """Yield (tau, coefficient) in shell order, then enumeration order."""
        for shell in self.shells:
            yield from shell.items()


@dataclass(frozen=True)
class RunResult:
    """Outcome of a full transform run, including which stop condition fired."""

    coefficients: CoefficientSet
    evidence: float
    converged: bool
    stop_reason: str
    max_degree_reached: int


def _lifted_weights(rule):
    # 1-D projection weights w_i e^{r_i^2/2}: the Gaussian the lifted target
    # F carries is folded back into the rule instead of the integrand
    return rule.weights * np.exp(0.5 * rule.nodes**2)


def _sqrt_target_values(target, rule, idx):
    """exp(log P / 2) at the raw-node grid points selected by idx."""
    pts = rule.nodes[idx]
    logp = np.asarray(target.log_density_batch(pts), dtype=float)
    if logp.shape != (idx.shape[0],):
        raise ValueError(
            f"log_density_batch returned shape {logp.shape}, expected ({idx.shape[0]},)"
        )
    with np.errstate(over="ignore"):
        vals = np.exp(0.5 * logp)
    finite = np.isfinite(vals)
    if not np.all(finite):
        t = int(np.argmin(finite))
        raise NumericalDomainError(
            f"non-finite integrand at node {tuple(pts[t])}: log density {logp[t]!r}"
        )
    return vals


def _check_table(grid, table, needed_degree):
    if table.max_degree < needed_degree:
        raise ValueError(
            f"table covers degree {table.max_degree}, need {needed_degree}"
        )
    if not np.array_equal(table.points, grid.rule.nodes):
        raise ValueError("table must be built on the rule's raw nodes")


def _check_target(target, grid):
    if target.dim != grid.dim:
        raise ValueError(f"target dimension {target.dim} != grid dimension {grid.dim}")


def coefficient_naive(target, grid, table, tau):
    """Single transform coefficient by direct streaming over the grid.

    Sums w-hat * sqrt(P) * prod h over every grid point in fixed block
    order, where w-hat is the product of lifted 1-D weights. Exact for
    targets whose lifted form is a polynomial of per-axis degree
    <= 2*order - 1.
    """
    tau = tuple(int(v) for v in tau)
    if len(tau) != grid.dim or any(v < 0 for v in tau):
        raise ValueError(f"invalid multi-index {tau} for dimension {grid.dim}")
    _check_target(target, grid)
    _check_table(grid, table, max(tau))
    lifted = _lifted_weights(grid.rule)
    taus = np.asarray([tau], dtype=np.int64)
    acc = 0.0
    for start, stop in grid.block_ranges(BLOCK_SIZE):
        idx = grid.decode(start, stop)
        g = weight_products(idx, lifted) * _sqrt_target_values(target, grid.rule, idx)
        acc += float(shell_partial_sums(idx, g, table.values, taus)[0])
    return acc


def coefficients_contracted(target, grid, table, max_degree):
    """All coefficients with total degree <= max_degree by axis contraction.

    Materializes the sqrt-P value tensor over the grid (order^dim entries)
    and contracts one axis at a time with the (degree, node) projection
    matrix. Agrees with the streaming path to rounding; raises
    CapacityError above TENSOR_VALUE_LIMIT entries, where the streaming
    path must be used instead.
    """
    if max_degree < 0:
        raise ValueError(f"max_degree must be >= 0, got {max_degree}")
    _check_target(target, grid)
    _check_table(grid, table, max_degree)
    total = grid.total_count
    if total > TENSOR_VALUE_LIMIT:
        raise CapacityError(
            f"grid has {total} points, above the {TENSOR_VALUE_LIMIT} tensor cap; "
            "use coefficient_naive / run_opaa (streaming) instead"
        )
    order, dim = grid.rule.order, grid.dim
    flat = np.empty(total)
    for start, stop in grid.block_ranges(BLOCK_SIZE):
        idx = grid.decode(start, stop)
        flat[start:stop] = _sqrt_target_values(target, grid.rule, idx)
    values = flat.reshape((order,) * dim)
    proj = (table.values[: max_degree + 1] * _lifted_weights(grid.rule)).T
    for _ in range(dim):
        # consume the leading axis, append the degree axis at the end; after
        # dim rounds the axes are back in coordinate order
        values = np.tensordot(values, proj, axes=([0], [0]))
    coeffs = CoefficientSet(dim=dim, quad_order=order)
    for d in range(max_degree + 1):
        shell = {}
        for tau in enumerate_shell(dim, d):
            shell[tau] = float(values[tau])
        coeffs.shells.append(shell)
        coeffs.shell_energy.append(
            float(np.dot(list(shell.values()), list(shell.values())))
        )
    return coeffs


def _resolve_workers(workers):
    if workers is None:
        workers = os.cpu_count() or 1
    if not isinstance(workers, (int, np.integer)) or workers < 1:
        raise ValueError(f"workers must be a positive integer, got {workers!r}")
    cap = os.environ.get(WORKER_ENV_VAR)
    if cap:
        workers = min(int(workers), max(1, int(cap)))
    return int(workers)


def run_opaa(
    target,
    quad_order,
    *,
    tol=1e-8,
    max_degree=20,
    precondition=None,
    workers=None,
):
    """Degree-incremental transform of a target density.

    Coefficient shells are computed for total degree d = 0, 1, ... until
    either the shell energy stays at or below ``tol`` times the running
    total energy for two consecutive degrees (odd/even parity can empty
    alternating shells, so one is not enough), or ``max_degree`` is
    reached. The returned result says which condition fired.

    Parameters
    ----------
    target : TargetDensity
        Unnormalized density; evaluated at preconditioned coordinates if a
        map is given.
    quad_order : int
        1-D Gauss-Hermite order, 1..MAX_ORDER.
    tol : float
        Relative shell-energy tolerance, > 0.
    max_degree : int
        Largest total degree to compute, >= 0.
    precondition : AffineMap, optional
        Change of variables applied to the target first; preserves the
        evidence.
    workers : int, optional
        Worker threads for the grid reduction (default: available
        parallelism, capped by the OPAA_MAX_WORKERS environment variable).
        The result is bitwise identical for any worker count.

    Raises
    ------
    DegenerateTargetError
        If every coefficient is numerically zero (no target mass in the
        node range); preconditioning is the usual fix.
    """
    if not (isinstance(tol, (int, float)) and tol > 0):
        raise ValueError(f"tol must be > 0, got {tol!r}")
    if not isinstance(max_degree, (int, np.integer)) or max_degree < 0:
        raise ValueError(f"max_degree must be >= 0, got {max_degree!r}")
    if precondition is not None:
        target = precondition.pull_back(target)
    if target.dim < 1:
        raise ValueError(f"target dimension must be >= 1, got {target.dim}")
    workers = _resolve_workers(workers)
    rule = gauss_hermite(quad_order)
    grid = TensorGrid(rule, target.dim)
    lifted = _lifted_weights(rule)
    ranges = grid.block_ranges(BLOCK_SIZE)
    cache = [None] * len(ranges) if grid.total_count <= TENSOR_VALUE_LIMIT else None

    def block_integrand(block_index, idx):
        if cache is not None and cache[block_index] is not None:
            return cache[block_index]
        g = weight_products(idx, lifted) * _sqrt_target_values(target, rule, idx)
        if cache is not None:
            cache[block_index] = g
        return g

    coeffs = CoefficientSet(dim=grid.dim, quad_order=rule.order)
    table = None
    executor = (
        ThreadPoolExecutor(max_workers=workers)
        if workers > 1 and len(ranges) > 1
        else None
    )
    converged = False
    quiet_shells = 0
    try:
        for d in range(int(max_degree) + 1):
            table = (
                hermite.build_table(d, rule.nodes)
                if table is None
                else hermite.extend_table(table, d)
            )
            taus = enumerate_shell(grid.dim, d)
            tau_array = np.asarray(taus, dtype=np.int64)
            tvals = table.values

            def block_task(item):
                block_index, (start, stop) = item
                idx = grid.decode(start, stop)
                g = block_integrand(block_index, idx)
                return shell_partial_sums(idx, g, tvals, tau_array)

            if executor is None:
                partials = [block_task(item) for item in enumerate(ranges)]
            else:
                partials = list(executor.map(block_task, enumerate(ranges)))
            vec = np.zeros(len(taus))
            for partial in partials:
                vec += partial
            coeffs.shells.append(
                {tau: float(a) for tau, a in zip(taus, vec)}
            )
            coeffs.shell_energy.append(float(np.dot(vec, vec)))
            total = coeffs.total_energy
            if coeffs.shell_energy[-1] <= tol * total:
                quiet_shells += 1
                if quiet_shells == 2:
                    converged = True
                    break
            else:
                quiet_shells = 0
    finally:
        if executor is not None:
            executor.shutdown(wait=False)
    total = coeffs.total_energy
    if total == 0.0:
        raise DegenerateTargetError(
            "transform is numerically zero at every grid node; precondition the "
            "target with an AffineMap so its mass lies in the node range"
        )
    return RunResult(
        coefficients=coeffs,
        evidence=total,
        converged=converged,
        stop_reason="shell_tolerance" if converged else "max_degree",
        max_degree_reached=coeffs.max_degree,
    )


def evidence(coeffs):
    """Estimated integral of the target: the total transform energy."""
    return coeffs.total_energy


@dataclass(frozen=True)
class ApproxDensity:
    """Normalized smooth density reconstructed from a coefficient set.

    Evaluates [sum_tau a_tau prod_k psi_{tau_k}(theta_k)]^2 / total_energy
    through the Hermite-function recurrence, so it stays finite for any
    coordinate magnitude. Calling convention: a 1-D array is one point, a
    2-D array is a batch of row points.
    """

    coefficients: CoefficientSet

    def __call__(self, points):
        cs = self.coefficients
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != cs.dim:
            raise ValueError(f"points must have {cs.dim} columns, got {pts.shape[1]}")
        tables = [
            hermite.psi_table(cs.max_degree, pts[:, k]) for k in range(cs.dim)
        ]
        s = np.zeros(pts.shape[0])
        for tau, a in cs.items():
            if a == 0.0:
                continue
            term = a * tables[0][tau[0]]
            for k in range(1, cs.dim):
                term = term * tables[k][tau[k]]
            s += term
        out = s * s / cs.total_energy
        return float(out[0]) if single else out

    def mass(self, quad_order=None):
        """Integral of the density by a fresh raw-node quadrature.

        With the default order max_degree + 1 the squared reconstruction is
        integrated exactly, so the result is 1 up to rounding; an
        independent normalization check.
        """
        cs = self.coefficients
        order = int(quad_order) if quad_order is not None else cs.max_degree + 1
        if not 1 <= order <= MAX_ORDER:
            raise ValueError(f"quad_order must be in [1, {MAX_ORDER}], got {order}")
        rule = gauss_hermite(order)
        grid = TensorGrid(rule, cs.dim)
        if grid.total_count > 10**7:
            raise CapacityError(
                f"normalization grid has {grid.total_count} points (cap 10^7)"
            )
        table = hermite.build_table(cs.max_degree, rule.nodes)
        acc = 0.0
        for start, stop in grid.block_ranges(BLOCK_SIZE):
            idx = grid.decode(start, stop)
            s = np.zeros(idx.shape[0])
            for tau, a in cs.items():
                if a == 0.0:
                    continue
                term = a * table.values[tau[0], idx[:, 0]]
                for k in range(1, cs.dim):
                    term = term * table.values[tau[k], idx[:, k]]
                s += term
            w = weight_products(idx, rule.weights)
            acc += float(np.dot(w, s * s))
        return acc / cs.total_energy


def build_density(coeffs):
    """Wrap a coefficient set as a normalized evaluable density."""
    if not coeffs.shells:
        raise ValueError("coefficient set is empty")
    if coeffs.total_energy <= 0.0:
        raise ValueError("coefficient set has zero total energy")
    return ApproxDensity(coefficients=coeffs)
