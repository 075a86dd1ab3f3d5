"""Built-in target densities: isotropic Gaussian, planted transforms, GMM joints.

Every model implements the :class:`~opaa.core.TargetDensity` interface with a
vectorized ``log_density_batch``. ``from_config`` builds any of them from the
JSON model-config mapping the CLI reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import hermite
from .core import TargetDensity

__all__ = [
    "GaussianIdentity",
    "GmmJointDensity",
    "GmmModel",
    "PlantedDensity",
    "REFERENCE_MEANS",
    "from_config",
    "gmm_log_joint",
    "gmm_sample_dataset",
    "load_config",
    "planted_log_density",
]

# three-cluster demo means, kept as a fixed regression input for the sampler
# and joint-density tests; nothing quantitative is asserted about runs on it
REFERENCE_MEANS = (-18.61, 3.81, 8.84)

_LOG_2PI = float(np.log(2.0 * np.pi))


class GaussianIdentity(TargetDensity):
    """P(theta) = pi^{-dim/2} e^{-|theta|^2}: the basis ground state squared.

    Its transform has a single nonzero coefficient a_0 = 1, which makes it
    the canonical smoke target.
    """

    def __init__(self, dim):
        if not isinstance(dim, (int, np.integer)) or dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim!r}")
        self.dim = int(dim)

    def log_density(self, theta):
        theta = np.asarray(theta, dtype=float)
        return float(-0.5 * self.dim * np.log(np.pi) - np.dot(theta, theta))

    def log_density_batch(self, points):
        pts = np.asarray(points, dtype=float)
        return -0.5 * self.dim * np.log(np.pi) - np.sum(pts**2, axis=1)


class PlantedDensity(TargetDensity):
    """P(theta) = q(theta)^2 * prod_j e^{-theta_j^2} for a known combination q.

    ``coeffs`` maps multi-index tuples to the coefficients c_tau of
    q = sum c_tau prod_k h_{tau_k}. The transform of P recovers exactly
    these coefficients provided q > 0 at every quadrature node, and the
    total energy equals sum c_tau^2 regardless of sign. Evaluation goes
    through Hermite functions, so the Gaussian envelope is applied before
    anything can overflow:  sqrt(P) = |sum c_tau prod psi_{tau_k}|.
    """

    def __init__(self, dim, coeffs):
        if not isinstance(dim, (int, np.integer)) or dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim!r}")
        self.dim = int(dim)
        cleaned = {}
        for tau, c in coeffs.items():
            tau = tuple(int(v) for v in tau)
            if len(tau) != self.dim or any(v < 0 for v in tau):
                raise ValueError(f"invalid multi-index {tau} for dimension {dim}")
            cleaned[tau] = float(c)
        if not cleaned:
            raise ValueError("coeffs must be non-empty")
        self.coeffs = cleaned
        self.max_degree = max(max(tau) for tau in cleaned)

    def bracket(self, points):
        """sum c_tau prod_k psi_{tau_k} at each row point: sign(q) times sqrt(P)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        tables = [
            hermite.psi_table(self.max_degree, pts[:, k]) for k in range(self.dim)
        ]
        s = np.zeros(pts.shape[0])
        for tau, c in self.coeffs.items():
            term = c * tables[0][tau[0]]
            for k in range(1, self.dim):
                term = term * tables[k][tau[k]]
            s += term
        return s

    def log_density(self, theta):
        return float(self.log_density_batch(np.atleast_2d(theta))[0])

    def log_density_batch(self, points):
        s = self.bracket(points)
        with np.errstate(divide="ignore"):
            return 2.0 * np.log(np.abs(s))

    def bracket_minimum(self, half_range, points_per_axis=None):
        """Minimum of the bracket over a dense symmetric grid [-h, h]^dim.

        A positive result certifies q > 0 on the box. Defaults to 10^4
        points per axis in one dimension and 512 per axis above (a full
        10^4-per-axis sweep in 2-D is 10^8 evaluations for a sanity check).
        """
        if points_per_axis is None:
            points_per_axis = 10_000 if self.dim == 1 else 512
        axis = np.linspace(-half_range, half_range, int(points_per_axis))
        if self.dim == 1:
            return float(np.min(self.bracket(axis[:, None])))
        grids = np.meshgrid(*([axis] * self.dim), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        return float(np.min(self.bracket(pts)))


def planted_log_density(planted, theta):
    """log P(theta) = 2 log|q(theta)| - |theta|^2 for a planted target."""
    return planted.log_density(theta)


@dataclass(frozen=True)
class GmmModel:
    """Gaussian mixture study: cluster means under a zero-centered normal
    prior, observations drawn from an equal-weight mixture around them.

    ``observations`` may be empty, in which case the joint is just the
    prior over the means.
    """

    clusters: int
    prior_sigma: float
    obs_sigma: float
    observations: np.ndarray

    def __post_init__(self):
        if not isinstance(self.clusters, (int, np.integer)) or self.clusters < 1:
            raise ValueError(f"clusters must be a positive integer, got {self.clusters!r}")
        if not self.prior_sigma > 0:
            raise ValueError(f"prior_sigma must be > 0, got {self.prior_sigma!r}")
        if not self.obs_sigma > 0:
            raise ValueError(f"obs_sigma must be > 0, got {self.obs_sigma!r}")
        obs = np.asarray(self.observations, dtype=float).reshape(-1).copy()
        if not np.all(np.isfinite(obs)):
            raise ValueError("observations must be finite")
        obs.setflags(write=False)
        object.__setattr__(self, "clusters", int(self.clusters))
        object.__setattr__(self, "prior_sigma", float(self.prior_sigma))
        object.__setattr__(self, "obs_sigma", float(self.obs_sigma))
        object.__setattr__(self, "observations", obs)


def _gmm_log_joint_batch(model, mus):
    mus = np.atleast_2d(np.asarray(mus, dtype=float))
    if mus.shape[1] != model.clusters:
        raise ValueError(
            f"mean vectors must have {model.clusters} entries, got {mus.shape[1]}"
        )
    sp, so = model.prior_sigma, model.obs_sigma
    out = np.sum(
        -0.5 * (mus / sp) ** 2 - np.log(sp) - 0.5 * _LOG_2PI, axis=1
    )
    log_k = np.log(model.clusters)
    for x in model.observations:
        comp = -0.5 * ((x - mus) / so) ** 2 - np.log(so) - 0.5 * _LOG_2PI
        out += logsumexp(comp, axis=1) - log_k
    return out


def gmm_log_joint(model, mu):
    """Log joint density of means and observations at the mean vector mu.

    Sum of the mean priors plus, per observation, the log of the
    equal-weight mixture likelihood (computed by log-sum-exp, so distant
    means cannot underflow the whole product).
    """
    return float(_gmm_log_joint_batch(model, mu)[0])


class GmmJointDensity(TargetDensity):
    """The GMM joint as a target density over the mean vector."""

    def __init__(self, model):
        self.model = model
        self.dim = model.clusters

    def log_density(self, theta):
        return gmm_log_joint(self.model, theta)

    def log_density_batch(self, points):
        return _gmm_log_joint_batch(self.model, points)


def gmm_sample_dataset(clusters, prior_sigma, obs_sigma, n, seed):
    """Draw means from the prior and n observations from the mixture.

    Deterministic in ``seed``. Returns (means, observations).
    """
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError(f"n must be >= 0, got {n!r}")
    rng = np.random.default_rng(seed)
    means = rng.normal(0.0, prior_sigma, size=int(clusters))
    picks = rng.integers(0, clusters, size=int(n))
    observations = rng.normal(means[picks], obs_sigma)
    # validates the parameters as a side effect
    GmmModel(
        clusters=int(clusters),
        prior_sigma=prior_sigma,
        obs_sigma=obs_sigma,
        observations=observations,
    )
    return means, observations


def load_config(path):
    """Read a model-config JSON file into a dict."""
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def from_config(config):
    """Build a TargetDensity from a model-config mapping.

    Recognized types: ``gaussian_identity`` (dim), ``planted`` (dim, coeffs
    as a list of {"tau": [...], "c": value}), and ``gmm`` (clusters,
    prior_sigma, obs_sigma, observations).
    """
    if not isinstance(config, dict) or "type" not in config:
        raise ValueError("model config must be a mapping with a 'type' key")
    kind = config["type"]
    if kind == "gaussian_identity":
        return GaussianIdentity(dim=_require(config, "dim", int))
    if kind == "planted":
        entries = config.get("coeffs")
        if not isinstance(entries, list) or not entries:
            raise ValueError("planted config needs a non-empty 'coeffs' list")
        coeffs = {}
        for entry in entries:
            if not isinstance(entry, dict) or "tau" not in entry or "c" not in entry:
                raise ValueError(f"planted coeff entries need 'tau' and 'c': {entry!r}")
            coeffs[tuple(entry["tau"])] = float(entry["c"])
        return PlantedDensity(dim=_require(config, "dim", int), coeffs=coeffs)
    if kind == "gmm":
        model = GmmModel(
            clusters=_require(config, "clusters", int),
            prior_sigma=_require(config, "prior_sigma", float),
            obs_sigma=_require(config, "obs_sigma", float),
            observations=config.get("observations", []),
        )
        return GmmJointDensity(model)
    raise ValueError(f"unknown model type {kind!r}")


def _require(config, key, cast):
    if key not in config:
        raise ValueError(f"model config is missing required key {key!r}")
    return cast(config[key])
