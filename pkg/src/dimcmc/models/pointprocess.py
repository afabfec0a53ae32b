"""Attraction-repulsion point process on a disc.

The interaction function phi(D) is zero inside the hard core, a downward
parabola peaking at (theta2, theta1) on the middle branch, and a tail
decaying to one. Point patterns live in a disc; densities include an
intensity term lambda^n and a per-point cap on the summed log interactions.

theta3 (the tail descent rate) is held fixed by the model; the free
parameter vector is (lambda, theta1, theta2).
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from .base import UniformBox, as_theta


@dataclass(frozen=True)
class InteractionParams:
    """Fixed geometry of the interaction function."""

    R: float
    D1: float
    D2: float
    log_cap: float = 1.2

    def __post_init__(self):
        if not (0.0 <= self.R < self.D1):
            raise ValueError("require 0 <= R < D1")
        if not (self.D2 < self.D1):
            raise ValueError("require D2 < D1")
        if not np.isfinite(self.log_cap):
            raise ValueError("log cap must be finite")

    def valid_for(self, theta2: float) -> bool:
        """Junction ordering R < theta2 < D1 required of any parameter point."""
        return self.R < theta2 < self.D1


def derive_interaction(theta1, theta2, theta3, R, log_cap=1.2, d1_frac=0.5):
    """Junction constants making phi continuous at D1.

    D1 sits a fraction of the way down the descending parabola branch
    (d1_frac = 0.5 is its midpoint); D2 is solved so the tail meets the
    parabola at D1. Requires the parabola to still exceed 1 there,
    i.e. theta1 * (1 - d1_frac**2) > 1.
    """
    if not (0.0 <= R < theta2):
        raise ValueError("require 0 <= R < theta2")
    if not (0.0 < d1_frac < 1.0):
        raise ValueError("d1_frac must lie in (0, 1)")
    d1 = theta2 + d1_frac * (theta2 - R)
    phi_mid = theta1 * (1.0 - d1_frac**2)
    if phi_mid <= 1.0:
        raise ValueError(
            f"parabola value {phi_mid:.4f} at D1 is <= 1; no continuous tail exists "
            f"(need theta1 > {1.0 / (1.0 - d1_frac**2):.4f})"
        )
    d2 = d1 - 1.0 / (theta3 * np.sqrt(phi_mid - 1.0))
    return InteractionParams(R=float(R), D1=float(d1), D2=float(d2), log_cap=float(log_cap))


def interaction_phi(D, theta, params: InteractionParams):
    """Piecewise interaction value at distance(s) D.

    theta is the full 4-vector (lambda, theta1, theta2, theta3); lambda is
    unused here. The middle branch is floored at zero (inside-hard-core
    behavior) where the parabola goes negative.
    """
    theta = as_theta(theta, 4)
    _, t1, t2, t3 = theta
    D = np.asarray(D, dtype=np.float64)
    if np.any(D < 0):
        raise ValueError("distances must be nonnegative")
    tail = D > params.D1
    if np.any(tail & (D <= params.D2)):
        raise ValueError("tail branch evaluated at D <= D2")
    mid = t1 - (np.sqrt(t1) / (t2 - params.R) * (D - t2)) ** 2
    with np.errstate(divide="ignore"):
        tail_val = 1.0 + 1.0 / (t3 * (D - params.D2)) ** 2
    out = np.where(D <= params.R, 0.0, np.where(tail, tail_val, np.maximum(mid, 0.0)))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PointPattern:
    """Points in a disc; coordinates in pixels."""

    points: np.ndarray
    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        d = np.hypot(pts[:, 0] - self.center[0], pts[:, 1] - self.center[1])
        if np.any(d > self.radius * (1 + 1e-12)):
            raise ValueError("all points must lie inside the domain disc")

    @property
    def n(self) -> int:
        return self.points.shape[0]


def write_pattern_csv(pattern: PointPattern, path):
    with open(path, "w") as f:
        f.write(f"# disc {pattern.center[0]!r} {pattern.center[1]!r} {pattern.radius!r}\n")
        f.write("x,y\n")
        for x, y in pattern.points:
            f.write(f"{x!r},{y!r}\n")


def read_pattern_csv(path) -> PointPattern:
    if isinstance(path, io.StringIO):
        lines = path.getvalue().splitlines()
    else:
        with open(path) as f:
            lines = f.read().splitlines()
    header = lines[0].split()
    if len(header) != 5 or header[0] != "#" or header[1] != "disc":
        raise ValueError("pattern file must start with '# disc cx cy radius'")
    cx, cy, radius = (float(v) for v in header[2:])
    pts = [tuple(float(v) for v in ln.split(",")) for ln in lines[2:] if ln.strip()]
    return PointPattern(np.array(pts, dtype=np.float64).reshape(-1, 2), (cx, cy), radius)


@dataclass(frozen=True)
class PointProcessModel:
    center: tuple
    radius: float
    params: InteractionParams
    theta3: float
    prior: UniformBox = field(
        default_factory=lambda: UniformBox(
            np.array([1e-4, 0.5, 10.0]), np.array([8e-4, 2.0, 17.5])
        )
    )

    kind = "pointprocess"
    is_expfam = False

    @property
    def param_dim(self) -> int:
        return 3

    def full_theta(self, theta) -> np.ndarray:
        """(lambda, theta1, theta2, theta3) with the fixed tail rate appended."""
        theta = as_theta(theta, 3)
        return np.array([theta[0], theta[1], theta[2], self.theta3])

    def in_support(self, theta) -> bool:
        theta = as_theta(theta, 3)
        if not self.prior.contains(theta):
            return False
        lam, t1, t2 = theta
        return lam > 0.0 and t1 > 0.0 and self.params.valid_for(t2)

    def validate_state(self, state) -> PointPattern:
        if not isinstance(state, PointPattern):
            state = PointPattern(np.asarray(state), self.center, self.radius)
        if state.radius != self.radius or tuple(state.center) != tuple(self.center):
            raise ValueError("pattern domain does not match the model domain")
        return state

    def coerce(self, state) -> PointPattern:
        """Patterns self-validate at construction; pass them through."""
        if isinstance(state, PointPattern):
            return state
        return self.validate_state(state)

    def _stat(self, state):
        return self.stored_stat(state)

    def log_h(self, state, theta) -> float:
        state = self.validate_state(state)
        ft = self.full_theta(theta)
        p = self.params
        return float(
            _kernels.pp_log_h(
                np.ascontiguousarray(state.points[:, 0]),
                np.ascontiguousarray(state.points[:, 1]),
                state.n, ft[0], ft[1], ft[2], ft[3], p.R, p.D1, p.D2, p.log_cap,
            )
        )

    def stored_stat(self, state):
        """Pairwise distance matrix plus count: enough to re-evaluate h at any theta."""
        state = self.validate_state(state)
        pts = state.points
        diff = pts[:, None, :] - pts[None, :, :]
        return (np.sqrt((diff**2).sum(axis=2)), state.n)

    def log_h_stat(self, stat, theta) -> float:
        dmat, n = stat
        ft = self.full_theta(theta)
        if n == 0:
            return 0.0
        with np.errstate(divide="ignore"):
            lp = np.log(interaction_phi(dmat[~np.eye(n, dtype=bool)], ft, self.params))
        sums = lp.reshape(n, n - 1).sum(axis=1)
        return float(n * np.log(ft[0]) + np.minimum(sums, self.params.log_cap).sum())

    @property
    def n_sites_or_dyads(self) -> int:
        raise AttributeError("point patterns have no fixed site count")

    def area(self) -> float:
        return float(np.pi * self.radius**2)
