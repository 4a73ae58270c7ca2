"""Space-time field types, singular-set geometry, and radial jet assembly.

Velocity fields are evaluated in batches: positions are float64 arrays of
shape (N, dim) and times arrays of shape (N,).  A VelocityJet bundles the
values with the spatial Jacobian, the per-component Laplacian, and the
time derivative, which is everything the momentum residual needs.

Pressure for the rotational vortex families is multivalued (its angular
part lives on a branch cut), so solutions expose the pressure gradient as
the primary object and the pressure value only away from the cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .expressions import Jet2

__all__ = [
    "FieldError",
    "InadmissiblePointError",
    "SpaceTimePoint",
    "VelocityJet",
    "PressureInfo",
    "MovingPoint",
    "MovingLine",
    "BlowupTime",
    "HalfSpaceBoundary",
    "SingularSetDescriptor",
    "SolutionPair",
    "DEFAULT_EXCLUSION_RADIUS",
    "radial_field_jet",
    "vorticity",
    "pressure_value",
]

DEFAULT_EXCLUSION_RADIUS = 1e-3


class FieldError(ValueError):
    pass


class InadmissiblePointError(FieldError):
    """Point lies on or too close to the singular set of a solution."""


@dataclass(frozen=True)
class SpaceTimePoint:
    """Position (2 or 3 nondimensional coordinates) and time."""

    x: tuple
    t: float

    def __post_init__(self):
        if len(self.x) not in (2, 3):
            raise FieldError("dimension must be 2 or 3")
        if not all(math.isfinite(c) for c in self.x) or not math.isfinite(self.t):
            raise FieldError("coordinates must be finite")

    @property
    def dim(self) -> int:
        return len(self.x)

    def arrays(self):
        """Batch-of-one arrays for the batched evaluators."""
        return np.asarray([self.x], dtype=float), np.asarray([self.t], dtype=float)


@dataclass(frozen=True)
class VelocityJet:
    """Velocity with the derivatives the momentum equation consumes.

    Batched shapes: value (N, d), jacobian (N, d, d) with [n, i, j] equal
    to du_i/dx_j, laplacian (N, d), dt (N, d).
    """

    value: np.ndarray
    jacobian: np.ndarray
    laplacian: np.ndarray
    dt: np.ndarray


@dataclass(frozen=True)
class PressureInfo:
    gradient: np.ndarray
    value: Optional[float] = None
    branch: Optional[str] = None


# ---------------------------------------------------------------------------
# Singular-set primitives
#
# Each primitive reports a nonnegative distance that is exactly zero on its
# own locus, answers whether a point must be excluded at a given radius,
# and knows how it maps under the solution transforms.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MovingPoint:
    """Point singularity travelling at constant velocity: x = pos0 + vel*t."""

    pos0: tuple
    vel: tuple

    def __post_init__(self):
        object.__setattr__(self, "pos0", tuple(float(v) for v in self.pos0))
        object.__setattr__(self, "vel", tuple(float(v) for v in self.vel))

    def distance(self, X: np.ndarray, T: np.ndarray) -> np.ndarray:
        center = np.asarray(self.pos0) + np.outer(T, np.asarray(self.vel))
        return np.linalg.norm(X - center, axis=1)

    def excludes(self, X, T, radius):
        return self.distance(X, T) < radius

    def boosted(self, C):
        return MovingPoint(self.pos0, tuple(v + c for v, c in zip(self.vel, C)))

    def rotated(self, Q):
        return MovingPoint(tuple(Q.T @ np.asarray(self.pos0)), tuple(Q.T @ np.asarray(self.vel)))

    def rescaled(self, lam, tau):
        return MovingPoint(tuple(lam * p for p in self.pos0), tuple(lam * v / tau for v in self.vel))

    def describe(self):
        if all(v == 0.0 for v in self.vel):
            return f"point x = {self.pos0}"
        return f"moving point x = {self.pos0} + {self.vel} t"


@dataclass(frozen=True)
class MovingLine:
    """Line {a.x = b0 + b1*t} with unit normal a; optionally pressure-only."""

    normal: tuple
    b0: float
    b1: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        scale = np.linalg.norm(n)
        if scale == 0.0:
            raise FieldError("line normal must be nonzero")
        object.__setattr__(self, "normal", tuple(float(v) for v in n / scale))
        object.__setattr__(self, "b0", float(self.b0 / scale))
        object.__setattr__(self, "b1", float(self.b1 / scale))

    def distance(self, X, T):
        return np.abs(X @ np.asarray(self.normal) - self.b0 - self.b1 * T)

    def excludes(self, X, T, radius):
        return self.distance(X, T) < radius

    def boosted(self, C):
        return MovingLine(self.normal, self.b0, self.b1 + float(np.dot(self.normal, C)))

    def rotated(self, Q):
        return MovingLine(tuple(Q.T @ np.asarray(self.normal)), self.b0, self.b1)

    def rescaled(self, lam, tau):
        return MovingLine(self.normal, lam * self.b0, lam * self.b1 / tau)

    def describe(self):
        n = tuple(round(v, 12) for v in self.normal)
        if self.b1 == 0.0:
            return f"line {n}.x = {self.b0}"
        return f"moving line {n}.x = {self.b0} + {self.b1} t"


@dataclass(frozen=True)
class BlowupTime:
    """Finite blow-up time t = T; everything at and beyond T is excluded."""

    T: float

    def distance(self, X, T):
        return np.abs(self.T - T)

    def excludes(self, X, T, radius):
        return (self.T - T) < radius

    def boosted(self, C):
        return self

    def rotated(self, Q):
        return self

    def rescaled(self, lam, tau):
        return BlowupTime(tau * self.T)

    def describe(self):
        return f"blow-up time t = {self.T}"


@dataclass(frozen=True)
class HalfSpaceBoundary:
    """Boundary s = 0 of the admissible half-space s >= 0.

    s is the sum of the shifted coordinates, s = sum_i (x_i - x0_i - vel_i t);
    the Euclidean distance to the plane is s / sqrt(dim).  Points with s < 0
    are outside the domain and always excluded.
    """

    x0: tuple
    vel: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        object.__setattr__(self, "vel", tuple(float(v) for v in self.vel))

    def _s(self, X, T):
        shift = np.asarray(self.x0) + np.outer(T, np.asarray(self.vel))
        return np.sum(X - shift, axis=1)

    def distance(self, X, T):
        return np.abs(self._s(X, T)) / math.sqrt(len(self.x0))

    def excludes(self, X, T, radius):
        return self._s(X, T) / math.sqrt(len(self.x0)) < radius

    def boosted(self, C):
        return HalfSpaceBoundary(self.x0, tuple(v + c for v, c in zip(self.vel, C)))

    def rotated(self, Q):
        raise FieldError("rotation is only defined for 2D solutions")

    def rescaled(self, lam, tau):
        return HalfSpaceBoundary(tuple(lam * p for p in self.x0), tuple(lam * v / tau for v in self.vel))

    def describe(self):
        return f"half-space boundary s = 0 about x0 = {self.x0}"


@dataclass(frozen=True)
class SingularSetDescriptor:
    """Machine-checkable locus where a solution is not smooth.

    ``primitives`` restrict where the field may be evaluated; ``pressure_cut``
    primitives only restrict where the (multivalued) pressure value may be
    reported and do not affect field admissibility.
    """

    primitives: tuple = ()
    pressure_cut: tuple = ()

    def clearance(self, X: np.ndarray, T: np.ndarray) -> np.ndarray:
        """Distance to the nearest hard primitive (inf when there is none)."""
        if not self.primitives:
            return np.full(len(X), np.inf)
        return np.min([p.distance(X, T) for p in self.primitives], axis=0)

    def admissible(self, X, T, radius) -> np.ndarray:
        ok = np.ones(len(X), dtype=bool)
        for p in self.primitives:
            ok &= ~p.excludes(X, T, radius)
        return ok

    def blowup_time(self) -> Optional[float]:
        times = [p.T for p in self.primitives if isinstance(p, BlowupTime)]
        return min(times) if times else None

    def boosted(self, C):
        return SingularSetDescriptor(
            tuple(p.boosted(C) for p in self.primitives),
            tuple(p.boosted(C) for p in self.pressure_cut),
        )

    def rotated(self, Q):
        return SingularSetDescriptor(
            tuple(p.rotated(Q) for p in self.primitives),
            tuple(p.rotated(Q) for p in self.pressure_cut),
        )

    def rescaled(self, lam, tau):
        return SingularSetDescriptor(
            tuple(p.rescaled(lam, tau) for p in self.primitives),
            tuple(p.rescaled(lam, tau) for p in self.pressure_cut),
        )

    def describe(self) -> str:
        if not self.primitives and not self.pressure_cut:
            return "none (globally smooth)"
        parts = [p.describe() for p in self.primitives]
        parts += [p.describe() + " (pressure value only)" for p in self.pressure_cut]
        return "; ".join(parts)


# ---------------------------------------------------------------------------
# Solution pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolutionPair:
    """An immutable evaluable velocity/pressure pair.

    All evaluators are pure and take batched arrays (X of shape (N, dim),
    T of shape (N,)); they are total on the admissible region (clearance of
    at least ``exclusion_radius`` from every hard singular primitive).
    ``viscosity`` is exactly 0.0 for inviscid entries.
    """

    dimension: int
    viscosity: float
    velocity: Callable  # (X, T) -> (N, dim) values
    velocity_jet: Callable  # (X, T) -> VelocityJet
    pressure_gradient: Callable  # (X, T) -> (N, dim)
    singular: SingularSetDescriptor
    pressure_value: Optional[Callable] = None  # (X, T) -> (N,)
    pressure_cut_clearance: Optional[Callable] = None  # (X, T) -> (N,)
    exclusion_radius: float = DEFAULT_EXCLUSION_RADIUS
    metadata: dict = field(default_factory=dict)

    # -- single-point conveniences ------------------------------------------

    def check_admissible(self, point: SpaceTimePoint):
        if point.dim != self.dimension:
            raise FieldError(f"point dimension {point.dim} != solution dimension {self.dimension}")
        X, T = point.arrays()
        if not bool(self.singular.admissible(X, T, self.exclusion_radius)[0]):
            raise InadmissiblePointError(
                f"point {point.x} at t={point.t} is within {self.exclusion_radius} of the singular set"
            )

    def velocity_at(self, point: SpaceTimePoint) -> np.ndarray:
        self.check_admissible(point)
        X, T = point.arrays()
        return self.velocity(X, T)[0]

    def velocity_jet_at(self, point: SpaceTimePoint) -> VelocityJet:
        self.check_admissible(point)
        X, T = point.arrays()
        jet = self.velocity_jet(X, T)
        return VelocityJet(jet.value[0], jet.jacobian[0], jet.laplacian[0], jet.dt[0])

    def pressure_gradient_at(self, point: SpaceTimePoint) -> np.ndarray:
        self.check_admissible(point)
        X, T = point.arrays()
        return self.pressure_gradient(X, T)[0]

    @property
    def name(self) -> str:
        return self.metadata.get("name", self.metadata.get("family", "solution"))

    def describe(self) -> str:
        chain = self.metadata.get("transform_chain", [])
        suffix = f" ({len(chain)} transform(s))" if chain else ""
        return f"{self.name}: dim={self.dimension}, sigma={self.viscosity}{suffix}"


def with_metadata(sol: SolutionPair, **entries) -> SolutionPair:
    md = dict(sol.metadata)
    md.update(entries)
    return replace(sol, metadata=md)


# ---------------------------------------------------------------------------
# Radial rotational pattern
#
# Fields of the form u = (phi(r) x2, -phi(r) x1) around a center.  The
# chain-rule identities used here:
#     d1(phi x2) = phi' x1 x2 / r          d2(phi x2) = phi + phi' x2^2 / r
#     lap(phi x2) = x2 (phi'' + 3 phi'/r)
# and the mirrored forms for -phi x1.  The finite-difference cross-check in
# the verification module is the authority for these identities.
# ---------------------------------------------------------------------------


def radial_field_jet(phi: Jet2, Y: np.ndarray, r: np.ndarray):
    """Assemble value/jacobian/laplacian of u = (phi(r) y2, -phi(r) y1).

    ``phi`` is the profile jet in r evaluated at ``r = |Y|`` (batched).
    Returns (value (N,2), jacobian (N,2,2), laplacian (N,2)).  The Jacobian
    trace vanishes exactly because the two diagonal entries are the same
    computed product with opposite signs.
    """
    y1, y2 = Y[:, 0], Y[:, 1]
    n = len(r)
    q = phi.d1 / r
    off = q * y1 * y2
    jac = np.empty((n, 2, 2))
    jac[:, 0, 0] = off
    jac[:, 0, 1] = phi.value + q * y2 * y2
    jac[:, 1, 0] = -(phi.value + q * y1 * y1)
    jac[:, 1, 1] = -off
    lapfac = phi.d2 + 3.0 * phi.d1 / r
    value = np.stack([phi.value * y2, -phi.value * y1], axis=1)
    lap = np.stack([lapfac * y2, -lapfac * y1], axis=1)
    return value, jac, lap


def vorticity(sol: SolutionPair, point: SpaceTimePoint) -> float:
    """Scalar vorticity du2/dx1 - du1/dx2 of a 2D solution."""
    if sol.dimension != 2:
        raise FieldError("vorticity is defined for 2D solutions only")
    jet = sol.velocity_jet_at(point)
    return float(jet.jacobian[1, 0] - jet.jacobian[0, 1])


def vorticity_batch(sol: SolutionPair, X: np.ndarray, T: np.ndarray) -> np.ndarray:
    if sol.dimension != 2:
        raise FieldError("vorticity is defined for 2D solutions only")
    jet = sol.velocity_jet(X, T)
    return jet.jacobian[:, 1, 0] - jet.jacobian[:, 0, 1]


def pressure_value(sol: SolutionPair, point: SpaceTimePoint) -> PressureInfo:
    """Pressure gradient plus, where defined, a branch-consistent value."""
    sol.check_admissible(point)
    X, T = point.arrays()
    grad = sol.pressure_gradient(X, T)[0]
    if sol.pressure_value is None:
        return PressureInfo(gradient=grad)
    if sol.pressure_cut_clearance is not None:
        if float(sol.pressure_cut_clearance(X, T)[0]) <= 0.0:
            raise InadmissiblePointError("pressure value is not defined on its branch cut")
    val = float(sol.pressure_value(X, T)[0])
    return PressureInfo(gradient=grad, value=val, branch=sol.metadata.get("pressure_branch"))

