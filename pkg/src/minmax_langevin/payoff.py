"""Strongly convex-concave payoff families with analytic gradients.

Two families are provided:

* :class:`QuadraticBilinear` -
  ``V(x, y) = 1/2 x'Ax - 1/2 y'By + x'Cy + u'x + v'y`` with ``A, B`` symmetric
  positive definite.  The Hessian is constant, so the convexity modulus and
  the smoothness constant are exact.
* :class:`PerturbedQuadratic`: the quadratic base plus a separable cosine
  ripple ``amp * sum_i (cos(freq*x_i) - cos(freq*y_i))``.  The ripple keeps
  the payoff four-times continuously differentiable and shifts every Hessian
  eigenvalue by at most ``amp * freq**2``, so certified (not tight) constants
  are available in closed form.

Both families expose elementwise-broadcasting gradients: ``grad_x``/``grad_y``
accept inputs of shape ``(..., d)`` and return the same shape, which is what
the particle drift evaluation relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Constants",
    "QuadraticBilinear",
    "PerturbedQuadratic",
    "PayoffSpec",
    "check_gradient_fd",
]

# Power iteration settings for the Hessian operator norm (fixed so that
# repeated runs give bit-identical constants).
_POWER_TOL = 1e-10
_POWER_MAX_ITERS = 10_000


@dataclass(frozen=True)
class Constants:
    """Certified curvature constants: 0 < alpha <= smooth_L."""

    alpha: float
    smooth_L: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= self.smooth_L):
            raise ValueError(
                f"constants must satisfy 0 < alpha <= smooth_L, "
                f"got alpha={self.alpha}, smooth_L={self.smooth_L}"
            )


def _as_matrix(m, dim: int, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (dim, dim):
        raise ValueError(f"{name} must have shape ({dim}, {dim}), got {m.shape}")
    return m


def _as_vector(v, dim: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (dim,):
        raise ValueError(f"{name} must have shape ({dim},), got {v.shape}")
    return v


def _operator_norm_power(H: np.ndarray) -> float:
    """Operator norm of symmetric ``H`` by power iteration on ``H @ H``.

    Deterministic all-ones start, tolerance ``1e-10``, at most 10000 sweeps.
    """
    n = H.shape[0]
    v = np.ones(n) / np.sqrt(n)
    estimate = 0.0
    for _ in range(_POWER_MAX_ITERS):
        w = H @ (H @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        new_estimate = float(v @ (H @ (H @ v)))
        if abs(new_estimate - estimate) <= _POWER_TOL * max(1.0, new_estimate):
            estimate = new_estimate
            break
        estimate = new_estimate
    return float(np.sqrt(max(estimate, 0.0)))


@dataclass(frozen=True, eq=False)
class QuadraticBilinear:
    """Quadratic-bilinear payoff ``1/2 x'Ax - 1/2 y'By + x'Cy + u'x + v'y``."""

    dim: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    u: np.ndarray = None
    v: np.ndarray = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        object.__setattr__(self, "A", _as_matrix(self.A, self.dim, "A"))
        object.__setattr__(self, "B", _as_matrix(self.B, self.dim, "B"))
        object.__setattr__(self, "C", _as_matrix(self.C, self.dim, "C"))
        u = np.zeros(self.dim) if self.u is None else _as_vector(self.u, self.dim, "u")
        v = np.zeros(self.dim) if self.v is None else _as_vector(self.v, self.dim, "v")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        for name, m in (("A", self.A), ("B", self.B)):
            if not np.allclose(m, m.T, atol=1e-12):
                raise ValueError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(m).min() <= 0.0:
                raise ValueError(f"{name} must be positive definite")
        object.__setattr__(self, "_constants", None)

    def __eq__(self, other):
        if not isinstance(other, QuadraticBilinear):
            return NotImplemented
        return self.dim == other.dim and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("A", "B", "C", "u", "v")
        )

    def _check_point(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape[-1:] != (self.dim,) or y.shape[-1:] != (self.dim,):
            raise ValueError(
                f"x and y must have trailing dimension {self.dim}, "
                f"got {x.shape} and {y.shape}"
            )
        return x, y

    def value(self, x, y):
        """V(x, y); broadcasts over leading axes."""
        x, y = self._check_point(x, y)
        qx = 0.5 * np.sum((x @ self.A) * x, axis=-1)
        qy = 0.5 * np.sum((y @ self.B) * y, axis=-1)
        cross = np.sum(x * (y @ self.C.T), axis=-1)
        return qx - qy + cross + x @ self.u + y @ self.v

    def grad_x(self, x, y):
        """∇_x V = Ax + Cy + u; broadcasts."""
        x, y = self._check_point(x, y)
        return (x @ self.A.T + self.u) + y @ self.C.T

    def grad_y(self, x, y):
        """∇_y V = -By + C'x + v; broadcasts."""
        x, y = self._check_point(x, y)
        return (-(y @ self.B.T) + self.v) + x @ self.C

    def hessian_joint(self) -> np.ndarray:
        """The constant 2d x 2d Hessian [[A, C], [C', -B]]."""
        top = np.hstack([self.A, self.C])
        bottom = np.hstack([self.C.T, -self.B])
        return np.vstack([top, bottom])

    def constants(self) -> Constants:
        if self._constants is None:
            alpha = float(
                min(np.linalg.eigvalsh(self.A).min(), np.linalg.eigvalsh(self.B).min())
            )
            smooth_l = _operator_norm_power(self.hessian_joint())
            object.__setattr__(self, "_constants", Constants(alpha, smooth_l))
        return self._constants


@dataclass(frozen=True, eq=False)
class PerturbedQuadratic:
    """Quadratic base plus ``amp * sum_i (cos(freq*x_i) - cos(freq*y_i))``.

    The cap ``amp * freq**2 <= min(lmin(A), lmin(B)) / 2`` keeps the Hessian
    blocks uniformly definite; ``constants()`` returns the certified bounds
    ``alpha = min lmin - amp*freq**2`` and ``L = |H_base|_op + amp*freq**2``,
    which are conservative rather than tight for amp > 0.
    """

    base: QuadraticBilinear
    amplitude: float
    frequency: float

    def __post_init__(self):
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be nonnegative")
        if self.frequency <= 0.0:
            raise ValueError("frequency must be positive")
        lmin = min(
            np.linalg.eigvalsh(self.base.A).min(),
            np.linalg.eigvalsh(self.base.B).min(),
        )
        if self.amplitude * self.frequency**2 > 0.5 * lmin:
            raise ValueError(
                "amplitude * frequency**2 exceeds half the smallest Hessian "
                "eigenvalue; strong convexity-concavity would be lost"
            )
        object.__setattr__(self, "_constants", None)

    def __eq__(self, other):
        if not isinstance(other, PerturbedQuadratic):
            return NotImplemented
        return (
            self.base == other.base
            and self.amplitude == other.amplitude
            and self.frequency == other.frequency
        )

    @property
    def dim(self) -> int:
        return self.base.dim

    def value(self, x, y):
        x, y = self.base._check_point(x, y)
        f = self.frequency
        ripple = np.sum(np.cos(f * x), axis=-1) - np.sum(np.cos(f * y), axis=-1)
        return self.base.value(x, y) + self.amplitude * ripple

    def grad_x(self, x, y):
        x, y = self.base._check_point(x, y)
        f = self.frequency
        return self.base.grad_x(x, y) - self.amplitude * f * np.sin(f * x)

    def grad_y(self, x, y):
        x, y = self.base._check_point(x, y)
        f = self.frequency
        return self.base.grad_y(x, y) + self.amplitude * f * np.sin(f * y)

    def constants(self) -> Constants:
        if self._constants is None:
            shift = self.amplitude * self.frequency**2
            base = self.base.constants()
            alpha = base.alpha - shift
            if alpha <= 0.0:
                raise ValueError("perturbation wiped out strong convexity")
            object.__setattr__(
                self, "_constants", Constants(alpha, base.smooth_L + shift)
            )
        return self._constants


# Either payoff family; both expose value / grad_x / grad_y / constants / dim.
PayoffSpec = QuadraticBilinear | PerturbedQuadratic


def check_gradient_fd(spec: PayoffSpec, x, y, h: float = 1e-5) -> float:
    """Max deviation of the analytic gradient from central finite differences.

    Deviations are measured per component relative to max(1, |component|),
    so near-zero gradient components are compared absolutely.
    """
    if h <= 0.0:
        raise ValueError("finite-difference step h must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gx = spec.grad_x(x, y)
    gy = spec.grad_y(x, y)
    worst = 0.0
    for k in range(spec.dim):
        e = np.zeros(spec.dim)
        e[k] = h
        fd_x = (spec.value(x + e, y) - spec.value(x - e, y)) / (2.0 * h)
        fd_y = (spec.value(x, y + e) - spec.value(x, y - e)) / (2.0 * h)
        worst = max(
            worst,
            abs(fd_x - gx[k]) / max(1.0, abs(gx[k])),
            abs(fd_y - gy[k]) / max(1.0, abs(gy[k])),
        )
    return float(worst)
