"""Finite-particle drift fields and the discrete-time min-max Langevin update.

The state is a pair of particle clouds ``x^1..x^N`` and ``y^1..y^N`` in R^d.
Each step moves every particle along the empirical-mean gradient field

    b_X[i] = -(1/N) sum_j grad_x V(x^i, y^j)
    b_Y[i] = +(1/N) sum_j grad_y V(x^j, y^i)

and adds ``sqrt(2 * tau * eta)``-scaled Gaussian noise drawn from streams
keyed by (role, particle, step), so trajectories are reproducible and
independent of evaluation order and of the total particle count.

The pairwise gradient tensor is evaluated in fixed-size blocks of the
opponent index ``j`` (ascending), with numpy's deterministic reduction inside
each block; the summation order is therefore fixed across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deterministic import JointPoint
from .payoff import PayoffSpec
from .rng import KeyedNoise

__all__ = [
    "ParticleState",
    "AlgorithmParams",
    "DivergenceError",
    "drift_particles",
    "joint_drift",
    "step_algorithm",
    "run_algorithm",
    "coupled_contraction_run",
    "one_step_map",
    "contraction_factor",
    "replicate_point",
    "save_snapshot",
    "load_snapshot",
]

# Opponent-index block width for the pairwise drift evaluation.  Fixed so
# that the floating-point summation order never depends on the environment.
_DRIFT_CHUNK = 512


class DivergenceError(RuntimeError):
    """A particle trajectory produced nonfinite coordinates."""

    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True)
class ParticleState:
    """Particle clouds ``xs``, ``ys`` of shape (N, d) plus a step counter."""

    xs: np.ndarray
    ys: np.ndarray
    step: int = 0

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 2 or xs.shape != ys.shape:
            raise ValueError(
                f"xs and ys must share shape (N, d), got {xs.shape} and {ys.shape}"
            )
        if self.step < 0:
            raise ValueError("step must be nonnegative")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n_particles(self) -> int:
        return self.xs.shape[0]

    @property
    def dim(self) -> int:
        return self.xs.shape[1]

    def joint_vector(self) -> np.ndarray:
        """Flattened z = (x^1..x^N, y^1..y^N) in R^{2dN}."""
        return np.concatenate([self.xs.ravel(), self.ys.ravel()])

    @classmethod
    def from_joint_vector(cls, z, n: int, d: int, step: int = 0) -> "ParticleState":
        z = np.asarray(z, dtype=float)
        if z.size != 2 * n * d:
            raise ValueError(f"joint vector must have length {2 * n * d}")
        return cls(xs=z[: n * d].reshape(n, d), ys=z[n * d :].reshape(n, d), step=step)

    def pairs(self) -> np.ndarray:
        """Per-particle joint samples (x^i, y^i) as an (N, 2d) matrix."""
        return np.hstack([self.xs, self.ys])


def replicate_point(z: JointPoint, n: int, step: int = 0) -> ParticleState:
    """All n particles sitting at the joint point z."""
    return ParticleState(
        xs=np.tile(z.x, (n, 1)), ys=np.tile(z.y, (n, 1)), step=step
    )


@dataclass(frozen=True)
class AlgorithmParams:
    """Step size, temperature, particle count and horizon for one run.

    ``tau = 0`` is allowed as a deterministic test mode (it reduces the
    update to min-max gradient descent on every particle).  ``strict_eta``
    additionally enforces the bias-guarantee regime eta <= alpha/(64 L^2);
    the second-moment stability bound eta < alpha/(2 L^2) is always required.
    """

    eta: float
    tau: float
    n_particles: int
    steps: int
    strict_eta: bool = False

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if self.tau < 0.0:
            raise ValueError("tau must be nonnegative")
        if self.n_particles < 1:
            raise ValueError("n_particles must be at least 1")
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")

    def validate_for(self, spec: PayoffSpec) -> None:
        c = spec.constants()
        stability = c.alpha / (2.0 * c.smooth_L**2)
        if not self.eta < stability:
            raise ValueError(
                f"eta={self.eta} violates the stability regime "
                f"eta < alpha/(2 L^2) = {stability}"
            )
        if self.strict_eta:
            strict = c.alpha / (64.0 * c.smooth_L**2)
            if self.eta > strict:
                raise ValueError(
                    f"eta={self.eta} violates the strict bias regime "
                    f"eta <= alpha/(64 L^2) = {strict}"
                )


def drift_particles(spec: PayoffSpec, state: ParticleState):
    """Empirical-mean drift fields (b_X, b_Y), each of shape (N, d)."""
    xs, ys = state.xs, state.ys
    if state.dim != spec.dim:
        raise ValueError(f"state dimension {state.dim} != payoff dimension {spec.dim}")
    n = state.n_particles
    sum_gx = np.zeros_like(xs)
    sum_gy = np.zeros_like(ys)
    for start in range(0, n, _DRIFT_CHUNK):
        stop = min(start + _DRIFT_CHUNK, n)
        # axis 0 indexes the particle being moved, axis 1 the opponent j
        sum_gx += np.add.reduce(
            spec.grad_x(xs[:, None, :], ys[None, start:stop, :]), axis=1
        )
        sum_gy += np.add.reduce(
            spec.grad_y(xs[None, start:stop, :], ys[:, None, :]), axis=1
        )
    return -sum_gx / n, sum_gy / n


def joint_drift(spec: PayoffSpec, state: ParticleState) -> np.ndarray:
    """The stacked vector field b_Z(z) in R^{2dN}."""
    b_x, b_y = drift_particles(spec, state)
    return np.concatenate([b_x.ravel(), b_y.ravel()])


def batched_joint_drift(spec: PayoffSpec, zs: np.ndarray, n: int, d: int) -> np.ndarray:
    """b_Z evaluated on a batch of joint vectors, shape (B, 2*n*d).

    Used by the property probes; mathematically identical to mapping
    :func:`joint_drift` over the rows, but one broadcast evaluation.
    """
    zs = np.asarray(zs, dtype=float)
    if zs.ndim != 2 or zs.shape[1] != 2 * n * d:
        raise ValueError(f"batch must have shape (B, {2 * n * d})")
    batch = zs.shape[0]
    xs = zs[:, : n * d].reshape(batch, n, d)
    ys = zs[:, n * d :].reshape(batch, n, d)
    gx = np.add.reduce(spec.grad_x(xs[:, :, None, :], ys[:, None, :, :]), axis=2)
    gy = np.add.reduce(spec.grad_y(xs[:, None, :, :], ys[:, :, None, :]), axis=2)
    return np.concatenate(
        [(-gx / n).reshape(batch, n * d), (gy / n).reshape(batch, n * d)], axis=1
    )


def one_step_map(spec: PayoffSpec, state: ParticleState, eta: float) -> ParticleState:
    """The deterministic part G(z) = z + eta * b_Z(z) of one update."""
    b_x, b_y = drift_particles(spec, state)
    return ParticleState(
        xs=state.xs + eta * b_x, ys=state.ys + eta * b_y, step=state.step
    )


def contraction_factor(alpha: float, smooth_l: float, eta: float) -> float:
    """Certified Lipschitz constant M = sqrt(1 - 2 eta alpha + 4 eta^2 L^2).

    Valid (and in [0, 1]) for eta <= alpha / (2 L^2).
    """
    m_sq = 1.0 - 2.0 * eta * alpha + 4.0 * eta**2 * smooth_l**2
    return float(np.sqrt(max(m_sq, 0.0)))


def step_algorithm(
    spec: PayoffSpec,
    state: ParticleState,
    params: AlgorithmParams,
    noise: KeyedNoise,
) -> ParticleState:
    """One discrete update x += eta*b_X + sqrt(2 tau eta)*zeta (same for y).

    Noise for particle i is drawn from the stream keyed by
    ``(role, i, state.step)``; with tau = 0 no streams are consumed.
    """
    params.validate_for(spec)
    n, d = state.n_particles, state.dim
    b_x, b_y = drift_particles(spec, state)
    if not (np.isfinite(b_x).all() and np.isfinite(b_y).all()):
        raise DivergenceError(state.step, "drift is nonfinite")
    xs = state.xs + params.eta * b_x
    ys = state.ys + params.eta * b_y
    if params.tau > 0.0:
        scale = np.sqrt(2.0 * params.tau * params.eta)
        xs = xs + scale * noise.block("x", n, state.step, d)
        ys = ys + scale * noise.block("y", n, state.step, d)
    if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
        raise DivergenceError(state.step, "state overflowed to nonfinite values")
    return ParticleState(xs=xs, ys=ys, step=state.step + 1)


def _checkpoint_steps(steps: int, every: int):
    marks = set(range(0, steps + 1, every))
    marks.add(steps)
    return marks


def run_algorithm(
    spec: PayoffSpec,
    init: ParticleState,
    params: AlgorithmParams,
    seed: int,
    checkpoint_every: int,
    on_checkpoint=None,
):
    """Iterate the particle update, recording checkpoints.

    Checkpoints land on step 0, every ``checkpoint_every`` steps, and the
    final step.  Each checkpoint entry is ``(step, payload)`` where payload
    is the state snapshot, or whatever ``on_checkpoint(step, state)`` returns
    when a callback is supplied (useful to record metrics without holding
    snapshots for long runs).

    Returns ``(checkpoints, final_state)``.
    """
    if checkpoint_every < 1:
        raise ValueError("checkpoint_every must be at least 1")
    params.validate_for(spec)
    if init.n_particles != params.n_particles:
        raise ValueError(
            f"init has {init.n_particles} particles, params say {params.n_particles}"
        )
    noise = KeyedNoise(seed)
    marks = _checkpoint_steps(params.steps, checkpoint_every)
    record = (lambda k, s: s) if on_checkpoint is None else on_checkpoint
    state = init
    checkpoints = []
    if 0 in marks:
        checkpoints.append((0, record(0, state)))
    for _ in range(params.steps):
        state = step_algorithm(spec, state, params, noise)
        if state.step in marks:
            checkpoints.append((state.step, record(state.step, state)))
    return checkpoints, state


def save_snapshot(path, state: ParticleState) -> None:
    """CSV snapshot: header line ``N,d,step`` then xs rows then ys rows."""
    n, d = state.n_particles, state.dim
    rows = np.vstack([state.xs, state.ys])
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{n},{d},{state.step}\n")
        for row in rows:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def load_snapshot(path) -> ParticleState:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        if len(header) != 3:
            raise ValueError(f"{path}: malformed snapshot header")
        n, d, step = (int(v) for v in header)
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (2 * n, d):
        raise ValueError(
            f"{path}: expected {2 * n} rows of {d} values, got {data.shape}"
        )
    return ParticleState(xs=data[:n], ys=data[n:], step=step)


def coupled_contraction_run(
    spec: PayoffSpec,
    init_a: ParticleState,
    init_b: ParticleState,
    params: AlgorithmParams,
    seed: int,
):
    """Advance two systems with identical noise; return squared distances.

    The returned list holds ``|z_k^A - z_k^B|^2`` for k = 0..steps.  With
    synchronous noise the difference evolves through the deterministic map
    G alone, so each ratio is certified to stay below M^2 (the caller checks;
    this function only produces the trajectory).
    """
    if init_a.xs.shape != init_b.xs.shape:
        raise ValueError("coupled inits must have identical shapes")
    c = spec.constants()
    if not params.eta < c.alpha / (2.0 * c.smooth_L**2):
        raise ValueError(
            "contraction is not certified: require eta < alpha / (2 L^2)"
        )
    params.validate_for(spec)
    n, d = init_a.n_particles, init_a.dim
    noise = KeyedNoise(seed)
    scale = np.sqrt(2.0 * params.tau * params.eta)
    state_a, state_b = init_a, init_b
    distances = [float(np.sum((state_a.joint_vector() - state_b.joint_vector()) ** 2))]
    for _ in range(params.steps):
        step = state_a.step
        zeta_x = noise.block("x", n, step, d) if params.tau > 0.0 else None
        zeta_y = noise.block("y", n, step, d) if params.tau > 0.0 else None
        new = []
        for state in (state_a, state_b):
            b_x, b_y = drift_particles(spec, state)
            if not (np.isfinite(b_x).all() and np.isfinite(b_y).all()):
                raise DivergenceError(step, "drift is nonfinite in coupled run")
            xs = state.xs + params.eta * b_x
            ys = state.ys + params.eta * b_y
            if zeta_x is not None:
                xs = xs + scale * zeta_x
                ys = ys + scale * zeta_y
            new.append(ParticleState(xs=xs, ys=ys, step=step + 1))
        state_a, state_b = new
        distances.append(
            float(np.sum((state_a.joint_vector() - state_b.joint_vector()) ** 2))
        )
    return distances
