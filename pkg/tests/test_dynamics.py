import numpy as np
import pytest

from minmax_langevin import (
    AlgorithmParams,
    DivergenceError,
    JointPoint,
    KeyedNoise,
    ParticleState,
    QuadraticBilinear,
    contraction_factor,
    coupled_contraction_run,
    drift_particles,
    gd_step,
    joint_drift,
    load_snapshot,
    replicate_point,
    run_algorithm,
    save_snapshot,
    solve_equilibrium,
    step_algorithm,
)
from minmax_langevin.checks import (
    check_second_moment_stability,
    default_specs,
)
from minmax_langevin.dynamics import batched_joint_drift


def scalar_quadratic(c=1.0):
    return QuadraticBilinear(dim=1, A=[[1.0]], B=[[1.0]], C=[[c]])


class InjectedNoise:
    """Fixed per-role noise values for worked examples."""

    def __init__(self, x_value, y_value):
        self.x_value, self.y_value = x_value, y_value

    def block(self, role, n, step, d):
        value = self.x_value if role == "x" else self.y_value
        return np.full((n, d), value, dtype=float)


class TestDrift:
    def test_single_particle_reduction(self):
        q = scalar_quadratic()
        state = ParticleState(xs=np.array([[0.7]]), ys=np.array([[-0.4]]))
        b_x, b_y = drift_particles(q, state)
        assert b_x[0, 0] == -q.grad_x(state.xs[0], state.ys[0])[0]
        assert b_y[0, 0] == q.grad_y(state.xs[0], state.ys[0])[0]

    def test_symmetric_opponents_cancel(self):
        q = scalar_quadratic()
        state = ParticleState(xs=np.zeros((2, 1)), ys=np.array([[1.0], [-1.0]]))
        b_x, _ = drift_particles(q, state)
        np.testing.assert_array_equal(b_x, np.zeros((2, 1)))

    @pytest.mark.parametrize("spec_idx", [0, 1])
    def test_zero_at_equilibrium_configuration(self, spec_idx):
        spec = default_specs(dim=2)[spec_idx]
        z_star, _ = solve_equilibrium(spec, tol=1e-13)
        state = replicate_point(z_star, 8)
        assert np.max(np.abs(joint_drift(spec, state))) <= 1e-11

    def test_batched_matches_sequential(self):
        spec = default_specs(dim=2)[1]
        rng = np.random.default_rng(2)
        zs = rng.normal(size=(6, 2 * 4 * 2))
        batched = batched_joint_drift(spec, zs, 4, 2)
        for row, z in zip(batched, zs):
            state = ParticleState.from_joint_vector(z, 4, 2)
            np.testing.assert_allclose(row, joint_drift(spec, state), atol=1e-14)


class TestStep:
    def test_deterministic_step(self):
        q = scalar_quadratic()
        state = ParticleState(xs=np.array([[1.0]]), ys=np.array([[1.0]]))
        params = AlgorithmParams(eta=0.1, tau=0.0, n_particles=1, steps=1)
        out = step_algorithm(q, state, params, KeyedNoise(0))
        assert out.xs[0, 0] == pytest.approx(0.8)
        assert out.ys[0, 0] == pytest.approx(1.0)
        assert out.step == 1

    def test_injected_noise_update(self):
        # x' = 1 - 0.02*1 + sqrt(2*0.5*0.02)*1 and y' = 0 + 0.02*1
        q = scalar_quadratic()
        state = ParticleState(xs=np.array([[1.0]]), ys=np.array([[0.0]]))
        params = AlgorithmParams(eta=0.02, tau=0.5, n_particles=1, steps=1)
        out = step_algorithm(q, state, params, InjectedNoise(1.0, 0.0))
        assert out.xs[0, 0] == pytest.approx(1.1214213562373095, abs=1e-15)
        assert out.ys[0, 0] == pytest.approx(0.02, abs=1e-18)

    def test_strict_eta_regime_enforced(self):
        q = scalar_quadratic()
        c = q.constants()
        params = AlgorithmParams(
            eta=c.alpha / (32 * c.smooth_L**2), tau=1.0, n_particles=1, steps=1,
            strict_eta=True,
        )
        state = ParticleState(xs=np.zeros((1, 1)), ys=np.zeros((1, 1)))
        with pytest.raises(ValueError, match="strict"):
            step_algorithm(q, state, params, KeyedNoise(0))

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergent_drift_reports_step(self):
        q = scalar_quadratic(c=0.5)
        state = ParticleState(
            xs=np.full((1, 1), 1.5e308), ys=np.full((1, 1), 1.2e308), step=17
        )
        params = AlgorithmParams(eta=0.01, tau=0.0, n_particles=1, steps=1)
        with pytest.raises(DivergenceError) as err:
            step_algorithm(q, state, params, KeyedNoise(0))
        assert err.value.step == 17


class TestRun:
    def test_zero_steps_only_initial_checkpoint(self):
        q = scalar_quadratic()
        init = ParticleState(xs=np.zeros((3, 1)), ys=np.zeros((3, 1)))
        params = AlgorithmParams(eta=0.05, tau=1.0, n_particles=3, steps=0)
        checkpoints, final = run_algorithm(q, init, params, seed=1, checkpoint_every=10)
        assert [k for k, _ in checkpoints] == [0]
        assert final.step == 0

    def test_checkpoint_cadence_counts(self):
        q = scalar_quadratic()
        init = ParticleState(xs=np.zeros((2, 1)), ys=np.zeros((2, 1)))
        for steps, every, expected in [(10, 5, [0, 5, 10]), (7, 3, [0, 3, 6, 7]),
                                       (4, 1, [0, 1, 2, 3, 4])]:
            params = AlgorithmParams(eta=0.05, tau=1.0, n_particles=2, steps=steps)
            checkpoints, _ = run_algorithm(q, init, params, seed=1, checkpoint_every=every)
            assert [k for k, _ in checkpoints] == expected

    def test_same_seed_bit_identical(self):
        spec = default_specs(dim=2)[1]
        rng = np.random.default_rng(0)
        init = ParticleState(xs=rng.normal(size=(5, 2)), ys=rng.normal(size=(5, 2)))
        params = AlgorithmParams(eta=0.01, tau=0.8, n_particles=5, steps=40)
        first, _ = run_algorithm(spec, init, params, seed=9, checkpoint_every=10)
        second, _ = run_algorithm(spec, init, params, seed=9, checkpoint_every=10)
        for (k1, s1), (k2, s2) in zip(first, second):
            assert k1 == k2
            np.testing.assert_array_equal(s1.xs, s2.xs)
            np.testing.assert_array_equal(s1.ys, s2.ys)

    def test_deterministic_mode_equals_gd_bit_for_bit(self):
        q = scalar_quadratic()
        init = ParticleState(xs=np.array([[1.0]]), ys=np.array([[-2.0]]))
        params = AlgorithmParams(eta=0.1, tau=0.0, n_particles=1, steps=100)
        _, final = run_algorithm(q, init, params, seed=4, checkpoint_every=100)
        z = JointPoint(x=np.array([1.0]), y=np.array([-2.0]))
        for _ in range(100):
            z = gd_step(q, z, 0.1)
        assert final.xs[0, 0] == z.x[0]
        assert final.ys[0, 0] == z.y[0]

    def test_noise_unchanged_when_cloud_grows(self):
        # The streams consumed by a step are keyed per particle, so adding
        # particles leaves the noise seen by existing indices untouched.
        noise_a = KeyedNoise(3)
        noise_b = KeyedNoise(3)
        for step in range(5):
            small = noise_a.block("x", 3, step, 2)
            large = noise_b.block("x", 11, step, 2)
            np.testing.assert_array_equal(small, large[:3])


class PermutedNoise:
    """Re-keys particle rows through a permutation, for equivariance tests."""

    def __init__(self, base: KeyedNoise, perm: np.ndarray):
        self.base, self.perm = base, perm

    def block(self, role, n, step, d):
        return self.base.block(role, n, step, d)[self.perm]


class TestPermutationEquivariance:
    def test_step_with_rekeyed_noise_commutes(self):
        spec = default_specs(dim=2)[0]
        rng = np.random.default_rng(8)
        state = ParticleState(xs=rng.normal(size=(6, 2)), ys=rng.normal(size=(6, 2)))
        params = AlgorithmParams(eta=0.02, tau=0.7, n_particles=6, steps=1)
        perm = np.array([3, 1, 4, 0, 5, 2])
        base = KeyedNoise(13)
        stepped = step_algorithm(spec, state, params, base)
        permuted_state = ParticleState(xs=state.xs[perm], ys=state.ys[perm])
        stepped_perm = step_algorithm(
            spec, permuted_state, params, PermutedNoise(base, perm)
        )
        np.testing.assert_allclose(stepped.xs[perm], stepped_perm.xs, atol=1e-14)
        np.testing.assert_allclose(stepped.ys[perm], stepped_perm.ys, atol=1e-14)


class TestCoupled:
    def test_identical_inits_stay_identical(self):
        q = scalar_quadratic()
        init = ParticleState(xs=np.ones((2, 1)), ys=np.zeros((2, 1)))
        params = AlgorithmParams(eta=0.05, tau=1.0, n_particles=2, steps=10)
        distances = coupled_contraction_run(q, init, init, params, seed=2)
        assert distances == [0.0] * 11

    def test_decoupled_quadratic_ratio(self):
        # A = B = 1, C = 0, eta = 0.1: the difference map is z -> 0.9 z, so
        # every squared-distance ratio is 0.81, below M^2 = 0.84.
        q = scalar_quadratic(c=0.0)
        init_a = ParticleState(xs=np.array([[1.0]]), ys=np.array([[1.0]]))
        init_b = ParticleState(xs=np.array([[0.0]]), ys=np.array([[0.0]]))
        params = AlgorithmParams(eta=0.1, tau=0.5, n_particles=1, steps=25)
        distances = coupled_contraction_run(q, init_a, init_b, params, seed=6)
        m_sq = contraction_factor(1.0, 1.0, 0.1) ** 2
        assert m_sq == pytest.approx(0.84)
        for k in range(25):
            ratio = distances[k + 1] / distances[k]
            assert ratio == pytest.approx(0.81, rel=1e-12)
            assert ratio <= m_sq

    def test_rejects_uncertified_step_size(self):
        q = scalar_quadratic(c=0.0)  # alpha = L = 1
        init = ParticleState(xs=np.ones((1, 1)), ys=np.ones((1, 1)))
        params_bad = AlgorithmParams(eta=0.6, tau=1.0, n_particles=1, steps=1)
        with pytest.raises(ValueError, match="certified|stability"):
            coupled_contraction_run(q, init, init, params_bad, seed=0)


class TestSnapshots:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(21)
        state = ParticleState(
            xs=rng.normal(size=(4, 3)), ys=rng.normal(size=(4, 3)), step=12
        )
        path = tmp_path / "snap.csv"
        save_snapshot(path, state)
        loaded = load_snapshot(path)
        assert loaded.step == 12
        np.testing.assert_array_equal(loaded.xs, state.xs)
        np.testing.assert_array_equal(loaded.ys, state.ys)


def test_second_moment_stability_probe():
    result = check_second_moment_stability(seed=0)
    assert result.passed, result.detail
