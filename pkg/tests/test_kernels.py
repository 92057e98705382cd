import os
import subprocess
import sys

import numpy as np
import pytest

from dqconsensus import kernels
from dqconsensus.algebra import exp_pure_coeffs, log_unit_coeffs
from dqconsensus.graph import circle_topology, laplacian
from dqconsensus.logmap import q8, q_matrix_theorem_form
from dqconsensus.sim import TiltedRing

from oracles import dual_conj, dual_product, random_pose

BACKENDS = kernels.backends()


@pytest.fixture(params=sorted(BACKENDS))
def impl(request):
    return BACKENDS[request.param]


def batch(rng, n, max_angle=None):
    return np.array([random_pose(rng, max_angle)[0] for _ in range(n)])


class TestAgainstReference:
    def test_dq_mul_and_conj(self, impl, rng):
        a, b = rng.normal(size=(7, 8)), rng.normal(size=(7, 8))
        want = np.array([dual_product(p, q) for p, q in zip(a, b)])
        assert np.abs(impl.dq_mul(a, b) - want).max() < 1e-13
        assert np.array_equal(impl.dq_conj(a), np.array([dual_conj(v) for v in a]))

    def test_log_exp(self, impl, rng):
        x = batch(rng, 50)
        y, sign = impl.dq_log(x)
        for i in range(50):
            canon = x[i] * (-1.0 if x[i][0] < 0 else 1.0)
            assert sign[i] == (-1.0 if x[i][0] < 0 else 1.0)
            assert np.abs(y[i] - log_unit_coeffs(canon)).max() < 1e-13
        back = impl.dq_exp(y)
        assert np.abs(back - x * sign[:, None]).max() < 1e-12
        assert np.abs(back[3] - exp_pure_coeffs(y[3])).max() < 1e-15

    def test_normalize(self, impl, rng):
        x = batch(rng, 10) * 1.001
        x[:, 4:] += 1e-4
        z = impl.dq_normalize(x)
        assert np.abs(np.linalg.norm(z[:, :4], axis=1) - 1).max() < 1e-15
        assert np.abs(np.einsum("ij,ij->i", z[:, :4], z[:, 4:])).max() < 1e-15

    def test_q_matrices(self, impl, rng):
        x = batch(rng, 20)
        x *= np.sign(x[:, :1])
        qm = impl.q_matrix(np.ascontiguousarray(x[:, :4]))
        q8s = impl.q8_batch(x)
        s = rng.normal(size=(20, 6))
        applied = impl.q8_apply(x, s)
        for i in range(20):
            assert np.abs(qm[i] - q_matrix_theorem_form(x[i, :4])).max() < 1e-14
            assert np.abs(q8s[i] - q8(x[i])).max() < 1e-14
            assert np.abs(applied[i] - q8(x[i]) @ s[i]).max() < 1e-14

    def test_disagreement(self, impl):
        assert impl.disagreement(np.zeros((1, 6))) == 0.0
        y = np.zeros((3, 6))
        y[1, 3] = 1.0
        assert impl.disagreement(y) == 1.0


class TestParity:
    @pytest.fixture(autouse=True)
    def need_both(self):
        if len(BACKENDS) < 2:
            pytest.skip("numba not importable")

    def test_rates_and_step(self, rng):
        x = batch(rng, 12, max_angle=3.0)
        d = batch(rng, 12)
        dd = rng.normal(size=(12, 8))
        s = rng.normal(size=(12, 6))
        active = np.ones(12, dtype=bool)
        active[4] = False
        outs = [b.formation_rates(x, d, dd, s, active) for b in BACKENDS.values()]
        for a, b in zip(*outs):
            assert np.abs(a - b).max() <= 1e-14
        steps = [b.exp_step(x, outs[0][1], 1e-3) for b in BACKENDS.values()]
        assert np.abs(steps[0] - steps[1]).max() <= 1e-15
        ys = [b.formation_outputs(x, d) for b in BACKENDS.values()]
        for a, b in zip(*ys):
            assert np.abs(a - b).max() <= 1e-14

    @pytest.mark.parametrize("moving", [False, True])
    def test_run_free(self, rng, moving):
        n = 5
        x0 = batch(rng, n)
        lap = np.ascontiguousarray(laplacian(circle_topology()))
        active = np.ones(n, dtype=bool)
        ring = TiltedRing(n)
        const = batch(rng, n)
        record = np.arange(0, 201, 20, dtype=np.int64)
        args = (x0, lap, active, const, ring._rotations, ring._slide, ring.offset,
                2 * np.pi * ring.frequency, moving, 1e-3, 200, record, False)
        a, b = (impl.run_free(*args) for impl in BACKENDS.values())
        assert a[4] == b[4] == -1
        for u, v in zip(a[:4], b[:4]):
            assert np.abs(u - v).max() <= 1e-12


def test_backend_selection_by_environment():
    code = "from dqconsensus import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, DQ_CONSENSUS_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "numpy"
    env["DQ_CONSENSUS_BACKEND"] = "fortran"
    out = subprocess.run([sys.executable, "-W", "ignore", "-c", code], env=env,
                         capture_output=True, text=True)
    assert out.stdout.strip() == "numpy"
