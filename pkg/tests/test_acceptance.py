"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS criterion k: ...`` or ``FAIL criterion k: ...``
line (visible with ``pytest -v`` or ``-s``) before asserting.
"""

import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from dqconsensus.algebra import (
    DualQuaternion,
    PureDualQuaternion,
    UnitDualQuaternion,
    exp_pure,
    hamilton_minus4,
    hamilton_minus8,
    hamilton_plus4,
    hamilton_plus8,
    log_unit,
    mul,
)
from dqconsensus.graph import DirectedGraph, has_directed_spanning_tree, laplacian
from dqconsensus.graph import random_spanning_tree_graph
from dqconsensus.kinematics import jw_pinv, whole_body_fk, whole_body_jacobian, youbot_like_model
from dqconsensus.logmap import q8, q8_pinv, q_matrix_lemma_form, q_matrix_theorem_form
from dqconsensus.logmap import theta_coefficient
from dqconsensus.sim import (
    Agent,
    Scenario,
    circle_scenario,
    load_scenario,
    manipulator_box_scenario,
    random_pose,
    run,
    time_varying_scenario,
)

from oracles import (
    dual_conj,
    dual_product,
    has_spanning_tree_bfs,
    jacobian_fd,
    linear_consensus_solution,
    quat_product,
    rotation_matrix,
    translation_of,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
N_SAMPLES = 10_000


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
        assert ok, detail
    return emit


def unit_quaternion(rng, angle=None):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    if angle is None:
        angle = rng.uniform(0.0, 2 * math.pi)
    return np.concatenate(([math.cos(angle / 2)], math.sin(angle / 2) * axis))


def unit_dual(rng, angle=None, scale=2.0):
    r = unit_quaternion(rng, angle)
    p = np.concatenate(([0.0], rng.uniform(-scale, scale, size=3)))
    return np.concatenate((r, 0.5 * quat_product(p, r)))


def band_angles(rng, n):
    """Uniform angles in [0, pi] plus a fifth each hugging 0 and pi."""
    k = n // 5
    return np.concatenate((rng.uniform(0, 1e-6, size=k),
                           math.pi - rng.uniform(0, 1e-6, size=k),
                           rng.uniform(0, math.pi, size=n - 2 * k)))


def test_criterion_1_algebra_identities(rng, report):
    start = time.perf_counter()
    worst = 0.0
    flip = np.array([1.0, -1, -1, -1])
    for _ in range(N_SAMPLES):
        a, b = rng.normal(size=8), rng.normal(size=8)
        ab = mul(DualQuaternion(a), DualQuaternion(b)).vec8()
        worst = max(worst,
                    np.abs(ab - dual_product(a, b)).max(),
                    np.abs(hamilton_plus8(a) @ b - ab).max(),
                    np.abs(hamilton_minus8(b) @ a - ab).max())
        h = a[:4]
        worst = max(worst,
                    np.abs(hamilton_plus4(h * flip) - hamilton_plus4(h).T).max(),
                    np.abs(hamilton_minus4(h * flip) - hamilton_minus4(h).T).max())
        r = unit_quaternion(rng)
        hp, hm = hamilton_plus4(r), hamilton_minus4(r)
        worst = max(worst, np.abs(hp @ hp.T - np.eye(4)).max(), np.abs(hm.T @ hm - np.eye(4)).max())
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 5.0
    report(1, ok, f"{N_SAMPLES} samples, max error {worst:.2e} (tol 1e-12), {elapsed:.2f} s (limit 5 s)")


def test_criterion_2_log_exp_roundtrip(rng, report):
    worst = 0.0
    for phi in band_angles(rng, N_SAMPLES):
        x = UnitDualQuaternion(unit_dual(rng, phi))
        worst = max(worst, np.abs(exp_pure(log_unit(x)).vec8() - x.vec8()).max())
    report(2, worst <= 1e-10,
           f"{N_SAMPLES} poses incl. angle bands near 0 and pi, max coefficient error {worst:.2e} "
           "(tol 1e-10)")


def test_criterion_3_lemma_and_theorem_forms(rng, report):
    worst_forms = worst_det = 0.0
    angles = np.concatenate((band_angles(rng, N_SAMPLES // 2),
                             rng.uniform(0, 2 * math.pi, size=N_SAMPLES - N_SAMPLES // 2)))
    for phi in angles:
        r = unit_quaternion(rng, phi)
        # log of r itself, not of the shortest arc, so angles past pi are covered
        y = 0.5 * phi * r[1:] / max(np.linalg.norm(r[1:]), 1e-300) if phi > 0 else np.zeros(3)
        q = q_matrix_theorem_form(r)
        worst_forms = max(worst_forms, np.abs(q_matrix_lemma_form(y) - q).max())
        worst_det = max(worst_det, abs(np.linalg.det(q.T @ q) - theta_coefficient(phi) ** 4))
    ok = worst_forms <= 1e-10 and worst_det <= 1e-9
    report(3, ok, f"{N_SAMPLES} rotations, forms differ by {worst_forms:.2e} (tol 1e-10), "
                  f"det(Q^T Q) - Theta^4 {worst_det:.2e} (tol 1e-9)")


def test_criterion_4_q8_pseudoinverse_and_rates(rng, report):
    worst_inv = 0.0
    for phi in band_angles(rng, N_SAMPLES):
        q = q8(unit_dual(rng, phi))
        worst_inv = max(worst_inv, np.abs(q8_pinv(q) @ q - np.eye(6)).max())
    worst_fd = 0.0
    h = 1e-6
    for _ in range(1000):
        x0 = unit_dual(rng, rng.uniform(0, 2.0))
        x0 *= np.sign(x0[0])
        g1 = rng.normal(size=6)
        g2 = rng.normal(size=6)
        g1[:3] *= 0.4 / np.linalg.norm(g1[:3])
        g2[:3] *= 0.2 / np.linalg.norm(g2[:3])

        def curve(t):
            step = exp_pure(PureDualQuaternion(t * g1 + t * t * g2)).vec8()
            return dual_product(step, x0)

        def logs(t):
            return log_unit(UnitDualQuaternion(curve(t))).vec6()

        t0 = rng.uniform(0, 0.5)
        xdot = (curve(t0 + h) - curve(t0 - h)) / (2 * h)
        ydot = (logs(t0 + h) - logs(t0 - h)) / (2 * h)
        worst_fd = max(worst_fd, np.abs(xdot - q8(curve(t0)) @ ydot).max())
    ok = worst_inv <= 1e-9 and worst_fd <= 1e-5
    report(4, ok, f"Q8+ Q8 = I error {worst_inv:.2e} over {N_SAMPLES} poses (tol 1e-9), "
                  f"finite-difference rate error {worst_fd:.2e} over 1000 trajectories (tol 1e-5)")


def _random_tree_graph(rng, n):
    a = np.zeros((n, n))
    order = rng.permutation(n)
    for k in range(1, n):
        a[order[k], order[rng.integers(0, k)]] = rng.uniform(0.5, 1.5)
    extra = rng.random((n, n)) < 0.15
    a[extra] = rng.uniform(0.5, 1.5, size=int(extra.sum()))
    np.fill_diagonal(a, 0.0)
    return a


def _break(rng, a):
    a = a.copy()
    n = a.shape[0]
    if rng.random() < 0.5:
        # two nodes that hear nobody cannot agree
        i, j = rng.choice(n, size=2, replace=False)
        a[[i, j], :] = 0.0
    else:
        side = rng.random(n) < 0.5
        i, j = rng.choice(n, size=2, replace=False)
        side[i], side[j] = True, False
        a[np.ix_(side, ~side)] = 0.0
        a[np.ix_(~side, side)] = 0.0
    return a


def test_criterion_5_spanning_tree_dichotomy(rng, report):
    mismatched_oracle = mismatched_sim = 0
    trees = 0
    for k in range(200):
        n = int(rng.integers(2, 13))
        a = _random_tree_graph(rng, n)
        if k % 2:
            a = _break(rng, a)
        g = DirectedGraph(a)
        verdict = has_directed_spanning_tree(g)
        trees += verdict
        if verdict != has_spanning_tree_bfs(a):
            mismatched_oracle += 1
        agents = [Agent("pose", pose=random_pose(rng)) for _ in range(n)]
        sc = Scenario(g, agents, "output-consensus", dt=0.05, horizon=100.0, record_every=2000)
        converged = run(sc).disagreement[-1] < 1e-6
        if converged != verdict:
            mismatched_sim += 1
    ok = mismatched_oracle == 0 and mismatched_sim == 0
    report(5, ok, f"200 graphs ({trees} with a spanning tree): eigenvalue test vs BFS "
                  f"mismatches {mismatched_oracle}, convergence vs eigenvalue test mismatches "
                  f"{mismatched_sim}")


def _warm_up():
    # one-off JIT compilation is not part of a simulation's running time
    run(circle_scenario(n=3, horizon=0.01))


def test_criterion_6_circular_formation(report):
    sc = load_scenario(SCENARIOS / "circle5.json")
    _warm_up()
    start = time.perf_counter()
    log = run(sc)
    elapsed = time.perf_counter() - start
    x = log.x[-1]
    worst_rel = 0.0
    for i in range(5):
        for j in range(5):
            got = dual_product(dual_conj(x[j]), x[i])
            want = dual_product(dual_conj(sc.formation[j]), sc.formation[i])
            worst_rel = max(worst_rel, min(np.linalg.norm(got - want), np.linalg.norm(got + want)))
    spread = np.ptp(log.y[-1], axis=0).max()
    tail = log.disagreement[log.t >= 5.0]
    tail = tail[tail > 1e-10]
    monotone = bool(np.all(np.diff(tail) <= 0.0))
    ok = worst_rel < 1e-6 and spread < 1e-6 and monotone and elapsed < 10.0
    report(6, ok, f"relative pose error {worst_rel:.2e} (tol 1e-6), final log spread {spread:.2e}, "
                  f"disagreement monotone after 5 s: {monotone}, run time {elapsed:.2f} s (limit 10 s)")


def test_criterion_7_time_varying_formation(report):
    sc = load_scenario(SCENARIOS / "timevarying20.json")
    _warm_up()
    log = run(sc)
    post = log.disagreement[log.t >= 0.4 * sc.horizon].max()
    start = time.perf_counter()
    big = run(time_varying_scenario(n=100, seed=0))
    elapsed = time.perf_counter() - start
    big_post = big.disagreement[big.t >= 0.4 * big.t[-1]].max()
    ok = post < 1e-3 and elapsed < 120.0
    report(7, ok, f"n=20 post-transient disagreement {post:.2e} (tol 1e-3); n=100 smoke run "
                  f"{elapsed:.1f} s (limit 120 s), its post-transient disagreement {big_post:.2e}")


def test_criterion_8_closed_loop_matches_linear_system(rng, report):
    worst = 0.0
    for _ in range(20):
        g = random_spanning_tree_graph(4, rng=rng)
        agents = [Agent("pose", pose=random_pose(rng, max_angle=1.5)) for _ in range(4)]
        sc = Scenario(g, agents, "pose-consensus", dt=1e-5, horizon=2.0, record_every=200)
        log = run(sc)
        exact = linear_consensus_solution(laplacian(g), log.y[0], log.t)
        worst = max(worst, np.abs(log.y - exact).max())
    report(8, worst < 1e-5, f"20 four-agent scenarios, sup-norm log error vs expm(-L t) {worst:.2e} "
                            "(tol 1e-5)")


def test_criterion_9_kinematics_and_box(rng, report):
    model = youbot_like_model()
    worst_fd = worst_penrose = 0.0
    for _ in range(100):
        q = rng.uniform(-math.pi, math.pi, size=8)
        j = whole_body_jacobian(q[:3], model, q[3:]).full
        fd = jacobian_fd(lambda v: whole_body_fk(v[:3], model, v[3:]).vec8(), q)
        worst_fd = max(worst_fd, np.abs(j - fd).max())
        p = jw_pinv(j)
        worst_penrose = max(worst_penrose,
                            np.abs(j @ p @ j - j).max(), np.abs(p @ j @ p - p).max(),
                            np.abs((j @ p).T - j @ p).max(), np.abs((p @ j).T - p @ j).max())
    log = run(manipulator_box_scenario(seed=0))
    x1, x2, box = log.x[-1]
    center = translation_of(box)
    d1 = np.linalg.norm(translation_of(x1) - center)
    d2 = np.linalg.norm(translation_of(x2) - center)
    sep = np.linalg.norm(translation_of(x1) - translation_of(x2))
    a1 = rotation_matrix(x1[:4])[:, 0]
    a2 = rotation_matrix(x2[:4])[:, 0]
    facing = float(a1 @ a2)
    # each tool x axis points from its end effector toward the center
    toward = min(a1 @ (center - translation_of(x1)) / d1, a2 @ (center - translation_of(x2)) / d2)
    ok = (worst_fd < 1e-5 and worst_penrose < 1e-8 and abs(d1 - 0.30) < 1e-3
          and abs(d2 - 0.30) < 1e-3 and abs(sep - 0.60) < 2e-3 and facing < -0.999
          and toward > 0.999)
    report(9, ok, f"J_w finite-difference error {worst_fd:.2e} (tol 1e-5), Penrose {worst_penrose:.2e} "
                  f"(tol 1e-8); box: end effectors {d1:.4f} m and {d2:.4f} m from center "
                  f"(target 0.30 +- 1e-3, pair {sep:.4f} m apart), x axes dot {facing:.6f}")


def _cli_run(scenario, out, seed, horizon=None):
    cmd = [sys.executable, "-m", "dqconsensus.cli", "run", "--scenario", str(scenario),
           "--out", str(out), "--seed", str(seed)]
    if horizon is not None:
        cmd += ["--horizon", str(horizon)]
    subprocess.run(cmd, check=True, capture_output=True, env=dict(os.environ))
    return (Path(out) / "trajectory.csv").read_bytes()


def test_criterion_10_determinism(tmp_path, report):
    cases = [(SCENARIOS / "circle5.json", None), (SCENARIOS / "timevarying20.json", 0.5),
             (SCENARIOS / "manipulator_box.json", 2.0)]
    same = []
    for k, (path, horizon) in enumerate(cases):
        a = _cli_run(path, tmp_path / f"a{k}", 11, horizon)
        b = _cli_run(path, tmp_path / f"b{k}", 11, horizon)
        same.append(a == b and len(a) > 0)
    report(10, all(same), f"repeated CLI runs byte-identical for {sum(same)}/{len(cases)} scenarios")
