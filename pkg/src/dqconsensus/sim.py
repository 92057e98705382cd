"""Scenario-driven simulation of networked rigid bodies.

A scenario is a plain JSON document::

    {
      "graph": {"n": 5, "edges": [[i, j, w], ...]},
      "agents": [{"kind": "pose", "pose": [8 coefficients] | "random"},
                 {"kind": "leader", "pose": [...]},
                 {"kind": "manipulator", "base": [x, y, phi], "joints": [...],
                  "model": "youbot-like" | {"dh": ..., "mount": ..., "tool": ...}}],
      "formation": {"kind": "none"}
                 | {"kind": "constant", "deltas": [[8 coefficients], ...]}
                 | {"kind": "time-varying", "family": "tilted-ring", ...},
      "protocol": "formation",
      "dt": 0.001, "horizon": 30.0, "seed": 0,
      "tolerance": 1e-6, "record_every": 1
    }

Updates are synchronous: every input in a step is computed from the
previous step's state before any agent moves. Free bodies are advanced with
the exponential map, manipulator joints with forward Euler.
"""

from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .algebra import (
    NotUnitError,
    PureDualQuaternion,
    UnitDualQuaternion,
    dq_mul,
    exp_pure_coeffs,
    normalize_unit,
)
from .graph import (
    DirectedGraph,
    GraphError,
    circle_topology,
    laplacian,
    leader_box_topology,
    random_spanning_tree_graph,
)
from .kinematics import SerialArm, whole_body_fk, whole_body_state, youbot_like_model
from .protocols import joint_rates

PROTOCOLS = (
    "output-consensus",
    "pose-consensus",
    "twist-consensus",
    "formation",
    "twist-formation",
    "time-varying-formation",
    "manipulator-formation",
)
_CONSENSUS = ("output-consensus", "pose-consensus", "twist-consensus")
_TWIST_LOGGED = ("twist-consensus", "twist-formation")

DEFAULT_DT = 1e-3
DEFAULT_TOLERANCE = 1e-6
RANDOM_MAX_ANGLE = 2.0
RANDOM_TRANSLATION = 1.0

CSV_HEADER = ["t", "agent"] + [f"x{k}" for k in range(1, 9)] + \
    [f"y{k}" for k in range(1, 7)] + ["u_norm"]


class ScenarioError(ValueError):
    """The scenario document is malformed or inconsistent."""


class NumericalFailure(ArithmeticError):
    """The simulation produced non-finite or non-unit states."""


# ---------------------------------------------------------------------------
# Single-agent helpers
# ---------------------------------------------------------------------------

def integrate_step(x: UnitDualQuaternion, xi: PureDualQuaternion, dt: float) -> UnitDualQuaternion:
    """``exp((dt/2) xi) x``, renormalized."""
    step = exp_pure_coeffs(0.5 * dt * xi.vec6())
    return UnitDualQuaternion(normalize_unit(dq_mul(step, x.vec8())))


def disagreement(outputs) -> float:
    """Largest pairwise distance between the agents' log outputs."""
    rows = [o.vec6() if isinstance(o, PureDualQuaternion) else np.asarray(o, float).reshape(6)
            for o in outputs]
    if not rows:
        raise ValueError("disagreement of an empty set of outputs")
    return float(kernels.numpy_impl.disagreement(np.array(rows)))


def _rot(axis: int, angle: float) -> np.ndarray:
    out = np.zeros(8)
    out[0] = math.cos(0.5 * angle)
    out[1 + axis] = math.sin(0.5 * angle)
    return out


def circular_formation_deltas(n: int, offset=(0.0, -0.5, 0.0)) -> list[UnitDualQuaternion]:
    """Offsets ``r_i (1 + eps (1/2) p)`` spreading ``n`` agents around the vertical axis.

    ``r_i`` turns by ``2 pi i / n`` (0-based ``i``) and ``p`` is the
    translation of agent 0, so the agents sit on a circle of radius ``|p|``.
    """
    if n < 1:
        raise ValueError("need at least one agent")
    p = np.concatenate(([0.0], np.asarray(offset, dtype=np.float64)))
    shift = np.concatenate(([1.0, 0.0, 0.0, 0.0], 0.5 * p))
    return [UnitDualQuaternion(dq_mul(_rot(2, 2.0 * math.pi * i / n), shift)) for i in range(n)]


@dataclass(frozen=True)
class TiltedRing:
    """Time-varying offsets ``delta_i(t) = r_x,i r_z,i s(t)``.

    ``r_x,i`` and ``r_z,i`` rotate by ``2 pi i / n`` about x and z. The
    common factor ``s(t) = 1 + eps amplitude (-i - j)(offset + cos(2 pi f t))``
    makes every agent slide back and forth along a fixed direction of its
    own frame.
    """

    n: int
    amplitude: float = 0.5
    offset: float = 2.0
    frequency: float = 4.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one agent")
        rot = np.array([dq_mul(_rot(0, a), _rot(2, a))
                        for a in 2.0 * math.pi * np.arange(self.n) / self.n])
        # rotations have zero dual part, so delta_i = [r_i, c(t) r_i v]
        v = np.array([0.0, -self.amplitude, -self.amplitude, 0.0])
        slide = kernels.numpy_impl.qmul(rot[:, :4], np.broadcast_to(v, (self.n, 4)))
        object.__setattr__(self, "_rotations", rot[:, :4].copy())
        object.__setattr__(self, "_slide", slide)

    def _phase(self, t: float) -> tuple[float, float]:
        w = 2.0 * math.pi * self.frequency
        return self.offset + math.cos(w * t), -w * math.sin(w * t)

    def slide(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """The common factor ``s(t)`` and its derivative as vec8."""
        c, c_dot = self._phase(t)
        s = np.array([1.0, 0, 0, 0, 0, -self.amplitude * c, -self.amplitude * c, 0])
        s_dot = np.array([0.0, 0, 0, 0, 0, -self.amplitude * c_dot, -self.amplitude * c_dot, 0])
        return s, s_dot

    def evaluate(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        c, c_dot = self._phase(t)
        delta = np.empty((self.n, 8))
        delta_dot = np.zeros((self.n, 8))
        delta[:, :4] = self._rotations
        delta[:, 4:] = c * self._slide
        delta_dot[:, 4:] = c_dot * self._slide
        return delta, delta_dot

    def to_dict(self) -> dict:
        return {"kind": "time-varying", "family": "tilted-ring", "amplitude": self.amplitude,
                "offset": self.offset, "frequency": self.frequency}


def time_varying_deltas(n: int, t: float, **params) -> list[tuple[UnitDualQuaternion, np.ndarray]]:
    """``(delta_i(t), vec8(delta_i_dot(t)))`` for the tilted-ring family."""
    delta, delta_dot = TiltedRing(n, **params).evaluate(t)
    return [(UnitDualQuaternion(d), dd) for d, dd in zip(delta, delta_dot)]


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------

@dataclass
class Agent:
    kind: str
    pose: Optional[np.ndarray] = None
    base: Optional[np.ndarray] = None
    joints: Optional[np.ndarray] = None
    model: Optional[SerialArm] = None
    model_name: Optional[str] = None

    @property
    def active(self) -> bool:
        return self.kind != "leader"

    def end_effector(self) -> np.ndarray:
        return whole_body_fk(self.base, self.model, self.joints).vec8()

    def to_dict(self) -> dict:
        if self.kind == "manipulator":
            model = self.model_name if self.model_name else self.model.to_dict()
            return {"kind": "manipulator", "base": self.base.tolist(),
                    "joints": self.joints.tolist(), "model": model}
        return {"kind": self.kind, "pose": self.pose.tolist()}


@dataclass
class Scenario:
    graph: DirectedGraph
    agents: list
    protocol: str
    formation: object = None  # None, (n, 8) constant offsets, or TiltedRing
    dt: float = DEFAULT_DT
    horizon: float = 10.0
    seed: int = 0
    tolerance: float = DEFAULT_TOLERANCE
    record_every: int = 1
    name: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def steps(self) -> int:
        return int(math.floor(self.horizon / self.dt + 1e-9))

    def offsets(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        if self.formation is None:
            delta = np.zeros((self.n, 8))
            delta[:, 0] = 1.0
            return delta, np.zeros((self.n, 8))
        if isinstance(self.formation, TiltedRing):
            return self.formation.evaluate(t)
        return self.formation, np.zeros((self.n, 8))

    def validate(self) -> None:
        if len(self.agents) != self.graph.n:
            raise ScenarioError(f"{len(self.agents)} agents but the graph has {self.graph.n} nodes")
        if self.protocol not in PROTOCOLS:
            raise ScenarioError(f"unknown protocol {self.protocol!r}; expected one of {PROTOCOLS}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ScenarioError(f"dt must be positive, got {self.dt}")
        if not (math.isfinite(self.horizon) and self.horizon >= 0):
            raise ScenarioError(f"horizon must be nonnegative, got {self.horizon}")
        if self.record_every < 1:
            raise ScenarioError("record_every must be at least 1")
        if self.protocol in _CONSENSUS and self.formation is not None:
            raise ScenarioError(f"protocol {self.protocol!r} takes no formation")
        if isinstance(self.formation, TiltedRing) and self.protocol not in (
                "time-varying-formation", "manipulator-formation"):
            raise ScenarioError(f"protocol {self.protocol!r} cannot follow a time-varying formation")
        if isinstance(self.formation, TiltedRing) and self.formation.n != self.n:
            raise ScenarioError("time-varying family size differs from the agent count")
        arms = any(a.kind == "manipulator" for a in self.agents)
        if arms and self.protocol != "manipulator-formation":
            raise ScenarioError("manipulator agents need the 'manipulator-formation' protocol")

    # -- serialization ------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, seed: Optional[int] = None) -> "Scenario":
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a JSON object")
        for key in ("graph", "agents", "protocol"):
            if key not in data:
                raise ScenarioError(f"scenario is missing {key!r}")
        try:
            graph = DirectedGraph.from_dict(data["graph"])
        except GraphError as exc:
            raise ScenarioError(f"graph: {exc}") from None
        seed = int(data.get("seed", 0)) if seed is None else int(seed)
        rng = np.random.default_rng(seed)
        extra = data.get("random_init", {})
        agents = [_parse_agent(i, a, rng, extra) for i, a in enumerate(_as_list(data["agents"], "agents"))]
        try:
            sc = cls(
                graph=graph,
                agents=agents,
                protocol=str(data["protocol"]),
                formation=_parse_formation(data.get("formation"), len(agents)),
                dt=float(data.get("dt", DEFAULT_DT)),
                horizon=float(data.get("horizon", 10.0)),
                seed=seed,
                tolerance=float(data.get("tolerance", DEFAULT_TOLERANCE)),
                record_every=int(data.get("record_every", 1)),
                name=str(data.get("name", "")),
                extra=dict(extra),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(str(exc)) from None
        sc.validate()
        return sc

    def to_dict(self) -> dict:
        out = {}
        if self.name:
            out["name"] = self.name
        out["graph"] = self.graph.to_dict()
        out["agents"] = [a.to_dict() for a in self.agents]
        if self.formation is None:
            out["formation"] = {"kind": "none"}
        elif isinstance(self.formation, TiltedRing):
            out["formation"] = self.formation.to_dict()
        else:
            out["formation"] = {"kind": "constant", "deltas": self.formation.tolist()}
        out.update(protocol=self.protocol, dt=self.dt, horizon=self.horizon, seed=self.seed,
                   tolerance=self.tolerance, record_every=self.record_every)
        if self.extra:
            out["random_init"] = self.extra
        return out


def load_scenario(path, seed: Optional[int] = None) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from None
    return Scenario.from_dict(data, seed=seed)


def dump_scenario(sc: Scenario) -> str:
    """JSON text with one top-level key per line and one list item per line.

    Floats use ``repr`` (shortest round-trip form), so reloading gives the
    exact same doubles.
    """
    lines = []
    for key, value in sc.to_dict().items():
        if isinstance(value, list):
            items = ",\n".join("  " + json.dumps(v) for v in value)
            lines.append(f" {json.dumps(key)}: [\n{items}\n ]")
        else:
            lines.append(f" {json.dumps(key)}: {json.dumps(value)}")
    return "{\n" + ",\n".join(lines) + "\n}\n"


def _as_list(value, what: str) -> list:
    if not isinstance(value, list):
        raise ScenarioError(f"{what!r} must be a list")
    return value


def _unit(value, what: str) -> np.ndarray:
    try:
        return UnitDualQuaternion(value).vec8()
    except NotUnitError as exc:
        raise ScenarioError(f"{what} is not a unit dual quaternion: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{what}: {exc}") from None


def random_pose(rng: np.random.Generator, max_angle: float = RANDOM_MAX_ANGLE,
                translation: float = RANDOM_TRANSLATION) -> np.ndarray:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, max_angle)
    r = np.concatenate(([math.cos(0.5 * angle)], math.sin(0.5 * angle) * axis))
    p = np.concatenate(([0.0], rng.uniform(-translation, translation, size=3)))
    return np.concatenate((r, 0.5 * kernels.numpy_impl.qmul(p, r)))


def _parse_agent(i: int, data, rng, extra) -> Agent:
    if not isinstance(data, dict):
        raise ScenarioError(f"agent {i} must be an object")
    kind = data.get("kind", "pose")
    if kind in ("pose", "leader"):
        pose = data.get("pose")
        if pose is None:
            raise ScenarioError(f"agent {i} has no 'pose'")
        if pose == "random":
            pose = random_pose(rng, float(extra.get("max_angle", RANDOM_MAX_ANGLE)),
                               float(extra.get("translation", RANDOM_TRANSLATION)))
        return Agent(kind, pose=_unit(pose, f"agent {i} pose"))
    if kind == "manipulator":
        spec = data.get("model", "youbot-like")
        try:
            if spec == "youbot-like":
                model, name = youbot_like_model(), "youbot-like"
            elif isinstance(spec, dict):
                model, name = SerialArm.from_dict(spec), None
            else:
                raise ScenarioError(f"agent {i}: unknown arm model {spec!r}")
            base = np.asarray(data.get("base", [0.0, 0.0, 0.0]), dtype=np.float64)
            joints = np.asarray(data.get("joints", np.zeros(model.dof)), dtype=np.float64)
        except NotUnitError as exc:
            raise ScenarioError(f"agent {i} arm model: {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"agent {i}: {exc}") from None
        if base.shape != (3,) or joints.shape != (model.dof,):
            raise ScenarioError(f"agent {i}: base needs 3 values and joints {model.dof}")
        if not (np.all(np.isfinite(base)) and np.all(np.isfinite(joints))):
            raise ScenarioError(f"agent {i}: non-finite configuration")
        return Agent(kind, base=base, joints=joints, model=model, model_name=name)
    raise ScenarioError(f"agent {i}: unknown kind {kind!r}")


def _parse_formation(data, n: int):
    if data is None:
        return None
    if not isinstance(data, dict):
        raise ScenarioError("'formation' must be an object")
    kind = data.get("kind", "none")
    if kind == "none":
        return None
    if kind == "constant":
        deltas = _as_list(data.get("deltas"), "deltas")
        if len(deltas) != n:
            raise ScenarioError(f"{len(deltas)} formation offsets for {n} agents")
        return np.array([_unit(d, f"offset {i}") for i, d in enumerate(deltas)])
    if kind == "time-varying":
        family = data.get("family")
        if family != "tilted-ring":
            raise ScenarioError(f"unknown time-varying family {family!r}")
        params = {k: float(data[k]) for k in ("amplitude", "offset", "frequency") if k in data}
        return TiltedRing(n, **params)
    raise ScenarioError(f"unknown formation kind {kind!r}")


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryLog:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    u_norm: np.ndarray
    disagreement: np.ndarray
    steps: int
    tolerance: float
    joints: dict = field(default_factory=dict)
    max_range_residual: Optional[float] = None

    @property
    def rows(self) -> int:
        return self.t.shape[0]

    def time_to_tol(self, tol: Optional[float] = None) -> Optional[float]:
        """First logged time after which the disagreement stays below ``tol``."""
        tol = self.tolerance if tol is None else tol
        above = np.nonzero(self.disagreement >= tol)[0]
        if above.size == 0:
            return float(self.t[0])
        if above[-1] == self.rows - 1:
            return None
        return float(self.t[above[-1] + 1])

    def metrics(self) -> dict:
        out = {"final_disagreement": float(self.disagreement[-1]),
               "time_to_tol": self.time_to_tol(),
               "steps": self.steps}
        if self.max_range_residual is not None:
            out["max_range_residual"] = self.max_range_residual
        return out

    def csv_text(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def write_csv(self, fh) -> None:
        rows, n = self.x.shape[:2]
        table = np.empty((rows * n, 17))
        table[:, 0] = np.repeat(self.t, n)
        table[:, 1] = np.tile(np.arange(n), rows)
        table[:, 2:10] = self.x.reshape(-1, 8)
        table[:, 10:16] = self.y.reshape(-1, 6)
        table[:, 16] = self.u_norm.reshape(-1)
        fmt = ["%.17g", "%d"] + ["%.17g"] * 15
        np.savetxt(fh, table, fmt=fmt, delimiter=",", header=",".join(CSV_HEADER), comments="")


def _initial_state(sc: Scenario):
    x = np.empty((sc.n, 8))
    for i, a in enumerate(sc.agents):
        x[i] = a.end_effector() if a.kind == "manipulator" else a.pose
    return x


def _check_finite(x, t):
    if not np.all(np.isfinite(x)):
        raise NumericalFailure(f"non-finite state at t={t:.6g}")


def run(sc: Scenario) -> TrajectoryLog:
    """Integrate the scenario over its horizon and log every ``record_every`` step."""
    sc.validate()
    steps = sc.steps
    record = np.array(sorted(set(range(0, steps + 1, sc.record_every)) | {steps}), dtype=np.int64)
    ts = record * sc.dt
    lap = np.ascontiguousarray(laplacian(sc.graph))
    active = np.array([a.active for a in sc.agents])
    x0 = _initial_state(sc)
    if sc.protocol == "output-consensus":
        parts = _run_linear(x0, lap, active, sc.dt, steps, record)
        return TrajectoryLog(ts, *parts, steps, sc.tolerance)
    if any(a.kind == "manipulator" for a in sc.agents):
        return _run_with_arms(sc, x0, lap, active, steps, record, ts)

    n = sc.n
    rot = np.zeros((n, 4))
    slide = np.zeros((n, 4))
    offset = omega = 0.0
    moving = isinstance(sc.formation, TiltedRing)
    if moving:
        ring = sc.formation
        rot, slide = ring._rotations, ring._slide
        offset, omega = ring.offset, 2.0 * math.pi * ring.frequency
        const = np.zeros((n, 8))
    else:
        const = np.ascontiguousarray(sc.offsets(0.0)[0])
    log_x, log_y, log_u, log_d, failed = kernels.run_free(
        x0, lap, active, const, np.ascontiguousarray(rot), np.ascontiguousarray(slide),
        float(offset), float(omega), moving, float(sc.dt), steps, record,
        sc.protocol in _TWIST_LOGGED)
    if failed >= 0:
        raise NumericalFailure(f"non-finite state at t={failed * sc.dt:.6g}")
    return TrajectoryLog(ts, log_x, log_y, log_u, log_d, steps, sc.tolerance)


def _run_linear(x0, lap, active, dt, steps, record):
    """Output consensus on the logs themselves: ``y <- y - dt L y``."""
    n = x0.shape[0]
    rows = record.shape[0]
    log_x = np.empty((rows, n, 8))
    log_y = np.empty((rows, n, 6))
    log_u = np.empty((rows, n))
    log_d = np.empty(rows)
    y, _ = kernels.dq_log(x0)
    row = 0
    for k in range(steps + 1):
        u = -(lap @ y)
        u[~active] = 0.0
        if record[row] == k:
            log_x[row] = kernels.dq_exp(y)
            log_y[row] = y
            log_u[row] = np.sqrt(np.einsum("ij,ij->i", u, u))
            log_d[row] = kernels.disagreement(y)
            row += 1
        if k == steps:
            break
        y = y + dt * u
        _check_finite(y, k * dt)
    return log_x, log_y, log_u, log_d


def _run_with_arms(sc, x, lap, active, steps, record, ts):
    """Python step loop used when some agents are mobile manipulators."""
    n = sc.n
    rows = record.shape[0]
    log_x = np.empty((rows, n, 8))
    log_y = np.empty((rows, n, 6))
    log_u = np.empty((rows, n))
    log_d = np.empty(rows)
    arms = [i for i, a in enumerate(sc.agents) if a.kind == "manipulator"]
    free = np.array([a.kind != "manipulator" for a in sc.agents])
    q = {i: np.concatenate((sc.agents[i].base, sc.agents[i].joints)) for i in arms}
    log_q = {i: np.empty((rows, q[i].shape[0])) for i in arms}
    max_res = 0.0
    row = 0
    for k in range(steps + 1):
        t = k * sc.dt
        jac = {}
        for i in arms:
            a = sc.agents[i]
            x[i], jac[i] = whole_body_state(q[i][:3], a.model, q[i][3:])
        _check_finite(x, t)
        delta, delta_dot = sc.offsets(t)
        y, _, _ = kernels.formation_outputs(x, delta)
        u, xi = kernels.formation_rates(x, delta, delta_dot, lap @ y, active)
        unorm = np.sqrt(np.einsum("ij,ij->i", u, u))
        q_dot = {}
        for i in arms:
            if not active[i]:
                q_dot[i] = np.zeros_like(q[i])
                continue
            q_dot[i], res = joint_rates(jac[i].full, u[i])
            max_res = max(max_res, res)
            unorm[i] = np.linalg.norm(q_dot[i])
        if record[row] == k:
            log_x[row] = x
            log_y[row] = y
            log_u[row] = unorm
            log_d[row] = kernels.disagreement(y)
            for i in arms:
                log_q[i][row] = q[i]
            row += 1
        if k == steps:
            break
        x = x.copy()
        if free.any():
            x[free] = kernels.exp_step(np.ascontiguousarray(x[free]),
                                       np.ascontiguousarray(xi[free]), sc.dt)
        for i in arms:
            q[i] = q[i] + sc.dt * q_dot[i]
    return TrajectoryLog(ts, log_x, log_y, log_u, log_d, steps, sc.tolerance,
                         joints=log_q, max_range_residual=max_res)


def write_outputs(log: TrajectoryLog, out_dir) -> tuple[str, str]:
    """``trajectory.csv`` and ``metrics.json`` inside ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "trajectory.csv")
    metrics_path = os.path.join(out_dir, "metrics.json")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        log.write_csv(fh)
    with open(metrics_path, "w", encoding="utf-8") as fh:
        json.dump(log.metrics(), fh, indent=1)
        fh.write("\n")
    return csv_path, metrics_path


def agent_outputs(log: TrajectoryLog, row: int = -1) -> list[PureDualQuaternion]:
    return [PureDualQuaternion(v) for v in log.y[row]]


def final_poses(log: TrajectoryLog) -> list[UnitDualQuaternion]:
    return [UnitDualQuaternion(v) for v in log.x[-1]]


# ---------------------------------------------------------------------------
# Built-in scenario families
# ---------------------------------------------------------------------------

def circle_scenario(n: int = 5, seed: int = 0, dt: float = DEFAULT_DT,
                    horizon: float = 30.0, record_every: int = 10) -> Scenario:
    """Free bodies from random poses settling on a circle of radius 0.5 m.

    Five agents use the fixed five-node topology; other sizes get a random
    graph with a spanning tree.
    """
    rng = np.random.default_rng(seed)
    graph = circle_topology() if n == 5 else random_spanning_tree_graph(n, rng=rng)
    agents = [Agent("pose", pose=random_pose(rng)) for _ in range(n)]
    deltas = np.array([d.vec8() for d in circular_formation_deltas(n)])
    return Scenario(graph, agents, "formation", deltas, dt=dt, horizon=horizon, seed=seed,
                    record_every=record_every, name=f"circle{n}")


def time_varying_scenario(n: int = 20, seed: int = 0, dt: float = 2.5e-5,
                          horizon: float = 3.0, record_every: int = 400) -> Scenario:
    """Random graph and poses tracking the tilted-ring offsets."""
    rng = np.random.default_rng(seed)
    graph = random_spanning_tree_graph(n, rng=rng)
    agents = [Agent("pose", pose=random_pose(rng)) for _ in range(n)]
    return Scenario(graph, agents, "time-varying-formation", TiltedRing(n), dt=dt,
                    horizon=horizon, seed=seed, tolerance=1e-3, record_every=record_every,
                    name=f"timevarying{n}")


BOX_POSE = (1.0, 0.0, 0.0, 0.0, 0.0, 0.4, 0.1, 0.125)
BOX_REACH = 0.15


def manipulator_box_scenario(seed: int = 0, dt: float = 1e-2, horizon: float = 60.0,
                             weight: float = 0.5) -> Scenario:
    """Two mobile manipulators gathering on opposite sides of a static box.

    Agent 2 is the box, a leader that only broadcasts its pose. The
    offsets ``1 - eps BOX_REACH i`` put each end effector ``2 BOX_REACH``
    from the box center, on opposite sides, with the tool x axes opposed.
    """
    rng = np.random.default_rng(seed)
    model = youbot_like_model()
    bases = [[0.0, 0.0, 0.0], [1.6, 0.4, math.pi]]
    agents = []
    for b in bases:
        base = np.asarray(b) + rng.uniform(-0.1, 0.1, size=3)
        joints = np.array([0.0, -0.4, -0.8, -0.4, 0.0]) + rng.uniform(-0.1, 0.1, size=5)
        agents.append(Agent("manipulator", base=base, joints=joints, model=model,
                            model_name="youbot-like"))
    agents.append(Agent("leader", pose=UnitDualQuaternion(BOX_POSE).vec8()))
    # 1 - eps r i, and k (1 - eps r i) = k - eps r j
    deltas = np.array([[1.0, 0, 0, 0, 0, -BOX_REACH, 0, 0],
                       [0.0, 0, 0, 1.0, 0, 0, -BOX_REACH, 0],
                       [1.0, 0, 0, 0, 0, 0, 0, 0]])
    return Scenario(leader_box_topology(weight), agents, "manipulator-formation", deltas,
                    dt=dt, horizon=horizon, seed=seed, tolerance=1e-4, name="manipulator-box")


SCENARIO_FAMILIES = {
    "circle": circle_scenario,
    "timevarying": time_varying_scenario,
    "manipulator-box": manipulator_box_scenario,
}


__all__ = [
    "PROTOCOLS", "ScenarioError", "NumericalFailure", "Agent", "Scenario", "TiltedRing",
    "TrajectoryLog", "integrate_step", "disagreement", "circular_formation_deltas",
    "time_varying_deltas", "random_pose", "load_scenario", "dump_scenario", "run",
    "write_outputs", "agent_outputs", "final_poses",
    "circle_scenario", "time_varying_scenario", "manipulator_box_scenario", "SCENARIO_FAMILIES",
]
