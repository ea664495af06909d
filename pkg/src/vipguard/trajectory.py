"""Line-delimited trajectory files.

One JSON header line (format name, version, scenario digest, episode seed,
role layout, final waypoints, per-entity radius and mass), then one JSON
record line per step carrying the post-step state: entity positions and
velocities, utterances, every agent's action, per-bodyguard rewards, and the
instantaneous threat. Floats are written with Python's shortest-round-trip
repr, so read(write(trace)) reproduces the trace bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import TrajectoryError
from .scenario import EpisodeTrace, RoleAssignment, StepRecord
from .world import AgentAction, EntityState, WorldState

FORMAT_NAME = "vipguard-trajectory"
VERSION = 1


def _vec(arr: np.ndarray) -> list[float]:
    return [float(v) for v in arr]


def write_trajectory(trace: EpisodeTrace, path: str | Path) -> None:
    """Write header plus one record line per step."""
    if not trace.records:
        raise TrajectoryError("cannot write an empty trace", line_number=1)
    first = trace.records[0].state
    header = {
        "format": FORMAT_NAME,
        "version": VERSION,
        "digest": trace.config_digest,
        "seed": trace.seed,
        "n_bodyguards": len(trace.roles.bodyguard_indices),
        "n_bystanders": len(trace.roles.bystander_indices),
        "n_landmarks": first.n_landmarks,
        "c_dim": first.c_dim,
        "vip_goal_landmark": trace.roles.vip_goal_landmark,
        "bystander_waypoints": {str(k): v for k, v in trace.roles.bystander_waypoints.items()},
        "agents": [[a.radius, a.mass] for a in first.agents],
        "landmarks": [[l.radius, l.mass] for l in first.landmarks],
    }
    lines = [json.dumps(header)]
    for record in trace.records:
        state = record.state
        lines.append(
            json.dumps(
                {
                    "step": state.step_index,
                    "positions": [_vec(e.position) for e in state.entities],
                    "velocities": [_vec(e.velocity) for e in state.entities],
                    "utterances": [_vec(u) for u in state.utterances],
                    "actions": [
                        _vec(np.concatenate([a.force, a.utterance])) for a in record.actions
                    ],
                    "rewards": [float(r) for r in record.rewards],
                    "threat": record.threat,
                }
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_line(text: str, line_number: int) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TrajectoryError(f"not valid JSON: {exc.msg}", line_number) from exc
    if not isinstance(data, dict):
        raise TrajectoryError("expected a JSON object", line_number)
    return data


def read_trajectory(path: str | Path) -> EpisodeTrace:
    """Exact inverse of `write_trajectory`; raises TrajectoryError with line numbers."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise TrajectoryError("empty file", line_number=1)
    header = _parse_line(lines[0], 1)
    if header.get("format") != FORMAT_NAME:
        raise TrajectoryError(f"not a {FORMAT_NAME} file", line_number=1)
    if header.get("version") != VERSION:
        raise TrajectoryError(
            f"unsupported version {header.get('version')} (expected {VERSION})", line_number=1
        )
    try:
        n_bodyguards = int(header["n_bodyguards"])
        n_bystanders = int(header["n_bystanders"])
        n_landmarks = int(header["n_landmarks"])
        c_dim = int(header["c_dim"])
        agent_meta = header["agents"]
        landmark_meta = header["landmarks"]
        roles = RoleAssignment(
            vip_index=0,
            bodyguard_indices=tuple(range(1, 1 + n_bodyguards)),
            bystander_indices=tuple(range(1 + n_bodyguards, 1 + n_bodyguards + n_bystanders)),
            vip_goal_landmark=int(header["vip_goal_landmark"]),
            bystander_waypoints={
                int(k): int(v) for k, v in header["bystander_waypoints"].items()
            },
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TrajectoryError(f"bad header field: {exc}", line_number=1) from exc

    n_agents = 1 + n_bodyguards + n_bystanders
    records = []
    for line_number, text in enumerate(lines[1:], start=2):
        data = _parse_line(text, line_number)
        try:
            positions = data["positions"]
            velocities = data["velocities"]
            if len(positions) != n_agents + n_landmarks:
                raise ValueError(
                    f"expected {n_agents + n_landmarks} positions, got {len(positions)}"
                )
            agents = [
                EntityState(
                    position=np.asarray(positions[i], dtype=float),
                    velocity=np.asarray(velocities[i], dtype=float),
                    radius=float(agent_meta[i][0]),
                    mass=float(agent_meta[i][1]),
                    movable=True,
                )
                for i in range(n_agents)
            ]
            landmarks = [
                EntityState(
                    position=np.asarray(positions[n_agents + j], dtype=float),
                    velocity=np.asarray(velocities[n_agents + j], dtype=float),
                    radius=float(landmark_meta[j][0]),
                    mass=float(landmark_meta[j][1]),
                    movable=False,
                )
                for j in range(n_landmarks)
            ]
            state = WorldState(
                agents=agents,
                landmarks=landmarks,
                utterances=[np.asarray(u, dtype=float) for u in data["utterances"]],
                step_index=int(data["step"]),
            )
            actions = [
                AgentAction(
                    force=np.asarray(a[:2], dtype=float),
                    utterance=np.asarray(a[2:], dtype=float),
                )
                for a in data["actions"]
            ]
            records.append(
                StepRecord(
                    state=state,
                    actions=actions,
                    rewards=[float(r) for r in data["rewards"]],
                    threat=float(data["threat"]),
                )
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise TrajectoryError(f"bad record: {exc}", line_number) from exc
    return EpisodeTrace(
        records=records,
        seed=int(header["seed"]),
        config_digest=str(header["digest"]),
        roles=roles,
    )
