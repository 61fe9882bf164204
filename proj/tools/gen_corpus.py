#!/usr/bin/env python3
"""Regenerates the shipped scenario corpus and the external-arm trajectories.

Usage: python3 tools/gen_corpus.py [data_dir]
"""

import json
import math
import sys
from pathlib import Path

import numpy as np

TICK_RATE = 100
DURATION = 10.0
TRIALS = 5
TRAJ_PERIOD = 0.01

CENTERS = {"XY": [0.40, 0.0, 0.30], "YZ": [0.40, 0.0, 0.35]}
SIZES = {"square": 0.16, "circle": 0.08, "eight": 0.05}
DOWN = [0.0, math.pi, 0.0]
NEAR_X = 0.52  # neighbour bases sit just beyond the paths

S6_START = [0.0, 0.6, 1.4, 0.0, 1.1, 0.0]
# Both S4 arms point their tools at each other across a shared workspace:
# s6 traces each shape while s7 always traces the square.
S4_CENTER = [0.50, 0.0, 0.35]
S4_S6_START = [0.0, 0.015, 2.0, 0.0, -0.443, 0.0]
S4_S7_START = [0.0, 0.265, 0.0, 2.025, 0.0, -0.718, 0.0]


def reach_trajectory(period, phase, sway):
    """A neighbour arm leaning in and out of the controlled arm's workspace."""
    ts = np.arange(0.0, period + 1e-9, TRAJ_PERIOD)
    w = 2.0 * math.pi / period
    rows = []
    for t in ts:
        s = math.sin(w * t + phase)
        q = [
            sway * math.sin(2.0 * w * t + phase),
            0.45 + 0.25 * s,
            0.0,
            0.75 + 0.35 * s,
            0.0,
            0.60,
            0.0,
        ]
        rows.append([t] + q)
    rows[-1][1:] = rows[0][1:]  # loops seamlessly
    return rows


def write_csv(path, rows):
    with open(path, "w") as f:
        f.write("stamp,q1,q2,q3,q4,q5,q6,q7\n")
        for r in rows:
            f.write(",".join(f"{v:.6f}" for v in r) + "\n")


def controlled(name, model, base_xyz, base_yaw, q0, shape, plane, orientation, phase=0.0, center=None):
    center = center or CENTERS[plane]
    path = {"shape": shape, "plane": plane, "center": center, "size": SIZES.get(shape, 0.1)}
    if phase:
        path["phase"] = phase
    return {
        "name": name,
        "model": f"../robots/{model}.json",
        "role": "controlled",
        "base": {"xyz": base_xyz, "rpy": [0.0, 0.0, base_yaw]},
        "initial_q": q0,
        "path": path,
        "goal": {"mode": "pose", "orientation_rpy": orientation},
    }


def external(name, base_xyz, base_yaw, trajectory):
    return {
        "name": name,
        "model": "../robots/s7.json",
        "role": "external",
        "base": {"xyz": base_xyz, "rpy": [0.0, 0.0, base_yaw]},
        "trajectory": f"../trajectories/{trajectory}",
    }


def scenario(sid, name, seed, arms):
    return {
        "scenario": sid,
        "name": name,
        "tick_rate": TICK_RATE,
        "duration": DURATION,
        "trials": TRIALS,
        "seed": seed,
        "expect_no_collisions": True,
        "arms": arms,
    }


def main():
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data"
    scen_dir = root / "scenarios"
    traj_dir = root / "trajectories"
    scen_dir.mkdir(parents=True, exist_ok=True)
    traj_dir.mkdir(parents=True, exist_ok=True)
    for old in scen_dir.glob("*.json"):
        old.unlink()

    write_csv(traj_dir / "s2_reach.csv", reach_trajectory(5.0, 0.0, 0.25))
    write_csv(traj_dir / "s3_reach_left.csv", reach_trajectory(6.0, 0.0, 0.20))
    write_csv(traj_dir / "s3_reach_right.csv", reach_trajectory(6.0, math.pi, 0.20))

    docs = {}
    seed = 100
    for shape in ("square", "circle", "eight"):
        for plane in ("XY", "YZ"):
            tag = f"{shape}_{plane.lower()}"
            arm = controlled("s6", "s6", [0.0, 0.0, 0.0], 0.0, S6_START, shape, plane, DOWN)
            seed += 1
            docs[f"s1_{tag}"] = scenario("S1", f"s1_{tag}", seed, [arm])
            seed += 1
            docs[f"s2_{tag}"] = scenario(
                "S2", f"s2_{tag}", seed, [arm, external("s7", [NEAR_X, 0.62, 0.0], -math.pi / 2, "s2_reach.csv")]
            )
            seed += 1
            docs[f"s3_{tag}"] = scenario(
                "S3",
                f"s3_{tag}",
                seed,
                [
                    arm,
                    external("s7_left", [NEAR_X, 0.62, 0.0], -math.pi / 2, "s3_reach_left.csv"),
                    external("s7_right", [NEAR_X, -0.62, 0.0], math.pi / 2, "s3_reach_right.csv"),
                ],
            )
    for shape in ("square", "circle", "eight"):
        tag = f"{shape}_yz"
        seed += 1
        docs[f"s4_{tag}"] = scenario(
            "S4",
            f"s4_{tag}",
            seed,
            [
                controlled(
                    "s6", "s6", [0.0, 0.0, 0.0], 0.0, S4_S6_START, shape, "YZ", [0.0, math.pi / 2, 0.0], center=S4_CENTER
                ),
                controlled(
                    "s7",
                    "s7",
                    [1.0, 0.0, 0.0],
                    math.pi,
                    S4_S7_START,
                    "square",
                    "YZ",
                    [0.0, -math.pi / 2, 0.0],
                    phase=0.5,
                    center=S4_CENTER,
                ),
            ],
        )
    hold = controlled("s6", "s6", [0.0, 0.0, 0.0], 0.0, S6_START, "hold", "XY", DOWN)
    docs["s1_hold"] = scenario("S1", "s1_hold", 1, [hold])
    docs["s1_hold"]["duration"] = 3.0

    for name, doc in docs.items():
        with open(scen_dir / f"{name}.json", "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")


if __name__ == "__main__":
    main()
