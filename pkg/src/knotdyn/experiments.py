"""Scripted evolution scenarios with persisted trajectories and reports.

Each scenario builds its documented starting configuration, applies a
seeded perturbation, runs its schedule and reports energies, convergence
and shape flags.  Bead counts and absolute energies are artifacts of this
package's discretization, so comparisons across scenarios only make sense
at equal bead count and total length (all curves are normalized to length
one).
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .curves import KnotCurve, resample_uniform, torus_knot_curve
from .diagram import embed_closure
from .dynamics import (
    ConvergenceRule,
    Mode,
    Phase,
    SimParams,
    SimState,
    Trajectory,
    evolve,
    is_round_circle,
    params_for_curve,
    perturb,
)
from .errors import UnknownScenarioError
from .io import TrajectoryWriter
from .io import load_curve as load_curve  # re-exported: scenario file round-trips
from .io import save_curve as save_curve
from .notation import parse_tangle
from .tangles import reduce_closure


@dataclass
class ScenarioReport:
    name: str
    seed: int
    beads: int
    initial_energy: float
    final_energy: float
    converged: bool
    final_round_circle: bool
    classification_note: str
    trajectory_path: str | None
    wall_time_seconds: float
    accepted_steps: int
    audited_steps: int = 0
    audit_crossings: int = 0
    phase_energies: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class _Scenario:
    name: str
    kind: str  # "torus" or "tangle"
    source: tuple | str
    beads: int | None
    max_steps: int
    free_interlude: bool = False
    note: str = ""


_CONVERGE = ConvergenceRule(force_tol=np.inf, energy_tol=2e-7, window=500)

SCENARIOS: dict[str, _Scenario] = {
    s.name: s
    for s in [
        _Scenario("trefoil23", "torus", (2, 3), 200, 40000, note="torus knot T(2,3)"),
        _Scenario("torus32", "torus", (3, 2), 200, 40000, note="torus knot T(3,2)"),
        _Scenario(
            "torus32-swing",
            "torus",
            (3, 2),
            200,
            40000,
            free_interlude=True,
            note="T(3,2) with an inertial free-spring interlude",
        ),
        _Scenario("torus52", "torus", (5, 2), 200, 40000, note="torus knot T(5,2)"),
        _Scenario("torus25", "torus", (2, 5), 200, 40000, note="torus knot T(2,5)"),
        _Scenario("unknot-3-2", "tangle", "[3.2]", None, 40000),
        _Scenario("unknot-11-10", "tangle", "[11.10]", None, 100000),
        _Scenario("knot-15-10", "tangle", "[15.10]", None, 3000),
        _Scenario("n7777", "tangle", "N((7,7,7,7))", None, 3000),
        _Scenario("k11-7777", "tangle", "K(11;(7,7,7,7))", None, 1000),
    ]
}


class _StreamAuditor:
    """Per-step swept-crossing audit over consecutive accepted states."""

    def __init__(self):
        self.prev = None
        self.steps = 0
        self.crossings = 0

    def __call__(self, state):
        pts = state.curve.points
        if self.prev is not None:
            self.steps += 1
            if kernels.swept_crossing(self.prev, pts):
                self.crossings += 1
        self.prev = pts.copy()


def build_initial_curve(name: str, beads: int | None = None, seed: int = 1) -> KnotCurve:
    scenario = SCENARIOS.get(name)
    if scenario is None:
        raise UnknownScenarioError(f"unknown scenario {name!r}")
    if scenario.kind == "torus":
        a, b = scenario.source
        n = beads or scenario.beads
        curve = resample_uniform(torus_knot_curve(a, b, n), n)
    else:
        from .curves import EmbedParams

        curve = embed_closure(parse_tangle(scenario.source), EmbedParams(beads=beads or 0))
    return perturb(curve, 0.2 * curve.min_gap(), seed)


def _classification_note(scenario: _Scenario) -> str:
    if scenario.kind == "torus":
        return scenario.note
    terms, klass = reduce_closure(parse_tangle(scenario.source))
    return f"reduces to {klass} via {terms}"


def run_scenario(
    name: str,
    seed: int = 1,
    out_dir=None,
    overrides: dict | None = None,
    audit: bool = False,
) -> ScenarioReport:
    """Run one scenario; returns its report (and writes files under out_dir).

    Recognized overrides: beads, max_steps, dt, record_every,
    repulsion_exponent, spring_k, gamma, free_steps, energy_tol.
    """
    scenario = SCENARIOS.get(name)
    if scenario is None:
        raise UnknownScenarioError(f"unknown scenario {name!r}")
    overrides = dict(overrides or {})
    started = time.perf_counter()

    curve = build_initial_curve(name, overrides.get("beads"), seed)
    base = params_for_curve(
        curve,
        dt=overrides.get("dt", 1e-3),
        repulsion_exponent=overrides.get("repulsion_exponent", 5.0),
    )
    max_steps = overrides.get("max_steps", scenario.max_steps)
    record_every = overrides.get("record_every", 100)
    converge = ConvergenceRule(
        force_tol=np.inf,
        energy_tol=overrides.get("energy_tol", _CONVERGE.energy_tol),
        window=_CONVERGE.window,
    )
    if overrides.get("no_converge"):
        converge = None
    constrained = Phase(base, max_steps=max_steps, converge=converge, record_every=record_every)
    schedule = [constrained]
    if scenario.free_interlude:
        strength = float(curve.min_gap()) ** base.repulsion_exponent
        free = SimParams(
            **{
                **base.to_dict(),
                "mode": Mode.FREE_SPRINGS,
                "repulsion_strength": strength,
                "spring_constant": overrides.get("spring_k", 100.0),
                "viscous_damping": overrides.get("gamma", 0.05),
            }
        )
        schedule = [
            constrained,
            Phase(free, max_steps=overrides.get("free_steps", 5000), record_every=record_every),
            constrained,
        ]

    sink = None
    path = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{name}-seed{seed}.jsonl"
        writer = TrajectoryWriter(
            path, base.to_dict(), [p.params.to_dict() | {"steps": p.max_steps} for p in schedule]
        )
        sink = lambda frame: writer.write_frame(
            frame.step_index, frame.simon_energy, frame.points
        )

    auditor = _StreamAuditor() if audit else None
    state = SimState.at_rest(curve, base.energy_include_adjacent)
    if auditor:
        auditor(state)
    traj = evolve(state, schedule, frame_sink=sink, step_sink=auditor)
    if path is not None:
        writer.close()

    final = traj.final_state
    report = ScenarioReport(
        name=name,
        seed=seed,
        beads=len(curve),
        initial_energy=traj.frames[0].simon_energy,
        final_energy=final.last_energy,
        converged=traj.converged,
        final_round_circle=is_round_circle(final.curve, 0.05),
        classification_note=_classification_note(scenario),
        trajectory_path=str(path) if path else None,
        wall_time_seconds=time.perf_counter() - started,
        accepted_steps=traj.accepted_steps,
        audited_steps=auditor.steps if auditor else 0,
        audit_crossings=auditor.crossings if auditor else 0,
        phase_energies=[r.final_energy for r in traj.phase_results],
    )
    if out_dir is not None:
        (Path(out_dir) / f"{name}-seed{seed}.json").write_text(
            json.dumps(report.to_dict(), indent=2) + "\n"
        )
    return report


def report_table(reports: list[ScenarioReport]) -> str:
    """Aligned text table, ordered by scenario name then seed."""
    if not reports:
        raise UnknownScenarioError("no reports to tabulate")
    rows = [
        (
            r.name,
            str(r.seed),
            str(r.beads),
            f"{r.initial_energy:.2f}",
            f"{r.final_energy:.2f}",
            "yes" if r.converged else "no",
            "yes" if r.final_round_circle else "no",
            r.classification_note,
        )
        for r in sorted(reports, key=lambda r: (r.name, r.seed))
    ]
    header = ("scenario", "seed", "beads", "E_initial", "E_final", "converged", "round", "note")
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)


def run_all(
    seeds=(1,), out_dir=None, overrides: dict | None = None, audit: bool = False
) -> list[ScenarioReport]:
    reports = []
    for name in sorted(SCENARIOS):
        for seed in seeds:
            reports.append(run_scenario(name, seed, out_dir, overrides, audit))
    if out_dir is not None:
        path = Path(out_dir) / "report.json"
        path.write_text(
            json.dumps([r.to_dict() for r in reports], indent=2) + "\n"
        )
    return reports
