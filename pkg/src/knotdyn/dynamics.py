"""Self-repulsion evolution with knot-type preserving step control.

Two modes drive a bead curve:

* Constrained: overdamped descent along the r^(-exponent) repulsion with
  rigid edge lengths restored by alternating projection after every move.
* FreeSprings: velocity-Verlet integration of repulsion plus Hooke edge
  springs, with optional viscous damping.

Every step caps the per-bead displacement at a fraction of the current
minimum distance between non-adjacent segments; a capped move below half
that gap provably cannot pass one strand through another, and larger
moves are vetted by the swept crossing check.  Rejected steps retry with
a halved time step (at most 20 halvings).  Constrained steps additionally
reject any increase of the Simon energy beyond 1e-9 relative, so accepted
trajectories descend monotonically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import kernels
from .curves import KnotCurve
from .errors import (
    EmptyOperandError,
    ParameterRangeError,
    PerturbationFailedError,
    StepCollapseError,
)

_MAX_HALVINGS = 20  # crossing/projection retries
_MAX_ENERGY_HALVINGS = 60  # descent-scale retries: forces span many decades
_ENERGY_SLACK = 1e-9
_PROJECTION_TOL = 1e-12
_PROJECTION_REQUIRED = 1e-9
_SAFE_GAP_FRACTION = 0.499
# tangential force below this fraction of the raw force is solver roundoff
_TANGENT_NOISE_FLOOR = 1e-8


class Mode(str, Enum):
    CONSTRAINED = "constrained"
    FREE_SPRINGS = "free"


@dataclass(frozen=True)
class SimParams:
    rest_edge_length: float
    dt: float = 1e-3
    mode: Mode = Mode.CONSTRAINED
    repulsion_exponent: float = 5.0
    repulsion_strength: float = 1.0
    spring_constant: float = 0.0
    viscous_damping: float = 0.0
    max_disp_fraction: float = 0.2
    energy_include_adjacent: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.repulsion_exponent < 2:
            raise ParameterRangeError("repulsion_exponent must be >= 2")
        if self.repulsion_strength <= 0:
            raise ParameterRangeError("repulsion_strength must be positive")
        if self.spring_constant < 0:
            raise ParameterRangeError("spring_constant must be >= 0")
        if self.rest_edge_length <= 0:
            raise ParameterRangeError("rest_edge_length must be positive")
        if self.dt <= 0:
            raise ParameterRangeError("dt must be positive")
        if not 0 < self.max_disp_fraction < 1:
            raise ParameterRangeError("max_disp_fraction must be in (0, 1)")
        if self.viscous_damping < 0:
            raise ParameterRangeError("viscous_damping must be >= 0")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "dt": self.dt,
            "rest_edge_length": self.rest_edge_length,
            "repulsion_exponent": self.repulsion_exponent,
            "repulsion_strength": self.repulsion_strength,
            "spring_constant": self.spring_constant,
            "viscous_damping": self.viscous_damping,
            "max_disp_fraction": self.max_disp_fraction,
            "energy_include_adjacent": self.energy_include_adjacent,
        }


def params_for_curve(curve: KnotCurve, **overrides) -> SimParams:
    """SimParams with the rest edge length taken from the curve."""
    overrides.setdefault("rest_edge_length", curve.total_length() / len(curve))
    return SimParams(**overrides)


@dataclass
class SimState:
    curve: KnotCurve
    velocities: np.ndarray
    step_index: int = 0
    last_energy: float = math.nan
    last_forces: np.ndarray | None = None
    # adaptive memory: fraction of params.dt that last produced an accepted
    # constrained step (the energy gate typically binds well below dt)
    dt_hint: float = 1.0

    @classmethod
    def at_rest(cls, curve: KnotCurve, include_adjacent: bool = True) -> "SimState":
        energy = kernels.simon_energy(curve.points, include_adjacent)
        return cls(curve, np.zeros_like(curve.points), 0, energy)


def simon_energy(curve: KnotCurve, include_adjacent: bool = True) -> float:
    """Sum of inverse distances over distinct bead pairs."""
    return kernels.simon_energy(curve.points, include_adjacent)


def repulsion_forces(curve: KnotCurve, exponent: float = 5.0, strength: float = 1.0):
    return kernels.repulsion_forces(curve.points, exponent, strength)


def spring_forces(curve: KnotCurve, k: float, rest_length: float):
    return kernels.spring_forces(curve.points, k, rest_length)


def swept_crossing_check(before: KnotCurve, after: KnotCurve) -> bool:
    """True when the linear motion between the curves crosses strands."""
    return kernels.swept_crossing(before.points, after.points)


def _bead_clearances(pos) -> np.ndarray:
    """Per-bead free distance: the smaller clearance of its two segments."""
    seg = kernels.segment_clearances(pos)
    return np.minimum(seg, np.roll(seg, 1))


def _norms(vectors: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", vectors, vectors))


def _max_norm(vectors: np.ndarray) -> float:
    return float(np.max(_norms(vectors)))


def _motion_is_safe(pos, newpos, bead_clear, total_norms) -> bool:
    # each bead staying under half its own clearance bounds every segment
    # pair's relative motion below its separation, so no strand can cross
    if np.all(total_norms <= _SAFE_GAP_FRACTION * bead_clear):
        return True
    return not kernels.swept_crossing(pos, newpos)


def step(state: SimState, params: SimParams) -> SimState:
    """One accepted evolution step; raises StepCollapseError if none fits."""
    if params.mode is Mode.CONSTRAINED:
        return _step_constrained(state, params)
    return _step_free(state, params)


def enter_constrained(state: SimState, params: SimParams) -> SimState:
    """Normalize a state for Constrained stepping.

    Zeroes velocities and re-imposes the rigid edge lengths once (edges
    drift freely in FreeSprings mode); the correction is vetted by the
    crossing check like any other motion.
    """
    pos = state.curve.points
    newpos, residual, _ = kernels.project_edges(
        pos, params.rest_edge_length, _PROJECTION_TOL, 200
    )
    if residual >= _PROJECTION_REQUIRED:
        raise StepCollapseError("could not re-impose edge lengths on mode switch")
    if kernels.swept_crossing(pos, newpos):
        raise StepCollapseError("edge re-imposition would cross strands")
    curve = KnotCurve(newpos, validate=False)
    return SimState(
        curve,
        np.zeros_like(newpos),
        state.step_index,
        kernels.simon_energy(newpos, params.energy_include_adjacent),
    )


def _step_constrained(state: SimState, params: SimParams) -> SimState:
    pos = state.curve.points
    raw = kernels.repulsion_forces(
        pos, params.repulsion_exponent, params.repulsion_strength
    )
    # move within the rigid-edge manifold: the normal force components are
    # absorbed by the constraints, so descending along them only adds noise
    forces = kernels.tangent_project_forces(pos, raw)
    energy_0 = state.last_energy
    if math.isnan(energy_0):
        energy_0 = kernels.simon_energy(pos, params.energy_include_adjacent)
    bead_clear = _bead_clearances(pos)
    caps = params.max_disp_fraction * bead_clear
    force_peak = _max_norm(forces)
    if force_peak <= _TANGENT_NOISE_FLOOR * _max_norm(raw):
        force_peak = 0.0  # constrained equilibrium: stay exactly put
        forces = np.zeros_like(forces)
    hint = min(max(state.dt_hint * 2.0, 2.0**-_MAX_ENERGY_HALVINGS), 1.0)
    dt = params.dt * hint
    clip_scale = 1.0
    risk_halvings = 0
    for _ in range(_MAX_ENERGY_HALVINGS + 1):
        if force_peak == 0.0:
            newpos = pos.copy()
        else:
            disp = dt * forces
            norms = _norms(disp)
            over = norms > clip_scale * caps
            if np.any(over):
                disp[over] *= (clip_scale * caps[over] / norms[over])[:, None]
            newpos, residual, _ = kernels.project_edges(
                pos + disp, params.rest_edge_length, _PROJECTION_TOL, 200
            )
            if residual >= _PROJECTION_REQUIRED:
                dt *= 0.5
                clip_scale *= 0.5
                risk_halvings += 1
                if risk_halvings > _MAX_HALVINGS:
                    break
                continue
        total = newpos - pos
        total_norms = _norms(total)
        if force_peak != 0.0:
            # a sound constraint restoration is a small correction; a large
            # one means the Newton solve jumped to a distant root
            if float(np.max(total_norms)) > 4.0 * float(np.max(_norms(disp))):
                dt *= 0.5
                clip_scale *= 0.5
                risk_halvings += 1
                if risk_halvings > _MAX_HALVINGS:
                    break
                continue
        if not _motion_is_safe(pos, newpos, bead_clear, total_norms):
            dt *= 0.5
            clip_scale *= 0.5
            risk_halvings += 1
            if risk_halvings > _MAX_HALVINGS:
                break
            continue
        energy_1 = kernels.simon_energy(newpos, params.energy_include_adjacent)
        if energy_1 > energy_0 + _ENERGY_SLACK * abs(energy_0):
            # shrink only the time step: smaller moves de-saturate the caps,
            # so the retried direction approaches the true tangent force
            dt *= 0.5
            continue
        return SimState(
            KnotCurve(newpos, validate=False),
            np.zeros_like(newpos),
            state.step_index + 1,
            energy_1,
            forces,
            dt_hint=dt / params.dt,
        )
    raise StepCollapseError(
        f"constrained step rejected after repeated halvings at step "
        f"{state.step_index}"
    )


def _total_forces(pos, params: SimParams):
    f = kernels.repulsion_forces(
        pos, params.repulsion_exponent, params.repulsion_strength
    )
    if params.spring_constant > 0:
        f = f + kernels.spring_forces(
            pos, params.spring_constant, params.rest_edge_length
        )
    return f


def _step_free(state: SimState, params: SimParams) -> SimState:
    pos = state.curve.points
    vel = state.velocities
    gamma = params.viscous_damping
    forces_0 = _total_forces(pos, params)
    bead_clear = _bead_clearances(pos)
    caps = params.max_disp_fraction * bead_clear
    dt = params.dt
    for _ in range(_MAX_HALVINGS + 1):
        v_half = vel + 0.5 * dt * (forces_0 - gamma * vel)
        disp = dt * v_half
        norms = _norms(disp)
        if np.any(norms > caps):
            dt *= 0.5
            continue
        newpos = pos + disp
        if not _motion_is_safe(pos, newpos, bead_clear, norms):
            dt *= 0.5
            continue
        forces_1 = _total_forces(newpos, params)
        v_new = (v_half + 0.5 * dt * forces_1) / (1.0 + 0.5 * dt * gamma)
        energy_1 = kernels.simon_energy(newpos, params.energy_include_adjacent)
        return SimState(
            KnotCurve(newpos, validate=False),
            v_new,
            state.step_index + 1,
            energy_1,
            forces_0,
        )
    raise StepCollapseError(
        f"free-springs step rejected after {_MAX_HALVINGS} halvings at step "
        f"{state.step_index}"
    )


# --------------------------------------------------------------------------
# Trajectories


@dataclass(frozen=True)
class Frame:
    step_index: int
    simon_energy: float
    points: np.ndarray


@dataclass(frozen=True)
class ConvergenceRule:
    force_tol: float = 1e-8
    energy_tol: float = 1e-10
    window: int = 100


@dataclass(frozen=True)
class Phase:
    params: SimParams
    max_steps: int | None = None
    converge: ConvergenceRule | None = None
    record_every: int = 100

    def __post_init__(self):
        if self.max_steps is None and self.converge is None:
            raise ParameterRangeError("phase needs a max-steps or convergence rule")


@dataclass
class PhaseResult:
    steps: int
    converged: bool
    final_energy: float


@dataclass
class Trajectory:
    frames: list[Frame] = field(default_factory=list)
    phase_results: list[PhaseResult] = field(default_factory=list)
    schedule: list[dict] = field(default_factory=list)
    final_state: SimState | None = None
    accepted_steps: int = 0

    @property
    def converged(self) -> bool:
        return bool(self.phase_results) and self.phase_results[-1].converged

    def energies(self) -> np.ndarray:
        return np.array([f.simon_energy for f in self.frames])


def evolve(
    state: SimState,
    schedule: list[Phase],
    keep_all_frames: bool = False,
    frame_sink=None,
    step_sink=None,
) -> Trajectory:
    """Run the phases in order, carrying state across phase boundaries.

    Velocities are zeroed when a phase enters Constrained mode.  Frames
    are recorded every `record_every` accepted steps and at phase
    boundaries; `keep_all_frames` records every accepted step (used by the
    post-hoc crossing audit).  `frame_sink(frame)` streams recorded frames
    out; `step_sink(state)` observes every accepted step.
    """
    if not schedule:
        raise EmptyOperandError("schedule must contain at least one phase")
    traj = Trajectory(schedule=[_phase_dict(p) for p in schedule])

    def record(st: SimState):
        frame = Frame(st.step_index, st.last_energy, st.curve.points.copy())
        traj.frames.append(frame)
        if frame_sink is not None:
            frame_sink(frame)

    if math.isnan(state.last_energy):
        state.last_energy = kernels.simon_energy(
            state.curve.points, schedule[0].params.energy_include_adjacent
        )
    record(state)
    for phase in schedule:
        if phase.params.mode is Mode.CONSTRAINED:
            state = enter_constrained(state, phase.params)
        window: list[tuple[float, np.ndarray]] = []
        converged = False
        steps_done = 0
        stride = 1 if keep_all_frames else phase.record_every
        while phase.max_steps is None or steps_done < phase.max_steps:
            state = step(state, phase.params)
            steps_done += 1
            traj.accepted_steps += 1
            if step_sink is not None:
                step_sink(state)
            if state.step_index % stride == 0:
                record(state)
            if phase.converge is not None:
                window.append((state.last_energy, state.last_forces))
                if len(window) > phase.converge.window:
                    old_e, old_f = window.pop(0)
                    force_change = _max_norm(state.last_forces - old_f)
                    energy_change = abs(state.last_energy - old_e)
                    if (
                        force_change < phase.converge.force_tol
                        and energy_change
                        <= phase.converge.energy_tol * abs(state.last_energy)
                    ):
                        converged = True
                        break
        if not traj.frames or traj.frames[-1].step_index != state.step_index:
            record(state)
        traj.phase_results.append(
            PhaseResult(steps_done, converged, state.last_energy)
        )
    traj.final_state = state
    return traj


def _phase_dict(phase: Phase) -> dict:
    out = phase.params.to_dict()
    out["steps"] = phase.max_steps
    out["record_every"] = phase.record_every
    if phase.converge is not None:
        out["converge"] = {
            "force_tol": phase.converge.force_tol,
            "energy_tol": phase.converge.energy_tol,
            "window": phase.converge.window,
        }
    return out


def audit_trajectory(frames: list[Frame]) -> int:
    """Number of consecutive frame pairs whose motion crosses strands."""
    crossings = 0
    for a, b in zip(frames, frames[1:]):
        if kernels.swept_crossing(a.points, b.points):
            crossings += 1
    return crossings


# --------------------------------------------------------------------------
# Perturbation and shape detection


def perturb(curve: KnotCurve, magnitude: float, seed: int) -> KnotCurve:
    """Random bead displacements of at most `magnitude`, knot type kept.

    Deterministic in (curve, magnitude, seed); retries fresh substreams
    until the result is embedded and the motion check passes.
    """
    if magnitude < 0:
        raise ParameterRangeError("magnitude must be >= 0")
    if magnitude == 0:
        return KnotCurve(curve.points.copy(), validate=False)
    pos = curve.points
    for attempt in range(100):
        rng = np.random.default_rng([seed, attempt])
        direction = rng.normal(size=pos.shape)
        norms = np.linalg.norm(direction, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        radii = magnitude * rng.random(size=(len(pos), 1)) ** (1.0 / 3.0)
        moved = pos + direction / norms * radii
        candidate = KnotCurve(moved, validate=False)
        if not candidate.is_embedded():
            continue
        if kernels.swept_crossing(pos, moved):
            continue
        return candidate
    raise PerturbationFailedError(
        f"no safe perturbation of magnitude {magnitude} in 100 attempts"
    )


def is_round_circle(curve: KnotCurve, tol: float) -> bool:
    """Planarity and radius-uniformity test against the best-fit plane."""
    if tol <= 0:
        raise ParameterRangeError("tol must be positive")
    pts = curve.points
    centered = pts - pts.mean(axis=0)
    radii = np.linalg.norm(centered, axis=1)
    mean_radius = float(radii.mean())
    if mean_radius == 0:
        return False
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    normal = vt[-1]
    out_of_plane = float(np.max(np.abs(centered @ normal)))
    radius_spread = float(radii.std())
    return out_of_plane <= tol * mean_radius and radius_spread <= tol * mean_radius
