"""Shared test helpers: random embedded loops and force oracles."""

import numpy as np

from knotdyn.curves import KnotCurve


def random_embedded_loop(rng, beads: int, retries: int = 50) -> KnotCurve:
    """Random smooth closed curve from a low-order Fourier series."""
    for _ in range(retries):
        t = 2 * np.pi * np.arange(beads) / beads
        pts = np.zeros((beads, 3))
        for k in range(1, 5):
            amp = rng.normal(scale=1.0 / k, size=(2, 3))
            pts += amp[0] * np.cos(k * t)[:, None] + amp[1] * np.sin(k * t)[:, None]
        curve = KnotCurve(pts, validate=False)
        if curve.is_embedded() and curve.min_gap() > 1e-3:
            return curve
    raise RuntimeError("could not draw an embedded random loop")


def finite_difference_forces(potential, pos: np.ndarray, h: float) -> np.ndarray:
    """Central-difference negative gradient of a scalar potential."""
    grad = np.zeros_like(pos)
    work = pos.copy()
    for i in range(pos.shape[0]):
        for c in range(3):
            orig = work[i, c]
            work[i, c] = orig + h
            up = potential(work)
            work[i, c] = orig - h
            down = potential(work)
            work[i, c] = orig
            grad[i, c] = (up - down) / (2 * h)
    return -grad
