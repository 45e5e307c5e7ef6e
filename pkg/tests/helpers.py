import numpy as np

from dualrail_scqc.geometry import ControlPulse
from dualrail_scqc.linalg import TimeGrid


def random_smooth_pulse(rng, n_steps=4000, duration=1.0):
    """Positive Rabi rate and smooth detuning built from a few Fourier modes."""
    grid = TimeGrid(duration, n_steps)
    t = grid.times / duration
    k = np.arange(1, 4)
    a = rng.uniform(-0.4, 0.4, 3)
    b = rng.uniform(-2.0, 2.0, 3)
    base = rng.uniform(3.0, 6.0)
    omega = base * (1 + np.sin(2 * np.pi * np.outer(t, k)) @ a / 1.5) / duration
    delta = (rng.uniform(-1, 1) + np.cos(np.pi * np.outer(t, k)) @ b) / duration
    return ControlPulse(grid, omega, 0.0, delta)
