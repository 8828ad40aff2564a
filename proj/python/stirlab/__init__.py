"""Hard balls pushed by a reflected Brownian driver."""

from ._core import *  # noqa: F401,F403
from ._core import __version__, run_path, SimConfig, SystemState, Space, Mode  # noqa: F401


def simulate(dim=2, edge=float("inf"), dt=1e-3, t_end=10.0, seed=1, mode="pushing",
             two_balls=True, adaptive=True, snapshot_stride=0):
    """Runs one path from the default start (balls on the diagonal, driver
    1.5 to the right of X) and returns the PathResult."""
    space = Space.euclidean(dim) if edge == float("inf") else Space.torus(dim, edge)
    cfg = SimConfig()
    cfg.space = space
    cfg.dt = dt
    cfg.t_end = t_end
    cfg.seed = seed
    cfg.mode = Mode.PUSHING if mode == "pushing" else Mode.FROZEN
    cfg.two_balls = two_balls
    cfg.adaptive = adaptive
    cfg.snapshot_stride = snapshot_stride
    if space.finite():
        x = [edge / 4] * dim
        y = [3 * edge / 4] * dim
    else:
        x = [0.0] * dim
        y = [5.0] + [0.0] * (dim - 1)
    if not two_balls:
        y = list(x)
    b = list(x)
    b[0] += 1.5
    return run_path(cfg, SystemState.make(space, b, x, y))
