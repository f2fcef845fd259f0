"""ASCII and PPM renders of environments with an optional trace overlay."""

from __future__ import annotations

import numpy as np

from .grid import GridCrossingEnv

GRADE = "0123456789"

_WALL = (90, 90, 90)
_FREE = (245, 245, 245)
_LAVA = (230, 110, 20)
_GOAL = (40, 170, 60)
_START = (200, 40, 40)


def _trace_cells(env, trace) -> list:
    if trace is None:
        return []
    cells = []
    for step in trace:
        x, y = step.state[0], step.state[1]
        if isinstance(env, GridCrossingEnv):
            cells.append((int(round(x)), int(round(y))))
        else:
            cells.append((int(np.floor(x)), int(np.floor(y))))
    return cells


def _goal_cell(env) -> tuple:
    g = env.goal
    return (int(np.floor(g[0])), int(np.floor(g[1])))


def render_ascii(env, trace=None) -> str:
    """One character per cell: ``#`` wall, ``~`` lava, ``G`` goal, ``.`` free.

    Visited cells show a digit 0-9 graded by when they were visited (the last
    visit wins); the goal marker is kept on top.
    """
    lava = getattr(env, "lava", frozenset())
    if isinstance(env, GridCrossingEnv):
        blocked = lambda x, y: (x, y) in env.walls
    else:
        blocked = lambda x, y: bool(env.cell_map[y, x])
    rows = [["#" if blocked(x, y) else "~" if (x, y) in lava else "." for x in range(env.width)]
            for y in range(env.height)]
    cells = _trace_cells(env, trace)
    n = len(cells)
    for i, (x, y) in enumerate(cells):
        if 0 <= x < env.width and 0 <= y < env.height:
            grade = GRADE[(i * (len(GRADE) - 1)) // (n - 1)] if n > 1 else GRADE[0]
            rows[y][x] = grade
    gx, gy = _goal_cell(env)
    rows[gy][gx] = "G"
    return "\n".join("".join(r) for r in rows)


def _gradient(t: float) -> tuple:
    """Blue (early) to red (late)."""
    return (int(40 + 200 * t), 60, int(240 - 200 * t))


def render_image(env, trace=None, scale: int = 16) -> bytes:
    """Binary PPM (P6) of the map, ``width*scale`` by ``height*scale`` pixels."""
    if scale < 1:
        raise ValueError("scale must be positive")
    img = np.empty((env.height * scale, env.width * scale, 3), dtype=np.uint8)
    lava = getattr(env, "lava", frozenset())
    for y in range(env.height):
        for x in range(env.width):
            if isinstance(env, GridCrossingEnv):
                wall = (x, y) in env.walls
            else:
                wall = bool(env.cell_map[y, x])
            colour = _WALL if wall else _LAVA if (x, y) in lava else _FREE
            img[y * scale:(y + 1) * scale, x * scale:(x + 1) * scale] = colour

    def fill(cx: float, cy: float, half: float, colour) -> None:
        x0, x1 = int(max(cx - half, 0)), int(min(cx + half, img.shape[1]))
        y0, y1 = int(max(cy - half, 0)), int(min(cy + half, img.shape[0]))
        img[y0:y1, x0:x1] = colour

    grid = isinstance(env, GridCrossingEnv)
    if grid:
        gx, gy = env.goal
        fill((gx + 0.5) * scale, (gy + 0.5) * scale, scale / 2, _GOAL)
        sx, sy = env.start
        fill((sx + 0.5) * scale, (sy + 0.5) * scale, scale / 4, _START)
    else:
        fill(env.goal[0] * scale, env.goal[1] * scale, scale / 2, _GOAL)
        fill(env.start[0] * scale, env.start[1] * scale, scale / 4, _START)
    if trace is not None:
        n = len(trace)
        for i, step in enumerate(trace):
            t = i / (n - 1) if n > 1 else 0.0
            x, y = step.state[0], step.state[1]
            if grid:
                fill((x + 0.5) * scale, (y + 0.5) * scale, scale / 3, _gradient(t))
            else:
                fill(x * scale, y * scale, max(scale / 8, 1), _gradient(t))
    header = f"P6\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    return header + img.tobytes()
