"""Deterministic wall/lava layouts for the registered environments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Interior wall and gap positions are drawn once from these seeds; changing
# them changes every benchmark layout.
SIMPLE_CROSSING_SEED = 311
LAVA_CROSSING_SEED = 9


@dataclass(frozen=True)
class GridLayout:
    width: int
    height: int
    walls: frozenset
    lava: frozenset = frozenset()

    def free_cells(self) -> list:
        blocked = self.walls | self.lava
        return [(x, y) for y in range(self.height) for x in range(self.width) if (x, y) not in blocked]


def _border(width: int, height: int) -> set:
    cells = set()
    for x in range(width):
        cells.add((x, 0))
        cells.add((x, height - 1))
    for y in range(height):
        cells.add((0, y))
        cells.add((width - 1, y))
    return cells


def crossing_layout(size: int, n_crossings: int, seed: int, orientation: str = "mixed") -> tuple:
    """Border plus ``n_crossings`` full-length interior lines opened by doors.

    Lines sit on even rows/columns so rooms stay at least one cell wide. Doors
    are chosen along a seeded random spanning tree of the rooms the lines
    carve out, so every free cell is reachable and there is exactly one route
    between any two rooms. With parallel lines this degenerates to one gap
    per line. Returns ``(border, obstacle_cells)``.
    """
    rng = np.random.default_rng(seed)
    evens = list(range(2, size - 2, 2))
    if orientation == "vertical":
        candidates = [("v", p) for p in evens]
    elif orientation == "mixed":
        candidates = [("v", p) for p in evens] + [("h", p) for p in evens]
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    if n_crossings > len(candidates):
        raise ValueError(f"a {size}x{size} grid fits at most {len(candidates)} crossings")
    picks = rng.choice(len(candidates), size=n_crossings, replace=False)
    rivers = sorted(candidates[int(i)] for i in picks)
    border = _border(size, size)
    lines = set()
    for kind, pos in rivers:
        for t in range(1, size - 1):
            lines.add((pos, t) if kind == "v" else (t, pos))

    free = {(x, y) for x in range(1, size - 1) for y in range(1, size - 1)} - lines
    room_of = {}
    for k, comp in enumerate(sorted(connected_components(free), key=min)):
        for cell in comp:
            room_of[cell] = k
    doors = {}
    for cell in sorted(lines):
        x, y = cell
        for a, b in (((x - 1, y), (x + 1, y)), ((x, y - 1), (x, y + 1))):
            if a in room_of and b in room_of and room_of[a] != room_of[b]:
                pair = tuple(sorted((room_of[a], room_of[b])))
                doors.setdefault(pair, []).append(cell)
    parent = list(range(len(set(room_of.values()))))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    pairs = sorted(doors)
    for j in rng.permutation(len(pairs)):
        a, b = pairs[int(j)]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            options = doors[(a, b)]
            lines.discard(options[int(rng.integers(len(options)))])
    return border, lines


def simple_crossing(size: int = 13, n_crossings: int = 4) -> GridLayout:
    border, lines = crossing_layout(size, n_crossings, SIMPLE_CROSSING_SEED, "mixed")
    return GridLayout(size, size, frozenset(border | lines))


def lava_crossing(size: int = 9, n_crossings: int = 2) -> GridLayout:
    border, lines = crossing_layout(size, n_crossings, LAVA_CROSSING_SEED, "vertical")
    return GridLayout(size, size, frozenset(border), frozenset(lines))


def empty_grid(n: int) -> GridLayout:
    """``n`` x ``n`` free interior surrounded by walls."""
    return GridLayout(n + 2, n + 2, frozenset(_border(n + 2, n + 2)))


# Maze maps: '#' wall, '.' free. Row 0 is the top edge; cell (x, y) covers
# [x, x+1] x [y, y+1] in maze units.
OBSTACLE_MAP = (
    "###########",
    "#.........#",
    "#.........#",
    "#.........#",
    "#...###...#",
    "#...###...#",
    "#...###...#",
    "#.........#",
    "#.........#",
    "#.........#",
    "###########",
)

FOUR_ROOMS_MAP = (
    "###########",
    "#....#....#",
    "#....#....#",
    "#.........#",
    "#....#....#",
    "##.#####.##",
    "#....#....#",
    "#....#....#",
    "#.........#",
    "#....#....#",
    "###########",
)

# Cells whose removal turns FourRooms into four sealed rooms.
FOUR_ROOMS_DOORS = ((5, 3), (2, 5), (8, 5), (5, 8))


def maze_cells(rows) -> np.ndarray:
    """Boolean occupancy array indexed ``[y, x]``; True marks a wall."""
    return np.array([[ch == "#" for ch in row] for row in rows], dtype=bool)


def connected_components(free: set) -> list:
    """4-connected components of a set of cells (flood fill)."""
    remaining = set(free)
    components = []
    while remaining:
        seed = remaining.pop()
        stack, comp = [seed], {seed}
        while stack:
            x, y = stack.pop()
            for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if nb in remaining:
                    remaining.remove(nb)
                    comp.add(nb)
                    stack.append(nb)
        components.append(comp)
    return components
