"""Deterministic pixel-grid MDP with a reward-irrelevant distractor region.

Rendering intensities: agent 1.0, distractor 0.75, goal 0.5, wall 0.25,
background 0.0. The agent overdraws the goal (and anything else) on its cell.
"""

import json
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

ACTIONS = ("up", "down", "left", "right")
MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))

AGENT, DISTRACTOR, GOAL, WALL = 1.0, 0.75, 0.5, 0.25


def _cells(cells):
    return frozenset(tuple(int(v) for v in c) for c in cells)


@dataclass(frozen=True)
class GridSpec:
    grid_rows: int = 8
    grid_cols: int = 8
    cell_pixels: int = 5
    start: tuple = (0, 0)
    goal: tuple = (7, 7)
    walls: frozenset = field(default_factory=frozenset)
    distractor_cells: frozenset = field(default_factory=frozenset)
    step_penalty: float = -0.01
    goal_reward: float = 1.0
    max_steps: int = 100
    gamma: float = 0.99

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(int(v) for v in self.start))
        object.__setattr__(self, "goal", tuple(int(v) for v in self.goal))
        object.__setattr__(self, "walls", _cells(self.walls))
        object.__setattr__(self, "distractor_cells", _cells(self.distractor_cells))
        if min(self.grid_rows, self.grid_cols, self.cell_pixels, self.max_steps) < 1:
            raise ValueError("grid dimensions, cell_pixels and max_steps must be positive")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"discount must lie in (0, 1], got {self.gamma}")
        for cell in (self.start, self.goal, *self.walls, *self.distractor_cells):
            if not self.in_bounds(cell):
                raise ValueError(f"cell {cell} outside the {self.grid_rows}x{self.grid_cols} grid")
        if self.start == self.goal:
            raise ValueError("start and goal coincide")
        if self.start in self.walls or self.goal in self.walls:
            raise ValueError("start or goal placed on a wall")
        overlap = self.distractor_cells & (self.walls | {self.start, self.goal})
        if overlap:
            raise ValueError(f"distractor cells overlap walls/start/goal: {sorted(overlap)}")

    def in_bounds(self, cell):
        return 0 <= cell[0] < self.grid_rows and 0 <= cell[1] < self.grid_cols

    @property
    def observation_shape(self):
        return (self.grid_rows * self.cell_pixels, self.grid_cols * self.cell_pixels)

    @property
    def action_count(self):
        return len(ACTIONS)

    def to_dict(self):
        return {
            "grid_rows": self.grid_rows,
            "grid_cols": self.grid_cols,
            "cell_pixels": self.cell_pixels,
            "start": list(self.start),
            "goal": list(self.goal),
            "walls": sorted(list(c) for c in self.walls),
            "distractor_cells": sorted(list(c) for c in self.distractor_cells),
            "step_penalty": self.step_penalty,
            "goal_reward": self.goal_reward,
            "max_steps": self.max_steps,
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)


def default_spec():
    """8x8 desk map, 40x40 observations.

    The distractor band (two cells, bottom-left corner) is sealed off by walls,
    so it is never visited and its pixels are identical in every frame.
    """
    walls = {(6, 0), (6, 1), (7, 2), (2, 2), (2, 3), (2, 4), (5, 4), (5, 5), (5, 6)}
    return GridSpec(walls=walls, distractor_cells={(7, 0), (7, 1)})


def save_spec(spec, path):
    with open(path, "w") as fh:
        json.dump(spec.to_dict(), fh, indent=2)
        fh.write("\n")


def load_spec(path):
    with open(path) as fh:
        return GridSpec.from_dict(json.load(fh))


@dataclass(frozen=True)
class EnvState:
    agent_cell: tuple
    steps_taken: int = 0
    terminal: bool = False


def _static_frame(spec):
    p = spec.cell_pixels
    frame = np.zeros(spec.observation_shape)
    for cells, value in ((spec.walls, WALL), ({spec.goal}, GOAL), (spec.distractor_cells, DISTRACTOR)):
        for r, c in cells:
            frame[r * p:(r + 1) * p, c * p:(c + 1) * p] = value
    return frame


def render(spec, state):
    cell = state.agent_cell
    if not spec.in_bounds(cell) or cell in spec.walls:
        raise ValueError(f"invalid agent cell {cell}")
    frame = _static_frame(spec)
    p = spec.cell_pixels
    r, c = cell
    frame[r * p:(r + 1) * p, c * p:(c + 1) * p] = AGENT
    return frame


def reset(spec):
    state = EnvState(spec.start)
    return state, render(spec, state)


def next_cell(spec, cell, action):
    dr, dc = MOVES[action]
    target = (cell[0] + dr, cell[1] + dc)
    if not spec.in_bounds(target) or target in spec.walls:
        return cell
    return target


def step(spec, state, action):
    """One deterministic transition: (state', observation', reward, terminal)."""
    if state.terminal:
        raise ValueError("step called on a terminal state")
    if not 0 <= action < len(ACTIONS):
        raise ValueError(f"unknown action {action}")
    cell = next_cell(spec, state.agent_cell, action)
    at_goal = cell == spec.goal
    reward = spec.goal_reward if at_goal else spec.step_penalty
    steps = state.steps_taken + 1
    terminal = at_goal or steps >= spec.max_steps
    new_state = EnvState(cell, steps, terminal)
    return new_state, render(spec, new_state), reward, terminal


def free_cells(spec):
    return [
        (r, c)
        for r in range(spec.grid_rows)
        for c in range(spec.grid_cols)
        if (r, c) not in spec.walls
    ]


def shortest_distances(spec):
    """BFS distance (in moves) from every reachable cell to the goal."""
    dist = {spec.goal: 0}
    queue = deque([spec.goal])
    while queue:
        cell = queue.popleft()
        for dr, dc in MOVES:
            prev = (cell[0] - dr, cell[1] - dc)
            if spec.in_bounds(prev) and prev not in spec.walls and prev not in dist:
                # moves are reversible on a grid, so the reverse edge is a real transition
                if next_cell(spec, prev, MOVES.index((dr, dc))) == cell:
                    dist[prev] = dist[cell] + 1
                    queue.append(prev)
    return dist


def shortest_path_actions(spec):
    """Greedy-optimal action per cell: the first action that reduces BFS distance."""
    dist = shortest_distances(spec)
    policy = {}
    for cell, d in dist.items():
        if cell == spec.goal:
            continue
        for a in range(len(ACTIONS)):
            nxt = next_cell(spec, cell, a)
            if dist.get(nxt) == d - 1:
                policy[cell] = a
                break
    return policy


def optimal_return(spec, discounted=True):
    """Return of the shortest path from start; undiscounted when ``discounted`` is False."""
    d = shortest_distances(spec).get(spec.start)
    if d is None:
        raise ValueError("goal unreachable from start")
    g = spec.gamma if discounted else 1.0
    return spec.goal_reward * g ** (d - 1) + spec.step_penalty * sum(g ** t for t in range(d - 1))
