import itertools

import numpy as np
import pytest

from advpolicy import env as grid
from advpolicy.env import EnvState, GridSpec

import oracles


@pytest.fixture
def small():
    # distractor pocket in the top-right corner, sealed by two walls
    return GridSpec(grid_rows=4, grid_cols=4, cell_pixels=2, start=(0, 0), goal=(3, 3),
                    walls={(0, 2), (1, 3)}, distractor_cells={(0, 3)}, max_steps=20)


def test_reset(small):
    state, obs = grid.reset(small)
    assert state == EnvState((0, 0), 0, False)
    assert obs.shape == (8, 8)
    _, again = grid.reset(small)
    assert obs.tobytes() == again.tobytes()


def test_rendering_contract(small):
    _, obs = grid.reset(small)
    assert np.all(obs[0:2, 0:2] == 1.0)  # agent
    assert np.all(obs[6:8, 6:8] == 0.5)  # goal
    assert np.all(obs[0:2, 4:6] == 0.25) and np.all(obs[2:4, 6:8] == 0.25)  # walls
    assert np.all(obs[0:2, 6:8] == 0.75)  # distractor
    assert obs.sum() == 4 * 1.0 + 4 * 0.5 + 8 * 0.25 + 4 * 0.75


def test_single_cell_render():
    spec = GridSpec(grid_rows=1, grid_cols=2, cell_pixels=3, start=(0, 0), goal=(0, 1))
    obs = grid.render(spec, EnvState((0, 0)))
    assert np.all(obs[:, :3] == 1.0)
    assert grid.render(spec, EnvState((0, 1)))[:, 3:].min() == 1.0  # agent overdraws goal


def test_observation_shape():
    spec = GridSpec(grid_rows=3, grid_cols=5, cell_pixels=4, start=(0, 0), goal=(2, 4))
    assert grid.reset(spec)[1].shape == (12, 20) == spec.observation_shape


def test_step_dynamics(small):
    spec = GridSpec(grid_rows=4, grid_cols=4, cell_pixels=2, start=(1, 1), goal=(3, 3))
    s1, _, r, done = grid.step(spec, EnvState((1, 1)), 3)
    assert s1.agent_cell == (1, 2) and r == spec.step_penalty and not done
    s2, _, r, done = grid.step(spec, EnvState((3, 2), 5), 3)
    assert s2.agent_cell == (3, 3) and r == spec.goal_reward and done and s2.terminal
    s3, *_ = grid.step(spec, EnvState((2, 0)), 2)
    assert s3.agent_cell == (2, 0)
    s4, *_ = grid.step(small, EnvState((0, 1)), 3)  # wall at (0, 2)
    assert s4.agent_cell == (0, 1)


def test_step_limit_terminates(small):
    state = EnvState((0, 0), small.max_steps - 1)
    state, _, _, done = grid.step(small, state, 0)
    assert done
    with pytest.raises(ValueError):
        grid.step(small, state, 0)


def test_invalid_specs():
    with pytest.raises(ValueError):
        GridSpec(grid_rows=2, grid_cols=2, start=(0, 0), goal=(0, 0))
    with pytest.raises(ValueError):
        GridSpec(grid_rows=2, grid_cols=2, start=(0, 0), goal=(1, 1), walls={(1, 1)})
    with pytest.raises(ValueError):
        GridSpec(grid_rows=2, grid_cols=2, start=(0, 0), goal=(2, 1))
    with pytest.raises(ValueError):
        GridSpec(grid_rows=2, grid_cols=2, start=(0, 0), goal=(1, 1), gamma=0.0)


def _reachable(spec):
    seen, frontier = {spec.start}, [spec.start]
    while frontier:
        cell = frontier.pop()
        for a in range(4):
            n = grid.next_cell(spec, cell, a)
            if n not in seen:
                seen.add(n)
                frontier.append(n)
    return seen


@pytest.mark.parametrize("make", [lambda: None, grid.default_spec])
def test_distractor_pixels_constant_over_reachable_states(small, make):
    spec = make() or small
    p = spec.cell_pixels
    mask = np.zeros(spec.observation_shape, dtype=bool)
    for r, c in spec.distractor_cells:
        mask[r * p:(r + 1) * p, c * p:(c + 1) * p] = True
    frames = [grid.render(spec, EnvState(c)) for c in _reachable(spec)]
    assert len(frames) > 5
    for f in frames:
        assert np.all(f[mask] == 0.75)


def test_dynamics_deterministic_and_distractor_free(small):
    no_distractor = GridSpec(**{**small.to_dict(), "distractor_cells": []})
    for cell, a in itertools.product(grid.free_cells(small), range(4)):
        if cell == small.goal:
            continue
        one = grid.step(small, EnvState(cell), a)
        two = grid.step(small, EnvState(cell), a)
        bare = grid.step(no_distractor, EnvState(cell), a)
        assert one[0] == two[0] == bare[0]
        assert one[2] == two[2] == bare[2]
        assert one[1].tobytes() == two[1].tobytes()


@pytest.mark.parametrize("make", [grid.default_spec, lambda: GridSpec(grid_rows=4, grid_cols=5, start=(3, 0),
                                                                      goal=(0, 4), walls={(1, 1), (2, 3)})])
def test_optimal_return_matches_value_iteration(make):
    spec = make()
    v = oracles.value_iteration(spec)
    assert abs(grid.optimal_return(spec) - v[spec.start]) < 1e-12
    d = grid.shortest_distances(spec)[spec.start]
    assert abs(grid.optimal_return(spec, discounted=False) - (spec.goal_reward + spec.step_penalty * (d - 1))) < 1e-12


def test_default_spec_layout():
    spec = grid.default_spec()
    assert spec.observation_shape == (40, 40)
    assert (spec.step_penalty, spec.goal_reward, spec.gamma, spec.max_steps) == (-0.01, 1.0, 0.99, 100)
    assert len(spec.distractor_cells) == 2
    assert grid.shortest_distances(spec)[spec.start] == 14


def test_spec_round_trip(tmp_path):
    spec = grid.default_spec()
    grid.save_spec(spec, tmp_path / "env.json")
    assert grid.load_spec(tmp_path / "env.json") == spec
