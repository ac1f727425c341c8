"""
Unit tests for the seeded fuzzing driver
"""

import json

import numpy as np
import pytest

from src.errors import DimensionTooLarge
from src.fuzz import INVARIANTS, FuzzRunner, random_weights
from src.kisin import random_shaped_module


def test_random_weights():
    rng = np.random.default_rng(0)
    for d in range(1, 7):
        weights = random_weights(5, d, rng)
        assert len(set(weights)) == d
        assert 0 in weights
        assert all(0 <= t <= 5 for t in weights)


@pytest.mark.parametrize('kwargs, error', [
    ({'d': 6}, DimensionTooLarge),
    ({'p': 3, 'd': 5}, DimensionTooLarge),
    ({'d': 0}, DimensionTooLarge),
    ({'count': 0}, ValueError),
])
def test_runner_bounds(kwargs, error):
    with pytest.raises(error):
        FuzzRunner(**kwargs)


def test_run_is_deterministic():
    first = FuzzRunner(d=3, count=6, seed=11).run()
    second = FuzzRunner(d=3, count=6, seed=11).run()
    assert first == second
    assert sorted(first['tallies']) == sorted(INVARIANTS)


def test_small_run_has_no_failures():
    summary = FuzzRunner(d=3, count=8, seed=2).run()
    assert summary['failures'] == []
    assert summary['tallies']['shape_clean'] == {'passed': 8, 'failed': 0}
    assert summary['tallies']['engine_agreement']['passed'] == 1
    lifted = summary['tallies']['lift_certificate']['passed']
    assert lifted + summary['not_generic'] == 8


def test_rank_one_run():
    summary = FuzzRunner(d=1, count=3, seed=0).run()
    assert summary['d'] == 1
    assert summary['not_generic'] == 0
    assert summary['failures'] == []


def test_write_corpus(tmp_path):
    runner = FuzzRunner(d=2, count=2, seed=5)
    summary = runner.run()
    module = random_shaped_module(runner.params, 2, (3, 0), seed=1)
    runner.failures.append({'index': 7, 'invariant': 'shape_clean', 'module': module})

    out = runner.write_corpus(tmp_path / 'corpus', summary)
    assert json.loads((out / 'summary.json').read_text()) == summary
    assert (out / 'summary.csv').read_text().startswith('invariant,passed,failed')
    failure = json.loads((out / 'failures' / 'item_7.json').read_text())
    assert failure['kisin_module']['d'] == 2


@pytest.mark.slow
def test_long_run_over_extension_field():
    summary = FuzzRunner(p=5, f=2, d=3, count=200, seed=1).run()
    assert summary['failures'] == []
