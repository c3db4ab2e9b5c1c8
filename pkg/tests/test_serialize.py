import json

import numpy as np
import pytest
from conftest import random_config, random_interaction

from gibbslab.errors import InputError
from gibbslab.lattice import Shape
from gibbslab.serialize import (
    configuration_from_dict,
    configuration_to_dict,
    dumps,
    interaction_from_dict,
    interaction_to_dict,
    load_json,
    sft_from_dict,
    sft_to_dict,
)
from gibbslab.zoo import coloring, hardcore, sunny


@pytest.mark.parametrize("sft", [hardcore(1), hardcore(2), coloring(4, 2), sunny(1)])
def test_space_round_trip(sft):
    again = sft_from_dict(json.loads(dumps(sft_to_dict(sft))))
    assert sft_to_dict(again) == sft_to_dict(sft)
    assert again.forbidden == sft.forbidden and again.count_limits == sft.count_limits


def test_unknown_symbol_rejected():
    d = sft_to_dict(hardcore(1))
    d["forbidden"][0]["symbols"] = ["1", "7"]
    with pytest.raises(InputError):
        sft_from_dict(d)


def test_missing_alphabet_rejected():
    with pytest.raises(InputError):
        sft_from_dict({"dimension": 1})


def test_configuration_round_trip(rng):
    sft = coloring(5, 2)
    for _ in range(20):
        x = random_config(sft, Shape.ball(3, 2), rng)
        again = configuration_from_dict(json.loads(dumps(configuration_to_dict(x, sft))), sft)
        assert all(again[s] == x[s] for s in Shape.ball(6, 2))


def test_configuration_needs_background():
    with pytest.raises(InputError):
        configuration_from_dict({"patch": {}}, hardcore(1))


def test_interaction_round_trip():
    rng = np.random.Generator(np.random.Philox(2))
    for _ in range(20):
        phi = random_interaction(rng, q=3)
        again = interaction_from_dict(json.loads(dumps(interaction_to_dict(phi))))
        assert again.entries == phi.entries


def test_pattern_strings_use_alphabet():
    d = {"entries": [{"shape": [[0], [1]], "table": {"10": 0.5, "01": -1}}]}
    phi = interaction_from_dict(d, hardcore(1))
    assert phi.entries[Shape.interval(0, 1)] == {(1, 0): 0.5, (0, 1): -1.0}


def test_pattern_string_length_checked():
    d = {"entries": [{"shape": [[0], [1]], "table": {"1": 0.5}}]}
    with pytest.raises(InputError):
        interaction_from_dict(d, hardcore(1))


def test_dumps_is_sorted_and_stable():
    a = dumps({"b": 1, "a": [np.int64(2), (3, 4)]})
    assert a == dumps({"a": [2, [3, 4]], "b": 1}) and a.endswith("\n")


def test_load_json_errors(tmp_path):
    with pytest.raises(InputError):
        load_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(InputError):
        load_json(bad)
