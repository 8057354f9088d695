import numpy as np
import pytest

from chainfactor import (
    Distribution,
    DualObjectiveContext,
    FileFormatError,
    Partition,
    ProductSpace,
    RowSumError,
    StationarityError,
    StochasticMatrix,
    ValidationError,
    dual_value,
    load_chain_file,
    save_chain_file,
)
from chainfactor.models import CurieWeissParams, curie_weiss_chain
from conftest import random_family


def test_json_round_trip_is_bit_exact(tmp_path):
    family = random_family((2, 3), 2, seed=1)
    path = tmp_path / "chains.json"
    named = [("first", family.members[0]), ("second", family.members[1])]
    save_chain_file(path, family.pi.space, family.pi, named)
    space, pi, loaded = load_chain_file(path)
    assert space.dims == (2, 3)
    assert np.array_equal(pi.values, family.pi.values)
    assert [name for name, _ in loaded] == ["first", "second"]
    for (_, original), (_, reloaded) in zip(named, loaded):
        assert np.array_equal(original.entries, reloaded.entries)


def test_csv_round_trip_is_bit_exact(tmp_path):
    family = random_family((2, 2), 1, seed=2)
    path = tmp_path / "kernel.csv"
    save_chain_file(path, family.pi.space, family.pi, [("kernel", family.members[0])])
    space, pi, loaded = load_chain_file(path)
    assert space.dims == (2, 2)
    assert np.array_equal(pi.values, family.pi.values)
    name, matrix = loaded[0]
    assert name == "kernel"
    assert np.array_equal(matrix.entries, family.members[0].entries)


def test_csv_holds_exactly_one_matrix(tmp_path):
    family = random_family((2, 2), 2, seed=3)
    named = [("a", family.members[0]), ("b", family.members[1])]
    with pytest.raises(ValidationError):
        save_chain_file(tmp_path / "two.csv", family.pi.space, family.pi, named)


def test_row_sum_violation_names_the_row(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(
        '{"dims": [2], "pi": [0.5, 0.5],'
        ' "matrices": {"bad": [[0.5, 0.5], [0.45, 0.45]]}}'
    )
    with pytest.raises(RowSumError, match="row 1"):
        load_chain_file(path)


def test_stationarity_violation_is_distinct(tmp_path):
    path = tmp_path / "drift.json"
    path.write_text(
        '{"dims": [2], "pi": [0.9, 0.1],'
        ' "matrices": {"drift": [[0.1, 0.9], [0.9, 0.1]]}}'
    )
    with pytest.raises(StationarityError):
        load_chain_file(path)


def test_malformed_json_is_a_format_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(FileFormatError):
        load_chain_file(path)
    path2 = tmp_path / "empty.json"
    path2.write_text('{"dims": [2], "pi": [0.5, 0.5]}')
    with pytest.raises(FileFormatError, match="matrices"):
        load_chain_file(path2)


def test_malformed_csv_is_a_format_error(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text("pi=0.5,0.5\n0.5,0.5\n0.5,0.5\n")
    with pytest.raises(FileFormatError, match="dims"):
        load_chain_file(path)


def test_unsupported_extension(tmp_path):
    path = tmp_path / "chains.yaml"
    path.write_text("dims: [2]")
    with pytest.raises(FileFormatError, match="extension"):
        load_chain_file(path)


def test_missing_file_raises_file_not_found(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_chain_file(tmp_path / "absent.json")


def test_loaded_chain_reproduces_in_process_dual_value(tmp_path):
    matrix, pi = curie_weiss_chain(CurieWeissParams(d=2, T=10.0, h_field=1.0))
    path = tmp_path / "spin2.json"
    save_chain_file(path, matrix.space, pi, [("base", matrix)])
    _, pi_loaded, loaded = load_chain_file(path)
    from chainfactor import ChainFamily

    partition = Partition(((1,), (2,)))
    original = DualObjectiveContext(ChainFamily((matrix,), pi), partition)
    reloaded = DualObjectiveContext(ChainFamily((loaded[0][1],), pi_loaded), partition)
    assert dual_value(reloaded, [1.0]) == dual_value(original, [1.0])
