import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from xico.data import (
    Dataset,
    DegenerateReport,
    load_csv,
    require_valid,
    validate,
    write_csv,
)
from xico.errors import (
    ConstantResponse,
    DataFileNotFound,
    DimensionMismatch,
    MissingColumn,
    NoCovariates,
    NonFinite,
    NonNumericCell,
    TooFewRows,
)


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_three_rows(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,b,y\n1,2,3\n4,5,6\n7,8,9\n"), "y")
        assert (ds.n, ds.d) == (3, 2)
        np.testing.assert_array_equal(ds.x, [[1, 2], [4, 5], [7, 8]])
        np.testing.assert_array_equal(ds.y, [3, 6, 9])
        assert ds.column_names == ("a", "b", "y")

    def test_response_in_the_middle_keeps_file_order(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,y,b\n1,2,3\n4,5,6\n"), "y")
        np.testing.assert_array_equal(ds.x, [[1, 3], [4, 6]])
        assert ds.x_names == ("a", "b")

    def test_scientific_notation(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,y\n1e-3,2.5E2\n-4e1,1\n"), "y")
        np.testing.assert_array_equal(ds.x[:, 0], [1e-3, -40.0])

    def test_non_numeric_cell(self, tmp_path):
        with pytest.raises(NonNumericCell) as info:
            load_csv(write(tmp_path, "a,y\n1,2\nabc,3\n"), "y")
        assert info.value.row == 2 and info.value.col == "a"

    def test_empty_cell_is_rejected(self, tmp_path):
        with pytest.raises(NonNumericCell):
            load_csv(write(tmp_path, "a,y\n1,2\n,3\n"), "y")

    def test_missing_column(self, tmp_path):
        with pytest.raises(MissingColumn, match="'z'"):
            load_csv(write(tmp_path, "a,y\n1,2\n3,4\n"), "z")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFileNotFound):
            load_csv(tmp_path / "nope.csv", "y")

    def test_too_few_rows(self, tmp_path):
        with pytest.raises(TooFewRows):
            load_csv(write(tmp_path, "a,y\n1,2\n"), "y")

    def test_no_covariates(self, tmp_path):
        with pytest.raises(NoCovariates):
            load_csv(write(tmp_path, "y\n1\n2\n"), "y")


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(2, 4)),
           elements=st.floats(-1e300, 1e300, allow_nan=False, allow_infinity=False))
)
def test_csv_round_trip_is_exact(tmp_path_factory, table):
    ds = Dataset(table[:, :-1], table[:, -1])
    path = tmp_path_factory.mktemp("rt") / "ds.csv"
    write_csv(ds, path)
    back = load_csv(path, "y")
    np.testing.assert_array_equal(back.x, ds.x)
    np.testing.assert_array_equal(back.y, ds.y)
    assert back.column_names == ds.column_names


class TestValidate:
    def test_constant_response(self):
        rep = validate(Dataset([[0.0], [1.0], [2.0]], [1.0, 1.0, 1.0]))
        assert isinstance(rep, DegenerateReport) and rep.kind == "constant_response"
        assert isinstance(rep.to_error(), ConstantResponse)

    def test_pass(self):
        ds = Dataset([[0.0], [5.0], [3.0]], [1.0, 2.0, 2.0])
        assert validate(ds) is ds

    def test_non_finite(self):
        ds = Dataset([[0.0, 1.0], [np.inf, 2.0]], [1.0, 2.0])
        rep = validate(ds)
        assert rep.kind == "non_finite" and (rep.row, rep.col) == (2, "x1")
        with pytest.raises(NonFinite):
            require_valid(ds)

    def test_does_not_mutate(self):
        x = np.array([[1.0], [2.0], [np.nan]])
        ds = Dataset(x, [1.0, 2.0, 3.0])
        before = (ds.x.copy(), ds.y.copy())
        validate(ds)
        np.testing.assert_array_equal(ds.x, before[0])
        np.testing.assert_array_equal(ds.y, before[1])


class TestDataset:
    def test_immutable(self):
        ds = Dataset([[1.0], [2.0]], [1.0, 2.0])
        with pytest.raises(ValueError):
            ds.x[0, 0] = 5.0

    def test_copies_input(self):
        x = np.array([[1.0], [2.0]])
        ds = Dataset(x, [1.0, 2.0])
        x[0, 0] = 9.0
        assert ds.x[0, 0] == 1.0

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            Dataset([[1.0], [2.0], [3.0]], [1.0, 2.0])

    def test_vector_x_becomes_one_column(self):
        assert Dataset([1.0, 2.0, 3.0], [3.0, 1.0, 2.0]).d == 1
