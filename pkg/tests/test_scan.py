import csv
import io
import json
from fractions import Fraction

import pytest

from altbinom import exact, scan
from altbinom.exact import InvalidInstanceError, PoleError
from altbinom.floateval import EvalStrategy
from altbinom.mc import StreamConfig
from altbinom.scan import CSV_COLUMNS, OracleMismatchError, ScanGrid, emit, rows_from_json, run_scan

NAIVE, PRODUCT = EvalStrategy.NAIVE_SUM, EvalStrategy.PRODUCT_FORM


def test_single_row():
    rows = run_scan(ScanGrid([0], [1], [Fraction(1)]))
    assert len(rows) == 1
    assert rows[0].exact_value == 1
    assert rows[0].mc_result is None


def test_two_m_values():
    rows = run_scan(ScanGrid([2], [1, 2], [Fraction(1)]))
    assert [r.exact_value for r in rows] == [Fraction(1, 3), Fraction(11, 18)]


def test_cancellation_row():
    (row,) = run_scan(ScanGrid([60], [1], [Fraction(1)], [NAIVE, PRODUCT]))
    res = {r.strategy: r for r in row.float_results}
    assert res[NAIVE].rel_error >= 1e-2
    assert res[PRODUCT].rel_error <= 1e-13


def test_order_and_count():
    grid = ScanGrid([3, 1, 2], [2, 1], [Fraction(2), Fraction(1, 2)])
    rows = run_scan(grid, threads=1)
    assert len(rows) == 3 * 2 * 2
    keys = [(r.instance.n, r.instance.m, r.instance.theta) for r in rows]
    assert keys[:4] == [(3, 2, 2), (3, 2, Fraction(1, 2)), (3, 1, 2), (3, 1, Fraction(1, 2))]
    for r in rows:
        assert r.exact_value == exact.lhs_alternating_sum(r.instance) == exact.rhs_general(r.instance)


def test_validation_before_sweep():
    with pytest.raises(PoleError, match="n=2, m=1, theta=-1"):
        run_scan(ScanGrid([2, 0], [1], [Fraction(-1)]))
    with pytest.raises(InvalidInstanceError):
        run_scan(ScanGrid([], [1], [Fraction(1)]))
    with pytest.raises(InvalidInstanceError):
        run_scan(ScanGrid([1], [1], [Fraction(-1, 2)]))


def test_oracle_mismatch_aborts(monkeypatch):
    monkeypatch.setattr(exact, "rhs_general", lambda inst: Fraction(0))
    with pytest.raises(OracleMismatchError):
        run_scan(ScanGrid([2], [1], [Fraction(1)]))


def test_csv_shape():
    rows = run_scan(ScanGrid([4], [1], [Fraction(1)], [NAIVE, PRODUCT]))
    lines = emit(rows, "csv").decode().splitlines()
    assert len(lines) == 1 + 2
    parsed = list(csv.reader(lines))
    assert parsed[0] == CSV_COLUMNS
    assert {len(p) for p in parsed} == {len(CSV_COLUMNS)}
    assert parsed[1][3] == "1/5" and parsed[1][5] == "NaiveSum"
    assert parsed[1][-4:] == ["", "", "", ""]


def test_csv_with_mc_columns():
    grid = ScanGrid([0, 2], [1, 2], [Fraction(1)], [NAIVE], StreamConfig.for_samples(4000, 99, 4))
    rows = run_scan(grid)
    assert rows[0].mc_result is None and rows[1].mc_result is None
    seeds = {r.mc_result.seed for r in rows[2:]}
    assert len(seeds) == 2 and 99 not in seeds
    data = list(csv.DictReader(io.StringIO(emit(rows, "csv").decode())))
    assert data[0]["mc_p_hat"] == ""
    assert int(data[2]["mc_samples"]) == 4000
    assert data[2]["exact"] == "1/3"
    assert float(data[2]["exact_decimal"]) == float(Fraction(1, 3))


def test_mc_rows_reproducible_across_threads():
    grid = ScanGrid([1, 3], [1, 2], [Fraction(1), Fraction(3)], mc=StreamConfig.for_samples(8000, 5, 4))
    assert emit(run_scan(grid, threads=1)) == emit(run_scan(grid, threads=4))


def test_emit_deterministic():
    grid = ScanGrid([1, 5], [1, 3], [Fraction(2, 3)], mc=StreamConfig.for_samples(2000, 1, 2))
    rows = run_scan(grid)
    assert emit(rows, "csv") == emit(rows, "csv")
    assert emit(rows, "json") == emit(rows, "json")
    assert emit(run_scan(grid), "json") == emit(rows, "json")


def test_json_roundtrip():
    grid = ScanGrid([0, 3, 60], [1, 2], [Fraction(1), Fraction(7, 3)], mc=StreamConfig.for_samples(1000, 3, 2))
    rows = run_scan(grid)
    blob = emit(rows, "json")
    objs = json.loads(blob)
    assert objs[-1]["exact"] == exact.format_rational(rows[-1].exact_value)
    assert rows_from_json(blob) == rows


def test_json_nonfinite_values():
    rows = run_scan(ScanGrid([1000], [1], [Fraction(1, 1000)], [NAIVE]))
    blob = emit(rows, "json")
    assert rows_from_json(blob) == rows


def test_emit_errors():
    with pytest.raises(ValueError):
        emit([], "csv")
    rows = run_scan(ScanGrid([0], [1], [Fraction(1)]))
    with pytest.raises(ValueError):
        emit(rows, "xml")


def test_grid_from_dict():
    grid = ScanGrid.from_dict(
        {"n": [1, 2], "m": [1], "theta": ["1/2", "3"], "strategies": ["naive", "product"],
         "mc": {"samples": 1000, "seed": "0x2a", "chunks": 4}}
    )
    assert grid.theta_values == [Fraction(1, 2), Fraction(3)]
    assert grid.strategies == [NAIVE, PRODUCT]
    assert grid.mc == StreamConfig(42, 4, 250)
    with pytest.raises(ValueError):
        ScanGrid.from_dict({"n": [1], "m": [1], "theta": ["0.5"]})
    with pytest.raises(ValueError):
        ScanGrid.from_dict({"n": [1], "m": [1]})
    with pytest.raises(ValueError):
        ScanGrid.from_dict({"n": [1], "m": [1], "theta": ["1"], "colour": 1})
