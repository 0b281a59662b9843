"""Parameter sweeps over (n, m, theta) and their CSV / JSON reports."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

from altbinom import exact, floateval, mc
from altbinom.exact import IdentityInstance, InvalidInstanceError, format_rational, parse_rational
from altbinom.floateval import EvalStrategy, FloatEvalResult
from altbinom.mc import McEstimate, StreamConfig

CSV_COLUMNS = [
    "n",
    "m",
    "theta",
    "exact",
    "exact_decimal",
    "strategy",
    "value",
    "abs_error",
    "rel_error",
    "cancellation_index",
    "mc_p_hat",
    "mc_stderr",
    "mc_samples",
    "mc_seed",
]


class OracleMismatchError(RuntimeError):
    """The two exact routes disagreed. The oracle itself is broken."""


@dataclass(frozen=True)
class ScanGrid:
    n_values: Sequence[int]
    m_values: Sequence[int]
    theta_values: Sequence[Fraction]
    strategies: Sequence[EvalStrategy] = tuple(EvalStrategy)
    mc: Optional[StreamConfig] = None

    def instances(self) -> List[IdentityInstance]:
        """Validated instances, n outermost, then m, then theta in given order."""
        for name in ("n_values", "m_values", "theta_values", "strategies"):
            if not getattr(self, name):
                raise InvalidInstanceError(f"grid field {name} is empty")
        out = []
        for n, m, theta in itertools.product(self.n_values, self.m_values, self.theta_values):
            try:
                inst = IdentityInstance(n, m, theta)
            except InvalidInstanceError as exc:
                raise type(exc)(f"invalid grid point (n={n}, m={m}, theta={theta}): {exc}") from exc
            if inst.theta <= 0:
                raise InvalidInstanceError(
                    f"invalid grid point {inst}: scans need theta > 0 "
                    "(floating-point and Monte Carlo columns are undefined otherwise)"
                )
            out.append(inst)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScanGrid":
        """Build a grid from the grid-file JSON object."""
        unknown = set(data) - {"n", "m", "theta", "strategies", "mc"}
        if unknown:
            raise ValueError(f"unknown grid keys: {sorted(unknown)}")
        try:
            ns = [int(v) for v in data["n"]]
            ms = [int(v) for v in data["m"]]
            thetas = [parse_rational(str(v)) for v in data["theta"]]
        except KeyError as exc:
            raise ValueError(f"grid is missing key {exc}") from None
        strategies = [EvalStrategy.parse(s) for s in data.get("strategies", [])] or list(
            EvalStrategy
        )
        cfg = None
        if data.get("mc"):
            spec = data["mc"]
            seed = spec.get("seed", 42)
            if isinstance(seed, str):
                seed = int(seed, 0)
            cfg = StreamConfig.for_samples(int(spec["samples"]), seed, int(spec.get("chunks", 16)))
        return cls(ns, ms, thetas, strategies, cfg)


@dataclass(frozen=True)
class ReportRow:
    instance: IdentityInstance
    exact_value: Fraction
    float_results: List[FloatEvalResult] = field(default_factory=list)
    mc_result: Optional[McEstimate] = None


def build_row(
    inst: IdentityInstance,
    strategies: Sequence[EvalStrategy],
    mc_cfg: Optional[StreamConfig] = None,
    mc_threads: Optional[int] = 1,
) -> ReportRow:
    lhs = exact.lhs_alternating_sum(inst)
    rhs = exact.rhs_general(inst)
    if lhs != rhs:
        raise OracleMismatchError(
            f"exact routes disagree at {inst}: "
            f"lhs={format_rational(lhs)} rhs={format_rational(rhs)}"
        )
    results = floateval.error_report(inst, strategies)
    mc_result = None
    if mc_cfg is not None and inst.n >= 1:
        mc_result = mc.estimate_p_less(inst, mc_cfg, threads=mc_threads)
    return ReportRow(inst, lhs, results, mc_result)


def run_scan(grid: ScanGrid, threads: Optional[int] = None) -> List[ReportRow]:
    """One row per grid point, in grid order.

    Each row's Monte Carlo stream is seeded from (grid seed, row index).
    """
    instances = grid.instances()

    def job(i: int) -> ReportRow:
        cfg = None
        if grid.mc is not None:
            cfg = StreamConfig(
                mc.derive_seed(grid.mc.seed, i), grid.mc.chunk_count, grid.mc.samples_per_chunk
            )
        return build_row(instances[i], grid.strategies, cfg)

    threads = threads or mc._default_threads()
    if threads == 1:
        return [job(i) for i in range(len(instances))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, range(len(instances))))


def _g17(x: float) -> str:
    return format(x, ".17g")


def _csv_lines(row: ReportRow):
    inst = row.instance
    head = [
        str(inst.n),
        str(inst.m),
        format_rational(inst.theta),
        format_rational(row.exact_value),
        _g17(float(row.exact_value)),
    ]
    if row.mc_result is None:
        tail = ["", "", "", ""]
    else:
        r = row.mc_result
        tail = [_g17(r.p_hat), _g17(r.stderr), str(r.samples), str(r.seed)]
    if not row.float_results:
        yield head + ["", "", "", "", ""] + tail
    for res in row.float_results:
        yield head + res.csv_fields() + tail


def _json_float(x: float):
    return x if math.isfinite(x) else repr(x)


def _unjson_float(x) -> float:
    return float(x)


def _row_to_obj(row: ReportRow) -> dict:
    return {
        "n": row.instance.n,
        "m": row.instance.m,
        "theta": format_rational(row.instance.theta),
        "exact": format_rational(row.exact_value),
        "exact_decimal": float(row.exact_value),
        "float_results": [
            {
                "strategy": r.strategy.label,
                "value": _json_float(r.value),
                "abs_error": _json_float(r.abs_error),
                "rel_error": _json_float(r.rel_error),
                "cancellation_index": _json_float(r.cancellation_index),
            }
            for r in row.float_results
        ],
        "mc": None if row.mc_result is None else row.mc_result.to_dict(),
    }


def emit(rows: Sequence[ReportRow], fmt: str = "csv") -> bytes:
    """Serialise rows as CSV or JSON. Identical rows give identical bytes."""
    if not rows:
        raise ValueError("nothing to emit")
    fmt = fmt.lower()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerows(_csv_lines(row))
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        text = json.dumps([_row_to_obj(r) for r in rows], indent=1, allow_nan=False)
        return (text + "\n").encode("utf-8")
    raise ValueError(f"unknown format {fmt!r} (csv or json)")


def rows_from_json(data: bytes) -> List[ReportRow]:
    """Inverse of ``emit(rows, "json")``."""
    rows = []
    for obj in json.loads(data):
        inst = IdentityInstance(obj["n"], obj["m"], parse_rational(obj["theta"]))
        results = [
            FloatEvalResult(
                EvalStrategy.parse(r["strategy"]),
                _unjson_float(r["value"]),
                _unjson_float(r["abs_error"]),
                _unjson_float(r["rel_error"]),
                _unjson_float(r["cancellation_index"]),
            )
            for r in obj["float_results"]
        ]
        est = McEstimate(**obj["mc"]) if obj["mc"] is not None else None
        rows.append(ReportRow(inst, parse_rational(obj["exact"]), results, est))
    return rows
