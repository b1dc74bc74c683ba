"""Instrumented pipeline execution and benchmark reports.

An instrumented run executes the configured forward pass a number of times
(three by default, reporting per-repeat means), timing every core-kernel
invocation with a monotonic clock and attributing analytic operation counts
per call. Everything that is not a core kernel (weight initialization,
graph preprocessing, activations, per-edge scaling, bookkeeping) lands in
the ``other`` category.

Timing is never part of any correctness contract: counter arithmetic and
share normalization are asserted, wall times are merely reported. Numerical
outputs of the repeats are audited for bitwise equality as part of the run;
a mismatch raises :class:`ConsistencyError`.

Report wire formats:

- JSON object with top-level keys ``{version, spec, dataset, repeats,
  end_to_end_ns, kernels, time_share, op_share}``, where ``kernels`` is a
  list of ``{name, calls, mean_ns, fp_ops, int_ops, loads, stores}``.
  ``op_share`` maps each kernel with a nonzero operation count to its
  ``{fp, int, load, store}`` percentages.
- CSV with header ``kernel,calls,mean_ns,time_share_pct,fp_ops,int_ops,
  loads,stores`` and one row per kernel.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels, models
from .data import DatasetRecord
from .errors import ConsistencyError, FormatError
from .graph import CooGraph, CsrGraph
from .kernels import OpCounters, ReduceOp
from .models import ModelSpec

__all__ = [
    "REPORT_VERSION",
    "KERNEL_ORDER",
    "KERNEL_SHORT_FORMS",
    "OTHER",
    "KernelStats",
    "RunReport",
    "ComparisonSummary",
    "Instrumentation",
    "instrumented_run",
    "emit_report",
    "report_to_json",
    "report_to_csv",
    "parse_report_json",
    "compare_runs",
]

REPORT_VERSION = "1"

KERNEL_ORDER = ("index_select", "scatter", "sgemm", "spmm", "spgemm")
OTHER = "other"
KERNEL_SHORT_FORMS = {
    "index_select": "is",
    "scatter": "sc",
    "sgemm": "sg",
    "spmm": "sp",
    "spgemm": "sp",
}

_DTYPES = {"f64": np.float64, "f32": np.float32}


@dataclass
class KernelStats:
    """Per-kernel aggregate over one run (means taken across repeats)."""

    kernel: str
    calls: int
    wall_time_ns: float
    counters: OpCounters


@dataclass
class RunReport:
    version: str
    spec: dict
    dataset: dict
    repeats: int
    end_to_end_ns: float
    per_kernel: list
    time_share: dict
    op_share: dict


@dataclass
class ComparisonSummary:
    """Descriptive deltas between two reports (b relative to a)."""

    end_to_end_ratio: float
    time_share_delta: dict
    kernels_only_in_a: list
    kernels_only_in_b: list


class Instrumentation:
    """Kernel dispatcher that times calls and attributes operation counts.

    Duck-types the :mod:`gnnbench.kernels` entry points so pipeline code can
    run against either the bare module or an instance of this class.
    """

    def __init__(self):
        self._calls: dict = {}
        self._ns: dict = {}
        self._counters: dict = {}

    def _record(self, name: str, ns: int, counters: OpCounters):
        self._calls[name] = self._calls.get(name, 0) + 1
        self._ns[name] = self._ns.get(name, 0) + ns
        self._counters[name] = self._counters.get(name, OpCounters()) + counters

    def index_select(self, x, index):
        t0 = time.perf_counter_ns()
        out = kernels.index_select(x, index)
        dt = time.perf_counter_ns() - t0
        self._record("index_select", dt,
                     kernels.index_select_counters(len(index), x.shape[1]))
        return out

    def scatter(self, src, index, n, op=ReduceOp.SUM):
        t0 = time.perf_counter_ns()
        out = kernels.scatter(src, index, n, op)
        dt = time.perf_counter_ns() - t0
        self._record("scatter", dt,
                     kernels.scatter_counters(src.shape[0], src.shape[1], n, op))
        return out

    def sgemm(self, a, b):
        t0 = time.perf_counter_ns()
        out = kernels.sgemm(a, b)
        dt = time.perf_counter_ns() - t0
        self._record("sgemm", dt,
                     kernels.sgemm_counters(a.shape[0], a.shape[1], b.shape[1]))
        return out

    def spmm(self, a: CsrGraph, x):
        t0 = time.perf_counter_ns()
        out = kernels.spmm(a, x)
        dt = time.perf_counter_ns() - t0
        self._record("spmm", dt,
                     kernels.spmm_counters(a.num_rows, a.nnz, x.shape[1]))
        return out

    def spgemm(self, a: CsrGraph, b: CsrGraph):
        work = kernels.spgemm_work(a, b)
        t0 = time.perf_counter_ns()
        out = kernels.spgemm(a, b)
        dt = time.perf_counter_ns() - t0
        self._record("spgemm", dt, kernels.spgemm_counters(work, a.nnz, out.nnz))
        return out

    def snapshot(self) -> dict:
        return {
            name: (self._calls[name], self._ns[name], self._counters[name])
            for name in self._calls
        }


def _synthesize_record(g: CooGraph, x: np.ndarray) -> DatasetRecord:
    return DatasetRecord("custom", "XX", g.num_nodes, x.shape[1],
                         g.num_edges, "synthetic")


def instrumented_run(spec: ModelSpec, g: CooGraph, x: np.ndarray,
                     repeats: int = 3, *, dataset: Optional[DatasetRecord] = None,
                     precision: str = "f64", warmup: int = 0) -> RunReport:
    """Execute the pipeline ``repeats`` times and aggregate a report.

    Weights are initialized once and shared by every repeat; per-edge
    structures are prepared once per run. All repeats must produce bitwise
    identical outputs and identical kernel call/counter profiles, otherwise
    a :class:`ConsistencyError` is raised. Optional warmup passes run before
    any measurement and are not recorded.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if precision not in _DTYPES:
        raise ValueError(f"precision must be one of {sorted(_DTYPES)}")
    dtype = _DTYPES[precision]
    record = dataset if dataset is not None else _synthesize_record(g, x)

    setup_t0 = time.perf_counter_ns()
    g = g.astype(dtype)
    x = np.ascontiguousarray(np.asarray(x), dtype=dtype)
    params = [p.astype(dtype) for p in models.init_weights(spec)]
    ctx = models.prepare(spec, g)
    setup_ns = time.perf_counter_ns() - setup_t0

    for _ in range(warmup):
        models.forward(spec, params, g, x, ctx=ctx)

    repeat_ns = []
    snapshots = []
    baseline = None
    for r in range(repeats):
        instr = Instrumentation()
        t0 = time.perf_counter_ns()
        out = models.forward(spec, params, g, x, instr=instr, ctx=ctx)
        repeat_ns.append(time.perf_counter_ns() - t0)
        snapshots.append(instr.snapshot())
        blob = (out.shape, out.dtype.str, out.tobytes())
        if baseline is None:
            baseline = blob
        elif blob != baseline:
            raise ConsistencyError(
                f"repeat {r} produced numerically different output"
            )

    first = snapshots[0]
    for r, snap in enumerate(snapshots[1:], start=1):
        same = set(snap) == set(first) and all(
            snap[k][0] == first[k][0] and snap[k][2] == first[k][2]
            for k in first
        )
        if not same:
            raise ConsistencyError(
                f"repeat {r} produced a different kernel call profile"
            )

    names = [k for k in KERNEL_ORDER if k in first]
    kernel_total_ns = {k: sum(s[k][1] for s in snapshots) for k in names}
    forward_total_ns = sum(repeat_ns)
    total_ns = setup_ns + forward_total_ns
    other_ns = total_ns - sum(kernel_total_ns.values())

    per_kernel = [
        KernelStats(k, first[k][0], kernel_total_ns[k] / repeats, first[k][2])
        for k in names
    ]
    per_kernel.append(KernelStats(OTHER, 1, other_ns / repeats, OpCounters()))

    denom = total_ns or 1  # perf_counter_ns granularity guard
    time_share = {k: 100.0 * kernel_total_ns[k] / denom for k in names}
    time_share[OTHER] = 100.0 * other_ns / denom

    op_share = {}
    for stats in per_kernel:
        total_ops = stats.counters.total
        if total_ops == 0:
            continue
        op_share[stats.kernel] = {
            "fp": 100.0 * stats.counters.fp_ops / total_ops,
            "int": 100.0 * stats.counters.int_ops / total_ops,
            "load": 100.0 * stats.counters.loads / total_ops,
            "store": 100.0 * stats.counters.stores / total_ops,
        }

    spec_summary = spec.summary()
    spec_summary["precision"] = precision
    return RunReport(
        version=REPORT_VERSION,
        spec=spec_summary,
        dataset=record.summary(),
        repeats=repeats,
        end_to_end_ns=forward_total_ns / repeats,
        per_kernel=per_kernel,
        time_share=time_share,
        op_share=op_share,
    )


def report_to_json(report: RunReport) -> str:
    doc = {
        "version": report.version,
        "spec": report.spec,
        "dataset": report.dataset,
        "repeats": report.repeats,
        "end_to_end_ns": report.end_to_end_ns,
        "kernels": [
            {
                "name": s.kernel,
                "calls": s.calls,
                "mean_ns": s.wall_time_ns,
                **s.counters.as_dict(),
            }
            for s in report.per_kernel
        ],
        "time_share": report.time_share,
        "op_share": report.op_share,
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_report_json(text: str) -> RunReport:
    doc = json.loads(text)
    per_kernel = [
        KernelStats(
            entry["name"],
            entry["calls"],
            entry["mean_ns"],
            OpCounters(entry["fp_ops"], entry["int_ops"], entry["loads"],
                       entry["stores"]),
        )
        for entry in doc["kernels"]
    ]
    return RunReport(
        version=doc["version"],
        spec=doc["spec"],
        dataset=doc["dataset"],
        repeats=doc["repeats"],
        end_to_end_ns=doc["end_to_end_ns"],
        per_kernel=per_kernel,
        time_share=doc["time_share"],
        op_share=doc["op_share"],
    )


def report_to_csv(report: RunReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kernel", "calls", "mean_ns", "time_share_pct",
                     "fp_ops", "int_ops", "loads", "stores"])
    for s in report.per_kernel:
        writer.writerow([
            s.kernel, s.calls, s.wall_time_ns,
            report.time_share.get(s.kernel, 0.0),
            s.counters.fp_ops, s.counters.int_ops, s.counters.loads,
            s.counters.stores,
        ])
    return buf.getvalue()


def emit_report(report: RunReport, format: str, sink) -> None:
    """Serialize a report to a writable text sink as JSON or CSV."""
    if format == "json":
        sink.write(report_to_json(report))
    elif format == "csv":
        sink.write(report_to_csv(report))
    else:
        raise ValueError(f"unknown report format {format!r}")


def compare_runs(a: RunReport, b: RunReport) -> ComparisonSummary:
    """Descriptive comparison of two reports from the same artifact version."""
    if a.version != b.version:
        raise FormatError(
            f"incompatible report versions: {a.version!r} vs {b.version!r}"
        )
    if a.end_to_end_ns <= 0:
        raise ValueError("reference report has non-positive end-to-end time")
    union = sorted(set(a.time_share) | set(b.time_share))
    delta = {
        k: b.time_share.get(k, 0.0) - a.time_share.get(k, 0.0) for k in union
    }
    only_a = sorted(set(a.time_share) - set(b.time_share))
    only_b = sorted(set(b.time_share) - set(a.time_share))
    return ComparisonSummary(
        end_to_end_ratio=b.end_to_end_ns / a.end_to_end_ns,
        time_share_delta=delta,
        kernels_only_in_a=only_a,
        kernels_only_in_b=only_b,
    )
