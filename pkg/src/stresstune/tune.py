"""Stress diagnostics and the stress-guided neighborhood-size sweep.

The figure of merit is the edge-restricted raw stress
``sum_E (||y_i - y_j||^2 - d_ij^2)^2``: it needs no ground truth, so the
sweep can pick the hop radius ``h`` whose stitched embedding scores lowest.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .align import aligned_error, scale_ratio
from .core import Configuration, StressTuneError
from .embed import SMACOF_MAX_ITER, SMACOF_TOL
from .graph import DissimilarityGraph
from .stitch import mds_map_p


def _edge_sq_dists(Y: np.ndarray, ei, ej) -> np.ndarray:
    diff = Y[ei] - Y[ej]
    return np.einsum("ij,ij->i", diff, diff)


def stress(g: DissimilarityGraph, config: Configuration) -> float:
    """Raw stress of a configuration against the observed dissimilarities.

    ``sum over edges of (||y_i - y_j||^2 - d_ij^2)^2``.
    """
    if config.n != g.n:
        raise ValueError("configuration must cover every node")
    sq = _edge_sq_dists(config.points, g.ei, g.ej)
    return float(((sq - g.weights**2) ** 2).sum())


def noiseless_stress(g: DissimilarityGraph, config: Configuration, truth: Configuration) -> float:
    """Stress with observed dissimilarities replaced by true edge distances."""
    if config.n != g.n or truth.n != g.n:
        raise ValueError("configurations must cover every node")
    sq = _edge_sq_dists(config.points, g.ei, g.ej)
    true_sq = _edge_sq_dists(truth.points, g.ei, g.ej)
    return float(((sq - true_sq) ** 2).sum())


def complete_noiseless_stress(config: Configuration, truth: Configuration) -> float:
    """Noiseless stress summed over all unordered pairs, not just edges."""
    if config.n != truth.n:
        raise ValueError("configurations must have the same size")
    iu, ju = np.triu_indices(config.n, k=1)
    sq = _edge_sq_dists(config.points, iu, ju)
    true_sq = _edge_sq_dists(truth.points, iu, ju)
    return float(((sq - true_sq) ** 2).sum())


@dataclass(frozen=True)
class SweepRow:
    """Diagnostics for one swept hop radius."""

    h: int
    stress: float | None
    stress_per_edge: float | None
    embedding_error: float | None
    scale_ratio: float | None
    wall_time_s: float | None
    failed: bool

    def __post_init__(self):
        if self.failed:
            if self.stress is not None or self.stress_per_edge is not None:
                raise ValueError("failed rows must not carry stress values")
        elif self.stress is None or self.stress_per_edge is None:
            raise ValueError("successful rows must carry stress values")


@dataclass(frozen=True)
class SweepReport:
    """Sweep rows (ascending h) plus the stress-minimizing selection."""

    rows: tuple[SweepRow, ...]
    selected_h: int

    def __post_init__(self):
        rows = tuple(self.rows)
        hs = [r.h for r in rows]
        if hs != sorted(set(hs)):
            raise ValueError("rows must be sorted by h without duplicates")
        ok = [r for r in rows if not r.failed]
        if not ok:
            raise ValueError("a report needs at least one successful row")
        best = min(ok, key=lambda r: (r.stress, r.h))
        if best.h != self.selected_h:
            raise ValueError("selected_h must be the stress argmin (ties toward smaller h)")
        object.__setattr__(self, "rows", rows)

    def row(self, h: int) -> SweepRow:
        for r in self.rows:
            if r.h == h:
                return r
        raise KeyError(f"no row for h={h}")

    @property
    def selected_row(self) -> SweepRow:
        return self.row(self.selected_h)

    def to_json(self, include_timing: bool = False) -> str:
        """Serialize to the stable JSON schema.

        Wall times are nondeterministic, so they serialize as null unless
        ``include_timing`` is set; reruns of a seeded pipeline then produce
        byte-identical output.
        """
        rows = []
        for r in self.rows:
            rows.append(
                {
                    "h": r.h,
                    "stress": r.stress,
                    "stress_per_edge": r.stress_per_edge,
                    "embedding_error": r.embedding_error,
                    "scale_ratio": r.scale_ratio,
                    "wall_time_s": r.wall_time_s if include_timing else None,
                    "failed": r.failed,
                }
            )
        return json.dumps({"rows": rows, "selected_h": self.selected_h}, indent=2) + "\n"

    def to_csv(self, include_timing: bool = False) -> str:
        """CSV with the same columns and null policy as the JSON form."""
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            ["h", "stress", "stress_per_edge", "embedding_error", "scale_ratio",
             "wall_time_s", "failed"]
        )

        def fmt(x):
            return "" if x is None else repr(float(x))

        for r in self.rows:
            writer.writerow(
                [
                    r.h,
                    fmt(r.stress),
                    fmt(r.stress_per_edge),
                    fmt(r.embedding_error),
                    fmt(r.scale_ratio),
                    fmt(r.wall_time_s if include_timing else None),
                    "true" if r.failed else "false",
                ]
            )
        return buf.getvalue()


def sweep_hops(
    g: DissimilarityGraph,
    p: int,
    hs,
    truth: Configuration | None = None,
    refine_patches: bool = True,
    final_refine: bool = True,
    max_iter: int = SMACOF_MAX_ITER,
    tol: float = SMACOF_TOL,
    workers: int = 1,
    embeddings: dict | None = None,
) -> SweepReport:
    """Stitch the graph at each hop radius and score the results by stress.

    Hop values failing with a domain error are kept as ``failed`` rows.
    When ``truth`` is given, rows also carry the aligned embedding error and
    the scale ratio. Pass a dict as ``embeddings`` to receive the per-h
    configurations. ``workers > 1`` sweeps hop values concurrently; results
    are independent of the schedule.
    """
    hs = sorted({int(h) for h in hs})
    if not hs:
        raise ValueError("need at least one hop value")
    if any(h < 1 for h in hs):
        raise ValueError("hop values must be >= 1")
    if truth is not None and truth.n != g.n:
        raise ValueError("truth configuration must cover every node")
    g.csgraph_csr()
    g.structure_csr()

    def run(h: int) -> tuple[SweepRow, Configuration | None]:
        start = time.perf_counter()
        try:
            config = mds_map_p(
                g,
                h,
                p,
                refine_patches=refine_patches,
                final_refine=final_refine,
                max_iter=max_iter,
                tol=tol,
            )
        except StressTuneError:
            return (
                SweepRow(
                    h=h,
                    stress=None,
                    stress_per_edge=None,
                    embedding_error=None,
                    scale_ratio=None,
                    wall_time_s=time.perf_counter() - start,
                    failed=True,
                ),
                None,
            )
        s = stress(g, config)
        err = aligned_error(config, truth) if truth is not None else None
        ratio = scale_ratio(config, truth) if truth is not None else None
        row = SweepRow(
            h=h,
            stress=s,
            stress_per_edge=s / g.edge_count if g.edge_count else 0.0,
            embedding_error=err,
            scale_ratio=ratio,
            wall_time_s=time.perf_counter() - start,
            failed=False,
        )
        return row, config

    if workers > 1 and len(hs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, hs))
    else:
        outcomes = [run(h) for h in hs]

    rows = []
    for (row, config), h in zip(outcomes, hs):
        rows.append(row)
        if embeddings is not None and config is not None:
            embeddings[h] = config
    ok = [r for r in rows if not r.failed]
    if not ok:
        raise StressTuneError(f"every swept hop value failed: {hs}")
    selected = min(ok, key=lambda r: (r.stress, r.h)).h
    return SweepReport(rows=tuple(rows), selected_h=selected)
