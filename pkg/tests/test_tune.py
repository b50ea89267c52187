import json

import numpy as np
import pytest

import oracles
from conftest import rotation
from stresstune import (
    Configuration,
    DissimilarityGraph,
    RigidMap,
    StressTuneError,
    SweepReport,
    SweepRow,
    complete_noiseless_stress,
    noiseless_stress,
    stress,
    sweep_hops,
)


def complete_graph(points: np.ndarray) -> DissimilarityGraph:
    n = len(points)
    edges = [
        (i, j, float(np.linalg.norm(points[i] - points[j])))
        for i in range(n)
        for j in range(i + 1, n)
    ]
    return DissimilarityGraph(n, edges)


class TestStress:
    def test_exact_realization_is_zero(self, rng):
        # Weights store sqrt(sum of squares), so squaring them back can be an
        # ulp from the direct squared distance; "zero" means machine-zero.
        pts = rng.uniform(size=(8, 2))
        assert stress(complete_graph(pts), Configuration(pts)) <= 1e-30
        g345 = DissimilarityGraph(2, [(0, 1, 5.0)])
        y345 = Configuration([[0.0, 0.0], [3.0, 4.0]])
        assert stress(g345, y345) == 0.0

    def test_single_edge_hand_value(self):
        g = DissimilarityGraph(2, [(0, 1, 1.0)])
        y = Configuration([[0.0, 0.0], [2.0, 0.0]])
        assert stress(g, y) == pytest.approx(9.0)  # (4 - 1)^2

    def test_matches_double_loop(self, rng):
        pts = rng.uniform(size=(10, 2))
        g = complete_graph(rng.uniform(size=(10, 2)))
        want = oracles.stress_double_loop(
            pts, zip(g.ei.tolist(), g.ej.tolist(), g.weights.tolist())
        )
        assert stress(g, Configuration(pts)) == pytest.approx(want, rel=1e-12)

    def test_rigid_invariance(self, rng):
        pts = rng.uniform(size=(9, 2))
        g = complete_graph(rng.uniform(size=(9, 2)))
        base = stress(g, Configuration(pts))
        move = RigidMap(rotation(2.2), np.array([4.0, 5.0]))
        moved = stress(g, move.apply_configuration(Configuration(pts)))
        assert moved == pytest.approx(base, rel=1e-9)

    def test_coverage_mismatch(self, rng):
        g = complete_graph(rng.uniform(size=(5, 2)))
        with pytest.raises(ValueError):
            stress(g, Configuration(rng.uniform(size=(4, 2))))


class TestNoiselessStress:
    def test_congruent_is_zero(self, rng):
        pts = rng.uniform(size=(7, 2))
        g = complete_graph(pts)
        moved = RigidMap(rotation(0.3), np.zeros(2)).apply_configuration(Configuration(pts))
        assert noiseless_stress(g, moved, Configuration(pts)) <= 1e-22

    def test_equals_stress_without_noise(self, rng):
        pts = rng.uniform(size=(8, 2))
        g = complete_graph(pts)
        y = Configuration(rng.uniform(size=(8, 2)))
        assert noiseless_stress(g, y, Configuration(pts)) == stress(g, y)

    def test_matches_direct_summation(self, rng):
        g = complete_graph(rng.uniform(size=(6, 2)))
        y = rng.uniform(size=(6, 2))
        x = rng.uniform(size=(6, 2))
        want = 0.0
        for i, j, _ in zip(g.ei.tolist(), g.ej.tolist(), g.weights.tolist()):
            dy = ((y[i] - y[j]) ** 2).sum()
            dx = ((x[i] - x[j]) ** 2).sum()
            want += (dy - dx) ** 2
        got = noiseless_stress(g, Configuration(y), Configuration(x))
        assert got == pytest.approx(want, rel=1e-12)


class TestCompleteNoiselessStress:
    def test_congruent_is_zero(self, rng):
        pts = rng.uniform(size=(7, 2))
        mirrored = Configuration(pts * np.array([-1.0, 1.0]))
        assert complete_noiseless_stress(mirrored, Configuration(pts)) <= 1e-22

    def test_displaced_point_direct_sum(self, rng):
        x = rng.uniform(size=(5, 2))
        y = x.copy()
        y[2] += [0.1, -0.2]
        want = 0.0
        for i in range(5):
            for j in range(i + 1, 5):
                dy = ((y[i] - y[j]) ** 2).sum()
                dx = ((x[i] - x[j]) ** 2).sum()
                want += (dy - dx) ** 2
        got = complete_noiseless_stress(Configuration(y), Configuration(x))
        assert got == pytest.approx(want, rel=1e-12)

    def test_equals_edge_version_on_complete_graph(self, rng):
        pts = rng.uniform(size=(6, 2))
        g = complete_graph(pts)
        y = Configuration(rng.uniform(size=(6, 2)))
        a = complete_noiseless_stress(y, Configuration(pts))
        b = noiseless_stress(g, y, Configuration(pts))
        assert a == pytest.approx(b, rel=1e-12)


class TestSweepRowAndReport:
    def make_report(self):
        rows = (
            SweepRow(h=1, stress=2.0, stress_per_edge=0.5, embedding_error=None,
                     scale_ratio=None, wall_time_s=0.1, failed=False),
            SweepRow(h=2, stress=1.0, stress_per_edge=0.25, embedding_error=None,
                     scale_ratio=None, wall_time_s=0.2, failed=False),
        )
        return SweepReport(rows=rows, selected_h=2)

    def test_selected_h_must_minimize(self):
        rows = self.make_report().rows
        with pytest.raises(ValueError):
            SweepReport(rows=rows, selected_h=1)

    def test_failed_rows_carry_no_stress(self):
        with pytest.raises(ValueError):
            SweepRow(h=1, stress=1.0, stress_per_edge=1.0, embedding_error=None,
                     scale_ratio=None, wall_time_s=None, failed=True)
        row = SweepRow(h=1, stress=None, stress_per_edge=None, embedding_error=None,
                       scale_ratio=None, wall_time_s=None, failed=True)
        assert row.failed

    def test_json_schema(self):
        report = self.make_report()
        doc = json.loads(report.to_json())
        assert set(doc) == {"rows", "selected_h"}
        assert doc["selected_h"] == 2
        assert [r["h"] for r in doc["rows"]] == [1, 2]
        assert set(doc["rows"][0]) == {
            "h", "stress", "stress_per_edge", "embedding_error",
            "scale_ratio", "wall_time_s", "failed",
        }
        # Timings are suppressed unless explicitly requested, keeping reruns
        # byte-identical.
        assert doc["rows"][0]["wall_time_s"] is None
        timed = json.loads(report.to_json(include_timing=True))
        assert timed["rows"][0]["wall_time_s"] == 0.1

    def test_csv_schema(self):
        report = self.make_report()
        lines = report.to_csv().splitlines()
        assert lines[0] == "h,stress,stress_per_edge,embedding_error,scale_ratio,wall_time_s,failed"
        assert lines[1].startswith("1,2.0,0.5,,,")
        assert lines[1].endswith("false")

    def test_row_lookup(self):
        report = self.make_report()
        assert report.row(2).stress == 1.0
        assert report.selected_row.h == 2
        with pytest.raises(KeyError):
            report.row(3)


class TestSweepHops:
    def test_complete_graph_ties_break_to_smallest_h(self, rng):
        # Every node is one hop from every other, so h=1 and h=2 run the same
        # pipeline and produce identical stress; the tie goes to h=1.
        pts = rng.uniform(size=(6, 2))
        g = complete_graph(pts)
        report = sweep_hops(g, 2, [1, 2])
        assert report.selected_h == 1
        assert report.row(1).stress == report.row(2).stress
        assert report.row(1).stress <= 1e-20

    def test_failed_h_is_marked_not_fatal(self):
        # h=1 patches on a path have only 2 nodes, too small for p=2;
        # h=3 saturates the graph and succeeds.
        g = DissimilarityGraph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
        report = sweep_hops(g, 2, [1, 3])
        assert report.row(1).failed
        assert not report.row(3).failed
        assert report.selected_h == 3

    def test_all_h_failing_raises(self):
        g = DissimilarityGraph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
        with pytest.raises(StressTuneError):
            sweep_hops(g, 2, [1])

    def test_truth_enables_error_and_scale_columns(self, rng):
        pts = rng.uniform(size=(12, 2))
        g = complete_graph(pts)
        report = sweep_hops(g, 2, [1], truth=Configuration(pts))
        row = report.row(1)
        assert row.embedding_error is not None and row.embedding_error < 1e-12
        assert row.scale_ratio == pytest.approx(1.0, abs=1e-6)

    def test_selected_h_invariant_under_uniform_rescaling(self, rng):
        pts = rng.uniform(size=(40, 2))
        from stresstune import knn_graph, apply_multiplicative_noise

        g = apply_multiplicative_noise(knn_graph(Configuration(pts), 6), 0.1, seed=1)
        report = sweep_hops(g, 2, [1, 2, 3])
        scaled = DissimilarityGraph(
            40,
            [(i, j, 7.0 * w) for i, j, w in zip(g.ei.tolist(), g.ej.tolist(), g.weights.tolist())],
        )
        report2 = sweep_hops(scaled, 2, [1, 2, 3])
        assert report.selected_h == report2.selected_h

    def test_hs_sorted_and_deduplicated(self, rng):
        pts = rng.uniform(size=(10, 2))
        g = complete_graph(pts)
        report = sweep_hops(g, 2, [2, 1, 2])
        assert [r.h for r in report.rows] == [1, 2]

    def test_parallel_workers_match_serial(self, rng):
        pts = rng.uniform(size=(50, 2))
        from stresstune import apply_multiplicative_noise, knn_graph

        g = apply_multiplicative_noise(knn_graph(Configuration(pts), 6), 0.1, seed=2)
        serial = sweep_hops(g, 2, [1, 2, 3], truth=Configuration(pts))
        parallel = sweep_hops(g, 2, [1, 2, 3], truth=Configuration(pts), workers=3)
        assert serial.to_json() == parallel.to_json()

    def test_embeddings_out_parameter(self, rng):
        pts = rng.uniform(size=(10, 2))
        g = complete_graph(pts)
        embeddings = {}
        sweep_hops(g, 2, [1, 2], embeddings=embeddings)
        assert set(embeddings) == {1, 2}
        assert embeddings[1].n == 10
