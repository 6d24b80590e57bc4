"""Geometric primitives: lattices, chord and balanced probes, and the
conservative coverage certifier."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marcopolo.geometry import (
    CoverageReport,
    Hexagon,
    Point2,
    Probe,
    balanced_probe_center,
    certify_coverage,
    chord_probe,
    circumscribe,
    hex_lattice,
    uncovered_hulls,
)
from marcopolo.placements import construct_layer


def _hex_contains(hexes, pts: np.ndarray) -> np.ndarray:
    """Vectorized flat-top hexagon membership for an (n, 2) point array."""
    covered = np.zeros(len(pts), dtype=bool)
    s3 = math.sqrt(3)
    for h in hexes:
        qx = np.abs(pts[:, 0] - h.center.x)
        qy = np.abs(pts[:, 1] - h.center.y)
        s = h.side
        inside = (qy <= s3 / 2 * s + 1e-12) & (s3 * qx + qy <= s3 * s + 1e-12)
        covered |= inside
    return covered


class TestHexLattice:
    def test_counts_and_side(self):
        hexes = hex_lattice(2, 1.0)
        assert len(hexes) == 7
        assert all(abs(h.side - 0.5) < 1e-12 for h in hexes)
        assert len(hex_lattice(1, 1.0)) == 1
        assert abs(hex_lattice(1, 1.0)[0].side - 2.0) < 1e-12
        hexes4 = hex_lattice(4, 1.0)
        assert len(hexes4) == 37
        assert all(abs(h.side - 0.2) < 1e-12 for h in hexes4)

    def test_count_formula(self):
        for layers in range(1, 9):
            assert len(hex_lattice(layers, 3.0)) == 1 + 6 * math.comb(layers, 2)

    def test_center_hexagon_last(self):
        for layers in (2, 3, 5):
            last = hex_lattice(layers, 1.0)[-1]
            assert math.hypot(last.center.x, last.center.y) < 1e-12

    def test_lattice_covers_disk(self):
        rng = np.random.default_rng(0)
        for layers in (1, 2, 4, 8):
            for r in (1.0, 5.0, 17.0):
                hexes = hex_lattice(layers, r)
                pts = rng.uniform(-r, r, (20_000, 2))
                pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= r]
                assert _hex_contains(hexes, pts).all()

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            hex_lattice(0, 1.0)
        with pytest.raises(ValueError):
            hex_lattice(2, 0.0)


class TestCircumscribe:
    def test_radius_equals_side(self):
        probe = circumscribe(Hexagon(Point2(0.0, 0.0), 0.5))
        assert probe.center == Point2(0.0, 0.0)
        assert probe.rho == 0.5

    def test_vertices_on_circle(self):
        hexagon = Hexagon(Point2(0.2, -0.1), 0.3)
        probe = circumscribe(hexagon)
        for v in hexagon.vertices():
            assert abs(v.dist(hexagon.center) - probe.rho) < 1e-12

    def test_alg1_lattice_probes(self):
        probes = [circumscribe(h) for h in hex_lattice(2, 1.0)]
        assert len(probes) == 7
        assert all(abs(p.rho - 0.5) < 1e-12 for p in probes)


class TestChordProbe:
    def test_full_radius_is_central(self):
        probe = chord_probe(1.0)
        assert math.hypot(probe.center.x, probe.center.y) < 1e-12

    def test_paper_value(self):
        probe = chord_probe(0.844)
        d = math.hypot(probe.center.x, probe.center.y)
        assert abs(d - math.sqrt(1.0 - 0.844 ** 2)) < 1e-12

    def test_perimeter_arc_width(self):
        # a chord probe of radius rho covers a boundary arc of half-width
        # asin(rho)
        probe = chord_probe(0.6)
        d = math.hypot(probe.center.x, probe.center.y)
        cos_half = (1.0 + d * d - probe.rho ** 2) / (2.0 * d)
        assert abs(math.acos(cos_half) - math.asin(0.6)) < 1e-12

    @given(st.floats(min_value=1e-6, max_value=1.0))
    @settings(max_examples=200, deadline=None)
    def test_chord_identity(self, rho):
        probe = chord_probe(rho)
        d2 = probe.center.x ** 2 + probe.center.y ** 2
        assert abs(d2 + probe.rho ** 2 - 1.0) < 1e-12

    def test_rejects_invalid_radius(self):
        with pytest.raises(ValueError):
            chord_probe(1.5)
        with pytest.raises(ValueError):
            chord_probe(0.0)


class TestBalancedProbeCenter:
    def test_minimal_probe_gives_zero_angle(self):
        theta, _ = balanced_probe_center(0.8, (1.0 - 0.8) / 2.0)
        assert abs(theta) < 1e-12

    def test_reference_value(self):
        theta, _ = balanced_probe_center(0.8125, 0.8125 ** 2)
        assert abs(theta - 0.6249) < 1e-3

    def test_degenerate_annulus(self):
        for rk in (0.1, 0.3, 0.7):
            theta, _ = balanced_probe_center(1.0, rk)
            assert abs(theta - math.atan(rk)) < 1e-12

    def test_rejects_small_probe(self):
        with pytest.raises(ValueError):
            balanced_probe_center(0.8, 0.05)

    def test_equal_subtended_angles(self):
        # the probe's chords on the inner circle and the unit circle
        # subtend the same angle at the origin
        def half_angle(d, big_r, r):
            v = (r * r + d * d - big_r * big_r) / (2.0 * r * d)
            return math.acos(max(-1.0, min(1.0, v)))

        for r1 in (0.75, 0.8125, 0.9):
            for rk in (r1 ** 2, r1 ** 3):
                theta, d = balanced_probe_center(r1, rk)
                inner = half_angle(d, rk, r1)
                outer = half_angle(d, rk, 1.0)
                assert abs(inner - outer) < 1e-9
                assert abs(inner - theta) < 1e-9


class TestCertifyCoverage:
    def test_single_full_probe(self):
        report = certify_coverage([Probe(Point2(0.0, 0.0), 1.0)], 1e-3)
        assert report.certified_covered
        assert report.uncovered_area_upper_bound == 0.0

    def test_alg3_certifies_at_frozen_rho(self):
        layer = construct_layer("ALG3")
        assert certify_coverage(list(layer.probes), 1e-4).certified_covered

    def test_alg3_scheme_fails_below_minimum(self):
        layer = construct_layer("ALG3", rho1=0.82)
        report = certify_coverage(list(layer.probes), 1e-3)
        assert not report.certified_covered
        assert report.uncovered_area_upper_bound > 0.0
        # the gaps sit near the perimeter
        for cluster in report.uncovered_regions:
            radii = np.hypot(cluster[:, 0], cluster[:, 1])
            assert radii.max() > 0.9

    def test_report_invariants(self):
        with pytest.raises(AssertionError):
            CoverageReport(True, 0.1, [], 1e-4)

    def test_soundness_sampling(self, layers):
        # certified placements leave no uncovered random point
        rng = np.random.default_rng(7)
        pts = rng.uniform(-1.0, 1.0, (200_000, 2))
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= 1.0]
        for aid in ("ALG1", "ALG3", "ALG5", "ALG6"):
            placement = layers[aid]
            covered = np.zeros(len(pts), dtype=bool)
            for p in placement.probes:
                covered |= (np.hypot(pts[:, 0] - p.center.x,
                                     pts[:, 1] - p.center.y)
                            <= p.rho + 1e-9)
            assert covered.all(), f"{aid} left uncovered samples"


class TestUncoveredHulls:
    def test_covered_report_empty(self):
        report = certify_coverage([Probe(Point2(0.0, 0.0), 1.0)], 1e-3)
        assert uncovered_hulls(report) == []

    def test_two_gaps_ordered_by_area(self):
        probes = [Probe(Point2(0.35, 0.0), 0.72),
                  Probe(Point2(-0.55, 0.45), 0.5),
                  Probe(Point2(-0.55, -0.45), 0.5),
                  Probe(Point2(-0.9, 0.0), 0.28)]
        report = certify_coverage(probes, 1e-3)
        assert not report.certified_covered
        hulls = uncovered_hulls(report)
        assert len(hulls) >= 2

        def hull_area(poly):
            x, y = poly[:, 0], poly[:, 1]
            return 0.5 * abs(np.dot(x, np.roll(y, -1))
                             - np.dot(y, np.roll(x, -1)))

        areas = [hull_area(h) for h in hulls]
        assert areas == sorted(areas, reverse=True)

    def test_alg4_interior_gap(self):
        layer = construct_layer("ALG4", rho1=0.8)
        report = certify_coverage(list(layer.probes), 2e-3)
        assert not report.certified_covered
        assert len(uncovered_hulls(report)) >= 1
