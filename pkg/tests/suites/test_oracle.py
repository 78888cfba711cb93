"""Numeric quaternion oracle: angles, coordinates, phi_t, slices, Hessian, fibers."""

from fractions import Fraction as F
from pathlib import Path
import math
import tempfile

import numpy as np

from tests.framework import test, suite, TestCategory, Assertions

from pillowcurve import oracle
from pillowcurve.errors import OracleToleranceError, PillowcurveError
from pillowcurve.oracle import (
    C3Point,
    I,
    J,
    ONE,
    conjugate_by,
    equatorial,
    phi_closed,
    phi_t,
    pillowcase_coords,
    random_unit,
    rel_angle,
    representation,
)


oracle_suite = suite("oracle", TestCategory.ORACLE)


@test("oracle", "relative_angle_examples")
def test_relative_angle_examples(assert_: Assertions):
    assert_.close(rel_angle(I, equatorial(3 * math.pi / 2), J), 3 * math.pi / 2, 1e-12)
    assert_.close(rel_angle(I, I, J), 0.0, 1e-12)
    assert_.close(rel_angle(I, J, J), math.pi / 2, 1e-12)

    rng = np.random.default_rng(3)
    y = equatorial(2.2)
    for _ in range(10):
        g = random_unit(rng)
        moved = [conjugate_by(g, q) for q in (I, y, J)]
        assert_.close(rel_angle(*moved), 2.2, 1e-9)


@test("oracle", "relative_angle_rejects_bad_input")
def test_relative_angle_rejects_bad_input(assert_: Assertions):
    assert_.raises(lambda: rel_angle(ONE, I, J), OracleToleranceError)
    assert_.raises(lambda: rel_angle(I, J, I), OracleToleranceError)
    k = np.array([0.0, 0.0, 0.0, 1.0])
    e = assert_.raises(lambda: rel_angle(I, k, J), OracleToleranceError)
    assert_.equal(e.exit_code, 4)


@test("oracle", "pillowcase_coords_round_trip")
def test_pillowcase_coords_round_trip(assert_: Assertions):
    for gamma, theta in ((1.0, 4.0), (2.5, 0.3), (0.2, 5.9)):
        got = pillowcase_coords(*representation(gamma, theta))
        assert_.all_close(got, (gamma, theta), 1e-9)
    assert_.raises(lambda: pillowcase_coords(I, I, J, I), OracleToleranceError)
    report = oracle.coords_check(samples=200, seed=1)
    assert_.true(report.passed, report.summary())


@test("oracle", "phi_at_zero_perturbation")
def test_phi_at_zero_perturbation(assert_: Assertions):
    rng = np.random.default_rng(0)
    g, th, al, be = (rng.uniform(0, 2 * math.pi, 50) for _ in range(4))
    assert_.all_close(oracle.phi_quaternion(0.0, g, th, al, be), np.sin(g) * np.cos(al), 1e-12)
    assert_.all_close(phi_closed(0.0, g, th, al, be), np.sin(g) * np.cos(al), 1e-12)


@test("oracle", "phi_known_value")
def test_phi_known_value(assert_: Assertions):
    value, closed = phi_t(C3Point(0.0, math.pi / 2, math.pi / 2, math.pi / 4, t=0.1))
    assert_.close(value, math.sin(0.2) / 2, 1e-12)
    assert_.close(closed, math.sin(0.2) / 2, 1e-12)


@test("oracle", "phi_is_iota_invariant")
def test_phi_is_iota_invariant(assert_: Assertions):
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = C3Point(*rng.uniform(0, 2 * math.pi, 2), rng.uniform(0, math.pi),
                    rng.uniform(0, 2 * math.pi), t=0.3)
        assert_.close(phi_t(p)[0], phi_t(p.iota())[0], 1e-12)


@test("oracle", "c3_agreement_reports")
def test_c3_agreement_reports(assert_: Assertions):
    report = oracle.c3_check(0.3, samples=2000, seed=2)
    assert_.true(report.passed, report.summary())
    assert_.true(report.summary().startswith("c3: PASS"))

    at_zero = oracle.c3_check(0.0, samples=2000)
    assert_.true(at_zero.passed)
    assert_.contains(at_zero.details, "identity")


@test("oracle", "c3_agreement_over_random_perturbations")
def test_c3_agreement_over_random_perturbations(assert_: Assertions):
    report = oracle.c3_check((0.0, 0.3), samples=100_000, seed=7)
    assert_.true(report.passed, report.summary())
    assert_.equal(report.details["samples"], 100_000)
    assert_.true(report.max_residual < oracle.AGREEMENT_TOL)


@test("oracle", "sign_function_and_endpoint_opposition")
def test_sign_function_and_endpoint_opposition(assert_: Assertions):
    assert_.close(float(oracle.s_sign(math.pi / 2, math.pi / 4)), 0.5, 1e-12)
    rng = np.random.default_rng(11)
    for _ in range(1000):
        z2, z3 = rng.uniform(0.05, math.pi - 0.05, 2)
        s0, spi = oracle.endpoint_signs(z2, z3)
        assert_.close(s0 + spi, 0.0, 1e-12)
        assert_.true(s0 < 0 < spi)


@test("oracle", "spherical_third_side")
def test_spherical_third_side(assert_: Assertions):
    half = math.pi / 2
    assert_.close(float(oracle.spherical_theta3(half, half, half)), half, 1e-12)
    assert_.close(float(oracle.spherical_theta3(math.pi / 3, math.pi / 5, 0.0)),
                  2 * math.pi / 15, 1e-9)
    assert_.close(float(oracle.spherical_theta3(math.pi / 3, math.pi / 5, math.pi)),
                  8 * math.pi / 15, 1e-9)


@test("oracle", "sampled_zeros_at_zero_perturbation")
def test_sampled_zeros_at_zero_perturbation(assert_: Assertions):
    points = oracle.sample_variety(0.0, grid_size=16)
    assert_.true(len(points) > 0)
    assert_.true(bool(np.all(points[:, 4] < 1e-8)))
    interior = points[(points[:, 0] > 0.1) & (points[:, 0] < math.pi - 0.1)]
    assert_.true(len(interior) > 0)
    assert_.all_close(interior[:, 2], np.full(len(interior), math.pi / 2), 1e-9)
    assert_.raises(lambda: oracle.sample_variety(0.0, grid_size=8), PillowcurveError)


@test("oracle", "slice_near_corner_splits_in_two")
def test_slice_near_corner_splits_in_two(assert_: Assertions):
    parts = oracle.slice_components(0.05, math.pi / 2, math.pi / 4)
    assert_.equal(len(parts), 2)
    faces = {p.faces for p in parts}
    assert_.equal(faces, {frozenset({"H+", "A+"}), frozenset({"H-", "A-"})})


@test("oracle", "slice_at_beta_zero_is_a_cross")
def test_slice_at_beta_zero_is_a_cross(assert_: Assertions):
    parts = oracle.slice_components(0.05, math.pi / 2, 0.0)
    assert_.equal(len(parts), 1)
    assert_.equal(parts[0].faces, frozenset({"H-", "H+", "A-", "A+"}))
    assert_.equal(parts[0].to_dict()["faces"], ["A+", "A-", "H+", "H-"])


@test("oracle", "corner_hessian_is_nondegenerate")
def test_corner_hessian_is_nondegenerate(assert_: Assertions):
    assert_.equal(oracle.corner_hessian(0.1), (True, 0))
    t = 0.1
    matrix = oracle.hessian(t)
    assert_.close(float(matrix[0, 1]), -2 * math.cos(t) * math.sin(t), 1e-6)
    assert_.all_close(matrix, matrix.T, 1e-12)

    def smallest(t: float) -> float:
        return float(np.min(np.abs(np.linalg.eigvalsh(oracle.hessian(t)))))

    assert_.true(smallest(0.01) < smallest(0.1))
    assert_.raises(lambda: oracle.corner_hessian(0.0), PillowcurveError)

    report = oracle.hessian_check(0.1)
    assert_.true(report.passed, report.summary())
    assert_.equal(len(report.details["eigenvalues"]), 4)


@test("oracle", "fiber_check_endpoints")
def test_fiber_check_endpoints(assert_: Assertions):
    report = oracle.fiber_check(F(1, 3), F(1, 5))
    assert_.true(report.passed, report.summary())
    assert_.equal(report.details["endpoints"], ["2π/15", "8π/15"])
    assert_.false(report.details["corner_circle"])

    wide = oracle.fiber_check(F(4, 5), F(2, 3))
    assert_.true(wide.passed, wide.summary())
    assert_.equal(wide.details["endpoints"], ["2π/15", "8π/15"])

    assert_.raises(lambda: oracle.fiber_check(F(1), F(1, 3)), PillowcurveError)


@test("oracle", "format_multiples_of_pi")
def test_format_multiples_of_pi(assert_: Assertions):
    assert_.equal(oracle.format_pi(F(2, 15)), "2π/15")
    assert_.equal(oracle.format_pi(F(1)), "π")
    assert_.equal(oracle.format_pi(F(-1, 2)), "-π/2")
    assert_.equal(oracle.format_pi(F(0)), "0")


@test("oracle", "csv_has_header_and_rows")
def test_csv_has_header_and_rows(assert_: Assertions):
    points = np.array([[0.0, 1.0, 1.5707963267949, 0.5, 1e-12]])
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "zeros.csv"
        oracle.write_csv(points, str(path))
        lines = path.read_text().splitlines()
    assert_.equal(lines[0], "gamma,theta,alpha,beta,abs_phi")
    assert_.equal(len(lines), 2)
    assert_.equal(len(lines[1].split(",")), 5)
