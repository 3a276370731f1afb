import csv

import numpy as np
import pytest

import vekua as vk
from vekua.boundary_solver import CONDITION_LIMIT

from conftest import disk_pipeline


class TestBoundaryTraces:
    def test_sigma_one_traces_are_harmonics(self, sigma_one):
        _, angle_set, table, _, _ = disk_pipeline(sigma_one, 4, 1000, 64)
        traces = vk.boundary_traces(table)
        th = angle_set.angles
        for n in range(5):
            assert np.abs(traces[n] - np.cos(n * th)).max() < 1e-5
        for n in range(1, 5):
            assert np.abs(traces[4 + n] + np.sin(n * th)).max() < 1e-5

    def test_row_count_is_2n_plus_1(self):
        field, _ = vk.builtin_case("exponential", 1.0)
        _, _, table, _, _ = disk_pipeline(field, 30, 40, 80)
        traces = vk.boundary_traces(table)
        assert traces.shape == (61, 80)


class TestOrthonormalize:
    def test_known_norms_on_circle(self):
        Q = 2000
        angle_set = vk.build_angle_set(Q)
        th = angle_set.angles
        weights = vk.arc_length_weights(vk.unit_disk(), angle_set)
        traces = np.vstack([np.ones(Q), np.cos(th)])
        basis = vk.orthonormalize(traces, weights, angle_set)
        assert np.abs(basis.samples[0] - 1 / np.sqrt(2 * np.pi)).max() < 1e-6
        assert np.abs(basis.samples[1] - np.cos(th) / np.sqrt(np.pi)).max() < 1e-6

    def test_already_orthonormal_input_is_fixed_point(self):
        Q = 1000
        angle_set = vk.build_angle_set(Q)
        th = angle_set.angles
        weights = vk.arc_length_weights(vk.unit_disk(), angle_set)
        rows = np.vstack([np.ones(Q), np.cos(th), np.sin(th)])
        norms = np.sqrt((weights * rows**2).sum(axis=1))
        rows /= norms[:, None]
        basis = vk.orthonormalize(rows, weights, angle_set)
        assert np.abs(basis.samples - rows).max() < 1e-10
        assert np.abs(basis.transform - np.diag(np.diag(basis.transform))).max() < 1e-10

    def test_gram_matrix_is_identity(self):
        field, _ = vk.builtin_case("exponential", 1.0)
        _, _, _, _, basis = disk_pipeline(field, 15, 100, 200)
        gram = basis.gram_matrix()
        assert np.abs(gram - np.eye(basis.size)).max() < 1e-8

    def test_rank_deficiency_reports_index(self):
        Q = 100
        angle_set = vk.build_angle_set(Q)
        th = angle_set.angles
        weights = vk.arc_length_weights(vk.unit_disk(), angle_set)
        rows = np.vstack([np.ones(Q), np.cos(th), np.cos(th)])
        with pytest.raises(vk.RankDeficiencyError) as err:
            vk.orthonormalize(rows, weights, angle_set)
        assert err.value.index == 2


class TestTotalError:
    def test_zero_residual(self):
        assert vk.total_error(np.zeros(10), np.ones(10)) == 0.0

    def test_constant_residual_on_circle(self):
        angle_set = vk.build_angle_set(512)
        w = vk.arc_length_weights(vk.unit_disk(), angle_set)
        assert vk.total_error(np.ones(512), w) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-4)

    def test_sine_residual_on_circle(self):
        angle_set = vk.build_angle_set(1000)
        w = vk.arc_length_weights(vk.unit_disk(), angle_set)
        E = vk.total_error(np.sin(angle_set.angles), w)
        assert abs(E - np.sqrt(np.pi)) < 1e-4


class TestCollocationFit:
    def test_harmonic_data_fits_exactly(self, sigma_one):
        domain, _, _, _, basis = disk_pipeline(sigma_one, 3, 300, 200)
        report = vk.collocation_fit(basis, lambda x, y: x, domain)
        assert report.total_error < 1e-8
        assert report.collocation_residual < 1e-9

    def test_zero_data_gives_zero_fit(self, sigma_one):
        domain, _, _, _, basis = disk_pipeline(sigma_one, 3, 100, 100)
        report = vk.collocation_fit(basis, lambda x, y: np.zeros_like(x), domain)
        assert np.all(report.coefficients == 0.0)
        assert report.total_error == 0.0

    def test_scale_equivariance_exact_for_pow2(self):
        field, sol = vk.builtin_case("exponential", 1.0)
        domain, _, _, _, basis = disk_pipeline(field, 8, 60, 80)
        r1 = vk.collocation_fit(basis, sol, domain)
        r8 = vk.collocation_fit(basis, lambda x, y: 8.0 * sol(x, y), domain)
        assert np.all(r8.coefficients == 8.0 * r1.coefficients)
        assert r8.total_error == 8.0 * r1.total_error

    def test_scale_equivariance_generic(self):
        field, sol = vk.builtin_case("exponential", 1.0)
        domain, _, _, _, basis = disk_pipeline(field, 8, 60, 80)
        r1 = vk.collocation_fit(basis, sol, domain)
        r3 = vk.collocation_fit(basis, lambda x, y: 3.0 * sol(x, y), domain)
        scale = float(np.abs(r1.coefficients).max())
        np.testing.assert_allclose(r3.coefficients, 3.0 * r1.coefficients,
                                   rtol=1e-9, atol=1e-12 * scale)
        assert r3.total_error == pytest.approx(3.0 * r1.total_error, rel=1e-9)

    def test_rejects_undefined_boundary_condition(self, sigma_one):
        domain, _, _, _, basis = disk_pipeline(sigma_one, 3, 50, 50)

        def bad(x, y):
            out = np.asarray(x, dtype=float).copy()
            out[np.asarray(x) > 0.99] = np.nan
            return out

        with pytest.raises(ValueError, match="undefined"):
            vk.collocation_fit(basis, bad, domain)

    def test_ill_conditioned_guard(self):
        # three basis functions, two of which nearly coincide at every angle:
        # the collocation matrix is numerically singular
        Q = 50
        angle_set = vk.build_angle_set(Q)
        th = angle_set.angles
        weights = vk.arc_length_weights(vk.unit_disk(), angle_set)
        rows = np.vstack([np.ones(Q), np.cos(th), np.cos(th) * (1 + 1e-14)])
        from scipy.interpolate import CubicSpline
        th_ext = np.concatenate([th, [th[0] + 2 * np.pi]])
        splines = tuple(CubicSpline(th_ext, np.concatenate([r, [r[0]]]),
                                    bc_type="periodic") for r in rows)
        basis = vk.BoundaryBasis(samples=rows, transform=np.eye(3), angles=th,
                                 weights=weights, splines=splines)
        with pytest.raises(vk.IllConditionedSystemError):
            vk.collocation_fit(basis, lambda x, y: x, vk.unit_disk())
        report = vk.collocation_fit(basis, lambda x, y: x, vk.unit_disk(),
                                    allow_ill_conditioned=True)
        assert report.condition_number > CONDITION_LIMIT

    def test_pinned_collocation_angles(self, sigma_one):
        domain, _, _, _, basis = disk_pipeline(sigma_one, 3, 50, 50)
        report = vk.collocation_fit(basis, lambda x, y: x, domain,
                                    pinned_angles=(0.5,))
        assert 0.5 in report.collocation_angles.tolist()

    def test_evaluation_wraps_when_first_angle_is_pinned_away(self, sigma_one):
        # a pin just below zero wraps to the top of the range and displaces
        # the theta = 0 sample; evaluating below the first stored angle must
        # wrap around the period instead of extrapolating the spline
        domain = vk.unit_disk()
        aset = vk.build_angle_set(64, pinned=(-0.01,))
        assert aset.angles[0] > 0
        grids = [vk.build_radial_grid(domain, t, 200) for t in aset.angles]
        seq = vk.generating_sequence(sigma_one, grids, "limiting_c1")
        table = vk.build_formal_powers(seq, 3)
        basis = vk.orthonormalize(vk.boundary_traces(table),
                                  vk.arc_length_weights(domain, aset), aset)
        wrapped = basis.evaluate(0.001)
        periodic = basis.evaluate(0.001 + 2 * np.pi)
        np.testing.assert_allclose(wrapped, periodic, rtol=0, atol=1e-12)
        report = vk.collocation_fit(basis, lambda x, y: x, domain)
        assert report.total_error < 1e-4


class TestInteriorEvaluation:
    def test_harmonic_extension(self, sigma_one):
        domain, _, table, _, basis = disk_pipeline(sigma_one, 5, 200, 64,
                                                   keep_interior=True)
        report = vk.collocation_fit(basis, lambda x, y: x, domain)
        # points on stored radii (grid angles); radii between samples
        for z in (0.35 + 0.0j, 0.41 * np.exp(1j * np.pi / 4), -0.53 + 0.0j):
            u = vk.evaluate_interior(report, table, complex(z))
            assert abs(u - complex(z).real) < 1e-6

    def test_center_uses_degree_zero_only(self, sigma_one):
        domain, _, table, _, basis = disk_pipeline(sigma_one, 5, 200, 64,
                                                   keep_interior=True)
        report = vk.collocation_fit(basis, lambda x, y: 1 + x, domain)
        u0 = vk.evaluate_interior(report, table, 0j)
        # all positive-degree members vanish at the center; only the constant
        # trace contributes
        beta0 = report.raw_coefficients[0]
        seed0 = float(table.interior_values(1, 0)[0][0].real)
        assert u0 == pytest.approx(beta0 * seed0, abs=1e-12)
        assert u0 == pytest.approx(1.0, abs=1e-6)

    def test_reproduces_fitted_boundary_values(self):
        field, sol = vk.builtin_case("exponential", 1.0)
        domain, angle_set, table, _, basis = disk_pipeline(field, 8, 80, 64,
                                                           keep_interior=True)
        report = vk.collocation_fit(basis, sol, domain)
        q = 5
        z_boundary = complex(np.cos(angle_set.angles[q]), np.sin(angle_set.angles[q]))
        u = vk.evaluate_interior(report, table, z_boundary)
        assert abs(u - report.fitted[q]) < 1e-9

    def test_solution_consistent_for_y_only_field(self):
        # sigma = 1/(y^2 + 0.1) depends on y alone, so the limiting pair is an
        # exact generating pair chain and the scaled fit extends to the
        # interior as the true potential u = x + y^3/3 + 0.1 y
        field = vk.ConductivityField("yonly", "analytic-closed-form",
                                     lambda x, y: 1.0 / (y * y + 0.1))

        def u_exact(x, y):
            return x + y**3 / 3.0 + 0.1 * y

        domain, _, table, _, basis = disk_pipeline(field, 16, 400, 128,
                                                   keep_interior=True)
        report = vk.collocation_fit(basis, vk.scaled_boundary_condition(field, u_exact),
                                    domain)
        for zx, zy in ((0.3, 0.4), (-0.2, 0.5), (0.0, -0.6)):
            u = vk.evaluate_interior(report, table, complex(zx, zy), field=field)
            assert abs(u - u_exact(zx, zy)) < 1e-4

    def test_rejects_point_outside(self, sigma_one):
        domain, _, table, _, basis = disk_pipeline(sigma_one, 3, 50, 32,
                                                   keep_interior=True)
        report = vk.collocation_fit(basis, lambda x, y: x, domain)
        with pytest.raises(ValueError, match="outside"):
            vk.evaluate_interior(report, table, 1.5 + 0.0j)

    def test_requires_interior_table(self, sigma_one):
        domain, _, table, _, basis = disk_pipeline(sigma_one, 3, 50, 32)
        report = vk.collocation_fit(basis, lambda x, y: x, domain)
        with pytest.raises(ValueError, match="keep_interior"):
            vk.evaluate_interior(report, table, 0.1 + 0.1j)


class TestReportSerialization:
    def test_json_and_csv_round_trip(self, tmp_path):
        field, sol = vk.builtin_case("polynomial", 1.0)
        domain, _, _, _, basis = disk_pipeline(field, 5, 30, 40)
        report = vk.collocation_fit(basis, sol, domain, config={"case": "polynomial"})
        report.save_json(tmp_path / "report.json")
        report.save_residual_csv(tmp_path / "residual.csv")

        import json
        data = json.loads((tmp_path / "report.json").read_text())
        assert data["config"]["case"] == "polynomial"
        assert data["total_error"] == report.total_error

        with open(tmp_path / "residual.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 40
        # the emitted profile reproduces the reported error exactly
        resid = np.array([float(r["residual"]) for r in rows])
        E = vk.total_error(resid, basis.weights)
        assert abs(E - report.total_error) <= 1e-12 * max(1.0, report.total_error)
