import numpy as np
import pytest

from nordenlift.errors import DomainError
from nordenlift.spaceform import (SpaceForm, curvature_at, curvature_formula, curvature_residual, metric_at,
                                  metricity_residual, ricci_at, sample_chart_points)


def fd_christoffel(sf, x, h=1e-5):
    """Gamma^h_ki from central differences of g."""
    n = sf.n
    dg = np.zeros((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dg[:, :, k] = (metric_at(sf, x + e).g - metric_at(sf, x - e).g) / (2 * h)
    ginv = metric_at(sf, x).g_inv
    low = 0.5 * (np.einsum("jki->jki", dg) + np.einsum("jik->jki", dg) - np.einsum("kij->jki", dg))
    return np.einsum("hj,jki->hki", ginv, low)


class TestMetric:
    @pytest.mark.parametrize("c", [-1.0, 0.0, 0.5, 1.0])
    def test_origin(self, c):
        d = metric_at(SpaceForm(3, c), np.zeros(3))
        assert np.array_equal(d.g, np.eye(3))
        assert not d.gamma.any()

    def test_flat_everywhere(self, rng):
        sf = SpaceForm(2, 0.0)
        d = metric_at(sf, rng.normal(size=2))
        assert np.array_equal(d.g, np.eye(2))
        assert not d.gamma.any() and not d.dgamma.any()

    def test_christoffel_fd(self):
        sf = SpaceForm(2, 1.0)
        x = np.array([0.3, -0.1])
        assert np.max(np.abs(metric_at(sf, x).gamma - fd_christoffel(sf, x))) < 1e-6

    def test_dgamma_fd(self, space_form, rng):
        x = sample_chart_points(space_form, 1, 0.6, rng)[0]
        h = 1e-5
        d = metric_at(space_form, x)
        for j in range(space_form.n):
            e = np.zeros(space_form.n)
            e[j] = h
            fd = (metric_at(space_form, x + e).gamma - metric_at(space_form, x - e).gamma) / (2 * h)
            assert np.max(np.abs(d.dgamma[..., j] - fd)) < 1e-8

    def test_gamma_symmetric(self, space_form, rng):
        d = metric_at(space_form, sample_chart_points(space_form, 1, 0.6, rng)[0])
        assert np.allclose(d.gamma, np.transpose(d.gamma, (0, 2, 1)))

    def test_positive_definite(self, space_form, rng):
        for x in sample_chart_points(space_form, 10, 0.8, rng):
            assert np.all(np.linalg.eigvalsh(metric_at(space_form, x).g) > 0)

    def test_metricity(self, space_form, rng):
        for x in sample_chart_points(space_form, 50, 0.8, rng):
            assert metricity_residual(metric_at(space_form, x)) < 1e-10

    def test_chart_domain(self):
        with pytest.raises(DomainError):
            metric_at(SpaceForm(2, -1.0), np.array([2.0, 0.5]))

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            metric_at(SpaceForm(2, 1.0), np.zeros(3))

    def test_dimension_validated(self):
        with pytest.raises(ValueError):
            SpaceForm(1, 1.0)


class TestCurvature:
    def test_flat(self, rng):
        assert not curvature_at(SpaceForm(3, 0.0), rng.normal(size=3)).any()

    def test_unit_sphere_origin(self):
        R = curvature_at(SpaceForm(3, 1.0), np.zeros(3))
        assert R[0, 1, 0, 1] == pytest.approx(1.0)

    def test_hyperbolic_random(self, rng):
        sf = SpaceForm(3, -1.0)
        for x in sample_chart_points(sf, 10, 0.8, rng):
            assert curvature_residual(sf, x) < 1e-7

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("c", [-1.0, 0.0, 1.0])
    def test_constant_curvature_formula(self, n, c, rng):
        sf = SpaceForm(n, c)
        for x in sample_chart_points(sf, 5, 0.8, rng):
            assert curvature_residual(sf, x) < 1e-7

    def test_first_bianchi(self, space_form, rng):
        R = curvature_at(space_form, sample_chart_points(space_form, 1, 0.7, rng)[0])
        # R^h_kij + R^h_ijk + R^h_jki
        cyc = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
        assert np.max(np.abs(cyc)) < 1e-9

    def test_formula_antisymmetric(self):
        sf = SpaceForm(3, 1.0)
        F = curvature_formula(sf, np.eye(3))
        assert np.allclose(F, -np.transpose(F, (0, 1, 3, 2)))


class TestRicci:
    def test_flat(self):
        assert not ricci_at(SpaceForm(2, 0.0), np.array([0.3, 0.2])).any()

    def test_sphere_origin(self):
        assert np.allclose(ricci_at(SpaceForm(3, 1.0), np.zeros(3)), 2 * np.eye(3))

    def test_hyperbolic_einstein(self, rng):
        sf = SpaceForm(3, -1.0)
        for x in sample_chart_points(sf, 10, 0.8, rng):
            g = metric_at(sf, x).g
            assert np.max(np.abs(ricci_at(sf, x) + 2 * g)) < 1e-7
