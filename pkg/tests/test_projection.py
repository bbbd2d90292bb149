import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depnorm import (
    Direction1D,
    Plane2D,
    RngStream,
    TimeSeriesSample,
    project_1d,
    project_2d,
    rotate_2d,
    rotation_matrix,
    sample_covariance,
    sample_direction,
    sample_plane,
    sample_rotation,
)


def _random_sample(p, n, seed):
    return TimeSeriesSample(RngStream(seed).generator().standard_normal((p, n)))


class TestProject1D:
    def test_axis_alignment(self):
        x = _random_sample(2, 30, 1)
        np.testing.assert_array_equal(project_1d(x, Direction1D(0.0)).data[0], x.data[1])
        np.testing.assert_allclose(
            project_1d(x, Direction1D(np.pi / 2)).data[0], x.data[0], atol=1e-12
        )

    def test_diagonal(self):
        x = TimeSeriesSample([[1.0, 1.0], [1.0, 1.0]])
        y = project_1d(x, Direction1D(np.pi / 4))
        np.testing.assert_allclose(y.data, np.sqrt(2.0) * np.ones((1, 2)))

    def test_requires_bivariate(self):
        with pytest.raises(ValueError):
            project_1d(_random_sample(3, 10, 2), Direction1D(0.3))

    def test_linearity(self):
        a = _random_sample(2, 50, 3)
        b = _random_sample(2, 50, 4)
        d = Direction1D(1.234)
        combo = TimeSeriesSample(2.5 * a.data - 0.5 * b.data)
        np.testing.assert_allclose(
            project_1d(combo, d).data,
            2.5 * project_1d(a, d).data - 0.5 * project_1d(b, d).data,
            atol=1e-12,
        )


class TestProject2D:
    def test_axis_aligned_planes(self):
        x = _random_sample(3, 40, 5)
        y = project_2d(x, Plane2D(0.0, 0.0))
        np.testing.assert_allclose(y.data[0], x.data[0], atol=1e-15)
        np.testing.assert_allclose(y.data[1], x.data[2], atol=1e-15)
        y = project_2d(x, Plane2D(0.0, np.pi / 2))
        np.testing.assert_allclose(y.data[0], x.data[1], atol=1e-12)
        np.testing.assert_allclose(y.data[1], x.data[2], atol=1e-12)

    def test_requires_trivariate(self):
        with pytest.raises(ValueError):
            project_2d(_random_sample(2, 10, 6), Plane2D(0.1, 0.2))

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-np.pi / 2, np.pi / 2), st.floats(0.0, np.pi))
    def test_basis_orthonormal(self, theta, phi):
        basis = Plane2D(theta, phi).basis()
        gram = basis @ basis.T
        np.testing.assert_allclose(gram, np.eye(2), atol=1e-12)


class TestRotation:
    def test_rotation_matrix_orthogonal(self):
        r = rotation_matrix(0.77)
        np.testing.assert_allclose(r @ r.T, np.eye(2), atol=1e-15)
        np.testing.assert_allclose(np.linalg.det(r), 1.0, atol=1e-15)

    def test_zero_rotation_is_identity(self):
        x = _random_sample(2, 20, 7)
        np.testing.assert_array_equal(rotate_2d(x, 0.0).data, x.data)

    def test_requires_bivariate(self):
        with pytest.raises(ValueError):
            rotate_2d(_random_sample(3, 10, 8), 0.5)


class TestAngleSampling:
    def test_direction_uniform(self):
        gen = RngStream(9).generator()
        phis = np.array([sample_direction(gen).phi for _ in range(100_000)])
        assert np.all((phis >= 0) & (phis < np.pi))
        se = np.pi / np.sqrt(12 * phis.size)
        assert abs(phis.mean() - np.pi / 2) < 3 * se

    def test_plane_angles_uniform(self):
        gen = RngStream(10).generator()
        planes = [sample_plane(gen) for _ in range(100_000)]
        thetas = np.array([pl.theta for pl in planes])
        assert np.all((thetas >= -np.pi / 2) & (thetas < np.pi / 2))
        se = np.pi / np.sqrt(12 * thetas.size)
        assert abs(thetas.mean()) < 3 * se

    def test_rotation_angle_range(self):
        gen = RngStream(11).generator()
        angles = np.array([sample_rotation(gen) for _ in range(1000)])
        assert np.all((angles >= 0) & (angles < np.pi))

    def test_deterministic(self):
        a = sample_plane(RngStream(12))
        b = sample_plane(RngStream(12))
        assert a == b


class TestEnergyBound:
    def test_projection_variance_bounded_by_top_eigenvalue(self):
        x = _random_sample(2, 400, 13)
        lam_max = np.linalg.eigvalsh(sample_covariance(x)).max()
        gen = RngStream(14).generator()
        for _ in range(50):
            y = project_1d(x, sample_direction(gen))
            assert y.data.var() <= lam_max + 1e-10
