import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kahlerfol.tensor import (
    SIGN_CONVENTION,
    ChartBox,
    ChartMetric,
    DegeneracyError,
    DomainError,
    FDConfig,
    TensorValue,
    bianchi_residuals,
    christoffel,
    covariant_derivative,
    covariant_derivative_array,
    curvature_at,
    derivative,
    exterior_derivative,
    geodesic_integrate,
    jacobi_integrate,
    jacobi_residual,
    lie_derivative_metric,
    observed_order,
    ricci,
    riemann,
    scalar_curvature,
    second_derivative,
    sectional,
)


def euclidean(d=3):
    return ChartMetric(d, lambda x: np.broadcast_to(np.eye(d), np.asarray(x).shape[:-1] + (d, d)).copy(),
                       ChartBox.cube(d, 2.0), "euclidean")


def sphere(radius=1.0):
    def comps(x):
        x = np.asarray(x)
        g = np.zeros(x.shape[:-1] + (2, 2))
        g[..., 0, 0] = radius**2
        g[..., 1, 1] = (radius * np.sin(x[..., 0])) ** 2
        return g

    return ChartMetric(2, comps, ChartBox(np.array([0.2, -3.0]), np.array([np.pi - 0.2, 3.0])), "sphere")


def hyperbolic():
    def comps(x):
        x = np.asarray(x)
        y = x[..., 1]
        g = np.zeros(x.shape[:-1] + (2, 2))
        g[..., 0, 0] = 1.0 / y**2
        g[..., 1, 1] = 1.0 / y**2
        return g

    return ChartMetric(2, comps, ChartBox(np.array([-2.0, 0.5]), np.array([2.0, 3.0])), "hyperbolic")


def bumpy():
    """A non-symmetric analytic metric on R^3 used for identity checks."""
    def comps(x):
        x = np.asarray(x)
        a, b, c = x[..., 0], x[..., 1], x[..., 2]
        g = np.zeros(x.shape[:-1] + (3, 3))
        g[..., 0, 0] = 2.0 + np.sin(b)
        g[..., 1, 1] = 1.5 + 0.3 * np.cos(a * c)
        g[..., 2, 2] = 1.0 + 0.2 * a**2
        g[..., 0, 1] = g[..., 1, 0] = 0.3 * np.sin(c)
        g[..., 1, 2] = g[..., 2, 1] = 0.1 * a * b
        return g

    return ChartMetric(3, comps, ChartBox.cube(3, 1.0), "bumpy")


class TestFiniteDifferences:
    def test_first_derivative_matches_analytic(self):
        F = lambda x: np.sin(x[..., 0]) * np.exp(x[..., 1])
        x = np.array([0.3, -0.2])
        d = derivative(F, x)
        exact = np.array([np.cos(0.3) * np.exp(-0.2), np.sin(0.3) * np.exp(-0.2)])
        assert np.allclose(d, exact, atol=1e-11)

    def test_second_derivative_symmetric_and_accurate(self):
        F = lambda x: np.sin(x[..., 0]) * np.exp(x[..., 1])
        x = np.array([0.3, -0.2])
        H = second_derivative(F, x)
        e = np.exp(-0.2)
        exact = np.array([[-np.sin(0.3) * e, np.cos(0.3) * e], [np.cos(0.3) * e, np.sin(0.3) * e]])
        assert np.allclose(H, H.T, atol=0)
        assert np.allclose(H, exact, atol=1e-9)

    def test_batched_shapes(self):
        F = lambda x: np.stack([x[..., 0] ** 2, x[..., 0] * x[..., 1]], axis=-1)
        X = np.random.default_rng(0).random((5, 2))
        assert derivative(F, X).shape == (5, 2, 2)
        assert second_derivative(F, X).shape == (5, 2, 2, 2)

    def test_plain_central_order_two(self):
        F = lambda x: np.exp(np.sin(x[..., 0]))
        x = np.array([0.4])
        exact = np.cos(0.4) * np.exp(np.sin(0.4))
        e1 = abs(derivative(F, x, 1e-2, richardson=False)[0] - exact)
        e2 = abs(derivative(F, x, 5e-3, richardson=False)[0] - exact)
        assert 1.8 <= observed_order(e1, e2) <= 2.2

    def test_richardson_beats_plain(self):
        F = lambda x: np.exp(np.sin(x[..., 0]))
        x = np.array([0.4])
        exact = np.cos(0.4) * np.exp(np.sin(0.4))
        plain = abs(derivative(F, x, 1e-3, richardson=False)[0] - exact)
        rich = abs(derivative(F, x, 1e-3, richardson=True)[0] - exact)
        assert rich < 1e-3 * plain

    def test_config(self):
        fd = FDConfig()
        assert fd.nested(1).step == pytest.approx(10 * fd.step)
        assert fd.nested(2).step2 == pytest.approx(100 * fd.step2)
        conv = FDConfig.convergence(4e-3)
        assert not conv.richardson and conv.nested(1).step == pytest.approx(8e-3)
        with pytest.raises(ValueError):
            FDConfig(step=-1.0)

    def test_observed_order_degenerate(self):
        assert np.isnan(observed_order(0.0, 1.0))
        assert observed_order(4.0, 1.0) == pytest.approx(2.0)


class TestChartMetric:
    def test_outside_box_raises(self):
        with pytest.raises(DomainError):
            sphere()(np.array([0.1, 0.0]))

    def test_wrong_dimension_raises(self):
        with pytest.raises(DomainError):
            sphere()(np.array([1.0, 0.0, 0.0]))

    def test_degenerate_metric_raises(self):
        g = ChartMetric(2, lambda x: np.zeros(np.asarray(x).shape[:-1] + (2, 2)), ChartBox.cube(2), "zero")
        with pytest.raises(DegeneracyError):
            g(np.zeros(2))

    def test_stencil_leaving_box_raises(self):
        with pytest.raises(DomainError):
            christoffel(sphere(), np.array([0.2 + 1e-5, 0.0]))

    def test_sign_convention_constant(self):
        assert SIGN_CONVENTION == "R(u,v)w = nabla_u nabla_v w - nabla_v nabla_u w - nabla_[u,v] w"


class TestChristoffel:
    def test_flat_zero(self):
        G = christoffel(euclidean(), np.array([0.1, 0.2, 0.3]))
        assert np.abs(np.asarray(G)).max() < 1e-12

    def test_sphere_equator(self):
        G = np.asarray(christoffel(sphere(), np.array([np.pi / 2, 0.0])))
        assert abs(G[0, 1, 1]) < 1e-10  # -sin cos
        assert abs(G[1, 0, 1]) < 1e-10  # cot

    def test_sphere_generic(self):
        th = 1.0
        G = np.asarray(christoffel(sphere(), np.array([th, 0.3])))
        assert G[0, 1, 1] == pytest.approx(-np.sin(th) * np.cos(th), abs=1e-10)
        assert G[1, 0, 1] == pytest.approx(np.cos(th) / np.sin(th), abs=1e-10)

    def test_symmetric_lower_indices(self):
        G = np.asarray(christoffel(bumpy(), np.array([0.1, -0.3, 0.2])))
        assert np.abs(G - np.swapaxes(G, 1, 2)).max() < 1e-14

    def test_metric_compatibility(self):
        g = bumpy()
        x = np.array([0.1, -0.3, 0.2])
        ng = covariant_derivative(g, g.components, ("d", "d"), x)
        assert np.abs(np.asarray(ng)).max() < 1e-9


class TestCurvature:
    def test_flat_zero(self):
        c = curvature_at(euclidean(), np.array([0.1, 0.2, 0.3]))
        assert np.abs(c.Riem).max() < 1e-10
        assert abs(scalar_curvature(euclidean(), np.array([0.1, 0.2, 0.3]))) < 1e-10

    @pytest.mark.parametrize("radius", [1.0, 2.0])
    def test_round_sphere_constant_curvature(self, radius):
        g = sphere(radius)
        X = g.box.sample(np.random.default_rng(1), 10, margin=0.1)
        for x in X:
            K = sectional(g, x, [1.0, 0.0], [0.0, 1.0])
            assert K == pytest.approx(1.0 / radius**2, rel=1e-6)

    def test_hyperbolic_minus_one(self):
        g = hyperbolic()
        for x in g.box.sample(np.random.default_rng(2), 5, margin=0.2):
            assert sectional(g, x, [1.0, 0.3], [0.2, 1.0]) == pytest.approx(-1.0, rel=1e-6)

    def test_sphere_ricci_and_scalar(self):
        x = np.array([1.1, 0.4])
        Ric = np.asarray(ricci(sphere(), x))
        assert np.allclose(Ric, sphere()(x), atol=1e-8)
        assert scalar_curvature(sphere(), x) == pytest.approx(2.0, rel=1e-8)

    def test_symmetries_and_bianchi(self):
        g = bumpy()
        for x in g.box.sample(np.random.default_rng(3), 4, margin=0.2):
            R = np.asarray(riemann(g, x))
            res = bianchi_residuals(R)
            assert max(res.values()) < 1e-7 * max(np.abs(R).max(), 1.0)

    def test_trace_consistency(self):
        g = bumpy()
        x = np.array([0.2, 0.1, -0.4])
        c = curvature_at(g, x)
        assert np.allclose(c.Ric, c.Ric.T, atol=1e-12)
        assert float(c.scalar) == pytest.approx(np.trace(np.linalg.solve(c.G, c.Ric)), rel=1e-12)

    def test_sectional_invariances(self):
        g = bumpy()
        x = np.array([0.2, 0.1, -0.4])
        E, F = np.array([1.0, 0.2, 0.0]), np.array([0.1, 1.0, 0.5])
        K = sectional(g, x, E, F)
        assert sectional(g, x, F, E) == pytest.approx(K, rel=1e-12)
        assert sectional(g, x, 3 * E, -2 * F) == pytest.approx(K, rel=1e-10)
        assert sectional(g, x, E, F + 0.7 * E) == pytest.approx(K, rel=1e-9)

    def test_sectional_degenerate(self):
        with pytest.raises(DegeneracyError):
            sectional(bumpy(), np.zeros(3), [1.0, 0, 0], [2.0, 0, 0])

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.4, 2.7), st.floats(-2.0, 2.0), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1),
           st.floats(-1, 1))
    def test_sphere_any_plane(self, th, ph, a, b, c, d):
        if abs(a * d - b * c) < 1e-2:
            return
        K = sectional(sphere(), np.array([th, ph]), [a, b], [c, d])
        assert K == pytest.approx(1.0, rel=1e-6)


class TestCalculus:
    def test_leibniz_rule(self):
        g = bumpy()
        x = np.array([0.2, -0.1, 0.3])
        f = lambda y: 1.0 + np.asarray(y)[..., 0] * np.asarray(y)[..., 1]
        V = lambda y: np.stack([np.sin(y[..., 2]), y[..., 0] ** 2, np.ones_like(y[..., 0])], axis=-1)
        fV = lambda y: f(y)[..., None] * V(y)
        lhs = covariant_derivative_array(g, fV, ("u",), x)
        df = derivative(f, x)
        rhs = np.outer(V(x), df) + f(x) * covariant_derivative_array(g, V, ("u",), x)
        assert np.abs(lhs - rhs).max() < 1e-9

    def test_translation_killing_on_flat(self):
        V = lambda y: np.broadcast_to(np.array([1.0, 2.0, -1.0]), np.asarray(y).shape)
        assert np.abs(np.asarray(lie_derivative_metric(euclidean(), V, np.array([0.1, 0.2, 0.3])))).max() < 1e-12

    def test_rotation_killing_on_sphere(self):
        V = lambda y: np.broadcast_to(np.array([0.0, 1.0]), np.asarray(y).shape)
        assert np.abs(np.asarray(lie_derivative_metric(sphere(), V, np.array([1.0, 0.2])))).max() < 1e-12

    def test_non_killing_detected(self):
        V = lambda y: np.broadcast_to(np.array([1.0, 0.0]), np.asarray(y).shape)
        L = np.asarray(lie_derivative_metric(sphere(), V, np.array([1.0, 0.2])))
        assert np.allclose(L, L.T)
        assert L[1, 1] == pytest.approx(2 * np.sin(1.0) * np.cos(1.0), rel=1e-8)

    def test_exterior_derivative(self):
        x = np.array([0.3, -0.4, 0.2])
        w = lambda y: np.stack([np.zeros_like(y[..., 0]), y[..., 0], np.zeros_like(y[..., 0])], axis=-1)  # x dy
        dw = np.asarray(exterior_derivative(w, x))
        assert dw[0, 1] == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(dw, -dw.T)

    def test_dd_zero(self):
        f = lambda y: np.sin(y[..., 0] * y[..., 1]) + y[..., 2] ** 3
        df = lambda y: derivative(f, y)
        ddf = np.asarray(exterior_derivative(df, np.array([0.3, 0.2, -0.1]), FDConfig().nested(1)))
        assert np.abs(ddf).max() < 1e-8

    def test_tensor_value(self):
        x = np.array([1.0, 0.2])
        R = riemann(sphere(), x)
        assert isinstance(R, TensorValue) and R.rank == 4
        with pytest.raises(ValueError):
            TensorValue(np.zeros((2, 2)), ("d",), x)


class TestGeodesics:
    def test_speed_conserved(self):
        g = sphere()
        x0 = np.array([1.2, 0.0])
        v0 = np.array([0.6, 0.8 / np.sin(1.2)])
        path = geodesic_integrate(g, x0, v0, 1.0)
        assert np.abs(path.speed_sq(g) - 1.0).max() < 1e-9
        assert not path.truncated

    def test_equator_great_circle(self):
        path = geodesic_integrate(sphere(), np.array([np.pi / 2, 0.0]), np.array([0.0, 1.0]), 1.0)
        assert np.abs(path.x[:, 0] - np.pi / 2).max() < 1e-10
        assert path.x[-1, 1] == pytest.approx(1.0, abs=1e-10)

    def test_flat_straight_line_and_linear_jacobi(self):
        g = euclidean(2)
        v0 = np.array([0.6, 0.8])
        path = jacobi_integrate(g, np.zeros(2), v0, np.array([0.0, 0.0]), np.array([-0.8, 0.6]), 1.0)
        assert np.allclose(path.x, np.outer(path.t, v0), atol=1e-12)
        assert np.allclose(path.jacobi_norm(g), path.t, atol=1e-12)

    def test_sphere_jacobi_cos(self):
        g = sphere()
        path = jacobi_integrate(g, np.array([np.pi / 2, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 0.0]),
                                np.zeros(2), 1.2)
        assert np.abs(path.jacobi_norm(g) - np.abs(np.cos(path.t))).max() < 1e-8
        assert np.abs(path.jacobi_tangential(g)).max() < 1e-10
        k = len(path.t) // 2
        assert jacobi_residual(g, path.x[k], path.v[k], path.C[k], path.dC[k]) < 1e-6

    def test_truncated_when_leaving_chart(self):
        path = geodesic_integrate(sphere(), np.array([np.pi / 2, 0.0]), np.array([1.0, 0.0]), 3.0)
        assert path.truncated
        assert path.t[-1] < 3.0

    def test_non_unit_start_rejected(self):
        with pytest.raises(ValueError):
            geodesic_integrate(sphere(), np.array([1.0, 0.0]), np.array([2.0, 0.0]), 1.0)
