import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warpgraphs.cmc_solver import make_perturbed, make_slice
from warpgraphs.errors import OrientationError, UnsupportedError, ValidityError, WarpGraphError
from warpgraphs.graph_geometry import (
    GraphSurface,
    Orientation,
    build_bundle,
    comparison_mask,
    export_bundle,
    hyperbolic_angle,
    orientation_sign,
    ricci_lower_bound_check,
    scalar_curvature,
)
from warpgraphs.warp_core import (
    Grid,
    ScalarField,
    WarpedModel,
    WarpFamily,
    WarpKind,
    ambient_metric,
    hyperbolic_space,
    read_field_csv,
    steady_state_space,
)
from warpgraphs.warp_core.finite_diff import gradient

from conftest import cosh_model, observed_order, periodic_grid, random_periodic_surface

MODELS = [hyperbolic_space(2), steady_state_space(2), cosh_model(1), cosh_model(-1)]


def _area_density(model, grid, u, du, normal, s):
    """sqrt(det g) of ``x -> (u, x) + s N``, with ambient coordinates ``(t, x)``."""
    n = grid.dim
    tangent = np.zeros(grid.extents + (n + 1, n))
    tangent[..., 0, :] = du
    tangent[..., 1:, :] = np.eye(n)
    tangent += s * np.stack([gradient(normal[..., a], grid) for a in range(n + 1)], axis=-2)
    G = ambient_metric(model, u + s * normal[..., 0])
    g = np.einsum("...ai,...ab,...bj->...ij", tangent, G, tangent)
    return np.sqrt(np.linalg.det(g))


def first_variation_H(bundle, s=1e-5):
    """Mean curvature from the normal variation of area: ``-eps (d sqrt g / ds) / (n sqrt g)``."""
    grid, u, N = bundle.grid, bundle.h.values, bundle.normal
    du = gradient(u, grid)
    plus = _area_density(bundle.model, grid, u, du, N, s)
    minus = _area_density(bundle.model, grid, u, du, N, -s)
    zero = _area_density(bundle.model, grid, u, du, N, 0.0)
    return -bundle.model.epsilon * (plus - minus) / (2 * s) / (bundle.n * zero)


def intrinsic_K(bundle):
    """Gaussian curvature of the induced metric from finite-difference Christoffel symbols."""
    grid = bundle.grid
    g, ginv = bundle.g.values, bundle.g_inv.values
    dg = np.stack([gradient(g[..., i, j], grid) for i in range(2) for j in range(2)], axis=-2)
    dg = dg.reshape(g.shape + (2,))  # dg[..., i, j, k] = d_k g_ij
    first = 0.5 * (np.einsum("...jli->...lij", dg) + np.einsum("...ilj->...lij", dg) - np.einsum("...ijl->...lij", dg))
    gamma = np.einsum("...kl,...lij->...kij", ginv, first)
    dgamma = np.stack(
        [np.stack([np.stack([gradient(gamma[..., l, i, j], grid) for j in range(2)], -2) for i in range(2)], -3)
         for l in range(2)], -4,
    )  # dgamma[..., l, i, j, k] = d_k gamma^l_ij
    riem = (
        dgamma[..., :, 1, 1, 0] - dgamma[..., :, 0, 1, 1]
        + np.einsum("...lm,...m->...l", gamma[..., :, 0, :], gamma[..., :, 1, 1])
        - np.einsum("...lm,...m->...l", gamma[..., :, 1, :], gamma[..., :, 0, 1])
    )  # R^l_{122}
    return np.einsum("...l,...l->...", g[..., 0, :], riem) / np.linalg.det(g)


class TestSlices:
    @pytest.mark.parametrize("model", MODELS[:2], ids=["hyperbolic", "steady_state"])
    @pytest.mark.parametrize("t0", [-1.0, 0.0, 1.5])
    def test_exponential_slices_are_umbilic_with_H_one(self, model, t0):
        bundle = build_bundle(make_slice(model, periodic_grid(16), t0))
        assert np.allclose(bundle.H.values, 1.0, atol=1e-12)
        assert np.allclose(bundle.principal_curvatures, model.epsilon, atol=1e-12)
        assert np.allclose(bundle.grad_h_norm2.values, 0.0, atol=1e-14)
        assert np.allclose(bundle.eta.values, -np.exp(t0), rtol=1e-12)
        assert np.allclose(bundle.normal_t.values, -1.0)

    @pytest.mark.parametrize("eps", [1, -1])
    @pytest.mark.parametrize("t0", [-0.7, 0.4])
    def test_cosh_slice_future_orientation(self, eps, t0):
        model = cosh_model(eps)
        bundle = build_bundle(make_slice(model, periodic_grid(12), t0), Orientation.FUTURE_POINTING)
        assert np.allclose(bundle.H.values, -eps * np.tanh(t0), atol=1e-12)

    @pytest.mark.parametrize("eps", [1, -1])
    def test_constant_warp_slice_is_totally_geodesic(self, eps):
        model = WarpedModel(eps, WarpFamily(WarpKind.CONSTANT), 2)
        bundle = build_bundle(make_slice(model, periodic_grid(12), 0.3), Orientation.FUTURE_POINTING)
        assert np.max(np.abs(bundle.H.values)) < 1e-14
        assert np.max(np.abs(bundle.A_norm2.values)) < 1e-14

    def test_hyperbolic_slice_scalar_curvature_is_zero(self, hyp):
        bundle = build_bundle(make_slice(hyp, periodic_grid(12), 0.0))
        curv = scalar_curvature(bundle)
        assert np.allclose(curv.K.values, 0.0, atol=1e-12)
        assert curv.remark_discrepancy < 1e-12


@pytest.mark.parametrize("model", MODELS, ids=["hyperbolic", "steady_state", "cosh+", "cosh-"])
def test_mean_curvature_matches_first_variation_of_area(model):
    errors = []
    for n in (32, 64, 128):
        surface = make_perturbed(model, periodic_grid(n), 0.2, 0.15, (1, 2))
        bundle = build_bundle(surface)
        errors.append(np.max(np.abs(first_variation_H(bundle) - bundle.H.values)))
    assert errors[-1] < 5e-3
    assert np.all(observed_order(errors) > 1.7)


@pytest.mark.parametrize("model", MODELS[:2], ids=["hyperbolic", "steady_state"])
def test_gauss_curvature_matches_intrinsic_curvature(model):
    errors = []
    for n in (32, 64, 128):
        bundle = build_bundle(make_perturbed(model, periodic_grid(n), -0.1, 0.2, (1, 1)))
        errors.append(np.max(np.abs(intrinsic_K(bundle) - bundle.K.values)))
    assert errors[-1] < 5e-3
    assert np.all(observed_order(errors) > 1.7)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**20), which=st.integers(0, 3), amplitude=st.floats(0.01, 0.3))
def test_pointwise_invariants(seed, which, amplitude):
    model = MODELS[which]
    rng = np.random.default_rng(seed)
    bundle = build_bundle(random_periodic_surface(model, periodic_grid(16), rng, amplitude))
    eps, n = model.epsilon, 2
    H, H2, A2 = bundle.H.values, bundle.H2.values, bundle.A_norm2.values
    scale = np.maximum(1.0, np.abs(A2))
    assert np.max(np.abs(A2 - (n**2 * H**2 - n * (n - 1) * H2)) / scale) < 1e-12
    c = bundle.normal_t.values
    assert np.max(np.abs(bundle.grad_h_norm2.values - eps * (1 - c**2))) < 1e-12
    assert np.all(H**2 - H2 >= -1e-12)
    assert np.all(bundle.eta.values < 0)
    if eps == -1:
        assert np.all(c <= -1.0 + 1e-15)
        assert np.all(bundle.grad_h_norm2.values >= 0)
    else:
        assert np.all(np.abs(c) <= 1.0 + 1e-15)
    lam = bundle.principal_curvatures
    assert np.allclose(eps * lam.sum(axis=-1) / n, H, atol=1e-12)


class TestOrientation:
    def test_parse(self):
        assert Orientation.parse("future-pointing") is Orientation.FUTURE_POINTING
        assert Orientation.parse("PAST") is Orientation.PAST_POINTING
        with pytest.raises(OrientationError):
            Orientation.parse("sideways")

    def test_eta_negative_sign_depends_on_model(self, hyp, steady):
        assert orientation_sign(hyp, Orientation.ETA_NEGATIVE) == -1
        assert orientation_sign(steady, Orientation.ETA_NEGATIVE) == 1

    def test_flipping_the_normal_flips_H_and_eta(self, exp_model):
        surface = make_perturbed(exp_model, periodic_grid(16), 0.0, 0.1, (1, 1))
        future = build_bundle(surface, "future")
        past = build_bundle(surface, "past")
        assert np.allclose(future.H.values, -past.H.values, atol=1e-13)
        assert np.allclose(future.eta.values, -past.eta.values, atol=1e-13)
        assert np.allclose(future.A_norm2.values, past.A_norm2.values, atol=1e-12)


def test_invalid_graph_is_rejected_with_index(steady):
    with pytest.raises(ValidityError) as info:
        make_perturbed(steady, periodic_grid(32), 0.0, 2.0, (3, 3))
    assert info.value.index is not None
    u = ScalarField(periodic_grid(16), 2.0 * np.sin(3 * periodic_grid(16).coordinates()[0]))
    surface = GraphSurface.from_height(steady, u)
    assert not surface.is_valid
    with pytest.raises(ValidityError):
        build_bundle(surface)


class TestHyperbolicAngle:
    def test_cosh_theta_squared_is_one_plus_gradient(self, steady):
        bundle = build_bundle(make_perturbed(steady, periodic_grid(32), 0.0, 0.3, (1, 2)))
        theta = hyperbolic_angle(bundle).values
        assert np.allclose(np.cosh(theta) ** 2, 1 + bundle.grad_h_norm2.values, rtol=1e-12)
        assert np.allclose(theta, bundle.theta.values)

    def test_theta_is_arccosh_two_where_gradient_squared_is_three(self, steady):
        line = Grid.box((41, 41), 0.4, "dirichlet")
        x = line.coordinates()[0]
        # e^{-u} = 1 - (sqrt(3)/2) x gives |Du| = (sqrt(3)/2) e^u, hence |grad h|^2 = 3
        u = -np.log(1.0 - np.sqrt(3.0) / 2.0 * x)
        bundle = build_bundle(GraphSurface.from_height(steady, ScalarField(line, u)))
        mask = comparison_mask(line)
        theta = hyperbolic_angle(bundle).values[mask]
        assert np.max(np.abs(theta - np.arccosh(2.0))) < 1e-2

    def test_riemannian_model_is_unsupported(self, hyp):
        bundle = build_bundle(make_slice(hyp, periodic_grid(8), 0.0))
        assert bundle.theta is None
        with pytest.raises(UnsupportedError):
            hyperbolic_angle(bundle)

    def test_past_pointing_normal_is_rejected(self, steady):
        bundle = build_bundle(make_slice(steady, periodic_grid(8), 0.0), "past")
        with pytest.raises(WarpGraphError):
            hyperbolic_angle(bundle)


class TestRicciBound:
    def test_slice_sits_on_the_bound(self, steady):
        check = ricci_lower_bound_check(build_bundle(make_slice(steady, periodic_grid(8), 0.5)))
        assert check.bound == pytest.approx(0.0, abs=1e-12)
        assert check.min_margin == pytest.approx(0.0, abs=1e-12)

    def test_negated_curvature_violates_the_bound(self, steady):
        bundle = build_bundle(make_perturbed(steady, periodic_grid(32), 0.0, 0.2, (1, 1)))
        honest = ricci_lower_bound_check(bundle)
        K = bundle.K.values
        forged = ricci_lower_bound_check(bundle, -np.abs(K) - 0.5)
        assert forged.min_margin < honest.min_margin
        assert forged.min_margin < 0

    def test_requires_lorentzian_two_dimensional(self, hyp):
        with pytest.raises(UnsupportedError):
            ricci_lower_bound_check(build_bundle(make_slice(hyp, periodic_grid(8), 0.0)))
        model3 = steady_state_space(3)
        grid3 = periodic_grid(6, dim=3)
        with pytest.raises(UnsupportedError, match="n=2"):
            ricci_lower_bound_check(build_bundle(make_slice(model3, grid3, 0.0)))


def test_three_dimensional_bundle(exp_model):
    model = hyperbolic_space(3) if exp_model.epsilon == 1 else steady_state_space(3)
    bundle = build_bundle(make_perturbed(model, periodic_grid(12, dim=3), 0.0, 0.05, (1, 1, 1)))
    assert bundle.K is None and bundle.R_scal is not None
    assert bundle.principal_curvatures.shape == (12, 12, 12, 3)


def test_export_bundle_roundtrip(tmp_path, hyp):
    bundle = build_bundle(make_perturbed(hyp, periodic_grid(16), 0.0, 0.1, (1, 1)))
    written = export_bundle(bundle, tmp_path, "wave")
    names = {p.name for p in written}
    assert {"wave.H.csv", "wave.eta.csv", "wave.g_01.csv", "wave.shape_10.csv", "wave.manifest"} <= names
    assert np.array_equal(read_field_csv(tmp_path / "wave.H.csv").values, bundle.H.values)
    manifest = (tmp_path / "wave.manifest").read_text()
    assert "orientation=eta_negative" in manifest
    with pytest.raises(WarpGraphError):
        export_bundle(bundle, tmp_path, "a/b")
