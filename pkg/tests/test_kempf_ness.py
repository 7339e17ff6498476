import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcoset.cosets import beta, lambda_projection, make_point, transversal
from dcoset.errors import Inconclusive
from dcoset.golden import V, on_hyperboloid, sl2_coords, sl2_point
from dcoset.kempf_ness import (
    FlowOptions,
    gradient_flow,
    in_kempf_ness,
    is_orbit_closed,
    mu,
    nu_xi,
    rho,
    slice_rep_weights,
)
from dcoset.matrix import mat_exp, trace_inner


def fd_mu(setup, xm, xi, h=1e-5):
    """Derivative of rho along t -> exp(-i t xi) * x at t = 0."""

    def f(t):
        return rho(setup, setup.star(mat_exp(-1j * t * xi), xm))

    return (f(h) - f(-h)) / (2 * h)


def random_u_element(n, rng):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a - a.conj().T) / 2


def test_nu_vanishes_on_unitary(sl2, rng):
    u = mat_exp(random_u_element(2, rng))
    assert abs(nu_xi(sl2, u, random_u_element(2, rng))) < 1e-12


def test_nu_on_commuting_pair(sl2):
    eta = 1j * np.diag([0.7, -0.7])
    xi = 1j * np.diag([0.3, -0.3])
    g = mat_exp(1j * eta)
    assert nu_xi(sl2, g, xi) == pytest.approx(trace_inner(xi, eta), abs=1e-12)


def test_nu_matches_finite_difference(sl2, rng):
    for _ in range(5):
        g = mat_exp(random_u_element(2, rng)) @ mat_exp(1j * random_u_element(2, rng))
        xi = random_u_element(2, rng)
        h = 1e-6
        fd = (rho(sl2, g @ mat_exp(1j * h * xi)) - rho(sl2, g @ mat_exp(-1j * h * xi))) / (2 * h)
        # derivative along g exp(i t xi); i.e. minus the one along g exp(-i t xi)
        assert nu_xi(sl2, g, xi) == pytest.approx(fd, abs=1e-6)


def test_mu_examples(sl2):
    assert mu(sl2, np.eye(2)).norm_sq == 0
    for s in (-1.0, 0.4, 2.0):
        assert math.sqrt(mu(sl2, mat_exp([[0, s], [s, 0]]) @ V).norm_sq) < 1e-12


@pytest.mark.parametrize("fixture", ["sl2", "sl8"])
def test_mu_matches_rho_derivative(fixture, request, rng):
    s = request.getfixturevalue(fixture)
    for _ in range(3):
        x = beta(s, s.random_G(rng, 0.4))
        m = mu(s, x)
        fd = np.array([fd_mu(s, x.mat, xi) for xi in s.decomposition.compact_h])
        assert np.abs(m.coords - fd).max() < 1e-5
        assert m.norm_sq == pytest.approx(float(m.coords @ m.coords))


def test_identity_in_kempf_ness(sl2, sl8):
    assert in_kempf_ness(sl2, np.eye(2)) and in_kempf_ness(sl8, np.eye(8))


@pytest.mark.parametrize("x,z,member", [(0.5, 0.0, True), (0.8, 1.7, False), (-0.3, 2.5, False), (0.95, 0.0, True), (1.5, -1.9, False)])
def test_kempf_ness_sl2_points(sl2, x, z, member):
    pt = on_hyperboloid(x, z)
    assert in_kempf_ness(sl2, pt) == member
    assert (math.sqrt(mu(sl2, pt).norm_sq) < 1e-7) == member


def test_kempf_ness_y_zero_branch(sl2):
    for z in (-2.0, 0.5, 3.0):
        pt = sl2_point(math.sqrt(1 + z * z), 0.0, z)
        assert in_kempf_ness(sl2, pt)


def test_kempf_ness_agrees_with_mu_on_many_points(sl2, sl8, rng):
    for s, count in ((sl2, 1000), (sl8, 100)):
        for _ in range(count):
            x = beta(s, s.random_G(rng))
            assert in_kempf_ness(s, x) == (math.sqrt(mu(s, x).norm_sq) < s.tol.mu)


def test_mu_norm_invariant_under_h0(sl8, rng):
    basis = sl8.decomposition.bases["h&g0"]
    for _ in range(5):
        x = beta(sl8, sl8.random_G(rng))
        k = mat_exp(sl8.algebra.matrix(rng.normal(size=len(basis)) @ basis))
        y = make_point(sl8, sl8.star(k, x.mat))
        assert math.isclose(mu(sl8, x).norm_sq, mu(sl8, y).norm_sq, rel_tol=1e-8, abs_tol=1e-12)


def test_flow_from_kempf_ness_point_is_immediate(sl2):
    tr = gradient_flow(sl2, make_point(sl2, on_hyperboloid(0.2, 0.0)))
    assert tr.converged and tr.n_iters == 0


@pytest.mark.parametrize("c,z", [(0.5, 1.2), (-0.8, -2.0), (0.0, 0.7)])
def test_flow_reaches_branch_point(sl2, c, z):
    tr = gradient_flow(sl2, make_point(sl2, on_hyperboloid(c, z)))
    x1, y1, z1 = sl2_coords(tr.final.mat)
    assert tr.converged and abs(z1) < 1e-5 and abs(x1 - c) < 1e-9
    f = [it[1] for it in tr.iterates]
    assert all(b <= a + 1e-12 for a, b in zip(f, f[1:]))


def test_flow_does_not_converge_on_non_closed_orbit(sl2):
    tr = gradient_flow(sl2, make_point(sl2, sl2_point(1, 1, 1)), FlowOptions(max_iters=300))
    assert not tr.converged
    x1, y1, z1 = sl2_coords(tr.final.mat)
    # drifting to the fixed point (1, 0, 0)
    assert abs(y1) < 0.1 and abs(z1) < 0.1


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.95, 0.95), st.floats(-3, 3), st.sampled_from([1, -1]))
def test_flow_monotone_property(sl2, c, z, sign):
    tr = gradient_flow(sl2, make_point(sl2, on_hyperboloid(c, z, sign)), FlowOptions(max_iters=30))
    f = [it[1] for it in tr.iterates]
    assert all(b <= a + 1e-12 for a, b in zip(f, f[1:]))


def test_closed_examples(sl2):
    r = is_orbit_closed(sl2, make_point(sl2, on_hyperboloid(0.4, 0.0)))
    assert r.closed and r.trace.n_iters == 0
    r = is_orbit_closed(sl2, make_point(sl2, on_hyperboloid(0.4, 1.5)))
    assert r.closed


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_non_closed_orbits(sl2, s):
    r = is_orbit_closed(sl2, make_point(sl2, sl2_point(1, s, s)))
    assert not r.closed


@pytest.mark.parametrize("signs", [(1, -1), (-1, 1), (-1, -1)])
def test_other_non_closed_orbits(sl2, signs):
    a, b = signs
    r = is_orbit_closed(sl2, make_point(sl2, sl2_point(a, b * 1.0, 1.0)))
    assert not r.closed


def test_closed_test_inconclusive_on_tiny_budget(sl2):
    with pytest.raises(Inconclusive):
        is_orbit_closed(sl2, make_point(sl2, sl2_point(1, 0.5, 0.5)), FlowOptions(max_iters=5), chunk=5)


def test_weights_at_plus_minus_v(sl2):
    for p in (V, -V):
        w = slice_rep_weights(sl2, p)
        assert len(w) == 1
        assert sorted(np.real(w[0]["weights"])) == pytest.approx([-2, 2], abs=1e-9)
        assert np.abs(np.imag(w[0]["weights"])).max() < 1e-12


def test_weight_vectors_are_nilpotent_directions(sl2):
    w = slice_rep_weights(sl2, V)[0]
    for val, vec in zip(np.real(w["weights"]), w["vectors"]):
        m = sl2.algebra.matrix(np.real(vec))
        m = m / np.abs(m).max()
        # +-2 weight spaces are the strictly upper / lower triangular lines
        assert np.allclose(np.diag(m), 0) and (abs(m[0, 1]) < 1e-9 or abs(m[1, 0]) < 1e-9)


def test_principal_point_has_no_weights(sl2):
    assert slice_rep_weights(sl2, mat_exp([[0, 0.3], [-0.3, 0]])) == []


def test_fibres_over_compact_points(sl8, sl8_cfg, rng):
    for at in ([0.0, 0.0], [np.pi / 2, np.pi / 2], [0.0, np.pi / 2]):
        u = sl8_cfg.a0.point(at)
        nc = transversal(sl8, u).slice_noncompact
        for _ in range(5):
            xi = sl8.algebra.matrix(rng.normal(size=len(nc)) @ nc)
            x = mat_exp(xi) @ u
            assert in_kempf_ness(sl8, x)
            assert np.allclose(lambda_projection(sl8, make_point(sl8, x)), u, atol=1e-9)


def test_translated_tori_in_kempf_ness(sl2):
    for s in np.linspace(-2, 2, 9):
        a = mat_exp([[0, s], [s, 0]])
        assert in_kempf_ness(sl2, a @ V) and in_kempf_ness(sl2, -a @ V)
