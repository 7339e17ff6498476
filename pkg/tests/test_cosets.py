import numpy as np
import pytest

from dcoset.cosets import (
    beta,
    is_principal,
    isotropy_dim,
    lambda_projection,
    make_point,
    star_action,
    tau_x,
    tau_x_matrix,
    theta_x,
    theta_x_matrix,
    transversal,
)
from dcoset.errors import MembershipViolation, NotInH
from dcoset.golden import V
from dcoset.matrix import mat_exp, subspace_distance


def rot(t):
    return np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]], dtype=complex)


def random_h(setup, rng, scale=0.5):
    c = rng.normal(size=setup.decomposition.dim("h")) * scale
    return mat_exp(setup.algebra.matrix(c @ setup.decomposition.bases["h"]))


def test_beta_identity(sl2, sl8):
    for s in (sl2, sl8):
        assert np.allclose(beta(s, np.eye(s.n)).mat, np.eye(s.n))


def test_beta_of_torus_element(sl2):
    lam = 1.4
    assert np.allclose(beta(sl2, np.diag([lam, 1 / lam])).mat, np.diag([lam**2, lam**-2]))


def test_beta_points_are_in_X(sl2, sl8, rng):
    for s in (sl2, sl8):
        for _ in range(10):
            x = beta(s, s.random_G(rng))
            assert np.allclose(s.theta.group(x.mat) @ x.mat, np.eye(s.n), atol=1e-8)
            assert np.allclose(s.theta.group(x.u) @ x.u, np.eye(s.n), atol=1e-8)
            assert np.allclose(s.theta.algebra(x.Y), -x.u @ x.Y @ np.linalg.inv(x.u), atol=1e-8)


def test_beta_rejects_non_members(sl2):
    with pytest.raises(MembershipViolation):
        beta(sl2, np.diag([1j, -1j]))
    with pytest.raises(MembershipViolation):
        make_point(sl2, np.array([[2, 0], [0, 0.5]]) @ rot(0.3))


def test_star_examples(sl2, rng):
    x = make_point(sl2, [[1.2, 0.4], [-0.4, (1 - 0.4**2) / 1.2]])
    assert np.allclose(star_action(sl2, np.eye(2), x).mat, x.mat)
    lam = 0.7
    a, b, d = x.mat[0, 0], x.mat[0, 1], x.mat[1, 1]
    got = star_action(sl2, np.diag([lam, 1 / lam]), x).mat
    assert np.allclose(got, [[lam**2 * a, b], [-b, d / lam**2]])


def test_star_is_an_action(sl8, rng):
    x = beta(sl8, sl8.random_G(rng))
    h1, h2 = random_h(sl8, rng), random_h(sl8, rng)
    lhs = star_action(sl8, h1 @ h2, x).mat
    rhs = star_action(sl8, h1, star_action(sl8, h2, x)).mat
    assert np.allclose(lhs, rhs, atol=1e-8)


def test_star_rejects_non_h(sl2):
    with pytest.raises(NotInH):
        star_action(sl2, rot(0.4), make_point(sl2, np.eye(2)))


def test_lambda_examples(sl2, rng):
    assert np.allclose(lambda_projection(sl2, make_point(sl2, np.eye(2))), np.eye(2))
    for s in (0.3, -1.1, 2.0):
        x = make_point(sl2, mat_exp([[0, s], [s, 0]]) @ V)
        assert np.allclose(lambda_projection(sl2, x), V, atol=1e-10)


def test_lambda_equivariant_under_g0(sl2, rng):
    for _ in range(10):
        x = beta(sl2, sl2.random_G(rng))
        k = rot(rng.uniform(0, 2 * np.pi))
        moved = make_point(sl2, sl2.star(k, x.mat))
        assert np.allclose(lambda_projection(sl2, moved), sl2.star(k, x.u), atol=1e-9)


def test_theta_x_examples(sl2, rng):
    z = sl2.algebra.matrix(rng.normal(size=3))
    e = make_point(sl2, np.eye(2))
    assert np.allclose(theta_x(sl2, e, z), sl2.theta.algebra(z))
    x = beta(sl2, sl2.random_G(rng))
    assert np.allclose(theta_x(sl2, x, theta_x(sl2, x, z)), z, atol=1e-9)
    g = sl2.random_G(rng)
    assert np.allclose(theta_x(sl2, x, theta_x(sl2, x, g, on="group"), on="group"), g, atol=1e-8)


def test_tau_on_a0_is_conjugation_by_uv(sl2):
    for t in (0.2, 1.0, 2.5):
        u = rot(t)
        z = sl2.algebra.matrix([0.3, -1.2, 0.5])
        uv = u @ V
        assert np.allclose(tau_x(sl2, u, z), uv @ z @ np.linalg.inv(uv), atol=1e-12)
        assert np.allclose(tau_x_matrix(sl2, u), theta_x_matrix(sl2, u) @ sl2.coord_map("sigma"))


def test_transversal_sl2_at_e(sl2):
    tv = transversal(sl2, np.eye(2))
    assert tv.slice_dim == 1
    m = sl2.algebra.matrix(tv.slice_basis[0])
    assert np.allclose(m / m[0, 1], [[0, 1], [-1, 0]])


def test_transversal_sl2_at_v(sl2):
    tv = transversal(sl2, V)
    assert tv.slice_dim == 2
    assert subspace_distance(tv.slice_basis, sl2.decomposition.bases["q"], 3) < 1e-9


def test_transversal_sl8_at_e(sl8):
    tv = transversal(sl8, np.eye(8))
    assert tv.slice_dim == 12
    assert len(tv.slice_noncompact) == 6


@pytest.mark.parametrize("fixture", ["sl2", "sl8"])
def test_transversal_invariants(fixture, request, rng):
    s = request.getfixturevalue(fixture)
    dim_x = s.decomposition.dim("p")
    for _ in range(5):
        x = beta(s, s.random_G(rng))
        tv = transversal(s, x)
        for row in tv.slice_basis:
            z = s.algebra.matrix(row)
            assert np.allclose(theta_x(s, x, z), -z, atol=1e-8)
            assert np.allclose(s.sigma.algebra(z), -z, atol=1e-8)
        assert tv.slice_dim + s.decomposition.dim("h") - tv.isotropy_dim == dim_x
        assert isotropy_dim(s, x) == tv.isotropy_dim


def test_principal_points_sl2(sl2, sl2_cfg):
    for t in np.linspace(0.1, 6.2, 9):
        if min(abs(t - np.pi / 2), abs(t - 3 * np.pi / 2)) < 1e-3:
            continue
        assert is_principal(sl2, sl2_cfg.a0.point([t])).principal
    for p in (V, -V):
        res = is_principal(sl2, p)
        assert not res.principal and not res.algebra_trivial
        assert sorted(np.real(res.weights[0]["weights"])) == pytest.approx([-2, 2], abs=1e-9)


def test_sl8_identity_not_principal(sl8):
    res = is_principal(sl8, np.eye(8))
    assert not res.principal
    assert res.slice_dim == 12


def test_principal_flags_algebra_only(sl2_cfg):
    from dcoset.symmetric import GroupSpec, build_setup

    spec = sl2_cfg.group
    bare = build_setup(GroupSpec(2, spec.algebra_basis, spec.sigma, spec.theta, spec.delta, spec.phi))
    assert is_principal(bare, rot(0.3)).algebra_level_only
