import numpy as np
import pytest

from mgnlra.bench import A_STAR, make_quadratic, quadratic_signal, tangent_basis
from mgnlra.core import glrr_residual, self_convolve
from mgnlra.projection import project_onto_glrr, weighted_lstsq, weighted_pinv_apply
from mgnlra.subspace import basis_Z
from mgnlra.weights import apply_mask, ar_precision, identity_weight, seminorm
from oracles import nullspace_basis, oblique_projection, orth_projector, random_stable_glrr


def test_quadratic_in_range_is_fixed():
    N = 200
    Y, _ = quadratic_signal(N)
    res = weighted_pinv_apply(basis_Z(A_STAR, N).Z, identity_weight(N), Y)
    np.testing.assert_allclose(res.proj, Y, atol=1e-10)


def test_orthogonal_input_projects_to_zero(rng):
    N, a = 25, random_stable_glrr(rng, 2)
    Zr = nullspace_basis(a, N)
    x = rng.standard_normal(N)
    x -= orth_projector(Zr) @ x
    res = weighted_pinv_apply(basis_Z(a, N).Z, identity_weight(N), x)
    assert np.linalg.norm(res.proj) <= 1e-12 * np.linalg.norm(x) + 1e-14


def test_identity_dense_oracle(rng):
    N = 20
    a = rng.standard_normal(3)
    x = rng.standard_normal(N)
    res = weighted_pinv_apply(basis_Z(a, N).Z, identity_weight(N), x)
    np.testing.assert_allclose(res.proj, orth_projector(nullspace_basis(a, N)) @ x,
                               atol=1e-10)


def test_zero_input():
    proj, _ = project_onto_glrr([0.3, -1.0, 0.2], identity_weight(10), np.zeros(10))
    assert np.all(proj.proj == 0)


def test_ar1_oblique_oracle(rng):
    N = 30
    a = random_stable_glrr(rng, 3)
    w = ar_precision([0.9], 1.0, N)
    x = rng.standard_normal(N)
    proj, _ = project_onto_glrr(a, w, x)
    ref = oblique_projection(nullspace_basis(a, N), w.dense(), x)
    assert np.linalg.norm(proj.proj - ref) <= 1e-8 * np.linalg.norm(ref)


def test_quadratic_residual_construction():
    # R = Rhat - Pi Rhat is W-orthogonal to Z((a*)^2); circulant route at small N
    N = 60
    inst = make_quadratic(N)
    proj, _ = project_onto_glrr(self_convolve(A_STAR), identity_weight(N), inst.residual_raw)
    np.testing.assert_allclose(inst.residual, inst.residual_raw - proj.proj, atol=1e-9)
    Zt = tangent_basis(N)
    P = orth_projector(Zt)
    np.testing.assert_allclose(P, orth_projector(basis_Z(self_convolve(A_STAR), N).Z),
                               atol=1e-7)


@pytest.mark.parametrize("N", [15, 200, 2000])
@pytest.mark.parametrize("weight", ["identity", "ar1", "masked"])
def test_idempotent_and_real(N, weight, rng):
    a = random_stable_glrr(rng, 3)
    w = identity_weight(N) if weight == "identity" else ar_precision([0.9], 1.0, N)
    if weight == "masked":
        m = np.ones(N, bool)
        m[N // 3: N // 3 + 3] = False
        w = apply_mask(w, m)
    x = rng.standard_normal(N)
    p1, _ = project_onto_glrr(a, w, x)
    p2, _ = project_onto_glrr(a, w, p1.proj)
    assert seminorm(w, p2.proj - p1.proj) <= 1e-10 * seminorm(w, p1.proj)
    assert p1.imag_residual <= 1e-9
    assert np.linalg.norm(glrr_residual(a, p1.proj)) <= 1e-8 * np.linalg.norm(p1.proj)


def test_projection_minimises_seminorm(rng):
    N = 40
    a = random_stable_glrr(rng, 2)
    w = ar_precision([0.5, 0.2], 1.0, N)
    x = rng.standard_normal(N)
    proj, basis = project_onto_glrr(a, w, x)
    best = seminorm(w, x - proj.proj)
    for _ in range(100):
        c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        cand = np.real(basis.Z @ (proj.q + 0.1 * c))
        assert best <= seminorm(w, x - cand) + 1e-12


def test_masked_values_are_ignored(rng):
    N = 30
    m = np.ones(N, bool)
    m[[4, 5, 17]] = False
    w = apply_mask(ar_precision([0.7], 1.0, N), m)
    a = random_stable_glrr(rng, 2)
    x = rng.standard_normal(N)
    y = x.copy()
    y[~m] = rng.standard_normal(3) * 100
    p1, _ = project_onto_glrr(a, w, x)
    p2, _ = project_onto_glrr(a, w, y)
    np.testing.assert_allclose(p1.proj, p2.proj, atol=1e-12)


def test_lstsq_full_rank_and_deficient():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((10, 3))
    b = rng.standard_normal(10)
    q, flag = weighted_lstsq(A, b)
    np.testing.assert_allclose(q, np.linalg.lstsq(A, b, rcond=None)[0], rtol=1e-12)
    assert not flag
    A[:, 2] = A[:, 0] + A[:, 1]
    q, flag = weighted_lstsq(A, b)
    assert flag
    np.testing.assert_allclose(q, np.linalg.pinv(A) @ b, rtol=1e-8)
    Q, flag = weighted_lstsq(A, np.column_stack([b, 2 * b]))
    assert flag and Q.shape == (3, 2)
    np.testing.assert_allclose(Q[:, 1], 2 * Q[:, 0], rtol=1e-12)
