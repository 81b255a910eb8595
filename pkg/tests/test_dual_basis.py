import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biharm.dual_basis import (
    build_dual_coeffs,
    eval_dual,
    multiplier_transform,
    reference_mass,
)
from biharm.fe_spaces import eval_basis
from biharm.quadrature import triangle_rule

from conftest import square_space

ref_point = st.tuples(st.floats(0, 1), st.floats(0, 1)).filter(lambda p: p[0] + p[1] <= 1)


def test_p1_reference_mass():
    assert np.allclose(reference_mass(1), (0.5 / 12) * (np.eye(3) + 1), atol=1e-16)


def test_p1_coefficients():
    d = build_dual_coeffs(1)
    alpha = np.array([[3, -1, -1], [-1, 3, -1], [-1, -1, 3]], dtype=float)
    assert np.allclose(d.coeffs, alpha, atol=1e-13)
    assert np.allclose(d.scaling, 0.5 / 3)
    assert np.allclose(np.ones(3) @ d.coeffs, 1.0)


def test_p1_values():
    d = build_dual_coeffs(1)
    assert np.allclose(eval_dual(d, [[0.0, 0.0]]), [[3, -1, -1]])
    assert np.allclose(eval_dual(d, [[1 / 3, 1 / 3]]), 1 / 3)


@pytest.mark.parametrize("k", [1, 2])
def test_biorthogonality_on_reference(k):
    d = build_dual_coeffs(k)
    rule = triangle_rule(2 * k)
    mu = eval_dual(d, rule.points)
    values, _ = eval_basis(k, rule.points)
    modified = values @ d.transform.T
    pairing = np.einsum("q,qi,qj->ij", rule.weights, mu, modified)
    assert np.abs(pairing - np.diag(d.scaling)).max() < 1e-13
    assert np.all(d.scaling > 0)
    assert abs(np.linalg.det(d.coeffs)) > 1e-8


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([1, 2]), ref_point)
def test_constants_in_span(k, p):
    assert eval_dual(build_dual_coeffs(k), [p]).sum() == pytest.approx(1.0, abs=1e-12)


def test_p2_modified_basis_partition_of_unity():
    d = build_dual_coeffs(2)
    assert np.allclose(d.transform.sum(axis=0), 1.0)


@pytest.mark.parametrize("k", [0, 3])
def test_unsupported_order(k):
    with pytest.raises(ValueError):
        build_dual_coeffs(k)


def test_global_transform():
    s = square_space(2, 2)
    T = multiplier_transform(s)
    assert np.allclose(T.sum(axis=0), 1.0)
    assert np.allclose(T.T @ np.ones(s.n_dofs), 1.0)
    assert np.array_equal(multiplier_transform(square_space(2, 1)).toarray(), np.eye(9))
