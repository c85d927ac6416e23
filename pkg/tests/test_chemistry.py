"""Reaction-invariant reductions and species recovery."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from femlbm.chemistry import (
    BimolecularSystem,
    CalciteSystem,
    bimolecular_recover,
    calcite_recover,
    lattice_weights,
    lumped_mesh_weights,
    total_concentration,
)
from femlbm.fem.mesh import structured_mesh
from femlbm.lbm.core import LbmGrid

conc = st.floats(0.0, 10.0, allow_nan=False, allow_infinity=False)


# -- bimolecular recovery ---------------------------------------------------

@given(u_A=conc, u_B=conc, u_C=conc,
       n_A=st.integers(1, 4), n_B=st.integers(1, 4), n_C=st.integers(1, 4))
@settings(max_examples=100, deadline=None)
def test_bimolecular_roundtrip_preserves_invariants(u_A, u_B, u_C,
                                                    n_A, n_B, n_C):
    sys = BimolecularSystem(n_A, n_B, n_C)
    alpha, beta = sys.invariants(u_A, u_B, u_C)
    rA, rB, rC = bimolecular_recover(sys, alpha, beta)
    a2, b2 = sys.invariants(rA, rB, rC)
    assert a2 == pytest.approx(float(alpha), rel=1e-12, abs=1e-12)
    assert b2 == pytest.approx(float(beta), rel=1e-12, abs=1e-12)
    #instantaneous reaction: the reagents never coexist
    assert min(rA, rB) == pytest.approx(0.0, abs=1e-12)
    assert rA >= 0 and rB >= 0 and rC >= 0


def test_bimolecular_limiting_reagent_cases():
    sys = BimolecularSystem(1, 2, 1)
    #excess A: alpha = 1, beta = 0.4 -> all B consumed
    u_A, u_B, u_C = bimolecular_recover(sys, 1.0, 0.4)
    assert u_B == 0.0
    assert u_A == pytest.approx(1.0 - 0.5 * 0.4)
    assert u_C == pytest.approx(0.5 * 0.4)
    #excess B: alpha = 0.2, beta = 1 -> all A consumed
    u_A, u_B, u_C = bimolecular_recover(sys, 0.2, 1.0)
    assert u_A == 0.0
    assert u_C == pytest.approx(0.2)
    assert u_B == pytest.approx(1.0 - 2 * 0.2)


def test_bimolecular_clamps_roundoff_but_rejects_real_negatives():
    sys = BimolecularSystem()
    u_A, _, _ = bimolecular_recover(sys, -1e-13, 0.0)
    assert u_A == 0.0
    with pytest.raises(ValueError):
        bimolecular_recover(sys, -1e-6, 0.0)


def test_bimolecular_vectorizes():
    sys = BimolecularSystem(1, 2, 1)
    alpha = np.array([1.0, 0.2, 0.0])
    beta = np.array([0.4, 1.0, 0.0])
    u_A, u_B, u_C = bimolecular_recover(sys, alpha, beta)
    assert u_A.shape == (3,)
    np.testing.assert_allclose(u_A, [0.8, 0.0, 0.0])
    np.testing.assert_allclose(u_C, [0.2, 0.2, 0.0])


def test_bimolecular_rejects_bad_stoichiometry():
    with pytest.raises(ValueError):
        BimolecularSystem(0, 1, 1)


# -- calcite recovery -------------------------------------------------------

@given(u2=st.floats(1e-10, 1.0), psi1=st.floats(0.0, 1.0),
       psi2=st.floats(-0.5, 1.0))
@settings(max_examples=100, deadline=None)
def test_calcite_recovery_satisfies_equilibrium_and_invariants(u2, psi1,
                                                               psi2):
    sys = CalciteSystem()
    u1, u2r, u3 = calcite_recover(sys, psi1, psi2)
    assert u1 >= 0 and u2r >= 0
    #invariants reproduced exactly
    p1, p2 = sys.invariants(u1, u2r, u3)
    assert p1 == pytest.approx(psi1, rel=1e-12, abs=1e-12)
    assert p2 == pytest.approx(psi2, rel=1e-12, abs=1e-12)
    #solubility equilibrium K_sp u1 = u2 u3; the scale includes the
    #cancellation magnitude of u3 = psi2 + u2, which bounds the best
    #attainable absolute accuracy of the product u2 u3
    scale = max(sys.K_sp * u1, abs(u2r * u3), sys.K_sp,
                u2r * (abs(psi2) + u2r))
    assert abs(sys.K_sp * u1 - u2r * u3) <= 1e-12 * scale


def test_calcite_conjugate_form_is_stable_for_large_psi2():
    #psi2 >> K: naive quadratic root cancels catastrophically
    sys = CalciteSystem(K_sp=3.36e-9)
    psi1, psi2 = 1e-3, 10.0
    u1, u2, u3 = calcite_recover(sys, psi1, psi2)
    #reference via exact rational arithmetic
    from fractions import Fraction
    K = Fraction(sys.K_sp)
    b = Fraction(psi2) - K
    disc = b * b + 4 * K * Fraction(psi1)
    import math
    root = math.sqrt(float(disc))
    u2_ref = 2.0 * float(K) * psi1 / (float(b) + root)
    assert u2 == pytest.approx(u2_ref, rel=1e-12)
    assert u2 > 0


def test_calcite_scalar_inputs_return_floats():
    sys = CalciteSystem()
    out = calcite_recover(sys, 0.01, 0.002)
    assert all(isinstance(x, float) for x in out)
    arr = calcite_recover(sys, np.array([0.01]), np.array([0.002]))
    assert all(isinstance(x, np.ndarray) for x in arr)


def test_calcite_zero_invariants_give_the_equal_equilibrium_state():
    #psi1 = psi2 = 0 means u1 = u2 = u3; equilibrium then forces the
    #common value K_sp (the root continuous in psi1 -> 0+)
    sys = CalciteSystem()
    u1, u2, u3 = calcite_recover(sys, 0.0, 0.0)
    assert u1 == pytest.approx(sys.K_sp, rel=1e-12)
    assert u2 == pytest.approx(sys.K_sp, rel=1e-12)
    assert u3 == pytest.approx(sys.K_sp, rel=1e-12)


def test_calcite_rejects_nonpositive_ksp():
    with pytest.raises(ValueError):
        CalciteSystem(K_sp=0.0)


def test_calcite_equilibrium_residual_over_many_samples():
    #large randomized sweep: the recovery must satisfy the equilibrium
    #relation to near round-off across the whole admissible range
    sys = CalciteSystem()
    rng = np.random.default_rng(42)
    psi1 = 10.0 ** rng.uniform(-8, 0, 10 ** 5)
    psi2 = np.where(rng.random(10 ** 5) < 0.5, 1, -1) * \
        10.0 ** rng.uniform(-8, 0, 10 ** 5)
    u1, u2, u3 = calcite_recover(sys, psi1, psi2)
    #scale covers the cancellation in u3 = psi2 + u2 (see the property
    #test above): the product u2 u3 carries absolute error of order
    #eps * u2 * (|psi2| + u2)
    scale = np.maximum.reduce([sys.K_sp * u1, np.abs(u2 * u3),
                               np.full_like(u1, sys.K_sp),
                               u2 * (np.abs(psi2) + u2)])
    rel = np.abs(sys.K_sp * u1 - u2 * u3) / scale
    assert rel.max() < 1e-12
    assert u1.min() >= 0 and u2.min() >= 0


# -- quadrature weights -----------------------------------------------------

def test_lumped_mesh_weights_integrate_linears_exactly():
    mesh = structured_mesh((0.0, 0.0), (2.0, 1.0), (8, 5))
    w = lumped_mesh_weights(mesh)
    assert w.sum() == pytest.approx(2.0, rel=1e-12)
    #exact for linear fields: integral of x over [0,2]x[0,1] is 2
    assert total_concentration(mesh.nodes[:, 0], w) == pytest.approx(
        2.0, rel=1e-12)


def test_lattice_weights_trapezoid_rule():
    grid = LbmGrid(origin=(0.0, 0.0), h=0.25, dims=(5, 5))
    w = lattice_weights(grid)
    assert w.sum() == pytest.approx(1.0, rel=1e-12)  # unit square
    #trapezoid is exact for linears
    X = grid.coords()
    assert total_concentration(X[..., 0], w) == pytest.approx(0.5, rel=1e-12)
    #corner weight is a quarter cell
    assert w[0, 0] == pytest.approx(0.25 * 0.25 ** 2)


def test_total_concentration_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        total_concentration(np.ones(3), np.ones(4))
