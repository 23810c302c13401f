"""Node assembly, passivity certificates, coupling, and the output-passivity margin."""

import numpy as np
import pytest

from phsplit import (
    CouplingNotMonotone,
    CouplingOperator,
    DimensionMismatch,
    NotDissipative,
    WeightNotSPD,
    assemble_node,
    check_coupling_monotone,
    check_dissipativity,
    compose_diagonal,
    estimate_psop_epsilon,
    transfer_function,
)
from phsplit.models import (
    FORCE_IN,
    VELOCITY_IN,
    HeatCGParams,
    Wave1dParams,
    build_heat_cg1d,
    build_wave1d,
    heat_kernel_total_mass,
)


def scalar_node(a=-1.0, h=1.0):
    return assemble_node(
        A=[[a]],
        B_ext=np.zeros((1, 0)),
        B_int=[[1.0]],
        C_ext=np.zeros((0, 1)),
        C_int=[[1.0]],
        D=[[0.0]],
        H=[[h]],
    )


def test_assemble_validates_weight():
    with pytest.raises(WeightNotSPD):
        scalar_node(h=-1.0)
    with pytest.raises(WeightNotSPD):
        scalar_node(h=0.0)
    with pytest.raises(WeightNotSPD):
        assemble_node(
            A=np.zeros((2, 2)),
            B_ext=np.zeros((2, 0)),
            B_int=np.zeros((2, 0)),
            C_ext=np.zeros((0, 2)),
            C_int=np.zeros((0, 2)),
            D=np.zeros((0, 0)),
            H=[[1.0, 0.5], [-0.5, 1.0]],  # not symmetric
        )


def test_assemble_validates_shapes():
    with pytest.raises(DimensionMismatch):
        assemble_node(
            A=[[0.0]],
            B_ext=np.zeros((2, 0)),  # wrong row count
            B_int=[[1.0]],
            C_ext=np.zeros((0, 1)),
            C_int=[[1.0]],
            D=[[0.0]],
            H=[[1.0]],
        )
    with pytest.raises(DimensionMismatch):
        assemble_node(
            A=[[0.0]],
            B_ext=np.zeros((1, 0)),
            B_int=[[1.0]],
            C_ext=np.zeros((0, 1)),
            C_int=[[1.0]],
            D=np.zeros((2, 2)),  # D must be (m_ext+m_int) square
            H=[[1.0]],
        )


def test_scalar_certificate():
    rep = check_dissipativity(scalar_node())
    assert rep.is_dissipative
    assert rep.max_sym_eig == pytest.approx(0.0, abs=1e-15)

    bad = check_dissipativity(scalar_node(a=1.0))
    assert not bad.is_dissipative
    assert bad.max_sym_eig == pytest.approx(1.0, rel=1e-12)


def test_wave1d_energy_structure():
    node = build_wave1d(Wave1dParams(16))
    # undamped wave dynamics are skew in the energy inner product
    S = node.H @ node.A
    assert np.max(np.abs(S + S.T)) <= 1e-14
    # port columns cancel against output rows in the certificate
    assert np.allclose(node.H @ node.B_int, node.C_int.T, atol=1e-14)
    assert check_dissipativity(node).max_sym_eig == 0.0

    damped = build_wave1d(Wave1dParams(16, damping=1.0))
    rep = check_dissipativity(damped)
    assert rep.is_dissipative
    Sd = damped.H @ damped.A
    assert np.min(np.linalg.eigvalsh(0.5 * (Sd + Sd.T))) < -1e-3


def test_wave1d_port_constants():
    n = 16
    node = build_wave1d(Wave1dParams(n))  # velocity in, force out at the right end
    assert (node.n, node.m_ext, node.m_int) == (2 * n + 1, 0, 1)
    col = node.B_int[:, 0]
    assert col[-1] == pytest.approx(float(n))  # 1/h into the last strain face
    assert np.count_nonzero(col) == 1
    assert node.C_int[0, -1] == pytest.approx(1.0)  # unit modulus: traction = strain

    force = build_wave1d(Wave1dParams(n, ), port_mode=FORCE_IN)
    assert force.n == 2 * n  # right strain face dropped
    assert np.count_nonzero(force.B_int[:, 0]) == 1


def test_heat_structure():
    n = 16
    node = build_heat_cg1d(HeatCGParams(n))
    assert (node.n, node.m_ext, node.m_int) == (2 * n, 0, 1)
    assert heat_kernel_total_mass() == 1.0
    assert np.allclose(node.H @ node.B_int, node.C_int.T, atol=1e-14)
    for nn in (8, 32):
        hn = build_heat_cg1d(HeatCGParams(nn))
        assert check_dissipativity(hn).is_dissipative
        # memory relaxation dissipates strictly in the state block
        S = hn.H @ hn.A
        assert np.max(np.linalg.eigvalsh(0.5 * (S + S.T))) < -1e-12


def test_coupling_validation():
    CouplingOperator(np.array([[0.0, -1.0], [1.0, 0.0]]))
    CouplingOperator(np.array([[-1.0]]))
    with pytest.raises(CouplingNotMonotone):
        CouplingOperator(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(DimensionMismatch):
        CouplingOperator(np.zeros((2, 3)))
    assert check_coupling_monotone([[0.0]])
    assert not check_coupling_monotone([[1e-6]])


def test_compose_diagonal_blocks():
    wave = build_wave1d(Wave1dParams(4))
    heat = build_heat_cg1d(HeatCGParams(4))
    node = compose_diagonal([wave, heat])
    n1, n2 = wave.n, heat.n
    assert node.n == n1 + n2
    assert node.m_int == wave.m_int + heat.m_int
    assert node.m_ext == 0
    assert np.array_equal(node.A[:n1, :n1], wave.A)
    assert np.array_equal(node.A[n1:, n1:], heat.A)
    assert not node.A[:n1, n1:].any()
    assert np.array_equal(node.H[n1:, n1:], heat.H)
    # internal ports keep subsystem order
    assert np.array_equal(node.B_int[:n1, 0], wave.B_int[:, 0])
    assert np.array_equal(node.B_int[n1:, 1], heat.B_int[:, 0])
    got = check_dissipativity(node).max_sym_eig
    parts = max(
        check_dissipativity(wave).max_sym_eig, check_dissipativity(heat).max_sym_eig
    )
    assert got == pytest.approx(parts, abs=1e-12)


def test_psop_epsilon_undamped_is_zero():
    node = build_wave1d(Wave1dParams(8), external_mode=FORCE_IN)
    est = estimate_psop_epsilon(node)
    assert not est.vacuous
    assert est.epsilon == 0.0


def test_psop_epsilon_damped_oracle():
    # uniform damping d with a stress-in/velocity-out end port: margin = h*d
    n, d = 16, 1.0
    node = build_wave1d(Wave1dParams(n, damping=d), external_mode=FORCE_IN)
    est = estimate_psop_epsilon(node)
    assert not est.vacuous
    assert est.epsilon == pytest.approx(d / n, rel=1e-4)

    est2 = estimate_psop_epsilon(
        build_wave1d(Wave1dParams(8, damping=2.0), external_mode=FORCE_IN)
    )
    assert est2.epsilon == pytest.approx(2.0 / 8.0, rel=1e-4)


def test_psop_epsilon_vacuous_and_invalid():
    closed = build_wave1d(Wave1dParams(8))
    est = estimate_psop_epsilon(closed)  # no external output rows at all
    assert est.vacuous
    assert est.epsilon == float("inf")
    with pytest.raises(NotDissipative):
        estimate_psop_epsilon(scalar_node(a=1.0))


def test_transfer_function_scalar():
    node = scalar_node()
    for s in (1.0, 2.0 + 1.0j):
        G = transfer_function(node, s)
        assert G.shape == (1, 1)
        assert G[0, 0] == pytest.approx(1.0 / (s + 1.0), rel=1e-14)


def test_certificate_scaling_with_weight():
    # closed node: verdict invariant under H -> alpha*H
    closed = assemble_node(
        A=[[0.0, 1.0], [-1.0, 0.0]],
        B_ext=np.zeros((2, 0)),
        B_int=np.zeros((2, 0)),
        C_ext=np.zeros((0, 2)),
        C_int=np.zeros((0, 2)),
        D=np.zeros((0, 0)),
        H=np.eye(2),
    )
    for alpha in (0.1, 1.0, 10.0):
        scaled = assemble_node(
            A=closed.A, B_ext=closed.B_ext, B_int=closed.B_int,
            C_ext=closed.C_ext, C_int=closed.C_int, D=closed.D,
            H=alpha * np.eye(2),
        )
        assert check_dissipativity(scaled).is_dissipative

    # ported node: the state block of the certificate scales exactly
    base = scalar_node(h=1.0)
    scaled = scalar_node(h=3.0)
    K1 = base.certificate_matrix()
    K3 = scaled.certificate_matrix()
    assert K3[0, 0] == pytest.approx(3.0 * K1[0, 0])
