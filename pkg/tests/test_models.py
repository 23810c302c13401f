"""Model builders: parameter validation, port layout, exact certificates."""

import numpy as np
import pytest

from phsplit import BadParams, NonconformingInterface, TimeGrid
from phsplit.node import check_dissipativity
from phsplit.models import (
    FORCE_IN,
    VELOCITY_IN,
    EdgeSpec,
    HeatCGParams,
    Wave1dParams,
    Wave2dParams,
    build_heat_cg1d,
    build_lshape_problem,
    build_scalar_demo,
    build_wave1d,
    build_wave2d_rect,
    build_wave_heat_problem,
    heat_default_state,
    heat_kernel_total_mass,
    scalar_demo_pole,
    wave1d_default_state,
    wave2d_default_state,
)


def test_wave1d_param_validation():
    with pytest.raises(BadParams):
        Wave1dParams(1)
    with pytest.raises(BadParams):
        Wave1dParams(8, rho=-1.0)
    with pytest.raises(BadParams):
        Wave1dParams(8, modulus=0.0)
    with pytest.raises(BadParams):
        Wave1dParams(8, damping=-0.1)
    with pytest.raises(Exception):
        Wave1dParams(8, rho=np.ones(5))  # wrong per-cell length
    with pytest.raises(BadParams):
        build_wave1d(Wave1dParams(8), port_mode="sideways")


def test_wave1d_layout_and_port_constants():
    nc = 16
    node = build_wave1d(Wave1dParams(nc))
    # velocity-in keeps all nc+1 faces: momenta plus strains
    assert (node.n, node.m_ext, node.m_int) == (2 * nc + 1, 0, 1)
    h = 1.0 / nc
    # port input enters the last strain row with the 1/h face factor
    assert np.count_nonzero(node.B_int) == 1
    assert node.B_int[-1, 0] == pytest.approx(1.0 / h)
    assert np.count_nonzero(node.C_int) == 1
    assert node.C_int[0, -1] == pytest.approx(1.0)  # stress T*q with T = 1
    # collocation: H B = C^T exactly
    assert np.array_equal(node.H @ node.B_int, node.C_int.T)

    forced = build_wave1d(Wave1dParams(nc), port_mode=FORCE_IN)
    assert (forced.n, forced.m_ext, forced.m_int) == (2 * nc, 0, 1)
    assert forced.B_int[nc - 1, 0] == pytest.approx(1.0 / h)

    ext = build_wave1d(Wave1dParams(nc), external_mode=FORCE_IN)
    assert (ext.n, ext.m_ext, ext.m_int) == (2 * nc, 1, 1)
    assert ext.B_ext[0, 0] == pytest.approx(1.0 / h)


def test_wave1d_exact_certificate():
    node = build_wave1d(Wave1dParams(16))
    S = node.H @ node.A
    assert np.max(np.abs(S + S.T)) <= 1e-14  # undamped: exactly skew
    rep = check_dissipativity(node)
    assert rep.is_dissipative
    assert rep.max_sym_eig == 0.0

    damped = build_wave1d(Wave1dParams(16, damping=1.0))
    Sd = damped.H @ damped.A
    assert np.min(np.linalg.eigvalsh(0.5 * (Sd + Sd.T))) < -1e-3


def test_wave1d_default_state_shapes():
    for mode, ext in ((VELOCITY_IN, None), (FORCE_IN, None), (VELOCITY_IN, FORCE_IN)):
        node = build_wave1d(Wave1dParams(8), mode, ext)
        x0 = wave1d_default_state(Wave1dParams(8), mode, ext)
        assert x0.shape == (node.n,)
        assert np.any(x0 != 0.0)


def test_heat_node_structure():
    with pytest.raises(BadParams):
        HeatCGParams(1)
    N = 16
    node = build_heat_cg1d(HeatCGParams(N))
    assert (node.n, node.m_ext, node.m_int) == (2 * N, 0, 1)
    assert heat_kernel_total_mass() == 1.0
    assert np.array_equal(node.H @ node.B_int, node.C_int.T)
    # interior dissipation is strict (memory decay plus diffusion)
    S = node.H @ node.A
    assert np.max(np.linalg.eigvalsh(0.5 * (S + S.T))) < -1e-12
    x0 = heat_default_state(HeatCGParams(N))
    assert x0.shape == (2 * N,)
    assert x0[0] == pytest.approx(1.0)  # cos(0) at the flux end


def test_wave2d_validation():
    with pytest.raises(BadParams):
        Wave2dParams(extent=(0.0, 1.0), nx=4, ny=4)
    with pytest.raises(BadParams):
        Wave2dParams(extent=(1.0, 1.0), nx=0, ny=4)
    with pytest.raises(BadParams):
        Wave2dParams(extent=(1.0, 1.0), nx=4, ny=4, edges={"front": EdgeSpec("clamped")})
    with pytest.raises(BadParams):
        Wave2dParams(extent=(1.0, 1.0), nx=4, ny=4, edges={"left": EdgeSpec("zero")})
    with pytest.raises(BadParams):
        Wave2dParams(
            extent=(1.0, 1.0), nx=4, ny=4,
            edges={"left": EdgeSpec("external_stress", span=(2, 7))},
        )


def test_wave2d_closed_rectangle():
    params = Wave2dParams(extent=(1.0, 1.0), nx=4, ny=4)
    node = build_wave2d_rect(params)
    # 16 momenta + 12 interior x-strains... all boundary faces kept when clamped
    assert node.m_ext == 0 and node.m_int == 0
    assert node.n == 4 * 4 + 5 * 4 + 4 * 5  # cells + x-faces + y-faces
    rep = check_dissipativity(node)
    assert rep.is_dissipative
    assert rep.max_sym_eig == 0.0
    x0 = wave2d_default_state(params)
    assert x0.shape == (node.n,)


def test_wave2d_edge_ports():
    hx, hy = 1.0 / 4, 2.0 / 6
    params = Wave2dParams(
        extent=(1.0, 2.0), nx=4, ny=6,
        edges={
            "right": EdgeSpec("interface_stress_in", span=(0, 3)),
            "top": EdgeSpec("external_stress"),
        },
    )
    node = build_wave2d_rect(params)
    assert node.m_int == 3  # three faces in the right-edge span
    assert node.m_ext == 4  # whole top edge
    # faces on stress edges (external and interface) leave the state: 4 + 3
    closed = build_wave2d_rect(Wave2dParams(extent=(1.0, 2.0), nx=4, ny=6))
    assert node.n == closed.n - 7
    # port scaling folds in sqrt(face length): B = 1/(h*sqrt(flen)) at the cell
    assert np.max(np.abs(node.B_int)) == pytest.approx(1.0 / (hx * np.sqrt(hy)))
    assert np.max(np.abs(node.C_int)) == pytest.approx(np.sqrt(hy) / 1.0)
    assert np.array_equal(node.H @ node.B_int, node.C_int.T)
    assert np.array_equal(node.H @ node.B_ext, node.C_ext.T)
    assert check_dissipativity(node).is_dissipative


def test_wave2d_velocity_ports_skew():
    params = Wave2dParams(
        extent=(1.0, 1.0), nx=4, ny=4,
        edges={"left": EdgeSpec("interface_velocity_in")},
    )
    node = build_wave2d_rect(params)
    assert node.m_int == 4
    assert node.n == build_wave2d_rect(Wave2dParams(extent=(1.0, 1.0), nx=4, ny=4)).n
    S = node.H @ node.A
    assert np.max(np.abs(S + S.T)) <= 1e-14
    assert np.array_equal(node.H @ node.B_int, node.C_int.T)


def test_wave_heat_problem_dims():
    problem = build_wave_heat_problem(
        Wave1dParams(16), HeatCGParams(16), TimeGrid(2.0, 200)
    )
    assert problem.node.n == 33 + 32
    assert (problem.node.m_ext, problem.node.m_int) == (0, 2)
    assert np.array_equal(problem.coupling.N_c, [[0.0, -1.0], [1.0, 0.0]])
    assert problem.x0.shape == (65,)

    damped = build_wave_heat_problem(
        Wave1dParams(16, damping=1.0), HeatCGParams(16), TimeGrid(2.0, 200),
        external_mode=FORCE_IN,
    )
    assert damped.node.n == 32 + 32
    assert (damped.node.m_ext, damped.node.m_int) == (1, 2)


def test_lshape_problem_dims_and_coupling():
    problem = build_lshape_problem(TimeGrid(1.0, 100))
    # body 1: 4x8 grid with 4 interface faces dropped; body 2: 4x4 closed
    assert problem.node.n == 156
    assert (problem.node.m_ext, problem.node.m_int) == (4, 8)
    eye = np.eye(4)
    expected = np.block([[np.zeros((4, 4)), eye], [-eye, np.zeros((4, 4))]])
    assert np.array_equal(problem.coupling.N_c, expected)
    assert check_dissipativity(problem.node).max_sym_eig == 0.0

    refined = build_lshape_problem(TimeGrid(1.0, 50), refine=2)
    assert refined.node.m_int == 16
    assert check_dissipativity(refined.node).is_dissipative

    damped = build_lshape_problem(TimeGrid(1.0, 50), damping=0.5)
    S = damped.node.H @ damped.node.A
    assert np.min(np.linalg.eigvalsh(0.5 * (S + S.T))) < -1e-6


def test_lshape_rejects_nonconforming_interface():
    p1, p2 = (
        Wave2dParams(
            extent=(1.0, 2.0), nx=4, ny=8,
            edges={"right": EdgeSpec("interface_stress_in", span=(0, 4))},
        ),
        Wave2dParams(
            extent=(1.0, 1.0), nx=4, ny=5,  # 5 faces on the left edge, not 4
            edges={"left": EdgeSpec("interface_velocity_in")},
        ),
    )
    with pytest.raises(NonconformingInterface):
        build_lshape_problem(TimeGrid(1.0, 10), p1, p2)


def test_scalar_demo():
    problem = build_scalar_demo(TimeGrid(1.0, 10), a=-1.0, x0=3.0)
    assert problem.node.n == 1
    assert problem.x0[0] == 3.0
    assert np.array_equal(problem.coupling.N_c, [[-1.0]])
    assert scalar_demo_pole() == -2.0
    assert scalar_demo_pole(a=-3.0) == -4.0
