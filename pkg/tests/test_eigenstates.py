"""Eigenstate identities: mirror PDF, barrier matching, well modes."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qreflect.core import PartitionMap
from qreflect.eigenstates import (BranchKinematics, barrier_branch_kinematics, barrier_psi,
                                  branch_kinematics, mirror_fringe_spacing, mirror_pdf_identity,
                                  mirror_psi, solve_barrier_coefficients,
                                  solve_barrier_coefficients_generic, well_psi,
                                  well_quantized_velocity)


def _partition(m=1.0, M=5.0, v=6.0, V=1.0):
    return PartitionMap(m=m, M=M, v=v, V=V, hbar=1.0)


# ---------------------------------------------------------------------------
# Mirror
# ---------------------------------------------------------------------------


def test_mirror_node_at_surface():
    p = _partition()
    assert mirror_psi(p, 1.3, 1.3, 0.7) == 0.0


def test_mirror_vanishes_beyond_surface():
    p = _partition()
    assert mirror_psi(p, 2.0, 1.0, 0.0) == 0.0


@settings(max_examples=150, deadline=None)
@given(m=st.floats(0.5, 5.0), M=st.floats(0.5, 5.0), v=st.floats(0.5, 3.0),
       dvel=st.floats(0.2, 2.0), x2=st.floats(-5.0, 5.0), dx=st.floats(0.0, 8.0),
       t=st.floats(-3.0, 3.0))
def test_mirror_pdf_identity_property(m, M, v, dvel, x2, dx, t):
    p = PartitionMap(m=m, M=M, v=v, V=v - dvel, hbar=1.0)
    x1 = x2 - dx
    lhs = abs(mirror_psi(p, x1, x2, t)) ** 2
    rhs = mirror_pdf_identity(p, x1, x2)
    # 4 sin^2 vanishes at the fringe nodes, so bound the error against the
    # fringe amplitude (4) and pointwise away from the nodes
    assert abs(lhs - rhs) <= 4.0 * 1e-13
    if rhs > 1e-6:
        assert abs(lhs - rhs) / rhs < 1e-9


def test_mirror_pdf_stationary_in_time():
    p = _partition()
    x1, x2 = -2.345, 0.4
    vals = [abs(mirror_psi(p, x1, x2, t)) ** 2 for t in (-9.0, 0.0, 3.21, 17.0)]
    assert np.ptp(vals) < 1e-12 * vals[0]


def test_fringe_spacing_formula_and_limit():
    # direct formula evaluation at m = M, v = -V
    p = PartitionMap(m=1.0, M=1.0, v=1.0, V=-1.0, hbar=1.0)
    fs = mirror_fringe_spacing(p)
    assert fs.exact == pytest.approx(np.pi * 2.0 / abs(p.m * p.K - p.M * p.k), rel=1e-14)
    # M/m = 100, V = 0: approximate spacing within 1% of exact
    p2 = PartitionMap(m=1.0, M=100.0, v=1.0, V=0.0, hbar=1.0)
    fs2 = mirror_fringe_spacing(p2)
    assert fs2.approx == pytest.approx(np.pi, rel=1e-14)
    assert abs(fs2.exact - fs2.approx) / fs2.exact < 0.01


def test_fringe_spacing_degenerate():
    with pytest.raises(ValueError, match="no relative motion"):
        mirror_fringe_spacing(PartitionMap(m=1.0, M=1.0, v=0.7, V=0.7, hbar=1.0))


@settings(max_examples=100, deadline=None)
@given(m=st.floats(0.2, 10.0), M=st.floats(0.2, 10.0), v=st.floats(-5, 5), V=st.floats(-5, 5))
def test_branch_conservation(m, M, v, V):
    p = PartitionMap(m=m, M=M, v=v, V=V, hbar=1.0)
    inc = branch_kinematics(p, "incident")
    ref = branch_kinematics(p, "reflected")
    p_scale = max(abs(inc.p1) + abs(inc.p2), 1e-12)
    e_scale = max(inc.ke1 + inc.ke2, 1e-12)
    assert abs((inc.p1 + inc.p2) - (ref.p1 + ref.p2)) < 1e-12 * p_scale
    assert abs((inc.ke1 + inc.ke2) - (ref.ke1 + ref.ke2)) < 1e-11 * e_scale


def test_branch_kinematics_examples():
    p = _partition(m=1.0, M=5.0, v=6.0, V=1.0)
    inc = branch_kinematics(p, "incident")
    assert inc.p1 == pytest.approx(6.0)
    assert inc.p2 == pytest.approx(5.0)
    # equal masses exchange velocities
    pe = PartitionMap(m=2.0, M=2.0, v=3.0, V=-1.0, hbar=1.0)
    ref = branch_kinematics(pe, "reflected")
    assert ref.p1 / pe.m == pytest.approx(-1.0)
    assert ref.p2 / pe.M == pytest.approx(3.0)
    with pytest.raises(ValueError):
        branch_kinematics(p, "sideways")


# ---------------------------------------------------------------------------
# Barrier / well matching
# ---------------------------------------------------------------------------


def test_barrier_free_limit_exact():
    c = solve_barrier_coefficients(_partition(), 0.0, 1.0)
    assert c.B == 0.0
    assert c.G == 0.0
    assert abs(c.F) == pytest.approx(1.0, rel=1e-14)
    assert abs(c.H) == pytest.approx(1.0, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(mu_m=st.floats(0.3, 3.0), mu_M=st.floats(0.3, 30.0), v=st.floats(1.0, 8.0),
       dvel=st.floats(0.5, 6.0), pe_frac=st.floats(0.05, 0.95), d=st.floats(0.2, 3.0))
def test_barrier_unitarity_propagating(mu_m, mu_M, v, dvel, pe_frac, d):
    p = PartitionMap(m=mu_m, M=mu_M, v=v, V=v - dvel, hbar=1.0)
    c = solve_barrier_coefficients(p, pe_frac * p.E_rel, d)
    assert abs(c.B) ** 2 + abs(c.H) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_barrier_closed_form_matches_generic_solver():
    rng = np.random.default_rng(42)
    for _ in range(50):
        m, M = rng.uniform(0.3, 5.0, 2)
        v = rng.uniform(1.0, 6.0)
        V = v - rng.uniform(0.5, 4.0)
        p = PartitionMap(m=m, M=M, v=v, V=V, hbar=1.0)
        pe = rng.uniform(-2.0, 2.0) * p.E_rel
        if abs(pe - p.E_rel) < 1e-3 * p.E_rel:
            continue
        d = rng.uniform(0.2, 2.0)
        a = solve_barrier_coefficients(p, pe, d)
        b = solve_barrier_coefficients_generic(p, pe, d)
        for name in "BFGH":
            assert getattr(a, name) == pytest.approx(getattr(b, name), abs=1e-12)


def test_barrier_degenerate_energy_rejected():
    p = _partition()
    with pytest.raises(ValueError, match="zero barrier wavevector"):
        solve_barrier_coefficients(p, p.E_rel, 1.0)


def _transfer_matrix_transmission(mu, e_rel, pe, d, hbar=1.0, n_steps=4000):
    """Brute-force transmission: RK4 integration of u'' = (2 mu (PE - E)/hbar^2) u.

    Integrates the relative-coordinate ODE right-to-left from a pure
    transmitted wave and reads off the incident/reflected amplitudes.
    """
    k1 = math.sqrt(2.0 * mu * e_rel) / hbar
    q2 = 2.0 * mu * (pe - e_rel) / hbar ** 2  # u'' = q2 u inside
    x = d
    u = complex(math.cos(k1 * d), math.sin(k1 * d))
    du = 1j * k1 * u
    h = -2.0 * d / n_steps

    def rhs(_x, y):
        return np.array([y[1], q2 * y[0]], dtype=complex)

    y = np.array([u, du], dtype=complex)
    for _ in range(n_steps):
        k_a = rhs(x, y)
        k_b = rhs(x + h / 2, y + h / 2 * k_a)
        k_c = rhs(x + h / 2, y + h / 2 * k_b)
        k_d = rhs(x + h, y + h * k_c)
        y = y + h / 6 * (k_a + 2 * k_b + 2 * k_c + k_d)
        x += h
    u, du = y
    e_m = complex(math.cos(k1 * d), -math.sin(k1 * d))  # exp(-i k1 d)
    a = 0.5 * (u + du / (1j * k1)) / e_m
    b = 0.5 * (u - du / (1j * k1)) / e_m.conjugate()
    return 1.0 / abs(a) ** 2, abs(b) ** 2 / abs(a) ** 2


def test_tunneling_against_transfer_matrix_oracle():
    p = PartitionMap(m=1.0, M=5.0, v=2.0, V=1.0, hbar=1.0)
    for pe in (2.0, 5.0, 12.0):
        d = 0.9
        c = solve_barrier_coefficients(p, pe, d)
        t_ref, r_ref = _transfer_matrix_transmission(p.mu, p.E_rel, pe, d)
        assert abs(c.H) ** 2 == pytest.approx(t_ref, rel=1e-7)
        assert abs(c.B) ** 2 == pytest.approx(r_ref, rel=1e-7)


def test_deep_tunneling_scaling_and_reflection():
    p = PartitionMap(m=1.0, M=5.0, v=2.0, V=1.0, hbar=1.0)
    pe = 30.0
    kappa = math.sqrt(2.0 * p.mu * (pe - p.E_rel))
    ds = np.array([0.8, 1.0, 1.2, 1.4])
    log_t = []
    for d in ds:
        c = solve_barrier_coefficients(p, pe, d)
        assert 2.0 * c.K_barrier.imag * 2.0 * d > 5.0
        assert abs(c.B) == pytest.approx(1.0, abs=1e-10)
        log_t.append(math.log(abs(c.H) ** 2))
    slope = np.polyfit(ds, log_t, 1)[0]
    assert slope == pytest.approx(-4.0 * kappa, rel=0.02)


def test_barrier_psi_continuity_at_seams():
    p = _partition()
    for pe in (-26.0417, 4.0, p.E_rel * 3.0):
        c = solve_barrier_coefficients(p, pe, 1.0)
        for seam in (-1.0, 1.0):
            x2 = 0.37
            eps = 1e-5
            # quadratic extrapolation of value and derivative onto the seam
            def side(sign):
                xs = x2 + seam + sign * eps * np.array([1.0, 2.0, 3.0])
                vals = np.array([barrier_psi(c, p, pe, 1.0, x, x2, 0.4) for x in xs])
                v0 = 3 * vals[0] - 3 * vals[1] + vals[2]
                d0 = (2 * vals[0] - 3 * vals[1] + vals[2]) / (sign * eps) * -1.0
                return v0, d0

            (v_lo, d_lo), (v_hi, d_hi) = side(-1.0), side(+1.0)
            assert abs(v_hi - v_lo) / abs(v_lo) < 1e-10
            assert abs(d_hi - d_lo) / max(abs(d_lo), 1e-12) < 1e-4


def test_barrier_psi_free_limit_flat():
    p = _partition()
    c = solve_barrier_coefficients(p, 0.0, 1.0)
    xs = np.linspace(-4.0, 4.0, 17)
    vals = np.abs(barrier_psi(c, p, 0.0, 1.0, xs, 0.0, 1.3)) ** 2
    assert np.allclose(vals, 1.0, rtol=1e-12)


def test_barrier_psi_stationary():
    p = _partition()
    pe = -26.0417
    c = solve_barrier_coefficients(p, pe, 1.0)
    v1 = abs(barrier_psi(c, p, pe, 1.0, 0.3, 0.1, 0.0)) ** 2
    v2 = abs(barrier_psi(c, p, pe, 1.0, 0.3, 0.1, 5.7)) ** 2
    assert v1 == pytest.approx(v2, rel=1e-11)


def test_global_pe_phase_never_changes_pdf():
    # the claimed irrelevance of the exp(i PE t / hbar) bookkeeping factor,
    # restated at PDF level (double precision)
    p = _partition()
    pe = 4.0
    c = solve_barrier_coefficients(p, pe, 1.0)
    xs = np.linspace(-3.0, 3.0, 41)
    t = 2.1
    amp = barrier_psi(c, p, pe, 1.0, xs, 0.2, t)
    rotated = amp * np.exp(1j * pe * t / p.hbar)
    pdf1 = amp.real ** 2 + amp.imag ** 2
    pdf2 = rotated.real ** 2 + rotated.imag ** 2
    assert np.allclose(pdf1, pdf2, rtol=5e-15, atol=0.0)


def test_interior_branch_kinematics_parsing():
    p = _partition()
    pe = -26.0417
    c = solve_barrier_coefficients(p, pe, 1.0)
    for direction in ("right", "left"):
        bk = barrier_branch_kinematics(c, p, pe, direction)
        assert isinstance(bk, BranchKinematics)
        # KE1 + KE2 + PE reproduces the conserved total energy
        total = bk.ke1 + bk.ke2 + pe
        assert total == pytest.approx(p.E_cm + p.E_rel, rel=1e-12)
    ev = solve_barrier_coefficients(PartitionMap(m=1.0, M=5.0, v=2.0, V=1.0, hbar=1.0), 30.0, 1.0)
    with pytest.raises(ValueError, match="evanescent"):
        barrier_branch_kinematics(ev, p, 30.0, "right")


# ---------------------------------------------------------------------------
# Infinite well
# ---------------------------------------------------------------------------


def test_well_quantized_velocity_examples():
    step = well_quantized_velocity(0.0, 1, 1.0, 5.0, 1.0, 1.0)
    v5 = well_quantized_velocity(0.0, 5, 1.0, 5.0, 1.0, 1.0)
    assert v5 == pytest.approx(5.0 * step, rel=1e-14)
    # V = 0, m = M: v = n pi hbar / (D m)
    assert well_quantized_velocity(0.0, 3, 2.0, 2.0, 1.5, 1.0) == pytest.approx(
        3.0 * math.pi / (1.5 * 2.0), rel=1e-14)
    # plugging back through the partition gives K_rel = n pi / (2 D)
    for n in (1, 4, 9):
        v = well_quantized_velocity(0.7, n, 1.0, 5.0, 1.3, 1.0)
        p = PartitionMap(m=1.0, M=5.0, v=v, V=0.7, hbar=1.0)
        assert p.K_rel == pytest.approx(n * math.pi / (2.0 * 1.3), rel=1e-12)
    with pytest.raises(ValueError):
        well_quantized_velocity(0.0, 0, 1.0, 1.0, 1.0, 1.0)


def test_well_psi_nodes():
    d = 1.0
    n = 4
    v = well_quantized_velocity(1.0, n, 1.0, 5.0, d, 1.0)
    p = PartitionMap(m=1.0, M=5.0, v=v, V=1.0, hbar=1.0)
    x2 = 0.3
    # hard-wall nodes
    assert well_psi(p, n, d, x2 + d, x2, 0.0) == 0.0
    assert well_psi(p, n, d, x2 - d, x2, 0.0) == 0.0
    # n = 2 interior node at x_rel = 0
    v2 = well_quantized_velocity(1.0, 2, 1.0, 5.0, d, 1.0)
    p2 = PartitionMap(m=1.0, M=5.0, v=v2, V=1.0, hbar=1.0)
    assert abs(well_psi(p2, 2, d, x2, x2, 0.0)) < 1e-14


def test_well_interior_zero_count():
    d = 1.0
    for n in (1, 3, 6):
        v = well_quantized_velocity(0.5, n, 1.0, 5.0, d, 1.0)
        p = PartitionMap(m=1.0, M=5.0, v=v, V=0.5, hbar=1.0)
        x2 = 0.0
        xr = np.linspace(-d + 1e-6, d - 1e-6, 20001)
        pdf = np.abs(well_psi(p, n, d, x2 + xr, x2, 0.3)) ** 2
        # count interior zeros of the sine via sign changes of psi's real part
        interior = np.sin(n * np.pi * (xr + d) / (2 * d))
        zeros = np.sum(np.diff(np.sign(interior)) != 0)
        assert zeros == n - 1
        # pdf minima coincide with those zeros
        assert pdf[np.argmin(np.abs(interior))] < 1e-10 * pdf.max()


def test_well_psi_validation():
    p = PartitionMap(m=1.0, M=5.0, v=6.0, V=1.0, hbar=1.0)
    with pytest.raises(ValueError):
        well_psi(p, 0, 1.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError, match="quantization"):
        well_psi(p, 3, 1.0, 0.0, 0.0, 0.0)
