"""Observables over snapshots and the conservation-of-probability audit.

Marginals integrate the joint PDF over one coordinate (trapezoid, matching
GridSnapshot.norm).  Visibility and fringe spacing run on 1-D slices with
quadratic sub-grid refinement of the interior extrema.  The flux audit
re-evaluates the complex amplitude (currents are amplitude-level objects):
it integrates the joint density over a rectangular region with composite
Gauss-Legendre panels split at the eigenstate seam lines and balances its
centered-difference time derivative against the boundary probability
fluxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import GridSnapshot
from .wavegroups import WavegroupScenario, amplitude_points, build_branches

# ---------------------------------------------------------------------------
# Marginals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarginalPdf:
    """One-body (marginal) density from tracing out the other coordinate."""

    axis: str               # "particle_x1" or "reflector_x2"
    coords: np.ndarray
    density: np.ndarray

    def mean(self) -> float:
        w = np.trapezoid(self.density, self.coords)
        return float(np.trapezoid(self.coords * self.density, self.coords) / w)

    def width(self) -> float:
        """Root second central moment."""
        w = np.trapezoid(self.density, self.coords)
        mu = np.trapezoid(self.coords * self.density, self.coords) / w
        var = np.trapezoid((self.coords - mu) ** 2 * self.density, self.coords) / w
        return float(math.sqrt(max(var, 0.0)))


def marginal(snapshot: GridSnapshot, axis: str) -> MarginalPdf:
    """Trace the snapshot over the other coordinate (trapezoid)."""
    if axis == "particle_x1":
        density = np.trapezoid(snapshot.pdf, snapshot.x2_axis, axis=0)
        coords = snapshot.x1_axis
    elif axis == "reflector_x2":
        density = np.trapezoid(snapshot.pdf, snapshot.x1_axis, axis=1)
        coords = snapshot.x2_axis
    else:
        raise ValueError(f"unknown axis {axis!r}")
    return MarginalPdf(axis=axis, coords=coords.copy(), density=density)


# ---------------------------------------------------------------------------
# Slice observables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Extremum:
    position: float
    value: float
    kind: str  # "max" or "min"


def _refined_extrema(coords: np.ndarray, values: np.ndarray) -> list[Extremum]:
    """Interior extrema with quadratic 3-point sub-grid refinement."""
    out: list[Extremum] = []
    for i in range(1, values.size - 1):
        left, mid, right = values[i - 1], values[i], values[i + 1]
        if mid > left and mid >= right and mid > 0:
            kind = "max"
        elif mid < left and mid <= right:
            kind = "min"
        else:
            continue
        denom = left - 2.0 * mid + right
        if denom != 0.0:
            delta = 0.5 * (left - right) / denom
            delta = min(max(delta, -0.5), 0.5)
        else:
            delta = 0.0
        dx = coords[i + 1] - coords[i]
        pos = coords[i] + delta * dx
        val = mid - 0.25 * (left - right) * delta
        out.append(Extremum(position=float(pos), value=float(val), kind=kind))
    return out


@dataclass(frozen=True)
class VisibilityResult:
    value: float
    defined: bool
    n_max: int
    n_min: int


def visibility(coords, values) -> VisibilityResult:
    """Fringe contrast (max - min) / (max + min) over interior extrema.

    Means of the refined interior maxima and minima are used, making the
    measure invariant under any positive rescaling of the PDF.  A slice with
    no interior extrema is flagged undefined with value 0.
    """
    coords = np.asarray(coords, dtype=float)
    values = np.asarray(values, dtype=float)
    ext = _refined_extrema(coords, values)
    maxima = [e.value for e in ext if e.kind == "max"]
    minima = [e.value for e in ext if e.kind == "min"]
    if not maxima or not minima:
        return VisibilityResult(value=0.0, defined=False, n_max=len(maxima), n_min=len(minima))
    hi = float(np.mean(maxima))
    lo = float(max(np.mean(minima), 0.0))
    return VisibilityResult(value=(hi - lo) / (hi + lo), defined=True,
                            n_max=len(maxima), n_min=len(minima))


def fringe_spacing_measured(coords, values) -> float:
    """Full fringe period: twice the mean adjacent max-to-min distance.

    An envelope tilt shifts maxima and minima in opposite directions, so the
    alternating gaps read period/2 + delta, period/2 - delta, ...; averaging
    an even number of consecutive gaps cancels the bias to first order.
    """
    coords = np.asarray(coords, dtype=float)
    values = np.asarray(values, dtype=float)
    ext = _refined_extrema(coords, values)
    gaps = [abs(b.position - a.position) for a, b in zip(ext[:-1], ext[1:])
            if a.kind != b.kind]
    if not gaps:
        raise ValueError("no adjacent max/min pair in window; cannot measure spacing")
    if len(gaps) > 1 and len(gaps) % 2 == 1:
        gaps = gaps[:-1]
    return 2.0 * float(np.mean(gaps))


def slice_at_x1(snapshot: GridSnapshot, x1_value: float) -> tuple[np.ndarray, np.ndarray]:
    """PDF along x2 at the grid column nearest x1_value."""
    j = int(np.argmin(np.abs(snapshot.x1_axis - x1_value)))
    return snapshot.x2_axis, snapshot.pdf[:, j]


def slice_at_x2(snapshot: GridSnapshot, x2_value: float) -> tuple[np.ndarray, np.ndarray]:
    """PDF along x1 at the grid row nearest x2_value."""
    i = int(np.argmin(np.abs(snapshot.x2_axis - x2_value)))
    return snapshot.x1_axis, snapshot.pdf[i, :]


def count_local_maxima(coords, values, prominence: float = 0.02) -> int:
    """Local maxima exceeding `prominence` times the slice maximum."""
    ext = _refined_extrema(np.asarray(coords, float), np.asarray(values, float))
    vmax = max((e.value for e in ext if e.kind == "max"), default=0.0)
    if vmax <= 0.0:
        return 0
    return sum(1 for e in ext if e.kind == "max" and e.value >= prominence * vmax)


# ---------------------------------------------------------------------------
# Conservation-of-probability audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FluxAudit:
    """Rectangle-region probability balance dP/dt + flux_x1 + flux_x2 = 0."""

    region: tuple[float, float]
    t: float
    dt: float
    probability: float
    dP_dt: float
    flux_x1: float
    flux_x2: float
    residual: float
    residual_relative: float


def _seam_offsets(scn: WavegroupScenario) -> list[float]:
    if scn.system == "mirror":
        return [0.0]
    return [-scn.d, scn.d]


def _panel_nodes(a: float, b: float, splits: list[float], max_panel: float,
                 order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes on [a, b], split at interior seams."""
    base_x, base_w = leggauss(order)
    cuts = sorted({a, b, *[s for s in splits if a < s < b]})
    xs, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        n_panels = max(1, int(math.ceil((hi - lo) / max_panel)))
        edges = np.linspace(lo, hi, n_panels + 1)
        for p_lo, p_hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (p_hi - p_lo)
            xs.append(0.5 * (p_lo + p_hi) + half * base_x)
            ws.append(half * base_w)
    return np.concatenate(xs), np.concatenate(ws)


def _max_wavenumber(scn: WavegroupScenario, t: float, which: str = "all") -> float:
    """Largest oscillation wavenumber of |Psi|^2 along either axis.

    Absolute plane-wave phases cancel in the density; what oscillates are
    the beats between branches (and across the node spread), bounded by the
    spread of Im(a) on each axis.
    """
    branches = build_branches(scn, t, which)
    k1 = float(np.ptp(branches.a1.imag))
    k2 = float(np.ptp(branches.a2.imag))
    return max(k1, k2, 1e-30)


def _region_quadrature(scn: WavegroupScenario, a: float, b: float,
                       max_panel: float, order: int):
    """Flattened 2-D quadrature nodes/weights with x1 panels split at seams."""
    seams = _seam_offsets(scn)
    x2_splits = sorted({v for s in seams for v in (a - s, b - s)})
    x2_nodes, x2_w = _panel_nodes(a, b, x2_splits, max_panel, order)
    p1, p2, w = [], [], []
    for x2v, w2 in zip(x2_nodes, x2_w):
        x1_nodes, x1_w = _panel_nodes(a, b, [x2v + s for s in seams], max_panel, order)
        p1.append(x1_nodes)
        p2.append(np.full_like(x1_nodes, x2v))
        w.append(w2 * x1_w)
    return np.concatenate(p1), np.concatenate(p2), np.concatenate(w)


def _region_probability(scn: WavegroupScenario, quad, t: float,
                        backend: str | None, which: str = "all") -> float:
    p1, p2, w = quad
    amp = amplitude_points(scn, p1, p2, t, which=which, backend=backend)
    return float(w @ (amp.real ** 2 + amp.imag ** 2))


def flux_audit(scn: WavegroupScenario, a: float, b: float, t: float, dt: float,
               gl_order: int = 10, backend: str | None = None,
               which: str = "all") -> FluxAudit:
    """Audit probability conservation on the square region [a, b]^2.

    dP/dt is a centered difference (error O(dt^2), verified by the dt-ladder
    property test); the probability currents come from exact analytic
    amplitude gradients, j_i = hbar Im(Psi* d_i Psi) / mass_i, integrated
    along the region boundary with the same seam-split panels.
    """
    if b <= a:
        raise ValueError("region must satisfy a < b")
    kmax = _max_wavenumber(scn, t, which)
    max_panel = min(3.0 / kmax, (b - a) / 8.0)
    seams = _seam_offsets(scn)
    hbar = scn.units.hbar
    m, M = scn.particle.mass, scn.reflector.mass

    quad = _region_quadrature(scn, a, b, max_panel, gl_order)
    p_plus = _region_probability(scn, quad, t + dt, backend, which)
    p_minus = _region_probability(scn, quad, t - dt, backend, which)
    p_now = _region_probability(scn, quad, t, backend, which)
    dp_dt = (p_plus - p_minus) / (2.0 * dt)

    def current_line(fixed: float, along_x1: bool) -> float:
        # along_x1: j2 over x1 at fixed x2, seams at x1 = x2 + s; else j1 over
        # x2 at fixed x1, seams at x2 = x1 - s.
        splits = [fixed + s for s in seams] if along_x1 else [fixed - s for s in seams]
        nodes, wts = _panel_nodes(a, b, splits, max_panel, gl_order)
        if along_x1:
            p1, p2 = nodes, np.full_like(nodes, fixed)
        else:
            p1, p2 = np.full_like(nodes, fixed), nodes
        amp, g1, g2 = amplitude_points(scn, p1, p2, t, which=which, backend=backend,
                                       with_gradients=True)
        grad = g2 if along_x1 else g1
        mass = M if along_x1 else m
        j = hbar * np.imag(np.conj(amp) * grad) / mass
        return float(wts @ j)

    flux_x1 = current_line(b, along_x1=False) - current_line(a, along_x1=False)
    flux_x2 = current_line(b, along_x1=True) - current_line(a, along_x1=True)

    residual = dp_dt + flux_x1 + flux_x2
    scale = max(abs(dp_dt), abs(flux_x1), abs(flux_x2))
    rel = abs(residual) / scale if scale > 0 else 0.0
    return FluxAudit(region=(a, b), t=t, dt=dt, probability=p_now, dP_dt=dp_dt,
                     flux_x1=flux_x1, flux_x2=flux_x2, residual=residual,
                     residual_relative=rel)


# ---------------------------------------------------------------------------
# Centroid kinematics
# ---------------------------------------------------------------------------


def centroid_track(snapshots: list[GridSnapshot], axis: str,
                   conditioning: str = "joint") -> np.ndarray:
    """Expectation value <x_axis>(t) over a snapshot series.

    "joint" averages x over the full joint PDF; "marginal_only" first traces
    to the one-body marginal and averages that.  The two agree to quadrature
    accuracy (the trace and the mean commute); both are exposed because the
    reflector-kinematics comparison reports them side by side.
    """
    if conditioning not in ("joint", "marginal_only"):
        raise ValueError(f"unknown conditioning {conditioning!r}")
    out = []
    for snap in snapshots:
        if conditioning == "joint":
            x = snap.x1_axis[None, :] if axis == "particle_x1" else snap.x2_axis[:, None]
            num = np.trapezoid(np.trapezoid(snap.pdf * x, snap.x1_axis, axis=1), snap.x2_axis)
            out.append(num / snap.norm)
        else:
            out.append(marginal(snap, axis).mean())
    return np.array(out, dtype=float)


# ---------------------------------------------------------------------------
# Structured text reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRecord:
    name: str
    value: float
    tolerance: float
    passed: bool


def format_report(records: list[ReportRecord]) -> str:
    """One record per line: name value tolerance pass/fail."""
    lines = [f"{r.name} {r.value:.17g} {r.tolerance:.17g} {'pass' if r.passed else 'fail'}"
             for r in records]
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> list[ReportRecord]:
    records = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, value, tol, verdict = line.split()
        records.append(ReportRecord(name=name, value=float(value), tolerance=float(tol),
                                    passed=(verdict == "pass")))
    return records
