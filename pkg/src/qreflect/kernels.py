"""Hot evaluation kernels with a numba fast path and a numpy fallback.

Every wavegroup amplitude in this package is a sum of separable plane-wave
branches,

    amp(x1, x2) = sum_b [region_b matches x1 - x2] *
                  sum_n coef[b, n] * exp(a1[b, n] * x1 + a2[b, n] * x2),

where the branch region is decided by x_rel = x1 - x2 against the half
width d: 0 -> x_rel < -d, 1 -> |x_rel| <= d, 2 -> x_rel > d, 3 -> no mask.

Backend selection: the environment variable QREFLECT_BACKEND may be set to
"numba", "numpy", or "auto" (default).  "auto" uses numba when it imports,
falling back to pure numpy otherwise.  Both paths compute the same sums;
they may differ by float rounding (different summation order), which the
test suite bounds.  benchmarks/bench_backends.py compares their speed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

REGION_BEFORE = 0
REGION_INSIDE = 1
REGION_AFTER = 2
REGION_ALL = 3

# exp() overflow guard for evanescent separable factors (double max ~ e^709)
_EXP_GUARD = 690.0

try:
    import numba
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency normally
    _HAVE_NUMBA = False


@dataclass(frozen=True)
class BranchSet:
    """Separable plane-wave branches sharing one node list.

    coef, a1, a2 have shape (n_branches, n_nodes); region has shape
    (n_branches,) with codes from REGION_*.  d is the region half width in
    x_rel (0 for the mirror).
    """

    coef: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    region: np.ndarray
    d: float

    def __post_init__(self):
        object.__setattr__(self, "coef", np.ascontiguousarray(self.coef, dtype=np.complex128))
        object.__setattr__(self, "a1", np.ascontiguousarray(self.a1, dtype=np.complex128))
        object.__setattr__(self, "a2", np.ascontiguousarray(self.a2, dtype=np.complex128))
        object.__setattr__(self, "region", np.ascontiguousarray(self.region, dtype=np.int64))
        if not (self.coef.shape == self.a1.shape == self.a2.shape):
            raise ValueError("coef, a1, a2 must share one (branches, nodes) shape")
        if self.region.shape != (self.coef.shape[0],):
            raise ValueError("region must have one entry per branch")


def resolve_backend(backend: str | None = None) -> str:
    """Resolve a backend name against QREFLECT_BACKEND; returns 'numba' or 'numpy'."""
    choice = backend or os.environ.get("QREFLECT_BACKEND", "auto")
    choice = choice.strip().lower()
    if choice == "auto":
        # The njit contraction wins through prange on multi-core hosts; on a
        # single core the BLAS-backed numpy path is faster (see benchmarks/).
        return "numba" if _HAVE_NUMBA and (os.cpu_count() or 1) > 1 else "numpy"
    if choice == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError("QREFLECT_BACKEND=numba but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise ValueError(f"unknown backend {choice!r} (expected auto|numba|numpy)")


def _check_exponents(branches: BranchSet, x1: np.ndarray, x2: np.ndarray) -> None:
    """Reject grids where a separable evanescent factor would overflow."""
    worst = 0.0
    for arr, axis in ((branches.a1, x1), (branches.a2, x2)):
        re = np.abs(arr.real)
        if re.size:
            worst = max(worst, float(re.max() * max(abs(axis.min()), abs(axis.max()))))
    if worst > _EXP_GUARD:
        raise ValueError(
            f"evanescent exponent magnitude {worst:.1f} exceeds the overflow guard; "
            "use a smaller grid or recenter the axes")


# ---------------------------------------------------------------------------
# numpy path: one complex matmul per branch
# ---------------------------------------------------------------------------


def _region_masks(x1: np.ndarray, x2: np.ndarray, d: float) -> dict[int, np.ndarray]:
    x_rel = x1[None, :] - x2[:, None]
    return {
        REGION_BEFORE: x_rel < -d,
        REGION_INSIDE: np.abs(x_rel) <= d,
        REGION_AFTER: x_rel > d,
    }


def _grid_amplitude_numpy(branches: BranchSet, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    masks = _region_masks(x1, x2, branches.d)
    amp = np.zeros((x2.size, x1.size), dtype=np.complex128)
    for b in range(branches.coef.shape[0]):
        e1 = np.exp(np.outer(branches.a1[b], x1))
        e2 = np.exp(np.outer(branches.a2[b], x2))
        part = (branches.coef[b][:, None] * e2).T @ e1
        code = int(branches.region[b])
        if code == REGION_ALL:
            amp += part
        else:
            mask = masks[code]
            amp[mask] += part[mask]
    return amp


def _point_amplitude_numpy(branches: BranchSet, p1: np.ndarray, p2: np.ndarray,
                           with_gradients: bool):
    x_rel = p1 - p2
    amp = np.zeros(p1.size, dtype=np.complex128)
    d1 = np.zeros(p1.size, dtype=np.complex128) if with_gradients else None
    d2 = np.zeros(p1.size, dtype=np.complex128) if with_gradients else None
    d = branches.d
    masks = {
        REGION_BEFORE: x_rel < -d,
        REGION_INSIDE: np.abs(x_rel) <= d,
        REGION_AFTER: x_rel > d,
        REGION_ALL: np.ones(p1.size, dtype=bool),
    }
    for b in range(branches.coef.shape[0]):
        mask = masks[int(branches.region[b])]
        if not mask.any():
            continue
        e = np.exp(branches.a1[b][:, None] * p1[None, mask] + branches.a2[b][:, None] * p2[None, mask])
        amp[mask] += branches.coef[b] @ e
        if with_gradients:
            d1[mask] += (branches.coef[b] * branches.a1[b]) @ e
            d2[mask] += (branches.coef[b] * branches.a2[b]) @ e
    if with_gradients:
        return amp, d1, d2
    return amp


# ---------------------------------------------------------------------------
# numba path: fused region-branched accumulation
# ---------------------------------------------------------------------------

if _HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _masked_contraction_numba(c2t, e1t, region_code, d, x1, x2, out):  # pragma: no cover - jitted
        """out[i, j] += sum_n c2t[i, n] * e1t[j, n] where the branch region matches.

        c2t[i, n] = coef[n] * exp(a2[n] * x2[i]) and e1t[j, n] = exp(a1[n] * x1[j])
        are staged outside; the hot O(n2 * n1 * nodes) contraction runs here.
        """
        n2 = x2.size
        n1 = x1.size
        nn = e1t.shape[1]
        for i in prange(n2):
            row = c2t[i]
            for j in range(n1):
                if region_code != 3:
                    xr = x1[j] - x2[i]
                    if xr < -d:
                        code = 0
                    elif xr > d:
                        code = 2
                    else:
                        code = 1
                    if code != region_code:
                        continue
                col = e1t[j]
                acc = 0.0 + 0.0j
                for n in range(nn):
                    acc += row[n] * col[n]
                out[i, j] += acc

    def _grid_amplitude_numba(branches: BranchSet, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        out = np.zeros((x2.size, x1.size), dtype=np.complex128)
        for b in range(branches.coef.shape[0]):
            e1t = np.ascontiguousarray(np.exp(np.outer(branches.a1[b], x1)).T)
            c2t = np.ascontiguousarray((branches.coef[b][:, None] * np.exp(np.outer(branches.a2[b], x2))).T)
            _masked_contraction_numba(c2t, e1t, int(branches.region[b]), branches.d, x1, x2, out)
        return out

    @njit(parallel=True, cache=True)
    def _point_amplitude_numba(coef, a1, a2, region, d, p1, p2):  # pragma: no cover - jitted
        npts = p1.size
        nb, nn = coef.shape
        amp = np.empty(npts, dtype=np.complex128)
        g1 = np.empty(npts, dtype=np.complex128)
        g2 = np.empty(npts, dtype=np.complex128)
        for ip in prange(npts):
            xr = p1[ip] - p2[ip]
            if xr < -d:
                code = 0
            elif xr > d:
                code = 2
            else:
                code = 1
            acc = 0.0 + 0.0j
            acc1 = 0.0 + 0.0j
            acc2 = 0.0 + 0.0j
            for b in range(nb):
                rb = region[b]
                if rb == 3 or rb == code:
                    for n in range(nn):
                        term = coef[b, n] * np.exp(a1[b, n] * p1[ip] + a2[b, n] * p2[ip])
                        acc += term
                        acc1 += a1[b, n] * term
                        acc2 += a2[b, n] * term
            amp[ip] = acc
            g1[ip] = acc1
            g2[ip] = acc2
        return amp, g1, g2


# ---------------------------------------------------------------------------
# Public dispatchers
# ---------------------------------------------------------------------------


def grid_amplitude(branches: BranchSet, x1: np.ndarray, x2: np.ndarray,
                   backend: str | None = None) -> np.ndarray:
    """Accumulate the branch sum on the tensor grid; returns (n2, n1) complex."""
    x1 = np.ascontiguousarray(x1, dtype=float)
    x2 = np.ascontiguousarray(x2, dtype=float)
    _check_exponents(branches, x1, x2)
    if resolve_backend(backend) == "numba":
        return _grid_amplitude_numba(branches, x1, x2)
    return _grid_amplitude_numpy(branches, x1, x2)


def point_amplitude(branches: BranchSet, p1: np.ndarray, p2: np.ndarray,
                    backend: str | None = None, with_gradients: bool = False):
    """Accumulate the branch sum at scattered points (optionally with gradients)."""
    p1 = np.ascontiguousarray(p1, dtype=float)
    p2 = np.ascontiguousarray(p2, dtype=float)
    _check_exponents(branches, p1, p2)
    if resolve_backend(backend) == "numba":
        amp, g1, g2 = _point_amplitude_numba(branches.coef, branches.a1, branches.a2,
                                             branches.region, branches.d, p1, p2)
        return (amp, g1, g2) if with_gradients else amp
    return _point_amplitude_numpy(branches, p1, p2, with_gradients)
