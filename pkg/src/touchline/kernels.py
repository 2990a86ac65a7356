"""Batch geometry kernels with a numba fast path and a numpy fallback.

Each kernel exists twice: a loop implementation compiled with
``numba.njit`` and a vectorized pure-numpy implementation. Both compute
byte-for-byte the same formulas in the same order. The active backend
is chosen at import time from the ``TOUCHLINE_BACKEND`` environment
variable:

    TOUCHLINE_BACKEND=auto    numba when importable, else numpy (default)
    TOUCHLINE_BACKEND=numba   require numba, fail loudly if missing
    TOUCHLINE_BACKEND=numpy   force the pure-numpy fallback

Scalar single-instance operations live in ``geometry`` and ``lines``;
these kernels are their batch twins for corpus-sized workloads (see
``benchmarks/bench_kernels.py`` for the speed comparison).

Degenerate rows are reported through status codes / NaN rather than
exceptions so one bad record cannot abort a batch.
"""

from __future__ import annotations

import math
import os

import numpy as np

_ENV_VAR = "TOUCHLINE_BACKEND"
_EPS = 1e-9

# Collinearity status codes.
STATUS_OK = 0
STATUS_DEGENERATE = 1
STATUS_ZERO_SUM = 2


# ---------------------------------------------------------------------------
# Loop implementations (numba-compiled when the numba backend is active).
# ---------------------------------------------------------------------------


def _iou_batch_loop(a, b):
    n = a.shape[0]
    out = np.empty(n)
    for i in range(n):
        iw = min(a[i, 2], b[i, 2]) - max(a[i, 0], b[i, 0])
        ih = min(a[i, 3], b[i, 3]) - max(a[i, 1], b[i, 1])
        inter = max(0.0, iw) * max(0.0, ih)
        area_a = (a[i, 2] - a[i, 0]) * (a[i, 3] - a[i, 1])
        area_b = (b[i, 2] - b[i, 0]) * (b[i, 3] - b[i, 1])
        union = area_a + area_b - inter
        out[i] = inter / union
    return out


def _giou_batch_loop(a, b):
    n = a.shape[0]
    out = np.empty(n)
    for i in range(n):
        iw = min(a[i, 2], b[i, 2]) - max(a[i, 0], b[i, 0])
        ih = min(a[i, 3], b[i, 3]) - max(a[i, 1], b[i, 1])
        inter = max(0.0, iw) * max(0.0, ih)
        area_a = (a[i, 2] - a[i, 0]) * (a[i, 3] - a[i, 1])
        area_b = (b[i, 2] - b[i, 0]) * (b[i, 3] - b[i, 1])
        union = area_a + area_b - inter
        cw = max(a[i, 2], b[i, 2]) - min(a[i, 0], b[i, 0])
        ch = max(a[i, 3], b[i, 3]) - min(a[i, 1], b[i, 1])
        enclosing = cw * ch
        out[i] = inter / union - (enclosing - union) / enclosing
    return out


def _alignment_batch_loop(sources, tips, centers):
    n = sources.shape[0]
    out = np.empty(n)
    for i in range(n):
        ux = centers[i, 0] - sources[i, 0]
        uy = centers[i, 1] - sources[i, 1]
        vx = centers[i, 0] - tips[i, 0]
        vy = centers[i, 1] - tips[i, 1]
        nu = math.sqrt(ux * ux + uy * uy)
        nv = math.sqrt(vx * vx + vy * vy)
        if nu < _EPS or nv < _EPS:
            out[i] = np.nan
        else:
            out[i] = min(1.0, max(-1.0, (ux * vx + uy * vy) / (nu * nv)))
    return out


def _collinearity_batch_loop(kps):
    # kps columns: eye, shoulder, elbow, wrist, mcp, fingertip (xy pairs)
    n = kps.shape[0]
    coll = np.empty(n)
    status = np.empty(n, dtype=np.uint8)
    for i in range(n):
        ifx = kps[i, 10] - kps[i, 8]
        ify = kps[i, 11] - kps[i, 9]
        fax = kps[i, 6] - kps[i, 4]
        fay = kps[i, 7] - kps[i, 5]
        uax = kps[i, 4] - kps[i, 2]
        uay = kps[i, 5] - kps[i, 3]
        n_if = math.sqrt(ifx * ifx + ify * ify)
        n_fa = math.sqrt(fax * fax + fay * fay)
        n_ua = math.sqrt(uax * uax + uay * uay)
        if n_if < _EPS or n_fa < _EPS or n_ua < _EPS:
            coll[i] = np.nan
            status[i] = STATUS_DEGENERATE
            continue
        cs01 = min(1.0, max(-1.0, (ifx * fax + ify * fay) / (n_if * n_fa)))
        cs12 = min(1.0, max(-1.0, (fax * uax + fay * uay) / (n_fa * n_ua)))
        cs02 = min(1.0, max(-1.0, (ifx * uax + ify * uay) / (n_if * n_ua)))
        # Strict > keeps the IF_FA > FA_UA > IF_UA tie-break priority.
        pair = 0
        best = cs01
        if cs12 > best:
            best = cs12
            pair = 1
        if cs02 > best:
            pair = 2
        if pair == 0:
            sx, sy, rx, ry = ifx + fax, ify + fay, uax, uay
        elif pair == 1:
            sx, sy, rx, ry = fax + uax, fay + uay, ifx, ify
        else:
            sx, sy, rx, ry = ifx + uax, ify + uay, fax, fay
        ns = math.sqrt(sx * sx + sy * sy)
        if ns < _EPS:
            coll[i] = np.nan
            status[i] = STATUS_ZERO_SUM
            continue
        nr = math.sqrt(rx * rx + ry * ry)
        coll[i] = min(1.0, max(-1.0, (sx * rx + sy * ry) / (ns * nr)))
        status[i] = STATUS_OK
    return coll, status


def _ray_box_batch_loop(origins, dirs, boxes):
    n = origins.shape[0]
    hits = np.empty(n, dtype=np.bool_)
    ts = np.empty(n)
    for i in range(n):
        t_enter = -np.inf
        t_exit = np.inf
        ok = True
        for axis in range(2):
            o = origins[i, axis]
            d = dirs[i, axis]
            lo = boxes[i, axis]
            hi = boxes[i, axis + 2]
            if d == 0.0:
                if o < lo or o > hi:
                    ok = False
                    break
                continue
            t0 = (lo - o) / d
            t1 = (hi - o) / d
            if t0 > t1:
                t0, t1 = t1, t0
            if t0 > t_enter:
                t_enter = t0
            if t1 < t_exit:
                t_exit = t1
        if ok and t_enter <= t_exit and t_exit >= 0.0:
            hits[i] = True
            ts[i] = max(t_enter, 0.0)
        else:
            hits[i] = False
            ts[i] = np.nan
    return hits, ts


def _point_ray_distance_batch_loop(points, origins, dirs):
    n = points.shape[0]
    out = np.empty(n)
    for i in range(n):
        rx = points[i, 0] - origins[i, 0]
        ry = points[i, 1] - origins[i, 1]
        t = rx * dirs[i, 0] + ry * dirs[i, 1]
        if t < 0.0:
            t = 0.0
        cx = rx - t * dirs[i, 0]
        cy = ry - t * dirs[i, 1]
        out[i] = math.sqrt(cx * cx + cy * cy)
    return out


# ---------------------------------------------------------------------------
# Vectorized numpy implementations.
# ---------------------------------------------------------------------------


def _iou_batch_numpy(a, b):
    iw = np.minimum(a[:, 2], b[:, 2]) - np.maximum(a[:, 0], b[:, 0])
    ih = np.minimum(a[:, 3], b[:, 3]) - np.maximum(a[:, 1], b[:, 1])
    inter = np.maximum(0.0, iw) * np.maximum(0.0, ih)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a + area_b - inter
    return inter / union


def _giou_batch_numpy(a, b):
    iw = np.minimum(a[:, 2], b[:, 2]) - np.maximum(a[:, 0], b[:, 0])
    ih = np.minimum(a[:, 3], b[:, 3]) - np.maximum(a[:, 1], b[:, 1])
    inter = np.maximum(0.0, iw) * np.maximum(0.0, ih)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a + area_b - inter
    cw = np.maximum(a[:, 2], b[:, 2]) - np.minimum(a[:, 0], b[:, 0])
    ch = np.maximum(a[:, 3], b[:, 3]) - np.minimum(a[:, 1], b[:, 1])
    enclosing = cw * ch
    return inter / union - (enclosing - union) / enclosing


def _alignment_batch_numpy(sources, tips, centers):
    u = centers - sources
    v = centers - tips
    # sqrt(x*x + y*y) rather than hypot: keeps results bit-identical to
    # the loop kernels (hypot rounds differently in the last ulp).
    nu = np.sqrt(u[:, 0] ** 2 + u[:, 1] ** 2)
    nv = np.sqrt(v[:, 0] ** 2 + v[:, 1] ** 2)
    bad = (nu < _EPS) | (nv < _EPS)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = (u[:, 0] * v[:, 0] + u[:, 1] * v[:, 1]) / (nu * nv)
    out = np.clip(cos, -1.0, 1.0)
    out[bad] = np.nan
    return out


def _collinearity_batch_numpy(kps):
    ifv = kps[:, 10:12] - kps[:, 8:10]
    fav = kps[:, 6:8] - kps[:, 4:6]
    uav = kps[:, 4:6] - kps[:, 2:4]
    n_if = np.sqrt(ifv[:, 0] ** 2 + ifv[:, 1] ** 2)
    n_fa = np.sqrt(fav[:, 0] ** 2 + fav[:, 1] ** 2)
    n_ua = np.sqrt(uav[:, 0] ** 2 + uav[:, 1] ** 2)
    degenerate = (n_if < _EPS) | (n_fa < _EPS) | (n_ua < _EPS)

    def _cos(a, b, na, nb):
        with np.errstate(divide="ignore", invalid="ignore"):
            c = (a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]) / (na * nb)
        return np.clip(c, -1.0, 1.0)

    cs01 = _cos(ifv, fav, n_if, n_fa)
    cs12 = _cos(fav, uav, n_fa, n_ua)
    cs02 = _cos(ifv, uav, n_if, n_ua)
    pair = np.zeros(kps.shape[0], dtype=np.int64)
    best = cs01.copy()
    m = cs12 > best
    pair[m] = 1
    best[m] = cs12[m]
    pair[cs02 > best] = 2

    sum_opts = np.stack([ifv + fav, fav + uav, ifv + uav])
    rem_opts = np.stack([uav, ifv, fav])
    idx = np.arange(kps.shape[0])
    s = sum_opts[pair, idx]
    r = rem_opts[pair, idx]
    ns = np.sqrt(s[:, 0] ** 2 + s[:, 1] ** 2)
    nr = np.sqrt(r[:, 0] ** 2 + r[:, 1] ** 2)
    zero_sum = ~degenerate & (ns < _EPS)
    coll = _cos(s, r, ns, nr)

    status = np.zeros(kps.shape[0], dtype=np.uint8)
    status[zero_sum] = STATUS_ZERO_SUM
    status[degenerate] = STATUS_DEGENERATE
    coll = np.where(status == STATUS_OK, coll, np.nan)
    return coll, status


def _ray_box_batch_numpy(origins, dirs, boxes):
    t_enter = np.full(origins.shape[0], -np.inf)
    t_exit = np.full(origins.shape[0], np.inf)
    ok = np.ones(origins.shape[0], dtype=bool)
    for axis in range(2):
        o = origins[:, axis]
        d = dirs[:, axis]
        lo = boxes[:, axis]
        hi = boxes[:, axis + 2]
        parallel = d == 0.0
        ok &= ~parallel | ((o >= lo) & (o <= hi))
        with np.errstate(divide="ignore", invalid="ignore"):
            t0 = (lo - o) / d
            t1 = (hi - o) / d
        near = np.where(parallel, -np.inf, np.minimum(t0, t1))
        far = np.where(parallel, np.inf, np.maximum(t0, t1))
        t_enter = np.maximum(t_enter, near)
        t_exit = np.minimum(t_exit, far)
    hits = ok & (t_enter <= t_exit) & (t_exit >= 0.0)
    ts = np.where(hits, np.maximum(t_enter, 0.0), np.nan)
    return hits, ts


def _point_ray_distance_batch_numpy(points, origins, dirs):
    r = points - origins
    t = np.maximum(0.0, r[:, 0] * dirs[:, 0] + r[:, 1] * dirs[:, 1])
    cx = r[:, 0] - t * dirs[:, 0]
    cy = r[:, 1] - t * dirs[:, 1]
    return np.sqrt(cx * cx + cy * cy)


# ---------------------------------------------------------------------------
# Backend selection.
# ---------------------------------------------------------------------------

_LOOP_KERNELS = {
    "iou_batch": _iou_batch_loop,
    "giou_batch": _giou_batch_loop,
    "alignment_batch": _alignment_batch_loop,
    "collinearity_batch": _collinearity_batch_loop,
    "ray_box_batch": _ray_box_batch_loop,
    "point_ray_distance_batch": _point_ray_distance_batch_loop,
}

_NUMPY_KERNELS = {
    "iou_batch": _iou_batch_numpy,
    "giou_batch": _giou_batch_numpy,
    "alignment_batch": _alignment_batch_numpy,
    "collinearity_batch": _collinearity_batch_numpy,
    "ray_box_batch": _ray_box_batch_numpy,
    "point_ray_distance_batch": _point_ray_distance_batch_numpy,
}


def _compile_numba_kernels() -> dict:
    from numba import njit

    return {name: njit(cache=True)(fn) for name, fn in _LOOP_KERNELS.items()}


def _resolve_backend() -> tuple[str, dict]:
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"{_ENV_VAR} must be auto, numba, or numpy; got {choice!r}")
    if choice == "numpy":
        return "numpy", _NUMPY_KERNELS
    try:
        kernels = _compile_numba_kernels()
        return "numba", kernels
    except ImportError:
        if choice == "numba":
            raise ImportError(f"{_ENV_VAR}=numba but numba is not importable")
        return "numpy", _NUMPY_KERNELS


_BACKEND_NAME, _ACTIVE = _resolve_backend()

#: Both implementation sets, keyed by backend name, for benchmarks and
#: parity tests. "numba" is present only when numba imports.
IMPLEMENTATIONS = {"numpy": _NUMPY_KERNELS}
if _BACKEND_NAME == "numba":
    IMPLEMENTATIONS["numba"] = _ACTIVE


def active_backend() -> str:
    """Name of the backend selected at import time."""
    return _BACKEND_NAME


def _f64(x, cols: int) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if arr.ndim != 2 or arr.shape[1] != cols:
        raise ValueError(f"expected array of shape (n, {cols}), got {arr.shape}")
    return arr


def iou_batch(a, b) -> np.ndarray:
    """Elementwise IoU of two (n, 4) corner-form box arrays."""
    return _ACTIVE["iou_batch"](_f64(a, 4), _f64(b, 4))


def giou_batch(a, b) -> np.ndarray:
    """Elementwise GIoU of two (n, 4) corner-form box arrays."""
    return _ACTIVE["giou_batch"](_f64(a, 4), _f64(b, 4))


def alignment_batch(sources, tips, centers) -> np.ndarray:
    """Elementwise alignment scores; NaN where geometry is degenerate."""
    return _ACTIVE["alignment_batch"](_f64(sources, 2), _f64(tips, 2), _f64(centers, 2))


def collinearity_batch(keypoints) -> tuple[np.ndarray, np.ndarray]:
    """Arm collinearity per (n, 12) flattened skeleton array.

    Returns (collinearity, status): status 0 for ok, 1 for a degenerate
    segment, 2 for an anti-parallel maximum pair; collinearity is NaN
    wherever status != 0.
    """
    return _ACTIVE["collinearity_batch"](_f64(keypoints, 12))


def ray_box_batch(origins, dirs, boxes) -> tuple[np.ndarray, np.ndarray]:
    """Slab ray/box test; returns (hit, entry t) with NaN t on miss."""
    return _ACTIVE["ray_box_batch"](_f64(origins, 2), _f64(dirs, 2), _f64(boxes, 4))


def point_ray_distance_batch(points, origins, dirs) -> np.ndarray:
    """Distance from each point to the matching ray (clamped at origin)."""
    return _ACTIVE["point_ray_distance_batch"](_f64(points, 2), _f64(origins, 2), _f64(dirs, 2))
