"""Pairwise Green kernel matrices with a compiled core and a numpy fallback.

The compiled extension ``_ckernels`` is used when it has been built; set
``METAIMPEDANCE_PURE_PYTHON=1`` to force the numpy path.  Both produce the
same numbers up to rounding.
"""
from __future__ import annotations

import os
from contextlib import contextmanager

import numpy as np

from .green import _core


def pair_green_numpy(tx, ty, sx, sy, mirror=False, grad=True):
    """Numpy version of :func:`pair_green`."""
    tx = np.asarray(tx, dtype=float)[:, None]
    ty = np.asarray(ty, dtype=float)[:, None]
    sx = np.asarray(sx, dtype=float)[None, :]
    sy = np.asarray(sy, dtype=float)[None, :]
    sgn = -1.0 if mirror else 1.0
    g, g1, g2 = _core(tx - sx, sgn * ty - sy, grad=grad)
    g = np.broadcast_to(g, (tx.shape[0], sx.shape[1])).copy()
    if not grad:
        return g, None, None
    if mirror:
        g2 = -g2
    return g, g1, g2


def _load_compiled():
    if os.environ.get("METAIMPEDANCE_PURE_PYTHON", "") not in ("", "0"):
        return None
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()

#: name of the active kernel backend, ``"cython"`` or ``"numpy"``
BACKEND = "cython" if _compiled is not None else "numpy"


@contextmanager
def use_backend(name):
    """Temporarily route :func:`pair_green` through ``"numpy"`` or ``"cython"``."""
    global _compiled
    saved = _compiled
    if name == "numpy":
        _compiled = None
    elif name == "cython":
        _compiled = saved or _load_compiled()
        if _compiled is None:
            raise RuntimeError("the compiled kernel extension is not built")
    else:
        raise ValueError(f"unknown backend {name!r}")
    try:
        yield
    finally:
        _compiled = saved


def pair_green(tx, ty, sx, sy, mirror=False, grad=True):
    """Periodic Green function and target gradient for every target/source pair.

    Returns ``(g, g1, g2)`` arrays of shape ``(n_targets, n_sources)``.  With
    ``mirror=True`` the offsets are ``(tx - sx, -ty - sy)`` (image sources)
    and the gradient is still with respect to the target.  Coincident points
    give ``g = -inf`` and ``nan`` gradients; callers overwrite those entries.
    """
    if _compiled is None:
        return pair_green_numpy(tx, ty, sx, sy, mirror, grad)
    c = np.ascontiguousarray
    return _compiled.pair_green(
        c(tx, dtype=float), c(ty, dtype=float), c(sx, dtype=float), c(sy, dtype=float),
        bool(mirror), bool(grad),
    )


def halfspace_pair(tx, ty, sx, sy, grad=True):
    """Half-space Dirichlet kernel ``G(x - y) - G(x1 - y1, -x2 - y2)`` for all pairs."""
    if _compiled is not None:
        c = np.ascontiguousarray
        return _compiled.halfspace_pair(c(tx, dtype=float), c(ty, dtype=float),
                                        c(sx, dtype=float), c(sy, dtype=float), bool(grad))
    g, g1, g2 = pair_green(tx, ty, sx, sy, False, grad)
    m, m1, m2 = pair_green(tx, ty, sx, sy, True, grad)
    if not grad:
        return g - m, None, None
    return g - m, g1 - m1, g2 - m2
