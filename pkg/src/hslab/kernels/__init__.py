"""Backend dispatch for the hot numeric kernels.

Two interchangeable implementations exist: numba-jitted loops and pure
numpy. Selection order:

* ``HSLAB_BACKEND=numpy`` forces the numpy path (numba never imported);
* ``HSLAB_BACKEND=numba`` requires numba and fails loudly without it;
* unset or ``auto``: numba when importable, numpy otherwise.

``use_backend`` switches at runtime (used by the parity tests and the
benchmark harness).
"""

import os

from . import numpy_impl

_impls = {"numpy": numpy_impl}
_active = None


def _try_load_numba():
    if "numba" in _impls:
        return True
    try:
        from . import numba_impl
    except Exception:
        return False
    _impls["numba"] = numba_impl
    return True


def _initial_backend():
    req = os.environ.get("HSLAB_BACKEND", "auto").strip().lower()
    if req in ("", "auto"):
        return "numba" if _try_load_numba() else "numpy"
    if req == "numpy":
        return "numpy"
    if req == "numba":
        if not _try_load_numba():
            raise ImportError("HSLAB_BACKEND=numba but numba is not importable")
        return "numba"
    raise ValueError(f"unknown HSLAB_BACKEND value: {req!r}")


def active_backend():
    global _active
    if _active is None:
        _active = _initial_backend()
    return _active


def available_backends():
    out = ["numpy"]
    if _try_load_numba():
        out.append("numba")
    return out


def use_backend(name):
    """Select the kernel backend ('numpy' or 'numba') for this process."""
    global _active
    name = name.strip().lower()
    if name == "numba" and not _try_load_numba():
        raise ImportError("numba backend requested but numba is not importable")
    if name not in ("numpy", "numba"):
        raise ValueError(f"unknown backend: {name!r}")
    _active = name
    return _active


def _impl():
    return _impls[active_backend()]


def eigh_jacobi(mats, tol=1e-12, max_sweeps=60):
    return _impl().eigh_jacobi(mats, tol=tol, max_sweeps=max_sweeps)


def sff_norm_sq(T, ginv):
    return _impl().sff_norm_sq(T, ginv)


def gs_divform(w, P, G, h, free, tol, max_sweeps, atol=0.0):
    return _impl().gs_divform(w, P, G, h, free, tol, max_sweeps, atol)


def gs_wform(delta, W, h, free, rhs, tol, max_sweeps, atol=0.0):
    return _impl().gs_wform(delta, W, h, free, rhs, tol, max_sweeps, atol)


def resample_multilinear(xbar, values, targets, tol, max_iter=60):
    return _impl().resample_multilinear(xbar, values, targets, tol, max_iter=max_iter)
