"""Backend selection for the hot sweep kernels.

The compiled extension is preferred when importable; otherwise the numpy
fallback is used. Both expose the same functions with bit-identical results
(enforced by tests), so selection only affects speed. `use()` rebinds the
active backend, which the benchmark and the cross-backend tests rely on.
"""

from __future__ import annotations

from . import _kernels_py

try:
    from . import _kernels_cy
    _HAVE_CY = True
except ImportError:
    _kernels_cy = None
    _HAVE_CY = False

_BACKENDS = {"py": _kernels_py}
if _HAVE_CY:
    _BACKENDS["cy"] = _kernels_cy

_active_name = "cy" if _HAVE_CY else "py"
_active = _BACKENDS[_active_name]

decay_array = _active.decay_array
add_column = _active.add_column
add_at = _active.add_at
leak_fire_lif = _active.leak_fire_lif
leak_fire_syn = _active.leak_fire_syn


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def backend_name() -> str:
    return _active_name


def get_backend(name: str):
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; "
                         f"available: {available_backends()}") from None


def use(name: str) -> str:
    """Switch the active backend; returns the previously active name."""
    global _active, _active_name
    global decay_array, add_column, add_at, leak_fire_lif, leak_fire_syn
    backend = get_backend(name)
    previous = _active_name
    _active, _active_name = backend, name
    decay_array = backend.decay_array
    add_column = backend.add_column
    add_at = backend.add_at
    leak_fire_lif = backend.leak_fire_lif
    leak_fire_syn = backend.leak_fire_syn
    return previous
