"""Kernel backend selection.

Two interchangeable kernel modules exist: the compiled Cython core
(``blowup.backends._core``) and a pure numpy/scipy fallback
(``blowup.backends.pure``).  The compiled core is picked automatically at
import when the extension was built; otherwise the pure module is used.
``use_backend`` switches the active module explicitly, which the benchmark
uses to time both on identical work.
"""

from __future__ import annotations

from types import ModuleType

from . import pure

try:
    from . import _core as _compiled  # type: ignore[attr-defined]
except ImportError:
    _compiled = None

_active: ModuleType = _compiled if _compiled is not None else pure


def available_backends() -> tuple[str, ...]:
    return ("compiled", "pure") if _compiled is not None else ("pure",)


def active() -> ModuleType:
    """The kernel module used by grid/spectral/evolution operations."""
    return _active


def active_name() -> str:
    return _active.name


def use_backend(name: str) -> ModuleType:
    """Select the kernel backend ("compiled" or "pure") for subsequent ops."""
    global _active
    if name == "pure":
        _active = pure
    elif name == "compiled":
        if _compiled is None:
            raise ValueError("compiled backend is not available (extension not built)")
        _active = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")
    return _active
