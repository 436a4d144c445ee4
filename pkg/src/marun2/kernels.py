"""Step-kernel backend selection.

The compiled extension is preferred when importable; the pure-Python twin is
the fallback. MARUN2_BACKEND=pure|native forces a choice (native raises if the
extension is missing). Both backends produce bit-identical trajectories.
"""

from __future__ import annotations

import os

from . import _pure_kernels


def _load(name: str):
    if name == "pure":
        return _pure_kernels
    if name == "native":
        from . import _native_kernels  # type: ignore[attr-defined]

        return _native_kernels
    if name in ("", "auto"):
        try:
            from . import _native_kernels  # type: ignore[attr-defined]

            return _native_kernels
        except ImportError:
            return _pure_kernels
    raise ValueError(f"MARUN2_BACKEND must be 'pure', 'native' or 'auto', got {name!r}")


backend = _load(os.environ.get("MARUN2_BACKEND", "auto"))
BACKEND_NAME: str = backend.BACKEND_NAME


def available_backends() -> list[str]:
    names = ["pure"]
    try:
        from . import _native_kernels  # noqa: F401

        names.append("native")
    except ImportError:
        pass
    return names


def get_backend(name: str):
    return _load(name)
