"""Numerical tolerance settings shared by the library and the CLI."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Mapping, Optional

ENV_PREFIX = "QERGODIC_"


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used when checking and decomposing operators.

    ``degeneracy_tol=None`` means relative clustering: adjacent eigenvalues
    closer than ``1e-9`` times the spectral scale are merged into one level.
    """

    hermiticity_tol: float = 1e-10
    degeneracy_tol: Optional[float] = None
    resonance_tol: float = 1e-9

    def as_dict(self) -> dict:
        return asdict(self)

    def updated(self, overrides: Mapping[str, object]) -> "Tolerances":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        clean = {k: (None if v is None else float(v)) for k, v in overrides.items()}
        return replace(self, **clean)

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "Tolerances":
        """Defaults overridden by ``QERGODIC_HERMITICITY_TOL`` and friends."""
        environ = os.environ if environ is None else environ
        overrides = {}
        for f in fields(cls):
            raw = environ.get(ENV_PREFIX + f.name.upper())
            if raw is not None and raw.strip():
                overrides[f.name] = float(raw)
        return cls().updated(overrides)
