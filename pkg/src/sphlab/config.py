"""Run configuration shared by the CLI and the scripts."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace

from .cosets import DEFAULT_COSET_CAP
from .errors import SphlabError
from .padic import PrimeContext, is_prime

ENV_PREFIX = "SPHLAB_"


@dataclass(frozen=True)
class RunConfig:
    p: int = 2
    n: int = 3
    tol: float = 1e-6
    coset_cap: int = DEFAULT_COSET_CAP
    seed: int = 1
    j_min: int = 1
    j_max: int = 16
    threads: int = 1
    out: str | None = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise SphlabError(f"p={self.p} is not prime")
        if self.n < 2:
            raise SphlabError(f"n={self.n} must be at least 2")
        if not self.tol > 0:
            raise SphlabError("tol must be positive")
        if self.coset_cap < 1 or self.threads < 1:
            raise SphlabError("caps and thread counts must be positive")
        if not 1 <= self.j_min <= self.j_max:
            raise SphlabError(f"bad j range {self.j_min}..{self.j_max}")

    @property
    def ctx(self) -> PrimeContext:
        return PrimeContext(self.p, self.n)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_env(cls, environ=None, **overrides) -> "RunConfig":
        """Defaults, then SPHLAB_* variables, then explicit non-None overrides."""
        environ = os.environ if environ is None else environ
        values = {}
        for f in fields(cls):
            raw = environ.get(ENV_PREFIX + f.name.upper())
            if raw is not None:
                values[f.name] = _parse(f.name, raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return replace(cls(), **values) if values else cls()


def _parse(name: str, raw: str):
    if name == "tol":
        return float(raw)
    if name == "out":
        return raw
    return int(raw)
