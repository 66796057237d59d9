"""Ensemble parameters, ensemble kinds and correlator queries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from ..errors import ParameterError


class EnsembleKind(str, Enum):
    GINIBRE_FTE = "GinibreFTE"
    NORMAL_FTE = "NormalFTE"
    INDUCED_GINIBRE = "InducedGinibre"
    PRODUCT_GINIBRE = "ProductGinibre"
    MIXED_PRODUCT = "MixedProduct"

    @classmethod
    def parse(cls, name: "str | EnsembleKind") -> "EnsembleKind":
        """Accept enum values, enum names or the CLI spellings (``ginibre-fte`` etc.)."""
        if isinstance(name, cls):
            return name
        cli = {
            "ginibre-fte": cls.GINIBRE_FTE,
            "normal-fte": cls.NORMAL_FTE,
            "induced": cls.INDUCED_GINIBRE,
            "product": cls.PRODUCT_GINIBRE,
            "mixed": cls.MIXED_PRODUCT,
        }
        key = str(name).strip()
        if key.lower() in cli:
            return cli[key.lower()]
        for kind in cls:
            if key in (kind.value, kind.name):
                return kind
        raise ParameterError(f"unknown ensemble kind {name!r}")

    @property
    def is_fixed_trace(self) -> bool:
        return self in (EnsembleKind.GINIBRE_FTE, EnsembleKind.NORMAL_FTE)


@dataclass(frozen=True)
class EnsembleParams:
    """Dimension N, M factors of which the first m carry a trace constraint.

    ``nu`` has one entry per factor, ``s`` one per constrained factor and ``t``
    one per unconstrained factor.
    """

    N: int
    M: int = 1
    m: int = 0
    nu: tuple[float, ...] = (0.0,)
    s: tuple[float, ...] = ()
    t: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N}")
        if int(self.M) != self.M or self.M < 1:
            raise ParameterError(f"M must be a positive integer, got {self.M}")
        if not 0 <= self.m <= self.M:
            raise ParameterError(f"m must lie in [0, M], got m={self.m}, M={self.M}")
        if len(self.nu) != self.M:
            raise ParameterError(f"need {self.M} values of nu, got {len(self.nu)}")
        if len(self.s) != self.m:
            raise ParameterError(f"need {self.m} values of s, got {len(self.s)}")
        if len(self.t) != self.M - self.m:
            raise ParameterError(f"need {self.M - self.m} values of t, got {len(self.t)}")
        if any(not v > -1 for v in self.nu):
            raise ParameterError(f"every nu must exceed -1, got {self.nu}")
        if any(not v > 0 for v in self.s + self.t):
            raise ParameterError("all s and t must be positive")

    # convenience constructors -------------------------------------------------

    @classmethod
    def fixed_trace(cls, N: int, nu: float = 0.0, s: float = 1.0) -> "EnsembleParams":
        return cls(N=N, M=1, m=1, nu=(nu,), s=(s,), t=())

    @classmethod
    def induced(cls, N: int, nu: float = 0.0, t: float = 1.0) -> "EnsembleParams":
        return cls(N=N, M=1, m=0, nu=(nu,), s=(), t=(t,))

    @classmethod
    def product(cls, N: int, nu: Sequence[float], t: Sequence[float] | None = None) -> "EnsembleParams":
        nu = tuple(nu)
        return cls(N=N, M=len(nu), m=0, nu=nu, s=(), t=tuple(t) if t is not None else (1.0,) * len(nu))

    @classmethod
    def mixed(
        cls, N: int, nu: Sequence[float], m: int, s: Sequence[float] | None = None,
        t: Sequence[float] | None = None,
    ) -> "EnsembleParams":
        nu = tuple(nu)
        M = len(nu)
        s = tuple(s) if s is not None else (1.0,) * m
        t = tuple(t) if t is not None else (1.0,) * (M - m)
        return cls(N=N, M=M, m=m, nu=nu, s=s, t=t)

    # derived quantities -------------------------------------------------------

    @property
    def tau(self) -> float:
        """Product of the inverse variances of the unconstrained factors."""
        return math.prod(self.t) if self.t else 1.0

    @property
    def s_prod(self) -> float:
        return math.prod(self.s) if self.s else 1.0

    def exponent(self, j: int = 0, normal: bool = False) -> float:
        """Effective exponent N^2 + N nu_j (or N(N+1)/2 + N nu_j for the normal ensemble)."""
        base = self.N * (self.N + 1) / 2.0 if normal else float(self.N * self.N)
        return base + self.N * self.nu[j]

    def validate_for(self, kind: EnsembleKind) -> None:
        kind = EnsembleKind.parse(kind)
        if kind.is_fixed_trace:
            if self.M != 1 or self.m != 1:
                raise ParameterError(f"{kind.value} needs M = m = 1")
            if self.N < 2:
                raise ParameterError(f"{kind.value} needs N >= 2 (a single eigenvalue is fixed by the constraint)")
        elif kind is EnsembleKind.INDUCED_GINIBRE:
            if self.M != 1 or self.m != 0:
                raise ParameterError("InducedGinibre needs M = 1, m = 0")
        elif kind is EnsembleKind.PRODUCT_GINIBRE:
            if self.m != 0:
                raise ParameterError("ProductGinibre needs m = 0")
        elif kind is EnsembleKind.MIXED_PRODUCT:
            if self.m < 1 or self.M < 2:
                raise ParameterError("MixedProduct needs m >= 1 and M >= 2")
            if self.N < 2:
                raise ParameterError("MixedProduct needs N >= 2")

    def to_dict(self) -> dict:
        return {"N": self.N, "M": self.M, "m": self.m, "nu": list(self.nu), "s": list(self.s), "t": list(self.t)}


@dataclass(frozen=True)
class CorrelatorQuery:
    """k evaluation points for a k-point correlation function."""

    points: tuple[complex, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(complex(z) for z in self.points))
        if not self.points:
            raise ParameterError("a correlator query needs at least one point")

    @property
    def k(self) -> int:
        return len(self.points)

    def validate_for(self, kind: EnsembleKind, p: EnsembleParams) -> None:
        kind = EnsembleKind.parse(kind)
        limit = p.N - 1 if kind is EnsembleKind.NORMAL_FTE else p.N
        if self.k > limit:
            raise ParameterError(f"k = {self.k} exceeds the allowed maximum {limit} for {kind.value}")
