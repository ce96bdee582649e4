"""Virtual cluster requests VC(n, c, b) and DRP template upgrading."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[int, float, str, Fraction]


class UnpriceableError(ValueError):
    """A request exceeds the largest DRP template."""


def as_fraction(x: Number) -> Fraction:
    """Coerce ``x`` to an exact Fraction.

    Floats go through their shortest repr so ``0.1`` becomes 1/10 rather
    than the binary expansion. Strings accept ``"3/8"`` and decimals.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True)
class VCRequest:
    """One virtual cluster: ``n`` VMs, each with compute share ``c`` of a
    host and bandwidth share ``b`` of a host access link."""

    id: int
    n: int
    c: Fraction
    b: Fraction
    arrival: float = 0.0
    duration: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "c", as_fraction(self.c))
        object.__setattr__(self, "b", as_fraction(self.b))
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"VC size must be a positive integer, got {self.n!r}")
        if not 0 < self.c <= 1:
            raise ValueError(f"compute share must lie in (0, 1], got {self.c}")
        if not 0 < self.b <= 1:
            raise ValueError(f"bandwidth share must lie in (0, 1], got {self.b}")
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")

    @property
    def rho(self) -> Fraction:
        return resource_ratio(self)

    def with_demand(self, c: Fraction, b: Fraction) -> "VCRequest":
        return VCRequest(self.id, self.n, c, b, self.arrival, self.duration)


def resource_ratio(req: VCRequest) -> Fraction:
    return req.c / req.b


@dataclass(frozen=True)
class TemplateSet:
    """Coupled (c, b) templates offered under dominant resource pricing.

    Each template has c == b, so only the scalar values are stored.
    """

    values: tuple = field(default=(Fraction(1, 8), Fraction(1, 4), Fraction(1, 2)))

    def __post_init__(self):
        vals = tuple(as_fraction(v) for v in self.values)
        if not vals:
            raise ValueError("template set must not be empty")
        if any(not 0 < v <= 1 for v in vals):
            raise ValueError("template values must lie in (0, 1]")
        if any(a >= b for a, b in zip(vals, vals[1:])):
            raise ValueError("template values must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, values: Iterable[Number]) -> "TemplateSet":
        return cls(tuple(sorted(as_fraction(v) for v in values)))

    @property
    def largest(self) -> Fraction:
        return self.values[-1]

    def covers(self, demand_values: Sequence[Number]) -> bool:
        return all(as_fraction(v) <= self.largest for v in demand_values)


def drp_upgrade(req: VCRequest, templates: TemplateSet) -> tuple:
    """Smallest template ``(t, t)`` with ``t >= max(c, b)``."""
    need = max(req.c, req.b)
    i = bisect.bisect_left(templates.values, need)
    if i == len(templates.values):
        raise UnpriceableError(
            f"request {req.id} needs {need}, above the largest template {templates.largest}")
    t = templates.values[i]
    return t, t


def upgraded(req: VCRequest, templates: TemplateSet) -> VCRequest:
    c, b = drp_upgrade(req, templates)
    return req.with_demand(c, b)
