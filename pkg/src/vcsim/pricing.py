"""Pricing of virtual clusters: ideal, dominant-resource (DRP) and
demand-specific (DSP), plus calibration of the DSP skew weights.

All amounts are exact Fractions; rounding is left to whoever prints them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .request import Number, TemplateSet, VCRequest, as_fraction, drp_upgrade

SCHEMES = ("ideal", "drp", "dsp")


@dataclass(frozen=True)
class UnitPrices:
    p_c: Fraction = Fraction(1)
    p_b: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "p_c", as_fraction(self.p_c))
        object.__setattr__(self, "p_b", as_fraction(self.p_b))
        if self.p_c <= 0 or self.p_b <= 0:
            raise ValueError("unit prices must be positive")


@dataclass(frozen=True)
class LambdaParams:
    lambda_c: Fraction = Fraction(1, 6)
    lambda_b: Fraction = Fraction(1, 6)

    def __post_init__(self):
        object.__setattr__(self, "lambda_c", as_fraction(self.lambda_c))
        object.__setattr__(self, "lambda_b", as_fraction(self.lambda_b))
        if self.lambda_c < 0 or self.lambda_b < 0:
            raise ValueError("skew weights must be non-negative")


@dataclass(frozen=True)
class PriceQuote:
    scheme: str
    base: Fraction
    skew_fee: Fraction = Fraction(0)

    @property
    def total(self) -> Fraction:
        return self.base + self.skew_fee


def price_ideal(req: VCRequest, prices: UnitPrices) -> PriceQuote:
    return PriceQuote("ideal", req.n * (req.c * prices.p_c + req.b * prices.p_b))


def price_drp(req: VCRequest, prices: UnitPrices,
              templates: Optional[TemplateSet] = None) -> PriceQuote:
    """Both resources charged at the dominant one.

    With ``templates`` given, a request above the largest template raises
    :class:`~vcsim.request.UnpriceableError`.
    """
    if templates is not None:
        drp_upgrade(req, templates)
    return PriceQuote("drp", req.n * max(req.c, req.b) * (prices.p_c + prices.p_b))


def price_dsp(req: VCRequest, prices: UnitPrices, lambdas: LambdaParams) -> PriceQuote:
    n, c, b = req.n, req.c, req.b
    base = n * (b * prices.p_b + c * prices.p_c)
    if c >= b:
        fee = n * (c - b) * prices.p_b * lambdas.lambda_b
    else:
        fee = n * (b - c) * prices.p_c * lambdas.lambda_c
    return PriceQuote("dsp", base, fee)


def quote(scheme: str, req: VCRequest, prices: UnitPrices,
          lambdas: Optional[LambdaParams] = None,
          templates: Optional[TemplateSet] = None) -> PriceQuote:
    if scheme == "ideal":
        return price_ideal(req, prices)
    if scheme == "drp":
        return price_drp(req, prices, templates)
    if scheme == "dsp":
        return price_dsp(req, prices, lambdas if lambdas is not None else LambdaParams())
    raise ValueError(f"unknown pricing scheme {scheme!r}")


@dataclass(frozen=True)
class CalibrationInput:
    """Inputs to the skew-weight calibration for one skew direction.

    ``N`` counts the VMs whose request is skewed in that direction, ``e_c``
    and ``e_b`` are their mean compute and bandwidth shares, and ``delta``
    is the extra provider income to share back with customers.
    """

    N: Fraction
    e_c: Fraction
    e_b: Fraction
    delta: Fraction

    def __post_init__(self):
        for name in ("N", "e_c", "e_b", "delta"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.N < 0 or self.delta < 0:
            raise ValueError("N and delta must be non-negative")
        if not (0 < self.e_c <= 1 and 0 < self.e_b <= 1):
            raise ValueError("expected demands must lie in (0, 1]")


def _solve(N, gap, unit_price, delta) -> Fraction:
    denom = N * gap * unit_price
    if denom <= 0:
        raise ValueError("no skewed demand in this direction to calibrate against")
    lam = 1 - delta / (2 * denom)
    return min(max(lam, Fraction(0)), Fraction(1))


def calibrate_lambda_b(inp: CalibrationInput, prices: UnitPrices) -> Fraction:
    """Solve ``N (E[c] - E[b]) p_b (1 - lambda_b) = delta / 2``, clamped to [0, 1]."""
    return _solve(inp.N, inp.e_c - inp.e_b, prices.p_b, inp.delta)


def calibrate_lambda_c(inp: CalibrationInput, prices: UnitPrices) -> Fraction:
    """Mirror image of :func:`calibrate_lambda_b` for requests with b > c."""
    return _solve(inp.N, inp.e_b - inp.e_c, prices.p_c, inp.delta)


def format_money(x: Number) -> str:
    return f"{float(round(as_fraction(x), 2)):.2f}"
