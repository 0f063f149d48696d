"""Uniform-bin discretization of coordinates into canonical numeric token strings.

Values snap to the nearest multiple of a configurable bin width and are
printed with a fixed number of decimals, so every bin has exactly one string
form ("0.05" and "0.050" never coexist). All grid arithmetic runs on
``decimal.Decimal`` to keep token identity independent of binary float noise.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from .errors import NonFiniteError, UnknownTokenError


def _decimal(value) -> Decimal:
    """Exact decimal reading of a number (floats via their shortest repr)."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise NonFiniteError(f"non-finite value {value!r}")
        return Decimal(repr(value))
    return Decimal(str(value))


@dataclass(frozen=True)
class QuantizerConfig:
    """Bin width plus inclusive numeric range; bounds are grid multiples.

    ``decimals`` is derived: the number of fractional digits needed to print
    the granularity exactly (0.05 -> 2).
    """

    granularity: Decimal
    range_min: Decimal = Decimal("-8")
    range_max: Decimal = Decimal("8")
    decimals: int = field(init=False)

    def __post_init__(self):
        g = _decimal(self.granularity)
        lo = _decimal(self.range_min)
        hi = _decimal(self.range_max)
        if g <= 0:
            raise ValueError("granularity must be positive")
        if lo > hi:
            raise ValueError("range_min must not exceed range_max")
        exponent = g.normalize().as_tuple().exponent
        decimals = max(0, -int(exponent))
        for bound in (lo, hi):
            if (bound / g) % 1 != 0:
                raise ValueError(f"range bound {bound} is not a multiple of {g}")
        object.__setattr__(self, "granularity", g)
        object.__setattr__(self, "range_min", lo)
        object.__setattr__(self, "range_max", hi)
        object.__setattr__(self, "decimals", decimals)

    @classmethod
    def clevr(cls) -> "QuantizerConfig":
        return cls(Decimal("0.05"), Decimal("-8"), Decimal("8"))

    # ObjaWorld shares the CLEVR grid.
    objaworld = clevr

    @classmethod
    def objectron(cls) -> "QuantizerConfig":
        return cls(Decimal("0.05"), Decimal("-10"), Decimal("10"))

    # Same metric range for both real-world datasets.
    arkitscenes = objectron


def _format(value: Decimal, decimals: int) -> str:
    if value == 0:
        value = abs(value)  # never print "-0.00"
    return str(value.quantize(Decimal(1).scaleb(-decimals)))


def quantize(x, cfg: QuantizerConfig) -> str:
    """Canonical token of the nearest bin; ties round half away from zero.

    Out-of-range values clamp to the nearest bound (model output is not
    trusted to stay in range); NaN/inf raise :class:`NonFiniteError`.
    """
    xd = _decimal(x)
    k = (xd / cfg.granularity).to_integral_value(rounding=ROUND_HALF_UP)
    value = k * cfg.granularity
    if value < cfg.range_min:
        value = cfg.range_min
    elif value > cfg.range_max:
        value = cfg.range_max
    return _format(value, cfg.decimals)


_PATTERN_CACHE: dict[int, re.Pattern] = {}


def _token_pattern(decimals: int) -> re.Pattern:
    pat = _PATTERN_CACHE.get(decimals)
    if pat is None:
        if decimals == 0:
            pat = re.compile(r"^-?(?:0|[1-9]\d*)$")
        else:
            pat = re.compile(r"^-?(?:0|[1-9]\d*)\.\d{%d}$" % decimals)
        _PATTERN_CACHE[decimals] = pat
    return pat


def dequantize(tok: str, cfg: QuantizerConfig) -> float:
    """Exact real value of a canonical numeric token; rejects anything else."""
    if not isinstance(tok, str) or not _token_pattern(cfg.decimals).match(tok):
        raise UnknownTokenError(f"not a canonical numeric token: {tok!r}")
    value = Decimal(tok)
    if value == 0 and tok.startswith("-"):
        raise UnknownTokenError(f"negative zero is not canonical: {tok!r}")
    if value < cfg.range_min or value > cfg.range_max:
        raise UnknownTokenError(f"numeric token out of range: {tok!r}")
    if (value / cfg.granularity) % 1 != 0:
        raise UnknownTokenError(f"numeric token off the grid: {tok!r}")
    return float(value)


def is_numeric_token(tok: str, cfg: QuantizerConfig) -> bool:
    try:
        dequantize(tok, cfg)
    except UnknownTokenError:
        return False
    return True


def numeric_vocab(cfg: QuantizerConfig) -> list[str]:
    """All grid tokens from range_min to range_max inclusive, ascending."""
    k_lo = int(cfg.range_min / cfg.granularity)
    k_hi = int(cfg.range_max / cfg.granularity)
    return [_format(k * cfg.granularity, cfg.decimals) for k in range(k_lo, k_hi + 1)]
