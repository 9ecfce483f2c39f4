"""Named constants of the injectivity-radius Lipschitz bounds, in extended precision.

Each constant carries its closed form, a 50-digit value and the short decimal
printed alongside it in the literature.  A printed decimal with k digits is
accepted when it lies within 1.5 units of its last digit of the exact value;
displays that are not the nearest rounding are flagged rather than failed.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from typing import Callable, Dict, List, Optional

import mpmath

DPS = 50


def _mp():
    ctx = mpmath.mp.clone()
    ctx.dps = DPS
    return ctx


@dataclass(frozen=True)
class NamedConstant:
    id: str
    closed_form: str
    value: mpmath.mpf
    display: Optional[str]
    location: str

    @property
    def digits(self) -> int:
        if self.display is None:
            return 0
        return -Decimal(self.display).as_tuple().exponent

    @property
    def display_error(self) -> Optional[float]:
        if self.display is None:
            return None
        return float(abs(self.value - mpmath.mpf(self.display)))

    @property
    def consistent(self) -> bool:
        """Display within 1.5 units of its last printed digit."""
        if self.display is None:
            return True
        return self.display_error < 1.5 * 10.0 ** (-self.digits)

    @property
    def nearest_rounding(self) -> Optional[str]:
        if self.display is None:
            return None
        return f"{float(self.value):.{self.digits}f}"

    @property
    def flagged(self) -> bool:
        """True when the printed decimal is not the nearest rounding of the value."""
        return self.display is not None and self.nearest_rounding != self.display

    def to_json(self) -> dict:
        return {"id": self.id, "closed_form": self.closed_form,
                "value": mpmath.nstr(self.value, 30), "display": self.display,
                "nearest_rounding": self.nearest_rounding, "consistent": self.consistent,
                "flagged": self.flagged, "location": self.location}


def ledger() -> List[NamedConstant]:
    mp = _mp()
    sqrt2 = mp.sqrt(2)
    lip_inj = 1 / (4 * mp.sqrt(sqrt2 - 1))
    return [
        NamedConstant("LIP_INJ", "1/(4*sqrt(sqrt(2)-1))", lip_inj, "0.3884",
                      "Lipschitz constant of sqrt(inj), main theorem"),
        NamedConstant("LIP_INJ_THICK", "sqrt(6)/(4*sqrt(pi))", mp.sqrt(6) / (4 * mp.sqrt(mp.pi)), "0.3454",
                      "Lipschitz constant of sqrt(inj), thick case"),
        NamedConstant("LIP_SYS", "sqrt(2)*LIP_INJ", sqrt2 * lip_inj, "0.5492",
                      "Lipschitz constant of sqrt(systole), corollary"),
        NamedConstant("DEEP_INJ", "ln(exp(-sqrt(2)) + sqrt(exp(-2*sqrt(2)) + 1))",
                      mp.log(mp.exp(-sqrt2) + mp.sqrt(mp.exp(-2 * sqrt2) + 1)), "0.2407",
                      "lower bound of inj along a shortest loop at a thick point"),
        NamedConstant("SHRINK", "exp(-asinh(1)) = sqrt(2)-1", mp.exp(-mp.asinh(1)), None,
                      "shrink factor of inj along a shortest loop at a thin point"),
        NamedConstant("INRADIUS_RATIO", "sqrt(2*pi)", mp.sqrt(2 * mp.pi), "2.5066",
                      "limit of inradius over sqrt(systole) in moduli space"),
        NamedConstant("MT4", "1/(0.3884*sqrt(6))", 1 / (mp.mpf("0.3884") * mp.sqrt(6)), "1.051102",
                      "distance constant for the thin part of moduli space"),
        NamedConstant("HALF_DEEP_INJ", "DEEP_INJ/2",
                      mp.log(mp.exp(-sqrt2) + mp.sqrt(mp.exp(-2 * sqrt2) + 1)) / 2, "0.1203",
                      "radius cap in the thick-case estimate"),
    ]


def ledger_by_id() -> Dict[str, NamedConstant]:
    return {c.id: c for c in ledger()}


def pants_inj(L):
    """Upper bound L/2 + ln 6 for inj on a surface glued from pants with boundary <= L."""
    mp = _mp()
    return mpmath.mpf(L) / 2 + mp.log(6)


def max_inj(g: int):
    """Upper bound ln(4g - 2) for the injectivity radius on a closed surface of genus g."""
    if g < 2:
        raise ValueError("genus must be at least 2")
    return _mp().log(4 * g - 2)


FUNCTIONS: Dict[str, Callable] = {"PANTS_INJ": pants_inj, "MAX_INJ": max_inj}


def teo_C(r):
    """C(r) = (4 pi/3 (1 - (4 e^r/(1+e^r)^2)^3))^(-1/2), evaluated stably.

    With t = tanh^2(r/2) the bracket is 1 - (1-t)^3 = t (3 - 3t + t^2), which
    avoids cancellation for small r.  C(r) - C(inf) decays like e^{-3r}, so the
    working precision grows with r to keep nearby values distinguishable.
    """
    from .errors import DomainError

    if not mpmath.mpf(r) > 0:
        raise DomainError("teo_C requires r > 0")
    with mpmath.workdps(max(DPS, int(1.31 * float(r)) + 20)):
        r = mpmath.mpf(r)
        t = mpmath.tanh(r / 2) ** 2
        return (4 * mpmath.pi / 3 * t * (3 - 3 * t + t * t)) ** mpmath.mpf(-0.5)


@dataclass(frozen=True)
class LipschitzReport:
    thick_limit: float
    thick_closed_form: float
    small_r_exponent: float
    short_constant: float
    short_closed_form: float
    larger_is_short: bool
    deep_below_asinh1: bool

    @property
    def passed(self) -> bool:
        return (abs(self.thick_limit - self.thick_closed_form) < 1e-4
                and abs(self.short_constant - self.short_closed_form) < 1e-15
                and self.larger_is_short and self.deep_below_asinh1)

    def to_json(self) -> dict:
        return dict(self.__dict__, passed=self.passed)


def verify_lipschitz_arithmetic() -> LipschitzReport:
    """Re-derive the two Lipschitz constants from their ingredients."""
    mp = _mp()
    led = ledger_by_id()

    def h(r):
        return mp.sqrt(6) / 4 * teo_C(r) * mp.sqrt(r)

    r1, r2 = mp.mpf("1e-8"), mp.mpf("1e-10")
    # h(r) = a + b sqrt(r) + ...: linear extrapolation in sqrt(r) to r = 0.
    # If h actually scales like r^p with p != 0 the extrapolation is meaningless;
    # the fitted exponent is reported so that case is visible.
    s1, s2 = mp.sqrt(r1), mp.sqrt(r2)
    limit = h(r2) - (h(r1) - h(r2)) / (s1 - s2) * s2
    exponent = mp.log(h(r1) / h(r2)) / mp.log(r1 / r2)
    shrink = mp.exp(-mp.asinh(1))
    short = 1 / (4 * mp.sqrt(shrink))
    return LipschitzReport(
        thick_limit=float(limit),
        thick_closed_form=float(led["LIP_INJ_THICK"].value),
        small_r_exponent=float(exponent),
        short_constant=float(short),
        short_closed_form=float(led["LIP_INJ"].value),
        larger_is_short=bool(short > led["LIP_INJ_THICK"].value),
        deep_below_asinh1=bool(led["DEEP_INJ"].value < mp.asinh(1)),
    )
