"""Identifiers for criteria, their component conditions, and rho choices."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .errors import ConfigError
from .expr import Expression


class RhoKind(enum.Enum):
    PI1_POW_ALPHA = "pi1^alpha"
    PI1 = "pi1"
    ONE = "one"
    CUSTOM = "custom"


@dataclass(frozen=True)
class RhoFunction:
    """Weight rho of the Riccati-type tests, with its derivative.

    A custom rho is an expression in ``t`` and must come with an expression
    for its derivative; nothing is differentiated symbolically.
    """

    kind: RhoKind
    body: str | None = None
    derivative: str | None = None

    def __post_init__(self):
        if self.kind is RhoKind.CUSTOM:
            if not self.body or not self.derivative:
                raise ConfigError("a custom rho needs both an expression and its derivative")
            Expression(self.body)
            Expression(self.derivative)

    @classmethod
    def parse(cls, text) -> "RhoFunction":
        if isinstance(text, RhoFunction):
            return text
        if isinstance(text, dict):
            return cls(RhoKind.CUSTOM, text.get("body"), text.get("derivative"))
        s = str(text).strip().lower().replace(" ", "")
        aliases = {
            "pi1^alpha": RhoKind.PI1_POW_ALPHA, "pi1**alpha": RhoKind.PI1_POW_ALPHA,
            "pi1_pow_alpha": RhoKind.PI1_POW_ALPHA, "pi1": RhoKind.PI1,
            "one": RhoKind.ONE, "1": RhoKind.ONE,
        }
        if s in aliases:
            return cls(aliases[s])
        if s.startswith("custom:"):
            body, _, deriv = str(text).strip()[len("custom:"):].partition("|")
            return cls(RhoKind.CUSTOM, body.strip(), deriv.strip() or None)
        raise ConfigError(f"unknown rho {text!r}")

    def __str__(self):
        if self.kind is RhoKind.CUSTOM:
            return f"custom:{self.body}|{self.derivative}"
        return self.kind.value


PI1_POW_ALPHA = RhoFunction(RhoKind.PI1_POW_ALPHA)
PI1 = RhoFunction(RhoKind.PI1)
ONE = RhoFunction(RhoKind.ONE)


class Conclusion(enum.Enum):
    PROPERTY_A = "PropertyA"
    OSCILLATORY = "Oscillatory"
    NONE = "None"


PROPERTY_A_THEOREMS = ("T2_1", "T2_2", "T2_3", "T2_4")
OSCILLATION_THEOREMS = ("T2_5", "T2_7", "T2_8", "T2_9", "T2_10", "C2_2", "C2_3", "C2_4",
                        "T2_11", "T2_12", "C2_5")
THEOREMS = PROPERTY_A_THEOREMS + OSCILLATION_THEOREMS
COMPONENTS = ("E2_1", "E2_3", "E2_11", "E2_19", "E2_23", "E2_27", "E2_28", "E2_29", "E2_33",
              "E2_35", "E2_42", "E2_43", "E2_44", "E2_53", "E2_58", "E2_59")

#: component conditions with a free lower limit (t1 or T)
LOWER_LIMIT_COMPONENTS = ("E2_23", "E2_35", "E2_42", "E2_43", "E2_44", "E2_53", "E2_58", "E2_59")

_ID_RE = re.compile(r"^\s*([A-Z]\d_\d+)\s*(?:\((.*)\))?\s*$")


@dataclass(frozen=True)
class CriterionId:
    """A theorem, corollary or component condition, with its parameters."""

    name: str
    rho: RhoFunction | None = None
    lam: float | None = None
    mu: float | None = None
    t1: float | None = None

    def __post_init__(self):
        if self.name not in THEOREMS + COMPONENTS:
            raise ConfigError(f"unknown criterion {self.name!r}")
        for v in (self.lam, self.mu):
            if v is not None and v < 0:
                raise ConfigError(f"{self.name}: lambda and mu must be >= 0")

    @property
    def is_theorem(self):
        return self.name in THEOREMS

    @property
    def conclusion(self) -> Conclusion:
        if self.name in PROPERTY_A_THEOREMS:
            return Conclusion.PROPERTY_A
        if self.name in OSCILLATION_THEOREMS:
            return Conclusion.OSCILLATORY
        return Conclusion.NONE

    def with_(self, **kw) -> "CriterionId":
        fields = {"name": self.name, "rho": self.rho, "lam": self.lam, "mu": self.mu, "t1": self.t1}
        fields.update(kw)
        return CriterionId(**fields)

    def __str__(self):
        params = []
        if self.rho is not None:
            params.append(f"rho={self.rho}")
        if self.lam is not None:
            params.append(f"lambda={self.lam:.12g}")
        if self.mu is not None:
            params.append(f"mu={self.mu:.12g}")
        if self.t1 is not None:
            params.append(f"t1={self.t1:.12g}")
        return self.name + (f"({','.join(params)})" if params else "")

    @classmethod
    def parse(cls, text) -> "CriterionId":
        if isinstance(text, CriterionId):
            return text
        m = _ID_RE.match(str(text))
        if not m:
            raise ConfigError(f"cannot parse criterion id {text!r}")
        name, args = m.group(1), m.group(2)
        kw = {}
        if args:
            for part in args.split(","):
                if not part.strip():
                    continue
                key, _, val = part.partition("=")
                key = key.strip().lower()
                try:
                    if key == "rho":
                        kw["rho"] = RhoFunction.parse(val)
                    elif key in ("lambda", "lam"):
                        kw["lam"] = float(val)
                    elif key == "mu":
                        kw["mu"] = float(val)
                    elif key in ("t1", "t"):
                        kw["t1"] = float(val)
                    else:
                        raise ConfigError(f"unknown parameter {key!r} in {text!r}")
                except ValueError:
                    raise ConfigError(f"bad value for {key!r} in {text!r}") from None
        return cls(name, **kw)


def all_theorem_ids():
    """Default theorem list used for ``criteria = "all"``."""
    out = []
    for name in THEOREMS:
        if name == "T2_10":
            out.extend(CriterionId(name, rho=r) for r in (PI1_POW_ALPHA, PI1, ONE))
        elif name == "T2_12":
            out.extend(CriterionId(name, rho=r) for r in (PI1_POW_ALPHA, PI1, ONE))
        else:
            out.append(CriterionId(name))
    return out
