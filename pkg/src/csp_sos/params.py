"""Parameter selection from the forbidden-subgraph probability bound.

The bound asks, for c = 2*SMALL constraints,

    20^K * Delta * (K c / n)^((lam - zeta)/2) <= beta / 50^K.

With the exponent written as p/r in lowest terms this is equivalent to
(K c / n)^p <= (beta / (1000^K Delta))^r, which we compare exactly in integers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .rational import Q, frac_str

__all__ = ["Params", "ParameterError", "weirdness_holds", "suggest_parameters",
           "epsilon", "general_zeta", "DEGREE_FRACTION"]

# D <= DEGREE_FRACTION * zeta * SMALL
DEGREE_FRACTION = Fraction(1, 3)


class ParameterError(ValueError):
    def __init__(self, msg, params=None):
        super().__init__(msg)
        self.params = params


@dataclass
class Params:
    tau: int
    zeta: Fraction
    small: int
    D: int
    K: int
    beta: Fraction | None = None
    epsilon: float | None = None
    gamma: Fraction | None = None
    gamma_exponent_constant: int | None = None
    degree_fraction: Fraction = DEGREE_FRACTION
    mode: str = "manual"
    meta: dict = field(default_factory=dict)

    @property
    def lam(self) -> int:
        return self.tau - 2

    @classmethod
    def manual(cls, tau: int, zeta, small: int, D: int = 1, K: int = 3, **kw) -> "Params":
        return cls(tau, Q(zeta), small, D, K, **kw)

    def violations(self, n: int | None = None) -> list:
        out = []
        if not 0 < self.zeta < 1:
            out.append("zeta must lie in (0,1)")
        if self.K > self.zeta * self.small:
            out.append(f"K={self.K} > zeta*SMALL={frac_str(self.zeta * self.small)}")
        if self.D > math.floor(self.degree_fraction * self.zeta * self.small):
            out.append(f"D={self.D} > floor(zeta*SMALL/3)")
        if self.small < 1:
            out.append("SMALL < 1")
        if n is not None and self.small > n / 2:
            out.append("SMALL > n/2")
        return out

    def to_json(self) -> dict:
        return {"tau": self.tau, "zeta": frac_str(self.zeta), "small": self.small,
                "D": self.D, "K": self.K, "lambda": self.lam,
                "beta": frac_str(self.beta) if self.beta is not None else None,
                "epsilon": self.epsilon,
                "gamma": frac_str(self.gamma) if self.gamma is not None else None,
                "degree_fraction": frac_str(self.degree_fraction), "mode": self.mode,
                **({"meta": self.meta} if self.meta else {})}

    @classmethod
    def from_json(cls, d) -> "Params":
        return cls(int(d["tau"]), Q(d["zeta"]), int(d["small"]), int(d.get("D", 1)),
                   int(d.get("K", 3)),
                   Q(d["beta"]) if d.get("beta") else None, d.get("epsilon"),
                   Q(d["gamma"]) if d.get("gamma") else None, None,
                   Q(d.get("degree_fraction", "1/3")), d.get("mode", "manual"))


def weirdness_holds(n, Delta, K: int, lam: int, zeta, beta, c) -> bool:
    """Exact test of 20^K Delta (K c/n)^((lam - zeta)/2) <= beta/50^K."""
    n, Delta, zeta, beta, c = (Q(x) for x in (n, Delta, zeta, beta, c))
    e = (lam - zeta) / 2
    if e <= 0:
        raise ValueError("need zeta < lambda")
    if c <= 0:
        return True
    base = K * c / n
    B = beta / (Fraction(1000) ** K * Delta)
    p, r = e.numerator, e.denominator
    return base ** p <= B ** r


def general_zeta(Delta, log_base: int = 2, denominator: int = 1000) -> Fraction:
    """1/log(Delta), rounded down to a fraction with the given denominator."""
    z = 1 / math.log(float(Q(Delta)), log_base)
    return Fraction(math.floor(z * denominator), denominator)


def epsilon(n, Delta) -> float:
    """2^(log n / (2 log Delta)) / sqrt(n); the ratio of logs is base-independent."""
    n, Delta = float(Q(n)), float(Q(Delta))
    return 2 ** (math.log(n) / (2 * math.log(Delta))) / math.sqrt(n)


def suggest_parameters(n: int, Delta, K: int, tau: int, beta, mode: str = "general",
                       strict: bool = True, log_base: int = 2) -> Params:
    """SMALL is the largest integer whose c = 2*SMALL satisfies the bound (capped at n/2)."""
    Delta, beta = Q(Delta), Q(beta)
    lam = tau - 2
    if lam < 1:
        raise ValueError("tau must be >= 3")
    if mode == "general":
        if Delta < 10:
            raise ValueError("general mode assumes Delta >= 10")
        zeta = general_zeta(Delta, log_base)
    elif mode in ("large-lambda", "large-λ"):
        zeta = Fraction(lam, 2)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if not 0 < zeta < lam:
        raise ValueError(f"zeta={zeta} outside (0, lambda)")
    lo, hi = 0, n // 2
    if weirdness_holds(n, Delta, K, lam, zeta, beta, 2 * hi):
        lo = hi
    else:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if weirdness_holds(n, Delta, K, lam, zeta, beta, 2 * mid):
                lo = mid
            else:
                hi = mid
    small = lo
    D = math.floor(DEGREE_FRACTION * zeta * small)
    p = Params(tau, zeta, small, D, K, beta, epsilon(n, Delta), mode=mode,
               meta={"n": n, "Delta": frac_str(Delta), "capped": small == n // 2,
                     "log_base": log_base})
    if strict and K > zeta * small:
        raise ParameterError(f"SMALL={small} < K/zeta={frac_str(K / zeta)}; "
                             "use a larger n or a smaller K", p)
    return p
