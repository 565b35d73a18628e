"""Airy function Ai and its derivative for real arguments.

Maclaurin series for ``x < 5``, the exponentially-decaying asymptotic
expansion (optimally truncated) for ``x >= 5``.  Accuracy is best far to the
right, which is where the Painleve boundary condition is imposed: roughly
1e-15 relative at ``x = 8``, 2e-8 at ``x = 5``.
"""

from __future__ import annotations

import math

AI0 = 0.355028053887817239260  # Ai(0)
AIP0 = -0.258819403792806798405  # Ai'(0)

_SWITCH = 5.0


def _series(x: float) -> tuple[float, float]:
    # Ai = Ai(0) f - |Ai'(0)| g, with f, g the two power-series solutions of y'' = x y
    f = df = 0.0
    g = dg = 0.0
    tf, tg = 1.0, x  # current terms x^{3k}/..., x^{3k+1}/...
    k = 0
    x3 = x**3
    while True:
        f += tf
        g += tg
        if k > 0:
            df += 3 * k * tf / x if x != 0 else 0.0
        dg += (3 * k + 1) * tg / x if x != 0 else (1.0 if k == 0 else 0.0)
        tf_next = tf * x3 / ((3 * k + 2) * (3 * k + 3))
        tg_next = tg * x3 / ((3 * k + 3) * (3 * k + 4))
        k += 1
        if abs(tf_next) + abs(tg_next) < 1e-18 * (abs(f) + abs(g)) and k > 3:
            break
        tf, tg = tf_next, tg_next
        if k > 500:
            break
    return AI0 * f + AIP0 * g, AI0 * df + AIP0 * dg


def _asymptotic(x: float) -> tuple[float, float]:
    zeta = 2.0 / 3.0 * x**1.5
    # u_k = (2k+1)(2k+3)...(6k-1) / (216^k k!),  v_k = -(6k+1)/(6k-1) u_k
    su = sv = 1.0
    u = 1.0
    prev = math.inf
    k = 1
    while k < 200:
        u = u * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        v = -(6 * k + 1) / (6 * k - 1) * u
        term = u / zeta**k
        if term >= prev:  # series starts to diverge
            break
        sign = -1.0 if k % 2 else 1.0
        su += sign * term
        sv += sign * v / zeta**k
        prev = term
        if term < 1e-17:
            break
        k += 1
    pref = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    return pref * su / x**0.25, -pref * sv * x**0.25


def airy_ai(x: float) -> tuple[float, float]:
    """Return ``(Ai(x), Ai'(x))``."""
    x = float(x)
    if x >= _SWITCH:
        return _asymptotic(x)
    return _series(x)
