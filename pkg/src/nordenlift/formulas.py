"""Closed forms relating the twelve coefficients.

Each function takes a namespace ``v`` carrying the coefficient values
``a1 .. d3``, the needed first derivatives as ``a1p, a3p, c1p, ...``, the
curvature ``c`` and the energy density ``t``.  Arithmetic is duck typed, so
the same formula runs on floats, :class:`~nordenlift.scalarfn.Jet` objects
(inside ODE right-hand sides) and :class:`~nordenlift.scalarfn.ScalarFn`
graphs (to build derived coefficients).
"""

from __future__ import annotations

from types import SimpleNamespace


def namespace(**kw) -> SimpleNamespace:
    return SimpleNamespace(**kw)


# almost-complex integrability -------------------------------------------

def integrable_denominator(v):
    return v.a1 - 2 * v.t * v.a1p - 2 * v.c * v.t * v.a2 - 4 * v.c * v.t * v.t * v.a2p


def integrable_b(v):
    """(b1, b2, b3) making J integrable over a space form of curvature c."""
    c, t = v.c, v.t
    den = integrable_denominator(v)
    b1 = (2 * c * c * t * v.a2 * v.a2 + 2 * c * t * v.a1 * v.a2p + v.a1 * v.a1p - c
          + 3 * c * v.a3 * v.a3) / den
    b2 = (2 * t * v.a3p * v.a3p - 2 * t * v.a1p * v.a2p + c * v.a2 * v.a2
          + 2 * c * t * v.a2 * v.a2p + v.a1 * v.a2p) / den
    b3 = (v.a1 * v.a3p + 2 * c * v.a2 * v.a3 + 4 * c * t * v.a2p * v.a3
          - 2 * c * t * v.a2 * v.a3p) / den
    return b1, b2, b3


def conformal_proof_b(v):
    """Alternative (b1, b3) from the conformal identity.  b3 differs from integrable_b when a3 != 0."""
    c, t, a1, a3 = v.c, v.t, v.a1, v.a3
    s = 1 + a3 * a3
    den = (a1 - 2 * v.a1p * t) * (a1 * a1 - 2 * c * t * s) - 8 * a1 * a3 * v.a3p * c * t * t
    b3 = (a1 * v.a3p * (a1 * a1 - 2 * c * t * (1 + 3 * a3 * a3))
          + 2 * a3 * c * (a1 - 2 * v.a1p * t) * s) / den
    b1 = (a1 * v.a1p * (a1 * a1 - 2 * c * t * s) - a1 * a1 * c * (1 - a3 * (3 * a3 + 4 * v.a3p * t))
          + 2 * c * c * t * s * s) / den
    return b1, b3


# anti-Kaehler ------------------------------------------------------------

def ak_denominator(v):
    """a1^4 + 4 a1^2 (a3^2 - 1) c t + 4 (1 + a3^2)^2 c^2 t^2."""
    a1, a3, c, t = v.a1, v.a3, v.c, v.t
    s = 1 + a3 * a3
    return a1 ** 4 + 4 * a1 * a1 * (a3 * a3 - 1) * c * t + 4 * s * s * c * c * t * t


def ak_d1(v):
    return v.c * v.c2


def ak_d3(v):
    return (v.a3p * v.c1 - v.a1p * v.c3) / v.a1


def ak_c1p(v):
    a1, a1p, a3, a3p, c1, c3, c, t = v.a1, v.a1p, v.a3, v.a3p, v.c1, v.c3, v.c, v.t
    s = 1 + a3 * a3
    D4 = ak_denominator(v)
    D5 = a1 * D4
    first = -2 * c * a1 * a1 * (2 * c3 * (a1 * (a3 + a3p * t) - 2 * a1p * a3 * t) - c1 * s) / D4
    second = -2 * c * s * (c * c1 * t * (2 * a1 * (s + 4 * a3 * a3p * t) - 4 * a1p * s * t)
                           + 2 * a1 * a1 * t * (a1p * c1 - 2 * a3p * c * c3 * t)) / D5
    return first + second


def ak_c3p(v):
    a1, a1p, a3, a3p, c1, c3, c, t = v.a1, v.a1p, v.a3, v.a3p, v.c1, v.c3, v.c, v.t
    s = 1 + a3 * a3
    D4 = ak_denominator(v)
    D5 = a1 * D4
    first = 2 * c * a1 * (c3 * (a1 + a3 * (4 * t * (a1p * a3 - a1 * a3p) - 3 * a1 * a3))
                          + 2 * a3 * c1 * (s + 2 * a3 * a3p * t)) / D4
    second = ((a3p * c1 - a1p * c3) * (a1 ** 4 - 4 * s * s * c * c * t * t)
              - 4 * a1 * s * c * (2 * a1p * a3 * c1 + s * c * c3) * t) / D5
    return first + second


def diagonal_ak_c1p(v):
    """c1' for the diagonal anti-Kaehler case (a3 = c3 = 0)."""
    return 2 * v.c * v.c1 * (v.a1 - 2 * v.a1p * v.t) / (v.a1 * (v.a1 * v.a1 - 2 * v.c * v.t))


# conformally anti-Kaehler -----------------------------------------------

def conformal_d1(v):
    return v.c * (2 * v.a1 * v.a3 * v.c3 - v.c1 * (1 + v.a3 * v.a3)) / (v.a1 * v.a1)


def conformal_d3(v):
    return (v.a3p * v.c1 - v.a1p * v.c3) / v.a1


# quasi-anti-Kaehler ------------------------------------------------------

def quasi_c1p(v):
    return -2 * (v.a1 * v.d1 + 2 * v.b3 * v.c * v.c3 * v.t) / (v.a1 + 2 * v.b1 * v.t)


def quasi_d1p(v):
    return 2 * (v.b3 * v.c * v.c3 - v.b1 * v.d1) / (v.a1 + 2 * v.b1 * v.t)


def _q(v):
    """[c1 (1 + a3^2) - a1 a3 c3] (a1 + 2 b1 t)."""
    return (v.c1 * (1 + v.a3 * v.a3) - v.a1 * v.a3 * v.c3) * (v.a1 + 2 * v.b1 * v.t)


def _r(v):
    """[(1 + a3^2) c1^2 - a1 c3 (2 a3 c1 + a1 c3)] (a1 + 2 b1 t)."""
    return (((1 + v.a3 * v.a3) * v.c1 * v.c1 - v.a1 * v.c3 * (2 * v.a3 * v.c1 + v.a1 * v.c3))
            * (v.a1 + 2 * v.b1 * v.t))


def quasi_c3p(v):
    a1, a3, b1, b3, c1, c3, d1, c, t = v.a1, v.a3, v.b1, v.b3, v.c1, v.c3, v.d1, v.c, v.t
    w = a1 + 2 * b1 * t
    return (2 * (1 + a3 * a3) * b3 * c * c1 * t / (a1 * a1 * w)
            + (a1 * (b3 * c1 - b1 * c3 - 2 * a3 * d1) + c * c3 * (1 + a3 * a3 - 4 * a3 * b3 * t)) / (a1 * w))


def quasi_a3p(v):
    a1, a3, b1, b3, c1, c3, d1, d3, c, t = v.a1, v.a3, v.b1, v.b3, v.c1, v.c3, v.d1, v.d3, v.c, v.t
    s = 1 + a3 * a3
    R = _r(v)
    return (-a1 * s * (b3 * (c1 * c1 + 2 * c * c3 * c3 * t + 4 * c1 * d1 * t)
                       + 2 * c1 * (a3 * d1 - b1 * (c3 + 2 * d3 * t))) / R
            + 2 * a1 * a1 * (c1 * d3 - c3 * d1 + a3 * a3 * (c3 * d1 + c1 * d3)
                             - a3 * c3 * (b1 * (c3 + 2 * d3 * t) - 2 * b3 * d1 * t)) / R
            + (a1 ** 4 * c3 * (b3 * c3 - 2 * a3 * d3)
               - 2 * s * b3 * c * c1 * t * (c1 * s + 2 * a1 * a3 * c3)) / (a1 * R))


def quasi_a1p(v):
    """Needs ``v.a3p`` and ``v.c3p`` (use the quasi values when integrating)."""
    a1, a3, a3p, b1, b3, c1, c3, c3p, d1, c, t = (v.a1, v.a3, v.a3p, v.b1, v.b3, v.c1, v.c3,
                                                   v.c3p, v.d1, v.c, v.t)
    s = 1 + a3 * a3
    Q = _q(v)
    return (a1 * (b1 * c1 * (s + 2 * a3 * a3p * t) + 2 * s * c * c3 * (a3 - b3 * t)) / Q
            - (s * s * c * c1 + a1 ** 3 * ((a3p - b3) * c3 + a3 * c3p)) / Q
            - a1 * a1 * (2 * d1 + a3 * (2 * b1 * c3 + 2 * a3 * d1 - a3p * c1)
                         + 2 * b1 * (a3p * c3 + a3 * c3p) * t) / Q)


# semi-anti-Kaehler, special complex, w1+w3 -------------------------------

def semi_denominator(v):
    """a1 c3 (a3 + 2 b3 t) - c1 (1 + a3^2 + 2 a3 b3 t)."""
    return v.a1 * v.c3 * (v.a3 + 2 * v.b3 * v.t) - v.c1 * (1 + v.a3 * v.a3 + 2 * v.a3 * v.b3 * v.t)


def semi_c3p(v):
    a1, a1p, a3, a3p, b3, c1, c1p, c3, t = v.a1, v.a1p, v.a3, v.a3p, v.b3, v.c1, v.c1p, v.c3, v.t
    s = 1 + a3 * a3
    S = semi_denominator(v)
    first = (2 * a1p * s * b3 * c1 * c1 * t
             - a1 * a1 * c3 * (c1p * (1 - a3 * a3) - 2 * a3p * b3 * c1 * t
                               + a3 * (a3p * c1 + a1p * c3 - 2 * b3 * (c1 + c1p * t))
                               - a1 * c3 * (a3p - b3))) / (a1 * a1 * S)
    second = -(c1 / a1) * (s * (b3 * c1 + a3 * c1p - a1p * c3)
                           + 2 * b3 * (c1p + a3 * (a3p * c1 + a3 * c1p + a1p * c3)) * t) / S
    return first + second


def ricci_flat_a1p(v):
    a1, a3, a3p, b1, b3, c1, c1p, c3, t = v.a1, v.a3, v.a3p, v.b1, v.b3, v.c1, v.c1p, v.c3, v.t
    Q = _q(v)
    return (a1 * a1 * (a3 * (c1 * (a3p - b3) - b1 * c3) + c1p - 2 * a3p * b1 * c3 * t + c3 * (b3 - a3p)) / Q
            + b1 * (2 * c1p * t + c1 * (1 + a3 * a3 + 2 * a3 * a3p * t)) / Q)


def special_c1p(v, first_sign=1.0):
    """c1' condition; ``first_sign=-1`` flips the first fraction, which recovers the anti-Kaehler c1'."""
    a1, a1p, a3, a3p, c1, c3, c, t = v.a1, v.a1p, v.a3, v.a3p, v.c1, v.c3, v.c, v.t
    s = 1 + a3 * a3
    D4 = ak_denominator(v)
    D5 = a1 * D4
    first = 2 * c * (a1 ** 3 * (2 * a1 * c3 * (a3 + a3p * t) - c1 * s - 4 * a1p * a3 * c3 * t)
                     - 4 * a1p * s * s * c * c1 * t * t) / D5
    second = -4 * c * t * s * (c * c1 * (s + 4 * a3 * a3p * t) + a1 * (a1p * c1 - 2 * a3p * c * c3 * t)) / D4
    return first_sign * first + second


def w13_a1p(v):
    a1, a3, a3p, b1, b3, c1, c3, d1, c, t = v.a1, v.a3, v.a3p, v.b1, v.b3, v.c1, v.c3, v.d1, v.c, v.t
    s = 1 + a3 * a3
    Q = _q(v)
    return ((a1 ** 3 * (b3 - a3p) * c3 - s * c * c1 * (s + 2 * a3 * b3 * t)) / Q
            + a1 * a1 * (a3 * (c1 * (a3p - b3) - b1 * c3) - 2 * (d1 + a3p * b1 * c3 * t)) / Q
            + a1 * (b1 * c1 * (s + 2 * a3 * a3p * t)
                    + c * c3 * (a3 * s - 2 * b3 * t * (1 - a3 * a3))) / Q)


def w13_a3p(v):
    a1, a3, b1, b3, c1, c3, d1, d3, c, t = v.a1, v.a3, v.b1, v.b3, v.c1, v.c3, v.d1, v.d3, v.c, v.t
    s = 1 + a3 * a3
    aR = a1 * _r(v)
    return ((a1 ** 4 * c3 * (b3 * c3 - 2 * a3 * d3)
             - 2 * s * b3 * c * c1 * t * (s * c1 + 4 * a1 * a3 * c3)) / aR
            - a1 * a1 * s * (b3 * (c1 * c1 + 2 * c * c3 * c3 * t + 4 * c1 * d1 * t)
                             + 2 * c1 * (a3 * d1 - b1 * (c3 + 2 * d3 * t))) / aR
            + 2 * a1 ** 3 * (c1 * d3 - c3 * d1 + a3 * a3 * (c3 * d1 + c1 * d3)
                             - a3 * c3 * (b1 * (c3 + 2 * d3 * t) - 2 * b3 * d1 * t)) / aR)
