"""Adaptive quadrature over heavy-tailed ranges.

Thin wrapper over QUADPACK (``scipy.integrate.quad``) that splits the range at
caller-supplied breakpoints, so a long interval with the mass concentrated near
its left end is not under-resolved.
"""

import math
import warnings

import numpy as np
from scipy import integrate

ABS_TOL = 1e-10
REL_TOL = 1e-12


def integrate_segments(func, points, *, epsabs=ABS_TOL, epsrel=REL_TOL, limit=200):
    """Integrate ``func`` over consecutive intervals of ``points``.

    ``points`` must be nondecreasing; the last entry may be ``inf``.
    Returns the sum of the pieces.
    """
    total = 0.0
    pts = [float(x) for x in points]
    for a, b in zip(pts[:-1], pts[1:]):
        if b <= a:
            continue
        if math.isinf(b):
            if a <= 0:
                raise ValueError("an infinite piece needs a positive left end")
            # x = a/y turns a power-law tail into an algebraic endpoint
            # singularity, which QUADPACK resolves far better than its own
            # infinite-range transform.
            piece, lo, hi = (lambda y: func(a / y) * a / (y * y)), 0.0, 1.0
        else:
            piece, lo, hi = func, a, b
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            value, _ = integrate.quad(piece, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)
        total += value
    return total


def breakpoints(marginal, lower, upper):
    """Breakpoints for integrating against ``marginal`` on [lower, upper].

    Interior points sit at survival levels 1/2, 1e-1, ..., 1e-12; a finite
    upper end is further split so that no piece spans more than two decades.
    """
    inner = []
    for level in (0.5, 1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12):
        x = float(marginal.isf(level))
        if lower < x < upper:
            inner.append(x)
    pts = [lower, *sorted(inner)]
    if not math.isinf(upper):
        last = pts[-1]
        while last > 0 and upper / last > 100.0:
            last *= 100.0
            pts.append(last)
    pts.append(upper)
    return pts
