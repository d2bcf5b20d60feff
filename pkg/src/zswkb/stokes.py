"""Stokes lines: level curves Re integral sqrt(A_eps^2 - lambda^2) dz = 0 from turning points.

Curves are traced in arc length with fixed-step RK4 on the unit tangent field
i*sigma*|s|/s, s = sqrt(A_eps^2 - lambda^2). The running phase integral is
accumulated with per-step Gauss panels and a transverse Newton projection every
few steps pins the trace back onto the level set, so drift cannot build up.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateTurningPoint, OutOfStrip, StepFailure
from .potential import eval_potential
from .problem import Problem
from .turning import find_turning_points

_STEP = 1e-3
_FIRST_HOP = 1e-2
_MAX_ARC = 20.0
_NEAR_TP = 1e-3
_PROJECT_EVERY = 10
# for entire potentials |sqrt(f)| grows super-exponentially up the strip; past
# this wall the level condition Re integral = 0 drowns in roundoff and panel
# truncation, so the numerically valid strip ends here
_SQRT_MAGNITUDE_WALL = 1e6

# Gauss-Legendre panels for the running phase integral
_GL3_NODES = (-np.sqrt(3 / 5), 0.0, np.sqrt(3 / 5))
_GL3_WEIGHTS = (5 / 9, 8 / 9, 5 / 9)
_GL16 = np.polynomial.legendre.leggauss(16)


class Termination(Enum):
    STRIP_BOUNDARY = "strip-boundary"
    MAX_LENGTH = "max-length"
    NEAR_TURNING_POINT = "near-turning-point"
    STEP_FAILURE = "step-failure"


@dataclass
class StokesCurve:
    origin_index: int
    initial_angle: float
    points: np.ndarray
    termination: Termination


@dataclass
class StokesGraph:
    turning_points: list
    curves: list


def _f_and_slope(problem: Problem, z: complex) -> tuple:
    a, da = eval_potential(problem.potential, z, problem.eps)
    a, da = complex(a), complex(da)
    return a * a, 2.0 * a * da


def stokes_directions(problem: Problem, lam: complex, tp: complex) -> tuple:
    """The three emanation angles at a simple turning point, sorted in [0, 2*pi).

    Locally f(z) ~ f'(tp)(z - tp) and the Stokes condition makes
    sqrt(f'(tp)) (z - tp)^{3/2} purely imaginary, which fixes three directions
    2*pi/3 apart.
    """
    lam = complex(lam)
    _, fp = _f_and_slope(problem, tp)
    if abs(fp) <= 1e-8:
        raise DegenerateTurningPoint(f"|d/dz (A_eps^2 - lam^2)| = {abs(fp):.2e} at {tp}")
    base = (np.pi - cmath.phase(fp)) / 3.0
    angles = sorted(((base + 2.0 * np.pi * j / 3.0) % (2.0 * np.pi)) for j in range(3))
    return tuple(angles)


def _sqrt_near(problem: Problem, lam: complex, z: complex, ref: complex) -> complex:
    """Branch of sqrt(A_eps(z)^2 - lambda^2) continued to stay near ``ref``."""
    f, _ = _f_and_slope(problem, z)
    s = cmath.sqrt(f - lam * lam)
    if (s * ref.conjugate()).real < 0.0:
        s = -s
    return s


def _hop_phase(problem: Problem, lam: complex, tp: complex, z1: complex,
               fp: complex) -> tuple:
    """Phase integral over the first hop tp -> z1 with the sqrt endpoint resolved.

    Substituting z = tp + (z1 - tp)*u^2 makes the integrand smooth; the branch
    at each node follows the local model sqrt(f'(tp)(z1 - tp))*u.
    """
    dz = z1 - tp
    c_model = cmath.sqrt(fp * dz)
    nodes, weights = _GL16
    u = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    total = 0.0 + 0.0j
    s_last = c_model
    for ui, wi in zip(u, w):
        zi = tp + dz * ui * ui
        si = _sqrt_near(problem, lam, zi, c_model * ui if ui > 0 else c_model)
        total += wi * si * 2.0 * dz * ui
        s_last = si
    return total, s_last


def _panel_phase(problem: Problem, lam: complex, z0: complex, z1: complex,
                 ref: complex) -> complex:
    """Gauss panel of sqrt(f) dz along the chord z0 -> z1 (path independent)."""
    dz = z1 - z0
    total = 0.0 + 0.0j
    for xi, wi in zip(_GL3_NODES, _GL3_WEIGHTS):
        zi = z0 + 0.5 * (xi + 1.0) * dz
        total += 0.5 * wi * _sqrt_near(problem, lam, zi, ref) * dz
    return total


def trace_stokes_line(problem: Problem, lam: complex, tp: complex, angle: float,
                      origin_index: int = 0, other_tps=()) -> StokesCurve:
    """Trace one Stokes line from ``tp`` in the requested emanation direction."""
    lam = complex(lam)
    strip = problem.potential.strip_half_width
    _, fp = _f_and_slope(problem, tp)
    if abs(fp) <= 1e-8:
        raise DegenerateTurningPoint(f"turning point at {tp} is not simple")

    z = tp + _FIRST_HOP * cmath.exp(1j * angle)
    if abs(z.imag) >= strip:
        raise StepFailure("first hop already leaves the strip")
    phase_acc, s = _hop_phase(problem, lam, tp, z, fp)
    s = _sqrt_near(problem, lam, z, s)

    # the straight hop leaves the (curved) level set by O(hop^{5/2}); project
    # transversally right away so the drift never enters the march
    dz = -phase_acc.real / s
    z = z + dz
    phase_acc += s * dz
    s = _sqrt_near(problem, lam, z, s)

    # orientation: unit tangent i*sigma*|s|/s must match the requested angle
    tangent = 1j * abs(s) / s
    sigma = 1.0 if (tangent * cmath.exp(-1j * angle)).real > 0.0 else -1.0

    points = [tp, z]
    arc = _FIRST_HOP
    termination = Termination.MAX_LENGTH
    steps_since_projection = 0

    def field(zz: complex, ref: complex) -> complex:
        ss = _sqrt_near(problem, lam, zz, ref)
        return 1j * sigma * abs(ss) / ss

    while arc < _MAX_ARC:
        try:
            k1 = field(z, s)
            k2 = field(z + 0.5 * _STEP * k1, s)
            k3 = field(z + 0.5 * _STEP * k2, s)
            k4 = field(z + _STEP * k3, s)
        except OutOfStrip:
            termination = Termination.STRIP_BOUNDARY
            break
        z_new = z + (_STEP / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not (np.isfinite(z_new.real) and np.isfinite(z_new.imag)):
            termination = Termination.STEP_FAILURE
            break
        if abs(z_new.imag) >= strip:
            termination = Termination.STRIP_BOUNDARY
            break
        try:
            s_new = _sqrt_near(problem, lam, z_new, s)
            phase_acc += _panel_phase(problem, lam, z, z_new, s)
        except OutOfStrip:
            termination = Termination.STRIP_BOUNDARY
            break
        if abs(s_new) < 1e-12:
            termination = Termination.STEP_FAILURE
            break
        if abs(s_new) > _SQRT_MAGNITUDE_WALL:
            termination = Termination.STRIP_BOUNDARY
            break
        z, s = z_new, s_new
        arc += _STEP
        steps_since_projection += 1
        if steps_since_projection >= _PROJECT_EVERY:
            steps_since_projection = 0
            drift = phase_acc.real
            dz = -drift / s
            if abs(dz) > _STEP:
                termination = Termination.STEP_FAILURE
                break
            z = z + dz
            phase_acc += s * dz
            s = _sqrt_near(problem, lam, z, s)
        points.append(z)
        near = [t for t in other_tps if abs(z - t) < _NEAR_TP]
        if near or (arc > 5 * _FIRST_HOP and abs(z - tp) < _NEAR_TP):
            termination = Termination.NEAR_TURNING_POINT
            break
    return StokesCurve(origin_index, float(angle), np.asarray(points, dtype=complex),
                       termination)


def level_drift(problem: Problem, lam: complex, curve: StokesCurve) -> float:
    """Max |Re phase| accumulated from the origin along the polyline vertices."""
    lam = complex(lam)
    pts = curve.points
    tp = complex(pts[0])
    _, fp = _f_and_slope(problem, tp)
    acc, s = _hop_phase(problem, lam, tp, complex(pts[1]), fp)
    worst = abs(acc.real)
    for z0, z1 in zip(pts[1:-1], pts[2:]):
        acc += _panel_phase(problem, lam, complex(z0), complex(z1), s)
        s = _sqrt_near(problem, lam, complex(z1), s)
        worst = max(worst, abs(acc.real))
    return worst


def build_graph(problem: Problem, lam: complex) -> StokesGraph:
    """All six Stokes lines (three per turning point) for one spectral parameter."""
    pair = find_turning_points(problem, lam)
    tps = [pair.alpha, pair.beta]
    curves = []
    for idx, tp in enumerate(tps):
        others = [t for j, t in enumerate(tps) if j != idx]
        for angle in stokes_directions(problem, lam, tp):
            curves.append(trace_stokes_line(problem, lam, tp, angle,
                                            origin_index=idx, other_tps=others))
    return StokesGraph(tps, curves)


def graph_to_json(graph: StokesGraph) -> dict:
    return {
        "turning_points": [[z.real, z.imag] for z in graph.turning_points],
        "curves": [
            {
                "origin": c.origin_index,
                "angle": c.initial_angle,
                "points": [[z.real, z.imag] for z in c.points],
                "termination": c.termination.value,
            }
            for c in graph.curves
        ],
    }


def graph_from_json(obj: dict) -> StokesGraph:
    tps = [complex(re, im) for re, im in obj["turning_points"]]
    curves = [
        StokesCurve(c["origin"], float(c["angle"]),
                    np.asarray([complex(re, im) for re, im in c["points"]]),
                    Termination(c["termination"]))
        for c in obj["curves"]
    ]
    return StokesGraph(tps, curves)
