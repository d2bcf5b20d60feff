"""Analytic potential families A(x), B(x) and the blended profile A(x) + i*eps*B(x).

All built-in profiles are entire or strip-analytic closed forms, so values and
derivatives at complex points come from formulas, never from numerical
differentiation.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import A1Violated, OutOfStrip

WELL_EVEN = "well-even"
MONOTONE_ODD = "monotone-odd"
CUSTOM = "custom-sum-of-terms"

# custom-family term encoding: flat (target, kind, coeff, scale) quadruples
TARGET_A, TARGET_B = 0, 1
TERM_CONST, TERM_TANH, TERM_GAUSS, TERM_XGAUSS = 0, 1, 2, 3
_TERM_NAMES = {"const": TERM_CONST, "tanh": TERM_TANH,
               "gauss": TERM_GAUSS, "xgauss": TERM_XGAUSS}


class SymmetryClass(Enum):
    A_EVEN_B_ODD = "A-even-B-odd"
    A_ODD_B_EVEN = "A-odd-B-even"
    NONE = "none"


class WellType(Enum):
    SIMPLE_WELL = "simple-well"
    MONOTONIC = "monotonic"


@dataclass(frozen=True)
class PotentialSpec:
    """Closed-form potential pair (A, B) with its strip of analyticity."""

    family: str
    params: tuple
    strip_half_width: float

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.family not in (WELL_EVEN, MONOTONE_ODD, CUSTOM):
            raise ValueError(f"unknown potential family {self.family!r}")
        if not self.strip_half_width > 0:
            raise ValueError("strip_half_width must be positive")
        if self.family == WELL_EVEN:
            a, b = self.params
            if not (a > b > 0):
                raise ValueError("well-even requires params (a, b) with a > b > 0")
        elif self.family == MONOTONE_ODD:
            (a,) = self.params
            if not a > 0:
                raise ValueError("monotone-odd requires a positive slope parameter")
        else:
            if len(self.params) % 4 != 0:
                raise ValueError("custom params must be flat (target, kind, coeff, scale) quadruples")
            for t, k, _, s in zip(*[iter(self.params)] * 4):
                if int(t) not in (TARGET_A, TARGET_B) or int(k) not in (0, 1, 2, 3):
                    raise ValueError("bad custom term codes")
                if int(k) != TERM_CONST and not s > 0:
                    raise ValueError("custom term scale must be positive")
                # tanh(s*z) has poles at Im z = pi/(2s); the strip must stop short
                if int(k) == TERM_TANH and self.strip_half_width >= np.pi / (2 * s):
                    raise ValueError(
                        f"strip_half_width {self.strip_half_width} reaches the "
                        f"tanh pole at {np.pi / (2 * s):.4f}")


def well_even(a: float = 2.0, b: float = 1.0, strip_half_width: float = 10.0) -> PotentialSpec:
    """A(x) = a - b*exp(-x^2) with odd partner B(x) = x*exp(-x^2)."""
    return PotentialSpec(WELL_EVEN, (a, b), strip_half_width)


def monotone_odd(a: float = 2.0, strip_half_width: float = 0.5) -> PotentialSpec:
    """A(x) = a*tanh(x) with even partner B(x) = exp(-x^2).

    The default strip stops short of the tanh poles at +/- i*pi/2.
    """
    return PotentialSpec(MONOTONE_ODD, (a,), strip_half_width)


def custom(a_terms, b_terms, strip_half_width: float | None = None) -> PotentialSpec:
    """Build a custom-sum-of-terms spec from ("const"|"tanh"|"gauss"|"xgauss", coeff[, scale]) tuples."""
    flat = []
    max_tanh_scale = 0.0
    for target, terms in ((TARGET_A, a_terms), (TARGET_B, b_terms)):
        for term in terms:
            kind = _TERM_NAMES[term[0]]
            coeff = float(term[1])
            scale = float(term[2]) if len(term) > 2 else 1.0
            if kind == TERM_TANH:
                max_tanh_scale = max(max_tanh_scale, scale)
            flat.extend((target, kind, coeff, scale))
    if strip_half_width is None:
        if max_tanh_scale > 0.0:
            strip_half_width = min(0.5, 0.9 * np.pi / (2 * max_tanh_scale))
        else:
            strip_half_width = 10.0
    return PotentialSpec(CUSTOM, tuple(flat), strip_half_width)


def spec_to_json(spec: PotentialSpec) -> dict:
    return {"family": spec.family, "params": list(spec.params),
            "strip_half_width": spec.strip_half_width}


def spec_from_json(obj: dict) -> PotentialSpec:
    return PotentialSpec(obj["family"], tuple(obj["params"]), float(obj["strip_half_width"]))


def _term_eval(kind: int, coeff: float, scale: float, z):
    if kind == TERM_CONST:
        return coeff * np.ones_like(z), np.zeros_like(z)
    if kind == TERM_TANH:
        t = np.tanh(scale * z)
        return coeff * t, coeff * scale * (1.0 - t * t)
    if kind == TERM_GAUSS:
        e = np.exp(-scale * z * z)
        return coeff * e, -2.0 * coeff * scale * z * e
    # TERM_XGAUSS
    e = np.exp(-scale * z * z)
    return coeff * z * e, coeff * (1.0 - 2.0 * scale * z * z) * e


def eval_A(spec: PotentialSpec, z):
    """Return (A(z), A'(z)); z may be a scalar or ndarray, real or complex."""
    z = np.asarray(z, dtype=complex)
    if spec.family == WELL_EVEN:
        a, b = spec.params
        e = np.exp(-z * z)
        return a - b * e, 2.0 * b * z * e
    if spec.family == MONOTONE_ODD:
        (a,) = spec.params
        t = np.tanh(z)
        return a * t, a * (1.0 - t * t)
    val = np.zeros_like(z)
    dval = np.zeros_like(z)
    for t, k, c, s in zip(*[iter(spec.params)] * 4):
        if int(t) == TARGET_A:
            v, d = _term_eval(int(k), c, s, z)
            val = val + v
            dval = dval + d
    return val, dval


def eval_B(spec: PotentialSpec, z):
    """Return (B(z), B'(z))."""
    z = np.asarray(z, dtype=complex)
    if spec.family == WELL_EVEN:
        e = np.exp(-z * z)
        return z * e, (1.0 - 2.0 * z * z) * e
    if spec.family == MONOTONE_ODD:
        e = np.exp(-z * z)
        return e, -2.0 * z * e
    val = np.zeros_like(z)
    dval = np.zeros_like(z)
    for t, k, c, s in zip(*[iter(spec.params)] * 4):
        if int(t) == TARGET_B:
            v, d = _term_eval(int(k), c, s, z)
            val = val + v
            dval = dval + d
    return val, dval


def eval_potential(spec: PotentialSpec, z, eps: float):
    """Evaluate A_eps(z) = A(z) + i*eps*B(z) and its z-derivative from closed forms."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    zz = np.asarray(z, dtype=complex)
    if np.any(np.abs(zz.imag) >= spec.strip_half_width):
        raise OutOfStrip(f"|Im z| >= {spec.strip_half_width}")
    a, da = eval_A(spec, zz)
    if eps == 0.0:
        return a, da
    b, db = eval_B(spec, zz)
    return a + 1j * eps * b, da + 1j * eps * db


def axis_blend_callable(spec: PotentialSpec, eps: float):
    """Fast scalar A_eps(x) for real x, for use in integrator inner loops.

    Returns a plain-Python closure over math calls; equals eval_potential on
    the real axis to roundoff.
    """
    import math

    if spec.family == WELL_EVEN:
        a, b = spec.params

        def blend(x: float) -> complex:
            e = math.exp(-x * x)
            return complex(a - b * e, eps * x * e)

        return blend
    if spec.family == MONOTONE_ODD:
        (a,) = spec.params

        def blend(x: float) -> complex:
            return complex(a * math.tanh(x), eps * math.exp(-x * x))

        return blend
    terms = list(zip(*[iter(spec.params)] * 4))

    def blend(x: float) -> complex:
        re = 0.0
        im = 0.0
        for t, k, c, s in terms:
            k = int(k)
            if k == TERM_CONST:
                v = c
            elif k == TERM_TANH:
                v = c * math.tanh(s * x)
            elif k == TERM_GAUSS:
                v = c * math.exp(-s * x * x)
            else:
                v = c * x * math.exp(-s * x * x)
            if int(t) == TARGET_A:
                re += v
            else:
                im += v
        return complex(re, eps * im)

    return blend


def classify_symmetry(spec: PotentialSpec, half_width: float = 8.0,
                      rel_tol: float = 1e-12, n: int = 101) -> SymmetryClass:
    """Detect the parity pairing of (A, B) on a fixed symmetric sample grid."""
    x = np.linspace(-half_width, half_width, n)
    a_p, _ = eval_A(spec, x)
    a_m, _ = eval_A(spec, -x)
    b_p, _ = eval_B(spec, x)
    b_m, _ = eval_B(spec, -x)
    a_p, a_m, b_p, b_m = a_p.real, a_m.real, b_p.real, b_m.real
    scale = max(1.0, np.max(np.abs(a_p)), np.max(np.abs(b_p)))
    tol = rel_tol * scale
    a_even = np.max(np.abs(a_p - a_m)) < tol
    a_odd = np.max(np.abs(a_p + a_m)) < tol
    b_even = np.max(np.abs(b_p - b_m)) < tol
    b_odd = np.max(np.abs(b_p + b_m)) < tol
    if a_even and b_odd:
        return SymmetryClass.A_EVEN_B_ODD
    if a_odd and b_even:
        return SymmetryClass.A_ODD_B_EVEN
    return SymmetryClass.NONE


@dataclass(frozen=True)
class A1Report:
    """Verified simple-well data for (A, lambda0): |A| = lambda0 exactly at alpha0 < beta0."""

    alpha0: float
    beta0: float
    lambda0: float
    slopes: tuple
    well_type: WellType
    margin_at_infinity: float


def _bisect_root(f, lo, hi, iters: int = 80):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, abs(lo)):
            break
    return 0.5 * (lo + hi)


def validate_A1(spec: PotentialSpec, lambda0: float, cutoff: float,
                n_samples: int = 4001, slope_tol: float = 1e-8) -> A1Report:
    """Locate the two real crossings of |A(x)| = lambda0 in [-cutoff, cutoff].

    The decay condition at infinity is only checked through the margin at the
    cutoffs; finitely many samples cannot verify a liminf.
    """
    if not lambda0 > 0:
        raise ValueError("lambda0 must be positive")
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    x = np.linspace(-cutoff, cutoff, n_samples)
    a, _ = eval_A(spec, x)
    if np.max(np.abs(a.imag)) > 1e-12 * max(1.0, np.max(np.abs(a.real))):
        raise ValueError("A(x) is not real-valued on the real axis")
    a = a.real
    margin = min(abs(a[0]), abs(a[-1])) - lambda0
    if margin <= 0:
        raise A1Violated("no-margin-at-infinity",
                         f"|A| at +/-{cutoff} does not exceed lambda0={lambda0}")
    f = np.abs(a) - lambda0
    idx = np.where(f[:-1] * f[1:] < 0)[0]
    if len(idx) == 0:
        raise A1Violated("no-crossings", f"|A| never crosses lambda0={lambda0}")
    if len(idx) != 2:
        raise A1Violated("extra-crossings", f"found {len(idx)} crossings, need exactly 2")

    def fx(t):
        v, _ = eval_A(spec, t)
        return abs(v.real.item()) - lambda0

    alpha0 = _bisect_root(fx, x[idx[0]], x[idx[0] + 1])
    beta0 = _bisect_root(fx, x[idx[1]], x[idx[1] + 1])
    va, da = eval_A(spec, alpha0)
    vb, db = eval_A(spec, beta0)
    slopes = (da.real.item(), db.real.item())
    if min(abs(slopes[0]), abs(slopes[1])) <= slope_tol:
        raise A1Violated("zero-slope", f"|A'| at a crossing is below {slope_tol}")
    prod = va.real.item() * vb.real.item()
    well = WellType.SIMPLE_WELL if prod > 0 else WellType.MONOTONIC
    return A1Report(float(alpha0), float(beta0), float(lambda0), slopes, well, float(margin))
