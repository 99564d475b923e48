"""Exact arithmetic for the Mobius group of the unit disk acting on the circle.

Group elements are stored as SU(1,1) lifts (a, b) with |a|^2 - |b|^2 = 1,
acting by z -> (a z + conj(b)) / (b z + conj(a)).  The lift is only defined
up to overall sign, so equality tests quotient by (a, b) ~ (-a, -b).

The one-parameter dilation subgroup fixing +1 and -1 is

    v_t(z) = (cosh(t/2) z - sinh(t/2)) / (-sinh(t/2) z + cosh(t/2)),

and the same closed formula with complex parameter tau (0 <= Im tau <= pi)
gives its strip complexification, for which v_{i pi}(z) = 1/z.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArc, PoleError, SingularPoint

SIGN_TOL = 1e-12


@dataclass(frozen=True)
class MobiusElement:
    """An element of the disk Mobius group, stored as an SU(1,1) lift."""

    a: complex
    b: complex

    def __post_init__(self):
        det = abs(self.a) ** 2 - abs(self.b) ** 2
        if abs(det - 1.0) > 1e-9:
            raise ValueError(f"(a, b) not an SU(1,1) lift: |a|^2-|b|^2 = {det}")

    @staticmethod
    def identity() -> "MobiusElement":
        return MobiusElement(1.0 + 0.0j, 0.0j)

    @staticmethod
    def rotation(theta: float) -> "MobiusElement":
        return MobiusElement(cmath.exp(0.5j * theta), 0.0j)

    def apply(self, z):
        """Evaluate the map at z (scalar or array); poles map to inf."""
        z = np.asarray(z, dtype=complex)
        num = self.a * z + np.conj(self.b)
        den = self.b * z + np.conj(self.a)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(den == 0, np.inf + 0j, num / den)
        if out.ndim == 0:
            return complex(out)
        return out

    def __call__(self, z):
        return self.apply(z)

    def compose(self, other: "MobiusElement") -> "MobiusElement":
        """Return self o other (self applied after other)."""
        a = self.a * other.a + np.conj(self.b) * other.b
        b = self.b * other.a + np.conj(self.a) * other.b
        return MobiusElement(complex(a), complex(b))

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self) -> "MobiusElement":
        return MobiusElement(complex(np.conj(self.a)), -self.b)

    def approx_equal(self, other: "MobiusElement", tol: float = SIGN_TOL) -> bool:
        """Equality in the quotient group, i.e. up to overall sign of the lift."""
        same = abs(self.a - other.a) + abs(self.b - other.b)
        flip = abs(self.a + other.a) + abs(self.b + other.b)
        return min(same, flip) <= tol


def dilation(t: float) -> MobiusElement:
    """The dilation v_t fixing +1 and -1 and preserving both semicircles."""
    if not math.isfinite(t):
        raise ValueError("dilation parameter must be finite")
    c, s = math.cosh(t / 2.0), math.sinh(t / 2.0)
    return MobiusElement(c, -s)


def dilation_apply(tau, z):
    """v_tau(z) for complex tau by the closed formula; poles map to inf.

    Vectorized over both tau and z.  The strip 0 <= Im(tau) <= pi guarantees
    that v_{-tau} maps the upper semicircle into {|z| >= 1}.
    """
    tau = np.asarray(tau, dtype=complex)
    c, s = np.cosh(tau / 2.0), np.sinh(tau / 2.0)
    z = np.asarray(z, dtype=complex)
    num = c * z - s
    den = -s * z + c
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den == 0, np.inf + 0j, num / den)
    if out.ndim == 0:
        return complex(out)
    return out


def dilation_complex(tau: complex, z: complex) -> complex:
    """v_tau(z) for a single point, raising PoleError at a pole."""
    c, s = cmath.cosh(tau / 2.0), cmath.sinh(tau / 2.0)
    den = -s * z + c
    if abs(den) < 1e-14 * (1.0 + abs(s * z) + abs(c)):
        raise PoleError(z, tau)
    return (c * z - s) / den


def x_cocycle(gamma: MobiusElement, z):
    """Derivative cocycle X_gamma(z) = -i d/dtheta log gamma(e^{i theta}).

    Closed form z / ((a z + conj b)(b z + conj a)); analytic, no numerical
    differentiation.  Positive on the circle for real group elements.
    """
    z = np.asarray(z, dtype=complex)
    out = z / ((gamma.a * z + np.conj(gamma.b)) * (gamma.b * z + np.conj(gamma.a)))
    if out.ndim == 0:
        return complex(out)
    return out


def dilation_cocycle(tau, z):
    """X_{v_tau} evaluated at v_{-tau}(z), i.e. cosh(tau) + Re(z) sinh(tau).

    Valid for z on the unit circle; extends entirely in tau.
    """
    z = np.asarray(z, dtype=complex)
    out = np.cosh(tau) + z.real * np.sinh(tau)
    if out.ndim == 0:
        return complex(out)
    return out


def strip_map(z):
    """Disk-side strip coordinate alpha(z) = log(-i (z-1)/(z+1)).

    Maps the closed disk minus {+1, -1} onto the strip 0 <= Im <= pi, with
    the open upper semicircle going to the real line and the open lower
    semicircle to R + i pi.  Principal branch, continuous on the disk.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z - 1.0) < 1e-15) or np.any(np.abs(z + 1.0) < 1e-15):
        raise SingularPoint("strip coordinate is singular at +1 and -1")
    w = np.log(-1j * (z - 1.0) / (z + 1.0))
    # Rounding can push circle points just outside the disk, flipping the
    # Log branch near the negative real axis; fold back into [0, pi].
    w = np.where(w.imag < -np.pi / 2, w + 2j * np.pi, w)
    if w.ndim == 0:
        return complex(w)
    return w


def exterior_strip_map(z):
    """Exterior strip coordinate A(z) = log(i (1-z)/(1+z)) on {|z| >= 1}.

    Mirror of strip_map: maps the exterior domain onto -pi <= Im <= 0, the
    open upper semicircle to R, the lower one to R - i pi, and satisfies
    A(v_s(z)) = A(z) + s, A(infinity) = -i pi/2.
    """
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(np.isfinite(z), 1j * (1.0 - z) / (1.0 + z), -1j)
    w = np.log(m)
    w = np.where(w.imag > np.pi / 2, w - 2j * np.pi, w)
    if w.ndim == 0:
        return complex(w)
    return w


def flow_orbit_point(s):
    """The dilation orbit through i: v_{-s}(i), tracing the upper semicircle.

    Satisfies exterior_strip_map(v_{-s}(i)) = strip_map(v_{-s}(i)) = -s.
    """
    return dilation_apply(-np.asarray(s, dtype=float), 1j)


class Arc:
    """Open counterclockwise arc on the unit circle, neither empty nor dense."""

    def __init__(self, start: float, end: float):
        length = (end - start) % (2.0 * math.pi)
        if length <= 0.0 or length >= 2.0 * math.pi:
            raise InvalidArc(f"arc ({start}, {end}) has invalid length {length}")
        self.start = start % (2.0 * math.pi)
        self.length = length

    @property
    def end(self) -> float:
        return self.start + self.length

    @staticmethod
    def upper() -> "Arc":
        return Arc(0.0, math.pi)

    @staticmethod
    def lower() -> "Arc":
        return Arc(math.pi, 2.0 * math.pi)

    def contains_angle(self, theta, tol: float = 0.0):
        """Membership for angles; arcs are open, endpoints excluded."""
        rel = (np.asarray(theta, dtype=float) - self.start) % (2.0 * math.pi)
        out = (rel > tol) & (rel < self.length - tol)
        if out.ndim == 0:
            return bool(out)
        return out

    def is_subset(self, other: "Arc", tol: float = 1e-12) -> bool:
        rel = (self.start - other.start) % (2.0 * math.pi)
        if rel > other.length + tol and rel < 2.0 * math.pi - tol:
            return False
        rel = rel if rel <= other.length + tol else 0.0
        return rel + self.length <= other.length + tol

    def complement(self) -> "Arc":
        return Arc(self.end, self.start + 2.0 * math.pi)

    def conjugate(self) -> "Arc":
        """Image under z -> conj(z) (equivalently z -> 1/z on the circle)."""
        return Arc(-self.end, -self.start)

    def midpoint_angle(self) -> float:
        return (self.start + 0.5 * self.length) % (2.0 * math.pi)

    def subarc(self, lo: float, hi: float) -> "Arc":
        """Sub-arc by relative position, 0 <= lo < hi <= 1."""
        if not (0.0 <= lo < hi <= 1.0):
            raise InvalidArc(f"relative positions ({lo}, {hi}) out of order")
        return Arc(self.start + lo * self.length, self.start + hi * self.length)

    def map(self, gamma: MobiusElement) -> "Arc":
        """Image arc under a (real) group element; orientation is preserved."""
        za = gamma.apply(cmath.exp(1j * self.start))
        zb = gamma.apply(cmath.exp(1j * self.end))
        return Arc(cmath.phase(za), cmath.phase(zb))

    def angles(self, n: int, endpoint_margin: float = 0.0) -> np.ndarray:
        """n sample angles strictly inside the arc."""
        pad = endpoint_margin * self.length
        return self.start + np.linspace(pad, self.length - pad, n + 2)[1:-1]

    def __repr__(self):
        return f"Arc({self.start:.6f}, {self.end:.6f})"

    def approx_equal(self, other: "Arc", tol: float = 1e-10) -> bool:
        dstart = (self.start - other.start) % (2.0 * math.pi)
        dstart = min(dstart, 2.0 * math.pi - dstart)
        return dstart <= tol and abs(self.length - other.length) <= tol
