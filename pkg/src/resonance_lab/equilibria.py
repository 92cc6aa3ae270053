"""Relative equilibria of the first-order normalized flow.

At fixed (L, U1, U3), equilibria of the slow (g, G) system solve

    dG/dt = (C11 + 4 C21 cos g) sin g = 0,
    dg/dt = d(C01 + C11 cos g + C21 cos 2g)/dG = 0,

whose sin g = 0 branches reduce to the two scalar equations

    F+-(eta) = d(C01 +- C11 + C21)/dG = 0        (cos g = +-1),

with eta = G/L and the state ratios w = U1/L, z = U3/L as parameters.
Multiplying the two branches clears the square roots and yields a degree-six
polynomial P(eta) whose coefficients are assembled verbatim by
``assemble_eta_poly``; its real roots in (0, 1] are isolated by a Sturm
chain, polished against the branch equations, and every accepted record is
re-validated on the original trigonometric system.  Spurious roots of the
squaring step are kept, flagged, in the result.

Everything here is scale-invariant in (L, gamma); records are normalized to
L = 1, gamma = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import charts, invariants
from .model import IntegralValues
from .charts import DelaunayPoint
from .normalform import order1_coeff_partials

__all__ = [
    "EtaPolynomial",
    "EquilibriumRecord",
    "Tori3Result",
    "PeriodicBranch",
    "CrossValidation",
    "SweepResult",
    "assemble_eta_poly",
    "rq_x",
    "branch_equation",
    "solve_tori3",
    "periodic_branches",
    "cross_validate",
    "sweep",
]

@dataclass(frozen=True)
class EtaPolynomial:
    """Degree-six branch-product polynomial with its parameters."""

    coeffs: tuple[float, float, float, float, float, float, float]  # a0..a6
    w: float
    z: float
    alpha: float

    def __call__(self, eta: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * eta + c
        return acc

    def derivative(self, eta: float) -> float:
        acc = 0.0
        for k in range(6, 0, -1):
            acc = acc * eta + k * self.coeffs[k]
        return acc

    @property
    def scale(self) -> float:
        return max(abs(c) for c in self.coeffs)


def assemble_eta_poly(w: float, z: float, alpha: float) -> EtaPolynomial:
    """Assemble the published closed-form coefficients a0..a6, verbatim."""
    if not (abs(w) < 1.0 and abs(z) < 1.0):
        raise ValueError(f"state ratios must satisfy |w| < 1, |z| < 1, got w={w}, z={z}")
    w2 = w * w
    z2 = z * z
    w4 = w2 * w2
    z4 = z2 * z2
    w6 = w4 * w2
    z6 = z4 * z2
    al = alpha
    al2 = alpha * alpha

    a6 = -9.0 - 24.0 * al - 16.0 * al2
    a5 = (w2 * (16.0 * al2 + 9.0 - al2 * z2 + 24.0 * al)
          + 9.0 + 24.0 * al + 16.0 * al2
          + z2 * (24.0 * al + 9.0 + 16.0 * al2))
    a4 = (w2 * (24.0 * al2 + 18.0 * al * z2 + 6.0 * al - 9.0 - 9.0 * z2
                + 30.0 * al2 * z2 * w2)
          + z2 * (6.0 * al + 24.0 * al2 - 9.0))
    a3 = (w4 * (-40.0 * al2 - 42.0 * al * z2 - 30.0 * al - 34.0 * al2 * z2 + 2.0 * z4)
          + 9.0 * z2 * w2 - 30.0 * z2 - 40.0 * al2 * z2 - 40.0 * al2 * z4
          + al * w2 * (198.0 * z2 - 34.0 * al * z4 + 30.0 + 285.0 * al * z2
                       + 40.0 * al + 42.0 * z4)
          - 30.0 * al * z4)
    a2 = al * (30.0 * w4 + 42.0 * z4 * w4 + 192.0 * z2 * w4 + 15.0 * al * w4
               - 17.0 * al * z4 * w4 + 266.0 * al * z2 * w4 - 30.0 * z4
               + 266.0 * al * z4 * w2 + 192.0 * z4 * w2 + 180.0 * z2 * w2
               + 290.0 * al * z2 * w2 + 15.0 * al * z4)
    a1 = (al2 * (25.0 * w4 - w6 * z6 + 27.0 * w6 * z4 - 51.0 * w6 * z2 + 25.0 * w6
                 + 27.0 * z6 * w4 - 139.0 * z4 * w4 - 225.0 * z2 * w4 + 25.0 * z6
                 + 25.0 * z4 - 51.0 * z6 * w2 - 225.0 * z4 * w2 - 50.0 * z2 * w2)
          + 150.0 * z2 * w4 + 150.0 * z4 * w2 + 162.0 * z4 * w4)
    a0 = 5.0 * al * (al * w6 * z4 - 3.0 * al * w6 * z6 - 5.0 * al * w6
                     + 7.0 * al * w6 * z2 + 24.0 * z4 * w4 + al * z6 * w4
                     + 5.0 * al * z2 * w4 + 18.0 * al * z4 * w4 - 5.0 * al * z6
                     + 5.0 * al * z4 * w2 + 7.0 * al * z6 * w2)
    return EtaPolynomial(coeffs=(a0, a1, a2, a3, a4, a5, a6), w=w, z=z, alpha=alpha)


def branch_product_coeffs(w: float, z: float, alpha: float) -> np.ndarray:
    """Exact branch-product polynomial, ascending coefficients in t = eta^2.

    F+(eta) * F-(eta) is a rational function of eta whose numerator, after
    clearing the positive chart denominators, is even in eta; this returns
    its seven coefficients b0..b6 as a polynomial in t = eta^2.  Derived in
    closed form from the first-order coefficients and their G-derivative;
    the roots of this polynomial in (max(w^2, z^2), 1) are exactly the
    candidate equilibria of the two sin g = 0 branches.
    """
    W = w * w
    Z = z * z
    al = alpha
    al2 = al * al
    b0 = (-120.0 * W * W * Z * Z * al
          + al2 * (15.0 * W**3 * Z**3 - 5.0 * W**3 * Z * Z - 35.0 * W**3 * Z
                   + 25.0 * W**3 - 5.0 * W * W * Z**3 - 90.0 * W * W * Z * Z
                   - 25.0 * W * W * Z - 35.0 * W * Z**3 - 25.0 * W * Z * Z
                   + 25.0 * Z**3))
    b1 = (al2 * (W**3 * Z**3 - 27.0 * W**3 * Z * Z + 51.0 * W**3 * Z - 25.0 * W**3
                 - 27.0 * W * W * Z**3 + 139.0 * W * W * Z * Z + 225.0 * W * W * Z
                 - 25.0 * W * W + 51.0 * W * Z**3 + 225.0 * W * Z * Z
                 + 50.0 * W * Z - 25.0 * Z**3 - 25.0 * Z * Z)
          + al * (162.0 * W * W * Z * Z + 150.0 * W * W * Z + 150.0 * W * Z * Z))
    b2 = (al2 * (17.0 * W * W * Z * Z - 266.0 * W * W * Z - 15.0 * W * W
                 - 266.0 * W * Z * Z - 290.0 * W * Z - 15.0 * Z * Z)
          + al * (-42.0 * W * W * Z * Z - 192.0 * W * W * Z - 30.0 * W * W
                  - 192.0 * W * Z * Z - 180.0 * W * Z - 30.0 * Z * Z))
    b3 = (-9.0 * W * Z
          + al2 * (-2.0 * W * W * Z * Z + 34.0 * W * W * Z + 40.0 * W * W
                   + 34.0 * W * Z * Z + 285.0 * W * Z + 40.0 * W
                   + 40.0 * Z * Z + 40.0 * Z)
          + al * (42.0 * W * W * Z + 30.0 * W * W + 42.0 * W * Z * Z
                  + 198.0 * W * Z + 30.0 * W + 30.0 * Z * Z + 30.0 * Z))
    b4 = (9.0 * W * Z + 9.0 * W + 9.0 * Z
          + al2 * (-30.0 * W * Z - 24.0 * W - 24.0 * Z)
          + al * (-18.0 * W * Z - 6.0 * W - 6.0 * Z))
    b5 = (-9.0 * W - 9.0 * Z - 9.0
          + al2 * (W * Z - 16.0 * W - 16.0 * Z - 16.0)
          + al * (-24.0 * W - 24.0 * Z - 24.0))
    b6 = 16.0 * al2 + 24.0 * al + 9.0
    return np.array([b0, b1, b2, b3, b4, b5, b6])


def rq_x(eta: float, w: float, z: float, alpha: float) -> tuple[float, float, float]:
    """Auxiliary (R, Q, x) functions of the branch equations R x +- Q = 0.

    ``x`` uses the grouping x = e * sqrt((1 - w^2)(1 - z^2)), the one that
    keeps x^2 polynomial in eta.
    """
    e2 = 1.0 - eta * eta
    e = math.sqrt(max(0.0, e2))
    eta2 = eta * eta
    w2, z2 = w * w, z * z
    z3 = z2 * z
    z5 = z3 * z2
    x = e * math.sqrt((1.0 - w2) * (1.0 - z2))
    R = (-(3.0 + 4.0 * alpha) * eta2 ** 3
         + (5.0 * w2 + 7.0 * w2 * z2 + 5.0 * z2) * alpha * eta2
         - 20.0 * w2 * z2 * alpha) * eta2
    Q = alpha * w * z * (eta ** 8
                         - (10.0 + 11.0 * w2 + w2 * z2) * eta ** 4
                         - 11.0 * z3 * eta ** 3
                         + (15.0 * w2 + 17.0 * w2 * z2 + 15.0 * z2) * eta ** 2
                         + 5.0 * z5 * eta
                         - 20.0 * w2 * z2)
    return R, Q, x


def branch_equation(eta: float, w: float, z: float, alpha: float, cosg: float) -> float:
    """F(eta) = d(C01 + cosg*C11 + C21)/dG at L = 1, gamma = 1.

    The same function for cosg = +1 and -1 gives the two sin g = 0 branches.
    """
    if alpha < -1.0:
        raise ValueError(f"alpha = beta^2 - 1 must be >= -1, got {alpha}")
    if not max(abs(w), abs(z)) < eta <= 1.0:
        raise ValueError(f"need max(|w|,|z|) < eta <= 1, got eta={eta}, w={w}, z={z}")
    beta = math.sqrt(alpha + 1.0)
    parts = order1_coeff_partials(1.0, eta, w, z, beta, 1.0)
    return float(parts["C01"][1] + cosg * parts["C11"][1] + parts["C21"][1])


def _branch_u_partials(eta: float, w: float, z: float, alpha: float, cosg: float) -> tuple[float, float]:
    """(d/dU1, d/dU3) of C01 + cosg*C11 + C21 at L=1, gamma=1."""
    beta = math.sqrt(alpha + 1.0)
    parts = order1_coeff_partials(1.0, eta, w, z, beta, 1.0)
    du1 = float(parts["C01"][2] + cosg * parts["C11"][2] + parts["C21"][2])
    du3 = float(parts["C01"][3] + cosg * parts["C11"][3] + parts["C21"][3])
    return du1, du3


# -- Sturm-chain root isolation ------------------------------------------------

def _trim(c: np.ndarray, tol: float) -> np.ndarray:
    """Drop negligible leading (high-degree) coefficients."""
    k = len(c)
    while k > 1 and abs(c[k - 1]) <= tol:
        k -= 1
    return c[:k]


def _polyval(c: np.ndarray, x: float) -> float:
    acc = 0.0
    for v in c[::-1]:
        acc = acc * x + v
    return acc


def _polyder(c: np.ndarray) -> np.ndarray:
    if len(c) <= 1:
        return np.zeros(1)
    return c[1:] * np.arange(1, len(c))


def _polyrem(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Remainder of a / b, coefficients ascending."""
    r = a.astype(float).copy()
    db = len(b) - 1
    lead = b[-1]
    while len(r) - 1 >= db and len(r) > 1:
        k = len(r) - 1 - db
        f = r[-1] / lead
        r[k:k + db + 1] -= f * b
        r = r[:-1]
    return r


def _sturm_chain(c: np.ndarray) -> list[np.ndarray]:
    scale = max(1e-300, float(np.max(np.abs(c))))
    tol = 1e-13 * scale
    chain = [_trim(c, tol)]
    d = _trim(_polyder(c), tol)
    if len(d) >= 1 and np.any(d != 0.0):
        chain.append(d)
    while len(chain[-1]) > 1:
        rem = _polyrem(chain[-2], chain[-1])
        rem = _trim(rem, tol * 10.0)
        if len(rem) == 1 and abs(rem[0]) <= tol * 10.0:
            break
        chain.append(-rem)
    return chain


def _variations(chain: list[np.ndarray], x: float) -> int:
    signs = []
    for p in chain:
        v = _polyval(p, x)
        if v != 0.0:
            signs.append(1 if v > 0 else -1)
    count = 0
    for a, b in zip(signs, signs[1:]):
        if a != b:
            count += 1
    return count


def _isolate_roots(c: np.ndarray, lo: float, hi: float, width: float = 1e-13) -> list[float]:
    """All distinct real roots of the ascending-coefficient polynomial in (lo, hi]."""
    chain = _sturm_chain(c)

    def nroots(a: float, b: float) -> int:
        return _variations(chain, a) - _variations(chain, b)

    total = nroots(lo, hi)
    roots: list[float] = []
    stack = [(lo, hi, total)]
    while stack:
        a, b, n = stack.pop()
        if n <= 0:
            continue
        if b - a < width:
            roots.append(0.5 * (a + b))
            continue
        if n == 1:
            # bisection on the variation count, then Newton polish
            aa, bb = a, b
            for _ in range(200):
                if bb - aa < width:
                    break
                m = 0.5 * (aa + bb)
                if nroots(aa, m) >= 1:
                    bb = m
                else:
                    aa = m
            r = 0.5 * (aa + bb)
            d = _polyder(c)
            for _ in range(3):
                fp = _polyval(d, r)
                if fp == 0.0:
                    break
                step = _polyval(c, r) / fp
                if abs(step) > (b - a):
                    break
                r -= step
            if a < r <= b + 1e-15:
                roots.append(min(r, b))
            else:
                roots.append(0.5 * (aa + bb))
            continue
        m = 0.5 * (a + b)
        n_left = nroots(a, m)
        stack.append((a, m, n_left))
        stack.append((m, b, n - n_left))
    return sorted(roots)


# -- records -------------------------------------------------------------------

@dataclass(frozen=True)
class EquilibriumRecord:
    """Accepted relative equilibrium of the slow (g, G) system."""

    kind: str            # torus3 | torus2_u1 | torus2_u3 | periodic
    eta: float
    g: float             # 0 or pi (undefined and set to 0 for circular records)
    L: float
    G: float
    U1: float
    U3: float
    residual: float
    w: float
    z: float
    alpha: float
    p_root: float        # the polynomial root that seeded this record
    rq_plus: float
    rq_minus: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class Tori3Result:
    """Outcome of the invariant-3-torus search at one parameter cell."""

    records: tuple[EquilibriumRecord, ...]
    spurious: tuple[dict, ...]
    continuum: bool
    poly: EtaPolynomial


def _polish_branch(eta0: float, w: float, z: float, alpha: float, cosg: float,
                   fscale: float) -> tuple[float, float] | None:
    """Newton-polish a branch equation from eta0; None if it does not converge."""
    lo = max(abs(w), abs(z)) + 1e-12
    eta = min(max(eta0, lo + 1e-9), 1.0 - 1e-12)
    h = 1e-7
    for _ in range(60):
        try:
            f = branch_equation(eta, w, z, alpha, cosg)
        except ValueError:
            return None
        if abs(f) < 1e-12 * fscale:
            break
        fp = (branch_equation(min(eta + h, 1.0 - 1e-13), w, z, alpha, cosg)
              - branch_equation(max(eta - h, lo + 1e-13), w, z, alpha, cosg)) / (2 * h)
        if fp == 0.0:
            return None
        step = f / fp
        step = max(min(step, 0.1), -0.1)
        eta_new = eta - step
        if not lo < eta_new < 1.0:
            eta_new = 0.5 * (eta + (lo if eta_new <= lo else 1.0))
        if abs(eta_new - eta) < 1e-15:
            eta = eta_new
            break
        eta = eta_new
    f = branch_equation(eta, w, z, alpha, cosg)
    if abs(f) < 1e-9 * fscale and abs(eta - eta0) < 0.05:
        return eta, abs(f)
    return None


def solve_tori3(w: float, z: float, alpha: float) -> Tori3Result:
    """Invariant 3-tori at one (w, z, alpha) cell, normalized to L = 1.

    Candidate eccentricities are isolated with a Sturm chain on the exact
    branch-product polynomial (``branch_product_coeffs``), assigned to the
    cos g = +1 or -1 branch, polished against the branch equation, and
    validated on the original trigonometric system.  The circular point
    eta = 1 is accepted (with the perigee angle undefined) whenever the
    cos g forcing vanishes, which requires w z = 0.  A vanishing polynomial
    signals a continuum of equilibria and is flagged instead of enumerated.

    The published degree-six polynomial is assembled alongside; each of its
    roots in (0, 1] is either matched to an accepted record or logged as
    spurious, so the squaring artifacts stay visible.
    """
    poly = assemble_eta_poly(w, z, alpha)
    bcoeffs = branch_product_coeffs(w, z, alpha)
    bscale = float(np.max(np.abs(bcoeffs)))
    if poly.scale < 1e-12 and bscale < 1e-12:
        return Tori3Result(records=(), spurious=(), continuum=True, poly=poly)

    records: list[EquilibriumRecord] = []
    spurious: list[dict] = []
    fscale = 1.0

    # 1. circular point: equilibrium of the (e cos g, e sin g) flow iff the
    #    cos g forcing C11 ~ w z vanishes; the perigee angle is undefined.
    if abs(w * z) < 1e-14:
        rq_p_val, rq_m_val = _rq_values(1.0, w, z, alpha)
        records.append(EquilibriumRecord(
            kind="torus3", eta=1.0, g=0.0, L=1.0, G=1.0, U1=w, U3=z,
            residual=0.0, w=w, z=z, alpha=alpha, p_root=1.0,
            rq_plus=rq_p_val, rq_minus=rq_m_val,
            flags=("circular", "g_undefined")))

    # 2. interior equilibria from the exact branch product, in t = eta^2
    t_lo = max(w * w, z * z) + 1e-11
    coeffs = bcoeffs.copy()
    while len(coeffs) > 1 and abs(coeffs[0]) <= 1e-14 * bscale:
        coeffs = coeffs[1:]
    if bscale >= 1e-12:
        t_roots = _isolate_roots(coeffs, t_lo, 1.0 - 1e-11)
    else:
        t_roots = []
    for t in t_roots:
        eta0 = math.sqrt(t)
        hit = False
        for cosg, gval in ((1.0, 0.0), (-1.0, math.pi)):
            out = _polish_branch(eta0, w, z, alpha, cosg, fscale)
            if out is None:
                continue
            eta_star, resid = out
            if any(rec.g == gval and abs(rec.eta - eta_star) < 1e-8 for rec in records):
                hit = True
                continue
            rq_p_val, rq_m_val = _rq_values(eta_star, w, z, alpha)
            rq_val = rq_p_val if cosg > 0 else rq_m_val
            flags = []
            if abs(rq_val) > 1e-6 * (1.0 + abs(rq_p_val) + abs(rq_m_val)):
                flags.append("rq_mismatch")
            records.append(EquilibriumRecord(
                kind="torus3", eta=eta_star, g=gval, L=1.0, G=eta_star,
                U1=w, U3=z, residual=resid, w=w, z=z, alpha=alpha,
                p_root=float("nan"),
                rq_plus=rq_p_val, rq_minus=rq_m_val, flags=tuple(flags)))
            hit = True
        if not hit:
            spurious.append({"eta": eta0, "reason": "branch-product root, no branch satisfied",
                             "rq_plus": _rq_values(eta0, w, z, alpha)[0],
                             "rq_minus": _rq_values(eta0, w, z, alpha)[1]})

    # 3. classify every root of the published polynomial on (0, 1]
    if poly.scale >= 1e-12:
        pcoeffs = np.array(poly.coeffs, dtype=float)
        while len(pcoeffs) > 1 and abs(pcoeffs[0]) <= 1e-14 * poly.scale:
            pcoeffs = pcoeffs[1:]
        p_roots = [min(r, 1.0) for r in _isolate_roots(pcoeffs, 1e-12, 1.0 + 1e-9)]
        for r in p_roots:
            matched = None
            for rec in records:
                if abs(rec.eta - r) < 1e-6 and math.isnan(rec.p_root):
                    matched = rec
                    break
            if matched is not None:
                records[records.index(matched)] = EquilibriumRecord(
                    **{**asdict(matched), "p_root": r})
            elif not any(abs(rec.eta - r) < 1e-6 for rec in records):
                rq_p_val, rq_m_val = _rq_values(r, w, z, alpha)
                spurious.append({"eta": r,
                                 "reason": "published-polynomial root, no branch satisfied",
                                 "rq_plus": rq_p_val, "rq_minus": rq_m_val})
    return Tori3Result(records=tuple(records), spurious=tuple(spurious),
                       continuum=False, poly=poly)


def _rq_values(eta: float, w: float, z: float, alpha: float) -> tuple[float, float]:
    R, Q, x = rq_x(eta, w, z, alpha)
    return R * x + Q, R * x - Q


# -- periodic orbits -------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicBranch:
    """One family of short-period orbits at a given alpha."""

    case: str            # "i" (g = 0), "ii" (g = pi), or "axial" (U1 = U3 = 0)
    e: float | None
    c2sq: float | None
    g: float
    residual: float
    u_ratio_printed: float | None   # the published |U|/G expression at this point
    characterization: str
    flags: tuple[str, ...] = ()


def _case_alpha(e: float, case: str) -> float:
    if case == "i":
        num = 3.0 * e * (3.0 + 2.0 * e) ** 2
        den = 3.0 * e ** 4 + 2.0 * e ** 3 - 10.0 * e ** 2 - 3.0 * e + 8.0
        return num / den
    num = -3.0 * e * (3.0 - 2.0 * e) ** 2
    den = 3.0 * e ** 4 - 2.0 * e ** 3 - 10.0 * e ** 2 + 3.0 * e + 8.0
    return num / den


def _case_c2sq(e: float, case: str) -> float:
    if case == "i":
        return (1.0 + 3.0 * e + e * e) / ((3.0 + 2.0 * e) * (1.0 + e))
    return (1.0 - 3.0 * e + e * e) / ((2.0 * e - 3.0) * (e - 1.0))


def _printed_u_ratio(e: float, cosg: float) -> float | None:
    num = e * cosg * (4.0 + 5.0 * e * cosg + e * e) + 1.0 - e * e
    den = e * cosg * (5.0 * e * cosg + 8.0 + 2.0 * e * e) + 3.0 + 2.0 * e * e
    if den == 0.0 or num / den < 0.0:
        return None
    return math.sqrt(num / den)


def _periodic_residual(e: float, c: float, alpha: float, cosg: float) -> float:
    """Max residual of the full periodic system at (e, c1 = c2 = c, sin g = 0)."""
    eta = math.sqrt(max(0.0, 1.0 - e * e))
    w = c * eta
    z = c * eta
    fg = branch_equation(eta, w, z, alpha, cosg)
    du1, du3 = _branch_u_partials(eta, w, z, alpha, cosg)
    return max(abs(fg), abs(du1), abs(du3))


def periodic_branches(alpha: float, e_scan: int = 4000) -> list[PeriodicBranch]:
    """All short-period families at a given alpha.

    Case (i) pairs with g = 0 and case (ii) with g = pi; both carry
    |U1| = |U3| = G sqrt(c2^2) with the closed-form c2^2(e), and exist for
    the e-roots of the corresponding alpha(e) relation.  The axial family
    U1 = U3 = 0 solves the system identically exactly at alpha = -3/4 (for
    every eccentricity), and is reported as a family flag.
    """
    out: list[PeriodicBranch] = []
    if abs(alpha + 0.75) < 1e-12:
        out.append(PeriodicBranch(
            case="axial", e=None, c2sq=0.0, g=0.0, residual=0.0,
            u_ratio_printed=None, characterization="U1 = U3 = 0, any e in [0, 1)",
            flags=("family", "e_free")))
    for case, cosg, gval in (("i", 1.0, 0.0), ("ii", -1.0, math.pi)):
        es = np.linspace(1e-6, 1.0 - 1e-6, e_scan)
        vals = np.array([_case_alpha(float(e), case) - alpha for e in es])
        for k in range(len(es) - 1):
            if vals[k] == 0.0 or vals[k] * vals[k + 1] > 0.0:
                continue
            lo, hi = float(es[k]), float(es[k + 1])
            flo = vals[k]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = _case_alpha(mid, case) - alpha
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo = mid
                    flo = fm
            e_root = 0.5 * (lo + hi)
            c2sq = _case_c2sq(e_root, case)
            if not 0.0 <= c2sq < 1.0:
                continue
            c = math.sqrt(c2sq)
            eta = math.sqrt(1.0 - e_root * e_root)
            if c * eta >= eta - 1e-12:
                continue
            resid = _periodic_residual(e_root, c, alpha, cosg)
            ratio = _printed_u_ratio(e_root, cosg)
            match = (ratio is not None and abs(ratio - c) < 1e-8)
            characterization = (
                "|U1| = |U3| = G*sqrt(c2sq), published ratio "
                + ("matches" if match else "does not match"))
            flags = [] if match else ["u_ratio_mismatch"]
            zero_resid = _periodic_residual(e_root, 0.0, alpha, cosg)
            if zero_resid < 1e-10:
                flags.append("u_zero_also_solves")
            out.append(PeriodicBranch(
                case=case, e=e_root, c2sq=c2sq, g=gval, residual=resid,
                u_ratio_printed=ratio, characterization=characterization,
                flags=tuple(flags)))
    return out


# -- cross-validation against the reduced Lie-Poisson flow ----------------------

@dataclass(frozen=True)
class CrossValidation:
    """Mapped reduced-space coordinates and stationarity residuals."""

    K: float
    N: float
    S: float
    reduced_rhs_max: float
    casimir_residual: float
    connection_residual: float
    s_expected_zero: bool


def cross_validate(rec: EquilibriumRecord, beta: float,
                   iv: IntegralValues | None = None) -> CrossValidation:
    """Map a record to (K, N, S) and evaluate the reduced vector field there.

    Normalization follows the energy shell of the chart chain: with L fixed
    by the record, gamma = L/2 and n = 4 gamma = 2L; (xi, l) come from the
    frozen momentum identification.  At an equilibrium with beta^2 != 4 the
    mapped point must have S = 0 and annihilate the reduced vector field.
    """
    gamma = rec.L / 2.0
    n = 4.0 * gamma
    xi, l1 = charts.integrals_from_momenta(rec.U1, rec.U3)
    if iv is None:
        iv = IntegralValues(n=n, xi=xi, l=l1)
    else:
        if (abs(iv.n - n) > 1e-9 * n or abs(iv.xi - xi) > 1e-9 * n
                or abs(iv.l - l1) > 1e-9 * n):
            raise ValueError("integral values inconsistent with the record momenta")
    dp = DelaunayPoint(ell=0.9, g=rec.g, u1=0.4, u3=1.3,
                       L=rec.L, G=rec.G, U1=rec.U1, U3=rec.U3)
    state = charts.delaunay_to_cartesian(dp, gamma)
    pt = invariants.thrice_map(invariants.klj_map(invariants.pi_map(state)))
    dK, dN, dS = invariants.reduced_rhs(pt.K, pt.N, pt.S, iv, beta)
    cas = invariants.casimir_residual(pt.K, pt.N, pt.S, iv)
    try:
        g_conn = charts.connection_G(pt.K, pt.N, iv)
        conn_res = abs(g_conn - rec.G)
    except charts.ChartDomainError:
        conn_res = float("nan")
    return CrossValidation(
        K=pt.K, N=pt.N, S=pt.S,
        reduced_rhs_max=max(abs(dK), abs(dN), abs(dS)),
        casimir_residual=cas,
        connection_residual=conn_res,
        s_expected_zero=(abs(beta * beta - 4.0) > 1e-12),
    )


# -- parameter sweeps ------------------------------------------------------------

@dataclass
class SweepResult:
    """Deterministic grid sweep output."""

    rows: list[dict] = field(default_factory=list)

    def to_csv(self, path) -> None:
        from .cli import format_float

        with open(path, "w") as fh:
            fh.write("alpha,w,z,kind,eta,g,residual,flags\n")
            for row in self.rows:
                fh.write(",".join([
                    format_float(row["alpha"]), format_float(row["w"]),
                    format_float(row["z"]), row["kind"],
                    format_float(row["eta"]) if row["eta"] is not None else "",
                    format_float(row["g"]) if row["g"] is not None else "",
                    format_float(row["residual"]) if row["residual"] is not None else "",
                    ";".join(row["flags"]),
                ]) + "\n")

    def to_json(self) -> list[dict]:
        return [dict(row) for row in self.rows]


def _sweep_cell(args) -> list[dict]:
    ia, iw, iz, alpha, w, z = args
    rows: list[dict] = []
    base = {"alpha": alpha, "w": w, "z": z, "ia": ia, "iw": iw, "iz": iz}
    try:
        res = solve_tori3(w, z, alpha)
    except Exception as exc:  # per-cell failures must not kill the sweep
        rows.append({**base, "kind": "error", "eta": None, "g": None,
                     "residual": None, "flags": (f"error:{exc}",)})
        return rows
    if res.continuum:
        rows.append({**base, "kind": "continuum", "eta": None, "g": None,
                     "residual": None, "flags": ("degenerate_family",)})
        return rows
    for rec in res.records:
        rows.append({**base, "kind": rec.kind, "eta": rec.eta, "g": rec.g,
                     "residual": rec.residual, "flags": rec.flags})
    for sp in res.spurious:
        rows.append({**base, "kind": "spurious", "eta": sp["eta"], "g": None,
                     "residual": None, "flags": (sp["reason"].replace(",", ";"),)})
    if not res.records and not res.spurious:
        rows.append({**base, "kind": "none", "eta": None, "g": None,
                     "residual": None, "flags": ()})
    return rows


def sweep(alpha_grid, w_grid, z_grid, workers: int = 1) -> SweepResult:
    """Deterministic enumeration of solve_tori3 over a parameter grid.

    Output ordering follows grid indices regardless of the worker count, so
    sharded and serial runs produce identical tables.
    """
    cells = [(ia, iw, iz, float(a), float(w), float(z))
             for ia, a in enumerate(alpha_grid)
             for iw, w in enumerate(w_grid)
             for iz, z in enumerate(z_grid)]
    if workers > 1:
        import multiprocessing as mp

        with mp.Pool(workers) as pool:
            chunks = pool.map(_sweep_cell, cells)
    else:
        chunks = [_sweep_cell(c) for c in cells]
    result = SweepResult()
    for chunk in chunks:
        result.rows.extend(chunk)
    return result
