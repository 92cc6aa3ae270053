"""Quadratic invariants, staged orbit maps and the twice/thrice reduced dynamics.

Three commuting circle actions (oscillator energy, Xi, L1) reduce the
8-dimensional phase space in stages.  The stages are realized here through
polynomial invariant maps:

* ``pi_map``      -- the sixteen quadratic invariants of the oscillator flow;
* ``klj_map``     -- the linear change to the (H2, Xi, K, L, J) set in which
                     the rotation integrals are themselves coordinates;
* ``thrice_map``  -- the quadratic invariants (M, N, Z, S, K) of the L1 flow.

At fixed integral values (n, xi, l) the final reduced space is the surface of
revolution 4 N^2 + 4 S^2 = f(K); the one-degree-of-freedom dynamics on it is
Lie-Poisson for the bracket tabulated in ``bracket_expected``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
from scipy.integrate import solve_ivp

from .model import CartesianState, IntegralValues, IntegrationError

__all__ = [
    "PiVector",
    "KLJVector",
    "ThriceReducedPoint",
    "EmptyReducedSpaceError",
    "pi_map",
    "klj_map",
    "orbit_map_2",
    "orbit_map_3",
    "second_space_residuals",
    "thrice_map",
    "bracket_computed",
    "bracket_expected",
    "bracket_table_check",
    "f_of_K",
    "f_roots",
    "feasible_interval",
    "surface_samples",
    "reduced_h3",
    "reduced_rhs",
    "reduced_flow",
    "ReducedTrajectory",
]


@dataclass(frozen=True)
class PiVector:
    """The sixteen quadratic oscillator invariants pi1..pi16."""

    pi1: float
    pi2: float
    pi3: float
    pi4: float
    pi5: float
    pi6: float
    pi7: float
    pi8: float
    pi9: float
    pi10: float
    pi11: float
    pi12: float
    pi13: float
    pi14: float
    pi15: float
    pi16: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)])


@dataclass(frozen=True)
class KLJVector:
    """Linear recombination (H2, Xi, K1..K3, L1..L3, J1..J8) of the pi set."""

    h2: float
    xi: float
    k1: float
    k2: float
    k3: float
    l1: float
    l2: float
    l3: float
    j1: float
    j2: float
    j3: float
    j4: float
    j5: float
    j6: float
    j7: float
    j8: float


@dataclass(frozen=True)
class ThriceReducedPoint:
    """Point (M, N, Z, S, K) of the final reduced space with its integrals."""

    M: float
    N: float
    Z: float
    S: float
    K: float
    integrals: IntegralValues


class EmptyReducedSpaceError(ValueError):
    """The requested integral values admit no reduced phase space."""


# -- invariant maps ---------------------------------------------------------

def pi_map(state: CartesianState) -> PiVector:
    """Evaluate the sixteen quadratic invariants at a state."""
    q1, q2, q3, q4 = state.q
    Q1, Q2, Q3, Q4 = state.Q
    return PiVector(
        pi1=Q1 * Q1 + q1 * q1,
        pi2=Q2 * Q2 + q2 * q2,
        pi3=Q3 * Q3 + q3 * q3,
        pi4=Q4 * Q4 + q4 * q4,
        pi5=Q1 * Q2 + q1 * q2,
        pi6=Q1 * Q3 + q1 * q3,
        pi7=Q1 * Q4 + q1 * q4,
        pi8=Q2 * Q3 + q2 * q3,
        pi9=Q2 * Q4 + q2 * q4,
        pi10=Q3 * Q4 + q3 * q4,
        pi11=q1 * Q2 - Q1 * q2,
        pi12=q1 * Q3 - Q1 * q3,
        pi13=q1 * Q4 - Q1 * q4,
        pi14=q2 * Q3 - Q2 * q3,
        pi15=q2 * Q4 - Q2 * q4,
        pi16=q3 * Q4 - Q3 * q4,
    )


def klj_map(pv: PiVector) -> KLJVector:
    """Linear change from pi invariants to the (H2, Xi, K, L, J) set."""
    return KLJVector(
        h2=0.5 * (pv.pi1 + pv.pi2 + pv.pi3 + pv.pi4),
        xi=pv.pi16 + pv.pi11,
        k1=0.5 * (-pv.pi1 - pv.pi2 + pv.pi3 + pv.pi4),
        k2=pv.pi8 - pv.pi7,
        k3=-pv.pi6 - pv.pi9,
        l1=pv.pi16 - pv.pi11,
        l2=pv.pi12 + pv.pi15,
        l3=pv.pi14 - pv.pi13,
        j1=0.5 * (pv.pi1 - pv.pi2 - pv.pi3 + pv.pi4),
        j2=0.5 * (pv.pi1 - pv.pi2 + pv.pi3 - pv.pi4),
        j3=pv.pi8 + pv.pi7,
        j4=pv.pi5 + pv.pi10,
        j5=pv.pi5 - pv.pi10,
        j6=pv.pi6 - pv.pi9,
        j7=pv.pi12 - pv.pi15,
        j8=pv.pi14 + pv.pi13,
    )


def orbit_map_2(pv: PiVector) -> KLJVector:
    """Second-stage orbit map (the rotation-block recombination)."""
    return klj_map(pv)


def orbit_map_3(kv: KLJVector) -> ThriceReducedPoint:
    """Third-stage orbit map onto the final reduced space."""
    return thrice_map(kv)


def second_space_residuals(kv: KLJVector) -> tuple[float, float]:
    """Residuals of the two relations cutting out the second reduced space.

    Both vanish identically on images of ``klj_map(pi_map(.))``; a nonzero
    value flags a point off the variety.
    """
    r1 = (
        kv.k1 * kv.k1 + kv.k2 * kv.k2 + kv.k3 * kv.k3
        + kv.l1 * kv.l1 + kv.l2 * kv.l2 + kv.l3 * kv.l3
        - kv.h2 * kv.h2 - kv.xi * kv.xi
    )
    r2 = kv.k1 * kv.l1 + kv.k2 * kv.l2 + kv.k3 * kv.l3 - kv.h2 * kv.xi
    return r1, r2


def thrice_map(kv: KLJVector) -> ThriceReducedPoint:
    """Invariants of the L1 action on the second reduced space."""
    m = 0.5 * (kv.k2 * kv.k2 + kv.k3 * kv.k3 + kv.l2 * kv.l2 + kv.l3 * kv.l3)
    n = 0.5 * (kv.k2 * kv.k2 + kv.k3 * kv.k3 - kv.l2 * kv.l2 - kv.l3 * kv.l3)
    z = kv.k2 * kv.l2 + kv.k3 * kv.l3
    s = kv.k2 * kv.l3 - kv.k3 * kv.l2
    return ThriceReducedPoint(
        M=m, N=n, Z=z, S=s, K=kv.k1,
        integrals=IntegralValues(n=kv.h2, xi=kv.xi, l=kv.l1),
    )


def eo3_residuals(pt: ThriceReducedPoint) -> tuple[float, float, float]:
    """Residuals of the three relations defining the thrice reduced space."""
    iv = pt.integrals
    r1 = pt.K * pt.K + iv.l * iv.l + 2.0 * pt.M - iv.n * iv.n - iv.xi * iv.xi
    r2 = pt.K * iv.l + pt.Z - iv.n * iv.xi
    r3 = pt.M * pt.M - pt.N * pt.N - pt.Z * pt.Z - pt.S * pt.S
    return r1, r2, r3


# -- bracket table ----------------------------------------------------------

class _Grad:
    """Value of a phase-space polynomial together with its exact gradient."""

    __slots__ = ("v", "g")

    def __init__(self, v: float, g: np.ndarray):
        self.v = v
        self.g = g

    def __add__(self, other):
        return _Grad(self.v + other.v, self.g + other.g)

    def __sub__(self, other):
        return _Grad(self.v - other.v, self.g - other.g)

    def __mul__(self, other):
        if isinstance(other, _Grad):
            return _Grad(self.v * other.v, self.v * other.g + other.v * self.g)
        return _Grad(self.v * other, self.g * other)

    __rmul__ = __mul__


def _pi_grads(state: CartesianState) -> list[_Grad]:
    """All sixteen pi invariants with exact gradients in (q, Q) order."""
    x = state.as_array()
    q, Q = x[:4], x[4:]
    out = []
    for i in range(4):
        g = np.zeros(8)
        g[i] = 2.0 * q[i]
        g[4 + i] = 2.0 * Q[i]
        out.append(_Grad(Q[i] * Q[i] + q[i] * q[i], g))
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    for a, b in pairs:  # pi5..pi10: Qa Qb + qa qb
        g = np.zeros(8)
        g[a] = q[b]
        g[b] = q[a]
        g[4 + a] = Q[b]
        g[4 + b] = Q[a]
        out.append(_Grad(Q[a] * Q[b] + q[a] * q[b], g))
    for a, b in pairs:  # pi11..pi16: qa Qb - Qa qb
        g = np.zeros(8)
        g[a] = Q[b]
        g[b] = -Q[a]
        g[4 + a] = -q[b]
        g[4 + b] = q[a]
        out.append(_Grad(q[a] * Q[b] - Q[a] * q[b], g))
    return out


def _six_invariant_grads(state: CartesianState) -> list[_Grad]:
    """(M, N, Z, S, K, L1) as functions of the state, with exact gradients."""
    p = _pi_grads(state)
    # pi indices are zero-based here.
    k1 = 0.5 * (-1.0 * p[0] - 1.0 * p[1] + p[2] + p[3])
    k2 = p[7] - p[6]
    k3 = -1.0 * p[5] - 1.0 * p[8]
    l1 = p[15] - p[10]
    l2 = p[11] + p[14]
    l3 = p[13] - p[12]
    m = 0.5 * (k2 * k2 + k3 * k3 + l2 * l2 + l3 * l3)
    n = 0.5 * (k2 * k2 + k3 * k3 - 1.0 * (l2 * l2) - 1.0 * (l3 * l3))
    z = k2 * l2 + k3 * l3
    s = k2 * l3 - 1.0 * (k3 * l2)
    return [m, n, z, s, k1, l1]


def _bracket(f: _Grad, g: _Grad) -> float:
    return float(f.g[:4] @ g.g[4:] - f.g[4:] @ g.g[:4])


def bracket_computed(state: CartesianState) -> np.ndarray:
    """6x6 matrix of canonical brackets of (M, N, Z, S, K, L1) at a state."""
    inv = _six_invariant_grads(state)
    out = np.zeros((6, 6))
    for i in range(6):
        for j in range(i + 1, 6):
            out[i, j] = _bracket(inv[i], inv[j])
            out[j, i] = -out[i, j]
    return out


def bracket_expected(M: float, N: float, Z: float, S: float, K: float, L1: float) -> np.ndarray:
    """Closed-form Lie-Poisson bracket table of (M, N, Z, S, K, L1)."""
    out = np.zeros((6, 6))

    def setpair(i, j, v):
        out[i, j] = v
        out[j, i] = -v

    # order: M=0, N=1, Z=2, S=3, K=4, L1=5
    setpair(0, 1, 4.0 * K * S)
    setpair(0, 3, -4.0 * K * N)
    setpair(1, 2, -4.0 * L1 * S)
    setpair(1, 3, -4.0 * (K * M - L1 * Z))
    setpair(1, 4, 4.0 * S)
    setpair(2, 3, -4.0 * L1 * N)
    setpair(3, 4, -4.0 * N)
    return out


def bracket_table_check(state: CartesianState) -> float:
    """Max |computed - tabulated| bracket over all 15 invariant pairs."""
    inv = _six_invariant_grads(state)
    values = [f.v for f in inv]
    expected = bracket_expected(*values)
    computed = bracket_computed(state)
    return float(np.max(np.abs(computed - expected)))


# -- the thrice reduced space ------------------------------------------------

def f_of_K(K: float, iv: IntegralValues) -> float:
    """Radius-squared profile f(K) = 4 N^2 + 4 S^2 of the reduced surface."""
    n, xi, l = iv.n, iv.xi, iv.l
    return ((n + xi) ** 2 - (K + l) ** 2) * ((n - xi) ** 2 - (K - l) ** 2)


def f_roots(iv: IntegralValues) -> tuple[float, float, float, float]:
    """The four roots of f(K), unordered."""
    n, xi, l = iv.n, iv.xi, iv.l
    return (-l - n - xi, l + n - xi, l - n + xi, -l + n + xi)


def feasible_interval(iv: IntegralValues, scan: int = 1000) -> tuple[float, float]:
    """K-interval on which f >= 0 bounds the reduced surface.

    f is an upward quartic, so the surface lives between the two middle
    roots.  A sign scan guards the degenerate tie cases (l = +-xi); a
    zero-length interval means the reduced space is a single point and is
    reported as empty for the purposes of the smooth dynamics.
    """
    roots = sorted(f_roots(iv))
    lo, hi = roots[1], roots[2]
    if hi - lo <= 0.0:
        raise EmptyReducedSpaceError(
            f"reduced space degenerates to a point for n={iv.n}, xi={iv.xi}, l={iv.l}"
        )
    ks = np.linspace(lo, hi, scan)
    fs = np.array([f_of_K(float(k), iv) for k in ks])
    # interior negativity can only come from a mis-selected interval
    if np.any(fs < -1e-9 * max(1.0, float(np.max(np.abs(fs))))):
        raise EmptyReducedSpaceError(
            f"no nonnegative middle interval for n={iv.n}, xi={iv.xi}, l={iv.l}"
        )
    return float(lo), float(hi)


def surface_samples(iv: IntegralValues, count: int = 200) -> np.ndarray:
    """Sampled (K, sqrt(f)/2) profile of the reduced surface, for plotting."""
    lo, hi = feasible_interval(iv)
    ks = np.linspace(lo, hi, count)
    radii = np.sqrt(np.maximum(0.0, np.array([f_of_K(float(k), iv) for k in ks]))) / 2.0
    return np.column_stack([ks, radii])


def reduced_h3(pt: ThriceReducedPoint, beta: float) -> float:
    """Reduced Hamiltonian on the thrice reduced space (a function of K, N)."""
    n, xi, l = pt.integrals.n, pt.integrals.xi, pt.integrals.l
    b2 = beta * beta
    return (
        0.75 * n * (3.0 * b2 - 2.0) * pt.K * pt.K
        + xi * l * (1.0 - b2) * pt.K
        + 0.5 * n * (4.0 - b2) * pt.N
        + n ** 3 * (1.5 + 0.25 * b2)
        - (l * l + xi * xi) * (0.5 * b2 + 1.0) * 0.5 * n
    )


def reduced_rhs(K: float, N: float, S: float, iv: IntegralValues, beta: float) -> tuple[float, float, float]:
    """Lie-Poisson vector field of ``reduced_h3`` on the reduced surface.

    M and Z are eliminated through the defining relations
    M = (n^2 + xi^2 - K^2 - l^2)/2 and Z = n xi - K l, after which

        dK/dt = {K, N} dH/dN,
        dN/dt = {N, K} dH/dK,
        dS/dt = {S, K} dH/dK + {S, N} dH/dN,

    with the bracket table of ``bracket_expected``.  This conserves both the
    Hamiltonian and the surface Casimir 4 N^2 + 4 S^2 - f(K) identically.
    """
    n, xi, l = iv.n, iv.xi, iv.l
    b2 = beta * beta
    m = 0.5 * (n * n + xi * xi - K * K - l * l)
    z = n * xi - K * l
    dh_dk = 1.5 * n * (3.0 * b2 - 2.0) * K + xi * l * (1.0 - b2)
    dh_dn = 0.5 * n * (4.0 - b2)
    dK = -4.0 * S * dh_dn
    dN = 4.0 * S * dh_dk
    dS = -4.0 * N * dh_dk + 4.0 * (K * m - l * z) * dh_dn
    return dK, dN, dS


def casimir_residual(K: float, N: float, S: float, iv: IntegralValues) -> float:
    """Deviation 4 N^2 + 4 S^2 - f(K) from the reduced surface."""
    return 4.0 * N * N + 4.0 * S * S - f_of_K(K, iv)


@dataclass
class ReducedTrajectory:
    """Reduced-flow samples with energy and Casimir monitors."""

    t: np.ndarray
    K: np.ndarray
    N: np.ndarray
    S: np.ndarray
    h3: np.ndarray
    casimir: np.ndarray
    integrals: IntegralValues

    @property
    def h3_drift(self) -> float:
        return float(np.max(np.abs(self.h3 - self.h3[0])))

    @property
    def casimir_drift(self) -> float:
        return float(np.max(np.abs(self.casimir)))

    def write_csv(self, path) -> None:
        from .cli import format_float

        with open(path, "w") as fh:
            fh.write("t,K,N,S,H3,casimir_residual\n")
            for k in range(len(self.t)):
                row = [self.t[k], self.K[k], self.N[k], self.S[k], self.h3[k], self.casimir[k]]
                fh.write(",".join(format_float(v) for v in row) + "\n")


def reduced_flow(
    pt0: ThriceReducedPoint,
    beta: float,
    t_end: float,
    tol: float,
    n_out: int = 256,
    surface_tol: float = 1e-10,
) -> ReducedTrajectory:
    """Integrate the reduced dynamics from a point on the reduced surface."""
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    iv = pt0.integrals
    c0 = casimir_residual(pt0.K, pt0.N, pt0.S, iv)
    scale = max(1.0, abs(f_of_K(pt0.K, iv)))
    if abs(c0) > surface_tol * scale:
        raise ValueError(
            f"initial point is off the reduced surface: casimir residual {c0:.3e}"
        )

    def fun(t, y):
        return reduced_rhs(y[0], y[1], y[2], iv, beta)

    sol = solve_ivp(
        fun,
        (0.0, t_end),
        [pt0.K, pt0.N, pt0.S],
        method="DOP853",
        rtol=tol,
        atol=tol,
        t_eval=np.linspace(0.0, t_end, n_out),
    )
    if not sol.success:
        t_last = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(
            f"reduced flow failed at t={t_last}: {sol.message}", t_last, sol.y[:, -1]
        )
    K, N, S = sol.y
    h3 = np.array([
        reduced_h3(ThriceReducedPoint(M=0.0, N=n_, Z=0.0, S=s_, K=k_, integrals=iv), beta)
        for k_, n_, s_ in zip(K, N, S)
    ])
    cas = np.array([casimir_residual(k_, n_, s_, iv) for k_, n_, s_ in zip(K, N, S)])
    return ReducedTrajectory(t=sol.t, K=K, N=N, S=S, h3=h3, casimir=cas, integrals=iv)


def reduced_point_on_surface(
    K: float, iv: IntegralValues, beta: float, sign: float = 1.0, angle: float = 0.0
) -> ThriceReducedPoint:
    """Construct a surface point at abscissa K with N + iS = (sqrt(f)/2) e^{i angle}."""
    fk = f_of_K(K, iv)
    if fk < 0.0:
        raise EmptyReducedSpaceError(f"f(K) < 0 at K={K}")
    r = 0.5 * np.sqrt(fk) * sign
    n_ = r * np.cos(angle)
    s_ = r * np.sin(angle)
    m = 0.5 * (iv.n ** 2 + iv.xi ** 2 - K * K - iv.l ** 2)
    z = iv.n * iv.xi - K * iv.l
    return ThriceReducedPoint(M=m, N=n_, Z=z, S=s_, K=K, integrals=iv)
