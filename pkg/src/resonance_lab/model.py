"""Four harmonic oscillators in 1:1:1:1 resonance with a sextic coupling term.

Phase space is R^4 x R^4 with canonical pairs (q_i, Q_i) and symplectic form
dQ ^ dq, so that dq/dt = dH/dQ and dQ/dt = -dH/dq.  The unperturbed part is
the isotropic oscillator

    H2 = (Q1^2 + Q2^2 + Q3^2 + Q4^2)/2 + omega^2 (q1^2 + q2^2 + q3^2 + q4^2)/2

and the perturbation is the degree-six polynomial

    V6 = |q|^2 * ( beta^2 (q1^2 + q2^2 - q3^2 - q4^2)^2
                   + 4 (q1^2 + q2^2)(q3^2 + q4^2) ),

which Poisson-commutes with the two rotation integrals

    Xi = q1 Q2 - Q1 q2 + q3 Q4 - Q3 q4,
    L1 = q3 Q4 - Q3 q4 - q1 Q2 + Q1 q2.

This module owns the Hamiltonian, its analytic gradient, the integrals, and a
conservation-monitoring reference integrator that the reduction and averaging
layers use as ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "CartesianState",
    "ModelParams",
    "IntegralValues",
    "IntegrationError",
    "Trajectory",
    "hamiltonian",
    "h_quadratic",
    "h_sextic",
    "grad_h_sextic",
    "first_integrals",
    "vector_field",
    "integrate",
    "canonical_bracket",
]


@dataclass(frozen=True)
class CartesianState:
    """The eight canonical coordinates (q1..q4, Q1..Q4)."""

    q: tuple[float, float, float, float]
    Q: tuple[float, float, float, float]

    @classmethod
    def from_array(cls, x) -> "CartesianState":
        x = np.asarray(x, dtype=float)
        if x.shape != (8,):
            raise ValueError(f"expected 8 components, got shape {x.shape}")
        return cls(q=tuple(x[:4]), Q=tuple(x[4:]))

    def as_array(self) -> np.ndarray:
        return np.array(self.q + self.Q, dtype=float)

    @property
    def rho(self) -> float:
        """Squared configuration radius sum(q_i^2)."""
        return sum(v * v for v in self.q)


@dataclass(frozen=True)
class ModelParams:
    """Model parameters: frequency, perturbation strength, coupling, energy scale.

    ``gamma`` is the regularization constant h/4 attached to a chosen energy
    level h; it is only needed by the chart and averaging layers and may be
    left unset for plain Cartesian work.
    """

    omega: float = 1.0
    epsilon: float = 0.0
    beta: float = 0.0
    gamma: float | None = None

    def __post_init__(self):
        if not self.omega > 0.0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.gamma is not None and not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive when set, got {self.gamma}")

    @property
    def alpha(self) -> float:
        """Coupling shorthand beta^2 - 1 (vanishes in the central case)."""
        return self.beta * self.beta - 1.0

    def require_gamma(self) -> float:
        if self.gamma is None:
            raise ValueError("this operation needs gamma = h/4 set on ModelParams")
        return self.gamma


@dataclass(frozen=True)
class IntegralValues:
    """Fixed values (n, xi, l) of the integrals H2, Xi and L1.

    The constraints n > 0, |xi| <= n, |l| <= n are necessary for the reduced
    spaces to be nonempty.
    """

    n: float
    xi: float
    l: float

    def __post_init__(self):
        if not self.n > 0.0:
            raise ValueError(f"n must be positive, got {self.n}")
        if abs(self.xi) > self.n:
            raise ValueError(f"|xi| <= n required, got xi={self.xi}, n={self.n}")
        if abs(self.l) > self.n:
            raise ValueError(f"|l| <= n required, got l={self.l}, n={self.n}")

    @classmethod
    def from_state(cls, state: CartesianState) -> "IntegralValues":
        """Integral values carried by a state (with omega = 1)."""
        xi, l1 = first_integrals(state)
        return cls(n=h_quadratic(state, 1.0), xi=xi, l=l1)


def h_quadratic(state: CartesianState, omega: float = 1.0) -> float:
    """Isotropic-oscillator part |Q|^2/2 + omega^2 |q|^2/2."""
    kin = sum(v * v for v in state.Q)
    pot = sum(v * v for v in state.q)
    return 0.5 * kin + 0.5 * omega * omega * pot


def h_sextic(state: CartesianState, beta: float) -> float:
    """Sextic coupling V6(q); independent of the momenta."""
    q1, q2, q3, q4 = state.q
    r1 = q1 * q1 + q2 * q2
    r2 = q3 * q3 + q4 * q4
    d = r1 - r2
    return (r1 + r2) * (beta * beta * d * d + 4.0 * r1 * r2)


def hamiltonian(state: CartesianState, p: ModelParams) -> float:
    """Total energy H2 + epsilon * V6."""
    return h_quadratic(state, p.omega) + p.epsilon * h_sextic(state, p.beta)


def first_integrals(state: CartesianState) -> tuple[float, float]:
    """The two rotation integrals (Xi, L1)."""
    q1, q2, q3, q4 = state.q
    Q1, Q2, Q3, Q4 = state.Q
    a = q1 * Q2 - Q1 * q2
    b = q3 * Q4 - Q3 * q4
    return a + b, b - a


def grad_h_sextic(q, beta: float) -> np.ndarray:
    """Analytic gradient of V6 with respect to the four positions.

    With rho = r1 + r2, d = r1 - r2 and W = beta^2 d^2 + 4 r1 r2:

        dV6/dq_i = 2 q_i W + rho * dW/dq_i,
        dW/dq_i  = +-4 beta^2 d q_i + 8 q_i r_(other block).
    """
    q1, q2, q3, q4 = q
    b2 = beta * beta
    r1 = q1 * q1 + q2 * q2
    r2 = q3 * q3 + q4 * q4
    rho = r1 + r2
    d = r1 - r2
    w = b2 * d * d + 4.0 * r1 * r2
    g = np.empty(4)
    g[0] = 2.0 * q1 * w + rho * (4.0 * b2 * d * q1 + 8.0 * q1 * r2)
    g[1] = 2.0 * q2 * w + rho * (4.0 * b2 * d * q2 + 8.0 * q2 * r2)
    g[2] = 2.0 * q3 * w + rho * (-4.0 * b2 * d * q3 + 8.0 * q3 * r1)
    g[3] = 2.0 * q4 * w + rho * (-4.0 * b2 * d * q4 + 8.0 * q4 * r1)
    return g


def _rhs(x: np.ndarray, p: ModelParams) -> np.ndarray:
    """Canonical vector field (dH/dQ, -dH/dq) on flat arrays."""
    out = np.empty(8)
    out[:4] = x[4:]
    out[4:] = -(p.omega * p.omega) * x[:4]
    if p.epsilon != 0.0:
        out[4:] -= p.epsilon * grad_h_sextic(x[:4], p.beta)
    return out


def vector_field(state: CartesianState, p: ModelParams) -> CartesianState:
    """Tangent (dq/dt, dQ/dt) at a state, shaped like a state."""
    return CartesianState.from_array(_rhs(state.as_array(), p))


class IntegrationError(RuntimeError):
    """Raised when the adaptive integrator cannot continue.

    Carries the last accepted time and state so callers can diagnose or
    restart.
    """

    def __init__(self, message: str, t_last: float, state_last: CartesianState | np.ndarray):
        super().__init__(message)
        self.t_last = t_last
        self.state_last = state_last


@dataclass
class Trajectory:
    """Sampled trajectory with conservation monitors.

    ``energy``, ``xi`` and ``l1`` are evaluated at every sample; the drift
    properties compare against the initial values.
    """

    t: np.ndarray
    states: np.ndarray  # shape (n, 8)
    energy: np.ndarray
    xi: np.ndarray
    l1: np.ndarray

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))

    @property
    def xi_drift(self) -> float:
        return float(np.max(np.abs(self.xi - self.xi[0])))

    @property
    def l1_drift(self) -> float:
        return float(np.max(np.abs(self.l1 - self.l1[0])))

    def state(self, i: int) -> CartesianState:
        return CartesianState.from_array(self.states[i])

    def write_csv(self, path) -> None:
        from .cli import format_float  # deterministic 17-digit formatting

        with open(path, "w") as fh:
            fh.write("t,q1,q2,q3,q4,Q1,Q2,Q3,Q4,H,Xi,L1\n")
            for k in range(len(self.t)):
                row = [self.t[k], *self.states[k], self.energy[k], self.xi[k], self.l1[k]]
                fh.write(",".join(format_float(v) for v in row) + "\n")


def integrate(
    state0: CartesianState,
    p: ModelParams,
    t_end: float,
    tol: float,
    n_out: int = 256,
    time_scale=None,
) -> Trajectory:
    """Integrate the canonical equations with an adaptive high-order scheme.

    Conservation of H, Xi and L1 is monitored at every output sample; the
    caller decides what drift is acceptable.  ``time_scale``, when given, is
    a positive function s(x) multiplying the vector field, used to run the
    flow in a reparametrized time.

    Raises IntegrationError on step-size failure, carrying the last accepted
    state.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    x0 = state0.as_array()

    if time_scale is None:
        def fun(t, x):
            return _rhs(x, p)
    else:
        def fun(t, x):
            return time_scale(x) * _rhs(x, p)

    t_eval = np.linspace(0.0, t_end, n_out)
    sol = solve_ivp(
        fun,
        (0.0, t_end),
        x0,
        method="DOP853",
        rtol=tol,
        atol=tol,
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        t_last = float(sol.t[-1]) if sol.t.size else 0.0
        x_last = sol.y[:, -1] if sol.t.size else x0
        raise IntegrationError(
            f"integration failed at t={t_last}: {sol.message}",
            t_last,
            CartesianState.from_array(x_last),
        )

    states = sol.y.T
    energy = np.array([hamiltonian(CartesianState.from_array(x), p) for x in states])
    xi_l1 = np.array([first_integrals(CartesianState.from_array(x)) for x in states])
    return Trajectory(t=sol.t, states=states, energy=energy, xi=xi_l1[:, 0], l1=xi_l1[:, 1])


def canonical_bracket(f, g, state: CartesianState, step: float = 1e-5) -> float:
    """Numerical canonical bracket {f, g} = df/dq . dg/dQ - df/dQ . dg/dq.

    Gradients are central differences with the given step; for polynomial
    observables of degree <= 2 the differencing is exact up to roundoff, so a
    relatively large step minimizes cancellation error.
    """
    x = state.as_array()

    def grad(fn):
        out = np.empty(8)
        for i in range(8):
            xp = x.copy()
            xm = x.copy()
            xp[i] += step
            xm[i] -= step
            out[i] = (fn(CartesianState.from_array(xp)) - fn(CartesianState.from_array(xm))) / (2.0 * step)
        return out

    gf = grad(f)
    gg = grad(g)
    return float(gf[:4] @ gg[4:] - gf[4:] @ gg[:4])
