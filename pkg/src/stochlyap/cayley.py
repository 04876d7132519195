"""Numerical Lyapunov exponents via the Cayley-parameterized QR method.

The variational flow v of a (stochastic) Lorenz system is factored as
v = Q R with Q maintained through the Cayley transform of a skew-symmetric
matrix K, and the log-diagonal of R accumulated directly in the vector rho.
Per step, with the conjugated generator increment M = j0*dt + j1*dW and
Q_cay = (I - K)(I + K)^-1:

    A        = Q_cay^T M Q_cay
    drho     = diag(A)
    S        = -(1/2) * (skew completion of the strictly lower triangle of A)
    dK       = (I - K) S (I - K)^T

The -(1/2) factor makes Q_cay satisfy the continuous QR frame equation
Q^T dQ = skew-lower-split of A (verifiable in closed form on a 2x2
rotation).  Summing drho gives trace(M) exactly, which is the discrete
Liouville identity and the reason the exponent sum is robust.

Whenever ||K|| reaches the user threshold eta < 1 the accumulated rotation
absorbs cayley(K), K restarts from zero and rho carries over unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import smallmat
from .integrator import BlowUpError, IntegratorConfig, Scheme, step
from .models import SystemDef, jacobian_diffusion, jacobian_drift
from .smallmat import CayleyDomainError, SkewMat3, cayley, inverse, qr_decompose
from .wiener import WienerPath

__all__ = [
    "CayleyState",
    "NleResult",
    "conjugated_jacobians",
    "step_k_rho",
    "maybe_restart",
    "exponents_from_rho",
    "run_nle",
    "DEFAULT_ETA",
    "DEFAULT_NLE_STEPS",
]

DEFAULT_ETA = 0.8
DEFAULT_NLE_STEPS = 100_000
REORTH_EVERY = 10_000
_ORTHO_DRIFT_TOL = 1e-10


@dataclass(frozen=True)
class CayleyState:
    """Cayley parameter, log-diagonal accumulators and restart bookkeeping."""

    k: SkewMat3 = field(default_factory=SkewMat3.zero)
    rho: np.ndarray = field(default_factory=lambda: np.zeros(3))
    q_accum: np.ndarray = field(default_factory=lambda: np.eye(3))
    step: int = 0
    restarts: int = 0


@dataclass(frozen=True)
class NleResult:
    """Finite-time Lyapunov exponents and the diagnostics of one run."""

    lambdas: np.ndarray  # sorted descending
    sum: float
    trace_residual: float
    rho_series: np.ndarray  # rows (t, rho1, rho2, rho3)
    restarts: int
    t_final: float
    w_terminal: float
    ortho_drift: float  # ||q_accum^T q_accum - I||_F at the end of the run


def conjugated_jacobians(
    s: SystemDef, x: np.ndarray, q0: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Q0^T Df_j(x) Q0 for j = 0, 1; similarity keeps the traces."""
    j0 = jacobian_drift(s, x)
    j1 = jacobian_diffusion(s)
    return q0.T @ j0 @ q0, q0.T @ j1 @ q0


def inverse_cayley(q: np.ndarray) -> SkewMat3:
    """Skew-symmetric K with cayley(K) = q; valid while no eigenvalue is -1."""
    eye = np.eye(q.shape[0])
    k = (eye - q) @ inverse(eye + q)
    return SkewMat3.from_matrix(k)


def _increment_at(
    q_cay: np.ndarray, j0: np.ndarray, j1: np.ndarray, dt: float, dW: float
) -> tuple[np.ndarray, np.ndarray]:
    """One-step increment (k_step_lower, drho) of the K and rho equations.

    ``k_step_lower`` parameterizes the within-step rotation relative to the
    current frame q_cay = cayley(K): the new frame is q_cay @ cayley(k_step).
    """
    m = j0 * dt + j1 * dW
    a = q_cay.T @ m @ q_cay
    drho = np.diagonal(a).copy()
    low = np.tril(a, -1)
    # -(1/2) skew split: at K = 0 this is the Euler increment of the K ODE.
    s_lower = -0.5 * np.array([low[1, 0], low[2, 0], low[2, 1]])
    return s_lower, drho


def step_k_rho(
    cs: CayleyState, j0: np.ndarray, j1: np.ndarray, dt: float, dW: float
) -> CayleyState:
    """Advance K and rho by one step.

    The frame advances by composition, cayley(K_new) = cayley(K) *
    cayley(dK0) with dK0 the Euler increment taken at the restarted frame.
    Composition makes a restart an exact reparameterization of the discrete
    algorithm, so the exponents are independent of the threshold eta.
    """
    q_cay = cayley(cs.k)
    k_step_lower, drho = _increment_at(q_cay, j0, j1, dt, dW)
    q_new = q_cay @ cayley(SkewMat3(k_step_lower))
    k_new = inverse_cayley(q_new)
    if k_new.norm() >= 1.0:
        raise CayleyDomainError(
            f"||K|| = {k_new.norm():.3f} >= 1 after step {cs.step}; "
            "the restart threshold eta is too loose"
        )
    return replace(cs, k=k_new, rho=cs.rho + drho, step=cs.step + 1)


def maybe_restart(cs: CayleyState, eta: float) -> CayleyState:
    """Fold cayley(K) into the accumulated rotation once ||K|| reaches eta."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    if cs.k.norm() < eta:
        return cs
    q_new = cs.q_accum @ cayley(cs.k)
    q_new, _ = qr_decompose(q_new)  # cheap at n=3; keeps drift ~machine eps
    return replace(cs, k=SkewMat3.zero(), q_accum=q_new, restarts=cs.restarts + 1)


def exponents_from_rho(rho: np.ndarray, t: float) -> np.ndarray:
    """Componentwise rho / t, sorted descending."""
    if t <= 0:
        raise ValueError(f"time horizon must be positive, got {t}")
    return np.sort(np.asarray(rho, dtype=float) / t)[::-1]


def _reorthogonalize(cs: CayleyState) -> CayleyState:
    drift = smallmat.frobenius(cs.q_accum.T @ cs.q_accum - np.eye(3))
    if drift <= _ORTHO_DRIFT_TOL:
        return cs
    q_new, _ = qr_decompose(cs.q_accum)
    return replace(cs, q_accum=q_new)


def run_nle(
    s: SystemDef,
    x0: np.ndarray,
    path: WienerPath,
    dt: float,
    n_steps: int = DEFAULT_NLE_STEPS,
    eta: float = DEFAULT_ETA,
    *,
    scheme: Scheme = Scheme.EULER_MARUYAMA,
    sample_every: int = 100,
    path_offset: int = 0,
    allow_convention_mismatch: bool = False,
) -> NleResult:
    """Co-evolve the base state and the Cayley variational state.

    The base trajectory starts from x0 (normally the spin-up end state) and
    consumes path increments [path_offset, path_offset + n_steps).  In the
    default Euler mode both the base state and the K/rho equations take
    explicit Euler increments of the system's declared coefficient form; in
    Heun mode both are corrected at the predictor point for Stratonovich
    consistency.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if path_offset + n_steps > len(path):
        raise ValueError(
            f"path has {len(path)} steps, need {path_offset + n_steps}"
        )
    cfg = IntegratorConfig(
        scheme=scheme,
        dt=dt,
        n_steps=1,
        allow_convention_mismatch=allow_convention_mismatch,
    )
    cfg.check(s)
    inc = path.scalar()
    x = np.asarray(x0, dtype=float)
    cs = CayleyState()
    samples: list[tuple[float, float, float, float]] = []
    heun = scheme is Scheme.HEUN

    for i in range(n_steps):
        dW = float(inc[path_offset + i])
        try:
            x_next = step(s, x, dW, cfg)
        except BlowUpError as err:
            raise BlowUpError(i, err.state) from None
        j0, j1 = conjugated_jacobians(s, x, cs.q_accum)
        if not heun:
            cs = step_k_rho(cs, j0, j1, dt, dW)
        else:
            q_cay = cayley(cs.k)
            dk1, dr1 = _increment_at(q_cay, j0, j1, dt, dW)
            x_pred = step(s, x, dW, IntegratorConfig(
                scheme=Scheme.EULER_MARUYAMA, dt=dt, n_steps=1,
                allow_convention_mismatch=True))
            j0p, j1p = conjugated_jacobians(s, x_pred, cs.q_accum)
            q_pred = q_cay @ cayley(SkewMat3(dk1))
            dk2, dr2 = _increment_at(q_pred, j0p, j1p, dt, dW)
            q_new = q_cay @ cayley(SkewMat3(0.5 * (dk1 + dk2)))
            k_new = inverse_cayley(q_new)
            if k_new.norm() >= 1.0:
                raise CayleyDomainError(
                    f"||K|| >= 1 after step {i}; eta is too loose"
                )
            cs = replace(cs, k=k_new, rho=cs.rho + 0.5 * (dr1 + dr2),
                         step=cs.step + 1)
        cs = maybe_restart(cs, eta)
        if (i + 1) % REORTH_EVERY == 0:
            cs = _reorthogonalize(cs)
        x = x_next
        if (i + 1) % sample_every == 0 or i + 1 == n_steps:
            t = (i + 1) * dt
            samples.append((t, cs.rho[0], cs.rho[1], cs.rho[2]))

    t_final = n_steps * dt
    w_terminal = float(np.sum(inc[path_offset:path_offset + n_steps]))
    lambdas = exponents_from_rho(cs.rho, t_final)
    total = float(np.sum(lambdas))
    tr0 = float(np.trace(jacobian_drift(s, x0)))
    tr1 = float(np.trace(jacobian_diffusion(s)))
    trace_residual = abs(total - (tr0 + tr1 * w_terminal / t_final))
    return NleResult(
        lambdas=lambdas,
        sum=total,
        trace_residual=trace_residual,
        rho_series=np.array(samples),
        restarts=cs.restarts,
        t_final=t_final,
        w_terminal=w_terminal,
        ortho_drift=smallmat.frobenius(cs.q_accum.T @ cs.q_accum - np.eye(3)),
    )
