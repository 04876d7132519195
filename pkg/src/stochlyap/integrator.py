"""Fixed-step time integration of a Lorenz system along a Wiener path.

Euler-Maruyama consumes Ito-convention systems, Heun (predictor-corrector)
consumes Stratonovich ones.  The reference experiments apply Euler-Maruyama
directly to the transport-noise system in its Stratonovich form; that
mismatch must be requested explicitly via ``allow_convention_mismatch``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .models import Convention, NoiseKind, SystemDef, diffusion, drift
from .wiener import WienerPath

__all__ = [
    "Scheme",
    "BlowUpError",
    "ConventionMismatchError",
    "IntegratorConfig",
    "DEFAULT_SPIN_UP_STEPS",
    "DEFAULT_DT",
    "SPIN_UP_STATE",
    "step",
    "simulate",
    "spin_up",
]

DEFAULT_DT = 0.001
DEFAULT_SPIN_UP_STEPS = 50_000
SPIN_UP_STATE = np.array([0.0, 1.0, 0.0])

_OVERFLOW = 1e100


class Scheme(Enum):
    EULER_MARUYAMA = "euler-maruyama"
    HEUN = "heun"


class BlowUpError(RuntimeError):
    """A state component left the finite range during integration."""

    def __init__(self, step_index: int, state: np.ndarray):
        super().__init__(f"non-finite state at step {step_index}: {state}")
        self.step_index = step_index
        self.state = state


class ConventionMismatchError(ValueError):
    """Scheme and system convention disagree and no override was given."""


def _required_convention(scheme: Scheme) -> Convention:
    return Convention.ITO if scheme is Scheme.EULER_MARUYAMA else Convention.STRATONOVICH


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: Scheme = Scheme.EULER_MARUYAMA
    dt: float = DEFAULT_DT
    n_steps: int = DEFAULT_SPIN_UP_STEPS
    allow_convention_mismatch: bool = False

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be nonnegative, got {self.n_steps}")

    def check(self, s: SystemDef) -> None:
        if self.allow_convention_mismatch or s.kind is NoiseKind.NONE or s.beta == 0.0:
            return
        if s.convention is not _required_convention(self.scheme):
            raise ConventionMismatchError(
                f"{self.scheme.value} expects a "
                f"{_required_convention(self.scheme).value} system, got "
                f"{s.convention.value}; convert the system or set "
                "allow_convention_mismatch=True to integrate the coefficients "
                "literally"
            )


def step(s: SystemDef, x: np.ndarray, dW: float, cfg: IntegratorConfig) -> np.ndarray:
    """One integration step of size cfg.dt consuming the increment dW."""
    dt = cfg.dt
    if cfg.scheme is Scheme.EULER_MARUYAMA:
        out = x + drift(s, x) * dt + diffusion(s, x) * dW
    else:
        pred = x + drift(s, x) * dt + diffusion(s, x) * dW
        out = x + 0.5 * (drift(s, x) + drift(s, pred)) * dt
        out = out + 0.5 * (diffusion(s, x) + diffusion(s, pred)) * dW
    if not np.all(np.isfinite(out)) or np.any(np.abs(out) > _OVERFLOW):
        raise BlowUpError(-1, out)
    return out


def simulate(
    s: SystemDef,
    x0: np.ndarray,
    path: WienerPath,
    cfg: IntegratorConfig,
    offset: int = 0,
) -> np.ndarray:
    """Integrate n_steps steps; returns the (n_steps + 1, 3) state sequence."""
    cfg.check(s)
    if offset + cfg.n_steps > len(path):
        raise ValueError(
            f"path has {len(path)} steps, need {offset + cfg.n_steps}"
        )
    inc = path.scalar()
    out = np.empty((cfg.n_steps + 1, 3))
    out[0] = x0
    x = np.asarray(x0, dtype=float)
    for i in range(cfg.n_steps):
        try:
            x = step(s, x, inc[offset + i], cfg)
        except BlowUpError as err:
            raise BlowUpError(i, err.state) from None
        out[i + 1] = x
    return out


def spin_up(
    s: SystemDef,
    path: WienerPath,
    cfg: IntegratorConfig | None = None,
) -> np.ndarray:
    """Discard the transient: integrate from (0, 1, 0) and return the end state.

    The spin-up consumes the head of the path (noise on); the exponent
    computation then continues with the subsequent increments.
    """
    if cfg is None:
        cfg = IntegratorConfig(n_steps=DEFAULT_SPIN_UP_STEPS)
    return simulate(s, SPIN_UP_STATE, path, cfg)[-1]
