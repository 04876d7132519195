"""Seeded Brownian increment paths, reproducible bit-exactly.

A single path object drives every system and every noise amplitude in an
experiment: the amplitude multiplies the diffusion coefficients, never the
increments, so comparisons across systems see the identical realisation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["GENERATOR_ID", "WienerPath", "generate_path", "terminal_value"]

# Counter-based Philox keyed by the seed, increments drawn as
# sqrt(dt) * standard_normal.  Pinned so outputs are replayable.
GENERATOR_ID = "np-philox4x64-standard-normal-v1"


@dataclass(frozen=True)
class WienerPath:
    """A fixed-step Brownian path held as its increments.

    ``increments`` has shape (n_steps,) for the usual scalar channel or
    (n_steps, m) for m channels; each entry is distributed N(0, dt).
    """

    seed: int
    dt: float
    increments: np.ndarray
    generator_id: str = GENERATOR_ID

    def __post_init__(self) -> None:
        inc = np.asarray(self.increments, dtype=float)
        object.__setattr__(self, "increments", inc)
        inc.flags.writeable = False

    def __len__(self) -> int:
        return self.increments.shape[0]

    def scalar(self) -> np.ndarray:
        """The single-channel increment sequence."""
        if self.increments.ndim == 1:
            return self.increments
        return self.increments[:, 0]

    def dump(self, filename: str | Path) -> None:
        """Write the path as CSV with a metadata header; round-trips bit-exactly."""
        inc = np.atleast_2d(self.increments.T).T
        with open(filename, "w", encoding="ascii", newline="\n") as fh:
            fh.write(f"# seed = {self.seed}\n")
            fh.write(f"# dt = {self.dt!r}\n")
            fh.write(f"# n = {len(self)}\n")
            fh.write(f"# channels = {inc.shape[1]}\n")
            fh.write(f"# generator-id = {self.generator_id}\n")
            for row in inc.tolist():
                fh.write(",".join(repr(v) for v in row) + "\n")

    @classmethod
    def load(cls, filename: str | Path) -> "WienerPath":
        meta: dict[str, str] = {}
        rows: list[list[float]] = []
        with open(filename, "r", encoding="ascii") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, value = line.lstrip("# ").partition("=")
                    meta[key.strip()] = value.strip()
                else:
                    rows.append([float(tok) for tok in line.split(",")])
        inc = np.array(rows)
        if int(meta["channels"]) == 1:
            inc = inc[:, 0]
        return cls(
            seed=int(meta["seed"]),
            dt=float(meta["dt"]),
            increments=inc,
            generator_id=meta.get("generator-id", GENERATOR_ID),
        )


def generate_path(seed: int, n_steps: int, dt: float, channels: int = 1) -> WienerPath:
    """Draw a seeded Brownian increment path of ``n_steps`` steps of size ``dt``."""
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if channels < 1:
        raise ValueError(f"channels must be >= 1, got {channels}")
    rng = np.random.Generator(np.random.Philox(seed))
    shape = (n_steps,) if channels == 1 else (n_steps, channels)
    increments = np.sqrt(dt) * rng.standard_normal(shape)
    return WienerPath(seed=seed, dt=dt, increments=increments)


def terminal_value(path: WienerPath, k: int) -> float:
    """W at step k, i.e. the sum of the first k scalar increments; W(0) = 0."""
    if k < 0 or k > len(path):
        raise IndexError(f"step index {k} outside [0, {len(path)}]")
    return float(np.sum(path.scalar()[:k]))
