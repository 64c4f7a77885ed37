"""Problem descriptions: source terms and final-value instances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import EigenModel, SpectralField


@dataclass(frozen=True)
class SourceFunction:
    """The source F(t, u), applied coefficient-wise in the eigenbasis.

    Supported kinds:
      zero            F = 0,            Lipschitz constant 0
      linear          F = c * u,        Lipschitz constant |c|
      sin             F = sin(u) coefficient-wise, Lipschitz constant 1
    """

    kind: str
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "sin"):
            raise ValueError(f"unknown source kind {self.kind!r}")

    @property
    def kappa(self) -> float:
        """Lipschitz constant in the state argument."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "linear":
            return abs(self.c)
        return 1.0

    def apply(self, t, coeffs: np.ndarray) -> np.ndarray:
        """F evaluated on coefficient arrays; shape is preserved.

        `t` is accepted for interface generality; the built-in kinds are
        autonomous.
        """
        if self.kind == "zero":
            return np.zeros_like(coeffs)
        if self.kind == "linear":
            return self.c * coeffs
        return np.sin(coeffs)

    @staticmethod
    def zero() -> "SourceFunction":
        return SourceFunction("zero")

    @staticmethod
    def linear(c: float) -> "SourceFunction":
        return SourceFunction("linear", c=float(c))

    @staticmethod
    def bounded_nonlinear(name: str = "sin") -> "SourceFunction":
        if name != "sin":
            raise ValueError(f"unknown bounded nonlinear source {name!r}")
        return SourceFunction("sin")


@dataclass(frozen=True)
class FvpInstance:
    """A final-value problem: recover u on [0, tau] from data at t = tau.

    `final_data` is the exact final value g; `noisy_data`, when present, is
    a measurement g_delta with ||g_delta - g|| <= delta.
    """

    model: EigenModel
    tau: float
    source: SourceFunction
    final_data: SpectralField | None = None
    noisy_data: SpectralField | None = None
    delta: float = 0.0

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("final time tau must be positive")
        if self.delta < 0.0:
            raise ValueError("noise level delta must be >= 0")
        if self.final_data is None and self.noisy_data is None:
            raise ValueError("an instance needs exact and/or noisy final data")
        for f in (self.final_data, self.noisy_data):
            if f is not None and f.model.mode_count != self.model.mode_count:
                raise ValueError("final data must live over the instance model")
