"""Eigenvalue models, coefficient-space fields and their norms.

States live in L2(0,1) and are represented by their coefficients against
the Dirichlet eigenbasis of -d2/dx2, phi_j(x) = sqrt(2) sin(j pi x) with
eigenvalues lambda_j = j^2 pi^2.  Abstract eigenvalue sequences (d >= 1)
are supported for norm/bound arithmetic; spatial evaluation is 1D-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import ExponentOverflowError, UnsupportedDomainError

# exp(x) overflows double precision just above this
MAX_EXP_ARG = 709.0


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class EigenModel:
    """Eigenvalue sequence of the Dirichlet Laplacian on a d-dimensional domain.

    lambdas[j-1] holds lambda_j.  e1, e2 are the two-sided growth constants:
    e1 * j**(2/d) <= lambda_j <= e2 * j**(2/d) for every stored j.
    """

    dimension: int
    lambdas: np.ndarray
    e1: float
    e2: float

    def __post_init__(self):
        object.__setattr__(self, "lambdas", _readonly(self.lambdas))
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        lam = self.lambdas
        if lam.ndim != 1 or lam.size < 1:
            raise ValueError("lambdas must be a non-empty 1D sequence")
        if lam[0] <= 0.0:
            raise ValueError("eigenvalues must be strictly positive")
        if np.any(np.diff(lam) < 0.0):
            raise ValueError("eigenvalues must be non-decreasing")
        if not (self.e1 > 0.0 and self.e2 > 0.0):
            raise ValueError("growth constants e1, e2 must be positive")
        j = np.arange(1, lam.size + 1, dtype=float)
        pw = j ** (2.0 / self.dimension)
        # tiny relative slack so exact models (lambda_j = e * j^{2/d}) pass
        tol = 1e-12 * np.maximum(lam, 1.0)
        if np.any(lam < self.e1 * pw - tol) or np.any(lam > self.e2 * pw + tol):
            raise ValueError("eigenvalue growth bounds e1 j^{2/d} <= lambda_j <= e2 j^{2/d} violated")

    @property
    def mode_count(self) -> int:
        return int(self.lambdas.size)

    def eigenvalue(self, j: int) -> float:
        """lambda_j for 1-based mode index j."""
        if not 1 <= j <= self.mode_count:
            raise IndexError(f"mode index {j} out of range 1..{self.mode_count}")
        return float(self.lambdas[j - 1])

    @staticmethod
    def dirichlet_1d(mode_count: int = 64) -> "EigenModel":
        """The built-in model on (0,1): lambda_j = j^2 pi^2, e1 = e2 = pi^2."""
        j = np.arange(1, mode_count + 1, dtype=float)
        return EigenModel(dimension=1, lambdas=j ** 2 * math.pi ** 2,
                          e1=math.pi ** 2, e2=math.pi ** 2)


@dataclass(frozen=True)
class GevreyParams:
    """Weights of the smoothness norm sum lambda^{2p} e^{2q lambda} |c_j|^2."""

    p: float
    q: float

    def __post_init__(self):
        if self.p < 0.0 or self.q < 0.0:
            raise ValueError("Gevrey parameters must satisfy p >= 0, q >= 0")


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A finite eigen-expansion: coeffs[j-1] = <psi, phi_j>."""

    model: EigenModel
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _readonly(self.coeffs))
        if self.coeffs.shape != (self.model.mode_count,):
            raise ValueError("coefficient vector length must equal the model mode count")

    @staticmethod
    def zero(model: EigenModel) -> "SpectralField":
        return SpectralField(model, np.zeros(model.mode_count))

    @staticmethod
    def basis(model: EigenModel, j: int) -> "SpectralField":
        """The eigenfunction phi_j as a field (1-based index)."""
        if not 1 <= j <= model.mode_count:
            raise IndexError(f"mode index {j} out of range 1..{model.mode_count}")
        c = np.zeros(model.mode_count)
        c[j - 1] = 1.0
        return SpectralField(model, c)

    @staticmethod
    def from_coeffs(model: EigenModel, pairs) -> "SpectralField":
        """Build from an iterable of (1-based mode, coefficient) pairs."""
        c = np.zeros(model.mode_count)
        for j, val in pairs:
            if not 1 <= j <= model.mode_count:
                raise IndexError(f"mode index {j} out of range 1..{model.mode_count}")
            c[j - 1] = val
        return SpectralField(model, c)

    def _check_same_model(self, other: "SpectralField"):
        if other.model is not self.model and not (
            other.model.dimension == self.model.dimension
            and np.array_equal(other.model.lambdas, self.model.lambdas)
        ):
            raise ValueError("fields over different eigenvalue models cannot be combined")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_model(other)
        return SpectralField(self.model, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_model(other)
        return SpectralField(self.model, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.model, self.coeffs * float(scalar))

    __rmul__ = __mul__


def scaled_norm_rows(a: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean norms, safe for entries near the double range.

    Plain sum-of-squares overflows for entries above ~1e154, which
    backward-grown modes legitimately reach; scale by the row maximum first.
    """
    a = np.atleast_2d(a)
    row_max = np.max(np.abs(a), axis=1)
    safe = np.where(row_max[:, None] > 0.0, row_max[:, None], 1.0)
    return row_max * np.linalg.norm(a / safe, axis=1)


def l2_norm(psi: SpectralField) -> float:
    """Parseval norm sqrt(sum c_j^2)."""
    return float(scaled_norm_rows(psi.coeffs)[0])


def gevrey_norm(psi: SpectralField, gp: GevreyParams) -> float:
    """Weighted norm sqrt(sum lambda_j^{2p} e^{2q lambda_j} c_j^2).

    Raises ExponentOverflowError when the result itself exceeds the double
    range (the sum is accumulated in log space, so intermediate terms may
    exceed it without harm).  Zero coefficients never contribute, however
    large their weight would be.
    """
    lam = psi.model.lambdas
    c = psi.coeffs
    nz = c != 0.0
    if not np.any(nz):
        return 0.0
    log_terms = (2.0 * gp.p * np.log(lam[nz]) + 2.0 * gp.q * lam[nz]
                 + 2.0 * np.log(np.abs(c[nz])))
    half = 0.5 * logsumexp(log_terms)
    if half > MAX_EXP_ARG:
        raise ExponentOverflowError(
            f"Gevrey norm exceeds the floating range (log norm = {half:.6g})")
    return float(math.exp(half))


def evaluate_on_grid(psi: SpectralField, x_points) -> np.ndarray:
    """Point values sum_j c_j sqrt(2) sin(j pi x); built-in 1D model only."""
    if psi.model.dimension != 1:
        raise UnsupportedDomainError("spatial evaluation is supported for the 1D model only")
    x = np.atleast_1d(np.asarray(x_points, dtype=float))
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("x points must lie in [0, 1]")
    j = np.arange(1, psi.model.mode_count + 1, dtype=float)
    return math.sqrt(2.0) * np.sin(np.outer(x, j) * math.pi) @ psi.coeffs
