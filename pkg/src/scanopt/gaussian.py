"""Random-scan rates and asymptotic variances for zero-mean Gaussian targets."""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidSelectionProbabilities,
    NotPositiveDefinite,
    ParameterOutOfRange,
)
from .linalg import as_matrix, invert, spectral_radius

SIMPLEX_TOL = 1e-12


def as_alpha(alpha, d=None):
    """Validate selection probabilities and return them as a float array."""
    a = np.asarray(alpha, dtype=float).reshape(-1)
    if a.size < 1 or not np.all(np.isfinite(a)):
        raise InvalidSelectionProbabilities(f"selection probabilities must be finite, got {alpha!r}")
    if d is not None and a.size != d:
        raise DimensionMismatch(f"alpha has {a.size} entries, expected {d}")
    if np.any(a < 0.0) or np.any(a > 1.0):
        raise InvalidSelectionProbabilities(f"each selection probability must lie in [0, 1], got {a.tolist()}")
    if abs(a.sum() - 1.0) > SIMPLEX_TOL:
        raise InvalidSelectionProbabilities(f"selection probabilities sum to {a.sum():.15g}, not 1")
    return a


def equal_alpha(d):
    return np.full(d, 1.0 / d)


def check_positive_definite(sigma, rel_tol=1e-10):
    sigma = as_matrix(sigma)
    if np.max(np.abs(sigma - sigma.T)) > 1e-10:
        raise NotPositiveDefinite("dispersion matrix is not symmetric within 1e-10")
    ev = np.linalg.eigvalsh(0.5 * (sigma + sigma.T))
    if ev[-1] <= 0.0 or ev[0] <= rel_tol * ev[-1]:
        raise NotPositiveDefinite(
            f"dispersion matrix is not positive definite (eigenvalues {ev[0]:.4g} .. {ev[-1]:.4g})"
        )
    return sigma


@dataclass(frozen=True)
class GaussianTarget:
    """N_d(0, sigma) with precision and full-conditional variances cached."""

    sigma: np.ndarray
    precision: np.ndarray = field(repr=False)
    cond_var_diag: np.ndarray = field(repr=False)
    label: str = "gaussian"

    @classmethod
    def from_sigma(cls, sigma, label="gaussian"):
        sigma = check_positive_definite(sigma)
        precision = invert(sigma)
        return cls(sigma, precision, 1.0 / np.diag(precision), label)

    @property
    def dimension(self):
        return self.sigma.shape[0]

    def scan_operator(self, alpha):
        """I - diag(alpha) S R: the mean-update matrix of one random-scan step."""
        alpha = as_alpha(alpha, self.dimension)
        return np.eye(self.dimension) - (alpha * self.cond_var_diag)[:, None] * self.precision

    def conditional_coefficients(self):
        """Rows b_i with E[x_i | x_-i] = b_i @ x (b_ii = 0)."""
        b = -self.precision / np.diag(self.precision)[:, None]
        np.fill_diagonal(b, 0.0)
        return b


@dataclass(frozen=True)
class BivariateGaussianSpec:
    sigma1: float
    sigma2: float
    rho: float

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ParameterOutOfRange("standard deviations must be positive")
        if not -1.0 < self.rho < 1.0:
            raise ParameterOutOfRange(f"correlation must lie in (-1, 1), got {self.rho}")

    @property
    def tau(self):
        return self.rho * self.sigma1 * self.sigma2

    @property
    def sigma(self):
        return np.array([[self.sigma1**2, self.tau], [self.tau, self.sigma2**2]])

    def target(self):
        label = f"gaussian-biv({self.sigma1:g},{self.sigma2:g},{self.rho:g})"
        return GaussianTarget.from_sigma(self.sigma, label)


def gaussian_scan_rate(target, alpha):
    """Spectral radius of I - diag(alpha) S R."""
    return spectral_radius(target.scan_operator(alpha))


def bivariate_rate_closed_form(rho, alpha1):
    if not -1.0 < rho < 1.0:
        raise ParameterOutOfRange(f"correlation must lie in (-1, 1), got {rho}")
    c = 1.0 - rho**2
    radicand = 1.0 + 4.0 * alpha1**2 * c - 4.0 * alpha1 * c
    return 0.5 * (1.0 + np.sqrt(max(radicand, 0.0)))


def exchangeable_sigma(sigmas):
    """diag(sigma_i^2) - J / (d + 0.005)."""
    s = np.asarray(sigmas, dtype=float).reshape(-1)
    if s.size < 1 or np.any(s <= 0):
        raise ParameterOutOfRange("exchangeable builder needs positive standard deviations")
    d = s.size
    sigma = np.diag(s**2) - np.full((d, d), 1.0 / (d + 0.005))
    return check_positive_definite(sigma)


def bivariate_avar_sum(spec, alpha1):
    """Printed polynomial for h(x) = x1 + x2 in the bivariate case."""
    s1, s2, rho = spec.sigma1, spec.sigma2, spec.rho
    a = rho * s1 + s2
    b = s1 + rho * s2
    q = 1.0 - alpha1
    return (
        s1**2 + s2**2 + 2 * rho * s1 * s2
        + alpha1 * a**2
        + q * b**2
        + alpha1**2 * a**2
        + q**2 * b**2
        + 2 * alpha1 * q * a * b * rho
    )
