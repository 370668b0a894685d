"""Bethe root solver: convex potential, damped Newton minimization, certificates.

The spectral point for a strictly dominant weight mu is the unique minimizer
of a strictly convex potential.  Its stationarity equation is equivalent to
the Bethe ansatz equations, and the minimizer lies in the open Weyl chamber;
the solver certifies both facts numerically on every solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rootsys import DominantWeight, RootSystem

__all__ = [
    "Coupling",
    "SolverOptions",
    "BaeSolution",
    "SolverError",
    "ChamberCertificateError",
    "CertificateError",
    "PoleError",
    "bethe_potential",
    "bethe_potential_grad",
    "bethe_potential_hessian",
    "scattering_shift",
    "bethe_equation_residual",
    "solve_bethe",
]

TWO_PI = 2.0 * np.pi


class SolverError(RuntimeError):
    """Newton iteration failed; carries the last iterate and gradient norm."""

    def __init__(self, message, iterate=None, grad_norm=None):
        super().__init__(message)
        self.iterate = iterate
        self.grad_norm = grad_norm


class ChamberCertificateError(RuntimeError):
    """Computed minimizer left the open Weyl chamber (indicates a bug)."""


class CertificateError(RuntimeError):
    """A converged iterate failed its Bethe-equation residual certificate."""


class PoleError(ValueError):
    """Evaluation at a spectral point pairing to zero against some coroot."""


@dataclass(frozen=True)
class Coupling:
    """Repulsive wall couplings, one value per root length class.

    `values` is ordered by ascending squared root length (short class first);
    a single value applies to every class.  `values=None` marks the free
    (zero coupling) boundary point.
    """

    values: tuple | None

    def __post_init__(self):
        if self.values is not None:
            vals = tuple(float(v) for v in self.values)
            if len(vals) == 0 or any(v <= 0 for v in vals):
                raise ValueError(f"couplings must be strictly positive, got {self.values}")
            object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, k: float) -> "Coupling":
        return cls(values=(float(k),))

    @classmethod
    def per_class(cls, *ks) -> "Coupling":
        return cls(values=tuple(float(k) for k in ks))

    @classmethod
    def zero(cls) -> "Coupling":
        return cls(values=None)

    @property
    def is_zero(self) -> bool:
        return self.values is None

    def of_class(self, cls_index: int) -> float:
        if self.is_zero:
            return 0.0
        if len(self.values) == 1:
            return self.values[0]
        return self.values[cls_index]

    def on_positive_roots(self, rs: RootSystem) -> np.ndarray:
        """Coupling value per positive root, following its length class."""
        if self.is_zero:
            return np.zeros(rs.n_positive)
        if len(self.values) not in (1, rs.n_classes):
            raise ValueError(
                f"{rs.label} has {rs.n_classes} root length classes, got {len(self.values)} coupling values"
            )
        per_class = np.array([self.of_class(c) for c in range(rs.n_classes)])
        return per_class[rs.class_of_pos]

    def describe(self) -> str:
        if self.is_zero:
            return "0"
        return ",".join(repr(v) for v in self.values)


def _require_positive(k: Coupling, what: str):
    if k.is_zero:
        raise ValueError(f"{what} requires strictly positive couplings")


def _mu_vector(mu) -> np.ndarray:
    return mu.vector if isinstance(mu, DominantWeight) else np.asarray(mu, dtype=float)


def bethe_potential(rs: RootSystem, k: Coupling, mu, v) -> float:
    """Strictly convex potential whose minimum is the Bethe spectral point.

    For positive couplings the arctan integral is evaluated in closed form,
    int_0^x arctan(t/k) dt = x*arctan(x/k) - (k/2)*log(1 + x^2/k^2).
    At zero coupling the limiting piecewise-linear potential is used.
    """
    v = np.asarray(v, dtype=float)
    muv = _mu_vector(mu)
    quad = 0.5 * v @ v - TWO_PI * (v @ muv)
    if k.is_zero:
        return quad + np.pi * np.abs(rs.positive_roots @ v).sum()
    x = rs.positive_coroots @ v
    ka = k.on_positive_roots(rs)
    t = x / ka
    wall = rs.pos_norms2 * (x * np.arctan(t) - 0.5 * ka * np.log1p(t * t))
    return quad + wall.sum()


def scattering_shift(rs: RootSystem, k: Coupling, lam) -> np.ndarray:
    """Total phase-shift vector 2*sum_{a>0} arctan(<lam,a^vee>/k_a) * a."""
    _require_positive(k, "scattering_shift")
    lam = np.asarray(lam, dtype=float)
    x = rs.positive_coroots @ lam
    ka = k.on_positive_roots(rs)
    return 2.0 * (np.arctan(x / ka) @ rs.positive_roots)


def bethe_potential_grad(rs: RootSystem, k: Coupling, mu, v) -> np.ndarray:
    _require_positive(k, "bethe_potential_grad")
    v = np.asarray(v, dtype=float)
    return v - TWO_PI * _mu_vector(mu) + scattering_shift(rs, k, v)


def bethe_potential_hessian(rs: RootSystem, k: Coupling, v) -> np.ndarray:
    """Hessian of the potential: identity plus a positive multiple per root.

    Independent of the weight; symmetric with every eigenvalue >= 1.
    """
    _require_positive(k, "bethe_potential_hessian")
    v = np.asarray(v, dtype=float)
    x = rs.positive_coroots @ v
    ka = k.on_positive_roots(rs)
    w = rs.pos_norms2 * ka / (ka * ka + x * x)
    return np.eye(rs.dim) + (rs.positive_coroots * w[:, None]).T @ rs.positive_coroots


def bethe_equation_residual(rs: RootSystem, k: Coupling, lam, coroots=None) -> float:
    """Max deviation of the Bethe ansatz equations at the spectral point lam.

    Each equation compares exp(i<lam,g^vee>) with the product over positive
    roots b of ((<lam,b^vee>+ik_b)/(<lam,b^vee>-ik_b))^<g^vee,b>, where the
    exponents are Cartan integers.  `coroots` defaults to the simple coroots;
    any coroot family of actual roots may be passed (the exponents must stay
    integral).
    """
    lam = np.asarray(lam, dtype=float)
    if coroots is None:
        coroots = rs.simple_coroots
    coroots = np.atleast_2d(np.asarray(coroots, dtype=float))
    x = rs.positive_coroots @ lam
    lhs = np.exp(1j * (coroots @ lam))
    if k.is_zero:
        return float(np.max(np.abs(lhs - 1.0)))
    for b in range(rs.n_positive):
        if x[b] == 0.0:
            raise PoleError(f"Bethe equations undefined: <lam, beta^vee> = 0 for {rs.describe_positive(b)}")
    ka = k.on_positive_roots(rs)
    t = (x + 1j * ka) / (x - 1j * ka)
    expo = coroots @ rs.positive_roots.T
    expo_int = np.rint(expo).astype(int)
    if not np.allclose(expo, expo_int, atol=1e-9):
        raise ValueError("non-integral Bethe exponents: coroots must come from actual roots")
    rhs = np.prod(t[None, :] ** expo_int, axis=1)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass
class SolverOptions:
    tol: float = 1e-12          # gradient norm target
    bae_tol: float = 1e-9       # Bethe-equation residual certificate
    max_iter: int = 200
    armijo_c: float = 1e-4
    start: np.ndarray | None = None  # defaults to 2*pi*mu

    def __post_init__(self):
        if self.tol <= 0 or self.bae_tol <= 0:
            raise ValueError("solver tolerances must be positive")


@dataclass(eq=False)
class BaeSolution:
    """Certified Bethe spectral point for one (weight, coupling) pair."""

    mu: DominantWeight
    lam: np.ndarray
    grad_norm: float
    iterations: int
    bae_residual: float
    hessian_det: float | None
    in_chamber: bool
    potential_history: list = field(default_factory=list, repr=False)

    @property
    def eigenvalue(self) -> float:
        return float(self.lam @ self.lam)

    def to_json_dict(self) -> dict:
        return {
            "mu": list(self.mu.coeffs),
            "lambda": self.lam.tolist(),
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "bae_residual": self.bae_residual,
            "hessian_det": self.hessian_det,
            "in_chamber": self.in_chamber,
        }


def _free_solution(rs: RootSystem, mu: DominantWeight) -> BaeSolution:
    # zero-coupling closed form: the minimizer of the limiting potential
    lam = TWO_PI * (mu.vector - rs.rho)
    residual = float(np.max(np.abs(np.exp(1j * (rs.simple_coroots @ lam)) - 1.0)))
    in_chamber = bool(np.all(rs.positive_coroots @ lam > 0))
    return BaeSolution(
        mu=mu,
        lam=lam,
        grad_norm=0.0,
        iterations=0,
        bae_residual=residual,
        hessian_det=None,
        in_chamber=in_chamber,
    )


def solve_bethe(rs: RootSystem, k: Coupling, mu: DominantWeight, opts: SolverOptions | None = None) -> BaeSolution:
    """Damped Newton minimization of the potential from the start point 2*pi*mu.

    Requires a strictly dominant weight.  Returns a solution with gradient
    norm below `opts.tol`, certified to lie in the open Weyl chamber and to
    satisfy the Bethe equations within `opts.bae_tol`.  Zero coupling short
    circuits to the closed-form free spectral point.
    """
    if opts is None:
        opts = SolverOptions()
    if not mu.is_strict:
        raise ValueError(f"solve_bethe needs a strictly dominant weight, got coefficients {mu.coeffs}")
    if k.is_zero:
        return _free_solution(rs, mu)

    v = np.array(opts.start, dtype=float) if opts.start is not None else TWO_PI * mu.vector.copy()
    history = [bethe_potential(rs, k, mu, v)]
    iterations = 0
    grad = bethe_potential_grad(rs, k, mu, v)
    grad_norm = float(np.linalg.norm(grad))
    while grad_norm > opts.tol:
        if iterations >= opts.max_iter:
            raise SolverError(
                f"Newton did not reach tol={opts.tol} in {opts.max_iter} iterations (grad_norm={grad_norm:.3e})",
                iterate=v,
                grad_norm=grad_norm,
            )
        H = bethe_potential_hessian(rs, k, v)
        step = np.linalg.solve(H, -grad)
        slope = float(grad @ step)
        t = 1.0
        s_old = history[-1]
        # rounding slack keeps the test meaningful once decreases reach the
        # floating-point floor of the potential itself
        slack = 1e-14 * (1.0 + abs(s_old))
        while True:
            s_new = bethe_potential(rs, k, mu, v + t * step)
            if s_new <= s_old + opts.armijo_c * t * slope + slack:
                break
            t *= 0.5
            if t < 1e-16:
                raise SolverError(
                    "backtracking line search failed to decrease the potential",
                    iterate=v,
                    grad_norm=grad_norm,
                )
        v = v + t * step
        history.append(s_new)
        iterations += 1
        grad = bethe_potential_grad(rs, k, mu, v)
        grad_norm = float(np.linalg.norm(grad))

    in_chamber = bool(np.all(rs.positive_coroots @ v > 0))
    if not in_chamber:
        raise ChamberCertificateError(
            f"minimizer for mu={mu.coeffs}, k={k.describe()} left the open chamber; this indicates a solver bug"
        )
    residual = bethe_equation_residual(rs, k, v)
    if residual > opts.bae_tol:
        raise CertificateError(
            f"Bethe residual {residual:.3e} exceeds certificate tolerance {opts.bae_tol} for mu={mu.coeffs}"
        )
    det = float(np.linalg.det(bethe_potential_hessian(rs, k, v)))
    return BaeSolution(
        mu=mu,
        lam=v,
        grad_norm=grad_norm,
        iterations=iterations,
        bae_residual=residual,
        hessian_det=det,
        in_chamber=in_chamber,
        potential_history=history,
    )
