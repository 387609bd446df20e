"""
Moteur générique des applications implicites engendrées par (φ, Φ, ε, σ, Σ).

Application de base y ↦ Y :
    (8a) ∂₂φ(Y3, y2, y3) = y1                       -> Y3
    (8b) ∂₃Φ(Y3, Y2, y3) + ε ∂₁φ(Y3, y2, y3) = 0    -> Y2
    (8c) Y1 = ∂₂Φ(Y3, Y2, y3)
puis conjugaison X = base(x · σ) · Σ⁻¹.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import quadcalc as qc
from .exceptions import NewtonDivergence, SolverError, TwistViolation, VolformError
from .perm3 import IDENTITY, act_vec, compose, inverse, sign
from .verify import det3

logger = logging.getLogger(__name__)

FD_STEP = float(np.cbrt(np.finfo(float).eps))


def _fd_hessian(grad, u, fd_step):
    u = np.asarray(u, dtype=float)
    steps = fd_step * (1.0 + np.abs(u))
    H = np.zeros((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = steps[j]
        H[:, j] = (grad(u + e) - grad(u - e)) / (2.0 * steps[j])
    return 0.5 * (H + H.T)


class PotentialFn:
    """
    Potentiel φ ou Φ vu comme fonction de ses trois emplacements (u, v, w).

    form, quand elle existe, est une QuadForm sur les symboles 1..3.
    step_hess(u, fd_step) remplace hess pour les potentiels composés, qui
    transmettent le pas de différences finies à leurs composantes.
    """

    def __init__(self, value, grad, hess=None, form=None, name='', fd_step=FD_STEP,
                 step_hess=None):
        self._value = value
        self._grad = grad
        self._hess = hess
        self._step_hess = step_hess
        self.form = form
        self.name = name
        self.fd_step = fd_step
        self._flipped_from = None

    @classmethod
    def from_form(cls, form, name=''):
        for sym in (4, 5, 6):
            if form.uses(sym):
                raise ValueError("La forme d'un potentiel n'utilise que les emplacements 1..3")
        Q = np.asarray(form.Q[:3, :3], dtype=float)
        b = np.asarray(form.b[:3], dtype=float)

        def pad(u):
            s = np.zeros(qc.NSYM)
            s[:3] = u
            return s

        return cls(
            value=lambda u: form.eval(pad(u)),
            grad=lambda u: Q @ np.asarray(u, dtype=float) + b,
            hess=lambda u: np.array(Q),
            form=form,
            name=name,
        )

    @classmethod
    def bilinear(cls, i, j, coef=1.0):
        """coef · u_i · u_j"""
        return cls.from_form(qc.QuadForm.monomial(coef, i, j), name=f"{coef:g}·u{i}u{j}")

    @classmethod
    def zero(cls):
        return cls.from_form(qc.QuadForm.zero(), name='0')

    @classmethod
    def from_scalar(cls, potential, order=(1, 2, 3), scale=1.0, name=None):
        """
        g(u) = scale · F(u[order[0]], u[order[1]], u[order[2]]) : l'argument i
        du potentiel F est pris dans l'emplacement order[i].
        """
        if sorted(order) != [1, 2, 3]:
            raise ValueError(f"Ordre d'arguments invalide : {order}")
        idx = [o - 1 for o in order]
        name = name or f"{scale:g}·{potential!r}{tuple(order)}"
        if potential.form is not None:
            form = potential.form.relabel({i + 1: order[i] for i in range(3)}) * scale
            return cls.from_form(form, name=name)

        def value(u):
            return scale * potential.value(np.asarray(u, dtype=float)[idx])

        def grad(u):
            g = np.zeros(3)
            g[idx] = scale * potential.grad(np.asarray(u, dtype=float)[idx])
            return g

        def hess(u, fd_step):
            H = np.zeros((3, 3))
            H[np.ix_(idx, idx)] = scale * potential.hess(np.asarray(u, dtype=float)[idx], fd_step)
            return H

        return cls(value, grad, name=name, step_hess=hess)

    def value(self, u):
        return float(self._value(np.asarray(u, dtype=float)))

    def grad(self, u):
        return np.asarray(self._grad(np.asarray(u, dtype=float)), dtype=float)

    def hess(self, u, fd_step=None):
        """Hessienne analytique, sinon différences centrées de pas relatif fd_step"""
        u = np.asarray(u, dtype=float)
        fd_step = self.fd_step if fd_step is None else fd_step
        if self._step_hess is not None:
            return np.asarray(self._step_hess(u, fd_step), dtype=float)
        if self._hess is not None:
            return np.asarray(self._hess(u), dtype=float)
        return _fd_hessian(self.grad, u, fd_step)

    def __add__(self, other):
        if self.form is not None and other.form is not None:
            return PotentialFn.from_form(self.form + other.form, name=f"{self.name}+{other.name}")
        return PotentialFn(
            value=lambda u: self.value(u) + other.value(u),
            grad=lambda u: self.grad(u) + other.grad(u),
            step_hess=lambda u, fd_step: self.hess(u, fd_step) + other.hess(u, fd_step),
            name=f"{self.name}+{other.name}",
        )

    def flipped(self):
        """φ ∘ p : échange du premier et du dernier argument"""
        if self._flipped_from is not None:
            return self._flipped_from
        name = f"{self.name}∘p"
        if self.form is not None:
            out = PotentialFn.from_form(self.form.relabel({1: 3, 2: 2, 3: 1}), name=name)
        else:
            out = PotentialFn(
                value=lambda u: self.value(np.asarray(u, dtype=float)[::-1]),
                grad=lambda u: self.grad(np.asarray(u, dtype=float)[::-1])[::-1],
                step_hess=lambda u, fd_step: self.hess(u[::-1], fd_step)[::-1, ::-1],
                name=name,
            )
        out._flipped_from = self
        return out

    def __repr__(self):
        return f"PotentialFn({self.name})"


@dataclass(frozen=True)
class GeneratingFormSpec:
    phi: PotentialFn
    Phi: PotentialFn
    eps: int = -1
    sigma: object = IDENTITY
    Sigma: object = IDENTITY

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise ValueError(f"ε doit valoir ±1, reçu {self.eps}")

    @property
    def tau(self):
        return compose(inverse(self.sigma), self.Sigma)

    @property
    def is_affine(self):
        return self.phi.form is not None and self.Phi.form is not None

    @property
    def core(self):
        return replace(self, sigma=IDENTITY, Sigma=IDENTITY)

    @property
    def volume_sign(self):
        """Déterminant de l'application permutée : ε · sign(tau)"""
        return self.eps * sign(self.tau)


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-12
    max_iter: int = 50
    fd_step: float = FD_STEP
    bracket_fallback: bool = True
    twist_tol: float = 1e-12
    max_expansions: int = 60

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ValueError("newton_tol doit être > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter doit être ≥ 1")

    @classmethod
    def from_settings(cls, **overrides):
        """Configuration lue dans settings.VOLFORM"""
        from django.conf import settings

        conf = getattr(settings, 'VOLFORM', {})
        values = {
            'newton_tol': conf.get('NEWTON_TOL', cls.newton_tol),
            'max_iter': conf.get('MAX_ITER', cls.max_iter),
            'fd_step': conf.get('FD_STEP', cls.fd_step),
            'bracket_fallback': conf.get('BRACKET_FALLBACK', cls.bracket_fallback),
        }
        values.update(overrides)
        return cls(**values)


@dataclass
class SolveInfo:
    iterations: dict = field(default_factory=dict)
    fallback: dict = field(default_factory=dict)


def _guarded(fn):
    """fn(t), ou nan si l'évaluation échoue"""

    def wrapped(t):
        try:
            return float(fn(t))
        except (SolverError, ArithmeticError, ValueError):
            return float('nan')

    return wrapped


def solve_scalar(residual, derivative, x0, cfg, equation, point, info):
    """
    Newton scalaire, repli sur brentq dans un intervalle élargi. Une erreur
    du résidu en cours d'itération (transformation de Legendre imbriquée,
    par exemple) déclenche le repli ; une dérivée nulle au point de départ
    lève TwistViolation.
    """

    def fprime(t):
        d = derivative(t)
        if not np.isfinite(d) or abs(d) <= cfg.twist_tol:
            raise TwistViolation('Dérivée de torsion nulle', equation=equation, point=point,
                                 derivative=d)
        return d

    root, converged, iterations = x0, False, 0
    try:
        root, result = optimize.newton(
            residual, x0, fprime=fprime, tol=cfg.newton_tol, rtol=4 * np.finfo(float).eps,
            maxiter=cfg.max_iter, full_output=True, disp=False,
        )
        converged, iterations = bool(result.converged), int(result.iterations)
    except TwistViolation:
        d0 = _guarded(derivative)(x0)
        if np.isfinite(d0) and abs(d0) <= cfg.twist_tol:
            raise
        logger.debug(f"Newton interrompu sur ({equation}) : dérivée nulle en cours d'itération")
    except (SolverError, ArithmeticError, ValueError) as exc:
        logger.debug(f"Newton interrompu sur ({equation}) : {exc}")

    if converged and np.isfinite(root):
        slope = abs(_guarded(derivative)(root))
        if abs(_guarded(residual)(root)) <= cfg.newton_tol * max(1.0, slope * (1.0 + abs(root))):
            info.iterations[equation] = iterations
            return float(root)

    if not cfg.bracket_fallback:
        raise NewtonDivergence(f"Newton sans convergence en {cfg.max_iter} itérations",
                               equation=equation, point=point)

    logger.warning(f"Repli sur intervalle pour l'équation ({equation}) au point {point}")
    safe = _guarded(residual)
    width = 1e-3 * (1.0 + abs(x0))
    f0 = safe(x0)
    if f0 == 0.0:
        info.iterations[equation] = iterations
        return float(x0)
    for expansion in range(cfg.max_expansions):
        lo, hi = x0 - width, x0 + width
        flo, fhi = safe(lo), safe(hi)
        for a, fa, b, fb in ((lo, flo, x0, f0), (x0, f0, hi, fhi), (lo, flo, hi, fhi)):
            if not (np.isfinite(fa) and np.isfinite(fb) and fa * fb <= 0.0):
                continue
            try:
                root = optimize.brentq(residual, a, b, xtol=cfg.newton_tol,
                                       rtol=4 * np.finfo(float).eps, maxiter=500)
            except (SolverError, ArithmeticError, ValueError, RuntimeError) as exc:
                logger.debug(f"brentq interrompu sur ({equation}) dans [{a:.6g}, {b:.6g}] : {exc}")
                continue
            info.iterations[equation] = iterations
            info.fallback[equation] = expansion + 1
            return float(root)
        width *= 2.0
    raise NewtonDivergence('Aucun changement de signe trouvé', equation=equation, point=point)


def _solve_base(spec, y, cfg, guess=None):
    y = np.asarray(y, dtype=float)
    info = SolveInfo()
    phi, Phi, eps, step = spec.phi, spec.Phi, spec.eps, cfg.fd_step
    y1, y2, y3 = y
    g3, g2 = (y3, y2) if guess is None else (guess[2], guess[1])

    Y3 = solve_scalar(
        residual=lambda t: phi.grad((t, y2, y3))[1] - y1,
        derivative=lambda t: phi.hess((t, y2, y3), step)[1, 0],
        x0=g3, cfg=cfg, equation='8a', point=y, info=info,
    )
    dphi_u = phi.grad((Y3, y2, y3))[0]
    Y2 = solve_scalar(
        residual=lambda t: Phi.grad((Y3, t, y3))[2] + eps * dphi_u,
        derivative=lambda t: Phi.hess((Y3, t, y3), step)[2, 1],
        x0=g2, cfg=cfg, equation='8b', point=y, info=info,
    )
    Y1 = Phi.grad((Y3, Y2, y3))[1]
    return np.array([Y1, Y2, Y3]), info


def base_step(spec, y, cfg=None, guess=None):
    """Résout (8a–c) pour Y ; les permutations de spec sont ignorées"""
    Y, _ = _solve_base(spec, y, cfg or SolverConfig(), guess)
    return Y


def permuted_step(spec, x, cfg=None, guess=None):
    """
    X = base(x · σ) · Σ⁻¹. Le Newton part de guess · Σ, où guess estime X
    (x lui-même par défaut, limite h → 0).
    """
    cfg = cfg or SolverConfig()
    x = np.asarray(x, dtype=float)
    start = x if guess is None else np.asarray(guess, dtype=float)
    y = act_vec(x, spec.sigma)
    Y, _ = _solve_base(spec, y, cfg, guess=act_vec(start, spec.Sigma))
    return act_vec(Y, inverse(spec.Sigma))


def adjoint(spec):
    """Spécification de l'application inverse : (Φ∘p, φ∘p, ε, Σ, σ)"""
    return GeneratingFormSpec(
        phi=spec.Phi.flipped(), Phi=spec.phi.flipped(), eps=spec.eps,
        sigma=spec.Sigma, Sigma=spec.sigma,
    )


def inverse_step(spec, X, cfg=None, guess=None):
    return permuted_step(adjoint(spec), X, cfg, guess)


@dataclass
class TwistReport:
    phi_vu: float
    Phi_wv: float
    iterations: dict
    degenerate: bool
    error: str = ''

    def as_dict(self):
        return {
            'phi_vu': self.phi_vu, 'Phi_wv': self.Phi_wv,
            'iterations': dict(self.iterations), 'degenerate': self.degenerate,
            'error': self.error,
        }


def twist_report(spec, y, cfg=None):
    """∂₂₁φ et ∂₃₂Φ au point résolu, avec les nombres d'itérations"""
    cfg = cfg or SolverConfig()
    y = np.asarray(y, dtype=float)
    error = ''
    try:
        Y, info = _solve_base(spec, y, cfg)
        iterations = info.iterations
    except VolformError as exc:
        Y, iterations, error = np.array([y[0], y[1], y[2]]), {}, str(exc)
    phi_vu = float(spec.phi.hess((Y[2], y[1], y[2]), cfg.fd_step)[1, 0])
    Phi_wv = float(spec.Phi.hess((Y[2], Y[1], y[2]), cfg.fd_step)[2, 1])
    degenerate = min(abs(phi_vu), abs(Phi_wv)) <= cfg.twist_tol
    return TwistReport(phi_vu, Phi_wv, iterations, degenerate, error)


class AffineMap3:
    """Pas affine X = Mx + d"""

    def __init__(self, M, d=None):
        self.M = np.array(M, dtype=float)
        self.d = np.zeros(3) if d is None else np.array(d, dtype=float)
        self.M.setflags(write=False)
        self.d.setflags(write=False)

    @classmethod
    def identity(cls):
        return cls(np.eye(3))

    def __call__(self, x):
        return self.M @ np.asarray(x, dtype=float) + self.d

    @property
    def det(self):
        return det3(self.M)

    def then(self, other):
        """other ∘ self"""
        return AffineMap3(other.M @ self.M, other.M @ self.d + other.d)

    def inverse(self):
        M_inv = np.linalg.inv(self.M)
        return AffineMap3(M_inv, -M_inv @ self.d)

    def conjugate(self, sigma, Sigma):
        """Application permutée x ↦ self(x · σ) · Σ⁻¹"""
        P_in, P_out = sigma.matrix(), inverse(Sigma).matrix()
        return AffineMap3(P_out @ self.M @ P_in, P_out @ self.d)

    def is_close(self, other, atol=1e-10):
        return (np.allclose(self.M, other.M, rtol=0.0, atol=atol)
                and np.allclose(self.d, other.d, rtol=0.0, atol=atol))

    def __repr__(self):
        return f"AffineMap3(M={self.M.tolist()}, d={self.d.tolist()})"


# symboles : y1..y3 -> 1..3, Y1..Y3 -> 4..6
_PHI_SLOTS = {1: 6, 2: 2, 3: 3}   # φ(Y3, y2, y3)
_PHI_CAP_SLOTS = {1: 6, 2: 5, 3: 3}   # Φ(Y3, Y2, y3)


def assemble_affine(spec):
    """
    Élimination symbolique de (8a–c) pour des potentiels quadratiques, en
    rationnels : la seule erreur d'arrondi est celle du résultat final.
    """
    if not spec.is_affine:
        raise ValueError("assemble_affine exige deux potentiels quadratiques")
    phi = spec.phi.form.relabel(_PHI_SLOTS).as_exact()
    Phi = spec.Phi.form.relabel(_PHI_CAP_SLOTS).as_exact()

    eq_a = qc.partial(phi, 2) - qc.AffineExpr.symbol(1)
    Y3 = qc.solve_linear(eq_a, 6)
    eq_b = (qc.partial(Phi, 3) + spec.eps * qc.partial(phi, 6)).substitute(6, Y3)
    Y2 = qc.solve_linear(eq_b, 5)
    Y1 = qc.partial(Phi, 5).substitute(5, Y2).substitute(6, Y3)

    rows = (Y1, Y2, Y3)
    M = np.array([r.coeffs[:3] for r in rows], dtype=float)
    d = np.array([r.constant for r in rows], dtype=float)
    return AffineMap3(M, d).conjugate(spec.sigma, spec.Sigma)

