"""
Schémas préservant le volume construits sur le moteur genmap.

  se-se, dl-se, dl-dl   compositions de deux pas symplectiques
                        (Euler symplectique ou Lagrangien discret)
  s1-quispel, s1-az     formes génératrices S1 dérivées pour un champ linéaire
  s2-quispel            forme génératrice S2 dérivée pour un champ linéaire
  quispel-corrected     application semi-implicite corrigée, assemblée directement
  euler, rk4            références non conservatives
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import quadcalc as qc
from .exceptions import (
    DegenerateCoefficient, DerivationMismatch, LegendreFailure, SolverError,
    StepTooLarge, TwistDegenerate, UnsupportedField,
)
from .fields import LinearField, potentials_for
from .genmap import (
    AffineMap3, GeneratingFormSpec, PotentialFn, SolveInfo, SolverConfig,
    assemble_affine, inverse_step, permuted_step, solve_scalar,
)
from .perm3 import FLIP, IDENTITY, Permutation, classify

logger = logging.getLogger(__name__)

LEGENDRE_TOL = 1e-8
POLE_TOL = 1e-8
TWIST_RTOL = 1e-8
MISMATCH_RTOL = 1e-9

SE_SE_SIGMA, SE_SE_SIGMA_CAP = FLIP, IDENTITY
DL_SE_SIGMA, DL_SE_SIGMA_CAP = FLIP, Permutation((1, 3, 2))
DL_DL_SIGMA, DL_DL_SIGMA_CAP = FLIP, Permutation((3, 1, 2))
S1_SIGMA, S1_SIGMA_CAP = FLIP, FLIP
S2_SIGMA, S2_SIGMA_CAP = FLIP, Permutation((2, 3, 1))

_sym = qc.AffineExpr.symbol


@dataclass
class SchemeHandle:
    """
    Schéma prêt à itérer. Un pas affine est appliqué directement ; sinon le
    pas passe par le moteur genmap (ou par stepper pour les références).
    """
    name: str
    label: str
    h: float
    vector_field: object = None
    spec: GeneratingFormSpec = None
    affine: AffineMap3 = None
    spec_factory: object = None
    stepper: object = None
    cfg: SolverConfig = field(default_factory=SolverConfig)
    potentials: tuple = None

    def spec_at(self, x):
        """Spécification utilisée pour le pas partant de x"""
        if self.spec_factory is not None:
            return self.spec_factory(np.asarray(x, dtype=float))
        return self.spec

    def predictor(self, x, direction=1.0):
        """Estimation d'Euler explicite x ± h·a(x), point de départ du Newton"""
        if self.vector_field is None:
            return None
        return x + direction * self.h * np.asarray(self.vector_field(x), dtype=float)

    def engine_step(self, x):
        x = np.asarray(x, dtype=float)
        spec = self.spec_at(x)
        if spec is None:
            raise ValueError(f"Le schéma {self.name} n'a pas de forme génératrice")
        return permuted_step(spec, x, self.cfg, guess=self.predictor(x))

    def step(self, x):
        if self.affine is not None:
            return self.affine(x)
        if self.stepper is not None:
            return self.stepper(np.asarray(x, dtype=float))
        return self.engine_step(x)

    def inverse(self, X, seed=None):
        """Pas adjoint ; seed est l'état de départ pour les lagrangiens discrets"""
        if self.affine is not None:
            return self.affine.inverse()(X)
        X = np.asarray(X, dtype=float)
        spec = self.spec_at(X if seed is None else seed)
        return inverse_step(spec, X, self.cfg, guess=self.predictor(X, -1.0))

    @property
    def is_affine(self):
        return self.affine is not None

    def __repr__(self):
        kind = 'affine' if self.affine is not None else 'implicite'
        return f"SchemeHandle({self.name}, {self.label}, h={self.h:g}, {kind})"


def _identity_handle(name, label, h, vector_field, cfg):
    logger.info(f"Potentiels nuls pour {name} : pas identité")
    return SchemeHandle(name=name, label=label, h=h, vector_field=vector_field,
                        affine=AffineMap3.identity(), cfg=cfg)


def _spec_handle(name, spec, h, vector_field, cfg, potentials=None):
    affine = assemble_affine(spec) if spec.is_affine else None
    return SchemeHandle(
        name=name, label=classify(spec.sigma, spec.Sigma).label, h=h,
        vector_field=vector_field, spec=spec, affine=affine, cfg=cfg,
        potentials=potentials,
    )


# -- Euler symplectique ------------------------------------------------------

def se_se_spec(F1, F3, h):
    """
    Composition de deux pas d'Euler symplectique, pour les potentiels de la
    paire d'axes (1, 3) : σ = (3,2,1), Σ = 1, ε = −1.
    """
    phi = PotentialFn.bilinear(1, 2) + PotentialFn.from_scalar(F1, (3, 2, 1), h, name='h·F1')
    Phi = PotentialFn.bilinear(3, 2) + PotentialFn.from_scalar(F3, (3, 2, 1), h, name='h·F3')
    return GeneratingFormSpec(phi=phi, Phi=Phi, eps=-1, sigma=SE_SE_SIGMA, Sigma=SE_SE_SIGMA_CAP)


def make_se_se(F1, F3, h, cfg=None, vector_field=None):
    cfg = cfg or SolverConfig()
    return _spec_handle('se-se', se_se_spec(F1, F3, h), h, vector_field, cfg)


# -- Lagrangien discret ------------------------------------------------------

def legendre(H, param, q, v, cfg=None, seed=0.0):
    """p tel que ∂_pH(param, q, p) = v ; H est vu sur ses emplacements (param, q, p)"""
    point = (param, q, v)
    if H.form is not None:
        Q = np.asarray(H.form.Q, dtype=float)
        b = np.asarray(H.form.b, dtype=float)
        if abs(Q[2, 2]) <= LEGENDRE_TOL:
            raise LegendreFailure('Transformation de Legendre dégénérée (∂ppH nul)',
                                  equation='legendre', point=point)
        return float((v - Q[2, 0] * param - Q[2, 1] * q - b[2]) / Q[2, 2])

    cfg = replace(cfg or SolverConfig(), twist_tol=LEGENDRE_TOL)
    try:
        return solve_scalar(
            residual=lambda p: H.grad((param, q, p))[2] - v,
            derivative=lambda p: H.hess((param, q, p), cfg.fd_step)[2, 2],
            x0=float(seed), cfg=cfg, equation='legendre', point=point, info=SolveInfo(),
        )
    except SolverError as exc:
        raise LegendreFailure(f"Transformation de Legendre impossible : {exc}") from exc


def _lagrangian_form(H, h):
    """L_d exact (rationnel) pour un H quadratique ; symboles param=1, q=2, Q=3, p=4"""
    Hr = H.form.relabel({1: 1, 2: 2, 3: 4}).as_exact()
    velocity = (_sym(3) - _sym(2)) / qc.exact(h)
    try:
        p = qc.solve_linear(qc.partial(Hr, 4) - velocity, 4, rtol=LEGENDRE_TOL)
    except DegenerateCoefficient as exc:
        raise LegendreFailure(f"Transformation de Legendre dégénérée : {exc}") from exc
    return qc.product(p, _sym(3) - _sym(2)) - h * qc.substitute(Hr, 4, p)


class DiscreteLagrangian:
    """
    L_d(param, q, Q) = p̂·(Q − q) − h·H(param, q, p̂) où ∂_pH(param, q, p̂) = (Q − q)/h.

    Se comporte comme un potentiel scalaire de ses trois arguments.
    """

    def __init__(self, H, h, seed=0.0, cfg=None, name='L_d'):
        self.H = H
        self.h = float(h)
        self.seed = float(seed)
        self.cfg = cfg or SolverConfig()
        self.name = name
        self.form = _lagrangian_form(H, self.h) if H.form is not None else None

    def momentum(self, u):
        param, q, Q = u
        return legendre(self.H, param, q, (Q - q) / self.h, self.cfg, self.seed)

    def value(self, u):
        param, q, Q = u
        p = self.momentum(u)
        return p * (Q - q) - self.h * self.H.value((param, q, p))

    def grad(self, u):
        param, q, _ = u
        p = self.momentum(u)
        g = self.H.grad((param, q, p))
        return np.array([-self.h * g[0], -self.h * g[1] - p, p])

    def hess(self, u, fd_step=None):
        param, q, _ = u
        h = self.h
        p = self.momentum(u)
        H2 = self.H.hess((param, q, p), self.cfg.fd_step if fd_step is None else fd_step)
        Hpp = H2[2, 2]
        if abs(Hpp) <= LEGENDRE_TOL:
            raise LegendreFailure('∂ppH nul au moment résolu', equation='legendre',
                                  point=tuple(u))
        P_a = -H2[2, 0] / Hpp
        P_q = (-H2[2, 1] - 1.0 / h) / Hpp
        P_Q = 1.0 / (h * Hpp)
        L_aa = -h * (H2[0, 0] + H2[0, 2] * P_a)
        L_qa = -h * (H2[1, 0] + H2[1, 2] * P_a) - P_a
        L_qq = -h * (H2[1, 1] + H2[1, 2] * P_q) - P_q
        return np.array([
            [L_aa, L_qa, P_a],
            [L_qa, L_qq, P_q],
            [P_a, P_q, P_Q],
        ])

    def __repr__(self):
        return self.name


def dl_hamiltonians(F1, F2):
    """H¹(param, q, p) = F1(param, q, p) et H²(param, q, p) = −F2(q, param, p)"""
    H1 = PotentialFn.from_scalar(F1, (1, 2, 3), name='F1')
    H2 = PotentialFn.from_scalar(F2, (2, 1, 3), -1.0, name='-F2')
    return H1, H2


def dl_se_spec(F1, F2, h, seed=0.0, cfg=None):
    """Lagrangien discret de F1 suivi d'Euler symplectique sur F2 : Σ = (1,3,2), ε = +1"""
    H1, _ = dl_hamiltonians(F1, F2)
    L1 = DiscreteLagrangian(H1, h, seed, cfg, name='L_d¹')
    phi = PotentialFn.from_scalar(L1, (3, 2, 1), -1.0, name='-L_d¹')
    Phi = PotentialFn.bilinear(3, 2) + PotentialFn.from_scalar(F2, (3, 1, 2), -h, name='-h·F2')
    return GeneratingFormSpec(phi=phi, Phi=Phi, eps=1, sigma=DL_SE_SIGMA, Sigma=DL_SE_SIGMA_CAP)


def dl_dl_spec(F1, F2, h, seed=0.0, cfg=None):
    """Deux lagrangiens discrets successifs : Σ = (3,1,2), ε = −1"""
    H1, H2 = dl_hamiltonians(F1, F2)
    L1 = DiscreteLagrangian(H1, h, seed, cfg, name='L_d¹')
    L2 = DiscreteLagrangian(H2, h, seed, cfg, name='L_d²')
    phi = PotentialFn.from_scalar(L1, (3, 2, 1), -1.0, name='-L_d¹')
    Phi = PotentialFn.from_scalar(L2, (1, 3, 2), 1.0, name='L_d²')
    return GeneratingFormSpec(phi=phi, Phi=Phi, eps=-1, sigma=DL_DL_SIGMA, Sigma=DL_DL_SIGMA_CAP)


def _make_dl(name, build_spec, F1, F2, h, cfg, vector_field):
    cfg = cfg or SolverConfig()
    if F1.is_zero and F2.is_zero:
        return _identity_handle(name, classify(*_DL_PAIRS[name]).label, h, vector_field, cfg)
    if F1.form is not None and F2.form is not None:
        return _spec_handle(name, build_spec(F1, F2, h, cfg=cfg), h, vector_field, cfg)
    # le moment de Legendre est initialisé sur x3 à chaque pas
    template = build_spec(F1, F2, h, cfg=cfg)
    return SchemeHandle(
        name=name, label=classify(template.sigma, template.Sigma).label, h=h,
        vector_field=vector_field, cfg=cfg,
        spec_factory=lambda x: build_spec(F1, F2, h, seed=x[2], cfg=cfg),
    )


_DL_PAIRS = {
    'dl-se': (DL_SE_SIGMA, DL_SE_SIGMA_CAP),
    'dl-dl': (DL_DL_SIGMA, DL_DL_SIGMA_CAP),
}


def make_dl_se(F1, F2, h, cfg=None, vector_field=None):
    return _make_dl('dl-se', dl_se_spec, F1, F2, h, cfg, vector_field)


def make_dl_dl(F1, F2, h, cfg=None, vector_field=None):
    return _make_dl('dl-dl', dl_dl_spec, F1, F2, h, cfg, vector_field)


# -- Dérivations S1 / S2 pour un champ linéaire -------------------------------

def _check_pole(value, what):
    value = float(value)
    if abs(value) <= POLE_TOL:
        raise StepTooLarge(f"Pas trop grand : {what} = {value:.3e} proche de zéro", value=value)


def _check_twist(L, *entries):
    scale = max(1.0, float(np.max(np.abs(L.A))))
    for i, j in entries:
        if abs(L.a(i, j)) <= TWIST_RTOL * scale:
            raise TwistDegenerate(f"Torsion dégénérée : a{i}{j} = {L.a(i, j):.3e}",
                                  entry=(i, j))


def _solve(e, sym):
    try:
        return qc.solve_linear(e, sym)
    except DegenerateCoefficient as exc:
        raise TwistDegenerate(f"Élimination impossible : {exc}") from exc


def _exact_entries(L):
    """a(i, j) en rationnel : les dérivations S1/S2 sont faites sans arrondi"""
    return lambda i, j: qc.exact(L.a(i, j))


def _expect_free_of(expr, symbols, label):
    """Annule des coefficients qui doivent être nuls à l'arrondi près"""
    scale = max(1.0, float(np.max(np.abs(expr.coeffs))))
    for sym in symbols:
        c = expr.coeff(sym)
        if abs(c) > MISMATCH_RTOL * scale:
            raise DerivationMismatch(
                f"{label} : le terme de compatibilité dépend encore de "
                f"{qc.SYMBOLS[sym - 1]} (coefficient {float(c):.3e})",
                symbol=sym, coefficient=float(c),
            )
        expr = expr.substitute(sym, qc.AffineExpr.const(0.0))
    return expr


def _s1_quispel(L, h):
    a = _exact_entries(L)
    _check_pole(1.0 - h * a(2, 2), '1 − h·a22')
    _check_pole(1.0 - h * a(2, 2) + h * h * a(1, 1) * a(3, 3), 'k1')
    corr = h * h * a(1, 1) * a(3, 3)

    c = _solve(_sym(qc.X2) - h * L.row_expr(2, (qc.x1, qc.X2, qc.x3)), qc.X2)
    E1 = _sym(qc.X1) - _sym(qc.x1) - h * L.row_expr(1, (qc.x1, qc.X2, qc.x3))
    E2 = (_sym(qc.X2) - _sym(qc.x2) - h * L.row_expr(2, (qc.x1, qc.X2, qc.x3))
          + corr * (_sym(qc.X2) - c))
    E3 = _sym(qc.X3) - _sym(qc.x3) - h * L.row_expr(3, (qc.X1, qc.X2, qc.x3))

    X2_fwd = _solve(E2, qc.X2)
    x3_tilde = _solve(E1.substitute(qc.X2, X2_fwd), qc.x3)
    phi = qc.antiderivative(x3_tilde, qc.x2)

    x3_hat = _solve(E1, qc.x3)
    X3_back = _solve(E3.substitute(qc.x3, x3_hat), qc.X3)
    Phi0 = -qc.antiderivative(X3_back, qc.X2)

    x2_hat = _solve(E2.substitute(qc.x3, x3_hat), qc.x2)
    compat = (qc.partial(phi, qc.X1) - qc.partial(Phi0, qc.x1)).substitute(qc.x2, x2_hat)
    compat = _expect_free_of(compat, (qc.X2,), 's1-quispel')
    return phi, Phi0 + qc.antiderivative(compat, qc.x1)


def _s1_az(L, h):
    a = _exact_entries(L)
    l1 = 1.0 - h * a(1, 2) * a(2, 3) / a(1, 3)
    _check_pole(l1, 'l1')

    x3_tilde = _solve(_sym(qc.X1) - _sym(qc.x1) - h * L.row_expr(1), qc.x3)
    phi = qc.antiderivative(x3_tilde, qc.x2)

    x3_hat = x3_tilde.substitute(qc.x2, _sym(qc.X2))
    E3 = (_sym(qc.X3) - x3_hat
          - h * L.row_expr(3, (qc.x1, qc.X2, qc.x3)).substitute(qc.x3, x3_hat)
          - h * (a(1, 2) / a(1, 3)) * L.row_expr(2, (qc.x1, qc.X2, qc.X3)))
    X3_back = _solve(E3, qc.X3)
    Phi0 = -qc.antiderivative(X3_back, qc.X2)

    X2_fwd = _sym(qc.x2) + h * L.row_expr(2).substitute(qc.x3, x3_tilde)
    compat = (qc.partial(phi, qc.X1) - qc.partial(Phi0, qc.x1)).substitute(qc.X2, X2_fwd)
    dropped = compat.coeff(qc.x2)
    logger.debug(f"s1-az : terme en x2 d'ordre h écarté ({float(dropped):.3e})")
    compat = compat.substitute(qc.x2, qc.AffineExpr.const(0.0))
    return phi, Phi0 + qc.antiderivative(compat, qc.x1)


S1_VARIANTS = {'quispel': _s1_quispel, 'az': _s1_az}


def derive_s1_potentials(L, h, variant='quispel'):
    """
    (φ, Φ) de la classe S1 sur les symboles canoniques :
        x3 = ∂x2 φ(x1, x2, X1),  ∂X1 φ = ∂x1 Φ(x1, X1, X2),  X3 = −∂X2 Φ
    """
    if not isinstance(L, LinearField):
        L = LinearField(L)
    try:
        derive = S1_VARIANTS[variant]
    except KeyError:
        raise ValueError(f"Variante S1 inconnue : {variant}")
    _check_twist(L, (1, 3))
    phi, Phi = derive(L, qc.exact(h))
    logger.debug(f"S1 {variant} h={h:g} : φ={phi!r} Φ={Phi!r}")
    return phi, Phi


def derive_s2_potentials(L, h):
    """
    (φ, Φ) de la classe S2 :
        x3 = ∂x2 φ(x1, x2, X1),  ∂X1 φ = ∂x1 Φ(x1, X1, X3),  X2 = ∂X3 Φ
    """
    if not isinstance(L, LinearField):
        L = LinearField(L)
    h = qc.exact(h)
    a = _exact_entries(L)
    _check_twist(L, (1, 2), (1, 3))
    _check_pole(1.0 - h * a(3, 3), '1 − h·a33')
    _check_pole(1.0 - h * a(3, 3) + h * h * a(1, 1) * a(2, 2), 'm1')
    corr = h * h * a(1, 1) * a(2, 2)

    c = _solve(_sym(qc.X3) - h * L.row_expr(3, (qc.x1, qc.x2, qc.X3)), qc.X3)
    E1 = _sym(qc.X1) - _sym(qc.x1) - h * L.row_expr(1, (qc.x1, qc.x2, qc.X3))
    E2 = _sym(qc.X2) - _sym(qc.x2) - h * L.row_expr(2, (qc.X1, qc.x2, qc.X3))
    E3 = (_sym(qc.X3) - _sym(qc.x3) - h * L.row_expr(3, (qc.x1, qc.x2, qc.X3))
          + corr * (_sym(qc.X3) - c))

    X3_fwd = _solve(E3, qc.X3)
    x3_tilde = _solve(E1.substitute(qc.X3, X3_fwd), qc.x3)
    phi = qc.antiderivative(x3_tilde, qc.x2)

    x2_hat = _solve(E1, qc.x2)
    X2_back = _solve(E2.substitute(qc.x2, x2_hat), qc.X2)
    Phi0 = qc.antiderivative(X2_back, qc.X3)

    compat = qc.partial(phi, qc.X1).substitute(qc.x2, x2_hat) - qc.partial(Phi0, qc.x1)
    compat = _expect_free_of(compat, (qc.X3,), 's2-quispel')
    Phi = Phi0 + qc.antiderivative(compat, qc.x1)
    logger.debug(f"S2 h={float(h):g} : φ={phi!r} Φ={Phi!r}")
    return phi, Phi


def _slot_potential(form, slots, scale=1.0, name=''):
    """Potentiel de base u, v, w ↦ scale·form avec les symboles slots en u, v, w"""
    try:
        form.restrict(slots)
    except ValueError as exc:
        raise DerivationMismatch(f"{name} : {exc}") from exc
    mapping = {sym: slot for slot, sym in enumerate(slots, start=1)}
    return PotentialFn.from_form(form.relabel(mapping) * scale, name=name)


def s1_spec(phi, Phi):
    """φ(X1, x2, x1) et −Φ(X1, X2, x1) en emplacements de base : σ = Σ = (3,2,1), ε = +1"""
    return GeneratingFormSpec(
        phi=_slot_potential(phi, (qc.X1, qc.x2, qc.x1), name='φ'),
        Phi=_slot_potential(Phi, (qc.X1, qc.X2, qc.x1), -1.0, name='-Φ'),
        eps=1, sigma=S1_SIGMA, Sigma=S1_SIGMA_CAP,
    )


def s2_spec(phi, Phi):
    """φ(X1, x2, x1) et Φ(X1, X3, x1) : σ = (3,2,1), Σ = (2,3,1), ε = −1"""
    return GeneratingFormSpec(
        phi=_slot_potential(phi, (qc.X1, qc.x2, qc.x1), name='φ'),
        Phi=_slot_potential(Phi, (qc.X1, qc.X3, qc.x1), name='Φ'),
        eps=-1, sigma=S2_SIGMA, Sigma=S2_SIGMA_CAP,
    )


def _as_linear(L):
    return L if isinstance(L, LinearField) else LinearField(L)


def make_s1(L, h, variant='quispel', cfg=None):
    L, cfg = _as_linear(L), cfg or SolverConfig()
    name = f"s1-{variant}"
    if not np.any(L.A):
        return _identity_handle(name, 'S1', h, L, cfg)
    phi, Phi = derive_s1_potentials(L, h, variant)
    return _spec_handle(name, s1_spec(phi, Phi), h, L, cfg, potentials=(phi, Phi))


def make_s2(L, h, cfg=None):
    L, cfg = _as_linear(L), cfg or SolverConfig()
    if not np.any(L.A):
        return _identity_handle('s2-quispel', 'S2', h, L, cfg)
    phi, Phi = derive_s2_potentials(L, h)
    return _spec_handle('s2-quispel', s2_spec(phi, Phi), h, L, cfg, potentials=(phi, Phi))


# -- Application semi-implicite corrigée --------------------------------------

def quispel_corrected_step(L, h, x, orientation='S1', corrected=True):
    """
    Pas semi-implicite préservant le volume.

    Orientation S1 : X2 implicite en (x1, X2, x3), puis X1 et X3 explicites.
    Orientation S2 : X3 implicite en (x1, x2, X3), puis X1 et X2.
    La correction h²·a_ii·a_jj·(X − c) est omise si corrected est faux.
    """
    L = _as_linear(L)
    a = L.a
    x1, x2, x3 = np.asarray(x, dtype=float)
    if orientation == 'S1':
        den = 1.0 - h * a(2, 2)
        _check_pole(den, '1 − h·a22')
        corr = h * h * a(1, 1) * a(3, 3) if corrected else 0.0
        _check_pole(den + corr, 'k1')
        c = h * (a(2, 1) * x1 + a(2, 3) * x3) / den
        X2 = (x2 + h * a(2, 1) * x1 + h * a(2, 3) * x3 + corr * c) / (den + corr)
        X1 = x1 + h * (a(1, 1) * x1 + a(1, 2) * X2 + a(1, 3) * x3)
        X3 = x3 + h * (a(3, 1) * X1 + a(3, 2) * X2 + a(3, 3) * x3)
    elif orientation == 'S2':
        den = 1.0 - h * a(3, 3)
        _check_pole(den, '1 − h·a33')
        corr = h * h * a(1, 1) * a(2, 2) if corrected else 0.0
        _check_pole(den + corr, 'm1')
        c = h * (a(3, 1) * x1 + a(3, 2) * x2) / den
        X3 = (x3 + h * a(3, 1) * x1 + h * a(3, 2) * x2 + corr * c) / (den + corr)
        X1 = x1 + h * (a(1, 1) * x1 + a(1, 2) * x2 + a(1, 3) * X3)
        X2 = x2 + h * (a(2, 1) * X1 + a(2, 2) * x2 + a(2, 3) * X3)
    else:
        raise ValueError(f"Orientation inconnue : {orientation}")
    return np.array([X1, X2, X3])


def semi_implicit_step(L, h, x, orientation='S1'):
    """Pas semi-implicite sans correction : volume préservé seulement si a_ii·a_jj = 0"""
    return quispel_corrected_step(L, h, x, orientation, corrected=False)


def quispel_corrected_map(L, h, orientation='S1', corrected=True):
    """Le pas semi-implicite comme AffineMap3, évalué sur la base canonique"""
    d = quispel_corrected_step(L, h, np.zeros(3), orientation, corrected)
    M = np.column_stack([
        quispel_corrected_step(L, h, e, orientation, corrected) - d for e in np.eye(3)
    ])
    return AffineMap3(M, d)


def make_quispel_corrected(L, h, orientation='S1', corrected=True, cfg=None):
    L = _as_linear(L)
    name = 'quispel-corrected' if corrected else 'semi-implicit'
    return SchemeHandle(
        name=name, label=orientation, h=h, vector_field=L, cfg=cfg or SolverConfig(),
        affine=quispel_corrected_map(L, h, orientation, corrected),
    )


# -- Références ---------------------------------------------------------------

def make_euler(vector_field, h, cfg=None):
    affine = None
    if vector_field.linear is not None:
        affine = AffineMap3(np.eye(3) + h * vector_field.linear)
    return SchemeHandle(
        name='euler', label='baseline', h=h, vector_field=vector_field,
        cfg=cfg or SolverConfig(), affine=affine,
        stepper=lambda x: x + h * vector_field(x),
    )


def _rk4_step(vector_field, h, x):
    k1 = vector_field(x)
    k2 = vector_field(x + 0.5 * h * k1)
    k3 = vector_field(x + 0.5 * h * k2)
    k4 = vector_field(x + h * k3)
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def make_rk4(vector_field, h, cfg=None):
    affine = None
    if vector_field.linear is not None:
        hA = h * vector_field.linear
        M, term = np.eye(3), np.eye(3)
        for k in range(1, 5):
            term = term @ hA / k
            M = M + term
        affine = AffineMap3(M)
    return SchemeHandle(
        name='rk4', label='baseline', h=h, vector_field=vector_field,
        cfg=cfg or SolverConfig(), affine=affine,
        stepper=lambda x: _rk4_step(vector_field, h, x),
    )


# -- Registre -----------------------------------------------------------------

def _linear_only(name, vector_field):
    if vector_field.linear is None:
        raise UnsupportedField(f"Le schéma {name} exige un champ linéaire")
    return LinearField(vector_field.linear, name=vector_field.name)


def _build_se_se(vector_field, h, cfg):
    p = potentials_for(vector_field, (1, 3))
    return make_se_se(p.F1, p.F3, h, cfg, vector_field)


def _build_dl_se(vector_field, h, cfg):
    p = potentials_for(vector_field, (1, 2))
    return make_dl_se(p.F1, p.F2, h, cfg, vector_field)


def _build_dl_dl(vector_field, h, cfg):
    p = potentials_for(vector_field, (1, 2))
    return make_dl_dl(p.F1, p.F2, h, cfg, vector_field)


REGISTRY = {
    'se-se': _build_se_se,
    'dl-se': _build_dl_se,
    'dl-dl': _build_dl_dl,
    's1-quispel': lambda f, h, cfg: make_s1(_linear_only('s1-quispel', f), h, 'quispel', cfg),
    's1-az': lambda f, h, cfg: make_s1(_linear_only('s1-az', f), h, 'az', cfg),
    's2-quispel': lambda f, h, cfg: make_s2(_linear_only('s2-quispel', f), h, cfg),
    'quispel-corrected': lambda f, h, cfg: make_quispel_corrected(
        _linear_only('quispel-corrected', f), h, cfg=cfg),
    'euler': make_euler,
    'rk4': make_rk4,
}

VOLUME_PRESERVING = ('se-se', 'dl-se', 'dl-dl', 's1-quispel', 's1-az', 's2-quispel',
                     'quispel-corrected')


def make_scheme(name, vector_field, h, cfg=None):
    """Construit le schéma name pour le champ donné"""
    try:
        build = REGISTRY[name]
    except KeyError:
        raise ValueError(f"Schéma inconnu : {name} (choix : {', '.join(REGISTRY)})")
    h = float(h)
    if not h > 0.0:
        raise ValueError(f"Le pas h doit être > 0, reçu {h}")
    return build(vector_field, h, cfg or SolverConfig())
