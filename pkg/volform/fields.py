"""
Champs de vecteurs à divergence nulle sur ℝ³ et leurs potentiels F1, F2, F3.

Un champ s'écrit a1 = ∂2F3 − ∂3F2, a2 = ∂3F1 − ∂1F3, a3 = ∂1F2 − ∂2F1.
Seuls deux potentiels sont indépendants : l'extraction (normalisation de
Weyl) annule celui qui n'appartient pas à la paire d'axes demandée.
"""
import logging
import warnings

import numpy as np
from scipy import integrate

from . import quadcalc as qc
from .exceptions import FieldNotDivergenceFree, QuadratureFailure, UnknownField

logger = logging.getLogger(__name__)

FD_STEP = np.cbrt(np.finfo(float).eps)
QUAD_EPSABS = 1e-10

# paire d'axes -> triplet cyclique (i, j, k) avec F^j = 0
AXIS_PAIRS = {
    (1, 3): (1, 2, 3),
    (1, 2): (2, 3, 1),
    (2, 3): (3, 1, 2),
}


def _axis_triplet(axis_pair):
    key = tuple(sorted(int(v) for v in axis_pair))
    try:
        return key, AXIS_PAIRS[key]
    except KeyError:
        raise UnknownField(f"Paire d'axes inconnue : {axis_pair}")


def _fd_steps(x, fd_step):
    return fd_step * (1.0 + np.abs(x))


def fd_jacobian(fn, x, fd_step=FD_STEP):
    """Jacobienne par différences centrées, colonne j = ∂fn/∂x_j"""
    x = np.asarray(x, dtype=float)
    steps = _fd_steps(x, fd_step)
    columns = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = steps[j]
        columns.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2.0 * steps[j]))
    return np.stack(columns, axis=-1)


class Field3:
    """Champ de vecteurs x ↦ a(x) sur ℝ³"""

    def __init__(self, a, jac=None, name='field', linear=None, potentials_hook=None):
        self._a = a
        self._jac = jac
        self.name = name
        self.linear = None if linear is None else np.array(linear, dtype=float)
        self._potentials_hook = potentials_hook

    def __call__(self, x):
        return np.asarray(self._a(np.asarray(x, dtype=float)), dtype=float)

    def component(self, i):
        return lambda x: self(x)[i - 1]

    @property
    def has_analytic_jacobian(self):
        return self._jac is not None

    def jacobian(self, x, fd_step=FD_STEP):
        x = np.asarray(x, dtype=float)
        if self._jac is not None:
            return np.asarray(self._jac(x), dtype=float)
        return fd_jacobian(self, x, fd_step)

    def divergence(self, x, fd_step=FD_STEP):
        return float(np.trace(self.jacobian(x, fd_step)))

    def closed_form_potentials(self, axis_pair):
        if self._potentials_hook is None:
            return None
        return self._potentials_hook(axis_pair)

    def __repr__(self):
        return f"Field3({self.name})"


class LinearField(Field3):
    """Champ linéaire x ↦ Ax, avec trace(A) = 0"""

    def __init__(self, A, name='linear'):
        A = np.array(A, dtype=float)
        if A.shape != (3, 3):
            raise UnknownField(f"Matrice 3x3 attendue, reçu {A.shape}")
        trace = float(np.trace(A))
        if abs(trace) > 1e-12 * (1.0 + np.linalg.norm(A)):
            raise FieldNotDivergenceFree(f"Trace non nulle : {trace:.3e}")
        A.setflags(write=False)
        self.A = A
        super().__init__(lambda x: A @ x, jac=lambda x: A, name=name, linear=A)

    def a(self, i, j):
        """Coefficient a_ij (1-based)"""
        return float(self.A[i - 1, j - 1])

    def row_expr(self, i, symbols=(qc.x1, qc.x2, qc.x3)):
        """a_i comme expression affine des symboles donnés"""
        return qc.AffineExpr.combination(
            {sym: self.A[i - 1, j] for j, sym in enumerate(symbols)}
        )


class ScalarPotential:
    """Potentiel scalaire F(x1, x2, x3) avec dérivées premières et secondes"""

    form = None

    def value(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def hess(self, x, fd_step=FD_STEP):
        return fd_jacobian(self.grad, x, fd_step)

    def __call__(self, x):
        return self.value(x)

    @property
    def is_zero(self):
        return False


def _pad6(x):
    s = np.zeros(qc.NSYM)
    s[:3] = x
    return s


class QuadPotential(ScalarPotential):
    """Potentiel quadratique donné par une QuadForm sur les symboles x1..x3"""

    def __init__(self, form):
        for sym in (qc.X1, qc.X2, qc.X3):
            if form.uses(sym):
                raise ValueError("Un potentiel ne dépend que de x1, x2, x3")
        self.form = form

    def value(self, x):
        return self.form.eval(_pad6(x))

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        Q = np.asarray(self.form.Q[:3, :3], dtype=float)
        return Q @ x + np.asarray(self.form.b[:3], dtype=float)

    def hess(self, x, fd_step=None):
        return np.array(self.form.Q[:3, :3], dtype=float)

    @property
    def is_zero(self):
        return not (np.any(self.form.Q) or np.any(self.form.b) or self.form.c)

    def __repr__(self):
        return f"QuadPotential({self.form!r})"


ZERO = QuadPotential(qc.QuadForm.zero())


class CallablePotential(ScalarPotential):
    """Potentiel défini par des fonctions ; dérivées par différences centrées à défaut"""

    def __init__(self, fn, grad=None, hess=None, name='F'):
        self._fn = fn
        self._grad = grad
        self._hess = hess
        self.name = name

    def value(self, x):
        return float(self._fn(np.asarray(x, dtype=float)))

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        if self._grad is not None:
            return np.asarray(self._grad(x), dtype=float)
        steps = _fd_steps(x, FD_STEP)
        out = np.zeros(3)
        for j in range(3):
            e = np.zeros(3)
            e[j] = steps[j]
            out[j] = (self.value(x + e) - self.value(x - e)) / (2.0 * steps[j])
        return out

    def hess(self, x, fd_step=FD_STEP):
        if self._hess is not None:
            return np.asarray(self._hess(np.asarray(x, dtype=float)), dtype=float)
        H = fd_jacobian(self.grad, x, fd_step)
        return 0.5 * (H + H.T)

    def __repr__(self):
        return f"CallablePotential({self.name})"


class PotentialTriple:
    """Triplet (F1, F2, F3) ; un potentiel absent vaut zéro"""

    def __init__(self, F1=None, F2=None, F3=None):
        self.F1 = F1 if F1 is not None else ZERO
        self.F2 = F2 if F2 is not None else ZERO
        self.F3 = F3 if F3 is not None else ZERO

    def __getitem__(self, i):
        return (self.F1, self.F2, self.F3)[i - 1]

    @property
    def is_quadratic(self):
        return all(F.form is not None for F in (self.F1, self.F2, self.F3))

    @property
    def is_zero(self):
        return all(F.is_zero for F in (self.F1, self.F2, self.F3))

    def __repr__(self):
        return f"PotentialTriple(F1={self.F1!r}, F2={self.F2!r}, F3={self.F3!r})"


def field_from_potentials(p, name='potentials'):
    """Champ a = rot-like(F) ; la divergence est nulle par construction"""

    def a(x):
        g1, g2, g3 = p.F1.grad(x), p.F2.grad(x), p.F3.grad(x)
        return np.array([
            g3[1] - g2[2],
            g1[2] - g3[0],
            g2[0] - g1[1],
        ])

    def jac(x):
        H1, H2, H3 = p.F1.hess(x), p.F2.hess(x), p.F3.hess(x)
        return np.array([
            H3[1] - H2[2],
            H1[2] - H3[0],
            H2[0] - H1[1],
        ])

    linear = None
    if p.is_quadratic:
        offset = a(np.zeros(3))
        if not np.any(offset):
            linear = jac(np.zeros(3))
    return Field3(a, jac=jac, name=name, linear=linear)


def _quad(fn, upper):
    """∫₀^upper fn(s) ds, erreur absolue QUAD_EPSABS"""
    if upper == 0.0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter('error', integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(fn, 0.0, upper, epsabs=QUAD_EPSABS, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(f"Quadrature non convergée jusqu'à {upper:.6g} : {exc}")
    return value


def _with(x, idx, value):
    y = np.array(x, dtype=float)
    y[idx] = value
    return y


def extract_potentials(f, axis_pair=(1, 3)):
    """
    Potentiels de Weyl d'un champ à divergence nulle.

    Pour le triplet cyclique (i, j, k) de la paire d'axes :
    F^k = ∫₀^{x_j} a_i ds, F^i = −∫₀^{x_j} a_k ds + ∫₀^{x_k} a_j(x_j=0, x_k=s) ds,
    F^j = 0. Les gradients sont dérivés sous l'intégrale.
    """
    _, (i, j, k) = _axis_triplet(axis_pair)
    I, J, K = i - 1, j - 1, k - 1

    def Fk(x):
        return _quad(lambda s: f(_with(x, J, s))[I], x[J])

    def Fk_grad(x):
        g = np.zeros(3)
        g[J] = f(x)[I]
        g[I] = _quad(lambda s: f.jacobian(_with(x, J, s))[I, I], x[J])
        g[K] = _quad(lambda s: f.jacobian(_with(x, J, s))[I, K], x[J])
        return g

    def Fi(x):
        base = _with(x, J, 0.0)
        return (-_quad(lambda s: f(_with(x, J, s))[K], x[J])
                + _quad(lambda s: f(_with(base, K, s))[J], x[K]))

    def Fi_grad(x):
        base = _with(x, J, 0.0)
        g = np.zeros(3)
        g[J] = -f(x)[K]
        g[I] = (-_quad(lambda s: f.jacobian(_with(x, J, s))[K, I], x[J])
                + _quad(lambda s: f.jacobian(_with(base, K, s))[J, I], x[K]))
        g[K] = (-_quad(lambda s: f.jacobian(_with(x, J, s))[K, K], x[J])
                + f(base)[J])
        return g

    potentials = [None, None, None]
    potentials[K] = CallablePotential(Fk, Fk_grad, name=f"F{k}")
    potentials[I] = CallablePotential(Fi, Fi_grad, name=f"F{i}")
    return PotentialTriple(*potentials)


def linear_potentials(L, axis_pair=(1, 3)):
    """Même construction, évaluée symboliquement : potentiels quadratiques exacts"""
    _, (i, j, k) = _axis_triplet(axis_pair)
    a_i, a_j, a_k = L.row_expr(i), L.row_expr(j), L.row_expr(k)
    Fk = qc.antiderivative(a_i, j)
    Fi = (-qc.antiderivative(a_k, j)
          + qc.antiderivative(a_j.substitute(j, qc.AffineExpr.const(0.0)), k))
    potentials = [None, None, None]
    potentials[k - 1] = QuadPotential(Fk)
    potentials[i - 1] = QuadPotential(Fi)
    return PotentialTriple(*potentials)


def potentials_for(field, axis_pair=(1, 3)):
    """Potentiels d'un champ : symboliques si linéaire, forme fermée, sinon quadrature"""
    if field.linear is not None:
        return linear_potentials(LinearField(field.linear), axis_pair)
    closed = field.closed_form_potentials(axis_pair)
    if closed is not None:
        return closed
    return extract_potentials(field, axis_pair)


def _abc_potentials(A, B, C):
    sin, cos = np.sin, np.cos

    def pair_13():
        F3 = CallablePotential(
            lambda x: A * x[1] * sin(x[2]) + C * sin(x[1]),
            lambda x: np.array([0.0, A * sin(x[2]) + C * cos(x[1]), A * x[1] * cos(x[2])]),
            lambda x: np.array([
                [0.0, 0.0, 0.0],
                [0.0, -C * sin(x[1]), A * cos(x[2])],
                [0.0, A * cos(x[2]), -A * x[1] * sin(x[2])],
            ]),
            name='F3',
        )
        F1 = CallablePotential(
            lambda x: (C * (cos(x[1]) - 1.0) - B * x[1] * cos(x[0])
                       + B * x[2] * sin(x[0]) + A * sin(x[2])),
            lambda x: np.array([
                B * x[1] * sin(x[0]) + B * x[2] * cos(x[0]),
                -C * sin(x[1]) - B * cos(x[0]),
                B * sin(x[0]) + A * cos(x[2]),
            ]),
            lambda x: np.array([
                [B * x[1] * cos(x[0]) - B * x[2] * sin(x[0]), B * sin(x[0]), B * cos(x[0])],
                [B * sin(x[0]), -C * cos(x[1]), 0.0],
                [B * cos(x[0]), 0.0, -A * sin(x[2])],
            ]),
            name='F1',
        )
        return PotentialTriple(F1=F1, F3=F3)

    def pair_12():
        F1 = CallablePotential(
            lambda x: B * x[2] * sin(x[0]) + A * sin(x[2]),
            lambda x: np.array([B * x[2] * cos(x[0]), 0.0, B * sin(x[0]) + A * cos(x[2])]),
            lambda x: np.array([
                [-B * x[2] * sin(x[0]), 0.0, B * cos(x[0])],
                [0.0, 0.0, 0.0],
                [B * cos(x[0]), 0.0, -A * sin(x[2])],
            ]),
            name='F1',
        )
        F2 = CallablePotential(
            lambda x: (A * (cos(x[2]) - 1.0) - C * x[2] * cos(x[1])
                       + C * x[0] * sin(x[1]) + B * sin(x[0])),
            lambda x: np.array([
                C * sin(x[1]) + B * cos(x[0]),
                C * x[2] * sin(x[1]) + C * x[0] * cos(x[1]),
                -A * sin(x[2]) - C * cos(x[1]),
            ]),
            lambda x: np.array([
                [-B * sin(x[0]), C * cos(x[1]), 0.0],
                [C * cos(x[1]), C * x[2] * cos(x[1]) - C * x[0] * sin(x[1]), C * sin(x[1])],
                [0.0, C * sin(x[1]), -A * cos(x[2])],
            ]),
            name='F2',
        )
        return PotentialTriple(F1=F1, F2=F2)

    closed = {(1, 3): pair_13, (1, 2): pair_12}

    def hook(axis_pair):
        key, _ = _axis_triplet(axis_pair)
        builder = closed.get(key)
        return builder() if builder is not None else None

    return hook


def abc_field(A=1.0, B=1.0, C=1.0):
    """Écoulement ABC, a = (A sin x3 + C cos x2, B sin x1 + A cos x3, C sin x2 + B cos x1)"""
    A, B, C = float(A), float(B), float(C)
    sin, cos = np.sin, np.cos

    def a(x):
        return np.array([
            A * sin(x[2]) + C * cos(x[1]),
            B * sin(x[0]) + A * cos(x[2]),
            C * sin(x[1]) + B * cos(x[0]),
        ])

    def jac(x):
        return np.array([
            [0.0, -C * sin(x[1]), A * cos(x[2])],
            [B * cos(x[0]), 0.0, -A * sin(x[2])],
            [-B * sin(x[0]), C * cos(x[1]), 0.0],
        ])

    linear = np.zeros((3, 3)) if A == B == C == 0.0 else None
    return Field3(a, jac=jac, name=f"abc(A={A:g},B={B:g},C={C:g})", linear=linear,
                  potentials_hook=_abc_potentials(A, B, C))


def builtin(name, **params):
    """Champs prédéfinis : "linear" (matrix=...) et "abc" (A, B, C)"""
    if name == 'linear':
        return LinearField(params.get('matrix', np.zeros((3, 3))))
    if name == 'abc':
        return abc_field(params.get('A', 1.0), params.get('B', 1.0), params.get('C', 1.0))
    raise UnknownField(f"Champ inconnu : {name}")
