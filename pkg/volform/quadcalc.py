"""
Calcul exact des polynômes de degré ≤ 2 sur les six symboles canoniques
(x1, x2, x3, X1, X2, X3), numérotés 1..6.

Une forme quadratique vaut q(s) = ½ sᵀQs + bᵀs + c avec Q symétrique.
Les coefficients sont des flottants double précision, ou des rationnels
(Fraction) pour une forme exacte. Toute opération mêlant une forme exacte
et une forme flottante est faite en rationnels : un flottant est converti
sans arrondi.
"""
import logging
from fractions import Fraction

import numpy as np

from .exceptions import DegenerateCoefficient, SelfReference

logger = logging.getLogger(__name__)

NSYM = 6
SYMBOLS = ('x1', 'x2', 'x3', 'X1', 'X2', 'X3')
x1, x2, x3, X1, X2, X3 = range(1, 7)

DEGENERACY_RTOL = 1e-10


def _check_symbol(sym):
    if not 1 <= sym <= NSYM:
        raise ValueError(f"Symbole hors de 1..{NSYM} : {sym}")
    return sym - 1


def exact(value):
    """Rationnel égal à value (entier, flottant ou Fraction)"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    return Fraction(float(value))


def _coeff_array(values, is_exact):
    values = np.asarray(values)
    if not is_exact:
        return np.array(values, dtype=float)
    return np.array([exact(v) for v in values.flat], dtype=object).reshape(values.shape)


def _zeros(shape, is_exact):
    return np.zeros(shape, dtype=object if is_exact else float)


def _frozen(array):
    array.setflags(write=False)
    return array


def _unify(*exprs):
    """Passe toutes les expressions en rationnels dès que l'une l'est"""
    if any(e.exact for e in exprs):
        return tuple(e.as_exact() for e in exprs)
    return exprs


class AffineExpr:
    """Expression affine coeffs·s + constant"""

    __slots__ = ('coeffs', 'constant')

    def __init__(self, coeffs=None, constant=0.0):
        is_exact = isinstance(constant, Fraction)
        coeffs = _zeros(NSYM, is_exact) if coeffs is None else np.asarray(coeffs)
        if coeffs.shape != (NSYM,):
            raise ValueError(f"Une expression affine attend {NSYM} coefficients")
        is_exact = is_exact or coeffs.dtype == object
        self.coeffs = _frozen(_coeff_array(coeffs, is_exact))
        self.constant = exact(constant) if is_exact else float(constant)

    @classmethod
    def symbol(cls, sym, scale=1.0):
        coeffs = _zeros(NSYM, isinstance(scale, Fraction))
        coeffs[_check_symbol(sym)] = scale
        return cls(coeffs)

    @classmethod
    def const(cls, value):
        return cls(None, value)

    @classmethod
    def combination(cls, terms, constant=0.0):
        """Construit Σ c·s_k à partir d'un dict {symbole: coefficient}"""
        coeffs = np.zeros(NSYM)
        for sym, coef in terms.items():
            coeffs[_check_symbol(sym)] += coef
        return cls(coeffs, constant)

    @property
    def exact(self):
        return self.coeffs.dtype == object

    def as_exact(self):
        return self if self.exact else AffineExpr(self.coeffs, exact(self.constant))

    def _lift(self, scalar):
        return exact(scalar) if self.exact else float(scalar)

    def coeff(self, sym):
        return float(self.coeffs[_check_symbol(sym)])

    def uses(self, sym):
        return self.coeffs[_check_symbol(sym)] != 0

    def __add__(self, other):
        if isinstance(other, AffineExpr):
            a, b = _unify(self, other)
            return AffineExpr(a.coeffs + b.coeffs, a.constant + b.constant)
        if isinstance(other, QuadForm):
            return NotImplemented
        if isinstance(other, Fraction) and not self.exact:
            return self.as_exact() + other
        return AffineExpr(self.coeffs, self.constant + self._lift(other))

    __radd__ = __add__

    def __neg__(self):
        return AffineExpr(-self.coeffs, -self.constant)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, Fraction) and not self.exact:
            return self.as_exact() * scalar
        scalar = self._lift(scalar)
        return AffineExpr(self.coeffs * scalar, self.constant * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, Fraction) and not self.exact:
            return self.as_exact() / scalar
        return self * (1 / self._lift(scalar))

    def eval(self, s):
        return float(np.asarray(self.coeffs, dtype=float) @ np.asarray(s, dtype=float)
                     + float(self.constant))

    def substitute(self, sym, e):
        """Remplace le symbole sym par l'expression affine e"""
        k = _check_symbol(sym)
        if e.coeffs[k] != 0:
            raise SelfReference(f"{SYMBOLS[k]} apparaît dans sa propre substitution")
        this, e = _unify(self, e)
        a = this.coeffs[k]
        coeffs = this.coeffs.copy()
        coeffs[k] = 0
        return AffineExpr(coeffs + a * e.coeffs, this.constant + a * e.constant)

    def relabel(self, mapping):
        olds, news = _relabel_indices(mapping)
        coeffs = _zeros(NSYM, self.exact)
        coeffs[news] = self.coeffs[olds]
        return AffineExpr(coeffs, self.constant)

    def as_quad(self):
        return QuadForm(None, self.coeffs, self.constant)

    def is_close(self, other, atol=1e-12):
        return (np.allclose(np.asarray(self.coeffs, dtype=float),
                            np.asarray(other.coeffs, dtype=float), rtol=0.0, atol=atol)
                and abs(float(self.constant) - float(other.constant)) <= atol)

    def __repr__(self):
        return f"AffineExpr({_render_linear(self.coeffs, self.constant)})"


class QuadForm:
    """Polynôme ½ sᵀQs + bᵀs + c sur les symboles canoniques"""

    __slots__ = ('Q', 'b', 'c')

    def __init__(self, Q=None, b=None, c=0.0):
        Q = np.zeros((NSYM, NSYM)) if Q is None else np.asarray(Q)
        b = np.zeros(NSYM) if b is None else np.asarray(b)
        if Q.shape != (NSYM, NSYM) or b.shape != (NSYM,):
            raise ValueError("Dimensions incompatibles pour une forme quadratique")
        is_exact = Q.dtype == object or b.dtype == object or isinstance(c, Fraction)
        Q = _coeff_array(Q, is_exact)
        self.Q = _frozen((Q + Q.T) / 2)
        self.b = _frozen(_coeff_array(b, is_exact))
        self.c = exact(c) if is_exact else float(c)

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def monomial(cls, coef, i, j=None):
        """coef·s_i·s_j, ou coef·s_i si j est omis"""
        is_exact = isinstance(coef, Fraction)
        form = _zeros((NSYM, NSYM), is_exact)
        lin = _zeros(NSYM, is_exact)
        a = _check_symbol(i)
        if j is None:
            lin[a] = coef
        else:
            b = _check_symbol(j)
            if a == b:
                form[a, a] = 2 * coef
            else:
                form[a, b] = form[b, a] = coef
        return cls(form, lin)

    @property
    def exact(self):
        return self.Q.dtype == object

    def as_exact(self):
        return self if self.exact else QuadForm(self.Q, self.b, exact(self.c))

    def _lift(self, scalar):
        return exact(scalar) if self.exact else float(scalar)

    def __add__(self, other):
        if isinstance(other, AffineExpr):
            other = other.as_quad()
        if isinstance(other, QuadForm):
            a, b = _unify(self, other)
            return QuadForm(a.Q + b.Q, a.b + b.b, a.c + b.c)
        if isinstance(other, Fraction) and not self.exact:
            return self.as_exact() + other
        return QuadForm(self.Q, self.b, self.c + self._lift(other))

    __radd__ = __add__

    def __neg__(self):
        return QuadForm(-self.Q, -self.b, -self.c)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, Fraction) and not self.exact:
            return self.as_exact() * scalar
        scalar = self._lift(scalar)
        return QuadForm(self.Q * scalar, self.b * scalar, self.c * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, Fraction) and not self.exact:
            return self.as_exact() / scalar
        return self * (1 / self._lift(scalar))

    def eval(self, s):
        s = np.asarray(s, dtype=float)
        Q, b = np.asarray(self.Q, dtype=float), np.asarray(self.b, dtype=float)
        return float(0.5 * s @ Q @ s + b @ s + float(self.c))

    def uses(self, sym):
        k = _check_symbol(sym)
        return bool(np.any(self.Q[k] != 0) or self.b[k] != 0)

    def second(self, i, j):
        return float(self.Q[_check_symbol(i), _check_symbol(j)])

    def relabel(self, mapping):
        """
        Renomme les symboles selon mapping {ancien: nouveau}. Les symboles
        absents du mapping sont fixés à zéro.
        """
        olds, news = _relabel_indices(mapping)
        Q = _zeros((NSYM, NSYM), self.exact)
        b = _zeros(NSYM, self.exact)
        Q[np.ix_(news, news)] = self.Q[np.ix_(olds, olds)]
        b[news] = self.b[olds]
        return QuadForm(Q, b, self.c)

    def restrict(self, symbols):
        """Vérifie que la forme ne dépend que des symboles donnés"""
        outside = [SYMBOLS[k - 1] for k in range(1, NSYM + 1) if k not in symbols and self.uses(k)]
        if outside:
            raise ValueError(f"La forme dépend de {', '.join(outside)}")
        return self

    def as_affine(self):
        """Conversion d'une forme sans partie quadratique"""
        if np.any(self.Q != 0):
            raise ValueError("La forme a une partie quadratique")
        return AffineExpr(self.b, self.c)

    def is_close(self, other, atol=1e-12):
        return (np.allclose(np.asarray(self.Q, dtype=float), np.asarray(other.Q, dtype=float),
                            rtol=0.0, atol=atol)
                and np.allclose(np.asarray(self.b, dtype=float),
                                np.asarray(other.b, dtype=float), rtol=0.0, atol=atol)
                and abs(float(self.c) - float(other.c)) <= atol)

    def to_list(self):
        """28 nombres : triangle supérieur de Q (ligne par ligne), b, c"""
        iu = np.triu_indices(NSYM)
        return [float(v) for v in self.Q[iu]] + [float(v) for v in self.b] + [float(self.c)]

    @classmethod
    def from_list(cls, values):
        values = [float(v) for v in values]
        if len(values) != 28:
            raise ValueError(f"28 coefficients attendus, {len(values)} reçus")
        Q = np.zeros((NSYM, NSYM))
        iu = np.triu_indices(NSYM)
        Q[iu] = values[:21]
        Q = Q + np.triu(Q, 1).T
        return cls(Q, values[21:27], values[27])

    def __repr__(self):
        terms = []
        for i in range(NSYM):
            for j in range(i, NSYM):
                coef = float(self.Q[i, j]) * (0.5 if i == j else 1.0)
                if coef != 0.0:
                    power = f"{SYMBOLS[i]}²" if i == j else f"{SYMBOLS[i]}{SYMBOLS[j]}"
                    terms.append(f"{coef:+.6g}{power}")
        lin = _render_linear(self.b, self.c)
        return f"QuadForm({' '.join(terms)} {lin})".replace('( ', '(')


def _render_linear(coeffs, constant):
    terms = [f"{float(v):+.6g}{SYMBOLS[i]}" for i, v in enumerate(coeffs) if v != 0]
    terms.append(f"{float(constant):+.6g}")
    return ' '.join(terms)


def _relabel_indices(mapping):
    """Indices (anciens, nouveaux) : s_ancien devient s_nouveau"""
    targets = list(mapping.values())
    if len(set(targets)) != len(targets):
        raise ValueError(f"Renommage non injectif : {mapping}")
    olds = [_check_symbol(old) for old in mapping]
    news = [_check_symbol(new) for new in targets]
    return olds, news


def partial(q, sym):
    """∂q/∂s_sym, expression affine exacte"""
    k = _check_symbol(sym)
    return AffineExpr(q.Q[k, :], q.b[k])


def substitute(q, sym, e):
    """
    Remplace s_sym par l'expression affine e dans q.

    Avec s = T s' + t (T l'identité dont la ligne sym est e.coeffs,
    t = e.constant·e_sym) : Q' = TᵀQT, b' = Tᵀ(Qt + b),
    c' = ½tᵀQt + bᵀt + c.
    """
    if isinstance(q, AffineExpr):
        return q.substitute(sym, e)
    k = _check_symbol(sym)
    if e.coeffs[k] != 0:
        raise SelfReference(f"{SYMBOLS[k]} apparaît dans sa propre substitution")
    q, e = _unify(q, e)
    T = _zeros((NSYM, NSYM), q.exact)
    for i in range(NSYM):
        T[i, i] = 1
    T[k, :] = e.coeffs
    t = _zeros(NSYM, q.exact)
    t[k] = e.constant
    Q = T.T @ q.Q @ T
    b = T.T @ (q.Q @ t + q.b)
    c = (t @ q.Q @ t) / 2 + q.b @ t + q.c
    return QuadForm(Q, b, c)


def solve_linear(e, sym, rtol=DEGENERACY_RTOL):
    """Expression de s_sym annulant e ; DegenerateCoefficient si son coefficient est nul"""
    k = _check_symbol(sym)
    a = e.coeffs[k]
    scale = float(np.max(np.abs(e.coeffs)))
    if scale == 0.0 or abs(float(a)) <= rtol * scale:
        raise DegenerateCoefficient(
            f"Coefficient de {SYMBOLS[k]} dégénéré ({float(a):.3e}) dans {e!r}",
            symbol=sym,
        )
    coeffs = -e.coeffs / a
    coeffs[k] = 0
    return AffineExpr(coeffs, -e.constant / a)


def antiderivative(e, sym):
    """Primitive de e par rapport à s_sym, constante d'intégration nulle"""
    k = _check_symbol(sym)
    Q = _zeros((NSYM, NSYM), e.exact)
    Q[k, :] = e.coeffs
    Q[:, k] = e.coeffs
    # le terme diagonal e_k·s_k donne ½e_k·s_k² : Q[k,k] = e_k
    Q[k, k] = e.coeffs[k]
    b = _zeros(NSYM, e.exact)
    b[k] = e.constant
    return QuadForm(Q, b, 0)


def product(e1, e2):
    """Produit de deux expressions affines"""
    e1, e2 = _unify(e1, e2)
    outer = np.outer(e1.coeffs, e2.coeffs)
    return QuadForm(
        outer + outer.T,
        e1.constant * e2.coeffs + e2.constant * e1.coeffs,
        e1.constant * e2.constant,
    )


def eval(q, s):
    return q.eval(s)
