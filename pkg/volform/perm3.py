"""
Groupe symétrique S3 et réduction des 36 paires (sigma, Sigma) en cinq classes.

Convention : une permutation envoie un rôle (1 = "+", 2 = "∘", 3 = "−")
sur un indice de coordonnée, et agit sur les vecteurs par
(x · p)_i = x_{p(i)}. Les indices sont 1-based dans toute l'API.
"""
import itertools
from dataclasses import dataclass

import numpy as np

from .exceptions import NotAPermutation


@dataclass(frozen=True)
class Permutation:
    """Bijection de {1,2,3}, stockée comme le tuple de ses images"""
    image: tuple

    def __post_init__(self):
        try:
            image = tuple(int(v) for v in self.image)
        except (TypeError, ValueError):
            raise NotAPermutation(f"not a permutation: {self.image!r}")
        if sorted(image) != [1, 2, 3]:
            raise NotAPermutation(f"not a permutation: {','.join(str(v) for v in image)}")
        object.__setattr__(self, 'image', image)

    @classmethod
    def identity(cls):
        return cls((1, 2, 3))

    @classmethod
    def flip(cls):
        """Échange du premier et du dernier argument"""
        return cls((3, 2, 1))

    @classmethod
    def parse(cls, text):
        """Lit la syntaxe textuelle "a,b,c" (ex. "3,2,1")"""
        parts = [p.strip() for p in str(text).split(',')]
        if len(parts) != 3 or not all(p.lstrip('-').isdigit() for p in parts):
            raise NotAPermutation(f"not a permutation: {text!r}")
        return cls(tuple(int(p) for p in parts))

    def __call__(self, i):
        return self.image[i - 1]

    def __mul__(self, other):
        return compose(self, other)

    def __invert__(self):
        return inverse(self)

    def is_identity(self):
        return self.image == (1, 2, 3)

    def is_cycle(self):
        """Vrai pour les deux rotations d'ordre 3"""
        return all(self(i) != i for i in (1, 2, 3))

    def matrix(self):
        """Matrice P telle que act_vec(x, p) = P @ x"""
        P = np.zeros((3, 3))
        for i in range(3):
            P[i, self.image[i] - 1] = 1.0
        return P

    def __str__(self):
        return ','.join(str(v) for v in self.image)

    def describe(self):
        return 'identity' if self.is_identity() else f"({self})"


IDENTITY = Permutation((1, 2, 3))
FLIP = Permutation.flip()
CANONICAL_CYCLE = Permutation((2, 3, 1))


def all_permutations():
    """Les six éléments de S3, dans l'ordre lexicographique"""
    return [Permutation(p) for p in itertools.permutations((1, 2, 3))]


def compose(p, q):
    """(p ∘ q)(i) = p(q(i))"""
    return Permutation(tuple(p(q(i)) for i in (1, 2, 3)))


def inverse(p):
    image = [0, 0, 0]
    for i in (1, 2, 3):
        image[p(i) - 1] = i
    return Permutation(tuple(image))


def sign(p):
    """Parité de p : +1 si paire, -1 sinon"""
    inversions = sum(
        1 for i in range(3) for j in range(i + 1, 3)
        if p.image[i] > p.image[j]
    )
    return -1 if inversions % 2 else 1


def act_vec(x, p):
    """(x · p)_i = x_{p(i)}"""
    x = np.asarray(x, dtype=float)
    return x[[v - 1 for v in p.image]]


def permact(p, P, f):
    """Conjugaison d'une application : x ↦ f(x · p) · P⁻¹"""
    P_inv = inverse(P)

    def permuted(x):
        return act_vec(f(act_vec(x, p)), P_inv)

    return permuted


# Étiquette de classe en fonction de tau = sigma⁻¹ ∘ Sigma
CLASS_LABELS = {
    (1, 2, 3): 'S1',
    (3, 2, 1): 'SE',
    (1, 3, 2): 'DL',
    (2, 1, 3): 'S2',
    (2, 3, 1): 'SEDL',
    (3, 1, 2): 'SEDL',
}

CLASS_ORDER = ('S1', 'SE', 'DL', 'S2', 'SEDL')

CANONICAL_TAU = {
    'S1': Permutation((1, 2, 3)),
    'SE': Permutation((3, 2, 1)),
    'DL': Permutation((1, 3, 2)),
    'S2': Permutation((2, 1, 3)),
    'SEDL': CANONICAL_CYCLE,
}


@dataclass(frozen=True)
class PairClass:
    """
    Classe d'une paire (sigma, Sigma).

    relabel est le rho tel que (rho·sigma', rho·Sigma') = (1, tau*), où
    (sigma', Sigma') vaut (sigma, Sigma), ou (Sigma, sigma) si adjoint_flag.
    """
    label: str
    tau: Permutation
    relabel: Permutation
    adjoint_flag: bool

    @property
    def sign(self):
        return sign(self.tau)

    @property
    def representative(self):
        return (IDENTITY, CANONICAL_TAU[self.label])


def classify(sigma, Sigma):
    tau = compose(inverse(sigma), Sigma)
    label = CLASS_LABELS[tau.image]
    adjoint_flag = tau.is_cycle() and tau != CANONICAL_CYCLE
    relabel = inverse(Sigma) if adjoint_flag else inverse(sigma)
    return PairClass(label=label, tau=tau, relabel=relabel, adjoint_flag=adjoint_flag)


def reduce_to_canonical(sigma, Sigma):
    """
    Chaîne constructive de réduction : adjonction éventuelle puis
    renommage simultané. Renvoie la liste des étapes (nom, sigma, Sigma).
    """
    pc = classify(sigma, Sigma)
    steps = [('start', sigma, Sigma)]
    if pc.adjoint_flag:
        sigma, Sigma = Sigma, sigma
        steps.append(('adjoint', sigma, Sigma))
    sigma, Sigma = compose(pc.relabel, sigma), compose(pc.relabel, Sigma)
    steps.append(('relabel', sigma, Sigma))
    assert (sigma, Sigma) == pc.representative, 'réduction incohérente'
    return steps


def enumerate_classes():
    """Partition des 36 paires par étiquette, dans l'ordre de CLASS_ORDER"""
    classes = {label: [] for label in CLASS_ORDER}
    for sigma in all_permutations():
        for Sigma in all_permutations():
            classes[classify(sigma, Sigma).label].append((sigma, Sigma))
    return classes


_SUB = {1: '₁', 2: '₂', 3: '₃'}
ROLE_PLUS, ROLE_CIRC, ROLE_MINUS = 1, 2, 3


def _x(i):
    return f"x{_SUB[i]}"


def _X(i):
    return f"X{_SUB[i]}"


def _args(lower, upper):
    rendered = [_x(i) for i in sorted(lower)] + [_X(i) for i in sorted(upper)]
    return ','.join(rendered)


def render_conditions(sigma, Sigma, names=('φ', 'Φ')):
    """
    Bloc texte des conditions déterminantes, de compatibilité et de torsion
    d'une paire, dans les coordonnées permutées.
    """
    phi, Phi = names
    tau = compose(inverse(sigma), Sigma)
    xp, xc, xm = sigma(ROLE_PLUS), sigma(ROLE_CIRC), sigma(ROLE_MINUS)
    Xp, Xc, Xm = Sigma(ROLE_PLUS), Sigma(ROLE_CIRC), Sigma(ROLE_MINUS)

    phi_args = _args((xc, xm), (Xm,))
    Phi_args = _args((xm,), (Xc, Xm))
    # forme de base Φ_base = −sign(tau)·Φ, donc X₊ = −sign(tau)·∂Φ
    prefix = '' if sign(tau) < 0 else '−'

    pc = classify(sigma, Sigma)
    lines = [
        f"class: {pc.label}",
        f"{_x(xp)} = ∂{_x(xc)} {phi}({phi_args})",
        f"∂{_X(Xm)} {phi}({phi_args}) = ∂{_x(xm)} {Phi}({Phi_args})",
        f"{_X(Xp)} = {prefix}∂{_X(Xc)} {Phi}({Phi_args})",
        f"λ = {phi}({phi_args}) d{_x(xm)} + {Phi}({Phi_args}) d{_X(Xm)}",
        f"twist: ∂{_X(Xm)}∂{_x(xc)} {phi} ≠ 0",
        f"twist: ∂{_X(Xc)}∂{_x(xm)} {Phi} ≠ 0",
    ]
    return '\n'.join(lines)
