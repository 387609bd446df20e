"""
Formules publiées des potentiels S1 et S2, recopiées terme à terme, et leur
comparaison avec les dérivations symboliques de schemes.

Les formules publiées contiennent des coquilles : la dérivation fait foi,
chaque écart est journalisé.
"""
import logging
from dataclasses import dataclass

import numpy as np

from . import quadcalc as qc
from .fields import LinearField
from .schemes import derive_s1_potentials, derive_s2_potentials

logger = logging.getLogger(__name__)

MATCH_RTOL = 1e-9

_s = qc.AffineExpr.symbol


def _sq(sym, coef):
    """coef·s²/2"""
    return qc.QuadForm.monomial(0.5 * coef, sym, sym)


def printed_s1_quispel(L, h):
    a = L.a
    k1 = 1.0 + h ** 2 * a(1, 1) * a(3, 3) - h * a(2, 2)
    k2 = 1.0 + h ** 2 * a(1, 1) * a(3, 3) / (1.0 - h * a(2, 2))
    k3 = h * a(1, 3) * (h * a(1, 3) + k2 / k1 * h * a(1, 2) * a(2, 3))

    num = (_s(qc.X1) - _s(qc.x1) - h * a(1, 1) * _s(qc.x1)
           - h ** 2 * a(2, 1) * a(1, 2) * k2 / k1 * _s(qc.x1))
    den = h * a(1, 3) + h ** 2 * a(2, 3) * a(1, 2) * k2 / k1
    phi = (qc.product(num / den, _s(qc.x2))
           - _sq(qc.x2, a(1, 2) / (k1 * a(1, 3) + h * a(2, 3) * a(1, 2) * k2)))

    lead = (_s(qc.X1) - _s(qc.x1) - h * a(1, 1) * _s(qc.x1)) / (h * a(1, 3)) * (1.0 + h * a(3, 3))
    tail = (2.0 * qc.product(_s(qc.X1), _s(qc.x1))
            - qc.QuadForm.monomial((1.0 + h * a(1, 1)) * h * a(2, 3) * k2, qc.x1, qc.x1)
            + qc.QuadForm.monomial(h ** 2 * a(1, 3) * a(2, 1) * k2, qc.x1, qc.x1))
    Phi = (-qc.product(lead, _s(qc.X2))
           + _sq(qc.X2, -h * a(3, 2) + a(1, 2) / a(1, 3) * (1.0 + h * a(3, 3)))
           - qc.QuadForm.monomial(h * a(3, 1), qc.X1, qc.X2)
           - tail / (2.0 * k3))
    return phi, Phi


def printed_s1_az(L, h):
    """None si a33 = 0 : la formule publiée divise par h·a33"""
    a = L.a
    if a(3, 3) == 0.0:
        return None
    l1 = 1.0 - h * a(1, 2) / a(1, 3) * a(2, 3)
    shift = _s(qc.X1) - (1.0 + h * a(1, 1)) * _s(qc.x1)

    phi = qc.product(shift / (h * a(1, 3)), _s(qc.x2)) - _sq(qc.x2, a(1, 2) / a(1, 3))

    inner = ((1.0 + h * a(3, 3)) * (qc.product(shift / (h * a(3, 3)), _s(qc.X2))
                                    - _sq(qc.X2, a(1, 2) / a(1, 3)))
             + qc.QuadForm.monomial(h * a(3, 1), qc.x1, qc.X2)
             + _sq(qc.X2, h * a(3, 2))
             + h * a(1, 2) / a(1, 3) * (qc.QuadForm.monomial(a(2, 1), qc.x1, qc.X1)
                                         + _sq(qc.X2, a(2, 2))))
    Phi = (-inner / l1
           + _sq(qc.x1, h * a(2, 1))
           + h * a(2, 3) * (2.0 * qc.product(_s(qc.X1), _s(qc.x1))
                            - qc.QuadForm.monomial(1.0 + h * a(1, 1), qc.x1, qc.x1))
           / (2.0 * h * a(1, 3)))
    return phi, Phi


def printed_s2_quispel(L, h):
    a = L.a
    m1 = 1.0 - h * a(3, 3) + h ** 2 * a(1, 1) * a(2, 2)
    m2 = 1.0 + h ** 2 * a(1, 1) * a(2, 2) / (1.0 - h * a(3, 3))

    num = (m1 * (_s(qc.X1) - _s(qc.x1) - h * a(1, 1) * _s(qc.x1))
           - h ** 2 * a(3, 1) * a(1, 3) * m2 * _s(qc.x1))
    phi = (qc.product(num, _s(qc.x2)) / (h * a(1, 3))
           - _sq(qc.x2, m1 * a(1, 2) / a(1, 3))
           - _sq(qc.x2, h * a(3, 2) * m2))

    shift = _s(qc.X1) - (1.0 + h * a(1, 1)) * _s(qc.x1)
    Phi = ((1.0 + h * a(2, 2)) * qc.product(shift, _s(qc.X3)) / (h * a(1, 2))
           - _sq(qc.X3, a(1, 3) * (1.0 + h * a(2, 2)) / a(1, 2))
           + qc.QuadForm.monomial(h * a(2, 1), qc.X1, qc.X3)
           + _sq(qc.X3, h * a(2, 3))
           + m1 * (2.0 * qc.product(_s(qc.X1), _s(qc.x1))
                   - qc.QuadForm.monomial(1.0 + h * a(1, 1), qc.x1, qc.x1))
           / (2.0 * h ** 2 * a(1, 2) * a(1, 3)))
    return phi, Phi


@dataclass
class PrintedComparison:
    variant: str
    potential: str
    max_diff: float
    matches: bool
    printed: object = None
    derived: object = None

    def as_dict(self):
        return {
            'variant': self.variant, 'potential': self.potential,
            'max_diff': self.max_diff, 'matches': self.matches,
        }


def _coefficient_names():
    """Noms des 28 entrées de QuadForm.to_list"""
    rows, cols = np.triu_indices(qc.NSYM)
    names = [f"Q[{qc.SYMBOLS[i]},{qc.SYMBOLS[j]}]" for i, j in zip(rows, cols)]
    return names + [f"b[{s}]" for s in qc.SYMBOLS] + ['c']


def _compare(variant, name, printed, derived):
    p, d = np.array(printed.to_list()), np.array(derived.to_list())
    tol = MATCH_RTOL * max(1.0, float(np.max(np.abs(d))))
    for coef, pv, dv in zip(_coefficient_names(), p, d):
        if abs(pv - dv) > tol:
            logger.warning(f"Formule publiée {variant} : {name} {coef} = {pv:.12g}, "
                           f"dérivation {dv:.12g}")
    diff = float(np.max(np.abs(p - d)))
    return PrintedComparison(variant, name, diff, diff <= tol, printed, derived)


def compare_printed(L, h):
    """Compare φ et Φ publiés aux dérivations pour s1-quispel, s1-az et s2-quispel"""
    L = L if isinstance(L, LinearField) else LinearField(L)
    h = float(h)
    cases = (
        ('s1-quispel', printed_s1_quispel, lambda: derive_s1_potentials(L, h, 'quispel')),
        ('s1-az', printed_s1_az, lambda: derive_s1_potentials(L, h, 'az')),
        ('s2-quispel', printed_s2_quispel, lambda: derive_s2_potentials(L, h)),
    )
    report = []
    for variant, printed_fn, derive in cases:
        printed = printed_fn(L, h)
        if printed is None:
            logger.info(f"Formule publiée {variant} indéfinie pour ce champ")
            continue
        derived = derive()
        for name, p, d in zip(('phi', 'Phi'), printed, derived):
            report.append(_compare(variant, name, p, d))
    return report
