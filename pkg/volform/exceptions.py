"""
Exceptions de la bibliothèque volform.

Chaque exception porte un code machine (E_CONFIG, E_SOLVER, E_DEGENERATE)
repris tel quel par les commandes de gestion.
"""

E_CONFIG = 'E_CONFIG'
E_SOLVER = 'E_SOLVER'
E_DEGENERATE = 'E_DEGENERATE'


class VolformError(Exception):
    """Erreur de base de volform"""
    code = E_CONFIG

    def __init__(self, message='', **context):
        super().__init__(message)
        self.context = context


class NotAPermutation(VolformError, ValueError):
    """Les trois images ne forment pas une bijection de {1,2,3}"""
    code = E_CONFIG


class SelfReference(VolformError):
    """Substitution d'un symbole par une expression qui le contient"""
    code = E_DEGENERATE


class DegenerateCoefficient(VolformError):
    """Coefficient du symbole à résoudre sous le seuil de dégénérescence"""
    code = E_DEGENERATE


class UnknownField(VolformError):
    code = E_CONFIG


class FieldNotDivergenceFree(VolformError):
    code = E_CONFIG


class UnsupportedField(VolformError):
    """Schéma réservé aux champs linéaires"""
    code = E_CONFIG


class QuadratureFailure(VolformError):
    code = E_SOLVER


class SolverError(VolformError):
    """Échec d'une résolution scalaire, nomme l'équation et le point"""
    code = E_SOLVER

    def __init__(self, message='', equation=None, point=None, **context):
        if equation is not None:
            message = f"{message} (équation {equation}, point {_fmt_point(point)})"
        super().__init__(message, equation=equation, point=point, **context)
        self.equation = equation
        self.point = point


class NewtonDivergence(SolverError):
    code = E_SOLVER


class TwistViolation(SolverError):
    code = E_DEGENERATE


class LegendreFailure(SolverError):
    code = E_SOLVER


class TwistDegenerate(VolformError):
    """Condition de torsion violée par le champ lui-même (a13 ou a12 nul)"""
    code = E_DEGENERATE


class StepTooLarge(VolformError):
    """Pas h trop proche d'un pôle des dénominateurs du schéma"""
    code = E_DEGENERATE


class DerivationMismatch(VolformError):
    """Le résidu d'une dérivation symbolique n'est pas nul"""
    code = E_DEGENERATE


def _fmt_point(point):
    if point is None:
        return '?'
    try:
        return '(' + ','.join(f"{float(v):.6g}" for v in point) + ')'
    except TypeError:
        return f"{point}"
