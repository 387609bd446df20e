"""
Outils de vérification numérique : jacobiennes, audits de volume,
solutions de référence et estimation de l'ordre observé.
"""
import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

MACHINE_EPS = np.finfo(float).eps
FD_EPS = float(np.cbrt(MACHINE_EPS))
RK4_GUARD = 1e-10
RK4_MAX_DOUBLINGS = 12


def fmt(value):
    """Format fixe à 17 chiffres significatifs"""
    return f"{float(value):.16e}"


def jacobian_fd(step_map, x, eps=None):
    """Jacobienne par différences centrées ; pas eps·(1+‖x‖) par défaut"""
    x = np.asarray(x, dtype=float)
    if eps is None:
        eps = FD_EPS * (1.0 + np.linalg.norm(x))
    J = np.zeros((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = eps
        J[:, j] = (np.asarray(step_map(x + e)) - np.asarray(step_map(x - e))) / (2.0 * eps)
    return J


def det3(M):
    """Déterminant 3x3 par développement en cofacteurs"""
    M = np.asarray(M, dtype=float)
    return float(
        M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
        - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
        + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0])
    )


def expm3(A, t=1.0, ntaylor=12):
    """exp(tA) par série de Taylor tronquée et élévations au carré"""
    M = np.asarray(A, dtype=float) * float(t)
    norm = np.linalg.norm(M, ord=np.inf)
    nsquare = max(0, int(math.ceil(math.log2(norm / 0.25)))) if norm > 0.25 else 0

    tc = np.zeros(ntaylor + 1)
    tc[0] = 1.0
    for i in range(ntaylor):
        tc[i + 1] = tc[i] / (i + 1)
    SM = M / 2.0 ** nsquare

    # Horner
    EM = np.identity(3) * tc[ntaylor]
    for i in range(ntaylor - 1, -1, -1):
        EM = SM @ EM
        EM += np.identity(3) * tc[i]

    for _ in range(nsquare):
        EM = EM @ EM
    return EM


def _rk4(field_fn, x0, T, n_steps):
    x = np.array(x0, dtype=float)
    h = T / n_steps
    for _ in range(n_steps):
        k1 = field_fn(x)
        k2 = field_fn(x + 0.5 * h * k1)
        k3 = field_fn(x + 0.5 * h * k2)
        k4 = field_fn(x + h * k3)
        x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def rk4_reference(field_fn, x0, T, n_steps=1000, guard=RK4_GUARD):
    """
    Extrémité RK4 classique. Le nombre de pas est doublé tant que le
    doublement modifie le résultat de plus de guard.
    """
    coarse = _rk4(field_fn, x0, T, n_steps)
    for _ in range(RK4_MAX_DOUBLINGS):
        fine = _rk4(field_fn, x0, T, 2 * n_steps)
        change = float(np.max(np.abs(fine - coarse)))
        if change < guard:
            return fine
        n_steps *= 2
        logger.info(f"Référence RK4 : passage à {n_steps} pas (écart {change:.2e})")
        coarse = fine
    logger.warning(f"Référence RK4 : garde {guard:.0e} non atteinte avec {n_steps} pas")
    return coarse


@dataclass
class OrderReport:
    h: list
    errors: list
    orders: list
    slope: float

    def to_table(self):
        lines = ['h,error,order']
        for i, (h, err) in enumerate(zip(self.h, self.errors)):
            order = fmt(self.orders[i - 1]) if i > 0 else ''
            lines.append(f"{fmt(h)},{fmt(err)},{order}")
        slope = 'nan' if math.isnan(self.slope) else f"{self.slope:.6f}"
        lines.append(f"slope,{slope}")
        return '\n'.join(lines) + '\n'


def _run(step, x0, n_steps):
    x = np.array(x0, dtype=float)
    for _ in range(n_steps):
        x = step(x)
    return x


def reference_solution(field, x0, T):
    """exp(TA)·x0 pour un champ linéaire, RK4 gardé sinon"""
    if field.linear is not None:
        return expm3(field.linear, T) @ np.asarray(x0, dtype=float)
    return rk4_reference(field, x0, T)


def observed_order(factory, field, x0, T, h_list):
    """
    Erreurs globales au temps T pour chaque pas de h_list, ordres par paires
    et pente d'un ajustement log-log.
    """
    reference = reference_solution(field, x0, T)
    h_list = [float(h) for h in h_list]
    errors = []
    for h in h_list:
        n_steps = int(round(T / h))
        if n_steps < 1 or abs(n_steps * h - T) > 1e-9 * max(1.0, T):
            raise ValueError(f"T={T} n'est pas un multiple du pas h={h}")
        scheme = factory(h)
        errors.append(float(np.linalg.norm(_run(scheme.step, x0, n_steps) - reference)))

    orders = []
    for (h0, e0), (h1, e1) in zip(zip(h_list, errors), zip(h_list[1:], errors[1:])):
        if e0 > 0.0 and e1 > 0.0:
            orders.append(math.log(e0 / e1) / math.log(h0 / h1))
        else:
            orders.append(float('nan'))

    if len(h_list) >= 2 and all(e > 0.0 for e in errors):
        slope = float(np.polyfit(np.log(h_list), np.log(errors), 1)[0])
    else:
        slope = float('nan')
    return OrderReport(h=h_list, errors=errors, orders=orders, slope=slope)


@dataclass
class VolumeAudit:
    points: list
    defects: list
    eps: object
    exact: bool = False

    @property
    def max_defect(self):
        return max(self.defects) if self.defects else 0.0

    @property
    def mean_defect(self):
        return float(np.mean(self.defects)) if self.defects else 0.0

    def to_csv(self):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(['point', 'x1', 'x2', 'x3', 'defect'])
        for i, (x, defect) in enumerate(zip(self.points, self.defects)):
            writer.writerow([i] + [fmt(v) for v in x] + [fmt(defect)])
        return buffer.getvalue()

    def summary(self):
        return f"max_defect {fmt(self.max_defect)} mean_defect {fmt(self.mean_defect)}"


def step_defect(scheme, x, eps=None):
    """|det J − 1| en x, exact pour un pas affine"""
    affine = getattr(scheme, 'affine', None)
    if affine is not None:
        return abs(det3(affine.M) - 1.0)
    step = getattr(scheme, 'step', scheme)
    return abs(det3(jacobian_fd(step, x, eps)) - 1.0)


def volume_audit(scheme, points, eps=None):
    """|det J − 1| sur chaque point, dans l'ordre des entrées"""
    points = [np.asarray(x, dtype=float) for x in points]
    defects = [step_defect(scheme, x, eps) for x in points]
    exact = getattr(scheme, 'affine', None) is not None
    return VolumeAudit(points=points, defects=defects, eps=eps, exact=exact)


def consistency_defect(scheme, points, h=None, vector_field=None):
    """max ‖step(x) − x − h·a(x)‖ / h : erreur locale divisée par h"""
    h = scheme.h if h is None else h
    vector_field = vector_field if vector_field is not None else scheme.vector_field
    worst = 0.0
    for x in points:
        x = np.asarray(x, dtype=float)
        drift = scheme.step(x) - x - h * vector_field(x)
        worst = max(worst, float(np.linalg.norm(drift)) / h)
    return worst


@dataclass
class TrajectoryRow:
    step: int
    t: float
    x: np.ndarray
    defect: object = None

    def as_csv_row(self):
        defect = '' if self.defect is None else fmt(self.defect)
        return [self.step, fmt(self.t)] + [fmt(v) for v in self.x] + [defect]


@dataclass
class Trajectory:
    rows: list = field(default_factory=list)

    HEADER = ('step', 't', 'x1', 'x2', 'x3', 'det_defect')

    def to_csv(self):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(self.HEADER)
        for row in self.rows:
            writer.writerow(row.as_csv_row())
        return buffer.getvalue()


def integrate(scheme, x0, steps, audit_every=100):
    """Trajectoire de steps pas ; défaut de volume noté tous les audit_every pas"""
    x = np.array(x0, dtype=float)
    trajectory = Trajectory()
    for n in range(steps + 1):
        defect = step_defect(scheme, x) if audit_every and n % audit_every == 0 else None
        trajectory.rows.append(TrajectoryRow(step=n, t=n * scheme.h, x=x.copy(), defect=defect))
        if n < steps:
            x = scheme.step(x)
    return trajectory
