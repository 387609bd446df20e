"""
Socle commun des commandes volform : options, validation et codes de sortie.

Sorties : 0 succès, 1 seuil de volume dépassé, 2 configuration invalide,
3 échec du solveur ou dégénérescence.
"""
import logging
from pathlib import Path

import numpy as np
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from volform.exceptions import E_CONFIG, VolformError
from volform.genmap import SolverConfig
from volform.schemes import make_scheme
from volform.serializers import RunConfigSerializer

logger = logging.getLogger(__name__)

EXIT_VOLUME = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3

# options dont la valeur peut commencer par un signe moins
SIGNED_VALUE_FLAGS = ('--x0',)


def _flatten(detail, prefix=''):
    """Aplatit les erreurs DRF en une seule ligne"""
    if isinstance(detail, dict):
        parts = [_flatten(value, f"{key}: ") for key, value in detail.items()]
        return prefix + '; '.join(parts)
    if isinstance(detail, list):
        return prefix + '; '.join(_flatten(item) for item in detail)
    return prefix + str(detail)


def join_signed_values(argv):
    """
    --x0 -1,0,0 devient --x0=-1,0,0 : argparse prendrait sinon la valeur
    pour une option.
    """
    joined, i = [], 0
    while i < len(argv):
        if argv[i] in SIGNED_VALUE_FLAGS and i + 1 < len(argv):
            joined.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            joined.append(argv[i])
            i += 1
    return joined


def random_points(seed, samples, box):
    """Points uniformes dans [−box, box]³, générateur PCG64 graine seed"""
    rng = np.random.default_rng(seed)
    return rng.uniform(-box, box, size=(samples, 3))


class VolformCommand(BaseCommand):
    """Commande dont les erreurs volform deviennent des CommandError codées"""

    run_options = ()

    def run_from_argv(self, argv):
        super().run_from_argv(join_signed_values(list(argv)))

    def add_run_arguments(self, parser, *names):
        specs = {
            'field': dict(help='Fichier JSON décrivant le champ'),
            'scheme': dict(help='Nom du schéma (se-se, dl-se, dl-dl, s1-quispel, ...)'),
            'h': dict(type=float, help='Pas de temps'),
            'steps': dict(type=int, help='Nombre de pas'),
            'x0': dict(help='Point initial a,b,c (--x0=-1,0,0 ou --x0 -1,0,0)'),
            'T': dict(type=float, help='Temps final'),
            'h0': dict(type=float, help='Pas le plus grossier'),
            'levels': dict(type=int, help='Nombre de pas successifs h0/2^k'),
            'samples': dict(type=int, help="Nombre de points d'audit"),
            'seed': dict(type=int, help='Graine du générateur aléatoire'),
            'out': dict(help='Fichier de sortie (sortie standard par défaut)'),
            'audit_every': dict(type=int, help='Audit du déterminant tous les N pas'),
            'fail_above': dict(type=float, help='Seuil de défaut de volume'),
            'box': dict(type=float, help="Demi-largeur de la boîte d'échantillonnage"),
        }
        for name in names:
            flag = '--' + name.replace('_', '-')
            parser.add_argument(flag, dest=name, **specs[name])

    def validated(self, serializer_class, options, names):
        data = {name: options[name] for name in names if options.get(name) is not None}
        serializer = serializer_class(data=data)
        if not serializer.is_valid():
            raise CommandError(f"{E_CONFIG}: {_flatten(serializer.errors)}", returncode=EXIT_CONFIG)
        return serializer.validated_data

    def run_config(self, options):
        return self.validated(RunConfigSerializer, options, self.run_options)

    def build_scheme(self, cfg, h=None):
        return make_scheme(cfg['scheme'], cfg['vector_field'], cfg['h'] if h is None else h,
                           SolverConfig.from_settings())

    def emit(self, text, out=None):
        if out:
            Path(out).write_text(text, encoding='utf-8')
            logger.info(f"Écrit {out}")
        else:
            self.stdout.write(text, ending='')

    def handle(self, *args, **options):
        logger.info(f"Début de {self.__module__.rsplit('.', 1)[-1]}")
        try:
            result = self.run(**options)
        except CommandError:
            raise
        except serializers.ValidationError as exc:
            raise CommandError(f"{E_CONFIG}: {_flatten(exc.detail)}", returncode=EXIT_CONFIG)
        except VolformError as exc:
            returncode = EXIT_CONFIG if exc.code == E_CONFIG else EXIT_SOLVER
            raise CommandError(f"{exc.code}: {exc}", returncode=returncode)
        except ValueError as exc:
            raise CommandError(f"{E_CONFIG}: {exc}", returncode=EXIT_CONFIG)
        logger.info(f"Fin de {self.__module__.rsplit('.', 1)[-1]}")
        return result

    def run(self, **options):
        raise NotImplementedError
