from volform.perm3 import classify, reduce_to_canonical, render_conditions
from volform.serializers import PermutationPairSerializer

from ._base import VolformCommand


class Command(VolformCommand):
    help = "Classe une paire (sigma, Sigma) et affiche ses conditions déterminantes"

    def add_arguments(self, parser):
        parser.add_argument('--sigma', required=True, help='Permutation des anciennes coordonnées a,b,c')
        parser.add_argument('--Sigma', required=True, help='Permutation des nouvelles coordonnées a,b,c')
        parser.add_argument('--out', help='Fichier de sortie (sortie standard par défaut)')

    def run(self, **options):
        pair = self.validated(PermutationPairSerializer, options, ('sigma', 'Sigma'))
        sigma, Sigma = pair['sigma'], pair['Sigma']
        pc = classify(sigma, Sigma)

        lines = [
            f"sigma: {sigma}",
            f"Sigma: {Sigma}",
            f"tau: {pc.tau.describe()}",
            f"sign(tau): {pc.sign}",
            f"adjoint: {'yes' if pc.adjoint_flag else 'no'}",
            f"relabel: {pc.relabel.describe()}",
        ]
        for name, s, S in reduce_to_canonical(sigma, Sigma):
            lines.append(f"reduction: {name} ({s}) ({S})")
        lines.append(render_conditions(sigma, Sigma))
        self.emit('\n'.join(lines) + '\n', options.get('out'))
