import json
from pathlib import Path

from django.conf import settings
from rest_framework import serializers

from . import quadcalc as qc
from .exceptions import NotAPermutation
from .fields import PotentialTriple, QuadPotential, builtin, field_from_potentials
from .perm3 import Permutation
from .schemes import REGISTRY

FIELD_TYPES = ['linear', 'abc', 'quad-potentials']
POTENTIAL_SYMBOLS = (qc.x1, qc.x2, qc.x3)


def _volform_setting(key, default):
    return getattr(settings, 'VOLFORM', {}).get(key, default)


def parse_vector(text):
    """Lit un point "a,b,c" """
    parts = [p.strip() for p in str(text).split(',')]
    if len(parts) != 3:
        raise serializers.ValidationError('Trois composantes attendues : a,b,c.')
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise serializers.ValidationError(f"Composantes non numériques : {text}")


class FieldSpecSerializer(serializers.Serializer):
    """Serializer pour la description JSON d'un champ de vecteurs"""
    type = serializers.ChoiceField(choices=FIELD_TYPES)
    matrix = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=3, max_length=3),
        min_length=3, max_length=3, required=False,
    )
    A = serializers.FloatField(required=False, default=1.0)
    B = serializers.FloatField(required=False, default=1.0)
    C = serializers.FloatField(required=False, default=1.0)
    F1 = serializers.ListField(child=serializers.FloatField(), min_length=28, max_length=28,
                               required=False)
    F2 = serializers.ListField(child=serializers.FloatField(), min_length=28, max_length=28,
                               required=False)
    F3 = serializers.ListField(child=serializers.FloatField(), min_length=28, max_length=28,
                               required=False)

    def validate(self, attrs):
        if attrs['type'] == 'linear' and 'matrix' not in attrs:
            raise serializers.ValidationError({'matrix': 'Matrice 3x3 requise pour un champ linéaire.'})
        if attrs['type'] == 'quad-potentials':
            forms = {}
            for key in ('F1', 'F2', 'F3'):
                if key not in attrs:
                    continue
                try:
                    forms[key] = qc.QuadForm.from_list(attrs[key]).restrict(POTENTIAL_SYMBOLS)
                except ValueError as exc:
                    raise serializers.ValidationError({key: f"Potentiel invalide : {exc}"})
            if not forms:
                raise serializers.ValidationError('Au moins un potentiel F1, F2 ou F3 est requis.')
            attrs['forms'] = forms
        return attrs

    def create(self, validated_data):
        kind = validated_data['type']
        if kind == 'linear':
            return builtin('linear', matrix=validated_data['matrix'])
        if kind == 'abc':
            return builtin('abc', A=validated_data['A'], B=validated_data['B'],
                           C=validated_data['C'])
        potentials = {key: QuadPotential(form) for key, form in validated_data['forms'].items()}
        return field_from_potentials(PotentialTriple(**potentials), name='quad-potentials')


def load_field(path):
    """Lit et valide un fichier JSON de champ ; renvoie le Field3"""
    path = Path(path)
    if not path.is_file():
        raise serializers.ValidationError({'field': f"Fichier de champ introuvable : {path}"})
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except (OSError, ValueError) as exc:
        raise serializers.ValidationError({'field': f"JSON illisible dans {path} : {exc}"})
    serializer = FieldSpecSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


class RunConfigSerializer(serializers.Serializer):
    """Serializer pour les options communes des commandes de calcul"""
    field = serializers.CharField()
    scheme = serializers.ChoiceField(choices=list(REGISTRY))
    h = serializers.FloatField(required=False, default=0.01)
    steps = serializers.IntegerField(required=False, default=100, min_value=1)
    x0 = serializers.CharField(required=False, default='0.1,0.2,0.3')
    T = serializers.FloatField(required=False, default=1.0)
    h0 = serializers.FloatField(required=False, default=0.2)
    levels = serializers.IntegerField(required=False, default=4, min_value=1)
    samples = serializers.IntegerField(required=False, default=100, min_value=1)
    seed = serializers.IntegerField(required=False, default=0, min_value=0)
    out = serializers.CharField(required=False, allow_null=True, default=None)
    audit_every = serializers.IntegerField(required=False, allow_null=True, default=None,
                                           min_value=0)
    fail_above = serializers.FloatField(required=False, allow_null=True, default=None)
    box = serializers.FloatField(required=False, allow_null=True, default=None)

    def validate_h(self, value):
        if not value > 0:
            raise serializers.ValidationError('Le pas h doit être strictement positif.')
        return value

    def validate_h0(self, value):
        if not value > 0:
            raise serializers.ValidationError('Le pas h0 doit être strictement positif.')
        return value

    def validate_T(self, value):
        if not value > 0:
            raise serializers.ValidationError('Le temps final T doit être strictement positif.')
        return value

    def validate_x0(self, value):
        return parse_vector(value)

    def validate_box(self, value):
        if value is not None and not value > 0:
            raise serializers.ValidationError('La demi-largeur de la boîte doit être positive.')
        return value

    def validate(self, attrs):
        attrs['vector_field'] = load_field(attrs['field'])
        if attrs['audit_every'] is None:
            attrs['audit_every'] = int(_volform_setting('AUDIT_EVERY', 100))
        if attrs['box'] is None:
            attrs['box'] = float(_volform_setting('BOX', 1.0))
        return attrs


class PermutationPairSerializer(serializers.Serializer):
    """Serializer pour une paire (sigma, Sigma) donnée en texte "a,b,c" """
    sigma = serializers.CharField()
    Sigma = serializers.CharField()

    def _parse(self, value):
        try:
            return Permutation.parse(value)
        except NotAPermutation as exc:
            raise serializers.ValidationError(str(exc))

    def validate_sigma(self, value):
        return self._parse(value)

    def validate_Sigma(self, value):
        return self._parse(value)
