from dataclasses import dataclass
from typing import Any, Dict, Optional

from django.conf import settings
from rest_framework import serializers


@dataclass(frozen=True)
class RunConfig:
    seed: int
    rel_tol: float
    max_level: int
    output_format: str
    threads: int
    plot: Optional[str] = None

    def ledgerFields(self) -> Dict[str, Any]:
        return {'seed': self.seed, 'rel_tol': self.rel_tol, 'max_level': self.max_level}


class RunConfigSerializer(serializers.Serializer):
    seed = serializers.IntegerField(min_value=0)
    rel_tol = serializers.FloatField()
    max_level = serializers.IntegerField(min_value=1, max_value=10)
    output_format = serializers.ChoiceField(choices=['json', 'csv'], default='csv')
    threads = serializers.IntegerField(min_value=1)
    plot = serializers.CharField(required=False, allow_null=True, default=None)

    def validate_rel_tol(self, value: float) -> float:
        if not 0 < value <= 0.5:
            raise serializers.ValidationError('rel_tol must lie in (0, 0.5]')
        return value

    def toConfig(self) -> RunConfig:
        return RunConfig(**self.validated_data)


def build_run_config(seed=None, rel_tol=None, max_level=None, output_format=None, threads=None,
                     plot=None) -> RunConfig:
    """RunConfig from CLI flags, falling back to ``settings.QHGEO``."""
    defaults = settings.QHGEO
    reader = RunConfigSerializer(data={
        'seed': defaults['SEED'] if seed is None else seed,
        'rel_tol': defaults['REL_TOL'] if rel_tol is None else rel_tol,
        'max_level': defaults['MAX_LEVEL'] if max_level is None else max_level,
        'output_format': output_format or 'csv',
        'threads': defaults['THREADS'] if threads is None else threads,
        'plot': plot,
    })
    reader.is_valid(raise_exception=True)
    return reader.toConfig()
