from typing import Any, Dict

from rest_framework import serializers


def coordinateField(**kwargs):
    return serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2, **kwargs)


class PairRowSerializer(serializers.Serializer):
    x1 = serializers.FloatField()
    y1 = serializers.FloatField()
    x2 = serializers.FloatField()
    y2 = serializers.FloatField()


class MetricSampleSerializer(serializers.Serializer):
    x = coordinateField()
    y = coordinateField()
    j = serializers.FloatField()
    k_est = serializers.FloatField()
    k_err = serializers.FloatField()
    ratio = serializers.FloatField()
    converged = serializers.BooleanField()
    level = serializers.IntegerField(min_value=0)
    geodesic = serializers.ListField(child=coordinateField(), required=False)

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        if attrs['j'] < 0 or attrs['k_est'] < 0:
            raise serializers.ValidationError('metric values must be nonnegative')
        return attrs


def sample_to_json(sample, with_geodesic: bool = False) -> Dict[str, Any]:
    record = sample.toRecord()
    if not with_geodesic:
        record.pop('geodesic', None)
    return dict(MetricSampleSerializer(record).data)
