"""JSON domain specification.

Grammar::

    {
      "name": "comb",
      "primitives": [{"kind": "rectangle", "xmin": 0, "xmax": 1, "ymin": -2, "ymax": 0}, ...],
      "boundary":   [{"kind": "segment", "a": [0, 0], "b": [1, 0]}, ...],
      "complement": false,
      "bbox":       {"xmin": ..., "xmax": ..., "ymin": ..., "ymax": ...},
      "truncation": {"xmin": ..., "xmax": ..., "ymin": ..., "ymax": ..., "inner_radius": 0.01},
      "catalog":    {"name": "comb", "u": 0.2, "t": 0.4, "v": 0.7, "kmax": 8}
    }

Primitive kinds: rectangle, disc (center, radius), semidisc (center, radius,
normal), polygon (vertices), halfplane (point, normal), plane. Boundary kinds:
segment (a, b), arc (center, radius, start_angle, end_angle, ccw), line
(point, direction), puncture (point). Exactly one of ``bbox`` (bounded) or
``truncation`` (unbounded) is given. A document holding only ``catalog`` is
rebuilt from the catalog.
"""

from typing import Any, Dict

from rest_framework import serializers

from geometry.exceptions import QhGeoError
from geometry.domain import Domain
from geometry.primitives import (
    ArcElement,
    Box,
    ConvexPolygon,
    Disc,
    HalfPlane,
    LineElement,
    Point,
    PunctureElement,
    Rectangle,
    SegmentElement,
    SemiDisc,
    WholePlane,
)


def coordinateField(**kwargs):
    return serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2, **kwargs)


PRIMITIVE_REQUIREMENTS = {
    'rectangle': ('xmin', 'xmax', 'ymin', 'ymax'),
    'disc': ('center', 'radius'),
    'semidisc': ('center', 'radius'),
    'polygon': ('vertices',),
    'halfplane': ('point', 'normal'),
    'plane': (),
}

BOUNDARY_REQUIREMENTS = {
    'segment': ('a', 'b'),
    'arc': ('center', 'radius', 'start_angle', 'end_angle'),
    'line': ('point', 'direction'),
    'puncture': ('point',),
}


class PrimitiveSpecSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=sorted(PRIMITIVE_REQUIREMENTS))
    xmin = serializers.FloatField(required=False)
    xmax = serializers.FloatField(required=False)
    ymin = serializers.FloatField(required=False)
    ymax = serializers.FloatField(required=False)
    center = coordinateField(required=False)
    radius = serializers.FloatField(required=False, min_value=0.0)
    normal = coordinateField(required=False)
    point = coordinateField(required=False)
    vertices = serializers.ListField(child=coordinateField(), required=False, min_length=3)

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        missing = [name for name in PRIMITIVE_REQUIREMENTS[attrs['kind']] if name not in attrs]
        if missing:
            raise serializers.ValidationError(
                f"{attrs['kind']} primitive is missing: {', '.join(missing)}"
            )
        return attrs

    def toPrimitive(self, attrs: Dict[str, Any]):
        kind = attrs['kind']
        if kind == 'rectangle':
            return Rectangle(attrs['xmin'], attrs['xmax'], attrs['ymin'], attrs['ymax'])
        if kind == 'disc':
            return Disc(Point.fromSequence(attrs['center']), attrs['radius'])
        if kind == 'semidisc':
            normal = Point.fromSequence(attrs.get('normal', [0.0, 1.0]))
            return SemiDisc(Point.fromSequence(attrs['center']), attrs['radius'], normal)
        if kind == 'polygon':
            return ConvexPolygon(tuple(Point.fromSequence(vertex) for vertex in attrs['vertices']))
        if kind == 'halfplane':
            return HalfPlane(Point.fromSequence(attrs['point']), Point.fromSequence(attrs['normal']))
        return WholePlane()


class BoundarySpecSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=sorted(BOUNDARY_REQUIREMENTS))
    a = coordinateField(required=False)
    b = coordinateField(required=False)
    center = coordinateField(required=False)
    radius = serializers.FloatField(required=False)
    start_angle = serializers.FloatField(required=False)
    end_angle = serializers.FloatField(required=False)
    ccw = serializers.BooleanField(required=False, default=True)
    point = coordinateField(required=False)
    direction = coordinateField(required=False)

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        missing = [name for name in BOUNDARY_REQUIREMENTS[attrs['kind']] if name not in attrs]
        if missing:
            raise serializers.ValidationError(
                f"{attrs['kind']} boundary element is missing: {', '.join(missing)}"
            )
        if attrs['kind'] == 'segment' and list(attrs['a']) == list(attrs['b']):
            raise serializers.ValidationError('segment endpoints must be distinct')
        if attrs['kind'] == 'arc' and not attrs['radius'] > 0:
            raise serializers.ValidationError('arc radius must be positive')
        return attrs

    def toElement(self, attrs: Dict[str, Any]):
        kind = attrs['kind']
        if kind == 'segment':
            return SegmentElement(Point.fromSequence(attrs['a']), Point.fromSequence(attrs['b']))
        if kind == 'arc':
            return ArcElement(Point.fromSequence(attrs['center']), attrs['radius'],
                              attrs['start_angle'], attrs['end_angle'], attrs.get('ccw', True))
        if kind == 'line':
            return LineElement(Point.fromSequence(attrs['point']), Point.fromSequence(attrs['direction']))
        return PunctureElement(Point.fromSequence(attrs['point']))


class BoxSpecSerializer(serializers.Serializer):
    xmin = serializers.FloatField()
    xmax = serializers.FloatField()
    ymin = serializers.FloatField()
    ymax = serializers.FloatField()
    inner_radius = serializers.FloatField(required=False, default=0.0, min_value=0.0)

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        if not (attrs['xmin'] < attrs['xmax'] and attrs['ymin'] < attrs['ymax']):
            raise serializers.ValidationError('box must have positive extent')
        return attrs


class DomainSpecSerializer(serializers.Serializer):
    name = serializers.CharField(max_length=200, required=False, default='domain')
    primitives = PrimitiveSpecSerializer(many=True, required=False)
    boundary = BoundarySpecSerializer(many=True, required=False)
    complement = serializers.BooleanField(required=False, default=False)
    bbox = BoxSpecSerializer(required=False)
    truncation = BoxSpecSerializer(required=False)
    catalog = serializers.DictField(required=False)

    def validate(self, attrs: Dict[str, Any]) -> Dict[str, Any]:
        explicit = 'primitives' in attrs or 'boundary' in attrs
        if not explicit:
            if 'catalog' not in attrs or 'name' not in attrs['catalog']:
                raise serializers.ValidationError('give primitives and boundary, or a catalog entry')
            return attrs
        if not attrs.get('primitives') or not attrs.get('boundary'):
            raise serializers.ValidationError('primitives and boundary must both be nonempty')
        if ('bbox' in attrs) == ('truncation' in attrs):
            raise serializers.ValidationError('give exactly one of bbox or truncation')
        return attrs

    def buildDomain(self) -> Domain:
        attrs = self.validated_data
        if 'primitives' not in attrs:
            from domains.catalog import catalog_domain

            options = dict(attrs['catalog'])
            catalogName = options.pop('name')
            try:
                return catalog_domain(catalogName, **options)
            except (QhGeoError, TypeError) as exc:
                raise serializers.ValidationError({'catalog': [str(exc)]})

        primitiveReader = PrimitiveSpecSerializer()
        boundaryReader = BoundarySpecSerializer()
        boxAttrs = attrs.get('bbox') or attrs.get('truncation')
        try:
            return Domain(
                name=attrs['name'],
                primitives=tuple(primitiveReader.toPrimitive(item) for item in attrs['primitives']),
                boundary=tuple(boundaryReader.toElement(item) for item in attrs['boundary']),
                box=Box(boxAttrs['xmin'], boxAttrs['xmax'], boxAttrs['ymin'], boxAttrs['ymax']),
                unbounded='truncation' in attrs,
                complement=attrs['complement'],
                inner_radius=boxAttrs.get('inner_radius', 0.0),
                metadata=attrs.get('catalog', {}),
            )
        except QhGeoError as exc:
            raise serializers.ValidationError(str(exc))


def domain_from_json(document: Dict[str, Any]) -> Domain:
    reader = DomainSpecSerializer(data=document)
    reader.is_valid(raise_exception=True)
    return reader.buildDomain()


def domain_to_json(domain: Domain) -> Dict[str, Any]:
    return domain.toRecord()
