import csv
import io
import json
import math
from typing import Any, Iterable, Optional, Sequence


def formatValue(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return f'{value:.6g}'
    return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([formatValue(value) for value in row])
    return buffer.getvalue()


def jsonSafe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {key: jsonSafe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonSafe(item) for item in value]
    return value


def render_json(payload: Any) -> str:
    return json.dumps(jsonSafe(payload), indent=2, sort_keys=True) + '\n'


def render_table(columns: Sequence[str], rows: Sequence[Sequence[Any]], output_format: str) -> str:
    rows = [list(row) for row in rows]
    if output_format == 'json':
        return render_json([dict(zip(columns, row)) for row in rows])
    return render_csv(columns, rows)


def render_scalar(name: str, value: float, output_format: str, extra: Optional[dict] = None) -> str:
    if output_format == 'json':
        payload = {name: value}
        payload.update(extra or {})
        return render_json(payload)
    return formatValue(value) + '\n'
