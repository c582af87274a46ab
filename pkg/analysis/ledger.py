import logging
from typing import Any, Dict

from analysis.models import ExperimentRun, RunStatusOptions

logger = logging.getLogger(__name__)


def record_run(command: str, arguments: Dict[str, Any], config: Dict[str, Any], output: str,
               row_count: int, failed: bool = False) -> ExperimentRun:
    run = ExperimentRun.objects.create(
        command=command,
        arguments=arguments,
        seed=config['seed'],
        rel_tol=config['rel_tol'],
        max_level=config['max_level'],
        row_count=row_count,
        output_sha256=ExperimentRun.digest(output),
        status=RunStatusOptions.FAILED if failed else RunStatusOptions.SUCCEEDED,
    )
    logger.info('recorded run %s of %s', run.pk, command)
    return run
