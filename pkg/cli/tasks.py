import logging

from celery import shared_task

from cavity_qed import settings
from cli.models import SweepSpec
from cli.simulation import run_point
from evolution.models import Scenario

# Configure logging
logging.basicConfig(level=settings.LOG_LEVEL, format=settings.LOG_FORMAT)
logger = logging.getLogger(__name__)


@shared_task(bind=True)
def run_sweep_point(self, scenario: dict, spec: dict, out_dir: str, name: str, converge: bool = False):
    """
    Celery task running one sweep point on a worker.

    :param self: Task instance
    :param scenario: Scenario dumped in JSON mode
    :param spec: SweepSpec dumped in JSON mode
    :param out_dir: Directory shared with the dispatcher
    :param name: CSV file name
    :param converge: Raise truncations until the concurrences settle
    :return: SweepPointResult as a JSON-compatible dict
    """
    logger.info(f"Starting sweep point {name}")
    try:
        result = run_point(
            Scenario.model_validate(scenario),
            SweepSpec.model_validate(spec),
            out_dir,
            name=name,
            converge=converge,
        )
    except Exception as e:
        logger.error(f"Sweep point {name} failed: {e}")
        return {
            "path": name,
            "samples": 0,
            "flagged": 0,
            "max_concurrences": [0.0, 0.0, 0.0],
            "truncations": [0, 0],
            "error": str(e),
        }
    logger.info(f"Sweep point {name} completed")
    return result.model_dump(mode="json")
