import logging
from concurrent.futures import ProcessPoolExecutor

from tqdm import tqdm

from cli.models import SweepPointResult, SweepSpec
from cli.simulation import run_point
from cli.tasks import run_sweep_point

logger = logging.getLogger(__name__)


def execute(jobs, spec: SweepSpec, out_dir, workers=1, use_celery=False, converge=False):
    """
    Run sweep points and return their results in job order.

    :param jobs: (scenario, file name) pairs.
    :param workers: Local process count; ignored with ``use_celery``.
    :param use_celery: Dispatch every point to the Celery workers and wait.
    """
    if use_celery:
        return _execute_celery(jobs, spec, out_dir, converge)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_point, scenario, spec, out_dir, name, converge)
                for scenario, name in jobs
            ]
            return [f.result() for f in tqdm(futures, desc="sweep", unit="point")]
    return [
        run_point(scenario, spec, out_dir, name, converge)
        for scenario, name in tqdm(jobs, desc="sweep", unit="point")
    ]


def _execute_celery(jobs, spec: SweepSpec, out_dir, converge):
    payload = spec.model_dump(mode="json")
    pending = [
        run_sweep_point.delay(scenario.model_dump(mode="json"), payload, out_dir, name, converge)
        for scenario, name in jobs
    ]
    logger.info(f"Dispatched {len(pending)} sweep points to Celery")
    results = []
    for task in tqdm(pending, desc="sweep", unit="point"):
        result = SweepPointResult.model_validate(task.get())
        if result.error:
            logger.error(f"Sweep point {result.path} failed: {result.error}")
        results.append(result)
    return results
