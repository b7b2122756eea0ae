import logging
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.config import settings

logger = logging.getLogger(__name__)


def derive_seed(*parts: int) -> int:
    """Детерминированный seed подзадачи из (seed, итерация, день, ...)"""
    entropy = [int(part) & 0xFFFFFFFF for part in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def make_executor(workers: int, kind: Optional[str] = None) -> Executor:
    kind = kind or settings.EXECUTOR
    if kind == "process":
        return ProcessPoolExecutor(max_workers=workers)
    return ThreadPoolExecutor(max_workers=workers)


def _guarded(fn: Callable, args: Tuple) -> Any:
    try:
        return fn(*args)
    except Exception as e:  # noqa: BLE001 - ошибка возвращается вызывающему по месту задачи
        return e


def run_tasks(fn: Callable, tasks: Sequence[Tuple], workers: Optional[int] = None) -> List[Any]:
    """
    Выполнить fn(*args) для каждой задачи. Результаты возвращаются в порядке
    задач; исключение задачи возвращается на ее месте вместо результата
    """
    workers = min(workers or settings.workers, len(tasks)) if tasks else 0
    if workers <= 1:
        return [_guarded(fn, args) for args in tasks]
    with make_executor(workers) as pool:
        futures = [pool.submit(_guarded, fn, args) for args in tasks]
        return [future.result() for future in futures]
