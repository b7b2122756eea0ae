import argparse
from typing import List, Tuple

from src.utils.exceptions import UsageError

METHODS = ("uf", "sa", "rmh", "bap")


def parse_int_list(text: str) -> List[int]:
    """'1,2,5' -> [1, 2, 5]"""
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Ожидается список целых через запятую: {text}") from e
    if not values:
        raise argparse.ArgumentTypeError("Пустой список")
    return values


def parse_range(text: str) -> Tuple[float, float]:
    """'0.8,1.2' -> (0.8, 1.2)"""
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"Ожидается пара lo,hi: {text}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Ожидаются числа: {text}") from e
    if lo <= 0 or lo > hi:
        raise argparse.ArgumentTypeError(f"Нужно 0 < lo <= hi: {text}")
    return lo, hi


def parse_methods(text: str) -> List[str]:
    methods = [part.strip() for part in text.split(",") if part.strip()]
    unknown = [method for method in methods if method not in METHODS]
    if unknown or not methods:
        raise argparse.ArgumentTypeError(f"Неизвестные методы: {unknown or text}")
    return methods


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    """Флаги, общие для запуска методов"""
    parser.add_argument("--instance", required=True, help="JSON-файл экземпляра")
    parser.add_argument("--time-limit", type=float, default=None, help="Бюджет метода, секунды")
    parser.add_argument("--seed", type=int, default=0, help="Seed генераторов случайных чисел")
    parser.add_argument(
        "--pricing",
        choices=("heuristic", "exact"),
        default="heuristic",
        help="Способ прайсинга; exact в bap - полный поиск без допуска CG_GAP_EPS",
    )
    parser.add_argument("--parallel", type=int, default=None, help="Число параллельных подзадач")
    parser.add_argument("--m", type=parse_int_list, default=[1], help="Число дней совместной задачи SA (список)")
    parser.add_argument("--max-solutions", type=int, default=None, help="Остановка LNS после k-го решения")
    parser.add_argument("--gap-against", default=None, help="JSON нижней оценки для расчета разрыва")
    parser.add_argument("--timing", action="store_true", help="Включить wall_time в вывод")
    parser.add_argument("--out", default=None, help="Файл для JSON-вывода (иначе stdout)")
    parser.add_argument("--csv", default=None, help="Файл для CSV-вывода")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fleet-horizon",
        description="Планирование состава парка на многодневном горизонте",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    generate = subparsers.add_parser("generate", help="Сгенерировать синтетический горизонт")
    generate.add_argument("--base", required=True, help="JSON-экземпляр с базовым днем")
    generate.add_argument("--base-day", type=int, default=None, help="ID базового дня (по умолчанию первый)")
    generate.add_argument("--days", type=int, required=True, help="Число дней горизонта")
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--out", required=True, help="Файл экземпляра")
    generate.add_argument("--drop", type=float, default=0.0, help="Вероятность удалить заявку")
    generate.add_argument("--dup", type=float, default=0.0, help="Вероятность продублировать заявку")
    generate.add_argument("--scale", type=parse_range, default=(1.0, 1.0), help="Множитель спроса lo,hi")
    generate.add_argument("--jitter", type=float, default=0.0, help="Сдвиг координат дубликатов")
    generate.add_argument("--service-per-unit", type=float, default=0.0, help="Рост обслуживания на единицу груза")
    generate.add_argument("--windows", action="store_true", help="Пресеты временных окон")
    generate.add_argument("--min-requests", type=int, default=None)
    generate.add_argument("--max-requests", type=int, default=None)
    generate.add_argument("--split", type=int, default=None, help="Также записать K равных частей горизонта")
    generate.add_argument("--csv", default=None, help="Файл сводки по дням (иначе stdout)")

    solve = subparsers.add_parser("solve", help="Решить экземпляр методом")
    solve.add_argument("--method", choices=METHODS, required=True)
    solve.add_argument("--repeat", type=int, default=1, help="Число запусков с seed, seed+1, ...")
    solve.add_argument("--dump-store", default=None, help="JSON хранилища столбцов (rmh, bap)")
    solve.add_argument("--dump-lp", default=None, help="MPS итоговой ограниченной задачи (rmh, bap)")
    _add_run_arguments(solve)

    lb = subparsers.add_parser("lb", help="Приближенная нижняя оценка")
    lb.add_argument("--runs", type=int, default=5, help="Запусков маршрутизации на день")
    _add_run_arguments(lb)

    sweep = subparsers.add_parser("sweep", help="Серия экспериментов")
    sweep.add_argument("--sweep", choices=("days", "types", "solutions"), required=True)
    sweep.add_argument("--methods", type=parse_methods, default=["uf", "sa", "rmh"])
    sweep.add_argument("--max-types", type=int, default=3, help="Сколько последних типов удалить (types)")
    sweep.add_argument("--solutions", type=parse_int_list, default=[1, 2, 5, 10], help="Значения max_solutions")
    _add_run_arguments(sweep)
    return parser


def check_arguments(args: argparse.Namespace) -> None:
    """Проверки, которые argparse не выражает"""
    for name in ("repeat", "runs", "days", "split", "parallel", "max_solutions"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise UsageError(f"--{name.replace('_', '-')} должно быть >= 1")
    if getattr(args, "split", None) is not None and args.split > args.days:
        raise UsageError("--split не может превышать --days")
    if getattr(args, "time_limit", None) is not None and args.time_limit <= 0:
        raise UsageError("--time-limit должно быть > 0")
    for name in ("drop", "dup"):
        value = getattr(args, name, None)
        if value is not None and not 0.0 <= value <= 1.0:
            raise UsageError(f"--{name} должно быть в [0, 1]")
    if getattr(args, "m", None) and any(m < 1 for m in args.m):
        raise UsageError("--m должно быть >= 1")
