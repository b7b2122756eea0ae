import logging
import sys
from typing import Callable, Dict, List, Optional, TextIO

from src.cli.commands import cmd_generate, cmd_lb, cmd_solve, cmd_sweep
from src.cli.parser import build_parser, check_arguments
from src.core.errors import report_error
from src.utils.exceptions import BaseAppException

logger = logging.getLogger(__name__)

# Регистрируем все команды
COMMANDS: Dict[str, Callable] = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "lb": cmd_lb,
    "sweep": cmd_sweep,
}


def run(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    """Разобрать аргументы, выполнить команду, вернуть код завершения"""
    args = build_parser().parse_args(argv)
    try:
        check_arguments(args)
        return COMMANDS[args.command](args, stdout or sys.stdout)
    except BaseAppException as e:
        logger.error(f"Команда {args.command} завершилась ошибкой: {e.message}")
        return report_error(e, stderr or sys.stderr)
    except Exception as e:
        logger.exception(f"Непредвиденная ошибка в команде {args.command}")
        return report_error(e, stderr or sys.stderr)
