import logging
import sys

from dotenv import load_dotenv

# Загрузка переменных окружения из .env файла
load_dotenv()

from src.core.config import settings  # noqa: E402

# Настройка логирования: весь лог в stderr, stdout только для вывода команд
logging.basicConfig(
    level=settings.FLEET_LOG.upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)

from src.cli import run  # noqa: E402

if __name__ == "__main__":
    logger.debug(f"Запуск {settings.APP_NAME}")
    sys.exit(run())
