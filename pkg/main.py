"""
sqzkit: командная строка

Использование: python main.py <команда> [--config run.json] [--out result.csv] [--json]
"""
import sys

from dotenv import load_dotenv

load_dotenv()

from service_factory import service_factory  # noqa: E402
from src.cli.app import run  # noqa: E402


def main() -> int:
    return run(
        sys.argv[1:],
        fit_options=service_factory.get_fit_options(),
        registry=service_factory.get_command_registry(),
        storage=service_factory.get_table_storage(),
    )


if __name__ == "__main__":
    sys.exit(main())
