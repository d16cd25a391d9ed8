import logging
import pathlib
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

load_dotenv()

from app.apis.base import ExemplarError, InputError, UsageError  # noqa: E402
from app.core.router import CommandParser, CommandRouter  # noqa: E402
from app.env import Settings, get_settings  # noqa: E402

logger = logging.getLogger("exemplars")


def import_api_routers() -> List[CommandRouter]:
    """Collect the router of every ``app/apis/*`` module that defines one."""
    src_path = pathlib.Path(__file__).parent
    apis_path = src_path / "app" / "apis"

    api_names = sorted(
        p.relative_to(apis_path).parent.as_posix()
        for p in apis_path.glob("*/__init__.py")
    )

    api_module_prefix = "app.apis."

    routers = []
    for name in api_names:
        api_module = __import__(api_module_prefix + name, fromlist=[name])
        api_router = getattr(api_module, "router", None)
        if isinstance(api_router, CommandRouter):
            logger.debug("Mounting commands from %s", name)
            routers.append(api_router)
    return routers


def create_app() -> CommandParser:
    """Build the top-level parser with one subcommand per registered route."""
    parser = CommandParser(
        prog="exemplars",
        description="Standard and exemplars of a pairwise valued relation by Borda rank aggregation",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for router in import_api_routers():
        router.include(subparsers)
    return parser


def configure_logging(settings: Settings) -> None:
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        stream=sys.stderr,
    )


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, execute the command and return its exit status."""
    try:
        settings = get_settings()
    except ValidationError as e:
        print(f"error: invalid settings: {e.errors()[0]['msg']}", file=sys.stderr)
        return UsageError.status

    configure_logging(settings)
    try:
        args = create_app().parse_args(argv)
        return args.handler(args)
    except ExemplarError as e:
        print(f"error: {e.detail}", file=sys.stderr)
        return e.status
    except UnicodeDecodeError as e:
        print(f"error: undecodable input: {e}", file=sys.stderr)
        return InputError.status
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return InputError.status


if __name__ == "__main__":
    sys.exit(run())
