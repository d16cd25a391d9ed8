"""Decorator-based subcommand registry.

Usage:

    from app.core.router import Arg, CommandRouter

    router = CommandRouter(prefix="relation", help="Build relation matrices")

    @router.command("euclid", Arg("points"), Arg("--labels", action="store_true"))
    def euclid(args) -> int:
        ...

``main.create_app`` discovers every ``app/apis/*`` module exposing a
``router`` and mounts it on the top-level parser.
"""

import argparse
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from app.apis.base import UsageError

Handler = Callable[[argparse.Namespace], int]


class Arg:
    def __init__(self, *flags: str, **kwargs):
        self.flags = flags
        self.kwargs = kwargs


@dataclass
class Route:
    name: str
    endpoint: Handler
    arguments: Tuple[Arg, ...]
    help: Optional[str] = None


@dataclass
class CommandRouter:
    prefix: Optional[str] = None
    help: Optional[str] = None
    routes: List[Route] = field(default_factory=list)

    def command(self, name: str, *arguments: Arg, help: Optional[str] = None):
        def decorator(func: Handler) -> Handler:
            doc = help
            if doc is None and func.__doc__:
                doc = func.__doc__.strip().splitlines()[0]
            self.routes.append(Route(name, func, arguments, doc))
            return func

        return decorator

    def include(self, subparsers: argparse._SubParsersAction) -> None:
        target = subparsers
        if self.prefix:
            group = subparsers.add_parser(self.prefix, help=self.help)
            target = group.add_subparsers(dest=f"{self.prefix}_command", metavar="KIND")
            target.required = True

        for route in self.routes:
            path = f"{self.prefix} {route.name}" if self.prefix else route.name
            parser = target.add_parser(route.name, help=route.help, description=route.help)
            for arg in route.arguments:
                parser.add_argument(*arg.flags, **arg.kwargs)
            parser.set_defaults(handler=route.endpoint, command=path)


class CommandParser(argparse.ArgumentParser):
    """Argument parser that reports bad usage as ``UsageError`` (exit 3)."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")
