"""
Console logging setup with coloured level names
"""

import logging
import sys

from colorama import Fore, Style, init as colorama_init

LEVEL_COLORS = {
    logging.DEBUG: Style.DIM,
    logging.INFO: Fore.CYAN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Style.BRIGHT,
}


class ColorFormatter(logging.Formatter):
    """Formatter that colours the level name for terminals"""

    def __init__(self, use_color: bool = True):
        super().__init__("%(levelname)s %(name)s: %(message)s")
        self.use_color = use_color

    def format(self, record: logging.LogRecord) -> str:
        message = super().format(record)
        if not self.use_color:
            return message
        color = LEVEL_COLORS.get(record.levelno, "")
        return message.replace(
            record.levelname, f"{color}{record.levelname}{Style.RESET_ALL}", 1
        )


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Install a single stderr handler on the root logger"""
    colorama_init()
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO

    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_fxcast", False):
            root.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(ColorFormatter(use_color=sys.stderr.isatty()))
    handler._fxcast = True
    root.addHandler(handler)
    root.setLevel(level)
