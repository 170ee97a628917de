import logging
import sys

from loguru import logger

# Stdlib loggers whose records are forwarded to loguru
FORWARDED_LOGGERS = ("httpx", "httpcore")

# httpcore traces every connection phase at DEBUG
_NOISY_PREFIXES = ("connect_tcp.", "start_tls.", "send_request_", "receive_response_", "response_closed.")


def setup_loguru(level: str = "INFO", diagnose: bool = False) -> None:
    """Configure Loguru logger with PID in output.

    Logs go to stderr, stdout is reserved for command results.

    Args:
        level: The minimum level to emit
        diagnose: Show variable values in tracebacks
    """
    logger.remove()  # remove default handler
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
        "<cyan>{process}</cyan> | "  # PID
        "<level>{level: <8}</level> | "
        "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
        "<level>{message}</level>",
        level=level.upper(),
        backtrace=True,
        diagnose=diagnose,
    )


class InterceptHandler(logging.Handler):
    """Forwards stdlib log records to loguru, keeping the original call site."""

    def emit(self, record: logging.LogRecord) -> None:
        message = record.getMessage()
        if message.startswith(_NOISY_PREFIXES):
            return

        try:
            level: str | int = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        # skip logging's own frames so loguru reports the emitting module
        frame, depth = logging.currentframe(), 2
        while frame is not None and frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).bind(source=record.name).log(level, message)


def propagate_logs(names: tuple[str, ...] = FORWARDED_LOGGERS) -> None:
    """Routes the named stdlib loggers (and their children) through loguru.

    Safe to call more than once; each logger ends up with a single handler.
    """
    handler = InterceptHandler()
    for name in names:
        stdlib_logger = logging.getLogger(name)
        stdlib_logger.handlers = [handler]
        stdlib_logger.propagate = False
        for child_name in list(logging.root.manager.loggerDict):
            if child_name.startswith(f"{name}."):
                child = logging.getLogger(child_name)
                child.handlers = []
                child.propagate = True
