import logging
import sys

FORMAT = "%(asctime)s %(levelname)s %(name)s :: %(message)s"


def setup_logging(level: str = "INFO") -> int:
    """Configure the root logger on stdout; returns the numeric level used.

    Safe to call once per CLI invocation: earlier handlers are replaced.
    numpy RuntimeWarnings (overflow in escaping orbits) go to the "py.warnings" logger.
    """
    numeric = logging.getLevelName(str(level).strip().upper())
    if not isinstance(numeric, int):
        numeric = logging.INFO
    logging.basicConfig(stream=sys.stdout, level=numeric, format=FORMAT, force=True)
    logging.captureWarnings(True)
    return numeric
