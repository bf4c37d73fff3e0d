# loader/logging_config.py
import logging
import logging.handlers
from pathlib import Path
from datetime import datetime

_HANDLER_TAG = "_jobclust_handler"


def setup_logging(log_dir: Path = Path("logs"), log_level: str = "INFO"):
    """
    Set up logging with file rotation and console output.

    Safe to call more than once: handlers installed by a previous call are replaced.
    """
    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    detailed_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'
    )
    simple_formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, log_level.upper()))
    for handler in list(root_logger.handlers):
        if getattr(handler, _HANDLER_TAG, False):
            root_logger.removeHandler(handler)
            handler.close()

    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(simple_formatter)

    file_handler = logging.handlers.RotatingFileHandler(
        log_dir / f"jobclust_{datetime.now():%Y%m%d}.log",
        maxBytes=10*1024*1024,  # 10MB
        backupCount=5
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(detailed_formatter)

    error_handler = logging.handlers.RotatingFileHandler(
        log_dir / "jobclust_errors.log",
        maxBytes=5*1024*1024,  # 5MB
        backupCount=3
    )
    error_handler.setLevel(logging.ERROR)
    error_handler.setFormatter(detailed_formatter)

    for handler in (console_handler, file_handler, error_handler):
        setattr(handler, _HANDLER_TAG, True)
        root_logger.addHandler(handler)

    # Warnings raised through warnings.warn end up in the same files
    logging.captureWarnings(True)

    loggers = {
        'ingest': logging.getLogger('jobclust.ingest'),
        'features': logging.getLogger('jobclust.features'),
        'select': logging.getLogger('jobclust.select'),
        'cluster': logging.getLogger('jobclust.cluster'),
        'rankviz': logging.getLogger('jobclust.rankviz'),
        'pipeline': logging.getLogger('jobclust.pipeline'),
    }

    return loggers
