import logging

from tenacity import before_sleep_log, retry, retry_if_exception_type, stop_after_attempt, wait_exponential

from .config import IO

logger = logging.getLogger('jobclust.ingest.retry')

# Transient failures on NFS/Lustre scratch; anything else surfaces at once
TRANSIENT_ERRORS = (TimeoutError, BlockingIOError, InterruptedError)


def with_retry(fn):
    """Retry stage-file and input reads on transient OS-level failures."""
    return retry(
        retry=retry_if_exception_type(TRANSIENT_ERRORS),
        stop=stop_after_attempt(IO.retry_attempts),
        wait=wait_exponential(multiplier=IO.retry_backoff_ms / 1000),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=True,
    )(fn)
