import logging
import os

from .settings import LOG_LEVEL_ENV


def _resolve_level(level):
    '''a logging level number from a name, a number or None (the environment)'''
    if level is None:
        level = os.environ.get(LOG_LEVEL_ENV, '').strip() or 'INFO'
        try:
            return _resolve_level(level)
        except ValueError:
            return logging.INFO
    if isinstance(level, str):
        number = logging.getLevelName(level.strip().upper())
        if not isinstance(number, int):
            raise ValueError(f"unknown log level '{level}'")
        return number
    return int(level)


def get_logger(name='rnda', level=None, stream=None,
               msg_fmt='[%(levelname)s] %(message)s', datefmt=None):
    '''
    Install a single stream handler on the package logger. Output goes to
    stderr unless another stream is given, so anything a command prints to
    stdout stays clean.

    `level` is a name or number; when left out it comes from the
    `RNDA_LOG_LEVEL` environment variable, and an unset or unknown value
    there means INFO.
    '''
    level = _resolve_level(level)
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.handlers.clear()

    handler = logging.StreamHandler(stream)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(msg_fmt, datefmt=datefmt))
    logger.addHandler(handler)
    return logger
