"""
日志模块
提供全项目共享的 logger 实例
"""

import logging

LOGGER_NAME = "acm_consensus"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

logger = logging.getLogger(LOGGER_NAME)


def setup_logging(level: str | int = "INFO") -> logging.Logger:
    """配置控制台日志输出，重复调用不会叠加 handler"""
    if isinstance(level, str):
        resolved = logging.getLevelName(level.strip().upper())
        if not isinstance(resolved, int):
            resolved = logging.INFO
    else:
        resolved = level

    if not any(getattr(h, "_acm_handler", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._acm_handler = True
        logger.addHandler(handler)
    logger.setLevel(resolved)
    logger.propagate = False
    return logger
