"""로거 설정.

포맷: [YYYY-MM-DD HH:MM:SS] [LEVEL] name: MESSAGE
레벨은 5자로 패딩하며, 단계 성공(OK)과 건너뜀(SKIP) 두 레벨을 추가로 씁니다.
P2T_LOG_DIR 이 설정되면 일별 로테이션 파일(p2t_YYYYMMDD.log)에도 기록합니다.
"""

from __future__ import annotations

import logging
import os
import sys
from datetime import datetime
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path

OK_LEVEL = 25
SKIP_LEVEL = 26
logging.addLevelName(OK_LEVEL, "OK")
logging.addLevelName(SKIP_LEVEL, "SKIP")


class LevelFormatter(logging.Formatter):
    """레벨명을 5자로 패딩: INFO -> INFO , WARNING -> WARN ."""

    LEVEL_MAP = {
        "DEBUG": "DEBUG",
        "INFO": "INFO ",
        "WARNING": "WARN ",
        "ERROR": "ERROR",
        "CRITICAL": "ERROR",
        "OK": "OK   ",
        "SKIP": "SKIP ",
    }

    def format(self, record: logging.LogRecord) -> str:
        level = self.LEVEL_MAP.get(record.levelname, record.levelname[:5].ljust(5))
        dt = datetime.fromtimestamp(record.created).strftime("%Y-%m-%d %H:%M:%S")
        line = f"[{dt}] [{level}] {record.name}: {record.getMessage()}"
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line


def setup_logging(verbose: bool = False, log_dir: Path | None = None) -> None:
    """루트 로거를 설정합니다.

    Args:
        verbose: True면 DEBUG 레벨.
        log_dir: 파일 로그 디렉토리 (None이면 P2T_LOG_DIR 환경변수, 그것도 없으면 콘솔만).
    """
    root = logging.getLogger()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    for handler in list(root.handlers):
        root.removeHandler(handler)

    formatter = LevelFormatter()
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(formatter)
    root.addHandler(console)

    env_dir = os.environ.get("P2T_LOG_DIR", "").strip()
    target = log_dir or (Path(env_dir) if env_dir else None)
    if target is not None:
        target.mkdir(parents=True, exist_ok=True)
        log_file = target / f"p2t_{datetime.now().strftime('%Y%m%d')}.log"
        file_handler = TimedRotatingFileHandler(
            log_file, when="midnight", interval=1, backupCount=0, encoding="utf-8"
        )
        file_handler.suffix = "%Y%m%d"
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)
