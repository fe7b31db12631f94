#!/usr/bin/env python3
"""policy-to-tests - 저장소 루트 실행기.

설치 없이 실행할 때:
    python main.py run --config p2t.json --offline
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent / "src"))

from policy_to_tests.main import main  # noqa: E402

if __name__ == "__main__":
    main()
