"""Regenerate golden.jsonl by running every request through the shim.

Usage: python shim/tests/make_golden.py

Each line of the output pairs one raw request line with the exact response
line the shim produced. The replay test compares bytes, so every case here
must be deterministic: fixed values, fixed exception messages, and timeout
responses that are canonical by construction.
"""

from __future__ import annotations

import json
import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from shim_support import (
    GOLDEN_PATH,
    GROUPING_ARGS,
    GROUPING_SOURCE,
    LOOP_SOURCE,
    MIN_OPS_ARGS,
    MIN_OPS_SOURCE,
    TINY_SOURCE,
    call_shim,
)


def entry(code, entry_point="f", args=None, time_ms=2000, trace=False, **extra):
    request = {
        "code": code,
        "entry_point": entry_point,
        "args": {} if args is None else args,
        "time_ms": time_ms,
        "trace": trace,
    }
    request.update(extra)
    return request


def stdin(code, text, time_ms=2000, trace=False):
    return {"code": code, "stdin_text": text, "time_ms": time_ms, "trace": trace}


REQUESTS = [
    # Plain returns across the value tree.
    entry(TINY_SOURCE, args={"x": 7}, trace=True),
    entry("def f(a, b):\n    return a + b", args={"a": 2, "b": 40}),
    entry("def f(x):\n    return None", args={"x": 1}),
    entry("def f(x):\n    return True", args={"x": 1}),
    entry("def f(x):\n    return x / 2", args={"x": 7}),
    entry("def f(x):\n    return 10 ** 30", args={"x": 1}),
    entry("def f(x):\n    return 'héllo ✓'", args={"x": 1}),
    entry("def f(x):\n    return (1, 2)", args={"x": 1}),
    entry("def f(x):\n    return {1: 'a', 2: 'b'}", args={"x": 1}),
    entry("def f(x):\n    return [1, [2, {'k': (3, 4)}]]", args={"x": 1}),
    entry("def f(x):\n    return b'ab'", args={"x": 1}),
    entry("def f():\n    return 42"),
    entry("def f(x):\n    print('working on', x)\n    return x", args={"x": 5}),
    entry(
        "import sys\ndef f(x):\n    sys.stderr.write('note\\n')\n    return x",
        args={"x": 5},
    ),
    # Traced step counts.
    entry(LOOP_SOURCE, args={"k": 1}, trace=True),
    entry(LOOP_SOURCE, args={"k": 10}, trace=True),
    entry(LOOP_SOURCE, args={"k": 100}, trace=True),
    entry(MIN_OPS_SOURCE, "minimumOperations", MIN_OPS_ARGS, time_ms=5000, trace=True),
    entry(
        GROUPING_SOURCE,
        "lexicographicallySmallestArray",
        GROUPING_ARGS,
        time_ms=5000,
        trace=True,
    ),
    # Stdin mode.
    stdin("x = int(input())\nprint(x * 2)", "21\n", trace=True),
    stdin("a = int(input())\nb = int(input())\nprint(a + b)", "3\n4\n"),
    stdin("print(input())", "héllo ✓\n"),
    stdin("for i in range(3):\n    print('line', i)", ""),
    stdin("print('constant')", ""),
    # Runtime failures.
    entry("def f(x):\n    raise ValueError('boom')", args={"x": 1}, trace=True),
    entry("def f(x):\n    return 1 // 0", args={"x": 1}),
    entry("def f(x):\n    return {}['k']", args={"x": 1}),
    entry("def f(x):\n    assert 1 == 2\n    return x", args={"x": 1}),
    entry("def f(x):\n    return x", args={}),
    entry("def f(x):\n    return x", "g", {"x": 1}),
    entry("g = 5\ndef f(x):\n    return x", "g", {"x": 1}),
    entry(
        "import sys\ndef f(x):\n    sys.stderr.write('about to fail\\n')\n"
        "    raise RuntimeError('late')",
        args={"x": 1},
    ),
    entry(
        "def helper(x):\n    return x // 0\ndef f(x):\n    return helper(x)",
        args={"x": 1},
    ),
    entry("def f(x):\n    raise MemoryError", args={"x": 1}),
    stdin("x = 1 + 1", ""),
    entry("def r(n):\n    return r(n + 1)\ndef f(x):\n    return r(0)", args={"x": 1}),
    entry(
        "def f(x):\n    data = []\n    while True:\n"
        "        data.append(bytearray(10 * 1024 * 1024))",
        args={"x": 1},
        time_ms=5000,
        memory_mb=64,
    ),
    # Timeouts, including candidates that fight the alarm.
    entry("def f(x):\n    while True:\n        pass", args={"x": 1}, time_ms=120),
    stdin("while True:\n    pass", "", time_ms=120),
    entry(
        "def f(x):\n    while True:\n        try:\n            pass\n"
        "        except BaseException:\n            pass",
        args={"x": 1},
        time_ms=120,
    ),
    entry(
        "import signal\nsignal.signal(signal.SIGALRM, signal.SIG_IGN)\n"
        "def f(x):\n    while True:\n        pass",
        args={"x": 1},
        time_ms=120,
    ),
    stdin("print('partial')\nwhile True:\n    pass", "", time_ms=120),
    entry("import time\ndef f(x):\n    time.sleep(10)", args={"x": 1}, time_ms=120),
    # Load failures.
    entry("def f(:", args={"x": 1}),
    entry("def f(x):\nreturn x", args={"x": 1}),
    entry("import nonexistent_module_xyz\ndef f(x):\n    return x", args={"x": 1}),
    entry("y = undefined_name\ndef f(x):\n    return x", args={"x": 1}),
    entry("import sys\nsys.exit(3)\ndef f(x):\n    return x", args={"x": 1}),
    entry("raise RuntimeError('bad setup')\ndef f(x):\n    return x", args={"x": 1}),
    entry("z = 1 // 0\ndef f(x):\n    return x", args={"x": 1}),
]


def main():
    pairs = []
    statuses = Counter()
    for request in REQUESTS:
        line = json.dumps(request, ensure_ascii=False)
        proc = call_shim(line, request["time_ms"] / 1000.0 + 10.0)
        if proc.returncode != 0:
            raise SystemExit(f"shim failed on: {line}\n{proc.stderr}")
        response_line = proc.stdout.rstrip("\n")
        statuses[json.loads(response_line)["status"]] += 1
        pairs.append({"request": line, "response": response_line})
    if len(pairs) != 50:
        raise SystemExit(f"expected 50 cases, have {len(pairs)}")
    if set(statuses) != {"ok", "exception", "timeout", "load_error"}:
        raise SystemExit(f"status coverage incomplete: {dict(statuses)}")
    with open(GOLDEN_PATH, "w", encoding="utf-8") as handle:
        for pair in pairs:
            handle.write(json.dumps(pair, ensure_ascii=False) + "\n")
    print(f"wrote {len(pairs)} pairs: {dict(statuses)}")


if __name__ == "__main__":
    main()
