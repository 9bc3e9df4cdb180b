"""Run recursive work on a thread with a large stack.

Loop approximants are deep DAGs and every traversal here is recursive, so
the interpreter's default recursion limit is too small for them. Raising the
limit on the main thread is unsafe because its native stack is fixed.
"""

from __future__ import annotations

import functools
import sys
import threading

STACK_BYTES = 512 * 1024 * 1024
RECURSION_LIMIT = 200_000

_lock = threading.Lock()
_active = [0, 0]  # running calls, recursion limit to restore


def deep_call(fn, *args, **kwargs):
    """Call ``fn`` on a fresh thread with a 512 MiB stack; exceptions propagate."""
    box: dict = {}

    def target():
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as exc:  # re-raised in the caller
            box["error"] = exc

    with _lock:
        if _active[0] == 0:
            _active[1] = sys.getrecursionlimit()
            sys.setrecursionlimit(max(_active[1], RECURSION_LIMIT))
        _active[0] += 1
        old_stack = threading.stack_size(STACK_BYTES)
        try:
            worker = threading.Thread(target=target, name="qhl-deep")
            worker.start()
        finally:
            threading.stack_size(old_stack)
    worker.join()
    with _lock:
        _active[0] -= 1
        if _active[0] == 0:
            sys.setrecursionlimit(_active[1])
    if "error" in box:
        raise box["error"]
    return box.get("value")


def on_deep_stack(fn):
    """Decorator: run ``fn`` through :func:`deep_call` unless already on a deep thread."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        if threading.current_thread().name == "qhl-deep":
            return fn(*args, **kwargs)
        return deep_call(fn, *args, **kwargs)

    return wrapper
