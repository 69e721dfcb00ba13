import time
from contextlib import contextmanager

LINES = []


@contextmanager
def criterion(number, title):
    """Record one ``PASS``/``FAIL`` line for an acceptance criterion.

    The body may append measured values to the yielded list; they are
    printed after the verdict.
    """
    notes = []
    t0 = time.perf_counter()
    try:
        yield notes
    except BaseException as exc:
        notes.append(f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
        LINES.append(_fmt(number, "FAIL", title, notes, time.perf_counter() - t0))
        raise
    LINES.append(_fmt(number, "PASS", title, notes, time.perf_counter() - t0))


def _fmt(number, verdict, title, notes, elapsed):
    detail = "; ".join(notes)
    return f"criterion {number}: {verdict} {title} [{elapsed:.1f}s] {detail}"
