"""Shared artifact emission for the commands: a file when --out is given, else stdout."""
import sys
from pathlib import Path
from typing import Any, Optional

from app.storage import atomic_write_json, atomic_write_text, dumps


def emit_json(data: Any, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(dumps(data))
    else:
        atomic_write_json(out, data)


def emit_text(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(out, text)
