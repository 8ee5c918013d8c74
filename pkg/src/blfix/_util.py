"""Small shared helpers."""

import os
import tempfile


def atomic_write_text(path: str, text: str) -> None:
    """Write text to path via a temp file in the same directory plus rename.

    A failure mid-write never leaves a partial file at the destination.
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
