import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from .errors import LockError, MissingArtifactError

logger = logging.getLogger(__name__)

LOCK_NAME = ".fxcast.lock"


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """Write to a temp file in the same directory, then rename over the target"""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def to_json_bytes(payload: Any) -> bytes:
    """Canonical JSON: sorted keys, fixed indent, trailing newline"""
    return (json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")


class FileManager:
    """Handles artifact files under the run output directory"""

    def __init__(self, save_directory: Optional[Path] = None):
        self.save_directory = Path(save_directory or Path.cwd() / "fxcast_out")
        self.save_directory.mkdir(parents=True, exist_ok=True)
        # Files written by the current command, restored or removed again on failure
        self.session_files: List[Path] = []
        self._previous: Dict[Path, Optional[bytes]] = {}
        self.locked = False

    def path(self, relative: str) -> Path:
        return self.save_directory / relative

    # Locking

    def acquire_lock(self) -> None:
        lock_path = self.path(LOCK_NAME)
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise LockError(
                f"output directory {self.save_directory} is in use "
                f"(remove {lock_path} if no other fxcast run is active)"
            ) from None
        with os.fdopen(fd, "w") as handle:
            handle.write(str(os.getpid()))
        self.locked = True

    def release_lock(self) -> None:
        if not self.locked:
            return
        try:
            self.path(LOCK_NAME).unlink()
        except FileNotFoundError:
            pass
        self.locked = False

    def __enter__(self) -> "FileManager":
        self.acquire_lock()
        self.session_files = []
        self._previous = {}
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is not None:
            self.rollback()
        self.release_lock()

    # Writing

    def write_bytes(self, relative: str, data: bytes) -> Path:
        target = self.path(relative)
        if target not in self.session_files:
            self._previous[target] = target.read_bytes() if target.is_file() else None
            self.session_files.append(target)
        atomic_write_bytes(target, data)
        logger.debug("wrote %s (%d bytes)", target, len(data))
        return target

    def write_text(self, relative: str, text: str) -> Path:
        return self.write_bytes(relative, text.encode("utf-8"))

    def write_json(self, relative: str, payload: Any) -> Path:
        return self.write_bytes(relative, to_json_bytes(payload))

    def write_csv(self, relative: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join("" if cell is None else str(cell) for cell in row))
        return self.write_text(relative, "\n".join(lines) + "\n")

    def rollback(self) -> List[Path]:
        """Undo the writes of the current command: new files go, overwritten ones get their old bytes back"""
        touched = []
        for target in reversed(self.session_files):
            previous = self._previous.get(target)
            if previous is None:
                if self.delete_file(target):
                    touched.append(target)
            else:
                atomic_write_bytes(target, previous)
                touched.append(target)
        if touched:
            logger.warning("rolled back %d output file(s)", len(touched))
        self.session_files = []
        self._previous = {}
        return touched

    # Reading

    def exists(self, relative: str) -> bool:
        return self.path(relative).exists()

    def read_text(self, relative: str) -> str:
        target = self.path(relative)
        if not target.exists():
            raise MissingArtifactError(f"missing artifact: {target}")
        return target.read_text(encoding="utf-8")

    def read_json(self, relative: str) -> Any:
        return json.loads(self.read_text(relative))

    def read_json_or(self, relative: str, default: Any) -> Any:
        if not self.exists(relative):
            return default
        return self.read_json(relative)

    def file_hash(self, relative: str) -> str:
        return sha256_bytes(self.path(relative).read_bytes())

    def list_artifacts(self) -> List[str]:
        """Relative paths of every artifact under the output directory, sorted"""
        files = []
        for candidate in self.save_directory.rglob("*"):
            if candidate.is_file() and not candidate.name.startswith("."):
                files.append(candidate.relative_to(self.save_directory).as_posix())
        return sorted(files)

    def delete_file(self, filepath: Path) -> bool:
        try:
            Path(filepath).unlink()
            return True
        except OSError as e:
            logger.debug("File deletion error: %s", e)
            return False
