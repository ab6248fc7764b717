"""Flat ``key = value`` configuration format.

Used both for run configs consumed by the command line tool and for the
bundled preset table (where ``[name]`` headers open named blocks).  Lines
starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Malformed configuration; ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def parse_flat(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines into a dict of raw strings."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            raise ConfigError(f"line {lineno}: block header {line!r} not allowed here")
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}", key=key)
        out[key] = value
    return out


def parse_blocks(text: str) -> dict[str, dict[str, str]]:
    """Parse a table of ``[name]`` blocks of ``key = value`` lines."""
    blocks: dict[str, dict[str, str]] = {}
    current: dict[str, str] | None = None
    name = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"line {lineno}: empty block name")
            if name in blocks:
                raise ConfigError(f"line {lineno}: duplicate block {name!r}")
            current = {}
            blocks[name] = current
            continue
        if current is None:
            raise ConfigError(f"line {lineno}: entry before any [name] header")
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in current:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{name}]", key=key)
        current[key] = value
    return blocks


def format_value(value) -> str:
    """Serialize one value; floats use repr so they round-trip bit-exactly."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_flat(mapping: dict) -> str:
    return "".join(f"{k} = {format_value(v)}\n" for k, v in mapping.items())


def get_float(entries: dict[str, str], key: str, default: float | None = None) -> float:
    if key not in entries:
        if default is None:
            raise ConfigError(f"{key} is required", key=key)
        return default
    try:
        return float(entries[key])
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {entries[key]!r}", key=key) from None


def get_str(entries: dict[str, str], key: str, default: str | None = None) -> str:
    if key not in entries:
        if default is None:
            raise ConfigError(f"{key} is required", key=key)
        return default
    return entries[key]


def get_choice(entries: dict[str, str], key: str, choices: tuple[str, ...],
               default: str | None = None) -> str:
    value = get_str(entries, key, default)
    if value not in choices:
        raise ConfigError(f"{key} must be one of {', '.join(choices)}; got {value!r}", key=key)
    return value


def get_bool(entries: dict[str, str], key: str, default: bool = False) -> bool:
    if key not in entries:
        return default
    value = entries[key].lower()
    if value in ("true", "yes", "1"):
        return True
    if value in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key} must be true or false, got {entries[key]!r}", key=key)
