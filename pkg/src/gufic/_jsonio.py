"""JSON loading with schema validation and line-numbered error messages."""
import json
import re

import jsonschema

from .errors import ConfigError


def _line_of(text, path):
    """Best-effort line number of the key addressed by ``path`` inside ``text``."""
    pos = 0
    skip = 0
    for part in path:
        if isinstance(part, int):
            skip = part
            continue
        pat = re.compile(r'"%s"\s*:' % re.escape(str(part)))
        m = None
        for _ in range(skip + 1):
            m = pat.search(text, pos if m is None else m.end())
            if m is None:
                break
        skip = 0
        if m is None:
            break
        pos = m.start()
    return text.count("\n", 0, pos) + 1


def _field_name(err):
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        m = re.match(r"'([^']+)' is a required property", err.message)
        if m:
            parts.append(m.group(1))
    return ".".join(parts) or "<root>"


def load_json(path, schema, what="config"):
    """Parse ``path`` and validate it against ``schema``.

    Raises ConfigError of the form ``file:line: field: message``.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read {what}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    validate(data, schema, path, text)
    return data


def validate(data, schema, path="<memory>", text=None):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        line = _line_of(text, list(err.absolute_path)) if text else 0
        raise ConfigError(f"{path}:{line}: {_field_name(err)}: {err.message}")
