"""Line-oriented scenario configuration files.

Grammar (one record per line):

    # comment                 full-line comments start with '#'
    [section]                 section header
    key = value               assignment inside the current section

Keys and section names are case-sensitive; surrounding whitespace is
stripped; values are stored verbatim as strings and converted on access.
Serialization writes sections and keys in insertion order, so
parse(serialize(parse(text))) == parse(text).
"""

from collections import OrderedDict

from ..errors import ConfigError


class ScenarioConfig:
    """Parsed configuration: ordered sections of ordered key/value pairs."""

    def __init__(self, sections=None):
        self.sections = OrderedDict()
        for name, kv in (sections or {}).items():
            self.sections[name] = OrderedDict(kv)

    # -- access ----------------------------------------------------------

    def has(self, section, key):
        return section in self.sections and key in self.sections[section]

    def raw(self, section, key, default=None):
        if self.has(section, key):
            return self.sections[section][key]
        return default

    def _typed(self, section, key, conv, default, kind):
        val = self.raw(section, key)
        if val is None:
            if default is not None:
                return default
            raise ConfigError([f"missing required key [{section}] {key}"])
        try:
            return conv(val)
        except (TypeError, ValueError):
            raise ConfigError(
                [f"[{section}] {key} = {val!r} is not a valid {kind}"]
            ) from None

    def get_str(self, section, key, default=None):
        return self._typed(section, key, str, default, "string")

    def get_float(self, section, key, default=None):
        return self._typed(section, key, float, default, "number")

    def get_int(self, section, key, default=None):
        def conv(v):
            x = float(v)
            if x != int(x):
                raise ValueError
            return int(x)
        return self._typed(section, key, conv, default, "integer")

    def get_bool(self, section, key, default=None):
        def conv(v):
            s = v.strip().lower()
            if s in ("true", "yes", "on", "1"):
                return True
            if s in ("false", "no", "off", "0"):
                return False
            raise ValueError
        return self._typed(section, key, conv, default, "boolean")

    # -- mutation --------------------------------------------------------

    def set(self, section, key, value):
        self.sections.setdefault(section, OrderedDict())[key] = str(value)

    def apply_overrides(self, overrides):
        """Apply 'section.key=value' strings (CLI --override)."""
        errors = []
        for item in overrides:
            if "=" not in item:
                errors.append(f"override {item!r} lacks '='")
                continue
            path, value = item.split("=", 1)
            if "." not in path:
                errors.append(f"override key {path!r} lacks 'section.key' form")
                continue
            section, key = path.split(".", 1)
            self.set(section.strip(), key.strip(), value.strip())
        if errors:
            raise ConfigError(errors)
        return self

    # -- equality (used by round-trip tests) ------------------------------

    def __eq__(self, other):
        if not isinstance(other, ScenarioConfig):
            return NotImplemented
        return self.sections == other.sections

    def __repr__(self):
        return f"ScenarioConfig({dict(self.sections)!r})"


def parse_config(text):
    """Parse configuration text; collects every syntax error before raising."""
    cfg = ScenarioConfig()
    errors = []
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                errors.append(f"line {lineno}: empty section name")
                section = None
            else:
                cfg.sections.setdefault(section, OrderedDict())
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        if section is None:
            errors.append(f"line {lineno}: assignment before any [section]")
            continue
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            errors.append(f"line {lineno}: empty key")
            continue
        cfg.sections[section][key] = value.strip()
    if errors:
        raise ConfigError(errors)
    return cfg


def serialize_config(cfg):
    """Render a ScenarioConfig back to its textual form."""
    lines = []
    for name, kv in cfg.sections.items():
        if lines:
            lines.append("")
        lines.append(f"[{name}]")
        for key, value in kv.items():
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def save_config(cfg, path):
    with open(path, "w") as fh:
        fh.write(serialize_config(cfg))
