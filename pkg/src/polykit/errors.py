"""Exception hierarchy shared across the toolkit.

Two broad groups matter for the CLI exit-code contract: ValidationError
(bad configuration or arguments, exit 1) and DataError (unreadable or
malformed input files, exit 2).
"""


class PolykitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(PolykitError):
    """Invalid configuration, arguments, or incompatible inputs (exit 1)."""


class DataError(PolykitError):
    """Malformed or unreadable data files (exit 2)."""


class UnknownLanguageError(ValidationError):
    def __init__(self, code):
        super().__init__(f"unknown language code: {code!r}")
        self.code = code


class UnknownTaskError(ValidationError):
    def __init__(self, kind):
        super().__init__(f"unknown task kind: {kind!r}")
        self.kind = kind


class TemplateParseError(DataError):
    """Template source could not be parsed; offset is a UTF-8 byte offset."""

    def __init__(self, message, byte_offset):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class MissingTemplateError(ValidationError):
    def __init__(self, dataset, uniformity, lang):
        super().__init__(
            f"no template for dataset={dataset!r} uniformity={uniformity!r} lang={lang!r}"
        )
        self.dataset = dataset
        self.uniformity = uniformity
        self.lang = lang


class MissingFieldError(ValidationError):
    def __init__(self, sample_id, field):
        super().__init__(f"sample {sample_id!r} is missing field {field!r}")
        self.sample_id = sample_id
        self.field = field


class UnknownLabelError(ValidationError):
    def __init__(self, label, template_id, sample_id=None):
        where = f" (sample {sample_id!r})" if sample_id is not None else ""
        super().__init__(
            f"label {label!r} not in verbalizer of template {template_id!r}{where}"
        )
        self.label = label
        self.template_id = template_id
        self.sample_id = sample_id


class SchemaError(DataError):
    """A record violates the task schema; carries the 1-based line number."""

    def __init__(self, message, line=None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(message + where)
        self.line = line


class KeyMismatchError(ValidationError):
    def __init__(self, message, only_left=(), only_right=()):
        self.only_left = sorted(only_left)
        self.only_right = sorted(only_right)
        detail = ""
        if self.only_left or self.only_right:
            detail = f" only_left={self.only_left[:10]} only_right={self.only_right[:10]}"
        super().__init__(message + detail)
