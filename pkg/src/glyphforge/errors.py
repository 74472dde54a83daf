"""Exception hierarchy. DataError subclasses map to CLI exit code 2."""


class GlyphforgeError(Exception):
    pass


class DataError(GlyphforgeError):
    """Bad or missing input data."""


class IoError(DataError):
    pass


class DecodeError(DataError):
    pass


class OutOfBounds(GlyphforgeError):
    pass


class EmptyRegion(GlyphforgeError):
    pass


class EmptyInput(GlyphforgeError):
    pass


class ShapeMismatch(GlyphforgeError):
    pass


class StaleCache(GlyphforgeError):
    pass


class MissingClassDir(DataError):
    pass


class EmptyClass(DataError):
    pass


class ClassTooSmall(DataError):
    pass


class OneClassOnly(DataError):
    pass


class NonFiniteLoss(GlyphforgeError):
    pass


class EmptyReference(DataError):
    pass


class EmptyStore(DataError):
    pass


class UnknownLabel(DataError):
    pass


class UnknownPage(DataError):
    pass


class InvalidLetter(DataError):
    pass


class StorageError(GlyphforgeError):
    pass


class BoxOutsidePage(GlyphforgeError):
    pass
