"""Exception hierarchy shared by every xrecursive module."""


class XRecursiveError(Exception):
    pass


# -- parsing ---------------------------------------------------------------

class XmlError(XRecursiveError):
    """Base for everything the XML reader can reject."""


class MalformedXml(XmlError):
    def __init__(self, reason, offset=None):
        self.reason = reason
        self.offset = offset
        if offset is not None:
            reason = "%s (at offset %d)" % (reason, offset)
        super().__init__(reason)


class UnsupportedConstruct(XmlError):
    pass


class MixedContent(XmlError):
    pass


# -- storage ---------------------------------------------------------------

class StoreError(XRecursiveError):
    pass


class DuplicateDocument(StoreError):
    pass


class IdCollision(StoreError):
    pass


class UnknownDocument(StoreError):
    pass


class UnknownNode(StoreError):
    pass


class NotAnElement(StoreError):
    pass


class CorruptStore(StoreError):
    pass


class IoFailure(StoreError):
    pass


# -- querying --------------------------------------------------------------

class QuerySyntax(XRecursiveError):
    def __init__(self, position, reason):
        self.position = position
        self.reason = reason
        super().__init__("query syntax error at %d: %s" % (position, reason))
