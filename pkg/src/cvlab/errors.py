"""Exception hierarchy shared by every module of the lab."""


class LabError(Exception):
    """Base class for all errors raised by cvlab."""


# crypto core
class MalformedPadding(LabError, ValueError):
    pass


class EmptyKey(LabError, ValueError):
    pass


class MessageOutOfRange(LabError, ValueError):
    pass


class DigestTooLarge(LabError, ValueError):
    pass


class ZeroModulus(LabError, ZeroDivisionError):
    pass


# host simulation
class NoBackup(LabError):
    pass


class AuthenticationFailed(LabError):
    pass


class PolicyDenied(LabError):
    def __init__(self, primitive: str, privilege: str):
        super().__init__(f"{privilege} process may not invoke {primitive}")
        self.primitive = primitive
        self.privilege = privilege


class UnknownPrimitive(LabError, KeyError):
    pass


class UnknownHost(LabError, KeyError):
    pass


# extortion
class AlreadyInfected(LabError):
    pass


class NoNote(LabError):
    pass


class InsufficientPayment(LabError):
    pass


class MalformedCiphertext(LabError, ValueError):
    pass


class WrongKey(LabError):
    pass


# key sharing
class InvalidThreshold(LabError, ValueError):
    pass


class InsufficientShares(LabError):
    pass


class DuplicateIndex(LabError, ValueError):
    pass


# password snatching
class CredentialTooLargeForGroup(LabError, ValueError):
    pass


class MalformedRecord(LabError, ValueError):
    pass


# signed updates
class EmptyPayload(LabError, ValueError):
    pass


class SignatureMismatch(LabError):
    pass


class PackageFormatError(LabError, ValueError):
    pass


# cli
class ConfigInvalid(LabError, ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
