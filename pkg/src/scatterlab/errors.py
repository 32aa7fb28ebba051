"""Exception types shared across the package."""


class GuardRailError(RuntimeError):
    """An enumeration-backed operation would exceed the configured size limit."""


class ClaimCheckError(AssertionError):
    """A computed object contradicts a statement the construction relies on.

    ``claim`` names the statement that failed so reports can point at it.
    """

    def __init__(self, claim, detail=""):
        self.claim = claim
        self.detail = detail
        msg = claim if not detail else f"{claim}: {detail}"
        super().__init__(msg)
