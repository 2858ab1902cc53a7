"""Exception types shared across the toolkit."""


class RelviewsError(Exception):
    """Base class for all toolkit errors."""


class ModelError(RelviewsError):
    """A model or outline file is malformed or internally inconsistent."""


class UndefinedLocation(RelviewsError):
    """An expression read a heap location that is absent from the state."""

    def __init__(self, loc):
        super().__init__(f"read of undefined location {loc!r}")
        self.loc = loc


class FaultReachable(RelviewsError):
    """A transformer produced the fault state; carries the offending context."""

    def __init__(self, detail, schedule=None):
        super().__init__(detail)
        self.schedule = schedule or []


class UniverseTooLarge(RelviewsError):
    """An enumeration would exceed the configured state cap."""

    def __init__(self, size, cap):
        super().__init__(
            f"universe of size {size} exceeds cap {cap}; "
            f"raise --cap / RELVIEWS_CAP or restrict the model domains"
        )
        self.size = size
        self.cap = cap


class StabilityViolation(RelviewsError):
    """A view assertion's predicate is not closed under its rely."""

    def __init__(self, local, shared, shared2):
        super().__init__(
            "assertion is unstable: rely moves shared state "
            f"{shared} to {shared2} but the predicate does not cover the result"
        )
        self.witness = (local, shared, shared2)


class LocalityViolation(RelviewsError):
    """A primitive's transformer is not local in the separation-logic sense."""

    def __init__(self, prim, state, frame):
        super().__init__(f"primitive {prim} is not local at {state} with frame {frame}")
        self.prim = prim
        self.state = state
        self.frame = frame
