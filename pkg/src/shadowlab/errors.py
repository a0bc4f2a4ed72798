"""Exception hierarchy shared by all modules."""


class ShadowlabError(Exception):
    """Base class for every error raised by the package."""


class TransversalityError(ShadowlabError):
    def __init__(self, message, gap):
        super().__init__(f"{message} (gap={gap:.3e})")
        self.gap = gap


class ConditioningError(ShadowlabError):
    def __init__(self, message, smallest_singular_value):
        super().__init__(f"{message} (sigma_min={smallest_singular_value:.3e})")
        self.smallest_singular_value = smallest_singular_value


class NotAFixedPointError(ShadowlabError):
    def __init__(self, residual):
        super().__init__(f"state is not a fixed point (residual={residual:.3e})")
        self.residual = residual


class NotInjectiveError(ShadowlabError):
    pass


class NoAttractionError(ShadowlabError):
    pass


class BirkhoffCapError(ShadowlabError):
    pass


class DegenerateSplittingError(ShadowlabError):
    def __init__(self, message, index):
        super().__init__(f"{message} at index {index}")
        self.index = index


class NotUniformlyHyperbolicError(ShadowlabError):
    pass


class HyperbolicityTooWeakError(ShadowlabError):
    pass


class NonlinearityTooStrongError(ShadowlabError):
    pass


class SingularBlockError(ShadowlabError):
    def __init__(self, message, index):
        super().__init__(f"{message} at index {index}")
        self.index = index


class DivergenceError(ShadowlabError):
    pass


class NonConvergenceError(ShadowlabError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class HypothesisError(ShadowlabError):
    """A quantitative precondition of a shadowing or bounds result failed.

    ``stage`` names the pipeline step and ``inequality`` the violated relation
    in a human readable form, e.g. ``"d > d0"``.
    """

    def __init__(self, stage, inequality, **values):
        detail = ", ".join(f"{k}={v:.6g}" for k, v in values.items())
        super().__init__(f"[{stage}] {inequality}" + (f" ({detail})" if detail else ""))
        self.stage = stage
        self.inequality = inequality
        self.values = values


class ConditionNotMetError(ShadowlabError):
    pass


class ConfigError(ShadowlabError):
    pass


class OrbitFormatError(ShadowlabError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line
