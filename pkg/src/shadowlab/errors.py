"""Exception types shared across the package."""


class ShadowlabError(Exception):
    pass


class ConfigError(ShadowlabError):
    """Malformed or out-of-range configuration input."""


class ModelError(ShadowlabError):
    """Physically invalid model: non-CP map, singular frame, bad parameter."""
