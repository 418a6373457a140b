try:
    from ._kava import *  # noqa: F401,F403
    from ._kava import KavaError
except ImportError:
    from _kava import *  # noqa: F401,F403
    from _kava import KavaError

__all__ = [
    "KavaError",
    "compute_params",
    "convert",
    "evaluate",
    "isomorphic",
    "parameter_names",
    "run_cli",
    "synthesize_trial",
    "threshold_regions",
    "triples",
    "validate",
    "validate_fragment",
]
