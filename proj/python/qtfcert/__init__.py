"""Time-frequency entanglement certification from coincidence count matrices.

Thin re-export of the compiled _qtfcert module. For interactive use the
matrices are plain numpy uint64 arrays wrapped in JointCountMatrix; everything
heavier (simulation, binning, bootstrap) lives in the C++ core.
"""

try:
    # installed layout: the extension sits inside the package
    from ._qtfcert import *  # noqa: F401,F403
    from ._qtfcert import __version__  # noqa: F401
except ImportError:
    # in-tree test layout: the extension is on sys.path from the build dir
    from _qtfcert import *  # noqa: F401,F403
    from _qtfcert import __version__  # noqa: F401

__all__ = [
    "JointCountMatrix",
    "TargetState",
    "b_k",
    "certified_dimension",
    "eof_certify",
    "fidelity_certify",
    "measurement_budget",
    "poisson_bootstrap",
    "run_pipeline",
    "schmidt_decompose",
    "schmidt_number_from_delta",
    "steering_certify",
]
