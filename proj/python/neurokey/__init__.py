"""EEG-derived key generation, secured link codec and mission simulator."""

try:
    from ._neurokey import *  # noqa: F401,F403  (installed package layout)
    from ._neurokey import __doc__  # noqa: F401
except ImportError:  # pragma: no cover - in-tree builds put the module on sys.path
    from _neurokey import *  # noqa: F401,F403
