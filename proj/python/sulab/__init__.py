"""Python face of the alpha-energy laboratory core."""

try:
    # Installed layout: the extension lives inside the package.
    from ._sulab_core import *  # noqa: F401,F403
    from . import _sulab_core as _core
except ImportError:
    # Build-tree layout: the extension sits next to the package on sys.path.
    from _sulab_core import *  # noqa: F401,F403
    import _sulab_core as _core

__all__ = [name for name in dir(_core) if not name.startswith("_")]
__version__ = "0.1.0"
