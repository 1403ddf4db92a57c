"""Modal mu-calculus: syntax, equation systems, guarded transformation,
a fixpoint-iteration model checker and parity-game reductions."""
from .syntax import *  # noqa: F401,F403
from .hes import *  # noqa: F401,F403
from .semantics import *  # noqa: F401,F403
from .randgen import *  # noqa: F401,F403
from .guarded import *  # noqa: F401,F403
from .parity import *  # noqa: F401,F403
from .bench import *  # noqa: F401,F403
from . import dnf  # noqa: F401

__version__ = "0.1.0"
