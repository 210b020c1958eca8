from .kneser import *
from .formula import *
from .substitution import *
from .resolution import *
from .counting import *
from .oracle import *
from .harness import *
from .exceptions import *
from .version import __version__
