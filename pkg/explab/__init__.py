__version_info__ = ('0', '1', '0')
__version__ = '.'.join(__version_info__)

from .core import *
from .utils import *
from .channel import *
from .typecalc import *
from .exponents import *
from .refdist import *
from .ensemble import *
