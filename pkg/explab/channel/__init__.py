__version_info__ = ('0', '1', '0')
__version__ = '.'.join(__version_info__)

from .channel import *
