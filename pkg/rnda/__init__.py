from .errors import *
from .special import *
from .jack import *
from .hypergeom import *
from .generators import *
from .matrix import *
from .wishart import *
from .sampling import *
from .tools import *
from .log import get_logger

get_logger()
