from fuelgen._version import __version__
from fuelgen.clients import Generator, Calibrator, Ingestor
from fuelgen.exceptions import FuelgenError

__license__ = 'BSD 3-Clause'
__title__ = 'fuelgen'

# appease flake8: the imports are purposeful
(__version__, Generator, Calibrator, Ingestor, FuelgenError)
