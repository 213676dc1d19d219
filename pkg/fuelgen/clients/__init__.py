from fuelgen.clients.generator import Generator
from fuelgen.clients.calibrator import Calibrator
from fuelgen.clients.ingestor import Ingestor

(Generator, Calibrator, Ingestor)  # noqa
