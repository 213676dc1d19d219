from collections import namedtuple

from fuelgen.clients.shared import _Base
from fuelgen.core import ingest
from fuelgen.exceptions import InputError

IngestResult = namedtuple('IngestResult', 'disks components n_points n_clipped n_dropped')


class Ingestor(_Base):
    """Turns terrestrial laser scan point clouds into observed DiskSets."""

    def __init__(self, debug_logging=True, config=None, workers=None):
        super().__init__(self.__class__.__name__, debug_logging, config, workers)

    def ingest(self, cloud, seed=None):
        """Returns an IngestResult for an (n x 3) array of x, y, z returns.

        Returns between ``ingest.z_min`` and ``ingest.z_max`` inside the
        domain are kept, a sparse isotropic mixture is fit to their x, y,
        and each component becomes a disk of radius twice its sd.

        Raise InputError when too few returns survive clipping.
        """
        seed, _ = self.resolve_seed(seed)
        v = self.config.values
        domain = self.domain()

        points = ingest.clip_midstory(cloud, v['ingest.z_min'], v['ingest.z_max'], domain)
        n_points = len(cloud)
        self.logger.info("kept %d of %d returns in the %g-%g m band",
                         len(points), n_points, v['ingest.z_min'], v['ingest.z_max'])
        if len(points) == 0:
            raise InputError("too few points: no returns between %g and %g m inside the domain"
                             % (v['ingest.z_min'], v['ingest.z_max']))

        components = ingest.fit_gmm(points, max_components=v['ingest.max_components'],
                                    sd_bounds=(v['ingest.sd_min'], v['ingest.sd_max']),
                                    weight_floor=v['ingest.weight_floor'], seed=seed,
                                    restarts=v['ingest.restarts'], max_iter=v['ingest.max_iter'])
        disks, dropped = ingest.components_to_disks(components, domain)

        return IngestResult(disks, components, n_points, n_points - len(points), dropped)

    def ingest_file(self, path, seed=None):
        """Like :func:`ingest` for a whitespace-delimited ``x y z`` file."""
        return self.ingest(ingest.load_pointcloud(path), seed)
