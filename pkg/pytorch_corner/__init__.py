from pytorch_corner import circuits
from pytorch_corner import corner
from pytorch_corner import dense
from pytorch_corner import errors
from pytorch_corner import experiments
from pytorch_corner import integrators
from pytorch_corner import kerr_cat
from pytorch_corner import metrics
from pytorch_corner import noise
from pytorch_corner import ops
from pytorch_corner import recorder
from pytorch_corner import tomography

__all__ = ['circuits', 'corner', 'dense', 'errors', 'experiments',
           'integrators', 'kerr_cat', 'metrics', 'noise', 'ops', 'recorder',
           'tomography']
