"""Monte Carlo laboratory for the eigenvalue counting function of Wigner matrices."""

from .ensembles import (
    EntryDistribution,
    EnsembleSpec,
    SeedStream,
    gue_matched_three_point,
    sample_dense,
    sample_tridiagonal_beta,
    verify_moment_match,
)
from .semicircle import TheoryPrediction, predict
from .spectral import (
    HermitianMatrix,
    Spectrum,
    TridiagonalMatrix,
    all_eigenvalues,
    counting_function,
    householder_tridiagonalize,
    kth_eigenvalue,
    negcount,
)

__version__ = "0.1.0"
