"""netpolar: structural polarization scores with null-model normalization.

Pipeline: load an edge list, preprocess to the simple giant component,
bisect with one of three partitioners, score with eight polarization
measures, and normalize each score against a dk-series null-model
ensemble. Evaluation helpers compare scores on labeled corpora by
ROC/AUC.
"""

from .evaluation import (
    LabeledScore,
    RocCurve,
    mean_combine,
    minmax_rescale,
    read_labeled_csv,
    roc,
    roc_from_arrays,
    windowed_auc,
)
from .graph import (
    EdgeListData,
    Graph,
    degree_assortativity,
    graph_summary,
    joint_degree_matrix,
    load_edge_list,
    preprocess,
    write_edge_list,
    write_label_map,
    write_partition_csv,
)
from .normalize import (
    NormalizedScore,
    NullEnsemble,
    denoise,
    denoise_value,
    null_ensemble,
    null_ensembles,
)
from .nullmodels import (
    NullModelSpec,
    gen_er,
    gen_powerlaw,
    gen_sbm,
    powerlaw_degree_sequence,
    randomize,
    sample_configuration,
    sample_dk2,
)
from .partition import (
    MincutBisection,
    ModularityRefinement,
    SpectralBisection,
    bisect_mincut,
    bisect_spectral,
    make_partitioner,
    refine_modularity,
)
from .scores import (
    DOMAINS,
    SCORE_IDS,
    ConvergenceError,
    ScoreConfig,
    ScoreResult,
    absorption_probabilities,
    aei_index,
    arwc,
    bcc,
    bp,
    dp,
    edge_betweenness,
    ei_index,
    modularity,
    rwc,
    score_all,
    top_degree_influencers,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "EdgeListData",
    "Graph",
    "load_edge_list",
    "preprocess",
    "joint_degree_matrix",
    "degree_assortativity",
    "graph_summary",
    "write_edge_list",
    "write_label_map",
    "write_partition_csv",
    "MincutBisection",
    "SpectralBisection",
    "ModularityRefinement",
    "bisect_mincut",
    "bisect_spectral",
    "refine_modularity",
    "make_partitioner",
    "SCORE_IDS",
    "DOMAINS",
    "ScoreConfig",
    "ScoreResult",
    "ConvergenceError",
    "edge_betweenness",
    "absorption_probabilities",
    "top_degree_influencers",
    "rwc",
    "arwc",
    "bcc",
    "bp",
    "dp",
    "modularity",
    "ei_index",
    "aei_index",
    "score_all",
    "gen_er",
    "sample_configuration",
    "sample_dk2",
    "randomize",
    "powerlaw_degree_sequence",
    "gen_powerlaw",
    "gen_sbm",
    "NullModelSpec",
    "NullEnsemble",
    "NormalizedScore",
    "null_ensemble",
    "null_ensembles",
    "denoise",
    "denoise_value",
    "LabeledScore",
    "RocCurve",
    "roc",
    "roc_from_arrays",
    "windowed_auc",
    "minmax_rescale",
    "mean_combine",
    "read_labeled_csv",
]
