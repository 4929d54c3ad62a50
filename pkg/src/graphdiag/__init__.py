"""graphdiag: does graph structure help semi-supervised node classification?

The package measures how much a graph's community structure says about its
node labels (the uncertainty coefficient U(L|C)), rebuilds the graph under
null models that keep or destroy that structure, trains feature-only and
graph-propagation classifiers on every variant, and turns the outcome into
an applicability verdict.
"""

from .community import BlockMatrix, Partition, block_density_matrix, louvain, modularity
from .graphs import (Dataset, FeatureMatrix, GraphError, LabeledGraph, LabelVector,
                     connected_components, degree_sequence, edge_density,
                     largest_connected_component, remove_rare_labels,
                     select_components, to_undirected)
from .harness import (AnalysisResult, Decision, SplitSet, StudyConfig, StudyReport,
                      SweepResult, SweepRow, TrainSettings, Verdict, analyze_dataset,
                      emit_report, guideline_verdict, load_config, make_splits,
                      run_ablation_study, run_perturbation_sweep)
from .infotheory import (DegenerateDistributionError, JointCounts, entropy,
                         joint_counts, mutual_information,
                         normalized_mutual_information, uncertainty_coefficient)
from .io import load_dataset
from .models import (GcnModel, LogRegModel, NormalizedAdjacency, TrainConfig,
                     TrainingDivergedError, accuracy, gcn_forward, load_params,
                     logreg_forward, normalized_adjacency, save_params,
                     sgc_propagate, train_gcn, train_logreg)
from .nullmodels import (GraphVariant, RewireStallWarning, generate_erdos_renyi,
                         generate_sbm, rewire_configuration_model,
                         swap_perturbation)
from .stats import UTestResult, bonferroni, mann_whitney_u

__version__ = "0.1.0"
