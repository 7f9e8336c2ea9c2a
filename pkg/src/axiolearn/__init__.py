"""axiolearn: possibilistic scoring of atomic OWL class axioms and fast
similarity-based prediction of those scores.

Pipeline: parse RDF instance data (rdf_store), build the subsumption
hierarchy and concept similarity matrix (hierarchy), score or extract
labeled axioms (scorer), turn them into an axiom similarity matrix whose
rows are feature vectors (axiom_similarity), and train regression models
that predict scores for new candidates (learner).  instance_baseline holds
the instance-counting similarity used only for comparison experiments.
"""

__version__ = "0.1.0"

from axiolearn.rdf_store import Dataset, Literal, ParseError, Triple, parse_file, parse_triples
from axiolearn.hierarchy import (
    ConceptSimilarityMatrix,
    CycleError,
    Hierarchy,
    UnknownConceptError,
    VIRTUAL_ROOT,
)
from axiolearn.scorer import (
    Axiom,
    AxiomKind,
    NegMode,
    ScoreReport,
    ari,
    content_counts,
    extract_labeled_axioms,
    necessity,
    possibility,
    score_axiom,
)
from axiolearn.axiom_similarity import (
    Asf,
    AxiomSimilarityMatrix,
    LabeledAxiomSet,
    axiom_pair_similarity,
    build_axiom_matrix,
    encode_axiom,
)
from axiolearn.instance_baseline import SubsumptionPair, build_instance_matrix, instance_similarity
from axiolearn.learner import (
    EvalReport,
    SingularSystemError,
    SplitPlan,
    cross_validate,
    explained_variance,
    fit,
    load_model,
    predict,
    predict_detailed,
    rmse,
    save_model,
    split_no_leakage,
)
