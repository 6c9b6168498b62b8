"""Multi-label ICD-9 code prediction from document embeddings of clinical notes."""

__version__ = "0.1.0"

from .embeddings import (Composition, DocumentEmbedding, WordVectorTable, average_embeddings, embed_document,
                         embed_sections_concat, embed_stats_concat, load_vector_file)
from .errors import ContractError, DataIntegrityError, IcdlabError, ParseError, StageError
from .evaluation import ScoreTable, cross_validate, f1_per_label, kfold_split, macro_f1, micro_f1
from .icd9 import (GroupTable, LabelMode, LabelSpace, build_label_matrix, build_label_space, load_labels,
                   parse_code, sub_level_group, top_level_group)
from .linear import LinearModel, TrainConfig, predict_binary, predict_prob, train_logistic, train_sgd
from .multilabel import (br_predict, br_train, cc_predict, cc_train, ecc_predict, ecc_train, mlknn_predict,
                         mlknn_train, predict_scores)
from .stats import friedman_test, nemenyi_cd, render_cd_plot
from .text import (PreprocessConfig, apply_pos_tags, apply_split_tags, load_corpus, preprocess, split_sections,
                   tokenize)
