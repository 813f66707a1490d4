"""Filtered (phi,N)-modules and Wach modules over truncated p-adic power series."""

from .errors import (FormatError, InvalidCharacterValue, InvariantError, NotAUnit, NotInSpan,
                     NotUnipotent, NotUnipotentModX, ParameterError, PrecisionError,
                     UnsupportedEigenstructure, WachlabError)
from .filtered import (AdmissibilityVerdict, BlockSpec, Decomposition, Flag, FilPhiNModule,
                       crystalline_companion, decompose_standard, direct_sum, griffiths_check,
                       hat_filtration, is_admissible, is_naive, isomorphic, standard_block, sym_power,
                       t_H, t_N, tensor, twist, unit_object)
from .padic import (RingParams, SeriesMatrix, TruncSeries, invert, q_series, solve_membership,
                    subst_gamma, subst_phi, x_valuation)
from .wach import (WachModule, WachReport, build_log_ambient, build_standard_wach, check_relations,
                   direct_sum_wach, exp_check, monodromy, naive_envelope, q_filtration, reduce_mod_X,
                   tau_power, verify_wach)
from .formats import parse_filmod, parse_wach, serialize_filmod, serialize_wach

__version__ = "0.1.0"
