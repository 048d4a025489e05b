"""Multiteam structures and existential second-order sentences over them."""
from .back import translate_eso_to_mts
from .encode import UnencodableAtom, encode_atom, translate_mts_to_eso
from .normal import holds_on_empty, is_normal_form, normal_form
from .solve import Checker, SolveCapExceeded, SolveCaps, eval_eso, solve_enumerate, solve_smt
from .terms import (ZERO, Add, Apply, EsoError, EsoSentence, MAnd, MExists, MForall, MOr, Mul,
                    MultiteamStructure, NotPresburger, SOQuant, Sum, TermEq, Zero, eval_matrix,
                    eval_term)
