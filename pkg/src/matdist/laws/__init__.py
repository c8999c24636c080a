from .autodiff import (LawEvaluation, evaluate, evaluate_batch, evaluate_values, jets_to_array,
                       split_gradient)
from .catalog import catalog, catalog_names, catalog_text
from .expr import BinOp, Call, Neg, Num, Var, to_text
from .parser import LawExpr, parse_law, tokenize

__all__ = [
    "BinOp", "Call", "LawEvaluation", "LawExpr", "Neg", "Num", "Var", "catalog", "catalog_names",
    "catalog_text", "evaluate", "evaluate_batch", "evaluate_values", "jets_to_array", "parse_law",
    "split_gradient", "to_text", "tokenize",
]
