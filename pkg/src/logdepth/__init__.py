"""Bit-string arithmetic, stratified formulas, inductive definitions, postfix
propositional evaluation and a Frege proof checker."""

__version__ = "0.1.0"
