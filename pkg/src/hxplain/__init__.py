"""Unsolvability explanation and model reconciliation for linear hybrid automata."""

from .core import (Affine, Automaton, Edge, HxError, LinearConstraint, Location, Op, Plan, PlanningProblem, Run,
                   RunStep, rat, validate_problem)
from .encoding import check_path, encode_path
from .explain import explain_unsolvability, reach_goal, reach_subproblem
from .graph import AbstractPath, abstract_graph, enumerate_paths, iter_paths
from .lp import ConstraintSystem, deletion_filter_iis, solve_feasibility
from .model_io import ModelDocument, parse_model, read_model, serialize_model, write_model
from .reconcile import ModelPair, reconcile

__version__ = "0.1.0"
