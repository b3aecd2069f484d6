"""Benchmark generators, experiment runner and command line interface."""

from .experiment import ComparisonReport, ExperimentSpec, run_chained, run_experiment, run_topologies
from .generators import gen_diamond, gen_linear, gen_pageload, gen_processing, gen_star, parse_generator
