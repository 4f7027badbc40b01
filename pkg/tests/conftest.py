"""Shared fixtures: the built-in models and their cached pipelines."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import pytest

from pqc.connection import CanonicalConnection, build_connection
from pqc.curvature import CurvatureData, curvature_tensor, ricci_contractions
from pqc.models import builtin_heisenberg, builtin_l0, gauge_transform, random_gauge
from pqc.structure import PqcStructure


@dataclass(frozen=True)
class Pipeline:
    st: PqcStructure
    conn: CanonicalConnection
    cd: CurvatureData


def run_pipeline(st: PqcStructure) -> Pipeline:
    conn = build_connection(st)
    return Pipeline(st, conn, ricci_contractions(curvature_tensor(conn)))


@functools.lru_cache(maxsize=None)
def builtin(name: str) -> PqcStructure:
    family, _, param = name.partition("-")
    if family == "heisenberg":
        return builtin_heisenberg(int(param))
    return builtin_l0(param)


@functools.lru_cache(maxsize=None)
def pipeline(name: str) -> Pipeline:
    return run_pipeline(builtin(name))


@functools.lru_cache(maxsize=None)
def gauged(name: str, seed: int) -> PqcStructure:
    st = builtin(name)
    return gauge_transform(st, random_gauge(st, seed))


@functools.lru_cache(maxsize=None)
def gauged_pipeline(name: str, seed: int) -> Pipeline:
    return run_pipeline(gauged(name, seed))


BUILTINS = ("heisenberg-1", "l0-1", "l0-3", "heisenberg-2")


@pytest.fixture(params=BUILTINS)
def builtin_name(request) -> str:
    return request.param
